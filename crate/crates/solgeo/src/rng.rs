//! Counter-based random number generation.
//!
//! Monte Carlo runs fan out over paths and must reduce identically for any
//! worker count, so the generator is a pure function of
//! `(seed, stream, path, step, channel)` instead of mutable state: a
//! Philox-style 4x64 block cipher with 10 rounds. Each `(path, step)` pair
//! owns two counter blocks worth of output, decoded into standard normal
//! channels via Box-Muller.

/// Multipliers and Weyl constants of the 4x64 Philox rounds.
const M0: u64 = 0xD2E7_470E_E14C_6C93;
const M1: u64 = 0xCA5A_8263_9512_1157;
const W0: u64 = 0x9E37_79B9_7F4A_7C15;
const W1: u64 = 0xBB67_AE85_84CA_A73B;

#[inline]
fn mulhilo(a: u64, b: u64) -> (u64, u64) {
    let wide = (a as u128) * (b as u128);
    ((wide >> 64) as u64, wide as u64)
}

/// One 10-round keyed permutation of a 4x64 counter block.
#[inline]
pub fn philox4x64(mut ctr: [u64; 4], key: [u64; 2]) -> [u64; 4] {
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, ctr[0]);
        let (hi1, lo1) = mulhilo(M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

#[inline]
fn u64_to_unit(x: u64) -> f64 {
    // (0, 1], 53 significant bits; never 0 so ln() below is finite.
    ((x >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0)
}

#[inline]
fn box_muller(u1: u64, u2: u64) -> (f64, f64) {
    let r = (-2.0 * u64_to_unit(u1).ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u64_to_unit(u2);
    (r * libm::cos(theta), r * libm::sin(theta))
}

/// Independent logical streams drawn from one seed. Distinct stream ids
/// never share counter blocks, so e.g. reference-law sampling cannot
/// collide with path simulation under the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamId {
    /// Driving noise of the Sol diffusion (channels W, W1, W2).
    Path = 0,
    /// Extra channels for the time-change scheme (independent of W).
    TimeChange = 1,
    /// Standard Brownian motion reference functionals.
    Reference = 2,
    /// Synthetic draws for estimator self-tests.
    Synthetic = 3,
}

/// Keyed source of standard normal variates.
#[derive(Debug, Clone, Copy)]
pub struct NormalSource {
    key: [u64; 2],
}

/// Normals attached to one `(path, step)` cell: the three driving
/// increments of the diffusion plus a spare lane.
#[derive(Debug, Clone, Copy)]
pub struct StepGaussians {
    pub w: f64,
    pub w1: f64,
    pub w2: f64,
    pub spare: f64,
}

impl NormalSource {
    pub fn new(seed: u64, stream: StreamId) -> Self {
        NormalSource {
            key: [seed, stream as u64],
        }
    }

    /// Raw counter block of `(path, step)`.
    #[inline]
    pub fn block(&self, path: u64, step: u64) -> [u64; 4] {
        philox4x64([step, path, 0, 0x5eed], self.key)
    }

    /// Channels (W, W2) — the Box-Muller pair in lanes 0/1. Grouped so
    /// that runs needing only the vertical and transversal noise decode
    /// one pair.
    #[inline]
    pub fn pair_a(block: [u64; 4]) -> (f64, f64) {
        box_muller(block[0], block[1])
    }

    /// Channels (W1, spare) — the pair in lanes 2/3.
    #[inline]
    pub fn pair_b(block: [u64; 4]) -> (f64, f64) {
        box_muller(block[2], block[3])
    }

    /// The four normal channels of `(path, step)`.
    #[inline]
    pub fn step(&self, path: u64, step: u64) -> StepGaussians {
        let block = self.block(path, step);
        let (w, w2) = Self::pair_a(block);
        let (w1, spare) = Self::pair_b(block);
        StepGaussians { w, w1, w2, spare }
    }

    /// A single normal channel (0..=3) of `(path, step)`.
    #[inline]
    pub fn normal(&self, path: u64, step: u64, channel: u8) -> f64 {
        let g = self.step(path, step);
        match channel {
            0 => g.w,
            1 => g.w1,
            2 => g.w2,
            _ => g.spare,
        }
    }

    /// A uniform in (0,1] from the same cell, lane 0.
    #[inline]
    pub fn uniform(&self, path: u64, step: u64) -> f64 {
        let block = philox4x64([step, path, 1, 0x5eed], self.key);
        u64_to_unit(block[0])
    }
}
