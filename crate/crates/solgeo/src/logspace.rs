//! Signed log-magnitude arithmetic.
//!
//! The coordinates `X_t`, `Y_t` and the clocks `V_t` of the Sol diffusion
//! grow like `e^{p|a|t}` and overflow `f64` well inside the horizons used
//! by the limit-theorem experiments, while every downstream statistic only
//! needs `log|X_t|` and the sign. Accumulation is therefore done on the
//! pair `(sign, log|value|)`.

/// A real number stored as `sign * exp(log_abs)`.
///
/// `sign == 0` encodes exact zero (with `log_abs = -inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSigned {
    pub log_abs: f64,
    pub sign: i8,
}

impl LogSigned {
    pub const ZERO: LogSigned = LogSigned {
        log_abs: f64::NEG_INFINITY,
        sign: 0,
    };

    /// Encode a finite `f64`.
    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogSigned {
                log_abs: v.abs().ln(),
                sign: if v > 0.0 { 1 } else { -1 },
            }
        }
    }

    /// Build from a log-magnitude and a sign carrier.
    pub fn from_log(log_abs: f64, sign_of: f64) -> Self {
        if sign_of == 0.0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogSigned {
                log_abs,
                sign: if sign_of > 0.0 { 1 } else { -1 },
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Materialize; overflows to `+-inf` beyond `f64::MAX`.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_abs.exp()
        }
    }

    pub fn abs_to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.log_abs.exp()
        }
    }

    pub fn neg(&self) -> Self {
        LogSigned {
            log_abs: self.log_abs,
            sign: -self.sign,
        }
    }

    /// Multiply by `exp(shift)`.
    pub fn scale_exp(&self, shift: f64) -> Self {
        if self.sign == 0 {
            *self
        } else {
            LogSigned {
                log_abs: self.log_abs + shift,
                sign: self.sign,
            }
        }
    }

    /// `self + other`, stable in log space. Cancellation between close
    /// magnitudes of opposite sign loses relative precision exactly as
    /// ordinary floating point does.
    pub fn add(&self, other: LogSigned) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return *self;
        }
        let (big, small) = if self.log_abs >= other.log_abs {
            (*self, other)
        } else {
            (other, *self)
        };
        let d = small.log_abs - big.log_abs; // <= 0
        if self.sign == other.sign {
            LogSigned {
                log_abs: big.log_abs + libm::log1p(libm::exp(d)),
                sign: big.sign,
            }
        } else {
            let m = -libm::expm1(d); // in [0, 1]
            if m <= 0.0 {
                Self::ZERO
            } else {
                LogSigned {
                    log_abs: big.log_abs + m.ln(),
                    sign: big.sign,
                }
            }
        }
    }
}

/// A signed accumulator `m * e^{shift}` with `|m|` kept near 1 by
/// occasional renormalization: the cheap representation for sums whose
/// terms grow or shrink exponentially. One `exp` per added term, versus
/// three transcendental calls for log-space addition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSigned {
    m: f64,
    shift: f64,
}

impl ScaledSigned {
    pub const ZERO: ScaledSigned = ScaledSigned { m: 0.0, shift: 0.0 };

    /// `self += e^{log_scale} * factor`. Safe while single terms do not
    /// jump more than ~700 e-foldings past the running magnitude, which
    /// holds for any increment process with bounded per-step log drift.
    #[inline]
    pub fn add_exp_prod(&mut self, log_scale: f64, factor: f64) {
        self.m += (log_scale - self.shift).exp() * factor;
        let a = self.m.abs();
        if a > 1e100 || (a < 1e-100 && a != 0.0) {
            self.shift += a.ln();
            self.m = if self.m > 0.0 { 1.0 } else { -1.0 };
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0.0
    }

    /// `log|value|`; `-inf` for zero.
    pub fn log_abs(&self) -> f64 {
        self.shift + self.m.abs().ln()
    }

    pub fn signum(&self) -> f64 {
        self.m.signum() * ((self.m != 0.0) as i32 as f64)
    }

    /// Materialize; saturates to `+-inf` beyond the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m * self.shift.exp()
        }
    }

    pub fn to_log_signed(&self) -> LogSigned {
        LogSigned::from_log(self.log_abs(), self.m)
    }
}

/// `log(exp(a) + exp(b))`, the nonnegative accumulator companion.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_add() {
        let a = LogSigned::from_f64(3.5);
        let b = LogSigned::from_f64(-1.25);
        assert!((a.add(b).to_f64() - 2.25).abs() < 1e-12);
        assert!((a.add(a).to_f64() - 7.0).abs() < 1e-12);
        assert!(a.add(a.neg()).is_zero());
        assert_eq!(LogSigned::from_f64(0.0).add(b).to_f64(), -1.25);
    }

    #[test]
    fn survives_beyond_f64_range() {
        // 1e400-scale accumulation: impossible in plain f64.
        let huge = LogSigned::from_log(1000.0, 1.0);
        let sum = huge.add(huge);
        assert!((sum.log_abs - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
        assert_eq!(sum.to_f64(), f64::INFINITY);
    }

    #[test]
    fn log_add_exp_matches_direct() {
        let v = log_add_exp(1.0, 2.0);
        assert!((v - (1.0f64.exp() + 2.0f64.exp()).ln()).abs() < 1e-14);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }

    #[test]
    fn scaled_accumulator_tracks_plain_sum() {
        let mut acc = ScaledSigned::ZERO;
        let mut plain = 0.0f64;
        for k in 0..100 {
            let scale = 0.11 * k as f64;
            let factor = if k % 3 == 0 { -0.4 } else { 0.7 };
            acc.add_exp_prod(scale, factor);
            plain += scale.exp() * factor;
        }
        assert!((acc.to_f64() - plain).abs() < 1e-12 * plain.abs());
        assert!((acc.log_abs() - plain.abs().ln()).abs() < 1e-12);
        assert_eq!(acc.signum(), plain.signum());
    }

    #[test]
    fn scaled_accumulator_survives_overflow_scales() {
        let mut acc = ScaledSigned::ZERO;
        for k in 0..2000 {
            acc.add_exp_prod(k as f64, 1.0);
        }
        // Geometric sum of e^k: log ~ 1999 + log(e/(e-1))
        let expect = 1999.0 + (std::f64::consts::E / (std::f64::consts::E - 1.0)).ln();
        assert!((acc.log_abs() - expect).abs() < 1e-9, "{}", acc.log_abs());
        assert_eq!(acc.to_f64(), f64::INFINITY);
        assert!(!acc.is_zero());
    }
}
