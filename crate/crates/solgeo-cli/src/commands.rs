//! Experiment implementations behind the CLI subcommands. Each returns an
//! [`ExperimentReport`] plus optional CSV artifacts; pass/fail semantics
//! live in the per-statistic thresholds.

use crate::config::{opt_f64, opt_u64, ExperimentConfig};
use solgeo::error::{Result, SolError};
use solgeo::geometry::{
    certified_upper_estimate, lower_bound_i, lower_bound_ii, upper_bound_iii, upper_bound_iv,
    SolPoint,
};
use solgeo::harmonic::{
    eigen_residual, eval_kernel, lambda_min, Boundary, GridSpec, KernelMeasureSpec, KernelSpec,
    MeasureSpec, Plane,
};
use solgeo::report::{ExperimentReport, RunMeta, TestReport};
use solgeo::rng::{NormalSource, StreamId};
use solgeo::sim::{self, BrownianPath, SimConfig};
use solgeo::stats::{
    boundary_classify, clt_sample, deviation_summaries, escape_rate, ks_statistic,
    quantile, reference_bm_triples, sample_y_infinity, tail_exponent, BoundaryPiece, KsReference,
    ReferenceLaw, SampleSet,
};

pub struct Artifacts {
    pub report: ExperimentReport,
    pub samples: Option<SampleSet>,
    pub path: Option<BrownianPath>,
}

fn sim_config(cfg: &ExperimentConfig) -> SimConfig {
    SimConfig {
        params: cfg.params,
        dt: cfg.run.dt,
        horizon: cfg.run.t,
        seed: cfg.run.seed,
        scheme: cfg.scheme,
    }
}

fn meta(cfg: &ExperimentConfig) -> RunMeta {
    RunMeta { dt: cfg.run.dt, t: cfg.run.t, n: cfg.run.n, seed: cfg.run.seed }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    match cfg.command.as_str() {
        "simulate" => simulate(cfg),
        "clt" => clt(cfg),
        "escape" => escape(cfg),
        "tails" => tails(cfg),
        "deviation" => deviation(cfg),
        "boundary" => boundary(cfg),
        "harmonic" => harmonic(cfg),
        "geometry" => geometry(cfg),
        other => Err(SolError::config("command", format!("unknown `{other}`"))),
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sc = sim_config(cfg);
    let n = cfg.run.n as usize;
    let states: Vec<_> = crate::pool_map(n, |i| sim::terminal_state(&sc, i as u64));
    let t = cfg.run.t;
    let zbar = states.iter().map(|s| s.z).sum::<f64>() / n as f64;
    let se = (t / n as f64).sqrt();
    let drift_dev = (zbar - cfg.params.a * t).abs() / se;
    let reports = vec![TestReport::new(
        "z_drift_consistency_sigmas",
        drift_dev,
        opt_f64(&cfg.options, "drift_sigmas", 4.0)?,
        n as u64,
        cfg.run.seed,
    )];
    let path = sim::simulate_path_decimated(&sc, 0, cfg.output.decimation)?;
    Ok(Artifacts {
        report: ExperimentReport::new("simulate", cfg.params, meta(cfg), reports),
        samples: Some(SampleSet::new("Z_T", t, states.iter().map(|s| s.z).collect())?),
        path: Some(path),
    })
}

fn clt(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sc = sim_config(cfg);
    let n = cfg.run.n as usize;
    let t = cfg.run.t;
    let a = cfg.params.a;
    let ks_threshold = opt_f64(&cfg.options, "ks_threshold", 0.06)?;
    let triples = clt_sample(&sc, n, t)?;
    let mut reports = Vec::new();
    let samples: SampleSet;
    if a != 0.0 {
        // the drifted coordinate is asymptotically p N (resp. q N); the
        // transversal one collapses at rate 1/sqrt(t)
        let (drifted_idx, flat_idx, scale) =
            if a > 0.0 { (0, 1, cfg.params.p) } else { (1, 0, cfg.params.q) };
        let drifted = triples.component(drifted_idx)?;
        let normalized = SampleSet::new(
            format!("{}/scale", drifted.label),
            t,
            drifted.values.iter().map(|v| v / scale).collect(),
        )?;
        let ks = ks_statistic(&normalized, KsReference::Law(ReferenceLaw::StdNormal))?;
        reports.push(TestReport::new("clt_drifted_ks", ks, ks_threshold, n as u64, cfg.run.seed));
        let flat = triples.component(flat_idx)?;
        let mut abs: Vec<f64> = flat.values.iter().map(|v| v.abs()).collect();
        abs.sort_by(f64::total_cmp);
        reports.push(TestReport::new(
            "clt_transversal_pct95",
            quantile(&abs, 0.95),
            opt_f64(&cfg.options, "transversal_pct95", 0.5)?,
            n as u64,
            cfg.run.seed,
        ));
        samples = normalized;
    } else {
        let steps = opt_u64(&cfg.options, "ref_steps", 100_000)? as usize;
        let reference = reference_bm_triples(cfg.params.p, cfg.params.q, n, steps, cfg.run.seed ^ 0x5eed)?;
        let c0 = triples.component(0)?;
        let ks0 = ks_statistic(&c0, KsReference::Sample(&reference.component(0)?))?;
        reports.push(TestReport::new("clt_x_vs_p_max_ks", ks0, ks_threshold, n as u64, cfg.run.seed));
        let c1 = triples.component(1)?;
        let ks1 = ks_statistic(&c1, KsReference::Sample(&reference.component(1)?))?;
        reports.push(TestReport::new("clt_y_vs_q_min_ks", ks1, ks_threshold, n as u64, cfg.run.seed));
        samples = c0;
    }
    // Z_t - a t = W_t exactly, at any horizon.
    let z = triples.component(2)?;
    let ksz = ks_statistic(&z, KsReference::Law(ReferenceLaw::StdNormal))?;
    reports.push(TestReport::new("clt_vertical_ks", ksz, 0.03, n as u64, cfg.run.seed));
    Ok(Artifacts {
        report: ExperimentReport::new("clt", cfg.params, meta(cfg), reports),
        samples: Some(samples),
        path: None,
    })
}

fn escape(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sc = sim_config(cfg);
    let n = cfg.run.n as usize;
    let iv = escape_rate(&sc, cfg.run.t, n)?;
    let abs_a = cfg.params.a.abs();
    let mut reports = Vec::new();
    if abs_a > 0.0 {
        reports.push(TestReport::new(
            "escape_contains_rate",
            (iv.low - abs_a).max(abs_a - iv.high),
            0.0,
            n as u64,
            cfg.run.seed,
        ));
        reports.push(TestReport::new(
            "escape_width",
            iv.width(),
            opt_f64(&cfg.options, "width_threshold", 0.3)?,
            n as u64,
            cfg.run.seed,
        ));
    } else {
        reports.push(TestReport::new(
            "escape_sublinear_high",
            iv.high,
            opt_f64(&cfg.options, "high_threshold", 0.25)?,
            n as u64,
            cfg.run.seed,
        ));
    }
    Ok(Artifacts {
        report: ExperimentReport::new("escape", cfg.params, meta(cfg), reports),
        samples: None,
        path: None,
    })
}

fn tails(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sc = sim_config(cfg);
    let n = cfg.run.n as usize;
    let target_sd = opt_f64(&cfg.options, "truncation_sd", 1e-6)?;
    let k = opt_u64(&cfg.options, "k", (n as u64 / 50).max(1000))? as usize;
    let tol = opt_f64(&cfg.options, "rel_tolerance", 0.15)?;
    let kappa = 2.0 * cfg.params.a / cfg.params.q;
    let signed = sample_y_infinity(&sc, n, target_sd)?;
    let abs = SampleSet::new("abs_y_infinity", signed.t, signed.values.iter().map(|v| v.abs()).collect())?;
    let mut reports = Vec::new();
    let est = tail_exponent(&abs, k)?;
    reports.push(TestReport::new(
        "tail_exponent_rel_err",
        (est.kappa_hat / kappa - 1.0).abs(),
        tol,
        n as u64,
        cfg.run.seed,
    ));
    // k-robustness sweep
    for (label, kk) in [("tail_exponent_half_k", k / 2), ("tail_exponent_double_k", 2 * k)] {
        if kk >= 10 && kk <= n / 10 {
            let e = tail_exponent(&abs, kk)?;
            reports.push(TestReport::new(
                label,
                (e.kappa_hat / kappa - 1.0).abs(),
                0.5,
                n as u64,
                cfg.run.seed,
            ));
        }
    }
    Ok(Artifacts {
        report: ExperimentReport::new("tails", cfg.params, meta(cfg), reports),
        samples: Some(abs),
        path: None,
    })
}

fn deviation(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sc = sim_config(cfg);
    let n = cfg.run.n as usize;
    let slack = opt_f64(&cfg.options, "slack", 1.0)?;
    let fraction = opt_f64(&cfg.options, "fraction", 0.95)?;
    let bound = 2.0 / cfg.params.a.abs() + slack;
    let sums = deviation_summaries(&sc, n)?;
    let bad = sums.iter().filter(|s| **s > bound).count();
    let reports = vec![TestReport::new(
        "deviation_exceedance_fraction",
        bad as f64 / n as f64,
        1.0 - fraction,
        n as u64,
        cfg.run.seed,
    )];
    Ok(Artifacts {
        report: ExperimentReport::new("deviation", cfg.params, meta(cfg), reports),
        samples: Some(SampleSet::new("max_proxy_over_log_n", cfg.run.t, sums)?),
        path: None,
    })
}

fn boundary(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sc = sim_config(cfg);
    let n = cfg.run.n as usize;
    let decimation = cfg.output.decimation.max(100);
    let labels: Vec<BoundaryPiece> = crate::pool_map(n, |i| {
        sim::simulate_path_decimated(&sc, i as u64, decimation)
            .map(|p| boundary_classify(&p, &cfg.params))
            .unwrap_or(BoundaryPiece::Undecided)
    });
    let count = |piece: BoundaryPiece| labels.iter().filter(|l| **l == piece).count();
    let mut reports = Vec::new();
    let a = cfg.params.a;
    if a != 0.0 {
        let expect = if a > 0.0 { BoundaryPiece::VarpiP } else { BoundaryPiece::VarpiQ };
        let good = count(expect);
        reports.push(TestReport::new(
            "boundary_mislabel_fraction",
            1.0 - good as f64 / n as f64,
            opt_f64(&cfg.options, "mislabel_threshold", 0.01)?,
            n as u64,
            cfg.run.seed,
        ));
    } else {
        let drifted = count(BoundaryPiece::VarpiP) + count(BoundaryPiece::VarpiQ);
        reports.push(TestReport::new(
            "boundary_drifted_labels_at_zero_drift",
            drifted as f64,
            0.0,
            n as u64,
            cfg.run.seed,
        ));
        let settled = count(BoundaryPiece::Glue) + count(BoundaryPiece::Undecided);
        reports.push(TestReport::new(
            "boundary_nonglue_fraction",
            1.0 - settled as f64 / n as f64,
            0.05,
            n as u64,
            cfg.run.seed,
        ));
    }
    Ok(Artifacts {
        report: ExperimentReport::new("boundary", cfg.params, meta(cfg), reports),
        samples: None,
        path: None,
    })
}

fn harmonic(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let n_configs = opt_u64(&cfg.options, "configs", 50)? as usize;
    let eps = opt_f64(&cfg.options, "eps", 3e-4)?;
    let tol = opt_f64(&cfg.options, "residual_threshold", 1e-5)?;
    let src = NormalSource::new(cfg.run.seed, StreamId::Synthetic);
    let mut at = 0u64;
    let mut uniform = move || {
        at += 1;
        src.uniform(at, 3)
    };
    let grid = GridSpec {
        center: SolPoint::ORIGIN,
        half: [0.8, 0.8, 0.8],
        counts: [5, 5, 5],
        eps,
    };
    let mut worst = 0.0f64;
    for _ in 0..n_configs {
        let p = 0.6 + 0.9 * uniform();
        let q = 0.6 + 0.9 * uniform();
        let a = -1.2 + 2.4 * uniform();
        let lambda = lambda_min(a) + uniform();
        let params = solgeo::geometry::SolParams { p, q, a };
        let atoms = |uniform: &mut dyn FnMut() -> f64| -> Result<MeasureSpec> {
            let mut v = Vec::new();
            let count = 1 + (uniform() * 3.0) as usize;
            for _ in 0..count {
                let b = if uniform() < 0.25 {
                    Boundary::Omega
                } else {
                    Boundary::Xi(-2.0 + 4.0 * uniform())
                };
                v.push((b, 0.2 + 1.8 * uniform()));
            }
            MeasureSpec::new(v)
        };
        let nu1 = atoms(&mut uniform)?;
        let nu2 = atoms(&mut uniform)?;
        worst = worst.max(eigen_residual(&nu1, &nu2, &params, lambda, &grid)?);
    }
    let mut reports = vec![TestReport::new(
        "eigen_residual_randomized",
        worst,
        tol,
        n_configs as u64,
        cfg.run.seed,
    )];

    // lambda_min exponential e^{-az}
    let nu1 = MeasureSpec::point_mass(Boundary::Omega, 1.0)?;
    let r = eigen_residual(
        &nu1,
        &MeasureSpec::default(),
        &cfg.params,
        lambda_min(cfg.params.a),
        &GridSpec { eps: 1e-3, ..grid },
    )?;
    reports.push(TestReport::new("eigen_residual_lambda_min", r, 1e-6, 125, cfg.run.seed));

    // classical-kernel consistency at p=1, a=-1/2, lambda=0
    let spec = KernelSpec::new(1.0, -0.5, 0.0, Boundary::Xi(0.7))?;
    let mut worst_rel = 0.0f64;
    for k in 0..200u64 {
        let x = -3.0 + 6.0 * src.uniform(k, 5);
        let z = -2.0 + 4.0 * src.uniform(k, 6);
        let v = eval_kernel(&spec, solgeo::geometry::HypPoint::new(x, z))?;
        let classical = (0.7f64 * 0.7 + 1.0) * z.exp() / ((0.7 - x).powi(2) + (2.0 * z).exp());
        worst_rel = worst_rel.max((v - classical).abs() / classical);
    }
    reports.push(TestReport::new("classical_kernel_rel_err", worst_rel, 1e-12, 200, cfg.run.seed));

    // User-supplied kernel families, in the wire format
    // {plane, curvature, drift, lambda, atoms: [{xi|"omega", w}]}.
    if let Some(kernels) = cfg.options.get("kernels") {
        let specs: Vec<KernelMeasureSpec> = serde_json::from_value(kernels.clone())
            .map_err(|e| SolError::config("options.kernels", e.to_string()))?;
        for (i, ks) in specs.iter().enumerate() {
            let measure = ks.measure()?;
            let (params_eff, nu1, nu2) = match ks.plane {
                Plane::First => (
                    solgeo::geometry::SolParams::new(ks.curvature, cfg.params.q, ks.drift)?,
                    measure,
                    MeasureSpec::default(),
                ),
                Plane::Second => (
                    solgeo::geometry::SolParams::new(cfg.params.p, ks.curvature, -ks.drift)?,
                    MeasureSpec::default(),
                    measure,
                ),
            };
            let r = eigen_residual(&nu1, &nu2, &params_eff, ks.lambda, &grid)?;
            reports.push(TestReport::new(
                format!("kernel_residual[{i}]"),
                r,
                tol,
                1,
                cfg.run.seed,
            ));
        }
    }

    Ok(Artifacts {
        report: ExperimentReport::new("harmonic", cfg.params, meta(cfg), reports),
        samples: None,
        path: None,
    })
}

fn geometry(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let n = cfg.run.n as usize;
    let tol = opt_f64(&cfg.options, "upper_slack", 1e-3)?;
    let params = cfg.params;
    let src = NormalSource::new(cfg.run.seed, StreamId::Synthetic);
    let violations: Vec<u32> = crate::pool_map(n, |i| {
        let u = |k: u64| src.uniform(i as u64, k);
        let sgn = |k: u64| if src.uniform(i as u64, k) < 0.5 { -1.0 } else { 1.0 };
        let g = SolPoint::new(
            sgn(10) * 10f64.powf(-2.0 + 4.0 * u(0)),
            sgn(11) * 10f64.powf(-2.0 + 4.0 * u(1)),
            -10.0 + 20.0 * u(2),
        );
        let est = certified_upper_estimate(g, params);
        let lower = lower_bound_i(g).max(lower_bound_ii(g, params).unwrap_or(0.0));
        let upper =
            upper_bound_iii(g, params).min(upper_bound_iv(g, params).unwrap_or(f64::INFINITY));
        u32::from(lower > est + 1e-9) + u32::from(est > upper + tol)
    });
    let total: u32 = violations.iter().sum();
    let reports = vec![TestReport::new(
        "sandwich_violations",
        total as f64,
        0.0,
        n as u64,
        cfg.run.seed,
    )];
    Ok(Artifacts {
        report: ExperimentReport::new("geometry", cfg.params, meta(cfg), reports),
        samples: None,
        path: None,
    })
}
