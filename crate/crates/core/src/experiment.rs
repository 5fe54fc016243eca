//! Reproducible Monte Carlo experiment engine: independent trials of the
//! extremal statistic, rescaling by a limit law, empirical CDFs and
//! Kolmogorov-Smirnov distances, convergence studies over n-grids, and the
//! exact small-case oracle for the circular minimal spacing.
//!
//! Trial i draws from a stream keyed by `mix(master_seed, i)`, so a trial set
//! depends only on the configuration, never on worker count or scheduling.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{u_max, Kernel};
use crate::limit::LimitLaw;
use crate::special::binomial;
use crate::sphere::PointLaw;
use crate::stream::{mix, RngStream};

/// Default cap on kernel evaluations per engine call.
pub const DEFAULT_MAX_EVALUATIONS: u128 = 5_000_000_000;

/// A full description of one simulation experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub law: PointLaw,
    pub kernel: Kernel,
    /// Sample size per trial.
    pub n: usize,
    /// Number of independent trials.
    pub trials: u32,
    pub limit: LimitLaw,
    pub master_seed: u64,
    /// Shard count used by estimator-style commands; echoed for provenance.
    pub shards: u32,
    /// Kernel-evaluation budget guard.
    pub max_evaluations: u128,
}

impl ExperimentConfig {
    pub fn new(law: PointLaw, kernel: Kernel, n: usize, trials: u32, master_seed: u64) -> Result<Self> {
        let limit = LimitLaw::for_kernel(kernel, &law)?;
        Ok(ExperimentConfig {
            law,
            kernel,
            n,
            trials,
            limit,
            master_seed,
            shards: 8,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Total kernel evaluations the trial runs will perform: trials * C(n, k).
    pub fn required_evaluations(&self) -> u128 {
        let k = self.kernel.degree() as u64;
        let n = self.n as u128;
        let mut subsets = 1u128;
        for i in 0..k as u128 {
            subsets = subsets * (n.saturating_sub(i)) / (i + 1);
        }
        subsets * self.trials as u128
    }

    fn validate(&self) -> Result<()> {
        if self.n < self.kernel.degree() {
            return Err(Error::InsufficientSample { n: self.n, k: self.kernel.degree() });
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".to_string()));
        }
        let required = self.required_evaluations();
        if required > self.max_evaluations {
            return Err(Error::EvalCapExceeded { required, cap: self.max_evaluations });
        }
        Ok(())
    }
}

/// Raw and rescaled extremal statistics from R independent trials.
#[derive(Debug, Clone, Serialize)]
pub struct TrialSet {
    pub raw: Vec<f64>,
    pub rescaled: Vec<f64>,
    /// Trials whose rescaled value was clamped up to 0 (rounding past the
    /// extremal constant). Must stay a vanishing fraction.
    pub clamped: u64,
    pub config: ExperimentConfig,
}

impl TrialSet {
    /// CSV export: header `trial,raw,rescaled`, decimal doubles, LF endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"trial,raw,rescaled\n")?;
        for (i, (raw, rescaled)) in self.raw.iter().zip(&self.rescaled).enumerate() {
            writeln!(w, "{i},{raw},{rescaled}")?;
        }
        Ok(())
    }
}

/// Run the configured trials. Trial i reduces a fresh n-point sample by the
/// kernel's extremal statistic; its stream is keyed by `mix(master_seed, i)`.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialSet> {
    config.validate()?;
    let raw: Vec<f64> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let stream = RngStream::from_seed(mix(config.master_seed, i));
            let mut sampler = config.law.sampler(&stream);
            let sample = sampler.sample(config.n);
            u_max(&sample, config.kernel).expect("validated config")
        })
        .collect();
    let mut clamped = 0u64;
    let rescaled = raw
        .iter()
        .map(|&h| {
            let t = config.limit.transform(h, config.n);
            if t < 0.0 {
                clamped += 1;
                0.0
            } else {
                t
            }
        })
        .collect();
    Ok(TrialSet { raw, rescaled, clamped, config: config.clone() })
}

/// Right-continuous empirical CDF with jumps of 1/R at the sorted values.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("empirical CDF needs at least one value".to_string()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("empirical CDF values must be finite".to_string()));
        }
        values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(EmpiricalCdf { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of values <= t.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.sorted.partition_point(|&x| x <= t);
        idx as f64 / self.sorted.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }
}

/// Exact sup-distance between the empirical CDF and the limit CDF, checking
/// both one-sided gaps at every jump point.
pub fn ks_statistic(ecdf: &EmpiricalCdf, limit: &LimitLaw) -> f64 {
    let r = ecdf.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in ecdf.values().iter().enumerate() {
        let f = limit.cdf(x);
        d = d.max((i + 1) as f64 / r - f).max(f - i as f64 / r);
    }
    d
}

/// Exact finite-n survival function of the circular minimal spacing for
/// uniform points on the circle: `P(S_n > s) = (1 - n s / (2 pi))^{n-1}` for
/// `s <= 2 pi / n`, and 0 beyond.
pub fn exact_min_spacing_survival(n: usize, s: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("minimal spacing needs n >= 2, got {n}")));
    }
    if !(s >= 0.0) {
        return Err(Error::domain(format!("spacing must be nonnegative, got {s}")));
    }
    let base = 1.0 - n as f64 * s / (2.0 * std::f64::consts::PI);
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok(base.powi(n as i32 - 1))
}

/// One row of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub ks: f64,
    /// Conservative half-width of the empirical CDF, 0.5/sqrt(trials).
    pub se: f64,
    pub trials: u32,
}

/// KS distances along an n-grid with a least-squares slope of
/// log KS against log n.
#[derive(Debug, Clone, Serialize)]
pub struct Study {
    pub per_n: Vec<StudyRow>,
    pub slope: f64,
}

/// Run the base configuration at every grid size with per-n independent
/// seeds (`mix(master_seed, n)`) and fit the log-log decay slope.
pub fn convergence_study(base: &ExperimentConfig, n_grid: &[usize]) -> Result<Study> {
    if n_grid.len() < 3 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadGrid { min: 3, got: n_grid.len() });
    }
    let mut per_n = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let mut config = base.clone().with_n(n);
        config.master_seed = mix(base.master_seed, n as u64);
        let trials = run_trials(&config)?;
        let ecdf = EmpiricalCdf::new(trials.rescaled)?;
        per_n.push(StudyRow {
            n,
            ks: ks_statistic(&ecdf, &config.limit),
            se: 0.5 / (config.trials as f64).sqrt(),
            trials: config.trials,
        });
    }
    // least squares on (ln n, ln KS)
    let pts: Vec<(f64, f64)> = per_n
        .iter()
        .map(|row| ((row.n as f64).ln(), row.ks.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let m = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    Ok(Study { per_n, slope: sxy / sxx })
}

/// Sanity bound used by callers sizing budgets: C(n, k) as f64.
pub fn subsets(n: usize, k: usize) -> f64 {
    binomial(n as u64, k as u64)
}
