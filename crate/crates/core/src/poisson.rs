//! Finite-n Poisson approximation machinery: Monte Carlo estimation of the
//! exceedance probability `p_{n,z}` and the joint-tuple ratios `tau_{n,z}(r)`,
//! the Poisson mean `lambda_{n,z} = C(n,k) p_{n,z}`, the explicit error bound
//! for `|P(no exceedance) - exp(-lambda)|`, and a full Monte Carlo check of
//! that inequality.
//!
//! Estimators shard their rep budget; shard s draws from `stream.child(s)`,
//! so results depend on the shard plan but never on worker scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{self, exceedance_count, Kernel};
use crate::special::{binomial, log_binomial};
use crate::sphere::{PointLaw, RadialLaw};
use crate::stream::RngStream;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// tau estimate for one overlap count r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauEstimate {
    pub r: usize,
    pub value: f64,
    pub std_error: f64,
}

fn split_reps(reps: u64, shards: u32) -> Vec<u64> {
    let shards = shards.max(1) as u64;
    let base = reps / shards;
    let extra = reps % shards;
    (0..shards).map(|s| base + u64::from(s < extra)).collect()
}

fn check_estimator_inputs(law: &PointLaw, kernel: Kernel, reps: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::Config("estimator budget must be at least 1 rep".to_string()));
    }
    if kernel == Kernel::Angle && law.radial() != &RadialLaw::UnitNorm {
        return Err(Error::domain(
            "angle kernel requires points on the sphere (unit-norm radial law)".to_string(),
        ));
    }
    Ok(())
}

fn eval_tuple(kernel: Kernel, pts: &[f64], dim: usize, idx: &[usize]) -> f64 {
    let p = |i: usize| &pts[idx[i] * dim..(idx[i] + 1) * dim];
    match kernel {
        Kernel::Distance => kernel::dist(p(0), p(1)),
        Kernel::ScalarProduct => kernel::dot(p(0), p(1)),
        Kernel::Angle => kernel::angle(p(0), p(1)),
        Kernel::Perimeter => kernel::perimeter(p(0), p(1), p(2)),
    }
}

/// Estimate `p_{n,z} = P(h(xi_1, ..., xi_k) exceeds z)` from fresh k-tuples.
///
/// Returns the hit fraction with the binomial standard error
/// `sqrt(p(1-p)/reps)`.
pub fn estimate_exceed_prob(
    law: &PointLaw,
    kernel: Kernel,
    z: f64,
    reps: u64,
    stream: &RngStream,
    shards: u32,
) -> Result<Estimate> {
    check_estimator_inputs(law, kernel, reps)?;
    let k = kernel.degree();
    let d = law.d();
    let plan = split_reps(reps, shards);
    let hits: u64 = plan
        .par_iter()
        .enumerate()
        .map(|(s, &shard_reps)| {
            let mut sampler = law.sampler(&stream.child(s as u64));
            let mut pts = vec![0.0; k * d];
            let idx: Vec<usize> = (0..k).collect();
            let mut hits = 0u64;
            for _ in 0..shard_reps {
                for chunk in pts.chunks_exact_mut(d) {
                    sampler.draw_into(chunk);
                }
                if kernel.exceeds(eval_tuple(kernel, &pts, d, &idx), z) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / reps as f64;
    Ok(Estimate {
        value: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
    })
}

/// Joint and single exceedance counts for tuples sharing exactly r points.
struct JointCounts {
    first: u64,
    joint: u64,
    reps: u64,
}

/// Per rep, draw 2k - r fresh points; tuple A is points 1..k, tuple B is
/// points (1+k-r)..(2k-r), sharing exactly r points — the index pattern of
/// the bound's correlation terms.
fn joint_counts(
    law: &PointLaw,
    kernel: Kernel,
    r: usize,
    z: f64,
    reps: u64,
    stream: &RngStream,
    shards: u32,
) -> Result<JointCounts> {
    check_estimator_inputs(law, kernel, reps)?;
    let k = kernel.degree();
    if r == 0 || r > k {
        return Err(Error::domain(format!(
            "tuple overlap r must lie in 1..={k}, got {r}"
        )));
    }
    let d = law.d();
    let total = 2 * k - r;
    let idx_a: Vec<usize> = (0..k).collect();
    let idx_b: Vec<usize> = (k - r..2 * k - r).collect();
    let plan = split_reps(reps, shards);
    let (first, joint) = plan
        .par_iter()
        .enumerate()
        .map(|(s, &shard_reps)| {
            let mut sampler = law.sampler(&stream.child(s as u64));
            let mut pts = vec![0.0; total * d];
            let mut first = 0u64;
            let mut joint = 0u64;
            for _ in 0..shard_reps {
                for chunk in pts.chunks_exact_mut(d) {
                    sampler.draw_into(chunk);
                }
                let a = kernel.exceeds(eval_tuple(kernel, &pts, d, &idx_a), z);
                if a {
                    first += 1;
                    if kernel.exceeds(eval_tuple(kernel, &pts, d, &idx_b), z) {
                        joint += 1;
                    }
                }
            }
            (first, joint)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(JointCounts { first, joint, reps })
}

/// Estimate `tau_{n,z}(r)`: the ratio of the joint exceedance probability of
/// the two overlapping tuples to `p_{n,z}`, with both estimated from the same
/// reps (ratio estimator, delta-method standard error).
pub fn estimate_tau(
    law: &PointLaw,
    kernel: Kernel,
    r: usize,
    z: f64,
    reps: u64,
    stream: &RngStream,
    shards: u32,
) -> Result<TauEstimate> {
    let counts = joint_counts(law, kernel, r, z, reps, stream, shards)?;
    if counts.first == 0 {
        return Err(Error::UndefinedRatio { reps });
    }
    let n = counts.reps as f64;
    let px = counts.first as f64 / n;
    let py = counts.joint as f64 / n;
    let tau = py / px;
    // Var(Y/X) ~ (tau / (n px)) (qy - tau qx) for Bernoulli y <= x
    let var = (tau / (n * px)) * ((1.0 - py) - tau * (1.0 - px));
    Ok(TauEstimate {
        r,
        value: tau,
        std_error: var.max(0.0).sqrt(),
    })
}

/// Joint exceedance probability of the two r-overlapping tuples, i.e. the
/// numerator `p * tau(r)` of the ratio estimator. Used for the correlation
/// decay conditions where the product, not the ratio, is the object.
pub fn estimate_joint_prob(
    law: &PointLaw,
    kernel: Kernel,
    r: usize,
    z: f64,
    reps: u64,
    stream: &RngStream,
    shards: u32,
) -> Result<Estimate> {
    let counts = joint_counts(law, kernel, r, z, reps, stream, shards)?;
    let p = counts.joint as f64 / counts.reps as f64;
    Ok(Estimate {
        value: p,
        std_error: (p * (1.0 - p) / counts.reps as f64).sqrt(),
    })
}

/// `lambda_{n,z} = C(n,k) p`, computed in log space so it never overflows
/// for n up to 1e6 and p down to 1e-300.
pub fn lambda_value(n: u64, k: u64, p: f64) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("lambda_value requires 1 <= k <= n, got ({n}, {k})")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok((log_binomial(n, k)? + p.ln()).exp())
}

/// The explicit right-hand side of the Poisson approximation inequality:
///
/// `(1 - exp(-lambda)) * { p [C(n,k) - C(n-k,k)]
///                         + sum_{r=1}^{k-1} C(k,r) C(n-k,k-r) tau(r) }`
///
/// with `C(m, j) = 0` whenever `m < j` and the empty sum for k = 1.
pub fn theorem1_bound(n: u64, k: u64, p: f64, tau: &[f64]) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("theorem1_bound requires 1 <= k <= n, got ({n}, {k})")));
    }
    if tau.len() + 1 != k as usize {
        return Err(Error::domain(format!(
            "expected {} tau values for k = {k}, got {}",
            k - 1,
            tau.len()
        )));
    }
    if !(0.0..=1.0).contains(&p) || tau.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::domain("probabilities must lie in [0, 1]".to_string()));
    }
    let lambda = lambda_value(n, k, p)?;
    let one_minus_exp = -(-lambda).exp_m1();
    let mut brace = p * (binomial(n, k) - binomial(n - k, k));
    for (i, &t) in tau.iter().enumerate() {
        let r = (i + 1) as u64;
        brace += binomial(k, r) * binomial(n - k, k - r) * t;
    }
    Ok(one_minus_exp * brace)
}

/// Everything measured and derived while checking the inequality at one z.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub k: usize,
    pub z: f64,
    /// Exceedance probability of a single fresh tuple.
    pub p_hat: f64,
    pub p_se: f64,
    /// tau(r) for r = 1..k; tau(k) = 1 by construction.
    pub tau_hat: Vec<TauEstimate>,
    pub lambda: f64,
    /// exp(-lambda): the Poisson prediction for P(no exceedance).
    pub poisson_prob: f64,
    /// Theorem right-hand side evaluated at the estimates.
    pub bound: f64,
    /// Inner rep budget behind p_hat and each tau_hat.
    pub mc_reps: u64,
    /// Outer rep budget behind prob_no_exceedance.
    pub outer_reps: u64,
    /// Direct estimate of P(extremal statistic does not exceed z).
    pub prob_no_exceedance: f64,
    pub prob_se: f64,
    /// |prob_no_exceedance - poisson_prob|.
    pub gap: f64,
    /// Standard error of the gap-vs-bound comparison, combining the outer
    /// estimate, the Poisson prediction and the bound itself.
    pub combined_se: f64,
    /// gap <= bound + 3 * combined_se.
    pub holds: bool,
}

/// Monte Carlo check of the Poisson approximation inequality at threshold z:
/// estimates `P(no exceedance)` from full samples of size n, the inner
/// quantities from fresh tuples, and asserts the inequality within noise.
pub fn verify_bound(
    law: &PointLaw,
    kernel: Kernel,
    n: usize,
    z: f64,
    outer_reps: u64,
    inner_reps: u64,
    stream: &RngStream,
    shards: u32,
) -> Result<BoundReport> {
    check_estimator_inputs(law, kernel, outer_reps.min(inner_reps))?;
    let k = kernel.degree();
    if n < k {
        return Err(Error::InsufficientSample { n, k });
    }

    // outer: fraction of full samples with zero exceedances
    let d = law.d();
    let plan = split_reps(outer_reps, shards);
    let outer_stream = stream.child(0);
    let no_exceed: u64 = plan
        .par_iter()
        .enumerate()
        .map(|(s, &shard_reps)| {
            let mut sampler = law.sampler(&outer_stream.child(s as u64));
            let mut hits = 0u64;
            for _ in 0..shard_reps {
                let sample = sampler.sample(n);
                debug_assert_eq!(sample.dim(), d);
                if exceedance_count(&sample, kernel, z).expect("n >= k") == 0 {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let prob = no_exceed as f64 / outer_reps as f64;
    let prob_se = (prob * (1.0 - prob) / outer_reps as f64).sqrt();

    let p = estimate_exceed_prob(law, kernel, z, inner_reps, &stream.child(1), shards)?;
    let mut tau = Vec::with_capacity(k);
    for r in 1..=k {
        tau.push(estimate_tau(
            law,
            kernel,
            r,
            z,
            inner_reps,
            &stream.child(1 + r as u64),
            shards,
        )?);
    }

    let lambda = lambda_value(n as u64, k as u64, p.value)?;
    let poisson_prob = (-lambda).exp();
    let tau_values: Vec<f64> = tau[..k - 1].iter().map(|t| t.value).collect();
    let bound = theorem1_bound(n as u64, k as u64, p.value, &tau_values)?;

    // error propagation: d(exp(-lambda))/dp = -C(n,k) exp(-lambda), and the
    // analytic partials of the bound w.r.t. p and each tau(r)
    let cnk = binomial(n as u64, k as u64);
    let poisson_se = cnk * poisson_prob * p.std_error;
    let one_minus_exp = -(-lambda).exp_m1();
    let mut brace = p.value * (cnk - binomial((n - k) as u64, k as u64));
    for (i, t) in tau_values.iter().enumerate() {
        let r = (i + 1) as u64;
        brace += binomial(k as u64, r) * binomial((n - k) as u64, (k as u64) - r) * t;
    }
    let dbound_dp = cnk * poisson_prob * brace
        + one_minus_exp * (cnk - binomial((n - k) as u64, k as u64));
    let mut bound_var = (dbound_dp * p.std_error).powi(2);
    for (i, t) in tau[..k - 1].iter().enumerate() {
        let r = (i + 1) as u64;
        let partial = one_minus_exp * binomial(k as u64, r) * binomial((n - k) as u64, (k as u64) - r);
        bound_var += (partial * t.std_error).powi(2);
    }
    let combined_se = (prob_se.powi(2) + poisson_se.powi(2) + bound_var).sqrt();

    let gap = (prob - poisson_prob).abs();
    Ok(BoundReport {
        n,
        k,
        z,
        p_hat: p.value,
        p_se: p.std_error,
        tau_hat: tau,
        lambda,
        poisson_prob,
        bound,
        mc_reps: inner_reps,
        outer_reps,
        prob_no_exceedance: prob,
        prob_se,
        gap,
        combined_se,
        holds: gap <= bound + 3.0 * combined_se,
    })
}

/// Invert the first-order tail `lambda ~ C(n,k) sigma s^gamma` to pick the
/// threshold z with a target Poisson mean.
pub fn threshold_for_lambda(
    limit: &crate::limit::LimitLaw,
    n: usize,
    lambda_target: f64,
) -> Result<f64> {
    if !(lambda_target > 0.0) {
        return Err(Error::domain(format!(
            "lambda target must be positive, got {lambda_target}"
        )));
    }
    let cnk = binomial(n as u64, limit.degree as u64);
    if cnk == 0.0 {
        return Err(Error::InsufficientSample { n, k: limit.degree });
    }
    let s = (lambda_target / (cnk * limit.sigma)).powf(1.0 / limit.gamma);
    Ok(match limit.extreme {
        crate::kernel::Orientation::Max => limit.extremal_value - s,
        crate::kernel::Orientation::Min => s,
    })
}
