//! Closed-form Weibull limit laws for the rescaled extremal statistics of the
//! four shipped kernels, together with the theoretical tail slopes that govern
//! `P(h near its extremal value)`.
//!
//! Each law describes the limit of `n^{k/gamma} * (sup - H_n)` (Max kernels)
//! or `n^{k/gamma} * S_n` (Min kernels): a CDF `1 - exp(-c t^gamma)` on
//! `t >= 0` with `c = sigma / k!`, where sigma is the tail slope,
//! `P(h beyond extremal-value deficit s) ~ sigma * s^gamma` as `s -> 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, Orientation};
use crate::special;
use crate::sphere::{PointLaw, RadialLaw};

/// Parameter echo for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LawParams {
    Diameter { d: usize, alpha: f64, a: f64, overlap_antipodal: f64 },
    ScalarProduct { d: usize, alpha: f64, a: f64, overlap_self: f64 },
    MinAngle { d: usize, overlap_self: f64 },
    Perimeter,
}

/// A rescaled Weibull limit law with rate `c t^gamma`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitLaw {
    pub params: LawParams,
    /// Kernel degree k.
    pub degree: usize,
    /// Weibull exponent.
    pub gamma: f64,
    /// Tail slope sigma of the kernel distribution near its extremal value.
    pub sigma: f64,
    /// Rate coefficient c = sigma / k!.
    pub coefficient: f64,
    /// Which extreme the statistic approaches.
    pub extreme: Orientation,
    /// The extremal constant: sup for Max kernels, inf (= 0) for Min.
    pub extremal_value: f64,
    /// Exponent rho of the stated convergence rate O(n^{-rho}).
    pub rate_exponent: f64,
}

impl LimitLaw {
    /// Largest interpoint distance in the unit ball.
    ///
    /// gamma = (d-1)/2 + 2 alpha and
    /// sigma1 = (4 pi)^{(d-1)/2} a^2 Gamma(alpha+1)^2 / Gamma((d+1)/2 + 2 alpha)
    ///          * overlap, where overlap integrates f(x) f(-x) over the sphere
    /// and must be positive and finite.
    pub fn diameter(d: usize, alpha: f64, a: f64, overlap_antipodal: f64) -> Result<Self> {
        check_dim_tail(d, alpha, a)?;
        if !(overlap_antipodal > 0.0) || !overlap_antipodal.is_finite() {
            return Err(Error::domain(format!(
                "diameter law requires antipodal overlap in (0, inf), got {overlap_antipodal}"
            )));
        }
        let gamma = (d as f64 - 1.0) / 2.0 + 2.0 * alpha;
        let sigma = tail_coefficient(4.0, d, alpha, a) * overlap_antipodal;
        Ok(LimitLaw {
            params: LawParams::Diameter { d, alpha, a, overlap_antipodal },
            degree: 2,
            gamma,
            sigma,
            coefficient: sigma / 2.0,
            extreme: Orientation::Max,
            extremal_value: 2.0,
            rate_exponent: rate_exponent(d, alpha),
        })
    }

    /// Largest scalar product in the unit ball; like the diameter law but with
    /// (2 pi)^{(d-1)/2} and the self overlap of a square-integrable density.
    pub fn scalar_product(d: usize, alpha: f64, a: f64, overlap_self: f64) -> Result<Self> {
        check_dim_tail(d, alpha, a)?;
        if !(overlap_self > 0.0) || !overlap_self.is_finite() {
            return Err(Error::domain(format!(
                "scalar-product law requires self overlap in (0, inf), got {overlap_self}"
            )));
        }
        let gamma = (d as f64 - 1.0) / 2.0 + 2.0 * alpha;
        let sigma = tail_coefficient(2.0, d, alpha, a) * overlap_self;
        Ok(LimitLaw {
            params: LawParams::ScalarProduct { d, alpha, a, overlap_self },
            degree: 2,
            gamma,
            sigma,
            coefficient: sigma / 2.0,
            extreme: Orientation::Max,
            extremal_value: 1.0,
            rate_exponent: rate_exponent(d, alpha),
        })
    }

    /// Smallest spherical distance (smaller central angle) on S^{d-1}.
    ///
    /// gamma = d - 1, sigma3 = pi^{(d-1)/2} / Gamma((d+1)/2) * overlap_self.
    pub fn min_angle(d: usize, overlap_self: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain(format!("min-angle law requires d >= 2, got {d}")));
        }
        if !(overlap_self > 0.0) || !overlap_self.is_finite() {
            return Err(Error::domain(format!(
                "min-angle law requires self overlap in (0, inf), got {overlap_self}"
            )));
        }
        let dm1 = d as f64 - 1.0;
        let ln = 0.5 * dm1 * std::f64::consts::PI.ln()
            - special::ln_gamma((d as f64 + 1.0) / 2.0)?;
        let sigma = ln.exp() * overlap_self;
        Ok(LimitLaw {
            params: LawParams::MinAngle { d, overlap_self },
            degree: 2,
            gamma: dm1,
            sigma,
            coefficient: sigma / 2.0,
            extreme: Orientation::Min,
            extremal_value: 0.0,
            rate_exponent: 0.5,
        })
    }

    /// Largest triangle perimeter of uniform points on the unit circle:
    /// rate 2t/(9 pi), i.e. tail slope 4/(3 pi) and gamma = 1.
    pub fn perimeter() -> Self {
        let sigma = 4.0 / (3.0 * std::f64::consts::PI);
        LimitLaw {
            params: LawParams::Perimeter,
            degree: 3,
            gamma: 1.0,
            sigma,
            coefficient: sigma / 6.0,
            extreme: Orientation::Max,
            extremal_value: 3.0 * 3.0_f64.sqrt(),
            rate_exponent: 0.5,
        }
    }

    /// The limit law that matches a kernel under a point law, or an error
    /// when the theorem hypotheses are not met.
    pub fn for_kernel(kernel: Kernel, law: &PointLaw) -> Result<Self> {
        let d = law.d();
        let (alpha, a) = law.radial().tail_params();
        match kernel {
            Kernel::Distance => {
                let overlap = law.directional().overlap_antipodal();
                if !(overlap > f64::MIN_POSITIVE) {
                    return Err(Error::domain(
                        "antipodal overlap is numerically degenerate for this directional law"
                            .to_string(),
                    ));
                }
                LimitLaw::diameter(d, alpha, a, overlap)
            }
            Kernel::ScalarProduct => {
                LimitLaw::scalar_product(d, alpha, a, law.directional().overlap_self())
            }
            Kernel::Angle => {
                if law.radial() != &RadialLaw::UnitNorm {
                    return Err(Error::Config(
                        "the min-angle law applies to points on the sphere (unit-norm radial law)"
                            .to_string(),
                    ));
                }
                LimitLaw::min_angle(d, law.directional().overlap_self())
            }
            Kernel::Perimeter => {
                if d != 2 || !law.directional().is_uniform() || law.radial() != &RadialLaw::UnitNorm
                {
                    return Err(Error::Config(
                        "the perimeter law applies to uniform points on the unit circle"
                            .to_string(),
                    ));
                }
                Ok(LimitLaw::perimeter())
            }
        }
    }

    /// `(gamma, sigma)` governing `P(h beyond extremal deficit s) ~ sigma s^gamma`.
    pub fn tail_slope(&self) -> (f64, f64) {
        (self.gamma, self.sigma)
    }

    /// The limit rate lambda_t = c t^gamma.
    pub fn rate(&self, t: f64) -> f64 {
        self.coefficient * t.powf(self.gamma)
    }

    /// CDF 1 - exp(-rate(t)), stable for tiny rates; 0 for t < 0 by convention.
    pub fn cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        -(-self.rate(t)).exp_m1()
    }

    /// Quantile t(u) = (-ln(1-u)/c)^{1/gamma} for u in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        (-(1.0 - u).ln() / self.coefficient).powf(1.0 / self.gamma)
    }

    /// The scaling power beta = k/gamma of the rescaling n^beta.
    fn scale_power(&self) -> f64 {
        self.degree as f64 / self.gamma
    }

    fn scale(&self, n: usize) -> f64 {
        let beta = self.scale_power();
        if beta.fract() == 0.0 {
            (n as f64).powi(beta as i32)
        } else {
            (n as f64).powf(beta)
        }
    }

    /// Rescale an observed extremal statistic: `n^{k/gamma} (sup - value)`
    /// for Max laws, `n^{k/gamma} value` for Min laws.
    pub fn transform(&self, value: f64, n: usize) -> f64 {
        match self.extreme {
            Orientation::Max => self.scale(n) * (self.extremal_value - value),
            Orientation::Min => self.scale(n) * value,
        }
    }

    /// Inverse of [`transform`](Self::transform): the threshold z_n(t).
    pub fn threshold(&self, t: f64, n: usize) -> f64 {
        match self.extreme {
            Orientation::Max => self.extremal_value - t / self.scale(n),
            Orientation::Min => t / self.scale(n),
        }
    }
}

fn check_dim_tail(d: usize, alpha: f64, a: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(format!("limit law requires d >= 2, got {d}")));
    }
    if !(alpha >= 0.0) || !(a > 0.0) {
        return Err(Error::domain(format!(
            "radial tail requires alpha >= 0 and a > 0, got ({alpha}, {a})"
        )));
    }
    Ok(())
}

/// `(base pi)^{(d-1)/2} a^2 Gamma(alpha+1)^2 / Gamma((d+1)/2 + 2 alpha)`,
/// assembled in log space.
fn tail_coefficient(base: f64, d: usize, alpha: f64, a: f64) -> f64 {
    let dm1 = d as f64 - 1.0;
    let ln = 0.5 * dm1 * (base * std::f64::consts::PI).ln()
        + 2.0 * a.ln()
        + 2.0 * special::ln_gamma(alpha + 1.0).expect("alpha >= 0")
        - special::ln_gamma((d as f64 + 1.0) / 2.0 + 2.0 * alpha).expect("positive");
    ln.exp()
}

fn rate_exponent(d: usize, alpha: f64) -> f64 {
    let dm1 = d as f64 - 1.0;
    dm1 / (dm1 + 4.0 * alpha)
}
