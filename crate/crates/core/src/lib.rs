//! Extremal statistics of symmetric kernels over geometric point processes.
//!
//! The crate covers the full pipeline:
//!
//! - [`sphere`]: sampling laws in the unit ball — uniform or von Mises-Fisher
//!   directions times a radial law with a prescribed tail — plus the
//!   closed-form overlap integrals those laws admit;
//! - [`kernel`]: symmetric k-ary kernels (interpoint distance, scalar
//!   product, spherical angle, triangle perimeter) with exact extremal
//!   evaluation and exceedance counts over all k-subsets;
//! - [`limit`]: the rescaled Weibull limit laws of the four extremal
//!   statistics and their theoretical tail slopes;
//! - [`poisson`]: the finite-n Poisson approximation — Monte Carlo estimates
//!   of exceedance and joint-tuple probabilities, the explicit error bound,
//!   and a direct inequality check;
//! - [`experiment`]: a reproducible Monte Carlo engine producing trial sets,
//!   empirical CDFs, Kolmogorov-Smirnov distances, and convergence studies;
//! - [`special`]: the self-contained special functions behind the constants;
//! - [`stream`]: deterministic splittable RNG streams.

pub mod error;
pub mod experiment;
pub mod kernel;
pub mod limit;
pub mod poisson;
pub mod special;
pub mod sphere;
pub mod stream;

pub use error::{Error, Result};
pub use experiment::{
    convergence_study, exact_min_spacing_survival, ks_statistic, run_trials, EmpiricalCdf,
    ExperimentConfig, Study, StudyRow, TrialSet,
};
pub use kernel::{exceedance_count, u_max, Kernel, Orientation, Sample};
pub use limit::{LawParams, LimitLaw};
pub use poisson::{
    estimate_exceed_prob, estimate_joint_prob, estimate_tau, lambda_value, theorem1_bound,
    threshold_for_lambda, verify_bound, BoundReport, Estimate, TauEstimate,
};
pub use sphere::{vmf_normalizer, DirectionalLaw, PointLaw, PointSampler, RadialLaw};
pub use stream::{mix, RngStream};
