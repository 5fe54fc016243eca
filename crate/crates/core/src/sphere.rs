//! Sampling laws for points `xi = |xi| * U` in the closed unit ball:
//! directional laws on the sphere S^{d-1} (uniform or von Mises-Fisher)
//! together with radial laws prescribing the tail of `1 - |xi|`.
//!
//! Directions and radii are always drawn from two independent child streams
//! of a parent [`RngStream`], see [`PointSampler`].

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Sample;
use crate::special;
use crate::stream::RngStream;

const UNIT_TOL: f64 = 1e-12;

/// Surface measure of S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
pub fn sphere_surface(d: usize) -> f64 {
    let d = d as f64;
    let ln = 0.5 * d * std::f64::consts::PI.ln() + std::f64::consts::LN_2
        - special::ln_gamma(d / 2.0).expect("d >= 1");
    ln.exp()
}

/// Normalizing constant of the von Mises-Fisher density,
/// `C_d(kappa) = kappa^{d/2-1} / ((2 pi)^{d/2} I_{d/2-1}(kappa))`.
pub fn vmf_normalizer(d: usize, kappa: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain(format!("vmf_normalizer requires d >= 2, got {d}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!(
            "vmf_normalizer requires kappa > 0, got {kappa}"
        )));
    }
    let nu = d as f64 / 2.0 - 1.0;
    let bessel = special::bessel_i(nu, kappa)?;
    Ok(kappa.powf(nu) / ((2.0 * std::f64::consts::PI).powf(d as f64 / 2.0) * bessel))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Directional {
    Uniform,
    VonMisesFisher { mu: Vec<f64>, kappa: f64 },
}

/// A directional law on S^{d-1} with a density w.r.t. the surface measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalLaw {
    d: usize,
    #[serde(flatten)]
    variant: Directional,
}

impl DirectionalLaw {
    /// Uniform directions on S^{d-1}.
    pub fn uniform(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain(format!("directional law requires d >= 2, got {d}")));
        }
        Ok(DirectionalLaw {
            d,
            variant: Directional::Uniform,
        })
    }

    /// von Mises-Fisher law with mean direction `mu` and concentration `kappa`.
    pub fn von_mises_fisher(mu: Vec<f64>, kappa: f64) -> Result<Self> {
        let d = mu.len();
        if d < 2 {
            return Err(Error::domain(format!("vMF law requires d >= 2, got {d}")));
        }
        let norm = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain(format!(
                "vMF mean direction must be a unit vector, |mu| = {norm}"
            )));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::domain(format!("vMF concentration must be positive, got {kappa}")));
        }
        Ok(DirectionalLaw {
            d,
            variant: Directional::VonMisesFisher { mu, kappa },
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.variant, Directional::Uniform)
    }

    /// `(mu, kappa)` for a vMF law, `None` for uniform.
    pub fn vmf_params(&self) -> Option<(&[f64], f64)> {
        match &self.variant {
            Directional::Uniform => None,
            Directional::VonMisesFisher { mu, kappa } => Some((mu, *kappa)),
        }
    }

    /// Density w.r.t. the surface measure, evaluated at a point of S^{d-1}.
    pub fn density(&self, x: &[f64]) -> f64 {
        match &self.variant {
            Directional::Uniform => 1.0 / sphere_surface(self.d),
            Directional::VonMisesFisher { mu, kappa } => {
                let dot: f64 = mu.iter().zip(x).map(|(m, v)| m * v).sum();
                vmf_normalizer(self.d, *kappa).expect("valid law") * (kappa * dot).exp()
            }
        }
    }

    /// The antipodal overlap integral over S^{d-1} of f(x) f(-x).
    ///
    /// Uniform: Gamma(d/2) / (2 pi^{d/2}). vMF: C_d(kappa)^2 * 2 pi^{d/2} / Gamma(d/2),
    /// since f(x) f(-x) is constant on the sphere.
    pub fn overlap_antipodal(&self) -> f64 {
        match &self.variant {
            Directional::Uniform => 1.0 / sphere_surface(self.d),
            Directional::VonMisesFisher { kappa, .. } => {
                let c = vmf_normalizer(self.d, *kappa).expect("valid law");
                c * c * sphere_surface(self.d)
            }
        }
    }

    /// The self overlap integral over S^{d-1} of f(x)^2.
    ///
    /// Uniform: Gamma(d/2) / (2 pi^{d/2}). vMF: C_d(kappa)^2 / C_d(2 kappa).
    pub fn overlap_self(&self) -> f64 {
        match &self.variant {
            Directional::Uniform => 1.0 / sphere_surface(self.d),
            Directional::VonMisesFisher { kappa, .. } => {
                let c = vmf_normalizer(self.d, *kappa).expect("valid law");
                c * c / vmf_normalizer(self.d, 2.0 * kappa).expect("valid law")
            }
        }
    }

    /// Draw one direction into `out` (length d).
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.d);
        match &self.variant {
            Directional::Uniform => uniform_direction(rng, out),
            Directional::VonMisesFisher { mu, kappa } => {
                let env = WoodEnvelope::new(self.d, *kappa);
                env.sample_into(mu, rng, out);
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.sample_into(rng, &mut out);
        out
    }
}

fn uniform_direction(rng: &mut RngStream, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for v in out.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *v = g;
            norm2 += g * g;
        }
        if norm2 > 1e-24 {
            let inv = norm2.sqrt().recip();
            for v in out.iter_mut() {
                *v *= inv;
            }
            return;
        }
    }
}

/// Wood's rejection envelope for the vMF marginal of <U, mu>.
#[derive(Debug, Clone)]
struct WoodEnvelope {
    d: usize,
    kappa: f64,
    b: f64,
    x0: f64,
    c: f64,
    beta: BetaDist<f64>,
}

impl WoodEnvelope {
    fn new(d: usize, kappa: f64) -> Self {
        let dm1 = (d - 1) as f64;
        let b = (-2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt()) / dm1;
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + dm1 * (1.0 - x0 * x0).ln();
        let beta = BetaDist::new(dm1 / 2.0, dm1 / 2.0).expect("positive shape");
        WoodEnvelope { d, kappa, b, x0, c, beta }
    }

    /// Draw the cosine of the angle between U and mu.
    fn sample_cosine(&self, rng: &mut RngStream) -> f64 {
        let dm1 = (self.d - 1) as f64;
        loop {
            let z: f64 = self.beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            if self.kappa * w + dm1 * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                return w.clamp(-1.0, 1.0);
            }
        }
    }

    fn sample_into(&self, mu: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        let w = self.sample_cosine(rng);
        // uniform unit vector orthogonal to mu
        loop {
            let mut dot = 0.0;
            for (v, &m) in out.iter_mut().zip(mu) {
                let g: f64 = StandardNormal.sample(rng);
                *v = g;
                dot += g * m;
            }
            let mut norm2 = 0.0;
            for (v, &m) in out.iter_mut().zip(mu) {
                *v -= dot * m;
                norm2 += *v * *v;
            }
            if norm2 > 1e-24 {
                let scale = (1.0 - w * w).max(0.0).sqrt() / norm2.sqrt();
                for (v, &m) in out.iter_mut().zip(mu) {
                    *v = *v * scale + w * m;
                }
                return;
            }
        }
    }
}

/// Radial law for the norm, specified through the distribution F of 1 - |xi|.
///
/// Every variant satisfies `F(s) ~ a s^alpha` as `s -> 0` with the tail
/// parameters reported by [`RadialLaw::tail_params`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RadialLaw {
    /// |xi| = 1 almost surely: alpha = 0, a = 1.
    UnitNorm,
    /// Radius of a uniform point in the d-ball, F(s) = 1 - (1-s)^d: alpha = 1, a = d.
    BallUniform { d: usize },
    /// F(s) = min(a s^alpha, 1) with any remaining mass at the support edge.
    PowerTail { alpha: f64, a: f64 },
    /// Atom of mass a at s = 0, remaining mass uniform on (0, 1].
    /// Only (alpha, a) = (0, a) matters for the limit theorems; the filler
    /// distribution is arbitrary.
    AtomMix { a: f64 },
}

impl RadialLaw {
    pub fn power_tail(alpha: f64, a: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(a > 0.0) {
            return Err(Error::domain(format!(
                "power tail requires alpha > 0 and a > 0, got ({alpha}, {a})"
            )));
        }
        Ok(RadialLaw::PowerTail { alpha, a })
    }

    pub fn atom_mix(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::domain(format!("atom mass must lie in (0, 1], got {a}")));
        }
        Ok(RadialLaw::AtomMix { a })
    }

    pub fn ball_uniform(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::domain("ball radial law requires d >= 1".to_string()));
        }
        Ok(RadialLaw::BallUniform { d })
    }

    /// `(alpha, a)` such that F(s) ~ a s^alpha as s -> 0.
    pub fn tail_params(&self) -> (f64, f64) {
        match self {
            RadialLaw::UnitNorm => (0.0, 1.0),
            RadialLaw::BallUniform { d } => (1.0, *d as f64),
            RadialLaw::PowerTail { alpha, a } => (*alpha, *a),
            RadialLaw::AtomMix { a } => (0.0, *a),
        }
    }

    /// Draw the norm |xi| in [0, 1].
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            RadialLaw::UnitNorm => 1.0,
            RadialLaw::BallUniform { d } => {
                let u: f64 = rng.random();
                u.powf(1.0 / *d as f64)
            }
            RadialLaw::PowerTail { alpha, a } => {
                let s_max = a.powf(-1.0 / alpha).min(1.0);
                let u: f64 = rng.random();
                let s = (u / a).powf(1.0 / alpha).min(s_max);
                1.0 - s
            }
            RadialLaw::AtomMix { a } => {
                let u: f64 = rng.random();
                if u < *a || *a >= 1.0 {
                    1.0
                } else {
                    1.0 - (u - a) / (1.0 - a)
                }
            }
        }
    }
}

/// A point law in the unit ball: independent direction and norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointLaw {
    directional: DirectionalLaw,
    radial: RadialLaw,
}

impl PointLaw {
    pub fn new(directional: DirectionalLaw, radial: RadialLaw) -> Result<Self> {
        if let RadialLaw::BallUniform { d } = radial {
            if d != directional.d() {
                return Err(Error::Config(format!(
                    "ball radial dimension {d} does not match directional dimension {}",
                    directional.d()
                )));
            }
        }
        Ok(PointLaw { directional, radial })
    }

    /// Points uniform on the unit circle; the workhorse of the worked cases.
    pub fn uniform_sphere(d: usize) -> Result<Self> {
        PointLaw::new(DirectionalLaw::uniform(d)?, RadialLaw::UnitNorm)
    }

    /// Uniform in the unit ball: uniform directions with the ball radial law.
    pub fn uniform_ball(d: usize) -> Result<Self> {
        PointLaw::new(DirectionalLaw::uniform(d)?, RadialLaw::ball_uniform(d)?)
    }

    pub fn directional(&self) -> &DirectionalLaw {
        &self.directional
    }

    pub fn radial(&self) -> &RadialLaw {
        &self.radial
    }

    pub fn d(&self) -> usize {
        self.directional.d()
    }

    pub fn is_unit_norm(&self) -> bool {
        self.radial == RadialLaw::UnitNorm
    }

    /// Attach the law to a parent stream. Directions and radii come from the
    /// child streams with tags 0 and 1 respectively.
    pub fn sampler(&self, parent: &RngStream) -> PointSampler {
        PointSampler::new(self.clone(), parent)
    }
}

/// Drawing machine for a [`PointLaw`], holding the two independent
/// sub-streams and the precomputed vMF rejection envelope.
#[derive(Debug, Clone)]
pub struct PointSampler {
    law: PointLaw,
    dir_stream: RngStream,
    rad_stream: RngStream,
    envelope: Option<WoodEnvelope>,
}

impl PointSampler {
    const DIR_TAG: u64 = 0;
    const RAD_TAG: u64 = 1;

    pub fn new(law: PointLaw, parent: &RngStream) -> Self {
        let envelope = law
            .directional
            .vmf_params()
            .map(|(_, kappa)| WoodEnvelope::new(law.d(), kappa));
        PointSampler {
            dir_stream: parent.child(Self::DIR_TAG),
            rad_stream: parent.child(Self::RAD_TAG),
            law,
            envelope,
        }
    }

    pub fn law(&self) -> &PointLaw {
        &self.law
    }

    /// Draw one point into `out` (length d).
    pub fn draw_into(&mut self, out: &mut [f64]) {
        match (&self.law.directional.variant, &self.envelope) {
            (Directional::Uniform, _) => uniform_direction(&mut self.dir_stream, out),
            (Directional::VonMisesFisher { mu, .. }, Some(env)) => {
                env.sample_into(mu, &mut self.dir_stream, out)
            }
            _ => unreachable!("envelope exists iff law is vMF"),
        }
        let r = self.law.radial.sample(&mut self.rad_stream);
        if r != 1.0 {
            for v in out.iter_mut() {
                *v *= r;
            }
        }
    }

    pub fn draw(&mut self) -> Vec<f64> {
        let mut out = vec![0.0; self.law.d()];
        self.draw_into(&mut out);
        out
    }

    /// Draw an i.i.d. sample of n points.
    pub fn sample(&mut self, n: usize) -> Sample {
        let d = self.law.d();
        let mut data = vec![0.0; n * d];
        for chunk in data.chunks_exact_mut(d) {
            self.draw_into(chunk);
        }
        Sample::from_flat(data, d).expect("sampler produces finite points")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::RngStream;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Two-sample Kolmogorov-Smirnov distance.
    fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / na - j as f64 / nb).abs());
        }
        d
    }

    #[test]
    fn vmf_normalizer_golden() {
        // C_3(kappa) = kappa / (4 pi sinh kappa)
        let c3 = vmf_normalizer(3, 1.0).unwrap();
        assert!((c3 - 0.067_713_913_137_895_66).abs() < 1e-10);
        for &k in &[0.5, 1.0, 2.0, 7.5] {
            let closed = k / (4.0 * std::f64::consts::PI * k.sinh());
            let got = vmf_normalizer(3, k).unwrap();
            assert!(((got - closed) / closed).abs() < 1e-8, "kappa {k}");
        }
        // C_2(1) = 1 / (2 pi I_0(1))
        let c2 = vmf_normalizer(2, 1.0).unwrap();
        assert!((c2 - 0.125_708_263_597_220_13).abs() < 1e-10);
        // kappa -> 0 degenerates to the uniform density 1/(2 pi)
        let c2_small = vmf_normalizer(2, 1e-6).unwrap();
        assert!((c2_small - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-6);
        assert!(vmf_normalizer(1, 1.0).is_err());
        assert!(vmf_normalizer(3, 0.0).is_err());
    }

    #[test]
    fn overlap_closed_forms() {
        let pi = std::f64::consts::PI;
        let u2 = DirectionalLaw::uniform(2).unwrap();
        let u3 = DirectionalLaw::uniform(3).unwrap();
        assert!((u2.overlap_antipodal() - 1.0 / (2.0 * pi)).abs() < 1e-14);
        assert!((u3.overlap_antipodal() - 1.0 / (4.0 * pi)).abs() < 1e-14);
        assert_eq!(u2.overlap_antipodal(), u2.overlap_self());

        let vmf3 = DirectionalLaw::von_mises_fisher(vec![1.0, 0.0, 0.0], 1.0).unwrap();
        // C_3(1)^2 * 4 pi, 30-digit oracle value
        assert!((vmf3.overlap_antipodal() - 0.057_618_996_223_058_18).abs() < 1e-10);
        // C_3(1)^2 / C_3(2), 30-digit oracle value
        assert!((vmf3.overlap_self() - 0.104_488_028_070_648_31).abs() < 1e-10);

        let vmf2 = DirectionalLaw::von_mises_fisher(vec![1.0, 0.0], 1.0).unwrap();
        // I_0(2) / (2 pi I_0(1)^2), cross-checked below by quadrature
        assert!((vmf2.overlap_self() - 0.226_341_073_647_150_12).abs() < 1e-10);
    }

    #[test]
    fn overlap_self_matches_circle_quadrature() {
        // Simpson quadrature of f^2 over the circle for vMF(kappa = 1).
        let law = DirectionalLaw::von_mises_fisher(vec![1.0, 0.0], 1.0).unwrap();
        let m = 20_000usize;
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let f2 = |theta: f64| {
            let x = [theta.cos(), theta.sin()];
            let v = law.density(&x);
            v * v
        };
        let mut acc = 0.0;
        for i in 0..m {
            let t0 = i as f64 * h;
            acc += h / 6.0 * (f2(t0) + 4.0 * f2(t0 + h / 2.0) + f2(t0 + h));
        }
        assert!(((acc - law.overlap_self()) / acc).abs() < 1e-10);
    }

    #[test]
    fn overlap_self_dominates_antipodal() {
        for &kappa in &[0.25, 1.0, 4.0] {
            let law = DirectionalLaw::von_mises_fisher(vec![0.0, 0.0, 1.0], kappa).unwrap();
            assert!(law.overlap_self() >= law.overlap_antipodal(), "kappa {kappa}");
        }
    }

    #[test]
    fn directional_law_validation() {
        assert!(DirectionalLaw::uniform(1).is_err());
        assert!(DirectionalLaw::von_mises_fisher(vec![0.5, 0.5], 1.0).is_err());
        assert!(DirectionalLaw::von_mises_fisher(vec![1.0, 0.0], 0.0).is_err());
        assert!(DirectionalLaw::von_mises_fisher(vec![1.0, 0.0], -2.0).is_err());
    }

    #[test]
    fn uniform_directions_have_unit_norm_and_zero_mean() {
        let law = DirectionalLaw::uniform(2).unwrap();
        let mut rng = RngStream::from_seed(11);
        let n = 1_000_000usize;
        let mut mean = [0.0f64; 2];
        let mut out = [0.0f64; 2];
        for _ in 0..n {
            law.sample_into(&mut rng, &mut out);
            assert!((norm(&out) - 1.0).abs() < 1e-12);
            mean[0] += out[0];
            mean[1] += out[1];
        }
        let mean_norm = norm(&mean) / n as f64;
        assert!(mean_norm < 0.005, "mean norm {mean_norm}");
    }

    #[test]
    fn vmf_mean_resultant_matches_identity() {
        // E<U, mu> = I_{d/2}(kappa) / I_{d/2-1}(kappa) = coth(kappa) - 1/kappa for d = 3
        let kappa = 10.0;
        let law = DirectionalLaw::von_mises_fisher(vec![1.0, 0.0, 0.0], kappa).unwrap();
        let mut rng = RngStream::from_seed(12);
        let n = 1_000_000usize;
        let mut acc = 0.0;
        let mut out = [0.0f64; 3];
        for _ in 0..n {
            law.sample_into(&mut rng, &mut out);
            assert!((norm(&out) - 1.0).abs() < 1e-12);
            acc += out[0];
        }
        let expected = 0.900_000_004_122_307_3; // coth(10) - 1/10
        assert!((acc / n as f64 - expected).abs() < 0.01);
    }

    #[test]
    fn vmf_degenerates_to_uniform_for_small_kappa() {
        let d = 3;
        let vmf = DirectionalLaw::von_mises_fisher(vec![1.0, 0.0, 0.0], 0.001).unwrap();
        let unif = DirectionalLaw::uniform(d).unwrap();
        let mut rng = RngStream::from_seed(13);
        let n = 100_000usize;
        let mut out = [0.0f64; 3];
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            vmf.sample_into(&mut rng, &mut out);
            a.push(out[0]);
            unif.sample_into(&mut rng, &mut out);
            b.push(out[0]);
        }
        assert!(ks_two_sample(a, b) < 0.01);
    }

    #[test]
    fn uniform_marginals_rotation_invariant() {
        let law = DirectionalLaw::uniform(3).unwrap();
        let mut rng = RngStream::from_seed(14);
        let v1 = [1.0, 0.0, 0.0];
        let s = 3.0f64.sqrt().recip();
        let v2 = [s, s, s];
        let n = 100_000usize;
        let mut out = [0.0f64; 3];
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            law.sample_into(&mut rng, &mut out);
            a.push(out[0] * v1[0] + out[1] * v1[1] + out[2] * v1[2]);
            b.push(out[0] * v2[0] + out[1] * v2[1] + out[2] * v2[2]);
        }
        assert!(ks_two_sample(a, b) < 0.01);
    }

    #[test]
    fn vmf_cosine_marginal_matches_density() {
        // <U, mu> has density prop. to exp(kappa t)(1 - t^2)^{(d-3)/2} on [-1, 1];
        // chi-square against numerically normalized bin masses, d = 4 exercises
        // a non-trivial (1-t^2) factor.
        let kappa = 2.0;
        let d = 4;
        let law = DirectionalLaw::von_mises_fisher(vec![0.0, 0.0, 0.0, 1.0], kappa).unwrap();
        let bins = 24usize;
        let pdf = |t: f64| (kappa * t).exp() * (1.0 - t * t).max(0.0).powf((d as f64 - 3.0) / 2.0);
        // Simpson per bin
        let mut mass = vec![0.0f64; bins];
        let steps = 200;
        for (b, m) in mass.iter_mut().enumerate() {
            let lo = -1.0 + 2.0 * b as f64 / bins as f64;
            let h = 2.0 / (bins * steps) as f64;
            for s in 0..steps {
                let t0 = lo + s as f64 * h;
                *m += h / 6.0 * (pdf(t0) + 4.0 * pdf(t0 + h / 2.0) + pdf(t0 + h));
            }
        }
        let total: f64 = mass.iter().sum();
        let n = 200_000usize;
        let mut counts = vec![0u64; bins];
        let mut rng = RngStream::from_seed(15);
        let mut out = [0.0f64; 4];
        for _ in 0..n {
            law.sample_into(&mut rng, &mut out);
            let t = out[3].clamp(-1.0, 1.0);
            let b = (((t + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let mut chi2 = 0.0;
        for b in 0..bins {
            let expected = n as f64 * mass[b] / total;
            if expected > 5.0 {
                let diff = counts[b] as f64 - expected;
                chi2 += diff * diff / expected;
            }
        }
        // chi2_{23}: mean 23, far tail at ~80
        assert!(chi2 < 80.0, "chi2 {chi2}");
    }

    #[test]
    fn radial_validation_and_trivials() {
        assert!(RadialLaw::power_tail(0.0, 1.0).is_err());
        assert!(RadialLaw::power_tail(1.0, 0.0).is_err());
        assert!(RadialLaw::atom_mix(0.0).is_err());
        assert!(RadialLaw::atom_mix(1.5).is_err());
        let mut rng = RngStream::from_seed(16);
        for _ in 0..100 {
            assert_eq!(RadialLaw::UnitNorm.sample(&mut rng), 1.0);
        }
        assert_eq!(RadialLaw::UnitNorm.tail_params(), (0.0, 1.0));
        assert_eq!(RadialLaw::ball_uniform(3).unwrap().tail_params(), (1.0, 3.0));
        assert_eq!(RadialLaw::atom_mix(0.25).unwrap().tail_params(), (0.0, 0.25));
    }

    #[test]
    fn ball_uniform_tail_constant() {
        // F(0.01)/0.01 -> a = d = 3 within MC error
        let law = RadialLaw::ball_uniform(3).unwrap();
        let mut rng = RngStream::from_seed(17);
        let n = 10_000_000u64;
        let s0 = 0.01;
        let mut hits = 0u64;
        for _ in 0..n {
            if 1.0 - law.sample(&mut rng) <= s0 {
                hits += 1;
            }
        }
        let ratio = hits as f64 / n as f64 / s0;
        assert!((ratio - 3.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn power_tail_exact_by_construction() {
        let law = RadialLaw::power_tail(0.5, 1.0).unwrap();
        let mut rng = RngStream::from_seed(18);
        let n = 10_000_000u64;
        let s0 = 1e-4;
        let mut hits = 0u64;
        for _ in 0..n {
            if 1.0 - law.sample(&mut rng) <= s0 {
                hits += 1;
            }
        }
        let ratio = hits as f64 / n as f64 / s0.sqrt();
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn radial_tail_contract_along_grid() {
        // s^{-alpha} F(s) -> a along s in {1e-2, 1e-3, 1e-4}, within 3 MC se.
        let laws: Vec<RadialLaw> = vec![
            RadialLaw::ball_uniform(2).unwrap(),
            RadialLaw::power_tail(0.5, 2.0).unwrap(),
            RadialLaw::power_tail(2.0, 0.5).unwrap(),
            RadialLaw::atom_mix(0.4).unwrap(),
        ];
        let mut rng = RngStream::from_seed(19);
        for law in &laws {
            let (alpha, a) = law.tail_params();
            let n = 4_000_000u64;
            let draws: Vec<f64> = (0..n).map(|_| 1.0 - law.sample(&mut rng)).collect();
            for &s in &[1e-2, 1e-3, 1e-4] {
                let f = a * s.powf(alpha);
                if f * n as f64 < 100.0 {
                    continue; // too few expected hits to test at this budget
                }
                let hits = draws.iter().filter(|&&x| x <= s).count() as f64;
                let p_hat = hits / n as f64;
                let se = (f * (1.0 - f) / n as f64).sqrt();
                // first-order tail only; allow 3 se plus a curvature margin
                let slack = 3.0 * se + 0.08 * f;
                assert!(
                    (p_hat - f).abs() <= slack,
                    "law {law:?} s {s}: p_hat {p_hat}, tail {f}, slack {slack}"
                );
            }
        }
    }

    #[test]
    fn point_law_consistency() {
        let dir2 = DirectionalLaw::uniform(2).unwrap();
        assert!(PointLaw::new(dir2, RadialLaw::ball_uniform(3).unwrap()).is_err());
    }

    #[test]
    fn unit_circle_points_have_unit_norm() {
        let law = PointLaw::uniform_sphere(2).unwrap();
        let parent = RngStream::from_seed(20);
        let mut sampler = law.sampler(&parent);
        for _ in 0..1000 {
            let p = sampler.draw();
            assert!((norm(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_norm_cdf_at_half() {
        // P(|xi| <= 1/2) = (1/2)^3 for the uniform ball in d = 3
        let law = PointLaw::uniform_ball(3).unwrap();
        let parent = RngStream::from_seed(21);
        let mut sampler = law.sampler(&parent);
        let n = 1_000_000usize;
        let mut hits = 0u64;
        for _ in 0..n {
            if norm(&sampler.draw()) <= 0.5 {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        assert!((p - 0.125).abs() < 0.01, "p {p}");
    }

    #[test]
    fn vmf_point_histogram_matches_density() {
        // direction histogram over 36 angular bins for vMF(d=2, kappa=2) on the circle
        let mu = vec![1.0, 0.0];
        let kappa = 2.0;
        let law = PointLaw::new(
            DirectionalLaw::von_mises_fisher(mu, kappa).unwrap(),
            RadialLaw::UnitNorm,
        )
        .unwrap();
        let parent = RngStream::from_seed(22);
        let mut sampler = law.sampler(&parent);
        let bins = 36usize;
        let c = vmf_normalizer(2, kappa).unwrap();
        let pdf = |theta: f64| c * (kappa * theta.cos()).exp();
        let mut mass = vec![0.0f64; bins];
        let steps = 200;
        let tau = 2.0 * std::f64::consts::PI;
        for (b, m) in mass.iter_mut().enumerate() {
            let lo = b as f64 / bins as f64 * tau;
            let h = tau / (bins * steps) as f64;
            for s in 0..steps {
                let t0 = lo + s as f64 * h;
                *m += h / 6.0 * (pdf(t0) + 4.0 * pdf(t0 + h / 2.0) + pdf(t0 + h));
            }
        }
        let n = 1_000_000usize;
        let mut counts = vec![0u64; bins];
        for _ in 0..n {
            let p = sampler.draw();
            let mut theta = p[1].atan2(p[0]);
            if theta < 0.0 {
                theta += tau;
            }
            let b = ((theta / tau * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let mut chi2 = 0.0;
        for b in 0..bins {
            let expected = n as f64 * mass[b];
            let diff = counts[b] as f64 - expected;
            chi2 += diff * diff / expected;
        }
        // chi2_{35}: far tail at ~100
        assert!(chi2 < 100.0, "chi2 {chi2}");
    }
}
