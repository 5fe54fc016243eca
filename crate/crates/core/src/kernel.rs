//! Symmetric k-ary kernels and exact extremal evaluation over all k-subsets
//! of a sample: the extremal statistic itself and threshold exceedance counts.
//!
//! Enumeration is brute force in lexicographic subset order; parallelism
//! partitions the leading index. Max/min and sum reductions are associative
//! and commutative, so results never depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the interesting extreme of a kernel is its largest or smallest value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Max,
    Min,
}

/// The shipped symmetric kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// Euclidean distance of a pair; supremum 2 in the unit ball.
    Distance,
    /// Scalar product of a pair; supremum 1 in the unit ball.
    ScalarProduct,
    /// Smaller central angle of a pair of unit vectors, in [0, pi];
    /// oriented towards its minimum, with infimum 0.
    Angle,
    /// Perimeter of the triangle of a triplet; supremum 3*sqrt(3) on the
    /// unit circle.
    Perimeter,
}

/// Tolerance for the unit-norm check of the angle kernel.
const ANGLE_UNIT_TOL: f64 = 1e-9;

impl Kernel {
    pub fn degree(self) -> usize {
        match self {
            Kernel::Distance | Kernel::ScalarProduct | Kernel::Angle => 2,
            Kernel::Perimeter => 3,
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Kernel::Angle => Orientation::Min,
            _ => Orientation::Max,
        }
    }

    /// The extremal constant approached by the statistic: the supremum for
    /// Max kernels, the infimum for Min kernels.
    pub fn extremal_value(self) -> f64 {
        match self {
            Kernel::Distance => 2.0,
            Kernel::ScalarProduct => 1.0,
            Kernel::Angle => 0.0,
            Kernel::Perimeter => 3.0 * 3.0_f64.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Distance => "distance",
            Kernel::ScalarProduct => "scalar_product",
            Kernel::Angle => "angle",
            Kernel::Perimeter => "perimeter",
        }
    }

    /// Evaluate the kernel on exactly `degree` points.
    pub fn eval(self, points: &[&[f64]]) -> Result<f64> {
        if points.len() != self.degree() {
            return Err(Error::domain(format!(
                "{} kernel takes {} points, got {}",
                self.name(),
                self.degree(),
                points.len()
            )));
        }
        match self {
            Kernel::Distance => Ok(dist(points[0], points[1])),
            Kernel::ScalarProduct => Ok(dot(points[0], points[1])),
            Kernel::Angle => {
                for p in points {
                    check_unit(p)?;
                }
                Ok(angle(points[0], points[1]))
            }
            Kernel::Perimeter => Ok(perimeter(points[0], points[1], points[2])),
        }
    }

    /// Does `value` exceed the threshold in this kernel's orientation?
    pub fn exceeds(self, value: f64, z: f64) -> bool {
        match self.orientation() {
            Orientation::Max => value > z,
            Orientation::Min => value < z,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Smaller central angle between unit vectors; the dot product is clamped to
/// [-1, 1] so rounding can never produce NaN.
pub(crate) fn angle(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

pub(crate) fn perimeter(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    dist(a, b) + dist(b, c) + dist(a, c)
}

fn check_unit(p: &[f64]) -> Result<()> {
    let norm = dot(p, p).sqrt();
    if (norm - 1.0).abs() > ANGLE_UNIT_TOL {
        return Err(Error::domain(format!(
            "angle kernel requires unit vectors, got norm {norm}"
        )));
    }
    Ok(())
}

/// An ordered sample of n points in R^d, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    dim: usize,
}

impl Sample {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::domain("all points must share one dimension".to_string()));
            }
            data.extend_from_slice(p);
        }
        Sample::from_flat(data, dim.max(1))
    }

    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::domain(format!(
                "flat buffer of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("sample points must be finite".to_string()));
        }
        Ok(Sample { data, dim })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::domain("point dimension mismatch".to_string()));
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("sample points must be finite".to_string()));
        }
        self.data.extend_from_slice(point);
        Ok(())
    }
}

fn check_arity(sample: &Sample, kernel: Kernel) -> Result<()> {
    let (n, k) = (sample.len(), kernel.degree());
    if n < k {
        return Err(Error::InsufficientSample { n, k });
    }
    if kernel == Kernel::Angle {
        for i in 0..n {
            check_unit(sample.point(i))?;
        }
    }
    Ok(())
}

fn reduce_pairs<F>(sample: &Sample, orientation: Orientation, f: F) -> f64
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let n = sample.len();
    let worst = match orientation {
        Orientation::Max => f64::NEG_INFINITY,
        Orientation::Min => f64::INFINITY,
    };
    let pick = |a: f64, b: f64| match orientation {
        Orientation::Max => a.max(b),
        Orientation::Min => a.min(b),
    };
    (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let pi = sample.point(i);
            let mut best = worst;
            for j in i + 1..n {
                best = pick(best, f(pi, sample.point(j)));
            }
            best
        })
        .reduce(|| worst, pick)
}

fn reduce_triples<F>(sample: &Sample, orientation: Orientation, f: F) -> f64
where
    F: Fn(&[f64], &[f64], &[f64]) -> f64 + Sync,
{
    let n = sample.len();
    let worst = match orientation {
        Orientation::Max => f64::NEG_INFINITY,
        Orientation::Min => f64::INFINITY,
    };
    let pick = |a: f64, b: f64| match orientation {
        Orientation::Max => a.max(b),
        Orientation::Min => a.min(b),
    };
    (0..n.saturating_sub(2))
        .into_par_iter()
        .map(|i| {
            let pi = sample.point(i);
            let mut best = worst;
            for j in i + 1..n {
                let pj = sample.point(j);
                for l in j + 1..n {
                    best = pick(best, f(pi, pj, sample.point(l)));
                }
            }
            best
        })
        .reduce(|| worst, pick)
}

fn count_pairs<F>(sample: &Sample, f: F) -> u64
where
    F: Fn(&[f64], &[f64]) -> bool + Sync,
{
    let n = sample.len();
    (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let pi = sample.point(i);
            (i + 1..n).filter(|&j| f(pi, sample.point(j))).count() as u64
        })
        .sum()
}

fn count_triples<F>(sample: &Sample, f: F) -> u64
where
    F: Fn(&[f64], &[f64], &[f64]) -> bool + Sync,
{
    let n = sample.len();
    (0..n.saturating_sub(2))
        .into_par_iter()
        .map(|i| {
            let pi = sample.point(i);
            let mut hits = 0u64;
            for j in i + 1..n {
                let pj = sample.point(j);
                for l in j + 1..n {
                    if f(pi, pj, sample.point(l)) {
                        hits += 1;
                    }
                }
            }
            hits
        })
        .sum()
}

/// The extremal statistic: max (or min, per orientation) of the kernel over
/// all C(n, k) index subsets. Exact, no approximation.
pub fn u_max(sample: &Sample, kernel: Kernel) -> Result<f64> {
    check_arity(sample, kernel)?;
    let o = kernel.orientation();
    Ok(match kernel {
        Kernel::Distance => reduce_pairs(sample, o, dist),
        Kernel::ScalarProduct => reduce_pairs(sample, o, dot),
        Kernel::Angle => reduce_pairs(sample, o, angle),
        Kernel::Perimeter => reduce_triples(sample, o, perimeter),
    })
}

/// Number of k-subsets whose kernel value exceeds `z` in the kernel's
/// orientation (h > z for Max, h < z for Min). The extremal statistic stays
/// on the non-exceeding side of `z` iff this count is zero.
pub fn exceedance_count(sample: &Sample, kernel: Kernel, z: f64) -> Result<u64> {
    check_arity(sample, kernel)?;
    Ok(match kernel {
        Kernel::Distance => count_pairs(sample, |a, b| dist(a, b) > z),
        Kernel::ScalarProduct => count_pairs(sample, |a, b| dot(a, b) > z),
        Kernel::Angle => count_pairs(sample, |a, b| angle(a, b) < z),
        Kernel::Perimeter => count_triples(sample, |a, b, c| perimeter(a, b, c) > z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::PointLaw;
    use crate::stream::RngStream;
    use proptest::prelude::*;

    fn circle_points(angles_deg: &[f64]) -> Sample {
        Sample::new(
            angles_deg
                .iter()
                .map(|a| {
                    let r = a.to_radians();
                    vec![r.cos(), r.sin()]
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn kernel_metadata() {
        assert_eq!(Kernel::Distance.degree(), 2);
        assert_eq!(Kernel::ScalarProduct.degree(), 2);
        assert_eq!(Kernel::Angle.degree(), 2);
        assert_eq!(Kernel::Perimeter.degree(), 3);
        assert_eq!(Kernel::Angle.orientation(), Orientation::Min);
        assert_eq!(Kernel::Perimeter.orientation(), Orientation::Max);
        assert_eq!(Kernel::Angle.extremal_value(), 0.0);
    }

    #[test]
    fn kernel_point_values() {
        let a = [1.0, 0.0];
        let b = [-1.0, 0.0];
        assert_eq!(Kernel::Distance.eval(&[&a, &b]).unwrap(), 2.0);
        assert_eq!(Kernel::ScalarProduct.eval(&[&a, &a]).unwrap(), 1.0);
        let eq = circle_points(&[0.0, 120.0, 240.0]);
        let p = Kernel::Perimeter
            .eval(&[eq.point(0), eq.point(1), eq.point(2)])
            .unwrap();
        assert!((p - 3.0 * 3.0_f64.sqrt()).abs() < 1e-12);
        // angle of antipodal pair is pi
        let ang = Kernel::Angle.eval(&[&a, &b]).unwrap();
        assert!((ang - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn angle_rejects_non_unit_vectors() {
        let a = [1.0, 0.0];
        let b = [0.5, 0.0];
        assert!(Kernel::Angle.eval(&[&a, &b]).is_err());
        let s = Sample::new(vec![vec![1.0, 0.0], vec![0.5, 0.0]]).unwrap();
        assert!(u_max(&s, Kernel::Angle).is_err());
    }

    #[test]
    fn u_max_single_pair() {
        let s = Sample::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(u_max(&s, Kernel::Distance).unwrap(), 5.0);
    }

    #[test]
    fn u_max_four_point_circle() {
        // brute force over the 6 pairs: the (0, 180) pair attains 2.0
        let s = circle_points(&[0.0, 90.0, 180.0, 200.0]);
        assert!((u_max(&s, Kernel::Distance).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(exceedance_count(&s, Kernel::Distance, 1.9).unwrap(), 1);
    }

    #[test]
    fn exceedance_trivials() {
        let s = circle_points(&[10.0, 130.0, 250.0]);
        assert_eq!(exceedance_count(&s, Kernel::Distance, 0.0).unwrap(), 3);
        assert_eq!(exceedance_count(&s, Kernel::Distance, 2.0).unwrap(), 0);
    }

    #[test]
    fn insufficient_sample_is_an_error() {
        let s = Sample::new(vec![vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            u_max(&s, Kernel::Distance),
            Err(Error::InsufficientSample { n: 1, k: 2 })
        ));
        let s3 = circle_points(&[0.0, 90.0]);
        assert!(u_max(&s3, Kernel::Perimeter).is_err());
        assert!(exceedance_count(&s3, Kernel::Perimeter, 1.0).is_err());
    }

    fn random_sample(rng: &mut RngStream, n: usize) -> Sample {
        let law = PointLaw::uniform_sphere(2).unwrap();
        let mut sampler = law.sampler(rng);
        sampler.sample(n)
    }

    #[test]
    fn equivalence_of_u_max_and_count() {
        // (u_max <= z) iff (count == 0) for Max; mirrored for Min
        let mut rng = RngStream::from_seed(31);
        for trial in 0..1000 {
            let n = 2 + (trial % 7);
            let s = random_sample(&mut rng.child(trial as u64), n);
            for kernel in [Kernel::Distance, Kernel::ScalarProduct, Kernel::Angle] {
                let z = match kernel {
                    Kernel::Distance => 2.0 * rng.uniform(),
                    Kernel::ScalarProduct => 2.0 * rng.uniform() - 1.0,
                    _ => std::f64::consts::PI * rng.uniform(),
                };
                let h = u_max(&s, kernel).unwrap();
                let c = exceedance_count(&s, kernel, z).unwrap();
                let no_exceed = match kernel.orientation() {
                    Orientation::Max => h <= z,
                    Orientation::Min => h >= z,
                };
                assert_eq!(no_exceed, c == 0, "{kernel:?} h {h} z {z} count {c}");
            }
            if n >= 3 {
                let z = 3.0 * 3.0_f64.sqrt() * rng.uniform();
                let h = u_max(&s, Kernel::Perimeter).unwrap();
                let c = exceedance_count(&s, Kernel::Perimeter, z).unwrap();
                assert_eq!(h <= z, c == 0);
            }
        }
    }

    #[test]
    fn appending_points_is_monotone() {
        let mut rng = RngStream::from_seed(32);
        for trial in 0..200 {
            let mut s = random_sample(&mut rng.child(trial), 4);
            let before_max = u_max(&s, Kernel::Distance).unwrap();
            let before_min = u_max(&s, Kernel::Angle).unwrap();
            let extra = random_sample(&mut rng.child(1000 + trial), 1);
            s.push(extra.point(0)).unwrap();
            assert!(u_max(&s, Kernel::Distance).unwrap() >= before_max);
            assert!(u_max(&s, Kernel::Angle).unwrap() <= before_min);
        }
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = RngStream::from_seed(33);
        let s = random_sample(&mut rng, 12);
        let theta = 1.234_f64;
        let (c, si) = (theta.cos(), theta.sin());
        let rotated = Sample::new(
            (0..s.len())
                .map(|i| {
                    let p = s.point(i);
                    vec![c * p[0] - si * p[1], si * p[0] + c * p[1]]
                })
                .collect(),
        )
        .unwrap();
        for kernel in [Kernel::Distance, Kernel::Angle, Kernel::Perimeter] {
            let a = u_max(&s, kernel).unwrap();
            let b = u_max(&rotated, kernel).unwrap();
            assert!((a - b).abs() < 1e-9, "{kernel:?}: {a} vs {b}");
        }
    }

    #[test]
    fn parallel_equals_sequential_bitwise() {
        let mut rng = RngStream::from_seed(34);
        let s = random_sample(&mut rng, 40);
        for kernel in [Kernel::Distance, Kernel::ScalarProduct, Kernel::Angle, Kernel::Perimeter] {
            let single = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap()
                .install(|| u_max(&s, kernel).unwrap());
            let multi = rayon::ThreadPoolBuilder::new()
                .num_threads(4)
                .build()
                .unwrap()
                .install(|| u_max(&s, kernel).unwrap());
            assert_eq!(single.to_bits(), multi.to_bits(), "{kernel:?}");
            let c1 = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap()
                .install(|| exceedance_count(&s, kernel, 0.7).unwrap());
            let c4 = rayon::ThreadPoolBuilder::new()
                .num_threads(4)
                .build()
                .unwrap()
                .install(|| exceedance_count(&s, kernel, 0.7).unwrap());
            assert_eq!(c1, c4);
        }
    }

    proptest! {
        #[test]
        fn permutation_invariance(seed in 0u64..5000, n in 3usize..9) {
            let mut rng = RngStream::from_seed(seed);
            let s = random_sample(&mut rng, n);
            let mut order: Vec<usize> = (0..n).collect();
            // Fisher-Yates with the same stream
            for i in (1..n).rev() {
                let j = (rng.uniform() * (i + 1) as f64) as usize;
                order.swap(i, j.min(i));
            }
            let shuffled = Sample::new(order.iter().map(|&i| s.point(i).to_vec()).collect()).unwrap();
            for kernel in [Kernel::Distance, Kernel::ScalarProduct, Kernel::Angle, Kernel::Perimeter] {
                prop_assert_eq!(
                    u_max(&s, kernel).unwrap().to_bits(),
                    u_max(&shuffled, kernel).unwrap().to_bits()
                );
                prop_assert_eq!(
                    exceedance_count(&s, kernel, 1.2).unwrap(),
                    exceedance_count(&shuffled, kernel, 1.2).unwrap()
                );
            }
        }

        #[test]
        fn kernel_eval_is_symmetric(seed in 0u64..5000) {
            let mut rng = RngStream::from_seed(seed);
            let s = random_sample(&mut rng, 3);
            let (a, b, c) = (s.point(0), s.point(1), s.point(2));
            for kernel in [Kernel::Distance, Kernel::ScalarProduct, Kernel::Angle] {
                prop_assert_eq!(
                    kernel.eval(&[a, b]).unwrap().to_bits(),
                    kernel.eval(&[b, a]).unwrap().to_bits()
                );
            }
            let p0 = Kernel::Perimeter.eval(&[a, b, c]).unwrap();
            for perm in [[b, a, c], [c, b, a], [a, c, b], [b, c, a], [c, a, b]] {
                let p = Kernel::Perimeter.eval(&perm).unwrap();
                prop_assert!((p - p0).abs() < 1e-12);
            }
        }
    }
}
