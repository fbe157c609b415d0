//! Geodesic spaces with a convexity map.
//!
//! Three instances are provided: Euclidean `R^d`, the Poincaré disk carrying
//! the Kobayashi distance of the complex unit disk, and a star-shaped R-tree
//! (finitely many half-lines glued at a common root). All three are uniquely
//! geodesic and satisfy the four convexity axioms; `combine(x, y, t)` is the
//! point a fraction `t` of the way from `x` to `y`.

mod checks;
mod point;
mod set;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{config, domain, Result};
use crate::rng::{uniform, Stream};

pub use checks::{check_metric_axioms, check_uc_inequality, check_w_axioms, uc_gap, AxiomCheck, AxiomReport};
pub use point::{SpacePoint, DISK_LIMIT};
pub(crate) use set::euclid_dist;
pub use set::{ConvexSet, MEMBERSHIP_TOL};

/// Half-width of the cube (or tree radius) used to sample unbounded sets.
pub const SAMPLE_WINDOW: f64 = 5.0;
/// Largest Euclidean norm of sampled disk points when the set is the whole disk.
pub const DISK_SAMPLE_RADIUS: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Euclidean { dim: usize },
    PoincareDisk,
    StarTree { branches: u32 },
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::Euclidean { .. } => "euclidean",
            SpaceKind::PoincareDisk => "poincare_disk",
            SpaceKind::StarTree { .. } => "star_tree",
        }
    }
}

/// A uniform-convexity query `(r, eps)` with `r > 0` and `eps` in `(0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusQuery {
    r: f64,
    eps: f64,
}

impl ModulusQuery {
    pub fn new(r: f64, eps: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(config(format!("modulus radius {r} must be positive")));
        }
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(config(format!("modulus eps {eps} must lie in (0, 2]")));
        }
        Ok(Self { r, eps })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// A geodesic space together with the closed convex set `K` that iterations
/// and samplers live in.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSpace {
    kind: SpaceKind,
    domain: ConvexSet,
}

impl GeodesicSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(config("euclidean dimension must be >= 1"));
        }
        Ok(Self {
            kind: SpaceKind::Euclidean { dim },
            domain: ConvexSet::WholeSpace,
        })
    }

    pub fn poincare_disk() -> Self {
        Self {
            kind: SpaceKind::PoincareDisk,
            domain: ConvexSet::WholeSpace,
        }
    }

    pub fn star_tree(branches: u32) -> Result<Self> {
        if branches < 1 {
            return Err(config("star tree needs at least one branch"));
        }
        Ok(Self {
            kind: SpaceKind::StarTree { branches },
            domain: ConvexSet::WholeSpace,
        })
    }

    /// Replace the domain set, checking that it belongs to this space.
    pub fn with_domain(mut self, domain: ConvexSet) -> Result<Self> {
        self.check_set(&domain)?;
        self.domain = domain;
        Ok(self)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn domain(&self) -> &ConvexSet {
        &self.domain
    }

    /// Tolerance appropriate for identities that hold exactly in this space.
    pub fn tolerance(&self) -> f64 {
        match self.kind {
            SpaceKind::PoincareDisk => 1e-7,
            _ => 1e-9,
        }
    }

    pub fn check_set(&self, set: &ConvexSet) -> Result<()> {
        let ok = match (&self.kind, set) {
            (_, ConvexSet::WholeSpace) => true,
            (SpaceKind::Euclidean { dim }, ConvexSet::IntervalBox { lower, .. }) => lower.len() == *dim,
            (SpaceKind::Euclidean { dim }, ConvexSet::ClosedBall { center, .. }) => center.len() == *dim,
            (SpaceKind::PoincareDisk, ConvexSet::DiskBall { .. }) => true,
            (SpaceKind::StarTree { .. }, ConvexSet::TreeBall { .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(config(format!(
                "set {} is not supported on a {} space of this shape",
                set.kind_name(),
                self.kind.name()
            )))
        }
    }

    /// Check that `x` is a point of this space (variant, dimension, open disk,
    /// branch id).
    pub fn check_point(&self, x: &SpacePoint) -> Result<()> {
        match (&self.kind, x) {
            (SpaceKind::Euclidean { dim }, SpacePoint::Euclidean(c)) => {
                if c.len() != *dim {
                    return Err(domain(format!(
                        "point has dimension {} but the space has dimension {dim}",
                        c.len()
                    )));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(domain(format!("point {x} is not finite")));
                }
                Ok(())
            }
            (SpaceKind::PoincareDisk, SpacePoint::Disk([u, v])) => SpacePoint::disk(*u, *v).map(|_| ()),
            (SpaceKind::StarTree { branches }, SpacePoint::Tree { branch, radius }) => {
                if *radius != 0.0 && branch >= branches {
                    return Err(domain(format!(
                        "branch {branch} does not exist in a tree with {branches} branches"
                    )));
                }
                SpacePoint::tree(*branch, *radius).map(|_| ())
            }
            _ => Err(domain(format!(
                "{} point handed to a {} space",
                x.variant_name(),
                self.kind.name()
            ))),
        }
    }

    /// Whether `x` is a point of this space lying in its domain set.
    pub fn in_domain(&self, x: &SpacePoint) -> Result<bool> {
        self.check_point(x)?;
        self.domain.contains(x)
    }

    pub fn dist(&self, x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(raw_dist(x, y))
    }

    /// The point a fraction `t` of the way along the geodesic from `x` to `y`:
    /// `d(x, combine(x, y, t)) = t d(x, y)`.
    pub fn combine(&self, x: &SpacePoint, y: &SpacePoint, t: f64) -> Result<SpacePoint> {
        if !(0.0..=1.0).contains(&t) {
            return Err(domain(format!("combination weight {t} is outside [0, 1]")));
        }
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(raw_combine(x, y, t))
    }

    /// Modulus of uniform convexity `eps^2 / 8`, shared by all three spaces.
    pub fn modulus(&self, q: ModulusQuery) -> f64 {
        q.eps * q.eps / 8.0
    }

    /// Retraction onto the space's domain set.
    pub fn project(&self, x: &SpacePoint) -> Result<SpacePoint> {
        self.check_point(x)?;
        self.domain.project(x)
    }

    /// Draw a point of `set` (a subset of this space). Unbounded directions
    /// are truncated to [`SAMPLE_WINDOW`].
    pub fn sample_in(&self, set: &ConvexSet, rng: &mut Stream) -> Result<SpacePoint> {
        self.check_set(set)?;
        Ok(match (&self.kind, set) {
            (SpaceKind::Euclidean { dim }, ConvexSet::WholeSpace) => {
                SpacePoint::Euclidean((0..*dim).map(|_| uniform(rng, -SAMPLE_WINDOW, SAMPLE_WINDOW)).collect())
            }
            (SpaceKind::Euclidean { .. }, ConvexSet::IntervalBox { lower, upper }) => SpacePoint::Euclidean(
                lower
                    .iter()
                    .zip(upper)
                    .map(|(lo, hi)| {
                        let (a, b) = sampling_range(*lo, *hi);
                        uniform(rng, a, b)
                    })
                    .collect(),
            ),
            (SpaceKind::Euclidean { dim }, ConvexSet::ClosedBall { center, radius }) => {
                let dir: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(rng)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let rho = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
                SpacePoint::Euclidean(center.iter().zip(&dir).map(|(c, d)| c + rho * d / norm).collect())
            }
            (SpaceKind::PoincareDisk, set) => {
                let limit = match set {
                    ConvexSet::DiskBall { radius } => *radius,
                    _ => DISK_SAMPLE_RADIUS,
                };
                let rho = limit * rng.random::<f64>().sqrt();
                let theta = uniform(rng, 0.0, std::f64::consts::TAU);
                SpacePoint::Disk([rho * theta.cos(), rho * theta.sin()])
            }
            (SpaceKind::StarTree { branches }, set) => {
                let limit = match set {
                    ConvexSet::TreeBall { radius } => *radius,
                    _ => SAMPLE_WINDOW,
                };
                let branch = rng.random_range(0..*branches);
                if rng.random::<f64>() < 0.05 {
                    SpacePoint::root()
                } else {
                    SpacePoint::tree_unchecked(branch, uniform(rng, 0.0, limit))
                }
            }
            _ => unreachable!("check_set admitted an unsupported pair"),
        })
    }

    /// Draw a point of the domain set.
    pub fn sample(&self, rng: &mut Stream) -> Result<SpacePoint> {
        self.sample_in(&self.domain, rng)
    }
}

fn sampling_range(lo: f64, hi: f64) -> (f64, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + 2.0 * SAMPLE_WINDOW),
        (false, true) => (hi - 2.0 * SAMPLE_WINDOW, hi),
        (false, false) => (-SAMPLE_WINDOW, SAMPLE_WINDOW),
    }
}

fn to_complex(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Disk automorphism `z -> (z - a) / (1 - conj(a) z)` sending `a` to 0.
fn mobius(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

/// Kobayashi distance on the unit disk, `atanh(sqrt(1 - sigma))` with
/// `sigma = (1 - |x|^2)(1 - |y|^2) / |1 - <x, y>|^2`. In one complex
/// dimension `1 - sigma = |x - y|^2 / |1 - x conj(y)|^2`, which is the form
/// evaluated here because it does not cancel near the diagonal.
pub fn kobayashi_dist(x: &[f64; 2], y: &[f64; 2]) -> f64 {
    let (a, b) = (to_complex(x), to_complex(y));
    let num = (a - b).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (Complex64::new(1.0, 0.0) - a * b.conj()).norm();
    (num / den).min(1.0 - f64::EPSILON).atanh()
}

pub(crate) fn raw_dist(x: &SpacePoint, y: &SpacePoint) -> f64 {
    match (x, y) {
        (SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => set::euclid_dist(a, b),
        (SpacePoint::Disk(a), SpacePoint::Disk(b)) => kobayashi_dist(a, b),
        (SpacePoint::Tree { branch: b1, radius: r1 }, SpacePoint::Tree { branch: b2, radius: r2 }) => {
            if b1 == b2 || *r1 == 0.0 || *r2 == 0.0 {
                (r1 - r2).abs()
            } else {
                r1 + r2
            }
        }
        _ => f64::NAN,
    }
}

pub(crate) fn raw_combine(x: &SpacePoint, y: &SpacePoint, t: f64) -> SpacePoint {
    if t == 0.0 {
        return x.clone();
    }
    if t == 1.0 {
        return y.clone();
    }
    match (x, y) {
        (SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => {
            SpacePoint::Euclidean(a.iter().zip(b).map(|(p, q)| (1.0 - t) * p + t * q).collect())
        }
        (SpacePoint::Disk(a), SpacePoint::Disk(b)) => {
            let (za, zb) = (to_complex(a), to_complex(b));
            let w = mobius(za, zb);
            let r = w.norm();
            if r == 0.0 {
                return x.clone();
            }
            let scaled = w * ((t * r.min(1.0 - f64::EPSILON).atanh()).tanh() / r);
            let z = mobius(-za, scaled);
            let n2 = z.norm_sqr();
            let z = if n2 > DISK_LIMIT {
                z * (DISK_LIMIT / n2).sqrt()
            } else {
                z
            };
            SpacePoint::Disk([z.re, z.im])
        }
        (SpacePoint::Tree { branch: b1, radius: r1 }, SpacePoint::Tree { branch: b2, radius: r2 }) => {
            if b1 == b2 && *r1 > 0.0 && *r2 > 0.0 {
                SpacePoint::tree_unchecked(*b1, (1.0 - t) * r1 + t * r2)
            } else {
                // path runs down branch b1 to the root, then up branch b2
                let walked = t * (r1 + r2);
                if walked <= *r1 {
                    SpacePoint::tree_unchecked(*b1, r1 - walked)
                } else {
                    SpacePoint::tree_unchecked(*b2, walked - r1)
                }
            }
        }
        _ => x.clone(),
    }
}
