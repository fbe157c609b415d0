//! Randomized checks of the metric and convexity axioms.

use rand::Rng;

use crate::error::{config, Result};
use crate::rng::stream;

use super::{raw_combine, raw_dist, GeodesicSpace, ModulusQuery, SpaceKind, SpacePoint};

/// Outcome of one sampled inequality. `max_violation` is the largest signed
/// excess of the left side over the right side (negative when the inequality
/// holds with room to spare).
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomCheck {
    pub name: String,
    pub samples: usize,
    pub max_violation: f64,
    pub violations: usize,
    pub tolerance: f64,
    /// Reported-only checks do not affect [`AxiomReport::passed`].
    pub enforced: bool,
}

impl AxiomCheck {
    fn new(name: &str, tolerance: f64, enforced: bool) -> Self {
        Self {
            name: name.to_string(),
            samples: 0,
            max_violation: f64::NEG_INFINITY,
            violations: 0,
            tolerance,
            enforced,
        }
    }

    fn record(&mut self, violation: f64) {
        self.samples += 1;
        if violation > self.tolerance || violation.is_nan() {
            self.violations += 1;
        }
        if violation > self.max_violation || violation.is_nan() {
            self.max_violation = violation;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub space: String,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.enforced).all(AxiomCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn require_samples(sample_count: usize) -> Result<()> {
    if sample_count == 0 {
        return Err(config("sample_count must be >= 1"));
    }
    Ok(())
}

/// Symmetry, identity and triangle inequality over seeded random triples.
pub fn check_metric_axioms(space: &GeodesicSpace, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    require_samples(sample_count)?;
    let tol = space.tolerance();
    let mut sym = AxiomCheck::new("symmetry", 0.0, true);
    let mut ident = AxiomCheck::new("identity", 0.0, true);
    let mut tri = AxiomCheck::new("triangle", tol, true);
    for i in 0..sample_count {
        let mut rng = stream(seed, i as u64);
        let x = space.sample(&mut rng)?;
        let y = space.sample(&mut rng)?;
        let z = space.sample(&mut rng)?;
        sym.record((raw_dist(&x, &y) - raw_dist(&y, &x)).abs());
        ident.record(raw_dist(&x, &x));
        tri.record(raw_dist(&x, &z) - raw_dist(&x, &y) - raw_dist(&y, &z));
    }
    Ok(AxiomReport {
        space: space.kind().name().to_string(),
        checks: vec![sym, ident, tri],
    })
}

/// The four convexity axioms with weight `t` on the second argument:
///
/// - W1: `d(u, W(x,y,t)) <= (1-t) d(u,x) + t d(u,y)`
/// - W2: `d(W(x,y,a), W(x,y,b)) = |a-b| d(x,y)`
/// - W3: `W(x,y,t) = W(y,x,1-t)`
/// - W4: `d(W(x,z,t), W(y,w,t)) <= (1-t) d(x,y) + t d(z,w)`
///
/// Tuples are drawn from the space's domain with per-sample streams of `seed`.
pub fn check_w_axioms(space: &GeodesicSpace, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    require_samples(sample_count)?;
    let tol = space.tolerance();
    let mut w1 = AxiomCheck::new("W1", tol, true);
    let mut w2 = AxiomCheck::new("W2", tol, true);
    let mut w3 = AxiomCheck::new("W3", tol, true);
    let mut w4 = AxiomCheck::new("W4", tol, true);
    for i in 0..sample_count {
        let mut rng = stream(seed, i as u64);
        let x = space.sample(&mut rng)?;
        let y = space.sample(&mut rng)?;
        let z = space.sample(&mut rng)?;
        let w = space.sample(&mut rng)?;
        let u = space.sample(&mut rng)?;
        let a: f64 = rng.random();
        let b: f64 = rng.random();

        let xy_a = raw_combine(&x, &y, a);
        w1.record(raw_dist(&u, &xy_a) - (1.0 - a) * raw_dist(&u, &x) - a * raw_dist(&u, &y));

        let xy_b = raw_combine(&x, &y, b);
        w2.record((raw_dist(&xy_a, &xy_b) - (a - b).abs() * raw_dist(&x, &y)).abs());

        let yx = raw_combine(&y, &x, 1.0 - a);
        w3.record(raw_dist(&xy_a, &yx));

        let xz = raw_combine(&x, &z, a);
        let yw = raw_combine(&y, &w, a);
        w4.record(raw_dist(&xz, &yw) - (1.0 - a) * raw_dist(&x, &y) - a * raw_dist(&z, &w));
    }
    Ok(AxiomReport {
        space: space.kind().name().to_string(),
        checks: vec![w1, w2, w3, w4],
    })
}

/// Excess of `d(W(x,y,lambda), a)` over `(1 - 2 lambda (1-lambda) eta(r,eps)) r`
/// for a single feasible tuple. Infeasible tuples are configuration errors.
pub fn uc_gap(
    space: &GeodesicSpace,
    a: &SpacePoint,
    x: &SpacePoint,
    y: &SpacePoint,
    r: f64,
    eps: f64,
    lambda: f64,
) -> Result<f64> {
    let q = ModulusQuery::new(r, eps)?;
    let tol = space.tolerance();
    let (dxa, dya, dxy) = (space.dist(x, a)?, space.dist(y, a)?, space.dist(x, y)?);
    if dxa > r + tol || dya > r + tol || dxy < eps * r - tol {
        return Err(config(format!(
            "infeasible tuple: d(x,a)={dxa}, d(y,a)={dya}, d(x,y)={dxy}, r={r}, eps={eps}"
        )));
    }
    let m = space.combine(x, y, lambda)?;
    let bound = (1.0 - 2.0 * lambda * (1.0 - lambda) * space.modulus(q)) * r;
    Ok(space.dist(&m, a)? - bound)
}

/// Randomized check of the uniform-convexity inequality with modulus
/// `eps^2 / 8`. Each sample draws `a, x, y` from the domain, then `r` and
/// `eps` inside their feasible range; degenerate draws (`x == y` or all three
/// points equal) are rejected and redrawn. On the disk the modulus is a
/// working value, so that check is reported but not enforced.
pub fn check_uc_inequality(space: &GeodesicSpace, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    require_samples(sample_count)?;
    let enforced = !matches!(space.kind(), SpaceKind::PoincareDisk);
    let mut uc = AxiomCheck::new("uniform_convexity", space.tolerance(), enforced);
    let mut rejected = 0usize;
    let mut i = 0u64;
    while uc.samples < sample_count {
        let mut rng = stream(seed, i);
        i += 1;
        let a = space.sample(&mut rng)?;
        let x = space.sample(&mut rng)?;
        let y = space.sample(&mut rng)?;
        let (dxa, dya, dxy) = (raw_dist(&x, &a), raw_dist(&y, &a), raw_dist(&x, &y));
        let r = dxa.max(dya) * (1.0 + 0.25 * rng.random::<f64>());
        if r <= 1e-12 || dxy <= 1e-12 * r {
            rejected += 1;
            continue;
        }
        // eps in (0, min(2, d(x,y)/r)], so d(x,y) >= eps r holds
        let eps = (dxy / r).min(2.0) * (1.0 - rng.random::<f64>());
        if eps <= 0.0 {
            rejected += 1;
            continue;
        }
        let lambda: f64 = rng.random();
        let eta = space.modulus(ModulusQuery::new(r, eps)?);
        let m = raw_combine(&x, &y, lambda);
        uc.record(raw_dist(&m, &a) - (1.0 - 2.0 * lambda * (1.0 - lambda) * eta) * r);
    }
    let mut rej = AxiomCheck::new("rejected_draws", f64::INFINITY, false);
    rej.samples = rejected;
    rej.max_violation = rejected as f64;
    Ok(AxiomReport {
        space: space.kind().name().to_string(),
        checks: vec![uc, rej],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antipodal_midpoint_meets_bound() {
        let s = GeodesicSpace::euclidean(2).unwrap();
        let a = SpacePoint::euclidean(vec![0.0, 0.0]);
        let x = SpacePoint::euclidean(vec![1.5, 0.0]);
        let y = SpacePoint::euclidean(vec![-1.5, 0.0]);
        // eta(r, 2) = 1/2, bound (1 - 2 * 1/4 * 1/2) r = 3r/4; the midpoint is a itself
        let gap = uc_gap(&s, &a, &x, &y, 1.5, 2.0, 0.5).unwrap();
        assert!((gap + 1.125).abs() < 1e-15, "{gap}");
    }

    #[test]
    fn infeasible_tuple_rejected() {
        let s = GeodesicSpace::euclidean(1).unwrap();
        let a = SpacePoint::scalar(0.0);
        let r = uc_gap(
            &s,
            &a,
            &SpacePoint::scalar(2.0),
            &SpacePoint::scalar(0.5),
            1.0,
            1.0,
            0.5,
        );
        assert!(r.is_err());
    }

    #[test]
    fn zero_samples_is_config_error() {
        let s = GeodesicSpace::euclidean(1).unwrap();
        assert!(check_w_axioms(&s, 0, 1).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let s = GeodesicSpace::poincare_disk();
        let a = check_w_axioms(&s, 200, 9).unwrap();
        let b = check_w_axioms(&s, 200, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_sweeps_pass() {
        for s in [
            GeodesicSpace::euclidean(3).unwrap(),
            GeodesicSpace::star_tree(3).unwrap(),
            GeodesicSpace::poincare_disk(),
        ] {
            assert!(check_w_axioms(&s, 500, 4).unwrap().passed(), "{:?}", s.kind());
            assert!(check_metric_axioms(&s, 500, 4).unwrap().passed());
            assert!(check_uc_inequality(&s, 500, 4).unwrap().passed());
        }
    }
}
