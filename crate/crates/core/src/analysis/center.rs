use rayon::prelude::*;

use super::nelder_mead;
use super::{radius_of, TailSpec};
use crate::error::{config, Error, Result};
use crate::mappings::TanMapping;
use crate::space::{euclid_dist, raw_dist, ConvexSet, GeodesicSpace, SpaceKind, SpacePoint, DISK_LIMIT};

const MAX_RUNS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOpts {
    /// Simplex diameter (chart coordinates) or bracket width (tree radius)
    /// at which the search counts as converged.
    pub tol: f64,
    pub max_evals: usize,
}

impl Default for SearchOpts {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_evals: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterResult {
    pub center: SpacePoint,
    pub radius: f64,
    pub search_evals: usize,
    pub converged: bool,
}

/// Even indices, odd indices, every third index.
pub fn default_subsequences() -> Vec<TailSpec> {
    vec![
        TailSpec::subsequence(0, 2, None),
        TailSpec::subsequence(1, 2, None),
        TailSpec::subsequence(0, 3, None),
    ]
}

enum Chart {
    Euclid(ConvexSet),
    /// `z -> tanh(|z|) z / |z|`; `|z|` is the distance from the origin, so
    /// a disk ball of radius `rho` is the chart ball of radius `atanh(rho)`.
    Disk {
        cap: f64,
    },
}

impl Chart {
    /// Point of K represented by `z`, plus the chart distance from `z` to
    /// K (zero inside), used as a penalty so the search stays near K.
    fn point(&self, z: &[f64]) -> (SpacePoint, f64) {
        match self {
            Chart::Euclid(set) => {
                let p = set
                    .project(&SpacePoint::Euclidean(z.to_vec()))
                    .expect("set checked against the space");
                let pen = euclid_dist(z, p.as_euclidean().expect("euclidean projection"));
                (p, pen)
            }
            Chart::Disk { cap } => {
                let s = z[0].hypot(z[1]);
                if s == 0.0 {
                    return (SpacePoint::Disk([0.0, 0.0]), 0.0);
                }
                let t = s.min(*cap);
                let mut w = t.tanh() / s;
                let sq = (w * z[0]).powi(2) + (w * z[1]).powi(2);
                if sq > DISK_LIMIT {
                    w *= (DISK_LIMIT / sq).sqrt();
                }
                (SpacePoint::Disk([w * z[0], w * z[1]]), s - t)
            }
        }
    }

    fn inverse(&self, p: &SpacePoint) -> Vec<f64> {
        match p {
            SpacePoint::Disk([u, v]) => {
                let r = u.hypot(*v);
                if r == 0.0 {
                    vec![0.0, 0.0]
                } else {
                    let s = r.atanh() / r;
                    vec![u * s, v * s]
                }
            }
            other => other.coords(),
        }
    }
}

/// Minimizer over `K` of the asymptotic radius of the selected tail.
///
/// Euclidean spaces and the disk are searched with a restarted simplex
/// method in a coordinate chart; on the star tree each occupied branch is
/// searched by golden section, the objective being convex along branches.
pub fn asymptotic_center(
    space: &GeodesicSpace,
    points: &[SpacePoint],
    k: &ConvexSet,
    tail: &TailSpec,
    opts: &SearchOpts,
) -> Result<CenterResult> {
    if points.is_empty() {
        return Err(config("asymptotic_center needs at least one point"));
    }
    if !(opts.tol > 0.0) || opts.max_evals == 0 {
        return Err(config("search tolerance and budget must be positive"));
    }
    space.check_set(k)?;
    let sel = tail.select(points)?;
    for p in &sel {
        space.check_point(p)?;
    }
    let (center, search_evals, converged) = match space.kind() {
        SpaceKind::StarTree { .. } => tree_search(&sel, k, opts),
        SpaceKind::Euclidean { .. } => chart_search(&Chart::Euclid(k.clone()), &sel, opts),
        SpaceKind::PoincareDisk => {
            let rho = match k {
                ConvexSet::DiskBall { radius } => *radius,
                _ => DISK_LIMIT.sqrt(),
            };
            chart_search(&Chart::Disk { cap: rho.atanh() }, &sel, opts)
        }
    };
    let radius = radius_of(space, &center, &sel)?;
    Ok(CenterResult {
        center,
        radius,
        search_evals,
        converged,
    })
}

fn chart_search(chart: &Chart, sel: &[&SpacePoint], opts: &SearchOpts) -> (SpacePoint, usize, bool) {
    let coords: Vec<Vec<f64>> = sel.iter().map(|p| chart.inverse(p)).collect();
    let dim = coords[0].len();
    let mut x: Vec<f64> = (0..dim)
        .map(|j| {
            let (lo, hi) = bounds(&coords, j);
            0.5 * (lo + hi)
        })
        .collect();
    let spread = (0..dim)
        .map(|j| {
            let (lo, hi) = bounds(&coords, j);
            hi - lo
        })
        .fold(0.0, f64::max);
    let objective = |z: &[f64]| {
        let (p, pen) = chart.point(z);
        sel.iter().map(|q| raw_dist(&p, q)).fold(0.0, f64::max) + pen
    };

    let mut step = (0.5 * spread).max(10.0 * opts.tol);
    let mut evals = 0;
    let mut best = f64::INFINITY;
    let mut converged = false;
    for run in 0..MAX_RUNS {
        let o = nelder_mead::minimize(objective, &x, step, opts.tol, opts.max_evals - evals);
        evals += o.evals;
        converged = o.diameter < opts.tol;
        let improved = o.f < best - 1e-15 * (1.0 + best.abs());
        if o.f <= best {
            best = o.f;
            x = o.x;
        }
        if (run > 0 && !improved) || evals >= opts.max_evals {
            break;
        }
        step = (0.1 * step).max(10.0 * opts.tol);
    }
    (chart.point(&x).0, evals, converged)
}

fn bounds(coords: &[Vec<f64>], j: usize) -> (f64, f64) {
    coords.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
        (lo.min(c[j]), hi.max(c[j]))
    })
}

fn tree_search(sel: &[&SpacePoint], k: &ConvexSet, opts: &SearchOpts) -> (SpacePoint, usize, bool) {
    let cap = match k {
        ConvexSet::TreeBall { radius } => *radius,
        _ => f64::INFINITY,
    };
    let objective = |p: &SpacePoint| sel.iter().map(|q| raw_dist(p, q)).fold(0.0, f64::max);
    let mut branches: Vec<(u32, f64)> = Vec::new();
    for p in sel {
        if let SpacePoint::Tree { branch, radius } = p {
            if *radius > 0.0 {
                match branches.iter_mut().find(|(b, _)| b == branch) {
                    Some((_, hi)) => *hi = hi.max(*radius),
                    None => branches.push((*branch, *radius)),
                }
            }
        }
    }
    branches.sort_by_key(|(b, _)| *b);

    let root = SpacePoint::root();
    let mut best = (objective(&root), root, true);
    let mut evals = 1;
    let budget = opts.max_evals / branches.len().max(1);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for (b, hi) in branches {
        let at = |r: f64| SpacePoint::tree_unchecked(b, r);
        let (mut lo, mut hi) = (0.0, hi.min(cap));
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (objective(&at(c)), objective(&at(d)));
        let mut used = 2;
        while hi - lo >= opts.tol && used < budget {
            if fc <= fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = objective(&at(c));
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = objective(&at(d));
            }
            used += 1;
        }
        evals += used;
        let (r, f) = if fc <= fd { (c, fc) } else { (d, fd) };
        if f < best.0 {
            best = (f, at(r), hi - lo < opts.tol);
        }
    }
    (best.1, evals, best.2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaResult {
    /// All pairwise center distances are within tolerance.
    pub converged: bool,
    pub centers: Vec<CenterResult>,
    pub max_pairwise: f64,
}

/// Computes the center of each subsequence and compares them pairwise.
pub fn delta_converged(
    space: &GeodesicSpace,
    points: &[SpacePoint],
    k: &ConvexSet,
    subsequences: &[TailSpec],
    tol: f64,
    opts: &SearchOpts,
) -> Result<DeltaResult> {
    if subsequences.len() < 2 {
        return Err(config("Δ-detection needs at least two subsequences"));
    }
    let centers = subsequences
        .par_iter()
        .map(|tail| asymptotic_center(space, points, k, tail, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut max_pairwise = 0.0f64;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            max_pairwise = max_pairwise.max(space.dist(&a.center, &b.center)?);
        }
    }
    Ok(DeltaResult {
        converged: max_pairwise <= tol,
        centers,
        max_pairwise,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub center: SpacePoint,
    pub radius: f64,
    /// `d(z, T z)` at the computed center `z`.
    pub residual: f64,
    pub search_evals: usize,
    pub converged: bool,
}

/// Asymptotic center `z` of the orbit `x, T x, ..., T^N x` over `K` and its
/// residual `d(z, T z)`. The orbit must stay within `bound` of `x`.
pub fn orbit_center_probe(
    t: &TanMapping,
    x: &SpacePoint,
    n: usize,
    k: &ConvexSet,
    tail: &TailSpec,
    bound: f64,
    opts: &SearchOpts,
) -> Result<ProbeResult> {
    let space = t.space();
    if !(bound > 0.0) {
        return Err(config(format!("orbit bound {bound} must be positive")));
    }
    let mut orbit = Vec::with_capacity(n + 1);
    orbit.push(x.clone());
    for step in 1..=n {
        let next = t.apply(&orbit[step - 1]).map_err(|e| match e {
            Error::Domain(detail) => Error::Escape {
                step,
                mapping: 1,
                detail,
            },
            other => other,
        })?;
        let d = space.dist(&next, x)?;
        if !(d <= bound) {
            return Err(Error::Unbounded {
                step,
                detail: format!("d(T^{step} x, x) = {d} exceeds {bound}"),
            });
        }
        orbit.push(next);
    }
    let c = asymptotic_center(space, &orbit, k, tail, opts)?;
    let residual = space.dist(&c.center, &t.apply(&c.center)?)?;
    Ok(ProbeResult {
        center: c.center,
        radius: c.radius,
        residual,
        search_evals: c.search_evals,
        converged: c.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(v: impl IntoIterator<Item = f64>) -> Vec<SpacePoint> {
        v.into_iter().map(SpacePoint::scalar).collect()
    }

    fn alternating(len: usize) -> Vec<SpacePoint> {
        line((0..len).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }))
    }

    #[test]
    fn constant_sequence_center() {
        let s = GeodesicSpace::euclidean(3).unwrap();
        let c = vec![SpacePoint::euclidean(vec![0.2, -1.0, 3.0]); 30];
        let r = asymptotic_center(
            &s,
            &c,
            &ConvexSet::WholeSpace,
            &TailSpec::default(),
            &SearchOpts::default(),
        )
        .unwrap();
        assert_eq!(r.center, c[0]);
        assert!(r.radius <= 1e-10);
    }

    #[test]
    fn alternating_center_is_midpoint() {
        let s = GeodesicSpace::euclidean(1).unwrap();
        let k = ConvexSet::interval(-2.0, 2.0).unwrap();
        let r = asymptotic_center(&s, &alternating(100), &k, &TailSpec::default(), &SearchOpts::default()).unwrap();
        assert!(r.center.coords()[0].abs() <= 1e-4, "{:?}", r);
        assert!((r.radius - 1.0).abs() <= 1e-4);
        assert!(r.converged);
    }

    #[test]
    fn harmonic_tail_center() {
        let s = GeodesicSpace::euclidean(1).unwrap();
        let k = ConvexSet::interval(0.0, 1.0).unwrap();
        let pts = line((1..=10_000).map(|n| 1.0 / n as f64));
        let r = asymptotic_center(&s, &pts, &k, &TailSpec::window(50), &SearchOpts::default()).unwrap();
        // oracle: midpoint of the window's range
        let (lo, hi) = (1.0 / 10_000.0, 1.0 / 9_951.0);
        assert!((r.center.coords()[0] - 0.5 * (lo + hi)).abs() < 1e-6);
        assert!((r.radius - 0.5 * (hi - lo)).abs() < 1e-6);
    }

    #[test]
    fn center_is_projected_into_k() {
        let s = GeodesicSpace::euclidean(1).unwrap();
        let k = ConvexSet::interval(2.0, 3.0).unwrap();
        let r = asymptotic_center(&s, &alternating(40), &k, &TailSpec::default(), &SearchOpts::default()).unwrap();
        assert!((r.center.coords()[0] - 2.0).abs() < 1e-6);
        assert!((r.radius - 3.0).abs() < 1e-6);
    }

    #[test]
    fn disk_center_of_symmetric_pair() {
        let d = GeodesicSpace::poincare_disk();
        let pts: Vec<_> = (0..40)
            .map(|i| SpacePoint::disk(if i % 2 == 0 { 0.5 } else { -0.5 }, 0.0).unwrap())
            .collect();
        let r = asymptotic_center(
            &d,
            &pts,
            &ConvexSet::WholeSpace,
            &TailSpec::default(),
            &SearchOpts::default(),
        )
        .unwrap();
        let c = r.center.coords();
        assert!(c[0].hypot(c[1]) < 1e-5, "{c:?}");
        assert!((r.radius - 0.5f64.atanh()).abs() < 1e-6);
    }

    #[test]
    fn tree_center_on_the_long_branch() {
        let t = GeodesicSpace::star_tree(3).unwrap();
        let pts: Vec<_> = (0..40)
            .map(|i| {
                if i % 2 == 0 {
                    SpacePoint::tree(0, 1.0).unwrap()
                } else {
                    SpacePoint::tree(1, 3.0).unwrap()
                }
            })
            .collect();
        let r = asymptotic_center(
            &t,
            &pts,
            &ConvexSet::WholeSpace,
            &TailSpec::default(),
            &SearchOpts::default(),
        )
        .unwrap();
        assert_eq!(r.center.coords()[0], 1.0);
        assert!((r.center.coords()[1] - 1.0).abs() < 1e-6);
        assert!((r.radius - 2.0).abs() < 1e-6);
        let capped = asymptotic_center(
            &t,
            &pts,
            &ConvexSet::tree_ball(0.5).unwrap(),
            &TailSpec::default(),
            &SearchOpts::default(),
        )
        .unwrap();
        assert!((capped.center.coords()[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn delta_detection() {
        let s = GeodesicSpace::euclidean(1).unwrap();
        let k = ConvexSet::WholeSpace;
        let opts = SearchOpts::default();
        let conv = line((1..=200).map(|n| 0.5f64.powi(n)));
        let r = delta_converged(&s, &conv, &k, &default_subsequences(), 1e-4, &opts).unwrap();
        assert!(r.converged);
        assert!(r.centers.iter().all(|c| c.center.coords()[0].abs() < 1e-6));

        let alt = alternating(100);
        let specs = [TailSpec::subsequence(0, 2, None), TailSpec::subsequence(1, 2, None)];
        let r = delta_converged(&s, &alt, &k, &specs, 1e-4, &opts).unwrap();
        assert!(!r.converged);
        assert!((r.centers[0].center.coords()[0] - 1.0).abs() < 1e-9);
        assert!((r.centers[1].center.coords()[0] + 1.0).abs() < 1e-9);
        assert!((r.max_pairwise - 2.0).abs() < 1e-9);
        assert!(delta_converged(&s, &alt, &k, &specs[..1], 1e-4, &opts).is_err());
    }

    #[test]
    fn probes() {
        let line1 = GeodesicSpace::euclidean(1).unwrap();
        let t = TanMapping::affine_contraction(line1, 0.5).unwrap();
        let k = ConvexSet::interval(-1.0, 1.0).unwrap();
        let p = orbit_center_probe(
            &t,
            &SpacePoint::scalar(1.0),
            60,
            &k,
            &TailSpec::default(),
            10.0,
            &SearchOpts::default(),
        )
        .unwrap();
        assert!(p.residual <= 1e-6, "{p:?}");

        let plane = GeodesicSpace::euclidean(2).unwrap();
        let rot = TanMapping::rotation(plane, 1.0).unwrap();
        let disk = ConvexSet::closed_ball(vec![0.0, 0.0], 1.0).unwrap();
        let x = SpacePoint::euclidean(vec![1.0, 0.0]);
        let p = orbit_center_probe(&rot, &x, 500, &disk, &TailSpec::default(), 10.0, &SearchOpts::default()).unwrap();
        assert!(p.residual <= 1e-3, "{p:?}");

        let fixed = SpacePoint::scalar(0.0);
        let p = orbit_center_probe(&t, &fixed, 20, &k, &TailSpec::default(), 1.0, &SearchOpts::default()).unwrap();
        assert_eq!(p.center, fixed);
        assert_eq!(p.residual, 0.0);
    }

    #[test]
    fn probe_reports_escape_step() {
        let t = TanMapping::shift_scale4(4).unwrap();
        let x = SpacePoint::euclidean(vec![0.0, 0.1, 0.0, 0.0]);
        let k = ConvexSet::closed_ball(vec![0.0; 4], 1.0).unwrap();
        let err = orbit_center_probe(&t, &x, 10, &k, &TailSpec::default(), 0.5, &SearchOpts::default()).unwrap_err();
        assert_eq!(
            err,
            Error::Unbounded {
                step: 2,
                detail: err_detail(&err)
            }
        );
    }

    fn err_detail(e: &Error) -> String {
        match e {
            Error::Unbounded { detail, .. } => detail.clone(),
            _ => String::new(),
        }
    }
}
