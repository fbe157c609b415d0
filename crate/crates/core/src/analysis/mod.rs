//! Diagnostics for traces: asymptotic radii and centers, Δ-convergence,
//! envelope and summability checks, distance to the common fixed set.

mod center;
mod nelder_mead;
mod report;

use crate::error::{config, Result};
use crate::mappings::TanSequences;
use crate::space::{ConvexSet, GeodesicSpace, SpacePoint};

pub use center::{
    asymptotic_center, default_subsequences, delta_converged, orbit_center_probe, CenterResult, DeltaResult,
    ProbeResult, SearchOpts,
};
pub use report::{classify, AnalysisOptions, Classification, ConvergenceReport, ResidualSummary};

/// Minimum number of points in a default tail window.
pub const MIN_DEFAULT_WINDOW: usize = 10;

/// Selection of a subsequence `offset, offset + stride, ...` followed by its
/// last `window` elements, used as a finite stand-in for `limsup`.
///
/// Without an explicit window the last quarter of the subsequence is used,
/// but never fewer than [`MIN_DEFAULT_WINDOW`] points (or all of them if the
/// subsequence is shorter). Explicit windows longer than the subsequence are
/// clamped to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailSpec {
    pub window: Option<usize>,
    pub stride: usize,
    pub offset: usize,
}

impl Default for TailSpec {
    fn default() -> Self {
        Self {
            window: None,
            stride: 1,
            offset: 0,
        }
    }
}

impl TailSpec {
    pub fn window(window: usize) -> Self {
        Self {
            window: Some(window),
            ..Self::default()
        }
    }

    pub fn subsequence(offset: usize, stride: usize, window: Option<usize>) -> Self {
        Self { window, stride, offset }
    }

    pub fn select<'a>(&self, points: &'a [SpacePoint]) -> Result<Vec<&'a SpacePoint>> {
        if self.stride == 0 {
            return Err(config("tail stride must be >= 1"));
        }
        if self.window == Some(0) {
            return Err(config("tail window must be >= 1"));
        }
        let sub: Vec<&SpacePoint> = points.iter().skip(self.offset).step_by(self.stride).collect();
        if sub.is_empty() {
            return Err(config(format!(
                "tail selection (offset {}, stride {}) of {} points is empty",
                self.offset,
                self.stride,
                points.len()
            )));
        }
        let w = self
            .window
            .unwrap_or_else(|| (sub.len() / 4).max(MIN_DEFAULT_WINDOW))
            .min(sub.len());
        Ok(sub[sub.len() - w..].to_vec())
    }
}

/// `max_k d(x, x_k)` over the selected tail.
pub fn asymptotic_radius(space: &GeodesicSpace, x: &SpacePoint, points: &[SpacePoint], tail: &TailSpec) -> Result<f64> {
    let sel = tail.select(points)?;
    radius_of(space, x, &sel)
}

pub(crate) fn radius_of(space: &GeodesicSpace, x: &SpacePoint, sel: &[&SpacePoint]) -> Result<f64> {
    let mut r = 0.0f64;
    for p in sel {
        r = r.max(space.dist(x, p)?);
    }
    Ok(r)
}

/// Description of the common fixed set `F`.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedSetDescriptor {
    SinglePoint(SpacePoint),
    FiniteList(Vec<SpacePoint>),
    IntervalBox { lower: Vec<f64>, upper: Vec<f64> },
}

impl FixedSetDescriptor {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FixedSetDescriptor::SinglePoint(_) => "single_point",
            FixedSetDescriptor::FiniteList(_) => "finite_list",
            FixedSetDescriptor::IntervalBox { .. } => "interval_box",
        }
    }

    /// Nonempty, and every member lies in the space's domain set.
    pub fn validate(&self, space: &GeodesicSpace) -> Result<()> {
        match self {
            FixedSetDescriptor::SinglePoint(p) => member(space, p),
            FixedSetDescriptor::FiniteList(ps) => {
                if ps.is_empty() {
                    return Err(config("fixed set list is empty"));
                }
                ps.iter().try_for_each(|p| member(space, p))
            }
            FixedSetDescriptor::IntervalBox { lower, upper } => {
                let b = ConvexSet::interval_box(lower.clone(), upper.clone())?;
                space.check_set(&b)?;
                // both corners must lie in K
                member(space, &SpacePoint::Euclidean(lower.clone()))?;
                member(space, &SpacePoint::Euclidean(upper.clone()))
            }
        }
    }
}

fn member(space: &GeodesicSpace, p: &SpacePoint) -> Result<()> {
    if !space.in_domain(p)? {
        return Err(config(format!("fixed-set member {p} lies outside K")));
    }
    Ok(())
}

/// Exact distance from `x` to the described set.
pub fn dist_to_fixed_set(space: &GeodesicSpace, x: &SpacePoint, f: &FixedSetDescriptor) -> Result<f64> {
    match f {
        FixedSetDescriptor::SinglePoint(p) => space.dist(x, p),
        FixedSetDescriptor::FiniteList(ps) => {
            let mut best = f64::INFINITY;
            for p in ps {
                best = best.min(space.dist(x, p)?);
            }
            if best.is_infinite() {
                return Err(config("fixed set list is empty"));
            }
            Ok(best)
        }
        FixedSetDescriptor::IntervalBox { lower, upper } => {
            let b = ConvexSet::interval_box(lower.clone(), upper.clone())?;
            space.check_set(&b)?;
            let px = b.project(x)?;
            space.dist(x, &px)
        }
    }
}

/// Result of checking `a_(n+1) <= (1 + b_n) a_n + c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    /// 1-based index `n` of the first violated step.
    pub first_violation: Option<usize>,
    /// Largest `a_(n+1) - (1 + b_n) a_n - c_n`.
    pub max_excess: f64,
    /// `max - min` of `a` over its last quarter (at least 2 terms).
    pub tail_oscillation: f64,
    /// `(a_1 + sum c) * prod (1 + b)`, an upper bound on every `a_n` (and on
    /// the limit) when the recursion holds.
    pub envelope_bound: f64,
    pub passed: bool,
}

/// Termwise check of the perturbed-monotone recursion plus a Cauchy test of
/// the tail of `a`, both at tolerance `tol`.
pub fn check_lemma24(a: &[f64], b: &[f64], c: &[f64], tol: f64) -> Result<LemmaReport> {
    if a.len() < 2 || a.len() != b.len() || a.len() != c.len() {
        return Err(config(format!(
            "check_lemma24 needs equal lengths >= 2, got {}, {}, {}",
            a.len(),
            b.len(),
            c.len()
        )));
    }
    if let Some(v) = b.iter().chain(c).find(|v| !(**v >= 0.0)) {
        return Err(config(format!("b and c must be nonnegative, found {v}")));
    }
    let mut first_violation = None;
    let mut max_excess = f64::NEG_INFINITY;
    for n in 0..a.len() - 1 {
        let excess = a[n + 1] - (1.0 + b[n]) * a[n] - c[n];
        max_excess = max_excess.max(excess);
        if excess > tol && first_violation.is_none() {
            first_violation = Some(n + 1);
        }
    }
    let w = (a.len() / 4).max(2);
    let tail = &a[a.len() - w..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_oscillation = hi - lo;
    let prod: f64 = b[..b.len() - 1].iter().map(|v| 1.0 + v).product();
    let envelope_bound = (a[0] + c[..c.len() - 1].iter().sum::<f64>()) * prod;
    Ok(LemmaReport {
        first_violation,
        max_excess,
        tail_oscillation,
        envelope_bound,
        passed: first_violation.is_none() && tail_oscillation <= tol,
    })
}

/// Constants of the Fejér-type envelope
/// `d(x_(n+1), p) <= (1 + a sum_j k_jn) d(x_n, p) + a sum_j (k_jn + phi_jn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FejerConstants {
    pub a: f64,
    pub sequences: Vec<TanSequences>,
}

impl FejerConstants {
    /// Envelope constant obtained by unrolling the chain with
    /// `xi(r) <= xi(M) + M* r` at each level:
    /// `a = prod_i (1 + K_i M*_i) * max_i max(M*_i, xi_i(M_i), 1)` where
    /// `K_i` bounds `k_in` over the first `horizon` steps.
    pub fn from_family(sequences: Vec<TanSequences>, horizon: usize) -> Self {
        let growth: f64 = sequences.iter().map(|s| 1.0 + s.k.sup(horizon) * s.m_star).product();
        let scale = sequences
            .iter()
            .map(|s| s.m_star.max(s.xi.eval(s.m)).max(1.0))
            .fold(1.0, f64::max);
        Self {
            a: growth * scale,
            sequences,
        }
    }

    pub fn b(&self, n: usize) -> f64 {
        self.a * self.sequences.iter().map(|s| s.k.at(n)).sum::<f64>()
    }

    pub fn c(&self, n: usize) -> f64 {
        self.a * self.sequences.iter().map(|s| s.k.at(n) + s.phi.at(n)).sum::<f64>()
    }
}

/// `max_n [d(x_(n+1), p) - (1 + b_n) d(x_n, p) - c_n]` over a trace; values
/// at or below tolerance mean the envelope holds. A single-row trace has no
/// steps and yields 0.
pub fn fejer_check(
    space: &GeodesicSpace,
    trace: &crate::iteration::Trace,
    p: &SpacePoint,
    constants: &FejerConstants,
) -> Result<f64> {
    if constants.sequences.len() != trace.m {
        return Err(config(format!(
            "fejer_check needs constants for {} mappings, got {}",
            trace.m,
            constants.sequences.len()
        )));
    }
    if !(constants.a > 0.0) {
        return Err(config("fejer envelope constant a must be positive"));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut prev = None;
    for row in &trace.rows {
        let d = space.dist(&row.x, p)?;
        if let Some((n, d_prev)) = prev {
            worst = worst.max(d - (1.0 + constants.b(n)) * d_prev - constants.c(n));
        }
        prev = Some((row.n, d));
    }
    Ok(if worst.is_finite() { worst } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_points(v: &[f64]) -> Vec<SpacePoint> {
        v.iter().map(|x| SpacePoint::scalar(*x)).collect()
    }

    #[test]
    fn tail_selection() {
        let pts = line_points(&(0..100).map(f64::from).collect::<Vec<_>>());
        let sel = TailSpec::default().select(&pts).unwrap();
        assert_eq!(sel.len(), 25);
        assert_eq!(sel[0], &SpacePoint::scalar(75.0));
        let odd = TailSpec::subsequence(1, 2, Some(3)).select(&pts).unwrap();
        assert_eq!(odd, vec![&pts[95], &pts[97], &pts[99]]);
        let short = TailSpec::default().select(&pts[..6]).unwrap();
        assert_eq!(short.len(), 6);
        assert!(TailSpec::subsequence(200, 1, None).select(&pts).is_err());
        assert!(TailSpec::subsequence(0, 0, None).select(&pts).is_err());
    }

    #[test]
    fn radius_examples() {
        let s = GeodesicSpace::euclidean(1).unwrap();
        let c = line_points(&[0.3; 20]);
        assert_eq!(
            asymptotic_radius(&s, &SpacePoint::scalar(0.3), &c, &TailSpec::default()).unwrap(),
            0.0
        );
        let alt: Vec<_> = (0..40)
            .map(|i| SpacePoint::scalar(if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        assert_eq!(
            asymptotic_radius(&s, &SpacePoint::scalar(0.0), &alt, &TailSpec::default()).unwrap(),
            1.0
        );
        assert_eq!(
            asymptotic_radius(&s, &SpacePoint::scalar(0.5), &alt, &TailSpec::default()).unwrap(),
            1.5
        );
    }

    #[test]
    fn fixed_set_distances() {
        let s = GeodesicSpace::euclidean(1).unwrap();
        let f = FixedSetDescriptor::SinglePoint(SpacePoint::scalar(0.0));
        assert_eq!(dist_to_fixed_set(&s, &SpacePoint::scalar(0.3), &f).unwrap(), 0.3);
        let b = FixedSetDescriptor::IntervalBox {
            lower: vec![0.0],
            upper: vec![1.0],
        };
        assert_eq!(dist_to_fixed_set(&s, &SpacePoint::scalar(2.0), &b).unwrap(), 1.0);
        assert_eq!(dist_to_fixed_set(&s, &SpacePoint::scalar(0.5), &b).unwrap(), 0.0);

        let d = GeodesicSpace::poincare_disk();
        let o = SpacePoint::disk(0.0, 0.0).unwrap();
        let h = SpacePoint::disk(0.5, 0.0).unwrap();
        let x = SpacePoint::disk(0.6, 0.0).unwrap();
        let l = FixedSetDescriptor::FiniteList(vec![o.clone(), h.clone()]);
        let expect = d.dist(&x, &o).unwrap().min(d.dist(&x, &h).unwrap());
        assert_eq!(dist_to_fixed_set(&d, &x, &l).unwrap(), expect);
        // |0.6 - 0.5| / |1 - 0.3| = 1/7
        assert!((expect - (1.0f64 / 7.0).atanh()).abs() < 1e-14);
        assert!(dist_to_fixed_set(&d, &x, &b).is_err());
    }

    #[test]
    fn lemma24_examples() {
        let n = 10_000;
        let a: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
        let z = vec![0.0; n];
        let r = check_lemma24(&a, &z, &z, 1e-4).unwrap();
        assert!(r.passed, "{r:?}");

        let a: Vec<f64> = (1..=50).map(f64::from).collect();
        let z = vec![0.0; 50];
        let r = check_lemma24(&a, &z, &z, 1e-9).unwrap();
        assert_eq!(r.first_violation, Some(1));
        assert!(!r.passed);

        let b: Vec<f64> = (1..=60).map(|k| 2f64.powi(-k)).collect();
        let mut a = vec![1.0];
        for k in 0..59 {
            a.push((1.0 + b[k]) * a[k]);
        }
        let r = check_lemma24(&a, &b, &vec![0.0; 60], 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.envelope_bound <= std::f64::consts::E);
        assert!(a.iter().all(|v| *v <= r.envelope_bound * (1.0 + 1e-15)));
    }

    #[test]
    fn lemma24_rejects_bad_input() {
        assert!(check_lemma24(&[1.0], &[0.0], &[0.0], 1e-9).is_err());
        assert!(check_lemma24(&[1.0, 1.0], &[0.0], &[0.0, 0.0], 1e-9).is_err());
        assert!(check_lemma24(&[1.0, 1.0], &[-0.1, 0.0], &[0.0, 0.0], 1e-9).is_err());
    }
}
