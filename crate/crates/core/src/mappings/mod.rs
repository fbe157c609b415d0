//! Total asymptotically nonexpansive (TAN) mappings.
//!
//! A mapping `T` on a set `K` is TAN with constants `(k_n, phi_n, xi)` when
//!
//! ```text
//! d(T^n x, T^n y) <= d(x, y) + k_n xi(d(x, y)) + phi_n    for all x, y in K, n >= 1.
//! ```
//!
//! Non-self mappings `T: K -> X` replace `T^n` by `T (P T)^(n-1)` where `P` is
//! a nonexpansive retraction onto `K`.

mod estimate;
mod sequences;
mod sweep;

use std::f64::consts::PI;

use crate::error::{config, domain, Result};
use crate::rng::stream;
use crate::space::{ConvexSet, GeodesicSpace, SpaceKind, SpacePoint};

pub use estimate::{estimate_constants, EstimateReport, EstimateRow};
pub use sequences::{SeqSpec, TanSequences, XiSpec};
pub use sweep::{defect_sweep, DefectReport, DefectRow};

/// Tolerance for the sampled TAN inequality.
pub const DEFECT_TOL: f64 = 1e-9;
/// Default truncation dimension for the sequence-space examples.
pub const DEFAULT_L2_DIM: usize = 8;

const CONSTRUCTION_PAIRS: usize = 200;
const CONSTRUCTION_POWERS: usize = 10;
const CONSTRUCTION_SEED: u64 = 0x7a4;

#[derive(Debug, Clone, PartialEq)]
pub enum MappingKind {
    Identity,
    /// `x -> sin x` on a subset of the real line.
    SinMap,
    /// `x -> k x sin(1/x)`, with value 0 at 0.
    XSinInv {
        k: f64,
    },
    /// `x -> (0, 4 x_2, 0, 0, ...)` on a truncation of the sequence space.
    ShiftScale4,
    /// `x -> (0, x_1^2, a_2 x_2, ..., a_{d-1} x_{d-1})`; `coefficients[i]`
    /// holds `a_{i+2}`.
    GoebelKirkTruncated {
        coefficients: Vec<f64>,
    },
    /// `x -> factor * x`
    AffineContraction {
        factor: f64,
    },
    ConstantMap {
        value: SpacePoint,
    },
    /// Planar rotation about the origin.
    Rotation {
        angle: f64,
    },
    /// Parts applied first to last.
    UserComposition(Vec<TanMapping>),
}

impl MappingKind {
    pub fn name(&self) -> &'static str {
        match self {
            MappingKind::Identity => "identity",
            MappingKind::SinMap => "sin_map",
            MappingKind::XSinInv { .. } => "xsin_inv",
            MappingKind::ShiftScale4 => "shift_scale4",
            MappingKind::GoebelKirkTruncated { .. } => "goebel_kirk_truncated",
            MappingKind::AffineContraction { .. } => "affine_contraction",
            MappingKind::ConstantMap { .. } => "constant_map",
            MappingKind::Rotation { .. } => "rotation",
            MappingKind::UserComposition(_) => "user_composition",
        }
    }

    /// Kinds whose n-th power is evaluated in closed form.
    pub fn has_closed_form_power(&self) -> bool {
        matches!(
            self,
            MappingKind::Identity
                | MappingKind::ShiftScale4
                | MappingKind::AffineContraction { .. }
                | MappingKind::ConstantMap { .. }
                | MappingKind::Rotation { .. }
        )
    }

    /// Constants shipped with the builtin kinds on a given domain: zero for
    /// the nonexpansive maps, `phi_n = 2 R k^n` for `xsin_inv` on a domain
    /// within `[-R, R]`, the analytic Lipschitz excess for the truncated
    /// shift. Compositions default to zero when every part is
    /// nonexpansive.
    pub fn default_sequences(&self, space: &GeodesicSpace) -> Result<TanSequences> {
        Ok(match self {
            MappingKind::XSinInv { k } => TanSequences {
                phi: SeqSpec::Geometric {
                    scale: 2.0 * domain_half_width(space.domain())?,
                    ratio: *k,
                },
                ..TanSequences::zero()
            },
            MappingKind::GoebelKirkTruncated { coefficients } => TanSequences {
                k: goebel_kirk_k(coefficients),
                ..TanSequences::zero()
            },
            MappingKind::UserComposition(parts) => {
                if !parts.iter().all(|p| p.seq.is_nonexpansive()) {
                    return Err(config(
                        "composition of non-nonexpansive parts needs explicitly declared constants",
                    ));
                }
                TanSequences::zero()
            }
            _ => TanSequences::zero(),
        })
    }
}

/// Coefficients `a_j = 2^(-(1/2)^(j-1))`, `j = 2..dim-1`, whose infinite
/// product is 1/2.
pub fn goebel_kirk_default_coefficients(dim: usize) -> Vec<f64> {
    (2..dim).map(|j| 2f64.powf(-(0.5f64).powi(j as i32 - 1))).collect()
}

/// Lipschitz excess `k_n = 2 a_2 ... a_n - 1` of the truncated shift for
/// `n < dim`; the n-th power vanishes identically for `n >= dim`.
fn goebel_kirk_k(coefficients: &[f64]) -> SeqSpec {
    let dim = coefficients.len() + 2;
    let mut prod = 1.0;
    let mut table = Vec::with_capacity(dim - 1);
    for n in 1..dim {
        if n >= 2 {
            prod *= coefficients[n - 2];
        }
        table.push((2.0 * prod - 1.0).max(0.0));
    }
    SeqSpec::Tabulated(table)
}

/// A mapping together with its domain, declared constants and status.
#[derive(Debug, Clone, PartialEq)]
pub struct TanMapping {
    kind: MappingKind,
    space: GeodesicSpace,
    seq: TanSequences,
    self_map: bool,
    verified: bool,
}

impl TanMapping {
    /// Build a mapping on `space` (whose domain set is the mapping's `K`).
    ///
    /// Unless `unverified` is set, the constructor samples the domain and
    /// rejects declared constants that violate the TAN inequality and self
    /// maps that leave `K`.
    pub fn new(
        kind: MappingKind,
        space: GeodesicSpace,
        seq: TanSequences,
        self_map: bool,
        unverified: bool,
    ) -> Result<Self> {
        seq.validate()?;
        check_kind(&kind, &space)?;
        let mapping = Self {
            kind,
            space,
            seq,
            self_map,
            verified: !unverified,
        };
        if !unverified {
            mapping.construction_check()?;
        }
        Ok(mapping)
    }

    fn construction_check(&self) -> Result<()> {
        let k = self.space.domain();
        for i in 0..CONSTRUCTION_PAIRS {
            let mut rng = stream(CONSTRUCTION_SEED, i as u64);
            let x = self.space.sample(&mut rng)?;
            let y = self.space.sample(&mut rng)?;
            if self.self_map {
                let tx = self.apply(&x)?;
                if !k.contains(&tx)? {
                    return Err(config(format!(
                        "{} is declared a self map but sends {x} to {tx}, outside {}",
                        self.kind.name(),
                        k.kind_name()
                    )));
                }
            }
            for n in 1..=CONSTRUCTION_POWERS {
                let defect = self.tan_defect(&x, &y, n)?;
                if defect > DEFECT_TOL {
                    return Err(config(format!(
                        "declared constants of {} violate the TAN inequality: defect {defect:e} at n={n}, x={x}, y={y}",
                        self.kind.name()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn identity(space: GeodesicSpace) -> Result<Self> {
        Self::new(MappingKind::Identity, space, TanSequences::zero(), true, false)
    }

    /// `sin` on `[0, pi]`, the largest interval `[0, c]` that sin maps into
    /// itself.
    pub fn sin_map() -> Result<Self> {
        let space = GeodesicSpace::euclidean(1)?.with_domain(ConvexSet::interval(0.0, PI)?)?;
        Self::sin_map_on(space)
    }

    pub fn sin_map_on(space: GeodesicSpace) -> Result<Self> {
        Self::new(MappingKind::SinMap, space, TanSequences::zero(), true, false)
    }

    /// `k x sin(1/x)` on `[-1/pi, 1/pi]`.
    pub fn xsin_inv(k: f64) -> Result<Self> {
        let space = GeodesicSpace::euclidean(1)?.with_domain(ConvexSet::interval(-1.0 / PI, 1.0 / PI)?)?;
        Self::xsin_inv_on(k, space)
    }

    /// The map is not Lipschitz near 0 but `|T^n x| <= k^n |x|`, so on a
    /// domain within `[-R, R]` the constants `k_n = 0`, `phi_n = 2 R k^n`
    /// satisfy the TAN inequality.
    pub fn xsin_inv_on(k: f64, space: GeodesicSpace) -> Result<Self> {
        let kind = MappingKind::XSinInv { k };
        let seq = kind.default_sequences(&space)?;
        Self::new(kind, space, seq, true, false)
    }

    /// The literal shift-and-scale example on the unit ball of `R^dim`,
    /// shipped unverified with zero constants.
    pub fn shift_scale4(dim: usize) -> Result<Self> {
        let space = GeodesicSpace::euclidean(dim)?.with_domain(ConvexSet::closed_ball(vec![0.0; dim], 1.0)?)?;
        Self::new(MappingKind::ShiftScale4, space, TanSequences::zero(), true, true)
    }

    /// Truncated shift with squared first coordinate on the unit ball of
    /// `R^dim`, coefficients from [`goebel_kirk_default_coefficients`].
    pub fn goebel_kirk(dim: usize) -> Result<Self> {
        Self::goebel_kirk_with(goebel_kirk_default_coefficients(dim))
    }

    pub fn goebel_kirk_with(coefficients: Vec<f64>) -> Result<Self> {
        let dim = coefficients.len() + 2;
        let space = GeodesicSpace::euclidean(dim)?.with_domain(ConvexSet::closed_ball(vec![0.0; dim], 1.0)?)?;
        let kind = MappingKind::GoebelKirkTruncated { coefficients };
        let seq = kind.default_sequences(&space)?;
        Self::new(kind, space, seq, true, false)
    }

    pub fn affine_contraction(space: GeodesicSpace, factor: f64) -> Result<Self> {
        Self::new(
            MappingKind::AffineContraction { factor },
            space,
            TanSequences::zero(),
            true,
            false,
        )
    }

    pub fn constant(space: GeodesicSpace, value: SpacePoint) -> Result<Self> {
        Self::new(
            MappingKind::ConstantMap { value },
            space,
            TanSequences::zero(),
            true,
            false,
        )
    }

    pub fn rotation(space: GeodesicSpace, angle: f64) -> Result<Self> {
        Self::new(
            MappingKind::Rotation { angle },
            space,
            TanSequences::zero(),
            true,
            false,
        )
    }

    /// Same kind and space with different declared constants; re-verified
    /// unless the mapping was unverified.
    pub fn with_sequences(self, seq: TanSequences) -> Result<Self> {
        let unverified = !self.verified;
        Self::new(self.kind, self.space, seq, self.self_map, unverified)
    }

    /// Same mapping treated as a non-self map `K -> X`.
    pub fn into_nonself(self) -> Result<Self> {
        let unverified = !self.verified;
        Self::new(self.kind, self.space, self.seq, false, unverified)
    }

    /// Same mapping restricted to (or extended to) another domain set.
    pub fn on_domain(self, set: ConvexSet) -> Result<Self> {
        let unverified = !self.verified;
        let space = self.space.with_domain(set)?;
        let seq = match &self.kind {
            MappingKind::XSinInv { .. } => self.kind.default_sequences(&space)?,
            _ => self.seq,
        };
        Self::new(self.kind, space, seq, self.self_map, unverified)
    }

    pub fn kind(&self) -> &MappingKind {
        &self.kind
    }

    pub fn space(&self) -> &GeodesicSpace {
        &self.space
    }

    pub fn domain(&self) -> &ConvexSet {
        self.space.domain()
    }

    pub fn sequences(&self) -> &TanSequences {
        &self.seq
    }

    pub fn is_self_map(&self) -> bool {
        self.self_map
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// A fixed point known in closed form, when the kind has one.
    pub fn declared_fixed_point(&self) -> Option<SpacePoint> {
        match &self.kind {
            MappingKind::ConstantMap { value } => Some(value.clone()),
            MappingKind::UserComposition(_) => None,
            _ => match self.space.kind() {
                SpaceKind::Euclidean { dim } => Some(SpacePoint::Euclidean(vec![0.0; dim])),
                SpaceKind::PoincareDisk => Some(SpacePoint::Disk([0.0, 0.0])),
                SpaceKind::StarTree { .. } => Some(SpacePoint::root()),
            },
        }
    }

    fn require_in_domain(&self, x: &SpacePoint) -> Result<()> {
        if !self.space.in_domain(x)? {
            return Err(domain(format!(
                "{x} is outside the domain {} of {}",
                self.domain().kind_name(),
                self.kind.name()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        self.require_in_domain(x)?;
        self.apply_unchecked(x)
    }

    fn apply_unchecked(&self, x: &SpacePoint) -> Result<SpacePoint> {
        Ok(match (&self.kind, x) {
            (MappingKind::Identity, _) => x.clone(),
            (MappingKind::ConstantMap { value }, _) => value.clone(),
            (MappingKind::UserComposition(parts), _) => {
                let mut z = x.clone();
                for part in parts {
                    z = part.apply(&z)?;
                }
                z
            }
            (kind, SpacePoint::Euclidean(c)) => SpacePoint::Euclidean(match kind {
                MappingKind::SinMap => vec![c[0].sin()],
                MappingKind::XSinInv { k } => vec![xsin_inv(*k, c[0])],
                MappingKind::ShiftScale4 => shift_scale(c, 4.0),
                MappingKind::GoebelKirkTruncated { coefficients } => {
                    let mut out = vec![0.0; c.len()];
                    out[1] = c[0] * c[0];
                    for j in 2..c.len() {
                        out[j] = coefficients[j - 2] * c[j - 1];
                    }
                    out
                }
                MappingKind::AffineContraction { factor } => c.iter().map(|v| factor * v).collect(),
                MappingKind::Rotation { angle } => rotate(c, *angle),
                _ => unreachable!("kind/space pairing checked at construction"),
            }),
            _ => unreachable!("kind/space pairing checked at construction"),
        })
    }

    /// `T^n x`. Closed-form kinds are evaluated directly; otherwise the map
    /// is applied `n` times and every intermediate point must stay in `K`.
    pub fn apply_power_self(&self, n: usize, x: &SpacePoint) -> Result<SpacePoint> {
        require_power(n)?;
        self.require_in_domain(x)?;
        if let Some(p) = self.closed_form_power(n, x) {
            return Ok(p);
        }
        let mut z = self.apply_unchecked(x)?;
        for _ in 1..n {
            z = self.apply(&z)?;
        }
        Ok(z)
    }

    fn closed_form_power(&self, n: usize, x: &SpacePoint) -> Option<SpacePoint> {
        match (&self.kind, x) {
            (MappingKind::Identity, _) => Some(x.clone()),
            (MappingKind::ConstantMap { value }, _) => Some(value.clone()),
            (MappingKind::AffineContraction { factor }, SpacePoint::Euclidean(c)) => {
                let f = factor.powi(n.min(i32::MAX as usize) as i32);
                Some(SpacePoint::Euclidean(c.iter().map(|v| f * v).collect()))
            }
            (MappingKind::ShiftScale4, SpacePoint::Euclidean(c)) => Some(SpacePoint::Euclidean(shift_scale(
                c,
                4f64.powi(n.min(i32::MAX as usize) as i32),
            ))),
            (MappingKind::Rotation { angle }, SpacePoint::Euclidean(c)) => {
                Some(SpacePoint::Euclidean(rotate(c, n as f64 * angle)))
            }
            _ => None,
        }
    }

    /// `T (P T)^(n-1) x` with `P` the retraction onto `retraction`.
    pub fn apply_power_nonself(&self, retraction: &ConvexSet, n: usize, x: &SpacePoint) -> Result<SpacePoint> {
        require_power(n)?;
        self.space.check_set(retraction)?;
        let mut z = self.apply(x)?;
        for _ in 1..n {
            let pz = retraction.project(&z)?;
            z = self.apply(&pz)?;
        }
        Ok(z)
    }

    /// The appropriate n-th power: `T^n` for self maps, `T (P T)^(n-1)` with
    /// `P` the retraction onto the mapping's domain otherwise.
    pub fn power(&self, n: usize, x: &SpacePoint) -> Result<SpacePoint> {
        if self.self_map {
            self.apply_power_self(n, x)
        } else {
            self.apply_power_nonself(self.space.domain(), n, x)
        }
    }

    /// `d(T^n x, T^n y) - d(x, y) - k_n xi(d(x, y)) - phi_n`; nonpositive
    /// exactly when the TAN inequality holds at `(x, y, n)`.
    pub fn tan_defect(&self, x: &SpacePoint, y: &SpacePoint, n: usize) -> Result<f64> {
        let tx = self.power(n, x)?;
        let ty = self.power(n, y)?;
        let d = self.space.dist(x, y)?;
        Ok(self.space.dist(&tx, &ty)? - d - self.seq.allowance(n, d))
    }
}

/// Composition `parts[last] o ... o parts[0]`. All parts must share one
/// space; the composite's domain is the first part's. Without explicit
/// constants, a composition of nonexpansive parts is declared nonexpansive.
pub fn compose(
    parts: Vec<TanMapping>,
    seq: Option<TanSequences>,
    self_map: bool,
    unverified: bool,
) -> Result<TanMapping> {
    let first = parts
        .first()
        .ok_or_else(|| config("composition needs at least one part"))?;
    let space = first.space.clone();
    for p in &parts {
        if p.space.kind() != space.kind() {
            return Err(config("composition parts live on different spaces"));
        }
    }
    let kind = MappingKind::UserComposition(parts);
    let seq = match seq {
        Some(s) => s,
        None => kind.default_sequences(&space)?,
    };
    TanMapping::new(kind, space, seq, self_map, unverified)
}

fn require_power(n: usize) -> Result<()> {
    if n == 0 {
        return Err(config("power index n must be >= 1"));
    }
    Ok(())
}

fn domain_half_width(set: &ConvexSet) -> Result<f64> {
    match set {
        ConvexSet::IntervalBox { lower, upper } if set.is_bounded() => {
            Ok(lower.iter().chain(upper).fold(0.0f64, |m, b| m.max(b.abs())))
        }
        ConvexSet::ClosedBall { center, radius } => Ok(radius + center.iter().map(|c| c * c).sum::<f64>().sqrt()),
        _ => Err(config("xsin_inv needs a bounded interval domain")),
    }
}

/// `k x sin(1/x)`, extended by 0 where `1/x` overflows (`|T x| <= k |x|`
/// there anyway).
fn xsin_inv(k: f64, x: f64) -> f64 {
    let inv = 1.0 / x;
    if inv.is_finite() {
        k * x * inv.sin()
    } else {
        0.0
    }
}

fn shift_scale(c: &[f64], scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    out[1] = scale * c[1];
    out
}

fn rotate(c: &[f64], angle: f64) -> Vec<f64> {
    let (s, co) = angle.sin_cos();
    vec![co * c[0] - s * c[1], s * c[0] + co * c[1]]
}

fn check_kind(kind: &MappingKind, space: &GeodesicSpace) -> Result<()> {
    let dim = match space.kind() {
        SpaceKind::Euclidean { dim } => Some(dim),
        _ => None,
    };
    let bad = |what: &str| Err(config(format!("{} {what}", kind.name())));
    match kind {
        MappingKind::Identity => Ok(()),
        MappingKind::ConstantMap { value } => space.check_point(value),
        MappingKind::UserComposition(parts) => {
            if parts.is_empty() {
                bad("needs at least one part")
            } else {
                Ok(())
            }
        }
        MappingKind::SinMap if dim != Some(1) => bad("acts on the real line only"),
        MappingKind::XSinInv { k } => {
            if dim != Some(1) {
                bad("acts on the real line only")
            } else if !(*k > 0.0 && *k < 1.0) {
                bad("needs k in (0, 1)")
            } else {
                Ok(())
            }
        }
        MappingKind::ShiftScale4 if dim.is_none_or(|d| d < 2) => bad("needs a euclidean space of dimension >= 2"),
        MappingKind::GoebelKirkTruncated { coefficients } => {
            if dim != Some(coefficients.len() + 2) {
                bad("needs dimension equal to the coefficient count plus 2")
            } else if coefficients.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                bad("coefficients must lie in (0, 1)")
            } else {
                Ok(())
            }
        }
        MappingKind::AffineContraction { factor } => {
            if dim.is_none() {
                bad("needs a euclidean space")
            } else if !(factor.abs() < 1.0) {
                bad("needs |factor| < 1")
            } else {
                Ok(())
            }
        }
        MappingKind::Rotation { angle } => {
            if dim != Some(2) {
                bad("acts on the plane only")
            } else if !angle.is_finite() {
                bad("needs a finite angle")
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}
