//! The m-step averaged iteration for a finite family `T_1, ..., T_m`.
//!
//! At step `n` with weight `alpha_n` the chain is evaluated from the last
//! mapping to the first:
//!
//! ```text
//! y_(m-1) = W(x_n, T_m^n x_n,        alpha_n)
//! y_j     = W(x_n, T_(j+1)^n y_(j+1), alpha_n)    j = m-2, ..., 1
//! x_(n+1) = W(x_n, T_1^n y_1,        alpha_n)
//! ```
//!
//! with `W(x, y, t)` the point a fraction `t` of the way from `x` to `y`.
//! In non-self mode every `T_i^n` becomes `T_i (P T_i)^(n-1)` and every
//! `W` output is retracted onto `K`.

use crate::analysis::{dist_to_fixed_set, FixedSetDescriptor};
use crate::error::{config, Error, Result};
use crate::mappings::TanMapping;
use crate::rng::{stream, uniform};
use crate::space::{GeodesicSpace, SpacePoint};

/// Runs whose family needs iterated (not closed-form) powers cost `O(n^2)`
/// applications and are capped at this many steps unless explicitly allowed.
pub const GENERIC_POWER_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    Constant(f64),
    SeededUniform {
        seed: u64,
    },
    /// Values cycled with period `len`.
    Tabulated(Vec<f64>),
}

/// A weight sequence `alpha_n` contained in `[lower, upper]` with
/// `0 < lower <= upper < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    lower: f64,
    upper: f64,
}

fn check_bounds(lower: f64, upper: f64) -> Result<()> {
    if !(lower > 0.0 && lower <= upper && upper < 1.0) {
        return Err(config(format!(
            "schedule bounds [{lower}, {upper}] must satisfy 0 < lower <= upper < 1"
        )));
    }
    Ok(())
}

impl Schedule {
    pub fn constant(value: f64) -> Result<Self> {
        check_bounds(value, value)?;
        Ok(Self {
            kind: ScheduleKind::Constant(value),
            lower: value,
            upper: value,
        })
    }

    pub fn seeded_uniform(lower: f64, upper: f64, seed: u64) -> Result<Self> {
        check_bounds(lower, upper)?;
        Ok(Self {
            kind: ScheduleKind::SeededUniform { seed },
            lower,
            upper,
        })
    }

    /// Cycled table. Bounds default to the table's extremes.
    pub fn tabulated(values: Vec<f64>, bounds: Option<(f64, f64)>) -> Result<Self> {
        if values.is_empty() {
            return Err(config("tabulated schedule needs at least one value"));
        }
        let (lower, upper) = bounds.unwrap_or_else(|| {
            (
                values.iter().copied().fold(f64::INFINITY, f64::min),
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        });
        check_bounds(lower, upper)?;
        if let Some(v) = values.iter().find(|v| !(lower..=upper).contains(*v)) {
            return Err(config(format!("tabulated alpha {v} lies outside [{lower}, {upper}]")));
        }
        Ok(Self {
            kind: ScheduleKind::Tabulated(values),
            lower,
            upper,
        })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// `alpha_n` for `n >= 1`.
    pub fn alpha(&self, n: usize) -> f64 {
        match &self.kind {
            ScheduleKind::Constant(v) => *v,
            ScheduleKind::SeededUniform { seed } => {
                let mut rng = stream(*seed, n as u64);
                uniform(&mut rng, self.lower, self.upper).clamp(self.lower, self.upper)
            }
            ScheduleKind::Tabulated(values) => values[(n - 1) % values.len()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SelfMap,
    NonSelf,
}

/// Everything needed for one run. The domain set of `space` is `K`.
#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub space: GeodesicSpace,
    pub family: Vec<TanMapping>,
    pub mode: Mode,
    pub x1: SpacePoint,
    pub schedule: Schedule,
    pub n_max: usize,
    pub residual_tol: f64,
    pub reference: Option<SpacePoint>,
    pub fixed_set: Option<FixedSetDescriptor>,
    pub record_intermediates: bool,
    /// Lift [`GENERIC_POWER_CAP`].
    pub allow_long_runs: bool,
}

impl IterationConfig {
    /// Self-mode configuration with no reference, no fixed set and default
    /// flags.
    pub fn new(
        space: GeodesicSpace,
        family: Vec<TanMapping>,
        x1: SpacePoint,
        schedule: Schedule,
        n_max: usize,
        residual_tol: f64,
    ) -> Self {
        Self {
            space,
            family,
            mode: Mode::SelfMap,
            x1,
            schedule,
            n_max,
            residual_tol,
            reference: None,
            fixed_set: None,
            record_intermediates: false,
            allow_long_runs: false,
        }
    }

    pub fn m(&self) -> usize {
        self.family.len()
    }

    pub fn domain(&self) -> &crate::space::ConvexSet {
        self.space.domain()
    }

    pub fn validate(&self) -> Result<()> {
        if self.family.is_empty() {
            return Err(config("the mapping family must contain at least one mapping"));
        }
        if self.n_max < 1 {
            return Err(config("n_max must be >= 1"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(config(format!("residual_tol {} must be positive", self.residual_tol)));
        }
        if !self.space.in_domain(&self.x1)? {
            return Err(config(format!("x1 = {} is outside K", self.x1)));
        }
        for (i, t) in self.family.iter().enumerate() {
            if t.space().kind() != self.space.kind() {
                return Err(config(format!("mapping {} lives on a different space", i + 1)));
            }
            if self.mode == Mode::SelfMap && !t.is_self_map() {
                return Err(config(format!(
                    "mapping {} is not a self map; use non-self mode",
                    i + 1
                )));
            }
        }
        if !self.allow_long_runs
            && self.n_max > GENERIC_POWER_CAP
            && self.family.iter().any(|t| !t.kind().has_closed_form_power())
        {
            return Err(config(format!(
                "n_max {} exceeds {GENERIC_POWER_CAP} for a family without closed-form powers; allow long runs to override",
                self.n_max
            )));
        }
        if let Some(p) = &self.reference {
            self.space.check_point(p)?;
        }
        if let Some(f) = &self.fixed_set {
            f.validate(&self.space)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ResidualMet,
    NMaxReached,
}

impl StopReason {
    pub fn name(&self) -> &'static str {
        match self {
            StopReason::ResidualMet => "residual_met",
            StopReason::NMaxReached => "n_max_reached",
        }
    }
}

/// State recorded at step `n`: the iterate `x_n`, the weight `alpha_n` used
/// to leave it, residuals `d(x_n, T_i x_n)`, optional distances, and (when
/// requested) the intermediates `y_1 .. y_(m-1)` of step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub alpha: f64,
    pub x: SpacePoint,
    pub residuals: Vec<f64>,
    pub dist_p: Option<f64>,
    pub dist_f: Option<f64>,
    pub intermediates: Vec<SpacePoint>,
}

impl TraceRow {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub m: usize,
    pub rows: Vec<TraceRow>,
    pub stop_reason: StopReason,
}

impl Trace {
    pub fn points(&self) -> Vec<SpacePoint> {
        self.rows.iter().map(|r| r.x.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub next: SpacePoint,
    /// `y_1, ..., y_(m-1)`.
    pub intermediates: Vec<SpacePoint>,
}

fn escape(step: usize, mapping: usize, err: Error) -> Error {
    match err {
        Error::Domain(detail) => Error::Escape { step, mapping, detail },
        other => other,
    }
}

fn ensure_in_k(cfg: &IterationConfig, step: usize, mapping: usize, what: &str, p: &SpacePoint) -> Result<()> {
    let inside = cfg.space.in_domain(p).map_err(|e| escape(step, mapping, e))?;
    if !inside {
        return Err(Error::Escape {
            step,
            mapping,
            detail: format!("{what} {p} is outside K ({})", cfg.domain().kind_name()),
        });
    }
    Ok(())
}

fn chain(cfg: &IterationConfig, n: usize, x_n: &SpacePoint, nonself: bool) -> Result<StepOutput> {
    if n < 1 {
        return Err(config("step index n must be >= 1"));
    }
    ensure_in_k(cfg, n, 0, "x_n", x_n)?;
    let alpha = cfg.schedule.alpha(n);
    let k = cfg.domain();
    let m = cfg.m();
    let mut seed = x_n.clone();
    let mut ys = Vec::with_capacity(m.saturating_sub(1));
    for i in (0..m).rev() {
        let t = &cfg.family[i];
        let mapped = if nonself {
            t.apply_power_nonself(k, n, &seed)
        } else {
            t.apply_power_self(n, &seed)
        }
        .map_err(|e| escape(n, i + 1, e))?;
        if !nonself {
            ensure_in_k(cfg, n, i + 1, "mapped point", &mapped)?;
        }
        let mut w = cfg
            .space
            .combine(x_n, &mapped, alpha)
            .map_err(|e| escape(n, i + 1, e))?;
        if nonself {
            w = k.project(&w)?;
        }
        ensure_in_k(cfg, n, i + 1, if i > 0 { "intermediate" } else { "x_(n+1)" }, &w)?;
        if i > 0 {
            ys.push(w.clone());
        }
        seed = w;
    }
    ys.reverse();
    Ok(StepOutput {
        next: seed,
        intermediates: ys,
    })
}

/// One step of the self-map scheme.
pub fn step(config: &IterationConfig, n: usize, x_n: &SpacePoint) -> Result<StepOutput> {
    chain(config, n, x_n, false)
}

/// One step of the non-self scheme: powers `T_i (P T_i)^(n-1)`, every
/// combination retracted onto `K`. The chain is seeded with `x_n`.
pub fn step_nonself(config: &IterationConfig, n: usize, x_n: &SpacePoint) -> Result<StepOutput> {
    chain(config, n, x_n, true)
}

/// `d(x, T_i x)` for each mapping.
pub fn residuals(config: &IterationConfig, n: usize, x: &SpacePoint) -> Result<Vec<f64>> {
    config
        .family
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let tx = t.apply(x).map_err(|e| escape(n, i + 1, e))?;
            config.space.dist(x, &tx)
        })
        .collect()
}

/// Iterate from `x1` until `max_i d(x_n, T_i x_n) < residual_tol` or
/// `n = n_max`.
pub fn run(config: &IterationConfig) -> Result<Trace> {
    config.validate()?;
    let nonself = config.mode == Mode::NonSelf;
    let mut rows = Vec::new();
    let mut x = config.x1.clone();
    let mut n = 1;
    loop {
        let res = residuals(config, n, &x)?;
        let dist_p = match &config.reference {
            Some(p) => Some(config.space.dist(&x, p)?),
            None => None,
        };
        let dist_f = match &config.fixed_set {
            Some(f) => Some(dist_to_fixed_set(&config.space, &x, f)?),
            None => None,
        };
        let max_res = res.iter().copied().fold(0.0, f64::max);
        let stop = if max_res < config.residual_tol {
            Some(StopReason::ResidualMet)
        } else if n >= config.n_max {
            Some(StopReason::NMaxReached)
        } else {
            None
        };
        let (next, intermediates) = match stop {
            Some(_) => (None, Vec::new()),
            None => {
                let out = chain(config, n, &x, nonself)?;
                (Some(out.next), out.intermediates)
            }
        };
        rows.push(TraceRow {
            n,
            alpha: config.schedule.alpha(n),
            x,
            residuals: res,
            dist_p,
            dist_f,
            intermediates: if config.record_intermediates {
                intermediates
            } else {
                Vec::new()
            },
        });
        match (stop, next) {
            (Some(reason), _) => {
                return Ok(Trace {
                    m: config.m(),
                    rows,
                    stop_reason: reason,
                })
            }
            (None, Some(next)) => {
                x = next;
                n += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}
