//! Experiment configuration.
//!
//! Configs are TOML documents written with dotted keys, one setting per line:
//!
//! ```toml
//! space.kind = "euclidean"
//! space.dimension = 1
//! mapping.1.kind = "sin_map"
//! schedule.kind = "constant"
//! schedule.value = 0.5
//! run.x1 = [1.0]
//! ```
//!
//! Tables are flattened to their dotted paths before interpretation, so
//! `[mapping.1]` sections are accepted too. Every key is checked against
//! [`documented_keys`] before anything is built.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use tanfix_core::analysis::{default_subsequences, AnalysisOptions, FixedSetDescriptor, SearchOpts, TailSpec};
use tanfix_core::iteration::{IterationConfig, Mode, Schedule};
use tanfix_core::mappings::{goebel_kirk_default_coefficients, MappingKind, SeqSpec, TanMapping, TanSequences, XiSpec};
use tanfix_core::{ConvexSet, GeodesicSpace, SpaceKind, SpacePoint};
use toml::Value;

use crate::error::{bad, CliError, Result};

/// Top-level keys.
pub const TOP_LEVEL_KEYS: &[&str] = &[
    "space.kind",
    "space.dimension",
    "space.branches",
    "domain.kind",
    "domain.lower",
    "domain.upper",
    "domain.center",
    "domain.radius",
    "schedule.kind",
    "schedule.value",
    "schedule.lower",
    "schedule.upper",
    "schedule.seed",
    "schedule.values",
    "run.mode",
    "run.x1",
    "run.n_max",
    "run.residual_tol",
    "run.allow_long",
    "run.reference",
    "fixed_set.kind",
    "fixed_set.point",
    "fixed_set.points",
    "fixed_set.lower",
    "fixed_set.upper",
    "analysis.window",
    "analysis.subsequences",
    "analysis.delta_tol",
    "analysis.strong_tol",
    "analysis.search_tol",
    "analysis.max_evals",
    "analysis.fejer_a",
    "output.trace",
    "output.summary",
    "output.report",
    "verify.samples",
    "verify.seed",
    "verify.n_max",
    "verify.pairs",
];

/// Keys below `mapping.<i>.` (the i-th family member, from 1) and, except
/// `parts`, below `part.<name>.` (a named building block of a composition).
pub const MAPPING_FIELDS: &[&str] = &[
    "kind",
    "factor",
    "coefficient",
    "coefficients",
    "value",
    "angle",
    "parts",
    "self_map",
    "unverified",
    "domain.kind",
    "domain.lower",
    "domain.upper",
    "domain.center",
    "domain.radius",
    "k.kind",
    "k.scale",
    "k.ratio",
    "k.exponent",
    "k.values",
    "phi.kind",
    "phi.scale",
    "phi.ratio",
    "phi.exponent",
    "phi.values",
    "xi.kind",
    "xi.slope",
    "xi.knee",
    "xi.tail_slope",
    "xi.points",
    "M",
    "M_star",
];

/// Every accepted key, with `<i>` and `<name>` placeholders.
pub fn documented_keys() -> Vec<String> {
    let mut keys: Vec<String> = TOP_LEVEL_KEYS.iter().map(|k| k.to_string()).collect();
    keys.extend(MAPPING_FIELDS.iter().map(|f| format!("mapping.<i>.{f}")));
    keys.extend(
        MAPPING_FIELDS
            .iter()
            .filter(|f| **f != "parts")
            .map(|f| format!("part.<name>.{f}")),
    );
    keys
}

/// The documented pattern a concrete key instantiates.
pub fn key_pattern(key: &str) -> Option<String> {
    if TOP_LEVEL_KEYS.contains(&key) {
        return Some(key.to_string());
    }
    let (head, rest) = key.split_once('.')?;
    let (id, field) = rest.split_once('.')?;
    if !MAPPING_FIELDS.contains(&field) || id.is_empty() {
        return None;
    }
    match head {
        "mapping" if id.parse::<usize>().is_ok_and(|i| i >= 1) => Some(format!("mapping.<i>.{field}")),
        "part" if field != "parts" => Some(format!("part.<name>.{field}")),
        _ => None,
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trace_intermediates: bool,
    pub out: Option<PathBuf>,
}

/// Flattened key/value view of a config file.
#[derive(Debug, Clone)]
pub struct RawConfig {
    values: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        if let Some(k) = values.keys().find(|k| key_pattern(k).is_none()) {
            return Err(bad(k, "unknown key"));
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.values.keys()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        let p = format!("{prefix}.");
        self.values.keys().any(|k| k.starts_with(&p))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => as_f64(v).map(Some).ok_or_else(|| bad(key, "expected a number")),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn req_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| bad(key, "required"))
    }

    fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(bad(key, "expected an integer")),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.int(key)? {
            None => Ok(None),
            Some(i) => usize::try_from(i)
                .map(Some)
                .map_err(|_| bad(key, "must be nonnegative")),
        }
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.int(key)? {
            None => Ok(None),
            Some(i) => u64::try_from(i).map(Some).map_err(|_| bad(key, "must be nonnegative")),
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(bad(key, "expected true or false")),
        }
    }

    fn str(&self, key: &str) -> Result<Option<&str>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(bad(key, "expected a string")),
        }
    }

    fn req_str(&self, key: &str) -> Result<&str> {
        self.str(key)?.ok_or_else(|| bad(key, "required"))
    }

    /// A number list; a bare number counts as a one-element list.
    fn f64s(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => numbers(v)
                .map(Some)
                .ok_or_else(|| bad(key, "expected a number or a list of numbers")),
        }
    }

    fn req_f64s(&self, key: &str) -> Result<Vec<f64>> {
        self.f64s(key)?.ok_or_else(|| bad(key, "required"))
    }

    /// A list of number lists.
    fn nested(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Array(_) => numbers(v),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| bad(key, "expected a list of number lists")),
            Some(_) => Err(bad(key, "expected a list of number lists")),
        }
    }

    fn strings(&self, key: &str) -> Result<Option<Vec<String>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| bad(key, "expected a list of strings")),
            Some(_) => Err(bad(key, "expected a list of strings")),
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn numbers(v: &Value) -> Option<Vec<f64>> {
    match v {
        Value::Array(items) => items.iter().map(as_f64).collect(),
        other => as_f64(other).map(|x| vec![x]),
    }
}

/// Output file locations.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub report: PathBuf,
}

/// Sampling parameters of the `verify` commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOpts {
    pub samples: usize,
    pub seed: u64,
    pub n_max: usize,
    pub pairs: usize,
}

/// A parsed config plus command-line overrides.
#[derive(Debug, Clone)]
pub struct Experiment {
    raw: RawConfig,
    overrides: Overrides,
    space: GeodesicSpace,
}

impl Experiment {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self> {
        Self::from_raw(RawConfig::load(path)?, overrides)
    }

    pub fn parse(text: &str, overrides: Overrides) -> Result<Self> {
        Self::from_raw(RawConfig::parse(text)?, overrides)
    }

    fn from_raw(raw: RawConfig, overrides: Overrides) -> Result<Self> {
        let base = build_space(&raw)?;
        let domain = build_set(&raw, "domain", &base)?;
        let space = base.with_domain(domain).map_err(|e| CliError::at("domain.kind", e))?;
        Ok(Self { raw, overrides, space })
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }

    /// The ambient space with `K` as its domain set.
    pub fn space(&self) -> &GeodesicSpace {
        &self.space
    }

    /// The mapping family `mapping.1 .. mapping.m`. With `force_unverified`
    /// the constructors skip their sampled checks, which `verify mapping`
    /// performs and reports itself.
    pub fn family(&self, force_unverified: bool) -> Result<Vec<TanMapping>> {
        let mut ids = BTreeSet::new();
        for k in self.raw.keys() {
            if let Some(rest) = k.strip_prefix("mapping.") {
                let id = rest.split('.').next().unwrap_or_default();
                ids.insert(id.parse::<usize>().expect("validated key"));
            }
        }
        if ids.is_empty() {
            return Err(bad("mapping.1.kind", "at least one mapping is required"));
        }
        let m = *ids.last().expect("nonempty");
        if let Some(missing) = (1..=m).find(|i| !ids.contains(i)) {
            return Err(bad(
                &format!("mapping.{missing}.kind"),
                "mapping indices must run 1..m without gaps",
            ));
        }
        (1..=m)
            .map(|i| self.mapping(&format!("mapping.{i}"), force_unverified, true))
            .collect()
    }

    fn mapping(&self, prefix: &str, force_unverified: bool, allow_parts: bool) -> Result<TanMapping> {
        let raw = &self.raw;
        let key = |f: &str| format!("{prefix}.{f}");
        let kind_name = raw.req_str(&key("kind"))?;
        let run_space = self.space.clone();
        let dim = match self.space.kind() {
            SpaceKind::Euclidean { dim } => Some(dim),
            _ => None,
        };
        let ball = |d: usize| {
            GeodesicSpace::euclidean(d)
                .and_then(|s| s.with_domain(ConvexSet::closed_ball(vec![0.0; d], 1.0)?))
                .map_err(|e| CliError::at(&key("kind"), e))
        };
        let interval = |lo: f64, hi: f64| {
            GeodesicSpace::euclidean(1)
                .and_then(|s| s.with_domain(ConvexSet::interval(lo, hi)?))
                .map_err(|e| CliError::at(&key("kind"), e))
        };
        let need_dim = || dim.ok_or_else(|| bad(&key("kind"), format!("{kind_name} needs a euclidean space")));

        let (kind, default_space, default_unverified) = match kind_name {
            "identity" => (MappingKind::Identity, run_space, false),
            "sin_map" => (MappingKind::SinMap, interval(0.0, PI)?, false),
            "xsin_inv" => (
                MappingKind::XSinInv {
                    k: raw.req_f64(&key("coefficient"))?,
                },
                interval(-1.0 / PI, 1.0 / PI)?,
                false,
            ),
            "shift_scale4" => (MappingKind::ShiftScale4, ball(need_dim()?)?, true),
            "goebel_kirk_truncated" => {
                let d = need_dim()?;
                let coefficients = match raw.f64s(&key("coefficients"))? {
                    Some(c) => c,
                    None => goebel_kirk_default_coefficients(d),
                };
                if coefficients.len() + 2 != d {
                    return Err(bad(
                        &key("coefficients"),
                        format!("expected {} coefficients for dimension {d}", d.saturating_sub(2)),
                    ));
                }
                (MappingKind::GoebelKirkTruncated { coefficients }, ball(d)?, false)
            }
            "affine_contraction" => (
                MappingKind::AffineContraction {
                    factor: raw.req_f64(&key("factor"))?,
                },
                run_space,
                false,
            ),
            "constant_map" => {
                let value = point(raw, &key("value"), &self.space)?.ok_or_else(|| bad(&key("value"), "required"))?;
                (MappingKind::ConstantMap { value }, run_space, false)
            }
            "rotation" => (
                MappingKind::Rotation {
                    angle: raw.req_f64(&key("angle"))?,
                },
                run_space,
                false,
            ),
            "user_composition" => {
                if !allow_parts {
                    return Err(bad(&key("kind"), "parts cannot themselves be compositions"));
                }
                let names = raw
                    .strings(&key("parts"))?
                    .ok_or_else(|| bad(&key("parts"), "required"))?;
                if names.is_empty() {
                    return Err(bad(&key("parts"), "needs at least one part"));
                }
                let parts = names
                    .iter()
                    .map(|n| {
                        let p = format!("part.{n}");
                        if !raw.contains(&format!("{p}.kind")) {
                            return Err(bad(&key("parts"), format!("part `{n}` is not defined")));
                        }
                        self.mapping(&p, force_unverified, false)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let space = parts[0].space().clone();
                if parts.iter().any(|p| p.space().kind() != space.kind()) {
                    return Err(bad(&key("parts"), "parts live on different spaces"));
                }
                (MappingKind::UserComposition(parts), space, false)
            }
            other => return Err(bad(&key("kind"), format!("unknown mapping kind `{other}`"))),
        };
        let space = if raw.has_prefix(&key("domain")) {
            let set = build_set(raw, &key("domain"), &self.space)?;
            default_space
                .with_domain(set)
                .map_err(|e| CliError::at(&key("domain.kind"), e))?
        } else {
            default_space
        };
        // Compositions without builtin constants take whatever the
        // configuration declares, with zero for the rest.
        let declared = ["k", "phi", "xi", "M", "M_star"]
            .iter()
            .any(|f| raw.contains(&key(f)) || raw.has_prefix(&key(f)));
        let defaults = match kind.default_sequences(&space) {
            Ok(d) => d,
            Err(_) if declared => TanSequences::zero(),
            Err(e) => return Err(CliError::at(&key("kind"), e)),
        };
        let seq = sequences(raw, prefix, defaults)?;
        let self_map = raw.bool(&key("self_map"))?.unwrap_or(true);
        let unverified = force_unverified || raw.bool(&key("unverified"))?.unwrap_or(default_unverified);
        TanMapping::new(kind, space, seq, self_map, unverified).map_err(|e| CliError::at(&key("kind"), e))
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let raw = &self.raw;
        let at = |e| CliError::at("schedule.kind", e);
        let bounds = match (raw.f64("schedule.lower")?, raw.f64("schedule.upper")?) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            (Some(_), None) => return Err(bad("schedule.upper", "required with schedule.lower")),
            (None, Some(_)) => return Err(bad("schedule.lower", "required with schedule.upper")),
        };
        match raw.req_str("schedule.kind")? {
            "constant" => {
                let v = raw.req_f64("schedule.value")?;
                let s = Schedule::constant(v).map_err(|e| CliError::at("schedule.value", e))?;
                if let Some((lo, hi)) = bounds {
                    Schedule::tabulated(vec![v], Some((lo, hi))).map_err(|e| CliError::at("schedule.lower", e))?;
                }
                Ok(s)
            }
            "seeded_uniform" => {
                let (lo, hi) = bounds.ok_or_else(|| bad("schedule.lower", "required for seeded_uniform"))?;
                let seed = match self.overrides.seed {
                    Some(s) => s,
                    None => raw
                        .u64("schedule.seed")?
                        .ok_or_else(|| bad("schedule.seed", "required"))?,
                };
                Schedule::seeded_uniform(lo, hi, seed).map_err(|e| CliError::at("schedule.lower", e))
            }
            "tabulated" => {
                let values = raw.req_f64s("schedule.values")?;
                Schedule::tabulated(values, bounds).map_err(|e| CliError::at("schedule.values", e))
            }
            other => Err(at(tanfix_core::Error::Config(format!(
                "unknown schedule kind `{other}`"
            )))),
        }
    }

    pub fn fixed_set(&self) -> Result<Option<FixedSetDescriptor>> {
        let raw = &self.raw;
        let Some(kind) = raw.str("fixed_set.kind")? else {
            if raw.has_prefix("fixed_set") {
                return Err(bad("fixed_set.kind", "required when other fixed_set keys are present"));
            }
            return Ok(None);
        };
        let f = match kind {
            "single_point" => FixedSetDescriptor::SinglePoint(
                point(raw, "fixed_set.point", &self.space)?.ok_or_else(|| bad("fixed_set.point", "required"))?,
            ),
            "finite_list" => {
                let rows = raw
                    .nested("fixed_set.points")?
                    .ok_or_else(|| bad("fixed_set.points", "required"))?;
                FixedSetDescriptor::FiniteList(
                    rows.iter()
                        .map(|r| point_from(r, &self.space).map_err(|e| CliError::at("fixed_set.points", e)))
                        .collect::<Result<_>>()?,
                )
            }
            "interval_box" => FixedSetDescriptor::IntervalBox {
                lower: raw.req_f64s("fixed_set.lower")?,
                upper: raw.req_f64s("fixed_set.upper")?,
            },
            other => return Err(bad("fixed_set.kind", format!("unknown fixed set kind `{other}`"))),
        };
        f.validate(&self.space).map_err(|e| CliError::at("fixed_set.kind", e))?;
        Ok(Some(f))
    }

    pub fn iteration(&self) -> Result<IterationConfig> {
        let raw = &self.raw;
        let family = self.family(false)?;
        let x1 = point(raw, "run.x1", &self.space)?.ok_or_else(|| bad("run.x1", "required"))?;
        let n_max = raw.usize("run.n_max")?.ok_or_else(|| bad("run.n_max", "required"))?;
        let residual_tol = raw.f64_or("run.residual_tol", 1e-12)?;
        let mut cfg = IterationConfig::new(self.space.clone(), family, x1, self.schedule()?, n_max, residual_tol);
        cfg.mode = match raw.str("run.mode")?.unwrap_or("self") {
            "self" => Mode::SelfMap,
            "nonself" => Mode::NonSelf,
            other => return Err(bad("run.mode", format!("expected `self` or `nonself`, got `{other}`"))),
        };
        cfg.reference = point(raw, "run.reference", &self.space)?;
        cfg.fixed_set = self.fixed_set()?;
        cfg.allow_long_runs = raw.bool("run.allow_long")?.unwrap_or(false);
        cfg.record_intermediates = self.overrides.trace_intermediates;
        cfg.validate().map_err(|e| {
            let key = match &e {
                tanfix_core::Error::Config(m) if m.contains("n_max") => "run.n_max",
                tanfix_core::Error::Config(m) if m.contains("residual_tol") => "run.residual_tol",
                tanfix_core::Error::Config(m) if m.contains("self map") => "run.mode",
                tanfix_core::Error::Config(m) if m.contains("x1") => "run.x1",
                _ => "run",
            };
            CliError::at(key, e)
        })?;
        Ok(cfg)
    }

    pub fn analysis(&self) -> Result<AnalysisOptions> {
        let raw = &self.raw;
        let window = raw.usize("analysis.window")?;
        if window == Some(0) {
            return Err(bad("analysis.window", "must be >= 1"));
        }
        let subsequences = match raw.nested("analysis.subsequences")? {
            None => default_subsequences()
                .into_iter()
                .map(|t| TailSpec { window, ..t })
                .collect(),
            Some(rows) => rows
                .iter()
                .map(|r| match r.as_slice() {
                    [offset, stride]
                        if *offset >= 0.0 && *stride >= 1.0 && offset.fract() == 0.0 && stride.fract() == 0.0 =>
                    {
                        Ok(TailSpec::subsequence(*offset as usize, *stride as usize, window))
                    }
                    _ => Err(bad(
                        "analysis.subsequences",
                        "each entry must be [offset, stride] with stride >= 1",
                    )),
                })
                .collect::<Result<Vec<_>>>()?,
        };
        if subsequences.len() < 2 {
            return Err(bad("analysis.subsequences", "at least two subsequences are needed"));
        }
        let positive = |key: &str, v: f64| {
            if v > 0.0 {
                Ok(v)
            } else {
                Err(bad(key, "must be positive"))
            }
        };
        let d = AnalysisOptions::default();
        let fejer_a = match raw.f64("analysis.fejer_a")? {
            Some(a) => Some(positive("analysis.fejer_a", a)?),
            None => None,
        };
        let max_evals = raw.usize("analysis.max_evals")?.unwrap_or(d.search.max_evals);
        if max_evals == 0 {
            return Err(bad("analysis.max_evals", "must be >= 1"));
        }
        Ok(AnalysisOptions {
            subsequences,
            delta_tol: positive("analysis.delta_tol", raw.f64_or("analysis.delta_tol", d.delta_tol)?)?,
            strong_tol: positive("analysis.strong_tol", raw.f64_or("analysis.strong_tol", d.strong_tol)?)?,
            search: SearchOpts {
                tol: positive("analysis.search_tol", raw.f64_or("analysis.search_tol", d.search.tol)?)?,
                max_evals,
            },
            fejer_a,
        })
    }

    /// Tail used for single-center reports: the whole trace with the
    /// configured window.
    pub fn tail(&self) -> Result<TailSpec> {
        Ok(TailSpec {
            window: self.raw.usize("analysis.window")?,
            ..TailSpec::default()
        })
    }

    pub fn outputs(&self) -> Result<OutputPaths> {
        let raw = &self.raw;
        let place = |key: &str, default: &str| -> Result<PathBuf> {
            let p = PathBuf::from(raw.str(key)?.unwrap_or(default));
            Ok(match &self.overrides.out {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            })
        };
        Ok(OutputPaths {
            trace: place("output.trace", "trace.csv")?,
            summary: place("output.summary", "summary.json")?,
            report: place("output.report", "report.json")?,
        })
    }

    pub fn verify_opts(&self) -> Result<VerifyOpts> {
        let raw = &self.raw;
        let opts = VerifyOpts {
            samples: raw.usize("verify.samples")?.unwrap_or(10_000),
            seed: match self.overrides.seed {
                Some(s) => s,
                None => raw.u64("verify.seed")?.unwrap_or(1),
            },
            n_max: raw.usize("verify.n_max")?.unwrap_or(20),
            pairs: raw.usize("verify.pairs")?.unwrap_or(1_000),
        };
        if opts.samples == 0 {
            return Err(bad("verify.samples", "must be >= 1"));
        }
        if opts.n_max == 0 {
            return Err(bad("verify.n_max", "must be >= 1"));
        }
        if opts.pairs == 0 {
            return Err(bad("verify.pairs", "must be >= 1"));
        }
        Ok(opts)
    }
}

fn build_space(raw: &RawConfig) -> Result<GeodesicSpace> {
    let space = match raw.req_str("space.kind")? {
        "euclidean" => {
            let d = raw
                .usize("space.dimension")?
                .ok_or_else(|| bad("space.dimension", "required for euclidean spaces"))?;
            GeodesicSpace::euclidean(d).map_err(|e| CliError::at("space.dimension", e))?
        }
        "poincare_disk" => GeodesicSpace::poincare_disk(),
        "star_tree" => {
            let b = raw
                .u64("space.branches")?
                .ok_or_else(|| bad("space.branches", "required for star trees"))?;
            let b = u32::try_from(b).map_err(|_| bad("space.branches", "too large"))?;
            GeodesicSpace::star_tree(b).map_err(|e| CliError::at("space.branches", e))?
        }
        other => return Err(bad("space.kind", format!("unknown space kind `{other}`"))),
    };
    for (key, kinds) in [("space.dimension", "euclidean"), ("space.branches", "star_tree")] {
        if raw.contains(key) && raw.req_str("space.kind")? != kinds {
            return Err(bad(key, format!("only applies to {kinds} spaces")));
        }
    }
    Ok(space)
}

/// The convex set described under `prefix` (`domain` or
/// `mapping.<i>.domain`); absent means the whole space.
fn build_set(raw: &RawConfig, prefix: &str, space: &GeodesicSpace) -> Result<ConvexSet> {
    let key = |f: &str| format!("{prefix}.{f}");
    let set = match raw.str(&key("kind"))? {
        None if raw.has_prefix(prefix) => return Err(bad(&key("kind"), "required")),
        None | Some("whole_space") => ConvexSet::WholeSpace,
        Some("interval_box") => ConvexSet::interval_box(raw.req_f64s(&key("lower"))?, raw.req_f64s(&key("upper"))?)
            .map_err(|e| CliError::at(&key("lower"), e))?,
        Some("closed_ball") => ConvexSet::closed_ball(raw.req_f64s(&key("center"))?, raw.req_f64(&key("radius"))?)
            .map_err(|e| CliError::at(&key("radius"), e))?,
        Some("disk_ball") => {
            ConvexSet::disk_ball(raw.req_f64(&key("radius"))?).map_err(|e| CliError::at(&key("radius"), e))?
        }
        Some("tree_ball") => {
            ConvexSet::tree_ball(raw.req_f64(&key("radius"))?).map_err(|e| CliError::at(&key("radius"), e))?
        }
        Some(other) => return Err(bad(&key("kind"), format!("unknown set kind `{other}`"))),
    };
    space.check_set(&set).map_err(|e| CliError::at(&key("kind"), e))?;
    Ok(set)
}

/// A point of `space` written as a number list: coordinates, `[u, v]`, or
/// `[branch, radius]`.
fn point(raw: &RawConfig, key: &str, space: &GeodesicSpace) -> Result<Option<SpacePoint>> {
    match raw.f64s(key)? {
        None => Ok(None),
        Some(c) => point_from(&c, space).map(Some).map_err(|e| CliError::at(key, e)),
    }
}

pub(crate) fn point_from(c: &[f64], space: &GeodesicSpace) -> tanfix_core::Result<SpacePoint> {
    let p = match space.kind() {
        SpaceKind::Euclidean { .. } => SpacePoint::euclidean(c.to_vec()),
        SpaceKind::PoincareDisk => match c {
            [u, v] => SpacePoint::disk(*u, *v)?,
            _ => return Err(tanfix_core::Error::Domain("a disk point is written [u, v]".into())),
        },
        SpaceKind::StarTree { .. } => match c {
            [b, r] if *b >= 0.0 && b.fract() == 0.0 && *b <= u32::MAX as f64 => SpacePoint::tree(*b as u32, *r)?,
            _ => {
                return Err(tanfix_core::Error::Domain(
                    "a tree point is written [branch, radius]".into(),
                ))
            }
        },
    };
    space.check_point(&p)?;
    Ok(p)
}

fn seq_spec(raw: &RawConfig, prefix: &str, default: SeqSpec) -> Result<SeqSpec> {
    let key = |f: &str| format!("{prefix}.{f}");
    let Some(kind) = raw.str(&key("kind"))? else {
        if raw.has_prefix(prefix) {
            return Err(bad(&key("kind"), "required when other keys of this sequence are set"));
        }
        return Ok(default);
    };
    Ok(match kind {
        "zero" => SeqSpec::Zero,
        "geometric" => SeqSpec::Geometric {
            scale: raw.req_f64(&key("scale"))?,
            ratio: raw.req_f64(&key("ratio"))?,
        },
        "power_law" => SeqSpec::PowerLaw {
            scale: raw.req_f64(&key("scale"))?,
            exponent: raw.req_f64(&key("exponent"))?,
        },
        "tabulated" => SeqSpec::Tabulated(raw.req_f64s(&key("values"))?),
        other => return Err(bad(&key("kind"), format!("unknown sequence kind `{other}`"))),
    })
}

fn xi_spec(raw: &RawConfig, prefix: &str, default: XiSpec) -> Result<XiSpec> {
    let key = |f: &str| format!("{prefix}.{f}");
    let Some(kind) = raw.str(&key("kind"))? else {
        if raw.has_prefix(prefix) {
            return Err(bad(&key("kind"), "required when other xi keys are set"));
        }
        return Ok(default);
    };
    Ok(match kind {
        "identity" => XiSpec::Identity,
        "affine_capped" => XiSpec::AffineCapped {
            slope: raw.req_f64(&key("slope"))?,
            knee: raw.req_f64(&key("knee"))?,
            tail_slope: raw.req_f64(&key("tail_slope"))?,
        },
        "tabulated" => {
            let rows = raw
                .nested(&key("points"))?
                .ok_or_else(|| bad(&key("points"), "required"))?;
            XiSpec::Tabulated(
                rows.iter()
                    .map(|r| match r.as_slice() {
                        [x, y] => Ok((*x, *y)),
                        _ => Err(bad(&key("points"), "each entry must be [l, xi(l)]")),
                    })
                    .collect::<Result<_>>()?,
            )
        }
        other => return Err(bad(&key("kind"), format!("unknown xi kind `{other}`"))),
    })
}

/// Declared constants: the kind's defaults with any configured component
/// replaced.
fn sequences(raw: &RawConfig, prefix: &str, defaults: TanSequences) -> Result<TanSequences> {
    let key = |f: &str| format!("{prefix}.{f}");
    let k = seq_spec(raw, &key("k"), defaults.k)?;
    let phi = seq_spec(raw, &key("phi"), defaults.phi)?;
    let xi = xi_spec(raw, &key("xi"), defaults.xi)?;
    let m = raw.f64_or(&key("M"), defaults.m)?;
    let m_star = raw.f64_or(&key("M_star"), defaults.m_star)?;
    TanSequences::new(k, phi, xi, m, m_star).map_err(|e| CliError::at(&key("k.kind"), e))
}
