use super::center::{default_subsequences, delta_converged, CenterResult, DeltaResult, SearchOpts};
use super::{fejer_check, FejerConstants, TailSpec};
use crate::error::Result;
use crate::iteration::{IterationConfig, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Strong,
    Delta,
    Undetermined,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Strong => "strong",
            Classification::Delta => "delta",
            Classification::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub subsequences: Vec<TailSpec>,
    /// Pairwise tolerance for subsequence centers.
    pub delta_tol: f64,
    /// Threshold on `min_n d(x_n, F)` for a strong verdict.
    pub strong_tol: f64,
    pub search: SearchOpts,
    /// Overrides the default Fejér envelope constant.
    pub fejer_a: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            subsequences: default_subsequences(),
            delta_tol: 1e-4,
            strong_tol: 1e-6,
            search: SearchOpts::default(),
            fejer_a: None,
        }
    }
}

/// Max residual over the family at the first, last and best recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSummary {
    pub first: f64,
    pub last: f64,
    pub min: f64,
    pub min_step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub classification: Classification,
    pub residuals: ResidualSummary,
    /// Largest Fejér envelope violation against the reference point, with
    /// the envelope constant used.
    pub fejer: Option<(f64, f64)>,
    pub centers: Vec<CenterResult>,
    pub max_pairwise: f64,
    pub delta_converged: bool,
    /// `min_n d(x_n, F)` and the first step attaining it.
    pub min_dist_f: Option<(f64, usize)>,
}

/// Strong when the recorded distance to `F` drops below `strong_tol`,
/// otherwise delta when the subsequence centers agree, otherwise
/// undetermined.
pub fn classify(config: &IterationConfig, trace: &Trace, opts: &AnalysisOptions) -> Result<ConvergenceReport> {
    let first = trace.rows.first().map(|r| r.max_residual()).unwrap_or(f64::NAN);
    let last = trace.last().map(|r| r.max_residual()).unwrap_or(f64::NAN);
    let (min, min_step) = trace
        .rows
        .iter()
        .map(|r| (r.max_residual(), r.n))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });

    let fejer = match &config.reference {
        Some(p) => {
            let seqs = config.family.iter().map(|t| t.sequences().clone()).collect();
            let mut consts = FejerConstants::from_family(seqs, trace.len());
            if let Some(a) = opts.fejer_a {
                consts.a = a;
            }
            Some((fejer_check(&config.space, trace, p, &consts)?, consts.a))
        }
        None => None,
    };

    let min_dist_f = trace.rows.iter().filter_map(|r| r.dist_f.map(|d| (d, r.n))).fold(
        None,
        |acc: Option<(f64, usize)>, b| match acc {
            Some(a) if a.0 <= b.0 => Some(a),
            _ => Some(b),
        },
    );

    // Traces too short for every subsequence to be nonempty carry no
    // asymptotic information.
    let points = trace.points();
    let delta = if opts.subsequences.iter().all(|s| s.offset < points.len()) {
        delta_converged(
            &config.space,
            &points,
            config.domain(),
            &opts.subsequences,
            opts.delta_tol,
            &opts.search,
        )?
    } else {
        DeltaResult {
            converged: false,
            centers: Vec::new(),
            max_pairwise: f64::NAN,
        }
    };

    let classification = if min_dist_f.is_some_and(|(d, _)| d < opts.strong_tol) {
        Classification::Strong
    } else if delta.converged {
        Classification::Delta
    } else {
        Classification::Undetermined
    };
    Ok(ConvergenceReport {
        classification,
        residuals: ResidualSummary {
            first,
            last,
            min,
            min_step,
        },
        fejer,
        centers: delta.centers,
        max_pairwise: delta.max_pairwise,
        delta_converged: delta.converged,
        min_dist_f,
    })
}
