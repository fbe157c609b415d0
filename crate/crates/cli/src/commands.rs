//! Subcommand bodies. Each returns the process exit status on success and a
//! [`CliError`] (whose [`CliError::exit_code`] is the status) otherwise.

use std::path::Path;

use serde_json::{json, Value};
use tanfix_core::analysis::{asymptotic_center, classify, delta_converged, CenterResult};
use tanfix_core::iteration::{run, Mode};
use tanfix_core::mappings::{defect_sweep, estimate_constants, TanMapping};
use tanfix_core::space::{check_metric_axioms, check_uc_inequality, check_w_axioms, AxiomReport};
use tanfix_core::{SpaceKind, SpacePoint};

use crate::config::{Experiment, Overrides};
use crate::error::{CliError, Result, EXIT_OK, EXIT_VIOLATIONS};
use crate::trace_csv::{read_trace_file, write_trace_file, PointLayout, Schema};

fn write_json(path: &Path, value: &Value) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    std::fs::write(path, text + "\n").map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn point_json(p: &SpacePoint) -> Value {
    match p {
        SpacePoint::Tree { branch, radius } => json!({ "branch": branch, "radius": radius }),
        other => json!(other.coords()),
    }
}

fn center_json(c: &CenterResult) -> Value {
    json!({
        "center": point_json(&c.center),
        "radius": c.radius,
        "search_evals": c.search_evals,
        "converged": c.converged,
    })
}

fn fmt_point(p: &SpacePoint) -> String {
    match p {
        SpacePoint::Tree { branch, radius } => format!("branch {branch}, radius {radius:?}"),
        other => other
            .coords()
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

/// `run`: iterate, write the trace CSV and the summary report.
pub fn cmd_run(config: &Path, overrides: Overrides) -> Result<i32> {
    let exp = Experiment::load(config, overrides)?;
    let cfg = exp.iteration()?;
    let opts = exp.analysis()?;
    let out = exp.outputs()?;

    let trace = run(&cfg).map_err(CliError::runtime)?;
    let schema = Schema::for_run(&cfg);
    write_trace_file(&out.trace, &trace, &schema)?;
    let report = classify(&cfg, &trace, &opts).map_err(CliError::runtime)?;

    let last = trace.last().expect("a run records at least one row");
    let summary = json!({
        "config": config.display().to_string(),
        "trace": out.trace.display().to_string(),
        "space": cfg.space.kind().name(),
        "domain": cfg.domain().kind_name(),
        "m": cfg.m(),
        "mappings": cfg.family.iter().map(|t| t.kind().name()).collect::<Vec<_>>(),
        "mode": match cfg.mode { Mode::SelfMap => "self", Mode::NonSelf => "nonself" },
        "steps": trace.len(),
        "stop_reason": trace.stop_reason.name(),
        "x_final": point_json(&last.x),
        "classification": report.classification.name(),
        "residuals": {
            "first": report.residuals.first,
            "last": report.residuals.last,
            "min": report.residuals.min,
            "min_step": report.residuals.min_step,
        },
        "delta": {
            "converged": report.delta_converged,
            "tolerance": opts.delta_tol,
            "max_pairwise": report.max_pairwise,
            "subsequences": opts.subsequences.iter().zip(&report.centers).map(|(s, c)| json!({
                "offset": s.offset,
                "stride": s.stride,
                "window": s.window,
                "result": center_json(c),
            })).collect::<Vec<_>>(),
        },
        "fejer": report.fejer.map(|(v, a)| json!({ "max_violation": v, "a": a })),
        "fixed_set": report.min_dist_f.map(|(d, n)| json!({
            "min_distance": d,
            "step": n,
            "strong_tol": opts.strong_tol,
            "criterion_met": d < opts.strong_tol,
        })),
    });
    write_json(&out.summary, &summary)?;

    println!(
        "trace: {} ({} rows, stop: {})",
        out.trace.display(),
        trace.len(),
        trace.stop_reason.name()
    );
    println!("x_final: {}", fmt_point(&last.x));
    println!("final max residual: {:e}", report.residuals.last);
    if let Some((d, n)) = report.min_dist_f {
        println!("min d(x_n, F): {d:e} at step {n}");
    }
    if let Some((v, a)) = report.fejer {
        println!("fejer envelope: max violation {v:e} (a = {a})");
    }
    println!(
        "delta: {} (max pairwise center distance {:e})",
        report.delta_converged, report.max_pairwise
    );
    println!("classification: {}", report.classification.name());
    println!("summary: {}", out.summary.display());
    Ok(EXIT_OK)
}

fn report_lines(rep: &AxiomReport) -> (Vec<Value>, bool) {
    let mut ok = true;
    let mut rows = Vec::new();
    for c in &rep.checks {
        let status = if !c.enforced {
            "info"
        } else if c.passed() {
            "pass"
        } else {
            ok = false;
            "FAIL"
        };
        println!(
            "{:<16} samples {:>6}  max violation {:>12.3e}  violations {:>5}  tol {:.0e}  {status}",
            c.name, c.samples, c.max_violation, c.violations, c.tolerance
        );
        rows.push(json!({
            "name": c.name,
            "samples": c.samples,
            "max_violation": c.max_violation,
            "violations": c.violations,
            "tolerance": c.tolerance,
            "enforced": c.enforced,
        }));
    }
    (rows, ok)
}

/// `verify space`: metric axioms, convexity axioms and the uniform
/// convexity inequality on the configured space and domain.
pub fn cmd_verify_space(config: &Path, overrides: Overrides) -> Result<i32> {
    let exp = Experiment::load(config, overrides)?;
    let opts = exp.verify_opts()?;
    let out = exp.outputs()?;
    let space = exp.space();
    println!(
        "space {} on {}, seed {}",
        space.kind().name(),
        space.domain().kind_name(),
        opts.seed
    );
    let mut all = Vec::new();
    let mut ok = true;
    for check in [check_metric_axioms, check_w_axioms, check_uc_inequality] {
        let rep = check(space, opts.samples, opts.seed).map_err(CliError::runtime)?;
        let (rows, pass) = report_lines(&rep);
        ok &= pass;
        all.extend(rows);
    }
    write_json(
        &out.report,
        &json!({
            "command": "verify space",
            "space": space.kind().name(),
            "seed": opts.seed,
            "passed": ok,
            "checks": all,
        }),
    )?;
    println!("{}", if ok { "all checks passed" } else { "violations found" });
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATIONS })
}

fn verify_one(i: usize, t: &TanMapping, opts: &crate::config::VerifyOpts) -> Result<(Value, bool)> {
    println!("mapping {i}: {} on {}", t.kind().name(), t.domain().kind_name());
    let sweep = defect_sweep(t, opts.pairs, opts.n_max, opts.seed).map_err(CliError::runtime)?;
    for r in &sweep.rows {
        let flag = if r.max_defect > tanfix_core::mappings::DEFECT_TOL {
            "  FAIL"
        } else {
            ""
        };
        println!("  n = {:>3}  max defect {:>12.4e}{flag}", r.n, r.max_defect);
    }
    if t.is_self_map() {
        println!(
            "  self-map check: {} of {} samples left the domain",
            sweep.self_map_failures, sweep.pairs
        );
    }
    let estimate = if t.domain().is_bounded() {
        let est = estimate_constants(t, opts.n_max, opts.samples, opts.seed).map_err(CliError::runtime)?;
        let worst = est.rows.iter().map(|r| r.k_hat).fold(0.0, f64::max);
        println!(
            "  sampled Lipschitz excess: max over n <= {} of k_hat = {worst:.4e}",
            opts.n_max
        );
        Some(json!(est
            .rows
            .iter()
            .map(|r| json!({ "n": r.n, "lipschitz": r.lipschitz, "k_hat": r.k_hat, "pairs": r.pairs }))
            .collect::<Vec<_>>()))
    } else {
        println!("  unbounded domain: constants not estimated");
        None
    };
    let ok = sweep.passed();
    Ok((
        json!({
            "index": i,
            "kind": t.kind().name(),
            "passed": ok,
            "self_map_failures": sweep.self_map_failures,
            "defects": sweep.rows.iter().map(|r| json!({
                "n": r.n,
                "max_defect": r.max_defect,
                "x": point_json(&r.x),
                "y": point_json(&r.y),
            })).collect::<Vec<_>>(),
            "estimate": estimate,
        }),
        ok,
    ))
}

/// `verify mapping`: TAN defect sweep, self-map check and constant
/// estimates for every mapping in the family.
pub fn cmd_verify_mapping(config: &Path, overrides: Overrides) -> Result<i32> {
    let exp = Experiment::load(config, overrides)?;
    let opts = exp.verify_opts()?;
    let out = exp.outputs()?;
    let family = exp.family(true)?;
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, t) in family.iter().enumerate() {
        let (row, pass) = verify_one(i + 1, t, &opts)?;
        ok &= pass;
        rows.push(row);
    }
    write_json(
        &out.report,
        &json!({
            "command": "verify mapping",
            "seed": opts.seed,
            "pairs": opts.pairs,
            "n_max": opts.n_max,
            "passed": ok,
            "mappings": rows,
        }),
    )?;
    println!("{}", if ok { "all checks passed" } else { "violations found" });
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATIONS })
}

/// `center`: asymptotic center and Δ verdict of a stored trace.
pub fn cmd_center(trace_path: &Path, config: &Path, overrides: Overrides) -> Result<i32> {
    let exp = Experiment::load(config, overrides)?;
    let opts = exp.analysis()?;
    let tail = exp.tail()?;
    let space = exp.space();
    let table = read_trace_file(trace_path)?;
    let expected = PointLayout::of(space);
    if table.schema.point != expected {
        return Err(CliError::Config(format!(
            "trace points are {:?} but the config describes a {} space",
            table.schema.point,
            space.kind().name()
        )));
    }
    if let SpaceKind::StarTree { branches } = space.kind() {
        if let Some(p) = table
            .points()
            .iter()
            .find(|p| matches!(p, SpacePoint::Tree { branch, .. } if *branch >= branches))
        {
            return Err(CliError::Config(format!(
                "trace point {p} is not in the configured tree"
            )));
        }
    }
    let points = table.points();
    let c = asymptotic_center(space, &points, space.domain(), &tail, &opts.search).map_err(CliError::runtime)?;
    let delta = delta_converged(
        space,
        &points,
        space.domain(),
        &opts.subsequences,
        opts.delta_tol,
        &opts.search,
    )
    .map_err(CliError::runtime)?;
    println!("center: {}", fmt_point(&c.center));
    println!("radius: {:?}", c.radius);
    println!("search: {} evaluations, converged {}", c.search_evals, c.converged);
    for (s, r) in opts.subsequences.iter().zip(&delta.centers) {
        println!(
            "  subsequence offset {} stride {}: center {}",
            s.offset,
            s.stride,
            fmt_point(&r.center)
        );
    }
    println!(
        "delta: {} (max pairwise center distance {:e})",
        delta.converged, delta.max_pairwise
    );
    Ok(EXIT_OK)
}
