//! Desk-scale acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use tanfix_cli::trace_csv::{read_trace, write_trace, Schema};
use tanfix_core::analysis::{
    asymptotic_center, classify, delta_converged, dist_to_fixed_set, orbit_center_probe, AnalysisOptions,
    Classification, FixedSetDescriptor, SearchOpts, TailSpec,
};
use tanfix_core::iteration::{run, IterationConfig, Mode, Schedule, Trace};
use tanfix_core::mappings::{defect_sweep, estimate_constants, MappingKind, TanMapping, TanSequences, DEFECT_TOL};
use tanfix_core::space::{check_uc_inequality, check_w_axioms, ConvexSet, GeodesicSpace, SpacePoint};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEEDS: [u64; 3] = [1, 2, 3];
const SAMPLES: usize = 10_000;

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn line() -> GeodesicSpace {
    GeodesicSpace::euclidean(1).unwrap()
}

fn on(lo: f64, hi: f64) -> Result<GeodesicSpace, String> {
    line().with_domain(ConvexSet::interval(lo, hi).map_err(e)?).map_err(e)
}

fn x0(p: &SpacePoint) -> f64 {
    p.coords()[0]
}

fn w_axioms() -> Outcome {
    let spaces = [
        (GeodesicSpace::euclidean(5).map_err(e)?, 1e-9),
        (GeodesicSpace::star_tree(3).map_err(e)?, 1e-9),
        (GeodesicSpace::poincare_disk(), 1e-7),
    ];
    let mut notes = Vec::new();
    for (space, tol) in &spaces {
        let mut worst = 0.0f64;
        for seed in SEEDS {
            let report = check_w_axioms(space, SAMPLES, seed).map_err(e)?;
            for c in &report.checks {
                worst = worst.max(c.max_violation);
            }
        }
        if worst.is_nan() || worst > *tol {
            return Err(format!("{}: max violation {worst:e} > {tol:e}", space.kind().name()));
        }
        notes.push(format!("{} {worst:.1e}", space.kind().name()));
    }
    Ok(notes.join(", "))
}

fn uc() -> Outcome {
    let mut notes = Vec::new();
    for space in [
        GeodesicSpace::euclidean(5).map_err(e)?,
        GeodesicSpace::star_tree(3).map_err(e)?,
    ] {
        let mut violations = 0;
        let mut samples = 0;
        for seed in SEEDS {
            let report = check_uc_inequality(&space, SAMPLES, seed).map_err(e)?;
            for c in &report.checks {
                violations += c.violations;
                samples += c.samples;
            }
        }
        if violations > 0 {
            return Err(format!("{}: {violations} violations", space.kind().name()));
        }
        notes.push(format!("{} 0/{samples}", space.kind().name()));
    }
    Ok(notes.join(", "))
}

fn disk_spot() -> Outcome {
    let d = GeodesicSpace::poincare_disk();
    let o = SpacePoint::disk(0.0, 0.0).map_err(e)?;
    let p = SpacePoint::disk(0.6, 0.0).map_err(e)?;
    let dist = d.dist(&o, &p).map_err(e)?;
    let mid = d.combine(&o, &p, 0.5).map_err(e)?.coords();
    let dd = (dist - 2f64.ln()).abs();
    let dm = (mid[0] - 1.0 / 3.0).abs().max(mid[1].abs());
    if dd <= 1e-10 && dm <= 1e-8 {
        Ok(format!("|d - ln 2| = {dd:.1e}, |mid - (1/3,0)| = {dm:.1e}"))
    } else {
        Err(format!("|d - ln 2| = {dd:e}, |mid - (1/3,0)| = {dm:e}"))
    }
}

fn halving() -> Outcome {
    let space = line();
    let t = TanMapping::constant(space.clone(), SpacePoint::scalar(0.0)).map_err(e)?;
    let cfg = IterationConfig::new(
        space,
        vec![t],
        SpacePoint::scalar(1.0),
        Schedule::constant(0.5).map_err(e)?,
        40,
        1e-300,
    );
    let trace = run(&cfg).map_err(e)?;
    if trace.rows.len() < 40 {
        return Err(format!("stopped after {} steps", trace.rows.len()));
    }
    let worst = trace
        .rows
        .iter()
        .map(|r| (x0(&r.x) - 2f64.powi(1 - r.n as i32)).abs())
        .fold(0.0, f64::max);
    if worst <= 1e-12 {
        Ok(format!("max |x_n - 2^(1-n)| = {worst:.1e} over n <= 40"))
    } else {
        Err(format!("max |x_n - 2^(1-n)| = {worst:e}"))
    }
}

fn sin_half_line() -> Outcome {
    let space = on(0.0, f64::INFINITY)?;
    // sin does not map [0, inf) into itself, so the sampled self-map check
    // would reject it; orbits from x1 = 1 stay in [0, 1].
    let t = TanMapping::new(MappingKind::SinMap, space.clone(), TanSequences::zero(), true, true).map_err(e)?;
    let mut cfg = IterationConfig::new(
        space,
        vec![t],
        SpacePoint::scalar(1.0),
        Schedule::constant(0.5).map_err(e)?,
        100_000,
        1e-2,
    );
    cfg.allow_long_runs = true;
    let trace = run(&cfg).map_err(e)?;
    let last = trace.last().ok_or("empty trace")?;
    if last.max_residual().is_nan() || last.max_residual() >= 1e-2 {
        return Err(format!("residual {} after {} steps", last.max_residual(), last.n));
    }
    let mut prev = 1.0f64;
    for r in &trace.rows {
        let d = x0(&r.x).abs();
        if d > prev + 1e-12 {
            return Err(format!("d(x_n, 0) increased at n = {}", r.n));
        }
        prev = d;
    }
    Ok(format!(
        "residual {:.2e} at n = {}, d(x_n, 0) nonincreasing",
        last.max_residual(),
        last.n
    ))
}

fn two_maps_config() -> Result<IterationConfig, String> {
    let space = on(-1.0 / PI, 1.0 / PI)?;
    let family = vec![
        TanMapping::sin_map_on(space.clone()).map_err(e)?,
        TanMapping::xsin_inv_on(0.5, space.clone()).map_err(e)?,
    ];
    let mut cfg = IterationConfig::new(
        space,
        family,
        SpacePoint::scalar(1.0 / PI),
        Schedule::constant(0.5).map_err(e)?,
        500,
        1e-300,
    );
    cfg.reference = Some(SpacePoint::scalar(0.0));
    cfg.fixed_set = Some(FixedSetDescriptor::SinglePoint(SpacePoint::scalar(0.0)));
    Ok(cfg)
}

fn two_maps() -> Outcome {
    let cfg = two_maps_config()?;
    let trace = run(&cfg).map_err(e)?;
    let hit = trace.rows.iter().find(|r| x0(&r.x).abs() < 1e-6).map(|r| r.n);
    let Some(hit) = hit else {
        return Err("d(x_n, 0) never below 1e-6 within 500 steps".into());
    };
    let opts = AnalysisOptions::default();
    let delta = delta_converged(
        &cfg.space,
        &trace.points(),
        cfg.domain(),
        &opts.subsequences,
        opts.delta_tol,
        &opts.search,
    )
    .map_err(e)?;
    let off = delta.centers.iter().map(|c| x0(&c.center).abs()).fold(0.0, f64::max);
    let min_f = trace
        .rows
        .iter()
        .map(|r| dist_to_fixed_set(&cfg.space, &r.x, cfg.fixed_set.as_ref().unwrap()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let report = classify(&cfg, &trace, &opts).map_err(e)?;
    let msg = format!(
        "d < 1e-6 at n = {hit}, delta {}, centers within {off:.1e} of 0, min dist_F {min_f:.1e}, classification {}",
        delta.converged,
        report.classification.name()
    );
    if delta.converged && off <= 1e-4 && min_f < 1e-6 && report.classification == Classification::Strong {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn nonself() -> Outcome {
    let space = on(0.0, 1.0)?;
    let t = TanMapping::new(
        MappingKind::AffineContraction { factor: -0.5 },
        space.clone(),
        TanSequences::zero(),
        false,
        false,
    )
    .map_err(e)?;
    let mut cfg = IterationConfig::new(
        space,
        vec![t],
        SpacePoint::scalar(1.0),
        Schedule::constant(0.5).map_err(e)?,
        200,
        1e-300,
    );
    cfg.mode = Mode::NonSelf;
    let trace = run(&cfg).map_err(e)?;
    match trace.rows.iter().find(|r| x0(&r.x).abs() < 1e-8) {
        Some(r) => Ok(format!("d(x_n, 0) < 1e-8 at n = {}", r.n)),
        None => Err("d(x_n, 0) never below 1e-8 within 200 steps".into()),
    }
}

fn ledger_entry(name: &str, t: &TanMapping) -> Result<String, String> {
    let report = defect_sweep(t, 1000, 20, 11).map_err(e)?;
    let worst = report.max_defect();
    if worst.is_nan() || worst > DEFECT_TOL || report.self_map_failures > 0 {
        return Err(format!(
            "{name}: max defect {worst:e}, {} self-map failures",
            report.self_map_failures
        ));
    }
    Ok(format!("{name} {worst:.1e}"))
}

fn defect_ledger() -> Outcome {
    let plane = GeodesicSpace::euclidean(2)
        .map_err(e)?
        .with_domain(ConvexSet::closed_ball(vec![0.0, 0.0], 1.0).map_err(e)?)
        .map_err(e)?;
    let mut notes = vec![
        ledger_entry("sin_map", &TanMapping::sin_map().map_err(e)?)?,
        ledger_entry("xsin_inv", &TanMapping::xsin_inv(0.5).map_err(e)?)?,
        ledger_entry(
            "affine_contraction",
            &TanMapping::affine_contraction(plane.clone(), 0.5).map_err(e)?,
        )?,
        ledger_entry(
            "constant_map",
            &TanMapping::constant(plane, SpacePoint::euclidean([0.0, 0.0])).map_err(e)?,
        )?,
    ];

    // The declared k_n must dominate the empirical Lipschitz excess.
    let gk = TanMapping::goebel_kirk(6).map_err(e)?;
    let est = estimate_constants(&gk, 20, 1000, 5).map_err(e)?;
    for row in &est.rows {
        let declared = gk.sequences().k.at(row.n);
        if row.k_hat > declared + DEFECT_TOL {
            return Err(format!(
                "goebel_kirk_truncated: estimated k_{} = {} exceeds declared {declared}",
                row.n, row.k_hat
            ));
        }
    }
    notes.push(ledger_entry("goebel_kirk_truncated", &gk)?);

    let shift = TanMapping::shift_scale4(4).map_err(e)?;
    let x = SpacePoint::euclidean([0.0, 1.0, 0.0, 0.0]);
    let y = SpacePoint::euclidean([0.0; 4]);
    let d2 = shift.tan_defect(&x, &y, 2).map_err(e)?;
    if d2 != 15.0 {
        return Err(format!("shift_scale4 defect at n = 2 is {d2}, expected 15"));
    }
    let dir = tempfile::tempdir().map_err(e)?;
    let code = tanfix(&["verify", "mapping"], "verify_shift.toml", dir.path(), &[])?;
    if code != Some(1) {
        return Err(format!("verify mapping on shift_scale4 exited {code:?}, expected 1"));
    }
    notes.push("shift_scale4 defect 15 at n = 2, verify exits 1".into());
    Ok(notes.join(", "))
}

fn center_oracle() -> Outcome {
    let space = line();
    let k = ConvexSet::interval(-2.0, 2.0).map_err(e)?;
    let opts = SearchOpts::default();
    let alternating: Vec<SpacePoint> = (1..=200)
        .map(|n| SpacePoint::scalar(if n % 2 == 0 { 1.0 } else { -1.0 }))
        .collect();
    let c = asymptotic_center(&space, &alternating, &k, &TailSpec::default(), &opts).map_err(e)?;
    let z = x0(&c.center).abs();
    let dr = (c.radius - 1.0).abs();
    let mut worst_const = 0.0f64;
    for v in [-1.5, 0.0, 0.3, 2.0] {
        let pts = vec![SpacePoint::scalar(v); 50];
        let c = asymptotic_center(&space, &pts, &k, &TailSpec::default(), &opts).map_err(e)?;
        worst_const = worst_const.max(c.radius);
    }
    let msg = format!("alternating |z| = {z:.1e}, |r - 1| = {dr:.1e}; constant radius <= {worst_const:.1e}");
    if z <= 1e-4 && dr <= 1e-4 && worst_const <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn probes() -> Outcome {
    let opts = SearchOpts::default();
    let line_k = ConvexSet::interval(-2.0, 2.0).map_err(e)?;
    let half = TanMapping::affine_contraction(line().with_domain(line_k.clone()).map_err(e)?, 0.5).map_err(e)?;
    let p1 = orbit_center_probe(
        &half,
        &SpacePoint::scalar(1.0),
        60,
        &line_k,
        &TailSpec::default(),
        10.0,
        &opts,
    )
    .map_err(e)?;

    let disk_k = ConvexSet::closed_ball(vec![0.0, 0.0], 1.0).map_err(e)?;
    let plane = GeodesicSpace::euclidean(2)
        .map_err(e)?
        .with_domain(disk_k.clone())
        .map_err(e)?;
    let rot = TanMapping::rotation(plane, 1.0).map_err(e)?;
    let p2 = orbit_center_probe(
        &rot,
        &SpacePoint::euclidean([1.0, 0.0]),
        500,
        &disk_k,
        &TailSpec::default(),
        10.0,
        &opts,
    )
    .map_err(e)?;
    let msg = format!(
        "affine 1/2 residual {:.1e} (N = 60), rotation residual {:.1e} (N = 500)",
        p1.residual, p2.residual
    );
    if p1.residual <= 1e-6 && p2.residual <= 1e-3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn tanfix(cmd: &[&str], config: &str, out: &Path, extra: &[&str]) -> Result<Option<i32>, String> {
    let cfg = configs().join(config);
    let status = Command::new(env!("CARGO_BIN_EXE_tanfix"))
        .args(cmd)
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .map_err(e)?
        .status;
    Ok(status.code())
}

fn csv_bytes(trace: &Trace, cfg: &IterationConfig) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    write_trace(&mut buf, trace, &Schema::for_run(cfg)).map_err(e)?;
    Ok(buf)
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(e)?;
    let b = tempfile::tempdir().map_err(e)?;
    for d in [&a, &b] {
        let code = tanfix(&["run"], "parts_line.toml", d.path(), &["--seed", "42"])?;
        if code != Some(0) {
            return Err(format!("run exited {code:?}"));
        }
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("trace.csv")).map_err(e);
    if read(&a)? != read(&b)? {
        return Err("repeated seeded runs wrote different CSV bytes".into());
    }

    // Values with long expansions and extreme exponents survive the text form.
    let mut cfg = two_maps_config()?;
    cfg.schedule = Schedule::seeded_uniform(0.1, 0.9, 3).map_err(e)?;
    cfg.record_intermediates = true;
    let trace = run(&cfg).map_err(e)?;
    let table = read_trace(csv_bytes(&trace, &cfg)?.as_slice()).map_err(e)?;
    let mut worst = 0.0f64;
    for (r, s) in trace.rows.iter().zip(&table.rows) {
        let mut pairs = vec![(r.alpha, s.alpha), (x0(&r.x), x0(&s.x))];
        pairs.extend(r.residuals.iter().copied().zip(s.residuals.iter().copied()));
        for (u, v) in pairs {
            if u != v {
                worst = worst.max(((u - v) / u.abs().max(f64::MIN_POSITIVE)).abs());
            }
        }
    }
    if table.rows.len() != trace.rows.len() || worst > 1e-15 {
        return Err(format!("round trip relative error {worst:e}"));
    }
    Ok(format!(
        "byte-identical reruns, {} rows round-trip with relative error {worst:.1e}",
        table.rows.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("axiom suite", w_axioms),
        ("uniform convexity", uc),
        ("disk spot values", disk_spot),
        ("halving scheme", halving),
        ("sin on the half line", sin_half_line),
        ("two-map scheme", two_maps),
        ("non-self scheme", nonself),
        ("defect ledger", defect_ledger),
        ("asymptotic center oracle", center_oracle),
        ("orbit center probes", probes),
        ("determinism and round trip", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.2}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
