//! Trace files.
//!
//! Column order is `n, alpha, res_1..res_m, [dist_p], [dist_F]`, then the
//! point columns (`x_0..x_(d-1)`, `u,v`, or `branch,radius`), then, when
//! intermediates are recorded, the same point columns prefixed `y<j>_` for
//! `j = 1..m-1`. Reals are written in shortest round-trip form, so reading
//! a file back reproduces every recorded value exactly. The final row has
//! empty intermediate cells because no step is taken from it.

use std::io::{Read, Write};
use std::path::Path;

use tanfix_core::iteration::{IterationConfig, Trace, TraceRow};
use tanfix_core::{GeodesicSpace, SpaceKind, SpacePoint};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLayout {
    Euclidean(usize),
    Disk,
    Tree,
}

impl PointLayout {
    pub fn of(space: &GeodesicSpace) -> Self {
        match space.kind() {
            SpaceKind::Euclidean { dim } => PointLayout::Euclidean(dim),
            SpaceKind::PoincareDisk => PointLayout::Disk,
            SpaceKind::StarTree { .. } => PointLayout::Tree,
        }
    }

    pub fn columns(&self) -> Vec<String> {
        match self {
            PointLayout::Euclidean(d) => (0..*d).map(|i| format!("x_{i}")).collect(),
            PointLayout::Disk => vec!["u".into(), "v".into()],
            PointLayout::Tree => vec!["branch".into(), "radius".into()],
        }
    }

    fn width(&self) -> usize {
        match self {
            PointLayout::Euclidean(d) => *d,
            _ => 2,
        }
    }

    fn write(&self, p: &SpacePoint, out: &mut Vec<String>) {
        match p {
            SpacePoint::Tree { branch, radius } => {
                out.push(branch.to_string());
                out.push(real(*radius));
            }
            other => out.extend(other.coords().into_iter().map(real)),
        }
    }

    fn read(&self, cells: &[&str], line: usize) -> Result<SpacePoint> {
        match self {
            PointLayout::Euclidean(_) => Ok(SpacePoint::euclidean(
                cells.iter().map(|c| parse_real(c, line)).collect::<Result<Vec<_>>>()?,
            )),
            PointLayout::Disk => SpacePoint::disk(parse_real(cells[0], line)?, parse_real(cells[1], line)?)
                .map_err(|e| malformed(line, e)),
            PointLayout::Tree => {
                let branch = cells[0]
                    .parse::<u32>()
                    .map_err(|_| malformed(line, format!("branch `{}` is not a branch id", cells[0])))?;
                SpacePoint::tree(branch, parse_real(cells[1], line)?).map_err(|e| malformed(line, e))
            }
        }
    }
}

/// Which optional columns a trace file carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub m: usize,
    pub dist_p: bool,
    pub dist_f: bool,
    pub point: PointLayout,
    /// Number of recorded intermediates per row (0 or `m - 1`).
    pub intermediates: usize,
}

impl Schema {
    pub fn for_run(cfg: &IterationConfig) -> Self {
        Self {
            m: cfg.m(),
            dist_p: cfg.reference.is_some(),
            dist_f: cfg.fixed_set.is_some(),
            point: PointLayout::of(&cfg.space),
            intermediates: if cfg.record_intermediates { cfg.m() - 1 } else { 0 },
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["n".to_string(), "alpha".to_string()];
        h.extend((1..=self.m).map(|i| format!("res_{i}")));
        if self.dist_p {
            h.push("dist_p".into());
        }
        if self.dist_f {
            h.push("dist_F".into());
        }
        h.extend(self.point.columns());
        for j in 1..=self.intermediates {
            h.extend(self.point.columns().into_iter().map(|c| format!("y{j}_{c}")));
        }
        h
    }

    /// Infer the schema from a header, rejecting anything out of order.
    pub fn from_header(h: &[&str]) -> Result<Self> {
        let err = |msg: String| CliError::Config(format!("trace header: {msg}"));
        if h.len() < 3 || h[0] != "n" || h[1] != "alpha" {
            return Err(err("must start with `n,alpha`".into()));
        }
        let mut i = 2;
        let mut m = 0;
        while i < h.len() && h[i] == format!("res_{}", m + 1) {
            m += 1;
            i += 1;
        }
        if m == 0 {
            return Err(err("no residual columns `res_1..`".into()));
        }
        let mut take = |name: &str| {
            let hit = h.get(i) == Some(&name);
            if hit {
                i += 1;
            }
            hit
        };
        let dist_p = take("dist_p");
        let dist_f = take("dist_F");
        let point = match h.get(i) {
            Some(&"u") => PointLayout::Disk,
            Some(&"branch") => PointLayout::Tree,
            Some(&"x_0") => PointLayout::Euclidean(h[i..].iter().take_while(|c| c.starts_with("x_")).count()),
            other => return Err(err(format!("expected point columns, found {other:?}"))),
        };
        let cols = point.columns();
        if h.len() < i + cols.len() || h[i..i + cols.len()] != cols.iter().map(String::as_str).collect::<Vec<_>>()[..] {
            return Err(err(format!("point columns must be {}", cols.join(","))));
        }
        i += cols.len();
        let rest = &h[i..];
        if !rest.len().is_multiple_of(cols.len()) {
            return Err(err("trailing columns do not form whole intermediate points".into()));
        }
        let intermediates = rest.len() / cols.len();
        if intermediates != 0 && intermediates + 1 != m {
            return Err(err(format!("{intermediates} intermediate points for {m} mappings")));
        }
        let schema = Self {
            m,
            dist_p,
            dist_f,
            point,
            intermediates,
        };
        if schema.header() != h {
            return Err(err(format!("columns must be {}", schema.header().join(","))));
        }
        Ok(schema)
    }
}

fn real(v: f64) -> String {
    format!("{v:?}")
}

fn malformed(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("trace line {line}: {msg}"))
}

fn parse_real(cell: &str, line: usize) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| malformed(line, format!("`{cell}` is not a number")))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Config(format!("trace csv: {e}"))
}

pub fn write_trace<W: Write>(out: W, trace: &Trace, schema: &Schema) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(schema.header()).map_err(csv_err)?;
    let width = schema.point.width();
    for row in &trace.rows {
        let mut rec = vec![row.n.to_string(), real(row.alpha)];
        rec.extend(row.residuals.iter().copied().map(real));
        if schema.dist_p {
            rec.push(row.dist_p.map(real).unwrap_or_default());
        }
        if schema.dist_f {
            rec.push(row.dist_f.map(real).unwrap_or_default());
        }
        schema.point.write(&row.x, &mut rec);
        if schema.intermediates > 0 {
            if row.intermediates.is_empty() {
                rec.extend(std::iter::repeat_n(String::new(), width * schema.intermediates));
            } else {
                for y in &row.intermediates {
                    schema.point.write(y, &mut rec);
                }
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Config(format!("writing trace: {e}")))
}

pub fn write_trace_file(path: &Path, trace: &Trace, schema: &Schema) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    let f =
        std::fs::File::create(path).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    write_trace(std::io::BufWriter::new(f), trace, schema)
}

/// A trace read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub schema: Schema,
    pub rows: Vec<TraceRow>,
}

impl TraceTable {
    pub fn points(&self) -> Vec<SpacePoint> {
        self.rows.iter().map(|r| r.x.clone()).collect()
    }
}

pub fn read_trace<R: Read>(input: R) -> Result<TraceTable> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let schema = Schema::from_header(&header.iter().collect::<Vec<_>>())?;
    let width = schema.point.width();
    let mut rows = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(csv_err)?;
        let cells: Vec<&str> = rec.iter().collect();
        let n = cells[0]
            .parse::<usize>()
            .map_err(|_| malformed(line, format!("step `{}` is not an index", cells[0])))?;
        let alpha = parse_real(cells[1], line)?;
        let mut i = 2;
        let residuals = cells[i..i + schema.m]
            .iter()
            .map(|c| parse_real(c, line))
            .collect::<Result<Vec<_>>>()?;
        i += schema.m;
        let mut optional = |on: bool| -> Result<Option<f64>> {
            if !on {
                return Ok(None);
            }
            let c = cells[i];
            i += 1;
            if c.is_empty() {
                Ok(None)
            } else {
                parse_real(c, line).map(Some)
            }
        };
        let dist_p = optional(schema.dist_p)?;
        let dist_f = optional(schema.dist_f)?;
        let x = schema.point.read(&cells[i..i + width], line)?;
        i += width;
        let mut intermediates = Vec::new();
        if schema.intermediates > 0 && !cells[i..].iter().all(|c| c.is_empty()) {
            for j in 0..schema.intermediates {
                let at = i + j * width;
                intermediates.push(schema.point.read(&cells[at..at + width], line)?);
            }
        }
        rows.push(TraceRow {
            n,
            alpha,
            x,
            residuals,
            dist_p,
            dist_f,
            intermediates,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Config("trace has no rows".into()));
    }
    Ok(TraceTable { schema, rows })
}

pub fn read_trace_file(path: &Path) -> Result<TraceTable> {
    let f = std::fs::File::open(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    read_trace(std::io::BufReader::new(f))
}
