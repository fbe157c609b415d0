//! Seeded sweep of the TAN defect over pairs and powers.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{config, Result};
use crate::rng::stream;
use crate::space::{raw_combine, SpacePoint};

use super::{TanMapping, DEFECT_TOL};

/// Largest defect seen at power `n` and the pair attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectRow {
    pub n: usize,
    pub max_defect: f64,
    pub x: SpacePoint,
    pub y: SpacePoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub rows: Vec<DefectRow>,
    pub pairs: usize,
    /// Sampled points a declared self map sent outside its domain.
    pub self_map_failures: usize,
}

impl DefectReport {
    pub fn max_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.max_defect).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn row(&self, n: usize) -> Option<&DefectRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn passed(&self) -> bool {
        self.self_map_failures == 0 && self.max_defect() <= DEFECT_TOL
    }
}

/// `tan_defect(x, y, n)` for `pairs` seeded pairs from the mapping's domain
/// and every `n <= n_max`. Odd-indexed pairs are close pairs, as in
/// [`super::estimate_constants`]. Self maps are also checked for leaving
/// their domain at each sampled `x`.
pub fn defect_sweep(t: &TanMapping, pairs: usize, n_max: usize, seed: u64) -> Result<DefectReport> {
    if pairs == 0 || n_max == 0 {
        return Err(config("defect_sweep needs pairs >= 1 and n_max >= 1"));
    }
    let per_pair: Vec<(Vec<f64>, SpacePoint, SpacePoint, bool)> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let x = t.space().sample(&mut rng)?;
            let z = t.space().sample(&mut rng)?;
            let y = if i % 2 == 0 {
                z
            } else {
                raw_combine(&x, &z, 10f64.powf(-1.0 - 3.0 * rng.random::<f64>()))
            };
            let escaped = t.is_self_map() && !t.domain().contains(&t.apply(&x)?)?;
            let defects = (1..=n_max)
                .map(|n| t.tan_defect(&x, &y, n))
                .collect::<Result<Vec<_>>>()?;
            Ok((defects, x, y, escaped))
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<DefectRow> = (1..=n_max)
        .map(|n| DefectRow {
            n,
            max_defect: f64::NEG_INFINITY,
            x: per_pair[0].1.clone(),
            y: per_pair[0].2.clone(),
        })
        .collect();
    for (defects, x, y, _) in &per_pair {
        for (row, d) in rows.iter_mut().zip(defects) {
            if *d > row.max_defect {
                row.max_defect = *d;
                row.x = x.clone();
                row.y = y.clone();
            }
        }
    }
    Ok(DefectReport {
        rows,
        pairs,
        self_map_failures: per_pair.iter().filter(|p| p.3).count(),
    })
}
