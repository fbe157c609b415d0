//! Empirical Lipschitz envelope of the powers of a mapping.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{config, Result};
use crate::rng::stream;
use crate::space::{raw_combine, raw_dist, SpacePoint};

use super::TanMapping;

/// Pairs closer than this are skipped to avoid 0/0.
pub const MIN_PAIR_DIST: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub n: usize,
    /// Largest observed `d(T^n x, T^n y) / d(x, y)`.
    pub lipschitz: f64,
    /// `max(0, lipschitz - 1)`: a `k_n` valid for `xi = id`, `phi_n = 0` on
    /// the sampled pairs.
    pub k_hat: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub rows: Vec<EstimateRow>,
    pub sample_count: usize,
    pub seed: u64,
}

impl EstimateReport {
    pub fn row(&self, n: usize) -> Option<&EstimateRow> {
        self.rows.get(n.wrapping_sub(1))
    }
}

/// Images of `x` under the powers `1..=n_max` (or the non-self chain
/// `T (P T)^(n-1)`), computed incrementally. Intermediate points are not
/// required to stay in the domain: the estimate is about the formula.
fn power_chain(t: &TanMapping, x: &SpacePoint, n_max: usize) -> Result<Vec<SpacePoint>> {
    if t.self_map && t.kind.has_closed_form_power() {
        return (1..=n_max)
            .map(|n| Ok(t.closed_form_power(n, x).expect("closed form exists")))
            .collect();
    }
    let mut out = Vec::with_capacity(n_max);
    let mut z = t.apply_unchecked(x)?;
    out.push(z.clone());
    for _ in 1..n_max {
        z = if t.self_map {
            t.apply_unchecked(&z)?
        } else {
            t.apply_unchecked(&t.domain().project(&z)?)?
        };
        out.push(z.clone());
    }
    Ok(out)
}

/// Sample `sample_count` seeded pairs from the mapping's bounded domain and
/// report, for each `n <= n_max`, the largest distance ratio of the n-th
/// powers. Half the pairs are independent draws and half are close pairs
/// (the second point a small fraction of the way to a third draw), which
/// probes local Lipschitz behaviour.
///
/// Each sample uses its own stream, so the result does not depend on the
/// number of worker threads.
pub fn estimate_constants(t: &TanMapping, n_max: usize, sample_count: usize, seed: u64) -> Result<EstimateReport> {
    if n_max == 0 || sample_count == 0 {
        return Err(config("estimate_constants needs n_max >= 1 and sample_count >= 1"));
    }
    if !t.domain().is_bounded() {
        return Err(config(format!(
            "estimate_constants needs a bounded domain; {} has {}",
            t.kind().name(),
            t.domain().kind_name()
        )));
    }
    let per_sample: Vec<Option<Vec<f64>>> = (0..sample_count)
        .into_par_iter()
        .map(|i| -> Result<Option<Vec<f64>>> {
            let mut rng = stream(seed, i as u64);
            let x = t.space().sample(&mut rng)?;
            let z = t.space().sample(&mut rng)?;
            let y = if i % 2 == 0 {
                z
            } else {
                let frac = 10f64.powf(-1.0 - 3.0 * rng.random::<f64>());
                raw_combine(&x, &z, frac)
            };
            let d = raw_dist(&x, &y);
            if d < MIN_PAIR_DIST {
                return Ok(None);
            }
            let px = power_chain(t, &x, n_max)?;
            let py = power_chain(t, &y, n_max)?;
            Ok(Some(px.iter().zip(&py).map(|(a, b)| raw_dist(a, b) / d).collect()))
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<EstimateRow> = (1..=n_max)
        .map(|n| EstimateRow {
            n,
            lipschitz: 0.0,
            k_hat: 0.0,
            pairs: 0,
        })
        .collect();
    for ratios in per_sample.into_iter().flatten() {
        for (row, r) in rows.iter_mut().zip(ratios) {
            row.lipschitz = row.lipschitz.max(r);
            row.pairs += 1;
        }
    }
    for row in &mut rows {
        row.k_hat = (row.lipschitz - 1.0).max(0.0);
    }
    Ok(EstimateReport {
        rows,
        sample_count,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ConvexSet, GeodesicSpace};

    #[test]
    fn affine_contraction_powers() {
        let s = GeodesicSpace::euclidean(2)
            .unwrap()
            .with_domain(ConvexSet::closed_ball(vec![0.0, 0.0], 1.0).unwrap())
            .unwrap();
        let t = TanMapping::affine_contraction(s, 0.5).unwrap();
        let rep = estimate_constants(&t, 10, 300, 1).unwrap();
        for row in &rep.rows {
            assert!(row.lipschitz <= 0.5f64.powi(row.n as i32) + 1e-9, "{row:?}");
            assert_eq!(row.k_hat, 0.0);
        }
    }

    #[test]
    fn sin_on_unit_interval_is_nonexpansive() {
        let t = TanMapping::sin_map()
            .unwrap()
            .on_domain(ConvexSet::interval(0.0, 1.0).unwrap())
            .unwrap();
        let rep = estimate_constants(&t, 20, 500, 2).unwrap();
        assert!(rep.rows.iter().all(|r| r.lipschitz <= 1.0 + 1e-9 && r.k_hat == 0.0));
    }

    #[test]
    fn shift_scale4_grows_like_four_to_the_n() {
        let t = TanMapping::shift_scale4(4).unwrap();
        let rep = estimate_constants(&t, 6, 400, 3).unwrap();
        for row in &rep.rows {
            let exact = 4f64.powi(row.n as i32);
            assert!(row.lipschitz <= exact + 1e-9);
            assert!(row.lipschitz >= 0.5 * exact, "{row:?}");
        }
    }

    #[test]
    fn unbounded_domain_rejected() {
        let t = TanMapping::affine_contraction(GeodesicSpace::euclidean(1).unwrap(), 0.5).unwrap();
        assert!(matches!(estimate_constants(&t, 3, 10, 0), Err(crate::Error::Config(_))));
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let t = TanMapping::goebel_kirk(6).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_constants(&t, 8, 200, 11).unwrap());
        let b = four.install(|| estimate_constants(&t, 8, 200, 11).unwrap());
        assert_eq!(a, b);
    }
}
