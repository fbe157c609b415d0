//! Reflection/contraction simplex search for small nonsmooth objectives.

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Largest sup-norm distance from the best vertex to another vertex at
    /// termination.
    pub diameter: f64,
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn lerp(c: &[f64], w: &[f64], t: f64) -> Vec<f64> {
    c.iter().zip(w).map(|(c, w)| c + t * (w - c)).collect()
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge
/// `step`. Stops when the simplex diameter drops below `tol` or after
/// `budget` evaluations.
pub(crate) fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], step: f64, tol: f64, budget: usize) -> Outcome {
    let n = x0.len();
    let mut evals = 1;
    let mut simplex = vec![(x0.to_vec(), f(x0))];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        let fv = f(&v);
        evals += 1;
        simplex.push((v, fv));
    }
    sort(&mut simplex);

    while diameter(&simplex) >= tol && evals < budget {
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let (worst, f_worst) = simplex[n].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;

        let r = lerp(&centroid, &worst, -1.0);
        let fr = f(&r);
        evals += 1;
        if fr < f_best {
            let e = lerp(&centroid, &worst, -2.0);
            let fe = f(&e);
            evals += 1;
            simplex[n] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < f_second {
            simplex[n] = (r, fr);
        } else {
            let (c, fc) = if fr < f_worst {
                let c = lerp(&centroid, &r, 0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = lerp(&centroid, &worst, 0.5);
                let fc = f(&c);
                (c, fc)
            };
            evals += 1;
            if fc < f_worst.min(fr) {
                simplex[n] = (c, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let v = lerp(&best, &vertex.0, 0.5);
                    let fv = f(&v);
                    *vertex = (v, fv);
                }
                evals += n;
            }
        }
        sort(&mut simplex);
    }
    let diameter = diameter(&simplex);
    let (x, f) = simplex.swap_remove(0);
    Outcome { x, f, evals, diameter }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let o = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            0.5,
            1e-9,
            10_000,
        );
        assert!((o.x[0] - 1.0).abs() < 1e-6 && (o.x[1] + 2.0).abs() < 1e-6);
        assert!(o.diameter < 1e-9);
    }

    #[test]
    fn finds_minimax_point() {
        let o = minimize(
            |x| (x[0] - 1.0).abs().max((x[0] + 1.0).abs()),
            &[0.7],
            0.3,
            1e-9,
            10_000,
        );
        assert!(o.x[0].abs() < 1e-8, "{}", o.x[0]);
    }

    #[test]
    fn respects_budget() {
        let o = minimize(|x| x[0].abs() + x[1].abs(), &[5.0, 5.0], 1.0, 0.0, 50);
        assert!(o.evals <= 52);
    }
}
