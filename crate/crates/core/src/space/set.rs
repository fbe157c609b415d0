use crate::error::{config, Result};

use super::point::SpacePoint;

/// Relative slack used by membership tests, so iterates produced by convex
/// combination of members are not rejected for last-bit rounding.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A closed convex subset of one of the built-in spaces, together with its
/// nonexpansive retraction.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    WholeSpace,
    /// Axis-aligned box in Euclidean space; bounds may be infinite.
    IntervalBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// Euclidean ball.
    ClosedBall {
        center: Vec<f64>,
        radius: f64,
    },
    /// Disk points with Euclidean norm at most `radius < 1`. This is the
    /// hyperbolic ball about the origin of radius `atanh(radius)`.
    DiskBall {
        radius: f64,
    },
    /// Tree points at distance at most `radius` from the root.
    TreeBall {
        radius: f64,
    },
}

fn slack(bound: f64) -> f64 {
    MEMBERSHIP_TOL * (1.0 + bound.abs())
}

impl ConvexSet {
    pub fn interval_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(config(format!(
                "interval box needs matching nonempty bounds, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || *lo == f64::INFINITY || *hi == f64::NEG_INFINITY {
                return Err(config(format!("interval box coordinate {i}: [{lo}, {hi}] is empty")));
            }
        }
        Ok(ConvexSet::IntervalBox { lower, upper })
    }

    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::interval_box(vec![lower], vec![upper])
    }

    pub fn closed_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !radius.is_finite() || radius < 0.0 {
            return Err(config(format!("closed ball radius {radius} must be finite and >= 0")));
        }
        Ok(ConvexSet::ClosedBall { center, radius })
    }

    pub fn disk_ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(config(format!("disk ball radius {radius} must lie in (0, 1)")));
        }
        Ok(ConvexSet::DiskBall { radius })
    }

    pub fn tree_ball(radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(config(format!("tree ball radius {radius} must be finite and >= 0")));
        }
        Ok(ConvexSet::TreeBall { radius })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConvexSet::WholeSpace => "whole_space",
            ConvexSet::IntervalBox { .. } => "interval_box",
            ConvexSet::ClosedBall { .. } => "closed_ball",
            ConvexSet::DiskBall { .. } => "disk_ball",
            ConvexSet::TreeBall { .. } => "tree_ball",
        }
    }

    /// Whether every coordinate of the set is bounded.
    pub fn is_bounded(&self) -> bool {
        match self {
            ConvexSet::WholeSpace => false,
            ConvexSet::IntervalBox { lower, upper } => lower.iter().chain(upper).all(|b| b.is_finite()),
            _ => true,
        }
    }

    fn unsupported(&self, x: &SpacePoint) -> crate::Error {
        config(format!(
            "set {} does not apply to {} points",
            self.kind_name(),
            x.variant_name()
        ))
    }

    /// Membership test with [`MEMBERSHIP_TOL`] relative slack.
    pub fn contains(&self, x: &SpacePoint) -> Result<bool> {
        match (self, x) {
            (ConvexSet::WholeSpace, _) => Ok(true),
            (ConvexSet::IntervalBox { lower, upper }, SpacePoint::Euclidean(c)) => {
                self.check_dim(lower.len(), c.len())?;
                Ok(c.iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(v, (lo, hi))| *v >= lo - slack(*lo) && *v <= hi + slack(*hi)))
            }
            (ConvexSet::ClosedBall { center, radius }, SpacePoint::Euclidean(c)) => {
                self.check_dim(center.len(), c.len())?;
                Ok(euclid_dist(c, center) <= radius + slack(*radius))
            }
            (ConvexSet::DiskBall { radius }, SpacePoint::Disk([u, v])) => Ok(u.hypot(*v) <= radius + slack(*radius)),
            (ConvexSet::TreeBall { radius: r }, SpacePoint::Tree { radius, .. }) => Ok(*radius <= r + slack(*r)),
            _ => Err(self.unsupported(x)),
        }
    }

    fn check_dim(&self, expected: usize, got: usize) -> Result<()> {
        if expected != got {
            return Err(config(format!(
                "{} has dimension {expected} but point has dimension {got}",
                self.kind_name()
            )));
        }
        Ok(())
    }

    /// Nonexpansive retraction onto the set: coordinate clamping for boxes,
    /// radial scaling for balls, radius clamping on the tree.
    pub fn project(&self, x: &SpacePoint) -> Result<SpacePoint> {
        if self.contains(x)? {
            return Ok(x.clone());
        }
        Ok(match (self, x) {
            (ConvexSet::IntervalBox { lower, upper }, SpacePoint::Euclidean(c)) => SpacePoint::Euclidean(
                c.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                    .collect(),
            ),
            (ConvexSet::ClosedBall { center, radius }, SpacePoint::Euclidean(c)) => {
                let scale = radius / euclid_dist(c, center);
                SpacePoint::Euclidean(c.iter().zip(center).map(|(v, o)| o + (v - o) * scale).collect())
            }
            (ConvexSet::DiskBall { radius }, SpacePoint::Disk([u, v])) => {
                let scale = radius / u.hypot(*v);
                SpacePoint::Disk([u * scale, v * scale])
            }
            (ConvexSet::TreeBall { radius: r }, SpacePoint::Tree { branch, .. }) => {
                SpacePoint::tree_unchecked(*branch, *r)
            }
            _ => return Err(self.unsupported(x)),
        })
    }
}

pub(crate) fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_to_interval() {
        let k = ConvexSet::interval(0.0, 1.0).unwrap();
        assert_eq!(k.project(&SpacePoint::scalar(1.7)).unwrap(), SpacePoint::scalar(1.0));
        assert_eq!(k.project(&SpacePoint::scalar(-3.0)).unwrap(), SpacePoint::scalar(0.0));
    }

    #[test]
    fn radial_scaling_onto_unit_ball() {
        let k = ConvexSet::closed_ball(vec![0.0; 3], 1.0).unwrap();
        let p = k.project(&SpacePoint::euclidean(vec![3.0, 4.0, 0.0])).unwrap();
        let c = p.coords();
        assert!((c[0] - 0.6).abs() < 1e-15 && (c[1] - 0.8).abs() < 1e-15 && c[2] == 0.0);
    }

    #[test]
    fn members_are_fixed() {
        let k = ConvexSet::closed_ball(vec![1.0, 1.0], 2.0).unwrap();
        let x = SpacePoint::euclidean(vec![1.5, 0.2]);
        assert_eq!(k.project(&x).unwrap(), x);
        let t = ConvexSet::tree_ball(2.0).unwrap();
        let y = SpacePoint::tree(1, 1.5).unwrap();
        assert_eq!(t.project(&y).unwrap(), y);
    }

    #[test]
    fn tree_and_disk_clamping() {
        let t = ConvexSet::tree_ball(2.0).unwrap();
        let y = t.project(&SpacePoint::tree(2, 5.0).unwrap()).unwrap();
        assert_eq!(y, SpacePoint::tree(2, 2.0).unwrap());
        let d = ConvexSet::disk_ball(0.5).unwrap();
        let z = d.project(&SpacePoint::disk(0.0, 0.9).unwrap()).unwrap();
        assert_eq!(z, SpacePoint::Disk([0.0, 0.5]));
    }

    #[test]
    fn unsupported_pairs_are_config_errors() {
        let k = ConvexSet::tree_ball(1.0).unwrap();
        assert!(matches!(
            k.project(&SpacePoint::scalar(0.0)),
            Err(crate::Error::Config(_))
        ));
        let b = ConvexSet::interval(0.0, 1.0).unwrap();
        assert!(b.project(&SpacePoint::euclidean(vec![0.0, 0.0])).is_err());
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(ConvexSet::interval(1.0, 0.0).is_err());
        assert!(ConvexSet::disk_ball(1.0).is_err());
        assert!(ConvexSet::tree_ball(-1.0).is_err());
        assert!(ConvexSet::interval(0.0, f64::INFINITY).is_ok());
        assert!(!ConvexSet::interval(0.0, f64::INFINITY).unwrap().is_bounded());
    }
}
