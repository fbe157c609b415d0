use std::fmt;

use crate::error::{domain, Result};

/// Largest squared Euclidean norm accepted for a disk point.
pub const DISK_LIMIT: f64 = 1.0 - 1e-12;

/// An element of one of the built-in spaces.
///
/// Tree points on the root (`radius == 0`) compare equal whatever their
/// branch id; constructors normalize them to branch 0.
#[derive(Debug, Clone)]
pub enum SpacePoint {
    Euclidean(Vec<f64>),
    Disk([f64; 2]),
    Tree { branch: u32, radius: f64 },
}

impl SpacePoint {
    pub fn euclidean<V: Into<Vec<f64>>>(coords: V) -> Self {
        SpacePoint::Euclidean(coords.into())
    }

    pub fn scalar(x: f64) -> Self {
        SpacePoint::Euclidean(vec![x])
    }

    pub fn disk(u: f64, v: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite()) {
            return Err(domain(format!("disk point ({u}, {v}) is not finite")));
        }
        if u * u + v * v > DISK_LIMIT {
            return Err(domain(format!(
                "disk point ({u}, {v}) is not strictly inside the unit disk"
            )));
        }
        Ok(SpacePoint::Disk([u, v]))
    }

    pub fn tree(branch: u32, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(domain(format!("tree radius {radius} must be finite and >= 0")));
        }
        Ok(Self::tree_unchecked(branch, radius))
    }

    pub(crate) fn tree_unchecked(branch: u32, radius: f64) -> Self {
        let radius = radius.max(0.0);
        let branch = if radius == 0.0 { 0 } else { branch };
        SpacePoint::Tree { branch, radius }
    }

    pub fn root() -> Self {
        SpacePoint::Tree { branch: 0, radius: 0.0 }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            SpacePoint::Euclidean(_) => "euclidean",
            SpacePoint::Disk(_) => "disk",
            SpacePoint::Tree { .. } => "tree",
        }
    }

    /// Flattened coordinates: the vector, `(u, v)`, or `(branch, radius)`.
    pub fn coords(&self) -> Vec<f64> {
        match self {
            SpacePoint::Euclidean(c) => c.clone(),
            SpacePoint::Disk(p) => p.to_vec(),
            SpacePoint::Tree { branch, radius } => vec![f64::from(*branch), *radius],
        }
    }

    pub fn as_euclidean(&self) -> Option<&[f64]> {
        match self {
            SpacePoint::Euclidean(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }
}

impl PartialEq for SpacePoint {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => a == b,
            (SpacePoint::Disk(a), SpacePoint::Disk(b)) => a == b,
            (SpacePoint::Tree { branch: b1, radius: r1 }, SpacePoint::Tree { branch: b2, radius: r2 }) => {
                r1 == r2 && (*r1 == 0.0 || b1 == b2)
            }
            _ => false,
        }
    }
}

impl fmt::Display for SpacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpacePoint::Euclidean(c) => write!(f, "{c:?}"),
            SpacePoint::Disk([u, v]) => write!(f, "disk({u}, {v})"),
            SpacePoint::Tree { branch, radius } => write!(f, "tree(branch {branch}, r={radius})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_compare_equal_across_branches() {
        let a = SpacePoint::Tree { branch: 2, radius: 0.0 };
        assert_eq!(a, SpacePoint::root());
        assert_eq!(SpacePoint::tree(5, 0.0).unwrap(), SpacePoint::root());
        assert_ne!(SpacePoint::tree(1, 1.0).unwrap(), SpacePoint::tree(2, 1.0).unwrap());
    }

    #[test]
    fn disk_rejects_boundary_and_outside() {
        assert!(SpacePoint::disk(1.0, 0.0).is_err());
        assert!(SpacePoint::disk(0.8, 0.7).is_err());
        assert!(SpacePoint::disk(0.6, 0.0).is_ok());
        assert!(SpacePoint::disk(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn tree_rejects_negative_radius() {
        assert!(SpacePoint::tree(0, -1.0).is_err());
    }

    #[test]
    fn variants_never_compare_equal() {
        assert_ne!(SpacePoint::scalar(0.0), SpacePoint::disk(0.0, 0.0).unwrap());
    }
}
