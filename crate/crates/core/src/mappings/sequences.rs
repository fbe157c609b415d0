//! Declared constants `(k_n, phi_n, xi, M, M*)` of a total asymptotically
//! nonexpansive mapping.

use crate::error::{config, Result};

/// A nonnegative sequence indexed from 1 that tends to zero.
#[derive(Debug, Clone, PartialEq)]
pub enum SeqSpec {
    Zero,
    /// `scale * ratio^n`
    Geometric {
        scale: f64,
        ratio: f64,
    },
    /// `scale / n^exponent`
    PowerLaw {
        scale: f64,
        exponent: f64,
    },
    /// Explicit values for `n = 1..=len`, zero afterwards.
    Tabulated(Vec<f64>),
}

impl SeqSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SeqSpec::Zero => Ok(()),
            SeqSpec::Geometric { scale, ratio } => {
                if !(*scale >= 0.0 && scale.is_finite() && (0.0..1.0).contains(ratio)) {
                    return Err(config(format!(
                        "geometric sequence needs scale >= 0 and ratio in [0, 1), got {scale}, {ratio}"
                    )));
                }
                Ok(())
            }
            SeqSpec::PowerLaw { scale, exponent } => {
                if !(*scale >= 0.0 && scale.is_finite() && *exponent > 0.0) {
                    return Err(config(format!(
                        "power-law sequence needs scale >= 0 and exponent > 0, got {scale}, {exponent}"
                    )));
                }
                Ok(())
            }
            SeqSpec::Tabulated(v) => {
                if let Some(bad) = v.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                    return Err(config(format!(
                        "tabulated sequence entry {bad} is not a finite nonnegative number"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Value at index `n >= 1`.
    pub fn at(&self, n: usize) -> f64 {
        match self {
            SeqSpec::Zero => 0.0,
            SeqSpec::Geometric { scale, ratio } => scale * ratio.powf(n as f64),
            SeqSpec::PowerLaw { scale, exponent } => scale / (n as f64).powf(*exponent),
            SeqSpec::Tabulated(v) => v.get(n.wrapping_sub(1)).copied().unwrap_or(0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SeqSpec::Zero => true,
            SeqSpec::Geometric { scale, .. } | SeqSpec::PowerLaw { scale, .. } => *scale == 0.0,
            SeqSpec::Tabulated(v) => v.iter().all(|x| *x == 0.0),
        }
    }

    /// Largest value over `1..=n`.
    pub fn sup(&self, n: usize) -> f64 {
        (1..=n.max(1)).map(|i| self.at(i)).fold(0.0, f64::max)
    }

    /// Growth of the partial sums over the last tenth of the prefix `1..=n`.
    /// A summable sequence consumed far enough shows a plateau here.
    pub fn tail_increment(&self, n: usize) -> f64 {
        let start = n - n / 10;
        (start + 1..=n).map(|i| self.at(i)).sum()
    }
}

/// The scaling function `xi`: strictly increasing, `xi(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum XiSpec {
    Identity,
    /// `slope * min(l, knee) + tail_slope * max(l - knee, 0)`
    AffineCapped {
        slope: f64,
        knee: f64,
        tail_slope: f64,
    },
    /// Piecewise linear through `(0, 0)` and the given points, extended past
    /// the last point with the last segment's slope.
    Tabulated(Vec<(f64, f64)>),
}

impl XiSpec {
    pub fn eval(&self, l: f64) -> f64 {
        match self {
            XiSpec::Identity => l,
            XiSpec::AffineCapped {
                slope,
                knee,
                tail_slope,
            } => slope * l.min(*knee) + tail_slope * (l - knee).max(0.0),
            XiSpec::Tabulated(points) => {
                let mut prev = (0.0, 0.0);
                for &(x, y) in points {
                    if l <= x {
                        return prev.1 + (y - prev.1) * (l - prev.0) / (x - prev.0);
                    }
                    prev = (x, y);
                }
                let slope = self.final_slope();
                prev.1 + slope * (l - prev.0)
            }
        }
    }

    fn final_slope(&self) -> f64 {
        match self {
            XiSpec::Identity => 1.0,
            XiSpec::AffineCapped { tail_slope, .. } => *tail_slope,
            XiSpec::Tabulated(points) => {
                let n = points.len();
                let (x1, y1) = points[n - 1];
                let (x0, y0) = if n >= 2 { points[n - 2] } else { (0.0, 0.0) };
                (y1 - y0) / (x1 - x0)
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            XiSpec::Identity => vec![],
            XiSpec::AffineCapped { knee, .. } => vec![*knee],
            XiSpec::Tabulated(points) => points.iter().map(|p| p.0).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            XiSpec::Identity => Ok(()),
            XiSpec::AffineCapped {
                slope,
                knee,
                tail_slope,
            } => {
                if !(*slope > 0.0 && *knee > 0.0 && *tail_slope > 0.0)
                    || !(slope.is_finite() && knee.is_finite() && tail_slope.is_finite())
                {
                    return Err(config("affine-capped xi needs positive slope, knee and tail slope"));
                }
                Ok(())
            }
            XiSpec::Tabulated(points) => {
                if points.is_empty() {
                    return Err(config("tabulated xi needs at least one point"));
                }
                let mut prev = (0.0, 0.0);
                for &(x, y) in points {
                    if !(x > prev.0 && y > prev.1 && x.is_finite() && y.is_finite()) {
                        return Err(config(format!(
                            "tabulated xi must be strictly increasing from (0, 0); ({x}, {y}) follows ({}, {})",
                            prev.0, prev.1
                        )));
                    }
                    prev = (x, y);
                }
                Ok(())
            }
        }
    }
}

/// Full set of declared constants for one mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct TanSequences {
    pub k: SeqSpec,
    pub phi: SeqSpec,
    pub xi: XiSpec,
    pub m: f64,
    pub m_star: f64,
}

impl Default for TanSequences {
    fn default() -> Self {
        Self::zero()
    }
}

impl TanSequences {
    /// Nonexpansive constants: `k = phi = 0`, `xi` the identity, `M = M* = 1`.
    pub fn zero() -> Self {
        Self {
            k: SeqSpec::Zero,
            phi: SeqSpec::Zero,
            xi: XiSpec::Identity,
            m: 1.0,
            m_star: 1.0,
        }
    }

    pub fn new(k: SeqSpec, phi: SeqSpec, xi: XiSpec, m: f64, m_star: f64) -> Result<Self> {
        let s = Self { k, phi, xi, m, m_star };
        s.validate()?;
        Ok(s)
    }

    /// Parameter checks plus the linear growth bound `xi(l) <= M* l` for
    /// `l >= M`, verified at `M`, at every breakpoint past `M`, and on the
    /// final slope.
    pub fn validate(&self) -> Result<()> {
        self.k.validate()?;
        self.phi.validate()?;
        self.xi.validate()?;
        if !(self.m > 0.0 && self.m_star > 0.0 && self.m.is_finite() && self.m_star.is_finite()) {
            return Err(config(format!(
                "M = {} and M* = {} must be positive",
                self.m, self.m_star
            )));
        }
        let slack = 1e-12 * (1.0 + self.m_star);
        let probe = std::iter::once(self.m).chain(self.xi.breakpoints().into_iter().filter(|b| *b > self.m));
        for l in probe {
            if self.xi.eval(l) > self.m_star * l * (1.0 + slack) {
                return Err(config(format!(
                    "xi({l}) = {} exceeds M* * {l} = {}",
                    self.xi.eval(l),
                    self.m_star * l
                )));
            }
        }
        if self.xi.final_slope() > self.m_star * (1.0 + slack) {
            return Err(config(format!(
                "xi grows with slope {} beyond M* = {}",
                self.xi.final_slope(),
                self.m_star
            )));
        }
        Ok(())
    }

    /// Right-hand side excess `k_n xi(d) + phi_n`.
    pub fn allowance(&self, n: usize, d: f64) -> f64 {
        self.k.at(n) * self.xi.eval(d) + self.phi.at(n)
    }

    pub fn is_nonexpansive(&self) -> bool {
        self.k.is_zero() && self.phi.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_values() {
        assert_eq!(SeqSpec::Geometric { scale: 2.0, ratio: 0.5 }.at(3), 0.25);
        assert_eq!(
            SeqSpec::PowerLaw {
                scale: 1.0,
                exponent: 2.0
            }
            .at(4),
            1.0 / 16.0
        );
        let t = SeqSpec::Tabulated(vec![0.3, 0.2]);
        assert_eq!(t.at(1), 0.3);
        assert_eq!(t.at(2), 0.2);
        assert_eq!(t.at(3), 0.0);
        assert_eq!(t.sup(10), 0.3);
    }

    #[test]
    fn invalid_sequences_rejected() {
        assert!(SeqSpec::Geometric { scale: 1.0, ratio: 1.0 }.validate().is_err());
        assert!(SeqSpec::PowerLaw {
            scale: 1.0,
            exponent: 0.0
        }
        .validate()
        .is_err());
        assert!(SeqSpec::Tabulated(vec![0.1, -0.2]).validate().is_err());
    }

    #[test]
    fn summable_sequences_plateau() {
        let g = SeqSpec::Geometric { scale: 1.0, ratio: 0.5 };
        assert!(g.tail_increment(400) < 1e-10);
        let slow = SeqSpec::PowerLaw {
            scale: 1.0,
            exponent: 2.0,
        };
        assert!(slow.tail_increment(400) > 1e-10);
    }

    #[test]
    fn xi_shapes() {
        let a = XiSpec::AffineCapped {
            slope: 2.0,
            knee: 1.0,
            tail_slope: 0.5,
        };
        assert_eq!(a.eval(0.0), 0.0);
        assert_eq!(a.eval(0.5), 1.0);
        assert_eq!(a.eval(3.0), 3.0);
        let t = XiSpec::Tabulated(vec![(1.0, 2.0), (2.0, 3.0)]);
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(1.5), 2.5);
        assert_eq!(t.eval(4.0), 5.0);
        assert!(XiSpec::Tabulated(vec![(1.0, 2.0), (0.5, 3.0)]).validate().is_err());
    }

    #[test]
    fn growth_bound_enforced() {
        let xi = XiSpec::AffineCapped {
            slope: 1.0,
            knee: 1.0,
            tail_slope: 3.0,
        };
        assert!(TanSequences::new(SeqSpec::Zero, SeqSpec::Zero, xi.clone(), 1.0, 2.0).is_err());
        assert!(TanSequences::new(SeqSpec::Zero, SeqSpec::Zero, xi, 1.0, 3.0).is_ok());
        assert!(TanSequences::new(SeqSpec::Zero, SeqSpec::Zero, XiSpec::Identity, 1.0, 0.5).is_err());
    }
}
