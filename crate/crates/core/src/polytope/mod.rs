//! Exact convex geometry: halfspace systems, membership, support functions,
//! and the 2-D polygon toolkit used by the binary-choice regions.

pub mod lp;
mod region2d;

pub use lp::LpOutcome;
pub use region2d::{convex_hull, vertices_2d, ConvexRegion2D, Point2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// `coeffs · x <= bound`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub coeffs: Vec<Rational>,
    pub bound: Rational,
}

/// `coeffs · x = value`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equality {
    pub coeffs: Vec<Rational>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfspaceSystem {
    pub dimension: usize,
    pub inequalities: Vec<Inequality>,
    pub equalities: Vec<Equality>,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, _)| !x.is_zero()).map(|(x, y)| x * y).sum()
}

impl HalfspaceSystem {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        HalfspaceSystem { dimension, inequalities: Vec::new(), equalities: Vec::new() }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: len });
        }
        Ok(())
    }

    pub fn add_inequality(&mut self, coeffs: Vec<Rational>, bound: Rational) -> Result<()> {
        self.check_len(coeffs.len())?;
        self.inequalities.push(Inequality { coeffs, bound });
        Ok(())
    }

    pub fn add_equality(&mut self, coeffs: Vec<Rational>, value: Rational) -> Result<()> {
        self.check_len(coeffs.len())?;
        self.equalities.push(Equality { coeffs, value });
        Ok(())
    }

    /// Adds `x_j >= 0` for every coordinate.
    pub fn add_nonnegativity(&mut self) {
        for j in 0..self.dimension {
            let mut coeffs = vec![Rational::zero(); self.dimension];
            coeffs[j] = Rational::from_integer(-1);
            self.inequalities.push(Inequality { coeffs, bound: Rational::zero() });
        }
    }

    /// Validates after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        for ineq in &self.inequalities {
            self.check_len(ineq.coeffs.len())?;
        }
        for eq in &self.equalities {
            self.check_len(eq.coeffs.len())?;
        }
        Ok(())
    }

    pub fn contains(&self, point: &[Rational]) -> Result<bool> {
        self.check_len(point.len())?;
        Ok(self.inequalities.iter().all(|h| dot(&h.coeffs, point) <= h.bound)
            && self.equalities.iter().all(|e| dot(&e.coeffs, point) == e.value))
    }

    /// Largest slack violation over the inequalities, with the index of the
    /// worst row. `None` when every inequality holds.
    pub fn worst_violation(&self, point: &[Rational]) -> Result<Option<(usize, Rational)>> {
        self.check_len(point.len())?;
        let mut worst: Option<(usize, Rational)> = None;
        for (i, h) in self.inequalities.iter().enumerate() {
            let excess = dot(&h.coeffs, point) - &h.bound;
            if excess.is_positive() && worst.as_ref().is_none_or(|(_, w)| excess > *w) {
                worst = Some((i, excess));
            }
        }
        Ok(worst)
    }

    /// `max direction · x` over the system, solved exactly.
    pub fn support(&self, direction: &[Rational]) -> Result<Rational> {
        self.check_len(direction.len())?;
        match lp::maximize(direction, self) {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Infeasible => Err(Error::Infeasible),
            LpOutcome::Unbounded => Err(Error::Unbounded),
        }
    }

    /// Like [`support`](Self::support) but also returns a maximizer.
    pub fn argmax(&self, direction: &[Rational]) -> Result<(Rational, Vec<Rational>)> {
        self.check_len(direction.len())?;
        match lp::maximize(direction, self) {
            LpOutcome::Optimal { value, point } => Ok((value, point)),
            LpOutcome::Infeasible => Err(Error::Infeasible),
            LpOutcome::Unbounded => Err(Error::Unbounded),
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(lp::maximize(&vec![Rational::zero(); self.dimension], self), LpOutcome::Infeasible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    pub(crate) fn unit_simplex_2d() -> HalfspaceSystem {
        let mut s = HalfspaceSystem::new(2);
        s.add_nonnegativity();
        s.add_inequality(vec![q("1"), q("1")], q("1")).unwrap();
        s
    }

    fn rectangle(w: &str, h: &str) -> HalfspaceSystem {
        let mut s = HalfspaceSystem::new(2);
        s.add_nonnegativity();
        s.add_inequality(vec![q("1"), q("0")], q(w)).unwrap();
        s.add_inequality(vec![q("0"), q("1")], q(h)).unwrap();
        s
    }

    #[test]
    fn membership() {
        let simplex = unit_simplex_2d();
        assert!(simplex.contains(&[q("0.5"), q("0.5")]).unwrap());
        assert!(!simplex.contains(&[q("0.7"), q("0.7")]).unwrap());
        let rect = rectangle("0.662", "0.338");
        assert!(rect.contains(&[q("0.662"), q("0.338")]).unwrap());
        assert!(!rect.contains(&[q("0.6621"), q("0.338")]).unwrap());
    }

    #[test]
    fn membership_dimension_mismatch() {
        let simplex = unit_simplex_2d();
        assert!(matches!(simplex.contains(&[q("0.5")]), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
        let mut s = HalfspaceSystem::new(2);
        assert!(s.add_inequality(vec![q("1")], q("1")).is_err());
    }

    #[test]
    fn support_values() {
        assert_eq!(rectangle("0.6", "0.4").support(&[q("1"), q("0")]).unwrap(), q("0.6"));
        assert_eq!(unit_simplex_2d().support(&[q("1"), q("1")]).unwrap(), q("1"));
    }

    #[test]
    fn support_errors() {
        let mut open = HalfspaceSystem::new(2);
        open.add_nonnegativity();
        assert!(matches!(open.support(&[q("1"), q("0")]), Err(Error::Unbounded)));
        let mut empty = HalfspaceSystem::new(1);
        empty.add_inequality(vec![q("1")], q("-1")).unwrap();
        empty.add_nonnegativity();
        assert!(matches!(empty.support(&[q("1")]), Err(Error::Infeasible)));
        assert!(!empty.is_feasible());
    }

    #[test]
    fn json_round_trip_uses_fraction_strings() {
        let s = rectangle("0.6", "0.4");
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"3/5\""));
        let back: HalfspaceSystem = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        back.validate().unwrap();
    }
}
