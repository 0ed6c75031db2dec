//! Bewley preferences: `x ≻ y` iff `E_π[u(x)] > E_π[u(y)]` for every prior
//! `π` in a convex set `Π`, given by its vertices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polytope::{vertices_2d, HalfspaceSystem};
use crate::rational::Rational;

/// Utility of each alternative in each state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateUtility {
    pub states: Vec<String>,
    pub alternatives: Vec<String>,
    /// `utilities[a][s]`
    pub utilities: Vec<Vec<Rational>>,
}

impl StateUtility {
    pub fn new(states: Vec<String>, alternatives: Vec<String>, utilities: Vec<Vec<Rational>>) -> Result<Self> {
        let su = StateUtility { states, alternatives, utilities };
        su.validate()?;
        Ok(su)
    }

    /// States and alternatives named by position.
    pub fn indexed(utilities: Vec<Vec<Rational>>) -> Result<Self> {
        let n_states = utilities.first().map_or(0, Vec::len);
        Self::new((0..n_states).map(|s| format!("s{s}")).collect(), (0..utilities.len()).map(|a| format!("a{a}")).collect(), utilities)
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(invalid("state space is empty"));
        }
        if self.alternatives.is_empty() {
            return Err(invalid("no alternatives"));
        }
        if self.utilities.len() != self.alternatives.len() {
            return Err(Error::DimensionMismatch { expected: self.alternatives.len(), found: self.utilities.len() });
        }
        for row in &self.utilities {
            if row.len() != self.states.len() {
                return Err(Error::DimensionMismatch { expected: self.states.len(), found: row.len() });
            }
        }
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.alternatives.iter().position(|a| a == name).ok_or_else(|| invalid(format!("unknown alternative {name:?}")))
    }
}

/// A convex set of priors over states, stored by vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPriorSet")]
pub struct PriorSet {
    vertices: Vec<Vec<Rational>>,
}

#[derive(Deserialize)]
struct RawPriorSet {
    vertices: Vec<Vec<Rational>>,
}

impl TryFrom<RawPriorSet> for PriorSet {
    type Error = Error;

    fn try_from(raw: RawPriorSet) -> Result<Self> {
        PriorSet::new(raw.vertices)
    }
}

impl PriorSet {
    pub fn new(vertices: Vec<Vec<Rational>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(invalid("prior set has no vertices"));
        };
        let dim = first.len();
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            if v.iter().any(|p| p.is_negative()) || v.iter().sum::<Rational>() != 1 {
                return Err(invalid(format!("prior {v:?} is not a probability vector")));
            }
        }
        Ok(PriorSet { vertices })
    }

    pub fn singleton(prior: Vec<Rational>) -> Result<Self> {
        Self::new(vec![prior])
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn states(&self) -> usize {
        self.vertices[0].len()
    }

    /// Vertices of `{π ∈ Δ(S) : sys}` for at most three states. Simplex
    /// constraints are added here.
    pub fn from_halfspaces(sys: &HalfspaceSystem) -> Result<Self> {
        sys.validate()?;
        let s = sys.dimension;
        let one = Rational::one;
        let zero = Rational::zero;
        match s {
            1 => {
                let p = vec![one()];
                if !sys.contains(&p)? {
                    return Err(Error::Infeasible);
                }
                Self::new(vec![p])
            }
            2 | 3 => {
                // Eliminate the last coordinate: π_last = 1 - Σ others.
                let mut reduced = HalfspaceSystem::new(2);
                let project = |coeffs: &[Rational]| -> (Vec<Rational>, Rational) {
                    let last = &coeffs[s - 1];
                    let mut c: Vec<Rational> = coeffs[..s - 1].iter().map(|a| a - last).collect();
                    if s == 2 {
                        c.push(zero());
                    }
                    (c, last.clone())
                };
                for h in &sys.inequalities {
                    let (c, shift) = project(&h.coeffs);
                    reduced.add_inequality(c, &h.bound - shift)?;
                }
                for e in &sys.equalities {
                    let (c, shift) = project(&e.coeffs);
                    reduced.add_equality(c, &e.value - shift)?;
                }
                reduced.add_nonnegativity();
                let mut sum = vec![one(); s - 1];
                if s == 2 {
                    sum.push(zero());
                    // Pin the unused second coordinate.
                    reduced.add_equality(vec![zero(), one()], zero())?;
                }
                reduced.add_inequality(sum, one())?;
                let region = vertices_2d(&reduced)?;
                let vertices = region
                    .vertices()
                    .iter()
                    .map(|v| {
                        let mut p = vec![v.x.clone()];
                        if s == 3 {
                            p.push(v.y.clone());
                        }
                        let rest: Rational = p.iter().sum();
                        p.push(one() - rest);
                        p
                    })
                    .collect();
                Self::new(vertices)
            }
            _ => Err(invalid("halfspace prior sets are supported for at most three states")),
        }
    }
}

fn expected(prior: &[Rational], utility: &[Rational]) -> Rational {
    prior.iter().zip(utility).map(|(p, u)| p * u).sum()
}

/// `min_{π ∈ Π} E_π[u(x) - u(y)]`, attained at a vertex.
pub fn min_expected_difference(x: usize, y: usize, su: &StateUtility, prior: &PriorSet) -> Result<Rational> {
    su.validate()?;
    if prior.states() != su.states.len() {
        return Err(Error::DimensionMismatch { expected: su.states.len(), found: prior.states() });
    }
    for i in [x, y] {
        if i >= su.alternatives.len() {
            return Err(invalid(format!("alternative index {i} out of range")));
        }
    }
    let diff: Vec<Rational> = su.utilities[x].iter().zip(&su.utilities[y]).map(|(a, b)| a - b).collect();
    Ok(prior.vertices.iter().map(|v| expected(v, &diff)).min().expect("nonempty prior set"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    FirstPreferred,
    SecondPreferred,
    Incomparable,
}

/// A zero minimum counts as incomparable.
pub fn bewley_prefers(x: usize, y: usize, su: &StateUtility, prior: &PriorSet) -> Result<Comparison> {
    if min_expected_difference(x, y, su, prior)?.is_positive() {
        Ok(Comparison::FirstPreferred)
    } else if min_expected_difference(y, x, su, prior)?.is_positive() {
        Ok(Comparison::SecondPreferred)
    } else {
        Ok(Comparison::Incomparable)
    }
}

/// Alternatives that no other alternative Bewley-dominates.
pub fn knightian_nondominated(su: &StateUtility, prior: &PriorSet) -> Result<Vec<usize>> {
    let n = su.alternatives.len();
    let mut out = Vec::new();
    for a in 0..n {
        let mut dominated = false;
        for b in (0..n).filter(|&b| b != a) {
            if min_expected_difference(b, a, su, prior)?.is_positive() {
                dominated = true;
                break;
            }
        }
        if !dominated {
            out.push(a);
        }
    }
    Ok(out)
}

/// Bitmask form of [`knightian_nondominated`].
pub fn knightian_mask(su: &StateUtility, prior: &PriorSet) -> Result<u32> {
    Ok(knightian_nondominated(su, prior)?.into_iter().fold(0, |m, a| m | (1 << a)))
}
