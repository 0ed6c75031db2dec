//! Interval-order preferences for a single decision maker.
//!
//! An alternative is dominated when some other alternative's lower utility
//! lies strictly above its upper utility. An alternative whose upper utility
//! exactly equals the best lower utility is kept (weak inequality).

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polytope::{lp, HalfspaceSystem, LpOutcome};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityInterval {
    pub lower: f64,
    pub upper: f64,
}

impl UtilityInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(invalid("utility bounds must be finite"));
        }
        if lower > upper {
            return Err(invalid(format!("lower utility {lower} exceeds upper {upper}")));
        }
        Ok(UtilityInterval { lower, upper })
    }

    /// Interval `[mid - half_width, mid + half_width]`.
    pub fn centered(mid: f64, half_width: f64) -> Result<Self> {
        Self::new(mid - half_width, mid + half_width)
    }

    pub fn vagueness(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint_sum(&self) -> f64 {
        self.lower + self.upper
    }

    pub fn shifted(&self, by: f64) -> Self {
        UtilityInterval { lower: self.lower + by, upper: self.upper + by }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityProfile {
    alternatives: Vec<String>,
    intervals: Vec<UtilityInterval>,
}

impl UtilityProfile {
    pub fn new(alternatives: Vec<String>, intervals: Vec<UtilityInterval>) -> Result<Self> {
        if alternatives.is_empty() {
            return Err(invalid("profile needs at least one alternative"));
        }
        if alternatives.len() != intervals.len() {
            return Err(Error::DimensionMismatch { expected: alternatives.len(), found: intervals.len() });
        }
        let mut seen = HashSet::new();
        for name in &alternatives {
            if !seen.insert(name.as_str()) {
                return Err(invalid(format!("duplicate alternative {name:?}")));
            }
        }
        for iv in &intervals {
            UtilityInterval::new(iv.lower, iv.upper)?;
        }
        Ok(UtilityProfile { alternatives, intervals })
    }

    /// Alternatives named `a0, a1, ...`.
    pub fn indexed(intervals: Vec<UtilityInterval>) -> Result<Self> {
        let names = (0..intervals.len()).map(|i| format!("a{i}")).collect();
        Self::new(names, intervals)
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn intervals(&self) -> &[UtilityInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives.is_empty()
    }

    pub fn nondominated(&self) -> Vec<&str> {
        let mask = nondominated_mask(&self.intervals);
        (0..self.len()).filter(|i| mask & (1 << i) != 0).map(|i| self.alternatives[i].as_str()).collect()
    }

    /// `x` strictly preferred to `y`.
    pub fn prefers(&self, x: usize, y: usize) -> bool {
        self.intervals[x].lower > self.intervals[y].upper
    }
}

/// Indices of the nondominated alternatives.
pub fn nondominated_set(intervals: &[UtilityInterval]) -> Result<Vec<usize>> {
    if intervals.is_empty() {
        return Err(invalid("nondominated set of an empty profile"));
    }
    let mask = nondominated_mask(intervals);
    Ok((0..intervals.len()).filter(|i| mask & (1 << i) != 0).collect())
}

/// Bitmask form of [`nondominated_set`]; requires `1 <= len <= 32`.
pub fn nondominated_mask(intervals: &[UtilityInterval]) -> u32 {
    debug_assert!(!intervals.is_empty() && intervals.len() <= 32);
    let best_lower = intervals.iter().map(|iv| iv.lower).fold(f64::NEG_INFINITY, f64::max);
    intervals.iter().enumerate().filter(|(_, iv)| iv.upper >= best_lower).fold(0u32, |mask, (i, _)| mask | (1 << i))
}

/// Binary minmax-regret choice: the alternative with the larger `lower + upper`.
pub fn minmax_regret_choice(intervals: &[UtilityInterval]) -> Result<usize> {
    if intervals.len() != 2 {
        return Err(invalid(format!("minmax regret needs exactly 2 alternatives, got {}", intervals.len())));
    }
    let exact = |v: f64| Rational::from_f64(v).expect("finite utility");
    let (a0, a1) = (&intervals[0], &intervals[1]);
    // Worst-case regret of picking a0 is upper(a1) - lower(a0), and symmetrically.
    // Evaluated exactly so ties are real ties.
    let regret0 = exact(a1.upper) - exact(a0.lower);
    let regret1 = exact(a0.upper) - exact(a1.lower);
    if regret0 < regret1 {
        Ok(0)
    } else if regret1 < regret0 {
        Ok(1)
    } else {
        Err(Error::Tie("equal maximal regret".into()))
    }
}

/// A strict relation `worse ≺ better` over a finite ground set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictRelation {
    ground: Vec<String>,
    pairs: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum IntervalOrderCheck {
    Holds,
    /// `x ≺ y` and `z ≺ w` but neither `x ≺ w` nor `z ≺ y`.
    Violated {
        x: String,
        y: String,
        z: String,
        w: String,
    },
}

impl IntervalOrderCheck {
    pub fn holds(&self) -> bool {
        matches!(self, IntervalOrderCheck::Holds)
    }
}

impl StrictRelation {
    pub fn new(ground: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for name in &ground {
            if !seen.insert(name.as_str()) {
                return Err(invalid(format!("duplicate element {name:?}")));
            }
        }
        Ok(StrictRelation { ground, pairs: BTreeSet::new() })
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.ground.iter().position(|g| g == name).ok_or_else(|| invalid(format!("unknown element {name:?}")))
    }

    /// Records `worse ≺ better`.
    pub fn add(&mut self, worse: &str, better: &str) -> Result<()> {
        let (x, y) = (self.index(worse)?, self.index(better)?);
        if x == y {
            return Err(invalid(format!("{worse} ≺ {worse} violates irreflexivity")));
        }
        self.pairs.insert((x, y));
        Ok(())
    }

    pub fn with_pairs(ground: &[&str], pairs: &[(&str, &str)]) -> Result<Self> {
        let mut rel = Self::new(ground.iter().map(|s| s.to_string()).collect())?;
        for (w, b) in pairs {
            rel.add(w, b)?;
        }
        Ok(rel)
    }

    pub fn relates(&self, worse: usize, better: usize) -> bool {
        self.pairs.contains(&(worse, better))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|&(x, y)| (self.ground[x].as_str(), self.ground[y].as_str()))
    }

    /// The relation induced by a profile: `x ≺ y` iff `upper(x) < lower(y)`.
    pub fn from_profile(profile: &UtilityProfile) -> Self {
        let n = profile.len();
        let mut pairs = BTreeSet::new();
        for x in 0..n {
            for y in 0..n {
                if profile.prefers(y, x) {
                    pairs.insert((x, y));
                }
            }
        }
        StrictRelation { ground: profile.alternatives().to_vec(), pairs }
    }

    /// Exhaustive check of irreflexivity and the interval-order condition.
    pub fn is_interval_order(&self) -> IntervalOrderCheck {
        let name = |i: usize| self.ground[i].clone();
        if let Some(&(x, _)) = self.pairs.iter().find(|(a, b)| a == b) {
            return IntervalOrderCheck::Violated { x: name(x), y: name(x), z: name(x), w: name(x) };
        }
        for &(x, y) in &self.pairs {
            for &(z, w) in &self.pairs {
                if !self.relates(x, w) && !self.relates(z, y) {
                    return IntervalOrderCheck::Violated { x: name(x), y: name(y), z: name(z), w: name(w) };
                }
            }
        }
        IntervalOrderCheck::Holds
    }

    /// Integer-valued intervals representing the relation, with every strict
    /// gap at least 1. `None` when the relation is not an interval order.
    pub fn fishburn_representation(&self) -> Option<UtilityProfile> {
        let n = self.ground.len();
        if n == 0 {
            return None;
        }
        // Variables: lower_0..lower_{n-1}, upper_0..upper_{n-1}.
        let dim = 2 * n;
        let lo = |i: usize| i;
        let up = |i: usize| n + i;
        let mut sys = HalfspaceSystem::new(dim);
        sys.add_nonnegativity();
        let row = |entries: &[(usize, i64)]| {
            let mut c = vec![Rational::zero(); dim];
            for &(j, v) in entries {
                c[j] = Rational::from_integer(v);
            }
            c
        };
        for x in 0..n {
            sys.add_inequality(row(&[(lo(x), 1), (up(x), -1)]), Rational::zero()).ok()?;
            for y in 0..n {
                if x == y {
                    continue;
                }
                if self.relates(x, y) {
                    sys.add_inequality(row(&[(up(x), 1), (lo(y), -1)]), Rational::from_integer(-1)).ok()?;
                } else {
                    sys.add_inequality(row(&[(lo(y), 1), (up(x), -1)]), Rational::zero()).ok()?;
                }
            }
        }
        let mut objective = vec![Rational::zero(); dim];
        for x in 0..n {
            objective[up(x)] = Rational::from_integer(-1);
        }
        match lp::maximize(&objective, &sys) {
            LpOutcome::Optimal { point, .. } => {
                let intervals = (0..n).map(|x| UtilityInterval { lower: point[lo(x)].to_f64(), upper: point[up(x)].to_f64() }).collect();
                UtilityProfile::new(self.ground.clone(), intervals).ok()
            }
            _ => None,
        }
    }
}
