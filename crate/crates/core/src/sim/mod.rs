//! Synthetic populations of agents with incomplete preferences.
//!
//! Every agent gets its own ChaCha8 stream (`seed`, stream = agent index),
//! so a run is reproducible bit for bit and does not depend on how the work
//! is split across threads. Runs aggregate into integer tallies.

mod report;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::choice::{nondominated_mask, UtilityInterval};
use crate::error::{invalid, Result};
use crate::exec::ExecutionMode;
use crate::knightian::{PriorSet, StateUtility};
use crate::rational::Rational;

pub use report::{
    iv_experiment, verify_artstein, ArtsteinCheck, InstrumentSummary, IvExperiment, SelectionRow, SimulationReport, SlackRow, SubsetShare,
    Tally,
};

pub const DEFAULT_SEED: u64 = 0x5e71d;
pub const MAX_SIM_ALTERNATIVES: usize = 10;

/// A univariate distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Constant { value: f64 },
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
    Logistic { location: f64, scale: f64 },
    Exponential { rate: f64 },
    HalfNormal { scale: f64 },
}

impl Family {
    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match *self {
            Family::Constant { value } => finite(&[value]),
            Family::Normal { mean, sd } => finite(&[mean, sd]) && sd >= 0.0,
            Family::Uniform { low, high } => finite(&[low, high]) && low <= high,
            Family::Logistic { location, scale } => finite(&[location, scale]) && scale > 0.0,
            Family::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Family::HalfNormal { scale } => scale.is_finite() && scale >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid distribution parameters: {self:?}")))
        }
    }

    fn is_nonnegative(&self) -> bool {
        match *self {
            Family::Constant { value } => value >= 0.0,
            Family::Uniform { low, .. } => low >= 0.0,
            Family::Exponential { .. } | Family::HalfNormal { .. } => true,
            Family::Normal { mean, sd } => sd == 0.0 && mean >= 0.0,
            Family::Logistic { .. } => false,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Family::Constant { value } => value,
            Family::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            Family::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Family::Logistic { location, scale } => {
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                location + scale * (u / (1.0 - u)).ln()
            }
            Family::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
            Family::HalfNormal { scale } => (scale * Normal::new(0.0, 1.0).expect("unit normal").sample(rng)).abs(),
        }
    }
}

/// How agents' nondominated sets arise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreferenceModel {
    /// Utility intervals `[m - w, m + w]`.
    Interval { midpoints: Vec<Family>, half_widths: Vec<Family> },
    /// Bewley comparison of state-contingent utilities under a fixed prior set.
    /// Draws are rounded to a grid of `1e-6` before the exact comparison.
    Knightian { prior: PriorSet, state_utilities: Vec<Vec<Family>> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionRule {
    /// Uniformly at random from the nondominated set.
    #[default]
    Uniform,
    /// First nondominated alternative in the (instrument-dependent) list order.
    FirstOnList,
    /// The nondominated alternative with the smallest worst-case regret.
    MinmaxRegret,
    /// Abstains with `probability` when the nondominated set has more than one
    /// element, and otherwise picks uniformly.
    AbstainWhenUndecided { probability: f64 },
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentValue {
    pub label: String,
    /// Ballot order used by `first_on_list`; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    /// Added to every utility of each alternative for agents with this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub alternatives: usize,
    pub preferences: PreferenceModel,
    #[serde(default)]
    pub rule: SelectionRule,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instrument: Vec<InstrumentValue>,
    pub size: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.alternatives;
        if n == 0 || n > MAX_SIM_ALTERNATIVES {
            return Err(invalid(format!("alternatives must be in 1..={MAX_SIM_ALTERNATIVES}")));
        }
        if self.size == 0 {
            return Err(invalid("population size must be at least 1"));
        }
        match &self.preferences {
            PreferenceModel::Interval { midpoints, half_widths } => {
                if midpoints.len() != n || half_widths.len() != n {
                    return Err(invalid("need one midpoint and one half-width distribution per alternative"));
                }
                for f in midpoints.iter().chain(half_widths) {
                    f.validate()?;
                }
                if let Some(bad) = half_widths.iter().find(|f| !f.is_nonnegative()) {
                    return Err(invalid(format!("half-width distribution can go negative: {bad:?}")));
                }
            }
            PreferenceModel::Knightian { prior, state_utilities } => {
                if state_utilities.len() != n {
                    return Err(invalid("need one row of state utilities per alternative"));
                }
                for row in state_utilities {
                    if row.len() != prior.states() {
                        return Err(invalid("state utility rows must match the prior's state count"));
                    }
                    for f in row {
                        f.validate()?;
                    }
                }
            }
        }
        if let SelectionRule::AbstainWhenUndecided { probability } = self.rule {
            if !(0.0..=1.0).contains(&probability) {
                return Err(invalid("abstention probability must lie in [0, 1]"));
            }
        }
        for z in &self.instrument {
            if !(z.weight.is_finite() && z.weight > 0.0) {
                return Err(invalid(format!("instrument {:?}: weight must be positive", z.label)));
            }
            if let Some(order) = &z.order {
                let mut sorted = order.clone();
                sorted.sort_unstable();
                if sorted != (0..n).collect::<Vec<_>>() {
                    return Err(invalid(format!("instrument {:?}: order must be a permutation of 0..{n}", z.label)));
                }
            }
            if let Some(shift) = &z.shift {
                if shift.len() != n || shift.iter().any(|s| !s.is_finite()) {
                    return Err(invalid(format!("instrument {:?}: need {n} finite shifts", z.label)));
                }
            }
        }
        Ok(())
    }

    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn instrument_count(&self) -> usize {
        self.instrument.len().max(1)
    }
}

/// One simulated decision maker before choosing.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub index: u64,
    /// Position in the instrument list, if any.
    pub z: Option<usize>,
    /// Utility intervals (for Knightian agents: the range of expected
    /// utilities over the prior set).
    pub intervals: Vec<UtilityInterval>,
    /// Nondominated set as a bitmask.
    pub mask: u32,
    pub order: Vec<usize>,
}

impl Agent {
    pub fn members(&self) -> Vec<usize> {
        (0..self.intervals.len()).filter(|&a| self.mask & (1 << a) != 0).collect()
    }
}

/// A choice rule. `None` means the agent abstains.
pub trait Selector: Sync {
    fn select(&self, agent: &Agent, rng: &mut ChaCha8Rng) -> Option<usize>;
}

fn uniform_member(agent: &Agent, rng: &mut ChaCha8Rng) -> usize {
    let members = agent.members();
    members[rng.random_range(0..members.len())]
}

impl Selector for SelectionRule {
    fn select(&self, agent: &Agent, rng: &mut ChaCha8Rng) -> Option<usize> {
        match *self {
            SelectionRule::Uniform => Some(uniform_member(agent, rng)),
            SelectionRule::FirstOnList => agent.order.iter().copied().find(|&a| agent.mask & (1 << a) != 0),
            SelectionRule::MinmaxRegret => {
                let iv = &agent.intervals;
                let regret =
                    |a: usize| (0..iv.len()).filter(|&b| b != a).map(|b| iv[b].upper - iv[a].lower).fold(f64::NEG_INFINITY, f64::max);
                agent.members().into_iter().map(|a| (regret(a), a)).min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1))).map(|(_, a)| a)
            }
            SelectionRule::AbstainWhenUndecided { probability } => {
                if agent.mask.count_ones() > 1 && rng.random::<f64>() < probability {
                    None
                } else {
                    Some(uniform_member(agent, rng))
                }
            }
        }
    }
}

const GRID: f64 = 1e6;

fn to_grid(x: f64) -> i64 {
    (x * GRID).round() as i64
}

/// Prior vertices scaled to integers over a common denominator, so Bewley
/// comparisons of grid utilities are exact in `i128`.
#[derive(Debug, Clone)]
struct IntegerPriors {
    weights: Vec<Vec<i128>>,
}

impl IntegerPriors {
    fn new(prior: &PriorSet) -> Result<Self> {
        let mut common = BigInt::one();
        for p in prior.vertices().iter().flatten() {
            common = common.lcm(p.denom());
        }
        let weights = prior
            .vertices()
            .iter()
            .map(|v| {
                v.iter()
                    .map(|p| {
                        (p.numer() * (&common / p.denom()))
                            .to_i128()
                            .filter(|w| w.abs() < 1 << 60)
                            .ok_or_else(|| invalid("prior probabilities have too large denominators"))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(IntegerPriors { weights })
    }

    fn mask(&self, utilities: &[Vec<i64>]) -> u32 {
        let n = utilities.len();
        let beats = |b: usize, a: usize| {
            self.weights
                .iter()
                .map(|w| w.iter().zip(&utilities[b]).zip(&utilities[a]).map(|((w, ub), ua)| w * (*ub as i128 - *ua as i128)).sum::<i128>())
                .min()
                .expect("nonempty prior set")
                > 0
        };
        (0..n).filter(|&a| !(0..n).any(|b| b != a && beats(b, a))).fold(0, |m, a| m | (1 << a))
    }
}

/// A validated spec ready to draw from.
#[derive(Debug, Clone)]
pub struct Population {
    spec: PopulationSpec,
    seed: u64,
    cumulative_weights: Vec<f64>,
    integer_priors: Option<IntegerPriors>,
}

impl Population {
    pub fn new(spec: PopulationSpec) -> Result<Self> {
        Self::with_seed(spec.effective_seed(), spec)
    }

    pub fn with_seed(seed: u64, spec: PopulationSpec) -> Result<Self> {
        spec.validate()?;
        let total: f64 = spec.instrument.iter().map(|z| z.weight).sum();
        let mut acc = 0.0;
        let cumulative_weights = spec
            .instrument
            .iter()
            .map(|z| {
                acc += z.weight / total;
                acc
            })
            .collect();
        let integer_priors = match &spec.preferences {
            PreferenceModel::Knightian { prior, .. } => Some(IntegerPriors::new(prior)?),
            PreferenceModel::Interval { .. } => None,
        };
        Ok(Population { spec, seed, cumulative_weights, integer_priors })
    }

    pub fn spec(&self) -> &PopulationSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn rng_for(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    fn draw_instrument(&self, rng: &mut ChaCha8Rng) -> Option<usize> {
        if self.spec.instrument.is_empty() {
            return None;
        }
        let u: f64 = rng.random();
        Some(self.cumulative_weights.iter().position(|&c| u < c).unwrap_or(self.cumulative_weights.len() - 1))
    }

    fn draw(&self, index: u64, rng: &mut ChaCha8Rng) -> Agent {
        let n = self.spec.alternatives;
        let z = self.draw_instrument(rng);
        let value = z.map(|k| &self.spec.instrument[k]);
        let shift = |a: usize| value.and_then(|v| v.shift.as_ref()).map_or(0.0, |s| s[a]);
        let order = value.and_then(|v| v.order.clone()).unwrap_or_else(|| (0..n).collect());
        let (intervals, mask) = match &self.spec.preferences {
            PreferenceModel::Interval { midpoints, half_widths } => {
                let intervals: Vec<UtilityInterval> = (0..n)
                    .map(|a| {
                        let m = midpoints[a].sample(rng) + shift(a);
                        let w = half_widths[a].sample(rng);
                        UtilityInterval::centered(m, w).expect("finite draws")
                    })
                    .collect();
                let mask = nondominated_mask(&intervals);
                (intervals, mask)
            }
            PreferenceModel::Knightian { prior, state_utilities } => {
                let utilities = self.knightian_draw(state_utilities, &shift, rng);
                let intervals = utilities
                    .iter()
                    .map(|u| {
                        let values =
                            prior.vertices().iter().map(|p| p.iter().zip(u).map(|(pi, &ui)| pi.to_f64() * ui as f64 / GRID).sum::<f64>());
                        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                        UtilityInterval::new(lo.min(hi), hi).expect("finite draws")
                    })
                    .collect();
                let priors = self.integer_priors.as_ref().expect("built for Knightian specs");
                (intervals, priors.mask(&utilities))
            }
        };
        Agent { index, z, intervals, mask, order }
    }

    fn knightian_draw(&self, rows: &[Vec<Family>], shift: &dyn Fn(usize) -> f64, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
        rows.iter().enumerate().map(|(a, row)| row.iter().map(|f| to_grid(f.sample(rng) + shift(a))).collect()).collect()
    }

    /// State utilities of a Knightian agent as exact grid values, drawn
    /// exactly as a simulation run draws them.
    pub fn knightian_utilities(&self, index: u64) -> Option<StateUtility> {
        let PreferenceModel::Knightian { state_utilities, .. } = &self.spec.preferences else {
            return None;
        };
        let mut rng = self.rng_for(index);
        let agent_z = self.draw_instrument(&mut rng);
        let value = agent_z.map(|k| &self.spec.instrument[k]);
        let shift = |a: usize| value.and_then(|v| v.shift.as_ref()).map_or(0.0, |s| s[a]);
        let grid = self.knightian_draw(state_utilities, &shift, &mut rng);
        let rows = grid.iter().map(|r| r.iter().map(|&u| Rational::new(u, GRID as i64)).collect()).collect();
        Some(StateUtility::indexed(rows).expect("validated shape"))
    }

    /// The agent with this index, exactly as a simulation run draws it.
    pub fn agent(&self, index: u64) -> Agent {
        self.draw(index, &mut self.rng_for(index))
    }

    /// Agent plus the outcome of `selector` (`None` for abstention).
    pub fn agent_with_choice(&self, index: u64, selector: &dyn Selector) -> (Agent, Option<usize>) {
        let mut rng = self.rng_for(index);
        let agent = self.draw(index, &mut rng);
        let choice = selector.select(&agent, &mut rng);
        (agent, choice)
    }

    /// Runs the whole population through `selector`.
    pub fn run_with(&self, selector: &dyn Selector, mode: ExecutionMode) -> Tally {
        let n = self.spec.alternatives;
        let zs = self.spec.instrument_count();
        mode.fold_range(
            self.spec.size,
            || Tally::new(n, zs),
            |mut tally, index| {
                let (agent, choice) = self.agent_with_choice(index, selector);
                tally.record(agent.z.unwrap_or(0), agent.mask, choice);
                tally
            },
            Tally::merge,
        )
    }
}

/// Simulates with the spec's own rule and seed.
pub fn simulate(spec: &PopulationSpec, mode: ExecutionMode) -> Result<SimulationReport> {
    let population = Population::new(spec.clone())?;
    let tally = population.run_with(&spec.rule, mode);
    SimulationReport::from_tally(spec, population.seed(), tally)
}

/// Simulates with a custom seed and selection rule.
pub fn simulate_with(spec: &PopulationSpec, seed: u64, selector: &dyn Selector, mode: ExecutionMode) -> Result<SimulationReport> {
    let population = Population::with_seed(seed, spec.clone())?;
    let tally = population.run_with(selector, mode);
    SimulationReport::from_tally(spec, seed, tally)
}

#[cfg(test)]
mod tests;
