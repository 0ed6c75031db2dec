use serde::{Deserialize, Serialize};

use super::PopulationSpec;
use crate::artstein::{subsets, ChoiceParamVector, SubsetIndex};
use crate::error::{invalid, Result};
use crate::rational::Rational;

/// Agent counts by instrument value, nondominated set and outcome.
///
/// The outcome index `n` stands for abstention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub alternatives: usize,
    pub instrument_values: usize,
    pub cells: Vec<u64>,
}

impl Tally {
    pub fn new(alternatives: usize, instrument_values: usize) -> Self {
        let masks = (1usize << alternatives) - 1;
        Tally { alternatives, instrument_values, cells: vec![0; instrument_values * masks * (alternatives + 1)] }
    }

    fn masks(&self) -> usize {
        (1usize << self.alternatives) - 1
    }

    fn index(&self, z: usize, mask: u32, outcome: usize) -> usize {
        (z * self.masks() + (mask as usize - 1)) * (self.alternatives + 1) + outcome
    }

    pub fn record(&mut self, z: usize, mask: u32, choice: Option<usize>) {
        let outcome = choice.unwrap_or(self.alternatives);
        let i = self.index(z, mask, outcome);
        self.cells[i] += 1;
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.cells.iter_mut().zip(other.cells) {
            *a += b;
        }
        self
    }

    pub fn get(&self, z: usize, mask: u32, outcome: usize) -> u64 {
        self.cells[self.index(z, mask, outcome)]
    }

    /// Iterates `(z, mask, outcome, count)` over nonzero cells.
    pub fn entries(&self) -> impl Iterator<Item = (usize, u32, usize, u64)> + '_ {
        let per_mask = self.alternatives + 1;
        let masks = self.masks();
        self.cells.iter().enumerate().filter(|(_, &c)| c > 0).map(move |(i, &c)| {
            let outcome = i % per_mask;
            let mask = ((i / per_mask) % masks + 1) as u32;
            let z = i / (per_mask * masks);
            (z, mask, outcome, c)
        })
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    fn sum_where(&self, keep: impl Fn(usize, u32, usize) -> bool) -> u64 {
        self.entries().filter(|&(z, m, o, _)| keep(z, m, o)).map(|e| e.3).sum()
    }

    /// Agents whose nondominated set lies inside `target`.
    pub fn count_contained(&self, target: u32) -> u64 {
        self.sum_where(|_, m, _| m & !target == 0)
    }

    /// Agents whose choice lies outside their nondominated set.
    pub fn violations(&self) -> u64 {
        let n = self.alternatives;
        self.sum_where(|_, m, o| o < n && m & (1 << o) == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetShare {
    pub subset: String,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentSummary {
    pub label: String,
    pub agents: u64,
    pub p: Vec<f64>,
    pub gamma: f64,
    /// `θ_{A|z}` in subset mask order.
    pub theta: Vec<f64>,
}

/// Empirical `q(a | M = A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub subset: String,
    pub agents: u64,
    pub q: Vec<f64>,
    pub abstain: f64,
}

/// `P̂(y ∈ A) - Ĉ_M(A)` among agents whose choice is observed, with the
/// standard error of the mean of the per-agent paired difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackRow {
    pub subset: String,
    pub prob_in_subset: f64,
    pub containment: f64,
    pub slack: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub alternatives: usize,
    pub size: u64,
    pub seed: u64,
    /// Population share of each nondominated set, in subset mask order.
    pub theta: Vec<SubsetShare>,
    /// Choice shares among agents who chose.
    pub p: Vec<f64>,
    pub choice_counts: Vec<u64>,
    pub abstained: u64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instruments: Vec<InstrumentSummary>,
    /// `sup_z p̂0|z - inf_z p̂0|z` (two alternatives with an instrument).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    /// `θ̂0 - inf_z θ̂0|z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_delta0: Option<f64>,
    /// `θ̂1 - inf_z θ̂1|z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_delta1: Option<f64>,
    pub selection: Vec<SelectionRow>,
    pub slack: Vec<SlackRow>,
    pub rule_violations: u64,
    pub tally: Tally,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl SimulationReport {
    pub fn from_tally(spec: &PopulationSpec, seed: u64, tally: Tally) -> Result<Self> {
        let n = spec.alternatives;
        if tally.alternatives != n || tally.instrument_values != spec.instrument_count() {
            return Err(invalid("tally shape does not match the population spec"));
        }
        let size = tally.total();
        let all = || subsets(n);

        let theta = all()
            .map(|s| {
                let count = tally.sum_where(|_, m, _| m == s.mask());
                SubsetShare { subset: s.key(), count, share: ratio(count, size) }
            })
            .collect();
        let choice_counts: Vec<u64> = (0..n).map(|a| tally.sum_where(|_, _, o| o == a)).collect();
        let chosen: u64 = choice_counts.iter().sum();
        let abstained = size - chosen;
        let p = choice_counts.iter().map(|&c| ratio(c, chosen)).collect();

        let instruments: Vec<InstrumentSummary> = spec
            .instrument
            .iter()
            .enumerate()
            .map(|(z, value)| {
                let agents = tally.sum_where(|zz, _, _| zz == z);
                let counts: Vec<u64> = (0..n).map(|a| tally.sum_where(|zz, _, o| zz == z && o == a)).collect();
                let chosen_z: u64 = counts.iter().sum();
                InstrumentSummary {
                    label: value.label.clone(),
                    agents,
                    p: counts.iter().map(|&c| ratio(c, chosen_z)).collect(),
                    gamma: ratio(agents - chosen_z, agents),
                    theta: all().map(|s| ratio(tally.sum_where(|zz, m, _| zz == z && m == s.mask()), agents)).collect(),
                }
            })
            .collect();

        let (mut delta0, mut small_delta0, mut small_delta1) = (None, None, None);
        let observed: Vec<&InstrumentSummary> = instruments.iter().filter(|s| s.agents > 0).collect();
        if n == 2 && !observed.is_empty() {
            let p0s = observed.iter().map(|s| s.p[0]);
            let sup = p0s.clone().fold(f64::NEG_INFINITY, f64::max);
            let inf = p0s.fold(f64::INFINITY, f64::min);
            delta0 = Some(sup - inf);
            let theta0 = ratio(tally.sum_where(|_, m, _| m == 1), size);
            let theta1 = ratio(tally.sum_where(|_, m, _| m == 2), size);
            let inf_t0 = observed.iter().map(|s| s.theta[0]).fold(f64::INFINITY, f64::min);
            let inf_t1 = observed.iter().map(|s| s.theta[1]).fold(f64::INFINITY, f64::min);
            small_delta0 = Some(theta0 - inf_t0);
            small_delta1 = Some(theta1 - inf_t1);
        }

        let selection = all()
            .map(|s| {
                let agents = tally.sum_where(|_, m, _| m == s.mask());
                SelectionRow {
                    subset: s.key(),
                    agents,
                    q: (0..n).map(|a| ratio(tally.sum_where(|_, m, o| m == s.mask() && o == a), agents)).collect(),
                    abstain: ratio(tally.sum_where(|_, m, o| m == s.mask() && o == n), agents),
                }
            })
            .collect();

        let slack = all()
            .map(|s| {
                let a = s.mask();
                let in_a = |o: usize| o < n && a & (1 << o) != 0;
                let observed = |o: usize| o < n;
                let plus = tally.sum_where(|_, m, o| in_a(o) && m & !a != 0);
                let minus = tally.sum_where(|_, m, o| observed(o) && !in_a(o) && m & !a == 0);
                let prob = ratio(tally.sum_where(|_, _, o| in_a(o)), chosen);
                let contained = ratio(tally.sum_where(|_, m, o| observed(o) && m & !a == 0), chosen);
                let mean = ratio(plus, chosen) - ratio(minus, chosen);
                let second = ratio(plus + minus, chosen);
                let se = if chosen == 0 { 0.0 } else { ((second - mean * mean).max(0.0) / chosen as f64).sqrt() };
                SlackRow { subset: s.key(), prob_in_subset: prob, containment: contained, slack: mean, se }
            })
            .collect();

        Ok(SimulationReport {
            alternatives: n,
            size,
            seed,
            theta,
            p,
            choice_counts,
            abstained,
            gamma: ratio(abstained, size),
            instruments,
            delta0,
            small_delta0,
            small_delta1,
            selection,
            slack,
            rule_violations: tally.violations(),
            tally,
        })
    }

    /// Population frequencies of each nondominated set as exact fractions.
    pub fn theta_exact(&self) -> Result<ChoiceParamVector> {
        let size = Rational::from_integer(self.size as i64);
        let masses = self.theta.iter().map(|s| Rational::from_integer(s.count as i64) / &size).collect();
        ChoiceParamVector::new(self.alternatives, masses)
    }

    pub fn theta_share(&self, subset: SubsetIndex) -> f64 {
        self.theta[subset.coordinate()].share
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtsteinRow {
    pub subset: String,
    pub slack: f64,
    pub se: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtsteinCheck {
    pub rows: Vec<ArtsteinRow>,
    pub passed: bool,
}

/// Flags subsets whose slack is below `-3` standard errors.
pub fn verify_artstein(report: &SimulationReport) -> ArtsteinCheck {
    let rows: Vec<ArtsteinRow> = report
        .slack
        .iter()
        .map(|r| ArtsteinRow { subset: r.subset.clone(), slack: r.slack, se: r.se, passed: r.slack >= -3.0 * r.se })
        .collect();
    let passed = rows.iter().all(|r| r.passed);
    ArtsteinCheck { rows, passed }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvExperiment {
    pub delta0: f64,
    pub small_delta0: f64,
    pub small_delta1: f64,
    pub theta01: f64,
    /// `Δ̂0 - δ̂0 - δ̂1`
    pub bound: f64,
    pub se: f64,
    /// `θ̂01 >= bound - 3 se`
    pub holds: bool,
}

/// Checks the lower bound on `θ01` implied by the instrument.
pub fn iv_experiment(report: &SimulationReport) -> Result<IvExperiment> {
    if report.alternatives != 2 {
        return Err(invalid("the instrument experiment needs exactly two alternatives"));
    }
    let (Some(delta0), Some(d0), Some(d1)) = (report.delta0, report.small_delta0, report.small_delta1) else {
        return Err(invalid("the instrument experiment needs an instrument"));
    };
    let theta01 = report.theta[2].share;
    let bin_var = |p: f64, n: u64| if n == 0 { 0.0 } else { p * (1.0 - p) / n as f64 };
    let live: Vec<&InstrumentSummary> = report.instruments.iter().filter(|s| s.agents > 0).collect();
    let observed_in = |s: &InstrumentSummary| ((1.0 - s.gamma) * s.agents as f64).round() as u64;
    let mut var = bin_var(theta01, report.size) + bin_var(report.theta[0].share, report.size) + bin_var(report.theta[1].share, report.size);
    let extreme = |key: &dyn Fn(&InstrumentSummary) -> f64, max: bool| {
        live.iter()
            .copied()
            .max_by(|a, b| if max { key(a).total_cmp(&key(b)) } else { key(b).total_cmp(&key(a)) })
            .expect("an instrument value with agents")
    };
    let hi = extreme(&|s| s.p[0], true);
    let lo = extreme(&|s| s.p[0], false);
    var += bin_var(hi.p[0], observed_in(hi)) + bin_var(lo.p[0], observed_in(lo));
    let t0 = extreme(&|s| s.theta[0], false);
    let t1 = extreme(&|s| s.theta[1], false);
    var += bin_var(t0.theta[0], t0.agents) + bin_var(t1.theta[1], t1.agents);
    let se = var.sqrt();
    let bound = delta0 - d0 - d1;
    Ok(IvExperiment { delta0, small_delta0: d0, small_delta1: d1, theta01, bound, se, holds: theta01 >= bound - 3.0 * se })
}
