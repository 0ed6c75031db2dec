use super::*;
use crate::artstein::{containment_functional, subsets};
use crate::rational::q;

fn normal(mean: f64) -> Family {
    Family::Normal { mean, sd: 1.0 }
}

fn width(value: f64) -> Family {
    Family::Constant { value }
}

fn binary(mid1: f64, w: f64, rule: SelectionRule, size: u64) -> PopulationSpec {
    PopulationSpec {
        alternatives: 2,
        preferences: PreferenceModel::Interval { midpoints: vec![normal(0.0), normal(mid1)], half_widths: vec![width(w), width(w)] },
        rule,
        instrument: Vec::new(),
        size,
        seed: Some(7),
    }
}

fn ballot_orders(shift: Option<Vec<f64>>) -> Vec<InstrumentValue> {
    vec![
        InstrumentValue { label: "order01".into(), order: Some(vec![0, 1]), shift: None, weight: 1.0 },
        InstrumentValue { label: "order10".into(), order: Some(vec![1, 0]), shift, weight: 1.0 },
    ]
}

#[test]
fn complete_preferences_identify_theta() {
    let r = simulate(&binary(1.0, 0.0, SelectionRule::Uniform, 20_000), ExecutionMode::Parallel).unwrap();
    assert_eq!(r.theta[2].count, 0);
    for a in 0..2 {
        let se = (r.p[a] * (1.0 - r.p[a]) / r.size as f64).sqrt();
        assert!((r.p[a] - r.theta[a].share).abs() <= 3.0 * se);
    }
}

#[test]
fn fully_vague_population_follows_the_rule() {
    let r = simulate(&binary(0.0, 10.0, SelectionRule::Uniform, 20_000), ExecutionMode::Parallel).unwrap();
    assert!(r.theta[2].share > 0.999);
    assert!((r.p[0] - 0.5).abs() < 3.0 * (0.25 / 20_000f64).sqrt());
    let listed = simulate(&binary(0.0, 10.0, SelectionRule::FirstOnList, 20_000), ExecutionMode::Parallel).unwrap();
    assert!(listed.p[0] > 0.999);
}

#[test]
fn artstein_slacks_hold_under_uniform_selection() {
    let r = simulate(&binary(0.3, 0.5, SelectionRule::Uniform, 100_000), ExecutionMode::Parallel).unwrap();
    let check = verify_artstein(&r);
    assert!(check.passed, "{:?}", check.rows);
    assert_eq!(r.rule_violations, 0);
    assert!(r.theta[2].share > 0.1);
}

struct PickDominated;

impl Selector for PickDominated {
    fn select(&self, agent: &Agent, _rng: &mut ChaCha8Rng) -> Option<usize> {
        (0..agent.intervals.len()).find(|&a| agent.mask & (1 << a) == 0).or(Some(0))
    }
}

#[test]
fn dominated_choices_are_caught() {
    let spec = binary(0.3, 0.5, SelectionRule::Uniform, 20_000);
    let r = simulate_with(&spec, 3, &PickDominated, ExecutionMode::Parallel).unwrap();
    assert!(r.rule_violations > 0);
    assert!(!verify_artstein(&r).passed);
}

#[test]
fn single_alternative_passes_trivially() {
    let spec = PopulationSpec {
        alternatives: 1,
        preferences: PreferenceModel::Interval { midpoints: vec![normal(0.0)], half_widths: vec![width(1.0)] },
        rule: SelectionRule::Uniform,
        instrument: Vec::new(),
        size: 100,
        seed: None,
    };
    let r = simulate(&spec, ExecutionMode::Sequential).unwrap();
    assert_eq!(r.theta[0].count, 100);
    assert!(verify_artstein(&r).passed);
}

fn three_way(size: u64) -> PopulationSpec {
    PopulationSpec {
        alternatives: 3,
        preferences: PreferenceModel::Interval {
            midpoints: vec![normal(0.0), normal(0.2), Family::Uniform { low: -1.0, high: 1.5 }],
            half_widths: vec![Family::Exponential { rate: 2.0 }, Family::HalfNormal { scale: 0.4 }, width(0.3)],
        },
        rule: SelectionRule::AbstainWhenUndecided { probability: 0.25 },
        instrument: Vec::new(),
        size,
        seed: Some(11),
    }
}

#[test]
fn parallel_and_sequential_runs_are_identical() {
    let spec = three_way(5_000);
    let a = simulate(&spec, ExecutionMode::Parallel).unwrap();
    let b = simulate(&spec, ExecutionMode::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let mut other = spec.clone();
    other.seed = Some(12);
    assert_ne!(simulate(&other, ExecutionMode::Parallel).unwrap().tally, a.tally);
}

#[test]
fn containment_of_frequencies_is_exact() {
    let r = simulate(&three_way(3_000), ExecutionMode::Parallel).unwrap();
    let theta = r.theta_exact().unwrap();
    for s in subsets(3) {
        let direct = Rational::new(r.tally.count_contained(s.mask()) as i64, r.size as i64);
        assert_eq!(containment_functional(&theta, s).unwrap(), direct);
    }
    assert!(r.abstained > 0);
    assert!(verify_artstein(&r).passed);
}

#[test]
fn containment_matches_the_utility_ordering_condition() {
    let pop = Population::new(three_way(4_000)).unwrap();
    for s in subsets(3) {
        let mut by_mask = 0u64;
        let mut by_utilities = 0u64;
        for i in 0..pop.spec().size {
            let agent = pop.agent(i);
            if agent.mask & !s.mask() == 0 {
                by_mask += 1;
            }
            let best_inside = s.members().map(|a| agent.intervals[a].lower).fold(f64::NEG_INFINITY, f64::max);
            let best_outside = (0..3).filter(|&k| !s.contains(k)).map(|k| agent.intervals[k].upper).fold(f64::NEG_INFINITY, f64::max);
            if best_outside < best_inside {
                by_utilities += 1;
            }
        }
        assert_eq!(by_mask, by_utilities, "subset {}", s.key());
    }
}

#[test]
fn minmax_regret_routes_undecided_agents_by_midpoint() {
    let spec = binary(0.3, 0.8, SelectionRule::MinmaxRegret, 10_000);
    let pop = Population::new(spec.clone()).unwrap();
    let mut routed_to_0 = 0u64;
    for i in 0..spec.size {
        let (agent, choice) = pop.agent_with_choice(i, &spec.rule);
        let by_midpoint = if agent.intervals[0].midpoint_sum() > agent.intervals[1].midpoint_sum() { 0 } else { 1 };
        if agent.mask == 3 {
            assert_eq!(choice, Some(by_midpoint));
            routed_to_0 += u64::from(by_midpoint == 0);
        }
    }
    let r = simulate(&spec, ExecutionMode::Parallel).unwrap();
    assert_eq!(r.choice_counts[0], r.theta[0].count + routed_to_0);
}

#[test]
fn ballot_order_instrument_bounds_incompleteness() {
    let mut spec = binary(0.0, 1.0, SelectionRule::FirstOnList, 100_000);
    spec.instrument = ballot_orders(None);
    let r = simulate(&spec, ExecutionMode::Parallel).unwrap();
    let iv = iv_experiment(&r).unwrap();
    assert!(iv.delta0 > 0.3);
    assert!(iv.holds, "{iv:?}");
    // Perfect instrument: θ per z agrees across z.
    for k in 0..3 {
        let (a, b) = (&r.instruments[0], &r.instruments[1]);
        let se = ((a.theta[k] * (1.0 - a.theta[k])) / a.agents as f64 + (b.theta[k] * (1.0 - b.theta[k])) / b.agents as f64).sqrt();
        assert!((a.theta[k] - b.theta[k]).abs() <= 3.0 * se);
    }
}

#[test]
fn instrument_ignored_by_the_rule_has_no_power() {
    let mut spec = binary(0.0, 1.0, SelectionRule::Uniform, 100_000);
    spec.instrument = ballot_orders(None);
    let r = simulate(&spec, ExecutionMode::Parallel).unwrap();
    let iv = iv_experiment(&r).unwrap();
    assert!(iv.delta0 < 3.0 * iv.se + 0.01);
    assert!(iv.holds);
}

#[test]
fn slightly_shifted_instrument_still_bounds_incompleteness() {
    let mut spec = binary(0.0, 1.0, SelectionRule::FirstOnList, 100_000);
    spec.instrument = ballot_orders(Some(vec![0.0, 0.01]));
    let r = simulate(&spec, ExecutionMode::Parallel).unwrap();
    let iv = iv_experiment(&r).unwrap();
    assert!(iv.delta0 > iv.small_delta0 + iv.small_delta1);
    assert!(iv.bound > 0.3);
    assert!(iv.holds);
}

#[test]
fn knightian_population_satisfies_artstein() {
    let prior = PriorSet::new(vec![vec![q("0.3"), q("0.7")], vec![q("0.6"), q("0.4")]]).unwrap();
    let spec = PopulationSpec {
        alternatives: 3,
        preferences: PreferenceModel::Knightian {
            prior,
            state_utilities: vec![vec![normal(0.0), normal(0.0)], vec![normal(0.5), normal(-0.5)], vec![normal(0.2), width(0.1)]],
        },
        rule: SelectionRule::Uniform,
        instrument: Vec::new(),
        size: 20_000,
        seed: Some(5),
    };
    let r = simulate(&spec, ExecutionMode::Parallel).unwrap();
    assert!(verify_artstein(&r).passed);
    assert_eq!(r.rule_violations, 0);
    let undecided: u64 = r.theta.iter().filter(|s| s.subset.contains(',')).map(|s| s.count).sum();
    assert!(undecided > 0);

    // The integer fast path agrees with the exact rational comparison.
    let pop = Population::new(spec.clone()).unwrap();
    let PreferenceModel::Knightian { prior, .. } = &spec.preferences else { unreachable!() };
    for i in 0..500 {
        let su = pop.knightian_utilities(i).unwrap();
        assert_eq!(pop.agent(i).mask, crate::knightian::knightian_mask(&su, prior).unwrap(), "agent {i}");
    }
}

#[test]
fn spec_validation() {
    let mut spec = binary(0.0, 1.0, SelectionRule::Uniform, 10);
    spec.size = 0;
    assert!(simulate(&spec, ExecutionMode::Parallel).is_err());
    let mut neg = binary(0.0, 1.0, SelectionRule::Uniform, 10);
    neg.preferences = PreferenceModel::Interval { midpoints: vec![normal(0.0), normal(0.0)], half_widths: vec![normal(0.0), width(1.0)] };
    assert!(neg.validate().is_err());
    let mut bad_sd = binary(0.0, 1.0, SelectionRule::Uniform, 10);
    bad_sd.preferences = PreferenceModel::Interval {
        midpoints: vec![Family::Normal { mean: 0.0, sd: -1.0 }, normal(0.0)],
        half_widths: vec![width(1.0), width(1.0)],
    };
    assert!(bad_sd.validate().is_err());
    let mut bad_order = binary(0.0, 1.0, SelectionRule::FirstOnList, 10);
    bad_order.instrument = vec![InstrumentValue { label: "z".into(), order: Some(vec![0, 0]), shift: None, weight: 1.0 }];
    assert!(bad_order.validate().is_err());
}

#[test]
fn spec_json_round_trip() {
    let text = r#"{
        "alternatives": 2,
        "preferences": {"kind": "interval",
            "midpoints": [{"family": "normal", "mean": 0, "sd": 1}, {"family": "normal", "mean": 0.3, "sd": 1}],
            "half_widths": [{"family": "constant", "value": 0.5}, {"family": "constant", "value": 0.5}]},
        "rule": {"kind": "abstain_when_undecided", "probability": 0.2},
        "instrument": [{"label": "a", "order": [1, 0]}, {"label": "b", "shift": [0, 0.01], "weight": 2}],
        "size": 1000
    }"#;
    let spec: PopulationSpec = serde_json::from_str(text).unwrap();
    spec.validate().unwrap();
    assert_eq!(spec.instrument[0].weight, 1.0);
    let back: PopulationSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back, spec);
    assert_eq!(spec.effective_seed(), DEFAULT_SEED);
}
