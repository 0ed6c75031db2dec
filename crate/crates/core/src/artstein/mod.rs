//! The sharp identification region for the distribution of nondominated sets.
//!
//! Coordinates are indexed by nonempty subsets of the alternatives, encoded
//! as bitmasks `1 ..= 2^n - 1`; coordinate `k` of every system built here
//! is the mass on the subset with mask `k + 1`. The sharp region keeps one
//! containment inequality per nonempty subset,
//! `sum_{A' ⊆ A} θ_{A'} <= P(y ∈ A)`, on top of the simplex. The
//! relaxation Θ¹ keeps only the singleton rows.
//!
//! [`selection_feasible`] decides the same question by a different route:
//! whether the observed choice distribution can be produced by routing each
//! set's mass to its members (a transportation problem solved by max flow).

mod flow;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::polytope::HalfspaceSystem;
use crate::rational::Rational;
use flow::FlowNetwork;

pub const MAX_ALTERNATIVES: usize = 16;

/// A nonempty subset of `{0, .., n-1}` as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsetIndex(u32);

impl SubsetIndex {
    pub fn new(mask: u32, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ALTERNATIVES {
            return Err(invalid(format!("number of alternatives must be in 1..={MAX_ALTERNATIVES}")));
        }
        if mask == 0 || mask >= (1u32 << n) {
            return Err(invalid(format!("subset mask {mask} out of range for {n} alternatives")));
        }
        Ok(SubsetIndex(mask))
    }

    pub fn from_members(members: &[usize], n: usize) -> Result<Self> {
        let mut mask = 0u32;
        for &m in members {
            if m >= n {
                return Err(invalid(format!("alternative {m} out of range for {n} alternatives")));
            }
            mask |= 1 << m;
        }
        Self::new(mask, n)
    }

    pub fn full(n: usize) -> Self {
        SubsetIndex((1u32 << n) - 1)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    /// Coordinate position in the systems built by this module.
    pub fn coordinate(self) -> usize {
        self.0 as usize - 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, alternative: usize) -> bool {
        self.0 & (1 << alternative) != 0
    }

    pub fn is_subset_of(self, other: SubsetIndex) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |i| self.0 & (1 << i) != 0)
    }

    /// Comma-separated member indices, e.g. `"0,2"`.
    pub fn key(self) -> String {
        self.members().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse_key(key: &str, n: usize) -> Result<Self> {
        let members = key
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| invalid(format!("bad subset key {key:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_members(&members, n)
    }

    /// `{a0,a2}`
    pub fn label(self) -> String {
        let names: Vec<String> = self.members().map(|m| format!("a{m}")).collect();
        format!("{{{}}}", names.join(","))
    }

    /// `θ₀₂` for indices below ten, `θ{0,12}` otherwise.
    pub fn theta_symbol(self) -> String {
        if self.members().all(|m| m < 10) {
            format!("θ{}", self.members().map(subscript).collect::<String>())
        } else {
            format!("θ{{{}}}", self.key())
        }
    }
}

impl fmt::Debug for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

fn subscript(d: usize) -> char {
    char::from_u32(0x2080 + d as u32).unwrap_or('?')
}

/// Every nonempty subset of `n` alternatives in mask order.
pub fn subsets(n: usize) -> impl Iterator<Item = SubsetIndex> {
    (1u32..(1u32 << n)).map(SubsetIndex)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ALTERNATIVES {
        return Err(invalid(format!("number of alternatives must be in 1..={MAX_ALTERNATIVES}, got {n}")));
    }
    Ok(())
}

/// Probability mass over the nonempty subsets (the distribution of the
/// nondominated set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceParamVector {
    n: usize,
    masses: Vec<Rational>,
}

impl ChoiceParamVector {
    /// `masses[k]` is the mass of the subset with mask `k + 1`.
    pub fn new(n: usize, masses: Vec<Rational>) -> Result<Self> {
        check_n(n)?;
        if masses.len() != (1usize << n) - 1 {
            return Err(Error::DimensionMismatch { expected: (1usize << n) - 1, found: masses.len() });
        }
        if masses.iter().any(|m| m.is_negative()) {
            return Err(invalid("masses must be nonnegative"));
        }
        let total: Rational = masses.iter().sum();
        if total != 1 {
            return Err(invalid(format!("masses sum to {total:?}, not 1")));
        }
        Ok(ChoiceParamVector { n, masses })
    }

    pub fn from_pairs(n: usize, pairs: &[(&[usize], Rational)]) -> Result<Self> {
        check_n(n)?;
        let mut masses = vec![Rational::zero(); (1usize << n) - 1];
        for (members, mass) in pairs {
            let s = SubsetIndex::from_members(members, n)?;
            masses[s.coordinate()] += mass;
        }
        Self::new(n, masses)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mass(&self, subset: SubsetIndex) -> &Rational {
        &self.masses[subset.coordinate()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetIndex, &Rational)> {
        subsets(self.n).zip(&self.masses)
    }
}

impl Serialize for ChoiceParamVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            masses: BTreeMap<String, &'a Rational>,
        }
        let masses = self.iter().filter(|(_, m)| !m.is_zero()).map(|(s, m)| (s.key(), m)).collect();
        Repr { n: self.n, masses }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ChoiceParamVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            masses: BTreeMap<String, Rational>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let err = serde::de::Error::custom;
        check_n(repr.n).map_err(err)?;
        let mut masses = vec![Rational::zero(); (1usize << repr.n) - 1];
        for (key, mass) in repr.masses {
            let s = SubsetIndex::parse_key(&key, repr.n).map_err(err)?;
            masses[s.coordinate()] += mass;
        }
        ChoiceParamVector::new(repr.n, masses).map_err(err)
    }
}

/// Observed choice probabilities, optionally tagged with an instrument value
/// and an abstention share.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceFrequencies {
    pub probs: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instrument: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rational>,
}

impl ChoiceFrequencies {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        let f = ChoiceFrequencies { probs, instrument: None, gamma: None };
        f.validate()?;
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n())?;
        if self.probs.iter().any(|p| p.is_negative()) {
            return Err(invalid("choice probabilities must be nonnegative"));
        }
        let total: Rational = self.probs.iter().sum();
        match &self.gamma {
            None if total != 1 => Err(invalid(format!("choice probabilities sum to {total:?}, not 1"))),
            None => Ok(()),
            Some(g) => {
                if g.is_negative() || *g >= 1 {
                    return Err(invalid("abstention share must lie in [0, 1)"));
                }
                if total == 1 || total == Rational::one() - g {
                    Ok(())
                } else {
                    Err(invalid(format!("choice probabilities sum to {total:?}, expected 1 or 1 - γ")))
                }
            }
        }
    }

    /// `P(y ∈ A)`.
    pub fn prob_of(&self, subset: SubsetIndex) -> Rational {
        subset.members().map(|a| &self.probs[a]).sum()
    }

    fn require_complete(&self) -> Result<()> {
        self.validate()?;
        let total: Rational = self.probs.iter().sum();
        if total != 1 {
            return Err(invalid("this operation needs probabilities that sum to 1"));
        }
        Ok(())
    }
}

/// `C_M(A) = P(M ⊆ A)`.
pub fn containment_functional(theta: &ChoiceParamVector, target: SubsetIndex) -> Result<Rational> {
    if target.mask() >= (1u32 << theta.n) {
        return Err(invalid(format!("subset mask {} out of range for {} alternatives", target.mask(), theta.n)));
    }
    Ok(theta.iter().filter(|(s, _)| s.is_subset_of(target)).map(|(_, m)| m).sum())
}

fn containment_row(target: SubsetIndex, n: usize) -> Vec<Rational> {
    subsets(n).map(|s| if s.is_subset_of(target) { Rational::one() } else { Rational::zero() }).collect()
}

fn simplex(n: usize) -> HalfspaceSystem {
    let dim = (1usize << n) - 1;
    let mut sys = HalfspaceSystem::new(dim);
    sys.add_nonnegativity();
    sys.add_equality(vec![Rational::one(); dim], Rational::one()).expect("dimension matches");
    sys
}

/// Simplex plus one containment inequality per nonempty subset (the full set
/// included, although the simplex equality already implies it).
pub fn build_sharp_region(p: &ChoiceFrequencies) -> Result<HalfspaceSystem> {
    Ok(sharp_region_dump(p)?.system)
}

/// Simplex plus the singleton inequalities only.
pub fn build_theta1_region(p: &ChoiceFrequencies) -> Result<HalfspaceSystem> {
    Ok(theta1_region_dump(p)?.system)
}

/// A generated system with a readable label for each coordinate and row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSystem {
    pub coordinates: Vec<String>,
    pub inequality_labels: Vec<String>,
    pub equality_labels: Vec<String>,
    pub system: HalfspaceSystem,
}

fn region_dump(p: &ChoiceFrequencies, keep: impl Fn(SubsetIndex) -> bool) -> Result<LabeledSystem> {
    p.require_complete()?;
    let n = p.n();
    let mut system = simplex(n);
    let mut inequality_labels: Vec<String> = subsets(n).map(|s| format!("{} >= 0", s.theta_symbol())).collect();
    for target in subsets(n).filter(|&s| keep(s)) {
        system.add_inequality(containment_row(target, n), p.prob_of(target))?;
        let rhs: Vec<String> = target.members().map(|a| format!("p{a}")).collect();
        inequality_labels.push(format!("sum over subsets of {} <= {}", target.label(), rhs.join("+")));
    }
    Ok(LabeledSystem {
        coordinates: subsets(n).map(|s| s.theta_symbol()).collect(),
        inequality_labels,
        equality_labels: vec!["sum of all masses = 1".into()],
        system,
    })
}

pub fn sharp_region_dump(p: &ChoiceFrequencies) -> Result<LabeledSystem> {
    region_dump(p, |_| true)
}

pub fn theta1_region_dump(p: &ChoiceFrequencies) -> Result<LabeledSystem> {
    region_dump(p, |s| s.len() == 1)
}

/// One routed amount `q(a | A)` of a feasible transportation plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutedMass {
    pub subset: String,
    pub alternative: usize,
    pub amount: Rational,
}

/// A subset whose containment mass exceeds its observed probability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolatedInequality {
    pub subset: String,
    pub containment: Rational,
    pub probability: Rational,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionFeasibility {
    pub feasible: bool,
    pub max_flow: Rational,
    /// Present when feasible: a routing of every subset's mass to its members.
    pub plan: Vec<RoutedMass>,
    /// Present when infeasible: the subset on the source side of a minimum cut.
    pub violated: Option<ViolatedInequality>,
}

fn describe_violation(subset: SubsetIndex) -> String {
    let lhs: Vec<String> =
        subsets(32.min(subset.members().last().unwrap_or(0) + 1)).filter(|s| s.is_subset_of(subset)).map(|s| s.theta_symbol()).collect();
    let rhs: Vec<String> = subset.members().map(|a| if a < 10 { format!("p{}", subscript(a)) } else { format!("p{a}") }).collect();
    format!("{} > {}", lhs.join("+"), rhs.join("+"))
}

/// Can `p` be generated by sending each subset's mass to its own members?
///
/// Solved as a bipartite max flow `source -> A (cap θ_A) -> a ∈ A -> sink
/// (cap p_a)`; feasible iff the flow saturates every source edge.
pub fn selection_feasible(theta: &ChoiceParamVector, p: &ChoiceFrequencies) -> Result<SelectionFeasibility> {
    p.require_complete()?;
    if theta.n() != p.n() {
        return Err(Error::DimensionMismatch { expected: theta.n(), found: p.n() });
    }
    let n = p.n();
    let n_sets = (1usize << n) - 1;
    let source = 0;
    let set_node = |s: SubsetIndex| 1 + s.coordinate();
    let alt_node = |a: usize| 1 + n_sets + a;
    let sink = 1 + n_sets + n;
    let mut g = FlowNetwork::new(sink + 1);
    let mut routes = Vec::new();
    for (s, mass) in theta.iter() {
        if mass.is_zero() {
            continue;
        }
        g.add_edge(source, set_node(s), Some(mass.clone()));
        for a in s.members() {
            routes.push((s, a, g.add_edge(set_node(s), alt_node(a), None)));
        }
    }
    for a in 0..n {
        if p.probs[a].is_positive() {
            g.add_edge(alt_node(a), sink, Some(p.probs[a].clone()));
        }
    }
    let max_flow = g.max_flow(source, sink);
    if max_flow == 1 {
        let plan = routes
            .into_iter()
            .filter(|(_, _, id)| g.flow_on(*id).is_positive())
            .map(|(s, a, id)| RoutedMass { subset: s.key(), alternative: a, amount: g.flow_on(id).clone() })
            .collect();
        return Ok(SelectionFeasibility { feasible: true, max_flow, plan, violated: None });
    }
    let side = g.reachable(source);
    let members: Vec<usize> = (0..n).filter(|&a| side[alt_node(a)]).collect();
    // A deficient flow always leaves some alternative on the source side.
    let cut = SubsetIndex::from_members(&members, n)?;
    let violated = ViolatedInequality {
        subset: cut.key(),
        containment: containment_functional(theta, cut)?,
        probability: p.prob_of(cut),
        description: describe_violation(cut),
    };
    Ok(SelectionFeasibility { feasible: false, max_flow, plan: Vec::new(), violated: Some(violated) })
}

/// A point of Θ¹ outside the sharp region, violating the containment row
/// of `subset`.
///
/// The LP `max C(A)` over Θ¹ decides existence. When it exceeds `P(y ∈ A)`,
/// the returned point saturates the singleton rows of `A`, puts half of the
/// leftover mass on `A` itself, and spreads the rest over singletons outside
/// `A` (which always have room for it).
pub fn strict_inclusion_witness(p: &ChoiceFrequencies, subset: SubsetIndex) -> Result<Option<ChoiceParamVector>> {
    p.require_complete()?;
    let n = p.n();
    if subset.mask() >= (1u32 << n) {
        return Err(invalid(format!("subset mask {} out of range for {n} alternatives", subset.mask())));
    }
    if subset.len() < 2 {
        return Err(invalid("witness subsets need at least two alternatives"));
    }
    let theta1 = build_theta1_region(p)?;
    let target = p.prob_of(subset);
    let (best, lp_point) = theta1.argmax(&containment_row(subset, n))?;
    if best <= target {
        return Ok(None);
    }

    let mut masses = vec![Rational::zero(); (1usize << n) - 1];
    for a in subset.members() {
        masses[SubsetIndex(1 << a).coordinate()] = p.probs[a].clone();
    }
    let leftover = Rational::one() - &target;
    let on_subset = &leftover / &Rational::from_integer(2);
    masses[subset.coordinate()] += &on_subset;
    let mut remaining = leftover - on_subset;
    for b in (0..n).filter(|&b| !subset.contains(b)) {
        let take = remaining.clone().min(p.probs[b].clone());
        masses[SubsetIndex(1 << b).coordinate()] += &take;
        remaining -= take;
    }
    let sharp = build_sharp_region(p)?;
    let constructed = ChoiceParamVector::new(n, masses).ok().filter(|theta| {
        remaining.is_zero() && theta1.contains(theta.masses()).unwrap_or(false) && !sharp.contains(theta.masses()).unwrap_or(true)
    });
    match constructed {
        Some(theta) => Ok(Some(theta)),
        None => Ok(Some(ChoiceParamVector::new(n, lp_point)?)),
    }
}

/// Range of each coordinate over a region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportRow {
    pub subset: String,
    pub sharp_min: Rational,
    pub sharp_max: Rational,
    pub theta1_min: Rational,
    pub theta1_max: Rational,
}

pub fn support_table(p: &ChoiceFrequencies) -> Result<Vec<SupportRow>> {
    let sharp = build_sharp_region(p)?;
    let theta1 = build_theta1_region(p)?;
    let n = p.n();
    let dim = (1usize << n) - 1;
    subsets(n)
        .map(|s| {
            let mut e = vec![Rational::zero(); dim];
            e[s.coordinate()] = Rational::one();
            let neg: Vec<Rational> = e.iter().map(|x| -x).collect();
            Ok(SupportRow {
                subset: s.key(),
                sharp_min: -sharp.support(&neg)?,
                sharp_max: sharp.support(&e)?,
                theta1_min: -theta1.support(&neg)?,
                theta1_max: theta1.support(&e)?,
            })
        })
        .collect()
}
