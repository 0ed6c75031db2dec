//! Precinct-level election returns: ingestion, race summaries and the
//! binary region pipeline.
//!
//! Input is long-format CSV, one row per (precinct, race, candidate), with a
//! reserved race id `TURNOUT` whose `votes` column carries the number of
//! ballots cast in the precinct.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::binary::{abstention_region, consideration_region, iv_region, no_assumption_region, BinaryObservation, UnobservedMode};
use crate::error::{invalid, Error, Result};
use crate::polytope::ConvexRegion2D;
use crate::rational::Rational;
use crate::svg::{Figure, Layer};

pub const TURNOUT_RACE: &str = "TURNOUT";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateVotes {
    pub candidate: String,
    pub votes: u64,
    pub ballot_position: u32,
}

/// All rows for one (precinct, race). `TURNOUT` records have no candidates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecinctRecord {
    pub precinct: String,
    pub race: String,
    pub candidates: Vec<CandidateVotes>,
    pub turnout: Option<u64>,
    pub reg_dem: Option<u64>,
    pub reg_rep: Option<u64>,
    #[serde(skip)]
    rows: Vec<usize>,
}

impl PrecinctRecord {
    pub fn total_votes(&self) -> u64 {
        self.candidates.iter().map(|c| c.votes).sum()
    }

    /// Candidate names in ballot order.
    pub fn ballot_order(&self) -> Vec<&str> {
        let mut sorted: Vec<&CandidateVotes> = self.candidates.iter().collect();
        sorted.sort_by_key(|c| c.ballot_position);
        sorted.into_iter().map(|c| c.candidate.as_str()).collect()
    }

    pub fn first_listed(&self) -> Option<&str> {
        self.candidates.iter().min_by_key(|c| c.ballot_position).map(|c| c.candidate.as_str())
    }

    pub fn is_turnout(&self) -> bool {
        self.race == TURNOUT_RACE
    }

    fn last_row(&self) -> usize {
        self.rows.last().copied().unwrap_or(0)
    }
}

struct Columns {
    precinct: usize,
    race: usize,
    candidate: usize,
    votes: usize,
    position: Option<usize>,
    turnout: Option<usize>,
    reg_dem: Option<usize>,
    reg_rep: Option<usize>,
}

impl Columns {
    fn from_header(header: &csv::StringRecord) -> Result<Self> {
        let find = |name: &str| header.iter().position(|h| h.trim() == name);
        let need = |name: &str| find(name).ok_or_else(|| Error::Data { row: 1, message: format!("missing column {name:?}") });
        Ok(Columns {
            precinct: need("precinct_id")?,
            race: need("race_id")?,
            candidate: need("candidate")?,
            votes: need("votes")?,
            position: find("ballot_position"),
            turnout: find("turnout"),
            reg_dem: find("reg_dem"),
            reg_rep: find("reg_rep"),
        })
    }
}

fn field(record: &csv::StringRecord, index: Option<usize>) -> Option<&str> {
    index.and_then(|i| record.get(i)).map(str::trim).filter(|s| !s.is_empty())
}

fn count(record: &csv::StringRecord, index: Option<usize>, name: &str, row: usize) -> Result<Option<u64>> {
    field(record, index)
        .map(|s| s.parse::<u64>().map_err(|_| Error::Data { row, message: format!("{name} must be a nonnegative integer, got {s:?}") }))
        .transpose()
}

fn merge_count(slot: &mut Option<u64>, value: Option<u64>, name: &str, row: usize) -> Result<()> {
    match (slot.as_ref(), value) {
        (Some(old), Some(new)) if *old != new => {
            Err(Error::Data { row, message: format!("{name} {new} disagrees with {old} given earlier for the same precinct and race") })
        }
        (None, Some(new)) => {
            *slot = Some(new);
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Reads and validates precinct returns.
pub fn ingest<R: Read>(reader: R) -> Result<Vec<PrecinctRecord>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let columns = Columns::from_header(csv.headers()?)?;
    let mut records: Vec<PrecinctRecord> = Vec::new();
    let mut index: BTreeMap<(String, String), usize> = BTreeMap::new();

    for result in csv.records() {
        let record = result?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let data = |message: String| Error::Data { row, message };
        let precinct = field(&record, Some(columns.precinct)).ok_or_else(|| data("precinct_id is empty".into()))?;
        let race = field(&record, Some(columns.race)).ok_or_else(|| data("race_id is empty".into()))?;
        let votes = count(&record, Some(columns.votes), "votes", row)?.ok_or_else(|| data("votes is empty".into()))?;
        let turnout = count(&record, columns.turnout, "turnout", row)?;
        let reg_dem = count(&record, columns.reg_dem, "reg_dem", row)?;
        let reg_rep = count(&record, columns.reg_rep, "reg_rep", row)?;
        let candidate = field(&record, Some(columns.candidate));

        let key = (precinct.to_string(), race.to_string());
        let slot = *index.entry(key).or_insert_with(|| {
            records.push(PrecinctRecord {
                precinct: precinct.to_string(),
                race: race.to_string(),
                candidates: Vec::new(),
                turnout: None,
                reg_dem: None,
                reg_rep: None,
                rows: Vec::new(),
            });
            records.len() - 1
        });
        let rec = &mut records[slot];

        if race == TURNOUT_RACE {
            if let Some(c) = candidate {
                return Err(data(format!("{TURNOUT_RACE} rows must leave candidate empty, got {c:?}")));
            }
            if !rec.rows.is_empty() {
                return Err(data(format!("duplicate {TURNOUT_RACE} row for precinct {precinct:?} (first at row {})", rec.rows[0])));
            }
            if turnout.is_some_and(|t| t != votes) {
                return Err(data(format!("{TURNOUT_RACE} row has votes {votes} but turnout {}", turnout.unwrap_or_default())));
            }
            rec.turnout = Some(votes);
        } else {
            let candidate = candidate.ok_or_else(|| data("candidate is empty".into()))?;
            let position =
                count(&record, columns.position, "ballot_position", row)?.ok_or_else(|| data("ballot_position is empty".into()))?;
            if position == 0 || position > u32::MAX as u64 {
                return Err(data(format!("ballot_position must be at least 1, got {position}")));
            }
            if rec.candidates.iter().any(|c| c.candidate == candidate) {
                return Err(data(format!("duplicate row for candidate {candidate:?} in precinct {precinct:?}, race {race:?}")));
            }
            rec.candidates.push(CandidateVotes { candidate: candidate.to_string(), votes, ballot_position: position as u32 });
            merge_count(&mut rec.turnout, turnout, "turnout", row)?;
        }
        merge_count(&mut rec.reg_dem, reg_dem, "reg_dem", row)?;
        merge_count(&mut rec.reg_rep, reg_rep, "reg_rep", row)?;
        rec.rows.push(row);
        if let Some(t) = rec.turnout.filter(|_| !rec.is_turnout()) {
            if rec.total_votes() > t {
                return Err(data(format!(
                    "votes in precinct {precinct:?}, race {race:?} total {} and exceed turnout {t}",
                    rec.total_votes()
                )));
            }
        }
    }

    let turnout_rows: BTreeMap<&str, u64> =
        records.iter().filter(|r| r.is_turnout()).filter_map(|r| r.turnout.map(|t| (r.precinct.as_str(), t))).collect();
    for rec in records.iter().filter(|r| !r.is_turnout()) {
        let row = rec.last_row();
        let k = rec.candidates.len() as u32;
        let positions: BTreeSet<u32> = rec.candidates.iter().map(|c| c.ballot_position).collect();
        if positions.len() as u32 != k || positions.iter().any(|&p| p > k) {
            return Err(Error::Data {
                row,
                message: format!("ballot positions in precinct {:?}, race {:?} are not a permutation of 1..{k}", rec.precinct, rec.race),
            });
        }
        if let Some(&t) = turnout_rows.get(rec.precinct.as_str()) {
            if rec.total_votes() > t {
                return Err(Error::Data {
                    row,
                    message: format!(
                        "votes in precinct {:?}, race {:?} total {} and exceed the {TURNOUT_RACE} count {t}",
                        rec.precinct,
                        rec.race,
                        rec.total_votes()
                    ),
                });
            }
        }
    }
    Ok(records)
}

/// Where the denominator of the abstention share comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurnoutSource {
    /// The reserved `TURNOUT` race.
    #[default]
    ReservedRace,
    /// The `turnout` column of the race's own rows.
    Column,
}

impl std::str::FromStr for TurnoutSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reserved-race" | "turnout-race" => Ok(TurnoutSource::ReservedRace),
            "column" => Ok(TurnoutSource::Column),
            other => Err(invalid(format!("unknown turnout source {other:?} (expected reserved-race or column)"))),
        }
    }
}

/// Choice shares among precincts that list `first_listed` first on the ballot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalShares {
    pub first_listed: String,
    pub precincts: usize,
    pub votes: Vec<u64>,
    pub p: Vec<Rational>,
}

/// Registered Democrats and Republicans as shares of turnout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisteredShares {
    pub dem: Rational,
    pub rep: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceSummary {
    pub race: String,
    /// Alphabetical; index `i` is alternative `a_i`.
    pub candidates: Vec<String>,
    pub votes: Vec<u64>,
    pub total_votes: u64,
    pub turnout: u64,
    pub precincts: usize,
    pub p: Vec<Rational>,
    pub gamma: Rational,
    pub conditional: Vec<ConditionalShares>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registered: Option<RegisteredShares>,
}

impl RaceSummary {
    pub fn candidate_index(&self, name: &str) -> Result<usize> {
        self.candidates.iter().position(|c| c == name).ok_or_else(|| invalid(format!("race {:?} has no candidate {name:?}", self.race)))
    }
}

/// Aggregates one race. Shares are exact ratios of vote counts.
pub fn summarize(records: &[PrecinctRecord], race: &str, source: TurnoutSource) -> Result<RaceSummary> {
    if race == TURNOUT_RACE {
        return Err(invalid(format!("{TURNOUT_RACE} is reserved and cannot be summarized")));
    }
    let rows: Vec<&PrecinctRecord> = records.iter().filter(|r| r.race == race).collect();
    if rows.is_empty() {
        return Err(invalid(format!("no records for race {race:?}")));
    }
    let by_precinct: BTreeMap<&str, &PrecinctRecord> =
        records.iter().filter(|r| r.is_turnout()).map(|r| (r.precinct.as_str(), r)).collect();

    let candidates: Vec<String> =
        rows.iter().flat_map(|r| r.candidates.iter().map(|c| c.candidate.clone())).collect::<BTreeSet<_>>().into_iter().collect();
    let slot = |name: &str| candidates.iter().position(|c| c == name).expect("collected above");

    let mut votes = vec![0u64; candidates.len()];
    let mut grouped: BTreeMap<String, (usize, Vec<u64>)> = BTreeMap::new();
    let mut turnout = 0u64;
    let mut dem = Some(0u64);
    let mut rep = Some(0u64);
    for rec in &rows {
        let mut local = vec![0u64; candidates.len()];
        for c in &rec.candidates {
            local[slot(&c.candidate)] += c.votes;
        }
        for (total, v) in votes.iter_mut().zip(&local) {
            *total += v;
        }
        if let Some(first) = rec.first_listed() {
            let entry = grouped.entry(first.to_string()).or_insert_with(|| (0, vec![0; candidates.len()]));
            entry.0 += 1;
            for (total, v) in entry.1.iter_mut().zip(&local) {
                *total += v;
            }
        }
        let reserved = by_precinct.get(rec.precinct.as_str());
        let t = match source {
            TurnoutSource::ReservedRace => reserved.and_then(|r| r.turnout),
            TurnoutSource::Column => rec.turnout,
        }
        .ok_or_else(|| Error::Data {
            row: rec.last_row(),
            message: match source {
                TurnoutSource::ReservedRace => format!("precinct {:?} has no {TURNOUT_RACE} row", rec.precinct),
                TurnoutSource::Column => format!("precinct {:?}, race {race:?} has no turnout value", rec.precinct),
            },
        })?;
        turnout += t;
        let registered = |f: fn(&PrecinctRecord) -> Option<u64>| f(rec).or_else(|| reserved.and_then(|r| f(r)));
        dem = dem.zip(registered(|r| r.reg_dem)).map(|(a, b)| a + b);
        rep = rep.zip(registered(|r| r.reg_rep)).map(|(a, b)| a + b);
    }

    let total_votes: u64 = votes.iter().sum();
    if total_votes == 0 {
        return Err(invalid(format!("race {race:?} has no votes")));
    }
    if total_votes > turnout {
        return Err(invalid(format!("race {race:?} has {total_votes} votes but turnout is only {turnout}")));
    }
    let share = |num: u64, den: u64| Rational::new(num as i64, den as i64);
    let p = votes.iter().map(|&v| share(v, total_votes)).collect();
    let conditional = grouped
        .into_iter()
        .filter(|(_, (_, v))| v.iter().sum::<u64>() > 0)
        .map(|(first_listed, (precincts, v))| {
            let n: u64 = v.iter().sum();
            ConditionalShares { first_listed, precincts, p: v.iter().map(|&x| share(x, n)).collect(), votes: v }
        })
        .collect();
    let registered = dem.zip(rep).map(|(d, r)| RegisteredShares { dem: share(d, turnout), rep: share(r, turnout) });
    Ok(RaceSummary {
        race: race.to_string(),
        candidates,
        total_votes,
        gamma: Rational::one() - share(total_votes, turnout),
        turnout,
        precincts: rows.len(),
        p,
        votes,
        conditional,
        registered,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationIssue {
    pub precinct: String,
    pub expected: Vec<String>,
    pub found: Vec<String>,
}

/// Comparison of a race's ballot orders with the rotation rule: precincts
/// sorted by id, alphabetical order in the first, and in each next precinct
/// the last-listed candidate moves to the top.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationReport {
    pub race: String,
    pub first_position_counts: BTreeMap<String, usize>,
    pub issues: Vec<RotationIssue>,
    /// First-position counts differ by at most one.
    pub balanced: bool,
}

impl RotationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty() && self.balanced
    }
}

pub fn check_rotation(records: &[PrecinctRecord], race: &str) -> RotationReport {
    let mut rows: Vec<&PrecinctRecord> = records.iter().filter(|r| r.race == race).collect();
    rows.sort_by(|a, b| a.precinct.cmp(&b.precinct));
    let names: BTreeSet<&str> = rows.iter().flat_map(|r| r.candidates.iter().map(|c| c.candidate.as_str())).collect();
    let mut expected: Vec<&str> = names.into_iter().collect();
    let mut counts: BTreeMap<String, usize> = expected.iter().map(|c| (c.to_string(), 0)).collect();
    let mut issues = Vec::new();
    for rec in rows {
        let found = rec.ballot_order();
        if let Some(first) = found.first() {
            *counts.get_mut(*first).expect("every candidate is counted") += 1;
        }
        let expected_here: Vec<&str> = expected.iter().copied().filter(|c| found.contains(c)).collect();
        if found != expected_here {
            issues.push(RotationIssue {
                precinct: rec.precinct.clone(),
                expected: expected_here.iter().map(|s| s.to_string()).collect(),
                found: found.iter().map(|s| s.to_string()).collect(),
            });
        }
        expected.rotate_right(1);
    }
    let balanced = match (counts.values().min(), counts.values().max()) {
        (Some(lo), Some(hi)) => hi - lo <= 1,
        _ => true,
    };
    RotationReport { race: race.to_string(), first_position_counts: counts, issues, balanced }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Dem,
    Rep,
}

/// Per-race inputs that the returns themselves do not carry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceConfig {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parties: BTreeMap<String, Party>,
    /// Replaces raw conditional shares. Keyed by first-listed candidate, then
    /// by candidate; with two candidates one share per key is enough.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<BTreeMap<String, BTreeMap<String, Rational>>>,
    /// Consideration-set lower bounds by candidate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<BTreeMap<String, Rational>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionConfig {
    #[serde(default)]
    pub races: BTreeMap<String, RaceConfig>,
}

impl ElectionConfig {
    pub fn race(&self, id: &str) -> RaceConfig {
        self.races.get(id).cloned().unwrap_or_default()
    }
}

fn binary_shares(summary: &RaceSummary, shares: &BTreeMap<String, Rational>) -> Result<(Rational, Rational)> {
    let mut out = [None, None];
    for (name, value) in shares {
        out[summary.candidate_index(name)?] = Some(value.clone());
    }
    match out {
        [Some(a), Some(b)] => Ok((a, b)),
        [Some(a), None] => Ok((a.clone(), Rational::one() - a)),
        [None, Some(b)] => Ok((Rational::one() - &b, b)),
        [None, None] => Err(invalid("empty conditional share override")),
    }
}

/// The two-candidate observation, with overrides from `config` applied.
pub fn binary_observation(summary: &RaceSummary, config: &RaceConfig) -> Result<BinaryObservation> {
    if summary.candidates.len() != 2 {
        return Err(invalid(format!("race {:?} has {} candidates; the region pipeline needs two", summary.race, summary.candidates.len())));
    }
    let mut obs = BinaryObservation::new(summary.p[0].clone(), summary.p[1].clone())?;
    match &config.conditional {
        Some(table) => {
            for (first, shares) in table {
                summary.candidate_index(first)?;
                let (p0, p1) = binary_shares(summary, shares)?;
                obs = obs.with_instrument(first.clone(), p0, p1)?;
            }
        }
        None => {
            for c in &summary.conditional {
                obs = obs.with_instrument(c.first_listed.clone(), c.p[0].clone(), c.p[1].clone())?;
            }
        }
    }
    obs.gamma = Some(summary.gamma.clone());
    let pi = match &config.pi {
        Some(pi) => {
            let mut out = [None, None];
            for (name, value) in pi {
                out[summary.candidate_index(name)?] = Some(value.clone());
            }
            Some(out)
        }
        None => summary.registered.as_ref().filter(|_| !config.parties.is_empty()).map(|reg| {
            let share = |name: &str| {
                config.parties.get(name).map(|party| match party {
                    Party::Dem => reg.dem.clone(),
                    Party::Rep => reg.rep.clone(),
                })
            };
            [share(&summary.candidates[0]), share(&summary.candidates[1])]
        }),
    };
    if let Some([pi0, pi1]) = pi {
        obs.pi0 = pi0;
        obs.pi1 = pi1;
    }
    obs.validate()?;
    Ok(obs)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureOptions {
    pub iv: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unobserved: Option<UnobservedMode>,
    pub consideration: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageKind {
    NoAssumption,
    /// No-assumption rectangle for one instrument value.
    Envelope,
    Iv,
    Abstention,
    Consideration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub kind: StageKind,
    pub label: String,
    pub region: ConvexRegion2D,
    /// Largest `θ₀ + θ₁` in the region.
    pub max_decided: Rational,
}

impl Stage {
    fn new(kind: StageKind, label: impl Into<String>, region: ConvexRegion2D) -> Self {
        let one = Rational::one();
        Stage { kind, label: label.into(), max_decided: region.support(&one, &one), region }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureDocument {
    pub race: String,
    pub candidates: Vec<String>,
    pub options: FigureOptions,
    pub observation: BinaryObservation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<Rational>,
    pub stages: Vec<Stage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl FigureDocument {
    pub fn stage(&self, kind: StageKind) -> Option<&Stage> {
        self.stages.iter().find(|s| s.kind == kind)
    }

    /// The innermost region produced.
    pub fn last(&self) -> &Stage {
        self.stages.iter().rev().find(|s| s.kind != StageKind::Envelope).expect("the no-assumption stage is always present")
    }

    pub fn svg(&self) -> String {
        let title = format!("{}: {} (a0) vs {} (a1)", self.race, self.candidates[0], self.candidates[1]);
        let mut figure = Figure::new(title);
        for stage in &self.stages {
            let fill = match stage.kind {
                StageKind::NoAssumption => "#f6b26b",
                StageKind::Envelope => "#b7b7b7",
                StageKind::Iv => "#666666",
                StageKind::Abstention => "#e69138",
                StageKind::Consideration => "#000000",
            };
            let mut layer = Layer::new(stage.region.clone(), fill).labelled(stage.label.clone());
            if stage.kind == StageKind::Envelope {
                layer = layer.without_corners();
            }
            figure = figure.layer(layer);
        }
        if let (Some(pi0), Some(pi1)) = (&self.observation.pi0, &self.observation.pi1) {
            if self.options.consideration {
                figure = figure.guide(1.0, 0.0, pi1.to_f64(), format!("θ₁ = {}", pi1.to_decimal_string(3)));
                figure = figure.guide(0.0, 1.0, pi0.to_f64(), format!("θ₀ = {}", pi0.to_decimal_string(3)));
            }
        }
        figure.render()
    }
}

/// Successively narrower regions for one race: no assumptions, then the
/// instrument, then abstention, then consideration sets.
pub fn figure_pipeline(summary: &RaceSummary, config: &RaceConfig, options: &FigureOptions) -> Result<FigureDocument> {
    let obs = binary_observation(summary, config)?;
    let mut stages = vec![Stage::new(StageKind::NoAssumption, "no assumptions", no_assumption_region(&obs)?)];
    let mut notes = Vec::new();
    let mut delta0 = None;
    let mut current = stages[0].region.clone();

    if options.iv {
        if obs.instruments.is_empty() {
            return Err(invalid(format!("race {:?} has no instrument values", summary.race)));
        }
        for (z, pair) in &obs.instruments {
            let rect = ConvexRegion2D::rectangle(&pair.p1, &pair.p0)?;
            stages.push(Stage::new(StageKind::Envelope, format!("{z} listed first"), rect));
        }
        let iv = iv_region(&obs)?;
        if obs.instruments.len() == 1 {
            notes.push("every precinct shares one ballot order; the instrument does not narrow the region".into());
        }
        current = iv.region.clone();
        delta0 = Some(iv.delta0);
        stages.push(Stage::new(StageKind::Iv, "instrument", iv.region));
    }
    if let Some(mode) = options.unobserved {
        let gamma = obs.gamma.as_ref().expect("set by binary_observation");
        current = abstention_region(&current, gamma, mode)?;
        let label = match mode {
            UnobservedMode::AllIncomparable => "abstainers incomparable",
            UnobservedMode::Agnostic => "abstainers unrestricted",
            UnobservedMode::MissingAtRandom => "abstainers missing at random",
        };
        stages.push(Stage::new(StageKind::Abstention, label, current.clone()));
    }
    if options.consideration {
        let (pi0, pi1) = match (&obs.pi0, &obs.pi1) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(invalid(format!(
                    "race {:?}: consideration sets need π for both candidates (config `pi`, or `parties` with registration columns)",
                    summary.race
                )))
            }
        };
        current = consideration_region(&current, pi0, pi1)?;
        stages.push(Stage::new(StageKind::Consideration, "consideration sets", current));
    }
    Ok(FigureDocument {
        race: summary.race.clone(),
        candidates: summary.candidates.clone(),
        options: options.clone(),
        observation: obs,
        delta0,
        stages,
        notes,
    })
}

/// The three standard views of a race: no assumptions, instrument, and
/// instrument with abstention and consideration sets.
pub fn standard_figures(summary: &RaceSummary, config: &RaceConfig) -> Result<Vec<(String, FigureDocument)>> {
    let plain = figure_pipeline(summary, config, &FigureOptions::default())?;
    let iv = FigureOptions { iv: true, ..Default::default() };
    let with_iv = figure_pipeline(summary, config, &iv)?;
    let combined = FigureOptions { iv: true, unobserved: Some(UnobservedMode::AllIncomparable), consideration: true };
    let mut full = figure_pipeline(summary, config, &combined)?;
    let gamma = full.observation.gamma.clone().expect("set by binary_observation");
    let base = full.stage(StageKind::Iv).expect("iv stage requested").region.clone();
    let agnostic = abstention_region(&base, &gamma, UnobservedMode::Agnostic)?;
    let at = full.stages.iter().position(|s| s.kind == StageKind::Abstention).expect("abstention stage requested");
    full.stages.insert(at, Stage::new(StageKind::Envelope, "abstainers unrestricted", agnostic));
    Ok(vec![("no-assumption".into(), plain), ("iv".into(), with_iv), ("combined".into(), full)])
}
