use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use setid::artstein::{
    selection_feasible, sharp_region_dump, strict_inclusion_witness, support_table, theta1_region_dump, ChoiceFrequencies,
    ChoiceParamVector,
};
use setid::binary::{
    abstention_region, consideration_region, iv_region, no_assumption_region, BinaryObservation, ConditionalPair, UnobservedMode,
};
use setid::dist::{Cdf, NoiseDistribution, TabulatedCdf};
use setid::elections::{
    check_rotation, figure_pipeline, ingest, standard_figures, summarize, ElectionConfig, FigureOptions, TurnoutSource,
};
use setid::exec::ExecutionMode;
use setid::knightian::{bewley_prefers, knightian_nondominated, min_expected_difference, PriorSet, StateUtility};
use setid::parametric::{nonparametric_policy_bounds, policy_complete, policy_incomplete_interval};
use setid::polytope::ConvexRegion2D;
use setid::sim::{iv_experiment, simulate, verify_artstein, PopulationSpec};
use setid::svg::{Figure, Layer};
use setid::{Error, Rational};

#[derive(Parser)]
#[command(name = "setid", version, about = "Identification regions for choice with incomplete preferences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write SVG; without a path it goes next to --out.
    #[arg(long, global = true)]
    svg: Option<Option<PathBuf>>,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Identification regions.
    Region {
        #[command(subcommand)]
        kind: RegionKind,
        #[command(flatten)]
        output: Output,
    },
    /// Is a parameter vector consistent with the observed shares?
    Oracle {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        p: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate a population and check the moment inequalities.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, env = "SETID_SEED")]
        seed: Option<u64>,
        #[arg(long, default_value = "parallel")]
        mode: ExecutionMode,
        #[command(flatten)]
        output: Output,
    },
    /// Predicted share of a1 after a policy shift.
    Policy {
        #[arg(long)]
        p1: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value = "probit")]
        cdf: NoiseDistribution,
        /// CSV with columns x,cdf for the distribution of the lower-minus-upper utility gap.
        #[arg(long)]
        nonparametric: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Summarize a race from precinct returns.
    Election {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        race: String,
        /// Per-race parties, conditional-share overrides and π.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "reserved-race")]
        turnout_source: TurnoutSource,
        /// Emit the three standard region figures.
        #[arg(long)]
        figures: bool,
        #[arg(long)]
        iv: bool,
        #[arg(long)]
        unobserved_mode: Option<UnobservedMode>,
        #[arg(long)]
        consideration: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Compare alternatives under a set of priors.
    Knightian {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum RegionKind {
    /// Two alternatives, in the (θ₁, θ₀) plane.
    Binary {
        #[arg(long)]
        p0: Rational,
        #[arg(long)]
        p1: Rational,
        /// Minimal share of agents with a strict preference.
        #[arg(long)]
        nu: Option<Rational>,
        /// JSON object mapping instrument values to {"p0", "p1"}.
        #[arg(long)]
        iv: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<Rational>,
        #[arg(long, default_value = "agnostic")]
        unobserved_mode: UnobservedMode,
        #[arg(long)]
        pi0: Option<Rational>,
        #[arg(long)]
        pi1: Option<Rational>,
    },
    /// Any number of alternatives: the full inequality system and coordinate ranges.
    Multi {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Infeasible(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible | Error::Coherence(_) => Failure::Infeasible(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

type Run<T = ()> = Result<T, Failure>;

fn read_text(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Run<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Run {
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

impl Output {
    fn emit<T: Serialize>(&self, value: &T) -> Run {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Data(e.to_string()))?;
        text.push('\n');
        match &self.out {
            Some(path) => write_file(path, &text),
            None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Data(e.to_string())),
        }
    }

    fn svg_path(&self, default_stem: &str, suffix: Option<&str>) -> Option<PathBuf> {
        let base = match (self.svg.as_ref()?, &self.out) {
            (Some(path), _) => path.clone(),
            (None, Some(out)) => out.with_extension("svg"),
            (None, None) => PathBuf::from(format!("{default_stem}.svg")),
        };
        Some(match suffix {
            Some(s) => {
                let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                base.with_file_name(format!("{stem}-{s}.svg"))
            }
            None => base,
        })
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProbsFile {
    Plain(Vec<Rational>),
    Tagged(ChoiceFrequencies),
}

fn read_probs(path: &Path) -> Run<ChoiceFrequencies> {
    let p = match read_json::<ProbsFile>(path)? {
        ProbsFile::Plain(probs) => ChoiceFrequencies::new(probs)?,
        ProbsFile::Tagged(f) => {
            f.validate()?;
            f
        }
    };
    Ok(p)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ThetaFile {
    Plain(Vec<Rational>),
    Keyed(ChoiceParamVector),
}

#[derive(Serialize)]
struct NamedRegion {
    name: &'static str,
    region: ConvexRegion2D,
}

#[allow(clippy::too_many_arguments)]
fn region_binary(
    p0: Rational,
    p1: Rational,
    nu: Option<Rational>,
    iv: Option<PathBuf>,
    gamma: Option<Rational>,
    mode: UnobservedMode,
    pi0: Option<Rational>,
    pi1: Option<Rational>,
    output: &Output,
) -> Run {
    let mut obs = BinaryObservation::new(p0, p1)?;
    if let Some(path) = &iv {
        obs.instruments = read_json::<std::collections::BTreeMap<String, ConditionalPair>>(path)?;
    }
    obs.gamma = gamma;
    obs.nu = nu;
    obs.pi0 = pi0;
    obs.pi1 = pi1;
    obs.validate()?;
    if obs.pi0.is_some() != obs.pi1.is_some() {
        return Err(Failure::Usage("--pi0 and --pi1 go together".into()));
    }

    let mut stages = vec![NamedRegion { name: "no-assumption", region: no_assumption_region(&obs)? }];
    let mut current = stages[0].region.clone();
    let mut delta0 = None;
    if !obs.instruments.is_empty() {
        let r = iv_region(&obs)?;
        delta0 = Some(r.delta0);
        current = r.region;
        stages.push(NamedRegion { name: "iv", region: current.clone() });
    }
    if let Some(nu) = &obs.nu {
        let one = Rational::one();
        current = current.clip(&one, &one, &(Rational::one() - nu)).expect("the origin is in every region");
        stages.push(NamedRegion { name: "min-vagueness", region: current.clone() });
    }
    if let Some(g) = &obs.gamma {
        current = abstention_region(&current, g, mode)?;
        stages.push(NamedRegion { name: "abstention", region: current.clone() });
    }
    if let (Some(a), Some(b)) = (&obs.pi0, &obs.pi1) {
        current = consideration_region(&current, a, b)?;
        stages.push(NamedRegion { name: "consideration", region: current.clone() });
    }

    if let Some(path) = output.svg_path("region", None) {
        let fills = ["#f6b26b", "#999999", "#6d9eeb", "#e69138", "#000000"];
        let mut fig = Figure::new(format!("p0 = {}, p1 = {}", obs.p0.to_decimal_string(3), obs.p1.to_decimal_string(3)));
        for (i, s) in stages.iter().enumerate() {
            fig = fig.layer(Layer::new(s.region.clone(), fills[i.min(fills.len() - 1)]).labelled(s.name));
        }
        write_file(&path, &fig.render())?;
    }
    let one = Rational::one();
    output.emit(&json!({
        "observation": obs,
        "delta0": delta0,
        "stages": stages,
        "region": current,
        "max_decided": current.support(&one, &one),
    }))
}

fn region_multi(p: &Path, n: usize, output: &Output) -> Run {
    let p = read_probs(p)?;
    if p.n() != n {
        return Err(Failure::Data(format!("--n is {n} but the file has {} probabilities", p.n())));
    }
    let witnesses: Vec<Value> = setid::artstein::subsets(n)
        .filter(|s| s.len() >= 2)
        .map(|s| Ok(json!({ "subset": s.key(), "witness": strict_inclusion_witness(&p, s)? })))
        .collect::<Result<_, Error>>()?;
    output.emit(&json!({
        "probabilities": p,
        "sharp": sharp_region_dump(&p)?,
        "theta1": theta1_region_dump(&p)?,
        "support": support_table(&p)?,
        "strict_inclusion_witnesses": witnesses,
    }))
}

fn oracle(theta: &Path, p: &Path, output: &Output) -> Run {
    let p = read_probs(p)?;
    let theta = match read_json::<ThetaFile>(theta)? {
        ThetaFile::Plain(masses) => ChoiceParamVector::new(p.n(), masses)?,
        ThetaFile::Keyed(t) => t,
    };
    let result = selection_feasible(&theta, &p)?;
    output.emit(&result)?;
    match &result.violated {
        None => {
            eprintln!("feasible: max flow {}", result.max_flow.to_decimal_string(6));
            Ok(())
        }
        Some(v) => Err(Failure::Infeasible(format!("infeasible: {}", v.description))),
    }
}

fn simulate_cmd(spec: &Path, seed: Option<u64>, mode: ExecutionMode, output: &Output) -> Run {
    let mut spec: PopulationSpec = read_json(spec)?;
    spec.seed = seed.or(spec.seed);
    if spec.seed.is_none() {
        return Err(Failure::Usage("simulate needs a seed: --seed, SETID_SEED, or \"seed\" in the spec".into()));
    }
    let report = simulate(&spec, mode)?;
    let check = verify_artstein(&report);
    let iv = (report.alternatives == 2 && report.delta0.is_some()).then(|| iv_experiment(&report)).transpose()?;
    output.emit(&json!({ "spec": spec, "report": report, "artstein": check, "iv": iv }))
}

fn policy(p1: f64, sigma: f64, delta: f64, cdf: NoiseDistribution, nonparametric: Option<PathBuf>, output: &Output) -> Run {
    let complete = policy_complete(p1, delta, cdf.as_cdf())?;
    let interval = policy_incomplete_interval(p1, sigma, delta, cdf.as_cdf())?;
    let nonparametric = match nonparametric {
        Some(path) => {
            let file = fs::File::open(&path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            let f = TabulatedCdf::from_csv(file)?;
            Some(nonparametric_policy_bounds(p1, delta, &f)?)
        }
        None => None,
    };
    output.emit(&json!({
        "distribution": cdf.name(),
        "complete": complete,
        "incomplete": interval,
        "nonparametric": nonparametric,
    }))
}

#[allow(clippy::too_many_arguments)]
fn election(
    data: &Path,
    race: &str,
    config: Option<PathBuf>,
    source: TurnoutSource,
    figures: bool,
    options: FigureOptions,
    output: &Output,
) -> Run {
    let file = fs::File::open(data).map_err(|e| Failure::Data(format!("{}: {e}", data.display())))?;
    let records = ingest(file)?;
    let config: ElectionConfig = match config {
        Some(path) => read_json(&path)?,
        None => ElectionConfig::default(),
    };
    let race_config = config.race(race);
    let summary = summarize(&records, race, source)?;
    let rotation = check_rotation(&records, race);
    if !rotation.is_clean() {
        eprintln!("warning: ballot order in race {race} departs from the rotation rule ({} precincts)", rotation.issues.len());
    }
    let mut doc = json!({ "summary": summary, "rotation": rotation });
    if figures {
        let docs = standard_figures(&summary, &race_config)?;
        for (name, fig) in &docs {
            if let Some(path) = output.svg_path(&format!("election-{race}"), Some(name)) {
                write_file(&path, &fig.svg())?;
            }
        }
        doc["figures"] = json!(docs.into_iter().map(|(name, fig)| json!({ "name": name, "document": fig })).collect::<Vec<_>>());
    } else if summary.candidates.len() == 2 {
        let fig = figure_pipeline(&summary, &race_config, &options)?;
        if let Some(path) = output.svg_path(&format!("election-{race}"), None) {
            write_file(&path, &fig.svg())?;
        }
        doc["figure"] = json!(fig);
    }
    output.emit(&doc)
}

#[derive(Deserialize)]
struct KnightianModel {
    utility: StateUtility,
    prior: PriorSet,
}

fn knightian(model: &Path, output: &Output) -> Run {
    let m: KnightianModel = read_json(model)?;
    m.utility.validate()?;
    let names = &m.utility.alternatives;
    let mut pairs = Vec::new();
    for x in 0..names.len() {
        for y in x + 1..names.len() {
            pairs.push(json!({
                "x": names[x],
                "y": names[y],
                "min_x_minus_y": min_expected_difference(x, y, &m.utility, &m.prior)?,
                "min_y_minus_x": min_expected_difference(y, x, &m.utility, &m.prior)?,
                "comparison": bewley_prefers(x, y, &m.utility, &m.prior)?,
            }));
        }
    }
    let nondominated: Vec<&String> = knightian_nondominated(&m.utility, &m.prior)?.into_iter().map(|i| &names[i]).collect();
    output.emit(&json!({ "pairs": pairs, "nondominated": nondominated }))
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Region { kind, output } => match kind {
            RegionKind::Binary { p0, p1, nu, iv, gamma, unobserved_mode, pi0, pi1 } => {
                region_binary(p0, p1, nu, iv, gamma, unobserved_mode, pi0, pi1, &output)
            }
            RegionKind::Multi { p, n } => region_multi(&p, n, &output),
        },
        Command::Oracle { theta, p, output } => oracle(&theta, &p, &output),
        Command::Simulate { spec, seed, mode, output } => simulate_cmd(&spec, seed, mode, &output),
        Command::Policy { p1, sigma, delta, cdf, nonparametric, output } => policy(p1, sigma, delta, cdf, nonparametric, &output),
        Command::Election { data, race, config, turnout_source, figures, iv, unobserved_mode, consideration, output } => {
            let options = FigureOptions { iv, unobserved: unobserved_mode, consideration };
            election(&data, &race, config, turnout_source, figures, options, &output)
        }
        Command::Knightian { model, output } => knightian(&model, &output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.code())
        }
    }
}
