//! Command-line front end.
//!
//! Every report is a JSON object `{"config": .., "report": ..}` where `config`
//! echoes the parsed invocation. Rationals are `{num, den}` decimal strings and
//! floats are printed with 17 significant digits, so identical flags give
//! identical bytes.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or input error, 3 sampling
//! failure, 4 internal consistency failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fpras::{estimate_covariance, Budget};
use crate::gadget::reduction::{recover_partition, ExactSignOracle, TiePolicy};
use crate::gadget::{build_gadget, GadgetSummary};
use crate::learner::{audit_weighting, learn_weights, LearnConfig};
use crate::model::io::{read_graph, GraphFile};
use crate::model::{lambda_of_beta, IsingInstance, Mode, OddSet, SubsetWeighting, VertexPair};
use crate::oracle::{Caps, Oracle};
use crate::rational::{parse, to_f64, to_json, Rational};
use crate::seed::{chain_rng, derive_seed, DIAGNOSTIC};
use crate::worm::{mixing_budget, sample_final_states, WormKernel};

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SAMPLING: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\npackage: ",
    env!("CARGO_PKG_NAME"),
    "\nrng: xoshiro256++ with splitmix64 seed derivation",
    "\narithmetic: num-bigint rationals"
);

#[derive(Debug, Parser)]
#[command(name = "wormcov", version, long_version = LONG_VERSION)]
#[command(about = "Ising covariance estimation with the weighted worm process")]
pub struct Cli {
    /// Worker threads for sampling (0 = one per core). Does not change results.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Largest vertex count for spin enumeration.
    #[arg(long, global = true, env = "WORMCOV_MAX_SPIN_VERTICES", default_value_t = 20)]
    pub max_spin_vertices: usize,

    /// Largest edge count for edge-subset enumeration.
    #[arg(long, global = true, env = "WORMCOV_MAX_SUBSET_EDGES", default_value_t = 24)]
    pub max_subset_edges: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact partition function, four-corner sums, covariance and Z_S by enumeration.
    Exact(ExactArgs),
    /// Multiplicative estimate of E[σ(s)σ(t)] on a ferromagnetic instance.
    Estimate(EstimateArgs),
    /// Run the annealing schedule and print the learned pair weights.
    LearnWeights(LearnArgs),
    /// Run independent worm chains and report where they end.
    SampleWorm(SampleArgs),
    /// Build the path gadget approximating a target ratio.
    Gadget(GadgetArgs),
    /// Recover Z exactly from covariance signs on a uniform antiferromagnetic graph.
    ReduceDemo(ReduceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ExactArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Even vertex set for Z_S, comma separated (repeatable; ferromagnetic only).
    #[arg(long = "subset")]
    pub subsets: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start from the reduced desk-scale budget instead of the full one.
    #[arg(long)]
    pub desk: bool,
    #[arg(long)]
    pub c_mix: Option<f64>,
    #[arg(long)]
    pub learn_sample_scale: Option<f64>,
    #[arg(long)]
    pub estimate_sample_scale: Option<f64>,
    #[arg(long)]
    pub share_stage_chains: Option<bool>,
    /// Also compute the exact covariance and report whether the estimate is within e^±ε.
    #[arg(long)]
    pub compare_exact: bool,
    /// Include wall-clock time (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct LearnArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub c_mix: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sample_scale: f64,
    #[arg(long)]
    pub share_stage_chains: bool,
    /// Check every stage's weights exactly against the next stage's Z_S/Z_∅.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub chains: u64,
    /// Steps per chain; defaults to the mixing budget for `--delta`.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_mix: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pair weights: a `learn-weights` report or a bare `{"pairs": [...]}` document.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Add exact stationary class masses.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GadgetArgs {
    /// Vertex count of the host graph (sets L and the accuracy target).
    #[arg(long)]
    pub n: usize,
    /// Target ratio β′ as `p/q` or an integer.
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value = "1/1000000")]
    pub acc: String,
    #[arg(long, default_value = "1/2")]
    pub b: String,
    /// Also write the realized gadget as a graph file.
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
    /// Compare β̂ with the four-corner ratio of the realized graph.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ReduceArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Uniform weight; defaults to the file's weight for uniform antiferromagnetic graphs.
    #[arg(long)]
    pub b: Option<String>,
    /// Check each search against exact ν and the result against enumeration.
    #[arg(long)]
    pub audit: bool,
    /// Seed for the oracle's answers at zero covariance.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Echo of the invocation embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub graph: Option<String>,
    pub s: Option<usize>,
    pub t: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub c_mix: Option<f64>,
    pub max_spin_vertices: usize,
    pub max_subset_edges: usize,
    pub output: Option<String>,
    pub threads: usize,
    pub arguments: Value,
}

impl RunConfig {
    fn new(cli: &Cli, subcommand: &'static str, arguments: &impl Serialize) -> Self {
        RunConfig {
            subcommand,
            graph: None,
            s: None,
            t: None,
            epsilon: None,
            delta: None,
            seed: None,
            c_mix: None,
            max_spin_vertices: cli.max_spin_vertices,
            max_subset_edges: cli.max_subset_edges,
            output: cli.output.as_ref().map(|p| p.display().to_string()),
            threads: cli.threads,
            arguments: serde_json::to_value(arguments).expect("arguments serialise"),
        }
    }

    fn with_graph(mut self, path: &Path) -> Self {
        self.graph = Some(path.display().to_string());
        self
    }
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            _ if e.is_sampling_failure() => EXIT_SAMPLING,
            Error::Internal(_) => EXIT_INTERNAL,
            Error::Stage { source, .. } | Error::Phase { source, .. } if matches!(**source, Error::Internal(_)) => {
                EXIT_INTERNAL
            }
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `argv` and runs the command, printing to stdout/stderr. Returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => match &cli.output {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    EXIT_IO
                }
            },
            None => {
                print!("{text}");
                0
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Runs a parsed command and returns the rendered report.
pub fn execute(cli: &Cli) -> std::result::Result<String, Failure> {
    if cli.threads > 0 {
        // A second build in the same process fails harmlessly; the first pool stays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let oracle = Oracle::new(Caps {
        max_spin_vertices: cli.max_spin_vertices,
        max_subset_edges: cli.max_subset_edges,
    });
    let (config, report) = match &cli.command {
        Command::Exact(a) => run_exact(cli, a, &oracle)?,
        Command::Estimate(a) => run_estimate(cli, a, &oracle)?,
        Command::LearnWeights(a) => run_learn(cli, a, &oracle)?,
        Command::SampleWorm(a) => run_sample(cli, a, &oracle)?,
        Command::Gadget(a) => run_gadget(cli, a, &oracle)?,
        Command::ReduceDemo(a) => run_reduce(cli, a, &oracle)?,
    };
    let doc = json!({
        "config": serde_json::to_value(&config).expect("config serialises"),
        "report": report,
    });
    Ok(render(&doc))
}

type Outcome = std::result::Result<(RunConfig, Value), Failure>;

fn rat(x: &Rational) -> Value {
    serde_json::to_value(to_json(x)).expect("rational serialises")
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("report serialises")
}

fn parse_set(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Argument(format!("{s:?} in subset {text:?} is not a vertex")))
        })
        .collect()
}

fn run_exact(cli: &Cli, a: &ExactArgs, oracle: &Oracle) -> Outcome {
    let mut config = RunConfig::new(cli, "exact", a).with_graph(&a.graph);
    config.s = a.s;
    config.t = a.t;
    let inst = read_graph(&a.graph)?;
    let g = inst.graph();
    let mut report = serde_json::Map::new();
    report.insert("mode".into(), to_value(&inst.mode()));
    report.insert("n".into(), json!(inst.n()));
    report.insert("m".into(), json!(inst.m()));
    report.insert("Z_ising".into(), rat(&oracle.ising_partition(g)?));
    match (a.s, a.t) {
        (Some(s), Some(t)) => {
            let fc = oracle.four_corner(g, s, t)?;
            let cov = fc.covariance();
            report.insert(
                "four_corner".into(),
                json!({"pp": rat(&fc.pp), "pm": rat(&fc.pm), "mp": rat(&fc.mp), "mm": rat(&fc.mm)}),
            );
            report.insert("covariance_f64".into(), json!(to_f64(&cov)));
            report.insert("covariance".into(), rat(&cov));
        }
        (None, None) => {}
        _ => return Err(Error::Argument("--s and --t must be given together".into()).into()),
    }
    if !a.subsets.is_empty() {
        let lambda = lambda_of_beta(&inst)?;
        let sets: Vec<Vec<usize>> = a.subsets.iter().map(|s| parse_set(s)).collect::<Result<_>>()?;
        let max_size = sets.iter().map(Vec::len).max().unwrap_or(0);
        if let Some(odd) = sets.iter().find(|s| s.len() % 2 == 1) {
            return Err(Error::Argument(format!("subset {odd:?} has odd size; Z_S vanishes")).into());
        }
        let z = oracle.even_partitions(g, lambda.values(), max_size)?;
        let z0 = z.get_mask(0);
        let mut rows = Vec::new();
        for set in &sets {
            let zs = z.get(set)?;
            rows.push(json!({
                "set": set,
                "Z_even": rat(&zs),
                "moment": rat(&(&zs / &z0)),
            }));
        }
        report.insert("Z_even".into(), Value::Array(rows));
    }
    Ok((config, Value::Object(report)))
}

fn run_estimate(cli: &Cli, a: &EstimateArgs, oracle: &Oracle) -> Outcome {
    let mut budget = if a.desk { Budget::desk() } else { Budget::default() };
    if let Some(c) = a.c_mix {
        budget.c_mix = c;
    }
    if let Some(x) = a.learn_sample_scale {
        budget.learn_sample_scale = x;
    }
    if let Some(x) = a.estimate_sample_scale {
        budget.estimate_sample_scale = x;
    }
    if let Some(x) = a.share_stage_chains {
        budget.share_stage_chains = x;
    }
    for (name, v) in [
        ("c-mix", budget.c_mix),
        ("learn-sample-scale", budget.learn_sample_scale),
        ("estimate-sample-scale", budget.estimate_sample_scale),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Argument(format!("--{name} = {v} must be positive")).into());
        }
    }
    let mut config = RunConfig::new(cli, "estimate", a).with_graph(&a.graph);
    config.s = Some(a.s);
    config.t = Some(a.t);
    config.epsilon = Some(a.epsilon);
    config.delta = Some(a.delta);
    config.seed = Some(a.seed);
    config.c_mix = Some(budget.c_mix);
    let inst = read_graph(&a.graph)?;
    let mut report = estimate_covariance(&inst, a.s, a.t, a.epsilon, a.delta, &budget, a.seed)?;
    if !a.timing {
        report.wall_clock_seconds = None;
    }
    let mut value = to_value(&report);
    if a.compare_exact {
        let exact = oracle.ising_covariance_exact(inst.graph(), a.s, a.t)?;
        let e = to_f64(&exact);
        let within = if e == 0.0 {
            report.estimate == 0.0
        } else {
            (report.estimate / e).ln().abs() <= a.epsilon
        };
        value["exact"] = json!({"covariance": rat(&exact), "covariance_f64": e, "within_epsilon": within});
    }
    Ok((config, value))
}

fn run_learn(cli: &Cli, a: &LearnArgs, oracle: &Oracle) -> Outcome {
    let mut config = RunConfig::new(cli, "learn-weights", a).with_graph(&a.graph);
    config.delta = Some(a.delta);
    config.seed = Some(a.seed);
    config.c_mix = Some(a.c_mix);
    let inst = read_graph(&a.graph)?;
    let lambda = lambda_of_beta(&inst)?;
    let cfg = LearnConfig {
        c_mix: a.c_mix,
        sample_scale: a.sample_scale,
        share_stage_chains: a.share_stage_chains,
        seed: a.seed,
    };
    let learned = learn_weights(inst.graph(), &lambda, a.delta, &cfg)?;
    let pairs: Vec<Value> = learned
        .weighting
        .iter()
        .map(|(p, w)| json!({"u": p.u(), "v": p.v(), "w": w}))
        .collect();
    let mut stages = Vec::new();
    for rec in &learned.stages {
        let mut v = to_value(rec);
        if a.audit {
            let next = learned.schedule.stage(rec.stage + 1);
            v["audit"] = to_value(&audit_weighting(oracle, inst.graph(), next, &rec.weights_after)?);
        }
        stages.push(v);
    }
    let report = json!({
        "t": learned.schedule.t(),
        "pairs": pairs,
        "stages": stages,
        "total_steps": learned.total_steps,
    });
    Ok((config, report))
}

/// Reads pair weights from either a `learn-weights` report or `{"pairs": [...]}`.
fn read_weights(path: &Path, n: usize) -> Result<SubsetWeighting> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
    let pairs = doc
        .pointer("/report/pairs")
        .or_else(|| doc.get("pairs"))
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse(format!("{}: no \"pairs\" array", path.display())))?;
    let mut w = SubsetWeighting::ones(n);
    for (i, entry) in pairs.iter().enumerate() {
        let field = |k: &str| entry.get(k).ok_or_else(|| Error::Parse(format!("pairs[{i}].{k} is missing")));
        let u = field("u")?.as_u64().ok_or_else(|| Error::Parse(format!("pairs[{i}].u is not an index")))?;
        let v = field("v")?.as_u64().ok_or_else(|| Error::Parse(format!("pairs[{i}].v is not an index")))?;
        let x = field("w")?.as_f64().ok_or_else(|| Error::Parse(format!("pairs[{i}].w is not a number")))?;
        let (u, v) = (u as usize, v as usize);
        if u >= n || v >= n {
            return Err(Error::Parse(format!("pairs[{i}]: vertex out of range for n = {n}")));
        }
        let p = VertexPair::new(u, v).ok_or_else(|| Error::Parse(format!("pairs[{i}]: u = v")))?;
        w.set(p, x)?;
    }
    Ok(w)
}

fn class_label(set: OddSet) -> Value {
    match set {
        OddSet::Empty => json!([]),
        OddSet::Pair(p) => json!([p.u(), p.v()]),
    }
}

fn run_sample(cli: &Cli, a: &SampleArgs, oracle: &Oracle) -> Outcome {
    let mut config = RunConfig::new(cli, "sample-worm", a).with_graph(&a.graph);
    config.delta = Some(a.delta);
    config.seed = Some(a.seed);
    config.c_mix = Some(a.c_mix);
    if a.chains == 0 {
        return Err(Error::Argument("--chains must be positive".into()).into());
    }
    let inst = read_graph(&a.graph)?;
    let lambda = lambda_of_beta(&inst)?;
    let n = inst.n();
    let w = match &a.weights {
        Some(path) => read_weights(path, n)?,
        None => SubsetWeighting::ones(n),
    };
    let steps = match a.steps {
        Some(s) => s,
        None => mixing_budget(inst.graph(), &lambda, a.delta, a.c_mix)?,
    };
    let kernel = WormKernel::new(inst.graph(), &lambda, &w)?;
    let finals = sample_final_states(&kernel, steps, a.chains, derive_seed(a.seed, &[DIAGNOSTIC]));
    let mut counts = vec![0u64; 1 + n * n.saturating_sub(1) / 2];
    for f in &finals {
        match f {
            OddSet::Empty => counts[0] += 1,
            OddSet::Pair(p) => counts[1 + p.index(n)] += 1,
        }
    }
    let exact = if a.exact {
        let z = oracle.even_partitions(inst.graph(), lambda.values(), 2)?;
        let mut masses = vec![z.get_mask(0)];
        for p in VertexPair::all(n) {
            let wp = crate::rational::from_f64(w.get(p))?;
            masses.push(z.get_mask((1 << p.u()) | (1 << p.v())) * wp);
        }
        let total: Rational = masses.iter().sum();
        Some(masses.into_iter().map(|x| to_f64(&(x / &total))).collect::<Vec<_>>())
    } else {
        None
    };
    let classes = std::iter::once(OddSet::Empty).chain(VertexPair::all(n).map(OddSet::Pair));
    let occupancy: Vec<Value> = classes
        .zip(&counts)
        .enumerate()
        .map(|(i, (set, &c))| {
            let mut row = json!({
                "set": class_label(set),
                "count": c,
                "fraction": c as f64 / a.chains as f64,
            });
            if let Some(ex) = &exact {
                row["stationary"] = json!(ex[i]);
            }
            row
        })
        .collect();
    let report = json!({
        "steps": steps,
        "chains": a.chains,
        "final_classes": finals.iter().map(|&f| class_label(f)).collect::<Vec<_>>(),
        "occupancy": occupancy,
    });
    Ok((config, report))
}

fn run_gadget(cli: &Cli, a: &GadgetArgs, oracle: &Oracle) -> Outcome {
    let config = RunConfig::new(cli, "gadget", a);
    let b = parse(&a.b)?;
    let target = parse(&a.target)?;
    let acc = parse(&a.acc)?;
    let spec = build_gadget(a.n, &target, &acc, &b)?;
    let bounds = spec.check_bounds();
    let realized = IsingInstance::from_graph(spec.realize(), Mode::Antiferromagnetic)?;
    let file = GraphFile::from_instance(&realized);
    if let Some(path) = &a.graph_out {
        let text = serde_json::to_string_pretty(&file).expect("graph serialises");
        std::fs::write(path, text + "\n").map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    let mut report = json!({
        "gadget": to_value(&GadgetSummary::from(&spec)),
        "bounds_ok": bounds.is_ok(),
        "terminals": [0, 1],
        "graph": to_value(&file),
    });
    if let Err(e) = bounds {
        report["bounds_error"] = json!(e.to_string());
    }
    if a.verify {
        let fc = oracle.four_corner_reduced(realized.graph(), 0, 1)?;
        let realized_ratio = &fc.pp / &fc.pm;
        report["four_corner_ratio"] = rat(&realized_ratio);
        report["matches_beta_hat"] = json!(realized_ratio == spec.beta_hat);
    }
    Ok((config, report))
}

fn run_reduce(cli: &Cli, a: &ReduceArgs, oracle: &Oracle) -> Outcome {
    let mut config = RunConfig::new(cli, "reduce-demo", a).with_graph(&a.graph);
    config.seed = Some(a.seed);
    let inst = read_graph(&a.graph)?;
    let b = match &a.b {
        Some(text) => parse(text)?,
        None => {
            let first = inst.beta().first().cloned();
            match (inst.mode(), first) {
                (Mode::Antiferromagnetic, Some(b)) if inst.beta().iter().all(|x| *x == b) => b,
                _ => {
                    return Err(Error::Argument(
                        "--b is required unless the graph is uniformly antiferromagnetic".into(),
                    )
                    .into())
                }
            }
        }
    };
    let ties = TiePolicy::Random(chain_rng(derive_seed(a.seed, &[DIAGNOSTIC])));
    let mut sign = ExactSignOracle::new(*oracle, ties);
    let rec = recover_partition(inst.graph(), &b, &mut sign, a.audit.then_some(oracle))?;
    let mut report = json!({
        "b": rat(&b),
        "n": inst.n(),
        "m": inst.m(),
        "m_prime": rec.m_prime,
        "delta": rat(&rec.delta),
        "delta_prime": rat(&rec.delta_prime),
        "edges": to_value(&rec.steps),
        "Z_hat_f64": to_f64(&rec.z_hat),
        "Z": rat(&rec.z),
        "oracle_queries": sign.queries,
        "zero_covariance_ties": sign.ties_seen,
    });
    if let Some(z) = &rec.z_exact {
        report["Z_exact"] = rat(z);
        report["Z_matches"] = json!(*z == rec.z);
    }
    Ok((config, report))
}

/// Pretty JSON with floats at 17 significant digits.
pub fn render(doc: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, doc, 0);
    out.push('\n');
    out
}

pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n(' ', k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.is_f64(), n.as_f64()) {
            (true, Some(x)) => out.push_str(&format_float(x)),
            _ => write!(out, "{n}").unwrap(),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}
