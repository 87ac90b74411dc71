//! `netgof`: fit random-graph models, test their fit and run the simulation study.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use netgof_core::estimators::{fit, CandidateModel};
use netgof_core::gof::{
    gof_test, select_k_dcmm, DEFAULT_ALPHA, DEFAULT_K_MAX, DEFAULT_SELECT_ALPHA,
};
use netgof_core::graph::{load_edge_list, write_edge_list};
use netgof_core::models::{build_probability_matrix, sample_adjacency};
use netgof_core::numerics::{stable_id, SeededStream};
use netgof_core::{AdjacencyMatrix, Indexing};
use netgof_harness::{
    parse_candidate, ExperimentConfig, ExperimentKind, Format, HarnessError, Setting,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "netgof",
    version,
    about = "Spectral goodness-of-fit tests for random-graph models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it as an edge list with a JSON sidecar.
    Generate(GenerateArgs),
    /// Fit a candidate model and print its parameters as JSON.
    Fit(FitArgs),
    /// Test the fit of a candidate model.
    Test(TestArgs),
    /// Estimate the number of communities with sequential DCMM tests.
    SelectK(SelectArgs),
    /// Run a simulation or real-data experiment from a config file.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// `er` or a preset: beta_linear, sbm_planted, dcsbm_three_level, lsm_sine, dcmm_mixed.
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    /// Model parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list path; the sidecar goes next to it with a `.json` extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InputArgs {
    /// Edge list, one pair per line.
    #[arg(long)]
    input: PathBuf,
    /// Node ids start at 0 instead of 1.
    #[arg(long)]
    zero_based: bool,
    /// Node count, for graphs whose highest ids are isolated.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Args)]
struct ModelArgs {
    /// er, beta, sbm, dcsbm, dcmm or lsm; `sbm:3` style is also accepted.
    #[arg(long)]
    model: String,
    /// Number of communities for sbm, dcsbm and dcmm.
    #[arg(long)]
    k: Option<usize>,
    /// Latent dimension for lsm.
    #[arg(long)]
    d: Option<usize>,
    /// Indefinite lsm signature as `a/b`.
    #[arg(long)]
    signature: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    kmax: usize,
    #[arg(long, default_value_t = DEFAULT_SELECT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// null, size, power, kest or real; must agree with the config if both are given.
    #[arg(long)]
    experiment: Option<ExperimentKind>,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Result table; `.json` selects JSON, anything else CSV. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(h) = cause.downcast_ref::<HarnessError>() {
            return match h {
                HarnessError::Config(_) => 2,
                HarnessError::DatasetMissing { .. } => 3,
                _ => 1,
            };
        }
        if let Some(netgof_core::Error::InvalidArgument(_)) =
            cause.downcast_ref::<netgof_core::Error>()
        {
            return 2;
        }
    }
    1
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Generate(args) => generate(args)?,
        Command::Fit(args) => {
            let a = load(&args.input)?;
            let candidate = candidate(&args.model)?;
            let mut rng = SeededStream::new(args.seed, stable_id("fit"));
            let f = fit::<f64, _>(&a, candidate, &mut rng)?;
            stdout(&serde_json::to_string_pretty(&f)?)?;
        }
        Command::Test(args) => {
            let a = load(&args.input)?;
            let candidate = candidate(&args.model)?;
            let mut rng = SeededStream::new(args.seed, stable_id("test"));
            let r = gof_test::<f64, _>(&a, candidate, args.alpha, &mut rng)?;
            match args.format {
                OutputFormat::Json => {
                    let out = json!({
                        "candidate": candidate.to_string(),
                        "statistic": r.statistic,
                        "p_value": r.p_value,
                        "alpha": r.alpha,
                        "decision": r.decision,
                        "diagnostics": r.fit.diagnostics,
                    });
                    stdout(&serde_json::to_string_pretty(&out)?)?;
                }
                OutputFormat::Text => stdout(&format!(
                    "{candidate}: T = {:.6}, p = {:.6}, {:?} at alpha = {}",
                    r.statistic, r.p_value, r.decision, r.alpha
                ))?,
            }
        }
        Command::SelectK(args) => {
            let a = load(&args.input)?;
            let stream = SeededStream::new(args.seed, stable_id("select-k"));
            let r = select_k_dcmm(&a, args.kmax, args.alpha, &stream)?;
            stdout(&serde_json::to_string_pretty(&r)?)?;
        }
        Command::Simulate(args) => return simulate(args),
    }
    Ok(ExitCode::SUCCESS)
}

/// Prints `text` and a newline; a closed pipe is not an error.
fn stdout(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn load(input: &InputArgs) -> anyhow::Result<AdjacencyMatrix> {
    if !input.input.is_file() {
        return Err(HarnessError::DatasetMissing {
            name: input
                .input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            path: input.input.display().to_string(),
        }
        .into());
    }
    let indexing = if input.zero_based {
        Indexing::ZeroBased
    } else {
        Indexing::OneBased
    };
    let reader = BufReader::new(File::open(&input.input)?);
    let loaded = load_edge_list(reader, indexing, input.nodes)
        .with_context(|| format!("reading {}", input.input.display()))?;
    if loaded.self_loops + loaded.duplicates > 0 {
        eprintln!(
            "note: dropped {} self-loops and {} duplicate edges",
            loaded.self_loops, loaded.duplicates
        );
    }
    Ok(loaded.adjacency)
}

fn candidate(m: &ModelArgs) -> anyhow::Result<CandidateModel> {
    let config = |msg: String| anyhow::Error::from(HarnessError::Config(msg));
    if m.model.contains(':') {
        return Ok(parse_candidate(&m.model)?);
    }
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| config(format!("--model {} needs --{flag}", m.model)))
    };
    let c = match m.model.as_str() {
        "er" => CandidateModel::Er,
        "beta" => CandidateModel::Beta,
        "sbm" => CandidateModel::Sbm { k: need(m.k, "k")? },
        "dcsbm" => CandidateModel::Dcsbm { k: need(m.k, "k")? },
        "dcmm" => CandidateModel::Dcmm { k: need(m.k, "k")? },
        "lsm" => {
            let d = need(m.d, "d")?;
            let signature = match &m.signature {
                None => None,
                Some(s) => Some(
                    s.split_once('/')
                        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                        .ok_or_else(|| config(format!("--signature {s:?} is not a/b")))?,
                ),
            };
            CandidateModel::Lsm { d, signature }
        }
        other => bail!(HarnessError::Config(format!("unknown model {other:?}"))),
    };
    c.validate().map_err(|e| config(e.to_string()))?;
    Ok(c)
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let params = args
        .params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| HarnessError::Config(format!("--param {p:?} is not key=value")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let setting = Setting { n: args.n, params };
    let truth = setting.truth_spec(&args.model)?;
    let mut stream = SeededStream::new(args.seed, stable_id("generate"));
    let model = truth.draw(&mut stream)?;
    let p = build_probability_matrix(&model)?;
    let a = sample_adjacency(&p, &mut stream);

    let mut out = BufWriter::new(
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?,
    );
    write_edge_list(&a, &mut out, Indexing::OneBased)?;
    out.flush()?;
    let sidecar = json!({
        "model": args.model,
        "n": args.n,
        "params": setting.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "seed": args.seed,
        "edges": a.edge_count(),
        "indexing": "one_based",
        "truth": model,
    });
    fs::write(
        args.out.with_extension("json"),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let has_kind = text.lines().any(|l| {
        l.split('#')
            .next()
            .unwrap_or("")
            .split_once('=')
            .is_some_and(|(k, _)| k.trim() == "experiment")
    });
    let text = match args.experiment {
        Some(kind) if !has_kind => format!("experiment = {kind}\n{text}"),
        _ => text,
    };
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(kind) = args.experiment {
        if kind != cfg.kind {
            bail!(HarnessError::Config(format!(
                "--experiment {kind} disagrees with the config's {}",
                cfg.kind
            )));
        }
    }
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(out) = args.out {
        cfg.output = Some(out);
    }
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = netgof_harness::run(&cfg, jobs)?;

    for notice in &outcome.table.notices {
        eprintln!("note: {notice}");
    }
    match &cfg.output {
        Some(path) => {
            outcome.table.emit(path)?;
            if let Some(points) = &outcome.points {
                fs::write(points_path(path), points)?;
            }
        }
        None => stdout(outcome.table.render(Format::Csv)?.trim_end())?,
    }
    if outcome.missing.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: missing datasets: {}", outcome.missing.join(", "));
        Ok(ExitCode::from(3))
    }
}

/// `out/null.csv` → `out/null.points.csv`.
fn points_path(table: &Path) -> PathBuf {
    table.with_extension("points.csv")
}
