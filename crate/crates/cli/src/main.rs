//! `crysgen`: sampling, reconstruction and evaluation of periodic crystals.

mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crysgen_core::crystal::niggli_reduce_with_transform;
use crysgen_core::graph::knn_graph;
use crysgen_core::io::{load_dataset, save_dataset, write_atomic, CrystalRecord, RunConfig};
use crysgen_core::metrics::{structure_match, MatchTolerances};
use crysgen_core::synthetic::{synthetic_dataset, SyntheticSpec};
use crysgen_core::tasks::{self, AggregateSource};
use crysgen_core::{Lattice, LatticeParams};

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "crysgen", version, about = "Periodic crystal sampling and evaluation")]
struct Cli {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add coordinate and type noise to every record of a dataset.
    Perturb(PerturbArgs),
    /// Generate structures with annealed Langevin dynamics.
    Sample(SampleArgs),
    /// Perturb, anneal back with the harmonic field, and match.
    Reconstruct(ReconstructArgs),
    /// Validity, coverage and property statistics of a generated set.
    Evaluate(EvaluateArgs),
    /// Derive coverage thresholds from a reference dataset.
    CalibrateThresholds(CalibrateArgs),
    /// Niggli-reduce every record.
    Niggli(NiggliArgs),
    /// Periodic k-nearest-neighbour graph of one record, as CSV.
    Graph(GraphArgs),
    /// Compare two structures.
    Match(MatchArgs),
    /// Write a dataset of random well-separated crystals.
    Synthesize(SynthesizeArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Perturb(_) => "perturb",
            Command::Sample(_) => "sample",
            Command::Reconstruct(_) => "reconstruct",
            Command::Evaluate(_) => "evaluate",
            Command::CalibrateThresholds(_) => "calibrate-thresholds",
            Command::Niggli(_) => "niggli",
            Command::Graph(_) => "graph",
            Command::Match(_) => "match",
            Command::Synthesize(_) => "synthesize",
        }
    }
}

#[derive(Args)]
struct BatchArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    /// Coordinate noise in Å.
    #[arg(long, conflicts_with = "level")]
    sigma_x: Option<f64>,
    /// Type noise weight.
    #[arg(long, conflicts_with = "level")]
    sigma_a: Option<f64>,
    /// Zero-based schedule level supplying both noise values.
    #[arg(long)]
    level: Option<usize>,
    #[command(flatten)]
    batch: BatchArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// Dataset whose records supply composition, lattice and atom count.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    num_samples: Option<usize>,
    #[command(flatten)]
    batch: BatchArgs,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Coordinate noise in Å applied before annealing.
    #[arg(long)]
    sigma: Option<f64>,
    #[command(flatten)]
    batch: BatchArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    generated: Option<PathBuf>,
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    delta_struc: Option<f64>,
    #[arg(long)]
    delta_comp: Option<f64>,
    /// Precomputed per-record property to compare by EMD (repeatable).
    #[arg(long = "property")]
    properties: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    percentile: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NiggliArgs {
    #[arg(long)]
    input: PathBuf,
    /// Write the reduced dataset here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    input: PathBuf,
    /// Record id; the first record when omitted.
    #[arg(long)]
    id: Option<String>,
    #[arg(long, default_value_t = 12)]
    k: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    id_a: Option<String>,
    #[arg(long)]
    id_b: Option<String>,
    #[arg(long)]
    stol: Option<f64>,
    #[arg(long)]
    angle_tol: Option<f64>,
    #[arg(long)]
    ltol: Option<f64>,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    min_atoms: usize,
    #[arg(long, default_value_t = 20)]
    max_atoms: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    command: &'a str,
    message: String,
    causes: Vec<String>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport {
                error: ErrorBody {
                    command: name,
                    message: format!("{e:#}"),
                    causes: e.chain().map(|c| c.to_string()).collect(),
                },
            };
            eprintln!("{}", serde_json::to_string(&report).expect("error serializes"));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Perturb(a) => perturb(config, a),
        Command::Sample(a) => sample(config, a),
        Command::Reconstruct(a) => reconstruct(config, a),
        Command::Evaluate(a) => evaluate(config, a),
        Command::CalibrateThresholds(a) => calibrate(config, a),
        Command::Niggli(a) => niggli(a),
        Command::Graph(a) => graph(a),
        Command::Match(a) => match_cmd(config, a),
        Command::Synthesize(a) => synthesize(a),
    }
}

fn apply_batch(config: &mut RunConfig, batch: &BatchArgs) {
    if let Some(s) = batch.seed {
        config.seed = s;
    }
    if let Some(o) = &batch.out {
        config.output_dir = Some(o.clone());
    }
}

fn output_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config
        .output_dir
        .clone()
        .ok_or_else(|| anyhow!("no output directory: pass --out or set output_dir"))?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn load(path: &Path) -> Result<Vec<CrystalRecord>> {
    load_dataset(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn required(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.clone().ok_or_else(|| anyhow!("no {what} dataset given"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(text)
}

fn perturb(mut config: RunConfig, a: PerturbArgs) -> Result<()> {
    apply_batch(&mut config, &a.batch);
    config.validate()?;
    let (sigma_x, sigma_a) = match a.level {
        Some(j) => {
            let schedule = config.sampler_config()?.schedule;
            if j >= schedule.len() {
                bail!("level {j} outside a {}-level schedule", schedule.len());
            }
            let l = schedule.level(j);
            (l.sigma_x, l.sigma_a)
        }
        None => (a.sigma_x.unwrap_or(0.0), a.sigma_a.unwrap_or(0.0)),
    };
    let records = load(&a.input)?;
    let out = tasks::perturb_dataset(&records, sigma_x, sigma_a, config.seed)?;
    let dir = output_dir(&config)?;
    save_dataset(&out, &dir.join("perturbed.jsonl"))?;
    let mut m = Manifest::new("perturb", &config);
    m.input(&a.input)?;
    m.output(&dir, "perturbed.jsonl")?;
    m.write(&dir)?;
    println!(
        "perturbed {} records (sigma_x = {sigma_x}, sigma_a = {sigma_a})",
        out.len()
    );
    Ok(())
}

fn sample(mut config: RunConfig, a: SampleArgs) -> Result<()> {
    apply_batch(&mut config, &a.batch);
    if let Some(r) = a.reference {
        config.data.reference = Some(r);
    }
    if let Some(n) = a.num_samples {
        config.sample.num_samples = n;
    }
    config.validate()?;
    let sampler = config.sampler_config()?;
    let mut manifest = Manifest::new("sample", &config);
    let dataset;
    let (composition, lattice);
    let source = if config.sample.is_literal() {
        composition = config.sample.composition()?.expect("literal composition");
        lattice = Lattice::from_params(config.sample.lattice.as_ref().expect("literal lattice"))?;
        AggregateSource::Literal {
            composition: &composition,
            lattice: &lattice,
            num_atoms: config.sample.num_atoms.expect("literal atom count"),
        }
    } else {
        let path = required(
            &config.data.reference,
            "reference (or set sample.composition, lattice, num_atoms)",
        )?;
        dataset = load(&path)?;
        manifest.input(&path)?;
        AggregateSource::Dataset(&dataset)
    };
    let run = tasks::sample(&config.field, source, config.sample.num_samples, &sampler)?;
    let dir = output_dir(&config)?;
    save_dataset(&run.records, &dir.join("generated.jsonl"))?;
    let mut csv = Vec::new();
    run.write_trajectories_csv(&mut csv)?;
    write_atomic(&dir.join("trajectories.csv"), &csv)?;
    manifest.output(&dir, "generated.jsonl")?;
    manifest.output(&dir, "trajectories.csv")?;
    manifest.write(&dir)?;
    println!("generated {} structures", run.records.len());
    Ok(())
}

fn reconstruct(mut config: RunConfig, a: ReconstructArgs) -> Result<()> {
    apply_batch(&mut config, &a.batch);
    if let Some(p) = a.input {
        config.data.reference = Some(p);
    }
    if let Some(s) = a.sigma {
        config.reconstruct.sigma = s;
    }
    config.validate()?;
    let path = required(&config.data.reference, "input")?;
    let records = load(&path)?;
    let (report, out) = tasks::reconstruct(
        &records,
        &config.sampler_config()?,
        config.reconstruct.sigma,
        &config.metrics.tolerances(),
    )?;
    let dir = output_dir(&config)?;
    save_dataset(&out, &dir.join("reconstructed.jsonl"))?;
    write_json(&dir.join("reconstruct.json"), &report)?;
    let mut m = Manifest::new("reconstruct", &config);
    m.input(&path)?;
    m.output(&dir, "reconstructed.jsonl")?;
    m.output(&dir, "reconstruct.json")?;
    m.write(&dir)?;
    println!(
        "match rate {:.1}% ({}/{}), mean normalized RMSE {}",
        report.match_rate,
        report.num_matched,
        report.num_records,
        report
            .mean_rmse_normalized
            .map_or("n/a".to_string(), |r| format!("{r:.4}"))
    );
    Ok(())
}

fn evaluate(mut config: RunConfig, a: EvaluateArgs) -> Result<()> {
    if let Some(p) = a.generated {
        config.data.generated = Some(p);
    }
    if let Some(p) = a.reference {
        config.data.reference = Some(p);
    }
    if let Some(o) = a.out {
        config.output_dir = Some(o);
    }
    config.metrics.delta_struc = a.delta_struc.or(config.metrics.delta_struc);
    config.metrics.delta_comp = a.delta_comp.or(config.metrics.delta_comp);
    config.validate()?;
    let gen_path = required(&config.data.generated, "generated")?;
    let ref_path = required(&config.data.reference, "reference")?;
    let generated = load(&gen_path)?;
    let reference = load(&ref_path)?;
    let thresholds = match config.metrics.thresholds() {
        Some(t) => t,
        None => {
            let t = tasks::calibrate(&reference, config.metrics.calibration_percentile)?.thresholds;
            // calibrated values are part of the effective configuration
            config.metrics.delta_struc = Some(t.delta_struc);
            config.metrics.delta_comp = Some(t.delta_comp);
            t
        }
    };
    let report = tasks::evaluate(&generated, &reference, &thresholds, &a.properties)?;
    let dir = output_dir(&config)?;
    let text = write_json(&dir.join("evaluate.json"), &report)?;
    let mut m = Manifest::new("evaluate", &config);
    m.input(&gen_path)?;
    m.input(&ref_path)?;
    m.output(&dir, "evaluate.json")?;
    m.write(&dir)?;
    print!("{text}");
    Ok(())
}

fn calibrate(mut config: RunConfig, a: CalibrateArgs) -> Result<()> {
    if let Some(p) = a.reference {
        config.data.reference = Some(p);
    }
    if let Some(q) = a.percentile {
        config.metrics.calibration_percentile = q;
    }
    if let Some(o) = a.out {
        config.output_dir = Some(o);
    }
    config.validate()?;
    let path = required(&config.data.reference, "reference")?;
    let report = tasks::calibrate(&load(&path)?, config.metrics.calibration_percentile)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if config.output_dir.is_some() {
        let dir = output_dir(&config)?;
        write_json(&dir.join("thresholds.json"), &report)?;
        let mut m = Manifest::new("calibrate-thresholds", &config);
        m.input(&path)?;
        m.output(&dir, "thresholds.json")?;
        m.write(&dir)?;
    }
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct NiggliLine<'a> {
    id: &'a str,
    input: LatticeParams,
    reduced: LatticeParams,
    transform: [[i32; 3]; 3],
}

fn niggli(a: NiggliArgs) -> Result<()> {
    let records = load(&a.input)?;
    let mut reduced = Vec::with_capacity(records.len());
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for r in &records {
        let (lattice, t) = niggli_reduce_with_transform(r.crystal.lattice())
            .with_context(|| format!("record {:?}", r.id))?;
        let line = NiggliLine {
            id: &r.id,
            input: r.crystal.lattice().params(),
            reduced: lattice.params(),
            transform: t,
        };
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
        reduced.push(CrystalRecord {
            crystal: r.crystal.niggli_reduced()?,
            ..r.clone()
        });
    }
    if let Some(p) = a.output {
        save_dataset(&reduced, &p)?;
    }
    Ok(())
}

fn pick<'a>(records: &'a [CrystalRecord], id: Option<&str>, path: &Path) -> Result<&'a CrystalRecord> {
    match id {
        Some(id) => records
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| anyhow!("no record {id:?} in {}", path.display())),
        None => records
            .first()
            .ok_or_else(|| anyhow!("{} is empty", path.display())),
    }
}

fn graph(a: GraphArgs) -> Result<()> {
    if a.k == 0 {
        bail!("k must be >= 1");
    }
    let records = load(&a.input)?;
    let rec = pick(&records, a.id.as_deref(), &a.input)?;
    let g = knn_graph(&rec.crystal, a.k);
    let mut csv = Vec::new();
    g.write_csv(&mut csv)?;
    match a.output {
        Some(p) => write_atomic(&p, &csv)?,
        None => std::io::stdout().write_all(&csv)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct MatchReport<'a> {
    a: &'a str,
    b: &'a str,
    matched: bool,
    rmse_normalized: Option<f64>,
    tolerances: MatchTolerances,
}

fn match_cmd(config: RunConfig, a: MatchArgs) -> Result<()> {
    let defaults = config.metrics.tolerances();
    let tol = MatchTolerances {
        stol: a.stol.unwrap_or(defaults.stol),
        angle_tol: a.angle_tol.unwrap_or(defaults.angle_tol),
        ltol: a.ltol.unwrap_or(defaults.ltol),
    };
    let ra = load(&a.a)?;
    let rb = load(&a.b)?;
    let x = pick(&ra, a.id_a.as_deref(), &a.a)?;
    let y = pick(&rb, a.id_b.as_deref(), &a.b)?;
    let m = structure_match(&x.crystal, &y.crystal, &tol)?;
    let report = MatchReport {
        a: &x.id,
        b: &y.id,
        matched: m.matched,
        rmse_normalized: m.rmse_normalized,
        tolerances: tol,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn synthesize(a: SynthesizeArgs) -> Result<()> {
    let spec = SyntheticSpec {
        min_atoms: a.min_atoms,
        max_atoms: a.max_atoms,
        ..Default::default()
    };
    let records = synthetic_dataset(&spec, a.count, a.seed)?;
    save_dataset(&records, &a.output)?;
    println!("wrote {} records to {}", records.len(), a.output.display());
    Ok(())
}
