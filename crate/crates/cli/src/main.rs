use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gapbench_core::amputation::{achieved_rate, ampute_data, AmputationConfig, Mechanism};
use gapbench_core::analysis::{informative_missingness, missingness_correlation};
use gapbench_core::bench::{self, ExperimentGrid, RunOptions};
use gapbench_core::dataset::{
    fit_normalizer, generate_synthetic, load_csv, load_mask_csv, write_csv, write_mask_csv, CsvOptions,
};
use gapbench_core::imputers::{parse_kv_pairs, ImputerSpec, Registry};
use gapbench_core::{Error, Frame, Mask};

const SEED_ENV: &str = "GAPBENCH_SEED";

/// Benchmark toolkit for imputing missing values in clinical vital-sign series.
///
/// Seeds resolve as: --seed flag, then the GAPBENCH_SEED environment
/// variable, then the config file (benchmark) or 0.
#[derive(Parser)]
#[command(name = "gapbench", version)]
struct Cli {
    /// Worker threads for parallel work (default: available parallelism).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic vitals dataset.
    Synth(SynthArgs),
    /// Remove observed values under a missingness mechanism.
    Ampute(AmputeArgs),
    /// Fill missing values with a registered imputation method.
    Impute(ImputeArgs),
    /// Run an experiment grid from a JSON config.
    Benchmark(BenchmarkArgs),
    /// Missingness analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    stays: usize,
    #[arg(long)]
    hours: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-feature native missing rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    native_rates: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismArg {
    Mcar,
    Mar,
    Mnar,
    Bo,
}

impl From<MechanismArg> for Mechanism {
    fn from(m: MechanismArg) -> Self {
        match m {
            MechanismArg::Mcar => Mechanism::Mcar,
            MechanismArg::Mar => Mechanism::Mar,
            MechanismArg::Mnar => Mechanism::Mnar,
            MechanismArg::Bo => Mechanism::Bo,
        }
    }
}

#[derive(Args)]
struct AmputeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    mechanism: MechanismArg,
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of features kept fully observed as MAR inputs.
    #[arg(long, default_value_t = 0.5)]
    mar_observed_fraction: f64,
    /// Use non-negative logistic coefficients (MAR/MNAR).
    #[arg(long)]
    positive_coefficients: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    mask: PathBuf,
}

#[derive(Args)]
struct ImputeArgs {
    #[arg(long)]
    method: String,
    #[arg(long)]
    input: PathBuf,
    /// Amputation mask (1 = removed). Cells empty in the input are filled either way.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// File to fit on; defaults to the input.
    #[arg(long)]
    train_input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Method hyperparameter as key=value; repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall-clock fit/impute times instead of zeros.
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Pearson correlation of per-feature missingness indicators.
    MissingnessCorrelation {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Missing rates by outcome class, ranked by absolute difference.
    InformativeMissingness {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        top_k: u64,
    },
}

/// Bad input detected by the CLI itself rather than the library.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer")).into()),
        Err(_) => Ok(None),
    }
}

fn load(path: &Path) -> Result<(Frame, Mask)> {
    load_csv(path, &CsvOptions::default()).with_context(|| format!("reading {}", path.display()))
}

fn synth(a: SynthArgs) -> Result<()> {
    let seed = resolve_seed(a.seed)?.unwrap_or(0);
    let (frame, obs) = generate_synthetic::<f64>(a.stays, a.hours, seed, &a.native_rates)?;
    write_csv(&frame, &obs, &a.out)?;
    Ok(())
}

fn ampute(a: AmputeArgs) -> Result<()> {
    let mut cfg = AmputationConfig::new(a.mechanism.into(), a.rate, resolve_seed(a.seed)?.unwrap_or(0));
    cfg.mar_observed_fraction = a.mar_observed_fraction;
    cfg.positive_coefficients = a.positive_coefficients;
    if !(cfg.rate > 0.0 && cfg.rate < 1.0) {
        return Err(Usage(format!("--rate {} must lie in (0, 1)", cfg.rate)).into());
    }
    let (frame, obs) = load(&a.input)?;
    cfg.validate(frame.n_features())?;
    let (amputed, mask) = ampute_data(&frame, &obs, &cfg)?;
    write_csv(&amputed, &amputed.observation_mask(), &a.out)?;
    write_mask_csv(&frame, &mask, &a.mask)?;
    println!("achieved_rate={}", achieved_rate(&mask, &obs));
    Ok(())
}

fn impute(a: ImputeArgs) -> Result<()> {
    let registry = Registry::<f64>::with_builtins();
    let params = parse_kv_pairs(&a.params)?;
    let spec = ImputerSpec {
        name: a.method.clone(),
        params,
        seed: resolve_seed(a.seed)?.unwrap_or(0),
    };
    registry.build(&spec)?;

    let (input, input_obs) = load(&a.input)?;
    let visible = match &a.mask {
        Some(p) => {
            let removed = load_mask_csv(p).with_context(|| format!("reading {}", p.display()))?;
            input.check_mask(&removed).context("mask does not match input grid")?;
            input_obs.and_not(&removed)
        }
        None => input_obs.clone(),
    };
    let (train, train_obs) = match &a.train_input {
        Some(p) => load(p)?,
        None => (input.clone(), visible.clone()),
    };
    if train.features() != input.features() {
        return Err(Usage("training file has different feature columns".into()).into());
    }
    let all: Vec<usize> = (0..train.n_stays()).collect();
    let stats = fit_normalizer(&train, &train_obs, &all)?;
    let fitted = registry.fit(&spec, &stats.apply(&train)?, &train_obs)?;
    let filled = stats.invert(&fitted.impute(&stats.apply(&input)?, &visible)?)?;

    // Visible cells keep their raw input bits; normalization is not exactly invertible.
    let values = input
        .values()
        .iter()
        .zip(visible.bits())
        .zip(filled.values())
        .map(|((orig, &vis), new)| if vis { *orig } else { *new })
        .collect();
    let out = input.with_values(values)?;
    write_csv(&out, &out.observation_mask(), &a.out)?;
    Ok(())
}

fn benchmark(a: BenchmarkArgs) -> Result<()> {
    let mut grid = ExperimentGrid::from_file(&a.config)?;
    if let Some(seed) = resolve_seed(a.seed)? {
        grid.master_seed = seed;
    }
    let registry = Registry::<f64>::with_builtins();
    let rows = bench::run_grid(&grid, &registry, RunOptions { timing: a.timing })?;
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    let summaries = if rows.iter().any(|r| r.is_ok()) {
        bench::standard_summaries(&rows)?
    } else {
        Vec::new()
    };
    bench::emit_results(&rows, &summaries, &grid, &a.out)?;
    bench::emit_plotdata(&rows, &a.out)?;
    println!("rows={} errors={failed} out={}", rows.len(), a.out.display());
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

fn analyze(cmd: AnalyzeCommand) -> Result<()> {
    match cmd {
        AnalyzeCommand::MissingnessCorrelation { input, out } => {
            let (frame, obs) = load(&input)?;
            let corr = missingness_correlation(&frame, &obs)?;
            let mut w = csv_writer(&out)?;
            let mut header = vec!["feature".to_string()];
            header.extend(corr.features.iter().cloned());
            w.write_record(&header)?;
            for (i, name) in corr.features.iter().enumerate() {
                let mut rec = vec![name.clone()];
                rec.extend((0..corr.features.len()).map(|j| corr.get(i, j).to_string()));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        AnalyzeCommand::InformativeMissingness { input, out, top_k } => {
            let (frame, obs) = load(&input)?;
            let report = informative_missingness(&frame, &obs, None, top_k as usize)?;
            let mut w = csv_writer(&out)?;
            w.write_record(["rank", "feature", "rate_survivors", "rate_non_survivors", "difference"])?;
            for (rank, f) in report.top().iter().enumerate() {
                w.write_record([
                    (rank + 1).to_string(),
                    f.feature.clone(),
                    f.rate_survivors.to_string(),
                    f.rate_non_survivors.to_string(),
                    f.difference.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|e| {
        e.is::<Usage>() || e.downcast_ref::<Error>().is_some_and(Error::is_usage)
    });
    if usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Ampute(a) => ampute(a),
        Command::Impute(a) => impute(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Analyze(c) => analyze(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
