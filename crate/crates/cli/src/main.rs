//! `rsl`: command-line driver for the resonance OOD detection pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsl_core::baselines::BaselineMode;
use rsl_core::metrics::MetricSummary;
use rsl_core::par;
use rsl_core::pipeline::{self, DataSource, RunConfig, ScoreReport};
use rsl_core::RslError;

#[derive(Parser)]
#[command(name = "rsl", version, about = "Unsupervised OOD node detection by feature resonance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every phase and write the report
    Run(RunArgs),
    /// Resonance trace, selected epoch, and candidate set
    Resonance(RunArgs),
    /// Synthesize OOD nodes from a persisted candidate set
    Synthesize(RunArgs),
    /// Train the energy classifier from persisted candidates and synthetic nodes
    Classify(RunArgs),
    /// Score wild nodes from persisted resonance scores and model snapshot
    Score(RunArgs),
    /// Metrics for a score CSV
    Eval(EvalArgs),
    /// Write the toy dataset in the file-source layout
    GenToy(RunArgs),
    /// Write the SBM dataset in the file-source layout
    GenSbm(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Cosine,
    Euclidean,
    Mahalanobis,
}

impl From<Baseline> for BaselineMode {
    fn from(b: Baseline) -> Self {
        match b {
            Baseline::Cosine => BaselineMode::Cosine,
            Baseline::Euclidean => BaselineMode::Euclidean,
            Baseline::Mahalanobis => BaselineMode::Mahalanobis,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also score a prototype-distance baseline
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Run on a single worker thread
    #[arg(long)]
    single_thread: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// CSV with a header row
    file: PathBuf,
    /// Column of OOD scores (higher = more OOD)
    #[arg(long, default_value = "ood_score")]
    column: String,
    /// Column of 0/1 OOD labels
    #[arg(long, default_value = "is_ood")]
    labels: String,
    /// Keep only rows whose `split` column equals this value
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    single_thread: bool,
}

impl RunArgs {
    fn resolve(&self, source: Option<DataSource>) -> Result<RunConfig, RslError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = source {
            cfg.source = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(b) = self.baseline {
            cfg.baseline = Some(b.into());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_block(name: &str, m: &MetricSummary) {
    println!("{name:<12} auroc {:.4}  aupr {:.4}  fpr95 {:.4}", m.auroc, m.aupr, m.fpr95);
}

fn print_report(report: &ScoreReport, out: &Path) {
    let s = &report.summary;
    println!("t* = {}  gamma = {}  gamma' = {}", s.t_star, s.gamma, s.gamma_prime);
    let as_summary = |b: &pipeline::MetricBlock| MetricSummary {
        auroc: b.auroc,
        aupr: b.aupr,
        fpr95: b.fpr95,
    };
    print_block("tau_only", &as_summary(&s.tau_only));
    print_block("classifier", &as_summary(&s.classifier));
    if let Some(b) = &s.baseline {
        print_block(
            b.mode.name(),
            &MetricSummary {
                auroc: b.auroc,
                aupr: b.aupr,
                fpr95: b.fpr95,
            },
        );
    }
    println!("report written to {}", out.display());
}

fn execute(command: Command) -> Result<(), (String, i32)> {
    let fail = |e: RslError| (e.to_string(), e.exit_code());
    let stage_fail = |e: pipeline::StageError| (e.to_string(), e.exit_code());
    match command {
        Command::Run(a) => {
            let cfg = a.resolve(None).map_err(fail)?;
            let out = cfg.out_dir.clone();
            let r = threaded(a.single_thread, || pipeline::run_all(&cfg, &out)).map_err(stage_fail)?;
            print_report(&r, &out);
        }
        Command::Resonance(a) => {
            let cfg = a.resolve(None).map_err(fail)?;
            let r = threaded(a.single_thread, || pipeline::run_resonance_stage(&cfg, &cfg.out_dir)).map_err(stage_fail)?;
            println!(
                "t* = {}  validation auroc {:.4}  {} candidates (tau <= {})",
                r.t_star,
                r.val_auroc,
                r.candidates.len(),
                r.candidate_threshold
            );
        }
        Command::Synthesize(a) => {
            let cfg = a.resolve(None).map_err(fail)?;
            let s = threaded(a.single_thread, || pipeline::run_synthesize_stage(&cfg, &cfg.out_dir)).map_err(stage_fail)?;
            println!("{} synthetic nodes, {} edges", s.count(), s.edges.len());
        }
        Command::Classify(a) => {
            let cfg = a.resolve(None).map_err(fail)?;
            let o = threaded(a.single_thread, || pipeline::run_classify_stage(&cfg, &cfg.out_dir)).map_err(stage_fail)?;
            println!("best epoch {}  validation auroc {:.4}", o.best_epoch, o.val_auroc[o.best_epoch]);
        }
        Command::Score(a) => {
            let cfg = a.resolve(None).map_err(fail)?;
            let out = cfg.out_dir.clone();
            let r = threaded(a.single_thread, || pipeline::run_score_stage(&cfg, &out)).map_err(stage_fail)?;
            print_report(&r, &out);
        }
        Command::Eval(e) => {
            let m = threaded(e.single_thread, || {
                pipeline::evaluate_csv(&e.file, &e.column, &e.labels, e.split.as_deref())
            })
            .map_err(fail)?;
            print_block(&e.column, &m);
        }
        Command::GenToy(a) => generate(&a, DataSource::Toy).map_err(fail)?,
        Command::GenSbm(a) => generate(&a, DataSource::Sbm).map_err(fail)?,
    }
    Ok(())
}

fn generate(a: &RunArgs, source: DataSource) -> Result<(), RslError> {
    let cfg = a.resolve(Some(source))?;
    threaded(a.single_thread, || pipeline::export_dataset(&cfg, &cfg.out_dir))?;
    println!("dataset written to {}", cfg.out_dir.display());
    Ok(())
}

fn threaded<R: Send>(single: bool, f: impl FnOnce() -> R + Send) -> R {
    if single {
        par::single_threaded(f)
    } else {
        f()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err((msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
