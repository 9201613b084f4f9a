use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cochange::entropy::Measure;
use cochange::metrics::MetricSet;
use cochange::pipeline::{self, Project};
use cochange::stats::Alpha;
use cochange::{Error, ProjectConfig};

#[derive(Parser)]
#[command(
    name = "cochange",
    version,
    about = "Change and co-change graph entropy for defect prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Project configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Worker threads for per-release stages (0 = one per core).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Change,
    Cochange,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    #[value(name = "P+C")]
    Change,
    #[value(name = "P+Co")]
    Cochange,
    #[value(name = "P+C+Co")]
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and filter the change log and list the commits of each release window.
    Ingest(Common),
    /// Write the co-change edge list of each release window.
    Graph(Common),
    /// Write change and/or co-change entropy reports per release window.
    Entropy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "both")]
        measure: MeasureArg,
    },
    /// Write the per-(release, file) metrics dataset.
    Metrics(Common),
    /// Correlate change and co-change entropy with post-release defect counts.
    Correlate(Common),
    /// Write train/test datasets for one or all metric sets.
    Dataset {
        #[command(flatten)]
        common: Common,
        /// Metric set; all three when omitted.
        #[arg(long = "set", value_enum)]
        set: Option<SetArg>,
    },
    /// Friedman + Nemenyi tests over a classifier results CSV.
    Stats {
        /// Results CSV: project,classifier,set_id,auroc,f1,mcc,precision,recall.
        results: PathBuf,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
        /// Significance level (0.05 or 0.10).
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Run every project stage in order.
    Pipeline(Common),
}

fn load(common: &Common) -> Result<Project, Error> {
    let mut config = ProjectConfig::load(&common.config)?;
    if let Some(dir) = &common.outdir {
        config.output_dir = dir.clone();
    }
    Ok(Project::load(config)?.with_jobs(common.jobs))
}

fn run(command: Command) -> Result<Vec<PathBuf>, Error> {
    match command {
        Command::Ingest(c) => {
            let p = load(&c)?;
            pipeline::write_ingest(&p, &p.analyze()?)
        }
        Command::Graph(c) => {
            let p = load(&c)?;
            pipeline::write_graphs(&p, &p.analyze()?)
        }
        Command::Entropy { common, measure } => {
            let p = load(&common)?;
            let measures: &[Measure] = match measure {
                MeasureArg::Change => &[Measure::Change],
                MeasureArg::Cochange => &[Measure::Cochange],
                MeasureArg::Both => &Measure::ALL,
            };
            let analyses = p.analyze()?;
            for a in &analyses {
                for m in measures {
                    println!(
                        "{}\t{}\tsystem_entropy={:.6}",
                        a.release.name,
                        m,
                        a.report(*m).system_entropy
                    );
                }
            }
            pipeline::write_entropy(&p, &analyses, measures)
        }
        Command::Metrics(c) => {
            let p = load(&c)?;
            let rows = pipeline::dataset_rows(&p, &p.analyze()?)?;
            pipeline::write_metrics(&p, &rows)
        }
        Command::Correlate(c) => {
            let p = load(&c)?;
            let rows = p.labeled_rows(&p.analyze()?)?;
            pipeline::write_correlation(&p, &rows)
        }
        Command::Dataset { common, set } => {
            let p = load(&common)?;
            let sets: Vec<MetricSet> = match set {
                Some(SetArg::Change) => vec![MetricSet::ProcessChange],
                Some(SetArg::Cochange) => vec![MetricSet::ProcessCochange],
                Some(SetArg::Both) => vec![MetricSet::ProcessBoth],
                None => MetricSet::ALL.to_vec(),
            };
            let rows = p.labeled_rows(&p.analyze()?)?;
            pipeline::write_datasets(&p, &rows, &sets)
        }
        Command::Stats { results, outdir, alpha } => {
            let alpha = Alpha::from_value(alpha).map_err(|e| Error::Config(format!("--alpha: {e}")))?;
            Ok(vec![pipeline::run_stats(&results, &outdir, alpha)?])
        }
        Command::Pipeline(c) => pipeline::run_pipeline(&load(&c)?),
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", Path::new(p).display());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(paths) => {
            print_written(&paths);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
