use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gfxfer_core::experiment::{
    dump_recovery, format_table, read_results_csv, run_experiment_with_progress, write_dump_csv,
    write_dump_edges_csv, write_results_csv, write_trials_csv, Cell, ExperimentConfig, GraphKind,
};
use gfxfer_core::Error;

#[derive(Parser)]
#[command(name = "gfxfer", version, about = "Graph filter transfer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `trials` from the config.
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Aggregated results CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional per-trial CSV.
        #[arg(long)]
        trials_out: Option<PathBuf>,
    },
    /// Pretty-print a results CSV as aligned text tables.
    Table {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Dump one recovered current-graph signal node by node.
    Dump {
        #[arg(long)]
        config: PathBuf,
        /// Scenario seed (as reported in the per-trial CSV).
        #[arg(long)]
        seed: u64,
        /// Column of the current sample batch to dump.
        #[arg(long)]
        sample: usize,
        #[arg(long)]
        out: PathBuf,
        /// Graph family; defaults to the first one in the config.
        #[arg(long)]
        graph: Option<GraphKind>,
        /// Perturbation size; defaults to the first one in the config.
        #[arg(long)]
        size: Option<usize>,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            trials,
            seed,
            out,
            trials_out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_experiment_with_progress(&cfg, &|row| {
                eprintln!(
                    "{} {}={}: {} ok, {} failed",
                    row.graph, row.perturbation, row.size, row.trials_ok, row.trials_failed
                );
            })?;
            for f in &report.failures {
                eprintln!(
                    "trial failed: graph={} size={} trial={} seed={} kind={} ({})",
                    f.cell.graph,
                    f.cell.size,
                    f.trial,
                    f.seed,
                    f.error.kind(),
                    f.error
                );
            }
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    write_results_csv(&mut w, &report.rows)?;
                    w.flush()?;
                }
                None => write_results_csv(io::stdout().lock(), &report.rows)?,
            }
            if let Some(path) = trials_out {
                let mut w = create(&path)?;
                write_trials_csv(&mut w, &report, cfg.perturbation)?;
                w.flush()?;
            }
            Ok(())
        }
        Command::Table { input } => {
            let file =
                File::open(&input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let rows = read_results_csv(file)?;
            print!("{}", format_table(&rows));
            Ok(())
        }
        Command::Dump {
            config,
            seed,
            sample,
            out,
            graph,
            size,
        } => {
            let cfg = load_config(&config)?;
            let first = cfg.cells()[0];
            let cell = Cell {
                graph: graph.unwrap_or(first.graph),
                size: size.unwrap_or(first.size),
            };
            let dump = dump_recovery(&cfg, cell, seed, sample)?;
            let mut w = create(&out)?;
            write_dump_csv(&mut w, &dump)?;
            w.flush()?;
            let edges_path = edges_path(&out);
            let mut w = create(&edges_path)?;
            write_dump_edges_csv(&mut w, &dump)?;
            w.flush()?;
            eprintln!(
                "sample {sample}: mse noisy={} armae={} drw={}; edges written to {}",
                dump.mse_noisy,
                dump.mse_armae,
                dump.mse_drw,
                edges_path.display()
            );
            Ok(())
        }
    }
}

/// `dump.csv` -> `dump.edges.csv`.
fn edges_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.edges.csv"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
