use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Cell, ExperimentConfig, GraphKind, PerturbationKind};
use super::trial::{run_trial, trial_seed, TrialResult};
use crate::error::{Error, Result};
use crate::linalg::neumaier_sum;
use crate::spectral_fit::CovarianceConvention;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub mean: f64,
    /// Standard error of the mean over trials.
    pub se: f64,
}

impl MethodStats {
    /// Order-insensitive: values are sorted before compensated summation.
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = neumaier_sum(v.iter().copied()) / n;
        let se = if v.len() > 1 {
            let mut dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
            dev.sort_by(f64::total_cmp);
            (neumaier_sum(dev) / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub graph: GraphKind,
    pub perturbation: PerturbationKind,
    pub size: usize,
    pub trials_ok: usize,
    pub trials_failed: usize,
    pub noisy: MethodStats,
    pub armae: MethodStats,
    pub drw: MethodStats,
    pub include_noise: bool,
    pub convention: CovarianceConvention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub cell: Cell,
    pub trial: usize,
    pub seed: u64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<AggregateRow>,
    pub failures: Vec<TrialFailure>,
    /// Successful trials per cell, in trial order.
    pub trials: Vec<(Cell, Vec<(usize, TrialResult)>)>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with_progress(cfg, &|_| {})
}

/// Runs every cell of `cfg`; trials execute on the rayon pool and are
/// merged in trial order, so results do not depend on the thread count.
pub fn run_experiment_with_progress(
    cfg: &ExperimentConfig,
    on_row: &(dyn Fn(&AggregateRow) + Sync),
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut trials = Vec::new();
    for (ci, cell) in cfg.cells().into_iter().enumerate() {
        let outcomes: Vec<(usize, u64, Result<TrialResult>)> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(cfg.seed, ci, t);
                (t, seed, run_trial(cfg, cell, seed))
            })
            .collect();
        let mut ok = Vec::new();
        for (t, seed, r) in outcomes {
            match r {
                Ok(res) => ok.push((t, res)),
                Err(error) => failures.push(TrialFailure {
                    cell,
                    trial: t,
                    seed,
                    error,
                }),
            }
        }
        if ok.is_empty() {
            return Err(Error::AllTrialsFailed(cfg.trials));
        }
        let collect = |f: fn(&TrialResult) -> f64| ok.iter().map(|(_, r)| f(r)).collect::<Vec<_>>();
        let row = AggregateRow {
            graph: cell.graph,
            perturbation: cfg.perturbation,
            size: cell.size,
            trials_ok: ok.len(),
            trials_failed: cfg.trials - ok.len(),
            noisy: MethodStats::of(&collect(|r| r.mse_noisy)),
            armae: MethodStats::of(&collect(|r| r.mse_armae)),
            drw: MethodStats::of(&collect(|r| r.mse_drw)),
            include_noise: cfg.include_noise,
            convention: cfg.convention,
        };
        on_row(&row);
        rows.push(row);
        trials.push((cell, ok));
    }
    Ok(ExperimentReport {
        rows,
        failures,
        trials,
    })
}

const HEADER: [&str; 13] = [
    "graph",
    "perturbation",
    "size",
    "trials_ok",
    "trials_failed",
    "noisy_mean",
    "noisy_se",
    "armae_mean",
    "armae_se",
    "drw_mean",
    "drw_se",
    "include_noise",
    "convention",
];

fn convention_name(c: CovarianceConvention) -> &'static str {
    match c {
        CovarianceConvention::Squared => "squared",
        CovarianceConvention::Linear => "linear",
    }
}

pub fn write_results_csv<W: Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.graph.to_string(),
            r.perturbation.to_string(),
            r.size.to_string(),
            r.trials_ok.to_string(),
            r.trials_failed.to_string(),
            r.noisy.mean.to_string(),
            r.noisy.se.to_string(),
            r.armae.mean.to_string(),
            r.armae.se.to_string(),
            r.drw.mean.to_string(),
            r.drw.se.to_string(),
            r.include_noise.to_string(),
            convention_name(r.convention).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse("unexpected results header".into()));
    }
    let num =
        |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Parse(format!("number `{s}`"))) };
    let int =
        |s: &str| -> Result<usize> { s.parse().map_err(|_| Error::Parse(format!("count `{s}`"))) };
    let mut rows = Vec::new();
    for rec in r.records() {
        let f = rec?;
        if f.len() != HEADER.len() {
            return Err(Error::Parse("short results row".into()));
        }
        rows.push(AggregateRow {
            graph: f[0].parse()?,
            perturbation: f[1].parse()?,
            size: int(&f[2])?,
            trials_ok: int(&f[3])?,
            trials_failed: int(&f[4])?,
            noisy: MethodStats {
                mean: num(&f[5])?,
                se: num(&f[6])?,
            },
            armae: MethodStats {
                mean: num(&f[7])?,
                se: num(&f[8])?,
            },
            drw: MethodStats {
                mean: num(&f[9])?,
                se: num(&f[10])?,
            },
            include_noise: f[11]
                .parse()
                .map_err(|_| Error::Parse("include_noise".into()))?,
            convention: match &f[12] {
                "squared" => CovarianceConvention::Squared,
                "linear" => CovarianceConvention::Linear,
                other => return Err(Error::Parse(format!("convention `{other}`"))),
            },
        });
    }
    Ok(rows)
}

/// Per-trial results, one row per successful trial.
pub fn write_trials_csv<W: Write>(
    out: W,
    report: &ExperimentReport,
    perturbation: PerturbationKind,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "graph",
        "perturbation",
        "size",
        "trial",
        "seed",
        "mse_noisy",
        "mse_armae",
        "mse_drw",
        "drw_lambda",
        "weight_min",
        "weight_mean",
        "weight_max",
        "armae_iterations",
        "drw_iterations",
    ])?;
    for (cell, results) in &report.trials {
        for (t, r) in results {
            let d = &r.diagnostics;
            let ws = d.drw.weights;
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            w.write_record([
                cell.graph.to_string(),
                perturbation.to_string(),
                cell.size.to_string(),
                t.to_string(),
                r.seed.to_string(),
                r.mse_noisy.to_string(),
                r.mse_armae.to_string(),
                r.mse_drw.to_string(),
                opt(d.drw.selected_lambda),
                opt(ws.map(|s| s.min)),
                opt(ws.map(|s| s.mean)),
                opt(ws.map(|s| s.max)),
                d.baseline.solver_iterations.to_string(),
                d.drw.solver_iterations.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Aligned plain-text table in the layout of the published result tables
/// (MSE × 10⁻², one column per graph family).
pub fn format_table(rows: &[AggregateRow]) -> String {
    let mut out = String::new();
    let mut by_kind: BTreeMap<String, Vec<&AggregateRow>> = BTreeMap::new();
    for r in rows {
        by_kind
            .entry(r.perturbation.to_string())
            .or_default()
            .push(r);
    }
    for (kind, rows) in by_kind {
        let symbol = if kind == "edges" { "e" } else { "v" };
        let mut graphs: Vec<GraphKind> = rows.iter().map(|r| r.graph).collect();
        graphs.sort();
        graphs.dedup();
        let mut sizes: Vec<usize> = rows.iter().map(|r| r.size).collect();
        sizes.sort_unstable();
        sizes.dedup();
        let lookup = |g: GraphKind, s: usize| rows.iter().find(|r| r.graph == g && r.size == s);

        writeln!(
            out,
            "Average MSE of the recovered signals under {} changes (x 1e-2)",
            &kind[..kind.len() - 1]
        )
        .unwrap();
        let mut header = format!("{:<10} | {:>4} |", "Method", symbol);
        for g in &graphs {
            write!(header, " {:>10}", format!("{g} graph")).unwrap();
        }
        let rule = "=".repeat(header.len());
        writeln!(out, "{rule}\n{header}\n{rule}").unwrap();
        let methods: [(&str, fn(&AggregateRow) -> MethodStats); 3] = [
            ("Noisy", |r| r.noisy),
            ("ARMAE", |r| r.armae),
            ("ARMAE-DRW", |r| r.drw),
        ];
        for (name, get) in methods {
            for (k, &s) in sizes.iter().enumerate() {
                let label = if k == 0 { name } else { "" };
                let mut line = format!("{label:<10} | {s:>4} |");
                for &g in &graphs {
                    match lookup(g, s) {
                        Some(r) => write!(line, " {:>10.2}", get(r).mean * 100.0).unwrap(),
                        None => write!(line, " {:>10}", "-").unwrap(),
                    }
                }
                writeln!(out, "{line}").unwrap();
            }
            writeln!(out, "{}", "-".repeat(rule.len())).unwrap();
        }
        let failed: usize = rows.iter().map(|r| r.trials_failed).sum();
        let ok: usize = rows.iter().map(|r| r.trials_ok).sum();
        writeln!(out, "trials: {ok} ok, {failed} failed\n").unwrap();
    }
    out
}
