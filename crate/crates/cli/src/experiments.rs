//! Replicated simulation runs, CSV emission and the fixed table presets.
//!
//! Replications are independent engines seeded from `(master_seed,
//! run_index)` and may execute in parallel; rows are emitted in a
//! canonical order (strategy, run, checkpoint, metric) so thread count
//! never changes the output bytes. Wall-clock columns are zero unless
//! timing was requested, keeping default output byte-reproducible.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use haarthin_core::{
    interval_disc_1d, lattice_disc, rect_bias, CandidateSource, Engine, Error as CoreError,
    RectSpec, StrategyConfig, StrategyKind, UniformSource,
};
use rayon::prelude::*;

use crate::csvfmt::{csv_line, format_sig};
use crate::streams::FileSource;

pub const ROWS_HEADER: &str = "strategy,d,beta,seed,run,n,metric,value,seconds";
pub const SUMMARY_HEADER: &str = "strategy,d,n,metric,mean,std,stderr,reps";

/// What to measure at each checkpoint.
#[derive(Debug, Clone)]
pub enum MetricSpec {
    /// Rectangle discrepancy: exact intervals for d = 1, lattice
    /// rectangles otherwise (order given or min(log2 n, 10)).
    Discrepancy { lattice_order: Option<u32> },
    /// Absolute count deviation on fixed rectangles.
    Bias { rects: Vec<RectSpec> },
}

#[derive(Debug, Clone)]
pub enum SourceSpec {
    Synthetic,
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct SimulateSpec {
    pub strategies: Vec<StrategyConfig>,
    pub master_seed: u64,
    pub reps: u64,
    pub checkpoints: Vec<u64>,
    pub metric: MetricSpec,
    pub source: SourceSpec,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub strategy: String,
    pub d: usize,
    pub beta: f64,
    pub seed: u64,
    pub run: u64,
    pub n: u64,
    pub metric: String,
    pub value: f64,
    pub seconds: f64,
}

impl ResultRow {
    fn to_csv(&self) -> String {
        csv_line(&[
            self.strategy.clone(),
            self.d.to_string(),
            format_sig(self.beta, 6),
            self.seed.to_string(),
            self.run.to_string(),
            self.n.to_string(),
            self.metric.clone(),
            format_sig(self.value, 6),
            format_sig(self.seconds, 6),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: String,
    pub d: usize,
    pub n: u64,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub reps: u64,
}

impl SummaryRow {
    fn to_csv(&self) -> String {
        csv_line(&[
            self.strategy.clone(),
            self.d.to_string(),
            self.n.to_string(),
            self.metric.clone(),
            format_sig(self.mean, 6),
            format_sig(self.std, 6),
            format_sig(self.stderr, 6),
            self.reps.to_string(),
        ])
    }
}

/// Display label for a configured strategy.
pub fn strategy_label(config: &StrategyConfig) -> String {
    match (config.kind, config.convention) {
        (StrategyKind::Greedy, haarthin_core::GreedyConvention::Inverted) => {
            "greedy_inverted".to_string()
        }
        (kind, _) => kind.name().to_string(),
    }
}

/// Mean, sample standard deviation and standard error of one group.
pub fn group_stats(values: &[f64]) -> Result<(f64, f64, f64), CoreError> {
    if values.is_empty() {
        return Err(CoreError::EmptyGroup);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok((mean, std, std / n.sqrt()))
}

/// Per-(strategy, d, n, metric) statistics, in first-seen order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, usize, u64, String)> = Vec::new();
    let mut groups: std::collections::HashMap<(String, usize, u64, String), Vec<f64>> =
        std::collections::HashMap::new();
    for row in rows {
        let key = (row.strategy.clone(), row.d, row.n, row.metric.clone());
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key.clone());
                Vec::new()
            })
            .push(row.value);
    }
    order
        .into_iter()
        .map(|key| {
            let values = &groups[&key];
            let (mean, std, stderr) = group_stats(values).expect("group is nonempty");
            SummaryRow {
                strategy: key.0,
                d: key.1,
                n: key.2,
                metric: key.3,
                mean,
                std,
                stderr,
                reps: values.len() as u64,
            }
        })
        .collect()
}

fn default_lattice_order(n: u64) -> u32 {
    let log = 63 - n.max(1).leading_zeros();
    log.clamp(1, 10)
}

fn measure(
    points: haarthin_core::PointsView<'_>,
    n: u64,
    metric: &MetricSpec,
) -> Result<Vec<(String, f64)>> {
    match metric {
        MetricSpec::Discrepancy { lattice_order } => {
            let value = if points.dim() == 1 {
                interval_disc_1d(points.as_flat())
                    .map_err(|e| anyhow!("{e}"))?
                    .value
            } else {
                let order = lattice_order.unwrap_or_else(|| default_lattice_order(n));
                lattice_disc(points, order)
                    .map_err(|e| anyhow!("{e}"))?
                    .value
            };
            Ok(vec![("disc".to_string(), value)])
        }
        MetricSpec::Bias { rects } => rects
            .iter()
            .map(|rect| {
                let value = rect_bias(points, rect).map_err(|e| anyhow!("{e}"))?;
                Ok((format!("bias({})", rect.to_text()), value))
            })
            .collect(),
    }
}

fn run_one(spec: &SimulateSpec, config: &StrategyConfig, rep: u64) -> Result<Vec<ResultRow>> {
    let label = strategy_label(config);
    let mut engine = Engine::new(*config, spec.master_seed, rep);
    let mut synthetic;
    let mut file;
    let source: &mut dyn CandidateSource = match &spec.source {
        SourceSpec::Synthetic => {
            synthetic = UniformSource::new(config.dim, spec.master_seed, rep);
            &mut synthetic
        }
        SourceSpec::File(path) => {
            file = FileSource::open(path, config.dim)?;
            &mut file
        }
    };
    let started = Instant::now();
    let mut rows = Vec::new();
    for &checkpoint in &spec.checkpoints {
        while engine.outputs_placed() < checkpoint {
            engine.step(source).map_err(|e| match &e {
                CoreError::SourceFailure => anyhow!("candidate source failed"),
                other => {
                    anyhow!("{label} run {rep}: {other} (checkpoint {checkpoint} not reached)")
                }
            })?;
        }
        let seconds = if spec.timing {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        for (metric, value) in measure(engine.points().view(), checkpoint, &spec.metric)? {
            rows.push(ResultRow {
                strategy: label.clone(),
                d: config.dim,
                beta: config.beta,
                seed: spec.master_seed,
                run: rep,
                n: checkpoint,
                metric,
                value,
                seconds,
            });
        }
    }
    Ok(rows)
}

/// Runs every (strategy, replication) pair, in parallel, and returns the
/// rows in canonical order. On failure the rows of completed runs are
/// returned alongside the error so callers can preserve partial results.
pub fn collect_rows(spec: &SimulateSpec) -> (Vec<ResultRow>, Option<anyhow::Error>) {
    type Outcome = ((usize, u64), Result<Vec<ResultRow>>);
    let tasks: Vec<(usize, u64)> = (0..spec.strategies.len())
        .flat_map(|si| (0..spec.reps).map(move |rep| (si, rep)))
        .collect();
    let mut outcomes: Vec<Outcome> = tasks
        .into_par_iter()
        .map(|(si, rep)| ((si, rep), run_one(spec, &spec.strategies[si], rep)))
        .collect();
    outcomes.sort_by_key(|((si, rep), _)| (*si, *rep));
    let mut rows = Vec::new();
    let mut first_error = None;
    for (_, outcome) in outcomes {
        match outcome {
            Ok(mut r) => rows.append(&mut r),
            Err(e) if first_error.is_none() => first_error = Some(e),
            Err(_) => {}
        }
    }
    (rows, first_error)
}

/// Writes the per-run rows followed by the summary block.
pub fn write_report(rows: &[ResultRow], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{ROWS_HEADER}")?;
    for row in rows {
        out.write_all(row.to_csv().as_bytes())?;
    }
    writeln!(out)?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for summary in summarize(rows) {
        out.write_all(summary.to_csv().as_bytes())?;
    }
    Ok(())
}

/// Full simulate command: run, write rows plus summary, propagate any run
/// failure after flushing what completed.
pub fn cmd_simulate(spec: &SimulateSpec, out: &mut dyn Write) -> Result<Vec<ResultRow>> {
    if spec.strategies.is_empty() {
        bail!("need at least one strategy");
    }
    if spec.reps == 0 {
        bail!("reps must be at least 1");
    }
    if spec.checkpoints.is_empty()
        || spec.checkpoints[0] == 0
        || !spec.checkpoints.windows(2).all(|w| w[0] < w[1])
    {
        bail!("checkpoints must be positive and strictly increasing");
    }
    for strategy in &spec.strategies {
        if let MetricSpec::Bias { rects } = &spec.metric {
            for rect in rects {
                if rect.dim() != strategy.dim {
                    bail!(
                        "--rect has dimension {}, --dim is {}",
                        rect.dim(),
                        strategy.dim
                    );
                }
            }
        }
    }
    let (rows, error) = collect_rows(spec);
    write_report(&rows, out)?;
    match error {
        None => Ok(rows),
        Some(e) => Err(e.context("some runs failed; partial results were written")),
    }
}

fn preset_strategies(dim: usize) -> Vec<StrategyConfig> {
    [
        StrategyKind::MonteCarlo,
        StrategyKind::Haar,
        StrategyKind::Greedy,
    ]
    .into_iter()
    .map(|kind| StrategyConfig::new(kind, dim, 1.0).expect("valid preset"))
    .collect()
}

/// Preset: three strategies, d = 1, beta = 1, exact interval discrepancy
/// at checkpoints 2^7, 2^9, ..., 2^19.
pub fn table1_spec(master_seed: u64, reps: u64) -> SimulateSpec {
    SimulateSpec {
        strategies: preset_strategies(1),
        master_seed,
        reps,
        checkpoints: (7..=19).step_by(2).map(|k| 1u64 << k).collect(),
        metric: MetricSpec::Discrepancy {
            lattice_order: None,
        },
        source: SourceSpec::Synthetic,
        timing: false,
    }
}

/// Preset rectangles for one dimension count: the dyadic half cube and a
/// rectangle with a long dyadic expansion.
pub fn preset_rects(dim: usize) -> Vec<RectSpec> {
    vec![
        RectSpec::new(vec![0.0; dim], vec![0.5; dim]).expect("valid preset"),
        RectSpec::new(vec![1.0 / 3.0; dim], vec![5.0 / 6.0; dim]).expect("valid preset"),
    ]
}

/// Preset: fixed-rectangle biases at n = 10^1..10^5 for d = 1 and d = 2.
pub fn table2_specs(master_seed: u64, reps: u64) -> Vec<SimulateSpec> {
    [1usize, 2]
        .into_iter()
        .map(|dim| SimulateSpec {
            strategies: preset_strategies(dim),
            master_seed,
            reps,
            checkpoints: vec![10, 100, 1_000, 10_000, 100_000],
            metric: MetricSpec::Bias {
                rects: preset_rects(dim),
            },
            source: SourceSpec::Synthetic,
            timing: false,
        })
        .collect()
}

fn find_summary<'a>(
    summaries: &'a [SummaryRow],
    strategy: &str,
    d: usize,
    n: u64,
    metric: &str,
) -> Option<&'a SummaryRow> {
    summaries
        .iter()
        .find(|s| s.strategy == strategy && s.d == d && s.n == n && s.metric == metric)
}

fn cell(summaries: &[SummaryRow], strategy: &str, d: usize, n: u64, metric: &str) -> String {
    match find_summary(summaries, strategy, d, n, metric) {
        Some(s) => format!("{} ({})", format_sig(s.mean, 6), format_sig(s.std, 6)),
        None => String::new(),
    }
}

/// Wide layout of the discrepancy preset: one row per strategy, one column
/// per checkpoint, `mean (std)` cells.
pub fn write_table1_wide(
    summaries: &[SummaryRow],
    spec: &SimulateSpec,
    out: &mut dyn Write,
) -> Result<()> {
    writeln!(
        out,
        "# mean exact interval discrepancy over {} runs, std in parentheses",
        spec.reps
    )?;
    writeln!(
        out,
        "# d=1 beta=1 seed={} checkpoints={}",
        spec.master_seed,
        spec.checkpoints
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )?;
    let mut header = vec!["strategy".to_string()];
    header.extend(spec.checkpoints.iter().map(|n| format!("n={n}")));
    out.write_all(csv_line(&header).as_bytes())?;
    for strategy in &spec.strategies {
        let label = strategy_label(strategy);
        let mut fields = vec![label.clone()];
        for &n in &spec.checkpoints {
            fields.push(cell(summaries, &label, 1, n, "disc"));
        }
        out.write_all(csv_line(&fields).as_bytes())?;
    }
    Ok(())
}

/// Wide layout of the bias preset: one row per (rectangle, n), strategy
/// columns grouped by dimension.
pub fn write_table2_wide(
    summaries: &[SummaryRow],
    specs: &[SimulateSpec],
    out: &mut dyn Write,
) -> Result<()> {
    let reps = specs.first().map(|s| s.reps).unwrap_or(0);
    let seed = specs.first().map(|s| s.master_seed).unwrap_or(0);
    writeln!(
        out,
        "# mean rectangle bias over {reps} runs, std in parentheses; seed={seed}"
    )?;
    let dims: Vec<usize> = specs.iter().map(|s| s.strategies[0].dim).collect();
    let mut header = vec!["rect".to_string(), "n".to_string()];
    for (spec, &d) in specs.iter().zip(dims.iter()) {
        for strategy in &spec.strategies {
            header.push(format!("{}_d{}", strategy_label(strategy), d));
        }
    }
    out.write_all(csv_line(&header).as_bytes())?;
    let checkpoints = &specs[0].checkpoints;
    for rect_index in 0..2usize {
        for &n in checkpoints {
            let rect_d1 = &preset_rects(1)[rect_index];
            let mut fields = vec![rect_d1.to_text(), n.to_string()];
            for (spec, &d) in specs.iter().zip(dims.iter()) {
                let metric = format!("bias({})", preset_rects(d)[rect_index].to_text());
                for strategy in &spec.strategies {
                    fields.push(cell(summaries, &strategy_label(strategy), d, n, &metric));
                }
            }
            out.write_all(csv_line(&fields).as_bytes())?;
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

/// Runs the discrepancy preset and writes `table1_runs.csv` and
/// `table1.csv` under `dir`.
pub fn cmd_table1(dir: &Path, master_seed: u64, reps: u64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let spec = table1_spec(master_seed, reps);
    let mut runs_out = create(&dir.join("table1_runs.csv"))?;
    let rows = cmd_simulate(&spec, &mut runs_out)?;
    let mut wide_out = create(&dir.join("table1.csv"))?;
    write_table1_wide(&summarize(&rows), &spec, &mut wide_out)?;
    Ok(())
}

/// Runs the bias preset and writes `table2_runs.csv` and `table2.csv`
/// under `dir`.
pub fn cmd_table2(dir: &Path, master_seed: u64, reps: u64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let specs = table2_specs(master_seed, reps);
    let mut all_rows = Vec::new();
    let mut runs_out = create(&dir.join("table2_runs.csv"))?;
    let mut error = None;
    for spec in &specs {
        let (rows, e) = collect_rows(spec);
        all_rows.extend(rows);
        if error.is_none() {
            error = e;
        }
    }
    write_report(&all_rows, &mut runs_out)?;
    let mut wide_out = create(&dir.join("table2.csv"))?;
    write_table2_wide(&summarize(&all_rows), &specs, &mut wide_out)?;
    match error {
        None => Ok(()),
        Some(e) => Err(e.context("some runs failed; partial results were written")),
    }
}
