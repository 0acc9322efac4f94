use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use haarthin::config::CommonOpts;
use haarthin::csvfmt::{csv_line, format_sig};
use haarthin::experiments::{self, cmd_simulate, MetricSpec, SimulateSpec, SourceSpec};
use haarthin::snapshot::{read_snapshot, write_snapshot};
use haarthin::streams::read_point_file;
use haarthin::thin::thin_stream;
use haarthin_core::{interval_disc_1d, lattice_disc, rect_bias, DiscReport};

/// Online thinning of uniform point streams with discrepancy metrics.
#[derive(Parser)]
#[command(name = "haarthin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated runs with metrics at checkpoints, emitted as CSV.
    Simulate(CommonOpts),
    /// Thin a candidate stream: one keep/reject line per input point.
    Thin(CommonOpts),
    /// Preset: interval discrepancy of the three strategies, d=1, beta=1.
    Table1(CommonOpts),
    /// Preset: fixed-rectangle biases in one and two dimensions.
    Table2(CommonOpts),
    /// Discrepancy of a point file.
    Disc(CommonOpts),
    /// Bias of a point file on one rectangle.
    Bias(CommonOpts),
}

fn main() {
    if let Err(e) = dispatch() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn init_threads() -> Result<()> {
    if let Ok(value) = std::env::var("HAARTHIN_THREADS") {
        let threads: usize = value
            .parse()
            .map_err(|_| anyhow!("HAARTHIN_THREADS must be a positive integer, got {value:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("initializing thread pool")?;
    }
    Ok(())
}

fn dispatch() -> Result<()> {
    init_threads()?;
    match Cli::parse().command {
        Command::Simulate(opts) => simulate(opts.apply_config_file()?),
        Command::Thin(opts) => thin(opts.apply_config_file()?),
        Command::Table1(opts) => table_preset(opts.apply_config_file()?, 1),
        Command::Table2(opts) => table_preset(opts.apply_config_file()?, 2),
        Command::Disc(opts) => disc(opts.apply_config_file()?),
        Command::Bias(opts) => bias(opts.apply_config_file()?),
    }
}

/// Writer for --out, buffered; stdout when absent.
fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn simulate(opts: CommonOpts) -> Result<()> {
    let dim = opts.dim();
    let metric = match opts.metric.as_deref().unwrap_or("disc") {
        "disc" => MetricSpec::Discrepancy {
            lattice_order: opts.lattice_order,
        },
        "bias" => {
            let rect = opts
                .rect()?
                .ok_or_else(|| anyhow!("--metric bias needs --rect"))?;
            MetricSpec::Bias { rects: vec![rect] }
        }
        other => bail!("unknown metric {other:?} (expected disc | bias)"),
    };
    let convention = opts.convention()?;
    let strategies = opts
        .strategies()?
        .into_iter()
        .map(|kind| {
            haarthin_core::StrategyConfig::new(kind, dim, opts.beta())
                .map(|c| c.with_convention(convention))
                .map_err(|e| anyhow!("{e}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = SimulateSpec {
        strategies,
        master_seed: opts.seed(),
        reps: opts.reps(),
        checkpoints: opts.checkpoints()?,
        metric,
        source: match &opts.candidates {
            Some(path) => SourceSpec::File(path.clone()),
            None => SourceSpec::Synthetic,
        },
        timing: opts.timing,
    };
    let mut out = open_out(opts.out.as_deref())?;
    cmd_simulate(&spec, &mut out)?;
    out.flush()?;
    Ok(())
}

fn thin(opts: CommonOpts) -> Result<()> {
    let config = opts.single_strategy()?;
    let resume = match &opts.state_in {
        None => None,
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            Some(read_snapshot(BufReader::new(file))?)
        }
    };
    let (input, label): (Box<dyn BufRead>, String) = match &opts.candidates {
        Some(path) => (
            Box::new(BufReader::new(
                File::open(path).with_context(|| format!("opening {}", path.display()))?,
            )),
            path.display().to_string(),
        ),
        None => (Box::new(BufReader::new(io::stdin())), "stdin".to_string()),
    };
    let mut decisions = open_out(opts.out.as_deref())?;
    let mut kept_file = match &opts.kept_out {
        Some(path) => Some(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => None,
    };
    let outcome = thin_stream(
        config,
        opts.seed(),
        resume,
        input,
        &label,
        &mut decisions,
        kept_file.as_mut().map(|w| w as &mut dyn Write),
    )?;
    decisions.flush()?;
    if let Some(mut kept) = kept_file {
        kept.flush()?;
    }
    if let Some(path) = &opts.state_out {
        let mut file = BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        write_snapshot(outcome.engine.table(), &mut file)?;
        file.flush()?;
    }
    eprintln!(
        "thinned {} candidates: kept {}, rejected {}",
        outcome.candidates,
        outcome.kept,
        outcome.candidates - outcome.kept
    );
    Ok(())
}

fn table_preset(opts: CommonOpts, which: u8) -> Result<()> {
    let dir: PathBuf = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match which {
        1 => experiments::cmd_table1(&dir, opts.seed(), opts.reps()),
        _ => experiments::cmd_table2(&dir, opts.seed(), opts.reps()),
    }
}

fn report_csv(report: &DiscReport) -> String {
    let mut lines = String::from("method,lattice_order,value,error_bound,argmax_rect\n");
    lines.push_str(&csv_line(&[
        report.method.name().to_string(),
        report
            .lattice_order
            .map(|l| l.to_string())
            .unwrap_or_default(),
        format_sig(report.value, 6),
        format_sig(report.additive_error_bound, 6),
        report.argmax_rect.to_text(),
    ]));
    lines
}

fn disc(opts: CommonOpts) -> Result<()> {
    let dim = opts.dim();
    let path = opts
        .candidates
        .as_deref()
        .ok_or_else(|| anyhow!("disc needs --candidates <points file>"))?;
    let points = read_point_file(path, dim)?;
    let report = if dim == 1 && opts.lattice_order.is_none() {
        interval_disc_1d(points.as_flat()).map_err(|e| anyhow!("{e}"))?
    } else {
        let order = opts.lattice_order.unwrap_or_else(|| {
            let log = 63 - (points.len() as u64).max(1).leading_zeros();
            log.clamp(1, 10)
        });
        lattice_disc(points.view(), order).map_err(|e| anyhow!("{e}"))?
    };
    let mut out = open_out(opts.out.as_deref())?;
    out.write_all(report_csv(&report).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn bias(opts: CommonOpts) -> Result<()> {
    let dim = opts.dim();
    let rect = opts.rect()?.ok_or_else(|| anyhow!("bias needs --rect"))?;
    let path = opts
        .candidates
        .as_deref()
        .ok_or_else(|| anyhow!("bias needs --candidates <points file>"))?;
    let points = read_point_file(path, dim)?;
    let value = rect_bias(points.view(), &rect).map_err(|e| anyhow!("{e}"))?;
    let mut out = open_out(opts.out.as_deref())?;
    writeln!(out, "rect,n,value")?;
    out.write_all(
        csv_line(&[
            rect.to_text(),
            points.len().to_string(),
            format_sig(value, 6),
        ])
        .as_bytes(),
    )?;
    out.flush()?;
    Ok(())
}
