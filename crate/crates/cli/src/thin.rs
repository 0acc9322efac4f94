//! The streaming `thin` command: read candidates line by line, emit one
//! keep/reject decision per candidate, optionally echo kept points and
//! checkpoint the coefficient table.

use std::io::{BufRead, Write};

use anyhow::{anyhow, Context, Result};
use haarthin_core::{CoefficientTable, Engine, StrategyConfig};

use crate::streams::parse_point_line;

#[derive(Debug)]
pub struct ThinOutcome {
    pub candidates: u64,
    pub kept: u64,
    pub engine: Engine,
}

/// Thins a candidate stream. Writes `<candidate_index>,<keep|reject>` per
/// content line of the input; parse failures abort with the line number.
pub fn thin_stream(
    config: StrategyConfig,
    seed: u64,
    resume_from: Option<CoefficientTable>,
    input: impl BufRead,
    label: &str,
    decisions: &mut dyn Write,
    mut kept_echo: Option<&mut dyn Write>,
) -> Result<ThinOutcome> {
    let mut engine = match resume_from {
        None => Engine::new(config, seed, 0),
        Some(table) => Engine::with_table(config, table, seed, 0)
            .map_err(|e| anyhow!("state snapshot does not match the options: {e}"))?,
    };
    let mut candidates = 0u64;
    let mut kept = 0u64;
    for (index, line) in input.lines().enumerate() {
        let line_no = index + 1;
        let line = line.with_context(|| format!("reading {label}:{line_no}"))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let point =
            parse_point_line(trimmed, config.dim).with_context(|| format!("{label}:{line_no}"))?;
        let record = engine
            .offer(&point)
            .map_err(|e| anyhow!("{label}:{line_no}: {e}"))?;
        candidates += 1;
        writeln!(
            decisions,
            "{},{}",
            candidates,
            if record.kept { "keep" } else { "reject" }
        )?;
        if record.kept {
            kept += 1;
            if let Some(echo) = kept_echo.as_deref_mut() {
                let joined = point
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                writeln!(echo, "{joined}")?;
            }
        }
    }
    Ok(ThinOutcome {
        candidates,
        kept,
        engine,
    })
}
