//! CSV output with fixed schemas.
//!
//! Floats are written with 17 significant digits so every value reads back
//! to the identical `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cost::CostParams;
use crate::engine::TradeOutcome;
use crate::error::{MarketError, Result};
use crate::experiment::{AggregateResult, ResultRow};

pub const RESULTS_HEADER: &str =
    "run_id,mechanism,informed_ratio,strategy,rounds,y_final,total_payment,xi_s,xi_u,xi";
pub const TRACE_HEADER: &str = "run_id,phase,t,price,demand,total_supply,purchased";
pub const COST_CURVE_HEADER: &str = "y,cost";
pub const AGGREGATES_HEADER: &str = "mechanism,informed_ratio,strategy,metric,mean,std,n";

/// Number of uniform samples in a cost curve, before the point at `y = d`.
pub const COST_CURVE_POINTS: usize = 1000;

/// `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_lines<I>(path: &Path, header: &str, lines: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let io_err = |source| MarketError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(out, "{header}").map_err(io_err)?;
    for line in lines {
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn results_line(row: &ResultRow) -> String {
    let m = &row.metrics;
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        row.run_id,
        row.mechanism.as_str(),
        fmt_f64(row.informed_ratio),
        row.strategy,
        m.rounds,
        fmt_f64(m.y_final),
        fmt_f64(m.total_payment),
        fmt_f64(m.xi_s),
        fmt_f64(m.xi_u),
        fmt_f64(m.xi),
    )
}

pub fn emit_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_lines(path, RESULTS_HEADER, rows.iter().map(results_line))
}

pub fn emit_aggregates(aggregates: &[AggregateResult], path: &Path) -> Result<()> {
    let lines = aggregates.iter().flat_map(|a| {
        a.metrics.iter().map(move |(name, s)| {
            format!(
                "{},{},{},{},{},{},{}",
                a.mechanism.as_str(),
                fmt_f64(a.informed_ratio),
                a.strategy,
                name,
                fmt_f64(s.mean),
                fmt_f64(s.std),
                a.n
            )
        })
    });
    write_lines(path, AGGREGATES_HEADER, lines)
}

/// Per-round trace of several runs, given as `(run_id, ledger)` pairs.
pub fn emit_trace<'a, I>(ledgers: I, path: &Path) -> Result<()>
where
    I: IntoIterator<Item = (u64, &'a TradeOutcome)>,
{
    let lines = ledgers.into_iter().flat_map(|(run_id, outcome)| {
        outcome.rounds.iter().map(move |r| {
            format!(
                "{},{},{},{},{},{},{}",
                run_id,
                r.phase.as_str(),
                r.t,
                fmt_f64(r.price),
                fmt_f64(r.demand),
                fmt_f64(r.total_supply()),
                fmt_f64(r.purchased())
            )
        })
    });
    write_lines(path, TRACE_HEADER, lines)
}

/// Cost on a uniform grid of `[0, d - dd]` followed by the value at `y = d`.
pub fn emit_cost_curve(params: &CostParams, dd: f64, path: &Path) -> Result<()> {
    let curve = params.cost_curve(COST_CURVE_POINTS, dd)?;
    write_lines(
        path,
        COST_CURVE_HEADER,
        curve
            .into_iter()
            .map(|(y, c)| format!("{},{}", fmt_f64(y), fmt_f64(c))),
    )
}
