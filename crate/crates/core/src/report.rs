//! CSV output and console summaries.

use std::io::Write;

use crate::error::Result;
use crate::harness::{EtaTable, SweepResult};

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per grid point; every row repeats its full parameter tuple.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheduler",
        "K",
        "N",
        result.power_kind.column(),
        "eta_I",
        "eta_tr",
        "mean_rate_per_cell",
        "ci95",
        "qualifier_mean",
        "fallback_frac",
        "trials",
        "seed",
    ])?;
    for r in &result.rows {
        w.write_record([
            r.scheduler.to_string(),
            r.cells.to_string(),
            r.users.to_string(),
            num(r.power),
            opt(r.eta_i),
            opt(r.eta_tr),
            num(r.mean_rate),
            num(r.ci95),
            num(r.qualifier_mean),
            num(r.fallback_frac),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_eta_csv<W: Write>(table: &EtaTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheduler",
        "K",
        "N",
        table.power_kind.column(),
        "optimal_eta_I",
        "achieved_rate",
        "ci95",
        "trials",
        "seed",
    ])?;
    for e in &table.entries {
        w.write_record([
            e.scheduler.to_string(),
            e.cells.to_string(),
            e.users.to_string(),
            num(e.power),
            num(e.optimal_eta_i),
            num(e.rate),
            num(e.ci95),
            e.trials.to_string(),
            e.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_summary(result: &SweepResult) -> String {
    let mut s = format!(
        "{:<8} {:>3} {:>6} {:>9} {:>6} {:>10} {:>8} {:>9}\n",
        "sched",
        "K",
        "N",
        result.power_kind.column(),
        "eta_I",
        "rate",
        "ci95",
        "fallback"
    );
    for r in &result.rows {
        s.push_str(&format!(
            "{:<8} {:>3} {:>6} {:>9.2} {:>6} {:>10.4} {:>8.4} {:>9.4}\n",
            r.scheduler.as_str(),
            r.cells,
            r.users,
            r.power,
            r.eta_i
                .map(|e| format!("{e}"))
                .unwrap_or_else(|| "-".into()),
            r.mean_rate,
            r.ci95,
            r.fallback_frac
        ));
    }
    s
}

pub fn eta_summary(table: &EtaTable) -> String {
    let mut s = format!(
        "{:<8} {:>3} {:>6} {:>9} {:>8} {:>10}\n",
        "sched",
        "K",
        "N",
        table.power_kind.column(),
        "eta_I*",
        "rate"
    );
    for e in &table.entries {
        s.push_str(&format!(
            "{:<8} {:>3} {:>6} {:>9.2} {:>8} {:>10.4}\n",
            e.scheduler.as_str(),
            e.cells,
            e.users,
            e.power,
            e.optimal_eta_i,
            e.rate
        ));
    }
    s
}
