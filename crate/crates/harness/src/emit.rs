//! CSV emission. Columns are in fixed order, floats are written as the
//! shortest round-trip decimal, and undefined values are empty fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use tensorica::diagnostics::RunTrace;

use crate::error::Result;
use crate::runner::RunOutcome;
use crate::scaling::ScalingSummary;

pub const TRACE_HEADER: &str = "run_id,t,phase,tan_angle_min,component_index";
pub const SUMMARY_HEADER: &str = "run_id,d,T,final_error,window_mean_error";
pub const SCALING_HEADER: &str = "axis,value,mean_error,stderr,n_runs";

fn field(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

pub fn write_trace_csv(path: &Path, run_id: usize, trace: &RunTrace) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{run_id},{},{},{},{}",
            r.t,
            r.phase,
            field(r.tan_angle_min),
            r.component_index
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(path: &Path, outcomes: &[RunOutcome]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SUMMARY_HEADER}")?;
    for o in outcomes {
        writeln!(
            w,
            "{},{},{},{},{}",
            o.run_id,
            o.d,
            o.t_total,
            field(o.final_error),
            field(o.window_mean_error)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scaling_csv(path: &Path, summary: &ScalingSummary) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SCALING_HEADER}")?;
    for p in &summary.points {
        writeln!(
            w,
            "{},{},{},{},{}",
            summary.axis,
            p.value,
            field(p.mean_error),
            field(p.stderr),
            p.n_runs
        )?;
    }
    w.flush()?;
    Ok(())
}
