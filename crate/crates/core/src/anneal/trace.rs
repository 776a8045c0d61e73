use std::io::Write;

use serde::Serialize;

use super::engine::AnnealResult;
use crate::error::Result;

/// Version of the CSV layouts written here.
pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct TraceRow {
    run: usize,
    iteration: usize,
    stage: usize,
    temperature: f64,
    h_evaluator: f64,
    h_exact: f64,
    accepted: u8,
    flip_count: usize,
    h_proposed: f64,
}

/// One row per iteration and run; iteration 0 is the initial state.
/// `header` lines are written first, each prefixed with `# `.
pub fn write_trace_csv<W: Write>(out: W, header: &[String], results: &[AnnealResult]) -> Result<()> {
    let mut out = out;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for (run, r) in results.iter().enumerate() {
        w.serialize(TraceRow {
            run,
            iteration: 0,
            stage: 0,
            temperature: r.steps.first().map_or(f64::NAN, |s| s.temperature),
            h_evaluator: r.initial_h,
            h_exact: r.initial_exact_h,
            accepted: 1,
            flip_count: 0,
            h_proposed: r.initial_h,
        })
        .map_err(csv_err)?;
        for (k, st) in r.steps.iter().enumerate() {
            w.serialize(TraceRow {
                run,
                iteration: k + 1,
                stage: st.stage,
                temperature: st.temperature,
                h_evaluator: r.accepted_h[k],
                h_exact: r.accepted_exact_h[k],
                accepted: u8::from(st.accepted),
                flip_count: st.flips.len(),
                h_proposed: st.proposed_h,
            })
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ProbabilityRow {
    iteration: usize,
    probability: f64,
}

/// Ground-state probability curve, iterations numbered from 1.
pub fn write_probability_csv<W: Write>(out: W, header: &[String], curve: &[f64]) -> Result<()> {
    let mut out = out;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for (k, p) in curve.iter().enumerate() {
        w.serialize(ProbabilityRow { iteration: k + 1, probability: *p }).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}
