//! JSON Lines traces, one record per timeline segment or reduction step.

use std::io::{self, Write};

use serde::Serialize;

use greenfut::sim::{snippet, SegmentKind};
use greenfut::{Configuration, FrequencyLevel, ReductionEvent, Rule, SimulationReport};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub v: u32,
    pub seq: u64,
    /// Virtual time in simulate mode, step index in semantics mode.
    pub t: f64,
    pub thread: u64,
    /// `compute`, `wait` or `transition` for simulations, `step` otherwise.
    pub kind: &'static str,
    pub rule: Option<Rule>,
    pub freq_idx: usize,
    pub freq: f64,
    pub dur: Option<f64>,
    pub energy: Option<f64>,
    pub expr: String,
}

/// Records for every segment, ordered by start time then thread.
pub fn from_simulation(report: &SimulationReport) -> Vec<TraceRecord> {
    let mut rows: Vec<_> = report
        .timelines
        .iter()
        .flat_map(|tl| tl.segments.iter().map(move |s| (tl.thread, s)))
        .collect();
    // Stable, so a thread's own segments keep their order at equal times.
    rows.sort_by(|(a, x), (b, y)| x.start.total_cmp(&y.start).then(a.cmp(b)));
    rows.into_iter()
        .enumerate()
        .map(|(seq, (thread, s))| {
            let (kind, rule) = match s.kind {
                SegmentKind::Compute { rule, .. } => ("compute", Some(rule)),
                SegmentKind::Wait { .. } => ("wait", None),
                SegmentKind::Transition { .. } => ("transition", None),
            };
            let level = s.level();
            TraceRecord {
                v: TRACE_VERSION,
                seq: seq as u64,
                t: s.start,
                thread: thread.0,
                kind,
                rule,
                freq_idx: level.index,
                freq: level.hz,
                dur: Some(s.duration()),
                energy: Some(s.energy),
                expr: s.expr.clone(),
            }
        })
        .collect()
}

/// Record for reduction step `index`, taken from the configuration the step
/// started in. The level is the acting thread's level afterwards.
pub fn from_step(index: usize, before: &Configuration, event: &ReductionEvent) -> TraceRecord {
    let thread = event.thread();
    let level: FrequencyLevel = event.levels()[0];
    let expr = before
        .closure(thread)
        .map(|c| snippet(&c.expr))
        .unwrap_or_default();
    TraceRecord {
        v: TRACE_VERSION,
        seq: index as u64,
        t: index as f64,
        thread: thread.0,
        kind: "step",
        rule: Some(event.rule()),
        freq_idx: level.index,
        freq: level.hz,
        dur: None,
        energy: None,
        expr,
    }
}

pub fn write_jsonl(records: &[TraceRecord], mut out: impl Write) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
