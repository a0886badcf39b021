//! Report shapes shared by the table and JSON renderings.
//!
//! Numbers print with Rust's shortest round-trip formatting in both forms, so
//! the table and the JSON carry identical values.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use greenfut::engine::Exploration;
use greenfut::{Rule, RunResult, SimulationReport, WaitCase};

const LABEL_WIDTH: usize = 18;

#[derive(Debug, Serialize)]
pub struct ClaimRow {
    pub claimant: String,
    pub target: String,
    pub t_arrive: f64,
    pub t_realize: f64,
    pub wait: f64,
    pub case: &'static str,
}

#[derive(Debug, Serialize)]
pub struct SimulationSummary {
    pub command: &'static str,
    pub program: String,
    pub mode: &'static str,
    pub strategy: String,
    pub final_value: i64,
    pub final_freq_idx: usize,
    pub final_freq: f64,
    pub makespan: f64,
    pub energy: f64,
    pub edp: f64,
    pub ed2p: f64,
    pub total_wait: f64,
    pub case_i: usize,
    pub case_ii: usize,
    pub clamp_event_count: usize,
    pub transition_count: usize,
    pub thread_energy: BTreeMap<String, f64>,
    pub claims: Vec<ClaimRow>,
}

fn case_label(case: WaitCase) -> &'static str {
    match case {
        WaitCase::CaseI => "I",
        WaitCase::CaseII => "II",
    }
}

impl SimulationSummary {
    pub fn new(program: String, r: &SimulationReport) -> Self {
        let (case_i, case_ii) = r.case_counts();
        Self {
            command: "run",
            program,
            mode: "simulate",
            strategy: r.strategy.clone(),
            final_value: r.final_value,
            final_freq_idx: r.final_freq.index,
            final_freq: r.final_freq.hz,
            makespan: r.makespan,
            energy: r.total_energy,
            edp: r.edp,
            ed2p: r.ed2p,
            total_wait: r.total_wait(),
            case_i,
            case_ii,
            clamp_event_count: r.clamp_event_count,
            transition_count: r.transition_count,
            thread_energy: r
                .thread_energy
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            claims: r
                .claims
                .iter()
                .map(|c| ClaimRow {
                    claimant: c.claimant.to_string(),
                    target: c.target.to_string(),
                    t_arrive: c.t_arrive,
                    t_realize: c.t_realize,
                    wait: c.wait,
                    case: case_label(c.case),
                })
                .collect(),
        }
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        field(&mut out, "program", &self.program);
        field(&mut out, "strategy", &self.strategy);
        field(&mut out, "final value", self.final_value);
        field(
            &mut out,
            "final freq",
            format!("fq_{} ({})", self.final_freq_idx, self.final_freq),
        );
        field(&mut out, "makespan", self.makespan);
        field(&mut out, "energy", self.energy);
        field(&mut out, "edp", self.edp);
        field(&mut out, "ed2p", self.ed2p);
        field(&mut out, "total wait", self.total_wait);
        field(&mut out, "case I", self.case_i);
        field(&mut out, "case II", self.case_ii);
        field(&mut out, "clamps", self.clamp_event_count);
        field(&mut out, "transitions", self.transition_count);
        for (thread, e) in &self.thread_energy {
            field(&mut out, &format!("energy {thread}"), e);
        }
        if !self.claims.is_empty() {
            out.push('\n');
            let rows = self.claims.iter().map(|c| {
                vec![
                    c.claimant.clone(),
                    c.target.clone(),
                    c.t_arrive.to_string(),
                    c.t_realize.to_string(),
                    c.wait.to_string(),
                    c.case.to_owned(),
                ]
            });
            grid(
                &mut out,
                &["claimant", "target", "arrive", "realize", "wait", "case"],
                rows,
            );
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct SemanticsSummary {
    pub command: &'static str,
    pub program: String,
    pub mode: &'static str,
    pub strategy: String,
    pub scheduler: String,
    pub final_value: i64,
    pub final_freq_idx: usize,
    pub final_freq: f64,
    pub steps: usize,
    pub clamp_event_count: usize,
    pub rules: Vec<Rule>,
}

impl SemanticsSummary {
    pub fn new(program: String, strategy: String, scheduler: String, r: &RunResult) -> Self {
        Self {
            command: "run",
            program,
            mode: "semantics",
            strategy,
            scheduler,
            final_value: r.final_value,
            final_freq_idx: r.final_freq.index,
            final_freq: r.final_freq.hz,
            steps: r.step_count,
            clamp_event_count: r.clamp_event_count,
            rules: r.rules(),
        }
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        field(&mut out, "program", &self.program);
        field(&mut out, "strategy", &self.strategy);
        field(&mut out, "scheduler", &self.scheduler);
        field(&mut out, "final value", self.final_value);
        field(
            &mut out,
            "final freq",
            format!("fq_{} ({})", self.final_freq_idx, self.final_freq),
        );
        field(&mut out, "steps", self.steps);
        field(&mut out, "clamps", self.clamp_event_count);
        let rules: Vec<_> = self.rules.iter().map(Rule::to_string).collect();
        field(&mut out, "rules", rules.join(" "));
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub strategy: String,
    pub final_value: i64,
    pub total_wait: f64,
    pub case_i: usize,
    pub case_ii: usize,
    pub energy: f64,
    pub makespan: f64,
    pub edp: f64,
    pub ed2p: f64,
    pub clamp_event_count: usize,
}

impl CompareRow {
    pub fn new(r: &SimulationReport) -> Self {
        let (case_i, case_ii) = r.case_counts();
        Self {
            strategy: r.strategy.clone(),
            final_value: r.final_value,
            total_wait: r.total_wait(),
            case_i,
            case_ii,
            energy: r.total_energy,
            makespan: r.makespan,
            edp: r.edp,
            ed2p: r.ed2p,
            clamp_event_count: r.clamp_event_count,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub command: &'static str,
    pub program: String,
    pub rows: Vec<CompareRow>,
}

impl CompareSummary {
    pub fn table(&self) -> String {
        let mut out = String::new();
        field(&mut out, "program", &self.program);
        out.push('\n');
        let rows = self.rows.iter().map(|r| {
            vec![
                r.strategy.clone(),
                r.final_value.to_string(),
                r.total_wait.to_string(),
                r.case_i.to_string(),
                r.case_ii.to_string(),
                r.energy.to_string(),
                r.makespan.to_string(),
                r.edp.to_string(),
                r.ed2p.to_string(),
                r.clamp_event_count.to_string(),
            ]
        });
        grid(
            &mut out,
            &[
                "strategy", "value", "wait", "case_i", "case_ii", "energy", "makespan", "edp",
                "ed2p", "clamps",
            ],
            rows,
        );
        out
    }
}

#[derive(Debug, Serialize)]
pub struct OutcomeRow {
    pub value: i64,
    pub freq_idx: usize,
    pub freq: f64,
}

#[derive(Debug, Serialize)]
pub struct ExploreSummary {
    pub command: &'static str,
    pub program: String,
    pub strategy: String,
    pub states: usize,
    pub outcomes: Vec<OutcomeRow>,
}

impl ExploreSummary {
    pub fn new(program: String, strategy: String, x: &Exploration) -> Self {
        Self {
            command: "explore",
            program,
            strategy,
            states: x.states,
            outcomes: x
                .outcomes
                .iter()
                .map(|o| OutcomeRow {
                    value: o.value,
                    freq_idx: o.level.index,
                    freq: o.level.hz,
                })
                .collect(),
        }
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        field(&mut out, "program", &self.program);
        field(&mut out, "strategy", &self.strategy);
        field(&mut out, "states", self.states);
        field(&mut out, "outcomes", self.outcomes.len());
        out.push('\n');
        let rows = self.outcomes.iter().map(|o| {
            vec![
                o.value.to_string(),
                format!("fq_{}", o.freq_idx),
                o.freq.to_string(),
            ]
        });
        grid(&mut out, &["value", "level", "freq"], rows);
        out
    }
}

fn field(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{label:<LABEL_WIDTH$}{value}");
}

fn grid(out: &mut String, header: &[&str], rows: impl Iterator<Item = Vec<String>>) {
    let rows: Vec<Vec<String>> = rows.collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_owned()
    };
    let _ = writeln!(out, "{}", line(header.to_vec()));
    for r in &rows {
        let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
    }
}
