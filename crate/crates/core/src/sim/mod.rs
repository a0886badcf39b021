//! Virtual-time execution of the reduction rules.
//!
//! Every thread owns a core. A thread advances through its own reductions,
//! each costing time and energy at the thread's current frequency. A thread
//! that needs a future which is not yet realized waits, either spinning or
//! blocked, until the producer finishes. Producers stop consuming energy as
//! soon as they hold an integer.
//!
//! The reductions themselves are performed by the engine's
//! [`Configuration::step_thread`]; this module only decides when each one
//! happens. Pending work is ordered by `(time, thread id)`.

mod metrics;
mod model;

pub use metrics::{compute_metrics, Metrics};
pub use model::{step_duration, step_energy, BlockPenalty, CostModel, SpinPower, WaitPolicy};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{decompose, Expr, FutureId, RedexSite};
use crate::configuration::Configuration;
use crate::engine::{EngineError, ReductionEvent, Rule};
use crate::parser::unparse;
use crate::scaling::{FrequencyLevel, ScalingStrategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invalid cost model: {0}")]
    Model(String),
}

/// Longest rendered expression kept on a segment.
pub const EXPR_SNIPPET_LEN: usize = 48;

/// Relative tolerance under which arrival and realization count as simultaneous.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SegmentKind {
    Compute {
        rule: Rule,
        level: FrequencyLevel,
    },
    Wait {
        target: FutureId,
        mode: WaitPolicy,
        level: FrequencyLevel,
    },
    Transition {
        from: FrequencyLevel,
        to: FrequencyLevel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub kind: SegmentKind,
    pub energy: f64,
    /// The thread's expression when the segment began, truncated.
    pub expr: String,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// Level the thread runs at during the segment.
    pub fn level(&self) -> FrequencyLevel {
        match self.kind {
            SegmentKind::Compute { level, .. } | SegmentKind::Wait { level, .. } => level,
            SegmentKind::Transition { to, .. } => to,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreadTimeline {
    pub thread: FutureId,
    pub segments: Vec<Segment>,
}

impl ThreadTimeline {
    pub fn energy(&self) -> f64 {
        self.segments.iter().map(|s| s.energy).sum()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.segments.first()?.start, self.segments.last()?.end))
    }

    pub fn has_wait(&self) -> bool {
        self.segments
            .iter()
            .any(|s| matches!(s.kind, SegmentKind::Wait { .. }))
    }
}

/// The two timing outcomes of a claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WaitCase {
    /// The claimant arrived first and had to wait.
    CaseI,
    /// The value was ready on arrival.
    CaseII,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimRecord {
    pub claimant: FutureId,
    pub target: FutureId,
    pub t_arrive: f64,
    pub t_realize: f64,
    pub wait: f64,
    pub case: WaitCase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub strategy: String,
    pub final_value: i64,
    pub final_freq: FrequencyLevel,
    pub makespan: f64,
    pub total_energy: f64,
    pub thread_energy: BTreeMap<FutureId, f64>,
    pub timelines: Vec<ThreadTimeline>,
    pub claims: Vec<ClaimRecord>,
    /// Reductions in the order the simulation fired them.
    pub events: Vec<ReductionEvent>,
    pub clamp_event_count: usize,
    pub transition_count: usize,
    pub edp: f64,
    pub ed2p: f64,
}

impl SimulationReport {
    pub fn total_wait(&self) -> f64 {
        self.claims.iter().map(|c| c.wait).sum()
    }

    pub fn case_counts(&self) -> (usize, usize) {
        let case_i = self
            .claims
            .iter()
            .filter(|c| c.case == WaitCase::CaseI)
            .count();
        (case_i, self.claims.len() - case_i)
    }

    pub fn timeline(&self, thread: FutureId) -> Option<&ThreadTimeline> {
        self.timelines.iter().find(|t| t.thread == thread)
    }

    /// Energy of compute segments only.
    pub fn compute_energy(&self) -> f64 {
        self.timelines
            .iter()
            .flat_map(|t| &t.segments)
            .filter(|s| matches!(s.kind, SegmentKind::Compute { .. }))
            .map(|s| s.energy)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Wakeup {
    at: f64,
    thread: FutureId,
}

impl Eq for Wakeup {}

impl Ord for Wakeup {
    // Reversed: BinaryHeap is a max-heap and we want the earliest wakeup.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.thread.cmp(&self.thread))
    }
}

impl PartialOrd for Wakeup {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Runnable,
    Parked {
        target: FutureId,
        since: f64,
    },
    /// Woken from a wait; its next action is the claim itself.
    Resumed,
    Realized(f64),
    Finished,
}

#[derive(Debug)]
struct ThreadState {
    status: Status,
    segments: Vec<Segment>,
    energy: f64,
}

struct Simulation<'a> {
    config: Configuration,
    strategy: &'a dyn ScalingStrategy,
    model: &'a CostModel,
    threads: BTreeMap<FutureId, ThreadState>,
    queue: BinaryHeap<Wakeup>,
    claims: Vec<ClaimRecord>,
    events: Vec<ReductionEvent>,
    total_energy: f64,
    transitions: usize,
    makespan: Option<f64>,
}

/// Runs `expr` from a single root thread at `init` in virtual time.
pub fn simulate(
    expr: &Expr,
    init: FrequencyLevel,
    strategy: &dyn ScalingStrategy,
    model: &CostModel,
) -> Result<SimulationReport, SimError> {
    model.validate()?;
    if expr.contains_ref() {
        return Err(EngineError::ReferenceInSource.into());
    }
    strategy
        .ladder()
        .level(init.index)
        .map_err(EngineError::from)?;

    let config = Configuration::initial(expr.clone(), init);
    let root = config.root();
    let mut sim = Simulation {
        config,
        strategy,
        model,
        threads: BTreeMap::new(),
        queue: BinaryHeap::new(),
        claims: Vec::new(),
        events: Vec::new(),
        total_energy: 0.0,
        transitions: 0,
        makespan: None,
    };
    sim.threads.insert(root, ThreadState::new());
    sim.check_finished(root, 0.0);

    while sim.makespan.is_none() {
        let Some(Wakeup { at, thread }) = sim.queue.pop() else {
            return Err(EngineError::Stuck.into());
        };
        sim.dispatch(thread, at)?;
    }
    Ok(sim.into_report())
}

impl ThreadState {
    fn new() -> Self {
        Self {
            status: Status::Runnable,
            segments: Vec::new(),
            energy: 0.0,
        }
    }
}

fn is_tie(arrive: f64, realize: f64) -> bool {
    realize - arrive <= TIE_TOLERANCE * arrive.abs().max(1.0)
}

/// `expr` rendered and cut to at most [`EXPR_SNIPPET_LEN`] characters.
pub fn snippet(expr: &Expr) -> String {
    let text = unparse(expr);
    if text.chars().count() <= EXPR_SNIPPET_LEN {
        return text;
    }
    let mut cut: String = text.chars().take(EXPR_SNIPPET_LEN - 1).collect();
    cut.push('…');
    cut
}

impl Simulation<'_> {
    fn closure_expr(&self, thread: FutureId) -> &Expr {
        &self
            .config
            .closure(thread)
            .expect("live thread has a closure")
            .expr
    }

    fn level(&self, thread: FutureId) -> FrequencyLevel {
        self.config
            .closure(thread)
            .expect("live thread has a closure")
            .freq
    }

    fn state(&mut self, thread: FutureId) -> &mut ThreadState {
        self.threads.get_mut(&thread).expect("thread is registered")
    }

    fn record(&mut self, thread: FutureId, segment: Segment) {
        self.total_energy += segment.energy;
        let state = self.state(thread);
        state.energy += segment.energy;
        state.segments.push(segment);
    }

    fn dispatch(&mut self, thread: FutureId, now: f64) -> Result<(), SimError> {
        match decompose(self.closure_expr(thread)) {
            RedexSite::Arith { .. } => self.compute(thread, now, Rule::Add),
            RedexSite::Create { .. } => self.compute(thread, now, Rule::Create),
            RedexSite::Claim { target, .. } => {
                if self.state(thread).status == Status::Resumed {
                    return self.compute(thread, now, Rule::Claim);
                }
                match self.threads[&target].status {
                    Status::Realized(t_realize) => {
                        if is_tie(now, t_realize) {
                            self.claims.push(ClaimRecord {
                                claimant: thread,
                                target,
                                t_arrive: now,
                                t_realize,
                                wait: 0.0,
                                case: WaitCase::CaseII,
                            });
                            self.compute(thread, now, Rule::Claim)
                        } else {
                            self.resume_after_wait(thread, target, now, t_realize);
                            Ok(())
                        }
                    }
                    _ => {
                        self.state(thread).status = Status::Parked { target, since: now };
                        Ok(())
                    }
                }
            }
            RedexSite::NoRedex(_) => unreachable!("finished threads are never scheduled"),
        }
    }

    /// Charges the wait for `target`, then schedules the claim.
    fn resume_after_wait(
        &mut self,
        thread: FutureId,
        target: FutureId,
        since: f64,
        t_realize: f64,
    ) {
        if is_tie(since, t_realize) {
            self.claims.push(ClaimRecord {
                claimant: thread,
                target,
                t_arrive: since,
                t_realize,
                wait: 0.0,
                case: WaitCase::CaseII,
            });
            self.state(thread).status = Status::Resumed;
            self.queue.push(Wakeup {
                at: since.max(t_realize),
                thread,
            });
            return;
        }

        let level = self.level(thread);
        let (end, energy) = match self.model.wait_policy {
            WaitPolicy::Spin => {
                let power = match self.model.spin_power {
                    SpinPower::AtCurrentFrequency => self.model.power(level),
                    SpinPower::FixedIdle(p) => p,
                };
                (t_realize, power * (t_realize - since))
            }
            WaitPolicy::Block => (
                t_realize + self.model.block_penalty.time,
                self.model.block_penalty.energy,
            ),
        };
        let expr = snippet(self.closure_expr(thread));
        self.record(
            thread,
            Segment {
                start: since,
                end,
                kind: SegmentKind::Wait {
                    target,
                    mode: self.model.wait_policy,
                    level,
                },
                energy,
                expr,
            },
        );
        self.claims.push(ClaimRecord {
            claimant: thread,
            target,
            t_arrive: since,
            t_realize,
            wait: t_realize - since,
            case: WaitCase::CaseI,
        });
        self.state(thread).status = Status::Resumed;
        self.queue.push(Wakeup { at: end, thread });
    }

    fn compute(&mut self, thread: FutureId, now: f64, rule: Rule) -> Result<(), SimError> {
        let level = self.level(thread);
        let duration = step_duration(rule, level, self.model);
        let energy = step_energy(rule, level, self.model);
        let expr = snippet(self.closure_expr(thread));
        let end = now + duration;
        self.record(
            thread,
            Segment {
                start: now,
                end,
                kind: SegmentKind::Compute { rule, level },
                energy,
                expr,
            },
        );

        let event = self.config.step_thread(thread, self.strategy)?;
        debug_assert_eq!(event.rule(), rule);
        self.state(thread).status = Status::Runnable;

        match &event {
            ReductionEvent::Create {
                child,
                parent_level,
                child_level,
                ..
            } => {
                let child = *child;
                self.threads.insert(child, ThreadState::new());
                let parent_at = self.transition(thread, level, *parent_level, end);
                let child_at = self.transition(child, level, *child_level, end);
                // A literal body is realized as soon as the child exists.
                self.check_finished(child, child_at);
                self.queue.push(Wakeup {
                    at: parent_at,
                    thread,
                });
            }
            ReductionEvent::Claim { level: after, .. } => {
                let at = self.transition(thread, level, *after, end);
                self.check_finished(thread, at);
            }
            ReductionEvent::Add { .. } => self.check_finished(thread, end),
        }
        self.events.push(event);
        Ok(())
    }

    /// Charges a frequency change, returning when the thread may continue.
    fn transition(
        &mut self,
        thread: FutureId,
        from: FrequencyLevel,
        to: FrequencyLevel,
        at: f64,
    ) -> f64 {
        if from == to {
            return at;
        }
        self.transitions += 1;
        let tau = self.model.tau;
        if tau > 0.0 {
            let energy = if self.model.transition_energy {
                self.model.power(to) * tau
            } else {
                0.0
            };
            let expr = snippet(self.closure_expr(thread));
            self.record(
                thread,
                Segment {
                    start: at,
                    end: at + tau,
                    kind: SegmentKind::Transition { from, to },
                    energy,
                    expr,
                },
            );
        }
        at + tau
    }

    /// Marks a thread holding an integer as done and wakes its claimant;
    /// otherwise reschedules it at `at`.
    fn check_finished(&mut self, thread: FutureId, at: f64) {
        if !matches!(self.closure_expr(thread), Expr::Int(_)) {
            self.queue.push(Wakeup { at, thread });
            return;
        }
        if thread == self.config.root() {
            self.state(thread).status = Status::Finished;
            self.makespan = Some(at);
            return;
        }
        self.state(thread).status = Status::Realized(at);
        let parked = self.threads.iter().find_map(|(id, s)| match s.status {
            Status::Parked { target, since } if target == thread => Some((*id, since)),
            _ => None,
        });
        if let Some((claimant, since)) = parked {
            self.resume_after_wait(claimant, thread, since, at);
        }
    }

    fn into_report(self) -> SimulationReport {
        let root = self.config.root_closure().expect("finished run has a root");
        let makespan = self.makespan.expect("simulation finished");
        let metrics = Metrics::new(self.total_energy, makespan);
        SimulationReport {
            strategy: self.strategy.name().to_owned(),
            final_value: root.expr.as_int().expect("root holds an integer"),
            final_freq: root.freq,
            makespan,
            total_energy: self.total_energy,
            thread_energy: self.threads.iter().map(|(id, s)| (*id, s.energy)).collect(),
            clamp_event_count: self.events.iter().map(ReductionEvent::clamp_count).sum(),
            transition_count: self.transitions,
            timelines: self
                .threads
                .into_iter()
                .map(|(thread, s)| ThreadTimeline {
                    thread,
                    segments: s.segments,
                })
                .collect(),
            claims: self.claims,
            events: self.events,
            edp: metrics.edp,
            ed2p: metrics.ed2p,
        }
    }
}
