//! The reduction rules `Create`, `Claim` and `Add`, with `Cxt` resolved by a
//! scheduler that names the acting thread.

mod explore;
mod random;
mod scheduler;

pub use explore::{canonical_form, explore_all, explore_from, Exploration, Outcome};
pub use random::gen_random_program;
pub use scheduler::{Scheduler, SchedulerPolicy};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{decompose, Expr, FutureId, RedexSite};
use crate::configuration::{Closure, Configuration, WellFormednessError};
use crate::scaling::{FrequencyLevel, Operator, ScalingError, ScalingStrategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("{0} cannot take a step")]
    NotEnabled(FutureId),
    #[error("no closure realizes {0}")]
    UnknownThread(FutureId),
    #[error("run exceeded the step limit of {0}")]
    StepLimit(usize),
    #[error("exploration exceeded the state limit of {0}")]
    StateLimit(usize),
    #[error("no thread can step but the configuration is not final")]
    Stuck,
    #[error("source programs may not contain future references")]
    ReferenceInSource,
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error("ill-formed configuration: {0}")]
    IllFormed(#[from] WellFormednessError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    Create,
    Claim,
    Add,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Create => "Create",
            Rule::Claim => "Claim",
            Rule::Add => "Add",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionEvent {
    Create {
        thread: FutureId,
        child: FutureId,
        parent_level: FrequencyLevel,
        child_level: FrequencyLevel,
        /// Number of the two operator applications that hit a ladder end.
        clamps: u8,
    },
    Claim {
        thread: FutureId,
        claimed: FutureId,
        value: Expr,
        level: FrequencyLevel,
        clamped: bool,
    },
    Add {
        thread: FutureId,
        left: i64,
        right: i64,
        sum: i64,
        level: FrequencyLevel,
    },
}

impl ReductionEvent {
    pub fn rule(&self) -> Rule {
        match self {
            ReductionEvent::Create { .. } => Rule::Create,
            ReductionEvent::Claim { .. } => Rule::Claim,
            ReductionEvent::Add { .. } => Rule::Add,
        }
    }

    pub fn thread(&self) -> FutureId {
        match self {
            ReductionEvent::Create { thread, .. }
            | ReductionEvent::Claim { thread, .. }
            | ReductionEvent::Add { thread, .. } => *thread,
        }
    }

    pub fn clamp_count(&self) -> usize {
        match self {
            ReductionEvent::Create { clamps, .. } => usize::from(*clamps),
            ReductionEvent::Claim { clamped, .. } => usize::from(*clamped),
            ReductionEvent::Add { .. } => 0,
        }
    }

    /// Every frequency level mentioned by the event.
    pub fn levels(&self) -> Vec<FrequencyLevel> {
        match self {
            ReductionEvent::Create {
                parent_level,
                child_level,
                ..
            } => vec![*parent_level, *child_level],
            ReductionEvent::Claim { level, .. } | ReductionEvent::Add { level, .. } => vec![*level],
        }
    }
}

fn producer_holds_integer(config: &Configuration, target: FutureId) -> bool {
    config
        .closure(target)
        .is_some_and(|c| matches!(c.expr, Expr::Int(_)))
}

/// Whether `closure` can fire a rule in `config`.
///
/// A claim is enabled once its producer holds an integer. A producer holding a
/// bare future reference still has a claim of its own to make and does not yet
/// count as realized.
pub fn is_enabled(config: &Configuration, closure: &Closure) -> bool {
    match decompose(&closure.expr) {
        RedexSite::Arith { .. } | RedexSite::Create { .. } => true,
        RedexSite::Claim { target, .. } => producer_holds_integer(config, target),
        RedexSite::NoRedex(_) => false,
    }
}

/// Enabled threads, most recently created first.
pub fn enabled_threads(config: &Configuration) -> Vec<FutureId> {
    config
        .closures()
        .iter()
        .filter(|c| is_enabled(config, c))
        .map(|c| c.realizes)
        .collect()
}

impl Configuration {
    /// Fires exactly one rule on `thread`, in place.
    pub fn step_thread(
        &mut self,
        thread: FutureId,
        strategy: &dyn ScalingStrategy,
    ) -> Result<ReductionEvent, EngineError> {
        let idx = self
            .position(thread)
            .ok_or(EngineError::UnknownThread(thread))?;
        if !is_enabled(self, &self.closures()[idx]) {
            return Err(EngineError::NotEnabled(thread));
        }
        let freq = self.closures()[idx].freq;

        let event = match decompose(&self.closures()[idx].expr) {
            RedexSite::Arith {
                context,
                left,
                right,
            } => {
                let sum = left.wrapping_add(right);
                self.closures_mut()[idx].expr = context.plug(Expr::Int(sum));
                ReductionEvent::Add {
                    thread,
                    left,
                    right,
                    sum,
                    level: freq,
                }
            }
            RedexSite::Create { context, body } => {
                let child = self.fresh();
                let parent = strategy.scale(Operator::Down, freq);
                let spawned = strategy.scale(Operator::UpCreate, freq);
                let closures = self.closures_mut();
                closures[idx].expr = context.plug(Expr::Ref(child));
                closures[idx].freq = parent.level;
                closures.insert(
                    0,
                    Closure {
                        freq: spawned.level,
                        expr: body,
                        realizes: child,
                    },
                );
                ReductionEvent::Create {
                    thread,
                    child,
                    parent_level: parent.level,
                    child_level: spawned.level,
                    clamps: u8::from(parent.clamped) + u8::from(spawned.clamped),
                }
            }
            RedexSite::Claim { context, target } => {
                let producer = self
                    .position(target)
                    .ok_or(EngineError::UnknownThread(target))?;
                let scaled = strategy.scale(Operator::UpClaim, freq);
                let closures = self.closures_mut();
                let value = closures.remove(producer).expr;
                let idx = if producer < idx { idx - 1 } else { idx };
                closures[idx].expr = context.plug(value.clone());
                closures[idx].freq = scaled.level;
                ReductionEvent::Claim {
                    thread,
                    claimed: target,
                    value,
                    level: scaled.level,
                    clamped: scaled.clamped,
                }
            }
            RedexSite::NoRedex(_) => return Err(EngineError::NotEnabled(thread)),
        };
        Ok(event)
    }
}

/// Functional form of [`Configuration::step_thread`].
pub fn step(
    config: &Configuration,
    thread: FutureId,
    strategy: &dyn ScalingStrategy,
) -> Result<(Configuration, ReductionEvent), EngineError> {
    let mut next = config.clone();
    let event = next.step_thread(thread, strategy)?;
    Ok((next, event))
}

/// Every reduction uses at most this many steps per AST node.
pub const STEPS_PER_NODE: usize = 3;

pub fn default_step_limit(expr: &Expr) -> usize {
    10 * STEPS_PER_NODE * expr.node_count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_value: i64,
    pub events: Vec<ReductionEvent>,
    pub final_freq: FrequencyLevel,
    pub step_count: usize,
    pub clamp_event_count: usize,
}

impl RunResult {
    pub fn rules(&self) -> Vec<Rule> {
        self.events.iter().map(ReductionEvent::rule).collect()
    }
}

/// A run in progress, advanced one rule at a time.
#[derive(Debug)]
pub struct Execution<'s> {
    config: Configuration,
    strategy: &'s dyn ScalingStrategy,
    scheduler: Scheduler,
    events: Vec<ReductionEvent>,
    step_limit: usize,
    clamps: usize,
}

impl<'s> Execution<'s> {
    pub fn new(
        expr: &Expr,
        init: FrequencyLevel,
        strategy: &'s dyn ScalingStrategy,
        policy: SchedulerPolicy,
    ) -> Result<Self, EngineError> {
        if expr.contains_ref() {
            return Err(EngineError::ReferenceInSource);
        }
        strategy.ladder().level(init.index)?;
        Ok(Self {
            config: Configuration::initial(expr.clone(), init),
            strategy,
            scheduler: Scheduler::new(policy),
            events: Vec::new(),
            step_limit: default_step_limit(expr),
            clamps: 0,
        })
    }

    pub fn with_step_limit(mut self, limit: usize) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    pub fn events(&self) -> &[ReductionEvent] {
        &self.events
    }

    pub fn is_finished(&self) -> bool {
        self.config.is_terminal()
    }

    /// Fires one rule. Returns `None` once the run has finished.
    pub fn advance(&mut self) -> Result<Option<&ReductionEvent>, EngineError> {
        if self.config.is_terminal() {
            return Ok(None);
        }
        if self.events.len() >= self.step_limit {
            return Err(EngineError::StepLimit(self.step_limit));
        }
        let enabled = enabled_threads(&self.config);
        if enabled.is_empty() {
            return Err(EngineError::Stuck);
        }
        let thread = self.scheduler.pick(&enabled);
        let event = self.config.step_thread(thread, self.strategy)?;
        self.clamps += event.clamp_count();
        self.events.push(event);
        Ok(self.events.last())
    }

    pub fn finish(mut self) -> Result<RunResult, EngineError> {
        while self.advance()?.is_some() {}
        let root = self
            .config
            .root_closure()
            .expect("terminal configuration has a root");
        Ok(RunResult {
            final_value: root.expr.as_int().expect("terminal root holds an integer"),
            final_freq: root.freq,
            step_count: self.events.len(),
            clamp_event_count: self.clamps,
            events: self.events,
        })
    }
}

/// Reduces `expr` to an integer from a single closure at `init`.
pub fn run(
    expr: &Expr,
    init: FrequencyLevel,
    strategy: &dyn ScalingStrategy,
    policy: SchedulerPolicy,
) -> Result<RunResult, EngineError> {
    Execution::new(expr, init, strategy, policy)?.finish()
}

pub fn run_with_limit(
    expr: &Expr,
    init: FrequencyLevel,
    strategy: &dyn ScalingStrategy,
    policy: SchedulerPolicy,
    step_limit: usize,
) -> Result<RunResult, EngineError> {
    Execution::new(expr, init, strategy, policy)?
        .with_step_limit(step_limit)
        .finish()
}
