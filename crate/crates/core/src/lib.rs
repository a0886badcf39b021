//! Variant-frequency reduction semantics for futures.
//!
//! Programs in a small addition calculus with `future` are reduced by the
//! `Create`, `Claim` and `Add` rules, where each thread carries a CPU
//! frequency that a [`ScalingStrategy`] adjusts at creation and claim time.
//! The [`sim`] module replays the same rules in virtual time to measure wait
//! time, energy, EDP and ED²P.

pub mod calculus;
pub mod configuration;
pub mod engine;
pub mod parser;
pub mod scaling;
pub mod sim;

pub use calculus::{decompose, eval_sequential, plug, Context, Expr, Frame, FutureId, RedexSite};
pub use configuration::{Closure, Configuration, WellFormednessError};
pub use engine::{
    enabled_threads, explore_all, gen_random_program, run, step, EngineError, Execution,
    Exploration, Outcome, ReductionEvent, Rule, RunResult, SchedulerPolicy,
};
pub use parser::{parse, parse_str, unparse, ParseError, SourceProgram};
pub use scaling::{
    strategy_both, strategy_child_only, strategy_none, strategy_parent_only, FrequencyLadder,
    FrequencyLevel, Operator, ScalingError, ScalingStrategy, StrategyRegistry, TableStrategy,
};
pub use sim::{
    compute_metrics, simulate, ClaimRecord, CostModel, Metrics, SimulationReport, WaitCase,
};
