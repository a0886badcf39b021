//! Exhaustive search over the interleavings allowed by the `Cxt` rule.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use crate::calculus::{Expr, FutureId};
use crate::configuration::Configuration;
use crate::scaling::{FrequencyLevel, ScalingStrategy};

use super::{enabled_threads, EngineError};

/// A terminal state: the root's integer and its frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub value: i64,
    pub level: FrequencyLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub outcomes: BTreeSet<Outcome>,
    /// Distinct states visited, after canonicalization.
    pub states: usize,
}

/// Closures listed in depth-first order from the root, with future ids
/// renumbered in that order. Two configurations that differ only in closure
/// order or in the choice of fresh ids map to the same form.
pub fn canonical_form(config: &Configuration) -> Vec<(FrequencyLevel, Expr)> {
    let mut renaming: BTreeMap<FutureId, FutureId> = BTreeMap::new();
    let mut order = Vec::with_capacity(config.len());
    let mut stack = vec![config.root()];
    renaming.insert(config.root(), FutureId(0));
    while let Some(id) = stack.pop() {
        order.push(id);
        let Some(closure) = config.closure(id) else {
            continue;
        };
        // Push in reverse so the leftmost reference is expanded first.
        for r in closure.expr.refs().into_iter().rev() {
            stack.push(r);
        }
    }
    // Number in visiting order.
    for id in &order {
        let next = FutureId(renaming.len() as u64);
        renaming.entry(*id).or_insert(next);
    }
    order
        .iter()
        .filter_map(|id| config.closure(*id))
        .map(|c| {
            let expr = c
                .expr
                .map_refs(&mut |r| renaming.get(&r).copied().unwrap_or(r));
            (c.freq, expr)
        })
        .collect()
}

/// Breadth-first search over every interleaving of `expr` started at `init`.
pub fn explore_all(
    expr: &Expr,
    init: FrequencyLevel,
    strategy: &dyn ScalingStrategy,
    state_limit: usize,
) -> Result<Exploration, EngineError> {
    if expr.contains_ref() {
        return Err(EngineError::ReferenceInSource);
    }
    strategy.ladder().level(init.index)?;
    explore_from(
        Configuration::initial(expr.clone(), init),
        strategy,
        state_limit,
    )
}

pub fn explore_from(
    start: Configuration,
    strategy: &dyn ScalingStrategy,
    state_limit: usize,
) -> Result<Exploration, EngineError> {
    start.validate(Some(strategy.ladder()))?;
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut outcomes = BTreeSet::new();

    seen.insert(canonical_form(&start));
    queue.push_back(start);

    while let Some(config) = queue.pop_front() {
        if config.is_terminal() {
            let root = config.root_closure().expect("terminal state has a root");
            outcomes.insert(Outcome {
                value: root.expr.as_int().expect("terminal root holds an integer"),
                level: root.freq,
            });
            continue;
        }
        let enabled = enabled_threads(&config);
        if enabled.is_empty() {
            return Err(EngineError::Stuck);
        }
        for thread in enabled {
            let mut next = config.clone();
            next.step_thread(thread, strategy)?;
            if seen.insert(canonical_form(&next)) {
                if seen.len() > state_limit {
                    return Err(EngineError::StateLimit(state_limit));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(Exploration {
        outcomes,
        states: seen.len(),
    })
}
