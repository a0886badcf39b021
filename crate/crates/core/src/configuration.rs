//! Parallel configurations of closures.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::calculus::{Expr, FutureId};
use crate::scaling::{FrequencyLadder, FrequencyLevel};

/// One thread: expression `expr` running at `freq` to realize `realizes`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Closure {
    pub freq: FrequencyLevel,
    pub expr: Expr,
    pub realizes: FutureId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WellFormednessError {
    #[error("no closure realizes the root {0}")]
    MissingRoot(FutureId),
    #[error("{0} is realized by more than one closure")]
    DuplicateProducer(FutureId),
    #[error("{0} is referenced but no closure realizes it")]
    DanglingFuture(FutureId),
    #[error("future references form a cycle through {0}")]
    Cycle(FutureId),
    #[error("{thread} runs at {index}, outside the ladder")]
    FrequencyOutsideLadder { thread: FutureId, index: usize },
    #[error("{thread} will be reused by the fresh-id counter")]
    StaleCounter { thread: FutureId },
}

/// Closures ordered most recently created first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    closures: Vec<Closure>,
    next_fresh: u64,
    root: FutureId,
}

impl Configuration {
    /// The single-closure start state; the root is `fv0`.
    pub fn initial(expr: Expr, level: FrequencyLevel) -> Self {
        let root = FutureId(0);
        Self {
            closures: vec![Closure {
                freq: level,
                expr,
                realizes: root,
            }],
            next_fresh: 1,
            root,
        }
    }

    /// Assembles a configuration directly. Call [`Configuration::validate`]
    /// before stepping it.
    pub fn from_parts(closures: Vec<Closure>, next_fresh: u64, root: FutureId) -> Self {
        Self {
            closures,
            next_fresh,
            root,
        }
    }

    pub fn closures(&self) -> &[Closure] {
        &self.closures
    }

    pub(crate) fn closures_mut(&mut self) -> &mut Vec<Closure> {
        &mut self.closures
    }

    pub fn root(&self) -> FutureId {
        self.root
    }

    pub fn next_fresh(&self) -> u64 {
        self.next_fresh
    }

    pub fn len(&self) -> usize {
        self.closures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closures.is_empty()
    }

    pub fn position(&self, id: FutureId) -> Option<usize> {
        self.closures.iter().position(|c| c.realizes == id)
    }

    pub fn closure(&self, id: FutureId) -> Option<&Closure> {
        self.closures.iter().find(|c| c.realizes == id)
    }

    pub fn root_closure(&self) -> Option<&Closure> {
        self.closure(self.root)
    }

    pub(crate) fn fresh(&mut self) -> FutureId {
        let id = FutureId(self.next_fresh);
        self.next_fresh += 1;
        id
    }

    /// Only the root is left and it holds an integer.
    pub fn is_terminal(&self) -> bool {
        matches!(self.closures.as_slice(), [only] if only.realizes == self.root && matches!(only.expr, Expr::Int(_)))
    }

    /// Checks producer uniqueness, absence of dangling references, acyclicity
    /// and, when a ladder is given, that every frequency belongs to it.
    pub fn validate(&self, ladder: Option<&FrequencyLadder>) -> Result<(), WellFormednessError> {
        let mut producers: BTreeMap<FutureId, &Closure> = BTreeMap::new();
        for c in &self.closures {
            if producers.insert(c.realizes, c).is_some() {
                return Err(WellFormednessError::DuplicateProducer(c.realizes));
            }
            if c.realizes.0 >= self.next_fresh && c.realizes != self.root {
                return Err(WellFormednessError::StaleCounter { thread: c.realizes });
            }
            if let Some(ladder) = ladder {
                if !ladder.contains(c.freq) {
                    return Err(WellFormednessError::FrequencyOutsideLadder {
                        thread: c.realizes,
                        index: c.freq.index,
                    });
                }
            }
        }
        if !producers.contains_key(&self.root) {
            return Err(WellFormednessError::MissingRoot(self.root));
        }
        for c in &self.closures {
            if let Some(missing) = c
                .expr
                .refs()
                .into_iter()
                .find(|r| !producers.contains_key(r))
            {
                return Err(WellFormednessError::DanglingFuture(missing));
            }
        }

        // Depth-first search over "closure references future" edges.
        let mut done = BTreeSet::new();
        for &start in producers.keys() {
            let mut on_path = BTreeSet::new();
            visit(start, &producers, &mut on_path, &mut done)?;
        }
        Ok(())
    }
}

fn visit(
    id: FutureId,
    producers: &BTreeMap<FutureId, &Closure>,
    on_path: &mut BTreeSet<FutureId>,
    done: &mut BTreeSet<FutureId>,
) -> Result<(), WellFormednessError> {
    if done.contains(&id) {
        return Ok(());
    }
    if !on_path.insert(id) {
        return Err(WellFormednessError::Cycle(id));
    }
    for next in producers[&id].expr.refs() {
        visit(next, producers, on_path, done)?;
    }
    on_path.remove(&id);
    done.insert(id);
    Ok(())
}
