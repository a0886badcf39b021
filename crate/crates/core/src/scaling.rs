//! Frequency ladders and the three scaling operators.
//!
//! A strategy supplies `up_create` (applied to the child at future creation),
//! `down` (applied to the parent at future creation) and `up_claim` (applied
//! to the claimant after a claim). The built-in strategies are tables over
//! successor/predecessor/identity with clamping at the ends of the ladder.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("frequency ladder is empty")]
    EmptyLadder,
    #[error("frequency {0} is not positive and finite")]
    BadFrequency(f64),
    #[error("frequency ladder is not strictly increasing at position {0}")]
    NotIncreasing(usize),
    #[error("level {index} is outside the ladder fq_1..fq_{len}")]
    LevelOutOfRange { index: usize, len: usize },
    #[error("unknown scaling strategy `{0}`")]
    UnknownStrategy(String),
}

/// The finite, strictly increasing set of frequencies a core supports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyLadder {
    levels: Vec<f64>,
}

impl FrequencyLadder {
    pub fn new(levels: Vec<f64>) -> Result<Self, ScalingError> {
        if levels.is_empty() {
            return Err(ScalingError::EmptyLadder);
        }
        if let Some(&bad) = levels.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(ScalingError::BadFrequency(bad));
        }
        if let Some(i) = levels.windows(2).position(|w| w[0] >= w[1]) {
            return Err(ScalingError::NotIncreasing(i + 2));
        }
        Ok(Self { levels })
    }

    /// Abstract units `1.0, 2.0, ..., n`.
    pub fn uniform(n: usize) -> Result<Self, ScalingError> {
        Self::new((1..=n).map(|k| k as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.levels
    }

    /// Level `fq_index`, 1-based.
    pub fn level(&self, index: usize) -> Result<FrequencyLevel, ScalingError> {
        if index == 0 || index > self.levels.len() {
            return Err(ScalingError::LevelOutOfRange {
                index,
                len: self.levels.len(),
            });
        }
        Ok(FrequencyLevel {
            index,
            hz: self.levels[index - 1],
        })
    }

    pub fn lowest(&self) -> FrequencyLevel {
        self.level(1).expect("ladder is non-empty")
    }

    pub fn highest(&self) -> FrequencyLevel {
        self.level(self.len()).expect("ladder is non-empty")
    }

    pub fn contains(&self, level: FrequencyLevel) -> bool {
        self.level(level.index).is_ok_and(|l| l == level)
    }
}

impl Default for FrequencyLadder {
    /// `[1.0, 1.5, 2.0, 2.5]`, abstract GHz. The values carry no meaning beyond
    /// giving four distinct levels.
    fn default() -> Self {
        Self {
            levels: vec![1.0, 1.5, 2.0, 2.5],
        }
    }
}

/// Default initial level index for [`FrequencyLadder::default`].
pub const DEFAULT_INIT_LEVEL: usize = 2;

/// A ladder position together with its resolved frequency.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrequencyLevel {
    pub index: usize,
    pub hz: f64,
}

impl PartialEq for FrequencyLevel {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.hz.to_bits() == other.hz.to_bits()
    }
}

impl Eq for FrequencyLevel {}

impl Hash for FrequencyLevel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.index.hash(state);
        self.hz.to_bits().hash(state);
    }
}

impl PartialOrd for FrequencyLevel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FrequencyLevel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index
            .cmp(&other.index)
            .then(self.hz.total_cmp(&other.hz))
    }
}

impl fmt::Display for FrequencyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fq_{} ({})", self.index, self.hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    /// `↑`: the new future thread at creation.
    UpCreate,
    /// `⇑`: the claimant after a claim.
    UpClaim,
    /// `↓`: the parent thread at creation.
    Down,
}

/// Result of one operator application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scaled {
    pub level: FrequencyLevel,
    /// The operator wanted to move past an end of the ladder and was held.
    pub clamped: bool,
}

/// A scaling factor selection policy over a fixed ladder.
///
/// Implementations must return levels of [`ScalingStrategy::ladder`], with
/// `up_*` never lowering and `down` never raising the frequency.
pub trait ScalingStrategy: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn ladder(&self) -> &FrequencyLadder;

    fn scale(&self, op: Operator, level: FrequencyLevel) -> Scaled;

    fn up_create(&self, level: FrequencyLevel) -> FrequencyLevel {
        self.scale(Operator::UpCreate, level).level
    }

    fn up_claim(&self, level: FrequencyLevel) -> FrequencyLevel {
        self.scale(Operator::UpClaim, level).level
    }

    fn down(&self, level: FrequencyLevel) -> FrequencyLevel {
        self.scale(Operator::Down, level).level
    }
}

/// One entry of an operator table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    Stay,
    Successor,
    Predecessor,
}

impl Shift {
    fn apply(self, ladder: &FrequencyLadder, level: FrequencyLevel) -> Scaled {
        let n = ladder.len();
        let (index, clamped) = match self {
            Shift::Stay => (level.index, false),
            Shift::Successor if level.index >= n => (n, true),
            Shift::Successor => (level.index + 1, false),
            Shift::Predecessor if level.index <= 1 => (1, true),
            Shift::Predecessor => (level.index - 1, false),
        };
        Scaled {
            level: ladder.level(index).expect("shift stays within ladder"),
            clamped,
        }
    }
}

/// A strategy given by a fixed shift per operator.
#[derive(Debug, Clone)]
pub struct TableStrategy {
    name: String,
    ladder: FrequencyLadder,
    up_create: Shift,
    up_claim: Shift,
    down: Shift,
}

impl TableStrategy {
    pub fn new(
        name: impl Into<String>,
        ladder: FrequencyLadder,
        up_create: Shift,
        up_claim: Shift,
        down: Shift,
    ) -> Self {
        Self {
            name: name.into(),
            ladder,
            up_create,
            up_claim,
            down,
        }
    }

    pub fn shifts(&self) -> (Shift, Shift, Shift) {
        (self.up_create, self.up_claim, self.down)
    }
}

impl ScalingStrategy for TableStrategy {
    fn name(&self) -> &str {
        &self.name
    }

    fn ladder(&self) -> &FrequencyLadder {
        &self.ladder
    }

    fn scale(&self, op: Operator, level: FrequencyLevel) -> Scaled {
        let shift = match op {
            Operator::UpCreate => self.up_create,
            Operator::UpClaim => self.up_claim,
            Operator::Down => self.down,
        };
        shift.apply(&self.ladder, level)
    }
}

/// Child up and parent down at creation; parent up at claim.
pub fn strategy_both(ladder: FrequencyLadder) -> TableStrategy {
    TableStrategy::new(
        "both",
        ladder,
        Shift::Successor,
        Shift::Successor,
        Shift::Predecessor,
    )
}

/// Only the parent moves: down at creation, up at claim.
pub fn strategy_parent_only(ladder: FrequencyLadder) -> TableStrategy {
    TableStrategy::new(
        "parent-only",
        ladder,
        Shift::Stay,
        Shift::Successor,
        Shift::Predecessor,
    )
}

/// Only the new future thread is sped up; the parent keeps its pace.
pub fn strategy_child_only(ladder: FrequencyLadder) -> TableStrategy {
    TableStrategy::new(
        "child-only",
        ladder,
        Shift::Successor,
        Shift::Stay,
        Shift::Stay,
    )
}

/// Baseline: every thread stays at the initial frequency.
pub fn strategy_none(ladder: FrequencyLadder) -> TableStrategy {
    TableStrategy::new("none", ladder, Shift::Stay, Shift::Stay, Shift::Stay)
}

type StrategyFactory = Arc<dyn Fn(FrequencyLadder) -> Box<dyn ScalingStrategy> + Send + Sync>;

/// Strategies by name.
#[derive(Clone)]
pub struct StrategyRegistry {
    factories: BTreeMap<String, StrategyFactory>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register("both", |l| Box::new(strategy_both(l)));
        registry.register("parent-only", |l| Box::new(strategy_parent_only(l)));
        registry.register("child-only", |l| Box::new(strategy_child_only(l)));
        registry.register("none", |l| Box::new(strategy_none(l)));
        registry
    }

    pub fn register<F>(&mut self, name: impl Into<String>, factory: F)
    where
        F: Fn(FrequencyLadder) -> Box<dyn ScalingStrategy> + Send + Sync + 'static,
    {
        self.factories.insert(name.into(), Arc::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn build(
        &self,
        name: &str,
        ladder: FrequencyLadder,
    ) -> Result<Box<dyn ScalingStrategy>, ScalingError> {
        self.factories
            .get(name)
            .map(|factory| factory(ladder))
            .ok_or_else(|| ScalingError::UnknownStrategy(name.to_owned()))
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> FrequencyLadder {
        FrequencyLadder::uniform(4).unwrap()
    }

    fn lv(l: &FrequencyLadder, k: usize) -> FrequencyLevel {
        l.level(k).unwrap()
    }

    #[test]
    fn ladder_validation() {
        assert_eq!(FrequencyLadder::new(vec![]), Err(ScalingError::EmptyLadder));
        assert_eq!(
            FrequencyLadder::new(vec![1.0, 1.0]),
            Err(ScalingError::NotIncreasing(2))
        );
        assert!(matches!(
            FrequencyLadder::new(vec![0.0, 1.0]),
            Err(ScalingError::BadFrequency(_))
        ));
        assert!(FrequencyLadder::new(vec![f64::NAN]).is_err());
        assert!(four().level(0).is_err());
        assert!(four().level(5).is_err());
        assert_eq!(
            FrequencyLadder::default()
                .level(DEFAULT_INIT_LEVEL)
                .unwrap()
                .hz,
            1.5
        );
    }

    #[test]
    fn both_table() {
        let l = four();
        let s = strategy_both(l.clone());
        assert_eq!(s.up_create(lv(&l, 2)), lv(&l, 3));
        assert_eq!(s.up_create(lv(&l, 4)), lv(&l, 4));
        assert_eq!(s.down(lv(&l, 1)), lv(&l, 1));
        assert!(s.scale(Operator::UpClaim, lv(&l, 4)).clamped);
        assert!(s.scale(Operator::Down, lv(&l, 1)).clamped);
        assert!(!s.scale(Operator::Down, lv(&l, 2)).clamped);
    }

    #[test]
    fn parent_only_table() {
        let l = four();
        let s = strategy_parent_only(l.clone());
        assert_eq!(s.up_create(lv(&l, 2)), lv(&l, 2));
        assert_eq!(s.up_claim(lv(&l, 3)), lv(&l, 4));
        assert_eq!(s.down(lv(&l, 2)), lv(&l, 1));
        assert!(!s.scale(Operator::UpCreate, lv(&l, 4)).clamped);
    }

    #[test]
    fn none_table() {
        let l = four();
        let s = strategy_none(l.clone());
        assert_eq!(s.up_create(lv(&l, 2)), lv(&l, 2));
        assert_eq!(s.up_claim(lv(&l, 1)), lv(&l, 1));
        assert_eq!(s.down(lv(&l, 4)), lv(&l, 4));
    }

    #[test]
    fn single_level_ladder_is_identity() {
        let l = FrequencyLadder::uniform(1).unwrap();
        for s in [strategy_both(l.clone()), strategy_parent_only(l.clone())] {
            let only = l.lowest();
            assert_eq!(s.up_create(only), only);
            assert_eq!(s.up_claim(only), only);
            assert_eq!(s.down(only), only);
        }
    }

    #[test]
    fn registry_builds_by_name() {
        let reg = StrategyRegistry::with_builtins();
        assert_eq!(
            reg.names().collect::<Vec<_>>(),
            ["both", "child-only", "none", "parent-only"]
        );
        let s = reg.build("parent-only", four()).unwrap();
        assert_eq!(s.name(), "parent-only");
        assert_eq!(
            reg.build("turbo", four()).unwrap_err(),
            ScalingError::UnknownStrategy("turbo".into())
        );
    }

    #[test]
    fn registry_accepts_custom_strategies() {
        let mut reg = StrategyRegistry::with_builtins();
        reg.register("sprint", |l| {
            Box::new(TableStrategy::new(
                "sprint",
                l,
                Shift::Successor,
                Shift::Stay,
                Shift::Stay,
            ))
        });
        let s = reg.build("sprint", four()).unwrap();
        assert_eq!(s.up_create(four().level(1).unwrap()).index, 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn builtins(l: &FrequencyLadder) -> Vec<TableStrategy> {
            vec![
                strategy_both(l.clone()),
                strategy_parent_only(l.clone()),
                strategy_child_only(l.clone()),
                strategy_none(l.clone()),
            ]
        }

        proptest! {
            #[test]
            fn operators_stay_in_ladder_and_keep_direction(n in 1usize..12, k in 1usize..12) {
                let l = FrequencyLadder::uniform(n).unwrap();
                let level = l.level(k.min(n)).unwrap();
                for s in builtins(&l) {
                    for op in [Operator::UpCreate, Operator::UpClaim, Operator::Down] {
                        let out = s.scale(op, level).level;
                        prop_assert!(l.contains(out));
                        match op {
                            Operator::Down => prop_assert!(out <= level),
                            _ => prop_assert!(out >= level),
                        }
                    }
                }
            }

            #[test]
            fn both_up_undoes_down_away_from_bottom(n in 2usize..12, k in 2usize..12) {
                let l = FrequencyLadder::uniform(n).unwrap();
                let level = l.level(k.min(n)).unwrap();
                let s = strategy_both(l);
                prop_assert_eq!(s.up_create(s.down(level)), level);
                prop_assert_eq!(s.up_claim(s.down(level)), level);
            }

            #[test]
            fn child_never_slower_than_parent_at_creation(n in 1usize..12, k in 1usize..12) {
                let l = FrequencyLadder::uniform(n).unwrap();
                let level = l.level(k.min(n)).unwrap();
                for s in [strategy_both(l.clone()), strategy_parent_only(l.clone())] {
                    let child = s.up_create(level);
                    let parent = s.down(level);
                    prop_assert!(child >= parent);
                    if child != level || parent != level {
                        prop_assert!(child > parent);
                    }
                }
            }
        }
    }
}
