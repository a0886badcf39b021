//! Timing and power model.
//!
//! A rule costs a fixed number of cycles, so it takes `cycles / f` time at
//! frequency `f`. Power is `kappa * f^alpha`, which makes the energy of one
//! step `kappa * f^(alpha - 1) * cycles`.

use serde::Serialize;

use crate::engine::Rule;
use crate::scaling::FrequencyLevel;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WaitPolicy {
    Spin,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SpinPower {
    /// Full power at the waiting thread's current frequency.
    AtCurrentFrequency,
    /// A constant idle power.
    FixedIdle(f64),
}

/// Cost of one park/unpark pair under [`WaitPolicy::Block`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockPenalty {
    pub time: f64,
    pub energy: f64,
}

impl Default for BlockPenalty {
    fn default() -> Self {
        Self {
            time: 0.1,
            energy: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostModel {
    pub cycles_create: f64,
    pub cycles_add: f64,
    pub cycles_claim: f64,
    pub kappa: f64,
    pub alpha: f64,
    /// Time charged whenever an operator actually changes a thread's level.
    pub tau: f64,
    /// Also charge `kappa * f_new^alpha * tau` energy for each transition.
    pub transition_energy: bool,
    pub wait_policy: WaitPolicy,
    pub spin_power: SpinPower,
    pub block_penalty: BlockPenalty,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            cycles_create: 1.0,
            cycles_add: 1.0,
            cycles_claim: 1.0,
            kappa: 1.0,
            alpha: 3.0,
            tau: 0.0,
            transition_energy: false,
            wait_policy: WaitPolicy::Spin,
            spin_power: SpinPower::AtCurrentFrequency,
            block_penalty: BlockPenalty::default(),
        }
    }
}

impl CostModel {
    pub fn cycles(&self, rule: Rule) -> f64 {
        match rule {
            Rule::Create => self.cycles_create,
            Rule::Add => self.cycles_add,
            Rule::Claim => self.cycles_claim,
        }
    }

    pub fn power(&self, level: FrequencyLevel) -> f64 {
        self.kappa * level.hz.powf(self.alpha)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let finite_non_negative = [
            ("cycles create", self.cycles_create),
            ("cycles add", self.cycles_add),
            ("cycles claim", self.cycles_claim),
            ("tau", self.tau),
            ("block penalty time", self.block_penalty.time),
            ("block penalty energy", self.block_penalty.energy),
        ];
        for (name, value) in finite_non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SimError::Model(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(SimError::Model(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(SimError::Model(format!(
                "alpha must be at least 1, got {}",
                self.alpha
            )));
        }
        if let SpinPower::FixedIdle(p) = self.spin_power {
            if !(p.is_finite() && p >= 0.0) {
                return Err(SimError::Model(format!(
                    "idle power must be non-negative, got {p}"
                )));
            }
        }
        Ok(())
    }
}

pub fn step_duration(rule: Rule, level: FrequencyLevel, model: &CostModel) -> f64 {
    model.cycles(rule) / level.hz
}

pub fn step_energy(rule: Rule, level: FrequencyLevel, model: &CostModel) -> f64 {
    model.power(level) * step_duration(rule, level, model)
}
