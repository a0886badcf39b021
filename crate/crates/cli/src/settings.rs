//! Resolution of flags, config file and defaults into a [`RunConfig`].
//!
//! Both sources are first flattened into `key -> text` maps so they share one
//! parser. Flags override file keys, which override the defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use greenfut::scaling::DEFAULT_INIT_LEVEL;
use greenfut::sim::{BlockPenalty, SpinPower, WaitPolicy};
use greenfut::{CostModel, FrequencyLadder, SchedulerPolicy, StrategyRegistry};

use crate::args::SharedArgs;
use crate::CliError;

pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

const KEYS: &[&str] = &[
    "ladder",
    "init",
    "strategy",
    "strategies",
    "mode",
    "scheduler",
    "alpha",
    "kappa",
    "cycles_create",
    "cycles_add",
    "cycles_claim",
    "tau",
    "transition_energy",
    "wait",
    "spin_power",
    "block_penalty",
    "seed",
    "trace",
    "format",
    "state_limit",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Semantics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerKind {
    Newest,
    RoundRobin,
    Random,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub program: PathBuf,
    pub ladder: FrequencyLadder,
    pub init: usize,
    pub strategy: String,
    pub strategies: Vec<String>,
    pub mode: Mode,
    pub scheduler: SchedulerKind,
    pub model: CostModel,
    pub seed: u64,
    pub format: Format,
    pub trace: Option<PathBuf>,
    pub state_limit: usize,
}

impl RunConfig {
    pub fn policy(&self) -> SchedulerPolicy {
        match self.scheduler {
            SchedulerKind::Newest => SchedulerPolicy::PaperOrder,
            SchedulerKind::RoundRobin => SchedulerPolicy::RoundRobin,
            SchedulerKind::Random => SchedulerPolicy::SeededRandom(self.seed),
        }
    }
}

/// Raw settings before interpretation.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        if key == "cycles" {
            let value = value.into();
            return value
                .split([',', ' '])
                .filter(|s| !s.is_empty())
                .try_for_each(|pair| self.set_cycles(pair));
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown setting `{key}`")));
        }
        self.values.insert(key, value.into().trim().to_owned());
        Ok(())
    }

    fn set_cycles(&mut self, pair: &str) -> Result<(), CliError> {
        let (rule, n) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("cycles entry `{pair}` is not RULE=N")))?;
        match rule.trim() {
            "create" | "add" | "claim" => self.set(&format!("cycles_{}", rule.trim()), n),
            other => Err(CliError::Config(format!(
                "unknown rule `{other}` in cycles"
            ))),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut settings = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            settings.set(key, value)?;
        }
        Ok(settings)
    }

    pub fn overlay_flags(&mut self, flags: &SharedArgs) -> Result<(), CliError> {
        let texts = [
            ("ladder", &flags.ladder),
            ("init", &flags.init),
            ("alpha", &flags.alpha),
            ("kappa", &flags.kappa),
            ("tau", &flags.tau),
            ("wait", &flags.wait),
            ("spin_power", &flags.spin_power),
            ("block_penalty", &flags.block_penalty),
            ("seed", &flags.seed),
            ("format", &flags.format),
        ];
        for (key, value) in texts {
            if let Some(v) = value {
                self.set(key, v.as_str())?;
            }
        }
        for pair in &flags.cycles {
            self.set("cycles", pair.as_str())?;
        }
        if flags.transition_energy {
            self.set("transition_energy", "true")?;
        }
        if let Some(path) = &flags.trace {
            self.set("trace", path.display().to_string())?;
        }
        Ok(())
    }

    pub fn overlay(&mut self, key: &str, value: &Option<String>) -> Result<(), CliError> {
        match value {
            Some(v) => self.set(key, v.as_str()),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn number<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(text) => text
                .parse()
                .map_err(|_| CliError::Config(format!("{key}: cannot parse `{text}`"))),
        }
    }

    pub fn resolve(
        &self,
        program: PathBuf,
        registry: &StrategyRegistry,
    ) -> Result<RunConfig, CliError> {
        let ladder = match self.get("ladder") {
            None => FrequencyLadder::default(),
            Some(text) => {
                let values = text
                    .split(',')
                    .map(|f| f.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Config(format!("ladder: cannot parse `{text}`")))?;
                FrequencyLadder::new(values)
                    .map_err(|e| CliError::Config(format!("ladder: {e}")))?
            }
        };
        let init = self.number("init", DEFAULT_INIT_LEVEL)?;
        ladder
            .level(init)
            .map_err(|e| CliError::Config(format!("init: {e}")))?;

        let known = |name: &str| -> Result<String, CliError> {
            if registry.contains(name) {
                Ok(name.to_owned())
            } else {
                let names: Vec<_> = registry.names().collect();
                Err(CliError::Config(format!(
                    "unknown strategy `{name}` (known: {})",
                    names.join(", ")
                )))
            }
        };
        let strategy = known(self.get("strategy").unwrap_or("both"))?;
        let strategies = match self.get("strategies") {
            None => Vec::new(),
            Some(list) => list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(known)
                .collect::<Result<_, _>>()?,
        };

        let mode = match self.get("mode").unwrap_or("simulate") {
            "simulate" => Mode::Simulate,
            "semantics" => Mode::Semantics,
            other => {
                return Err(CliError::Config(format!(
                    "mode: expected simulate or semantics, got `{other}`"
                )))
            }
        };
        let scheduler = match self.get("scheduler").unwrap_or("newest") {
            "newest" => SchedulerKind::Newest,
            "round-robin" => SchedulerKind::RoundRobin,
            "random" => SchedulerKind::Random,
            other => {
                return Err(CliError::Config(format!(
                    "scheduler: expected newest, round-robin or random, got `{other}`"
                )))
            }
        };
        let format = match self.get("format").unwrap_or("table") {
            "table" => Format::Table,
            "json" => Format::Json,
            other => {
                return Err(CliError::Config(format!(
                    "format: expected table or json, got `{other}`"
                )))
            }
        };

        let defaults = CostModel::default();
        let wait_policy = match self.get("wait").unwrap_or("spin") {
            "spin" => WaitPolicy::Spin,
            "block" => WaitPolicy::Block,
            other => {
                return Err(CliError::Config(format!(
                    "wait: expected spin or block, got `{other}`"
                )))
            }
        };
        let spin_power = match self.get("spin_power").unwrap_or("current") {
            "current" => SpinPower::AtCurrentFrequency,
            text => match text.strip_prefix("idle:").map(str::parse::<f64>) {
                Some(Ok(p)) => SpinPower::FixedIdle(p),
                _ => {
                    return Err(CliError::Config(format!(
                        "spin-power: expected current or idle:P, got `{text}`"
                    )))
                }
            },
        };
        let block_penalty = match self.get("block_penalty") {
            None => BlockPenalty::default(),
            Some(text) => {
                let parts: Vec<_> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
                match parts.as_slice() {
                    [Ok(time), Ok(energy)] => BlockPenalty {
                        time: *time,
                        energy: *energy,
                    },
                    _ => {
                        return Err(CliError::Config(format!(
                            "block-penalty: expected `t,e`, got `{text}`"
                        )))
                    }
                }
            }
        };
        let model = CostModel {
            cycles_create: self.number("cycles_create", defaults.cycles_create)?,
            cycles_add: self.number("cycles_add", defaults.cycles_add)?,
            cycles_claim: self.number("cycles_claim", defaults.cycles_claim)?,
            kappa: self.number("kappa", defaults.kappa)?,
            alpha: self.number("alpha", defaults.alpha)?,
            tau: self.number("tau", defaults.tau)?,
            transition_energy: self.number("transition_energy", defaults.transition_energy)?,
            wait_policy,
            spin_power,
            block_penalty,
        };
        model
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        Ok(RunConfig {
            program,
            ladder,
            init,
            strategy,
            strategies,
            mode,
            scheduler,
            model,
            seed: self.number("seed", 0)?,
            format,
            trace: self.get("trace").map(PathBuf::from),
            state_limit: self.number("state_limit", DEFAULT_STATE_LIMIT)?,
        })
    }
}
