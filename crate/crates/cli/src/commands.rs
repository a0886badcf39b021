use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use serde::Serialize;

use greenfut::engine::explore_all;
use greenfut::{parse, simulate, EngineError, Execution, Expr, SourceProgram, StrategyRegistry};

use crate::args::{Cli, Command, SharedArgs};
use crate::report::{
    CompareRow, CompareSummary, ExploreSummary, SemanticsSummary, SimulationSummary,
};
use crate::settings::{Format, Mode, RunConfig, SchedulerKind, Settings};
use crate::trace::{self, TraceRecord};
use crate::CliError;

/// Runs one parsed command line, writing the report to `out`.
///
/// A report is still written before a divergence or several-outcomes error.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let registry = StrategyRegistry::with_builtins();
    match cli.command {
        Command::Run {
            file,
            strategy,
            mode,
            scheduler,
            shared,
        } => {
            let mut settings = base_settings(&shared)?;
            settings.overlay("strategy", &strategy)?;
            settings.overlay("mode", &mode)?;
            settings.overlay("scheduler", &scheduler)?;
            let config = settings.resolve(file, &registry)?;
            cmd_run(&config, &registry, out)
        }
        Command::Compare {
            file,
            strategies,
            shared,
        } => {
            let mut settings = base_settings(&shared)?;
            settings.overlay("strategies", &strategies)?;
            let config = settings.resolve(file, &registry)?;
            cmd_compare(&config, &registry, out)
        }
        Command::Explore {
            file,
            strategy,
            state_limit,
            shared,
        } => {
            let mut settings = base_settings(&shared)?;
            settings.overlay("strategy", &strategy)?;
            settings.overlay("state_limit", &state_limit)?;
            let config = settings.resolve(file, &registry)?;
            cmd_explore(&config, &registry, out)
        }
    }
}

fn base_settings(shared: &SharedArgs) -> Result<Settings, CliError> {
    let mut settings = match &shared.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    settings.overlay_flags(shared)?;
    Ok(settings)
}

pub fn load_program(path: &Path) -> Result<Expr, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    let src = SourceProgram::named(path.display().to_string(), text);
    parse(&src).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: Format,
    summary: &T,
    table: impl FnOnce(&T) -> String,
) -> Result<(), CliError> {
    let text = match format {
        Format::Table => table(summary),
        Format::Json => {
            let mut json = serde_json::to_string_pretty(summary).expect("reports serialize");
            json.push('\n');
            json
        }
    };
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Write {
            what: "report".into(),
            source,
        })
}

fn write_trace(path: &PathBuf, records: &[TraceRecord]) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        what: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(wrap)?;
    trace::write_jsonl(records, BufWriter::new(file)).map_err(wrap)
}

fn reject_trace(config: &RunConfig, command: &str) -> Result<(), CliError> {
    match config.trace {
        Some(_) => Err(CliError::Config(format!(
            "--trace is not supported by {command}"
        ))),
        None => Ok(()),
    }
}

fn cmd_run(
    config: &RunConfig,
    registry: &StrategyRegistry,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let expr = load_program(&config.program)?;
    let strategy = registry
        .build(&config.strategy, config.ladder.clone())
        .expect("strategy was validated");
    let init = config
        .ladder
        .level(config.init)
        .expect("init was validated");
    let program = config.program.display().to_string();

    match config.mode {
        Mode::Simulate => {
            let report = simulate(&expr, init, strategy.as_ref(), &config.model)?;
            if let Some(path) = &config.trace {
                write_trace(path, &trace::from_simulation(&report))?;
            }
            let summary = SimulationSummary::new(program, &report);
            emit(out, config.format, &summary, SimulationSummary::table)
        }
        Mode::Semantics => {
            let mut exec = Execution::new(&expr, init, strategy.as_ref(), config.policy())?;
            let mut records = Vec::new();
            loop {
                let before = exec.configuration().clone();
                match exec.advance()? {
                    Some(event) => records.push(trace::from_step(records.len(), &before, event)),
                    None => break,
                }
            }
            let result = exec.finish()?;
            if let Some(path) = &config.trace {
                write_trace(path, &records)?;
            }
            let scheduler = match config.scheduler {
                SchedulerKind::Newest => "newest".to_owned(),
                SchedulerKind::RoundRobin => "round-robin".to_owned(),
                SchedulerKind::Random => format!("random (seed {})", config.seed),
            };
            let summary =
                SemanticsSummary::new(program, config.strategy.clone(), scheduler, &result);
            emit(out, config.format, &summary, SemanticsSummary::table)
        }
    }
}

fn cmd_compare(
    config: &RunConfig,
    registry: &StrategyRegistry,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    reject_trace(config, "compare")?;
    if config.strategies.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two --strategies".into(),
        ));
    }
    let expr = load_program(&config.program)?;
    let init = config
        .ladder
        .level(config.init)
        .expect("init was validated");

    let results: Vec<Result<CompareRow, CliError>> = thread::scope(|scope| {
        let handles: Vec<_> = config
            .strategies
            .iter()
            .map(|name| {
                let strategy = registry
                    .build(name, config.ladder.clone())
                    .expect("strategy was validated");
                let expr = &expr;
                let model = &config.model;
                scope.spawn(move || {
                    simulate(expr, init, strategy.as_ref(), model)
                        .map(|r| CompareRow::new(&r))
                        .map_err(CliError::from)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let summary = CompareSummary {
        command: "compare",
        program: config.program.display().to_string(),
        rows,
    };
    emit(out, config.format, &summary, CompareSummary::table)?;

    let first = summary.rows[0].final_value;
    if summary.rows.iter().any(|r| r.final_value != first) {
        let values: Vec<_> = summary
            .rows
            .iter()
            .map(|r| format!("{}={}", r.strategy, r.final_value))
            .collect();
        return Err(CliError::Divergence(values.join(", ")));
    }
    Ok(())
}

fn cmd_explore(
    config: &RunConfig,
    registry: &StrategyRegistry,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    reject_trace(config, "explore")?;
    let expr = load_program(&config.program)?;
    let strategy = registry
        .build(&config.strategy, config.ladder.clone())
        .expect("strategy was validated");
    let init = config
        .ladder
        .level(config.init)
        .expect("init was validated");
    let exploration =
        explore_all(&expr, init, strategy.as_ref(), config.state_limit).map_err(|e| match e {
            EngineError::StateLimit(n) => CliError::StateLimit(n),
            other => CliError::Engine(other),
        })?;
    let summary = ExploreSummary::new(
        config.program.display().to_string(),
        config.strategy.clone(),
        &exploration,
    );
    emit(out, config.format, &summary, ExploreSummary::table)?;
    match summary.outcomes.len() {
        1 => Ok(()),
        n => Err(CliError::MultipleOutcomes(n)),
    }
}
