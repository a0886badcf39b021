//! Acceptance gate. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use greenfut::engine::{explore_all, Execution};
use greenfut::sim::{CostModel, WaitCase};
use greenfut::{
    eval_sequential, gen_random_program, parse_str, simulate, strategy_both, strategy_child_only,
    strategy_none, strategy_parent_only, Closure, Expr, FrequencyLadder, FutureId, ReductionEvent,
    Rule, ScalingStrategy, SchedulerPolicy, TableStrategy,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::nonminimal_bool, clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fv(n: u64) -> Expr {
    Expr::Ref(FutureId(n))
}

/// `1 + 1 + ... + 1` with exactly `adds` additions.
fn chain(adds: usize) -> Expr {
    (0..adds).fold(Expr::Int(1), |acc, _| Expr::add(acc, Expr::Int(1)))
}

/// Parent does `k` additions between creating the future and claiming it;
/// the future does `m`.
fn fork_family(k: usize, m: usize) -> Expr {
    Expr::add(Expr::future(chain(m)), chain(k))
}

fn rel_close(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol * expected.abs()
}

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let took = started.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

// 1 ------------------------------------------------------------------------

fn golden_trace() -> Outcome {
    let started = Instant::now();
    let ladder = FrequencyLadder::uniform(4).unwrap();
    let lv = |k| ladder.level(k).unwrap();
    let strategy = strategy_both(ladder.clone());
    let expr = parse_str("2 + future (future (3+4))").unwrap();
    let init = lv(2);

    let c = |id: u64, k: usize, e: Expr| Closure {
        freq: lv(k),
        expr: e,
        realizes: FutureId(id),
    };
    let p = |s: &str| parse_str(s).unwrap();
    // The displayed reduction with fq_init = fq_2, evaluated concretely.
    let expected: Vec<Vec<Closure>> = vec![
        vec![
            c(1, 3, p("future (3+4)")),
            c(0, 1, Expr::add(Expr::Int(2), fv(1))),
        ],
        vec![
            c(2, 4, p("3+4")),
            c(1, 2, fv(2)),
            c(0, 1, Expr::add(Expr::Int(2), fv(1))),
        ],
        vec![
            c(2, 4, Expr::Int(7)),
            c(1, 2, fv(2)),
            c(0, 1, Expr::add(Expr::Int(2), fv(1))),
        ],
        vec![
            c(1, 3, Expr::Int(7)),
            c(0, 1, Expr::add(Expr::Int(2), fv(1))),
        ],
        vec![c(0, 2, p("2+7"))],
        vec![c(0, 2, Expr::Int(9))],
    ];
    let rules = [
        Rule::Create,
        Rule::Create,
        Rule::Add,
        Rule::Claim,
        Rule::Claim,
        Rule::Add,
    ];
    let actors = [0, 1, 2, 1, 0, 0];

    let mut exec = Execution::new(&expr, init, &strategy, SchedulerPolicy::PaperOrder).unwrap();
    for (i, want) in expected.iter().enumerate() {
        let event = exec.advance().unwrap().cloned();
        let event = event.ok_or_else(|| format!("run ended after {i} steps"))?;
        ensure!(
            event.rule() == rules[i],
            "step {}: rule {} != {}",
            i + 1,
            event.rule(),
            rules[i]
        );
        ensure!(
            event.thread() == FutureId(actors[i]),
            "step {}: actor {}",
            i + 1,
            event.thread()
        );
        ensure!(
            exec.configuration().closures() == want.as_slice(),
            "step {}: configuration {:?}",
            i + 1,
            exec.configuration().closures()
        );
    }
    ensure!(exec.is_finished(), "run did not end after six steps");
    let result = exec.finish().unwrap();
    ensure!(
        result.final_value == 9,
        "final value {}",
        result.final_value
    );
    ensure!(
        result.final_freq == init,
        "final level {}",
        result.final_freq
    );
    let took = within(Duration::from_secs(1), started)?;
    Ok(format!("6 steps, value 9, root back at fq_2 ({took:?})"))
}

// 2 and 9 ------------------------------------------------------------------

fn strategies(ladder: &FrequencyLadder) -> Vec<TableStrategy> {
    vec![
        strategy_both(ladder.clone()),
        strategy_parent_only(ladder.clone()),
        strategy_none(ladder.clone()),
    ]
}

fn policies(seed: u64) -> [SchedulerPolicy; 3] {
    [
        SchedulerPolicy::PaperOrder,
        SchedulerPolicy::RoundRobin,
        SchedulerPolicy::SeededRandom(seed),
    ]
}

struct SuiteStats {
    runs: usize,
    mismatches: Vec<String>,
    violations: Vec<String>,
    steps_checked: usize,
}

fn determinacy_runs() -> SuiteStats {
    let ladder = FrequencyLadder::uniform(4).unwrap();
    let init = ladder.level(2).unwrap();
    let mut stats = SuiteStats {
        runs: 0,
        mismatches: vec![],
        violations: vec![],
        steps_checked: 0,
    };
    for seed in 0..200u64 {
        let expr = gen_random_program(seed, 6, 3);
        let oracle = eval_sequential(&expr);
        let bound = 3 * expr.node_count();
        for strategy in strategies(&ladder) {
            for policy in policies(seed) {
                stats.runs += 1;
                let mut exec = Execution::new(&expr, init, &strategy, policy).unwrap();
                loop {
                    let event = match exec.advance() {
                        Ok(Some(e)) => e.clone(),
                        Ok(None) => break,
                        Err(err) => {
                            stats.violations.push(format!("seed {seed}: {err}"));
                            break;
                        }
                    };
                    stats.steps_checked += 1;
                    if let Err(err) = exec.configuration().validate(Some(&ladder)) {
                        stats
                            .violations
                            .push(format!("seed {seed} {}: {err}", strategy.name()));
                    }
                    if !event.levels().iter().all(|l| ladder.contains(*l)) {
                        stats
                            .violations
                            .push(format!("seed {seed}: level outside ladder in {event:?}"));
                    }
                }
                match exec.finish() {
                    Ok(result) => {
                        if result.final_value != oracle {
                            stats.mismatches.push(format!(
                                "seed {seed} {} {policy:?}: {} != {oracle}",
                                strategy.name(),
                                result.final_value
                            ));
                        }
                        if result.step_count > bound {
                            stats.violations.push(format!(
                                "seed {seed}: {} steps > 3 x {} nodes",
                                result.step_count,
                                expr.node_count()
                            ));
                        }
                    }
                    Err(err) => stats.mismatches.push(format!("seed {seed}: {err}")),
                }
            }
        }
    }
    stats
}

fn determinacy(stats: &SuiteStats, started: Instant) -> Outcome {
    ensure!(stats.runs == 1800, "expected 1800 runs, did {}", stats.runs);
    ensure!(
        stats.mismatches.is_empty(),
        "{} mismatches, first: {}",
        stats.mismatches.len(),
        stats.mismatches[0]
    );

    let ladder = FrequencyLadder::uniform(4).unwrap();
    let init = ladder.level(2).unwrap();
    let mut explored = 0;
    let mut with_futures = 0;
    let mut seed = 10_000u64;
    while explored < 50 {
        seed += 1;
        let expr = gen_random_program(seed, 5, 3);
        if expr.node_count() > 12 {
            continue;
        }
        explored += 1;
        with_futures += usize::from(expr.future_nesting() > 0);
        let oracle = eval_sequential(&expr);
        for strategy in strategies(&ladder) {
            let x = explore_all(&expr, init, &strategy, 1_000_000)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            ensure!(
                x.outcomes.len() == 1,
                "seed {seed} {}: {} outcomes",
                strategy.name(),
                x.outcomes.len()
            );
            let only = x.outcomes.first().unwrap();
            ensure!(
                only.value == oracle,
                "seed {seed}: explored value {} != {oracle}",
                only.value
            );
        }
    }
    ensure!(with_futures > 0, "no explored program contained a future");
    let took = within(Duration::from_secs(60), started)?;
    Ok(format!(
        "{} runs agree with serial elision; 50 programs ({with_futures} with futures) explored to a single outcome ({took:?})",
        stats.runs
    ))
}

fn structural(stats: &SuiteStats) -> Outcome {
    ensure!(
        stats.violations.is_empty(),
        "{} violations, first: {}",
        stats.violations.len(),
        stats.violations[0]
    );
    ensure!(stats.steps_checked > 0, "no steps checked");
    Ok(format!(
        "{} configurations checked after each step",
        stats.steps_checked
    ))
}

// 3 ------------------------------------------------------------------------

fn scaling_tables() -> Outcome {
    let mut entries = 0;
    let mut clamp_cases = 0;
    for n in [1usize, 2, 4, 8] {
        let ladder = FrequencyLadder::uniform(n).unwrap();
        let both = strategy_both(ladder.clone());
        let parent = strategy_parent_only(ladder.clone());
        for k in 1..=n {
            let level = ladder.level(k).unwrap();
            let succ = if k < n { k + 1 } else { n };
            let pred = if k >= 2 { k - 1 } else { 1 };
            // First table: ↑ = ⇑ = successor, ↓ = predecessor.
            let got = (
                both.up_create(level).index,
                both.up_claim(level).index,
                both.down(level).index,
            );
            ensure!(got == (succ, succ, pred), "both n={n} k={k}: {got:?}");
            // Second table: ↑ = identity, ⇑ = successor, ↓ = predecessor.
            let got = (
                parent.up_create(level).index,
                parent.up_claim(level).index,
                parent.down(level).index,
            );
            ensure!(got == (k, succ, pred), "parent-only n={n} k={k}: {got:?}");
            entries += 6;
        }
        let top = ladder.highest();
        let bottom = ladder.lowest();
        ensure!(
            both.up_create(top) == top && both.up_claim(top) == top,
            "both top clamp, n={n}"
        );
        ensure!(both.down(bottom) == bottom, "both bottom clamp, n={n}");
        ensure!(parent.up_claim(top) == top, "parent-only top clamp, n={n}");
        ensure!(
            parent.down(bottom) == bottom,
            "parent-only bottom clamp, n={n}"
        );
        clamp_cases += 4;
    }
    Ok(format!(
        "{entries} operator entries and {clamp_cases} clamp cases match"
    ))
}

// 4 and 5 ------------------------------------------------------------------

fn grid() -> impl Iterator<Item = (usize, usize)> {
    (1..=5).flat_map(|k| (k + 2..=k + 8).map(move |m| (k, m)))
}

fn claim_of(
    expr: &Expr,
    strategy: &dyn ScalingStrategy,
) -> (greenfut::ClaimRecord, greenfut::SimulationReport) {
    let init = strategy.ladder().level(2).unwrap();
    let report = simulate(expr, init, strategy, &CostModel::default()).unwrap();
    assert_eq!(report.claims.len(), 1);
    (report.claims[0].clone(), report)
}

fn case_one_spin_reduction() -> Outcome {
    let started = Instant::now();
    let ladder = FrequencyLadder::uniform(4).unwrap();
    let (both, none) = (strategy_both(ladder.clone()), strategy_none(ladder));
    let (mut compared, mut points) = (0, 0);
    for (k, m) in grid() {
        points += 1;
        let expr = fork_family(k, m);
        let (with, _) = claim_of(&expr, &both);
        let (without, _) = claim_of(&expr, &none);
        if with.case == WaitCase::CaseI && without.case == WaitCase::CaseI {
            compared += 1;
            ensure!(
                without.wait > with.wait,
                "k={k} m={m}: wait {} (both) >= {} (none)",
                with.wait,
                without.wait
            );
        }
    }
    ensure!(
        compared > 0,
        "no grid point is Case I under both strategies"
    );
    let took = within(Duration::from_secs(5), started)?;
    Ok(format!(
        "{compared}/{points} grid points Case I under both; all waits reduced ({took:?})"
    ))
}

fn case_two_no_wait() -> Outcome {
    let ladder = FrequencyLadder::uniform(4).unwrap();
    let init = ladder.level(2).unwrap();
    let mut checked = 0;
    for strategy in [
        strategy_both(ladder.clone()),
        strategy_parent_only(ladder.clone()),
        strategy_none(ladder.clone()),
        strategy_child_only(ladder.clone()),
    ] {
        // Parent reaches the claim after Create plus k Adds at ↓fq; the child
        // realizes after m Adds at ↑fq. With integer frequencies the Case II
        // condition m / f_child <= k / f_parent is exact in integers.
        let f_parent = strategy.down(init).hz as u64;
        let f_child = strategy.up_create(init).hz as u64;
        for (k, m) in grid() {
            let ready_first = m as u64 * f_parent <= k as u64 * f_child;
            let (claim, report) = claim_of(&fork_family(k, m), &strategy);
            if ready_first {
                checked += 1;
                ensure!(
                    claim.case == WaitCase::CaseII,
                    "{} k={k} m={m}: tagged {:?}",
                    strategy.name(),
                    claim.case
                );
                ensure!(
                    claim.wait == 0.0,
                    "{} k={k} m={m}: wait {}",
                    strategy.name(),
                    claim.wait
                );
                ensure!(
                    report.timelines.iter().all(|t| !t.has_wait()),
                    "{} k={k} m={m}: a wait segment exists",
                    strategy.name()
                );
            } else {
                ensure!(
                    claim.case == WaitCase::CaseI,
                    "{} k={k} m={m}: expected Case I",
                    strategy.name()
                );
            }
        }
    }
    ensure!(checked > 0, "no Case II grid points");
    Ok(format!("{checked} Case II grid points, none with a wait"))
}

// 6 ------------------------------------------------------------------------

fn closed_form_oracle() -> Outcome {
    let ladder = FrequencyLadder::uniform(4).unwrap();
    let expr = parse_str("1 + future (2+3)").unwrap();
    let tol = 1e-9;

    // Hand schedule, all rules 1 cycle, P = f^3.
    // none: Create@2 [0,.5]; child Add@2 [.5,1]; spin@2 [.5,1]; Claim@2; Add@2.
    let (t_none, e_none) = (2.0, 4.0 * (8.0 * 0.5) + 8.0 * 0.5);
    // both: Create@2 [0,.5]; child Add@3 [.5,5/6]; spin@1 [.5,5/6]; Claim@1; Add@2.
    let t_both = 0.5 + 1.0 / 3.0 + 1.0 + 0.5;
    let e_both = 8.0 * 0.5 + 27.0 / 3.0 + 1.0 / 3.0 + 1.0 + 8.0 * 0.5;

    let mut lines = Vec::new();
    for (strategy, t, e) in [
        (strategy_none(ladder.clone()), t_none, e_none),
        (strategy_both(ladder.clone()), t_both, e_both),
    ] {
        let r = simulate(
            &expr,
            ladder.level(2).unwrap(),
            &strategy,
            &CostModel::default(),
        )
        .unwrap();
        let name = strategy.name();
        ensure!(
            rel_close(r.makespan, t, tol),
            "{name}: T {} != {t}",
            r.makespan
        );
        ensure!(
            rel_close(r.total_energy, e, tol),
            "{name}: E {} != {e}",
            r.total_energy
        );
        ensure!(
            rel_close(r.edp, e * t, tol),
            "{name}: EDP {} != {}",
            r.edp,
            e * t
        );
        ensure!(
            rel_close(r.ed2p, e * t * t, tol),
            "{name}: ED2P {} != {}",
            r.ed2p,
            e * t * t
        );
        lines.push(format!(
            "{name}: T={:.4} E={:.4} EDP={:.4}",
            r.makespan, r.total_energy, r.edp
        ));
    }
    ensure!(
        rel_close(t_none, 2.0, tol) && rel_close(e_none, 20.0, tol),
        "oracle drift (none)"
    );
    ensure!(
        rel_close(e_both * t_both, 385.0 / 9.0, tol),
        "oracle drift (both)"
    );
    Ok(lines.join("; "))
}

// 7 ------------------------------------------------------------------------

fn model_identities() -> Outcome {
    let ladder = FrequencyLadder::uniform(4).unwrap();
    let init = ladder.level(2).unwrap();
    let linear = CostModel {
        alpha: 1.0,
        ..CostModel::default()
    };
    let wait_free = [
        "(future (1+1)) + (1+1+1+1+1+1)",
        "(future 5) + (1+2)",
        "1 + 2 + 3",
    ];
    for src in wait_free {
        let expr = parse_str(src).unwrap();
        let mut energies = Vec::new();
        for strategy in [
            strategy_both(ladder.clone()),
            strategy_parent_only(ladder.clone()),
            strategy_child_only(ladder.clone()),
            strategy_none(ladder.clone()),
        ] {
            let r = simulate(&expr, init, &strategy, &linear).unwrap();
            ensure!(
                r.case_counts().0 == 0,
                "`{src}` waits under {}",
                strategy.name()
            );
            energies.push((
                strategy.name().to_owned(),
                r.compute_energy(),
                r.total_energy,
            ));
        }
        let (_, base_compute, base_total) = energies[0].clone();
        for (name, compute, total) in &energies {
            ensure!(
                rel_close(*compute, base_compute, 1e-12),
                "`{src}` {name}: compute {compute} != {base_compute}"
            );
            ensure!(
                rel_close(*total, base_total, 1e-12),
                "`{src}` {name}: total {total} != {base_total}"
            );
        }
    }

    let expr = fork_family(4, 1);
    let strategy = strategy_parent_only(ladder.clone());
    let tau = 0.25;
    let base = simulate(&expr, init, &strategy, &CostModel::default()).unwrap();
    let slow = simulate(
        &expr,
        init,
        &strategy,
        &CostModel {
            tau,
            ..CostModel::default()
        },
    )
    .unwrap();
    ensure!(
        base.case_counts().0 == 0 && slow.case_counts().0 == 0,
        "τ program is not wait-free"
    );
    ensure!(slow.transition_count > 0, "no transitions happened");
    let shift = slow.makespan - base.makespan;
    ensure!(
        shift == slow.transition_count as f64 * tau,
        "makespan shift {shift} != {} x {tau}",
        slow.transition_count
    );
    Ok(format!(
        "α=1 energy equal across 4 strategies on {} programs; τ shift = {} x {tau}",
        wait_free.len(),
        slow.transition_count
    ))
}

// 8 ------------------------------------------------------------------------

fn return_to_original() -> Outcome {
    let ladder = FrequencyLadder::uniform(16).unwrap();
    let init = ladder.level(8).unwrap();
    let strategy = strategy_both(ladder.clone());
    let (mut clean, mut clamped) = (0, 0);
    for seed in 0..100u64 {
        let expr = gen_random_program(5_000 + seed, 10, 10);
        let r = greenfut::run(&expr, init, &strategy, SchedulerPolicy::PaperOrder).unwrap();
        let creates = r
            .events
            .iter()
            .filter(|e| matches!(e, ReductionEvent::Create { .. }))
            .count();
        let claims = r.rules().iter().filter(|r| **r == Rule::Claim).count();
        ensure!(
            creates == claims,
            "seed {seed}: {creates} creates vs {claims} claims"
        );
        if r.clamp_event_count > 0 {
            clamped += 1;
            continue;
        }
        clean += 1;
        ensure!(
            r.final_freq == init,
            "seed {seed}: root ends at {} not {init}",
            r.final_freq
        );
    }
    ensure!(clean > 0, "every run clamped");
    Ok(format!(
        "{clean} clamp-free runs return to fq_8; {clamped} clamped runs excluded"
    ))
}

fn main() -> ExitCode {
    panic::set_hook(Box::new(|_| {}));
    let guarded = |f: &dyn Fn() -> Outcome| -> Outcome {
        panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        })
    };

    let suite_started = Instant::now();
    let stats = determinacy_runs();

    let results: Vec<(&str, Outcome)> = vec![
        ("1 golden trace", guarded(&golden_trace)),
        (
            "2 determinacy",
            guarded(&|| determinacy(&stats, suite_started)),
        ),
        ("3 scaling tables", guarded(&scaling_tables)),
        ("4 case I spin reduction", guarded(&case_one_spin_reduction)),
        ("5 case II no wait", guarded(&case_two_no_wait)),
        ("6 closed-form simulation", guarded(&closed_form_oracle)),
        ("7 model identities", guarded(&model_identities)),
        (
            "8 return to original frequency",
            guarded(&return_to_original),
        ),
        ("9 structural invariants", guarded(&|| structural(&stats))),
    ];

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
