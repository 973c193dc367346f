use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use rrw_core::bounds::stuck_probability_p;
use rrw_core::graph::GraphSpec;
use rrw_core::harness::{run_ensemble, EnsembleConfig, EnsembleResult, HarnessError};
use rrw_core::verify::{self, SuiteReport};
use rrw_core::walk::{run, Engine, RunOptions, WalkKind, WalkState};
use rrw_core::weight::{WeightAssignment, WeightFunction};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn from_suite(report: Result<SuiteReport, HarnessError>) -> Outcome {
    match report {
        Ok(r) if r.passed() => outcome(true, r.summary),
        Ok(r) => outcome(false, format!("{}; first violations {:?}", r.summary, &r.violations[..r.violations.len().min(3)])),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn ensemble(graph: &str, kind: WalkKind, weight: &str, replicas: u64, seed: u64) -> EnsembleResult {
    let config = EnsembleConfig {
        graph: graph.parse::<GraphSpec>().unwrap(),
        kind,
        weight: weight.parse().unwrap(),
        initial_weight: 1.0,
        replicas,
        horizon: 100_000,
        window: Some(10_000),
        engine: Engine::Sequential,
        seed,
    };
    run_ensemble(&config).unwrap()
}

fn attraction(cases: &[(&str, WalkKind, &str)], threshold: f64) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, &(graph, kind, weight)) in cases.iter().enumerate() {
        let r = ensemble(graph, kind, weight, 1000, 2024 + i as u64);
        let a = &r.attraction;
        passed &= a.estimate >= threshold && r.failed == 0;
        parts.push(format!(
            "{graph}: {}/{} = {:.4} (95% CI [{:.4}, {:.4}], failed {})",
            a.successes, a.trials, a.estimate, a.ci_low, a.ci_high, r.failed
        ));
    }
    outcome(passed, format!("threshold {threshold}; {}", parts.join("; ")))
}

fn escape() -> Outcome {
    let a = WeightAssignment::uniform(WeightFunction::power(3.0).unwrap(), 1.0).unwrap();
    let p = stuck_probability_p(2, &a).unwrap().p;
    let mut o = from_suite(verify::escape(10_000, 100_000, 8));
    o.passed &= (p - 0.4456).abs() < 1e-4;
    o
}

fn invariants() -> Outcome {
    let graphs = prop_oneof![
        Just("triangle"),
        Just("path:5"),
        Just("cycle:6"),
        Just("star:4"),
        Just("complete:4"),
        Just("lattice:2"),
        Just("tree:3"),
    ];
    let weights = prop_oneof![
        (1.0f64..4.0).prop_map(|r| format!("power:{r}")),
        (0.1f64..2.0).prop_map(|l| format!("exp:{l}")),
        Just("oscpow:1".to_string()),
        Just("powerlog:1.5:2".to_string()),
    ];
    let kinds = prop_oneof![Just(WalkKind::Edge), Just(WalkKind::Vertex)];
    let strategy = (kinds, graphs, weights, 0.5f64..3.0, any::<u64>(), 1u64..400);
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&strategy, |(kind, graph, weight, l0, seed, k)| {
        let g = Arc::new(graph.parse::<GraphSpec>().unwrap().build().unwrap());
        let a = Arc::new(WeightAssignment::uniform(weight.parse().unwrap(), l0).unwrap());
        let sides = g.finite().and_then(|fg| {
            let (left, _) = g.is_bipartite().ok()?.parts?;
            Some((0..fg.vertex_count()).map(|i| left.contains(fg.vertex(i))).collect::<Vec<bool>>())
        });
        let mut s = WalkState::new(kind, g.clone(), a.clone(), seed).unwrap();
        let mut prev = s.order_statistics();
        for step in 1..=k {
            s.step().unwrap();
            prop_assert_eq!(s.counts().iter().sum::<u64>(), step);
            let r = s.order_statistics();
            for i in 1..=prev.0.len() {
                prop_assert!(r.get(i) >= prev.get(i));
            }
            prev = r;
            if let (WalkKind::Vertex, Some(side)) = (kind, &sides) {
                let (mut x, mut y) = (0i64, 0i64);
                for (v, &c) in s.counts().iter().enumerate() {
                    if side[v] {
                        x += c as i64;
                    } else {
                        y += c as i64;
                    }
                }
                prop_assert!((x - y).abs() <= 2);
            }
        }
        let rerun = |seed| {
            let mut s = WalkState::new(kind, g.clone(), a.clone(), seed).unwrap();
            serde_json::to_string(&run(&mut s, &RunOptions::new(k), &mut []).unwrap()).unwrap()
        };
        prop_assert_eq!(rerun(seed), rerun(seed));
        Ok(())
    });
    match result {
        Ok(()) => outcome(true, "100 random configurations"),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn main() -> ExitCode {
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria: Vec<(&str, Option<Duration>, Box<dyn Fn() -> Outcome>)> = vec![
        ("exact dominance, edge joint law", minutes(5), Box::new(|| from_suite(verify::joint_bounds(WalkKind::Edge, 8)))),
        ("exact dominance, vertex joint law", minutes(5), Box::new(|| from_suite(verify::joint_bounds(WalkKind::Vertex, 8)))),
        ("order-statistic dominance", minutes(5), Box::new(|| from_suite(verify::orderstat_bounds(8)))),
        ("Q_m dynamic programme and c-bound", minutes(1), Box::new(|| from_suite(verify::qm()))),
        (
            "edge walk attraction",
            minutes(10),
            Box::new(|| attraction(&[("triangle", WalkKind::Edge, "power:2"), ("truncate:5:lattice:1", WalkKind::Edge, "power:2")], 0.99)),
        ),
        (
            "vertex walk two-vertex attraction",
            minutes(10),
            Box::new(|| attraction(&[("path:5", WalkKind::Vertex, "power:3"), ("cycle:4", WalkKind::Vertex, "power:3")], 0.99)),
        ),
        (
            "bipartite vertex walk, power-log weight",
            None,
            Box::new(|| attraction(&[("cycle:4", WalkKind::Vertex, "powerlog:1.5:2")], 0.95)),
        ),
        ("escape bound on the line", None, Box::new(escape)),
        ("sampler equivalence", None, Box::new(|| from_suite(verify::sampler(100_000, 99)))),
        ("g-function construction", minutes(1), Box::new(|| from_suite(verify::g_function()))),
        ("conservation and determinism", minutes(2), Box::new(invariants)),
    ];
    let mut failures = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > *limit {
                result.passed = false;
                result.detail.push_str(&format!("; exceeded time limit of {}s", limit.as_secs()));
            }
        }
        if !result.passed {
            failures += 1;
        }
        println!(
            "[{}] criterion {:>2}: {name} ({:.1}s): {}",
            if result.passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            result.detail
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
