//! `rrw`: simulate, verify and sweep reinforced random walks.
//!
//! Exit codes: 0 on success, 1 when a verification finds a violation or a
//! sweep cell fails, 2 for invalid input.

mod artifacts;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use rrw_core::bounds::bound_report;
use rrw_core::harness::{attraction_time_histogram, run_ensemble, with_workers, EnsembleResult};
use rrw_core::verify::{run_suite, Suite, SuiteOptions};
use rrw_core::walk::WalkKind;
use rrw_core::weight::{WeightAssignment, WeightFunction};

use artifacts::{write_simulation, write_sweep, Format, SweepCell};
use config::{ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "rrw", version, about = "Strongly reinforced random walks: simulation and verification")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Run configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Number of worker threads.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    /// Restricts artifacts (or printed reports) to one format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs one ensemble and writes its artifacts.
    Simulate,
    /// Runs a named verification grid.
    Verify {
        #[arg(value_parser = clap::value_parser!(Suite))]
        suite: Suite,
        /// Replicas for the Monte Carlo suites.
        #[arg(long)]
        replicas: Option<u64>,
        /// Horizon of the escape suite.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Runs one ensemble per cell of the configuration's `[grid]`.
    Sweep,
    /// Prints the summability class of a weight function.
    ClassifyWeight {
        /// Weight spec such as `power:2`; defaults to the configuration's.
        weight: Option<String>,
        #[arg(long)]
        initial_weight: Option<f64>,
    },
    /// Prints every applicable analytic bound for a configuration.
    Bounds {
        #[arg(long)]
        graph: Option<String>,
        #[arg(long)]
        kind: Option<WalkKind>,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        initial_weight: Option<f64>,
        /// Number of steps; defaults to the configuration's horizon.
        #[arg(long)]
        steps: Option<u64>,
    },
}

enum Failure {
    Usage(String),
    Violation(String),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(format!("invalid configuration: {e}"))
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = Result<(), Failure>;

fn load_config(global: &GlobalArgs) -> Result<RunConfig, Failure> {
    let path = global
        .config
        .as_ref()
        .ok_or_else(|| Failure::Usage("this command needs --config PATH".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(out) = &global.out {
        config.output = out.clone();
    }
    Ok(config)
}

fn workers(global: &GlobalArgs) -> Option<usize> {
    global.workers.map(|n| n as usize)
}

fn print_json<T: serde::Serialize>(value: &T) -> Outcome {
    println!("{}", serde_json::to_string_pretty(value).map_err(anyhow::Error::from)?);
    Ok(())
}

fn print_ensemble(config: &RunConfig, r: &EnsembleResult) {
    let a = &r.attraction;
    println!("{:<22} {}", "experiment", config.name);
    println!("{:<22} {} {} {} l0={}", "walk", config.kind, config.graph, config.weight, config.initial_weight);
    println!(
        "{:<22} K={} N={} W={} engine={} seed={}",
        "settings", config.horizon, config.replicas, r.window, config.engine, config.seed
    );
    println!(
        "{:<22} {}/{} = {:.4}  ({:.0}% CI [{:.4}, {:.4}])",
        "attraction fraction",
        a.successes,
        a.trials,
        a.estimate,
        100.0 * a.confidence,
        a.ci_low,
        a.ci_high
    );
    println!("{:<22} {}", "failed replicas", r.failed);
    let h = attraction_time_histogram(r);
    if h.detected > 0 {
        let median_bin = h.bins.iter().scan(0, |acc, b| {
            *acc += b.count;
            Some((*acc, b))
        });
        if let Some((_, b)) = median_bin.into_iter().find(|(acc, _)| 2 * acc >= h.detected) {
            println!("{:<22} [{}, {}) (lower estimates)", "median stabilization", b.from, b.to);
        }
    }
}

fn simulate(global: &GlobalArgs) -> Outcome {
    let config = load_config(global)?;
    let ensemble = config.ensemble()?;
    let result = with_workers(workers(global), || run_ensemble(&ensemble))
        .map_err(|e| anyhow!(e))?
        .map_err(|e| Failure::Usage(format!("invalid configuration: {e}")))?;
    print_ensemble(&config, &result);
    for path in write_simulation(&config.output, &config, &result, global.format)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn verify(global: &GlobalArgs, suite: Suite, replicas: Option<u64>, horizon: Option<u64>) -> Outcome {
    let mut options = SuiteOptions {
        seed: global.seed.unwrap_or(0),
        ..SuiteOptions::default()
    };
    if let Some(n) = replicas {
        options.sampler_replicas = n;
        options.escape_replicas = n;
    }
    if let Some(k) = horizon {
        options.escape_horizon = k;
    }
    let report = with_workers(workers(global), || run_suite(suite, &options))
        .map_err(|e| anyhow!(e))?
        .map_err(|e| Failure::Runtime(anyhow!("suite {suite}: {e}")))?;
    if let Some(dir) = &global.out {
        std::fs::create_dir_all(dir).map_err(anyhow::Error::from)?;
        let path = dir.join(format!("verify-{suite}-{}.json", options.seed));
        std::fs::write(&path, serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?)
            .map_err(anyhow::Error::from)?;
    }
    if global.format == Some(Format::Json) {
        print_json(&report)?;
    } else {
        println!("suite {suite}: {}", report.summary);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "suite {suite}: {} violation(s):\n  {}",
            report.violations.len(),
            report.violations.join("\n  ")
        )))
    }
}

fn sweep(global: &GlobalArgs) -> Outcome {
    let template = load_config(global)?;
    let cells = template.expand()?;
    let mut out = Vec::with_capacity(cells.len());
    for (index, cell) in cells.into_iter().enumerate() {
        let outcome = cell
            .validate()
            .map_err(|e| e.to_string())
            .and_then(|_| cell.ensemble().map_err(|e| e.to_string()))
            .and_then(|ensemble| {
                with_workers(workers(global), || run_ensemble(&ensemble))
                    .map_err(|e| e.to_string())?
                    .map_err(|e| e.to_string())
            });
        match &outcome {
            Ok(r) => println!(
                "cell {index}: {} {} K={} attraction {:.4} [{:.4}, {:.4}]",
                cell.graph, cell.weight, cell.horizon, r.attraction.estimate, r.attraction.ci_low, r.attraction.ci_high
            ),
            Err(e) => eprintln!("cell {index}: failed: {e}"),
        }
        let (result, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e)),
        };
        out.push(SweepCell {
            index,
            config: cell,
            result,
            error,
        });
    }
    for path in write_sweep(&template.output, &template, &out, global.format)? {
        println!("wrote {}", path.display());
    }
    let failed = out.iter().filter(|c| c.error.is_some()).count();
    if failed > 0 {
        return Err(Failure::Violation(format!("{failed} of {} sweep cells failed", out.len())));
    }
    Ok(())
}

fn classify(global: &GlobalArgs, weight: Option<String>, initial_weight: Option<f64>) -> Outcome {
    let base = match (&weight, &global.config) {
        (Some(_), _) => None,
        (None, Some(_)) => Some(load_config(global)?),
        (None, None) => return Err(Failure::Usage("give a weight spec or --config PATH".into())),
    };
    let spec = weight.or_else(|| base.as_ref().map(|c| c.weight.clone())).expect("one source is present");
    let l0 = initial_weight.or(base.as_ref().map(|c| c.initial_weight)).unwrap_or(1.0);
    let w: WeightFunction = spec
        .parse()
        .map_err(|e| Failure::Usage(format!("field `weight`: {e}")))?;
    WeightAssignment::uniform(w.clone(), l0).map_err(|e| Failure::Usage(format!("field `initial_weight`: {e}")))?;
    let class = w.classify(l0);
    if global.format == Some(Format::Json) {
        return print_json(&class);
    }
    println!("weight                 {w}");
    println!("initial weight         {l0}");
    println!("sum 1/w                {:?}", class.reciprocal_summable);
    println!("sum i/w(i+l0)          {:?}", class.linear_moment_summable);
    println!("sum sqrt(i)/w(i+l0)    {:?}", class.half_moment_summable);
    println!("sup i/w(i+l0) < inf    {:?}", class.linear_ratio_bounded);
    println!("initial weight regime  {:?}", class.regime);
    if let Some(note) = &class.note {
        println!("note                   {note}");
    }
    Ok(())
}

struct BoundsArgs {
    graph: Option<String>,
    kind: Option<WalkKind>,
    weight: Option<String>,
    initial_weight: Option<f64>,
    steps: Option<u64>,
}

fn bounds(global: &GlobalArgs, args: BoundsArgs) -> Outcome {
    let base = global.config.as_ref().map(|_| load_config(global)).transpose()?;
    let missing = |field: &str| Failure::Usage(format!("field `{field}`: give --{field} or --config PATH"));
    let graph_spec = args.graph.or(base.as_ref().map(|c| c.graph.clone())).ok_or_else(|| missing("graph"))?;
    let kind = args.kind.or(base.as_ref().map(|c| c.kind)).ok_or_else(|| missing("kind"))?;
    let weight = args.weight.or(base.as_ref().map(|c| c.weight.clone())).ok_or_else(|| missing("weight"))?;
    let l0 = args.initial_weight.or(base.as_ref().map(|c| c.initial_weight)).unwrap_or(1.0);
    let k = args.steps.or(base.as_ref().map(|c| c.horizon)).ok_or_else(|| missing("steps"))?;

    let spec: rrw_core::GraphSpec = graph_spec
        .parse()
        .map_err(|e| Failure::Usage(format!("field `graph`: {e}")))?;
    let graph = spec.build().map_err(|e| Failure::Usage(format!("field `graph`: {e}")))?;
    let w: WeightFunction = weight
        .parse()
        .map_err(|e| Failure::Usage(format!("field `weight`: {e}")))?;
    let report = bound_report(&graph, &spec.to_string(), kind, &w, l0, k)
        .map_err(|e| Failure::Usage(format!("cannot evaluate bounds: {e}")))?;
    if global.format == Some(Format::Json) {
        return print_json(&report);
    }
    println!("{} walk on {}, w = {}, l0 = {}, k = {}", kind, report.graph, report.weight, l0, k);
    for b in &report.bounds {
        match (&b.value, &b.error) {
            (Some(v), _) => println!("{:<34} {:<14.6e} {}", b.name, v.approx(), b.formula),
            (None, Some(e)) => println!("{:<34} {:<14} {e}", b.name, "n/a"),
            (None, None) => {}
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let outcome = match cli.command {
        Command::Simulate => simulate(g),
        Command::Verify {
            suite,
            replicas,
            horizon,
        } => verify(g, suite, replicas, horizon),
        Command::Sweep => sweep(g),
        Command::ClassifyWeight { weight, initial_weight } => classify(g, weight, initial_weight),
        Command::Bounds {
            graph,
            kind,
            weight,
            initial_weight,
            steps,
        } => bounds(
            g,
            BoundsArgs {
                graph,
                kind,
                weight,
                initial_weight,
                steps,
            },
        ),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
