//! Named verification grids comparing bounds against exact laws and
//! samplers against each other.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    c_bound_check, construct_g, errw_joint_bound, errw_orderstat_bound, q_m, q_m_enumerated, vrrw_joint_bound,
    vrrw_orderstat_bound, Cap, TailSequence,
};
use crate::graph::GraphModel;
use crate::harness::{escape_statistics, run_ensemble, sampler_equivalence, EnsembleConfig, HarnessError};
use crate::oracle::{enumerate_paths, exact_joint_law, exact_orderstat_distribution};
use crate::walk::{Engine, WalkKind};
use crate::weight::{WeightAssignment, WeightFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    JointBounds,
    OrderstatBounds,
    Qm,
    GFunction,
    SamplerEquivalence,
    Escape,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::JointBounds,
        Suite::OrderstatBounds,
        Suite::Qm,
        Suite::GFunction,
        Suite::SamplerEquivalence,
        Suite::Escape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::JointBounds => "joint-bounds",
            Suite::OrderstatBounds => "orderstat-bounds",
            Suite::Qm => "qm",
            Suite::GFunction => "g-function",
            Suite::SamplerEquivalence => "sampler-equivalence",
            Suite::Escape => "escape",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite {s:?}; expected one of {}", names.join(", "))
        })
    }
}

/// Outcome of one verification grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checked: u64,
    /// The offending configurations.
    pub violations: Vec<String>,
    pub summary: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sizes of the Monte Carlo suites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub sampler_replicas: u64,
    pub escape_replicas: u64,
    pub escape_horizon: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            sampler_replicas: 100_000,
            escape_replicas: 10_000,
            escape_horizon: 100_000,
        }
    }
}

pub fn run_suite(suite: Suite, options: &SuiteOptions) -> Result<SuiteReport, HarnessError> {
    match suite {
        Suite::JointBounds => {
            let mut a = joint_bounds(WalkKind::Edge, 8)?;
            let b = joint_bounds(WalkKind::Vertex, 8)?;
            a.checked += b.checked;
            a.violations.extend(b.violations);
            a.summary = format!("edge: {}; vertex: {}", a.summary, b.summary);
            Ok(a)
        }
        Suite::OrderstatBounds => orderstat_bounds(8),
        Suite::Qm => qm(),
        Suite::GFunction => g_function(),
        Suite::SamplerEquivalence => sampler(options.sampler_replicas, options.seed),
        Suite::Escape => escape(options.escape_replicas, options.escape_horizon, options.seed),
    }
}

/// Graphs of the exact dominance grids.
pub fn small_graphs() -> Vec<(&'static str, GraphModel)> {
    vec![
        ("triangle", GraphModel::triangle()),
        ("path:4", GraphModel::path(4).expect("valid size")),
        ("star:4", GraphModel::star(4).expect("valid size")),
        ("cycle:4", GraphModel::cycle(4).expect("valid size")),
        ("complete:4", GraphModel::complete(4).expect("valid size")),
    ]
}

/// Weights of the exact dominance grids.
pub fn small_weights() -> Vec<WeightFunction> {
    vec![
        WeightFunction::power(2.0).expect("valid exponent"),
        WeightFunction::power(3.0).expect("valid exponent"),
        WeightFunction::oscillating_power(1.0).expect("valid exponent"),
    ]
}

fn oracle_error(e: impl fmt::Display) -> HarnessError {
    HarnessError::Precondition(e.to_string())
}

/// Exact joint law against the path-independent joint bound for every
/// reachable `(counts, landing)` with `k <= max_k`.
pub fn joint_bounds(kind: WalkKind, max_k: usize) -> Result<SuiteReport, HarnessError> {
    let mut checked = 0;
    let mut violations = Vec::new();
    for (name, g) in small_graphs() {
        let fg = g.finite().expect("small graphs are finite");
        for w in small_weights() {
            let a = WeightAssignment::uniform(w.clone(), 1.0)?;
            for k in 0..=max_k {
                let paths = enumerate_paths::<BigRational>(&g, kind, &a, k).map_err(oracle_error)?;
                for ((counts, last), p) in exact_joint_law(&paths) {
                    let bound: BigRational = match kind {
                        WalkKind::Edge => errw_joint_bound(fg, &a, &counts, last, k as u64)?,
                        WalkKind::Vertex => vrrw_joint_bound(fg, &a, &counts, last, k as u64)?,
                    };
                    checked += 1;
                    if p > bound {
                        violations.push(format!("{kind} {name} {w} l0=1 k={k} counts={counts:?} landing={last}: {p} > {bound}"));
                    }
                }
            }
        }
    }
    Ok(SuiteReport {
        suite: Suite::JointBounds,
        checked,
        summary: format!("{checked} (counts, landing) atoms with k <= {max_k}, {} violations", violations.len()),
        violations,
    })
}

/// Exact laws of `R_k^2` and `R_k^3` against the order-statistic bounds on
/// the triangle and on `K_4`.
pub fn orderstat_bounds(max_k: u64) -> Result<SuiteReport, HarnessError> {
    let mut checked = 0;
    let mut violations = Vec::new();
    let graphs = [("triangle", GraphModel::triangle()), ("complete:4", GraphModel::complete(4)?)];
    for (name, g) in graphs {
        let fg = g.finite().expect("finite");
        let (e, v) = (fg.edge_count(), fg.vertex_count());
        for w in small_weights() {
            let a = WeightAssignment::uniform(w.clone(), 1.0)?;
            for kind in [WalkKind::Edge, WalkKind::Vertex] {
                for k in 0..=max_k {
                    let paths = enumerate_paths::<BigRational>(&g, kind, &a, k as usize).map_err(oracle_error)?;
                    let (index, top) = match kind {
                        WalkKind::Edge => (2, k / 2),
                        WalkKind::Vertex => (3, k / 3),
                    };
                    let law = exact_orderstat_distribution(&paths, index);
                    for l in 0..=top {
                        let p = law.get(&l).cloned().unwrap_or_else(BigRational::zero);
                        let bound: BigRational = match kind {
                            WalkKind::Edge => errw_orderstat_bound(e, v, &w, 1.0, k, l)?,
                            WalkKind::Vertex => vrrw_orderstat_bound(v, &w, 1.0, k, l)?,
                        };
                        checked += 1;
                        if p > bound {
                            violations.push(format!("{kind} {name} {w} l0=1 k={k} R^{index}={l}: {p} > {bound}"));
                        }
                    }
                }
            }
        }
    }
    Ok(SuiteReport {
        suite: Suite::OrderstatBounds,
        checked,
        summary: format!("{checked} (k, l) pairs with k <= {max_k}, {} violations", violations.len()),
        violations,
    })
}

/// `Q_m` by dynamic programming against direct enumeration, and the
/// geometric tail bound, for `m <= 4`, `a, c <= 20`, `w = x^2`, `b = 1`.
pub fn qm() -> Result<SuiteReport, HarnessError> {
    let w = WeightFunction::power(2.0).expect("valid exponent");
    let mut checked = 0;
    let mut violations = Vec::new();
    for m in 1..=4u32 {
        for a in 0..=20u64 {
            for c in 0..=20u64 {
                let cap = Cap::Finite(c);
                let dp: BigRational = q_m(m, a, 1.0, cap, &w)?;
                let direct: BigRational = q_m_enumerated(m, a, 1.0, cap, &w)?;
                checked += 1;
                if dp != direct {
                    violations.push(format!("Q_{m}({a}; 1; {c}): dynamic programme {dp} != enumeration {direct}"));
                }
                for j in [0, 5, 20] {
                    let check = c_bound_check::<BigRational>(m, a, j, 1.0, cap, &w)?;
                    if !check.passed {
                        violations.push(format!("sum_(s<={j}) Q_{m}(s+{a}; 1; {c}) exceeds c(1)^{m}"));
                    }
                }
            }
        }
    }
    Ok(SuiteReport {
        suite: Suite::Qm,
        checked,
        summary: format!("{checked} grid points, {} violations", violations.len()),
        violations,
    })
}

fn short_index(x: &BigUint) -> String {
    let digits = x.to_string();
    if digits.len() > 12 {
        format!("~10^{}", digits.len() - 1)
    } else {
        digits
    }
}

/// Builds `g` for three summable sequences and checks monotonicity,
/// unboundedness, finite mass and the first ten block inequalities.
pub fn g_function() -> Result<SuiteReport, HarnessError> {
    let sequences = [
        ("2^-l", TailSequence::Geometric { numerator: 1, denominator: 2 }),
        ("1/l^2", TailSequence::PowerLaw { exponent: 2, shift: 0 }),
        (
            "1/w(l+1), w=x^2",
            TailSequence::from_weight(&WeightFunction::power(2.0).expect("valid exponent"), 1.0),
        ),
    ];
    let mut violations = Vec::new();
    let mut parts = Vec::new();
    for (name, seq) in sequences {
        let g = construct_g(seq, 2, 21, 10)?;
        let exceeds = g.first_index_exceeding(1e6);
        if !g.is_monotone() {
            violations.push(format!("{name}: g is not monotone"));
        }
        if exceeds.is_none() {
            violations.push(format!("{name}: g never exceeds 10^6"));
        }
        if !g.mass.is_finite() {
            violations.push(format!("{name}: mass is not finite"));
        }
        for b in g.blocks.iter().take(10) {
            if b.holds != Some(true) {
                violations.push(format!("{name}: block {} inequality not certified", b.m));
            }
        }
        parts.push(format!(
            "{name}: g > 10^6 from l = {}, mass <= {:.4}",
            exceeds.as_ref().map_or("none".into(), short_index),
            g.mass
        ));
    }
    Ok(SuiteReport {
        suite: Suite::GFunction,
        checked: 3,
        summary: parts.join("; "),
        violations,
    })
}

/// Sequential and race engines on the triangle, `w = x^2`, `k = 5`.
pub fn sampler(replicas: u64, seed: u64) -> Result<SuiteReport, HarnessError> {
    let g = Arc::new(GraphModel::triangle());
    let a = Arc::new(WeightAssignment::uniform(WeightFunction::power(2.0)?, 1.0)?);
    let states = [(0, vec![0, 0, 0]), (0, vec![2, 1, 0]), (2, vec![5, 0, 3]), (1, vec![1, 4, 2])];
    let r = sampler_equivalence(&g, WalkKind::Edge, &a, 5, replicas, seed, &states, 1e-3)?;
    let mut violations = Vec::new();
    if r.total_variation >= 0.01 {
        violations.push(format!("path-law total variation {:.5} >= 0.01", r.total_variation));
    }
    for c in &r.one_step {
        if !c.test.passed {
            violations.push(format!(
                "one-step law at vertex {} with counts {:?}: chi-square p = {:.2e}",
                c.vertex, c.counts, c.test.p_value
            ));
        }
    }
    let ps: Vec<String> = r.one_step.iter().map(|c| format!("{:.3}", c.test.p_value)).collect();
    Ok(SuiteReport {
        suite: Suite::SamplerEquivalence,
        checked: 1 + r.one_step.len() as u64,
        summary: format!("TV = {:.5}, one-step chi-square p-values [{}]", r.total_variation, ps.join(", ")),
        violations,
    })
}

/// Edge walk on the line with `w = x^3`: exceedance frequencies of the
/// maximal radius against the escape bound.
pub fn escape(replicas: u64, horizon: u64, seed: u64) -> Result<SuiteReport, HarnessError> {
    let config = EnsembleConfig {
        graph: "lattice:1".parse().map_err(HarnessError::Precondition)?,
        kind: WalkKind::Edge,
        weight: WeightFunction::power(3.0)?,
        initial_weight: 1.0,
        replicas,
        horizon,
        window: Some(horizon.min(10_000)),
        engine: Engine::Sequential,
        seed,
    };
    let ensemble = run_ensemble(&config)?;
    let report = escape_statistics(&ensemble, &[2, 4, 6, 8, 10])?;
    let violations: Vec<String> = report
        .rows
        .iter()
        .filter(|r| !r.consistent)
        .map(|r| format!("n={}: frequency {:.4} exceeds bound {:.4} beyond 3 sigma", r.radius, r.exceedance.estimate, r.bound))
        .collect();
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("n={} freq={:.4} bound={:.4}", r.radius, r.exceedance.estimate, r.bound))
        .collect();
    Ok(SuiteReport {
        suite: Suite::Escape,
        checked: report.rows.len() as u64,
        summary: format!(
            "p = {:.6}, {replicas} replicas, K = {horizon}, {} failed; {}",
            report.stuck.p,
            ensemble.failed,
            rows.join(", ")
        ),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_grids_pass() {
        assert!(joint_bounds(WalkKind::Edge, 4).unwrap().passed());
        assert!(orderstat_bounds(4).unwrap().passed());
        let r = escape(200, 2_000, 1).unwrap();
        assert_eq!(r.checked, 5);
        assert!(r.passed(), "{r:?}");
    }
}
