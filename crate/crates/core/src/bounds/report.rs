use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{
    bipartite_orderstat_bound, bipbip_orderstat_bound, errw_orderstat_bound, escape_bound, stuck_probability_p,
    triangle_free_orderstat_bound, vrrw_orderstat_bound, BoundError, Scalar, SideBoundConstant,
};
use crate::graph::GraphModel;
use crate::walk::WalkKind;
use crate::weight::{WeightAssignment, WeightFunction};

/// Relative slack applied to floating-point bound values.
pub(crate) const FLOAT_SLACK: f64 = 64.0 * f64::EPSILON;

/// A bound value: exact, or a float with an enclosing interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundValue {
    Exact {
        numerator: String,
        denominator: String,
        approx: f64,
    },
    Float {
        value: f64,
        lower: f64,
        upper: f64,
    },
}

impl BoundValue {
    pub fn exact(r: &BigRational) -> Self {
        BoundValue::Exact {
            numerator: r.numer().to_string(),
            denominator: r.denom().to_string(),
            approx: ToPrimitive::to_f64(r).unwrap_or(f64::NAN),
        }
    }

    pub fn approximate(x: f64) -> Self {
        BoundValue::Float {
            value: x,
            lower: x - FLOAT_SLACK * x.abs(),
            upper: x + FLOAT_SLACK * x.abs(),
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            BoundValue::Exact { approx, .. } => *approx,
            BoundValue::Float { value, .. } => *value,
        }
    }

    /// The largest value certainly not above the bound.
    pub fn conservative(&self) -> f64 {
        match self {
            BoundValue::Exact { approx, .. } => *approx,
            BoundValue::Float { lower, .. } => *lower,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedBound {
    pub name: String,
    /// Human-readable formula, including the constant that was used.
    pub formula: String,
    pub value: Option<BoundValue>,
    pub error: Option<String>,
}

/// Bounds evaluated for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub graph: String,
    pub weight: String,
    pub initial_weight: f64,
    pub k: u64,
    pub bounds: Vec<NamedBound>,
}

impl BoundReport {
    pub fn push<E: std::fmt::Display>(&mut self, name: &str, formula: &str, value: Result<BoundValue, E>) {
        let (value, error) = match value {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        self.bounds.push(NamedBound {
            name: name.to_string(),
            formula: formula.to_string(),
            value,
            error,
        });
    }

    pub fn get(&self, name: &str) -> Option<&NamedBound> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

/// Largest order-statistic value listed by [`bound_report`].
pub const REPORT_ROWS: u64 = 16;

/// Largest horizon for which order-statistic bounds are evaluated in exact
/// arithmetic.
const EXACT_HORIZON: u64 = 64;

fn float_value(value: f64, lower: f64, upper: f64) -> BoundValue {
    BoundValue::Float { value, lower, upper }
}

fn scalar_or_float<F, G>(k: u64, exact: F, float: G) -> Result<BoundValue, BoundError>
where
    F: FnOnce() -> Result<BigRational, BoundError>,
    G: FnOnce() -> Result<f64, BoundError>,
{
    if k <= EXACT_HORIZON {
        match exact() {
            Ok(r) => return Ok(r.to_value()),
            Err(BoundError::NotRational { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    float().map(|x| x.to_value())
}

/// Every bound that applies to a walk of kind `kind` on `graph` after `k`
/// steps, with common initial weight `l0`.
pub fn bound_report(
    graph: &GraphModel,
    graph_name: &str,
    kind: WalkKind,
    w: &WeightFunction,
    l0: f64,
    k: u64,
) -> Result<BoundReport, BoundError> {
    let mut report = BoundReport {
        graph: graph_name.to_string(),
        weight: w.to_string(),
        initial_weight: l0,
        k,
        bounds: Vec::new(),
    };
    report.push(
        "c(l0)",
        "sum_{i>=0} 1/w(i + l0)",
        w.tail_sum_c(l0, 1e-12).map(|s| float_value(s.value, s.lower, s.upper)),
    );

    let assignment = WeightAssignment::uniform(w.clone(), l0)?;
    let stuck = stuck_probability_p(graph.degree_bound(), &assignment);
    report.push(
        "stuck probability p",
        "exp(-2 D sup w(l0) sum_{i>=1} 1/w(i + l0))",
        stuck.clone().map(|s| float_value(s.p, s.p_interval.lo, s.p_interval.hi)),
    );
    if let Ok(s) = &stuck {
        for n in [2u64, 4, 8, 16] {
            report.push(
                &format!("P(max radius > {n})"),
                "(1 - p)^[n/2]",
                escape_bound(n, s.p).map(BoundValue::approximate),
            );
        }
    }

    let Some(fg) = graph.finite() else {
        return Ok(report);
    };
    let (edges, vertices) = (fg.edge_count(), fg.vertex_count());
    match kind {
        WalkKind::Edge => {
            for l in 0..=(k / 2).min(REPORT_ROWS) {
                report.push(
                    &format!("P(R_k^2 = {l})"),
                    &format!("|V| n!/w(l0) [1/w(l + l0) + sum_i Q_(n-2)(k-i-l; l0; inf)/w(i + l0)] with |V|={vertices}, n={edges}"),
                    scalar_or_float(
                        k,
                        || errw_orderstat_bound::<BigRational>(edges, vertices, w, l0, k, l),
                        || errw_orderstat_bound::<f64>(edges, vertices, w, l0, k, l),
                    ),
                );
            }
        }
        WalkKind::Vertex => {
            for l in 0..=(k / 3).min(REPORT_ROWS) {
                report.push(
                    &format!("P(R_k^3 = {l})"),
                    &format!("C [l/w(l + l0) + sum_(i=l)^(k-l) 1/w(i + l0)] with n={vertices}"),
                    scalar_or_float(
                        k,
                        || vrrw_orderstat_bound::<BigRational>(vertices, w, l0, k, l),
                        || vrrw_orderstat_bound::<f64>(vertices, w, l0, k, l),
                    ),
                );
                type Side = fn(&GraphModel, &WeightFunction, f64, u64, u64) -> Result<(f64, SideBoundConstant), BoundError>;
                let sides: [(&str, Side); 3] = [
                    ("bipartite", bipartite_orderstat_bound),
                    ("triangle-free", triangle_free_orderstat_bound),
                    ("bipartite, bounded i/w", bipbip_orderstat_bound),
                ];
                for (name, f) in sides {
                    match f(graph, w, l0, k, l) {
                        Ok((value, c)) => report.push(
                            &format!("{name} P(R_k^3 = {l})"),
                            &c.formula,
                            Ok::<_, BoundError>(BoundValue::approximate(value)),
                        ),
                        Err(e) => report.push(&format!("{name} P(R_k^3 = {l})"), "", Err::<BoundValue, _>(e)),
                    }
                }
            }
        }
    }
    Ok(report)
}
