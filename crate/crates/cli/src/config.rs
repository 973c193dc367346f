//! Run configuration files.
//!
//! A configuration is a TOML document:
//!
//! ```toml
//! name = "triangle-edge"
//! graph = "triangle"
//! kind = "edge"
//! weight = "power:2"
//! initial_weight = 1.0
//! horizon = 100000
//! replicas = 1000
//! window = 10000            # optional, defaults to max(10^4, K/10), or K/10 for short runs
//! engine = "sequential"     # or "rubin"
//! seed = 42
//! output = "results"
//!
//! [grid]                    # only read by `sweep`
//! exponent = [1.5, 2.0, 3.0]
//! horizon = [10000, 100000]
//! size = [4, 8]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use rrw_core::graph::GraphSpec;
use rrw_core::harness::{default_window, EnsembleConfig};
use rrw_core::walk::{Engine, WalkKind};
use rrw_core::weight::{WeightAssignment, WeightFunction};
use serde::{Deserialize, Serialize};

/// Largest number of cells a sweep may expand to.
pub const MAX_SWEEP_CELLS: usize = 10_000;

fn default_output() -> PathBuf {
    PathBuf::from(".")
}

fn default_engine() -> Engine {
    Engine::Sequential
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub graph: String,
    pub kind: WalkKind,
    pub weight: String,
    pub initial_weight: f64,
    pub horizon: u64,
    pub replicas: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

/// Parameter axes of a sweep; absent axes are not varied.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Replaces the first parameter of the weight family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Vec<u64>>,
    /// Replaces the size parameter of the graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<Vec<u64>>,
}

/// A configuration problem, pointing at the offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub source: Option<PathBuf>,
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn field(field: &str, message: impl fmt::Display) -> Self {
        ConfigError {
            source: None,
            line: None,
            field: Some(field.to_string()),
            message: message.to_string(),
        }
    }

    fn located(mut self, path: Option<&Path>, text: Option<&str>) -> Self {
        self.source = path.map(Path::to_path_buf);
        if self.line.is_none() {
            if let (Some(text), Some(field)) = (text, &self.field) {
                let key = field.rsplit('.').next().unwrap_or(field);
                self.line = line_of_key(text, key);
            }
        }
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.source, self.line) {
            (Some(p), Some(l)) => write!(f, "{}:{l}: ", p.display())?,
            (Some(p), None) => write!(f, "{}: ", p.display())?,
            (None, Some(l)) => write!(f, "line {l}: ")?,
            (None, None) => {}
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn key_on_line(line: &str) -> Option<String> {
    let (key, _) = line.split_once('=')?;
    let key = key.trim();
    (!key.is_empty() && !key.starts_with('#')).then(|| key.to_string())
}

impl RunConfig {
    pub fn from_toml(text: &str, path: Option<&Path>) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1));
            let field = line.and_then(|l| text.lines().nth(l - 1)).and_then(key_on_line);
            ConfigError {
                source: path.map(Path::to_path_buf),
                line,
                field,
                message: e.message().trim().to_string(),
            }
        })?;
        config.validate().map_err(|e| e.located(path, Some(text)))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: Some(path.to_path_buf()),
            line: None,
            field: None,
            message: e.to_string(),
        })?;
        Self::from_toml(&text, Some(path))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configurations serialize")
    }

    pub fn graph_spec(&self) -> Result<GraphSpec, ConfigError> {
        self.graph.parse().map_err(|e| ConfigError::field("graph", e))
    }

    pub fn weight_function(&self) -> Result<WeightFunction, ConfigError> {
        self.weight.parse().map_err(|e| ConfigError::field("weight", e))
    }

    pub fn resolved_window(&self) -> u64 {
        self.window.unwrap_or_else(|| default_window(self.horizon))
    }

    /// Checks every field; the error names the first offending one.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(ConfigError::field("name", "must be a non-empty file-name fragment"));
        }
        let spec = self.graph_spec()?;
        spec.build().map_err(|e| ConfigError::field("graph", e))?;
        let w = self.weight_function()?;
        WeightAssignment::uniform(w, self.initial_weight).map_err(|e| ConfigError::field("initial_weight", e))?;
        if self.horizon == 0 {
            return Err(ConfigError::field("horizon", "must be at least 1"));
        }
        let window = self.resolved_window();
        if window == 0 || window > self.horizon {
            return Err(ConfigError::field(
                "window",
                format!("must lie in [1, horizon = {}], got {window}", self.horizon),
            ));
        }
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        Ok(())
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig, ConfigError> {
        Ok(EnsembleConfig {
            graph: self.graph_spec()?,
            kind: self.kind,
            weight: self.weight_function()?,
            initial_weight: self.initial_weight,
            replicas: self.replicas,
            horizon: self.horizon,
            window: Some(self.resolved_window()),
            engine: self.engine,
            seed: self.seed,
        })
    }

    /// The configurations of every sweep cell, in grid order.
    pub fn expand(&self) -> Result<Vec<RunConfig>, ConfigError> {
        let Some(grid) = &self.grid else {
            return Ok(Vec::new());
        };
        let count = grid.cell_count();
        if count > MAX_SWEEP_CELLS {
            return Err(ConfigError::field(
                "grid",
                format!("expands to {count} cells, more than {MAX_SWEEP_CELLS}"),
            ));
        }
        if grid.exponent.is_none() && grid.horizon.is_none() && grid.size.is_none() {
            return Ok(Vec::new());
        }
        let exponents: Vec<Option<f64>> = axis(&grid.exponent);
        let horizons: Vec<Option<u64>> = axis(&grid.horizon);
        let sizes: Vec<Option<u64>> = axis(&grid.size);
        let mut cells = Vec::with_capacity(count);
        for e in &exponents {
            for h in &horizons {
                for s in &sizes {
                    let mut cell = self.clone();
                    cell.grid = None;
                    if let Some(e) = e {
                        cell.weight = with_exponent(&self.weight, *e)?;
                    }
                    if let Some(h) = h {
                        cell.horizon = *h;
                        if self.window.is_none_or(|w| w > *h) {
                            cell.window = None;
                        }
                    }
                    if let Some(s) = s {
                        cell.graph = with_size(&self.graph_spec()?, *s)?.to_string();
                    }
                    cells.push(cell);
                }
            }
        }
        Ok(cells)
    }
}

fn axis<T: Copy>(values: &Option<Vec<T>>) -> Vec<Option<T>> {
    match values {
        None => vec![None],
        Some(v) => v.iter().copied().map(Some).collect(),
    }
}

impl Grid {
    pub fn cell_count(&self) -> usize {
        let len = |n: Option<usize>| n.unwrap_or(1);
        if self.exponent.is_none() && self.horizon.is_none() && self.size.is_none() {
            return 0;
        }
        len(self.exponent.as_ref().map(Vec::len))
            .saturating_mul(len(self.horizon.as_ref().map(Vec::len)))
            .saturating_mul(len(self.size.as_ref().map(Vec::len)))
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if let Some(h) = &self.horizon {
            if h.contains(&0) {
                return Err(ConfigError::field("grid.horizon", "horizons must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Replaces the first numeric parameter of a weight spec. The result is
/// validated per cell.
fn with_exponent(weight: &str, exponent: f64) -> Result<String, ConfigError> {
    let (body, offset) = match weight.split_once('@') {
        Some((b, o)) => (b, Some(o)),
        None => (weight, None),
    };
    let mut parts: Vec<String> = body.split(':').map(str::to_string).collect();
    if parts.len() < 2 || !matches!(parts[0].as_str(), "power" | "powerlog" | "exp" | "oscpow") {
        return Err(ConfigError::field(
            "grid.exponent",
            format!("weight {weight:?} has no exponent parameter to vary"),
        ));
    }
    parts[1] = exponent.to_string();
    let mut out = parts.join(":");
    if let Some(o) = offset {
        out.push('@');
        out.push_str(o);
    }
    Ok(out)
}

/// Replaces the size parameter of a graph spec.
fn with_size(graph: &GraphSpec, size: u64) -> Result<GraphSpec, ConfigError> {
    let n = usize::try_from(size).map_err(|_| ConfigError::field("grid.size", "size out of range"))?;
    Ok(match graph {
        GraphSpec::Path(_) => GraphSpec::Path(n),
        GraphSpec::Cycle(_) => GraphSpec::Cycle(n),
        GraphSpec::Complete(_) => GraphSpec::Complete(n),
        GraphSpec::Star(_) => GraphSpec::Star(n),
        GraphSpec::Truncate(_, inner) => GraphSpec::Truncate(size, inner.clone()),
        other => {
            return Err(ConfigError::field(
                "grid.size",
                format!("graph {other} has no size parameter to vary"),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
graph = "triangle"
kind = "edge"
weight = "power:2"
initial_weight = 1.0
horizon = 1000
replicas = 10
"#;

    #[test]
    fn defaults_and_round_trip() {
        let c = RunConfig::from_toml(MINIMAL, None).unwrap();
        assert_eq!(c.engine, Engine::Sequential);
        assert_eq!(c.resolved_window(), 100);
        let again = RunConfig::from_toml(&c.to_toml(), None).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn errors_name_field_and_line() {
        let bad = MINIMAL.replace("power:2", "bogus:2");
        let e = RunConfig::from_toml(&bad, None).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("weight"));
        assert_eq!(e.line, Some(5));
        assert!(e.to_string().contains("field `weight`"));

        let bad = MINIMAL.replace("\"edge\"", "\"sideways\"");
        let e = RunConfig::from_toml(&bad, None).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("kind"));
        assert_eq!(e.line, Some(4));

        let bad = format!("{MINIMAL}window = 5000\n");
        let e = RunConfig::from_toml(&bad, None).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("window"));
    }

    #[test]
    fn grid_expansion() {
        let text = format!("{MINIMAL}\n[grid]\nexponent = [1.5, 2, 3]\nhorizon = [10000, 100000]\n");
        let c = RunConfig::from_toml(&text, None).unwrap();
        let cells = c.expand().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].weight, "power:1.5");
        assert_eq!(cells[5].horizon, 100_000);
        assert!(cells.iter().all(|c| c.validate().is_ok()));

        let empty = RunConfig::from_toml(&format!("{MINIMAL}\n[grid]\n"), None).unwrap();
        assert!(empty.expand().unwrap().is_empty());

        let sized = format!("{}\n[grid]\nsize = [3, 5]\n", MINIMAL.replace("triangle", "cycle:4"));
        let cells = RunConfig::from_toml(&sized, None).unwrap().expand().unwrap();
        assert_eq!(cells[1].graph, "cycle:5");
    }
}
