use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GridError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub bus: i64,
    /// MW
    pub p_min: f64,
    /// MW
    pub p_max: f64,
    /// $/MWh
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub bus: i64,
    /// Nominal (maximum) demand in MW.
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub from: i64,
    pub to: i64,
    /// p.u.
    pub susceptance: f64,
    /// MW
    pub flow_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    buses: Vec<i64>,
    generators: Vec<Generator>,
    loads: Vec<Load>,
    lines: Vec<Line>,
    slack: i64,
}

/// A validated transmission network.
#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    pub buses: Vec<i64>,
    pub slack: i64,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
    pub lines: Vec<Line>,
    index: BTreeMap<i64, usize>,
}

impl GridModel {
    pub fn new(
        buses: Vec<i64>,
        slack: i64,
        generators: Vec<Generator>,
        loads: Vec<Load>,
        lines: Vec<Line>,
    ) -> Result<Self, GridError> {
        let mut index = BTreeMap::new();
        for (i, &b) in buses.iter().enumerate() {
            if index.insert(b, i).is_some() {
                return Err(GridError::Invalid(format!("duplicate bus id {b}")));
            }
        }
        if buses.is_empty() {
            return Err(GridError::Invalid("no buses".into()));
        }
        let known = |b: i64, what: &str| {
            if index.contains_key(&b) {
                Ok(())
            } else {
                Err(GridError::Invalid(format!("{what} refers to unknown bus {b}")))
            }
        };
        known(slack, "slack")?;
        for (k, g) in generators.iter().enumerate() {
            known(g.bus, "generator")?;
            if !(g.p_min.is_finite() && g.p_max.is_finite() && g.cost.is_finite()) {
                return Err(GridError::Invalid(format!("generator {k} has non-finite data")));
            }
            if g.p_min > g.p_max {
                return Err(GridError::Invalid(format!("generator {k}: p_min > p_max")));
            }
        }
        for (k, l) in loads.iter().enumerate() {
            known(l.bus, "load")?;
            if !l.demand.is_finite() || l.demand < 0.0 {
                return Err(GridError::Invalid(format!("load {k} has invalid demand")));
            }
        }
        for (k, l) in lines.iter().enumerate() {
            known(l.from, "line")?;
            known(l.to, "line")?;
            if l.from == l.to {
                return Err(GridError::Invalid(format!("line {k} is a self loop")));
            }
            if !(l.susceptance > 0.0 && l.susceptance.is_finite()) {
                return Err(GridError::Invalid(format!("line {k}: susceptance must be > 0")));
            }
            if !(l.flow_limit > 0.0) {
                return Err(GridError::Invalid(format!("line {k}: flow_limit must be > 0")));
            }
        }
        let grid = Self {
            buses,
            slack,
            generators,
            loads,
            lines,
            index,
        };
        if !grid.is_connected() {
            return Err(GridError::Invalid("network is not connected".into()));
        }
        Ok(grid)
    }

    pub fn from_json_str(text: &str) -> Result<Self, GridError> {
        let file: GridFile = serde_json::from_str(text).map_err(|e| GridError::Schema {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::new(file.buses, file.slack, file.generators, file.loads, file.lines)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, GridError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let file = GridFile {
            buses: self.buses.clone(),
            generators: self.generators.clone(),
            loads: self.loads.clone(),
            lines: self.lines.clone(),
            slack: self.slack,
        };
        serde_json::to_string_pretty(&file).expect("grid serializes")
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_loads(&self) -> usize {
        self.loads.len()
    }

    pub fn bus_index(&self, id: i64) -> usize {
        self.index[&id]
    }

    pub fn slack_index(&self) -> usize {
        self.bus_index(self.slack)
    }

    pub fn nominal_demand(&self) -> Vec<f64> {
        self.loads.iter().map(|l| l.demand).collect()
    }

    /// Sum of nominal demands, the normalization used for "% of max loading".
    pub fn max_total_load(&self) -> f64 {
        self.loads.iter().map(|l| l.demand).sum()
    }

    fn is_connected(&self) -> bool {
        let n = self.n_buses();
        let mut adj = vec![Vec::new(); n];
        for l in &self.lines {
            let (a, b) = (self.bus_index(l.from), self.bus_index(l.to));
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Demand box as fractions of nominal load, `[lo * D, hi * D]` per load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for DemandBox {
    fn default() -> Self {
        Self { lo: 0.6, hi: 1.0 }
    }
}

impl DemandBox {
    pub fn mw_bounds(&self, grid: &GridModel) -> (Vec<f64>, Vec<f64>) {
        let d = grid.nominal_demand();
        (
            d.iter().map(|v| self.lo * v).collect(),
            d.iter().map(|v| self.hi * v).collect(),
        )
    }
}
