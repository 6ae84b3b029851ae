use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::dynamics::ScatteringSystem;
use crate::error::{Error, Result};
use crate::section::{ReturnMapData, SectionParams};

/// Inverse branch of an expanding interval map: `psi(x) = slope * x + offset`
/// sends symbol cell `target` into symbol cell `source`, so the forward map
/// takes part of `source` onto `target` with derivative `1 / slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub source: usize,
    pub target: usize,
    pub slope: f64,
    pub offset: f64,
}

impl Branch {
    pub fn apply(&self, x: f64) -> f64 {
        self.slope * x + self.offset
    }

    /// `log |kappa'|` on the branch.
    pub fn log_expansion(&self) -> f64 {
        -self.slope.abs().ln()
    }
}

/// A real observable on the symbolic model: `constant + log_jacobian *
/// log|kappa'| + per_cell[symbol] + return_time * tau`. The return-time term
/// only exists on sampled section maps; `per_cell` may be empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Observable {
    pub constant: f64,
    pub log_jacobian: f64,
    pub per_cell: Vec<f64>,
    pub return_time: f64,
}

impl Observable {
    pub fn zero() -> Self {
        Observable::default()
    }

    pub fn constant(c: f64) -> Self {
        Observable { constant: c, ..Observable::default() }
    }

    /// `-beta * log|kappa'|`.
    pub fn jacobian(beta: f64) -> Self {
        Observable { log_jacobian: -beta, ..Observable::default() }
    }

    pub fn per_cell(values: Vec<f64>) -> Self {
        Observable { per_cell: values, ..Observable::default() }
    }

    /// The sampled return time.
    pub fn return_time() -> Self {
        Observable { return_time: 1.0, ..Observable::default() }
    }

    pub fn plus_constant(&self, c: f64) -> Self {
        Observable { constant: self.constant + c, ..self.clone() }
    }

    pub(crate) fn check(&self, cells: usize) -> Result<()> {
        if !self.per_cell.is_empty() && self.per_cell.len() != cells {
            return Err(Error::Parameter(format!(
                "observable has {} per-cell values for {cells} cells",
                self.per_cell.len()
            )));
        }
        let all = [self.constant, self.log_jacobian, self.return_time];
        if all.iter().chain(&self.per_cell).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("observable has non-finite coefficients".into()));
        }
        Ok(())
    }

    fn cell_term(&self, cell: usize) -> f64 {
        self.per_cell.get(cell).copied().unwrap_or(0.0)
    }

    /// Value at a preimage point on an interval branch.
    pub fn on_branch(&self, b: &Branch) -> f64 {
        self.constant + self.log_jacobian * b.log_expansion() + self.cell_term(b.source)
    }

    /// Value on a sampled return leaving chart `chart` after time `tau`;
    /// Jacobian terms are unavailable there.
    pub(crate) fn on_return(&self, chart: usize, tau: f64) -> f64 {
        self.constant + self.cell_term(chart) + self.return_time * tau
    }
}

/// Sampled return map of a section, with a cache of Ulam tables so that
/// pressure scans do not recompute returns.
#[derive(Debug)]
pub struct SectionModel {
    pub data: ReturnMapData,
    pub system: ScatteringSystem,
    pub params: SectionParams,
    pub(crate) cache: Mutex<HashMap<usize, Arc<super::transfer::UlamTable>>>,
}

impl Clone for SectionModel {
    fn clone(&self) -> Self {
        SectionModel {
            data: self.data.clone(),
            system: self.system.clone(),
            params: self.params,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    /// Piecewise-affine expanding Markov map on disjoint intervals.
    Interval { cells: Vec<[f64; 2]>, branches: Vec<Branch> },
    Section(Box<SectionModel>),
}

#[derive(Debug, Clone)]
pub struct SymbolicModel {
    pub name: String,
    /// `transitions[i][j]`: symbol `i` can be followed by symbol `j`.
    pub transitions: Vec<Vec<bool>>,
    pub kind: ModelKind,
}

impl SymbolicModel {
    pub fn alphabet(&self) -> usize {
        self.transitions.len()
    }

    /// Interval model from cells and inverse branches; transitions follow
    /// from the branches.
    pub fn interval(name: &str, cells: Vec<[f64; 2]>, branches: Vec<Branch>) -> Result<Self> {
        let j = cells.len();
        if j == 0 || branches.is_empty() {
            return Err(Error::Model("empty symbolic model".into()));
        }
        if cells.iter().any(|c| !(c[1] > c[0])) {
            return Err(Error::Model(format!("degenerate cells {cells:?}")));
        }
        let mut transitions = vec![vec![false; j]; j];
        for b in &branches {
            if b.source >= j || b.target >= j || !b.slope.is_finite() || b.slope == 0.0 || !b.offset.is_finite() {
                return Err(Error::Model(format!("invalid branch {b:?}")));
            }
            if transitions[b.source][b.target] {
                return Err(Error::Model(format!("two branches for transition {} -> {}", b.source, b.target)));
            }
            let t = cells[b.target];
            let s = cells[b.source];
            let (lo, hi) = {
                let (a, c) = (b.apply(t[0]), b.apply(t[1]));
                (a.min(c), a.max(c))
            };
            let slack = 1e-12 * (s[1] - s[0]);
            if lo < s[0] - slack || hi > s[1] + slack {
                return Err(Error::Model(format!("branch {b:?} leaves its source cell")));
            }
            transitions[b.source][b.target] = true;
        }
        let m = SymbolicModel { name: name.to_string(), transitions, kind: ModelKind::Interval { cells, branches } };
        m.check_recurrent()?;
        Ok(m)
    }

    /// `x -> 2x mod 1` on the cells `[0, 1/2]`, `[1/2, 1]`: the full 2-shift.
    pub fn doubling() -> Self {
        let cells = vec![[0.0, 0.5], [0.5, 1.0]];
        // psi(x) = (x + i) / 2
        let branches = (0..2)
            .flat_map(|i| (0..2).map(move |j| Branch { source: i, target: j, slope: 0.5, offset: 0.5 * i as f64 }))
            .collect();
        SymbolicModel::interval("doubling", cells, branches).expect("doubling model is valid")
    }

    /// `x -> 3x mod 1` restricted to the outer thirds: points landing in the
    /// middle third leave.
    pub fn ternary_cut() -> Self {
        let cells = vec![[0.0, 1.0 / 3.0], [2.0 / 3.0, 1.0]];
        let branches = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| Branch { source: i, target: j, slope: 1.0 / 3.0, offset: 2.0 * i as f64 / 3.0 })
            .collect();
        SymbolicModel::interval("ternary-cut", cells, branches).expect("ternary model is valid")
    }

    /// `x -> phi x mod 1` with the Markov cells `[0, 1/phi]`, `[1/phi, 1]`:
    /// symbol 1 may not follow itself.
    pub fn golden_mean() -> Self {
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        let g = 1.0 / phi;
        let cells = vec![[0.0, g], [g, 1.0]];
        let branches = vec![
            Branch { source: 0, target: 0, slope: g, offset: 0.0 },
            Branch { source: 0, target: 1, slope: g, offset: 0.0 },
            Branch { source: 1, target: 0, slope: g, offset: g },
        ];
        SymbolicModel::interval("golden-mean", cells, branches).expect("golden-mean model is valid")
    }

    /// Sampled return map of a section; the alphabet is the set of charts.
    pub fn from_return_map(data: ReturnMapData, system: ScatteringSystem, params: SectionParams) -> Result<Self> {
        let j = data.charts.len();
        if j == 0 || data.blocks.is_empty() {
            return Err(Error::Model("return map has no blocks".into()));
        }
        let mut transitions = vec![vec![false; j]; j];
        for b in &data.blocks {
            transitions[b.source][b.target] = true;
        }
        let m = SymbolicModel {
            name: "section".into(),
            transitions,
            kind: ModelKind::Section(Box::new(SectionModel { data, system, params, cache: Mutex::new(HashMap::new()) })),
        };
        m.check_recurrent()?;
        Ok(m)
    }

    /// Fails when no symbol lies on a cycle of the transition graph.
    fn check_recurrent(&self) -> Result<()> {
        let n = self.alphabet();
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for i in 0..n {
                if !alive[i] {
                    continue;
                }
                let out = (0..n).any(|j| alive[j] && self.transitions[i][j]);
                let inc = (0..n).any(|j| alive[j] && self.transitions[j][i]);
                if !out || !inc {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if alive.iter().any(|a| *a) {
            Ok(())
        } else {
            Err(Error::Model(format!("model '{}' has no recurrent part", self.name)))
        }
    }

    pub fn descriptor(&self) -> serde_json::Value {
        match &self.kind {
            ModelKind::Interval { cells, branches } => serde_json::json!({
                "name": self.name,
                "kind": "interval",
                "cells": cells,
                "branches": branches,
            }),
            ModelKind::Section(s) => serde_json::json!({
                "name": self.name,
                "kind": "section",
                "charts": s.data.charts.len(),
                "blocks": s.data.blocks.iter().map(|b| [b.target, b.source]).collect::<Vec<_>>(),
                "energy": s.data.energy,
            }),
        }
    }
}
