use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chart::{next_line_crossing, SectionChart, SectionParams};
use super::genfun::{fit_generating_function, BlockSample, GeneratingFunction};
use crate::dynamics::billiard::wrap_angle;
use crate::dynamics::ScatteringSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Return {
    pub target: usize,
    pub arrival: [f64; 2],
    pub tau: f64,
    /// Action along the connecting orbit divided by the momentum scale.
    pub action: f64,
}

/// First crossing of any chart domain after leaving chart `source` at
/// `(y, eta)`.
pub fn first_return(
    charts: &[SectionChart],
    system: &ScatteringSystem,
    source: usize,
    departure: [f64; 2],
    params: &SectionParams,
) -> Result<Return> {
    let chart = charts
        .get(source)
        .ok_or_else(|| Error::Parameter(format!("no chart #{source}")))?;
    // also rejects departures outside the chart
    let start = chart.embed(system, departure[0], departure[1])?;
    let c = chart.momentum_scale;
    match system {
        ScatteringSystem::DiskBilliard(d) => {
            let Some(mut disk) = chart.disk() else {
                return Err(Error::Parameter("billiard charts must live on disks".into()));
            };
            let super::Embedding::Boundary { radius, phi_ref, .. } = chart.embedding else { unreachable!() };
            let mut phi = phi_ref + departure[0] / radius;
            let mut eta = departure[1];
            let mut length = 0.0;
            loop {
                let b = match d.bounce_map(disk, phi, eta) {
                    Ok(b) => b,
                    Err(Error::Escape { .. }) => return Err(Error::Escape { time: length / c }),
                    Err(e) => return Err(e),
                };
                length += b.length;
                if length / c > params.tau_max {
                    return Err(Error::Escape { time: length / c });
                }
                if let Some(j) = charts.iter().position(|ch| ch.disk() == Some(b.disk)) {
                    let super::Embedding::Boundary { radius: rj, phi_ref: pj, .. } = charts[j].embedding else {
                        unreachable!()
                    };
                    let y = rj * wrap_angle(b.phi - pj);
                    if charts[j].contains(y, b.eta) {
                        return Ok(Return { target: j, arrival: [y, b.eta], tau: length / c, action: length });
                    }
                }
                disk = b.disk;
                phi = b.phi;
                eta = b.eta;
            }
        }
        ScatteringSystem::SmoothPotential(_) => {
            let accept = |j: usize, y: f64, eta: f64| charts[j].contains(y, eta);
            match next_line_crossing(system, charts, &start, params.tau_max, &params.integrator, false, accept)? {
                Some(cr) => Ok(Return {
                    target: cr.chart,
                    arrival: charts[cr.chart].coordinates(&cr.point),
                    tau: cr.t,
                    action: cr.action / c,
                }),
                None => Err(Error::Escape { time: params.tau_max }),
            }
        }
    }
}

/// Central-difference Jacobian of the return map in chart coordinates.
pub fn return_jacobian(
    charts: &[SectionChart],
    system: &ScatteringSystem,
    source: usize,
    departure: [f64; 2],
    step: f64,
    params: &SectionParams,
) -> Result<[[f64; 2]; 2]> {
    let base = first_return(charts, system, source, departure, params)?;
    let mut jac = [[0.0; 2]; 2];
    for col in 0..2 {
        let mut p = departure;
        let mut m = departure;
        p[col] += step;
        m[col] -= step;
        let rp = first_return(charts, system, source, p, params)?;
        let rm = first_return(charts, system, source, m, params)?;
        if rp.target != base.target || rm.target != base.target {
            return Err(Error::Numeric("finite-difference stencil straddles two blocks".into()));
        }
        for row in 0..2 {
            jac[row][col] = (rp.arrival[row] - rm.arrival[row]) / (2.0 * step);
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnBlock {
    pub source: usize,
    pub target: usize,
    /// `[[y_lo, y_hi], [eta_lo, eta_hi]]` of the sampled departures.
    pub departure_box: [[f64; 2]; 2],
    pub arrival_box: [[f64; 2]; 2],
    pub samples: Vec<BlockSample>,
    pub trapped: Vec<BlockSample>,
    /// Smallest distance between these departures and those of any other
    /// block leaving the same chart.
    pub separation: f64,
    pub generating_function: Option<GeneratingFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapData {
    pub energy: f64,
    pub charts: Vec<SectionChart>,
    pub blocks: Vec<ReturnBlock>,
    /// `j_plus[i]`: charts reached from chart `i`.
    pub j_plus: Vec<Vec<usize>>,
    /// `j_minus[j]`: charts feeding chart `j`.
    pub j_minus: Vec<Vec<usize>>,
}

impl ReturnMapData {
    pub fn block(&self, target: usize, source: usize) -> Option<&ReturnBlock> {
        self.blocks.iter().find(|b| b.target == target && b.source == source)
    }

    /// Fits every block; blocks are independent so this runs in parallel.
    pub fn fit_all(&mut self, degree: usize, twist_floor: f64) -> Result<()> {
        let fits: Vec<Result<GeneratingFunction>> = self
            .blocks
            .par_iter()
            .map(|b| fit_generating_function(&b.samples, degree, twist_floor))
            .collect();
        for (b, f) in self.blocks.iter_mut().zip(fits) {
            b.generating_function = Some(f?);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionParams {
    /// Padding of the departure and arrival boxes around trapped samples.
    pub margin: f64,
    pub section: SectionParams,
}

impl Default for PartitionParams {
    fn default() -> Self {
        PartitionParams { margin: 0.05, section: SectionParams::default() }
    }
}

/// Splits each chart into departure sets `D_ji` (trapped returns to chart
/// `j`, padded) and samples the return map on a grid over each of them.
pub fn partition_blocks(
    charts: &[SectionChart],
    system: &ScatteringSystem,
    sample_budget: usize,
    params: &PartitionParams,
) -> Result<ReturnMapData> {
    if charts.is_empty() {
        return Err(Error::Parameter("no charts to partition".into()));
    }
    let energy = charts[0].energy;
    let sp = &params.section;
    let mut trapped: Vec<Vec<Vec<BlockSample>>> = vec![vec![Vec::new(); charts.len()]; charts.len()];
    for (i, ch) in charts.iter().enumerate() {
        let rets: Vec<Result<Return>> = ch
            .trapped_points
            .par_iter()
            .map(|&p| first_return(charts, system, i, p, sp))
            .collect();
        for (p, r) in ch.trapped_points.iter().zip(rets) {
            let r = r.map_err(|e| {
                Error::Consistency(format!("trapped point {p:?} on chart #{i} does not return: {e}"))
            })?;
            trapped[r.target][i].push(BlockSample { departure: *p, arrival: r.arrival, action: r.action, tau: r.tau });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..charts.len())
        .flat_map(|i| (0..charts.len()).map(move |j| (j, i)))
        .filter(|&(j, i)| !trapped[j][i].is_empty())
        .collect();
    let per_block = (sample_budget / pairs.len().max(1)).max(16);
    let side = (per_block as f64).sqrt().floor() as usize;

    let mut blocks = Vec::new();
    for &(j, i) in &pairs {
        let tr = &trapped[j][i];
        let dep_box = padded_box(tr.iter().map(|s| s.departure), params.margin, &charts[i]);
        let arr_box = padded_box(tr.iter().map(|s| s.arrival), params.margin, &charts[j]);
        let grid: Vec<[f64; 2]> = (0..side)
            .flat_map(|a| {
                (0..side).map(move |b| {
                    let fa = (a as f64 + 0.5) / side as f64;
                    let fb = (b as f64 + 0.5) / side as f64;
                    [
                        dep_box[0][0] + fa * (dep_box[0][1] - dep_box[0][0]),
                        dep_box[1][0] + fb * (dep_box[1][1] - dep_box[1][0]),
                    ]
                })
            })
            .collect();
        let rets: Vec<Option<BlockSample>> = grid
            .par_iter()
            .map(|&p| match first_return(charts, system, i, p, sp) {
                Ok(r) if r.target == j && inside(&arr_box, r.arrival) => {
                    Some(BlockSample { departure: p, arrival: r.arrival, action: r.action, tau: r.tau })
                }
                _ => None,
            })
            .collect();
        blocks.push(ReturnBlock {
            source: i,
            target: j,
            departure_box: dep_box,
            arrival_box: arr_box,
            samples: rets.into_iter().flatten().collect(),
            trapped: tr.clone(),
            separation: f64::INFINITY,
            generating_function: None,
        });
    }

    // Departure sets leaving one chart must be disjoint.
    for a in 0..blocks.len() {
        for b in a + 1..blocks.len() {
            if blocks[a].source != blocks[b].source {
                continue;
            }
            let mut sep = f64::INFINITY;
            for p in &blocks[a].samples {
                for q in &blocks[b].samples {
                    sep = sep.min((p.departure[0] - q.departure[0]).hypot(p.departure[1] - q.departure[1]));
                }
            }
            if sep < 1e-12 {
                return Err(Error::Consistency(format!(
                    "departure sets of blocks ({}, {}) and ({}, {}) intersect",
                    blocks[a].target, blocks[a].source, blocks[b].target, blocks[b].source
                )));
            }
            blocks[a].separation = blocks[a].separation.min(sep);
            blocks[b].separation = blocks[b].separation.min(sep);
        }
    }

    let mut j_plus = vec![Vec::new(); charts.len()];
    let mut j_minus = vec![Vec::new(); charts.len()];
    for &(j, i) in &pairs {
        j_plus[i].push(j);
        j_minus[j].push(i);
    }
    Ok(ReturnMapData { energy, charts: charts.to_vec(), blocks, j_plus, j_minus })
}

fn padded_box<I: Iterator<Item = [f64; 2]>>(pts: I, margin: f64, chart: &SectionChart) -> [[f64; 2]; 2] {
    let mut b = [[f64::INFINITY, f64::NEG_INFINITY]; 2];
    for p in pts {
        for d in 0..2 {
            b[d][0] = b[d][0].min(p[d]);
            b[d][1] = b[d][1].max(p[d]);
        }
    }
    [
        [(b[0][0] - margin).max(chart.y_range[0]), (b[0][1] + margin).min(chart.y_range[1])],
        [(b[1][0] - margin).max(chart.eta_range[0]), (b[1][1] + margin).min(chart.eta_range[1])],
    ]
}

fn inside(b: &[[f64; 2]; 2], p: [f64; 2]) -> bool {
    p[0] >= b[0][0] && p[0] <= b[0][1] && p[1] >= b[1][0] && p[1] <= b[1][1]
}
