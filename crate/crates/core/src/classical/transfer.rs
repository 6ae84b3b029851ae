use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{Branch, ModelKind, Observable, SectionModel, SymbolicModel};
use crate::error::{Error, Result};
use crate::linalg::{barycentric_basis, chebyshev_lobatto, eigenvalues, CMat};
use crate::section::first_return;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discretization {
    /// Piecewise-constant Galerkin. Interval models: `cells` subcells per
    /// symbol cell. Section models: `cells` x `cells` per chart.
    Ulam { cells: usize },
    /// Chebyshev collocation of the given degree on each symbol cell.
    Collocation { degree: usize },
}

impl Discretization {
    pub fn resolution(&self) -> usize {
        match *self {
            Discretization::Ulam { cells } => cells,
            Discretization::Collocation { degree } => degree,
        }
    }

    pub fn doubled(&self) -> Self {
        match *self {
            Discretization::Ulam { cells } => Discretization::Ulam { cells: 2 * cells },
            Discretization::Collocation { degree } => Discretization::Collocation { degree: 2 * degree },
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    /// Acts on function values: row = point of the image, column = basis
    /// element of the preimage.
    pub entries: CMat,
    pub discretization: Discretization,
    pub weight: Observable,
    pub roof: Option<Observable>,
    pub z: Option<Complex64>,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let mut e = eigenvalues(self.entries.as_ref())?;
        e.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        Ok(e)
    }
}

/// Expanding branches only; collocation of a non-expanding branch would not
/// converge.
const EXPANSION_FLOOR: f64 = 1.0 + 1e-9;

/// Discretizes `L_{f - z tau}` (`L_f` when `roof_z` is `None`).
pub fn build_transfer_matrix(
    model: &SymbolicModel,
    f: &Observable,
    disc: Discretization,
    roof_z: Option<(&Observable, Complex64)>,
) -> Result<TransferMatrix> {
    if disc.resolution() < 8 {
        return Err(Error::Parameter(format!("resolution {} is below 8", disc.resolution())));
    }
    f.check(model.alphabet())?;
    if let Some((r, z)) = roof_z {
        r.check(model.alphabet())?;
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Parameter(format!("non-finite z = {z}")));
        }
    }
    let entries = match (&model.kind, disc) {
        (ModelKind::Interval { cells, branches }, Discretization::Collocation { degree }) => {
            interval_weights_check(f, roof_z)?;
            collocation(cells, branches, degree, &|b| branch_weight(f, roof_z, b))?
        }
        (ModelKind::Interval { cells, branches }, Discretization::Ulam { cells: sub }) => {
            interval_weights_check(f, roof_z)?;
            ulam_interval(cells, branches, sub, &|b| branch_weight(f, roof_z, b))
        }
        (ModelKind::Section(_), Discretization::Collocation { .. }) => {
            return Err(Error::Model("sampled return maps only support Ulam discretization".into()))
        }
        (ModelKind::Section(s), Discretization::Ulam { cells }) => {
            let sparse = section_sparse(s, f, roof_z, cells)?;
            if sparse.dim > 4000 {
                return Err(Error::Budget(format!("dense Ulam matrix of dimension {}", sparse.dim)));
            }
            let mut m = Mat::from_fn(sparse.dim, sparse.dim, |_, _| Complex64::new(0.0, 0.0));
            for &(r, c, v) in &sparse.entries {
                m[(r, c)] += v;
            }
            m
        }
    };
    Ok(TransferMatrix {
        entries,
        discretization: disc,
        weight: f.clone(),
        roof: roof_z.map(|(r, _)| r.clone()),
        z: roof_z.map(|(_, z)| z),
    })
}

fn interval_weights_check(f: &Observable, roof_z: Option<(&Observable, Complex64)>) -> Result<()> {
    if f.return_time != 0.0 || roof_z.is_some_and(|(r, _)| r.return_time != 0.0) {
        return Err(Error::Model("return-time observables exist only on section models".into()));
    }
    Ok(())
}

fn branch_weight(f: &Observable, roof_z: Option<(&Observable, Complex64)>, b: &Branch) -> Complex64 {
    let mut e = Complex64::new(f.on_branch(b), 0.0);
    if let Some((r, z)) = roof_z {
        e -= z * r.on_branch(b);
    }
    e.exp()
}

fn collocation(cells: &[[f64; 2]], branches: &[Branch], degree: usize, w: &(dyn Fn(&Branch) -> Complex64 + Sync)) -> Result<CMat> {
    if let Some(b) = branches.iter().find(|b| 1.0 / b.slope.abs() < EXPANSION_FLOOR) {
        return Err(Error::Model(format!("branch {b:?} is not expanding")));
    }
    let n = degree + 1;
    let nodes: Vec<Vec<f64>> = cells.iter().map(|c| chebyshev_lobatto(n, c[0], c[1])).collect();
    let dim = cells.len() * n;
    let mut m = Mat::from_fn(dim, dim, |_, _| Complex64::new(0.0, 0.0));
    for b in branches {
        let wb = w(b);
        for (a, &x) in nodes[b.target].iter().enumerate() {
            let y = b.apply(x).clamp(cells[b.source][0], cells[b.source][1]);
            let basis = barycentric_basis(&nodes[b.source], y);
            for (k, l) in basis.iter().enumerate() {
                m[(b.target * n + a, b.source * n + k)] += wb * l;
            }
        }
    }
    Ok(m)
}

/// Exact Galerkin projection on equal subcells; weights are constant on
/// affine branches so only overlap lengths matter.
fn ulam_interval(cells: &[[f64; 2]], branches: &[Branch], sub: usize, w: &(dyn Fn(&Branch) -> Complex64 + Sync)) -> CMat {
    let dim = cells.len() * sub;
    let edge = |c: usize, k: usize| cells[c][0] + (cells[c][1] - cells[c][0]) * k as f64 / sub as f64;
    let mut m = Mat::from_fn(dim, dim, |_, _| Complex64::new(0.0, 0.0));
    for b in branches {
        let wb = w(b);
        for a in 0..sub {
            let (p, q) = (b.apply(edge(b.target, a)), b.apply(edge(b.target, a + 1)));
            let (lo, hi) = (p.min(q), p.max(q));
            for k in 0..sub {
                let overlap = hi.min(edge(b.source, k + 1)) - lo.max(edge(b.source, k));
                if overlap > 0.0 {
                    m[(b.target * sub + a, b.source * sub + k)] += wb * (overlap / (hi - lo));
                }
            }
        }
    }
    m
}

/// Sampled transitions between Ulam cells of a section model, restricted to
/// cells that both receive and send mass.
#[derive(Debug)]
pub struct UlamTable {
    pub dim: usize,
    /// `(source state, target state, source chart, tau, area factor)`.
    pub samples: Vec<(usize, usize, usize, f64, f64)>,
    /// Chart and cell indices of each retained state.
    pub states: Vec<(usize, usize, usize)>,
}

/// Stratified samples per cell side.
const ULAM_STRATA: usize = 4;

pub(crate) fn ulam_table(model: &SectionModel, m: usize) -> Result<Arc<UlamTable>> {
    if let Some(t) = model.cache.lock().expect("cache poisoned").get(&m) {
        return Ok(t.clone());
    }
    let charts = &model.data.charts;
    let s = ULAM_STRATA;
    let area = |i: usize| {
        let c = &charts[i];
        (c.y_range[1] - c.y_range[0]) * (c.eta_range[1] - c.eta_range[0]) / (m * m) as f64
    };
    let cell_of = |j: usize, p: [f64; 2]| {
        let c = &charts[j];
        let a = ((p[0] - c.y_range[0]) / (c.y_range[1] - c.y_range[0]) * m as f64).floor();
        let b = ((p[1] - c.eta_range[0]) / (c.eta_range[1] - c.eta_range[0]) * m as f64).floor();
        (a.clamp(0.0, (m - 1) as f64) as usize, b.clamp(0.0, (m - 1) as f64) as usize)
    };
    let cells: Vec<(usize, usize, usize)> =
        (0..charts.len()).flat_map(|i| (0..m).flat_map(move |a| (0..m).map(move |b| (i, a, b)))).collect();
    let raw: Vec<Vec<(usize, usize, usize, f64)>> = cells
        .par_iter()
        .map(|&(i, a, b)| {
            let c = &charts[i];
            let dy = (c.y_range[1] - c.y_range[0]) / m as f64;
            let de = (c.eta_range[1] - c.eta_range[0]) / m as f64;
            let mut out = Vec::new();
            for u in 0..s {
                for v in 0..s {
                    let p = [
                        c.y_range[0] + dy * (a as f64 + (u as f64 + 0.5) / s as f64),
                        c.eta_range[0] + de * (b as f64 + (v as f64 + 0.5) / s as f64),
                    ];
                    match first_return(charts, &model.system, i, p, &model.params) {
                        Ok(r) => {
                            let (ta, tb) = cell_of(r.target, r.arrival);
                            out.push((r.target, ta, tb, r.tau));
                        }
                        Err(Error::Escape { .. } | Error::Domain(_) | Error::Tangency { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let index = |i: usize, a: usize, b: usize| (i * m + a) * m + b;
    let n = cells.len();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (src, hits) in raw.iter().enumerate() {
        for &(j, a, b, tau) in hits {
            edges.push((src, index(j, a, b), tau));
        }
    }
    // prune cells with no incoming or no outgoing transitions
    let mut alive = vec![true; n];
    loop {
        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        for &(s0, t0, _) in &edges {
            if alive[s0] && alive[t0] {
                outdeg[s0] += 1;
                indeg[t0] += 1;
            }
        }
        let mut changed = false;
        for k in 0..n {
            if alive[k] && (indeg[k] == 0 || outdeg[k] == 0) {
                alive[k] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut states = Vec::new();
    for k in 0..n {
        if alive[k] {
            map[k] = states.len();
            states.push(cells[k]);
        }
    }
    let k2 = (s * s) as f64;
    let samples = edges
        .into_iter()
        .filter(|&(a, b, _)| alive[a] && alive[b])
        .map(|(a, b, tau)| {
            let (si, ti) = (cells[a].0, cells[b].0);
            (map[a], map[b], si, tau, area(si) / area(ti) / k2)
        })
        .collect();
    let t = Arc::new(UlamTable { dim: states.len(), samples, states });
    model.cache.lock().expect("cache poisoned").insert(m, t.clone());
    Ok(t)
}

pub(crate) struct SparseTransfer {
    pub dim: usize,
    /// `(row, column, value)`, duplicates summed.
    pub entries: Vec<(usize, usize, Complex64)>,
}

pub(crate) fn section_sparse(
    model: &SectionModel,
    f: &Observable,
    roof_z: Option<(&Observable, Complex64)>,
    m: usize,
) -> Result<SparseTransfer> {
    if f.log_jacobian != 0.0 || roof_z.is_some_and(|(r, _)| r.log_jacobian != 0.0) {
        return Err(Error::Model(
            "Jacobian weights are not available on sampled return maps; the Ulam matrix already carries the Lebesgue weight"
                .into(),
        ));
    }
    let table = ulam_table(model, m)?;
    let entries = table
        .samples
        .iter()
        .map(|&(src, tgt, chart, tau, factor)| {
            let mut e = Complex64::new(f.on_return(chart, tau), 0.0);
            if let Some((r, z)) = roof_z {
                e -= z * r.on_return(chart, tau);
            }
            (tgt, src, e.exp() * factor)
        })
        .collect();
    Ok(SparseTransfer { dim: table.dim, entries })
}

impl SparseTransfer {
    /// Perron root by power iteration; entries must be non-negative reals.
    /// Falls back to a dense eigensolve when the iteration stalls.
    pub fn perron_root(&self) -> Result<f64> {
        if self.dim == 0 {
            return Ok(0.0);
        }
        if self.entries.iter().any(|e| e.2.im != 0.0 || e.2.re < 0.0) {
            return Err(Error::Numeric("power iteration needs a non-negative matrix".into()));
        }
        let mut v = vec![1.0 / (self.dim as f64).sqrt(); self.dim];
        let mut lambda = 0.0;
        for it in 0..5_000 {
            let mut w = vec![0.0; self.dim];
            for &(r, c, x) in &self.entries {
                w[r] += x.re * v[c];
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(0.0);
            }
            w.iter_mut().for_each(|x| *x /= norm);
            let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = w;
            if it > 10 && (norm - lambda).abs() < 1e-14 * norm && diff < 1e-10 {
                return Ok(norm);
            }
            lambda = norm;
        }
        if self.dim > 4000 {
            return Err(Error::Numeric("power iteration did not converge".into()));
        }
        let mut m = Mat::from_fn(self.dim, self.dim, |_, _| Complex64::new(0.0, 0.0));
        for &(r, c, x) in &self.entries {
            m[(r, c)] += x;
        }
        Ok(eigenvalues(m.as_ref())?.iter().map(|l| l.norm()).fold(0.0, f64::max))
    }
}
