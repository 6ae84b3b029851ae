//! Argument-principle zero finder for holomorphic determinants.
//!
//! Cells are axis-aligned rectangles. The winding number of each cell is the
//! unwrapped phase change of the function along its boundary; cells are
//! quartered until their winding is at most `cell_cap`, and every child set
//! must reproduce the winding of its parent exactly.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LogDet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Disk { center: [f64; 2], radius: f64 },
    Rect { re: [f64; 2], im: [f64; 2] },
}

impl Domain {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Domain::Disk { center, radius } => (z - Complex64::new(center[0], center[1])).norm() < radius,
            Domain::Rect { re, im } => z.re > re[0] && z.re < re[1] && z.im > im[0] && z.im < im[1],
        }
    }

    /// Same shape scaled about its center.
    pub fn inflated(&self, factor: f64) -> Domain {
        match *self {
            Domain::Disk { center, radius } => Domain::Disk { center, radius: radius * factor },
            Domain::Rect { re, im } => {
                let (cr, hr) = (0.5 * (re[0] + re[1]), 0.5 * (re[1] - re[0]) * factor);
                let (ci, hi) = (0.5 * (im[0] + im[1]), 0.5 * (im[1] - im[0]) * factor);
                Domain::Rect { re: [cr - hr, cr + hr], im: [ci - hi, ci + hi] }
            }
        }
    }

    /// Whether a cell can hold points of the domain.
    fn meets(&self, c: &Cell) -> bool {
        match *self {
            Domain::Disk { center, radius } => {
                let dx = (c.re[0] - center[0]).max(center[0] - c.re[1]).max(0.0);
                let dy = (c.im[0] - center[1]).max(center[1] - c.im[1]).max(0.0);
                dx.hypot(dy) <= radius
            }
            Domain::Rect { .. } => true,
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => radius,
            Domain::Rect { re, im } => (re[1] - re[0]).max(im[1] - im[0]),
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Domain::Disk { center, radius } => center.iter().all(|c| c.is_finite()) && radius > 0.0 && radius.is_finite(),
            Domain::Rect { re, im } => re[1] > re[0] && im[1] > im[0] && re.iter().chain(&im).all(|v| v.is_finite()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZeroFinderParams {
    /// Initial cells per axis.
    pub coarse_grid: usize,
    /// Largest winding a cell may keep before Newton refinement.
    pub cell_cap: usize,
    /// Absolute residual bound; `None` uses 1e-9 times the median magnitude
    /// on a circle of radius `1e-3` times the domain size around each zero.
    pub zero_tol: Option<f64>,
    /// Cells smaller than this fraction of the domain size stop splitting and
    /// their zeros are treated as one multiple zero.
    pub min_cell: f64,
    /// Boundary samples per cell edge before adaptive densification.
    pub edge_samples: usize,
    /// Step of the central difference for the derivative, relative to the domain size.
    pub fd_step: f64,
}

impl Default for ZeroFinderParams {
    fn default() -> Self {
        ZeroFinderParams { coarse_grid: 4, cell_cap: 1, zero_tol: None, min_cell: 1e-5, edge_samples: 8, fd_step: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub z: Complex64,
    pub multiplicity: usize,
    /// `|f(z)|` after refinement.
    pub residual: f64,
    /// Bound the residual was checked against.
    #[serde(default)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub zeros: Vec<Zero>,
    /// The domain actually used (after any inflation).
    pub domain: Domain,
    pub h: Option<f64>,
    pub provenance: String,
    /// Winding number of the function around the domain boundary.
    pub winding: i64,
    /// 1e-9 times the median magnitude on the outer boundary, or the fixed
    /// bound when one was given. Zeros deep inside a domain where `|f|`
    /// varies by many orders are checked against their local scale instead
    /// (see [`Zero::tolerance`]).
    pub zero_tol: f64,
    /// Parent/children winding comparisons made during subdivision; all
    /// of them matched.
    pub winding_checks: usize,
}

impl ResonanceSet {
    pub fn total_multiplicity(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// Quantum-map eigenvalues `lambda = exp(-i z / h)` turned into
    /// resonances `z = i h log(lambda)`, so `Im z / h = log|lambda|`.
    pub fn from_eigenvalues(eigs: &[Complex64], h: f64, provenance: &str) -> ResonanceSet {
        let zeros = eigs
            .iter()
            .filter(|l| l.norm() > 0.0)
            .map(|l| Zero { z: Complex64::i() * h * l.ln(), multiplicity: 1, residual: 0.0, tolerance: 0.0 })
            .collect::<Vec<_>>();
        let radius = zeros.iter().map(|z| z.z.norm()).fold(0.0, f64::max) * (1.0 + 1e-9);
        ResonanceSet {
            winding: zeros.len() as i64,
            zeros,
            domain: Domain::Disk { center: [0.0, 0.0], radius: radius.max(f64::MIN_POSITIVE) },
            h: Some(h),
            provenance: provenance.to_string(),
            zero_tol: 0.0,
            winding_checks: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    re: [f64; 2],
    im: [f64; 2],
}

impl Cell {
    fn size(&self) -> f64 {
        (self.re[1] - self.re[0]).max(self.im[1] - self.im[0])
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re[0] + self.re[1]), 0.5 * (self.im[0] + self.im[1]))
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re[0] && z.re <= self.re[1] && z.im >= self.im[0] && z.im <= self.im[1]
    }

    fn distance_to_boundary(&self, z: Complex64) -> f64 {
        (z.re - self.re[0]).min(self.re[1] - z.re).min(z.im - self.im[0]).min(self.im[1] - z.im)
    }

    fn split(&self, f: f64) -> [Cell; 4] {
        let xm = self.re[0] + f * (self.re[1] - self.re[0]);
        let ym = self.im[0] + f * (self.im[1] - self.im[0]);
        [
            Cell { re: [self.re[0], xm], im: [self.im[0], ym] },
            Cell { re: [xm, self.re[1]], im: [self.im[0], ym] },
            Cell { re: [self.re[0], xm], im: [ym, self.im[1]] },
            Cell { re: [xm, self.re[1]], im: [ym, self.im[1]] },
        ]
    }

    /// Counter-clockwise corner sequence.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re[0], self.im[0]),
            Complex64::new(self.re[1], self.im[0]),
            Complex64::new(self.re[1], self.im[1]),
            Complex64::new(self.re[0], self.im[1]),
        ]
    }
}

/// Memoized evaluations shared between neighbouring cells.
struct Evaluator<'a, F> {
    f: &'a F,
    cache: Mutex<HashMap<(u64, u64), LogDet>>,
}

impl<'a, F> Evaluator<'a, F>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    fn new(f: &'a F) -> Self {
        Evaluator { f, cache: Mutex::new(HashMap::new()) }
    }

    fn key(z: Complex64) -> (u64, u64) {
        // fold -0.0 into 0.0
        ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
    }

    fn eval(&self, z: Complex64) -> Result<LogDet> {
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&Self::key(z)) {
            return Ok(*v);
        }
        let v = (self.f)(z)?;
        if !(v.log_abs.is_finite() || v.is_zero()) || !v.phase.re.is_finite() || !v.phase.im.is_finite() {
            return Err(Error::Input(format!("determinant is not finite at z = {z}")));
        }
        self.cache.lock().expect("cache poisoned").insert(Self::key(z), v);
        Ok(v)
    }

    fn eval_many(&self, zs: &[Complex64]) -> Result<Vec<LogDet>> {
        zs.par_iter().map(|&z| self.eval(z)).collect()
    }
}

/// Phase change of `f` along the closed polygon through `path` (first point
/// not repeated), densified until consecutive samples differ by less than
/// `max_jump` in phase. Returns the winding and the log-magnitudes seen.
fn winding_along<F>(ev: &Evaluator<F>, path: &[Complex64], max_jump: f64, min_len: f64) -> Result<(i64, Vec<f64>)>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    let vals = ev.eval_many(path)?;
    let mut logs: Vec<f64> = vals.iter().map(|v| v.log_abs).collect();
    let mut total = 0.0;
    let n = path.len();
    for k in 0..n {
        let (za, zb) = (path[k], path[(k + 1) % n]);
        let (fa, fb) = (vals[k], vals[(k + 1) % n]);
        total += phase_change(ev, za, zb, fa, fb, max_jump, min_len, &mut logs, 0)?;
    }
    let w = total / (2.0 * PI);
    let r = w.round();
    if (w - r).abs() > 0.05 {
        return Err(Error::BoundaryAmbiguity(format!("non-integer winding {w:.4}")));
    }
    Ok((r as i64, logs))
}

#[allow(clippy::too_many_arguments)]
fn phase_change<F>(
    ev: &Evaluator<F>,
    za: Complex64,
    zb: Complex64,
    fa: LogDet,
    fb: LogDet,
    max_jump: f64,
    min_len: f64,
    logs: &mut Vec<f64>,
    depth: usize,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    if fa.is_zero() || fb.is_zero() {
        return Err(Error::BoundaryAmbiguity(format!("exact zero on a contour near z = {za}")));
    }
    let d = (fb.phase / fa.phase).arg();
    // a large magnitude swing also signals a nearby zero
    let swing = (fb.log_abs - fa.log_abs).abs();
    let zm = 0.5 * (za + zb);
    if d.abs() < max_jump && swing < 2.0 {
        // a full turn between samples looks like a small jump; the midpoint
        // must agree with both ends before the segment is accepted
        let fm = ev.eval(zm)?;
        logs.push(fm.log_abs);
        let (d1, d2) = ((fm.phase / fa.phase).arg(), (fb.phase / fm.phase).arg());
        let half_swing = (fm.log_abs - fa.log_abs).abs().max((fb.log_abs - fm.log_abs).abs());
        if d1.abs() < max_jump && d2.abs() < max_jump && (d1 + d2 - d).abs() < 1e-9 && half_swing < 2.0 {
            return Ok(d);
        }
        if (zb - za).norm() < min_len || depth > 60 {
            return Err(Error::BoundaryAmbiguity(format!("phase jumps by {d:.3} across a segment at z = {za}")));
        }
        return Ok(phase_change(ev, za, zm, fa, fm, max_jump, min_len, logs, depth + 1)?
            + phase_change(ev, zm, zb, fm, fb, max_jump, min_len, logs, depth + 1)?);
    }
    if (zb - za).norm() < min_len || depth > 60 {
        return Err(Error::BoundaryAmbiguity(format!("phase jumps by {d:.3} across a segment at z = {za}")));
    }
    let fm = ev.eval(zm)?;
    logs.push(fm.log_abs);
    Ok(phase_change(ev, za, zm, fa, fm, max_jump, min_len, logs, depth + 1)?
        + phase_change(ev, zm, zb, fm, fb, max_jump, min_len, logs, depth + 1)?)
}

fn cell_path(c: &Cell, per_edge: usize) -> Vec<Complex64> {
    let k = c.corners();
    let mut out = Vec::with_capacity(4 * per_edge);
    for e in 0..4 {
        let (a, b) = (k[e], k[(e + 1) % 4]);
        for s in 0..per_edge {
            out.push(a + (b - a) * (s as f64 / per_edge as f64));
        }
    }
    out
}

fn circle_path(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect()
}

/// Zeros of `f` inside `domain`. `f` returns a determinant in log-magnitude
/// form; it must be holomorphic on a neighbourhood of the domain.
pub fn find_zeros<F>(f: F, domain: Domain, params: &ZeroFinderParams) -> Result<ResonanceSet>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    if !domain.is_valid() || params.coarse_grid == 0 || params.edge_samples < 2 || params.cell_cap == 0 {
        return Err(Error::Parameter(format!("invalid zero-finder setup: {domain:?}, {params:?}")));
    }
    let ev = Evaluator::new(&f);
    let mut last = None;
    for attempt in 0..=3 {
        let d = domain.inflated(1.01f64.powi(attempt));
        match find_in(&ev, d, params) {
            Err(Error::BoundaryAmbiguity(msg)) => {
                log::warn!("zero near the boundary of {d:?} ({msg}); inflating by 1%");
                last = Some(msg);
            }
            other => return other,
        }
    }
    Err(Error::BoundaryAmbiguity(format!(
        "persistent boundary zero after 3 inflations: {}",
        last.unwrap_or_default()
    )))
}

fn find_in<F>(ev: &Evaluator<F>, domain: Domain, params: &ZeroFinderParams) -> Result<ResonanceSet>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    let scale = domain.scale();
    let min_len = 1e-12 * scale;
    let (outer, root) = match domain {
        Domain::Disk { center, radius } => {
            let c = Complex64::new(center[0], center[1]);
            let n = 16 * params.edge_samples;
            let (w, logs) = winding_along(ev, &circle_path(c, radius, n), FRAC_PI_4, min_len)?;
            // slightly larger square so its edges stay off the circle's zeros
            let half = radius * 1.0137;
            (
                (w, logs),
                Cell { re: [center[0] - half, center[0] + half], im: [center[1] - half, center[1] + half] },
            )
        }
        Domain::Rect { re, im } => {
            let cell = Cell { re, im };
            (winding_along(ev, &cell_path(&cell, 4 * params.edge_samples), FRAC_PI_4, min_len)?, cell)
        }
    };
    let (outer_winding, mut logs) = outer;
    if outer_winding < 0 {
        return Err(Error::Consistency(format!("negative winding {outer_winding}: function is not holomorphic")));
    }
    logs.sort_by(f64::total_cmp);
    let median_log = logs[logs.len() / 2];
    let zero_tol = params.zero_tol.unwrap_or(1e-9 * median_log.exp());

    let mut checks = 0usize;
    let mut zeros: Vec<Zero> = Vec::new();
    if outer_winding > 0 || matches!(domain, Domain::Disk { .. }) {
        // root winding (the square may hold zeros outside the disk)
        let root_w = match domain {
            Domain::Rect { .. } => outer_winding,
            Domain::Disk { .. } => winding_along(ev, &cell_path(&root, 4 * params.edge_samples), FRAC_PI_4, min_len)?.0,
        };
        let mut level: Vec<(Cell, i64)> = Vec::new();
        if root_w > 0 {
            let (coarse, ws) = coarse_cells(ev, &root, root_w, params, min_len)?;
            checks += 1;
            level.extend(coarse.into_iter().zip(ws).filter(|(c, w)| *w != 0 && domain.meets(c)));
        }
        while !level.is_empty() {
            let mut next = Vec::new();
            for (cell, w) in level {
                if w < 0 {
                    return Err(Error::Consistency(format!("cell {cell:?} has negative winding {w}")));
                }
                let small = cell.size() < params.min_cell * scale;
                if w as usize <= params.cell_cap || small {
                    let mult = if small { w as usize } else { 1 };
                    if let Some(found) = refine_in_cell(ev, &cell, w, mult, scale, params, min_len)? {
                        zeros.extend(found);
                        continue;
                    }
                    if small {
                        return Err(Error::Numeric(format!("Newton failed to converge in a tiny cell around {}", cell.center())));
                    }
                }
                let (children, ws) = split_consistently(ev, &cell, w, params, min_len)?;
                checks += 1;
                next.extend(children.into_iter().zip(ws).filter(|(c, w)| *w != 0 && domain.meets(c)));
            }
            level = next;
        }
    }
    let zeros = merge_duplicates(ev, zeros, scale, min_len);
    let mut zeros: Vec<Zero> = zeros.into_iter().filter(|z| domain.contains(z.z)).collect();
    zeros.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    let total: usize = zeros.iter().map(|z| z.multiplicity).sum();
    if total as i64 != outer_winding {
        return Err(Error::Consistency(format!(
            "zeros carry multiplicity {total} but the boundary winds {outer_winding} times"
        )));
    }
    Ok(ResonanceSet {
        zeros,
        domain,
        h: None,
        provenance: String::new(),
        winding: outer_winding,
        zero_tol,
        winding_checks: checks + 1,
    })
}

/// Breakpoints of the coarse grid, slightly irregular so that zeros on
/// symmetry lines of the domain (the real axis, say) avoid cell edges.
fn coarse_breaks(g: usize, shift: f64) -> Vec<f64> {
    (0..=g)
        .map(|k| if k == 0 || k == g { k as f64 / g as f64 } else { (k as f64 + shift * (1.7 * k as f64).sin()) / g as f64 })
        .collect()
}

fn coarse_cells<F>(
    ev: &Evaluator<F>,
    root: &Cell,
    root_w: i64,
    params: &ZeroFinderParams,
    min_len: f64,
) -> Result<(Vec<Cell>, Vec<i64>)>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    let g = params.coarse_grid;
    let mut last = String::new();
    for shift in [0.0731, -0.0417, 0.1123, -0.0929] {
        let bx = coarse_breaks(g, shift);
        let by = coarse_breaks(g, -0.6 * shift);
        let lerp = |r: [f64; 2], t: f64| r[0] + t * (r[1] - r[0]);
        let cells: Vec<Cell> = (0..g)
            .flat_map(|a| (0..g).map(move |b| (a, b)))
            .map(|(a, b)| Cell {
                re: [lerp(root.re, bx[a]), lerp(root.re, bx[a + 1])],
                im: [lerp(root.im, by[b]), lerp(root.im, by[b + 1])],
            })
            .collect();
        match children_windings(ev, &cells, params, min_len) {
            Ok(ws) if ws.iter().sum::<i64>() == root_w => return Ok((cells, ws)),
            Ok(ws) => last = format!("coarse cells wind {} times, domain {root_w}", ws.iter().sum::<i64>()),
            Err(Error::BoundaryAmbiguity(m)) => last = m,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Consistency(format!("cannot grid the domain consistently: {last}")))
}

/// Zeros found from neighbouring cells may coincide when a multiple zero
/// sat on a shared edge; merge them and confirm the summed multiplicity.
fn merge_duplicates<F>(ev: &Evaluator<F>, zeros: Vec<Zero>, scale: f64, min_len: f64) -> Vec<Zero>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    let tol = 1e-6 * scale;
    let mut out: Vec<Zero> = Vec::new();
    'next: for z in zeros {
        for o in out.iter_mut() {
            if (o.z - z.z).norm() < tol {
                let r = 1e-4 * scale;
                let m = winding_along(ev, &circle_path(o.z, r, 32), FRAC_PI_4, min_len).map(|r| r.0).unwrap_or(-1);
                if m == (o.multiplicity + z.multiplicity) as i64 {
                    o.multiplicity += z.multiplicity;
                    if z.residual < o.residual {
                        o.z = z.z;
                        o.residual = z.residual;
                    }
                    continue 'next;
                }
            }
        }
        out.push(z);
    }
    out
}

fn children_windings<F>(ev: &Evaluator<F>, cells: &[Cell], params: &ZeroFinderParams, min_len: f64) -> Result<Vec<i64>>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    cells
        .par_iter()
        .map(|c| winding_along(ev, &cell_path(c, params.edge_samples), FRAC_PI_4, min_len).map(|r| r.0))
        .collect()
}

/// Quarters `cell`, moving the split point when a zero sits on a new edge,
/// and checks that the children reproduce the parent's winding.
fn split_consistently<F>(
    ev: &Evaluator<F>,
    cell: &Cell,
    w: i64,
    params: &ZeroFinderParams,
    min_len: f64,
) -> Result<(Vec<Cell>, Vec<i64>)>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    let mut last = String::new();
    for f in [0.5117, 0.4637, 0.5371, 0.4219, 0.5813] {
        let children = cell.split(f).to_vec();
        match children_windings(ev, &children, params, min_len) {
            Ok(ws) if ws.iter().sum::<i64>() == w => return Ok((children, ws)),
            Ok(ws) => last = format!("children wind {ws:?}, parent {w}"),
            Err(Error::BoundaryAmbiguity(m)) => last = m,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Consistency(format!("cannot split cell {cell:?} consistently: {last}")))
}

/// Newton refinement of the zeros inside a cell with winding `w`. With
/// `mult == w` the cell is treated as one multiple zero; otherwise a single
/// simple zero is sought. Returns `None` when Newton leaves the cell.
#[allow(clippy::too_many_arguments)]
fn refine_in_cell<F>(
    ev: &Evaluator<F>,
    cell: &Cell,
    w: i64,
    mult: usize,
    scale: f64,
    params: &ZeroFinderParams,
    min_len: f64,
) -> Result<Option<Vec<Zero>>>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    if w as usize != mult {
        return Ok(None);
    }
    let step = params.fd_step * scale;
    let mut z = cell.center();
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        let f0 = (ev.f)(z)?;
        if f0.is_zero() {
            break;
        }
        let fp = (ev.f)(z + step)?;
        let fm = (ev.f)(z - step)?;
        // f'/f from ratios, safe against under- and overflow
        let logderiv = (fp.ratio(&f0) - fm.ratio(&f0)) / (2.0 * step);
        if !(logderiv.norm() > 0.0) || !logderiv.re.is_finite() {
            return Ok(None);
        }
        let dz = mult as f64 / logderiv;
        z -= dz;
        if !cell.contains(z) {
            return Ok(None);
        }
        // stop at roundoff: tiny steps, or steps that no longer shrink
        let size = dz.norm();
        if size < 1e-15 * scale.max(z.norm()) || (size < 1e-9 * scale && size > 0.5 * last) {
            break;
        }
        last = size;
    }
    let f0 = (ev.f)(z)?;
    // multiplicity from a small circle that stays inside the cell
    let r = (0.25 * cell.distance_to_boundary(z)).min(1e-3 * scale).max(10.0 * step);
    let m = if cell.distance_to_boundary(z) > r {
        winding_along(ev, &circle_path(z, r, 16), FRAC_PI_4, min_len).map_or(mult as i64, |(m, _)| m)
    } else {
        mult as i64
    };
    if m as usize != mult {
        return Ok(None);
    }
    let tolerance = match params.zero_tol {
        Some(t) => t,
        None => {
            // local magnitude at a fixed radius, independent of how far the
            // cell was split
            let mut l = circle_logs(ev, z, 1e-3 * scale)?;
            l.sort_by(f64::total_cmp);
            1e-9 * l[l.len() / 2].exp()
        }
    };
    let residual = if f0.is_zero() { 0.0 } else { f0.log_abs.exp() };
    if !(residual <= tolerance) {
        return Ok(None);
    }
    Ok(Some(vec![Zero { z, multiplicity: mult, residual, tolerance }]))
}

fn circle_logs<F>(ev: &Evaluator<F>, z: Complex64, r: f64) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Result<LogDet> + Sync,
{
    Ok(ev.eval_many(&circle_path(z, r, 8))?.iter().map(|v| v.log_abs).collect())
}
