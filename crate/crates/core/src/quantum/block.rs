use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::projector::{build_projector_with, ProjectorParams, SectionProjector};
use crate::error::{Error, Result};
use crate::linalg::{gauss_legendre, CMat};
use crate::section::{GeneratingFunction, ReturnMapData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantParams {
    /// Nodes per Nyquist interval of the kernel phase.
    pub oversampling: f64,
    pub min_nodes: usize,
    /// Fixed node count per block axis instead of the Nyquist estimate;
    /// rejected when below it.
    pub nodes: Option<usize>,
    pub twist_floor: f64,
    /// Largest `|z| / h` the blocks will be evaluated at; adds the
    /// return-time phase to the Nyquist estimate.
    pub z_scale: f64,
    /// Multiplies the semi-axes of each chart's trapped ellipse.
    pub ellipse_scale: f64,
    pub projector: ProjectorParams,
}

impl Default for QuantParams {
    fn default() -> Self {
        QuantParams {
            oversampling: 2.0,
            min_nodes: 24,
            nodes: None,
            twist_floor: 1e-3,
            z_scale: 5.0,
            ellipse_scale: 1.0,
            projector: ProjectorParams::default(),
        }
    }
}

/// One Gauss–Legendre axis of a block grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// z-independent data of the kernel quantization of one block `kappa_ji`.
#[derive(Debug, Clone)]
pub struct BlockKernel {
    pub source: usize,
    pub target: usize,
    pub h: f64,
    /// Arrival axis (on chart `target`).
    pub y: Axis,
    /// Departure axis (on chart `source`).
    pub yp: Axis,
    /// `w_n (2 pi h)^(-1/2) |S_yy'|^(1/2) exp(i S / h)` on the grid, row-major.
    base: Vec<Complex64>,
    tau: Vec<f64>,
    /// `u_m conj(phi_l(y_m))`, rank_j x n_y, row-major.
    left: Vec<Complex64>,
    /// `phi_k(y'_n)`, n_yp x rank_i, row-major.
    right: Vec<Complex64>,
    ranks: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct QuantumBlock {
    pub source: usize,
    pub target: usize,
    pub h: f64,
    pub z: Complex64,
    /// `r_target x r_source`.
    pub matrix: CMat,
}

fn max_abs_on_box<F: Fn(f64, f64) -> f64>(f: F, yr: [f64; 2], ypr: [f64; 2]) -> f64 {
    let k = 24;
    let mut m: f64 = 0.0;
    for a in 0..=k {
        for b in 0..=k {
            let y = yr[0] + (yr[1] - yr[0]) * a as f64 / k as f64;
            let yp = ypr[0] + (ypr[1] - ypr[0]) * b as f64 / k as f64;
            m = m.max(f(y, yp).abs());
        }
    }
    m
}

fn node_count(freq: f64, len: f64, params: &QuantParams) -> Result<usize> {
    let required = ((params.oversampling * freq * len / std::f64::consts::PI).ceil() as usize).max(params.min_nodes);
    match params.nodes {
        Some(n) if n < required => Err(Error::Aliasing { nodes: n, required }),
        Some(n) => Ok(n),
        None => Ok(required),
    }
}

impl BlockKernel {
    pub fn new(
        gf: &GeneratingFunction,
        target: &SectionProjector,
        source: &SectionProjector,
        h: f64,
        params: &QuantParams,
    ) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Parameter(format!("h = {h} must be positive")));
        }
        let (yr, ypr) = (gf.y_range, gf.yp_range);
        let sy = max_abs_on_box(|y, yp| gf.derivatives(y, yp).0, yr, ypr);
        let syp = max_abs_on_box(|y, yp| gf.derivatives(y, yp).1, yr, ypr);
        let d = 1e-6 * (yr[1] - yr[0]).max(ypr[1] - ypr[0]);
        let ty = max_abs_on_box(|y, yp| (gf.tau(y + d, yp) - gf.tau(y - d, yp)) / (2.0 * d), yr, ypr);
        let typ = max_abs_on_box(|y, yp| (gf.tau(y, yp + d) - gf.tau(y, yp - d)) / (2.0 * d), yr, ypr);
        let fy = (sy + target.center[1].abs() + target.semi_axes[1]) / h + params.z_scale * ty;
        let fyp = (syp + source.center[1].abs() + source.semi_axes[1]) / h + params.z_scale * typ;
        let ny = node_count(fy, yr[1] - yr[0], params)?;
        let nyp = node_count(fyp, ypr[1] - ypr[0], params)?;
        let (y, u) = gauss_legendre(ny, yr[0], yr[1]);
        let (yp, w) = gauss_legendre(nyp, ypr[0], ypr[1]);

        let pref = (2.0 * std::f64::consts::PI * h).powf(-0.5);
        let rows: Vec<Result<(Vec<Complex64>, Vec<f64>)>> = y
            .par_iter()
            .map(|&ym| {
                let mut k = Vec::with_capacity(nyp);
                let mut t = Vec::with_capacity(nyp);
                for (n, &ypn) in yp.iter().enumerate() {
                    let (_, _, twist) = gf.derivatives(ym, ypn);
                    if twist.abs() < params.twist_floor {
                        return Err(Error::Twist { value: twist.abs(), floor: params.twist_floor });
                    }
                    let s = gf.s(ym, ypn);
                    k.push(Complex64::from_polar(w[n] * pref * twist.abs().sqrt(), s / h));
                    t.push(gf.tau(ym, ypn));
                }
                Ok((k, t))
            })
            .collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        let base: Vec<Complex64> = rows.iter().flat_map(|r| r.0.iter().copied()).collect();
        let tau: Vec<f64> = rows.iter().flat_map(|r| r.1.iter().copied()).collect();
        let bt = target.basis_at(&y);
        let left: Vec<Complex64> =
            (0..target.rank).flat_map(|l| (0..ny).map(move |m| (l, m))).map(|(l, m)| bt[(m, l)].conj() * u[m]).collect();
        let bs = source.basis_at(&yp);
        let right: Vec<Complex64> =
            (0..nyp).flat_map(|n| (0..source.rank).map(move |k| (n, k))).map(|(n, k)| bs[(n, k)]).collect();
        Ok(BlockKernel {
            source: source.chart,
            target: target.chart,
            h,
            y: Axis { nodes: y, weights: u },
            yp: Axis { nodes: yp, weights: w },
            base,
            tau,
            left,
            right,
            ranks: (target.rank, source.rank),
        })
    }

    fn kernel_values(&self, z: Complex64) -> Vec<Complex64> {
        let iz = Complex64::i() * z / self.h;
        self.base.iter().zip(&self.tau).map(|(b, t)| b * (iz * t).exp()).collect()
    }

    /// Kernel matrix including the departure quadrature weights, so that
    /// `kernel(z) * psi(yp)` approximates the integral operator at the `y` nodes.
    pub fn kernel(&self, z: Complex64) -> CMat {
        let k = self.kernel_values(z);
        let nyp = self.yp.nodes.len();
        Mat::from_fn(self.y.nodes.len(), nyp, |m, n| k[m * nyp + n])
    }

    /// Compression `Pi_j K_ji(z) Pi_i` in the Hermite bases.
    pub fn quantize(&self, z: Complex64) -> QuantumBlock {
        let k = self.kernel_values(z);
        let (ny, nyp) = self.grid_size();
        let (rj, ri) = self.ranks;
        // K * right, then left * (K * right); plain loops beat a general
        // matmul at these sizes
        let mut kr = vec![Complex64::new(0.0, 0.0); ny * ri];
        for m in 0..ny {
            let row = &mut kr[m * ri..(m + 1) * ri];
            for n in 0..nyp {
                let kmn = k[m * nyp + n];
                for (acc, r) in row.iter_mut().zip(&self.right[n * ri..(n + 1) * ri]) {
                    *acc += kmn * r;
                }
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); rj * ri];
        for l in 0..rj {
            let row = &mut out[l * ri..(l + 1) * ri];
            for m in 0..ny {
                let a = self.left[l * ny + m];
                for (acc, v) in row.iter_mut().zip(&kr[m * ri..(m + 1) * ri]) {
                    *acc += a * v;
                }
            }
        }
        let matrix = Mat::from_fn(rj, ri, |l, k| out[l * ri + k]);
        QuantumBlock { source: self.source, target: self.target, h: self.h, z, matrix }
    }

    pub fn grid_size(&self) -> (usize, usize) {
        (self.y.nodes.len(), self.yp.nodes.len())
    }
}

#[derive(Debug, Clone)]
pub struct QuantumTransferOperator {
    pub z: Complex64,
    pub h: f64,
    pub ranks: Vec<usize>,
    /// Present blocks as `(target, source)`.
    pub blocks: Vec<(usize, usize)>,
    pub matrix: CMat,
}

impl QuantumTransferOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut o = vec![0];
        for r in &self.ranks {
            o.push(o.last().unwrap() + r);
        }
        o
    }
}

/// Places compressed blocks into the `J x J` block matrix.
pub fn assemble_m(blocks: &[QuantumBlock], ranks: &[usize], adjacency: &[Vec<usize>], z: Complex64, h: f64) -> Result<QuantumTransferOperator> {
    let j = ranks.len();
    if adjacency.len() != j {
        return Err(Error::Assembly(format!("adjacency lists {} charts, projectors {j}", adjacency.len())));
    }
    let mut expected: Vec<(usize, usize)> = adjacency
        .iter()
        .enumerate()
        .flat_map(|(i, ts)| ts.iter().map(move |&t| (t, i)))
        .collect();
    let mut present: Vec<(usize, usize)> = blocks.iter().map(|b| (b.target, b.source)).collect();
    expected.sort_unstable();
    present.sort_unstable();
    if expected != present {
        return Err(Error::Assembly(format!("blocks {present:?} do not match the adjacency {expected:?}")));
    }
    let mut off = vec![0usize];
    for r in ranks {
        off.push(off.last().unwrap() + r);
    }
    let dim = off[j];
    let mut m = Mat::from_fn(dim, dim, |_, _| Complex64::new(0.0, 0.0));
    for b in blocks {
        if b.target >= j || b.source >= j {
            return Err(Error::Assembly(format!("block ({}, {}) outside {j} charts", b.target, b.source)));
        }
        if b.matrix.nrows() != ranks[b.target] || b.matrix.ncols() != ranks[b.source] {
            return Err(Error::Assembly(format!(
                "block ({}, {}) is {}x{}, ranks are {}x{}",
                b.target,
                b.source,
                b.matrix.nrows(),
                b.matrix.ncols(),
                ranks[b.target],
                ranks[b.source]
            )));
        }
        for r in 0..b.matrix.nrows() {
            for c in 0..b.matrix.ncols() {
                m[(off[b.target] + r, off[b.source] + c)] = b.matrix[(r, c)];
            }
        }
    }
    Ok(QuantumTransferOperator { z, h, ranks: ranks.to_vec(), blocks: present, matrix: m })
}

/// Projectors and block kernels of a fitted return map at one `h`.
#[derive(Debug, Clone)]
pub struct QuantumSystem {
    pub h: f64,
    pub projectors: Vec<SectionProjector>,
    pub kernels: Vec<BlockKernel>,
    pub adjacency: Vec<Vec<usize>>,
}

impl QuantumSystem {
    pub fn new(data: &ReturnMapData, h: f64, params: &QuantParams) -> Result<Self> {
        if !(params.ellipse_scale > 0.0) {
            return Err(Error::Parameter(format!("ellipse scale must be positive, got {}", params.ellipse_scale)));
        }
        let projectors = data
            .charts
            .iter()
            .map(|c| {
                let axes = c.trapped.semi_axes.map(|a| a * params.ellipse_scale);
                build_projector_with(c.index, c.trapped.center, axes, h, &params.projector)
            })
            .collect::<Result<Vec<_>>>()?;
        let kernels = data
            .blocks
            .par_iter()
            .map(|b| {
                let gf = b
                    .generating_function
                    .as_ref()
                    .ok_or_else(|| Error::Parameter(format!("block ({}, {}) has no generating function", b.target, b.source)))?;
                BlockKernel::new(gf, &projectors[b.target], &projectors[b.source], h, params)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantumSystem { h, projectors, kernels, adjacency: data.j_plus.clone() })
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projectors.iter().map(|p| p.rank).collect()
    }

    pub fn dim(&self) -> usize {
        self.ranks().iter().sum()
    }

    pub fn operator(&self, z: Complex64) -> Result<QuantumTransferOperator> {
        let blocks: Vec<QuantumBlock> = self.kernels.par_iter().map(|k| k.quantize(z)).collect();
        assemble_m(&blocks, &self.ranks(), &self.adjacency, z, self.h)
    }

    /// `M(z)` as a plain matrix, for determinant and eigenvalue scans.
    pub fn matrix(&self, z: Complex64) -> Result<CMat> {
        Ok(self.operator(z)?.matrix)
    }
}
