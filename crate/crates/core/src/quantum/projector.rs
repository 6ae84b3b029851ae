use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gauss_legendre, CMat};
use crate::section::SectionChart;

/// `#{k >= 0 : (2k + 1) h <= a b}`, the number of non-positive levels of the
/// Weyl quantization of `(y - y0)^2 / a^2 + (eta - eta0)^2 / b^2 - 1`.
pub fn projector_rank(a: f64, b: f64, h: f64) -> usize {
    let x = a * b / (2.0 * h) + 0.5;
    // levels sitting exactly on the threshold count
    (x * (1.0 + 1e-12)).floor().max(0.0) as usize
}

/// Hermite functions `psi_0 .. psi_{n-1}` at `u`, L2-normalized in `u`.
pub fn hermite_functions(u: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * u * u).exp();
    if n > 1 {
        out[1] = std::f64::consts::SQRT_2 * u * out[0];
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * u * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectorParams {
    pub oversampling: f64,
    /// Grid reaches this many oscillator lengths beyond the ellipse.
    pub tail: f64,
    pub min_nodes: usize,
}

impl Default for ProjectorParams {
    fn default() -> Self {
        ProjectorParams { oversampling: 2.0, tail: 10.0, min_nodes: 32 }
    }
}

/// Range of `1_{R-}(q^w)` for the elliptic confinement symbol of a chart.
#[derive(Debug, Clone)]
pub struct SectionProjector {
    pub chart: usize,
    pub h: f64,
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub rank: usize,
    /// Oscillator length `sqrt(h a / b)`.
    pub length: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Orthonormal basis on the grid (nodes x rank).
    pub basis: CMat,
    /// Basis = raw Hermite functions times this upper-triangular matrix.
    coefficients: Mat<f64>,
}

pub fn build_projector(chart: &SectionChart, h: f64) -> Result<SectionProjector> {
    build_projector_with(chart.index, chart.trapped.center, chart.trapped.semi_axes, h, &ProjectorParams::default())
}

pub fn build_projector_with(
    chart: usize,
    center: [f64; 2],
    semi_axes: [f64; 2],
    h: f64,
    params: &ProjectorParams,
) -> Result<SectionProjector> {
    let [a, b] = semi_axes;
    if !(h > 0.0) || !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Parameter(format!("projector needs h, a, b > 0 (h = {h}, a = {a}, b = {b})")));
    }
    let rank = projector_rank(a, b, h);
    if rank == 0 {
        return Err(Error::Resolution { h });
    }
    let length = (h * a / b).sqrt();
    let half = a + params.tail * length;
    let (lo, hi) = (center[0] - half, center[0] + half);
    // largest local wavenumber: the basis phase plus the top oscillator level
    let k_max = (center[1].abs() + b) / h;
    let n = ((params.oversampling * k_max * (hi - lo) / std::f64::consts::PI).ceil() as usize + rank).max(params.min_nodes);
    let (nodes, weights) = gauss_legendre(n, lo, hi);
    let raw = raw_basis(&nodes, center, length, h, rank);

    // modified Gram-Schmidt, twice, in the quadrature inner product;
    // the same column operations are applied to an identity matrix
    let mut q = raw.clone();
    let mut coef = Mat::from_fn(rank, rank, |i, j| if i == j { 1.0 } else { 0.0 });
    for _pass in 0..2 {
        for k in 0..rank {
            for j in 0..k {
                let mut dot = Complex64::new(0.0, 0.0);
                for m in 0..n {
                    dot += q[(m, j)].conj() * q[(m, k)] * weights[m];
                }
                // basis functions share one phase factor, so overlaps are real
                let d = dot.re;
                for m in 0..n {
                    let v = q[(m, j)];
                    q[(m, k)] -= v * d;
                }
                for i in 0..rank {
                    coef[(i, k)] -= coef[(i, j)] * d;
                }
            }
            let norm = (0..n).map(|m| q[(m, k)].norm_sqr() * weights[m]).sum::<f64>().sqrt();
            if !(norm > 1e-8) {
                return Err(Error::Numeric(format!("Hermite function {k} is not resolved on the chart grid")));
            }
            for m in 0..n {
                q[(m, k)] /= norm;
            }
            for i in 0..rank {
                coef[(i, k)] /= norm;
            }
        }
    }
    Ok(SectionProjector {
        chart,
        h,
        center,
        semi_axes,
        rank,
        length,
        nodes,
        weights,
        basis: q,
        coefficients: coef,
    })
}

/// Scaled Hermite functions `psi_k((y - y0)/l) / sqrt(l)` with the phase
/// `exp(i eta0 (y - y0) / h)`.
fn raw_basis(ys: &[f64], center: [f64; 2], length: f64, h: f64, rank: usize) -> CMat {
    let mut m = Mat::from_fn(ys.len(), rank, |_, _| Complex64::new(0.0, 0.0));
    let s = length.sqrt();
    for (r, &y) in ys.iter().enumerate() {
        let hf = hermite_functions((y - center[0]) / length, rank);
        let phase = Complex64::from_polar(1.0, center[1] * (y - center[0]) / h);
        for k in 0..rank {
            m[(r, k)] = phase * (hf[k] / s);
        }
    }
    m
}

impl SectionProjector {
    /// Orthonormal basis functions evaluated at arbitrary points (len x rank).
    pub fn basis_at(&self, ys: &[f64]) -> CMat {
        let raw = raw_basis(ys, self.center, self.length, self.h, self.rank);
        let c = self.coefficients.as_ref();
        Mat::from_fn(ys.len(), self.rank, |i, k| {
            let mut v = Complex64::new(0.0, 0.0);
            for j in 0..=k {
                v += raw[(i, j)] * c[(j, k)];
            }
            v
        })
    }

    /// `W^(1/2) Pi W^(-1/2)` on the grid, which is the projector in
    /// coordinates where the quadrature inner product is Euclidean.
    pub fn matrix(&self) -> CMat {
        let n = self.nodes.len();
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let bt = Mat::from_fn(n, self.rank, |m, k| self.basis[(m, k)] * sw[m]);
        &bt * bt.adjoint()
    }

    /// Upper-triangular `C` with `basis = raw Hermite functions * C`; the
    /// identity up to quadrature error when the grid resolves the basis.
    pub fn coefficients(&self) -> &Mat<f64> {
        &self.coefficients
    }

    /// Coordinates in the basis of a function sampled on the grid.
    pub fn coordinates(&self, values: &[Complex64]) -> Vec<Complex64> {
        (0..self.rank)
            .map(|k| (0..self.nodes.len()).map(|m| self.basis[(m, k)].conj() * values[m] * self.weights[m]).sum())
            .collect()
    }
}
