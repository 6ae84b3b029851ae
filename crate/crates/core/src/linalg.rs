//! Dense linear algebra and quadrature helpers shared by every module.

use faer::linalg::solvers::SolveLstsq;
use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

/// Determinant stored as `exp(log_abs) * phase` so that it survives under-
/// and overflow at large dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: Complex64,
}

impl LogDet {
    pub fn zero() -> Self {
        LogDet { log_abs: f64::NEG_INFINITY, phase: Complex64::new(1.0, 0.0) }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    pub fn value(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.phase * self.log_abs.exp()
    }

    /// `self / other` evaluated without forming either magnitude.
    pub fn ratio(&self, other: &LogDet) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.phase / other.phase * (self.log_abs - other.log_abs).exp()
    }
}

/// Determinant by LU factorization with partial pivoting.
pub fn log_det(m: MatRef<'_, Complex64>) -> LogDet {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut a: Vec<Complex64> = Vec::with_capacity(n * n);
    // row-major working copy
    for i in 0..n {
        for j in 0..n {
            a.push(m[(i, j)]);
        }
    }
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm();
        for i in k + 1..n {
            let v = a[i * n + k].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return LogDet::zero();
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            phase = -phase;
        }
        let pivot = a[k * n + k];
        log_abs += best.ln();
        phase *= pivot / best;
        let inv = pivot.inv();
        for i in k + 1..n {
            let f = a[i * n + k] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = a[k * n + j];
                a[i * n + j] -= f * u;
            }
        }
    }
    LogDet { log_abs, phase: phase / phase.norm() }
}

pub fn eigenvalues(m: MatRef<'_, Complex64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.eigenvalues()
        .map_err(|e| Error::Numeric(format!("eigenvalue iteration failed: {e:?}")))
}

pub fn spectral_radius(m: MatRef<'_, Complex64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Largest singular value.
pub fn op_norm(m: MatRef<'_, Complex64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let s = m
        .singular_values()
        .map_err(|e| Error::Numeric(format!("svd failed: {e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

pub fn max_abs_diff(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// Column-pivoted QR least squares `min |A x - b|`.
pub fn lstsq(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = a.col_piv_qr().solve_lstsq(&rhs);
    (0..a.ncols()).map(|i| x[(i, 0)]).collect()
}

/// Gauss–Legendre nodes and weights on `[lo, hi]`.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = mid - half * z;
        x[n - 1 - i] = mid + half * z;
        w[i] = half * wi;
        w[n - 1 - i] = half * wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// `T_0(u) .. T_deg(u)`.
pub fn chebyshev_values(u: f64, deg: usize) -> Vec<f64> {
    let mut t = vec![0.0; deg + 1];
    t[0] = 1.0;
    if deg >= 1 {
        t[1] = u;
    }
    for k in 2..=deg {
        t[k] = 2.0 * u * t[k - 1] - t[k - 2];
    }
    t
}

/// Values and first derivatives `T_k'(u)` for `k = 0..=deg`.
pub fn chebyshev_with_derivative(u: f64, deg: usize) -> (Vec<f64>, Vec<f64>) {
    let t = chebyshev_values(u, deg);
    let mut d = vec![0.0; deg + 1];
    if deg >= 1 {
        d[1] = 1.0;
    }
    // T_{k}' = 2 T_{k-1} + (k / (k - 2)) T_{k-2}' for k >= 3, T_2' = 4u.
    for k in 2..=deg {
        d[k] = if k == 2 {
            4.0 * u
        } else {
            2.0 * k as f64 * t[k - 1] + (k as f64 / (k as f64 - 2.0)) * d[k - 2]
        };
    }
    (t, d)
}

/// Chebyshev points of the second kind on `[lo, hi]`, in increasing order.
pub fn chebyshev_lobatto(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|j| {
            let u = -(std::f64::consts::PI * j as f64 / (n - 1) as f64).cos();
            lo + 0.5 * (u + 1.0) * (hi - lo)
        })
        .collect()
}

/// Lagrange basis values `l_k(x)` at Chebyshev–Lobatto nodes via the
/// barycentric formula.
pub fn barycentric_basis(nodes: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    let weight = |j: usize| {
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n - 1 {
            0.5 * s
        } else {
            s
        }
    };
    let mut out = vec![0.0; n];
    for (j, &xj) in nodes.iter().enumerate() {
        if x == xj {
            out[j] = 1.0;
            return out;
        }
    }
    let mut denom = 0.0;
    for (j, &xj) in nodes.iter().enumerate() {
        let t = weight(j) / (x - xj);
        out[j] = t;
        denom += t;
    }
    for v in &mut out {
        *v /= denom;
    }
    out
}
