//! Generating functions `S(y, y')` of return-map blocks in a tensor Chebyshev
//! basis: `dS/dy = eta` at the arrival, `-dS/dy' = eta'` at the departure.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{chebyshev_lobatto, chebyshev_values, chebyshev_with_derivative, lstsq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratingFunction {
    pub degree: usize,
    /// Arrival coordinate box.
    pub y_range: [f64; 2],
    /// Departure coordinate box.
    pub yp_range: [f64; 2],
    /// Coefficients of `T_a(u) T_b(v)` at index `a * (degree + 1) + b`.
    pub s_coefficients: Vec<f64>,
    pub tau_coefficients: Vec<f64>,
    /// Largest violation of the two gradient identities over the samples.
    pub residual: f64,
    pub value_residual: f64,
    pub tau_residual: f64,
    /// Smallest `|d2S/dy dy'|` over the samples.
    pub min_twist: f64,
}

/// One sample of a block: departure `(y', eta')`, arrival `(y, eta)`, the
/// action `S` along the connecting orbit and the return time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSample {
    pub departure: [f64; 2],
    pub arrival: [f64; 2],
    pub action: f64,
    pub tau: f64,
}

fn scaled(x: f64, r: [f64; 2]) -> f64 {
    (2.0 * x - r[0] - r[1]) / (r[1] - r[0])
}

impl GeneratingFunction {
    fn n(&self) -> usize {
        self.degree + 1
    }

    fn eval(&self, coef: &[f64], y: f64, yp: f64) -> f64 {
        let tu = chebyshev_values(scaled(y, self.y_range), self.degree);
        let tv = chebyshev_values(scaled(yp, self.yp_range), self.degree);
        let n = self.n();
        let mut s = 0.0;
        for a in 0..n {
            let mut row = 0.0;
            for b in 0..n {
                row += coef[a * n + b] * tv[b];
            }
            s += tu[a] * row;
        }
        s
    }

    pub fn s(&self, y: f64, yp: f64) -> f64 {
        self.eval(&self.s_coefficients, y, yp)
    }

    pub fn tau(&self, y: f64, yp: f64) -> f64 {
        self.eval(&self.tau_coefficients, y, yp)
    }

    /// `(dS/dy, dS/dy', d2S/dy dy')`.
    pub fn derivatives(&self, y: f64, yp: f64) -> (f64, f64, f64) {
        let (tu, du) = chebyshev_with_derivative(scaled(y, self.y_range), self.degree);
        let (tv, dv) = chebyshev_with_derivative(scaled(yp, self.yp_range), self.degree);
        let ku = 2.0 / (self.y_range[1] - self.y_range[0]);
        let kv = 2.0 / (self.yp_range[1] - self.yp_range[0]);
        let n = self.n();
        let (mut sy, mut syp, mut syyp) = (0.0, 0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                let c = self.s_coefficients[a * n + b];
                sy += c * du[a] * tv[b];
                syp += c * tu[a] * dv[b];
                syyp += c * du[a] * dv[b];
            }
        }
        (ku * sy, kv * syp, ku * kv * syyp)
    }
}

impl GeneratingFunction {
    /// Tensor Chebyshev interpolant of given `S(y, y')` and `tau(y, y')` on a
    /// box, for maps known in closed form.
    pub fn interpolate<S, T>(s: S, tau: T, degree: usize, y_range: [f64; 2], yp_range: [f64; 2]) -> Result<Self>
    where
        S: Fn(f64, f64) -> f64,
        T: Fn(f64, f64) -> f64,
    {
        if !(y_range[1] > y_range[0] && yp_range[1] > yp_range[0]) {
            return Err(Error::Parameter(format!("empty box {y_range:?} x {yp_range:?}")));
        }
        let n = degree + 1;
        let m = n + 2;
        let ys = chebyshev_lobatto(m, y_range[0], y_range[1]);
        let yps = chebyshev_lobatto(m, yp_range[0], yp_range[1]);
        let mut a = Mat::<f64>::zeros(m * m, n * n);
        let (mut sv, mut tv) = (Vec::with_capacity(m * m), Vec::with_capacity(m * m));
        for (i, &y) in ys.iter().enumerate() {
            let tu = chebyshev_values(scaled(y, y_range), degree);
            for (j, &yp) in yps.iter().enumerate() {
                let tw = chebyshev_values(scaled(yp, yp_range), degree);
                for p in 0..n {
                    for q in 0..n {
                        a[(i * m + j, p * n + q)] = tu[p] * tw[q];
                    }
                }
                sv.push(s(y, yp));
                tv.push(tau(y, yp));
            }
        }
        let mut g = GeneratingFunction {
            degree,
            y_range,
            yp_range,
            s_coefficients: lstsq(&a, &sv),
            tau_coefficients: lstsq(&a, &tv),
            residual: 0.0,
            value_residual: 0.0,
            tau_residual: 0.0,
            min_twist: f64::INFINITY,
        };
        for (i, &y) in ys.iter().enumerate() {
            for (j, &yp) in yps.iter().enumerate() {
                g.value_residual = g.value_residual.max((g.s(y, yp) - sv[i * m + j]).abs());
                g.tau_residual = g.tau_residual.max((g.tau(y, yp) - tv[i * m + j]).abs());
                g.min_twist = g.min_twist.min(g.derivatives(y, yp).2.abs());
            }
        }
        Ok(g)
    }
}

pub fn fit_generating_function(samples: &[BlockSample], degree: usize, twist_floor: f64) -> Result<GeneratingFunction> {
    let n = degree + 1;
    let ncoef = n * n;
    if samples.len() < 3 * ncoef {
        return Err(Error::Parameter(format!(
            "{} samples cannot fit {ncoef} coefficients (need {})",
            samples.len(),
            3 * ncoef
        )));
    }
    let mut y_range = [f64::INFINITY, f64::NEG_INFINITY];
    let mut yp_range = [f64::INFINITY, f64::NEG_INFINITY];
    for s in samples {
        y_range = [y_range[0].min(s.arrival[0]), y_range[1].max(s.arrival[0])];
        yp_range = [yp_range[0].min(s.departure[0]), yp_range[1].max(s.departure[0])];
    }
    if !(y_range[1] > y_range[0] && yp_range[1] > yp_range[0]) {
        return Err(Error::Parameter("block samples span no area in (y, y')".into()));
    }
    let ku = 2.0 / (y_range[1] - y_range[0]);
    let kv = 2.0 / (yp_range[1] - yp_range[0]);
    let m = samples.len();
    let mut a = Mat::<f64>::zeros(3 * m, ncoef);
    let mut rhs = vec![0.0; 3 * m];
    let mut av = Mat::<f64>::zeros(m, ncoef);
    let mut tau = vec![0.0; m];
    for (r, s) in samples.iter().enumerate() {
        let (tu, du) = chebyshev_with_derivative(scaled(s.arrival[0], y_range), degree);
        let (tv, dv) = chebyshev_with_derivative(scaled(s.departure[0], yp_range), degree);
        for p in 0..n {
            for q in 0..n {
                let k = p * n + q;
                a[(3 * r, k)] = tu[p] * tv[q];
                a[(3 * r + 1, k)] = ku * du[p] * tv[q];
                a[(3 * r + 2, k)] = kv * tu[p] * dv[q];
                av[(r, k)] = tu[p] * tv[q];
            }
        }
        rhs[3 * r] = s.action;
        rhs[3 * r + 1] = s.arrival[1];
        rhs[3 * r + 2] = -s.departure[1];
        tau[r] = s.tau;
    }
    let s_coefficients = lstsq(&a, &rhs);
    let tau_coefficients = lstsq(&av, &tau);
    let mut g = GeneratingFunction {
        degree,
        y_range,
        yp_range,
        s_coefficients,
        tau_coefficients,
        residual: 0.0,
        value_residual: 0.0,
        tau_residual: 0.0,
        min_twist: f64::INFINITY,
    };
    for s in samples {
        let (sy, syp, syyp) = g.derivatives(s.arrival[0], s.departure[0]);
        g.residual = g.residual.max((sy - s.arrival[1]).abs()).max((syp + s.departure[1]).abs());
        g.value_residual = g.value_residual.max((g.s(s.arrival[0], s.departure[0]) - s.action).abs());
        g.tau_residual = g.tau_residual.max((g.tau(s.arrival[0], s.departure[0]) - s.tau).abs());
        g.min_twist = g.min_twist.min(syyp.abs());
    }
    if !g.residual.is_finite() {
        return Err(Error::Numeric("generating-function fit produced non-finite values".into()));
    }
    if g.min_twist < twist_floor {
        return Err(Error::Twist { value: g.min_twist, floor: twist_floor });
    }
    Ok(g)
}
