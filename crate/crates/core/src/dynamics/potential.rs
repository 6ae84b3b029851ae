use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: [f64; 2],
    pub amplitude: f64,
    pub width: f64,
}

impl GaussianBump {
    fn value_and_gradient(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let s2 = self.width * self.width;
        let v = self.amplitude * (-(dx * dx + dy * dy) / (2.0 * s2)).exp();
        (v, [-v * dx / s2, -v * dy / s2])
    }
}

/// Sum of Gaussian bumps multiplied by a C-infinity radial cutoff that is 1
/// inside `cutoff_inner` and exactly 0 beyond `support_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPotential {
    pub bumps: Vec<GaussianBump>,
    pub support_radius: f64,
    pub cutoff_inner: f64,
}

impl GaussianPotential {
    pub fn new(bumps: Vec<GaussianBump>, support_radius: f64) -> Result<Self> {
        Self::with_cutoff(bumps, support_radius, 0.8 * support_radius)
    }

    pub fn with_cutoff(bumps: Vec<GaussianBump>, support_radius: f64, cutoff_inner: f64) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::Parameter(format!("support radius must be positive, got {support_radius}")));
        }
        if !(cutoff_inner > 0.0 && cutoff_inner < support_radius) {
            return Err(Error::Parameter(format!(
                "cutoff_inner must lie in (0, {support_radius}), got {cutoff_inner}"
            )));
        }
        for (k, b) in bumps.iter().enumerate() {
            if !(b.width > 0.0) || !b.amplitude.is_finite() || !b.center.iter().all(|c| c.is_finite()) {
                return Err(Error::Parameter(format!("bump #{k} is malformed: {b:?}")));
            }
        }
        Ok(GaussianPotential { bumps, support_radius, cutoff_inner })
    }

    /// Free motion: no bumps at all.
    pub fn free(support_radius: f64) -> Self {
        GaussianPotential { bumps: Vec::new(), support_radius, cutoff_inner: 0.8 * support_radius }
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.value_and_gradient(x).0
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        self.value_and_gradient(x).1
    }

    pub fn value_and_gradient(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let r = x[0].hypot(x[1]);
        if r >= self.support_radius || self.bumps.is_empty() {
            return (0.0, [0.0, 0.0]);
        }
        let mut v = 0.0;
        let mut g = [0.0, 0.0];
        for b in &self.bumps {
            let (bv, bg) = b.value_and_gradient(x);
            v += bv;
            g[0] += bg[0];
            g[1] += bg[1];
        }
        if r <= self.cutoff_inner {
            return (v, g);
        }
        let (chi, dchi) = self.cutoff(r);
        // d(chi(r))/dx = chi'(r) x / r
        (
            chi * v,
            [chi * g[0] + dchi * v * x[0] / r, chi * g[1] + dchi * v * x[1] / r],
        )
    }

    fn cutoff(&self, r: f64) -> (f64, f64) {
        let span = self.support_radius - self.cutoff_inner;
        let t = (self.support_radius - r) / span;
        let (s, ds) = smooth_step(t);
        (s, -ds / span)
    }
}

/// `g(t) / (g(t) + g(1 - t))` with `g(t) = exp(-1/t)`, and its derivative.
fn smooth_step(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let g = |u: f64| (-1.0 / u).exp();
    let dg = |u: f64| (-1.0 / u).exp() / (u * u);
    let a = g(t);
    let b = g(1.0 - t);
    let s = a / (a + b);
    let ds = (dg(t) * b + a * dg(1.0 - t)) / ((a + b) * (a + b));
    (s, ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_bumps() -> GaussianPotential {
        let bumps = (0..3)
            .map(|k| {
                let th = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                GaussianBump { center: [1.5 * th.cos(), 1.5 * th.sin()], amplitude: 1.0, width: 0.5 }
            })
            .collect();
        GaussianPotential::new(bumps, 5.0).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences_inside_cutoff_band() {
        let p = three_bumps();
        for &x in &[[0.3, 0.1], [3.2, 2.1], [-2.9, -2.6], [0.0, 4.4]] {
            let g = p.gradient(x);
            let e = 1e-6;
            for d in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[d] += e;
                xm[d] -= e;
                let fd = (p.value(xp) - p.value(xm)) / (2.0 * e);
                assert!((fd - g[d]).abs() < 1e-8, "{x:?} {d}: {fd} vs {}", g[d]);
            }
        }
    }

    #[test]
    fn vanishes_outside_support() {
        let p = three_bumps();
        for k in 0..360 {
            let th = k as f64 * std::f64::consts::PI / 180.0;
            for r in [5.0, 5.0 + 1e-9, 7.5] {
                let x = [r * th.cos(), r * th.sin()];
                let (v, g) = p.value_and_gradient(x);
                assert!(v.abs() < 1e-14 && g[0].abs() < 1e-14 && g[1].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn smooth_step_is_monotone() {
        let mut last = 0.0;
        for k in 0..=100 {
            let (s, ds) = smooth_step(k as f64 / 100.0);
            assert!(s >= last && ds >= 0.0);
            last = s;
        }
    }
}
