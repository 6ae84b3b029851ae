//! Resonances as zeros of the dynamical zeta function `det(I - M(z))`.

pub mod zeros;

use std::io::Write;

use faer::MatRef;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, log_det, LogDet};

pub use zeros::{find_zeros, Domain, ResonanceSet, Zero, ZeroFinderParams};

/// `det(I - M)` in log-magnitude form.
pub fn zeta(m: MatRef<'_, Complex64>) -> Result<LogDet> {
    if m.nrows() != m.ncols() {
        return Err(Error::Parameter(format!("M is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let a = identity(m.nrows()) - m;
    Ok(log_det(a.as_ref()))
}

/// Zeros of `det(I - M(z))` for a matrix-valued builder.
pub fn zeta_zeros<B>(builder: B, domain: Domain, params: &ZeroFinderParams) -> Result<ResonanceSet>
where
    B: Fn(Complex64) -> Result<faer::Mat<Complex64>> + Sync,
{
    find_zeros(|z| zeta(builder(z)?.as_ref()), domain, params)
}

impl ResonanceSet {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_provenance(mut self, p: &str) -> Self {
        self.provenance = p.to_string();
        self
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["re", "im", "multiplicity", "residual"])?;
        for z in &self.zeros {
            out.write_record([
                format!("{:.17e}", z.z.re),
                format!("{:.17e}", z.z.im),
                z.multiplicity.to_string(),
                format!("{:.6e}", z.residual),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One point of a Weyl-law fit: a problem size (`N` or `1/h`) and the number
/// of resonances counted at that size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub size: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub samples: Vec<DensitySample>,
}

/// Least-squares slope of `log count` against `log size`.
pub fn resonance_density(samples: &[DensitySample]) -> Result<DensityFit> {
    if samples.len() < 4 {
        return Err(Error::Parameter(format!("a density fit needs at least 4 sizes, got {}", samples.len())));
    }
    if let Some(s) = samples.iter().find(|s| s.count == 0 || !(s.size > 0.0)) {
        return Err(Error::Parameter(format!("cannot fit an empty or degenerate resonance set: {s:?}")));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.size.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| (s.count as f64).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("all sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(DensityFit { exponent: slope, intercept, residual: (rss / n).sqrt(), samples: samples.to_vec() })
}

/// Weyl samples from resonance sets: size `1/h`, count the total multiplicity.
pub fn density_samples(sets: &[ResonanceSet]) -> Result<Vec<DensitySample>> {
    sets.iter()
        .map(|s| {
            let h = s.h.ok_or_else(|| Error::Parameter("resonance set without h".into()))?;
            Ok(DensitySample { size: 1.0 / h, count: s.total_multiplicity() })
        })
        .collect()
}

/// Number of eigenvalues of modulus above `threshold`.
pub fn count_above(eigs: &[Complex64], threshold: f64) -> usize {
    eigs.iter().filter(|l| l.norm() > threshold).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// `min |Im z| / h` over the set.
    pub gap: f64,
    /// Topological pressure `P(1/2)` of the classical model.
    pub pressure: f64,
    /// Classical lower bound `max(0, -P(1/2))` for the gap.
    pub bound: f64,
    /// `gap - bound`; negative means the bound is not met at this `h`.
    pub difference: f64,
}

pub fn spectral_gap_report(set: &ResonanceSet, pressure: f64) -> Result<GapReport> {
    let h = set.h.ok_or_else(|| Error::Parameter("resonance set without h".into()))?;
    if set.zeros.is_empty() {
        return Err(Error::Parameter("no resonances to measure a gap".into()));
    }
    let gap = set.zeros.iter().map(|z| z.z.im.abs() / h).fold(f64::INFINITY, f64::min);
    let bound = (-pressure).max(0.0);
    Ok(GapReport { gap, pressure, bound, difference: gap - bound })
}
