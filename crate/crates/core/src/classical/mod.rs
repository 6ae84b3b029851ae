//! Weighted transfer operators, topological pressure and Ruelle–Pollicott
//! resonances.
//!
//! `L_f phi(x) = sum over kappa(x') = x of exp(f(x')) phi(x')`. Interval
//! models are discretized by Chebyshev collocation (spectrally accurate) or
//! Ulam's method; sampled return maps of a section only by Ulam's method, and
//! only their leading eigenvalue is trusted.

pub mod model;
pub mod pressure;
pub mod transfer;

use std::io::Write;

pub use model::{Branch, ModelKind, Observable, SectionModel, SymbolicModel};
pub use pressure::{
    cycle_expansion_pressure, flow_pressure, orbit_pressure, ruelle_resonances, topological_pressure, PressureReport,
};
pub use transfer::{build_transfer_matrix, Discretization, TransferMatrix};

use crate::error::Result;

impl PressureReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Eigenvalues as `re,im,modulus` rows, largest modulus first.
pub fn write_spectrum_csv<W: Write>(m: &TransferMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["re", "im", "modulus"])?;
    for l in m.eigenvalues()? {
        out.write_record([format!("{:.17e}", l.re), format!("{:.17e}", l.im), format!("{:.17e}", l.norm())])?;
    }
    out.flush()?;
    Ok(())
}
