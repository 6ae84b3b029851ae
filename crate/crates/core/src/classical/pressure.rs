use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{ModelKind, Observable, SymbolicModel};
use super::transfer::{build_transfer_matrix, section_sparse, Discretization};
use crate::dynamics::billiard::{prime_itineraries, DiskConfiguration};
use crate::error::{Error, Result};
use crate::resonances::{find_zeros, zeta, Domain, ResonanceSet, ZeroFinderParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureReport {
    pub model: serde_json::Value,
    pub discretization: Discretization,
    pub weight: Observable,
    pub value: f64,
    /// Value at twice the resolution.
    pub refined: f64,
    /// `|value - refined|`.
    pub error_estimate: f64,
}

/// Log spectral radius of the discretized `L_{f - s tau}`.
fn log_radius(model: &SymbolicModel, f: &Observable, disc: Discretization, roof_s: Option<(&Observable, f64)>) -> Result<f64> {
    let rz = roof_s.map(|(r, s)| (r, Complex64::new(s, 0.0)));
    let rho = match (&model.kind, disc) {
        (ModelKind::Section(s), Discretization::Ulam { cells }) => {
            if cells < 8 {
                return Err(Error::Parameter(format!("resolution {cells} is below 8")));
            }
            f.check(model.alphabet())?;
            section_sparse(s, f, rz, cells)?.perron_root()?
        }
        _ => {
            let m = build_transfer_matrix(model, f, disc, rz)?;
            m.eigenvalues()?.first().map(|l| l.norm()).unwrap_or(0.0)
        }
    };
    if !(rho > 0.0) {
        return Err(Error::Numeric("transfer matrix has zero spectral radius (nothing is trapped)".into()));
    }
    Ok(rho.ln())
}

pub fn topological_pressure(model: &SymbolicModel, f: &Observable, disc: Discretization) -> Result<PressureReport> {
    let value = log_radius(model, f, disc, None)?;
    let refined = log_radius(model, f, disc.doubled(), None)?;
    Ok(PressureReport {
        model: model.descriptor(),
        discretization: disc,
        weight: f.clone(),
        value,
        refined,
        error_estimate: (value - refined).abs(),
    })
}

/// Largest number of symbol words visited by the orbit enumeration.
const ORBIT_BUDGET: f64 = 5e7;

/// `(1/T) log Z_T` where `Z_T` sums `exp(S_T f)` over the points of exact
/// period `T`, each the fixed point of a composition of inverse branches.
pub fn orbit_pressure(model: &SymbolicModel, f: &Observable, t_max: usize) -> Result<f64> {
    let ModelKind::Interval { branches, .. } = &model.kind else {
        return Err(Error::Model("periodic orbits are enumerated on interval models only".into()));
    };
    if t_max == 0 {
        return Err(Error::Parameter("period must be positive".into()));
    }
    f.check(model.alphabet())?;
    let j = model.alphabet();
    if (j as f64).powi(t_max as i32) > ORBIT_BUDGET {
        return Err(Error::Budget(format!("{j}^{t_max} symbol words exceed the enumeration budget")));
    }
    // weighted branch table: table[i][k] = weight of i -> k
    let mut table = vec![vec![None; j]; j];
    for b in branches {
        table[b.source][b.target] = Some((f.on_branch(b), b.slope, b.offset));
    }
    let mut terms: Vec<f64> = Vec::new();
    let mut word = Vec::with_capacity(t_max + 1);
    for start in 0..j {
        word.clear();
        word.push(start);
        enumerate(&table, t_max, &mut word, 0.0, &mut terms);
    }
    if terms.is_empty() {
        return Err(Error::Numeric(format!("no orbits of period {t_max}")));
    }
    // log-sum-exp
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    Ok((top + sum.ln()) / t_max as f64)
}

fn enumerate(table: &[Vec<Option<(f64, f64, f64)>>], t: usize, word: &mut Vec<usize>, acc: f64, out: &mut Vec<f64>) {
    let last = *word.last().expect("non-empty word");
    if word.len() == t {
        // close the cycle; the fixed point exists because every branch
        // contracts, and the weight of an affine branch does not depend on it
        if let Some((w, _, _)) = table[last][word[0]] {
            out.push(acc + w);
        }
        return;
    }
    for next in 0..table.len() {
        if let Some((w, _, _)) = table[last][next] {
            word.push(next);
            enumerate(table, t, word, acc + w, out);
            word.pop();
        }
    }
}

/// Root `s` of `P(f - s tau) = 0`, bracketed and refined by Illinois
/// regula falsi to 1e-10.
pub fn flow_pressure(model: &SymbolicModel, f: &Observable, roof: &Observable, disc: Discretization) -> Result<f64> {
    let g = |s: f64| log_radius(model, f, disc, Some((roof, s)));
    let (mut a, mut ga) = (0.0, g(0.0)?);
    if ga == 0.0 {
        return Ok(0.0);
    }
    // P decreases in s when tau > 0
    let mut step = if ga > 0.0 { 1.0 } else { -1.0 };
    let (mut b, mut gb) = (a + step, g(a + step)?);
    let mut expansions = 0;
    while ga.signum() == gb.signum() {
        expansions += 1;
        if expansions > 60 || !gb.is_finite() {
            return Err(Error::Bracket { lo: a.min(b), hi: a.max(b) });
        }
        a = b;
        ga = gb;
        step *= 2.0;
        b = a + step;
        gb = g(b)?;
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * gb - b * ga) / (gb - ga);
        let gc = g(c)?;
        if gc == 0.0 || (b - a).abs() < 1e-12 {
            return Ok(c);
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
        if gc.abs() < 1e-14 {
            return Ok(c);
        }
    }
    let c = 0.5 * (a + b);
    if (b - a).abs() < 1e-10 {
        Ok(c)
    } else {
        Err(Error::Numeric(format!("flow pressure did not converge in [{a}, {b}]")))
    }
}

/// Zeros of `z -> det(1 - L_{f - z tau})` on an interval model.
pub fn ruelle_resonances(
    model: &SymbolicModel,
    f: &Observable,
    roof: &Observable,
    domain: Domain,
    degree: usize,
    params: &ZeroFinderParams,
) -> Result<ResonanceSet> {
    if !matches!(model.kind, ModelKind::Interval { .. }) {
        return Err(Error::Model("Ruelle resonances need an analytic model".into()));
    }
    let disc = Discretization::Collocation { degree };
    let set = find_zeros(
        |z| {
            let m = build_transfer_matrix(model, f, disc, Some((roof, z)))?;
            zeta(m.entries.as_ref())
        },
        domain,
        params,
    )?;
    Ok(set.with_provenance(&format!("det(1 - L_(f - z tau)) on {}, collocation degree {degree}", model.name)))
}

/// Flow pressure of an open disk billiard at unit speed from the cycle
/// expansion of `prod_p (1 - exp(-s L_p) |Lambda_p|^-beta)`, truncated at
/// cycles of `max_len` bounces. `beta = 1` gives minus the escape rate.
pub fn cycle_expansion_pressure(config: &DiskConfiguration, beta: f64, max_len: usize) -> Result<f64> {
    if max_len < 2 || max_len > 12 {
        return Err(Error::Parameter(format!("cycle length {max_len} outside 2..=12")));
    }
    let alphabet = config.disks.len();
    let mut cycles: Vec<(usize, f64, f64)> = Vec::new();
    for n in 2..=max_len {
        for it in prime_itineraries(alphabet, n) {
            match config.periodic_orbit(&it, 1.0) {
                Ok(p) => cycles.push((n, p.length, p.expansion.ln())),
                // pruned (shadowed) itineraries are not orbits
                Err(Error::Numeric(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    // 1/zeta at z = 1 from the product truncated at total length max_len
    let inv_zeta = |s: f64| {
        let mut poly = vec![0.0; max_len + 1];
        poly[0] = 1.0;
        for &(n, len, log_lambda) in &cycles {
            let t = (-s * len - beta * log_lambda).exp();
            for k in (n..=max_len).rev() {
                poly[k] -= t * poly[k - n];
            }
        }
        poly.iter().sum::<f64>()
    };
    // The leading zero is the largest real zero; truncation adds spurious
    // ones further left, so scan downwards from where 1/zeta is near 1.
    let mut hi = 10.0;
    if !(inv_zeta(hi) > 0.0) {
        return Err(Error::Bracket { lo: hi, hi });
    }
    let mut lo = hi;
    loop {
        lo -= 0.01;
        if inv_zeta(lo) <= 0.0 {
            break;
        }
        if lo < -50.0 {
            return Err(Error::Bracket { lo, hi: 10.0 });
        }
        hi = lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inv_zeta(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
