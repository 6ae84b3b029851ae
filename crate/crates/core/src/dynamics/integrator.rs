//! Adaptive Dormand–Prince 8(5,3) stepping with energy monitoring, plus a
//! fixed-step sixth-order symplectic composition for long runs.
//!
//! The state carries the reduced action `W = ∫ ξ·dx` as a fifth component so
//! that section returns can report the generating function directly.

use super::potential::GaussianPotential;
use super::tableau;
use crate::error::{Error, Result};

pub type State = [f64; 5];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Adaptive,
    /// Fixed step symplectic composition; `dt` is the step length.
    Symplectic { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegratorConfig {
    pub tol: f64,
    pub method: Method,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn adaptive(tol: f64) -> Self {
        IntegratorConfig { tol, method: Method::Adaptive, max_steps: 2_000_000 }
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::adaptive(1e-10)
    }
}

pub(crate) fn energy(p: &GaussianPotential, s: &State) -> f64 {
    0.5 * (s[2] * s[2] + s[3] * s[3]) + p.value([s[0], s[1]])
}

fn rhs(p: &GaussianPotential, s: &State) -> State {
    let g = p.gradient([s[0], s[1]]);
    [s[2], s[3], -g[0], -g[1], s[2] * s[2] + s[3] * s[3]]
}

fn axpy(s: &State, h: f64, coeffs: &[f64], k: &[State]) -> State {
    let mut out = *s;
    for (c, kk) in coeffs.iter().zip(k) {
        if *c == 0.0 {
            continue;
        }
        for d in 0..5 {
            out[d] += h * c * kk[d];
        }
    }
    out
}

/// One DOP853 step without error control. Exact for free flight.
pub(crate) fn dop853_step(p: &GaussianPotential, s: &State, h: f64) -> State {
    dop853_step_with_error(p, s, h, 1.0).0
}

/// One step; returns the new state and the scaled error norm (accept if <= 1)
/// for the given absolute/relative tolerance.
fn dop853_step_with_error(p: &GaussianPotential, s: &State, h: f64, tol: f64) -> (State, f64) {
    let mut k = [[0.0; 5]; 13];
    k[0] = rhs(p, s);
    for i in 1..tableau::STAGES {
        let yi = axpy(s, h, &tableau::A[i][..i], &k[..i]);
        k[i] = rhs(p, &yi);
    }
    let y_new = axpy(s, h, &tableau::B, &k[..12]);
    k[12] = rhs(p, &y_new);
    let mut e5 = 0.0;
    let mut e3 = 0.0;
    // the action is a passive quadrature; error control uses phase space only
    for d in 0..4 {
        let scale = tol * (1.0 + s[d].abs().max(y_new[d].abs()));
        let mut a5 = 0.0;
        let mut a3 = 0.0;
        for st in 0..13 {
            a5 += tableau::E5[st] * k[st][d];
            a3 += tableau::E3[st] * k[st][d];
        }
        e5 += (a5 / scale).powi(2);
        e3 += (a3 / scale).powi(2);
    }
    let err = if e5 == 0.0 && e3 == 0.0 {
        0.0
    } else {
        h.abs() * e5 / (e5 + 0.01 * e3).sqrt() / 2.0
    };
    (y_new, err)
}

/// What the driver should do after an accepted step.
pub(crate) enum Control {
    Continue,
    Stop,
}

/// Advances `state` from time 0 to at most `duration` (positive), calling
/// `on_step(t0, s0, t1, s1)` after every accepted step. Steps are clamped so
/// that each time in `stops` is hit exactly.
pub(crate) fn drive<F>(
    p: &GaussianPotential,
    start: State,
    duration: f64,
    cfg: &IntegratorConfig,
    stops: &[f64],
    mut on_step: F,
) -> Result<(f64, State)>
where
    F: FnMut(f64, &State, f64, &State) -> Result<Control>,
{
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::Parameter(format!("duration must be finite and non-negative, got {duration}")));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let mut t = 0.0;
    let mut s = start;
    let e0 = energy(p, &s);
    let local_tol = 1e-2 * cfg.tol;
    let mut h = match cfg.method {
        Method::Adaptive => 0.05f64.min(duration.max(1e-12)),
        Method::Symplectic { dt } => {
            if !(dt > 0.0) {
                return Err(Error::Parameter(format!("symplectic step must be positive, got {dt}")));
            }
            dt
        }
    };
    let mut next_stop = stops.iter().copied().filter(|&x| x > 0.0).peekable();
    let mut steps = 0usize;
    while t < duration {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::Numeric(format!("step budget exhausted at t = {t}")));
        }
        let mut target = duration;
        while let Some(&ns) = next_stop.peek() {
            if ns <= t {
                next_stop.next();
            } else {
                target = target.min(ns);
                break;
            }
        }
        let remaining = target - t;

        // Free flight outside the support is integrated in one exact step.
        if let Some(free) = free_flight_span(p, &s) {
            let dt = free.min(remaining);
            if dt > 1e-9 || dt == remaining {
                let s1 = dop853_step(p, &s, dt);
                let t1 = if dt == remaining { target } else { t + dt };
                let ctl = on_step(t, &s, t1, &s1)?;
                t = t1;
                s = s1;
                if matches!(ctl, Control::Stop) {
                    break;
                }
                continue;
            }
        }

        let (s1, dt) = match cfg.method {
            Method::Symplectic { .. } => {
                let dt = h.min(remaining);
                (symplectic_step(p, &s, dt), dt)
            }
            Method::Adaptive => {
                let mut dt = h.min(remaining);
                loop {
                    let (cand, err) = dop853_step_with_error(p, &s, dt, local_tol);
                    let drift_ok = (energy(p, &cand) - energy(p, &s)).abs() <= cfg.tol * dt.abs() + 4.0 * f64::EPSILON * e0.abs();
                    if err <= 1.0 && drift_ok {
                        let grow = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-1.0 / 8.0)).clamp(0.2, 10.0) };
                        h = (dt * grow).min(1.0);
                        break (cand, dt);
                    }
                    let shrink = if err > 1.0 { (0.9 * err.powf(-1.0 / 8.0)).clamp(0.1, 0.5) } else { 0.5 };
                    dt *= shrink;
                    if dt < 1e-13 {
                        return Err(Error::Numeric(format!("step size underflow at t = {t}")));
                    }
                }
            }
        };
        let t1 = if dt == remaining { target } else { t + dt };
        let ctl = on_step(t, &s, t1, &s1)?;
        t = t1;
        s = s1;
        if matches!(ctl, Control::Stop) {
            break;
        }
    }
    Ok((t, s))
}

/// Time of exact free motion available from `s`: infinite when moving away
/// from the support ball, the re-entry time when heading back in, `None`
/// when inside.
fn free_flight_span(p: &GaussianPotential, s: &State) -> Option<f64> {
    let r0 = p.support_radius;
    let r2 = s[0] * s[0] + s[1] * s[1];
    if p.bumps.is_empty() {
        return Some(f64::INFINITY);
    }
    if r2 <= r0 * r0 * (1.0 + 1e-12) {
        return None;
    }
    let v2 = s[2] * s[2] + s[3] * s[3];
    let b = s[0] * s[2] + s[1] * s[3];
    if b >= 0.0 || v2 == 0.0 {
        return Some(f64::INFINITY);
    }
    let disc = b * b - v2 * (r2 - r0 * r0);
    if disc <= 0.0 {
        return Some(f64::INFINITY);
    }
    Some((-b - disc.sqrt()) / v2)
}

/// Sixth-order triple-jump composition of kick–drift–kick leapfrog.
pub(crate) fn symplectic_step(p: &GaussianPotential, s: &State, h: f64) -> State {
    let x1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
    let x0 = 1.0 - 2.0 * x1;
    let y1 = 1.0 / (2.0 - 2f64.powf(1.0 / 5.0));
    let y0 = 1.0 - 2.0 * y1;
    let mut out = *s;
    for a in [y1, y0, y1] {
        for b in [x1, x0, x1] {
            leapfrog(p, &mut out, a * b * h);
        }
    }
    out
}

fn leapfrog(p: &GaussianPotential, s: &mut State, h: f64) {
    let g = p.gradient([s[0], s[1]]);
    s[2] -= 0.5 * h * g[0];
    s[3] -= 0.5 * h * g[1];
    s[0] += h * s[2];
    s[1] += h * s[3];
    s[4] += h * (s[2] * s[2] + s[3] * s[3]);
    let g = p.gradient([s[0], s[1]]);
    s[2] -= 0.5 * h * g[0];
    s[3] -= 0.5 * h * g[1];
}
