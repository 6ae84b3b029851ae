//! Escape times and a numerical proxy for the trapped set.
//!
//! A point counts as trapped when it stays inside the escape ball for longer
//! than `t_max` in both time directions. Samples are produced by launching
//! one-parameter fans of rays from the support circle, refining the spikes of
//! the forward escape time (which sit on the stable manifold), and keeping
//! the middle stretch of each long orbit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::billiard::prime_itineraries;
use super::integrator::{self, Control, IntegratorConfig, State};
use super::{billiard_flow, evaluate_hamiltonian, PhasePoint, ScatteringSystem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeTimes {
    pub forward: Option<f64>,
    pub backward: Option<f64>,
}

impl EscapeTimes {
    pub fn trapped_beyond(&self, t_max: f64) -> bool {
        self.forward.map_or(true, |t| t > t_max) && self.backward.map_or(true, |t| t > t_max)
    }
}

pub fn escape_time(system: &ScatteringSystem, point: &PhasePoint, escape_radius: f64, t_max: f64) -> Result<EscapeTimes> {
    escape_time_with(system, point, escape_radius, t_max, &IntegratorConfig::default())
}

pub fn escape_time_with(
    system: &ScatteringSystem,
    point: &PhasePoint,
    escape_radius: f64,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<EscapeTimes> {
    point.check()?;
    if !(escape_radius >= system.support_radius()) {
        return Err(Error::Parameter(format!(
            "escape radius {escape_radius} must not be below the support radius {}",
            system.support_radius()
        )));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Parameter(format!("t_max must be positive, got {t_max}")));
    }
    Ok(EscapeTimes {
        forward: forward_escape(system, point, escape_radius, t_max, cfg)?,
        backward: forward_escape(system, &point.reversed(), escape_radius, t_max, cfg)?,
    })
}

/// Time along a straight line until `|x + t v| = radius` on the outgoing
/// branch; negative when already beyond it.
fn time_to_radius(x: [f64; 2], v: [f64; 2], radius: f64) -> f64 {
    let v2 = v[0] * v[0] + v[1] * v[1];
    let b = x[0] * v[0] + x[1] * v[1];
    let c = x[0] * x[0] + x[1] * x[1] - radius * radius;
    let disc = (b * b - v2 * c).max(0.0);
    (-b + disc.sqrt()) / v2
}

pub(crate) fn forward_escape(
    system: &ScatteringSystem,
    point: &PhasePoint,
    radius: f64,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<Option<f64>> {
    let outward = point.x[0] * point.xi[0] + point.x[1] * point.xi[1] >= 0.0;
    if point.x[0].hypot(point.x[1]) > radius && outward {
        return Ok(Some(0.0));
    }
    let mut found = None;
    match system {
        ScatteringSystem::SmoothPotential(p) => {
            let r0 = p.support_radius;
            let s0: State = [point.x[0], point.x[1], point.xi[0], point.xi[1], 0.0];
            integrator::drive(p, s0, t_max, cfg, &[], |_, _, t1, s1| {
                let r2 = s1[0] * s1[0] + s1[1] * s1[1];
                let outward = s1[0] * s1[2] + s1[1] * s1[3] >= 0.0;
                if r2 >= r0 * r0 && outward && (s1[2] != 0.0 || s1[3] != 0.0) {
                    found = Some(t1 + time_to_radius([s1[0], s1[1]], [s1[2], s1[3]], radius));
                    return Ok(Control::Stop);
                }
                Ok(Control::Continue)
            })?;
        }
        ScatteringSystem::DiskBilliard(d) => {
            let speed = point.speed();
            if speed == 0.0 {
                return Ok(None);
            }
            billiard_flow(d, point, t_max, |s| {
                let v = [s.point.xi[0] / speed, s.point.xi[1] / speed];
                if s.t < t_max && d.next_hit(s.point.x, v).is_none() {
                    found = Some(s.t + time_to_radius(s.point.x, s.point.xi, radius));
                    return Control::Stop;
                }
                Control::Continue
            })?;
        }
    }
    Ok(found.filter(|&t| t <= t_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrappedSetConfig {
    /// Launch points on the support circle; a multiple of 3 keeps threefold
    /// symmetric systems symmetric.
    pub families: usize,
    /// Coarse directions per family.
    pub directions: usize,
    /// Extra time kept on both sides of the emitted window.
    pub margin: f64,
    /// Spacing of emitted samples along a refined orbit.
    pub emit_dt: f64,
    /// Longest billiard cycle used as an exact seed (0 disables seeding).
    pub cycle_length: usize,
    pub integrator: IntegratorConfig,
}

impl Default for TrappedSetConfig {
    fn default() -> Self {
        TrappedSetConfig {
            families: 24,
            directions: 241,
            margin: 1.0,
            emit_dt: 0.5,
            cycle_length: 4,
            integrator: IntegratorConfig::default(),
        }
    }
}

pub fn sample_trapped_set(
    system: &ScatteringSystem,
    energy: f64,
    budget: usize,
    t_max: f64,
    escape_radius: f64,
) -> Result<Vec<PhasePoint>> {
    sample_trapped_set_with(system, energy, budget, t_max, escape_radius, &TrappedSetConfig::default())
}

pub fn sample_trapped_set_with(
    system: &ScatteringSystem,
    energy: f64,
    budget: usize,
    t_max: f64,
    escape_radius: f64,
    cfg: &TrappedSetConfig,
) -> Result<Vec<PhasePoint>> {
    if !(energy > 0.0) {
        return Err(Error::Parameter(format!("energy must be positive, got {energy}")));
    }
    if budget == 0 {
        return Err(Error::Parameter("sample budget must be positive".into()));
    }
    if cfg.families == 0 || cfg.directions < 3 || !(cfg.emit_dt > 0.0) || !(cfg.margin >= 0.0) {
        return Err(Error::Parameter(format!("malformed sampler settings {cfg:?}")));
    }
    if !(escape_radius >= system.support_radius()) {
        return Err(Error::Parameter(format!(
            "escape radius {escape_radius} must not be below the support radius {}",
            system.support_radius()
        )));
    }
    if let ScatteringSystem::SmoothPotential(p) = system {
        if p.bumps.is_empty() {
            return Ok(Vec::new());
        }
    }
    let speed = (2.0 * energy).sqrt();
    let mut candidates = Vec::new();

    if let ScatteringSystem::DiskBilliard(d) = system {
        for n in 2..=cfg.cycle_length {
            for it in prime_itineraries(d.disks.len(), n) {
                // shadowed or pruned itineraries simply do not exist as orbits
                if let Ok(orbit) = d.periodic_orbit(&it, speed) {
                    candidates.extend(orbit.points);
                }
            }
        }
    }

    let r_launch = system.support_radius();
    let target = 2.0 * (t_max + cfg.margin);
    let horizon = target + cfg.margin;
    let per_family: Vec<Result<Vec<PhasePoint>>> = (0..cfg.families)
        .into_par_iter()
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / cfg.families as f64;
            let x = [r_launch * theta.cos(), r_launch * theta.sin()];
            let v = system.potential(x)?;
            if v >= energy {
                return Ok(Vec::new());
            }
            let s = (2.0 * (energy - v)).sqrt();
            let launch = |alpha: f64| {
                let dir = theta + std::f64::consts::PI + alpha;
                PhasePoint::new(x, [s * dir.cos(), s * dir.sin()])
            };
            let escape = |alpha: f64| -> Result<f64> {
                match forward_escape(system, &launch(alpha), escape_radius, horizon, &cfg.integrator) {
                    Ok(t) => Ok(t.unwrap_or(f64::INFINITY)),
                    Err(Error::Tangency { time }) => Ok(time),
                    Err(e) => Err(e),
                }
            };
            let half = 0.5 * std::f64::consts::PI * (1.0 - 1e-6);
            let alphas: Vec<f64> = (0..cfg.directions)
                .map(|m| -half + 2.0 * half * m as f64 / (cfg.directions - 1) as f64)
                .collect();
            let times: Vec<f64> = alphas.iter().map(|&a| escape(a)).collect::<Result<_>>()?;
            let mut out = Vec::new();
            for m in 1..cfg.directions - 1 {
                if !(times[m] >= times[m - 1] && times[m] > times[m + 1]) {
                    continue;
                }
                if let Some((alpha, t_escape)) =
                    refine_spike(&escape, (alphas[m - 1], times[m - 1]), (alphas[m], times[m]), (alphas[m + 1], times[m + 1]), target)?
                {
                    out.extend(emit_window(system, &launch(alpha), t_escape.min(horizon), t_max, cfg)?);
                }
            }
            Ok(out)
        })
        .collect();
    for fam in per_family {
        candidates.extend(fam?);
    }

    let verified: Vec<Result<Option<PhasePoint>>> = candidates
        .par_iter()
        .map(|p| match escape_time_with(system, p, escape_radius, t_max, &cfg.integrator) {
            Ok(e) if e.trapped_beyond(t_max) => Ok(Some(*p)),
            Ok(_) | Err(Error::Tangency { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut kept = Vec::new();
    for v in verified {
        if let Some(p) = v? {
            kept.push(p);
        }
    }
    if kept.len() > budget {
        let stride = kept.len() as f64 / budget as f64;
        kept = (0..budget).map(|i| kept[(i as f64 * stride) as usize]).collect();
    }
    for p in &kept {
        let e = evaluate_hamiltonian(system, p)?;
        debug_assert!((e - energy).abs() < 1e-6 * energy.max(1.0), "sample off the energy shell");
    }
    Ok(kept)
}

/// Golden-section style search keeping a bracketing triple whose middle
/// escape time dominates, until the middle exceeds `target`.
fn refine_spike<F>(escape: &F, mut a: (f64, f64), mut b: (f64, f64), mut c: (f64, f64), target: f64) -> Result<Option<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..200 {
        if b.1 >= target {
            return Ok(Some(b));
        }
        if (c.0 - a.0).abs() < 1e-15 * (1.0 + b.0.abs()) {
            break;
        }
        let left = b.0 - a.0 > c.0 - b.0;
        let x = if left { b.0 - 0.381966 * (b.0 - a.0) } else { b.0 + 0.381966 * (c.0 - b.0) };
        let tx = escape(x)?;
        if tx > b.1 {
            if left {
                c = b;
            } else {
                a = b;
            }
            b = (x, tx);
        } else if left {
            a = (x, tx);
        } else {
            c = (x, tx);
        }
    }
    Ok(None)
}

/// Points along the orbit of `start` at times where both escape times should
/// exceed `t_max`.
fn emit_window(
    system: &ScatteringSystem,
    start: &PhasePoint,
    t_escape: f64,
    t_max: f64,
    cfg: &TrappedSetConfig,
) -> Result<Vec<PhasePoint>> {
    let lo = t_max + cfg.margin;
    let hi = t_escape - t_max - cfg.margin;
    if hi < lo {
        return Ok(Vec::new());
    }
    let stops: Vec<f64> = (0..).map(|k| lo + k as f64 * cfg.emit_dt).take_while(|&t| t <= hi).collect();
    let mut out = Vec::with_capacity(stops.len());
    match system {
        ScatteringSystem::SmoothPotential(p) => {
            let s0: State = [start.x[0], start.x[1], start.xi[0], start.xi[1], 0.0];
            let mut next = 0;
            integrator::drive(p, s0, hi, &cfg.integrator, &stops, |_, _, t1, s1| {
                while next < stops.len() && stops[next] <= t1 {
                    if stops[next] == t1 {
                        out.push(PhasePoint::new([s1[0], s1[1]], [s1[2], s1[3]]));
                    }
                    next += 1;
                }
                Ok(Control::Continue)
            })?;
        }
        ScatteringSystem::DiskBilliard(d) => {
            let mut bounces = Vec::new();
            let res = billiard_flow(d, start, hi, |s| {
                bounces.push(s);
                Control::Continue
            });
            if let Err(Error::Tangency { .. }) = res {
                return Ok(Vec::new());
            }
            res?;
            let mut j = 0;
            for &t in &stops {
                while j + 1 < bounces.len() && bounces[j + 1].t <= t {
                    j += 1;
                }
                let b = &bounces[j];
                let dt = t - b.t;
                out.push(PhasePoint::new(
                    [b.point.x[0] + dt * b.point.xi[0], b.point.x[1] + dt * b.point.xi[1]],
                    b.point.xi,
                ));
            }
        }
    }
    Ok(out)
}
