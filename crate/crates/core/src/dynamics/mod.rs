//! Planar scattering flows: smooth Gaussian-bump potentials and hard-disk
//! billiards, escape detection, trapped-set sampling and box counting.

pub mod billiard;
pub mod dimension;
pub mod integrator;
pub mod potential;
mod tableau;
pub mod trapped;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use billiard::{three_disk, Disk, DiskConfiguration, PeriodicOrbit};
pub use dimension::box_counting_dimension;
pub use integrator::{IntegratorConfig, Method};
pub use potential::{GaussianBump, GaussianPotential};
pub use trapped::{escape_time, escape_time_with, sample_trapped_set, sample_trapped_set_with, EscapeTimes, TrappedSetConfig};

use crate::error::{Error, Result};
use integrator::{Control, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: [f64; 2],
    pub xi: [f64; 2],
}

impl PhasePoint {
    pub fn new(x: [f64; 2], xi: [f64; 2]) -> Self {
        PhasePoint { x, xi }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.xi).all(|v| v.is_finite())
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Input(format!("phase point {self:?} has non-finite components")))
        }
    }

    pub fn speed(&self) -> f64 {
        self.xi[0].hypot(self.xi[1])
    }

    /// Same position, reversed momentum.
    pub fn reversed(&self) -> Self {
        PhasePoint { x: self.x, xi: [-self.xi[0], -self.xi[1]] }
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let d = [
            self.x[0] - other.x[0],
            self.x[1] - other.x[1],
            self.xi[0] - other.xi[0],
            self.xi[1] - other.xi[1],
        ];
        d.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Rotation of both position and momentum about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let r = |v: [f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
        PhasePoint { x: r(self.x), xi: r(self.xi) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScatteringSystem {
    SmoothPotential(GaussianPotential),
    DiskBilliard(DiskConfiguration),
}

impl ScatteringSystem {
    pub fn support_radius(&self) -> f64 {
        match self {
            ScatteringSystem::SmoothPotential(p) => p.support_radius,
            ScatteringSystem::DiskBilliard(d) => d.support_radius(),
        }
    }

    pub fn potential(&self, x: [f64; 2]) -> Result<f64> {
        match self {
            ScatteringSystem::SmoothPotential(p) => Ok(p.value(x)),
            ScatteringSystem::DiskBilliard(d) => match d.inside(x) {
                Some(k) => Err(Error::Domain(format!("point {x:?} lies inside disk #{k}"))),
                None => Ok(0.0),
            },
        }
    }

    pub fn is_billiard(&self) -> bool {
        matches!(self, ScatteringSystem::DiskBilliard(_))
    }
}

pub fn evaluate_hamiltonian(system: &ScatteringSystem, point: &PhasePoint) -> Result<f64> {
    point.check()?;
    let v = system.potential(point.x)?;
    Ok(0.5 * (point.xi[0] * point.xi[0] + point.xi[1] * point.xi[1]) + v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub point: PhasePoint,
    /// Reduced action `∫ ξ·dx` accumulated since the start.
    pub action: f64,
    /// Disk reflected from at this instant (billiards only).
    pub bounce: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub energy: f64,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory always holds its initial point")
    }

    /// Largest deviation of the Hamiltonian from the initial energy.
    pub fn energy_drift(&self, system: &ScatteringSystem) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            worst = worst.max((evaluate_hamiltonian(system, &s.point)? - self.energy).abs());
        }
        Ok(worst)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x1", "x2", "xi1", "xi2"])?;
        for s in &self.samples {
            let p = &s.point;
            w.serialize((s.t, p.x[0], p.x[1], p.xi[0], p.xi[1]))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes bare phase points (time column zero) with the trajectory header.
pub fn write_points_csv<W: Write>(points: &[PhasePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x1", "x2", "xi1", "xi2"])?;
    for p in points {
        w.serialize((0.0, p.x[0], p.x[1], p.xi[0], p.xi[1]))?;
    }
    w.flush()?;
    Ok(())
}

pub fn integrate_flow(system: &ScatteringSystem, point: &PhasePoint, duration: f64, tol: f64) -> Result<Trajectory> {
    integrate_flow_with(system, point, duration, &IntegratorConfig::adaptive(tol))
}

/// Integrates for `duration` (negative runs backward in time). Every accepted
/// step is recorded for smooth potentials; billiards record every bounce.
pub fn integrate_flow_with(
    system: &ScatteringSystem,
    point: &PhasePoint,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    point.check()?;
    if !duration.is_finite() {
        return Err(Error::Parameter(format!("duration must be finite, got {duration}")));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let energy = evaluate_hamiltonian(system, point)?;
    let backward = duration < 0.0;
    let start = if backward { point.reversed() } else { *point };
    let mut samples = Vec::new();
    match system {
        ScatteringSystem::SmoothPotential(p) => {
            let s0: State = [start.x[0], start.x[1], start.xi[0], start.xi[1], 0.0];
            samples.push(TrajectorySample { t: 0.0, point: start, action: 0.0, bounce: None });
            integrator::drive(p, s0, duration.abs(), cfg, &[], |_, _, t1, s1| {
                samples.push(TrajectorySample {
                    t: t1,
                    point: PhasePoint::new([s1[0], s1[1]], [s1[2], s1[3]]),
                    action: s1[4],
                    bounce: None,
                });
                Ok(Control::Continue)
            })?;
        }
        ScatteringSystem::DiskBilliard(d) => {
            billiard_flow(d, &start, duration.abs(), |s| {
                samples.push(s);
                Control::Continue
            })?;
        }
    }
    if backward {
        for s in &mut samples {
            s.t = -s.t;
            s.point = s.point.reversed();
            s.action = -s.action;
        }
    }
    Ok(Trajectory { samples, energy })
}

/// Exact billiard motion up to `duration`. `visit` sees every post-reflection
/// state and the final one; returning `Stop` ends the run early.
pub(crate) fn billiard_flow<F>(d: &DiskConfiguration, start: &PhasePoint, duration: f64, mut visit: F) -> Result<TrajectorySample>
where
    F: FnMut(TrajectorySample) -> Control,
{
    if let Some(k) = d.inside(start.x) {
        return Err(Error::Domain(format!("start {:?} lies inside disk #{k}", start.x)));
    }
    let speed = start.speed();
    let mut cur = TrajectorySample { t: 0.0, point: *start, action: 0.0, bounce: None };
    // Starting on a boundary and heading into the disk (a reversed outgoing
    // state): reflect first.
    for (k, disk) in d.disks.iter().enumerate() {
        let n = [start.x[0] - disk.center[0], start.x[1] - disk.center[1]];
        let r = n[0].hypot(n[1]);
        if r <= disk.radius * (1.0 + 1e-10) {
            let n = [n[0] / r, n[1] / r];
            let pn = start.xi[0] * n[0] + start.xi[1] * n[1];
            if pn < 0.0 {
                let mut out = [start.xi[0] - 2.0 * pn * n[0], start.xi[1] - 2.0 * pn * n[1]];
                let scale = speed / out[0].hypot(out[1]);
                out[0] *= scale;
                out[1] *= scale;
                cur.point.xi = out;
                cur.bounce = Some(k);
            }
        }
    }
    if matches!(visit(cur), Control::Stop) {
        return Ok(cur);
    }
    if speed == 0.0 {
        cur.t = duration;
        visit(cur);
        return Ok(cur);
    }
    loop {
        let v = [cur.point.xi[0] / speed, cur.point.xi[1] / speed];
        let hit = d.next_hit(cur.point.x, v);
        let reach = hit.as_ref().map_or(f64::INFINITY, |h| h.distance / speed);
        if cur.t + reach > duration {
            let dt = duration - cur.t;
            let end = TrajectorySample {
                t: duration,
                point: PhasePoint::new([cur.point.x[0] + dt * cur.point.xi[0], cur.point.x[1] + dt * cur.point.xi[1]], cur.point.xi),
                action: cur.action + speed * speed * dt,
                bounce: None,
            };
            visit(end);
            return Ok(end);
        }
        let h = hit.expect("finite reach implies a hit");
        let vn = v[0] * h.normal[0] + v[1] * h.normal[1];
        let t_hit = cur.t + reach;
        if vn.abs() < 1e-9 {
            return Err(Error::Tangency { time: t_hit });
        }
        let xi = cur.point.xi;
        let pn = xi[0] * h.normal[0] + xi[1] * h.normal[1];
        let mut out = [xi[0] - 2.0 * pn * h.normal[0], xi[1] - 2.0 * pn * h.normal[1]];
        let scale = speed / out[0].hypot(out[1]);
        out[0] *= scale;
        out[1] *= scale;
        cur = TrajectorySample {
            t: t_hit,
            point: PhasePoint::new(h.point, out),
            action: cur.action + speed * h.distance,
            bounce: Some(h.disk),
        };
        if matches!(visit(cur), Control::Stop) {
            return Ok(cur);
        }
    }
}
