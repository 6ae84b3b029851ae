use serde::{Deserialize, Serialize};

use crate::dynamics::integrator::{self, Control, IntegratorConfig, State};
use crate::dynamics::{billiard_flow, DiskConfiguration, PhasePoint, ScatteringSystem};
use crate::error::{Error, Result};

/// Elliptic trapped neighbourhood `{((y - y0)/a)^2 + ((eta - eta0)/b)^2 < 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
}

impl Ellipse {
    /// The confinement symbol; negative inside.
    pub fn symbol(&self, y: f64, eta: f64) -> f64 {
        let u = (y - self.center[0]) / self.semi_axes[0];
        let v = (eta - self.center[1]) / self.semi_axes[1];
        u * u + v * v - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Embedding {
    /// Birkhoff coordinates on a disk: `y` is arclength measured from the
    /// point at polar angle `phi_ref`, `eta` the sine of the outgoing angle.
    Boundary { disk: usize, center: [f64; 2], radius: f64, phi_ref: f64 },
    /// A straight segment crossed in the direction of `normal`; `y` runs
    /// along `tangent` from `origin`.
    Line { origin: [f64; 2], tangent: [f64; 2], normal: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionChart {
    pub index: usize,
    pub embedding: Embedding,
    pub energy: f64,
    /// `sqrt(2E)`; chart momenta are tangential momenta divided by it.
    pub momentum_scale: f64,
    pub y_range: [f64; 2],
    pub eta_range: [f64; 2],
    pub trapped: Ellipse,
    /// Chart coordinates of the trapped orbits' crossings.
    pub trapped_points: Vec<[f64; 2]>,
}

impl SectionChart {
    pub fn contains(&self, y: f64, eta: f64) -> bool {
        y >= self.y_range[0] && y <= self.y_range[1] && eta >= self.eta_range[0] && eta <= self.eta_range[1]
    }

    /// Phase-space point with chart coordinates `(y, eta)`.
    pub fn embed(&self, system: &ScatteringSystem, y: f64, eta: f64) -> Result<PhasePoint> {
        if !self.contains(y, eta) {
            return Err(Error::Domain(format!("({y}, {eta}) outside chart #{}", self.index)));
        }
        let c = self.momentum_scale;
        match self.embedding {
            Embedding::Boundary { center, radius, phi_ref, .. } => {
                let phi = phi_ref + y / radius;
                let n = [phi.cos(), phi.sin()];
                let t = [-n[1], n[0]];
                let x = [center[0] + radius * n[0], center[1] + radius * n[1]];
                let cn = (1.0 - eta * eta).sqrt();
                Ok(PhasePoint::new(x, [c * (eta * t[0] + cn * n[0]), c * (eta * t[1] + cn * n[1])]))
            }
            Embedding::Line { origin, tangent, normal } => {
                let x = [origin[0] + y * tangent[0], origin[1] + y * tangent[1]];
                let v = system.potential(x)?;
                let s2 = 2.0 * (self.energy - v);
                let pn2 = s2 - c * c * eta * eta;
                if !(pn2 > 0.0) {
                    return Err(Error::Domain(format!("({y}, {eta}) is not on the energy shell of chart #{}", self.index)));
                }
                let pn = pn2.sqrt();
                let pt = c * eta;
                Ok(PhasePoint::new(x, [pt * tangent[0] + pn * normal[0], pt * tangent[1] + pn * normal[1]]))
            }
        }
    }

    /// Chart coordinates of a point lying on the section.
    pub fn coordinates(&self, p: &PhasePoint) -> [f64; 2] {
        let c = self.momentum_scale;
        match self.embedding {
            Embedding::Boundary { center, radius, phi_ref, .. } => {
                let phi = (p.x[1] - center[1]).atan2(p.x[0] - center[0]);
                let t = [-phi.sin(), phi.cos()];
                let y = radius * crate::dynamics::billiard::wrap_angle(phi - phi_ref);
                [y, (p.xi[0] * t[0] + p.xi[1] * t[1]) / p.speed()]
            }
            Embedding::Line { origin, tangent, .. } => {
                let y = (p.x[0] - origin[0]) * tangent[0] + (p.x[1] - origin[1]) * tangent[1];
                [y, (p.xi[0] * tangent[0] + p.xi[1] * tangent[1]) / c]
            }
        }
    }

    /// Signed distance to the section line (lines only).
    fn crossing_coordinate(&self, x: [f64; 2]) -> f64 {
        match self.embedding {
            Embedding::Line { origin, normal, .. } => (x[0] - origin[0]) * normal[0] + (x[1] - origin[1]) * normal[1],
            Embedding::Boundary { .. } => f64::NAN,
        }
    }

    pub fn disk(&self) -> Option<usize> {
        match self.embedding {
            Embedding::Boundary { disk, .. } => Some(disk),
            Embedding::Line { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SectionParams {
    pub max_diameter: f64,
    /// Clearance between the trapped ellipse and the chart boundary.
    pub delta_bdry: f64,
    /// Added to the semi-axes of the ellipse circumscribing the trapped box.
    pub ellipse_pad: f64,
    pub tau_max: f64,
    /// Smallest admissible sine of the angle between flow and section.
    pub transversality: f64,
    pub integrator: IntegratorConfig,
}

impl Default for SectionParams {
    fn default() -> Self {
        SectionParams {
            max_diameter: 4.0,
            delta_bdry: 0.05,
            ellipse_pad: 0.02,
            tau_max: 20.0,
            transversality: 0.05,
            integrator: IntegratorConfig::adaptive(1e-12),
        }
    }
}

pub fn build_sections(
    system: &ScatteringSystem,
    energy: f64,
    trapped_samples: &[PhasePoint],
    max_diameter: f64,
) -> Result<Vec<SectionChart>> {
    let params = SectionParams { max_diameter, ..SectionParams::default() };
    build_sections_with(system, energy, trapped_samples, &params)
}

pub fn build_sections_with(
    system: &ScatteringSystem,
    energy: f64,
    trapped_samples: &[PhasePoint],
    params: &SectionParams,
) -> Result<Vec<SectionChart>> {
    if trapped_samples.is_empty() {
        return Err(Error::Parameter("section construction needs trapped samples".into()));
    }
    if !(energy > 0.0) || !(params.max_diameter > 0.0) || !(params.tau_max > 0.0) || !(params.delta_bdry >= 0.0) {
        return Err(Error::Parameter(format!("malformed section parameters {params:?} at E = {energy}")));
    }
    for p in trapped_samples {
        p.check()?;
    }
    match system {
        ScatteringSystem::DiskBilliard(d) => billiard_sections(d, energy, trapped_samples, params),
        ScatteringSystem::SmoothPotential(_) => line_sections(system, energy, trapped_samples, params),
    }
}

/// Chart rectangle and ellipse around a cloud of trapped crossings.
fn frame(points: &[[f64; 2]], params: &SectionParams) -> (Ellipse, [f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let semi = [
        std::f64::consts::SQRT_2 * 0.5 * (hi[0] - lo[0]) + params.ellipse_pad,
        std::f64::consts::SQRT_2 * 0.5 * (hi[1] - lo[1]) + params.ellipse_pad,
    ];
    let ellipse = Ellipse { center, semi_axes: semi };
    let m = params.delta_bdry;
    (
        ellipse,
        [center[0] - semi[0] - m, center[0] + semi[0] + m],
        [center[1] - semi[1] - m, center[1] + semi[1] + m],
    )
}

fn billiard_sections(
    d: &DiskConfiguration,
    energy: f64,
    samples: &[PhasePoint],
    params: &SectionParams,
) -> Result<Vec<SectionChart>> {
    let c = (2.0 * energy).sqrt();
    let n = d.disks.len() as f64;
    let mid = [
        d.disks.iter().map(|k| k.center[0]).sum::<f64>() / n,
        d.disks.iter().map(|k| k.center[1]).sum::<f64>() / n,
    ];
    let mut per_disk: Vec<Vec<[f64; 2]>> = vec![Vec::new(); d.disks.len()];
    let mut first_sample: Vec<usize> = vec![usize::MAX; d.disks.len()];
    for (idx, p) in samples.iter().enumerate() {
        let speed = p.speed();
        let mut next = None;
        let res = billiard_flow(d, p, params.tau_max, |s| {
            if s.t > 0.0 && s.bounce.is_some() {
                next = Some(s);
                return Control::Stop;
            }
            Control::Continue
        });
        if let Err(e) = res {
            return Err(Error::Construction { reason: format!("trapped sample fails to bounce cleanly: {e}"), sample: idx });
        }
        let Some(s) = next else {
            return Err(Error::Construction { reason: format!("no bounce within tau_max = {}", params.tau_max), sample: idx });
        };
        let k = s.bounce.expect("checked above");
        let disk = &d.disks[k];
        let phi_ref = (mid[1] - disk.center[1]).atan2(mid[0] - disk.center[0]);
        let phi = (s.point.x[1] - disk.center[1]).atan2(s.point.x[0] - disk.center[0]);
        let t = [-phi.sin(), phi.cos()];
        let y = disk.radius * crate::dynamics::billiard::wrap_angle(phi - phi_ref);
        let eta = (s.point.xi[0] * t[0] + s.point.xi[1] * t[1]) / speed;
        per_disk[k].push([y, eta]);
        if first_sample[k] == usize::MAX {
            first_sample[k] = idx;
        }
    }
    let eta_cap = (1.0 - params.transversality * params.transversality).sqrt();
    let mut charts = Vec::new();
    for (k, pts) in per_disk.into_iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let disk = &d.disks[k];
        let (ellipse, y_range, eta_range) = frame(&pts, params);
        let sample = first_sample[k];
        if y_range[1] - y_range[0] > params.max_diameter {
            return Err(Error::Construction {
                reason: format!("chart on disk #{k} needs diameter {:.3} > max_diameter", y_range[1] - y_range[0]),
                sample,
            });
        }
        if eta_range[0] <= -eta_cap || eta_range[1] >= eta_cap {
            return Err(Error::Construction {
                reason: format!("chart on disk #{k} reaches grazing angles: eta in {eta_range:?}"),
                sample,
            });
        }
        if y_range[1] - y_range[0] >= 2.0 * std::f64::consts::PI * disk.radius {
            return Err(Error::Construction { reason: format!("chart on disk #{k} wraps around"), sample });
        }
        let phi_ref = (mid[1] - disk.center[1]).atan2(mid[0] - disk.center[0]);
        charts.push(SectionChart {
            index: charts.len(),
            embedding: Embedding::Boundary { disk: k, center: disk.center, radius: disk.radius, phi_ref },
            energy,
            momentum_scale: c,
            y_range,
            eta_range,
            trapped: ellipse,
            trapped_points: pts,
        });
    }
    Ok(charts)
}

/// A crossing of some chart line found by integration.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Crossing {
    pub chart: usize,
    pub t: f64,
    pub point: PhasePoint,
    pub action: f64,
}

/// Integrates forward from `start` until it crosses one of `lines` (with
/// `accept(chart, y, eta)` true), for at most `tau_max`. A start lying on an
/// accepted line counts only when `include_start` is set.
pub(crate) fn next_line_crossing<A>(
    system: &ScatteringSystem,
    charts: &[SectionChart],
    start: &PhasePoint,
    tau_max: f64,
    cfg: &IntegratorConfig,
    include_start: bool,
    accept: A,
) -> Result<Option<Crossing>>
where
    A: Fn(usize, f64, f64) -> bool,
{
    let ScatteringSystem::SmoothPotential(pot) = system else {
        return Err(Error::Parameter("line sections require a smooth potential".into()));
    };
    if include_start {
        for (j, ch) in charts.iter().enumerate() {
            let g = ch.crossing_coordinate(start.x);
            if g.abs() < 1e-12 {
                let [y, eta] = ch.coordinates(start);
                if normal_velocity(ch, start) > 0.0 && accept(j, y, eta) {
                    return Ok(Some(Crossing { chart: j, t: 0.0, point: *start, action: 0.0 }));
                }
            }
        }
    }
    let s0: State = [start.x[0], start.x[1], start.xi[0], start.xi[1], 0.0];
    let r0 = pot.support_radius;
    let mut found: Option<Crossing> = None;
    let mut escaped = false;
    integrator::drive(pot, s0, tau_max, cfg, &[], |t0, sa, t1, sb| {
        let mut best: Option<Crossing> = None;
        for (j, ch) in charts.iter().enumerate() {
            let ga = ch.crossing_coordinate([sa[0], sa[1]]);
            let gb = ch.crossing_coordinate([sb[0], sb[1]]);
            if !(ga < 0.0 && gb >= 0.0) {
                continue;
            }
            let (dt, s) = locate(pot, ch, sa, t1 - t0);
            let p = PhasePoint::new([s[0], s[1]], [s[2], s[3]]);
            let [y, eta] = ch.coordinates(&p);
            if !accept(j, y, eta) {
                continue;
            }
            if best.as_ref().map_or(true, |b| t0 + dt < b.t) {
                best = Some(Crossing { chart: j, t: t0 + dt, point: p, action: s[4] });
            }
        }
        if best.is_some() {
            found = best;
            return Ok(Control::Stop);
        }
        let r2 = sb[0] * sb[0] + sb[1] * sb[1];
        if r2 >= r0 * r0 && sb[0] * sb[2] + sb[1] * sb[3] >= 0.0 {
            escaped = true;
            return Ok(Control::Stop);
        }
        Ok(Control::Continue)
    })?;
    Ok(found)
}

fn normal_velocity(ch: &SectionChart, p: &PhasePoint) -> f64 {
    match ch.embedding {
        Embedding::Line { normal, .. } => p.xi[0] * normal[0] + p.xi[1] * normal[1],
        Embedding::Boundary { .. } => f64::NAN,
    }
}

/// Crossing time inside one step of length `dt`: bisection, then Newton on
/// the signed distance whose time derivative is the normal velocity.
fn locate(p: &crate::dynamics::GaussianPotential, ch: &SectionChart, sa: &State, dt: f64) -> (f64, State) {
    let g = |s: &State| ch.crossing_coordinate([s[0], s[1]]);
    let mut lo = 0.0;
    let mut hi = dt;
    for _ in 0..200 {
        if hi - lo <= 1e-12 * (1.0 + dt) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(&integrator::dop853_step(p, sa, mid)) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut t = hi;
    let mut s = integrator::dop853_step(p, sa, t);
    for _ in 0..3 {
        let v = normal_velocity(ch, &PhasePoint::new([s[0], s[1]], [s[2], s[3]]));
        if v.abs() < 1e-300 {
            break;
        }
        let step = g(&s) / v;
        if step == 0.0 {
            break;
        }
        t -= step;
        s = integrator::dop853_step(p, sa, t);
    }
    (t, s)
}

/// Smooth potentials: segments normal to the mean flow of clusters of
/// trapped samples, added until every sample's forward orbit crosses one.
fn line_sections(
    system: &ScatteringSystem,
    energy: f64,
    samples: &[PhasePoint],
    params: &SectionParams,
) -> Result<Vec<SectionChart>> {
    let c = (2.0 * energy).sqrt();
    let half = 0.5 * params.max_diameter;
    let potentials: Vec<f64> = samples.iter().map(|p| system.potential(p.x)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| potentials[a].total_cmp(&potentials[b]).then(a.cmp(&b)));
    let median = potentials[order[order.len() / 2]];
    let hull = samples.iter().map(|p| p.x[0].hypot(p.x[1])).fold(0.0, f64::max);
    let dir = |p: &PhasePoint| {
        let s = p.speed();
        [p.xi[0] / s, p.xi[1] / s]
    };
    let cos_cluster = (std::f64::consts::PI / 6.0).cos();
    let cone = -(2.0 * params.transversality.asin()).cos();

    let mut charts: Vec<SectionChart> = Vec::new();
    let mut covered: Vec<Option<Crossing>> = vec![None; samples.len()];
    for _round in 0..samples.len() + 1 {
        let fresh = first_crossings(system, &charts, samples, &covered, params)?;
        for (k, f) in fresh.into_iter().enumerate() {
            if covered[k].is_none() {
                covered[k] = f;
            }
        }
        let Some(&seed) = order.iter().find(|&&k| covered[k].is_none()) else {
            break;
        };
        let seed_point = if potentials[seed] <= median {
            samples[seed]
        } else {
            lowest_potential_point(system, &samples[seed], hull, params)?
        };
        let u0 = dir(&seed_point);
        let members: Vec<PhasePoint> = std::iter::once(seed_point)
            .chain(order.iter().filter(|&&k| covered[k].is_none() && potentials[k] <= median && k != seed).map(|&k| samples[k]))
            .filter(|p| {
                let d = (p.x[0] - seed_point.x[0]).hypot(p.x[1] - seed_point.x[1]);
                let u = dir(p);
                d <= half && u[0] * u0[0] + u[1] * u0[1] >= cos_cluster
            })
            .collect();
        let m = members.len() as f64;
        let origin = [
            members.iter().map(|p| p.x[0]).sum::<f64>() / m,
            members.iter().map(|p| p.x[1]).sum::<f64>() / m,
        ];
        let mut normal = [0.0, 0.0];
        for p in &members {
            let u = dir(p);
            normal[0] += u[0];
            normal[1] += u[1];
        }
        let nn = normal[0].hypot(normal[1]);
        let normal = [normal[0] / nn, normal[1] / nn];
        let tangent = [-normal[1], normal[0]];
        let mut y_range = [-half, half];
        // keep clear of earlier segments unless the crossing cones cannot overlap
        for ch in &charts {
            let Embedding::Line { origin: o2, tangent: t2, normal: n2 } = ch.embedding else { continue };
            if normal[0] * n2[0] + normal[1] * n2[1] < cone {
                continue;
            }
            if let Some((s_new, s_old)) = line_intersection(origin, tangent, o2, t2) {
                if s_old < ch.y_range[0] || s_old > ch.y_range[1] || s_new < y_range[0] || s_new > y_range[1] {
                    continue;
                }
                let gap = 0.5 * params.delta_bdry;
                if s_new > 0.0 {
                    y_range[1] = y_range[1].min(s_new - gap);
                } else {
                    y_range[0] = y_range[0].max(s_new + gap);
                }
                if y_range[0] >= 0.0 || y_range[1] <= 0.0 {
                    return Err(Error::Construction { reason: "new section would cross an existing one".into(), sample: seed });
                }
            }
        }
        charts.push(SectionChart {
            index: charts.len(),
            embedding: Embedding::Line { origin, tangent, normal },
            energy,
            momentum_scale: c,
            y_range,
            eta_range: [-1.0, 1.0],
            trapped: Ellipse { center: [0.0, 0.0], semi_axes: [half, 1.0] },
            trapped_points: Vec::new(),
        });
        if charts.len() > samples.len() {
            break;
        }
    }
    if let Some(k) = covered.iter().position(|c| c.is_none()) {
        return Err(Error::Construction { reason: "trapped sample crosses no section within tau_max".into(), sample: k });
    }

    // Final pass: first crossings with the complete chart set.
    let none = vec![None; samples.len()];
    let finals = first_crossings(system, &charts, samples, &none, params)?;
    let mut per_chart: Vec<Vec<[f64; 2]>> = vec![Vec::new(); charts.len()];
    let mut first_sample = vec![usize::MAX; charts.len()];
    for (k, f) in finals.iter().enumerate() {
        let Some(cr) = f else {
            return Err(Error::Construction { reason: "trapped sample lost its section crossing".into(), sample: k });
        };
        per_chart[cr.chart].push(charts[cr.chart].coordinates(&cr.point));
        if first_sample[cr.chart] == usize::MAX {
            first_sample[cr.chart] = k;
        }
    }
    let mut out = Vec::new();
    for (j, mut ch) in charts.into_iter().enumerate() {
        if per_chart[j].is_empty() {
            continue;
        }
        let (ellipse, y_range, eta_range) = frame(&per_chart[j], params);
        let sample = first_sample[j];
        if y_range[1] - y_range[0] > params.max_diameter {
            return Err(Error::Construction { reason: format!("section #{j} exceeds max_diameter"), sample });
        }
        for y in [y_range[0], ellipse.center[0], y_range[1]] {
            let Embedding::Line { origin, tangent, .. } = ch.embedding else { unreachable!() };
            let x = [origin[0] + y * tangent[0], origin[1] + y * tangent[1]];
            let s2 = 2.0 * (energy - system.potential(x)?);
            let cap = (s2.max(0.0) * (1.0 - params.transversality * params.transversality)).sqrt() / c;
            if eta_range[0] <= -cap || eta_range[1] >= cap {
                return Err(Error::Construction {
                    reason: format!("section #{j} is not transversal to the flow at y = {y:.4}"),
                    sample,
                });
            }
        }
        ch.index = out.len();
        ch.y_range = y_range;
        ch.eta_range = eta_range;
        ch.trapped = ellipse;
        ch.trapped_points = std::mem::take(&mut per_chart[j]);
        out.push(ch);
    }
    Ok(out)
}

/// First accepted crossing of each sample still lacking one in `known`.
fn first_crossings(
    system: &ScatteringSystem,
    charts: &[SectionChart],
    samples: &[PhasePoint],
    known: &[Option<Crossing>],
    params: &SectionParams,
) -> Result<Vec<Option<Crossing>>> {
    use rayon::prelude::*;
    if charts.is_empty() {
        return Ok(vec![None; samples.len()]);
    }
    let energy = charts[0].energy;
    let tr2 = params.transversality * params.transversality;
    samples
        .par_iter()
        .zip(known.par_iter())
        .map(|(p, k)| {
            if k.is_some() {
                return Ok(*k);
            }
            let accept = |j: usize, y: f64, eta: f64| {
                let ch = &charts[j];
                if y < ch.y_range[0] || y > ch.y_range[1] {
                    return false;
                }
                let Embedding::Line { origin, tangent, .. } = ch.embedding else { return false };
                let x = [origin[0] + y * tangent[0], origin[1] + y * tangent[1]];
                let s2 = 2.0 * (energy - system.potential(x).unwrap_or(energy));
                ch.momentum_scale * ch.momentum_scale * eta * eta < s2 * (1.0 - tr2)
            };
            match next_line_crossing(system, charts, p, params.tau_max, &params.integrator, true, accept) {
                Ok(c) => Ok(c),
                Err(Error::Numeric(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Lowest-potential point on the forward orbit before it leaves the disk of
/// radius `hull` that holds all trapped samples.
fn lowest_potential_point(
    system: &ScatteringSystem,
    start: &PhasePoint,
    hull: f64,
    params: &SectionParams,
) -> Result<PhasePoint> {
    let tr = crate::dynamics::integrate_flow_with(system, start, params.tau_max, &params.integrator)?;
    let mut best = *start;
    let mut best_v = f64::INFINITY;
    for s in &tr.samples {
        if s.point.x[0].hypot(s.point.x[1]) > hull {
            break;
        }
        let v = system.potential(s.point.x)?;
        if v < best_v {
            best_v = v;
            best = s.point;
        }
    }
    Ok(best)
}

/// Parameters `(s, u)` with `a + s ta = b + u tb`, if the lines are not parallel.
fn line_intersection(a: [f64; 2], ta: [f64; 2], b: [f64; 2], tb: [f64; 2]) -> Option<(f64, f64)> {
    let det = ta[0] * (-tb[1]) - ta[1] * (-tb[0]);
    if det.abs() < 1e-14 {
        return None;
    }
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = (r[0] * (-tb[1]) - r[1] * (-tb[0])) / det;
    let u = (ta[0] * r[1] - ta[1] * r[0]) / det;
    Some((s, u))
}
