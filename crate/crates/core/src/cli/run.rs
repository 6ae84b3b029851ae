use std::path::Path;

use clap::ValueEnum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::config::{RunConfig, WeylSource};
use super::manifest::{ArtifactDir, Manifest};
use crate::classical::{
    build_transfer_matrix, cycle_expansion_pressure, flow_pressure, orbit_pressure, ruelle_resonances,
    topological_pressure, write_spectrum_csv, Observable, SymbolicModel,
};
use crate::dynamics::{
    box_counting_dimension, sample_trapped_set_with, write_points_csv, PhasePoint, ScatteringSystem,
};
use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::quantum::{open_baker, save_operator, QuantumSystem};
use crate::resonances::{
    count_above, density_samples, resonance_density, spectral_gap_report, zeta_zeros, DensitySample, Domain,
    ResonanceSet,
};
use crate::section::{build_sections_with, partition_blocks, return_jacobian, ReturnMapData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Trapped-set samples and their box-counting dimension.
    Simulate,
    /// Section charts and the sampled return map.
    Section,
    /// Classical pressures and Ruelle resonances.
    Pressure,
    /// Quantum transfer matrices M(z, h).
    Quantize,
    /// Zeros of det(I - M(z, h)).
    Resonances,
    /// Fractal Weyl-law fits.
    Weyl,
    /// Every stage in order.
    All,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Section => "section",
            Command::Pressure => "pressure",
            Command::Quantize => "quantize",
            Command::Resonances => "resonances",
            Command::Weyl => "weyl",
            Command::All => "all",
        }
    }
}

/// Runs one subcommand and writes its artifacts plus `manifest.json` into
/// `out`. `config_text` is hashed into the manifest.
pub fn run(cmd: Command, cfg: &RunConfig, config_text: &str, out: &Path) -> Result<Manifest> {
    let mut dir = ArtifactDir::create(out)?;
    let mut p = Pipeline::new(cfg);
    let stages: &[Command] = match cmd {
        Command::All if cfg.is_symbolic() => &[Command::Pressure, Command::Weyl],
        Command::All => &[
            Command::Simulate,
            Command::Section,
            Command::Pressure,
            Command::Quantize,
            Command::Resonances,
            Command::Weyl,
        ],
        ref c => std::slice::from_ref(c),
    };
    for stage in stages {
        log::info!("stage {}", stage.name());
        match stage {
            Command::Simulate => p.simulate(&mut dir)?,
            Command::Section => p.section(&mut dir)?,
            Command::Pressure => p.pressure(&mut dir)?,
            Command::Quantize => p.quantize(&mut dir)?,
            Command::Resonances => p.resonances(&mut dir)?,
            Command::Weyl => p.weyl(&mut dir)?,
            Command::All => unreachable!(),
        }
    }
    dir.finish(cmd.name(), config_text, cfg.seed)
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Lazily computed stages shared by the subcommands of one run.
struct Pipeline<'a> {
    cfg: &'a RunConfig,
    system: Option<ScatteringSystem>,
    points: Option<Vec<PhasePoint>>,
    data: Option<ReturnMapData>,
    resonance_sets: Option<Vec<ResonanceSet>>,
}

impl<'a> Pipeline<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Pipeline { cfg, system: None, points: None, data: None, resonance_sets: None }
    }

    fn system(&mut self) -> Result<ScatteringSystem> {
        if self.system.is_none() {
            self.system = Some(self.cfg.scattering_system()?);
        }
        Ok(self.system.clone().expect("just set"))
    }

    fn points(&mut self) -> Result<&[PhasePoint]> {
        if self.points.is_none() {
            let sys = self.system()?;
            let s = &self.cfg.sampling;
            let pts = sample_trapped_set_with(
                &sys,
                self.cfg.energy,
                s.budget,
                s.t_max,
                self.cfg.escape_radius(&sys),
                &self.cfg.trapped_set_config(),
            )?;
            log::info!("{} trapped samples", pts.len());
            self.points = Some(pts);
        }
        Ok(self.points.as_deref().expect("just set"))
    }

    fn data(&mut self) -> Result<&ReturnMapData> {
        if self.data.is_none() {
            let sys = self.system()?;
            let energy = self.cfg.energy;
            let params = self.cfg.section_params();
            let pts = self.points()?;
            if pts.is_empty() {
                return Err(Error::Numeric("the trapped set is empty; there is nothing to section".into()));
            }
            let charts = build_sections_with(&sys, energy, pts, &params)?;
            let c = &self.cfg.section;
            let mut data = partition_blocks(&charts, &sys, c.sample_budget, &self.cfg.partition_params())?;
            data.fit_all(c.fit_degree, c.twist_floor)?;
            log::info!("{} charts, {} blocks", data.charts.len(), data.blocks.len());
            self.data = Some(data);
        }
        Ok(self.data.as_ref().expect("just set"))
    }

    fn simulate(&mut self, dir: &mut ArtifactDir) -> Result<()> {
        let cfg = self.cfg;
        let sys = self.system()?;
        let escape_radius = cfg.escape_radius(&sys);
        let scales = cfg.sampling.dimension_scales.clone();
        let pts = self.points()?;
        dir.write_with("trapped_set.csv", |w| write_points_csv(pts, w))?;
        let (dimension, residual, note) = if pts.is_empty() {
            (None, None, Some("no trapped samples".to_string()))
        } else {
            match box_counting_dimension(pts, &scales) {
                Ok((d, r)) => (Some(d), Some(r), None),
                Err(e @ Error::Parameter(_)) => (None, None, Some(e.to_string())),
                Err(e) => return Err(e),
            }
        };
        let summary = json!({
            "energy": cfg.energy,
            "samples": pts.len(),
            "t_max": cfg.sampling.t_max,
            "escape_radius": escape_radius,
            "dimension": dimension,
            "dimension_residual": residual,
            "dimension_scales": scales,
            "note": note,
        });
        dir.write("trapped_set.json", &to_json(&summary)?)?;
        Ok(())
    }

    fn section(&mut self, dir: &mut ArtifactDir) -> Result<()> {
        let sys = self.system()?;
        let cfg = self.cfg;
        let params = cfg.section_params();
        let data = self.data()?;
        dir.write("return_map.json", data.to_json()?.as_bytes())?;

        // area preservation at random sampled departures
        let c = &cfg.section;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut checks = Vec::new();
        let mut worst: f64 = 0.0;
        let mut attempts = 0;
        while checks.len() < c.validation_points && attempts < 20 * c.validation_points.max(1) {
            attempts += 1;
            let b = &data.blocks[rng.gen_range(0..data.blocks.len())];
            if b.samples.is_empty() {
                continue;
            }
            let s = &b.samples[rng.gen_range(0..b.samples.len())];
            let jac = match return_jacobian(&data.charts, &sys, b.source, s.departure, c.jacobian_step, &params) {
                Ok(j) => j,
                // stencils that straddle a block edge or escape are redrawn
                Err(Error::Numeric(_) | Error::Escape { .. }) => continue,
                Err(e) => return Err(e),
            };
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            worst = worst.max((det.abs() - 1.0).abs());
            checks.push(json!({ "source": b.source, "target": b.target, "departure": s.departure, "det": det }));
        }
        let blocks: Vec<_> = data
            .blocks
            .iter()
            .map(|b| {
                let g = b.generating_function.as_ref();
                json!({
                    "target": b.target,
                    "source": b.source,
                    "samples": b.samples.len(),
                    "value_residual": g.map(|g| g.value_residual),
                    "tau_residual": g.map(|g| g.tau_residual),
                    "min_twist": g.map(|g| g.min_twist),
                })
            })
            .collect();
        let report = json!({
            "seed": cfg.seed,
            "charts": data.charts.len(),
            "j_plus": data.j_plus,
            "blocks": blocks,
            "area_checks": checks,
            "area_max_deviation": worst,
            "area_tol": c.area_tol,
        });
        dir.write("section_checks.json", &to_json(&report)?)?;
        if checks.len() < c.validation_points {
            return Err(Error::Consistency(format!(
                "only {} of {} area checks could be placed",
                checks.len(),
                c.validation_points
            )));
        }
        if worst > c.area_tol {
            return Err(Error::Consistency(format!(
                "return map changes area: max ||det D kappa| - 1| = {worst:.3e} > {:.1e}",
                c.area_tol
            )));
        }
        Ok(())
    }

    fn classical_model(&mut self) -> Result<SymbolicModel> {
        if let Some(m) = self.cfg.symbolic_model() {
            return Ok(m);
        }
        let sys = self.system()?;
        let params = self.cfg.section_params();
        let data = self.data()?.clone();
        SymbolicModel::from_return_map(data, sys, params)
    }

    fn pressure(&mut self, dir: &mut ArtifactDir) -> Result<()> {
        let cfg = self.cfg;
        let cc = &cfg.classical;
        let model = self.classical_model()?;
        let disc = cfg.classical_discretization();
        let symbolic = cfg.is_symbolic();

        let mut reports = Vec::new();
        for f in &cc.weights {
            reports.push(topological_pressure(&model, f, disc)?);
        }
        let mut orbit = Vec::new();
        if let (true, Some(t)) = (symbolic, cc.orbit_period) {
            for f in &cc.weights {
                orbit.push(json!({ "weight": f, "period": t, "value": orbit_pressure(&model, f, t)? }));
            }
        }
        let roof = cc.roof.clone().or_else(|| (!symbolic).then(Observable::return_time));
        let mut flow = Vec::new();
        if let Some(r) = &roof {
            for f in &cc.weights {
                flow.push(json!({ "weight": f, "roof": r, "value": flow_pressure(&model, f, r, disc)? }));
            }
        }
        let mut cycles = Vec::new();
        if let Some(ScatteringSystem::DiskBilliard(d)) = &self.system {
            for beta in [cfg.resonances.gap_beta, 1.0] {
                let v = cycle_expansion_pressure(d, beta, cc.cycle_length)?;
                cycles.push(json!({ "beta": beta, "max_len": cc.cycle_length, "value": v }));
            }
        }
        let ruelle = match &cc.ruelle {
            Some(rc) if symbolic => {
                let set = ruelle_resonances(&model, &rc.weight, &rc.roof, rc.domain, rc.degree, &rc.zero_finder)?;
                dir.write_with("ruelle.csv", |w| set.write_csv(w))?;
                Some(set)
            }
            _ => None,
        };
        if symbolic {
            let f = cc.weights.first().cloned().unwrap_or_default();
            let m = build_transfer_matrix(&model, &f, disc, None)?;
            dir.write_with("transfer_spectrum.csv", |w| write_spectrum_csv(&m, w))?;
        }
        let value = reports.first().map(|r| r.value);
        let summary = json!({
            "model": model.descriptor(),
            "value": value,
            "reports": reports,
            "orbit_sums": orbit,
            "flow": flow,
            "cycle_expansion": cycles,
            "ruelle": ruelle,
        });
        dir.write("pressure.json", &to_json(&summary)?)?;
        Ok(())
    }

    fn quantum(&mut self, h: f64) -> Result<QuantumSystem> {
        let params = self.cfg.quant_params();
        let data = self.data()?;
        QuantumSystem::new(data, h, &params)
    }

    fn quantize(&mut self, dir: &mut ArtifactDir) -> Result<()> {
        let cfg = self.cfg;
        let mut summary = Vec::new();
        for (k, &h) in cfg.quantum.h.iter().enumerate() {
            let q = self.quantum(h)?;
            for (m, z) in cfg.quantum.z.iter().enumerate() {
                let op = q.operator(Complex64::new(z[0], z[1]))?;
                for path in save_operator(dir.root(), &format!("m_h{k}_z{m}"), &q, &op)? {
                    dir.adopt(&path)?;
                }
            }
            summary.push(json!({ "h": h, "ranks": q.ranks(), "dim": q.dim() }));
        }
        dir.write("quantum.json", &to_json(&summary)?)?;
        Ok(())
    }

    fn resonance_sets(&mut self) -> Result<Vec<ResonanceSet>> {
        if let Some(s) = &self.resonance_sets {
            return Ok(s.clone());
        }
        let cfg = self.cfg;
        let mut sets = Vec::new();
        for &h in &cfg.quantum.h {
            let q = self.quantum(h)?;
            let domain = Domain::Disk { center: [0.0, 0.0], radius: cfg.resonances.c * h };
            let set = zeta_zeros(|z| q.matrix(z), domain, &cfg.resonances.zero_finder)?
                .with_h(h)
                .with_provenance(&format!("det(I - M(z, h)), dimension {}", q.dim()));
            log::info!("h = {h}: {} zeros, winding {}", set.zeros.len(), set.winding);
            sets.push(set);
        }
        self.resonance_sets = Some(sets.clone());
        Ok(sets)
    }

    fn resonances(&mut self, dir: &mut ArtifactDir) -> Result<()> {
        let cfg = self.cfg;
        let sets = self.resonance_sets()?;
        let pressure = match self.system()? {
            ScatteringSystem::DiskBilliard(d) => {
                Some(cycle_expansion_pressure(&d, cfg.resonances.gap_beta, cfg.classical.cycle_length)?)
            }
            ScatteringSystem::SmoothPotential(_) => None,
        };
        let mut gaps = Vec::new();
        for (k, set) in sets.iter().enumerate() {
            dir.write_with(&format!("resonances_h{k}.csv"), |w| set.write_csv(w))?;
            dir.write(&format!("resonances_h{k}.json"), set.to_json()?.as_bytes())?;
            let gap = match pressure {
                Some(p) if !set.zeros.is_empty() => Some(spectral_gap_report(set, p)?),
                _ => None,
            };
            gaps.push(json!({ "h": set.h, "zeros": set.zeros.len(), "winding": set.winding, "gap": gap }));
        }
        dir.write("spectral_gap.json", &to_json(&gaps)?)?;
        Ok(())
    }

    fn weyl(&mut self, dir: &mut ArtifactDir) -> Result<()> {
        let w = &self.cfg.weyl;
        let source = if self.cfg.is_symbolic() { WeylSource::Baker } else { w.source };
        let samples: Vec<DensitySample> = match source {
            WeylSource::Baker => w
                .sizes
                .iter()
                .map(|&n| {
                    let eigs = eigenvalues(open_baker(n, true)?.as_ref())?;
                    Ok(DensitySample { size: n as f64, count: count_above(&eigs, w.threshold) })
                })
                .collect::<Result<_>>()?,
            WeylSource::Resonances => density_samples(&self.resonance_sets()?)?,
        };
        let fit = resonance_density(&samples)?;
        let summary = json!({
            "source": source,
            "threshold": w.threshold,
            "exponent": fit.exponent,
            "fit": fit,
        });
        dir.write("weyl.json", &to_json(&summary)?)?;
        Ok(())
    }
}
