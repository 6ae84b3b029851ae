use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classical::{Discretization, Observable, SymbolicModel};
use crate::dynamics::{
    three_disk, Disk, DiskConfiguration, GaussianBump, GaussianPotential, IntegratorConfig, ScatteringSystem,
    TrappedSetConfig,
};
use crate::error::{Error, Result};
use crate::quantum::{ProjectorParams, QuantParams};
use crate::resonances::{Domain, ZeroFinderParams};
use crate::section::{PartitionParams, SectionParams};

/// A complete run description, read from TOML. Every table except `system`
/// may be omitted; omitted keys take the defaults listed in the README.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_energy")]
    pub energy: f64,
    pub system: SystemSpec,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub section: SectionConfig,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub quantum: QuantumConfig,
    #[serde(default)]
    pub resonances: ResonanceConfig,
    #[serde(default)]
    pub weyl: WeylConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_energy() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Equilateral three-disk billiard centred on the origin.
    ThreeDisk { center_distance: f64, radius: f64 },
    DiskBilliard { disks: Vec<Disk> },
    SmoothPotential {
        bumps: Vec<GaussianBump>,
        support_radius: f64,
        #[serde(default)]
        cutoff_inner: Option<f64>,
    },
    /// An interval map with an exact symbolic description; only the
    /// classical and baker-map stages apply.
    Symbolic { model: SymbolicName },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolicName {
    TwoShift,
    GoldenMean,
    TernaryCut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub budget: usize,
    pub t_max: f64,
    /// Defaults to the support radius plus one.
    pub escape_radius: Option<f64>,
    pub families: usize,
    pub directions: usize,
    pub cycle_length: usize,
    /// Spacing of emitted samples along each trapped orbit.
    pub emit_dt: f64,
    pub tol: f64,
    /// Box sizes for the box-counting dimension; must span a decade.
    pub dimension_scales: Vec<f64>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        let t = TrappedSetConfig::default();
        SamplingConfig {
            budget: 100_000,
            t_max: 30.0,
            escape_radius: None,
            families: t.families,
            directions: t.directions,
            cycle_length: t.cycle_length,
            emit_dt: t.emit_dt,
            tol: t.integrator.tol,
            dimension_scales: vec![0.4, 0.2, 0.1, 0.05, 0.025],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionConfig {
    pub max_diameter: f64,
    pub delta_bdry: f64,
    pub ellipse_pad: f64,
    pub tau_max: f64,
    pub transversality: f64,
    pub tol: f64,
    /// Return-map samples spread over all blocks.
    pub sample_budget: usize,
    pub margin: f64,
    pub fit_degree: usize,
    pub twist_floor: f64,
    /// Random departures (drawn from `seed`) at which `|det D kappa|` is checked.
    pub validation_points: usize,
    pub jacobian_step: f64,
    /// Largest accepted `| |det D kappa| - 1 |`.
    pub area_tol: f64,
}

impl Default for SectionConfig {
    fn default() -> Self {
        let s = SectionParams::default();
        SectionConfig {
            max_diameter: s.max_diameter,
            delta_bdry: s.delta_bdry,
            ellipse_pad: s.ellipse_pad,
            tau_max: s.tau_max,
            transversality: s.transversality,
            tol: s.integrator.tol,
            sample_budget: 30_000,
            margin: 0.05,
            fit_degree: 8,
            twist_floor: 1e-3,
            validation_points: 50,
            jacobian_step: 1e-6,
            area_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalConfig {
    /// Defaults to collocation of degree 24 on symbolic models and a
    /// 64 x 64 Ulam grid per chart on sampled sections.
    pub discretization: Option<Discretization>,
    /// Potentials `f` whose pressures are reported.
    pub weights: Vec<Observable>,
    /// Roof function for the flow pressure `s` with `P(f - s r) = 0`.
    pub roof: Option<Observable>,
    /// Period of the exact orbit-sum cross-check (symbolic models only).
    pub orbit_period: Option<usize>,
    /// Longest cycle in the disk-billiard cycle expansion.
    pub cycle_length: usize,
    pub ruelle: Option<RuelleConfig>,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        ClassicalConfig {
            discretization: None,
            weights: vec![Observable::zero()],
            roof: None,
            orbit_period: Some(12),
            cycle_length: 6,
            ruelle: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuelleConfig {
    pub weight: Observable,
    pub roof: Observable,
    pub domain: Domain,
    #[serde(default = "default_ruelle_degree")]
    pub degree: usize,
    #[serde(default)]
    pub zero_finder: ZeroFinderParams,
}

fn default_ruelle_degree() -> usize {
    24
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumConfig {
    /// Semiclassical parameters, strictly decreasing.
    pub h: Vec<f64>,
    pub oversampling: f64,
    pub min_nodes: usize,
    pub nodes: Option<usize>,
    pub twist_floor: f64,
    pub ellipse_scale: f64,
    pub projector_oversampling: f64,
    pub projector_tail: f64,
    /// Points `z` (as `[re, im]`) at which `M(z, h)` is written out.
    pub z: Vec<[f64; 2]>,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        let q = QuantParams::default();
        QuantumConfig {
            h: vec![1.0 / 64.0],
            oversampling: q.oversampling,
            min_nodes: q.min_nodes,
            nodes: None,
            twist_floor: q.twist_floor,
            ellipse_scale: 1.0,
            projector_oversampling: q.projector.oversampling,
            projector_tail: q.projector.tail,
            z: vec![[0.0, 0.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceConfig {
    /// Zeros are sought in the disk `|z| < C h`.
    #[serde(rename = "C")]
    pub c: f64,
    pub zero_finder: ZeroFinderParams,
    /// Flow pressure at this exponent of the unstable Jacobian feeds the
    /// spectral-gap report (disk billiards only).
    pub gap_beta: f64,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        ResonanceConfig { c: 5.0, zero_finder: ZeroFinderParams::default(), gap_beta: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylSource {
    /// Eigenvalue counts of the open quantum baker map.
    Baker,
    /// Zero counts of `det(I - M(z, h))` over the `quantum.h` list.
    Resonances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeylConfig {
    pub source: WeylSource,
    /// Baker dimensions `N`, multiples of 3.
    pub sizes: Vec<usize>,
    pub threshold: f64,
}

impl Default for WeylConfig {
    fn default() -> Self {
        WeylConfig { source: WeylSource::Baker, sizes: vec![81, 243, 729, 2187], threshold: 0.5 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Field-level checks; all problems are reported at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{name} = {v}: must be positive and finite"));
            }
        };
        positive("energy", self.energy);
        let s = &self.sampling;
        positive("sampling.t_max", s.t_max);
        positive("sampling.tol", s.tol);
        positive("sampling.emit_dt", s.emit_dt);
        if let Some(r) = s.escape_radius {
            positive("sampling.escape_radius", r);
        }
        for (k, v) in s.dimension_scales.iter().enumerate() {
            positive(&format!("sampling.dimension_scales[{k}]"), *v);
        }
        let c = &self.section;
        positive("section.max_diameter", c.max_diameter);
        positive("section.tau_max", c.tau_max);
        positive("section.transversality", c.transversality);
        positive("section.tol", c.tol);
        positive("section.twist_floor", c.twist_floor);
        positive("section.jacobian_step", c.jacobian_step);
        positive("section.area_tol", c.area_tol);
        let q = &self.quantum;
        positive("quantum.oversampling", q.oversampling);
        positive("quantum.twist_floor", q.twist_floor);
        positive("quantum.ellipse_scale", q.ellipse_scale);
        positive("quantum.projector_oversampling", q.projector_oversampling);
        positive("quantum.projector_tail", q.projector_tail);
        for (k, h) in q.h.iter().enumerate() {
            positive(&format!("quantum.h[{k}]"), *h);
        }
        let r = &self.resonances;
        positive("resonances.C", r.c);
        positive("resonances.zero_finder.min_cell", r.zero_finder.min_cell);
        positive("resonances.zero_finder.fd_step", r.zero_finder.fd_step);
        if let Some(t) = r.zero_finder.zero_tol {
            positive("resonances.zero_finder.zero_tol", t);
        }
        positive("weyl.threshold", self.weyl.threshold);
        if let Some(rc) = &self.classical.ruelle {
            if let Some(t) = rc.zero_finder.zero_tol {
                positive("classical.ruelle.zero_finder.zero_tol", t);
            }
            positive("classical.ruelle.zero_finder.fd_step", rc.zero_finder.fd_step);
        }

        if !(c.delta_bdry >= 0.0) {
            bad.push(format!("section.delta_bdry = {}: must be non-negative", c.delta_bdry));
        }
        if !(c.ellipse_pad >= 0.0) {
            bad.push(format!("section.ellipse_pad = {}: must be non-negative", c.ellipse_pad));
        }
        if !(c.margin >= 0.0) {
            bad.push(format!("section.margin = {}: must be non-negative", c.margin));
        }
        if s.budget == 0 {
            bad.push("sampling.budget: must be positive".into());
        }
        if c.sample_budget == 0 {
            bad.push("section.sample_budget: must be positive".into());
        }
        if q.h.is_empty() {
            bad.push("quantum.h: needs at least one value".into());
        }
        for (k, w) in q.h.windows(2).enumerate() {
            if !(w[1] < w[0]) {
                bad.push(format!("quantum.h[{}] = {}: the h list must be strictly decreasing", k + 1, w[1]));
            }
        }
        if q.z.iter().flatten().any(|v| !v.is_finite()) {
            bad.push("quantum.z: entries must be finite".into());
        }
        for (k, n) in self.weyl.sizes.iter().enumerate() {
            if *n == 0 || n % 3 != 0 {
                bad.push(format!("weyl.sizes[{k}] = {n}: baker dimensions must be positive multiples of 3"));
            }
        }
        if let SystemSpec::Symbolic { .. } = self.system {
            if let Some(Discretization::Collocation { degree: 0 } | Discretization::Ulam { cells: 0 }) =
                self.classical.discretization
            {
                bad.push("classical.discretization: resolution must be positive".into());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.system, SystemSpec::Symbolic { .. })
    }

    /// The flow, or a configuration error for symbolic systems.
    pub fn scattering_system(&self) -> Result<ScatteringSystem> {
        let wrap = |e: Error| Error::Config(format!("system: {e}"));
        match &self.system {
            SystemSpec::ThreeDisk { center_distance, radius } => {
                Ok(ScatteringSystem::DiskBilliard(three_disk(*center_distance, *radius).map_err(wrap)?))
            }
            SystemSpec::DiskBilliard { disks } => {
                Ok(ScatteringSystem::DiskBilliard(DiskConfiguration::new(disks.clone()).map_err(wrap)?))
            }
            SystemSpec::SmoothPotential { bumps, support_radius, cutoff_inner } => {
                let p = match cutoff_inner {
                    Some(r) => GaussianPotential::with_cutoff(bumps.clone(), *support_radius, *r),
                    None => GaussianPotential::new(bumps.clone(), *support_radius),
                };
                Ok(ScatteringSystem::SmoothPotential(p.map_err(wrap)?))
            }
            SystemSpec::Symbolic { .. } => {
                Err(Error::Config("system: a symbolic model has no flow to integrate".into()))
            }
        }
    }

    pub fn symbolic_model(&self) -> Option<SymbolicModel> {
        match self.system {
            SystemSpec::Symbolic { model } => Some(match model {
                SymbolicName::TwoShift => SymbolicModel::doubling(),
                SymbolicName::GoldenMean => SymbolicModel::golden_mean(),
                SymbolicName::TernaryCut => SymbolicModel::ternary_cut(),
            }),
            _ => None,
        }
    }

    pub fn escape_radius(&self, system: &ScatteringSystem) -> f64 {
        self.sampling.escape_radius.unwrap_or(system.support_radius() + 1.0)
    }

    pub fn trapped_set_config(&self) -> TrappedSetConfig {
        TrappedSetConfig {
            families: self.sampling.families,
            directions: self.sampling.directions,
            cycle_length: self.sampling.cycle_length,
            emit_dt: self.sampling.emit_dt,
            integrator: IntegratorConfig::adaptive(self.sampling.tol),
            ..TrappedSetConfig::default()
        }
    }

    pub fn section_params(&self) -> SectionParams {
        let c = &self.section;
        SectionParams {
            max_diameter: c.max_diameter,
            delta_bdry: c.delta_bdry,
            ellipse_pad: c.ellipse_pad,
            tau_max: c.tau_max,
            transversality: c.transversality,
            integrator: IntegratorConfig::adaptive(c.tol),
        }
    }

    pub fn partition_params(&self) -> PartitionParams {
        PartitionParams { margin: self.section.margin, section: self.section_params() }
    }

    pub fn quant_params(&self) -> QuantParams {
        let q = &self.quantum;
        QuantParams {
            oversampling: q.oversampling,
            min_nodes: q.min_nodes,
            nodes: q.nodes,
            twist_floor: q.twist_floor,
            z_scale: self.resonances.c,
            ellipse_scale: q.ellipse_scale,
            projector: ProjectorParams {
                oversampling: q.projector_oversampling,
                tail: q.projector_tail,
                ..ProjectorParams::default()
            },
        }
    }

    pub fn classical_discretization(&self) -> Discretization {
        self.classical.discretization.unwrap_or(if self.is_symbolic() {
            Discretization::Collocation { degree: 24 }
        } else {
            Discretization::Ulam { cells: 64 }
        })
    }
}
