//! Experiment configuration with defaults for the two simulated phantoms.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::SpaceSpec;
use crate::phantoms::{IntensityPhantom, MassPhantom};
use crate::radon::{AngleMode, GeometrySpec};
use crate::solvers::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomKind {
    Intensity,
    Mass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Temporal,
    Landweber,
    Dual,
    DualStatic,
    Fbp,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Temporal => "temporal",
            SolverKind::Landweber => "landweber",
            SolverKind::Dual => "dual",
            SolverKind::DualStatic => "dual_static",
            SolverKind::Fbp => "fbp",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "temporal" => Ok(SolverKind::Temporal),
            "landweber" => Ok(SolverKind::Landweber),
            "dual" => Ok(SolverKind::Dual),
            "dual_static" => Ok(SolverKind::DualStatic),
            "fbp" => Ok(SolverKind::Fbp),
            other => Err(Error::Config(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Standard deviation of the additive Gaussian noise per sinogram sample.
    pub std: f64,
    pub seed: u64,
    /// Replaces the measured noise level in the stopping rule.
    pub delta: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { std: 0.05, seed: 0, delta: None }
    }
}

/// Parameter grids. An empty list means "the value in the solver config".
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub phantom: PhantomKind,
    pub n_frames: usize,
    pub generation_resolution: usize,
    pub reconstruction_resolution: usize,
    pub intensity: IntensityPhantom,
    pub mass: MassPhantom,
    pub geometry: GeometrySpec,
    pub spaces: SpaceSpec,
    pub solver: SolverKind,
    pub solver_config: SolverConfig,
    pub noise: NoiseConfig,
    pub sweep: SweepConfig,
    pub output_dir: PathBuf,
    pub allow_inverse_crime: bool,
}

/// `n` log-spaced values from `lo` to `hi`, both included.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
        }
    }
}

impl ExperimentConfig {
    /// 20 frames of the intensity phantom on 41², reconstructed on 33² from
    /// 40 offsets and 7 rotating angles per step.
    pub fn intensity() -> Self {
        let n_frames = 20;
        Self {
            phantom: PhantomKind::Intensity,
            n_frames,
            generation_resolution: 41,
            reconstruction_resolution: 33,
            intensity: IntensityPhantom::default(),
            mass: MassPhantom::default(),
            geometry: GeometrySpec {
                n_offsets: 40,
                n_angles_per_step: 7,
                n_time_steps: n_frames,
                mode: AngleMode::Rotating,
                horizon: 1.0,
            },
            spaces: SpaceSpec::hilbert(),
            solver: SolverKind::Temporal,
            solver_config: SolverConfig {
                gamma: 10.0,
                ..SolverConfig::default()
            },
            noise: NoiseConfig::default(),
            sweep: SweepConfig {
                alphas: vec![],
                betas: logspace(1.0, 1000.0, 19),
                gammas: vec![0.1, 1.0, 10.0],
            },
            output_dir: PathBuf::from("out"),
            allow_inverse_crime: false,
        }
    }

    /// 20 frames of the mass phantom on 83², reconstructed on 61² from 160 offsets.
    pub fn mass() -> Self {
        let base = Self::intensity();
        Self {
            phantom: PhantomKind::Mass,
            generation_resolution: 83,
            reconstruction_resolution: 61,
            geometry: GeometrySpec { n_offsets: 160, ..base.geometry.clone() },
            solver_config: SolverConfig { rho: 1.1, ..base.solver_config.clone() },
            ..base
        }
    }

    pub fn preset(kind: PhantomKind) -> Self {
        match kind {
            PhantomKind::Intensity => Self::intensity(),
            PhantomKind::Mass => Self::mass(),
        }
    }

    /// Reads a JSON object whose fields override the preset named by its
    /// `phantom` field (intensity when absent).
    pub fn from_json(text: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(text)?;
        if !user.is_object() {
            return Err(Error::Config("experiment config must be a JSON object".into()));
        }
        let kind = match user.get("phantom") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("phantom: {e}")))?,
            None => PhantomKind::Intensity,
        };
        let mut merged = serde_json::to_value(Self::preset(kind))?;
        merge(&mut merged, user);
        let cfg: Self = serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.spaces.validate()?;
        self.solver_config.validate()?;
        if self.n_frames != self.geometry.n_time_steps {
            return Err(Error::Config(format!(
                "{} frames but the geometry has {} time steps",
                self.n_frames, self.geometry.n_time_steps
            )));
        }
        if self.generation_resolution < 2 || self.reconstruction_resolution < 2 {
            return Err(Error::Config("resolutions must be at least 2".into()));
        }
        if self.generation_resolution == self.reconstruction_resolution && !self.allow_inverse_crime {
            return Err(Error::Config(format!(
                "generation and reconstruction both use {0}×{0}; pick different grids or allow the inverse crime",
                self.generation_resolution
            )));
        }
        if !(self.noise.std >= 0.0 && self.noise.std.is_finite()) {
            return Err(Error::Config(format!("noise std {} must be nonnegative", self.noise.std)));
        }
        if let Some(d) = self.noise.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("noise level {d} must be nonnegative")));
            }
        }
        let grids = [&self.sweep.alphas, &self.sweep.betas, &self.sweep.gammas];
        if grids.iter().flat_map(|g| g.iter()).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("sweep values must be finite and nonnegative".into()));
        }
        if self.sweep.gammas.iter().any(|g| *g <= 0.0) {
            return Err(Error::Config("sweep γ values must be positive".into()));
        }
        Ok(())
    }
}

/// Recursive object merge; non-object values in `patch` replace.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
