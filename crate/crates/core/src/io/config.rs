//! TOML run configuration shared by the command-line tools.
//!
//! Every section is optional; missing values take the defaults below.
//!
//! ```toml
//! seed = 0
//! output_dir = "runs/demo"
//!
//! [schedule]
//! levels = 50
//! coords = { sigma_max = 10.0, sigma_min = 0.01 }
//! types = { sigma_max = 5.0, sigma_min = 0.01 }
//!
//! [sampler]
//! step_size = 1e-4
//! steps_per_level = 100
//! logging = "summary"
//!
//! [field]
//! kind = "soft_sphere"
//! radius_scale = 0.7
//! stiffness = 1.0
//!
//! [metrics]
//! stol = 0.5
//! angle_tol = 10.0
//! ltol = 0.3
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::crystal::{Composition, LatticeParams};
use crate::elements;
use crate::error::{Error, Result};
use crate::metrics::{MatchTolerances, Thresholds};
use crate::noise::{NoiseSchedule, ScheduleSpec};
use crate::sampler::{HarmonicOracle, SamplerConfig, ScoreField, SoftSphereField, TrajectoryLogging};
use crate::Crystal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub step_size: f64,
    pub steps_per_level: usize,
    pub logging: TrajectoryLogging,
}

impl Default for SamplerSection {
    fn default() -> Self {
        let d = SamplerConfig::default();
        SamplerSection {
            step_size: d.step_size,
            steps_per_level: d.steps_per_level,
            logging: TrajectoryLogging::Summary,
        }
    }
}

/// Score field selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    /// Restoring field towards a reference structure.
    Harmonic,
    /// Repulsive spheres with radii `radius_scale × atomic radius`.
    SoftSphere {
        #[serde(default = "default_radius_scale")]
        radius_scale: f64,
        #[serde(default = "default_stiffness")]
        stiffness: f64,
    },
}

fn default_radius_scale() -> f64 {
    0.7
}

fn default_stiffness() -> f64 {
    1.0
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig::SoftSphere {
            radius_scale: default_radius_scale(),
            stiffness: default_stiffness(),
        }
    }
}

impl FieldConfig {
    /// Build the field; the harmonic field needs the structure it restores to.
    pub fn build(&self, reference: Option<&Crystal>) -> Result<Box<dyn ScoreField>> {
        match self {
            FieldConfig::Harmonic => {
                let r = reference.ok_or_else(|| {
                    Error::InvalidConfig("the harmonic field needs a reference structure".into())
                })?;
                Ok(Box::new(HarmonicOracle::new(r.clone())))
            }
            FieldConfig::SoftSphere {
                radius_scale,
                stiffness,
            } => Ok(Box::new(SoftSphereField::from_atomic_radii(
                *radius_scale,
                *stiffness,
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub reference: Option<PathBuf>,
    pub generated: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    /// Coverage thresholds; calibrated from the reference set when absent.
    pub delta_struc: Option<f64>,
    pub delta_comp: Option<f64>,
    pub calibration_percentile: f64,
    pub stol: f64,
    pub angle_tol: f64,
    pub ltol: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        let t = MatchTolerances::default();
        MetricsSection {
            delta_struc: None,
            delta_comp: None,
            calibration_percentile: 5.0,
            stol: t.stol,
            angle_tol: t.angle_tol,
            ltol: t.ltol,
        }
    }
}

impl MetricsSection {
    pub fn tolerances(&self) -> MatchTolerances {
        MatchTolerances {
            stol: self.stol,
            angle_tol: self.angle_tol,
            ltol: self.ltol,
        }
    }

    pub fn thresholds(&self) -> Option<Thresholds> {
        Some(Thresholds {
            delta_struc: self.delta_struc?,
            delta_comp: self.delta_comp?,
        })
    }
}

/// Aggregates for `sample`: literal values, or resampled from the reference
/// dataset when these are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSection {
    pub num_samples: usize,
    /// Element symbol → weight.
    pub composition: Option<BTreeMap<String, f64>>,
    pub lattice: Option<LatticeParams>,
    pub num_atoms: Option<usize>,
}

impl Default for SampleSection {
    fn default() -> Self {
        SampleSection {
            num_samples: 10,
            composition: None,
            lattice: None,
            num_atoms: None,
        }
    }
}

impl SampleSection {
    pub fn composition(&self) -> Result<Option<Composition>> {
        let Some(map) = &self.composition else {
            return Ok(None);
        };
        let weights = map
            .iter()
            .map(|(s, w)| Ok((elements::z_of(s)?, *w)))
            .collect::<Result<Vec<_>>>()?;
        Composition::from_weights(weights).map(Some)
    }

    /// Whether all three literal aggregates are present.
    pub fn is_literal(&self) -> bool {
        self.composition.is_some() && self.lattice.is_some() && self.num_atoms.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructSection {
    /// Coordinate noise (Å) applied before annealing.
    pub sigma: f64,
}

impl Default for ReconstructSection {
    fn default() -> Self {
        ReconstructSection { sigma: 0.5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub schedule: ScheduleSpec,
    pub sampler: SamplerSection,
    pub field: FieldConfig,
    pub data: DataPaths,
    pub metrics: MetricsSection,
    pub sample: SampleSection,
    pub reconstruct: ReconstructSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    /// Canonical TOML; the basis of the manifest's configuration hash.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        let cfg = SamplerConfig {
            schedule: NoiseSchedule::new(self.schedule)?,
            step_size: self.sampler.step_size,
            steps_per_level: self.sampler.steps_per_level,
            seed: self.seed,
            logging: self.sampler.logging,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check values and that every referenced input file exists.
    pub fn validate(&self) -> Result<()> {
        self.sampler_config()?;
        self.metrics.tolerances().validate()?;
        for (name, v) in [
            ("delta_struc", self.metrics.delta_struc),
            ("delta_comp", self.metrics.delta_comp),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
                }
            }
        }
        let q = self.metrics.calibration_percentile;
        if !(0.0..=100.0).contains(&q) {
            return Err(Error::InvalidConfig(format!(
                "calibration_percentile must be in [0, 100], got {q}"
            )));
        }
        if !(self.reconstruct.sigma.is_finite() && self.reconstruct.sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "reconstruct.sigma must be >= 0, got {}",
                self.reconstruct.sigma
            )));
        }
        if let FieldConfig::SoftSphere {
            radius_scale,
            stiffness,
        } = self.field
        {
            if !(radius_scale > 0.0 && stiffness > 0.0) {
                return Err(Error::InvalidConfig(
                    "soft-sphere radius_scale and stiffness must be positive".into(),
                ));
            }
        }
        if let Some(p) = &self.sample.lattice {
            p.validate()?;
        }
        if self.sample.num_atoms == Some(0) {
            return Err(Error::InvalidConfig("sample.num_atoms must be >= 1".into()));
        }
        self.sample.composition()?;
        for p in [&self.data.reference, &self.data.generated].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::InvalidConfig(format!(
                    "input file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }
}
