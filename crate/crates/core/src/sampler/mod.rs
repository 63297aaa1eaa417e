//! Annealed Langevin dynamics over a pluggable score field.
//!
//! A [`ScoreField`] returns, for a noisy structure at one noise level, the
//! per-atom denoising direction `s_X(M̃)` (trained to regress
//! `d_min(x̃ → x)/σ_X`) and a distribution over atom types. The sampler uses
//! the noise-scaled score `s_X(M̃)/σ_X` in the update
//!
//! ```text
//! α_j  = ε · σ²_X,j / σ²_X,L
//! X'_t = X_{t−1} + α_j · s_X/σ_X,j + √(2α_j) · ξ,   ξ ~ N(0, I)
//! X_t  = wrap(X'_t),   A_t = argmax p_A
//! ```
//!
//! running `T` steps per level from the largest noise level to the smallest
//! and carrying the final state of each level into the next.

mod harmonic;
mod soft_sphere;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::crystal::{Composition, Crystal, Lattice, Vec3};
use crate::error::{Error, Result};
use crate::noise::{gaussian_in_frame, sample_types, NoiseSchedule, TypeDistribution};
use crate::rng::{self, SimRng};

pub use harmonic::{
    displacement_crosses_boundary, harmonic_equivalence_check, EquivalenceLevel, EquivalenceReport,
    HarmonicOracle,
};
pub use soft_sphere::{soft_sphere_scores, SoftSphereField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevel {
    /// Zero-based position in the schedule.
    pub index: usize,
    pub sigma_a: f64,
    pub sigma_x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldOutput {
    /// Denoising direction per atom (Cartesian, before noise scaling).
    pub scores: Vec<Vec3>,
    pub types: TypeDistribution,
}

/// Anything that can propose denoising directions and type probabilities.
/// Implementations are shared read-only across parallel chains.
pub trait ScoreField: Send + Sync {
    fn evaluate(&self, noisy: &Crystal, level: &NoiseLevel) -> Result<FieldOutput>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryLogging {
    #[default]
    Off,
    /// One summary row per step.
    Summary,
    /// Summary rows plus every intermediate structure.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub schedule: NoiseSchedule,
    /// Base step size `ε`.
    pub step_size: f64,
    /// Steps per noise level `T`.
    pub steps_per_level: usize,
    pub seed: u64,
    pub logging: TrajectoryLogging,
}

impl Default for SamplerConfig {
    /// `ε = 1e-4`, `T = 100` on the default 50-level schedule.
    fn default() -> Self {
        SamplerConfig {
            schedule: NoiseSchedule::default(),
            step_size: 1e-4,
            steps_per_level: 100,
            seed: 0,
            logging: TrajectoryLogging::Off,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.steps_per_level == 0 {
            return Err(Error::InvalidConfig("steps_per_level must be >= 1".into()));
        }
        Ok(())
    }

    /// `α_j = ε·σ²_X,j/σ²_X,L` for every level.
    pub fn step_sizes(&self) -> Vec<f64> {
        let last = self.schedule.sigma_x_min();
        self.schedule
            .sigma_x()
            .iter()
            .map(|s| self.step_size * (s * s) / (last * last))
            .collect()
    }

    /// Force constant `k = ε/σ²_X,L` of the equivalent harmonic field.
    pub fn force_constant(&self) -> f64 {
        let last = self.schedule.sigma_x_min();
        self.step_size / (last * last)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepSummary {
    pub level: usize,
    pub step: usize,
    pub sigma_x: f64,
    pub alpha: f64,
    /// Mean Euclidean norm of the noise-scaled score.
    pub mean_score_norm: f64,
    pub type_changes: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub steps: Vec<StepSummary>,
    /// Populated only with [`TrajectoryLogging::Full`].
    pub structures: Vec<Crystal>,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "level,step,sigma_x,alpha,mean_score_norm,type_changes")?;
        for s in &self.steps {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.level, s.step, s.sigma_x, s.alpha, s.mean_score_norm, s.type_changes
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub crystal: Crystal,
    pub trajectory: Trajectory,
}

/// Uniform fractional coordinates and types drawn i.i.d. from `composition`.
pub fn init_structure(
    composition: &Composition,
    lattice: &Lattice,
    n_atoms: usize,
    rng: &mut SimRng,
) -> Result<Crystal> {
    use rand::Rng;
    if composition.is_empty() {
        return Err(Error::InvalidComposition("empty support".into()));
    }
    if n_atoms == 0 {
        return Err(Error::EmptyCrystal);
    }
    let frac = (0..n_atoms)
        .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
        .collect();
    let types = sample_types(composition, n_atoms, rng);
    Crystal::new(types, frac, *lattice)
}

/// Run the annealed Langevin chain from `initial`. Uses stream 1 of
/// `config.seed` for the Langevin noise.
pub fn anneal_from(
    field: &dyn ScoreField,
    initial: Crystal,
    config: &SamplerConfig,
) -> Result<SampleOutcome> {
    let mut rng = rng::stream(config.seed, 1);
    anneal_with_rng(field, initial, config, &mut rng)
}

pub fn anneal_with_rng(
    field: &dyn ScoreField,
    initial: Crystal,
    config: &SamplerConfig,
    rng: &mut SimRng,
) -> Result<SampleOutcome> {
    config.validate()?;
    let lattice = *initial.lattice();
    let n = initial.num_atoms();
    let mut types = initial.types().to_vec();
    let mut frac = initial.frac_coords().to_vec();
    let mut trajectory = Trajectory::default();
    let alphas = config.step_sizes();

    for level in config.schedule.levels() {
        let alpha = alphas[level.index];
        let noise_scale = (2.0 * alpha).sqrt();
        for step in 0..config.steps_per_level {
            let state = Crystal::new(types.clone(), frac.clone(), lattice)?;
            let out = field.evaluate(&state, &level)?;
            if out.scores.len() != n || out.types.num_atoms() != n {
                return Err(Error::LengthMismatch {
                    what: "field output vs atoms",
                    left: out.scores.len(),
                    right: n,
                });
            }
            if out.scores.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
                return Err(Error::NonFiniteScore {
                    level: level.index,
                    step,
                });
            }
            let mut norm_sum = 0.0;
            for (i, f) in frac.iter_mut().enumerate() {
                let score = out.scores[i] / level.sigma_x;
                norm_sum += score.norm();
                let noise = gaussian_in_frame(&lattice, 1.0, rng);
                let moved = *f + lattice.to_frac(&(score * alpha + noise * noise_scale));
                *f = moved.map(crate::crystal::wrap_unit);
            }
            let mut changes = 0;
            for (i, t) in types.iter_mut().enumerate() {
                let next = out.types.argmax(i, *t);
                if next != *t {
                    changes += 1;
                    *t = next;
                }
            }
            if config.logging != TrajectoryLogging::Off {
                trajectory.steps.push(StepSummary {
                    level: level.index,
                    step,
                    sigma_x: level.sigma_x,
                    alpha,
                    mean_score_norm: norm_sum / n as f64,
                    type_changes: changes,
                });
                if config.logging == TrajectoryLogging::Full {
                    trajectory
                        .structures
                        .push(Crystal::new(types.clone(), frac.clone(), lattice)?);
                }
            }
        }
    }
    Ok(SampleOutcome {
        crystal: Crystal::new(types, frac, lattice)?,
        trajectory,
    })
}

/// Generate one structure: uniform initialization (stream 0 of the seed)
/// followed by annealing.
pub fn anneal_sample(
    field: &dyn ScoreField,
    composition: &Composition,
    lattice: &Lattice,
    n_atoms: usize,
    config: &SamplerConfig,
) -> Result<SampleOutcome> {
    let mut init_rng = rng::stream(config.seed, 0);
    let initial = init_structure(composition, lattice, n_atoms, &mut init_rng)?;
    anneal_from(field, initial, config)
}
