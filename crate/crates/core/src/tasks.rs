//! Batch pipelines behind the command-line tools. Each record or sample `i`
//! draws from its own seed `child_seed(seed, i)`, so results do not depend
//! on thread scheduling.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::crystal::{Composition, Crystal, Lattice};
use crate::error::{Error, Result};
use crate::io::{CrystalRecord, FieldConfig};
use crate::metrics::{
    calibrate_thresholds, coverage, property_stats, structure_match, validity, CoverageReport,
    CustomProperty, Fingerprints, MatchTolerances, PropertyStats, Thresholds,
};
use crate::noise::{perturb_coords, perturb_types};
use crate::rng;
use crate::sampler::{
    anneal_from, anneal_sample, HarmonicOracle, SamplerConfig, Trajectory, TrajectoryLogging,
};

/// Version of every JSON report written by this crate.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Label attached to coverage numbers.
pub const FINGERPRINT_LABEL: &str = "smeared-rdf/element-property-stats";

fn record_seed(seed: u64, i: usize) -> u64 {
    rng::child_seed(seed, i as u64)
}

/// Perturb every record: Gaussian coordinates with std `sigma_x` (Å) and
/// types from the mixture with weight `sigma_a`. Zero noise returns the
/// input unchanged.
pub fn perturb_dataset(
    records: &[CrystalRecord],
    sigma_x: f64,
    sigma_a: f64,
    seed: u64,
) -> Result<Vec<CrystalRecord>> {
    if !(sigma_x.is_finite() && sigma_x >= 0.0) {
        return Err(Error::InvalidSchedule(format!(
            "sigma_x = {sigma_x} must be >= 0"
        )));
    }
    records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let mut r = rng::stream(record_seed(seed, i), 0);
            let noisy = perturb_coords(&rec.crystal, sigma_x, &mut r).crystal;
            let types = perturb_types(rec.crystal.types(), &rec.crystal.composition(), sigma_a, &mut r)?;
            Ok(CrystalRecord {
                id: rec.id.clone(),
                crystal: noisy.with_types(types)?,
                properties: rec.properties.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructEntry {
    pub id: String,
    pub matched: bool,
    pub rmse_normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructReport {
    pub schema_version: u32,
    pub kind: &'static str,
    pub num_records: usize,
    pub num_matched: usize,
    /// Percent of records matched.
    pub match_rate: f64,
    /// Mean over matched records.
    pub mean_rmse_normalized: Option<f64>,
    pub sigma: f64,
    pub tolerances: MatchTolerances,
    pub records: Vec<ReconstructEntry>,
}

/// Perturb each record by `sigma` Å, anneal back with the harmonic field of
/// the record itself, and match the result against the original.
pub fn reconstruct(
    records: &[CrystalRecord],
    sampler: &SamplerConfig,
    sigma: f64,
    tol: &MatchTolerances,
) -> Result<(ReconstructReport, Vec<CrystalRecord>)> {
    if records.is_empty() {
        return Err(Error::EmptyInput("reconstruction dataset"));
    }
    sampler.validate()?;
    let results: Vec<(ReconstructEntry, CrystalRecord)> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let seed = record_seed(sampler.seed, i);
            let mut r = rng::stream(seed, 2);
            let start = perturb_coords(&rec.crystal, sigma, &mut r).crystal;
            let cfg = SamplerConfig {
                seed,
                logging: TrajectoryLogging::Off,
                ..sampler.clone()
            };
            let oracle = HarmonicOracle::new(rec.crystal.clone());
            let out = anneal_from(&oracle, start, &cfg)?;
            let m = structure_match(&rec.crystal, &out.crystal, tol)?;
            Ok((
                ReconstructEntry {
                    id: rec.id.clone(),
                    matched: m.matched,
                    rmse_normalized: m.rmse_normalized,
                },
                CrystalRecord {
                    id: rec.id.clone(),
                    crystal: out.crystal,
                    properties: Default::default(),
                },
            ))
        })
        .collect::<Result<_>>()?;
    let (entries, crystals): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let rmses: Vec<f64> = entries.iter().filter_map(|e| e.rmse_normalized).collect();
    let report = ReconstructReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: "reconstruct",
        num_records: entries.len(),
        num_matched: rmses.len(),
        match_rate: 100.0 * rmses.len() as f64 / entries.len() as f64,
        mean_rmse_normalized: (!rmses.is_empty()).then(|| rmses.iter().sum::<f64>() / rmses.len() as f64),
        sigma,
        tolerances: *tol,
        records: entries,
    };
    Ok((report, crystals))
}

/// Where `sample` takes composition, lattice and atom count from.
#[derive(Debug, Clone, Copy)]
pub enum AggregateSource<'a> {
    Literal {
        composition: &'a Composition,
        lattice: &'a Lattice,
        num_atoms: usize,
    },
    /// Each sample copies the aggregates of a uniformly drawn record.
    Dataset(&'a [CrystalRecord]),
}

#[derive(Debug, Clone)]
pub struct SampleRun {
    pub records: Vec<CrystalRecord>,
    pub trajectories: Vec<Trajectory>,
}

impl SampleRun {
    /// Step summaries of all samples, with a leading `sample` column.
    pub fn write_trajectories_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "sample,level,step,sigma_x,alpha,mean_score_norm,type_changes"
        )?;
        for (i, t) in self.trajectories.iter().enumerate() {
            for s in &t.steps {
                writeln!(
                    out,
                    "{i},{},{},{},{},{},{}",
                    s.level, s.step, s.sigma_x, s.alpha, s.mean_score_norm, s.type_changes
                )?;
            }
        }
        Ok(())
    }
}

/// Generate `num_samples` structures with annealed Langevin dynamics.
pub fn sample(
    field: &FieldConfig,
    source: AggregateSource<'_>,
    num_samples: usize,
    sampler: &SamplerConfig,
) -> Result<SampleRun> {
    sampler.validate()?;
    if let AggregateSource::Dataset(d) = source {
        if d.is_empty() {
            return Err(Error::EmptyInput("aggregate dataset"));
        }
    }
    let outcomes: Vec<(CrystalRecord, Trajectory)> = (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let seed = record_seed(sampler.seed, i);
            let cfg = SamplerConfig {
                seed,
                ..sampler.clone()
            };
            let (reference, comp, lattice, n) = match source {
                AggregateSource::Literal {
                    composition,
                    lattice,
                    num_atoms,
                } => (None, composition.clone(), *lattice, num_atoms),
                AggregateSource::Dataset(d) => {
                    let pick = &d[rng::stream(seed, 3).random_range(0..d.len())].crystal;
                    (Some(pick), pick.composition(), *pick.lattice(), pick.num_atoms())
                }
            };
            let f = field.build(reference)?;
            let out = anneal_sample(f.as_ref(), &comp, &lattice, n, &cfg)?;
            Ok((
                CrystalRecord::new(format!("gen-{i:05}"), out.crystal),
                out.trajectory,
            ))
        })
        .collect::<Result<_>>()?;
    let (records, trajectories) = outcomes.into_iter().unzip();
    Ok(SampleRun {
        records,
        trajectories,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValiditySummary {
    pub count: usize,
    /// Percent structurally valid.
    pub struct_valid: f64,
    /// Percent compositionally valid.
    pub comp_valid: f64,
    /// Percent valid in both senses.
    pub valid: f64,
}

/// Per-record `(struct_valid, comp_valid)`.
pub fn validity_flags(records: &[CrystalRecord]) -> Result<Vec<(bool, bool)>> {
    records
        .par_iter()
        .map(|r| validity(&r.crystal).map(|v| (v.struct_valid, v.comp_valid)))
        .collect()
}

fn summarize(flags: &[(bool, bool)]) -> ValiditySummary {
    let pct = |k: usize| {
        if flags.is_empty() {
            0.0
        } else {
            100.0 * k as f64 / flags.len() as f64
        }
    };
    ValiditySummary {
        count: flags.len(),
        struct_valid: pct(flags.iter().filter(|f| f.0).count()),
        comp_valid: pct(flags.iter().filter(|f| f.1).count()),
        valid: pct(flags.iter().filter(|f| f.0 && f.1).count()),
    }
}

pub fn fingerprints(records: &[CrystalRecord]) -> Result<Vec<Fingerprints>> {
    records.par_iter().map(|r| Fingerprints::of(&r.crystal)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub kind: &'static str,
    pub fingerprints: &'static str,
    pub validity: ValiditySummary,
    pub reference_validity: ValiditySummary,
    pub thresholds: Thresholds,
    /// Over all generated records.
    pub coverage: CoverageReport,
    /// Over valid generated records; absent when none is valid.
    pub property_stats: Option<PropertyStats>,
}

fn property_column(records: &[&CrystalRecord], name: &str) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            r.properties
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidConfig(format!("record {:?} has no property `{name}`", r.id)))
        })
        .collect()
}

/// Validity, coverage and property statistics of `generated` against
/// `reference`. `columns` names precomputed per-record properties to compare
/// by EMD alongside density and element count.
pub fn evaluate(
    generated: &[CrystalRecord],
    reference: &[CrystalRecord],
    thresholds: &Thresholds,
    columns: &[String],
) -> Result<EvalReport> {
    if generated.is_empty() {
        return Err(Error::EmptyInput("generated dataset"));
    }
    if reference.is_empty() {
        return Err(Error::EmptyInput("reference dataset"));
    }
    let gen_flags = validity_flags(generated)?;
    let ref_flags = validity_flags(reference)?;
    let cov = coverage(&fingerprints(generated)?, &fingerprints(reference)?, thresholds)?;
    let valid: Vec<&CrystalRecord> = generated
        .iter()
        .zip(&gen_flags)
        .filter(|(_, f)| f.0 && f.1)
        .map(|(r, _)| r)
        .collect();
    let property_stats = if valid.is_empty() {
        None
    } else {
        let all_ref: Vec<&CrystalRecord> = reference.iter().collect();
        let custom = columns
            .iter()
            .map(|c| {
                Ok(CustomProperty {
                    name: c.clone(),
                    generated: property_column(&valid, c)?,
                    reference: property_column(&all_ref, c)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let gen_crystals: Vec<Crystal> = valid.iter().map(|r| r.crystal.clone()).collect();
        let ref_crystals: Vec<Crystal> = reference.iter().map(|r| r.crystal.clone()).collect();
        Some(property_stats(&gen_crystals, &ref_crystals, &custom)?)
    };
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: "evaluate",
        fingerprints: FINGERPRINT_LABEL,
        validity: summarize(&gen_flags),
        reference_validity: summarize(&ref_flags),
        thresholds: *thresholds,
        coverage: cov,
        property_stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub schema_version: u32,
    pub kind: &'static str,
    pub fingerprints: &'static str,
    pub percentile: f64,
    pub num_reference: usize,
    pub thresholds: Thresholds,
}

pub fn calibrate(reference: &[CrystalRecord], percentile: f64) -> Result<CalibrationReport> {
    let thresholds = calibrate_thresholds(&fingerprints(reference)?, percentile)?;
    Ok(CalibrationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: "calibrate-thresholds",
        fingerprints: FINGERPRINT_LABEL,
        percentile,
        num_reference: reference.len(),
        thresholds,
    })
}
