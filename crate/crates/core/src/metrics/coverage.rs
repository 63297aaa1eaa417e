use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fingerprint::{euclidean, Fingerprints};
use crate::error::{Error, Result};

/// Coverage thresholds on fingerprint distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub delta_struc: f64,
    pub delta_comp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageReport {
    /// Percent of ground-truth items covered by some generated item.
    pub cov_r: f64,
    /// Percent of generated items covering some ground-truth item.
    pub cov_p: f64,
    pub amsd_r: f64,
    pub amsd_p: f64,
    pub amcd_r: f64,
    pub amcd_p: f64,
}

/// Pairwise distances, `d[k][l]` between generated item `k` and
/// ground-truth item `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTables {
    pub structure: Vec<Vec<f64>>,
    pub composition: Vec<Vec<f64>>,
}

impl DistanceTables {
    pub fn between(generated: &[Fingerprints], ground_truth: &[Fingerprints]) -> Self {
        let table = |f: fn(&Fingerprints) -> &[f64]| -> Vec<Vec<f64>> {
            generated
                .par_iter()
                .map(|g| ground_truth.iter().map(|t| euclidean(f(g), f(t))).collect())
                .collect()
        };
        DistanceTables {
            structure: table(|f| &f.structure),
            composition: table(|f| &f.composition),
        }
    }

    pub fn transposed(&self) -> Self {
        let t = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            let cols = m.first().map_or(0, Vec::len);
            (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
        };
        DistanceTables {
            structure: t(&self.structure),
            composition: t(&self.composition),
        }
    }
}

fn check_thresholds(t: &Thresholds) -> Result<()> {
    for (name, v) in [("delta_struc", t.delta_struc), ("delta_comp", t.delta_comp)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// `(COV, AMSD, AMCD)` of the column items (targets) by the row items.
fn recall(d: &DistanceTables, t: &Thresholds) -> (f64, f64, f64) {
    let rows = d.structure.len();
    let cols = d.structure[0].len();
    let mut covered = 0usize;
    let mut amsd = 0.0;
    let mut amcd = 0.0;
    for l in 0..cols {
        let mut hit = false;
        let mut ms = f64::INFINITY;
        let mut mc = f64::INFINITY;
        for k in 0..rows {
            let (s, c) = (d.structure[k][l], d.composition[k][l]);
            hit |= s < t.delta_struc && c < t.delta_comp;
            ms = ms.min(s);
            mc = mc.min(c);
        }
        covered += hit as usize;
        amsd += ms;
        amcd += mc;
    }
    let n = cols as f64;
    (100.0 * covered as f64 / n, amsd / n, amcd / n)
}

pub fn coverage_from_tables(d: &DistanceTables, t: &Thresholds) -> Result<CoverageReport> {
    check_thresholds(t)?;
    if d.structure.is_empty() || d.structure[0].is_empty() {
        return Err(Error::EmptyInput("coverage set"));
    }
    let (cov_r, amsd_r, amcd_r) = recall(d, t);
    let (cov_p, amsd_p, amcd_p) = recall(&d.transposed(), t);
    Ok(CoverageReport {
        cov_r,
        cov_p,
        amsd_r,
        amsd_p,
        amcd_r,
        amcd_p,
    })
}

pub fn coverage(
    generated: &[Fingerprints],
    ground_truth: &[Fingerprints],
    t: &Thresholds,
) -> Result<CoverageReport> {
    if generated.is_empty() {
        return Err(Error::EmptyInput("generated set"));
    }
    if ground_truth.is_empty() {
        return Err(Error::EmptyInput("ground-truth set"));
    }
    coverage_from_tables(&DistanceTables::between(generated, ground_truth), t)
}

/// Linear-interpolated percentile (`q` in 0..=100) of `values`.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("percentile"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 100.0) / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Thresholds from the `q`-th percentile of nearest-neighbour fingerprint
/// distances within a reference set. A zero percentile (duplicate
/// fingerprints) falls back to the smallest positive distance.
pub fn calibrate_thresholds(reference: &[Fingerprints], q: f64) -> Result<Thresholds> {
    if reference.len() < 2 {
        return Err(Error::EmptyInput("calibration set needs at least two items"));
    }
    let d = DistanceTables::between(reference, reference);
    let pick = |m: &Vec<Vec<f64>>, what: &str| -> Result<f64> {
        let nn: Vec<f64> = (0..m.len())
            .map(|i| {
                (0..m.len())
                    .filter(|&j| j != i)
                    .map(|j| m[i][j])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let p = percentile(&nn, q)?;
        if p > 0.0 {
            return Ok(p);
        }
        nn.iter()
            .copied()
            .filter(|v| *v > 0.0)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
            .ok_or_else(|| Error::InvalidConfig(format!("all {what} fingerprints are identical")))
    };
    Ok(Thresholds {
        delta_struc: pick(&d.structure, "structure")?,
        delta_comp: pick(&d.composition, "composition")?,
    })
}
