//! Structure matching up to lattice choice, translation and atom order.
//!
//! Both structures are Niggli-reduced. Every proper integer basis of the
//! second lattice whose lengths and angles fall within tolerance of the
//! first is tried; sites are aligned by anchoring one atom of the least
//! frequent species, assigned optimally per species, and compared in the
//! average lattice after removing the mean displacement.

use serde::{Deserialize, Serialize};

use super::assignment::min_cost_assignment;
use crate::crystal::niggli::{int_det, int_inverse, transform_lattice, IntMatrix};
use crate::crystal::{wrap_unit, Crystal, Lattice, LatticeParams, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchTolerances {
    /// Site tolerance in units of `∛(V/N)`.
    pub stol: f64,
    /// Angle tolerance in degrees.
    pub angle_tol: f64,
    /// Relative length tolerance.
    pub ltol: f64,
}

impl Default for MatchTolerances {
    fn default() -> Self {
        MatchTolerances {
            stol: 0.5,
            angle_tol: 10.0,
            ltol: 0.3,
        }
    }
}

impl MatchTolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("stol", self.stol),
            ("angle_tol", self.angle_tol),
            ("ltol", self.ltol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub matched: bool,
    /// RMS site displacement over `∛(V/N)`; present only when matched.
    pub rmse_normalized: Option<f64>,
}

impl MatchResult {
    const NONE: MatchResult = MatchResult {
        matched: false,
        rmse_normalized: None,
    };
}

/// Compare two crystals. The outcome is symmetric in `a` and `b`.
pub fn structure_match(a: &Crystal, b: &Crystal, tol: &MatchTolerances) -> Result<MatchResult> {
    tol.validate()?;
    if a.element_counts() != b.element_counts() {
        return Ok(MatchResult::NONE);
    }
    let ra = a.niggli_reduced()?;
    let rb = b.niggli_reduced()?;
    let best = match (one_way(&ra, &rb, tol)?, one_way(&rb, &ra, tol)?) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    Ok(match best {
        Some(rms) => MatchResult {
            matched: true,
            rmse_normalized: Some(rms),
        },
        None => MatchResult::NONE,
    })
}

/// Smallest normalized RMS over all admissible alignments of `b` onto `a`
/// whose largest site displacement is below `stol`.
fn one_way(a: &Crystal, b: &Crystal, tol: &MatchTolerances) -> Result<Option<f64>> {
    let n = a.num_atoms();
    let pa = a.lattice().params();
    let mut best: Option<f64> = None;
    for t in lattice_candidates(a.lattice(), b.lattice(), tol) {
        let Ok(lb) = transform_lattice(b.lattice(), &t) else {
            continue;
        };
        let inv = int_inverse(&t).expect("candidate transforms are unimodular");
        let fb: Vec<Vec3> = b
            .frac_coords()
            .iter()
            .map(|f| Vec3::from_fn(|j, _| (0..3).map(|k| f[k] * inv[k][j] as f64).sum::<f64>()))
            .collect();
        let Ok(avg) = average_lattice(&pa, &lb.params()) else {
            continue;
        };
        let scale = (avg.volume() / n as f64).cbrt();
        if let Some(rms) = best_alignment(a, b.types(), &fb, &avg, tol.stol * scale)? {
            let rms = rms / scale;
            best = Some(best.map_or(rms, |b: f64| b.min(rms)));
        }
    }
    Ok(best)
}

/// Proper unimodular `T` such that the rows of `T·L_b` have lengths and
/// angles within tolerance of `a`'s.
fn lattice_candidates(a: &Lattice, b: &Lattice, tol: &MatchTolerances) -> Vec<IntMatrix> {
    let pa = a.params();
    let la = pa.lengths();
    let aa = pa.angles();
    let max_len = la.iter().copied().fold(0.0, f64::max) * (1.0 + tol.ltol);
    let spacing = b.plane_spacings();
    let bound = spacing.map(|h| ((max_len / h).ceil() as i32).min(6));
    let mut vectors: Vec<([i32; 3], Vec3, f64)> = Vec::new();
    for i in -bound[0]..=bound[0] {
        for j in -bound[1]..=bound[1] {
            for k in -bound[2]..=bound[2] {
                if (i, j, k) == (0, 0, 0) {
                    continue;
                }
                let v = b.image_shift([i, j, k]);
                let len = v.norm();
                if len <= max_len {
                    vectors.push(([i, j, k], v, len));
                }
            }
        }
    }
    let per_axis: Vec<Vec<usize>> = la
        .iter()
        .map(|&target| {
            (0..vectors.len())
                .filter(|&i| (vectors[i].2 - target).abs() <= tol.ltol * target)
                .collect()
        })
        .collect();
    let angle = |x: usize, y: usize| {
        let (u, v) = (&vectors[x], &vectors[y]);
        (u.1.dot(&v.1) / (u.2 * v.2)).clamp(-1.0, 1.0).acos().to_degrees()
    };
    let mut out = Vec::new();
    for &i in &per_axis[0] {
        for &j in &per_axis[1] {
            if (angle(i, j) - aa[2]).abs() > tol.angle_tol {
                continue;
            }
            for &k in &per_axis[2] {
                if (angle(j, k) - aa[0]).abs() > tol.angle_tol || (angle(i, k) - aa[1]).abs() > tol.angle_tol
                {
                    continue;
                }
                let t = [vectors[i].0, vectors[j].0, vectors[k].0];
                if int_det(&t) == 1 {
                    out.push(t);
                }
            }
        }
    }
    out
}

fn average_lattice(p: &LatticeParams, q: &LatticeParams) -> Result<Lattice> {
    let mid = |x: f64, y: f64| 0.5 * (x + y);
    let avg = LatticeParams::new(
        mid(p.a, q.a),
        mid(p.b, q.b),
        mid(p.c, q.c),
        mid(p.alpha, q.alpha),
        mid(p.beta, q.beta),
        mid(p.gamma, q.gamma),
    )?;
    Lattice::from_params(&avg)
}

/// Best RMS (Å) over anchor translations with every site within `max_disp`.
fn best_alignment(
    a: &Crystal,
    b_types: &[u8],
    fb: &[Vec3],
    lattice: &Lattice,
    max_disp: f64,
) -> Result<Option<f64>> {
    let counts = a.element_counts();
    let (&anchor_z, _) = counts
        .iter()
        .min_by_key(|(z, c)| (**c, **z))
        .ok_or(Error::EmptyCrystal)?;
    let fa = a.frac_coords();
    let anchor = a
        .types()
        .iter()
        .position(|&z| z == anchor_z)
        .expect("species present");
    let groups: Vec<(Vec<usize>, Vec<usize>)> = counts
        .keys()
        .map(|&z| {
            let ia = (0..fa.len()).filter(|&i| a.types()[i] == z).collect();
            let ib = (0..fb.len()).filter(|&i| b_types[i] == z).collect();
            (ia, ib)
        })
        .collect();
    let n = fa.len() as f64;
    let mut best: Option<f64> = None;
    for j in (0..fb.len()).filter(|&j| b_types[j] == anchor_z) {
        let shift = fa[anchor] - fb[j];
        let moved: Vec<Vec3> = fb.iter().map(|f| (f + shift).map(wrap_unit)).collect();
        let mut disp = Vec::with_capacity(fa.len());
        for (ia, ib) in &groups {
            let d: Vec<Vec<Vec3>> = ia
                .iter()
                .map(|&p| ib.iter().map(|&q| lattice.min_image(&fa[p], &moved[q])).collect())
                .collect();
            let cost: Vec<Vec<f64>> = d
                .iter()
                .map(|r| r.iter().map(|v| v.norm_squared()).collect())
                .collect();
            let assign = min_cost_assignment(&cost);
            disp.extend(assign.iter().enumerate().map(|(r, &c)| d[r][c]));
        }
        let mean = disp.iter().fold(Vec3::zeros(), |s, v| s + v) / n;
        let mut max: f64 = 0.0;
        let mut sq = 0.0;
        for v in &disp {
            let r = (v - mean).norm();
            max = max.max(r);
            sq += r * r;
        }
        if max < max_disp {
            let rms = (sq / n).sqrt();
            best = Some(best.map_or(rms, |b: f64| b.min(rms)));
        }
    }
    Ok(best)
}
