//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod oracles;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{Quaternion, Rotation3, UnitQuaternion};
use rand::Rng;

use crysgen_core::crystal::niggli::{int_det, transform_lattice};
use crysgen_core::crystal::niggli_reduce;
use crysgen_core::error::Result as CoreResult;
use crysgen_core::graph::{graph_distance_multiset, knn_graph};
use crysgen_core::io::save_dataset;
use crysgen_core::metrics::{
    composition_validity, coverage, coverage_from_tables, density, emd_1d, structure_match,
    structure_validity, DistanceTables, Fingerprints, MatchTolerances, Thresholds,
};
use crysgen_core::noise::{
    denoising_loss, perturb_coords, score_target, LossOptions, NoiseSchedule, TypeDistribution,
};
use crysgen_core::rng::{self, SimRng};
use crysgen_core::sampler::{
    harmonic_equivalence_check, FieldOutput, HarmonicOracle, NoiseLevel, SamplerConfig, ScoreField,
    SoftSphereField,
};
use crysgen_core::synthetic::{random_crystal, synthetic_dataset, SyntheticSpec};
use crysgen_core::tasks;
use crysgen_core::{Crystal, Lattice, LatticeParams, Vec3};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn random_crystal_in(r: &mut SimRng, min: usize, max: usize) -> Crystal {
    let spec = SyntheticSpec {
        min_atoms: min,
        max_atoms: max,
        ..Default::default()
    };
    random_crystal(&spec, r).unwrap()
}

fn random_rotation(r: &mut SimRng) -> Rotation3<f64> {
    loop {
        let q = Quaternion::new(
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        );
        if q.norm() > 0.1 {
            return UnitQuaternion::from_quaternion(q).to_rotation_matrix();
        }
    }
}

fn random_frac(r: &mut SimRng) -> Vec3 {
    Vec3::new(r.random(), r.random(), r.random())
}

fn random_permutation(r: &mut SimRng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, r.random_range(0..=i));
    }
    p
}

fn image_shifted(c: &Crystal, r: &mut SimRng) -> Crystal {
    let frac = c
        .frac_coords()
        .iter()
        .map(|f| {
            f + Vec3::new(
                r.random_range(-3..=3) as f64,
                r.random_range(-3..=3) as f64,
                r.random_range(-3..=3) as f64,
            )
        })
        .collect();
    c.with_frac_coords(frac).unwrap()
}

fn random_reduced_lattice(r: &mut SimRng) -> Lattice {
    loop {
        let mut len = || r.random_range(2.0..8.0);
        let (a, b, c) = (len(), len(), len());
        let mut ang = || r.random_range(60.0..120.0);
        let Ok(p) = LatticeParams::new(a, b, c, ang(), ang(), ang()) else {
            continue;
        };
        let l = niggli_reduce(&Lattice::from_params(&p).unwrap()).unwrap();
        if l.params().angles().iter().all(|a| (60.0..=120.0).contains(a)) {
            return l;
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn multiset_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_diff(x, y)).fold(0.0, f64::max)
}

// 1

fn harmonic_equivalence() -> Outcome {
    let start = Instant::now();
    let schedule = NoiseSchedule::default();
    let mut r = rng::seeded(1);
    let mut worst: f64 = 0.0;
    let mut k = 0.0;
    for i in 0..100 {
        let reference = random_crystal_in(&mut r, 5, 20);
        let rep = harmonic_equivalence_check(&reference, &schedule, 1e-4, 4, i).unwrap();
        worst = worst.max(rep.max_residual());
        k = rep.k;
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-10 && (k - 1.0).abs() < 1e-12 && t < Duration::from_secs(10),
        format!(
            "max residual {worst:.2e} over 100 references x 50 levels, k = {k}, {:.2}s",
            secs(t)
        ),
    )
}

// 2

fn oracle_reconstruction() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let records = synthetic_dataset(&SyntheticSpec::default(), 100, 2024).unwrap();
    let sampler = SamplerConfig {
        seed: 7,
        ..Default::default()
    };
    let start = Instant::now();
    let (report, _) = pool
        .install(|| tasks::reconstruct(&records, &sampler, 0.5, &MatchTolerances::default()))
        .unwrap();
    let t = start.elapsed();
    let rmse = report.mean_rmse_normalized.unwrap_or(f64::INFINITY);
    outcome(
        report.match_rate >= 95.0 && rmse <= 0.05 && t < Duration::from_secs(600),
        format!(
            "match rate {:.0}% ({}/{}), mean normalized RMSE {rmse:.4}, {:.1}s single-threaded",
            report.match_rate,
            report.num_matched,
            report.num_records,
            secs(t)
        ),
    )
}

// 3

struct ZeroField;

impl ScoreField for ZeroField {
    fn evaluate(&self, noisy: &Crystal, _: &NoiseLevel) -> CoreResult<FieldOutput> {
        Ok(FieldOutput {
            scores: vec![Vec3::zeros(); noisy.num_atoms()],
            types: TypeDistribution::one_hot(noisy.types()),
        })
    }
}

fn zero_loss_oracle() -> Outcome {
    let mut r = rng::seeded(3);
    let schedule = NoiseSchedule::default();
    let mut worst: f64 = 0.0;
    let mut clean_levels = 0;
    for i in 0..10 {
        let c = random_crystal_in(&mut r, 5, 20);
        let opts = LossOptions {
            lambda_a: 1.0,
            samples_per_level: 64,
            seed: i,
        };
        let rep = denoising_loss(&HarmonicOracle::new(c.clone()), &[c], &schedule, &opts).unwrap();
        worst = worst.max(rep.total_over(|l| l.boundary_crossings == 0));
        clean_levels += rep.levels.iter().filter(|l| l.boundary_crossings == 0).count();
    }
    // zero field at noise far below the cell size: E‖d/σ‖² = 3N
    let small = NoiseSchedule::coords_only(0.1, 0.02, 3).unwrap();
    let mut gaussian_ok = true;
    let mut worst_z: f64 = 0.0;
    for i in 0..10 {
        let c = random_crystal_in(&mut r, 5, 20);
        let n = c.num_atoms() as f64;
        let opts = LossOptions {
            lambda_a: 0.0,
            samples_per_level: 2000,
            seed: 100 + i,
        };
        let rep = denoising_loss(&ZeroField, &[c], &small, &opts).unwrap();
        for l in &rep.levels {
            let z = (l.coord_mean - 3.0 * n).abs() / l.coord_sem;
            worst_z = worst_z.max(z);
            gaussian_ok &= l.boundary_crossings == 0 && z < 3.0;
        }
    }
    outcome(
        worst <= 1e-6 && clean_levels > 0 && gaussian_ok,
        format!(
            "oracle loss {worst:.2e} on {clean_levels} crossing-free levels; zero-field term within {worst_z:.2} SEM of 3N"
        ),
    )
}

// 4

/// Largest deviation seen for one invariance over 100 random trials.
struct Trial {
    name: &'static str,
    tol: f64,
    worst: f64,
    passed: usize,
}

fn fp_diff(a: &Crystal, b: &Crystal) -> f64 {
    let (fa, fb) = (Fingerprints::of(a).unwrap(), Fingerprints::of(b).unwrap());
    max_diff(&fa.structure, &fb.structure).max(max_diff(&fa.composition, &fb.composition))
}

fn scalar_diff(a: &Crystal, b: &Crystal) -> f64 {
    let d = (structure_validity(a).unwrap().1 - structure_validity(b).unwrap().1).abs();
    d.max((density(a).unwrap() - density(b).unwrap()).abs())
}

fn graph_diff(a: &Crystal, b: &Crystal) -> f64 {
    multiset_diff(
        &graph_distance_multiset(&knn_graph(a, 12)),
        &graph_distance_multiset(&knn_graph(b, 12)),
    )
}

fn match_penalty(a: &Crystal, b: &Crystal) -> f64 {
    if structure_match(a, b, &MatchTolerances::default())
        .unwrap()
        .matched
    {
        0.0
    } else {
        f64::INFINITY
    }
}

fn invariance_suite() -> Outcome {
    let mut r = rng::seeded(4);
    type Check = Box<dyn Fn(&Crystal, &mut SimRng) -> f64>;
    let rotation = |f: fn(&Crystal, &Crystal, &Rotation3<f64>) -> f64| -> Check {
        Box::new(move |c: &Crystal, r: &mut SimRng| {
            let rot = random_rotation(r);
            f(c, &c.rotated(&rot).unwrap(), &rot)
        })
    };
    let checks: Vec<(&'static str, f64, Check)> = vec![
        (
            "lattice params / rotation",
            1e-8,
            rotation(|a, b, _| {
                let (p, q) = (a.lattice().params(), b.lattice().params());
                max_diff(
                    &[p.a, p.b, p.c, p.alpha, p.beta, p.gamma],
                    &[q.a, q.b, q.c, q.alpha, q.beta, q.gamma],
                )
            }),
        ),
        (
            "min-image / image shift",
            1e-12,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let s = image_shifted(c, r);
                let n = c.num_atoms();
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| {
                        (c.lattice().min_image(&c.frac_coords()[i], &c.frac_coords()[j])
                            - s.lattice().min_image(&s.frac_coords()[i], &s.frac_coords()[j]))
                        .norm()
                    })
                    .fold(0.0, f64::max)
            }),
        ),
        (
            "knn graph / translation",
            1e-10,
            Box::new(|c: &Crystal, r: &mut SimRng| graph_diff(c, &c.translated(&random_frac(r)))),
        ),
        ("knn graph / rotation", 1e-8, rotation(|a, b, _| graph_diff(a, b))),
        (
            "knn graph / permutation",
            1e-10,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let order = random_permutation(r, c.num_atoms());
                let p = graph_distance_multiset(&knn_graph(&c.permuted(&order), 12));
                let g = graph_distance_multiset(&knn_graph(c, 12));
                order
                    .iter()
                    .enumerate()
                    .map(|(new, &old)| max_diff(&p[new], &g[old]))
                    .fold(0.0, f64::max)
            }),
        ),
        (
            "knn graph / image shift",
            1e-10,
            Box::new(|c: &Crystal, r: &mut SimRng| graph_diff(c, &image_shifted(c, r))),
        ),
        (
            "score target / image shift",
            1e-10,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let noisy = perturb_coords(c, 0.3, r).crystal;
                let a = score_target(c, &noisy, 0.3).unwrap();
                let b = score_target(&image_shifted(c, r), &image_shifted(&noisy, r), 0.3).unwrap();
                a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            }),
        ),
        (
            "score target / rotation",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let noisy = perturb_coords(c, 0.3, r).crystal;
                let rot = random_rotation(r);
                let a = score_target(c, &noisy, 0.3).unwrap();
                let b = score_target(&c.rotated(&rot).unwrap(), &noisy.rotated(&rot).unwrap(), 0.3).unwrap();
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (rot * x - y).norm())
                    .fold(0.0, f64::max)
            }),
        ),
        (
            "harmonic scores / rotation",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let noisy = perturb_coords(c, 0.3, r).crystal;
                let rot = random_rotation(r);
                let lvl = NoiseLevel {
                    index: 0,
                    sigma_a: 1.0,
                    sigma_x: 0.3,
                };
                let a = HarmonicOracle::new(c.clone()).evaluate(&noisy, &lvl).unwrap();
                let b = HarmonicOracle::new(c.rotated(&rot).unwrap())
                    .evaluate(&noisy.rotated(&rot).unwrap(), &lvl)
                    .unwrap();
                a.scores
                    .iter()
                    .zip(&b.scores)
                    .map(|(x, y)| (rot * x - y).norm())
                    .fold(0.0, f64::max)
            }),
        ),
        (
            "soft-sphere scores / rotation",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let rot = random_rotation(r);
                let field = SoftSphereField::from_atomic_radii(1.0, 1.0);
                let a = field.forces(c);
                let b = field.forces(&c.rotated(&rot).unwrap());
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (rot * x - y).norm())
                    .fold(0.0, f64::max)
            }),
        ),
        (
            "soft-sphere scores / permutation",
            1e-10,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let order = random_permutation(r, c.num_atoms());
                let field = SoftSphereField::from_atomic_radii(1.0, 1.0);
                let a = field.forces(c);
                let b = field.forces(&c.permuted(&order));
                order
                    .iter()
                    .enumerate()
                    .map(|(new, &old)| (a[old] - b[new]).norm())
                    .fold(0.0, f64::max)
            }),
        ),
        (
            "soft-sphere scores / image shift",
            1e-10,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let field = SoftSphereField::from_atomic_radii(1.0, 1.0);
                let a = field.forces(c);
                let b = field.forces(&image_shifted(c, r));
                a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            }),
        ),
        ("fingerprints / rotation", 1e-8, rotation(|a, b, _| fp_diff(a, b))),
        (
            "fingerprints / translation",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| fp_diff(c, &c.translated(&random_frac(r)))),
        ),
        (
            "fingerprints / permutation",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                fp_diff(c, &c.permuted(&random_permutation(r, c.num_atoms())))
            }),
        ),
        (
            "fingerprints / image shift",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| fp_diff(c, &image_shifted(c, r))),
        ),
        (
            "validity, density / rotation",
            1e-8,
            rotation(|a, b, _| scalar_diff(a, b)),
        ),
        (
            "validity, density / translation",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| scalar_diff(c, &c.translated(&random_frac(r)))),
        ),
        (
            "validity, density / permutation",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                scalar_diff(c, &c.permuted(&random_permutation(r, c.num_atoms())))
            }),
        ),
        (
            "validity, density / image shift",
            1e-8,
            Box::new(|c: &Crystal, r: &mut SimRng| scalar_diff(c, &image_shifted(c, r))),
        ),
        (
            "structure match / all four",
            0.0,
            Box::new(|c: &Crystal, r: &mut SimRng| {
                let moved = c
                    .translated(&random_frac(r))
                    .rotated(&random_rotation(r))
                    .unwrap()
                    .permuted(&random_permutation(r, c.num_atoms()));
                match_penalty(c, &image_shifted(&moved, r))
            }),
        ),
    ];
    let mut trials: Vec<Trial> = checks
        .iter()
        .map(|(name, tol, _)| Trial {
            name,
            tol: *tol,
            worst: 0.0,
            passed: 0,
        })
        .collect();
    for _ in 0..100 {
        let c = random_crystal_in(&mut r, 2, 12).niggli_reduced().unwrap();
        for (t, (_, _, check)) in trials.iter_mut().zip(&checks) {
            let e = check(&c, &mut r);
            t.worst = t.worst.max(e);
            t.passed += (e <= t.tol) as usize;
        }
    }
    let failing: Vec<String> = trials
        .iter()
        .filter(|t| t.passed < 100)
        .map(|t| format!("{} {}/100 (worst {:.1e})", t.name, t.passed, t.worst))
        .collect();
    if failing.is_empty() {
        outcome(true, format!("{} invariances x 100/100 trials", trials.len()))
    } else {
        outcome(false, failing.join("; "))
    }
}

// 5

fn metric_oracles() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let sets = oracles::small_multisets(6);
    let mut emd_worst: f64 = 0.0;
    for a in &sets {
        let af: Vec<f64> = a.iter().map(|&x| x as f64).collect();
        for b in &sets {
            let bf: Vec<f64> = b.iter().map(|&x| x as f64).collect();
            emd_worst = emd_worst.max((emd_1d(&af, &bf).unwrap() - oracles::transport(a, b)).abs());
        }
    }
    ok &= emd_worst < 1e-12;
    notes.push(format!(
        "emd {} instances (max err {emd_worst:.1e})",
        sets.len() * sets.len()
    ));

    let mut r = rng::seeded(5);
    let mut cov_ok = true;
    for _ in 0..200 {
        let k = r.random_range(1..5);
        let l = r.random_range(1..5);
        let mut table = || -> Vec<Vec<f64>> {
            (0..k)
                .map(|_| (0..l).map(|_| r.random_range(0..10) as f64 * 0.1).collect())
                .collect()
        };
        let (s, c) = (table(), table());
        let t = Thresholds {
            delta_struc: 0.45,
            delta_comp: 0.55,
        };
        let got = coverage_from_tables(
            &DistanceTables {
                structure: s.clone(),
                composition: c.clone(),
            },
            &t,
        )
        .unwrap();
        let want = oracles::coverage_table(&s, &c, t.delta_struc, t.delta_comp);
        cov_ok &= [
            got.cov_r, got.cov_p, got.amsd_r, got.amsd_p, got.amcd_r, got.amcd_p,
        ] == want;
    }
    ok &= cov_ok;
    notes.push(format!(
        "coverage toy tables {}",
        if cov_ok { "exact" } else { "MISMATCH" }
    ));

    let mut mi_worst: f64 = 0.0;
    for _ in 0..200 {
        let l = random_reduced_lattice(&mut r);
        for _ in 0..20 {
            let (a, b) = (random_frac(&mut r), random_frac(&mut r));
            let fast = l.min_image(&a, &b).norm();
            let slow = oracles::exhaustive_min_image(&l, &a, &b, 3).norm();
            mi_worst = mi_worst.max((fast - slow).abs());
        }
    }
    ok &= mi_worst < 1e-12;
    notes.push(format!("min-image 200 lattices (max err {mi_worst:.1e})"));

    let mut ng_worst: f64 = 0.0;
    for _ in 0..50 {
        let base = random_reduced_lattice(&mut r);
        let mut t = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        for _ in 0..3 {
            let (i, j) = (r.random_range(0..3), r.random_range(0..3));
            if i != j {
                let m = r.random_range(-2..=2);
                let row = t[j];
                for (x, y) in t[i].iter_mut().zip(row) {
                    *x += m * y;
                }
            }
        }
        assert_eq!(int_det(&t), 1);
        let skewed = transform_lattice(&base, &t).unwrap();
        let mut got = niggli_reduce(&skewed).unwrap().lengths();
        got.sort_by(f64::total_cmp);
        let want = oracles::successive_minima(&skewed, 5);
        ng_worst = ng_worst.max(max_diff(&got, &want));
    }
    ok &= ng_worst < 1e-6;
    notes.push(format!("niggli 50 lattices (max length err {ng_worst:.1e})"));
    outcome(ok, notes.join(", "))
}

// 6

fn validity_constants() -> Outcome {
    let l = Lattice::cubic(10.0).unwrap();
    let pair =
        |d: f64| Crystal::from_cartesian(vec![6, 6], &[Vec3::zeros(), Vec3::new(d, 0.0, 0.0)], l).unwrap();
    let below = structure_validity(&pair(0.499)).unwrap().0;
    let above = structure_validity(&pair(0.501)).unwrap().0;
    let counts = |v: &[(u8, usize)]| v.iter().copied().collect();
    let nacl = composition_validity(&counts(&[(11, 1), (17, 1)]))
        .unwrap()
        .is_valid();
    let metals = [&[(29, 1)][..], &[(29, 3), (30, 1)], &[(26, 2), (24, 1), (28, 1)]]
        .iter()
        .all(|c| composition_validity(&counts(c)).unwrap().is_valid());
    let helium = [
        &[(2, 2), (8, 1)][..],
        &[(2, 1), (11, 1), (17, 1)],
        &[(2, 1), (8, 1)],
    ]
    .iter()
    .all(|c| !composition_validity(&counts(c)).unwrap().is_valid());
    outcome(
        !below && above && nacl && metals && helium,
        format!("0.499 Å valid={below}, 0.501 Å valid={above}, NaCl={nacl}, alloys={metals}, He rejected={helium}"),
    )
}

// 7

fn self_coverage_and_duality() -> Outcome {
    let data = synthetic_dataset(&SyntheticSpec::default(), 60, 77).unwrap();
    let fps: Vec<Fingerprints> = data
        .iter()
        .map(|d| Fingerprints::of(&d.crystal).unwrap())
        .collect();
    let t = tasks::calibrate(&data, 5.0).unwrap().thresholds;
    let own = coverage(&fps, &fps, &t).unwrap();
    let self_ok = own.cov_r == 100.0
        && own.cov_p == 100.0
        && [own.amsd_r, own.amsd_p, own.amcd_r, own.amcd_p] == [0.0; 4];
    let (gen, gt) = fps.split_at(25);
    let mut dual_ok = true;
    for scale in [0.5, 1.0, 3.0, 10.0] {
        let ts = Thresholds {
            delta_struc: t.delta_struc * scale,
            delta_comp: t.delta_comp * scale,
        };
        let f = coverage(gen, gt, &ts).unwrap();
        let b = coverage(gt, gen, &ts).unwrap();
        dual_ok &= (f.cov_r, f.amsd_r, f.amcd_r) == (b.cov_p, b.amsd_p, b.amcd_p)
            && (f.cov_p, f.amsd_p, f.amcd_p) == (b.cov_r, b.amsd_r, b.amcd_r);
    }
    outcome(
        self_ok && dual_ok,
        format!(
            "self COV-R/P {}/{}, AMSD/AMCD zero: {}, duality exact: {dual_ok}",
            own.cov_r,
            own.cov_p,
            [own.amsd_r, own.amcd_r] == [0.0; 2]
        ),
    )
}

// 8

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_crysgen"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn same_files(a: &Path, b: &Path, names: &[&str]) -> Vec<String> {
    names
        .iter()
        .filter(|n| std::fs::read(a.join(n)).ok() != std::fs::read(b.join(n)).ok() || !a.join(n).exists())
        .map(|n| n.to_string())
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("reference.jsonl");
    save_dataset(
        &synthetic_dataset(&SyntheticSpec::default(), 12, 8).unwrap(),
        &data,
    )
    .unwrap();
    let data = data.to_str().unwrap();
    let mut differing = Vec::new();
    let mut ran = true;
    for (cmd, extra, files) in [
        (
            "sample",
            vec!["--reference", data, "--num-samples", "6"],
            vec!["generated.jsonl", "trajectories.csv", "manifest.json"],
        ),
        (
            "reconstruct",
            vec!["--input", data, "--sigma", "0.5"],
            vec!["reconstructed.jsonl", "reconstruct.json", "manifest.json"],
        ),
    ] {
        let outs: Vec<_> = (0..2).map(|i| dir.path().join(format!("{cmd}-{i}"))).collect();
        for o in &outs {
            let mut args = vec![cmd, "--seed", "42", "--out", o.to_str().unwrap()];
            args.extend(&extra);
            ran &= run_cli(&args);
        }
        differing.extend(
            same_files(&outs[0], &outs[1], &files)
                .into_iter()
                .map(|f| format!("{cmd}/{f}")),
        );
    }
    outcome(
        ran && differing.is_empty(),
        if !ran {
            "a CLI run failed".to_string()
        } else if differing.is_empty() {
            "sample and reconstruct outputs byte-identical across two runs".to_string()
        } else {
            format!("differing outputs: {}", differing.join(", "))
        },
    )
}

// 9

fn soft_sphere_gradient() -> Outcome {
    let mut r = rng::seeded(9);
    let field = SoftSphereField::from_atomic_radii(0.7, 1.0);
    let species = [8u8, 11, 14, 26];
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut degenerate = 0;
    for _ in 0..50 {
        let p = LatticeParams::new(
            r.random_range(4.0..5.0),
            r.random_range(4.0..5.0),
            r.random_range(4.0..5.0),
            r.random_range(80.0..100.0),
            r.random_range(80.0..100.0),
            r.random_range(80.0..100.0),
        )
        .unwrap();
        let types: Vec<u8> = (0..8).map(|_| species[r.random_range(0..4)]).collect();
        let frac = (0..8).map(|_| random_frac(&mut r)).collect();
        let c = Crystal::new(types, frac, Lattice::from_params(&p).unwrap()).unwrap();
        let analytic = field.forces(&c);
        let scale = analytic.iter().map(|f| f.amax()).fold(0.0, f64::max);
        if scale == 0.0 {
            degenerate += 1;
            continue;
        }
        let cart = c.cart_coords();
        for i in 0..8 {
            for axis in 0..3 {
                let energy = |delta: f64| {
                    let mut x = cart.clone();
                    x[i][axis] += delta;
                    field.energy(&Crystal::from_cartesian(c.types().to_vec(), &x, *c.lattice()).unwrap())
                };
                let fd = -(energy(h) - energy(-h)) / (2.0 * h);
                worst = worst.max((fd - analytic[i][axis]).abs() / scale);
            }
        }
    }
    outcome(
        worst < 1e-4 && degenerate == 0,
        format!("max relative error {worst:.2e} over 50 cells x 24 components"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("harmonic equivalence", harmonic_equivalence),
        ("oracle reconstruction", oracle_reconstruction),
        ("zero-loss oracle", zero_loss_oracle),
        ("invariance suite", invariance_suite),
        ("metric oracles", metric_oracles),
        ("validity constants", validity_constants),
        ("self-coverage and duality", self_coverage_and_duality),
        ("determinism", determinism),
        ("soft-sphere gradient", soft_sphere_gradient),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += !o.pass as usize;
        println!(
            "{} {}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
