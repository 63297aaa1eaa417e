//! Niggli reduction following the Krivy–Gruber iteration, with the
//! epsilon-guarded comparisons of Grosse-Kunstleve, Sauter & Adams (2004).
//!
//! The reduced cell keeps the Cartesian frame of the input: every step is an
//! integer unimodular change of basis applied to the lattice rows, and the
//! accumulated transform is returned alongside the reduced lattice.

use nalgebra::Matrix3;

use super::lattice::Lattice;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
/// Comparison tolerance, in units of `∛volume`.
pub const RELATIVE_TOLERANCE: f64 = 1e-5;

/// Integer change of basis: reduced rows = `T · original rows`.
pub type IntMatrix = [[i32; 3]; 3];

pub const IDENTITY: IntMatrix = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

pub fn int_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let mut out = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn int_det(m: &IntMatrix) -> i32 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse of a unimodular integer matrix.
pub fn int_inverse(m: &IntMatrix) -> Option<IntMatrix> {
    let det = int_det(m);
    if det.abs() != 1 {
        return None;
    }
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    // adjugate / det
    let adj = [
        [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
        [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
        [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
    ];
    Some(adj.map(|row| row.map(|x| x * det)))
}

fn to_float(m: &IntMatrix) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j] as f64)
}

/// Apply an integer basis change to a lattice.
pub fn transform_lattice(lattice: &Lattice, t: &IntMatrix) -> Result<Lattice> {
    Lattice::from_matrix(to_float(t) * lattice.matrix())
}

struct G6 {
    a: f64,
    b: f64,
    c: f64,
    xi: f64,
    eta: f64,
    zeta: f64,
}

impl G6 {
    fn of(m: &Matrix3<f64>) -> G6 {
        let r = |i: usize| m.row(i);
        G6 {
            a: r(0).dot(&r(0)),
            b: r(1).dot(&r(1)),
            c: r(2).dot(&r(2)),
            xi: 2.0 * r(1).dot(&r(2)),
            eta: 2.0 * r(0).dot(&r(2)),
            zeta: 2.0 * r(0).dot(&r(1)),
        }
    }
}

fn sign(x: f64, eps: f64) -> i32 {
    if x > eps {
        1
    } else if x < -eps {
        -1
    } else {
        0
    }
}

fn unit_sign(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else {
        -1
    }
}

/// One pass over the Krivy–Gruber steps. Returns the basis change to apply
/// next, or `None` when the cell already satisfies every condition.
fn next_step(g: &G6, eps: f64) -> Option<IntMatrix> {
    // A1
    if g.a > g.b + eps || ((g.a - g.b).abs() <= eps && g.xi.abs() > g.eta.abs() + eps) {
        return Some([[0, -1, 0], [-1, 0, 0], [0, 0, -1]]);
    }
    // A2
    if g.b > g.c + eps || ((g.b - g.c).abs() <= eps && g.eta.abs() > g.zeta.abs() + eps) {
        return Some([[-1, 0, 0], [0, 0, -1], [0, -1, 0]]);
    }
    let (l, m, n) = (sign(g.xi, eps), sign(g.eta, eps), sign(g.zeta, eps));
    // A3 / A4: make the three off-diagonal terms all positive or all non-positive
    if l * m * n == 1 {
        let (i, j, k) = (
            if l == -1 { -1 } else { 1 },
            if m == -1 { -1 } else { 1 },
            if n == -1 { -1 } else { 1 },
        );
        if (i, j, k) != (1, 1, 1) {
            return Some([[i, 0, 0], [0, j, 0], [0, 0, k]]);
        }
    } else {
        let mut d = [1, 1, 1];
        let mut zero_at = None;
        for (idx, s) in [l, m, n].into_iter().enumerate() {
            if s == 1 {
                d[idx] = -1;
            } else if s == 0 {
                zero_at = Some(idx);
            }
        }
        if d[0] * d[1] * d[2] == -1 {
            if let Some(p) = zero_at {
                d[p] = -1;
            }
        }
        if d != [1, 1, 1] && d[0] * d[1] * d[2] == 1 {
            return Some([[d[0], 0, 0], [0, d[1], 0], [0, 0, d[2]]]);
        }
    }
    // A5
    if g.xi.abs() > g.b + eps
        || ((g.xi - g.b).abs() <= eps && 2.0 * g.eta < g.zeta - eps)
        || ((g.xi + g.b).abs() <= eps && g.zeta < -eps)
    {
        let s = unit_sign(g.xi);
        return Some([[1, 0, 0], [0, 1, 0], [0, -s, 1]]);
    }
    // A6
    if g.eta.abs() > g.a + eps
        || ((g.eta - g.a).abs() <= eps && 2.0 * g.xi < g.zeta - eps)
        || ((g.eta + g.a).abs() <= eps && g.zeta < -eps)
    {
        let s = unit_sign(g.eta);
        return Some([[1, 0, 0], [0, 1, 0], [-s, 0, 1]]);
    }
    // A7
    if g.zeta.abs() > g.a + eps
        || ((g.zeta - g.a).abs() <= eps && 2.0 * g.xi < g.eta - eps)
        || ((g.zeta + g.a).abs() <= eps && g.eta < -eps)
    {
        let s = unit_sign(g.zeta);
        return Some([[1, 0, 0], [-s, 1, 0], [0, 0, 1]]);
    }
    // A8
    let sum = g.xi + g.eta + g.zeta + g.a + g.b;
    if sum < -eps || (sum.abs() <= eps && 2.0 * (g.a + g.eta) + g.zeta > eps) {
        return Some([[1, 0, 0], [0, 1, 0], [1, 1, 1]]);
    }
    None
}

/// Reduce a lattice to its Niggli cell, returning the reduced lattice and the
/// unimodular transform `T` with `reduced = T · input`.
pub fn niggli_reduce_with_transform(lattice: &Lattice) -> Result<(Lattice, IntMatrix)> {
    let volume = lattice.volume();
    let eps = RELATIVE_TOLERANCE * volume.cbrt();
    let mut rows = *lattice.matrix();
    let mut total = IDENTITY;
    for _ in 0..MAX_ITERATIONS {
        let g = G6::of(&rows);
        match next_step(&g, eps) {
            None => {
                let reduced = Lattice::from_matrix(rows)?;
                return Ok((reduced, total));
            }
            Some(t) => {
                rows = to_float(&t) * rows;
                total = int_mul(&t, &total);
            }
        }
    }
    Err(Error::NiggliNotConverged(MAX_ITERATIONS))
}

pub fn niggli_reduce(lattice: &Lattice) -> Result<Lattice> {
    niggli_reduce_with_transform(lattice).map(|(l, _)| l)
}
