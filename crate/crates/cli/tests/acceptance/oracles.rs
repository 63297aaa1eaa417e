//! Brute-force reference computations the acceptance checks compare against.

use crysgen_core::{Lattice, Vec3};

/// Shortest `to − from` over every image `k ∈ [−r..r]³`.
pub fn exhaustive_min_image(l: &Lattice, from: &Vec3, to: &Vec3, r: i32) -> Vec3 {
    let base = l.to_cart(&(to - from));
    let mut best = base;
    for k1 in -r..=r {
        for k2 in -r..=r {
            for k3 in -r..=r {
                let v = base + l.image_shift([k1, k2, k3]);
                if v.norm() < best.norm() {
                    best = v;
                }
            }
        }
    }
    best
}

/// Successive minima of the lattice from integer combinations with
/// coefficients in `[−bound..bound]`.
pub fn successive_minima(l: &Lattice, bound: i32) -> [f64; 3] {
    let mut v = Vec::new();
    for i in -bound..=bound {
        for j in -bound..=bound {
            for k in -bound..=bound {
                if (i, j, k) != (0, 0, 0) {
                    v.push(l.image_shift([i, j, k]));
                }
            }
        }
    }
    v.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut basis: Vec<Vec3> = Vec::new();
    for x in v {
        let independent = match basis.len() {
            0 => true,
            1 => basis[0].cross(&x).norm() > 1e-9 * x.norm() * basis[0].norm(),
            _ => basis[0].cross(&basis[1]).dot(&x).abs() > 1e-9 * x.norm().powi(3),
        };
        if independent {
            basis.push(x);
            if basis.len() == 3 {
                break;
            }
        }
    }
    [basis[0].norm(), basis[1].norm(), basis[2].norm()]
}

/// Exact transport cost between two integer-valued empirical distributions:
/// each `a` sample supplies `|b|` units, each `b` sample absorbs `|a|`, and
/// the min-cost flow is found by successive shortest paths.
pub fn transport(a: &[i64], b: &[i64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut supply = vec![m as i64; n];
    let mut demand = vec![n as i64; m];
    let mut flow = vec![vec![0i64; m]; n];
    let mut cost = 0i64;
    let c = |i: usize, j: usize| (a[i] - b[j]).abs();
    loop {
        // nodes 0..n are sources, n..n+m sinks
        let mut dist = vec![i64::MAX / 4; n + m];
        let mut prev = vec![usize::MAX; n + m];
        for i in 0..n {
            if supply[i] > 0 {
                dist[i] = 0;
            }
        }
        for _ in 0..(n + m) {
            let mut changed = false;
            for i in 0..n {
                for j in 0..m {
                    if dist[i] + c(i, j) < dist[n + j] {
                        dist[n + j] = dist[i] + c(i, j);
                        prev[n + j] = i;
                        changed = true;
                    }
                    if flow[i][j] > 0 && dist[n + j] - c(i, j) < dist[i] {
                        dist[i] = dist[n + j] - c(i, j);
                        prev[i] = n + j;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let Some(sink) = (0..m).filter(|&j| demand[j] > 0).min_by_key(|&j| dist[n + j]) else {
            break;
        };
        let mut path = vec![n + sink];
        let mut v = n + sink;
        while prev[v] != usize::MAX {
            v = prev[v];
            path.push(v);
        }
        let src = v;
        let mut amount = supply[src].min(demand[sink]);
        for w in path.windows(2) {
            if w[1] >= n {
                amount = amount.min(flow[w[0]][w[1] - n]);
            }
        }
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if from < n {
                flow[from][to - n] += amount;
                cost += amount * c(from, to - n);
            } else {
                flow[to][from - n] -= amount;
                cost -= amount * c(to, from - n);
            }
        }
        supply[src] -= amount;
        demand[sink] -= amount;
    }
    cost as f64 / (n * m) as f64
}

/// Every non-empty multiset of values `0..=3` with at most `max_len` items.
pub fn small_multisets(max_len: usize) -> Vec<Vec<i64>> {
    fn grow(cur: &mut Vec<i64>, lo: i64, left: usize, out: &mut Vec<Vec<i64>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for v in lo..=3 {
            cur.push(v);
            grow(cur, v, left - 1, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), 0, max_len, &mut out);
    out
}

/// Coverage figures recomputed directly from a `d[generated][reference]`
/// table pair: `(cov_r, cov_p, amsd_r, amsd_p, amcd_r, amcd_p)`.
pub fn coverage_table(s: &[Vec<f64>], c: &[Vec<f64>], ds: f64, dc: f64) -> [f64; 6] {
    let (k, l) = (s.len(), s[0].len());
    let hit = |i: usize, j: usize| s[i][j] < ds && c[i][j] < dc;
    let pct = |n: usize, d: usize| 100.0 * n as f64 / d as f64;
    let col_min = |m: &[Vec<f64>], j: usize| (0..k).map(|i| m[i][j]).fold(f64::INFINITY, f64::min);
    let row_min = |m: &[Vec<f64>], i: usize| (0..l).map(|j| m[i][j]).fold(f64::INFINITY, f64::min);
    [
        pct((0..l).filter(|&j| (0..k).any(|i| hit(i, j))).count(), l),
        pct((0..k).filter(|&i| (0..l).any(|j| hit(i, j))).count(), k),
        (0..l).map(|j| col_min(s, j)).sum::<f64>() / l as f64,
        (0..k).map(|i| row_min(s, i)).sum::<f64>() / k as f64,
        (0..l).map(|j| col_min(c, j)).sum::<f64>() / l as f64,
        (0..k).map(|i| row_min(c, i)).sum::<f64>() / k as f64,
    ]
}
