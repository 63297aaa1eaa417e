//! Periodic K-nearest-neighbour multi-graph.
//!
//! Every edge points from an atom in the home cell to an atom in the cell
//! translated by an integer image `k`, so a pair of atoms can be joined by
//! several edges and an atom can neighbour its own images.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;

use crate::crystal::{Crystal, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicEdge {
    pub src: usize,
    pub dst: usize,
    pub image: [i32; 3],
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGraph {
    pub num_nodes: usize,
    pub k: usize,
    /// Sorted by `(src, distance)`, exactly `k` edges per node.
    pub edges: Vec<PeriodicEdge>,
}

impl PeriodicGraph {
    pub fn neighbors(&self, node: usize) -> &[PeriodicEdge] {
        &self.edges[node * self.k..(node + 1) * self.k]
    }

    /// Per-node sorted neighbour distances.
    pub fn distance_multiset(&self) -> Vec<Vec<f64>> {
        (0..self.num_nodes)
            .map(|i| {
                let mut d: Vec<f64> = self.neighbors(i).iter().map(|e| e.distance).collect();
                d.sort_by(f64::total_cmp);
                d
            })
            .collect()
    }

    /// Edge list as `src,dst,k1,k2,k3,distance`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "src,dst,k1,k2,k3,distance")?;
        for e in &self.edges {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                e.src, e.dst, e.image[0], e.image[1], e.image[2], e.distance
            )?;
        }
        Ok(())
    }
}

/// Free function form of [`PeriodicGraph::distance_multiset`].
pub fn graph_distance_multiset(graph: &PeriodicGraph) -> Vec<Vec<f64>> {
    graph.distance_multiset()
}

fn edge_order(a: &PeriodicEdge, b: &PeriodicEdge) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then(a.dst.cmp(&b.dst))
        .then(a.image.cmp(&b.image))
}

fn candidates(crystal: &Crystal, src: usize, shells: [i32; 3]) -> Vec<PeriodicEdge> {
    let lattice = crystal.lattice();
    let frac = crystal.frac_coords();
    let origin = frac[src];
    let mut out = Vec::new();
    for (dst, f) in frac.iter().enumerate() {
        let delta = f - origin;
        for k1 in -shells[0]..=shells[0] {
            for k2 in -shells[1]..=shells[1] {
                for k3 in -shells[2]..=shells[2] {
                    if dst == src && k1 == 0 && k2 == 0 && k3 == 0 {
                        continue;
                    }
                    let shift = Vec3::new(k1 as f64, k2 as f64, k3 as f64);
                    let distance = lattice.to_cart(&(delta + shift)).norm();
                    out.push(PeriodicEdge {
                        src,
                        dst,
                        image: [k1, k2, k3],
                        distance,
                    });
                }
            }
        }
    }
    out
}

fn select(mut cands: Vec<PeriodicEdge>, k: usize) -> Vec<PeriodicEdge> {
    if cands.len() > k {
        cands.select_nth_unstable_by(k - 1, edge_order);
        cands.truncate(k);
    }
    cands.sort_by(edge_order);
    cands
}

fn node_neighbors(crystal: &Crystal, src: usize, k: usize, extra_shells: i32) -> Vec<PeriodicEdge> {
    let n = crystal.num_atoms();
    let spacings = crystal.lattice().plane_spacings();
    let mut shells = [1i32; 3];
    while n * shells.iter().map(|&s| (2 * s + 1) as usize).product::<usize>() <= k {
        shells = shells.map(|s| s + 1);
    }
    loop {
        let chosen = select(candidates(crystal, src, shells), k);
        let radius = chosen.last().map_or(0.0, |e| e.distance);
        // An image with |k_a| > radius / h_a + 1 lies beyond the search sphere.
        let needed = spacings.map(|h| (radius / h).ceil() as i32 + 1);
        if (0..3).all(|a| needed[a] <= shells[a]) {
            if extra_shells == 0 {
                return chosen;
            }
            let wider = shells.map(|s| s + extra_shells);
            return select(candidates(crystal, src, wider), k);
        }
        for a in 0..3 {
            shells[a] = shells[a].max(needed[a]);
        }
    }
}

/// Connect every atom to its `k` nearest periodic neighbours. Ties at equal
/// distance are broken by destination index, then image.
pub fn knn_graph(crystal: &Crystal, k: usize) -> PeriodicGraph {
    knn_graph_with_extra_shells(crystal, k, 0)
}

/// [`knn_graph`] with the candidate image box widened by `extra_shells`
/// beyond what the search radius requires.
pub fn knn_graph_with_extra_shells(crystal: &Crystal, k: usize, extra_shells: i32) -> PeriodicGraph {
    assert!(k >= 1, "k must be at least 1");
    let n = crystal.num_atoms();
    let edges = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| node_neighbors(crystal, i, k, extra_shells))
        .collect();
    PeriodicGraph {
        num_nodes: n,
        k,
        edges,
    }
}
