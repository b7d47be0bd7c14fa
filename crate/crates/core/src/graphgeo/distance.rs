//! Lattice geodesic distance.
//!
//! Dijkstra on the `2n`-neighbor graph. Each edge costs the metric length of
//! the segment, evaluated with the midpoint rule. Paths are restricted to
//! axis-aligned steps, so on a flat patch the result `r` satisfies
//! `|x − p| ≤ r ≤ √n·|x − p|`, with equality along the axes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::field::{ScalarField, ShapeField};
use crate::error::{Error, Result};

#[derive(Debug, PartialEq)]
struct Item {
    dist: f64,
    node: usize,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance; ties broken by node index for determinism
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Metric lengths of the edges `idx → idx + e_axis`, per axis (NaN where no
/// such edge exists).
fn edge_lengths(field: &ShapeField) -> Result<Vec<Vec<f64>>> {
    let grid = field.grid();
    let patch = field.patch();
    let h = grid.h();
    (0..grid.dim())
        .map(|axis| {
            let lens: Vec<Result<f64>> = (0..grid.len())
                .into_par_iter()
                .map(|idx| {
                    if grid.neighbor(idx, axis, 1).is_none() {
                        return Ok(f64::NAN);
                    }
                    let mut mid = grid.coords(idx);
                    mid[axis] += 0.5 * h;
                    let jets = patch.embedding_jets(&mid, 1)?;
                    let speed = jets
                        .iter()
                        .map(|j| j.partial_along(&[axis]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    if !speed.is_finite() {
                        return Err(Error::NumericalFailure(format!(
                            "non-finite edge length at {mid:?}"
                        )));
                    }
                    Ok(h * speed)
                })
                .collect();
            lens.into_iter().collect()
        })
        .collect()
}

/// Distance from the node nearest to `p0` to every node.
pub fn geodesic_distance(field: &ShapeField, p0: &[f64]) -> Result<ScalarField> {
    let grid = field.grid();
    if !field.patch().domain().contains(p0, 1e-12) {
        return Err(Error::Domain(format!(
            "base point {p0:?} lies outside the patch domain"
        )));
    }
    let edges = edge_lengths(field)?;
    let start = grid.nearest(p0);
    let mut dist = vec![f64::INFINITY; grid.len()];
    let mut done = vec![false; grid.len()];
    dist[start] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Item {
        dist: 0.0,
        node: start,
    });
    while let Some(Item { dist: d, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for axis in 0..grid.dim() {
            for dir in [-1isize, 1] {
                if let Some(nb) = grid.neighbor(node, axis, dir) {
                    let w = if dir > 0 {
                        edges[axis][node]
                    } else {
                        edges[axis][nb]
                    };
                    let cand = d + w;
                    if cand < dist[nb] {
                        dist[nb] = cand;
                        heap.push(Item {
                            dist: cand,
                            node: nb,
                        });
                    }
                }
            }
        }
    }
    if dist.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput(
            "lattice graph is disconnected from the base point".into(),
        ));
    }
    Ok(ScalarField::new(dist, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgeo::patch::{Domain, Profile, SurfacePatch};

    #[test]
    fn flat_distance_bounds() {
        let p = SurfacePatch::flat(2, Domain::cube(2, 1.0)).unwrap();
        let f = ShapeField::build(&p, 0.125).unwrap();
        let r = geodesic_distance(&f, &[0.0, 0.0]).unwrap();
        for idx in 0..f.grid().len() {
            let x = f.grid().coords(idx);
            let e = (x[0] * x[0] + x[1] * x[1]).sqrt();
            assert!(r.get(idx) >= e - 1e-12 && r.get(idx) <= 2f64.sqrt() * e + 1e-12);
            if x[1] == 0.0 {
                assert!((r.get(idx) - x[0].abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn arclength_along_profile() {
        let p = SurfacePatch::one_variable_graph(
            Profile::Square,
            Domain::Box {
                lo: vec![0.0, -0.5],
                hi: vec![1.0, 0.5],
            },
        )
        .unwrap();
        let f = ShapeField::build(&p, 1.0 / 64.0).unwrap();
        let r = geodesic_distance(&f, &[0.0, 0.0]).unwrap();
        let end = f.grid().nearest(&[1.0, 0.0]);
        // ∫₀¹ √(1+4t²) dt
        let exact = (2.0 * 5f64.sqrt() + (2.0 + 5f64.sqrt()).ln()) / 4.0;
        assert!((r.get(end) - exact).abs() < 1e-4);
    }

    #[test]
    fn base_point_outside() {
        let p = SurfacePatch::flat(2, Domain::cube(2, 1.0)).unwrap();
        let f = ShapeField::build(&p, 0.25).unwrap();
        assert!(matches!(
            geodesic_distance(&f, &[2.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }
}
