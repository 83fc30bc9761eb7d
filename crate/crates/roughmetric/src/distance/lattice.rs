//! Lattice graphs and exact Dijkstra under mollified conformal weights.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::stencil::{build_stencil, Stencil};
use crate::fields::MetricField;
use crate::mollify::{MollifiedMetric, Theta3Window};
use crate::{Error, Result};

const MAX_NODES: usize = 16_000_000;

/// Axis-aligned node grid. Node `i` lives at `origin + h·multi_index(i)`,
/// row-major with the last axis fastest.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub h: f64,
    pub shape: Vec<usize>,
    pub stencil: Stencil,
}

impl Lattice {
    pub fn build(origin: &[f64], h: f64, shape: &[usize], stencil_k: usize) -> Result<Lattice> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parameter(format!("grid spacing must be positive, got {h}")));
        }
        let dim = origin.len();
        if shape.len() != dim {
            return Err(Error::Parameter("origin and shape dimensions differ".into()));
        }
        let mut nodes = 1usize;
        for &s in shape {
            if s < 2 {
                return Err(Error::Parameter("each axis needs at least 2 nodes".into()));
            }
            nodes = nodes.saturating_mul(s);
        }
        if nodes > MAX_NODES {
            return Err(Error::Resource {
                message: format!("lattice of {nodes} nodes exceeds the {MAX_NODES} budget"),
                reached: nodes,
            });
        }
        Ok(Lattice {
            dim,
            origin: origin.to_vec(),
            h,
            shape: shape.to_vec(),
            stencil: build_stencil(dim, stencil_k)?,
        })
    }

    pub fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn point_of(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut coords = vec![0.0; self.dim];
        for axis in (0..self.dim).rev() {
            let n = self.shape[axis];
            coords[axis] = self.origin[axis] + self.h * (rest % n) as f64;
            rest /= n;
        }
        coords
    }

    fn index_of(&self, multi: &[i64]) -> usize {
        let mut idx = 0usize;
        for axis in 0..self.dim {
            idx = idx * self.shape[axis] + multi[axis] as usize;
        }
        idx
    }

    /// Snaps a point to the nearest node; every coordinate must land within
    /// `h/2` of a node and inside the box.
    pub fn snap(&self, p: &[f64]) -> Result<usize> {
        let mut multi = vec![0i64; self.dim];
        for axis in 0..self.dim {
            let rel = (p[axis] - self.origin[axis]) / self.h;
            let k = rel.round();
            if (rel - k).abs() > 0.5 + 1e-9 {
                return Err(Error::Parameter(format!(
                    "point coordinate {} does not snap to the lattice",
                    p[axis]
                )));
            }
            if k < 0.0 || k as usize >= self.shape[axis] {
                return Err(Error::Parameter(format!(
                    "point coordinate {} falls outside the lattice box",
                    p[axis]
                )));
            }
            multi[axis] = k as i64;
        }
        Ok(self.index_of(&multi))
    }
}

/// Conformal length of the segment `[a, b]` under `θ_ε`: composite Simpson
/// of `√θ_ε`, panels doubled until the relative change drops below 1e−8.
/// Hierarchy fields collect their ball window once for the whole segment.
pub fn segment_weight(metric: &MollifiedMetric, a: &[f64], b: &[f64]) -> f64 {
    let dim = a.len();
    let mut chord = 0.0;
    for i in 0..dim {
        let d = b[i] - a[i];
        chord += d * d;
    }
    let chord = chord.sqrt();
    if chord == 0.0 {
        return 0.0;
    }

    if let MetricField::Ex3 { hierarchy } = metric.field {
        let g = hierarchy.grid_dim();
        let window = Theta3Window::new(hierarchy, metric.eps, &a[..g], &b[..g]);
        let mut point = vec![0.0; g];
        return simpson_doubling(chord, |t| {
            for i in 0..g {
                point[i] = a[i] + t * (b[i] - a[i]);
            }
            window.theta(&point).sqrt()
        });
    }

    let mut point = vec![0.0; dim];
    simpson_doubling(chord, |t| {
        for i in 0..dim {
            point[i] = a[i] + t * (b[i] - a[i]);
        }
        metric.sqrt_theta(&point)
    })
}

fn simpson_doubling<F: FnMut(f64) -> f64>(chord: f64, mut eval: F) -> f64 {
    let ends = eval(0.0) + eval(1.0);
    let mut odd_sum = eval(0.5);
    let mut even_sum = 0.0;
    let mut panels = 2usize;
    let mut prev = (ends + 4.0 * odd_sum) / 6.0;
    loop {
        // Previous odd nodes become even; sample the new midpoints.
        even_sum += odd_sum;
        odd_sum = 0.0;
        for j in 0..panels {
            odd_sum += eval((j as f64 + 0.5) / panels as f64);
        }
        panels *= 2;
        let current = (ends + 2.0 * even_sum + 4.0 * odd_sum) / (3.0 * panels as f64);
        if (current - prev).abs() <= 1e-8 * current.abs() || panels >= 4096 {
            return current * chord;
        }
        prev = current;
    }
}

/// Quadrature of `√θ_ε` along `[a, b]` for a raw field and width, matching
/// the mollified-metric constructor checks.
pub fn edge_weight(field: &MetricField, eps: f64, a: &[f64], b: &[f64]) -> Result<f64> {
    let metric = MollifiedMetric::new(field, eps)?;
    Ok(segment_weight(&metric, a, b))
}

#[derive(Clone, Debug)]
pub struct PathResult {
    pub length: f64,
    pub nodes: Vec<usize>,
    pub popped: usize,
}

/// Exact Dijkstra on the stencil graph, lazy decrease-key, ties broken by
/// node index. Terminates when `dst` is settled.
pub fn shortest_path(
    lattice: &Lattice,
    field: &MetricField,
    eps: f64,
    src: &[f64],
    dst: &[f64],
) -> Result<PathResult> {
    let metric = MollifiedMetric::new(field, eps)?;
    let src_idx = lattice.snap(src)?;
    let dst_idx = lattice.snap(dst)?;

    let n = lattice.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    dist[src_idx] = 0.0;
    heap.push(Reverse((0u64, src_idx)));

    let mut popped = 0usize;
    let mut multi = vec![0i64; lattice.dim];
    while let Some(Reverse((bits, node))) = heap.pop() {
        if settled[node] {
            continue;
        }
        if f64::from_bits(bits) > dist[node] {
            continue;
        }
        settled[node] = true;
        popped += 1;
        if node == dst_idx {
            break;
        }

        let mut rest = node;
        for axis in (0..lattice.dim).rev() {
            multi[axis] = (rest % lattice.shape[axis]) as i64;
            rest /= lattice.shape[axis];
        }
        let here = lattice.point_of(node);
        'offsets: for off in &lattice.stencil.offsets {
            let mut target = vec![0i64; lattice.dim];
            for axis in 0..lattice.dim {
                let t = multi[axis] + off[axis];
                if t < 0 || t as usize >= lattice.shape[axis] {
                    continue 'offsets;
                }
                target[axis] = t;
            }
            let tidx = lattice.index_of(&target);
            if settled[tidx] {
                continue;
            }
            let there = lattice.point_of(tidx);
            let w = segment_weight(&metric, &here, &there);
            let cand = dist[node] + w;
            if cand < dist[tidx] {
                dist[tidx] = cand;
                parent[tidx] = node;
                heap.push(Reverse((cand.to_bits(), tidx)));
            }
        }
    }

    if !settled[dst_idx] {
        return Err(Error::Diagnostic(
            "destination unreachable on a full lattice".into(),
        ));
    }
    let mut nodes = vec![dst_idx];
    while *nodes.last().unwrap() != src_idx {
        nodes.push(parent[*nodes.last().unwrap()]);
    }
    nodes.reverse();
    Ok(PathResult {
        length: dist[dst_idx],
        nodes,
        popped,
    })
}
