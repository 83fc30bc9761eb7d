//! Certified lower bounds for d_g via admissible potentials.
//!
//! A Lipschitz `w` with `|∇w|² ≤ θ` almost everywhere satisfies
//! `|w(x) − w(y)| ≤ d_g(x, y)`. Each witness couples an exact gradient with
//! a closed-form admissibility argument; sampling along the query segment
//! cross-checks the argument and rejects a misapplied witness.

use crate::exact;
use crate::fields::{MetricField, SobolevHierarchy};
use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Debug)]
pub enum DualWitness {
    /// `w = x_axis`. `|∇w|² = 1 ≤ θ` since θ ≥ 1 everywhere.
    Coordinate { axis: usize },
    /// `w = (x·v)/(√2|v|)`. `|∇w|² = 1/2 ≤ 1 ≤ θ`.
    ScaledLinear { v: Vec<f64> },
    /// Slab fields: `w = W(x_1)` with `W' = √2` off the merged cover and
    /// `1` inside it, matching `θ = 2` and `θ = 1` exactly.
    ChannelModulatedEx1,
    /// Column fields: `w` built from the first coordinate with slope
    /// reduced on the projection strips of the ball supports, where θ may
    /// drop below 2. Without the axis: slopes `√2` off-strip, `1` on.
    /// With the axis: `w = x_d + W(x_1)`, slopes `1` off-strip, `0` on, so
    /// `|∇w|² = 2` exactly where θ = 2 and `1` on the strips.
    ChannelStripsEx3 { with_axis: bool },
}

impl DualWitness {
    pub fn label(&self) -> String {
        match self {
            DualWitness::Coordinate { axis } => format!("coordinate-{axis}"),
            DualWitness::ScaledLinear { .. } => "scaled-linear".into(),
            DualWitness::ChannelModulatedEx1 => "channel-modulated".into(),
            DualWitness::ChannelStripsEx3 { with_axis: false } => "strip-modulated".into(),
            DualWitness::ChannelStripsEx3 { with_axis: true } => "axis-plus-strips".into(),
        }
    }
}

/// Projection strips of every ball support onto the first coordinate,
/// sorted. Overlaps are kept: summing them undercounts `w`'s growth and
/// keeps the bound valid.
fn strips_ex3(h: &SobolevHierarchy) -> Vec<(f64, f64)> {
    let mut strips = Vec::new();
    for (m, level) in h.levels.iter().enumerate() {
        let half = 0.15 * level.r_f64;
        for key in &level.centers {
            let c = h.center_f64(m, key)[0];
            strips.push((c - half, c + half));
        }
    }
    strips.sort_by(|a, b| a.partial_cmp(b).unwrap());
    strips
}

fn strips_overlap(strips: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let (a, b) = (a.min(b), a.max(b));
    strips
        .iter()
        .map(|&(lo, hi)| (hi.min(b) - lo.max(a)).max(0.0))
        .sum()
}

fn on_strip(strips: &[(f64, f64)], x: f64) -> bool {
    strips.iter().any(|&(lo, hi)| lo <= x && x <= hi)
}

/// Exact signed covered measure of `[min(a,b), max(a,b)]` for slab fields.
fn covered_ex1(field: &MetricField, a: f64, b: f64) -> Result<f64> {
    let cover = match field {
        MetricField::Ex1 { theta, .. } | MetricField::Ex2 { theta, .. } => &theta.cover,
        _ => return Err(Error::Parameter("witness needs a slab field".into())),
    };
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let m = cover.measure_within(&exact::from_f64(lo)?, &exact::from_f64(hi)?);
    Ok(exact::to_f64(&m))
}

fn grad_sq(field: &MetricField, witness: &DualWitness, x: &[f64], strips: &[(f64, f64)]) -> f64 {
    match witness {
        DualWitness::Coordinate { .. } => 1.0,
        DualWitness::ScaledLinear { .. } => 0.5,
        DualWitness::ChannelModulatedEx1 => {
            let inside = match field {
                MetricField::Ex1 { theta, .. } | MetricField::Ex2 { theta, .. } => {
                    theta.eval(x[0]) == 1.0
                }
                _ => false,
            };
            if inside {
                1.0
            } else {
                2.0
            }
        }
        DualWitness::ChannelStripsEx3 { with_axis } => {
            let on = on_strip(strips, x[0]);
            let slope = match (with_axis, on) {
                (false, false) => SQRT_2,
                (false, true) => 1.0,
                (true, false) => 1.0,
                (true, true) => 0.0,
            };
            slope * slope + if *with_axis { 1.0 } else { 0.0 }
        }
    }
}

/// `|w(dst) − w(src)|` for an admissible witness: a certified lower bound
/// on d_g(src, dst). Admissibility `|∇w|² ≤ θ` is sampled along the query
/// segment; a violating sample rejects the witness.
pub fn dual_certificate_bound(
    field: &MetricField,
    witness: &DualWitness,
    src: &[f64],
    dst: &[f64],
    samples: usize,
) -> Result<f64> {
    let dim = field.dim();
    if src.len() != dim || dst.len() != dim {
        return Err(Error::Parameter("endpoint dimension mismatch".into()));
    }
    let strips = match (witness, field) {
        (DualWitness::ChannelStripsEx3 { .. }, MetricField::Ex3 { hierarchy }) => {
            strips_ex3(hierarchy)
        }
        (DualWitness::ChannelStripsEx3 { .. }, _) => {
            return Err(Error::Parameter("strip witness needs a column field".into()))
        }
        _ => Vec::new(),
    };

    let mut point = vec![0.0; dim];
    for j in 0..=samples.max(1) {
        let t = j as f64 / samples.max(1) as f64;
        for i in 0..dim {
            point[i] = src[i] + t * (dst[i] - src[i]);
        }
        let g2 = grad_sq(field, witness, &point, &strips);
        let theta = field.theta(&point);
        if g2 > theta * (1.0 + 1e-12) {
            return Err(Error::Parameter(format!(
                "witness inadmissible at sample {point:?}: |∇w|²={g2} > θ={theta}"
            )));
        }
    }

    let bound = match witness {
        DualWitness::Coordinate { axis } => {
            if *axis >= dim {
                return Err(Error::Parameter(format!("axis {axis} outside 0..{dim}")));
            }
            (dst[*axis] - src[*axis]).abs()
        }
        DualWitness::ScaledLinear { v } => {
            if v.len() != dim {
                return Err(Error::Parameter("direction dimension mismatch".into()));
            }
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Parameter("zero direction".into()));
            }
            let dot: f64 = (0..dim).map(|i| (dst[i] - src[i]) * v[i]).sum();
            dot.abs() / (SQRT_2 * norm)
        }
        DualWitness::ChannelModulatedEx1 => {
            let delta = (dst[0] - src[0]).abs();
            let covered = covered_ex1(field, src[0], dst[0])?;
            SQRT_2 * delta - (SQRT_2 - 1.0) * covered
        }
        DualWitness::ChannelStripsEx3 { with_axis } => {
            let delta1 = (dst[0] - src[0]).abs();
            let covered = strips_overlap(&strips, src[0], dst[0]);
            if *with_axis {
                let dd = (dst[dim - 1] - src[dim - 1]).abs();
                dd + delta1 - covered
            } else {
                SQRT_2 * delta1 - (SQRT_2 - 1.0) * covered
            }
        }
    };
    Ok(bound.max(0.0))
}

/// Best bound over the standard witness family for this field, with the
/// winning witness's label.
pub fn best_lower_bound(
    field: &MetricField,
    src: &[f64],
    dst: &[f64],
    samples: usize,
) -> Result<(f64, String)> {
    let dim = field.dim();
    let mut witnesses: Vec<DualWitness> = (0..dim)
        .map(|axis| DualWitness::Coordinate { axis })
        .collect();
    let dir: Vec<f64> = (0..dim).map(|i| dst[i] - src[i]).collect();
    if dir.iter().any(|c| *c != 0.0) {
        witnesses.push(DualWitness::ScaledLinear { v: dir });
    }
    match field {
        MetricField::Ex1 { .. } | MetricField::Ex2 { .. } => {
            witnesses.push(DualWitness::ChannelModulatedEx1);
        }
        MetricField::Ex3 { .. } => {
            witnesses.push(DualWitness::ChannelStripsEx3 { with_axis: false });
            witnesses.push(DualWitness::ChannelStripsEx3 { with_axis: true });
        }
        MetricField::Constant { .. } => {}
    }

    let mut best = f64::NEG_INFINITY;
    let mut label = String::new();
    for w in &witnesses {
        let bound = dual_certificate_bound(field, w, src, dst, samples)?;
        if bound > best {
            best = bound;
            label = w.label();
        }
    }
    if best.is_infinite() {
        return Err(Error::Parameter("no applicable witness".into()));
    }
    Ok((best, label))
}

/// Constant-metric witness check used by property suites: for θ ≡ c the
/// exact distance is `√c`·euclidean, and the scaled-linear witness yields
/// `1/√2` of the euclidean distance.
pub fn constant_closed_form(c: f64, src: &[f64], dst: &[f64]) -> f64 {
    let d2: f64 = src
        .iter()
        .zip(dst)
        .map(|(a, b)| (b - a) * (b - a))
        .sum();
    c.sqrt() * d2.sqrt()
}
