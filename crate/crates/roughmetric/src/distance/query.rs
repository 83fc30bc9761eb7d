//! Scheduled distance queries with certified brackets.

use std::time::Instant;

use super::certificate::best_lower_bound;
use super::lattice::{shortest_path, Lattice};
use super::staircase::{staircase_upper_path, ChannelSpec};
use crate::fields::MetricField;
use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stage {
    pub eps: f64,
    pub h: f64,
}

#[derive(Clone, Debug)]
pub struct StageResult {
    pub eps: f64,
    pub h: f64,
    pub length: f64,
    pub popped: usize,
    pub runtime_ms: u128,
}

/// A completed query. `estimate` is the final-stage lattice length and
/// approximates the mollified distance at the final width; the bracket
/// `[lower_bound, upper_bound]` is for the limit distance d_g. Its lower
/// edge is a dual certificate. The upper edge is the smaller of the
/// stencil-corrected estimate and `certified_upper` (conformal cap and
/// channel detour limits); only the certified part is a theorem about d_g,
/// so when channels are far below the final width the estimate can exceed
/// the bracket, recorded by `estimate_in_bracket = false`.
#[derive(Clone, Debug)]
pub struct DistanceQuery {
    pub src: Vec<f64>,
    pub dst: Vec<f64>,
    pub stencil_k: usize,
    pub stages: Vec<StageResult>,
    pub estimate: f64,
    pub stencil_error: f64,
    pub stencil_upper: f64,
    pub certified_upper: Option<f64>,
    pub lower_bound: f64,
    pub lower_witness: String,
    pub upper_bound: f64,
    pub estimate_in_bracket: bool,
}

fn euclid(src: &[f64], dst: &[f64]) -> f64 {
    src.iter()
        .zip(dst)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
}

/// Box margins beyond the query's bounding box, sized so geodesic detours
/// fit while the final EX1 and EX3 stages stay at desk scale.
fn default_margin(dim: usize) -> f64 {
    if dim == 2 {
        0.25
    } else {
        0.55
    }
}

/// Best channel for the automatic staircase bound: the nearest merged
/// interval center (slab fields) or ball center over all levels (column
/// fields), measured from the source's transverse position.
fn nearest_channel(field: &MetricField, src: &[f64]) -> Option<ChannelSpec> {
    match field {
        MetricField::Ex1 { theta, .. } | MetricField::Ex2 { theta, .. } => {
            let mut best: Option<(f64, f64)> = None;
            for &(lo, hi) in theta.cover.merged_f64() {
                let q = 0.5 * (lo + hi);
                let gap = (q - src[0]).abs();
                if best.map_or(true, |(g, _)| gap < g) {
                    best = Some((gap, q));
                }
            }
            best.map(|(_, q)| ChannelSpec {
                center: vec![q],
                tol: f64::INFINITY,
            })
        }
        MetricField::Ex3 { hierarchy } => {
            let g = hierarchy.grid_dim();
            let mut best: Option<(f64, Vec<f64>)> = None;
            for (m, level) in hierarchy.levels.iter().enumerate() {
                for key in &level.centers {
                    let c = hierarchy.center_f64(m, key);
                    let gap = (0..g)
                        .map(|i| (c[i] - src[i]) * (c[i] - src[i]))
                        .sum::<f64>()
                        .sqrt();
                    if best.as_ref().map_or(true, |(b, _)| gap < *b) {
                        best = Some((gap, c[..g].to_vec()));
                    }
                }
            }
            best.map(|(_, c)| ChannelSpec {
                center: c,
                tol: f64::INFINITY,
            })
        }
        MetricField::Constant { .. } => None,
    }
}

/// Runs the (eps, h) schedule and assembles the bracket.
pub fn distance_estimate(
    field: &MetricField,
    src: &[f64],
    dst: &[f64],
    schedule: &[Stage],
    stencil_k: usize,
) -> Result<DistanceQuery> {
    let dim = field.dim();
    if src.len() != dim || dst.len() != dim {
        return Err(Error::Parameter("endpoint dimension mismatch".into()));
    }
    if schedule.is_empty() {
        return Err(Error::Parameter("schedule must have at least one stage".into()));
    }
    for (i, stage) in schedule.iter().enumerate() {
        if !(stage.h > 0.0 && stage.eps >= 2.0 * stage.h) {
            return Err(Error::Parameter(format!(
                "stage {i} violates eps >= 2h: eps={}, h={}",
                stage.eps, stage.h
            )));
        }
        if i > 0 && stage.eps > schedule[i - 1].eps {
            return Err(Error::Parameter("eps must be nonincreasing across stages".into()));
        }
    }

    let margin = default_margin(dim);
    let mut stages = Vec::with_capacity(schedule.len());
    let mut stencil_error = 0.0;
    for stage in schedule {
        // Anchor the origin on src so both endpoints snap exactly.
        let mut origin = vec![0.0; dim];
        let mut shape = vec![0usize; dim];
        for i in 0..dim {
            let lo = src[i].min(dst[i]) - margin;
            let hi = src[i].max(dst[i]) + margin;
            let below = ((src[i] - lo) / stage.h).floor();
            origin[i] = src[i] - stage.h * below;
            shape[i] = ((hi - origin[i]) / stage.h).floor() as usize + 1;
        }
        let lattice = Lattice::build(&origin, stage.h, &shape, stencil_k)?;
        stencil_error = lattice.stencil.chordal_error;
        let clock = Instant::now();
        let path = shortest_path(&lattice, field, stage.eps, src, dst)?;
        stages.push(StageResult {
            eps: stage.eps,
            h: stage.h,
            length: path.length,
            popped: path.popped,
            runtime_ms: clock.elapsed().as_millis(),
        });
    }

    let estimate = stages.last().unwrap().length;
    let stencil_upper = estimate * (1.0 + stencil_error);

    let (lower_bound, lower_witness) = best_lower_bound(field, src, dst, 512)?;

    let conformal_cap = SQRT_2 * euclid(src, dst);
    let mut certified = conformal_cap;
    if let Some(channel) = nearest_channel(field, src) {
        let final_eps = schedule.last().unwrap().eps;
        if let Ok(stair) = staircase_upper_path(field, final_eps, src, dst, &channel) {
            certified = certified.min(stair.limit_bound);
        }
    }
    let upper_bound = stencil_upper.min(certified);

    if lower_bound > upper_bound * (1.0 + 1e-12) + 1e-9 {
        return Err(Error::Diagnostic(format!(
            "bracket inversion: certified lower {lower_bound} exceeds upper {upper_bound}"
        )));
    }

    let estimate_in_bracket =
        lower_bound - 1e-12 <= estimate && estimate <= upper_bound * (1.0 + 1e-12) + 1e-12;
    Ok(DistanceQuery {
        src: src.to_vec(),
        dst: dst.to_vec(),
        stencil_k,
        stages,
        estimate,
        stencil_error,
        stencil_upper,
        certified_upper: Some(certified),
        lower_bound,
        lower_witness,
        upper_bound,
        estimate_in_bracket,
    })
}

/// Lattice-free bracket on the limit distance, from certificates alone:
/// dual lower bound against the smaller of the conformal cap and the
/// channel-detour limit. Constant fields return the closed form on both
/// edges. The witness string names the lower-bound certificate.
///
/// Cheap enough to sit inside difference-quotient loops where a full
/// scheduled query per endpoint pair would dominate the runtime.
pub fn certified_bracket(
    field: &MetricField,
    src: &[f64],
    dst: &[f64],
) -> Result<(f64, f64, String)> {
    let dim = field.dim();
    if src.len() != dim || dst.len() != dim {
        return Err(Error::Parameter("endpoint dimension mismatch".into()));
    }
    if let MetricField::Constant { c, .. } = field {
        let exact = super::certificate::constant_closed_form(*c, src, dst);
        return Ok((exact, exact, "closed-form".into()));
    }
    let (lower, witness) = best_lower_bound(field, src, dst, 512)?;
    let mut upper = SQRT_2 * euclid(src, dst);
    if let Some(channel) = nearest_channel(field, src) {
        if let Ok(stair) = staircase_upper_path(field, 1e-3, src, dst, &channel) {
            upper = upper.min(stair.limit_bound);
        }
    }
    if lower > upper * (1.0 + 1e-12) + 1e-9 {
        return Err(Error::Diagnostic(format!(
            "bracket inversion: certified lower {lower} exceeds upper {upper}"
        )));
    }
    Ok((lower, upper, witness))
}
