//! Explicit channel-detour polylines realizing the direction-law upper
//! bounds.
//!
//! The detour enters the nearest fast channel, rides it for the dominant
//! component, returns, and closes with a straight diagonal. In the
//! mollification limit its length is `α(u)·1 + 2√2·offset`: each transverse
//! hop costs at most `√2·offset`, the ride is free, and the diagonal costs
//! `√2` times its chord, which the branch condition turns into the α law.

use super::closed_forms::{alpha_ex1, alpha_ex3};
use super::lattice::segment_weight;
use crate::fields::MetricField;
use crate::mollify::MollifiedMetric;
use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// A fast channel to detour through: a merged-interval center (slab
/// fields, one coordinate) or a ball center (column fields, d−1
/// coordinates). `tol` is the offset above which a warning is attached.
#[derive(Clone, Debug)]
pub struct ChannelSpec {
    pub center: Vec<f64>,
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub struct StaircaseResult {
    pub polyline: Vec<Vec<f64>>,
    /// Quadrature length of the polyline under `θ_ε`.
    pub length_eps: f64,
    /// Certified mollification-limit bound on d_g(src, dst).
    pub limit_bound: f64,
    pub offset: f64,
    pub warning: Option<String>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Builds the 4-segment detour polyline through the given channel and
/// evaluates it at mollification width `eps`. When the branch condition
/// fails (the channel direction is not dominant) the straight segment with
/// the conformal cap `√2|u|` is returned instead.
pub fn staircase_upper_path(
    field: &MetricField,
    eps: f64,
    src: &[f64],
    dst: &[f64],
    channel: &ChannelSpec,
) -> Result<StaircaseResult> {
    let dim = field.dim();
    if src.len() != dim || dst.len() != dim {
        return Err(Error::Parameter("endpoint dimension mismatch".into()));
    }
    let u: Vec<f64> = (0..dim).map(|i| dst[i] - src[i]).collect();

    // Offset vector from src to the channel, zero along the ride axes; ride
    // component of u; branch test; α law; channel interior check.
    let (offset_vec, ride, cross_norm, applies, alpha, channel_ok): (
        Vec<f64>,
        Vec<f64>,
        f64,
        bool,
        f64,
        bool,
    ) = match field {
        MetricField::Ex1 { theta, .. } | MetricField::Ex2 { theta, .. } => {
            if channel.center.len() != 1 {
                return Err(Error::Parameter("slab channels have one coordinate".into()));
            }
            let q = channel.center[0];
            let mut off = vec![0.0; dim];
            off[0] = q - src[0];
            let mut ride = u.clone();
            ride[0] = 0.0;
            let free = norm(&ride);
            let cross = u[0].abs();
            let inside = theta.eval(q) == 1.0;
            let cube_ok = match field {
                MetricField::Ex2 { .. } => {
                    // The ride must stay inside the unit cube where the
                    // channel exists.
                    let mut ok = 0.0 < q && q < 1.0;
                    for i in 1..dim {
                        let (a, b) = (src[i].min(dst[i]), src[i].max(dst[i]));
                        ok &= 0.0 < a && b < 1.0;
                    }
                    ok
                }
                _ => true,
            };
            (off, ride, cross, cross <= free && free > 0.0, alpha_ex1(&u), inside && cube_ok)
        }
        MetricField::Ex3 { hierarchy } => {
            let g = hierarchy.grid_dim();
            if channel.center.len() != g {
                return Err(Error::Parameter(format!(
                    "column channels have {g} coordinates"
                )));
            }
            let mut off = vec![0.0; dim];
            for i in 0..g {
                off[i] = channel.center[i] - src[i];
            }
            let mut ride = vec![0.0; dim];
            ride[dim - 1] = u[dim - 1];
            let along = u[dim - 1].abs();
            let cross = norm(&u[..dim - 1]);
            // The center must be an actual ball center so θ = 1 on the column.
            let on_axis = hierarchy.theta3_eval(&channel.center) == 1.0;
            (off, ride, cross, along >= cross && along > 0.0, alpha_ex3(&u), on_axis)
        }
        MetricField::Constant { .. } => {
            return Err(Error::Parameter("constant fields have no channels".into()))
        }
    };

    let metric = MollifiedMetric::new(field, eps)?;
    let offset = norm(&offset_vec);
    let mut warning = None;

    if !applies || !channel_ok {
        let polyline = vec![src.to_vec(), dst.to_vec()];
        let length_eps = segment_weight(&metric, src, dst);
        if !channel_ok {
            warning = Some("channel center is not inside a fast channel".into());
        }
        return Ok(StaircaseResult {
            polyline,
            length_eps,
            limit_bound: SQRT_2 * norm(&u),
            offset,
            warning,
        });
    }

    if offset > channel.tol {
        warning = Some(format!(
            "channel offset {offset:.3e} exceeds the requested tolerance {:.3e}",
            channel.tol
        ));
    }

    // b rescales the ride so the closing diagonal hits dst exactly.
    let ride_norm = norm(&ride);
    let b = cross_norm / ride_norm;
    let mut pts = Vec::with_capacity(5);
    pts.push(src.to_vec());
    let p1: Vec<f64> = (0..dim).map(|i| src[i] + offset_vec[i]).collect();
    let p2: Vec<f64> = (0..dim).map(|i| p1[i] + (1.0 - b) * ride[i]).collect();
    let p3: Vec<f64> = (0..dim).map(|i| p2[i] - offset_vec[i]).collect();
    pts.push(p1);
    pts.push(p2);
    pts.push(p3);
    pts.push(dst.to_vec());
    pts.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| x == y));

    let mut length_eps = 0.0;
    for pair in pts.windows(2) {
        length_eps += segment_weight(&metric, &pair[0], &pair[1]);
    }
    Ok(StaircaseResult {
        polyline: pts,
        length_eps,
        limit_bound: alpha + 2.0 * SQRT_2 * offset,
        offset,
        warning,
    })
}
