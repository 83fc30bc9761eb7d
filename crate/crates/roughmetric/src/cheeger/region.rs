//! Labeled integration regions and θ-weighted volumes.
//!
//! Regions name subsets of `ℝ^d` relative to a metric field: plain boxes,
//! the unit cube, and the labeled sets on which the channel and hierarchy
//! fields are piecewise understood. Labeled sets decompose their ambient
//! domain disjointly up to null sets, which is what lets energies and
//! volumes over them stay exact.

use num::{BigRational, One, Zero};

use crate::cheeger::ex3::{ball_data, ball_profile_integral, rat_pow};
use crate::error::{Error, Result};
use crate::exact;
use crate::fields::hierarchy::unit_ball_volume;
use crate::fields::{MetricField, SobolevHierarchy, ThetaField1D};

/// A quantity computed by the laboratory: a float value, the exact
/// rational when the computation never left rational arithmetic, and a
/// rigorous error bound on the float. Exact results carry a zero bound.
#[derive(Clone, Debug)]
pub struct Measured {
    pub value: f64,
    pub exact: Option<BigRational>,
    pub error: f64,
}

impl Measured {
    pub fn from_exact(r: BigRational) -> Self {
        Measured {
            value: exact::to_f64(&r),
            exact: Some(r),
            error: 0.0,
        }
    }

    pub fn approx(value: f64, error: f64) -> Self {
        Measured {
            value,
            exact: None,
            error,
        }
    }

    pub fn zero() -> Self {
        Measured::from_exact(BigRational::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Sum; exactness survives only when both sides are exact.
    pub fn add(&self, other: &Measured) -> Measured {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Measured::from_exact(a + b),
            _ => Measured::approx(self.value + other.value, self.error + other.error),
        }
    }

    /// Integer scaling, exactness preserved.
    pub fn scale_int(&self, k: i64) -> Measured {
        match &self.exact {
            Some(a) => Measured::from_exact(a * exact::int(k)),
            None => Measured::approx(self.value * k as f64, self.error * k.unsigned_abs() as f64),
        }
    }

    /// Rational scaling, exactness preserved.
    pub fn scale_ratio(&self, p: i64, q: i64) -> Measured {
        let r = exact::ratio(p, q);
        match &self.exact {
            Some(a) => Measured::from_exact(a * &r),
            None => {
                let rf = exact::to_f64(&r);
                Measured::approx(self.value * rf, self.error * rf.abs())
            }
        }
    }
}

/// An integration region relative to a metric field.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// Axis-aligned box `Π (lo_j, hi_j)`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// The unit cube `(0,1)^d`.
    Cube,
    /// Channel fields: `(O ∩ (0,1)) × (0,1)^{d-1}`, where θ = 1.
    OSlab,
    /// Channel fields: the complement of the channel slab in the unit
    /// cube, where θ = 2.
    BadSet,
    /// Cube-localized field: `(-1,2)^d ∖ [0,1]^d`, inside the cutoff
    /// plateau but outside the cube, θ = 2.
    WindowShell,
    /// Hierarchy field: `S × (lo, hi)` with `S` the unit square minus
    /// every ball, θ = 2.
    SSlab { lo: f64, hi: f64 },
    /// Hierarchy field: the ball columns `(∪ balls) × (lo, hi)`.
    BallColumns { lo: f64, hi: f64 },
    /// Hierarchy field: `((-3,3)^{d-1} ∖ [0,1]^{d-1}) × (lo, hi)`, the
    /// transverse reach of the cutoff pair, θ = 2.
    TransverseShell { lo: f64, hi: f64 },
    /// Hierarchy field: both bands `(-3,3)^{d-1} × {n < |x_d| < n+1}`
    /// where the axis cutoff ramps down.
    CutoffCollar { n: u32 },
}

impl Region {
    /// Stable tag used to match decompositions across energies.
    pub fn label(&self) -> String {
        match self {
            Region::Box { lo, hi } => {
                let fmt = |v: &[f64]| {
                    v.iter()
                        .map(|x| format!("{x}"))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                format!("box[{};{}]", fmt(lo), fmt(hi))
            }
            Region::Cube => "cube".into(),
            Region::OSlab => "o-slab".into(),
            Region::BadSet => "bad-set".into(),
            Region::WindowShell => "window-shell".into(),
            Region::SSlab { lo, hi } => format!("s-slab({lo},{hi})"),
            Region::BallColumns { lo, hi } => format!("ball-columns({lo},{hi})"),
            Region::TransverseShell { lo, hi } => format!("transverse-shell({lo},{hi})"),
            Region::CutoffCollar { n } => format!("cutoff-collar({n})"),
        }
    }

    /// Whether [`volume`] over this region stays in exact rationals for
    /// the given field. The conformal weight `θ^{d/2}` is rational only in
    /// even dimension (or at unit factor), and the hierarchy ball masses
    /// involve the area of a disc, so those volumes are always floats.
    pub fn exact_volume(&self, field: &MetricField) -> bool {
        match (field, self) {
            (MetricField::Constant { d, c }, Region::Box { .. } | Region::Cube) => {
                d % 2 == 0 || *c == 1.0
            }
            (MetricField::Ex1 { .. } | MetricField::Ex2 { .. }, Region::OSlab) => true,
            (MetricField::Ex1 { d, .. }, Region::Box { .. } | Region::Cube | Region::BadSet) => {
                d % 2 == 0
            }
            (
                MetricField::Ex2 { d, .. },
                Region::Box { .. } | Region::Cube | Region::BadSet | Region::WindowShell,
            ) => d % 2 == 0,
            _ => false,
        }
    }
}

pub(crate) fn box_axes(lo: &[f64], hi: &[f64], d: usize) -> Result<Vec<(BigRational, BigRational)>> {
    if lo.len() != d || hi.len() != d {
        return Err(Error::Parameter(format!(
            "box dimension {} does not match the field dimension {d}",
            lo.len()
        )));
    }
    let mut axes = Vec::with_capacity(d);
    for (a, b) in lo.iter().zip(hi) {
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::Parameter(format!("degenerate box axis [{a}, {b}]")));
        }
        axes.push((exact::from_f64(*a)?, exact::from_f64(*b)?));
    }
    Ok(axes)
}

/// `c^{d/2}` for a conformal factor given as an exact rational: exact in
/// even dimension or at `c = 1`, otherwise a float.
pub(crate) fn conformal_weight(c: &BigRational, d: usize) -> Measured {
    if c.is_one() {
        return Measured::from_exact(BigRational::one());
    }
    if d % 2 == 0 {
        return Measured::from_exact(rat_pow(c, d / 2));
    }
    let v = exact::to_f64(c).powf(d as f64 / 2.0);
    Measured::approx(v, 4.0 * f64::EPSILON * v)
}

pub(crate) fn weight_two(d: usize) -> Measured {
    conformal_weight(&exact::int(2), d)
}

/// `(length of O ∩ [a,b], total length)` for a channel field axis.
pub(crate) fn channel_split(
    theta: &ThetaField1D,
    a: &BigRational,
    b: &BigRational,
) -> (BigRational, BigRational) {
    (theta.cover.measure_within(a, b), b - a)
}

pub(crate) fn cube_axes(d: usize) -> (Vec<f64>, Vec<f64>) {
    (vec![0.0; d], vec![1.0; d])
}

/// `∫_region θ^{d/2} dL^d`: the metric volume of the region.
///
/// Exact rational for the channel fields on boxes and labeled sets in
/// even dimension; for the hierarchy field the value resolves the built
/// levels and the error bound carries both the unbuilt tail and the
/// quadrature of the radial ball profile.
pub fn volume(field: &MetricField, region: &Region) -> Result<Measured> {
    match field {
        MetricField::Constant { d, c } => {
            let (lo, hi) = match region {
                Region::Box { lo, hi } => (lo.clone(), hi.clone()),
                Region::Cube => cube_axes(*d),
                _ => {
                    return Err(Error::Parameter(format!(
                        "region {} needs a channel or hierarchy field",
                        region.label()
                    )))
                }
            };
            let axes = box_axes(&lo, &hi, *d)?;
            let mut leb = BigRational::one();
            for (a, b) in &axes {
                leb *= b - a;
            }
            let w = conformal_weight(&exact::from_f64(*c)?, *d);
            Ok(scale_by_exact(&w, &leb))
        }
        MetricField::Ex1 { d, theta } => volume_channel(theta, *d, region, false),
        MetricField::Ex2 { d, theta } => volume_channel(theta, *d, region, true),
        MetricField::Ex3 { hierarchy } => volume_hierarchy(hierarchy, region),
    }
}

pub(crate) fn scale_by_exact(m: &Measured, r: &BigRational) -> Measured {
    match &m.exact {
        Some(a) => Measured::from_exact(a * r),
        None => {
            let rf = exact::to_f64(r);
            Measured::approx(m.value * rf, m.error * rf.abs())
        }
    }
}

/// Shared channel-field volume: EX1 continues the channels over the whole
/// line, the cube-localized variant pins θ = 2 outside the unit cube.
fn volume_channel(
    theta: &ThetaField1D,
    d: usize,
    region: &Region,
    cube_localized: bool,
) -> Result<Measured> {
    let w2 = weight_two(d);
    match region {
        Region::OSlab => {
            let (m, _) = channel_split(theta, &BigRational::zero(), &BigRational::one());
            Ok(Measured::from_exact(m))
        }
        Region::BadSet => {
            let (m, len) = channel_split(theta, &BigRational::zero(), &BigRational::one());
            Ok(scale_by_exact(&w2, &(len - m)))
        }
        Region::WindowShell => {
            if !cube_localized {
                return Err(Error::Parameter(
                    "the window shell is tied to the cube-localized field".into(),
                ));
            }
            let cells = rat_pow(&exact::int(3), d) - BigRational::one();
            Ok(scale_by_exact(&w2, &cells))
        }
        Region::Cube => {
            let (lo, hi) = cube_axes(d);
            volume_channel(theta, d, &Region::Box { lo, hi }, cube_localized)
        }
        Region::Box { lo, hi } => {
            let axes = box_axes(lo, hi, d)?;
            let mut cross = BigRational::one();
            for (a, b) in &axes[1..] {
                cross *= b - a;
            }
            if !cube_localized {
                let (m, len) = channel_split(theta, &axes[0].0, &axes[0].1);
                let channel_part = &m * &cross;
                let rest = (len - m) * &cross;
                return Ok(Measured::from_exact(channel_part).add(&scale_by_exact(&w2, &rest)));
            }
            // Inside the cube the channels run; outside the factor is
            // identically 2. Clip each axis to [0,1] and split.
            let mut clipped = Vec::with_capacity(d);
            for (a, b) in &axes {
                let ca = a.clone().max(BigRational::zero());
                let cb = b.clone().min(BigRational::one());
                clipped.push(if ca < cb {
                    (ca, cb)
                } else {
                    (BigRational::zero(), BigRational::zero())
                });
            }
            let mut inner_cross = BigRational::one();
            for (a, b) in &clipped[1..] {
                inner_cross *= b - a;
            }
            let (m, inner_len) = channel_split(theta, &clipped[0].0, &clipped[0].1);
            let mut full = BigRational::one();
            let mut inner = BigRational::one();
            for ((a, b), (ca, cb)) in axes.iter().zip(&clipped) {
                full *= b - a;
                inner *= cb - ca;
            }
            let channel_part = &m * &inner_cross;
            let bad_part = (inner_len - m) * &inner_cross;
            let outside = full - inner;
            Ok(Measured::from_exact(channel_part)
                .add(&scale_by_exact(&w2, &bad_part))
                .add(&scale_by_exact(&w2, &outside)))
        }
        _ => Err(Error::Parameter(format!(
            "region {} needs the hierarchy field",
            region.label()
        ))),
    }
}

fn band_len(lo: f64, hi: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Parameter(format!("degenerate band ({lo}, {hi})")));
    }
    Ok(hi - lo)
}

fn volume_hierarchy(h: &SobolevHierarchy, region: &Region) -> Result<Measured> {
    let d = h.d;
    let g = h.grid_dim();
    let w2 = 2f64.powf(d as f64 / 2.0);
    let ball = ball_data(h);
    let vg = unit_ball_volume(g);
    let (profile, profile_err) = ball_profile_integral(g, d as f64 / 2.0);
    let q = exact::to_f64(&ball.q_sum);
    let q_tail = exact::to_f64(&ball.q_tail);

    // Per unit height: the saturated set, the built ball columns, and the
    // transverse shell. Tail balls are unresolved: they overcount the
    // saturated part and undercount the columns, both within w2·V_g·tail.
    let s_unit = w2 * (1.0 - vg * q);
    let s_unit_err = w2 * vg * q_tail;
    let balls_unit = profile * q;
    let balls_unit_err = profile_err * q + w2 * vg * q_tail;
    let shell_unit = w2 * (6f64.powi(g as i32) - 1.0);

    match region {
        Region::SSlab { lo, hi } => {
            let len = band_len(*lo, *hi)?;
            Ok(Measured::approx(s_unit * len, s_unit_err * len))
        }
        Region::BallColumns { lo, hi } => {
            let len = band_len(*lo, *hi)?;
            Ok(Measured::approx(balls_unit * len, balls_unit_err * len))
        }
        Region::TransverseShell { lo, hi } => {
            let len = band_len(*lo, *hi)?;
            Ok(Measured::approx(
                shell_unit * len,
                16.0 * f64::EPSILON * shell_unit * len,
            ))
        }
        Region::CutoffCollar { n } => {
            if *n == 0 {
                return Err(Error::Parameter("collar index n must be at least 1".into()));
            }
            let one_side = s_unit + balls_unit + shell_unit;
            let err = s_unit_err + balls_unit_err + 16.0 * f64::EPSILON * shell_unit;
            Ok(Measured::approx(2.0 * one_side, 2.0 * err))
        }
        Region::Cube => {
            let s = volume_hierarchy(h, &Region::SSlab { lo: 0.0, hi: 1.0 })?;
            let b = volume_hierarchy(h, &Region::BallColumns { lo: 0.0, hi: 1.0 })?;
            Ok(s.add(&b))
        }
        Region::Box { lo, hi } => volume_hierarchy_box(h, lo, hi),
        _ => Err(Error::Parameter(format!(
            "region {} needs a channel field",
            region.label()
        ))),
    }
}

/// Box volume under the hierarchy field: starts from `2^{d/2}·|box|` and
/// corrects for every built ball whose column lies inside the transverse
/// footprint. Balls cut by the footprint boundary are not resolved; their
/// full mass goes into the error bound, as does the unbuilt tail.
fn volume_hierarchy_box(h: &SobolevHierarchy, lo: &[f64], hi: &[f64]) -> Result<Measured> {
    let d = h.d;
    let g = h.grid_dim();
    box_axes(lo, hi, d)?;
    let w2 = 2f64.powf(d as f64 / 2.0);
    let vg = unit_ball_volume(g);
    let (profile, profile_err) = ball_profile_integral(g, d as f64 / 2.0);
    let height = hi[d - 1] - lo[d - 1];
    let mut leb = 1.0;
    for j in 0..d {
        leb *= hi[j] - lo[j];
    }

    let mut value = w2 * leb;
    let mut error = 0.0;
    for (level, lvl) in h.levels.iter().enumerate() {
        let scale = (1u64 << lvl.scale_log2) as f64;
        let r = lvl.r_f64;
        let rg = r.powi(g as i32);
        // Enumerate the grid keys whose centers can touch the footprint.
        let mut ranges = Vec::with_capacity(g);
        for j in 0..g {
            let a = ((lo[j] - r) * scale).ceil() as i64;
            let b = ((hi[j] + r) * scale).floor() as i64;
            ranges.push((a.max(1), b.min((scale as i64) - 1)));
        }
        if ranges.iter().any(|(a, b)| a > b) {
            continue;
        }
        let mut key = [0i64; 4];
        let mut stack = vec![(0usize, ranges[0].0)];
        // Depth-first product over the g key ranges.
        while let Some((axis, k)) = stack.pop() {
            if k > ranges[axis].1 {
                continue;
            }
            stack.push((axis, k + 1));
            key[axis] = k;
            if axis + 1 < g {
                stack.push((axis + 1, ranges[axis + 1].0));
                continue;
            }
            if !lvl.lookup.contains(&key) {
                continue;
            }
            let c = h.center_f64(level, &key);
            let inside = (0..g).all(|j| c[j] - r >= lo[j] && c[j] + r <= hi[j]);
            let outside = (0..g).any(|j| c[j] + r <= lo[j] || c[j] - r >= hi[j]);
            if inside {
                // Swap the flat weight for the profile over the ball.
                value += (profile - w2 * vg) * rg * height;
                error += profile_err * rg * height;
            } else if !outside {
                error += w2 * vg * rg * height;
            }
        }
    }
    error += w2 * vg * exact::to_f64(&ball_data(h).q_tail) * height;
    Ok(Measured::approx(value, error))
}
