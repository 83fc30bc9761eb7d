//! Cheeger energies `½ ∫ wug² · θ^{d/2} dL^d` over labeled regions, the
//! parallelogram deficit of a function quadruple, and the verdict it
//! supports.
//!
//! The channel-field energies are exact rationals on their labeled sets.
//! The hierarchy-field energies are exact panel tensors on the conformal
//! regions plus adaptive quadrature on the collars, with the unresolved
//! ball tail carried as an explicit error term. Smooth gradients on
//! constant fields go through plain tensor quadrature; keeping those nodes
//! identical across a quadruple makes linear combinations cancel to
//! rounding, which is what the deficit invariants rely on.

use num::{BigRational, One, Zero};

use crate::calculus::TestFunction;
use crate::cheeger::ex3::{
    axis_pieces, ball_data, ball_profile_integral, collar_energy_single, rat_pow,
    shell_band_tensor,
};
use crate::cheeger::region::{
    box_axes, channel_split, cube_axes, scale_by_exact, weight_two, Measured, Region,
};
use crate::error::{Error, Result};
use crate::exact;
use crate::fields::hierarchy::unit_ball_volume;
use crate::fields::{MetricField, SobolevHierarchy, ThetaField1D};
use crate::quad::gauss_legendre;

/// How to evaluate the weak upper gradient inside an energy integral.
pub enum WugEvaluator<'a> {
    /// Piecewise-constant minimal wug table of the cube-cutoff pair
    /// functions, index `i ∈ 1..=4`. Field must be the cube-localized
    /// channel construction.
    Ex2Table { i: u8 },
    /// Minimal wug of the column function `f_{i,n}` over the ball
    /// hierarchy.
    Ex3Column { i: u8, n: u32 },
    /// `|∇f|/√θ` from an explicit gradient; smooth test functions on
    /// constant fields only.
    Gradient { grad: &'a dyn Fn(&[f64]) -> Vec<f64> },
    /// The zero function.
    Zero,
}

/// An energy value together with the decomposition it was computed over.
#[derive(Clone, Debug)]
pub struct Energy {
    pub measured: Measured,
    pub decomposition: String,
}

/// Energy over a single region.
pub fn cheeger_energy(
    field: &MetricField,
    wug: &WugEvaluator,
    region: &Region,
) -> Result<Energy> {
    let measured = match (wug, field) {
        (WugEvaluator::Zero, _) => Measured::zero(),
        (WugEvaluator::Gradient { grad }, MetricField::Constant { d, c }) => {
            gradient_energy_constant(*d, *c, grad, region)?
        }
        (WugEvaluator::Gradient { .. }, _) => {
            return Err(Error::Parameter(
                "gradient energies are for constant fields; rough fields go through their wug tables"
                    .into(),
            ))
        }
        (WugEvaluator::Ex2Table { i }, MetricField::Ex2 { d, theta }) => {
            ex2_energy(theta, *d, *i, region)?
        }
        (WugEvaluator::Ex3Column { i, n }, MetricField::Ex3 { hierarchy }) => {
            ex3_energy(hierarchy, *i, *n, region)?
        }
        _ => {
            return Err(Error::Parameter(
                "wug evaluator does not match the field construction".into(),
            ))
        }
    };
    Ok(Energy {
        measured,
        decomposition: region.label(),
    })
}

/// Energy summed over a region decomposition; the labels join into one
/// decomposition tag so quadruples can be checked for consistency.
pub fn energy_over(
    field: &MetricField,
    wug: &WugEvaluator,
    regions: &[Region],
) -> Result<Energy> {
    if regions.is_empty() {
        return Err(Error::Parameter("empty region decomposition".into()));
    }
    let mut total = Measured::zero();
    let mut tags = Vec::with_capacity(regions.len());
    for r in regions {
        let e = cheeger_energy(field, wug, r)?;
        total = total.add(&e.measured);
        tags.push(e.decomposition);
    }
    Ok(Energy {
        measured: total,
        decomposition: tags.join(" + "),
    })
}

/// `Ch(f₃) + Ch(f₄) - 2Ch(f₁) - 2Ch(f₂)`, combined exactly from the
/// stored energies. The four energies must cover identical decompositions;
/// a mismatch is an internal error, not a value.
pub fn parallelogram_deficit(energies: &[Energy; 4]) -> Result<Measured> {
    let tag = &energies[0].decomposition;
    if energies.iter().any(|e| &e.decomposition != tag) {
        return Err(Error::Diagnostic(format!(
            "deficit over mismatched decompositions: {:?}",
            energies
                .iter()
                .map(|e| e.decomposition.as_str())
                .collect::<Vec<_>>()
        )));
    }
    Ok(energies[2]
        .measured
        .add(&energies[3].measured)
        .add(&energies[0].measured.scale_int(-2))
        .add(&energies[1].measured.scale_int(-2)))
}

/// What a measured deficit supports. A deficit buried in tolerance plus
/// quadrature error is merely consistent with a quadratic energy; this
/// laboratory never claims Hilbertianity.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    NonHilbertian { margin: f64 },
    Consistent,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::NonHilbertian { .. } => "NON_HILBERTIAN",
            Verdict::Consistent => "CONSISTENT",
        }
    }
}

/// Margin rule: the deficit magnitude must clear the stated tolerance plus
/// every propagated error bound before the verdict flips.
pub fn hilbertian_verdict(deficit: &Measured, tolerance: f64) -> Verdict {
    let margin = deficit.value.abs() - tolerance - deficit.error;
    if margin > 0.0 {
        Verdict::NonHilbertian { margin }
    } else {
        Verdict::Consistent
    }
}

/// Tensor GL quadrature of `½ c^{d/2-1} |∇f|²` over a box, with a
/// half-order pass as the error estimate. Nodes depend only on the box,
/// never on the integrand.
fn gradient_energy_constant(
    d: usize,
    c: f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    region: &Region,
) -> Result<Measured> {
    let (lo, hi) = match region {
        Region::Box { lo, hi } => (lo.clone(), hi.clone()),
        Region::Cube => cube_axes(d),
        _ => {
            return Err(Error::Parameter(
                "gradient energies integrate over boxes".into(),
            ))
        }
    };
    box_axes(&lo, &hi, d)?;
    if d > 3 {
        return Err(Error::Parameter(
            "gradient energies are implemented up to dimension 3".into(),
        ));
    }
    let weight = 0.5 * c.powf(d as f64 / 2.0 - 1.0);
    let sq = |x: &[f64]| -> f64 { grad(x).iter().map(|v| v * v).sum() };
    let fine = gl_box(&sq, &lo, &hi, 24);
    let coarse = gl_box(&sq, &lo, &hi, 12);
    Ok(Measured::approx(
        weight * fine,
        weight * (fine - coarse).abs() + 1e-15,
    ))
}

fn gl_box<F: Fn(&[f64]) -> f64>(f: &F, lo: &[f64], hi: &[f64], n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let d = lo.len();
    let mut x = vec![0.0; d];
    let mut jac = 1.0;
    for j in 0..d {
        jac *= 0.5 * (hi[j] - lo[j]);
    }
    fn rec<F: Fn(&[f64]) -> f64>(
        f: &F,
        lo: &[f64],
        hi: &[f64],
        nodes: &[f64],
        weights: &[f64],
        x: &mut Vec<f64>,
        axis: usize,
    ) -> f64 {
        if axis == lo.len() {
            return f(x);
        }
        let c = 0.5 * (lo[axis] + hi[axis]);
        let h = 0.5 * (hi[axis] - lo[axis]);
        let mut acc = 0.0;
        for (t, w) in nodes.iter().zip(weights) {
            x[axis] = c + h * t;
            acc += w * rec(f, lo, hi, nodes, weights, x, axis + 1);
        }
        acc
    }
    jac * rec(f, lo, hi, &nodes, &weights, &mut x, 0)
}

fn check_index(i: u8) -> Result<usize> {
    if !(1..=4).contains(&i) {
        return Err(Error::Parameter(format!("function index {i} outside 1..=4")));
    }
    Ok((i - 1) as usize)
}

/// Squared wug table of the cube-cutoff functions on the three labeled
/// regions of their support.
fn ex2_rows(idx: usize) -> (BigRational, BigRational, BigRational) {
    let channel = [1, 1, 2, 2][idx];
    (
        exact::int(channel),
        [exact::ratio(1, 2), exact::int(1), exact::int(1), exact::int(1)][idx].clone(),
        [
            exact::ratio(1, 2),
            exact::ratio(1, 2),
            exact::int(1),
            exact::int(1),
        ][idx]
            .clone(),
    )
}

fn ex2_energy(theta: &ThetaField1D, d: usize, i: u8, region: &Region) -> Result<Measured> {
    let idx = check_index(i)?;
    let (g2_channel, g2_bad, g2_shell) = ex2_rows(idx);
    let half = exact::ratio(1, 2);
    let w2 = weight_two(d);
    let (m, unit) = channel_split(theta, &BigRational::zero(), &BigRational::one());
    match region {
        Region::OSlab => Ok(Measured::from_exact(&half * &g2_channel * &m)),
        Region::BadSet => Ok(scale_by_exact(&w2, &(&half * &g2_bad * (unit - &m)))),
        Region::WindowShell => {
            let cells = rat_pow(&exact::int(3), d) - BigRational::one();
            Ok(scale_by_exact(&w2, &(&half * &g2_shell * cells)))
        }
        Region::Cube => {
            let o = ex2_energy(theta, d, i, &Region::OSlab)?;
            let b = ex2_energy(theta, d, i, &Region::BadSet)?;
            Ok(o.add(&b))
        }
        Region::Box { lo, hi } => {
            if lo.iter().any(|v| *v < -1.0) || hi.iter().any(|v| *v > 2.0) {
                return Err(Error::Parameter(
                    "the wug table only covers the window (-1,2)^d".into(),
                ));
            }
            let axes = box_axes(lo, hi, d)?;
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
            let (m_in, len_in) = channel_split(theta, &clipped[0].0, &clipped[0].1);
            let mut full = BigRational::one();
            let mut inner = BigRational::one();
            for ((a, b), (ca, cb)) in axes.iter().zip(&clipped) {
                full *= b - a;
                inner *= cb - ca;
            }
            let channel_part = &half * &g2_channel * &m_in * &inner_cross;
            let bad_part = &half * &g2_bad * (len_in - &m_in) * &inner_cross;
            let shell_part = &half * &g2_shell * (full - inner);
            Ok(Measured::from_exact(channel_part)
                .add(&scale_by_exact(&w2, &bad_part))
                .add(&scale_by_exact(&w2, &shell_part)))
        }
        _ => Err(Error::Parameter(format!(
            "region {} does not belong to the cube-localized field",
            region.label()
        ))),
    }
}

fn require_band_inside(lo: f64, hi: f64, n: u32) -> Result<f64> {
    let nf = n as f64;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && -nf <= lo && hi <= nf) {
        return Err(Error::Parameter(format!(
            "band ({lo}, {hi}) must sit inside the cutoff plateau [-{n}, {n}]"
        )));
    }
    Ok(hi - lo)
}

fn ex3_energy(h: &SobolevHierarchy, i: u8, n: u32, region: &Region) -> Result<Measured> {
    let idx = check_index(i)?;
    if n == 0 {
        return Err(Error::Parameter("cutoff index n must be at least 1".into()));
    }
    if h.grid_dim() != 2 {
        return Err(Error::Parameter(
            "column energies need a planar transverse grid (d = 3)".into(),
        ));
    }
    let d = h.d;
    let w2 = 2f64.powf(d as f64 / 2.0);
    let vg = unit_ball_volume(2);
    // Squared table value on the saturated set and squared flat gradient
    // on the continuous columns.
    let g2 = [0.5, 1.0, 1.0, 1.0][idx];
    let c_grad = [1.0, 1.0, 2.0, 2.0][idx];
    match region {
        Region::SSlab { lo, hi } => {
            let len = require_band_inside(*lo, *hi, n)?;
            let ball = ball_data(h);
            let q = exact::to_f64(&ball.q_sum);
            let q_tail = exact::to_f64(&ball.q_tail);
            Ok(Measured::approx(
                0.5 * g2 * w2 * (1.0 - vg * q) * len,
                0.5 * g2 * w2 * vg * q_tail * len,
            ))
        }
        Region::BallColumns { lo, hi } => {
            let len = require_band_inside(*lo, *hi, n)?;
            let ball = ball_data(h);
            let q = exact::to_f64(&ball.q_sum);
            let q_tail = exact::to_f64(&ball.q_tail);
            let (profile, profile_err) = ball_profile_integral(2, (d as f64 - 2.0) / 2.0);
            // Tail columns are unresolved; bound them by the flat gradient
            // times the largest factor power they could see.
            let tail_fac = 2f64.powf((d as f64 - 2.0) / 2.0);
            Ok(Measured::approx(
                0.5 * c_grad * profile * q * len,
                0.5 * c_grad * (profile_err * q + tail_fac * vg * q_tail) * len,
            ))
        }
        Region::TransverseShell { lo, hi } => {
            require_band_inside(*lo, *hi, n)?;
            let f = TestFunction::column(i, n, 3)?;
            let mut acc = 0.0;
            for (a, b) in axis_pieces(*lo, *hi) {
                acc += shell_band_tensor(&f, a, b);
            }
            Ok(Measured::approx(acc, 1e-13 * acc.abs() + 1e-15))
        }
        Region::CutoffCollar { n: band } => {
            if *band != n {
                return Err(Error::Parameter(format!(
                    "collar band {band} does not match the function window {n}"
                )));
            }
            let (val, err) = collar_energy_single(h, i)?;
            Ok(Measured::approx(val, err))
        }
        _ => Err(Error::Parameter(format!(
            "region {} does not belong to the hierarchy field",
            region.label()
        ))),
    }
}

/// The standard support decomposition of the column function `f_{i,n}`:
/// saturated slab, ball columns, transverse shell, and the two collars.
pub fn ex3_decomposition(n: u32) -> Vec<Region> {
    let nf = n as f64;
    vec![
        Region::SSlab { lo: -nf, hi: nf },
        Region::BallColumns { lo: -nf, hi: nf },
        Region::TransverseShell { lo: -nf, hi: nf },
        Region::CutoffCollar { n },
    ]
}

/// The standard support decomposition of the cube-cutoff functions inside
/// their window: channel slab, bad set, window shell. Outside the window
/// the factor is flat and the quadruple combination cancels pointwise, so
/// the deficit never sees it.
pub fn ex2_decomposition() -> Vec<Region> {
    vec![Region::OSlab, Region::BadSet, Region::WindowShell]
}
