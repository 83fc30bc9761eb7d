//! Minimal weak upper gradients, their dual norms, and plan-sampled
//! checks of the weak-upper-gradient inequality.
//!
//! The limit geometry of each field family has an anisotropic direction
//! law α; the minimal weak upper gradient of a test function on the
//! channel-saturated set is the dual norm β of its Euclidean gradient,
//! `β(v) = sup_{u≠0} ⟨u, v⟩/α(u)`, while continuous regions keep the
//! conformal value `|∇f|/√θ`. Classification is exact; points on the
//! region boundaries surface errors instead of silently picking a side.

use num::rational::BigRational;
use num::{One, Zero};

use crate::distance::{alpha_ex1, alpha_ex3, certified_bracket};
use crate::fields::{MetricField, SobolevHierarchy, ThetaField1D};
use crate::{Error, Result};

use super::functions::TestFunction;
use super::plan::{PlanKind, TestPlan};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Dual norm of the slab direction law: `β(v) = max(|v′|, |v|/√2)` with
/// `v′ = (v_2, …, v_d)`. On the channel system `β(∇f)` is the minimal
/// weak upper gradient of `f`.
pub fn beta_ex1(v: &[f64]) -> f64 {
    let free = norm(&v[1..]);
    free.max(norm(v) * FRAC_1_SQRT_2)
}

/// Dual norm of the column direction law: `β(v) = max(|v_d|, |v|/√2)`.
pub fn beta_ex3(v: &[f64]) -> f64 {
    let along = v[v.len() - 1].abs();
    along.max(norm(v) * FRAC_1_SQRT_2)
}

/// Exact region classification for the cube-cutoff family.
enum Ex2Region {
    Channel,
    Bad,
    Outside,
}

fn classify_ex2(theta: &ThetaField1D, x: &[BigRational]) -> Result<Ex2Region> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if x.iter().any(|c| c < &zero || c > &one) {
        return Ok(Ex2Region::Outside);
    }
    if x.iter().any(|c| c == &zero || c == &one) {
        return Err(Error::UndefinedPoint(
            "point lies on the unit-cube boundary, a null set the gradients skip".into(),
        ));
    }
    if theta.cover.contains_exact(&x[0]) {
        return Ok(Ex2Region::Channel);
    }
    if theta.cover.distance_to_cover(&x[0]).is_zero() {
        return Err(Error::UndefinedPoint(
            "first coordinate sits on a channel boundary, a null set".into(),
        ));
    }
    Ok(Ex2Region::Bad)
}

/// Minimal weak upper gradient of the cube-cutoff function `f̃_i` at an
/// exact point. Piecewise constant on three open regions:
/// channels × open cube `(1, 1, √2, √2)`, the rest of the open cube
/// `(1/√2, 1, 1, 1)`, the exterior of the closed cube
/// `(1/√2, 1/√2, 1, 1)`. Boundary points error out.
pub fn minimal_wug_ex2(
    theta: &ThetaField1D,
    d: usize,
    i: u8,
    x: &[BigRational],
) -> Result<f64> {
    if !(1..=4).contains(&i) {
        return Err(Error::Parameter(format!("function index {i} outside 1..=4")));
    }
    if x.len() != d || d < 2 {
        return Err(Error::Parameter("point dimension mismatch".into()));
    }
    let idx = (i - 1) as usize;
    Ok(match classify_ex2(theta, x)? {
        Ex2Region::Channel => [1.0, 1.0, SQRT_2, SQRT_2][idx],
        Ex2Region::Bad => [FRAC_1_SQRT_2, 1.0, 1.0, 1.0][idx],
        Ex2Region::Outside => [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 1.0, 1.0][idx],
    })
}

/// Minimal weak upper gradient of the column function `f_{i,n}` at a point
/// with exact transverse coordinates and a float axis coordinate.
///
/// The transverse classification decides the branch: certified points of
/// the saturated set take `β(∇f_{i,n})`, which reproduces the constants
/// `(1/√2, 1, 1, 1)` on the plateau `|x_d| < n` and the shifted cutoff
/// profile on the collars; continuous points (inside a ball support, in a
/// ball annulus where the full field stays at 2, or outside the open unit
/// square) take `|∇f_{i,n}|/√θ`; both give 0 outside the support. A
/// transverse point that is neither certified nor resolvable at the built
/// depth is an error.
pub fn minimal_wug_ex3(
    h: &SobolevHierarchy,
    i: u8,
    n: u32,
    x_prime: &[BigRational],
    x_d: f64,
) -> Result<f64> {
    if !(1..=4).contains(&i) {
        return Err(Error::Parameter(format!("function index {i} outside 1..=4")));
    }
    if n == 0 {
        return Err(Error::Parameter("cutoff index n must be at least 1".into()));
    }
    if x_prime.len() != h.grid_dim() {
        return Err(Error::Parameter("transverse dimension mismatch".into()));
    }
    let f = TestFunction::column(i, n, h.d)?;
    let mut x: Vec<f64> = x_prime.iter().map(crate::exact::to_f64).collect();
    x.push(x_d);
    let grad = f.gradient(&x);

    let zero = BigRational::zero();
    let one = BigRational::one();
    // Outside the open unit square the full field is identically 2: every
    // ball support stays strictly interior.
    if x_prime.iter().any(|c| c <= &zero || c >= &one) {
        return Ok(norm(&grad) * FRAC_1_SQRT_2);
    }
    let theta = h.theta3_eval(&x[..x.len() - 1]);
    if theta < 2.0 {
        // Inside a ball support: θ is the profile value, continuously.
        return Ok(norm(&grad) / theta.sqrt());
    }
    let cert = h.certify_in_s(x_prime)?;
    if cert.certified(h.levels.len()) {
        return Ok(beta_ex3(&grad));
    }
    if cert.in_s_up_to_level < h.levels.len() {
        // In the annulus of a built ball, past the profile support: deeper
        // levels keep a gap of almost two radii from shallower balls, so
        // the full field is 2 on a neighborhood.
        return Ok(norm(&grad) * FRAC_1_SQRT_2);
    }
    Err(Error::Unclassifiable(format!(
        "transverse point clears all {} built levels but carries no tail certificate",
        h.levels.len()
    )))
}

/// Which family a directional-ratio query addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioFamily {
    /// Channels are slabs over the first coordinate; functions x₁, x₂.
    Slab,
    /// Channels are columns along the last coordinate; functions x₁, |x_d|.
    Column,
}

/// `|∂_u f_i| / α(u)` for the family's direction law, on the saturated
/// set (cutoffs at plateau value, the kink of `|x_d|` read from the
/// positive side). Case bounds: slab ratios stay below `(1/√2, 1/√2, 1, 1)`
/// when the crossing component dominates and `(1/2, 1, 1, 1)` otherwise;
/// equality holds along `e₁, e₂, e₁+e₂, e₁−e₂` (axis and last axis for
/// the column family).
pub fn directional_ratio(i: u8, u: &[f64], family: RatioFamily) -> Result<f64> {
    if !(1..=4).contains(&i) {
        return Err(Error::Parameter(format!("function index {i} outside 1..=4")));
    }
    if u.len() < 2 || norm(u) == 0.0 {
        return Err(Error::Parameter("direction must be nonzero with d ≥ 2".into()));
    }
    let (cross, along, alpha) = match family {
        RatioFamily::Slab => (u[0], u[1], alpha_ex1(u)),
        RatioFamily::Column => (u[0], u[u.len() - 1], alpha_ex3(u)),
    };
    let deriv = match i {
        1 => cross,
        2 => along,
        3 => cross + along,
        _ => cross - along,
    };
    let ratio = deriv.abs() / alpha;
    if cfg!(debug_assertions) {
        let dominant = match family {
            RatioFamily::Slab => u[0].abs() >= norm(&u[1..]),
            RatioFamily::Column => u[u.len() - 1].abs() < norm(&u[..u.len() - 1]),
        };
        // Column case: the √2-branch is the one with a dominant crossing
        // block; bounds mirror the slab table with the axis roles swapped.
        let bound = match (family, dominant, i) {
            (RatioFamily::Slab, true, 1 | 2) => FRAC_1_SQRT_2,
            (RatioFamily::Slab, false, 1) => 0.5,
            (RatioFamily::Column, true, 1) => FRAC_1_SQRT_2,
            (RatioFamily::Column, false, 1) => 0.5,
            (RatioFamily::Column, true, 2) => FRAC_1_SQRT_2,
            _ => 1.0,
        };
        debug_assert!(ratio <= bound + 1e-12, "ratio {ratio} exceeds bound {bound}");
    }
    Ok(ratio)
}

/// Where the rhs integrand's speed factor comes from.
#[derive(Clone, Copy, Debug)]
pub enum SpeedSource {
    /// Closed-form limit law: α on the saturated set, the conformal rate
    /// on continuous regions. Free, exact, available where the plan's
    /// classification applies.
    Alpha,
    /// Certified difference-quotient upper edge at step `h`. Conservative
    /// for violation claims: it can only push the rhs up.
    Numeric { h: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WugVerdict {
    Holds,
    Violated,
    Inconclusive,
}

impl WugVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            WugVerdict::Holds => "HOLDS",
            WugVerdict::Violated => "VIOLATED",
            WugVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Outcome of a plan-sampled weak-upper-gradient check.
#[derive(Clone, Debug)]
pub struct WugCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub se_lhs: f64,
    pub se_rhs: f64,
    pub curves: usize,
    pub verdict: WugVerdict,
}

pub const WUG_CSV_HEADER: &str = "plan_id,f,G,lhs,rhs,se_lhs,se_rhs,verdict";

impl WugCheck {
    pub fn csv_row(&self, plan_id: &str, f_label: &str, g_label: &str) -> String {
        format!(
            "{plan_id},{f_label},{g_label},{:.12},{:.12},{:.3e},{:.3e},{}",
            self.lhs,
            self.rhs,
            self.se_lhs,
            self.se_rhs,
            self.verdict.as_str()
        )
    }
}

fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pointwise limit-law speed for slab fields. Channel interiors are
/// locally flat (θ = 1), everywhere else the direction law α applies; for
/// the cube-cutoff field the exterior of the open cube is plainly
/// conformal at θ = 2. Region boundaries take the exterior value; every
/// plan curve meets them in measure zero.
fn slab_speed(theta: &ThetaField1D, cube_bound: bool, x: &[f64], u: &[f64]) -> f64 {
    if cube_bound && x.iter().any(|&c| !(0.0 < c && c < 1.0)) {
        return SQRT_2 * norm(u);
    }
    if theta.eval(x[0]) == 1.0 {
        norm(u)
    } else {
        alpha_ex1(u)
    }
}

/// Monte-Carlo check of `∫ |f(γ_1) − f(γ_0)| dπ ≤ ∫∫ G(γ_t)·speed dt dπ`
/// over the plan's curves. The rhs uses a 1024-interval composite
/// trapezoid per curve. Verdict: `Holds` when the sampled lhs does not
/// exceed the rhs; `Violated` when the gap clears five combined standard
/// errors; `Inconclusive` in between.
pub fn check_weak_upper_gradient<F, G>(
    field: &MetricField,
    plan: &TestPlan,
    f: F,
    g: G,
    source: SpeedSource,
) -> Result<WugCheck>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    if plan.is_empty() {
        return Err(Error::Parameter("plan has no curves to check".into()));
    }
    match (field, plan.kind) {
        (MetricField::Ex1 { .. } | MetricField::Ex2 { .. }, PlanKind::SlabComplement) => {}
        (MetricField::Ex3 { .. }, PlanKind::CertifiedColumn) => {}
        _ => {
            return Err(Error::Parameter(
                "plan kind does not match the field variant".into(),
            ))
        }
    }
    if let SpeedSource::Numeric { h } = source {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Parameter("numeric speed step must be in (0, 1)".into()));
        }
    }

    const KNOTS: usize = 1024;
    let u = &plan.direction;
    let mut lhs_samples = Vec::with_capacity(plan.len());
    let mut rhs_samples = Vec::with_capacity(plan.len());
    for idx in 0..plan.len() {
        let curve = plan.curve(idx);
        let a = curve.point(0.0);
        let b = curve.point(1.0);
        lhs_samples.push((f(&b) - f(&a)).abs());

        let speed_at = |t: f64, pos: &[f64]| -> Result<f64> {
            match source {
                SpeedSource::Alpha => Ok(match field {
                    MetricField::Constant { c, .. } => c.sqrt() * norm(u),
                    MetricField::Ex1 { theta, .. } => slab_speed(theta, false, pos, u),
                    MetricField::Ex2 { theta, .. } => slab_speed(theta, true, pos, u),
                    // Column plans certify every base, and the transverse
                    // coordinates are constant along the curve.
                    MetricField::Ex3 { .. } => alpha_ex3(u),
                }),
                SpeedSource::Numeric { h } => {
                    let (s, e) = if t + h <= 1.0 { (t, t + h) } else { (t - h, t) };
                    let p = curve.point(s);
                    let q = curve.point(e);
                    let (_, hi, _) = certified_bracket(field, &p, &q)?;
                    Ok(hi / h)
                }
            }
        };

        let mut acc = 0.0;
        for k in 0..=KNOTS {
            let t = k as f64 / KNOTS as f64;
            let pos = curve.point(t);
            let w = if k == 0 || k == KNOTS { 0.5 } else { 1.0 };
            acc += w * g(&pos) * speed_at(t, &pos)?;
        }
        rhs_samples.push(acc / KNOTS as f64);
    }

    let (lhs, se_lhs) = mean_se(&lhs_samples);
    let (rhs, se_rhs) = mean_se(&rhs_samples);
    let sigma = (se_lhs * se_lhs + se_rhs * se_rhs).sqrt().max(1e-12);
    let verdict = if lhs <= rhs {
        WugVerdict::Holds
    } else if lhs - rhs > 5.0 * sigma {
        WugVerdict::Violated
    } else {
        WugVerdict::Inconclusive
    };
    Ok(WugCheck { lhs, rhs, se_lhs, se_rhs, curves: plan.len(), verdict })
}
