//! Mollified conformal factors `θ_ε = θ * ρ_ε` for the channel fields.
//!
//! The kernel is the tensor power of the normalized bump `(315/256)(1−t²)⁴`
//! on `[−1,1]`, which has a polynomial antiderivative. Convolutions against
//! indicator-type factors therefore reduce to exact CDF differences; only
//! the radial ball profiles need quadrature, and the ball-versus-kernel
//! scale ratio picks between panel quadrature and a point-mass form with an
//! explicit error bound.

use std::sync::OnceLock;

use crate::fields::hierarchy::{sphere_surface, BallRef, EtaProfile, SobolevHierarchy};
use crate::fields::{MetricField, ThetaField1D};
use crate::quad;
use crate::{Error, Result};

/// `(315/256)(1−t²)⁴` on `[−1,1]`, zero outside. Mass one.
pub fn kernel_pdf(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - t * t;
    315.0 / 256.0 * s * s * s * s
}

/// `∫_{-1}^{t} kernel_pdf`, closed form.
pub fn kernel_cdf(t: f64) -> f64 {
    if t <= -1.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let t2 = t * t;
    let poly = t * (1.0 + t2 * (-4.0 / 3.0 + t2 * (6.0 / 5.0 + t2 * (-4.0 / 7.0 + t2 / 9.0))));
    0.5 + 315.0 / 256.0 * poly
}

/// Kernel mass of the interval `[a, b]` for `ρ_ε(· − x)`.
fn window_mass(a: f64, b: f64, x: f64, eps: f64) -> f64 {
    kernel_cdf((b - x) / eps) - kernel_cdf((a - x) / eps)
}

/// Mollified line factor at `x`: `2 − Σ kernel mass of the merged cover
/// pieces`. Exact up to f64 rounding; tensor factors over the remaining
/// axes integrate to one, so this is also the d-dimensional value.
pub fn mollify_theta1(theta: &ThetaField1D, eps: f64, x: f64) -> f64 {
    assert!(eps > 0.0, "mollification width must be positive");
    let mut covered = 0.0;
    for &(lo, hi) in theta.cover.merged_f64_within(x - eps, x + eps) {
        covered += window_mass(lo, hi, x, eps);
    }
    2.0 - covered
}

/// Mollified cube factor at `x ∈ ℝ^d`: the dip `2 − θ` is the product set
/// `(O ∩ (0,1)) × (0,1)^{d-1}`, so its convolution factorizes into exact
/// one-dimensional masses.
pub fn mollify_theta2(theta: &ThetaField1D, eps: f64, x: &[f64]) -> f64 {
    assert!(eps > 0.0, "mollification width must be positive");
    let mut dip = 0.0;
    for &(lo, hi) in theta.cover.merged_f64_within(x[0] - eps, x[0] + eps) {
        let (lo, hi) = (lo.max(0.0), hi.min(1.0));
        if hi > lo {
            dip += window_mass(lo, hi, x[0], eps);
        }
    }
    for &c in &x[1..] {
        if dip == 0.0 {
            break;
        }
        dip *= window_mass(0.0, 1.0, c, eps);
    }
    2.0 - dip
}

/// Per-axis derivative bound of the kernel: `sup|ρ'| = (315/256)·8u(1−u²)³`
/// at `u = 1/3`.
const KERNEL_DERIV_SUP: f64 = 2.3045;
/// `sup ρ = 315/256`.
const KERNEL_SUP: f64 = 315.0 / 256.0;

/// `∫_{ℝ^g} (2 − η(5|u|)) du` over the unit-radius profile: the dip mass of
/// a ball is this times `r^g`.
fn dip_mass_coefficient(g: usize) -> f64 {
    sphere_surface(g)
        * quad::gl_interval(
            |t| (2.0 - EtaProfile::eval(5.0 * t)) * t.powi(g as i32 - 1),
            0.0,
            0.15,
            64,
        )
}

/// `dip_mass_coefficient` memoized per dimension; it is a fixed integral.
fn dip_coeff(g: usize) -> f64 {
    const EMPTY: OnceLock<f64> = OnceLock::new();
    static CACHE: [OnceLock<f64>; 5] = [EMPTY; 5];
    if g < CACHE.len() {
        *CACHE[g].get_or_init(|| dip_mass_coefficient(g))
    } else {
        dip_mass_coefficient(g)
    }
}

/// Mollified hierarchy factor at `y ∈ ℝ^{d-1}`.
///
/// Per ball, in decreasing scale ratio `r/ε`:
/// * the kernel box inside the inner plateau gives exactly 1;
/// * comparable scales integrate the dip against the kernel with panels
///   no wider than `r/40` or `ε/2`, Gauss–Legendre 8 per panel;
/// * a ball far smaller than the kernel contributes its dip mass times the
///   kernel value at its center, with error below
///   `dip_coeff·K_g·(r/ε)^{g+1} ≤ 1e−6` enforced by the regime switch.
pub fn mollify_theta3(h: &SobolevHierarchy, eps: f64, y: &[f64]) -> f64 {
    assert!(eps > 0.0, "mollification width must be positive");
    debug_assert_eq!(y.len(), h.grid_dim());
    let balls = h.balls_near(y, eps);
    theta3_from_balls(h, eps, y, &balls)
}

/// A ball window collected once and reused for every evaluation point in
/// an axis box: edge quadrature samples the same short segment many times,
/// and the grid sweep in `balls_near` dominates a single evaluation.
pub struct Theta3Window<'a> {
    h: &'a SobolevHierarchy,
    eps: f64,
    balls: Vec<BallRef>,
}

impl<'a> Theta3Window<'a> {
    /// Window serving every point of the axis hull of `a` and `b`: the pad
    /// extends the kernel reach by the hull half-width, so the collected
    /// set is a superset of `balls_near(y, eps)` for each hull point `y`.
    pub fn new(h: &'a SobolevHierarchy, eps: f64, a: &[f64], b: &[f64]) -> Self {
        assert!(eps > 0.0, "mollification width must be positive");
        let g = h.grid_dim();
        debug_assert_eq!(a.len(), g);
        debug_assert_eq!(b.len(), g);
        let mut mid = vec![0.0; g];
        let mut half = 0.0f64;
        for i in 0..g {
            mid[i] = 0.5 * (a[i] + b[i]);
            half = half.max(0.5 * (a[i] - b[i]).abs());
        }
        let balls = h.balls_near(&mid, eps + half);
        Theta3Window { h, eps, balls }
    }

    /// `θ_ε(y)` for a point of the hull; extra window balls beyond kernel
    /// reach contribute exactly zero.
    pub fn theta(&self, y: &[f64]) -> f64 {
        theta3_from_balls(self.h, self.eps, y, &self.balls)
    }
}

fn theta3_from_balls(h: &SobolevHierarchy, eps: f64, y: &[f64], balls: &[BallRef]) -> f64 {
    let g = h.grid_dim();
    let diag = (g as f64).sqrt();
    if balls.is_empty() {
        return 2.0;
    }

    // Exact plateau: the whole kernel box sits where θ ≡ 1.
    for b in balls {
        let mut dist_sq = 0.0;
        for i in 0..g {
            let dx = y[i] - b.center[i];
            dist_sq += dx * dx;
        }
        if dist_sq.sqrt() + diag * eps <= b.r / 10.0 {
            return 1.0;
        }
    }

    let grad_bound = (g as f64).sqrt() * KERNEL_DERIV_SUP * KERNEL_SUP.powi(g as i32 - 1);
    let coeff = dip_coeff(g);
    let mut dip = 0.0;
    for b in balls {
        let ratio = b.r / eps;
        let pm_err = coeff * grad_bound * ratio.powi(g as i32 + 1);
        if pm_err <= 1e-6 {
            let mut kernel = 1.0;
            for i in 0..g {
                kernel *= kernel_pdf((y[i] - b.center[i]) / eps) / eps;
            }
            dip += coeff * b.r.powi(g as i32) * kernel;
            continue;
        }

        // Panel tensor quadrature of ρ_ε(y−s)(2−θ(s)) over the overlap of
        // the support box and the kernel box.
        let mut lo = [0.0f64; 4];
        let mut hi = [0.0f64; 4];
        let mut empty = false;
        for i in 0..g {
            lo[i] = (b.center[i] - 0.15 * b.r).max(y[i] - eps);
            hi[i] = (b.center[i] + 0.15 * b.r).min(y[i] + eps);
            empty |= lo[i] >= hi[i];
        }
        if empty {
            continue;
        }
        let panel_w = (b.r / 40.0).min(eps / 2.0);
        dip += panel_integrate(h, y, eps, &lo, &hi, panel_w, g);
    }
    2.0 - dip
}

/// Tensor Gauss–Legendre over `[lo, hi]` split into panels of width at most
/// `panel_w`, 8 nodes per panel per axis.
fn panel_integrate(
    h: &SobolevHierarchy,
    y: &[f64],
    eps: f64,
    lo: &[f64; 4],
    hi: &[f64; 4],
    panel_w: f64,
    g: usize,
) -> f64 {
    let (nodes, weights) = quad::gauss_legendre(8);
    let mut axis_nodes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(g);
    for i in 0..g {
        let width = hi[i] - lo[i];
        let panels = (width / panel_w).ceil().max(1.0) as usize;
        let pw = width / panels as f64;
        let mut pts = Vec::with_capacity(panels * nodes.len());
        for p in 0..panels {
            let (c, hw) = (lo[i] + (p as f64 + 0.5) * pw, 0.5 * pw);
            for (x, w) in nodes.iter().zip(&weights) {
                pts.push((c + hw * x, hw * w));
            }
        }
        axis_nodes.push(pts);
    }

    let mut total = 0.0;
    let mut idx = [0usize; 4];
    'tensor: loop {
        let mut s = [0.0f64; 4];
        let mut weight = 1.0;
        for i in 0..g {
            let (x, w) = axis_nodes[i][idx[i]];
            s[i] = x;
            weight *= w * kernel_pdf((y[i] - x) / eps) / eps;
        }
        if weight != 0.0 {
            total += weight * (2.0 - h.theta3_eval(&s[..g]));
        }
        let mut axis = g;
        loop {
            if axis == 0 {
                break 'tensor;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < axis_nodes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
    total
}

/// A metric field together with a mollification width.
#[derive(Clone, Debug)]
pub struct MollifiedMetric<'a> {
    pub field: &'a MetricField,
    pub eps: f64,
}

impl<'a> MollifiedMetric<'a> {
    pub fn new(field: &'a MetricField, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Parameter(format!(
                "mollification width must be positive, got {eps}"
            )));
        }
        Ok(MollifiedMetric { field, eps })
    }

    /// `θ_ε(x)`; constant fields are their own mollification.
    pub fn theta(&self, x: &[f64]) -> f64 {
        match self.field {
            MetricField::Constant { c, .. } => *c,
            MetricField::Ex1 { theta, .. } => mollify_theta1(theta, self.eps, x[0]),
            MetricField::Ex2 { theta, .. } => mollify_theta2(theta, self.eps, x),
            MetricField::Ex3 { hierarchy } => {
                mollify_theta3(hierarchy, self.eps, &x[..x.len() - 1])
            }
        }
    }

    pub fn sqrt_theta(&self, x: &[f64]) -> f64 {
        self.theta(x).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::fields::cover::{build_rational_cover, theta1_field, CoverScope};
    use crate::fields::hierarchy::{build_hierarchy, radius_schedule};
    use proptest::prelude::*;

    fn line_theta() -> ThetaField1D {
        theta1_field(build_rational_cover(&ratio(1, 16), 24, CoverScope::Line).unwrap())
    }

    fn unit_theta() -> ThetaField1D {
        theta1_field(build_rational_cover(&ratio(1, 16), 8, CoverScope::UnitInterval).unwrap())
    }

    #[test]
    fn kernel_is_a_unit_mass_density() {
        assert_eq!(kernel_cdf(-1.0), 0.0);
        assert_eq!(kernel_cdf(1.0), 1.0);
        assert!((kernel_cdf(0.0) - 0.5).abs() < 1e-15);
        let mass = quad::simpson_adaptive(kernel_pdf, -1.0, 1.0, 1e-13);
        assert!((mass - 1.0).abs() < 1e-12);
        for k in 0..20 {
            let t = -0.95 + 0.1 * k as f64;
            let dq = (kernel_cdf(t + 1e-6) - kernel_cdf(t - 1e-6)) / 2e-6;
            assert!((dq - kernel_pdf(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn line_factor_hits_exact_plateaus() {
        let theta = line_theta();
        // Inside the widest channel with the window fully contained.
        assert_eq!(mollify_theta1(&theta, 1e-3, 0.5), 1.0);
        // Clear point with the window clear of every channel.
        let x = 0.4 + 1e-5;
        assert_eq!(mollify_theta1(&theta, 1e-6, x), 2.0);
        // Straddling a channel edge gives a strictly intermediate value.
        let edge = 0.5 + 2f64.powi(-8);
        let v = mollify_theta1(&theta, 1e-3, edge);
        assert!(v > 1.0 && v < 2.0);
    }

    #[test]
    fn line_factor_matches_riemann_oracle() {
        let theta = line_theta();
        for (x, eps) in [(0.5 + 0.003, 0.004), (0.4 + 1e-5, 0.05), (0.0, 0.02)] {
            let v = mollify_theta1(&theta, eps, x);
            let n = 800_000usize;
            let cell = 2.0 * eps / n as f64;
            let mut acc = 0.0;
            for k in 0..n {
                let s = x - eps + (k as f64 + 0.5) * cell;
                acc += kernel_pdf((x - s) / eps) / eps * theta.eval(s) * cell;
            }
            assert!((v - acc).abs() < 1e-4, "x={x} eps={eps}: {v} vs oracle {acc}");
        }
    }

    #[test]
    fn line_factor_converges_with_the_dominated_bound() {
        // Not monotone in eps in general: shrinking the window grows 1/eps
        // faster than it sheds microscopic channels. The honest statement is
        // |θ_ε − 2| ≤ sup ρ · covered mass / eps, with exact 2 once clear.
        let theta = line_theta();
        let x = 0.4 + 1e-5;
        for k in 0..14 {
            let eps = 0.02 / 2f64.powi(k);
            let v = mollify_theta1(&theta, eps, x);
            let mass: f64 = theta
                .cover
                .merged_f64_within(x - eps, x + eps)
                .iter()
                .map(|&(lo, hi)| hi.min(x + eps) - lo.max(x - eps))
                .sum();
            assert!(2.0 - v <= KERNEL_SUP * mass / eps + 1e-15, "eps={eps}");
        }
        assert_eq!(mollify_theta1(&theta, 0.02 / 2f64.powi(13), x), 2.0);
    }

    #[test]
    fn hierarchy_factor_converges_monotonically_at_a_certified_point() {
        // At the certified thirds point every ball clears the window by the
        // second rung, so the dip ladder is nonincreasing and ends exactly.
        let h = build_hierarchy(&radius_schedule(3, 1.0, 4).unwrap()).unwrap();
        let y = [1.0 / 3.0, 2.0 / 3.0];
        let mut prev = f64::INFINITY;
        let mut last = f64::NAN;
        for k in 0..4 {
            let eps = 0.1 / 2f64.powi(k);
            let gap = 2.0 - mollify_theta3(&h, eps, &y);
            assert!(gap >= 0.0 && gap <= prev, "eps={eps}: {gap} after {prev}");
            prev = gap;
            last = gap;
        }
        assert_eq!(last, 0.0);
    }

    #[test]
    fn cube_factor_factorizes_and_caps_at_the_boundary() {
        let theta = unit_theta();
        assert_eq!(mollify_theta2(&theta, 1e-3, &[0.5, 0.5]), 1.0);
        assert_eq!(mollify_theta2(&theta, 1e-3, &[0.5, -3.0]), 2.0);
        assert_eq!(mollify_theta2(&theta, 1e-3, &[-5.0, 0.5]), 2.0);
        // At the face the unit-interval mass halves the dip.
        let at_face = mollify_theta2(&theta, 1e-3, &[0.5, 0.0]);
        assert!((at_face - 1.5).abs() < 1e-12);

        // Independent 2-d midpoint oracle near the corner of cube and channel.
        let (x, eps) = ([0.5 + 0.002, 0.001], 0.004);
        let v = mollify_theta2(&theta, eps, &x);
        let n = 2000usize;
        let cell = 2.0 * eps / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let s0 = x[0] - eps + (i as f64 + 0.5) * cell;
            for j in 0..n {
                let s1 = x[1] - eps + (j as f64 + 0.5) * cell;
                let inside = 0.0 < s0 && s0 < 1.0 && 0.0 < s1 && s1 < 1.0;
                let th = if inside { theta.eval(s0) } else { 2.0 };
                acc += kernel_pdf((x[0] - s0) / eps) * kernel_pdf((x[1] - s1) / eps) * th;
            }
        }
        acc *= cell * cell / (eps * eps);
        assert!((v - acc).abs() < 1e-4, "{v} vs oracle {acc}");
    }

    #[test]
    fn hierarchy_factor_has_exact_plateaus() {
        let h = build_hierarchy(&radius_schedule(3, 1.0, 2).unwrap()).unwrap();
        let r = h.levels[0].r_f64;
        assert_eq!(mollify_theta3(&h, r / 40.0, &[0.25, 0.25]), 1.0);
        assert_eq!(mollify_theta3(&h, 0.01, &[1.0 / 3.0, 2.0 / 3.0]), 2.0);
    }

    #[test]
    fn hierarchy_factor_matches_brute_quadrature_in_the_panel_regime() {
        let h = build_hierarchy(&radius_schedule(3, 1.0, 2).unwrap()).unwrap();
        let r = h.levels[0].r_f64;
        // Window straddling the ramp annulus of the level-1 ball at (1/4, 1/4).
        let y = [0.25 + 0.12 * r, 0.25];
        let eps = r / 30.0;
        let v = mollify_theta3(&h, eps, &y);
        assert!(v > 1.0 && v < 2.0);

        let n = 1200usize;
        let cell = 2.0 * eps / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let s0 = y[0] - eps + (i as f64 + 0.5) * cell;
            for j in 0..n {
                let s1 = y[1] - eps + (j as f64 + 0.5) * cell;
                acc += kernel_pdf((y[0] - s0) / eps) * kernel_pdf((y[1] - s1) / eps)
                    * h.theta3_eval(&[s0, s1]);
            }
        }
        acc *= cell * cell / (eps * eps);
        assert!((v - acc).abs() < 1e-6, "{v} vs oracle {acc}");
    }

    #[test]
    fn hierarchy_factor_matches_dip_oracle_in_the_point_mass_regime() {
        let h = build_hierarchy(&radius_schedule(3, 1.0, 2).unwrap()).unwrap();
        let r = h.levels[0].r_f64;
        let y = [0.25 + 2e-5, 0.25 - 1e-5];
        let eps = 1e-3;
        assert!(r / eps < 0.04);
        let v = mollify_theta3(&h, eps, &y);

        // Brute dip integral over the support square of the one nearby ball.
        let c = [0.25, 0.25];
        let half = 0.15 * r;
        let n = 500usize;
        let cell = 2.0 * half / n as f64;
        let mut dip = 0.0;
        for i in 0..n {
            let s0 = c[0] - half + (i as f64 + 0.5) * cell;
            for j in 0..n {
                let s1 = c[1] - half + (j as f64 + 0.5) * cell;
                let th = h.theta3_eval(&[s0, s1]);
                dip += kernel_pdf((y[0] - s0) / eps) * kernel_pdf((y[1] - s1) / eps)
                    * (2.0 - th);
            }
        }
        dip *= cell * cell / (eps * eps);
        let oracle = 2.0 - dip;
        assert!((v - oracle).abs() < 1e-6, "{v} vs oracle {oracle}");
    }

    #[test]
    fn wrapper_dispatches_and_validates() {
        let constant = MetricField::constant(3, 1.5).unwrap();
        let m = MollifiedMetric::new(&constant, 0.01).unwrap();
        assert_eq!(m.theta(&[4.0, 5.0, 6.0]), 1.5);
        assert!(MollifiedMetric::new(&constant, 0.0).is_err());
        assert!(MollifiedMetric::new(&constant, f64::NAN).is_err());

        let h = build_hierarchy(&radius_schedule(3, 1.0, 2).unwrap()).unwrap();
        let ex3 = MetricField::ex3(h);
        let m3 = MollifiedMetric::new(&ex3, 0.01).unwrap();
        // The channel direction is the last coordinate and does not matter.
        let a = m3.theta(&[0.25, 0.25, -9.0]);
        let b = m3.theta(&[0.25, 0.25, 14.0]);
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn line_factor_is_kernel_lipschitz(
            x in -0.2f64..1.2, dx in -0.02f64..0.02, eps_k in 1u32..6,
        ) {
            let theta = line_theta();
            let eps = 0.1 / (1 << eps_k) as f64;
            let a = mollify_theta1(&theta, eps, x);
            let b = mollify_theta1(&theta, eps, x + dx);
            // |θ_ε'| ≤ ∫|ρ_ε'| = 2·sup ρ / ε.
            let lip = 2.0 * KERNEL_SUP / eps;
            prop_assert!((a - b).abs() <= lip * dx.abs() + 1e-12);
        }

        #[test]
        fn factors_stay_within_range(
            x in -0.5f64..1.5, eps_k in 1u32..8,
        ) {
            let theta = line_theta();
            let eps = 0.2 / (1 << eps_k) as f64;
            let v = mollify_theta1(&theta, eps, x);
            prop_assert!((1.0..=2.0).contains(&v));
        }
    }
}
