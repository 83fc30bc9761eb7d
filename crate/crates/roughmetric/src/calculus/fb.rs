//! The channel-riding cost profile `f_b` and its minimizers.
//!
//! `f_b(c) = √2·√(b² + c²) + (1 − c)` on `c ∈ [0, 1]` prices a unit move
//! along a slab of the factor-1 channel system with transverse offset `b`:
//! a diagonal leg through factor-2 territory covers the offset `b` and `c`
//! of the along-slab component, the remaining `1 − c` rides a channel at
//! unit rate. The minimum over `c` is the limit norm of the direction
//! `b·e₁ + e₂`.

use crate::quad::{golden_min, refine_min_parabolic};
use crate::{Error, Result};

/// `f_b(c) = |1 − c| + √2·√(b² + c²)`; even in `b`, defined for any real
/// `c` though only `[0, 1]` describes admissible decompositions (beyond
/// `c = 1` both terms grow, so the global minimum lives there anyway).
pub fn fb_value(b: f64, c: f64) -> f64 {
    (1.0 - c).abs() + std::f64::consts::SQRT_2 * (b * b + c * c).sqrt()
}

/// Closed-form minimizer over `c ∈ [0, 1]`: returns `(c*, f_b(c*))`.
///
/// Stationarity `√2·c/√(b² + c²) = 1` gives `c = |b|`; the stationary point
/// is admissible exactly when `|b| ≤ 1`, with value `2|b| + 1 − |b| =
/// 1 + |b|`. For `|b| ≥ 1` the derivative stays negative on `[0, 1]` and
/// the minimum saturates at `c* = 1` with value `√(2(1 + b²))`.
pub fn fb_minimize(b: f64) -> (f64, f64) {
    let s = b.abs();
    if s <= 1.0 {
        (s, 1.0 + s)
    } else {
        (1.0, (2.0 * (1.0 + b * b)).sqrt())
    }
}

/// Numeric minimizer over `c ∈ [0, 1]`: golden section to 1e-12 bracket
/// width, then one parabolic refinement. Serves as the independent check
/// of [`fb_minimize`]; agreement to 1e-10 in value and 1e-8 in `c*` is a
/// regression gate.
pub fn fb_minimize_numeric(b: f64) -> Result<(f64, f64)> {
    if !b.is_finite() {
        return Err(Error::Parameter("offset must be finite".into()));
    }
    let f = |c: f64| fb_value(b, c);
    let (x0, _) = golden_min(&f, 0.0, 1.0, 1e-12);
    let refined = refine_min_parabolic(&f, x0, 1e-7).clamp(0.0, 1.0);
    // boundary minima: golden stops a bracket-width inside, so the
    // endpoints must compete as candidates of their own
    let x = [refined, 0.0, 1.0]
        .into_iter()
        .min_by(|p, q| f(*p).total_cmp(&f(*q)))
        .unwrap();
    Ok((x, f(x)))
}

/// Cost of the decomposed move in direction `(u1, uperp)`: a diagonal leg
/// `(u1, c·uperp)` at factor `√2` followed by `(0, (1 − c)·uperp)` riding a
/// channel at factor 1. At `c = 1` this is the straight `√2`-move; the
/// infimum over `c ∈ [0, 1]` is the slab geometry's limit norm
/// `α(u1, uperp)` by the scaling `f` inherits from `f_b`.
pub fn two_segment_cost(u1: f64, uperp: f64, c: f64) -> f64 {
    std::f64::consts::SQRT_2 * (u1 * u1 + c * c * uperp * uperp).sqrt()
        + (1.0 - c) * uperp.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn named_offsets_match_the_closed_form() {
        let (c0, v0) = fb_minimize(0.0);
        assert_eq!((c0, v0), (0.0, 1.0));

        let (c1, v1) = fb_minimize(1.0);
        assert_eq!(c1, 1.0);
        assert!((v1 - 2.0).abs() < 1e-15);

        let (c2, v2) = fb_minimize(2.0);
        assert_eq!(c2, 1.0);
        assert!((v2 - 10.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn profile_is_even_in_b() {
        for k in 0..40 {
            let b = 0.12 * k as f64;
            let (cp, vp) = fb_minimize(b);
            let (cn, vn) = fb_minimize(-b);
            assert_eq!((cp, vp), (cn, vn));
            assert_eq!(fb_value(b, 0.3), fb_value(-b, 0.3));
        }
    }

    #[test]
    fn numeric_grid_agrees_with_the_closed_form() {
        // 101 offsets across [-5, 5]; value to 1e-10, minimizer to 1e-8.
        for k in 0..=100 {
            let b = -5.0 + 0.1 * k as f64;
            let (c_star, v_star) = fb_minimize(b);
            let (c_num, v_num) = fb_minimize_numeric(b).unwrap();
            assert!(
                (v_num - v_star).abs() < 1e-10,
                "value mismatch at b = {b}: {v_num} vs {v_star}"
            );
            assert!(
                (c_num - c_star).abs() < 1e-8,
                "minimizer mismatch at b = {b}: {c_num} vs {c_star}"
            );
        }
    }

    #[test]
    fn limit_norm_is_the_two_segment_infimum() {
        // alpha(u) against a brute-force scan of the decomposition
        // parameter: 10^4 grid points on [0, 1], 100 seeded directions.
        use crate::distance::alpha_ex1;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_260_819);
        for _ in 0..100 {
            let u: [f64; 2] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let (cross, free) = (u[0].abs(), u[1].abs());
            let mut scan = f64::INFINITY;
            for k in 0..=10_000 {
                scan = scan.min(two_segment_cost(cross, free, k as f64 * 1e-4));
            }
            let alpha = alpha_ex1(&u);
            assert!(
                (scan - alpha).abs() < 1e-6,
                "scan {scan} vs alpha {alpha} at u = {u:?}"
            );
        }
    }

    #[test]
    fn two_segment_cost_scales_out_of_fb() {
        // uperp > 0 pulls out of the cost: f(u1, uperp, c) = uperp·f_{u1/uperp}(c).
        let (u1, uperp, c) = (0.7, 1.9, 0.4);
        let scaled = uperp * fb_value(u1 / uperp, c);
        assert!((two_segment_cost(u1, uperp, c) - scaled).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn closed_form_lower_bounds_every_admissible_sample(
            b in -5.0f64..5.0,
            c in 0.0f64..1.0,
        ) {
            let (_, v) = fb_minimize(b);
            prop_assert!(fb_value(b, c) >= v - 1e-12);
        }

        #[test]
        fn saturated_branch_is_the_straight_diagonal(b in 1.0f64..5.0) {
            let (c, v) = fb_minimize(b);
            prop_assert_eq!(c, 1.0);
            prop_assert!((v - std::f64::consts::SQRT_2 * (1.0 + b * b).sqrt()).abs() < 1e-12);
        }
    }
}
