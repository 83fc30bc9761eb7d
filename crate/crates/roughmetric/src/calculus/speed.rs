//! Metric speeds and slopes as difference-quotient brackets.
//!
//! Both objects are one-sided limits, so point estimates would overstate
//! what the discrete geometry knows. Every query reports the certified
//! distance bracket pushed through the quotient at each step of an
//! h-schedule; claims (" exceeds √(2/3)") are settled by bracket
//! separation or not at all.

use crate::distance::certified_bracket;
use crate::fields::MetricField;
use crate::{Error, Result};

use super::plan::Curve;

/// One difference-quotient row: the distance bracket at step `h`, divided
/// by `h`.
#[derive(Clone, Copy, Debug)]
pub struct BracketRow {
    pub h: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Speed bracket across a decreasing h-schedule; `lower`/`upper` are the
/// final row's edges.
#[derive(Clone, Debug)]
pub struct SpeedBracket {
    pub rows: Vec<BracketRow>,
    pub lower: f64,
    pub upper: f64,
}

impl SpeedBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower - 1e-12 <= v && v <= self.upper + 1e-12
    }
}

fn validate_schedule(t: f64, schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Parameter("schedule must have at least one h".into()));
    }
    if schedule.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::Parameter("h values must be positive".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("h values must strictly decrease".into()));
    }
    if !(0.0..=1.0).contains(&t) || t + schedule[0] > 1.0 + 1e-12 {
        return Err(Error::Parameter(format!(
            "t = {t} with largest h = {} leaves the parameter domain",
            schedule[0]
        )));
    }
    Ok(())
}

/// Difference-quotient bracket for the metric speed of `curve` at `t`:
/// `d(γ_t, γ_{t+h})/h` over the schedule, distance brackets propagated.
/// The caller reads convergence off the rows; the headline edges come
/// from the smallest `h`.
pub fn metric_speed(
    field: &MetricField,
    curve: &Curve,
    t: f64,
    schedule: &[f64],
) -> Result<SpeedBracket> {
    validate_schedule(t, schedule)?;
    let base = curve.point(t);
    let mut rows = Vec::with_capacity(schedule.len());
    for &h in schedule {
        let ahead = curve.point(t + h);
        let (lo, hi, _) = certified_bracket(field, &base, &ahead)?;
        rows.push(BracketRow { h, lower: lo / h, upper: hi / h });
    }
    let last = rows[rows.len() - 1];
    Ok(SpeedBracket { rows, lower: last.lower, upper: last.upper })
}

/// One direction's quotient rows inside a slope query.
#[derive(Clone, Debug)]
pub struct SlopeDirection {
    pub direction: Vec<f64>,
    pub rows: Vec<BracketRow>,
}

/// Slope bracket: max over directions of `|f(x+hu) − f(x)| / d(x, x+hu)`
/// at the smallest h, with the distance bracket inverted into the ratio.
#[derive(Clone, Debug)]
pub struct SlopeBracket {
    pub directions: Vec<SlopeDirection>,
    /// Max over directions of the final-row lower edge: a certified lower
    /// bound for the slope at x up to the h-limit.
    pub lower: f64,
    /// Max over directions of the final-row upper edge. This bounds the
    /// sampled quotients, not the limsup over all approach directions.
    pub upper: f64,
}

impl SlopeBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Difference-quotient slope of `f` at `x` along the given directions.
/// Ratios use the certified distance bracket: `|Δf|/hi ≤ ratio ≤ |Δf|/lo`.
pub fn slope<F: Fn(&[f64]) -> f64>(
    field: &MetricField,
    f: F,
    x: &[f64],
    directions: &[Vec<f64>],
    schedule: &[f64],
) -> Result<SlopeBracket> {
    validate_schedule(0.0, schedule)?;
    if directions.is_empty() {
        return Err(Error::Parameter("need at least one direction".into()));
    }
    if x.len() != field.dim() || directions.iter().any(|u| u.len() != x.len()) {
        return Err(Error::Parameter("direction dimension mismatch".into()));
    }
    if directions
        .iter()
        .any(|u| u.iter().map(|c| c * c).sum::<f64>() == 0.0)
    {
        return Err(Error::Parameter("directions must be nonzero".into()));
    }
    let fx = f(x);
    let mut out = Vec::with_capacity(directions.len());
    let (mut lower, mut upper) = (0.0f64, 0.0f64);
    for u in directions {
        let mut rows = Vec::with_capacity(schedule.len());
        for &h in schedule {
            let y: Vec<f64> = x.iter().zip(u).map(|(a, c)| a + h * c).collect();
            let df = (f(&y) - fx).abs();
            let (dlo, dhi) = {
                let (lo, hi, _) = certified_bracket(field, x, &y)?;
                (lo, hi)
            };
            let lo = if dhi > 0.0 { df / dhi } else { 0.0 };
            let hi = if dlo > 0.0 { df / dlo } else { f64::INFINITY };
            rows.push(BracketRow { h, lower: lo, upper: hi });
        }
        let last = rows[rows.len() - 1];
        lower = lower.max(last.lower);
        upper = upper.max(last.upper);
        out.push(SlopeDirection { direction: u.clone(), rows });
    }
    Ok(SlopeBracket { directions: out, lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::fields::{build_rational_cover, theta1_field, CoverScope};
    use proptest::prelude::*;

    fn ex1_field() -> MetricField {
        let cover = build_rational_cover(&ratio(1, 16), 24, CoverScope::Line).unwrap();
        MetricField::ex1(2, theta1_field(cover)).unwrap()
    }

    #[test]
    fn constant_field_speed_is_the_exact_conformal_rate() {
        let field = MetricField::constant(3, 2.0).unwrap();
        let curve = Curve::straight(vec![0.1, 0.2, 0.3], vec![1.0, 0.0, 0.0]).unwrap();
        let s = metric_speed(&field, &curve, 0.0, &[0.2, 0.1]).unwrap();
        assert_eq!(s.rows.len(), 2);
        for row in &s.rows {
            assert!((row.lower - std::f64::consts::SQRT_2).abs() < 1e-12);
            assert!((row.upper - std::f64::consts::SQRT_2).abs() < 1e-12);
        }
        assert!(s.width() < 1e-12);
    }

    #[test]
    fn channel_riding_speed_brackets_one() {
        // Base just outside the 2/5 channel; the curve runs along e_2, so
        // the detour bound pinches the quotient onto 1 while the naive
        // conformal rate would be √2.
        let field = ex1_field();
        let curve = Curve::straight(vec![0.4 + 1e-5, 0.0], vec![0.0, 1.0]).unwrap();
        let s = metric_speed(&field, &curve, 0.0, &[0.2, 0.1, 0.05]).unwrap();
        assert!(s.contains(1.0), "bracket [{}, {}]", s.lower, s.upper);
        assert!(s.upper < 1.01);
        assert!(s.lower > 0.99);
        assert!(s.upper < std::f64::consts::SQRT_2);
        // Wider h rows already bracket 1: rows are ordered as scheduled.
        assert_eq!(s.rows[0].h, 0.2);
    }

    #[test]
    fn slope_of_the_transverse_coordinate_beats_the_gradient_bound() {
        // f = x_2 at a channel-adjacent base: slope ≈ 1 while |∇_g f|_g
        // would cap it at 1/√2 if the metric were seen as plainly θ=2.
        let field = ex1_field();
        let x = [0.4 + 1e-5, 0.25];
        let s = slope(
            &field,
            |p: &[f64]| p[1],
            &x,
            &[vec![0.0, 1.0]],
            &[0.2, 0.1, 0.05],
        )
        .unwrap();
        assert!(s.lower > 0.99, "lower = {}", s.lower);
        assert!(s.lower <= 1.0 + 1e-9);
        assert!(s.upper >= 1.0 - 1e-9);
    }

    #[test]
    fn slope_of_a_constant_vanishes() {
        let field = ex1_field();
        let s = slope(
            &field,
            |_: &[f64]| 3.25,
            &[0.3, 0.3],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[0.1, 0.05],
        )
        .unwrap();
        assert_eq!(s.lower, 0.0);
        assert_eq!(s.upper, 0.0);
    }

    #[test]
    fn crossing_slope_at_an_exterior_point_is_the_conformal_ratio() {
        // f = x_1 along e_1 at a point far from any wide channel: distance
        // is √2·h up to the detour correction, so the ratio sits at 1/√2.
        let field = ex1_field();
        let x = [0.4 + 1e-5, 0.25];
        let s = slope(
            &field,
            |p: &[f64]| p[0],
            &x,
            &[vec![1.0, 0.0]],
            &[0.1, 0.05],
        )
        .unwrap();
        let target = 1.0 / std::f64::consts::SQRT_2;
        assert!(s.lower <= target + 1e-9);
        // The e_1-move crosses thin channels only; the upper edge stays
        // within a few percent of the conformal ratio.
        assert!(s.upper < target * 1.05, "upper = {}", s.upper);
        assert!(s.upper >= target - 1e-9);
    }

    #[test]
    fn schedules_must_decrease_and_stay_inside_the_domain() {
        let field = MetricField::constant(2, 1.0).unwrap();
        let curve = Curve::straight(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(metric_speed(&field, &curve, 0.0, &[0.1, 0.1]).is_err());
        assert!(metric_speed(&field, &curve, 0.0, &[]).is_err());
        assert!(metric_speed(&field, &curve, 0.95, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn polyline_with_matching_forward_data_gives_the_same_bracket() {
        // Straight curve vs a polyline that kinks only behind t: forward
        // quotients see identical points, so the brackets coincide.
        let field = MetricField::constant(2, 1.7).unwrap();
        let straight = Curve::straight(vec![0.2, 0.2], vec![0.4, 0.2]).unwrap();
        let bent = Curve::polyline(vec![
            vec![0.1, 0.5],
            vec![0.2, 0.2],
            vec![0.4, 0.3],
        ])
        .unwrap();
        // bent at t=1/2 sits at (0.2, 0.2) with right velocity (0.4, 0.2).
        let a = metric_speed(&field, &straight, 0.0, &[0.2, 0.1]).unwrap();
        let b = metric_speed(&field, &bent, 0.5, &[0.1, 0.05]).unwrap();
        assert!((a.lower - b.lower).abs() < 1e-12);
        assert!((a.upper - b.upper).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn speed_is_lipschitz_in_the_direction(
            ux in -1.0f64..1.0, uy in -1.0f64..1.0,
            vx in -1.0f64..1.0, vy in -1.0f64..1.0,
        ) {
            prop_assume!(ux.abs() + uy.abs() > 0.05);
            prop_assume!(vx.abs() + vy.abs() > 0.05);
            let field = MetricField::constant(2, 2.0).unwrap();
            let x = vec![0.0, 0.0];
            let cu = Curve::straight(x.clone(), vec![0.3 * ux, 0.3 * uy]).unwrap();
            let cv = Curve::straight(x, vec![0.3 * vx, 0.3 * vy]).unwrap();
            let su = metric_speed(&field, &cu, 0.0, &[0.1]).unwrap();
            let sv = metric_speed(&field, &cv, 0.0, &[0.1]).unwrap();
            let du = 0.3 * ((ux - vx).powi(2) + (uy - vy).powi(2)).sqrt();
            let gap = (su.lower - sv.upper).max(sv.lower - su.upper).max(0.0);
            // |u − v|_g = √2·|u − v|; the admissible factor is √(Λ/λ) = √2.
            prop_assert!(gap <= std::f64::consts::SQRT_2 * std::f64::consts::SQRT_2 * du + 1e-9);
        }

        #[test]
        fn exterior_speed_brackets_respect_the_conformal_cap(
            shift in 0.0f64..0.4,
            ux in -1.0f64..1.0,
            uy in 0.1f64..1.0,
        ) {
            // Bases on the slab-plan base set are exterior points, where
            // the certified bracket may not exceed √2 |u| per unit time.
            let field = ex1_field();
            let base = vec![0.4 + 1e-5, 0.1 + shift];
            let dir = vec![0.3 * ux, 0.3 * uy];
            let enorm = std::f64::consts::SQRT_2
                * (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
            let curve = Curve::straight(base, dir).unwrap();
            let s = metric_speed(&field, &curve, 0.0, &[0.05]).unwrap();
            prop_assert!(s.lower <= enorm + 1e-9);
            prop_assert!(s.upper <= enorm + 1e-9);
        }
    }
}
