//! Conformal metric fields `g = θ(x)·Id` with `θ` valued in `[1, 2]`.

use crate::fields::cover::ThetaField1D;
use crate::fields::hierarchy::SobolevHierarchy;
use crate::{Error, Result};

/// A conformal factor construction. The metric is `g = θ·Id`, lengths scale
/// by `√θ`, and `θ` stays within `[1, 2]` for every variant.
#[derive(Clone, Debug)]
pub enum MetricField {
    /// Spatially constant factor; distances are exactly `√c`·euclidean.
    Constant { d: usize, c: f64 },
    /// Whole-line channel field: `θ(x) = θ₁(x_1)` with channels at every
    /// enumerated rational.
    Ex1 { d: usize, theta: ThetaField1D },
    /// Unit-interval channel field inside the unit cube, `θ = 2` outside it.
    Ex2 { d: usize, theta: ThetaField1D },
    /// Ball-hierarchy field in the first `d − 1` coordinates; channels run
    /// along the last axis.
    Ex3 { hierarchy: SobolevHierarchy },
}

impl MetricField {
    pub fn constant(d: usize, c: f64) -> Result<Self> {
        if !(2..=8).contains(&d) {
            return Err(Error::Parameter(format!("dimension {d} outside [2, 8]")));
        }
        if !(1.0..=2.0).contains(&c) {
            return Err(Error::Parameter(format!("constant factor {c} outside [1, 2]")));
        }
        Ok(MetricField::Constant { d, c })
    }

    pub fn ex1(d: usize, theta: ThetaField1D) -> Result<Self> {
        if d < 2 {
            return Err(Error::Parameter("channel fields need d ≥ 2".into()));
        }
        Ok(MetricField::Ex1 { d, theta })
    }

    pub fn ex2(d: usize, theta: ThetaField1D) -> Result<Self> {
        if d < 2 {
            return Err(Error::Parameter("channel fields need d ≥ 2".into()));
        }
        Ok(MetricField::Ex2 { d, theta })
    }

    pub fn ex3(hierarchy: SobolevHierarchy) -> Self {
        MetricField::Ex3 { hierarchy }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricField::Constant { d, .. } => *d,
            MetricField::Ex1 { d, .. } => *d,
            MetricField::Ex2 { d, .. } => *d,
            MetricField::Ex3 { hierarchy } => hierarchy.d,
        }
    }

    /// Conformal factor at `x ∈ ℝ^d`.
    pub fn theta(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            MetricField::Constant { c, .. } => *c,
            MetricField::Ex1 { theta, .. } => theta.eval(x[0]),
            MetricField::Ex2 { theta, .. } => {
                if x.iter().all(|&c| 0.0 < c && c < 1.0) {
                    theta.eval(x[0])
                } else {
                    2.0
                }
            }
            MetricField::Ex3 { hierarchy } => hierarchy.theta3_eval(&x[..x.len() - 1]),
        }
    }

    /// Metric length of a tangent vector: `√θ(x)·|v|`.
    pub fn enorm(&self, x: &[f64], v: &[f64]) -> f64 {
        let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.theta(x).sqrt() * norm
    }

    /// Short tag used in reports and file names.
    pub fn tag(&self) -> &'static str {
        match self {
            MetricField::Constant { .. } => "CONSTANT",
            MetricField::Ex1 { .. } => "EX1",
            MetricField::Ex2 { .. } => "EX2",
            MetricField::Ex3 { .. } => "EX3",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::fields::cover::{build_rational_cover, theta1_field, CoverScope};
    use crate::fields::hierarchy::{build_hierarchy, radius_schedule};

    #[test]
    fn constant_bounds_are_enforced() {
        assert!(MetricField::constant(3, 0.5).is_err());
        assert!(MetricField::constant(3, 2.5).is_err());
        let m = MetricField::constant(3, 2.0).unwrap();
        assert_eq!(m.theta(&[4.0, -1.0, 0.0]), 2.0);
        let v = [1.0, 0.0, 0.0];
        assert!((m.enorm(&[0.0; 3], &v) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn line_field_ignores_other_coordinates() {
        let cover = build_rational_cover(&ratio(1, 16), 24, CoverScope::Line).unwrap();
        let m = MetricField::ex1(2, theta1_field(cover)).unwrap();
        assert_eq!(m.theta(&[0.5, 77.0]), 1.0);
        assert_eq!(m.theta(&[0.9, -3.0]), 2.0);
    }

    #[test]
    fn cube_field_is_two_outside_the_cube() {
        let cover = build_rational_cover(&ratio(1, 16), 8, CoverScope::UnitInterval).unwrap();
        let m = MetricField::ex2(2, theta1_field(cover)).unwrap();
        assert_eq!(m.theta(&[0.5, 0.5]), 1.0);
        assert_eq!(m.theta(&[0.5, 1.5]), 2.0);
        assert_eq!(m.theta(&[-5.0, 0.5]), 2.0);
    }

    #[test]
    fn hierarchy_field_uses_leading_coordinates() {
        let h = build_hierarchy(&radius_schedule(3, 1.0, 2).unwrap()).unwrap();
        let m = MetricField::ex3(h);
        assert_eq!(m.dim(), 3);
        assert_eq!(m.theta(&[0.25, 0.25, 9999.0]), 1.0);
        assert_eq!(m.theta(&[1.0 / 3.0, 2.0 / 3.0, -4.0]), 2.0);
    }
}
