//! Exact band truncation of piecewise-linear functions on `[0, 1]`.
//!
//! For Lipschitz `f` and a band `(a, b)`, the derivative of the clamp
//! `h = max(a, min(f, b))` is `f′·1_{a < f < b}` almost everywhere, so
//! `∫_{f⁻¹((a,b))} f′ dt = h(1) − h(0)`, which in particular lies in
//! `[a − b, b − a]`. Everything here is exact rational arithmetic; the
//! independent oracle integrates per segment over the inverse image of the
//! open band instead of reading endpoint values.

use num::rational::BigRational;
use num::Zero;

use crate::exact;
use crate::{Error, Result};

/// Piecewise-linear function given by exact breakpoints `(t, value)` with
/// strictly increasing `t` spanning `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    pub knots: Vec<(BigRational, BigRational)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(BigRational, BigRational)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Parameter("need at least two breakpoints".into()));
        }
        if !knots[0].0.is_zero() || knots[knots.len() - 1].0 != BigRational::from_integer(1.into())
        {
            return Err(Error::Parameter("breakpoints must span [0, 1]".into()));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Parameter("breakpoint times must strictly increase".into()));
        }
        Ok(PiecewiseLinear { knots })
    }

    pub fn eval(&self, t: &BigRational) -> Result<BigRational> {
        let (t0, t1) = (&self.knots[0].0, &self.knots[self.knots.len() - 1].0);
        if t < t0 || t > t1 {
            return Err(Error::Parameter("evaluation outside [0, 1]".into()));
        }
        let k = self.knots.partition_point(|(s, _)| s <= t);
        if k == self.knots.len() {
            return Ok(self.knots[k - 1].1.clone());
        }
        let (ref ta, ref va) = self.knots[k - 1];
        let (ref tb, ref vb) = self.knots[k];
        Ok(va + (vb - va) * (t - ta) / (tb - ta))
    }

    pub fn start_value(&self) -> &BigRational {
        &self.knots[0].1
    }

    pub fn end_value(&self) -> &BigRational {
        &self.knots[self.knots.len() - 1].1
    }
}

fn clamp(v: &BigRational, a: &BigRational, b: &BigRational) -> BigRational {
    if v < a {
        a.clone()
    } else if v > b {
        b.clone()
    } else {
        v.clone()
    }
}

/// Clamps `f` to `[a, b]` and returns the truncation `h` together with the
/// exact value of `∫_{f⁻¹((a,b))} f′ dt = h(1) − h(0)`.
///
/// New breakpoints are inserted wherever a segment crosses either band
/// level, so `h` is again piecewise linear on exact knots. The integral is
/// read off the endpoint values alone; it always lies in `[a − b, b − a]`
/// because `h` takes values in `[a, b]`.
pub fn truncate_band(
    f: &PiecewiseLinear,
    a: &BigRational,
    b: &BigRational,
) -> Result<(PiecewiseLinear, BigRational)> {
    if a >= b {
        return Err(Error::Parameter("band needs a < b".into()));
    }
    let mut knots: Vec<(BigRational, BigRational)> = Vec::with_capacity(f.knots.len());
    for w in f.knots.windows(2) {
        let (ref ta, ref va) = w[0];
        let (ref tb, ref vb) = w[1];
        knots.push((ta.clone(), clamp(va, a, b)));
        // Level crossings at a and b, strictly inside the segment, in time
        // order (the segment is monotone, so sorting two candidates does).
        let mut cuts: Vec<BigRational> = Vec::new();
        for level in [a, b] {
            if (va < level && level < vb) || (vb < level && level < va) {
                let t = ta + (tb - ta) * (level - va) / (vb - va);
                cuts.push(t);
            }
        }
        cuts.sort();
        for t in cuts {
            let v = va + (vb - va) * (&t - ta) / (tb - ta);
            knots.push((t, clamp(&v, a, b)));
        }
    }
    let last = &f.knots[f.knots.len() - 1];
    knots.push((last.0.clone(), clamp(&last.1, a, b)));
    let h = PiecewiseLinear::new(knots)?;
    let integral = h.end_value() - h.start_value();
    debug_assert!(exact::abs(&integral) <= b - a);
    Ok((h, integral))
}

/// Independent evaluation of the same integral: per segment, the measure
/// of the inverse image of the open band times the segment slope.
pub fn band_derivative_integral(
    f: &PiecewiseLinear,
    a: &BigRational,
    b: &BigRational,
) -> Result<BigRational> {
    if a >= b {
        return Err(Error::Parameter("band needs a < b".into()));
    }
    let mut total = BigRational::zero();
    for w in f.knots.windows(2) {
        let (ref ta, ref va) = w[0];
        let (ref tb, ref vb) = w[1];
        if va == vb {
            continue;
        }
        let slope = (vb - va) / (tb - ta);
        // Parameter interval where the segment value lies in (a, b): pull
        // the band back through the linear map; endpoints capped to the
        // segment. Open vs closed does not matter for the measure.
        let (lo_v, hi_v) = if va < vb { (va, vb) } else { (vb, va) };
        let lo = if a > lo_v { a } else { lo_v };
        let hi = if b < hi_v { b } else { hi_v };
        if lo >= hi {
            continue;
        }
        let measure = (hi - lo) / exact::abs(&slope);
        total += slope * measure;
    }
    Ok(total)
}
