//! Direction laws α(u) and channel-density moduli σ for the two
//! counterexample geometries.

use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::exact;
use crate::fields::{RationalCover, SobolevHierarchy};
use crate::{Error, Result};

fn split_first(u: &[f64]) -> (f64, f64) {
    let rest = u[1..].iter().map(|c| c * c).sum::<f64>().sqrt();
    (u[0].abs(), rest)
}

fn split_last(u: &[f64]) -> (f64, f64) {
    let d = u.len() - 1;
    let rest = u[..d].iter().map(|c| c * c).sum::<f64>().sqrt();
    (u[d].abs(), rest)
}

/// Directional distance law for the slab geometry: channels are vertical,
/// so motion dominated by the transverse coordinates travels at speed 1
/// along them and pays `|u_1|` to cross.
pub fn alpha_ex1(u: &[f64]) -> f64 {
    let (cross, free) = split_first(u);
    let norm = (cross * cross + free * free).sqrt();
    if cross <= free {
        cross + free
    } else {
        std::f64::consts::SQRT_2 * norm
    }
}

/// Directional distance law for the column geometry: channels run along the
/// last coordinate.
pub fn alpha_ex3(u: &[f64]) -> f64 {
    let (along, rest) = split_last(u);
    let norm = (along * along + rest * rest).sqrt();
    if along >= rest {
        along + rest
    } else {
        std::f64::consts::SQRT_2 * norm
    }
}

/// Largest covered fraction over intervals containing `x1` of length at
/// most `interval_length`, computed exactly over the merged cover.
///
/// The objective `(m(b) − m(a))/(b − a)` is a Möbius function of each
/// endpoint on every cell of the breakpoint grid, hence monotone per cell,
/// so the supremum is attained at a pair drawn from piece endpoints, the
/// point itself, and their `±L` shifts.
pub fn sigma_ex1(cover: &RationalCover, x1: f64, interval_length: f64) -> Result<f64> {
    if !(interval_length.is_finite() && interval_length > 0.0) {
        return Err(Error::Parameter(format!(
            "interval length must be positive, got {interval_length}"
        )));
    }
    let x = exact::from_f64(x1)?;
    if cover.contains_exact(&x) {
        return Err(Error::Parameter(format!(
            "{x1} lies inside the cover and is not a density point candidate"
        )));
    }
    let len = exact::from_f64(interval_length)?;
    let (win_lo, win_hi) = (&x - &len, &x + &len);

    let mut candidates: Vec<BigRational> = vec![x.clone(), win_lo.clone(), win_hi.clone()];
    for piece in &cover.merged {
        if piece.hi < win_lo || piece.lo > win_hi {
            continue;
        }
        for e in [&piece.lo, &piece.hi] {
            candidates.push(e.clone());
            candidates.push(e - &len);
            candidates.push(e + &len);
        }
    }
    candidates.retain(|c| *c >= win_lo && *c <= win_hi);
    candidates.sort();
    candidates.dedup();

    let mut best = BigRational::zero();
    for a in &candidates {
        if *a > x {
            continue;
        }
        for b in &candidates {
            if *b < x || b <= a || &(b - a) > &len {
                continue;
            }
            let frac = cover.measure_within(a, b) / (b - a);
            if frac > best {
                best = frac;
            }
        }
    }
    debug_assert!(best <= BigRational::one());
    Ok(exact::to_f64(&best))
}

/// Channel-density modulus of the column geometry: the exact count sum
/// `(2/5)·Σ_m r_m·ζ_m(y, r) / r` at a certified base point.
pub fn sigma_ex3(h: &SobolevHierarchy, y: &[BigRational], radius: &BigRational) -> Result<f64> {
    if !radius.is_positive() {
        return Err(Error::Parameter("radius must be positive".into()));
    }
    let cert = h.certify_in_s(y)?;
    if !cert.certified(h.levels.len()) {
        return Err(Error::Parameter(
            "base point is not certified outside the ball hierarchy".into(),
        ));
    }
    let counts = h.zeta_counts(y, radius);
    let mut sum = BigRational::zero();
    for (level, &count) in h.levels.iter().zip(&counts) {
        sum += &level.r * BigRational::from_integer(count.into());
    }
    let sigma = sum * exact::ratio(2, 5) / radius;
    Ok(sigma.to_f64().unwrap())
}
