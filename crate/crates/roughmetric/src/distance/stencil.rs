//! Neighbor stencils for anisotropic shortest paths.
//!
//! Offsets are the coprime integer vectors of Chebyshev norm at most `k`.
//! A straight segment is approximated by a zigzag of stencil directions,
//! inflating conformal lengths by at most `1/cos(gap/2)` where `gap` is the
//! largest angular hole in the direction set; the recorded `chordal_error`
//! is `1 − cos(gap/2)` and brackets add it multiplicatively.

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Stencil {
    pub dim: usize,
    pub k: usize,
    pub offsets: Vec<Vec<i64>>,
    /// Largest angular gap between directions, radians. Exact in 2D; in
    /// higher dimensions a Fibonacci-sphere sample maximum padded by the
    /// sample resolution.
    pub max_angular_gap: f64,
    pub chordal_error: f64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn coprime_offsets(dim: usize, k: usize) -> Vec<Vec<i64>> {
    let side = 2 * k + 1;
    let total = side.pow(dim as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut v = vec![0i64; dim];
        let mut rest = code;
        for slot in v.iter_mut() {
            *slot = (rest % side) as i64 - k as i64;
            rest /= side;
        }
        let g = v.iter().fold(0u64, |acc, &c| gcd(acc, c.unsigned_abs()));
        if g == 1 {
            out.push(v);
        }
    }
    out
}

fn max_gap_2d(offsets: &[Vec<i64>]) -> f64 {
    let mut angles: Vec<f64> = offsets
        .iter()
        .map(|v| (v[1] as f64).atan2(v[0] as f64))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut gap: f64 = 0.0;
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap.max(angles[0] + 2.0 * std::f64::consts::PI - angles[angles.len() - 1])
}

/// Covering-radius estimate on S^{dim−1} by Fibonacci sampling, padded by
/// the sample resolution so the result upper-bounds the true gap.
fn max_gap_sampled(offsets: &[Vec<i64>], dim: usize) -> f64 {
    assert_eq!(dim, 3, "sampled gap implemented for dim 3");
    let dirs: Vec<[f64; 3]> = offsets
        .iter()
        .map(|v| {
            let n = (v.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
            [v[0] as f64 / n, v[1] as f64 / n, v[2] as f64 / n]
        })
        .collect();
    let n = 40_000usize;
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
        let p = [r * phi.cos(), r * phi.sin(), z];
        let mut best: f64 = -1.0;
        for d in &dirs {
            let dot = p[0] * d[0] + p[1] * d[1] + p[2] * d[2];
            best = best.max(dot);
        }
        worst = worst.max(best.clamp(-1.0, 1.0).acos());
    }
    // Neighboring samples are ~√(8π/√5/n) apart; pad generously.
    let resolution = (4.0 * std::f64::consts::PI / n as f64).sqrt() * 1.5;
    // The covering radius is half the angular gap in the 2D sense.
    2.0 * (worst + resolution)
}

pub fn build_stencil(dim: usize, k: usize) -> Result<Stencil> {
    if !(2..=3).contains(&dim) {
        return Err(Error::Parameter(format!(
            "stencil dimension must be 2 or 3, got {dim}"
        )));
    }
    if !(1..=6).contains(&k) {
        return Err(Error::Parameter(format!(
            "stencil radius must be in 1..=6, got {k}"
        )));
    }
    let offsets = coprime_offsets(dim, k);
    let max_angular_gap = if dim == 2 {
        max_gap_2d(&offsets)
    } else {
        max_gap_sampled(&offsets, dim)
    };
    let chordal_error = 1.0 - (max_angular_gap / 2.0).cos();
    Ok(Stencil {
        dim,
        k,
        offsets,
        max_angular_gap,
        chordal_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dim_counts_and_axes() {
        let s = build_stencil(2, 3).unwrap();
        assert_eq!(s.offsets.len(), 32);
        for axis in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert!(s.offsets.iter().any(|v| v[0] == axis[0] && v[1] == axis[1]));
        }
        // No offset shares a common factor.
        assert!(!s.offsets.iter().any(|v| v[0] == 2 && v[1] == 2));
    }

    #[test]
    fn two_dim_gap_is_the_first_farey_angle() {
        // Largest hole at k=3 is between (1,0) and (3,1): atan(1/3).
        let s = build_stencil(2, 3).unwrap();
        let expect = (1f64 / 3.0).atan();
        assert!((s.max_angular_gap - expect).abs() < 1e-12);
        assert!((s.chordal_error - 0.012922).abs() < 1e-4);

        let s1 = build_stencil(2, 1).unwrap();
        assert_eq!(s1.offsets.len(), 8);
        assert!((s1.max_angular_gap - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn stencils_nest_in_k() {
        let small = build_stencil(2, 2).unwrap();
        let large = build_stencil(2, 3).unwrap();
        for v in &small.offsets {
            assert!(large.offsets.contains(v));
        }
        assert!(large.max_angular_gap < small.max_angular_gap);
    }

    #[test]
    fn three_dim_gap_is_padded_but_reasonable() {
        let s = build_stencil(3, 2).unwrap();
        assert_eq!(s.offsets.len(), 98);
        // Padded sampling estimate lands near 0.67 rad for k=2 and shrinks
        // when k grows; chordal error stays in single-digit percent.
        assert!(s.max_angular_gap > 0.3 && s.max_angular_gap < 0.8);
        assert!(s.chordal_error < 0.08);
        let s3 = build_stencil(3, 3).unwrap();
        assert!(s3.max_angular_gap < s.max_angular_gap);
        assert!(s3.chordal_error < 0.04);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_stencil(1, 3).is_err());
        assert!(build_stencil(4, 3).is_err());
        assert!(build_stencil(2, 0).is_err());
        assert!(build_stencil(2, 9).is_err());
    }
}
