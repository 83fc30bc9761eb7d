//! Rational interval covers on the line and the induced conformal factor.
//!
//! A cover is a finite truncation of `O = ∪_i (q_i − κ·2^{-i}, q_i + κ·2^{-i})`
//! where `q_1, q_2, …` enumerates the rationals of the chosen scope. The
//! conformal factor is `θ = 2 − 1_O`, so `θ = 1` on the cover and `2` off it.
//! All interval arithmetic is exact rational; f64 mirrors exist for hot paths.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::exact;
use crate::{Error, Result};

/// Which set of rationals the enumeration walks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverScope {
    /// All of ℚ: `0, +c_1, −c_1, +c_2, −c_2, …` with `c_k` the Calkin–Wilf walk.
    Line,
    /// ℚ ∩ (0,1): the Calkin–Wilf walk filtered to values below one.
    UnitInterval,
}

impl CoverScope {
    pub fn enumeration_id(self) -> &'static str {
        match self {
            CoverScope::Line => "calkin-wilf-line-v1",
            CoverScope::UnitInterval => "calkin-wilf-unit-v1",
        }
    }
}

/// Closed-form state walk over the positive rationals, each visited once.
///
/// `x_{n+1} = 1 / (2⌊x_n⌋ + 1 − x_n)`, starting from 1.
#[derive(Clone, Debug)]
pub struct CalkinWilf {
    state: BigRational,
}

impl CalkinWilf {
    pub fn new() -> Self {
        CalkinWilf { state: BigRational::one() }
    }
}

impl Default for CalkinWilf {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for CalkinWilf {
    type Item = BigRational;

    fn next(&mut self) -> Option<BigRational> {
        let current = self.state.clone();
        let floor = self.state.floor();
        let two = BigRational::from_integer(BigInt::from(2));
        self.state = (two * floor + BigRational::one() - &self.state).recip();
        Some(current)
    }
}

/// Enumeration of all of ℚ: zero first, then sign-interleaved positives.
struct LineRationals {
    walk: CalkinWilf,
    queued_negative: Option<BigRational>,
    emitted_zero: bool,
}

impl Iterator for LineRationals {
    type Item = BigRational;

    fn next(&mut self) -> Option<BigRational> {
        if !self.emitted_zero {
            self.emitted_zero = true;
            return Some(BigRational::zero());
        }
        if let Some(neg) = self.queued_negative.take() {
            return Some(neg);
        }
        let q = self.walk.next().expect("walk is infinite");
        self.queued_negative = Some(-q.clone());
        Some(q)
    }
}

/// The rationals of a scope in enumeration order.
pub fn rationals(scope: CoverScope) -> Box<dyn Iterator<Item = BigRational>> {
    match scope {
        CoverScope::Line => Box::new(LineRationals {
            walk: CalkinWilf::new(),
            queued_negative: None,
            emitted_zero: false,
        }),
        CoverScope::UnitInterval => {
            Box::new(CalkinWilf::new().filter(|q| q < &BigRational::one()))
        }
    }
}

/// An open interval with exact rational endpoints, `lo < hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo < x && x < &self.hi
    }
}

/// A truncated rational cover together with its merged form and exact measure.
#[derive(Clone, Debug)]
pub struct RationalCover {
    pub kappa: BigRational,
    pub scope: CoverScope,
    pub depth: usize,
    /// Interval `i` is centered at the `i`-th enumerated rational, radius `κ·2^{-i}`.
    pub intervals: Vec<Interval>,
    /// Sorted, pairwise disjoint intervals with the same union as `intervals`.
    pub merged: Vec<Interval>,
    pub merged_measure: BigRational,
    merged_f64: Vec<(f64, f64)>,
}

/// Builds the depth-`depth` truncation of the cover for `κ ∈ (0, 1/8)`.
pub fn build_rational_cover(
    kappa: &BigRational,
    depth: usize,
    scope: CoverScope,
) -> Result<RationalCover> {
    let eighth = exact::dyadic(3);
    if !(kappa > &BigRational::zero() && kappa < &eighth) {
        return Err(Error::Parameter(format!(
            "kappa must lie strictly between 0 and 1/8, got {}",
            kappa
        )));
    }

    let mut intervals = Vec::with_capacity(depth);
    let mut radius = kappa / BigRational::from_integer(BigInt::from(2));
    for q in rationals(scope).take(depth) {
        intervals.push(Interval { lo: &q - &radius, hi: &q + &radius });
        radius /= BigRational::from_integer(BigInt::from(2));
    }

    let merged = merge_intervals(&intervals);
    let merged_measure: BigRational = merged.iter().map(Interval::length).sum();
    let merged_f64 = merged
        .iter()
        .map(|iv| (exact::to_f64(&iv.lo), exact::to_f64(&iv.hi)))
        .collect();

    Ok(RationalCover {
        kappa: kappa.clone(),
        scope,
        depth,
        intervals,
        merged,
        merged_measure,
        merged_f64,
    })
}

impl RationalCover {
    /// Cover with hand-picked intervals; merging and caches are rebuilt.
    pub fn from_pieces(kappa: BigRational, scope: CoverScope, pieces: Vec<Interval>) -> Self {
        let merged = merge_intervals(&pieces);
        let merged_measure: BigRational = merged.iter().map(Interval::length).sum();
        let merged_f64 = merged
            .iter()
            .map(|iv| (exact::to_f64(&iv.lo), exact::to_f64(&iv.hi)))
            .collect();
        RationalCover {
            kappa,
            scope,
            depth: pieces.len(),
            intervals: pieces,
            merged,
            merged_measure,
            merged_f64,
        }
    }
}

/// Sweep-merge of strictly overlapping open intervals. Intervals that merely
/// touch at an endpoint stay separate: their union is not an interval, and the
/// junction point must keep `θ = 2`.
fn merge_intervals(intervals: &[Interval]) -> Vec<Interval> {
    if intervals.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<Interval> = intervals.to_vec();
    sorted.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));

    let mut merged: Vec<Interval> = Vec::new();
    for iv in sorted {
        match merged.last_mut() {
            Some(last) if iv.lo < last.hi => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => merged.push(iv),
        }
    }
    merged
}

impl RationalCover {
    /// Exact membership of `x` in the merged union.
    pub fn contains_exact(&self, x: &BigRational) -> bool {
        // Binary search on lo, then check the candidate interval.
        let idx = self.merged.partition_point(|iv| &iv.lo < x);
        idx > 0 && x < &self.merged[idx - 1].hi
    }

    /// Exact distance from `x` to the merged union (zero inside).
    pub fn distance_to_cover(&self, x: &BigRational) -> BigRational {
        if self.merged.is_empty() {
            // No intervals: conventionally infinite; callers only compare, so
            // return a large sentinel.
            return BigRational::from_integer(BigInt::from(u64::MAX));
        }
        if self.contains_exact(x) {
            return BigRational::zero();
        }
        let idx = self.merged.partition_point(|iv| &iv.lo < x);
        let mut best: Option<BigRational> = None;
        if idx > 0 {
            let gap = x - &self.merged[idx - 1].hi;
            best = Some(gap.abs());
        }
        if idx < self.merged.len() {
            let gap = &self.merged[idx].lo - x;
            let gap = gap.abs();
            best = Some(match best {
                Some(b) if b <= gap => b,
                _ => gap,
            });
        }
        best.expect("merged is nonempty")
    }

    /// Exact measure of `merged ∩ (a, b)`.
    pub fn measure_within(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let mut total = BigRational::zero();
        if a >= b {
            return total;
        }
        for iv in &self.merged {
            if &iv.hi <= a {
                continue;
            }
            if &iv.lo >= b {
                break;
            }
            let lo = if &iv.lo > a { iv.lo.clone() } else { a.clone() };
            let hi = if &iv.hi < b { iv.hi.clone() } else { b.clone() };
            if hi > lo {
                total += hi - lo;
            }
        }
        total
    }

    /// Merged intervals meeting `(a, b)`, as f64 pairs, for numeric sweeps.
    pub fn merged_f64_within(&self, a: f64, b: f64) -> &[(f64, f64)] {
        let start = self.merged_f64.partition_point(|&(_, hi)| hi <= a);
        let end = self.merged_f64.partition_point(|&(lo, _)| lo < b);
        &self.merged_f64[start..end.max(start)]
    }

    pub fn merged_f64(&self) -> &[(f64, f64)] {
        &self.merged_f64
    }
}

/// `θ(x) ∈ {1, 2}` from a cover: 1 on the merged union, 2 off it.
///
/// Exact on rational queries via [`theta1_eval_exact`]; the f64 entry point
/// classifies by the rounded endpoints and may flip within one ulp of an
/// interval boundary.
#[derive(Clone, Debug)]
pub struct ThetaField1D {
    pub cover: RationalCover,
}

impl ThetaField1D {
    pub fn new(cover: RationalCover) -> Self {
        ThetaField1D { cover }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mf = &self.cover.merged_f64;
        let idx = mf.partition_point(|&(lo, _)| lo < x);
        if idx > 0 && x < mf[idx - 1].1 {
            1.0
        } else {
            2.0
        }
    }

    pub fn eval_exact(&self, x: &BigRational) -> u8 {
        if self.cover.contains_exact(x) {
            1
        } else {
            2
        }
    }
}

/// Builds the θ field for a cover.
pub fn theta1_field(cover: RationalCover) -> ThetaField1D {
    ThetaField1D::new(cover)
}

/// Exact `L¹({θ = 2} ∩ (0,1)) = 1 − L¹(merged ∩ (0,1))`.
///
/// The total cover measure is at most `2κ < 1/4`, so the result is provably
/// at least `1 − 4κ`; that floor is asserted here.
pub fn measure_large_theta(cover: &RationalCover) -> BigRational {
    let inside = cover.measure_within(&BigRational::zero(), &BigRational::one());
    let large = BigRational::one() - inside;
    let four = BigRational::from_integer(BigInt::from(4));
    assert!(
        large >= BigRational::one() - four * &cover.kappa,
        "cover measure exceeded its geometric-series bound"
    );
    large
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse, ratio};
    use proptest::prelude::*;

    fn q(s: &str) -> BigRational {
        parse(s).unwrap()
    }

    #[test]
    fn walk_matches_known_prefix() {
        let got: Vec<BigRational> = CalkinWilf::new().take(15).collect();
        let want: Vec<BigRational> = [
            "1", "1/2", "2", "1/3", "3/2", "2/3", "3", "1/4", "4/3", "3/5", "5/2", "2/5",
            "5/3", "3/4", "4",
        ]
        .iter()
        .map(|s| q(s))
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn unit_scope_enumerates_unit_rationals() {
        let got: Vec<BigRational> = rationals(CoverScope::UnitInterval).take(8).collect();
        let want: Vec<BigRational> =
            ["1/2", "1/3", "2/3", "1/4", "3/5", "2/5", "3/4", "1/5"]
                .iter()
                .map(|s| q(s))
                .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn line_scope_interleaves_signs_after_zero() {
        let got: Vec<BigRational> = rationals(CoverScope::Line).take(9).collect();
        let want: Vec<BigRational> =
            ["0", "1", "-1", "1/2", "-1/2", "2", "-2", "1/3", "-1/3"]
                .iter()
                .map(|s| q(s))
                .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn line_scope_index_24_is_two_fifths() {
        let q24 = rationals(CoverScope::Line).nth(23).unwrap();
        assert_eq!(q24, q("2/5"));
    }

    #[test]
    fn depth_zero_is_empty() {
        let c = build_rational_cover(&ratio(1, 16), 0, CoverScope::UnitInterval).unwrap();
        assert!(c.merged.is_empty());
        assert!(c.merged_measure.is_zero());
        assert_eq!(measure_large_theta(&c), BigRational::one());
    }

    #[test]
    fn kappa_bounds_are_strict() {
        for bad in ["0", "1/8", "-1/16", "1/2"] {
            let r = build_rational_cover(&q(bad), 4, CoverScope::UnitInterval);
            assert!(r.is_err(), "kappa = {bad} should be rejected");
        }
        build_rational_cover(&q("1/9"), 4, CoverScope::UnitInterval).unwrap();
    }

    #[test]
    fn depth_8_unit_cover_measure_is_exact() {
        // The first 8 unit intervals are pairwise far apart relative to their
        // radii, so the merged measure is the plain geometric sum
        // Σ_{i=1..8} 2·(1/16)·2^{-i} = 255/2048.
        let c = build_rational_cover(&ratio(1, 16), 8, CoverScope::UnitInterval).unwrap();
        assert_eq!(c.merged.len(), 8);
        assert_eq!(c.merged_measure, q("255/2048"));
        assert_eq!(measure_large_theta(&c), q("1793/2048"));
    }

    #[test]
    fn theta_is_one_at_enumerated_centers() {
        let c = build_rational_cover(&ratio(1, 16), 8, CoverScope::UnitInterval).unwrap();
        let theta = theta1_field(c);
        assert_eq!(theta.eval_exact(&q("1/3")), 1);
        assert_eq!(theta.eval(1.0 / 3.0), 1.0);
        assert_eq!(theta.eval_exact(&q("1/5")), 1);
    }

    #[test]
    fn theta_is_two_far_from_the_cover() {
        let c = build_rational_cover(&ratio(1, 16), 8, CoverScope::UnitInterval).unwrap();
        let theta = theta1_field(c);
        assert_eq!(theta.eval(-5.0), 2.0);
        assert_eq!(theta.eval_exact(&q("-5")), 2);
        // Midpoint of the widest gap between early intervals.
        assert_eq!(theta.eval_exact(&q("9/10")), 2);
    }

    #[test]
    fn line_cover_distance_certificates() {
        let c = build_rational_cover(&ratio(1, 16), 24, CoverScope::Line).unwrap();
        // 2/5 is the 24th center; its radius is 2^{-4}·2^{-24} = 2^{-28}.
        // A point 10^{-5} to its right clears every interval.
        let x = q("2/5") + q("1/100000");
        assert!(!c.contains_exact(&x));
        let dist = c.distance_to_cover(&x);
        assert_eq!(dist, q("1/100000") - q("1/268435456"));
    }

    #[test]
    fn fine_grid_oracle_matches_exact_measure() {
        // Independent estimate of the merged measure: indicator sums on a
        // uniform grid. Each merged interval contributes at most two boundary
        // cells of error, so |grid − exact| ≤ 2·(#merged)·cell.
        let c = build_rational_cover(&ratio(1, 16), 10, CoverScope::UnitInterval).unwrap();
        let cells: u64 = 1 << 17;
        let cell = 1.0 / cells as f64;
        let mut covered = 0u64;
        for k in 0..cells {
            let x = (k as f64 + 0.5) * cell;
            let idx = c.merged_f64.partition_point(|&(lo, _)| lo < x);
            if idx > 0 && x < c.merged_f64[idx - 1].1 {
                covered += 1;
            }
        }
        let grid_measure = covered as f64 * cell;
        let exact_measure = exact::to_f64(&c.merged_measure);
        let slack = 2.0 * c.merged.len() as f64 * cell;
        assert!(
            (grid_measure - exact_measure).abs() <= slack,
            "grid {grid_measure} vs exact {exact_measure}, slack {slack}"
        );
    }

    proptest! {
        #[test]
        fn merged_cover_is_sorted_disjoint_and_small(
            num in 1u64..8, den_log2 in 4u32..9, depth in 0usize..40,
            line in proptest::bool::ANY,
        ) {
            let kappa = ratio(num as i64, 1 << den_log2);
            prop_assume!(kappa > BigRational::zero() && kappa < ratio(1, 8));
            let scope = if line { CoverScope::Line } else { CoverScope::UnitInterval };
            let c = build_rational_cover(&kappa, depth, scope).unwrap();

            for w in c.merged.windows(2) {
                prop_assert!(w[0].hi <= w[1].lo, "merged intervals out of order or overlapping");
            }
            let two = BigRational::from_integer(BigInt::from(2));
            prop_assert!(c.merged_measure <= two * &kappa);

            // Every raw interval sits inside a single merged interval.
            for iv in &c.intervals {
                let hit = c.merged.iter().any(|m| m.lo <= iv.lo && iv.hi <= m.hi);
                prop_assert!(hit, "raw interval escaped the merge");
            }

            // Raw total dominates the merged measure.
            let raw: BigRational = c.intervals.iter().map(Interval::length).sum();
            prop_assert!(c.merged_measure <= raw);
        }

        #[test]
        fn membership_agrees_with_interval_scan(
            num in 0i64..2000, depth in 1usize..24,
        ) {
            let kappa = ratio(1, 16);
            let c = build_rational_cover(&kappa, depth, CoverScope::UnitInterval).unwrap();
            let x = ratio(num, 1999);
            let scan = c.intervals.iter().any(|iv| iv.contains(&x));
            prop_assert_eq!(c.contains_exact(&x), scan);
        }
    }
}
