//! Dyadic ball hierarchies on the unit cube and the induced conformal factor.
//!
//! Level `m` places balls of radius `r_m` at the grid `2^{-(m+1)}ℤ^{d-1} ∩ (0,1)^{d-1}`,
//! skipping points already covered by earlier levels. Inside a ball the
//! conformal factor ramps radially from 1 to 2 through the quintic profile
//! `η`; outside every ball it is 2. Radii follow a verified geometric
//! schedule `R_m = c₀·2^{-am}`; every certificate reduces to closed-form
//! geometric sums, so pass/fail is not a matter of floating-point luck.

use std::collections::HashSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use crate::exact;
use crate::quad;
use crate::smooth::{smoothstep5, smoothstep5_deriv};
use crate::{Error, Result};

/// Largest supported ambient dimension; grid keys are fixed-size arrays.
pub const MAX_DIM: usize = 5;

/// Total center budget across all levels.
pub const MAX_CENTERS: usize = 2_000_000;

/// Grid point in scaled integer coordinates (unused axes stay zero).
pub type GridKey = [i64; 4];

/// Volume of the unit ball in ℝ^k.
pub fn unit_ball_volume(k: usize) -> f64 {
    let mut vols = [0.0f64; 8];
    vols[0] = 1.0;
    vols[1] = 2.0;
    for i in 2..=k.min(7) {
        vols[i] = vols[i - 2] * 2.0 * std::f64::consts::PI / i as f64;
    }
    assert!(k < 8, "unit_ball_volume supports k < 8");
    vols[k]
}

/// Surface measure of the unit sphere S^{k-1} ⊂ ℝ^k.
pub fn sphere_surface(k: usize) -> f64 {
    k as f64 * unit_ball_volume(k)
}

/// Radial profile `η: [0,∞) → [1,2]`: 1 on `[0,1/2]`, 2 on `[3/4,∞)`,
/// quintic ramp between. C² everywhere.
pub struct EtaProfile;

impl EtaProfile {
    pub fn eval(t: f64) -> f64 {
        1.0 + smoothstep5(4.0 * t - 2.0)
    }

    pub fn deriv(t: f64) -> f64 {
        4.0 * smoothstep5_deriv(4.0 * t - 2.0)
    }
}

/// One verified summability condition of a radius schedule.
#[derive(Clone, Debug)]
pub struct ConditionCheck {
    pub id: &'static str,
    /// Closed-form value of the governed series (or sup).
    pub lhs: f64,
    /// Bound the series must stay below.
    pub rhs: f64,
    pub pass: bool,
}

/// Closed-form verification record for a geometric radius schedule.
#[derive(Clone, Debug)]
pub struct ScheduleCertificate {
    pub d: usize,
    pub p: f64,
    pub a: u32,
    pub c0_log2: i32,
    pub conditions: Vec<ConditionCheck>,
    pub all_pass: bool,
    /// Partial sums `B_j = Σ_{i≤j} 2^{(i+1)(d-1)} R_i^{d-1-p}`, the comparison
    /// series for the gradient seminorms of the level profiles.
    pub seminorm_bound_partials: Vec<f64>,
}

/// A geometric radius schedule `R_m = c₀·2^{-am}` with its certificate.
#[derive(Clone, Debug)]
pub struct RadiusSchedule {
    pub d: usize,
    pub p: f64,
    pub a: u32,
    pub c0_log2: i32,
    pub levels: usize,
    /// `R_1 … R_levels` as exact dyadic rationals.
    pub big_r: Vec<BigRational>,
    pub certificate: ScheduleCertificate,
}

fn validate_dim_p(d: usize, p: f64) -> Result<()> {
    if !(3..=MAX_DIM).contains(&d) {
        return Err(Error::Parameter(format!(
            "dimension must lie in [3, {MAX_DIM}], got {d}"
        )));
    }
    if !p.is_finite() || p < 1.0 {
        return Err(Error::Parameter(format!("integrability exponent must be ≥ 1, got {p}")));
    }
    if p >= (d - 1) as f64 {
        return Err(Error::Parameter(format!(
            "integrability exponent must be strictly below d-1 = {}, got {p}",
            d - 1
        )));
    }
    Ok(())
}

/// Verifies `R_m = 2^{c0_log2}·2^{-am}` against the four summability
/// conditions. All series are geometric, so sums are closed-form.
pub fn verify_geometric_schedule(
    d: usize,
    p: f64,
    c0_log2: i32,
    a: u32,
    levels: usize,
) -> Result<ScheduleCertificate> {
    validate_dim_p(d, p)?;
    if a == 0 || levels == 0 {
        return Err(Error::Parameter("need a ≥ 1 and at least one level".into()));
    }
    let df = d as f64;
    let af = a as f64;
    let c0f = c0_log2 as f64;
    let q = (d - 1) as f64 - p;
    let mut conditions = Vec::new();

    // sup_m R_m·2^{m+3} ≤ 1, attained at m = 1 since a ≥ 1.
    let radius_ok = c0_log2 + 4 <= a as i32;
    conditions.push(ConditionCheck {
        id: "radius-vs-step",
        lhs: (c0f - af + 4.0).exp2(),
        rhs: 1.0,
        pass: radius_ok,
    });

    // Σ 2^{md} R_m^{d-1-p}: ratio 2^{d-aq}, must be finite.
    let vol_ratio_log2 = df - af * q;
    let vol_sum = if vol_ratio_log2 < 0.0 {
        let t1 = (q * c0f + df - af * q).exp2();
        t1 / (1.0 - vol_ratio_log2.exp2())
    } else {
        f64::INFINITY
    };
    conditions.push(ConditionCheck {
        id: "volume-series",
        lhs: vol_sum,
        rhs: f64::INFINITY,
        pass: vol_sum.is_finite(),
    });

    // Σ 2^{(m+1)d+4} R_m < 1/(4(1+ω_{d-1})).
    let diam_bound = 1.0 / (4.0 * (1.0 + unit_ball_volume(d - 1)));
    let diam_ratio_log2 = df - af;
    let diam_sum = if diam_ratio_log2 < 0.0 {
        let u1 = (2.0 * df + 4.0 + c0f - af).exp2();
        u1 / (1.0 - diam_ratio_log2.exp2())
    } else {
        f64::INFINITY
    };
    conditions.push(ConditionCheck {
        id: "diameter-sum",
        lhs: diam_sum,
        rhs: diam_bound,
        pass: diam_sum < diam_bound,
    });

    // ω_{d-1} Σ 2^{(m+1)(d-1)+1} R_m^{d-1} ≤ 1/4: the covered fraction of the cube.
    let k = (d - 1) as f64;
    let area_ratio_log2 = k * (1.0 - af);
    let area_sum = if area_ratio_log2 < 0.0 {
        let v1 = unit_ball_volume(d - 1) * (2.0 * k + 1.0 + (c0f - af) * k).exp2();
        v1 / (1.0 - area_ratio_log2.exp2())
    } else {
        f64::INFINITY
    };
    conditions.push(ConditionCheck {
        id: "union-area",
        lhs: area_sum,
        rhs: 0.25,
        pass: area_sum <= 0.25,
    });

    let all_pass = conditions.iter().all(|c| c.pass);
    let mut partials = Vec::with_capacity(levels);
    let mut acc = 0.0;
    for i in 1..=levels {
        acc += (((i + 1) * (d - 1)) as f64 + q * (c0f - af * i as f64)).exp2();
        partials.push(acc);
    }

    Ok(ScheduleCertificate {
        d,
        p,
        a,
        c0_log2,
        conditions,
        all_pass,
        seminorm_bound_partials: partials,
    })
}

/// Picks the decay exponent `a = d + 1 + ⌈d/(d-1-p)⌉` and halves `c₀` from 1
/// until every condition passes.
pub fn radius_schedule(d: usize, p: f64, levels: usize) -> Result<RadiusSchedule> {
    validate_dim_p(d, p)?;
    if levels == 0 {
        return Err(Error::Parameter("need at least one level".into()));
    }
    let gap = (d - 1) as f64 - p;
    let extra = (d as f64 / gap).ceil();
    if !(extra.is_finite() && extra <= 48.0) {
        return Err(Error::Parameter(format!(
            "exponent {p} is too close to d-1 = {}; decay exponent would overflow",
            d - 1
        )));
    }
    let a = (d + 1) as u32 + extra as u32;

    for c0_log2 in (-64..=0).rev() {
        let certificate = verify_geometric_schedule(d, p, c0_log2, a, levels)?;
        if certificate.all_pass {
            let big_r = (1..=levels)
                .map(|m| exact::dyadic((a as i64 * m as i64 - c0_log2 as i64) as u32))
                .collect();
            return Ok(RadiusSchedule { d, p, a, c0_log2, levels, big_r, certificate });
        }
    }
    Err(Error::Parameter(
        "no power-of-two scale below 2^-64 satisfies the schedule conditions".into(),
    ))
}

/// The centers of one hierarchy level in scaled integer coordinates.
#[derive(Clone, Debug)]
pub struct LevelSet {
    /// 1-based level index.
    pub m: usize,
    /// Grid step is `2^{-scale_log2}` with `scale_log2 = m + 1`.
    pub scale_log2: u32,
    pub centers: Vec<GridKey>,
    pub lookup: HashSet<GridKey>,
    /// Ball radius, exact and mirrored.
    pub r: BigRational,
    pub r_f64: f64,
    /// True when the separation rule cut `r` below `min(R_m, r_{m-1}/2)`.
    pub dist_bound_applied: bool,
}

/// A built hierarchy: levels of disjoint closed balls plus the schedule.
#[derive(Clone, Debug)]
pub struct SobolevHierarchy {
    pub d: usize,
    pub p: f64,
    pub schedule: RadiusSchedule,
    pub levels: Vec<LevelSet>,
}

/// A ball of the hierarchy located by a spatial query.
#[derive(Clone, Copy, Debug)]
pub struct BallRef {
    /// 0-based index into `levels`.
    pub level: usize,
    pub key: GridKey,
    pub center: [f64; 4],
    pub r: f64,
}

/// Certificate that a rational point avoids the closed balls of every level,
/// including the infinite tail beyond the built truncation.
#[derive(Clone, Copy, Debug)]
pub struct SCertificate {
    /// Levels verified by exact nearest-grid-point comparison.
    pub in_s_up_to_level: usize,
    /// True when some coordinate has an odd denominator part > 1 whose
    /// grid-distance lower bound beats every tail radius.
    pub tail_safe: bool,
}

impl SCertificate {
    pub fn certified(&self, levels: usize) -> bool {
        self.in_s_up_to_level >= levels && self.tail_safe
    }
}

fn rpow(r: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= r;
    }
    acc
}

fn pow2_rational(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as u64)
    } else {
        exact::dyadic((-e) as u32)
    }
}

/// Builds the hierarchy for a schedule whose certificate passes.
pub fn build_hierarchy(schedule: &RadiusSchedule) -> Result<SobolevHierarchy> {
    if !schedule.certificate.all_pass {
        return Err(Error::Parameter(
            "refusing to build from a schedule whose certificate fails".into(),
        ));
    }
    let d = schedule.d;
    let g = d - 1;
    let mut levels: Vec<LevelSet> = Vec::with_capacity(schedule.levels);
    let mut total_centers = 0usize;

    for m in 1..=schedule.levels {
        let scale_log2 = (m + 1) as u32;
        let n = (1i64 << scale_log2) - 1;
        let per_axis = n as usize;
        let level_count = per_axis.saturating_pow(g as u32);
        total_centers = total_centers.saturating_add(level_count);
        if total_centers > MAX_CENTERS {
            return Err(Error::Resource {
                message: format!("hierarchy center budget of {MAX_CENTERS} exceeded"),
                reached: m,
            });
        }

        // Keys of grid points swallowed by earlier closed balls. For each
        // earlier center, enumerate this level's grid points within its
        // radius; with verified schedules the window is the center itself.
        let mut excluded: HashSet<GridKey> = HashSet::new();
        for earlier in &levels {
            let shift = (scale_log2 - earlier.scale_log2) as u32;
            let rs = &earlier.r * pow2_rational(scale_log2 as i64);
            let omax = rs.floor().to_integer().to_i64().unwrap_or(0);
            let rs_sq = &rs * &rs;
            for key in &earlier.centers {
                let mut base = [0i64; 4];
                for i in 0..g {
                    base[i] = key[i] << shift;
                }
                if omax == 0 {
                    excluded.insert(base);
                    continue;
                }
                let mut offset = [0i64; 4];
                for i in 0..g {
                    offset[i] = -omax;
                }
                'offsets: loop {
                    let ssq: i64 = offset[..g].iter().map(|o| o * o).sum();
                    if BigRational::from_integer(BigInt::from(ssq)) <= rs_sq {
                        let mut kk = base;
                        let mut in_range = true;
                        for i in 0..g {
                            kk[i] += offset[i];
                            in_range &= kk[i] >= 1 && kk[i] <= n;
                        }
                        if in_range {
                            excluded.insert(kk);
                        }
                    }
                    let mut axis = g;
                    loop {
                        if axis == 0 {
                            break 'offsets;
                        }
                        axis -= 1;
                        offset[axis] += 1;
                        if offset[axis] <= omax {
                            break;
                        }
                        offset[axis] = -omax;
                    }
                }
            }
        }

        let mut centers = Vec::new();
        let mut key = [0i64; 4];
        for i in 0..g {
            key[i] = 1;
        }
        'grid: loop {
            if !excluded.contains(&key) {
                centers.push(key);
            }
            let mut axis = g;
            loop {
                if axis == 0 {
                    break 'grid;
                }
                axis -= 1;
                key[axis] += 1;
                if key[axis] <= n {
                    break;
                }
                key[axis] = 1;
            }
        }

        // Radius rule: min(R_m, r_{m-1}/2), then shrink until every earlier
        // ball keeps twice this radius of clearance.
        let mut cand = schedule.big_r[m - 1].clone();
        if let Some(prev) = levels.last() {
            let half_prev = &prev.r / BigRational::from_integer(BigInt::from(2));
            if half_prev < cand {
                cand = half_prev;
            }
        }
        let base_cand = cand.clone();
        let step = exact::dyadic(scale_log2);
        let two = BigRational::from_integer(BigInt::from(2));
        for earlier in &levels {
            // Distinct points of this level's grid are at least one step
            // apart, which also separates D_m from coarser centers.
            if &two * &cand + &earlier.r <= step {
                continue;
            }
            let shift = (scale_log2 - earlier.scale_log2) as u32;
            let mut min_sq: Option<i64> = None;
            for a_key in &centers {
                for b_key in &earlier.centers {
                    let mut s = 0i64;
                    for i in 0..g {
                        let diff = a_key[i] - (b_key[i] << shift);
                        s += diff * diff;
                    }
                    min_sq = Some(min_sq.map_or(s, |t| t.min(s)));
                }
            }
            if let Some(min_sq) = min_sq {
                let min_sq =
                    BigRational::new(BigInt::from(min_sq), BigInt::one() << (2 * scale_log2 as u64));
                let mut guard = 0;
                loop {
                    let need = &two * &cand + &earlier.r;
                    if &need * &need <= min_sq {
                        break;
                    }
                    cand /= &two;
                    guard += 1;
                    if guard > 256 {
                        return Err(Error::Parameter("separation rule failed to converge".into()));
                    }
                }
            }
        }
        let dist_bound_applied = cand < base_cand;

        // Same-level disjointness: 2r ≤ step/2 < step, guaranteed by the
        // radius-vs-step condition.
        debug_assert!(&two * &cand <= step);

        let r_f64 = exact::to_f64(&cand);
        let lookup: HashSet<GridKey> = centers.iter().copied().collect();
        levels.push(LevelSet {
            m,
            scale_log2,
            centers,
            lookup,
            r: cand,
            r_f64,
            dist_bound_applied,
        });
    }

    Ok(SobolevHierarchy { d, p: schedule.p, schedule: schedule.clone(), levels })
}

impl SobolevHierarchy {
    /// Grid dimension `d − 1`.
    pub fn grid_dim(&self) -> usize {
        self.d - 1
    }

    /// Center coordinates of a ball as f64.
    pub fn center_f64(&self, level: usize, key: &GridKey) -> [f64; 4] {
        let scale = (1u64 << self.levels[level].scale_log2) as f64;
        let mut c = [0.0f64; 4];
        for i in 0..self.grid_dim() {
            c[i] = key[i] as f64 / scale;
        }
        c
    }

    /// Center coordinates of a ball as exact rationals.
    pub fn center_exact(&self, level: usize, key: &GridKey) -> Vec<BigRational> {
        let s = self.levels[level].scale_log2;
        (0..self.grid_dim())
            .map(|i| BigRational::new(BigInt::from(key[i]), BigInt::one() << s as u64))
            .collect()
    }

    /// Conformal factor at `y ∈ ℝ^{d-1}`: `η(5·dist/r)` inside the unique
    /// ball whose profile support contains `y`, otherwise 2.
    ///
    /// The profile drops below 2 only within `3r/20` of a center, far less
    /// than half a grid step, so only the nearest grid point per level can
    /// match and the first hit wins.
    pub fn theta3_eval(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.grid_dim());
        let g = self.grid_dim();
        for lv in &self.levels {
            let scale = (1u64 << lv.scale_log2) as f64;
            let support = 0.15 * lv.r_f64;
            let mut key = [0i64; 4];
            let mut dist_sq = 0.0f64;
            let mut hit = true;
            for i in 0..g {
                let k = (y[i] * scale).round();
                let dx = y[i] - k / scale;
                if dx.abs() > support {
                    hit = false;
                    break;
                }
                key[i] = k as i64;
                dist_sq += dx * dx;
            }
            if !hit || dist_sq > support * support {
                continue;
            }
            if lv.lookup.contains(&key) {
                return EtaProfile::eval(5.0 * dist_sq.sqrt() / lv.r_f64);
            }
        }
        2.0
    }

    /// Balls whose profile support box meets the axis box `[x − pad, x + pad]`.
    pub fn balls_near(&self, x: &[f64], pad: f64) -> Vec<BallRef> {
        debug_assert_eq!(x.len(), self.grid_dim());
        let g = self.grid_dim();
        let mut out = Vec::new();
        for (li, lv) in self.levels.iter().enumerate() {
            let scale = (1u64 << lv.scale_log2) as f64;
            let n = (1i64 << lv.scale_log2) - 1;
            let reach = pad + 0.15 * lv.r_f64;
            let mut lo = [0i64; 4];
            let mut hi = [0i64; 4];
            let mut empty = false;
            for i in 0..g {
                lo[i] = (((x[i] - reach) * scale).ceil() as i64).max(1);
                hi[i] = (((x[i] + reach) * scale).floor() as i64).min(n);
                empty |= lo[i] > hi[i];
            }
            if empty {
                continue;
            }
            let mut key = lo;
            'cells: loop {
                if lv.lookup.contains(&key) {
                    out.push(BallRef {
                        level: li,
                        key,
                        center: self.center_f64(li, &key),
                        r: lv.r_f64,
                    });
                }
                let mut axis = g;
                loop {
                    if axis == 0 {
                        break 'cells;
                    }
                    axis -= 1;
                    key[axis] += 1;
                    if key[axis] <= hi[axis] {
                        break;
                    }
                    key[axis] = lo[axis];
                }
            }
        }
        out
    }

    /// Exact certificate that `y ∈ (0,1)^{d-1}` clears every closed ball.
    ///
    /// Built levels use the nearest grid point: if even it is farther than
    /// `r_m`, every center is; if it is within `r_m` but not a center, all
    /// actual centers are at least a step minus `r_m` away, which exceeds
    /// `r_m`. The tail uses the denominator bound
    /// `dist(a/b, 2^{-(m+1)}ℤ) ≥ 1/(b₀·2^{max(m+1, e)})` for `b = b₀·2^e`
    /// with `b₀ > 1` odd, against the scheduled tail radii `R_m`.
    pub fn certify_in_s(&self, y: &[BigRational]) -> Result<SCertificate> {
        let g = self.grid_dim();
        if y.len() != g {
            return Err(Error::Parameter(format!(
                "expected {g} coordinates, got {}",
                y.len()
            )));
        }
        for c in y {
            if !(c > &BigRational::zero() && c < &BigRational::one()) {
                return Err(Error::Parameter(format!(
                    "coordinate {} lies outside (0,1)",
                    exact::format(c)
                )));
            }
        }
        let half = exact::dyadic(1);
        for (li, lv) in self.levels.iter().enumerate() {
            let scale = pow2_rational(lv.scale_log2 as i64);
            let mut dist_sq = BigRational::zero();
            let mut key = [0i64; 4];
            let mut key_ok = true;
            for i in 0..g {
                let k = (&y[i] * &scale + &half).floor().to_integer();
                let dx = &y[i] - BigRational::new(k.clone(), BigInt::one() << lv.scale_log2 as u64);
                dist_sq += &dx * &dx;
                match k.to_i64() {
                    Some(v) => key[i] = v,
                    None => key_ok = false,
                }
            }
            if dist_sq <= &lv.r * &lv.r && key_ok && lv.lookup.contains(&key) {
                return Ok(SCertificate { in_s_up_to_level: li, tail_safe: false });
            }
        }

        let levels = self.schedule.levels as i64;
        let a = self.schedule.a as i64;
        let c0 = self.schedule.c0_log2 as i64;
        let mut tail_safe = false;
        for c in y {
            let (odd, den) = exact::denominator_odd_part(c);
            if odd.is_one() {
                continue;
            }
            let e = (&den / &odd).trailing_zeros().unwrap_or(0) as i64;
            // For levels+1 ≤ m ≤ e−2 the grid-distance floor is 1/(b₀·2^e);
            // R_m decreases, so the first such m decides.
            let mut ok = true;
            if levels + 1 <= e - 2 {
                let exp = a * (levels + 1) - c0 - e;
                ok &= exp > 0 && odd < (BigInt::one() << exp as u64);
            }
            // For m ≥ max(levels+1, e−1) the floor is 1/(b₀·2^{m+1}) and
            // b₀·2^{m+1}·R_m shrinks geometrically; the first m decides.
            let m_star = (levels + 1).max(e - 1);
            let exp = a * m_star - c0 - (m_star + 1);
            ok &= exp > 0 && odd < (BigInt::one() << exp as u64);
            if ok {
                tail_safe = true;
                break;
            }
        }

        Ok(SCertificate { in_s_up_to_level: self.levels.len(), tail_safe })
    }

    /// Exact counts `ζ_m = #{x ∈ D_m : |y − x| ≤ r + r_m/5}`.
    ///
    /// The comparison radius uses the inner plateau `r_m/5`, the region where
    /// the profile argument stays below 1.
    pub fn zeta_counts(&self, y: &[BigRational], r: &BigRational) -> Vec<usize> {
        let g = self.grid_dim();
        debug_assert_eq!(y.len(), g);
        let yf: Vec<f64> = y.iter().map(exact::to_f64).collect();
        let five = BigRational::from_integer(BigInt::from(5));
        let mut counts = Vec::with_capacity(self.levels.len());
        for lv in &self.levels {
            let threshold = r + &lv.r / &five;
            let threshold_sq = &threshold * &threshold;
            let tf = exact::to_f64(&threshold) + 1e-9;
            let scale = (1u64 << lv.scale_log2) as f64;
            let mut count = 0usize;
            for key in &lv.centers {
                let mut dsf = 0.0f64;
                for i in 0..g {
                    let dx = yf[i] - key[i] as f64 / scale;
                    dsf += dx * dx;
                }
                if dsf > tf * tf {
                    continue;
                }
                let mut ds = BigRational::zero();
                for i in 0..g {
                    let dx = &y[i]
                        - BigRational::new(BigInt::from(key[i]), BigInt::one() << lv.scale_log2 as u64);
                    ds += &dx * &dx;
                }
                if ds <= threshold_sq {
                    count += 1;
                }
            }
            counts.push(count);
        }
        counts
    }

    /// `(Σ_m r_m ζ_m / r, Σ_m r_m^{d-1} ζ_m / r^{d-1})`, both vanishing as
    /// `r ↓ 0` at points that clear every ball.
    pub fn shrinking_ball_sums(&self, y: &[BigRational], r: &BigRational) -> (f64, f64) {
        let counts = self.zeta_counts(y, r);
        let g = self.grid_dim();
        let mut s1 = BigRational::zero();
        let mut s2 = BigRational::zero();
        for (lv, &count) in self.levels.iter().zip(&counts) {
            let c = BigRational::from_integer(BigInt::from(count as i64));
            s1 += &lv.r * &c;
            s2 += rpow(&lv.r, g) * &c;
        }
        s1 /= r;
        s2 /= rpow(r, g);
        (exact::to_f64(&s1), exact::to_f64(&s2))
    }

    /// `∫ |∇ψ_j|^p` over the slab, via the per-ball polar closed form
    /// `|D_j| · 5^{p-d+1} r_j^{d-1-p} · σ_{d-2} ∫_{1/2}^{3/4} |η'(t)|^p t^{d-2} dt`.
    pub fn sobolev_seminorm_psi(&self, j: usize, p: f64) -> Result<f64> {
        if j == 0 || j > self.levels.len() {
            return Err(Error::Parameter(format!("level {j} outside 1..={}", self.levels.len())));
        }
        if !p.is_finite() || p < 1.0 {
            return Err(Error::Parameter(format!("exponent must be ≥ 1, got {p}")));
        }
        let lv = &self.levels[j - 1];
        let count = lv.centers.len() as f64;
        debug_assert!(
            lv.centers.len() as u64 <= 1u64 << ((j + 1) * (self.d - 1)),
            "level population exceeded its grid bound"
        );
        Ok(count * seminorm_profile_constant(self.d, p) * lv.r_f64.powf((self.d - 1) as f64 - p))
    }
}

/// `5^{p-d+1} · σ_{d-2} ∫_{1/2}^{3/4} |η'(t)|^p t^{d-2} dt`: the per-ball
/// seminorm integral divided by `r^{d-1-p}`.
pub fn seminorm_profile_constant(d: usize, p: f64) -> f64 {
    let radial = quad::gl_interval(
        |t| EtaProfile::deriv(t).abs().powf(p) * t.powi((d - 2) as i32),
        0.5,
        0.75,
        64,
    );
    5.0f64.powf(p - (d - 1) as f64) * sphere_surface(d - 1) * radial
}
