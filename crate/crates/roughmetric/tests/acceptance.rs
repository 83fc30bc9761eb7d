//! Acceptance gate: ten pinned checks, one test per check, with fixed
//! tolerances and wall-clock budgets. The harness prints one pass/fail
//! line per test; each test also prints the measured numbers under
//! `--nocapture`. Checks with a wall-clock budget serialize on a mutex
//! so the timings stay meaningful when tests run in parallel.

use std::f64::consts::SQRT_2;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use num::{BigRational, Signed, Zero};
use rand::Rng;

use roughmetric::calculus::{
    band_derivative_integral, check_weak_upper_gradient, fb_minimize, fb_minimize_numeric,
    make_test_plan, metric_speed, slope, transversal_fraction, truncate_band, Curve,
    PiecewiseLinear, PlanParams, SlabPlanParams, SpeedSource, WugVerdict,
};
use roughmetric::cheeger::{
    cheeger_energy, ex2_report, ex3_deficit_series, parallelogram_deficit, volume, Region,
    WugEvaluator,
};
use roughmetric::distance::{alpha_ex3, certified_bracket, distance_estimate, sigma_ex1, Stage};
use roughmetric::exact;
use roughmetric::fields::{
    build_hierarchy, build_rational_cover, radius_schedule, theta1_field, CoverScope, EtaProfile,
    MetricField, RationalCover,
};
use roughmetric::quad::adaptive_rect_2d;
use roughmetric::rng::SeedTree;

static HEAVY: Mutex<()> = Mutex::new(());

fn heavy() -> MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

fn channel_cover() -> RationalCover {
    build_rational_cover(&exact::ratio(1, 16), 24, CoverScope::Line).unwrap()
}

fn channel_field() -> MetricField {
    MetricField::ex1(2, theta1_field(channel_cover())).unwrap()
}

/// Five density points of {θ = 2} just outside the widest channel: the
/// channel at 2/5 has radius 2⁻²⁸, every other enumerated channel is
/// farther than 1e-4 away.
fn density_points() -> Vec<f64> {
    (1..=5).map(|k| 0.4 + k as f64 * 1e-5).collect()
}

fn column_field() -> MetricField {
    MetricField::ex3(build_hierarchy(&radius_schedule(3, 1.0, 4).unwrap()).unwrap())
}

#[test]
fn c01_channel_distance_bracket_hits_the_limit() {
    let _g = heavy();
    let t0 = Instant::now();
    let cover = channel_cover();
    let field = channel_field();
    let schedule = [
        Stage { eps: 0.008, h: 0.004 },
        Stage { eps: 0.004, h: 0.002 },
    ];
    let mut max_width = 0.0f64;
    for x in density_points() {
        assert_eq!(field.theta(&[x, 0.0]), 2.0, "base {x} must sit in the dense set");
        let density = sigma_ex1(&cover, x, 1e-4).unwrap();
        assert!(density <= 1e-2, "covered fraction {density} too large near {x}");

        let src = [x, 0.0];
        let dst = [x, 0.2];
        let q = distance_estimate(&field, &src, &dst, &schedule, 3).unwrap();
        let last = q.stages.last().unwrap();
        assert_eq!((last.eps, last.h), (0.004, 0.002));
        assert_eq!(q.lower_bound, 0.2, "dual witness must certify exactly 0.2");
        assert_eq!(q.lower_witness, "coordinate-1");
        assert!(q.lower_bound <= 0.2 && 0.2 <= q.upper_bound, "bracket misses 0.2");
        let width = q.upper_bound - q.lower_bound;
        assert!(width <= 0.02 * 0.2, "bracket width {width} above 2%");
        max_width = max_width.max(width);
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt <= 60.0, "channel queries took {dt:.1}s, budget 60s");
    println!(
        "[PASS] c01: 5 brackets contain 0.2, max width {max_width:.2e} (tol 4e-3), {dt:.1}s"
    );
}

#[test]
fn c02_metric_speed_separates_from_the_derivative_norm() {
    let field = channel_field();
    let mut max_upper = 0.0f64;
    for x in density_points() {
        let curve = Curve::straight(vec![x, 0.0], vec![0.0, 1.0]).unwrap();
        let b = metric_speed(&field, &curve, 0.0, &[0.2, 0.1, 0.05]).unwrap();
        let enorm = field.enorm(&[x, 0.0], &[0.0, 1.0]);
        assert!((enorm - SQRT_2).abs() < 1e-15);
        assert!(b.lower >= 1.0 - 1e-12, "speed lower edge {} below 1", b.lower);
        assert!(b.upper <= 1.02, "speed upper edge {} above 1.02", b.upper);
        assert!(enorm - b.upper >= 0.35, "separation below 0.35 at {x}");
        max_upper = max_upper.max(b.upper);
    }
    println!(
        "[PASS] c02: speed upper edge ≤ {max_upper:.5} while |γ'|_g = {SQRT_2:.4}, gap ≥ {:.3}",
        SQRT_2 - max_upper
    );
}

#[test]
fn c03_coordinate_slope_exceeds_the_wug_bound() {
    let field = channel_field();
    let bound = (2.0f64 / 3.0).sqrt();
    let mut min_lower = f64::INFINITY;
    for x in density_points() {
        let s = slope(&field, |p| p[1], &[x, 0.0], &[vec![0.0, 1.0]], &[0.2, 0.1, 0.05]).unwrap();
        assert!(s.lower >= 0.98, "slope lower edge {} below 0.98 at {x}", s.lower);
        assert!(s.lower > bound);
        min_lower = min_lower.min(s.lower);
    }
    println!(
        "[PASS] c03: slope lower edge ≥ {min_lower:.5} > √(2/3) = {bound:.4} (margin {:.3})",
        min_lower - bound
    );
}

#[test]
fn c04_wug_inequality_fails_on_the_slab_plan() {
    let _g = heavy();
    let t0 = Instant::now();
    let field = channel_field();
    let plan = make_test_plan(&field, &PlanParams::Slab(SlabPlanParams::default()), 10_000, 0xA4)
        .unwrap();
    let f = |p: &[f64]| p[1];
    let g = |p: &[f64]| field.theta(p).sqrt().recip();
    let chk = check_weak_upper_gradient(&field, &plan, f, g, SpeedSource::Alpha).unwrap();

    assert!((chk.lhs - 1.0).abs() <= 1e-3, "lhs {} not 1.000 ± 0.001", chk.lhs);
    let cap = (2.0f64 / 3.0).sqrt() + 0.01;
    assert!(chk.rhs <= cap, "rhs {} above {cap}", chk.rhs);
    let sigma = (chk.se_lhs * chk.se_lhs + chk.se_rhs * chk.se_rhs).sqrt().max(1e-12);
    assert!(chk.lhs - chk.rhs >= 5.0 * sigma, "separation below 5σ");
    assert_eq!(chk.verdict, WugVerdict::Violated);
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt <= 10.0, "wug check took {dt:.1}s, budget 10s");
    println!(
        "[PASS] c04: lhs {:.6} > rhs {:.6} on {} curves ({:.0}σ), verdict {}, {dt:.1}s",
        chk.lhs,
        chk.rhs,
        chk.curves,
        (chk.lhs - chk.rhs) / sigma,
        chk.verdict.as_str()
    );
}

#[test]
fn c05_profile_minimum_matches_the_closed_form() {
    let mut max_vdiff = 0.0f64;
    let mut max_cdiff = 0.0f64;
    for k in 0..=100 {
        let b = -5.0 + 0.1 * k as f64;
        let (_, v_closed) = fb_minimize(b);
        let (c_num, v_num) = fb_minimize_numeric(b).unwrap();
        let vdiff = (v_num - v_closed).abs();
        assert!(vdiff <= 1e-10, "value mismatch {vdiff} at b = {b}");
        max_vdiff = max_vdiff.max(vdiff);
        if b.abs() <= 1.0 {
            let cdiff = (c_num - b.abs()).abs();
            assert!(cdiff <= 1e-8, "minimizer mismatch {cdiff} at b = {b}");
            max_cdiff = max_cdiff.max(cdiff);
        }
    }
    println!(
        "[PASS] c05: 101 values match to {max_vdiff:.1e} (tol 1e-10), c* to {max_cdiff:.1e} (tol 1e-8)"
    );
}

#[test]
fn c06_interval_cover_deficit_is_exactly_minus_uncovered_mass() {
    let _g = heavy();
    let t0 = Instant::now();
    let kappa = exact::ratio(1, 16);
    let cover = build_rational_cover(&kappa, 24, CoverScope::UnitInterval).unwrap();
    let m = cover.measure_within(&exact::int(0), &exact::int(1));
    let field = MetricField::ex2(
        2,
        theta1_field(build_rational_cover(&kappa, 24, CoverScope::UnitInterval).unwrap()),
    )
    .unwrap();
    let rep = ex2_report(&field, 1e-6).unwrap();

    let deficit = exact::parse(rep.deficit.exact.as_deref().expect("deficit must be exact"))
        .unwrap();
    let predicted = &m - exact::int(1);
    assert_eq!(deficit, predicted, "deficit must equal covered mass minus one");
    assert_eq!(rep.deficit.error, 0.0);
    assert_eq!(rep.prediction.exact, rep.deficit.exact);
    assert!(deficit <= exact::ratio(-7, 8), "deficit above -(1 - 2κ) = -7/8");
    assert!(rep.deficit.value <= -0.875);
    assert_eq!(rep.verdict, "NON_HILBERTIAN");
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt <= 1.0, "interval report took {dt:.2}s, budget 1s");
    println!(
        "[PASS] c06: deficit exactly {} = {:.6} ≤ -0.875, verdict {}, {dt:.3}s",
        exact::format(&deficit),
        rep.deficit.value,
        rep.verdict
    );
}

#[test]
fn c07_column_distance_follows_the_alpha_law() {
    let _g = heavy();
    let t0 = Instant::now();
    let field = column_field();
    let h = match &field {
        MetricField::Ex3 { hierarchy } => hierarchy,
        _ => unreachable!(),
    };

    // Base points: finest-level ball centers nudged by 2⁻²⁰ along the
    // first transverse axis, certified to clear every built ball.
    let off = exact::dyadic(20);
    let off_f = 2f64.powi(-20);
    let last = h.levels.len() - 1;
    let mut picks: Vec<[f64; 2]> = Vec::new();
    for key in &h.levels[last].centers {
        let cf = h.center_f64(last, key);
        if !(cf[0] > 0.1 && cf[0] < 0.8 && cf[1] > 0.1 && cf[1] < 0.9) {
            continue;
        }
        let ce = h.center_exact(last, key);
        let ye = vec![&ce[0] + &off, ce[1].clone()];
        let cert = h.certify_in_s(&ye).unwrap();
        if cert.in_s_up_to_level != h.levels.len() {
            continue;
        }
        picks.push([cf[0] + off_f, cf[1]]);
        if picks.len() == 3 {
            break;
        }
    }
    assert_eq!(picks.len(), 3, "not enough certified base points");

    let dirs: [[f64; 3]; 4] = [
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [1.0, 0.0, 1.0],
        [1.0, 0.0, 2.0],
    ];
    let alphas = [1.0, SQRT_2, 2.0, 3.0];
    for (u, a) in dirs.iter().zip(alphas) {
        assert!((alpha_ex3(u) - a).abs() < 1e-12);
    }

    let mut max_rel = 0.0f64;
    let mut popped = 0u64;
    for p in &picks {
        for u in &dirs {
            let src = [p[0], p[1], 0.0];
            let dst = [p[0] + 0.1 * u[0], p[1] + 0.1 * u[1], 0.1 * u[2]];
            let disp = [dst[0] - src[0], dst[1] - src[1], dst[2] - src[2]];
            let target = alpha_ex3(&disp);
            let q = distance_estimate(&field, &src, &dst, &[Stage { eps: 0.02, h: 0.01 }], 2)
                .unwrap();
            assert!(
                q.lower_bound <= target + 1e-9 && target <= q.upper_bound + 1e-9,
                "bracket [{}, {}] misses target {target} for dir {u:?}",
                q.lower_bound,
                q.upper_bound
            );
            assert!(
                q.lower_bound >= 0.95 * target - 1e-12 && q.upper_bound <= 1.05 * target + 1e-12,
                "bracket [{}, {}] outside 5% of {target} for dir {u:?}",
                q.lower_bound,
                q.upper_bound
            );
            max_rel = max_rel
                .max((q.upper_bound - target) / target)
                .max((target - q.lower_bound) / target);
            popped += q.stages[0].popped as u64;
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt <= 180.0, "column queries took {dt:.0}s, budget 180s");
    println!(
        "[PASS] c07: 12 brackets within {:.3}% of 0.1·α (tol 5%), {popped} nodes settled, {dt:.0}s",
        100.0 * max_rel
    );
}

#[test]
fn c08_column_deficit_grows_linearly_in_the_window() {
    let _g = heavy();
    let field = column_field();
    let reps = ex3_deficit_series(&field, &[1, 2, 3, 4], 1e-6).unwrap();
    let d: Vec<f64> = reps.iter().map(|r| r.deficit.value).collect();
    for r in &reps {
        assert_eq!(r.verdict, "NON_HILBERTIAN");
    }

    let ns = [1.0f64, 2.0, 3.0, 4.0];
    let dbar = d.iter().sum::<f64>() / 4.0;
    let nbar = 2.5;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..4 {
        num += (ns[i] - nbar) * (d[i] - dbar);
        den += (ns[i] - nbar) * (ns[i] - nbar);
    }
    let slope = num / den;
    let icept = dbar - slope * nbar;
    let resid = (0..4)
        .map(|i| (d[i] - (icept + slope * ns[i])).abs())
        .fold(0.0, f64::max);

    assert!(resid < 0.01 * slope.abs(), "residual {resid} ≥ 1% of slope {slope}");
    assert!(slope.abs() >= 2.1213, "slope magnitude {} below 2^{{3/2}}·(3/4)", slope.abs());
    let vs = volume(&field, &Region::SSlab { lo: 0.0, hi: 1.0 }).unwrap();
    assert!(
        (-slope - vs.value).abs() <= 1e-3 * vs.value,
        "slope {slope} does not match -vol_g(S×(0,1)) = -{}",
        vs.value
    );
    println!(
        "[PASS] c08: deficits {:?} fit slope {slope:.6} (resid {resid:.1e}), -vol_g = {:.6}",
        d.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
        -vs.value
    );
}

#[test]
fn c09_seminorm_partial_sums_stay_under_the_certificate() {
    let sched = radius_schedule(3, 1.0, 4).unwrap();
    assert!(sched.certificate.all_pass, "schedule certificate must hold");
    let h = build_hierarchy(&sched).unwrap();

    let mut acc = 0.0;
    let mut partials = Vec::new();
    for j in 1..=4usize {
        acc += h.sobolev_seminorm_psi(j, 1.0).unwrap();
        let bound = sched.certificate.seminorm_bound_partials[j - 1];
        assert!(acc <= bound * (1.0 + 1e-12), "partial sum {acc} above bound {bound} at {j}");
        partials.push(acc);
    }

    // Independent oracle for one ball: 2-d cartesian quadrature of the
    // unit-radius profile gradient, then scale by r (the integral is
    // 1-homogeneous in r for p = 1 in the plane).
    let f = |x: f64, y: f64| 5.0 * EtaProfile::deriv(5.0 * (x * x + y * y).sqrt()).abs();
    let (unit_val, err) = adaptive_rect_2d(&f, -0.16, 0.16, -0.16, 0.16, 1e-9);
    assert!(err <= 1e-7, "oracle quadrature error {err} too large");
    let count = h.levels[0].centers.len() as f64;
    let per_ball = h.sobolev_seminorm_psi(1, 1.0).unwrap() / count;
    let oracle = unit_val * h.levels[0].r_f64;
    let rel = (per_ball - oracle).abs() / oracle;
    assert!(rel <= 1e-6, "single-ball seminorm off by {rel:.2e} relative");
    println!(
        "[PASS] c09: partial sums {:?} under certificate, single ball rel err {rel:.1e} (tol 1e-6)",
        partials.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>()
    );
}

fn poly_grad(c: [[f64; 4]; 4]) -> impl Fn(&[f64]) -> Vec<f64> {
    move |x: &[f64]| {
        let (u, v) = (x[0], x[1]);
        let mut gx = 0.0;
        let mut gy = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i > 0 {
                    gx += c[i][j] * i as f64 * u.powi(i as i32 - 1) * v.powi(j as i32);
                }
                if j > 0 {
                    gy += c[i][j] * j as f64 * u.powi(i as i32) * v.powi(j as i32 - 1);
                }
            }
        }
        vec![gx, gy]
    }
}

#[test]
fn c10_invariant_suites_hold_exactly() {
    let tree = SeedTree::new(20_260_819);

    // Derivative truncation: band integral of the truncation equals the
    // independent per-segment oracle, exactly, and is bounded by b - a.
    for i in 0..1000u64 {
        let mut rng = tree.stream("band", i);
        let steps: Vec<i64> = (0..20).map(|_| rng.gen_range(1..50)).collect();
        let total: i64 = steps.iter().sum();
        let mut knots = Vec::with_capacity(21);
        let mut prefix = 0i64;
        knots.push((exact::int(0), exact::ratio(rng.gen_range(-400..400), 16)));
        for s in steps {
            prefix += s;
            knots.push((
                exact::ratio(prefix, total),
                exact::ratio(rng.gen_range(-400..400), 16),
            ));
        }
        let f = PiecewiseLinear::new(knots).unwrap();
        let a = exact::ratio(rng.gen_range(-32..24), 8);
        let b = &a + exact::ratio(rng.gen_range(1..17), 4);
        let (_, integral) = truncate_band(&f, &a, &b).unwrap();
        let oracle = band_derivative_integral(&f, &a, &b).unwrap();
        assert_eq!(integral, oracle, "truncation mismatch at case {i}");
        assert!(integral.abs() <= &b - &a, "band integral exceeds width at case {i}");
    }

    // Transversality: no plan base may sit on a channel boundary.
    let field = channel_field();
    let plan =
        make_test_plan(&field, &PlanParams::Slab(SlabPlanParams::default()), 10_000, 0xB7).unwrap();
    let theta = theta1_field(channel_cover());
    let frac = transversal_fraction(&plan, &theta, 1).unwrap();
    assert!(frac == BigRational::zero(), "boundary hits on {frac} of samples");

    // Metric axioms and the Euclidean sandwich on certified brackets.
    let mut rng = tree.stream("axioms", 0);
    for i in 0..1000 {
        let mut pt = || {
            [
                rng.gen_range(-0.5..1.5f64),
                rng.gen_range(-0.5..1.5f64),
            ]
        };
        let (p, q, r) = (pt(), pt(), pt());
        let (lo_pq, up_pq, _) = certified_bracket(&field, &p, &q).unwrap();
        let (lo_qp, up_qp, _) = certified_bracket(&field, &q, &p).unwrap();
        let (_, up_qr, _) = certified_bracket(&field, &q, &r).unwrap();
        let (lo_pr, _, _) = certified_bracket(&field, &p, &r).unwrap();
        let (lo_pp, up_pp, _) = certified_bracket(&field, &p, &p).unwrap();

        assert_eq!((lo_pp, up_pp), (0.0, 0.0), "identity fails at case {i}");
        assert!(
            lo_pq.max(lo_qp) <= up_pq.min(up_qp) + 1e-12,
            "symmetric brackets disjoint at case {i}"
        );
        assert!(lo_pr <= up_pq + up_qr + 1e-12, "triangle gap at case {i}");

        let euclid = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        assert!(lo_pq <= up_pq + 1e-15);
        assert!(lo_pq >= euclid / SQRT_2 * (1.0 - 1e-12), "lower edge under |u|/√2 at case {i}");
        assert!(up_pq >= euclid * (1.0 - 1e-12), "upper edge under |u| at case {i}");
        assert!(up_pq <= SQRT_2 * euclid * (1.0 + 1e-12), "upper edge over √2|u| at case {i}");
    }

    // Constant metric: the parallelogram deficit of smooth pairs vanishes.
    let mut max_deficit = 0.0f64;
    for i in 0..20u64 {
        let mut rng = tree.stream("pairs", i);
        let cfield = MetricField::constant(2, 1.0 + rng.gen::<f64>()).unwrap();
        let mut coeffs = || {
            let mut c = [[0.0f64; 4]; 4];
            for row in &mut c {
                for v in row.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
            c
        };
        let (ca, cb) = (coeffs(), coeffs());
        let mut cp = [[0.0f64; 4]; 4];
        let mut cm = [[0.0f64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                cp[i][j] = ca[i][j] + cb[i][j];
                cm[i][j] = ca[i][j] - cb[i][j];
            }
        }
        let (ga, gb, gp, gm) = (poly_grad(ca), poly_grad(cb), poly_grad(cp), poly_grad(cm));
        let energies = [
            cheeger_energy(&cfield, &WugEvaluator::Gradient { grad: &ga }, &Region::Cube).unwrap(),
            cheeger_energy(&cfield, &WugEvaluator::Gradient { grad: &gb }, &Region::Cube).unwrap(),
            cheeger_energy(&cfield, &WugEvaluator::Gradient { grad: &gp }, &Region::Cube).unwrap(),
            cheeger_energy(&cfield, &WugEvaluator::Gradient { grad: &gm }, &Region::Cube).unwrap(),
        ];
        let deficit = parallelogram_deficit(&energies).unwrap();
        assert!(deficit.value.abs() <= 1e-9, "constant deficit {} at pair {i}", deficit.value);
        max_deficit = max_deficit.max(deficit.value.abs());
    }

    println!(
        "[PASS] c10: 1000 truncations exact, 0/10000 boundary hits, 1000 bracket queries sound, max constant deficit {max_deficit:.1e}"
    );
}
