//! Curves and sampled test plans.
//!
//! A plan is a finite family of straight curves with a common direction,
//! bases drawn uniformly from a set `E` of positive measure: either the
//! channel-complement slab `E' × (0,1)^{d-1}` of the slab field, or
//! certified thirds-rational columns `S × (x_d window)` of the column
//! field. Pushing the endpoint evaluation forward gives a measure with
//! density at most `1/L^d(E)` against the volume measure, recorded as the
//! plan's compression constant.

use num::{BigInt, BigRational, One, Signed, Zero};
use rand::Rng;

use crate::exact;
use crate::fields::{MetricField, SobolevHierarchy, ThetaField1D};
use crate::rng::{unit, SeedTree};
use crate::{Error, Result};

/// Absolutely continuous curve on the parameter interval `[0, 1]`.
#[derive(Clone, Debug)]
pub enum Curve {
    /// `t ↦ base + t·dir`; derivative `dir` everywhere.
    Straight { base: Vec<f64>, dir: Vec<f64> },
    /// Uniformly parametrized vertex chain with its Lipschitz constant.
    Polyline { vertices: Vec<Vec<f64>>, lipschitz: f64 },
}

impl Curve {
    pub fn straight(base: Vec<f64>, dir: Vec<f64>) -> Result<Curve> {
        if base.len() != dir.len() || base.is_empty() {
            return Err(Error::Parameter("base and direction dimensions differ".into()));
        }
        Ok(Curve::Straight { base, dir })
    }

    pub fn polyline(vertices: Vec<Vec<f64>>) -> Result<Curve> {
        if vertices.len() < 2 {
            return Err(Error::Parameter("polyline needs at least two vertices".into()));
        }
        let dim = vertices[0].len();
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::Parameter("polyline vertices have mixed dimensions".into()));
        }
        let segs = (vertices.len() - 1) as f64;
        let mut lipschitz = 0.0f64;
        for w in vertices.windows(2) {
            let speed = segs
                * w[0]
                    .iter()
                    .zip(&w[1])
                    .map(|(a, b)| (b - a) * (b - a))
                    .sum::<f64>()
                    .sqrt();
            lipschitz = lipschitz.max(speed);
        }
        Ok(Curve::Polyline { vertices, lipschitz })
    }

    pub fn dim(&self) -> usize {
        match self {
            Curve::Straight { base, .. } => base.len(),
            Curve::Polyline { vertices, .. } => vertices[0].len(),
        }
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(0.0, 1.0);
        match self {
            Curve::Straight { base, dir } => {
                base.iter().zip(dir).map(|(b, u)| b + t * u).collect()
            }
            Curve::Polyline { vertices, .. } => {
                let segs = (vertices.len() - 1) as f64;
                let s = (t * segs).max(0.0);
                let k = (s.floor() as usize).min(vertices.len() - 2);
                let frac = s - k as f64;
                // convex form lands on vertices exactly when frac is 0 or 1
                vertices[k]
                    .iter()
                    .zip(&vertices[k + 1])
                    .map(|(a, b)| (1.0 - frac) * a + frac * b)
                    .collect()
            }
        }
    }

    /// Derivative at `t`; on polyline knots the right-hand segment wins.
    pub fn velocity(&self, t: f64) -> Vec<f64> {
        match self {
            Curve::Straight { dir, .. } => dir.clone(),
            Curve::Polyline { vertices, .. } => {
                let segs = (vertices.len() - 1) as f64;
                let k = ((t.clamp(0.0, 1.0) * segs) as usize).min(vertices.len() - 2);
                vertices[k]
                    .iter()
                    .zip(&vertices[k + 1])
                    .map(|(a, b)| segs * (b - a))
                    .collect()
            }
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Curve::Straight { dir, .. } => {
                dir.iter().map(|c| c * c).sum::<f64>().sqrt()
            }
            Curve::Polyline { lipschitz, .. } => *lipschitz,
        }
    }
}

/// Which base set the plan samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanKind {
    /// Bases with the first coordinate in a channel-free window.
    SlabComplement,
    /// Bases on certified thirds-rational columns.
    CertifiedColumn,
}

/// Parameters for the slab-complement plan.
#[derive(Clone, Debug)]
pub struct SlabPlanParams {
    /// Window `(a, b) ⊆ (0, 1)` for the first coordinate; channels inside
    /// the window are removed from the base set.
    pub window: (f64, f64),
    /// Axis the curves run along.
    pub axis: usize,
    /// Curve length along that axis.
    pub length: f64,
}

impl Default for SlabPlanParams {
    fn default() -> Self {
        SlabPlanParams { window: (0.05, 0.95), axis: 1, length: 1.0 }
    }
}

/// Parameters for the certified-column plan.
#[derive(Clone, Debug)]
pub struct ColumnPlanParams {
    /// Transverse coordinates are drawn from the grid `k/3^depth`.
    pub grid_depth: u32,
    /// Window for the axis coordinate of the base.
    pub axis_window: (f64, f64),
    /// Curve length along the axis.
    pub length: f64,
}

impl Default for ColumnPlanParams {
    fn default() -> Self {
        ColumnPlanParams { grid_depth: 7, axis_window: (0.0, 0.5), length: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub enum PlanParams {
    Slab(SlabPlanParams),
    Column(ColumnPlanParams),
}

/// A finite sampled test plan: straight curves `base + t·direction`.
#[derive(Clone, Debug)]
pub struct TestPlan {
    pub kind: PlanKind,
    pub bases: Vec<Vec<f64>>,
    /// Exact transverse coordinates for column plans, aligned with `bases`.
    pub exact_bases: Option<Vec<Vec<BigRational>>>,
    pub direction: Vec<f64>,
    /// `L^d` measure of the base set `E`.
    pub measure_e: f64,
    /// Density bound of the endpoint pushforwards against the volume
    /// measure: `1/L^d(E)`, since the conformal factor is at least 1.
    pub compression: f64,
    pub seed: u64,
}

impl TestPlan {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn curve(&self, idx: usize) -> Curve {
        Curve::Straight {
            base: self.bases[idx].clone(),
            dir: self.direction.clone(),
        }
    }
}

/// Samples a plan for the given field. Slab parameters pair with the slab
/// fields, column parameters with the column field.
pub fn make_test_plan(
    field: &MetricField,
    params: &PlanParams,
    n: usize,
    seed: u64,
) -> Result<TestPlan> {
    match (field, params) {
        (MetricField::Ex1 { d, theta }, PlanParams::Slab(p)) => {
            slab_plan(theta, *d, p, n, seed)
        }
        (MetricField::Ex2 { d, theta }, PlanParams::Slab(p)) => {
            slab_plan(theta, *d, p, n, seed)
        }
        (MetricField::Ex3 { hierarchy }, PlanParams::Column(p)) => {
            column_plan(hierarchy, p, n, seed)
        }
        _ => Err(Error::Parameter(
            "plan parameters do not match the field variant".into(),
        )),
    }
}

fn slab_plan(
    theta: &ThetaField1D,
    d: usize,
    p: &SlabPlanParams,
    n: usize,
    seed: u64,
) -> Result<TestPlan> {
    let (a, b) = p.window;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::Parameter(format!("bad window ({a}, {b})")));
    }
    if p.axis >= d || p.length <= 0.0 {
        return Err(Error::Parameter("bad plan axis or length".into()));
    }
    let (ea, eb) = (exact::from_f64(a)?, exact::from_f64(b)?);
    let covered = theta.cover.measure_within(&ea, &eb);
    let free = (&eb - &ea) - &covered;
    if !free.is_positive() {
        return Err(Error::Parameter(
            "window is fully covered; base set has measure zero".into(),
        ));
    }
    // Complement gaps of the merged cover inside the window, in f64.
    let mut gaps: Vec<(f64, f64)> = Vec::new();
    let mut cursor = a;
    for &(lo, hi) in theta.cover.merged_f64_within(a, b) {
        if lo.max(a) > cursor {
            gaps.push((cursor, lo.max(a)));
        }
        cursor = cursor.max(hi.min(b));
    }
    if cursor < b {
        gaps.push((cursor, b));
    }
    let total: f64 = gaps.iter().map(|(lo, hi)| hi - lo).sum();

    let tree = SeedTree::new(seed);
    let mut rng = tree.stream("slab-plan", 0);
    let mut bases = Vec::with_capacity(n);
    while bases.len() < n {
        // Length-weighted gap choice, then uniform inside the gap; reject
        // the measure-zero event of landing on a merged endpoint.
        let mut pick = unit(&mut rng) * total;
        let mut x1 = gaps[0].0;
        for &(lo, hi) in &gaps {
            if pick <= hi - lo {
                x1 = lo + pick;
                break;
            }
            pick -= hi - lo;
        }
        let ex = exact::from_f64(x1)?;
        if theta.cover.contains_exact(&ex) || theta.cover.distance_to_cover(&ex).is_zero() {
            continue;
        }
        let mut base = vec![0.0; d];
        base[0] = x1;
        for c in base.iter_mut().skip(1) {
            *c = unit(&mut rng);
        }
        bases.push(base);
    }

    let mut direction = vec![0.0; d];
    direction[p.axis] = p.length;
    let measure_e = exact::to_f64(&free);
    Ok(TestPlan {
        kind: PlanKind::SlabComplement,
        bases,
        exact_bases: None,
        direction,
        measure_e,
        compression: 1.0 / measure_e,
        seed,
    })
}

fn column_plan(
    h: &SobolevHierarchy,
    p: &ColumnPlanParams,
    n: usize,
    seed: u64,
) -> Result<TestPlan> {
    if !(1..=12).contains(&p.grid_depth) {
        return Err(Error::Parameter("grid depth outside 1..=12".into()));
    }
    let (wa, wb) = p.axis_window;
    if !(wa < wb) || p.length <= 0.0 {
        return Err(Error::Parameter("bad axis window or length".into()));
    }
    let g = h.grid_dim();
    let d = h.d;
    let denom: u64 = 3u64.pow(p.grid_depth);
    let levels = h.levels.len();

    let tree = SeedTree::new(seed);
    let mut rng = tree.stream("column-plan", 0);
    let mut bases = Vec::with_capacity(n);
    let mut exact_bases = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while bases.len() < n {
        attempts += 1;
        if attempts > 200 * (n + 1) {
            return Err(Error::Resource {
                message: "certified column sampling rejected too many candidates".into(),
                reached: attempts,
            });
        }
        let mut coords = Vec::with_capacity(g);
        let mut ok = true;
        for _ in 0..g {
            let k = rng.gen_range(1..denom);
            if k % 3 == 0 {
                ok = false;
                break;
            }
            coords.push(BigRational::new(BigInt::from(k), BigInt::from(denom)));
        }
        if !ok {
            continue;
        }
        let cert = h.certify_in_s(&coords)?;
        if !cert.certified(levels) {
            continue;
        }
        let mut base: Vec<f64> = coords.iter().map(exact::to_f64).collect();
        base.push(wa + unit(&mut rng) * (wb - wa));
        bases.push(base);
        exact_bases.push(coords);
    }

    let mut direction = vec![0.0; d];
    direction[d - 1] = p.length;
    // L²(S) = 1 − Σ_m |D_m|·π·r_m², the balls being disjoint and interior.
    let ball_mass: f64 = h
        .levels
        .iter()
        .map(|lv| lv.centers.len() as f64 * std::f64::consts::PI * lv.r_f64 * lv.r_f64)
        .sum();
    let measure_e = (1.0 - ball_mass) * (wb - wa);
    Ok(TestPlan {
        kind: PlanKind::CertifiedColumn,
        bases,
        exact_bases: Some(exact_bases),
        direction,
        measure_e,
        compression: 1.0 / measure_e,
        seed,
    })
}

/// Exact fraction of time samples at which plan curves sit on the merged
/// cover's boundary. Slab-plan curves keep their first coordinate, so the
/// per-curve classification is constant in `t`; the sweep still counts
/// every sample.
pub fn transversal_fraction(
    plan: &TestPlan,
    theta: &ThetaField1D,
    samples: usize,
) -> Result<BigRational> {
    if plan.kind != PlanKind::SlabComplement {
        return Err(Error::Parameter(
            "boundary-hit sweep is defined for slab plans".into(),
        ));
    }
    if plan.direction[0] != 0.0 {
        return Err(Error::Parameter(
            "sweep needs curves transverse to the slabs (direction with zero first coordinate)"
                .into(),
        ));
    }
    let mut hits = BigInt::zero();
    let total = BigInt::from((samples * plan.len().max(1)) as u64);
    for base in &plan.bases {
        let x1 = exact::from_f64(base[0])?;
        let on_boundary =
            !theta.cover.contains_exact(&x1) && theta.cover.distance_to_cover(&x1).is_zero();
        if on_boundary {
            hits += BigInt::from(samples as u64);
        }
    }
    Ok(BigRational::new(hits, total.max(BigInt::one())))
}
