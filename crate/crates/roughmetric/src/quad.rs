//! Quadrature and scalar optimization utilities.
//!
//! Everything here is deterministic: fixed refinement ladders, fixed node
//! sets, no randomized sampling.

/// Composite Simpson estimate with `panels` panels on `[a, b]`.
fn simpson_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Simpson quadrature refined by panel doubling until two successive
/// estimates agree to `rel_tol` (with an absolute floor), or `max_doublings`
/// is exhausted. Returns the last estimate.
pub fn simpson_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let max_doublings = 22;
    let mut panels = 1;
    let mut prev = simpson_fixed(&f, a, b, panels);
    for _ in 0..max_doublings {
        panels *= 2;
        let next = simpson_fixed(&f, a, b, panels);
        let scale = next.abs().max(1e-300);
        if (next - prev).abs() <= rel_tol * scale + 1e-300 {
            return next;
        }
        prev = next;
    }
    prev
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence. Deterministic and accurate to ~1e-15. Tables
/// are cached per order: edge quadrature asks for the same few orders
/// millions of times.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
        return hit.clone();
    }
    let fresh = gauss_legendre_fresh(n);
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(n, fresh.clone());
    fresh
}

fn gauss_legendre_fresh(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor Gauss-Legendre integral of `f` over the rectangle
/// `[ax, bx] x [ay, by]` with `n` nodes per axis.
pub fn gl_rect_2d<F: Fn(f64, f64) -> f64>(f: F, ax: f64, bx: f64, ay: f64, by: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let (cx, hx) = (0.5 * (ax + bx), 0.5 * (bx - ax));
    let (cy, hy) = (0.5 * (ay + by), 0.5 * (by - ay));
    let mut acc = 0.0;
    for (xi, wi) in nodes.iter().zip(&weights) {
        let x = cx + hx * xi;
        let mut row = 0.0;
        for (yj, wj) in nodes.iter().zip(&weights) {
            row += wj * f(x, cy + hy * yj);
        }
        acc += wi * row;
    }
    acc * hx * hy
}

/// 1D Gauss-Legendre integral on `[a, b]`.
pub fn gl_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Adaptive 2D quadrature on `[ax,bx]×[ay,by]` by quadtree refinement of
/// GL-4 panels against their four-quadrant split. Returns `(value, error)`
/// where the error term accumulates the last observed panel discrepancies,
/// so kinked integrands get a usable bound instead of a silent miss.
pub fn adaptive_rect_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    tol: f64,
) -> (f64, f64) {
    fn split<F: Fn(f64, f64) -> f64>(
        f: &F,
        ax: f64,
        bx: f64,
        ay: f64,
        by: f64,
        coarse: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let (mx, my) = (0.5 * (ax + bx), 0.5 * (ay + by));
        let quads = [
            (ax, mx, ay, my),
            (mx, bx, ay, my),
            (ax, mx, my, by),
            (mx, bx, my, by),
        ];
        let parts: Vec<f64> = quads
            .iter()
            .map(|&(a, b, c, d)| gl_rect_2d(f, a, b, c, d, 4))
            .collect();
        let fine: f64 = parts.iter().sum();
        let disc = (fine - coarse).abs();
        if disc <= tol || depth >= 14 {
            return (fine, disc);
        }
        let mut val = 0.0;
        let mut err = 0.0;
        for (&(a, b, c, d), &p) in quads.iter().zip(&parts) {
            let (v, e) = split(f, a, b, c, d, p, tol * 0.25, depth + 1);
            val += v;
            err += e;
        }
        (val, err)
    }
    let coarse = gl_rect_2d(f, ax, bx, ay, by, 4);
    split(f, ax, bx, ay, by, coarse, tol, 0)
}

/// Golden-section minimizer of a unimodal `f` on `[a, b]`.
/// Iterates until the bracketing interval is below `x_tol`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Parabolic refinement of a located minimum: fits a parabola through
/// `x ± w` and returns its vertex. Sampling at width `w` well above the
/// f64 value plateau recovers argmin digits golden section cannot see.
pub fn refine_min_parabolic<F: Fn(f64) -> f64>(f: F, x: f64, w: f64) -> f64 {
    let (fm, f0, fp) = (f(x - w), f(x), f(x + w));
    let denom = fm - 2.0 * f0 + fp;
    if denom <= 0.0 {
        return x;
    }
    x + 0.5 * w * (fm - fp) / denom
}
