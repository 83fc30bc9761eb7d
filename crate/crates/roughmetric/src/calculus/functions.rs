//! The test functions whose Cheeger energies break the parallelogram law,
//! together with their compactly supported cutoffs.
//!
//! Three families share the indices 1..4 and the combination rules
//! `f3 = f1 + f2`, `f4 = f1 - f2`:
//!
//! * plain coordinates `x_1, x_2` on the slab field,
//! * the same pair under a cube cutoff `φ = Π ψ(x_j)` that is 1 on `[-1,2]^d`,
//! * `φ̃(x')·x_1` and `φ̃(x')·(|x_d| - n + 1)` under the axis window `η_n` on
//!   the column field, where `φ̃ = Π χ(x_j)` is 1 on `[-2,2]^{d-1}`.
//!
//! All cutoffs are quintic-ramp products, so gradients are exact closed
//! forms. The only kink is `|x_d|`; its gradient uses `sgn(0) = +1`, which
//! never changes a reported magnitude.

use crate::smooth::{smoothstep5, smoothstep5_deriv};
use crate::{Error, Result};

/// Cube cutoff factor: 1 on `[-1, 2]`, quintic ramps on `[-2,-1]` and
/// `[2, 3]`, 0 beyond.
pub fn psi_ex2(t: f64) -> f64 {
    if t < -1.0 {
        smoothstep5(t + 2.0)
    } else if t > 2.0 {
        1.0 - smoothstep5(t - 2.0)
    } else {
        1.0
    }
}

pub fn psi_ex2_deriv(t: f64) -> f64 {
    if t < -1.0 {
        smoothstep5_deriv(t + 2.0)
    } else if t > 2.0 {
        -smoothstep5_deriv(t - 2.0)
    } else {
        0.0
    }
}

/// Transverse cutoff factor for the column field: even, 1 on `[-2, 2]`,
/// ramps to 0 on `2 ≤ |t| ≤ 3`.
pub fn chi_ex3(t: f64) -> f64 {
    let a = t.abs();
    if a <= 2.0 {
        1.0
    } else {
        1.0 - smoothstep5(a - 2.0)
    }
}

pub fn chi_ex3_deriv(t: f64) -> f64 {
    let a = t.abs();
    if a <= 2.0 || a >= 3.0 {
        0.0
    } else {
        -smoothstep5_deriv(a - 2.0) * t.signum()
    }
}

/// Axis window: even, 1 on `[-1, 1]`, ramps to 0 on `1 ≤ |t| ≤ 2`.
pub fn eta_cut(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else {
        1.0 - smoothstep5(a - 1.0)
    }
}

pub fn eta_cut_deriv(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 || a >= 2.0 {
        0.0
    } else {
        -smoothstep5_deriv(a - 1.0) * t.signum()
    }
}

/// Widened axis window: 1 on `[-n, n]`, the [`eta_cut`] ramp shifted
/// outward, 0 beyond `|t| ≥ n + 1`.
pub fn eta_n(n: u32, t: f64) -> f64 {
    let a = t.abs();
    let n = n as f64;
    if a <= n {
        1.0
    } else {
        eta_cut(a - n + 1.0)
    }
}

pub fn eta_n_deriv(n: u32, t: f64) -> f64 {
    let a = t.abs();
    let n = n as f64;
    if a <= n {
        0.0
    } else {
        eta_cut_deriv(a - n + 1.0) * t.signum()
    }
}

fn sgn(t: f64) -> f64 {
    if t < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// One of the four quadratic-form probes, in one of the three families.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `x_1`, `x_2`, sum, difference on `ℝ^d`.
    Plain { i: u8, d: usize },
    /// The plain pair times the cube cutoff `Π ψ(x_j)`.
    CubeCutoff { i: u8, d: usize },
    /// `η_n(x_d)·φ̃(x')·x_1` and `η_n(x_d)·φ̃(x')·(|x_d| - n + 1)` plus
    /// their sum and difference; `x'` are the first `d-1` coordinates.
    Column { i: u8, n: u32, d: usize },
}

impl TestFunction {
    pub fn plain(i: u8, d: usize) -> Result<Self> {
        check_index(i, d, 2)?;
        Ok(TestFunction::Plain { i, d })
    }

    pub fn cube_cutoff(i: u8, d: usize) -> Result<Self> {
        check_index(i, d, 2)?;
        Ok(TestFunction::CubeCutoff { i, d })
    }

    pub fn column(i: u8, n: u32, d: usize) -> Result<Self> {
        check_index(i, d, 3)?;
        if n == 0 {
            return Err(Error::Parameter("window index n must be at least 1".into()));
        }
        Ok(TestFunction::Column { i, n, d })
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Plain { d, .. }
            | TestFunction::CubeCutoff { d, .. }
            | TestFunction::Column { d, .. } => *d,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Plain { i, .. } => format!("f{i}"),
            TestFunction::CubeCutoff { i, .. } => format!("f~{i}"),
            TestFunction::Column { i, n, .. } => format!("f{i},{n}"),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            TestFunction::Plain { i, .. } => combine(*i, x[0], x[1]),
            TestFunction::CubeCutoff { i, .. } => {
                let phi: f64 = x.iter().map(|&c| psi_ex2(c)).product();
                phi * combine(*i, x[0], x[1])
            }
            TestFunction::Column { i, n, d } => {
                let xd = x[*d - 1];
                let phi: f64 = x[..*d - 1].iter().map(|&c| chi_ex3(c)).product();
                let win = eta_n(*n, xd);
                win * phi * combine(*i, x[0], xd.abs() - *n as f64 + 1.0)
            }
        }
    }

    /// Exact gradient. On the `|x_d|` kink the convention `sgn(0) = +1`
    /// is used; the resulting euclidean norm and axis component are the
    /// same for either sign.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            TestFunction::Plain { i, d } => {
                let mut g = vec![0.0; *d];
                let (a, b) = weights(*i);
                g[0] = a;
                g[1] = b;
                g
            }
            TestFunction::CubeCutoff { i, d } => {
                let f = combine(*i, x[0], x[1]);
                let (a, b) = weights(*i);
                let factors: Vec<f64> = x.iter().map(|&c| psi_ex2(c)).collect();
                let phi: f64 = factors.iter().product();
                let mut g = vec![0.0; *d];
                for j in 0..*d {
                    let others: f64 = phi_except(&factors, j);
                    g[j] = psi_ex2_deriv(x[j]) * others * f;
                }
                g[0] += phi * a;
                g[1] += phi * b;
                g
            }
            TestFunction::Column { i, n, d } => {
                let d = *d;
                let xd = x[d - 1];
                let (a, b) = weights(*i);
                let factors: Vec<f64> = x[..d - 1].iter().map(|&c| chi_ex3(c)).collect();
                let phi: f64 = factors.iter().product();
                let win = eta_n(*n, xd);
                let win_d = eta_n_deriv(*n, xd);
                let shifted = xd.abs() - *n as f64 + 1.0;
                let f = combine(*i, x[0], shifted);
                // d/dx_d of the windowed combination: product rule on
                // η_n · (a·x_1 + b·(|x_d| - n + 1)).
                let mut g = vec![0.0; d];
                for j in 0..d - 1 {
                    g[j] = chi_ex3_deriv(x[j]) * phi_except(&factors, j) * win * f;
                }
                g[0] += win * phi * a;
                g[d - 1] = win_d * phi * f + win * phi * b * sgn(xd);
                g
            }
        }
    }
}

fn check_index(i: u8, d: usize, d_min: usize) -> Result<()> {
    if !(1..=4).contains(&i) {
        return Err(Error::Parameter(format!("function index {i} outside 1..=4")));
    }
    if d < d_min {
        return Err(Error::Parameter(format!("dimension {d} below minimum {d_min}")));
    }
    Ok(())
}

/// `(a, b)` with `f_i = a·first + b·second`.
fn weights(i: u8) -> (f64, f64) {
    match i {
        1 => (1.0, 0.0),
        2 => (0.0, 1.0),
        3 => (1.0, 1.0),
        _ => (1.0, -1.0),
    }
}

fn combine(i: u8, first: f64, second: f64) -> f64 {
    let (a, b) = weights(i);
    a * first + b * second
}

fn phi_except(factors: &[f64], skip: usize) -> f64 {
    factors
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != skip)
        .map(|(_, f)| f)
        .product()
}
