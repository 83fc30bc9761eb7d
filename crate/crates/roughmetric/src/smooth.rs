//! Quintic ramps shared by the radial profile and the cutoff functions.

/// `6u⁵ − 15u⁴ + 10u³` clamped to `[0,1]`: C² ramp with flat ends.
pub fn smoothstep5(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// Derivative of [`smoothstep5`]: `30u²(1−u)²` inside `[0,1]`, zero outside.
pub fn smoothstep5_deriv(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    30.0 * u * u * (1.0 - u) * (1.0 - u)
}
