//! Euclidean Cauchy kernel `G` and harmonic Green kernel `H`.

use std::f64::consts::PI;

use crate::clifford::VectorN;
use crate::error::{Error, Result};

/// `Γ(n/2)` for integer `n >= 1`.
fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area `ω_n = 2π^{n/2} / Γ(n/2)` of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidDimension("sphere_area needs n >= 1".into()));
    }
    Ok(2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n))
}

/// `G(z) = z / (ω_n |z|^n)` evaluated at a difference vector, written into
/// `out`. No checks; callers guarantee `z != 0`.
#[inline]
pub(crate) fn cauchy_diff_into(z: &[f64], inv_omega: f64, out: &mut [f64]) {
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let n = z.len() as i32;
    let s = inv_omega / (r2.sqrt().powi(n));
    for (o, v) in out.iter_mut().zip(z) {
        *o = v * s;
    }
}

/// `|z|^{2-n}` for a difference vector.
#[inline]
pub(crate) fn radial_power(z: &[f64]) -> f64 {
    let r2: f64 = z.iter().map(|v| v * v).sum();
    r2.sqrt().powi(2 - z.len() as i32)
}

/// `1 / (ω_n (1 - n))`, the normalisation of `H`.
pub fn green_normalisation(n: usize) -> Result<f64> {
    Ok(1.0 / (sphere_area(n)? * (1.0 - n as f64)))
}

/// Ratio `c_n` in `D_x H(x, y) = c_n G(x, y)`.
pub fn dirac_green_ratio(n: usize) -> f64 {
    (n as f64 - 2.0) / (n as f64 - 1.0)
}

/// Cauchy kernel `G(x, y) = (x - y) / (ω_n |x - y|^n)`.
pub fn cauchy_g(x: &VectorN, y: &VectorN) -> Result<VectorN> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    let z = x - y;
    if z.norm_sq() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let mut out = vec![0.0; z.dim()];
    cauchy_diff_into(&z.0, 1.0 / sphere_area(z.dim())?, &mut out);
    Ok(VectorN(out))
}

/// Green kernel `H(x, y) = |x - y|^{2-n} / (ω_n (1 - n))`, `n > 2`.
pub fn green_h(x: &VectorN, y: &VectorN) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    let n = x.dim();
    if n <= 2 {
        return Err(Error::InvalidDimension("green_h needs n > 2".into()));
    }
    let z = x - y;
    if z.norm_sq() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(green_normalisation(n)? * radial_power(&z.0))
}

/// Operator-norm bound `(n-1)/ω_n` on `|∇G(z)| |z|^n`.
pub fn gradient_constant(n: usize) -> f64 {
    (n as f64 - 1.0) / sphere_area(n).expect("n >= 1")
}

/// Bound `n(n+5)/ω_n` on the norm of the second derivative of `G` times
/// `|z|^{n+1}`.
pub fn hessian_constant(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf + 5.0) / sphere_area(n).expect("n >= 1")
}
