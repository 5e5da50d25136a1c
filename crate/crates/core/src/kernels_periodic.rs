//! Lattice-periodised Cauchy and Green kernels on cylinders and tori, with
//! certified truncation bounds.
//!
//! Sums run over `‖m‖∞ <= R` in shell order with compensated accumulation.
//! Every `tail_bound` is an upper estimate of `|K_∞ - K_R|`, obtained from a
//! pointwise majorant `C (|ω| - a)^{-s}` of the summand, the lower bound
//! `|ω| >= σ_min ‖m‖∞`, and the shell count `(2r+1)^k - (2r-1)^k <= 2k(2r+1)^{k-1}`.

use serde::{Deserialize, Serialize};

use crate::clifford::{KahanMv, MultiVector, VectorN};
use crate::error::{Error, Result};
use crate::kernels_euclid::{
    cauchy_diff_into, gradient_constant, green_normalisation, hessian_constant, radial_power, sphere_area,
};
use crate::lattice::{char_sign_raw, for_each_point, BundleCharacter, Lattice};

/// Points closer than this to the singular orbit are rejected.
pub(crate) const SINGULAR_TOL: f64 = 1e-10;

/// Explicit terms of the majorant series summed before switching to the
/// integral remainder.
const EXPLICIT_SHELLS: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub value: MultiVector,
    pub trunc_radius: usize,
    pub tail_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl KernelEval {
    pub(crate) fn new(value: MultiVector, trunc_radius: usize, tail_bound: f64) -> Self {
        KernelEval { value, trunc_radius, tail_bound, warning: None }
    }
}

/// Upper bound on `Σ_{‖m‖∞ > R} |ω_m|^{-s}`.
pub fn eisenstein_tail(l: &Lattice, radius: usize, s: f64) -> Result<f64> {
    eisenstein_tail_offset(l, radius, s, 0.0)
}

/// Upper bound on `Σ_{‖m‖∞ > R} (|ω_m| - a)^{-s}` for `a >= 0`; infinite when
/// the first omitted shell can come within `a` of the origin.
pub fn eisenstein_tail_offset(l: &Lattice, radius: usize, s: f64, offset: f64) -> Result<f64> {
    let k = l.rank();
    if !(s > k as f64) {
        return Err(Error::Divergent { s, k });
    }
    Ok(shell_majorant(k, l.sigma_min(), s, offset.max(0.0), radius))
}

pub(crate) fn shell_majorant(k: usize, sigma: f64, s: f64, a: f64, radius: usize) -> f64 {
    if sigma * (radius as f64 + 1.0) <= a {
        return f64::INFINITY;
    }
    let kf = k as f64;
    let term = |r: f64| 2.0 * kf * (2.0 * r + 1.0).powf(kf - 1.0) * (sigma * r - a).powf(-s);
    let last = radius + EXPLICIT_SHELLS;
    let mut sum = 0.0;
    // smallest terms first
    for r in (radius + 1..=last).rev() {
        sum += term(r as f64);
    }
    // the summand decreases in r, so Σ_{r > N} <= ∫_N^∞ with
    // 2t+1 <= (2 + 1/N) t and σt - a >= σt (1 - a/(σN)).
    let nn = last as f64;
    let c = 2.0 * kf * (2.0 + 1.0 / nn).powf(kf - 1.0) * (sigma * (1.0 - a / (sigma * nn))).powf(-s);
    sum + c * nn.powf(kf - s) / (s - kf)
}

fn check_inputs(l: &Lattice, chi: &BundleCharacter, x: &VectorN, y: &VectorN) -> Result<VectorN> {
    let n = l.dim();
    for v in [x, y] {
        if v.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
        }
    }
    if chi.l > l.rank() {
        return Err(Error::InvalidManifold(format!("bundle split l = {} exceeds k = {}", chi.l, l.rank())));
    }
    Ok(x - y)
}

fn regime(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::WrongRegime(msg()))
    }
}

/// `Σ_{‖m‖∞ <= R} χ(m) G(x - y + ω)`, for `k <= n - 2`.
pub fn cyl_cauchy(l: &Lattice, chi: &BundleCharacter, x: &VectorN, y: &VectorN, radius: usize) -> Result<KernelEval> {
    let z = check_inputs(l, chi, x, y)?;
    let (n, k) = (l.dim(), l.rank());
    regime(k + 2 <= n, || format!("plain Cauchy series needs k <= n-2 (k = {k}, n = {n}); use cyl_cauchy_reg"))?;
    let inv_omega = 1.0 / sphere_area(n)?;
    let value = cauchy_sum(l, chi.l, &z, radius, inv_omega, false)?;
    let tail = shell_majorant(k, l.sigma_min(), (n - 1) as f64, z.norm(), radius) * inv_omega;
    Ok(KernelEval::new(value, radius, tail))
}

/// `G(x - y) + Σ' χ(m) [G(x - y + ω) - G(ω)]`, for `k = n - 1`.
pub fn cyl_cauchy_reg(
    l: &Lattice,
    chi: &BundleCharacter,
    x: &VectorN,
    y: &VectorN,
    radius: usize,
) -> Result<KernelEval> {
    let z = check_inputs(l, chi, x, y)?;
    let (n, k) = (l.dim(), l.rank());
    regime(k + 1 == n, || format!("regularised Cauchy series needs k = n-1 (k = {k}, n = {n})"))?;
    let inv_omega = 1.0 / sphere_area(n)?;
    let value = cauchy_sum(l, chi.l, &z, radius, inv_omega, true)?;
    // mean value: |G(z+ω) - G(ω)| <= |z| (n-1)/ω_n (|ω| - |z|)^{-n}
    let zn = z.norm();
    let tail = zn * gradient_constant(n) * shell_majorant(k, l.sigma_min(), n as f64, zn, radius);
    Ok(KernelEval::new(value, radius, tail))
}

fn cauchy_sum(l: &Lattice, split: usize, z: &VectorN, radius: usize, inv_omega: f64, subtract: bool) -> Result<MultiVector> {
    let n = l.dim();
    let mut acc = KahanMv::new(n);
    let mut shifted = vec![0.0; n];
    let mut term = vec![0.0; n];
    let mut base = vec![0.0; n];
    let mut singular = false;
    for_each_point(l, radius, &mut |m, w| {
        for j in 0..n {
            shifted[j] = z.0[j] + w[j];
        }
        if shifted.iter().map(|v| v * v).sum::<f64>().sqrt() < SINGULAR_TOL {
            singular = true;
            return;
        }
        cauchy_diff_into(&shifted, inv_omega, &mut term);
        let sign = char_sign_raw(split, m);
        if subtract && m.iter().any(|&c| c != 0) {
            cauchy_diff_into(w, inv_omega, &mut base);
            for j in 0..n {
                term[j] -= base[j];
            }
        }
        acc.add_scaled(&term, sign);
    });
    if singular {
        return Err(Error::SingularOrbit);
    }
    Ok(VectorN(acc.into_inner()).to_multivector())
}

/// `Σ_{‖m‖∞ <= R} χ(m) H(x - y + ω)`, for `k <= n - 3`.
pub fn cyl_green(l: &Lattice, chi: &BundleCharacter, x: &VectorN, y: &VectorN, radius: usize) -> Result<KernelEval> {
    let z = check_inputs(l, chi, x, y)?;
    let (n, k) = (l.dim(), l.rank());
    regime(n >= 3 && k + 3 <= n, || {
        format!("plain Green series needs k <= n-3 (k = {k}, n = {n}); use cyl_green_reg")
    })?;
    let c = green_normalisation(n)?;
    let value = green_sum(l, chi.l, &z, radius, false)? * c;
    let tail = shell_majorant(k, l.sigma_min(), (n - 2) as f64, z.norm(), radius) * c.abs();
    Ok(KernelEval::new(MultiVector::scalar(n, value), radius, tail))
}

/// `H(x - y) + Σ' [H(x - y + ω) - H(ω)]` for the trivial bundle, a
/// paired regrouping otherwise; `k = n - 2`.
pub fn cyl_green_reg(
    l: &Lattice,
    chi: &BundleCharacter,
    x: &VectorN,
    y: &VectorN,
    radius: usize,
) -> Result<KernelEval> {
    let z = check_inputs(l, chi, x, y)?;
    let (n, k) = (l.dim(), l.rank());
    regime(n >= 3 && k + 2 == n, || format!("regularised Green series needs k = n-2 (k = {k}, n = {n})"))?;
    let c = green_normalisation(n)?;
    let zn = z.norm();
    if chi.l == 0 {
        let value = green_sum(l, 0, &z, radius, true)? * c;
        // mean value: ||z+ω|^{2-n} - |ω|^{2-n}| <= |z| (n-2) (|ω| - |z|)^{1-n}
        let tail = zn * (n as f64 - 2.0) * shell_majorant(k, l.sigma_min(), (n - 1) as f64, zn, radius) * c.abs();
        return Ok(KernelEval::new(MultiVector::scalar(n, value), radius, tail));
    }
    // With χ(δ_1) = -1 the subtracted constant Σ' χ(m)|ω|^{2-n} is nonzero
    // and would spoil antiperiodicity, so pair m with m + δ_1 instead:
    // Σ_{m_1 even} χ(m) [H(z+ω) - H(z+ω+v_1)].
    let v1 = &l.basis()[0];
    let mut acc = KahanMv::new(1);
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut singular = false;
    for_each_point(l, radius, &mut |m, w| {
        if m[0].rem_euclid(2) != 0 {
            return;
        }
        for j in 0..n {
            p[j] = z.0[j] + w[j];
            q[j] = p[j] + v1.0[j];
        }
        let near = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt() < SINGULAR_TOL;
        if near(&p) || near(&q) {
            singular = true;
            return;
        }
        acc.add_scaled(&[radial_power(&p) - radial_power(&q)], char_sign_raw(chi.l, m));
    });
    if singular {
        return Err(Error::SingularOrbit);
    }
    let reach = zn + v1.norm();
    let tail = v1.norm() * (n as f64 - 2.0) * shell_majorant(k, l.sigma_min(), (n - 1) as f64, reach, radius) * c.abs();
    Ok(KernelEval::new(MultiVector::scalar(n, acc.into_inner()[0] * c), radius, tail))
}

fn green_sum(l: &Lattice, split: usize, z: &VectorN, radius: usize, subtract: bool) -> Result<f64> {
    let n = l.dim();
    let mut acc = KahanMv::new(1);
    let mut shifted = vec![0.0; n];
    let mut singular = false;
    for_each_point(l, radius, &mut |m, w| {
        for j in 0..n {
            shifted[j] = z.0[j] + w[j];
        }
        if shifted.iter().map(|v| v * v).sum::<f64>().sqrt() < SINGULAR_TOL {
            singular = true;
            return;
        }
        let mut t = radial_power(&shifted);
        if subtract && m.iter().any(|&c| c != 0) {
            t -= radial_power(w);
        }
        acc.add_scaled(&[t], char_sign_raw(split, m));
    });
    if singular {
        return Err(Error::SingularOrbit);
    }
    Ok(acc.into_inner()[0])
}

/// Cauchy kernel on `C_k`, choosing the plain series for `k <= n-2` and the
/// regularised one for `k = n-1`.
pub fn cyl_cauchy_auto(l: &Lattice, chi: &BundleCharacter, x: &VectorN, y: &VectorN, radius: usize) -> Result<KernelEval> {
    if l.rank() + 1 == l.dim() {
        cyl_cauchy_reg(l, chi, x, y, radius)
    } else {
        cyl_cauchy(l, chi, x, y, radius)
    }
}

/// Green kernel on `C_k`, choosing the plain series for `k <= n-3` and the
/// regularised one for `k = n-2`.
pub fn cyl_green_auto(l: &Lattice, chi: &BundleCharacter, x: &VectorN, y: &VectorN, radius: usize) -> Result<KernelEval> {
    if l.rank() + 2 == l.dim() {
        cyl_green_reg(l, chi, x, y, radius)
    } else {
        cyl_green(l, chi, x, y, radius)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusForm {
    #[default]
    CoupledSubtracted,
    PaperLiteral,
}

/// Monogenic kernel on the torus `T_n` with point singularities at the
/// orbits of `a` and `b`.
///
/// `CoupledSubtracted` carries residue `+1` at `a` and `-1` at `b`. For the
/// trivial bundle it sums
/// `G(x-a) - G(x-b) + Σ' [G(x-a+ω) - G(x-b+ω) - G'(ω)(b-a)]`,
/// whose summands are `O(|ω|^{-n-1})` by a second-order Taylor bound.
/// For `l >= 1` it sums `χ(m) [d(ω) - d(ω+v_1)]` over `m_1` even with
/// `d(ω) = G(x-a+ω) - G(x-b+ω)`; `χ(δ_1) = -1` makes this a regrouping of
/// `Σ χ(m) d(ω)`, and the mixed second difference is again `O(|ω|^{-n-1})`.
///
/// `PaperLiteral` sums
/// `G(x-a) + G(x-b) + Σ' χ(m) [G(x-a+ω) + G(-a-ω) + G(x-b+ω) + G(-b-ω)]`
/// term by term in shell order; no bound is available and a warning is set.
pub fn torus_cauchy_two_point(
    l: &Lattice,
    chi: &BundleCharacter,
    a: &VectorN,
    b: &VectorN,
    x: &VectorN,
    radius: usize,
    form: TorusForm,
) -> Result<KernelEval> {
    let n = l.dim();
    if l.rank() != n {
        return Err(Error::WrongRegime(format!("torus needs k = n (k = {}, n = {n})", l.rank())));
    }
    let u = check_inputs(l, chi, x, a)?;
    let v = check_inputs(l, chi, x, b)?;
    let ab = b - a;
    let coords = l.coordinates(&ab);
    if coords.iter().all(|c| (c - c.round()).abs() < SINGULAR_TOL) {
        return Err(Error::SingularInput("a and b coincide modulo the lattice".into()));
    }
    let inv_omega = 1.0 / sphere_area(n)?;
    let mut acc = KahanMv::new(n);
    let mut singular = false;
    let mut buf = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut eval_g = |base: &[f64], w: &[f64], shift: f64, sign: f64, out: &mut Vec<f64>| -> bool {
        for j in 0..n {
            buf[j] = shift * base[j] + w[j];
        }
        if buf.iter().map(|c| c * c).sum::<f64>().sqrt() < SINGULAR_TOL {
            return false;
        }
        cauchy_diff_into(&buf, inv_omega, &mut g);
        for j in 0..n {
            out[j] += sign * g[j];
        }
        true
    };
    let zero = vec![0.0; n];
    let tail;
    let mut warning = None;
    match form {
        TorusForm::CoupledSubtracted if chi.l == 0 => {
            let mut term = vec![0.0; n];
            for_each_point(l, radius, &mut |m, w| {
                term.iter_mut().for_each(|t| *t = 0.0);
                let ok = eval_g(&u.0, w, 1.0, 1.0, &mut term) && eval_g(&v.0, w, 1.0, -1.0, &mut term);
                if !ok {
                    singular = true;
                    return;
                }
                if m.iter().any(|&c| c != 0) {
                    jacobian_apply(w, &ab.0, inv_omega, &mut term);
                }
                acc.add_slice(&term);
            });
            let reach = u.norm().max(v.norm());
            tail = 0.5
                * (u.norm_sq() + v.norm_sq())
                * hessian_constant(n)
                * shell_majorant(n, l.sigma_min(), (n + 1) as f64, reach, radius);
        }
        TorusForm::CoupledSubtracted => {
            let v1 = l.basis()[0].clone();
            let mut term = vec![0.0; n];
            let mut w2 = vec![0.0; n];
            for_each_point(l, radius, &mut |m, w| {
                if m[0].rem_euclid(2) != 0 {
                    return;
                }
                for j in 0..n {
                    w2[j] = w[j] + v1.0[j];
                }
                term.iter_mut().for_each(|t| *t = 0.0);
                let ok = eval_g(&u.0, w, 1.0, 1.0, &mut term)
                    && eval_g(&v.0, w, 1.0, -1.0, &mut term)
                    && eval_g(&u.0, &w2, 1.0, -1.0, &mut term)
                    && eval_g(&v.0, &w2, 1.0, 1.0, &mut term);
                if !ok {
                    singular = true;
                    return;
                }
                acc.add_scaled(&term, char_sign_raw(chi.l, m));
            });
            let reach = u.norm().max(v.norm()) + v1.norm();
            tail = ab.norm()
                * v1.norm()
                * hessian_constant(n)
                * shell_majorant(n, l.sigma_min(), (n + 1) as f64, reach, radius);
        }
        TorusForm::PaperLiteral => {
            let mut term = vec![0.0; n];
            for_each_point(l, radius, &mut |m, w| {
                term.iter_mut().for_each(|t| *t = 0.0);
                let mut ok = eval_g(&u.0, w, 1.0, 1.0, &mut term) && eval_g(&v.0, w, 1.0, 1.0, &mut term);
                if m.iter().any(|&c| c != 0) {
                    // G(-a-ω) = G(-(a+ω))
                    ok = ok
                        && eval_g(&a.0, w, 1.0, -1.0, &mut term)
                        && eval_g(&b.0, w, 1.0, -1.0, &mut term);
                }
                if !ok {
                    singular = true;
                    return;
                }
                acc.add_scaled(&term, char_sign_raw(chi.l, m));
            });
            let _ = &zero;
            tail = f64::INFINITY;
            warning = Some("literal two-point series: convergence is not certified".into());
        }
    }
    if singular {
        return Err(Error::SingularOrbit);
    }
    let mut out = KernelEval::new(VectorN(acc.into_inner()).to_multivector(), radius, tail);
    out.warning = warning;
    Ok(out)
}

/// Subtracts `G'(ω) h = (h |ω|^2 - n ω (ω·h)) / (ω_n |ω|^{n+2})` from `out`.
fn jacobian_apply(w: &[f64], h: &[f64], inv_omega: f64, out: &mut [f64]) {
    let n = w.len();
    let r2: f64 = w.iter().map(|c| c * c).sum();
    let dot: f64 = w.iter().zip(h).map(|(p, q)| p * q).sum();
    let rn = r2.sqrt().powi(n as i32);
    for j in 0..n {
        out[j] -= inv_omega * (h[j] - n as f64 * w[j] * dot / r2) / rn;
    }
}

/// Successive shell sums of the literal torus series together with a
/// classification of their behaviour.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub radii: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    pub successive_diffs: Vec<f64>,
    /// Least-squares slope of `log diff` against `log R`.
    pub rate_exponent: f64,
    /// Norm of `K(x + v_1) - χ(δ_1) K(x)` at the largest radius.
    pub periodicity_defect: f64,
    pub status: ConvergenceStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converging,
    NonCauchy,
}

pub fn torus_literal_convergence(
    l: &Lattice,
    chi: &BundleCharacter,
    a: &VectorN,
    b: &VectorN,
    x: &VectorN,
    radii: &[usize],
) -> Result<ConvergenceReport> {
    if radii.len() < 3 {
        return Err(Error::InvalidScheme("need at least three radii".into()));
    }
    let mut values = Vec::new();
    for &r in radii {
        let k = torus_cauchy_two_point(l, chi, a, b, x, r, TorusForm::PaperLiteral)?;
        values.push(k.value.vector_part().0);
    }
    let diffs: Vec<f64> = values
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
        .collect();
    let pts: Vec<(f64, f64)> = radii[1..]
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, d)| ((*r as f64).ln(), d.ln()))
        .collect();
    let rate = fit_slope(&pts);
    let last = *radii.last().expect("non-empty");
    let shifted = x + &l.basis()[0];
    let k0 = torus_cauchy_two_point(l, chi, a, b, x, last, TorusForm::PaperLiteral)?;
    let k1 = torus_cauchy_two_point(l, chi, a, b, &shifted, last, TorusForm::PaperLiteral)?;
    let s = if chi.l >= 1 { -1.0 } else { 1.0 };
    let defect = (&k1.value - &k0.value.scale(s)).norm();
    let status = if rate < -0.5 && defect < 1e-2 { ConvergenceStatus::Converging } else { ConvergenceStatus::NonCauchy };
    Ok(ConvergenceReport {
        radii: radii.to_vec(),
        values,
        successive_diffs: diffs,
        rate_exponent: rate,
        periodicity_defect: defect,
        status,
    })
}

pub(crate) fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{dirac_fd, laplace_fd, FdScheme, Side};
    use crate::kernels_euclid::{cauchy_g, green_h};
    use std::f64::consts::PI;

    fn unit(n: usize, k: usize) -> Lattice {
        Lattice::standard(n, k).unwrap()
    }

    #[test]
    fn eisenstein_tail_against_brute_force() {
        let l = unit(1, 1);
        let bound = eisenstein_tail(&l, 10, 2.0).unwrap();
        let brute: f64 = 2.0 * (11..2_000_000).map(|r| 1.0 / (r as f64).powi(2)).sum::<f64>();
        assert!((brute - 0.1904).abs() < 1e-3);
        assert!(bound >= brute);
        assert!(bound < 1.05 * brute);
        let ratio = eisenstein_tail(&l, 20, 2.0).unwrap() / bound;
        assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
        assert!(matches!(eisenstein_tail(&l, 10, 1.0), Err(Error::Divergent { .. })));
    }

    #[test]
    fn eisenstein_tail_decreases() {
        let l = Lattice::new(3, vec![VectorN(vec![1.0, 0.3, 0.0]), VectorN(vec![0.0, 1.2, 0.1])]).unwrap();
        let mut prev = f64::INFINITY;
        for r in [1, 2, 4, 8, 16, 32, 64] {
            let t = eisenstein_tail(&l, r, 3.0).unwrap();
            assert!(t < prev);
            prev = t;
        }
        assert!(prev < 0.1 * eisenstein_tail(&l, 1, 3.0).unwrap());
    }

    #[test]
    fn eisenstein_tail_bounds_a_two_dimensional_sum() {
        let l = unit(2, 2);
        let s = 3.0;
        let bound = eisenstein_tail(&l, 5, s).unwrap();
        let mut brute = 0.0;
        for i in -400i64..=400 {
            for j in -400i64..=400 {
                if i.abs().max(j.abs()) > 5 {
                    brute += ((i * i + j * j) as f64).powf(-s / 2.0);
                }
            }
        }
        assert!(bound >= brute, "{bound} < {brute}");
    }

    #[test]
    fn pair_cancellation_at_half_period() {
        // z = (1/2, 0.3, 0): the terms m and -1-m have opposite e_1 parts,
        // so only the unpaired m = R survives.
        let l = unit(3, 1);
        let z = VectorN(vec![0.5, 0.3, 0.0]);
        let origin = VectorN::zeros(3);
        for radius in [0usize, 3, 10] {
            let k = cyl_cauchy(&l, &BundleCharacter::trivial(), &z, &origin, radius).unwrap();
            let lone = cauchy_g(&VectorN(vec![0.5 + radius as f64, 0.3, 0.0]), &origin).unwrap();
            assert!((k.value.vector_part()[0] - lone[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn regime_errors() {
        let x = VectorN(vec![0.3, 0.2, 0.1]);
        let y = VectorN::zeros(3);
        let chi = BundleCharacter::trivial();
        assert!(matches!(cyl_cauchy(&unit(3, 2), &chi, &x, &y, 5), Err(Error::WrongRegime(_))));
        assert!(matches!(cyl_cauchy_reg(&unit(3, 1), &chi, &x, &y, 5), Err(Error::WrongRegime(_))));
        assert!(matches!(cyl_green(&unit(3, 1), &chi, &x, &y, 5), Err(Error::WrongRegime(_))));
        assert!(matches!(cyl_green_reg(&unit(3, 2), &chi, &x, &y, 5), Err(Error::WrongRegime(_))));
        let on_orbit = VectorN(vec![2.0, 0.0, 0.0]);
        assert_eq!(cyl_cauchy(&unit(3, 1), &chi, &on_orbit, &y, 5), Err(Error::SingularOrbit));
    }

    #[test]
    fn brute_force_sum_agrees() {
        let l = Lattice::new(4, vec![VectorN(vec![1.0, 0.0, 0.2, 0.0]), VectorN(vec![0.1, 1.3, 0.0, 0.0])]).unwrap();
        let x = VectorN(vec![0.3, -0.4, 0.5, 0.2]);
        let y = VectorN(vec![-0.1, 0.2, 0.0, 0.7]);
        let chi = BundleCharacter::with_split(1);
        let k = cyl_cauchy(&l, &chi, &x, &y, 6).unwrap();
        let mut brute = VectorN::zeros(4);
        for i in -6i64..=6 {
            for j in -6i64..=6 {
                let w = &l.basis()[0].scale(i as f64) + &l.basis()[1].scale(j as f64);
                let s = if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                brute = &brute + &cauchy_g(&(&x + &w), &y).unwrap().scale(s);
            }
        }
        assert!((&k.value.vector_part() - &brute).norm() < 1e-14);
        let h = cyl_green(&unit(5, 1), &BundleCharacter::trivial(), &VectorN(vec![0.1; 5]), &VectorN::zeros(5), 4).unwrap();
        let hb: f64 = (-4..=4)
            .map(|i| {
                let mut p = VectorN(vec![0.1; 5]);
                p[0] += i as f64;
                green_h(&p, &VectorN::zeros(5)).unwrap()
            })
            .sum();
        assert!((h.value.scalar_part() - hb).abs() < 1e-15);
    }

    fn equivariance_case(l: &Lattice, chi: BundleCharacter, kernel: fn(&Lattice, &BundleCharacter, &VectorN, &VectorN, usize) -> Result<KernelEval>, radius: usize) {
        let n = l.dim();
        let x = VectorN((0..n).map(|i| 0.37 - 0.11 * i as f64).collect());
        let y = VectorN((0..n).map(|i| -0.05 + 0.09 * i as f64).collect());
        let k0 = kernel(l, &chi, &x, &y, radius).unwrap();
        for i in 0..l.rank() {
            let xs = &x + &l.basis()[i];
            let k1 = kernel(l, &chi, &xs, &y, radius).unwrap();
            let s = if i < chi.l { -1.0 } else { 1.0 };
            let dev = (&k1.value - &k0.value.scale(s)).norm();
            assert!(
                dev <= k0.tail_bound + k1.tail_bound,
                "n={n} k={} l={} i={i}: {dev} > {}",
                l.rank(),
                chi.l,
                k0.tail_bound + k1.tail_bound
            );
        }
        let k2 = kernel(l, &chi, &x, &y, 2 * radius).unwrap();
        let dev = (&k2.value - &k0.value).norm();
        assert!(dev <= k0.tail_bound + k2.tail_bound);
        assert!(k2.tail_bound < k0.tail_bound);
    }

    #[test]
    fn equivariance_and_truncation_consistency() {
        for l in [unit(4, 1), unit(4, 2)] {
            for chi in [BundleCharacter::trivial(), BundleCharacter::with_split(1)] {
                equivariance_case(&l, chi, cyl_cauchy, 30);
            }
        }
        equivariance_case(&unit(3, 2), BundleCharacter::with_split(1), cyl_cauchy_reg, 30);
        equivariance_case(&unit(3, 2), BundleCharacter::trivial(), cyl_cauchy_reg, 30);
        equivariance_case(&unit(5, 1), BundleCharacter::with_split(1), cyl_green, 30);
        equivariance_case(&unit(4, 2), BundleCharacter::trivial(), cyl_green_reg, 30);
        equivariance_case(&unit(4, 2), BundleCharacter::with_split(2), cyl_green_reg, 30);
    }

    #[test]
    fn cauchy_kernels_are_two_sided_monogenic() {
        let s = FdScheme::default();
        let cases: Vec<(Lattice, fn(&Lattice, &BundleCharacter, &VectorN, &VectorN, usize) -> Result<KernelEval>)> =
            vec![(unit(4, 1), cyl_cauchy), (unit(4, 2), cyl_cauchy), (unit(3, 2), cyl_cauchy_reg)];
        for (l, kernel) in cases {
            let n = l.dim();
            let y = VectorN::zeros(n);
            let x = VectorN((0..n).map(|i| 0.45 - 0.1 * i as f64).collect());
            for chi in [BundleCharacter::trivial(), BundleCharacter::with_split(1)] {
                let tau = kernel(&l, &chi, &x, &y, 40).unwrap().tail_bound;
                let f = |z: &VectorN| kernel(&l, &chi, z, &y, 40).unwrap().value;
                for side in [Side::Left, Side::Right] {
                    let r = dirac_fd(f, &x, &s, side).norm();
                    assert!(r <= 1e-5f64.max(10.0 * tau), "n={n} side={side:?}: {r}");
                }
            }
        }
    }

    #[test]
    fn green_kernels_symmetric_and_harmonic() {
        let s = FdScheme::default();
        let l = unit(5, 1);
        let chi = BundleCharacter::trivial();
        let x = VectorN(vec![0.5, 0.2, -0.3, 0.4, 0.1]);
        let y = VectorN(vec![0.0, -0.2, 0.1, 0.0, 0.3]);
        let a = cyl_green(&l, &chi, &x, &y, 40).unwrap().value.scalar_part();
        let b = cyl_green(&l, &chi, &y, &x, 40).unwrap().value.scalar_part();
        assert!((a - b).abs() < 1e-14);
        let f = |z: &VectorN| cyl_green(&l, &chi, z, &y, 40).unwrap().value;
        assert!(laplace_fd(f, &x, &s).norm() <= 1e-5);
        let l2 = unit(4, 2);
        let x4 = VectorN(vec![0.5, 0.3, -0.3, 0.4]);
        let y4 = VectorN(vec![0.0, -0.2, 0.1, 0.0]);
        let f = |z: &VectorN| cyl_green_reg(&l2, &BundleCharacter::with_split(1), z, &y4, 40).unwrap().value;
        assert!(laplace_fd(f, &x4, &s).norm() <= 1e-5);
    }

    #[test]
    fn regularised_series_converges_at_rate_one() {
        let l = unit(3, 2);
        let chi = BundleCharacter::trivial();
        let x = VectorN(vec![0.3, 0.2, 0.4]);
        let y = VectorN::zeros(3);
        let radii = [8usize, 16, 32, 64];
        let pts: Vec<(f64, f64)> = radii
            .iter()
            .map(|&r| {
                let a = cyl_cauchy_reg(&l, &chi, &x, &y, r).unwrap().value;
                let b = cyl_cauchy_reg(&l, &chi, &x, &y, 2 * r).unwrap().value;
                ((r as f64).ln(), (&a - &b).norm().ln())
            })
            .collect();
        let slope = fit_slope(&pts);
        assert!((-1.4..=-0.6).contains(&slope), "{slope}");
    }

    #[test]
    fn regularised_leading_term_dominates_near_source() {
        let l = unit(3, 2);
        let y = VectorN::zeros(3);
        let x = VectorN(vec![0.0, 0.0, 1e-4]);
        let k = cyl_cauchy_reg(&l, &BundleCharacter::trivial(), &x, &y, 10).unwrap();
        let g = cauchy_g(&x, &y).unwrap();
        assert!((&k.value.vector_part() - &g).norm() < 1e-6 * g.norm());
        assert!((g.norm() - 1.0 / (4.0 * PI * 1e-8)).abs() < 1e-3 * g.norm());
    }

    #[test]
    fn torus_kernel_is_periodic_and_monogenic() {
        let l = unit(3, 3);
        let a = VectorN(vec![0.1, 0.2, 0.3]);
        let b = VectorN(vec![-0.3, 0.1, -0.2]);
        let x = VectorN(vec![0.4, -0.35, 0.05]);
        for chi in [BundleCharacter::trivial(), BundleCharacter::with_split(1), BundleCharacter::with_split(2)] {
            let k0 = torus_cauchy_two_point(&l, &chi, &a, &b, &x, 24, TorusForm::CoupledSubtracted).unwrap();
            assert!(k0.tail_bound.is_finite() && k0.warning.is_none());
            for i in 0..3 {
                let xs = &x + &l.basis()[i];
                let k1 = torus_cauchy_two_point(&l, &chi, &a, &b, &xs, 24, TorusForm::CoupledSubtracted).unwrap();
                let s = if i < chi.l { -1.0 } else { 1.0 };
                let dev = (&k1.value - &k0.value.scale(s)).norm();
                assert!(dev <= k0.tail_bound + k1.tail_bound + 1e-3, "l={} i={i}: {dev}", chi.l);
            }
            let f = |z: &VectorN| torus_cauchy_two_point(&l, &chi, &a, &b, z, 16, TorusForm::CoupledSubtracted).unwrap().value;
            assert!(dirac_fd(f, &x, &FdScheme::default(), Side::Left).norm() < 1e-5);
        }
    }

    #[test]
    fn torus_kernel_blows_up_only_at_the_sources() {
        let l = unit(3, 3);
        let chi = BundleCharacter::trivial();
        let a = VectorN(vec![0.1, 0.2, 0.3]);
        let b = VectorN(vec![-0.3, 0.1, -0.2]);
        // walk from a to b + v_1 and record |K| t^2-scaled near each end
        let target = &b + &l.basis()[0];
        let mut mags = Vec::new();
        for i in 1..40 {
            let t = i as f64 / 40.0;
            let p = &a.scale(1.0 - t) + &target.scale(t);
            let k = torus_cauchy_two_point(&l, &chi, &a, &b, &p, 8, TorusForm::CoupledSubtracted).unwrap();
            mags.push(k.value.norm());
        }
        let mid = mags[mags.len() / 2];
        assert!(mags[0] > 50.0 * mid && mags[mags.len() - 1] > 50.0 * mid);
        let near_a = &a + &VectorN(vec![1e-3, 0.0, 0.0]);
        let k = torus_cauchy_two_point(&l, &chi, &a, &b, &near_a, 8, TorusForm::CoupledSubtracted).unwrap();
        let g = cauchy_g(&near_a, &a).unwrap();
        assert!((&k.value.vector_part() - &g).norm() < 1e-2 * g.norm());
        assert!(torus_cauchy_two_point(&l, &chi, &a, &(&a + &l.basis()[1]), &x0(), 4, TorusForm::CoupledSubtracted).is_err());
        assert_eq!(
            torus_cauchy_two_point(&l, &chi, &a, &b, &(&a + &l.basis()[2]), 4, TorusForm::CoupledSubtracted),
            Err(Error::SingularOrbit)
        );
    }

    fn x0() -> VectorN {
        VectorN(vec![0.4, 0.4, 0.4])
    }

    #[test]
    fn literal_torus_series_status_is_reported() {
        let l = unit(2, 2);
        let a = VectorN(vec![0.1, 0.2]);
        let b = VectorN(vec![-0.3, 0.35]);
        let x = VectorN(vec![0.42, -0.17]);
        let rep = torus_literal_convergence(&l, &BundleCharacter::trivial(), &a, &b, &x, &[4, 8, 16, 32, 64]).unwrap();
        assert_eq!(rep.values.len(), 5);
        assert_eq!(rep.successive_diffs.len(), 4);
        assert!(rep.rate_exponent.is_finite());
        // residues +1 at both a and b cannot be periodic with the trivial bundle
        assert_eq!(rep.status, ConvergenceStatus::NonCauchy);
        let k = torus_cauchy_two_point(&l, &BundleCharacter::trivial(), &a, &b, &x, 4, TorusForm::PaperLiteral).unwrap();
        assert!(k.warning.is_some());
    }

    #[test]
    fn kernel_eval_serialises() {
        let k = KernelEval::new(MultiVector::scalar(2, 1.5), 3, 0.25);
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains("\"trunc_radius\":3") && s.contains("\"tail_bound\":0.25"));
    }
}
