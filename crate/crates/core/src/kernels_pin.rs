//! Kernels on the non-orientable quotients: projective cylinders `M_{k,p}`,
//! real projective spaces, Möbius strips and Klein bottles.
//!
//! Each kernel comes in two forms. `Orbit` sums the Euclidean kernel over
//! the deck group acting on the source point, weighted by the bundle sign,
//! so every summand is a translate of `G` or `H` in `x`. `PaperLiteral`
//! evaluates the displayed series, where the signs act inside the kernel
//! argument; those collapse to cylinder kernels (see the tests).

use serde::{Deserialize, Serialize};

use crate::calculus::{dirac_fd, laplace_fd, FdScheme, Side};
use crate::clifford::{reflect_coords, KahanMv, MultiVector, VectorN};
use crate::error::{Error, Result};
use crate::kernels_euclid::{cauchy_g, green_normalisation, radial_power};
use crate::kernels_periodic::{
    cyl_cauchy_auto, cyl_green, cyl_green_auto, cyl_green_reg, shell_majorant, KernelEval,
    SINGULAR_TOL,
};
use crate::lattice::{char_sign_raw, for_each_point, moebius_sgn_raw, BundleCharacter, ManifoldKind, ManifoldSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    #[default]
    Orbit,
    PaperLiteral,
}

/// All subsets of `axes`, as sorted index lists, in binary counting order.
fn subsets(axes: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << axes.len())
        .map(|mask| axes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a).collect())
        .collect()
}

fn expect_kind(m: &ManifoldSpec, kinds: &[ManifoldKind]) -> Result<()> {
    if kinds.contains(&m.kind) {
        Ok(())
    } else {
        Err(Error::InvalidManifold(format!("expected {kinds:?}, got {:?}", m.kind)))
    }
}

fn check_dims(n: usize, x: &VectorN, y: &VectorN) -> Result<()> {
    for v in [x, y] {
        if v.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
        }
    }
    Ok(())
}

fn twist(chi: &BundleCharacter, flips: usize) -> f64 {
    if chi.negate_fiber && flips % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

type CylKernel = fn(&crate::lattice::Lattice, &BundleCharacter, &VectorN, &VectorN, usize) -> Result<KernelEval>;

fn class_a_sum(m: &ManifoldSpec, x: &VectorN, y: &VectorN, radius: usize, form: KernelForm, cyl: CylKernel) -> Result<KernelEval> {
    expect_kind(m, &[ManifoldKind::Projective])?;
    check_dims(m.n, x, y)?;
    let l = m.lattice()?;
    let origin = VectorN::zeros(m.n);
    let diff = x - y;
    let mut value = MultiVector::zero(m.n);
    let mut tail = 0.0;
    for a in subsets(&m.reflection_axes()) {
        let k = match form {
            KernelForm::Orbit => {
                let k = cyl(l, &m.bundle, x, &reflect_coords(y, &a)?, radius)?;
                KernelEval { value: k.value.scale(twist(&m.bundle, a.len())), ..k }
            }
            KernelForm::PaperLiteral => cyl(l, &m.bundle, &reflect_coords(&diff, &a)?, &origin, radius)?,
        };
        value += &k.value;
        tail += k.tail_bound;
    }
    Ok(KernelEval::new(value, radius, tail))
}

/// Cauchy kernel on `M_{k,p}`; the regularised cylinder series is used when
/// `k = n - 1`.
pub fn proj_cauchy(m: &ManifoldSpec, x: &VectorN, y: &VectorN, radius: usize, form: KernelForm) -> Result<KernelEval> {
    class_a_sum(m, x, y, radius, form, cyl_cauchy_auto)
}

/// Green kernel on `M_{k,p}`; the regularised cylinder series is used when
/// `k = n - 2`.
pub fn proj_green(m: &ManifoldSpec, x: &VectorN, y: &VectorN, radius: usize, form: KernelForm) -> Result<KernelEval> {
    class_a_sum(m, x, y, radius, form, cyl_green_auto)
}

/// Cauchy kernel on the real projective space obtained by the reflections
/// in the first `p` coordinates.
pub fn realproj_cauchy(p: usize, x: &VectorN, y: &VectorN, form: KernelForm) -> Result<MultiVector> {
    let n = x.dim();
    check_dims(n, x, y)?;
    if p > n {
        return Err(Error::InvalidManifold(format!("p = {p} exceeds n = {n}")));
    }
    let axes: Vec<usize> = (0..p).collect();
    let diff = x - y;
    let origin = VectorN::zeros(n);
    let mut acc = KahanMv::new(n);
    for a in subsets(&axes) {
        let g = match form {
            KernelForm::Orbit => cauchy_g(x, &reflect_coords(y, &a)?),
            KernelForm::PaperLiteral => cauchy_g(&reflect_coords(&diff, &a)?, &origin),
        }
        .map_err(|e| if e == Error::CoincidentPoints { Error::SingularOrbit } else { e })?;
        acc.add_slice(&g.0);
    }
    Ok(VectorN(acc.into_inner()).to_multivector())
}

/// Axis reflected by the orientation-reversing elements of a Class B group.
fn flip_axis(m: &ManifoldSpec) -> usize {
    match m.kind {
        ManifoldKind::KleinBottle => m.k() - 1,
        _ => m.n - 1,
    }
}

fn is_flipping(m: &ManifoldSpec, coeffs: &[i64]) -> bool {
    match m.kind {
        ManifoldKind::MoebiusStrip => moebius_sgn_raw(coeffs, m.sign_variant) < 0.0,
        ManifoldKind::KleinBottle => coeffs[m.k() - 1].rem_euclid(2) == 1,
        _ => false,
    }
}

fn class_b_weight(m: &ManifoldSpec, coeffs: &[i64], flipped: bool) -> f64 {
    char_sign_raw(m.bundle.l, coeffs) * twist(&m.bundle, flipped as usize)
}

/// `Σ_m ρ(γ_m) H(x, γ_m y)` over the Möbius or Klein group. With
/// `regularise`, the trivial bundle subtracts `H(ω)` and a nontrivial one
/// pairs `m` with `m + δ_j` for a generator with `ρ(δ_j) = -1`.
fn class_b_orbit(m: &ManifoldSpec, x: &VectorN, y: &VectorN, radius: usize, regularise: bool) -> Result<KernelEval> {
    let l = m.lattice()?;
    let (n, k) = (m.n, m.k());
    let c = green_normalisation(n)?;
    let axis = flip_axis(m);
    let mut sy = y.clone();
    sy.0[axis] = -sy.0[axis];
    let reach = (x - y).norm().max((x - &sy).norm());
    let pair = if regularise {
        (0..k).find(|&j| {
            let mut d = vec![0; k];
            d[j] = 1;
            class_b_weight(m, &d, is_flipping(m, &d)) < 0.0
        })
    } else {
        None
    };
    let mut acc = KahanMv::new(1);
    let mut diff = vec![0.0; n];
    let mut singular = false;
    let mut shifted_m = vec![0i64; k];
    let mut w2 = vec![0.0; n];
    let mut h_at = |coeffs: &[i64], w: &[f64], singular: &mut bool| -> f64 {
        let src = if is_flipping(m, coeffs) { &sy } else { y };
        for j in 0..n {
            diff[j] = x.0[j] - src.0[j] - w[j];
        }
        if diff.iter().map(|v| v * v).sum::<f64>().sqrt() < SINGULAR_TOL {
            *singular = true;
            return 0.0;
        }
        radial_power(&diff)
    };
    for_each_point(l, radius, &mut |coeffs, w| {
        let weight = class_b_weight(m, coeffs, is_flipping(m, coeffs));
        match (regularise, pair) {
            (true, Some(j)) => {
                if coeffs[j].rem_euclid(2) != 0 {
                    return;
                }
                shifted_m.copy_from_slice(coeffs);
                shifted_m[j] += 1;
                l.point_into(&shifted_m, &mut w2);
                let t = h_at(coeffs, w, &mut singular) - h_at(&shifted_m, &w2, &mut singular);
                acc.add_scaled(&[t], weight);
            }
            (true, None) => {
                let mut t = h_at(coeffs, w, &mut singular);
                if coeffs.iter().any(|&v| v != 0) {
                    t -= radial_power(w);
                }
                acc.add_scaled(&[t], weight);
            }
            (false, _) => acc.add_scaled(&[h_at(coeffs, w, &mut singular)], weight),
        }
    });
    if singular {
        return Err(Error::SingularOrbit);
    }
    let nf = n as f64;
    let sigma = l.sigma_min();
    let tail = match (regularise, pair) {
        (false, _) => shell_majorant(k, sigma, nf - 2.0, reach, radius),
        (true, None) => reach * (nf - 2.0) * shell_majorant(k, sigma, nf - 1.0, reach, radius),
        (true, Some(j)) => {
            let d = l.basis()[j].norm() + 2.0 * y.0[axis].abs();
            d * (nf - 2.0) * shell_majorant(k, sigma, nf - 1.0, reach + d, radius)
        }
    } * c.abs();
    Ok(KernelEval::new(MultiVector::scalar(n, acc.into_inner()[0] * c), radius, tail))
}

/// The displayed Class B series with the sign acting on a whole coordinate
/// difference, for the trivial pin bundle.
fn class_b_literal(m: &ManifoldSpec, x: &VectorN, y: &VectorN, radius: usize, regularise: bool) -> Result<KernelEval> {
    let l = m.lattice()?;
    let (n, k) = (m.n, m.k());
    let c = green_normalisation(n)?;
    let z = x - y;
    let mut acc = KahanMv::new(1);
    let mut shifted = vec![0.0; n];
    let mut coeffs = vec![0i64; k];
    let mut singular = false;
    for_each_point(l, radius, &mut |mm, w| {
        match m.kind {
            ManifoldKind::MoebiusStrip => {
                let s = moebius_sgn_raw(mm, m.sign_variant);
                for j in 0..n {
                    shifted[j] = z.0[j] + w[j];
                }
                shifted[n - 1] = s * z.0[n - 1] + w[n - 1];
            }
            _ => {
                // (-1)^{m_k} m_k in place of m_k
                coeffs.copy_from_slice(mm);
                if coeffs[k - 1].rem_euclid(2) == 1 {
                    coeffs[k - 1] = -coeffs[k - 1];
                }
                l.point_into(&coeffs, &mut shifted);
                for j in 0..n {
                    shifted[j] += z.0[j];
                }
            }
        }
        if shifted.iter().map(|v| v * v).sum::<f64>().sqrt() < SINGULAR_TOL {
            singular = true;
            return;
        }
        let mut t = radial_power(&shifted);
        if regularise && mm.iter().any(|&v| v != 0) {
            t -= radial_power(w);
        }
        acc.add_slice(&[t]);
    });
    if singular {
        return Err(Error::SingularOrbit);
    }
    let nf = n as f64;
    let zn = z.norm();
    let tail = if regularise {
        zn * (nf - 2.0) * shell_majorant(k, l.sigma_min(), nf - 1.0, zn, radius)
    } else {
        shell_majorant(k, l.sigma_min(), nf - 2.0, zn, radius)
    } * c.abs();
    Ok(KernelEval::new(MultiVector::scalar(n, acc.into_inner()[0] * c), radius, tail))
}

/// Harmonic Green kernel on the Möbius strip `M_k^-`, `k <= n - 2`
/// (regularised at `k = n - 2`).
pub fn moebius_green(m: &ManifoldSpec, x: &VectorN, y: &VectorN, radius: usize, form: KernelForm) -> Result<KernelEval> {
    expect_kind(m, &[ManifoldKind::MoebiusStrip])?;
    check_dims(m.n, x, y)?;
    let (n, k) = (m.n, m.k());
    if n < 3 || k + 2 > n {
        return Err(Error::WrongRegime(format!("Moebius Green kernel needs k <= n-2 (k = {k}, n = {n})")));
    }
    let regularise = k + 2 == n;
    match form {
        KernelForm::Orbit => class_b_orbit(m, x, y, radius, regularise),
        KernelForm::PaperLiteral => class_b_literal(m, x, y, radius, regularise),
    }
}

/// Harmonic Green kernel on the Klein bottle `K_k`, `k < n - 2`.
pub fn klein_green(m: &ManifoldSpec, x: &VectorN, y: &VectorN, radius: usize, form: KernelForm) -> Result<KernelEval> {
    expect_kind(m, &[ManifoldKind::KleinBottle])?;
    check_dims(m.n, x, y)?;
    let (n, k) = (m.n, m.k());
    if k + 3 > n {
        return Err(Error::WrongRegime(format!("Klein Green kernel needs k < n-2 (k = {k}, n = {n})")));
    }
    match form {
        KernelForm::Orbit => class_b_orbit(m, x, y, radius, false),
        KernelForm::PaperLiteral => class_b_literal(m, x, y, radius, false),
    }
}

/// Cylinder Green kernel with the trivial bundle, used as the reference for
/// the literal-form collapse identities.
pub fn oriented_cylinder_green(m: &ManifoldSpec, x: &VectorN, y: &VectorN, radius: usize) -> Result<KernelEval> {
    let l = m.lattice()?;
    if l.rank() + 2 == l.dim() {
        cyl_green_reg(l, &BundleCharacter::trivial(), x, y, radius)
    } else {
        cyl_green(l, &BundleCharacter::trivial(), x, y, radius)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentEntry {
    pub sample: usize,
    pub generator: usize,
    pub deviation: f64,
    /// `τ(x) + τ(γx)`.
    pub allowance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentReport {
    pub entries: Vec<DescentEntry>,
    pub max_deviation: f64,
    pub max_tail_bound: f64,
    pub passed: bool,
}

/// Max over samples and generators of `‖K(γx, y) - ρ(γ) γ_*K(x, y)‖`, where
/// `γ_*` reflects the value along the flipped axes.
pub fn descent_check<F>(m: &ManifoldSpec, kernel: F, samples: &[(VectorN, VectorN)]) -> Result<DescentReport>
where
    F: Fn(&VectorN, &VectorN) -> Result<KernelEval>,
{
    let gens = m.generators();
    let mut entries = Vec::new();
    let mut max_tail = 0.0f64;
    for (si, (x, y)) in samples.iter().enumerate() {
        let k0 = kernel(x, y)?;
        max_tail = max_tail.max(k0.tail_bound);
        for (gi, g) in gens.iter().enumerate() {
            let k1 = kernel(&m.act(g, x), y)?;
            max_tail = max_tail.max(k1.tail_bound);
            let expected = k0.value.reflect_axes(&g.flips).scale(m.fiber_sign(g));
            entries.push(DescentEntry {
                sample: si,
                generator: gi,
                deviation: (&k1.value - &expected).norm(),
                allowance: k0.tail_bound + k1.tail_bound,
            });
        }
    }
    let max_deviation = entries.iter().map(|e| e.deviation).fold(0.0, f64::max);
    let passed = entries.iter().all(|e| e.deviation <= e.allowance + 1e-13);
    Ok(DescentReport { entries, max_deviation, max_tail_bound: max_tail, passed })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub axis: usize,
    pub residuals: Vec<f64>,
    pub min_residual: f64,
    /// Whether every reflected sample fails to be monogenic by at least `1e-3`.
    pub consistent: bool,
}

/// Dirac residuals of `x -> f(σ_axis x)`; a nonconstant monogenic `f` should
/// not stay monogenic after the reflection.
pub fn monogenic_obstruction_probe<F>(f: F, axis: usize, samples: &[VectorN]) -> Result<ObstructionReport>
where
    F: Fn(&VectorN) -> MultiVector,
{
    let scheme = FdScheme::default();
    let mut residuals = Vec::with_capacity(samples.len());
    for x in samples {
        if axis >= x.dim() {
            return Err(Error::IndexOutOfRange { index: axis, len: x.dim() });
        }
        let reflected = |z: &VectorN| {
            let mut r = z.clone();
            r.0[axis] = -r.0[axis];
            f(&r)
        };
        residuals.push(dirac_fd(reflected, x, &scheme, Side::Left).norm());
    }
    let min_residual = residuals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ObstructionReport { axis, consistent: min_residual >= 1e-3, residuals, min_residual })
}

/// Largest Laplace residual of `x -> f(σ_axis x)` over the samples.
pub fn reflected_harmonic_residual<F>(f: F, axis: usize, samples: &[VectorN]) -> f64
where
    F: Fn(&VectorN) -> MultiVector,
{
    let scheme = FdScheme::default();
    samples
        .iter()
        .map(|x| {
            let reflected = |z: &VectorN| {
                let mut r = z.clone();
                r.0[axis] = -r.0[axis];
                f(&r)
            };
            laplace_fd(reflected, x, &scheme).norm()
        })
        .fold(0.0, f64::max)
}

/// Sample points in `R^3` used for the obstruction probe.
pub fn obstruction_samples() -> Vec<VectorN> {
    [[0.5, 2.5, 0.7], [1.0, 3.0, 0.5], [-0.4, 2.2, -0.6], [0.3, 1.8, 0.9], [-1.1, 2.9, 0.2], [0.8, 3.6, -0.4]]
        .iter()
        .map(|p| VectorN(p.to_vec()))
        .collect()
}

/// Nonconstant left monogenic functions on `R^3` used by the probe.
pub fn obstruction_functions() -> Vec<(&'static str, Box<dyn Fn(&VectorN) -> MultiVector + Send + Sync>)> {
    let source_a = VectorN(vec![0.0, 3.0, 0.0]);
    let source_b = VectorN(vec![0.5, 1.2, 1.8]);
    vec![
        (
            "cauchy kernel with source 3e2",
            Box::new(move |x: &VectorN| cauchy_g(x, &source_a).expect("sample off source").to_multivector()),
        ),
        (
            "cauchy kernel with source (0.5,1.2,1.8)",
            Box::new(move |x: &VectorN| cauchy_g(x, &source_b).expect("sample off source").to_multivector()),
        ),
        (
            "x1 - x3 e1e3",
            Box::new(|x: &VectorN| {
                let mut v = MultiVector::scalar(3, x[0]);
                v += &MultiVector::blade(3, 0b101, -x[2]);
                v
            }),
        ),
    ]
}

/// Harmonic functions on `R^3` whose reflections stay harmonic.
pub fn reflected_harmonic_functions() -> Vec<(&'static str, Box<dyn Fn(&VectorN) -> MultiVector + Send + Sync>)> {
    let source = VectorN(vec![0.2, -1.0, 2.5]);
    vec![
        ("x1^2 - x2^2", Box::new(|x: &VectorN| MultiVector::scalar(3, x[0] * x[0] - x[1] * x[1]))),
        ("x1 x3", Box::new(|x: &VectorN| MultiVector::scalar(3, x[0] * x[2]))),
        (
            "|x - (0.2,-1,2.5)|^-1",
            Box::new(move |x: &VectorN| MultiVector::scalar(3, 1.0 / (x - &source).norm())),
        ),
    ]
}
