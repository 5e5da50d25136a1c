//! Surface quadrature and the boundary-integral engines: Cauchy and Green
//! formulas, the doubling check, the Plemelj jump probe and the order of a
//! zero.
//!
//! Integrals use the oriented element `dΣ = -n dσ` with `n` the outward
//! unit normal. With `e_i² = -1` this makes `∫ G(x - y) dΣ(x) = 1` for `y`
//! inside the surface.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{dirac_fd, FdScheme, Side};
use crate::clifford::{KahanMv, MultiVector, VectorN};
use crate::error::{Error, Result};
use crate::kernels_euclid::{cauchy_g, green_h};

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Golub–Welsch).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 0 {
        return (Vec::new(), Vec::new());
    }
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrise to remove eigensolver noise
    for i in 0..m / 2 {
        let (a, b) = (pairs[i], pairs[m - 1 - i]);
        let x = 0.5 * (b.0 - a.0);
        let w = 0.5 * (a.1 + b.1);
        pairs[i] = (-x, w);
        pairs[m - 1 - i] = (x, w);
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceNode {
    pub position: VectorN,
    /// Outward unit normal.
    pub normal: VectorN,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SurfaceDescriptor {
    /// Polar angles get Gauss–Legendre points, the azimuth a trapezoid rule.
    /// `grid` is either `[n_theta, n_phi]` or one entry per angle.
    Sphere { center: Vec<f64>, radius: f64, grid: Vec<usize> },
    /// Axis-aligned box with `resolution` Gauss–Legendre points per face
    /// direction.
    Box { corner: Vec<f64>, extents: Vec<f64>, resolution: usize },
    Union { parts: Vec<SurfaceDescriptor> },
    /// Mirror image of `inner` under the coordinate reflection in `axes`.
    Reflected { axes: Vec<usize>, inner: Box<SurfaceDescriptor> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypersurface {
    pub nodes: Vec<SurfaceNode>,
    pub descriptor: SurfaceDescriptor,
}

impl Hypersurface {
    pub fn sphere(center: VectorN, radius: f64, grid: &[usize]) -> Result<Self> {
        Self::from_descriptor(&SurfaceDescriptor::Sphere { center: center.0, radius, grid: grid.to_vec() })
    }

    pub fn cuboid(corner: VectorN, extents: VectorN, resolution: usize) -> Result<Self> {
        Self::from_descriptor(&SurfaceDescriptor::Box { corner: corner.0, extents: extents.0, resolution })
    }

    pub fn union(parts: Vec<Hypersurface>) -> Result<Self> {
        let n = parts.first().map(Hypersurface::dim);
        if parts.iter().any(|p| Some(p.dim()) != n) {
            return Err(Error::InvalidSurface("union parts differ in dimension".into()));
        }
        let descriptor = SurfaceDescriptor::Union { parts: parts.iter().map(|p| p.descriptor.clone()).collect() };
        let nodes = parts.into_iter().flat_map(|p| p.nodes).collect();
        Ok(Hypersurface { nodes, descriptor })
    }

    pub fn reflected(&self, axes: &[usize]) -> Result<Self> {
        Self::from_descriptor(&SurfaceDescriptor::Reflected { axes: axes.to_vec(), inner: Box::new(self.descriptor.clone()) })
    }

    pub fn from_descriptor(d: &SurfaceDescriptor) -> Result<Self> {
        let nodes = match d {
            SurfaceDescriptor::Sphere { center, radius, grid } => sphere_nodes(center, *radius, grid)?,
            SurfaceDescriptor::Box { corner, extents, resolution } => box_nodes(corner, extents, *resolution)?,
            SurfaceDescriptor::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidSurface("empty union".into()));
                }
                let parts = parts.iter().map(Self::from_descriptor).collect::<Result<Vec<_>>>()?;
                return Self::union(parts);
            }
            SurfaceDescriptor::Reflected { axes, inner } => {
                let base = Self::from_descriptor(inner)?;
                let n = base.dim();
                if let Some(&bad) = axes.iter().find(|&&a| a >= n) {
                    return Err(Error::IndexOutOfRange { index: bad, len: n });
                }
                let flip = |v: &VectorN| {
                    let mut out = v.clone();
                    for &a in axes {
                        out.0[a] = -out.0[a];
                    }
                    out
                };
                base.nodes
                    .iter()
                    .map(|nd| SurfaceNode { position: flip(&nd.position), normal: flip(&nd.normal), weight: nd.weight })
                    .collect()
            }
        };
        Ok(Hypersurface { nodes, descriptor: d.clone() })
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(0, |nd| nd.position.dim())
    }

    pub fn total_weight(&self) -> f64 {
        let mut acc = KahanMv::new(1);
        for nd in &self.nodes {
            acc.add_slice(&[nd.weight]);
        }
        acc.into_inner()[0]
    }

    /// Whether `y` lies strictly inside the enclosed region; `None` when it
    /// lies on the surface.
    pub fn contains(&self, y: &VectorN) -> Option<bool> {
        containment(&self.descriptor, y)
    }

    /// Typical distance between neighbouring nodes.
    pub fn node_spacing(&self) -> f64 {
        let n = self.dim() as f64;
        let mean_w = self.total_weight() / self.nodes.len().max(1) as f64;
        mean_w.powf(1.0 / (n - 1.0).max(1.0))
    }
}

const ON_SURFACE_TOL: f64 = 1e-9;

fn containment(d: &SurfaceDescriptor, y: &VectorN) -> Option<bool> {
    match d {
        SurfaceDescriptor::Sphere { center, radius, .. } => {
            let dist = (y - &VectorN(center.clone())).norm();
            if (dist - radius).abs() <= ON_SURFACE_TOL * radius.max(1.0) {
                None
            } else {
                Some(dist < *radius)
            }
        }
        SurfaceDescriptor::Box { corner, extents, .. } => {
            let mut inside = true;
            for j in 0..corner.len() {
                let (lo, hi) = (corner[j], corner[j] + extents[j]);
                let t = y[j];
                if t < lo - ON_SURFACE_TOL || t > hi + ON_SURFACE_TOL {
                    return Some(false);
                }
                if t <= lo + ON_SURFACE_TOL || t >= hi - ON_SURFACE_TOL {
                    inside = false;
                }
            }
            if inside {
                Some(true)
            } else {
                None
            }
        }
        SurfaceDescriptor::Union { parts } => {
            let mut any = false;
            for p in parts {
                match containment(p, y) {
                    None => return None,
                    Some(true) => any = true,
                    Some(false) => {}
                }
            }
            Some(any)
        }
        SurfaceDescriptor::Reflected { axes, inner } => {
            let mut r = y.clone();
            for &a in axes {
                r.0[a] = -r.0[a];
            }
            containment(inner, &r)
        }
    }
}

fn sphere_nodes(center: &[f64], radius: f64, grid: &[usize]) -> Result<Vec<SurfaceNode>> {
    let n = center.len();
    if n < 2 || n > crate::clifford::MAX_DIM {
        return Err(Error::InvalidSurface(format!("sphere in R^{n} not supported")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidSurface("radius must be positive".into()));
    }
    let angles = n - 1;
    let counts: Vec<usize> = match grid.len() {
        2 if angles != 2 => {
            let mut c = vec![grid[0]; angles - 1];
            c.push(grid[1]);
            c
        }
        l if l == angles => grid.to_vec(),
        l => return Err(Error::InvalidSurface(format!("grid has {l} entries, expected 2 or {angles}"))),
    };
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::InvalidSurface("grid entries must be positive".into()));
    }
    let polar: Vec<(Vec<f64>, Vec<f64>)> = counts[..angles - 1]
        .iter()
        .map(|&m| {
            let (t, w) = gauss_legendre(m);
            let half = std::f64::consts::FRAC_PI_2;
            (t.iter().map(|x| half * (x + 1.0)).collect(), w.iter().map(|w| half * w).collect())
        })
        .collect();
    let n_phi = counts[angles - 1];
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut nodes = Vec::new();
    let mut idx = vec![0usize; angles - 1];
    loop {
        // direction and weight from the polar angles
        let mut dir = vec![0.0; n];
        let mut sin_prod = 1.0;
        let mut w = radius.powi(n as i32 - 1) * dphi;
        for (a, &i) in idx.iter().enumerate() {
            let theta = polar[a].0[i];
            dir[a] = sin_prod * theta.cos();
            w *= polar[a].1[i] * theta.sin().powi((n - 2 - a) as i32);
            sin_prod *= theta.sin();
        }
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * dphi;
            let mut u = dir.clone();
            u[n - 2] = sin_prod * phi.cos();
            u[n - 1] = sin_prod * phi.sin();
            let norm = u.iter().map(|c| c * c).sum::<f64>().sqrt();
            let normal = VectorN(u.iter().map(|c| c / norm).collect());
            let position = VectorN((0..n).map(|k| center[k] + radius * normal[k]).collect());
            nodes.push(SurfaceNode { position, normal, weight: w });
        }
        // odometer over the polar grid
        let mut a = 0;
        loop {
            if a == angles - 1 {
                return Ok(nodes);
            }
            idx[a] += 1;
            if idx[a] < counts[a] {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn box_nodes(corner: &[f64], extents: &[f64], m: usize) -> Result<Vec<SurfaceNode>> {
    let n = corner.len();
    if n < 2 || extents.len() != n {
        return Err(Error::InvalidSurface("box corner and extents must share dimension >= 2".into()));
    }
    if extents.iter().any(|e| !(*e > 0.0)) || m == 0 {
        return Err(Error::InvalidSurface("box extents and resolution must be positive".into()));
    }
    let (t, w) = gauss_legendre(m);
    let mut nodes = Vec::new();
    for axis in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != axis).collect();
        for side in [0.0, 1.0] {
            let mut idx = vec![0usize; n - 1];
            loop {
                let mut p = vec![0.0; n];
                let mut weight = 1.0;
                p[axis] = corner[axis] + side * extents[axis];
                for (o, &j) in others.iter().enumerate() {
                    let h = 0.5 * extents[j];
                    p[j] = corner[j] + h * (t[idx[o]] + 1.0);
                    weight *= h * w[idx[o]];
                }
                let mut normal = VectorN::zeros(n);
                normal[axis] = if side == 0.0 { -1.0 } else { 1.0 };
                nodes.push(SurfaceNode { position: VectorN(p), normal, weight });
                let mut o = 0;
                while o < n - 1 {
                    idx[o] += 1;
                    if idx[o] < m {
                        break;
                    }
                    idx[o] = 0;
                    o += 1;
                }
                if o == n - 1 {
                    break;
                }
            }
        }
    }
    Ok(nodes)
}

/// `Σ_nodes integrand(node)`, evaluated in parallel and reduced in node
/// order.
pub fn surface_sum<F>(s: &Hypersurface, integrand: F) -> Result<MultiVector>
where
    F: Fn(&SurfaceNode) -> Result<MultiVector> + Sync,
{
    let terms: Vec<MultiVector> = s.nodes.par_iter().map(&integrand).collect::<Result<Vec<_>>>()?;
    let n = s.dim();
    let mut acc = KahanMv::new(1 << n);
    for t in &terms {
        acc.add_slice(t.coeffs());
    }
    MultiVector::from_coeffs(n, acc.into_inner())
}

fn oriented_element(nd: &SurfaceNode) -> MultiVector {
    nd.normal.scale(-nd.weight).to_multivector()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: MultiVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn placement_warning(s: &Hypersurface, y: &VectorN) -> Option<String> {
    match s.contains(y) {
        Some(true) => None,
        Some(false) => Some("evaluation point lies outside the surface".into()),
        None => Some("evaluation point lies on the surface".into()),
    }
}

/// `∫_S K(x, y) dΣ(x) f(x)`.
pub fn cauchy_integral<K, F>(kernel: K, s: &Hypersurface, f: F, y: &VectorN) -> Result<IntegralResult>
where
    K: Fn(&VectorN, &VectorN) -> Result<MultiVector> + Sync,
    F: Fn(&VectorN) -> MultiVector + Sync,
{
    if s.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: y.dim() });
    }
    let value = surface_sum(s, |nd| {
        let k = kernel(&nd.position, y)?;
        Ok(&(&k * &oriented_element(nd)) * &f(&nd.position))
    })?;
    Ok(IntegralResult { value, warning: placement_warning(s, y) })
}

/// `∫_S G dΣ f + constant · ∫_S H dΣ Df`. For the Euclidean kernels the
/// exact constant is `-(n-1)/(n-2)`; see [`calibrate_green_constant`].
#[allow(clippy::too_many_arguments)]
pub fn green_integral<KG, KH, F, DF>(
    cauchy: KG,
    green: KH,
    s: &Hypersurface,
    f: F,
    df: DF,
    y: &VectorN,
    constant: f64,
) -> Result<IntegralResult>
where
    KG: Fn(&VectorN, &VectorN) -> Result<MultiVector> + Sync,
    KH: Fn(&VectorN, &VectorN) -> Result<MultiVector> + Sync,
    F: Fn(&VectorN) -> MultiVector + Sync,
    DF: Fn(&VectorN) -> MultiVector + Sync,
{
    if s.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: y.dim() });
    }
    let value = surface_sum(s, |nd| {
        let e = oriented_element(nd);
        let first = &(&cauchy(&nd.position, y)? * &e) * &f(&nd.position);
        let second = &(&green(&nd.position, y)? * &e) * &df(&nd.position);
        Ok(&first + &second.scale(constant))
    })?;
    Ok(IntegralResult { value, warning: placement_warning(s, y) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenCalibration {
    pub n: usize,
    pub constant: f64,
    /// Largest reproduction error over the calibration data with the fitted
    /// constant.
    pub max_residual: f64,
    pub samples: usize,
}

/// Fits the second-term constant of the Green formula by least squares on
/// Euclidean data: harmonic test functions on the unit sphere in `R^n`,
/// `Df` from the finite-difference oracle.
pub fn calibrate_green_constant(n: usize, grid: &[usize]) -> Result<GreenCalibration> {
    if n < 3 {
        return Err(Error::InvalidDimension("Green formula needs n >= 3".into()));
    }
    let s = Hypersurface::sphere(VectorN::zeros(n), 1.0, grid)?;
    let mut far = VectorN::zeros(n);
    far[1] = 2.5;
    far[0] = 0.5;
    let tests: Vec<Box<dyn Fn(&VectorN) -> MultiVector + Sync>> = vec![
        Box::new(move |x: &VectorN| MultiVector::scalar(n, x[0] * x[0] - x[1] * x[1])),
        Box::new(move |x: &VectorN| MultiVector::scalar(n, x[0] * x[1] * x[2] + x[2])),
        Box::new(move |x: &VectorN| MultiVector::scalar(n, green_h(x, &far).expect("far source"))),
    ];
    let points: Vec<VectorN> = [0.0, 0.12, -0.1]
        .iter()
        .map(|&t| VectorN((0..n).map(|j| if j % 2 == 0 { t } else { -0.5 * t }).collect()))
        .collect();
    let scheme = FdScheme::default();
    let cauchy = |x: &VectorN, y: &VectorN| Ok(cauchy_g(x, y)?.to_multivector());
    let green = |x: &VectorN, y: &VectorN| Ok(MultiVector::scalar(x.dim(), green_h(x, y)?));
    let mut rows = Vec::new();
    for f in &tests {
        let df = |x: &VectorN| dirac_fd(f, x, &scheme, Side::Left);
        for y in &points {
            let a = green_integral(cauchy, green, &s, f, df, y, 0.0)?.value;
            let b = green_integral(cauchy, green, &s, |_: &VectorN| MultiVector::zero(n), df, y, 1.0)?.value;
            rows.push((f(y), a, b));
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (target, a, b) in &rows {
        let r = target - a;
        num += r.coeffs().iter().zip(b.coeffs()).map(|(p, q)| p * q).sum::<f64>();
        den += b.coeffs().iter().map(|q| q * q).sum::<f64>();
    }
    let constant = num / den;
    let max_residual = rows
        .iter()
        .map(|(t, a, b)| (&(a + &b.scale(constant)) - t).norm())
        .fold(0.0, f64::max);
    Ok(GreenCalibration { n, constant, max_residual, samples: rows.len() })
}

fn key(v: &VectorN) -> Vec<i64> {
    v.0.iter().map(|c| (c * 1e8).round() as i64).collect()
}

/// Checks that `s` is invariant under the reflection in `axes` (node by
/// node, including normals and weights) and returns the Cauchy integral
/// over it, which equals `2 f(y)` when `y` and its mirror image are each
/// enclosed by one component.
pub fn doubling_check<K, F>(kernel: K, s: &Hypersurface, f: F, y: &VectorN, axes: &[usize]) -> Result<IntegralResult>
where
    K: Fn(&VectorN, &VectorN) -> Result<MultiVector> + Sync,
    F: Fn(&VectorN) -> MultiVector + Sync,
{
    let n = s.dim();
    if let Some(&bad) = axes.iter().find(|&&a| a >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let index: HashMap<Vec<i64>, usize> = s.nodes.iter().enumerate().map(|(i, nd)| (key(&nd.position), i)).collect();
    for nd in &s.nodes {
        let mut p = nd.position.clone();
        let mut q = nd.normal.clone();
        for &a in axes {
            p.0[a] = -p.0[a];
            q.0[a] = -q.0[a];
        }
        let partner = index.get(&key(&p)).map(|&i| &s.nodes[i]).ok_or(Error::AsymmetricSurface)?;
        if (&partner.normal - &q).norm() > 1e-8 || (partner.weight - nd.weight).abs() > 1e-12 * nd.weight.abs().max(1.0) {
            return Err(Error::AsymmetricSurface);
        }
    }
    let value = surface_sum(s, |nd| {
        let k = kernel(&nd.position, y)?;
        Ok(&(&k * &oriented_element(nd)) * &f(&nd.position))
    })?;
    Ok(IntegralResult { value, warning: None })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpProbeReport {
    pub point: VectorN,
    pub density: Vec<f64>,
    /// Inward distances `t` of the approach points `w - t n(w)`.
    pub approach: Vec<f64>,
    /// Scalar parts of the interior values along the approach.
    pub interior_values: Vec<Vec<f64>>,
    /// Cap radii used for the principal value.
    pub cap_radii: Vec<f64>,
    pub principal_values: Vec<Vec<f64>>,
    /// `‖(last interior value - PV) - η(w)/2‖` per cap radius.
    pub jump_errors: Vec<f64>,
}

/// Report-only probe of the interior boundary limit `½η(w) + PV ∫`.
pub fn pv_jump_probe<K, F>(kernel: K, s: &Hypersurface, eta: F, node: usize, approach: &[f64]) -> Result<JumpProbeReport>
where
    K: Fn(&VectorN, &VectorN) -> Result<MultiVector> + Sync,
    F: Fn(&VectorN) -> MultiVector + Sync,
{
    let w_node = s.nodes.get(node).ok_or(Error::IndexOutOfRange { index: node, len: s.nodes.len() })?;
    let w = w_node.position.clone();
    let mut interior = Vec::new();
    for &t in approach {
        let y = &w - &w_node.normal.scale(t);
        let v = surface_sum(s, |nd| Ok(&(&kernel(&nd.position, &y)? * &oriented_element(nd)) * &eta(&nd.position)))?;
        interior.push(v);
    }
    let base = 3.0 * s.node_spacing();
    let caps = vec![base, 0.5 * base];
    let mut pvs = Vec::new();
    for &cap in &caps {
        let v = surface_sum(s, |nd| {
            if (&nd.position - &w).norm() < cap {
                return Ok(MultiVector::zero(s.dim()));
            }
            Ok(&(&kernel(&nd.position, &w)? * &oriented_element(nd)) * &eta(&nd.position))
        })?;
        pvs.push(v);
    }
    let half = eta(&w).scale(0.5);
    let last = interior.last().cloned().unwrap_or_else(|| MultiVector::zero(s.dim()));
    let jump_errors = pvs.iter().map(|pv| (&(&last - pv) - &half).norm()).collect();
    Ok(JumpProbeReport {
        point: w,
        density: eta(&w_node.position).coeffs().to_vec(),
        approach: approach.to_vec(),
        interior_values: interior.iter().map(|v| v.coeffs().to_vec()).collect(),
        cap_radii: caps,
        principal_values: pvs.iter().map(|v| v.coeffs().to_vec()).collect(),
        jump_errors,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobianFd {
    pub matrix: Vec<Vec<f64>>,
    /// Transpose of the cofactor matrix.
    pub adjugate: Vec<Vec<f64>>,
    pub determinant: f64,
}

/// Central-difference Jacobian `∂g_i/∂x_j` with its exact adjugate.
pub fn jacobian_fd<G>(g: G, x: &VectorN, h: f64) -> JacobianFd
where
    G: Fn(&VectorN) -> VectorN,
{
    let n = x.dim();
    let mut jm = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp.0[j] += h;
        xm.0[j] -= h;
        let (gp, gm) = (g(&xp), g(&xm));
        for i in 0..n {
            jm[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let adj = adjugate(&jm);
    let rows = |m: &DMatrix<f64>| (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    JacobianFd { matrix: rows(&jm), adjugate: rows(&adj), determinant: jm.determinant() }
}

fn adjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(n, n, |i, j| {
        // adj_ij = cof_ji
        let minor = m.clone().remove_row(j).remove_column(i);
        let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        s * minor.determinant()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderResult {
    pub order: i64,
    /// Unrounded scalar part of the integral.
    pub raw: f64,
    pub min_abs_on_contour: f64,
}

/// Order of the zero of `g` at `c`: the integral over `|x - c| = δ` of
/// `G(g(x)) · cof(Jg)(x) dΣ(x)`, where `cof(J) = adj(J)ᵀ` carries the
/// oriented area element to the image surface.
pub fn order_of_zero<G>(g: G, c: &VectorN, delta: f64, grid: &[usize]) -> Result<OrderResult>
where
    G: Fn(&VectorN) -> VectorN + Sync,
{
    let n = c.dim();
    let s = Hypersurface::sphere(c.clone(), delta, grid)?;
    let h = 1e-5 * delta.max(1e-3);
    let min_abs = s.nodes.iter().map(|nd| g(&nd.position).norm()).fold(f64::INFINITY, f64::min);
    let scale = s.nodes.iter().map(|nd| g(&nd.position).norm()).fold(0.0, f64::max);
    if !(min_abs > 1e-10 * scale.max(1e-300)) {
        return Err(Error::ZeroOnContour);
    }
    let origin = VectorN::zeros(n);
    let value = surface_sum(&s, |nd| {
        let gx = g(&nd.position);
        let jac = jacobian_fd(&g, &nd.position, h);
        // cof(J) n = adj(J)ᵀ n
        let mut pulled = VectorN::zeros(n);
        for i in 0..n {
            for j in 0..n {
                pulled.0[i] += jac.adjugate[j][i] * nd.normal[j];
            }
        }
        let kernel = cauchy_g(&gx, &origin).map_err(|_| Error::ZeroOnContour)?;
        Ok(&kernel.to_multivector() * &pulled.scale(-nd.weight).to_multivector())
    })?;
    let raw = value.scalar_part();
    let order = raw.round();
    if (raw - order).abs() > 0.2 {
        return Err(Error::NonInteger { value: raw });
    }
    Ok(OrderResult { order: order as i64, raw, min_abs_on_contour: min_abs })
}
