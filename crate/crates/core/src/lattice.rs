//! Period lattices, bundle characters and the quotient manifolds built
//! from them.
//!
//! Every deck transformation used here has the form `x -> σ_F(x) + ω_m`,
//! a coordinate reflection followed by a lattice translation. The manifold
//! kind decides which flips `F` go with which coefficient vector `m`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::clifford::VectorN;
use crate::error::{Error, Result};

const GRAM_DET_MIN: f64 = 1e-12;
const REDUCED_TOL: f64 = 1e-12;

/// Integer coefficients of a lattice point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoeffVector(pub Vec<i64>);

impl CoeffVector {
    pub fn zeros(k: usize) -> Self {
        CoeffVector(vec![0; k])
    }

    pub fn unit(k: usize, i: usize) -> Self {
        let mut m = vec![0; k];
        m[i] = 1;
        CoeffVector(m)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|m| m.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    pub fn add(&self, other: &CoeffVector) -> CoeffVector {
        CoeffVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> CoeffVector {
        CoeffVector(self.0.iter().map(|a| -a).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lattice {
    n: usize,
    basis: Vec<VectorN>,
    #[serde(skip)]
    gram_inv: Vec<f64>,
    sigma_min: f64,
}

impl Lattice {
    pub fn new(n: usize, basis: Vec<VectorN>) -> Result<Self> {
        let k = basis.len();
        if k == 0 || k > n {
            return Err(Error::InvalidLattice(format!("rank {k} not in 1..={n}")));
        }
        for v in &basis {
            if v.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
            }
        }
        let gram = DMatrix::from_fn(k, k, |i, j| basis[i].dot(&basis[j]));
        let det = gram.determinant();
        if !(det > GRAM_DET_MIN) {
            return Err(Error::InvalidLattice(format!(
                "basis is not linearly independent (Gram determinant {det:e})"
            )));
        }
        let eig = SymmetricEigen::new(gram.clone());
        let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let inv = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidLattice("singular Gram matrix".into()))?;
        Ok(Lattice {
            n,
            basis,
            gram_inv: inv.as_slice().to_vec(),
            sigma_min: lambda_min.max(0.0).sqrt(),
        })
    }

    /// `Z e_1 + ... + Z e_k` in `R^n`.
    pub fn standard(n: usize, k: usize) -> Result<Self> {
        Lattice::new(n, (0..k).map(|i| VectorN::basis(n, i)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VectorN] {
        &self.basis
    }

    /// Smallest singular value of the basis matrix; `|Σ m_i v_i| >= σ_min ‖m‖∞`.
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn lattice_point(&self, m: &CoeffVector) -> Result<VectorN> {
        if m.len() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: m.len() });
        }
        let mut out = vec![0.0; self.n];
        self.point_into(&m.0, &mut out);
        Ok(VectorN(out))
    }

    #[inline]
    pub(crate) fn point_into(&self, m: &[i64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (mi, v) in m.iter().zip(&self.basis) {
            if *mi != 0 {
                let c = *mi as f64;
                for (o, vj) in out.iter_mut().zip(&v.0) {
                    *o += c * vj;
                }
            }
        }
    }

    /// Least-squares coordinates of `x` with respect to the basis.
    pub fn coordinates(&self, x: &VectorN) -> Vec<f64> {
        let k = self.rank();
        let rhs: Vec<f64> = self.basis.iter().map(|v| v.dot(x)).collect();
        let inv = DMatrix::from_column_slice(k, k, &self.gram_inv);
        (inv * DVector::from_vec(rhs)).as_slice().to_vec()
    }

    /// Whether every basis vector vanishes outside the first `k` coordinates.
    pub fn is_reduced(&self) -> bool {
        let k = self.rank();
        self.basis.iter().all(|v| v.0[k..].iter().all(|c| c.abs() <= REDUCED_TOL))
    }

    /// All lattice points with `‖m‖∞ <= radius`, shell by shell, paired with
    /// their coefficients.
    pub fn box_points(&self, radius: usize) -> Vec<(CoeffVector, VectorN)> {
        let mut out = Vec::new();
        for r in 0..=radius {
            for m in shell(self.rank(), r) {
                let p = self.lattice_point(&m).expect("coefficient length matches rank");
                out.push((m, p));
            }
        }
        out
    }
}

/// Coefficient vectors with `‖m‖∞ = r`, in lexicographic order.
pub fn shell(k: usize, r: usize) -> Vec<CoeffVector> {
    let mut out = Vec::new();
    for_each_in_shell(k, r, &mut |m| out.push(CoeffVector(m.to_vec())));
    out
}

/// Streams the shell `‖m‖∞ = r` in lexicographic order without allocating
/// per element.
pub(crate) fn for_each_in_shell(k: usize, r: usize, f: &mut dyn FnMut(&[i64])) {
    let mut prefix = Vec::with_capacity(k);
    shell_rec(k, r as i64, false, &mut prefix, f);
}

fn shell_rec(k: usize, r: i64, hit: bool, prefix: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    if prefix.len() == k {
        if hit || r == 0 {
            f(prefix);
        }
        return;
    }
    let remaining = k - prefix.len();
    for m in -r..=r {
        let now_hit = hit || m.abs() == r;
        if !now_hit && remaining == 1 {
            continue;
        }
        prefix.push(m);
        shell_rec(k, r, now_hit, prefix, f);
        prefix.pop();
    }
}

/// Streams every lattice point with `‖m‖∞ <= radius` in shell order,
/// passing coefficients and position.
pub(crate) fn for_each_point(l: &Lattice, radius: usize, f: &mut dyn FnMut(&[i64], &[f64])) {
    let mut w = vec![0.0; l.dim()];
    for r in 0..=radius {
        for_each_in_shell(l.rank(), r, &mut |m| {
            l.point_into(m, &mut w);
            f(m, &w);
        });
    }
}

/// Spinor/pin bundle selector: the first `l` periods carry a sign, and
/// `negate_fiber` adds the global fiber negation on orientation-reversing
/// identifications.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleCharacter {
    pub l: usize,
    #[serde(default)]
    pub negate_fiber: bool,
}

impl BundleCharacter {
    pub fn trivial() -> Self {
        BundleCharacter { l: 0, negate_fiber: false }
    }

    pub fn with_split(l: usize) -> Self {
        BundleCharacter { l, negate_fiber: false }
    }
}

/// `(-1)^{m_1 + ... + m_l}`.
pub fn char_sign(chi: &BundleCharacter, m: &CoeffVector) -> f64 {
    char_sign_raw(chi.l, &m.0)
}

#[inline]
pub(crate) fn char_sign_raw(l: usize, m: &[i64]) -> f64 {
    let s: i64 = m.iter().take(l).sum();
    if s.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignVariant {
    /// `+1` iff every coefficient is even (membership in `2Ω_k`).
    AllEven,
    /// `+1` iff the coefficient sum is even.
    #[default]
    SumParity,
}

pub fn moebius_sgn(m: &CoeffVector, variant: SignVariant) -> f64 {
    moebius_sgn_raw(&m.0, variant)
}

#[inline]
pub(crate) fn moebius_sgn_raw(m: &[i64], variant: SignVariant) -> f64 {
    let plus = match variant {
        SignVariant::AllEven => m.iter().all(|v| v.rem_euclid(2) == 0),
        SignVariant::SumParity => m.iter().sum::<i64>().rem_euclid(2) == 0,
    };
    if plus {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Cylinder,
    Torus,
    Projective,
    RealProjective,
    MoebiusStrip,
    KleinBottle,
}

/// A deck transformation `x -> σ_flips(x) + ω_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupElement {
    pub m: CoeffVector,
    /// Zero-based coordinates reflected before translating.
    pub flips: Vec<usize>,
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        self.m.is_zero() && self.flips.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub n: usize,
    pub lattice: Option<Lattice>,
    pub p: Option<usize>,
    pub sign_variant: SignVariant,
    pub bundle: BundleCharacter,
}

impl ManifoldSpec {
    pub fn new(
        kind: ManifoldKind,
        n: usize,
        lattice: Option<Lattice>,
        p: Option<usize>,
        sign_variant: SignVariant,
        bundle: BundleCharacter,
    ) -> Result<Self> {
        let spec = ManifoldSpec { kind, n, lattice, p, sign_variant, bundle };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cylinder(lattice: Lattice, bundle: BundleCharacter) -> Result<Self> {
        let n = lattice.dim();
        Self::new(ManifoldKind::Cylinder, n, Some(lattice), None, SignVariant::default(), bundle)
    }

    pub fn torus(lattice: Lattice, bundle: BundleCharacter) -> Result<Self> {
        let n = lattice.dim();
        Self::new(ManifoldKind::Torus, n, Some(lattice), None, SignVariant::default(), bundle)
    }

    pub fn projective(lattice: Lattice, p: usize, bundle: BundleCharacter) -> Result<Self> {
        let n = lattice.dim();
        Self::new(ManifoldKind::Projective, n, Some(lattice), Some(p), SignVariant::default(), bundle)
    }

    pub fn real_projective(n: usize, p: usize, bundle: BundleCharacter) -> Result<Self> {
        Self::new(ManifoldKind::RealProjective, n, None, Some(p), SignVariant::default(), bundle)
    }

    pub fn moebius_strip(lattice: Lattice, variant: SignVariant, bundle: BundleCharacter) -> Result<Self> {
        let n = lattice.dim();
        Self::new(ManifoldKind::MoebiusStrip, n, Some(lattice), None, variant, bundle)
    }

    pub fn klein_bottle(lattice: Lattice, bundle: BundleCharacter) -> Result<Self> {
        let n = lattice.dim();
        Self::new(ManifoldKind::KleinBottle, n, Some(lattice), None, SignVariant::default(), bundle)
    }

    /// Lattice rank, `0` for the real projective spaces.
    pub fn k(&self) -> usize {
        self.lattice.as_ref().map_or(0, Lattice::rank)
    }

    pub fn lattice(&self) -> Result<&Lattice> {
        self.lattice
            .as_ref()
            .ok_or_else(|| Error::InvalidManifold(format!("{:?} has no lattice", self.kind)))
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidManifold(msg));
        if !(1..=crate::clifford::MAX_DIM).contains(&self.n) {
            return bad(format!("n = {} not in 1..=8", self.n));
        }
        if let Some(l) = &self.lattice {
            if l.dim() != self.n {
                return bad(format!("lattice lives in R^{} but n = {}", l.dim(), self.n));
            }
        }
        let k = self.k();
        if self.bundle.l > k {
            return bad(format!("bundle split l = {} exceeds k = {k}", self.bundle.l));
        }
        let needs_lattice = self.kind != ManifoldKind::RealProjective;
        if needs_lattice && self.lattice.is_none() {
            return bad(format!("{:?} requires a lattice", self.kind));
        }
        match self.kind {
            ManifoldKind::Cylinder if k >= self.n => bad(format!("cylinder needs k < n, got k = {k}")),
            ManifoldKind::Torus if k != self.n => bad(format!("torus needs k = n, got k = {k}")),
            ManifoldKind::Projective => {
                let p = self.p.ok_or_else(|| Error::InvalidManifold("projective needs p".into()))?;
                if k < 1 || p < k || p > self.n {
                    return bad(format!("projective needs 1 <= k <= p <= n, got k = {k}, p = {p}"));
                }
                if !self.lattice()?.is_reduced() {
                    return bad("projective lattice must lie in the first k coordinates".into());
                }
                Ok(())
            }
            ManifoldKind::RealProjective => {
                if self.lattice.is_some() {
                    return bad("real projective space has no lattice".into());
                }
                let p = self.p.ok_or_else(|| Error::InvalidManifold("real projective needs p".into()))?;
                if p < 1 || p > self.n {
                    return bad(format!("real projective needs 1 <= p <= n, got p = {p}"));
                }
                Ok(())
            }
            ManifoldKind::MoebiusStrip => {
                if k >= self.n {
                    return bad(format!("Moebius strip needs k < n, got k = {k}"));
                }
                if !self.lattice()?.is_reduced() {
                    return bad("Moebius lattice must lie in the first k coordinates".into());
                }
                Ok(())
            }
            ManifoldKind::KleinBottle => {
                let l = self.lattice()?;
                let normalized = l.basis().iter().enumerate().all(|(i, v)| {
                    if i + 1 < k {
                        v.0[k - 1..].iter().all(|c| c.abs() <= REDUCED_TOL)
                    } else {
                        v.0.iter().enumerate().all(|(j, c)| {
                            let target = if j == k - 1 { 1.0 } else { 0.0 };
                            (c - target).abs() <= REDUCED_TOL
                        })
                    }
                });
                if !normalized {
                    return bad("Klein lattice must be Ω_{k-1} + Z e_k with Ω_{k-1} in R^{k-1}".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Coordinates flipped by the Class A reflections (`k+1..=p`, zero based).
    pub fn reflection_axes(&self) -> Vec<usize> {
        match self.kind {
            ManifoldKind::Projective | ManifoldKind::RealProjective => {
                (self.k()..self.p.unwrap_or(0)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// The deck transformation with translation coefficients `m`; for the
    /// Class A manifolds `reflect` lists the reflected axes, otherwise the
    /// flips are determined by `m`.
    pub fn element(&self, m: CoeffVector, reflect: &[usize]) -> GroupElement {
        let flips = match self.kind {
            ManifoldKind::Projective | ManifoldKind::RealProjective => {
                let mut f = reflect.to_vec();
                f.sort_unstable();
                f
            }
            ManifoldKind::MoebiusStrip => {
                if moebius_sgn_raw(&m.0, self.sign_variant) < 0.0 {
                    vec![self.n - 1]
                } else {
                    Vec::new()
                }
            }
            ManifoldKind::KleinBottle => {
                let k = self.k();
                if m.0[k - 1].rem_euclid(2) == 1 {
                    vec![k - 1]
                } else {
                    Vec::new()
                }
            }
            _ => Vec::new(),
        };
        GroupElement { m, flips }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { m: CoeffVector::zeros(self.k()), flips: Vec::new() }
    }

    pub fn act(&self, g: &GroupElement, x: &VectorN) -> VectorN {
        let mut y = x.clone();
        for &j in &g.flips {
            y.0[j] = -y.0[j];
        }
        if let Some(l) = &self.lattice {
            let w = l.lattice_point(&g.m).expect("coefficient length matches rank");
            for (a, b) in y.0.iter_mut().zip(&w.0) {
                *a += b;
            }
        }
        y
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        // x = σ_F(u - ω) = σ_F(u) - σ_F(ω); the lattice is reduced whenever
        // flips occur, so σ_F(ω) only differs from ω on lattice axes.
        let k = self.k();
        let m: Vec<i64> = match self.kind {
            ManifoldKind::KleinBottle if g.flips.contains(&(k - 1)) => g
                .m
                .0
                .iter()
                .enumerate()
                .map(|(i, &v)| if i == k - 1 { v } else { -v })
                .collect(),
            _ => g.m.neg().0,
        };
        GroupElement { m: CoeffVector(m), flips: g.flips.clone() }
    }

    /// Sign `ρ(γ)` by which the fiber is multiplied under the identification.
    pub fn fiber_sign(&self, g: &GroupElement) -> f64 {
        let chi = if self.lattice.is_some() { char_sign_raw(self.bundle.l, &g.m.0) } else { 1.0 };
        let twist = if self.bundle.negate_fiber && g.flips.len() % 2 == 1 { -1.0 } else { 1.0 };
        chi * twist
    }

    /// Generators used by the descent checks: one per lattice period, plus
    /// one per reflected axis for the Class A manifolds.
    pub fn generators(&self) -> Vec<GroupElement> {
        let k = self.k();
        let mut out: Vec<GroupElement> =
            (0..k).map(|i| self.element(CoeffVector::unit(k, i), &[])).collect();
        for j in self.reflection_axes() {
            out.push(self.element(CoeffVector::zeros(k), &[j]));
        }
        out
    }

    /// Representative of the orbit of `x` and the element `g` with
    /// `rep = g·x` (so `x = g⁻¹·rep`).
    pub fn canonical_rep(&self, x: &VectorN) -> Result<(VectorN, GroupElement)> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.dim() });
        }
        let k = self.k();
        match self.kind {
            ManifoldKind::Cylinder | ManifoldKind::Torus => {
                let t = self.lattice()?.coordinates(x);
                let m = CoeffVector(t.iter().map(|c| -snap_floor(*c)).collect());
                let g = self.element(m, &[]);
                Ok((self.act(&g, x), g))
            }
            ManifoldKind::Projective | ManifoldKind::RealProjective => {
                let m = match &self.lattice {
                    Some(l) => CoeffVector(l.coordinates(x).iter().map(|c| -snap_floor(*c)).collect()),
                    None => CoeffVector(Vec::new()),
                };
                let axes = self.reflection_axes();
                let first = axes.iter().map(|&j| x[j]).find(|v| *v != 0.0);
                let reflect: &[usize] = if first.is_some_and(|v| v < 0.0) { &axes } else { &[] };
                let g = self.element(m, reflect);
                Ok((self.act(&g, x), g))
            }
            ManifoldKind::MoebiusStrip => {
                let t = self.lattice()?.coordinates(x);
                let m = CoeffVector(t.iter().map(|c| -snap_floor(*c)).collect());
                let g = self.element(m, &[]);
                Ok((self.act(&g, x), g))
            }
            ManifoldKind::KleinBottle => {
                // Periods 1..k-1 translate; along e_k the group is generated by
                // the mirrors x_k = j + 1/2, so the representative has
                // x_k in [-1/2, 1/2).
                let l = self.lattice()?;
                let t = l.coordinates(x);
                let mut m: Vec<i64> = t[..k - 1].iter().map(|c| -snap_floor(*c)).collect();
                let j = snap_floor(x[k - 1] + 0.5);
                m.push(if j.rem_euclid(2) == 0 { -j } else { j });
                let g = self.element(CoeffVector(m), &[]);
                Ok((self.act(&g, x), g))
            }
        }
    }
}

fn snap_floor(t: f64) -> i64 {
    let r = t.round();
    if (t - r).abs() <= 1e-12 {
        r as i64
    } else {
        t.floor() as i64
    }
}

/// JSON form of a [`ManifoldSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub n: usize,
    pub kind: ManifoldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_variant: Option<SignVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleCharacter>,
}

impl TryFrom<&ManifoldConfig> for ManifoldSpec {
    type Error = Error;

    fn try_from(c: &ManifoldConfig) -> Result<Self> {
        let lattice = match (c.kind, &c.basis, c.k) {
            (ManifoldKind::RealProjective, None, None | Some(0)) => None,
            (ManifoldKind::RealProjective, _, _) => {
                return Err(Error::InvalidManifold("real projective space takes no lattice".into()))
            }
            (_, Some(b), k) => {
                if let Some(k) = k {
                    if k != b.len() {
                        return Err(Error::InvalidManifold(format!(
                            "k = {k} but {} basis vectors given",
                            b.len()
                        )));
                    }
                }
                Some(Lattice::new(c.n, b.iter().map(|v| VectorN(v.clone())).collect())?)
            }
            (_, None, Some(k)) => Some(Lattice::standard(c.n, k)?),
            (_, None, None) => return Err(Error::InvalidManifold("either k or basis is required".into())),
        };
        ManifoldSpec::new(
            c.kind,
            c.n,
            lattice,
            c.p,
            c.sign_variant.unwrap_or_default(),
            c.bundle.unwrap_or_default(),
        )
    }
}
