//! Real Clifford algebra `Cl_n` with `e_i e_j + e_j e_i = -2 δ_ij`.
//!
//! Multivectors are stored densely: coefficient `b` belongs to the canonical
//! blade whose generators are the set bits of `b`, in ascending order.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported algebra dimension (256 coefficients).
pub const MAX_DIM: usize = 8;

/// Sign of the product of two canonical blades, including the `e_i² = -1`
/// contraction of every shared generator.
#[inline]
pub fn blade_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut rest = a >> 1;
    while rest != 0 {
        swaps += (rest & b).count_ones();
        rest >>= 1;
    }
    swaps += (a & b).count_ones();
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn grade(blade: usize) -> u32 {
    blade.count_ones()
}

/// A point or direction of `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorN(pub Vec<f64>);

impl VectorN {
    pub fn new(components: Vec<f64>) -> Self {
        VectorN(components)
    }

    pub fn zeros(n: usize) -> Self {
        VectorN(vec![0.0; n])
    }

    /// The `i`-th standard basis vector (zero based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        VectorN(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &VectorN) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: f64) -> VectorN {
        VectorN(self.0.iter().map(|x| x * s).collect())
    }

    pub fn to_multivector(&self) -> MultiVector {
        MultiVector::from_vector(self)
    }
}

impl Index<usize> for VectorN {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for VectorN {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add<&VectorN> for &VectorN {
    type Output = VectorN;
    fn add(self, rhs: &VectorN) -> VectorN {
        VectorN(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&VectorN> for &VectorN {
    type Output = VectorN;
    fn sub(self, rhs: &VectorN) -> VectorN {
        VectorN(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &VectorN {
    type Output = VectorN;
    fn neg(self) -> VectorN {
        VectorN(self.0.iter().map(|a| -a).collect())
    }
}

impl From<Vec<f64>> for VectorN {
    fn from(v: Vec<f64>) -> Self {
        VectorN(v)
    }
}

impl From<&[f64]> for VectorN {
    fn from(v: &[f64]) -> Self {
        VectorN(v.to_vec())
    }
}

/// Element of `Cl_n`, `1 <= n <= 8`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiVector {
    n: usize,
    coeffs: Vec<f64>,
}

impl MultiVector {
    pub fn zero(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "Clifford dimension {n} out of range");
        MultiVector { n, coeffs: vec![0.0; 1 << n] }
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        let mut m = Self::zero(n);
        m.coeffs[0] = s;
        m
    }

    /// The generator `e_{i+1}` (zero-based index `i`).
    pub fn generator(n: usize, i: usize) -> Self {
        Self::blade(n, 1 << i, 1.0)
    }

    pub fn blade(n: usize, blade: usize, coeff: f64) -> Self {
        let mut m = Self::zero(n);
        m.coeffs[blade] = coeff;
        m
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidDimension(format!("Clifford dimension {n} not in 1..=8")));
        }
        if coeffs.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: coeffs.len() });
        }
        Ok(MultiVector { n, coeffs })
    }

    pub fn from_vector(x: &VectorN) -> Self {
        let mut m = Self::zero(x.dim());
        for (i, &c) in x.0.iter().enumerate() {
            m.coeffs[1 << i] = c;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn vector_part(&self) -> VectorN {
        VectorN((0..self.n).map(|i| self.coeffs[1 << i]).collect())
    }

    pub fn grade_part(&self, r: u32) -> MultiVector {
        let mut out = Self::zero(self.n);
        for (b, &c) in self.coeffs.iter().enumerate() {
            if grade(b) == r {
                out.coeffs[b] = c;
            }
        }
        out
    }

    /// Largest absolute coefficient outside grade `r`.
    pub fn off_grade_max(&self, r: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(b, _)| grade(*b) != r)
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max)
    }

    pub fn geometric_product(&self, other: &MultiVector) -> Result<MultiVector> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut out = Self::zero(self.n);
        for (a, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (b, &cb) in other.coeffs.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                out.coeffs[a ^ b] += blade_sign(a, b) * ca * cb;
            }
        }
        Ok(out)
    }

    /// Reversion: the grade-`r` part picks up `(-1)^{r(r-1)/2}`.
    pub fn reversion(&self) -> MultiVector {
        let mut out = self.clone();
        for (b, c) in out.coeffs.iter_mut().enumerate() {
            let r = grade(b);
            if (r * r.saturating_sub(1) / 2) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    /// The automorphism induced by `e_j -> -e_j` for every `j` in `axes`
    /// (zero-based). On grade-1 elements this is the coordinate reflection.
    pub fn reflect_axes(&self, axes: &[usize]) -> MultiVector {
        let mask = axes.iter().fold(0usize, |m, &j| m | (1 << j));
        let mut out = self.clone();
        for (b, c) in out.coeffs.iter_mut().enumerate() {
            if (b & mask).count_ones() % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> MultiVector {
        MultiVector { n: self.n, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Inverse of a versor (product of vectors, or a nonzero scalar),
    /// computed as `~g / (g ~g)`. Fails when `g ~g` is not a nonzero scalar.
    pub fn versor_inverse(&self) -> Result<MultiVector> {
        let rev = self.reversion();
        let s = self.geometric_product(&rev)?;
        let scale = s.norm().max(f64::MIN_POSITIVE);
        if s.scalar_part().abs() <= 1e-300 || s.off_grade_max(0) > 1e-10 * scale {
            return Err(Error::SingularInput("multivector is not an invertible versor".into()));
        }
        Ok(rev.scale(1.0 / s.scalar_part()))
    }

    pub fn max_abs_diff(&self, other: &MultiVector) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Add<&MultiVector> for &MultiVector {
    type Output = MultiVector;
    fn add(self, rhs: &MultiVector) -> MultiVector {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        MultiVector {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&MultiVector> for &MultiVector {
    type Output = MultiVector;
    fn sub(self, rhs: &MultiVector) -> MultiVector {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        MultiVector {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&MultiVector> for MultiVector {
    fn add_assign(&mut self, rhs: &MultiVector) {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Neg for &MultiVector {
    type Output = MultiVector;
    fn neg(self) -> MultiVector {
        self.scale(-1.0)
    }
}

/// Geometric product; panics on dimension mismatch.
impl Mul<&MultiVector> for &MultiVector {
    type Output = MultiVector;
    fn mul(self, rhs: &MultiVector) -> MultiVector {
        self.geometric_product(rhs).expect("dimension mismatch in geometric product")
    }
}

impl fmt::Display for MultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (b, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if b == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}e")?;
                for i in 0..self.n {
                    if b & (1 << i) != 0 {
                        write!(f, "{}", i + 1)?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `x^{-1} = -x / |x|²`.
pub fn vector_inverse(x: &VectorN) -> Result<VectorN> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(Error::SingularInput("zero vector has no inverse".into()));
    }
    Ok(x.scale(-1.0 / r2))
}

/// Coordinate reflection `σ_A`: negates the zero-based coordinates in `axes`.
pub fn reflect_coords(x: &VectorN, axes: &[usize]) -> Result<VectorN> {
    let mut out = x.clone();
    for &j in axes {
        if j >= x.dim() {
            return Err(Error::IndexOutOfRange { index: j, len: x.dim() });
        }
        out.0[j] = -out.0[j];
    }
    Ok(out)
}

/// Kahan-compensated accumulator over multivector coefficients.
#[derive(Clone, Debug)]
pub struct KahanMv {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl KahanMv {
    pub fn new(len: usize) -> Self {
        KahanMv { sum: vec![0.0; len], comp: vec![0.0; len] }
    }

    #[inline]
    pub fn add_slice(&mut self, values: &[f64]) {
        for ((s, c), &v) in self.sum.iter_mut().zip(self.comp.iter_mut()).zip(values) {
            let y = v - *c;
            let t = *s + y;
            *c = (t - *s) - y;
            *s = t;
        }
    }

    #[inline]
    pub fn add_scaled(&mut self, values: &[f64], scale: f64) {
        for ((s, c), &v) in self.sum.iter_mut().zip(self.comp.iter_mut()).zip(values) {
            let y = v * scale - *c;
            let t = *s + y;
            *c = (t - *s) - y;
            *s = t;
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.sum
    }
}
