//! Möbius transformations in Vahlen form `y = (ax + b)(cx + d)^{-1}` and
//! their conformal weights.

use crate::clifford::{MultiVector, VectorN};
use crate::error::{Error, Result};

const VAHLEN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct MoebiusMap {
    a: MultiVector,
    b: MultiVector,
    c: MultiVector,
    d: MultiVector,
    n: usize,
}

impl MoebiusMap {
    /// Builds a map from Vahlen coefficients, checking the Vahlen
    /// conditions numerically.
    pub fn new(a: MultiVector, b: MultiVector, c: MultiVector, d: MultiVector) -> Result<Self> {
        let n = a.dim();
        for m in [&b, &c, &d] {
            if m.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
            }
        }
        let vector_like = |m: &MultiVector, what: &str| -> Result<()> {
            let scale = 1.0 + m.norm();
            if m.off_grade_max(1) > VAHLEN_TOL * scale {
                Err(Error::InvalidMoebius(format!("{what} is not a vector")))
            } else {
                Ok(())
            }
        };
        vector_like(&(&a * &c.reversion()), "a~c")?;
        vector_like(&(&c * &d.reversion()), "c~d")?;
        vector_like(&(&d * &b.reversion()), "d~b")?;
        vector_like(&(&b * &a.reversion()), "b~a")?;
        let det = &(&a * &d.reversion()) - &(&b * &c.reversion());
        let off = det.off_grade_max(0);
        if off > VAHLEN_TOL || (det.scalar_part().abs() - 1.0).abs() > VAHLEN_TOL {
            return Err(Error::InvalidMoebius("pseudo-determinant is not ±1".into()));
        }
        Ok(MoebiusMap { a, b, c, d, n })
    }

    pub fn identity(n: usize) -> Self {
        let one = MultiVector::scalar(n, 1.0);
        let zero = MultiVector::zero(n);
        MoebiusMap { a: one.clone(), b: zero.clone(), c: zero, d: one, n }
    }

    /// `x -> x + v`.
    pub fn translation(v: &VectorN) -> Self {
        let n = v.dim();
        MoebiusMap {
            a: MultiVector::scalar(n, 1.0),
            b: v.to_multivector(),
            c: MultiVector::zero(n),
            d: MultiVector::scalar(n, 1.0),
            n,
        }
    }

    /// `x -> λ x` with `a = √λ`, `d = 1/√λ`.
    pub fn dilation(n: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidMoebius("dilation factor must be positive".into()));
        }
        let s = lambda.sqrt();
        Ok(MoebiusMap {
            a: MultiVector::scalar(n, s),
            b: MultiVector::zero(n),
            c: MultiVector::zero(n),
            d: MultiVector::scalar(n, 1.0 / s),
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Matrix product `self ∘ inner` of the Vahlen matrices.
    pub fn compose(&self, inner: &MoebiusMap) -> MoebiusMap {
        let (a2, b2, c2, d2) = (&self.a, &self.b, &self.c, &self.d);
        let (a1, b1, c1, d1) = (&inner.a, &inner.b, &inner.c, &inner.d);
        MoebiusMap {
            a: &(a2 * a1) + &(b2 * c1),
            b: &(a2 * b1) + &(b2 * d1),
            c: &(c2 * a1) + &(d2 * c1),
            d: &(c2 * b1) + &(d2 * d1),
            n: self.n,
        }
    }

    fn denominator(&self, x: &VectorN) -> Result<MultiVector> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.dim() });
        }
        let den = &(&self.c * &x.to_multivector()) + &self.d;
        if den.norm() <= 1e-300 {
            return Err(Error::Pole("cx + d vanishes".into()));
        }
        Ok(den)
    }

    pub fn apply(&self, x: &VectorN) -> Result<VectorN> {
        let den = self.denominator(x)?;
        let inv = den.versor_inverse().map_err(|_| Error::Pole("cx + d is not invertible".into()))?;
        let num = &(&self.a * &x.to_multivector()) + &self.b;
        let y = &num * &inv;
        let scale = 1.0 + y.norm();
        if y.off_grade_max(1) > VAHLEN_TOL * scale {
            return Err(Error::InvalidMoebius("image is not a vector".into()));
        }
        Ok(y.vector_part())
    }

    /// `J₁(ψ, x) = ~(cx + d) / |cx + d|^n`.
    pub fn weight_j1(&self, x: &VectorN) -> Result<MultiVector> {
        let den = self.denominator(x)?;
        let r = den.norm();
        Ok(den.reversion().scale(r.powi(-(self.n as i32))))
    }

    /// `J₂(ψ, x) = 1 / |cx + d|^{n-2}`.
    pub fn weight_j2(&self, x: &VectorN) -> Result<f64> {
        let den = self.denominator(x)?;
        Ok(den.norm().powi(2 - self.n as i32))
    }
}

/// `x -> ± J₁(ψ, x) f(ψ(x))`, the conformal pull-back of a left monogenic
/// function. `sign` selects between the two lifts `(a,b,c,d)` and
/// `(-a,-b,-c,-d)`.
pub fn pull_back_monogenic<F>(psi: &MoebiusMap, f: F, x: &VectorN, sign: f64) -> Result<MultiVector>
where
    F: Fn(&VectorN) -> MultiVector,
{
    let j = psi.weight_j1(x)?;
    let y = psi.apply(x)?;
    Ok((&j * &f(&y)).scale(sign))
}

/// `x -> J₂(ψ, x) f(ψ(x))`, the harmonic counterpart.
pub fn pull_back_harmonic<F>(psi: &MoebiusMap, f: F, x: &VectorN) -> Result<MultiVector>
where
    F: Fn(&VectorN) -> MultiVector,
{
    let j = psi.weight_j2(x)?;
    let y = psi.apply(x)?;
    Ok(f(&y).scale(j))
}
