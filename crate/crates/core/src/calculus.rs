//! Central finite-difference Dirac and Laplace operators. These are the
//! verification oracles for every kernel in the crate.

use serde::{Deserialize, Serialize};

use crate::clifford::{MultiVector, VectorN};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    h: f64,
    order: u8,
}

impl FdScheme {
    pub fn new(h: f64, order: u8) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidScheme(format!("step {h} must be positive")));
        }
        if order != 2 && order != 4 {
            return Err(Error::InvalidScheme(format!("order {order} not in {{2, 4}}")));
        }
        Ok(FdScheme { h, order })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Step used for the inner operator when two operators are nested.
    pub fn nested_step(&self) -> f64 {
        self.h.sqrt() * 1e-1
    }

    fn first_stencil(&self) -> &'static [(f64, f64)] {
        match self.order {
            2 => &[(1.0, 0.5), (-1.0, -0.5)],
            _ => &[
                (2.0, -1.0 / 12.0),
                (1.0, 8.0 / 12.0),
                (-1.0, -8.0 / 12.0),
                (-2.0, 1.0 / 12.0),
            ],
        }
    }

    fn second_stencil(&self) -> &'static [(f64, f64)] {
        match self.order {
            2 => &[(1.0, 1.0), (-1.0, 1.0)],
            _ => &[
                (2.0, -1.0 / 12.0),
                (1.0, 16.0 / 12.0),
                (-1.0, 16.0 / 12.0),
                (-2.0, -1.0 / 12.0),
            ],
        }
    }
}

impl Default for FdScheme {
    fn default() -> Self {
        FdScheme { h: 1e-3, order: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

fn shifted(x: &VectorN, j: usize, t: f64) -> VectorN {
    let mut y = x.clone();
    y.0[j] += t;
    y
}

/// Central-difference partial derivative `∂_j f(x)`.
pub fn partial_fd<F>(f: &F, x: &VectorN, j: usize, s: &FdScheme) -> MultiVector
where
    F: Fn(&VectorN) -> MultiVector,
{
    let mut acc: Option<MultiVector> = None;
    for &(off, w) in s.first_stencil() {
        let v = f(&shifted(x, j, off * s.h)).scale(w / s.h);
        match acc.as_mut() {
            Some(a) => *a += &v,
            None => acc = Some(v),
        }
    }
    acc.expect("stencil is non-empty")
}

/// `Σ_j e_j ∂_j f` (left) or `Σ_j (∂_j f) e_j` (right).
pub fn dirac_fd<F>(f: F, x: &VectorN, s: &FdScheme, side: Side) -> MultiVector
where
    F: Fn(&VectorN) -> MultiVector,
{
    let n = x.dim();
    let mut out: Option<MultiVector> = None;
    for j in 0..n {
        let d = partial_fd(&f, x, j, s);
        let e = MultiVector::generator(d.dim(), j);
        let term = match side {
            Side::Left => &e * &d,
            Side::Right => &d * &e,
        };
        match out.as_mut() {
            Some(o) => *o += &term,
            None => out = Some(term),
        }
    }
    out.expect("dimension is at least one")
}

/// `Σ_j ∂_j² f`.
pub fn laplace_fd<F>(f: F, x: &VectorN, s: &FdScheme) -> MultiVector
where
    F: Fn(&VectorN) -> MultiVector,
{
    // The centre weight is minus the sum of the others, so differences
    // against f(x) are summed instead.
    let stencil = s.second_stencil();
    let h2 = s.h * s.h;
    let f0 = f(x);
    let mut out = MultiVector::zero(f0.dim());
    for j in 0..x.dim() {
        for &(off, w) in stencil {
            out += &(&f(&shifted(x, j, off * s.h)) - &f0).scale(w / h2);
        }
    }
    out
}

/// `D(Df)` with the inner operator on the nested step, for checking
/// `D² = -Δ`.
pub fn dirac_squared_fd<F>(f: F, x: &VectorN, s: &FdScheme, side: Side) -> MultiVector
where
    F: Fn(&VectorN) -> MultiVector,
{
    let inner = FdScheme { h: s.nested_step(), order: s.order };
    dirac_fd(|y: &VectorN| dirac_fd(&f, y, &inner, side), x, s, side)
}
