//! Double-double evaluation of operator products.
//!
//! `T`, `Θ` and their inverses have entries of order `10⁴–10⁵` on the leading
//! `M/2` block at the reference parameters, so `T⁻¹NT` formed in `f64` carries
//! rounding noise near `10⁻⁴` even though the truncation error is far below
//! `10⁻²⁰`. Every factor here is rebuilt from the `f64` parameters in
//! double-double and only the final deviation is rounded back.

use nalgebra::DMatrix;
use num_complex::Complex;
use twofloat::TwoFloat;

use crate::fock::{NormalOrdered, C64};

pub(crate) type Cdd = Complex<TwoFloat>;
pub(crate) type MatrixDd = DMatrix<Cdd>;

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

pub(crate) fn lift(z: C64) -> Cdd {
    Complex::new(dd(z.re), dd(z.im))
}

fn zero() -> Cdd {
    lift(C64::new(0.0, 0.0))
}

fn sqrt_int(n: usize) -> TwoFloat {
    dd(n as f64).sqrt()
}

pub(crate) fn identity(dim: usize) -> MatrixDd {
    MatrixDd::from_fn(dim, dim, |i, j| lift(C64::from(if i == j { 1.0 } else { 0.0 })))
}

fn adjoint(m: &MatrixDd) -> MatrixDd {
    MatrixDd::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

/// `exp(γ a)`, upper triangular.
fn exp_lowering(gamma: C64, dim: usize) -> MatrixDd {
    let g = lift(gamma);
    let mut m = MatrixDd::from_element(dim, dim, zero());
    for i in 0..dim {
        let mut t = lift(C64::from(1.0));
        m[(i, i)] = t;
        for k in 1..dim - i {
            t = t * g * sqrt_int(i + k) / dd(k as f64);
            m[(i, i + k)] = t;
        }
    }
    m
}

/// `exp(δ a†)`, lower triangular.
fn exp_raising(delta: C64, dim: usize) -> MatrixDd {
    adjoint(&exp_lowering(delta.conj(), dim))
}

pub(crate) fn normal_ordered(op: &NormalOrdered, dim: usize) -> MatrixDd {
    (exp_raising(op.raising, dim) * exp_lowering(op.lowering, dim)) * lift(op.scalar)
}

/// Exact inverse of the truncated [`normal_ordered`] matrix.
pub(crate) fn normal_ordered_inverse(op: &NormalOrdered, dim: usize) -> MatrixDd {
    let s = lift(op.scalar);
    let inv_s = lift(C64::from(1.0)) / s;
    (exp_lowering(-op.lowering, dim) * exp_raising(-op.raising, dim)) * inv_s
}

/// `a + shift`.
pub(crate) fn shifted_annihilator(shift: C64, dim: usize) -> MatrixDd {
    let s = lift(shift);
    MatrixDd::from_fn(dim, dim, |i, j| {
        if i == j {
            s
        } else if j == i + 1 {
            Complex::new(sqrt_int(j), dd(0.0))
        } else {
            zero()
        }
    })
}

/// `a† + conj(shift)`.
pub(crate) fn shifted_creation(shift: C64, dim: usize) -> MatrixDd {
    adjoint(&shifted_annihilator(shift, dim))
}

/// `max_{i,j < block} |x_ij - y_ij|`, rounded to `f64`.
pub(crate) fn max_deviation(x: &MatrixDd, y: &MatrixDd, block: usize) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..block {
        for i in 0..block {
            let d = x[(i, j)] - y[(i, j)];
            worst = worst.max(f64::from(d.re).hypot(f64::from(d.im)));
        }
    }
    worst
}
