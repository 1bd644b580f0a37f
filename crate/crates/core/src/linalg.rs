//! Dense helpers shared by the modules. Everything here is small-dimensional.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub use num_complex::Complex64 as C64;

pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;
pub type RVector = DVector<f64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) fn norm_sq(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn conj(v: &CVector) -> CVector {
    v.map(|z| z.conj())
}

/// `Σ_n v_n²`, the bilinear (not sesquilinear) self-overlap.
pub(crate) fn bilinear_square(v: &CVector) -> C64 {
    v.iter().map(|z| z * z).sum()
}

pub(crate) fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

pub(crate) fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub(crate) fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Orthogonal matrix whose first column is the unit vector `t`, built from a
/// single Householder reflection.
pub(crate) fn orthogonal_with_first_column(t: &RVector) -> RMatrix {
    let d = t.len();
    let mut h = RMatrix::identity(d, d);
    if d == 0 {
        return h;
    }
    // Reflect along e1 - t or e1 + t, whichever is longer.
    let flip = t[0] > 0.0;
    let mut v = -t.clone();
    if flip {
        v = t.clone();
    }
    v[0] += 1.0;
    let vv = v.norm_squared();
    if vv > 0.0 {
        h -= (&v * v.transpose()) * (2.0 / vv);
    }
    if flip {
        // H e1 = -t here; negate the first column.
        h.column_mut(0).neg_mut();
    }
    h
}

/// Orthogonal matrix whose first two columns are the orthonormal vectors
/// `x`, `y`. Requires `d >= 2`.
pub(crate) fn orthogonal_with_two_columns(x: &RVector, y: &RVector) -> RMatrix {
    let d = x.len();
    let h1 = orthogonal_with_first_column(x);
    let mut yp = h1.transpose() * y;
    yp[0] = 0.0;
    let tail = yp.rows(1, d - 1).into_owned();
    let tail = &tail / tail.norm();
    let h2 = orthogonal_with_first_column(&tail);
    let mut block = RMatrix::identity(d, d);
    block.view_mut((1, 1), (d - 1, d - 1)).copy_from(&h2);
    h1 * block
}

pub(crate) fn random_complex_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub(crate) fn random_real_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> RMatrix {
    RMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}
