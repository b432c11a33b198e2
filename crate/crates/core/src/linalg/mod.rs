//! Dense real linear algebra at desk scale (dimensions up to ~100).

mod eigen;
mod matrix;
mod svd;

pub use eigen::{has_negative_real_eigenvalue, real_eigenvalues, sym_eig, Spectrum};
pub use matrix::Matrix;
pub use svd::{pinv, rank, singular_values, RANK_TOL};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Squared Euclidean distance.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `(1 - t) a + t b`.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

fn lu_decompose(a: &Matrix) -> Result<Lu> {
    if !a.is_square() {
        return Err(Error::arg("LU needs a square matrix"));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let scale = a.max_abs();
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs())).unwrap();
        if lu[(pivot, k)].abs() <= 1e-14 * scale || lu[(pivot, k)] == 0.0 {
            return Err(Error::numeric("matrix is singular to working precision"));
        }
        if pivot != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            perm.swap(k, pivot);
            sign = -sign;
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = f;
            for j in k + 1..n {
                lu[(i, j)] -= f * lu[(k, j)];
            }
        }
    }
    Ok(Lu { lu, perm, sign })
}

impl Lu {
    fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Solves `a x = b` for square nonsingular `a`.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::arg("right-hand side length differs from matrix size"));
    }
    Ok(lu_decompose(a)?.solve_vec(b))
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let lu = lu_decompose(a)?;
    let n = a.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        for (i, v) in lu.solve_vec(&e).into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    Ok(inv)
}

pub fn determinant(a: &Matrix) -> Result<f64> {
    match lu_decompose(a) {
        Ok(lu) => Ok(lu.sign * lu.lu.diagonal().iter().product::<f64>()),
        Err(Error::Numeric(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Applies `f` to the eigenvalues of a symmetric matrix: `Q f(Λ) Qᵀ`.
fn spectral_map(m: &Matrix, f: impl Fn(f64) -> f64) -> Result<Matrix> {
    let spec = sym_eig(m)?;
    let q = spec.eigenvectors.expect("symmetric spectrum carries eigenvectors");
    let n = m.rows();
    let vals: Vec<f64> = spec.eigenvalues.iter().map(|z| f(z.re)).collect();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..n).map(|k| q[(i, k)] * vals[k] * q[(j, k)]).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    Ok(out)
}

/// Principal square root of a symmetric positive semidefinite matrix.
///
/// Eigenvalues down to `-1e-10 ‖m‖_F` are clamped to zero; anything more
/// negative is rejected.
pub fn sqrt_psd(m: &Matrix) -> Result<Matrix> {
    let lambda_min = sym_eig(m)?.min_real();
    if lambda_min < -1e-10 * m.frobenius_norm() {
        return Err(Error::arg(format!("matrix is indefinite (smallest eigenvalue {lambda_min:e})")));
    }
    spectral_map(m, |l| l.max(0.0).sqrt())
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn inv_sqrt_spd(m: &Matrix) -> Result<Matrix> {
    let spec = sym_eig(m)?;
    if spec.min_real() <= 1e-14 * spec.max_real().abs().max(f64::MIN_POSITIVE) {
        return Err(Error::arg("matrix is not positive definite"));
    }
    spectral_map(m, |l| 1.0 / l.sqrt())
}
