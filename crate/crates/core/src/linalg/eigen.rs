use num_complex::Complex64;

use super::Matrix;
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a square matrix, with orthonormal eigenvectors (as columns)
/// when the input was symmetric.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Option<Matrix>,
}

impl Spectrum {
    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    pub fn min_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back in nondecreasing order with the matching eigenvector
/// in the same column of `eigenvectors`.
pub fn sym_eig(m: &Matrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::arg(format!("sym_eig needs a square matrix, got {:?}", m.shape())));
    }
    if !m.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::arg("sym_eig needs a symmetric matrix"));
    }
    let n = m.rows();
    let mut a = m.symmetrize();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > JACOBI_TOL * scale {
        return Err(Error::numeric("Jacobi iteration did not converge"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&i| Complex64::new(a[(i, i)], 0.0)).collect(),
        eigenvectors: Some(vectors),
    })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// All (complex) eigenvalues of a general square matrix: balancing, reduction
/// to upper Hessenberg form, then Francis double-shift QR.
pub fn real_eigenvalues(m: &Matrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::arg(format!("eigenvalues need a square matrix, got {:?}", m.shape())));
    }
    let n = m.rows();
    let mut h = Hessenberg::new(m);
    h.balance();
    h.reduce();
    let mut values = h.qr_eigenvalues(100 * n.max(1))?;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(Spectrum { eigenvalues: values, eigenvectors: None })
}

/// Decides whether `m` has an eigenvalue on the open negative real axis.
///
/// An eigenvalue counts when `Re λ < -1e-9 (1 + ‖m‖)` and `|Im λ| <= 1e-9 (1 + ‖m‖)`.
pub fn has_negative_real_eigenvalue(m: &Matrix) -> Result<bool> {
    let spectrum = real_eigenvalues(m)?;
    let tol = 1e-9 * (1.0 + m.frobenius_norm());
    Ok(spectrum.eigenvalues.iter().any(|z| z.re < -tol && z.im.abs() <= tol))
}

/// Working copy with 1-based indexing, which keeps the QR sweep close to its
/// textbook form.
struct Hessenberg {
    n: usize,
    a: Vec<f64>,
}

impl Hessenberg {
    fn new(m: &Matrix) -> Self {
        let n = m.rows();
        let mut a = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                a[(i + 1) * (n + 1) + j + 1] = m[(i, j)];
            }
        }
        Hessenberg { n, a }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.n + 1) + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * (self.n + 1) + j]
    }

    fn balance(&mut self) {
        const RADIX: f64 = 2.0;
        let sqrdx = RADIX * RADIX;
        let n = self.n;
        let mut done = false;
        while !done {
            done = true;
            for i in 1..=n {
                let (mut r, mut c) = (0.0, 0.0);
                for j in 1..=n {
                    if j != i {
                        c += self.at(j, i).abs();
                        r += self.at(i, j).abs();
                    }
                }
                if c != 0.0 && r != 0.0 {
                    let mut g = r / RADIX;
                    let mut f = 1.0;
                    let s = c + r;
                    while c < g {
                        f *= RADIX;
                        c *= sqrdx;
                    }
                    g = r * RADIX;
                    while c > g {
                        f /= RADIX;
                        c /= sqrdx;
                    }
                    if (c + r) / f < 0.95 * s {
                        done = false;
                        let g = 1.0 / f;
                        for j in 1..=n {
                            *self.at_mut(i, j) *= g;
                        }
                        for j in 1..=n {
                            *self.at_mut(j, i) *= f;
                        }
                    }
                }
            }
        }
    }

    /// Gaussian elimination with pivoting to upper Hessenberg form.
    fn reduce(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        for m in 2..n {
            let mut x = 0.0_f64;
            let mut pivot = m;
            for j in m..=n {
                if self.at(j, m - 1).abs() > x.abs() {
                    x = self.at(j, m - 1);
                    pivot = j;
                }
            }
            if pivot != m {
                for j in (m - 1)..=n {
                    let tmp = self.at(pivot, j);
                    *self.at_mut(pivot, j) = self.at(m, j);
                    *self.at_mut(m, j) = tmp;
                }
                for j in 1..=n {
                    let tmp = self.at(j, pivot);
                    *self.at_mut(j, pivot) = self.at(j, m);
                    *self.at_mut(j, m) = tmp;
                }
            }
            if x != 0.0 {
                for i in (m + 1)..=n {
                    let mut y = self.at(i, m - 1);
                    if y != 0.0 {
                        y /= x;
                        *self.at_mut(i, m - 1) = y;
                        for j in m..=n {
                            let v = self.at(m, j);
                            *self.at_mut(i, j) -= y * v;
                        }
                        for j in 1..=n {
                            let v = self.at(j, i);
                            *self.at_mut(j, m) += y * v;
                        }
                    }
                }
            }
        }
        // multipliers were stored below the subdiagonal
        for i in 3..=n {
            for j in 1..(i - 1) {
                *self.at_mut(i, j) = 0.0;
            }
        }
    }

    #[allow(unused_assignments)]
    fn qr_eigenvalues(&mut self, max_iterations: usize) -> Result<Vec<Complex64>> {
        let n = self.n;
        let mut wr = vec![0.0; n + 1];
        let mut wi = vec![0.0; n + 1];
        let mut anorm = 0.0;
        for i in 1..=n {
            for j in i.saturating_sub(1).max(1)..=n {
                anorm += self.at(i, j).abs();
            }
        }
        let mut nn = n;
        let mut t = 0.0;
        let mut total = 0usize;
        let (mut x, mut y, mut w);
        let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
        while nn >= 1 {
            let mut its = 0;
            loop {
                let mut l = nn;
                while l >= 2 {
                    s = self.at(l - 1, l - 1).abs() + self.at(l, l).abs();
                    if s == 0.0 {
                        s = anorm;
                    }
                    if self.at(l, l - 1).abs() + s == s {
                        *self.at_mut(l, l - 1) = 0.0;
                        break;
                    }
                    l -= 1;
                }
                x = self.at(nn, nn);
                if l == nn {
                    wr[nn] = x + t;
                    wi[nn] = 0.0;
                    nn -= 1;
                } else {
                    y = self.at(nn - 1, nn - 1);
                    w = self.at(nn, nn - 1) * self.at(nn - 1, nn);
                    if l == nn - 1 {
                        p = 0.5 * (y - x);
                        q = p * p + w;
                        z = q.abs().sqrt();
                        x += t;
                        if q >= 0.0 {
                            z = p + z.copysign(p);
                            wr[nn - 1] = x + z;
                            wr[nn] = x + z;
                            if z != 0.0 {
                                wr[nn] = x - w / z;
                            }
                            wi[nn - 1] = 0.0;
                            wi[nn] = 0.0;
                        } else {
                            wr[nn - 1] = x + p;
                            wr[nn] = x + p;
                            wi[nn - 1] = -z;
                            wi[nn] = z;
                        }
                        nn -= 2;
                    } else {
                        if its == 30 || total >= max_iterations {
                            return Err(Error::numeric("QR iteration did not converge"));
                        }
                        if its == 10 || its == 20 {
                            t += x;
                            for i in 1..=nn {
                                *self.at_mut(i, i) -= x;
                            }
                            s = self.at(nn, nn - 1).abs() + self.at(nn - 1, nn - 2).abs();
                            x = 0.75 * s;
                            y = x;
                            w = -0.4375 * s * s;
                        }
                        its += 1;
                        total += 1;
                        let mut m = nn - 2;
                        loop {
                            z = self.at(m, m);
                            r = x - z;
                            s = y - z;
                            p = (r * s - w) / self.at(m + 1, m) + self.at(m, m + 1);
                            q = self.at(m + 1, m + 1) - z - r - s;
                            r = self.at(m + 2, m + 1);
                            s = p.abs() + q.abs() + r.abs();
                            p /= s;
                            q /= s;
                            r /= s;
                            if m == l {
                                break;
                            }
                            let u = self.at(m, m - 1).abs() * (q.abs() + r.abs());
                            let v = p.abs()
                                * (self.at(m - 1, m - 1).abs() + z.abs() + self.at(m + 1, m + 1).abs());
                            if u + v == v {
                                break;
                            }
                            m -= 1;
                        }
                        for i in (m + 2)..=nn {
                            *self.at_mut(i, i - 2) = 0.0;
                            if i != m + 2 {
                                *self.at_mut(i, i - 3) = 0.0;
                            }
                        }
                        let mut k = m;
                        while k < nn {
                            if k != m {
                                p = self.at(k, k - 1);
                                q = self.at(k + 1, k - 1);
                                r = 0.0;
                                if k != nn - 1 {
                                    r = self.at(k + 2, k - 1);
                                }
                                x = p.abs() + q.abs() + r.abs();
                                if x != 0.0 {
                                    p /= x;
                                    q /= x;
                                    r /= x;
                                }
                            }
                            s = (p * p + q * q + r * r).sqrt().copysign(p);
                            if s != 0.0 {
                                if k == m {
                                    if l != m {
                                        *self.at_mut(k, k - 1) = -self.at(k, k - 1);
                                    }
                                } else {
                                    *self.at_mut(k, k - 1) = -s * x;
                                }
                                p += s;
                                x = p / s;
                                y = q / s;
                                z = r / s;
                                q /= p;
                                r /= p;
                                for j in k..=nn {
                                    p = self.at(k, j) + q * self.at(k + 1, j);
                                    if k != nn - 1 {
                                        p += r * self.at(k + 2, j);
                                        *self.at_mut(k + 2, j) -= p * z;
                                    }
                                    *self.at_mut(k + 1, j) -= p * y;
                                    *self.at_mut(k, j) -= p * x;
                                }
                                let mmin = nn.min(k + 3);
                                for i in l..=mmin {
                                    p = x * self.at(i, k) + y * self.at(i, k + 1);
                                    if k != nn - 1 {
                                        p += z * self.at(i, k + 2);
                                        *self.at_mut(i, k + 2) -= p * r;
                                    }
                                    *self.at_mut(i, k + 1) -= p * q;
                                    *self.at_mut(i, k) -= p;
                                }
                            }
                            k += 1;
                        }
                    }
                }
                if nn < 2 || l + 1 >= nn {
                    break;
                }
            }
        }
        Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
    }
}
