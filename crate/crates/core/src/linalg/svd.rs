use super::Matrix;

const ROTATION_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;
/// Singular values below this fraction of the largest one are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Thin SVD `a = U diag(σ) Vᵀ` from one-sided (Hestenes) Jacobi rotations.
/// Only the tall case is handled here; callers transpose wide inputs.
struct ThinSvd {
    /// Columns are `σ_j u_j` (left vectors scaled by their singular value).
    scaled_left: Matrix,
    right: Matrix,
    sigma: Vec<f64>,
}

fn one_sided_jacobi(a: &Matrix) -> ThinSvd {
    debug_assert!(a.rows() >= a.cols());
    let (m, n) = a.shape();
    let mut u = a.clone();
    let mut v = Matrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= ROTATION_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = (0..n).map(|j| u.column(j).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    ThinSvd { scaled_left: u, right: v, sigma }
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let mut s = if a.rows() >= a.cols() {
        one_sided_jacobi(a).sigma
    } else {
        one_sided_jacobi(&a.transpose()).sigma
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with the `RANK_TOL` relative cutoff.
pub fn rank(a: &Matrix) -> usize {
    let s = singular_values(a);
    let cutoff = RANK_TOL * s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > cutoff && x > 0.0).count()
}

/// Moore–Penrose pseudoinverse.
pub fn pinv(a: &Matrix) -> Matrix {
    if a.rows() < a.cols() {
        return pinv(&a.transpose()).transpose();
    }
    let (m, n) = a.shape();
    let svd = one_sided_jacobi(a);
    let smax = svd.sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = RANK_TOL * smax;
    let mut out = Matrix::zeros(n, m);
    for (j, &sj) in svd.sigma.iter().enumerate() {
        if sj <= cutoff || sj == 0.0 {
            continue;
        }
        let inv_sq = 1.0 / (sj * sj);
        for r in 0..n {
            let vr = svd.right[(r, j)] * inv_sq;
            if vr == 0.0 {
                continue;
            }
            for c in 0..m {
                out[(r, c)] += vr * svd.scaled_left[(c, j)];
            }
        }
    }
    out
}
