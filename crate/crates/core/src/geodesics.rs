//! Displacement interpolation between discrete measures and between centred
//! Gaussians, and certificates that every measure along the path is a frame.

use rayon::prelude::*;

use crate::duality::TransportPlan;
use crate::error::{Error, Result};
use crate::linalg::{dot, has_negative_real_eigenvalue, inv_sqrt_spd, inverse, lerp, pinv, rank, sqrt_psd, sym_eig, Matrix};
use crate::measures::{pd_threshold, DiscreteMeasure, GaussianMeasure, SecondMoments};
use crate::transport::{optimal_permutation, wasserstein2};

pub const DEFAULT_GRID: usize = 101;
/// Plan entries at or below this mass are not turned into atoms.
pub const MASS_EPS: f64 = 1e-12;
/// Allowed defect in `W₂(μ₀, μ_t) + W₂(μ_t, μ₁) = W₂(μ₀, μ₁)`.
pub const ADDITIVITY_TOL: f64 = 1e-6;

/// `μ_t = ((1 − t)x + ty)_# γ` for a coupling `γ` of `μ₀` and `μ₁`.
///
/// The plan is taken to be optimal; only then is `t ↦ μ_t` a geodesic.
/// Coinciding atoms are merged, so `t = 0` and `t = 1` reproduce the endpoints.
pub fn geodesic_measure(plan: &TransportPlan, t: f64) -> Result<DiscreteMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::arg(format!("t = {t} is outside [0, 1]")));
    }
    let a = plan.coupling();
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (i, x) in plan.row_measure().atoms().iter().enumerate() {
        for (j, y) in plan.col_measure().atoms().iter().enumerate() {
            if a[(i, j)] > MASS_EPS {
                atoms.push(lerp(x, y, t));
                weights.push(a[(i, j)]);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    Ok(DiscreteMeasure::new(atoms, weights)?.merge_duplicates())
}

/// Frame bounds and second moments of `μ_t` on a uniform grid of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicProfile {
    pub ts: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub second_moments: Vec<f64>,
    pub all_frames: bool,
    /// Largest defect of the geodesic identity observed at the interior check points.
    pub additivity_defect: f64,
}

impl GeodesicProfile {
    pub fn min_lower_bound(&self) -> f64 {
        self.lower_bounds.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `t,lambda_min,lambda_max,m2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,lambda_min,lambda_max,m2\n");
        for k in 0..self.ts.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.ts[k], self.lower_bounds[k], self.upper_bounds[k], self.second_moments[k]
            ));
        }
        out
    }
}

pub fn uniform_grid(grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::arg(format!("grid needs at least 2 points, got {grid_size}")));
    }
    let n = (grid_size - 1) as f64;
    Ok((0..grid_size).map(|k| k as f64 / n).collect())
}

/// Solves for an optimal plan once, then reports `λ_min`, `λ_max` and `M₂²` of
/// every `μ_t` on the grid (in parallel).
///
/// The geodesic identity is checked at three interior grid points; a defect above
/// [`ADDITIVITY_TOL`] is reported as a numeric error.
pub fn geodesic_profile(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, grid_size: usize) -> Result<GeodesicProfile> {
    let ts = uniform_grid(grid_size)?;
    for mu in [mu0, mu1] {
        let r = mu.frame_report();
        if !r.is_frame {
            return Err(Error::NotAFrame { lower_bound: r.lower_bound });
        }
    }
    let ot = wasserstein2(mu0, mu1)?;
    let reports = ts
        .par_iter()
        .map(|&t| geodesic_measure(&ot.plan, t).map(|m| m.frame_report()))
        .collect::<Result<Vec<_>>>()?;

    let mut additivity_defect: f64 = 0.0;
    if grid_size >= 3 {
        let mut checks = vec![grid_size / 4, grid_size / 2, 3 * grid_size / 4];
        checks.iter_mut().for_each(|k| *k = (*k).clamp(1, grid_size - 2));
        checks.dedup();
        let total = ot.distance();
        for k in checks {
            let mid = geodesic_measure(&ot.plan, ts[k])?;
            let lhs = wasserstein2(mu0, &mid)?.distance() + wasserstein2(&mid, mu1)?.distance();
            additivity_defect = additivity_defect.max((lhs - total).abs());
        }
        if additivity_defect > ADDITIVITY_TOL {
            return Err(Error::numeric(format!("geodesic identity violated by {additivity_defect:e}")));
        }
    }

    let lower_bounds: Vec<f64> = reports.iter().map(|r| r.lower_bound).collect();
    let upper_bounds: Vec<f64> = reports.iter().map(|r| r.upper_bound).collect();
    let all_frames = reports.iter().all(|r| r.is_frame);
    Ok(GeodesicProfile {
        ts,
        lower_bounds,
        upper_bounds,
        second_moments: reports.iter().map(|r| r.second_moment).collect(),
        all_frames,
        additivity_defect,
    })
}

/// True when `Ψσ† Φ` has no eigenvalue on the closed negative real axis, which
/// keeps `(1 − t)Φ + tΨσ` at full rank for every `t ∈ [0, 1]`.
///
/// Both arguments are `N × d` analysis matrices of rank `d`. A positive answer is
/// spot-checked on an 11-point grid.
pub fn szulc_condition(phi: &Matrix, psi_sigma: &Matrix) -> Result<bool> {
    if phi.shape() != psi_sigma.shape() {
        return Err(Error::arg(format!("shapes differ: {:?} vs {:?}", phi.shape(), psi_sigma.shape())));
    }
    let d = phi.cols();
    if rank(phi) != d || rank(psi_sigma) != d {
        return Err(Error::arg("analysis matrices must have full column rank"));
    }
    let m = pinv(psi_sigma).matmul(phi);
    let holds = !has_negative_real_eigenvalue(&m)?;
    if holds {
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let path = &phi.scale(1.0 - t) + &psi_sigma.scale(t);
            if rank(&path) != d {
                return Err(Error::numeric(format!("interpolant loses rank at t = {t}")));
            }
        }
    }
    Ok(holds)
}

/// Quantities of the sufficient condition for an identity optimal pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceTest {
    /// `minᵢ≠ⱼ ⟨φᵢ, S⁻¹(φᵢ − φⱼ)⟩`.
    pub a: f64,
    /// `maxᵢ ‖ψᵢ − S⁻¹φᵢ‖`.
    pub max_deviation: f64,
    /// `max_deviation <= a / N`.
    pub holds: bool,
}

/// For a unit-norm frame `Φ` and a dual `Ψ` (`Σ ψᵢφᵢᵀ = I`), tests
/// `maxᵢ ‖ψᵢ − S⁻¹φᵢ‖ <= a / N`. When it holds the identity is an optimal pairing,
/// which is re-checked with the assignment solver.
pub fn coherence_identity_test(phi: &[Vec<f64>], psi: &[Vec<f64>]) -> Result<CoherenceTest> {
    let n = phi.len();
    if n == 0 || psi.len() != n {
        return Err(Error::arg("frame and dual need the same nonzero number of vectors"));
    }
    if let Some(i) = phi.iter().position(|p| (dot(p, p).sqrt() - 1.0).abs() > 1e-10) {
        return Err(Error::arg(format!("frame vector {i} is not unit norm")));
    }
    let phi_m = Matrix::from_rows(phi)?;
    let psi_m = Matrix::from_rows(psi)?;
    if phi_m.cols() != psi_m.cols() {
        return Err(Error::arg("frame and dual live in different dimensions"));
    }
    let d = phi_m.cols();
    let cross = psi_m.transpose().matmul(&phi_m);
    if (&cross - &Matrix::identity(d)).max_abs() > 1e-8 {
        return Err(Error::arg("second family is not a dual of the first"));
    }
    let s_inv = inverse(&phi_m.transpose().matmul(&phi_m))?;
    let canonical: Vec<Vec<f64>> = phi.iter().map(|p| s_inv.mul_vec(p)).collect();
    let max_deviation = psi
        .iter()
        .zip(&canonical)
        .map(|(p, c)| crate::linalg::dist_sq(p, c).sqrt())
        .fold(0.0, f64::max);
    let mut a = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a = a.min(dot(&phi[i], &canonical[i]) - dot(&phi[i], &canonical[j]));
            }
        }
    }
    // a single vector has no competing pairing
    if n == 1 {
        a = 0.0;
    }
    let holds = max_deviation <= a / n as f64;
    if holds {
        let sigma = optimal_permutation(phi, psi)?;
        if sigma.iter().enumerate().any(|(i, &j)| i != j) {
            return Err(Error::numeric("coherence condition holds but the identity is not optimal"));
        }
    }
    Ok(CoherenceTest { a, max_deviation, holds })
}

fn centred_covariances<'a>(g0: &'a GaussianMeasure, g1: &'a GaussianMeasure) -> Result<(&'a Matrix, &'a Matrix)> {
    if !g0.is_centered() || !g1.is_centered() {
        return Err(Error::arg("Gaussians must have zero mean"));
    }
    if g0.dim() != g1.dim() {
        return Err(Error::arg(format!("dimensions differ: {} vs {}", g0.dim(), g1.dim())));
    }
    Ok((g0.covariance(), g1.covariance()))
}

/// `W₂²` between centred Gaussians: `Tr[Σ₀ + Σ₁ − 2(Σ₀^½ Σ₁ Σ₀^½)^½]`.
pub fn gaussian_w2(g0: &GaussianMeasure, g1: &GaussianMeasure) -> Result<f64> {
    let (s0, s1) = centred_covariances(g0, g1)?;
    let r0 = sqrt_psd(s0)?;
    let cross = sqrt_psd(&r0.matmul(s1).matmul(&r0).symmetrize())?;
    Ok((s0.trace() + s1.trace() - 2.0 * cross.trace()).max(0.0))
}

/// The symmetric positive semidefinite map `A = Σ₀^-½ (Σ₀^½ Σ₁ Σ₀^½)^½ Σ₀^-½`
/// pushing `N(0, Σ₀)` to `N(0, Σ₁)` optimally.
pub fn gaussian_optimal_map(s0: &Matrix, s1: &Matrix) -> Result<Matrix> {
    let r0 = sqrt_psd(s0)?;
    let r0_inv = inv_sqrt_spd(s0)?;
    let middle = sqrt_psd(&r0.matmul(s1).matmul(&r0).symmetrize())?;
    Ok(r0_inv.matmul(&middle).matmul(&r0_inv).symmetrize())
}

/// `Σ₁^½ Σ₀^-½`; a pushforward of `N(0, Σ₀)` onto `N(0, Σ₁)` that is optimal when
/// the covariances commute.
pub fn commuting_gaussian_map(s0: &Matrix, s1: &Matrix) -> Result<Matrix> {
    Ok(sqrt_psd(s1)?.matmul(&inv_sqrt_spd(s0)?))
}

/// The displacement interpolation between two centred Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath {
    pub sigma0: Matrix,
    pub sigma1: Matrix,
    pub map: Matrix,
    pub ts: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    pub upper_bounds: Vec<f64>,
}

impl GaussianPath {
    /// `Σ_t = ((1 − t)I + tA) Σ₀ ((1 − t)I + tA)ᵀ`.
    pub fn covariance_at(&self, t: f64) -> Matrix {
        let d = self.sigma0.rows();
        let m = &Matrix::identity(d).scale(1.0 - t) + &self.map.scale(t);
        m.matmul(&self.sigma0).matmul(&m.transpose()).symmetrize()
    }

    pub fn all_frames(&self) -> bool {
        self.lower_bounds
            .iter()
            .zip(&self.upper_bounds)
            .all(|(&l, &u)| l > pd_threshold(u))
    }
}

pub fn gaussian_path(g0: &GaussianMeasure, g1: &GaussianMeasure, grid_size: usize) -> Result<GaussianPath> {
    let (s0, s1) = centred_covariances(g0, g1)?;
    inv_sqrt_spd(s1)?;
    let map = gaussian_optimal_map(s0, s1)?;
    let ts = uniform_grid(grid_size)?;
    let mut path = GaussianPath {
        sigma0: s0.clone(),
        sigma1: s1.clone(),
        map,
        ts,
        lower_bounds: Vec::new(),
        upper_bounds: Vec::new(),
    };
    for &t in &path.ts {
        let spec = sym_eig(&path.covariance_at(t))?;
        path.lower_bounds.push(spec.min_real());
        path.upper_bounds.push(spec.max_real());
    }
    Ok(path)
}
