//! Dual frames and transport duals.
//!
//! `ν` is a transport dual of `μ` when some coupling `γ ∈ Γ(μ, ν)` has
//! `∬ x yᵀ dγ = I`. For finitely supported measures the coupling is a matrix
//! `A ∈ DS(α, β)` and the condition reads `Φᵀ A Ψ = I`, so deciding membership
//! is a linear feasibility problem. Infeasibility is certified by a triple
//! `(B, u, v)` with
//!
//! ```text
//! φᵢᵀ B ψⱼ + uᵢ + vⱼ >= 0   for all i, j
//! tr(B) + uᵀα + vᵀβ  <  0
//! ```

use crate::error::{Error, Result};
use crate::linalg::{dot, inverse, Matrix};
use crate::measures::{DiscreteMeasure, SecondMoments};
use crate::optim::{solve_lp, LinearProgram, LpOutcome, FEASIBILITY_TOL};

/// Entrywise tolerance on `Φᵀ A Ψ = I`. Coupling errors are amplified by `‖Φ‖‖Ψ‖`,
/// hence looser than the LP feasibility tolerance.
pub const DUALITY_TOL: f64 = 1e-7;
const MARGINAL_TOL: f64 = 1e-8;
const NEGATIVE_MASS_TOL: f64 = 1e-10;

/// A coupling of two discrete measures, stored as its `N × M` mass matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    row_measure: DiscreteMeasure,
    col_measure: DiscreteMeasure,
    coupling: Matrix,
}

impl TransportPlan {
    /// Validates marginals (to 1e-8) and nonnegativity (to -1e-10).
    pub fn new(row_measure: DiscreteMeasure, col_measure: DiscreteMeasure, coupling: Matrix) -> Result<Self> {
        let (n, m) = (row_measure.len(), col_measure.len());
        if coupling.shape() != (n, m) {
            return Err(Error::arg(format!("coupling is {:?}, expected ({n}, {m})", coupling.shape())));
        }
        if coupling.as_slice().iter().any(|&a| a < -NEGATIVE_MASS_TOL) {
            return Err(Error::arg("coupling has negative mass"));
        }
        for (i, &a) in row_measure.weights().iter().enumerate() {
            let s: f64 = coupling.row(i).iter().sum();
            if (s - a).abs() > MARGINAL_TOL {
                return Err(Error::arg(format!("row {i} sums to {s}, expected {a}")));
            }
        }
        for (j, &b) in col_measure.weights().iter().enumerate() {
            let s: f64 = (0..n).map(|i| coupling[(i, j)]).sum();
            if (s - b).abs() > MARGINAL_TOL {
                return Err(Error::arg(format!("column {j} sums to {s}, expected {b}")));
            }
        }
        Ok(TransportPlan { row_measure, col_measure, coupling })
    }

    /// The product coupling `α βᵀ`.
    pub fn independent(row_measure: DiscreteMeasure, col_measure: DiscreteMeasure) -> Self {
        let coupling = Matrix::outer(row_measure.weights(), col_measure.weights());
        TransportPlan { row_measure, col_measure, coupling }
    }

    /// The coupling `(ι, f)_# μ`, with one column per atom of `μ`.
    pub fn deterministic(mu: &DiscreteMeasure, f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let image = mu.map_atoms(f)?;
        let coupling = Matrix::from_diag(mu.weights());
        Ok(TransportPlan { row_measure: mu.clone(), col_measure: image, coupling })
    }

    pub fn row_measure(&self) -> &DiscreteMeasure {
        &self.row_measure
    }

    pub fn col_measure(&self) -> &DiscreteMeasure {
        &self.col_measure
    }

    pub fn coupling(&self) -> &Matrix {
        &self.coupling
    }

    /// `∬ x yᵀ dγ = Σᵢⱼ Aᵢⱼ φᵢ ψⱼᵀ`.
    pub fn cross_moment(&self) -> Matrix {
        let d = self.row_measure.dim();
        let mut c = Matrix::zeros(d, self.col_measure.dim());
        for (i, phi) in self.row_measure.atoms().iter().enumerate() {
            for (j, psi) in self.col_measure.atoms().iter().enumerate() {
                let a = self.coupling[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for k in 0..d {
                    for l in 0..psi.len() {
                        c[(k, l)] += a * phi[k] * psi[l];
                    }
                }
            }
        }
        c
    }

    /// `Σᵢⱼ Aᵢⱼ ‖φᵢ − ψⱼ‖²`.
    pub fn cost(&self) -> f64 {
        let mut total = 0.0;
        for (i, phi) in self.row_measure.atoms().iter().enumerate() {
            for (j, psi) in self.col_measure.atoms().iter().enumerate() {
                total += self.coupling[(i, j)] * crate::linalg::dist_sq(phi, psi);
            }
        }
        total
    }
}

/// Witness `(B, u, v)` that no coupling of `(μ, ν)` has cross moment `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub b: Matrix,
    /// Paired with the atoms and weights of `μ`.
    pub u: Vec<f64>,
    /// Paired with the atoms and weights of `ν`.
    pub v: Vec<f64>,
}

impl FarkasCertificate {
    /// `min_ij (φᵢᵀ B ψⱼ + uᵢ + vⱼ)`; nonnegative for a valid certificate.
    pub fn min_pair_slack(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut slack = f64::INFINITY;
        for (i, phi) in mu.atoms().iter().enumerate() {
            let bt_phi = self.b.transpose().mul_vec(phi);
            for (j, psi) in nu.atoms().iter().enumerate() {
                slack = slack.min(dot(&bt_phi, psi) + self.u[i] + self.v[j]);
            }
        }
        slack
    }

    /// `tr(B) + uᵀα + vᵀβ`; negative for a valid certificate.
    pub fn objective(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        self.b.trace() + dot(&self.u, mu.weights()) + dot(&self.v, nu.weights())
    }

    /// Both Farkas inequalities hold with margin 1e-8.
    pub fn validate(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> bool {
        let d = mu.dim();
        self.b.shape() == (d, d)
            && nu.dim() == d
            && self.u.len() == mu.len()
            && self.v.len() == nu.len()
            && self.min_pair_slack(mu, nu) >= -FEASIBILITY_TOL
            && self.objective(mu, nu) <= -FEASIBILITY_TOL
    }
}

/// Outcome of [`find_transport_dual`].
#[derive(Debug, Clone, PartialEq)]
pub enum TransportDual {
    Dual(TransportPlan),
    NotDual(FarkasCertificate),
}

impl TransportDual {
    pub fn is_dual(&self) -> bool {
        matches!(self, TransportDual::Dual(_))
    }

    pub fn plan(&self) -> Option<&TransportPlan> {
        match self {
            TransportDual::Dual(p) => Some(p),
            TransportDual::NotDual(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&FarkasCertificate> {
        match self {
            TransportDual::Dual(_) => None,
            TransportDual::NotDual(c) => Some(c),
        }
    }
}

fn require_frame(mu: &DiscreteMeasure) -> Result<Matrix> {
    let s = mu.frame_operator();
    let report = mu.frame_report();
    if !report.is_frame {
        return Err(Error::NotAFrame { lower_bound: report.lower_bound });
    }
    inverse(&s)
}

/// The canonical dual `(S_μ⁻¹)_# μ`.
pub fn canonical_dual(mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let s_inv = require_frame(mu)?;
    mu.map_atoms(|a| s_inv.mul_vec(a))
}

/// Dual frame `ψᵢ = S⁻¹φᵢ + hᵢ − Σₖ ⟨S⁻¹φᵢ, φₖ⟩ hₖ` of the finite frame formed by
/// the atoms of `frame`, with the unweighted `S = Σ φᵢφᵢᵀ`.
///
/// Weights are carried over untouched. The result satisfies `Σᵢ ψᵢ φᵢᵀ = I`;
/// every dual of the finite frame arises this way.
pub fn dual_family_member(frame: &DiscreteMeasure, h: &[Vec<f64>]) -> Result<DiscreteMeasure> {
    check_perturbation(frame, h)?;
    let phi = frame.analysis_matrix();
    let s = phi.transpose().matmul(&phi);
    let s_inv = inverse(&s).map_err(|_| Error::NotAFrame { lower_bound: 0.0 })?;
    let ones = vec![1.0; frame.len()];
    perturbed_duals(frame, &s_inv, h, &ones)
}

/// Atoms `ψ_h(φᵢ) = S_μ⁻¹φᵢ + h(φᵢ) − Σⱼ αⱼ ⟨S_μ⁻¹φᵢ, φⱼ⟩ h(φⱼ)` with the weights
/// of `μ`; the coupling `(ι, ψ_h)_# μ` makes the result a transport dual of `μ`.
pub fn psi_h_dual(mu: &DiscreteMeasure, h: &[Vec<f64>]) -> Result<DiscreteMeasure> {
    check_perturbation(mu, h)?;
    let s_inv = require_frame(mu)?;
    perturbed_duals(mu, &s_inv, h, mu.weights())
}

fn check_perturbation(mu: &DiscreteMeasure, h: &[Vec<f64>]) -> Result<()> {
    if h.len() != mu.len() {
        return Err(Error::arg(format!("{} perturbation vectors for {} atoms", h.len(), mu.len())));
    }
    if h.iter().any(|v| v.len() != mu.dim() || v.iter().any(|x| !x.is_finite())) {
        return Err(Error::arg("perturbation vectors must be finite and match the dimension"));
    }
    Ok(())
}

fn perturbed_duals(mu: &DiscreteMeasure, s_inv: &Matrix, h: &[Vec<f64>], w: &[f64]) -> Result<DiscreteMeasure> {
    let atoms = mu
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, phi)| {
            let canonical = s_inv.mul_vec(phi);
            let mut psi = canonical.clone();
            for (k, hk) in h[i].iter().enumerate() {
                psi[k] += hk;
            }
            for (j, phj) in mu.atoms().iter().enumerate() {
                let c = w[j] * dot(&canonical, phj);
                for (k, hk) in h[j].iter().enumerate() {
                    psi[k] -= c * hk;
                }
            }
            psi
        })
        .collect();
    DiscreteMeasure::new(atoms, mu.weights().to_vec())
}

/// `Σᵢⱼ Aᵢⱼ φᵢψⱼᵀ = I` entrywise within [`DUALITY_TOL`].
pub fn verify_transport_dual(plan: &TransportPlan) -> bool {
    let c = plan.cross_moment();
    c.is_square() && (&c - &Matrix::identity(c.rows())).max_abs() <= DUALITY_TOL
}

/// True when `ψ` is uniform with `Σ ψᵢ = 0`; such a measure has no equal-weight
/// transport dual supported on `d` points.
pub fn zero_centroid_obstruction(psi: &DiscreteMeasure) -> bool {
    if !psi.is_uniform() {
        return false;
    }
    let mut sum = vec![0.0; psi.dim()];
    let mut scale = 1.0_f64;
    for a in psi.atoms() {
        for (s, x) in sum.iter_mut().zip(a) {
            *s += x;
        }
        scale += a.iter().map(|x| x.abs()).sum::<f64>();
    }
    sum.iter().all(|s| s.abs() <= 1e-10 * scale)
}

/// Decides whether `ν` is a transport dual of the frame `μ`.
///
/// Returns either a verified plan with `Φᵀ A Ψ = I` or a verified Farkas certificate.
/// Bitwise-identical atoms are merged before the LP solve and split back afterwards.
pub fn find_transport_dual(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<TransportDual> {
    if mu.dim() != nu.dim() {
        return Err(Error::arg(format!("dimensions differ: {} vs {}", mu.dim(), nu.dim())));
    }
    require_frame(mu)?;
    let (mu_m, row_map) = merge_with_map(mu);
    let (nu_m, col_map) = merge_with_map(nu);
    let lp = transport_dual_lp(&mu_m, &nu_m);
    match solve_lp(&lp)? {
        LpOutcome::Feasible { solution, .. } => {
            let (n, m) = (mu_m.len(), nu_m.len());
            let merged = Matrix::from_row_major(n, m, solution)?;
            let plan = TransportPlan::new(
                mu.clone(),
                nu.clone(),
                split_coupling(&merged, mu, &row_map, &mu_m, nu, &col_map, &nu_m),
            )?;
            if !verify_transport_dual(&plan) {
                return Err(Error::numeric(format!(
                    "LP solution misses the duality identity by {:e}",
                    (&plan.cross_moment() - &Matrix::identity(mu.dim())).max_abs()
                )));
            }
            Ok(TransportDual::Dual(plan))
        }
        LpOutcome::Infeasible { certificate } => {
            let d = mu.dim();
            let b = Matrix::from_row_major(d, d, certificate[..d * d].to_vec())?;
            let u_m = &certificate[d * d..d * d + mu_m.len()];
            let v_m = &certificate[d * d + mu_m.len()..];
            let cert = FarkasCertificate {
                b,
                u: row_map.iter().map(|&k| u_m[k]).collect(),
                v: col_map.iter().map(|&k| v_m[k]).collect(),
            };
            if !cert.validate(mu, nu) {
                return Err(Error::numeric("Farkas certificate failed re-validation"));
            }
            Ok(TransportDual::NotDual(cert))
        }
        LpOutcome::Unbounded => Err(Error::numeric("feasibility LP reported unbounded")),
    }
}

/// `K a = t` over `a = vec(A)` (row-major): `d²` rows for `Φᵀ A Ψ = I` indexed by
/// `k·d + l`, then `N` row-sum rows, then `M` column-sum rows.
pub fn transport_dual_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> LinearProgram {
    let (d, n, m) = (mu.dim(), mu.len(), nu.len());
    let rows = d * d + n + m;
    let mut k = Matrix::zeros(rows, n * m);
    let mut t = vec![0.0; rows];
    for (i, phi) in mu.atoms().iter().enumerate() {
        for (j, psi) in nu.atoms().iter().enumerate() {
            let col = i * m + j;
            for a in 0..d {
                for b in 0..d {
                    k[(a * d + b, col)] = phi[a] * psi[b];
                }
            }
            k[(d * d + i, col)] = 1.0;
            k[(d * d + n + j, col)] = 1.0;
        }
    }
    for a in 0..d {
        t[a * d + a] = 1.0;
    }
    t[d * d..d * d + n].copy_from_slice(mu.weights());
    t[d * d + n..].copy_from_slice(nu.weights());
    LinearProgram::feasibility(k, t).expect("dimensions agree by construction")
}

/// Merged measure plus, for each original atom, the index of its merged atom.
fn merge_with_map(mu: &DiscreteMeasure) -> (DiscreteMeasure, Vec<usize>) {
    let merged = mu.merge_duplicates();
    let map = mu
        .atoms()
        .iter()
        .map(|a| {
            merged
                .atoms()
                .iter()
                .position(|b| crate::measures::bitwise_eq(a, b))
                .expect("every atom survives merging")
        })
        .collect();
    (merged, map)
}

/// Splits merged rows/columns back in proportion to the original weights.
fn split_coupling(
    merged: &Matrix,
    mu: &DiscreteMeasure,
    row_map: &[usize],
    mu_m: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    col_map: &[usize],
    nu_m: &DiscreteMeasure,
) -> Matrix {
    let share = |w: f64, total: f64| if total > 0.0 { w / total } else { 0.0 };
    let mut a = Matrix::zeros(mu.len(), nu.len());
    for (i, &ki) in row_map.iter().enumerate() {
        let ri = share(mu.weights()[i], mu_m.weights()[ki]);
        for (j, &kj) in col_map.iter().enumerate() {
            let cj = share(nu.weights()[j], nu_m.weights()[kj]);
            a[(i, j)] = merged[(ki, kj)] * ri * cj;
        }
    }
    a
}
