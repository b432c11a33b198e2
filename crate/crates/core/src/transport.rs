//! Discrete 2-Wasserstein transport and cyclical monotonicity.

use crate::duality::TransportPlan;
use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, Matrix};
use crate::measures::DiscreteMeasure;
use crate::optim::{hungarian, solve_lp, LinearProgram, LpOutcome};

/// Allowed gap between the assignment and LP optima on uniform inputs.
const CROSS_CHECK_TOL: f64 = 1e-8;

/// An optimal coupling and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct OtSolution {
    /// `W₂²(μ, ν)`.
    pub distance_squared: f64,
    pub plan: TransportPlan,
    /// Present when both measures are uniform with equal cardinality; the plan is then `P_σ / N`.
    pub permutation: Option<Vec<usize>>,
}

impl OtSolution {
    pub fn distance(&self) -> f64 {
        self.distance_squared.max(0.0).sqrt()
    }
}

/// Solves the transportation problem for the squared Euclidean cost.
///
/// Uniform inputs of equal size go through the assignment solver; the result is
/// checked against the LP optimum.
pub fn wasserstein2(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OtSolution> {
    if mu.dim() != nu.dim() {
        return Err(Error::arg(format!("dimensions differ: {} vs {}", mu.dim(), nu.dim())));
    }
    let (plan, lp_cost) = transport_lp(mu, nu)?;
    if !(mu.len() == nu.len() && mu.is_uniform() && nu.is_uniform()) {
        let distance_squared = plan.cost().max(0.0);
        return Ok(OtSolution { distance_squared, plan, permutation: None });
    }
    let n = mu.len();
    let sigma = optimal_permutation(mu.atoms(), nu.atoms())?;
    let mut p = Matrix::zeros(n, n);
    for (i, &j) in sigma.iter().enumerate() {
        p[(i, j)] = 1.0 / n as f64;
    }
    let plan = TransportPlan::new(mu.clone(), nu.clone(), p)?;
    let distance_squared = plan.cost();
    if (distance_squared - lp_cost).abs() > CROSS_CHECK_TOL * (1.0 + lp_cost.abs()) {
        return Err(Error::numeric(format!(
            "assignment cost {distance_squared} disagrees with LP optimum {lp_cost}"
        )));
    }
    Ok(OtSolution { distance_squared, plan, permutation: Some(sigma) })
}

fn transport_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(TransportPlan, f64)> {
    let (n, m) = (mu.len(), nu.len());
    let mut k = Matrix::zeros(n + m, n * m);
    let mut cost = vec![0.0; n * m];
    for (i, x) in mu.atoms().iter().enumerate() {
        for (j, y) in nu.atoms().iter().enumerate() {
            k[(i, i * m + j)] = 1.0;
            k[(n + j, i * m + j)] = 1.0;
            cost[i * m + j] = dist_sq(x, y);
        }
    }
    let rhs = mu.weights().iter().chain(nu.weights()).copied().collect();
    let lp = LinearProgram::new(k, rhs, Some(cost))?;
    match solve_lp(&lp)? {
        LpOutcome::Feasible { solution, objective } => {
            let a = Matrix::from_row_major(n, m, solution)?;
            let plan = TransportPlan::new(mu.clone(), nu.clone(), a)?;
            Ok((plan, objective.unwrap_or(f64::NAN)))
        }
        // the product coupling is always feasible and the cost is bounded below
        _ => Err(Error::numeric("transportation LP failed to find a feasible plan")),
    }
}

/// The permutation `σ` minimizing `Σᵢ ‖φᵢ − ψ_σ(i)‖²`, lexicographically smallest among ties.
///
/// Since `‖φ − ψ‖² = ‖φ‖² + ‖ψ‖² − 2⟨φ, ψ⟩` and the norms do not depend on `σ`,
/// this is also the maximizer of `Σᵢ ⟨φᵢ, ψ_σ(i)⟩`.
pub fn optimal_permutation(phi: &[Vec<f64>], psi: &[Vec<f64>]) -> Result<Vec<usize>> {
    check_pairs(phi, psi)?;
    let n = phi.len();
    let mut cost = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            cost[(i, j)] = dist_sq(&phi[i], &psi[j]);
        }
    }
    Ok(hungarian(&cost)?.permutation)
}

fn check_pairs(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<()> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::arg(format!("need equally many points, got {} and {}", xs.len(), ys.len())));
    }
    let d = xs[0].len();
    if xs.iter().chain(ys).any(|v| v.len() != d) {
        return Err(Error::arg("points have inconsistent dimensions"));
    }
    Ok(())
}

/// Outcome of [`is_cyclically_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityCheck {
    pub monotone: bool,
    /// A permutation with strictly larger `Σᵢ ⟨xᵢ, y_σ(i)⟩` than the identity.
    pub witness: Option<Vec<usize>>,
}

/// Decides whether `{(xᵢ, yᵢ)}` is cyclically monotone.
///
/// A permutation of any subset extends to the full index set by fixing the other
/// indices, so it suffices that the identity maximizes `Σᵢ ⟨xᵢ, y_σ(i)⟩` over all
/// `σ`. That is one assignment problem on the cost `−⟨xᵢ, yⱼ⟩`.
pub fn is_cyclically_monotone(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<MonotonicityCheck> {
    check_pairs(xs, ys)?;
    let n = xs.len();
    let mut cost = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            cost[(i, j)] = -dot(&xs[i], &ys[j]);
        }
    }
    let best = hungarian(&cost)?;
    let diagonal: f64 = (0..n).map(|i| cost[(i, i)]).sum();
    let scale: f64 = 1.0 + (0..n).map(|i| cost[(i, i)].abs()).sum::<f64>();
    if best.cost < diagonal - 1e-9 * scale {
        Ok(MonotonicityCheck { monotone: false, witness: Some(best.permutation) })
    } else {
        Ok(MonotonicityCheck { monotone: true, witness: None })
    }
}
