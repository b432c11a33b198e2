//! Dense two-phase primal simplex for `K a = t, a >= 0`.
//!
//! Entering and leaving variables follow Bland's rule, so the method cannot
//! cycle. Phase 1 decides feasibility; when the phase-1 optimum is positive
//! its dual multipliers give a Farkas certificate `y` with `yᵀK >= 0` and
//! `yᵀt < 0`.

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

pub const FEASIBILITY_TOL: f64 = 1e-8;
pub const PIVOT_TOL: f64 = 1e-10;
const NONNEGATIVITY_TOL: f64 = 1e-10;

/// Equality-form program: minimize `cᵀa` subject to `K a = t`, `a >= 0`.
/// Without an objective only feasibility is decided.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    constraints: Matrix,
    rhs: Vec<f64>,
    objective: Option<Vec<f64>>,
}

impl LinearProgram {
    pub fn new(constraints: Matrix, rhs: Vec<f64>, objective: Option<Vec<f64>>) -> Result<Self> {
        if rhs.len() != constraints.rows() {
            return Err(Error::arg(format!(
                "rhs has length {} but the constraint matrix has {} rows",
                rhs.len(),
                constraints.rows()
            )));
        }
        if let Some(c) = &objective {
            if c.len() != constraints.cols() {
                return Err(Error::arg("objective length differs from variable count"));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg("objective entries must be finite"));
            }
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("rhs entries must be finite"));
        }
        Ok(LinearProgram { constraints, rhs, objective })
    }

    pub fn feasibility(constraints: Matrix, rhs: Vec<f64>) -> Result<Self> {
        Self::new(constraints, rhs, None)
    }

    pub fn constraints(&self) -> &Matrix {
        &self.constraints
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn objective(&self) -> Option<&[f64]> {
        self.objective.as_deref()
    }

    /// `max_i |K_i a - t_i|`.
    pub fn residual(&self, a: &[f64]) -> f64 {
        self.constraints
            .mul_vec(a)
            .iter()
            .zip(&self.rhs)
            .fold(0.0, |m, (l, r)| m.max((l - r).abs()))
    }

    fn rhs_scale(&self) -> f64 {
        1.0 + self.rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Checks the Farkas alternative: `yᵀK >= -1e-8` componentwise and `yᵀt <= -1e-8`.
    pub fn certifies_infeasibility(&self, y: &[f64]) -> bool {
        if y.len() != self.rhs.len() {
            return false;
        }
        let k = &self.constraints;
        let row_ok = (0..k.cols()).all(|j| {
            let s: f64 = (0..k.rows()).map(|i| y[i] * k[(i, j)]).sum();
            s >= -FEASIBILITY_TOL
        });
        row_ok && dot(y, &self.rhs) <= -FEASIBILITY_TOL
    }

    fn accepts_solution(&self, a: &[f64]) -> bool {
        a.len() == self.constraints.cols()
            && a.iter().all(|&v| v >= -NONNEGATIVITY_TOL)
            && self.residual(a) <= FEASIBILITY_TOL * self.rhs_scale()
    }
}

/// Result of [`solve_lp`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// A feasible point; optimal for the objective when one was given.
    Feasible { solution: Vec<f64>, objective: Option<f64> },
    /// No nonnegative solution exists; `certificate` is a verified Farkas vector.
    Infeasible { certificate: Vec<f64> },
    /// Feasible, but the objective decreases without bound.
    Unbounded,
}

impl LpOutcome {
    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Feasible { solution, .. } => Some(solution),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Infeasible { certificate } => Some(certificate),
            _ => None,
        }
    }
}

struct Tableau {
    m: usize,
    /// Original variables; artificials occupy columns `n..n + m`.
    n: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
}

enum Pivoting {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.at(row, col);
        for c in 0..w {
            self.t[row * w + c] /= p;
        }
        let pivot_row: Vec<f64> = self.t[row * w..(row + 1) * w].to_vec();
        for r in 0..=self.m {
            if r == row {
                continue;
            }
            let f = self.t[r * w + col];
            if f == 0.0 {
                continue;
            }
            let dst = &mut self.t[r * w..(r + 1) * w];
            for (d, &s) in dst.iter_mut().zip(&pivot_row) {
                *d -= f * s;
            }
            dst[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Bland's rule over columns `0..allowed`; the cost row is row `m`.
    fn run(&mut self, allowed: usize) -> Result<Pivoting> {
        let obj = self.m;
        let rhs = self.rhs_col();
        loop {
            let entering = (0..allowed).find(|&j| self.at(obj, j) < -PIVOT_TOL);
            let Some(col) = entering else {
                return Ok(Pivoting::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, col);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                            if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Ok(Pivoting::Unbounded);
            };
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::numeric(format!(
                    "simplex exceeded {} pivots",
                    self.max_iterations
                )));
            }
            self.pivot(row, col);
        }
    }

    fn drop_row(&mut self, row: usize) {
        let w = self.width;
        self.t.drain(row * w..(row + 1) * w);
        self.basis.remove(row);
        self.m -= 1;
    }
}

/// Solves `K a = t, a >= 0` (minimizing the objective when present).
///
/// Exactly one Farkas alternative is returned, and both are re-validated
/// before returning; a failed validation is reported as a numeric error.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    let k = &lp.constraints;
    let (m, n) = k.shape();
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let mut signs = vec![1.0; m];
    for i in 0..m {
        let s = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        signs[i] = s;
        for j in 0..n {
            t[i * width + j] = s * k[(i, j)];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = s * lp.rhs[i];
    }
    // phase-1 reduced costs: zero cost on originals, unit cost on artificials
    for j in 0..n {
        t[m * width + j] = -(0..m).map(|i| t[i * width + j]).sum::<f64>();
    }
    t[m * width + width - 1] = -(0..m).map(|i| t[i * width + width - 1]).sum::<f64>();

    let mut tab = Tableau {
        m,
        n,
        width,
        t,
        basis: (n..n + m).collect(),
        iterations: 0,
        max_iterations: 200 * (m + n) + 1000,
    };

    if let Pivoting::Unbounded = tab.run(n)? {
        return Err(Error::numeric("phase 1 reported an unbounded ray"));
    }
    let infeasibility = -tab.at(m, width - 1);
    if infeasibility > FEASIBILITY_TOL * lp.rhs_scale() {
        // π_i = 1 - (reduced cost of artificial i); y = -π undoes the row flips
        let mut y: Vec<f64> = (0..m).map(|i| -(1.0 - tab.at(m, n + i)) * signs[i]).collect();
        let scale = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if scale > 0.0 {
            y.iter_mut().for_each(|v| *v /= scale);
        }
        if !lp.certifies_infeasibility(&y) {
            return Err(Error::numeric("phase-1 certificate failed validation"));
        }
        return Ok(LpOutcome::Infeasible { certificate: y });
    }

    // move remaining artificials out of the basis; rows with no pivot are redundant
    let mut row = 0;
    while row < tab.m {
        if tab.basis[row] >= n {
            let col = (0..n)
                .filter(|&j| tab.at(row, j).abs() > 1e-9)
                .max_by(|&a, &b| tab.at(row, a).abs().total_cmp(&tab.at(row, b).abs()));
            match col {
                Some(c) => tab.pivot(row, c),
                None => {
                    tab.drop_row(row);
                    continue;
                }
            }
        }
        row += 1;
    }

    if let Some(c) = &lp.objective {
        let mm = tab.m;
        for j in 0..width {
            let cj = if j < n { c[j] } else { 0.0 };
            let cb: f64 = (0..mm)
                .map(|r| {
                    let b = tab.basis[r];
                    if b < n {
                        c[b] * tab.at(r, j)
                    } else {
                        0.0
                    }
                })
                .sum();
            let val = if j == width - 1 { -cb } else { cj - cb };
            tab.t[mm * width + j] = val;
        }
        if let Pivoting::Unbounded = tab.run(n)? {
            return Ok(LpOutcome::Unbounded);
        }
    }

    let mut solution = vec![0.0; n];
    for r in 0..tab.m {
        let b = tab.basis[r];
        if b < tab.n {
            let v = tab.at(r, width - 1);
            solution[b] = if (-NONNEGATIVITY_TOL..0.0).contains(&v) { 0.0 } else { v };
        }
    }
    if !lp.accepts_solution(&solution) {
        return Err(Error::numeric(format!(
            "simplex solution failed validation (residual {:e})",
            lp.residual(&solution)
        )));
    }
    let objective = lp.objective.as_ref().map(|c| dot(c, &solution));
    Ok(LpOutcome::Feasible { solution, objective })
}
