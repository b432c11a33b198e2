//! Finitely supported and Gaussian probability measures on ℝ^d, and the
//! frame-theoretic functionals built from their second-moment matrix.

use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eig, Matrix};

/// Weights within this distance of summing to one are silently renormalized.
pub const WEIGHT_SUM_TOL: f64 = 1e-6;

/// Threshold below which the smallest eigenvalue of a frame operator counts as zero.
pub fn pd_threshold(upper_bound: f64) -> f64 {
    1e-10 * upper_bound.max(1.0)
}

/// A probability measure `Σ αᵢ δ_{φᵢ}`. Duplicate atoms are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::arg("a measure needs at least one atom"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::arg(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].len();
        if dim == 0 {
            return Err(Error::arg("atoms must have dimension at least 1"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.len() != dim {
                return Err(Error::arg(format!("atom {i} has dimension {}, expected {dim}", a.len())));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg(format!("atom {i} has a non-finite coordinate")));
            }
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::arg(format!("weight {i} is negative or non-finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::arg(format!("weights sum to {total}, not 1")));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(DiscreteMeasure { dim, atoms, weights })
    }

    /// Equal weights `1/N` on the given atoms.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Uniform measure on the rows of an analysis matrix.
    pub fn from_analysis(phi: &Matrix) -> Self {
        Self::uniform(phi.to_rows()).expect("matrix rows are finite and nonempty")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// All weights equal to `1/N` within 1e-12.
    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&a| (a - w).abs() <= 1e-12)
    }

    /// N×d matrix whose rows are the atoms.
    pub fn analysis_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.atoms).expect("atoms are validated")
    }

    /// `Σ αᵢ φᵢ`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            for (mk, ak) in m.iter_mut().zip(a) {
                *mk += w * ak;
            }
        }
        m
    }

    /// Same weights, atoms replaced by `f(φᵢ)`.
    pub fn map_atoms(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let atoms = self.atoms.iter().map(|a| f(a)).collect();
        Self::new(atoms, self.weights.clone())
    }

    /// Sums the weights of bitwise-identical atoms, keeping first-occurrence order.
    pub fn merge_duplicates(&self) -> Self {
        let mut atoms: Vec<Vec<f64>> = Vec::with_capacity(self.len());
        let mut weights: Vec<f64> = Vec::with_capacity(self.len());
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            match atoms.iter().position(|b| bitwise_eq(a, b)) {
                Some(k) => weights[k] += w,
                None => {
                    atoms.push(a.clone());
                    weights.push(w);
                }
            }
        }
        DiscreteMeasure { dim: self.dim, atoms, weights }
    }
}

pub(crate) fn bitwise_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// A Gaussian `N(mean, covariance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    mean: Vec<f64>,
    covariance: Matrix,
}

impl GaussianMeasure {
    pub fn new(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        let d = mean.len();
        if covariance.shape() != (d, d) {
            return Err(Error::arg(format!(
                "mean has length {d} but covariance is {:?}",
                covariance.shape()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("mean has a non-finite coordinate"));
        }
        if !covariance.is_symmetric(1e-12) {
            return Err(Error::arg("covariance is not symmetric"));
        }
        let covariance = covariance.symmetrize();
        let spec = sym_eig(&covariance)?;
        if spec.min_real() < -1e-10 * spec.max_real().abs().max(1.0) {
            return Err(Error::arg("covariance is not positive semidefinite"));
        }
        Ok(GaussianMeasure { mean, covariance })
    }

    pub fn centered(covariance: Matrix) -> Result<Self> {
        Self::new(vec![0.0; covariance.rows()], covariance)
    }

    /// Standard normal on ℝ^d.
    pub fn standard(d: usize) -> Self {
        Self::centered(Matrix::identity(d)).expect("identity is a valid covariance")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn is_centered(&self) -> bool {
        self.mean.iter().all(|&m| m == 0.0)
    }
}

/// Frame bounds and second moment of a measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameReport {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub second_moment: f64,
    pub is_frame: bool,
}

impl FrameReport {
    /// Builds a report from a symmetric PSD frame operator.
    pub fn from_operator(s: &Matrix) -> Result<Self> {
        let spec = sym_eig(s)?;
        let upper_bound = spec.max_real().max(0.0);
        let lower_bound = spec.min_real().clamp(0.0, upper_bound);
        let second_moment = s.trace();
        Ok(FrameReport {
            lower_bound,
            upper_bound,
            second_moment,
            is_frame: second_moment.is_finite() && lower_bound > pd_threshold(upper_bound),
        })
    }

    pub fn pd_threshold(&self) -> f64 {
        pd_threshold(self.upper_bound)
    }
}

/// Measures with finite second moments on ℝ^d.
pub trait SecondMoments {
    fn dim(&self) -> usize;

    /// `S_μ = ∫ x xᵀ dμ(x)`.
    fn frame_operator(&self) -> Matrix;

    /// `M₂²(μ) = ∫ ‖x‖² dμ(x)`.
    fn second_moment(&self) -> f64;

    fn frame_report(&self) -> FrameReport {
        FrameReport::from_operator(&self.frame_operator())
            .expect("frame operators are symmetric by construction")
    }
}

impl SecondMoments for DiscreteMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    fn frame_operator(&self) -> Matrix {
        let d = self.dim;
        let mut s = Matrix::zeros(d, d);
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            for k in 0..d {
                let wk = w * a[k];
                for l in k..d {
                    s[(k, l)] += wk * a[l];
                }
            }
        }
        for k in 0..d {
            for l in 0..k {
                s[(k, l)] = s[(l, k)];
            }
        }
        s
    }

    fn second_moment(&self) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(a, w)| w * dot(a, a)).sum()
    }
}

impl SecondMoments for GaussianMeasure {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn frame_operator(&self) -> Matrix {
        &self.covariance + &Matrix::outer(&self.mean, &self.mean)
    }

    fn second_moment(&self) -> f64 {
        self.covariance.trace() + dot(&self.mean, &self.mean)
    }
}

pub fn frame_operator(mu: &impl SecondMoments) -> Matrix {
    mu.frame_operator()
}

pub fn frame_report(mu: &impl SecondMoments) -> FrameReport {
    mu.frame_report()
}

pub fn second_moment(mu: &impl SecondMoments) -> f64 {
    mu.second_moment()
}

/// `T_# μ` for a linear map `T`.
pub fn pushforward_linear(mu: &DiscreteMeasure, t: &Matrix) -> Result<DiscreteMeasure> {
    if t.shape() != (mu.dim(), mu.dim()) {
        return Err(Error::arg(format!(
            "map is {:?} but the measure lives in dimension {}",
            t.shape(),
            mu.dim()
        )));
    }
    mu.map_atoms(|a| t.mul_vec(a))
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn basis_frame_operator() {
        let s = basis(2).frame_operator();
        assert!(close(&s, &Matrix::identity(2).scale(0.5), 1e-15));
        let r = basis(3).frame_report();
        assert!((r.lower_bound - 1.0 / 3.0).abs() < 1e-15 && (r.upper_bound - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.is_frame);
    }

    #[test]
    fn mercedes_benz_is_tight() {
        let s = mercedes_benz().frame_operator();
        assert!(close(&s, &Matrix::identity(2).scale(0.5), 1e-15));
    }

    #[test]
    fn gaussian_frame_operator() {
        let cov = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let g = GaussianMeasure::centered(cov.clone()).unwrap();
        assert_eq!(g.frame_operator(), cov);
        let g = GaussianMeasure::new(vec![1.0, 2.0], cov.clone()).unwrap();
        assert!(close(&g.frame_operator(), &(&cov + &Matrix::outer(&[1.0, 2.0], &[1.0, 2.0])), 0.0));
        assert_eq!(GaussianMeasure::centered(Matrix::from_diag(&[4.0, 1.0])).unwrap().second_moment(), 5.0);
    }

    #[test]
    fn shrinking_gaussians_stay_frames() {
        for n in [1.0, 10.0, 1e3, 1e6] {
            let g = GaussianMeasure::centered(Matrix::identity(3).scale(1.0 / n)).unwrap();
            let r = g.frame_report();
            assert!((r.lower_bound - 1.0 / n).abs() < 1e-15 / n.min(1.0));
            assert!((r.upper_bound - 1.0 / n).abs() < 1e-15);
            assert!(r.is_frame);
        }
    }

    #[test]
    fn degenerate_support() {
        let mu = DiscreteMeasure::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        let r = mu.frame_report();
        assert_eq!(r.lower_bound, 0.0);
        assert!(!r.is_frame);
    }

    #[test]
    fn unit_norm_second_moment() {
        let h = 3f64.sqrt() / 2.0;
        let mu = DiscreteMeasure::new(
            vec![vec![1.0, 0.0], vec![h, 0.5], vec![0.0, 1.0]],
            vec![0.5, 1.0 / 6.0, 1.0 / 3.0],
        )
        .unwrap();
        assert!((mu.second_moment() - 1.0).abs() < 1e-15);
        assert_eq!(basis(2).second_moment(), 1.0);
    }

    #[test]
    fn pushforward() {
        let mu = basis(3);
        assert_eq!(pushforward_linear(&mu, &Matrix::identity(3)).unwrap(), mu);
        let inv = pushforward_linear(&mu, &Matrix::identity(3).scale(3.0)).unwrap();
        assert_eq!(inv.atom(1), &[0.0, 3.0, 0.0]);
        assert_eq!(inv.weights(), mu.weights());
        let zero = pushforward_linear(&mu, &Matrix::zeros(3, 3)).unwrap();
        assert!(!zero.frame_report().is_frame);
        assert!(pushforward_linear(&mu, &Matrix::identity(2)).is_err());
    }

    #[test]
    fn weight_validation() {
        let atoms = vec![vec![1.0], vec![2.0]];
        let mu = DiscreteMeasure::new(atoms.clone(), vec![0.5, 0.5 + 1e-7]).unwrap();
        assert!((mu.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(DiscreteMeasure::new(atoms.clone(), vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(atoms.clone(), vec![1.5, -0.5]).is_err());
        assert!(DiscreteMeasure::new(atoms, vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![1.0], vec![f64::NAN]], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
    }

    #[test]
    fn gaussian_validation() {
        assert!(GaussianMeasure::centered(Matrix::from_diag(&[1.0, -1.0])).is_err());
        let asym = Matrix::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]]).unwrap();
        assert!(GaussianMeasure::centered(asym).is_err());
        assert!(GaussianMeasure::new(vec![0.0], Matrix::identity(2)).is_err());
    }

    #[test]
    fn merging() {
        let mu = DiscreteMeasure::new(vec![vec![1.0], vec![2.0], vec![1.0]], vec![0.25, 0.5, 0.25]).unwrap();
        let m = mu.merge_duplicates();
        assert_eq!(m.atoms(), &[vec![1.0], vec![2.0]]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert_eq!(m.frame_operator(), mu.frame_operator());
    }

    fn rotation(d: usize, angle: f64) -> Matrix {
        let mut q = Matrix::identity(d);
        let (s, c) = angle.sin_cos();
        q[(0, 0)] = c;
        q[(0, 1)] = -s;
        q[(1, 0)] = s;
        q[(1, 1)] = c;
        q
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn frame_operator_is_symmetric_psd(mu in (1usize..5, 1usize..8).prop_flat_map(|(d, n)| measure(d, n))) {
            let s = mu.frame_operator();
            prop_assert!(s.is_symmetric(0.0));
            let spec = sym_eig(&s).unwrap();
            prop_assert!(spec.min_real() >= -1e-12 * (1.0 + spec.max_real()));
            prop_assert!((mu.second_moment() - s.trace()).abs() <= 1e-10 * (1.0 + s.trace()));
        }
    }

    proptest! {
        #[test]
        fn uniform_operator_is_gram(atoms in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..8)) {
            let mu = DiscreteMeasure::uniform(atoms).unwrap();
            let phi = mu.analysis_matrix();
            let gram = phi.transpose().matmul(&phi).scale(1.0 / mu.len() as f64);
            prop_assert!(close(&mu.frame_operator(), &gram, 1e-12));
        }

        #[test]
        fn frame_predicate_is_invariant(
            mu in (2usize..4, 1usize..6).prop_flat_map(|(d, n)| measure(d, n)),
            shift in 0usize..6,
            angle in 0.0f64..std::f64::consts::TAU,
        ) {
            let is_frame = mu.frame_report().is_frame;
            let n = mu.len();
            let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let permuted = DiscreteMeasure::new(
                order.iter().map(|&i| mu.atom(i).to_vec()).collect(),
                order.iter().map(|&i| mu.weights()[i]).collect(),
            ).unwrap();
            prop_assert_eq!(permuted.frame_report().is_frame, is_frame);
            let rotated = pushforward_linear(&mu, &rotation(mu.dim(), angle)).unwrap();
            prop_assert_eq!(rotated.frame_report().is_frame, is_frame);
        }
    }
}
