//! Semi-discrete transport from an absolutely continuous reference `η` onto a
//! finitely supported measure, through power (Laguerre) diagrams.
//!
//! Cell masses are Monte Carlo estimates over one fixed sample set per run
//! (common random numbers), so every quantity is a deterministic function of
//! the seed. Per-sample work runs on rayon over fixed chunks and the partial
//! sums are combined in chunk order, which keeps results bitwise reproducible.

use std::hash::{Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, solve, sqrt_psd, Matrix};
use crate::measures::GaussianMeasure;

pub const DEFAULT_SAMPLES: usize = 200_000;
pub const ADAPT_TOL: f64 = 1e-3;
pub const MAX_REFERENCE_DIM: usize = 3;
const MAX_ITERATIONS: usize = 200;
const CHUNK: usize = 4096;

/// The absolutely continuous reference measure `η`.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Gaussian(GaussianMeasure),
    /// Uniform on `[lower, upper]`; unlike a Gaussian its support is not all of ℝ^d.
    UniformBox { lower: Vec<f64>, upper: Vec<f64> },
}

impl Reference {
    pub fn standard_gaussian(d: usize) -> Result<Self> {
        Self::gaussian(GaussianMeasure::standard(d))
    }

    pub fn gaussian(g: GaussianMeasure) -> Result<Self> {
        let r = Reference::Gaussian(g);
        r.validate()?;
        Ok(r)
    }

    pub fn uniform_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let r = Reference::UniformBox { lower, upper };
        r.validate()?;
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        match self {
            Reference::Gaussian(g) => g.dim(),
            Reference::UniformBox { lower, .. } => lower.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > MAX_REFERENCE_DIM {
            return Err(Error::arg(format!("reference dimension must be 1..={MAX_REFERENCE_DIM}, got {d}")));
        }
        match self {
            Reference::Gaussian(g) => {
                let spec = crate::linalg::sym_eig(g.covariance())?;
                if spec.min_real() <= 1e-12 * spec.max_real().max(1.0) {
                    return Err(Error::arg("reference covariance must be positive definite"));
                }
            }
            Reference::UniformBox { lower, upper } => {
                if upper.len() != d || lower.iter().zip(upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u)) {
                    return Err(Error::arg("box needs finite bounds with lower < upper"));
                }
            }
        }
        Ok(())
    }

    /// Draws `n` points with `ChaCha8Rng::seed_from_u64(seed)`.
    ///
    /// Samples come in antithetic pairs (`s` and its reflection through the
    /// centre), so the set is exactly symmetric about the mean.
    pub fn sample(&self, n: usize, seed: u64) -> Result<ReferenceSamples> {
        if n == 0 {
            return Err(Error::arg("sample count must be positive"));
        }
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(n * d);
        match self {
            Reference::Gaussian(g) => {
                let root = sqrt_psd(g.covariance())?;
                let mean = g.mean();
                while points.len() < n * d {
                    let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let rz = root.mul_vec(&z);
                    for sign in [1.0, -1.0] {
                        if points.len() < n * d {
                            points.extend(mean.iter().zip(&rz).map(|(m, r)| m + sign * r));
                        }
                    }
                }
            }
            Reference::UniformBox { lower, upper } => {
                let unit = Uniform::new(0.0, 1.0).expect("valid range");
                while points.len() < n * d {
                    let u: Vec<f64> = (0..d).map(|_| unit.sample(&mut rng)).collect();
                    for flip in [false, true] {
                        if points.len() < n * d {
                            points.extend((0..d).map(|k| {
                                let v = if flip { 1.0 - u[k] } else { u[k] };
                                lower[k] + v * (upper[k] - lower[k])
                            }));
                        }
                    }
                }
            }
        }
        let mut h = std::collections::hash_map::DefaultHasher::new();
        (seed, n, d).hash(&mut h);
        for x in &points {
            x.to_bits().hash(&mut h);
        }
        Ok(ReferenceSamples { dim: d, points, seed, fingerprint: h.finish() })
    }
}

/// A fixed Monte Carlo sample of the reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSamples {
    dim: usize,
    points: Vec<f64>,
    seed: u64,
    fingerprint: u64,
}

impl ReferenceSamples {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    /// Identifies the sample set; sampled functions carry it to catch mix-ups.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn chunks(&self) -> impl IndexedParallelIterator<Item = &[f64]> {
        self.points.par_chunks(CHUNK * self.dim)
    }
}

/// Sites `P` with weights `w`; the cell of `p` is where `‖x − p‖² − w(p)` is smallest.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDiagram {
    sites: Vec<Vec<f64>>,
    weights: Vec<f64>,
    reference: Reference,
}

impl PowerDiagram {
    pub fn new(sites: Vec<Vec<f64>>, weights: Vec<f64>, reference: Reference) -> Result<Self> {
        if sites.is_empty() || sites.len() != weights.len() {
            return Err(Error::arg("need one weight per site and at least one site"));
        }
        let d = reference.dim();
        if sites.iter().any(|s| s.len() != d || s.iter().any(|x| !x.is_finite())) {
            return Err(Error::arg(format!("sites must be finite points of dimension {d}")));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::arg("weights must be finite"));
        }
        for i in 0..sites.len() {
            if sites[..i].contains(&sites[i]) {
                return Err(Error::arg(format!("site {i} repeats an earlier site")));
            }
        }
        Ok(PowerDiagram { sites, weights, reference })
    }

    pub fn sites(&self) -> &[Vec<f64>] {
        &self.sites
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// `T_P^w(x)`: index of the minimizing site, lowest index on ties.
    pub fn voronoi_map(&self, x: &[f64]) -> usize {
        self.best_two(x).0
    }

    /// (best site, its power, second-best site, its power).
    fn best_two(&self, x: &[f64]) -> (usize, f64, usize, f64) {
        let (mut b, mut fb) = (0, f64::INFINITY);
        let (mut s, mut fs) = (0, f64::INFINITY);
        for (p, (site, w)) in self.sites.iter().zip(&self.weights).enumerate() {
            let f = dist_sq(x, site) - w;
            if f < fb {
                (s, fs) = (b, fb);
                (b, fb) = (p, f);
            } else if f < fs {
                (s, fs) = (p, f);
            }
        }
        (b, fb, s, fs)
    }

    /// Cell index of every sample.
    pub fn cells(&self, samples: &ReferenceSamples) -> Vec<usize> {
        let d = samples.dim();
        samples
            .chunks()
            .flat_map_iter(|c| c.chunks(d).map(|x| self.voronoi_map(x)))
            .collect()
    }

    /// Monte Carlo estimate of `η(Vor(p))` for every site.
    pub fn cell_masses(&self, samples: &ReferenceSamples) -> Vec<f64> {
        let n = samples.len() as f64;
        counts(&self.cells(samples), self.len()).into_iter().map(|c| c as f64 / n).collect()
    }
}

fn counts(cells: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0; k];
    for &i in cells {
        c[i] += 1;
    }
    c
}

/// Per-chunk reduction combined in chunk order.
fn ordered_sum<T: Send>(
    samples: &ReferenceSamples,
    init: impl Fn() -> T + Sync,
    fold: impl Fn(&mut T, &[f64]) + Sync,
    combine: impl Fn(&mut T, T),
) -> T {
    let d = samples.dim();
    let parts: Vec<T> = samples
        .chunks()
        .map(|c| {
            let mut acc = init();
            for x in c.chunks(d) {
                fold(&mut acc, x);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in parts {
        combine(&mut total, p);
    }
    total
}

/// Monte Carlo estimate of the semi-discrete dual
/// `F(w) = Σ λ_p w(p) + E_η[min_p (‖X − p‖² − w(p))]`, concave in `w` with
/// gradient `λ_p − η(Vor(p))`.
pub fn dual_objective(diagram: &PowerDiagram, targets: &[f64], samples: &ReferenceSamples) -> f64 {
    let total = ordered_sum(
        samples,
        || 0.0,
        |acc, x| *acc += diagram.best_two(x).1,
        |a, b| *a += b,
    );
    dot(targets, &diagram.weights) + total / samples.len() as f64
}

/// A power diagram whose cell masses match prescribed targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiDiscreteCoupling {
    pub diagram: PowerDiagram,
    pub targets: Vec<f64>,
    pub achieved: Vec<f64>,
    pub sample_count: usize,
    pub seed: u64,
    pub iterations: usize,
}

impl SemiDiscreteCoupling {
    pub fn max_error(&self) -> f64 {
        max_error(&self.achieved, &self.targets)
    }
}

fn max_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct Linearization {
    masses: Vec<f64>,
    /// Graph Laplacian of the boundary flux: `−∂ mass / ∂ w`.
    laplacian: Matrix,
}

fn linearize(diagram: &PowerDiagram, samples: &ReferenceSamples) -> Linearization {
    let k = diagram.len();
    let d = samples.dim();
    let n = samples.len();
    let gaps_and_cells: Vec<(usize, usize, f64)> = samples
        .chunks()
        .flat_map_iter(|c| {
            c.chunks(d).map(|x| {
                let (b, fb, s, fs) = diagram.best_two(x);
                (b, s, fs - fb)
            })
        })
        .collect();
    let mut count = vec![0usize; k];
    for &(b, _, _) in &gaps_and_cells {
        count[b] += 1;
    }
    let masses = count.iter().map(|&c| c as f64 / n as f64).collect();
    let mut laplacian = Matrix::zeros(k, k);
    if k > 1 {
        // band width: 5% quantile of the gap between best and second-best power
        let mut gaps: Vec<f64> = gaps_and_cells.iter().map(|g| g.2).collect();
        let q = (gaps.len() / 20).min(gaps.len() - 1);
        let delta = *gaps.select_nth_unstable_by(q, f64::total_cmp).1;
        let delta = delta.max(1e-12);
        for &(b, s, g) in &gaps_and_cells {
            if g <= delta {
                let flux = 1.0 / (2.0 * n as f64 * delta);
                laplacian[(b, s)] -= flux;
                laplacian[(s, b)] -= flux;
                laplacian[(b, b)] += flux;
                laplacian[(s, s)] += flux;
            }
        }
    }
    Linearization { masses, laplacian }
}

/// Finds power weights whose cells carry the target masses under the reference.
///
/// Solves `∇F(w) = 0` by damped Newton steps: the Jacobian of the cell masses is
/// estimated from samples near cell boundaries, and steps are halved until the
/// largest mass error decreases. The gauge is `w(p₁) = 0`.
pub fn adapt_weights(
    sites: Vec<Vec<f64>>,
    targets: Vec<f64>,
    reference: Reference,
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<SemiDiscreteCoupling> {
    let k = sites.len();
    let targets = normalize_targets(targets, k)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::arg("tolerance must be positive"));
    }
    let samples = reference.sample(sample_count, seed)?;
    let mut diagram = PowerDiagram::new(sites, vec![0.0; k], reference)?;
    let mut lin = linearize(&diagram, &samples);
    let mut err = max_error(&lin.masses, &targets);
    let mut best = (err, diagram.weights.clone(), lin.masses.clone());
    let mut iterations = 0;
    while err > tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::AdaptationStalled { iterations, max_error: best.0, weights: best.1 });
        }
        iterations += 1;
        let residual: Vec<f64> = targets.iter().zip(&lin.masses).map(|(t, m)| t - m).collect();
        let step = newton_step(&lin.laplacian, &residual)?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = diagram.weights.iter().zip(&step).map(|(w, s)| w + scale * s).collect();
            let candidate = PowerDiagram { weights: trial, ..diagram.clone() };
            let trial_lin = linearize(&candidate, &samples);
            let trial_err = max_error(&trial_lin.masses, &targets);
            if trial_err < err {
                diagram = candidate;
                lin = trial_lin;
                err = trial_err;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::AdaptationStalled { iterations, max_error: best.0, weights: best.1 });
        }
        if err < best.0 {
            best = (err, diagram.weights.clone(), lin.masses.clone());
        }
    }
    Ok(SemiDiscreteCoupling {
        diagram,
        targets,
        achieved: lin.masses,
        sample_count,
        seed,
        iterations,
    })
}

fn normalize_targets(targets: Vec<f64>, k: usize) -> Result<Vec<f64>> {
    if targets.len() != k {
        return Err(Error::arg(format!("{} targets for {k} sites", targets.len())));
    }
    if targets.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::arg("targets must be positive"));
    }
    let total: f64 = targets.iter().sum();
    if (total - 1.0).abs() > crate::measures::WEIGHT_SUM_TOL {
        return Err(Error::arg(format!("targets sum to {total}, not 1")));
    }
    Ok(targets.into_iter().map(|t| t / total).collect())
}

/// Solves `L Δw = r` on the weights after the first, with a small ridge for
/// cells that share no sampled boundary.
fn newton_step(laplacian: &Matrix, residual: &[f64]) -> Result<Vec<f64>> {
    let k = residual.len();
    let mut step = vec![0.0; k];
    if k == 1 {
        return Ok(step);
    }
    let scale = (1..k).map(|i| laplacian[(i, i)]).fold(0.0, f64::max).max(1e-3);
    let mut reduced = Matrix::zeros(k - 1, k - 1);
    for i in 1..k {
        for j in 1..k {
            reduced[(i - 1, j - 1)] = laplacian[(i, j)];
        }
        reduced[(i - 1, i - 1)] += 1e-6 * scale;
    }
    let sol = solve(&reduced, &residual[1..])?;
    step[1..].copy_from_slice(&sol);
    Ok(step)
}

/// Values of a function on a fixed reference sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub values: Vec<f64>,
    pub fingerprint: u64,
}

fn check_site_map(diagram: &PowerDiagram, site_map: &[Vec<f64>]) -> Result<()> {
    if site_map.len() != diagram.len() {
        return Err(Error::arg(format!("site map has {} entries for {} sites", site_map.len(), diagram.len())));
    }
    let d = site_map[0].len();
    if d == 0 || site_map.iter().any(|v| v.len() != d) {
        return Err(Error::arg("site map vectors must share a nonzero dimension"));
    }
    Ok(())
}

/// Analysis against a site map `f_Φ`: `s ↦ ⟨x, f_Φ(T(s))⟩` on every sample.
pub fn analysis(
    x: &[f64],
    diagram: &PowerDiagram,
    site_map: &[Vec<f64>],
    samples: &ReferenceSamples,
) -> Result<SampledFunction> {
    check_site_map(diagram, site_map)?;
    if x.len() != site_map[0].len() {
        return Err(Error::arg("vector and site map dimensions differ"));
    }
    let coeffs: Vec<f64> = site_map.iter().map(|phi| dot(x, phi)).collect();
    let values = diagram.cells(samples).into_iter().map(|c| coeffs[c]).collect();
    Ok(SampledFunction { values, fingerprint: samples.fingerprint() })
}

/// Synthesis against a site map `f_Ψ`: the sample mean of `f(s) f_Ψ(T(s))`.
pub fn synthesis(
    f: &SampledFunction,
    diagram: &PowerDiagram,
    site_map: &[Vec<f64>],
    samples: &ReferenceSamples,
) -> Result<Vec<f64>> {
    check_site_map(diagram, site_map)?;
    if f.fingerprint != samples.fingerprint() || f.values.len() != samples.len() {
        return Err(Error::arg("function was sampled on a different reference sample set"));
    }
    let cells = diagram.cells(samples);
    // accumulate per cell first; fewer rounding steps and no per-sample vectors
    let mut per_cell = vec![0.0; diagram.len()];
    for (c, v) in cells.iter().zip(&f.values) {
        per_cell[*c] += v;
    }
    let n = samples.len() as f64;
    let mut out = vec![0.0; site_map[0].len()];
    for (s, psi) in per_cell.iter().zip(site_map) {
        for (o, p) in out.iter_mut().zip(psi) {
            *o += s * p / n;
        }
    }
    Ok(out)
}

/// `E_η[X 1_{Vor(p)}(X)]` for every site.
pub fn cell_first_moments(diagram: &PowerDiagram, samples: &ReferenceSamples) -> Vec<Vec<f64>> {
    let k = diagram.len();
    let d = samples.dim();
    let sums = ordered_sum(
        samples,
        || vec![0.0; k * d],
        |acc, x| {
            let c = diagram.voronoi_map(x);
            for (a, xi) in acc[c * d..(c + 1) * d].iter_mut().zip(x) {
                *a += xi;
            }
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    );
    let n = samples.len() as f64;
    sums.chunks(d).map(|c| c.iter().map(|v| v / n).collect()).collect()
}

/// `∫ x f(T(x))ᵀ dη`, the cross moment of the coupling `(ι, f ∘ T)_# η`.
pub fn cross_moment(diagram: &PowerDiagram, site_map: &[Vec<f64>], samples: &ReferenceSamples) -> Result<Matrix> {
    check_site_map(diagram, site_map)?;
    let moments = cell_first_moments(diagram, samples);
    let mut m = Matrix::zeros(samples.dim(), site_map[0].len());
    for (c, f) in moments.iter().zip(site_map) {
        m = &m + &Matrix::outer(c, f);
    }
    Ok(m)
}
