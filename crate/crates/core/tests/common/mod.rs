#![allow(dead_code)]

use pframe::duality::canonical_dual;
use pframe::{DiscreteMeasure, Matrix, SecondMoments};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn unit_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let v = gaussian_vec(rng, d);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

pub fn random_measure(rng: &mut ChaCha8Rng, d: usize, n: usize) -> DiscreteMeasure {
    let atoms = (0..n).map(|_| gaussian_vec(rng, d)).collect();
    DiscreteMeasure::new(atoms, random_weights(rng, n)).unwrap()
}

/// A random frame with `d <= max_d` and `d <= N <= max_n` atoms, rejecting poorly conditioned draws.
pub fn random_frame(rng: &mut ChaCha8Rng, max_d: usize, max_n: usize) -> DiscreteMeasure {
    loop {
        let d = rng.random_range(1..=max_d);
        let n = rng.random_range(d..=max_n);
        let mu = random_measure(rng, d, n);
        let r = mu.frame_report();
        if r.is_frame && r.upper_bound / r.lower_bound < 1e4 {
            return mu;
        }
    }
}

pub fn frame_and_dual(rng: &mut ChaCha8Rng, max_d: usize, max_n: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let mu = random_frame(rng, max_d, max_n);
    let dual = canonical_dual(&mu).unwrap();
    (mu, dual)
}

pub fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let b = Matrix::from_rows(&(0..d).map(|_| gaussian_vec(rng, d)).collect::<Vec<_>>()).unwrap();
    &(&b * &b.transpose()) + &Matrix::identity(d).scale(0.1)
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let s = random_spd(rng, d);
    pframe::linalg::sym_eig(&s).unwrap().eigenvectors.unwrap()
}

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// A feasible coupling of `a` and `b`: north-west corner rule on shuffled row and column orders.
pub fn shuffled_northwest(rng: &mut ChaCha8Rng, a: &[f64], b: &[f64]) -> Matrix {
    let mut rows: Vec<usize> = (0..a.len()).collect();
    let mut cols: Vec<usize> = (0..b.len()).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let mut p = Matrix::zeros(a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    while i < rows.len() && j < cols.len() {
        let (r, c) = (rows[i], cols[j]);
        let m = ra[r].min(rb[c]);
        p[(r, c)] += m;
        ra[r] -= m;
        rb[c] -= m;
        if ra[r] <= rb[c] {
            i += 1;
        } else {
            j += 1;
        }
    }
    p
}
