//! Seeded instance generators shared by the benchmarks.

use pframe::duality::canonical_dual;
use pframe::{DiscreteMeasure, GaussianMeasure, Matrix, SecondMoments};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
}

pub fn measure(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DiscreteMeasure {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    DiscreteMeasure::new(points(rng, n, d), w.iter().map(|x| x / total).collect()).expect("valid measure")
}

/// A frame with `n >= d` atoms and its canonical dual.
pub fn frame_and_dual(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    loop {
        let mu = measure(rng, n, d);
        if mu.frame_report().is_frame {
            let dual = canonical_dual(&mu).expect("frame has a dual");
            return (mu, dual);
        }
    }
}

pub fn cost_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_rows(&points(rng, n, n)).expect("square")
}

pub fn spd(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let b = Matrix::from_rows(&points(rng, d, d)).expect("square");
    &b.matmul(&b.transpose()) + &Matrix::identity(d).scale(0.1)
}

pub fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> GaussianMeasure {
    GaussianMeasure::centered(spd(rng, d)).expect("SPD covariance")
}
