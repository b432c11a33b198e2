//! Transport duality decided by the simplex solver versus brute-force enumeration
//! of basic solutions of the same linear system.

mod common;

use common::*;
use pframe::duality::{find_transport_dual, psi_h_dual};
use pframe::linalg::solve;
use pframe::{DiscreteMeasure, Matrix, SecondMoments};
use rand::Rng;

/// Rows: `ΦᵀAΨ = I` entrywise, then row sums `= α`, then column sums `= β`.
fn system(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> (Matrix, Vec<f64>) {
    let (n, m, d) = (mu.len(), nu.len(), mu.dim());
    let mut k = Matrix::zeros(d * d + n + m, n * m);
    let mut t = vec![0.0; d * d + n + m];
    for a in 0..d {
        for b in 0..d {
            let r = a * d + b;
            for i in 0..n {
                for j in 0..m {
                    k[(r, i * m + j)] = mu.atom(i)[a] * nu.atom(j)[b];
                }
            }
            t[r] = if a == b { 1.0 } else { 0.0 };
        }
    }
    for i in 0..n {
        for j in 0..m {
            k[(d * d + i, i * m + j)] = 1.0;
            k[(d * d + n + j, i * m + j)] = 1.0;
        }
        t[d * d + i] = mu.weights()[i];
    }
    for j in 0..m {
        t[d * d + n + j] = nu.weights()[j];
    }
    (k, t)
}

/// A nonnegative solution exists iff one is supported on linearly independent columns,
/// so it suffices to try every column subset.
fn feasible_by_enumeration(k: &Matrix, t: &[f64]) -> bool {
    let (rows, cols) = k.shape();
    let scale = 1.0 + t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (1u32..1 << cols).any(|mask| {
        let support: Vec<usize> = (0..cols).filter(|j| mask >> j & 1 == 1).collect();
        if support.len() > rows {
            return false;
        }
        let b = Matrix::from_rows(&(0..rows).map(|r| support.iter().map(|&j| k[(r, j)]).collect()).collect::<Vec<_>>())
            .unwrap();
        let bt = b.transpose();
        let Ok(x) = solve(&bt.matmul(&b), &bt.mul_vec(t)) else { return false };
        let residual = b.mul_vec(&x).iter().zip(t).fold(0.0_f64, |m, (l, r)| m.max((l - r).abs()));
        x.iter().all(|&v| v >= -1e-10) && residual <= 1e-9 * scale
    })
}

fn frame_in_plane(rng: &mut rand_chacha::ChaCha8Rng) -> DiscreteMeasure {
    loop {
        let n = rng.random_range(2..=3);
        let mu = random_measure(rng, 2, n);
        if mu.frame_report().lower_bound > 1e-2 {
            return mu;
        }
    }
}

#[test]
fn solver_agrees_with_enumeration() {
    let mut rng = rng(21);
    let (mut duals, mut non_duals) = (0, 0);
    for trial in 0..300 {
        let mu = frame_in_plane(&mut rng);
        let nu = match trial % 3 {
            0 => {
                let h: Vec<Vec<f64>> = (0..mu.len()).map(|_| gaussian_vec(&mut rng, 2)).collect();
                psi_h_dual(&mu, &h).unwrap()
            }
            _ => {
                let m = rng.random_range(1..=3);
                let scale = rng.random_range(0.5..3.0);
                random_measure(&mut rng, 2, m).map_atoms(|a| a.iter().map(|x| x * scale).collect()).unwrap()
            }
        };
        let (k, t) = system(&mu, &nu);
        let expected = feasible_by_enumeration(&k, &t);
        let outcome = find_transport_dual(&mu, &nu).unwrap();
        assert_eq!(outcome.is_dual(), expected, "trial {trial}: {mu:?} vs {nu:?}");
        if expected {
            duals += 1;
        } else {
            assert!(outcome.certificate().unwrap().validate(&mu, &nu));
            non_duals += 1;
        }
    }
    assert!(duals >= 100 && non_duals >= 50, "{duals} duals, {non_duals} non-duals");
}
