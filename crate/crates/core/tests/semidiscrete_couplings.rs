mod common;

use common::*;
use pframe::duality::canonical_dual;
use pframe::semidiscrete::{adapt_weights, cell_first_moments, cross_moment, dual_objective, ADAPT_TOL};
use pframe::{DiscreteMeasure, GaussianMeasure, Matrix, PowerDiagram, Reference};
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn one_dimensional_boundaries_match_normal_quantiles() {
    let sites = vec![vec![-2.0], vec![0.0], vec![1.0], vec![3.0]];
    let targets = vec![0.1, 0.4, 0.3, 0.2];
    let c = adapt_weights(sites.clone(), targets.clone(), Reference::standard_gaussian(1).unwrap(), 400_000, 3, 1e-4)
        .unwrap();
    let w = c.diagram.weights();
    let normal = Normal::standard();
    let mut cumulative = 0.0;
    for k in 0..3 {
        cumulative += targets[k];
        // |x − p|² − w(p) = |x − q|² − w(q) solved for x
        let (p, q) = (sites[k][0], sites[k + 1][0]);
        let boundary = (q * q - p * p - (w[k + 1] - w[k])) / (2.0 * (q - p));
        assert!((boundary - normal.inverse_cdf(cumulative)).abs() < 1e-2, "boundary {k}: {boundary}");
    }
}

#[test]
fn many_sites_under_box_and_gaussian_references() {
    let mut rng = rng(31);
    let cases = [
        (2, 6, Reference::uniform_box(vec![-1.0, -2.0], vec![2.0, 1.0]).unwrap()),
        (3, 5, Reference::standard_gaussian(3).unwrap()),
        (2, 8, Reference::gaussian(GaussianMeasure::new(vec![0.5, -1.0], Matrix::from_rows(&[vec![2.0, 0.8], vec![0.8, 1.0]]).unwrap()).unwrap()).unwrap()),
    ];
    for (d, k, reference) in cases {
        let sites: Vec<Vec<f64>> = (0..k).map(|_| gaussian_vec(&mut rng, d)).collect();
        let targets = random_weights(&mut rng, k);
        let c = adapt_weights(sites, targets, reference, 100_000, 5, ADAPT_TOL).unwrap();
        assert!(c.max_error() <= ADAPT_TOL, "d = {d}, k = {k}: {}", c.max_error());
        assert!(c.iterations < 50);
        assert_eq!(c.diagram.weights()[0], 0.0);
    }
}

#[test]
fn adapted_weights_maximize_the_dual_objective() {
    let sites = vec![vec![1.0, 0.0], vec![-0.5, 0.8], vec![-0.5, -0.8]];
    let targets = vec![0.5, 0.3, 0.2];
    let reference = Reference::standard_gaussian(2).unwrap();
    let c = adapt_weights(sites.clone(), targets.clone(), reference.clone(), 100_000, 2, 1e-4).unwrap();
    let samples = reference.sample(100_000, 2).unwrap();
    let best = dual_objective(&c.diagram, &targets, &samples);
    let mut rng = rng(32);
    for _ in 0..20 {
        let step = gaussian_vec(&mut rng, 3);
        let w: Vec<f64> = c.diagram.weights().iter().zip(&step).map(|(w, s)| w + 0.05 * s).collect();
        let other = PowerDiagram::new(sites.clone(), w, reference.clone()).unwrap();
        assert!(dual_objective(&other, &targets, &samples) <= best + 1e-9);
    }
}

/// With `f(pᵢ) = φᵢ` and `mᵢ = ∫_{cell i} x dη`, the coupling `(ι, f ∘ T)_# η` has cross
/// moment `Σᵢ mᵢφᵢᵀ`; it is the identity exactly when `{φᵢ}` is dual to the cell moments.
#[test]
fn cell_moment_duals_make_the_reference_a_transport_dual() {
    let sites = vec![vec![1.0, 0.0], vec![-0.5, 0.9], vec![-0.5, -0.9], vec![0.2, 0.1]];
    let targets = vec![0.3, 0.25, 0.25, 0.2];
    let reference = Reference::standard_gaussian(2).unwrap();
    let c = adapt_weights(sites.clone(), targets.clone(), reference, 200_000, 8, ADAPT_TOL).unwrap();
    let samples = c.diagram.reference().sample(200_000, 8).unwrap();
    let moments = cell_first_moments(&c.diagram, &samples);

    // canonical dual of the unit-weight frame {mᵢ}: φᵢ = (Σ mⱼmⱼᵀ)⁻¹ mᵢ
    let scaled = DiscreteMeasure::uniform(moments.clone()).unwrap();
    let n = moments.len() as f64;
    let phi: Vec<Vec<f64>> = canonical_dual(&scaled).unwrap().atoms().iter().map(|a| a.iter().map(|x| x / n).collect()).collect();
    let m = cross_moment(&c.diagram, &phi, &samples).unwrap();
    assert!((&m - &Matrix::identity(2)).max_abs() < 1e-10);

    // on fresh samples the identity holds up to Monte Carlo error
    let fresh = c.diagram.reference().sample(200_000, 99).unwrap();
    let m = cross_moment(&c.diagram, &phi, &fresh).unwrap();
    assert!((&m - &Matrix::identity(2)).max_abs() < 5e-2);

    // a dual of the sites themselves is not enough: the cell moments differ from the sites
    let psi = canonical_dual(&DiscreteMeasure::uniform(sites).unwrap()).unwrap();
    let m = cross_moment(&c.diagram, psi.atoms(), &samples).unwrap();
    assert!((&m - &Matrix::identity(2)).max_abs() > 0.1);
}
