//! Benchmark correctness: declared optima, purity, embeddings and rotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ras_core::benchmarks::*;

fn all_objectives() -> Vec<Box<dyn Objective>> {
    vec![
        Box::new(rosenbrock(2).unwrap()),
        Box::new(rosenbrock(6).unwrap()),
        Box::new(paraboloid(100).unwrap()),
        Box::new(branin2()),
        Box::new(hartmann6()),
        by_name("branin2-500").unwrap(),
        Box::new(
            embed(
                hartmann6(),
                EmbeddingSpec::axis_aligned(40, vec![3, 9, 11, 20, 30, 39]).unwrap(),
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn optima_are_consistent_and_unbeaten() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for f in all_objectives() {
        let opt = f
            .optimum()
            .unwrap_or_else(|| panic!("{} has no optimum", f.name()));
        assert!(f.bounds().contains(&opt.point), "{}", f.name());
        assert!(
            (f.evaluate(&opt.point) - opt.value).abs() < 1e-9,
            "{}",
            f.name()
        );
        for _ in 0..10_000 {
            let x = f.bounds().sample_uniform(&mut rng);
            let v = f.evaluate(&x);
            assert!(v >= opt.value - 1e-9, "{} beaten at {x:?}", f.name());
            assert_eq!(v.to_bits(), f.evaluate(&x).to_bits());
        }
    }
}

#[test]
fn hartmann_probe() {
    let f = hartmann6();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1_000_000 {
        let x: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
        let v = f.evaluate(&x);
        assert!(v < 0.0);
        assert!(v >= -3.32237 - 1e-5);
    }
}

/// Compass search with halving steps; used as an independent local-descent
/// oracle.
fn compass_descent(f: &dyn Objective, mut x: Vec<f64>, mut step: f64) -> (Vec<f64>, f64) {
    let mut fx = f.evaluate(&x);
    while step > 1e-10 {
        let mut improved = false;
        for i in 0..x.len() {
            for s in [step, -step] {
                let mut y = x.clone();
                y[i] += s;
                let fy = f.evaluate(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

#[test]
fn hartmann_minimizer_survives_local_descent() {
    let f = hartmann6();
    let (x, v) = compass_descent(&f, HARTMANN6_MINIMIZER.to_vec(), 1e-3);
    assert!((v - HARTMANN6_MIN_VALUE).abs() < 1e-9);
    assert!(x
        .iter()
        .zip(HARTMANN6_MINIMIZER)
        .all(|(a, b)| (a - b).abs() < 1e-5));
    assert!((v - -3.32237).abs() < 1e-5);
    let local = [
        0.404_653, 0.882_445, 0.846_102, 0.573_990, 0.138_927, 0.038_496,
    ];
    let (_, lv) = compass_descent(&f, local.to_vec(), 1e-3);
    assert!((lv - HARTMANN6_LOCAL_MIN).abs() < 1e-8);
}

#[test]
fn rotated_hartmann_minimum_is_reachable() {
    let emb = embed(
        hartmann6(),
        EmbeddingSpec::rotated(30, vec![0, 5, 7, 12, 20, 29], 3).unwrap(),
    )
    .unwrap();
    let start = emb.ambient_preimage(&HARTMANN6_MINIMIZER);
    assert!(emb.bounds().contains(&start));
    // Start the descent slightly off the back-rotated minimizer.
    let perturbed: Vec<f64> = start
        .iter()
        .enumerate()
        .map(|(i, v)| v + 1e-3 * ((i % 3) as f64 - 1.0))
        .collect();
    let (_, v) = compass_descent(&emb, perturbed, 1e-3);
    assert!((v - -3.32237).abs() < 1e-4, "{v}");
}

#[test]
fn inactive_coordinates_do_not_matter() {
    let f = by_name("branin2-500").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = f.bounds().sample_uniform(&mut rng);
    let base = f.evaluate(&x);
    for i in [2, 3, 250, 499] {
        let mut y = x.clone();
        y[i] = -y[i] * 0.5 + 0.3;
        assert_eq!(f.evaluate(&y), base);
    }
}

/// On a grid, the identity embedding attains exactly the base function's
/// values at the affinely corresponding points.
#[test]
fn identity_embedding_preserves_attained_values() {
    let base = branin2();
    let emb = embed(
        branin2(),
        EmbeddingSpec::axis_aligned(5, vec![3, 1]).unwrap(),
    )
    .unwrap();
    let n = 41;
    let (mut bmin, mut bmax, mut emin, mut emax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            let b = base.evaluate(&[-5.0 + 15.0 * u, 15.0 * v]);
            let e = emb.evaluate(&[0.9, 2.0 * v - 1.0, -0.4, 2.0 * u - 1.0, 0.0]);
            assert!((b - e).abs() < 1e-12 * b.abs().max(1.0));
            bmin = bmin.min(b);
            bmax = bmax.max(b);
            emin = emin.min(e);
            emax = emax.max(e);
        }
    }
    assert!((bmin - emin).abs() < 1e-12 && (bmax - emax).abs() < 1e-9);
}

#[test]
fn rotations_are_isometries() {
    let q = random_rotation(64, 77).unwrap();
    assert!(q.orthogonality_error() < 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let x: Vec<f64> = (0..64).map(|_| rng.random::<f64>() - 0.5).collect();
        let n0: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n1: f64 = q.apply(&x).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n0 - n1).abs() < 1e-10);
        let back = q.apply_transpose(&q.apply(&x));
        assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

#[test]
fn registry_rotation_is_orthogonal() {
    let spec = EmbeddingSpec::rotated(500, (0..6).collect(), REGISTRY_ROTATION_SEED).unwrap();
    assert!(spec.rotation.as_ref().unwrap().orthogonality_error() < 1e-10);
}
