//! Cross-checks against independent oracles: dense linear algebra from
//! nalgebra and Bessel functions from their integral representation.

use insulation_core::eigen::{smallest_eigenpair, solve_spd, EigenOptions, InnerSolver};
use insulation_core::fem::{assemble_boundary_mass, Discretization};
use insulation_core::mesh::{build_mesh, DomainSpec};
use insulation_core::quad::adaptive_gauss;
use insulation_core::spectra::{bessel_j, bessel_j1_prime, j0_first_zero, j1_prime_first_zero};
use insulation_core::SparseSymMatrix;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn dense(a: &SparseSymMatrix<f64>) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_fn(n, n, |i, j| a.get(i, j))
}

/// Smallest eigenvalue of `A u = λ M u` via `L⁻¹ A L⁻ᵀ` with `M = L Lᵀ`.
fn dense_smallest(a: &SparseSymMatrix<f64>, m: &SparseSymMatrix<f64>) -> f64 {
    let l = dense(m).cholesky().expect("mass matrix is SPD").l();
    let li = l.clone().try_inverse().unwrap();
    let c = &li * dense(a) * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    SymmetricEigen::new(c).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn cg_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 50;
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let spd = &b * b.transpose() + DMatrix::identity(n, n) * n as f64;
    let trip = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).map(|(i, j)| (i, j, spd[(i, j)]));
    let a = SparseSymMatrix::from_triplets(n, trip.collect::<Vec<_>>());
    let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = solve_spd(&a, &rhs, 1e-13).unwrap();
    let exact = spd.lu().solve(&DVector::from_vec(rhs)).unwrap();
    for i in 0..n {
        assert!((x[i] - exact[i]).abs() < 1e-10);
    }
}

#[test]
fn inverse_iteration_matches_full_spectrum() {
    let disc = Discretization::new(build_mesh(&DomainSpec::<f64>::disk(1.0, 0.2)).unwrap()).unwrap();
    assert!(disc.mesh.num_vertices() <= 200);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for beta in [0.5, 3.0, 20.0] {
        let w: Vec<f64> = (0..disc.mesh.num_boundary()).map(|_| beta * rng.gen_range(0.2..1.0)).collect();
        let a = disc.stiffness.add(&assemble_boundary_mass(&disc.mesh, &w).unwrap());
        let oracle = dense_smallest(&a, &disc.mass);
        for inner in [InnerSolver::Direct, InnerSolver::Cg] {
            let opts = EigenOptions { inner, ..EigenOptions::default() };
            let pair = smallest_eigenpair(&a, &disc.mass, &opts).unwrap();
            assert!((pair.lambda - oracle).abs() <= 1e-8 * oracle, "{inner:?}: {} vs {oracle}", pair.lambda);
        }
    }
}

#[test]
fn polygon_eigenvalue_matches_dense() {
    let disc = Discretization::new(build_mesh(&DomainSpec::<f64>::regular_polygon(5, 1.0, 0.25)).unwrap()).unwrap();
    let w = vec![2.0; disc.mesh.num_boundary()];
    let a = disc.stiffness.add(&assemble_boundary_mass(&disc.mesh, &w).unwrap());
    let oracle = dense_smallest(&a, &disc.mass);
    let pair = smallest_eigenpair(&a, &disc.mass, &EigenOptions::default()).unwrap();
    assert!((pair.lambda - oracle).abs() <= 1e-8 * oracle);
}

fn bessel_integral(n: u32, x: f64) -> f64 {
    // J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ, composite 5-point Gauss
    let panels = 400;
    let w = PI / panels as f64;
    (0..panels)
        .map(|p| {
            let a = p as f64 * w;
            adaptive_gauss(&|t: f64| [(n as f64 * t - x * t.sin()).cos()], a, a + w, 1.0)[0]
        })
        .sum::<f64>()
        / PI
}

#[test]
fn bessel_against_integral_representation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut xs: Vec<f64> = (0..60).map(|_| rng.gen_range(0.0..50.0)).collect();
    xs.extend([0.0, 1.0, 11.999, 12.0, 12.001, 30.0, 50.0]);
    for x in xs {
        for n in 0..2 {
            let got = bessel_j(n, x).unwrap();
            let want = bessel_integral(n, x);
            assert!((got - want).abs() < 1e-12, "J{n}({x}): {got} vs {want}");
        }
    }
}

#[test]
fn bessel_derivative_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x: f64 = rng.gen_range(0.1..49.0);
        let d = 1e-5;
        let fd = (bessel_j(0, x + d).unwrap() - bessel_j(0, x - d).unwrap()) / (2.0 * d);
        assert!((fd + bessel_j(1, x).unwrap()).abs() < 1e-8);
        let fd1 = (bessel_j(1, x + d).unwrap() - bessel_j(1, x - d).unwrap()) / (2.0 * d);
        assert!((fd1 - bessel_j1_prime(x).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn bessel_zeros() {
    assert!((j0_first_zero::<f64>().unwrap() - 2.404826).abs() < 1e-6);
    assert!((j1_prime_first_zero::<f64>().unwrap() - 1.841184).abs() < 1e-6);
    assert!(bessel_integral(0, j0_first_zero::<f64>().unwrap()).abs() < 1e-12);
}
