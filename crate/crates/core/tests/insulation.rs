use insulation_core::eigen::{smallest_eigenpair, EigenOptions};
use insulation_core::fem::{assemble_robin_boundary, BoundaryField, Discretization, NodalField};
use insulation_core::insulation::{
    lambda_of_h, minimize_lambda_m, optimality_residual, radiality_indicator, InsulationOptions, Start,
};
use insulation_core::mesh::{build_mesh, DomainSpec};
use insulation_core::spectra::{disk_dirichlet_oracle, disk_robin_oracle, fem_robin};
use insulation_core::{DiscretizationF32, DomainSpecF32, Error};
use std::f64::consts::PI;

fn disk(h: f64) -> Discretization<f64> {
    Discretization::new(build_mesh(&DomainSpec::disk(1.0, h)).unwrap()).unwrap()
}

#[test]
fn uniform_profile_is_effective_robin() {
    let disc = disk(0.1);
    let (beta, m) = (2.0, 1.5);
    let h = BoundaryField::constant(disc.mesh.num_boundary(), m / disc.perimeter).unwrap();
    let got = lambda_of_h(&disc, &h, beta, &EigenOptions::default(), None).unwrap().lambda;
    let exact = disk_robin_oracle(beta / (1.0 + beta * m / (2.0 * PI)), 1.0).unwrap().lambda;
    assert!((got / exact - 1.0).abs() < 0.01);
    let zero = BoundaryField::constant(disc.mesh.num_boundary(), 0.0).unwrap();
    let robin = lambda_of_h(&disc, &zero, beta, &EigenOptions::default(), None).unwrap().lambda;
    assert!((robin - fem_robin(&disc, beta, &EigenOptions::default()).unwrap().lambda).abs() < 1e-9 * robin);
}

#[test]
fn radial_regime_converges_with_optimality_system() {
    let disc = disk(0.1);
    let (beta, m) = (1.0, 1.0);
    let r = minimize_lambda_m(&disc, beta, m, &InsulationOptions::default()).unwrap();
    assert!(r.converged);
    assert!(r.functional_trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert_eq!(*r.functional_trace.last().unwrap(), r.lambda_m);
    assert!((r.h.mass(&disc.edge_lengths) - m).abs() <= 1e-8 * m);
    assert!(r.h.values().iter().all(|v| *v >= 0.0));
    let robin = disk_robin_oracle(beta, 1.0).unwrap().lambda;
    assert!(r.lambda_m > 0.0 && r.lambda_m < robin);
    assert!(optimality_residual(&disc, &r, beta).unwrap() < 1e-6);
    // Hopf: the minimizer is positive up to the boundary
    let trace = r.u.boundary_trace(&disc.mesh);
    assert!(trace.iter().all(|v| *v > 0.0));
    assert!(trace.iter().all(|v| *v >= r.c_u * (1.0 - 1e-9)));
    assert!(!r.multistart_disagrees());
}

#[test]
fn small_mass_recovers_robin() {
    let disc = disk(0.1);
    let opts = InsulationOptions::default();
    let tiny = minimize_lambda_m(&disc, 2.0, 1e-6, &opts).unwrap();
    let bare = minimize_lambda_m(&disc, 2.0, 0.0, &opts).unwrap();
    assert_eq!(bare.start, Start::Bare);
    assert_eq!(bare.iterations, 0);
    assert!((tiny.lambda_m - bare.lambda_m).abs() < 1e-5 * bare.lambda_m);
    assert!(tiny.lambda_m <= bare.lambda_m);
}

#[test]
fn large_mass_drives_lambda_to_zero() {
    let disc = disk(0.1);
    let opts = InsulationOptions::default();
    let mut last = f64::INFINITY;
    for m in [1e2, 1e3, 1e4] {
        let r = minimize_lambda_m(&disc, 1.0, m, &opts).unwrap();
        // radial regime: λ_m is the Robin value with coefficient 1/(1 + m/2π)
        let exact = disk_robin_oracle(1.0 / (1.0 + m / (2.0 * PI)), 1.0).unwrap().lambda;
        assert!(r.lambda_m > 0.0 && (r.lambda_m / exact - 1.0).abs() < 1e-2);
        assert!(r.lambda_m < last / 5.0);
        last = r.lambda_m;
    }
    assert!(last < 2e-3);
}

#[test]
fn broken_regime_finds_lower_tilted_minimizer() {
    let disc = disk(0.1);
    let r = minimize_lambda_m(&disc, 8.0, 0.25, &InsulationOptions::default()).unwrap();
    let h0 = BoundaryField::constant(disc.mesh.num_boundary(), 0.25 / disc.perimeter).unwrap();
    let uniform = lambda_of_h(&disc, &h0, 8.0, &EigenOptions::default(), None).unwrap().lambda;
    assert!(r.lambda_m < uniform);
    assert!(r.radiality > 0.1, "radiality {}", r.radiality);
    assert!(r.lambda_m < disk_dirichlet_oracle(1.0).unwrap().lambda);
}

#[test]
fn rejects_bad_parameters() {
    let disc = disk(0.3);
    let opts = InsulationOptions::default();
    assert!(matches!(minimize_lambda_m(&disc, 0.0, 1.0, &opts), Err(Error::InvalidArgument(_))));
    assert!(matches!(minimize_lambda_m(&disc, 1.0, -1.0, &opts), Err(Error::InvalidArgument(_))));
    assert!(matches!(minimize_lambda_m(&disc, 1.0, f64::NAN, &opts), Err(Error::InvalidArgument(_))));
}

#[test]
fn radiality_is_rotation_invariant() {
    let disc = disk(0.1);
    let f = |x: f64, y: f64| 1.0 + 0.3 * x - 0.2 * y + 0.1 * x * y;
    let base = radiality_indicator(&disc.mesh, &NodalField::from_fn(&disc.mesh, f));
    // rotation by a multiple of 60° maps the disk mesh onto itself
    let (c, s) = ((PI / 3.0).cos(), (PI / 3.0).sin());
    let rotated = NodalField::from_fn(&disc.mesh, |x, y| f(c * x - s * y, s * x + c * y));
    assert!((radiality_indicator(&disc.mesh, &rotated) - base).abs() < 1e-3 * base);
}

#[test]
fn polygon_domain_runs() {
    let disc = Discretization::new(build_mesh(&DomainSpec::regular_polygon(6, 1.0, 0.15)).unwrap()).unwrap();
    let r = minimize_lambda_m(&disc, 1.0, 1.0, &InsulationOptions::default()).unwrap();
    assert!(r.converged);
    let zero = BoundaryField::constant(disc.mesh.num_boundary(), 0.0).unwrap();
    let b = assemble_robin_boundary(&disc.mesh, &zero, 1.0).unwrap();
    let robin = smallest_eigenpair(&disc.stiffness.add(&b), &disc.mass, &EigenOptions::default()).unwrap().lambda;
    assert!(r.lambda_m < robin);
}

#[test]
fn single_precision_smoke() {
    let disc = DiscretizationF32::new(build_mesh(&DomainSpecF32::disk(1.0, 0.2)).unwrap()).unwrap();
    let opts = InsulationOptions::<f32> { perturbed_restart: false, ..Default::default() };
    let r = minimize_lambda_m(&disc, 1.0f32, 1.0f32, &opts).unwrap();
    let d64 = disk(0.2);
    let r64 = minimize_lambda_m(&d64, 1.0, 1.0, &InsulationOptions { perturbed_restart: false, ..Default::default() }).unwrap();
    assert!((r.lambda_m as f64 - r64.lambda_m).abs() < 1e-4 * r64.lambda_m);
}
