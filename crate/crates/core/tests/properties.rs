use insulation_core::eigen::{smallest_eigenpair, EigenOptions};
use insulation_core::fem::{assemble_boundary_mass, BoundaryField, Discretization};
use insulation_core::insulation::{boundary_energy, optimal_h, solve_c_fixed_point, TraceField, MASS_TOL};
use insulation_core::mesh::{build_mesh, DomainSpec};
use proptest::prelude::*;
use std::sync::OnceLock;

fn trace_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..40).prop_flat_map(|n| (prop::collection::vec(0.0f64..5.0, n), prop::collection::vec(0.01f64..1.0, n)))
}

fn coarse_disc() -> &'static Discretization<f64> {
    static DISC: OnceLock<Discretization<f64>> = OnceLock::new();
    DISC.get_or_init(|| Discretization::new(build_mesh(&DomainSpec::disk(1.0, 0.25)).unwrap()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fixed_point_sign_changes_once((values, lengths) in trace_strategy(), beta in 0.1f64..10.0, m in 0.01f64..10.0) {
        prop_assume!(values.iter().any(|v| *v > 1e-3));
        let tr = TraceField::new(&values, &lengths).unwrap();
        let top = tr.max();
        let grid = 10_000;
        let mut changes = 0;
        let mut prev = tr.fixed_point_residual(0.0, beta, m);
        prop_assert!(prev < 0.0);
        for i in 1..=grid {
            let g = tr.fixed_point_residual(top * i as f64 / grid as f64, beta, m);
            if (g >= 0.0) != (prev >= 0.0) {
                changes += 1;
            }
            prev = g;
        }
        prop_assert_eq!(changes, 1);
        let fp = solve_c_fixed_point(&tr, beta, m, 1e-12).unwrap();
        prop_assert!(fp.c > 0.0 && fp.c <= top);
        prop_assert!(fp.bracket.0 <= fp.c && fp.c <= fp.bracket.1);
    }

    #[test]
    fn mass_identity_without_renormalization((values, lengths) in trace_strategy(), beta in 0.1f64..10.0, m in 0.01f64..10.0) {
        prop_assume!(values.iter().any(|v| *v > 1e-3));
        let tr = TraceField::new(&values, &lengths).unwrap();
        let (h, _) = optimal_h(&tr, beta, m, 1e-13).unwrap();
        prop_assert!(h.values().iter().all(|v| *v >= 0.0));
        prop_assert!((h.mass(&lengths) - m).abs() <= MASS_TOL * m);
    }

    #[test]
    fn c_scales_with_trace((values, lengths) in trace_strategy(), s in 0.1f64..10.0) {
        prop_assume!(values.iter().any(|v| *v > 1e-3));
        let tr = TraceField::new(&values, &lengths).unwrap();
        let scaled: Vec<f64> = values.iter().map(|v| v * s).collect();
        let trs = TraceField::new(&scaled, &lengths).unwrap();
        let c = solve_c_fixed_point(&tr, 2.0, 1.0, 1e-13).unwrap().c;
        let cs = solve_c_fixed_point(&trs, 2.0, 1.0, 1e-13).unwrap().c;
        prop_assert!((cs - s * c).abs() <= 1e-9 * s * c.max(1.0));
        // the optimal profile only depends on the shape of the trace
        let (h, _) = optimal_h(&tr, 2.0, 1.0, 1e-13).unwrap();
        let (hs, _) = optimal_h(&trs, 2.0, 1.0, 1e-13).unwrap();
        for (a, b) in h.values().iter().zip(hs.values()) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn optimal_profile_beats_random((values, lengths) in trace_strategy(), weights in prop::collection::vec(0.0f64..1.0, 40), beta in 0.1f64..10.0, m in 0.01f64..5.0) {
        prop_assume!(values.iter().any(|v| *v > 1e-3));
        let n = values.len();
        let tr = TraceField::new(&values, &lengths).unwrap();
        let (h, _) = optimal_h(&tr, beta, m, 1e-13).unwrap();
        let raw = BoundaryField::from_vertex_values(weights[..n].to_vec()).unwrap();
        let mass = raw.mass(&lengths);
        prop_assume!(mass > 1e-6);
        let other = raw.scaled(m / mass);
        prop_assert!(boundary_energy(&tr, &h, beta) <= boundary_energy(&tr, &other, beta) + 1e-12);
    }

    #[test]
    fn eigenvalue_monotone_in_boundary_weight(base in prop::collection::vec(0.0f64..3.0, 64), extra in prop::collection::vec(0.0f64..3.0, 64)) {
        let disc = coarse_disc();
        let nb = disc.mesh.num_boundary();
        let w1: Vec<f64> = (0..nb).map(|i| base[i % 64]).collect();
        let w2: Vec<f64> = (0..nb).map(|i| base[i % 64] + extra[i % 64]).collect();
        let opts = EigenOptions::default();
        let l1 = smallest_eigenpair(&disc.stiffness.add(&assemble_boundary_mass(&disc.mesh, &w1).unwrap()), &disc.mass, &opts).unwrap().lambda;
        let l2 = smallest_eigenpair(&disc.stiffness.add(&assemble_boundary_mass(&disc.mesh, &w2).unwrap()), &disc.mass, &opts).unwrap().lambda;
        prop_assert!(l2 >= l1 - 1e-9 * l1.max(1.0));
    }
}
