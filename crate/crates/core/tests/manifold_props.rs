mod common;

use common::*;
use proptest::prelude::*;
use risbal::linalg::{quadratic_form, real_inner};
use risbal::manifold::*;
use risbal::ris_design::{minimize_balance, p1_euclid_grad, p1_objective, BalanceMatrix};
use risbal::CVector;

fn dims() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![1usize, 2, 3, 4, 8, 16, 33])
}

fn objective(r: &risbal::CMatrix, phi: &ReflectionVector) -> f64 {
    -quadratic_form(r, phi.as_vector()).re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent_and_tangent(seed in any::<u64>(), m in dims()) {
        let mut r = rng(seed);
        let phi = random_phases(&mut r, m);
        let g = gaussian_vector(&mut r, m).scale(10.0);
        let t = project_to_tangent(&g, &phi).unwrap();
        let tt = project_to_tangent(t.entries(), &phi).unwrap();
        prop_assert!((t.entries() - tt.entries()).norm() <= 1e-12 * g.norm().max(1.0));
        let defect = tangency_defect(t.entries(), &phi).unwrap();
        prop_assert!(defect < TANGENCY_TOL, "defect {defect}");
    }

    #[test]
    fn projection_removes_only_the_normal_part(seed in any::<u64>(), m in dims()) {
        let mut r = rng(seed);
        let phi = random_phases(&mut r, m);
        let g = gaussian_vector(&mut r, m);
        let t = project_to_tangent(&g, &phi).unwrap();
        // g - t is normal: pointwise real multiple of φ.
        let n = &g - t.entries();
        for (nm, pm) in n.iter().zip(phi.as_vector().iter()) {
            prop_assert!((nm * pm.conj()).im.abs() < 1e-12);
        }
    }

    #[test]
    fn retraction_lands_on_the_manifold(seed in any::<u64>(), m in dims(), step in 1e-6f64..1e3) {
        let mut r = rng(seed);
        let phi = random_phases(&mut r, m);
        let t = project_to_tangent(&gaussian_vector(&mut r, m), &phi).unwrap();
        let next = retract_point(&(phi.as_vector() + t.entries().scale(step))).unwrap();
        for z in next.as_vector().iter() {
            prop_assert!((z.norm() - 1.0).abs() < UNIT_MODULUS_TOL);
        }
    }

    #[test]
    fn transport_is_tangent_at_the_new_point(seed in any::<u64>(), m in dims()) {
        let mut r = rng(seed);
        let phi = random_phases(&mut r, m);
        let other = random_phases(&mut r, m);
        let d = project_to_tangent(&gaussian_vector(&mut r, m), &phi).unwrap();
        let moved = transport(&d, &other).unwrap();
        prop_assert!(tangency_defect(moved.entries(), &other).unwrap() < TANGENCY_TOL);
        prop_assert!(moved.norm() <= d.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn objective_ignores_a_global_phase(seed in any::<u64>(), m in dims(), alpha in -10.0f64..10.0) {
        let mut r = rng(seed);
        let mat = random_hermitian(&mut r, m);
        let phi = random_phases(&mut r, m);
        let f0 = objective(&mat, &phi);
        let f1 = objective(&mat, &phi.rotated(alpha));
        prop_assert!((f0 - f1).abs() <= 1e-12 * f0.abs().max(1.0));
    }

    #[test]
    fn directional_derivative_matches_finite_differences(seed in any::<u64>(), m in dims()) {
        let mut r = rng(seed);
        let mat = random_hermitian(&mut r, m);
        let bal = BalanceMatrix { r: mat.clone(), lambda: 0.0 };
        let phi = random_phases(&mut r, m);
        let t = project_to_tangent(&gaussian_vector(&mut r, m), &phi).unwrap();
        let g = p1_euclid_grad(&phi, &bal).unwrap();
        // −Rφ is half the gradient in the real metric.
        let analytic = 2.0 * real_inner(&g, t.entries());
        let h = 1e-6;
        let along = |s: f64| {
            let p = retract_point(&(phi.as_vector() + t.entries().scale(s))).unwrap();
            p1_objective(&p, &bal).unwrap()
        };
        let fd = (along(h) - along(-h)) / (2.0 * h);
        let scale = mat.norm() * t.norm();
        prop_assert!((fd - analytic).abs() <= 1e-6 * scale.max(1e-300), "fd {fd} analytic {analytic}");
    }

    #[test]
    fn rcg_never_increases_the_objective(seed in any::<u64>(), m in dims()) {
        let mut r = rng(seed);
        let mat = random_hermitian(&mut r, m);
        let bal = BalanceMatrix { r: mat, lambda: 0.0 };
        let phi0 = random_phases(&mut r, m);
        let (phi, trace) = minimize_balance(&bal, &RcgConfig::for_dimension(m), &phi0).unwrap();
        for w in trace.objective_values.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert_eq!(trace.objective_values.len(), trace.iterations + 1);
        prop_assert!((trace.final_objective() - p1_objective(&phi, &bal).unwrap()).abs() < 1e-9);
        for z in phi.as_vector().iter() {
            prop_assert!((z.norm() - 1.0).abs() < UNIT_MODULUS_TOL);
        }
    }
}

#[test]
fn retraction_of_a_zero_entry_is_rejected() {
    let x = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    assert!(matches!(retract_point(&x), Err(risbal::Error::RetractionSingular { index: 1 })));
}

#[test]
fn constructor_rejects_off_manifold_points() {
    assert!(ReflectionVector::new(CVector::from_vec(vec![c(1.0, 1e-5)])).is_err());
    assert!(ReflectionVector::new(CVector::from_vec(vec![c(0.6, 0.8)])).is_ok());
}

#[test]
fn scaled_identity_is_a_fixed_point() {
    let mut r = rng(5);
    let m = 7;
    let phi0 = random_phases(&mut r, m);
    let mat = risbal::CMatrix::identity(m, m).scale(3.5);
    let (phi, trace) = rcg_minimize(
        |p| objective(&mat, p),
        |p| -(&mat * p.as_vector()),
        &phi0,
        &RcgConfig::default(),
    )
    .unwrap();
    assert_eq!(trace.iterations, 0);
    assert_eq!(trace.converged_by, StopReason::GradNorm);
    assert_eq!(phi, phi0);
}

#[test]
fn max_iters_is_respected() {
    let mut r = rng(11);
    let m = 32;
    let bal = BalanceMatrix {
        r: random_hermitian(&mut r, m),
        lambda: 0.0,
    };
    let cfg = RcgConfig {
        max_iters: 3,
        grad_tol: 0.0,
        ..RcgConfig::default()
    };
    let (_, trace) = minimize_balance(&bal, &cfg, &random_phases(&mut r, m)).unwrap();
    assert_eq!(trace.iterations, 3);
    assert_eq!(trace.converged_by, StopReason::MaxIters);
}

#[test]
fn invalid_configs_are_rejected() {
    let phi = ReflectionVector::ones(2);
    let bad = [
        RcgConfig { max_iters: 0, ..RcgConfig::default() },
        RcgConfig { armijo_contraction: 1.0, ..RcgConfig::default() },
        RcgConfig { armijo_slope: 0.0, ..RcgConfig::default() },
        RcgConfig { grad_tol: -1.0, ..RcgConfig::default() },
    ];
    for cfg in bad {
        let out = rcg_minimize(|_| 0.0, |p| p.as_vector().clone(), &phi, &cfg);
        assert!(matches!(out, Err(risbal::Error::Config(_))), "{cfg:?}");
    }
}
