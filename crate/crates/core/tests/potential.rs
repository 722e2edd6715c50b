use dpw_core::potential::gauge::{gauge_at_infinity, local_branch_gauge};
use dpw_core::potential::{build_potential, naive_potential, sigma_conjugate, PotentialParams};
use dpw_core::solver::{continuation_solve, SolverConfig};
use dpw_core::{DpwError, ScalarLoop, C64};

/// A generic admissible parameter set with all modes populated.
fn generic(m: usize) -> PotentialParams {
    let d = 6;
    let rho = 2.0;
    let mut p = PotentialParams::initial(m, d, rho);
    p.t = 0.13;
    p.r = 0.9;
    p.a = ScalarLoop::from_real_positive(&[0.2, 0.9, -0.1, 0.05, 0.01], d, rho);
    p.b = ScalarLoop::from_real_positive(&[-0.45, 0.1, 0.5, -0.02], d, rho);
    p.c = ScalarLoop::from_real_positive(&[-1.9, 0.3, 0.04], d, rho);
    p.validate().unwrap();
    p
}

fn sample_z() -> Vec<C64> {
    vec![C64::new(0.3, 0.1), C64::new(-0.8, 0.45), C64::new(1.7, -0.2), C64::new(0.05, -2.4), C64::new(0.99, 0.02)]
}

fn sample_lambda() -> Vec<C64> {
    vec![C64::from_polar(1.0, 0.4), C64::from_polar(1.0, 2.9), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]
}

#[test]
fn closed_form_sums_match_direct_sum_over_punctures() {
    for m in 1..=4 {
        let p = generic(m);
        for z in sample_z() {
            let loopv = build_potential(&p, z).unwrap();
            for lam in sample_lambda() {
                let naive = naive_potential(&p, z, lam);
                let closed = p.at_lambda(lam).eta(z);
                let from_loop = loopv.value.evaluate(lam).unwrap();
                let scale = 1.0 + naive.max_abs();
                assert!((naive - closed).max_abs() < 1e-13 * scale, "m={m} z={z}");
                assert!((naive - from_loop).max_abs() < 1e-13 * scale, "m={m} z={z}");
            }
        }
    }
}

#[test]
fn sigma_reality() {
    let p = generic(2);
    for z in sample_z() {
        for lam in sample_lambda() {
            let d = sigma_conjugate(&p, z, lam) - p.at_lambda(lam).eta(z);
            assert!(d.max_abs() < 1e-13);
        }
    }
}

/// p₁·A(p₁z, λ) = D⁻¹A(z, −λ)D for the residue part A = Σ_j A_j/(z − p_j).
#[test]
fn rotation_equivariance_of_the_residue_part() {
    for m in 1..=3 {
        let p = generic(m);
        let mut q = p.clone();
        q.r = 0.0;
        let t = C64::new(p.t, 0.0);
        let residue_part = |z: C64, lam: C64| naive_potential(&q, z, lam).scale(t.inv());
        let p1 = p.puncture(1);
        let d = p.d_matrix();
        let dinv = d.adj();
        for z in sample_z() {
            for lam in sample_lambda() {
                let lhs = residue_part(p1 * z, lam).scale(p1);
                let rhs = dinv * residue_part(z, -lam) * d;
                assert!((lhs - rhs).max_abs() < 1e-12, "m={m}");
            }
        }
    }
}

#[test]
fn residues_are_traceless_and_transported() {
    let p = generic(1);
    let d = p.d_matrix();
    let dinv = d.adj();
    for lam in sample_lambda() {
        for j in 0..p.n() {
            let a = p.residue_matrix(j, lam);
            assert!(a.trace().norm() < 1e-15);
            let next = p.residue_matrix((j + 1) % p.n(), lam);
            let moved = dinv * p.residue_matrix(j, -lam) * d;
            assert!((next - moved).max_abs() < 1e-14);
        }
    }
    let lam = sample_lambda()[0];
    let from_loop = p.residue_loop(3).evaluate(lam).unwrap();
    assert!((from_loop - p.residue_matrix(3, lam)).max_abs() < 1e-14);
}

#[test]
fn initial_point_has_unit_k_and_unipotent_residues() {
    let p = PotentialParams::initial(2, 4, 2.0);
    assert_eq!(p.k_residual(), 0.0);
    for lam in sample_lambda() {
        let a = p.residue_matrix(0, lam);
        assert!((a.det() + C64::new(1.0, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn evaluation_at_a_puncture_is_refused() {
    let p = generic(1);
    let r = build_potential(&p, p.puncture(2));
    assert!(matches!(r, Err(DpwError::AtPuncture { index: 2, .. })));
}

#[test]
fn invalid_parameters_are_rejected() {
    let mut p = generic(1);
    p.a.set(-1, C64::new(0.1, 0.0));
    assert!(p.validate().is_err());
    let mut p = generic(1);
    p.b.set(1, C64::new(0.0, 0.1));
    assert!(p.validate().is_err());
}

#[test]
fn gauges_on_a_solved_state() {
    let cfg = SolverConfig::default();
    let sol = continuation_solve(1, 10, &cfg).unwrap();
    let inf = gauge_at_infinity(&sol.params).unwrap();
    println!(
        "infinity: pole11 {:.2e} pole21 {:.2e} B mismatch {:.2e} beta_hat {:.2e}",
        inf.pole_11, inf.pole_21, inf.b_mismatch, inf.beta_hat_mismatch
    );
    assert!(inf.pole_11 < 1e-9 && inf.pole_21 < 1e-9);
    // limited by the Newton tolerance of the solved coefficients
    assert!(inf.b_mismatch < 1e-8);
    assert!(inf.beta_hat_mismatch < 1e-9);
    let br = local_branch_gauge(&sol.params, 0, 10, 1e-12).unwrap();
    println!("branch: max pole {:.2e} lambda^-1 term {:.2e}", br.max_pole, br.lambda_minus_one_term);
    assert!(br.max_pole < 1e-10);
    assert!(br.lambda_minus_one_term > 1e-3);
}
