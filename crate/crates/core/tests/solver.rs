use dpw_core::potential::PotentialParams;
use dpw_core::solver::{
    certify, parity_image, predictor, residual_vector, Solver, SolverConfig, UnknownVector,
};

fn cfg() -> SolverConfig {
    SolverConfig { trunc_degree: 12, lambda_grid: 48, ..SolverConfig::default() }
}

#[test]
fn initial_point_solves_the_problem_at_t_zero() {
    let c = cfg();
    for m in 1..=3 {
        let x0 = PotentialParams::initial(m, c.param_degree(), c.rho);
        let r = residual_vector(&x0, &c).unwrap();
        assert_eq!(r.values.len(), c.dimension());
        assert!(r.inf_norm() < 1e-10, "m={m}: {:.3e}", r.inf_norm());
        let (p, rep) = Solver::new(c).solve_at_t(m, 0.0, &x0).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(p, x0);
    }
}

#[test]
fn solution_is_a_fixed_point_of_newton() {
    let c = cfg();
    let t = 0.04;
    let mut solver = Solver::new(c);
    let (p, rep) = solver.solve_at_t(1, t, &predictor(1, t, &c)).unwrap();
    assert!(rep.residual_norm <= c.newton_tol);
    assert!(rep.jacobian_condition.is_finite());
    let (q, rep2) = solver.solve_at_t(1, t, &p).unwrap();
    assert!(rep2.iterations <= 1);
    let x = UnknownVector::from_params(&p, c.trunc_degree);
    let y = UnknownVector::from_params(&q, c.trunc_degree);
    let d = x.0.iter().zip(&y.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-9, "{d:.3e}");
}

#[test]
fn negative_t_is_the_parity_image() {
    let c = cfg();
    let t = 0.03;
    let n = c.trunc_degree;
    let mut solver = Solver::new(c);
    let (p, _) = solver.solve_at_t(2, t, &predictor(2, t, &c)).unwrap();
    let (q, _) = solver.solve_at_t(2, -t, &predictor(2, -t, &c)).unwrap();
    let image = parity_image(&UnknownVector::from_params(&p, n).0, n);
    let direct = UnknownVector::from_params(&q, n).0;
    let d = image.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-8, "{d:.3e}");
}

#[test]
fn certificate_of_a_solved_state() {
    let c = cfg();
    let t = 0.05;
    let (p, _) = Solver::new(c).solve_at_t(1, t, &predictor(1, t, &c)).unwrap();
    let cert = certify(&p, &c).unwrap();
    println!("{cert:?}");
    assert!(cert.residual_inf < 1e-9);
    assert!(cert.det_a0_defect < 1e-9);
    assert!(cert.sym_point_defect < 1e-8);
    assert!(cert.transport_defect < 1e-9);
    assert!(cert.reality_defect < 1e-8);
    assert!(cert.eigenvalue_defect < 1e-7);
    assert!(!cert.branch_warning);
}

#[test]
fn unsolved_parameters_fail_certification_checks() {
    let c = cfg();
    let p = predictor(1, 0.1, &c);
    let r = residual_vector(&p, &c).unwrap();
    assert!(r.inf_norm() > 1e-6);
}
