use dpw_core::monodromy::{default_delta, integrate_phi, loop_path, monodromy_matrix, mtilde_initial};
use dpw_core::ode::{OdeOptions, Segment};
use dpw_core::potential::PotentialParams;
use dpw_core::{Mat2, ScalarLoop, C64};
use std::f64::consts::PI;

fn generic(m: usize) -> PotentialParams {
    let d = 6;
    let rho = 2.0;
    let mut p = PotentialParams::initial(m, d, rho);
    p.t = 0.13;
    p.r = 0.9;
    p.a = ScalarLoop::from_real_positive(&[0.2, 0.9, -0.1, 0.05], d, rho);
    p.b = ScalarLoop::from_real_positive(&[-0.45, 0.1, 0.5], d, rho);
    p.c = ScalarLoop::from_real_positive(&[-1.9, 0.3], d, rho);
    p
}

fn opts() -> OdeOptions {
    OdeOptions { rtol: 1e-12, atol: 1e-13 }
}

fn lambdas() -> Vec<C64> {
    vec![C64::new(1.0, 0.0), C64::from_polar(1.0, 1.1), C64::new(-1.0, 0.0), C64::from_polar(1.0, 4.0)]
}

#[test]
fn continuation_is_path_independent_within_a_homotopy_class() {
    let p = generic(1);
    let z = C64::new(0.45, 0.4);
    let direct = [Segment::Line { from: C64::new(0.0, 0.0), to: z }];
    let corner = C64::new(0.0, 0.4);
    let bent = [
        Segment::Line { from: C64::new(0.0, 0.0), to: corner },
        Segment::Line { from: corner, to: z },
    ];
    let a = integrate_phi(&p, &direct, &lambdas(), &opts()).unwrap();
    let b = integrate_phi(&p, &bent, &lambdas(), &opts()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((*x - *y).max_abs() < 1e-10);
        assert!((x.det() - C64::new(1.0, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn loop_monodromy_matches_frame_continuation() {
    let p = generic(2);
    let n = p.n();
    let path = loop_path(n, 3, default_delta(n), C64::new(0.0, 0.0));
    let phis = integrate_phi(&p, &path, &lambdas(), &opts()).unwrap();
    let rec = monodromy_matrix(&p, 3, 64, &opts()).unwrap();
    assert!(rec.det_defect < 1e-10);
    for (lam, phi) in lambdas().iter().zip(&phis) {
        let m = rec.monodromy.evaluate(*lam).unwrap();
        assert!((m - *phi).max_abs() < 1e-9, "{}", (m - *phi).max_abs());
    }
}

#[test]
fn neighbouring_monodromies_are_transported() {
    for m in 1..=2 {
        let p = generic(m);
        let d = p.d_matrix();
        let m0 = monodromy_matrix(&p, 0, 32, &opts()).unwrap();
        let m1 = monodromy_matrix(&p, 1, 32, &opts()).unwrap();
        for lam in lambdas() {
            let lhs = m1.monodromy.evaluate(lam).unwrap();
            let rhs = d.adj() * m0.monodromy.evaluate(-lam).unwrap() * d;
            assert!((lhs - rhs).max_abs() < 1e-9, "m={m}");
        }
    }
}

/// The loop around every puncture factors as M_1·M_2·…·M_{n−1}·M_0 when it leaves the base
/// point between p_0 and p_1.
#[test]
fn product_of_local_monodromies_is_the_outer_loop() {
    let p = generic(1);
    let n = p.n();
    let dir = C64::from_polar(1.0, PI / n as f64);
    let out = dir * 2.0;
    let start = PI / n as f64;
    let outer = [
        Segment::Line { from: C64::new(0.0, 0.0), to: out },
        Segment::Arc { center: C64::new(0.0, 0.0), radius: 2.0, start, end: start + 2.0 * PI },
        Segment::Line { from: out, to: C64::new(0.0, 0.0) },
    ];
    let big = integrate_phi(&p, &outer, &lambdas(), &opts()).unwrap();
    let locals: Vec<Vec<Mat2>> = (0..n)
        .map(|j| integrate_phi(&p, &loop_path(n, j, default_delta(n), C64::new(0.0, 0.0)), &lambdas(), &opts()).unwrap())
        .collect();
    for (i, b) in big.iter().enumerate() {
        let mut prod = Mat2::identity();
        for j in (1..n).chain(std::iter::once(0)) {
            prod = prod * locals[j][i];
        }
        assert!((prod - *b).max_abs() < 1e-8, "{}", (prod - *b).max_abs());
    }
}

#[test]
fn first_order_monodromy_at_the_initial_point() {
    let mut p = PotentialParams::initial(1, 4, 2.0);
    p.t = 1e-6;
    let rec = monodromy_matrix(&p, 0, 32, &opts()).unwrap();
    for lam in lambdas() {
        let mt = rec.mtilde.evaluate(lam).unwrap();
        let expect = mtilde_initial(lam);
        assert!((mt - expect).max_abs() < 1e-4, "{}", (mt - expect).max_abs());
    }
    assert!(!rec.branch_warning);
}

#[test]
fn loops_through_punctures_are_refused() {
    let p = generic(1);
    let path = [Segment::Line { from: C64::new(0.0, 0.0), to: C64::new(2.0, 0.0) }];
    assert!(integrate_phi(&p, &path, &lambdas(), &opts()).is_err());
}
