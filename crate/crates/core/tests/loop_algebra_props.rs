use dpw_core::{MatrixLoop, Part, ScalarLoop, C64};
use proptest::prelude::*;

const N: usize = 6;
const RHO: f64 = 1.5;

fn scalar_loop(d: i32) -> impl Strategy<Value = ScalarLoop> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (2 * d + 1) as usize).prop_map(move |cs| {
        let mut f = ScalarLoop::zeros(N, RHO);
        for (k, (re, im)) in (-d..=d).zip(cs) {
            f.set(k, C64::new(re, im));
        }
        f
    })
}

fn close(a: &ScalarLoop, b: &ScalarLoop, tol: f64) -> bool {
    a.sub(b).unwrap().norm_rho() <= tol * (1.0 + a.norm_rho())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_commutative_and_associative(f in scalar_loop(2), g in scalar_loop(2), h in scalar_loop(2)) {
        prop_assert!(close(&f.mul(&g).unwrap(), &g.mul(&f).unwrap(), 1e-14));
        let l = f.mul(&g).unwrap().mul(&h).unwrap();
        let r = f.mul(&g.mul(&h).unwrap()).unwrap();
        prop_assert!(close(&l, &r, 1e-13));
    }

    #[test]
    fn product_matches_pointwise_values(f in scalar_loop(3), g in scalar_loop(3), th in 0.0f64..6.3) {
        let lam = C64::from_polar(1.0, th);
        let fg = f.mul(&g).unwrap();
        let lhs = fg.evaluate(lam).unwrap();
        let rhs = f.evaluate(lam).unwrap() * g.evaluate(lam).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn involutions(f in scalar_loop(N as i32)) {
        prop_assert_eq!(f.star().star(), f.clone());
        prop_assert_eq!(f.bar().bar(), f.clone());
        prop_assert_eq!(f.reflect().reflect(), f.clone());
        let lam = C64::from_polar(1.0, 0.7);
        let s = f.star().evaluate(lam).unwrap();
        prop_assert!((s - f.evaluate(lam).unwrap().conj()).norm() <= 1e-12);
    }

    #[test]
    fn projections_partition_the_loop(f in scalar_loop(N as i32)) {
        let sum = f
            .project(Part::Plus)
            .add(&f.project(Part::Zero))
            .unwrap()
            .add(&f.project(Part::Minus))
            .unwrap();
        prop_assert_eq!(sum, f);
    }

    #[test]
    fn grid_round_trip(f in scalar_loop(N as i32), extra in 0usize..4) {
        let l = 2 * N + 2 + 2 * extra;
        let back = ScalarLoop::from_grid(&f.to_grid(l).unwrap(), N, RHO).unwrap();
        prop_assert!(close(&back, &f, 1e-14));
    }

    #[test]
    fn inverse_of_dominant_constant(f in scalar_loop(1)) {
        let g = f.scale(C64::new(0.1, 0.0)).add(&ScalarLoop::constant(C64::new(1.0, 0.0), N, RHO)).unwrap();
        let h = g.with_degree(3 * N).invert().unwrap();
        let lam = C64::from_polar(1.0, 1.3);
        let p = g.evaluate(lam).unwrap() * h.evaluate(lam).unwrap();
        prop_assert!((p - C64::new(1.0, 0.0)).norm() <= 1e-10);
    }

    #[test]
    fn json_round_trip(f in scalar_loop(N as i32)) {
        let s = serde_json::to_string(&f).unwrap();
        let back: ScalarLoop = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn matrix_determinant_and_adjugate() {
    let x = |c: f64| ScalarLoop::monomial(C64::new(c, 0.0), 1, N, RHO);
    let one = ScalarLoop::constant(C64::new(1.0, 0.0), N, RHO);
    let zero = ScalarLoop::zeros(N, RHO);
    let u = MatrixLoop::new(one.clone(), x(0.5), zero.clone(), one.clone());
    let l = MatrixLoop::new(one.clone(), zero, x(-0.25), one);
    let g = u.mul(&l).unwrap();
    let det = g.det().unwrap();
    assert!(close(&det.with_degree(N), &ScalarLoop::constant(C64::new(1.0, 0.0), N, RHO), 1e-15));
    let prod = g.mul(&g.adj()).unwrap();
    assert!(prod.sub(&MatrixLoop::identity(N, RHO)).unwrap().norm_rho() < 1e-15);
    let lam = C64::from_polar(1.0, 0.3);
    let direct = u.evaluate(lam).unwrap() * l.evaluate(lam).unwrap();
    assert!((g.evaluate(lam).unwrap() - direct).max_abs() < 1e-15);
}

#[test]
fn heavy_truncation_is_reported() {
    let f = ScalarLoop::monomial(C64::new(1.0, 0.0), N as i32, N, RHO);
    assert!(f.mul(&f).is_err());
}

#[test]
fn mismatched_weights_are_rejected() {
    let f = ScalarLoop::zeros(N, RHO);
    let g = ScalarLoop::zeros(N, 2.0);
    assert!(f.add(&g).is_err());
}
