#![allow(dead_code)]

use dpw_core::{MatrixLoop, ScalarLoop, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Laurent polynomial of degree ≤ `d` with coefficients damped by ρ^{−|k|}.
pub fn damped_poly(rng: &mut ChaCha8Rng, d: i32, n: usize, rho: f64) -> ScalarLoop {
    let mut f = ScalarLoop::zeros(n, rho);
    for k in -d..=d {
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        f.set(k, c * rho.powi(-k.abs()));
    }
    f
}

/// Product L(p)·U(q)·L(p') of unipotent factors: exact unit determinant, degree ≤ 3d.
pub fn random_sl_loop(rng: &mut ChaCha8Rng, d: i32, n: usize, rho: f64) -> MatrixLoop {
    let one = ScalarLoop::constant(C64::new(1.0, 0.0), n, rho);
    let zero = ScalarLoop::zeros(n, rho);
    let lower = |p: ScalarLoop| MatrixLoop::new(one.clone(), zero.clone(), p, one.clone());
    let upper = |q: ScalarLoop| MatrixLoop::new(one.clone(), q, zero.clone(), one.clone());
    let a = lower(damped_poly(rng, d, n, rho));
    let b = upper(damped_poly(rng, d, n, rho));
    let c = lower(damped_poly(rng, d, n, rho));
    let ab = a.mul_full(&b).unwrap().with_degree(n);
    ab.mul_full(&c).unwrap().with_degree(n)
}
