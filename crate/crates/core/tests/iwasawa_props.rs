mod common;

use dpw_core::iwasawa::{iwasawa_decompose, iwasawa_decompose_weighted};
use dpw_core::{Mat2, MatrixLoop, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_loops_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let phi = common::random_sl_loop(&mut rng, 5, 16, 2.0);
        let res = iwasawa_decompose_weighted(&phi, 2.0).unwrap();
        println!("residual {:.3e} defect {:.3e}", res.residual, res.unitarity_defect);
        assert!(res.residual <= 1e-8);
        assert!(res.unitarity_defect <= 1e-8);
        assert!(res.b.is_positive_real(1e-12));
        assert!(res.b.is_sl(1e-8).unwrap());
    }
}

#[test]
fn deterministic_and_left_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let phi = common::random_sl_loop(&mut rng, 3, 10, 2.0);
    let r1 = iwasawa_decompose(&phi).unwrap();
    let r2 = iwasawa_decompose(&phi).unwrap();
    assert!(r1.f.sub(&r2.f).unwrap().norm_rho() <= 1e-10);
    let th = 0.4f64;
    let u = Mat2::new(C64::from_polar(0.6, th), C64::new(0.8, 0.0), C64::new(-0.8, 0.0), C64::from_polar(0.6, -th));
    let uphi = MatrixLoop::constant(&u, 10, 2.0).mul(&phi).unwrap();
    let r3 = iwasawa_decompose(&uphi).unwrap();
    assert!(r3.b.sub(&r1.b).unwrap().norm_rho() <= 1e-9);
}
