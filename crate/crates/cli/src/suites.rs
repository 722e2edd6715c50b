//! Named verification suites for `dpw verify`.

use crate::config::RunConfig;
use anyhow::Result;
use dpw_core::geometry::blowup::blowup_compare;
use dpw_core::geometry::ImmersionSettings;
use dpw_core::iwasawa::iwasawa_decompose_weighted;
use dpw_core::monodromy::{monodromy_matrix, mtilde_initial};
use dpw_core::potential::PotentialParams;
use dpw_core::solver::{certify, continuation_solve, derivative_check};
use dpw_core::{MatrixLoop, ScalarLoop, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Checks {
    pass: bool,
}

impl Checks {
    fn new() -> Self {
        Checks { pass: true }
    }

    fn check(&mut self, name: &str, value: f64, limit: f64) {
        let ok = value <= limit;
        self.pass &= ok;
        println!("  {} {name}: {value:.3e} (limit {limit:.1e})", if ok { "ok  " } else { "FAIL" });
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.pass &= ok;
        println!("  {} {name}", if ok { "ok  " } else { "FAIL" });
    }

    fn range(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        let ok = (lo..=hi).contains(&value);
        self.pass &= ok;
        println!("  {} {name}: {value:.4} (range [{lo}, {hi}])", if ok { "ok  " } else { "FAIL" });
    }
}

pub fn run_suite(suite: crate::Suite, cfg: &RunConfig) -> Result<bool> {
    use crate::Suite::*;
    let mut c = Checks::new();
    let name = match suite {
        Derivatives => {
            derivatives(cfg, &mut c)?;
            "derivatives"
        }
        Blowup => {
            blowup(cfg, &mut c)?;
            "blowup"
        }
        Monodromy => {
            monodromy(cfg, &mut c)?;
            "monodromy"
        }
        Iwasawa => {
            iwasawa(&mut c)?;
            "iwasawa"
        }
    };
    println!("suite {name}: {}", if c.pass { "PASS" } else { "FAIL" });
    Ok(c.pass)
}

/// Central differences of the solved family at t = 0 against the closed-form tangent.
fn derivatives(cfg: &RunConfig, c: &mut Checks) -> Result<()> {
    let r = derivative_check(cfg.m, 1e-3, &cfg.solver())?;
    println!("m = {}, κ = {:.10}", cfg.m, r.kappa);
    c.check("a'", r.a_deviation, 1e-5);
    c.check("b'", r.b_deviation, 1e-5);
    c.check("c'", r.c_deviation, 1e-5);
    c.check("r'", r.r_deviation, 1e-5);
    c.check("parity", r.parity_deviation, 1e-8);
    Ok(())
}

/// (f_t − Id)/t against the saddle tower for t halving three times.
fn blowup(cfg: &RunConfig, c: &mut Checks) -> Result<()> {
    let ts = [1e-2, 5e-3, 2.5e-3];
    let r = blowup_compare(cfg.m, &ts, &cfg.solver(), ImmersionSettings::default())?;
    for (t, d) in r.ts.iter().zip(&r.deviations) {
        println!("  t = {t:.2e}: deviation {d:.3e}");
    }
    for (i, q) in r.ratios.iter().enumerate() {
        c.range(&format!("ratio {i}"), *q, 1.7, 2.3);
    }
    c.check("Gauss map", r.gauss_map_defect, 1e-14);
    c.check("height differential", r.omega_defect, 1e-12);
    Ok(())
}

/// M̃ at t = 0 in closed form, then the certificate of the solved state at (m, k).
fn monodromy(cfg: &RunConfig, c: &mut Checks) -> Result<()> {
    let sc = cfg.solver();
    let mut p0 = PotentialParams::initial(cfg.m, sc.param_degree(), sc.rho);
    p0.t = 0.0;
    let rec = monodromy_matrix(&p0, 0, 32, &sc.ode)?;
    let grid = dpw_core::loop_algebra::grid_points(32);
    let samples = rec.mtilde.to_grid(32)?;
    let err = grid
        .iter()
        .zip(&samples)
        .map(|(&l, m)| (*m - mtilde_initial(l)).max_abs())
        .fold(0.0, f64::max);
    c.check("M~ at t = 0", err, 1e-7);
    let sol = continuation_solve(cfg.m, cfg.k, &sc)?;
    let cert = certify(&sol.params, &sc)?;
    println!("m = {}, k = {}, t = {:.6e}", cfg.m, cfg.k, sol.params.t);
    c.check("residual", cert.residual_inf, 1e-10);
    c.check("det A_0 + 1", cert.det_a0_defect, 1e-9);
    c.check("M(±1)", cert.sym_point_defect, 1e-8);
    c.check("transport", cert.transport_defect, 1e-8);
    c.check("reality", cert.reality_defect, 1e-8);
    c.check("det M", cert.det_defect, 1e-9);
    Ok(())
}

/// Laurent polynomial of degree ≤ d with coefficients damped by ρ^{−|k|}.
fn damped_poly(rng: &mut ChaCha8Rng, d: i32, n: usize, rho: f64) -> ScalarLoop {
    let mut f = ScalarLoop::zeros(n, rho);
    for k in -d..=d {
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        f.set(k, c * rho.powi(-k.abs()));
    }
    f
}

/// Product of three unipotent factors: unit determinant by construction.
fn random_sl_loop(rng: &mut ChaCha8Rng, d: i32, n: usize, rho: f64) -> Result<MatrixLoop> {
    let one = ScalarLoop::constant(C64::new(1.0, 0.0), n, rho);
    let zero = ScalarLoop::zeros(n, rho);
    let lower = MatrixLoop::new(one.clone(), zero.clone(), damped_poly(rng, d, n, rho), one.clone());
    let upper = MatrixLoop::new(one.clone(), damped_poly(rng, d, n, rho), zero.clone(), one.clone());
    let lower2 = MatrixLoop::new(one.clone(), zero, damped_poly(rng, d, n, rho), one);
    Ok(lower.mul_full(&upper)?.with_degree(n).mul_full(&lower2)?.with_degree(n))
}

/// Round trip and unitarity of the splitting on seeded random SL(2) loops.
fn iwasawa(c: &mut Checks) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut res, mut unit) = (0.0f64, 0.0f64);
    let mut positive = true;
    for _ in 0..20 {
        let phi = random_sl_loop(&mut rng, 5, 16, 2.0)?;
        let r = iwasawa_decompose_weighted(&phi, 2.0)?;
        res = res.max(r.residual);
        unit = unit.max(r.unitarity_defect);
        positive &= r.b.is_positive_real(1e-12);
    }
    c.check("residual ‖FB − Φ‖", res, 1e-8);
    c.check("unitarity", unit, 1e-8);
    c.flag("B₀ real and positive", positive);
    Ok(())
}
