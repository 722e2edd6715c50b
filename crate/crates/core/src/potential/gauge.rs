//! Gauge actions η.G = G⁻¹ηG + G⁻¹dG and the two explicit gauges of the family:
//! G_s regularizing z = ∞ and the local branch gauge at a puncture.

use super::PotentialParams;
use crate::error::{DpwError, Result};
use crate::linalg::{Mat2, C64, ONE, ZERO};
use crate::loop_algebra::{grid_points, ScalarLoop};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Step for the generic differenced gauge derivative.
pub const GAUGE_DIFF_STEP: f64 = 1e-4;

/// Determinant magnitude below which a gauge value is treated as singular.
const GAUGE_DET_FLOOR: f64 = 1e-14;

/// d/dz of a holomorphic matrix function by 6th-order central differences.
pub fn holomorphic_derivative(g: impl Fn(C64) -> Mat2, z: C64, h: f64) -> Mat2 {
    let w = [(1.0, 45.0), (2.0, -9.0), (3.0, 1.0)];
    let mut acc = Mat2::zero();
    for (k, c) in w {
        let dz = C64::new(k * h, 0.0);
        acc = acc + (g(z + dz) - g(z - dz)).scale(C64::new(c, 0.0));
    }
    acc.scale(C64::new(1.0 / (60.0 * h), 0.0))
}

fn gauge_inverse(g: &Mat2, z: C64) -> Result<Mat2> {
    let d = g.det();
    if d.norm() < GAUGE_DET_FLOOR || !d.is_finite() {
        return Err(DpwError::NonInvertibleGauge(format!("{z}")));
    }
    Ok(g.adj().scale(d.inv()))
}

/// η.G with G' supplied in closed form. Potentials and gauges are functions of (z, λ).
pub fn apply_gauge_with_derivative<'a>(
    eta: impl Fn(C64, C64) -> Mat2 + 'a,
    g: impl Fn(C64, C64) -> Mat2 + 'a,
    dg: impl Fn(C64, C64) -> Mat2 + 'a,
) -> impl Fn(C64, C64) -> Result<Mat2> + 'a {
    move |z, lambda| {
        let gv = g(z, lambda);
        let gi = gauge_inverse(&gv, z)?;
        Ok(gi * eta(z, lambda) * gv + gi * dg(z, lambda))
    }
}

/// η.G with dG/dz by differencing at `scale`·[`GAUGE_DIFF_STEP`].
pub fn apply_gauge<'a>(
    eta: impl Fn(C64, C64) -> Mat2 + 'a,
    g: impl Fn(C64, C64) -> Mat2 + Clone + 'a,
    scale: f64,
) -> impl Fn(C64, C64) -> Result<Mat2> + 'a {
    let h = GAUGE_DIFF_STEP * scale;
    let g2 = g.clone();
    apply_gauge_with_derivative(eta, g, move |z, lambda| holomorphic_derivative(|x| g2(x, lambda), z, h))
}

/// G_0 = [[z^{−m}, −1/r], [0, z^m]] (the s = 0 member of [`gauge_s`]).
pub fn gauge_zero(m: usize, r: f64, z: C64) -> Mat2 {
    gauge_s(m, r, ZERO, z)
}

/// G_s = [[z^{−m}, (s − 1)/r], [0, z^m]].
pub fn gauge_s(m: usize, r: f64, s: C64, z: C64) -> Mat2 {
    let zm = z.powi(m as i32);
    Mat2::new(zm.inv(), (s - ONE) / r, ZERO, zm)
}

/// dG_s/dz (independent of s).
pub fn gauge_s_derivative(m: usize, z: C64) -> Mat2 {
    let mf = m as f64;
    Mat2::diag(-z.powi(-(m as i32) - 1) * mf, z.powi(m as i32 - 1) * mf)
}

/// s(λ) = (t/m)·Σ_j a_j(λ) = (t/m)(n/2)(a(λ) + a(−λ)).
pub fn s_value(p: &PotentialParams, lambda: C64) -> C64 {
    let half_n = (p.m + 1) as f64;
    (p.a.eval_unchecked(lambda) + p.a.eval_unchecked(-lambda)) * (p.t / p.m as f64 * half_n)
}

/// η.G_s in the z-chart, per dz.
pub fn gauged_at_infinity_z(p: &PotentialParams, z: C64, lambda: C64) -> Mat2 {
    let g = gauge_s(p.m, p.r, s_value(p, lambda), z);
    let gi = g.adj();
    gi * p.at_lambda(lambda).eta(z) * g + gi * gauge_s_derivative(p.m, z)
}

/// η.G_s in the chart w = 1/z, per dw.
pub fn gauged_at_infinity_w(p: &PotentialParams, w: C64, lambda: C64) -> Mat2 {
    let z = w.inv();
    gauged_at_infinity_z(p, z, lambda).scale(-(w * w).inv())
}

/// Laurent coefficients c_{−1}, …, c_{−order} of f at w = 0 by the trapezoid rule on |w| = radius.
fn pole_coefficients(f: impl Fn(C64) -> Mat2, radius: f64, order: usize, samples: usize) -> Vec<Mat2> {
    let vals: Vec<(C64, Mat2)> = (0..samples)
        .map(|i| {
            let w = C64::from_polar(radius, 2.0 * PI * (i as f64 + 0.5) / samples as f64);
            (w, f(w))
        })
        .collect();
    (1..=order)
        .map(|p| {
            let mut acc = Mat2::zero();
            for (w, v) in &vals {
                acc = acc + v.scale(w.powi(p as i32));
            }
            acc.scale(C64::new(1.0 / samples as f64, 0.0))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfinityDiagnostics {
    /// Largest pole coefficient of the 11 entry at w = 0 over the λ-grid.
    pub pole_11: f64,
    /// Largest pole coefficient of the 21 entry at w = 0 over the λ-grid.
    pub pole_21: f64,
    /// λ-series of B with η̂₁₂ = λ⁻¹B(λ)dw/w^{m+1} + (lower-order poles).
    pub b_series: ScalarLoop,
    /// Closed form −λs(1−s)m/r − λt(s−1)n(a(λ)+a(−λ))/r − t(n/2)(b(λ)−b(−λ)).
    pub b_closed_form: ScalarLoop,
    pub b_mismatch: f64,
    pub b_at_zero: f64,
    /// Largest deviation of the λ⁻¹ part of η̂₁₂ (z-chart) from t·n·b⁰·z^{n−2}/(z^n−1).
    pub beta_hat_mismatch: f64,
    /// |λ⁻¹ part of η̂₁₂| at w = 0 in the w-chart.
    pub beta_hat_at_infinity: f64,
    /// ρ-norm of s.
    pub s_norm: f64,
}

/// Diagnostics of the gauge G_s that makes z = ∞ an apparent singularity.
pub fn gauge_at_infinity(p: &PotentialParams) -> Result<InfinityDiagnostics> {
    let deg = p.degree() + 2;
    let l = 4 * deg;
    let rho = p.rho();
    let grid = grid_points(l);
    let n = p.n() as f64;
    let m = p.m;
    let order = 2 * m + 4;
    let radius = 0.5;
    let mut pole_11 = 0.0f64;
    let mut pole_21 = 0.0f64;
    let mut b_samples = Vec::with_capacity(l);
    let mut closed = Vec::with_capacity(l);
    for &lam in &grid {
        let poles = pole_coefficients(|w| gauged_at_infinity_w(p, w, lam), radius, order, 256);
        for c in &poles {
            pole_11 = pole_11.max(c.0[0][0].norm());
            pole_21 = pole_21.max(c.0[1][0].norm());
        }
        b_samples.push(poles[m].0[0][1] * lam);
        let s = s_value(p, lam);
        let (ap, am) = (p.a.eval_unchecked(lam), p.a.eval_unchecked(-lam));
        let (bp, bm) = (p.b.eval_unchecked(lam), p.b.eval_unchecked(-lam));
        closed.push(
            -lam * s * (ONE - s) * (m as f64 / p.r) - lam * (s - ONE) * (ap + am) * (p.t * n / p.r)
                - (bp - bm) * (p.t * n / 2.0),
        );
    }
    let b_series = ScalarLoop::from_grid(&b_samples, deg, rho)?;
    let b_closed_form = ScalarLoop::from_grid(&closed, deg, rho)?;
    let b_mismatch = b_series.sub(&b_closed_form)?.norm_rho();
    let b_at_zero = b_series.coeff(0).norm();

    // λ⁻¹ coefficient of η̂₁₂ from a contour in λ on the unit circle
    let beta_hat = |f: &dyn Fn(C64) -> Mat2| -> C64 {
        let mut acc = ZERO;
        for &lam in &grid {
            acc += f(lam).0[0][1] * lam;
        }
        acc / l as f64
    };
    let b0 = p.b.coeff(0);
    let mut beta_hat_mismatch = 0.0f64;
    for z in [C64::new(1.7, 0.4), C64::new(-0.3, 2.2), C64::new(0.2, -0.3)] {
        let num = beta_hat(&|lam| gauged_at_infinity_z(p, z, lam));
        let zn = z.powi(p.n() as i32);
        let expect = b0 * z.powi(p.n() as i32 - 2) * (p.t * n) / (zn - ONE);
        beta_hat_mismatch = beta_hat_mismatch.max((num - expect).norm());
    }
    let tiny = C64::new(1e-6, 0.0);
    let beta_hat_at_infinity = beta_hat(&|lam| gauged_at_infinity_w(p, tiny, lam)).norm();

    let s_loop = {
        let v: Vec<C64> = grid.iter().map(|&lam| s_value(p, lam)).collect();
        ScalarLoop::from_grid(&v, deg, rho)?
    };
    Ok(InfinityDiagnostics {
        pole_11,
        pole_21,
        b_series,
        b_closed_form,
        b_mismatch,
        b_at_zero,
        beta_hat_mismatch,
        beta_hat_at_infinity,
        s_norm: s_loop.norm_rho(),
    })
}

/// P(λ) = [[b_j/(1 − a_j), 0], [λ, (1 − a_j)/b_j]]; the full gauge is P·diag(w^{−1/2}, w^{1/2}).
pub fn branch_gauge_matrix(p: &PotentialParams, j: usize, lambda: C64) -> Mat2 {
    let (a, b, _) = p.residue_data(j, lambda);
    let q = b / (ONE - a);
    Mat2::new(q, ZERO, lambda, q.inv())
}

/// Pull-back of η to the chart w^{k+1} = z − p_j, gauged by the local branch gauge, per dw.
///
/// Conjugation by diag(w^{−1/2}, w^{1/2}) only multiplies off-diagonal entries by w^{±1},
/// so the result is single-valued in w even though the gauge is not.
pub fn gauged_at_branch_point(p: &PotentialParams, j: usize, k: usize, w: C64, lambda: C64) -> Mat2 {
    let kp = (k + 1) as i32;
    let z = p.puncture(j) + w.powi(kp);
    let eta_w = p.at_lambda(lambda).eta(z).scale(w.powi(kp - 1) * (k + 1) as f64);
    let pm = branch_gauge_matrix(p, j, lambda);
    let x = pm.adj() * eta_w * pm;
    let half = (w * 2.0).inv();
    Mat2::new(x.0[0][0] - half, x.0[0][1] * w, x.0[1][0] / w, x.0[1][1] + half)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchDiagnostics {
    /// Largest w-pole coefficient over all entries and λ samples.
    pub max_pole: f64,
    /// |λ⁻¹-coefficient of the gauged 12 entry at w = 0|.
    pub lambda_minus_one_term: f64,
    /// |b_j(0)| and |1 − a_j(0)|, the quantities the gauge divides by.
    pub b_at_zero: f64,
    pub one_minus_a_at_zero: f64,
}

/// Diagnostics of the local branch gauge at p_j on the (k+1)-fold cover.
pub fn local_branch_gauge(p: &PotentialParams, j: usize, k: usize, tol: f64) -> Result<BranchDiagnostics> {
    let (a0, b0, _) = p.residue_data(j, ZERO);
    if b0.norm() <= tol || (ONE - a0).norm() <= tol {
        return Err(DpwError::DegenerateGauge(format!("b_j(0) = {b0}, a_j(0) = {a0}")));
    }
    // the gauge is a power series in λ; sample a circle well inside its disc of validity
    let lam_radius = 0.25;
    let lam_samples = 32;
    let w_radius = 0.3f64.powf(1.0 / (k + 1) as f64);
    let mut max_pole = 0.0f64;
    let mut lm1 = ZERO;
    for i in 0..lam_samples {
        let lam = C64::from_polar(lam_radius, 2.0 * PI * (i as f64 + 0.5) / lam_samples as f64);
        let f = |w: C64| gauged_at_branch_point(p, j, k, w, lam);
        let poles = pole_coefficients(f, w_radius, 3, 128);
        for c in &poles {
            max_pole = max_pole.max(c.max_abs());
        }
        // w⁰ coefficient by the same contour
        let mut c0 = Mat2::zero();
        for s in 0..128 {
            let w = C64::from_polar(w_radius, 2.0 * PI * (s as f64 + 0.5) / 128.0);
            c0 = c0 + f(w);
        }
        lm1 += c0.0[0][1] * lam / 128.0;
    }
    Ok(BranchDiagnostics {
        max_pole,
        lambda_minus_one_term: (lm1 / lam_samples as f64).norm(),
        b_at_zero: b0.norm(),
        one_minus_a_at_zero: (ONE - a0).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g0_regularizes_the_nilpotent_part() {
        for m in 1..=3 {
            let p = PotentialParams::initial(m, 4, 2.0);
            let z = C64::new(0.7, -1.3);
            let lam = C64::from_polar(1.0, 0.3);
            let eta = |z: C64, l: C64| p.at_lambda(l).eta(z);
            let g = |z: C64, _l: C64| gauge_zero(m, 1.0, z);
            let gauged = apply_gauge_with_derivative(eta, g, |z, _| gauge_s_derivative(m, z));
            let v = gauged(z, lam).unwrap();
            let expect = Mat2::new(ZERO, ZERO, z.powi(-(m as i32) - 1) * m as f64, ZERO);
            assert!((v - expect).max_abs() < 1e-13);
            let diffed = apply_gauge(eta, g, 1.0)(z, lam).unwrap();
            assert!((diffed - expect).max_abs() < 1e-9);
        }
    }

    #[test]
    fn identity_gauge_is_trivial() {
        let p = PotentialParams::initial(2, 4, 2.0);
        let z = C64::new(0.3, 0.2);
        let lam = C64::from_polar(1.0, 1.1);
        let eta = |z: C64, l: C64| p.at_lambda(l).eta(z);
        let v = apply_gauge(eta, |_, _| Mat2::identity(), 1.0)(z, lam).unwrap();
        assert!((v - eta(z, lam)).max_abs() < 1e-14);
    }

    #[test]
    fn singular_gauge_is_rejected() {
        let eta = |_: C64, _: C64| Mat2::zero();
        let g = |_: C64, _: C64| Mat2::zero();
        let r = apply_gauge(eta, g, 1.0)(ONE, ONE);
        assert!(matches!(r, Err(DpwError::NonInvertibleGauge(_))));
    }

    #[test]
    fn branch_gauge_has_unit_determinant() {
        let p = PotentialParams::initial(1, 4, 2.0);
        let lam = C64::new(0.1, 0.05);
        let pm = branch_gauge_matrix(&p, 0, lam);
        assert!((pm.det() - ONE).norm() < 1e-14);
    }
}
