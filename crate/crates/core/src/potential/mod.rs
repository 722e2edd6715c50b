//! The symmetric potential family on the plane punctured at the n = 2m+2 roots of unity.
//!
//! η_t = [[0, 0], [m·r·z^{m−1}, 0]]dz + t·Σ_j A_j/(z − p_j) dz with
//! A_j = [[a_j, λ⁻¹b_j], [λc_j, −a_j]], p_j = e^{2πij/n}, and residues transported
//! by A_{j+1}(λ) = D⁻¹A_j(−λ)D.

pub mod gauge;

use crate::error::{DpwError, Result};
use crate::linalg::{Mat2, C64, ONE, ZERO};
use crate::loop_algebra::{MatrixLoop, ScalarLoop};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Minimal distance to a puncture below which evaluation is refused.
pub const PUNCTURE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub m: usize,
    pub t: f64,
    pub r: f64,
    pub a: ScalarLoop,
    pub b: ScalarLoop,
    pub c: ScalarLoop,
}

impl PotentialParams {
    /// The t = 0 point: r = 1, a = λ, b = (λ² − 1)/2, c = −2.
    pub fn initial(m: usize, degree: usize, rho: f64) -> Self {
        assert!(m >= 1 && degree >= 2);
        PotentialParams {
            m,
            t: 0.0,
            r: 1.0,
            a: ScalarLoop::from_real_positive(&[0.0, 1.0], degree, rho),
            b: ScalarLoop::from_real_positive(&[-0.5, 0.0, 0.5], degree, rho),
            c: ScalarLoop::from_real_positive(&[-2.0], degree, rho),
        }
    }

    pub fn n(&self) -> usize {
        2 * self.m + 2
    }

    pub fn degree(&self) -> usize {
        self.a.degree()
    }

    pub fn rho(&self) -> f64 {
        self.a.rho()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(DpwError::InvalidParams("m must be at least 1".into()));
        }
        for (name, f) in [("a", &self.a), ("b", &self.b), ("c", &self.c)] {
            if !f.is_nonnegative(0.0) {
                return Err(DpwError::InvalidParams(format!("{name} has negative Fourier modes")));
            }
            if !f.is_real(0.0) {
                return Err(DpwError::InvalidParams(format!("{name} has non-real coefficients")));
            }
            if f.degree() != self.a.degree() || f.rho() != self.a.rho() {
                return Err(DpwError::InvalidParams(format!("{name} has mismatched degree or weight")));
            }
        }
        Ok(())
    }

    pub fn puncture(&self, j: usize) -> C64 {
        puncture(self.n(), j)
    }

    /// D = diag(e^{iπm/n}, e^{−iπm/n}).
    pub fn d_matrix(&self) -> Mat2 {
        let phase = PI * self.m as f64 / self.n() as f64;
        Mat2::diag(C64::from_polar(1.0, phase), C64::from_polar(1.0, -phase))
    }

    /// Residue data (a_j, b_j, c_j) at λ.
    pub fn residue_data(&self, j: usize, lambda: C64) -> (C64, C64, C64) {
        let sign = if j % 2 == 0 { ONE } else { -ONE };
        let l = lambda * sign;
        let p = self.puncture(j);
        (self.a.eval_unchecked(l), p * self.b.eval_unchecked(l), p.conj() * self.c.eval_unchecked(l))
    }

    /// A_j(λ) = [[a_j, λ⁻¹b_j], [λc_j, −a_j]].
    pub fn residue_matrix(&self, j: usize, lambda: C64) -> Mat2 {
        let (a, b, c) = self.residue_data(j, lambda);
        Mat2::new(a, b / lambda, lambda * c, -a)
    }

    /// A_j as a matrix loop (degree one above the parameter degree).
    pub fn residue_loop(&self, j: usize) -> MatrixLoop {
        let d = self.degree();
        let (rho, n) = (self.rho(), self.n());
        let p = puncture(n, j);
        let sign = |k: i32| if j % 2 == 1 && k % 2 != 0 { -1.0 } else { 1.0 };
        let mut e = [
            ScalarLoop::zeros(d + 1, rho),
            ScalarLoop::zeros(d + 1, rho),
            ScalarLoop::zeros(d + 1, rho),
            ScalarLoop::zeros(d + 1, rho),
        ];
        for k in 0..=d as i32 {
            let s = sign(k);
            e[0].set(k, self.a.coeff(k) * s);
            e[3].set(k, -self.a.coeff(k) * s);
            e[1].set(k - 1, p * self.b.coeff(k) * s);
            e[2].set(k + 1, p.conj() * self.c.coeff(k) * s);
        }
        let [a, b, c, dd] = e;
        MatrixLoop::new(a, b, c, dd)
    }

    /// Pointwise-in-λ data used by the integrators.
    pub fn at_lambda(&self, lambda: C64) -> PotentialAtLambda {
        PotentialAtLambda {
            m: self.m,
            r: self.r,
            t: self.t,
            lambda,
            a: [self.a.eval_unchecked(lambda), self.a.eval_unchecked(-lambda)],
            b: [self.b.eval_unchecked(lambda), self.b.eval_unchecked(-lambda)],
            c: [self.c.eval_unchecked(lambda), self.c.eval_unchecked(-lambda)],
        }
    }

    /// 𝓚 − 1 = (a⁰)² + b⁰c⁰ − 1.
    pub fn k_residual(&self) -> f64 {
        let (a0, b0, c0) = (self.a.coeff(0).re, self.b.coeff(0).re, self.c.coeff(0).re);
        a0 * a0 + b0 * c0 - 1.0
    }
}

pub fn puncture(n: usize, j: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)
}

/// Parameters frozen at one spectral value λ.
#[derive(Debug, Clone, Copy)]
pub struct PotentialAtLambda {
    pub m: usize,
    pub r: f64,
    pub t: f64,
    pub lambda: C64,
    /// Values at λ and −λ.
    pub a: [C64; 2],
    pub b: [C64; 2],
    pub c: [C64; 2],
}

impl PotentialAtLambda {
    /// Closed-form sums (α, β, γ) with Σ_j A_j/(z − p_j) = [[α, λ⁻¹β], [λγ, −α]].
    #[inline]
    pub fn sums(&self, z: C64) -> (C64, C64, C64) {
        let m = self.m as i32;
        let q = m + 1;
        let half_n = q as f64;
        let zm1 = if m == 1 { ONE } else { z.powi(m - 1) };
        let zm = zm1 * z;
        let zq = zm * z;
        let e = (zq - ONE).inv();
        let o = (zq + ONE).inv();
        let alpha = zm * half_n * (self.a[0] * e + self.a[1] * o);
        let beta = (self.b[0] * e - self.b[1] * o) * half_n;
        let gamma = zm1 * half_n * (self.c[0] * e + self.c[1] * o);
        (alpha, beta, gamma)
    }

    /// η/dz at z.
    pub fn eta(&self, z: C64) -> Mat2 {
        let (al, be, ga) = self.sums(z);
        let t = self.t;
        let nil = z.powi(self.m as i32 - 1) * (self.m as f64 * self.r);
        Mat2::new(al * t, be * t / self.lambda, nil + ga * self.lambda * t, -al * t)
    }

    /// Q = Φ₀·A·Φ₀⁻¹ with Φ₀ = [[1, 0], [r·z^m, 1]] and A = Σ_j A_j/(z − p_j).
    #[inline]
    pub fn conjugated_sum(&self, z: C64) -> Mat2 {
        let (al, be, ga) = self.sums(z);
        let bp = be / self.lambda;
        let gp = ga * self.lambda;
        let u = z.powi(self.m as i32) * self.r;
        let d = al - u * bp;
        Mat2::new(d, bp, u * (al + al) + gp - u * u * bp, -d)
    }
}

/// η/dz at z as a matrix loop in λ.
pub fn build_potential(params: &PotentialParams, z: C64) -> Result<PotentialEvaluation> {
    let n = params.n();
    for j in 0..n {
        if (z - puncture(n, j)).norm() < PUNCTURE_GUARD {
            return Err(DpwError::AtPuncture { index: j, z: format!("{z}") });
        }
    }
    let d = params.degree();
    let rho = params.rho();
    let m = params.m as i32;
    let q = m + 1;
    let half_n = q as f64;
    let e = (z.powi(q) - ONE).inv();
    let o = (z.powi(q) + ONE).inv();
    let zm1 = z.powi(m - 1);
    let zm = zm1 * z;
    let t = params.t;
    let mut ent = [
        ScalarLoop::zeros(d + 1, rho),
        ScalarLoop::zeros(d + 1, rho),
        ScalarLoop::zeros(d + 1, rho),
        ScalarLoop::zeros(d + 1, rho),
    ];
    for k in 0..=d as i32 {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        let al = zm * half_n * params.a.coeff(k) * (e + o * s);
        let be = half_n * params.b.coeff(k) * (e - o * s);
        let ga = zm1 * half_n * params.c.coeff(k) * (e + o * s);
        ent[0].set(k, al * t);
        ent[3].set(k, -al * t);
        ent[1].set(k - 1, be * t);
        ent[2].set(k + 1, ga * t);
    }
    ent[2].set(0, zm1 * (params.m as f64 * params.r));
    let [a, b, c, dd] = ent;
    Ok(PotentialEvaluation { value: MatrixLoop::new(a, b, c, dd), z })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialEvaluation {
    pub value: MatrixLoop,
    pub z: C64,
}

/// Direct evaluation of η/dz by summing over all punctures.
pub fn naive_potential(params: &PotentialParams, z: C64, lambda: C64) -> Mat2 {
    let mut acc = Mat2::zero();
    for j in 0..params.n() {
        acc = acc + params.residue_matrix(j, lambda).scale((z - params.puncture(j)).inv());
    }
    let nil = Mat2::new(ZERO, ZERO, z.powi(params.m as i32 - 1) * (params.m as f64 * params.r), ZERO);
    nil + acc.scale(params.t.into())
}

/// conj(η(z̄, λ̄)); equals η(z, λ) for real coefficient loops.
pub fn sigma_conjugate(params: &PotentialParams, z: C64, lambda: C64) -> Mat2 {
    params.at_lambda(lambda.conj()).eta(z.conj()).conj()
}
