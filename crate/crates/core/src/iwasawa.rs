//! Iwasawa splitting Φ = F·B of loops into a unitary and a positive factor.
//!
//! The positive factor comes from the spectral factorization P = Φ*Φ = B*B. With
//! X = B⁻¹ the loop P·X has no positive powers, so the normalized Y = X·(B₀†)⁻¹
//! solves the block Toeplitz system Σ_l P_{j−l} Y_l = δ_{j0}·Id. Solving it on
//! j, l ∈ [0, K] is exact whenever X is a polynomial of degree ≤ K.

use crate::error::{DpwError, Result};
use crate::linalg::{Mat2, C64, ONE, ZERO};
use crate::loop_algebra::{MatrixLoop, ScalarLoop};
use nalgebra::DMatrix;
use twofloat::TwoFloat;
use serde::{Deserialize, Serialize};

/// Iterative-refinement passes on the block Toeplitz solve.
const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IwasawaResult {
    #[serde(rename = "F")]
    pub f: MatrixLoop,
    #[serde(rename = "B")]
    pub b: MatrixLoop,
    pub residual: f64,
    pub unitarity_defect: f64,
}

/// Positive factor in coefficient form: X = B⁻¹ = Σ_l X_l λ^l.
#[derive(Debug, Clone)]
pub struct PositiveFactor {
    /// Coefficients of X; det X = 1 up to the forward error of the Toeplitz solve.
    pub x: Vec<Mat2>,
    /// B(0), upper triangular with positive real diagonal.
    pub b0: Mat2,
    /// Smallest pivot magnitude relative to the largest in the Toeplitz solve.
    pub conditioning: f64,
}

impl PositiveFactor {
    /// X(λ) rescaled to unit determinant.
    pub fn eval_x(&self, lambda: C64) -> Mat2 {
        let mut acc = Mat2::zero();
        for xl in self.x.iter().rev() {
            acc = acc.scale(lambda) + *xl;
        }
        acc.scale(acc.det().sqrt().inv())
    }

    /// B(λ) = X(λ)⁻¹.
    pub fn eval_b(&self, lambda: C64) -> Mat2 {
        let x = self.eval_x(lambda);
        x.adj().scale(x.det().inv())
    }
}

/// Finite-dimensional splitting A = U·R, U ∈ SU(2), R upper triangular with R₂₂ = 1/R₁₁ > 0.
pub fn finite_dim_iwasawa(a: &Mat2) -> Result<(Mat2, Mat2)> {
    let a1 = [a.0[0][0], a.0[1][0]];
    let a2 = [a.0[0][1], a.0[1][1]];
    let r11 = (a1[0].norm_sqr() + a1[1].norm_sqr()).sqrt();
    if r11 == 0.0 {
        return Err(DpwError::NotPositiveDefinite("zero first column".into()));
    }
    let u1 = [a1[0] / r11, a1[1] / r11];
    let r12 = u1[0].conj() * a2[0] + u1[1].conj() * a2[1];
    let r22 = 1.0 / r11;
    let u2 = [(a2[0] - u1[0] * r12) / r22, (a2[1] - u1[1] * r12) / r22];
    let u = Mat2::new(u1[0], u2[0], u1[1], u2[1]);
    let r = Mat2::new(r11.into(), r12, ZERO, r22.into());
    Ok((u, r))
}

/// Lower-triangular L with H = L·L†, positive diagonal.
fn cholesky2(h: &Mat2) -> Result<Mat2> {
    let h11 = h.0[0][0].re;
    if !(h11 > 0.0) {
        return Err(DpwError::NotPositiveDefinite(format!("leading entry {h11:.3e}")));
    }
    let l11 = h11.sqrt();
    let l21 = h.0[1][0] / l11;
    let rest = h.0[1][1].re - l21.norm_sqr();
    if !(rest > 0.0) {
        return Err(DpwError::NotPositiveDefinite(format!("Schur complement {rest:.3e}")));
    }
    Ok(Mat2::new(l11.into(), ZERO, l21, rest.sqrt().into()))
}

/// Solves for the positive factor given Fourier coefficients P_s, s = −K..=K, of P = Φ*Φ.
///
/// `p(s)` returns P_s. Rows and unknowns are rescaled by `rho_w^j` so the solve is
/// balanced in the ρ-weighted norm.
pub fn positive_factor(p: impl Fn(i32) -> Mat2, k: usize, rho_w: f64) -> Result<PositiveFactor> {
    positive_factor_split(|s| (p(s), Mat2::zero()), k, rho_w)
}

/// As [`positive_factor`] with P_s given as an unevaluated sum hi + lo, which the
/// refinement residuals honour.
fn positive_factor_split(p: impl Fn(i32) -> (Mat2, Mat2), k: usize, rho_w: f64) -> Result<PositiveFactor> {
    let dim = 2 * (k + 1);
    let mut t = DMatrix::<C64>::zeros(dim, dim);
    let mut t_lo = DMatrix::<C64>::zeros(dim, dim);
    for j in 0..=k {
        for l in 0..=k {
            let s = j as i32 - l as i32;
            let w = rho_w.powi(s);
            let (hi, lo) = p(s);
            for a in 0..2 {
                for b in 0..2 {
                    let split = |h: f64, l: f64| {
                        let v = TwoFloat::new_mul(h, w) + l * w;
                        (v.hi(), v.lo())
                    };
                    let (re, re_lo) = split(hi.0[a][b].re, lo.0[a][b].re);
                    let (im, im_lo) = split(hi.0[a][b].im, lo.0[a][b].im);
                    t[(2 * j + a, 2 * l + b)] = C64::new(re, im);
                    t_lo[(2 * j + a, 2 * l + b)] = C64::new(re_lo, im_lo);
                }
            }
        }
    }
    let mut rhs = DMatrix::<C64>::zeros(dim, 2);
    rhs[(0, 0)] = ONE;
    rhs[(1, 1)] = ONE;
    let lu = t.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..dim).map(|i| u[(i, i)].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let conditioning = if dmax > 0.0 { dmin / dmax } else { 0.0 };
    let mut sol = lu
        .solve(&rhs)
        .ok_or_else(|| DpwError::NotPositiveDefinite("block Toeplitz system is singular".into()))?;
    // the f64 forward error is far above the conditioning of the factor; refine with
    // residuals accumulated in double-double
    for _ in 0..REFINEMENT_STEPS {
        let r = residual_dd(&t, &t_lo, &sol, &rhs);
        match lu.solve(&r) {
            Some(d) => sol += d,
            None => break,
        }
    }
    let y: Vec<Mat2> = (0..=k)
        .map(|l| {
            let s = C64::new(rho_w.powi(-(l as i32)), 0.0);
            Mat2::new(sol[(2 * l, 0)], sol[(2 * l, 1)], sol[(2 * l + 1, 0)], sol[(2 * l + 1, 1)]).scale(s)
        })
        .collect();
    let y0 = y[0];
    let y0h = (y0 + y0.dagger()).scale(C64::new(0.5, 0.0));
    let y0inv = y0h
        .inverse()
        .ok_or_else(|| DpwError::NotPositiveDefinite("Y_0 is singular".into()))?;
    let lo = cholesky2(&y0inv)?;
    let mut x: Vec<Mat2> = y.iter().map(|yl| *yl * lo).collect();
    // Y₀·L equals L^{−†} exactly; use the triangular form so B(0) stays normalized
    x[0] = lo.dagger().inverse().ok_or_else(|| DpwError::NotPositiveDefinite("singular B(0)".into()))?;
    // det X ≡ 1 holds up to the solve's forward error; pin det X(0) = 1 exactly
    let s = x[0].det().sqrt().inv();
    let x: Vec<Mat2> = x.iter().map(|xl| xl.scale(s)).collect();
    let b0 = x[0].adj();
    Ok(PositiveFactor { x, b0, conditioning })
}

/// rhs − (T + T_lo)·sol with each entry accumulated in double-double before rounding.
fn residual_dd(t: &DMatrix<C64>, t_lo: &DMatrix<C64>, sol: &DMatrix<C64>, rhs: &DMatrix<C64>) -> DMatrix<C64> {
    let mut r = DMatrix::<C64>::zeros(rhs.nrows(), rhs.ncols());
    for c in 0..rhs.ncols() {
        for i in 0..t.nrows() {
            let mut re = TwoFloat::from(rhs[(i, c)].re);
            let mut im = TwoFloat::from(rhs[(i, c)].im);
            for j in 0..t.ncols() {
                let (a, b) = (t[(i, j)], sol[(j, c)]);
                re -= TwoFloat::new_mul(a.re, b.re);
                re += TwoFloat::new_mul(a.im, b.im);
                im -= TwoFloat::new_mul(a.re, b.im);
                im -= TwoFloat::new_mul(a.im, b.re);
                let c = t_lo[(i, j)] * b;
                re -= c.re;
                im -= c.im;
            }
            r[(i, c)] = C64::new(re.into(), im.into());
        }
    }
    r
}

/// Coefficients 0..len of the power series 1/det X for a polynomial loop X.
fn inverse_det_series(x: &[Mat2], len: usize) -> Vec<C64> {
    let k = x.len() - 1;
    let mut d = vec![ZERO; 2 * k + 1];
    for (i, xi) in x.iter().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            d[i + j] += xi.0[0][0] * xj.0[1][1] - xi.0[0][1] * xj.0[1][0];
        }
    }
    let mut h = vec![ZERO; len + 1];
    h[0] = d[0].inv();
    for kk in 1..=len {
        let mut acc = ZERO;
        for j in 1..=kk.min(2 * k) {
            acc += d[j] * h[kk - j];
        }
        h[kk] = -acc * h[0];
    }
    h
}

/// Fourier coefficients of P = Φ*Φ for a coefficient loop Φ.
fn gram_coeffs(phi: &MatrixLoop) -> impl Fn(i32) -> (Mat2, Mat2) + '_ {
    let n = phi.degree() as i32;
    // P_s is far smaller than its terms at high |s|; accumulate exactly before rounding
    move |s: i32| {
        let mut acc = [[(TwoFloat::from(0.0), TwoFloat::from(0.0)); 2]; 2];
        for j in -n..=n {
            let i = j - s;
            if i.abs() <= n {
                let (x, y) = (phi.coeff(i), phi.coeff(j));
                for a in 0..2 {
                    for b in 0..2 {
                        for c in 0..2 {
                            // conj(x_ca)·y_cb
                            let (u, v) = (x.0[c][a], y.0[c][b]);
                            let e = &mut acc[a][b];
                            e.0 += TwoFloat::new_mul(u.re, v.re);
                            e.0 += TwoFloat::new_mul(u.im, v.im);
                            e.1 += TwoFloat::new_mul(u.re, v.im);
                            e.1 -= TwoFloat::new_mul(u.im, v.re);
                        }
                    }
                }
            }
        }
        let part = |f: fn(&TwoFloat) -> f64| {
            let c = |e: (TwoFloat, TwoFloat)| C64::new(f(&e.0), f(&e.1));
            Mat2::new(c(acc[0][0]), c(acc[0][1]), c(acc[1][0]), c(acc[1][1]))
        };
        (part(TwoFloat::hi), part(TwoFloat::lo))
    }
}

/// Iwasawa splitting of a Laurent-polynomial loop with unit determinant.
pub fn iwasawa_decompose(phi: &MatrixLoop) -> Result<IwasawaResult> {
    iwasawa_decompose_weighted(phi, 1.0)
}

/// As [`iwasawa_decompose`], with the Toeplitz solve balanced for weight `rho_w`.
pub fn iwasawa_decompose_weighted(phi: &MatrixLoop, rho_w: f64) -> Result<IwasawaResult> {
    let n = phi.degree();
    let rho = phi.rho();
    let k = 2 * n;
    let pf = positive_factor_split(gram_coeffs(phi), k, rho_w)?;

    let entry = |m: &[Mat2], i: usize, j: usize, deg: usize, shift: i32| {
        let mut s = ScalarLoop::zeros(deg, rho);
        for (l, ml) in m.iter().enumerate() {
            let idx = l as i32 + shift;
            if idx.unsigned_abs() as usize <= deg {
                s.set(idx, ml.0[i][j]);
            }
        }
        s
    };
    let to_loop = |m: &[Mat2], deg: usize, shift: i32| {
        MatrixLoop::new(
            entry(m, 0, 0, deg, shift),
            entry(m, 0, 1, deg, shift),
            entry(m, 1, 0, deg, shift),
            entry(m, 1, 1, deg, shift),
        )
    };
    // B = adj X keeps the exact degree K; F = Φ·X/det X absorbs the determinant defect
    let b_coeffs: Vec<Mat2> = pf.x.iter().map(|x| x.adj()).collect();
    let b = to_loop(&b_coeffs, k, 0);
    let h = inverse_det_series(&pf.x, 2 * k);
    let mut xh = vec![Mat2::zero(); 3 * k + 1];
    for (i, xi) in pf.x.iter().enumerate() {
        for (j, hj) in h.iter().enumerate() {
            xh[i + j] = xh[i + j] + xi.scale(*hj);
        }
    }
    let kx = xh.len() - 1;

    // F = Φ·X spans powers −N..=N+deg X
    let mut f_coeffs = vec![Mat2::zero(); 2 * n + kx + 1];
    for i in -(n as i32)..=n as i32 {
        let pi = phi.coeff(i);
        for (l, xl) in xh.iter().enumerate() {
            let idx = (i + n as i32) as usize + l;
            f_coeffs[idx] = f_coeffs[idx] + pi * *xl;
        }
    }
    let f = to_loop(&f_coeffs, n + kx, -(n as i32));

    let fb = f.mul_full(&b.with_degree(n + kx))?;
    let residual = fb.sub(&phi.with_degree(fb.degree()))?.norm_rho();
    let unitarity_defect = f.unitarity_defect(4 * (n + kx) + 4)?;
    Ok(IwasawaResult { f, b, residual, unitarity_defect })
}

/// Positive factor of a loop known by samples on the L-point grid e^{2πij/L}.
///
/// Returns X = B⁻¹ with K coefficients beyond the constant; the unitary factor at a
/// grid point is Φ(λ_j)·X(λ_j).
pub fn positive_factor_from_samples(samples: &[Mat2], k: usize, rho_w: f64) -> Result<PositiveFactor> {
    let l = samples.len();
    crate::loop_algebra::check_grid(l, k)?;
    let grams: Vec<Mat2> = samples.iter().map(|s| s.dagger() * *s).collect();
    let mut entries = Vec::with_capacity(4);
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let v: Vec<C64> = grams.iter().map(|g| g.0[i][j]).collect();
        entries.push(ScalarLoop::from_grid(&v, k, 1.0)?);
    }
    let p = |s: i32| Mat2::new(entries[0].coeff(s), entries[1].coeff(s), entries[2].coeff(s), entries[3].coeff(s));
    positive_factor(p, k, rho_w)
}
