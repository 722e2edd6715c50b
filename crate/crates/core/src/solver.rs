//! Newton/continuation solve of the monodromy problem, κ_m, and the derivative check.
//!
//! Unknowns are the real coefficients a_0..a_N, b_0..b_{N+1}, c_0..c_{N−1} and r. The
//! degree band of b is shifted by one relative to a and c: the degree-k block of the
//! linearization at t = 0 couples (a_k, b_{k+1}, c_{k−1}), so this truncation keeps
//! the Newton system square and nonsingular.

use crate::error::{DpwError, Result};
use crate::linalg::{Mat2, C64};
use crate::loop_algebra::{grid_points, ScalarLoop};
use crate::monodromy::{monodromy_matrix, monodromy_w_samples, record_from_w, MonodromyRecord};
use crate::ode::OdeOptions;
use crate::potential::PotentialParams;
use crate::quadrature::integrate_adaptive;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub trunc_degree: usize,
    pub rho: f64,
    pub lambda_grid: usize,
    pub ode: OdeOptions,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Newton steps between Jacobian refreshes.
    pub jacobian_refresh: usize,
    pub fd_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            trunc_degree: 24,
            rho: 2.0,
            lambda_grid: 96,
            ode: OdeOptions::default(),
            newton_tol: 1e-10,
            max_iter: 40,
            jacobian_refresh: 3,
            fd_step: 1e-7,
        }
    }
}

impl SolverConfig {
    /// Degree at which parameter loops are stored (b reaches N + 1).
    pub fn param_degree(&self) -> usize {
        self.trunc_degree + 1
    }

    pub fn dimension(&self) -> usize {
        3 * self.trunc_degree + 4
    }
}

/// κ_m = (n/2)∫₀¹ (1 − x^m)²/(1 − x^n) dx, n = 2m + 2.
///
/// The integrand is rewritten as (1 − x)(Σ_{i<m} x^i)²/(Σ_{i<n} x^i), which has no
/// cancellation near x = 1.
pub fn kappa(m: usize) -> f64 {
    assert!(m >= 1);
    let n = 2 * m + 2;
    let f = |x: f64| {
        let num: f64 = (0..m).fold(0.0, |acc, _| acc * x + 1.0);
        let den: f64 = (0..n).fold(0.0, |acc, _| acc * x + 1.0);
        (1.0 - x) * num * num / den
    };
    let v = integrate_adaptive(f, 0.0, 1.0, 1e-15).expect("smooth integrand");
    v * n as f64 / 2.0
}

/// Flattened real unknowns (a_0..a_N, b_0..b_{N+1}, c_0..c_{N−1}, r).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnknownVector(pub Vec<f64>);

impl UnknownVector {
    pub fn from_params(p: &PotentialParams, n: usize) -> Self {
        let mut v = Vec::with_capacity(3 * n + 4);
        v.extend((0..=n as i32).map(|k| p.a.coeff(k).re));
        v.extend((0..=n as i32 + 1).map(|k| p.b.coeff(k).re));
        v.extend((0..n as i32).map(|k| p.c.coeff(k).re));
        v.push(p.r);
        UnknownVector(v)
    }

    pub fn to_params(&self, m: usize, t: f64, n: usize, rho: f64) -> PotentialParams {
        let v = &self.0;
        let d = n + 1;
        PotentialParams {
            m,
            t,
            r: v[3 * n + 3],
            a: ScalarLoop::from_real_positive(&v[0..=n], d, rho),
            b: ScalarLoop::from_real_positive(&v[n + 1..2 * n + 3], d, rho),
            c: ScalarLoop::from_real_positive(&v[2 * n + 3..3 * n + 3], d, rho),
        }
    }
}

/// Real flattening of (𝓕⁺, 𝓖⁺, (𝓖⁻)*, 𝓖⁰, 𝓗₁, 𝓗₂, 𝓚 − 1), each band truncated at degree N.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualVector {
    pub values: Vec<f64>,
    /// Largest imaginary part discarded by the real flattening.
    pub imaginary_defect: f64,
}

impl ResidualVector {
    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.values)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub fn flatten_residuals(rec: &MonodromyRecord, n: usize) -> ResidualVector {
    let r = &rec.residuals;
    let mut vals = Vec::with_capacity(3 * n + 4);
    let mut imag = 0.0f64;
    let mut push = |c: C64, vals: &mut Vec<f64>| {
        imag = imag.max(c.im.abs());
        vals.push(c.re);
    };
    for k in 1..=n as i32 {
        push(r.f.coeff(k), &mut vals);
    }
    for k in 1..=n as i32 {
        push(r.g.coeff(k), &mut vals);
    }
    for k in 1..=n as i32 {
        push(r.g.coeff(-k).conj(), &mut vals);
    }
    push(r.g.coeff(0), &mut vals);
    push(r.h1, &mut vals);
    push(r.h2, &mut vals);
    vals.push(r.k_minus_1);
    // 𝓕⁰ is not an unknown-matched equation; it vanishes by symmetry and is monitored here
    imag = imag.max(r.f.coeff(0).norm());
    ResidualVector { values: vals, imaginary_defect: imag }
}

pub fn residual_vector(p: &PotentialParams, cfg: &SolverConfig) -> Result<ResidualVector> {
    let rec = monodromy_matrix(p, 0, cfg.lambda_grid, &cfg.ode)?;
    Ok(flatten_residuals(&rec, cfg.trunc_degree))
}

/// Tangent of the solution curve at t = 0: a′ = (1 − λ²)κ_m, b′ = (λ − λ³)κ_m, c′ = 0, r′ = 0.
pub fn first_order_tangent(m: usize, n: usize) -> UnknownVector {
    let k = kappa(m);
    let mut v = vec![0.0; 3 * n + 4];
    v[0] = k;
    v[2] = -k;
    v[n + 1 + 1] = k;
    v[n + 1 + 3] = -k;
    UnknownVector(v)
}

/// x₀ + t·x′(0).
pub fn predictor(m: usize, t: f64, cfg: &SolverConfig) -> PotentialParams {
    let n = cfg.trunc_degree;
    let x0 = UnknownVector::from_params(&PotentialParams::initial(m, cfg.param_degree(), cfg.rho), n);
    let tan = first_order_tangent(m, n);
    let v: Vec<f64> = x0.0.iter().zip(&tan.0).map(|(a, b)| a + t * b).collect();
    UnknownVector(v).to_params(m, t, n, cfg.rho)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub t: f64,
    pub iterations: usize,
    pub residual_norm: f64,
    pub imaginary_defect: f64,
    pub jacobian_evaluations: usize,
    pub residual_evaluations: usize,
    /// Ratio of largest to smallest singular value of the last fresh Jacobian.
    pub jacobian_condition: f64,
}

/// Newton solver state. The Jacobian is kept between calls and reused as a chord
/// until convergence slows.
pub struct Solver {
    pub cfg: SolverConfig,
    jac: Option<DMatrix<f64>>,
    condition: f64,
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Self {
        Solver { cfg, jac: None, condition: f64::NAN }
    }

    pub fn clear_jacobian(&mut self) {
        self.jac = None;
    }

    fn residual(&self, m: usize, t: f64, x: &[f64]) -> Result<ResidualVector> {
        let p = UnknownVector(x.to_vec()).to_params(m, t, self.cfg.trunc_degree, self.cfg.rho);
        residual_vector(&p, &self.cfg)
    }

    /// Forward-difference Jacobian at x; columns are evaluated in parallel.
    pub fn jacobian(&self, m: usize, t: f64, x: &[f64], f0: &[f64]) -> Result<DMatrix<f64>> {
        let dim = x.len();
        let cols: Vec<Result<Vec<f64>>> = (0..dim)
            .into_par_iter()
            .map(|i| {
                let h = self.cfg.fd_step * (1.0 + x[i].abs());
                let mut xp = x.to_vec();
                xp[i] += h;
                let fp = self.residual(m, t, &xp)?;
                Ok(fp.values.iter().zip(f0).map(|(a, b)| (a - b) / h).collect())
            })
            .collect();
        let mut j = DMatrix::<f64>::zeros(f0.len(), dim);
        for (i, c) in cols.into_iter().enumerate() {
            let c = c?;
            for (r, v) in c.into_iter().enumerate() {
                j[(r, i)] = v;
            }
        }
        Ok(j)
    }

    fn refresh(&mut self, m: usize, t: f64, x: &[f64], f0: &[f64], report: &mut SolveReport) -> Result<()> {
        let j = self.jacobian(m, t, x, f0)?;
        report.jacobian_evaluations += 1;
        report.residual_evaluations += x.len();
        let sv = j.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > 1e-14 * smax) {
            return Err(DpwError::JacobianSingular(format!("singular values span [{smin:.3e}, {smax:.3e}]")));
        }
        self.condition = smax / smin;
        self.jac = Some(j);
        Ok(())
    }

    /// Damped chord/Newton iteration at fixed t from `guess`.
    pub fn solve_at_t(&mut self, m: usize, t: f64, guess: &PotentialParams) -> Result<(PotentialParams, SolveReport)> {
        let n = self.cfg.trunc_degree;
        let mut x = UnknownVector::from_params(guess, n).0;
        let mut f = self.residual(m, t, &x)?;
        let mut report = SolveReport { t, residual_evaluations: 1, ..Default::default() };
        let mut since_refresh = 0usize;
        let mut fresh = false;
        let mut force_refresh = self.jac.is_none();
        while f.inf_norm() > self.cfg.newton_tol {
            if report.iterations >= self.cfg.max_iter {
                return Err(DpwError::NoConvergence(format!(
                    "t = {t:.6e}: residual {:.3e} after {} iterations",
                    f.inf_norm(),
                    report.iterations
                )));
            }
            if force_refresh || since_refresh >= self.cfg.jacobian_refresh {
                self.refresh(m, t, &x, &f.values, &mut report)?;
                since_refresh = 0;
                fresh = true;
                force_refresh = false;
            }
            let j = self.jac.as_ref().expect("jacobian present");
            let rhs = DVector::from_column_slice(&f.values);
            let dx = j
                .clone()
                .lu()
                .solve(&rhs)
                .ok_or_else(|| DpwError::JacobianSingular("LU solve failed".into()))?;
            report.iterations += 1;
            since_refresh += 1;
            let f_norm = f.inf_norm();
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=8 {
                let xt: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a - step * d).collect();
                if let Ok(ft) = self.residual(m, t, &xt) {
                    report.residual_evaluations += 1;
                    if ft.inf_norm() < f_norm {
                        accepted = Some((xt, ft));
                        break;
                    }
                }
                step *= 0.5;
            }
            match accepted {
                Some((xt, ft)) => {
                    if ft.inf_norm() > 0.25 * f_norm && !fresh {
                        force_refresh = true;
                    }
                    fresh = false;
                    x = xt;
                    f = ft;
                }
                None if !fresh => {
                    force_refresh = true;
                }
                None => {
                    return Err(DpwError::NoConvergence(format!(
                        "t = {t:.6e}: line search failed at residual {f_norm:.3e}"
                    )));
                }
            }
        }
        report.residual_norm = f.inf_norm();
        report.imaginary_defect = f.imaginary_defect;
        report.jacobian_condition = self.condition;
        Ok((UnknownVector(x).to_params(m, t, n, self.cfg.rho), report))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub residual: f64,
    pub a0: f64,
    pub r: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationResult {
    pub params: PotentialParams,
    pub trace: Vec<TraceRow>,
    pub report: SolveReport,
}

/// Continues the solution from (0, x₀) to t = 1/(2k+2) in steps of at most 1/(4k).
pub fn continuation_solve(m: usize, k: usize, cfg: &SolverConfig) -> Result<ContinuationResult> {
    let target = 1.0 / (2.0 * k as f64 + 2.0);
    continuation_to(m, target, 1.0 / (4.0 * k.max(1) as f64), cfg, &mut Solver::new(*cfg))
}

/// Continuation to an arbitrary target with a maximal step; reuses `solver`'s Jacobian.
pub fn continuation_to(m: usize, target: f64, max_dt: f64, cfg: &SolverConfig, solver: &mut Solver) -> Result<ContinuationResult> {
    let n = cfg.trunc_degree;
    let steps = (target.abs() / max_dt).ceil().max(1.0);
    let mut dt = target / steps;
    let x0 = PotentialParams::initial(m, cfg.param_degree(), cfg.rho);
    let mut history: Vec<(f64, Vec<f64>)> = vec![(0.0, UnknownVector::from_params(&x0, n).0)];
    let mut trace = Vec::new();
    let mut last: Option<(PotentialParams, SolveReport)> = None;
    let mut t_cur = 0.0;
    while (target - t_cur).abs() > 1e-15 {
        let t_next = if (target - (t_cur + dt)) * target.signum() < 0.0 { target } else { t_cur + dt };
        let guess = if history.len() == 1 {
            predictor(m, t_next, cfg)
        } else {
            let (t1, x1) = &history[history.len() - 2];
            let (t2, x2) = &history[history.len() - 1];
            let s = (t_next - t2) / (t2 - t1);
            let v: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| b + s * (b - a)).collect();
            UnknownVector(v).to_params(m, t_next, n, cfg.rho)
        };
        match solver.solve_at_t(m, t_next, &guess) {
            Ok((p, rep)) => {
                trace.push(TraceRow {
                    t: t_next,
                    residual: rep.residual_norm,
                    a0: p.a.coeff(0).re,
                    r: p.r,
                    iterations: rep.iterations,
                });
                history.push((t_next, UnknownVector::from_params(&p, n).0));
                t_cur = t_next;
                last = Some((p, rep));
            }
            Err(e) => {
                dt *= 0.5;
                solver.clear_jacobian();
                if dt.abs() < 1e-4 * target.abs() {
                    let _ = e;
                    return Err(DpwError::ContinuationCeiling { reached: t_cur, target });
                }
            }
        }
    }
    let (params, report) = match last {
        Some(v) => v,
        None => (x0, SolveReport::default()),
    };
    Ok(ContinuationResult { params, trace, report })
}

/// Checks of a solved state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub m: usize,
    pub t: f64,
    pub residual_inf: f64,
    /// max_λ |det A_0(λ) + 1| over the grid.
    pub det_a0_defect: f64,
    /// max over j ∈ {0, 1} of |M_j(±1) − diag(e^{2πit}, e^{−2πit})^{±(−1)^j}|.
    pub sym_point_defect: f64,
    /// max_λ |M_1(λ) − D⁻¹M_0(−λ)D|.
    pub transport_defect: f64,
    /// max_λ |M(λ) − conj(M(λ̄))⁻¹|.
    pub reality_defect: f64,
    /// max_λ |det M̃ − 4π²| (eigenvalues ±2πi).
    pub eigenvalue_defect: f64,
    pub det_defect: f64,
    pub branch_warning: bool,
}

pub fn certify(p: &PotentialParams, cfg: &SolverConfig) -> Result<Certificate> {
    let l = cfg.lambda_grid;
    let grid = grid_points(l);
    let (w0, s0) = monodromy_w_samples(p, 0, l, &cfg.ode)?;
    let (w1, _) = monodromy_w_samples(p, 1, l, &cfg.ode)?;
    let rec0 = record_from_w(p, 0, &w0, s0)?;
    let residual_inf = flatten_residuals(&rec0, cfg.trunc_degree).inf_norm();
    let tc = C64::new(p.t, 0.0);
    let m0: Vec<Mat2> = w0.iter().map(|w| Mat2::identity() + w.scale(tc)).collect();
    let m1: Vec<Mat2> = w1.iter().map(|w| Mat2::identity() + w.scale(tc)).collect();

    let det_a0_defect = grid
        .iter()
        .map(|&lam| (p.residue_matrix(0, lam).det() + 1.0).norm())
        .fold(0.0, f64::max);

    let e = C64::from_polar(1.0, 2.0 * PI * p.t);
    let plus = Mat2::diag(e, e.conj());
    let minus = Mat2::diag(e.conj(), e);
    let h = l / 2;
    let sym_point_defect = [
        (m0[0] - plus).max_abs(),
        (m0[h] - minus).max_abs(),
        (m1[0] - minus).max_abs(),
        (m1[h] - plus).max_abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let d = p.d_matrix();
    let di = d.adj();
    let transport_defect = (0..l).map(|i| (m1[i] - di * m0[(i + h) % l] * d).max_abs()).fold(0.0, f64::max);

    // conj λ on the grid is index L − i
    let reality_defect = (0..l)
        .map(|i| {
            let mc = m0[(l - i) % l].conj();
            (m0[i] - mc.adj()).max_abs()
        })
        .fold(0.0, f64::max);

    let mt = rec0.mtilde.to_grid(l)?;
    let eigenvalue_defect = mt.iter().map(|x| (x.det() - 4.0 * PI * PI).norm()).fold(0.0, f64::max);
    Ok(Certificate {
        m: p.m,
        t: p.t,
        residual_inf,
        det_a0_defect,
        sym_point_defect,
        transport_defect,
        reality_defect,
        eigenvalue_defect,
        det_defect: rec0.det_defect,
        branch_warning: rec0.branch_warning,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub m: usize,
    pub kappa: f64,
    pub h: f64,
    /// Richardson-extrapolated central differences, coefficients k = 0..N (b to N+1).
    pub a_prime: Vec<f64>,
    pub b_prime: Vec<f64>,
    pub c_prime: Vec<f64>,
    pub r_prime: f64,
    pub a_deviation: f64,
    pub b_deviation: f64,
    pub c_deviation: f64,
    pub r_deviation: f64,
    /// Largest deviation of x(−t) from the λ ↦ −λ image of x(t).
    pub parity_deviation: f64,
    pub max_deviation: f64,
}

/// Image of x(t) under the time-parity map, i.e. the prediction for x(−t).
pub fn parity_image(x: &[f64], n: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    let sgn = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    for k in 0..=n {
        out[k] = -sgn(k) * x[k];
    }
    for k in 0..=n + 1 {
        out[n + 1 + k] = sgn(k) * x[n + 1 + k];
    }
    for k in 0..n {
        out[2 * n + 3 + k] = sgn(k) * x[2 * n + 3 + k];
    }
    out
}

/// Central differences of the solved family at ±h and ±h/2 with Richardson extrapolation.
pub fn derivative_check(m: usize, h: f64, cfg: &SolverConfig) -> Result<DerivativeReport> {
    let n = cfg.trunc_degree;
    let mut solver = Solver::new(*cfg);
    let mut solve = |t: f64| -> Result<Vec<f64>> {
        let (p, _) = solver.solve_at_t(m, t, &predictor(m, t, cfg))?;
        Ok(UnknownVector::from_params(&p, n).0)
    };
    let xp = solve(h)?;
    let xm = solve(-h)?;
    let xp2 = solve(h / 2.0)?;
    let xm2 = solve(-h / 2.0)?;
    let d1: Vec<f64> = xp.iter().zip(&xm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let d2: Vec<f64> = xp2.iter().zip(&xm2).map(|(a, b)| (a - b) / h).collect();
    let d: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let expect = first_order_tangent(m, n).0;
    let dev = |lo: usize, hi: usize| (lo..hi).map(|i| (d[i] - expect[i]).abs()).fold(0.0, f64::max);
    let a_deviation = dev(0, n + 1);
    let b_deviation = dev(n + 1, 2 * n + 3);
    let c_deviation = dev(2 * n + 3, 3 * n + 3);
    let r_deviation = dev(3 * n + 3, 3 * n + 4);
    let parity_deviation = parity_image(&xp, n)
        .iter()
        .zip(&xm)
        .chain(parity_image(&xp2, n).iter().zip(&xm2))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DerivativeReport {
        m,
        kappa: kappa(m),
        h,
        a_prime: d[0..=n].to_vec(),
        b_prime: d[n + 1..2 * n + 3].to_vec(),
        c_prime: d[2 * n + 3..3 * n + 3].to_vec(),
        r_prime: d[3 * n + 3],
        a_deviation,
        b_deviation,
        c_deviation,
        r_deviation,
        parity_deviation,
        max_deviation: a_deviation.max(b_deviation).max(c_deviation).max(r_deviation),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_small_m() {
        assert!((kappa(1) - 2f64.ln()).abs() < 1e-13);
        assert!((kappa(2) - 1.5 * 3f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn unknown_round_trip() {
        let cfg = SolverConfig { trunc_degree: 6, lambda_grid: 24, ..Default::default() };
        let p = predictor(2, 0.01, &cfg);
        let x = UnknownVector::from_params(&p, 6);
        assert_eq!(x.0.len(), cfg.dimension());
        assert_eq!(x.to_params(2, 0.01, 6, 2.0), p);
    }

    #[test]
    fn parity_map_is_an_involution() {
        let x: Vec<f64> = (0..22).map(|i| i as f64 * 0.3 - 1.0).collect();
        assert_eq!(parity_image(&parity_image(&x, 6), 6), x);
    }
}
