//! Monodromies of dΦ = Φη around the punctures and the residual functionals of the
//! monodromy problem.
//!
//! The frame is written Φ = (Id + tW)Φ₀ with Φ₀ = [[1, 0], [r z^m, 1]] the t = 0 solution.
//! Then dW = (Id + tW)·Φ₀AΦ₀⁻¹ dz with A = Σ_j A_j/(z − p_j), W(0) = 0, and the
//! monodromy is M = Id + tW(end). At t = 0, W(end) is M̃(0) itself.

use crate::error::{DpwError, Result};
use crate::linalg::{log_one_plus_scaled, Mat2, C64, I, ONE};
use crate::loop_algebra::{grid_points, MatrixLoop, ScalarLoop};
use crate::ode::{integrate_path, OdeOptions, OdeStats, Segment};
use crate::potential::{puncture, PotentialAtLambda, PotentialParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// |Re θ| above this fraction of π marks a matrix log close to its branch cut.
pub const BRANCH_WARNING: f64 = 0.9;

/// Stand-off radius of the loop γ_j around its puncture.
pub fn default_delta(n: usize) -> f64 {
    if n <= 8 {
        0.5
    } else {
        (PI / n as f64).sin()
    }
}

/// γ_j: straight to p_j(1 − δ), one counterclockwise turn of radius δ about p_j, straight back.
pub fn loop_path(n: usize, j: usize, delta: f64, base: C64) -> Vec<Segment> {
    let p = puncture(n, j);
    let entry = p * (1.0 - delta);
    let start = (-p).arg();
    vec![
        Segment::Line { from: base, to: entry },
        Segment::Arc { center: p, radius: delta, start, end: start + 2.0 * PI },
        Segment::Line { from: entry, to: base },
    ]
}

/// Integrates dW = (Id + tW)·Q(z)dz along `path` starting from `w0`.
pub fn integrate_w(
    pl: &PotentialAtLambda,
    path: &[Segment],
    w0: Mat2,
    opts: &OdeOptions,
    stats: &mut OdeStats,
) -> Result<Mat2> {
    let t = C64::new(pl.t, 0.0);
    integrate_path(
        |z, dz, w| (Mat2::identity() + w.scale(t)) * pl.conjugated_sum(z).scale(dz),
        path,
        w0,
        opts,
        stats,
    )
}

/// Φ₀(z) = [[1, 0], [r z^m, 1]].
pub fn phi_zero(m: usize, r: f64, z: C64) -> Mat2 {
    Mat2::new(ONE, C64::new(0.0, 0.0), z.powi(m as i32) * r, ONE)
}

/// Φ(z, λ) at the end of `path` (which must start at the base point z = 0, Φ(0) = Id).
pub fn integrate_phi(params: &PotentialParams, path: &[Segment], lambdas: &[C64], opts: &OdeOptions) -> Result<Vec<Mat2>> {
    check_path(params, path)?;
    let end = path.last().map(|s| s.end_point()).unwrap_or(C64::new(0.0, 0.0));
    let phi0 = phi_zero(params.m, params.r, end);
    let t = C64::new(params.t, 0.0);
    lambdas
        .par_iter()
        .map(|&lam| {
            let mut st = OdeStats::default();
            let w = integrate_w(&params.at_lambda(lam), path, Mat2::zero(), opts, &mut st)?;
            Ok((Mat2::identity() + w.scale(t)) * phi0)
        })
        .collect()
}

fn check_path(params: &PotentialParams, path: &[Segment]) -> Result<()> {
    let n = params.n();
    for seg in path {
        for j in 0..n {
            let d = seg.distance_to(puncture(n, j));
            if d < 1e-3 {
                return Err(DpwError::AtPuncture { index: j, z: format!("path passes within {d:.2e}") });
            }
        }
    }
    Ok(())
}

/// Residual functionals of the monodromy problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Residuals {
    /// 𝓕 = (M̃₁₁ + M̃₁₁*)/(2πi).
    pub f: ScalarLoop,
    /// 𝓖 = (M̃₂₁ + M̃₁₂*)/(2πi).
    pub g: ScalarLoop,
    /// M̃₁₂(1)/(2πi).
    pub h1: C64,
    /// M̃₁₂(−1)/(2πi).
    pub h2: C64,
    /// (a⁰)² + b⁰c⁰ − 1.
    pub k_minus_1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonodromyRecord {
    pub j: usize,
    pub t: f64,
    pub lambda_grid: usize,
    /// Monodromy around γ_j as a loop (coefficients from the grid samples).
    pub monodromy: MatrixLoop,
    /// M̃ = (1/t)·log M, the analytic limit at t = 0.
    pub mtilde: MatrixLoop,
    pub params: PotentialParams,
    pub residuals: Residuals,
    /// Largest |det M − 1| over the grid.
    pub det_defect: f64,
    /// Largest |Re θ|/π over the grid, where ±iθ are the eigenvalues of log M.
    pub max_rotation: f64,
    pub branch_warning: bool,
    pub ode_steps: usize,
}

/// Raw monodromy data on the λ-grid: W(end) samples, so that M = Id + tW.
pub fn monodromy_w_samples(params: &PotentialParams, j: usize, l: usize, opts: &OdeOptions) -> Result<(Vec<Mat2>, usize)> {
    let n = params.n();
    let path = loop_path(n, j, default_delta(n), C64::new(0.0, 0.0));
    let grid = grid_points(l);
    let out: Vec<Result<(Mat2, usize)>> = grid
        .par_iter()
        .map(|&lam| {
            let mut st = OdeStats::default();
            let w = integrate_w(&params.at_lambda(lam), &path, Mat2::zero(), opts, &mut st)?;
            Ok((w, st.accepted + st.rejected))
        })
        .collect();
    let mut ws = Vec::with_capacity(l);
    let mut steps = 0;
    for r in out {
        let (w, s) = r?;
        ws.push(w);
        steps += s;
    }
    Ok((ws, steps))
}

/// Monodromy around γ_j sampled on an L-point λ-grid, with M̃ and the residuals.
pub fn monodromy_matrix(params: &PotentialParams, j: usize, l: usize, opts: &OdeOptions) -> Result<MonodromyRecord> {
    let (ws, ode_steps) = monodromy_w_samples(params, j, l, opts)?;
    record_from_w(params, j, &ws, ode_steps)
}

pub fn record_from_w(params: &PotentialParams, j: usize, ws: &[Mat2], ode_steps: usize) -> Result<MonodromyRecord> {
    let l = ws.len();
    let t = params.t;
    let mut ms = Vec::with_capacity(l);
    let mut mts = Vec::with_capacity(l);
    let mut det_defect = 0.0f64;
    let mut max_rotation = 0.0f64;
    for w in ws {
        let m = Mat2::identity() + w.scale(C64::new(t, 0.0));
        det_defect = det_defect.max((m.det() - ONE).norm());
        let (mt, theta) = log_one_plus_scaled(w, t);
        max_rotation = max_rotation.max(theta.re.abs() / PI);
        ms.push(m);
        mts.push(mt);
    }
    let deg = l / 2 - 1;
    let rho = params.rho();
    let monodromy = MatrixLoop::from_grid(&ms, deg, rho)?;
    let mtilde = MatrixLoop::from_grid(&mts, deg, rho)?;
    let residuals = residuals_from(&mtilde, &mts, params);
    Ok(MonodromyRecord {
        j,
        t,
        lambda_grid: l,
        monodromy,
        mtilde,
        params: params.clone(),
        residuals,
        det_defect,
        max_rotation,
        branch_warning: max_rotation > BRANCH_WARNING,
        ode_steps,
    })
}

fn residuals_from(mtilde: &MatrixLoop, samples: &[Mat2], params: &PotentialParams) -> Residuals {
    let two_pi_i = I * (2.0 * PI);
    let f = mtilde.get(0, 0).add(&mtilde.get(0, 0).star()).expect("same shape").scale(two_pi_i.inv());
    let g = mtilde.get(1, 0).add(&mtilde.get(0, 1).star()).expect("same shape").scale(two_pi_i.inv());
    let l = samples.len();
    // λ = 1 and λ = −1 are grid points 0 and L/2
    let h1 = samples[0].0[0][1] / two_pi_i;
    let h2 = samples[l / 2].0[0][1] / two_pi_i;
    Residuals { f, g, h1, h2, k_minus_1: params.k_residual() }
}

/// Recomputes the residuals from a record.
pub fn residuals(record: &MonodromyRecord) -> Residuals {
    let samples = record.mtilde.to_grid(record.lambda_grid).expect("grid fits the stored degree");
    residuals_from(&record.mtilde, &samples, &record.params)
}

/// M̃(0) at the initial parameters: πi·[[λ+λ⁻¹, λ−λ⁻¹], [λ⁻¹−λ, −λ−λ⁻¹]].
pub fn mtilde_initial(lambda: C64) -> Mat2 {
    let li = lambda.inv();
    Mat2::new(lambda + li, lambda - li, li - lambda, -lambda - li).scale(I * PI)
}
