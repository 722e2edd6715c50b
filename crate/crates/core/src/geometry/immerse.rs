//! Frames Φ(z, λ) on a λ-grid and the Sym–Bobenko immersion f = F(1)·F(−1)⁻¹.
//!
//! Frames are carried as W with Φ = (Id + tW)Φ₀ and marched segment by segment, so a
//! ray or arc is integrated once and sampled at every waypoint. Close to a puncture
//! the march runs in σ = ln|z − p_j| with the offset ζ = z − p_j kept exact, which
//! lets samples approach the branch point far below double-precision spacing in z.

use crate::error::{DpwError, Result};
use crate::iwasawa::positive_factor_from_samples;
use crate::linalg::{Mat2, C64, ONE, ZERO};
use crate::loop_algebra::grid_points;
use crate::monodromy::phi_zero;
use crate::ode::{integrate, integrate_path, OdeOptions, OdeStats, Segment};
use crate::potential::gauge::{gauge_s, s_value};
use crate::potential::{puncture, PotentialAtLambda, PotentialParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sample points of [`immerse`] must stay this far from every puncture.
pub const GUARD_RADIUS: f64 = 0.05;
/// Marched segments must stay this far from every puncture.
const PATH_CLEARANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImmersionSettings {
    /// Number of λ samples on the unit circle (even).
    pub lambda_grid: usize,
    /// Degree K of the positive factor X = B⁻¹.
    pub factor_degree: usize,
    pub ode: OdeOptions,
}

impl Default for ImmersionSettings {
    fn default() -> Self {
        ImmersionSettings { lambda_grid: 64, factor_degree: 24, ode: OdeOptions::default() }
    }
}

impl ImmersionSettings {
    /// Grid and factor degree that keep F unitary at ±1 to a few 1e-8 for t = 1/(2k+2), k ≥ 1.
    ///
    /// The λ-Fourier content of Φ grows with t.
    pub fn for_t(t: f64) -> Self {
        let (lambda_grid, factor_degree) = if t <= 0.05 {
            (64, 24)
        } else if t < 0.2 {
            (128, 56)
        } else {
            (256, 120)
        };
        ImmersionSettings { lambda_grid, factor_degree, ode: OdeOptions::default() }
    }
}

/// f, the λ⁰ part of B and the Sym-point unitarity defect at one point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SymSample {
    /// f as (Re α, Im α, Re β, Im β) with f = [[α, β], [−β̄, ᾱ]].
    pub f: [f64; 4],
    /// |B₀₁₁| of the frame that was factored.
    pub b0_11: f64,
    /// max over λ = ±1 of ‖F F† − Id‖.
    pub unitarity: f64,
}

/// Iwasawa-splits grid samples of a frame and evaluates the Sym–Bobenko formula.
pub fn sym_sample(phis: &[Mat2], k: usize) -> Result<SymSample> {
    let l = phis.len();
    let x = positive_factor_from_samples(phis, k, 1.0)?;
    let f_plus = phis[0] * x.eval_x(ONE);
    let f_minus = phis[l / 2] * x.eval_x(-ONE);
    let unitarity = [f_plus, f_minus]
        .iter()
        .map(|f| (*f * f.dagger() - Mat2::identity()).max_abs())
        .fold(0.0, f64::max);
    let f = f_plus * f_minus.dagger();
    if !f.is_finite() {
        return Err(DpwError::NoConvergence("non-finite Sym-point frame".into()));
    }
    Ok(SymSample { f: f.to_quaternion(), b0_11: x.b0.0[0][0].norm(), unitarity })
}

/// λ⁻¹-coefficient of η₁₂/dz, namely t·n·b⁰/(zⁿ − 1).
pub fn beta_minus_one(params: &PotentialParams, z: C64) -> C64 {
    let n = params.n();
    let b0 = params.b.coeff(0);
    b0 * (params.t * n as f64) / (z.powi(n as i32) - ONE)
}

/// Conformal density 4ρ⁴|η₋₁,₁₂|² with ρ = |B₀₁₁|.
pub fn density(rho1: f64, beta: C64) -> f64 {
    4.0 * rho1.powi(4) * beta.norm_sqr()
}

/// Solved potential frozen on a λ-grid, ready to march frames.
pub struct Frames<'a> {
    pub params: &'a PotentialParams,
    pub settings: ImmersionSettings,
    lambdas: Vec<C64>,
    at: Vec<PotentialAtLambda>,
    residues: Vec<Vec<Mat2>>,
    s_vals: Vec<C64>,
}

impl<'a> Frames<'a> {
    pub fn new(params: &'a PotentialParams, settings: ImmersionSettings) -> Result<Self> {
        params.validate()?;
        crate::loop_algebra::check_grid(settings.lambda_grid, settings.factor_degree)?;
        let lambdas = grid_points(settings.lambda_grid);
        let at = lambdas.iter().map(|&l| params.at_lambda(l)).collect();
        let residues = lambdas
            .iter()
            .map(|&l| (0..params.n()).map(|j| params.residue_matrix(j, l)).collect())
            .collect();
        let s_vals = lambdas.iter().map(|&l| s_value(params, l)).collect();
        Ok(Frames { params, settings, lambdas, at, residues, s_vals })
    }

    pub fn lambdas(&self) -> &[C64] {
        &self.lambdas
    }

    /// W at the base point z = 0.
    pub fn origin(&self) -> Vec<Mat2> {
        vec![Mat2::zero(); self.lambdas.len()]
    }

    fn check_segment(&self, seg: &Segment) -> Result<()> {
        let n = self.params.n();
        for j in 0..n {
            let d = seg.distance_to(puncture(n, j));
            if d < PATH_CLEARANCE {
                return Err(DpwError::AtPuncture { index: j, z: format!("segment passes within {d:.2e}") });
            }
        }
        Ok(())
    }

    /// Continues every W along one segment.
    pub fn march(&self, w: &[Mat2], seg: &Segment) -> Result<Vec<Mat2>> {
        self.check_segment(seg)?;
        let path = [*seg];
        let t = C64::new(self.params.t, 0.0);
        w.par_iter()
            .zip(self.at.par_iter())
            .map(|(w0, pl)| {
                let mut st = OdeStats::default();
                integrate_path(
                    |z, dz, w| (Mat2::identity() + w.scale(t)) * pl.conjugated_sum(z).scale(dz),
                    &path,
                    *w0,
                    &self.settings.ode,
                    &mut st,
                )
            })
            .collect()
    }

    /// Continues W along a chain of segments, returning W at the end of each.
    pub fn march_chain(&self, w: &[Mat2], segs: &[Segment]) -> Result<Vec<Vec<Mat2>>> {
        let mut out = Vec::with_capacity(segs.len());
        let mut cur = w.to_vec();
        for seg in segs {
            cur = self.march(&cur, seg)?;
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Continues W along the ray z = p_j + e^{σ + iψ} from σ₀ to σ₁ with ζ = z − p_j exact.
    pub fn march_to_puncture(&self, w: &[Mat2], j: usize, psi: f64, sigma0: f64, sigma1: f64) -> Result<Vec<Mat2>> {
        let p = self.params.puncture(j);
        let (m, r) = (self.params.m, self.params.r);
        let n = self.params.n();
        let t = C64::new(self.params.t, 0.0);
        let dir = C64::from_polar(1.0, psi);
        w.par_iter()
            .zip(self.residues.par_iter())
            .map(|(w0, res)| {
                let rhs = |sigma: f64, w: &Mat2| {
                    let zeta = dir * sigma.exp();
                    let z = p + zeta;
                    let mut a = res[j];
                    for (i, ai) in res.iter().enumerate() {
                        if i != j {
                            a = a + ai.scale(zeta / (z - puncture(n, i)));
                        }
                    }
                    let phi0 = phi_zero(m, r, z);
                    (Mat2::identity() + w.scale(t)) * (phi0 * a * phi0.adj())
                };
                let mut st = OdeStats::default();
                integrate(rhs, sigma0, sigma1, *w0, &self.settings.ode, &mut st)
            })
            .collect()
    }

    /// Φ = (Id + tW)Φ₀(z) on the grid.
    pub fn phi(&self, w: &[Mat2], z: C64) -> Vec<Mat2> {
        let t = C64::new(self.params.t, 0.0);
        let phi0 = phi_zero(self.params.m, self.params.r, z);
        w.iter().map(|w| (Mat2::identity() + w.scale(t)) * phi0).collect()
    }

    /// Φ·G_s, the frame gauged for the chart at z = ∞; same f, bounded as z → ∞.
    pub fn phi_hat(&self, w: &[Mat2], z: C64) -> Vec<Mat2> {
        let (m, r) = (self.params.m, self.params.r);
        self.phi(w, z)
            .into_iter()
            .zip(&self.s_vals)
            .map(|(ph, &s)| ph * gauge_s(m, r, s, z))
            .collect()
    }

    /// Sym sample at z from W; switches to the gauged frame outside the unit disc.
    /// The returned `b0_11` is ρ₁ = |B₀₁₁| of the ungauged frame.
    pub fn sample(&self, w: &[Mat2], z: C64) -> Result<SymSample> {
        if z.norm() > 1.0 {
            let mut s = sym_sample(&self.phi_hat(w, z), self.settings.factor_degree)?;
            s.b0_11 *= z.norm().powi(self.params.m as i32);
            Ok(s)
        } else {
            sym_sample(&self.phi(w, z), self.settings.factor_degree)
        }
    }

    /// Sym sample at p_j + ζ where W was produced by [`Frames::march_to_puncture`].
    pub fn sample_near_puncture(&self, w: &[Mat2], j: usize, zeta: C64) -> Result<SymSample> {
        let z = self.params.puncture(j) + zeta;
        sym_sample(&self.phi(w, z), self.settings.factor_degree)
    }
}

/// One immersed sample point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ImmersedPoint {
    pub z: C64,
    pub f: [f64; 4],
    pub density: f64,
    pub unitarity: f64,
}

/// f and the conformal density at each z, integrating along the straight segment from 0.
///
/// Every sample and every segment must keep [`GUARD_RADIUS`] from the punctures.
pub fn immerse(params: &PotentialParams, zs: &[C64], settings: ImmersionSettings) -> Result<Vec<ImmersedPoint>> {
    let frames = Frames::new(params, settings)?;
    let n = params.n();
    zs.iter()
        .map(|&z| {
            let seg = Segment::Line { from: ZERO, to: z };
            for j in 0..n {
                if seg.distance_to(puncture(n, j)) < GUARD_RADIUS {
                    return Err(DpwError::GuardViolation(format!("segment to {z} passes within {GUARD_RADIUS} of p_{j}")));
                }
            }
            let w = frames.march(&frames.origin(), &seg)?;
            let s = frames.sample(&w, z)?;
            Ok(ImmersedPoint {
                z,
                f: s.f,
                density: density(s.b0_11, beta_minus_one(params, z)),
                unitarity: s.unitarity,
            })
        })
        .collect()
}
