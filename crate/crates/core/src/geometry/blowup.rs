//! Blow-up of the family at t = 0: (f_t − Id)/t converges to a saddle-tower immersion
//! into the tangent space su(2) ≅ ℝ³ at Id.
//!
//! The saddle tower has Weierstrass data g = i/z^m and ω = 2n z^{2m}dz/(z^n − 1), so
//! X = Re ∫₀^z (½(1 − g²)ω, (i/2)(1 + g²)ω, gω). In quaternion coordinates
//! (Re α, Im α, Re β, Im β) the limit is (0, −X₃, −X₁, −X₂).

use super::immerse::{Frames, ImmersionSettings};
use crate::error::Result;
use crate::linalg::{C64, I, ONE, ZERO};
use crate::monodromy::phi_zero;
use crate::ode::Segment;
use crate::potential::PotentialParams;
use crate::quadrature::gauss_legendre;
use crate::solver::{continuation_to, Solver, SolverConfig};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Weierstrass integrands (φ₁, φ₂, φ₃) per dz of the saddle tower with n = 2m + 2.
pub fn tower_integrands(m: usize, z: C64) -> [C64; 3] {
    let n = 2 * m + 2;
    let nf = n as f64;
    let z2m = z.powi(2 * m as i32);
    let den = z.powi(n as i32) - ONE;
    [
        (z2m + ONE) * nf / den,
        I * (z2m - ONE) * nf / den,
        I * z.powi(m as i32) * (2.0 * nf) / den,
    ]
}

/// X(z) along the segment from 0, by composite Gauss–Legendre.
pub fn saddle_tower(m: usize, z: C64) -> [f64; 3] {
    let (x, w) = gauss_legendre(16);
    let panels = 16;
    let mut acc = [ZERO; 3];
    for p in 0..panels {
        for (xi, wi) in x.iter().zip(&w) {
            let s = (p as f64 + 0.5 * (xi + 1.0)) / panels as f64;
            let phi = tower_integrands(m, z * s);
            for c in 0..3 {
                acc[c] += phi[c] * z * (0.5 * wi / panels as f64);
            }
        }
    }
    [acc[0].re, acc[1].re, acc[2].re]
}

/// The saddle tower placed in the tangent space at Id, as a quaternion.
pub fn tower_quaternion(m: usize, z: C64) -> [f64; 4] {
    let x = saddle_tower(m, z);
    [0.0, -x[2], -x[0], -x[1]]
}

/// max |g(z) − i/z^m| with g = iΦ₀,₁₁/Φ₀,₂₁ from the t = 0 frame (r = 1).
pub fn gauss_map_defect(m: usize) -> f64 {
    sample_points()
        .iter()
        .map(|&z| {
            let p = phi_zero(m, 1.0, z);
            let g = I * p.0[0][0] / p.0[1][0];
            (g - I / z.powi(m as i32)).norm()
        })
        .fold(0.0, f64::max)
}

/// max over sample points of |−4γ²·Res_λ(∂_tη₁₂|_{t=0}) − 2n z^{2m}/(zⁿ − 1)| with γ = z^m,
/// the residue taken numerically on |λ| = 1 for the initial parameters.
pub fn omega_defect(m: usize) -> f64 {
    let p0 = PotentialParams::initial(m, 4, 2.0);
    let n = (2 * m + 2) as f64;
    let l = 64;
    sample_points()
        .iter()
        .map(|&z| {
            // ∂_tη₁₂ = λ⁻¹β(z, λ) is linear in t
            let mut res = ZERO;
            for j in 0..l {
                let lam = C64::from_polar(1.0, 2.0 * PI * j as f64 / l as f64);
                let (_, beta, _) = p0.at_lambda(lam).sums(z);
                res += beta / lam * lam / l as f64;
            }
            let gamma = z.powi(m as i32);
            let lhs = -res * gamma * gamma * 4.0;
            let rhs = z.powi(2 * m as i32) * (2.0 * n) / (z.powi(2 * m as i32 + 2) - ONE);
            (lhs - rhs).norm()
        })
        .fold(0.0, f64::max)
}

/// Sample set on the annulus 0.3 ≤ |z| ≤ 0.9.
pub fn sample_points() -> Vec<C64> {
    let mut out = Vec::new();
    for r in [0.3, 0.6, 0.9] {
        for j in 0..12 {
            out.push(C64::from_polar(r, 2.0 * PI * (j as f64 + 0.25) / 12.0));
        }
    }
    out
}

/// ψ_t(z) = (f_t(z) − Id)/t at each sample, marching one ray per angle.
pub fn psi(params: &PotentialParams, zs: &[C64], settings: ImmersionSettings) -> Result<Vec<[f64; 4]>> {
    let frames = Frames::new(params, settings)?;
    let t = params.t;
    zs.iter()
        .map(|&z| {
            let w = frames.march(&frames.origin(), &Segment::Line { from: ZERO, to: z })?;
            let f = frames.sample(&w, z)?.f;
            Ok([(f[0] - 1.0) / t, f[1] / t, f[2] / t, f[3] / t])
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub m: usize,
    pub ts: Vec<f64>,
    /// max_z |ψ_t(z) − tower(z)| per t.
    pub deviations: Vec<f64>,
    /// deviation(t_i)/deviation(t_{i+1}).
    pub ratios: Vec<f64>,
    /// Fitted exponent p in deviation ∝ t^p.
    pub order: f64,
    pub gauss_map_defect: f64,
    pub omega_defect: f64,
}

/// Solves at each t, compares ψ_t with the saddle tower and reports the decay.
pub fn blowup_compare(m: usize, ts: &[f64], cfg: &SolverConfig, settings: ImmersionSettings) -> Result<BlowupReport> {
    let zs = sample_points();
    let tower: Vec<[f64; 4]> = zs.iter().map(|&z| tower_quaternion(m, z)).collect();
    let mut deviations = Vec::with_capacity(ts.len());
    for &t in ts {
        let mut solver = Solver::new(*cfg);
        let sol = continuation_to(m, t, t, cfg, &mut solver)?;
        let ps = psi(&sol.params, &zs, settings)?;
        let dev = ps
            .iter()
            .zip(&tower)
            .map(|(a, b)| super::mesh::dist4(a, b))
            .fold(0.0, f64::max);
        deviations.push(dev);
    }
    let ratios: Vec<f64> = deviations.windows(2).map(|w| w[0] / w[1]).collect();
    let order = log_log_slope(ts, &deviations);
    Ok(BlowupReport {
        m,
        ts: ts.to_vec(),
        deviations,
        ratios,
        order,
        gauss_map_defect: gauss_map_defect(m),
        omega_defect: omega_defect(m),
    })
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_map_and_omega_identities() {
        for m in 1..=4 {
            assert!(gauss_map_defect(m) < 1e-14);
            assert!(omega_defect(m) < 1e-12, "{}", omega_defect(m));
        }
    }

    #[test]
    fn tower_vanishes_at_base_point_and_is_real_symmetric() {
        let x = saddle_tower(1, ZERO);
        assert!(x.iter().all(|v| v.abs() < 1e-15));
        let z = C64::new(0.4, 0.3);
        let a = saddle_tower(1, z);
        let b = saddle_tower(1, z.conj());
        assert!((a[0] - b[0]).abs() < 1e-13);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((log_log_slope(&x, &y) - 1.5).abs() < 1e-12);
    }
}
