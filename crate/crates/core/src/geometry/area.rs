//! Area of the closed surface: the residue formula and an independent quadrature of the
//! conformal density.
//!
//! The quadrature covers the sector |arg z| ≤ π/n, which is a fundamental domain of the
//! rotation z ↦ e^{2πi/n}z combined with the reflection symmetries, so the total is
//! (k+1)·n times the sector integral. A smooth partition of unity splits the sector into
//! a disc around p₀ (integrated in ln|z − p₀| with the frame marched at exact offsets, down
//! to u = |z − p₀|^{1/(k+1)} = u_min), a polar middle region and a cap around z = ∞
//! (integrated in w = 1/z).

use super::immerse::{beta_minus_one, density, Frames, ImmersionSettings};
use super::mesh::branch_beta_zeta;
use super::sheets_from_t;
use crate::error::{DpwError, Result};
use crate::linalg::{Mat2, C64, ONE, ZERO};
use crate::ode::Segment;
use crate::potential::PotentialParams;
use crate::quadrature::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Innermost u-sample of the disc around p₀; the rest is estimated linearly.
pub const DISC_U_MIN: f64 = 1e-3;

/// Area from the residues of the gauged potential at the branch points: 4π(m+1)(1 − a⁰(t)).
pub fn area_residue(params: &PotentialParams) -> f64 {
    4.0 * PI * (params.m + 1) as f64 * (1.0 - params.a.coeff(0).re)
}

/// Residue of `f(z)dz` at `center` from the trapezoid rule on a circle.
pub fn contour_residue(f: impl Fn(C64) -> C64, center: C64, radius: f64, samples: usize) -> C64 {
    let mut acc = ZERO;
    for j in 0..samples {
        let e = C64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / samples as f64);
        acc += f(center + e) * e;
    }
    acc / samples as f64
}

/// Residue of `f(z)dz` at z = ∞, from a circle of the given radius enclosing all finite poles.
pub fn contour_residue_at_infinity(f: impl Fn(C64) -> C64, radius: f64, samples: usize) -> C64 {
    -contour_residue(f, ZERO, radius, samples)
}

/// 4π·Res trace(η₋₁G₁G₀⁻¹) for the round-sphere potential η = [[0, λ⁻¹], [0, 0]]dz and the
/// gauge G = [[z, 0], [−λ, z⁻¹]] that regularizes it at ∞.
pub fn round_sphere_area_residue() -> f64 {
    let eta_m1 = Mat2::new(ZERO, ONE, ZERO, ZERO);
    let g1 = Mat2::new(ZERO, ZERO, -ONE, ZERO);
    let integrand = |z: C64| {
        let g0 = Mat2::diag(z, z.inv());
        (eta_m1 * g1 * g0.adj()).trace()
    };
    4.0 * PI * contour_residue_at_infinity(integrand, 2.0, 64).re
}

/// Quadrature of 4ρ⁴ for Φ = [[1, z/λ], [0, 1]] over ℂ, with ρ = |B₀₁₁| from the
/// numerical Iwasawa splitting and r = tan(v) mapping the plane to v ∈ [0, π/2).
pub fn round_sphere_area_quadrature(radial: usize, lambda_grid: usize) -> Result<f64> {
    let lambdas = crate::loop_algebra::grid_points(lambda_grid);
    let (x, w) = gauss_legendre(radial);
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let v = PI / 4.0 * (xi + 1.0);
        let r = v.tan();
        let phis: Vec<Mat2> = lambdas.iter().map(|&l| Mat2::new(ONE, C64::new(r, 0.0) / l, ZERO, ONE)).collect();
        let s = super::immerse::sym_sample(&phis, lambda_grid / 2 - 1)?;
        let dens = density(s.b0_11, ONE);
        // rotation invariant: 2π·∫ dens r dr with dr = sec²v dv
        acc += wi * PI / 4.0 * 2.0 * PI * dens * r / (v.cos() * v.cos());
    }
    Ok(acc)
}

/// C^∞ step from 0 (x ≤ 0) to 1 (x ≥ 1).
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResolution {
    /// Gauss nodes in arg z over [0, π/n].
    pub angular: usize,
    /// Panels over the radius [0, R_f] of the middle region.
    pub radial_panels: usize,
    /// Panels over |w| ∈ [0, 2/R_f] of the cap at ∞.
    pub cap_panels: usize,
    /// Gauss nodes in arg(z − p₀) over [0, π].
    pub disc_angular: usize,
    /// Subdivisions of each graded panel in ln|z − p₀| over the disc.
    pub disc_panels: usize,
    /// Gauss nodes per panel.
    pub nodes: usize,
}

impl Default for QuadratureResolution {
    fn default() -> Self {
        QuadratureResolution { angular: 24, radial_panels: 16, cap_panels: 4, disc_angular: 12, disc_panels: 1, nodes: 5 }
    }
}

impl QuadratureResolution {
    /// Twice the nodes in every direction.
    pub fn refined(&self) -> Self {
        QuadratureResolution {
            angular: 2 * self.angular,
            radial_panels: 2 * self.radial_panels,
            cap_panels: 2 * self.cap_panels,
            disc_angular: 2 * self.disc_angular,
            disc_panels: 2 * self.disc_panels,
            nodes: self.nodes,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaQuadrature {
    pub area: f64,
    /// Sector integrals (upper half, before the (k+1)·2n factor) of the three pieces.
    pub middle: f64,
    pub cap: f64,
    pub disc: f64,
    /// Estimate of the disc part with u < [`DISC_U_MIN`] (included in `disc`).
    pub guard_estimate: f64,
    pub min_density: f64,
    pub max_unitarity: f64,
    pub samples: usize,
}

fn panel_nodes(a: f64, b: f64, panels: usize, nodes: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * nodes);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// Gauss nodes on [a, b] with panel edges b − h(2^j − 1), each panel split `sub` times.
fn graded_nodes(a: f64, b: f64, h: f64, sub: usize, nodes: usize) -> Vec<(f64, f64)> {
    let mut edges = vec![b];
    let mut width = h;
    while *edges.last().unwrap() - width > a {
        edges.push(edges.last().unwrap() - width);
        width *= 2.0;
    }
    edges.push(a);
    edges.reverse();
    edges.windows(2).flat_map(|e| panel_nodes(e[0], e[1], sub, nodes)).collect()
}

/// Disc radius and cap radius of the partition of unity for n punctures.
fn partition_radii(n: usize) -> (f64, f64) {
    let rd = 0.6 * (PI / n as f64).sin();
    let rf = 2.0 * (1.0 + rd) + 0.2;
    (rd, rf)
}

/// Quadrature of the conformal density over the closed surface with t = 1/(2k+2).
pub fn area_quadrature(
    params: &PotentialParams,
    res: QuadratureResolution,
    settings: ImmersionSettings,
) -> Result<AreaQuadrature> {
    let k = sheets_from_t(params.t)
        .ok_or_else(|| DpwError::InvalidParams(format!("t = {} is not 1/(2k+2)", params.t)))?;
    let frames = Frames::new(params, settings)?;
    let n = params.n();
    let (rd, rf) = partition_radii(n);
    let p0 = params.puncture(0);
    let chi_disc = |z: C64| 1.0 - smooth_step(((z - p0).norm() / rd - 0.5) / 0.5);
    let chi_cap = |z: C64| smooth_step((z.norm() - rf / 2.0) / (rf / 2.0));
    let mut min_density = f64::INFINITY;
    let mut max_unitarity = 0.0f64;
    let mut samples = 0usize;

    // middle region and cap share rays from the base point
    let thetas = panel_nodes(0.0, PI / n as f64, 1, res.angular);
    let mids = panel_nodes(0.0, rf, res.radial_panels, res.nodes);
    let caps = panel_nodes(0.0, 2.0 / rf, res.cap_panels, res.nodes);
    let mut middle = 0.0;
    let mut cap = 0.0;
    let rho = rd / 2.0;
    let phi0 = p0.arg();
    for &(theta, wt) in &thetas {
        let dir = C64::from_polar(1.0, theta);
        // (radius, weight, kind): 0 middle, 1 cap, 2/3 entry/exit of the detour around p₀
        let mut pts: Vec<(f64, f64, u8)> = mids.iter().map(|&(r, w)| (r, w, 0)).collect();
        pts.extend(caps.iter().map(|&(rho, w)| (1.0 / rho, w, 1)));
        // rays close to p₀ go round it on the minor arc of radius rd/2, where the weight vanishes
        let miss = (phi0 - theta).sin().abs();
        let detour = if miss < rho {
            let h = (rho * rho - miss * miss).sqrt();
            let (r_in, r_out) = ((phi0 - theta).cos() - h, (phi0 - theta).cos() + h);
            pts.retain(|p| p.0 <= r_in || p.0 >= r_out);
            pts.push((r_in, 0.0, 2));
            pts.push((r_out, 0.0, 3));
            Some((r_in, r_out))
        } else {
            None
        };
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut w = frames.origin();
        let mut prev = 0.0;
        for (r, wr, kind) in pts {
            let z = dir * r;
            w = if kind == 3 {
                let (r_in, r_out) = detour.expect("detour exit without entry");
                let a1 = (dir * r_in - p0).arg();
                let a2 = (dir * r_out - p0).arg();
                let sweep = (a2 - a1 + PI).rem_euclid(2.0 * PI) - PI;
                frames.march(&w, &Segment::Arc { center: p0, radius: rho, start: a1, end: a1 + sweep })?
            } else if r > 2.0 * prev && prev > 0.0 {
                frames.march(&w, &Segment::LogRadial { center: ZERO, phi: theta, start: prev.ln(), end: r.ln() })?
            } else {
                frames.march(&w, &Segment::Line { from: dir * prev, to: z })?
            };
            prev = r;
            let weight = match kind {
                0 => 1.0 - chi_disc(z) - chi_cap(z),
                1 => chi_cap(z),
                _ => 0.0,
            };
            if weight <= 0.0 {
                continue;
            }
            let s = frames.sample(&w, z)?;
            samples += 1;
            max_unitarity = max_unitarity.max(s.unitarity);
            let d = density(s.b0_11, beta_minus_one(params, z));
            min_density = min_density.min(d);
            if kind == 1 {
                // dA_w = ρ dρ dθ and |dz/dw|² = r⁴
                cap += wt * wr * weight * d * r.powi(4) / r;
            } else {
                middle += wt * wr * weight * d * r;
            }
        }
    }

    // disc around p₀ in σ = ln s, s = |z − p₀|: dA = s² dσ dψ, graded towards the cutoff at s = R_d
    let kp = (k + 1) as f64;
    let sigma_max = rd.ln();
    let sigma_min = kp * DISC_U_MIN.ln();
    let psis = panel_nodes(0.0, PI, 1, res.disc_angular);
    let sigmas = graded_nodes(sigma_min, sigma_max, LN_2, res.disc_panels, res.nodes);
    let start = p0 * (1.0 - rd);
    let trunk = frames.march(&frames.origin(), &Segment::Line { from: ZERO, to: start })?;
    let mut disc = 0.0;
    let mut guard_estimate = 0.0;
    let mut arc_w = trunk;
    let mut arc_angle = PI;
    let mut psis_desc = psis.clone();
    psis_desc.sort_by(|a, b| b.0.total_cmp(&a.0));
    for &(psi, wpsi) in &psis_desc {
        arc_w = frames.march(&arc_w, &Segment::Arc { center: p0, radius: rd, start: arc_angle, end: psi })?;
        arc_angle = psi;
        let mut w = arc_w.clone();
        let mut sigma_prev = sigma_max;
        let mut last: Option<(f64, f64)> = None;
        for &(sigma, ws) in sigmas.iter().rev() {
            w = frames.march_to_puncture(&w, 0, psi, sigma_prev, sigma)?;
            sigma_prev = sigma;
            let zeta = C64::from_polar(sigma.exp(), psi);
            let weight = chi_disc(p0 + zeta);
            if weight <= 0.0 {
                continue;
            }
            let s = frames.sample_near_puncture(&w, 0, zeta)?;
            samples += 1;
            max_unitarity = max_unitarity.max(s.unitarity);
            // 4ρ⁴|β|²s², finite at the branch point
            let scaled = density(s.b0_11, branch_beta_zeta(params, 0, zeta));
            min_density = min_density.min(scaled);
            disc += wpsi * ws * weight * scaled;
            last = Some((sigma, weight * scaled));
        }
        if let Some((s1, v1)) = last {
            // integrand ∝ u² = e^{2σ/(k+1)} below the innermost node
            let g = wpsi * v1 * (2.0 * (sigma_min - s1) / kp).exp() * kp / 2.0;
            guard_estimate += g;
            disc += g;
        }
    }
    let sector = middle + cap + disc;
    if guard_estimate > 1e-3 * sector {
        return Err(DpwError::Quadrature(format!("guard-ring estimate {guard_estimate:.3e} of {sector:.3e}")));
    }
    let area = 2.0 * (k + 1) as f64 * n as f64 * sector;
    Ok(AreaQuadrature { area, middle, cap, disc, guard_estimate, min_density, max_unitarity, samples })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaReport {
    pub m: usize,
    pub k: usize,
    pub t: f64,
    pub area_residue: f64,
    pub area_quadrature: f64,
    /// |quadrature − residue| / residue.
    pub relative_gap: f64,
}

/// Both areas and their relative gap.
pub fn area_report(params: &PotentialParams, res: QuadratureResolution, settings: ImmersionSettings) -> Result<AreaReport> {
    let k = sheets_from_t(params.t)
        .ok_or_else(|| DpwError::InvalidParams(format!("t = {} is not 1/(2k+2)", params.t)))?;
    let residue = area_residue(params);
    let quad = area_quadrature(params, res, settings)?;
    Ok(AreaReport {
        m: params.m,
        k,
        t: params.t,
        area_residue: residue,
        area_quadrature: quad.area,
        relative_gap: (quad.area - residue).abs() / residue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_residue_is_four_pi() {
        assert!((round_sphere_area_residue() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn step_is_monotone_and_symmetric() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!(smooth_step(x) >= smooth_step(x - 0.01));
            assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn initial_potential_gives_limit_area() {
        for m in 1..=3 {
            let p = PotentialParams::initial(m, 4, 2.0);
            assert!((area_residue(&p) - 4.0 * PI * (m + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn round_sphere_quadrature_is_four_pi() {
        let a = round_sphere_area_quadrature(24, 32).unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-9, "{a}");
    }
}
