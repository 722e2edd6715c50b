//! Fundamental patch on the covering surface, numerically fitted symmetry generators and
//! replication to the closed surface.
//!
//! The z-sphere is cut along the arcs (p_{2j}, p_{2j+1}) of the unit circle; on the
//! complement y is single valued and the k + 1 sheets are labelled by the number of
//! deck moves from the base sheet. Crossing a cut outward takes sheet s to sheet s − 1,
//! crossing any other arc keeps the sheet. The patch is the wedge
//! −π/n ≤ arg z ≤ 3π/n of sheet 0; it holds p₀ and p₁ and one full cut arc.

use super::immerse::{beta_minus_one, density, Frames, ImmersionSettings, SymSample};
use super::{sheets_from_t, Provenance, SurfaceMesh};
use crate::error::{DpwError, Result};
use crate::linalg::{C64, ZERO};
use crate::ode::Segment;
use crate::potential::PotentialParams;
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Samples nearest a branch point sit at u = |z − p|^{1/(k+1)} equal to this.
pub const BRANCH_SAMPLE_U: f64 = 1e-3;
/// Radius at which the far end of the patch is sampled for the vertex at z = ∞.
pub const FAR_RADIUS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshResolution {
    /// Angular subdivisions per puncture spacing 2π/n (even).
    pub rays_per_sector: usize,
    /// Rings strictly inside the unit disc (mirrored outside).
    pub rings: usize,
}

impl Default for MeshResolution {
    fn default() -> Self {
        MeshResolution { rays_per_sector: 4, rings: 6 }
    }
}

/// Role of a patch vertex, used to glue copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalVertex {
    Center,
    Infinity,
    /// Ray i, ring a (a ≤ rings inside, a > rings + 1 outside).
    Ring { i: usize, a: usize },
    /// Unit-circle vertex seen from inside (shared with outside off the cut).
    UnitInner { i: usize },
    /// Unit-circle vertex on the cut seen from outside.
    UnitOuter { i: usize },
    Branch { i: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum GlobalVertex {
    Center(usize),
    Infinity(usize),
    Ring(usize, usize, usize),
    Unit(usize, usize),
    UnitCut(usize, usize),
    Branch(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Patch {
    pub mesh: SurfaceMesh,
    pub roles: Vec<LocalVertex>,
    /// (f(z), f(e^{2πi/(m+1)}z)) along the two straight edges of the patch.
    pub rotation_pairs: Vec<([f64; 4], [f64; 4])>,
    /// (f on sheet −1, f on sheet 0) at the same z outside the cut arc.
    pub deck_pairs: Vec<([f64; 4], [f64; 4])>,
    /// Mismatch between two homotopic routes to the same outside points.
    pub route_consistency: f64,
    /// Largest Sym-point unitarity defect over regular samples.
    pub max_unitarity: f64,
    /// |α| of the branch samples before projection onto the deck-fixed circle.
    pub branch_projection: f64,
    /// |β| of the far sample before projection onto the rotation-fixed circle.
    pub infinity_projection: f64,
}

struct Builder {
    vertices: Vec<[f64; 4]>,
    density: Vec<f64>,
    roles: Vec<LocalVertex>,
    index: HashMap<LocalVertex, usize>,
    max_unitarity: f64,
}

impl Builder {
    fn push(&mut self, role: LocalVertex, f: [f64; 4], dens: f64) -> usize {
        let id = self.vertices.len();
        self.vertices.push(f);
        self.density.push(dens);
        self.roles.push(role);
        self.index.insert(role, id);
        id
    }

    fn push_sample(&mut self, role: LocalVertex, s: &SymSample, params: &PotentialParams, z: C64) -> usize {
        self.max_unitarity = self.max_unitarity.max(s.unitarity);
        self.push(role, s.f, density(s.b0_11, beta_minus_one(params, z)))
    }
}

/// Integrates and immerses the fundamental patch of the solved surface with t = 1/(2k+2).
pub fn fundamental_patch(params: &PotentialParams, res: MeshResolution, settings: ImmersionSettings) -> Result<Patch> {
    let k = sheets_from_t(params.t)
        .ok_or_else(|| DpwError::InvalidParams(format!("t = {} is not 1/(2k+2)", params.t)))?;
    let q = res.rays_per_sector;
    let rings = res.rings;
    if q < 2 || q % 2 != 0 || rings < 1 {
        return Err(DpwError::InvalidGrid(format!("rays_per_sector {q} must be even ≥ 2, rings {rings} ≥ 1")));
    }
    let frames = Frames::new(params, settings)?;
    let n = params.n();
    let nf = n as f64;
    let dphi = 2.0 * PI / (nf * q as f64);
    let phi = |i: usize| -PI / nf + i as f64 * dphi;
    let inner: Vec<f64> = (1..=rings).map(|a| a as f64 / (rings + 1) as f64).collect();
    let outer: Vec<f64> = inner.iter().rev().map(|r| 1.0 / r).collect();
    let unit_ring = rings + 1;
    let is_branch = |i: usize| i == q / 2 || i == 3 * q / 2;
    let is_cut = |i: usize| i > q / 2 && i < 3 * q / 2;

    let mut b = Builder {
        vertices: Vec::new(),
        density: Vec::new(),
        roles: Vec::new(),
        index: HashMap::new(),
        max_unitarity: 0.0,
    };
    let origin = frames.origin();
    let center = frames.sample(&origin, ZERO)?;
    b.push(LocalVertex::Center, center.f, density(center.b0_11, beta_minus_one(params, ZERO)));

    let mut deck_pairs = Vec::new();
    let mut far_samples: Vec<(SymSample, C64)> = Vec::new();
    let mut straight_outer: HashMap<(usize, usize), [f64; 4]> = HashMap::new();
    let mut edge_values: [Vec<[f64; 4]>; 2] = [Vec::new(), Vec::new()];
    let mut far_w = None;
    let mut branch_projection = 0.0f64;
    let mut route_consistency = 0.0f64;

    // straight rays from the base point
    for i in 0..=2 * q {
        let dir = C64::from_polar(1.0, phi(i));
        let mut segs = Vec::new();
        let mut pts = Vec::new();
        let mut prev = ZERO;
        for &r in &inner {
            segs.push(Segment::Line { from: prev, to: dir * r });
            prev = dir * r;
            pts.push(prev);
        }
        let inner_ws = frames.march_chain(&origin, &segs)?;
        for (a, (w, z)) in inner_ws.iter().zip(&pts).enumerate() {
            let s = frames.sample(w, *z)?;
            b.push_sample(LocalVertex::Ring { i, a: a + 1 }, &s, params, *z);
            if i == 0 || i == 2 * q {
                edge_values[(i != 0) as usize].push(s.f);
            }
        }
        let last_inner = inner_ws.last().cloned().unwrap_or_else(|| origin.clone());
        if is_branch(i) {
            let j = if i == q / 2 { 0 } else { 1 };
            let sigma0 = (1.0 - inner[rings - 1]).ln();
            let sigma1 = (k + 1) as f64 * BRANCH_SAMPLE_U.ln();
            let w = frames.march_to_puncture(&last_inner, j, phi(i) + PI, sigma0, sigma1)?;
            let zeta = C64::from_polar(sigma1.exp(), phi(i) + PI);
            let s = frames.sample_near_puncture(&w, j, zeta)?;
            b.max_unitarity = b.max_unitarity.max(s.unitarity);
            // the branch point is fixed by the deck group, which rotates the α-plane
            let amp = (s.f[2] * s.f[2] + s.f[3] * s.f[3]).sqrt();
            branch_projection = branch_projection.max((s.f[0] * s.f[0] + s.f[1] * s.f[1]).sqrt());
            let beta_zeta = branch_beta_zeta(params, j, zeta);
            let dens_w = ((k + 1) as f64).powi(2) * density(s.b0_11, beta_zeta) / (BRANCH_SAMPLE_U * BRANCH_SAMPLE_U);
            b.push(LocalVertex::Branch { i }, [0.0, 0.0, s.f[2] / amp, s.f[3] / amp], dens_w);
            continue;
        }
        let zu = dir;
        let w_unit = frames.march(&last_inner, &Segment::Line { from: prev, to: zu })?;
        let s = frames.sample(&w_unit, zu)?;
        b.push_sample(LocalVertex::UnitInner { i }, &s, params, zu);
        if i == 0 || i == 2 * q {
            edge_values[(i != 0) as usize].push(s.f);
        }
        let mut segs = Vec::new();
        let mut pts = Vec::new();
        let mut prev = zu;
        for &r in &outer {
            segs.push(Segment::Line { from: prev, to: dir * r });
            prev = dir * r;
            pts.push(prev);
        }
        let outer_ws = frames.march_chain(&w_unit, &segs)?;
        for (bi, (w, z)) in outer_ws.iter().zip(&pts).enumerate() {
            let a = unit_ring + 1 + bi;
            let s = frames.sample(w, *z)?;
            if is_cut(i) {
                b.max_unitarity = b.max_unitarity.max(s.unitarity);
                straight_outer.insert((i, a), s.f);
            } else {
                b.push_sample(LocalVertex::Ring { i, a }, &s, params, *z);
                if i == 0 || i == 2 * q {
                    edge_values[(i != 0) as usize].push(s.f);
                }
            }
        }
        if i == 0 {
            far_w = outer_ws.first().cloned();
        }
        if i == 0 || i == 2 * q {
            let last = outer_ws.last().cloned().unwrap_or(w_unit);
            let seg = Segment::LogRadial { center: ZERO, phi: phi(i), start: outer[rings - 1].ln(), end: FAR_RADIUS.ln() };
            let w = frames.march(&last, &seg)?;
            let s = frames.sample(&w, dir * FAR_RADIUS)?;
            b.max_unitarity = b.max_unitarity.max(s.unitarity);
            far_samples.push((s, dir * FAR_RADIUS));
        }
    }
    // z = ∞ is fixed by the rotation, which turns the β-plane: project onto the α-circle
    let (far0, zfar) = far_samples[0];
    let f = far0.f;
    let amp = (f[0] * f[0] + f[1] * f[1]).sqrt();
    let infinity_projection = (f[2] * f[2] + f[3] * f[3]).sqrt();
    let dens_w = density(far0.b0_11, beta_minus_one(params, zfar)) * FAR_RADIUS.powi(4);
    b.push(LocalVertex::Infinity, [f[0] / amp, f[1] / amp, 0.0, 0.0], dens_w);
    let center_f = b.vertices[b.index[&LocalVertex::Center]];
    let mut rotation_pairs: Vec<([f64; 4], [f64; 4])> =
        edge_values[0].iter().copied().zip(edge_values[1].iter().copied()).collect();
    rotation_pairs.push((center_f, center_f));
    rotation_pairs.push((far_samples[0].0.f, far_samples[1].0.f));

    // outside of the cut range: arc at the first outer radius from the edge ray
    let r1 = outer[0];
    let far_w = far_w.ok_or_else(|| DpwError::InvalidGrid("empty outer ring".into()))?;
    let mut w_arc = far_w;
    for i in 1..=2 * q {
        let seg = Segment::Arc { center: ZERO, radius: r1, start: phi(i - 1), end: phi(i) };
        w_arc = frames.march(&w_arc, &seg)?;
        let dir = C64::from_polar(1.0, phi(i));
        if i < q / 2 {
            continue;
        }
        if i > 3 * q / 2 {
            // homotopic to the straight ray: same sheet
            let s = frames.sample(&w_arc, dir * r1)?;
            let straight = b.vertices[b.index[&LocalVertex::Ring { i, a: unit_ring + 1 }]];
            route_consistency = route_consistency.max(dist4(&s.f, &straight));
            continue;
        }
        // outward through the outer rings
        let mut prev = dir * r1;
        let mut w = w_arc.clone();
        for (bi, &r) in outer.iter().enumerate() {
            let a = unit_ring + 1 + bi;
            if bi > 0 {
                w = frames.march(&w, &Segment::Line { from: prev, to: dir * r })?;
                prev = dir * r;
            }
            let s = frames.sample(&w, dir * r)?;
            b.push_sample(LocalVertex::Ring { i, a }, &s, params, dir * r);
            if let Some(st) = straight_outer.get(&(i, a)) {
                deck_pairs.push((*st, s.f));
            }
        }
        if is_cut(i) {
            let w = frames.march(&w_arc, &Segment::Line { from: dir * r1, to: dir })?;
            let s = frames.sample(&w, dir)?;
            b.push_sample(LocalVertex::UnitOuter { i }, &s, params, dir);
            let inside = b.vertices[b.index[&LocalVertex::UnitInner { i }]];
            deck_pairs.push((inside, s.f));
        }
    }

    // faces
    let mut faces = Vec::new();
    let c = b.index[&LocalVertex::Center];
    let inf = b.index[&LocalVertex::Infinity];
    let vid = |i: usize, a: usize, outer_side: bool| -> usize {
        if a == unit_ring {
            if is_branch(i) {
                b.index[&LocalVertex::Branch { i }]
            } else if outer_side && is_cut(i) {
                b.index[&LocalVertex::UnitOuter { i }]
            } else {
                b.index[&LocalVertex::UnitInner { i }]
            }
        } else {
            b.index[&LocalVertex::Ring { i, a }]
        }
    };
    let top = 2 * rings + 1;
    for i in 0..2 * q {
        faces.push([c, vid(i, 1, false), vid(i + 1, 1, false)]);
        for a in 1..top {
            let outer_side = a >= unit_ring;
            let v00 = vid(i, a, outer_side);
            let v10 = vid(i + 1, a, outer_side);
            let v01 = vid(i, a + 1, outer_side);
            let v11 = vid(i + 1, a + 1, outer_side);
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
        faces.push([vid(i, top, true), inf, vid(i + 1, top, true)]);
    }

    let mesh = SurfaceMesh {
        vertices: b.vertices,
        faces,
        density: b.density,
        provenance: Provenance { m: params.m, k, t: params.t, rays_per_sector: q, rings },
    };
    Ok(Patch {
        mesh,
        roles: b.roles,
        rotation_pairs,
        deck_pairs,
        route_consistency,
        max_unitarity: b.max_unitarity,
        branch_projection,
        infinity_projection,
    })
}

/// t·n·b⁰·ζ/(zⁿ − 1) at z = p_j + ζ without cancellation (finite as ζ → 0).
pub fn branch_beta_zeta(params: &PotentialParams, j: usize, zeta: C64) -> C64 {
    let n = params.n();
    let p = params.puncture(j);
    // (p + ζ)ⁿ − 1 = Σ_{i≥1} C(n, i) p^{n−i} ζ^i since pⁿ = 1
    let mut acc = ZERO;
    let mut binom = 1.0;
    for i in 1..=n {
        binom = binom * (n + 1 - i) as f64 / i as f64;
        acc += p.powi((n - i) as i32) * zeta.powi(i as i32 - 1) * binom;
    }
    params.b.coeff(0) * (params.t * n as f64) / acc
}

pub(crate) fn dist4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Rotation of ℝ⁴ (det +1) best mapping `pairs.0` onto `pairs.1` in least squares,
/// with the largest residual |Q·x − y|.
pub fn fit_rotation(pairs: &[([f64; 4], [f64; 4])]) -> Result<(Matrix4<f64>, f64)> {
    if pairs.len() < 4 {
        return Err(DpwError::SymmetryFit(f64::INFINITY));
    }
    let mut h = Matrix4::<f64>::zeros();
    for (x, y) in pairs {
        h += Vector4::from(*y) * Vector4::from(*x).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(DpwError::SymmetryFit(f64::INFINITY)),
    };
    let d = (u * vt).determinant().signum();
    let mut fix = Matrix4::<f64>::identity();
    fix[(3, 3)] = d;
    let q = u * fix * vt;
    let residual = pairs
        .iter()
        .map(|(x, y)| (q * Vector4::from(*x) - Vector4::from(*y)).norm())
        .fold(0.0, f64::max);
    Ok((q, residual))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Replication {
    pub mesh: SurfaceMesh,
    /// Fitted rotation z ↦ e^{2πi/(m+1)}z and deck generator, row-major.
    pub rotation: [[f64; 4]; 4],
    pub deck: [[f64; 4]; 4],
    pub rotation_residual: f64,
    pub deck_residual: f64,
    /// ‖G₁G₂ − G₂G₁‖ (Frobenius).
    pub commutator: f64,
    /// Largest distance between copies of one glued vertex.
    pub stitch_gap: f64,
    pub copies: usize,
    /// Vertex count before gluing.
    pub unglued_vertices: usize,
}

/// Tolerances for [`replicate_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationTolerance {
    pub fit: f64,
    pub stitch: f64,
}

impl Default for ReplicationTolerance {
    fn default() -> Self {
        ReplicationTolerance { fit: 1e-6, stitch: 1e-6 }
    }
}

fn to_rows(q: &Matrix4<f64>) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = q[(i, j)];
        }
    }
    out
}

/// Fits both generators to the patch and glues the (m+1)(k+1) copies into a closed mesh.
pub fn replicate_symmetry(patch: &Patch, tol: ReplicationTolerance) -> Result<Replication> {
    let prov = &patch.mesh.provenance;
    let (m, k, q) = (prov.m, prov.k, prov.rays_per_sector);
    let n = 2 * m + 2;
    let (g1, rotation_residual) = fit_rotation(&patch.rotation_pairs)?;
    let (g2, deck_residual) = fit_rotation(&patch.deck_pairs)?;
    if rotation_residual > tol.fit || deck_residual > tol.fit {
        return Err(DpwError::SymmetryFit(rotation_residual.max(deck_residual)));
    }
    let commutator = (g1 * g2 - g2 * g1).norm();
    let period = q * n;
    let sheets = k + 1;
    let global = |role: LocalVertex, s: usize, w: usize| -> GlobalVertex {
        let g = |i: usize| (i + 2 * q * w) % period;
        let is_cut = |g: usize| {
            let r = (g + period - q / 2) % (2 * q);
            r > 0 && r < q
        };
        match role {
            LocalVertex::Center => GlobalVertex::Center(s),
            LocalVertex::Infinity => GlobalVertex::Infinity(s),
            LocalVertex::Ring { i, a } => GlobalVertex::Ring(s, g(i), a),
            LocalVertex::UnitInner { i } => {
                if is_cut(g(i)) {
                    GlobalVertex::UnitCut(s, g(i))
                } else {
                    GlobalVertex::Unit(s, g(i))
                }
            }
            LocalVertex::UnitOuter { i } => GlobalVertex::UnitCut((s + 1) % sheets, g(i)),
            LocalVertex::Branch { i } => GlobalVertex::Branch(((g(i) + period - q / 2) / q) % n),
        }
    };
    let mut powers1 = vec![Matrix4::<f64>::identity()];
    for w in 1..=m {
        powers1.push(g1 * powers1[w - 1]);
    }
    let mut powers2 = vec![Matrix4::<f64>::identity()];
    for s in 1..sheets {
        powers2.push(g2 * powers2[s - 1]);
    }
    let mut index: HashMap<GlobalVertex, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut dens = Vec::new();
    let mut faces = Vec::new();
    let mut stitch_gap = 0.0f64;
    for s in 0..sheets {
        for w in 0..=m {
            let g = powers1[w] * powers2[s];
            let map: Vec<usize> = patch
                .roles
                .iter()
                .enumerate()
                .map(|(v, &role)| {
                    let pos = g * Vector4::from(patch.mesh.vertices[v]);
                    let pos = [pos[0], pos[1], pos[2], pos[3]];
                    let label = global(role, s, w);
                    if let Some(&id) = index.get(&label) {
                        stitch_gap = stitch_gap.max(dist4(&vertices[id], &pos));
                        id
                    } else {
                        let id = vertices.len();
                        vertices.push(pos);
                        dens.push(patch.mesh.density[v]);
                        index.insert(label, id);
                        id
                    }
                })
                .collect();
            for f in &patch.mesh.faces {
                faces.push([map[f[0]], map[f[1]], map[f[2]]]);
            }
        }
    }
    if stitch_gap > tol.stitch {
        return Err(DpwError::StitchGap(stitch_gap));
    }
    let copies = sheets * (m + 1);
    Ok(Replication {
        mesh: SurfaceMesh { vertices, faces, density: dens, provenance: prov.clone() },
        rotation: to_rows(&g1),
        deck: to_rows(&g2),
        rotation_residual,
        deck_residual,
        commutator,
        stitch_gap,
        copies,
        unglued_vertices: copies * patch.mesh.vertices.len(),
    })
}
