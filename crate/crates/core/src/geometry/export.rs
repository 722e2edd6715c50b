//! Stereographic projection S³ → ℝ³ and OBJ/CSV output.

use super::{norm4, SurfaceMesh};
use crate::error::{DpwError, Result};
use std::fmt::Write;

/// Minimal distance between the projection pole and any vertex.
pub const POLE_CLEARANCE: f64 = 0.1;

/// Orthonormal basis of the hyperplane orthogonal to `pole`.
fn complement_basis(pole: &[f64; 4]) -> [[f64; 4]; 3] {
    let mut basis: Vec<[f64; 4]> = Vec::with_capacity(3);
    for e in 0..4 {
        let mut v = [0.0; 4];
        v[e] = 1.0;
        for b in std::iter::once(pole).chain(basis.iter()) {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for i in 0..4 {
                v[i] -= d * b[i];
            }
        }
        let r = norm4(&v);
        if r > 1e-6 {
            basis.push(v.map(|x| x / r));
        }
        if basis.len() == 3 {
            break;
        }
    }
    [basis[0], basis[1], basis[2]]
}

/// Projection from `pole` onto the hyperplane through the origin orthogonal to it.
///
/// For the pole −Id this is (x₂, x₃, x₄)/(1 + x₁).
pub fn stereographic(v: &[f64; 4], pole: &[f64; 4]) -> [f64; 3] {
    let basis = complement_basis(pole);
    let vp: f64 = v.iter().zip(pole).map(|(x, y)| x * y).sum();
    let s = 1.0 / (1.0 - vp);
    let mut out = [0.0; 3];
    for (o, b) in out.iter_mut().zip(&basis) {
        *o = s * v.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    }
    out
}

fn min_distance(mesh: &SurfaceMesh, pole: &[f64; 4]) -> f64 {
    mesh.vertices
        .iter()
        .map(|v| v.iter().zip(pole).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// −Id unless a vertex comes within [`POLE_CLEARANCE`]; then the farthest of ±e_i.
pub fn choose_pole(mesh: &SurfaceMesh) -> [f64; 4] {
    let default = [-1.0, 0.0, 0.0, 0.0];
    if min_distance(mesh, &default) >= POLE_CLEARANCE {
        return default;
    }
    let mut best = default;
    let mut best_d = min_distance(mesh, &default);
    for e in 0..4 {
        for s in [1.0, -1.0] {
            let mut p = [0.0; 4];
            p[e] = s;
            let d = min_distance(mesh, &p);
            if d > best_d {
                best = p;
                best_d = d;
            }
        }
    }
    best
}

/// OBJ text of the projected mesh; floats use the shortest round-trip representation.
pub fn export_obj(mesh: &SurfaceMesh, pole: &[f64; 4]) -> Result<String> {
    let d = min_distance(mesh, pole);
    if d < POLE_CLEARANCE {
        return Err(DpwError::PoleTooClose(d));
    }
    let prov = &mesh.provenance;
    let mut out = String::new();
    let _ = writeln!(out, "# dpw surface m={} k={} t={:?}", prov.m, prov.k, prov.t);
    let _ = writeln!(out, "# pole {:?}", pole);
    for v in &mesh.vertices {
        let p = stereographic(v, pole);
        if !p.iter().all(|x| x.is_finite()) {
            return Err(DpwError::PoleTooClose(d));
        }
        let _ = writeln!(out, "v {:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    Ok(out)
}

/// Per-vertex density as CSV with header `vertex,density`.
pub fn density_csv(mesh: &SurfaceMesh) -> String {
    let mut out = String::from("vertex,density\n");
    for (i, d) in mesh.density.iter().enumerate() {
        let _ = writeln!(out, "{},{:?}", i + 1, d);
    }
    out
}

/// Vertex coordinates from OBJ text.
pub fn parse_obj_vertices(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        if it.next() != Some("v") {
            continue;
        }
        let mut p = [0.0; 3];
        for x in p.iter_mut() {
            let tok = it.next().ok_or_else(|| DpwError::Serialization(format!("line {}: short vertex", ln + 1)))?;
            *x = tok.parse().map_err(|e| DpwError::Serialization(format!("line {}: {e}", ln + 1)))?;
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Provenance;

    fn mesh(vs: Vec<[f64; 4]>) -> SurfaceMesh {
        let n = vs.len();
        SurfaceMesh {
            vertices: vs,
            faces: vec![[0, 1, 2]],
            density: vec![1.0; n],
            provenance: Provenance { m: 1, k: 1, t: 0.25, rays_per_sector: 2, rings: 1 },
        }
    }

    #[test]
    fn projection_from_minus_identity() {
        let v = [0.6, 0.0, 0.8, 0.0];
        let p = stereographic(&v, &[-1.0, 0.0, 0.0, 0.0]);
        assert!((p[0]).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15 && p[2].abs() < 1e-15);
        let id = stereographic(&[1.0, 0.0, 0.0, 0.0], &[-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(id, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn obj_round_trip_is_exact() {
        let s = 0.5f64.sqrt();
        let m = mesh(vec![[1.0, 0.0, 0.0, 0.0], [s, s, 0.0, 0.0], [0.1, 0.2, 0.3, (1.0f64 - 0.14).sqrt()]]);
        let pole = choose_pole(&m);
        let text = export_obj(&m, &pole).unwrap();
        let back = parse_obj_vertices(&text).unwrap();
        for (v, b) in m.vertices.iter().zip(&back) {
            let p = stereographic(v, &pole);
            assert_eq!(p, *b);
        }
    }

    #[test]
    fn close_pole_is_rejected_and_replaced() {
        let m = mesh(vec![[-1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]);
        assert!(matches!(export_obj(&m, &[-1.0, 0.0, 0.0, 0.0]), Err(DpwError::PoleTooClose(_))));
        let p = choose_pole(&m);
        assert!(min_distance(&m, &p) >= POLE_CLEARANCE);
        assert!(export_obj(&m, &p).is_ok());
    }
}
