//! Immersion into S³ ≅ SU(2), symmetry replication, areas, the saddle-tower blow-up
//! and mesh export.

pub mod area;
pub mod blowup;
pub mod export;
pub mod immerse;
pub mod mesh;

use crate::error::Result;
use crate::linalg::C64;
use crate::potential::PotentialParams;
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

pub use area::{area_quadrature, area_report, area_residue, AreaQuadrature, AreaReport, QuadratureResolution};
pub use blowup::{blowup_compare, BlowupReport};
pub use export::{choose_pole, density_csv, export_obj, parse_obj_vertices, stereographic};
pub use immerse::{immerse, ImmersedPoint, ImmersionSettings};
pub use mesh::{fundamental_patch, replicate_symmetry, MeshResolution, Patch, Replication, ReplicationTolerance};

/// Where a mesh came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub m: usize,
    pub k: usize,
    pub t: f64,
    pub rays_per_sector: usize,
    pub rings: usize,
}

/// Triangle mesh on S³ with vertices as unit quaternions (Re α, Im α, Re β, Im β).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 4]>,
    pub faces: Vec<[usize; 3]>,
    pub density: Vec<f64>,
    pub provenance: Provenance,
}

impl SurfaceMesh {
    /// max |‖v‖ − 1| over vertices.
    pub fn max_norm_defect(&self) -> f64 {
        self.vertices.iter().map(|v| (norm4(v) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// V − E + F with edges counted once.
    pub fn euler_characteristic(&self) -> i64 {
        let v = self.vertices.len() as i64;
        let f = self.faces.len() as i64;
        v - self.edge_counts().len() as i64 + f
    }

    /// Undirected edge → number of incident faces.
    pub fn edge_counts(&self) -> std::collections::HashMap<(usize, usize), usize> {
        let mut edges = std::collections::HashMap::new();
        for f in &self.faces {
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    /// True when every edge borders exactly two faces.
    pub fn is_closed(&self) -> bool {
        self.edge_counts().values().all(|&c| c == 2)
    }
}

/// Max distance of the points from the best-fit 2-plane through the origin of ℝ⁴.
///
/// Unit vectors on a common great circle give 0.
pub fn great_circle_deviation(points: &[[f64; 4]]) -> f64 {
    let mut scatter = Matrix4::<f64>::zeros();
    for p in points {
        let v = Vector4::from(*p);
        scatter += v * v.transpose();
    }
    let eig = scatter.symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let plane = [eig.eigenvectors.column(order[0]), eig.eigenvectors.column(order[1])];
    points
        .iter()
        .map(|p| {
            let v = Vector4::from(*p);
            let proj: Vector4<f64> = plane.iter().map(|e| e * e.dot(&v)).sum();
            (v - proj).norm()
        })
        .fold(0.0, f64::max)
}

/// Immersion of `samples` equispaced points of the real segment between the punctures ±1,
/// kept 1.5 guard radii away from them.
pub fn real_segment(params: &PotentialParams, samples: usize, settings: ImmersionSettings) -> Result<Vec<ImmersedPoint>> {
    let a = 1.0 - 1.5 * immerse::GUARD_RADIUS;
    let zs: Vec<C64> = (0..samples)
        .map(|i| C64::new(-a + 2.0 * a * i as f64 / (samples.max(2) - 1) as f64, 0.0))
        .collect();
    immerse(params, &zs, settings)
}

pub(crate) fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// k from t = 1/(2k + 2), if t is of that form.
pub fn sheets_from_t(t: f64) -> Option<usize> {
    let k = 1.0 / (2.0 * t) - 1.0;
    let kr = k.round();
    if kr >= 1.0 && (k - kr).abs() < 1e-6 {
        Some(kr as usize)
    } else {
        None
    }
}
