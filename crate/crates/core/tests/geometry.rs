use dpw_core::geometry::{
    area_report, choose_pole, export_obj, fundamental_patch, great_circle_deviation, immerse, parse_obj_vertices,
    real_segment, replicate_symmetry, stereographic, ImmersionSettings, MeshResolution, QuadratureResolution,
    ReplicationTolerance,
};
use dpw_core::potential::PotentialParams;
use dpw_core::solver::{continuation_solve, SolverConfig};
use dpw_core::{DpwError, C64};
use std::sync::OnceLock;

const M: usize = 2;
const K: usize = 5;

fn solved() -> &'static PotentialParams {
    static CELL: OnceLock<PotentialParams> = OnceLock::new();
    CELL.get_or_init(|| continuation_solve(M, K, &SolverConfig::default()).unwrap().params)
}

fn settings() -> ImmersionSettings {
    ImmersionSettings::for_t(solved().t)
}

#[test]
fn immersed_points_lie_on_the_sphere_and_respect_reflection() {
    let p = solved();
    let zs = [C64::new(0.3, 0.2), C64::new(0.3, -0.2), C64::new(-0.5, 0.4), C64::new(-0.5, -0.4), C64::new(1.6, 0.7), C64::new(1.6, -0.7)];
    let pts = immerse(p, &zs, settings()).unwrap();
    for pt in &pts {
        let norm: f64 = pt.f.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
        assert!(pt.density > 0.0);
        assert!(pt.unitarity < 5e-8);
    }
    for pair in pts.chunks(2) {
        let (a, b) = (pair[0].f, pair[1].f);
        let mirrored = [a[0], -a[1], a[2], -a[3]];
        let d = mirrored.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-8, "{d:.3e}");
        assert!((pair[0].density - pair[1].density).abs() < 1e-8 * pair[0].density);
    }
}

#[test]
fn samples_near_punctures_are_refused() {
    let p = solved();
    let z = p.puncture(1) * 0.99;
    let r = immerse(p, &[z], settings());
    assert!(matches!(r, Err(DpwError::GuardViolation(_))));
}

#[test]
fn real_segment_is_a_great_circle_arc() {
    let pts = real_segment(solved(), 21, settings()).unwrap();
    let f: Vec<[f64; 4]> = pts.iter().map(|p| p.f).collect();
    let dev = great_circle_deviation(&f);
    assert!(dev < 1e-8, "{dev:.3e}");
    assert!(f.iter().all(|v| v[1].abs() < 1e-10 && v[3].abs() < 1e-10));
}

#[test]
fn area_quadrature_agrees_with_residue_formula() {
    let rep = area_report(solved(), QuadratureResolution::default(), settings()).unwrap();
    println!("{rep:?}");
    assert_eq!(rep.k, K);
    assert!(rep.relative_gap < 1e-3, "{:.3e}", rep.relative_gap);
    // strictly below the limit area 8π(m+1) of the degenerate family
    assert!(rep.area_residue < 8.0 * std::f64::consts::PI * (M + 1) as f64);
}

#[test]
fn closed_mesh_with_genus_mk_and_exact_obj_export() {
    let res = MeshResolution { rays_per_sector: 2, rings: 3 };
    let patch = fundamental_patch(solved(), res, settings()).unwrap();
    let rep = replicate_symmetry(&patch, ReplicationTolerance::default()).unwrap();
    let mesh = &rep.mesh;
    assert!(mesh.is_closed());
    assert_eq!(mesh.euler_characteristic(), 2 - 2 * (M * K) as i64);
    assert_eq!(rep.copies, (M + 1) * (K + 1));
    assert!(mesh.max_norm_defect() < 1e-8);
    let pole = choose_pole(mesh);
    let text = export_obj(mesh, &pole).unwrap();
    let back = parse_obj_vertices(&text).unwrap();
    assert_eq!(back.len(), mesh.vertices.len());
    for (v, b) in mesh.vertices.iter().zip(&back) {
        assert_eq!(stereographic(v, &pole), *b);
    }
}
