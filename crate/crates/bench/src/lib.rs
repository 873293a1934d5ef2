//! Fixtures shared by the benchmarks.

use borscat::geometry::{build_profiles, mesh_profile};
use borscat::{BorMesh, GeneratrixProfile, GeometrySpec};

/// Conductor and (when coated) coating meshes of the 23° cone.
pub fn cone_meshes(eps: f64, kappa_max: f64, ppw: f64) -> (BorMesh, Option<BorMesh>) {
    let spec = GeometrySpec::reference_cone(eps);
    let (pec, coat) = build_profiles(&spec).expect("valid cone");
    let coated = spec.is_coated();
    let index = if coated { eps.sqrt() } else { 1.0 };
    let pm = mesh_profile(&pec, kappa_max, ppw, index).expect("mesh");
    let cm = coat
        .filter(|_| coated)
        .map(|c| mesh_profile(&c, kappa_max, ppw, index).expect("mesh"));
    (pm, cm)
}

pub fn sphere_mesh(kappa_max: f64, ppw: f64) -> BorMesh {
    let s = GeneratrixProfile::sphere(1.0, 0.0).expect("sphere");
    mesh_profile(&s, kappa_max, ppw, 1.0).expect("mesh")
}
