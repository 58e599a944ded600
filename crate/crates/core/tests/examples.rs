use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

mod spectrum {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectrum.rs"));
}
mod phase_portrait {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/phase_portrait.rs"));
}
mod profile_orbit {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/profile_orbit.rs"));
}
mod graph_decay {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/graph_decay.rs"));
}
mod density {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/density.rs"));
}
mod torus_flux {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/torus_flux.rs"));
}
mod ode_lemma {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ode_lemma.rs"));
}
mod mesh_export {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/mesh_export.rs"));
}
mod invariant_region {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/invariant_region.rs"));
}

#[test]
fn spectrum_example() {
    let s = spectrum::run_example().unwrap();
    assert_eq!(s.clifford.len(), 6);
    assert!((s.clifford[0].plus.re + 1.5).abs() < 1e-12);
    let focus: Vec<u32> = s
        .constant_kinds
        .iter()
        .filter(|(_, k)| *k == simons_core::spectral::RootKind::ComplexConjugate)
        .map(|(n, _)| *n)
        .collect();
    assert_eq!(focus, vec![2, 3, 4, 5]);
    assert!(s.band_roots >= 1);
}

#[test]
fn phase_portrait_example() {
    let (portrait, svg) = phase_portrait::run_example().unwrap();
    assert!(svg.exists());
    for o in &portrait.orbits {
        let e = o.end();
        let dv = (e.phi - FRAC_PI_4).rem_euclid(2.0 * std::f64::consts::PI);
        let dv = dv.min(2.0 * std::f64::consts::PI - dv);
        assert!((e.theta - FRAC_PI_4).abs() < 1e-6 && dv < 1e-6, "{}", o.label);
    }
}

#[test]
fn profile_orbit_example() {
    let curves = profile_orbit::run_example().unwrap();
    assert_eq!(curves.len(), 10);
    assert!(curves.iter().all(|c| c.terminal_distance() < 1e-6));
}

#[test]
fn graph_decay_example() {
    let fits = graph_decay::run_example().unwrap();
    assert!((fits[0].1.rate + 1.5).abs() < 0.075);
    assert!((fits[1].1.rate - (-4.0 + 2f64.sqrt())).abs() < 0.02 * (4.0 - 2f64.sqrt()));
}

#[test]
fn density_example() {
    let d = density::run_example().unwrap();
    assert!((d.limit - FRAC_PI_2).abs() < 1e-3);
    assert!((d.cone - FRAC_PI_2).abs() < 1e-12);
    assert!(d.max_decrease <= 1e-8);
    assert!((d.pole_small_r - 1.0).abs() < 1e-4);
    assert!(d.exact_cone_spread < 1e-9);
}

#[test]
fn torus_flux_example() {
    let (residual, fluxes) = torus_flux::run_example().unwrap();
    assert!(residual < 1e-6);
    assert!(fluxes.iter().all(|f| f.norm() <= 1e-6));
}

#[test]
fn ode_lemma_example() {
    let suite = ode_lemma::run_example().unwrap();
    assert_eq!(suite.rows.len(), 200);
    assert!(suite.max_reconstruction_error() <= 1e-7);
    assert!(suite.all_v_estimates_hold());
}

#[test]
fn mesh_export_example() {
    let (points, obj) = mesh_export::run_example().unwrap();
    assert!(points > 0);
    assert!(obj.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn invariant_region_example() {
    let reports = invariant_region::run_example().unwrap();
    assert_eq!(reports.len(), 12);
    assert!(reports.iter().all(|r| r.holds()));
}
