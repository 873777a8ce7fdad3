use std::f64::consts::PI;

use hk_core::hypersurface::{
    build_geometry, enclosed_volume, gen_perturbed_sphere, gen_sphere, weighted_volume,
    RadialGraph, SphereGrid,
};
use hk_core::hypgeo::{minkowski, radial_field};
use hk_core::identities::hk_shifted;
use hk_core::tolerances::Tolerance;

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Largest errors of the finite-difference gradient and Hessian of `V`
/// against `<λ∂_r, X_a>` and `V g - V_ν h`, over nodes away from the poles.
fn potential_derivative_errors(s: &RadialGraph) -> (f64, f64) {
    let grid = *s.grid();
    let geom = build_geometry(s).unwrap();
    let origin = s.origin();
    let (hp, ht) = (grid.h_phi(), grid.h_theta());
    let SphereGrid::Sphere { n_phi, n_theta } = grid else {
        unreachable!()
    };
    let x = |i: isize, j: isize| s.position(grid.wrap(i, j)).coords().to_vec();
    let v = |i: isize, j: isize| geom.nodes()[grid.wrap(i, j)].v;
    let (mut grad_err, mut hess_err) = (0.0f64, 0.0f64);
    for i in (n_phi / 8)..(n_phi - n_phi / 8) {
        for j in (0..n_theta).step_by(3) {
            let (i, j) = (i as isize, j as isize);
            let node = grid.wrap(i, j);
            let g = &geom.nodes()[node];
            let sin = grid.angles(node).0.sin();
            let tangents = s.coordinate_tangents(node);
            let field = radial_field(&g.position, &origin).field;
            let fd = [
                (v(i + 1, j) - v(i - 1, j)) / (2.0 * hp),
                (v(i, j + 1) - v(i, j - 1)) / (2.0 * ht),
            ];
            for a in 0..2 {
                let exact = minkowski(field.dir(), tangents[a].dir());
                grad_err = grad_err.max((fd[a] - exact).abs());
            }
            let xc = x(i, j);
            let second = [
                [
                    sub(&sub(&x(i + 1, j), &xc), &sub(&xc, &x(i - 1, j))),
                    sub(
                        &sub(&x(i + 1, j + 1), &x(i + 1, j - 1)),
                        &sub(&x(i - 1, j + 1), &x(i - 1, j - 1)),
                    ),
                ],
                [
                    Vec::new(),
                    sub(&sub(&x(i, j + 1), &xc), &sub(&xc, &x(i, j - 1))),
                ],
            ];
            let scale = [[hp * hp, 4.0 * hp * ht], [0.0, ht * ht]];
            let frame = [1.0, sin];
            for (a, b) in [(0, 0), (0, 1), (1, 1)] {
                let d: Vec<f64> = second[a][b].iter().map(|c| c / scale[a][b]).collect();
                let fd_hess = minkowski(&d, g.normal.dir()) * g.v_nu
                    - g.v * minkowski(&d, g.position.coords());
                let f = frame[a] * frame[b];
                let exact = g.v * g.metric.get(a, b) * f - g.v_nu * g.second_form.get(a, b) * f;
                hess_err = hess_err.max((fd_hess - exact).abs());
            }
        }
    }
    (grad_err, hess_err)
}

#[test]
fn gradient_and_hessian_of_the_potential() {
    let shape = |np: usize| {
        gen_perturbed_sphere(1.0, 0.05, (2, 1), SphereGrid::sphere(np, 2 * np).unwrap()).unwrap()
    };
    let (g1, h1) = potential_derivative_errors(&shape(32));
    let (g2, h2) = potential_derivative_errors(&shape(64));
    assert!(g2 < 1e-3 && h2 < 1e-3, "errors {g2:e} {h2:e}");
    assert!(order(g1, g2) > 1.8, "gradient order {}", order(g1, g2));
    assert!(order(h1, h2) > 1.8, "hessian order {}", order(h1, h2));
}

#[test]
fn sphere_area_and_weighted_volume_converge_at_second_order() {
    let r = 1.0f64;
    let area = 4.0 * PI * r.sinh().powi(2);
    let wvol = 4.0 * PI * r.sinh().powi(3) / 3.0;
    let errs: Vec<(f64, f64)> = [16usize, 32, 64]
        .iter()
        .map(|&np| {
            let s = gen_sphere(r, 0.0, SphereGrid::sphere(np, 2 * np).unwrap()).unwrap();
            let geom = build_geometry(&s).unwrap();
            (
                (geom.area() - area).abs(),
                (weighted_volume(&s) - wvol).abs(),
            )
        })
        .collect();
    for w in errs.windows(2) {
        assert!(order(w[0].0, w[1].0) >= 1.9);
        assert!(order(w[0].1, w[1].1) >= 1.9);
    }
}

#[test]
fn gauss_bonnet_for_a_curve() {
    let grid = SphereGrid::circle(256).unwrap();
    let s = gen_perturbed_sphere(1.0, 0.1, (2, 0), grid).unwrap();
    let geom = build_geometry(&s).unwrap();
    let turning = geom.integrate(|g| g.kappa.values()[0]);
    let defect = turning - enclosed_volume(&s) - 2.0 * PI;
    assert!(defect.abs() < 1e-4, "{defect:e}");
}

#[test]
fn offset_sphere_is_umbilic_with_sphere_curvature() {
    let r = 1.0f64;
    let s = gen_sphere(r, 0.3, SphereGrid::sphere(64, 128).unwrap()).unwrap();
    let geom = build_geometry(&s).unwrap();
    let coth = 1.0 / r.tanh();
    assert!((geom.min_kappa() - coth).abs() < 1e-5);
    assert!((geom.max_kappa() - coth).abs() < 1e-5);
    // the area does not depend on where the centre is
    let area = 4.0 * PI * r.sinh().powi(2);
    assert!((geom.area() - area).abs() < 1e-3 * area);
}

#[test]
fn azimuthal_rotation_is_exact() {
    let grid = SphereGrid::sphere(24, 48).unwrap();
    let s = gen_perturbed_sphere(1.0, 0.05, (2, 1), grid).unwrap();
    let a = build_geometry(&s).unwrap();
    let c0 = hk_shifted(&a, &s, Tolerance::Auto).unwrap();
    for shift in [1, 7, 24] {
        let r = s.rotated_azimuth(shift);
        let b = build_geometry(&r).unwrap();
        assert!((a.area() - b.area()).abs() <= 1e-12 * a.area());
        let c = hk_shifted(&b, &r, Tolerance::Auto).unwrap();
        assert!((c.deficit() - c0.deficit()).abs() <= 1e-12 * c0.lhs.abs());
    }
}

#[test]
fn circle_curvature_is_coth() {
    let r = 0.7f64;
    let s = gen_sphere(r, 0.2, SphereGrid::circle(128).unwrap()).unwrap();
    let geom = build_geometry(&s).unwrap();
    for g in geom.nodes() {
        assert!((g.kappa.values()[0] - 1.0 / r.tanh()).abs() < 1e-6);
    }
}
