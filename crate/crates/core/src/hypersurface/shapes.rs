use serde_json::{json, Map, Value};

use super::{build_geometry, RadialGraph, SphereGrid};
use crate::{Error, Result};

/// Strict margin in the validation `H > n + H_MARGIN`.
pub const H_MARGIN: f64 = 1e-8;

fn meta(pairs: Value) -> Map<String, Value> {
    match pairs {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

/// Geodesic sphere of radius `r` whose center sits at distance `offset` from
/// the origin along the first axis, as a radial graph about the origin.
pub fn gen_sphere(r: f64, offset: f64, grid: SphereGrid) -> Result<RadialGraph> {
    grid.validate()?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Generation(format!(
            "radius must be positive, got {r}"
        )));
    }
    if !(offset.is_finite() && offset >= 0.0) {
        return Err(Error::Generation(format!(
            "center offset must be non-negative, got {offset}"
        )));
    }
    if offset >= r {
        return Err(Error::Generation(format!(
            "origin is not inside the sphere (offset {offset} >= radius {r})"
        )));
    }
    let rho = if offset == 0.0 {
        vec![r; grid.len()]
    } else {
        (0..grid.len())
            .map(|k| solve_radius(r, offset, grid.direction(k)[0]))
            .collect::<Result<Vec<_>>>()?
    };
    let meta = meta(json!({"shape": "sphere", "radius": r, "offset": offset}));
    Ok(RadialGraph::new(grid, rho)?.with_meta(meta))
}

/// Root of `cosh R = cosh ρ cosh d - sinh ρ sinh d cos γ` in `ρ ∈ (0, d + R]`,
/// iterated to full double precision (the curvature stencils divide by
/// `sin² φ h²` near the poles and would amplify a looser root).
///
/// The left side minus the right is convex in `ρ`, negative at 0 and
/// non-negative at `d + R`, so Newton from the right end converges; bisection
/// keeps every iterate bracketed.
fn solve_radius(r: f64, d: f64, cos_gamma: f64) -> Result<f64> {
    let (cd, sd, cr) = (d.cosh(), d.sinh() * cos_gamma, r.cosh());
    let f = |x: f64| x.cosh() * cd - x.sinh() * sd - cr;
    let df = |x: f64| x.sinh() * cd - x.cosh() * sd;
    // the root sits exactly at d + R toward the center; widen for roundoff
    let (mut lo, mut hi) = (0.0, (d + r) * (1.0 + 1e-12));
    if f(lo) >= 0.0 || f(hi) < 0.0 {
        return Err(Error::Generation(format!(
            "no radial root for direction cos(gamma) = {cos_gamma}"
        )));
    }
    let mut x = hi;
    for _ in 0..200 {
        let fx = f(x);
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / df(x);
        let mut next = x - step;
        if !(next > lo && next < hi) || !step.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Generation(
        "radial root iteration did not converge".into(),
    ))
}

/// Unnormalised associated Legendre function `P_l^m(x)` without the
/// Condon-Shortley phase.
fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).max(0.0).sqrt();
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let next = ((2 * ll - 1) as f64 * x * cur - (ll + m - 1) as f64 * prev) / (ll - m) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Value of the perturbation mode at a node: `cos(kθ)` on `S^1` with
/// `mode = (k, _)`, `P_l^m(cos φ) cos(mϑ)` on `S^2` with `mode = (l, m)`.
pub fn perturbation_mode(grid: &SphereGrid, mode: (usize, usize), node: usize) -> f64 {
    let (phi, th) = grid.angles(node);
    match grid {
        SphereGrid::Circle { .. } => (mode.0 as f64 * th).cos(),
        SphereGrid::Sphere { .. } => {
            assoc_legendre(mode.0, mode.1, phi.cos()) * (mode.1 as f64 * th).cos()
        }
    }
}

/// `ρ = R + amp · mode`, rejected unless `ρ > 0` and `H > n` at every node.
pub fn gen_perturbed_sphere(
    r: f64,
    amp: f64,
    mode: (usize, usize),
    grid: SphereGrid,
) -> Result<RadialGraph> {
    grid.validate()?;
    if !(r.is_finite() && r > 0.0 && amp.is_finite()) {
        return Err(Error::Generation(format!(
            "invalid perturbation parameters R = {r}, amp = {amp}"
        )));
    }
    if let SphereGrid::Sphere { .. } = grid {
        if mode.1 > mode.0 {
            return Err(Error::Generation(format!(
                "mode order {} exceeds degree {}",
                mode.1, mode.0
            )));
        }
    }
    let rho: Vec<f64> = (0..grid.len())
        .map(|k| r + amp * perturbation_mode(&grid, mode, k))
        .collect();
    if let Some(k) = rho.iter().position(|x| *x <= 0.0) {
        return Err(Error::Generation(format!(
            "perturbation makes rho non-positive at node {k}"
        )));
    }
    let meta = meta(json!({
        "shape": "perturbed",
        "radius": r,
        "amp": amp,
        "mode": [mode.0, mode.1],
    }));
    let graph = RadialGraph::new(grid, rho)?.with_meta(meta);
    let geom = build_geometry(&graph)?;
    let (node, h) = geom.min_mean_curvature();
    let n = grid.n() as f64;
    if h <= n + H_MARGIN {
        return Err(Error::RejectedShape {
            node,
            h_minus_n: h - n,
        });
    }
    Ok(graph)
}
