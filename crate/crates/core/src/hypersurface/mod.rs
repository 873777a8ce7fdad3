//! Star-shaped closed hypersurfaces as radial graphs `r = ρ(θ)` over `S^n`
//! in geodesic polar coordinates `dr² + sinh²r g_{S^n}` about the origin.

mod geometry;
mod grid;
mod io;
mod shapes;

pub use geometry::{
    area_integral, build_geometry, enclosed_volume, weighted_volume, NodeGeometry, SurfaceGeometry,
};
pub use grid::SphereGrid;
pub use shapes::{gen_perturbed_sphere, gen_sphere, perturbation_mode, H_MARGIN};

use serde_json::{Map, Value};

use crate::hypgeo::{HyperPoint, TangentVector};
use crate::{Error, Result};

use grid::{D1, D2};

/// Discrete radial graph: `rho[k] > 0` is the hyperbolic distance from the
/// origin to the surface along the direction of grid node `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGraph {
    grid: SphereGrid,
    rho: Vec<f64>,
    meta: Map<String, Value>,
}

/// `ρ` and its coordinate derivatives at a node, in the coordinates
/// `θ` (`S^1`) or `(φ, ϑ)` (`S^2`). Unused slots are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub rho: f64,
    pub d1: [f64; 2],
    pub d2: [[f64; 2]; 2],
}

impl RadialGraph {
    pub fn new(grid: SphereGrid, rho: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if rho.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} radial samples, got {}",
                grid.len(),
                rho.len()
            )));
        }
        if let Some(k) = rho.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "rho must be finite and positive, node {k} has {}",
                rho[k]
            )));
        }
        Ok(Self {
            grid,
            rho,
            meta: Map::new(),
        })
    }

    pub fn with_meta(mut self, meta: Map<String, Value>) -> Self {
        self.meta = meta;
        self
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn meta(&self) -> &Map<String, Value> {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut Map<String, Value> {
        &mut self.meta
    }

    /// Center of the polar coordinates.
    pub fn origin(&self) -> HyperPoint {
        HyperPoint::origin(self.n() + 1)
    }

    #[inline]
    fn at(&self, i: isize, j: isize) -> f64 {
        self.rho[self.grid.wrap(i, j)]
    }

    /// Fourth-order central differences of `ρ` at a node.
    pub fn jet(&self, node: usize) -> Jet {
        let (i, j) = self.grid.split(node);
        let (i, j) = (i as isize, j as isize);
        let ht = self.grid.h_theta();
        let mut jet = Jet {
            rho: self.rho[node],
            d1: [0.0; 2],
            d2: [[0.0; 2]; 2],
        };
        match self.grid {
            SphereGrid::Circle { .. } => {
                let (mut d1, mut d2) = (0.0, 0.0);
                for (o, (a, b)) in D1.iter().zip(D2.iter()).enumerate() {
                    let v = self.at(0, j + o as isize - 2);
                    d1 += a * v;
                    d2 += b * v;
                }
                jet.d1[0] = d1 / ht;
                jet.d2[0][0] = d2 / (ht * ht);
            }
            SphereGrid::Sphere { .. } => {
                let hp = self.grid.h_phi();
                let (mut dp, mut dt, mut dpp, mut dtt, mut dpt) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for o in 0..5 {
                    let off = o as isize - 2;
                    let vp = self.at(i + off, j);
                    let vt = self.at(i, j + off);
                    dp += D1[o] * vp;
                    dpp += D2[o] * vp;
                    dt += D1[o] * vt;
                    dtt += D2[o] * vt;
                    for (q, wq) in D1.iter().enumerate() {
                        if D1[o] != 0.0 && *wq != 0.0 {
                            dpt += D1[o] * wq * self.at(i + off, j + q as isize - 2);
                        }
                    }
                }
                jet.d1 = [dp / hp, dt / ht];
                jet.d2 = [
                    [dpp / (hp * hp), dpt / (hp * ht)],
                    [dpt / (hp * ht), dtt / (ht * ht)],
                ];
            }
        }
        jet
    }

    /// Position `cosh ρ o + sinh ρ θ` of a node on the hyperboloid.
    pub fn position(&self, node: usize) -> HyperPoint {
        let r = self.rho[node];
        let dir = self.grid.direction(node);
        let mut coords = Vec::with_capacity(dir.len() + 1);
        coords.push(r.cosh());
        coords.extend(dir.iter().map(|d| r.sinh() * d));
        HyperPoint::from_raw(coords)
    }

    /// Coordinate tangent vectors `∂X/∂θ` (`S^1`) or `∂X/∂φ, ∂X/∂ϑ` (`S^2`)
    /// at a node, using the discrete derivatives of `ρ`.
    pub fn coordinate_tangents(&self, node: usize) -> Vec<TangentVector> {
        let jet = self.jet(node);
        let (s, c) = (jet.rho.sinh(), jet.rho.cosh());
        let theta = self.grid.direction(node);
        let radial: Vec<f64> = std::iter::once(s)
            .chain(theta.iter().map(|t| c * t))
            .collect();
        let (phi, th) = self.grid.angles(node);
        let dirs: Vec<Vec<f64>> = match self.grid {
            SphereGrid::Circle { .. } => vec![vec![-th.sin(), th.cos()]],
            SphereGrid::Sphere { .. } => vec![
                vec![phi.cos() * th.cos(), phi.cos() * th.sin(), -phi.sin()],
                vec![-phi.sin() * th.sin(), phi.sin() * th.cos(), 0.0],
            ],
        };
        let pos = self.position(node);
        dirs.iter()
            .enumerate()
            .map(|(a, dtheta)| {
                let v: Vec<f64> = std::iter::once(jet.d1[a] * radial[0])
                    .chain(
                        radial[1..]
                            .iter()
                            .zip(dtheta)
                            .map(|(r, t)| jet.d1[a] * r + s * t),
                    )
                    .collect();
                TangentVector::project(pos.clone(), &v)
            })
            .collect()
    }

    /// Same surface with every azimuth advanced by `shift` grid columns
    /// (an isometry fixing the origin).
    pub fn rotated_azimuth(&self, shift: usize) -> Self {
        let nt = self.grid.n_theta();
        let rho = (0..self.grid.len())
            .map(|k| {
                let (i, j) = self.grid.split(k);
                self.rho[i * nt + (j + nt - shift % nt) % nt]
            })
            .collect();
        Self {
            grid: self.grid,
            rho,
            meta: self.meta.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_of_smooth_function_is_fourth_order() {
        // ρ = 1 + 0.1 z² has known derivatives in (φ, ϑ).
        let err = |np: usize| {
            let grid = SphereGrid::sphere(np, 2 * np).unwrap();
            let rho: Vec<f64> = (0..grid.len())
                .map(|k| 1.0 + 0.1 * grid.angles(k).0.cos().powi(2))
                .collect();
            let s = RadialGraph::new(grid, rho).unwrap();
            (0..grid.len())
                .map(|k| {
                    let phi = grid.angles(k).0;
                    let j = s.jet(k);
                    let d1 = -0.1 * (2.0 * phi).sin();
                    let d2 = -0.2 * (2.0 * phi).cos();
                    (j.d1[0] - d1)
                        .abs()
                        .max((j.d2[0][0] - d2).abs())
                        .max(j.d1[1].abs())
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e1 < 1e-3 && (e1 / e2).log2() > 3.8, "{e1} {e2}");
    }

    #[test]
    fn construction_validates() {
        let g = SphereGrid::circle(8).unwrap();
        assert!(RadialGraph::new(g, vec![1.0; 7]).is_err());
        let mut rho = vec![1.0; 8];
        rho[3] = -0.1;
        assert!(RadialGraph::new(g, rho).is_err());
    }

    #[test]
    fn azimuthal_rotation_permutes_samples() {
        let g = SphereGrid::sphere(8, 16).unwrap();
        let rho: Vec<f64> = (0..g.len()).map(|k| 1.0 + 0.01 * k as f64).collect();
        let s = RadialGraph::new(g, rho).unwrap();
        let r = s.rotated_azimuth(3);
        assert_eq!(r.rho()[g.wrap(2, 5)], s.rho()[g.wrap(2, 2)]);
        assert_eq!(s.rotated_azimuth(16), s);
    }
}
