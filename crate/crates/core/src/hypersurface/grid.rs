use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Node layout on `S^n`.
///
/// - `Circle`: `n_theta` uniform angles `θ_j = 2πj / n_theta` on `S^1`.
/// - `Sphere`: staggered colatitudes `φ_i = (i + ½)π / n_phi` (no pole nodes)
///   times `n_theta` uniform azimuths on `S^2`; node index `i * n_theta + j`.
///
/// Values are continued across a pole by `(φ, ϑ) → (-φ, ϑ + π)`, which needs
/// an even `n_theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SphereGrid {
    Sphere { n_phi: usize, n_theta: usize },
    Circle { n_theta: usize },
}

/// Fourth-order central first-derivative weights for offsets -2..=2.
pub(crate) const D1: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
/// Fourth-order central second-derivative weights for offsets -2..=2.
pub(crate) const D2: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];

impl SphereGrid {
    pub fn circle(n_theta: usize) -> Result<Self> {
        let g = SphereGrid::Circle { n_theta };
        g.validate()?;
        Ok(g)
    }

    pub fn sphere(n_phi: usize, n_theta: usize) -> Result<Self> {
        let g = SphereGrid::Sphere { n_phi, n_theta };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SphereGrid::Circle { n_theta } if n_theta < 8 => {
                Err(Error::InvalidGrid(format!("n_theta = {n_theta} < 8")))
            }
            SphereGrid::Sphere { n_phi, n_theta } if n_phi < 8 || n_theta < 8 => Err(
                Error::InvalidGrid(format!("grid {n_phi}x{n_theta} has a side < 8")),
            ),
            SphereGrid::Sphere { n_theta, .. } if n_theta % 2 != 0 => Err(Error::InvalidGrid(
                format!("n_theta = {n_theta} must be even for pole continuation"),
            )),
            _ => Ok(()),
        }
    }

    /// Every size multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        match *self {
            SphereGrid::Circle { n_theta } => Self::circle(n_theta * factor),
            SphereGrid::Sphere { n_phi, n_theta } => Self::sphere(n_phi * factor, n_theta * factor),
        }
    }

    /// Dimension `n` of the hypersurface.
    pub fn n(&self) -> usize {
        match self {
            SphereGrid::Circle { .. } => 1,
            SphereGrid::Sphere { .. } => 2,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            SphereGrid::Circle { n_theta } => n_theta,
            SphereGrid::Sphere { n_phi, n_theta } => n_phi * n_theta,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_theta(&self) -> usize {
        match *self {
            SphereGrid::Circle { n_theta } | SphereGrid::Sphere { n_theta, .. } => n_theta,
        }
    }

    /// Characteristic spacing `h` used by convergence studies and `C·h²`
    /// tolerances: `2π / n_theta` on `S^1`, `π / n_phi` on `S^2`.
    pub fn spacing(&self) -> f64 {
        match *self {
            SphereGrid::Circle { n_theta } => 2.0 * PI / n_theta as f64,
            SphereGrid::Sphere { n_phi, .. } => PI / n_phi as f64,
        }
    }

    pub fn h_theta(&self) -> f64 {
        2.0 * PI / self.n_theta() as f64
    }

    pub fn h_phi(&self) -> f64 {
        match *self {
            SphereGrid::Circle { .. } => 0.0,
            SphereGrid::Sphere { n_phi, .. } => PI / n_phi as f64,
        }
    }

    /// `(row, column)` of a node; the row is always 0 on `S^1`.
    pub fn split(&self, node: usize) -> (usize, usize) {
        let nt = self.n_theta();
        (node / nt, node % nt)
    }

    /// `(φ, ϑ)` of a node; `φ = π/2` on `S^1`.
    pub fn angles(&self, node: usize) -> (f64, f64) {
        let (i, j) = self.split(node);
        let theta = self.h_theta() * j as f64;
        match self {
            SphereGrid::Circle { .. } => (PI / 2.0, theta),
            SphereGrid::Sphere { .. } => ((i as f64 + 0.5) * self.h_phi(), theta),
        }
    }

    /// Unit direction of the node in `R^{n+1}`.
    pub fn direction(&self, node: usize) -> Vec<f64> {
        let (phi, th) = self.angles(node);
        match self {
            SphereGrid::Circle { .. } => vec![th.cos(), th.sin()],
            SphereGrid::Sphere { .. } => {
                vec![phi.sin() * th.cos(), phi.sin() * th.sin(), phi.cos()]
            }
        }
    }

    /// Quadrature weight of the node for `∫_{S^n} · dσ`: trapezoid in azimuth,
    /// midpoint with `sin φ` in colatitude.
    pub fn quad_weight(&self, node: usize) -> f64 {
        match self {
            SphereGrid::Circle { .. } => self.h_theta(),
            SphereGrid::Sphere { .. } => {
                let (phi, _) = self.angles(node);
                self.h_phi() * self.h_theta() * phi.sin()
            }
        }
    }

    /// Node index for a possibly out-of-range `(row, column)`, using
    /// periodicity in azimuth and continuation across the poles.
    pub fn wrap(&self, i: isize, j: isize) -> usize {
        let nt = self.n_theta() as isize;
        match *self {
            SphereGrid::Circle { .. } => j.rem_euclid(nt) as usize,
            SphereGrid::Sphere { n_phi, .. } => {
                let np = n_phi as isize;
                let (ii, jj) = if i < 0 {
                    (-1 - i, j + nt / 2)
                } else if i >= np {
                    (2 * np - 1 - i, j + nt / 2)
                } else {
                    (i, j)
                };
                debug_assert!((0..np).contains(&ii), "row {i} beyond one continuation");
                ii as usize * nt as usize + jj.rem_euclid(nt) as usize
            }
        }
    }

    /// Grid neighbours (8-neighbourhood on `S^2`, ±1 on `S^1`), including
    /// the nodes reached through the poles. Sorted and deduplicated.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let (i, j) = self.split(node);
        let (i, j) = (i as isize, j as isize);
        let mut out = Vec::with_capacity(8);
        match self {
            SphereGrid::Circle { .. } => {
                out.push(self.wrap(0, j - 1));
                out.push(self.wrap(0, j + 1));
            }
            SphereGrid::Sphere { .. } => {
                for di in -1..=1 {
                    for dj in -1..=1 {
                        if di != 0 || dj != 0 {
                            out.push(self.wrap(i + di, j + dj));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|&k| k != node);
        out
    }
}
