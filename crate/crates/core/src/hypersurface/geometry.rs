use rayon::prelude::*;

use super::{RadialGraph, SphereGrid};
use crate::hypgeo::{potential_v, radial_field, HyperPoint, TangentVector};
use crate::numeric::par_sum;
use crate::symfun::{EigenTuple, SymMatrix};
use crate::{Error, Result};

/// Differential geometry of the surface at one grid node.
///
/// `metric` and `second_form` are expressed in the frame `ê_a` obtained by
/// normalising the coordinate directions on the unit sphere (`∂_θ` on `S^1`;
/// `∂_φ`, `∂_ϑ / sin φ` on `S^2`). `weingarten` is the shape operator in a
/// `g`-orthonormal frame, hence symmetric.
#[derive(Debug, Clone)]
pub struct NodeGeometry {
    pub position: HyperPoint,
    pub normal: TangentVector,
    pub metric: SymMatrix,
    pub second_form: SymMatrix,
    pub weingarten: SymMatrix,
    pub kappa: EigenTuple,
    pub kappa_shifted: EigenTuple,
    pub v: f64,
    pub v_nu: f64,
    pub area_weight: f64,
}

impl NodeGeometry {
    pub fn mean_curvature(&self) -> f64 {
        self.kappa.sum()
    }

    /// `|h|² = Σ κ_i²`.
    pub fn norm_h_squared(&self) -> f64 {
        self.kappa.values().iter().map(|k| k * k).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    grid: SphereGrid,
    nodes: Vec<NodeGeometry>,
}

impl SurfaceGeometry {
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    pub fn nodes(&self) -> &[NodeGeometry] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_Σ f dμ` with a deterministic compensated reduction.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&NodeGeometry) -> f64 + Sync,
    {
        par_sum(self.nodes.len(), |k| {
            let node = &self.nodes[k];
            f(node) * node.area_weight
        })
    }

    pub fn area(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// Node with the smallest mean curvature and its value.
    pub fn min_mean_curvature(&self) -> (usize, f64) {
        self.nodes
            .iter()
            .map(NodeGeometry::mean_curvature)
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (k, h)| if h < acc.1 { (k, h) } else { acc },
            )
    }

    pub fn max_mean_curvature(&self) -> f64 {
        self.nodes
            .iter()
            .map(NodeGeometry::mean_curvature)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_kappa(&self) -> f64 {
        self.nodes
            .iter()
            .map(|g| g.kappa.values()[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_kappa(&self) -> f64 {
        self.nodes
            .iter()
            .map(|g| g.kappa.values()[g.kappa.len() - 1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max κ - min κ` over all nodes and directions; zero exactly on
    /// geodesic spheres.
    pub fn umbilicity_spread(&self) -> f64 {
        self.max_kappa() - self.min_kappa()
    }
}

/// `Σ integrand[k] · dμ_k`.
pub fn area_integral(geom: &SurfaceGeometry, integrand: &[f64]) -> f64 {
    assert_eq!(integrand.len(), geom.len(), "one integrand value per node");
    par_sum(geom.len(), |k| integrand[k] * geom.nodes[k].area_weight)
}

/// `∫_Ω cosh r dvol`, integrating `cosh r sinh^n r` exactly in `r`.
pub fn weighted_volume(s: &RadialGraph) -> f64 {
    let n = s.n() as i32;
    let grid = s.grid();
    par_sum(grid.len(), |k| {
        grid.quad_weight(k) * s.rho()[k].sinh().powi(n + 1) / (n + 1) as f64
    })
}

/// Hyperbolic volume (area for `n = 1`) of the enclosed domain.
pub fn enclosed_volume(s: &RadialGraph) -> f64 {
    let grid = s.grid();
    par_sum(grid.len(), |k| {
        let r = s.rho()[k];
        let radial = match grid.n() {
            1 => r.cosh() - 1.0,
            _ => 0.5 * (r.sinh() * r.cosh() - r),
        };
        grid.quad_weight(k) * radial
    })
}

/// Computes the geometry at every node. Errors report the lowest failing node.
pub fn build_geometry(s: &RadialGraph) -> Result<SurfaceGeometry> {
    let origin = s.origin();
    let results: Vec<Result<NodeGeometry>> = (0..s.grid().len())
        .into_par_iter()
        .map(|k| node_geometry(s, &origin, k))
        .collect();
    let nodes = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGeometry {
        grid: *s.grid(),
        nodes,
    })
}

fn degenerate(node: usize, reason: &str) -> Error {
    Error::DegenerateSurface {
        node,
        reason: reason.to_string(),
    }
}

fn node_geometry(s: &RadialGraph, origin: &HyperPoint, k: usize) -> Result<NodeGeometry> {
    let grid = s.grid();
    let n = grid.n();
    let jet = s.jet(k);
    let (sh, ch) = (jet.rho.sinh(), jet.rho.cosh());
    let (phi, th) = grid.angles(k);

    // Gradient and covariant Hessian of ρ on the unit sphere, in the frame ê_a.
    let (grad, hess): (Vec<f64>, [[f64; 2]; 2]) = match grid {
        SphereGrid::Circle { .. } => (vec![jet.d1[0]], [[jet.d2[0][0], 0.0], [0.0, 0.0]]),
        SphereGrid::Sphere { .. } => {
            let (sp, cp) = (phi.sin(), phi.cos());
            let (rp, rt) = (jet.d1[0], jet.d1[1]);
            let h11 = jet.d2[0][0];
            let h12 = (jet.d2[0][1] - cp / sp * rt) / sp;
            let h22 = (jet.d2[1][1] + sp * cp * rp) / (sp * sp);
            (vec![rp, rt / sp], [[h11, h12], [h12, h22]])
        }
    };
    let grad2: f64 = grad.iter().map(|g| g * g).sum();
    let w = (1.0 + grad2 / (sh * sh)).sqrt();

    let metric = SymMatrix::from_lower_fn(n, |a, b| {
        grad[a] * grad[b] + if a == b { sh * sh } else { 0.0 }
    });
    let second_form = SymMatrix::from_lower_fn(n, |a, b| {
        let diag = if a == b { sh * ch } else { 0.0 };
        (diag + 2.0 * ch / sh * grad[a] * grad[b] - hess[a][b]) / w
    });

    let (weingarten, kappa) = shape_operator(&metric, &second_form)
        .ok_or_else(|| degenerate(k, "metric is not positive definite"))?;
    if kappa.iter().any(|x| !x.is_finite()) {
        return Err(degenerate(k, "non-finite principal curvature"));
    }
    let kappa = EigenTuple::new(kappa)?;
    let kappa_shifted = kappa.shifted(1.0);

    let position = s.position(k);
    let theta = grid.direction(k);
    let tangents: Vec<Vec<f64>> = match grid {
        SphereGrid::Circle { .. } => vec![vec![-th.sin(), th.cos()]],
        SphereGrid::Sphere { .. } => vec![
            vec![phi.cos() * th.cos(), phi.cos() * th.sin(), -phi.sin()],
            vec![-th.sin(), th.cos(), 0.0],
        ],
    };
    let mut nu = Vec::with_capacity(n + 2);
    nu.push(sh / w);
    for c in 0..=n {
        let angular: f64 = (0..n).map(|a| grad[a] * tangents[a][c]).sum();
        nu.push((ch * theta[c] - angular / sh) / w);
    }
    let normal = TangentVector::project(position.clone(), &nu);

    let v = potential_v(&position, origin);
    let v_nu = radial_field(&position, origin).field.inner(&normal);
    let area_weight = grid.quad_weight(k) * sh.powi(n as i32) * w;
    if !(area_weight.is_finite() && area_weight > 0.0) {
        return Err(degenerate(k, "non-positive area element"));
    }

    Ok(NodeGeometry {
        position,
        normal,
        metric,
        second_form,
        weingarten,
        kappa,
        kappa_shifted,
        v,
        v_nu,
        area_weight,
    })
}

/// `L⁻¹ h L⁻ᵀ` with `g = L Lᵀ`, and its eigenvalues in ascending order.
/// `None` when `g` is not positive definite.
fn shape_operator(g: &SymMatrix, h: &SymMatrix) -> Option<(SymMatrix, Vec<f64>)> {
    match g.dim() {
        1 => {
            let g11 = g.get(0, 0);
            if g11 <= 0.0 {
                return None;
            }
            let k = h.get(0, 0) / g11;
            Some((SymMatrix::diagonal(&[k]), vec![k]))
        }
        _ => {
            let g11 = g.get(0, 0);
            if g11 <= 0.0 {
                return None;
            }
            let a = g11.sqrt();
            let b = g.get(1, 0) / a;
            let d2 = g.get(1, 1) - b * b;
            if d2 <= 0.0 {
                return None;
            }
            let d = d2.sqrt();
            let (h11, h12, h22) = (h.get(0, 0), h.get(1, 0), h.get(1, 1));
            // M = L⁻¹ h L⁻ᵀ with L⁻¹ = [[1/a, 0], [-b/(a d), 1/d]].
            let m11 = h11 / (a * a);
            let m12 = (h12 - b / a * h11) / (a * d);
            let m22 = (h22 - 2.0 * b / a * h12 + b * b / (a * a) * h11) / (d * d);
            let mean = 0.5 * (m11 + m22);
            let rad = (0.5 * (m11 - m22)).hypot(m12);
            let w = SymMatrix::from_lower_fn(2, |i, j| match (i, j) {
                (0, 0) => m11,
                (1, 1) => m22,
                _ => m12,
            });
            Some((w, vec![mean - rad, mean + rad]))
        }
    }
}
