//! Hyperbolic space `H^{n+1}` in the hyperboloid model.
//!
//! Points live on the upper sheet `{p : ⟨p,p⟩ = -1, p_0 > 0}` of Minkowski
//! space `R^{1,n+1}` with `⟨x,y⟩ = -x_0 y_0 + Σ x_i y_i` (time-like
//! component first). The Poincaré ball is only a view used for I/O.

use crate::{Error, Result};

/// Tolerance on the hyperboloid constraint `⟨p,p⟩ = -1`.
pub const ON_SHELL_TOL: f64 = 1e-10;

/// Minkowski bilinear form.
#[inline]
pub fn minkowski(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let space: f64 = x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum();
    space - x[0] * y[0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperPoint {
    coords: Vec<f64>,
}

impl HyperPoint {
    /// Validates the hyperboloid constraint within [`ON_SHELL_TOL`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain(
                "hyperboloid point needs >= 2 coordinates".into(),
            ));
        }
        let q = minkowski(&coords, &coords);
        if (q + 1.0).abs() > ON_SHELL_TOL || coords[0] < 1.0 - ON_SHELL_TOL {
            return Err(Error::Domain(format!(
                "not on the upper hyperboloid sheet: <p,p> = {q}, p_0 = {}",
                coords[0]
            )));
        }
        Ok(Self { coords })
    }

    /// Rescales onto the hyperboloid. Panics on non-time-like input.
    pub fn renormalized(mut coords: Vec<f64>) -> Self {
        let q = minkowski(&coords, &coords);
        assert!(q < 0.0 && coords[0] > 0.0, "vector is not future time-like");
        let s = (-q).sqrt();
        coords.iter_mut().for_each(|c| *c /= s);
        Self { coords }
    }

    /// `(1, 0, …, 0)` in `H^{dim}` (so `dim + 1` coordinates).
    pub fn origin(dim: usize) -> Self {
        let mut coords = vec![0.0; dim + 1];
        coords[0] = 1.0;
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Dimension of the hyperbolic space the point lives in.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// Tangent vector `dir` at `base` (Minkowski-orthogonal to it).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: HyperPoint,
    dir: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: HyperPoint, dir: Vec<f64>) -> Result<Self> {
        if dir.len() != base.coords.len() {
            return Err(Error::Domain("tangent vector has wrong length".into()));
        }
        let scale = 1.0 + minkowski(&dir, &dir).abs().sqrt();
        let dot = minkowski(base.coords(), &dir);
        if dot.abs() > ON_SHELL_TOL * scale {
            return Err(Error::Domain(format!(
                "vector is not tangent: <p,u> = {dot:e}"
            )));
        }
        Ok(Self { base, dir })
    }

    /// Projects an arbitrary ambient vector onto `T_base`.
    pub fn project(base: HyperPoint, v: &[f64]) -> Self {
        let c = minkowski(base.coords(), v);
        let dir = v
            .iter()
            .zip(base.coords())
            .map(|(x, p)| x + c * p)
            .collect();
        Self { base, dir }
    }

    pub fn base(&self) -> &HyperPoint {
        &self.base
    }

    pub fn dir(&self) -> &[f64] {
        &self.dir
    }

    pub fn norm(&self) -> f64 {
        minkowski(&self.dir, &self.dir).max(0.0).sqrt()
    }

    pub fn inner(&self, other: &TangentVector) -> f64 {
        minkowski(&self.dir, &other.dir)
    }

    /// Unit vector in the same direction, or an error for the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let len = self.norm();
        if len == 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            base: self.base.clone(),
            dir: self.dir.iter().map(|d| d / len).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            dir: self.dir.iter().map(|d| d * s).collect(),
        }
    }

    pub fn is_unit(&self) -> bool {
        (minkowski(&self.dir, &self.dir) - 1.0).abs() <= ON_SHELL_TOL
    }
}

/// Hyperbolic distance `arccosh(-⟨p,q⟩)`.
///
/// For nearby points the equivalent `2 asinh(|p - q|_M / 2)` is used, which
/// avoids the cancellation of `arccosh` near 1.
pub fn dist(p: &HyperPoint, q: &HyperPoint) -> Result<f64> {
    let c = -minkowski(p.coords(), q.coords());
    if c < 1.0 - 1e-12 {
        return Err(Error::NumericDomain(format!(
            "-<p,q> = {c} < 1, points are not on one hyperboloid sheet"
        )));
    }
    Ok(dist_unchecked(p.coords(), q.coords()))
}

#[inline]
pub(crate) fn dist_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let c = -minkowski(p, q);
    if c > 1.5 {
        c.acosh()
    } else {
        let d2: f64 = {
            let t = p[0] - q[0];
            let s: f64 = p[1..]
                .iter()
                .zip(&q[1..])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            s - t * t
        };
        2.0 * (d2.max(0.0).sqrt() / 2.0).asinh()
    }
}

/// Static potential `V = cosh d(p, origin) = -⟨p, origin⟩`.
pub fn potential_v(p: &HyperPoint, origin: &HyperPoint) -> f64 {
    (-minkowski(p.coords(), origin.coords())).max(1.0)
}

/// Warping function `λ(r) = sinh r` of the polar form `dr² + λ(r)² g_{S^n}`.
pub fn lambda(r: f64) -> f64 {
    r.sinh()
}

/// `λ'(r) = cosh r`.
pub fn lambda_prime(r: f64) -> f64 {
    r.cosh()
}

/// Unit-speed geodesic `cosh(t) p + sinh(t) u`, renormalised onto the sheet.
pub fn geodesic(p: &HyperPoint, u: &TangentVector, t: f64) -> HyperPoint {
    let (c, s) = (t.cosh(), t.sinh());
    let coords = p
        .coords()
        .iter()
        .zip(u.dir())
        .map(|(x, v)| c * x + s * v)
        .collect();
    HyperPoint::renormalized(coords)
}

/// Velocity of [`geodesic`] at time `t` (the parallel transport of `u`).
pub fn geodesic_velocity(p: &HyperPoint, u: &TangentVector, t: f64) -> TangentVector {
    let (c, s) = (t.cosh(), t.sinh());
    let at = geodesic(p, u, t);
    let dir: Vec<f64> = p
        .coords()
        .iter()
        .zip(u.dir())
        .map(|(x, v)| s * x + c * v)
        .collect();
    TangentVector::project(at, &dir)
}

/// The conformal Killing field `λ(r) ∂_r = V p - o` at `p`.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub field: TangentVector,
    /// `p` coincides with the origin; the field is zero there.
    pub degenerate: bool,
}

pub fn radial_field(p: &HyperPoint, origin: &HyperPoint) -> RadialField {
    let v = potential_v(p, origin);
    let dir: Vec<f64> = p
        .coords()
        .iter()
        .zip(origin.coords())
        .map(|(x, o)| v * x - o)
        .collect();
    let degenerate = v - 1.0 <= 1e-15;
    let field = TangentVector {
        base: p.clone(),
        dir: if degenerate {
            vec![0.0; dir.len()]
        } else {
            dir
        },
    };
    RadialField { field, degenerate }
}

/// Point of the Poincaré ball `|x| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<f64>,
}

impl BallPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r2: f64 = coords.iter().map(|x| x * x).sum();
        if coords.is_empty() || r2 >= 1.0 || !r2.is_finite() {
            return Err(Error::Domain(format!(
                "ball point must satisfy |x| < 1, got |x|^2 = {r2}"
            )));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Conformal factor `f = 2 / (1 - |x|²) = cosh r + 1` of `g = f² δ`.
    pub fn conformal_factor(&self) -> f64 {
        2.0 / (1.0 - self.coords.iter().map(|x| x * x).sum::<f64>())
    }
}

pub fn ball_to_hyper(x: &BallPoint) -> HyperPoint {
    let r2: f64 = x.coords.iter().map(|v| v * v).sum();
    let denom = 1.0 - r2;
    let mut coords = Vec::with_capacity(x.coords.len() + 1);
    coords.push((1.0 + r2) / denom);
    coords.extend(x.coords.iter().map(|v| 2.0 * v / denom));
    HyperPoint { coords }
}

pub fn hyper_to_ball(p: &HyperPoint) -> BallPoint {
    let d = 1.0 + p.coords[0];
    BallPoint {
        coords: p.coords[1..].iter().map(|v| v / d).collect(),
    }
}
