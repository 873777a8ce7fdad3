//! Numerical verification of Heintze–Karcher type inequalities for closed
//! star-shaped hypersurfaces in hyperbolic space `H^{n+1}`, `n = 1, 2`.
//!
//! The crate is organised bottom-up:
//!
//! - [`symfun`]: elementary symmetric functions, their matrix derivatives,
//!   Gårding cones and Newton–MacLaurin deficits.
//! - [`hypgeo`]: hyperboloid-model point arithmetic (distances, geodesics,
//!   the static potential `V = cosh r` and the conformal field `sinh r ∂_r`).
//! - [`hypersurface`]: radial graphs over `S^n`, their discrete geometry,
//!   quadrature and shape generators.
//! - [`identities`]: Minkowski identities, Heintze–Karcher inequalities and
//!   the Alexandrov chain evaluated as [`identities::CheckResult`]s.
//! - [`normalflow`]: the Lagrangian unit normal flow, focal/collision times
//!   and the monotone quantity `Q(t)`.

pub mod error;
pub mod hypersurface;
pub mod hypgeo;
pub mod identities;
pub mod normalflow;
pub mod numeric;
pub mod symfun;
pub mod tolerances;

pub use error::{Error, Result};
