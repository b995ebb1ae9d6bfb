//! Deformation of Kähler metrics by closed conformal vector fields, with
//! every closed-form identity checked against independent jet-based
//! numerical oracles on concrete chart models.
//!
//! Given a Kähler manifold `(M, J, g)` carrying a closed conformal field xi
//! (`nabla_X xi = psi X`) with `|xi|^2 < c`, the metric
//!
//! ```text
//! g~ = mu g + mu^2 (theta_xi^2 + theta_{J xi}^2),    mu = (c - |xi|^2)^{-1}
//! ```
//!
//! is again Kähler. This crate constructs `g~` for chart-based geometries,
//! implements the closed-form expressions for its connection, curvature,
//! holomorphic sectional curvature, Ricci tensor, and the second fundamental
//! forms of the canonical foliations, and verifies each of them numerically:
//! the deformed metric is exposed as an ordinary jet-evaluable field, so the
//! same curvature oracle that handles any metric also adjudicates every
//! closed form.
//!
//! Entry points:
//! * [`models`] — built-in geometries (flat ball, cone over round spheres,
//!   generic warped products).
//! * [`deformation::deform`] — builds the deformed geometry.
//! * [`curvature`] — the numerical oracle (Christoffel, Riemann, Ricci,
//!   sectional curvatures, Lie derivatives).
//! * [`submanifold`] — leaf geometry of the two canonical foliations.
//! * [`verify`] — the batch verification suite behind the CLI.

pub mod curvature;
pub mod deformation;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod models;
pub mod quadrature;
pub mod submanifold;
pub mod verify;

pub use error::{Error, Result};
