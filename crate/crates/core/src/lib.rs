//! Computational geometry of closed hyperbolic surfaces presented by
//! Fuchsian groups acting on the upper half-plane.
//!
//! The crate computes systoles, injectivity radii, collar geometry,
//! geodesic-loop profiles, neck-inequality integrals, and truncated
//! Weil-Petersson gradient-norm sums, and ships a verification harness
//! that turns the supporting inequalities into seeded pass/fail suites.

pub mod collar;
pub mod constants;
pub mod error;
pub mod fuchsian;
pub mod hplane;
pub mod loops;
pub mod riera;
pub mod surface_io;
pub mod verify;

pub use error::{GeomError, Result};
pub use fuchsian::{FuchsianGroup, OrbitElement};
pub use hplane::{dist, Geodesic, HPoint, MoebiusElement};
pub use loops::{GeodesicLoop, InjProfile};
pub use riera::{CosetRep, RieraEvaluation};
pub use verify::{SuiteConfig, VerificationReport};
