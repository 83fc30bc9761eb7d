//! Numerical laboratory for low-regularity conformal metrics.
//!
//! The library builds conformal metrics `g = theta(x) * Id` whose factor
//! `theta` takes values in `[1, 2]` but oscillates on dense families of
//! "fast channels" (open covers of the rationals, or shrinking balls on
//! dyadic grids). On top of those fields it computes:
//!
//! * mollified metrics and their lattice shortest-path distances, bracketed
//!   between certified lower bounds (dual certificates) and certified upper
//!   bounds (explicit channel routes),
//! * first-order metric calculus: metric speeds, slopes, test plans and
//!   weak upper gradient checks,
//! * Cheeger energies on labeled regions and the parallelogram deficit that
//!   decides whether the induced energy can be quadratic.
//!
//! Exact rational arithmetic (via `num::BigRational`) backs every set
//! membership and measure computation; floating point is reserved for
//! quadrature and lattice searches, always with explicit error terms.

pub mod error;
pub mod exact;
pub mod calculus;
pub mod cheeger;
pub mod distance;
pub mod fields;
pub mod mollify;
pub mod quad;
pub mod rng;
pub mod smooth;

pub use error::{Error, Result};
