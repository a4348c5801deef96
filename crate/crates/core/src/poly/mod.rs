//! Exact polynomial layer: fractional-power sums in `t = 1 + r^2`, sparse polynomials
//! in the root variable `u`, and integer polynomials with Sturm positivity checks.

mod intpoly;
mod sparse;
pub mod sturm;
pub(crate) mod tpoly;

pub use intpoly::{sign_variations, IntPoly};
pub use sparse::SparsePoly;
pub use sturm::{positive_from_one, HalfLineVerdict, PositivityMethod, SturmOptions};
pub use tpoly::{exp_to_q, q, q_frac, q_to_f64, Exponent, TPoly};
