//! Certified lower bounds for Waldschmidt constants of generic points in
//! projective space, and a checker for the `m = 2` case of Demailly's
//! conjectured inequality built on top of them.

pub mod bounds;
pub mod certs;
pub mod cli;
pub mod cremona;
pub mod demailly;
pub mod exact;
pub mod hilbert;
pub mod oracle;

use num_bigint::BigInt;
use num_rational::Ratio;

pub use exact::{AffineExpr, ComparisonVerdict, Scalar};

pub type Int = BigInt;
pub type Rat = Ratio<BigInt>;
pub type LinExpr = AffineExpr<BigInt>;
