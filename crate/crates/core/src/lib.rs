//! Evaluation, verification, and hex digit extraction for the base-16
//! series tails of pi/4 (Madhava-Gregory-Leibniz) and log 2 (alternating
//! harmonic).
//!
//! The crate is organized around independent evaluation routes that must
//! agree with one another:
//!
//! - [`series`]: the weighted Pochhammer tail series themselves, partial
//!   sums, and reference values for pi and log 2;
//! - [`digamma`]: the tails through digamma differences and the averaged
//!   (multiplication-formula) form;
//! - [`quad`]: the tails and the per-offset series components through
//!   high-precision tanh-sinh quadrature, plus exact moment linear forms;
//! - [`poly`]: exact rational-polynomial verification of every algebraic
//!   identity the series constructions rest on, and the partial-fraction
//!   data that turns Pochhammer denominators into spigot channels;
//! - [`spigot`]: hex digit extraction at arbitrary positions without
//!   computing earlier digits.
//!
//! [`arith`] holds the numeric carriers: explicit-precision binary floats
//! and exact rationals. Everything approximate states its error budget.

pub mod arith;
pub mod digamma;
pub mod poly;
pub mod quad;
pub mod series;
pub mod spigot;

mod error;

pub use arith::{hex_digits_of_fraction, to_precfloat, BigRational, PrecFloat};
pub use error::Error;

/// 1-based index of the first omitted series term; `n = 1` means the full
/// constant is still ahead (R_1 = pi/4 - 1, R'_1 = log 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TailIndex(u32);

impl TailIndex {
    pub fn new(n: u32) -> Result<Self, Error> {
        if n >= 1 {
            Ok(TailIndex(n))
        } else {
            Err(Error::InvalidArgument("tail index must satisfy n >= 1".into()))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl std::fmt::Display for TailIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
