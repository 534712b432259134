//! Zeta functions of smooth plane quartics `y^4 + g(x) y^2 + h(x) = 0` over
//! finite fields of odd characteristic.
//!
//! The curve `C` carries the involution `tau: y -> -y` with quotient the
//! genus-one curve `E: v^2 + g(u) v + h(u) = 0`. Frobenius is computed on the
//! Monsky-Washnitzer cohomology of the affine part, split into the
//! `tau`-even block (which yields the numerator of `E`) and the `tau`-odd
//! block (which yields the complementary quartic factor).
//!
//! The crate is `no_std` with `alloc`.

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod curve;
pub mod field;
pub mod frobenius;
pub mod mp;
pub mod ntt;
pub mod oracle;
pub mod padic;
pub mod reduction;
pub mod zeta;

use alloc::string::String;

pub use curve::{CaseTag, CurveInput, InfinityData, LiftedCurve, SingularReport};
pub use padic::{PrecisionProfile, Zq, ZqScaled};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Validation(String),
    /// A structural hypothesis of the method failed (Bezout system
    /// infeasible, orbit correction not dividing, ...).
    #[error("assumption violated: {0}")]
    Assumption(String),
    /// A division by a value indistinguishable from zero.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    /// Final coefficients are not known to enough digits to pin down the
    /// integers.
    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),
    #[error("singular curve: {0}")]
    Singular(SingularReport),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
