//! Upper densities, difference sets and syndetic translate sets on a few
//! concrete locally compact abelian groups: ℤ^d, finite abelian groups,
//! σ-finite chains ⊕ℤ_{m_i}, and the real line.
//!
//! All arithmetic is exact. The measure-valued code is generic over
//! [`Scalar`]; the aliases below fix the usual choice.

pub mod density;
pub mod error;
pub mod group;
pub mod scalar;
pub mod setrep;
mod torus;
pub mod additive;
pub mod cli;
pub mod structure;

pub use error::{Error, Result};
pub use group::{GroupElement, GroupSpec};
pub use scalar::Scalar;

/// Arbitrary precision rationals, the default scalar.
pub type Rational = num_rational::BigRational;
/// Machine-word rationals; fine for small instances, may overflow.
pub type Rational64 = num_rational::Ratio<i64>;

pub type Element = GroupElement<Rational>;
pub type Intervals = setrep::IntervalUnion<Rational>;
pub type Pattern = setrep::PeriodicPattern<Rational>;
pub type Points = setrep::PointConfig<Rational>;
pub type Set = setrep::SetSpec<Rational>;
pub type Measure = setrep::MeasureSpec<Rational>;
