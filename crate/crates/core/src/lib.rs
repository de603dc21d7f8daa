//! Lambda-invariant classification for imaginary quadratic fields in which
//! an odd prime splits, plus the class-group, L-value, Eisenstein
//! coefficient and field-family machinery around it.

pub mod budget;
pub mod error;
pub mod families;
pub mod lambda;
pub mod lvalues;
pub mod numth;
pub mod quadforms;
pub mod scanner;
pub mod tables;

pub use budget::Budget;
pub use error::{Error, Result};
pub use numth::Rational;
pub use quadforms::FundamentalDiscriminant;
