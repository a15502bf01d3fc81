pub mod algebra;
pub mod analysis;
pub mod error;
pub mod example;
pub mod geometry;
pub mod linalg;
pub mod number;
pub mod parallel;
pub mod substitution;

pub use error::{Error, Result};
pub use number::{Number, Precision, Q};
