//! Linear algebra over exact and floating fields.

pub mod band;
pub mod field;
pub mod jordan;
pub mod matrix;
pub mod poly;

pub use field::Field;
pub use matrix::Matrix;
