//! Finite-range equivariant operators and their trace data.

pub mod class;
pub mod kernel;
pub mod restrict;
pub mod spec;
pub mod window;

pub use class::{diagonal_class, ClassVector};
pub use kernel::Kernel;
pub use restrict::RestrictedMatrix;
pub use spec::{compile, compile_capped};
pub use window::{restriction_defect, window_traces};
