//! Substitution rules and their spectral data.

pub mod collar;
pub mod eigen;
pub mod perron;
pub mod rule;
pub mod words;

pub use collar::CollaredRule;
pub use eigen::{EigenStructure, Eigenvalue, Membership, TraceIndex};
pub use perron::{perron_data, PerronData};
pub use rule::{check_primitive, AbelianizationMatrix, NumVec, SubstitutionRule};
pub use words::{generate_fixed_word, Language, SeedPlan};
