//! Trace hierarchy: deviation series, limsup estimates, IDS and Shubin checks.

pub mod checks;
pub mod series;
pub mod spectral;

pub use checks::{commutator_trace_test, commutator_trace_tests, supertile_check, tau, CommutatorReport, SupertileCheck};
pub use series::{
    deviation_series, fit_exponent, limsup_estimate, psi_profile, DeviationSeries, Fit, LimsupEstimate, PsiProfile,
    WindowData,
};
pub use spectral::{ids_curve, refined_shubin_check, shubin_check, IdsCurve, RefinedReport, ShubinReport};
