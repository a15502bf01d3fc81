//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use trace_lab_core::example::example_rule;
use trace_lab_core::geometry::DeloneSegment;
use trace_lab_core::substitution::{EigenStructure, Language, SubstitutionRule};
use trace_lab_core::Precision;

pub struct Fixture {
    pub rule: SubstitutionRule,
    pub lang: Arc<Language>,
    pub eig: EigenStructure,
}

pub fn fixture() -> Fixture {
    let rule = example_rule();
    let lang = Arc::new(Language::new(&rule));
    let eig = EigenStructure::of_abelianization(&rule.abelianize(), Precision::Exact).expect("example eigen data");
    Fixture { rule, lang, eig }
}

pub fn segment(f: &Fixture, t: f64) -> DeloneSegment {
    DeloneSegment::build(&f.rule, &f.lang, (0, 1), t).expect("example segment")
}
