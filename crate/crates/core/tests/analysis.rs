use std::sync::Arc;

use trace_lab_core::algebra::spec::h0;
use trace_lab_core::algebra::window::window_traces;
use trace_lab_core::algebra::{diagonal_class, Kernel};
use trace_lab_core::analysis::series::{exact_numbers, pairing};
use trace_lab_core::analysis::{
    deviation_series, fit_exponent, ids_curve, limsup_estimate, psi_profile, shubin_check, WindowData,
};
use trace_lab_core::geometry::{DeloneSegment, WindowFamily};
use trace_lab_core::number::{q, q_to_f64, qi};
use trace_lab_core::substitution::{perron_data, EigenStructure, Language, SubstitutionRule, TraceIndex};
use trace_lab_core::{Error, Precision};

struct Setup {
    rule: SubstitutionRule,
    lang: Arc<Language>,
    eig: EigenStructure,
    seg: DeloneSegment,
    data: WindowData,
}

fn setup(text: &str, seed: (u8, u8), precision: Precision, expansion: f64, n_max: usize, phases: usize) -> Setup {
    let rule = SubstitutionRule::parse(text).unwrap();
    let lang = Arc::new(Language::new(&rule));
    let eig = EigenStructure::of_abelianization(&rule.abelianize(), precision).unwrap();
    let family = WindowFamily::new(expansion, n_max, phases).unwrap();
    let seg = DeloneSegment::build(&rule, &lang, seed, family.max_t()).unwrap();
    let data = WindowData::new(&seg, family).unwrap();
    Setup { rule, lang, eig, seg, data }
}

fn example_with(n_max: usize, phases: usize) -> Setup {
    setup("A -> ABA\nB -> ACA\nC -> ABBCBBCBBCBBA\nlengths 1 3 13", (0, 1), Precision::Exact, 5.0, n_max, phases)
}

fn example(n_max: usize) -> Setup {
    example_with(n_max, 4)
}

fn lattice_with(n_max: usize, phases: usize) -> Setup {
    setup("A -> AA", (0, 0), Precision::Exact, 2.0, n_max, phases)
}

fn lattice(n_max: usize) -> Setup {
    lattice_with(n_max, 4)
}

#[test]
fn laplacian_subleading_remainder_is_point_count_minus_density_term() {
    let s = example(7);
    let lap = Kernel::laplacian(&s.lang);
    let class = diagonal_class(&lap, &s.eig).unwrap();
    let raw = exact_numbers(window_traces(&lap, &s.seg, &s.data.ts()).unwrap());
    let series = deviation_series(&s.data, &raw, &s.eig, &class, TraceIndex::new(2, 1, 1)).unwrap();
    for (row, counts) in series.rows.iter().zip(&s.data.counts) {
        // τ₁(Δ)·⟨(1,3,13), N⟩ = (5/21)·(covered length)
        let points: u64 = counts.iter().sum();
        let covered = counts[0] + 3 * counts[1] + 13 * counts[2];
        let oracle = qi(points as i64) - q(5, 21) * qi(covered as i64);
        assert_eq!(row.remainder.as_exact().unwrap(), &oracle);
        assert!(row.normalized.abs() < 5.0);
    }
}

#[test]
fn h0_remainder_at_second_index_is_the_raw_trace() {
    let s = example(6);
    let h = h0(&s.lang).unwrap();
    let class = diagonal_class(&h, &s.eig).unwrap();
    let raw = exact_numbers(window_traces(&h, &s.seg, &s.data.ts()).unwrap());
    let series = deviation_series(&s.data, &raw, &s.eig, &class, TraceIndex::new(2, 1, 1)).unwrap();
    assert!(series.rows.iter().all(|r| r.remainder == r.raw));
}

#[test]
fn zero_operator_estimates_vanish() {
    let s = example(5);
    let z = Kernel::zero(&s.lang);
    let class = diagonal_class(&z, &s.eig).unwrap();
    let raw = exact_numbers(window_traces(&z, &s.seg, &s.data.ts()).unwrap());
    for idx in s.eig.expanding_indices() {
        let est = limsup_estimate(&deviation_series(&s.data, &raw, &s.eig, &class, idx).unwrap());
        assert_eq!(est.estimate, 0.0);
    }
    let values: Vec<f64> = raw.iter().map(|x| x.to_f64()).collect();
    assert_eq!(fit_exponent(&s.data.family, &values).unwrap_err(), Error::AllZeroTail);
}

#[test]
fn leading_index_estimate_converges_to_tau() {
    let s = example_with(10, 8);
    let lap = Kernel::laplacian(&s.lang);
    let class = diagonal_class(&lap, &s.eig).unwrap();
    let raw = exact_numbers(window_traces(&lap, &s.seg, &s.data.ts()).unwrap());
    let series = deviation_series(&s.data, &raw, &s.eig, &class, TraceIndex::LEADING).unwrap();
    let est = limsup_estimate(&series);
    let tau = 5.0 / 21.0;
    for row in series.rows.iter().filter(|r| r.n == 10) {
        assert!((row.normalized - tau).abs() / tau < 1e-3, "{}", row.normalized);
    }
    // the two-scale window still sees the n = 9 excursions, of relative size ~1e-3
    assert!((est.estimate - tau).abs() / tau < 2e-3, "{}", est.estimate);
    // leading term τ₁⟨η₁, N⟩ grows with the volume
    let eta = &s.eig.basis_vector(TraceIndex::LEADING).unwrap().vector;
    let lead: Vec<f64> = s.data.counts.iter().map(|c| tau * pairing(eta, c).to_f64()).collect();
    let fit = fit_exponent(&s.data.family, &lead).unwrap();
    assert!((fit.slope - 1.0).abs() < 0.01, "{}", fit.slope);
}

#[test]
fn psi_of_second_index_changes_sign() {
    let s = example(8);
    let p = psi_profile(&s.data, &s.eig, TraceIndex::new(2, 1, 1)).unwrap();
    assert!(p.rows.iter().any(|(_, v)| *v > 0.0) && p.rows.iter().any(|(_, v)| *v < 0.0));
    assert!(p.running_sup.windows(2).all(|w| w[0].1 <= w[1].1));
    let lead = psi_profile(&s.data, &s.eig, TraceIndex::LEADING).unwrap();
    let last = lead.rows.last().unwrap().1;
    assert!((last - 1.0).abs() < 1e-4, "{last}");
}

#[test]
fn periodic_rule_has_no_subleading_index() {
    let s = lattice(6);
    assert_eq!(s.eig.expanding_indices(), [TraceIndex::LEADING]);
    let err = psi_profile(&s.data, &s.eig, TraceIndex::new(2, 1, 1)).unwrap_err();
    assert_eq!(err, Error::IndexOutsideRange(2, 1, 1));
}

#[test]
fn periodic_remainder_is_bounded() {
    let s = lattice(12);
    let id = Kernel::identity(&s.lang);
    let class = diagonal_class(&id, &s.eig).unwrap();
    let raw = exact_numbers(window_traces(&id, &s.seg, &s.data.ts()).unwrap());
    let series = deviation_series(&s.data, &raw, &s.eig, &class, TraceIndex::LEADING).unwrap();
    for (row, counts) in series.rows.iter().zip(&s.data.counts) {
        let rest = q_to_f64(row.raw.as_exact().unwrap()) - class.tau(TraceIndex::LEADING).to_f64() * counts[0] as f64;
        assert!(rest.abs() < 1e-12);
    }
}

#[test]
fn shubin_on_the_lattice_decays_like_one_over_t() {
    let s = lattice_with(20, 8);
    let lap = Kernel::laplacian(&s.lang);
    let perron = perron_data(&s.rule, Precision::Exact).unwrap();
    let report = shubin_check(&lap, &[qi(0), qi(0), qi(1)], &s.seg, &s.data, &s.eig, &perron).unwrap();
    assert_eq!(report.limit.as_exact().unwrap(), &q(3, 2));
    assert!((report.fit.slope + 1.0).abs() < 0.1, "{}", report.fit.slope);
    assert_eq!(report.expected_slope, -1.0);
}

#[test]
fn constant_polynomial_has_zero_gap() {
    let s = example(5);
    let lap = Kernel::laplacian(&s.lang);
    let perron = perron_data(&s.rule, Precision::Exact).unwrap();
    let data = &s.data;
    // φ = 1 counts points, so compare against the count itself
    let ts = data.ts();
    let report = shubin_check(&lap, &[qi(1)], &s.seg, data, &s.eig, &perron);
    let report = report.unwrap();
    for (row, t) in report.rows.iter().zip(&ts) {
        let points = s.seg.window_for(*t).unwrap().len() as f64;
        assert!((row.rho - points / (2.0 * t)).abs() < 1e-12);
    }
    assert_eq!(report.limit.as_exact().unwrap(), &q(5, 21));
}

#[test]
fn ids_of_lattice_laplacian() {
    let s = lattice(4);
    let lap = Kernel::laplacian(&s.lang);
    let curve = ids_curve(&lap, &s.seg, 2.0).unwrap();
    // Dirichlet modes of the 5×5 tridiagonal (1, −1/2)
    let mut expected: Vec<f64> = (1..=5).map(|k| 1.0 - (k as f64 * std::f64::consts::PI / 6.0).cos()).collect();
    expected.sort_by(f64::total_cmp);
    for (a, b) in curve.eigenvalues.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((curve.moment(1) - 5.0 / 4.0).abs() < 1e-12);
    assert!((curve.moment(2) - 7.0 / 4.0).abs() < 1e-12);
}

#[test]
fn ids_of_projection_and_rejections() {
    let s = example(4);
    let proj = Kernel::projection(&s.lang, 0);
    let curve = ids_curve(&proj, &s.seg, 100.0).unwrap();
    assert!(curve.eigenvalues.iter().all(|&x| x == 0.0 || x == 1.0));
    assert_eq!(curve.steps().len(), 2);
    assert_eq!(ids_curve(&Kernel::shift(&s.lang), &s.seg, 10.0).unwrap_err(), Error::NotSelfAdjoint);
}

#[test]
fn short_schedules_are_rejected() {
    let s = example(3);
    let lap = Kernel::laplacian(&s.lang);
    let class = diagonal_class(&lap, &s.eig).unwrap();
    let raw = exact_numbers(window_traces(&lap, &s.seg, &s.data.ts()).unwrap());
    let err = deviation_series(&s.data, &raw, &s.eig, &class, TraceIndex::LEADING).unwrap_err();
    assert_eq!(err, Error::ScheduleTooShort(3));
}
