//! Deviation series, Ψ profiles, limsup estimates and exponent fits.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::algebra::ClassVector;
use crate::error::{Error, Result};
use crate::geometry::{DeloneSegment, Sample, WindowFamily};
use crate::number::{q_to_f64, Number, Q};
use crate::substitution::{EigenStructure, NumVec, TraceIndex};

/// Length of the base window `[−1, 1]`.
pub const BASE_VOLUME: f64 = 2.0;

/// Scales of the trailing window used by [`limsup_estimate`].
pub const LIMSUP_SCALES: usize = 2;

/// Relative change below which a limsup estimate counts as stabilized.
pub const STABLE_CHANGE: f64 = 0.10;

/// Window schedule with the base label counts of every window.
#[derive(Clone, Debug)]
pub struct WindowData {
    pub family: WindowFamily,
    pub counts: Vec<Vec<u64>>,
}

impl WindowData {
    pub fn new(seg: &DeloneSegment, family: WindowFamily) -> Result<Self> {
        let counts = seg.counts_in_windows(&family.ts())?;
        Ok(WindowData { family, counts })
    }

    pub fn ts(&self) -> Vec<f64> {
        self.family.ts()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.family.samples
    }
}

/// `⟨η, N⟩` for a basis vector and a count vector.
pub fn pairing(vector: &NumVec, counts: &[u64]) -> Number {
    match vector {
        NumVec::Exact(v) => Number::Exact(
            v.iter()
                .zip(counts)
                .fold(Q::zero(), |acc, (x, &c)| acc + x * Q::from_integer(BigInt::from(c))),
        ),
        NumVec::Approx(v) => Number::Approx(v.iter().zip(counts).map(|(x, &c)| x * c as f64).sum()),
    }
}

/// Normalization `Vol(B₀)·L(i,j,T)·T^{s_i}`.
pub fn scale(eig: &EigenStructure, idx: TraceIndex, t: f64) -> f64 {
    BASE_VOLUME * eig.growth(idx, t)
}

/// Exact while every input is exact, floating point otherwise.
#[derive(Clone, Debug)]
struct Acc {
    exact: Option<Q>,
    approx: f64,
}

impl Acc {
    fn new(x: &Number) -> Self {
        Acc { exact: x.as_exact().cloned(), approx: x.to_f64() }
    }

    fn sub_product(&mut self, a: &Number, b: &Number) {
        self.approx -= a.to_f64() * b.to_f64();
        self.exact = match (self.exact.take(), a.as_exact(), b.as_exact()) {
            (Some(e), Some(x), Some(y)) => Some(e - x * y),
            _ => None,
        };
    }

    fn value(&self) -> Number {
        match &self.exact {
            Some(q) => Number::Exact(q.clone()),
            None => Number::Approx(self.approx),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Term {
    pub index: TraceIndex,
    pub tau: Number,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub n: usize,
    pub phase: usize,
    pub t: f64,
    pub raw: Number,
    pub remainder: Number,
    /// Remainder over `Vol(B₀)·L(i,j,T)·T^{s_i}`.
    pub normalized: f64,
    pub psi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationSeries {
    pub index: TraceIndex,
    pub subtracted: Vec<Term>,
    pub n_max: usize,
    pub phases: usize,
    pub rows: Vec<SeriesRow>,
}

fn check_index(eig: &EigenStructure, idx: TraceIndex) -> Result<()> {
    if eig.in_expanding_set(idx) {
        Ok(())
    } else {
        Err(Error::IndexOutsideRange(idx.i, idx.j, idx.k))
    }
}

/// Remainders of the raw traces after subtracting `τ·⟨η, N⟩` for every index
/// preceding `idx`.
pub fn deviation_series(
    data: &WindowData,
    raw: &[Number],
    eig: &EigenStructure,
    class: &ClassVector,
    idx: TraceIndex,
) -> Result<DeviationSeries> {
    check_index(eig, idx)?;
    if data.family.n_max < 4 {
        return Err(Error::ScheduleTooShort(data.family.n_max));
    }
    let subtracted: Vec<Term> = eig
        .lower_indices(idx)
        .into_iter()
        .map(|index| Term { index, tau: class.tau(index) })
        .collect();
    let vectors: Vec<&NumVec> = subtracted.iter().map(|s| &eig.basis_vector(s.index).unwrap().vector).collect();
    let own = &eig.basis_vector(idx).unwrap().vector;
    let rows = data
        .samples()
        .iter()
        .zip(&data.counts)
        .zip(raw)
        .map(|((s, counts), raw)| {
            let mut acc = Acc::new(raw);
            for (term, v) in subtracted.iter().zip(&vectors) {
                acc.sub_product(&term.tau, &pairing(v, counts));
            }
            let remainder = acc.value();
            let norm = scale(eig, idx, s.t);
            SeriesRow {
                n: s.n,
                phase: s.phase,
                t: s.t,
                raw: raw.clone(),
                normalized: remainder.to_f64() / norm,
                psi: pairing(own, counts).to_f64() / norm,
                remainder,
            }
        })
        .collect();
    Ok(DeviationSeries { index: idx, subtracted, n_max: data.family.n_max, phases: data.family.phases, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiProfile {
    pub index: TraceIndex,
    pub rows: Vec<(Sample, f64)>,
    /// Running sup of `|Ψ|` in increasing `T`.
    pub running_sup: Vec<(f64, f64)>,
}

/// `Ψ(T) = ⟨η, N(T)⟩ / (Vol(B₀)·L(i,j,T)·T^{s_i})` over the schedule.
pub fn psi_profile(data: &WindowData, eig: &EigenStructure, idx: TraceIndex) -> Result<PsiProfile> {
    check_index(eig, idx)?;
    let v = &eig.basis_vector(idx).unwrap().vector;
    let rows: Vec<(Sample, f64)> = data
        .samples()
        .iter()
        .zip(&data.counts)
        .map(|(s, c)| (*s, pairing(v, c).to_f64() / scale(eig, idx, s.t)))
        .collect();
    let mut sorted: Vec<(f64, f64)> = rows.iter().map(|(s, p)| (s.t, p.abs())).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sup = 0.0f64;
    let running_sup = sorted
        .into_iter()
        .map(|(t, p)| {
            sup = sup.max(p);
            (t, sup)
        })
        .collect();
    Ok(PsiProfile { index: idx, rows, running_sup })
}

#[derive(Clone, Debug, Serialize)]
pub struct LimsupEstimate {
    pub index: TraceIndex,
    /// `sup|normalized remainder| / sup|Ψ|` over the trailing scales: the
    /// coefficient in the units of the basis vector.
    pub estimate: f64,
    /// `sup|normalized remainder|` alone: the coefficient for a basis vector
    /// rescaled so that `limsup Ψ = 1`.
    pub raw: f64,
    pub psi_sup: f64,
    /// Relative change of the estimate between the windows ending one scale
    /// apart.
    pub diagnostic: f64,
    pub stabilized: bool,
}

fn trailing_sups(series: &DeviationSeries, last: usize) -> (f64, f64) {
    let first = last.saturating_sub(LIMSUP_SCALES - 1).max(1);
    let mut rem = 0.0f64;
    let mut psi = 0.0f64;
    // per-phase running maxima, then the max over phases: both are the max over the block
    for r in series.rows.iter().filter(|r| r.n >= first && r.n <= last) {
        rem = rem.max(r.normalized.abs());
        psi = psi.max(r.psi.abs());
    }
    (rem, psi)
}

fn ratio(rem: f64, psi: f64) -> f64 {
    if psi > 0.0 {
        rem / psi
    } else {
        rem
    }
}

/// Limsup of the normalized remainder over the last [`LIMSUP_SCALES`] scales.
pub fn limsup_estimate(series: &DeviationSeries) -> LimsupEstimate {
    let (rem, psi) = trailing_sups(series, series.n_max);
    let (prev_rem, prev_psi) = trailing_sups(series, series.n_max - 1);
    let estimate = ratio(rem, psi);
    let previous = ratio(prev_rem, prev_psi);
    let diagnostic = if estimate == previous {
        0.0
    } else {
        (estimate - previous).abs() / estimate.abs().max(previous.abs())
    };
    LimsupEstimate {
        index: series.index,
        estimate,
        raw: rem,
        psi_sup: psi,
        diagnostic,
        stabilized: diagnostic <= STABLE_CHANGE,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual of the regression.
    pub residual: f64,
    pub scales: usize,
}

/// Least-squares slope of `log max_phase |v|` against `log(ν₁ⁿ)`, one point per scale.
pub fn fit_exponent(family: &WindowFamily, values: &[f64]) -> Result<Fit> {
    if family.n_max < 4 {
        return Err(Error::ScheduleTooShort(family.n_max));
    }
    let mut maxima = vec![0.0f64; family.n_max + 1];
    for (s, v) in family.samples.iter().zip(values) {
        maxima[s.n] = maxima[s.n].max(v.abs());
    }
    let pts: Vec<(f64, f64)> = (1..=family.n_max)
        .filter(|&n| maxima[n] > 0.0)
        .map(|n| (n as f64 * family.expansion.ln(), maxima[n].ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::AllZeroTail);
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    Ok(Fit { slope, intercept, residual, scales: pts.len() })
}

/// Exact values as numbers.
pub fn exact_numbers(values: Vec<Q>) -> Vec<Number> {
    values.into_iter().map(Number::Exact).collect()
}

/// Floating values of exact traces.
pub fn to_f64(values: &[Q]) -> Vec<f64> {
    values.iter().map(q_to_f64).collect()
}
