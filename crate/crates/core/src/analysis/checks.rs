//! Trace functionals, windowed commutator traces and supertile counts.

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::window::window_traces_many;
use crate::algebra::{diagonal_class, Kernel};
use crate::error::{Error, Result};
use crate::geometry::DeloneSegment;
use crate::number::{q_to_f64, Number};
use crate::substitution::{EigenStructure, SubstitutionRule, TraceIndex};

/// `τ_{i,j,k}(A)` from the class of the diagonal; `idx` must be rapidly expanding.
pub fn tau(kernel: &Kernel, eig: &EigenStructure, idx: TraceIndex) -> Result<Number> {
    if !eig.in_expanding_set(idx) {
        return Err(Error::IndexOutsideRange(idx.i, idx.j, idx.k));
    }
    Ok(diagonal_class(kernel, eig)?.tau(idx))
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorRow {
    pub t: f64,
    pub value: f64,
    pub budget: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub rows: Vec<CommutatorRow>,
    pub max_abs: f64,
    /// Every windowed trace is exactly zero.
    pub exact_zero: bool,
    /// Every windowed trace is within its budget.
    pub bounded: bool,
}

/// Bound on `|Σ_{p∈W} (ab − ba)(p,p)|`: only pairs straddling an end of the
/// window survive, each within range of the boundary and with at most
/// `2·reach + 1` partners.
pub fn commutator_budget(a: &Kernel, b: &Kernel, seg: &DeloneSegment, t: f64) -> f64 {
    let reach = a.reach().min(b.reach());
    let range = a.range().min(b.range());
    let collar = seg.boundary_collar_count(t, range) as f64;
    collar * (2 * reach + 1) as f64 * a.sup_norm() * b.sup_norm()
}

/// Windowed commutator traces for many pairs, with one context sweep per radius.
pub fn commutator_trace_tests(pairs: &[(Kernel, Kernel)], seg: &DeloneSegment, ts: &[f64]) -> Result<Vec<CommutatorReport>> {
    let commutators: Vec<Kernel> = pairs.iter().map(|(a, b)| a.convolve(b).sub(&b.convolve(a))).collect();
    let refs: Vec<&Kernel> = commutators.iter().collect();
    let traces = window_traces_many(&refs, seg, ts)?;
    Ok(pairs
        .iter()
        .zip(traces)
        .map(|((a, b), tr)| {
            let rows: Vec<CommutatorRow> = ts
                .iter()
                .zip(&tr)
                .map(|(&t, v)| CommutatorRow { t, value: q_to_f64(v), budget: commutator_budget(a, b, seg, t) })
                .collect();
            CommutatorReport {
                max_abs: rows.iter().map(|r| r.value.abs()).fold(0.0, f64::max),
                exact_zero: tr.iter().all(|v| v.is_zero()),
                bounded: rows.iter().all(|r| r.value.abs() <= r.budget),
                rows,
            }
        })
        .collect())
}

pub fn commutator_trace_test(a: &Kernel, b: &Kernel, seg: &DeloneSegment, ts: &[f64]) -> Result<CommutatorReport> {
    Ok(commutator_trace_tests(&[(a.clone(), b.clone())], seg, ts)?.remove(0))
}

#[derive(Clone, Debug, Serialize)]
pub struct SupertileRow {
    /// Level `n·p` of the supertile `σ^{np}(L)` at the origin.
    pub level: usize,
    pub length: f64,
    pub counts: Vec<u64>,
    /// `Mᵖ` applied to the previous level's counts.
    pub predicted: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupertileCheck {
    pub letter: char,
    pub power: usize,
    pub rows: Vec<SupertileRow>,
    pub exact: bool,
}

/// Counts in the windows `[0, |σ^{np}(L)|)` covering the supertiles that start
/// at the origin, compared with `Mᵖ` applied to the level below.
pub fn supertile_check(seg: &DeloneSegment, levels: usize) -> Result<SupertileCheck> {
    let rule: &SubstitutionRule = seg.rule();
    let plan = seg.plan();
    let letter = plan.nesting.1;
    let p = plan.power.max(1);
    let ab = rule.abelianize();
    let lengths = rule.lengths_f64();
    let mut word = vec![letter];
    let mut rows: Vec<SupertileRow> = Vec::new();
    for level in 0..=levels {
        if level > 0 {
            word = rule.substitute_n(&word, p);
        }
        let length: f64 = word.iter().map(|&l| lengths[l as usize]).sum();
        if length > seg.half_width() {
            return Err(Error::WindowExceeded { requested: length, available: seg.half_width() });
        }
        let counts = seg.counts_in(seg.range_half_open(0.0, length));
        let predicted = match rows.last() {
            None => {
                let mut e = vec![0; rule.size()];
                e[letter as usize] = 1;
                e
            }
            Some(prev) => (0..p).fold(prev.counts.clone(), |v, _| ab.apply(&v)),
        };
        rows.push(SupertileRow { level: level * p, length, counts, predicted });
    }
    let exact = rows.iter().all(|r| r.counts == r.predicted);
    Ok(SupertileCheck { letter: rule.alphabet()[letter as usize], power: p, rows, exact })
}
