//! Integrated density of states and trace-per-volume convergence.

use std::io::{self, Write};

use num_traits::Zero;
use serde::Serialize;

use super::series::{deviation_series, fit_exponent, limsup_estimate, DeviationSeries, Fit, LimsupEstimate, WindowData};
use crate::algebra::window::poly_traces;
use crate::algebra::{diagonal_class, ClassVector, Kernel, RestrictedMatrix};
use crate::error::{Error, Result};
use crate::geometry::{DeloneSegment, WindowFamily};
use crate::number::{format_sig, q_to_f64, Number, Q};
use crate::substitution::{EigenStructure, Membership, NumVec, PerronData, TraceIndex};

/// Spectrum of `A|_{B_T}` with the counting function `n_T(E)`.
#[derive(Clone, Debug, Serialize)]
pub struct IdsCurve {
    pub t: f64,
    pub volume: f64,
    pub eigenvalues: Vec<f64>,
}

impl IdsCurve {
    /// `#{λ ≤ E} / Vol(B_T)`.
    pub fn n(&self, e: f64) -> f64 {
        self.eigenvalues.partition_point(|&x| x <= e) as f64 / self.volume
    }

    /// Total mass `dim / Vol(B_T)`.
    pub fn mass(&self) -> f64 {
        self.eigenvalues.len() as f64 / self.volume
    }

    /// `Σ λᵐ / Vol(B_T)`.
    pub fn moment(&self, m: u32) -> f64 {
        self.eigenvalues.iter().map(|x| x.powi(m as i32)).sum::<f64>() / self.volume
    }

    /// Steps `(E, n_T(E))` at each distinct eigenvalue.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &e) in self.eigenvalues.iter().enumerate() {
            let value = (i + 1) as f64 / self.volume;
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 = value,
                _ => out.push((e, value)),
            }
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "E,n_T")?;
        for (e, n) in self.steps() {
            writeln!(w, "{},{}", format_sig(e), format_sig(n))?;
        }
        Ok(())
    }
}

pub fn ids_curve(kernel: &Kernel, seg: &DeloneSegment, t: f64) -> Result<IdsCurve> {
    if !kernel.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint);
    }
    let m = RestrictedMatrix::new(kernel, seg, t)?;
    let mut eigenvalues = m.eigenvalues()?;
    eigenvalues.sort_by(f64::total_cmp);
    Ok(IdsCurve { t, volume: WindowFamily::volume(t), eigenvalues })
}

/// `lim ⟨η₁, N(T)⟩ / Vol(B_T)`: converts the leading coefficient into a trace per volume.
pub fn leading_volume_factor(eig: &EigenStructure, perron: &PerronData) -> Number {
    let v = &eig.basis_vector(TraceIndex::LEADING).expect("leading index").vector;
    match (v, &perron.frequencies) {
        (NumVec::Exact(a), NumVec::Exact(f)) => Number::Exact(a.iter().zip(f).fold(Q::zero(), |acc, (x, y)| acc + x * y)),
        _ => Number::Approx(v.to_f64().iter().zip(perron.frequencies.to_f64()).map(|(x, y)| x * y).sum()),
    }
}

fn mul(a: &Number, b: &Number) -> Number {
    match (a.as_exact(), b.as_exact()) {
        (Some(x), Some(y)) => Number::Exact(x * y),
        _ => Number::Approx(a.to_f64() * b.to_f64()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShubinRow {
    pub n: usize,
    pub phase: usize,
    pub t: f64,
    pub rho: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShubinReport {
    /// `lim tr φ(A|_{B_T}) / Vol(B_T)`, from the class of `φ(A)`.
    pub limit: Number,
    pub rows: Vec<ShubinRow>,
    pub fit: Fit,
    /// `s₂ − 1` for the fastest sub-leading index, `−1` when there is none.
    pub expected_slope: f64,
}

/// Exact raw traces `tr φ(A|_{B_T})` over the schedule.
pub fn raw_poly_traces(kernel: &Kernel, coeffs: &[Q], seg: &DeloneSegment, data: &WindowData) -> Result<Vec<Q>> {
    poly_traces(kernel, coeffs, seg, &data.ts())
}

pub fn shubin_check(
    kernel: &Kernel,
    coeffs: &[Q],
    seg: &DeloneSegment,
    data: &WindowData,
    eig: &EigenStructure,
    perron: &PerronData,
) -> Result<ShubinReport> {
    let phi = kernel.poly(coeffs);
    let class = diagonal_class(&phi, eig)?;
    let limit = mul(&class.tau(TraceIndex::LEADING), &leading_volume_factor(eig, perron));
    let raw = raw_poly_traces(kernel, coeffs, seg, data)?;
    let rows: Vec<ShubinRow> = data
        .samples()
        .iter()
        .zip(&raw)
        .map(|(s, r)| {
            let vol = WindowFamily::volume(s.t);
            let gap = match limit.as_exact() {
                Some(l) => q_to_f64(&(r - l * Q::from_float(vol).expect("finite volume"))) / vol,
                None => q_to_f64(r) / vol - limit.to_f64(),
            };
            ShubinRow { n: s.n, phase: s.phase, t: s.t, rho: q_to_f64(r) / vol, gap: gap.abs() }
        })
        .collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let fit = fit_exponent(&data.family, &gaps)?;
    let expected_slope = eig
        .expanding_indices()
        .into_iter()
        .find(|&i| i != TraceIndex::LEADING && eig.membership(i) == Membership::Strict)
        .map_or(-1.0, |i| eig.exponent(i) - 1.0);
    Ok(ShubinReport { limit, rows, fit, expected_slope })
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinedReport {
    pub index: TraceIndex,
    /// `ρ_{i,j,k}(φ) = τ_{i,j,k}(φ(A))`.
    pub target: Number,
    pub class: ClassVector,
    pub series: DeviationSeries,
    pub estimate: LimsupEstimate,
}

pub fn refined_shubin_check(
    kernel: &Kernel,
    coeffs: &[Q],
    seg: &DeloneSegment,
    data: &WindowData,
    eig: &EigenStructure,
    idx: TraceIndex,
) -> Result<RefinedReport> {
    let phi = kernel.poly(coeffs);
    let class = diagonal_class(&phi, eig)?;
    let raw: Vec<Number> = raw_poly_traces(kernel, coeffs, seg, data)?.into_iter().map(Number::Exact).collect();
    let series = deviation_series(data, &raw, eig, &class, idx)?;
    let estimate = limsup_estimate(&series);
    Ok(RefinedReport { index: idx, target: class.tau(idx), class, series, estimate })
}
