//! Restrictions of kernels to the points of a window.

use std::io::{self, Write};
use std::ops::Range;

use nalgebra::DMatrix;
use num_traits::Zero;

use super::kernel::Kernel;
use super::window::ContextLookup;
use crate::error::{Error, Result};
use crate::geometry::DeloneSegment;
use crate::linalg::band::{dense_eigenvalues, SymBand, MAX_BAND};
use crate::number::{format_sig, q_to_f64, Q};

/// `A|_W` for `W = [−T, T]`: entries between window points, indexed `0..dim`
/// from left to right. Entries reaching outside the window are dropped.
#[derive(Clone, Debug)]
pub struct RestrictedMatrix {
    kernel: Kernel,
    t: f64,
    range: Range<usize>,
    ids: Vec<u32>,
    /// `rows[i][j + reach]` is the entry `(i, i + j)`.
    rows: Vec<Vec<f64>>,
}

impl RestrictedMatrix {
    pub fn new(kernel: &Kernel, seg: &DeloneSegment, t: f64) -> Result<Self> {
        let need = kernel.radius() + kernel.reach();
        if seg.pad() < need {
            return Err(Error::InsufficientMargin(format!(
                "segment keeps {} letters beyond the window, the kernel needs {need}",
                seg.pad()
            )));
        }
        let range = seg.window_for(t)?;
        let lookup = ContextLookup::new(kernel.language(), kernel.radius());
        let ids = lookup.ids(seg, range.clone())?;
        let reach = kernel.reach() as i64;
        let n = ids.len() as i64;
        let table: Vec<Vec<f64>> = kernel.table().iter().map(|r| r.iter().map(q_to_f64).collect()).collect();
        let rows = ids
            .iter()
            .enumerate()
            .map(|(i, &id)| {
                (-reach..=reach)
                    .map(|j| {
                        let k = i as i64 + j;
                        if k < 0 || k >= n {
                            0.0
                        } else {
                            table[id as usize][(j + reach) as usize]
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(RestrictedMatrix { kernel: kernel.clone(), t, range, ids, rows })
    }

    pub fn dim(&self) -> usize {
        self.ids.len()
    }

    pub fn half_width(&self) -> f64 {
        self.t
    }

    /// Word positions of the window points in the segment.
    pub fn positions(&self) -> Range<usize> {
        self.range.clone()
    }

    pub fn bandwidth(&self) -> usize {
        self.kernel.reach()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let reach = self.kernel.reach() as i64;
        let d = j as i64 - i as i64;
        if d.abs() > reach || i >= self.dim() || j >= self.dim() {
            0.0
        } else {
            self.rows[i][(d + reach) as usize]
        }
    }

    /// Exact entry from the rational kernel table.
    pub fn exact(&self, i: usize, j: usize) -> Q {
        let d = j as i64 - i as i64;
        if d.unsigned_abs() as usize > self.kernel.reach() || i >= self.dim() || j >= self.dim() {
            Q::zero()
        } else {
            self.kernel.value_by_id(self.ids[i] as usize, d).clone()
        }
    }

    /// `Σ A(p,p)` over the window, exact.
    pub fn trace_exact(&self) -> Q {
        self.ids.iter().fold(Q::zero(), |acc, &id| acc + self.kernel.value_by_id(id as usize, 0))
    }

    pub fn is_symmetric(&self) -> bool {
        let reach = self.kernel.reach();
        (0..self.dim()).all(|i| (1..=reach).all(|d| i + d >= self.dim() || self.exact(i, i + d) == self.exact(i + d, i)))
    }

    /// Eigenvalues in ascending order; band reduction for narrow bands, dense otherwise.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_symmetric() {
            return Err(Error::NotSelfAdjoint);
        }
        let n = self.dim();
        let w = self.bandwidth();
        if w <= MAX_BAND {
            let mut b = SymBand::new(n, w.min(n.saturating_sub(1)));
            for i in 0..n {
                for j in i.saturating_sub(w)..=i {
                    b.set(i, j, self.get(i, j));
                }
            }
            b.eigenvalues()
        } else {
            Ok(dense_eigenvalues(DMatrix::from_fn(n, n, |i, j| self.get(i, j))))
        }
    }

    /// `tr(Aᵏ)` for `k = 0..=m` from band matrix products.
    pub fn power_traces(&self, m: usize) -> Vec<f64> {
        let n = self.dim();
        let a = Band::from_restricted(self);
        let mut out = vec![n as f64];
        if m == 0 {
            return out;
        }
        let mut powers = vec![Band::identity(n), a.clone()];
        for k in 1..=m {
            let lo = k / 2;
            let hi = k - lo;
            while powers.len() <= hi {
                let next = powers.last().unwrap().mul(&a);
                powers.push(next);
            }
            out.push(powers[lo].trace_product(&powers[hi]));
        }
        out
    }

    /// `tr φ(A|_W) = Σ φ(λ)` with `coeffs` lowest degree first.
    pub fn poly_trace(&self, coeffs: &[f64]) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.iter().map(|&x| horner(coeffs, x)).sum())
    }

    /// `tr φ(A|_W)` from matrix-power traces.
    pub fn poly_trace_powers(&self, coeffs: &[f64]) -> f64 {
        let pt = self.power_traces(coeffs.len().saturating_sub(1));
        coeffs.iter().zip(&pt).map(|(c, t)| c * t).sum()
    }

    /// Nonzero entries as `(i, j, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let reach = self.kernel.reach() as i64;
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    out.push((i, (i as i64 + k as i64 - reach) as usize, v));
                }
            }
        }
        out
    }

    pub fn write_triplets(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "i,j,value")?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i},{j},{}", format_sig(v))?;
        }
        Ok(())
    }
}

pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// General (not necessarily symmetric) band matrix for power traces.
#[derive(Clone, Debug)]
struct Band {
    n: usize,
    w: usize,
    rows: Vec<Vec<f64>>,
}

impl Band {
    fn identity(n: usize) -> Self {
        Band { n, w: 0, rows: vec![vec![1.0]; n] }
    }

    fn from_restricted(m: &RestrictedMatrix) -> Self {
        Band { n: m.dim(), w: m.bandwidth(), rows: m.rows.clone() }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let d = j as i64 - i as i64;
        if d.unsigned_abs() as usize > self.w {
            0.0
        } else {
            self.rows[i][(d + self.w as i64) as usize]
        }
    }

    fn mul(&self, other: &Band) -> Band {
        let w = (self.w + other.w).min(self.n.saturating_sub(1));
        let n = self.n;
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![0.0; 2 * w + 1];
                for (k, &a) in self.rows[i].iter().enumerate() {
                    let x = i as i64 + k as i64 - self.w as i64;
                    if a == 0.0 || x < 0 || x >= n as i64 {
                        continue;
                    }
                    let x = x as usize;
                    for (l, &b) in other.rows[x].iter().enumerate() {
                        let j = x as i64 + l as i64 - other.w as i64;
                        if b == 0.0 || j < 0 || j >= n as i64 {
                            continue;
                        }
                        row[(j - i as i64 + w as i64) as usize] += a * b;
                    }
                }
                row
            })
            .collect();
        Band { n, w, rows }
    }

    /// `tr(self · other)`.
    fn trace_product(&self, other: &Band) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for (k, &a) in self.rows[i].iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let j = i as i64 + k as i64 - self.w as i64;
                if j >= 0 && (j as usize) < self.n {
                    s += a * other.get(j as usize, i);
                }
            }
        }
        s
    }
}
