//! Exact window sums of kernel diagonals.
//!
//! `tr(A)|_W = Σ_{p∈W} A(p,p)` only needs how often each context word occurs
//! in the window, so these sums are computed from context counts and stay
//! exact for windows with millions of points.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::kernel::Kernel;
use crate::error::{Error, Result};
use crate::geometry::DeloneSegment;
use crate::number::Q;
use crate::parallel::par_map;
use crate::substitution::Language;

/// Maps context words of a fixed radius to their ids in the sorted legal list.
#[derive(Clone, Debug)]
pub struct ContextLookup {
    radius: usize,
    base: u64,
    dense: Option<Vec<u32>>,
    sparse: HashMap<u64, u32>,
    count: usize,
}

const DENSE_LIMIT: u64 = 1 << 22;
const MISSING: u32 = u32::MAX;

impl ContextLookup {
    pub fn new(lang: &Language, radius: usize) -> Self {
        let words = lang.words(2 * radius + 1);
        let base = lang.rule().size() as u64;
        let space = base.checked_pow(2 * radius as u32 + 1);
        let mut dense = space.filter(|&s| s <= DENSE_LIMIT).map(|s| vec![MISSING; s as usize]);
        let mut sparse = HashMap::new();
        for (id, w) in words.iter().enumerate() {
            let code = encode(w, base);
            match dense.as_mut() {
                Some(d) => d[code as usize] = id as u32,
                None => {
                    sparse.insert(code, id as u32);
                }
            }
        }
        ContextLookup { radius, base, dense, sparse, count: words.len() }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Number of legal contexts.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn id(&self, ctx: &[u8]) -> Option<usize> {
        let code = encode(ctx, self.base);
        let id = match &self.dense {
            Some(d) => d[code as usize],
            None => self.sparse.get(&code).copied().unwrap_or(MISSING),
        };
        (id != MISSING).then_some(id as usize)
    }

    /// Context id of the point at word position `w` of `seg`.
    pub fn id_at(&self, seg: &DeloneSegment, w: usize) -> Result<usize> {
        let ctx = seg.context(w, self.radius)?;
        self.id(ctx)
            .ok_or_else(|| Error::Collar(format!("context {} is not a legal word", seg.rule().decode(ctx))))
    }

    /// Context ids for a range of word positions.
    pub fn ids(&self, seg: &DeloneSegment, range: std::ops::Range<usize>) -> Result<Vec<u32>> {
        range.map(|w| self.id_at(seg, w).map(|i| i as u32)).collect()
    }
}

fn encode(w: &[u8], base: u64) -> u64 {
    w.iter().fold(0u64, |acc, &l| acc * base + l as u64)
}

/// Counts of each context word of radius `radius` in the windows `[−t, t]`.
pub fn context_counts(seg: &DeloneSegment, lang: &Language, radius: usize, ts: &[f64]) -> Result<Vec<Vec<u64>>> {
    check_margin(seg, radius)?;
    let lookup = ContextLookup::new(lang, radius);
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
    let mut out = vec![Vec::new(); ts.len()];
    let mut counts = vec![0u64; lookup.len()];
    let origin = seg.origin();
    let mut cur = origin..origin;
    for &i in &order {
        let r = seg.window_for(ts[i])?;
        while cur.start > r.start {
            cur.start -= 1;
            counts[lookup.id_at(seg, cur.start)?] += 1;
        }
        while cur.end < r.end {
            counts[lookup.id_at(seg, cur.end)?] += 1;
            cur.end += 1;
        }
        out[i] = counts.clone();
    }
    Ok(out)
}

fn check_margin(seg: &DeloneSegment, radius: usize) -> Result<()> {
    if seg.pad() < radius {
        return Err(Error::InsufficientMargin(format!(
            "segment keeps {} letters beyond the window, context radius {radius} needs more",
            seg.pad()
        )));
    }
    Ok(())
}

/// Diagonal values of `kernel` per context, and their radius.
pub fn diagonal_values(kernel: &Kernel) -> (usize, Vec<Q>) {
    let d = kernel.diagonal();
    (d.radius(), d.table().iter().map(|row| row[0].clone()).collect())
}

fn pair(counts: &[u64], values: &[Q]) -> Q {
    counts
        .iter()
        .zip(values)
        .filter(|(c, v)| **c != 0 && !v.is_zero())
        .fold(Q::zero(), |acc, (c, v)| acc + v * Q::from_integer(BigInt::from(*c)))
}

/// Exact `Σ_{p ∈ [−t,t]} A(p,p)` for each window.
pub fn window_traces(kernel: &Kernel, seg: &DeloneSegment, ts: &[f64]) -> Result<Vec<Q>> {
    let (radius, values) = diagonal_values(kernel);
    let counts = context_counts(seg, kernel.language(), radius, ts)?;
    Ok(counts.iter().map(|c| pair(c, &values)).collect())
}

/// Exact window traces of several kernels sharing one sweep per radius.
pub fn window_traces_many(kernels: &[&Kernel], seg: &DeloneSegment, ts: &[f64]) -> Result<Vec<Vec<Q>>> {
    let Some(first) = kernels.first() else {
        return Ok(Vec::new());
    };
    let lang = first.language();
    let diags: Vec<(usize, Vec<Q>)> = kernels.iter().map(|k| diagonal_values(k)).collect();
    let mut radii: Vec<usize> = diags.iter().map(|d| d.0).collect();
    radii.sort_unstable();
    radii.dedup();
    let sweeps = par_map(&radii, |&r| context_counts(seg, lang, r, ts));
    let mut by_radius: HashMap<usize, Vec<Vec<u64>>> = HashMap::new();
    for (r, counts) in radii.into_iter().zip(sweeps) {
        by_radius.insert(r, counts?);
    }
    Ok(diags
        .iter()
        .map(|(radius, values)| by_radius[radius].iter().map(|c| pair(c, values)).collect())
        .collect())
}

/// Exact `tr(φ(A|_W)) − tr(φ(A)|_W)` for the window `[−t, t]`.
pub fn restriction_defect(kernel: &Kernel, coeffs: &[Q], seg: &DeloneSegment, t: f64) -> Result<Q> {
    Ok(restriction_defects(kernel, coeffs, seg, &[t])?.remove(0))
}

/// [`restriction_defect`] for several windows, sharing the kernel polynomial.
///
/// `(A|_W)^k(p,p) = A^k(p,p)` unless a path of `k` steps from `p` leaves the
/// window, so only points within `deg·reach` of either end contribute. Their
/// diagonal entries are propagated locally.
pub fn restriction_defects(kernel: &Kernel, coeffs: &[Q], seg: &DeloneSegment, ts: &[f64]) -> Result<Vec<Q>> {
    let deg = coeffs.len().saturating_sub(1);
    let reach = kernel.reach();
    if deg <= 1 || reach == 0 {
        for &t in ts {
            seg.window_for(t)?;
        }
        return Ok(vec![Q::zero(); ts.len()]);
    }
    let phi = kernel.poly(coeffs);
    let (drad, dvals) = diagonal_values(&phi);
    check_margin(seg, kernel.radius().max(drad))?;
    let edge = deg * reach;
    let lookup = ContextLookup::new(kernel.language(), kernel.radius());
    let dlookup = ContextLookup::new(kernel.language(), drad);
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let range = seg.window_for(t)?;
        let mut points: Vec<usize> = Vec::new();
        if range.len() <= 2 * edge {
            points.extend(range.clone());
        } else {
            points.extend(range.start..range.start + edge);
            points.extend(range.end - edge..range.end);
        }
        let mut total = Q::zero();
        for p in points {
            let local = local_poly_diagonal(kernel, &lookup, coeffs, seg, &range, p)?;
            total += local - &dvals[dlookup.id_at(seg, p)?];
        }
        out.push(total);
    }
    Ok(out)
}

/// Exact `tr(φ(A|_W))` for each window `[−t, t]`: the window sum of the
/// diagonal of `φ(A)` plus the edge defect.
pub fn poly_traces(kernel: &Kernel, coeffs: &[Q], seg: &DeloneSegment, ts: &[f64]) -> Result<Vec<Q>> {
    let phi = kernel.poly(coeffs);
    let sums = window_traces(&phi, seg, ts)?;
    let defects = restriction_defects(kernel, coeffs, seg, ts)?;
    Ok(sums.into_iter().zip(defects).map(|(a, b)| a + b).collect())
}

/// `φ(A|_W)(p, p)` by propagating `e_p` through the truncated operator.
fn local_poly_diagonal(
    kernel: &Kernel,
    lookup: &ContextLookup,
    coeffs: &[Q],
    seg: &DeloneSegment,
    range: &std::ops::Range<usize>,
    p: usize,
) -> Result<Q> {
    let deg = coeffs.len().saturating_sub(1);
    let reach = kernel.reach() as i64;
    let span = deg as i64 * reach;
    let lo = (p as i64 - span).max(range.start as i64) as usize;
    let hi = (p as i64 + span + 1).min(range.end as i64) as usize;
    let ids = lookup.ids(seg, lo..hi)?;
    let n = hi - lo;
    let mut v = vec![Q::zero(); n];
    v[p - lo] = Q::from_integer(1.into());
    let mut acc = coeffs.first().cloned().unwrap_or_else(Q::zero);
    for c in coeffs.iter().skip(1) {
        let mut next = vec![Q::zero(); n];
        for (x, slot) in next.iter_mut().enumerate() {
            for j in -reach..=reach {
                let y = x as i64 + j;
                if y < 0 || y >= n as i64 || v[y as usize].is_zero() {
                    continue;
                }
                let a = kernel.value_by_id(ids[x] as usize, j);
                if !a.is_zero() {
                    *slot += a * &v[y as usize];
                }
            }
        }
        v = next;
        acc += c * &v[p - lo];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::number::{q, qi};
    use crate::substitution::SubstitutionRule;

    fn setup(t: f64) -> (Arc<Language>, DeloneSegment) {
        let r = SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13").unwrap();
        let l = Arc::new(Language::new(&r));
        let seg = DeloneSegment::build(&r, &l, (0, 1), t).unwrap();
        (l, seg)
    }

    #[test]
    fn traces_from_counts_match_direct_sums() {
        let (l, seg) = setup(400.0);
        let h = Kernel::hamiltonian(&l, &[q(-5, 21), q(-15, 21), q(-65, 21)]);
        let va = Kernel::projection(&l, 0);
        let s = Kernel::shift(&l);
        let k = va.convolve(&s).convolve(&va).convolve(&s.adjoint());
        let ts = [17.0, 400.0, 3.5, 125.0];
        for kernel in [&h, &k] {
            let traces = window_traces(kernel, &seg, &ts).unwrap();
            for (t, tr) in ts.iter().zip(&traces) {
                let direct = seg
                    .window_for(*t)
                    .unwrap()
                    .map(|w| kernel.value(seg.context(w, kernel.radius()).unwrap(), 0))
                    .fold(Q::zero(), |a, x| a + x);
                assert_eq!(&direct, tr);
            }
        }
        let many = window_traces_many(&[&h, &k], &seg, &ts).unwrap();
        assert_eq!(many[0], window_traces(&h, &seg, &ts).unwrap());
    }

    #[test]
    fn laplacian_square_defect() {
        // on the lattice the x² defect is one missing neighbor at each end: −2·(1/4)
        let z = SubstitutionRule::parse("A -> AA").unwrap();
        let l = Arc::new(Language::new(&z));
        let seg = DeloneSegment::build(&z, &l, (0, 0), 30.0).unwrap();
        let d = Kernel::laplacian(&l);
        for t in [2.0, 7.0, 30.0] {
            assert_eq!(restriction_defect(&d, &[qi(0), qi(0), qi(1)], &seg, t).unwrap(), q(-1, 2));
        }
        assert_eq!(restriction_defect(&d, &[qi(3), qi(1)], &seg, 5.0).unwrap(), qi(0));
    }
}
