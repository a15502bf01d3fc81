//! Finite segments `Λ ∩ [−T, T]` of the Delone set of a substitution.

use std::ops::{AddAssign, Range};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::number::Q;
use crate::substitution::words::{limit_word, plan_seed, Language, SeedPlan};
use crate::substitution::{NumVec, SubstitutionRule};

#[derive(Clone, Debug)]
enum Coords {
    /// Coordinates are `ticks / per_unit` exactly.
    Ticks {
        per_unit: i64,
        ticks: Vec<i64>,
    },
    Float(Vec<f64>),
}

/// Points of the Delone set in `[−T, T]` with tile labels. A point carries the
/// label of the tile to its right. The underlying word extends `pad` letters
/// beyond the window on each side so local contexts of window points resolve.
#[derive(Clone, Debug)]
pub struct DeloneSegment {
    rule: SubstitutionRule,
    plan: SeedPlan,
    word: Vec<u8>,
    coords: Coords,
    zero: usize,
    window: Range<usize>,
    t: f64,
}

/// Canonical local pattern: offsets (in ticks, or nanounits for irrational
/// lengths) and labels of the points within a radius, origin at the center.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PatternKey(pub Vec<(i64, u8)>);

/// Letters of context kept beyond the window by default.
pub const DEFAULT_PAD: usize = 64;

impl DeloneSegment {
    pub fn build(
        rule: &SubstitutionRule,
        language: &Language,
        seed: (u8, u8),
        t: f64,
    ) -> Result<Self> {
        Self::build_padded(rule, language, seed, t, DEFAULT_PAD)
    }

    pub fn build_padded(
        rule: &SubstitutionRule,
        language: &Language,
        seed: (u8, u8),
        t: f64,
        pad: usize,
    ) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Invalid(format!(
                "window half-width must be finite and nonnegative, got {t}"
            )));
        }
        let plan = plan_seed(rule, language, seed)?;
        let lengths = rule.lengths_f64();
        let min_len = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean_len = {
            // average tile length along the limit word, estimated from a sample
            let (_, sample) = limit_word(rule, &plan, 0, 4096);
            sample.iter().map(|&l| lengths[l as usize]).sum::<f64>() / sample.len() as f64
        };
        let max_len = lengths.iter().cloned().fold(0.0, f64::max);
        let need = t + (pad as f64 + 2.0) * max_len;
        let mut per_side = ((t / mean_len) * 1.05) as usize + pad + 16;
        loop {
            let (left, right) = limit_word(rule, &plan, per_side, per_side);
            let cover_right: f64 = right.iter().map(|&l| lengths[l as usize]).sum();
            let cover_left: f64 = left.iter().map(|&l| lengths[l as usize]).sum();
            if cover_right >= need && cover_left >= need {
                return Self::from_words(rule, plan, left, right, t, pad);
            }
            if left.len() < per_side || right.len() < per_side || per_side as f64 * min_len > need {
                return Err(Error::InsufficientMargin(
                    "limit word stopped growing".into(),
                ));
            }
            per_side = per_side * 3 / 2 + 16;
        }
    }

    fn from_words(
        rule: &SubstitutionRule,
        plan: SeedPlan,
        left: Vec<u8>,
        right: Vec<u8>,
        t: f64,
        pad: usize,
    ) -> Result<Self> {
        let zero = left.len();
        let mut word = left;
        word.extend_from_slice(&right);
        let coords = match rule.lengths() {
            NumVec::Exact(th) => {
                let lcm = th.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                let per_unit = lcm
                    .to_i64()
                    .ok_or_else(|| Error::Invalid("length denominators too large".into()))?;
                let step: Vec<i64> = th
                    .iter()
                    .map(|x| {
                        (x * Q::from_integer(lcm.clone()))
                            .to_integer()
                            .to_i64()
                            .unwrap()
                    })
                    .collect();
                Coords::Ticks {
                    per_unit,
                    ticks: prefix_positions(&word, zero, &step),
                }
            }
            NumVec::Approx(th) => Coords::Float(prefix_positions(&word, zero, th)),
        };
        let mut seg = DeloneSegment {
            rule: rule.clone(),
            plan,
            word,
            coords,
            zero,
            window: 0..0,
            t,
        };
        let range = seg.range_for(t);
        if range.start < pad || seg.word.len() - range.end < pad {
            return Err(Error::InsufficientMargin(
                "generated word does not cover the window".into(),
            ));
        }
        // trim to the window plus padding
        let lo = range.start - pad;
        let hi = range.end + pad;
        seg.word = seg.word[lo..hi].to_vec();
        seg.coords = match seg.coords {
            Coords::Ticks { per_unit, ticks } => Coords::Ticks {
                per_unit,
                ticks: ticks[lo..hi].to_vec(),
            },
            Coords::Float(v) => Coords::Float(v[lo..hi].to_vec()),
        };
        seg.zero -= lo;
        seg.window = pad..pad + range.len();
        Ok(seg)
    }

    pub fn rule(&self) -> &SubstitutionRule {
        &self.rule
    }

    pub fn plan(&self) -> &SeedPlan {
        &self.plan
    }

    /// Half-width `T` of the window.
    pub fn half_width(&self) -> f64 {
        self.t
    }

    /// Number of points in `[−T, T]`.
    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Word positions of the window points.
    pub fn window_range(&self) -> Range<usize> {
        self.window.clone()
    }

    /// Word position of the point at the origin.
    pub fn origin(&self) -> usize {
        self.zero
    }

    /// The padded word; position `w` is the label of the point at `coordinate(w)`.
    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn label(&self, w: usize) -> u8 {
        self.word[w]
    }

    pub fn coordinate(&self, w: usize) -> f64 {
        match &self.coords {
            Coords::Ticks { per_unit, ticks } => ticks[w] as f64 / *per_unit as f64,
            Coords::Float(v) => v[w],
        }
    }

    pub fn exact_coordinate(&self, w: usize) -> Option<Q> {
        match &self.coords {
            Coords::Ticks { per_unit, ticks } => {
                Some(Q::new(BigInt::from(ticks[w]), BigInt::from(*per_unit)))
            }
            Coords::Float(_) => None,
        }
    }

    /// Coordinates of the window points.
    pub fn points(&self) -> Vec<f64> {
        self.window.clone().map(|w| self.coordinate(w)).collect()
    }

    fn is_left_of(&self, w: usize, x: f64) -> bool {
        // coordinate(w) < x
        match &self.coords {
            Coords::Ticks { per_unit, ticks } => (ticks[w] as f64) < x * *per_unit as f64,
            Coords::Float(v) => v[w] < x,
        }
    }

    fn is_at_most(&self, w: usize, x: f64) -> bool {
        match &self.coords {
            Coords::Ticks { per_unit, ticks } => (ticks[w] as f64) <= x * *per_unit as f64,
            Coords::Float(v) => v[w] <= x,
        }
    }

    /// Word positions of points in the closed interval `[a, b]`, over the whole padded word.
    pub fn range_in(&self, a: f64, b: f64) -> Range<usize> {
        let n = self.word.len();
        let lo = partition(n, |w| self.is_left_of(w, a));
        let hi = partition(n, |w| self.is_at_most(w, b));
        lo..hi.max(lo)
    }

    /// Word positions of points in `[a, b)`.
    pub fn range_half_open(&self, a: f64, b: f64) -> Range<usize> {
        let n = self.word.len();
        let lo = partition(n, |w| self.is_left_of(w, a));
        let hi = partition(n, |w| self.is_left_of(w, b));
        lo..hi.max(lo)
    }

    fn range_for(&self, t: f64) -> Range<usize> {
        self.range_in(-t, t)
    }

    /// Word positions of the points in `[−t, t]`; requires `t ≤ T`.
    pub fn window_for(&self, t: f64) -> Result<Range<usize>> {
        if t > self.t * (1.0 + 1e-15) {
            return Err(Error::WindowExceeded {
                requested: t,
                available: self.t,
            });
        }
        Ok(self.range_for(t))
    }

    pub fn counts_in(&self, range: Range<usize>) -> Vec<u64> {
        let mut c = vec![0u64; self.rule.size()];
        for &l in &self.word[range] {
            c[l as usize] += 1;
        }
        c
    }

    /// Per-label counts `N(L, t)` of points in `[−t, t]`.
    pub fn counts_in_window(&self, t: f64) -> Result<Vec<u64>> {
        Ok(self.counts_in(self.window_for(t)?))
    }

    /// Sums of `value(w)` over the points of each window `[−t, t]`, computed by
    /// one outward sweep. The windows may be given in any order.
    pub fn nested_sums<V: Clone + AddAssign>(
        &self,
        ts: &[f64],
        zero: V,
        mut value: impl FnMut(usize) -> V,
    ) -> Result<Vec<V>> {
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
        let mut out = vec![zero.clone(); ts.len()];
        let mut acc = zero;
        let mut cur: Range<usize> = self.zero..self.zero;
        for &i in &order {
            let r = self.window_for(ts[i])?;
            while cur.start > r.start {
                cur.start -= 1;
                acc += value(cur.start);
            }
            while cur.end < r.end {
                acc += value(cur.end);
                cur.end += 1;
            }
            out[i] = acc.clone();
        }
        Ok(out)
    }

    /// Per-label counts for many windows at once.
    pub fn counts_in_windows(&self, ts: &[f64]) -> Result<Vec<Vec<u64>>> {
        let m = self.rule.size();
        let sums = self.nested_sums(ts, CountVec(vec![0; m]), |w| {
            let mut v = vec![0; m];
            v[self.word[w] as usize] = 1;
            CountVec(v)
        })?;
        Ok(sums.into_iter().map(|c| c.0).collect())
    }

    /// Context word of radius `r` (letters) around the point at `w`.
    pub fn context(&self, w: usize, r: usize) -> Result<&[u8]> {
        if w < r || w + r >= self.word.len() {
            return Err(Error::InsufficientMargin(format!(
                "context of radius {r} at word position {w}"
            )));
        }
        Ok(&self.word[w - r..=w + r])
    }

    /// Points within distance `radius` of the point at `w`, as a pattern key.
    pub fn local_pattern(&self, w: usize, radius: f64) -> Result<PatternKey> {
        let x = self.coordinate(w);
        if x - radius < -self.t || x + radius > self.t {
            return Err(Error::InsufficientMargin(format!(
                "pattern of radius {radius} at {x} leaves the window [-{}, {}]",
                self.t, self.t
            )));
        }
        let range = self.range_in(x - radius, x + radius);
        let key = range
            .map(|u| {
                let off = match &self.coords {
                    Coords::Ticks { ticks, .. } => ticks[u] - ticks[w],
                    Coords::Float(v) => ((v[u] - v[w]) * 1e9).round() as i64,
                };
                (off, self.word[u])
            })
            .collect();
        Ok(PatternKey(key))
    }

    /// Number of points within distance `r` of `{−t, t}`.
    pub fn boundary_collar_count(&self, t: f64, r: f64) -> usize {
        let a = self.range_in(-t - r, -t + r);
        let b = self.range_in(t - r, t + r);
        if b.start < a.end {
            a.end.max(b.end) - a.start
        } else {
            a.len() + b.len()
        }
    }

    /// Largest context radius (letters) available at every window point.
    pub fn pad(&self) -> usize {
        self.window.start.min(self.word.len() - self.window.end)
    }
}

#[derive(Clone, Debug, PartialEq)]
struct CountVec(Vec<u64>);

impl AddAssign for CountVec {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

fn partition(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn prefix_positions<T>(word: &[u8], zero: usize, step: &[T]) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let mut pos = vec![T::default(); word.len()];
    for w in zero + 1..word.len() {
        pos[w] = pos[w - 1] + step[word[w - 1] as usize];
    }
    for w in (0..zero).rev() {
        pos[w] = pos[w + 1] - step[word[w] as usize];
    }
    pos
}

/// Sample windows `T = ν₁ⁿ·T₀` for `n = 1..=n_max` and `K` phases
/// `T₀ = ν₁^{(k+½)/K}`, with base window `[−1, 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct WindowFamily {
    pub expansion: f64,
    pub n_max: usize,
    pub phases: usize,
    pub samples: Vec<Sample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub n: usize,
    pub phase: usize,
    pub t: f64,
}

impl WindowFamily {
    pub fn new(expansion: f64, n_max: usize, phases: usize) -> Result<Self> {
        if expansion <= 1.0 {
            return Err(Error::Invalid("expansion must exceed 1".into()));
        }
        if n_max < 1 || phases < 1 {
            return Err(Error::Invalid(
                "schedule needs n_max >= 1 and at least one phase".into(),
            ));
        }
        let mut samples = Vec::new();
        for n in 1..=n_max {
            for k in 0..phases {
                let t0 = expansion.powf((k as f64 + 0.5) / phases as f64);
                samples.push(Sample {
                    n,
                    phase: k,
                    t: expansion.powi(n as i32) * t0,
                });
            }
        }
        Ok(WindowFamily {
            expansion,
            n_max,
            phases,
            samples,
        })
    }

    pub fn max_t(&self) -> f64 {
        self.samples.iter().map(|s| s.t).fold(0.0, f64::max)
    }

    pub fn ts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// `Vol(B_T) = 2T`.
    pub fn volume(t: f64) -> f64 {
        2.0 * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (SubstitutionRule, Language) {
        let r = SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13")
            .unwrap();
        let l = Language::new(&r);
        (r, l)
    }

    #[test]
    fn small_example_segment() {
        let (r, l) = example();
        let s = DeloneSegment::build(&r, &l, (0, 1), 5.0).unwrap();
        assert_eq!(s.points(), vec![-5.0, -4.0, -1.0, 0.0, 1.0, 4.0, 5.0]);
        let labels: String = s
            .window_range()
            .map(|w| r.alphabet()[s.label(w) as usize])
            .collect();
        assert_eq!(labels, "ABAABAA");
        assert_eq!(s.counts_in_window(5.0).unwrap(), vec![5, 2, 0]);
        assert_eq!(s.counts_in_window(0.0).unwrap(), vec![1, 0, 0]);
        assert!(s.counts_in_window(6.0).is_err());
    }

    #[test]
    fn lattice_segment() {
        let z = SubstitutionRule::parse("A -> AA").unwrap();
        let s = DeloneSegment::build(&z, &Language::new(&z), (0, 0), 3.0).unwrap();
        assert_eq!(s.points(), vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn gaps_match_labels() {
        let (r, l) = example();
        let s = DeloneSegment::build(&r, &l, (0, 1), 5000.0).unwrap();
        let th = r.lengths_f64();
        for w in 0..s.word().len() - 1 {
            let gap = s.coordinate(w + 1) - s.coordinate(w);
            assert_eq!(gap, th[s.label(w) as usize]);
        }
        assert_eq!(s.coordinate(s.origin()), 0.0);
    }

    #[test]
    fn nested_sums_match_direct_counts() {
        let (r, l) = example();
        let s = DeloneSegment::build(&r, &l, (0, 1), 3000.0).unwrap();
        let ts = [2999.5, 10.0, 0.0, 777.7, 3000.0, 10.0];
        let swept = s.counts_in_windows(&ts).unwrap();
        for (t, c) in ts.iter().zip(&swept) {
            assert_eq!(*c, s.counts_in_window(*t).unwrap());
        }
    }

    #[test]
    fn patterns_and_collars() {
        let (r, l) = example();
        let s = DeloneSegment::build(&r, &l, (0, 1), 50.0).unwrap();
        let key = s.local_pattern(s.origin(), 4.0).unwrap();
        assert_eq!(key.0, vec![(-4, 1), (-1, 0), (0, 0), (1, 1), (4, 0)]);
        let small = s.local_pattern(s.origin(), 0.5).unwrap();
        assert_eq!(small.0, vec![(0, 0)]);
        assert!(s.local_pattern(s.origin(), 60.0).is_err());
        assert!(s.boundary_collar_count(20.0, 0.0) <= 2);
        assert!(s.boundary_collar_count(20.0, 13.0) <= 28);
    }

    #[test]
    fn schedule() {
        let f = WindowFamily::new(5.0, 3, 2).unwrap();
        assert_eq!(f.samples.len(), 6);
        assert!((f.samples[0].t - 5.0 * 5f64.powf(0.25)).abs() < 1e-12);
        assert!((f.max_t() - 125.0 * 5f64.powf(0.75)).abs() < 1e-9);
    }
}
