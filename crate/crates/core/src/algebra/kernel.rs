//! Equivariant finite-range kernels over the substitution language.
//!
//! A kernel assigns to a point `p` and an index offset `j` (the `j`-th point to
//! the right of `p`, or left for negative `j`) a value that depends only on the
//! context word of radius `r` letters centered at `p`. Tables are stored for
//! every legal context word, so the algebra operations are exact and finite.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::number::{q_to_f64, Q};
use crate::substitution::Language;

#[derive(Clone)]
pub struct Kernel {
    language: Arc<Language>,
    radius: usize,
    reach: usize,
    /// `values[context_id][offset + reach]`
    values: Vec<Vec<Q>>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("radius", &self.radius)
            .field("reach", &self.reach)
            .field("contexts", &self.values.len())
            .finish()
    }
}

impl Kernel {
    /// Builds a kernel from a value function on (context word, offset).
    pub fn from_fn(
        language: &Arc<Language>,
        radius: usize,
        reach: usize,
        mut f: impl FnMut(&[u8], i64) -> Q,
    ) -> Self {
        let contexts = language.words(2 * radius + 1);
        let values = contexts
            .iter()
            .map(|ctx| {
                (-(reach as i64)..=reach as i64)
                    .map(|j| f(ctx, j))
                    .collect()
            })
            .collect();
        Kernel {
            language: language.clone(),
            radius,
            reach,
            values,
        }
    }

    pub fn zero(language: &Arc<Language>) -> Self {
        Self::from_fn(language, 0, 0, |_, _| Q::zero())
    }

    pub fn identity(language: &Arc<Language>) -> Self {
        Self::scalar(language, Q::one())
    }

    pub fn scalar(language: &Arc<Language>, c: Q) -> Self {
        Self::from_fn(language, 0, 0, |_, _| c.clone())
    }

    /// `(Δg)_i = (−g_{i−1} + 2g_i − g_{i+1})/2`.
    pub fn laplacian(language: &Arc<Language>) -> Self {
        let half = Q::new(1.into(), 2.into());
        Self::from_fn(language, 0, 1, |_, j| {
            if j == 0 {
                Q::one()
            } else {
                -half.clone()
            }
        })
    }

    /// Multiplication by the indicator of points labeled `letter`.
    pub fn projection(language: &Arc<Language>, letter: u8) -> Self {
        Self::from_fn(language, 0, 0, |ctx, _| {
            if ctx[0] == letter {
                Q::one()
            } else {
                Q::zero()
            }
        })
    }

    /// Diagonal potential with one value per letter.
    pub fn potential(language: &Arc<Language>, per_letter: &[Q]) -> Self {
        Self::from_fn(language, 0, 0, |ctx, _| per_letter[ctx[0] as usize].clone())
    }

    /// `Δ + Σ_L c_L V_L`.
    pub fn hamiltonian(language: &Arc<Language>, per_letter: &[Q]) -> Self {
        Self::laplacian(language).add(&Self::potential(language, per_letter))
    }

    /// Kernel with value 1 from each point to its right neighbor.
    pub fn shift(language: &Arc<Language>) -> Self {
        Self::from_fn(
            language,
            0,
            1,
            |_, j| if j == 1 { Q::one() } else { Q::zero() },
        )
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.language
    }

    /// Context radius in letters.
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Largest index offset with a possibly nonzero value.
    pub fn reach(&self) -> usize {
        self.reach
    }

    /// Geometric range bound: offsets up to `reach` tiles.
    pub fn range(&self) -> f64 {
        self.reach as f64 * self.max_length()
    }

    /// Geometric radius of the pattern the values depend on.
    pub fn equivariance_radius(&self) -> f64 {
        (self.radius as f64 + 1.0) * self.max_length()
    }

    fn max_length(&self) -> f64 {
        self.language
            .rule()
            .lengths_f64()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    pub fn contexts(&self) -> Arc<Vec<Vec<u8>>> {
        self.language.words(2 * self.radius + 1)
    }

    pub fn table(&self) -> &[Vec<Q>] {
        &self.values
    }

    /// Value at offset `j` for a context word of radius at least `self.radius`.
    pub fn value(&self, ctx: &[u8], j: i64) -> Q {
        if j.unsigned_abs() as usize > self.reach {
            return Q::zero();
        }
        let id = self.context_id(ctx).expect("illegal context word");
        self.values[id][(j + self.reach as i64) as usize].clone()
    }

    pub fn value_by_id(&self, id: usize, j: i64) -> &Q {
        &self.values[id][(j + self.reach as i64) as usize]
    }

    /// Id of the centered sub-word of radius `self.radius`.
    pub fn context_id(&self, ctx: &[u8]) -> Option<usize> {
        let c = ctx.len() / 2;
        let sub = &ctx[c - self.radius..=c + self.radius];
        self.language.word_id(sub)
    }

    /// Same kernel tabulated with a larger radius and reach.
    pub fn extend(&self, radius: usize, reach: usize) -> Self {
        assert!(radius >= self.radius && reach >= self.reach);
        if radius == self.radius && reach == self.reach {
            return self.clone();
        }
        Self::from_fn(&self.language, radius, reach, |ctx, j| self.value(ctx, j))
    }

    fn aligned(&self, other: &Kernel) -> (Kernel, Kernel) {
        let r = self.radius.max(other.radius);
        let reach = self.reach.max(other.reach);
        (self.extend(r, reach), other.extend(r, reach))
    }

    pub fn add(&self, other: &Kernel) -> Kernel {
        let (a, b) = self.aligned(other);
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect())
            .collect();
        Kernel { values, ..a }.simplified()
    }

    pub fn sub(&self, other: &Kernel) -> Kernel {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Kernel {
        let values = self
            .values
            .iter()
            .map(|row| row.iter().map(|x| x * c).collect())
            .collect();
        Kernel {
            values,
            ..self.clone()
        }
        .simplified()
    }

    /// `(ab)(p, q) = Σ_x a(p, x) b(x, q)`.
    pub fn convolve(&self, other: &Kernel) -> Kernel {
        let (ra, rb) = (self.radius, other.radius);
        let (da, db) = (self.reach as i64, other.reach as i64);
        let radius = ra.max(self.reach + rb);
        let reach = self.reach + other.reach;
        let c = radius as i64;
        Self::from_fn(&self.language, radius, reach, |ctx, j| {
            let mut acc = Q::zero();
            for i in -da..=da {
                let k = j - i;
                if k.abs() > db {
                    continue;
                }
                let a = self.value(&ctx[(c - ra as i64) as usize..=(c + ra as i64) as usize], i);
                if a.is_zero() {
                    continue;
                }
                let x = c + i;
                let bctx = &ctx[(x - rb as i64) as usize..=(x + rb as i64) as usize];
                let b = other.value(bctx, k);
                if !b.is_zero() {
                    acc += a * b;
                }
            }
            acc
        })
        .simplified()
    }

    /// `a*(p, q) = conj(a(q, p))`; values are real so conjugation is trivial.
    pub fn adjoint(&self) -> Kernel {
        let r = self.radius;
        let radius = r + self.reach;
        let c = radius as i64;
        Self::from_fn(&self.language, radius, self.reach, |ctx, j| {
            let q = c + j;
            self.value(&ctx[(q - r as i64) as usize..=(q + r as i64) as usize], -j)
        })
        .simplified()
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }

    pub fn pow(&self, n: usize) -> Kernel {
        let mut acc = Kernel::identity(&self.language);
        for _ in 0..n {
            acc = acc.convolve(self);
        }
        acc
    }

    /// `φ(a)` for `φ = Σ c_k x^k`.
    pub fn poly(&self, coeffs: &[Q]) -> Kernel {
        // Horner
        let mut acc = Kernel::zero(&self.language);
        for c in coeffs.iter().rev() {
            acc = acc
                .convolve(self)
                .add(&Kernel::scalar(&self.language, c.clone()));
        }
        acc
    }

    /// Diagonal values per context, as a kernel of reach zero.
    pub fn diagonal(&self) -> Kernel {
        Self::from_fn(&self.language, self.radius, 0, |ctx, _| self.value(ctx, 0)).simplified()
    }

    pub fn is_zero(&self) -> bool {
        self.values
            .iter()
            .all(|row| row.iter().all(|x| x.is_zero()))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| q_to_f64(x).abs())
            .fold(0.0, f64::max)
    }

    /// Largest row sum of absolute values (bounds the operator norm with the column analogue).
    pub fn max_row_sum(&self) -> f64 {
        self.values
            .iter()
            .map(|r| r.iter().map(|x| q_to_f64(x).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Drops zero outer offsets and context letters the values do not depend on.
    pub fn simplified(mut self) -> Kernel {
        while self.reach > 0 {
            let last = 2 * self.reach;
            if self
                .values
                .iter()
                .all(|row| row[0].is_zero() && row[last].is_zero())
            {
                for row in &mut self.values {
                    row.pop();
                    row.remove(0);
                }
                self.reach -= 1;
            } else {
                break;
            }
        }
        while self.radius > 0 {
            let r = self.radius - 1;
            let smaller = self.language.words(2 * r + 1);
            let contexts = self.contexts();
            let mut rows: Vec<Option<&Vec<Q>>> = vec![None; smaller.len()];
            let mut consistent = true;
            for (ctx, row) in contexts.iter().zip(&self.values) {
                let id = self
                    .language
                    .word_id(&ctx[1..ctx.len() - 1])
                    .expect("sub-word of legal word");
                match rows[id] {
                    None => rows[id] = Some(row),
                    Some(prev) if prev == row => {}
                    Some(_) => {
                        consistent = false;
                        break;
                    }
                }
            }
            if !consistent {
                break;
            }
            let values = rows
                .into_iter()
                .map(|r| {
                    r.cloned()
                        .unwrap_or_else(|| vec![Q::zero(); 2 * self.reach + 1])
                })
                .collect();
            self.values = values;
            self.radius = r;
        }
        self
    }
}

impl PartialEq for Kernel {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.aligned(other);
        a.values == b.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{q, qi};
    use crate::substitution::SubstitutionRule;

    fn lattice() -> Arc<Language> {
        Arc::new(Language::new(&SubstitutionRule::parse("A -> AA").unwrap()))
    }

    fn example() -> Arc<Language> {
        Arc::new(Language::new(
            &SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13")
                .unwrap(),
        ))
    }

    #[test]
    fn laplacian_squared_on_lattice() {
        let l = lattice();
        let d = Kernel::laplacian(&l);
        let d2 = d.convolve(&d);
        assert_eq!(d2.reach(), 2);
        let ctx = [0u8];
        assert_eq!(d2.value(&ctx, 0), q(3, 2));
        assert_eq!(d2.value(&ctx, 1), qi(-1));
        assert_eq!(d2.value(&ctx, -2), q(1, 4));
        assert_eq!(d.poly(&[qi(0), qi(0), qi(1)]), d2);
        assert_eq!(d.poly(&[qi(1)]), Kernel::identity(&l));
    }

    #[test]
    fn identity_and_projections() {
        let l = example();
        let d = Kernel::laplacian(&l);
        let id = Kernel::identity(&l);
        assert_eq!(id.convolve(&d), d);
        assert_eq!(d.convolve(&id), d);
        let va = Kernel::projection(&l, 0);
        let vb = Kernel::projection(&l, 1);
        assert!(va.convolve(&vb).is_zero());
        assert_eq!(va.convolve(&va), va);
        assert!(d.is_self_adjoint());
    }

    #[test]
    fn shift_adjoint_is_left_shift() {
        let l = example();
        let s = Kernel::shift(&l);
        let sa = s.adjoint();
        assert_eq!(sa.reach(), 1);
        assert_eq!(sa.value(&[0], -1), qi(1));
        assert_eq!(sa.value(&[0], 1), qi(0));
        assert_eq!(sa.adjoint(), s);
        assert!(!s.is_self_adjoint());
    }

    #[test]
    fn context_dependent_products() {
        let l = example();
        let va = Kernel::projection(&l, 0);
        let s = Kernel::shift(&l);
        // V_A S V_A: nonzero from p to p+1 when both are A-labelled
        let k = va.convolve(&s).convolve(&va);
        assert_eq!(k.radius(), 1);
        let rule = l.rule();
        let aa = rule.encode("BAA").unwrap();
        let ab = rule.encode("AAB").unwrap();
        assert_eq!(k.value(&aa, 1), qi(1));
        assert_eq!(k.value(&ab, 1), qi(0));
        assert_eq!(k.value(&rule.encode("ABA").unwrap(), 1), qi(0));
        // adjoint of a product reverses the order
        assert_eq!(k.adjoint(), va.convolve(&s.adjoint()).convolve(&va));
    }

    #[test]
    fn simplify_drops_unused_context() {
        let l = example();
        let d = Kernel::laplacian(&l);
        assert_eq!(d.extend(2, 3).simplified().radius(), 0);
        assert_eq!(d.extend(2, 3).simplified().reach(), 1);
        assert_eq!(d.extend(2, 3), d);
    }
}
