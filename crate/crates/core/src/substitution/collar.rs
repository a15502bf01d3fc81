//! Collared substitutions: letters carrying `r` letters of context on each side.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::rule::{check_primitive, AbelianizationMatrix, SubstitutionRule};
use super::words::Language;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::number::Q;

#[derive(Clone, Debug)]
pub struct CollaredRule {
    base: SubstitutionRule,
    radius: usize,
    /// Legal words of length `2r+1`, sorted; the collared alphabet.
    words: Arc<Vec<Vec<u8>>>,
    images: Vec<Vec<usize>>,
    projection: Vec<u8>,
}

impl CollaredRule {
    pub fn new(language: &Language, radius: usize) -> Result<Self> {
        let base = language.rule().clone();
        let words = language.words(2 * radius + 1);
        let mut images = Vec::with_capacity(words.len());
        for w in words.iter() {
            let r = radius;
            let left = base.substitute(&w[..r]);
            let center = base.image(w[r]);
            let full = base.substitute(w);
            let mut img = Vec::with_capacity(center.len());
            for t in 0..center.len() {
                let pos = left.len() + t;
                let ctx = &full[pos - r..=pos + r];
                let id = language.word_id(ctx).ok_or_else(|| {
                    Error::Collar(format!("context {} not in the language", base.decode(ctx)))
                })?;
                img.push(id);
            }
            images.push(img);
        }
        let projection = words.iter().map(|w| w[radius]).collect();
        Ok(CollaredRule {
            base,
            radius,
            words,
            images,
            projection,
        })
    }

    pub fn base(&self) -> &SubstitutionRule {
        &self.base
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    pub fn images(&self) -> &[Vec<usize>] {
        &self.images
    }

    pub fn projection(&self) -> &[u8] {
        &self.projection
    }

    pub fn abelianize(&self) -> AbelianizationMatrix {
        let n = self.size();
        let mut entries = vec![vec![0u64; n]; n];
        for (col, img) in self.images.iter().enumerate() {
            for &x in img {
                entries[x][col] += 1;
            }
        }
        AbelianizationMatrix { entries }
    }

    pub fn is_primitive(&self) -> bool {
        check_primitive(&self.abelianize()).0
    }

    /// Pulls a function on base letters back to collared letters.
    pub fn lift<F: Clone>(&self, v: &[F]) -> Vec<F> {
        self.projection
            .iter()
            .map(|&l| v[l as usize].clone())
            .collect()
    }

    /// Pushes a measure on collared letters forward to base letters.
    pub fn push_forward(&self, v: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.base.size()];
        for (x, &l) in v.iter().zip(&self.projection) {
            out[l as usize] += x;
        }
        out
    }

    /// Coboundary vectors: for each legal `2r`-word `g`, the indicator of
    /// "context ends with g" minus "context starts with g". Their window
    /// sums telescope to boundary terms.
    pub fn coboundaries(&self, language: &Language) -> Vec<Vec<Q>> {
        if self.radius == 0 {
            return Vec::new();
        }
        let r2 = 2 * self.radius;
        let verts = language.words(r2);
        verts
            .iter()
            .map(|g| {
                self.words
                    .iter()
                    .map(|w| {
                        let end = (&w[1..] == g.as_slice()) as i64;
                        let start = (&w[..r2] == g.as_slice()) as i64;
                        Q::from_integer((end - start).into())
                    })
                    .collect()
            })
            .collect()
    }

    /// Right Perron vector of the collared matrix whose push-forward is `base_freq`.
    pub fn frequencies(&self, expansion: &Q, base_freq: &[Q]) -> Result<Vec<Q>> {
        let m = self.abelianize().to_q();
        let ns = m.shift(expansion).nullspace(0.0);
        if ns.len() != 1 {
            return Err(Error::Collar(format!(
                "collared eigenspace has dimension {}",
                ns.len()
            )));
        }
        let v = &ns[0];
        let pushed = self.push_forward(v);
        let scale = &base_freq[0] / &pushed[0];
        Ok(v.iter().map(|x| x * &scale).collect())
    }

    pub fn matrix(&self) -> Matrix<Q> {
        self.abelianize().to_q()
    }

    /// Identity check used in tests: projecting each collared image recovers the base image.
    pub fn projects_to_base(&self) -> bool {
        self.images.iter().zip(self.words.iter()).all(|(img, w)| {
            let proj: Vec<u8> = img.iter().map(|&x| self.projection[x]).collect();
            proj == self.base.image(w[self.radius])
        })
    }
}

/// Sum of entries; handy for normalization checks.
pub fn total(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |a, x| a + x)
}

pub fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Precision;
    use crate::number::{q, qi};
    use crate::substitution::eigen::{spectrum, Eigenvalue};

    fn example() -> SubstitutionRule {
        SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13").unwrap()
    }

    #[test]
    fn radius_zero_is_base() {
        let r = example();
        let lang = Language::new(&r);
        let c = CollaredRule::new(&lang, 0).unwrap();
        assert_eq!(c.size(), 3);
        assert_eq!(c.abelianize(), r.abelianize());
        assert_eq!(c.projection(), &[0, 1, 2]);
        assert!(c.coboundaries(&lang).is_empty());
    }

    #[test]
    fn periodic_radius_one() {
        let z = SubstitutionRule::parse("A -> AA").unwrap();
        let c = CollaredRule::new(&Language::new(&z), 1).unwrap();
        assert_eq!(c.size(), 1);
        assert_eq!(c.abelianize().entries, vec![vec![2]]);
    }

    #[test]
    fn example_radius_one_and_two() {
        let r = example();
        let lang = Language::new(&r);
        for radius in 1..=2 {
            let c = CollaredRule::new(&lang, radius).unwrap();
            assert!(c.projects_to_base());
            assert!(c.is_primitive());
            let spec = spectrum(&c.matrix(), Precision::Exact);
            assert_eq!(spec[0].0, Eigenvalue::Rational(qi(5)));
            let f = c
                .frequencies(&qi(5), &[q(2, 21), q(2, 21), q(1, 21)])
                .unwrap();
            assert_eq!(c.push_forward(&f), vec![q(2, 21), q(2, 21), q(1, 21)]);
            // coboundaries have zero frequency pairing
            for b in c.coboundaries(&lang) {
                let pairing = b.iter().zip(&f).fold(Q::zero(), |a, (x, y)| a + x * y);
                assert!(pairing.is_zero());
            }
        }
    }
}
