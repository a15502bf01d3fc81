use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::eigen::{perron_value, Eigenvalue};
use crate::error::{Error, Result};
use crate::linalg::jordan::RANK_TOL;
use crate::linalg::Matrix;
use crate::number::{parse_q, q_to_f64, Number, Q};

/// A vector that is exact when the data allowed it.
#[derive(Clone, Debug, PartialEq)]
pub enum NumVec {
    Exact(Vec<Q>),
    Approx(Vec<f64>),
}

impl NumVec {
    pub fn len(&self) -> usize {
        match self {
            NumVec::Exact(v) => v.len(),
            NumVec::Approx(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            NumVec::Exact(v) => v.iter().map(q_to_f64).collect(),
            NumVec::Approx(v) => v.clone(),
        }
    }

    pub fn get(&self, i: usize) -> Number {
        match self {
            NumVec::Exact(v) => Number::Exact(v[i].clone()),
            NumVec::Approx(v) => Number::Approx(v[i]),
        }
    }

    pub fn as_exact(&self) -> Option<&[Q]> {
        match self {
            NumVec::Exact(v) => Some(v),
            NumVec::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NumVec::Exact(_))
    }

    pub fn numbers(&self) -> Vec<Number> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

impl Serialize for NumVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.numbers().serialize(s)
    }
}

/// Letter-to-word substitution over a finite alphabet with tile lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionRule {
    alphabet: Vec<char>,
    images: Vec<Vec<u8>>,
    lengths: NumVec,
    lengths_given: bool,
}

/// Letter-count matrix: entry `(L, L′)` counts `L` in the image of `L′`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbelianizationMatrix {
    pub entries: Vec<Vec<u64>>,
}

impl AbelianizationMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row][col]
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_q(&self) -> Matrix<Q> {
        Matrix::from_rows(
            self.entries
                .iter()
                .map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix::from_rows(
            self.entries
                .iter()
                .map(|r| r.iter().map(|&x| x as f64).collect())
                .collect(),
        )
    }
}

impl SubstitutionRule {
    /// Builds a rule from letters and images; `lengths = None` selects the
    /// normalized left Perron eigenvector.
    pub fn new(alphabet: Vec<char>, images: Vec<Vec<u8>>, lengths: Option<Vec<Q>>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::Invalid("empty alphabet".into()));
        }
        if alphabet.len() > u8::MAX as usize {
            return Err(Error::Invalid("alphabet larger than 255 letters".into()));
        }
        if images.len() != alphabet.len() {
            return Err(Error::Invalid("one image per letter required".into()));
        }
        for (l, img) in images.iter().enumerate() {
            if img.is_empty() {
                return Err(Error::EmptyImage(alphabet[l].to_string()));
            }
            if let Some(&bad) = img.iter().find(|&&x| x as usize >= alphabet.len()) {
                return Err(Error::UnknownLetter(format!("#{bad}")));
            }
        }
        let mut rule = SubstitutionRule {
            alphabet,
            images,
            lengths: NumVec::Exact(Vec::new()),
            lengths_given: lengths.is_some(),
        };
        rule.lengths = match lengths {
            Some(given) => rule.validate_lengths(given)?,
            None => rule.default_lengths()?,
        };
        Ok(rule)
    }

    /// Parses the line-oriented rule grammar: `X -> word`, `lengths a b c`,
    /// `#` comments, `;` as an alternative line separator.
    pub fn parse(text: &str) -> Result<Self> {
        let mut alphabet: Vec<char> = Vec::new();
        let mut raw_images: Vec<(usize, char, Vec<char>)> = Vec::new();
        let mut lengths: Option<(usize, Vec<Q>)> = None;
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.split('#').next().unwrap_or("");
            for stmt in line.split(';') {
                let stmt = stmt.trim();
                if stmt.is_empty() {
                    continue;
                }
                if let Some(rest) = stmt.strip_prefix("lengths") {
                    if lengths.is_some() {
                        return Err(Error::Parse {
                            line: lineno,
                            message: "duplicate lengths line".into(),
                        });
                    }
                    let vals = rest
                        .split_whitespace()
                        .map(|tok| {
                            parse_q(tok).ok_or_else(|| Error::Parse {
                                line: lineno,
                                message: format!("bad length '{tok}'"),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    lengths = Some((lineno, vals));
                    continue;
                }
                let Some((lhs, rhs)) = stmt.split_once("->") else {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected 'X -> word', got '{stmt}'"),
                    });
                };
                let lhs = lhs.trim();
                let mut chars = lhs.chars();
                let letter = match (chars.next(), chars.next()) {
                    (Some(c), None) => c,
                    _ => {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("left side must be a single letter, got '{lhs}'"),
                        })
                    }
                };
                let word: Vec<char> = rhs.chars().filter(|c| !c.is_whitespace()).collect();
                if word.is_empty() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("empty image for '{letter}'"),
                    });
                }
                if raw_images.iter().any(|(_, l, _)| *l == letter) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("duplicate rule for '{letter}'"),
                    });
                }
                for c in std::iter::once(letter).chain(word.iter().copied()) {
                    if !alphabet.contains(&c) {
                        alphabet.push(c);
                    }
                }
                raw_images.push((lineno, letter, word));
            }
        }
        if raw_images.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "no rules found".into(),
            });
        }
        let mut images = vec![Vec::new(); alphabet.len()];
        for (_, letter, word) in &raw_images {
            let idx = alphabet.iter().position(|c| c == letter).unwrap();
            images[idx] = word
                .iter()
                .map(|c| alphabet.iter().position(|a| a == c).unwrap() as u8)
                .collect();
        }
        for (l, img) in images.iter().enumerate() {
            if img.is_empty() {
                let line = raw_images
                    .iter()
                    .find(|(_, _, w)| w.contains(&alphabet[l]))
                    .map_or(0, |(n, _, _)| *n);
                return Err(Error::Parse {
                    line,
                    message: Error::UnknownLetter(alphabet[l].to_string()).to_string(),
                });
            }
        }
        let lengths = match lengths {
            Some((line, vals)) => {
                if vals.len() != alphabet.len() {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {} lengths, got {}", alphabet.len(), vals.len()),
                    });
                }
                Some(vals)
            }
            None => None,
        };
        SubstitutionRule::new(alphabet, images, lengths)
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn image(&self, letter: u8) -> &[u8] {
        &self.images[letter as usize]
    }

    pub fn images(&self) -> &[Vec<u8>] {
        &self.images
    }

    pub fn lengths(&self) -> &NumVec {
        &self.lengths
    }

    pub fn lengths_f64(&self) -> Vec<f64> {
        self.lengths.to_f64()
    }

    pub fn lengths_given(&self) -> bool {
        self.lengths_given
    }

    pub fn letter_index(&self, c: char) -> Option<u8> {
        self.alphabet.iter().position(|&a| a == c).map(|i| i as u8)
    }

    pub fn encode(&self, word: &str) -> Result<Vec<u8>> {
        word.chars()
            .map(|c| {
                self.letter_index(c)
                    .ok_or_else(|| Error::UnknownLetter(c.to_string()))
            })
            .collect()
    }

    pub fn decode(&self, word: &[u8]) -> String {
        word.iter().map(|&l| self.alphabet[l as usize]).collect()
    }

    pub fn abelianize(&self) -> AbelianizationMatrix {
        let m = self.size();
        let mut entries = vec![vec![0u64; m]; m];
        for (col, img) in self.images.iter().enumerate() {
            for &l in img {
                entries[l as usize][col] += 1;
            }
        }
        AbelianizationMatrix { entries }
    }

    /// True iff all images share a first letter and share a last letter.
    pub fn is_proper(&self) -> bool {
        let first = self.images[0][0];
        let last = *self.images[0].last().unwrap();
        self.images
            .iter()
            .all(|w| w[0] == first && *w.last().unwrap() == last)
    }

    pub fn substitute(&self, word: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(word.len() * 2);
        for &l in word {
            out.extend_from_slice(&self.images[l as usize]);
        }
        out
    }

    /// Substitutes a word given as text.
    pub fn substitute_str(&self, word: &str) -> Result<String> {
        Ok(self.decode(&self.substitute(&self.encode(word)?)))
    }

    pub fn substitute_n(&self, word: &[u8], n: usize) -> Vec<u8> {
        let mut w = word.to_vec();
        for _ in 0..n {
            w = self.substitute(&w);
        }
        w
    }

    /// Largest and smallest tile lengths.
    pub fn length_bounds(&self) -> (f64, f64) {
        let l = self.lengths_f64();
        (
            l.iter().cloned().fold(f64::INFINITY, f64::min),
            l.iter().cloned().fold(0.0, f64::max),
        )
    }

    fn validate_lengths(&self, given: Vec<Q>) -> Result<NumVec> {
        if given.iter().any(|x| !x.is_positive()) {
            return Err(Error::BadLengths("lengths must be positive".into()));
        }
        let ab = self.abelianize();
        let mq = ab.to_q();
        let image = mq.vec_mul(&given);
        let ratio = &image[0] / &given[0];
        let exact_ok = image.iter().zip(&given).all(|(a, b)| *a == &ratio * b);
        let nu = perron_value(&ab)?;
        if let Eigenvalue::Rational(nu) = &nu {
            if exact_ok && ratio == *nu {
                return Ok(NumVec::Exact(given));
            }
            return Err(Error::BadLengths(format!(
                "lengths·M differs from {}·lengths",
                crate::number::format_q(nu)
            )));
        }
        let nu = nu.re();
        let g: Vec<f64> = given.iter().map(q_to_f64).collect();
        let img: Vec<f64> = ab.to_f64().vec_mul(&g);
        let scale = g.iter().fold(0.0f64, |a, x| a.max(x.abs())) * nu;
        let worst = img
            .iter()
            .zip(&g)
            .map(|(a, b)| (a - nu * b).abs())
            .fold(0.0, f64::max);
        if worst <= 1e-10 * scale {
            Ok(NumVec::Approx(g))
        } else {
            Err(Error::BadLengths(format!(
                "relative residual {:.3e} above 1e-10",
                worst / scale
            )))
        }
    }

    fn default_lengths(&self) -> Result<NumVec> {
        let ab = self.abelianize();
        let nu = perron_value(&ab)?;
        match nu {
            Eigenvalue::Rational(nu) => {
                let mt = ab.to_q().transpose();
                let ns = mt.shift(&nu).nullspace(0.0);
                let v = ns
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::Eigen("no Perron vector".into()))?;
                let min = v
                    .iter()
                    .map(|x| x.abs())
                    .filter(|x| !x.is_zero())
                    .min()
                    .unwrap_or_else(Q::one);
                let sign = if v.iter().any(|x| x.is_negative()) {
                    -Q::one()
                } else {
                    Q::one()
                };
                let v: Vec<Q> = v.iter().map(|x| x * &sign / &min).collect();
                if v.iter().any(|x| !x.is_positive()) {
                    return Err(Error::NotPrimitive);
                }
                Ok(NumVec::Exact(v))
            }
            other => {
                let nu = other.re();
                let mt = ab.to_f64().transpose();
                let shifted = mt.shift(&nu);
                let ns = shifted.nullspace(shifted.rank_tol(RANK_TOL));
                let v = ns
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::Eigen("no Perron vector".into()))?;
                let min = v.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
                let sign = if v.iter().any(|x| *x < 0.0) {
                    -1.0
                } else {
                    1.0
                };
                let v: Vec<f64> = v.iter().map(|x| x * sign / min).collect();
                if v.iter().any(|x| *x <= 0.0) {
                    return Err(Error::NotPrimitive);
                }
                Ok(NumVec::Approx(v))
            }
        }
    }
}

impl fmt::Display for SubstitutionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, img) in self.images.iter().enumerate() {
            writeln!(f, "{} -> {}", self.alphabet[l], self.decode(img))?;
        }
        write!(f, "lengths")?;
        for x in self.lengths.numbers() {
            write!(f, " {x}")?;
        }
        Ok(())
    }
}

/// True iff some power `≤ (m−1)² + 1` of `M` is entrywise positive; returns the
/// smallest such power.
pub fn check_primitive(m: &AbelianizationMatrix) -> (bool, Option<usize>) {
    let n = m.size();
    let base: Vec<Vec<bool>> = m
        .entries
        .iter()
        .map(|r| r.iter().map(|&x| x > 0).collect())
        .collect();
    let mut cur = base.clone();
    let limit = (n - 1) * (n - 1) + 1;
    for p in 1..=limit {
        if cur.iter().all(|r| r.iter().all(|&x| x)) {
            return (true, Some(p));
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if cur[i][k] {
                    for j in 0..n {
                        next[i][j] |= base[k][j];
                    }
                }
            }
        }
        cur = next;
    }
    (false, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{q, qi};

    pub(crate) fn example() -> SubstitutionRule {
        SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13").unwrap()
    }

    #[test]
    fn parse_example_rule() {
        let r = example();
        assert_eq!(r.alphabet(), &['A', 'B', 'C']);
        assert_eq!(r.lengths(), &NumVec::Exact(vec![qi(1), qi(3), qi(13)]));
        assert_eq!(
            r.abelianize().entries,
            vec![vec![2, 2, 2], vec![1, 0, 8], vec![0, 1, 3]]
        );
        assert!(r.is_proper());
        assert_eq!(r.substitute_str("AB").unwrap(), "ABAACA");
        assert_eq!(r.substitute_str("").unwrap(), "");
        assert_eq!(r.substitute_str("C").unwrap(), "ABBCBBCBBCBBA");
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = SubstitutionRule::parse("A -> AB\n# comment\nB -> AX\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                message: "unknown letter 'X'".into()
            }
        );
        assert!(matches!(
            SubstitutionRule::parse("A -> \n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            SubstitutionRule::parse("AB -> A\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 1 1"),
            Err(Error::BadLengths(_))
        ));
    }

    #[test]
    fn default_lengths() {
        let r = SubstitutionRule::parse("A -> AA").unwrap();
        assert_eq!(r.lengths(), &NumVec::Exact(vec![qi(1)]));
        assert!(r.is_proper());
        let fib = SubstitutionRule::parse("A -> AB\nB -> A").unwrap();
        let l = fib.lengths_f64();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((l[0] - phi).abs() < 1e-12 && (l[1] - 1.0).abs() < 1e-12);
        assert!(!fib.is_proper());
        assert_eq!(fib.abelianize().entries, vec![vec![1, 1], vec![1, 0]]);
        let ex = SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA").unwrap();
        assert_eq!(ex.lengths(), &NumVec::Exact(vec![qi(1), qi(3), qi(13)]));
        // scaled exact lengths are accepted
        let half =
            SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1/2 3/2 13/2")
                .unwrap();
        assert_eq!(half.lengths().get(0), Number::Exact(q(1, 2)));
    }

    #[test]
    fn decimal_fibonacci_lengths_within_tolerance() {
        let ok = SubstitutionRule::parse("A -> AB\nB -> A\nlengths 1.6180339887498949 1").unwrap();
        assert!(!ok.lengths().is_exact());
        assert!(SubstitutionRule::parse("A -> AB\nB -> A\nlengths 1.618 1").is_err());
    }

    #[test]
    fn primitivity() {
        assert_eq!(check_primitive(&example().abelianize()), (true, Some(2)));
        let id = AbelianizationMatrix {
            entries: vec![vec![1, 0], vec![0, 1]],
        };
        assert_eq!(check_primitive(&id), (false, None));
        let fib = SubstitutionRule::parse("A -> AB\nB -> A").unwrap();
        assert_eq!(check_primitive(&fib.abelianize()), (true, Some(2)));
    }
}
