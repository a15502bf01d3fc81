//! Legal words, seeds and two-sided fixed words.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::rule::SubstitutionRule;
use crate::error::{Error, Result};

/// Legal words of the substitution language, computed on demand per length.
#[derive(Debug)]
pub struct Language {
    rule: SubstitutionRule,
    two_words: Vec<[u8; 2]>,
    cache: Mutex<HashMap<usize, Arc<Vec<Vec<u8>>>>>,
}

impl Language {
    pub fn new(rule: &SubstitutionRule) -> Self {
        let mut set: BTreeSet<[u8; 2]> = BTreeSet::new();
        let mut frontier: Vec<Vec<u8>> = rule.images().to_vec();
        while let Some(w) = frontier.pop() {
            for pair in w.windows(2) {
                let p = [pair[0], pair[1]];
                if set.insert(p) {
                    frontier.push(rule.substitute(&p));
                }
            }
        }
        Language {
            rule: rule.clone(),
            two_words: set.into_iter().collect(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn rule(&self) -> &SubstitutionRule {
        &self.rule
    }

    pub fn two_words(&self) -> &[[u8; 2]] {
        &self.two_words
    }

    pub fn is_legal_pair(&self, a: u8, b: u8) -> bool {
        self.two_words.binary_search(&[a, b]).is_ok()
    }

    /// All legal words of length `n`, sorted.
    pub fn words(&self, n: usize) -> Arc<Vec<Vec<u8>>> {
        if let Some(w) = self.cache.lock().unwrap().get(&n) {
            return w.clone();
        }
        let computed = Arc::new(self.compute(n));
        self.cache.lock().unwrap().insert(n, computed.clone());
        computed
    }

    fn compute(&self, n: usize) -> Vec<Vec<u8>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        if n == 1 {
            let mut letters: BTreeSet<u8> = BTreeSet::new();
            for p in &self.two_words {
                letters.extend(p);
            }
            for img in self.rule.images() {
                letters.extend(img);
            }
            return letters.into_iter().map(|l| vec![l]).collect();
        }
        // every legal n-word sits inside σᵏ(ab) once each supertile has n−1 letters
        let mut words: Vec<Vec<u8>> = self.two_words.iter().map(|p| p.to_vec()).collect();
        let m = self.rule.size();
        let mut singles: Vec<Vec<u8>> = (0..m as u8).map(|l| vec![l]).collect();
        while singles.iter().map(|w| w.len()).min().unwrap_or(0) < n - 1 {
            singles = singles.iter().map(|w| self.rule.substitute(w)).collect();
            words = words.iter().map(|w| self.rule.substitute(w)).collect();
        }
        let mut out: BTreeSet<Vec<u8>> = BTreeSet::new();
        for w in &words {
            for f in w.windows(n) {
                if !out.contains(f) {
                    out.insert(f.to_vec());
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn is_legal(&self, w: &[u8]) -> bool {
        self.words(w.len())
            .binary_search_by(|x| x.as_slice().cmp(w))
            .is_ok()
    }

    /// Position of a legal word in the sorted list of its length.
    pub fn word_id(&self, w: &[u8]) -> Option<usize> {
        self.words(w.len())
            .binary_search_by(|x| x.as_slice().cmp(w))
            .ok()
    }
}

/// How a seed `L⁻.L⁺` is grown into the limit word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedPlan {
    pub seed: (u8, u8),
    /// Letters whose iterates nest: `σᵖ(left)` ends with `left`, `σᵖ(right)` starts with `right`.
    pub nesting: (u8, u8),
    pub power: usize,
}

/// Checks the seed and finds the nesting letters and power used for the limit word.
pub fn plan_seed(rule: &SubstitutionRule, language: &Language, seed: (u8, u8)) -> Result<SeedPlan> {
    let m = rule.size();
    if seed.0 as usize >= m || seed.1 as usize >= m {
        return Err(Error::BadSeed(
            format!("{seed:?}"),
            "letter outside alphabet".into(),
        ));
    }
    let name = format!(
        "{}.{}",
        rule.alphabet()[seed.0 as usize],
        rule.alphabet()[seed.1 as usize]
    );
    if !language.is_legal_pair(seed.0, seed.1) {
        return Err(Error::BadSeed(
            name,
            "the two-letter word does not occur in the language".into(),
        ));
    }
    let (mut left, mut right) = (vec![seed.0], vec![seed.1]);
    for p in 1..=m * m {
        left = rule.substitute(&left);
        right = rule.substitute(&right);
        if left.last() == Some(&seed.0) && right.first() == Some(&seed.1) {
            return Ok(SeedPlan {
                seed,
                nesting: seed,
                power: p,
            });
        }
        // only the boundary letters matter for the nesting test
        left = vec![*left.last().unwrap()];
        right = vec![right[0]];
    }
    if rule.is_proper() {
        let a = rule.images()[0][0];
        let z = *rule.images()[0].last().unwrap();
        return Ok(SeedPlan {
            seed,
            nesting: (z, a),
            power: 1,
        });
    }
    Err(Error::BadSeed(
        name,
        format!("no power up to {} of the substitution nests it", m * m),
    ))
}

/// The literal two-sided word `σⁿ(L⁻).σⁿ(L⁺)`, returned as (left, right).
pub fn generate_fixed_word(
    rule: &SubstitutionRule,
    language: &Language,
    seed: (u8, u8),
    depth: usize,
) -> Result<(Vec<u8>, Vec<u8>)> {
    plan_seed(rule, language, seed)?;
    Ok((
        rule.substitute_n(&[seed.0], depth),
        rule.substitute_n(&[seed.1], depth),
    ))
}

/// Formats a two-sided word with the origin marker.
pub fn format_two_sided(rule: &SubstitutionRule, left: &[u8], right: &[u8]) -> String {
    format!("{}.{}", rule.decode(left), rule.decode(right))
}

/// Prefix of `σ(w)` of at most `limit` letters.
fn substitute_prefix(rule: &SubstitutionRule, w: &[u8], limit: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(limit.min(w.len() * 4));
    for &l in w {
        if out.len() >= limit {
            break;
        }
        out.extend_from_slice(rule.image(l));
    }
    out.truncate(limit);
    out
}

/// Suffix of `σ(w)` of at most `limit` letters, in natural order.
fn substitute_suffix(rule: &SubstitutionRule, w: &[u8], limit: usize) -> Vec<u8> {
    let mut rev = Vec::with_capacity(limit.min(w.len() * 4));
    for &l in w.iter().rev() {
        if rev.len() >= limit {
            break;
        }
        rev.extend(rule.image(l).iter().rev());
    }
    rev.truncate(limit);
    rev.reverse();
    rev
}

/// At least `left_len` letters left of the origin and `right_len` letters right
/// of it of the limit word of the plan.
pub fn limit_word(
    rule: &SubstitutionRule,
    plan: &SeedPlan,
    left_len: usize,
    right_len: usize,
) -> (Vec<u8>, Vec<u8>) {
    let mut left = vec![plan.nesting.0];
    let mut right = vec![plan.nesting.1];
    let mut stalled = 0;
    while left.len() < left_len || right.len() < right_len {
        let (ol, or) = (left.len(), right.len());
        for _ in 0..plan.power {
            left = substitute_suffix(rule, &left, left_len.max(1));
            right = substitute_prefix(rule, &right, right_len.max(1));
        }
        if left.len() == ol && right.len() == or {
            stalled += 1;
            if stalled > 2 {
                break;
            }
        }
    }
    (left, right)
}

/// Smallest period of a word (KMP failure function).
pub fn smallest_period(w: &[u8]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    let mut fail = vec![0usize; n];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && w[i] != w[k] {
            k = fail[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        fail[i] = k;
    }
    n - fail[n - 1]
}

/// True when the depth-8 right fixed word (capped at a million letters) has a
/// period at most half its length.
pub fn looks_periodic(rule: &SubstitutionRule, language: &Language) -> bool {
    let Some(pair) = language.two_words().first().copied() else {
        return true;
    };
    let pair = (pair[0], pair[1]);
    let plan = plan_seed(rule, language, pair).unwrap_or(SeedPlan {
        seed: pair,
        nesting: pair,
        power: 1,
    });
    let target = {
        let mut w = vec![plan.nesting.1];
        for _ in 0..8 {
            w = substitute_prefix(rule, &w, 1_000_000);
        }
        w.len()
    };
    let (_, right) = limit_word(rule, &plan, 0, target);
    smallest_period(&right) * 2 <= right.len()
}
