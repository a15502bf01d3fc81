use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use trace_lab_core::algebra::{compile_capped, Kernel};
use trace_lab_core::example::example_rule;
use trace_lab_core::geometry::{DeloneSegment, DEFAULT_PAD};
use trace_lab_core::number::parse_q;
use trace_lab_core::substitution::words::plan_seed;
use trace_lab_core::substitution::{EigenStructure, Language, SubstitutionRule};
use trace_lab_core::{Error, Precision, Q};

use crate::{Common, Failure};

pub struct Setup {
    pub rule: SubstitutionRule,
    pub lang: Arc<Language>,
    pub precision: Precision,
    pub seed: (u8, u8),
}

impl Setup {
    pub fn new(common: &Common) -> Result<Self, Failure> {
        let rule = match &common.rule {
            None => example_rule(),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                SubstitutionRule::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
            }
        };
        let lang = Arc::new(Language::new(&rule));
        let seed = match &common.seed {
            Some(s) => parse_seed(&rule, s)?,
            None => default_seed(&rule, &lang)?,
        };
        let precision = if common.float { Precision::Float } else { Precision::Exact };
        Ok(Setup { rule, lang, precision, seed })
    }

    pub fn eigen(&self) -> Result<EigenStructure, Failure> {
        Ok(EigenStructure::of_abelianization(&self.rule.abelianize(), self.precision)?)
    }

    pub fn expansion(&self) -> Result<f64, Failure> {
        Ok(trace_lab_core::substitution::eigen::perron_value(&self.rule.abelianize())?.re())
    }

    /// Segment covering `[−t, t]` with enough context for `kernel`.
    pub fn segment(&self, t: f64, kernel: Option<&Kernel>) -> Result<DeloneSegment, Failure> {
        let pad = kernel.map_or(DEFAULT_PAD, |k| DEFAULT_PAD.max(k.radius() + k.reach() + 1));
        Ok(DeloneSegment::build_padded(&self.rule, &self.lang, self.seed, t, pad)?)
    }

    pub fn operator(&self, spec: &str, cap: usize) -> Result<Kernel, Failure> {
        let text = match spec.strip_prefix('@') {
            Some(path) => fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?,
            None => spec.to_string(),
        };
        Ok(compile_capped(&text, &self.lang, Some(cap))?)
    }
}

fn parse_seed(rule: &SubstitutionRule, s: &str) -> Result<(u8, u8), Failure> {
    let letters: Vec<&str> = s.split(',').map(str::trim).collect();
    let letter = |name: &str| -> Result<u8, Failure> {
        let mut chars = name.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => rule.letter_index(c).ok_or_else(|| Error::UnknownLetter(name.to_string()).into()),
            _ => Err(Error::UnknownLetter(name.to_string()).into()),
        }
    };
    match letters.as_slice() {
        [l, r] => Ok((letter(l)?, letter(r)?)),
        _ => Err(Failure::Input(format!("seed must be two letters 'L-,L+', got '{s}'"))),
    }
}

/// First legal pair of distinct letters that nests, else the first legal pair that does.
fn default_seed(rule: &SubstitutionRule, lang: &Language) -> Result<(u8, u8), Failure> {
    let pairs = lang.two_words();
    let distinct = pairs.iter().filter(|p| p[0] != p[1]);
    let equal = pairs.iter().filter(|p| p[0] == p[1]);
    distinct
        .chain(equal)
        .map(|p| (p[0], p[1]))
        .find(|&s| plan_seed(rule, lang, s).is_ok())
        .ok_or_else(|| Failure::Input("no admissible seed; pass --seed".into()))
}

pub fn parse_coefficients(s: &str) -> Result<Vec<Q>, Failure> {
    s.split(',')
        .map(|c| parse_q(c.trim()).ok_or_else(|| Failure::Input(format!("bad coefficient '{c}'"))))
        .collect()
}

/// Writes `name` under `out`, or to stdout when no directory is given.
pub fn emit(out: Option<&Path>, name: &str, contents: &[u8]) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
        }
        None => std::io::stdout().write_all(contents)?,
    }
    Ok(())
}

pub fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s.into_bytes()
}
