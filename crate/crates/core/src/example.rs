//! Golden verification of the three-letter example rule
//! `A → ABA, B → ACA, C → ABBCBBCBBCBBA` with lengths `(1, 3, 13)`.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::algebra::{diagonal_class, Kernel};
use crate::error::Result;
use crate::number::{format_q, format_sig, q, q_to_f64, qi, Number, Precision, Q};
use crate::substitution::{perron_data, EigenStructure, Language, NumVec, SubstitutionRule, TraceIndex};

pub const EXAMPLE_RULE: &str = "A -> ABA\nB -> ACA\nC -> ABBCBBCBBCBBA\nlengths 1 3 13\n";

/// Tolerance of the floating-point path.
pub const FLOAT_TOL: f64 = 1e-9;

pub fn example_rule() -> SubstitutionRule {
    SubstitutionRule::parse(EXAMPLE_RULE).expect("embedded rule parses")
}

/// Perturbs one computed constant before comparison; for exercising the harness.
#[derive(Clone, Debug)]
pub struct Fault {
    pub constant: String,
    pub delta: Q,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub constant: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub precision: Precision,
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.checks.iter().map(|c| c.constant.len()).max().unwrap_or(8);
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            write!(f, "{status}  {:<w$}  expected {}  got {}", c.constant, c.expected, c.actual)?;
            if let Some(t) = c.tolerance {
                write!(f, "  (tol {t:e})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Checker<'a> {
    exact: bool,
    fault: Option<&'a Fault>,
    checks: Vec<Check>,
}

impl Checker<'_> {
    fn perturb(&self, name: &str, value: Number) -> Number {
        match self.fault {
            Some(f) if f.constant == name => match value {
                Number::Exact(x) => Number::Exact(x + &f.delta),
                Number::Approx(x) => Number::Approx(x + q_to_f64(&f.delta)),
            },
            _ => value,
        }
    }

    fn scalar(&mut self, name: &str, expected: &Q, actual: Number) {
        let actual = self.perturb(name, actual);
        let (pass, tolerance) = match actual.as_exact() {
            Some(a) if self.exact => (a == expected, None),
            _ => {
                let e = q_to_f64(expected);
                ((actual.to_f64() - e).abs() <= FLOAT_TOL * e.abs().max(1.0), Some(FLOAT_TOL))
            }
        };
        self.checks.push(Check {
            constant: name.to_string(),
            expected: format_q(expected),
            actual: actual.to_string(),
            pass,
            tolerance,
        });
    }

    fn flag(&mut self, name: &str, expected: String, actual: String, pass: bool) {
        let tolerance = (!self.exact).then_some(FLOAT_TOL);
        self.checks.push(Check { constant: name.to_string(), expected, actual, pass, tolerance });
    }
}

fn render(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format_sig(*x)).collect();
    format!("({})", parts.join(", "))
}

/// `s` with `actual = s · reference`, read off the largest reference entry.
fn scale_against(actual: &NumVec, reference: &[i64]) -> Number {
    let k = (0..reference.len()).max_by_key(|&k| reference[k].abs()).unwrap();
    match actual {
        NumVec::Exact(v) => Number::Exact(&v[k] / qi(reference[k])),
        NumVec::Approx(v) => Number::Approx(v[k] / reference[k] as f64),
    }
}

fn times(a: &Number, b: &Number) -> Number {
    match (a.as_exact(), b.as_exact()) {
        (Some(x), Some(y)) => Number::Exact(x * y),
        _ => Number::Approx(a.to_f64() * b.to_f64()),
    }
}

/// Checks every constant of the example. Values from the floating path are
/// converted to the integer-eigenvector scaling before comparison.
pub fn verify_example(precision: Precision, fault: Option<&Fault>) -> Result<Verification> {
    let rule = example_rule();
    let ab = rule.abelianize();
    let eig = EigenStructure::of_abelianization(&ab, precision)?;
    let perron = perron_data(&rule, precision)?;
    let exact = precision == Precision::Exact;
    let mut c = Checker { exact, fault, checks: Vec::new() };

    let values = [qi(5), qi(-2), qi(2)];
    for (i, want) in values.iter().enumerate() {
        let got = eig.groups.get(i).map_or(Number::Approx(f64::NAN), |g| g.value.to_number());
        c.scalar(&format!("eigenvalue_{}", i + 1), want, got);
    }

    let vectors: [[i64; 3]; 3] = [[1, 3, 13], [1, -4, 6], [-1, 0, 2]];
    let mut scales = Vec::new();
    for (i, want) in vectors.iter().enumerate() {
        let name = format!("eigenvector_{}", i + 1);
        let idx = TraceIndex::new(i + 1, 1, 1);
        let Some(b) = eig.basis_vector(idx) else {
            c.flag(&name, render(&want.map(|x| x as f64)), "missing".into(), false);
            scales.push(Number::one());
            continue;
        };
        let s = scale_against(&b.vector, want);
        let got = b.vector.to_f64();
        let pass = match (&b.vector, s.as_exact()) {
            (NumVec::Exact(v), Some(s)) => v.iter().zip(want).all(|(x, &w)| *x == s * qi(w)),
            _ => got.iter().zip(want).all(|(x, &w)| (x - s.to_f64() * w as f64).abs() <= FLOAT_TOL),
        };
        c.flag(&name, format!("multiple of {}", render(&want.map(|x| x as f64))), render(&got), pass);
        scales.push(s);
    }

    // θ M = ν₁ θ
    let theta = [qi(1), qi(3), qi(13)];
    let m = ab.to_q();
    let lengths = rule.lengths();
    let residual = (0..3)
        .map(|col| {
            let lhs = (0..3).fold(Q::zero(), |acc, row| acc + lengths.get(row).as_exact().cloned().unwrap_or_default() * m.get(row, col));
            (lhs - qi(5) * &theta[col]).abs()
        })
        .fold(Q::zero(), |a, b| a.max(b));
    let residual = c.perturb("lengths_left_eigenvector", Number::Exact(residual));
    c.flag(
        "lengths_left_eigenvector",
        "residual 0".into(),
        format!("residual {residual}"),
        residual.is_zero() && lengths.as_exact().is_some_and(|l| l == theta),
    );

    let freqs = [q(2, 21), q(2, 21), q(1, 21)];
    for (l, want) in freqs.iter().enumerate() {
        let name = format!("frequency_{}", rule.alphabet()[l]);
        c.scalar(&name, want, perron.frequencies.get(l));
    }
    c.scalar("density", &q(5, 21), perron.density.clone());

    let table = [[q(2, 21), q(2, 21), q(1, 21)], [q(1, 14), q(-5, 28), q(1, 28)], [q(-5, 6), q(-1, 12), q(1, 12)]];
    let currents = eig.currents()?;
    for (i, row) in table.iter().enumerate() {
        let cur = currents.iter().find(|(idx, _)| *idx == TraceIndex::new(i + 1, 1, 1)).map(|(_, v)| v);
        for (l, want) in row.iter().enumerate() {
            let name = format!("current_{}_{}", i + 1, rule.alphabet()[l]);
            let got = cur.map_or(Number::Approx(f64::NAN), |v| times(&v.get(l), &scales[i]));
            c.scalar(&name, want, got);
        }
    }

    let lang = Arc::new(Language::new(&rule));
    let h0 = Kernel::hamiltonian(&lang, &[q(-5, 21), q(-15, 21), q(-65, 21)]);
    let class = diagonal_class(&h0, &eig)?;
    let taus = [qi(0), q(-1, 14), q(-5, 6)];
    for (i, want) in taus.iter().enumerate() {
        let got = times(&class.tau(TraceIndex::new(i + 1, 1, 1)), &scales[i]);
        c.scalar(&format!("tau_{}_h0", i + 1), want, got);
    }

    Ok(Verification { precision, checks: c.checks })
}
