//! Operator spec language.
//!
//! ```text
//! # comments
//! table W { ABA 0 1/2 ; ABA 1 -1 }   # context word, offset, value
//! V = proj(A) + 2*proj(B)
//! H = laplacian + (-5/21)*V + custom(W)
//! ```
//!
//! Expressions combine scalars and kernels with `+ - * / ^` and parentheses;
//! `*` between kernels is the convolution product. Builtins: `laplacian`,
//! `identity`/`id`, `zero`, `shift`, `h0`, `proj(L)`, `hamiltonian(c_1,…,c_m)`,
//! `adj(e)`, `poly(e, c0, c1, …)`, `custom(NAME)`. The value of the last
//! statement is the operator.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::kernel::Kernel;
use crate::error::{Error, Result};
use crate::number::{parse_q, Precision, Q};
use crate::substitution::{perron_data, Language, NumVec};

#[derive(Clone, Debug)]
enum Value {
    Scalar(Q),
    Op(Kernel),
}

impl Value {
    fn into_kernel(self, lang: &Arc<Language>) -> Kernel {
        match self {
            Value::Scalar(c) => Kernel::scalar(lang, c),
            Value::Op(k) => k,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Sym(char),
}

fn spec_err(msg: impl Into<String>) -> Error {
    Error::Spec(msg.into())
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(
                parse_q(&text).ok_or_else(|| spec_err(format!("bad number '{text}'")))?,
            ));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),=".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(spec_err(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    env: &'a HashMap<String, Value>,
    tables: &'a HashMap<String, Kernel>,
    lang: &'a Arc<Language>,
    cap: Option<usize>,
}

impl Parser<'_> {
    fn check_degree(&self, degree: usize) -> Result<()> {
        match self.cap {
            Some(cap) if degree > cap => Err(Error::DegreeCap(degree, cap)),
            _ => Ok(()),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(spec_err(format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                acc = self.combine_add(acc, rhs, false);
            } else if self.eat('-') {
                let rhs = self.term()?;
                acc = self.combine_add(acc, rhs, true);
            } else {
                return Ok(acc);
            }
        }
    }

    fn combine_add(&self, a: Value, b: Value, negate: bool) -> Value {
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => {
                Value::Scalar(if negate { x - y } else { x + y })
            }
            (a, b) => {
                let (ka, kb) = (a.into_kernel(self.lang), b.into_kernel(self.lang));
                Value::Op(if negate { ka.sub(&kb) } else { ka.add(&kb) })
            }
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                let rhs = self.power()?;
                acc = match (acc, rhs) {
                    (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
                    (Value::Scalar(x), Value::Op(k)) | (Value::Op(k), Value::Scalar(x)) => {
                        Value::Op(k.scale(&x))
                    }
                    (Value::Op(a), Value::Op(b)) => Value::Op(a.convolve(&b)),
                };
            } else if self.eat('/') {
                let rhs = self.power()?;
                let Value::Scalar(d) = rhs else {
                    return Err(spec_err("division by an operator"));
                };
                if d.is_zero() {
                    return Err(spec_err("division by zero"));
                }
                acc = match acc {
                    Value::Scalar(x) => Value::Scalar(x / d),
                    Value::Op(k) => Value::Op(k.scale(&(Q::one() / d))),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.unary()?;
        if self.eat('^') {
            let Some(Tok::Num(e)) = self.peek().cloned() else {
                return Err(spec_err("exponent must be a nonnegative integer"));
            };
            self.pos += 1;
            if !e.is_integer() || e.is_negative() {
                return Err(spec_err("exponent must be a nonnegative integer"));
            }
            let n: usize = e
                .to_integer()
                .try_into()
                .map_err(|_| spec_err("exponent too large"))?;
            return Ok(match base {
                Value::Scalar(x) => Value::Scalar(num_traits::pow(x, n)),
                Value::Op(k) => {
                    self.check_degree(n)?;
                    Value::Op(k.pow(n))
                }
            });
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Value> {
        if self.eat('-') {
            return Ok(match self.unary()? {
                Value::Scalar(x) => Value::Scalar(-x),
                Value::Op(k) => Value::Op(k.scale(&-Q::one())),
            });
        }
        if self.eat('+') {
            return self.unary();
        }
        self.primary()
    }

    fn args(&mut self) -> Result<Vec<Value>> {
        self.expect('(')?;
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn letter_arg(&mut self) -> Result<u8> {
        self.expect('(')?;
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| spec_err("missing letter"))?;
        self.pos += 1;
        let text = match tok {
            Tok::Ident(s) => s,
            Tok::Num(n) => n.to_string(),
            Tok::Sym(c) => c.to_string(),
        };
        let mut chars = text.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(spec_err(format!("expected a single letter, got '{text}'")));
        };
        let l = self
            .lang
            .rule()
            .letter_index(c)
            .ok_or_else(|| spec_err(format!("unknown letter '{c}'")))?;
        self.expect(')')?;
        Ok(l)
    }

    fn scalar(v: Value, what: &str) -> Result<Q> {
        match v {
            Value::Scalar(x) => Ok(x),
            Value::Op(_) => Err(spec_err(format!("{what} must be a number"))),
        }
    }

    fn primary(&mut self) -> Result<Value> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| spec_err("unexpected end of expression"))?;
        self.pos += 1;
        match tok {
            Tok::Num(x) => Ok(Value::Scalar(x)),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Tok::Sym(c) => Err(spec_err(format!("unexpected '{c}'"))),
            Tok::Ident(name) => self.call(&name),
        }
    }

    fn call(&mut self, name: &str) -> Result<Value> {
        let lang = self.lang;
        match name {
            "laplacian" => Ok(Value::Op(Kernel::laplacian(lang))),
            "identity" | "id" => Ok(Value::Op(Kernel::identity(lang))),
            "zero" => Ok(Value::Op(Kernel::zero(lang))),
            "shift" => Ok(Value::Op(Kernel::shift(lang))),
            "h0" => Ok(Value::Op(h0(lang)?)),
            "proj" => {
                let l = self.letter_arg()?;
                Ok(Value::Op(Kernel::projection(lang, l)))
            }
            "hamiltonian" => {
                let args = self.args()?;
                let m = lang.rule().size();
                if args.len() != m {
                    return Err(spec_err(format!(
                        "hamiltonian expects {m} coefficients, got {}",
                        args.len()
                    )));
                }
                let c = args
                    .into_iter()
                    .map(|a| Self::scalar(a, "coefficient"))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Value::Op(Kernel::hamiltonian(lang, &c)))
            }
            "adj" => {
                let mut args = self.args()?;
                if args.len() != 1 {
                    return Err(spec_err("adj expects one argument"));
                }
                Ok(match args.pop().unwrap() {
                    Value::Scalar(x) => Value::Scalar(x),
                    Value::Op(k) => Value::Op(k.adjoint()),
                })
            }
            "poly" => {
                let mut args = self.args()?.into_iter();
                let base = args
                    .next()
                    .ok_or_else(|| spec_err("poly expects an operator"))?
                    .into_kernel(lang);
                let coeffs = args
                    .map(|a| Self::scalar(a, "coefficient"))
                    .collect::<Result<Vec<_>>>()?;
                self.check_degree(coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0))?;
                Ok(Value::Op(base.poly(&coeffs)))
            }
            "custom" => {
                self.expect('(')?;
                let Some(Tok::Ident(t)) = self.peek().cloned() else {
                    return Err(spec_err("custom expects a table name"));
                };
                self.pos += 1;
                self.expect(')')?;
                let k = self
                    .tables
                    .get(&t)
                    .ok_or_else(|| spec_err(format!("unknown table '{t}'")))?;
                Ok(Value::Op(k.clone()))
            }
            other => self
                .env
                .get(other)
                .cloned()
                .ok_or_else(|| spec_err(format!("unknown name '{other}'"))),
        }
    }
}

/// `Δ − density·Σ_L θ_L V_L`: the Laplacian shifted by a potential whose
/// class is the density multiple of the length vector.
pub fn h0(lang: &Arc<Language>) -> Result<Kernel> {
    let p = perron_data(lang.rule(), Precision::Exact)?;
    let (NumVec::Exact(theta), Some(density)) = (&p.lengths, p.density.as_exact()) else {
        return Err(spec_err("h0 requires rational lengths and frequencies"));
    };
    let pot: Vec<Q> = theta.iter().map(|t| -(t * density)).collect();
    Ok(Kernel::hamiltonian(lang, &pot))
}

/// Splits statements on newlines and `;`, keeping `table { … }` blocks intact.
fn statements(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for c in line.chars() {
            match c {
                '{' => {
                    depth += 1;
                    cur.push(c);
                }
                '}' => {
                    depth -= 1;
                    cur.push(c);
                }
                ';' if depth == 0 => out.push(std::mem::take(&mut cur)),
                ';' => cur.push('\n'),
                _ => cur.push(c),
            }
        }
        if depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push('\n');
        }
    }
    out.push(cur);
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_table(body: &str, lang: &Arc<Language>) -> Result<Kernel> {
    let rule = lang.rule();
    let mut rows: Vec<(Vec<u8>, i64, Q)> = Vec::new();
    for line in body.lines() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.is_empty() {
            continue;
        }
        let [word, offset, value] = parts.as_slice() else {
            return Err(spec_err(format!(
                "table row must be 'context offset value', got '{}'",
                line.trim()
            )));
        };
        let ctx = rule.encode(word).map_err(|e| spec_err(e.to_string()))?;
        if ctx.len() % 2 == 0 {
            return Err(spec_err(format!("context '{word}' must have odd length")));
        }
        if !lang.is_legal(&ctx) {
            return Err(spec_err(format!(
                "context '{word}' does not occur in the language"
            )));
        }
        let off: i64 = offset
            .parse()
            .map_err(|_| spec_err(format!("bad offset '{offset}'")))?;
        let val = parse_q(value).ok_or_else(|| spec_err(format!("bad value '{value}'")))?;
        rows.push((ctx, off, val));
    }
    let Some(len) = rows.first().map(|r| r.0.len()) else {
        return Ok(Kernel::zero(lang));
    };
    if rows.iter().any(|r| r.0.len() != len) {
        return Err(spec_err(
            "all contexts of a table must have the same length",
        ));
    }
    let radius = len / 2;
    let reach = rows
        .iter()
        .map(|r| r.1.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let mut map: HashMap<(Vec<u8>, i64), Q> = HashMap::new();
    for (ctx, off, val) in rows {
        map.insert((ctx, off), val);
    }
    Ok(Kernel::from_fn(lang, radius, reach, |ctx, j| {
        map.get(&(ctx.to_vec(), j)).cloned().unwrap_or_else(Q::zero)
    })
    .simplified())
}

/// Compiles an operator spec into a kernel.
pub fn compile(text: &str, lang: &Arc<Language>) -> Result<Kernel> {
    compile_capped(text, lang, None)
}

/// As [`compile`], rejecting operator powers and `poly` degrees above `cap`.
pub fn compile_capped(text: &str, lang: &Arc<Language>, cap: Option<usize>) -> Result<Kernel> {
    let mut env: HashMap<String, Value> = HashMap::new();
    let mut tables: HashMap<String, Kernel> = HashMap::new();
    let mut last: Option<Value> = None;
    for stmt in statements(text) {
        if let Some(rest) = stmt.strip_prefix("table") {
            if rest.starts_with(|c: char| c.is_whitespace()) {
                let (head, body) = rest
                    .split_once('{')
                    .ok_or_else(|| spec_err("table needs '{'"))?;
                let body = body
                    .trim_end()
                    .strip_suffix('}')
                    .ok_or_else(|| spec_err("table needs '}'"))?;
                let name = head.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(spec_err(format!("bad table name '{name}'")));
                }
                tables.insert(name.to_string(), parse_table(body, lang)?);
                continue;
            }
        }
        let (target, expr) = match stmt.split_once('=') {
            Some((lhs, rhs)) if lhs.trim().chars().all(|c| c.is_alphanumeric() || c == '_') => {
                (Some(lhs.trim().to_string()), rhs.to_string())
            }
            _ => (None, stmt.clone()),
        };
        let toks = tokenize(&expr)?;
        let mut p = Parser {
            toks,
            pos: 0,
            env: &env,
            tables: &tables,
            lang,
            cap,
        };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(spec_err(format!("trailing input in '{}'", expr.trim())));
        }
        if let Some(name) = target {
            env.insert(name, v.clone());
        }
        last = Some(v);
    }
    let v = last.ok_or_else(|| spec_err("empty operator spec"))?;
    Ok(v.into_kernel(lang))
}
