//! Spectrum and generalized eigenbasis of the transposed substitution matrix.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::rule::{AbelianizationMatrix, NumVec};
use crate::error::{Error, Result};
use crate::linalg::jordan::{jordan_chains, primitive_integer_scale, scale_vec, unit_sup_scale};
use crate::linalg::poly::{charpoly, Poly};
use crate::linalg::{Field, Matrix};
use crate::number::{format_q, format_sig, q_to_f64, Number, Precision, Q};

/// Tolerance for treating floating moduli as tied or as equal to one.
const MODULUS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum Eigenvalue {
    Rational(Q),
    Real(f64),
    /// Representative of a conjugate pair, imaginary part positive.
    Complex(Complex64),
}

impl Eigenvalue {
    pub fn re(&self) -> f64 {
        match self {
            Eigenvalue::Rational(q) => q_to_f64(q),
            Eigenvalue::Real(x) => *x,
            Eigenvalue::Complex(z) => z.re,
        }
    }

    pub fn im(&self) -> f64 {
        match self {
            Eigenvalue::Complex(z) => z.im,
            _ => 0.0,
        }
    }

    pub fn modulus(&self) -> f64 {
        match self {
            Eigenvalue::Rational(q) => q_to_f64(&q.abs()),
            Eigenvalue::Real(x) => x.abs(),
            Eigenvalue::Complex(z) => z.norm(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Eigenvalue::Complex(_))
    }

    pub fn as_rational(&self) -> Option<&Q> {
        match self {
            Eigenvalue::Rational(q) => Some(q),
            _ => None,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re(), self.im())
    }

    pub fn to_number(&self) -> Number {
        match self {
            Eigenvalue::Rational(q) => Number::Exact(q.clone()),
            other => Number::Approx(other.re()),
        }
    }

    /// Modulus compared with one: exact for rationals.
    fn unit_comparison(&self) -> Ordering {
        match self {
            Eigenvalue::Rational(q) => q.abs().cmp(&Q::one()),
            other => {
                let m = other.modulus();
                if (m - 1.0).abs() <= MODULUS_TOL {
                    Ordering::Equal
                } else {
                    m.total_cmp(&1.0)
                }
            }
        }
    }
}

impl fmt::Display for Eigenvalue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eigenvalue::Rational(q) => f.write_str(&format_q(q)),
            Eigenvalue::Real(x) => f.write_str(&format_sig(*x)),
            Eigenvalue::Complex(z) => write!(f, "{}±{}i", format_sig(z.re), format_sig(z.im)),
        }
    }
}

impl Serialize for Eigenvalue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Eigenvalue::Complex(z) => [z.re, z.im].serialize(s),
            other => other.to_number().serialize(s),
        }
    }
}

/// Sort order: modulus descending, then real part ascending, then positive
/// imaginary part first.
fn spectral_order(a: &Eigenvalue, b: &Eigenvalue) -> Ordering {
    let by_modulus = match (a, b) {
        (Eigenvalue::Rational(x), Eigenvalue::Rational(y)) => y.abs().cmp(&x.abs()),
        _ => {
            let (ma, mb) = (a.modulus(), b.modulus());
            if (ma - mb).abs() <= MODULUS_TOL * ma.max(mb).max(1.0) {
                Ordering::Equal
            } else {
                mb.total_cmp(&ma)
            }
        }
    };
    by_modulus
        .then_with(|| match (a, b) {
            (Eigenvalue::Rational(x), Eigenvalue::Rational(y)) => x.cmp(y),
            _ => a.re().total_cmp(&b.re()),
        })
        .then_with(|| b.im().total_cmp(&a.im()))
}

/// Distinct eigenvalues of `M` with algebraic multiplicities, in spectral order.
pub fn spectrum(m: &Matrix<Q>, precision: Precision) -> Vec<(Eigenvalue, usize)> {
    let cp = charpoly(m);
    let mut out = Vec::new();
    for (mult, factor) in cp.squarefree() {
        let mut rest: Poly = factor;
        if precision == Precision::Exact {
            for r in rest.rational_roots() {
                let lin = Poly(vec![-r.clone(), Q::one()]);
                rest = rest.div_rem(&lin).0;
                out.push((Eigenvalue::Rational(r), mult));
            }
        }
        for z in rest.complex_roots() {
            let tol = 1e-9 * z.norm().max(1.0);
            if z.im.abs() <= tol {
                out.push((Eigenvalue::Real(z.re), mult));
            } else if z.im > 0.0 {
                out.push((Eigenvalue::Complex(z), mult));
            }
        }
    }
    out.sort_by(|a, b| spectral_order(&a.0, &b.0));
    out
}

/// Perron eigenvalue: the leading eigenvalue, required to be real and positive.
pub fn perron_value(ab: &AbelianizationMatrix) -> Result<Eigenvalue> {
    let spec = spectrum(&ab.to_q(), Precision::Exact);
    match spec.first() {
        Some((ev, _)) if !ev.is_complex() && ev.re() > 0.0 => Ok(ev.clone()),
        _ => Err(Error::NotPrimitive),
    }
}

/// Position of a basis vector: eigenvalue group `i`, height `j`, block `k` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TraceIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl TraceIndex {
    pub const LEADING: TraceIndex = TraceIndex { i: 1, j: 1, k: 1 };

    pub fn new(i: usize, j: usize, k: usize) -> Self {
        TraceIndex { i, j, k }
    }

    /// Parses `"3,1,1"` or `"(3,1,1)"`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse().ok())
            .collect::<Option<_>>()?;
        match parts.as_slice() {
            [i, j, k] => Some(TraceIndex::new(*i, *j, *k)),
            _ => None,
        }
    }
}

impl fmt::Display for TraceIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    /// `|ν| > 1`
    Strict,
    /// `|ν| = 1`
    Equal,
    Outside,
}

/// Jordan chains of one eigenvalue, in the arithmetic they were computed in.
#[derive(Clone, Debug)]
pub enum Chains {
    Exact(Vec<Vec<Vec<Q>>>),
    Real(Vec<Vec<Vec<f64>>>),
    Complex(Vec<Vec<Vec<Complex64>>>),
}

impl Chains {
    pub fn heights(&self) -> Vec<usize> {
        match self {
            Chains::Exact(c) => c.iter().map(|x| x.len()).collect(),
            Chains::Real(c) => c.iter().map(|x| x.len()).collect(),
            Chains::Complex(c) => c.iter().map(|x| x.len()).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenGroup {
    pub i: usize,
    pub value: Eigenvalue,
    pub multiplicity: usize,
    pub chains: Chains,
    pub exponent: f64,
    pub membership: Membership,
}

/// Real basis vector of the cohomology action with its index.
#[derive(Clone, Debug, Serialize)]
pub struct BasisVector {
    pub index: TraceIndex,
    pub vector: NumVec,
    /// For complex pairs: `"re"` or `"im"` part of the complex chain vector.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<&'static str>,
}

#[derive(Clone, Debug)]
pub struct EigenStructure {
    pub groups: Vec<EigenGroup>,
    pub basis: Vec<BasisVector>,
    pub expansion: Eigenvalue,
    pub exact: bool,
}

impl EigenStructure {
    /// Eigen structure of `Mᵀ` for a substitution matrix `M`.
    pub fn of_abelianization(ab: &AbelianizationMatrix, precision: Precision) -> Result<Self> {
        Self::of_matrix(&ab.to_q(), precision)
    }

    /// Eigen structure of `Mᵀ` for an integer matrix `M`; the expansion is the
    /// leading eigenvalue, which must be real and greater than one.
    pub fn of_matrix(m: &Matrix<Q>, precision: Precision) -> Result<Self> {
        let action = m.transpose();
        let spec = spectrum(m, precision);
        let (expansion, _) = spec
            .first()
            .cloned()
            .ok_or_else(|| Error::Eigen("empty matrix".into()))?;
        if expansion.is_complex() || expansion.re() <= 1.0 {
            return Err(Error::Eigen(format!(
                "leading eigenvalue {expansion} is not a real expansion > 1"
            )));
        }
        let log_expansion = expansion.re().ln();
        let mut groups = Vec::new();
        let mut basis = Vec::new();
        for (gi, (value, mult)) in spec.into_iter().enumerate() {
            let i = gi + 1;
            let chains = match &value {
                Eigenvalue::Rational(nu) => {
                    let mut chains = jordan_chains(&action, nu)?;
                    for chain in &mut chains {
                        let c = primitive_integer_scale(&chain[0]);
                        *chain = chain.iter().map(|v| scale_vec(v, &c)).collect();
                    }
                    Chains::Exact(chains)
                }
                Eigenvalue::Real(nu) => {
                    let a = action.map(q_to_f64);
                    let mut chains = jordan_chains(&a, nu)?;
                    for chain in &mut chains {
                        let c = unit_sup_scale(&chain[0]);
                        *chain = chain.iter().map(|v| scale_vec(v, &c)).collect();
                    }
                    Chains::Real(chains)
                }
                Eigenvalue::Complex(nu) => {
                    let a = action.map(|x| Complex64::new(q_to_f64(x), 0.0));
                    let mut chains = jordan_chains(&a, nu)?;
                    for chain in &mut chains {
                        let pivot = chain[0]
                            .iter()
                            .copied()
                            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
                            .unwrap_or(Complex64::one());
                        let c = Complex64::one() / pivot;
                        *chain = chain.iter().map(|v| scale_vec(v, &c)).collect();
                    }
                    Chains::Complex(chains)
                }
            };
            let found: usize = chains.heights().iter().sum();
            if found != mult {
                return Err(Error::JordanDetection(format!(
                    "eigenvalue {value}: chains span {found} dimensions, multiplicity is {mult}"
                )));
            }
            let modulus = value.modulus();
            let exponent = if modulus == 0.0 {
                f64::NEG_INFINITY
            } else {
                modulus.ln() / log_expansion
            };
            let membership = match value.unit_comparison() {
                Ordering::Greater => Membership::Strict,
                Ordering::Equal => Membership::Equal,
                Ordering::Less => Membership::Outside,
            };
            match &chains {
                Chains::Exact(cs) => {
                    for (k, chain) in cs.iter().enumerate() {
                        for (j, v) in chain.iter().enumerate() {
                            basis.push(BasisVector {
                                index: TraceIndex::new(i, j + 1, k + 1),
                                vector: NumVec::Exact(v.clone()),
                                part: None,
                            });
                        }
                    }
                }
                Chains::Real(cs) => {
                    for (k, chain) in cs.iter().enumerate() {
                        for (j, v) in chain.iter().enumerate() {
                            basis.push(BasisVector {
                                index: TraceIndex::new(i, j + 1, k + 1),
                                vector: NumVec::Approx(v.clone()),
                                part: None,
                            });
                        }
                    }
                }
                Chains::Complex(cs) => {
                    for (k, chain) in cs.iter().enumerate() {
                        for (j, v) in chain.iter().enumerate() {
                            basis.push(BasisVector {
                                index: TraceIndex::new(i, j + 1, 2 * k + 1),
                                vector: NumVec::Approx(v.iter().map(|z| z.re).collect()),
                                part: Some("re"),
                            });
                            basis.push(BasisVector {
                                index: TraceIndex::new(i, j + 1, 2 * k + 2),
                                vector: NumVec::Approx(v.iter().map(|z| z.im).collect()),
                                part: Some("im"),
                            });
                        }
                    }
                }
            }
            groups.push(EigenGroup {
                i,
                value,
                multiplicity: mult,
                chains,
                exponent,
                membership,
            });
        }
        basis.sort_by_key(|b| b.index);
        let exact = groups.iter().all(|g| matches!(g.chains, Chains::Exact(_)));
        Ok(EigenStructure {
            groups,
            basis,
            expansion,
            exact,
        })
    }

    pub fn group(&self, i: usize) -> Option<&EigenGroup> {
        self.groups.get(i.wrapping_sub(1))
    }

    pub fn basis_vector(&self, idx: TraceIndex) -> Option<&BasisVector> {
        self.basis.iter().find(|b| b.index == idx)
    }

    pub fn eigenvalues(&self) -> Vec<&Eigenvalue> {
        self.groups.iter().map(|g| &g.value).collect()
    }

    pub fn contains(&self, idx: TraceIndex) -> bool {
        self.basis_vector(idx).is_some()
    }

    pub fn membership(&self, idx: TraceIndex) -> Membership {
        self.group(idx.i)
            .map_or(Membership::Outside, |g| g.membership)
    }

    pub fn in_expanding_set(&self, idx: TraceIndex) -> bool {
        self.contains(idx) && self.membership(idx) != Membership::Outside
    }

    /// Exponent of `log T` in the growth `L(i,j,T)`.
    pub fn log_power(&self, idx: TraceIndex) -> usize {
        match self.membership(idx) {
            Membership::Strict => idx.j - 1,
            Membership::Equal => idx.j,
            Membership::Outside => 0,
        }
    }

    pub fn exponent(&self, idx: TraceIndex) -> f64 {
        self.group(idx.i).map_or(f64::NEG_INFINITY, |g| g.exponent)
    }

    /// `L(i,j,T)·T^{s_i}`.
    pub fn growth(&self, idx: TraceIndex, t: f64) -> f64 {
        t.ln().powi(self.log_power(idx) as i32) * t.powf(self.exponent(idx))
    }

    /// Compares growth rates: `Less` means `a` grows faster than `b`.
    pub fn growth_order(&self, a: TraceIndex, b: TraceIndex) -> Ordering {
        let (sa, sb) = (self.exponent(a), self.exponent(b));
        if (sa - sb).abs() > 1e-12 {
            return sb.total_cmp(&sa);
        }
        self.log_power(b).cmp(&self.log_power(a))
    }

    /// The rapidly expanding index set in subtraction order: fastest growth
    /// first, ties broken by index.
    pub fn expanding_indices(&self) -> Vec<TraceIndex> {
        let mut idx: Vec<TraceIndex> = self
            .basis
            .iter()
            .map(|b| b.index)
            .filter(|&i| self.in_expanding_set(i))
            .collect();
        idx.sort_by(|&a, &b| self.growth_order(a, b).then(a.cmp(&b)));
        idx
    }

    /// Indices preceding `idx` in subtraction order.
    pub fn lower_indices(&self, idx: TraceIndex) -> Vec<TraceIndex> {
        let all = self.expanding_indices();
        let pos = all.iter().position(|&x| x == idx).unwrap_or(all.len());
        all[..pos].to_vec()
    }

    /// Indices with strictly faster growth than `idx`.
    pub fn strictly_faster(&self, idx: TraceIndex) -> Vec<TraceIndex> {
        self.expanding_indices()
            .into_iter()
            .filter(|&x| self.growth_order(x, idx) == Ordering::Less)
            .collect()
    }

    /// Real coordinates of a vector in the full basis (dual functionals):
    /// rows of the inverse of the basis matrix, one per index.
    pub fn currents(&self) -> Result<Vec<(TraceIndex, NumVec)>> {
        let n = self.basis.len();
        if self.exact {
            let cols: Vec<Vec<Q>> = self
                .basis
                .iter()
                .map(|b| b.vector.as_exact().unwrap().to_vec())
                .collect();
            let v = Matrix::from_columns(&cols, n);
            let inv = v
                .inverse(0.0)
                .ok_or_else(|| Error::Eigen("basis is singular".into()))?;
            Ok(self
                .basis
                .iter()
                .enumerate()
                .map(|(r, b)| (b.index, NumVec::Exact(inv.row(r).to_vec())))
                .collect())
        } else {
            let cols: Vec<Vec<f64>> = self.basis.iter().map(|b| b.vector.to_f64()).collect();
            let v = Matrix::from_columns(&cols, n);
            let inv = v
                .inverse(v.rank_tol(1e-12))
                .ok_or_else(|| Error::Eigen("basis is singular".into()))?;
            Ok(self
                .basis
                .iter()
                .enumerate()
                .map(|(r, b)| (b.index, NumVec::Approx(inv.row(r).to_vec())))
                .collect())
        }
    }

    /// Largest relative residual of the chain law `Mᵀη_j = νη_j + η_{j−1}`
    /// over all chains (zero in exact arithmetic).
    pub fn max_residual(&self, m: &Matrix<Q>) -> f64 {
        let action = m.transpose();
        let mut worst = 0.0f64;
        for g in &self.groups {
            match &g.chains {
                Chains::Exact(cs) => {
                    let nu = g.value.as_rational().unwrap();
                    for chain in cs {
                        for (j, v) in chain.iter().enumerate() {
                            let av = action.mul_vec(v);
                            for (r, x) in av.iter().enumerate() {
                                let mut e = x - nu * &v[r];
                                if j > 0 {
                                    e -= &chain[j - 1][r];
                                }
                                if !e.is_zero() {
                                    worst = f64::INFINITY;
                                }
                            }
                        }
                    }
                }
                Chains::Real(cs) => {
                    let a = action.map(q_to_f64);
                    worst = worst.max(chain_residual(&a, &g.value.re(), cs));
                }
                Chains::Complex(cs) => {
                    let a = action.map(|x| Complex64::new(q_to_f64(x), 0.0));
                    worst = worst.max(chain_residual(&a, &g.value.to_complex(), cs));
                }
            }
        }
        worst
    }
}

fn chain_residual<F: Field>(a: &Matrix<F>, nu: &F, chains: &[Vec<Vec<F>>]) -> f64 {
    let mut worst = 0.0f64;
    for chain in chains {
        for (j, v) in chain.iter().enumerate() {
            let av = a.mul_vec(v);
            let norm = v
                .iter()
                .map(|x| x.magnitude())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            for (r, x) in av.iter().enumerate() {
                let mut e = x.clone() - nu.clone() * v[r].clone();
                if j > 0 {
                    e = e - chain[j - 1][r].clone();
                }
                worst = worst.max(e.magnitude() / norm);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{q, qi};
    use crate::substitution::rule::SubstitutionRule;

    fn example() -> SubstitutionRule {
        SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13").unwrap()
    }

    fn ints(v: &[i64]) -> NumVec {
        NumVec::Exact(v.iter().map(|&x| qi(x)).collect())
    }

    #[test]
    fn example_spectrum_and_vectors() {
        let es =
            EigenStructure::of_abelianization(&example().abelianize(), Precision::Exact).unwrap();
        let values: Vec<_> = es.eigenvalues().into_iter().cloned().collect();
        assert_eq!(
            values,
            vec![
                Eigenvalue::Rational(qi(5)),
                Eigenvalue::Rational(qi(-2)),
                Eigenvalue::Rational(qi(2))
            ]
        );
        assert_eq!(es.basis[0].vector, ints(&[1, 3, 13]));
        assert_eq!(es.basis[1].vector, ints(&[1, -4, 6]));
        assert_eq!(es.basis[2].vector, ints(&[-1, 0, 2]));
        assert_eq!(es.expanding_indices().len(), 3);
        assert!(es.expanding_indices().iter().all(|&i| es.log_power(i) == 0));
        assert!((es.exponent(TraceIndex::new(2, 1, 1)) - 2f64.ln() / 5f64.ln()).abs() < 1e-15);
        let currents = es.currents().unwrap();
        assert_eq!(
            currents[1].1,
            NumVec::Exact(vec![q(1, 14), q(-5, 28), q(1, 28)])
        );
        assert_eq!(
            currents[2].1,
            NumVec::Exact(vec![q(-5, 6), q(-1, 12), q(1, 12)])
        );
        assert_eq!(es.max_residual(&example().abelianize().to_q()), 0.0);
    }

    #[test]
    fn float_mode_matches() {
        let ab = example().abelianize();
        let es = EigenStructure::of_abelianization(&ab, Precision::Float).unwrap();
        assert!(!es.exact);
        let re: Vec<f64> = es.eigenvalues().iter().map(|e| e.re()).collect();
        for (a, b) in re.iter().zip([5.0, -2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(es.max_residual(&ab.to_q()) < 1e-9);
        let v = es.basis[0].vector.to_f64();
        assert!((v[2] - 1.0).abs() < 1e-12 && (v[0] - 1.0 / 13.0).abs() < 1e-12);
    }

    #[test]
    fn fibonacci_has_single_expanding_index() {
        let fib = SubstitutionRule::parse("A -> AB\nB -> A").unwrap();
        let es = EigenStructure::of_abelianization(&fib.abelianize(), Precision::Exact).unwrap();
        assert_eq!(es.expanding_indices(), vec![TraceIndex::LEADING]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((es.expansion.re() - phi).abs() < 1e-14);
        assert!((es.groups[1].value.re() + 1.0 / phi).abs() < 1e-14);
    }

    #[test]
    fn synthetic_jordan_block() {
        let m = Matrix::from_rows(vec![vec![qi(2), qi(1)], vec![qi(0), qi(2)]]);
        let es = EigenStructure::of_matrix(&m, Precision::Exact).unwrap();
        assert_eq!(es.groups.len(), 1);
        assert_eq!(es.groups[0].chains.heights(), vec![2]);
        assert_eq!(es.log_power(TraceIndex::new(1, 2, 1)), 1);
        assert_eq!(es.log_power(TraceIndex::new(1, 1, 1)), 0);
        assert_eq!(es.max_residual(&m), 0.0);
        let esf = EigenStructure::of_matrix(&m, Precision::Float).unwrap();
        assert_eq!(esf.groups[0].chains.heights(), vec![2]);
    }

    #[test]
    fn unit_modulus_and_complex_pairs() {
        // companion of (x-3)(x^2+1): eigenvalues 3, ±i
        let m = Matrix::from_rows(vec![
            vec![qi(0), qi(0), qi(3)],
            vec![qi(1), qi(0), qi(-1)],
            vec![qi(0), qi(1), qi(3)],
        ]);
        let es = EigenStructure::of_matrix(&m, Precision::Exact).unwrap();
        assert_eq!(es.groups.len(), 2);
        assert!(es.groups[1].value.is_complex());
        assert_eq!(es.groups[1].membership, Membership::Equal);
        assert!(es.max_residual(&m) < 1e-9);
        let idx = es.expanding_indices();
        assert_eq!(
            idx,
            vec![
                TraceIndex::new(1, 1, 1),
                TraceIndex::new(2, 1, 1),
                TraceIndex::new(2, 1, 2)
            ]
        );
        assert_eq!(es.log_power(TraceIndex::new(2, 1, 1)), 1);
        assert!(es.currents().is_ok());
    }

    #[test]
    fn index_parsing() {
        assert_eq!(TraceIndex::parse("(3,1,1)"), Some(TraceIndex::new(3, 1, 1)));
        assert_eq!(TraceIndex::parse("2, 1,1"), Some(TraceIndex::new(2, 1, 1)));
        assert_eq!(TraceIndex::parse("2,1"), None);
    }
}
