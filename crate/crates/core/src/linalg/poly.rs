//! Integer-matrix characteristic polynomials and their roots.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::Matrix;
use crate::number::{q_to_f64, Q};

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<Q>);

impl Poly {
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn trimmed(mut c: Vec<Q>) -> Poly {
        while c.len() > 1 && c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        if c.is_empty() {
            c.push(Q::zero());
        }
        Poly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_c(&self, x: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + q_to_f64(c))
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![Q::zero()]);
        }
        Poly::trimmed(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Q::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    fn monic(&self) -> Poly {
        let lead = self.0.last().cloned().unwrap_or_else(Q::one);
        Poly(self.0.iter().map(|c| c / &lead).collect())
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero());
        let mut rem = self.0.clone();
        let dd = d.degree();
        let lead = d.0[dd].clone();
        if self.degree() < dd || self.is_zero() {
            return (Poly(vec![Q::zero()]), self.clone());
        }
        let mut quot = vec![Q::zero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let coef = &rem[k + dd] / &lead;
            for (i, dc) in d.0.iter().enumerate() {
                rem[k + i] -= &coef * dc;
            }
            quot[k] = coef;
        }
        rem.truncate(dd.max(1));
        (Poly::trimmed(quot), Poly::trimmed(rem))
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free factorization: `self = Π fᵢ^i`, returns `(i, fᵢ)` for nonconstant fᵢ.
    pub fn squarefree(&self) -> Vec<(usize, Poly)> {
        let f = self.monic();
        let df = f.derivative();
        let mut a = f.gcd(&df);
        let mut b = f.div_rem(&a).0;
        let mut c = df.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        let mut i = 1;
        while b.degree() > 0 {
            a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((i, a.clone()));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::trimmed(
            (0..n)
                .map(|i| {
                    self.0.get(i).cloned().unwrap_or_else(Q::zero)
                        - other.0.get(i).cloned().unwrap_or_else(Q::zero)
                })
                .collect(),
        )
    }

    /// Rational roots of a polynomial with rational coefficients (rational root theorem).
    pub fn rational_roots(&self) -> Vec<Q> {
        if self.degree() == 0 {
            return Vec::new();
        }
        // clear denominators to get integer coefficients
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| (c * Q::from_integer(lcm.clone())).to_integer())
            .collect();
        let mut roots = Vec::new();
        let low = ints.iter().position(|c| !c.is_zero()).unwrap_or(0);
        if low > 0 {
            roots.push(Q::zero());
        }
        let ints = &ints[low..];
        if ints.len() <= 1 {
            return roots;
        }
        let a0 = ints[0].abs();
        let an = ints[ints.len() - 1].abs();
        let (Some(a0s), Some(ans)) = (a0.to_u64(), an.to_u64()) else {
            return roots;
        };
        let poly = Poly(ints.iter().map(|c| Q::from_integer(c.clone())).collect());
        for p in divisors(a0s) {
            for qd in divisors(ans) {
                for sign in [1i64, -1] {
                    let cand = Q::new(BigInt::from(p) * sign, BigInt::from(qd));
                    if !roots.contains(&cand) && poly.eval(&cand).is_zero() {
                        roots.push(cand);
                    }
                }
            }
        }
        roots
    }

    /// All complex roots of a square-free polynomial, via companion-matrix
    /// eigenvalues refined by Newton steps.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let p = self.monic();
        let n = p.degree();
        if n == 0 {
            return Vec::new();
        }
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -q_to_f64(&p.0[i]);
        }
        let dp = p.derivative();
        comp.complex_eigenvalues()
            .iter()
            .map(|&z0| {
                let mut z = z0;
                for _ in 0..50 {
                    let d = dp.eval_c(z);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = p.eval_c(z) / d;
                    z -= step;
                    if step.norm() <= 1e-16 * z.norm().max(1.0) {
                        break;
                    }
                }
                z
            })
            .collect()
    }
}

fn divisors(n: u64) -> Vec<u64> {
    if n == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Characteristic polynomial `det(xI − A)` by Faddeev–LeVerrier, exact.
pub fn charpoly(a: &Matrix<Q>) -> Poly {
    let n = a.rows();
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut m = Matrix::<Q>::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = a.mul(&m);
        for i in 0..n {
            let v = next.get(i, i).clone() + coeffs[n - k + 1].clone();
            next.set(i, i, v);
        }
        m = next;
        let am = a.mul(&m);
        coeffs[n - k] = -am.trace() / Q::from_integer(BigInt::from(k));
    }
    Poly(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::qi;

    fn poly(c: &[i64]) -> Poly {
        Poly(c.iter().map(|&x| qi(x)).collect())
    }

    #[test]
    fn charpoly_of_example_matrix() {
        let m = Matrix::from_rows(vec![
            vec![qi(2), qi(2), qi(2)],
            vec![qi(1), qi(0), qi(8)],
            vec![qi(0), qi(1), qi(3)],
        ]);
        // (x-5)(x-2)(x+2) = x^3 - 5x^2 - 4x + 20
        assert_eq!(charpoly(&m), poly(&[20, -4, -5, 1]));
        let mut roots = charpoly(&m).rational_roots();
        roots.sort();
        assert_eq!(roots, vec![qi(-2), qi(2), qi(5)]);
    }

    #[test]
    fn squarefree_splits_multiplicities() {
        // (x-2)^2 (x+1) = x^3 - 3x^2 + 4
        let f = poly(&[4, 0, -3, 1]);
        let sf = f.squarefree();
        assert_eq!(sf, vec![(1, poly(&[1, 1])), (2, poly(&[-2, 1]))]);
    }

    #[test]
    fn complex_roots_of_golden_polynomial() {
        let f = poly(&[-1, -1, 1]);
        let mut roots: Vec<f64> = f.complex_roots().iter().map(|z| z.re).collect();
        roots.sort_by(f64::total_cmp);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((roots[1] - phi).abs() < 1e-14);
        assert!((roots[0] + 1.0 / phi).abs() < 1e-14);
        assert!(f.rational_roots().is_empty());
    }

    #[test]
    fn division() {
        let (q, r) = poly(&[4, 0, -3, 1]).div_rem(&poly(&[-2, 1]));
        assert_eq!(q, poly(&[-2, -1, 1]));
        assert!(r.is_zero());
    }
}
