//! Classes of diagonal functions and their coordinates in the chain basis.
//!
//! A diagonal function on radius-`r` context words pairs with collared letter
//! counts. Its asymptotic window sums are governed by the component in each
//! generalized eigenspace of the collared action; within an eigenspace the
//! lifted base chains are separated from coboundaries (whose window sums stay
//! bounded) and from directions only the collared substitution sees.

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use super::kernel::Kernel;
use crate::error::{Error, Result};
use crate::linalg::jordan::{generalized_kernel, RANK_TOL};
use crate::linalg::matrix::{dot, span_rank, sup_norm};
use crate::linalg::{Field, Matrix};
use crate::number::{Number, Q};
use crate::substitution::eigen::Chains;
use crate::substitution::{CollaredRule, EigenStructure, Language, TraceIndex};

#[derive(Clone, Debug, Serialize)]
pub struct Coefficient {
    pub index: TraceIndex,
    pub value: Number,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassVector {
    pub radius: usize,
    /// One coefficient per basis index of the base action.
    pub coefficients: Vec<Coefficient>,
    /// Sup norm of the component on collared-only directions, per eigenvalue
    /// index, when nonzero.
    pub collared_only: Vec<(usize, f64)>,
    pub exact: bool,
}

impl ClassVector {
    pub fn get(&self, idx: TraceIndex) -> Option<&Number> {
        self.coefficients.iter().find(|c| c.index == idx).map(|c| &c.value)
    }

    /// Coefficient at `idx`, zero when the index is not in the basis.
    pub fn tau(&self, idx: TraceIndex) -> Number {
        self.get(idx).cloned().unwrap_or(if self.exact { Number::Exact(Q::zero()) } else { Number::Approx(0.0) })
    }
}

/// Class of the diagonal of `kernel`.
pub fn diagonal_class(kernel: &Kernel, eig: &EigenStructure) -> Result<ClassVector> {
    let d = kernel.diagonal();
    let values: Vec<Q> = d.table().iter().map(|row| row[0].clone()).collect();
    class_of_function(kernel.language(), d.radius(), &values, eig)
}

/// Class of a function given by its values on the legal `(2r+1)`-words.
pub fn class_of_function(lang: &Language, radius: usize, values: &[Q], eig: &EigenStructure) -> Result<ClassVector> {
    let collared = CollaredRule::new(lang, radius)?;
    if values.len() != collared.size() {
        return Err(Error::Collar(format!("expected {} context values, got {}", collared.size(), values.len())));
    }
    let mr = collared.matrix();
    let cob = collared.coboundaries(lang);
    let mut coefficients = Vec::new();
    let mut collared_only = Vec::new();
    for g in &eig.groups {
        let extra = match &g.chains {
            Chains::Exact(cs) => {
                let nu = g.value.as_rational().expect("exact chains have a rational value").clone();
                let lifted: Vec<Vec<Q>> = cs.iter().flatten().map(|v| collared.lift(v)).collect();
                let (coef, extra) = project(&mr, &nu, &lifted, &cob, values)?;
                let mut it = coef.into_iter();
                for (k, chain) in cs.iter().enumerate() {
                    for j in 0..chain.len() {
                        let value = Number::Exact(it.next().unwrap());
                        coefficients.push(Coefficient { index: TraceIndex::new(g.i, j + 1, k + 1), value });
                    }
                }
                extra
            }
            Chains::Real(cs) => {
                let nu = g.value.re();
                let lifted: Vec<Vec<f64>> = cs.iter().flatten().map(|v| collared.lift(v)).collect();
                let (coef, extra) = project(&mr, &nu, &lifted, &cob, values)?;
                let mut it = coef.into_iter();
                for (k, chain) in cs.iter().enumerate() {
                    for j in 0..chain.len() {
                        let value = Number::Approx(it.next().unwrap());
                        coefficients.push(Coefficient { index: TraceIndex::new(g.i, j + 1, k + 1), value });
                    }
                }
                extra
            }
            Chains::Complex(cs) => {
                let nu = g.value.to_complex();
                let lifted: Vec<Vec<Complex64>> = cs.iter().flatten().map(|v| collared.lift(v)).collect();
                let (coef, extra) = project(&mr, &nu, &lifted, &cob, values)?;
                let mut it = coef.into_iter();
                for (k, chain) in cs.iter().enumerate() {
                    for j in 0..chain.len() {
                        // β η + conj(β η) = 2Re β · Re η − 2Im β · Im η
                        let beta = it.next().unwrap();
                        coefficients.push(Coefficient {
                            index: TraceIndex::new(g.i, j + 1, 2 * k + 1),
                            value: Number::Approx(2.0 * beta.re),
                        });
                        coefficients.push(Coefficient {
                            index: TraceIndex::new(g.i, j + 1, 2 * k + 2),
                            value: Number::Approx(-2.0 * beta.im),
                        });
                    }
                }
                2.0 * extra
            }
        };
        if extra > 0.0 {
            collared_only.push((g.i, extra));
        }
    }
    coefficients.sort_by_key(|c| c.index);
    let exact = coefficients.iter().all(|c| c.value.is_exact());
    Ok(ClassVector { radius, coefficients, collared_only, exact })
}

/// Coordinates of the `ν`-component of `c` on the lifted chains, and the size
/// of its component on collared-only directions.
fn project<F: Field>(mr: &Matrix<Q>, nu: &F, lifted: &[Vec<F>], cob: &[Vec<Q>], c: &[Q]) -> Result<(Vec<F>, f64)> {
    let mr: Matrix<F> = mr.map(|x| F::from_q(x));
    let g = mr.transpose();
    let n = g.rows();
    let (kbasis, _) = generalized_kernel(&g, nu);
    let (ystar, _) = generalized_kernel(&mr, nu);
    if kbasis.len() != ystar.len() || kbasis.len() < lifted.len() {
        return Err(Error::Collar(format!(
            "generalized eigenspace dimensions disagree ({} vs {}, {} lifted)",
            kbasis.len(),
            ystar.len(),
            lifted.len()
        )));
    }
    let cob: Vec<Vec<F>> = cob.iter().map(|v| v.iter().map(F::from_q).collect()).collect();

    let mut x: Vec<Vec<F>> = lifted.to_vec();
    if span_rank(&x, RANK_TOL) != x.len() {
        return Err(Error::Collar("lifted chains are dependent".into()));
    }
    let grow = |x: &mut Vec<Vec<F>>, v: Vec<F>| {
        if x.len() < kbasis.len() {
            x.push(v);
            if span_rank(x, RANK_TOL) < x.len() {
                x.pop();
            }
        }
    };
    for v in coboundaries_in(&cob, &kbasis, n) {
        grow(&mut x, v);
    }
    let extra_start = x.len();
    for v in &kbasis {
        grow(&mut x, v.clone());
    }
    if x.len() != kbasis.len() {
        return Err(Error::Collar("could not complete a basis of the eigenspace".into()));
    }

    let dim = x.len();
    let mut yx = Matrix::<F>::zeros(dim, dim);
    for (r, y) in ystar.iter().enumerate() {
        for (col, xv) in x.iter().enumerate() {
            yx.set(r, col, dot(y, xv));
        }
    }
    let inv = yx
        .inverse(yx.rank_tol(RANK_TOL))
        .ok_or_else(|| Error::Collar("dual pairing on the eigenspace is singular".into()))?;
    let cf: Vec<F> = c.iter().map(F::from_q).collect();
    let yc: Vec<F> = ystar.iter().map(|y| dot(y, &cf)).collect();
    let coef = inv.mul_vec(&yc);

    let mut extra = vec![F::zero(); n];
    for (a, v) in coef[extra_start..].iter().zip(&x[extra_start..]) {
        for (e, vi) in extra.iter_mut().zip(v) {
            *e = e.clone() + a.clone() * vi.clone();
        }
    }
    let scale = sup_norm(&cf).max(1.0);
    let extra_norm = sup_norm(&extra);
    let extra_norm = if F::EXACT || extra_norm > 1e-9 * scale { extra_norm } else { 0.0 };
    Ok((coef[..lifted.len()].to_vec(), extra_norm))
}

/// Spanning set of the intersection of the coboundary span with `kbasis`.
fn coboundaries_in<F: Field>(cob: &[Vec<F>], kbasis: &[Vec<F>], n: usize) -> Vec<Vec<F>> {
    if cob.is_empty() || kbasis.is_empty() {
        return Vec::new();
    }
    let mut cols: Vec<Vec<F>> = cob.to_vec();
    cols.extend(kbasis.iter().map(|v| v.iter().map(|x| -x.clone()).collect()));
    let m = Matrix::from_columns(&cols, n);
    let ns = m.nullspace(m.rank_tol(RANK_TOL));
    ns.into_iter()
        .map(|a| {
            let mut v = vec![F::zero(); n];
            for (ai, b) in a.iter().zip(cob) {
                if ai.is_exact_zero() {
                    continue;
                }
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = vi.clone() + ai.clone() * bi.clone();
                }
            }
            v
        })
        .filter(|v| sup_norm(v) > 0.0)
        .collect()
}

/// Exact coefficient at `idx` of the diagonal class of `kernel`.
pub fn tau(kernel: &Kernel, eig: &EigenStructure, idx: TraceIndex) -> Result<Number> {
    Ok(diagonal_class(kernel, eig)?.tau(idx))
}

/// Coefficient as `f64`.
pub fn tau_f64(kernel: &Kernel, eig: &EigenStructure, idx: TraceIndex) -> Result<f64> {
    Ok(tau(kernel, eig, idx)?.to_f64())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::number::{q, qi, Precision};
    use crate::substitution::SubstitutionRule;

    fn setup() -> (Arc<Language>, EigenStructure) {
        let r = SubstitutionRule::parse("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13").unwrap();
        let eig = EigenStructure::of_abelianization(&r.abelianize(), Precision::Exact).unwrap();
        (Arc::new(Language::new(&r)), eig)
    }

    fn exact(c: &ClassVector, i: usize, j: usize, k: usize) -> Q {
        c.tau(TraceIndex::new(i, j, k)).as_exact().unwrap().clone()
    }

    #[test]
    fn base_potential_matches_currents() {
        let (l, eig) = setup();
        let h0 = Kernel::hamiltonian(&l, &[q(-5, 21), q(-15, 21), q(-65, 21)]);
        let c = diagonal_class(&h0, &eig).unwrap();
        assert_eq!(exact(&c, 1, 1, 1), qi(0));
        assert_eq!(exact(&c, 2, 1, 1), q(-1, 14));
        assert_eq!(exact(&c, 3, 1, 1), q(-5, 6));
        assert!(c.collared_only.is_empty());
        let vb = Kernel::projection(&l, 1);
        assert_eq!(exact(&diagonal_class(&vb, &eig).unwrap(), 2, 1, 1), q(-5, 28));
    }

    #[test]
    fn squared_laplacian_needs_a_collar() {
        let (l, eig) = setup();
        let d2 = Kernel::laplacian(&l).pow(2);
        assert_eq!(d2.radius(), 0);
        let c = diagonal_class(&d2, &eig).unwrap();
        // diagonal is 3/2 everywhere: a multiple of the constant function
        assert_eq!(exact(&c, 1, 1, 1), q(3, 2) * q(5, 21));
        // a genuinely collared diagonal: V_A S V_A S*
        let va = Kernel::projection(&l, 0);
        let s = Kernel::shift(&l);
        let k = va.convolve(&s).convolve(&va).convolve(&s.adjoint());
        assert_eq!(k.radius(), 1);
        let c = diagonal_class(&k, &eig).unwrap();
        assert_eq!(c.radius, 1);
        assert!(c.collared_only.is_empty());
        // the leading coefficient is the frequency of "AA"
        let freq_aa = c.tau(TraceIndex::LEADING).as_exact().unwrap() * &qi(21);
        assert!(freq_aa > qi(0));
    }

    #[test]
    fn coboundaries_have_zero_class() {
        let (l, eig) = setup();
        let lang = &*l;
        let cr = CollaredRule::new(lang, 1).unwrap();
        for b in cr.coboundaries(lang) {
            let c = class_of_function(lang, 1, &b, &eig).unwrap();
            assert!(c.coefficients.iter().all(|x| x.value.is_zero()));
        }
    }

    #[test]
    fn float_mode_agrees() {
        let (l, _) = setup();
        let eig = EigenStructure::of_abelianization(&l.rule().abelianize(), Precision::Float).unwrap();
        let h0 = Kernel::hamiltonian(&l, &[q(-5, 21), q(-15, 21), q(-65, 21)]);
        let c = diagonal_class(&h0, &eig).unwrap();
        let v = c.tau(TraceIndex::new(3, 1, 1)).to_f64();
        // the float vector is a multiple of the exact one (-1, 0, 2)
        let b = eig.basis_vector(TraceIndex::new(3, 1, 1)).unwrap().vector.to_f64();
        let s = b[2] / 2.0;
        assert!((v * s + 5.0 / 6.0).abs() < 1e-9, "{v}");
    }
}
