//! Generalized eigenspaces and Jordan chains over any [`Field`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::field::Field;
use super::matrix::{span_rank, Matrix};
use crate::error::{Error, Result};
use crate::number::Q;

/// Relative tolerance for rank decisions on floating-point data.
pub const RANK_TOL: f64 = 1e-8;

/// Generalized kernel of `A − ν` together with the largest Jordan height.
pub fn generalized_kernel<F: Field>(a: &Matrix<F>, nu: &F) -> (Vec<Vec<F>>, usize) {
    let b = a.shift(nu);
    let mut power = b.clone();
    let mut prev_dim = 0;
    let mut kernel = Vec::new();
    for k in 1..=a.rows() {
        let tol = power.rank_tol(RANK_TOL);
        let ns = power.nullspace(tol);
        if ns.len() == prev_dim {
            return (kernel, k - 1);
        }
        prev_dim = ns.len();
        kernel = ns;
        power = power.mul(&b);
    }
    let h = if kernel.is_empty() { 0 } else { a.rows() };
    (kernel, h)
}

/// Jordan chains of `A` for eigenvalue `ν`, longest first. Each chain is
/// `[η_1, …, η_h]` with `(A − ν)η_1 = 0` and `(A − ν)η_j = η_{j−1}`.
pub fn jordan_chains<F: Field>(a: &Matrix<F>, nu: &F) -> Result<Vec<Vec<Vec<F>>>> {
    let n = a.rows();
    let b = a.shift(nu);
    // kernels[k] = basis of ker (A-ν)^k, kernels[0] empty
    let mut kernels: Vec<Vec<Vec<F>>> = vec![Vec::new()];
    let mut power = b.clone();
    loop {
        let tol = power.rank_tol(RANK_TOL);
        let ns = power.nullspace(tol);
        if ns.len() == kernels.last().map_or(0, |k| k.len()) {
            break;
        }
        kernels.push(ns);
        if kernels.len() > n + 1 {
            return Err(Error::JordanDetection(
                "kernel chain did not stabilize".into(),
            ));
        }
        power = power.mul(&b);
    }
    let height = kernels.len() - 1;
    if height == 0 {
        return Err(Error::JordanDetection("value is not an eigenvalue".into()));
    }
    let mut tops: Vec<(usize, Vec<F>)> = Vec::new();
    for k in (1..=height).rev() {
        let wanted = kernels[k].len() - kernels[k - 1].len();
        // vectors already forced at level k by longer chains
        let mut level: Vec<Vec<F>> = tops
            .iter()
            .map(|(h, x)| {
                let mut v = x.clone();
                for _ in 0..(h - k) {
                    v = b.mul_vec(&v);
                }
                v
            })
            .collect();
        let mut current: Vec<Vec<F>> = kernels[k - 1].clone();
        current.extend(level.iter().cloned());
        let mut base_rank = span_rank(&current, RANK_TOL);
        if base_rank != current.len() {
            return Err(Error::JordanDetection(format!(
                "chain images dependent at level {k}"
            )));
        }
        for cand in &kernels[k] {
            if level.len() >= wanted {
                break;
            }
            current.push(cand.clone());
            let r = span_rank(&current, RANK_TOL);
            if r > base_rank {
                base_rank = r;
                level.push(cand.clone());
                tops.push((k, cand.clone()));
            } else {
                current.pop();
            }
        }
        if level.len() != wanted {
            return Err(Error::JordanDetection(format!(
                "expected {wanted} blocks of height >= {k}, found {}",
                level.len()
            )));
        }
    }
    let chains = tops
        .into_iter()
        .map(|(h, x)| {
            let mut chain = vec![x];
            for _ in 1..h {
                let next = b.mul_vec(chain.last().unwrap());
                chain.push(next);
            }
            chain.reverse();
            chain
        })
        .collect();
    Ok(chains)
}

/// Scales a rational vector to a primitive integer vector whose last nonzero
/// entry is positive; returns the factor applied.
pub fn primitive_integer_scale(v: &[Q]) -> Q {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = scaled.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return Q::one();
    }
    let last = scaled.iter().rev().find(|x| !x.is_zero()).unwrap();
    let sign = if last.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    Q::new(lcm * sign, g)
}

/// Scale factor giving unit sup-norm with the first non-negligible entry positive.
pub fn unit_sup_scale(v: &[f64]) -> f64 {
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sup == 0.0 {
        return 1.0;
    }
    let first = v
        .iter()
        .find(|x| x.abs() > 1e-9 * sup)
        .copied()
        .unwrap_or(1.0);
    first.signum() / sup
}

pub fn scale_vec<F: Field>(v: &[F], c: &F) -> Vec<F> {
    v.iter().map(|x| x.clone() * c.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{q, qi};

    fn qm(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| qi(x)).collect())
                .collect(),
        )
    }

    fn check_chains(a: &Matrix<Q>, nu: &Q, chains: &[Vec<Vec<Q>>]) {
        for chain in chains {
            for (j, v) in chain.iter().enumerate() {
                let av = a.mul_vec(v);
                for (i, x) in av.iter().enumerate() {
                    let expected = nu * &v[i]
                        + if j > 0 {
                            chain[j - 1][i].clone()
                        } else {
                            Q::zero()
                        };
                    assert_eq!(*x, expected);
                }
            }
        }
    }

    #[test]
    fn single_jordan_block() {
        let a = qm(&[&[2, 0], &[1, 2]]);
        let chains = jordan_chains(&a, &qi(2)).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 2);
        check_chains(&a, &qi(2), &chains);
    }

    #[test]
    fn mixed_blocks() {
        // blocks of size 2 and 1 for eigenvalue 3, plus eigenvalue 1
        let a = qm(&[&[3, 1, 0, 0], &[0, 3, 0, 0], &[0, 0, 3, 0], &[0, 0, 0, 1]]);
        let chains = jordan_chains(&a, &qi(3)).unwrap();
        let mut heights: Vec<usize> = chains.iter().map(|c| c.len()).collect();
        heights.sort();
        assert_eq!(heights, vec![1, 2]);
        check_chains(&a, &qi(3), &chains);
        let (gk, h) = generalized_kernel(&a, &qi(3));
        assert_eq!((gk.len(), h), (3, 2));
    }

    #[test]
    fn float_chain_matches_exact() {
        let a = Matrix::from_rows(vec![vec![2.0, 0.0], vec![1.0, 2.0]]);
        let chains = jordan_chains(&a, &2.0).unwrap();
        assert_eq!(chains[0].len(), 2);
    }

    #[test]
    fn integer_scaling() {
        let v = vec![q(1, 2), qi(0), qi(-1)];
        let c = primitive_integer_scale(&v);
        let s = scale_vec(&v, &c);
        assert_eq!(s, vec![qi(-1), qi(0), qi(2)]);
        assert_eq!(unit_sup_scale(&[-2.0, 4.0]), -0.25);
    }
}
