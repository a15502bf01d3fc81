use num_traits::{Signed, Zero};
use serde::Serialize;

use super::eigen::{perron_value, Eigenvalue};
use super::rule::{check_primitive, NumVec, SubstitutionRule};
use crate::error::{Error, Result};
use crate::linalg::jordan::RANK_TOL;
use crate::number::{q_to_f64, Number, Precision, Q};

/// Expansion, tile lengths, letter frequencies and point density.
#[derive(Clone, Debug, Serialize)]
pub struct PerronData {
    pub expansion: Eigenvalue,
    pub lengths: NumVec,
    /// Points per unit length carrying each label; `Σ f_L θ_L = 1`.
    pub frequencies: NumVec,
    pub density: Number,
}

pub fn perron_data(rule: &SubstitutionRule, precision: Precision) -> Result<PerronData> {
    let ab = rule.abelianize();
    if !check_primitive(&ab).0 {
        return Err(Error::NotPrimitive);
    }
    let nu = perron_value(&ab)?;
    match (&nu, rule.lengths(), precision) {
        (Eigenvalue::Rational(nu_q), NumVec::Exact(theta), Precision::Exact) => {
            let m = ab.to_q();
            let ns = m.shift(nu_q).nullspace(0.0);
            if ns.len() != 1 {
                return Err(Error::Eigen("Perron eigenvalue is not simple".into()));
            }
            let v = &ns[0];
            let norm: Q = v
                .iter()
                .zip(theta)
                .map(|(a, b)| a * b)
                .fold(Q::zero(), |acc, x| acc + x);
            let f: Vec<Q> = v.iter().map(|x| x / &norm).collect();
            if f.iter().any(|x| !x.is_positive()) {
                return Err(Error::NotPrimitive);
            }
            let density = f.iter().fold(Q::zero(), |acc, x| acc + x);
            Ok(PerronData {
                expansion: nu.clone(),
                lengths: NumVec::Exact(theta.clone()),
                frequencies: NumVec::Exact(f),
                density: Number::Exact(density),
            })
        }
        _ => {
            let nu_f = nu.re();
            let m = ab.to_f64();
            let shifted = m.shift(&nu_f);
            let ns = shifted.nullspace(shifted.rank_tol(RANK_TOL));
            if ns.len() != 1 {
                return Err(Error::Eigen("Perron eigenvalue is not simple".into()));
            }
            let theta = rule.lengths_f64();
            let v = &ns[0];
            let norm: f64 = v.iter().zip(&theta).map(|(a, b)| a * b).sum();
            let f: Vec<f64> = v.iter().map(|x| x / norm).collect();
            if f.iter().any(|x| *x <= 0.0) {
                return Err(Error::NotPrimitive);
            }
            let expansion = match nu {
                Eigenvalue::Rational(q) if precision == Precision::Float => {
                    Eigenvalue::Real(q_to_f64(&q))
                }
                other => other,
            };
            Ok(PerronData {
                expansion,
                lengths: NumVec::Approx(theta),
                density: Number::Approx(f.iter().sum()),
                frequencies: NumVec::Approx(f),
            })
        }
    }
}
