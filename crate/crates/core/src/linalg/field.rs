use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::number::{q_to_f64, Q};

/// Scalars the generic linear algebra runs over: exact rationals, `f64`, `Complex64`.
pub trait Field:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    const EXACT: bool;
    fn from_q(x: &Q) -> Self;
    fn from_i64(x: i64) -> Self;
    fn magnitude(&self) -> f64;
    fn conj(&self) -> Self;
    /// Exact fields test for zero; approximate fields compare the magnitude with `tol`.
    fn negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_exact_zero()
        } else {
            self.magnitude() <= tol
        }
    }
    fn is_exact_zero(&self) -> bool;
}

impl Field for Q {
    const EXACT: bool = true;
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn from_i64(x: i64) -> Self {
        crate::number::qi(x)
    }
    fn magnitude(&self) -> f64 {
        q_to_f64(&self.abs())
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Field for f64 {
    const EXACT: bool = false;
    fn from_q(x: &Q) -> Self {
        q_to_f64(x)
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn conj(&self) -> Self {
        *self
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Field for Complex64 {
    const EXACT: bool = false;
    fn from_q(x: &Q) -> Self {
        Complex64::new(q_to_f64(x), 0.0)
    }
    fn from_i64(x: i64) -> Self {
        Complex64::new(x as f64, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_exact_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}
