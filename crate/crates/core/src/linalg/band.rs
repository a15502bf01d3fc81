//! Symmetric band eigenvalues: Givens band reduction to tridiagonal form,
//! then implicit QL.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest half-bandwidth handled by the band path.
pub const MAX_BAND: usize = 32;

/// Real symmetric band matrix, lower triangle stored with one spare diagonal
/// for the bulge created during reduction.
#[derive(Clone, Debug)]
pub struct SymBand {
    n: usize,
    width: usize,
    stride: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn new(n: usize, width: usize) -> Self {
        let stride = width + 2;
        SymBand {
            n,
            width,
            stride,
            data: vec![0.0; n * stride],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d >= self.stride {
            0.0
        } else {
            self.data[i * self.stride + d]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        assert!(d < self.stride, "entry ({i},{j}) outside band");
        self.data[i * self.stride + d] = v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Applies the similarity `Gᵀ A G` for a rotation in the plane `(p, p+1)`.
    fn rotate(&mut self, p: usize, c: f64, s: f64, reach: usize) {
        let q = p + 1;
        let lo = p.saturating_sub(reach);
        let hi = (q + reach).min(self.n - 1);
        for k in lo..=hi {
            if k == p || k == q {
                continue;
            }
            let apk = self.get(p, k);
            let aqk = self.get(q, k);
            if apk == 0.0 && aqk == 0.0 {
                continue;
            }
            let np = c * apk - s * aqk;
            let nq = s * apk + c * aqk;
            self.set_if_in_band(p, k, np);
            self.set_if_in_band(q, k, nq);
        }
        let app = self.get(p, p);
        let aqq = self.get(q, q);
        let apq = self.get(p, q);
        self.set(p, p, c * c * app - 2.0 * c * s * apq + s * s * aqq);
        self.set(q, q, s * s * app + 2.0 * c * s * apq + c * c * aqq);
        self.set(p, q, c * s * (app - aqq) + (c * c - s * s) * apq);
    }

    fn set_if_in_band(&mut self, i: usize, j: usize, v: f64) {
        let d = i.abs_diff(j);
        if d < self.stride {
            self.set(i, j, v);
        } else {
            debug_assert!(v.abs() < 1e-300, "band overflow at ({i},{j})");
        }
    }

    /// Rotation in plane `(q−1, q)` that zeroes entry `(q, col)`.
    fn annihilate(&mut self, q: usize, col: usize, reach: usize) {
        let p = q - 1;
        let x = self.get(p, col);
        let y = self.get(q, col);
        if y == 0.0 {
            return;
        }
        let r = x.hypot(y);
        let (c, s) = (x / r, -y / r);
        self.rotate(p, c, s, reach);
        self.set(q, col, 0.0);
    }

    /// Reduces to tridiagonal form; returns `(diagonal, off-diagonal)`.
    pub fn tridiagonalize(mut self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut b = self.width;
        while b > 1 {
            for j in 0..n.saturating_sub(b) {
                // remove the outermost entry of column j, then chase the bulge
                let mut row = j + b;
                let mut col = j;
                while row < n {
                    self.annihilate(row, col, b + 1);
                    let next_row = row + b;
                    col = row - 1;
                    if next_row >= n || self.get(next_row, col) == 0.0 {
                        break;
                    }
                    row = next_row;
                }
            }
            b -= 1;
        }
        let d = (0..n).map(|i| self.get(i, i)).collect();
        let e = (1..n).map(|i| self.get(i, i - 1)).collect();
        (d, e)
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(self) -> Result<Vec<f64>> {
        let (d, e) = self.tridiagonalize();
        tridiagonal_eigenvalues(d, e)
    }
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    let mut e = off;
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::Eigen("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues of a dense symmetric matrix, ascending.
pub fn dense_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }

    #[test]
    fn band_matches_dense() {
        let mut seed = 7;
        for &(n, w) in &[(1, 0), (2, 1), (7, 3), (40, 5), (33, 1), (25, 12)] {
            let mut m = SymBand::new(n, w);
            for i in 0..n {
                for j in i.saturating_sub(w)..=i {
                    m.set(i, j, pseudo_random(&mut seed));
                }
            }
            let dense = dense_eigenvalues(m.to_dense());
            let band = m.eigenvalues().unwrap();
            for (a, b) in dense.iter().zip(&band) {
                assert!((a - b).abs() < 1e-10, "n={n} w={w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dirichlet_laplacian_modes() {
        // tridiagonal 1, -1/2 of size 5: eigenvalues 1 - cos(kπ/6)
        let ev = tridiagonal_eigenvalues(vec![1.0; 5], vec![-0.5; 4]).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let expected = 1.0 - ((k + 1) as f64 * std::f64::consts::PI / 6.0).cos();
            assert!((v - expected).abs() < 1e-13);
        }
    }
}
