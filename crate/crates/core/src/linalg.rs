//! Banded storage and Cholesky factorization for the P1 stiffness block.

use crate::error::{Error, Result};

/// Square matrix with nonzeros restricted to `|i - j| <= bw`, both halves stored.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (2 * bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        if i.abs_diff(j) > self.bw || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * (2 * self.bw + 1) + j + self.bw - i)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.offset(i, j).map_or(0.0, |o| self.data[o])
    }

    /// Panics if `(i, j)` lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j).expect("entry outside the band");
        self.data[o] += v;
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|x| *x = 0.0);
    }

    pub fn scale(&mut self, t: f64) {
        self.data.iter_mut().for_each(|x| *x *= t);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Lower Cholesky factor `L` with `A = L Lᵀ`, read from the lower half.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        // l[i * w + (j + bw - i)] holds L[i][j] for i - bw <= j <= i
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = self.get(i, j);
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in klo..j {
                    s -= l[ri + k] * l[rj + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Singular(format!("nonpositive pivot {s} at row {i}")));
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + j + self.bw - i]
    }

    /// Solves `L w = b` in place. Leading zeros of `b` are skipped.
    #[allow(clippy::needless_range_loop)]
    pub fn forward_substitute(&self, b: &mut [f64]) {
        let Some(first) = b.iter().position(|&v| v != 0.0) else { return };
        for i in first..self.n {
            let lo = i.saturating_sub(self.bw).max(first);
            let mut s = b[i];
            for k in lo..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }

    /// Solves `Lᵀ x = w` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn backward_substitute(&self, b: &mut [f64]) {
        for i in (0..self.n).rev() {
            b[i] /= self.at(i, i);
            let xi = b[i];
            for k in i.saturating_sub(self.bw)..i {
                b[k] -= self.at(i, k) * xi;
            }
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        self.forward_substitute(b);
        self.backward_substitute(b);
    }
}
