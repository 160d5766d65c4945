//! Symmetric positive definite band matrices and their Cholesky factor.

/// Lower band of a symmetric matrix: `band[i][k]` holds entry `(i, i - k)`.
#[derive(Debug, Clone)]
pub struct SymmetricBand {
    n: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl SymmetricBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            band: vec![0.0; n * (bandwidth + 1)],
        }
    }

    #[cfg(test)]
    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        assert!(k <= self.bandwidth, "entry ({i}, {j}) outside band");
        i * (self.bandwidth + 1) + k
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.bandwidth {
            0.0
        } else {
            self.band[self.slot(i, j)]
        }
    }

    /// Add `v` to entries `(i, j)` and `(j, i)` (once on the diagonal).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.band[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let w = self.bandwidth;
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..self.n {
            let row = &self.band[i * (w + 1)..(i + 1) * (w + 1)];
            out[i] += row[0] * x[i];
            for k in 1..=w.min(i) {
                let j = i - k;
                out[i] += row[k] * x[j];
                out[j] += row[k] * x[i];
            }
        }
    }

    /// In-place band Cholesky `A = L L^T`. Returns `None` when a pivot is
    /// not positive.
    pub fn cholesky(mut self) -> Option<BandCholesky> {
        let w = self.bandwidth;
        let stride = w + 1;
        for i in 0..self.n {
            let k_max = w.min(i);
            // Off-diagonal entries of row i, left to right.
            for k in (1..=k_max).rev() {
                let j = i - k;
                let mut s = self.band[i * stride + k];
                // Sum over columns c < j shared by rows i and j.
                let shared = w.min(j).min(w - k);
                for m in 1..=shared {
                    s -= self.band[i * stride + k + m] * self.band[j * stride + m];
                }
                self.band[i * stride + k] = s / self.band[j * stride];
            }
            let mut d = self.band[i * stride];
            for k in 1..=k_max {
                let l = self.band[i * stride + k];
                d -= l * l;
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            self.band[i * stride] = d.sqrt();
        }
        Some(BandCholesky { factor: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    factor: SymmetricBand,
}

impl BandCholesky {
    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let l = &self.factor;
        let w = l.bandwidth;
        let stride = w + 1;
        for i in 0..l.n {
            let mut s = b[i];
            for k in 1..=w.min(i) {
                s -= l.band[i * stride + k] * b[i - k];
            }
            b[i] = s / l.band[i * stride];
        }
        for i in (0..l.n).rev() {
            let mut s = b[i];
            for k in 1..=w.min(l.n - 1 - i) {
                s -= l.band[(i + k) * stride + k] * b[i + k];
            }
            b[i] = s / l.band[i * stride];
        }
    }
}
