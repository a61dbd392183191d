//! Compressed sparse row storage for large kernels.

#[derive(Clone, Debug, PartialEq)]
pub struct SparseRows {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseRows {
    /// Builds from unsorted `(row, col, value)` triplets, summing duplicates
    /// and dropping exact zeros.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut offsets = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            offsets[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut out = SparseRows { offsets, cols, vals };
        out.drop_zeros();
        out
    }

    fn drop_zeros(&mut self) {
        if self.vals.iter().all(|&v| v != 0.0) {
            return;
        }
        let n = self.offsets.len() - 1;
        let mut offsets = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..n {
            for (c, v) in self.row(r) {
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            offsets[r + 1] = cols.len();
        }
        *self = SparseRows { offsets, cols, vals };
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[r]..self.offsets[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.offsets[r]..self.offsets[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `out = A f`
    pub fn mul_vec(&self, f: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.offsets[r]..self.offsets[r + 1];
            *o = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, &v)| v * f[c])
                .sum();
        }
    }

    /// `out = mu A`
    pub fn vec_mul(&self, mu: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (c, v) in self.row(r) {
                out[c] += m * v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let a = SparseRows::from_triplets(
            2,
            vec![(1, 0, 0.25), (0, 1, 1.0), (1, 0, 0.25), (1, 1, 0.5), (0, 0, 0.0)],
        );
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 0), 0.5);
        assert_eq!(a.get(0, 0), 0.0);
        let mut out = [0.0; 2];
        a.mul_vec(&[1.0, 2.0], &mut out);
        assert_eq!(out, [2.0, 1.5]);
        a.vec_mul(&[1.0, 2.0], &mut out);
        assert_eq!(out, [1.0, 2.0]);
    }
}
