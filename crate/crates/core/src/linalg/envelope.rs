use crate::error::{Error, Result};

/// Symmetric matrix stored by its lower envelope (profile).
///
/// Row `i` keeps columns `first[i]..=i`. Cholesky fill-in never leaves the
/// envelope, so the factor is stored in place.
#[derive(Debug, Clone)]
pub struct EnvelopeMatrix {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeMatrix {
    /// `first[i]` is the first stored column of row `i` and must not exceed `i`.
    pub fn zeros(first: Vec<usize>) -> Self {
        let mut start = Vec::with_capacity(first.len() + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "envelope start {f} beyond diagonal {i}");
            start.push(total);
            total += i - f + 1;
        }
        start.push(total);
        Self {
            first,
            start,
            data: vec![0.0; total],
        }
    }

    pub fn dense(n: usize) -> Self {
        Self::zeros(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn first(&self, i: usize) -> usize {
        self.first[i]
    }

    pub fn stored_entries(&self) -> usize {
        self.data.len()
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && j >= self.first[i]);
        self.start[i] + j - self.first[i]
    }

    /// Entry `(i, j)` of the symmetric matrix (or of the factor after factoring).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if j < self.first[i] {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds to the lower-triangle entry `(i, j)`, `j <= i`, which must lie in the envelope.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[self.start[i]..self.start[i + 1]]
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.len()).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    /// `L_ij` for `first[i] <= j < i`, given the factored rows above `i`.
    /// Returns the remaining diagonal `a_ii - sum_k L_ik^2`.
    fn eliminate_row(&mut self, i: usize, skip: Option<&[bool]>) -> f64 {
        let fi = self.first[i];
        let si = self.start[i];
        for j in fi..i {
            let fj = self.first[j];
            let sj = self.start[j];
            let k0 = fi.max(fj);
            let mut s = self.data[si + j - fi];
            if skip.is_some_and(|d| d[j]) {
                self.data[si + j - fi] = 0.0;
                continue;
            }
            let (head, tail) = self.data.split_at_mut(si);
            let ri = &tail[k0 - fi..j - fi];
            let rj = &head[sj + k0 - fj..sj + j - fj];
            s -= dot(ri, rj);
            let ljj = head[sj + j - fj];
            tail[j - fi] = s / ljj;
        }
        let row = &self.data[si..si + i - fi];
        self.data[si + i - fi] - dot(row, row)
    }

    /// In-place Cholesky factorization `A = L L^T`.
    pub fn factor(&mut self) -> Result<()> {
        for i in 0..self.len() {
            let d = self.eliminate_row(i, None);
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: i });
            }
            let k = self.idx(i, i);
            self.data[k] = d.sqrt();
        }
        Ok(())
    }

    /// Cholesky factorization that skips rows whose remaining diagonal falls
    /// below `rel_tol` times their original diagonal. Skipped rows are zeroed
    /// in the factor. `on_drop(i, l)` receives the eliminated row
    /// `L_ij, first[i] <= j < i`, and may veto the drop by returning `false`.
    pub fn factor_dropping<F>(&mut self, rel_tol: f64, mut on_drop: F) -> Vec<bool>
    where
        F: FnMut(&Self, usize, &[f64]) -> bool,
    {
        let n = self.len();
        let mut dropped = vec![false; n];
        for i in 0..n {
            let aii = self.get(i, i);
            let d = self.eliminate_row(i, Some(&dropped));
            let k = self.idx(i, i);
            if d <= rel_tol * aii {
                let l = self.row(i)[..i - self.first[i]].to_vec();
                if on_drop(self, i, &l) {
                    dropped[i] = true;
                    let (s, e) = (self.start[i], self.start[i + 1]);
                    self.data[s..e].iter_mut().for_each(|v| *v = 0.0);
                    continue;
                }
            }
            self.data[k] = d.max(f64::MIN_POSITIVE).sqrt();
        }
        dropped
    }

    /// Solves `L^T c = l` over rows `0..l.len()`, where `l` holds the entries
    /// `first..first + l.len()` of a right-hand side that is zero below `first`.
    /// Rows marked in `skip` get `c = 0`.
    pub fn back_substitute(&self, first: usize, l: &[f64], skip: &[bool]) -> Vec<f64> {
        let end = first + l.len();
        let mut r = vec![0.0; end];
        r[first..].copy_from_slice(l);
        let mut c = vec![0.0; end];
        for k in (0..end).rev() {
            if skip[k] {
                continue;
            }
            let ck = r[k] / self.get(k, k);
            c[k] = ck;
            if ck != 0.0 {
                let fk = self.first[k];
                let row = self.row(k);
                for (j, &lkj) in (fk..k).zip(row) {
                    r[j] -= lkj * ck;
                }
            }
        }
        c
    }

    /// Solves `A x = b` in place with a factored matrix.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.len();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let fi = self.first[i];
            let row = self.row(i);
            let s = b[i] - dot(&row[..i - fi], &b[fi..i]);
            b[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = self.row(i);
            let xi = b[i] / row[i - fi];
            b[i] = xi;
            for (bj, &lij) in b[fi..i].iter_mut().zip(row) {
                *bj -= lij * xi;
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}
