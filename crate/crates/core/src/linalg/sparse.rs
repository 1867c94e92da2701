use super::{LinalgError, C64};

/// Square sparse operator in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Builds an `n x n` operator from `(row, col, value)` triplets.
    ///
    /// Duplicate positions are rejected. With `symmetric = true` every
    /// off-diagonal entry must appear together with an identical transposed
    /// partner (complex symmetry, not Hermitian).
    pub fn from_triplets(
        n: usize,
        mut entries: Vec<(usize, usize, C64)>,
        symmetric: bool,
    ) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::InvalidArgument("dimension must be positive".into()));
        }
        for &(r, c, v) in &entries {
            if r >= n || c >= n {
                return Err(LinalgError::OutOfRange { row: r, col: c, n });
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(LinalgError::NonFinite);
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(LinalgError::DuplicateEntry { row: w[0].0, col: w[0].1 });
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = entries.iter().map(|e| e.1).collect();
        let vals = entries.iter().map(|e| e.2).collect();
        let op = Self { n, row_ptr, cols, vals, symmetric };
        if symmetric {
            for (r, c, v) in op.entries() {
                if r != c && op.find(c, r) != Some(v) {
                    return Err(LinalgError::NotSymmetric { row: r, col: c });
                }
            }
        }
        Ok(op)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let n = d.len();
        Self {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: d.to_vec(),
            symmetric: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// True when every stored value has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    fn find(&self, r: usize, c: usize) -> Option<C64> {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.cols[lo..hi].binary_search(&c).ok().map(|k| self.vals[lo + k])
    }

    /// Value at `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.find(r, c).unwrap_or_default()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.cols[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::default(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        assert_eq!(y.len(), self.n, "matvec dimension mismatch");
        for (r, out) in y.iter_mut().enumerate() {
            let lo = self.row_ptr[r];
            let hi = self.row_ptr[r + 1];
            let mut acc = C64::default();
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// `A^T x`.
    pub fn matvec_transpose(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        let mut y = vec![C64::default(); self.n];
        for (r, xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    /// Lower and upper bandwidths `(kl, ku)` of the stored pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (r, c, _) in self.entries() {
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        (kl, ku)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `A + s I`.
    pub fn shifted(&self, s: C64) -> Self {
        let mut trip: Vec<(usize, usize, C64)> = self.entries().collect();
        let mut has_diag = vec![false; self.n];
        for t in trip.iter_mut() {
            if t.0 == t.1 {
                t.2 += s;
                has_diag[t.0] = true;
            }
        }
        for (i, present) in has_diag.iter().enumerate() {
            if !present {
                trip.push((i, i, s));
            }
        }
        Self::from_triplets(self.n, trip, self.symmetric).expect("shift preserves validity")
    }

    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut d = vec![vec![C64::default(); self.n]; self.n];
        for (r, c, v) in self.entries() {
            d[r][c] = v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicates_rejected() {
        let e = vec![(0, 0, c(1.0, 0.0)), (0, 0, c(2.0, 0.0))];
        assert_eq!(
            SparseOperator::from_triplets(2, e, false),
            Err(LinalgError::DuplicateEntry { row: 0, col: 0 })
        );
    }

    #[test]
    fn asymmetric_rejected_when_flagged() {
        let e = vec![(0, 1, c(1.0, 1.0)), (1, 0, c(1.0, -1.0))];
        assert!(matches!(
            SparseOperator::from_triplets(2, e.clone(), true),
            Err(LinalgError::NotSymmetric { .. })
        ));
        assert!(SparseOperator::from_triplets(2, e, false).is_ok());
    }

    #[test]
    fn out_of_range_rejected() {
        let e = vec![(0, 3, c(1.0, 0.0))];
        assert!(matches!(
            SparseOperator::from_triplets(3, e, false),
            Err(LinalgError::OutOfRange { .. })
        ));
    }

    #[test]
    fn matvec_and_transpose() {
        let e = vec![(0, 0, c(1.0, 0.0)), (0, 2, c(0.0, 2.0)), (1, 1, c(3.0, 0.0)), (2, 0, c(-1.0, 0.0))];
        let a = SparseOperator::from_triplets(3, e, false).unwrap();
        let x = [c(1.0, 0.0), c(1.0, 1.0), c(2.0, 0.0)];
        assert_eq!(a.matvec(&x), vec![c(1.0, 4.0), c(3.0, 3.0), c(-1.0, 0.0)]);
        assert_eq!(a.matvec_transpose(&x), vec![c(-1.0, 0.0), c(3.0, 3.0), c(0.0, 2.0)]);
        assert_eq!(a.bandwidths(), (2, 2));
        assert!(!a.is_real());
    }

    #[test]
    fn shifted_adds_missing_diagonal() {
        let e = vec![(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))];
        let a = SparseOperator::from_triplets(2, e, true).unwrap().shifted(c(0.0, -1.0));
        assert_eq!(a.get(0, 0), c(0.0, -1.0));
        assert_eq!(a.get(1, 1), c(0.0, -1.0));
        assert_eq!(a.get(0, 1), c(1.0, 0.0));
    }
}
