use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Sums duplicate entries. Entries with the same position are added in
    /// input order, so two transposed-equal triplet streams give bitwise
    /// transposed-equal matrices.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, keeping input order
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..nrows {
            let range = counts[i]..counts[i + 1];
            order.clear();
            order.extend(range);
            order.sort_by_key(|&k| cols[k]);
            for &k in &order {
                let (j, v) = (cols[k], vals[k]);
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let triplets: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                assert_eq!(r.len(), ncols, "ragged dense matrix");
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(move |(j, &v)| (i, j, v))
            })
            .collect();
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::ShapeMismatch {
                op: "spmv",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect())
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows visited in increasing order, so each output row is sorted
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                col_idx[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    /// `alpha * self + other`.
    pub fn scale_add(&self, alpha: f64, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op: "scale_add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for i in 0..self.nrows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                let (j, v) = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                        a.next();
                        b.next();
                        (ja, alpha * va + vb)
                    }
                    (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                        a.next();
                        (ja, alpha * va)
                    }
                    (Some(&(ja, va)), None) => {
                        a.next();
                        (ja, alpha * va)
                    }
                    (_, Some(&(jb, vb))) => {
                        b.next();
                        (jb, vb)
                    }
                };
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn scaled(&self, alpha: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= alpha);
        m
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> Result<f64> {
        let d = other.scale_add(-1.0, self)?;
        Ok(d.values.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Places scaled blocks at `(row_offset, col_offset)` into an
    /// `nrows x ncols` matrix. Overlapping entries are summed.
    pub fn from_blocks(nrows: usize, ncols: usize, blocks: &[(usize, usize, f64, &CsrMatrix)]) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(blocks.iter().map(|b| b.3.nnz()).sum());
        for &(r0, c0, alpha, m) in blocks {
            assert!(r0 + m.nrows <= nrows && c0 + m.ncols <= ncols, "block out of bounds");
            triplets.extend(m.triplets().map(|(i, j, v)| (r0 + i, c0 + j, alpha * v)));
        }
        CsrMatrix::from_triplets(nrows, ncols, &triplets)
    }

    /// MatrixMarket coordinate format (1-based, general real).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for (i, j, v) in self.triplets() {
            let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
        }
        s
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_matrix_market())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_mul(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn random_dense(seed: u64, n: usize) -> Vec<Vec<f64>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.4) {
                            rng.gen_range(-2.0..2.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (1, 1, 4.0)]);
        assert_eq!(m.col_idx(), &[0, 2, 1]);
        assert_eq!(m.values(), &[2.0, 4.0, 4.0]);
        assert_eq!(m.row_ptr(), &[0, 2, 3]);
    }

    #[test]
    fn identity_spmv() {
        let x = vec![1.5, -2.0, 3.25];
        assert_eq!(CsrMatrix::identity(3).spmv(&x).unwrap(), x);
    }

    #[test]
    fn scale_add_zero_alpha_returns_other() {
        let a = CsrMatrix::from_dense(&random_dense(1, 5));
        let b = CsrMatrix::from_dense(&random_dense(2, 5));
        let c = a.scale_add(0.0, &b).unwrap();
        assert_eq!(c.to_dense(), b.to_dense());
    }

    #[test]
    fn random_5x5_against_dense_oracle() {
        let (da, db) = (random_dense(11, 5), random_dense(12, 5));
        let (a, b) = (CsrMatrix::from_dense(&da), CsrMatrix::from_dense(&db));
        let x = [0.5, -1.0, 2.0, 0.25, -0.75];
        let y = a.spmv(&x).unwrap();
        for (u, v) in y.iter().zip(dense_mul(&da, &x)) {
            assert!((u - v).abs() < 1e-14);
        }
        let t = a.transpose().to_dense();
        let c = a.scale_add(-1.5, &b).unwrap().to_dense();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(t[i][j], da[j][i]);
                assert!((c[i][j] - (-1.5 * da[i][j] + db[i][j])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shape_mismatch_reported() {
        let a = CsrMatrix::identity(3);
        let b = CsrMatrix::identity(4);
        assert!(matches!(a.scale_add(1.0, &b), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(a.spmv(&[1.0]), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn matrix_market_header() {
        let mm = CsrMatrix::identity(2).to_matrix_market();
        let mut lines = mm.lines();
        assert_eq!(lines.next(), Some("%%MatrixMarket matrix coordinate real general"));
        assert_eq!(lines.next(), Some("2 2 2"));
        assert_eq!(lines.next(), Some("1 1 1e0"));
    }

    proptest! {
        #[test]
        fn double_transpose_is_identity(
            entries in proptest::collection::vec((0usize..7, 0usize..4, -5.0f64..5.0), 0..30)
        ) {
            let m = CsrMatrix::from_triplets(7, 4, &entries);
            prop_assert_eq!(m.transpose().transpose(), m.clone());
            for i in 0..m.nrows() {
                let cols: Vec<usize> = m.row(i).map(|(j, _)| j).collect();
                prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
