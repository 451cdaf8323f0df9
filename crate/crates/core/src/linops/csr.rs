use crate::error::{Error, Result};
use crate::linops::SymmetricOperator;

/// Compressed sparse row matrix with a precomputed explicit transpose,
/// so both A x and A' y run as transpose-free row-major products with a
/// fixed per-row accumulation order.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    // transpose stored in the same layout: ncols rows over nrows columns
    t_row_offsets: Vec<usize>,
    t_col_indices: Vec<usize>,
    t_values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from raw CSR arrays; validates structure and constructs the
    /// transpose once. Column indices must be strictly increasing within
    /// each row (duplicates rejected).
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidCsr(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidCsr("row_offsets[0] must be 0".into()));
        }
        let nnz = *row_offsets.last().unwrap();
        if col_indices.len() != nnz || values.len() != nnz {
            return Err(Error::InvalidCsr(format!(
                "nnz {} disagrees with col_indices ({}) or values ({})",
                nnz,
                col_indices.len(),
                values.len()
            )));
        }
        for w in row_offsets.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidCsr("row_offsets not monotone".into()));
            }
        }
        for r in 0..nrows {
            let row = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            for w in row.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::InvalidCsr(format!(
                        "row {} columns not strictly increasing",
                        r
                    )));
                }
            }
            if let Some(&c) = row.last() {
                if c >= ncols {
                    return Err(Error::InvalidCsr(format!(
                        "row {} column index {} out of range [0, {})",
                        r, c, ncols
                    )));
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("CSR values".into()));
        }

        // Build the explicit transpose by counting sort over columns.
        let mut t_row_offsets = vec![0usize; ncols + 1];
        for &c in &col_indices {
            t_row_offsets[c + 1] += 1;
        }
        for c in 0..ncols {
            t_row_offsets[c + 1] += t_row_offsets[c];
        }
        let mut t_col_indices = vec![0usize; nnz];
        let mut t_values = vec![0.0; nnz];
        let mut cursor = t_row_offsets.clone();
        for r in 0..nrows {
            for k in row_offsets[r]..row_offsets[r + 1] {
                let c = col_indices[k];
                let dst = cursor[c];
                t_col_indices[dst] = r;
                t_values[dst] = values[k];
                cursor[c] += 1;
            }
        }

        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
            t_row_offsets,
            t_col_indices,
            t_values,
        })
    }

    /// Zero-row matrix with `ncols` columns (problems without linear
    /// constraints).
    pub fn empty(ncols: usize) -> Self {
        Self::new(0, ncols, vec![0], vec![], vec![]).unwrap()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries of row j of the stored transpose, i.e. column j of A.
    pub fn column_entries(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.t_row_offsets[j];
        let hi = self.t_row_offsets[j + 1];
        self.t_col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.t_values[lo..hi].iter().copied())
    }

    /// y = A x, fixed per-row left-to-right reduction.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "csr_apply: x length");
        assert_eq!(y.len(), self.nrows, "csr_apply: y length");
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            y[r] = acc;
        }
    }

    /// y = A' x via the stored transpose (no scatter).
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows, "csr_apply_transpose: x length");
        assert_eq!(y.len(), self.ncols, "csr_apply_transpose: y length");
        for r in 0..self.ncols {
            let mut acc = 0.0;
            for k in self.t_row_offsets[r]..self.t_row_offsets[r + 1] {
                acc += self.t_values[k] * x[self.t_col_indices[k]];
            }
            y[r] = acc;
        }
    }

    /// Diagonal entry (r, r), zero when absent. Requires a square matrix.
    pub fn diagonal_entries(&self) -> Vec<f64> {
        assert_eq!(self.nrows, self.ncols);
        let mut d = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                if self.col_indices[k] == r {
                    d[r] = self.values[k];
                }
            }
        }
        d
    }

    /// Exact structural and value equality with the stored transpose,
    /// i.e. the matrix is symmetric bit-for-bit.
    pub fn is_symmetric_exact(&self) -> bool {
        self.nrows == self.ncols
            && self.row_offsets == self.t_row_offsets
            && self.col_indices == self.t_col_indices
            && self.values == self.t_values
    }
}

impl SymmetricOperator for CsrMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows, self.ncols);
        self.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        CsrMatrix::apply(self, x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diagonal_entries()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CsrMatrix {
        // [[1, 2], [0, 3]]
        CsrMatrix::new(2, 2, vec![0, 2, 3], vec![0, 1, 1], vec![1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn identity_apply() {
        let a = CsrMatrix::new(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).unwrap();
        let mut y = vec![0.0; 2];
        a.apply(&[3.0, 4.0], &mut y);
        assert_eq!(y, vec![3.0, 4.0]);
        a.apply_transpose(&[5.0, 6.0], &mut y);
        assert_eq!(y, vec![5.0, 6.0]);
    }

    #[test]
    fn small_apply_and_transpose() {
        let a = small();
        let mut y = vec![0.0; 2];
        a.apply(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 3.0]);
        a.apply_transpose(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![1.0, 5.0]);
    }

    #[test]
    fn transpose_values_bit_identical() {
        let a = small();
        // transpose of the transpose reproduces A entry-for-entry
        let mut seen = vec![];
        for j in 0..a.ncols() {
            for (i, v) in a.column_entries(j) {
                seen.push((i, j, v));
            }
        }
        seen.sort_by_key(|&(i, j, _)| (i, j));
        assert_eq!(
            seen,
            vec![(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]
        );
    }

    #[test]
    fn rejects_duplicate_columns() {
        let r = CsrMatrix::new(1, 2, vec![0, 2], vec![1, 1], vec![1.0, 2.0]);
        assert!(r.is_err());
    }

    #[test]
    fn rejects_bad_offsets() {
        assert!(CsrMatrix::new(2, 2, vec![0, 2], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![1, 2], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn rejects_out_of_range_column() {
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn symmetric_detection() {
        let s = CsrMatrix::new(
            2,
            2,
            vec![0, 2, 4],
            vec![0, 1, 0, 1],
            vec![2.0, 1.0, 1.0, 3.0],
        )
        .unwrap();
        assert!(s.is_symmetric_exact());
        assert!(!small().is_symmetric_exact());
    }
}
