//! Real sparse matrices in compressed-row form, tagged with their DOF spaces.
//!
//! Assembly goes through (row, col, value) triples; duplicates are summed and
//! the stored entries are sorted by (row, col), which also fixes the order of
//! the coordinate-format text export.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::SpaceInfo;

#[derive(Debug, Clone)]
pub struct SparseOperator {
    row_space: SpaceInfo,
    col_space: SpaceInfo,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Assemble from triples. Entries with identical (row, col) are summed;
    /// exact zeros produced by cancellation are kept (pattern is explicit).
    pub fn from_triples(
        row_space: SpaceInfo,
        col_space: SpaceInfo,
        mut triples: Vec<(usize, usize, f64)>,
    ) -> Result<SparseOperator> {
        for &(r, c, _) in &triples {
            if r >= row_space.count {
                return Err(Error::dim(row_space.count, r, "sparse row index"));
            }
            if c >= col_space.count {
                return Err(Error::dim(col_space.count, c, "sparse col index"));
            }
        }
        triples.sort_unstable_by_key(|t| (t.0, t.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triples.len());
        for (r, c, v) in triples {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; row_space.count + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..row_space.count {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = merged.iter().map(|t| t.1).collect();
        let values = merged.iter().map(|t| t.2).collect();
        Ok(SparseOperator {
            row_space,
            col_space,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Diagonal operator on a single space.
    pub fn diagonal(space: SpaceInfo, diag: Vec<f64>) -> Result<SparseOperator> {
        if diag.len() != space.count {
            return Err(Error::dim(space.count, diag.len(), "diagonal length"));
        }
        let triples = diag
            .into_iter()
            .enumerate()
            .map(|(i, v)| (i, i, v))
            .collect();
        SparseOperator::from_triples(space, space, triples)
    }

    pub fn row_space(&self) -> SpaceInfo {
        self.row_space
    }

    pub fn col_space(&self) -> SpaceInfo {
        self.col_space
    }

    pub fn nrows(&self) -> usize {
        self.row_space.count
    }

    pub fn ncols(&self) -> usize {
        self.col_space.count
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterate entries in (row, col) order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.col_idx[p], self.values[p]))
        })
    }

    /// y = A x
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols() {
            return Err(Error::dim(self.ncols(), x.len(), "sparse apply"));
        }
        let mut y = vec![0.0; self.nrows()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// y = A x without allocation; panics on mismatched slice lengths.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols());
        assert_eq!(y.len(), self.nrows());
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *out = acc;
        }
    }

    /// y = Aᵀ x without materializing the transpose.
    pub fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows());
        assert_eq!(y.len(), self.ncols());
        y.iter_mut().for_each(|v| *v = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[p]] += self.values[p] * xr;
            }
        }
    }

    /// Materialized transpose (row and column spaces swap).
    pub fn transpose(&self) -> SparseOperator {
        let triples = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        SparseOperator::from_triples(self.col_space, self.row_space, triples)
            .expect("transpose of a valid operator is valid")
    }

    /// Column j → number of stored entries.
    pub fn column_nnz(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.ncols()];
        for &c in &self.col_idx {
            counts[c] += 1;
        }
        counts
    }

    /// The diagonal as a vector if the operator is square and has no
    /// off-diagonal entries; None otherwise.
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        if self.nrows() != self.ncols() {
            return None;
        }
        let mut diag = vec![0.0; self.nrows()];
        for (r, c, v) in self.iter() {
            if r != c {
                return None;
            }
            diag[r] = v;
        }
        Some(diag)
    }

    /// Dense copy, for small-problem test oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.ncols()]; self.nrows()];
        for (r, c, v) in self.iter() {
            m[r][c] += v;
        }
        m
    }

    /// Coordinate-format text: one `row col value` line per stored entry,
    /// in (row, col) order.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for (r, c, v) in self.iter() {
            writeln!(out, "{r} {c} {v}").expect("write to string");
        }
        out
    }

    pub fn write_coordinate_text(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_coordinate_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{DofKind, SpaceInfo};

    fn space(n: usize) -> SpaceInfo {
        SpaceInfo {
            kind: DofKind::Combined,
            count: n,
        }
    }

    #[test]
    fn triples_merge_and_sort() {
        let a = SparseOperator::from_triples(
            space(3),
            space(3),
            vec![(2, 1, 1.0), (0, 0, 2.0), (2, 1, 0.5), (1, 2, -1.0)],
        )
        .unwrap();
        let entries: Vec<_> = a.iter().collect();
        assert_eq!(entries, vec![(0, 0, 2.0), (1, 2, -1.0), (2, 1, 1.5)]);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn apply_and_transpose_agree_with_dense() {
        let a = SparseOperator::from_triples(
            space(2),
            space(3),
            vec![(0, 0, 1.0), (0, 2, 3.0), (1, 1, -2.0)],
        )
        .unwrap();
        let x = vec![1.0, 2.0, 3.0];
        assert_eq!(a.apply(&x).unwrap(), vec![10.0, -4.0]);
        let mut y = vec![0.0; 3];
        a.apply_transpose_into(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![1.0, -2.0, 3.0]);
        let at = a.transpose();
        assert_eq!(at.apply(&[1.0, 1.0]).unwrap(), y);
    }

    #[test]
    fn out_of_range_triple_is_rejected() {
        let err = SparseOperator::from_triples(space(2), space(2), vec![(2, 0, 1.0)]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn diagonal_roundtrip() {
        let d = SparseOperator::diagonal(space(3), vec![1.0, 0.0, 5.0]).unwrap();
        assert_eq!(d.as_diagonal(), Some(vec![1.0, 0.0, 5.0]));
        let nd = SparseOperator::from_triples(space(2), space(2), vec![(0, 1, 1.0)]).unwrap();
        assert_eq!(nd.as_diagonal(), None);
    }

    #[test]
    fn coordinate_text_is_deterministic() {
        let a = SparseOperator::from_triples(
            space(2),
            space(2),
            vec![(1, 0, 0.5), (0, 1, -1.0)],
        )
        .unwrap();
        assert_eq!(a.to_coordinate_text(), "0 1 -1\n1 0 0.5\n");
    }
}
