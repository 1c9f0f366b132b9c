//! Minimal dense row-major matrix used for cut blocks and coupling data.
//!
//! Bundles grow by appending rows, and the LP layer consumes whole rows, so a
//! flat row-major buffer is the natural shape. Anything that needs real
//! linear algebra converts at the boundary.

#[derive(Debug, Clone, PartialEq)]
pub struct RowMat {
    cols: usize,
    data: Vec<f64>,
}

impl RowMat {
    pub fn new(cols: usize) -> Self {
        RowMat { cols, data: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: &[Vec<f64>]) -> Self {
        let mut m = RowMat::new(cols);
        for r in rows {
            m.push_row(r);
        }
        m
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.data.len() / self.cols
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend_from_slice(row);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn remove_row(&mut self, i: usize) {
        let start = i * self.cols;
        self.data.drain(start..start + self.cols);
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows())
    }
}
