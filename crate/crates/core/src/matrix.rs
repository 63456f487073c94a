use crate::{Error, Result};

/// Dense `n x d` matrix of observations, one row per observation, stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "{} values do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(SampleMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SampleMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        SampleMatrix::new(rows.len(), cols, data)
    }

    /// A one-column matrix.
    pub fn column_vector(values: Vec<f64>) -> Self {
        SampleMatrix {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.cols {
            return Err(Error::IndexError {
                index: j,
                dim: self.cols,
            });
        }
        Ok(self.rows().map(|r| r[j]).collect())
    }

    /// Matrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidParameter("empty column selection".into()));
        }
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.cols) {
            return Err(Error::IndexError {
                index: bad,
                dim: self.cols,
            });
        }
        let mut data = Vec::with_capacity(self.rows * columns.len());
        for r in self.rows() {
            data.extend(columns.iter().map(|&c| r[c]));
        }
        Ok(SampleMatrix {
            rows: self.rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        SampleMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        SampleMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for r in self.rows() {
            for (m, x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= self.rows as f64);
        means
    }

    /// Unbiased sample covariance, row-major `d x d`.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.cols;
        let means = self.column_means();
        let mut cov = vec![0.0; d * d];
        for r in self.rows() {
            for a in 0..d {
                let da = r[a] - means[a];
                for b in 0..d {
                    cov[a * d + b] += da * (r[b] - means[b]);
                }
            }
        }
        let denom = (self.rows as f64 - 1.0).max(1.0);
        cov.iter_mut().for_each(|c| *c /= denom);
        cov
    }

    /// Center every column and divide by its sample standard deviation.
    /// Constant columns are only centered.
    pub fn standardized(&self) -> Self {
        let d = self.cols;
        let means = self.column_means();
        let cov = self.covariance();
        let sds: Vec<f64> = (0..d)
            .map(|j| {
                let sd = cov[j * d + j].sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        let mut out = self.clone();
        for i in 0..self.rows {
            for (j, x) in out.row_mut(i).iter_mut().enumerate() {
                *x = (*x - means[j]) / sds[j];
            }
        }
        out
    }
}
