//! Regression data model, the squared-error objective and the classical
//! normal-equations baseline.
//!
//! The design matrix is always stored augmented: its last column is fixed at
//! 1 so that the last weight acts as the intercept.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows per chunk in the Gram accumulation. Partial sums are combined
/// left-to-right in chunk order, so serial and parallel runs agree bitwise.
const GRAM_CHUNK_ROWS: usize = 4096;

/// Relative singular-value cutoff below which the Gram matrix is treated as
/// rank deficient.
const PINV_RCOND: f64 = 1e-12;

/// Augmented training data: `x` is N × (d+1) row-major with a trailing
/// column of ones, `y` has length N.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    cols: usize,
}

/// Regression coefficients; the last entry is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::contract("weights must be non-empty"));
        }
        if let Some(bad) = w.iter().find(|v| !v.is_finite()) {
            return Err(Error::contract(format!("non-finite weight {bad}")));
        }
        Ok(Weights(w))
    }

    pub(crate) fn from_vec_unchecked(w: Vec<f64>) -> Self {
        Weights(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Sufficient statistics of a dataset: XᵀX (full symmetric, row-major),
/// XᵀY and YᵀY.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    pub cols: usize,
    pub xtx: Vec<f64>,
    pub xty: Vec<f64>,
    pub yty: f64,
}

impl Gram {
    fn zeros(cols: usize) -> Self {
        Gram {
            cols,
            xtx: vec![0.0; cols * cols],
            xty: vec![0.0; cols],
            yty: 0.0,
        }
    }

    /// Adds `other` into `self`, upper triangle only.
    fn merge(&mut self, other: &Gram) {
        let c = self.cols;
        for i in 0..c {
            for j in i..c {
                self.xtx[i * c + j] += other.xtx[i * c + j];
            }
            self.xty[i] += other.xty[i];
        }
        self.yty += other.yty;
    }

    fn mirror_lower(&mut self) {
        let c = self.cols;
        for i in 0..c {
            for j in 0..i {
                self.xtx[i * c + j] = self.xtx[j * c + i];
            }
        }
    }

    pub fn xtx(&self, i: usize, j: usize) -> f64 {
        self.xtx[i * self.cols + j]
    }
}

impl Dataset {
    /// Builds a dataset from an already augmented row-major matrix.
    pub fn new(x: Vec<f64>, n: usize, cols: usize, y: Vec<f64>) -> Result<Self> {
        if n == 0 || cols == 0 {
            return Err(Error::contract(format!(
                "dataset needs N >= 1 and d+1 >= 1, got N={n}, d+1={cols}"
            )));
        }
        if x.len() != n * cols {
            return Err(Error::contract(format!(
                "design matrix has {} entries, expected {n}x{cols}",
                x.len()
            )));
        }
        if y.len() != n {
            return Err(Error::contract(format!(
                "label vector has length {}, expected {n}",
                y.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::contract("dataset contains non-finite entries"));
        }
        if (0..n).any(|r| x[r * cols + cols - 1] != 1.0) {
            return Err(Error::contract(
                "last column of the design matrix must be identically 1",
            ));
        }
        Ok(Dataset { x, y, n, cols })
    }

    /// Builds a dataset from rows that already include the trailing 1.
    pub fn from_augmented_rows(rows: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::contract("ragged design matrix"));
        }
        let x = rows.iter().flatten().copied().collect();
        Dataset::new(x, rows.len(), cols, y.to_vec())
    }

    /// Builds a dataset from raw feature rows, appending the unit column.
    pub fn from_features(features: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let d = features.first().map_or(0, Vec::len);
        if features.iter().any(|r| r.len() != d) {
            return Err(Error::contract("ragged feature matrix"));
        }
        let mut x = Vec::with_capacity(features.len() * (d + 1));
        for row in features {
            x.extend_from_slice(row);
            x.push(1.0);
        }
        Dataset::new(x, features.len(), d + 1, y.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_plus_1(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.cols..(i + 1) * self.cols]
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `x_i · w`, summed left to right.
    pub fn predict_row(&self, i: usize, w: &[f64]) -> f64 {
        dot(self.row(i), w)
    }

    /// XᵀX, XᵀY and YᵀY in a single pass over the rows.
    pub fn gram(&self) -> Gram {
        let partials: Vec<Gram> = self
            .x
            .chunks(GRAM_CHUNK_ROWS * self.cols)
            .zip(self.y.chunks(GRAM_CHUNK_ROWS))
            .map(|(xc, yc)| chunk_gram(xc, yc, self.cols))
            .collect();
        self.combine(partials)
    }

    /// Same as [`Dataset::gram`] with chunks accumulated on the rayon pool.
    /// The result is bitwise identical to the serial version.
    pub fn gram_par(&self) -> Gram {
        let partials: Vec<Gram> = self
            .x
            .par_chunks(GRAM_CHUNK_ROWS * self.cols)
            .zip(self.y.par_chunks(GRAM_CHUNK_ROWS))
            .map(|(xc, yc)| chunk_gram(xc, yc, self.cols))
            .collect();
        self.combine(partials)
    }

    fn combine(&self, partials: Vec<Gram>) -> Gram {
        let mut total = Gram::zeros(self.cols);
        for p in &partials {
            total.merge(p);
        }
        total.mirror_lower();
        total
    }

    /// Reads the CSV dataset format: one row per datapoint, the first `d`
    /// columns are features and the last is the label. A non-numeric first
    /// line is treated as a header.
    pub fn read_csv<R: Read>(reader: R, context: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut width: Option<usize> = None;
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(context, e.to_string()))?;
            let parsed: std::result::Result<Vec<f64>, _> =
                rec.iter().map(str::parse::<f64>).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if line == 0 => continue,
                Err(e) => {
                    return Err(Error::parse(context, format!("line {}: {e}", line + 1)));
                }
            };
            match width {
                None => width = Some(values.len()),
                Some(w) if w != values.len() => {
                    return Err(Error::parse(
                        context,
                        format!(
                            "line {}: expected {w} fields, got {}",
                            line + 1,
                            values.len()
                        ),
                    ))
                }
                _ => {}
            }
            let (label, features) = values
                .split_last()
                .ok_or_else(|| Error::parse(context, "empty record"))?;
            x.extend_from_slice(features);
            x.push(1.0);
            y.push(*label);
        }
        let cols = width.ok_or_else(|| Error::parse(context, "no data rows"))?;
        Dataset::new(x, y.len(), cols, y)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Dataset::read_csv(std::io::BufReader::new(file), &path.display().to_string())
    }

    /// Writes the CSV dataset format with a header row; the augmentation
    /// column is not stored.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let d = self.cols - 1;
        let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        header.push("y".to_string());
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n {
            for v in &self.row(i)[..d] {
                write!(out, "{v},")?;
            }
            writeln!(out, "{}", self.y[i])?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Left-to-right dot product shared by prediction and data generation, so a
/// noiseless label reproduces its prediction bit for bit.
pub(crate) fn dot(row: &[f64], w: &[f64]) -> f64 {
    row.iter().zip(w).fold(0.0, |acc, (x, w)| acc + x * w)
}

/// Rows staged per block in `chunk_gram`; the column-major block stays in L1.
const GRAM_BLOCK_ROWS: usize = 64;

/// Gram statistics of one chunk. Rows are staged column-major in blocks with
/// `y` as an extra trailing column, so every entry of XᵀX, XᵀY and YᵀY is a
/// dot product of two short contiguous columns. The cost grows smoothly with
/// the column count and does not depend on how `x` happens to be aligned.
fn chunk_gram(x: &[f64], y: &[f64], cols: usize) -> Gram {
    let w = cols + 1;
    let mut acc = vec![0.0; w * w];
    let mut block = vec![0.0; w * GRAM_BLOCK_ROWS];
    for (xb, yb) in x
        .chunks(GRAM_BLOCK_ROWS * cols)
        .zip(y.chunks(GRAM_BLOCK_ROWS))
    {
        let r = yb.len();
        for (k, (row, &yk)) in xb.chunks_exact(cols).zip(yb).enumerate() {
            for (c, &v) in row.iter().enumerate() {
                block[c * GRAM_BLOCK_ROWS + k] = v;
            }
            block[cols * GRAM_BLOCK_ROWS + k] = yk;
        }
        for i in 0..w {
            let ci = &block[i * GRAM_BLOCK_ROWS..i * GRAM_BLOCK_ROWS + r];
            for j in i..w {
                let cj = &block[j * GRAM_BLOCK_ROWS..j * GRAM_BLOCK_ROWS + r];
                acc[i * w + j] += lane_dot(ci, cj);
            }
        }
    }
    let mut g = Gram::zeros(cols);
    for i in 0..cols {
        g.xtx[i * cols + i..(i + 1) * cols].copy_from_slice(&acc[i * w + i..i * w + cols]);
        g.xty[i] = acc[i * w + cols];
    }
    g.yty = acc[w * w - 1];
    g
}

/// Dot product with four interleaved partial sums.
fn lane_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (u, v) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            lanes[l] += u[l] * v[l];
        }
    }
    let mut s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (u, v) in ca.remainder().iter().zip(cb.remainder()) {
        s += u * v;
    }
    s
}

/// Squared Euclidean residual `||Xw - Y||²`.
pub fn regression_error(ds: &Dataset, w: &Weights) -> Result<f64> {
    if w.len() != ds.d_plus_1() {
        return Err(Error::contract(format!(
            "weights have length {}, dataset has {} columns",
            w.len(),
            ds.d_plus_1()
        )));
    }
    let w = w.as_slice();
    Ok((0..ds.n())
        .map(|i| {
            let r = ds.predict_row(i, w) - ds.y[i];
            r * r
        })
        .sum())
}

/// Least-squares weights `(XᵀX)⁻¹XᵀY`, or the minimum-norm pseudo-inverse
/// solution when XᵀX is rank deficient.
pub fn solve_analytical(ds: &Dataset) -> Result<Weights> {
    solve_normal_equations(&ds.gram())
}

pub(crate) fn solve_normal_equations(g: &Gram) -> Result<Weights> {
    let c = g.cols;
    let xtx = DMatrix::from_row_slice(c, c, &g.xtx);
    let xty = DVector::from_column_slice(&g.xty);

    let svd = xtx.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if !(s_max.is_finite()) {
        return Err(Error::contract("non-finite normal equations"));
    }

    let full_rank = s_max > 0.0 && s_min > PINV_RCOND * s_max;
    let w = match full_rank.then(|| xtx.cholesky()).flatten() {
        Some(chol) => chol.solve(&xty),
        None => svd
            .solve(&xty, PINV_RCOND * s_max)
            .map_err(|e| Error::contract(format!("pseudo-inverse failed: {e}")))?,
    };
    Weights::new(w.iter().copied().collect())
}
