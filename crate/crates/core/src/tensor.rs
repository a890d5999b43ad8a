//! Dense tensors, matrices and the multilinear kernels the decomposition
//! models are built from.
//!
//! Both [`DenseTensor`] and [`Matrix`] store their entries with the first
//! index varying fastest (the column-major generalisation). A tensor of shape
//! `(J1, .., JN)` places entry `(i1, .., iN)` at
//! `i1 + J1 * (i2 + J2 * (i3 + ..))`, and `vec` is the flat data in that order.
//!
//! Modes are zero-based throughout the crate.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{GtdError, Result};

/// Real matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(GtdError::shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(GtdError::shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i + j * rows] = data[i * cols + j];
            }
        }
        Ok(m)
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(GtdError::shape("ragged rows"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Matrix::from_row_major(n, m, &flat)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i + j * self.rows] = value;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.data[j + i * self.cols] = self.data[i + j * self.rows];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(GtdError::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let scale = other.data[k + j * other.rows];
                if scale == 0.0 {
                    continue;
                }
                let src = &self.data[k * self.rows..(k + 1) * self.rows];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += scale * s;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> Matrix {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = dot(self.col(a), self.col(b));
                g.data[a + b * n] = v;
                g.data[b + a * n] = v;
            }
        }
        g
    }

    /// `selfᵀ · other`.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(GtdError::shape(format!(
                "cannot form ({}x{})ᵀ·({}x{})",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for b in 0..other.cols {
            for a in 0..self.cols {
                out.data[a + b * self.cols] = dot(self.col(a), other.col(b));
            }
        }
        Ok(out)
    }

    pub fn hadamard_assign(&mut self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(GtdError::shape("hadamard product of unequal matrices"));
        }
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a *= b);
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }
}

/// Khatri-Rao (column-wise Kronecker) product.
///
/// Column `r` of the result is `kron(a[:, r], b[:, r])`, with the row index of
/// `b` varying fastest.
pub fn khatri_rao(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.cols {
        return Err(GtdError::shape(format!(
            "khatri-rao needs equal column counts, got {} and {}",
            a.cols, b.cols
        )));
    }
    let rows = a.rows * b.rows;
    let mut out = Matrix::zeros(rows, a.cols);
    for r in 0..a.cols {
        let dst = &mut out.data[r * rows..(r + 1) * rows];
        for (i, &ai) in a.col(r).iter().enumerate() {
            for (k, &bk) in b.col(r).iter().enumerate() {
                dst[i * b.rows + k] = ai * bk;
            }
        }
    }
    Ok(out)
}

/// N-dimensional dense array, first index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_shape(&shape)?;
        let n: usize = shape.iter().product();
        if data.len() != n {
            return Err(GtdError::shape(format!(
                "shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        check_shape(&shape)?;
        let n = shape.iter().product();
        Ok(DenseTensor {
            shape,
            data: vec![0.0; n],
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Vectorisation in layout order.
    pub fn vec(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &j) in index.iter().zip(&self.shape) {
            debug_assert!(i < j);
            lin += i * stride;
            stride *= j;
        }
        lin
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.linear_index(index)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// Mode-`mode` matricisation: a `J_mode × ∏_{i≠mode} J_i` matrix whose
    /// column index linearises the remaining indices first-fastest.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let (left, jn, right) = split_at_mode(&self.shape, mode);
        let mut m = Matrix::zeros(jn, left * right);
        for r in 0..right {
            for j in 0..jn {
                let src = &self.data[left * (j + jn * r)..left * (j + jn * r) + left];
                for (l, &v) in src.iter().enumerate() {
                    m.data[j + jn * (l + left * r)] = v;
                }
            }
        }
        Ok(m)
    }

    /// Inverse of [`DenseTensor::unfold`].
    pub fn fold(m: &Matrix, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
        check_shape(shape)?;
        if mode >= shape.len() {
            return Err(GtdError::Mode {
                mode,
                order: shape.len(),
            });
        }
        let (left, jn, right) = split_at_mode(shape, mode);
        if m.rows != jn || m.cols != left * right {
            return Err(GtdError::shape(format!(
                "{}x{} matrix cannot fold along mode {mode} into {shape:?}",
                m.rows, m.cols
            )));
        }
        let mut data = vec![0.0; jn * left * right];
        for r in 0..right {
            for j in 0..jn {
                let dst = &mut data[left * (j + jn * r)..left * (j + jn * r) + left];
                for (l, d) in dst.iter_mut().enumerate() {
                    *d = m.data[j + jn * (l + left * r)];
                }
            }
        }
        Ok(DenseTensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// `self ×_mode m`: replaces dimension `mode` by `m.rows()`.
    pub fn mode_n_product(&self, m: &Matrix, mode: usize) -> Result<DenseTensor> {
        self.check_mode(mode)?;
        if m.cols != self.shape[mode] {
            return Err(GtdError::shape(format!(
                "mode-{mode} product needs {} matrix columns, got {}",
                self.shape[mode], m.cols
            )));
        }
        let (left, jn, right) = split_at_mode(&self.shape, mode);
        let mut shape = self.shape.clone();
        shape[mode] = m.rows;
        let out_n = m.rows;
        let mut data = vec![0.0; left * out_n * right];
        for r in 0..right {
            for j in 0..jn {
                let src = &self.data[left * (j + jn * r)..left * (j + jn * r) + left];
                for i in 0..out_n {
                    let w = m.get(i, j);
                    if w == 0.0 {
                        continue;
                    }
                    let dst = &mut data[left * (i + out_n * r)..left * (i + out_n * r) + left];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        Ok(DenseTensor { shape, data })
    }

    /// Reorders modes so that result mode `k` is input mode `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<DenseTensor> {
        let n = self.order();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&o| o >= n || std::mem::replace(&mut seen[o], true)) {
            return Err(GtdError::invalid(format!("{order:?} is not a permutation of 0..{n}")));
        }
        let shape: Vec<usize> = order.iter().map(|&o| self.shape[o]).collect();
        let strides = strides(&self.shape);
        let src_strides: Vec<usize> = order.iter().map(|&o| strides[o]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; n];
        for _ in 0..self.data.len() {
            let off: usize = idx.iter().zip(&src_strides).map(|(i, s)| i * s).sum();
            data.push(self.data[off]);
            increment(&mut idx, &shape);
        }
        Ok(DenseTensor { shape, data })
    }

    /// Text form: a `shape: J1 .. JN` header followed by the values in layout
    /// order.
    pub fn to_text(&self) -> String {
        let mut s = String::from("shape:");
        for j in &self.shape {
            let _ = write!(s, " {j}");
        }
        s.push('\n');
        for chunk in self.data.chunks(self.shape[0]) {
            let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<DenseTensor> {
        let (shape, body) = split_header(text, "shape:")?;
        let shape = shape
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| GtdError::Format(format!("bad shape entry `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let data = body
            .split_whitespace()
            .map(parse_f64)
            .collect::<Result<Vec<_>>>()?;
        if data.len() != n {
            return Err(GtdError::Format(format!(
                "expected {n} values after the shape header, found {}",
                data.len()
            )));
        }
        DenseTensor::new(shape, data)
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<DenseTensor> {
        DenseTensor::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.shape.len() {
            return Err(GtdError::Mode {
                mode,
                order: self.shape.len(),
            });
        }
        Ok(())
    }
}

/// Splits `text` into the remainder of the first non-blank line (which must
/// start with `key`) and everything after that line.
pub(crate) fn split_header<'a>(text: &'a str, key: &str) -> Result<(&'a str, &'a str)> {
    let trimmed = text.trim_start();
    let (line, body) = trimmed.split_once('\n').unwrap_or((trimmed, ""));
    match line.trim().strip_prefix(key) {
        Some(rest) => Ok((rest, body)),
        None => Err(GtdError::Format(format!(
            "expected `{key}` header, found `{}`",
            line.trim()
        ))),
    }
}

pub(crate) fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| GtdError::Format(format!("`{tok}` is not a number")))
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(GtdError::shape(format!(
            "shape {shape:?} must be non-empty with positive entries"
        )));
    }
    Ok(())
}

fn split_at_mode(shape: &[usize], mode: usize) -> (usize, usize, usize) {
    let left = shape[..mode].iter().product();
    let right = shape[mode + 1..].iter().product();
    (left, shape[mode], right)
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(shape.len());
    let mut acc = 1;
    for &j in shape {
        s.push(acc);
        acc *= j;
    }
    s
}

/// Advances a multi-index in first-fastest order. Wraps to zero at the end.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for (i, &j) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < j {
            return;
        }
        *i = 0;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
