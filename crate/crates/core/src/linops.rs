//! Observation operators `A` mapping a vectorised tensor to measurements,
//! and the power-iteration bound on the largest eigenvalue of `AᵀA`.

use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GtdError, Result};
use crate::tensor::{dot, norm2, parse_f64, Matrix};

/// A linear map from `R^in_dim` to `R^out_dim` with its adjoint.
///
/// Implementors provide the unchecked kernels; the checked `forward`,
/// `adjoint` and `gram` wrappers validate lengths.
pub trait LinearOperator: fmt::Debug + Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;

    /// Short label used in reports.
    fn name(&self) -> &'static str;

    /// `y = A x`. `x.len() == in_dim`, `y.len() == out_dim`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `x = Aᵀ u`. `u.len() == out_dim`, `x.len() == in_dim`; `x` is overwritten.
    fn apply_adjoint(&self, u: &[f64], x: &mut [f64]);

    /// `AᵀA x`; structured operators may override with a fused kernel.
    fn apply_gram(&self, x: &[f64], out: &mut [f64]) {
        let mut y = vec![0.0; self.out_dim()];
        self.apply(x, &mut y);
        self.apply_adjoint(&y, out);
    }

    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("forward input", x.len(), self.in_dim())?;
        let mut y = vec![0.0; self.out_dim()];
        self.apply(x, &mut y);
        Ok(y)
    }

    fn adjoint(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("adjoint input", u.len(), self.out_dim())?;
        let mut x = vec![0.0; self.in_dim()];
        self.apply_adjoint(u, &mut x);
        Ok(x)
    }

    fn gram(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("gram input", x.len(), self.in_dim())?;
        let mut out = vec![0.0; self.in_dim()];
        self.apply_gram(x, &mut out);
        Ok(out)
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(GtdError::shape(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Dense `out_dim × in_dim` materialisation, built column by column from
/// the forward action on basis vectors.
pub fn materialize(op: &dyn LinearOperator) -> Matrix {
    let (rows, cols) = (op.out_dim(), op.in_dim());
    let mut m = Matrix::zeros(rows, cols);
    let mut e = vec![0.0; cols];
    let mut y = vec![0.0; rows];
    for j in 0..cols {
        e[j] = 1.0;
        op.apply(&e, &mut y);
        m.data_mut()[j * rows..(j + 1) * rows].copy_from_slice(&y);
        e[j] = 0.0;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    n: usize,
}

impl Identity {
    pub fn new(n: usize) -> Self {
        Identity { n }
    }
}

impl LinearOperator for Identity {
    fn in_dim(&self) -> usize {
        self.n
    }
    fn out_dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> &'static str {
        "identity"
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
    fn apply_adjoint(&self, u: &[f64], x: &mut [f64]) {
        x.copy_from_slice(u);
    }
    fn apply_gram(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
}

/// Entry selection: keeps the listed indices (strictly increasing) of a
/// length-`n` vector. The observation length is the number of kept entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    n: usize,
    kept: Vec<usize>,
}

impl Mask {
    pub fn new(n: usize, mut kept: Vec<usize>) -> Result<Self> {
        kept.sort_unstable();
        if kept.windows(2).any(|w| w[0] == w[1]) {
            return Err(GtdError::invalid("mask indices must be unique"));
        }
        if let Some(&last) = kept.last() {
            if last >= n {
                return Err(GtdError::invalid(format!(
                    "mask index {last} out of range for length {n}"
                )));
            }
        }
        Ok(Mask { n, kept })
    }

    /// Keeps `round(fraction·n)` entries drawn uniformly without replacement.
    pub fn random(n: usize, fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(GtdError::invalid(format!(
                "mask fraction {fraction} outside [0, 1]"
            )));
        }
        let count = ((fraction * n as f64).round() as usize).min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kept = rand::seq::index::sample(&mut rng, n, count).into_vec();
        Mask::new(n, kept)
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    /// Mask file: the count followed by that many indices.
    pub fn read(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut tok = text.split_whitespace();
        let count = parse_usize(tok.next().ok_or_else(|| GtdError::Format("empty mask file".into()))?)?;
        let kept = tok.map(parse_usize).collect::<Result<Vec<_>>>()?;
        if kept.len() != count {
            return Err(GtdError::Format(format!(
                "mask file declares {count} indices but lists {}",
                kept.len()
            )));
        }
        Mask::new(n, kept)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = format!("{}\n", self.kept.len());
        for k in &self.kept {
            s.push_str(&k.to_string());
            s.push('\n');
        }
        std::fs::write(path, s)?;
        Ok(())
    }
}

impl LinearOperator for Mask {
    fn in_dim(&self) -> usize {
        self.n
    }
    fn out_dim(&self) -> usize {
        self.kept.len()
    }
    fn name(&self) -> &'static str {
        "mask"
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, &k) in y.iter_mut().zip(&self.kept) {
            *yi = x[k];
        }
    }
    fn apply_adjoint(&self, u: &[f64], x: &mut [f64]) {
        x.fill(0.0);
        for (&ui, &k) in u.iter().zip(&self.kept) {
            x[k] = ui;
        }
    }
    fn apply_gram(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &k in &self.kept {
            out[k] = x[k];
        }
    }
}

/// Circular 2-D convolution over the first two modes, applied independently
/// to every slice of the remaining modes. The kernel origin is at
/// `(h / 2, w / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blur {
    shape: Vec<usize>,
    kernel: Matrix,
}

impl Blur {
    pub fn new(shape: Vec<usize>, kernel: Matrix) -> Result<Self> {
        if shape.len() < 2 || shape.contains(&0) {
            return Err(GtdError::invalid(format!(
                "blur needs at least two positive modes, got {shape:?}"
            )));
        }
        if kernel.rows() == 0 || kernel.cols() == 0 {
            return Err(GtdError::invalid("empty blur kernel"));
        }
        Ok(Blur { shape, kernel })
    }

    /// Normalised isotropic Gaussian kernel of `size × size`.
    pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Matrix> {
        if size == 0 || !(sigma > 0.0) {
            return Err(GtdError::invalid(format!(
                "gaussian kernel needs size > 0 and sigma > 0, got {size}, {sigma}"
            )));
        }
        let c = (size as f64 - 1.0) / 2.0;
        let mut k = Matrix::zeros(size, size);
        for i in 0..size {
            for j in 0..size {
                let r2 = (i as f64 - c).powi(2) + (j as f64 - c).powi(2);
                k.set(i, j, (-r2 / (2.0 * sigma * sigma)).exp());
            }
        }
        let total: f64 = k.data().iter().sum();
        k.data_mut().iter_mut().for_each(|v| *v /= total);
        Ok(k)
    }

    /// Kernel file: `h w` then `h·w` values in row-major order.
    pub fn read_kernel(path: impl AsRef<Path>) -> Result<Matrix> {
        let text = std::fs::read_to_string(path)?;
        let mut tok = text.split_whitespace();
        let mut next_dim = || -> Result<usize> {
            parse_usize(tok.next().ok_or_else(|| GtdError::Format("kernel header truncated".into()))?)
        };
        let (h, w) = (next_dim()?, next_dim()?);
        let values = tok.map(parse_f64).collect::<Result<Vec<_>>>()?;
        Matrix::from_row_major(h, w, &values).map_err(|e| GtdError::Format(e.to_string()))
    }

    pub fn kernel(&self) -> &Matrix {
        &self.kernel
    }

    fn convolve(&self, src: &[f64], dst: &mut [f64], flip: bool) {
        let (h, w) = (self.shape[0], self.shape[1]);
        let (kh, kw) = (self.kernel.rows(), self.kernel.cols());
        let (ch, cw) = (kh / 2, kw / 2);
        let plane = h * w;
        dst.fill(0.0);
        for (s_plane, d_plane) in src.chunks(plane).zip(dst.chunks_mut(plane)) {
            for q in 0..kw {
                for p in 0..kh {
                    let wgt = self.kernel.get(p, q);
                    if wgt == 0.0 {
                        continue;
                    }
                    // forward: y[i, j] += k[p, q] x[i - p + ch, j - q + cw]
                    // adjoint: x[i, j] += k[p, q] u[i + p - ch, j + q - cw]
                    let (di, dj) = if flip {
                        ((p + h * kh - ch) % h, (q + w * kw - cw) % w)
                    } else {
                        ((ch + h * kh - p) % h, (cw + w * kw - q) % w)
                    };
                    for j in 0..w {
                        let sj = (j + dj) % w;
                        let d_col = &mut d_plane[j * h..(j + 1) * h];
                        let s_col = &s_plane[sj * h..(sj + 1) * h];
                        for (i, d) in d_col.iter_mut().enumerate() {
                            let si = if i + di >= h { i + di - h } else { i + di };
                            *d += wgt * s_col[si];
                        }
                    }
                }
            }
        }
    }
}

impl LinearOperator for Blur {
    fn in_dim(&self) -> usize {
        self.shape.iter().product()
    }
    fn out_dim(&self) -> usize {
        self.in_dim()
    }
    fn name(&self) -> &'static str {
        "blur"
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.convolve(x, y, false);
    }
    fn apply_adjoint(&self, u: &[f64], x: &mut [f64]) {
        self.convolve(u, x, true);
    }
}

/// Non-overlapping `s × s` block averaging over the first two modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Downsample {
    shape: Vec<usize>,
    factor: usize,
}

impl Downsample {
    pub fn new(shape: Vec<usize>, factor: usize) -> Result<Self> {
        if shape.len() < 2 || factor == 0 || shape[0] % factor != 0 || shape[1] % factor != 0 {
            return Err(GtdError::invalid(format!(
                "downsample factor {factor} must divide the first two modes of {shape:?}"
            )));
        }
        Ok(Downsample { shape, factor })
    }

    pub fn out_shape(&self) -> Vec<usize> {
        let mut s = self.shape.clone();
        s[0] /= self.factor;
        s[1] /= self.factor;
        s
    }
}

impl LinearOperator for Downsample {
    fn in_dim(&self) -> usize {
        self.shape.iter().product()
    }
    fn out_dim(&self) -> usize {
        self.in_dim() / (self.factor * self.factor)
    }
    fn name(&self) -> &'static str {
        "downsample"
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (h, w, s) = (self.shape[0], self.shape[1], self.factor);
        let (oh, ow) = (h / s, w / s);
        let inv = 1.0 / (s * s) as f64;
        y.fill(0.0);
        for (xp, yp) in x.chunks(h * w).zip(y.chunks_mut(oh * ow)) {
            for j in 0..w {
                for i in 0..h {
                    yp[i / s + oh * (j / s)] += inv * xp[i + h * j];
                }
            }
        }
    }
    fn apply_adjoint(&self, u: &[f64], x: &mut [f64]) {
        let (h, w, s) = (self.shape[0], self.shape[1], self.factor);
        let (oh, ow) = (h / s, w / s);
        let inv = 1.0 / (s * s) as f64;
        for (up, xp) in u.chunks(oh * ow).zip(x.chunks_mut(h * w)) {
            for j in 0..w {
                for i in 0..h {
                    xp[i + h * j] = inv * up[i / s + oh * (j / s)];
                }
            }
        }
    }
}

/// Explicit `I × J` design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: Matrix,
}

impl DenseOperator {
    pub fn new(matrix: Matrix) -> Self {
        DenseOperator { matrix }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Dense operator file: `rows cols` then row-major values.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut tok = text.split_whitespace();
        let mut next_dim = || -> Result<usize> {
            parse_usize(tok.next().ok_or_else(|| GtdError::Format("operator header truncated".into()))?)
        };
        let (rows, cols) = (next_dim()?, next_dim()?);
        let values = tok.map(parse_f64).collect::<Result<Vec<_>>>()?;
        let m = Matrix::from_row_major(rows, cols, &values)
            .map_err(|e| GtdError::Format(e.to_string()))?;
        Ok(DenseOperator::new(m))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let m = &self.matrix;
        let mut s = format!("{} {}\n", m.rows(), m.cols());
        for i in 0..m.rows() {
            let row: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        std::fs::write(path, s)?;
        Ok(())
    }
}

impl LinearOperator for DenseOperator {
    fn in_dim(&self) -> usize {
        self.matrix.cols()
    }
    fn out_dim(&self) -> usize {
        self.matrix.rows()
    }
    fn name(&self) -> &'static str {
        "dense"
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for (j, &xj) in x.iter().enumerate() {
            for (yi, a) in y.iter_mut().zip(self.matrix.col(j)) {
                *yi += a * xj;
            }
        }
    }
    fn apply_adjoint(&self, u: &[f64], x: &mut [f64]) {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = dot(self.matrix.col(j), u);
        }
    }
}

fn parse_usize(tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| GtdError::Format(format!("`{tok}` is not a nonnegative integer")))
}

/// Upper bound on the largest eigenvalue of `AᵀA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBound {
    pub lambda: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Multiplier applied to the final Rayleigh quotient.
pub const SAFETY_FACTOR: f64 = 1.01;
/// Returned for operators whose Gram action vanishes.
pub const LAMBDA_FLOOR: f64 = 1e-30;

/// Power iteration on `AᵀA` from a seeded Gaussian start. Stops once
/// successive Rayleigh quotients differ by less than `tol` relative; the
/// bound is the last quotient times [`SAFETY_FACTOR`].
pub fn max_eigenvalue(
    op: &dyn LinearOperator,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SpectralBound> {
    let n = op.in_dim();
    if n == 0 {
        return Err(GtdError::invalid("operator has zero input dimension"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut g = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut quotient = 0.0;
    for it in 1..=max_iter {
        op.apply_gram(&x, &mut g);
        quotient = dot(&x, &g);
        let ng = norm2(&g);
        if !(ng > 0.0) || !(quotient > 0.0) {
            return Ok(SpectralBound {
                lambda: LAMBDA_FLOOR,
                iterations_used: it,
                converged: false,
            });
        }
        if (quotient - prev).abs() < tol * quotient {
            return Ok(SpectralBound {
                lambda: SAFETY_FACTOR * quotient,
                iterations_used: it,
                converged: true,
            });
        }
        prev = quotient;
        x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi = gi / ng);
    }
    Ok(SpectralBound {
        lambda: (SAFETY_FACTOR * quotient).max(LAMBDA_FLOOR),
        iterations_used: max_iter,
        converged: false,
    })
}
