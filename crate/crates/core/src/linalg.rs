//! Dense row-major matrices and the SVD-based least-squares solver used by
//! every closed-form training routine.
//!
//! The factorization itself is delegated to `faer` (sequential mode, so results
//! never depend on thread scheduling). Rank truncation, the pseudo-inverse and
//! the minimum-norm solve are built here on top of the thin factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

/// Row-major dense matrix of finite `f64` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::new(raw.rows, raw.cols, raw.values)
    }
}

impl Matrix {
    /// Builds a matrix from row-major values, rejecting bad lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::contract(format!("{rows}x{cols} overflows usize")))?;
        if values.len() != expected {
            return Err(Error::contract(format!(
                "{rows}x{cols} matrix needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "non-finite entry {} at ({}, {})",
                values[pos],
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub(crate) fn from_values_unchecked(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_values_unchecked(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// # Panics
    /// If `f` yields a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry {v} at ({i}, {j})");
                values.push(v);
            }
        }
        Self::from_values_unchecked(rows, cols, values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::contract(format!(
                "row {i} has {} columns, expected {cols}",
                rows[i].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut values = vec![0.0; n * n];
        for (i, &e) in entries.iter().enumerate() {
            values[i * n + i] = e;
        }
        Self::new(n, n, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = vec![0.0; self.values.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.values[i * self.cols + j];
            }
        }
        Self::from_values_unchecked(self.cols, self.rows, out)
    }

    /// `self · other`
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::contract(format!(
                "matmul: {}x{} · {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let n = other.cols;
        let mut out = vec![0.0; self.rows * n];
        exec::for_each_row_mut(&mut out, n, |i, out_row| {
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(k), out_row);
                }
            }
        });
        Ok(Self::from_values_unchecked(self.rows, n, out))
    }

    /// `self · otherᵀ`, i.e. row-against-row dot products.
    pub fn matmul_transpose(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::contract(format!(
                "matmul_transpose: {}x{} · ({}x{})ᵀ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let n = other.rows;
        let mut out = vec![0.0; self.rows * n];
        exec::for_each_row_mut(&mut out, n, |i, out_row| {
            let a = self.row(i);
            for (j, o) in out_row.iter_mut().enumerate() {
                *o = dot(a, other.row(j));
            }
        });
        Ok(Self::from_values_unchecked(self.rows, n, out))
    }

    /// `selfᵀ · other`
    pub fn transpose_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::contract(format!(
                "transpose_matmul: ({}x{})ᵀ · {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let n = other.cols;
        let mut out = vec![0.0; self.cols * n];
        exec::for_each_row_mut(&mut out, n, |i, out_row| {
            for k in 0..self.rows {
                let a = self.values[k * self.cols + i];
                if a != 0.0 {
                    axpy(a, other.row(k), out_row);
                }
            }
        });
        Ok(Self::from_values_unchecked(self.cols, n, out))
    }

    /// Column-wise concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::contract(format!(
                "hstack: {} rows vs {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut values = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            values.extend_from_slice(self.row(i));
            values.extend_from_slice(other.row(i));
        }
        Ok(Self::from_values_unchecked(self.rows, cols, values))
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Matrix> {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::contract(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Ok(Self::from_values_unchecked(
            indices.len(),
            self.cols,
            values,
        ))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`
    pub fn frobenius_distance(&self, other: &Matrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::contract(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::contract(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Four independent accumulators so the loop vectorizes; the summation order is
/// fixed, so results do not depend on the execution backend.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Thin singular value decomposition `A = U · diag(s) · Vᵀ`.
///
/// `u` is `rows × r`, `vt` is `r × cols`, with `r = min(rows, cols)`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub vt: Matrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.u.clone();
        let r = self.s.len();
        for i in 0..scaled.rows {
            for (k, &sk) in self.s.iter().enumerate() {
                scaled.values[i * r + k] *= sk;
            }
        }
        scaled
            .matmul(&self.vt)
            .expect("thin factors have conforming shapes")
    }

    /// Singular values above `tol` count toward the numerical rank.
    pub fn rank(&self, tol: f64) -> usize {
        self.s.iter().take_while(|&&s| s > tol).count()
    }

    /// The automatic cutoff `max(rows, cols) · ε · σ_max`.
    pub fn default_tolerance(&self) -> f64 {
        let dim = self.u.rows.max(self.vt.cols) as f64;
        dim * f64::EPSILON * self.s.first().copied().unwrap_or(0.0)
    }
}

pub fn svd(a: &Matrix) -> Result<SvdFactors> {
    if a.is_empty() {
        return Err(Error::contract("svd of an empty matrix"));
    }
    let (m, n) = a.shape();
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a.get(i, j));
    let dec = fa
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD of {m}x{n} matrix did not converge: {e:?}")))?;
    let (fu, fv, fs) = (dec.U(), dec.V(), dec.S().column_vector());
    let r = m.min(n);

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| fs[y].abs().total_cmp(&fs[x].abs()));

    let s: Vec<f64> = order.iter().map(|&k| fs[k].abs()).collect();
    let mut u = vec![0.0; m * r];
    let mut vt = vec![0.0; r * n];
    for (dst, &src) in order.iter().enumerate() {
        // faer's singular values are nonnegative; flip the pair if one ever is not.
        let sign = if fs[src] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..m {
            u[i * r + dst] = sign * fu[(i, src)];
        }
        for j in 0..n {
            vt[dst * n + j] = fv[(j, src)];
        }
    }
    if s.iter().chain(&u).chain(&vt).any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "SVD of {m}x{n} matrix produced non-finite factors"
        )));
    }
    Ok(SvdFactors {
        u: Matrix::from_values_unchecked(m, r, u),
        s,
        vt: Matrix::from_values_unchecked(r, n, vt),
    })
}

/// Knobs for [`solve_least_squares`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Singular values at or below this are treated as zero; `0.0` selects
    /// [`SvdFactors::default_tolerance`].
    pub rank_tol: f64,
    /// Tikhonov term λ: solves `(AᵀA + λI)⁻¹AᵀY`. Zero gives the plain pseudo-inverse.
    pub ridge: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rank_tol: 0.0,
            ridge: 0.0,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.rank_tol >= 0.0 && self.rank_tol.is_finite()) {
            return Err(Error::contract(format!(
                "rank_tol must be finite and ≥ 0, got {}",
                self.rank_tol
            )));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::contract(format!(
                "ridge must be finite and ≥ 0, got {}",
                self.ridge
            )));
        }
        Ok(())
    }
}

/// Per-singular-value multipliers `σ/(σ² + λ)` (or `1/σ` when λ = 0), zeroed below the cutoff.
fn inverse_spectrum(f: &SvdFactors, opts: &SolveOptions) -> Vec<f64> {
    let tol = if opts.rank_tol > 0.0 {
        opts.rank_tol
    } else {
        f.default_tolerance()
    };
    f.s.iter()
        .map(|&s| {
            if s <= tol {
                0.0
            } else if opts.ridge > 0.0 {
                s / (s * s + opts.ridge)
            } else {
                1.0 / s
            }
        })
        .collect()
}

/// Moore–Penrose pseudo-inverse via thresholded SVD.
///
/// `rank_tol = 0` selects the automatic cutoff. The all-zero matrix maps to the
/// zero matrix of transposed shape.
pub fn pseudo_inverse(a: &Matrix, rank_tol: f64) -> Result<Matrix> {
    let opts = SolveOptions {
        rank_tol,
        ridge: 0.0,
    };
    opts.validate()?;
    if a.is_empty() {
        return Err(Error::contract("pseudo-inverse of an empty matrix"));
    }
    if a.values.iter().all(|&v| v == 0.0) {
        return Ok(Matrix::zeros(a.cols, a.rows));
    }
    let f = svd(a)?;
    let inv = inverse_spectrum(&f, &opts);
    // S⁺Uᵀ stored as r × rows, then A⁺ = (Vᵀ)ᵀ · (S⁺Uᵀ).
    let ut = f.u.transpose();
    let r = inv.len();
    let mut scaled = ut.values;
    for (k, &w) in inv.iter().enumerate() {
        for v in &mut scaled[k * a.rows..(k + 1) * a.rows] {
            *v *= w;
        }
    }
    let scaled = Matrix::from_values_unchecked(r, a.rows, scaled);
    f.vt.transpose_matmul(&scaled)
}

/// Minimum-norm least squares `P = A⁺ Y`, computed from the SVD without forming `A⁺`.
pub fn solve_min_norm(a: &Matrix, y: &Matrix) -> Result<Matrix> {
    solve_least_squares(a, y, &SolveOptions::default())
}

pub fn solve_least_squares(a: &Matrix, y: &Matrix, opts: &SolveOptions) -> Result<Matrix> {
    opts.validate()?;
    if a.rows != y.rows {
        return Err(Error::contract(format!(
            "least squares: A has {} rows but Y has {}",
            a.rows, y.rows
        )));
    }
    if a.is_empty() {
        return Err(Error::contract("least squares with an empty design matrix"));
    }
    if a.values.iter().all(|&v| v == 0.0) {
        return Ok(Matrix::zeros(a.cols, y.cols));
    }
    let f = svd(a)?;
    let inv = inverse_spectrum(&f, opts);
    let keep = inv.iter().take_while(|&&w| w != 0.0).count();

    // T = diag(inv) · Uᵀ Y restricted to the kept spectrum, then P = V · T.
    let mut t = f.u.transpose_matmul(y)?;
    t.values.truncate(keep * y.cols);
    t.rows = keep;
    for (k, &w) in inv[..keep].iter().enumerate() {
        for v in &mut t.values[k * y.cols..(k + 1) * y.cols] {
            *v *= w;
        }
    }
    let vt_kept =
        Matrix::from_values_unchecked(keep, a.cols, f.vt.values[..keep * a.cols].to_vec());
    vt_kept.transpose_matmul(&t)
}
