//! Dense real matrices and the spectral routines the rest of the crate
//! relies on.
//!
//! Eigenvalues of non-symmetric matrices come from a Householder reduction
//! to upper Hessenberg form followed by Francis double-shift QR sweeps
//! (the EISPACK `orthes`/`hqr` pair). Singular values and symmetric
//! eigenvalues are delegated to `nalgebra`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Threshold used to decide whether a computed eigenvalue is real:
/// `|im| <= REAL_TOL * (1 + |re|)`.
pub const REAL_TOL: f64 = 1e-9;

/// Eigen iteration cap, in QR sweeps per matrix dimension.
pub const SWEEPS_PER_DIM: usize = 100;

/// Dense row-major real matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "matrix entry ({}, {}) is {}",
                pos / cols.max(1),
                pos % cols.max(1),
                data[pos]
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(
            r,
            c,
            rows.iter().flat_map(|row| row.iter().copied()).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// 1x1 matrix.
    pub fn scalar(v: f64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Matrix product. Panics if the inner dimensions disagree.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product. Panics on length mismatch.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(
            self.cols,
            v.len(),
            "matvec: {} columns, vector of {}",
            self.cols,
            v.len()
        );
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Writes `self * v` into `out` without allocating.
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(self.cols, v.len());
        assert_eq!(self.rows, out.len());
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "elementwise shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Assembles a matrix from a grid of blocks. Every block in a block-row
    /// must share its row count and every block in a block-column its
    /// column count.
    pub fn from_blocks(blocks: &[Vec<&Matrix>]) -> Result<Matrix> {
        let n_block_rows = blocks.len();
        let n_block_cols = blocks.first().map_or(0, |r| r.len());
        if blocks.iter().any(|r| r.len() != n_block_cols) {
            return Err(Error::Dimension("ragged block grid".into()));
        }
        let row_heights: Vec<usize> = blocks.iter().map(|r| r[0].rows).collect();
        let col_widths: Vec<usize> = (0..n_block_cols).map(|j| blocks[0][j].cols).collect();
        for (bi, r) in blocks.iter().enumerate() {
            for (bj, b) in r.iter().enumerate() {
                if b.rows != row_heights[bi] || b.cols != col_widths[bj] {
                    return Err(Error::Dimension(format!(
                        "block ({bi}, {bj}) is {}x{}, expected {}x{}",
                        b.rows, b.cols, row_heights[bi], col_widths[bj]
                    )));
                }
            }
        }
        let total_rows: usize = row_heights.iter().sum();
        let total_cols: usize = col_widths.iter().sum();
        let mut out = Matrix::zeros(total_rows, total_cols);
        let mut r0 = 0;
        for bi in 0..n_block_rows {
            let mut c0 = 0;
            for bj in 0..n_block_cols {
                let b = blocks[bi][bj];
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out[(r0 + i, c0 + j)] = b[(i, j)];
                    }
                }
                c0 += col_widths[bj];
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }

    /// Copies the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Matrix {
        let mut out = Matrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }

    /// Text form: a `rows cols` line followed by one line per row, entries
    /// in scientific notation with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Matrix> {
        let mut lines = text.lines().enumerate();
        let (m, _) = parse_matrix_lines(&mut lines)?;
        Ok(m)
    }
}

/// Reads one matrix block (header plus rows) from a numbered line iterator,
/// skipping blank lines. Returns the matrix and the last line number used.
pub(crate) fn parse_matrix_lines<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<(Matrix, usize)> {
    let mut next_line = || lines.find(|(_, l)| !l.trim().is_empty());
    let (hline, header) = next_line().ok_or(Error::Parse {
        line: 0,
        msg: "missing matrix header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|e| Error::Parse {
            line: hline + 1,
            msg: format!("bad dimension {s:?}: {e}"),
        })
    };
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: hline + 1,
            msg: format!("expected \"rows cols\", got {header:?}"),
        });
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let mut data = Vec::with_capacity(rows * cols);
    let mut last = hline;
    for r in 0..rows {
        let (ln, line) = next_line().ok_or(Error::Parse {
            line: last + 2,
            msg: format!("expected {rows} rows, found {r}"),
        })?;
        last = ln;
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|e| Error::Parse {
                line: ln + 1,
                msg: format!("bad entry {tok:?}: {e}"),
            })?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(Error::Parse {
                line: ln + 1,
                msg: format!("expected {cols} entries, found {}", data.len() - before),
            });
        }
    }
    let m = Matrix::new(rows, cols, data).map_err(|e| Error::Parse {
        line: hline + 1,
        msg: e.to_string(),
    })?;
    Ok((m, last))
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Whether a computed eigenvalue counts as real.
pub fn is_real(z: Complex64) -> bool {
    z.im.abs() <= REAL_TOL * (1.0 + z.re.abs())
}

/// Eigenvalues of a square matrix with algebraic multiplicity, sorted by
/// descending modulus, then descending real part, then descending
/// imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
    source_dim: usize,
}

impl Spectrum {
    pub fn new(mut values: Vec<Complex64>, source_dim: usize) -> Self {
        values.sort_by(spectrum_order);
        Self { values, source_dim }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest modulus; 0 for an empty spectrum.
    pub fn radius(&self) -> f64 {
        self.values.first().map_or(0.0, |z| z.norm())
    }

    pub fn real_values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.values.iter().copied().filter(|z| is_real(*z))
    }

    pub fn complex_values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.values.iter().copied().filter(|z| !is_real(*z))
    }
}

fn spectrum_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

pub fn eigenvalues(m: &Matrix) -> Result<Spectrum> {
    if !m.is_square() || m.rows == 0 {
        return Err(Error::Dimension(format!(
            "eigenvalues need a non-empty square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalue input".into()));
    }
    let n = m.rows;
    let mut h = m.data.clone();
    hessenberg_reduce(&mut h, n);
    let values = hessenberg_qr_eigenvalues(&mut h, n)?;
    Ok(Spectrum::new(values, n))
}

pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.radius())
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.rows == 0 || m.cols == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m
        .to_nalgebra()
        .singular_values()
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Eigenvalues of a symmetric matrix in ascending order. Only the lower
/// triangle is read.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{}x{} is not square",
            m.rows, m.cols
        )));
    }
    if m.rows == 0 {
        return Ok(Vec::new());
    }
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(m.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

// Householder reduction of a row-major n x n matrix to upper Hessenberg form,
// in place. Only the similarity transform matters here, so the orthogonal
// factor is not accumulated.
fn hessenberg_reduce(h: &mut [f64], n: usize) {
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[i * n + m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i * n + m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[i * n + j];
            }
            f /= hh;
            for i in m..=high {
                h[i * n + j] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[i * n + j];
            }
            f /= hh;
            for j in m..=high {
                h[i * n + j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[m * n + m - 1] = scale * g;
        for i in m + 1..=high {
            h[i * n + m - 1] = 0.0;
        }
    }
}

// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
// Deflation uses the standard machine-epsilon test relative to the
// neighbouring diagonal entries.
fn hessenberg_qr_eigenvalues(hm: &mut [f64], nn: usize) -> Result<Vec<Complex64>> {
    let idx = |i: usize, j: usize| i * nn + j;
    let eps = f64::EPSILON;
    let cap = SWEEPS_PER_DIM * nn;

    let mut re = vec![0.0; nn];
    let mut im = vec![0.0; nn];
    let mut found = vec![false; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += hm[idx(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    while n >= 0 {
        let nu = n as usize;
        // Find a negligible subdiagonal entry.
        let mut l = nu;
        while l > 0 {
            s = hm[idx(l - 1, l - 1)].abs() + hm[idx(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if hm[idx(l, l - 1)].abs() <= eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            re[nu] = hm[idx(nu, nu)] + exshift;
            im[nu] = 0.0;
            found[nu] = true;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = hm[idx(nu, nu - 1)] * hm[idx(nu - 1, nu)];
            p = (hm[idx(nu - 1, nu - 1)] - hm[idx(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = hm[idx(nu, nu)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = if z != 0.0 { x - w / z } else { x + z };
                im[nu - 1] = 0.0;
                im[nu] = 0.0;
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            found[nu] = true;
            found[nu - 1] = true;
            n -= 2;
            iter = 0;
        } else {
            if total_iter >= cap {
                let partial = (0..nn)
                    .filter(|&i| found[i])
                    .map(|i| Complex64::new(re[i], im[i]))
                    .collect();
                return Err(Error::EigenNoConvergence {
                    iterations: total_iter,
                    dim: nn,
                    partial,
                });
            }
            x = hm[idx(nu, nu)];
            y = hm[idx(nu - 1, nu - 1)];
            w = hm[idx(nu, nu - 1)] * hm[idx(nu - 1, nu)];

            // Exceptional shifts break cycles on pathological inputs.
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    hm[idx(i, i)] -= x;
                }
                s = hm[idx(nu, nu - 1)].abs() + hm[idx(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        hm[idx(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iter += 1;

            // Look for two consecutive small subdiagonal entries.
            let mut m = nu - 2;
            loop {
                z = hm[idx(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / hm[idx(m + 1, m)] + hm[idx(m, m + 1)];
                q = hm[idx(m + 1, m + 1)] - z - r - s;
                r = hm[idx(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = hm[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let rhs = eps
                    * (p.abs()
                        * (hm[idx(m - 1, m - 1)].abs() + z.abs() + hm[idx(m + 1, m + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                hm[idx(i, i - 2)] = 0.0;
                if i > m + 2 {
                    hm[idx(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows/columns l..=n.
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = hm[idx(k, k - 1)];
                    q = hm[idx(k + 1, k - 1)];
                    r = if notlast { hm[idx(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        hm[idx(k, k - 1)] = -s * x;
                    } else if l != m {
                        hm[idx(k, k - 1)] = -hm[idx(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..=nu {
                        p = hm[idx(k, j)] + q * hm[idx(k + 1, j)];
                        if notlast {
                            p += r * hm[idx(k + 2, j)];
                            hm[idx(k + 2, j)] -= p * z;
                        }
                        hm[idx(k, j)] -= p * x;
                        hm[idx(k + 1, j)] -= p * y;
                    }
                    for i in l..=nu.min(k + 3) {
                        p = x * hm[idx(i, k)] + y * hm[idx(i, k + 1)];
                        if notlast {
                            p += z * hm[idx(i, k + 2)];
                            hm[idx(i, k + 2)] -= p * r;
                        }
                        hm[idx(i, k)] -= p;
                        hm[idx(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }

    Ok(re
        .into_iter()
        .zip(im)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}
