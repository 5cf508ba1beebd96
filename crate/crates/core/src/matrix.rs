//! Dense complex matrices, their nonzero patterns, and the two input formats.

use std::fmt;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Complex double-precision entry type used throughout the crate.
pub type Scalar = Complex64;

/// Dense row-major matrix of [`Scalar`] entries.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Scalar::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::new(1.0, 0.0);
        }
        m
    }

    /// The all-ones matrix `J_n`.
    pub fn ones(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            data: vec![Scalar::new(1.0, 0.0); n * n],
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Scalar::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data. Fails if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a real matrix from nested rows. Panics on ragged rows; intended for
    /// literals in code and tests. Use [`load_matrix`] for untrusted input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend(r.iter().map(|&x| Scalar::new(x, 0.0)));
        }
        Self {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    /// Block-diagonal matrix with the given blocks on the diagonal.
    pub fn block_diagonal(blocks: &[Matrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(n, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
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
    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix, or a shape error naming `what`.
    pub fn square_dim(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::Shape(format!(
                "{what} requires a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Real parts in row-major order.
    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    /// Largest entry magnitude, `‖A‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
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

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Scalar::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for (i, &src) in perm.iter().enumerate() {
            out.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(self.row(src));
        }
        out
    }

    /// Columns reordered so that column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, &src) in perm.iter().enumerate() {
                out[(i, j)] = self[(i, src)];
            }
        }
        out
    }

    /// Checks that every entry is a nonnegative real number.
    pub fn require_nonnegative_real(&self, estimator: &str) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if z.im != 0.0 {
                    return Err(Error::Domain(format!(
                        "{estimator} needs real entries; entry ({i},{j}) is {z}"
                    )));
                }
                if z.re < 0.0 {
                    return Err(Error::Domain(format!(
                        "negative entry {} at ({i},{j}); {estimator} takes square roots of entries, \
                         use a gauge estimator or a custom scheme with fixed multipliers instead",
                        z.re
                    )));
                }
            }
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| {
                    if z.im == 0.0 {
                        format!("{}", z.re)
                    } else {
                        format!("{z}")
                    }
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// One nonzero entry of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonzero {
    pub row: usize,
    pub col: usize,
    pub value: Scalar,
}

/// The nonzero entries of a matrix in row-major order.
///
/// The order fixes the meaning of a per-entry configuration index, so it must
/// never depend on anything but the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NonzeroPattern {
    pub entries: Vec<Nonzero>,
}

impl NonzeroPattern {
    /// Number of nonzero entries.
    pub fn m(&self) -> usize {
        self.entries.len()
    }

    /// Position of `(row, col)` in the pattern, if it is a nonzero.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        self.entries
            .binary_search_by(|e| (e.row, e.col).cmp(&(row, col)))
            .ok()
    }
}

/// Collects the nonzero entries of `a` in row-major order.
pub fn nonzeros(a: &Matrix) -> NonzeroPattern {
    let mut entries = Vec::new();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let value = a[(i, j)];
            if value != Scalar::new(0.0, 0.0) {
                entries.push(Nonzero {
                    row: i,
                    col: j,
                    value,
                });
            }
        }
    }
    NonzeroPattern { entries }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonMatrix {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

/// Parses a matrix from either the whitespace text format or the JSON format.
///
/// Text: one row per line, whitespace-separated reals, `#` starts a comment
/// line. JSON: `{"re": [[..]], "im": [[..]]}` with `im` optional.
pub fn load_matrix(source: &str) -> Result<Matrix> {
    let trimmed = source.trim_start();
    if trimmed.is_empty() {
        return Err(Error::EmptyInput);
    }
    if trimmed.starts_with('{') {
        load_json(source)
    } else {
        load_text(source)
    }
}

fn load_text(source: &str) -> Result<Matrix> {
    let mut cols: Option<usize> = None;
    let mut rows = 0;
    let mut data = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut count = 0;
        for tok in line.split_whitespace() {
            let x: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("not a number: {tok:?}"),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("non-finite value {tok:?}"),
                });
            }
            data.push(Scalar::new(x, 0.0));
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("ragged row: expected {c} entries, found {count}"),
                })
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::EmptyInput)?;
    Matrix::from_vec(rows, cols, data)
}

fn load_json(source: &str) -> Result<Matrix> {
    let doc: JsonMatrix = serde_json::from_str(source).map_err(|e| Error::Parse {
        line: e.line(),
        reason: e.to_string(),
    })?;
    let rows = doc.re.len();
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    let cols = doc.re[0].len();
    let ragged = |name: &str, r: usize| Error::Parse {
        line: 1,
        reason: format!("ragged \"{name}\" row {r}"),
    };
    if let Some(r) = doc.re.iter().position(|row| row.len() != cols) {
        return Err(ragged("re", r));
    }
    if let Some(im) = &doc.im {
        if im.len() != rows {
            return Err(Error::Parse {
                line: 1,
                reason: format!("\"im\" has {} rows, \"re\" has {rows}", im.len()),
            });
        }
        if let Some(r) = im.iter().position(|row| row.len() != cols) {
            return Err(ragged("im", r));
        }
    }
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let im = doc.im.as_ref().map_or(0.0, |m| m[i][j]);
            data.push(Scalar::new(doc.re[i][j], im));
        }
    }
    Matrix::from_vec(rows, cols, data)
}
