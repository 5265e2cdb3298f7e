//! Small dense real matrices.
//!
//! Everything here targets the tiny dimensions of AR models (d up to a few
//! dozen): storage is row-major `Vec<f64>`, products are naive triple loops
//! and the Lyapunov equation is solved exactly on its vectorized form.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix stored row-major. All entries are finite.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Dense real vector. All entries are finite.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidArgument(format!(
            "non-finite entry at index {i}"
        ))),
        None => Ok(()),
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "Matrix::new",
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                op: "Matrix::from_rows",
                expected: format!("rows of length {m}"),
                found: format!("row of length {}", bad.len()),
            });
        }
        Self::new(n, m, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// `v v^T`.
    pub fn outer(v: &Vector) -> Self {
        let n = v.dim();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j];
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Self::new(n, n, data)
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

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "Matrix::add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "Matrix::sub", |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op,
                expected: format!("{}x{}", self.rows, self.cols),
                found: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..i).all(|j| (self.data[i * self.cols + j] - self.data[j * self.cols + i]).abs() <= tol)
            })
    }

    /// `(M + M^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        debug_assert!(self.is_square());
        let n = self.rows;
        let mut s = self.clone();
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                s.data[i * n + j] = avg;
                s.data[j * n + i] = avg;
            }
        }
        s
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch {
                op: "Matrix::mul_vec",
                expected: format!("vector of dim {}", self.cols),
                found: format!("vector of dim {}", v.dim()),
            });
        }
        let mut out = vec![0.0; self.rows];
        mat_vec_into(self, v.as_slice(), &mut out);
        Ok(Vector(out))
    }

    /// `M^k` by repeated squaring. `M^0 = I`.
    pub fn pow(&self, k: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "Matrix::pow",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = mat_mul(&result, &base)?;
            }
            k >>= 1;
            if k > 0 {
                base = mat_mul(&base, &base)?;
            }
        }
        Ok(result)
    }

    /// Quadratic form `v^T M v`.
    pub fn quadratic_form(&self, v: &Vector) -> Result<f64> {
        Ok(v.dot(&self.mul_vec(v)?))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "matrix index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.cols)).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

/// `out = m * x`. Row sums accumulate left to right from `0.0`.
#[inline]
pub(crate) fn mat_vec_into(m: &Matrix, x: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(m.data.chunks_exact(m.cols)) {
        let mut acc = 0.0;
        for (a, xv) in row.iter().zip(x) {
            acc += a * xv;
        }
        *o = acc;
    }
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("vector dimension must be positive".into()));
        }
        check_finite(&entries)?;
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self(vec![0.0; dim])
    }

    /// Standard basis vector `e_{index}` (zero-based).
    pub fn unit(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|v| v * s).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                op: "Vector::sub",
                expected: format!("dim {}", self.dim()),
                found: format!("dim {}", other.dim()),
            });
        }
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "mat_mul",
            expected: format!("{} rows in right operand", a.cols),
            found: format!("{}", b.rows),
        });
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += aik * bv;
            }
        }
    }
    Ok(out)
}

/// `a q a^T`.
pub(crate) fn congruence(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    mat_mul(&mat_mul(a, q)?, &a.transpose())
}

fn require_square(op: &'static str, a: &Matrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            op,
            rows: a.rows,
            cols: a.cols,
        })
    }
}

/// Largest eigenvalue modulus, complex pairs included.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    require_square("spectral_radius", a)?;
    if a.rows == 1 {
        return Ok(a.data[0].abs());
    }
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let eig = eigenvalues(a)?;
    Ok(eig.iter().fold(0.0_f64, |r, (re, im)| r.max(re.hypot(*im))))
}

/// Eigenvalues `(re, im)` of a real square matrix: balancing, reduction to
/// upper Hessenberg form by stabilized elimination, then Francis
/// double-shift QR with exceptional shifts after 10 and 20 stalled sweeps.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<(f64, f64)>> {
    require_square("eigenvalues", a)?;
    let n = a.rows;
    // 1-based working copy keeps the index arithmetic readable.
    let mut h = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a.data[i * n + j];
        }
    }
    balance(&mut h, n);
    to_hessenberg(&mut h, n);
    hessenberg_qr(&mut h, n)
}

fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 1..=n {
                    a[i][j] *= g;
                }
                for j in 1..=n {
                    a[j][i] *= f;
                }
            }
        }
    }
}

fn to_hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0_f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in m - 1..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in m + 1..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
    // Drop the elimination multipliers stored below the subdiagonal.
    for i in 3..=n {
        for j in 1..i - 1 {
            a[i][j] = 0.0;
        }
    }
}

fn hessenberg_qr(a: &mut [Vec<f64>], n: usize) -> Result<Vec<(f64, f64)>> {
    const MAX_SWEEPS: usize = 60;
    let sign = |x: f64, s: f64| if s >= 0.0 { x.abs() } else { -x.abs() };
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nn - 1][nn - 1];
            let mut w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }
            if its == MAX_SWEEPS {
                return Err(Error::EigenNoConvergence);
            }
            if its % 10 == 0 && its > 0 {
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r, mut z);
            let mut m = nn - 2;
            loop {
                z = a[m][m];
                r = x - z;
                let s = y - z;
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - r - s;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nn - 1 { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k != nn - 1 {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a[i][k] + y * a[i][k + 1];
                        if k != nn - 1 {
                            pp += z * a[i][k + 2];
                            a[i][k + 2] -= pp * r;
                        }
                        a[i][k + 1] -= pp * q;
                        a[i][k] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok((1..=n).map(|i| (wr[i], wi[i])).collect())
}

/// `Ok(rho)` when `rho(a) < 1`, otherwise the no-stationary-distribution error.
pub fn require_stable(a: &Matrix) -> Result<f64> {
    let rho = spectral_radius(a)?;
    if rho < 1.0 {
        Ok(rho)
    } else {
        Err(Error::NoStationaryDistribution { spectral_radius: rho })
    }
}

fn check_lyapunov_inputs(op: &'static str, a: &Matrix, q: &Matrix) -> Result<()> {
    require_square(op, a)?;
    require_square(op, q)?;
    if a.rows != q.rows {
        return Err(Error::DimensionMismatch {
            op,
            expected: format!("{n}x{n} noise covariance", n = a.rows),
            found: format!("{}x{}", q.rows, q.cols),
        });
    }
    let tol = 1e-12 * (1.0 + q.max_abs());
    if !q.is_symmetric(tol) {
        return Err(Error::InvalidArgument(format!("{op}: q must be symmetric")));
    }
    if (0..q.rows).any(|i| q[(i, i)] < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{op}: q must be positive semidefinite"
        )));
    }
    Ok(())
}

/// Solves `S = a S a^T + q` for the stationary covariance `S`.
///
/// The equation is linear in `vec(S)`: `(I - a (x) a) vec(S) = vec(q)`. For the
/// dimensions used here that d^2 x d^2 system is small enough to solve by
/// dense Gaussian elimination, which gives `S` to rounding accuracy. The
/// result is symmetrized before returning.
pub fn solve_discrete_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    check_lyapunov_inputs("solve_discrete_lyapunov", a, q)?;
    require_stable(a)?;
    let n = a.rows;
    let m = n * n;
    // Row (i,j) of I - a (x) a acting on row-major vec(S):
    // S_ij - sum_{k,l} a_ik a_jl S_kl = q_ij.
    let mut sys = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let r = i * n + j;
            for k in 0..n {
                let aik = a.data[i * n + k];
                for l in 0..n {
                    sys[r * m + k * n + l] -= aik * a.data[j * n + l];
                }
            }
            sys[r * m + r] += 1.0;
        }
    }
    let x = solve_dense(m, sys, q.data.clone(), "solve_discrete_lyapunov")?;
    Ok(Matrix {
        rows: n,
        cols: n,
        data: x,
    }
    .symmetrized())
}

/// Reference solution of the same equation as the partial sums
/// `sum_k a^k q (a^T)^k`, stopped once a term's max-norm drops below `tol`.
///
/// Uses only matrix products, no linear solve. Divergence (spectral radius
/// >= 1) shows up as terms that blow up or never shrink below `tol` within
/// the iteration budget.
pub fn lyapunov_series_oracle(a: &Matrix, q: &Matrix, tol: f64) -> Result<Matrix> {
    const MAX_TERMS: usize = 1_000_000;
    const BLOWUP: f64 = 1e150;
    check_lyapunov_inputs("lyapunov_series_oracle", a, q)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let at = a.transpose();
    let mut term = q.clone();
    let mut sum = q.clone();
    for k in 1..=MAX_TERMS {
        term = mat_mul(&mat_mul(a, &term)?, &at)?;
        let size = term.max_abs();
        if !size.is_finite() || size > BLOWUP {
            return Err(Error::Divergent { iterations: k });
        }
        sum = sum.add(&term)?;
        if size < tol {
            return Ok(sum.symmetrized());
        }
    }
    Err(Error::Divergent {
        iterations: MAX_TERMS,
    })
}

/// Gaussian elimination with partial pivoting on a row-major `n x n` system.
pub(crate) fn solve_dense(n: usize, mut a: Vec<f64>, mut b: Vec<f64>, op: &'static str) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Singular(op));
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty pivot range");
        if a[pivot * n + col].abs() <= 1e-14 * scale {
            return Err(Error::Singular(op));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Factor a symmetric positive semidefinite `q` as `L L^T` with `L` of
/// shape `d x r`, `r = rank(q)`, by Cholesky with diagonal pivoting.
/// Pivots below `1e-12 * max|q|` are treated as zero.
pub fn psd_factor(q: &Matrix) -> Result<Matrix> {
    require_square("psd_factor", q)?;
    let n = q.rows;
    let tol = 1e-12 * q.max_abs().max(f64::MIN_POSITIVE);
    let mut work = q.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    // Columns of L in permuted coordinates.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let (piv, dmax) = (k..n)
            .map(|i| (i, work[perm[i] * n + perm[i]]))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty");
        if dmax <= tol {
            if (k..n).any(|i| work[perm[i] * n + perm[i]] < -tol) {
                return Err(Error::InvalidArgument(
                    "psd_factor: matrix is not positive semidefinite".into(),
                ));
            }
            break;
        }
        perm.swap(k, piv);
        let pk = perm[k];
        let root = dmax.sqrt();
        let mut col = vec![0.0; n];
        col[pk] = root;
        for &pi in &perm[k + 1..] {
            col[pi] = work[pi * n + pk] / root;
        }
        for &pi in &perm[k..] {
            for &pj in &perm[k..] {
                work[pi * n + pj] -= col[pi] * col[pj];
            }
        }
        cols.push(col);
    }
    if cols.is_empty() {
        return Err(Error::InvalidArgument("psd_factor: matrix is zero".into()));
    }
    let r = cols.len();
    let mut data = vec![0.0; n * r];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            data[i * r + j] = col[i];
        }
    }
    Matrix::new(n, r, data)
}
