//! Autoregressive process models.
//!
//! [`ArModel`] is the vector AR(1) recursion `X_t = A X_{t-1} + eps * L xi_t`
//! with `L L^T = Q` the noise covariance. Two noise shapes occur: full
//! identity noise, and noise entering only the first coordinate, which is
//! what the companion-form embedding of a scalar AR(n) produces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, congruence, mat_vec_into, Matrix, Vector};

/// How the standard normal noise vector enters the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseShape {
    /// `Q = I`: every coordinate receives independent noise.
    #[default]
    Identity,
    /// `Q = e_1 e_1^T`: noise enters coordinate 1 only.
    FirstCoordinate,
}

impl NoiseShape {
    pub fn covariance(self, dim: usize) -> Matrix {
        match self {
            NoiseShape::Identity => Matrix::identity(dim),
            NoiseShape::FirstCoordinate => Matrix::outer(&Vector::unit(dim, 0)),
        }
    }

    /// Number of standard normal draws consumed per time step.
    pub fn draws_per_step(self, dim: usize) -> usize {
        match self {
            NoiseShape::Identity => dim,
            NoiseShape::FirstCoordinate => 1,
        }
    }
}

/// Vector AR(1) model `X_t = A X_{t-1} + eps * xi_t`, `X_0 = x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    a: Matrix,
    epsilon: f64,
    x0: Vector,
    noise: NoiseShape,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )))
    }
}

impl ArModel {
    pub fn new(a: Matrix, epsilon: f64, x0: Vector) -> Result<Self> {
        Self::with_noise(a, epsilon, x0, NoiseShape::Identity)
    }

    pub fn with_noise(a: Matrix, epsilon: f64, x0: Vector, noise: NoiseShape) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                op: "ArModel::new",
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if x0.dim() != a.rows() {
            return Err(Error::DimensionMismatch {
                op: "ArModel::new",
                expected: format!("start of dim {}", a.rows()),
                found: format!("dim {}", x0.dim()),
            });
        }
        check_epsilon(epsilon)?;
        Ok(Self { a, epsilon, x0, noise })
    }

    /// Started at the origin.
    pub fn at_origin(a: Matrix, epsilon: f64) -> Result<Self> {
        let d = a.rows();
        Self::new(a, epsilon, Vector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn drift(&self) -> &Matrix {
        &self.a
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn start(&self) -> &Vector {
        &self.x0
    }

    pub fn noise(&self) -> NoiseShape {
        self.noise
    }

    pub fn noise_covariance(&self) -> Matrix {
        self.noise.covariance(self.dim())
    }

    /// Same model with a different noise scale.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            ..self.clone()
        })
    }

    /// One step: `A x + eps * L noise`. For identity noise `L = I`; for
    /// first-coordinate noise only `noise[0]` is used.
    pub fn step(&self, x: &Vector, noise: &Vector) -> Result<Vector> {
        let d = self.dim();
        if x.dim() != d || noise.dim() != d {
            return Err(Error::DimensionMismatch {
                op: "ArModel::step",
                expected: format!("state and noise of dim {d}"),
                found: format!("{} and {}", x.dim(), noise.dim()),
            });
        }
        let mut out = vec![0.0; d];
        self.step_into(x.as_slice(), &noise.as_slice()[..self.noise.draws_per_step(d)], &mut out);
        Vector::new(out)
    }

    /// Allocation-free step used by the simulators. `noise` holds exactly
    /// `draws_per_step` values.
    #[inline]
    pub(crate) fn step_into(&self, x: &[f64], noise: &[f64], out: &mut [f64]) {
        mat_vec_into(&self.a, x, out);
        for (o, z) in out.iter_mut().zip(noise) {
            *o += self.epsilon * z;
        }
    }

    /// `E X_t = A^t x0`.
    pub fn mean_at(&self, t: usize) -> Vector {
        let mut x = self.x0.clone();
        for _ in 0..t {
            x = self.a.mul_vec(&x).expect("square drift");
        }
        x
    }
}

/// Scalar AR(n) model `X_t = b_1 X_{t-1} + ... + b_n X_{t-n} + eps * xi_t`
/// with start values `X_0 .. X_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArnModel {
    b: Vec<f64>,
    epsilon: f64,
    starts: Vec<f64>,
}

impl ArnModel {
    pub fn new(b: Vec<f64>, epsilon: f64, starts: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidArgument("AR(n) needs at least one coefficient".into()));
        }
        if starts.len() != b.len() {
            return Err(Error::DimensionMismatch {
                op: "ArnModel::new",
                expected: format!("{} start values", b.len()),
                found: format!("{}", starts.len()),
            });
        }
        if b.iter().chain(&starts).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("AR(n) parameters must be finite".into()));
        }
        check_epsilon(epsilon)?;
        Ok(Self { b, epsilon, starts })
    }

    pub fn order(&self) -> usize {
        self.b.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.b
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `x_0, .., x_{n-1}` in time order.
    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    /// Next value given the last `n` values, most recent first
    /// (`recent[0] = X_{t-1}`).
    #[inline]
    pub fn next_value(&self, recent: &[f64], xi: f64) -> f64 {
        let mut acc = 0.0;
        for (b, x) in self.b.iter().zip(recent) {
            acc += b * x;
        }
        acc + self.epsilon * xi
    }
}

/// A discrete path `y_0, y_1, .., y_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    dim: usize,
    points: Vec<Vector>,
}

impl Path {
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vector::dim)
            .ok_or_else(|| Error::InvalidArgument("path must contain at least y_0".into()))?;
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                op: "Path::new",
                expected: format!("points of dim {dim}"),
                found: format!("dim {}", p.dim()),
            });
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    /// Index of the last point, `T`.
    pub fn horizon(&self) -> usize {
        self.points.len() - 1
    }

    pub fn last(&self) -> &Vector {
        self.points.last().expect("paths are non-empty")
    }
}

/// `[S_1, .., S_{t_max}]` with `S_1 = I`, `S_t = A S_{t-1} A^T + I`.
pub fn covariance_sequence(a: &Matrix, t_max: usize) -> Result<Vec<Matrix>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op: "covariance_sequence",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    covariance_sequence_with(a, &Matrix::identity(a.rows()), t_max)
}

/// Same recursion with general noise covariance: `S_1 = Q`,
/// `S_t = A S_{t-1} A^T + Q`. `S_t` is the covariance of `X_t / eps` when
/// `X_0` is deterministic.
pub fn covariance_sequence_with(a: &Matrix, q: &Matrix, t_max: usize) -> Result<Vec<Matrix>> {
    if t_max < 1 {
        return Err(Error::InvalidArgument("t_max must be at least 1".into()));
    }
    if !a.is_square() || !q.is_square() || a.rows() != q.rows() {
        return Err(Error::DimensionMismatch {
            op: "covariance_sequence",
            expected: format!("square a and q of equal size"),
            found: format!("{}x{} and {}x{}", a.rows(), a.cols(), q.rows(), q.cols()),
        });
    }
    let mut out = Vec::with_capacity(t_max);
    out.push(q.clone());
    for _ in 1..t_max {
        let prev = out.last().expect("non-empty");
        let next = congruence(a, prev)?.add(q)?;
        out.push(next);
    }
    Ok(out)
}

/// Companion matrix with first row `b` and ones on the subdiagonal.
pub fn companion_matrix(b: &[f64]) -> Result<Matrix> {
    let n = b.len();
    if n == 0 {
        return Err(Error::InvalidArgument("companion_matrix: empty coefficient list".into()));
    }
    let mut data = vec![0.0; n * n];
    data[..n].copy_from_slice(b);
    for i in 1..n {
        data[i * n + i - 1] = 1.0;
    }
    Matrix::new(n, n, data)
}

/// Embeds AR(n) as the vector AR(1) `Y_t = B Y_{t-1} + eps (xi_t, 0, .., 0)^T`
/// with `Y_{n-1} = (x_{n-1}, .., x_0)^T`. Returns the vector model
/// (first-coordinate noise) and the exit direction `e_1`.
pub fn embed_arn(model: &ArnModel) -> Result<(ArModel, Vector)> {
    let n = model.order();
    let b = companion_matrix(model.coefficients())?;
    let start: Vec<f64> = model.starts().iter().rev().copied().collect();
    let vector = ArModel::with_noise(b, model.epsilon(), Vector::new(start)?, NoiseShape::FirstCoordinate)?;
    Ok((vector, Vector::unit(n, 0)))
}

/// Stationary variance (per unit `eps^2`) of a stable AR(n):
/// `e_1^T S e_1` with `S = B S B^T + e_1 e_1^T`.
pub fn stationary_variance_arn(b: &[f64]) -> Result<f64> {
    let companion = companion_matrix(b)?;
    let n = b.len();
    let s = matcore::solve_discrete_lyapunov(&companion, &NoiseShape::FirstCoordinate.covariance(n))?;
    Ok(s[(0, 0)])
}
