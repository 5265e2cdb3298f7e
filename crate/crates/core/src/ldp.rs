//! Large-deviation quantities for exits from `{x : |c^T x| < 1}`.
//!
//! With speed `eps^2` the path measure of the AR process obeys a large
//! deviation principle with the quadratic rate
//!
//! ```text
//! I(y) = 1/2 * sum_t (y_t - A y_{t-1})^T Q^+ (y_t - A y_{t-1})
//! ```
//!
//! (infinite when `y_0 != x_0` or an increment leaves the range of `Q`).
//! Minimizing `I` over paths from the origin with `c^T y_N = 1` gives the
//! finite-horizon exponent `1 / (2 c^T S_N c)`, attained by
//! `y_t = K S_t (A^{N-t})^T c`, `K = 1 / (c^T S_N c)`. Letting `N -> inf`
//! gives the exit-time exponent `1 / (2 c^T S_inf c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, congruence, psd_factor, solve_dense, Matrix, Vector};
use crate::process::{covariance_sequence_with, ArModel, Path};

/// Which side(s) of the strip count as an exit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    /// Exit when `|c^T x| >= level`.
    #[default]
    TwoSided,
    /// Exit when `c^T x >= level`.
    OneSided,
}

/// Linear exit functional: the process exits when `c^T x` reaches `level`
/// (in absolute value for the two-sided variant).
#[derive(Debug, Clone, PartialEq)]
pub struct ExitSpec {
    c: Vector,
    sided: Sidedness,
    level: f64,
}

impl ExitSpec {
    pub fn new(c: Vector, sided: Sidedness, level: f64) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::InvalidArgument("exit direction c must be nonzero".into()));
        }
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "exit level must be positive and finite, got {level}"
            )));
        }
        Ok(Self { c, sided, level })
    }

    /// Two-sided exit at level 1.
    pub fn two_sided(c: Vector) -> Result<Self> {
        Self::new(c, Sidedness::TwoSided, 1.0)
    }

    pub fn c(&self) -> &Vector {
        &self.c
    }

    pub fn sided(&self) -> Sidedness {
        self.sided
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// `c / level`, so that the exit set becomes `|c'^T x| >= 1`.
    pub fn direction(&self) -> Vector {
        self.c.scale(1.0 / self.level)
    }
}

/// Value of the rate function; `Infinite` marks infeasible paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Finite(f64),
    Infinite,
}

impl Rate {
    pub fn finite(self) -> Option<f64> {
        match self {
            Rate::Finite(v) => Some(v),
            Rate::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Rate::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    Steps(usize),
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub horizon: Horizon,
    /// Infimum of the rate function over exiting paths, `1 / (2 * quadratic_form)`.
    pub exponent: f64,
    pub optimal_path: Option<Path>,
    /// `c^T S c` for the covariance `S` used (`S_N` or `S_inf`).
    pub quadratic_form: f64,
}

fn check_dims(op: &'static str, a: &Matrix, q: &Matrix, c: &Vector) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op,
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if q.rows() != a.rows() || q.cols() != a.rows() || c.dim() != a.rows() {
        return Err(Error::DimensionMismatch {
            op,
            expected: format!("q {n}x{n} and c of dim {n}", n = a.rows()),
            found: format!("q {}x{}, c of dim {}", q.rows(), q.cols(), c.dim()),
        });
    }
    if c.is_zero() {
        return Err(Error::InvalidArgument(format!("{op}: c must be nonzero")));
    }
    Ok(())
}

/// Below this (relative to `|c|^2 max|Q|`) the constraint `c^T y_N = 1` is
/// treated as unreachable.
fn reachability_floor(q: &Matrix, c: &Vector) -> f64 {
    1e-13 * c.norm_sq() * q.max_abs()
}

fn path_increments<'a>(path: &'a Path, a: &'a Matrix) -> impl Iterator<Item = Vector> + 'a {
    path.points().windows(2).map(move |w| {
        let pred = a.mul_vec(&w[0]).expect("checked dimensions");
        w[1].sub(&pred).expect("checked dimensions")
    })
}

fn check_path(op: &'static str, path: &Path, a: &Matrix, x0: &Vector) -> Result<()> {
    if !a.is_square() || path.dim() != a.rows() || x0.dim() != a.rows() {
        return Err(Error::DimensionMismatch {
            op,
            expected: format!("path, start and drift of dim {}", path.dim()),
            found: format!("drift {}x{}, start dim {}", a.rows(), a.cols(), x0.dim()),
        });
    }
    Ok(())
}

/// `1/2 sum_{t=1}^T |y_t - A y_{t-1}|^2` for identity noise; `Infinite` if
/// `y_0 != x0`. Beyond `T` the path is continued by `y_t = A y_{t-1}` at no
/// cost.
pub fn rate_function(path: &Path, a: &Matrix, x0: &Vector) -> Result<Rate> {
    check_path("rate_function", path, a, x0)?;
    if &path.points()[0] != x0 {
        return Ok(Rate::Infinite);
    }
    Ok(Rate::Finite(0.5 * path_increments(path, a).map(|z| z.norm_sq()).sum::<f64>()))
}

/// Rate function for noise covariance `q`: increments are measured in the
/// `Q^+` norm and must lie in the range of `q`, otherwise the rate is
/// infinite.
pub fn rate_function_with_noise(path: &Path, a: &Matrix, x0: &Vector, q: &Matrix) -> Result<Rate> {
    check_path("rate_function_with_noise", path, a, x0)?;
    if q.rows() != a.rows() || q.cols() != a.rows() {
        return Err(Error::DimensionMismatch {
            op: "rate_function_with_noise",
            expected: format!("{n}x{n} noise covariance", n = a.rows()),
            found: format!("{}x{}", q.rows(), q.cols()),
        });
    }
    if &path.points()[0] != x0 {
        return Ok(Rate::Infinite);
    }
    let l = psd_factor(q)?;
    let r = l.cols();
    let lt = l.transpose();
    let gram = matcore::mat_mul(&lt, &l)?;
    let mut total = 0.0;
    for z in path_increments(path, a) {
        // z = L w exactly when z is in range(Q); then z^T Q^+ z = |w|^2.
        let rhs = lt.mul_vec(&z)?;
        let w = solve_dense(r, gram.as_slice().to_vec(), rhs.into_inner(), "rate_function_with_noise")?;
        let w = Vector::new(w)?;
        let residual = l.mul_vec(&w)?.sub(&z)?.max_abs();
        if residual > 1e-9 * (1.0 + z.max_abs()) {
            return Ok(Rate::Infinite);
        }
        total += w.norm_sq();
    }
    Ok(Rate::Finite(0.5 * total))
}

/// Rate function of a scalar AR(n) path `x_0, x_1, .., x_T`:
/// `1/2 sum_{t>=n} (x_t - b_1 x_{t-1} - .. - b_n x_{t-n})^2`, infinite when
/// the first `n` values differ from `starts`.
pub fn rate_function_arn(path: &[f64], b: &[f64], starts: &[f64]) -> Result<Rate> {
    let n = b.len();
    if n == 0 || starts.len() != n {
        return Err(Error::DimensionMismatch {
            op: "rate_function_arn",
            expected: format!("{n} start values"),
            found: format!("{}", starts.len()),
        });
    }
    if path.len() < n {
        return Err(Error::DimensionMismatch {
            op: "rate_function_arn",
            expected: format!("path of length >= {n}"),
            found: format!("{}", path.len()),
        });
    }
    if &path[..n] != starts {
        return Ok(Rate::Infinite);
    }
    let total: f64 = (n..path.len())
        .map(|t| {
            let pred: f64 = b.iter().enumerate().map(|(i, bi)| bi * path[t - 1 - i]).sum();
            (path[t] - pred).powi(2)
        })
        .sum();
    Ok(Rate::Finite(0.5 * total))
}

/// Reads a scalar AR(n) path off a path of its companion embedding:
/// `y_0 = (x_{n-1}, .., x_0)` followed by the first coordinates of
/// `y_1, y_2, ..`.
pub fn embedded_path_to_scalar(path: &Path) -> Vec<f64> {
    let mut out: Vec<f64> = path.points()[0].as_slice().iter().rev().copied().collect();
    out.extend(path.points()[1..].iter().map(|y| y[0]));
    out
}

/// Minimum of the rate function over paths from the origin with
/// `c^T y_N = 1`: `1 / (2 c^T S_N c)`, together with the minimizing path.
pub fn finite_horizon_exit_rate(a: &Matrix, q: &Matrix, c: &Vector, n_horizon: usize) -> Result<RateResult> {
    check_dims("finite_horizon_exit_rate", a, q, c)?;
    let (path, quadratic_form) = optimal_path_and_form(a, q, c, n_horizon)?;
    Ok(RateResult {
        horizon: Horizon::Steps(n_horizon),
        exponent: 1.0 / (2.0 * quadratic_form),
        optimal_path: Some(path),
        quadratic_form,
    })
}

/// The minimizing path `y_0 = 0`, `y_t = K S_t (A^{N-t})^T c`,
/// `K = 1 / (c^T S_N c)`. Its increments are `K Q (A^{N-t})^T c`.
pub fn optimal_exit_path(a: &Matrix, q: &Matrix, c: &Vector, n_horizon: usize) -> Result<Path> {
    check_dims("optimal_exit_path", a, q, c)?;
    optimal_path_and_form(a, q, c, n_horizon).map(|(p, _)| p)
}

fn optimal_path_and_form(a: &Matrix, q: &Matrix, c: &Vector, n_horizon: usize) -> Result<(Path, f64)> {
    if n_horizon < 1 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let sigmas = covariance_sequence_with(a, q, n_horizon)?;
    let form = sigmas[n_horizon - 1].quadratic_form(c)?;
    if form <= reachability_floor(q, c) {
        return Err(Error::Unreachable { horizon: n_horizon });
    }
    let k = 1.0 / form;
    // g_t = (A^{N-t})^T c, built backwards from g_N = c.
    let at = a.transpose();
    let mut g = vec![c.clone(); n_horizon];
    for t in (0..n_horizon - 1).rev() {
        g[t] = at.mul_vec(&g[t + 1])?;
    }
    let mut points = Vec::with_capacity(n_horizon + 1);
    points.push(Vector::zeros(a.rows()));
    for (sigma, g_t) in sigmas.iter().zip(&g) {
        points.push(sigma.mul_vec(g_t)?.scale(k));
    }
    Ok((Path::new(points)?, form))
}

/// Exit-time exponent `lim eps^2 log E tau = 1 / (2 c^T S_inf c)` with
/// `S_inf = A S_inf A^T + Q`.
pub fn asymptotic_exit_exponent(a: &Matrix, q: &Matrix, c: &Vector) -> Result<RateResult> {
    check_dims("asymptotic_exit_exponent", a, q, c)?;
    let sigma = matcore::solve_discrete_lyapunov(a, q)?;
    let form = sigma.quadratic_form(c)?;
    if form <= reachability_floor(q, c) {
        return Err(Error::Unreachable { horizon: usize::MAX });
    }
    Ok(RateResult {
        horizon: Horizon::Asymptotic,
        exponent: 1.0 / (2.0 * form),
        optimal_path: None,
        quadratic_form: form,
    })
}

/// Exit exponent of `model` for `exit`, with the exit level folded into `c`.
pub fn model_exit_exponent(model: &ArModel, exit: &ExitSpec) -> Result<RateResult> {
    asymptotic_exit_exponent(model.drift(), &model.noise_covariance(), &exit.direction())
}

/// Numeric minimum of `1/2 sum_t |w_t|^2` subject to
/// `sum_t c^T A^{N-t} L w_t = 1`, where `Q = L L^T` and the increments are
/// `z_t = L w_t`. The constraint row is assembled from explicit matrix
/// powers and solved as a generic least-norm problem; no covariance
/// recursion is involved.
pub fn rate_infimum_oracle(a: &Matrix, q: &Matrix, c: &Vector, n_horizon: usize) -> Result<f64> {
    check_dims("rate_infimum_oracle", a, q, c)?;
    if n_horizon < 1 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let l = psd_factor(q)?;
    let r = l.cols();
    let c_row = Matrix::new(1, c.dim(), c.as_slice().to_vec())?;
    let mut g = Vec::with_capacity(n_horizon * r);
    for t in 1..=n_horizon {
        let block = matcore::mat_mul(&matcore::mat_mul(&c_row, &a.pow(n_horizon - t)?)?, &l)?;
        g.extend_from_slice(block.as_slice());
    }
    let g = Matrix::new(1, n_horizon * r, g)?;
    let gram = congruence(&g, &Matrix::identity(g.cols()))?;
    if gram[(0, 0)] <= reachability_floor(q, c) {
        return Err(Error::Unreachable { horizon: n_horizon });
    }
    let w = least_norm_solution(&g, &[1.0]).map_err(|e| match e {
        Error::Singular(_) => Error::Unreachable { horizon: n_horizon },
        other => other,
    })?;
    Ok(0.5 * w.iter().map(|v| v * v).sum::<f64>())
}

/// Minimum-norm solution of the underdetermined system `G w = h` (full row
/// rank `G`): `w = G^T (G G^T)^{-1} h`.
pub fn least_norm_solution(g: &Matrix, h: &[f64]) -> Result<Vec<f64>> {
    if h.len() != g.rows() {
        return Err(Error::DimensionMismatch {
            op: "least_norm_solution",
            expected: format!("rhs of length {}", g.rows()),
            found: format!("{}", h.len()),
        });
    }
    let gram = congruence(g, &Matrix::identity(g.cols()))?;
    let lambda = solve_dense(g.rows(), gram.as_slice().to_vec(), h.to_vec(), "least_norm_solution")?;
    let w = g.transpose().mul_vec(&Vector::new(lambda)?)?;
    Ok(w.into_inner())
}

/// Result of walking the finite-horizon exponent toward its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonSearch {
    pub horizon: usize,
    pub exponent: f64,
    pub converged: bool,
}

/// Smallest `N <= cap` with `|1/(2 c^T S_N c) - asymptotic| < tol`.
pub fn convergence_horizon(a: &Matrix, q: &Matrix, c: &Vector, tol: f64, cap: usize) -> Result<HorizonSearch> {
    let limit = asymptotic_exit_exponent(a, q, c)?.exponent;
    let floor = reachability_floor(q, c);
    let mut sigma = q.clone();
    let mut last = f64::INFINITY;
    for n in 1..=cap.max(1) {
        if n > 1 {
            sigma = congruence(a, &sigma)?.add(q)?;
        }
        let form = sigma.quadratic_form(c)?;
        if form <= floor {
            continue;
        }
        last = 1.0 / (2.0 * form);
        if (last - limit).abs() < tol {
            return Ok(HorizonSearch {
                horizon: n,
                exponent: last,
                converged: true,
            });
        }
    }
    Ok(HorizonSearch {
        horizon: cap,
        exponent: last,
        converged: false,
    })
}

/// Chernoff-type bound `P(tau <= N) <= 2 N exp(-1 / (2 eps^2 sigma2))` when
/// every `c^T X_t` is centered normal with variance at most `eps^2 sigma2`.
/// Not clamped to 1.
pub fn chernoff_exit_probability_bound(n_steps: u64, epsilon: f64, sigma2: f64) -> Result<f64> {
    if n_steps < 1 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument("sigma2 must be positive".into()));
    }
    Ok(2.0 * n_steps as f64 * (-1.0 / (2.0 * epsilon * epsilon * sigma2)).exp())
}

/// Lower bound `1 / (2 sigma2)` on `liminf eps^2 log E tau`. With
/// `sigma2 = c^T S_inf c` it coincides with the exit exponent.
pub fn lower_bound_exponent(sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument("sigma2 must be positive".into()));
    }
    Ok(1.0 / (2.0 * sigma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{companion_matrix, NoiseShape};

    fn bivariate_a() -> Matrix {
        Matrix::from_rows(&[vec![0.8, 1.0], vec![0.0, 0.5]]).unwrap()
    }

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn exit_spec_validation() {
        assert!(ExitSpec::two_sided(Vector::zeros(2)).is_err());
        assert!(ExitSpec::new(v(&[1.0]), Sidedness::OneSided, 0.0).is_err());
        let e = ExitSpec::new(v(&[2.0, -4.0]), Sidedness::TwoSided, 2.0).unwrap();
        assert_eq!(e.direction(), v(&[1.0, -2.0]));
    }

    #[test]
    fn rate_function_examples() {
        let a = bivariate_a();
        let x0 = v(&[1.0, -1.0]);
        let mut pts = vec![x0.clone()];
        for _ in 0..5 {
            let next = a.mul_vec(pts.last().unwrap()).unwrap();
            pts.push(next);
        }
        let free = Path::new(pts).unwrap();
        assert_eq!(rate_function(&free, &a, &x0).unwrap(), Rate::Finite(0.0));

        let jump = Path::new(vec![v(&[0.0]), v(&[1.0])]).unwrap();
        let zero = Matrix::zeros(1, 1);
        assert_eq!(rate_function(&jump, &zero, &v(&[0.0])).unwrap(), Rate::Finite(0.5));
        assert_eq!(rate_function(&jump, &zero, &v(&[0.5])).unwrap(), Rate::Infinite);
        assert!(rate_function(&jump, &a, &x0).is_err());
    }

    #[test]
    fn singular_noise_rate_is_infinite_off_range() {
        let b = companion_matrix(&[0.5, 0.2]).unwrap();
        let q = NoiseShape::FirstCoordinate.covariance(2);
        let ok = Path::new(vec![v(&[0.0, 0.0]), v(&[0.3, 0.0])]).unwrap();
        let bad = Path::new(vec![v(&[0.0, 0.0]), v(&[0.3, 0.1])]).unwrap();
        let r = rate_function_with_noise(&ok, &b, &Vector::zeros(2), &q).unwrap();
        assert!((r.finite().unwrap() - 0.045).abs() < 1e-15);
        assert!(rate_function_with_noise(&bad, &b, &Vector::zeros(2), &q).unwrap().is_infinite());
    }

    #[test]
    fn rate_function_arn_examples() {
        let b = [0.5, 0.2];
        let mut xs = vec![0.3, -0.1];
        for t in 2..8 {
            xs.push(0.5 * xs[t - 1] + 0.2 * xs[t - 2]);
        }
        assert_eq!(rate_function_arn(&xs, &b, &[0.3, -0.1]).unwrap(), Rate::Finite(0.0));
        assert!(rate_function_arn(&xs, &b, &[0.0, 0.0]).unwrap().is_infinite());

        // n = 1: 1/2 sum (u_t - a u_{t-1})^2
        let u = [0.0, 0.4, 0.1, -0.3];
        let a = 0.6;
        let expected = 0.5 * ((0.4_f64).powi(2) + (0.1_f64 - a * 0.4).powi(2) + (-0.3_f64 - a * 0.1).powi(2));
        let r = rate_function_arn(&u, &[a], &[0.0]).unwrap().finite().unwrap();
        assert!((r - expected).abs() < 1e-15);
        assert!(rate_function_arn(&[0.0], &b, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn bivariate_exponent() {
        let r = asymptotic_exit_exponent(&bivariate_a(), &Matrix::identity(2), &v(&[1.0, 1.0])).unwrap();
        assert!((r.exponent - 81.0 / 2426.0).abs() < 1e-14);
        assert!((r.quadratic_form - 1213.0 / 81.0).abs() < 1e-12);
        assert_eq!(r.horizon, Horizon::Asymptotic);
        assert!(r.optimal_path.is_none());

        let f = finite_horizon_exit_rate(&bivariate_a(), &Matrix::identity(2), &v(&[1.0, 1.0]), 400).unwrap();
        assert!((f.exponent - 81.0 / 2426.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_and_zero_drift_exponents() {
        let r = asymptotic_exit_exponent(&Matrix::diag(&[0.5]).unwrap(), &Matrix::identity(1), &v(&[1.0])).unwrap();
        assert!((r.exponent - 0.375).abs() < 1e-15);
        let c = v(&[1.0, 2.0, -2.0]);
        let r = asymptotic_exit_exponent(&Matrix::zeros(3, 3), &Matrix::identity(3), &c).unwrap();
        assert!((r.exponent - 1.0 / 18.0).abs() < 1e-15);
        let f = finite_horizon_exit_rate(&Matrix::zeros(2, 2), &Matrix::identity(2), &v(&[0.6, 0.8]), 1).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-15);
        assert!(matches!(
            asymptotic_exit_exponent(&Matrix::diag(&[1.2]).unwrap(), &Matrix::identity(1), &v(&[1.0])),
            Err(Error::NoStationaryDistribution { .. })
        ));
    }

    #[test]
    fn optimal_path_examples() {
        let p = optimal_exit_path(&Matrix::zeros(1, 1), &Matrix::identity(1), &v(&[1.0]), 1).unwrap();
        assert_eq!(p.points(), &[v(&[0.0]), v(&[1.0])]);

        // increments equal K (A^{N-t})^T c
        let a = bivariate_a();
        let c = v(&[1.0, 1.0]);
        let n = 10;
        let res = finite_horizon_exit_rate(&a, &Matrix::identity(2), &c, n).unwrap();
        let k = 1.0 / res.quadratic_form;
        let path = res.optimal_path.unwrap();
        for t in 1..=n {
            let inc = path.points()[t].sub(&a.mul_vec(&path.points()[t - 1]).unwrap()).unwrap();
            let target = a.pow(n - t).unwrap().transpose().mul_vec(&c).unwrap().scale(k);
            assert!(inc.sub(&target).unwrap().max_abs() < 1e-14);
        }
        assert!((c.dot(path.last()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unreachable_horizon() {
        let b = companion_matrix(&[0.5, 0.2]).unwrap();
        let q = NoiseShape::FirstCoordinate.covariance(2);
        let c = v(&[0.0, 1.0]);
        assert!(matches!(finite_horizon_exit_rate(&b, &q, &c, 1), Err(Error::Unreachable { .. })));
        assert!(matches!(rate_infimum_oracle(&b, &q, &c, 1), Err(Error::Unreachable { .. })));
        assert!(finite_horizon_exit_rate(&b, &q, &c, 2).is_ok());
    }

    #[test]
    fn oracle_trivial_cases() {
        let r = rate_infimum_oracle(&Matrix::zeros(2, 2), &Matrix::identity(2), &v(&[0.6, 0.8]), 1).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        let a = bivariate_a();
        let c = v(&[1.0, 1.0]);
        let r1 = rate_infimum_oracle(&a, &Matrix::identity(2), &c, 7).unwrap();
        let r2 = rate_infimum_oracle(&a, &Matrix::identity(2), &c.scale(2.0), 7).unwrap();
        assert!((r2 - r1 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn convergence_horizon_reaches_limit() {
        let s = convergence_horizon(&bivariate_a(), &Matrix::identity(2), &v(&[1.0, 1.0]), 1e-9, 100_000).unwrap();
        assert!(s.converged);
        assert!((s.exponent - 81.0 / 2426.0).abs() < 1e-9);
        let prev = finite_horizon_exit_rate(&bivariate_a(), &Matrix::identity(2), &v(&[1.0, 1.0]), s.horizon - 1).unwrap();
        assert!((prev.exponent - 81.0 / 2426.0).abs() >= 1e-9);
    }

    #[test]
    fn chernoff_and_lower_bound() {
        let sigma2 = 1.0 / (2.0 * std::f64::consts::LN_2);
        assert!((chernoff_exit_probability_bound(1, 1.0, sigma2).unwrap() - 1.0).abs() < 1e-15);
        assert!(chernoff_exit_probability_bound(10, 0.01, 1.0).unwrap() < 1e-300);
        assert!(chernoff_exit_probability_bound(10, 0.1, 0.0).is_err());
        assert!(chernoff_exit_probability_bound(0, 0.1, 1.0).is_err());

        assert!((lower_bound_exponent(1213.0 / 81.0).unwrap() - 81.0 / 2426.0).abs() < 1e-15);
        assert_eq!(lower_bound_exponent(1.0).unwrap(), 0.5);
        assert!((lower_bound_exponent(1.0 / 0.75).unwrap() - 0.375).abs() < 1e-15);
        assert!(lower_bound_exponent(-1.0).is_err());
    }

    #[test]
    fn least_norm_small_system() {
        // x + y + z = 3 -> (1, 1, 1)
        let g = Matrix::new(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        let w = least_norm_solution(&g, &[3.0]).unwrap();
        for x in w {
            assert!((x - 1.0).abs() < 1e-15);
        }
    }
}
