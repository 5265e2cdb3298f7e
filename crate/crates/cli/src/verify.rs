//! Randomized self-checks run by `arexit verify`.

use std::io::Write;

use arexit::ldp::{
    chernoff_exit_probability_bound, finite_horizon_exit_rate, rate_function_with_noise, rate_infimum_oracle,
};
use arexit::matcore::{lyapunov_series_oracle, solve_discrete_lyapunov, spectral_radius};
use arexit::mc::estimate_exit_probability;
use arexit::{ArModel, ExitSpec, Matrix, McConfig, NoiseShape, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::report::{write_csv_rows, write_json_value, write_table, Report, SCHEMA_VERSION};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_TRIALS: usize = 100;

/// Offset added to the closed-form rate when a fault is injected.
const FAULT: f64 = 1e-6;

/// A random stable drift with noise shape, exit direction and horizon.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Matrix,
    pub noise: NoiseShape,
    pub c: Vector,
    pub horizon: usize,
}

impl Instance {
    pub fn q(&self) -> Matrix {
        self.noise.covariance(self.a.rows())
    }

    pub fn describe(&self) -> String {
        format!(
            "a={:?} noise={:?} c={:?} N={}",
            self.a.to_rows(),
            self.noise,
            self.c.as_slice(),
            self.horizon
        )
    }
}

/// `count` instances with dimension drawn from `dims`, entries uniform on
/// (-1, 1) rescaled to a spectral radius uniform on [0, 0.95), horizon in
/// `1..=max_horizon`, and `|c_1| >= 0.1` so every horizon is reachable
/// under either noise shape.
pub fn random_instances(seed: u64, count: usize, dims: &[usize], max_horizon: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = dims[rng.random_range(0..dims.len())];
            let entries: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let raw = Matrix::new(d, d, entries).expect("finite entries");
            let target = rng.random_range(0.0..0.95);
            let rho = spectral_radius(&raw).expect("small dense matrix");
            let a = if rho < 1e-9 { raw } else { raw.scale(target / rho) };
            let noise = if rng.random_bool(0.5) {
                NoiseShape::Identity
            } else {
                NoiseShape::FirstCoordinate
            };
            let mut c: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let sign = if c[0] < 0.0 { -1.0 } else { 1.0 };
            c[0] = sign * rng.random_range(0.1..2.0);
            Instance {
                a,
                noise,
                c: Vector::new(c).expect("finite entries"),
                horizon: rng.random_range(1..=max_horizon),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub instances: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckSummary>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().map(|c| c.failures.len()).sum()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: usize,
    /// Perturbs the closed-form rate so the oracle checks must fail.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            inject_fault: false,
        }
    }
}

fn check<F>(name: &'static str, instances: &[Instance], mut f: F) -> CheckSummary
where
    F: FnMut(&Instance) -> Result<(), String>,
{
    let failures = instances
        .iter()
        .filter_map(|inst| f(inst).err().map(|why| format!("{why}; {}", inst.describe())))
        .collect();
    CheckSummary {
        name,
        instances: instances.len(),
        failures,
    }
}

fn lyapunov_check(inst: &Instance) -> Result<(), String> {
    let q = inst.q();
    let exact = solve_discrete_lyapunov(&inst.a, &q).map_err(|e| e.to_string())?;
    let series = lyapunov_series_oracle(&inst.a, &q, 1e-13).map_err(|e| e.to_string())?;
    let gap = exact.sub(&series).map_err(|e| e.to_string())?.max_abs();
    if gap <= 1e-8 {
        Ok(())
    } else {
        Err(format!("solver and series differ by {gap:e}"))
    }
}

fn closed_form_rate(inst: &Instance, fault: f64) -> Result<arexit::RateResult, String> {
    let mut r = finite_horizon_exit_rate(&inst.a, &inst.q(), &inst.c, inst.horizon).map_err(|e| e.to_string())?;
    r.exponent += fault;
    Ok(r)
}

fn oracle_check(inst: &Instance, fault: f64) -> Result<(), String> {
    let closed = closed_form_rate(inst, fault)?.exponent;
    let numeric = rate_infimum_oracle(&inst.a, &inst.q(), &inst.c, inst.horizon).map_err(|e| e.to_string())?;
    if (closed - numeric).abs() <= 1e-8 * (1.0 + closed) {
        Ok(())
    } else {
        Err(format!("closed form {closed} vs least-norm {numeric}"))
    }
}

fn optimal_path_check(inst: &Instance, fault: f64) -> Result<(), String> {
    let r = closed_form_rate(inst, fault)?;
    let path = r.optimal_path.ok_or("no path")?;
    let rate = rate_function_with_noise(&path, &inst.a, &Vector::zeros(inst.a.rows()), &inst.q())
        .map_err(|e| e.to_string())?
        .finite()
        .ok_or("optimal path has infinite rate")?;
    let hit = inst.c.dot(path.last());
    if (rate - r.exponent).abs() > 1e-10 {
        return Err(format!("path rate {rate} vs exponent {}", r.exponent));
    }
    if (hit.abs() - 1.0).abs() > 1e-10 {
        return Err(format!("|c^T y_N| = {hit}"));
    }
    Ok(())
}

/// Noise scale chosen so that `1 / (2 eps^2 sigma2) = 6`, which puts the
/// bound for 100 steps near one half.
fn chernoff_check(inst: &Instance, seed: u64) -> Result<(), String> {
    const N_STEPS: u64 = 100;
    let q = inst.q();
    let sigma2 = solve_discrete_lyapunov(&inst.a, &q)
        .and_then(|s| s.quadratic_form(&inst.c))
        .map_err(|e| e.to_string())?;
    let eps = (1.0 / (12.0 * sigma2)).sqrt();
    let model = ArModel::with_noise(inst.a.clone(), eps, Vector::zeros(inst.a.rows()), inst.noise)
        .map_err(|e| e.to_string())?;
    let exit = ExitSpec::two_sided(inst.c.clone()).map_err(|e| e.to_string())?;
    let cfg = McConfig {
        n_paths: 400,
        seed,
        ..McConfig::default()
    };
    let p = estimate_exit_probability(&model, &exit, N_STEPS, &cfg).map_err(|e| e.to_string())?;
    let bound = chernoff_exit_probability_bound(N_STEPS, eps, sigma2)
        .map_err(|e| e.to_string())?
        .min(1.0);
    if p.probability <= bound + 3.0 * p.std_error {
        Ok(())
    } else {
        Err(format!("exit frequency {} above bound {bound}", p.probability))
    }
}

pub fn cmd_verify(opts: VerifyOptions) -> Result<VerifyReport, CliError> {
    if opts.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let fault = if opts.inject_fault { FAULT } else { 0.0 };
    let lyap = random_instances(opts.seed, opts.trials, &[1, 2, 3, 5], 1);
    let rates = random_instances(opts.seed.wrapping_add(1), opts.trials, &[1, 2, 3], 10);
    let chernoff = random_instances(opts.seed.wrapping_add(2), (opts.trials / 10).max(5), &[1, 2, 3], 1);
    let checks = vec![
        check("lyapunov solver vs series", &lyap, lyapunov_check),
        check("closed-form rate vs least-norm infimum", &rates, |i| oracle_check(i, fault)),
        check("optimal path attains the rate", &rates, |i| optimal_path_check(i, fault)),
        check("chernoff bound dominates exit frequency", &chernoff, |i| {
            chernoff_check(i, opts.seed)
        }),
    ];
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        seed: opts.seed,
        trials: opts.trials,
        checks,
    })
}

#[derive(Serialize)]
struct CheckRow<'a> {
    check: &'a str,
    instances: usize,
    failures: usize,
    schema_version: u32,
}

impl Report for VerifyReport {
    fn write_text(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.name.to_string(),
                    c.instances.to_string(),
                    (c.instances - c.failures.len()).to_string(),
                ]
            })
            .collect();
        write_table(&["check", "instances", "passed"], &rows, out)?;
        if self.passed() {
            let total: usize = self.checks.iter().map(|c| c.instances).sum();
            writeln!(out, "all checks passed ({total} instances, seed {})", self.seed)?;
        } else {
            writeln!(out, "{} check(s) failed:", self.failures())?;
            for c in &self.checks {
                for f in &c.failures {
                    writeln!(out, "  [{}] {f}", c.name)?;
                }
            }
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let rows: Vec<CheckRow> = self
            .checks
            .iter()
            .map(|c| CheckRow {
                check: c.name,
                instances: c.instances,
                failures: c.failures.len(),
                schema_version: SCHEMA_VERSION,
            })
            .collect();
        write_csv_rows(&rows, out)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        write_json_value(self, out)
    }
}
