//! `analyze`, `simulate` and `table1`.

use std::io::Write;

use arexit::ldp::{self, convergence_horizon, finite_horizon_exit_rate, lower_bound_exponent};
use arexit::matcore::{solve_discrete_lyapunov, spectral_radius};
use arexit::mc::{estimate_mean_exit_time, McEstimate, RNG_VERSION};
use arexit::{Error, McConfig};
use serde::Serialize;

use crate::config::{table1_config, ModelSection, RunConfig};
use crate::error::CliError;
use crate::report::{fmt6, sig12, write_csv_rows, write_json_value, write_table, Report, SCHEMA_VERSION};

/// Noise scales and published `eps^2 log E tau` values of the bivariate
/// experiment, largest noise first.
pub const TABLE1_PUBLISHED: [(f64, f64); 6] = [
    (0.12, 0.0639),
    (0.10, 0.0554),
    (0.08, 0.0473),
    (0.07, 0.0434),
    (0.06, 0.0415),
    (0.05, 0.0389),
];

/// `81 / 2426`, the exit exponent of the bivariate model.
pub const TABLE1_LIMIT: f64 = 81.0 / 2426.0;

const CONVERGENCE_TOL: f64 = 1e-9;
const CONVERGENCE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonRow {
    pub horizon: usize,
    /// `None` when `c^T x` cannot be reached within the horizon.
    pub exponent: Option<f64>,
    pub quadratic_form: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathDump {
    pub horizon: usize,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub schema_version: u32,
    pub model: &'static str,
    pub dim: usize,
    pub spectral_radius: f64,
    /// Stationary covariance per unit `eps^2` (of the companion state for AR(n)).
    pub sigma_inf: Vec<Vec<f64>>,
    /// `c^T S_inf c` with `c` already divided by the exit level.
    pub quadratic_form: f64,
    /// Stationary variance of an AR(n) model per unit `eps^2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    pub asymptotic_exponent: f64,
    pub lower_bound_exponent: f64,
    pub convergence_horizon: usize,
    pub convergence_reached: bool,
    pub finite_horizon: Vec<HorizonRow>,
    pub optimal_path: Option<PathDump>,
}

fn rounded_rows(m: &arexit::Matrix) -> Vec<Vec<f64>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(sig12).collect()).collect()
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<AnalyzeReport, CliError> {
    let resolved = cfg.resolve_with(cfg.epsilon().unwrap_or(1.0))?;
    let a = resolved.model.drift();
    let q = resolved.model.noise_covariance();
    let c = resolved.exit.direction();
    let rho = spectral_radius(a)?;
    if rho >= 1.0 {
        return Err(CliError::Unstable(rho));
    }
    let sigma = solve_discrete_lyapunov(a, &q)?;
    let asymptotic = ldp::asymptotic_exit_exponent(a, &q, &c)?;
    let search = convergence_horizon(a, &q, &c, CONVERGENCE_TOL, CONVERGENCE_CAP)?;

    let mut finite_horizon = Vec::new();
    for &n in &cfg.analyze.horizons {
        let row = match finite_horizon_exit_rate(a, &q, &c, n) {
            Ok(r) => HorizonRow {
                horizon: n,
                exponent: Some(sig12(r.exponent)),
                quadratic_form: Some(sig12(r.quadratic_form)),
            },
            Err(Error::Unreachable { .. }) => HorizonRow {
                horizon: n,
                exponent: None,
                quadratic_form: None,
            },
            Err(e) => return Err(e.into()),
        };
        finite_horizon.push(row);
    }
    let optimal_path = match finite_horizon_exit_rate(a, &q, &c, cfg.analyze.path_horizon) {
        Ok(r) => r.optimal_path.map(|p| PathDump {
            horizon: cfg.analyze.path_horizon,
            points: p
                .points()
                .iter()
                .map(|v| v.as_slice().iter().copied().map(sig12).collect())
                .collect(),
        }),
        Err(Error::Unreachable { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    Ok(AnalyzeReport {
        schema_version: SCHEMA_VERSION,
        model: match cfg.model {
            ModelSection::Matrix { .. } => "matrix",
            ModelSection::Arn { .. } => "arn",
        },
        dim: a.rows(),
        spectral_radius: sig12(rho),
        sigma_inf: rounded_rows(&sigma),
        quadratic_form: sig12(asymptotic.quadratic_form),
        sigma2: resolved.arn.as_ref().map(|_| sig12(sigma[(0, 0)])),
        asymptotic_exponent: sig12(asymptotic.exponent),
        lower_bound_exponent: sig12(lower_bound_exponent(asymptotic.quadratic_form)?),
        convergence_horizon: search.horizon,
        convergence_reached: search.converged,
        finite_horizon,
        optimal_path,
    })
}

#[derive(Debug, Serialize)]
struct LongRow<'a> {
    quantity: &'a str,
    index: String,
    value: Option<f64>,
    schema_version: u32,
}

impl Report for AnalyzeReport {
    fn write_text(&self, out: &mut dyn Write) -> Result<(), CliError> {
        writeln!(out, "model                 {} (dimension {})", self.model, self.dim)?;
        writeln!(out, "spectral radius       {}", fmt6(self.spectral_radius))?;
        writeln!(out, "stationary covariance")?;
        for row in &self.sigma_inf {
            let cells: Vec<String> = row.iter().map(|v| format!("{:>12}", fmt6(*v))).collect();
            writeln!(out, "  {}", cells.join(" "))?;
        }
        writeln!(out, "c^T S c               {}", fmt6(self.quadratic_form))?;
        if let Some(s2) = self.sigma2 {
            writeln!(out, "sigma^2               {}", fmt6(s2))?;
        }
        writeln!(out, "exit exponent         {}", fmt6(self.asymptotic_exponent))?;
        writeln!(out, "lower bound exponent  {}", fmt6(self.lower_bound_exponent))?;
        writeln!(
            out,
            "within 1e-9 of limit  N = {}{}",
            self.convergence_horizon,
            if self.convergence_reached { "" } else { " (cap reached)" }
        )?;
        writeln!(out)?;
        let rows: Vec<Vec<String>> = self
            .finite_horizon
            .iter()
            .map(|r| {
                vec![
                    r.horizon.to_string(),
                    r.exponent.map_or("unreachable".into(), fmt6),
                    r.quadratic_form.map_or("0".into(), fmt6),
                ]
            })
            .collect();
        write_table(&["N", "exponent", "c^T S_N c"], &rows, out)?;
        if let Some(p) = &self.optimal_path {
            writeln!(out, "\noptimal exit path, N = {}", p.horizon)?;
            let rows: Vec<Vec<String>> = p
                .points
                .iter()
                .enumerate()
                .map(|(t, y)| {
                    let mut row = vec![t.to_string()];
                    row.extend(y.iter().map(|v| fmt6(*v)));
                    row
                })
                .collect();
            let mut header = vec!["t".to_string()];
            header.extend((1..=self.dim).map(|i| format!("y{i}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            write_table(&header, &rows, out)?;
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let row = |quantity, index: String, value| LongRow {
            quantity,
            index,
            value,
            schema_version: SCHEMA_VERSION,
        };
        let mut rows = vec![row("spectral_radius", String::new(), Some(self.spectral_radius))];
        for (i, r) in self.sigma_inf.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                rows.push(row("sigma_inf", format!("{i},{j}"), Some(*v)));
            }
        }
        rows.push(row("quadratic_form", String::new(), Some(self.quadratic_form)));
        if let Some(s2) = self.sigma2 {
            rows.push(row("sigma2", String::new(), Some(s2)));
        }
        rows.push(row("asymptotic_exponent", String::new(), Some(self.asymptotic_exponent)));
        rows.push(row("lower_bound_exponent", String::new(), Some(self.lower_bound_exponent)));
        rows.push(row("convergence_horizon", String::new(), Some(self.convergence_horizon as f64)));
        for h in &self.finite_horizon {
            rows.push(row("finite_horizon_exponent", h.horizon.to_string(), h.exponent));
        }
        if let Some(p) = &self.optimal_path {
            for (t, y) in p.points.iter().enumerate() {
                for (i, v) in y.iter().enumerate() {
                    rows.push(row("optimal_path", format!("{t},{i}"), Some(*v)));
                }
            }
        }
        write_csv_rows(&rows, out)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        write_json_value(self, out)
    }
}

/// One `simulate` output row; field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub epsilon: f64,
    pub n_paths: usize,
    pub mean_tau: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub scaled_log: f64,
    pub censored: usize,
    pub seed: u64,
    pub rng_version: &'static str,
    pub schema_version: u32,
}

impl From<&McEstimate> for SimRow {
    fn from(e: &McEstimate) -> Self {
        Self {
            epsilon: e.epsilon,
            n_paths: e.n_paths,
            mean_tau: sig12(e.mean_tau),
            ci_low: sig12(e.ci_low),
            ci_high: sig12(e.ci_high),
            scaled_log: sig12(e.scaled_log),
            censored: e.censored,
            seed: e.seed,
            rng_version: RNG_VERSION,
            schema_version: SCHEMA_VERSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub rng_version: &'static str,
    /// Analytic limit of `scaled_log` as eps -> 0, when the model is stable.
    pub limit: Option<f64>,
    pub rows: Vec<SimRow>,
    #[serde(skip)]
    pub estimates: Vec<McEstimate>,
}

/// Mean exit time for each noise scale in `epsilons` (or the config's own).
pub fn cmd_simulate(cfg: &RunConfig, epsilons: Option<&[f64]>) -> Result<SimulateReport, CliError> {
    let eps_list: Vec<f64> = match epsilons {
        Some(list) if !list.is_empty() => list.to_vec(),
        _ => vec![cfg
            .epsilon()
            .ok_or_else(|| CliError::Config("model.epsilon is required (or pass --eps)".into()))?],
    };
    let mut estimates = Vec::with_capacity(eps_list.len());
    let mut limit = None;
    for &eps in &eps_list {
        let resolved = cfg.resolve_with(eps)?;
        if limit.is_none() {
            limit = ldp::model_exit_exponent(&resolved.model, &resolved.exit).ok().map(|r| sig12(r.exponent));
        }
        estimates.push(estimate_mean_exit_time(&resolved.model, &resolved.exit, &cfg.mc)?);
    }
    Ok(SimulateReport {
        schema_version: SCHEMA_VERSION,
        rng_version: RNG_VERSION,
        limit,
        rows: estimates.iter().map(SimRow::from).collect(),
        estimates,
    })
}

impl Report for SimulateReport {
    fn write_text(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt6(r.epsilon),
                    r.n_paths.to_string(),
                    format!("{}{}", fmt6(r.mean_tau), if r.censored > 0 { " (lower bound)" } else { "" }),
                    format!("[{}, {}]", fmt6(r.ci_low), fmt6(r.ci_high)),
                    fmt6(r.scaled_log),
                    r.censored.to_string(),
                ]
            })
            .collect();
        write_table(&["eps", "paths", "mean tau", "95% CI", "eps^2 log mean", "censored"], &rows, out)?;
        if let Some(l) = self.limit {
            writeln!(out, "limit as eps -> 0: {}", fmt6(l))?;
        }
        writeln!(out, "seed {} | rng {}", self.rows.first().map_or(0, |r| r.seed), self.rng_version)?;
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        write_csv_rows(&self.rows, out)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        write_json_value(self, out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub epsilon: f64,
    pub published: f64,
    pub computed: f64,
    pub abs_diff: f64,
    pub limit: f64,
    pub mean_tau: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_paths: usize,
    pub censored: usize,
    pub seed: u64,
    pub rng_version: &'static str,
    pub schema_version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Report {
    pub schema_version: u32,
    pub limit: f64,
    pub rows: Vec<Table1Row>,
    #[serde(skip)]
    pub estimates: Vec<McEstimate>,
}

/// Reruns the bivariate exit-time experiment. `epsilons` selects a subset
/// of the published noise scales.
pub fn cmd_table1(mc: &McConfig, epsilons: Option<&[f64]>) -> Result<Table1Report, CliError> {
    let rows: Vec<(f64, f64)> = match epsilons {
        Some(list) if !list.is_empty() => list
            .iter()
            .map(|&e| {
                TABLE1_PUBLISHED
                    .iter()
                    .copied()
                    .find(|(pe, _)| (pe - e).abs() < 1e-12)
                    .ok_or_else(|| CliError::Config(format!("eps {e} is not one of the table's noise scales")))
            })
            .collect::<Result<_, _>>()?,
        _ => TABLE1_PUBLISHED.to_vec(),
    };
    let cfg = RunConfig {
        mc: mc.clone(),
        ..table1_config()
    };
    let sim = cmd_simulate(&cfg, Some(&rows.iter().map(|r| r.0).collect::<Vec<_>>()))?;
    let out_rows = rows
        .iter()
        .zip(&sim.rows)
        .map(|(&(eps, published), r)| Table1Row {
            epsilon: eps,
            published,
            computed: r.scaled_log,
            abs_diff: sig12((r.scaled_log - published).abs()),
            limit: sig12(TABLE1_LIMIT),
            mean_tau: r.mean_tau,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            n_paths: r.n_paths,
            censored: r.censored,
            seed: r.seed,
            rng_version: RNG_VERSION,
            schema_version: SCHEMA_VERSION,
        })
        .collect();
    Ok(Table1Report {
        schema_version: SCHEMA_VERSION,
        limit: sig12(TABLE1_LIMIT),
        rows: out_rows,
        estimates: sim.estimates,
    })
}

impl Report for Table1Report {
    fn write_text(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt6(r.epsilon),
                    fmt6(r.published),
                    fmt6(r.computed),
                    fmt6(r.abs_diff),
                    fmt6(r.limit),
                    fmt6(r.mean_tau),
                    r.censored.to_string(),
                ]
            })
            .collect();
        write_table(&["eps", "published", "computed", "|diff|", "limit", "mean tau", "censored"], &rows, out)?;
        if let Some(r) = self.rows.first() {
            writeln!(out, "{} paths per row | seed {} | rng {}", r.n_paths, r.seed, r.rng_version)?;
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        write_csv_rows(&self.rows, out)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        write_json_value(self, out)
    }
}
