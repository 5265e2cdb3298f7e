//! Monte Carlo estimation of first exit times.
//!
//! Every path owns an independent random stream: a ChaCha8 generator whose
//! key is derived from the run seed, whose 64-bit stream id is the path
//! index, and whose block counter advances with the step index. A path's
//! noise therefore depends only on `(seed, path index, step)`, never on
//! which thread runs it. Per-path results are collected by index and reduced
//! sequentially, so estimates are bit-identical for any thread count.

use std::num::NonZeroUsize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldp::{ExitSpec, Sidedness};
use crate::process::{ArModel, ArnModel, NoiseShape};

/// Identifies the random stream construction and normal sampler. Bump when
/// either changes, since outputs for a given seed change with it.
pub const RNG_VERSION: &str = "chacha8-stream/rand_chacha-0.9.0+ziggurat/rand_distr-0.5.1";

/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Use rayon's global pool.
    #[default]
    Auto,
    Threads(NonZeroUsize),
}

impl std::str::FromStr for Parallelism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Parallelism::Auto);
        }
        s.parse::<NonZeroUsize>()
            .map(Parallelism::Threads)
            .map_err(|_| Error::InvalidArgument(format!("threads must be 'auto' or a positive integer, got {s:?}")))
    }
}

impl std::fmt::Display for Parallelism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parallelism::Auto => f.write_str("auto"),
            Parallelism::Threads(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Parallelism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Parallelism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => usize::try_from(n)
                .ok()
                .and_then(NonZeroUsize::new)
                .map(Parallelism::Threads)
                .ok_or_else(|| serde::de::Error::custom("threads must be positive")),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    #[serde(with = "seed_repr")]
    pub seed: u64,
    /// Per-path step cap; paths still inside at this point are censored.
    pub max_steps: u64,
    #[serde(rename = "threads")]
    pub parallelism: Parallelism,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 1000,
            seed: 0x5EED,
            max_steps: 1_000_000_000,
            parallelism: Parallelism::Auto,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::InvalidArgument("n_paths must be at least 1".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

// Seeds above i64::MAX are written as strings so they survive formats with
// signed 64-bit integers (TOML).
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        if *seed <= i64::MAX as u64 {
            s.serialize_u64(*seed)
        } else {
            s.collect_str(seed)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(n),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Random stream of one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathSeed {
    pub seed: u64,
    pub path: u64,
}

impl PathSeed {
    pub fn new(seed: u64, path: u64) -> Self {
        Self { seed, path }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.path);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitOutcome {
    /// First `t >= 1` with the process outside the strip.
    Exited(u64),
    /// No exit within the step cap.
    Censored,
}

impl ExitOutcome {
    pub fn steps(self) -> Option<u64> {
        match self {
            ExitOutcome::Exited(t) => Some(t),
            ExitOutcome::Censored => None,
        }
    }
}

#[inline]
fn outside(s: f64, sided: Sidedness) -> bool {
    match sided {
        Sidedness::TwoSided => s.abs() >= 1.0,
        Sidedness::OneSided => s >= 1.0,
    }
}

/// Exit time of one path drawn from `seed`'s stream.
pub fn sample_exit_time(model: &ArModel, exit: &ExitSpec, seed: PathSeed, max_steps: u64) -> ExitOutcome {
    simulate_exit_time(model, exit, &mut seed.rng(), max_steps)
}

/// Simulates `X_t` from the model's start with standard normal noise from
/// `rng` (drawn coordinate by coordinate, one step at a time) until
/// `c^T X_t` leaves the strip or `max_steps` steps have been taken.
pub fn simulate_exit_time<R: Rng + ?Sized>(model: &ArModel, exit: &ExitSpec, rng: &mut R, max_steps: u64) -> ExitOutcome {
    use NoiseShape::{FirstCoordinate, Identity};
    match (model.dim(), model.noise()) {
        (1, _) => simulate_fixed::<R, 1, 1>(model, exit, rng, max_steps),
        (2, Identity) => simulate_fixed::<R, 2, 2>(model, exit, rng, max_steps),
        (2, FirstCoordinate) => simulate_fixed::<R, 2, 1>(model, exit, rng, max_steps),
        (3, Identity) => simulate_fixed::<R, 3, 3>(model, exit, rng, max_steps),
        (3, FirstCoordinate) => simulate_fixed::<R, 3, 1>(model, exit, rng, max_steps),
        (4, Identity) => simulate_fixed::<R, 4, 4>(model, exit, rng, max_steps),
        (4, FirstCoordinate) => simulate_fixed::<R, 4, 1>(model, exit, rng, max_steps),
        _ => simulate_dyn(model, exit, rng, max_steps),
    }
}

// Stack-array version of `simulate_dyn` for small dimensions, `K` noise
// draws per step. Both perform the same floating-point operations in the
// same order.
fn simulate_fixed<R: Rng + ?Sized, const D: usize, const K: usize>(
    model: &ArModel,
    exit: &ExitSpec,
    rng: &mut R,
    max_steps: u64,
) -> ExitOutcome {
    let mut a = [[0.0; D]; D];
    for (i, row) in a.iter_mut().enumerate() {
        row.copy_from_slice(model.drift().row(i));
    }
    let mut c = [0.0; D];
    c.copy_from_slice(exit.direction().as_slice());
    let mut x = [0.0; D];
    x.copy_from_slice(model.start().as_slice());
    let eps = model.epsilon();
    let one_sided = exit.sided() == Sidedness::OneSided;
    debug_assert_eq!(K, model.noise().draws_per_step(D));
    let mut noise = [0.0; K];
    for t in 1..=max_steps {
        for z in noise.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        let mut next = [0.0; D];
        for i in 0..D {
            let mut acc = 0.0;
            for j in 0..D {
                acc += a[i][j] * x[j];
            }
            next[i] = acc;
        }
        for i in 0..K {
            next[i] += eps * noise[i];
        }
        x = next;
        let mut s = 0.0;
        for i in 0..D {
            s += c[i] * x[i];
        }
        if s >= 1.0 || (!one_sided && s <= -1.0) {
            return ExitOutcome::Exited(t);
        }
    }
    ExitOutcome::Censored
}

fn simulate_dyn<R: Rng + ?Sized>(model: &ArModel, exit: &ExitSpec, rng: &mut R, max_steps: u64) -> ExitOutcome {
    let d = model.dim();
    let c = exit.direction();
    let c = c.as_slice();
    let sided = exit.sided();
    let draws = model.noise().draws_per_step(d);
    let mut x = model.start().as_slice().to_vec();
    let mut next = vec![0.0; d];
    let mut noise = vec![0.0; draws];
    for t in 1..=max_steps {
        for z in noise.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        model.step_into(&x, &noise, &mut next);
        std::mem::swap(&mut x, &mut next);
        let s: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
        if outside(s, sided) {
            return ExitOutcome::Exited(t);
        }
    }
    ExitOutcome::Censored
}

/// Direct scalar simulation of an AR(n) model, exit when `X_t` leaves
/// `(-level, level)` (or reaches `level` one-sidedly). Time is counted in
/// steps after `X_{n-1}`, so step `k` produces `X_{n-1+k}`; one normal draw
/// per step.
pub fn simulate_exit_time_arn<R: Rng + ?Sized>(
    model: &ArnModel,
    level: f64,
    sided: Sidedness,
    rng: &mut R,
    max_steps: u64,
) -> ExitOutcome {
    let inv_level = 1.0 / level;
    // Most recent first.
    let mut recent: Vec<f64> = model.starts().iter().rev().copied().collect();
    for t in 1..=max_steps {
        let xi: f64 = rng.sample(StandardNormal);
        let x = model.next_value(&recent, xi);
        recent.rotate_right(1);
        recent[0] = x;
        if outside(inv_level * x, sided) {
            return ExitOutcome::Exited(t);
        }
    }
    ExitOutcome::Censored
}

fn run_paths<T, F>(cfg: &McConfig, per_path: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    cfg.validate()?;
    let n = cfg.n_paths as u64;
    match cfg.parallelism {
        Parallelism::Auto => Ok((0..n).into_par_iter().map(&per_path).collect()),
        Parallelism::Threads(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.get())
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(|| (0..n).into_par_iter().map(&per_path).collect()))
        }
    }
}

/// Simulates `cfg.n_paths` independent paths and returns their outcomes in
/// path-index order.
pub fn sample_exit_times(model: &ArModel, exit: &ExitSpec, cfg: &McConfig) -> Result<Vec<ExitOutcome>> {
    run_paths(cfg, |i| sample_exit_time(model, exit, PathSeed::new(cfg.seed, i), cfg.max_steps))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub epsilon: f64,
    /// Sample mean of the exit time in steps. Censored paths enter at
    /// `max_steps`, making this a lower bound when `censored > 0`.
    pub mean_tau: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `eps^2 ln(mean_tau)`.
    pub scaled_log: f64,
    pub n_paths: usize,
    pub censored: usize,
    pub seed: u64,
    pub max_steps: u64,
}

impl McEstimate {
    pub fn is_lower_bound(&self) -> bool {
        self.censored > 0
    }

    pub fn ci_half_width(&self) -> f64 {
        Z95 * self.std_error
    }
}

/// Mean exit time with a normal-approximation 95% confidence interval.
pub fn estimate_mean_exit_time(model: &ArModel, exit: &ExitSpec, cfg: &McConfig) -> Result<McEstimate> {
    let outcomes = sample_exit_times(model, exit, cfg)?;
    summarize_exit_times(model.epsilon(), &outcomes, cfg)
}

/// Reduces per-path outcomes (in index order) to an [`McEstimate`].
pub fn summarize_exit_times(epsilon: f64, outcomes: &[ExitOutcome], cfg: &McConfig) -> Result<McEstimate> {
    let n = outcomes.len();
    let censored = outcomes.iter().filter(|o| o.steps().is_none()).count();
    if n == 0 || censored == n {
        return Err(Error::NoExits {
            n_paths: n,
            max_steps: cfg.max_steps,
        });
    }
    let values = || outcomes.iter().map(|o| o.steps().unwrap_or(cfg.max_steps) as f64);
    let mean = values().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let var = values().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        epsilon,
        mean_tau: mean,
        std_error,
        ci_low: mean - Z95 * std_error,
        ci_high: mean + Z95 * std_error,
        scaled_log: scaled_log_mean(epsilon, mean)?,
        n_paths: n,
        censored,
        seed: cfg.seed,
        max_steps: cfg.max_steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub n_steps: u64,
    pub n_paths: usize,
    pub exits: usize,
    /// Fraction of paths with `tau <= n_steps`.
    pub probability: f64,
    /// Binomial standard error `sqrt(p (1 - p) / n)`.
    pub std_error: f64,
    /// Wilson score 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Estimates `P(tau <= n_steps)`. `cfg.max_steps` is ignored; each path runs
/// at most `n_steps` steps.
pub fn estimate_exit_probability(
    model: &ArModel,
    exit: &ExitSpec,
    n_steps: u64,
    cfg: &McConfig,
) -> Result<ProbabilityEstimate> {
    if n_steps < 1 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    let capped = McConfig {
        max_steps: n_steps,
        ..cfg.clone()
    };
    let outcomes = sample_exit_times(model, exit, &capped)?;
    let exits = outcomes.iter().filter(|o| o.steps().is_some()).count();
    Ok(proportion_estimate(n_steps, exits, outcomes.len()))
}

fn proportion_estimate(n_steps: u64, exits: usize, n: usize) -> ProbabilityEstimate {
    let nf = n as f64;
    let p = exits as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ProbabilityEstimate {
        n_steps,
        n_paths: n,
        exits,
        probability: p,
        std_error: (p * (1.0 - p) / nf).sqrt(),
        ci_low: (center - half).max(0.0),
        ci_high: (center + half).min(1.0),
    }
}

/// `eps^2 ln(mean_tau)`; exit times are at least one step.
pub fn scaled_log_mean(epsilon: f64, mean_tau: f64) -> Result<f64> {
    if !(mean_tau >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "mean exit time must be at least 1, got {mean_tau}"
        )));
    }
    Ok(epsilon * epsilon * mean_tau.ln())
}
