//! Run configuration, read from TOML.
//!
//! See `configs/example.toml` for an annotated file covering every field.

use std::path::{Path as FsPath, PathBuf};

use arexit::process::embed_arn;
use arexit::{ArModel, ArnModel, ExitSpec, Matrix, McConfig, NoiseShape, Sidedness, Vector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub exit: ExitSection,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
}

/// Exactly one model variant, selected by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSection {
    /// Vector AR(1): `X_t = A X_{t-1} + eps * xi_t`.
    Matrix {
        /// Optional; checked against `a` when present.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        a: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        /// Start point; the origin when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<Vec<f64>>,
        #[serde(default)]
        noise: NoiseShape,
    },
    /// Scalar AR(n): `X_t = b_1 X_{t-1} + .. + b_n X_{t-n} + eps * xi_t`.
    Arn {
        coefficients: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        /// `x_0 .. x_{n-1}`; zeros when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        starts: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExitSection {
    /// Exit direction. Required for matrix models; must be omitted for AR(n),
    /// which always exits on its own value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    pub level: f64,
    pub sided: Sidedness,
}

impl Default for ExitSection {
    fn default() -> Self {
        Self {
            c: None,
            level: 1.0,
            sided: Sidedness::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    /// Aligned table for reading.
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    /// Horizons `N` for the finite-horizon exponent table.
    pub horizons: Vec<usize>,
    /// Horizon of the dumped optimal exit path.
    pub path_horizon: usize,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self {
            horizons: vec![1, 2, 5, 10, 20, 50, 100],
            path_horizon: 10,
        }
    }
}

/// Model and exit rule assembled from a config, AR(n) already embedded.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: ArModel,
    pub exit: ExitSpec,
    /// Original scalar model when the config was AR(n).
    pub arn: Option<ArnModel>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &FsPath) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn epsilon(&self) -> Option<f64> {
        match &self.model {
            ModelSection::Matrix { epsilon, .. } | ModelSection::Arn { epsilon, .. } => *epsilon,
        }
    }

    /// Checks mutual consistency of dimensions and parameter ranges.
    pub fn validate(&self) -> Result<(), CliError> {
        self.resolve_with(self.epsilon().unwrap_or(1.0)).map(|_| ())?;
        self.mc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.analyze.path_horizon < 1 || self.analyze.horizons.iter().any(|&n| n < 1) {
            return Err(CliError::Config("analyze horizons must be at least 1".into()));
        }
        Ok(())
    }

    /// Builds the model with noise scale `epsilon`.
    pub fn resolve_with(&self, epsilon: f64) -> Result<Resolved, CliError> {
        let bad = |e: arexit::Error| CliError::Config(e.to_string());
        match &self.model {
            ModelSection::Matrix { d, a, x0, noise, .. } => {
                let a = Matrix::from_rows(a).map_err(bad)?;
                if !a.is_square() {
                    return Err(CliError::Config(format!("model.a must be square, got {}x{}", a.rows(), a.cols())));
                }
                let dim = a.rows();
                if let Some(d) = d {
                    if *d != dim {
                        return Err(CliError::Config(format!("model.d = {d} but model.a is {dim}x{dim}")));
                    }
                }
                let x0 = match x0 {
                    Some(v) => Vector::new(v.clone()).map_err(bad)?,
                    None => Vector::zeros(dim),
                };
                let model = ArModel::with_noise(a, epsilon, x0, *noise).map_err(bad)?;
                let c = self
                    .exit
                    .c
                    .as_ref()
                    .ok_or_else(|| CliError::Config("exit.c is required for matrix models".into()))?;
                if c.len() != dim {
                    return Err(CliError::Config(format!("exit.c has {} entries, model has dimension {dim}", c.len())));
                }
                let exit = ExitSpec::new(Vector::new(c.clone()).map_err(bad)?, self.exit.sided, self.exit.level)
                    .map_err(bad)?;
                Ok(Resolved { model, exit, arn: None })
            }
            ModelSection::Arn { coefficients, starts, .. } => {
                if self.exit.c.is_some() {
                    return Err(CliError::Config("exit.c must be omitted for AR(n) models".into()));
                }
                let n = coefficients.len();
                let starts = starts.clone().unwrap_or_else(|| vec![0.0; n]);
                let arn = ArnModel::new(coefficients.clone(), epsilon, starts).map_err(bad)?;
                let (model, c) = embed_arn(&arn).map_err(bad)?;
                let exit = ExitSpec::new(c, self.exit.sided, self.exit.level).map_err(bad)?;
                Ok(Resolved {
                    model,
                    exit,
                    arn: Some(arn),
                })
            }
        }
    }
}

/// The bivariate model `A = [[0.8, 1], [0, 0.5]]`, `c = (1, 1)`, started at
/// the origin.
pub fn table1_config() -> RunConfig {
    RunConfig {
        model: ModelSection::Matrix {
            d: Some(2),
            a: vec![vec![0.8, 1.0], vec![0.0, 0.5]],
            epsilon: None,
            x0: Some(vec![0.0, 0.0]),
            noise: NoiseShape::Identity,
        },
        exit: ExitSection {
            c: Some(vec![1.0, 1.0]),
            ..ExitSection::default()
        },
        mc: McConfig::default(),
        output: OutputSection::default(),
        analyze: AnalyzeSection::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MATRIX: &str = r#"
        [model]
        kind = "matrix"
        a = [[0.8, 1.0], [0.0, 0.5]]
        epsilon = 0.1

        [exit]
        c = [1.0, 1.0]
    "#;

    #[test]
    fn minimal_matrix_config() {
        let cfg = RunConfig::from_toml_str(MATRIX).unwrap();
        assert_eq!(cfg.mc, McConfig::default());
        let r = cfg.resolve_with(0.1).unwrap();
        assert_eq!(r.model.start(), &Vector::zeros(2));
        assert_eq!(r.exit.level(), 1.0);
    }

    #[test]
    fn rejects_inconsistent_dimensions() {
        let bad_c = MATRIX.replace("c = [1.0, 1.0]", "c = [1.0]");
        assert!(RunConfig::from_toml_str(&bad_c).is_err());
        let bad_d = MATRIX.replace("kind = \"matrix\"", "kind = \"matrix\"\nd = 3");
        assert!(RunConfig::from_toml_str(&bad_d).is_err());
        let ragged = MATRIX.replace("[[0.8, 1.0], [0.0, 0.5]]", "[[0.8, 1.0], [0.0]]");
        assert!(RunConfig::from_toml_str(&ragged).is_err());
        let no_c = MATRIX.replace("c = [1.0, 1.0]", "");
        assert!(RunConfig::from_toml_str(&no_c).is_err());
    }

    #[test]
    fn rejects_unknown_and_mixed_variants() {
        let extra = MATRIX.replace("epsilon = 0.1", "epsilon = 0.1\ncoefficients = [0.5]");
        assert!(RunConfig::from_toml_str(&extra).is_err());
        let unknown = MATRIX.replace("kind = \"matrix\"", "kind = \"garch\"");
        assert!(RunConfig::from_toml_str(&unknown).is_err());
    }

    #[test]
    fn arn_config_embeds() {
        let cfg = RunConfig::from_toml_str(
            r#"
            [model]
            kind = "arn"
            coefficients = [0.5, 0.2]
            epsilon = 0.2
            starts = [0.1, 0.3]
        "#,
        )
        .unwrap();
        let r = cfg.resolve_with(0.2).unwrap();
        assert_eq!(r.model.noise(), NoiseShape::FirstCoordinate);
        assert_eq!(r.model.start(), &Vector::new(vec![0.3, 0.1]).unwrap());
        assert_eq!(r.exit.c(), &Vector::unit(2, 0));
    }

    #[test]
    fn large_seeds_survive_toml() {
        let mut cfg = table1_config();
        cfg.mc.seed = u64::MAX;
        let back = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
