// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a JSON document validated before any computation.

use std::path::PathBuf;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use spinbath::model::{BathSpec, ChainParams, LindbladModel};
use spinbath::operators::{
    embed_site, identity, n_minus, n_plus, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z,
    CMatrix, ChainOperator,
};
use spinbath::rqi::DEFAULT_H_GRID;
use spinbath::EvolveMethod;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub n_sites: usize,
    pub b_field: f64,
    pub jx: f64,
    pub jy: f64,
    pub baths: Vec<BathEntry>,
    #[serde(default)]
    pub analysis: Analysis,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathEntry {
    pub site: usize,
    pub beta: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    /// Root seed of every stochastic sweep.
    pub seed: Option<u64>,
    /// Tolerance of the numerical contract checks.
    pub tol: Option<f64>,
    /// Report path; `--out` takes precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub evolve: EvolveOptions,
    #[serde(default)]
    pub entropy: EntropyOptions,
    #[serde(default)]
    pub rqi: RqiOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Random,
    MaximallyMixed,
    AllUp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOptions {
    pub t_max: f64,
    pub steps: usize,
    pub method: EvolveMethod,
    pub rk_tol: f64,
    pub initial: InitialState,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            steps: 100,
            method: EvolveMethod::ExactExpm,
            rk_tol: 1e-10,
            initial: InitialState::Random,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyOptions {
    /// Random faithful states evaluated besides the stationary state.
    pub samples: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self { samples: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SiteOp {
    #[serde(rename = "sx")]
    SigmaX,
    #[serde(rename = "sy")]
    SigmaY,
    #[serde(rename = "sz")]
    SigmaZ,
    #[serde(rename = "s+")]
    SigmaPlus,
    #[serde(rename = "s-")]
    SigmaMinus,
    #[serde(rename = "n+")]
    NPlus,
    #[serde(rename = "n-")]
    NMinus,
}

impl SiteOp {
    fn name(self) -> &'static str {
        match self {
            SiteOp::SigmaX => "sx",
            SiteOp::SigmaY => "sy",
            SiteOp::SigmaZ => "sz",
            SiteOp::SigmaPlus => "s+",
            SiteOp::SigmaMinus => "s-",
            SiteOp::NPlus => "n+",
            SiteOp::NMinus => "n-",
        }
    }

    fn matrix(self) -> CMatrix {
        match self {
            SiteOp::SigmaX => sigma_x(),
            SiteOp::SigmaY => sigma_y(),
            SiteOp::SigmaZ => sigma_z(),
            SiteOp::SigmaPlus => sigma_plus(),
            SiteOp::SigmaMinus => sigma_minus(),
            SiteOp::NPlus => n_plus(),
            SiteOp::NMinus => n_minus(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub site: usize,
    pub op: SiteOp,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RqiOptions {
    pub h_grid: Option<Vec<f64>>,
    /// Each observable is a product of single-site factors.
    pub observables: Option<Vec<Vec<Factor>>>,
}

/// A parsed configuration together with its validated model.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub model: LindbladModel,
    pub digest: String,
}

impl Loaded {
    pub fn seed(&self) -> u64 {
        self.config.analysis.seed.unwrap_or(0)
    }

    pub fn tol(&self) -> f64 {
        self.config.analysis.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn h_grid(&self) -> Vec<f64> {
        self.config
            .analysis
            .rqi
            .h_grid
            .clone()
            .unwrap_or_else(|| DEFAULT_H_GRID.to_vec())
    }

    /// Configured observables, or `n+(1)`, `sz(1)` and, for `N >= 2`, `sx(1)sx(2)`.
    pub fn observables(&self) -> Result<Vec<(String, ChainOperator)>, CliError> {
        let n = self.model.n_sites();
        let specs = match &self.config.analysis.rqi.observables {
            Some(s) => s.clone(),
            None => {
                let mut d = vec![
                    vec![Factor {
                        site: 1,
                        op: SiteOp::NPlus,
                    }],
                    vec![Factor {
                        site: 1,
                        op: SiteOp::SigmaZ,
                    }],
                ];
                if n >= 2 {
                    d.push(vec![
                        Factor {
                            site: 1,
                            op: SiteOp::SigmaX,
                        },
                        Factor {
                            site: 2,
                            op: SiteOp::SigmaX,
                        },
                    ]);
                }
                d
            }
        };
        specs.iter().map(|f| observable(n, f)).collect()
    }
}

fn observable(n: usize, factors: &[Factor]) -> Result<(String, ChainOperator), CliError> {
    if factors.is_empty() {
        return Err(CliError::Validation("observable with no factors".into()));
    }
    let mut label = String::new();
    let mut m: CMatrix = identity(1 << n);
    for f in factors {
        label.push_str(&format!("{}({})", f.op.name(), f.site));
        m = m * embed_site(&f.op.matrix(), f.site, n)?.into_matrix();
    }
    Ok((label, ChainOperator::new(n, m)?))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Parses and validates a configuration; no numerics run before this succeeds.
pub fn parse(bytes: &[u8]) -> Result<Loaded, CliError> {
    let config: RunConfig =
        serde_json::from_slice(bytes).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::Validation(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    if config.baths.is_empty() {
        return Err(CliError::Validation("at least one bath required".into()));
    }
    let a = &config.analysis;
    if let Some(t) = a.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Validation(format!(
                "tol must be positive, got {t}"
            )));
        }
    }
    let ev = &a.evolve;
    if !(ev.t_max.is_finite() && ev.t_max > 0.0) || ev.steps == 0 {
        return Err(CliError::Validation(
            "evolve needs t_max > 0 and steps >= 1".into(),
        ));
    }
    if !(ev.rk_tol.is_finite() && ev.rk_tol > 0.0) {
        return Err(CliError::Validation(
            "evolve.rk_tol must be positive".into(),
        ));
    }
    let params = ChainParams::new(config.n_sites, config.b_field, config.jx, config.jy)?;
    let baths = config
        .baths
        .iter()
        .map(|b| BathSpec::new(b.site, b.beta))
        .collect::<Result<Vec<_>, _>>()?;
    let model = LindbladModel::new(params, baths)?;
    let loaded = Loaded {
        config,
        model,
        digest: sha256_hex(bytes),
    };
    for f in loaded.config.analysis.rqi.observables.iter().flatten() {
        if f.is_empty() {
            return Err(CliError::Validation("observable with no factors".into()));
        }
        if let Some(bad) = f
            .iter()
            .find(|x| x.site == 0 || x.site > loaded.model.n_sites())
        {
            return Err(CliError::Validation(format!(
                "observable site {} out of range 1..={}",
                bad.site,
                loaded.model.n_sites()
            )));
        }
    }
    Ok(loaded)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"schema_version":1,"n_sites":3,"b_field":1.0,"jx":1.0,"jy":1.0,
        "baths":[{"site":1,"beta":0.5},{"site":3,"beta":1.0}]}"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let l = parse(BASE.as_bytes()).unwrap();
        assert_eq!(l.model.baths.len(), 2);
        assert_eq!(l.tol(), DEFAULT_TOL);
        assert_eq!(l.h_grid(), DEFAULT_H_GRID.to_vec());
        assert_eq!(l.observables().unwrap().len(), 3);
        assert_eq!(l.digest.len(), 64);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_versions() {
        let extra = BASE.replace("\"jy\":1.0", "\"jy\":1.0,\"jz\":1.0");
        assert!(matches!(
            parse(extra.as_bytes()),
            Err(CliError::Validation(_))
        ));
        let nested = BASE.replace(
            "\"jy\":1.0",
            "\"jy\":1.0,\"analysis\":{\"evolve\":{\"dt\":0.1}}",
        );
        assert!(matches!(
            parse(nested.as_bytes()),
            Err(CliError::Validation(_))
        ));
        let v2 = BASE.replace("\"schema_version\":1", "\"schema_version\":2");
        assert!(matches!(parse(v2.as_bytes()), Err(CliError::Validation(_))));
    }

    #[test]
    fn rejects_empty_and_duplicate_baths() {
        let none = r#"{"schema_version":1,"n_sites":1,"b_field":1.0,"jx":1.0,"jy":1.0,"baths":[]}"#;
        match parse(none.as_bytes()) {
            Err(CliError::Validation(m)) => assert_eq!(m, "at least one bath required"),
            other => panic!("unexpected {other:?}"),
        }
        let dup = BASE.replace("\"site\":3", "\"site\":1");
        assert!(matches!(
            parse(dup.as_bytes()),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn observable_labels_and_products() {
        let (label, x) = observable(
            2,
            &[
                Factor {
                    site: 1,
                    op: SiteOp::SigmaX,
                },
                Factor {
                    site: 2,
                    op: SiteOp::SigmaX,
                },
            ],
        )
        .unwrap();
        assert_eq!(label, "sx(1)sx(2)");
        assert_eq!(x.matrix()[(0, 3)].re, 1.0);
        assert!(observable(
            2,
            &[Factor {
                site: 3,
                op: SiteOp::SigmaZ
            }]
        )
        .is_err());
    }
}
