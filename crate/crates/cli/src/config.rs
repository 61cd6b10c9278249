use std::path::Path;

use serde::{Deserialize, Serialize};

use momentdet::determinacy_md::CheckConfig;
use momentdet::moment_core::PrecisionPolicy;
use momentdet::quadrature::QuadOptions;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        let q = QuadOptions::default();
        QuadConfig { abs_tol: q.abs_tol, rel_tol: q.rel_tol, max_evals: q.max_evals }
    }
}

/// Everything that influences a computation. Written into every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub precision_bits: usize,
    pub tau_psd: Option<f64>,
    pub lambda_reg: f64,
    pub quadrature: QuadConfig,
    pub check: CheckConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_bits: 256,
            tau_psd: None,
            lambda_reg: 0.0,
            quadrature: QuadConfig::default(),
            check: CheckConfig::default(),
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = crate::read_file(path)?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Core(momentdet::Error::Parse { line: e.line(), col: e.column(), msg: format!("{}: {e}", path.display()) })
        })
    }

    pub fn quad(&self) -> QuadOptions {
        QuadOptions { abs_tol: self.quadrature.abs_tol, rel_tol: self.quadrature.rel_tol, max_evals: self.quadrature.max_evals }
    }

    pub fn policy(&self) -> Result<PrecisionPolicy, CliError> {
        let p = PrecisionPolicy { bits: self.precision_bits, tau_psd: self.tau_psd, lambda_reg: self.lambda_reg, quadrature: self.quad() };
        p.validate()?;
        Ok(p)
    }
}
