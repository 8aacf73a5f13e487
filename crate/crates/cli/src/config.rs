//! Experiment configuration: JSON schema, validation, and assembly of core
//! objects. Anything rejected here is a schema error (exit code 2);
//! failures during computation map to exit code 3.

use nssapprox_core::cost::{CostFunction, CostMode};
use nssapprox_core::{DecreasingSequence, ProblemModel, SequenceKind};
use serde::Deserialize;

/// Sequence descriptor: the family tag plus optional label and claimed decay
/// rates (claims let finite tables stand in for infinite fixtures).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDescriptor {
    #[serde(flatten)]
    pub kind: SequenceKind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub claimed_decay_low: Option<f64>,
    #[serde(default)]
    pub claimed_decay_up: Option<f64>,
}

impl SequenceDescriptor {
    pub fn build(&self) -> Result<DecreasingSequence, String> {
        let mut seq = DecreasingSequence::new(self.kind.clone()).map_err(|e| e.to_string())?;
        if let Some(name) = &self.name {
            seq = seq.with_name(name);
        }
        if self.claimed_decay_low.is_some() || self.claimed_decay_up.is_some() {
            seq = seq.with_claimed_decay(self.claimed_decay_low, self.claimed_decay_up);
        }
        Ok(seq)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub gamma: SequenceDescriptor,
    pub lambda: SequenceDescriptor,
    #[serde(default = "default_true")]
    pub lambda_is_block_spectrum: bool,
}

fn default_true() -> bool {
    true
}

impl ModelDescriptor {
    pub fn build(&self) -> Result<ProblemModel, String> {
        let gamma = self.gamma.build()?;
        let lambda = self.lambda.build()?;
        let model = ProblemModel::new(gamma, lambda).map_err(|e| e.to_string())?;
        Ok(model.with_block_spectrum_flag(self.lambda_is_block_spectrum))
    }
}

/// Error-demand grid: explicit strictly decreasing list, or a geometric
/// specification `start, start*factor, ...` down to `stop` (inclusive).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EpsGridSpec {
    Explicit(Vec<f64>),
    Geometric { start: f64, stop: f64, factor: f64 },
}

impl EpsGridSpec {
    pub fn expand(&self) -> Result<Vec<f64>, String> {
        let grid = match self {
            EpsGridSpec::Explicit(v) => v.clone(),
            EpsGridSpec::Geometric { start, stop, factor } => {
                if !(*start > 0.0 && *start < 1.0) {
                    return Err(format!("grid start must lie in (0,1), got {start}"));
                }
                if !(*stop > 0.0 && stop <= start) {
                    return Err(format!("grid stop must lie in (0, start], got {stop}"));
                }
                if !(*factor > 0.0 && *factor < 1.0) {
                    return Err(format!("grid factor must lie in (0,1), got {factor}"));
                }
                let mut v = Vec::new();
                let mut eps = *start;
                // Tolerate one part in 1e12 of rounding drift at the stop.
                while eps >= stop * (1.0 - 1e-12) {
                    v.push(eps);
                    eps *= factor;
                    if v.len() > 100_000 {
                        return Err("grid expands to more than 100000 points".into());
                    }
                }
                v
            }
        };
        if grid.is_empty() {
            return Err("empty eps grid".into());
        }
        for &e in &grid {
            if !(e > 0.0 && e < 1.0) || !e.is_finite() {
                return Err(format!("grid values must lie in (0,1), got {e}"));
            }
        }
        if grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err("eps grid must be strictly decreasing".into());
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonAnovaBlock {
    #[serde(default)]
    pub c: Option<f64>,
    /// Relative tolerance for the certified constant (default 1e-6).
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessBlock {
    pub h_norm_sq: f64,
    pub c1: f64,
    pub budget_grid: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsBlock {
    pub d_lambda_low: f64,
    pub d_gamma_low: f64,
    pub d_gamma_up: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRow {
    pub d_gamma: f64,
    pub d_lambda: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    pub rows: Vec<CompareRow>,
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<ModelDescriptor>,
    pub cost: Option<CostFunction>,
    #[serde(default = "default_mode")]
    pub mode: CostMode,
    pub eps_grid: Option<EpsGridSpec>,
    #[serde(default)]
    pub term_budget: Option<u64>,
    /// Prefix prepended to every output file name.
    #[serde(default)]
    pub output_prefix: Option<String>,
    #[serde(default)]
    pub non_anova: Option<NonAnovaBlock>,
    #[serde(default)]
    pub witness: Option<WitnessBlock>,
    /// Explicit decay/cost exponents for bound evaluation; derived from the
    /// model and the polynomial cost exponent when absent.
    #[serde(default)]
    pub bounds: Option<BoundsBlock>,
    #[serde(default)]
    pub compare: Option<CompareBlock>,
}

fn default_mode() -> CostMode {
    CostMode::Nss
}

impl ExperimentConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self, String> {
        let cfg: ExperimentConfig =
            serde_json::from_slice(bytes).map_err(|e| format!("config parse error: {e}"))?;
        if let Some(cost) = &cfg.cost {
            cost.validate().map_err(|e| e.to_string())?;
        }
        if let Some(w) = &cfg.witness {
            if w.budget_grid.is_empty() {
                return Err("witness budget_grid must be non-empty".into());
            }
            if w.budget_grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
                return Err("witness budgets must be positive and finite".into());
            }
        }
        if let Some(b) = &cfg.bounds {
            if !(b.d_lambda_low > 1.0) || !(b.d_gamma_low > 1.0) || !(b.s > 0.0) {
                return Err("bounds block needs d_lambda_low > 1, d_gamma_low > 1, s > 0".into());
            }
            if b.d_gamma_up < b.d_gamma_low {
                return Err("bounds block has d_gamma_up below d_gamma_low".into());
            }
        }
        Ok(cfg)
    }

    pub fn require_model(&self) -> Result<ProblemModel, String> {
        self.model
            .as_ref()
            .ok_or_else(|| "config requires a \"model\" block".to_string())?
            .build()
    }

    pub fn require_cost(&self) -> Result<CostFunction, String> {
        self.cost
            .clone()
            .ok_or_else(|| "config requires a \"cost\" block".to_string())
    }

    pub fn require_grid(&self) -> Result<Vec<f64>, String> {
        self.eps_grid
            .as_ref()
            .ok_or_else(|| "config requires an \"eps_grid\"".to_string())?
            .expand()
    }

    /// Bound parameters: the explicit block when present, otherwise derived
    /// from the model's effective decays and the polynomial cost exponent.
    pub fn bound_params(&self) -> Result<BoundsBlock, String> {
        if let Some(b) = &self.bounds {
            return Ok(b.clone());
        }
        let model = self.require_model()?;
        let cost = self.require_cost()?;
        let s = cost
            .poly_exponent()
            .ok_or_else(|| "deriving bounds needs a polynomial cost (or an explicit bounds block)".to_string())?;
        Ok(BoundsBlock {
            d_lambda_low: model.lambda_seq().decay_low(),
            d_gamma_low: model.gamma_seq().decay_low(),
            d_gamma_up: model.gamma_seq().decay_up(),
            s,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let js = r#"{
            "model": {
                "gamma": {"kind": "power", "params": {"scale": 1.0, "exponent": 3.0}},
                "lambda": {"kind": "power", "params": {"scale": 1.0, "exponent": 2.0}}
            },
            "cost": {"kind": "poly", "s": 1.0},
            "eps_grid": [0.5, 0.25]
        }"#;
        let cfg = ExperimentConfig::parse(js.as_bytes()).unwrap();
        let model = cfg.require_model().unwrap();
        assert_eq!(model.gamma(2), 0.125);
        assert_eq!(cfg.require_grid().unwrap(), vec![0.5, 0.25]);
        let b = cfg.bound_params().unwrap();
        assert_eq!(b.d_gamma_low, 3.0);
        assert_eq!(b.s, 1.0);
    }

    #[test]
    fn geometric_grid_expands() {
        let spec = EpsGridSpec::Geometric {
            start: 0.5,
            stop: 0.0625,
            factor: 0.5,
        };
        assert_eq!(spec.expand().unwrap(), vec![0.5, 0.25, 0.125, 0.0625]);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(EpsGridSpec::Explicit(vec![0.2, 0.5]).expand().is_err());
        assert!(EpsGridSpec::Explicit(vec![]).expand().is_err());
        assert!(EpsGridSpec::Explicit(vec![1.5]).expand().is_err());
        let spec = EpsGridSpec::Geometric {
            start: 0.5,
            stop: 0.1,
            factor: 1.5,
        };
        assert!(spec.expand().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let js = r#"{"model": null, "bogus": 1}"#;
        assert!(ExperimentConfig::parse(js.as_bytes()).is_err());
    }

    #[test]
    fn table_cost_descriptor() {
        let js = r#"{
            "cost": {"kind": "table", "values": [1.0, 2.0, 4.0]},
            "eps_grid": {"start": 0.5, "stop": 0.25, "factor": 0.5}
        }"#;
        let cfg = ExperimentConfig::parse(js.as_bytes()).unwrap();
        assert_eq!(cfg.require_grid().unwrap().len(), 2);
        assert!(cfg.bound_params().is_err());
    }
}
