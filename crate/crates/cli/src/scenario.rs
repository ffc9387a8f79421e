//! Scenario files: TOML documents that carry one market configuration and an
//! optional sweep block. Unknown keys are rejected.

use ecsearch::sweep::{SweepAxis, SweepParam, SweepSpec};
use ecsearch::{DemandSpec, MarketConfig, Mode};
use serde::Deserialize;
use std::fmt;

#[derive(Debug)]
pub enum ScenarioError {
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse(m) => write!(f, "scenario parse error: {m}"),
            ScenarioError::Invalid(m) => write!(f, "scenario invalid: {m}"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandSection {
    intercept: f64,
    slope: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    param: String,
    min: f64,
    max: f64,
    steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
enum ModeField {
    #[default]
    Standard,
    InfoGoods,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    demand: DemandSection,
    lambda: f64,
    c_p: f64,
    delta_c: f64,
    #[serde(rename = "K")]
    setup_cost: f64,
    sigma: f64,
    delta_sigma: f64,
    delta: f64,
    #[serde(default)]
    e: f64,
    #[serde(default)]
    mode: ModeField,
    #[serde(default)]
    sweep: Vec<SweepSection>,
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: MarketConfig,
    pub mode: Mode,
    pub sweep: Option<SweepSpec>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let cfg = MarketConfig {
        lambda: file.lambda,
        c_p: file.c_p,
        delta_c: file.delta_c,
        setup_cost: file.setup_cost,
        sigma: file.sigma,
        delta_sigma: file.delta_sigma,
        delta_delivery: file.delta,
        e_loss: file.e,
        demand: DemandSpec::linear(file.demand.intercept, file.demand.slope),
    };
    cfg.validate()
        .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    let mode = match file.mode {
        ModeField::Standard => Mode::Standard,
        ModeField::InfoGoods => Mode::InfoGoods,
    };
    let sweep = if file.sweep.is_empty() {
        None
    } else {
        let axes = file
            .sweep
            .iter()
            .map(|s| {
                let param = SweepParam::parse(&s.param).ok_or_else(|| {
                    ScenarioError::Invalid(format!(
                        "unknown sweep parameter {:?}; expected lambda, delta_c or K",
                        s.param
                    ))
                })?;
                Ok(SweepAxis { param, min: s.min, max: s.max, steps: s.steps })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let spec = SweepSpec { axes };
        spec.validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Some(spec)
    };
    Ok(Scenario { cfg, mode, sweep })
}
