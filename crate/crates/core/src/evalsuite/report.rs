use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineMethod {
    Discrete,
    ReturnCond,
    LambdaTd3bc,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Discrete => "discrete",
            BaselineMethod::ReturnCond => "return-cond",
            BaselineMethod::LambdaTd3bc => "lambda-td3bc",
        }
    }
}

/// An expected qualitative outcome, recorded against what this run saw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub name: String,
    pub expected: String,
    pub observed: bool,
    pub detail: String,
}

impl Finding {
    pub fn new(name: &str, expected: &str, observed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            expected: expected.into(),
            observed,
            detail,
        }
    }
}

/// Mean squared action change between neighbouring settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adjacency {
    pub jumps: Vec<f64>,
    pub mean: f64,
    pub max: f64,
}

impl Adjacency {
    pub fn from_jumps(jumps: Vec<f64>) -> Self {
        let mean = if jumps.is_empty() { 0.0 } else { jumps.iter().sum::<f64>() / jumps.len() as f64 };
        let max = jumps.iter().cloned().fold(0.0, f64::max);
        Self { jumps, mean, max }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub method: BaselineMethod,
    /// Trade-off parameter of every setting, ascending.
    pub settings: Vec<f64>,
    pub mean_return: Vec<f64>,
    pub return_stderr: Vec<f64>,
    pub behavior_distance: Vec<f64>,
    pub adjacency: Adjacency,
    /// Same statistic for the λ-conditioned policy on the same grid, when compared.
    pub reference_adjacency: Option<Adjacency>,
    pub findings: Vec<Finding>,
    /// Set when training stopped early; the arrays then cover what finished.
    pub error: Option<String>,
}

impl BaselineReport {
    pub fn is_well_formed(&self) -> bool {
        let n = self.settings.len();
        self.settings.windows(2).all(|w| w[0] < w[1])
            && self.mean_return.len() == n
            && self.return_stderr.len() == n
            && self.behavior_distance.len() == n
            && self.adjacency.jumps.len() == n.saturating_sub(1)
            && self.reference_adjacency.as_ref().map_or(true, |a| a.jumps.len() == n.saturating_sub(1))
    }
}

/// λ = 0 mismatch per training setting (Beta-parameter and η ablations).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingScore {
    pub setting: f64,
    pub behavior_mismatch: f64,
    pub dataset_action_mse: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationKind {
    Beta,
    Eta,
    Aggregation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub kind: AblationKind,
    pub scores: Vec<SettingScore>,
    pub findings: Vec<Finding>,
}

impl AblationReport {
    pub fn is_well_formed(&self) -> bool {
        self.scores.windows(2).all(|w| w[0].setting < w[1].setting)
            && self.scores.iter().all(|s| s.behavior_mismatch >= 0.0 && s.dataset_action_mse >= 0.0)
    }
}
