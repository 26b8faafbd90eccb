use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::data::NormStats;
use crate::diffcore::{NetworkSpec, OutputActivation, ParamVector};
use crate::rng::Rng;
use crate::{Error, Result};

/// How λ reaches the network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "lambda")]
pub enum Conditioning {
    /// λ is appended to the normalized state as one extra input.
    Input,
    /// Trained for a single λ; the network sees the state only.
    Fixed(f64),
}

/// Deterministic policy π(s, λ) with tanh-bounded actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LionPolicy {
    pub spec: NetworkSpec,
    pub params: ParamVector,
    pub norm: NormStats,
    pub conditioning: Conditioning,
}

impl LionPolicy {
    pub fn init(norm: &NormStats, action_dim: usize, hidden: &[usize], conditioning: Conditioning, rng: &mut Rng) -> Self {
        let extra = usize::from(conditioning == Conditioning::Input);
        let spec = NetworkSpec::mlp(norm.state_dim() + extra, hidden, action_dim, OutputActivation::Tanh);
        Self {
            params: spec.init(rng),
            spec,
            norm: norm.clone(),
            conditioning,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.norm.state_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.spec.output_dim
    }

    pub fn is_conditioned(&self) -> bool {
        self.conditioning == Conditioning::Input
    }

    /// Action for raw `state` at proximity `lambda`.
    pub fn act(&self, state: &[f64], lambda: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::LambdaOutOfRange(lambda));
        }
        self.act_normalized(&self.norm.normalize(state), lambda)
    }

    pub(crate) fn act_normalized(&self, z: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let mut input = Vec::with_capacity(self.spec.input_dim);
        input.extend_from_slice(z);
        if self.is_conditioned() {
            input.push(lambda);
        }
        Ok(self.spec.forward(&self.params, &input, None)?.0)
    }
}
