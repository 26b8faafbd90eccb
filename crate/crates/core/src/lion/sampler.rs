use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::{Error, Result};

/// Beta-distributed λ sampler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSampler {
    pub a: f64,
    pub b: f64,
}

impl Default for LambdaSampler {
    fn default() -> Self {
        Self { a: 0.1, b: 0.1 }
    }
}

impl LambdaSampler {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let s = Self { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidConfig("Beta parameters must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let beta = Beta::new(self.a, self.b).expect("validated Beta parameters");
        beta.sample(rng).clamp(0.0, 1.0)
    }
}

/// Draws one λ from `sampler`.
pub fn sample_lambda(sampler: &LambdaSampler, rng: &mut Rng) -> f64 {
    sampler.sample(rng)
}
