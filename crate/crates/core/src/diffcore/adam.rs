use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::network::ParamVector;
use crate::math;
use crate::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moments plus an exponentially decaying learning rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub learning_rate: f64,
    /// Multiplied into `learning_rate` by [`AdamState::end_epoch`].
    pub decay_factor: f64,
}

impl AdamState {
    pub fn new(len: usize, learning_rate: f64, decay_factor: f64) -> Self {
        Self {
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            step_count: 0,
            learning_rate,
            decay_factor,
        }
    }

    pub fn end_epoch(&mut self) {
        self.learning_rate *= self.decay_factor;
    }
}

/// One bias-corrected Adam step. Parameters are untouched when a gradient is non-finite.
pub fn adam_update(params: &mut ParamVector, grads: &[f64], state: &mut AdamState) -> Result<()> {
    let n = params.len();
    if grads.len() != n || state.first_moment.len() != n || state.second_moment.len() != n {
        return Err(Error::DimensionMismatch {
            layer: "adam".into(),
            expected: n,
            found: grads.len(),
        });
    }
    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index });
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let c1 = 1.0 - math::powi(BETA1, t);
    let c2 = 1.0 - math::powi(BETA2, t);
    for (((p, &g), m), v) in params
        .values
        .iter_mut()
        .zip(grads)
        .zip(&mut state.first_moment)
        .zip(&mut state.second_moment)
    {
        *m = BETA1 * *m + (1.0 - BETA1) * g;
        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= state.learning_rate * m_hat / (math::sqrt(v_hat) + EPSILON);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::network::ParamBlock;

    fn scalar_params(v: &[f64]) -> ParamVector {
        ParamVector {
            values: v.to_vec(),
            layout: vec![ParamBlock {
                name: "p".into(),
                rows: 1,
                cols: v.len(),
            }],
        }
    }

    #[test]
    fn zero_gradient_keeps_params_and_decays_moments() {
        let mut p = scalar_params(&[1.0, -2.0]);
        let mut s = AdamState::new(2, 0.1, 0.99);
        s.first_moment = vec![0.5, 0.5];
        s.second_moment = vec![0.25, 0.25];
        s.step_count = 3;
        let mut fresh = AdamState::new(2, 0.1, 0.99);
        adam_update(&mut p, &[0.0, 0.0], &mut fresh).unwrap();
        assert_eq!(p.values, vec![1.0, -2.0]);
        assert_eq!(fresh.step_count, 1);
        let mut q = scalar_params(&[0.0, 0.0]);
        adam_update(&mut q, &[0.0, 0.0], &mut s).unwrap();
        assert_eq!(s.first_moment, vec![0.45, 0.45]);
        assert!((s.second_moment[0] - 0.25 * 0.999).abs() < 1e-15);
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_sign() {
        let mut p = scalar_params(&[0.0, 0.0, 0.0]);
        let mut s = AdamState::new(3, 0.01, 1.0);
        adam_update(&mut p, &[3.0, -0.5, 1e-3], &mut s).unwrap();
        // m̂ = g, v̂ = g², step = lr·g/(|g| + ε)
        let expect = [-0.01 * 3.0 / (3.0 + 1e-8), 0.01 * 0.5 / (0.5 + 1e-8), -0.01 * 1e-3 / (1e-3 + 1e-8)];
        for (a, b) in p.values.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((p.values[0] + 0.01).abs() < 1e-9);
    }

    #[test]
    fn two_steps_match_scalar_oracle() {
        // Hand-rolled scalar Adam, g = 2 then g = -1, lr = 0.1.
        let (lr, g1, g2) = (0.1_f64, 2.0_f64, -1.0_f64);
        let mut x = 1.0_f64;
        let m1 = 0.1 * g1;
        let v1 = 0.001 * g1 * g1;
        x -= lr * (m1 / 0.1) / ((v1 / 0.001).sqrt() + 1e-8);
        let m2 = 0.9 * m1 + 0.1 * g2;
        let v2 = 0.999 * v1 + 0.001 * g2 * g2;
        let c1 = 1.0 - 0.9f64 * 0.9;
        let c2 = 1.0 - 0.999f64 * 0.999;
        x -= lr * (m2 / c1) / ((v2 / c2).sqrt() + 1e-8);

        let mut p = scalar_params(&[1.0]);
        let mut s = AdamState::new(1, lr, 1.0);
        adam_update(&mut p, &[g1], &mut s).unwrap();
        adam_update(&mut p, &[g2], &mut s).unwrap();
        assert!((p.values[0] - x).abs() < 1e-12);
        assert_eq!(s.step_count, 2);
    }

    #[test]
    fn non_finite_gradient_is_reported() {
        let mut p = scalar_params(&[0.0, 0.0]);
        let mut s = AdamState::new(2, 0.1, 1.0);
        let err = adam_update(&mut p, &[0.0, f64::NAN], &mut s).unwrap_err();
        assert_eq!(err, Error::NonFiniteGradient { index: 1 });
        assert_eq!(s.step_count, 0);
    }

    #[test]
    fn epoch_decay() {
        let mut s = AdamState::new(1, 1.0, 0.99);
        s.end_epoch();
        s.end_epoch();
        assert!((s.learning_rate - 0.9801).abs() < 1e-15);
    }
}
