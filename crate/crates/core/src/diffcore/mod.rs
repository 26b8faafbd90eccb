//! Minimal reverse-mode differentiation for dense and simple recurrent networks.

mod adam;
mod gradcheck;
mod matrix;
mod network;
mod tape;

pub use adam::{adam_update, AdamState, BETA1, BETA2, EPSILON};
pub use gradcheck::{finite_diff_check, finite_diff_check_sampled, relative_error, RELATIVE_FLOOR};
pub use matrix::Matrix;
pub use network::{BoundNet, NetworkSpec, OutputActivation, ParamBlock, ParamVector, RecurrentSpec};
pub use tape::{Gradients, Tape, Var};

use crate::Result;

/// Mean squared error between two equally shaped nodes.
pub fn mse(tape: &mut Tape, prediction: Var, target: Var) -> Var {
    let d = tape.sub(prediction, target);
    let sq = tape.square(d);
    tape.mean(sq)
}

/// Loss and flat parameter gradient of a batched MSE regression, the workhorse of
/// supervised training and of the gradient checks.
pub fn mlp_mse_loss_and_grad(
    spec: &NetworkSpec,
    params: &ParamVector,
    inputs: &Matrix,
    targets: &Matrix,
) -> Result<(f64, alloc::vec::Vec<f64>)> {
    let mut tape = Tape::new();
    let net = spec.bind(&mut tape, params, true)?;
    let x = tape.constant(inputs.clone());
    let y = tape.constant(targets.clone());
    let out = net.forward(&mut tape, x)?;
    let loss = mse(&mut tape, out, y);
    let grads = tape.backward(loss)?;
    Ok((tape.scalar(loss), net.gradient(&tape, &grads)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, uniform, Rng};
    use alloc::vec::Vec;

    fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| uniform(rng, -1.0, 1.0)).collect())
    }

    #[test]
    fn linear_model_gradient_is_exact() {
        let mut rng = seeded(1);
        let spec = NetworkSpec::mlp(3, &[], 2, OutputActivation::Identity);
        let params = spec.init(&mut rng);
        let x = random_matrix(&mut rng, 8, 3);
        let y = random_matrix(&mut rng, 8, 2);
        let err = finite_diff_check(&params, 1e-5, |p| mlp_mse_loss_and_grad(&spec, p, &x, &y)).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn two_layer_mlp_gradient() {
        let mut rng = seeded(2);
        let spec = NetworkSpec::mlp(4, &[9, 6], 3, OutputActivation::Tanh);
        let params = spec.init(&mut rng);
        let x = random_matrix(&mut rng, 10, 4);
        let y = random_matrix(&mut rng, 10, 3);
        let err = finite_diff_check(&params, 1e-5, |p| mlp_mse_loss_and_grad(&spec, p, &x, &y)).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    fn unrolled_loss(spec: &NetworkSpec, params: &ParamVector, xs: &[Matrix], target: &Matrix) -> Result<(f64, Vec<f64>)> {
        let mut tape = Tape::new();
        let net = spec.bind(&mut tape, params, true)?;
        let c = spec.cell_size().unwrap();
        let mut h = tape.constant(Matrix::zeros(xs[0].rows(), c));
        let mut acc = None;
        for x in xs {
            let xv = tape.constant(x.clone());
            let (o, h2) = net.step(&mut tape, xv, h)?;
            h = h2;
            let t = tape.constant(target.clone());
            let l = mse(&mut tape, o, t);
            acc = Some(match acc {
                None => l,
                Some(a) => tape.add(a, l),
            });
        }
        let loss = acc.unwrap();
        let g = tape.backward(loss)?;
        Ok((tape.scalar(loss), net.gradient(&tape, &g)))
    }

    #[test]
    fn recurrent_unroll_gradient() {
        let mut rng = seeded(3);
        let spec = NetworkSpec::recurrent(3, 5, &[4], 2);
        let params = spec.init(&mut rng);
        let xs: Vec<Matrix> = (0..5).map(|_| random_matrix(&mut rng, 4, 3)).collect();
        let y = random_matrix(&mut rng, 4, 2);
        let err = finite_diff_check(&params, 1e-5, |p| unrolled_loss(&spec, p, &xs, &y)).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn deep_recurrent_unroll_gradient() {
        let mut rng = seeded(4);
        let spec = NetworkSpec::recurrent(2, 6, &[], 2);
        let params = spec.init(&mut rng);
        let xs: Vec<Matrix> = (0..50).map(|_| random_matrix(&mut rng, 2, 2)).collect();
        let y = random_matrix(&mut rng, 2, 2);
        let err = finite_diff_check_sampled(&params, 1e-5, 40, &mut seeded(5), |p| unrolled_loss(&spec, p, &xs, &y)).unwrap();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn batch_gradient_is_sum_of_sample_gradients() {
        let mut rng = seeded(6);
        let spec = NetworkSpec::mlp(2, &[5], 1, OutputActivation::Identity);
        let params = spec.init(&mut rng);
        let x = random_matrix(&mut rng, 6, 2);
        let y = random_matrix(&mut rng, 6, 1);
        // mean over 6 samples → batch grad = (1/6) Σ per-sample grads
        let (_, batch) = mlp_mse_loss_and_grad(&spec, &params, &x, &y).unwrap();
        let mut summed = alloc::vec![0.0; params.len()];
        for r in 0..6 {
            let xi = Matrix::row_vector(x.row(r));
            let yi = Matrix::row_vector(y.row(r));
            let (_, g) = mlp_mse_loss_and_grad(&spec, &params, &xi, &yi).unwrap();
            summed.iter_mut().zip(&g).for_each(|(s, v)| *s += v / 6.0);
        }
        for (a, b) in batch.iter().zip(&summed) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn training_is_bit_deterministic() {
        let run = || {
            let mut rng = seeded(7);
            let spec = NetworkSpec::mlp(2, &[6], 1, OutputActivation::Identity);
            let mut params = spec.init(&mut rng);
            let x = random_matrix(&mut rng, 16, 2);
            let y = random_matrix(&mut rng, 16, 1);
            let mut adam = AdamState::new(params.len(), 1e-2, 0.99);
            for _ in 0..50 {
                let (_, g) = mlp_mse_loss_and_grad(&spec, &params, &x, &y).unwrap();
                adam_update(&mut params, &g, &mut adam).unwrap();
            }
            params.values
        };
        assert_eq!(run(), run());
    }
}
