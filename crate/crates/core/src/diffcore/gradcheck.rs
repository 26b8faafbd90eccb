use alloc::vec::Vec;

use super::network::ParamVector;
use crate::math;
use crate::rng::{index, Rng};
use crate::Result;

/// Relative error convention used by the checker: `|a − n| / max(|a|, |n|, floor)`.
pub const RELATIVE_FLOOR: f64 = 1e-7;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = math::abs(analytic).max(math::abs(numeric)).max(RELATIVE_FLOOR);
    math::abs(analytic - numeric) / denom
}

/// Compares the analytic gradient returned by `loss_and_grad` with central
/// differences over every parameter and reports the worst relative error.
pub fn finite_diff_check<F>(params: &ParamVector, eps: f64, loss_and_grad: F) -> Result<f64>
where
    F: Fn(&ParamVector) -> Result<(f64, Vec<f64>)>,
{
    let all: Vec<usize> = (0..params.len()).collect();
    check_indices(params, eps, &all, loss_and_grad)
}

/// As [`finite_diff_check`], over `count` parameters drawn with replacement.
pub fn finite_diff_check_sampled<F>(
    params: &ParamVector,
    eps: f64,
    count: usize,
    rng: &mut Rng,
    loss_and_grad: F,
) -> Result<f64>
where
    F: Fn(&ParamVector) -> Result<(f64, Vec<f64>)>,
{
    let picks: Vec<usize> = (0..count).map(|_| index(rng, params.len())).collect();
    check_indices(params, eps, &picks, loss_and_grad)
}

fn check_indices<F>(params: &ParamVector, eps: f64, indices: &[usize], loss_and_grad: F) -> Result<f64>
where
    F: Fn(&ParamVector) -> Result<(f64, Vec<f64>)>,
{
    assert!(eps > 0.0, "finite difference step must be positive");
    let (_, analytic) = loss_and_grad(params)?;
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for &i in indices {
        let base = probe.values[i];
        probe.values[i] = base + eps;
        let (up, _) = loss_and_grad(&probe)?;
        probe.values[i] = base - eps;
        let (down, _) = loss_and_grad(&probe)?;
        probe.values[i] = base;
        let numeric = (up - down) / (2.0 * eps);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    Ok(worst)
}
