use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::params::ParamSet;
use crate::nn::tape::{Tape, Var};

/// Central-difference step used by the standard checks.
pub const DEFAULT_FD_EPSILON: f64 = 1e-5;

/// Relative error between an analytic and a numeric derivative, with the
/// denominator floored at 1 so near-zero derivatives compare absolutely.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(1.0)
}

fn eval_scalar<F>(forward: &mut F, params: &ParamSet) -> Result<f64>
where
    F: FnMut(&mut Tape, &ParamSet) -> Result<Var>,
{
    let mut tape = Tape::new();
    let root = forward(&mut tape, params)?;
    let v = tape.value(root);
    if v.len() != 1 {
        return Err(Error::Verification(format!(
            "gradient check needs a scalar loss, got shape {:?}",
            v.shape()
        )));
    }
    Ok(v.item())
}

fn check_elements<F>(
    params: &mut ParamSet,
    fd_epsilon: f64,
    elements: &[(usize, usize)],
    forward: &mut F,
) -> Result<f64>
where
    F: FnMut(&mut Tape, &ParamSet) -> Result<Var>,
{
    // A stochastic forward would make finite differences meaningless, so
    // insist on bitwise repeatability first.
    let probe_a = eval_scalar(forward, params)?;
    let probe_b = eval_scalar(forward, params)?;
    if probe_a.to_bits() != probe_b.to_bits() {
        return Err(Error::Verification(format!(
            "forward pass is not deterministic: {probe_a:?} vs {probe_b:?}"
        )));
    }

    params.zero_grads();
    let mut tape = Tape::new();
    let root = forward(&mut tape, params)?;
    tape.backward(root, params);
    let analytic: Vec<Vec<f64>> = params.iter().map(|(_, p)| p.grad().data().to_vec()).collect();

    let ids: Vec<_> = params.iter().map(|(id, _)| id).collect();
    let mut worst = 0.0f64;
    for &(pi, e) in elements {
        let id = ids[pi];
        let orig = params.value(id).data()[e];
        params.value_mut(id).data_mut()[e] = orig + fd_epsilon;
        let plus = eval_scalar(forward, params)?;
        params.value_mut(id).data_mut()[e] = orig - fd_epsilon;
        let minus = eval_scalar(forward, params)?;
        params.value_mut(id).data_mut()[e] = orig;
        let numeric = (plus - minus) / (2.0 * fd_epsilon);
        worst = worst.max(relative_error(analytic[pi][e], numeric));
    }
    Ok(worst)
}

/// Compare every parameter element's analytic gradient against central
/// finite differences of the scalar produced by `forward`. Returns the
/// worst relative error. Restores all parameter values before returning.
pub fn gradient_check<F>(params: &mut ParamSet, fd_epsilon: f64, mut forward: F) -> Result<f64>
where
    F: FnMut(&mut Tape, &ParamSet) -> Result<Var>,
{
    let mut elements = Vec::new();
    for (pi, (_, p)) in params.iter().enumerate() {
        for e in 0..p.value().len() {
            elements.push((pi, e));
        }
    }
    check_elements(params, fd_epsilon, &elements, &mut forward)
}

/// Like [`gradient_check`] but probing at most `per_param` randomly chosen
/// elements of each parameter; full sweeps over production-sized models
/// would need millions of forward passes.
pub fn gradient_check_sampled<F>(
    params: &mut ParamSet,
    fd_epsilon: f64,
    per_param: usize,
    rng: &mut ChaCha8Rng,
    mut forward: F,
) -> Result<f64>
where
    F: FnMut(&mut Tape, &ParamSet) -> Result<Var>,
{
    let mut elements = Vec::new();
    for (pi, (_, p)) in params.iter().enumerate() {
        let len = p.value().len();
        if len <= per_param {
            elements.extend((0..len).map(|e| (pi, e)));
        } else {
            for _ in 0..per_param {
                elements.push((pi, rng.random_range(0..len)));
            }
        }
    }
    check_elements(params, fd_epsilon, &elements, &mut forward)
}
