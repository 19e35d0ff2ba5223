use crate::error::{Error, Result};
use crate::nn::params::ParamSet;
use crate::nn::tensor::Tensor;

/// Adam optimizer state. Moment buffers are kept in parameter registration
/// order, one pair per parameter tensor.
#[derive(Clone, Debug)]
pub struct AdamState {
    step: u64,
    step_size: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    first_moment: Vec<Tensor>,
    second_moment: Vec<Tensor>,
}

impl AdamState {
    /// Standard coefficients: beta1 0.9, beta2 0.999, epsilon 1e-8.
    pub fn new(params: &ParamSet, step_size: f64) -> AdamState {
        AdamState {
            step: 0,
            step_size,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: params.iter().map(|(_, p)| Tensor::zeros(p.value().shape())).collect(),
            second_moment: params.iter().map(|(_, p)| Tensor::zeros(p.value().shape())).collect(),
        }
    }

    /// Apply one update from the gradients currently accumulated in
    /// `params`. Gradients are not cleared here.
    pub fn step(&mut self, params: &mut ParamSet) {
        assert_eq!(self.first_moment.len(), params.len(), "optimizer/param count mismatch");
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        let ids: Vec<_> = params.iter().map(|(id, _)| id).collect();
        for (i, id) in ids.into_iter().enumerate() {
            let grad = params.grad(id).data().to_vec();
            let m = self.first_moment[i].data_mut();
            let v = self.second_moment[i].data_mut();
            let value = params.value_mut(id).data_mut();
            for e in 0..grad.len() {
                let g = grad[e];
                m[e] = self.beta1 * m[e] + (1.0 - self.beta1) * g;
                v[e] = self.beta2 * v[e] + (1.0 - self.beta2) * g * g;
                let m_hat = m[e] / bc1;
                let v_hat = v[e] / bc2;
                value[e] -= self.step_size * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn moments(&self) -> (&[Tensor], &[Tensor]) {
        (&self.first_moment, &self.second_moment)
    }

    /// Rebuild saved optimizer state (used by checkpoint loading).
    pub fn restore(
        &mut self,
        params: &ParamSet,
        step: u64,
        first: Vec<Tensor>,
        second: Vec<Tensor>,
    ) -> Result<()> {
        if first.len() != params.len() || second.len() != params.len() {
            return Err(Error::Integrity(format!(
                "optimizer state has {} moment pairs, model has {} parameters",
                first.len().min(second.len()),
                params.len()
            )));
        }
        for ((_, p), (m, v)) in params.iter().zip(first.iter().zip(&second)) {
            if m.shape() != p.value().shape() || v.shape() != p.value().shape() {
                return Err(Error::Integrity(format!(
                    "optimizer moment shape mismatch on {}",
                    p.name()
                )));
            }
        }
        self.step = step;
        self.first_moment = first;
        self.second_moment = second;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_param_set(value: f64) -> (ParamSet, crate::nn::ParamId) {
        let mut ps = ParamSet::new();
        let id = ps.add("p", Tensor::scalar(value));
        (ps, id)
    }

    fn set_grad(ps: &mut ParamSet, id: crate::nn::ParamId, g: f64) {
        ps.grad_mut(id).data_mut()[0] = g;
    }

    #[test]
    fn first_step_matches_closed_form() {
        // With bias correction, step 1 moves by step_size * g / (|g| + eps).
        let (mut ps, id) = one_param_set(1.0);
        let mut adam = AdamState::new(&ps, 1e-4);
        set_grad(&mut ps, id, 2.0);
        adam.step(&mut ps);
        let expected = 1.0 - 1e-4 * (2.0 / (2.0 + 1e-8));
        assert!((ps.value(id).item() - expected).abs() < 1e-18);
        // ... which is the sign of the gradient to within 1e-12 here.
        assert!((ps.value(id).item() - (1.0 - 1e-4)).abs() < 1e-12);
    }

    #[test]
    fn constant_gradient_keeps_unit_scaled_steps() {
        let (mut ps, id) = one_param_set(0.0);
        let mut adam = AdamState::new(&ps, 1e-3);
        for _ in 0..10 {
            set_grad(&mut ps, id, -4.0);
            adam.step(&mut ps);
        }
        // Ten steps of +step_size each (bias-corrected ratio stays ~1).
        assert!((ps.value(id).item() - 10.0 * 1e-3).abs() < 1e-10);
        assert_eq!(adam.step_count(), 10);
    }

    #[test]
    fn zero_gradient_does_not_move_parameters() {
        let (mut ps, id) = one_param_set(0.5);
        let mut adam = AdamState::new(&ps, 1e-2);
        adam.step(&mut ps);
        assert_eq!(ps.value(id).item(), 0.5);
    }

    #[test]
    fn restore_rejects_wrong_shapes() {
        let (ps, _) = one_param_set(0.0);
        let mut adam = AdamState::new(&ps, 1e-3);
        let bad = vec![Tensor::zeros(&[2, 2])];
        let good = vec![Tensor::zeros(&[1, 1])];
        assert!(adam.restore(&ps, 1, bad, good).is_err());
    }
}
