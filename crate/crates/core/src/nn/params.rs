use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

/// Handle to a parameter inside a [`ParamSet`]. Ids are dense indices in
/// registration order, so iterating a set is deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

#[derive(Clone, Debug)]
pub struct Param {
    name: String,
    value: Tensor,
    grad: Tensor,
}

impl Param {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self) -> &Tensor {
        &self.value
    }

    pub fn grad(&self) -> &Tensor {
        &self.grad
    }
}

/// Named collection of trainable tensors plus their gradient accumulators.
/// Storage is a plain `Vec` so that optimizer sweeps, checkpointing, and
/// target-network copies all run in one fixed order.
#[derive(Clone, Debug, Default)]
pub struct ParamSet {
    items: Vec<Param>,
    by_name: HashMap<String, usize>,
}

impl ParamSet {
    pub fn new() -> ParamSet {
        ParamSet::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        let name = name.into();
        assert!(
            !self.by_name.contains_key(&name),
            "duplicate parameter name {name:?}"
        );
        let id = self.items.len();
        self.by_name.insert(name.clone(), id);
        let grad = Tensor::zeros(value.shape());
        self.items.push(Param { name, value, grad });
        ParamId(id)
    }

    /// Register a tensor initialized uniformly in [-1/sqrt(fan_in),
    /// 1/sqrt(fan_in)].
    pub fn add_uniform(
        &mut self,
        name: impl Into<String>,
        shape: &[usize],
        fan_in: usize,
        rng: &mut ChaCha8Rng,
    ) -> ParamId {
        use rand::Rng;
        assert!(fan_in > 0, "fan_in must be positive");
        let bound = 1.0 / (fan_in as f64).sqrt();
        let len: usize = shape.iter().product();
        let data: Vec<f64> = (0..len)
            .map(|_| bound * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        self.add(name, Tensor::new(shape, data))
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied().map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Param)> {
        self.items.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.items[id.0].name
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.items[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.items[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Tensor {
        &self.items[id.0].grad
    }

    pub(crate) fn grad_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.items[id.0].grad
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.items {
            p.grad.data_mut().fill(0.0);
        }
    }

    /// Overwrite all values from a structurally identical set (same names,
    /// shapes, and order). Backs target-network synchronization.
    pub fn copy_values_from(&mut self, other: &ParamSet) -> Result<()> {
        if self.items.len() != other.items.len() {
            return Err(Error::Verification(format!(
                "parameter count mismatch: {} vs {}",
                self.items.len(),
                other.items.len()
            )));
        }
        for (mine, theirs) in self.items.iter_mut().zip(&other.items) {
            if mine.name != theirs.name || mine.value.shape() != theirs.value.shape() {
                return Err(Error::Verification(format!(
                    "parameter mismatch: {} {:?} vs {} {:?}",
                    mine.name,
                    mine.value.shape(),
                    theirs.name,
                    theirs.value.shape()
                )));
            }
            mine.value.data_mut().copy_from_slice(theirs.value.data());
        }
        Ok(())
    }

    pub fn total_elements(&self) -> usize {
        self.items.iter().map(|p| p.value.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn registration_order_is_iteration_order() {
        let mut ps = ParamSet::new();
        let a = ps.add("b_late", Tensor::scalar(1.0));
        let b = ps.add("a_early", Tensor::scalar(2.0));
        let names: Vec<&str> = ps.iter().map(|(_, p)| p.name()).collect();
        assert_eq!(names, ["b_late", "a_early"]);
        assert_eq!(ps.id("b_late"), Some(a));
        assert_eq!(ps.id("a_early"), Some(b));
    }

    #[test]
    fn uniform_init_respects_fan_in_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ps = ParamSet::new();
        let id = ps.add_uniform("w", &[64, 64], 64, &mut rng);
        let bound = 1.0 / 8.0;
        let data = ps.value(id).data();
        assert!(data.iter().all(|v| v.abs() <= bound));
        // Not degenerate: spread should cover a decent part of the range.
        let max = data.iter().cloned().fold(f64::MIN, f64::max);
        let min = data.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max > 0.5 * bound && min < -0.5 * bound);
    }

    #[test]
    fn copy_values_from_rejects_mismatch() {
        let mut a = ParamSet::new();
        a.add("w", Tensor::zeros(&[2, 2]));
        let mut b = ParamSet::new();
        b.add("w", Tensor::zeros(&[2, 3]));
        assert!(a.copy_values_from(&b).is_err());
    }

    #[test]
    #[should_panic(expected = "duplicate parameter name")]
    fn duplicate_name_panics() {
        let mut ps = ParamSet::new();
        ps.add("w", Tensor::scalar(0.0));
        ps.add("w", Tensor::scalar(1.0));
    }
}
