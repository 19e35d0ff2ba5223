use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::params::{ParamId, ParamSet};
use crate::nn::tape::{Tape, Var};
use crate::nn::LEAKY_SLOPE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    LeakyRelu,
}

#[derive(Clone, Debug)]
struct DenseLayer {
    weight: ParamId,
    bias: ParamId,
    input_width: usize,
    output_width: usize,
    activation: Activation,
}

/// Fully-connected stack. Weights are [in, out] so a [batch, in] input maps
/// to [batch, out]; biases are broadcast rows. Both are initialized
/// uniformly in +-1/sqrt(fan_in).
#[derive(Clone, Debug)]
pub struct Mlp {
    prefix: String,
    layers: Vec<DenseLayer>,
}

impl Mlp {
    /// `widths` is [input, hidden..., output]; `activations` has one entry
    /// per weight layer.
    pub fn new(
        params: &mut ParamSet,
        prefix: &str,
        widths: &[usize],
        activations: &[Activation],
        rng: &mut ChaCha8Rng,
    ) -> Result<Mlp> {
        if widths.len() < 2 {
            return Err(Error::Config(format!(
                "{prefix}: need at least input and output widths, got {widths:?}"
            )));
        }
        if activations.len() != widths.len() - 1 {
            return Err(Error::Config(format!(
                "{prefix}: {} layers but {} activations",
                widths.len() - 1,
                activations.len()
            )));
        }
        if let Some(w) = widths.iter().find(|&&w| w == 0) {
            return Err(Error::Config(format!("{prefix}: zero layer width {w}")));
        }
        let mut layers = Vec::new();
        for (l, pair) in widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let weight = params.add_uniform(format!("{prefix}.w{l}"), &[fan_in, fan_out], fan_in, rng);
            let bias = params.add_uniform(format!("{prefix}.b{l}"), &[1, fan_out], fan_in, rng);
            layers.push(DenseLayer {
                weight,
                bias,
                input_width: fan_in,
                output_width: fan_out,
                activation: activations[l],
            });
        }
        Ok(Mlp { prefix: prefix.to_string(), layers })
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().output_width
    }

    /// Apply to a [batch, input_width] value.
    pub fn forward(&self, tape: &mut Tape, params: &ParamSet, input: Var) -> Result<Var> {
        let mut h = input;
        for (l, layer) in self.layers.iter().enumerate() {
            let got = tape.value(h).cols();
            if got != layer.input_width {
                return Err(Error::Config(format!(
                    "{}.w{l}: expected input width {}, got {got}",
                    self.prefix, layer.input_width
                )));
            }
            let w = tape.param(params, layer.weight);
            let b = tape.param(params, layer.bias);
            let lin = tape.matmul(h, w);
            h = tape.add_row(lin, b);
            if layer.activation == Activation::LeakyRelu {
                h = tape.leaky_relu(h, LEAKY_SLOPE);
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::tensor::Tensor;
    use rand::SeedableRng;

    #[test]
    fn hidden_layers_are_nonlinear_and_output_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut params = ParamSet::new();
        let net = Mlp::new(
            &mut params,
            "q",
            &[3, 8, 2],
            &[Activation::LeakyRelu, Activation::Identity],
            &mut rng,
        )
        .unwrap();
        assert_eq!(params.len(), 4);
        assert_eq!(net.input_width(), 3);
        assert_eq!(net.output_width(), 2);

        // Linearity check on the output layer: f(2x) != 2 f(x) in general
        // because of the hidden nonlinearity, but shapes must hold.
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::new(&[5, 3], vec![0.1; 15]));
        let y = net.forward(&mut tape, &params, x).unwrap();
        assert_eq!(tape.value(y).shape(), &[5, 2]);
        assert!(tape.value(y).all_finite());
    }

    #[test]
    fn width_mismatch_names_the_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut params = ParamSet::new();
        let net = Mlp::new(&mut params, "f", &[4, 2], &[Activation::Identity], &mut rng).unwrap();
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::new(&[1, 3], vec![0.0; 3]));
        let err = net.forward(&mut tape, &params, x).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("f.w0") && msg.contains("expected input width 4"), "{msg}");
    }

    #[test]
    fn activation_count_must_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut params = ParamSet::new();
        let err = Mlp::new(&mut params, "f", &[4, 2, 1], &[Activation::Identity], &mut rng);
        assert!(err.is_err());
    }
}
