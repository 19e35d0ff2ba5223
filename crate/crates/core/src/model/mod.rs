//! Q-network models: the multi-focus attention network in its single-agent
//! (image input) and multi-agent (per-agent vector input) forms, plus the
//! baselines used for comparison runs.
//!
//! All models share the same attention core: selector vectors are dotted
//! against per-entity key vectors to form logits, a row-wise softmax turns
//! those into weights, and the weighted sum of value vectors becomes the
//! focus feature fed to the Q head.

pub mod multi;
pub mod single;

pub use multi::{DenseBaseline, MultiManet, MultiManetConfig, NoCommBaseline, TeamQNet};
pub use single::{DqnBaseline, ImageQNet, SegmentationSpec, SingleManet, SingleManetConfig};

use crate::nn::{Tape, Var};

/// Attention logits and row-stochastic weights from selectors [N, w] and
/// keys [K, w]: logits[n][k] = selector_n . key_k, weights = row softmax
/// normalized over all K entries.
pub fn attention_rows(tape: &mut Tape, selectors: Var, keys: Var) -> (Var, Var) {
    let logits = tape.matmul_nt(selectors, keys);
    let weights = tape.softmax_rows(logits);
    (logits, weights)
}

/// Entropy penalty on an attention matrix: lambda * sum |p ln p| over all
/// entries, the summed Shannon entropy of the rows. Zero exactly when every
/// row is one-hot; maximal for uniform rows.
pub fn entropy_penalty(tape: &mut Tape, weights: Var, lambda: f64) -> Var {
    let plogp = tape.plogp(weights);
    let total = tape.sum(plogp);
    // p ln p <= 0 on [0,1], so the L1 norm is the negated sum.
    tape.scale(total, -lambda)
}

/// Distance penalty pushing the N rows of an attention matrix apart:
/// lambda * exp(-sum over row pairs of squared row differences). Maximal
/// (= lambda) when all rows coincide, decaying as they separate.
pub fn distance_penalty(tape: &mut Tape, weights: Var, lambda: f64) -> Var {
    let n = tape.value(weights).rows();
    let mut total: Option<Var> = None;
    for a in 0..n {
        for b in a + 1..n {
            let ra = tape.rows(weights, a, 1);
            let rb = tape.rows(weights, b, 1);
            let diff = tape.sub(ra, rb);
            let sq = tape.mul(diff, diff);
            let s = tape.sum(sq);
            total = Some(match total {
                Some(t) => tape.add(t, s),
                None => s,
            });
        }
    }
    let distance = match total {
        Some(t) => t,
        None => tape.scalar(0.0),
    };
    let neg = tape.scale(distance, -1.0);
    let decay = tape.exp(neg);
    tape.scale(decay, lambda)
}

/// Quadratic penalty on raw attention logits: lambda * mean(logit^2).
/// Keeps selector-key dot products from drifting to saturation.
pub fn logit_penalty(tape: &mut Tape, logits: Var, lambda: f64) -> Var {
    let sq = tape.mul(logits, logits);
    let m = tape.mean(sq);
    tape.scale(m, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::tensor::Tensor;
    use crate::nn::ParamSet;

    #[test]
    fn attention_saturates_on_dominant_logit() {
        let mut tape = Tape::new();
        // Width-1 keys make the logits equal the key values.
        let sel = tape.constant(Tensor::new(&[1, 1], vec![1.0]));
        let keys = tape.constant(Tensor::new(&[3, 1], vec![50.0, 0.0, -3.0]));
        let (_, w) = attention_rows(&mut tape, sel, keys);
        assert!(tape.value(w).data()[0] > 1.0 - 1e-15);
    }

    #[test]
    fn attention_hand_values() {
        let mut tape = Tape::new();
        let sel = tape.constant(Tensor::new(&[1, 1], vec![1.0]));
        let keys = tape.constant(Tensor::new(&[3, 1], vec![0.0, (2.0f64).ln(), (4.0f64).ln()]));
        let (_, w) = attention_rows(&mut tape, sel, keys);
        let got = tape.value(w).data();
        for (g, want) in got.iter().zip([1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0]) {
            assert!((g - want).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn uniform_rows_from_equal_keys() {
        let mut tape = Tape::new();
        let sel = tape.constant(Tensor::new(&[2, 3], vec![0.4, -1.0, 2.0, 0.0, 0.7, -0.3]));
        let keys = tape.constant(Tensor::new(&[4, 3], vec![[0.5, 0.25, -1.0]; 4].concat()));
        let (_, w) = attention_rows(&mut tape, sel, keys);
        for &v in tape.value(w).data() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_penalty_values() {
        let mut tape = Tape::new();
        // One-hot rows carry zero entropy.
        let onehot = tape.constant(Tensor::new(&[2, 4], vec![
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        ]));
        let r = entropy_penalty(&mut tape, onehot, 1.0);
        assert_eq!(tape.value(r).item(), 0.0);

        // Two uniform rows over 4 entries: 2 ln 4.
        let uniform = tape.constant(Tensor::new(&[2, 4], vec![0.25; 8]));
        let r = entropy_penalty(&mut tape, uniform, 1.0);
        assert!((tape.value(r).item() - 2.0 * (4.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn distance_penalty_values() {
        let mut tape = Tape::new();
        let identical = tape.constant(Tensor::new(&[2, 3], vec![0.2, 0.3, 0.5, 0.2, 0.3, 0.5]));
        let r = distance_penalty(&mut tape, identical, 1.0);
        assert!((tape.value(r).item() - 1.0).abs() < 1e-15);

        let disjoint = tape.constant(Tensor::new(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]));
        let r = distance_penalty(&mut tape, disjoint, 1.0);
        assert!((tape.value(r).item() - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn logit_penalty_values() {
        let mut tape = Tape::new();
        let single = tape.constant(Tensor::scalar(2.0));
        let r = logit_penalty(&mut tape, single, 0.5);
        assert_eq!(tape.value(r).item(), 2.0);

        // Quadratic homogeneity: doubling logits quadruples the penalty.
        let logits = tape.constant(Tensor::new(&[2, 2], vec![0.5, -1.0, 2.0, 0.25]));
        let doubled = tape.constant(Tensor::new(&[2, 2], vec![1.0, -2.0, 4.0, 0.5]));
        let r1 = logit_penalty(&mut tape, logits, 1.0);
        let r2 = logit_penalty(&mut tape, doubled, 1.0);
        assert!((tape.value(r2).item() - 4.0 * tape.value(r1).item()).abs() < 1e-12);
    }

    #[test]
    fn weighted_values_are_permutation_invariant() {
        // Permuting (key, value) pairs leaves each focus feature unchanged.
        let keys = Tensor::new(&[3, 2], vec![0.3, -0.1, 1.2, 0.4, -0.6, 0.9]);
        let vals = Tensor::new(&[3, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let perm = [2usize, 0, 1];
        let permuted = |t: &Tensor| {
            let mut data = Vec::new();
            for &p in &perm {
                data.extend_from_slice(t.row_slice(p));
            }
            Tensor::new(t.shape(), data)
        };

        let run = |k: &Tensor, v: &Tensor| {
            let mut tape = Tape::new();
            let sel = tape.constant(Tensor::new(&[2, 2], vec![0.5, -0.25, 1.0, 0.75]));
            let kv = tape.constant(k.clone());
            let vv = tape.constant(v.clone());
            let (_, w) = attention_rows(&mut tape, sel, kv);
            let h = tape.matmul(w, vv);
            tape.value(h).data().to_vec()
        };

        let base = run(&keys, &vals);
        let shuffled = run(&permuted(&keys), &permuted(&vals));
        for (a, b) in base.iter().zip(&shuffled) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn regularizer_gradients_are_exact() {
        let mut params = ParamSet::new();
        params.add("logits", Tensor::new(&[2, 3], vec![0.2, -0.4, 0.9, 1.1, 0.0, -0.7]));
        let worst = crate::nn::gradcheck::gradient_check(&mut params, 1e-5, |tape, ps| {
            let l = tape.param(ps, ps.id("logits").unwrap());
            let w = tape.softmax_rows(l);
            let e = entropy_penalty(tape, w, 0.7);
            let d = distance_penalty(tape, w, 0.3);
            let q = logit_penalty(tape, l, 0.1);
            let ed = tape.add(e, d);
            Ok(tape.add(ed, q))
        })
        .unwrap();
        assert!(worst < 1e-6, "worst relative error {worst}");
    }
}
