//! Linear exploration schedule and epsilon-greedy action selection.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct EpsilonSchedule {
    start: f64,
    end: f64,
    decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn new(start: f64, end: f64, decay_steps: u64) -> Result<EpsilonSchedule> {
        for (label, v) in [("start", start), ("end", end)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("epsilon {label} {v} outside [0, 1]")));
            }
        }
        if decay_steps == 0 {
            return Err(Error::Config("epsilon decay_steps must be positive".into()));
        }
        Ok(EpsilonSchedule { start, end, decay_steps })
    }

    /// Linear from start to end over `decay_steps`, constant afterwards.
    pub fn value(&self, step: u64) -> f64 {
        if step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

/// With probability epsilon a uniform action, otherwise the argmax of
/// `q_row` (first index on ties). Draws at most two values from `rng`.
pub fn epsilon_greedy(rng: &mut ChaCha8Rng, epsilon: f64, q_row: &[f64]) -> usize {
    assert!(!q_row.is_empty(), "epsilon_greedy over an empty action set");
    if rng.random::<f64>() < epsilon {
        return rng.random_range(0..q_row.len());
    }
    greedy(q_row)
}

/// Argmax with first-index tie breaking.
pub fn greedy(q_row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q_row.iter().enumerate().skip(1) {
        if v > q_row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn schedule_endpoints_and_midpoint() {
        let s = EpsilonSchedule::new(1.0, 0.1, 100_000).unwrap();
        assert_eq!(s.value(0), 1.0);
        assert!((s.value(50_000) - 0.55).abs() < 1e-12);
        assert_eq!(s.value(100_000), 0.1);
        assert_eq!(s.value(2_000_000), 0.1);
    }

    #[test]
    fn schedule_rejects_bad_ranges() {
        assert!(EpsilonSchedule::new(1.5, 0.1, 10).is_err());
        assert!(EpsilonSchedule::new(1.0, -0.1, 10).is_err());
        assert!(EpsilonSchedule::new(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn zero_epsilon_always_takes_the_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = [0.3, -1.0, 0.9, 0.2];
        for _ in 0..100 {
            assert_eq!(epsilon_greedy(&mut rng, 0.0, &q), 2);
        }
    }

    #[test]
    fn ties_break_toward_the_first_index() {
        assert_eq!(greedy(&[1.0, 1.0, 1.0]), 0);
        assert_eq!(greedy(&[0.0, 2.0, 2.0]), 1);
    }

    #[test]
    fn full_exploration_is_uniform() {
        // Chi-square over 4 actions at p = 0.001, 3 degrees of freedom.
        const CRITICAL: f64 = 16.26623619623813;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = [5.0, 0.0, 0.0, 0.0];
        let mut counts = [0u32; 4];
        let draws = 40_000;
        for _ in 0..draws {
            counts[epsilon_greedy(&mut rng, 1.0, &q)] += 1;
        }
        let expected = draws as f64 / 4.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(stat < CRITICAL, "chi-square statistic {stat} exceeds {CRITICAL}");
    }
}
