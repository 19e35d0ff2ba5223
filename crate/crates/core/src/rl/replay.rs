//! Fixed-capacity experience replay with uniform sampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One stored step. States are kept in their compact environment form and
/// re-observed at sampling time, which keeps the buffer small.
#[derive(Clone, Debug)]
pub struct Transition<S, A> {
    pub state: S,
    pub action: A,
    pub reward: f64,
    pub next_state: S,
    pub terminal: bool,
}

/// Ring buffer: once full, new transitions overwrite the oldest.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<S, A> {
    capacity: usize,
    items: Vec<Transition<S, A>>,
    cursor: usize,
}

impl<S, A> ReplayBuffer<S, A> {
    pub fn new(capacity: usize) -> ReplayBuffer<S, A> {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { capacity, items: Vec::new(), cursor: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition<S, A>) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
    }

    pub fn get(&self, index: usize) -> &Transition<S, A> {
        &self.items[index]
    }

    /// Uniform sampling with replacement.
    pub fn sample_indices(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
        assert!(!self.items.is_empty(), "cannot sample from an empty buffer");
        (0..n).map(|_| rng.random_range(0..self.items.len())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn t(tag: i32) -> Transition<i32, usize> {
        Transition { state: tag, action: 0, reward: tag as f64, next_state: tag + 1, terminal: false }
    }

    #[test]
    fn overwrites_oldest_when_full() {
        let mut buf = ReplayBuffer::new(4);
        for i in 0..6 {
            buf.push(t(i));
        }
        assert_eq!(buf.len(), 4);
        let mut tags: Vec<i32> = (0..4).map(|i| buf.get(i).state).collect();
        tags.sort_unstable();
        assert_eq!(tags, vec![2, 3, 4, 5]);
    }

    #[test]
    fn sampling_allows_more_draws_than_items() {
        let mut buf = ReplayBuffer::new(8);
        buf.push(t(0));
        buf.push(t(1));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let idx = buf.sample_indices(&mut rng, 10);
        assert_eq!(idx.len(), 10);
        assert!(idx.iter().all(|&i| i < 2));
    }

    #[test]
    fn sampling_is_uniform_over_occupied_slots() {
        // Chi-square goodness of fit over 100 slots, 100k draws.
        // Critical value for 99 degrees of freedom at p = 0.001.
        const CRITICAL: f64 = 148.23035916510173;
        let mut buf = ReplayBuffer::new(100);
        for i in 0..100 {
            buf.push(t(i));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0u32; 100];
        for i in buf.sample_indices(&mut rng, 100_000) {
            counts[i] += 1;
        }
        let expected = 1000.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(stat < CRITICAL, "chi-square statistic {stat} exceeds {CRITICAL}");
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let mut buf = ReplayBuffer::new(16);
        for i in 0..16 {
            buf.push(t(i));
        }
        let a = buf.sample_indices(&mut ChaCha8Rng::seed_from_u64(3), 32);
        let b = buf.sample_indices(&mut ChaCha8Rng::seed_from_u64(3), 32);
        assert_eq!(a, b);
    }
}
