use std::collections::VecDeque;

use rand::Rng;

use super::AgentError;
use crate::mdp::Transition;
use crate::rng::SimRng;

/// Bounded FIFO of transitions with uniform sampling (with replacement).
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self, AgentError> {
        if capacity == 0 {
            return Err(AgentError::Config("buffer capacity must be >= 1".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Append, evicting the oldest item when full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    pub fn sample(&self, n: usize, rng: &mut SimRng) -> Result<Vec<&Transition>, AgentError> {
        if self.items.is_empty() {
            return Err(AgentError::EmptyBuffer);
        }
        if n > self.items.len() {
            return Err(AgentError::InsufficientData {
                needed: n,
                available: self.items.len(),
            });
        }
        Ok((0..n)
            .map(|_| &self.items[rng.random_range(0..self.items.len())])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{MarketState, PricingAction};
    use crate::rng::SeedStream;

    fn tr(r: f64) -> Transition {
        let s = MarketState {
            features: vec![r],
            period: 1,
        };
        Transition {
            state: s.clone(),
            action: PricingAction::Bucket(1),
            reward: r,
            next_state: s,
            done: false,
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(2).unwrap();
        for r in [1.0, 2.0, 3.0] {
            b.push(tr(r));
        }
        let rewards: Vec<f64> = b.iter().map(|t| t.reward).collect();
        assert_eq!(rewards, vec![2.0, 3.0]);
    }

    #[test]
    fn sampling_is_seeded() {
        let mut b = ReplayBuffer::new(10).unwrap();
        for r in 0..10 {
            b.push(tr(f64::from(r)));
        }
        let draw = |seed| {
            let mut rng = SeedStream::new(seed).rng();
            b.sample(5, &mut rng)
                .unwrap()
                .iter()
                .map(|t| t.reward)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(4), draw(4));
    }

    #[test]
    fn empty_buffer_errors() {
        let b = ReplayBuffer::new(3).unwrap();
        let mut rng = SeedStream::new(0).rng();
        assert!(matches!(
            b.sample(1, &mut rng),
            Err(AgentError::EmptyBuffer)
        ));
    }

    #[test]
    fn sampling_is_uniform() {
        // 100k draws over 10 items: each count ~ Binomial(1e5, 0.1), sd ≈ 94.9
        let mut b = ReplayBuffer::new(10).unwrap();
        for r in 0..10 {
            b.push(tr(f64::from(r)));
        }
        let mut rng = SeedStream::new(12).rng();
        let mut counts = [0usize; 10];
        for _ in 0..10_000 {
            for t in b.sample(10, &mut rng).unwrap() {
                counts[t.reward as usize] += 1;
            }
        }
        let sd = (100_000.0f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 3.0 * sd, "count {c}");
        }
    }
}
