use rand::Rng;

use crate::rl::Transition;

/// Fixed-capacity ring buffer with uniform sampling.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
        }
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

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| rng.random_range(0..self.items.len())).collect()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<&Transition> {
        self.sample_indices(rng, n)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }
}
