use std::collections::VecDeque;

/// Rolling window of the last `k` opponent-offer utilities, left-padded
/// with zeros before the first offer.
#[derive(Clone, Debug)]
pub struct WindowBuilder {
    k: usize,
    values: VecDeque<f64>,
    seen: usize,
}

impl WindowBuilder {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            values: VecDeque::with_capacity(k),
            seen: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn push(&mut self, u: f64) {
        if self.values.len() == self.k {
            self.values.pop_front();
        }
        self.values.push_back(u);
        self.seen += 1;
    }

    /// True once `k` real offers have been observed.
    pub fn is_full(&self) -> bool {
        self.seen >= self.k
    }

    pub fn window(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.k - self.values.len()];
        w.extend(self.values.iter().copied());
        w
    }

    pub fn clear(&mut self) {
        self.values.clear();
        self.seen = 0;
    }
}

/// One window per prefix of `stream`, each ending at that offer.
pub fn windows_of(stream: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut builder = WindowBuilder::new(k);
    stream
        .iter()
        .map(|&u| {
            builder.push(u);
            builder.window()
        })
        .collect()
}
