use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Fixed-capacity ring buffer of transitions; the oldest entry is evicted
/// first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayMemory {
    capacity: usize,
    items: Vec<Transition>,
    head: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("replay capacity must be positive"));
        }
        Ok(Self {
            capacity,
            items: Vec::new(),
            head: 0,
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

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
        }
        self.head = (self.head + 1) % self.capacity;
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> + '_ {
        let split = if self.items.len() < self.capacity { 0 } else { self.head };
        self.items[split..].iter().chain(self.items[..split].iter())
    }

    /// `batch` distinct transitions drawn uniformly.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        if batch > self.items.len() {
            return Err(Error::validation(alloc::format!(
                "cannot sample {batch} transitions from {}",
                self.items.len()
            )));
        }
        Ok(index::sample(rng, self.items.len(), batch).into_iter().map(|i| &self.items[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(i: usize) -> Transition {
        Transition {
            state: vec![i as f64],
            action: i % 3,
            reward: i as f64,
            next_state: vec![i as f64 + 1.0],
            terminal: false,
        }
    }

    #[test]
    fn evicts_oldest_at_capacity() {
        let mut m = ReplayMemory::new(4).unwrap();
        for i in 0..10 {
            m.push(t(i));
            assert!(m.len() <= 4);
        }
        assert_eq!(m.len(), 4);
        let rewards: Vec<f64> = m.iter().map(|x| x.reward).collect();
        assert_eq!(rewards, vec![6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn samples_are_distinct() {
        let mut m = ReplayMemory::new(100).unwrap();
        (0..50).for_each(|i| m.push(t(i)));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = m.sample(50, &mut rng).unwrap();
        let mut r: Vec<i64> = s.iter().map(|x| x.reward as i64).collect();
        r.sort();
        r.dedup();
        assert_eq!(r.len(), 50);
        assert!(m.sample(51, &mut rng).is_err());
    }
}
