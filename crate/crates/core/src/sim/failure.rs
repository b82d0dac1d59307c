use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{RcmError, Result};

/// Which nodes survived a round of independent failures.
#[derive(Debug, Clone, PartialEq)]
pub struct FailurePattern {
    alive: Vec<bool>,
    q: f64,
    fail_seed: u64,
}

impl FailurePattern {
    /// Fails each of `n` nodes independently with probability `q`; the mask is
    /// a pure function of `(n, q, fail_seed)`.
    pub fn sample(n: u32, q: f64, fail_seed: u64) -> Result<Self> {
        crate::analytic::check_failure_probability(q)?;
        let mut rng = ChaCha8Rng::seed_from_u64(fail_seed);
        let alive = (0..n).map(|_| rng.gen::<f64>() >= q).collect();
        Ok(FailurePattern { alive, q, fail_seed })
    }

    pub fn all_alive(n: u32) -> Self {
        FailurePattern {
            alive: vec![true; n as usize],
            q: 0.0,
            fail_seed: 0,
        }
    }

    /// All nodes alive except `dead`.
    pub fn with_dead(n: u32, dead: &[u32]) -> Result<Self> {
        let mut pattern = Self::all_alive(n);
        for &v in dead {
            let slot = pattern.alive.get_mut(v as usize).ok_or_else(|| {
                RcmError::InvalidRoute(format!("node {v} outside 0..{n}"))
            })?;
            *slot = false;
        }
        pattern.q = dead.len() as f64 / n as f64;
        Ok(pattern)
    }

    pub fn is_alive(&self, v: u32) -> bool {
        self.alive.get(v as usize).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn fail_seed(&self) -> u64 {
        self.fail_seed
    }

    pub fn survivors(&self) -> Vec<u32> {
        self.alive
            .iter()
            .enumerate()
            .filter_map(|(v, &a)| a.then_some(v as u32))
            .collect()
    }

    pub fn survivor_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_from_seed() {
        let a = FailurePattern::sample(1024, 0.3, 11).unwrap();
        let b = FailurePattern::sample(1024, 0.3, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, FailurePattern::sample(1024, 0.3, 12).unwrap());
    }

    #[test]
    fn zero_q_keeps_everyone() {
        let p = FailurePattern::sample(4096, 0.0, 5).unwrap();
        assert_eq!(p.survivor_count(), 4096);
    }

    #[test]
    fn failure_rate_near_q() {
        let p = FailurePattern::sample(1 << 16, 0.25, 3).unwrap();
        let dead = (1 << 16) - p.survivor_count();
        // binomial sd ~ 111
        assert!((dead as i64 - 16_384).abs() < 560, "{dead}");
    }

    #[test]
    fn explicit_dead_set() {
        let p = FailurePattern::with_dead(8, &[7, 2]).unwrap();
        assert_eq!(p.survivors(), vec![0, 1, 3, 4, 5, 6]);
        assert!(FailurePattern::with_dead(8, &[8]).is_err());
    }
}
