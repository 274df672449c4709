use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DenseState;
use crate::{Error, Result};

/// Sampled outcomes over a site set. Outcome `k` encodes the measured
/// digits with the first listed site most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub d: u32,
    pub sites: Vec<usize>,
    pub shots: u64,
    pub probabilities: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn outcome_digits(&self, mut k: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.sites.len()];
        for slot in out.iter_mut().rev() {
            *slot = (k % self.d as usize) as u32;
            k /= self.d as usize;
        }
        out
    }

    pub fn frequency(&self, k: usize) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.counts[k] as f64 / self.shots as f64
        }
    }
}

/// Exact marginal distribution of the computational-basis digits on `sites`
/// (0-based).
pub fn marginal(state: &DenseState, sites: &[usize]) -> Result<Vec<f64>> {
    if let Some(&s) = sites.iter().find(|&&s| s >= state.n_sites()) {
        return Err(Error::Domain(format!("site {s} outside the register")));
    }
    let d = state.d() as usize;
    let mut probs = vec![0.0; d.pow(sites.len() as u32)];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let digits = state.digits(idx);
        let k = sites.iter().fold(0usize, |acc, &s| acc * d + digits[s] as usize);
        probs[k] += p;
    }
    Ok(probs)
}

/// Computational-basis sampling of `sites`, deterministic given `seed`.
pub fn measure(state: &DenseState, sites: &[usize], shots: u64, seed: u64) -> Result<Histogram> {
    let probabilities = marginal(state, sites)?;
    let mut counts = vec![0u64; probabilities.len()];
    if shots > 0 {
        let dist = WeightedIndex::new(&probabilities)
            .map_err(|e| Error::Validation(format!("cannot sample distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..shots {
            counts[dist.sample(&mut rng)] += 1;
        }
    }
    Ok(Histogram {
        d: state.d(),
        sites: sites.to_vec(),
        shots,
        probabilities,
        counts,
    })
}
