use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwcsError};
use crate::operators::KSpaceData;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation of each of the real and imaginary parts, as a
    /// fraction of the largest sample magnitude.
    pub relative_sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_sigma >= 0.0 && self.relative_sigma.is_finite()) {
            return Err(SwcsError::param("relative_sigma", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Adds i.i.d. complex Gaussian noise. Each trajectory draws from its own
/// stream seeded with `seed ^ index`, so the result does not depend on how
/// the data was assembled or split.
pub fn add_noise(y: &KSpaceData, spec: &NoiseSpec) -> Result<KSpaceData> {
    spec.validate()?;
    let mut out = y.clone();
    if spec.relative_sigma == 0.0 {
        return Ok(out);
    }
    let std = spec.relative_sigma * y.max_abs();
    let k = y.k();
    let indices = y.trajectory_indices().to_vec();
    for (chunk, m) in out.samples_mut().chunks_exact_mut(k).zip(indices) {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ m as u64);
        for v in chunk {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            v.re += std * re;
            v.im += std * im;
        }
    }
    Ok(out)
}
