//! Deterministic, splittable random streams.
//!
//! A stream is identified by `(seed, stream_id)`. The underlying generator is
//! ChaCha8 in counter mode: the seed selects the key, the stream id selects the
//! nonce, so streams with distinct ids never overlap and can be handed to
//! parallel workers without coordination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// A sibling stream under the same seed.
    pub fn split(&self, stream_id: u64) -> RngStream {
        RngStream::new(self.seed, stream_id)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Draw from `U[-sqrt 3, sqrt 3]`: zero mean, unit second moment.
    pub fn uniform_unit_variance(&mut self) -> f64 {
        SQRT_3 * (2.0 * self.uniform() - 1.0)
    }

    /// Uniform direction on the unit sphere in `dim` dimensions.
    pub fn unit_direction(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.standard_normal()).collect();
            let n = crate::vector::norm(&v);
            if n > 1e-12 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

/// Draw from `U[-sqrt 3, sqrt 3]` on the given stream.
pub fn uniform_unit_variance_noise(rng: &mut RngStream) -> f64 {
    rng.uniform_unit_variance()
}
