use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::special::ln_gamma;
use crate::{Error, Result};

/// A seeded, splittable random stream.
///
/// Each `(seed, stream_id)` pair addresses an independent ChaCha8 keystream,
/// so parallel workers get their own stream instead of sharing one.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn sample_normal(rng: &mut RngStream, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "normal standard deviation must be >= 0 (got {sigma})"
        )));
    }
    if sigma == 0.0 {
        return Ok(mu);
    }
    Ok(mu + sigma * rng.standard_normal())
}

/// Poisson draw: sequential inversion for `lambda <= 30`, Hörmann's PTRS
/// transformed rejection above.
pub fn sample_poisson(rng: &mut RngStream, lambda: f64) -> Result<u64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "Poisson mean must be >= 0 (got {lambda})"
        )));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda <= 30.0 {
        Ok(poisson_inversion(rng, lambda))
    } else {
        Ok(poisson_ptrs(rng, lambda))
    }
}

fn poisson_inversion(rng: &mut RngStream, lambda: f64) -> u64 {
    let u = rng.uniform();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    // The cap only matters if u lands in the last ulp below 1.
    while u > cdf && k < 1_000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

fn poisson_ptrs(rng: &mut RngStream, lambda: f64) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.123_9 + 1.132_8 / (b - 3.4);
    let vr = 0.927_7 - 3.622_4 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -lambda + k * loglam - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}
