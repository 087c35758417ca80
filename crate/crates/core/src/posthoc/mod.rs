//! HSD-type all-pairs comparison of group mean AUCs.
//!
//! Each pairwise studentized difference is compared with a simulated law of
//! the maximum absolute studentized difference among `k` independent
//! standard normal means. That law depends on `k` alone.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::inference::GroupSummary;
use crate::numerics::RngStream;
use crate::{Error, Result};

pub const DEFAULT_REPLICATES: usize = 1_000_000;

/// Substreams used for reference-distribution chunks start here so they
/// never collide with per-iteration streams in the simulation harness.
pub(crate) const REFERENCE_STREAM_BASE: u64 = 1 << 62;
const CHUNK: usize = 1 << 15;

/// Sorted draws of `max_{i<j} |V_i − V_j| / √2` over `k` standard normals.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDistribution {
    k: usize,
    seed: u64,
    sorted_max_diffs: Vec<f64>,
}

impl ReferenceDistribution {
    /// Simulates `replicates` draws. Chunks of draws come from distinct
    /// substreams and are concatenated in chunk order, so the result does not
    /// depend on the thread count.
    pub fn generate(k: usize, replicates: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain(format!("reference distribution needs k >= 2 (got {k})")));
        }
        if replicates == 0 {
            return Err(Error::domain("reference distribution needs R >= 1"));
        }
        let chunks = replicates.div_ceil(CHUNK);
        let mut draws: Vec<f64> = (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let len = CHUNK.min(replicates - c * CHUNK);
                let mut rng = RngStream::new(seed, REFERENCE_STREAM_BASE + c as u64);
                (0..len)
                    .map(|_| max_studentized_difference(&mut rng, k))
                    .collect::<Vec<_>>()
            })
            .collect();
        draws.sort_by(f64::total_cmp);
        Ok(Self {
            k,
            seed,
            sorted_max_diffs: draws,
        })
    }

    /// Process-wide memoized [`generate`](Self::generate).
    pub fn cached(k: usize, replicates: usize, seed: u64) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(usize, usize, u64), Arc<ReferenceDistribution>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(hit) = cache.lock().unwrap().get(&(k, replicates, seed)) {
            return Ok(Arc::clone(hit));
        }
        let dist = Arc::new(Self::generate(k, replicates, seed)?);
        cache
            .lock()
            .unwrap()
            .insert((k, replicates, seed), Arc::clone(&dist));
        Ok(dist)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn replicates(&self) -> usize {
        self.sorted_max_diffs.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sorted_max_diffs(&self) -> &[f64] {
        &self.sorted_max_diffs
    }

    /// `#{mD ≥ |delta|} / R`.
    pub fn p_value(&self, delta: f64) -> f64 {
        let d = delta.abs();
        let below = self.sorted_max_diffs.partition_point(|&m| m < d);
        (self.replicates() - below) as f64 / self.replicates() as f64
    }

    /// Empirical `level`-quantile using the `⌈level·R⌉`-th order statistic.
    pub fn quantile(&self, level: f64) -> Result<f64> {
        if !(level > 0.0 && level <= 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1] (got {level})")));
        }
        let r = self.replicates();
        let idx = ((level * r as f64).ceil() as usize).clamp(1, r);
        Ok(self.sorted_max_diffs[idx - 1])
    }
}

fn max_studentized_difference(rng: &mut RngStream, k: usize) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..k {
        let v = rng.standard_normal();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (hi - lo) / std::f64::consts::SQRT_2
}

/// `(Âᵢ − Âⱼ) / sqrt(Var Âᵢ + Var Âⱼ)`.
pub fn studentized_difference(gi: &GroupSummary, gj: &GroupSummary) -> Result<f64> {
    let denom = gi.var_of_mean + gj.var_of_mean;
    if !(denom > 0.0) {
        return Err(Error::ZeroDenominator(gi.group_id.clone(), gj.group_id.clone()));
    }
    Ok((gi.mean_auc - gj.mean_auc) / denom.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub group_i: String,
    pub group_j: String,
    pub delta: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosthocTable {
    pub pairs: Vec<PairComparison>,
    pub alpha: f64,
    pub critical_value: f64,
    pub replicates: usize,
}

impl PosthocTable {
    pub fn pair(&self, a: &str, b: &str) -> Option<&PairComparison> {
        self.pairs.iter().find(|p| {
            (p.group_i == a && p.group_j == b) || (p.group_i == b && p.group_j == a)
        })
    }

    pub fn rejected(&self) -> impl Iterator<Item = &PairComparison> {
        self.pairs.iter().filter(|p| p.p_value <= self.alpha)
    }
}

/// All `k(k−1)/2` pairwise p-values, pairs in summary order `(i, j)`, `i < j`.
pub fn posthoc_pvalues(
    summaries: &[GroupSummary],
    reference: &ReferenceDistribution,
    alpha: f64,
) -> Result<PosthocTable> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1) (got {alpha})")));
    }
    if summaries.len() != reference.k() {
        return Err(Error::GroupCountMismatch {
            expected: reference.k(),
            found: summaries.len(),
        });
    }
    let mut pairs = Vec::with_capacity(summaries.len() * (summaries.len() - 1) / 2);
    for (i, gi) in summaries.iter().enumerate() {
        for gj in &summaries[i + 1..] {
            let delta = studentized_difference(gi, gj)?;
            pairs.push(PairComparison {
                group_i: gi.group_id.clone(),
                group_j: gj.group_id.clone(),
                delta,
                p_value: reference.p_value(delta),
            });
        }
    }
    Ok(PosthocTable {
        pairs,
        alpha,
        critical_value: reference.quantile(1.0 - alpha)?,
        replicates: reference.replicates(),
    })
}

/// Empirical `(1 − alpha)`-quantile of the reference law for `k` groups.
pub fn critical_value(k: usize, alpha: f64, replicates: usize, seed: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1) (got {alpha})")));
    }
    ReferenceDistribution::cached(k, replicates, seed)?.quantile(1.0 - alpha)
}
