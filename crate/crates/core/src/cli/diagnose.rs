//! Null calibration check: permute treatment labels, bootstrap within
//! subjects, and compare the resulting F statistics with the reference F law.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::empirical::PairedSample;
use crate::inference::{anova_auc, SubjectEstimate};
use crate::numerics::{f_cdf, ks_statistic, RngStream};
use crate::{Error, Result};

pub const MIN_REPLICATES: usize = 100;

/// Replicate `r` draws from substream `DIAGNOSTIC_STREAM_BASE + r`.
const DIAGNOSTIC_STREAM_BASE: u64 = 1 << 61;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// F statistics in replicate order.
    pub f_samples: Vec<f64>,
    /// Kolmogorov–Smirnov distance to the `F(k − 1, n − k)` CDF.
    pub ks_distance: f64,
    pub reference_df: (usize, usize),
}

impl Diagnostic {
    /// The asymptotic 1% KS critical value `1.63 / √B`.
    pub fn ks_critical_1pct(&self) -> f64 {
        1.63 / (self.f_samples.len() as f64).sqrt()
    }
}

fn bootstrap(values: &[f64], rng: &mut RngStream) -> Vec<f64> {
    (0..values.len()).map(|_| values[rng.index(values.len())]).collect()
}

fn replicate_f(subjects: &[PairedSample], seed: u64, r: usize) -> Result<f64> {
    let mut rng = RngStream::new(seed, DIAGNOSTIC_STREAM_BASE + r as u64);
    let mut labels: Vec<&str> = subjects.iter().map(|s| s.group_id.as_str()).collect();
    labels.shuffle(&mut rng);
    let estimates = subjects
        .iter()
        .zip(labels)
        .map(|(s, label)| {
            let pre = bootstrap(s.pre.values(), &mut rng);
            let post = bootstrap(s.post.values(), &mut rng);
            PairedSample::new(s.subject_id.clone(), label, pre, post)
                .map(|ps| SubjectEstimate::from_sample(&ps))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(anova_auc(&estimates)?.f_stat)
}

pub fn resampling_diagnostic(dataset: &Dataset, replicates: usize, seed: u64) -> Result<Diagnostic> {
    if replicates < MIN_REPLICATES {
        return Err(Error::Validation(vec![format!(
            "diagnostic needs B >= {MIN_REPLICATES} (got {replicates})"
        )]));
    }
    let subjects = dataset.subjects();
    let k = dataset.groups().len();
    let n = subjects.len();
    if k < 2 || n <= k {
        return Err(Error::Validation(vec![format!(
            "diagnostic needs at least 2 groups and more subjects than groups (k = {k}, n = {n})"
        )]));
    }

    let f_samples = (0..replicates)
        .into_par_iter()
        .map(|r| replicate_f(subjects, seed, r).map_err(|e| e.context(format!("replicate {r}"))))
        .collect::<Result<Vec<f64>>>()?;

    let (d1, d2) = (k - 1, n - k);
    let mut sorted = f_samples.clone();
    sorted.sort_by(f64::total_cmp);
    let ks_distance = ks_statistic(&sorted, |x| {
        if x.is_infinite() {
            1.0
        } else {
            f_cdf(x, d1 as f64, d2 as f64).unwrap_or(0.0)
        }
    });
    Ok(Diagnostic {
        f_samples,
        ks_distance,
        reference_df: (d1, d2),
    })
}
