//! Monte Carlo size/power harness.
//!
//! Cohorts are Poisson sized with a floor of two: subjects per group are
//! `Pois(n_R − 2) + 2`, pre/post measures per subject `Pois(m − 2) + 2`.
//! Pre values are `N(0, 1)`; post values are `N(μᵢ + εᵢⱼ, 1)` with
//! `μᵢ = √2 Φ⁻¹(Aᵢ)` and subject effect `εᵢⱼ ~ N(0, σ_ε)`.

mod config;

pub use config::{outcome_table, parse_scenarios, write_outcomes_csv, CSV_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::PairedSample;
use crate::inference::{anova_auc, SubjectEstimate};
use crate::numerics::{normal_quantile, sample_normal, sample_poisson, RngStream};
use crate::posthoc::{posthoc_pvalues, ReferenceDistribution};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub name: String,
    pub k: usize,
    /// Expected subjects per group.
    pub n_r: usize,
    /// Expected pre-treatment measures per subject.
    pub m_n: usize,
    /// Expected post-treatment measures per subject.
    pub m_p: usize,
    pub target_aucs: Vec<f64>,
    pub sigma_eps: f64,
    pub alpha: f64,
    pub iterations: usize,
    pub r_posthoc: usize,
    pub seed: u64,
}

impl SimScenario {
    /// Four groups, α = 0.05, the given AUCs and cohort expectations.
    pub fn new(name: impl Into<String>, target_aucs: Vec<f64>, n_r: usize, m_n: usize, m_p: usize) -> Self {
        Self {
            name: name.into(),
            k: target_aucs.len(),
            n_r,
            m_n,
            m_p,
            target_aucs,
            sigma_eps: 0.3,
            alpha: 0.05,
            iterations: 1000,
            r_posthoc: 100_000,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.k < 2 {
            problems.push(format!("k must be >= 2 (got {})", self.k));
        }
        if self.target_aucs.len() != self.k {
            problems.push(format!(
                "target_aucs has {} entries, expected k = {}",
                self.target_aucs.len(),
                self.k
            ));
        }
        for (label, v) in [("n_R", self.n_r), ("m_N", self.m_n), ("m_P", self.m_p)] {
            if v < 2 {
                problems.push(format!("{label} must be >= 2 (got {v})"));
            }
        }
        if let Some(a) = self.target_aucs.iter().find(|&&a| !(0.5..1.0).contains(&a)) {
            problems.push(format!("target AUC {a} outside [0.5, 1)"));
        }
        if !(self.sigma_eps >= 0.0 && self.sigma_eps.is_finite()) {
            problems.push(format!("sigma_eps must be >= 0 (got {})", self.sigma_eps));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            problems.push(format!("alpha must lie in (0, 1) (got {})", self.alpha));
        }
        if self.iterations == 0 {
            problems.push("iterations must be >= 1".into());
        }
        if self.r_posthoc == 0 {
            problems.push("R_posthoc must be >= 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(
                problems
                    .into_iter()
                    .map(|p| format!("scenario {}: {p}", self.name))
                    .collect(),
            ))
        }
    }

    fn pair_count(&self) -> usize {
        self.k * (self.k - 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub rejection_rate: f64,
    pub posthoc_success_mean: f64,
    pub posthoc_success_sd: f64,
    pub iterations_run: usize,
    pub scenario: SimScenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Only run the post hoc test after the global test rejects.
    pub gated_posthoc: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: None,
            gated_posthoc: true,
        }
    }
}

/// Binormal location shift with `Φ(μ/√2) = auc`.
pub fn target_mu(auc: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&auc) {
        return Err(Error::domain(format!("target AUC must lie in [0.5, 1) (got {auc})")));
    }
    if auc == 0.5 {
        return Ok(0.0);
    }
    Ok(std::f64::consts::SQRT_2 * normal_quantile(auc)?)
}

fn poisson_plus_two(rng: &mut RngStream, expected: usize) -> Result<usize> {
    Ok(sample_poisson(rng, expected as f64 - 2.0)? as usize + 2)
}

/// One simulated study. Group ids are `T1..Tk`, subject ids `T{i}-S{j}`.
pub fn generate_dataset(s: &SimScenario, rng: &mut RngStream) -> Result<Vec<PairedSample>> {
    s.validate()?;
    let mut subjects = Vec::new();
    for (g, &auc) in s.target_aucs.iter().enumerate() {
        let mu = target_mu(auc)?;
        let n = poisson_plus_two(rng, s.n_r)?;
        for j in 0..n {
            let m_pre = poisson_plus_two(rng, s.m_n)?;
            let m_post = poisson_plus_two(rng, s.m_p)?;
            let eps = sample_normal(rng, 0.0, s.sigma_eps)?;
            let pre = (0..m_pre).map(|_| rng.standard_normal()).collect();
            let post = (0..m_post)
                .map(|_| mu + eps + rng.standard_normal())
                .collect();
            subjects.push(PairedSample::new(
                format!("T{}-S{}", g + 1, j + 1),
                format!("T{}", g + 1),
                pre,
                post,
            )?);
        }
    }
    Ok(subjects)
}

/// Pair decision for groups `i < j` (0-based indices into the truth vector).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairDecision {
    pub i: usize,
    pub j: usize,
    pub rejected: bool,
}

/// Pairs classified correctly: equal truth not rejected, or different truth
/// rejected.
pub fn posthoc_success_count(true_aucs: &[f64], decisions: &[PairDecision]) -> Result<usize> {
    let k = true_aucs.len();
    let mut seen = vec![false; k * k];
    for d in decisions {
        if d.i >= k || d.j >= k || d.i == d.j {
            return Err(Error::domain(format!("invalid pair ({}, {}) for k = {k}", d.i, d.j)));
        }
        let (a, b) = (d.i.min(d.j), d.i.max(d.j));
        seen[a * k + b] = true;
    }
    let covered = (0..k).all(|a| ((a + 1)..k).all(|b| seen[a * k + b]));
    if !covered {
        return Err(Error::domain("decisions do not cover every pair"));
    }
    Ok(decisions
        .iter()
        .filter(|d| (true_aucs[d.i] == true_aucs[d.j]) != d.rejected)
        .count())
}

struct IterationResult {
    rejected: bool,
    successes: usize,
}

fn run_iteration(
    s: &SimScenario,
    iteration: usize,
    reference: &ReferenceDistribution,
    gated: bool,
) -> Result<IterationResult> {
    let mut rng = RngStream::new(s.seed, iteration as u64);
    let data = generate_dataset(s, &mut rng)?;
    let estimates: Vec<SubjectEstimate> = data.iter().map(SubjectEstimate::from_sample).collect();
    let table = anova_auc(&estimates)?;
    let rejected = table.p_value <= s.alpha;

    let pair_rejected: Vec<bool> = if rejected || !gated {
        let ph = posthoc_pvalues(&table.per_group, reference, s.alpha)?;
        ph.pairs.iter().map(|p| p.p_value <= s.alpha).collect()
    } else {
        vec![false; s.pair_count()]
    };
    // Group ids T1..Tk sort lexicographically, so map back by parsing the id.
    let index_of = |id: &str| id[1..].parse::<usize>().map(|i| i - 1);
    let mut decisions = Vec::with_capacity(s.pair_count());
    let mut flags = pair_rejected.into_iter();
    for (a, ga) in table.per_group.iter().enumerate() {
        for gb in &table.per_group[a + 1..] {
            let (i, j) = (
                index_of(&ga.group_id).map_err(|_| Error::domain("bad group id"))?,
                index_of(&gb.group_id).map_err(|_| Error::domain("bad group id"))?,
            );
            decisions.push(PairDecision {
                i,
                j,
                rejected: flags.next().unwrap_or(false),
            });
        }
    }
    Ok(IterationResult {
        rejected,
        successes: posthoc_success_count(&s.target_aucs, &decisions)?,
    })
}

pub fn run_scenario(s: &SimScenario) -> Result<SimOutcome> {
    run_scenario_with(s, RunOptions::default())
}

/// Runs all iterations; iteration `i` draws from substream `i`, and results
/// are reduced in index order.
pub fn run_scenario_with(s: &SimScenario, options: RunOptions) -> Result<SimOutcome> {
    s.validate()?;
    let reference = ReferenceDistribution::cached(s.k, s.r_posthoc, s.seed)?;
    let work = || -> Result<Vec<IterationResult>> {
        (0..s.iterations)
            .into_par_iter()
            .map(|it| {
                run_iteration(s, it, &reference, options.gated_posthoc).map_err(|e| {
                    e.context(format!(
                        "scenario {} (k = {}, n_R = {}, m_N = {}, m_P = {}), iteration {it}",
                        s.name, s.k, s.n_r, s.m_n, s.m_p
                    ))
                })
            })
            .collect()
    };
    let results = match options.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let n = results.len() as f64;
    let rejections = results.iter().filter(|r| r.rejected).count();
    let mean = results.iter().map(|r| r.successes as f64).sum::<f64>() / n;
    let sd = if results.len() > 1 {
        (results
            .iter()
            .map(|r| (r.successes as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0))
            .sqrt()
    } else {
        0.0
    };
    Ok(SimOutcome {
        rejection_rate: rejections as f64 / n,
        posthoc_success_mean: mean,
        posthoc_success_sd: sd,
        iterations_run: results.len(),
        scenario: s.clone(),
    })
}
