//! The ANOVA-type test for equality of treatment AUCs with subject random
//! effects.
//!
//! Each group contributes the quadratic form `Âᵢ S⁺(nᵢ) Âᵢᵀ` to the
//! intra-group sum (SSE), where `S = U Σ U`, `U` is the centering matrix and
//! `Σ` is diagonal with entries `σ̂²ᵢⱼ + τ̂²ᵢ`. The inter-group sum (SSF) is
//! the same form applied to the group means with `Σ(k)` holding the
//! estimated variance of each group mean, `nᵢ⁻² Σⱼ (σ̂²ᵢⱼ + τ̂²ᵢ)`.

mod linalg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::empirical::{empirical_auc, subject_auc_variance, PairedSample};
use crate::numerics::{f_survival, mean_and_variance};
use crate::{Error, Result};

use linalg::{pseudo_inverse_quadratic_form, SymMatrix};

/// Eigenvalues at or below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Per-subject empirical AUC and its plug-in variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectEstimate {
    pub group_id: String,
    pub subject_id: String,
    pub auc: f64,
    pub variance: f64,
    pub m_pre: usize,
    pub m_post: usize,
}

impl SubjectEstimate {
    pub fn from_sample(ps: &PairedSample) -> Self {
        Self {
            group_id: ps.group_id.clone(),
            subject_id: ps.subject_id.clone(),
            auc: empirical_auc(ps),
            variance: subject_auc_variance(ps),
            m_pre: ps.m_pre(),
            m_post: ps.m_post(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group_id: String,
    pub n: usize,
    pub mean_auc: f64,
    /// Between-subject variance estimate, clamped at 0.
    pub tau2: f64,
    /// Estimated variance of `mean_auc`.
    pub var_of_mean: f64,
    pub subject_variances: Vec<f64>,
}

/// Values and diagonal variances for the centered pseudoinverse quadratic
/// form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFormInput {
    values: Vec<f64>,
    variances: Vec<f64>,
}

impl QuadraticFormInput {
    pub fn new(values: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if values.len() != variances.len() {
            return Err(Error::domain(format!(
                "{} values but {} variances",
                values.len(),
                variances.len()
            )));
        }
        if values.len() < 2 {
            return Err(Error::domain("quadratic form needs at least 2 entries"));
        }
        if values.iter().chain(&variances).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if variances.iter().any(|&d| d < 0.0) {
            return Err(Error::domain("variances must be >= 0"));
        }
        if variances.iter().all(|&d| d == 0.0) {
            return Err(Error::ZeroVariance);
        }
        Ok(Self { values, variances })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub sse: f64,
    pub df_sse: usize,
    #[serde(with = "extended_float")]
    pub ssf: f64,
    pub df_ssf: usize,
    pub mean_square_intra: f64,
    #[serde(with = "extended_float")]
    pub mean_square_inter: f64,
    /// `+∞` when SSE vanishes while SSF does not.
    #[serde(with = "extended_float")]
    pub f_stat: f64,
    pub p_value: f64,
    pub per_group: Vec<GroupSummary>,
}

impl AnovaTable {
    pub fn total(&self) -> f64 {
        self.sse + self.ssf
    }

    pub fn n_subjects(&self) -> usize {
        self.df_sse + self.per_group.len()
    }
}

/// Method-of-moments between-subject variance
/// `max(0, s²(aucs) − mean(variances))` with divisor `n − 1` for `s²`.
pub fn between_subject_variance(aucs: &[f64], variances: &[f64]) -> Result<f64> {
    if aucs.len() != variances.len() {
        return Err(Error::domain("aucs and variances differ in length"));
    }
    if aucs.len() < 2 {
        return Err(Error::domain(format!(
            "between-subject variance needs n >= 2 (got {})",
            aucs.len()
        )));
    }
    let (_, sample_var) = mean_and_variance(aucs);
    let mean_within = variances.iter().sum::<f64>() / variances.len() as f64;
    Ok((sample_var - mean_within).max(0.0))
}

/// `v S⁺ vᵀ` with `S = U diag(d) U`, `U = I − J/n`, evaluated through a
/// symmetric eigendecomposition of the explicitly built `S`.
pub fn centered_quadratic_form(q: &QuadraticFormInput) -> f64 {
    let n = q.values.len();
    let nf = n as f64;
    let d = &q.variances;
    let total: f64 = d.iter().sum();
    // (U D U)_{ab} = d_a δ_ab − (d_a + d_b)/n + Σd / n².
    let s = SymMatrix::from_fn(n, |a, b| {
        let diag = if a == b { d[a] } else { 0.0 };
        diag - (d[a] + d[b]) / nf + total / (nf * nf)
    });
    // S⁺ = U S⁺ U, so centering first only removes rounding leakage.
    let mean = q.values.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = q.values.iter().map(|v| v - mean).collect();
    pseudo_inverse_quadratic_form(&s, &centered, RANK_TOLERANCE)
}

/// Quadratic form that tolerates an all-zero variance vector: constant values
/// then contribute 0 and anything else is infinitely implausible.
fn degenerate_tolerant_form(values: Vec<f64>, variances: Vec<f64>) -> Result<f64> {
    match QuadraticFormInput::new(values.clone(), variances) {
        Ok(q) => Ok(centered_quadratic_form(&q)),
        Err(Error::ZeroVariance) => {
            let first = values[0];
            Ok(if values.iter().all(|&v| v == first) {
                0.0
            } else {
                f64::INFINITY
            })
        }
        Err(e) => Err(e),
    }
}

pub fn summarize_group(estimates: &[SubjectEstimate]) -> Result<GroupSummary> {
    let group_id = estimates
        .first()
        .map(|e| e.group_id.clone())
        .ok_or(Error::EmptySample)?;
    if let Some(other) = estimates.iter().find(|e| e.group_id != group_id) {
        return Err(Error::domain(format!(
            "subject {} belongs to group {}, not {}",
            other.subject_id, other.group_id, group_id
        )));
    }
    let n = estimates.len();
    if n < 2 {
        return Err(Error::GroupTooSmall(vec![(group_id, n)]));
    }
    let aucs: Vec<f64> = estimates.iter().map(|e| e.auc).collect();
    let subject_variances: Vec<f64> = estimates.iter().map(|e| e.variance).collect();
    let tau2 = between_subject_variance(&aucs, &subject_variances)?;
    let mean_auc = aucs.iter().sum::<f64>() / n as f64;
    let var_of_mean =
        subject_variances.iter().map(|v| v + tau2).sum::<f64>() / (n as f64 * n as f64);
    Ok(GroupSummary {
        group_id,
        n,
        mean_auc,
        tau2,
        var_of_mean,
        subject_variances,
    })
}

/// Groups estimates by `group_id` in sorted order.
fn group_estimates(estimates: &[SubjectEstimate]) -> BTreeMap<&str, Vec<SubjectEstimate>> {
    let mut groups: BTreeMap<&str, Vec<SubjectEstimate>> = BTreeMap::new();
    for e in estimates {
        groups.entry(e.group_id.as_str()).or_default().push(e.clone());
    }
    groups
}

/// The F test of equal treatment AUCs.
pub fn anova_auc(estimates: &[SubjectEstimate]) -> Result<AnovaTable> {
    let groups = group_estimates(estimates);
    let k = groups.len();
    if k < 2 {
        return Err(Error::TooFewGroups(k));
    }
    let small: Vec<(String, usize)> = groups
        .iter()
        .filter(|(_, members)| members.len() < 2)
        .map(|(g, members)| (g.to_string(), members.len()))
        .collect();
    if !small.is_empty() {
        return Err(Error::GroupTooSmall(small));
    }

    let mut per_group = Vec::with_capacity(k);
    let mut sse = 0.0;
    for members in groups.values() {
        let summary = summarize_group(members)?;
        let aucs: Vec<f64> = members.iter().map(|e| e.auc).collect();
        let d: Vec<f64> = summary
            .subject_variances
            .iter()
            .map(|v| v + summary.tau2)
            .collect();
        sse += degenerate_tolerant_form(aucs, d)?;
        per_group.push(summary);
    }

    let means: Vec<f64> = per_group.iter().map(|g| g.mean_auc).collect();
    let mean_vars: Vec<f64> = per_group.iter().map(|g| g.var_of_mean).collect();
    let ssf = degenerate_tolerant_form(means, mean_vars)?;

    let n: usize = per_group.iter().map(|g| g.n).sum();
    let df_sse = n - k;
    let df_ssf = k - 1;
    let (f_stat, p_value) = f_statistic(sse, ssf, df_sse, df_ssf)?;

    Ok(AnovaTable {
        sse,
        df_sse,
        ssf,
        df_ssf,
        mean_square_intra: sse / df_sse as f64,
        mean_square_inter: ssf / df_ssf as f64,
        f_stat,
        p_value,
        per_group,
    })
}

/// `F = (n − k)·SSF / ((k − 1)·SSE)` and its upper-tail p-value, with the
/// degenerate SSE = 0 cases resolved to `(∞, 0)` or `(0, 1)`.
pub fn f_statistic(sse: f64, ssf: f64, df_sse: usize, df_ssf: usize) -> Result<(f64, f64)> {
    if sse == 0.0 || !ssf.is_finite() {
        return Ok(if ssf > 0.0 {
            (f64::INFINITY, 0.0)
        } else {
            (0.0, 1.0)
        });
    }
    let f = (df_sse as f64 * ssf) / (df_ssf as f64 * sse);
    let p = f_survival(f, df_ssf as f64, df_sse as f64)?;
    Ok((f, p))
}

/// Serializes non-finite floats as strings so JSON stays valid.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if *v > 0.0 {
            s.serialize_str("Infinity")
        } else {
            s.serialize_str("-Infinity")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "Infinity" => Ok(f64::INFINITY),
                "-Infinity" => Ok(f64::NEG_INFINITY),
                "NaN" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}
