use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{load_csv, DataSource, Dataset};
use super::preprocess::{self, Preprocessing};
use crate::inference::{anova_auc, AnovaTable, SubjectEstimate};
use crate::posthoc::{posthoc_pvalues, PosthocTable, ReferenceDistribution, DEFAULT_REPLICATES};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub posthoc: bool,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    pub preprocessing: Preprocessing,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            posthoc: false,
            alpha: 0.05,
            replicates: DEFAULT_REPLICATES,
            seed: 1,
            preprocessing: Preprocessing::default(),
        }
    }
}

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<DataSource>,
    pub options: AnalyzeOptions,
    pub version: String,
}

/// Per-group numbers behind the report, including subject-level estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group_id: String,
    pub n: usize,
    pub mean_auc: f64,
    /// Random-effects standard error, `√τ̂²`.
    pub tau: f64,
    pub var_of_mean: f64,
    pub subjects: Vec<SubjectEstimate>,
}

/// `√τ̂²` per group, in table order, and their unweighted mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauSummary {
    pub per_group: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub anova: AnovaTable,
    pub groups: Vec<GroupReport>,
    pub tau_summary: TauSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posthoc: Option<PosthocTable>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

fn validate_options(opts: &AnalyzeOptions, problems: &mut Vec<String>) {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        problems.push(format!("alpha must lie in (0, 1) (got {})", opts.alpha));
    }
    if opts.posthoc && opts.replicates == 0 {
        problems.push("post hoc test needs R >= 1 replicates".into());
    }
}

fn validate_groups(subjects: &[SubjectEstimate], problems: &mut Vec<String>) {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in subjects {
        *counts.entry(&s.group_id).or_default() += 1;
    }
    if counts.len() < 2 {
        problems.push(format!("need at least 2 groups (found {})", counts.len()));
    }
    for (g, n) in counts {
        if n < 2 {
            problems.push(format!("group {g} has {n} subject(s); at least 2 are required"));
        }
    }
}

/// Preprocessing, per-subject estimates, the F test and the optional post
/// hoc comparisons. All validation problems are reported together.
pub fn analyze(dataset: &Dataset, opts: &AnalyzeOptions) -> Result<ReportDocument> {
    let mut problems = Vec::new();
    validate_options(opts, &mut problems);

    let (subjects, mut warnings) = match preprocess::apply(dataset.subjects(), opts.preprocessing) {
        Ok(r) => r,
        Err(Error::Validation(mut m)) => {
            problems.append(&mut m);
            (dataset.subjects().to_vec(), Vec::new())
        }
        Err(e) => return Err(e),
    };
    warnings.extend(subjects.iter().filter_map(|s| s.warning()));

    let estimates: Vec<SubjectEstimate> = subjects.iter().map(SubjectEstimate::from_sample).collect();
    validate_groups(&estimates, &mut problems);
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }

    let anova = anova_auc(&estimates)?;
    let groups: Vec<GroupReport> = anova
        .per_group
        .iter()
        .map(|g| GroupReport {
            group_id: g.group_id.clone(),
            n: g.n,
            mean_auc: g.mean_auc,
            tau: g.tau2.sqrt(),
            var_of_mean: g.var_of_mean,
            subjects: estimates
                .iter()
                .filter(|e| e.group_id == g.group_id)
                .cloned()
                .collect(),
        })
        .collect();
    for g in anova.per_group.iter().filter(|g| g.tau2 == 0.0) {
        warnings.push(format!(
            "group {}: between-subject variance estimate clamped at 0",
            g.group_id
        ));
    }
    let per_group: Vec<f64> = groups.iter().map(|g| g.tau).collect();
    let tau_summary = TauSummary {
        mean: per_group.iter().sum::<f64>() / per_group.len() as f64,
        per_group,
    };

    let posthoc = if opts.posthoc {
        let reference = ReferenceDistribution::cached(anova.per_group.len(), opts.replicates, opts.seed)?;
        Some(posthoc_pvalues(&anova.per_group, &reference, opts.alpha)?)
    } else {
        None
    };

    Ok(ReportDocument {
        anova,
        groups,
        tau_summary,
        posthoc,
        warnings,
        provenance: Provenance {
            source: dataset.source().cloned(),
            options: opts.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// Reloads the recorded source and repeats the analysis with the recorded
/// options.
pub fn rerun(provenance: &Provenance) -> Result<ReportDocument> {
    let source = provenance.source.as_ref().ok_or_else(|| {
        Error::Validation(vec!["provenance records no data source".into()])
    })?;
    let dataset = load_csv(&source.path, &source.columns, &source.phase_labels)?;
    analyze(&dataset, &provenance.options)
}
