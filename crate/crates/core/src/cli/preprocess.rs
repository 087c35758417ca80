//! Optional per-subject preprocessing: Hampel winsorization and
//! standardization by the pre-treatment sample.

use serde::{Deserialize, Serialize};

use crate::empirical::PairedSample;
use crate::numerics::mean_and_variance;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub winsorize: bool,
    pub standardize: bool,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `(median − 3·MAD, median + 3·MAD, MAD)` with the unscaled MAD.
pub fn hampel_bounds(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let med = median(values);
    let deviations: Vec<f64> = values.iter().map(|x| (x - med).abs()).collect();
    let mad = median(&deviations);
    Some((med - 3.0 * mad, med + 3.0 * mad, mad))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Winsorized {
    pub values: Vec<f64>,
    pub clipped: usize,
    /// MAD was 0, so every non-median value was pulled to the median.
    pub zero_mad: bool,
}

/// Clips values outside the Hampel bounds to the nearest bound, keeping
/// order and length.
pub fn winsorize_hampel(values: &[f64]) -> Winsorized {
    let Some((lo, hi, mad)) = hampel_bounds(values) else {
        return Winsorized {
            values: Vec::new(),
            clipped: 0,
            zero_mad: false,
        };
    };
    let mut clipped = 0;
    let values = values
        .iter()
        .map(|&x| {
            let c = x.clamp(lo, hi);
            if c != x {
                clipped += 1;
            }
            c
        })
        .collect();
    Winsorized {
        values,
        clipped,
        zero_mad: mad == 0.0 && clipped > 0,
    }
}

/// Maps every value to `(x − mean_pre) / sd_pre`, `sd` with divisor `m − 1`.
pub fn standardize_by_pre(ps: &PairedSample) -> Result<PairedSample> {
    let pre = ps.pre.values();
    if pre.len() < 2 {
        return Err(Error::Validation(vec![format!(
            "subject {}: cannot standardize with {} pre-treatment value(s)",
            ps.subject_id,
            pre.len()
        )]));
    }
    let (mean, var) = mean_and_variance(pre);
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(Error::Validation(vec![format!(
            "subject {}: pre-treatment standard deviation is 0",
            ps.subject_id
        )]));
    }
    Ok(PairedSample {
        subject_id: ps.subject_id.clone(),
        group_id: ps.group_id.clone(),
        pre: ps.pre.map(|x| (x - mean) / sd)?,
        post: ps.post.map(|x| (x - mean) / sd)?,
    })
}

/// Applies the selected steps to every subject, winsorizing pre and post
/// separately before standardizing. Returns the processed subjects and any
/// warnings; all failures are collected into one error.
pub fn apply(subjects: &[PairedSample], steps: Preprocessing) -> Result<(Vec<PairedSample>, Vec<String>)> {
    let mut out = Vec::with_capacity(subjects.len());
    let mut warnings = Vec::new();
    let mut problems = Vec::new();
    for ps in subjects {
        let mut ps = ps.clone();
        if steps.winsorize {
            let pre = winsorize_hampel(ps.pre.values());
            let post = winsorize_hampel(ps.post.values());
            for (w, phase) in [(&pre, "pre"), (&post, "post")] {
                if w.zero_mad {
                    warnings.push(format!(
                        "subject {}: MAD of {phase} values is 0, {} value(s) set to the median",
                        ps.subject_id, w.clipped
                    ));
                }
            }
            ps = PairedSample::new(ps.subject_id, ps.group_id, pre.values, post.values)?;
        }
        if steps.standardize {
            match standardize_by_pre(&ps) {
                Ok(s) => ps = s,
                Err(Error::Validation(mut m)) => {
                    problems.append(&mut m);
                    continue;
                }
                Err(e) => return Err(e),
            }
        }
        out.push(ps);
    }
    if problems.is_empty() {
        Ok((out, warnings))
    } else {
        Err(Error::Validation(problems))
    }
}
