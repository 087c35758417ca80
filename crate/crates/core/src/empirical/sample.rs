use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A non-empty sample of finite reals, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealSample {
    values: Vec<f64>,
}

impl RealSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies `f` to every value and re-sorts.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }
}

impl TryFrom<Vec<f64>> for RealSample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<RealSample> for Vec<f64> {
    fn from(s: RealSample) -> Self {
        s.values
    }
}

/// One subject's pre-treatment (negative) and post-treatment (positive)
/// measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub subject_id: String,
    pub group_id: String,
    pub pre: RealSample,
    pub post: RealSample,
}

impl PairedSample {
    pub fn new(
        subject_id: impl Into<String>,
        group_id: impl Into<String>,
        pre: Vec<f64>,
        post: Vec<f64>,
    ) -> Result<Self> {
        Ok(Self {
            subject_id: subject_id.into(),
            group_id: group_id.into(),
            pre: RealSample::new(pre)?,
            post: RealSample::new(post)?,
        })
    }

    pub fn m_pre(&self) -> usize {
        self.pre.len()
    }

    pub fn m_post(&self) -> usize {
        self.post.len()
    }

    /// Data-quality note for subjects with a singleton pre or post sample.
    pub fn warning(&self) -> Option<String> {
        (self.m_pre() < 2 || self.m_post() < 2).then(|| {
            format!(
                "subject {} (group {}) has m_pre = {}, m_post = {}; its variance term is degenerate",
                self.subject_id,
                self.group_id,
                self.m_pre(),
                self.m_post()
            )
        })
    }
}
