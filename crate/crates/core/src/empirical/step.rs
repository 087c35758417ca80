use super::{ecdf_eval, RealSample};
use crate::{Error, Result};

/// Piecewise-constant function on `(0, 1]`.
///
/// Piece `p` covers `(breakpoints[p - 1], breakpoints[p]]` with an implicit
/// leading breakpoint at 0; the last breakpoint is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    plateau_values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, plateau_values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != plateau_values.len() {
            return Err(Error::domain(
                "step function needs one plateau per breakpoint interval",
            ));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b > prev && b <= 1.0) {
                return Err(Error::domain(
                    "breakpoints must increase strictly inside (0, 1]",
                ));
            }
            prev = b;
        }
        if prev != 1.0 {
            return Err(Error::domain("last breakpoint must be 1"));
        }
        if plateau_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            breakpoints,
            plateau_values,
        })
    }

    /// `m` equal pieces `((j - 1)/m, j/m]`.
    pub(crate) fn uniform(plateau_values: Vec<f64>) -> Self {
        let m = plateau_values.len() as f64;
        let breakpoints = (1..=plateau_values.len()).map(|j| j as f64 / m).collect();
        Self {
            breakpoints,
            plateau_values,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn plateau_values(&self) -> &[f64] {
        &self.plateau_values
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        let mut prev = 0.0;
        self.breakpoints.iter().map(move |&b| {
            let w = b - prev;
            prev = b;
            w
        })
    }

    /// Value at `t ∈ (0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b < t);
        self.plateau_values[idx.min(self.plateau_values.len() - 1)]
    }
}

/// Exact step representation of `t ↦ F̂(Ĝ⁺(t))`, where `F̂` is the ECDF of
/// `f_source` and `Ĝ⁺` the generalized inverse of the ECDF of `g_source`.
///
/// On `((j - 1)/m_G, j/m_G]` the quantile is the `j`-th order statistic of
/// `g_source`, so plateau `j` is `F̂(g_(j))`.
pub fn compose_ecdf_quantile(f_source: &RealSample, g_source: &RealSample) -> StepFunction {
    let plateaus = g_source
        .values()
        .iter()
        .map(|&g| ecdf_eval(f_source, g))
        .collect();
    StepFunction::uniform(plateaus)
}

/// `∫₀¹ h² − (∫₀¹ h)²`, the variance of `h` under the uniform law on (0, 1).
pub fn star_norm(h: &StepFunction) -> f64 {
    let first = h.plateau_values[0];
    if h.plateau_values.iter().all(|&v| v == first) {
        return 0.0;
    }
    let mean: f64 = h
        .widths()
        .zip(h.plateau_values())
        .map(|(w, v)| w * v)
        .sum();
    h.widths()
        .zip(h.plateau_values())
        .map(|(w, v)| w * (v - mean).powi(2))
        .sum()
}
