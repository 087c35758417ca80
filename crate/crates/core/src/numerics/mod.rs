//! Special functions and seeded random sampling shared by the other modules.

mod rng;
mod special;

pub use rng::{sample_normal, sample_poisson, RngStream};
pub use special::{
    f_cdf, f_survival, ln_beta, ln_gamma, normal_cdf, normal_pdf, normal_quantile,
    regularized_incomplete_beta,
};

/// One-sample Kolmogorov–Smirnov distance between sorted draws and a
/// continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Sample mean and variance with divisor `n - 1`.
pub(crate) fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, ss / (n - 1.0))
}
