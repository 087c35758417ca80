//! Empirical CDFs and quantiles, the empirical AUC and its plug-in variance.
//!
//! Ties are compared with exact floating-point equality: the inputs are
//! measured data, not computed quantities.

mod sample;
mod step;

pub use sample::{PairedSample, RealSample};
pub use step::{compose_ecdf_quantile, star_norm, StepFunction};

use crate::{Error, Result};

/// `#{values ≤ t} / m`.
pub fn ecdf_eval(s: &RealSample, t: f64) -> f64 {
    let count = s.values().partition_point(|&v| v <= t);
    count as f64 / s.len() as f64
}

/// Generalized inverse `inf{x : F̂(x) ≥ p}`, i.e. the `⌈p·m⌉`-th order
/// statistic.
pub fn quantile_eval(s: &RealSample, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!(
            "quantile level must lie in (0, 1] (got {p})"
        )));
    }
    let m = s.len();
    let mf = m as f64;
    // Settle the rank against the same k/m values the ECDF returns, so the
    // two functions stay consistent under rounding of p·m.
    let mut k = ((p * mf).ceil() as usize).clamp(1, m);
    while k > 1 && (k - 1) as f64 / mf >= p {
        k -= 1;
    }
    while k < m && (k as f64 / mf) < p {
        k += 1;
    }
    Ok(s.values()[k - 1])
}

/// Twice the Mann–Whitney count `Σ_i Σ_j [I(x_j < y_i) + ½ I(x_j = y_i)]`,
/// computed from midranks of the merged sample.
fn doubled_win_count(pre: &[f64], post: &[f64]) -> u64 {
    let (n_pre, n_post) = (pre.len(), post.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut position = 0u64;
    // Sum over post values of twice their midrank.
    let mut doubled_rank_sum = 0u64;
    while i < n_pre || j < n_post {
        let next = match (pre.get(i), post.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        let tied_pre = pre[i..].iter().take_while(|&&v| v == next).count();
        let tied_post = post[j..].iter().take_while(|&&v| v == next).count();
        let block = (tied_pre + tied_post) as u64;
        // Ranks position+1 ..= position+block; doubled midrank is their sum of endpoints.
        let doubled_midrank = 2 * position + block + 1;
        doubled_rank_sum += doubled_midrank * tied_post as u64;
        position += block;
        i += tied_pre;
        j += tied_post;
    }
    let n_post = n_post as u64;
    doubled_rank_sum - n_post * (n_post + 1)
}

/// Empirical AUC: the probability that a post value exceeds a pre value,
/// ties counted one half.
pub fn empirical_auc(ps: &PairedSample) -> f64 {
    auc_of(&ps.pre, &ps.post)
}

pub(crate) fn auc_of(pre: &RealSample, post: &RealSample) -> f64 {
    let doubled = doubled_win_count(pre.values(), post.values());
    (doubled as f64 / 2.0) / (pre.len() as f64 * post.len() as f64)
}

/// Plug-in variance `m_N⁻¹‖F̂∘Ĝ⁺‖* + m_P⁻¹‖Ĝ∘F̂⁺‖*` of the empirical AUC,
/// with `F̂` the post ECDF and `Ĝ` the pre ECDF.
pub fn subject_auc_variance(ps: &PairedSample) -> f64 {
    variance_of(&ps.pre, &ps.post)
}

pub(crate) fn variance_of(pre: &RealSample, post: &RealSample) -> f64 {
    let post_at_pre_quantiles = compose_ecdf_quantile(post, pre);
    let pre_at_post_quantiles = compose_ecdf_quantile(pre, post);
    star_norm(&post_at_pre_quantiles) / pre.len() as f64
        + star_norm(&pre_at_post_quantiles) / post.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[f64]) -> RealSample {
        RealSample::new(v.to_vec()).unwrap()
    }

    fn paired(pre: &[f64], post: &[f64]) -> PairedSample {
        PairedSample::new("s", "g", pre.to_vec(), post.to_vec()).unwrap()
    }

    #[test]
    fn ecdf_examples() {
        assert_eq!(ecdf_eval(&sample(&[1.0, 2.0, 3.0]), 2.0), 2.0 / 3.0);
        assert_eq!(ecdf_eval(&sample(&[1.0, 2.0, 3.0]), 0.0), 0.0);
        assert_eq!(ecdf_eval(&sample(&[1.0, 1.0, 2.0]), 1.0), 2.0 / 3.0);
    }

    #[test]
    fn quantile_examples() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(quantile_eval(&s, 0.5).unwrap(), 2.0);
        assert_eq!(quantile_eval(&s, 0.51).unwrap(), 3.0);
        assert_eq!(quantile_eval(&sample(&[5.0]), 1.0).unwrap(), 5.0);
        assert!(quantile_eval(&s, 0.0).is_err());
        assert!(quantile_eval(&s, 1.01).is_err());
    }

    #[test]
    fn quantile_is_generalized_inverse_of_ecdf() {
        let s = sample(&[0.3, 0.3, 1.0, 2.5, 2.5, 2.5, 7.0, 8.0, 9.0, 10.0]);
        for i in 1..=1000 {
            let p = i as f64 / 1000.0;
            let q = quantile_eval(&s, p).unwrap();
            assert!(ecdf_eval(&s, q) >= p);
            let below = s.values().iter().rfind(|&&v| v < q);
            if let Some(&b) = below {
                assert!(ecdf_eval(&s, b) < p);
            }
        }
    }

    #[test]
    fn auc_examples() {
        assert_eq!(empirical_auc(&paired(&[0.2, 0.7], &[0.5, 0.9])), 0.75);
        assert_eq!(empirical_auc(&paired(&[1.0, 2.0], &[2.0, 3.0])), 0.875);
        assert_eq!(empirical_auc(&paired(&[1.0], &[1.0])), 0.5);
    }

    #[test]
    fn variance_examples() {
        assert_eq!(subject_auc_variance(&paired(&[1.0, 2.0], &[3.0, 4.0])), 0.0);
        let v = subject_auc_variance(&paired(&[1.0, 3.0], &[2.0, 4.0]));
        assert!((v - 0.0625).abs() < 1e-15);
        let a = subject_auc_variance(&paired(&[0.1, 0.5, 0.5, 2.0], &[0.4, 3.0, 1.0]));
        let b = subject_auc_variance(&paired(&[0.4, 3.0, 1.0], &[0.1, 0.5, 0.5, 2.0]));
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_samples_have_zero_variance() {
        assert_eq!(subject_auc_variance(&paired(&[1.0], &[2.0])), 0.0);
        assert_eq!(subject_auc_variance(&paired(&[1.0], &[1.0])), 0.0);
    }
}
