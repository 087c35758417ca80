//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use aovauc::empirical::PairedSample;
use aovauc::RngStream;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// `(1/(mP·mN)) Σᵢ Σⱼ [1{xᵢ < yⱼ} + ½·1{xᵢ = yⱼ}]`.
pub fn auc_double_sum(pre: &[f64], post: &[f64]) -> f64 {
    let mut s = 0.0;
    for &x in pre {
        for &y in post {
            if x < y {
                s += 1.0;
            } else if x == y {
                s += 0.5;
            }
        }
    }
    s / (pre.len() * post.len()) as f64
}

fn ecdf(sample: &[f64], t: f64) -> f64 {
    sample.iter().filter(|&&x| x <= t).count() as f64 / sample.len() as f64
}

/// `inf{x : Ĝ(x) ≥ p}` by scanning every sample value.
fn generalized_inverse(sample: &[f64], p: f64) -> f64 {
    sample
        .iter()
        .copied()
        .filter(|&x| ecdf(sample, x) >= p)
        .fold(f64::INFINITY, f64::min)
}

/// Midpoint-rule `∫h² − (∫h)²` on `points` equal cells.
pub fn quadrature_star(h: impl Fn(f64) -> f64, points: usize) -> f64 {
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..points {
        let v = h((i as f64 + 0.5) / points as f64);
        s1 += v;
        s2 += v * v;
    }
    let n = points as f64;
    s2 / n - (s1 / n) * (s1 / n)
}

/// Plug-in AUC variance by quadrature of the two ECDF-quantile compositions.
/// The grid is a multiple of each quantile sample's size, so every cell lies
/// inside one plateau.
pub fn variance_quadrature(pre: &[f64], post: &[f64]) -> f64 {
    let (mn, mp) = (pre.len(), post.len());
    let pre_term = quadrature_star(|t| ecdf(post, generalized_inverse(pre, t)), 8 * mn);
    let post_term = quadrature_star(|t| ecdf(pre, generalized_inverse(post, t)), 8 * mp);
    pre_term / mn as f64 + post_term / mp as f64
}

/// `v S⁺ vᵀ` with `S = U Σ U` built by explicit matrix products and the
/// pseudoinverse taken from a dense symmetric eigendecomposition.
pub fn quadratic_form_oracle(v: &[f64], d: &[f64]) -> f64 {
    let n = v.len();
    let u = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let sigma = DMatrix::from_diagonal(&DVector::from_column_slice(d));
    let s = &u * sigma * &u;
    let eig = SymmetricEigen::new(s);
    let max = eig.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
    let inv = eig
        .eigenvalues
        .map(|l| if l.abs() > 1e-10 * max { 1.0 / l } else { 0.0 });
    let s_plus = &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose();
    let x = DVector::from_column_slice(v);
    (x.transpose() * s_plus * x)[(0, 0)]
}

/// Between 1 and `max_len` values on a coarse grid so ties are frequent.
pub fn tied_values(rng: &mut RngStream, max_len: usize, levels: usize) -> Vec<f64> {
    let m = 1 + rng.index(max_len);
    (0..m).map(|_| rng.index(levels) as f64 * 0.25).collect()
}

/// A random dataset of `k` groups with 2 to 5 subjects each, values on a grid.
pub fn grid_dataset(rng: &mut RngStream, k: usize) -> Vec<PairedSample> {
    let mut subjects = Vec::new();
    for g in 0..k {
        let n = 2 + rng.index(4);
        for s in 0..n {
            let pre = tied_values(rng, 7, 12);
            let post: Vec<f64> = tied_values(rng, 7, 12)
                .into_iter()
                .map(|x| x + 0.25 * g as f64)
                .collect();
            subjects.push(PairedSample::new(format!("g{g}s{s}"), format!("G{g}"), pre, post).unwrap());
        }
    }
    subjects
}

/// Equality up to `tol` relative to the larger magnitude, with infinities
/// compared exactly.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
