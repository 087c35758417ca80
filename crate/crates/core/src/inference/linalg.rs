//! Small dense symmetric eigendecomposition (cyclic Jacobi).

/// Row-major symmetric matrix of order `n`.
#[derive(Debug, Clone)]
pub(crate) struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub(crate) fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = f(i, j);
            }
        }
        Self { n, data }
    }

    #[cfg(test)]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Eigenvalues and column eigenvectors (`vectors[i * n + k]` is component `i`
/// of eigenvector `k`).
pub(crate) struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

const MAX_SWEEPS: usize = 100;

pub(crate) fn symmetric_eigen(m: &SymMatrix) -> Eigen {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Eigen {
            values: vec![0.0; n],
            vectors: v,
        };
    }

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let negligible = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + negligible == app.abs() && aqq.abs() + negligible == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    Eigen {
        values: (0..n).map(|i| a[i * n + i]).collect(),
        vectors: v,
    }
}

/// `xᵀ M⁺ x` for symmetric positive-semidefinite `M`, dropping eigenvalues at
/// or below `rel_tol` times the largest one.
pub(crate) fn pseudo_inverse_quadratic_form(m: &SymMatrix, x: &[f64], rel_tol: f64) -> f64 {
    let n = m.n;
    let eig = symmetric_eigen(m);
    let largest = eig.values.iter().cloned().fold(0.0, f64::max);
    if largest <= 0.0 {
        return 0.0;
    }
    let cutoff = rel_tol * largest;
    (0..n)
        .filter(|&k| eig.values[k] > cutoff)
        .map(|k| {
            let proj: f64 = (0..n).map(|i| eig.vectors[i * n + k] * x[i]).sum();
            proj * proj / eig.values[k]
        })
        .sum()
}
