//! Acceptance criteria, one PASS/FAIL line each on stderr.
//!
//! Run with `cargo test -p aovauc --test acceptance`.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use aovauc::cli::{analyze, format_p, resampling_diagnostic, AnalyzeOptions, Dataset, Preprocessing};
use aovauc::empirical::{star_norm, StepFunction};
use aovauc::inference::{centered_quadratic_form, f_statistic, QuadraticFormInput};
use aovauc::posthoc::critical_value;
use aovauc::simulation::{run_scenario, SimScenario};
use aovauc::{anova_auc, empirical_auc, subject_auc_variance, AnovaTable, PairedSample, RngStream, SubjectEstimate};
use common::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Writes straight to stderr so the lines survive the test harness's output
/// capture.
fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn criterion(failures: &mut Vec<u32>, id: u32, name: &str, check: impl FnOnce() -> Verdict) {
    let v = catch_unwind(AssertUnwindSafe(check))
        .unwrap_or_else(|_| verdict(false, "check panicked"));
    report(&format!(
        "criterion {id} [{}] {name}: {}",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail
    ));
    if !v.pass {
        failures.push(id);
    }
}

fn table(subjects: &[PairedSample]) -> AnovaTable {
    let est: Vec<SubjectEstimate> = subjects.iter().map(SubjectEstimate::from_sample).collect();
    anova_auc(&est).unwrap()
}

fn same_table(a: &AnovaTable, b: &AnovaTable) -> bool {
    [(a.sse, b.sse), (a.ssf, b.ssf), (a.f_stat, b.f_stat), (a.p_value, b.p_value)]
        .iter()
        .all(|&(x, y)| close(x, y, 1e-12))
}

fn oracle_checks() -> Verdict {
    let mut rng = RngStream::new(601, 0);
    for _ in 0..1000 {
        let pre = tied_values(&mut rng, 12, 6);
        let post = tied_values(&mut rng, 12, 6);
        let ps = PairedSample::new("s", "g", pre.clone(), post.clone()).unwrap();
        if empirical_auc(&ps) != auc_double_sum(&pre, &post) {
            return verdict(false, format!("(a) AUC mismatch on {pre:?} / {post:?}"));
        }
    }
    let mut worst_b: f64 = 0.0;
    for _ in 0..500 {
        let pre = tied_values(&mut rng, 15, 10);
        let post = tied_values(&mut rng, 15, 10);
        let ps = PairedSample::new("s", "g", pre.clone(), post.clone()).unwrap();
        worst_b = worst_b.max((subject_auc_variance(&ps) - variance_quadrature(&pre, &post)).abs());
        let h = StepFunction::new(vec![0.25, 0.5, 1.0], vec![rng.uniform(), rng.uniform(), rng.uniform()]).unwrap();
        worst_b = worst_b.max((star_norm(&h) - quadrature_star(|t| h.eval(t), 400)).abs());
    }
    let mut worst_c: f64 = 0.0;
    for _ in 0..500 {
        let n = 2 + rng.index(9);
        let v: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let d: Vec<f64> = (0..n).map(|_| 1e-4 + 0.05 * rng.uniform()).collect();
        let got = centered_quadratic_form(&QuadraticFormInput::new(v.clone(), d.clone()).unwrap());
        let oracle = quadratic_form_oracle(&v, &d);
        worst_c = worst_c.max((got - oracle).abs() / oracle.abs().max(1.0));
    }
    let mut worst_d: f64 = 0.0;
    for _ in 0..200 {
        let (a, b, d1, d2) = (rng.uniform(), rng.uniform(), 1e-3 + rng.uniform(), 1e-3 + rng.uniform());
        let got = centered_quadratic_form(&QuadraticFormInput::new(vec![a, b], vec![d1, d2]).unwrap());
        worst_d = worst_d.max((got - (a - b).powi(2) / (d1 + d2)).abs());
    }
    verdict(
        worst_b <= 1e-12 && worst_c <= 1e-10 && worst_d <= 1e-12,
        format!(
            "(a) 1000 exact; (b) max err {worst_b:.1e}; (c) max rel err {worst_c:.1e}; (d) max err {worst_d:.1e}"
        ),
    )
}

fn invariance_checks() -> Verdict {
    let mut rng = RngStream::new(701, 0);
    for _ in 0..500 {
        let a = PairedSample::new("s", "g", tied_values(&mut rng, 12, 6), tied_values(&mut rng, 12, 6)).unwrap();
        let b = PairedSample::new("s", "g", a.post.values().to_vec(), a.pre.values().to_vec()).unwrap();
        if empirical_auc(&a) + empirical_auc(&b) != 1.0 {
            return verdict(false, "complement identity violated");
        }
    }
    for trial in 0..200 {
        let k = 2 + trial % 3;
        let subjects = grid_dataset(&mut rng, k);
        let base = table(&subjects);

        let mapped: Vec<PairedSample> = subjects
            .iter()
            .map(|s| PairedSample {
                pre: s.pre.map(|x| 3.0 * (x / 4.0).exp() - 1.0).unwrap(),
                post: s.post.map(|x| 3.0 * (x / 4.0).exp() - 1.0).unwrap(),
                ..s.clone()
            })
            .collect();
        if !same_table(&base, &table(&mapped)) {
            return verdict(false, format!("monotone transform changed the table (trial {trial})"));
        }

        let mut shuffled = subjects.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.index(i + 1));
        }
        for s in &mut shuffled {
            s.group_id = format!("Z{}", 9 - s.group_id[1..].parse::<usize>().unwrap());
        }
        if !same_table(&base, &table(&shuffled)) {
            return verdict(false, format!("permutation/relabeling changed the table (trial {trial})"));
        }
    }
    for trial in 0..100 {
        let subjects: Vec<PairedSample> = (0..9)
            .map(|i| {
                let pre: Vec<f64> = (0..6).map(|_| rng.standard_normal()).collect();
                let post: Vec<f64> = (0..5).map(|_| 0.4 + rng.standard_normal()).collect();
                PairedSample::new(format!("s{i}"), format!("G{}", i % 3), pre, post).unwrap()
            })
            .collect();
        let dataset = Dataset::new(subjects).unwrap();
        let plain = analyze(&dataset, &AnalyzeOptions::default()).unwrap();
        let opts = AnalyzeOptions {
            preprocessing: Preprocessing {
                winsorize: false,
                standardize: true,
            },
            ..Default::default()
        };
        if !same_table(&plain.anova, &analyze(&dataset, &opts).unwrap().anova) {
            return verdict(false, format!("standardization changed the table (trial {trial})"));
        }
    }
    verdict(true, "complement, monotone transform, permutation/relabeling and standardization all hold")
}

fn exact_null_dataset(seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed, 0);
    let mut subjects = Vec::new();
    for g in 1..=4 {
        for s in 1..=25 {
            let pre: Vec<f64> = (0..25).map(|_| rng.standard_normal()).collect();
            let post: Vec<f64> = (0..25).map(|_| rng.standard_normal()).collect();
            subjects.push(PairedSample::new(format!("T{g}-S{s}"), format!("T{g}"), pre, post).unwrap());
        }
    }
    Dataset::new(subjects).unwrap()
}

#[test]
fn acceptance() {
    let mut failures = Vec::new();

    let mut null = SimScenario::new("null_25_25_065", vec![0.65; 4], 25, 25, 25);
    null.iterations = 2000;
    let null_outcome = run_scenario(&null);

    criterion(&mut failures, 1, "null size", || {
        let o = null_outcome.as_ref().expect("null scenario runs");
        verdict(
            (0.035..=0.065).contains(&o.rejection_rate),
            format!("rejection rate {:.2}% over {} iterations (target [3.5%, 6.5%])", 100.0 * o.rejection_rate, o.iterations_run),
        )
    });

    criterion(&mut failures, 2, "null post hoc success", || {
        let o = null_outcome.as_ref().expect("null scenario runs");
        verdict(
            (5.85..=6.0).contains(&o.posthoc_success_mean),
            format!(
                "mean {:.3} (sd {:.3}) correct pair decisions out of 6 (target [5.85, 6.0])",
                o.posthoc_success_mean, o.posthoc_success_sd
            ),
        )
    });

    criterion(&mut failures, 3, "post hoc thresholds", || {
        let expected = [(2, 1.961), (3, 2.344), (4, 2.569), (5, 2.727)];
        let mut ok = true;
        let mut parts = Vec::new();
        for (k, want) in expected {
            let c = critical_value(k, 0.05, 1_000_000, 1).unwrap();
            ok &= (c - want).abs() <= 0.01;
            if k == 2 {
                ok &= (c - 1.95996).abs() <= 0.005;
            }
            parts.push(format!("k={k}: {c:.4}"));
        }
        verdict(ok, format!("{} (targets 1.961, 2.344, 2.569, 2.727 +/- 0.01)", parts.join(", ")))
    });

    criterion(&mut failures, 4, "power at n_R = 10", || {
        let mut s = SimScenario::new("increasing_10", vec![0.65, 0.70, 0.75, 0.80], 10, 25, 25);
        s.iterations = 1000;
        let o = run_scenario(&s).unwrap();
        verdict(o.rejection_rate >= 0.75, format!("power {:.3} over 1000 iterations (target >= 0.75)", o.rejection_rate))
    });

    criterion(&mut failures, 5, "F arithmetic", || {
        let (f, p) = f_statistic(96.02, 691.62, 96, 3).unwrap();
        let printed = format_p(p);
        verdict(
            (f - 230.49).abs() <= 0.01 && printed == "< 2.2e-16",
            format!("F = {f:.4}, p printed as {printed:?}"),
        )
    });

    criterion(&mut failures, 6, "oracle equivalences", oracle_checks);

    criterion(&mut failures, 7, "invariance suite", invariance_checks);

    criterion(&mut failures, 8, "null diagnostic calibration", || {
        let d = resampling_diagnostic(&exact_null_dataset(8), 2000, 8).unwrap();
        verdict(
            d.ks_distance < 0.0364 && d.reference_df == (3, 96),
            format!("KS distance {:.4} against F{:?} (threshold 0.0364)", d.ks_distance, d.reference_df),
        )
    });

    report("criterion 9 [WAIVED] reference dataset reproduction: dataset not supplied");

    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
