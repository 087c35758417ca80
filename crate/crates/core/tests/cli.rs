use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use aovauc::cli::{
    render_text, rerun, run, AnalyzeOptions, ColumnMap, DataSource, GroupReport, PhaseLabels,
    Provenance, ReportDocument, TauSummary, EXIT_IO, EXIT_OK, EXIT_VALIDATION,
};
use aovauc::inference::f_statistic;
use aovauc::posthoc::{PairComparison, PosthocTable};
use aovauc::{AnovaTable, GroupSummary, RngStream};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["aovauc"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Three groups, four subjects each, long format with columns id,trt,when,x.
fn write_dataset(dir: &Path) -> PathBuf {
    let path = dir.join("data.csv");
    let mut f = fs::File::create(&path).unwrap();
    writeln!(f, "id,trt,when,x").unwrap();
    let mut rng = RngStream::new(77, 0);
    for (g, shift) in [("A", 0.0), ("B", 0.4), ("C", 1.2)] {
        for s in 0..4 {
            for _ in 0..8 {
                writeln!(f, "{g}{s},{g},pre,{}", rng.standard_normal()).unwrap();
            }
            for _ in 0..6 {
                writeln!(f, "{g}{s},{g},post,{}", shift + rng.standard_normal()).unwrap();
            }
        }
    }
    path
}

fn data_args(path: &Path) -> Vec<String> {
    ["--data", path.to_str().unwrap(), "--value", "x", "--group", "trt", "--subject", "id", "--phase", "when"]
        .map(String::from)
        .to_vec()
}

#[test]
fn usage_errors_exit_one() {
    let (code, _, err) = invoke(&["analyze", "--value", "x"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("--data"), "{err}");
    let (code, _, _) = invoke(&["thresholds", "--k", "3", "--bogus"]);
    assert_eq!(code, EXIT_VALIDATION);
    let (code, _, _) = invoke(&[]);
    assert_eq!(code, EXIT_VALIDATION);
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("analyze") && out.contains("diagnose"));
}

#[test]
fn missing_file_exits_two() {
    let (code, _, err) = invoke(&[
        "analyze", "--data", "/nonexistent/d.csv", "--value", "x", "--group", "g", "--subject", "s", "--phase", "p",
    ]);
    assert_eq!(code, EXIT_IO);
    assert!(err.contains("/nonexistent/d.csv"));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "id,trt,when,x\ns1,A,pre,1\ns1,A,post,2\ns2,B,pre,1\ns2,B,post,2\ns3,B,mid,1\n").unwrap();
    let mut args: Vec<String> = vec!["analyze".into()];
    args.extend(data_args(&path));
    let (code, _, err) = invoke(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("row 6") && err.contains("mid"), "{err}");
}

#[test]
fn thresholds_prints_critical_value() {
    let (code, out, _) = invoke(&["thresholds", "--k", "2", "--R", "200000", "--seed", "3"]);
    assert_eq!(code, EXIT_OK);
    let c: f64 = out.trim().parse().unwrap();
    assert!((c - 1.96).abs() < 0.02, "{c}");
}

#[test]
fn json_rerenders_to_the_same_text_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let json = dir.path().join("report.json");
    let mut args: Vec<String> = vec!["analyze".into()];
    args.extend(data_args(&data));
    args.extend(["--posthoc", "--R", "50000", "--seed", "4", "--json", json.to_str().unwrap()].map(String::from));
    let (code, text, err) = invoke(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(text.starts_with("Call:\nx ~ trt\n"));
    assert!(text.contains("Post hoc test (p-values)"));

    let doc: ReportDocument = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(render_text(&doc), text);
    assert_eq!(doc.provenance.options.replicates, 50_000);

    let again = rerun(&doc.provenance).unwrap();
    assert_eq!(again, doc);
}

#[test]
fn json_keeps_raw_p_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sep.csv");
    let mut f = fs::File::create(&path).unwrap();
    writeln!(f, "id,trt,when,x").unwrap();
    let mut rng = RngStream::new(5, 0);
    for (g, shift) in [("A", 0.0), ("B", 3.0)] {
        for s in 0..30 {
            for phase in ["pre", "post"] {
                let base = if phase == "post" { shift } else { 0.0 };
                for _ in 0..25 {
                    writeln!(f, "{g}{s},{g},{phase},{}", base + rng.standard_normal()).unwrap();
                }
            }
        }
    }
    drop(f);
    let json = dir.path().join("r.json");
    let mut args: Vec<String> = vec!["analyze".into()];
    args.extend(data_args(&path));
    args.extend(["--json".to_string(), json.to_str().unwrap().to_string()]);
    let (code, text, _) = invoke(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, EXIT_OK);
    assert!(text.contains("< 2.2e-16"));
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let p = value["anova"]["p_value"].as_f64().unwrap();
    assert!(p < 2.2e-16);
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.conf");
    fs::write(
        &config,
        "iterations = 20\nR_posthoc = 2000\n[tiny]\nn_R = 5\nm_N = 6\nm_P = 6\ntarget_aucs = 0.6, 0.7\n[other]\nn_R = 4\nm_N = 5\nm_P = 5\ntarget_aucs = 0.5, 0.5, 0.5\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let (code, out, err) = invoke(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--cell",
        "tiny",
        "--workers",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("tiny") && !out.contains("other"));
    let written = fs::read_to_string(&csv).unwrap();
    assert_eq!(written.lines().count(), 2);
    assert!(written.starts_with("name,k,n_R"));

    let (code, _, _) = invoke(&["simulate", "--config", config.to_str().unwrap(), "--cell", "nope"]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn diagnose_reports_ks_distance() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let mut args: Vec<String> = vec!["diagnose".into()];
    args.extend(data_args(&data));
    args.extend(["--B", "100", "--seed", "2"].map(String::from));
    let (code, out, err) = invoke(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("F(2, 9)"), "{out}");

    args.iter_mut().filter(|a| *a == "100").for_each(|a| *a = "50".into());
    let (code, _, _) = invoke(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, EXIT_VALIDATION);
}

const PRINTED_BLOCK: &str = "\
Call:
Values ~ TrT

             Sum Square DF Mean Square F-Snedecor   p-value
Intra-group       96.02 96        1.00     230.49 < 2.2e-16 ***
Inter-groups     691.62  3      230.54
Total            787.64
---
Signif. codes:  0 `***' 0.001 `**' 0.01 `*' 0.05 `.'  0.1 ` ' 1

Average random-effects standard error of 0.071 (0.075, 0.105, 0.088, 0.016)

----------------------------------------------------------------------

Post hoc test (p-values)

            Treatment 1 Treatment 2 Treatment 3 Treatment 4
Treatment 1                  0.6142      0.9705   < 2.2e-16 ***
Treatment 2                              0.8638   < 2.2e-16 ***
Treatment 3                                       < 2.2e-16 ***
---
Signif. codes:  0 `***' 0.001 `**' 0.01 `*' 0.05 `.'  0.1 ` ' 1
";

/// A document carrying reference summary numbers, used to pin the layout.
fn printed_document() -> ReportDocument {
    let (sse, ssf) = (96.02, 691.62);
    let (f_stat, p_value) = f_statistic(sse, ssf, 96, 3).unwrap();
    let taus = [0.075, 0.105, 0.088, 0.016];
    let names: Vec<String> = (1..=4).map(|i| format!("Treatment {i}")).collect();
    let per_group = names
        .iter()
        .zip(taus)
        .map(|(g, t)| GroupSummary {
            group_id: g.clone(),
            n: 25,
            mean_auc: 0.7,
            tau2: t * t,
            var_of_mean: 1e-3,
            subject_variances: vec![],
        })
        .collect();
    let groups = names
        .iter()
        .zip(taus)
        .map(|(g, t)| GroupReport {
            group_id: g.clone(),
            n: 25,
            mean_auc: 0.7,
            tau: t,
            var_of_mean: 1e-3,
            subjects: vec![],
        })
        .collect();
    let pairs = [(0, 1, 0.6142), (0, 2, 0.9705), (0, 3, 0.0), (1, 2, 0.8638), (1, 3, 0.0), (2, 3, 0.0)]
        .map(|(i, j, p)| PairComparison {
            group_i: names[i].clone(),
            group_j: names[j].clone(),
            delta: 0.0,
            p_value: p,
        })
        .to_vec();
    ReportDocument {
        anova: AnovaTable {
            sse,
            df_sse: 96,
            ssf,
            df_ssf: 3,
            mean_square_intra: sse / 96.0,
            mean_square_inter: ssf / 3.0,
            f_stat,
            p_value,
            per_group,
        },
        groups,
        tau_summary: TauSummary {
            per_group: taus.to_vec(),
            mean: taus.iter().sum::<f64>() / 4.0,
        },
        posthoc: Some(PosthocTable {
            pairs,
            alpha: 0.05,
            critical_value: 2.569,
            replicates: 1_000_000,
        }),
        warnings: vec![],
        provenance: Provenance {
            source: Some(DataSource {
                path: "dt.csv".into(),
                columns: ColumnMap {
                    value: "Values".into(),
                    group: "TrT".into(),
                    subject: "ID".into(),
                    phase: "phase".into(),
                },
                phase_labels: PhaseLabels::default(),
            }),
            options: AnalyzeOptions::default(),
            version: "0".into(),
        },
    }
}

#[test]
fn report_layout_matches_reference_block() {
    let doc = printed_document();
    assert!((doc.anova.f_stat - 230.49).abs() < 0.01);
    let text = render_text(&doc);
    let trimmed: Vec<&str> = text.lines().map(str::trim_end).collect();
    assert_eq!(trimmed, PRINTED_BLOCK.lines().collect::<Vec<_>>());
    // Table rows are padded to a common width, trailing blanks included.
    for line in text.lines().filter(|l| l.starts_with(' ') || l.starts_with("Treatment") || l.starts_with("Total")) {
        assert_eq!(line.len(), 63, "{line:?}");
    }
}

#[test]
fn printed_total_equals_sum_of_rows() {
    let doc = printed_document();
    let text = render_text(&doc);
    let total = text.lines().find(|l| l.starts_with("Total")).unwrap();
    let shown: f64 = total.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((shown - (doc.anova.sse + doc.anova.ssf)).abs() < 0.005);
}
