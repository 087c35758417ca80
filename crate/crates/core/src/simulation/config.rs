//! Scenario config files and simulation result output.
//!
//! A config is a flat key-value text file. Each `[name]` header opens a
//! scenario block; keys given before the first header are defaults shared by
//! every block. `#` starts a comment.
//!
//! ```text
//! sigma_eps = 0.3
//! iterations = 2000
//!
//! [null_25_25_065]
//! n_R = 25
//! m_N = 25
//! m_P = 25
//! target_aucs = 0.65, 0.65, 0.65, 0.65
//! ```
//!
//! `k` defaults to the number of target AUCs.

use std::collections::BTreeMap;
use std::io::Write;

use super::{SimOutcome, SimScenario};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 14] = [
    "name",
    "k",
    "n_R",
    "m_N",
    "m_P",
    "target_aucs",
    "sigma_eps",
    "alpha",
    "iterations",
    "R_posthoc",
    "seed",
    "rejection_rate",
    "posthoc_success_mean",
    "posthoc_success_sd",
];

const KEYS: [&str; 10] = [
    "k",
    "n_r",
    "m_n",
    "m_p",
    "target_aucs",
    "sigma_eps",
    "alpha",
    "iterations",
    "r_posthoc",
    "seed",
];

type Entries = BTreeMap<String, (usize, String)>;

pub fn parse_scenarios(text: &str) -> Result<Vec<SimScenario>> {
    let mut defaults = Entries::new();
    let mut blocks: Vec<(String, usize, Entries)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| config_error(line_no, "malformed block header"))?;
            if blocks.iter().any(|(n, _, _)| n == name) {
                return Err(config_error(line_no, format!("duplicate scenario {name}")));
            }
            blocks.push((name.to_string(), line_no, Entries::new()));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_error(line_no, "expected key = value"))?;
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(config_error(line_no, format!("unknown key {}", key)));
        }
        let target = match blocks.last_mut() {
            Some((_, _, entries)) => entries,
            None => &mut defaults,
        };
        target.insert(key, (line_no, value.trim().to_string()));
    }

    if blocks.is_empty() {
        return Err(config_error(1, "no [scenario] block found"));
    }
    blocks
        .into_iter()
        .map(|(name, line, entries)| {
            let mut merged = defaults.clone();
            merged.extend(entries);
            build_scenario(name, line, &merged)
        })
        .collect()
}

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn build_scenario(name: String, header_line: usize, entries: &Entries) -> Result<SimScenario> {
    fn parse<T: std::str::FromStr>(entries: &Entries, key: &str, header: usize) -> Result<Option<T>> {
        entries
            .get(key)
            .map(|(line, v)| {
                v.parse::<T>()
                    .map_err(|_| config_error(*line, format!("cannot parse {key} = {v}")))
            })
            .transpose()
            .map_err(|e| match e {
                Error::Config { .. } => e,
                other => config_error(header, other.to_string()),
            })
    }
    let require = |key: &str| -> Result<()> {
        if entries.contains_key(key) {
            Ok(())
        } else {
            Err(config_error(header_line, format!("scenario {name} is missing {key}")))
        }
    };

    require("target_aucs")?;
    let (aucs_line, aucs_text) = &entries["target_aucs"];
    let target_aucs = aucs_text
        .split([',', ';', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| config_error(*aucs_line, format!("cannot parse target AUC {t}")))
        })
        .collect::<Result<Vec<f64>>>()?;

    for key in ["n_r", "m_n", "m_p"] {
        require(key)?;
    }
    let mut s = SimScenario::new(
        name,
        target_aucs.clone(),
        parse(entries, "n_r", header_line)?.unwrap_or_default(),
        parse(entries, "m_n", header_line)?.unwrap_or_default(),
        parse(entries, "m_p", header_line)?.unwrap_or_default(),
    );
    s.k = parse(entries, "k", header_line)?.unwrap_or(target_aucs.len());
    if let Some(v) = parse(entries, "sigma_eps", header_line)? {
        s.sigma_eps = v;
    }
    if let Some(v) = parse(entries, "alpha", header_line)? {
        s.alpha = v;
    }
    if let Some(v) = parse(entries, "iterations", header_line)? {
        s.iterations = v;
    }
    if let Some(v) = parse(entries, "r_posthoc", header_line)? {
        s.r_posthoc = v;
    }
    if let Some(v) = parse(entries, "seed", header_line)? {
        s.seed = v;
    }
    s.validate()?;
    Ok(s)
}

/// CSV rows: scenario fields followed by the three outcome columns.
pub fn write_outcomes_csv<W: Write>(out: W, outcomes: &[SimOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for o in outcomes {
        let s = &o.scenario;
        let aucs = s
            .target_aucs
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            s.name.clone(),
            s.k.to_string(),
            s.n_r.to_string(),
            s.m_n.to_string(),
            s.m_p.to_string(),
            aucs,
            s.sigma_eps.to_string(),
            s.alpha.to_string(),
            o.iterations_run.to_string(),
            s.r_posthoc.to_string(),
            s.seed.to_string(),
            o.rejection_rate.to_string(),
            o.posthoc_success_mean.to_string(),
            o.posthoc_success_sd.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Human-readable summary, one line per scenario: AV in percent and PH as
/// mean ± sd.
pub fn outcome_table(outcomes: &[SimOutcome]) -> String {
    let width = outcomes
        .iter()
        .map(|o| o.scenario.name.len())
        .max()
        .unwrap_or(0)
        .max(8);
    let mut out = format!(
        "{:<width$}  {:>4} {:>4} {:>4}  {:>5}  {:>7}  {:>12}  {}\n",
        "Scenario", "n_R", "m_N", "m_P", "sigma", "AV (%)", "PH", "AUCs"
    );
    for o in outcomes {
        let s = &o.scenario;
        let aucs = s
            .target_aucs
            .iter()
            .map(|a| format!("{a:.2}"))
            .collect::<Vec<_>>()
            .join("/");
        out.push_str(&format!(
            "{:<width$}  {:>4} {:>4} {:>4}  {:>5.2}  {:>7.2}  {:>5.2}±{:<5.2}  {}\n",
            s.name,
            s.n_r,
            s.m_n,
            s.m_p,
            s.sigma_eps,
            100.0 * o.rejection_rate,
            o.posthoc_success_mean,
            o.posthoc_success_sd,
            aucs
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# shared settings
sigma_eps = 0.3
iterations = 50
R_posthoc = 1000

[null]
n_R = 25
m_N = 25
m_P = 25
target_aucs = 0.65, 0.65, 0.65, 0.65

[increasing]
n_R = 10
m_N = 25
m_P = 25
sigma_eps = 0.6   # overrides the default
target_aucs = 0.65, 0.7, 0.75, 0.8
seed = 9
";

    #[test]
    fn parses_blocks_with_defaults() {
        let s = parse_scenarios(SAMPLE).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].name, "null");
        assert_eq!(s[0].k, 4);
        assert_eq!(s[0].sigma_eps, 0.3);
        assert_eq!(s[0].iterations, 50);
        assert_eq!(s[0].r_posthoc, 1000);
        assert_eq!(s[1].sigma_eps, 0.6);
        assert_eq!(s[1].seed, 9);
        assert_eq!(s[1].target_aucs, vec![0.65, 0.7, 0.75, 0.8]);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_scenarios("[a]\nn_R = x\nm_N = 3\nm_P = 3\ntarget_aucs = 0.6, 0.7\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let err = parse_scenarios("[a]\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let err = parse_scenarios("[a]\nn_R = 3\nm_N = 3\nm_P = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }), "{err}");
        assert!(parse_scenarios("n_R = 3\n").is_err());
        assert!(parse_scenarios("[a]\n[a]\n").is_err());
    }

    #[test]
    fn rejects_inconsistent_k() {
        let text = "[a]\nk = 3\nn_R = 5\nm_N = 5\nm_P = 5\ntarget_aucs = 0.6, 0.7\n";
        assert!(matches!(parse_scenarios(text), Err(Error::Validation(_))));
    }

    #[test]
    fn csv_layout() {
        let s = parse_scenarios(SAMPLE).unwrap();
        let outcomes: Vec<SimOutcome> = s
            .into_iter()
            .map(|scenario| SimOutcome {
                rejection_rate: 0.05,
                posthoc_success_mean: 5.9,
                posthoc_success_sd: 0.3,
                iterations_run: scenario.iterations,
                scenario,
            })
            .collect();
        let mut buf = Vec::new();
        write_outcomes_csv(&mut buf, &outcomes).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "null,4,25,25,25,0.65;0.65;0.65;0.65,0.3,0.05,50,1000,1,0.05,5.9,0.3"
        );
        assert!(outcome_table(&outcomes).contains("increasing"));
    }
}
