//! Long-format CSV ingestion: one measurement per row.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::empirical::PairedSample;
use crate::{Error, Result};

/// Names of the four columns the loader reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub value: String,
    pub group: String,
    pub subject: String,
    pub phase: String,
}

/// Labels used in the phase column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLabels {
    pub pre: String,
    pub post: String,
}

impl Default for PhaseLabels {
    fn default() -> Self {
        Self {
            pre: "pre".into(),
            post: "post".into(),
        }
    }
}

/// Where a dataset was read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSource {
    pub path: PathBuf,
    pub columns: ColumnMap,
    pub phase_labels: PhaseLabels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    subjects: Vec<PairedSample>,
    groups: Vec<String>,
    source: Option<DataSource>,
}

impl Dataset {
    /// Checks that subject ids are unique; group labels are collected sorted.
    pub fn new(subjects: Vec<PairedSample>) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::Validation(vec!["dataset has no subjects".into()]));
        }
        let mut seen: HashMap<&str, &str> = HashMap::new();
        let mut problems = Vec::new();
        for s in &subjects {
            match seen.insert(&s.subject_id, &s.group_id) {
                Some(g) if g != s.group_id => problems.push(format!(
                    "subject in two groups: {} appears under {} and {}",
                    s.subject_id, g, s.group_id
                )),
                Some(_) => problems.push(format!("subject {} listed twice", s.subject_id)),
                None => {}
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let groups: BTreeSet<&str> = subjects.iter().map(|s| s.group_id.as_str()).collect();
        let groups = groups.into_iter().map(String::from).collect();
        Ok(Self {
            subjects,
            groups,
            source: None,
        })
    }

    pub fn with_source(mut self, source: DataSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn subjects(&self) -> &[PairedSample] {
        &self.subjects
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn source(&self) -> Option<&DataSource> {
        self.source.as_ref()
    }
}

struct Pending {
    group: String,
    first_row: u64,
    pre: Vec<f64>,
    post: Vec<f64>,
    conflict_reported: bool,
}

/// Reads a long-format CSV with a header row. Subjects keep their order of
/// first appearance. Every row-level problem is collected before failing.
pub fn load_csv(path: &Path, columns: &ColumnMap, labels: &PhaseLabels) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers()?.clone();

    let mut problems = Vec::new();
    let mut locate = |name: &str| {
        let idx = headers.iter().position(|h| h.trim() == name);
        if idx.is_none() {
            problems.push(format!(
                "missing column {name:?} (header: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ));
        }
        idx
    };
    let (value, group, subject, phase) = (
        locate(&columns.value),
        locate(&columns.group),
        locate(&columns.subject),
        locate(&columns.phase),
    );
    let (Some(value), Some(group), Some(subject), Some(phase)) = (value, group, subject, phase)
    else {
        return Err(Error::Validation(problems));
    };

    let mut order: Vec<String> = Vec::new();
    let mut pending: HashMap<String, Pending> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(i as u64 + 2, |p| p.line());
        let field = |idx: usize| record.get(idx).unwrap_or("").trim();

        let raw = field(value);
        let x = match raw.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            Ok(_) => {
                problems.push(format!("row {row}: non-finite value {raw:?}"));
                None
            }
            Err(_) => {
                problems.push(format!("row {row}: cannot parse {raw:?} as a number"));
                None
            }
        };
        let label = field(phase);
        let is_pre = if label == labels.pre {
            Some(true)
        } else if label == labels.post {
            Some(false)
        } else {
            problems.push(format!(
                "row {row}: unknown phase label {label:?} (allowed: {:?}, {:?})",
                labels.pre, labels.post
            ));
            None
        };
        let subject_id = field(subject);
        let group_id = field(group);
        if subject_id.is_empty() || group_id.is_empty() {
            problems.push(format!("row {row}: empty subject or group"));
            continue;
        }

        let entry = pending.entry(subject_id.to_string()).or_insert_with(|| {
            order.push(subject_id.to_string());
            Pending {
                group: group_id.to_string(),
                first_row: row,
                pre: Vec::new(),
                post: Vec::new(),
                conflict_reported: false,
            }
        });
        if entry.group != group_id {
            if !entry.conflict_reported {
                problems.push(format!(
                    "row {row}: subject in two groups: {subject_id} is under {} (row {}) and {group_id}",
                    entry.group, entry.first_row
                ));
                entry.conflict_reported = true;
            }
            continue;
        }
        match (x, is_pre) {
            (Some(x), Some(true)) => entry.pre.push(x),
            (Some(x), Some(false)) => entry.post.push(x),
            _ => {}
        }
    }

    if order.is_empty() && problems.is_empty() {
        problems.push("no data rows".into());
    }
    let mut subjects = Vec::with_capacity(order.len());
    for id in order {
        let p = pending.remove(&id).expect("every ordered subject is pending");
        if p.conflict_reported {
            continue;
        }
        for (vals, name) in [(&p.pre, &labels.pre), (&p.post, &labels.post)] {
            if vals.is_empty() {
                problems.push(format!(
                    "subject {id} (first seen at row {}) has no {name:?} values",
                    p.first_row
                ));
            }
        }
        if problems.is_empty() {
            subjects.push(PairedSample::new(id, p.group, p.pre, p.post)?);
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }

    Ok(Dataset::new(subjects)?.with_source(DataSource {
        path: path.to_path_buf(),
        columns: columns.clone(),
        phase_labels: labels.clone(),
    }))
}
