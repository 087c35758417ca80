//! C ABI over the `aovauc` library.
//!
//! Every fallible function returns an [`AovStatus`]. On failure, a
//! description is available from [`aov_last_error_message`] on the same
//! thread until the next call into the library. Objects are exposed as
//! opaque handles and must be released with their `_free` function; strings
//! returned by the library are released with [`aov_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use aovauc::cli::{
    analyze, load_csv, render_text, AnalyzeOptions, ColumnMap, DataSource, Dataset, PhaseLabels,
    Preprocessing, ReportDocument,
};
use aovauc::posthoc::critical_value;
use aovauc::simulation::{run_scenario, SimScenario};
use aovauc::{empirical_auc, subject_auc_variance, Error, PairedSample};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AovStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Io = 4,
    Utf8 = 5,
    Panic = 6,
}

/// A collection of subjects under construction.
pub struct AovDataset {
    subjects: Vec<PairedSample>,
    source: Option<DataSource>,
}

/// The result of [`aov_analyze`].
pub struct AovReport {
    doc: ReportDocument,
}

struct Failure {
    status: AovStatus,
    message: String,
}

impl Failure {
    fn new(status: AovStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_io() {
            AovStatus::Io
        } else {
            match e {
                Error::Domain(_) | Error::EmptySample | Error::NonFinite => AovStatus::InvalidArgument,
                _ => AovStatus::Validation,
            }
        };
        Failure::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AovStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AovStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {message}"));
            AovStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller guarantees non-null pointers are valid for reads.
    unsafe { p.as_ref() }.ok_or_else(|| Failure::new(AovStatus::NullPointer, format!("{name} is null")))
}

fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller guarantees non-null pointers are valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| Failure::new(AovStatus::NullPointer, format!("{name} is null")))
}

fn string_arg(p: *const c_char, name: &str) -> Result<String, Failure> {
    if p.is_null() {
        return Err(Failure::new(AovStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: non-null and, per the contract, NUL-terminated.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure::new(AovStatus::Utf8, format!("{name} is not valid UTF-8")))
}

fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(AovStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: non-null and, per the contract, valid for `len` reads.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn into_c_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let out = out_ptr(out, "out")?;
    let c = CString::new(s).map_err(|_| Failure::new(AovStatus::Utf8, "output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn aov_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn aov_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn aov_dataset_new() -> *mut AovDataset {
    Box::into_raw(Box::new(AovDataset {
        subjects: Vec::new(),
        source: None,
    }))
}

/// # Safety
/// `dataset` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn aov_dataset_free(dataset: *mut AovDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Appends one subject. `pre` and `post` must each hold at least one value.
///
/// # Safety
/// Pointers must be valid; `pre`/`post` must hold `m_pre`/`m_post` doubles.
#[no_mangle]
pub unsafe extern "C" fn aov_dataset_add_subject(
    dataset: *mut AovDataset,
    subject_id: *const c_char,
    group_id: *const c_char,
    pre: *const f64,
    m_pre: usize,
    post: *const f64,
    m_post: usize,
) -> AovStatus {
    guard(|| {
        let ds = out_ptr(dataset, "dataset")?;
        let subject = string_arg(subject_id, "subject_id")?;
        let group = string_arg(group_id, "group_id")?;
        let pre = slice_arg(pre, m_pre, "pre")?.to_vec();
        let post = slice_arg(post, m_post, "post")?.to_vec();
        if let Some(existing) = ds.subjects.iter().find(|s| s.subject_id == subject) {
            return Err(Failure::new(
                AovStatus::Validation,
                format!("subject {subject} already added under group {}", existing.group_id),
            ));
        }
        ds.subjects.push(PairedSample::new(subject, group, pre, post)?);
        Ok(())
    })
}

/// Number of subjects, or 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aov_dataset_len(dataset: *const AovDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.subjects.len())
}

/// Loads a long-format CSV into a new dataset written to `out`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_dataset_load_csv(
    path: *const c_char,
    value_column: *const c_char,
    group_column: *const c_char,
    subject_column: *const c_char,
    phase_column: *const c_char,
    pre_label: *const c_char,
    post_label: *const c_char,
    out: *mut *mut AovDataset,
) -> AovStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let columns = ColumnMap {
            value: string_arg(value_column, "value_column")?,
            group: string_arg(group_column, "group_column")?,
            subject: string_arg(subject_column, "subject_column")?,
            phase: string_arg(phase_column, "phase_column")?,
        };
        let labels = PhaseLabels {
            pre: string_arg(pre_label, "pre_label")?,
            post: string_arg(post_label, "post_label")?,
        };
        let path = PathBuf::from(string_arg(path, "path")?);
        let ds = load_csv(&path, &columns, &labels)?;
        *out = Box::into_raw(Box::new(AovDataset {
            subjects: ds.subjects().to_vec(),
            source: ds.source().cloned(),
        }));
        Ok(())
    })
}

/// Runs the test, and the post hoc comparisons when `posthoc` is true.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn aov_analyze(
    dataset: *const AovDataset,
    posthoc: bool,
    alpha: f64,
    replicates: usize,
    seed: u64,
    winsorize: bool,
    standardize: bool,
    out: *mut *mut AovReport,
) -> AovStatus {
    guard(|| {
        let ds = non_null(dataset, "dataset")?;
        let out = out_ptr(out, "out")?;
        let mut dataset = Dataset::new(ds.subjects.clone())?;
        if let Some(source) = &ds.source {
            dataset = dataset.with_source(source.clone());
        }
        let options = AnalyzeOptions {
            posthoc,
            alpha,
            replicates,
            seed,
            preprocessing: Preprocessing {
                winsorize,
                standardize,
            },
        };
        let doc = analyze(&dataset, &options)?;
        *out = Box::into_raw(Box::new(AovReport { doc }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn aov_report_free(report: *mut AovReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// F statistic and its p-value.
///
/// # Safety
/// `report` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_report_f_test(
    report: *const AovReport,
    f_stat: *mut f64,
    p_value: *mut f64,
) -> AovStatus {
    guard(|| {
        let r = non_null(report, "report")?;
        *out_ptr(f_stat, "f_stat")? = r.doc.anova.f_stat;
        *out_ptr(p_value, "p_value")? = r.doc.anova.p_value;
        Ok(())
    })
}

/// Intra- and inter-group sums of squares with their degrees of freedom.
///
/// # Safety
/// `report` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_report_sums_of_squares(
    report: *const AovReport,
    sse: *mut f64,
    df_sse: *mut usize,
    ssf: *mut f64,
    df_ssf: *mut usize,
) -> AovStatus {
    guard(|| {
        let a = &non_null(report, "report")?.doc.anova;
        *out_ptr(sse, "sse")? = a.sse;
        *out_ptr(df_sse, "df_sse")? = a.df_sse;
        *out_ptr(ssf, "ssf")? = a.ssf;
        *out_ptr(df_ssf, "df_ssf")? = a.df_ssf;
        Ok(())
    })
}

/// Number of groups, or 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aov_report_group_count(report: *const AovReport) -> usize {
    report.as_ref().map_or(0, |r| r.doc.groups.len())
}

/// Mean AUC and random-effects standard error of group `index` (sorted
/// label order).
///
/// # Safety
/// `report` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_report_group(
    report: *const AovReport,
    index: usize,
    mean_auc: *mut f64,
    tau: *mut f64,
) -> AovStatus {
    guard(|| {
        let r = non_null(report, "report")?;
        let g = r.doc.groups.get(index).ok_or_else(|| {
            Failure::new(AovStatus::InvalidArgument, format!("group index {index} out of range"))
        })?;
        *out_ptr(mean_auc, "mean_auc")? = g.mean_auc;
        *out_ptr(tau, "tau")? = g.tau;
        Ok(())
    })
}

/// Post hoc p-value for groups `i` and `j`; fails with `Validation` when the
/// report was produced without post hoc comparisons.
///
/// # Safety
/// `report` must be a live handle; `p_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_report_posthoc_pvalue(
    report: *const AovReport,
    i: usize,
    j: usize,
    p_value: *mut f64,
) -> AovStatus {
    guard(|| {
        let doc = &non_null(report, "report")?.doc;
        let table = doc
            .posthoc
            .as_ref()
            .ok_or_else(|| Failure::new(AovStatus::Validation, "report has no post hoc table"))?;
        let label = |idx: usize| {
            doc.groups.get(idx).map(|g| g.group_id.as_str()).ok_or_else(|| {
                Failure::new(AovStatus::InvalidArgument, format!("group index {idx} out of range"))
            })
        };
        let (a, b) = (label(i)?, label(j)?);
        let pair = table
            .pair(a, b)
            .ok_or_else(|| Failure::new(AovStatus::InvalidArgument, "a group is not compared with itself"))?;
        *out_ptr(p_value, "p_value")? = pair.p_value;
        Ok(())
    })
}

/// Text report; free the result with [`aov_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_report_to_text(report: *const AovReport, out: *mut *mut c_char) -> AovStatus {
    guard(|| into_c_string(render_text(&non_null(report, "report")?.doc), out))
}

/// JSON document; free the result with [`aov_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_report_to_json(report: *const AovReport, out: *mut *mut c_char) -> AovStatus {
    guard(|| {
        let json = serde_json::to_string(&non_null(report, "report")?.doc).map_err(Error::from)?;
        into_c_string(json, out)
    })
}

fn paired(pre: *const f64, m_pre: usize, post: *const f64, m_post: usize) -> Result<PairedSample, Failure> {
    let pre = slice_arg(pre, m_pre, "pre")?.to_vec();
    let post = slice_arg(post, m_post, "post")?.to_vec();
    Ok(PairedSample::new("", "", pre, post)?)
}

/// Empirical AUC of one subject.
///
/// # Safety
/// `pre`/`post` must hold `m_pre`/`m_post` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_empirical_auc(
    pre: *const f64,
    m_pre: usize,
    post: *const f64,
    m_post: usize,
    out: *mut f64,
) -> AovStatus {
    guard(|| {
        *out_ptr(out, "out")? = empirical_auc(&paired(pre, m_pre, post, m_post)?);
        Ok(())
    })
}

/// Plug-in variance of one subject's empirical AUC.
///
/// # Safety
/// `pre`/`post` must hold `m_pre`/`m_post` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_subject_auc_variance(
    pre: *const f64,
    m_pre: usize,
    post: *const f64,
    m_post: usize,
    out: *mut f64,
) -> AovStatus {
    guard(|| {
        *out_ptr(out, "out")? = subject_auc_variance(&paired(pre, m_pre, post, m_post)?);
        Ok(())
    })
}

/// Upper tail `P(F > x)` of the F law with `d1`, `d2` degrees of freedom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_f_survival(x: f64, d1: f64, d2: f64, out: *mut f64) -> AovStatus {
    guard(|| {
        *out_ptr(out, "out")? = aovauc::numerics::f_survival(x, d1, d2)?;
        Ok(())
    })
}

/// Post hoc critical value for `k` groups.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aov_critical_value(
    k: usize,
    alpha: f64,
    replicates: usize,
    seed: u64,
    out: *mut f64,
) -> AovStatus {
    guard(|| {
        *out_ptr(out, "out")? = critical_value(k, alpha, replicates, seed)?;
        Ok(())
    })
}

/// Summary of one simulated scenario.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AovSimResult {
    pub rejection_rate: f64,
    pub posthoc_success_mean: f64,
    pub posthoc_success_sd: f64,
}

/// Runs one simulation scenario with `k = n_aucs` treatments.
///
/// # Safety
/// `target_aucs` must hold `n_aucs` doubles; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn aov_run_scenario(
    target_aucs: *const f64,
    n_aucs: usize,
    n_r: usize,
    m_n: usize,
    m_p: usize,
    sigma_eps: f64,
    alpha: f64,
    iterations: usize,
    r_posthoc: usize,
    seed: u64,
    out: *mut AovSimResult,
) -> AovStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let aucs = slice_arg(target_aucs, n_aucs, "target_aucs")?.to_vec();
        let mut s = SimScenario::new("ffi", aucs, n_r, m_n, m_p);
        s.sigma_eps = sigma_eps;
        s.alpha = alpha;
        s.iterations = iterations;
        s.r_posthoc = r_posthoc;
        s.seed = seed;
        let o = run_scenario(&s)?;
        *out = AovSimResult {
            rejection_rate: o.rejection_rate,
            posthoc_success_mean: o.posthoc_success_mean,
            posthoc_success_sd: o.posthoc_success_sd,
        };
        Ok(())
    })
}
