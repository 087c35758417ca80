//! ANOVA-type comparison of treatment effects measured as per-subject areas
//! under the ROC curve, with subject-level random effects.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: special functions and seeded sampling.
//! * [`empirical`]: ECDFs, the empirical AUC and its plug-in variance.
//! * [`inference`]: group summaries, the centered pseudoinverse quadratic
//!   forms and the F test.
//! * [`posthoc`]: the simulated maximum-studentized-difference reference law
//!   and pairwise p-values.
//! * [`simulation`]: the Monte Carlo size/power harness.
//! * [`cli`]: CSV ingestion, preprocessing, reports and the command-line app.

pub mod cli;
pub mod empirical;
mod error;
pub mod inference;
pub mod numerics;
pub mod posthoc;
pub mod simulation;

pub use error::{Error, Result};

pub use empirical::{empirical_auc, subject_auc_variance, PairedSample, RealSample};
pub use inference::{anova_auc, AnovaTable, GroupSummary, SubjectEstimate};
pub use numerics::RngStream;
pub use posthoc::{PosthocTable, ReferenceDistribution};
pub use simulation::{run_scenario, SimOutcome, SimScenario};
