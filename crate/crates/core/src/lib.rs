//! Collider-bias simulation laboratory, algorithmic core.
//!
//! Everything in this crate is pure computation over owned values and works
//! without `std` (it needs `alloc`). File formats, parallel runners, the CLI
//! and the HTTP service live in the `collider-lab` companion crate.
//!
//! The pieces, bottom-up:
//!
//! * [`graph`]: causal DAGs, path enumeration, d-separation and back-door
//!   audits of proposed adjustment sets.
//! * [`sem`]: linear-Gaussian structural equation models: compilation,
//!   seeded observational and interventional generation, analytic moments
//!   and population regression coefficients.
//! * [`estimators`]: ordinary least squares (Householder QR), logistic
//!   regression (IRLS), partial-regression curves and forest-plot rows.
//! * [`montecarlo`]: replicated collider experiments, coefficient sweeps and
//!   the closed-form collider coefficient.
//! * [`fixtures`]: the canonical confounder, collider and sodium/blood
//!   pressure models and their DAGs.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod estimators;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod montecarlo;
pub mod rng;
pub mod sem;
pub mod stats;

pub use estimators::{
    fit_logistic, fit_ols, forest_rows, partial_curve, EstimationError, ForestRow, IrlsOptions, LogisticFit, OlsFit,
    PartialCurve,
};
pub use graph::{AdjustmentVerdict, Dag, GraphError, NodeRole, Orientation, Path};
pub use montecarlo::{
    analytic_collider_coef, run_mc, run_sweep, sign_flip_boundary, McError, McSummary, ReplicateOutcome, Scenario,
    SweepRow,
};
pub use sem::{
    Assignment, Comparison, CompiledSem, Dataset, ImpliedMoments, Indicator, Noise, ParentTerm, PopulationFit,
    SemError, SemSpec,
};
