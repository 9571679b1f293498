//! Canonical models and graphs.
//!
//! Variable names follow the data-generating code they reproduce: `W`, `A`,
//! `Y`, `C` for the teaching examples and `Age_years`, `Sodium_gr`,
//! `sbp_in_mmHg`, `hypertension`, `Proteinuria_in_mg` for the sodium and
//! blood pressure example. The DAG fixtures use the short labels `AGE`,
//! `SOD`, `SBP`, `PRO`.

use crate::graph::Dag;
use crate::sem::{Comparison, CompiledSem, Noise, SemSpec};

pub const AGE: &str = "Age_years";
pub const SODIUM: &str = "Sodium_gr";
pub const SBP: &str = "sbp_in_mmHg";
pub const HYPERTENSION: &str = "hypertension";
pub const PROTEINURIA: &str = "Proteinuria_in_mg";

/// Blood pressure cutoff for the hypertension indicator (strict `>`).
pub const HYPERTENSION_CUTOFF: f64 = 140.0;

/// `W → A`, `W → Y`, `A → Y` with coefficients 0.5, 0.4 and 0.3.
pub fn confounder_spec() -> SemSpec {
    SemSpec::new()
        .assign("W", 0.0, &[], Noise::STANDARD)
        .assign("A", 0.0, &[("W", 0.5)], Noise::STANDARD)
        .assign("Y", 0.0, &[("A", 0.3), ("W", 0.4)], Noise::STANDARD)
}

/// `A → Y` (0.3), `A → C` (1.2), `Y → C` (0.9).
pub fn collider_spec() -> SemSpec {
    SemSpec::new()
        .assign("A", 0.0, &[], Noise::STANDARD)
        .assign("Y", 0.0, &[("A", 0.3)], Noise::STANDARD)
        .assign("C", 0.0, &[("A", 1.2), ("Y", 0.9)], Noise::STANDARD)
}

/// Sodium/blood-pressure model with configurable effect sizes:
///
/// ```text
/// Age_years         ~ N(65, 5²)
/// Sodium_gr         = Age_years / 18 + N(0, 1)
/// sbp_in_mmHg       = beta1·Sodium_gr + beta2·Age_years + N(0, 1)
/// hypertension      = 1{sbp_in_mmHg > 140}
/// Proteinuria_in_mg = alpha2·sbp_in_mmHg + alpha1·Sodium_gr + N(0, 1)
/// ```
pub fn sodium_spec(beta1: f64, beta2: f64, alpha1: f64, alpha2: f64) -> SemSpec {
    SemSpec::new()
        .assign(AGE, 0.0, &[], Noise::new(65.0, 5.0))
        .assign(SODIUM, 0.0, &[(AGE, 1.0 / 18.0)], Noise::STANDARD)
        .assign(SBP, 0.0, &[(SODIUM, beta1), (AGE, beta2)], Noise::STANDARD)
        .assign(PROTEINURIA, 0.0, &[(SBP, alpha2), (SODIUM, alpha1)], Noise::STANDARD)
        .indicator(HYPERTENSION, SBP, HYPERTENSION_CUTOFF, Comparison::Greater)
}

pub fn confounder() -> CompiledSem {
    confounder_spec().compile().expect("confounder fixture is valid")
}

pub fn collider() -> CompiledSem {
    collider_spec().compile().expect("collider fixture is valid")
}

/// The reference parameterisation: effects 1.05 and 2.00, collider
/// coefficients 2.8 (sodium) and 2.0 (blood pressure).
pub fn sodium() -> CompiledSem {
    sodium_with(1.05, 2.0, 2.8, 2.0)
}

pub fn sodium_with(beta1: f64, beta2: f64, alpha1: f64, alpha2: f64) -> CompiledSem {
    sodium_spec(beta1, beta2, alpha1, alpha2)
        .compile()
        .expect("finite coefficients")
}

/// Confounding: `A ← W → Y`, `A → Y`.
pub fn fig1a_dag() -> Dag {
    Dag::new(["W", "A", "Y"], [("W", "A"), ("W", "Y"), ("A", "Y")]).expect("valid fixture")
}

/// Collider: `A → C ← Y`, `A → Y`.
pub fn fig1b_dag() -> Dag {
    Dag::new(["A", "C", "Y"], [("A", "C"), ("Y", "C"), ("A", "Y")]).expect("valid fixture")
}

/// M-bias: `A ← W1 → C ← W2 → Y`, `A → Y`.
pub fn fig1c_dag() -> Dag {
    Dag::new(
        ["W1", "W2", "A", "C", "Y"],
        [("W1", "A"), ("W1", "C"), ("W2", "C"), ("W2", "Y"), ("A", "Y")],
    )
    .expect("valid fixture")
}

/// Sodium example: age confounds, proteinuria is a collider.
pub fn fig3_dag() -> Dag {
    Dag::new(
        ["AGE", "SOD", "SBP", "PRO"],
        [
            ("AGE", "SOD"),
            ("AGE", "SBP"),
            ("SOD", "SBP"),
            ("SOD", "PRO"),
            ("SBP", "PRO"),
        ],
    )
    .expect("valid fixture")
}
