//! Path-by-path rendering of back-door audits.

use collider_core::{Dag, GraphError, Path};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// Directed from exposure to outcome.
    Causal,
    /// Starts with an edge into the exposure.
    BackDoor,
    NonCausal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathStatus {
    Open,
    Blocked,
    /// Blocked without adjustment, opened by conditioning on a collider.
    Opened,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Causal => "causal",
            PathKind::BackDoor => "back-door",
            PathKind::NonCausal => "non-causal",
        }
    }
}

impl PathStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PathStatus::Open => "open",
            PathStatus::Blocked => "blocked",
            PathStatus::Opened => "opened",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathReport {
    pub path: String,
    pub nodes: Vec<String>,
    pub kind: PathKind,
    pub status: PathStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub exposure: String,
    pub outcome: String,
    pub adjust: Vec<String>,
    pub valid: bool,
    pub paths: Vec<PathReport>,
    pub open_backdoor_paths: Vec<String>,
    pub opened_collider_paths: Vec<String>,
    pub descendants_of_exposure_in_set: Vec<String>,
}

fn kind(p: &Path) -> PathKind {
    if p.is_directed() {
        PathKind::Causal
    } else if p.is_back_door() {
        PathKind::BackDoor
    } else {
        PathKind::NonCausal
    }
}

pub fn audit<S: AsRef<str>>(
    dag: &Dag,
    exposure: &str,
    outcome: &str,
    adjust: &[S],
) -> Result<VerdictReport, GraphError> {
    let verdict = dag.check_adjustment_set(exposure, outcome, adjust)?;
    let paths = dag
        .enumerate_paths(exposure, outcome)?
        .into_iter()
        .map(|p| {
            let status = if verdict.opened_collider_paths.contains(&p) {
                PathStatus::Opened
            } else if dag.is_path_blocked(&p, adjust)? {
                PathStatus::Blocked
            } else {
                PathStatus::Open
            };
            Ok(PathReport {
                path: p.to_string(),
                nodes: p.nodes().to_vec(),
                kind: kind(&p),
                status,
            })
        })
        .collect::<Result<_, GraphError>>()?;
    let text = |ps: &[Path]| ps.iter().map(ToString::to_string).collect();
    Ok(VerdictReport {
        exposure: exposure.to_string(),
        outcome: outcome.to_string(),
        adjust: adjust.iter().map(|s| s.as_ref().to_string()).collect(),
        valid: verdict.valid,
        paths,
        open_backdoor_paths: text(&verdict.open_backdoor_paths),
        opened_collider_paths: text(&verdict.opened_collider_paths),
        descendants_of_exposure_in_set: verdict.descendants_of_exposure_in_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use collider_core::fixtures;

    #[test]
    fn adjusting_for_proteinuria_opens_the_collider_path() {
        let r = audit(&fixtures::fig3_dag(), "SOD", "SBP", &["AGE", "PRO"]).unwrap();
        assert!(!r.valid);
        let statuses: Vec<(&str, PathKind, PathStatus)> =
            r.paths.iter().map(|p| (p.path.as_str(), p.kind, p.status)).collect();
        assert_eq!(
            statuses,
            [
                ("SOD ← AGE → SBP", PathKind::BackDoor, PathStatus::Blocked),
                ("SOD → PRO ← SBP", PathKind::NonCausal, PathStatus::Opened),
                ("SOD → SBP", PathKind::Causal, PathStatus::Open),
            ]
        );
    }
}
