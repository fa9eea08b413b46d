//! JSON report written by every subcommand.

use serde::Serialize;

use crate::corona::{CoronaCertificate, CoronaFailure, FailureKind};
use crate::curvature::{CurvatureField, DiskGrid};
use crate::equivalence::Verdict;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Canonical form of the parsed spec file.
    pub input: String,
    pub settings: Settings,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub curvature: Vec<FieldSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<CheckReport>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// The only part of the report that varies between identical runs.
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridReport {
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub phase: f64,
}

impl From<&DiskGrid<f64>> for GridReport {
    fn from(g: &DiskGrid<f64>) -> Self {
        Self { r_max: g.r_max(), n_r: g.n_r(), n_theta: g.n_theta(), phase: g.phase() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub grid: GridReport,
    pub tol: f64,
    pub target_gap: f64,
    pub fd_step: f64,
    pub oracle_degree: usize,
    pub gap_tol: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

impl From<crate::C64> for Point {
    fn from(z: crate::C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureReport {
    pub kind: &'static str,
    pub witness: Point,
    pub value: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub module: &'static str,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub depth: usize,
    pub boxes_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureReport>,
}

impl CertificateReport {
    pub fn from_result(module: &'static str, r: &Result<CoronaCertificate<f64>, CoronaFailure<f64>>) -> Self {
        match r {
            Ok(c) => Self {
                module,
                certified: true,
                epsilon: Some(c.epsilon),
                depth: c.depth,
                boxes_checked: c.boxes_checked,
                lipschitz: Some(c.lipschitz),
                failure: None,
            },
            Err(f) => Self {
                module,
                certified: false,
                epsilon: None,
                depth: f.depth,
                boxes_checked: f.boxes_checked,
                lipschitz: None,
                failure: Some(FailureReport {
                    kind: match f.kind {
                        FailureKind::BelowTarget => "BelowTarget",
                        FailureKind::DepthExceeded => "DepthExceeded",
                    },
                    witness: f.witness.into(),
                    value: f.value,
                    lower_bound: f.lower_bound,
                }),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSummary {
    pub module: &'static str,
    pub points: usize,
    pub min: f64,
    pub max: f64,
    pub provenance: String,
}

impl FieldSummary {
    pub fn new(module: &'static str, field: &CurvatureField<f64>) -> Self {
        Self { module, points: field.values.len(), min: field.min(), max: field.max(), provenance: field.provenance.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub re: f64,
    pub im: f64,
    pub obstruction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub outcome: &'static str,
    pub branch: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_deviation: Option<f64>,
    pub grids: Vec<GridReport>,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
}

impl From<&Verdict<f64>> for VerdictReport {
    fn from(v: &Verdict<f64>) -> Self {
        Self {
            outcome: v.outcome.as_str(),
            branch: v.branch.label(),
            witness: v.witness.map(|w| WitnessReport { re: w.point.re, im: w.point.im, obstruction: w.obstruction }),
            max_deviation: v.max_deviation,
            relative_deviation: v.relative_deviation,
            grids: v.grids.iter().map(GridReport::from).collect(),
            tol: v.tol,
            diagnostics: v.diagnostics.clone(),
        }
    }
}

/// One row of the oracle residual table.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub module: &'static str,
    pub check: &'static str,
    pub samples: usize,
    /// Worst residual over the samples (for `dim_ker`, the worst |dimension − 1|).
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}
