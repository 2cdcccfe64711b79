//! JSON instance and report files.
//!
//! Instances carry `k`, a metric block (`matrix`, `graph` or `euclidean`), a
//! constraint block and optional free-form `metadata`. Unknown fields are
//! rejected. Fairness bounds are written as `"p/q"` strings; plain JSON
//! numbers are accepted and kept as floating values. The canonical form of a
//! file is what [`InstanceFile::to_json`] writes, and parsing it back
//! reproduces it byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{
    derive_fair_config, Clustering, Color, ConstraintError, ConstraintSpec, FairFamily, FairRep, Proportion,
};
use crate::metric::{Instance, InstanceError, MetricError, MetricSpace};
use crate::solvers::{Counters, ProfileMode, SolveReport};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid metric: {0}")]
    Metric(#[from] MetricError),
    #[error("invalid constraint: {0}")]
    Constraint(#[from] ConstraintError),
    #[error("invalid instance: {0}")]
    Instance(#[from] InstanceError),
    #[error("report does not match instance: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricInput {
    Matrix { rows: Vec<Vec<f64>> },
    Graph { n: usize, edges: Vec<(usize, usize, f64)> },
    Euclidean { points: Vec<Vec<f64>> },
}

impl MetricInput {
    pub fn build(&self) -> Result<MetricSpace, MetricError> {
        match self {
            MetricInput::Matrix { rows } => MetricSpace::from_matrix(rows),
            MetricInput::Graph { n, edges } => MetricSpace::from_graph(*n, edges),
            MetricInput::Euclidean { points } => MetricSpace::from_points(points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintInput {
    None,
    LowerBound { min_size: usize },
    Balanced { colors: Vec<Color> },
    Fair { groups: Vec<Vec<usize>>, alpha: Vec<Proportion>, beta: Vec<Proportion> },
    EllDiversity { groups: Vec<Vec<usize>>, ell: u32 },
    PairwiseFair { groups: Vec<Vec<usize>>, t: Proportion },
    ExactProportions { groups: Vec<Vec<usize>> },
    BalancedAsFair { groups: Vec<Vec<usize>> },
}

impl ConstraintInput {
    pub fn build(&self, n: usize) -> Result<ConstraintSpec, ConstraintError> {
        let family = |f: FairFamily, groups: &Vec<Vec<usize>>| derive_fair_config(f, groups.clone(), n);
        let spec = match self {
            ConstraintInput::None => ConstraintSpec::Unconstrained,
            ConstraintInput::LowerBound { min_size } => ConstraintSpec::LowerBound { min_size: *min_size },
            ConstraintInput::Balanced { colors } => ConstraintSpec::Balanced { colors: colors.clone() },
            ConstraintInput::Fair { groups, alpha, beta } => ConstraintSpec::FairRep(FairRep {
                groups: groups.clone(),
                alpha: alpha.clone(),
                beta: beta.clone(),
            }),
            ConstraintInput::EllDiversity { groups, ell } => family(FairFamily::EllDiversity { ell: *ell }, groups)?,
            ConstraintInput::PairwiseFair { groups, t } => family(FairFamily::PairwiseFair { t: *t }, groups)?,
            ConstraintInput::ExactProportions { groups } => family(FairFamily::ExactProportions, groups)?,
            ConstraintInput::BalancedAsFair { groups } => family(FairFamily::BalancedAsFair, groups)?,
        };
        spec.validate(n)?;
        Ok(spec)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConstraintInput::None => "none",
            ConstraintInput::LowerBound { .. } => "lower_bound",
            ConstraintInput::Balanced { .. } => "balanced",
            ConstraintInput::Fair { .. } => "fair",
            ConstraintInput::EllDiversity { .. } => "ell_diversity",
            ConstraintInput::PairwiseFair { .. } => "pairwise_fair",
            ConstraintInput::ExactProportions { .. } => "exact_proportions",
            ConstraintInput::BalancedAsFair { .. } => "balanced_as_fair",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub k: usize,
    pub metric: MetricInput,
    pub constraint: ConstraintInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Canonical text: pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files always serialize");
        s.push('\n');
        s
    }

    pub fn to_instance(&self) -> Result<Instance, IoError> {
        let metric = self.metric.build()?;
        let constraint = self.constraint.build(metric.len())?;
        Ok(Instance::new(metric, self.k, constraint)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleComparison {
    pub opt: f64,
    pub ratio: f64,
    pub bound: f64,
}

/// Solver output. Timing is deliberately absent so reports are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub pipeline: String,
    pub profiles: String,
    /// Target slack on the approximation factor, when grid profiles are used.
    pub eps: Option<f64>,
    /// Grid resolution actually enumerated.
    pub grid_eps: Option<f64>,
    pub cost: f64,
    pub centers: Vec<usize>,
    pub assignment: Vec<usize>,
    pub radii: Vec<f64>,
    pub counters: Counters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
}

impl ReportFile {
    pub fn from_solve(inst: &Instance, report: &SolveReport, eps: Option<f64>) -> Self {
        let (profiles, grid_eps) = match report.profiles {
            ProfileMode::Exact => ("exact", None),
            ProfileMode::Grid { eps } => ("grid", Some(eps)),
        };
        ReportFile {
            pipeline: report.pipeline.name().to_string(),
            profiles: profiles.to_string(),
            eps,
            grid_eps,
            cost: report.cost,
            centers: report.best.centers().to_vec(),
            assignment: report.best.assignment().to_vec(),
            radii: report.best.radii(&inst.metric),
            counters: report.counters.clone(),
            oracle: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Recomputes the cost of the stored assignment on `inst`.
    pub fn rescore(&self, inst: &Instance) -> Result<f64, IoError> {
        if self.assignment.len() != inst.n() {
            return Err(IoError::Mismatch(format!(
                "{} assignments for {} points",
                self.assignment.len(),
                inst.n()
            )));
        }
        let c = Clustering::new(self.centers.clone(), self.assignment.clone())?;
        Ok(c.cost(&inst.metric))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}
