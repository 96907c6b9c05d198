//! JSON comparison reports and their re-validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::Cost;
use crate::edit::{EditOp, EditScript, Mapping};
use crate::error::{ConfigError, ParseError};
use crate::model::ModelConfig;
use crate::multilevel::ColorAssignment;
use crate::replay::{replay, ReplayError};
use crate::tree::{parse_tree, IndexedTree};

/// Everything needed to reproduce a comparison. Deliberately free of
/// timestamps and timings so that output is byte-identical across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<String>,
    pub rep: String,
    /// Effective model parameters, in the form accepted by the config parser
    /// once spaces are read as line breaks.
    pub model: String,
    pub l: usize,
    pub prune: bool,
    pub tree_a: String,
    pub tree_b: String,
}

/// One pair of trees, the distance between them and how it is realized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub tree_a: String,
    pub tree_b: String,
    pub distance: f64,
    pub distance_units: Cost,
    pub script: Vec<EditOp>,
    pub mapping: Mapping,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub distance: f64,
    pub distance_units: Cost,
    pub script: Vec<EditOp>,
    pub mapping: Mapping,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<ColorAssignment>,
    /// First pass of a multilevel comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse: Option<Comparison>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("tree in report: {0}")]
    Tree(#[from] ParseError),
    #[error("model in report: {0}")]
    Model(#[from] ConfigError),
    #[error("distance {0} disagrees with distance_units {1}")]
    Distance(f64, Cost),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

pub fn model_from_echo(echo: &str) -> Result<ModelConfig, ConfigError> {
    ModelConfig::parse(&echo.replace(' ', "\n"))
}

fn check_one(
    cfg: &ModelConfig,
    tree_a: &str,
    tree_b: &str,
    distance: f64,
    units: Cost,
    script: &[EditOp],
    mapping: &Mapping,
) -> Result<Cost, ReportError> {
    if Cost::from_f64(distance) != units && units.as_f64() != distance {
        return Err(ReportError::Distance(distance, units));
    }
    let model = cfg.build()?;
    let a = IndexedTree::new(parse_tree(tree_a)?);
    let b = IndexedTree::new(parse_tree(tree_b)?);
    let script = EditScript { ops: script.to_vec() };
    Ok(replay(&a, &b, &model, &script, units, Some(mapping))?)
}

/// Parses a report and replays every script it contains against its trees
/// and model. Returns the verified distance.
pub fn verify_report(json: &str) -> Result<Cost, ReportError> {
    let report: Report = serde_json::from_str(json)?;
    let cfg = model_from_echo(&report.meta.model)?;
    if let Some(c) = &report.coarse {
        check_one(
            &cfg,
            &c.tree_a,
            &c.tree_b,
            c.distance,
            c.distance_units,
            &c.script,
            &c.mapping,
        )?;
    }
    check_one(
        &cfg,
        &report.meta.tree_a,
        &report.meta.tree_b,
        report.distance,
        report.distance_units,
        &report.script,
        &report.mapping,
    )
}
