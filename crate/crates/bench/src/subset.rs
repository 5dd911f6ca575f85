//! Learning from every k-subset of the demonstrations and measuring how
//! much of the benchmark each subset solves.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use typegen::execute::{solve, SolveConfig};
use typegen::{learn, Demonstration, PlanningTask, TypeHierarchy};
use typegen_kitchen::KitchenEnv;

use crate::eval::median;
use crate::tasks::{TaskError, TaskSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub k: usize,
    pub demos: Vec<String>,
    pub schemas: usize,
    pub solved: usize,
    pub total: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSummary {
    pub k: usize,
    pub combinations: usize,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Combinations that solve every task.
    pub complete: usize,
}

/// Generalized learning plus imagination on each subset, evaluated on all
/// tasks of `sets`.
pub fn study(
    demos: &[Demonstration],
    sets: &[TaskSet],
    h: &TypeHierarchy,
    ks: impl IntoIterator<Item = usize>,
    cfg: &SolveConfig,
) -> Result<Vec<SubsetRecord>, TaskError> {
    let tasks: Vec<(PlanningTask, KitchenEnv)> =
        sets.iter().flat_map(|s| &s.tasks).map(|t| t.instantiate(h)).collect::<Result<_, _>>()?;
    let cfg = SolveConfig { imagine: true, ..cfg.clone() };
    let combos: Vec<Vec<usize>> = ks
        .into_iter()
        .filter(|k| (1..=demos.len()).contains(k))
        .flat_map(|k| (0..demos.len()).combinations(k))
        .collect();
    Ok(combos
        .par_iter()
        .map(|idx| {
            let subset: Vec<Demonstration> = idx.iter().map(|i| demos[*i].clone()).collect();
            let schemas = learn(&subset, h, true).map(|m| m.schemas).unwrap_or_default();
            let solved = if schemas.is_empty() {
                0
            } else {
                tasks.iter().filter(|(t, env)| solve(t, &schemas, h, &mut env.clone(), &cfg).solved()).count()
            };
            SubsetRecord {
                k: idx.len(),
                demos: subset.iter().map(|d| d.task.clone()).collect(),
                schemas: schemas.len(),
                solved,
                total: tasks.len(),
                fraction: solved as f64 / tasks.len().max(1) as f64,
            }
        })
        .collect())
}

pub fn summarize(records: &[SubsetRecord]) -> Vec<SubsetSummary> {
    let ks: Vec<usize> = records.iter().map(|r| r.k).sorted().dedup().collect();
    ks.into_iter()
        .map(|k| {
            let mut fr: Vec<f64> = records.iter().filter(|r| r.k == k).map(|r| r.fraction).collect();
            SubsetSummary {
                k,
                combinations: fr.len(),
                median: median(&mut fr),
                min: fr.iter().copied().fold(f64::INFINITY, f64::min),
                max: fr.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                complete: records.iter().filter(|r| r.k == k && r.solved == r.total).count(),
            }
        })
        .collect()
}
