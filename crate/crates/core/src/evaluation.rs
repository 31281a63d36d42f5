//! Threshold-based group recovery and the two error rates that score it.
//!
//! A similarity network thresholded at `T` keeps the pairs whose similarity
//! is strictly greater than `T`. Against a planted partition:
//!
//! * `eps_between` is the percentage of between-group pairs that are linked,
//! * `eps_within` is the percentage of within-group pairs that are not.

use std::collections::HashMap;

use ndarray::Array2;
use rayon::prelude::*;
use thiserror::Error;

use crate::bipartite::{IsolatedNodes, NetworkError, Orientation, SimilarityNetwork};
use crate::generator::{self, GeneratorConfig, GeneratorError, Partition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),
    #[error("thresholds must be strictly increasing (at index {0})")]
    UnsortedThresholds(usize),
    #[error("threshold grid is empty")]
    EmptyGrid,
    #[error("grid step {0} must lie in (0, 1]")]
    GridStep(f64),
    #[error("node {0:?} has no group in the ground truth")]
    MissingNode(String),
    #[error("ground truth has {truth} nodes but the graph has {graph}")]
    NodeCount { truth: usize, graph: usize },
    #[error("ensemble needs at least one realization")]
    NoRealizations,
    #[error("all {0} realizations were skipped")]
    AllSkipped(usize),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdedGraph {
    pub labels: Vec<String>,
    pub adjacency: Array2<u8>,
    pub threshold: f64,
}

impl ThresholdedGraph {
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[[i, j]] == 1
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&v| v == 1).count() / 2
    }
}

fn check_threshold(t: f64) -> Result<(), EvaluationError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(EvaluationError::Threshold(t))
    }
}

/// Keeps the off-diagonal pairs whose similarity is strictly above `t`.
pub fn threshold_graph(
    sim: &SimilarityNetwork,
    t: f64,
) -> Result<ThresholdedGraph, EvaluationError> {
    check_threshold(t)?;
    let adjacency = Array2::from_shape_fn(sim.matrix.dim(), |(i, j)| {
        u8::from(i != j && sim.matrix[[i, j]] > t)
    });
    Ok(ThresholdedGraph {
        labels: sim.labels.clone(),
        adjacency,
        threshold: t,
    })
}

/// Error percentages, both in `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub eps_between: f64,
    pub eps_within: f64,
}

impl ErrorPair {
    pub fn worst(&self) -> f64 {
        self.eps_between.max(self.eps_within)
    }
}

/// Group index for each label, in label order.
fn groups_for(labels: &[String], truth: &Partition) -> Result<Vec<usize>, EvaluationError> {
    if labels.len() != truth.len() {
        return Err(EvaluationError::NodeCount {
            truth: truth.len(),
            graph: labels.len(),
        });
    }
    let lookup: HashMap<&str, usize> = truth
        .labels
        .iter()
        .map(String::as_str)
        .zip(truth.groups.iter().copied())
        .collect();
    labels
        .iter()
        .map(|l| {
            lookup
                .get(l.as_str())
                .copied()
                .ok_or_else(|| EvaluationError::MissingNode(l.clone()))
        })
        .collect()
}

/// Pair counts for one thresholded graph.
#[derive(Debug, Default, Clone, Copy)]
struct PairCounts {
    between: usize,
    between_linked: usize,
    within: usize,
    within_missing: usize,
}

impl PairCounts {
    fn errors(&self) -> ErrorPair {
        let pct = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                100.0 * num as f64 / den as f64
            }
        };
        ErrorPair {
            eps_between: pct(self.between_linked, self.between),
            eps_within: pct(self.within_missing, self.within),
        }
    }
}

fn count_pairs(groups: &[usize], linked: impl Fn(usize, usize) -> bool) -> PairCounts {
    let mut c = PairCounts::default();
    for i in 0..groups.len() {
        for j in (i + 1)..groups.len() {
            let edge = linked(i, j);
            if groups[i] == groups[j] {
                c.within += 1;
                c.within_missing += usize::from(!edge);
            } else {
                c.between += 1;
                c.between_linked += usize::from(edge);
            }
        }
    }
    c
}

/// Scores a thresholded graph against the planted groups of its node type.
///
/// When there are no within-group (or no between-group) pairs at all the
/// corresponding error is 0.
pub fn group_errors(g: &ThresholdedGraph, truth: &Partition) -> Result<ErrorPair, EvaluationError> {
    let groups = groups_for(&g.labels, truth)?;
    Ok(count_pairs(&groups, |i, j| g.has_edge(i, j)).errors())
}

/// Default grid `0.00, 0.01, …, 1.00`.
pub fn default_thresholds() -> Vec<f64> {
    threshold_grid(0.01).expect("valid step")
}

/// Grid from 0 to 1 inclusive with the given step. When `1 / step` is an
/// integer `n` the points are `i / n`, so a step of 0.01 yields exactly the
/// decimal values; otherwise `i * step` is used and 1 is appended.
pub fn threshold_grid(step: f64) -> Result<Vec<f64>, EvaluationError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(EvaluationError::GridStep(step));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() < 1e-9 {
        let n = n as usize;
        return Ok((0..=n).map(|i| i as f64 / n as f64).collect());
    }
    let mut grid: Vec<f64> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|&t| t < 1.0)
        .collect();
    grid.push(1.0);
    Ok(grid)
}

fn check_grid(thresholds: &[f64]) -> Result<(), EvaluationError> {
    if thresholds.is_empty() {
        return Err(EvaluationError::EmptyGrid);
    }
    for (i, &t) in thresholds.iter().enumerate() {
        check_threshold(t)?;
        if i > 0 && t <= thresholds[i - 1] {
            return Err(EvaluationError::UnsortedThresholds(i));
        }
    }
    Ok(())
}

/// Errors as a function of the threshold for one similarity network.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub thresholds: Vec<f64>,
    pub points: Vec<ErrorPair>,
    pub orientation: Orientation,
    pub config: Option<GeneratorConfig>,
}

impl ErrorCurve {
    /// Smallest value over the grid of `max(eps_between, eps_within)`, with
    /// the threshold achieving it (first one on ties).
    pub fn best_worst_case(&self) -> (f64, f64) {
        self.thresholds
            .iter()
            .zip(&self.points)
            .map(|(&t, p)| (t, p.worst()))
            .fold((f64::NAN, f64::INFINITY), |best, (t, w)| {
                if w < best.1 {
                    (t, w)
                } else {
                    best
                }
            })
    }

    pub fn is_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].eps_between <= w[0].eps_between && w[1].eps_within >= w[0].eps_within)
    }
}

pub fn error_sweep(
    sim: &SimilarityNetwork,
    truth: &Partition,
    thresholds: &[f64],
) -> Result<ErrorCurve, EvaluationError> {
    check_grid(thresholds)?;
    let groups = groups_for(&sim.labels, truth)?;
    let points = thresholds
        .iter()
        .map(|&t| count_pairs(&groups, |i, j| sim.matrix[[i, j]] > t).errors())
        .collect();
    Ok(ErrorCurve {
        thresholds: thresholds.to_vec(),
        points,
        orientation: sim.orientation,
        config: None,
    })
}

/// Per-threshold mean and standard deviation over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub thresholds: Vec<f64>,
    pub eps_between_mean: Vec<f64>,
    pub eps_between_std: Vec<f64>,
    pub eps_within_mean: Vec<f64>,
    pub eps_within_std: Vec<f64>,
    pub orientation: Orientation,
    pub config: GeneratorConfig,
    /// Seeds of the realizations that contributed, in order.
    pub seeds: Vec<u64>,
    /// Seeds whose network could not be turned into a similarity network.
    pub skipped: Vec<u64>,
    pub curves: Vec<ErrorCurve>,
}

impl EnsembleSummary {
    pub fn n_realizations(&self) -> usize {
        self.curves.len()
    }

    /// Mean over realizations of each curve's [`ErrorCurve::best_worst_case`].
    pub fn mean_best_worst_case(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| c.best_worst_case().1)
            .sum::<f64>()
            / self.curves.len() as f64
    }

    /// Aggregates curves sharing one grid. Standard deviations are population
    /// values (divide by the realization count).
    pub fn from_curves(
        config: GeneratorConfig,
        orientation: Orientation,
        seeds: Vec<u64>,
        skipped: Vec<u64>,
        curves: Vec<ErrorCurve>,
    ) -> Self {
        let thresholds = curves
            .first()
            .map(|c| c.thresholds.clone())
            .unwrap_or_default();
        let n = curves.len() as f64;
        let stats = |f: &dyn Fn(&ErrorPair) -> f64| -> (Vec<f64>, Vec<f64>) {
            (0..thresholds.len())
                .map(|k| {
                    let mean = curves.iter().map(|c| f(&c.points[k])).sum::<f64>() / n;
                    let var = curves
                        .iter()
                        .map(|c| (f(&c.points[k]) - mean).powi(2))
                        .sum::<f64>()
                        / n;
                    (mean, var.sqrt())
                })
                .unzip()
        };
        let (eps_between_mean, eps_between_std) = stats(&|p| p.eps_between);
        let (eps_within_mean, eps_within_std) = stats(&|p| p.eps_within);
        Self {
            thresholds,
            eps_between_mean,
            eps_between_std,
            eps_within_mean,
            eps_within_std,
            orientation,
            config,
            seeds,
            skipped,
            curves,
        }
    }
}

/// One realization: generate, build the similarity network, sweep.
/// `Ok(None)` means the realization had an isolated node and was skipped.
fn realization(
    cfg: &GeneratorConfig,
    orientation: Orientation,
    thresholds: &[f64],
) -> Result<Option<ErrorCurve>, EvaluationError> {
    let (net, truth) = generator::generate(cfg)?;
    let sim = match net.coincidence_network(orientation, IsolatedNodes::Reject) {
        Ok(sim) => sim,
        Err(NetworkError::IsolatedNode { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut curve = error_sweep(&sim, truth.side(orientation.row_side()), thresholds)?;
    curve.config = Some(*cfg);
    Ok(Some(curve))
}

/// Runs `n_realizations` realizations with seeds `cfg.seed + 0 … + n-1` in
/// parallel and aggregates them in seed order.
pub fn ensemble(
    cfg: &GeneratorConfig,
    n_realizations: usize,
    orientation: Orientation,
    thresholds: &[f64],
) -> Result<EnsembleSummary, EvaluationError> {
    if n_realizations == 0 {
        return Err(EvaluationError::NoRealizations);
    }
    cfg.validate()?;
    check_grid(thresholds)?;
    let results: Vec<(u64, Option<ErrorCurve>)> = (0..n_realizations as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            realization(&cfg.with_seed(seed), orientation, thresholds).map(|c| (seed, c))
        })
        .collect::<Result<_, _>>()?;

    let mut seeds = Vec::new();
    let mut skipped = Vec::new();
    let mut curves = Vec::new();
    for (seed, curve) in results {
        match curve {
            Some(c) => {
                seeds.push(seed);
                curves.push(c);
            }
            None => skipped.push(seed),
        }
    }
    if curves.is_empty() {
        return Err(EvaluationError::AllSkipped(skipped.len()));
    }
    Ok(EnsembleSummary::from_curves(
        *cfg,
        orientation,
        seeds,
        skipped,
        curves,
    ))
}
