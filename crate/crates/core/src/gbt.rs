//! Gradient-boosted regression trees with quadratic loss, and the
//! cross-validated grid search used to judge whether the linear energy model
//! leaves accuracy on the table.
//!
//! Each boosting round fits one depth-limited tree to the current residuals.
//! Splits are chosen by exact greedy search over midpoints between sorted
//! unique feature values on a row/feature subsample, scoring each candidate by
//! its reduction of the residual sum of squares. Leaf values are then set to
//! the mean residual of every training row reaching the leaf, which keeps the
//! full-sample training loss non-increasing for learning rates in (0, 1].

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{regime_seed, AreReport, EstimationError, FlightObservation, Method};
use crate::segmentation::Regime;

/// Row and feature subsample ratio used for every tree in the grid search.
pub const SUBSAMPLE_RATIO: f64 = 0.75;
/// Boosting rounds per model; no early stopping.
pub const DEFAULT_ROUNDS: usize = 200;
/// Largest mean-ARE gap, in percentage points, at which the linear model counts as adequate.
pub const ADEQUACY_THRESHOLD_PP: f64 = 2.0;

#[derive(Debug, Error)]
pub enum GbtError {
    #[error("need at least 2 samples, got {0}")]
    NoSamples(usize),
    #[error("hyperparameter grid has no points")]
    EmptyGrid,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} targets for {1} feature rows")]
    TargetMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("need at least {folds} flights for {folds}-fold CV, got {flights}")]
    TooFewFlights { flights: usize, folds: usize },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

pub type Result<T> = std::result::Result<T, GbtError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub learning_rate: f64,
    pub max_depth: usize,
    /// Minimum residual sum-of-squares reduction required to keep a split.
    pub gamma: f64,
    pub subsample_rows: f64,
    pub subsample_features: f64,
}

impl GbtParams {
    pub fn new(learning_rate: f64, max_depth: usize, gamma: f64) -> Self {
        Self { learning_rate, max_depth, gamma, subsample_rows: SUBSAMPLE_RATIO, subsample_features: SUBSAMPLE_RATIO }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GbtError::InvalidParams(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {}", self.learning_rate));
        }
        if self.max_depth == 0 {
            return bad("max depth 0".into());
        }
        if !(self.gamma >= 0.0) {
            return bad(format!("gamma {}", self.gamma));
        }
        for r in [self.subsample_rows, self.subsample_features] {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("subsample ratio {r}"));
            }
        }
        Ok(())
    }
}

/// Grid of tuned hyperparameters; subsampling is fixed at 0.75.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub learning_rates: Vec<f64>,
    pub max_depths: Vec<usize>,
    pub gammas: Vec<f64>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self { learning_rates: vec![0.05, 0.1, 0.3], max_depths: vec![2, 4, 6], gammas: vec![0.0, 1.0, 10.0] }
    }
}

impl HyperGrid {
    /// All grid points, depth-major then learning rate then gamma.
    pub fn points(&self) -> Result<Vec<GbtParams>> {
        let mut out = Vec::new();
        for &d in &self.max_depths {
            for &lr in &self.learning_rates {
                for &g in &self.gammas {
                    let p = GbtParams::new(lr, d, g);
                    p.validate()?;
                    out.push(p);
                }
            }
        }
        if out.is_empty() {
            return Err(GbtError::EmptyGrid);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Binary regression tree; node 0 is the root. Rows with
/// `x[feature] < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] < threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub trees: Vec<Tree>,
    pub learning_rate: f64,
    pub base_prediction: f64,
    pub n_features: usize,
    /// Mean squared training error after each round.
    pub train_loss: Vec<f64>,
}

impl GbtModel {
    fn raw_predict(&self, x: &[f64]) -> f64 {
        self.base_prediction + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

/// `base + η·Σ tree outputs`.
pub fn predict_gbt(model: &GbtModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.n_features {
        return Err(GbtError::DimensionMismatch { expected: model.n_features, got: x.len() });
    }
    Ok(model.raw_predict(x))
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    residuals: &'a [f64],
    features: Vec<usize>,
    params: &'a GbtParams,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    /// `bag` drives split search; `all` (a superset) sets leaf values.
    fn grow(&mut self, bag: Vec<usize>, all: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let split = if depth < self.params.max_depth { self.best_split(&bag) } else { None };
        match split {
            Some((feature, threshold)) => {
                let x = self.x;
                let go_left = |i: &usize| x[*i][feature] < threshold;
                let (bag_l, bag_r): (Vec<usize>, Vec<usize>) = bag.into_iter().partition(go_left);
                let (all_l, all_r): (Vec<usize>, Vec<usize>) = all.into_iter().partition(go_left);
                let left = self.grow(bag_l, all_l, depth + 1);
                let right = self.grow(bag_r, all_r, depth + 1);
                self.nodes[id] = Node::Split { feature, threshold, left, right };
            }
            None => {
                let value = all.iter().map(|&i| self.residuals[i]).sum::<f64>() / all.len() as f64;
                self.nodes[id] = Node::Leaf { value };
            }
        }
        id
    }

    fn best_split(&self, rows: &[usize]) -> Option<(usize, f64)> {
        if rows.len() < 2 {
            return None;
        }
        let n = rows.len() as f64;
        let total: f64 = rows.iter().map(|&i| self.residuals[i]).sum();
        let scale: f64 = rows.iter().map(|&i| self.residuals[i].powi(2)).sum();
        let parent = total * total / n;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for &f in &self.features {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left_sum = 0.0;
            for k in 0..sorted.len() - 1 {
                left_sum += self.residuals[sorted[k]];
                let (lo, hi) = (self.x[sorted[k]][f], self.x[sorted[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / nl + right_sum * right_sum / (n - nl) - parent;
                if best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, f, 0.5 * (lo + hi)));
                }
            }
        }
        let (gain, f, threshold) = best?;
        (gain > 1e-12 * scale && gain >= self.params.gamma).then_some((f, threshold))
    }
}

fn subsample_count(n: usize, ratio: f64) -> usize {
    ((n as f64 * ratio).ceil() as usize).clamp(1, n)
}

/// Train a boosted ensemble on row-major `features`.
pub fn train_gbt(features: &[Vec<f64>], targets: &[f64], params: &GbtParams, rounds: usize, seed: u64) -> Result<GbtModel> {
    params.validate()?;
    let n = features.len();
    if n < 2 {
        return Err(GbtError::NoSamples(n));
    }
    if targets.len() != n {
        return Err(GbtError::TargetMismatch(targets.len(), n));
    }
    if rounds == 0 {
        return Err(GbtError::InvalidParams("rounds must be at least 1".into()));
    }
    let p = features[0].len();
    if let Some(row) = features.iter().find(|r| r.len() != p) {
        return Err(GbtError::DimensionMismatch { expected: p, got: row.len() });
    }

    let base = targets.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(rounds);
    let mut train_loss = Vec::with_capacity(rounds);
    let all_rows: Vec<usize> = (0..n).collect();
    let all_features: Vec<usize> = (0..p).collect();
    let n_rows = subsample_count(n, params.subsample_rows);
    let n_feats = subsample_count(p, params.subsample_features);

    for round in 0..rounds {
        for i in 0..n {
            residuals[i] = targets[i] - pred[i];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(round as u64);
        let mut bag: Vec<usize> = all_rows.choose_multiple(&mut rng, n_rows).copied().collect();
        bag.sort_unstable();
        let mut feats: Vec<usize> = all_features.choose_multiple(&mut rng, n_feats).copied().collect();
        feats.sort_unstable();

        let mut builder = TreeBuilder { x: features, residuals: &residuals, features: feats, params, nodes: Vec::new() };
        builder.grow(bag, all_rows.clone(), 0);
        let tree = Tree { nodes: builder.nodes };
        for i in 0..n {
            pred[i] += params.learning_rate * tree.predict(&features[i]);
        }
        trees.push(tree);
        let mse = targets.iter().zip(&pred).map(|(t, p)| (t - p).powi(2)).sum::<f64>() / n as f64;
        train_loss.push(mse);
    }
    Ok(GbtModel { trees, learning_rate: params.learning_rate, base_prediction: base, n_features: p, train_loss })
}

/// Flight-aggregate features available to the boosted trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    InducedPower,
    TotalMass,
    TargetSpeed,
    TargetAltitude,
    RegimeDuration,
    MeanWindSpeed,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::InducedPower,
        Feature::TotalMass,
        Feature::TargetSpeed,
        Feature::TargetAltitude,
        Feature::RegimeDuration,
        Feature::MeanWindSpeed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::InducedPower => "induced_power",
            Feature::TotalMass => "total_mass",
            Feature::TargetSpeed => "target_speed",
            Feature::TargetAltitude => "target_altitude",
            Feature::RegimeDuration => "regime_duration",
            Feature::MeanWindSpeed => "mean_wind_speed",
        }
    }

    fn value(self, flight: &FlightObservation, regime: Regime) -> f64 {
        let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
        match self {
            Feature::InducedPower => flight.p_induced,
            Feature::TotalMass => flight.total_mass,
            Feature::TargetSpeed => finite(flight.target_speed),
            Feature::TargetAltitude => finite(flight.target_altitude),
            Feature::RegimeDuration => flight.regime(regime).duration,
            Feature::MeanWindSpeed => finite(flight.mean_wind_speed),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = GbtError;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL.into_iter().find(|f| f.name() == s.trim()).ok_or_else(|| GbtError::UnknownFeature(s.to_string()))
    }
}

/// Ordered feature selection. Defaults to all six features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet(pub Vec<Feature>);

impl Default for FeatureSet {
    fn default() -> Self {
        Self(Feature::ALL.to_vec())
    }
}

impl FromStr for FeatureSet {
    type Err = GbtError;

    fn from_str(s: &str) -> Result<Self> {
        let features: Vec<Feature> = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
        if features.is_empty() {
            return Err(GbtError::UnknownFeature(s.to_string()));
        }
        Ok(Self(features))
    }
}

impl FeatureSet {
    pub fn row(&self, flight: &FlightObservation, regime: Regime) -> Vec<f64> {
        self.0.iter().map(|f| f.value(flight, regime)).collect()
    }
}

/// One boosted model per regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeGbt {
    pub features: FeatureSet,
    pub params: GbtParams,
    /// Indexed by [`Regime::index`].
    pub models: Vec<GbtModel>,
}

impl RegimeGbt {
    /// Σ over regimes of predicted mean power × regime duration.
    pub fn estimate_flight_energy(&self, flight: &FlightObservation) -> f64 {
        Regime::ALL
            .iter()
            .map(|&r| self.models[r.index()].raw_predict(&self.features.row(flight, r)) * flight.regime(r).duration)
            .sum()
    }
}

/// Train one ensemble per regime, targets being regime mean power.
pub fn train_regime_gbts(
    flights: &[FlightObservation],
    params: &GbtParams,
    rounds: usize,
    seed: u64,
    features: &FeatureSet,
) -> Result<RegimeGbt> {
    let mut models = Vec::with_capacity(3);
    for regime in Regime::ALL {
        let x: Vec<Vec<f64>> = flights.iter().map(|f| features.row(f, regime)).collect();
        let y: Vec<f64> = flights.iter().map(|f| f.regime(regime).mean_power).collect();
        models.push(train_gbt(&x, &y, params, rounds, regime_seed(seed, regime))?);
    }
    Ok(RegimeGbt { features: features.clone(), params: *params, models })
}

/// Flight-level ARE of boosted-tree energy estimates.
pub fn evaluate_gbt(test: &[FlightObservation], model: &RegimeGbt) -> Result<AreReport> {
    let estimates: Vec<(u32, f64, f64)> =
        test.iter().map(|f| (f.flight_id, f.measured_energy, model.estimate_flight_energy(f))).collect();
    Ok(AreReport::from_estimates(Method::BoostedTrees, &estimates)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub grid_point: usize,
    pub fold: usize,
    pub are: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub points: Vec<GbtParams>,
    /// Mean flight-level ARE of each held-out fold, per grid point.
    pub table: Vec<CvCell>,
    /// Mean over folds, per grid point.
    pub mean_are: Vec<f64>,
    pub best_index: usize,
    pub best: GbtParams,
}

/// Assign flights to `folds` folds after a seeded shuffle.
pub fn assign_folds(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }
    fold_of
}

/// K-fold grid search on flight-level ARE. Ties go to the smaller depth,
/// then the smaller learning rate, then the smaller gamma.
pub fn cv_grid_search(
    flights: &[FlightObservation],
    grid: &HyperGrid,
    folds: usize,
    rounds: usize,
    seed: u64,
    features: &FeatureSet,
) -> Result<CvResult> {
    let points = grid.points()?;
    if folds < 2 || flights.len() < folds {
        return Err(GbtError::TooFewFlights { flights: flights.len(), folds });
    }
    let fold_of = assign_folds(flights.len(), folds, seed);
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|g| (0..folds).map(move |k| (g, k))).collect();
    let table: Vec<CvCell> = jobs
        .par_iter()
        .map(|&(g, k)| {
            let train: Vec<FlightObservation> =
                flights.iter().zip(&fold_of).filter(|(_, &f)| f != k).map(|(o, _)| o.clone()).collect();
            let held: Vec<FlightObservation> =
                flights.iter().zip(&fold_of).filter(|(_, &f)| f == k).map(|(o, _)| o.clone()).collect();
            let model = train_regime_gbts(&train, &points[g], rounds, seed, features)?;
            let report = evaluate_gbt(&held, &model)?;
            Ok(CvCell { grid_point: g, fold: k, are: report.mean })
        })
        .collect::<Result<_>>()?;

    let mean_are: Vec<f64> = (0..points.len())
        .map(|g| table.iter().filter(|c| c.grid_point == g).map(|c| c.are).sum::<f64>() / folds as f64)
        .collect();
    let best_index = (0..points.len())
        .min_by(|&a, &b| {
            mean_are[a]
                .total_cmp(&mean_are[b])
                .then(points[a].max_depth.cmp(&points[b].max_depth))
                .then(points[a].learning_rate.total_cmp(&points[b].learning_rate))
                .then(points[a].gamma.total_cmp(&points[b].gamma))
        })
        .expect("grid is nonempty");
    Ok(CvResult { best: points[best_index], points, table, mean_are, best_index })
}

/// Outcome of comparing the linear model against the boosted baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adequacy {
    pub linear_mean_are: f64,
    pub gbt_mean_are: f64,
    /// |difference| in percentage points.
    pub gap_pp: f64,
    pub linear_adequate: bool,
}

pub fn adequacy(linear: &AreReport, gbt: &AreReport) -> Adequacy {
    let gap_pp = 100.0 * (linear.mean - gbt.mean).abs();
    Adequacy {
        linear_mean_are: linear.mean,
        gbt_mean_are: gbt.mean,
        gap_pp,
        linear_adequate: gap_pp <= ADEQUACY_THRESHOLD_PP,
    }
}
