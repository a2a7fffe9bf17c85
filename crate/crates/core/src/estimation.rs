//! Per-regime linear power model `P̄ = b1·P_i + b0`: flight-level train/test
//! split, ordinary least squares, bootstrap standard errors and flight-level
//! absolute relative error.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{induced_power, DroneConfig, Environment, PhysicsError};
use crate::segmentation::{detect_regimes, Regime, SegmentationError, SegmentationParams};
use crate::telemetry::{FlightMeta, FlightRecord, TelemetryError};

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("train count {train} must be smaller than the {total} flights available")]
    TrainCountTooLarge { train: usize, total: usize },
    #[error("flight id {0} listed twice")]
    DuplicateId(u32),
    #[error("{0} grid cells given for {1} flight ids")]
    CellLengthMismatch(usize, usize),
    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),
    #[error("degenerate design: induced power has zero variance")]
    DegenerateDesign,
    #[error("bootstrap needs at least 2 replications, got {0}")]
    TooFewReplications(usize),
    #[error("bootstrap gave up after {0} degenerate redraws")]
    BootstrapExhausted(usize),
    #[error("flight {0} has zero measured energy")]
    ZeroMeasuredEnergy(u32),
    #[error("no model for regime {0}")]
    MissingModel(Regime),
    #[error("no flights to evaluate")]
    NoFlights,
    #[error("cannot read models {path}: {message}")]
    Load { path: String, message: String },
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
}

pub type Result<T> = std::result::Result<T, EstimationError>;

/// One flight's (induced power, observed mean power) pair for a regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub p_induced: f64,
    pub mean_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeModel {
    pub regime: Regime,
    /// Dimensionless slope.
    pub b1: f64,
    /// Intercept, W.
    pub b0: f64,
    pub se_b1: f64,
    pub se_b0: f64,
    pub n_train: usize,
}

/// `b1·P_i + b0`. Small `P_i` can give negative values for the landing model.
pub fn predict_mean_power(model: &RegimeModel, p_induced: f64) -> f64 {
    model.b1 * p_induced + model.b0
}

/// Ordinary least squares of mean power on induced power, one point per flight.
pub fn fit_regime_model(observations: &[Observation], regime: Regime) -> Result<RegimeModel> {
    let (b1, b0) = ols(observations)?;
    Ok(RegimeModel { regime, b1, b0, se_b1: 0.0, se_b0: 0.0, n_train: observations.len() })
}

fn ols(obs: &[Observation]) -> Result<(f64, f64)> {
    let n = obs.len();
    if n < 3 {
        return Err(EstimationError::TooFewObservations(n));
    }
    let x0 = obs[0].p_induced;
    if obs.iter().all(|o| o.p_induced == x0) {
        return Err(EstimationError::DegenerateDesign);
    }
    let nf = n as f64;
    let xm = obs.iter().map(|o| o.p_induced).sum::<f64>() / nf;
    let ym = obs.iter().map(|o| o.mean_power).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for o in obs {
        let dx = o.p_induced - xm;
        sxx += dx * dx;
        sxy += dx * (o.mean_power - ym);
    }
    if !(sxx > 0.0) {
        return Err(EstimationError::DegenerateDesign);
    }
    let b1 = sxy / sxx;
    Ok((b1, ym - b1 * xm))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub se_b1: f64,
    pub se_b0: f64,
    pub replications: usize,
    /// Resamples discarded because every drawn flight had the same `P_i`.
    pub redraws: usize,
}

/// Nonparametric pairs bootstrap over flights.
///
/// Replicate `r` draws from its own ChaCha stream `r` under `seed`, so the
/// result does not depend on how replicates are scheduled. Degenerate
/// resamples are redrawn from the same stream, at most `10 × replications`
/// times in total.
pub fn bootstrap_se(observations: &[Observation], replications: usize, seed: u64) -> Result<BootstrapResult> {
    if replications < 2 {
        return Err(EstimationError::TooFewReplications(replications));
    }
    ols(observations)?;
    let cap = 10 * replications;
    let n = observations.len();
    let fits: Vec<Result<(f64, f64, usize)>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut resample = Vec::with_capacity(n);
            let mut redraws = 0;
            loop {
                resample.clear();
                resample.extend((0..n).map(|_| observations[rng.gen_range(0..n)]));
                match ols(&resample) {
                    Ok((b1, b0)) => return Ok((b1, b0, redraws)),
                    Err(EstimationError::DegenerateDesign) if redraws < cap => redraws += 1,
                    Err(EstimationError::DegenerateDesign) => return Err(EstimationError::BootstrapExhausted(redraws)),
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();
    let mut b1s = Vec::with_capacity(replications);
    let mut b0s = Vec::with_capacity(replications);
    let mut redraws = 0;
    for fit in fits {
        let (b1, b0, extra) = fit?;
        b1s.push(b1);
        b0s.push(b0);
        redraws += extra;
    }
    if redraws > cap {
        return Err(EstimationError::BootstrapExhausted(redraws));
    }
    Ok(BootstrapResult { se_b1: sample_sd(&b1s), se_b0: sample_sd(&b0s), replications, redraws })
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Fit plus bootstrap errors.
pub fn fit_with_bootstrap(
    observations: &[Observation],
    regime: Regime,
    replications: usize,
    seed: u64,
) -> Result<(RegimeModel, BootstrapResult)> {
    let mut model = fit_regime_model(observations, regime)?;
    let boot = bootstrap_se(observations, replications, seed)?;
    model.se_b1 = boot.se_b1;
    model.se_b0 = boot.se_b0;
    Ok((model, boot))
}

/// Distinct bootstrap seed for each regime derived from a run seed.
pub fn regime_seed(seed: u64, regime: Regime) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(regime.index() as u64 + 1))
}

/// The three regime models used together for prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeModelSet {
    pub takeoff: RegimeModel,
    pub cruise: RegimeModel,
    pub landing: RegimeModel,
}

impl RegimeModelSet {
    pub fn get(&self, regime: Regime) -> &RegimeModel {
        match regime {
            Regime::Takeoff => &self.takeoff,
            Regime::Cruise => &self.cruise,
            Regime::Landing => &self.landing,
        }
    }

    pub fn from_models(models: &[RegimeModel]) -> Result<Self> {
        let find = |r: Regime| models.iter().find(|m| m.regime == r).copied().ok_or(EstimationError::MissingModel(r));
        Ok(Self { takeoff: find(Regime::Takeoff)?, cruise: find(Regime::Cruise)?, landing: find(Regime::Landing)? })
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegimeModel> {
        [&self.takeoff, &self.cruise, &self.landing].into_iter()
    }

    /// Coefficients ± bootstrap errors as published for the 120-flight M100 training fold.
    pub fn published() -> Self {
        let m = |regime, b1, se_b1, b0, se_b0| RegimeModel { regime, b1, b0, se_b1, se_b0, n_train: 120 };
        Self {
            takeoff: m(Regime::Takeoff, 1.97, 0.08, 13.8, 0.01),
            cruise: m(Regime::Cruise, 1.69, 0.06, 16.8, 0.01),
            landing: m(Regime::Landing, 1.62, 0.14, -4.7, 0.01),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let load_err = |message: String| EstimationError::Load { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| load_err(e.to_string()))?;
        let records: Vec<ModelRecord> = serde_json::from_str(&text).map_err(|e| load_err(e.to_string()))?;
        let models: Vec<RegimeModel> = records.iter().map(ModelRecord::model).collect();
        Self::from_models(&models)
    }
}

/// Row of `models.json`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub regime: Regime,
    pub b1: f64,
    pub b0: f64,
    pub se_b1: f64,
    pub se_b0: f64,
    pub n_train: usize,
    pub seed: u64,
    pub replications: usize,
}

impl ModelRecord {
    pub fn new(model: &RegimeModel, seed: u64, replications: usize) -> Self {
        Self {
            regime: model.regime,
            b1: model.b1,
            b0: model.b0,
            se_b1: model.se_b1,
            se_b0: model.se_b0,
            n_train: model.n_train,
            seed,
            replications,
        }
    }

    pub fn model(&self) -> RegimeModel {
        RegimeModel {
            regime: self.regime,
            b1: self.b1,
            b0: self.b0,
            se_b1: self.se_b1,
            se_b0: self.se_b0,
            n_train: self.n_train,
        }
    }
}

/// Experiment grid cell of a flight: payload, speed and altitude, quantized
/// to the millimetre/gram so it can be ordered and hashed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridCell {
    pub payload_g: i64,
    pub speed_mm_s: i64,
    pub altitude_mm: i64,
}

impl GridCell {
    pub fn from_meta(meta: &FlightMeta) -> Self {
        let q = |v: f64| if v.is_finite() { (v * 1000.0).round() as i64 } else { i64::MIN };
        Self { payload_g: q(meta.payload_kg), speed_mm_s: q(meta.speed_ms), altitude_mm: q(meta.altitude_m) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_ids: Vec<u32>,
    pub test_ids: Vec<u32>,
    pub seed: u64,
}

/// Flight-level train/test split.
///
/// With `cells`, each grid cell contributes to the training fold in
/// proportion to its size (largest-remainder rounding; equal remainders are
/// ordered by a shuffle drawn with `seed`). Which flights of a cell are
/// used for training is drawn with `seed`.
pub fn stratified_split(ids: &[u32], cells: Option<&[GridCell]>, train_count: usize, seed: u64) -> Result<SplitPlan> {
    let total = ids.len();
    if train_count >= total {
        return Err(EstimationError::TrainCountTooLarge { train: train_count, total });
    }
    if let Some(c) = cells {
        if c.len() != total {
            return Err(EstimationError::CellLengthMismatch(c.len(), total));
        }
    }
    let mut seen = BTreeSet::new();
    let mut groups: BTreeMap<Option<GridCell>, Vec<u32>> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        if !seen.insert(id) {
            return Err(EstimationError::DuplicateId(id));
        }
        groups.entry(cells.map(|c| c[i])).or_default().push(id);
    }
    for members in groups.values_mut() {
        members.sort_unstable();
    }

    let mut quotas: Vec<(usize, usize)> = Vec::new(); // (floor, remainder)
    for members in groups.values() {
        let scaled = members.len() * train_count;
        quotas.push((scaled / total, scaled % total));
    }
    let assigned: usize = quotas.iter().map(|q| q.0).sum();
    // Seeded tie order: an id-based rule would favour whichever cells were
    // flown first when most cells hold a single flight.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.shuffle(&mut rng);
    order.sort_by(|&a, &b| quotas[b].1.cmp(&quotas[a].1));
    for &g in order.iter().take(train_count - assigned) {
        quotas[g].0 += 1;
    }

    let mut train_ids = Vec::with_capacity(train_count);
    let mut test_ids = Vec::with_capacity(total - train_count);
    for (members, quota) in groups.values().zip(&quotas) {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        train_ids.extend_from_slice(&shuffled[..quota.0]);
        test_ids.extend_from_slice(&shuffled[quota.0..]);
    }
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok(SplitPlan { train_ids, test_ids, seed })
}

/// Regime-level aggregates of one segmented flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeObservation {
    pub mean_power: f64,
    /// s
    pub duration: f64,
    /// J
    pub energy: f64,
}

/// Everything downstream models need from one segmented flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightObservation {
    pub flight_id: u32,
    pub payload_kg: f64,
    pub total_mass: f64,
    pub p_induced: f64,
    pub target_speed: f64,
    pub target_altitude: f64,
    pub mean_wind_speed: f64,
    /// Measured energy over the detected flight (takeoff start to touchdown), J.
    pub measured_energy: f64,
    /// Indexed by [`Regime::index`].
    pub regimes: [RegimeObservation; 3],
}

impl FlightObservation {
    pub fn regime(&self, regime: Regime) -> &RegimeObservation {
        &self.regimes[regime.index()]
    }

    pub fn point(&self, regime: Regime) -> Observation {
        Observation { p_induced: self.p_induced, mean_power: self.regime(regime).mean_power }
    }
}

/// A flight excluded from fitting, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reject {
    pub flight_id: u32,
    pub reason: String,
}

/// Segment a flight and aggregate its regimes.
pub fn observe_flight(
    flight: &FlightRecord,
    params: &SegmentationParams,
    config: &DroneConfig,
    env: &Environment,
) -> Result<FlightObservation> {
    let slices = detect_regimes(flight, params)?;
    let total_mass = config.empty_mass + flight.payload_mass;
    let p_induced = induced_power(total_mass, env, config)?;
    let regimes = slices.map(|s| RegimeObservation { mean_power: s.mean_power, duration: s.duration, energy: s.energy });
    let measured_energy = flight.summary_between(slices[0].start_index, slices[2].end_index.min(flight.len() - 1))?.energy;
    Ok(FlightObservation {
        flight_id: flight.flight_id,
        payload_kg: flight.payload_mass,
        total_mass,
        p_induced,
        target_speed: flight.target_speed,
        target_altitude: flight.target_altitude,
        mean_wind_speed: flight.mean_wind_speed().unwrap_or(0.0),
        measured_energy,
        regimes,
    })
}

/// Observe every flight in parallel; failures become rejects. Output order follows input order.
pub fn observe_flights(
    flights: &[FlightRecord],
    params: &SegmentationParams,
    config: &DroneConfig,
    env: &Environment,
) -> (Vec<FlightObservation>, Vec<Reject>) {
    let results: Vec<_> = flights.par_iter().map(|f| (f.flight_id, observe_flight(f, params, config, env))).collect();
    let mut observed = Vec::new();
    let mut rejects = Vec::new();
    for (flight_id, r) in results {
        match r {
            Ok(o) => observed.push(o),
            Err(e) => rejects.push(Reject { flight_id, reason: e.to_string() }),
        }
    }
    (observed, rejects)
}

/// Fitted models with their bootstrap diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub models: RegimeModelSet,
    pub bootstrap: [BootstrapResult; 3],
}

/// Fit all three regimes on the given training flights.
pub fn fit_all(train: &[FlightObservation], replications: usize, seed: u64) -> Result<FitOutcome> {
    let mut models = Vec::with_capacity(3);
    let mut boots = Vec::with_capacity(3);
    for regime in Regime::ALL {
        let points: Vec<Observation> = train.iter().map(|f| f.point(regime)).collect();
        let (model, boot) = fit_with_bootstrap(&points, regime, replications, regime_seed(seed, regime))?;
        models.push(model);
        boots.push(boot);
    }
    Ok(FitOutcome { models: RegimeModelSet::from_models(&models)?, bootstrap: [boots[0], boots[1], boots[2]] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    EnergyModel,
    BoostedTrees,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightAre {
    pub flight_id: u32,
    pub measured_j: f64,
    pub estimated_j: f64,
    pub are: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreReport {
    pub method: Method,
    pub flights: Vec<FlightAre>,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

/// `|measured − estimated| / measured`.
pub fn absolute_relative_error(measured: f64, estimated: f64) -> f64 {
    ((measured - estimated) / measured).abs()
}

impl AreReport {
    /// Build from `(flight_id, measured_j, estimated_j)` triples.
    pub fn from_estimates(method: Method, estimates: &[(u32, f64, f64)]) -> Result<Self> {
        if estimates.is_empty() {
            return Err(EstimationError::NoFlights);
        }
        let mut flights = Vec::with_capacity(estimates.len());
        for &(flight_id, measured_j, estimated_j) in estimates {
            if measured_j == 0.0 {
                return Err(EstimationError::ZeroMeasuredEnergy(flight_id));
            }
            flights.push(FlightAre { flight_id, measured_j, estimated_j, are: absolute_relative_error(measured_j, estimated_j) });
        }
        let mut ares: Vec<f64> = flights.iter().map(|f| f.are).collect();
        ares.sort_by(f64::total_cmp);
        let n = ares.len();
        let median = if n % 2 == 1 { ares[n / 2] } else { 0.5 * (ares[n / 2 - 1] + ares[n / 2]) };
        Ok(Self {
            method,
            mean: ares.iter().sum::<f64>() / n as f64,
            median,
            max: ares[n - 1],
            flights,
        })
    }
}

/// Estimated flight energy: Σ over regimes of predicted mean power × regime duration.
pub fn estimate_flight_energy(models: &RegimeModelSet, flight: &FlightObservation) -> f64 {
    Regime::ALL
        .iter()
        .map(|&r| predict_mean_power(models.get(r), flight.p_induced) * flight.regime(r).duration)
        .sum()
}

/// Flight-level ARE of the linear energy model on test flights.
pub fn evaluate_are(test: &[FlightObservation], models: &RegimeModelSet) -> Result<AreReport> {
    let estimates: Vec<(u32, f64, f64)> =
        test.iter().map(|f| (f.flight_id, f.measured_energy, estimate_flight_energy(models, f))).collect();
    AreReport::from_estimates(Method::EnergyModel, &estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(n: usize, b1: f64, b0: f64) -> Vec<Observation> {
        (0..n)
            .map(|i| {
                let x = 200.0 + 17.0 * i as f64;
                Observation { p_induced: x, mean_power: b1 * x + b0 }
            })
            .collect()
    }

    #[test]
    fn noiseless_recovery() {
        let m = fit_regime_model(&line(10, 2.0, 10.0), Regime::Cruise).unwrap();
        assert!((m.b1 - 2.0).abs() <= 1e-9 * 2.0);
        assert!((m.b0 - 10.0).abs() <= 1e-9 * 10.0);
        assert_eq!(m.n_train, 10);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_regime_model(&line(2, 1.0, 0.0), Regime::Cruise), Err(EstimationError::TooFewObservations(2))));
        let flat = vec![Observation { p_induced: 5.0, mean_power: 1.0 }; 4];
        assert!(matches!(fit_regime_model(&flat, Regime::Cruise), Err(EstimationError::DegenerateDesign)));
    }

    #[test]
    fn zero_noise_bootstrap_has_no_spread() {
        let b = bootstrap_se(&line(30, 1.7, 16.0), 200, 3).unwrap();
        assert!(b.se_b1 < 1e-9 && b.se_b0 < 1e-9);
    }

    #[test]
    fn bootstrap_is_deterministic_and_seed_sensitive() {
        let mut obs = line(25, 1.5, 12.0);
        for (i, o) in obs.iter_mut().enumerate() {
            o.mean_power += if i % 3 == 0 { 4.0 } else { -2.0 };
        }
        let a = bootstrap_se(&obs, 300, 11).unwrap();
        let b = bootstrap_se(&obs, 300, 11).unwrap();
        let c = bootstrap_se(&obs, 300, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.se_b1, c.se_b1);
        assert!(matches!(bootstrap_se(&obs, 1, 0), Err(EstimationError::TooFewReplications(1))));
    }

    #[test]
    fn degenerate_resamples_are_redrawn() {
        // Two distinct x values among three flights: resamples of one value happen often.
        let obs = vec![
            Observation { p_induced: 1.0, mean_power: 1.0 },
            Observation { p_induced: 1.0, mean_power: 1.5 },
            Observation { p_induced: 2.0, mean_power: 3.0 },
        ];
        let b = bootstrap_se(&obs, 200, 5).unwrap();
        assert!(b.redraws > 0);
    }

    #[test]
    fn predict_examples() {
        let published = RegimeModelSet::published();
        assert!((predict_mean_power(&published.landing, 0.0) + 4.7).abs() < 1e-12);
        assert!((predict_mean_power(&published.cruise, 100.0) - 185.8).abs() < 1e-9);
        let identity = RegimeModel { regime: Regime::Cruise, b1: 1.0, b0: 0.0, se_b1: 0.0, se_b0: 0.0, n_train: 3 };
        assert_eq!(predict_mean_power(&identity, 42.5), 42.5);
    }

    #[test]
    fn missing_regime_is_reported() {
        let p = RegimeModelSet::published();
        let err = RegimeModelSet::from_models(&[p.takeoff, p.landing]).unwrap_err();
        assert!(matches!(err, EstimationError::MissingModel(Regime::Cruise)));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ids: Vec<u32> = (1..=187).collect();
        let a = stratified_split(&ids, None, 120, 7).unwrap();
        assert_eq!((a.train_ids.len(), a.test_ids.len()), (120, 67));
        assert_eq!(a, stratified_split(&ids, None, 120, 7).unwrap());
        let all: BTreeSet<u32> = a.train_ids.iter().chain(&a.test_ids).copied().collect();
        assert_eq!(all.len(), 187);
        assert!(matches!(stratified_split(&ids, None, 187, 7), Err(EstimationError::TrainCountTooLarge { .. })));
    }

    #[test]
    fn two_cells_split_one_each() {
        let c1 = GridCell { payload_g: 0, speed_mm_s: 4000, altitude_mm: 25000 };
        let c2 = GridCell { payload_g: 250, speed_mm_s: 4000, altitude_mm: 25000 };
        let ids = [10, 11, 20, 21];
        let cells = [c1, c1, c2, c2];
        // Enumerate every seed outcome class: each fold must hold one id per cell.
        for seed in 0..50 {
            let plan = stratified_split(&ids, Some(&cells), 2, seed).unwrap();
            let cell_of = |id: u32| if id < 20 { 1 } else { 2 };
            let mut train_cells: Vec<_> = plan.train_ids.iter().map(|&i| cell_of(i)).collect();
            train_cells.sort();
            assert_eq!(train_cells, vec![1, 2]);
        }
    }

    #[test]
    fn remainder_ties_spread_across_cells() {
        // 100 singleton cells in id order, 50 slots: every remainder ties.
        let ids: Vec<u32> = (0..100).collect();
        let cells: Vec<GridCell> = (0..100).map(|k| GridCell { payload_g: k, speed_mm_s: 0, altitude_mm: 0 }).collect();
        for seed in 0..20 {
            let plan = stratified_split(&ids, Some(&cells), 50, seed).unwrap();
            let low = plan.train_ids.iter().filter(|&&i| i < 50).count();
            assert!((10..=40).contains(&low), "seed {seed}: {low} of 50 from the first half");
        }
    }

    #[test]
    fn are_arithmetic() {
        let r = AreReport::from_estimates(Method::EnergyModel, &[(1, 100e3, 97e3), (2, 50e3, 50e3)]).unwrap();
        assert!((r.flights[0].are - 0.03).abs() < 1e-12);
        assert!((r.mean - 0.015).abs() < 1e-12);
        assert!((r.max - 0.03).abs() < 1e-12);
        assert!(matches!(
            AreReport::from_estimates(Method::EnergyModel, &[(4, 0.0, 1.0)]),
            Err(EstimationError::ZeroMeasuredEnergy(4))
        ));
    }

    #[test]
    fn models_json_round_trip() {
        let p = RegimeModelSet::published();
        let records: Vec<ModelRecord> = p.iter().map(|m| ModelRecord::new(m, 7, 1000)).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("models.json");
        std::fs::write(&path, serde_json::to_string_pretty(&records).unwrap()).unwrap();
        assert_eq!(RegimeModelSet::from_path(&path).unwrap(), p);
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_and_order_free(
            pts in prop::collection::vec((50.0f64..800.0, -20.0f64..20.0), 3..40),
            rot in 0usize..40,
        ) {
            let obs: Vec<Observation> = pts.iter().map(|&(x, e)| Observation { p_induced: x, mean_power: 1.8 * x + 12.0 + e }).collect();
            prop_assume!(obs.iter().any(|o| o.p_induced != obs[0].p_induced));
            let m = fit_regime_model(&obs, Regime::Takeoff).unwrap();
            let scale: f64 = obs.iter().map(|o| o.mean_power.abs() * o.p_induced).sum();
            let r: Vec<f64> = obs.iter().map(|o| o.mean_power - predict_mean_power(&m, o.p_induced)).collect();
            let sum_r: f64 = r.iter().sum();
            let sum_rx: f64 = r.iter().zip(&obs).map(|(r, o)| r * o.p_induced).sum();
            prop_assert!(sum_r.abs() <= 1e-9 * scale);
            prop_assert!(sum_rx.abs() <= 1e-9 * scale);

            let mut rotated = obs.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            rotated.reverse();
            let m2 = fit_regime_model(&rotated, Regime::Takeoff).unwrap();
            prop_assert!((m.b1 - m2.b1).abs() <= 1e-9 * m.b1.abs().max(1.0));
            prop_assert!((m.b0 - m2.b0).abs() <= 1e-9 * m.b0.abs().max(1.0) * 100.0);
        }

        #[test]
        fn split_partitions_ids(n in 2usize..120, frac in 0.05f64..0.95, seed in 0u64..1000) {
            let ids: Vec<u32> = (0..n as u32).map(|i| i * 3 + 1).collect();
            let train = ((n as f64 * frac) as usize).min(n - 1);
            let cells: Vec<GridCell> = ids.iter().map(|&i| GridCell { payload_g: (i % 3) as i64, speed_mm_s: (i % 5) as i64, altitude_mm: 0 }).collect();
            let plan = stratified_split(&ids, Some(&cells), train, seed).unwrap();
            prop_assert_eq!(plan.train_ids.len(), train);
            prop_assert_eq!(plan.test_ids.len(), n - train);
            let train_set: BTreeSet<u32> = plan.train_ids.iter().copied().collect();
            prop_assert!(plan.test_ids.iter().all(|i| !train_set.contains(i)));
        }
    }
}
