//! Command-line front end. Every subcommand that writes files also writes
//! `manifest.json` next to them.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::estimation::{
    evaluate_are, fit_all, observe_flights, stratified_split, EstimationError, FlightObservation, GridCell, ModelRecord,
    RegimeModelSet, SplitPlan,
};
use crate::fleet::{self, FleetError, Scenario};
use crate::gbt::{adequacy, cv_grid_search, evaluate_gbt, train_regime_gbts, FeatureSet, GbtError, HyperGrid, DEFAULT_ROUNDS};
use crate::mission::{
    calibrate_empty_mass, energy_sweep, mission_energy, per_km_intensity, two_way_range, validity_warnings, MissionError,
    MissionSpec, RangeAnchors,
};
use crate::physics::{DroneConfig, Environment, PhysicsError};
use crate::segmentation::{detect_regimes, SegmentationError, SegmentationParams, SegmentationReport};
use crate::synth::{self, SynthError, SynthSpec};
use crate::telemetry::{load_batch, parse_combined_csv, parse_flight_csv, ColumnMap, FlightRecord, TelemetryError};

pub const DATA_DIR_ENV: &str = "AEROAMP_DATA_DIR";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Gbt(#[from] GbtError),
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error(transparent)]
    Fleet(#[from] FleetError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Telemetry(_) => "telemetry",
            CliError::Segmentation(_) => "segmentation",
            CliError::Physics(_) => "physics",
            CliError::Estimation(_) => "estimation",
            CliError::Gbt(_) => "gbt",
            CliError::Mission(_) => "mission",
            CliError::Fleet(_) => "fleet",
            CliError::Synth(_) => "synth",
            CliError::Write { .. } => "io",
            CliError::Input(_) => "input",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "aeroamp", version, about = "Quadcopter delivery energy pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split flights into takeoff, cruise and landing.
    Segment(SegmentArgs),
    /// Fit the per-regime power models on a stratified training fold.
    Fit(FitArgs),
    /// Score fitted models (and optionally boosted trees) on the test fold.
    Evaluate(EvaluateArgs),
    /// Round-trip energy and two-way range of one delivery mission.
    Range(RangeArgs),
    /// Energy and GHG per km and per package across delivery modes.
    Compare(CompareArgs),
    /// Energy-versus-distance and range grids over payload and speed.
    Sweep(SweepArgs),
    /// Generate synthetic trapezoid flights with known coefficients.
    Synth(SynthArgs),
    /// Fit the drone empty mass to the reference mission figures.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct FlightInput {
    /// Batch metadata JSON (array of flight_id, payload_kg, altitude_m, speed_ms, csv_path).
    #[arg(long, conflicts_with = "combined", required_unless_present = "combined")]
    pub batch: Option<PathBuf>,
    /// Single CSV holding every flight, keyed by a flight column.
    #[arg(long)]
    pub combined: Option<PathBuf>,
    /// Column mapping JSON for logs that do not use canonical names.
    #[arg(long)]
    pub column_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub input: FlightInput,
    /// Segmentation thresholds JSON; unset fields keep their defaults.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: FlightInput,
    #[arg(long, default_value_t = 120)]
    pub train_count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap replications for coefficient standard errors.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    /// Split by flight id only, ignoring the experiment grid.
    #[arg(long)]
    pub no_stratify: bool,
    #[arg(long)]
    pub drone: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMethod {
    Linear,
    Gbt,
    Both,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: FlightInput,
    #[arg(long)]
    pub models: PathBuf,
    /// `split.json` written by `fit`. Without it every flight is scored and
    /// boosted trees are cross-validated on all flights.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EvalMethod::Linear)]
    pub method: EvalMethod,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    pub rounds: usize,
    /// Comma-separated boosted-tree features.
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub drone: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelInput {
    /// models.json from `fit`; defaults to the published coefficients.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Drone profile JSON; defaults to the calibrated M100 profile.
    #[arg(long)]
    pub drone: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long, default_value_t = 1.0)]
    pub payload_kg: f64,
    #[arg(long, default_value_t = 12.0)]
    pub cruise_speed: f64,
    #[arg(long, default_value_t = 100.0)]
    pub altitude: f64,
    #[arg(long, default_value_t = 2.5)]
    pub takeoff_speed: f64,
    #[arg(long, default_value_t = 2.0)]
    pub landing_speed: f64,
    /// Defaults to the drone profile's battery capacity.
    #[arg(long)]
    pub battery_wh: Option<f64>,
    /// Also write energy-vs-distance rows (mass,speed,distance,energy_wh).
    #[arg(long)]
    pub sweep_csv: Option<PathBuf>,
    /// Directory for result.json and the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub vehicles: Option<PathBuf>,
    #[arg(long)]
    pub factors: Option<PathBuf>,
    #[arg(long, default_value = "base")]
    pub scenario: Scenario,
    #[arg(long, default_value = "truck")]
    pub baseline: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub payloads_kg: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "4,12")]
    pub speeds: Vec<f64>,
    #[arg(long, default_value_t = 100.0)]
    pub altitude: f64,
    #[arg(long, default_value_t = 10.0)]
    pub max_distance_km: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step_km: f64,
    #[arg(long)]
    pub battery_wh: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator spec JSON; unset fields keep their defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Provenance written beside every output set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_paths: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub parameters: Value,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_paths: BTreeMap::new(),
            seeds: BTreeMap::new(),
            parameters: Value::Null,
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn path(&mut self, key: &str, p: &Option<PathBuf>) {
        if let Some(p) = p {
            self.config_paths.insert(key.to_string(), p.display().to_string());
        }
    }
}

/// Collects written files for the manifest.
struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| write_err(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| write_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.text(name, &to_json(value))
    }

    fn finish(mut self, mut manifest: RunManifest) -> Result<()> {
        self.written.sort();
        manifest.outputs = self.written.clone();
        let path = self.dir.join(MANIFEST_FILE);
        fs::write(&path, to_json(&manifest)).map_err(|e| write_err(&path, e))
    }
}

fn write_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Write { path: path.display().to_string(), message: e.to_string() }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize") + "\n"
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))
}

fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Input paths that do not exist as given are looked up under the data directory.
fn resolve(path: &Path) -> PathBuf {
    match data_dir() {
        Some(root) if path.is_relative() && !path.exists() => root.join(path),
        _ => path.to_path_buf(),
    }
}

fn load_drone(path: &Option<PathBuf>) -> Result<DroneConfig> {
    Ok(match path {
        Some(p) => DroneConfig::from_path(&resolve(p))?,
        None => DroneConfig::m100(),
    })
}

fn load_models(path: &Option<PathBuf>) -> Result<RegimeModelSet> {
    Ok(match path {
        Some(p) => RegimeModelSet::from_path(&resolve(p))?,
        None => RegimeModelSet::published(),
    })
}

fn load_seg_params(path: &Option<PathBuf>) -> Result<SegmentationParams> {
    match path {
        Some(p) => read_json(&resolve(p)),
        None => Ok(SegmentationParams::default()),
    }
}

/// Parsed flights plus a note per file that could not be read.
fn load_flights(input: &FlightInput) -> Result<(Vec<FlightRecord>, Vec<String>)> {
    let map = match &input.column_map {
        Some(p) => ColumnMap::from_path(&resolve(p))?,
        None => ColumnMap::default(),
    };
    let mut flights = Vec::new();
    let mut notes = Vec::new();
    if let Some(combined) = &input.combined {
        for parsed in parse_combined_csv(&resolve(combined), &map)? {
            if parsed.skipped_rows > 0 {
                notes.push(format!("flight {}: skipped {} malformed rows", parsed.record.flight_id, parsed.skipped_rows));
            }
            flights.push(parsed.record);
        }
    } else if let Some(batch) = &input.batch {
        let dir = data_dir();
        for entry in load_batch(&resolve(batch), dir.as_deref())? {
            match parse_flight_csv(&entry.csv_path, entry.meta(), &map) {
                Ok(parsed) => {
                    if parsed.skipped_rows > 0 {
                        notes.push(format!("flight {}: skipped {} malformed rows", entry.flight_id, parsed.skipped_rows));
                    }
                    flights.push(parsed.record);
                }
                Err(e) => notes.push(format!("flight {}: {e}", entry.flight_id)),
            }
        }
    }
    if flights.is_empty() {
        return Err(CliError::Input("no flights could be loaded".into()));
    }
    Ok((flights, notes))
}

fn input_paths(m: &mut RunManifest, input: &FlightInput) {
    m.path("batch", &input.batch);
    m.path("combined", &input.combined);
    m.path("column_map", &input.column_map);
}

fn observe(
    input: &FlightInput,
    params: &SegmentationParams,
    drone: &DroneConfig,
    manifest: &mut RunManifest,
) -> Result<Vec<FlightObservation>> {
    let (flights, notes) = load_flights(input)?;
    manifest.notes.extend(notes);
    let (observed, rejects) = observe_flights(&flights, params, drone, &Environment::default());
    for r in &rejects {
        log::warn!("flight {} rejected: {}", r.flight_id, r.reason);
        manifest.notes.push(format!("flight {} rejected: {}", r.flight_id, r.reason));
    }
    if observed.is_empty() {
        return Err(CliError::Input("no flight could be segmented".into()));
    }
    Ok(observed)
}

fn cmd_segment(a: &SegmentArgs) -> Result<()> {
    let params = load_seg_params(&a.params)?;
    let mut manifest = RunManifest::new("segment");
    input_paths(&mut manifest, &a.input);
    manifest.path("params", &a.params);
    manifest.parameters = serde_json::to_value(params).expect("params serialize");
    let (flights, notes) = load_flights(&a.input)?;
    manifest.notes.extend(notes);
    let mut reports = Vec::new();
    let mut rows = String::from("flight_id,regime,start_s,end_s,duration_s,mean_power_w,energy_j\n");
    for f in &flights {
        match detect_regimes(f, &params) {
            Ok(slices) => {
                let report = SegmentationReport::new(f.flight_id, &slices, params);
                for s in &report.slices {
                    rows.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        f.flight_id, s.regime, s.start_s, s.end_s, s.duration_s, s.mean_power_w, s.energy_j
                    ));
                }
                reports.push(report);
            }
            Err(e) => manifest.notes.push(format!("flight {}: {e}", f.flight_id)),
        }
    }
    let mut out = OutDir::create(&a.out)?;
    out.json("segments.json", &reports)?;
    out.text("segments.csv", &rows)?;
    out.finish(manifest)
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    let params = load_seg_params(&a.params)?;
    let drone = load_drone(&a.drone)?;
    let mut manifest = RunManifest::new("fit");
    input_paths(&mut manifest, &a.input);
    manifest.path("drone", &a.drone);
    manifest.path("params", &a.params);
    manifest.seeds.insert("seed".into(), a.seed);
    manifest.parameters = json!({
        "train_count": a.train_count,
        "bootstrap": a.bootstrap,
        "stratified": !a.no_stratify,
        "segmentation": params,
        "drone": drone,
    });

    let observed = observe(&a.input, &params, &drone, &mut manifest)?;
    let ids: Vec<u32> = observed.iter().map(|o| o.flight_id).collect();
    let cells: Vec<GridCell> = observed
        .iter()
        .map(|o| GridCell::from_meta(&crate::telemetry::FlightMeta {
            flight_id: o.flight_id,
            payload_kg: o.payload_kg,
            altitude_m: o.target_altitude,
            speed_ms: o.target_speed,
        }))
        .collect();
    let split = stratified_split(&ids, (!a.no_stratify).then_some(&cells[..]), a.train_count, a.seed)?;
    let train: Vec<FlightObservation> = observed.iter().filter(|o| split.train_ids.binary_search(&o.flight_id).is_ok()).cloned().collect();
    let fit = fit_all(&train, a.bootstrap, a.seed)?;
    let records: Vec<ModelRecord> = fit
        .models
        .iter()
        .map(|m| ModelRecord::new(m, crate::estimation::regime_seed(a.seed, m.regime), a.bootstrap))
        .collect();

    let mut out = OutDir::create(&a.out)?;
    out.json("models.json", &records)?;
    out.json("split.json", &split)?;
    out.json("bootstrap.json", &fit.bootstrap)?;
    out.json("observations.json", &observed)?;
    out.finish(manifest)
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let params = load_seg_params(&a.params)?;
    let drone = load_drone(&a.drone)?;
    let models = RegimeModelSet::from_path(&resolve(&a.models))?;
    let features = match &a.features {
        Some(s) => s.parse::<FeatureSet>()?,
        None => FeatureSet::default(),
    };
    let mut manifest = RunManifest::new("evaluate");
    input_paths(&mut manifest, &a.input);
    manifest.config_paths.insert("models".into(), a.models.display().to_string());
    manifest.path("split", &a.split);
    manifest.path("drone", &a.drone);
    manifest.seeds.insert("seed".into(), a.seed);
    manifest.parameters = json!({
        "method": format!("{:?}", a.method).to_lowercase(),
        "folds": a.folds,
        "rounds": a.rounds,
        "features": features,
        "grid": HyperGrid::default(),
    });

    let observed = observe(&a.input, &params, &drone, &mut manifest)?;
    let split: Option<SplitPlan> = a.split.as_ref().map(|p| read_json(&resolve(p))).transpose()?;
    let (train, test): (Vec<FlightObservation>, Vec<FlightObservation>) = match &split {
        Some(s) => (
            observed.iter().filter(|o| s.train_ids.binary_search(&o.flight_id).is_ok()).cloned().collect(),
            observed.iter().filter(|o| s.test_ids.binary_search(&o.flight_id).is_ok()).cloned().collect(),
        ),
        None => (observed.clone(), observed.clone()),
    };
    if test.is_empty() {
        return Err(CliError::Input("test fold is empty".into()));
    }

    let mut out = OutDir::create(&a.out)?;
    let linear = if a.method != EvalMethod::Gbt {
        let r = evaluate_are(&test, &models)?;
        out.json("are_linear.json", &r)?;
        Some(r)
    } else {
        None
    };
    if a.method != EvalMethod::Linear {
        let cv = cv_grid_search(&train, &HyperGrid::default(), a.folds, a.rounds, a.seed, &features)?;
        let gbt = train_regime_gbts(&train, &cv.best, a.rounds, a.seed, &features)?;
        let r = evaluate_gbt(&test, &gbt)?;
        out.json("cv_grid.json", &cv)?;
        out.json("are_gbt.json", &r)?;
        if let Some(l) = &linear {
            out.json("adequacy.json", &adequacy(l, &r))?;
        }
    }
    out.finish(manifest)
}

fn mission_from(a: &RangeArgs) -> MissionSpec {
    MissionSpec {
        payload_mass: a.payload_kg,
        cruise_speed: a.cruise_speed,
        cruise_altitude: a.altitude,
        takeoff_speed: a.takeoff_speed,
        landing_speed: a.landing_speed,
        one_way_distance: 0.0,
    }
}

fn distances(max_km: f64, step_km: f64) -> Result<Vec<f64>> {
    if !(step_km > 0.0 && max_km >= 0.0) {
        return Err(CliError::Input("distance step must be positive and maximum non-negative".into()));
    }
    let n = (max_km / step_km + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * step_km).collect())
}

fn sweep_csv(rows: &[crate::mission::SweepRow]) -> String {
    let mut s = String::from("mass,speed,distance,energy_wh\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.mass, r.speed, r.distance, r.energy_wh));
    }
    s
}

/// JSON document printed by `range`.
pub fn range_report(models: &RegimeModelSet, drone: &DroneConfig, mission: &MissionSpec, battery_wh: f64) -> Result<Value> {
    let env = Environment::default();
    let warnings = validity_warnings(mission);
    for w in &warnings {
        log::warn!("{w}");
    }
    let range = two_way_range(models, mission, drone, &env, battery_wh)?;
    let at_range = mission.with_distance(range.delivery_km);
    let breakdown = mission_energy(models, &at_range, drone, &env)?;
    let factors = fleet::default_factors();
    let (vehicle_side, grid_side) = if range.delivery_km > 0.0 {
        let v = per_km_intensity(models, &at_range, drone, &env)?;
        (Some(v), Some(fleet::grid_energy(v, &factors)))
    } else {
        (None, None)
    };
    Ok(json!({
        "mission": mission,
        "drone": drone,
        "battery_wh": battery_wh,
        "range": range,
        "breakdown_at_range_wh": breakdown,
        "intensity_mj_per_km": {
            "vehicle_side": vehicle_side,
            "grid_side": grid_side,
            "grid_divisor": factors.charging_efficiency * (1.0 - factors.transmission_loss),
        },
        "warnings": warnings,
    }))
}

fn cmd_range(a: &RangeArgs) -> Result<()> {
    let models = load_models(&a.model.models)?;
    let drone = load_drone(&a.model.drone)?;
    let battery = a.battery_wh.unwrap_or(drone.battery_capacity);
    let mission = mission_from(a);
    let report = range_report(&models, &drone, &mission, battery)?;
    print!("{}", to_json(&report));

    let mut manifest = RunManifest::new("range");
    manifest.path("models", &a.model.models);
    manifest.path("drone", &a.model.drone);
    manifest.parameters = json!({ "mission": mission, "battery_wh": battery });
    if let Some(path) = &a.sweep_csv {
        let km = report["range"]["delivery_km"].as_f64().unwrap_or(0.0);
        let rows = energy_sweep(&models, &mission, &drone, &Environment::default(), &[a.payload_kg], &[a.cruise_speed], &distances(km.ceil(), 0.1)?, battery)?;
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| write_err(parent, e))?;
        }
        fs::write(path, sweep_csv(&rows)).map_err(|e| write_err(path, e))?;
        manifest.notes.push(format!("sweep written to {}", path.display()));
    }
    if let Some(dir) = &a.out {
        let mut out = OutDir::create(dir)?;
        out.json("result.json", &report)?;
        out.finish(manifest)?;
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let vehicles = match &a.vehicles {
        Some(p) => fleet::load_vehicles(&resolve(p))?,
        None => fleet::default_vehicles(),
    };
    let factors = match &a.factors {
        Some(p) => fleet::load_factors(&resolve(p))?,
        None => fleet::default_factors(),
    };
    let rows = fleet::comparison_table(&vehicles, &factors, a.scenario)?;
    let reductions = fleet::reductions(&rows, &a.baseline)?;
    let csv = fleet::render_table_csv(&rows);
    print!("{csv}");

    let mut manifest = RunManifest::new("compare");
    manifest.path("vehicles", &a.vehicles);
    manifest.path("factors", &a.factors);
    manifest.parameters = json!({ "scenario": a.scenario, "baseline": a.baseline, "factors": factors });
    let divisor = factors.charging_efficiency * (1.0 - factors.transmission_loss);
    manifest.notes.push(format!(
        "electric energy is grid side: nominal / (charging efficiency × (1 − transmission loss)) = nominal / {divisor:.4}"
    ));
    if !factors.note.is_empty() {
        manifest.notes.push(factors.note.clone());
    }
    let mut out = OutDir::create(&a.out)?;
    out.text("table.csv", &csv)?;
    out.json("table.json", &json!({ "scenario": a.scenario, "rows": rows, "reductions": reductions }))?;
    out.text("figure2.csv", &fleet::figure2_csv(&vehicles, &factors)?)?;
    out.text("figure3.csv", &fleet::figure3_csv(&vehicles, &factors)?)?;
    out.finish(manifest)
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let models = load_models(&a.model.models)?;
    let drone = load_drone(&a.model.drone)?;
    let env = Environment::default();
    let battery = a.battery_wh.unwrap_or(drone.battery_capacity);
    let base = MissionSpec { cruise_altitude: a.altitude, ..MissionSpec::default() };
    let rows = energy_sweep(&models, &base, &drone, &env, &a.payloads_kg, &a.speeds, &distances(a.max_distance_km, a.step_km)?, battery)?;
    let mut ranges = String::from("mass,speed,two_way_km,delivery_km\n");
    for &payload in &a.payloads_kg {
        for &speed in &a.speeds {
            let m = MissionSpec { payload_mass: payload, cruise_speed: speed, ..base };
            let r = two_way_range(&models, &m, &drone, &env, battery)?;
            ranges.push_str(&format!("{},{},{},{}\n", drone.empty_mass + payload, speed, r.two_way_km, r.delivery_km));
        }
    }
    let mut manifest = RunManifest::new("sweep");
    manifest.path("models", &a.model.models);
    manifest.path("drone", &a.model.drone);
    manifest.parameters = json!({
        "payloads_kg": a.payloads_kg,
        "speeds": a.speeds,
        "altitude": a.altitude,
        "max_distance_km": a.max_distance_km,
        "step_km": a.step_km,
        "battery_wh": battery,
    });
    let mut out = OutDir::create(&a.out)?;
    out.text("energy_by_distance.csv", &sweep_csv(&rows))?;
    out.text("range_by_mass.csv", &ranges)?;
    out.finish(manifest)
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(p) => SynthSpec::from_path(&resolve(p))?,
        None => SynthSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let (written, truth) = synth::write_dataset(&spec, &a.out)?;
    let mut manifest = RunManifest::new("synth");
    manifest.path("spec", &a.spec);
    manifest.seeds.insert("seed".into(), spec.seed);
    manifest.parameters = json!({ "spec": spec, "ground_truth": truth });
    let mut out = OutDir::create(&a.out)?;
    out.written = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    out.finish(manifest)
}

fn cmd_calibrate(a: &CalibrateArgs) -> Result<()> {
    let models = load_models(&a.model.models)?;
    let drone = load_drone(&a.model.drone)?;
    let anchors = RangeAnchors::default();
    let cal = calibrate_empty_mass(&models, &anchors, &drone, &Environment::default())?;
    let report = json!({ "anchors": anchors, "calibration": cal });
    print!("{}", to_json(&report));
    if let Some(dir) = &a.out {
        let mut manifest = RunManifest::new("calibrate");
        manifest.path("models", &a.model.models);
        manifest.path("drone", &a.model.drone);
        manifest.parameters = json!({ "anchors": anchors });
        let mut out = OutDir::create(dir)?;
        out.json("drone.json", &cal.config)?;
        out.json("calibration.json", &report)?;
        out.finish(manifest)?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Segment(a) => cmd_segment(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Range(a) => cmd_range(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    }
}

/// Parse `argv` (program name first) and run. Returns the process exit
/// code: 0 on success, 1 on a domain error, 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            1
        }
    }
}
