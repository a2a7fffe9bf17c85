//! Synthetic trapezoid flights with a known per-regime power law.
//!
//! Each flight sits on the ground, climbs at the takeoff speed to the cruise
//! altitude, cruises a fixed distance, descends at the landing speed and sits
//! on the ground again. Mean power in each regime follows
//! `b2·P_i² + b1·P_i + b0`, plus optional per-flight and per-sample Gaussian
//! noise. The first ground sample after the descent keeps landing power so
//! that every regime slice sees only its own power level when all regimes
//! share one law.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{induced_power, DroneConfig, Environment, PhysicsError};
use crate::segmentation::Regime;
use crate::telemetry::{write_flight_csv, FlightEntry, FlightMeta, FlightRecord, TelemetryError, TelemetrySample};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, SynthError>;

/// Mean-power law of one regime, W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub b1: f64,
    pub b0: f64,
    #[serde(default)]
    pub b2: f64,
}

impl PowerLaw {
    pub fn linear(b1: f64, b0: f64) -> Self {
        Self { b1, b0, b2: 0.0 }
    }

    pub fn eval(&self, p_induced: f64) -> f64 {
        (self.b2 * p_induced + self.b1) * p_induced + self.b0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLaws {
    pub takeoff: PowerLaw,
    pub cruise: PowerLaw,
    pub landing: PowerLaw,
}

impl RegimeLaws {
    pub fn uniform(law: PowerLaw) -> Self {
        Self { takeoff: law, cruise: law, landing: law }
    }

    pub fn get(&self, regime: Regime) -> &PowerLaw {
        match regime {
            Regime::Takeoff => &self.takeoff,
            Regime::Cruise => &self.cruise,
            Regime::Landing => &self.landing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub flights: usize,
    pub first_flight_id: u32,
    pub laws: RegimeLaws,
    /// Standard deviation of a per-flight, per-regime power offset, W.
    pub flight_noise_w: f64,
    /// Standard deviation of independent per-sample power noise, W.
    pub sample_noise_w: f64,
    /// Flights cycle through the payload × altitude × speed grid.
    pub payloads_kg: Vec<f64>,
    pub altitudes_m: Vec<f64>,
    pub speeds_ms: Vec<f64>,
    pub takeoff_speed: f64,
    pub landing_speed: f64,
    pub cruise_distance_m: f64,
    pub ground_pad_s: f64,
    pub sample_rate_hz: f64,
    pub voltage: f64,
    pub wind_speed_ms: Option<f64>,
    pub drone: DroneConfig,
    pub environment: Environment,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            flights: 120,
            first_flight_id: 1,
            laws: RegimeLaws::uniform(PowerLaw::linear(2.0, 10.0)),
            flight_noise_w: 0.0,
            sample_noise_w: 0.0,
            payloads_kg: vec![0.0, 0.25, 0.5],
            altitudes_m: vec![25.0, 50.0, 75.0, 100.0],
            speeds_ms: vec![4.0, 6.0, 8.0, 10.0, 12.0],
            takeoff_speed: 2.5,
            landing_speed: 2.0,
            cruise_distance_m: 500.0,
            ground_pad_s: 5.0,
            sample_rate_hz: 5.0,
            voltage: 22.8,
            wind_speed_ms: None,
            drone: DroneConfig::m100(),
            environment: Environment::default(),
        }
    }
}

impl SynthSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| SynthError::Io { path: path.display().to_string(), message: e.to_string() })?;
        serde_json::from_str(&text).map_err(|e| SynthError::InvalidSpec(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if self.flights == 0 {
            return bad("flights must be positive");
        }
        if self.payloads_kg.is_empty() || self.altitudes_m.is_empty() || self.speeds_ms.is_empty() {
            return bad("payload, altitude and speed grids must be nonempty");
        }
        if self.payloads_kg.iter().any(|p| !(*p >= 0.0)) {
            return bad("payloads must be non-negative");
        }
        if self.altitudes_m.iter().chain(&self.speeds_ms).any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("altitudes and speeds must be positive; a zero value gives a zero-duration regime");
        }
        for (name, v) in [
            ("takeoff_speed", self.takeoff_speed),
            ("landing_speed", self.landing_speed),
            ("cruise_distance_m", self.cruise_distance_m),
            ("sample_rate_hz", self.sample_rate_hz),
            ("voltage", self.voltage),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SynthError::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.ground_pad_s >= 2.0) {
            return bad("ground_pad_s must be at least 2 s");
        }
        if !(self.flight_noise_w >= 0.0 && self.sample_noise_w >= 0.0) {
            return bad("noise levels must be non-negative");
        }
        self.drone.validate()?;
        Ok(())
    }

    /// Grid settings of the `i`-th flight (payload-major order).
    pub fn settings(&self, i: usize) -> (f64, f64, f64) {
        let (np, na, ns) = (self.payloads_kg.len(), self.altitudes_m.len(), self.speeds_ms.len());
        let k = i % (np * na * ns);
        (self.payloads_kg[k / (na * ns)], self.altitudes_m[(k / ns) % na], self.speeds_ms[k % ns])
    }
}

/// Sample indices at which each regime starts, and the touchdown index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthBoundaries {
    pub takeoff_start: usize,
    pub cruise_start: usize,
    pub landing_start: usize,
    pub touchdown: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFlight {
    pub record: FlightRecord,
    pub truth: TruthBoundaries,
    pub p_induced: f64,
    /// Noise-free mean power per regime, W.
    pub true_mean_power: [f64; 3],
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    PreGround,
    Climb,
    Cruise,
    Descent,
    PostGround,
}

/// Generate flight `i` of the `SynthSpec` design.
pub fn generate_flight(spec: &SynthSpec, i: usize) -> Result<SynthFlight> {
    let (payload, altitude, speed) = spec.settings(i);
    let flight_id = spec.first_flight_id + i as u32;
    let p_induced = induced_power(spec.drone.empty_mass + payload, &spec.environment, &spec.drone)?;
    let true_mean_power = Regime::ALL.map(|r| spec.laws.get(r).eval(p_induced));

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(flight_id as u64);
    let flight_noise = Normal::new(0.0, spec.flight_noise_w).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    let sample_noise = Normal::new(0.0, spec.sample_noise_w).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    let offsets: [f64; 3] = std::array::from_fn(|_| flight_noise.sample(&mut rng));

    let t0 = spec.ground_pad_s;
    let t1 = t0 + altitude / spec.takeoff_speed;
    let t2 = t1 + spec.cruise_distance_m / speed;
    let t3 = t2 + altitude / spec.landing_speed;
    let t_end = t3 + spec.ground_pad_s;
    let rate = spec.sample_rate_hz;
    let first_index_at = |t: f64| (t * rate - 1e-9).ceil() as usize;
    let truth = TruthBoundaries {
        takeoff_start: first_index_at(t0),
        cruise_start: first_index_at(t1),
        landing_start: first_index_at(t2),
        touchdown: first_index_at(t3),
    };
    let n = (t_end * rate).floor() as usize + 1;

    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / rate;
        let phase = if k < truth.takeoff_start {
            Phase::PreGround
        } else if k < truth.cruise_start {
            Phase::Climb
        } else if k < truth.landing_start {
            Phase::Cruise
        } else if k < truth.touchdown {
            Phase::Descent
        } else {
            Phase::PostGround
        };
        let (alt, vz, along, vx) = match phase {
            Phase::PreGround => (0.0, 0.0, 0.0, 0.0),
            Phase::Climb => (spec.takeoff_speed * (t - t0), spec.takeoff_speed, 0.0, 0.0),
            Phase::Cruise => (altitude, 0.0, speed * (t - t1), speed),
            Phase::Descent => (altitude - spec.landing_speed * (t - t2), -spec.landing_speed, spec.cruise_distance_m, 0.0),
            Phase::PostGround => (0.0, 0.0, spec.cruise_distance_m, 0.0),
        };
        let regime = match phase {
            Phase::Climb => Some(Regime::Takeoff),
            Phase::Cruise => Some(Regime::Cruise),
            Phase::Descent => Some(Regime::Landing),
            Phase::PostGround if k == truth.touchdown => Some(Regime::Landing),
            _ => None,
        };
        let power = match regime {
            Some(r) => true_mean_power[r.index()] + offsets[r.index()] + sample_noise.sample(&mut rng),
            None => 0.0,
        };
        samples.push(TelemetrySample {
            time: t,
            voltage: spec.voltage,
            current: power / spec.voltage,
            position: [along, 0.0, alt],
            velocity: [vx, 0.0, vz],
            wind_speed: spec.wind_speed_ms,
            wind_direction: spec.wind_speed_ms.map(|_| 0.0),
            orientation: None,
        });
    }
    let meta = FlightMeta { flight_id, payload_kg: payload, altitude_m: altitude, speed_ms: speed };
    Ok(SynthFlight { record: FlightRecord::new(meta, samples), truth, p_induced, true_mean_power })
}

pub fn generate(spec: &SynthSpec) -> Result<Vec<SynthFlight>> {
    spec.validate()?;
    (0..spec.flights).map(|i| generate_flight(spec, i)).collect()
}

/// Ground truth recorded next to generated files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub laws: RegimeLaws,
    pub flight_noise_w: f64,
    pub sample_noise_w: f64,
    pub seed: u64,
    pub flights: Vec<FlightTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightTruth {
    pub flight_id: u32,
    pub p_induced: f64,
    pub boundaries: TruthBoundaries,
}

/// Write `flight_NNNN.csv` per flight plus `flights.json` (batch metadata
/// with relative paths). Returns the written paths and the ground truth.
pub fn write_dataset(spec: &SynthSpec, dir: &Path) -> Result<(Vec<PathBuf>, SynthTruth)> {
    let flights = generate(spec)?;
    let io_err = |p: &Path, e: std::io::Error| SynthError::Io { path: p.display().to_string(), message: e.to_string() };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::with_capacity(flights.len() + 1);
    let mut entries = Vec::with_capacity(flights.len());
    for f in &flights {
        let name = format!("flight_{:04}.csv", f.record.flight_id);
        let path = dir.join(&name);
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        write_flight_csv(&f.record, std::io::BufWriter::new(file))?;
        let m = f.record.meta();
        entries.push(FlightEntry {
            flight_id: m.flight_id,
            payload_kg: m.payload_kg,
            altitude_m: m.altitude_m,
            speed_ms: m.speed_ms,
            csv_path: PathBuf::from(name),
        });
        written.push(path);
    }
    let batch = dir.join("flights.json");
    let json = serde_json::to_string_pretty(&entries).expect("entries serialize");
    fs::write(&batch, json + "\n").map_err(|e| io_err(&batch, e))?;
    written.push(batch);
    let truth = SynthTruth {
        laws: spec.laws,
        flight_noise_w: spec.flight_noise_w,
        sample_noise_w: spec.sample_noise_w,
        seed: spec.seed,
        flights: flights
            .iter()
            .map(|f| FlightTruth { flight_id: f.record.flight_id, p_induced: f.p_induced, boundaries: f.truth })
            .collect(),
    };
    Ok((written, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::{detect_regimes, SegmentationParams};

    #[test]
    fn boundaries_match_truth() {
        let spec = SynthSpec { flights: 12, ..SynthSpec::default() };
        for f in generate(&spec).unwrap() {
            let s = detect_regimes(&f.record, &SegmentationParams::default()).unwrap();
            assert_eq!(s[0].start_index, f.truth.takeoff_start);
            assert_eq!(s[1].start_index, f.truth.cruise_start);
            assert_eq!(s[2].start_index, f.truth.landing_start);
            assert_eq!(s[2].end_index, f.truth.touchdown);
        }
    }

    #[test]
    fn noiseless_uniform_slices_carry_true_power() {
        let spec = SynthSpec { flights: 6, ..SynthSpec::default() };
        for f in generate(&spec).unwrap() {
            let s = detect_regimes(&f.record, &SegmentationParams::default()).unwrap();
            for slice in &s {
                let want = f.true_mean_power[slice.regime.index()];
                assert!((slice.mean_power - want).abs() < 1e-9 * want);
            }
        }
    }

    #[test]
    fn same_seed_same_flights() {
        let spec = SynthSpec { flights: 3, flight_noise_w: 5.0, sample_noise_w: 2.0, seed: 11, ..SynthSpec::default() };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec { seed: 12, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap()[0].record, generate(&other).unwrap()[0].record);
    }

    #[test]
    fn zero_duration_is_invalid() {
        let spec = SynthSpec { cruise_distance_m: 0.0, ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::InvalidSpec(_))));
        let spec = SynthSpec { altitudes_m: vec![0.0], ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::InvalidSpec(_))));
        let spec = SynthSpec { flights: 0, ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::InvalidSpec(_))));
    }

    #[test]
    fn grid_cycles_payload_major() {
        let spec = SynthSpec::default();
        assert_eq!(spec.settings(0), (0.0, 25.0, 4.0));
        assert_eq!(spec.settings(1), (0.0, 25.0, 6.0));
        assert_eq!(spec.settings(5), (0.0, 50.0, 4.0));
        assert_eq!(spec.settings(20), (0.25, 25.0, 4.0));
        assert_eq!(spec.settings(60), spec.settings(0));
    }

    #[test]
    fn spec_json_defaults() {
        let spec: SynthSpec = serde_json::from_str(r#"{"flights": 4, "laws": {
            "takeoff": {"b1": 2.0, "b0": 10.0},
            "cruise": {"b1": 2.0, "b0": 10.0},
            "landing": {"b1": 2.0, "b0": 10.0}}}"#)
        .unwrap();
        assert_eq!(spec.flights, 4);
        assert_eq!(spec.laws.cruise.b2, 0.0);
        assert_eq!(spec.sample_rate_hz, 5.0);
    }
}
