//! Flight log ingestion, sensor stream synchronization, electrical power and
//! energy integration.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mandatory canonical flight CSV columns.
pub const MANDATORY_COLUMNS: [&str; 9] = [
    "time_s", "voltage_v", "current_a", "pos_x_m", "pos_y_m", "pos_z_m", "vel_x_ms", "vel_y_ms",
    "vel_z_ms",
];

/// Optional canonical flight CSV columns.
pub const OPTIONAL_COLUMNS: [&str; 5] =
    ["wind_speed_ms", "wind_dir_deg", "roll_deg", "pitch_deg", "yaw_deg"];

/// Largest fraction of malformed rows a file may contain before it is rejected.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("flight has no valid rows")]
    EmptyFlight,
    #[error("{skipped} of {total} rows malformed (limit {:.0}%)", MAX_MALFORMED_FRACTION * 100.0)]
    TooManyMalformed { skipped: usize, total: usize },
    #[error("need at least 2 samples to integrate, got {0}")]
    TooFewSamples(usize),
    #[error("timestamps not strictly increasing at index {0}")]
    NonIncreasingTime(usize),
    #[error("series length mismatch: {0} values vs {1} timestamps")]
    LengthMismatch(usize, usize),
    #[error("streams share no common time window")]
    NoOverlap,
    #[error("invalid synchronization rate {0} Hz")]
    InvalidRate(f64),
    #[error("column `{0}` provided by more than one stream")]
    DuplicateColumn(String),
}

pub type Result<T> = std::result::Result<T, TelemetryError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

/// One synchronized multi-sensor reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetrySample {
    /// Seconds since flight start.
    pub time: f64,
    pub voltage: f64,
    pub current: f64,
    /// East, north and altitude above takeoff, meters.
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub wind_speed: Option<f64>,
    pub wind_direction: Option<f64>,
    pub orientation: Option<Orientation>,
}

impl TelemetrySample {
    pub fn altitude(&self) -> f64 {
        self.position[2]
    }

    pub fn vertical_speed(&self) -> f64 {
        self.velocity[2]
    }
}

/// Experiment settings attached to a flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightMeta {
    pub flight_id: u32,
    pub payload_kg: f64,
    pub altitude_m: f64,
    pub speed_ms: f64,
}

/// Entry of the batch metadata JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightEntry {
    pub flight_id: u32,
    pub payload_kg: f64,
    pub altitude_m: f64,
    pub speed_ms: f64,
    pub csv_path: PathBuf,
}

impl FlightEntry {
    pub fn meta(&self) -> FlightMeta {
        FlightMeta {
            flight_id: self.flight_id,
            payload_kg: self.payload_kg,
            altitude_m: self.altitude_m,
            speed_ms: self.speed_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub flight_id: u32,
    pub samples: Vec<TelemetrySample>,
    pub payload_mass: f64,
    pub target_altitude: f64,
    pub target_speed: f64,
}

impl FlightRecord {
    pub fn new(meta: FlightMeta, samples: Vec<TelemetrySample>) -> Self {
        Self {
            flight_id: meta.flight_id,
            samples,
            payload_mass: meta.payload_kg,
            target_altitude: meta.altitude_m,
            target_speed: meta.speed_ms,
        }
    }

    pub fn meta(&self) -> FlightMeta {
        FlightMeta {
            flight_id: self.flight_id,
            payload_kg: self.payload_mass,
            altitude_m: self.target_altitude,
            speed_ms: self.target_speed,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.samples.iter().map(electrical_power).collect()
    }

    /// Summary over the whole record.
    pub fn summary(&self) -> Result<FlightSummary> {
        FlightSummary::from_series(&self.powers(), &self.times())
    }

    /// Summary over the closed sample range `first..=last`.
    pub fn summary_between(&self, first: usize, last: usize) -> Result<FlightSummary> {
        let window = &self.samples[first..=last];
        let power: Vec<f64> = window.iter().map(electrical_power).collect();
        let times: Vec<f64> = window.iter().map(|s| s.time).collect();
        FlightSummary::from_series(&power, &times)
    }

    /// Mean of the wind speed channel, if recorded.
    pub fn mean_wind_speed(&self) -> Option<f64> {
        let winds: Vec<f64> = self.samples.iter().filter_map(|s| s.wind_speed).collect();
        if winds.is_empty() {
            None
        } else {
            Some(winds.iter().sum::<f64>() / winds.len() as f64)
        }
    }
}

/// Duration, time-weighted mean power and integrated energy of a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightSummary {
    /// Seconds.
    pub duration: f64,
    /// Watts; energy divided by duration.
    pub mean_power: f64,
    /// Joules.
    pub energy: f64,
}

impl FlightSummary {
    pub fn from_series(power: &[f64], times: &[f64]) -> Result<Self> {
        let energy = integrate_energy(power, times)?;
        let duration = times[times.len() - 1] - times[0];
        Ok(Self { duration, mean_power: energy / duration, energy })
    }
}

/// Pack voltage times pack current, in watts.
pub fn electrical_power(sample: &TelemetrySample) -> f64 {
    sample.voltage * sample.current
}

/// Trapezoidal integral of `power` (W) over `times` (s), in joules.
pub fn integrate_energy(power: &[f64], times: &[f64]) -> Result<f64> {
    if power.len() != times.len() {
        return Err(TelemetryError::LengthMismatch(power.len(), times.len()));
    }
    if times.len() < 2 {
        return Err(TelemetryError::TooFewSamples(times.len()));
    }
    let mut energy = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        if !(dt > 0.0) {
            return Err(TelemetryError::NonIncreasingTime(i));
        }
        energy += 0.5 * dt * (power[i] + power[i - 1]);
    }
    Ok(energy)
}

/// Maps canonical column names onto the names used by a particular log
/// source, plus layout options for combined multi-flight files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    /// canonical name -> source column name. Unlisted names map to themselves.
    pub columns: BTreeMap<String, String>,
    /// Rebase altitude so the first sample of each flight sits at zero.
    pub relative_altitude: bool,
    /// Column holding the flight id in combined files.
    pub flight_column: Option<String>,
    pub payload_column: Option<String>,
    /// Multiplier converting the payload column to kg (e.g. 0.001 for grams).
    pub payload_scale: Option<f64>,
    pub altitude_column: Option<String>,
    pub speed_column: Option<String>,
}

impl ColumnMap {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn source_name<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.columns.get(canonical).map(String::as_str).unwrap_or(canonical)
    }
}

/// A parsed flight together with ingestion bookkeeping.
#[derive(Debug, Clone)]
pub struct ParsedFlight {
    pub record: FlightRecord,
    pub total_rows: usize,
    pub skipped_rows: usize,
}

struct ColumnIndex {
    mandatory: [usize; 9],
    optional: [Option<usize>; 5],
}

impl ColumnIndex {
    fn resolve(headers: &csv::StringRecord, map: &ColumnMap) -> Result<Self> {
        let find = |canonical: &str| {
            let name = map.source_name(canonical);
            headers.iter().position(|h| h.trim() == name)
        };
        let mut mandatory = [0usize; 9];
        for (slot, name) in mandatory.iter_mut().zip(MANDATORY_COLUMNS) {
            *slot = find(name).ok_or_else(|| TelemetryError::MissingColumn(name.to_string()))?;
        }
        let mut optional = [None; 5];
        for (slot, name) in optional.iter_mut().zip(OPTIONAL_COLUMNS) {
            *slot = find(name);
        }
        Ok(Self { mandatory, optional })
    }

    fn sample(&self, row: &csv::StringRecord) -> Option<TelemetrySample> {
        let field = |i: usize| -> Option<f64> {
            row.get(i).and_then(|v| v.trim().parse::<f64>().ok()).filter(|v| v.is_finite())
        };
        let mut m = [0.0; 9];
        for (value, &i) in m.iter_mut().zip(&self.mandatory) {
            *value = field(i)?;
        }
        let opt = |k: usize| self.optional[k].and_then(field);
        let orientation = match (opt(2), opt(3), opt(4)) {
            (Some(roll), Some(pitch), Some(yaw)) => Some(Orientation { roll, pitch, yaw }),
            _ => None,
        };
        Some(TelemetrySample {
            time: m[0],
            voltage: m[1],
            current: m[2],
            position: [m[3], m[4], m[5]],
            velocity: [m[6], m[7], m[8]],
            wind_speed: opt(0),
            wind_direction: opt(1),
            orientation,
        })
    }
}

fn finish_samples(
    mut samples: Vec<TelemetrySample>,
    total: usize,
    mut skipped: usize,
    relative_altitude: bool,
) -> Result<(Vec<TelemetrySample>, usize)> {
    samples.sort_by(|a, b| a.time.total_cmp(&b.time));
    let before = samples.len();
    samples.dedup_by(|b, a| b.time <= a.time);
    skipped += before - samples.len();
    if samples.is_empty() {
        return Err(TelemetryError::EmptyFlight);
    }
    if skipped as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(TelemetryError::TooManyMalformed { skipped, total });
    }
    if relative_altitude {
        let z0 = samples[0].position[2];
        for s in &mut samples {
            s.position[2] -= z0;
        }
    }
    Ok((samples, skipped))
}

/// Parse one flight from any reader holding a canonical (or mapped) flight CSV.
pub fn parse_flight_reader<R: Read>(
    reader: R,
    meta: FlightMeta,
    map: &ColumnMap,
) -> Result<ParsedFlight> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index = ColumnIndex::resolve(&headers, map)?;
    let mut samples = Vec::new();
    let mut total = 0;
    let mut skipped = 0;
    for row in rdr.records() {
        total += 1;
        match row.ok().and_then(|r| index.sample(&r)) {
            Some(s) => samples.push(s),
            None => skipped += 1,
        }
    }
    let (samples, skipped_rows) = finish_samples(samples, total, skipped, map.relative_altitude)?;
    Ok(ParsedFlight { record: FlightRecord::new(meta, samples), total_rows: total, skipped_rows })
}

/// Parse one flight CSV file.
pub fn parse_flight_csv(path: &Path, meta: FlightMeta, map: &ColumnMap) -> Result<ParsedFlight> {
    let file = File::open(path).map_err(|source| TelemetryError::Io { path: path.into(), source })?;
    parse_flight_reader(file, meta, map)
}

/// Parse a combined file holding many flights, keyed by `map.flight_column`,
/// with per-row experiment settings in the payload/altitude/speed columns.
pub fn parse_combined_csv(path: &Path, map: &ColumnMap) -> Result<Vec<ParsedFlight>> {
    let file = File::open(path).map_err(|source| TelemetryError::Io { path: path.into(), source })?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = rdr.headers()?.clone();
    let index = ColumnIndex::resolve(&headers, map)?;
    let locate = |name: &Option<String>, fallback: &str| -> Result<usize> {
        let name = name.as_deref().unwrap_or(fallback);
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| TelemetryError::MissingColumn(name.to_string()))
    };
    let flight_col = locate(&map.flight_column, "flight")?;
    let payload_col = locate(&map.payload_column, "payload")?;
    let altitude_col = locate(&map.altitude_column, "altitude")?;
    let speed_col = locate(&map.speed_column, "speed")?;
    let scale = map.payload_scale.unwrap_or(1.0);

    struct Acc {
        meta: FlightMeta,
        samples: Vec<TelemetrySample>,
        total: usize,
        skipped: usize,
    }
    let mut flights: BTreeMap<u32, Acc> = BTreeMap::new();
    for row in rdr.records() {
        let Ok(row) = row else { continue };
        let num = |i: usize| row.get(i).and_then(|v| v.trim().parse::<f64>().ok());
        let Some(id) = num(flight_col).filter(|v| *v >= 0.0).map(|v| v as u32) else { continue };
        let acc = flights.entry(id).or_insert_with(|| Acc {
            meta: FlightMeta {
                flight_id: id,
                payload_kg: num(payload_col).unwrap_or(0.0) * scale,
                altitude_m: num(altitude_col).unwrap_or(f64::NAN),
                speed_ms: num(speed_col).unwrap_or(f64::NAN),
            },
            samples: Vec::new(),
            total: 0,
            skipped: 0,
        });
        acc.total += 1;
        match index.sample(&row) {
            Some(s) => acc.samples.push(s),
            None => acc.skipped += 1,
        }
    }
    flights
        .into_values()
        .map(|acc| {
            let (samples, skipped_rows) =
                finish_samples(acc.samples, acc.total, acc.skipped, map.relative_altitude)?;
            Ok(ParsedFlight {
                record: FlightRecord::new(acc.meta, samples),
                total_rows: acc.total,
                skipped_rows,
            })
        })
        .collect()
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| TelemetryError::Io { path: path.into(), source })
}

/// Read the batch metadata array. Relative `csv_path`s are resolved against
/// `data_dir` when given, otherwise against the JSON file's directory.
pub fn load_batch(json_path: &Path, data_dir: Option<&Path>) -> Result<Vec<FlightEntry>> {
    let text = read_to_string(json_path)?;
    let mut entries: Vec<FlightEntry> = serde_json::from_str(&text)?;
    let base = match data_dir {
        Some(dir) => dir.to_path_buf(),
        None => json_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    for e in &mut entries {
        if e.csv_path.is_relative() {
            e.csv_path = base.join(&e.csv_path);
        }
    }
    Ok(entries)
}

/// Write a record as a canonical flight CSV. Optional columns are emitted
/// when every sample carries them.
pub fn write_flight_csv<W: Write>(record: &FlightRecord, writer: W) -> Result<()> {
    let has_wind = record.samples.iter().all(|s| s.wind_speed.is_some() && s.wind_direction.is_some());
    let has_orientation = record.samples.iter().all(|s| s.orientation.is_some());
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = MANDATORY_COLUMNS.to_vec();
    if has_wind {
        header.extend(&OPTIONAL_COLUMNS[..2]);
    }
    if has_orientation {
        header.extend(&OPTIONAL_COLUMNS[2..]);
    }
    wtr.write_record(&header)?;
    for s in &record.samples {
        let mut row = vec![
            s.time, s.voltage, s.current, s.position[0], s.position[1], s.position[2], s.velocity[0],
            s.velocity[1], s.velocity[2],
        ];
        if has_wind {
            row.push(s.wind_speed.unwrap_or_default());
            row.push(s.wind_direction.unwrap_or_default());
        }
        if let (true, Some(o)) = (has_orientation, s.orientation) {
            row.extend([o.roll, o.pitch, o.yaw]);
        }
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wtr.flush().map_err(|source| TelemetryError::Io { path: PathBuf::from("<writer>"), source })?;
    Ok(())
}

/// One sensor's time-ordered readings, any number of named channels.
#[derive(Debug, Clone, Default)]
pub struct SensorStream {
    pub times: Vec<f64>,
    pub columns: BTreeMap<String, Vec<f64>>,
}

impl SensorStream {
    pub fn new(times: Vec<f64>) -> Self {
        Self { times, columns: BTreeMap::new() }
    }

    pub fn with_column(mut self, name: &str, values: Vec<f64>) -> Self {
        self.columns.insert(name.to_string(), values);
        self
    }
}

/// Streams resampled onto a shared uniform timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncedTable {
    pub times: Vec<f64>,
    pub columns: BTreeMap<String, Vec<f64>>,
}

/// Resample every stream onto a common uniform timeline at `rate` Hz.
///
/// Each output value is taken from the nearest source sample when one lies
/// within half a period of the output time; otherwise it is linearly
/// interpolated between the bracketing source samples. Output times outside
/// the window covered by every stream are dropped.
pub fn synchronize_streams(streams: &[SensorStream], rate: f64) -> Result<SyncedTable> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(TelemetryError::InvalidRate(rate));
    }
    let mut start = f64::NEG_INFINITY;
    let mut end = f64::INFINITY;
    for s in streams {
        if s.times.is_empty() {
            return Err(TelemetryError::NoOverlap);
        }
        if let Some(values) = s.columns.values().find(|v| v.len() != s.times.len()) {
            return Err(TelemetryError::LengthMismatch(values.len(), s.times.len()));
        }
        if let Some(i) = s.times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(TelemetryError::NonIncreasingTime(i + 1));
        }
        start = start.max(s.times[0]);
        end = end.min(s.times[s.times.len() - 1]);
    }
    if streams.is_empty() || start > end {
        return Err(TelemetryError::NoOverlap);
    }
    let n = ((end - start) * rate + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..n).map(|k| start + k as f64 / rate).collect();
    let half = 0.5 / rate;

    let mut columns = BTreeMap::new();
    for s in streams {
        for (name, values) in &s.columns {
            let resampled: Vec<f64> =
                times.iter().map(|&t| resample_at(&s.times, values, t, half)).collect();
            if columns.insert(name.clone(), resampled).is_some() {
                return Err(TelemetryError::DuplicateColumn(name.clone()));
            }
        }
    }
    Ok(SyncedTable { times, columns })
}

fn resample_at(times: &[f64], values: &[f64], t: f64, half: f64) -> f64 {
    let hi = times.partition_point(|&x| x < t);
    if hi == 0 {
        return values[0];
    }
    if hi == times.len() {
        return values[times.len() - 1];
    }
    let lo = hi - 1;
    let (d_lo, d_hi) = (t - times[lo], times[hi] - t);
    let nearest = if d_hi <= d_lo { hi } else { lo };
    if d_lo.min(d_hi) <= half + 1e-12 {
        return values[nearest];
    }
    let w = d_lo / (times[hi] - times[lo]);
    values[lo] + w * (values[hi] - values[lo])
}

/// Synchronize streams and map the result onto the canonical sample layout.
pub fn synchronize_flight(streams: &[SensorStream], rate: f64, meta: FlightMeta) -> Result<FlightRecord> {
    let table = synchronize_streams(streams, rate)?;
    let column = |name: &str| -> Result<&Vec<f64>> {
        table.columns.get(name).ok_or_else(|| TelemetryError::MissingColumn(name.to_string()))
    };
    let mandatory: Vec<&Vec<f64>> =
        MANDATORY_COLUMNS[1..].iter().map(|c| column(c)).collect::<Result<_>>()?;
    let optional: Vec<Option<&Vec<f64>>> =
        OPTIONAL_COLUMNS.iter().map(|c| table.columns.get(*c)).collect();
    let samples = table
        .times
        .iter()
        .enumerate()
        .map(|(k, &time)| {
            let m = |c: usize| mandatory[c][k];
            let o = |c: usize| optional[c].map(|v| v[k]);
            let orientation = match (o(2), o(3), o(4)) {
                (Some(roll), Some(pitch), Some(yaw)) => Some(Orientation { roll, pitch, yaw }),
                _ => None,
            };
            TelemetrySample {
                time,
                voltage: m(0),
                current: m(1),
                position: [m(2), m(3), m(4)],
                velocity: [m(5), m(6), m(7)],
                wind_speed: o(0),
                wind_direction: o(1),
                orientation,
            }
        })
        .collect();
    Ok(FlightRecord::new(meta, samples))
}
