//! Takeoff / cruise / landing regime detection.
//!
//! Boundaries are found from the altitude and vertical-speed channels:
//!
//! - takeoff starts at the first sustained climb (`vz > v_up_thresh`);
//! - cruise starts once altitude is within `alt_tol` of the cruise altitude
//!   and `|vz| < v_settle`, sustained;
//! - landing starts where the final sustained descent run (`vz < -v_down_thresh`) begins;
//! - the flight ends at touchdown (`alt < touchdown_alt` and `|vz| < touchdown_speed`).
//!
//! "Sustained" means the condition holds for every sample in the following
//! `min_dwell` seconds, which suppresses single-sample sensor jitter.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::telemetry::{FlightRecord, FlightSummary, TelemetryError};

#[derive(Debug, Error)]
pub enum SegmentationError {
    #[error("flight has {samples} samples, need at least {needed}")]
    TooShort { samples: usize, needed: usize },
    #[error("no flight detected: altitude never exceeds {0} m")]
    NoFlightDetected(f64),
    #[error("ambiguous profile: {0}")]
    AmbiguousProfile(String),
    #[error("incomplete profile: {0}")]
    IncompleteProfile(&'static str),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Takeoff,
    Cruise,
    Landing,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Takeoff, Regime::Cruise, Regime::Landing];

    pub fn index(self) -> usize {
        match self {
            Regime::Takeoff => 0,
            Regime::Cruise => 1,
            Regime::Landing => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Takeoff => "takeoff",
            Regime::Cruise => "cruise",
            Regime::Landing => "landing",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "takeoff" => Ok(Regime::Takeoff),
            "cruise" => Ok(Regime::Cruise),
            "landing" => Ok(Regime::Landing),
            other => Err(format!("unknown regime `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationParams {
    /// m/s
    pub v_up_thresh: f64,
    /// m/s, magnitude
    pub v_down_thresh: f64,
    /// s
    pub min_dwell: f64,
    /// m
    pub alt_tol: f64,
    /// m/s
    pub v_settle: f64,
    /// m
    pub touchdown_alt: f64,
    /// m/s
    pub touchdown_speed: f64,
    /// Altitude a record must exceed to count as a flight, m.
    pub min_flight_alt: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            v_up_thresh: 0.3,
            v_down_thresh: 0.3,
            min_dwell: 1.0,
            alt_tol: 2.0,
            v_settle: 0.5,
            touchdown_alt: 1.0,
            touchdown_speed: 0.2,
            min_flight_alt: 3.0,
        }
    }
}

/// A contiguous `[start_index, end_index)` window labeled with one regime.
///
/// The window spans times `times[start_index]..times[end_index]`; its
/// energy is integrated over samples `start_index..=end_index`, so adjacent
/// slices share their boundary sample and their energies add up to the
/// whole-flight integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSlice {
    pub regime: Regime,
    pub start_index: usize,
    pub end_index: usize,
    pub start_time: f64,
    pub end_time: f64,
    pub duration: f64,
    pub mean_power: f64,
    pub energy: f64,
}

impl RegimeSlice {
    fn closing_index(&self, len: usize) -> usize {
        self.end_index.min(len - 1)
    }
}

struct Channels<'a> {
    flight: &'a FlightRecord,
    dwell: f64,
}

impl Channels<'_> {
    fn len(&self) -> usize {
        self.flight.samples.len()
    }

    fn t(&self, i: usize) -> f64 {
        self.flight.samples[i].time
    }

    fn alt(&self, i: usize) -> f64 {
        self.flight.samples[i].altitude()
    }

    fn vz(&self, i: usize) -> f64 {
        self.flight.samples[i].vertical_speed()
    }

    /// `cond` holds at every sample in `[t_i, t_i + dwell)`; windows running
    /// off the end of the record are truncated.
    fn sustained(&self, i: usize, cond: impl Fn(usize) -> bool) -> bool {
        let horizon = self.t(i) + self.dwell - 1e-9;
        (i..self.len()).take_while(|&k| self.t(k) < horizon).all(cond)
    }

    fn first_sustained(&self, from: usize, cond: impl Fn(usize) -> bool + Copy) -> Option<usize> {
        (from..self.len()).find(|&i| cond(i) && self.sustained(i, cond))
    }
}

/// Split a flight into takeoff, cruise and landing slices.
pub fn detect_regimes(
    flight: &FlightRecord,
    params: &SegmentationParams,
) -> Result<[RegimeSlice; 3], SegmentationError> {
    let n = flight.samples.len();
    let needed = min_samples(flight, params);
    if n < needed {
        return Err(SegmentationError::TooShort { samples: n, needed });
    }
    let ch = Channels { flight, dwell: params.min_dwell };
    let max_alt = (0..n).map(|i| ch.alt(i)).fold(f64::NEG_INFINITY, f64::max);
    if !(max_alt > params.min_flight_alt) {
        return Err(SegmentationError::NoFlightDetected(params.min_flight_alt));
    }

    let cycles = airborne_cycles(&ch, params.min_flight_alt);
    if cycles > 1 {
        return Err(SegmentationError::AmbiguousProfile(format!("{cycles} separate climb/descent cycles")));
    }

    let reference = cruise_reference_altitude(flight.target_altitude, max_alt, params.alt_tol);

    let takeoff_start = ch
        .first_sustained(0, |k| ch.vz(k) > params.v_up_thresh)
        .ok_or(SegmentationError::IncompleteProfile("no sustained climb"))?;
    let cruise_start = ch
        .first_sustained(takeoff_start + 1, |k| {
            ch.alt(k) >= reference - params.alt_tol && ch.vz(k).abs() < params.v_settle
        })
        .ok_or(SegmentationError::IncompleteProfile("never settles at cruise altitude"))?;

    let descending = |k: usize| ch.vz(k) < -params.v_down_thresh;
    let last_descent = (cruise_start..n)
        .rev()
        .find(|&k| descending(k))
        .ok_or(SegmentationError::IncompleteProfile("no final descent"))?;
    let landing_start = descent_run_start(&ch, last_descent, cruise_start, &descending);
    if landing_start <= cruise_start || !ch.sustained(landing_start, descending) {
        return Err(SegmentationError::IncompleteProfile("no sustained final descent after cruise"));
    }
    let touchdown = ch
        .first_sustained(landing_start + 1, |k| {
            ch.alt(k) < params.touchdown_alt && ch.vz(k).abs() < params.touchdown_speed
        })
        .unwrap_or(n - 1);
    if touchdown <= landing_start {
        return Err(SegmentationError::IncompleteProfile("touchdown precedes descent"));
    }

    let bounds = [
        (Regime::Takeoff, takeoff_start, cruise_start),
        (Regime::Cruise, cruise_start, landing_start),
        (Regime::Landing, landing_start, touchdown),
    ];
    let mut out = Vec::with_capacity(3);
    for (regime, start, end) in bounds {
        out.push(make_slice(flight, regime, start, end)?);
    }
    Ok([out[0], out[1], out[2]])
}

fn min_samples(flight: &FlightRecord, params: &SegmentationParams) -> usize {
    let times = flight.times();
    if times.len() < 2 {
        return 3;
    }
    let mut dts: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    dts.sort_by(f64::total_cmp);
    let median = dts[dts.len() / 2];
    let per_dwell = if median > 0.0 { (params.min_dwell / median).round().max(1.0) } else { 1.0 };
    3 * per_dwell as usize
}

/// Target altitude when it is known and reached, otherwise the highest altitude flown.
fn cruise_reference_altitude(target: f64, max_alt: f64, tol: f64) -> f64 {
    if target.is_finite() && target > 0.0 && max_alt >= target - tol {
        target
    } else {
        max_alt
    }
}

/// Number of distinct sustained excursions above `floor`.
fn airborne_cycles(ch: &Channels<'_>, floor: f64) -> usize {
    let mut airborne = false;
    let mut cycles = 0;
    for i in 0..ch.len() {
        if !airborne && ch.alt(i) > floor && ch.sustained(i, |k| ch.alt(k) > floor) {
            airborne = true;
            cycles += 1;
        } else if airborne && ch.alt(i) <= floor && ch.sustained(i, |k| ch.alt(k) <= floor) {
            airborne = false;
        }
    }
    cycles
}

/// Walk back from `last` to the start of its descent run. Gaps shorter than
/// the dwell time are bridged.
fn descent_run_start(ch: &Channels<'_>, last: usize, floor: usize, descending: &impl Fn(usize) -> bool) -> usize {
    let mut start = last;
    let mut k = last;
    while k > floor {
        k -= 1;
        if descending(k) {
            start = k;
        } else if ch.t(start) - ch.t(k) >= ch.dwell - 1e-9 {
            break;
        }
    }
    start
}

fn make_slice(
    flight: &FlightRecord,
    regime: Regime,
    start: usize,
    end: usize,
) -> Result<RegimeSlice, SegmentationError> {
    let mut slice = RegimeSlice {
        regime,
        start_index: start,
        end_index: end,
        start_time: flight.samples[start].time,
        end_time: flight.samples[end.min(flight.len() - 1)].time,
        duration: 0.0,
        mean_power: 0.0,
        energy: 0.0,
    };
    let summary = regime_summary(flight, &slice)?;
    slice.duration = summary.duration;
    slice.mean_power = summary.mean_power;
    slice.energy = summary.energy;
    Ok(slice)
}

/// Duration, mean power and trapezoidal energy of one slice.
pub fn regime_summary(flight: &FlightRecord, slice: &RegimeSlice) -> Result<FlightSummary, TelemetryError> {
    flight.summary_between(slice.start_index, slice.closing_index(flight.len()))
}

/// Serialized per-flight segmentation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub flight_id: u32,
    pub slices: Vec<SliceReport>,
    pub params: SegmentationParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub regime: Regime,
    pub start_s: f64,
    pub end_s: f64,
    pub duration_s: f64,
    pub mean_power_w: f64,
    pub energy_j: f64,
}

impl SegmentationReport {
    pub fn new(flight_id: u32, slices: &[RegimeSlice; 3], params: SegmentationParams) -> Self {
        Self {
            flight_id,
            slices: slices
                .iter()
                .map(|s| SliceReport {
                    regime: s.regime,
                    start_s: s.start_time,
                    end_s: s.end_time,
                    duration_s: s.duration,
                    mean_power_w: s.mean_power,
                    energy_j: s.energy,
                })
                .collect(),
            params,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::{FlightMeta, TelemetrySample};

    fn sample(time: f64, alt: f64, vz: f64, power: f64) -> TelemetrySample {
        TelemetrySample {
            time,
            voltage: 20.0,
            current: power / 20.0,
            position: [0.0, 0.0, alt],
            velocity: [0.0, 0.0, vz],
            wind_speed: None,
            wind_direction: None,
            orientation: None,
        }
    }

    /// 5 s on the ground, climb 2.5 m/s to 100 m, 60 s cruise, descend at
    /// 2 m/s, 5 s on the ground; 5 Hz.
    fn trapezoid() -> FlightRecord {
        let samples = (0..=800)
            .map(|k| {
                let t = k as f64 * 0.2;
                let (alt, vz) = if t < 5.0 {
                    (0.0, 0.0)
                } else if t < 45.0 {
                    (2.5 * (t - 5.0), 2.5)
                } else if t < 105.0 {
                    (100.0, 0.0)
                } else if t < 155.0 {
                    (100.0 - 2.0 * (t - 105.0), -2.0)
                } else {
                    (0.0, 0.0)
                };
                sample(t, alt, vz, 200.0)
            })
            .collect();
        FlightRecord::new(FlightMeta { flight_id: 9, payload_kg: 0.0, altitude_m: 100.0, speed_ms: 8.0 }, samples)
    }

    #[test]
    fn trapezoid_boundaries() {
        let f = trapezoid();
        let s = detect_regimes(&f, &SegmentationParams::default()).unwrap();
        assert_eq!(s[0].start_index, 25);
        assert_eq!(s[1].start_index, 225); // t = 45 s, 40 s after climb start
        assert_eq!(s[2].start_index, 525); // t = 105 s
        assert_eq!(s[2].end_index, 775); // touchdown at t = 155 s
        assert!((s[0].duration - 40.0).abs() < 1e-9);
        assert!((s[1].duration - 60.0).abs() < 1e-9);
        assert!((s[2].duration - 50.0).abs() < 1e-9);
    }

    #[test]
    fn all_zero_altitude_is_no_flight() {
        let samples = (0..100).map(|k| sample(k as f64 * 0.2, 0.0, 0.0, 10.0)).collect();
        let f = FlightRecord::new(FlightMeta { flight_id: 1, payload_kg: 0.0, altitude_m: 25.0, speed_ms: 4.0 }, samples);
        assert!(matches!(
            detect_regimes(&f, &SegmentationParams::default()),
            Err(SegmentationError::NoFlightDetected(_))
        ));
    }

    #[test]
    fn too_short_record() {
        let samples = (0..5).map(|k| sample(k as f64 * 0.2, 10.0, 0.0, 10.0)).collect();
        let f = FlightRecord::new(FlightMeta { flight_id: 1, payload_kg: 0.0, altitude_m: 25.0, speed_ms: 4.0 }, samples);
        assert!(matches!(
            detect_regimes(&f, &SegmentationParams::default()),
            Err(SegmentationError::TooShort { samples: 5, needed: 15 })
        ));
    }

    #[test]
    fn double_hop_is_ambiguous() {
        let mut f = trapezoid();
        let n = f.samples.len();
        let hop: Vec<TelemetrySample> = f.samples.clone();
        for mut s in hop {
            s.time += n as f64 * 0.2;
            f.samples.push(s);
        }
        assert!(matches!(
            detect_regimes(&f, &SegmentationParams::default()),
            Err(SegmentationError::AmbiguousProfile(_))
        ));
    }

    #[test]
    fn single_sample_jitter_is_ignored() {
        let mut f = trapezoid();
        // one spurious climb reading on the ground before takeoff
        f.samples[10].velocity[2] = 1.0;
        // one spurious sink reading mid-cruise
        f.samples[400].velocity[2] = -1.0;
        let s = detect_regimes(&f, &SegmentationParams::default()).unwrap();
        assert_eq!(s[0].start_index, 25);
        assert_eq!(s[2].start_index, 525);
    }

    #[test]
    fn constant_power_slice_summary() {
        let samples = (0..=50).map(|k| sample(k as f64 * 0.2, 0.0, 0.0, 200.0)).collect();
        let f = FlightRecord::new(FlightMeta { flight_id: 1, payload_kg: 0.0, altitude_m: 25.0, speed_ms: 4.0 }, samples);
        let slice = make_slice(&f, Regime::Cruise, 0, 50).unwrap();
        assert!((slice.duration - 10.0).abs() < 1e-9);
        assert!((slice.mean_power - 200.0).abs() < 1e-9);
        assert!((slice.energy - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn whole_flight_slice_matches_flight_summary() {
        let f = trapezoid();
        let slice = make_slice(&f, Regime::Cruise, 0, f.len()).unwrap();
        let whole = f.summary().unwrap();
        assert_eq!(regime_summary(&f, &slice).unwrap(), whole);
    }

    #[test]
    fn ramp_slice_has_analytic_mean() {
        // P(t) = 100 + 4t over [0, 10]: mean is 100 + 4·5 = 120 W.
        let samples = (0..=50)
            .map(|k| {
                let t = k as f64 * 0.2;
                sample(t, 0.0, 0.0, 100.0 + 4.0 * t)
            })
            .collect();
        let f = FlightRecord::new(FlightMeta { flight_id: 1, payload_kg: 0.0, altitude_m: 25.0, speed_ms: 4.0 }, samples);
        let slice = make_slice(&f, Regime::Takeoff, 0, 50).unwrap();
        assert!((slice.mean_power - 120.0).abs() < 1e-9);
    }

    #[test]
    fn report_round_trips_through_json() {
        let f = trapezoid();
        let params = SegmentationParams::default();
        let s = detect_regimes(&f, &params).unwrap();
        let report = SegmentationReport::new(f.flight_id, &s, params);
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"regime\":\"takeoff\""));
        let back: SegmentationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn regime_parses_from_str() {
        assert_eq!("Cruise".parse::<Regime>().unwrap(), Regime::Cruise);
        assert!("hover".parse::<Regime>().is_err());
    }
}
