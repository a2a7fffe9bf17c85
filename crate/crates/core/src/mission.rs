//! Forward use of the fitted regime models: round-trip mission energy,
//! closed-form two-way range and per-km energy intensity.
//!
//! A delivery mission is a loaded leg (takeoff, cruise, landing with the
//! payload) followed by an unloaded return leg. Vertical segments last
//! `altitude / vertical_speed`; cruise lasts `distance / cruise_speed` per leg.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{predict_mean_power, RegimeModel, RegimeModelSet};
use crate::physics::{induced_power, DroneConfig, Environment, PhysicsError};
use crate::segmentation::Regime;
use crate::J_PER_WH;

/// Cruise speeds above this are outside the range the model was fitted on, m/s.
pub const MAX_VALIDATED_CRUISE_SPEED: f64 = 12.0;

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("speed must be positive, got {0} m/s")]
    ZeroSpeed(f64),
    #[error("takeoff and landing need {vertical_wh:.3} Wh but only {e_max_wh:.3} Wh available")]
    InsufficientBattery { vertical_wh: f64, e_max_wh: f64 },
    #[error("cruise power is not positive ({0} W); range undefined")]
    NonPositiveCruisePower(f64),
    #[error("distance must be positive for an intensity")]
    ZeroDistance,
    #[error("invalid mission: {0}")]
    InvalidMission(String),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

pub type Result<T> = std::result::Result<T, MissionError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissionSpec {
    /// kg
    pub payload_mass: f64,
    /// m/s
    pub cruise_speed: f64,
    /// m
    pub cruise_altitude: f64,
    /// m/s
    pub takeoff_speed: f64,
    /// m/s
    pub landing_speed: f64,
    /// Origin to destination, km. The return leg covers the same distance.
    pub one_way_distance: f64,
}

impl Default for MissionSpec {
    fn default() -> Self {
        Self {
            payload_mass: 1.0,
            cruise_speed: 12.0,
            cruise_altitude: 100.0,
            takeoff_speed: 2.5,
            landing_speed: 2.0,
            one_way_distance: 0.0,
        }
    }
}

impl MissionSpec {
    fn validate(&self) -> Result<()> {
        for v in [self.cruise_speed, self.takeoff_speed, self.landing_speed] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MissionError::ZeroSpeed(v));
            }
        }
        if !(self.cruise_altitude >= 0.0) {
            return Err(MissionError::InvalidMission(format!("altitude {}", self.cruise_altitude)));
        }
        if !(self.payload_mass >= 0.0) {
            return Err(MissionError::InvalidMission(format!("payload {}", self.payload_mass)));
        }
        if !(self.one_way_distance >= 0.0) {
            return Err(MissionError::InvalidMission(format!("distance {}", self.one_way_distance)));
        }
        Ok(())
    }

    pub fn with_distance(mut self, one_way_km: f64) -> Self {
        self.one_way_distance = one_way_km;
        self
    }
}

/// Notes for missions outside the validated domain of the model.
pub fn validity_warnings(mission: &MissionSpec) -> Vec<String> {
    let mut out = Vec::new();
    if mission.cruise_speed > MAX_VALIDATED_CRUISE_SPEED {
        out.push(format!(
            "cruise speed {} m/s exceeds the {} m/s fitted range; estimates are extrapolated",
            mission.cruise_speed, MAX_VALIDATED_CRUISE_SPEED
        ));
    }
    out
}

/// Six-term round-trip energy, Wh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub takeoff_loaded: f64,
    pub takeoff_unloaded: f64,
    pub cruise_loaded: f64,
    pub cruise_unloaded: f64,
    pub landing_loaded: f64,
    pub landing_unloaded: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn vertical(&self) -> f64 {
        self.takeoff_loaded + self.takeoff_unloaded + self.landing_loaded + self.landing_unloaded
    }

    pub fn cruise(&self) -> f64 {
        self.cruise_loaded + self.cruise_unloaded
    }
}

/// Energy of a climb or descent through `altitude` at `speed`, Wh.
pub fn vertical_segment_energy(model: &RegimeModel, p_induced: f64, altitude: f64, speed: f64) -> Result<f64> {
    if !(speed > 0.0) {
        return Err(MissionError::ZeroSpeed(speed));
    }
    Ok(predict_mean_power(model, p_induced) * (altitude / speed) / J_PER_WH)
}

/// Induced power on the loaded and the unloaded leg.
fn leg_powers(mission: &MissionSpec, config: &DroneConfig, env: &Environment) -> Result<(f64, f64)> {
    let loaded = induced_power(config.empty_mass + mission.payload_mass, env, config)?;
    let unloaded = induced_power(config.empty_mass, env, config)?;
    Ok((loaded, unloaded))
}

fn vertical_terms(models: &RegimeModelSet, m: &MissionSpec, p_l: f64, p_u: f64) -> Result<[f64; 4]> {
    let tk = models.get(Regime::Takeoff);
    let ld = models.get(Regime::Landing);
    let h = m.cruise_altitude;
    Ok([
        vertical_segment_energy(tk, p_l, h, m.takeoff_speed)?,
        vertical_segment_energy(tk, p_u, h, m.takeoff_speed)?,
        vertical_segment_energy(ld, p_l, h, m.landing_speed)?,
        vertical_segment_energy(ld, p_u, h, m.landing_speed)?,
    ])
}

/// Round-trip energy: loaded outbound leg, unloaded return leg.
pub fn mission_energy(
    models: &RegimeModelSet,
    mission: &MissionSpec,
    config: &DroneConfig,
    env: &Environment,
) -> Result<EnergyBreakdown> {
    mission.validate()?;
    let (p_l, p_u) = leg_powers(mission, config, env)?;
    let [tk_l, tk_u, ld_l, ld_u] = vertical_terms(models, mission, p_l, p_u)?;
    let cruise = models.get(Regime::Cruise);
    let cruise_time = mission.one_way_distance * 1000.0 / mission.cruise_speed;
    let cr_l = predict_mean_power(cruise, p_l) * cruise_time / J_PER_WH;
    let cr_u = predict_mean_power(cruise, p_u) * cruise_time / J_PER_WH;
    Ok(EnergyBreakdown {
        takeoff_loaded: tk_l,
        takeoff_unloaded: tk_u,
        cruise_loaded: cr_l,
        cruise_unloaded: cr_u,
        landing_loaded: ld_l,
        landing_unloaded: ld_u,
        total: tk_l + tk_u + cr_l + cr_u + ld_l + ld_u,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeResult {
    /// Out-and-back distance, km.
    pub two_way_km: f64,
    /// Origin-to-destination distance, km.
    pub delivery_km: f64,
    /// Takeoff plus landing energy for both legs, Wh.
    pub vertical_wh: f64,
    /// Loaded plus unloaded cruise power, W.
    pub cruise_power_w: f64,
    pub e_max_wh: f64,
}

/// Largest mission distance whose round-trip energy equals `e_max_wh`.
///
/// Solving the six-term energy for the cruise distance gives
/// `d = (E_max − E_vertical)·V_cr / (b1·(P_i^l + P_i^u) + 2·b0)` per leg.
/// `mission.one_way_distance` is ignored.
pub fn two_way_range(
    models: &RegimeModelSet,
    mission: &MissionSpec,
    config: &DroneConfig,
    env: &Environment,
    e_max_wh: f64,
) -> Result<RangeResult> {
    let m = mission.with_distance(0.0);
    m.validate()?;
    let (p_l, p_u) = leg_powers(&m, config, env)?;
    let vertical_wh: f64 = vertical_terms(models, &m, p_l, p_u)?.iter().sum();
    if vertical_wh > e_max_wh {
        return Err(MissionError::InsufficientBattery { vertical_wh, e_max_wh });
    }
    let cruise = models.get(Regime::Cruise);
    let cruise_power_w = cruise.b1 * (p_l + p_u) + 2.0 * cruise.b0;
    if !(cruise_power_w > 0.0) {
        return Err(MissionError::NonPositiveCruisePower(cruise_power_w));
    }
    let delivery_m = (e_max_wh - vertical_wh) * J_PER_WH * m.cruise_speed / cruise_power_w;
    let delivery_km = delivery_m / 1000.0;
    Ok(RangeResult { two_way_km: 2.0 * delivery_km, delivery_km, vertical_wh, cruise_power_w, e_max_wh })
}

/// Round-trip energy per round-trip km, MJ/km, at the vehicle (before
/// charging and transmission losses).
pub fn per_km_intensity(
    models: &RegimeModelSet,
    mission: &MissionSpec,
    config: &DroneConfig,
    env: &Environment,
) -> Result<f64> {
    if !(mission.one_way_distance > 0.0) {
        return Err(MissionError::ZeroDistance);
    }
    let e = mission_energy(models, mission, config, env)?;
    Ok(e.total * J_PER_WH / 1e6 / (2.0 * mission.one_way_distance))
}

/// One point of the energy-vs-distance sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Loaded total mass, kg.
    pub mass: f64,
    pub speed: f64,
    /// One-way delivery distance, km.
    pub distance: f64,
    pub energy_wh: f64,
}

/// Round-trip energy over a grid of payloads, cruise speeds and distances.
/// Points needing more than `e_max_wh` are dropped.
pub fn energy_sweep(
    models: &RegimeModelSet,
    base: &MissionSpec,
    config: &DroneConfig,
    env: &Environment,
    payloads: &[f64],
    speeds: &[f64],
    distances: &[f64],
    e_max_wh: f64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &payload in payloads {
        for &speed in speeds {
            for &distance in distances {
                let m = MissionSpec { payload_mass: payload, cruise_speed: speed, one_way_distance: distance, ..*base };
                let e = mission_energy(models, &m, config, env)?;
                if e.total <= e_max_wh {
                    rows.push(SweepRow { mass: config.empty_mass + payload, speed, distance, energy_wh: e.total });
                }
            }
        }
    }
    Ok(rows)
}

/// Reference figures the default drone profile is calibrated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeAnchors {
    pub mission: MissionSpec,
    pub battery_wh: f64,
    /// Distance at which the round-trip energy is quoted, km one way.
    pub quoted_distance_km: f64,
    pub round_trip_wh: f64,
    pub two_way_km: f64,
    pub vertical_wh: f64,
    /// Takeoff/landing altitude of the low-altitude variant, m.
    pub low_altitude_m: f64,
    pub low_altitude_round_trip_wh: f64,
    pub low_altitude_delivery_km: f64,
}

impl Default for RangeAnchors {
    fn default() -> Self {
        Self {
            mission: MissionSpec::default(),
            battery_wh: 130.0,
            quoted_distance_km: 5.5,
            round_trip_wh: 120.0,
            two_way_km: 11.0,
            vertical_wh: 19.4,
            low_altitude_m: 5.0,
            low_altitude_round_trip_wh: 102.0,
            low_altitude_delivery_km: 6.7,
        }
    }
}

/// Model outputs compared against [`RangeAnchors`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorMetrics {
    pub round_trip_wh: f64,
    pub two_way_km: f64,
    pub vertical_wh: f64,
    pub low_altitude_round_trip_wh: f64,
    pub low_altitude_delivery_km: f64,
}

impl AnchorMetrics {
    pub fn evaluate(models: &RegimeModelSet, a: &RangeAnchors, config: &DroneConfig, env: &Environment) -> Result<Self> {
        let quoted = a.mission.with_distance(a.quoted_distance_km);
        let low = MissionSpec { cruise_altitude: a.low_altitude_m, ..quoted };
        let energy = mission_energy(models, &quoted, config, env)?;
        let range = two_way_range(models, &a.mission, config, env, a.battery_wh)?;
        let low_energy = mission_energy(models, &low, config, env)?;
        let low_range = two_way_range(models, &low, config, env, a.battery_wh)?;
        Ok(Self {
            round_trip_wh: energy.total,
            two_way_km: range.two_way_km,
            vertical_wh: energy.vertical(),
            low_altitude_round_trip_wh: low_energy.total,
            low_altitude_delivery_km: low_range.delivery_km,
        })
    }

    /// Largest relative deviation from the anchors.
    pub fn max_deviation(&self, a: &RangeAnchors) -> f64 {
        [
            (self.round_trip_wh, a.round_trip_wh),
            (self.two_way_km, a.two_way_km),
            (self.vertical_wh, a.vertical_wh),
            (self.low_altitude_round_trip_wh, a.low_altitude_round_trip_wh),
            (self.low_altitude_delivery_km, a.low_altitude_delivery_km),
        ]
        .iter()
        .map(|(got, want)| (got / want - 1.0).abs())
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub config: DroneConfig,
    pub metrics: AnchorMetrics,
    pub max_deviation: f64,
}

/// Fit the empty mass (rotor area held at `base.rotor_area_total`) that
/// minimizes the largest relative deviation from the anchors.
///
/// Grid scan at 1 g resolution over 0.5–10 kg, then golden-section
/// refinement around the best grid point.
pub fn calibrate_empty_mass(
    models: &RegimeModelSet,
    anchors: &RangeAnchors,
    base: &DroneConfig,
    env: &Environment,
) -> Result<Calibration> {
    let objective = |mass: f64| -> f64 {
        let cfg = DroneConfig { empty_mass: mass, ..base.clone() };
        AnchorMetrics::evaluate(models, anchors, &cfg, env).map_or(f64::INFINITY, |m| m.max_deviation(anchors))
    };
    let step = 1e-3;
    let (mut best_mass, mut best_dev) = (f64::NAN, f64::INFINITY);
    for k in 0..=9500 {
        let mass = 0.5 + k as f64 * step;
        let dev = objective(mass);
        if dev < best_dev {
            best_mass = mass;
            best_dev = dev;
        }
    }
    if !best_dev.is_finite() {
        return Err(MissionError::InvalidMission("no empty mass satisfies the anchor missions".into()));
    }
    let (mut lo, mut hi) = (best_mass - step, best_mass + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if objective(a) <= objective(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mass = 0.5 * (lo + hi);
    let config = DroneConfig { empty_mass: mass, ..base.clone() };
    let metrics = AnchorMetrics::evaluate(models, anchors, &config, env)?;
    Ok(Calibration { max_deviation: metrics.max_deviation(anchors), config, metrics })
}
