//! C ABI over `aeroamp`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`
//! functions and released with the matching `*_free`. Fallible calls return
//! an [`AeroampStatus`]; on failure [`aeroamp_last_error`] describes the
//! problem. Results are written through caller-provided out pointers.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use aeroamp::estimation::RegimeModelSet;
use aeroamp::fleet::{self, ComparisonRow, EmissionFactors, Scenario, VehicleProfile};
use aeroamp::mission::{self, MissionError, MissionSpec};
use aeroamp::physics::{self, DroneConfig, Environment};
use aeroamp::segmentation::Regime;

pub const AEROAMP_REGIME_TAKEOFF: i32 = 0;
pub const AEROAMP_REGIME_CRUISE: i32 = 1;
pub const AEROAMP_REGIME_LANDING: i32 = 2;

pub const AEROAMP_SCENARIO_LOW: i32 = 0;
pub const AEROAMP_SCENARIO_BASE: i32 = 1;
pub const AEROAMP_SCENARIO_HIGH: i32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeroampStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InsufficientBattery = 4,
    Domain = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Fitted takeoff, cruise and landing power models.
pub struct AeroampModelSet(RegimeModelSet);

/// Airframe profile: empty mass, rotor disk area and battery capacity.
pub struct AeroampDrone(DroneConfig);

/// Vehicle registry plus emission factors.
pub struct AeroampFleet {
    vehicles: Vec<VehicleProfile>,
    names: Vec<CString>,
    factors: EmissionFactors,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroampMission {
    pub payload_kg: f64,
    pub cruise_speed_ms: f64,
    pub altitude_m: f64,
    pub takeoff_speed_ms: f64,
    pub landing_speed_ms: f64,
    pub one_way_distance_km: f64,
}

/// Round-trip energy terms, Wh.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroampEnergyBreakdown {
    pub takeoff_loaded: f64,
    pub takeoff_unloaded: f64,
    pub cruise_loaded: f64,
    pub cruise_unloaded: f64,
    pub landing_loaded: f64,
    pub landing_unloaded: f64,
    pub total: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroampRange {
    pub two_way_km: f64,
    pub delivery_km: f64,
    pub vertical_wh: f64,
    pub cruise_power_w: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroampComparisonRow {
    pub energy_mj_per_km: f64,
    pub fuel_ghg_g_per_km: f64,
    pub upstream_ghg_g_per_km: f64,
    pub battery_ghg_g_per_km: f64,
    pub energy_mj_per_package: f64,
    pub ghg_g_per_package: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn fail(status: AeroampStatus, message: impl Into<String>) -> AeroampStatus {
    set_error(message);
    status
}

/// Run `f`, turning panics into `Panic` and clearing the error on success.
fn guard(f: impl FnOnce() -> AeroampStatus) -> AeroampStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(AeroampStatus::Ok) => {
            set_error("");
            AeroampStatus::Ok
        }
        Ok(status) => status,
        Err(_) => fail(AeroampStatus::Panic, "internal panic"),
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, AeroampStatus> {
    if p.is_null() {
        return Err(fail(AeroampStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(AeroampStatus::InvalidArgument, "path is not valid UTF-8"))
}

macro_rules! deref {
    ($p:expr, $what:literal) => {
        match $p.as_ref() {
            Some(v) => v,
            None => return fail(AeroampStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

macro_rules! out {
    ($p:expr, $v:expr) => {{
        if $p.is_null() {
            return fail(AeroampStatus::NullPointer, "output pointer is null");
        }
        *$p = $v;
    }};
}

fn regime_arg(regime: i32) -> Option<Regime> {
    Regime::ALL.get(usize::try_from(regime).ok()?).copied()
}

fn scenario_arg(scenario: i32) -> Option<Scenario> {
    Scenario::ALL.get(usize::try_from(scenario).ok()?).copied()
}

fn mission_error(e: MissionError) -> AeroampStatus {
    let status = match e {
        MissionError::InsufficientBattery { .. } => AeroampStatus::InsufficientBattery,
        MissionError::ZeroSpeed(_) | MissionError::ZeroDistance | MissionError::InvalidMission(_) => {
            AeroampStatus::InvalidArgument
        }
        _ => AeroampStatus::Domain,
    };
    fail(status, e.to_string())
}

fn mission_spec(m: &AeroampMission) -> MissionSpec {
    MissionSpec {
        payload_mass: m.payload_kg,
        cruise_speed: m.cruise_speed_ms,
        cruise_altitude: m.altitude_m,
        takeoff_speed: m.takeoff_speed_ms,
        landing_speed: m.landing_speed_ms,
        one_way_distance: m.one_way_distance_km,
    }
}

/// NUL-terminated description of the last failure on this thread. Empty
/// after a successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn aeroamp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn aeroamp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reference mission: 1 kg payload, 12 m/s cruise at 100 m, 2.5 m/s climb, 2 m/s descent.
#[no_mangle]
pub extern "C" fn aeroamp_mission_default() -> AeroampMission {
    let m = MissionSpec::default();
    AeroampMission {
        payload_kg: m.payload_mass,
        cruise_speed_ms: m.cruise_speed,
        altitude_m: m.cruise_altitude,
        takeoff_speed_ms: m.takeoff_speed,
        landing_speed_ms: m.landing_speed,
        one_way_distance_km: m.one_way_distance,
    }
}

/// Induced power in hover without wind, W. `air_density` kg/m³, `gravity` m/s².
#[no_mangle]
pub unsafe extern "C" fn aeroamp_induced_power(
    drone: *const AeroampDrone,
    total_mass_kg: f64,
    air_density: f64,
    gravity: f64,
    out_watts: *mut f64,
) -> AeroampStatus {
    guard(|| {
        let d = deref!(drone, "drone");
        let env = Environment { air_density, gravity };
        match physics::induced_power(total_mass_kg, &env, &d.0) {
            Ok(p) => out!(out_watts, p),
            Err(e) => return fail(AeroampStatus::InvalidArgument, e.to_string()),
        }
        AeroampStatus::Ok
    })
}

/// Published coefficients. Never null; free with `aeroamp_models_free`.
#[no_mangle]
pub extern "C" fn aeroamp_models_published() -> *mut AeroampModelSet {
    Box::into_raw(Box::new(AeroampModelSet(RegimeModelSet::published())))
}

/// Load a `models.json` written by `aeroamp fit`.
#[no_mangle]
pub unsafe extern "C" fn aeroamp_models_load(path: *const c_char, out_models: *mut *mut AeroampModelSet) -> AeroampStatus {
    guard(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match RegimeModelSet::from_path(&path) {
            Ok(m) => out!(out_models, Box::into_raw(Box::new(AeroampModelSet(m)))),
            Err(e) => return fail(AeroampStatus::Io, e.to_string()),
        }
        AeroampStatus::Ok
    })
}

/// Coefficients of one regime (`AEROAMP_REGIME_*`).
#[no_mangle]
pub unsafe extern "C" fn aeroamp_models_coefficients(
    models: *const AeroampModelSet,
    regime: i32,
    out_b1: *mut f64,
    out_b0: *mut f64,
) -> AeroampStatus {
    guard(|| {
        let m = deref!(models, "models");
        let Some(r) = regime_arg(regime) else {
            return fail(AeroampStatus::InvalidArgument, format!("unknown regime {regime}"));
        };
        let model = m.0.get(r);
        out!(out_b1, model.b1);
        out!(out_b0, model.b0);
        AeroampStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn aeroamp_models_free(models: *mut AeroampModelSet) {
    if !models.is_null() {
        drop(Box::from_raw(models));
    }
}

/// The calibrated M100 profile. Never null; free with `aeroamp_drone_free`.
#[no_mangle]
pub extern "C" fn aeroamp_drone_default() -> *mut AeroampDrone {
    Box::into_raw(Box::new(AeroampDrone(DroneConfig::m100())))
}

#[no_mangle]
pub unsafe extern "C" fn aeroamp_drone_new(
    empty_mass_kg: f64,
    rotor_area_total_m2: f64,
    battery_capacity_wh: f64,
    out_drone: *mut *mut AeroampDrone,
) -> AeroampStatus {
    guard(|| {
        let cfg = DroneConfig {
            name: "custom".into(),
            empty_mass: empty_mass_kg,
            rotor_area_total: rotor_area_total_m2,
            battery_capacity: battery_capacity_wh,
        };
        if let Err(e) = cfg.validate() {
            return fail(AeroampStatus::InvalidArgument, e.to_string());
        }
        out!(out_drone, Box::into_raw(Box::new(AeroampDrone(cfg))));
        AeroampStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn aeroamp_drone_load(path: *const c_char, out_drone: *mut *mut AeroampDrone) -> AeroampStatus {
    guard(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match DroneConfig::from_path(&path) {
            Ok(cfg) => out!(out_drone, Box::into_raw(Box::new(AeroampDrone(cfg)))),
            Err(e) => return fail(AeroampStatus::Io, e.to_string()),
        }
        AeroampStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn aeroamp_drone_battery_wh(drone: *const AeroampDrone) -> f64 {
    drone.as_ref().map_or(f64::NAN, |d| d.0.battery_capacity)
}

#[no_mangle]
pub unsafe extern "C" fn aeroamp_drone_free(drone: *mut AeroampDrone) {
    if !drone.is_null() {
        drop(Box::from_raw(drone));
    }
}

/// Round-trip energy of `mission` (loaded outbound, empty return), Wh.
#[no_mangle]
pub unsafe extern "C" fn aeroamp_mission_energy(
    models: *const AeroampModelSet,
    drone: *const AeroampDrone,
    mission: *const AeroampMission,
    out_energy: *mut AeroampEnergyBreakdown,
) -> AeroampStatus {
    guard(|| {
        let (m, d, spec) = (deref!(models, "models"), deref!(drone, "drone"), deref!(mission, "mission"));
        match mission::mission_energy(&m.0, &mission_spec(spec), &d.0, &Environment::default()) {
            Ok(e) => out!(
                out_energy,
                AeroampEnergyBreakdown {
                    takeoff_loaded: e.takeoff_loaded,
                    takeoff_unloaded: e.takeoff_unloaded,
                    cruise_loaded: e.cruise_loaded,
                    cruise_unloaded: e.cruise_unloaded,
                    landing_loaded: e.landing_loaded,
                    landing_unloaded: e.landing_unloaded,
                    total: e.total,
                }
            ),
            Err(e) => return mission_error(e),
        }
        AeroampStatus::Ok
    })
}

/// Two-way range on `battery_wh`. The mission distance is ignored.
#[no_mangle]
pub unsafe extern "C" fn aeroamp_two_way_range(
    models: *const AeroampModelSet,
    drone: *const AeroampDrone,
    mission: *const AeroampMission,
    battery_wh: f64,
    out_range: *mut AeroampRange,
) -> AeroampStatus {
    guard(|| {
        let (m, d, spec) = (deref!(models, "models"), deref!(drone, "drone"), deref!(mission, "mission"));
        match mission::two_way_range(&m.0, &mission_spec(spec), &d.0, &Environment::default(), battery_wh) {
            Ok(r) => out!(
                out_range,
                AeroampRange {
                    two_way_km: r.two_way_km,
                    delivery_km: r.delivery_km,
                    vertical_wh: r.vertical_wh,
                    cruise_power_w: r.cruise_power_w,
                }
            ),
            Err(e) => return mission_error(e),
        }
        AeroampStatus::Ok
    })
}

fn fleet_handle(vehicles: Vec<VehicleProfile>, factors: EmissionFactors) -> *mut AeroampFleet {
    let names = vehicles.iter().map(|v| CString::new(v.name.replace('\0', " ")).unwrap_or_default()).collect();
    Box::into_raw(Box::new(AeroampFleet { vehicles, names, factors }))
}

/// The six default delivery modes with default emission factors.
#[no_mangle]
pub extern "C" fn aeroamp_fleet_default() -> *mut AeroampFleet {
    fleet_handle(fleet::default_vehicles(), fleet::default_factors())
}

/// Load vehicles and factors JSON. Either path may be null to use the default.
#[no_mangle]
pub unsafe extern "C" fn aeroamp_fleet_load(
    vehicles_path: *const c_char,
    factors_path: *const c_char,
    out_fleet: *mut *mut AeroampFleet,
) -> AeroampStatus {
    guard(|| {
        let vehicles = if vehicles_path.is_null() {
            fleet::default_vehicles()
        } else {
            let p = match path_arg(vehicles_path) {
                Ok(p) => p,
                Err(s) => return s,
            };
            match fleet::load_vehicles(&p) {
                Ok(v) => v,
                Err(e) => return fail(AeroampStatus::Io, e.to_string()),
            }
        };
        let factors = if factors_path.is_null() {
            fleet::default_factors()
        } else {
            let p = match path_arg(factors_path) {
                Ok(p) => p,
                Err(s) => return s,
            };
            match fleet::load_factors(&p) {
                Ok(f) => f,
                Err(e) => return fail(AeroampStatus::Io, e.to_string()),
            }
        };
        out!(out_fleet, fleet_handle(vehicles, factors));
        AeroampStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn aeroamp_fleet_len(fleet: *const AeroampFleet) -> usize {
    fleet.as_ref().map_or(0, |f| f.vehicles.len())
}

/// Vehicle name, owned by the handle. Null when `index` is out of range.
#[no_mangle]
pub unsafe extern "C" fn aeroamp_fleet_name(fleet: *const AeroampFleet, index: usize) -> *const c_char {
    fleet.as_ref().and_then(|f| f.names.get(index)).map_or(ptr::null(), |n| n.as_ptr())
}

/// One comparison row under `scenario` (`AEROAMP_SCENARIO_*`).
#[no_mangle]
pub unsafe extern "C" fn aeroamp_fleet_row(
    fleet: *const AeroampFleet,
    index: usize,
    scenario: i32,
    out_row: *mut AeroampComparisonRow,
) -> AeroampStatus {
    guard(|| {
        let f = deref!(fleet, "fleet");
        let Some(v) = f.vehicles.get(index) else {
            return fail(AeroampStatus::OutOfRange, format!("vehicle index {index} of {}", f.vehicles.len()));
        };
        let Some(s) = scenario_arg(scenario) else {
            return fail(AeroampStatus::InvalidArgument, format!("unknown scenario {scenario}"));
        };
        let row: ComparisonRow = match fleet::comparison_row(v, &f.factors, s) {
            Ok(r) => r,
            Err(e) => return fail(AeroampStatus::Domain, e.to_string()),
        };
        out!(
            out_row,
            AeroampComparisonRow {
                energy_mj_per_km: row.energy_mj_per_km,
                fuel_ghg_g_per_km: row.fuel_ghg_g_per_km,
                upstream_ghg_g_per_km: row.upstream_ghg_g_per_km,
                battery_ghg_g_per_km: row.battery_ghg_g_per_km,
                energy_mj_per_package: row.energy_mj_per_package,
                ghg_g_per_package: row.ghg_g_per_package,
            }
        );
        AeroampStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn aeroamp_fleet_free(fleet: *mut AeroampFleet) {
    if !fleet.is_null() {
        drop(Box::from_raw(fleet));
    }
}
