//! Per-km and per-package energy and GHG for last-mile delivery modes.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FleetError {
    #[error("vehicle {0}: delivery rate must be positive")]
    ZeroDeliveryRate(String),
    #[error("vehicle {0}: payload capacity must be positive")]
    ZeroPayload(String),
    #[error("unknown vehicle {0:?}")]
    UnknownVehicle(String),
    #[error("no vehicle profiles given")]
    NoVehicles,
    #[error("invalid {what}: {message}")]
    Invalid { what: String, message: String },
    #[error("cannot read {path}: {message}")]
    Load { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, FleetError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fuel {
    Diesel,
    Electricity,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Low,
    Base,
    High,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Low, Scenario::Base, Scenario::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Low => "low",
            Scenario::Base => "base",
            Scenario::High => "high",
        }
    }

    /// -1, 0, +1
    fn sign(self) -> f64 {
        match self {
            Scenario::Low => -1.0,
            Scenario::Base => 0.0,
            Scenario::High => 1.0,
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Scenario::Low),
            "base" => Ok(Scenario::Base),
            "high" => Ok(Scenario::High),
            other => Err(format!("unknown scenario {other:?} (expected low, base or high)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub low: f64,
    pub base: f64,
    pub high: f64,
}

impl Triple {
    pub fn get(&self, s: Scenario) -> f64 {
        match s {
            Scenario::Low => self.low,
            Scenario::Base => self.base,
            Scenario::High => self.high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleProfile {
    pub name: String,
    #[serde(default)]
    pub label: String,
    pub fuel: Fuel,
    /// Delivered to the wheels (or rotors), MJ/km.
    #[serde(rename = "nominal_energy_mj_per_km")]
    pub nominal_energy: f64,
    pub stops_per_km: f64,
    pub packages_per_stop: f64,
    #[serde(rename = "battery_ghg_g_per_km")]
    pub battery_ghg: Triple,
    /// Fractional energy swing between gentle and aggressive driving.
    pub driving_style_spread: f64,
    /// Fractional swing in packages per km.
    pub delivery_density_spread: f64,
    #[serde(rename = "payload_capacity_kg")]
    pub payload_capacity: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl VehicleProfile {
    /// Packages per km.
    pub fn delivery_rate(&self) -> f64 {
        self.stops_per_km * self.packages_per_stop
    }

    pub fn display_name(&self) -> &str {
        if self.label.is_empty() {
            &self.name
        } else {
            &self.label
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| FleetError::Invalid { what: format!("vehicle {}", self.name), message };
        if !(self.nominal_energy >= 0.0 && self.nominal_energy.is_finite()) {
            return Err(bad(format!("nominal energy {}", self.nominal_energy)));
        }
        if !(self.delivery_rate() > 0.0) {
            return Err(FleetError::ZeroDeliveryRate(self.name.clone()));
        }
        for s in [self.driving_style_spread, self.delivery_density_spread] {
            if !(0.0..1.0).contains(&s) {
                return Err(bad(format!("spread {s} outside [0, 1)")));
            }
        }
        let b = self.battery_ghg;
        if !(0.0 <= b.low && b.low <= b.base && b.base <= b.high) {
            return Err(bad("battery GHG must satisfy 0 <= low <= base <= high".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionFactors {
    #[serde(rename = "grid_ghg_g_per_mj")]
    pub grid_ghg: Triple,
    #[serde(rename = "diesel_combustion_g_per_mj")]
    pub diesel_combustion_ghg: f64,
    #[serde(rename = "upstream_diesel_g_per_mj")]
    pub upstream_diesel: f64,
    #[serde(rename = "upstream_electricity_g_per_mj")]
    pub upstream_electricity: f64,
    pub charging_efficiency: f64,
    pub transmission_loss: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl EmissionFactors {
    /// No charging or transmission losses.
    pub fn lossless(mut self) -> Self {
        self.charging_efficiency = 1.0;
        self.transmission_loss = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| FleetError::Invalid { what: "emission factors".into(), message };
        if !(self.charging_efficiency > 0.0 && self.charging_efficiency <= 1.0) {
            return Err(bad(format!("charging efficiency {}", self.charging_efficiency)));
        }
        if !(0.0..1.0).contains(&self.transmission_loss) {
            return Err(bad(format!("transmission loss {}", self.transmission_loss)));
        }
        let g = self.grid_ghg;
        let all = [g.low, g.base, g.high, self.diesel_combustion_ghg, self.upstream_diesel, self.upstream_electricity];
        if all.iter().any(|v| !(*v >= 0.0)) {
            return Err(bad("intensities must be non-negative".into()));
        }
        Ok(())
    }
}

const VEHICLES_JSON: &str = include_str!("../data/vehicles.json");
const FACTORS_JSON: &str = include_str!("../data/factors.json");

#[derive(Deserialize)]
struct Registry {
    vehicles: Vec<VehicleProfile>,
}

pub fn default_vehicles() -> Vec<VehicleProfile> {
    serde_json::from_str::<Registry>(VEHICLES_JSON).expect("bundled vehicles.json is valid").vehicles
}

pub fn default_factors() -> EmissionFactors {
    serde_json::from_str(FACTORS_JSON).expect("bundled factors.json is valid")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let load_err = |message: String| FleetError::Load { path: path.display().to_string(), message };
    let text = std::fs::read_to_string(path).map_err(|e| load_err(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| load_err(e.to_string()))
}

/// Reads `{"vehicles": [...]}` or a bare array.
pub fn load_vehicles(path: &Path) -> Result<Vec<VehicleProfile>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Either {
        Wrapped(Registry),
        Bare(Vec<VehicleProfile>),
    }
    let vehicles = match read_json::<Either>(path)? {
        Either::Wrapped(r) => r.vehicles,
        Either::Bare(v) => v,
    };
    for v in &vehicles {
        v.validate()?;
    }
    Ok(vehicles)
}

pub fn load_factors(path: &Path) -> Result<EmissionFactors> {
    let f: EmissionFactors = read_json(path)?;
    f.validate()?;
    Ok(f)
}

/// Energy drawn from the grid for `nominal` MJ/km at the vehicle.
pub fn grid_energy(nominal: f64, factors: &EmissionFactors) -> f64 {
    nominal / (factors.charging_efficiency * (1.0 - factors.transmission_loss))
}

/// Energy per km at the point of supply: grid side for electric modes,
/// tank side otherwise.
fn supply_energy(v: &VehicleProfile, factors: &EmissionFactors, s: Scenario) -> f64 {
    let nominal = v.nominal_energy * (1.0 + s.sign() * v.driving_style_spread);
    match v.fuel {
        Fuel::Electricity => grid_energy(nominal, factors),
        Fuel::Diesel | Fuel::None => nominal,
    }
}

fn delivery_rate(v: &VehicleProfile, s: Scenario) -> Result<f64> {
    // A denser route (more packages per km) is the favourable case.
    let rate = v.delivery_rate() * (1.0 - s.sign() * v.delivery_density_spread);
    if rate > 0.0 {
        Ok(rate)
    } else {
        Err(FleetError::ZeroDeliveryRate(v.name.clone()))
    }
}

pub fn energy_per_package(v: &VehicleProfile, factors: &EmissionFactors) -> Result<f64> {
    Ok(supply_energy(v, factors, Scenario::Base) / delivery_rate(v, Scenario::Base)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhgPerKm {
    pub fuel: f64,
    pub upstream: f64,
    pub battery: f64,
}

impl GhgPerKm {
    pub fn total(&self) -> f64 {
        self.fuel + self.upstream + self.battery
    }
}

fn ghg_per_km_scenario(v: &VehicleProfile, f: &EmissionFactors, s: Scenario) -> GhgPerKm {
    let e = supply_energy(v, f, s);
    let (fuel, upstream) = match v.fuel {
        Fuel::Diesel => (e * f.diesel_combustion_ghg, e * f.upstream_diesel),
        Fuel::Electricity => (e * f.grid_ghg.get(s), e * f.upstream_electricity),
        Fuel::None => (0.0, 0.0),
    };
    GhgPerKm { fuel, upstream, battery: v.battery_ghg.get(s) }
}

/// Fuel, upstream and battery-lifecycle emissions, g CO₂e/km.
pub fn ghg_per_km(v: &VehicleProfile, factors: &EmissionFactors) -> GhgPerKm {
    ghg_per_km_scenario(v, factors, Scenario::Base)
}

pub fn ghg_per_package(v: &VehicleProfile, factors: &EmissionFactors) -> Result<f64> {
    Ok(ghg_per_km(v, factors).total() / delivery_rate(v, Scenario::Base)?)
}

/// Supply-side energy per tonne of payload capacity per km.
pub fn per_tonne_km(v: &VehicleProfile, factors: &EmissionFactors) -> Result<f64> {
    if !(v.payload_capacity > 0.0) {
        return Err(FleetError::ZeroPayload(v.name.clone()));
    }
    Ok(supply_energy(v, factors, Scenario::Base) / (v.payload_capacity / 1000.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub vehicle: String,
    pub label: String,
    pub fuel: Fuel,
    pub energy_mj_per_km: f64,
    pub fuel_ghg_g_per_km: f64,
    pub upstream_ghg_g_per_km: f64,
    pub battery_ghg_g_per_km: f64,
    pub energy_mj_per_package: f64,
    pub ghg_g_per_package: f64,
}

pub fn comparison_row(v: &VehicleProfile, factors: &EmissionFactors, scenario: Scenario) -> Result<ComparisonRow> {
    let rate = delivery_rate(v, scenario)?;
    let energy = supply_energy(v, factors, scenario);
    let ghg = ghg_per_km_scenario(v, factors, scenario);
    Ok(ComparisonRow {
        vehicle: v.name.clone(),
        label: v.display_name().to_string(),
        fuel: v.fuel,
        energy_mj_per_km: energy,
        fuel_ghg_g_per_km: ghg.fuel,
        upstream_ghg_g_per_km: ghg.upstream,
        battery_ghg_g_per_km: ghg.battery,
        energy_mj_per_package: energy / rate,
        ghg_g_per_package: ghg.total() / rate,
    })
}

pub fn comparison_table(profiles: &[VehicleProfile], factors: &EmissionFactors, scenario: Scenario) -> Result<Vec<ComparisonRow>> {
    if profiles.is_empty() {
        return Err(FleetError::NoVehicles);
    }
    factors.validate()?;
    profiles
        .iter()
        .map(|v| {
            v.validate()?;
            comparison_row(v, factors, scenario)
        })
        .collect()
}

/// Per-package savings of each vehicle relative to the baseline, percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub vehicle: String,
    pub baseline: String,
    pub energy_pct: f64,
    pub ghg_pct: f64,
}

pub fn reductions(rows: &[ComparisonRow], baseline: &str) -> Result<Vec<Reduction>> {
    let base = rows
        .iter()
        .find(|r| r.vehicle == baseline)
        .ok_or_else(|| FleetError::UnknownVehicle(baseline.to_string()))?;
    Ok(rows
        .iter()
        .map(|r| Reduction {
            vehicle: r.vehicle.clone(),
            baseline: baseline.to_string(),
            energy_pct: 100.0 * (1.0 - r.energy_mj_per_package / base.energy_mj_per_package),
            ghg_pct: 100.0 * (1.0 - r.ghg_g_per_package / base.ghg_g_per_package),
        })
        .collect())
}

/// Table with two decimals for energy columns and one for mass columns;
/// battery cells are blank for vehicles without a traction battery.
pub fn render_table_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "vehicle,energy_mj_per_km,fuel_ghg_g_per_km,upstream_ghg_g_per_km,battery_ghg_g_per_km,energy_mj_per_package,ghg_g_per_package\n",
    );
    for r in rows {
        let battery = if r.fuel == Fuel::Diesel { String::new() } else { format!("{:.1}", r.battery_ghg_g_per_km) };
        let _ = writeln!(
            out,
            "{},{:.2},{:.1},{:.1},{},{:.2},{:.1}",
            r.vehicle, r.energy_mj_per_km, r.fuel_ghg_g_per_km, r.upstream_ghg_g_per_km, battery, r.energy_mj_per_package, r.ghg_g_per_package
        );
    }
    out
}

/// Energy error-bar data: per-km and per-package, low/base/high.
pub fn figure2_csv(profiles: &[VehicleProfile], factors: &EmissionFactors) -> Result<String> {
    figure_csv(profiles, factors, "energy_mj", |r| (r.energy_mj_per_km, r.energy_mj_per_package))
}

/// GHG error-bar data: per-km and per-package, low/base/high.
pub fn figure3_csv(profiles: &[VehicleProfile], factors: &EmissionFactors) -> Result<String> {
    figure_csv(profiles, factors, "ghg_g", |r| {
        (r.fuel_ghg_g_per_km + r.upstream_ghg_g_per_km + r.battery_ghg_g_per_km, r.ghg_g_per_package)
    })
}

fn figure_csv(
    profiles: &[VehicleProfile],
    factors: &EmissionFactors,
    unit: &str,
    pick: impl Fn(&ComparisonRow) -> (f64, f64),
) -> Result<String> {
    let tables = Scenario::ALL.map(|s| comparison_table(profiles, factors, s));
    let [low, base, high] = tables;
    let (low, base, high) = (low?, base?, high?);
    let mut out = format!(
        "vehicle,{unit}_per_km_low,{unit}_per_km_base,{unit}_per_km_high,{unit}_per_package_low,{unit}_per_package_base,{unit}_per_package_high\n"
    );
    for i in 0..base.len() {
        let (kl, pl) = pick(&low[i]);
        let (kb, pb) = pick(&base[i]);
        let (kh, ph) = pick(&high[i]);
        let _ = writeln!(out, "{},{kl},{kb},{kh},{pl},{pb},{ph}", base[i].vehicle);
    }
    Ok(out)
}
