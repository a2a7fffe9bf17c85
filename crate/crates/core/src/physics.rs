//! Hover-no-wind induced power from momentum theory.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("total mass must be positive, got {0} kg")]
    NonPositiveMass(f64),
    #[error("invalid drone profile: {0}")]
    InvalidProfile(String),
    #[error("cannot read drone profile {path}: {message}")]
    Load { path: String, message: String },
}

/// Airframe description used to turn a mass into induced power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneConfig {
    pub name: String,
    /// Airframe plus battery plus fixed equipment, kg.
    #[serde(rename = "empty_mass_kg")]
    pub empty_mass: f64,
    /// Disk area of all rotors together, m².
    #[serde(rename = "rotor_area_total_m2")]
    pub rotor_area_total: f64,
    /// Nominal battery energy, Wh.
    #[serde(rename = "battery_capacity_wh", default = "default_battery_wh")]
    pub battery_capacity: f64,
}

fn default_battery_wh() -> f64 {
    130.0
}

const M100_PROFILE: &str = include_str!("../data/m100.json");

impl DroneConfig {
    /// The shipped calibrated M100 profile.
    pub fn m100() -> Self {
        serde_json::from_str(M100_PROFILE).expect("bundled m100.json is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, PhysicsError> {
        let load_err = |message: String| PhysicsError::Load { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| load_err(e.to_string()))?;
        let config: Self = serde_json::from_str(&text).map_err(|e| load_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        for (name, v) in [
            ("empty_mass_kg", self.empty_mass),
            ("rotor_area_total_m2", self.rotor_area_total),
            ("battery_capacity_wh", self.battery_capacity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PhysicsError::InvalidProfile(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// kg/m³
    pub air_density: f64,
    /// m/s²
    pub gravity: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Self { air_density: 1.225, gravity: 9.81 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoverPoint {
    /// N
    pub thrust: f64,
    /// m/s
    pub induced_velocity: f64,
    /// W
    pub induced_power: f64,
}

/// Thrust, induced velocity and induced power in steady hover without wind.
///
/// Thrust balances weight, `v_i = sqrt(T / (2ρA))`, and `P_i = T·v_i`.
pub fn hover_point(total_mass: f64, env: &Environment, config: &DroneConfig) -> Result<HoverPoint, PhysicsError> {
    if !(total_mass > 0.0 && total_mass.is_finite()) {
        return Err(PhysicsError::NonPositiveMass(total_mass));
    }
    let thrust = total_mass * env.gravity;
    let induced_velocity = (thrust / (2.0 * env.air_density * config.rotor_area_total)).sqrt();
    Ok(HoverPoint { thrust, induced_velocity, induced_power: thrust * induced_velocity })
}

/// `(m·g)^1.5 / sqrt(2ρA)`, watts.
pub fn induced_power(total_mass: f64, env: &Environment, config: &DroneConfig) -> Result<f64, PhysicsError> {
    if !(total_mass > 0.0 && total_mass.is_finite()) {
        return Err(PhysicsError::NonPositiveMass(total_mass));
    }
    let weight = total_mass * env.gravity;
    Ok(weight.powf(1.5) / (2.0 * env.air_density * config.rotor_area_total).sqrt())
}

/// Induced power at the drone's empty mass plus `payload` kg.
pub fn induced_power_with_payload(payload: f64, env: &Environment, config: &DroneConfig) -> Result<f64, PhysicsError> {
    induced_power(config.empty_mass + payload, env, config)
}
