#ifndef AEROAMP_H
#define AEROAMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define AEROAMP_REGIME_TAKEOFF 0

#define AEROAMP_REGIME_CRUISE 1

#define AEROAMP_REGIME_LANDING 2

#define AEROAMP_SCENARIO_LOW 0

#define AEROAMP_SCENARIO_BASE 1

#define AEROAMP_SCENARIO_HIGH 2

typedef enum AeroampStatus {
  AEROAMP_STATUS_OK = 0,
  AEROAMP_STATUS_NULL_POINTER = 1,
  AEROAMP_STATUS_INVALID_ARGUMENT = 2,
  AEROAMP_STATUS_IO = 3,
  AEROAMP_STATUS_INSUFFICIENT_BATTERY = 4,
  AEROAMP_STATUS_DOMAIN = 5,
  AEROAMP_STATUS_OUT_OF_RANGE = 6,
  AEROAMP_STATUS_PANIC = 7,
} AeroampStatus;

/*
 Airframe profile: empty mass, rotor disk area and battery capacity.
 */
typedef struct AeroampDrone AeroampDrone;

/*
 Vehicle registry plus emission factors.
 */
typedef struct AeroampFleet AeroampFleet;

/*
 Fitted takeoff, cruise and landing power models.
 */
typedef struct AeroampModelSet AeroampModelSet;

typedef struct AeroampMission {
  double payload_kg;
  double cruise_speed_ms;
  double altitude_m;
  double takeoff_speed_ms;
  double landing_speed_ms;
  double one_way_distance_km;
} AeroampMission;

/*
 Round-trip energy terms, Wh.
 */
typedef struct AeroampEnergyBreakdown {
  double takeoff_loaded;
  double takeoff_unloaded;
  double cruise_loaded;
  double cruise_unloaded;
  double landing_loaded;
  double landing_unloaded;
  double total;
} AeroampEnergyBreakdown;

typedef struct AeroampRange {
  double two_way_km;
  double delivery_km;
  double vertical_wh;
  double cruise_power_w;
} AeroampRange;

typedef struct AeroampComparisonRow {
  double energy_mj_per_km;
  double fuel_ghg_g_per_km;
  double upstream_ghg_g_per_km;
  double battery_ghg_g_per_km;
  double energy_mj_per_package;
  double ghg_g_per_package;
} AeroampComparisonRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 NUL-terminated description of the last failure on this thread. Empty
 after a successful call. Valid until the next call on the same thread.
 */
const char *aeroamp_last_error(void);

/*
 Library version, static storage.
 */
const char *aeroamp_version(void);

/*
 Reference mission: 1 kg payload, 12 m/s cruise at 100 m, 2.5 m/s climb, 2 m/s descent.
 */
struct AeroampMission aeroamp_mission_default(void);

/*
 Induced power in hover without wind, W. `air_density` kg/m³, `gravity` m/s².
 */
enum AeroampStatus aeroamp_induced_power(const struct AeroampDrone *drone,
                                         double total_mass_kg,
                                         double air_density,
                                         double gravity,
                                         double *out_watts);

/*
 Published coefficients. Never null; free with `aeroamp_models_free`.
 */
struct AeroampModelSet *aeroamp_models_published(void);

/*
 Load a `models.json` written by `aeroamp fit`.
 */
enum AeroampStatus aeroamp_models_load(const char *path, struct AeroampModelSet **out_models);

/*
 Coefficients of one regime (`AEROAMP_REGIME_*`).
 */
enum AeroampStatus aeroamp_models_coefficients(const struct AeroampModelSet *models,
                                               int32_t regime,
                                               double *out_b1,
                                               double *out_b0);

void aeroamp_models_free(struct AeroampModelSet *models);

/*
 The calibrated M100 profile. Never null; free with `aeroamp_drone_free`.
 */
struct AeroampDrone *aeroamp_drone_default(void);

enum AeroampStatus aeroamp_drone_new(double empty_mass_kg,
                                     double rotor_area_total_m2,
                                     double battery_capacity_wh,
                                     struct AeroampDrone **out_drone);

enum AeroampStatus aeroamp_drone_load(const char *path, struct AeroampDrone **out_drone);

double aeroamp_drone_battery_wh(const struct AeroampDrone *drone);

void aeroamp_drone_free(struct AeroampDrone *drone);

/*
 Round-trip energy of `mission` (loaded outbound, empty return), Wh.
 */
enum AeroampStatus aeroamp_mission_energy(const struct AeroampModelSet *models,
                                          const struct AeroampDrone *drone,
                                          const struct AeroampMission *mission,
                                          struct AeroampEnergyBreakdown *out_energy);

/*
 Two-way range on `battery_wh`. The mission distance is ignored.
 */
enum AeroampStatus aeroamp_two_way_range(const struct AeroampModelSet *models,
                                         const struct AeroampDrone *drone,
                                         const struct AeroampMission *mission,
                                         double battery_wh,
                                         struct AeroampRange *out_range);

/*
 The six default delivery modes with default emission factors.
 */
struct AeroampFleet *aeroamp_fleet_default(void);

/*
 Load vehicles and factors JSON. Either path may be null to use the default.
 */
enum AeroampStatus aeroamp_fleet_load(const char *vehicles_path,
                                      const char *factors_path,
                                      struct AeroampFleet **out_fleet);

size_t aeroamp_fleet_len(const struct AeroampFleet *fleet);

/*
 Vehicle name, owned by the handle. Null when `index` is out of range.
 */
const char *aeroamp_fleet_name(const struct AeroampFleet *fleet, size_t index);

/*
 One comparison row under `scenario` (`AEROAMP_SCENARIO_*`).
 */
enum AeroampStatus aeroamp_fleet_row(const struct AeroampFleet *fleet,
                                     size_t index,
                                     int32_t scenario,
                                     struct AeroampComparisonRow *out_row);

void aeroamp_fleet_free(struct AeroampFleet *fleet);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AEROAMP_H */
