//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use aeroamp::cli;
use aeroamp::estimation::{
    bootstrap_se, evaluate_are, fit_all, fit_regime_model, observe_flights, stratified_split, FlightObservation, GridCell,
    Observation,
};
use aeroamp::gbt::{adequacy, cv_grid_search, evaluate_gbt, train_regime_gbts, FeatureSet, HyperGrid, DEFAULT_ROUNDS};
use aeroamp::mission::{mission_energy, two_way_range, AnchorMetrics, MissionSpec, RangeAnchors};
use aeroamp::physics::{induced_power, DroneConfig, Environment};
use aeroamp::segmentation::{detect_regimes, Regime, SegmentationParams};
use aeroamp::synth::{generate, generate_flight, PowerLaw, RegimeLaws, SynthSpec};
use aeroamp::telemetry::{load_batch, parse_combined_csv, parse_flight_csv, ColumnMap, FlightMeta, FlightRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;

// Tolerances and budgets.
const TABLE_REL_TOL: f64 = 0.02;
const ANCHOR_REL_TOL: f64 = 0.10;
const INVERSION_REL_TOL: f64 = 1e-9;
const RECOVERY_REL_TOL: f64 = 1e-9;
const SE_MULTIPLE: f64 = 3.0;
const MC_RUNS: usize = 100;
const MC_MIN_HITS: usize = 99;
const BOOTSTRAP_SE_REL_TOL: f64 = 0.15;
const ZERO_NOISE_SE_MAX: f64 = 1e-9;
const DATASET_B1_BAND: (f64, f64) = (1.57, 1.81);
const DATASET_MAX_ARE: f64 = 0.05;
const GBT_GAP_PP: f64 = 2.0;
const BOUNDARY_SAMPLES: usize = 1;
const PHYSICS_REL_TOL: f64 = 1e-12;

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

// ---------------------------------------------------------------------------

/// Published comparison table: energy MJ/km, fuel, upstream, battery g/km,
/// MJ/package, g/package. Blank battery cells are zero.
const TABLE: [(&str, [f64; 6]); 6] = [
    ("truck", [11.00, 764.5, 168.7, 0.0, 5.24, 444.4]),
    ("diesel_van", [4.90, 340.6, 75.2, 0.0, 1.41, 119.5]),
    ("electric_truck", [3.74, 681.4, 82.4, 24.5, 1.78, 375.4]),
    ("electric_van", [1.63, 296.1, 35.8, 14.1, 0.47, 99.4]),
    ("cargo_bicycle", [0.10, 18.1, 2.2, 1.3, 0.10, 21.6]),
    ("drone", [0.05, 8.5, 1.0, 0.8, 0.19, 41.1]),
];
const TABLE_DECIMALS: [i32; 6] = [2, 1, 1, 1, 2, 1];

/// A cell matches when within the relative tolerance or when the computed
/// value rounds to the published figure at its displayed precision.
fn cell_matches(got: f64, want: f64, decimals: i32) -> bool {
    let scale = 10f64.powi(decimals);
    let rounds_to = ((got * scale).round() - (want * scale).round()).abs() < 0.5;
    rounds_to || (want != 0.0 && rel(got, want) <= TABLE_REL_TOL)
}

fn compare_rows(dir: &Path) -> Result<Value, String> {
    let out = dir.join("compare");
    let code = cli::run(["aeroamp", "compare", "--scenario", "base", "--baseline", "truck", "--out", out.to_str().unwrap()]);
    if code != 0 {
        return Err(format!("compare exited with {code}"));
    }
    let text = std::fs::read_to_string(out.join("table.json")).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn row<'a>(table: &'a Value, vehicle: &str) -> &'a Value {
    table["rows"].as_array().unwrap().iter().find(|r| r["vehicle"] == vehicle).unwrap()
}

fn criterion_table(dir: &Path) -> Outcome {
    let table = match compare_rows(dir) {
        Ok(t) => t,
        Err(e) => return check(false, e),
    };
    let cols = [
        "energy_mj_per_km",
        "fuel_ghg_g_per_km",
        "upstream_ghg_g_per_km",
        "battery_ghg_g_per_km",
        "energy_mj_per_package",
        "ghg_g_per_package",
    ];
    let mut misses = Vec::new();
    let mut by_rounding = 0;
    let mut worst = 0.0f64;
    for (vehicle, published) in TABLE {
        let r = row(&table, vehicle);
        for (c, col) in cols.iter().enumerate() {
            let got = r[col].as_f64().unwrap();
            if published[c] != 0.0 {
                worst = worst.max(rel(got, published[c]));
            }
            if published[c] != 0.0 && rel(got, published[c]) > TABLE_REL_TOL {
                by_rounding += 1;
            }
            if !cell_matches(got, published[c], TABLE_DECIMALS[c]) {
                misses.push(format!("{vehicle}.{col}={got:.4} vs {}", published[c]));
            }
        }
    }
    let detail = if misses.is_empty() {
        format!("36/36 cells; {by_rounding} beyond 2% but equal at displayed precision (largest {:.1}%)", 100.0 * worst)
    } else {
        format!("{} cells off: {}", misses.len(), misses.join("; "))
    };
    check(misses.is_empty(), detail)
}

fn criterion_reductions(dir: &Path) -> Outcome {
    let table = match compare_rows(dir) {
        Ok(t) => t,
        Err(e) => return check(false, e),
    };
    let per_pkg = |v: &str, col: &str| row(&table, v)[col].as_f64().unwrap();
    let red = |v: &str, base: &str, col: &str| 100.0 * (1.0 - per_pkg(v, col) / per_pkg(base, col));
    let checks = [
        ("energy vs truck", red("drone", "truck", "energy_mj_per_package"), (95.5, 97.0)),
        ("energy vs e-van", red("drone", "electric_van", "energy_mj_per_package"), (59.0, 61.0)),
        ("GHG vs truck", red("drone", "truck", "ghg_g_per_package"), (90.0, 92.0)),
        ("GHG vs e-van", red("drone", "electric_van", "ghg_g_per_package"), (58.0, 60.0)),
    ];
    let ok = checks.iter().all(|(_, v, (lo, hi))| (*lo..=*hi).contains(v));
    let detail = checks.iter().map(|(n, v, (lo, hi))| format!("{n} {v:.1}% in [{lo}, {hi}]")).collect::<Vec<_>>().join(", ");
    check(ok, detail)
}

fn criterion_range_anchor() -> Outcome {
    let models = aeroamp::RegimeModelSet::published();
    let drone = DroneConfig::m100();
    let env = Environment::default();
    let anchors = RangeAnchors::default();
    let m = match AnchorMetrics::evaluate(&models, &anchors, &drone, &env) {
        Ok(m) => m,
        Err(e) => return check(false, e.to_string()),
    };
    let low = MissionSpec { cruise_altitude: anchors.low_altitude_m, ..anchors.mission };
    let low_vertical = mission_energy(&models, &low, &drone, &env).unwrap().vertical();
    let pairs = [
        ("round trip Wh", m.round_trip_wh, 120.0),
        ("two-way km", m.two_way_km, 11.0),
        ("vertical Wh", m.vertical_wh, 19.4),
        ("5 m round trip Wh", m.low_altitude_round_trip_wh, 102.0),
        ("5 m delivery km", m.low_altitude_delivery_km, 6.7),
        ("5 m vertical Wh", low_vertical, 0.97),
    ];
    let ok = pairs.iter().all(|(_, g, w)| rel(*g, *w) <= ANCHOR_REL_TOL);
    let detail = pairs.iter().map(|(n, g, w)| format!("{n} {g:.2}/{w} ({:+.1}%)", 100.0 * (g / w - 1.0))).collect::<Vec<_>>().join(", ");
    check(ok, detail)
}

fn criterion_inversion() -> Outcome {
    let models = aeroamp::RegimeModelSet::published();
    let drone = DroneConfig::m100();
    let env = Environment::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = MissionSpec {
            payload_mass: rng.gen_range(0.0..1.5),
            cruise_speed: rng.gen_range(1.0..12.0),
            cruise_altitude: rng.gen_range(1.0..150.0),
            ..MissionSpec::default()
        };
        let e_max = drone.battery_capacity;
        let r = match two_way_range(&models, &m, &drone, &env, e_max) {
            Ok(r) => r,
            Err(e) => return check(false, e.to_string()),
        };
        let total = mission_energy(&models, &m.with_distance(r.delivery_km), &drone, &env).unwrap().total;
        worst = worst.max(rel(total, e_max));
    }
    check(worst <= INVERSION_REL_TOL, format!("100 random missions, worst relative error {worst:.2e}"))
}

// ---------------------------------------------------------------------------

/// Slope, intercept and their textbook OLS standard errors.
fn ols_oracle(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let b1 = sxy / sxx;
    let b0 = ym - b1 * xm;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - b0 - b1 * a).powi(2)).sum();
    let s2 = rss / (n - 2.0);
    (b1, b0, (s2 / sxx).sqrt(), (s2 * (1.0 / n + xm * xm / sxx)).sqrt())
}

fn synth_p_induced(n: usize) -> Vec<f64> {
    let spec = SynthSpec { flights: n, ..SynthSpec::default() };
    (0..n)
        .map(|i| {
            let (payload, _, _) = spec.settings(i);
            induced_power(spec.drone.empty_mass + payload, &spec.environment, &spec.drone).unwrap()
        })
        .collect()
}

fn criterion_estimation() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // Noiseless end to end: generate, segment, fit.
    let spec = SynthSpec { flights: 60, laws: RegimeLaws::uniform(PowerLaw::linear(2.0, 10.0)), ..SynthSpec::default() };
    let flights: Vec<FlightRecord> = generate(&spec).unwrap().into_iter().map(|f| f.record).collect();
    let (obs, rejects) = observe_flights(&flights, &SegmentationParams::default(), &spec.drone, &spec.environment);
    let mut worst = 0.0f64;
    for r in Regime::ALL {
        let pts: Vec<Observation> = obs.iter().map(|o| o.point(r)).collect();
        let m = fit_regime_model(&pts, r).unwrap();
        worst = worst.max(rel(m.b1, 2.0)).max(rel(m.b0, 10.0));
    }
    ok &= rejects.is_empty() && worst <= RECOVERY_REL_TOL;
    notes.push(format!("noiseless recovery {worst:.1e}"));

    // Noisy Monte Carlo on the synthetic design.
    let x = synth_p_induced(120);
    let (b1, b0, sigma) = (1.69, 16.8, 5.0);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut hits = 0;
    for run in 0..MC_RUNS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + run as u64);
        let y: Vec<f64> = x.iter().map(|p| b1 * p + b0 + noise.sample(&mut rng)).collect();
        let pts: Vec<Observation> = x.iter().zip(&y).map(|(&p, &m)| Observation { p_induced: p, mean_power: m }).collect();
        let m = fit_regime_model(&pts, Regime::Cruise).unwrap();
        let (_, _, se1, se0) = ols_oracle(&x, &y);
        if (m.b1 - b1).abs() <= SE_MULTIPLE * se1 && (m.b0 - b0).abs() <= SE_MULTIPLE * se0 {
            hits += 1;
        }
    }
    ok &= hits >= MC_MIN_HITS;
    notes.push(format!("noisy runs within 3 SE {hits}/{MC_RUNS}"));

    // Bootstrap SE versus closed form.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let y: Vec<f64> = x.iter().map(|p| b1 * p + b0 + noise.sample(&mut rng)).collect();
    let pts: Vec<Observation> = x.iter().zip(&y).map(|(&p, &m)| Observation { p_induced: p, mean_power: m }).collect();
    let boot = bootstrap_se(&pts, 1000, 7).unwrap();
    let (_, _, se1, se0) = ols_oracle(&x, &y);
    let (d1, d0) = (rel(boot.se_b1, se1), rel(boot.se_b0, se0));
    ok &= d1 <= BOOTSTRAP_SE_REL_TOL && d0 <= BOOTSTRAP_SE_REL_TOL;
    notes.push(format!("bootstrap/closed-form SE b1 {:.1}%, b0 {:.1}%", 100.0 * d1, 100.0 * d0));

    // Zero noise bootstrap.
    let exact: Vec<Observation> = x.iter().map(|&p| Observation { p_induced: p, mean_power: b1 * p + b0 }).collect();
    let zero = bootstrap_se(&exact, 1000, 7).unwrap();
    ok &= zero.se_b1 < ZERO_NOISE_SE_MAX && zero.se_b0 < ZERO_NOISE_SE_MAX;
    notes.push(format!("zero-noise SE {:.1e}/{:.1e}", zero.se_b1, zero.se_b0));

    check(ok, notes.join(", "))
}

// ---------------------------------------------------------------------------

fn load_dataset(root: &Path) -> Option<Result<Vec<FlightRecord>, String>> {
    let batch = root.join("flights.json");
    if batch.exists() {
        let entries = match load_batch(&batch, Some(root)) {
            Ok(e) => e,
            Err(e) => return Some(Err(e.to_string())),
        };
        let map = ColumnMap::default();
        let flights = entries.iter().filter_map(|e| parse_flight_csv(&e.csv_path, e.meta(), &map).ok()).map(|p| p.record).collect();
        return Some(Ok(flights));
    }
    let combined = root.join("flights.csv");
    if combined.exists() {
        let map_path = root.join("column_map.json");
        let map_path = if map_path.exists() {
            map_path
        } else {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/dataset_column_map.json")
        };
        let map = match ColumnMap::from_path(&map_path) {
            Ok(m) => m,
            Err(e) => return Some(Err(e.to_string())),
        };
        return Some(parse_combined_csv(&combined, &map).map(|v| v.into_iter().map(|p| p.record).collect()).map_err(|e| e.to_string()));
    }
    None
}

fn cells(obs: &[FlightObservation]) -> Vec<GridCell> {
    obs.iter()
        .map(|o| {
            GridCell::from_meta(&FlightMeta {
                flight_id: o.flight_id,
                payload_kg: o.payload_kg,
                altitude_m: o.target_altitude,
                speed_ms: o.target_speed,
            })
        })
        .collect()
}

fn split_observations(obs: &[FlightObservation], train: usize, seed: u64) -> (Vec<FlightObservation>, Vec<FlightObservation>) {
    let ids: Vec<u32> = obs.iter().map(|o| o.flight_id).collect();
    let plan = stratified_split(&ids, Some(&cells(obs)), train, seed).unwrap();
    let pick = |set: &[u32]| obs.iter().filter(|o| set.binary_search(&o.flight_id).is_ok()).cloned().collect();
    (pick(&plan.train_ids), pick(&plan.test_ids))
}

fn criterion_dataset() -> Outcome {
    let Some(root) = std::env::var_os(cli::DATA_DIR_ENV).map(PathBuf::from) else {
        return Outcome { status: Status::Skip, detail: format!("{} not set; dataset not available", cli::DATA_DIR_ENV) };
    };
    let flights = match load_dataset(&root) {
        None => {
            return Outcome { status: Status::Skip, detail: format!("no flights.json or flights.csv under {}", root.display()) }
        }
        Some(Err(e)) => return check(false, e),
        Some(Ok(f)) => f,
    };
    let drone = DroneConfig::m100();
    let (obs, rejects) = observe_flights(&flights, &SegmentationParams::default(), &drone, &Environment::default());
    if obs.len() <= 120 {
        return check(false, format!("only {} of {} flights segmented", obs.len(), flights.len()));
    }
    let (train, test) = split_observations(&obs, 120, 0);
    let fit = match fit_all(&train, 1000, 0) {
        Ok(f) => f,
        Err(e) => return check(false, e.to_string()),
    };
    let are = evaluate_are(&test, &fit.models).unwrap();
    let b1 = fit.models.cruise.b1;
    let ok = (DATASET_B1_BAND.0..=DATASET_B1_BAND.1).contains(&b1) && are.mean <= DATASET_MAX_ARE;
    check(
        ok,
        format!(
            "{} flights ({} rejected), cruise b1 {b1:.3} in [{}, {}], mean test ARE {:.3} <= {DATASET_MAX_ARE}",
            obs.len(),
            rejects.len(),
            DATASET_B1_BAND.0,
            DATASET_B1_BAND.1,
            are.mean
        ),
    )
}

// ---------------------------------------------------------------------------

fn adequacy_run(laws: RegimeLaws, seed: u64) -> (f64, f64, bool) {
    let spec = SynthSpec {
        flights: 187,
        seed,
        laws,
        flight_noise_w: 4.0,
        sample_noise_w: 2.0,
        payloads_kg: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5],
        altitudes_m: vec![25.0, 50.0, 75.0, 100.0],
        speeds_ms: vec![4.0, 6.0, 8.0, 10.0, 12.0],
        wind_speed_ms: Some(1.5),
        ..SynthSpec::default()
    };
    let flights: Vec<FlightRecord> = generate(&spec).unwrap().into_iter().map(|f| f.record).collect();
    let (obs, _) = observe_flights(&flights, &SegmentationParams::default(), &spec.drone, &spec.environment);
    let (train, test) = split_observations(&obs, 120, seed);
    let linear = fit_all(&train, 50, seed).unwrap();
    let linear_are = evaluate_are(&test, &linear.models).unwrap();
    let features = FeatureSet::default();
    let cv = cv_grid_search(&train, &HyperGrid::default(), 5, DEFAULT_ROUNDS, seed, &features).unwrap();
    let gbt = train_regime_gbts(&train, &cv.best, DEFAULT_ROUNDS, seed, &features).unwrap();
    let gbt_are = evaluate_gbt(&test, &gbt).unwrap();
    let monotone = gbt.models.iter().all(|m| m.train_loss.windows(2).all(|w| w[1] <= w[0]));
    let a = adequacy(&linear_are, &gbt_are);
    (a.linear_mean_are, a.gbt_mean_are, monotone)
}

fn criterion_gbt() -> Outcome {
    let linear = RegimeLaws {
        takeoff: PowerLaw::linear(1.97, 13.8),
        cruise: PowerLaw::linear(1.69, 16.8),
        landing: PowerLaw::linear(1.62, -4.7),
    };
    let quad = |law: PowerLaw| PowerLaw { b2: 0.003, b1: law.b1 - 1.2, ..law };
    let quadratic = RegimeLaws { takeoff: quad(linear.takeoff), cruise: quad(linear.cruise), landing: quad(linear.landing) };
    let (lin_l, lin_g, mono_a) = adequacy_run(linear, 3);
    let (quad_l, quad_g, mono_b) = adequacy_run(quadratic, 5);
    let gap = 100.0 * (lin_l - lin_g).abs();
    let ok = gap <= GBT_GAP_PP && quad_g < quad_l && mono_a && mono_b;
    check(
        ok,
        format!(
            "linear data ARE linear {:.2}% vs GBT {:.2}% (gap {gap:.2} pp); quadratic data linear {:.2}% vs GBT {:.2}%; loss non-increasing {}",
            100.0 * lin_l,
            100.0 * lin_g,
            100.0 * quad_l,
            100.0 * quad_g,
            mono_a && mono_b
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_segmentation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = SegmentationParams::default();
    let mut failures = Vec::new();
    let mut worst_offset = 0usize;
    for trial in 0..50 {
        let spec = SynthSpec {
            seed: trial,
            flights: 1,
            payloads_kg: vec![rng.gen_range(0.0..1.0)],
            altitudes_m: vec![rng.gen_range(10.0..120.0)],
            speeds_ms: vec![rng.gen_range(2.0..14.0)],
            takeoff_speed: rng.gen_range(1.0..4.0),
            landing_speed: rng.gen_range(1.0..3.0),
            cruise_distance_m: rng.gen_range(100.0..1500.0),
            ground_pad_s: rng.gen_range(2.0..8.0),
            sample_rate_hz: rng.gen_range(4.0..10.0),
            sample_noise_w: 3.0,
            laws: RegimeLaws {
                takeoff: PowerLaw::linear(rng.gen_range(1.5..2.5), 13.8),
                cruise: PowerLaw::linear(rng.gen_range(1.5..2.5), 16.8),
                landing: PowerLaw::linear(rng.gen_range(1.5..2.5), -4.7),
            },
            ..SynthSpec::default()
        };
        let f = generate_flight(&spec, 0).unwrap();
        let s = match detect_regimes(&f.record, &params) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        let truth = [f.truth.takeoff_start, f.truth.cruise_start, f.truth.landing_start, f.truth.touchdown];
        let found = [s[0].start_index, s[1].start_index, s[2].start_index, s[2].end_index];
        for (t, d) in truth.iter().zip(found) {
            worst_offset = worst_offset.max(t.abs_diff(d));
        }
        let contiguous = s[0].end_index == s[1].start_index && s[1].end_index == s[2].start_index;
        let ordered = s.iter().all(|x| x.start_index < x.end_index);
        let regimes = s.iter().map(|x| x.regime).eq(Regime::ALL);
        let whole = f.record.summary_between(s[0].start_index, s[2].end_index).unwrap().energy;
        let sum: f64 = s.iter().map(|x| x.energy).sum();
        let powers = f.record.powers();
        let times = f.record.times();
        let panel = |i: usize| 0.5 * (times[i] - times[i - 1]) * (powers[i] + powers[i - 1]).abs();
        let allowance: f64 = [s[1].start_index, s[2].start_index].iter().map(|&i| panel(i)).sum();
        if !(contiguous && ordered && regimes) || (sum - whole).abs() > allowance {
            failures.push(format!("trial {trial}: slices not contiguous or energy off by {:.3e} J", sum - whole));
        }
    }
    let ok = failures.is_empty() && worst_offset <= BOUNDARY_SAMPLES;
    let detail = if failures.is_empty() {
        format!("50 trajectories, worst boundary offset {worst_offset} sample(s), slices contiguous and energy-conserving")
    } else {
        failures.join("; ")
    };
    check(ok, detail)
}

fn criterion_physics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.gen_range(0.01..100.0);
        let env = Environment { air_density: rng.gen_range(0.3..1.5), gravity: rng.gen_range(1.0..25.0) };
        let area = rng.gen_range(0.001..10.0);
        let cfg = DroneConfig { name: "p".into(), empty_mass: 1.0, rotor_area_total: area, battery_capacity: 1.0 };
        let cfg4 = DroneConfig { rotor_area_total: 4.0 * area, ..cfg.clone() };
        let p = induced_power(m, &env, &cfg).unwrap();
        let p2 = induced_power(2.0 * m, &env, &cfg).unwrap();
        let p4 = induced_power(m, &env, &cfg4).unwrap();
        worst = worst.max(rel(p2 / p, 2f64.powf(1.5))).max(rel(p4, p / 2.0));
    }
    check(worst <= PHYSICS_REL_TOL, format!("1000 random (m, rho, g, A), worst relative error {worst:.1e}"))
}

// ---------------------------------------------------------------------------

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(u32, &str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "comparison table reproduction", Duration::from_secs(1), Box::new(|| criterion_table(dir.path()))),
        (2, "drone reduction claims", Duration::from_secs(1), Box::new(|| criterion_reductions(dir.path()))),
        (3, "range anchor", Duration::from_secs(1), Box::new(criterion_range_anchor)),
        (4, "range inversion identity", Duration::from_secs(1), Box::new(criterion_inversion)),
        (5, "estimation oracle suite", Duration::from_secs(30), Box::new(criterion_estimation)),
        (6, "dataset reproduction", Duration::from_secs(120), Box::new(criterion_dataset)),
        (7, "boosted-tree adequacy protocol", Duration::from_secs(120), Box::new(criterion_gbt)),
        (8, "segmentation properties", Duration::from_secs(10), Box::new(criterion_segmentation)),
        (9, "induced power scaling laws", Duration::from_secs(1), Box::new(criterion_physics)),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if matches!(outcome.status, Status::Pass) && elapsed > budget {
            outcome = check(false, format!("{} (took {:.2} s, budget {} s)", outcome.detail, elapsed.as_secs_f64(), budget.as_secs()));
        }
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("{tag} [{id}] {name} ({:.2} s): {}", elapsed.as_secs_f64(), outcome.detail);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
