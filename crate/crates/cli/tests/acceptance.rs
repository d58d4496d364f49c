//! End-to-end acceptance checks for the scenario engine and its CLI.
//!
//! Every test here guards one release criterion — an oracle comparison, a
//! published anchor value, a structural property of the curves, or a
//! reproducibility contract — and prints a single `[PASS]` line naming it
//! (visible with `--nocapture`). Tolerances and runtime bounds are asserted,
//! not just observed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use agricarb_core::{
    annual_energy_nonrobotic, annual_energy_robotic, assess, assess_average_baseline,
    build_inventory, densify, device_quantity, efficiency_curve, raw_weight, reconstruct_density,
    run_sensitivity, summarize, thermal_baseline, use_annual, AllocationEntry, AllocationProfile,
    Catalog, CoarseBinSpec, Dependency, DeviceKind, DeviceSpec, FarmSizeDistribution,
    GridIntensity, PerturbationSpec, SizeUnit, TechnologicalSystem, ThermalPass, TsDevice,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn pass(criterion: u32, what: &str) {
    println!("[PASS] criterion {criterion:02} — {what}");
}

fn rel_close(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol * expected.abs().max(1.0)
}

fn base_device(name: &str) -> DeviceSpec {
    DeviceSpec {
        name: name.into(),
        kind: DeviceKind::FixedPerFarm,
        active_power: 50.0,
        sleep_power: 0.0,
        travel_power: 0.0,
        active_hours_per_day: 8.0,
        sleep_hours_per_day: 0.0,
        travel_hours_per_day: 0.0,
        capacity: 0.0,
        use_periodicity_days: 0.0,
        passes_per_year: 0.0,
        solar_daily_supplement: 0.0,
        embodied_ghg: 200.0,
        lifetime_years: 5.0,
        depends_on: None,
        allocation_fraction: 1.0,
    }
}

fn system(name: &str, devices: &[(&str, f64)]) -> TechnologicalSystem {
    TechnologicalSystem {
        name: name.into(),
        devices: devices
            .iter()
            .map(|(d, q)| TsDevice {
                device: (*d).into(),
                base_quantity: *q,
            })
            .collect(),
        farming_tasks: std::collections::BTreeSet::from(["monitoring".to_string()]),
    }
}

fn entry(ts: &str, a: f64, b: f64, w: f64) -> AllocationEntry {
    AllocationEntry {
        ts: ts.into(),
        a,
        b,
        w,
    }
}

// ---------------------------------------------------------------------------
// 1. Share normalization across randomized profiles
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_shares_normalize_across_randomized_profiles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);

    // Independent evaluation of one entry's bell, written out longhand.
    let manual_raw = |e: &AllocationEntry, s: f64| -> f64 {
        if s < e.a || s > e.b {
            return 0.0;
        }
        let m = (2.0 * s - (e.a + e.b)) / (e.b - e.a);
        e.w * (1.0 - m * m) * (1.0 - m * m)
    };

    for _ in 0..1000 {
        let entries: Vec<AllocationEntry> = (0..rng.gen_range(1..=4))
            .map(|i| {
                let a = rng.gen_range(0.0..500.0);
                let b = a + rng.gen_range(1.0..500.0);
                entry(&format!("TS_{i}"), a, b, rng.gen_range(0.01..=1.0))
            })
            .collect();
        let profile = AllocationProfile::new(entries.clone()).unwrap();

        for _ in 0..1000 {
            let s = rng.gen_range(0.0..1100.0);
            let raw_total: f64 = entries.iter().map(|e| manual_raw(e, s)).sum();
            match profile.mass_function(s) {
                Ok(shares) => {
                    assert!(raw_total > 0.0, "shares produced at uncovered size {s}");
                    let sum: f64 = shares.iter().map(|(_, t)| t).sum();
                    assert!(
                        (sum - 1.0).abs() <= 1e-12,
                        "shares sum to {sum} at size {s}"
                    );
                    for (ts, t) in &shares {
                        let covered = entries
                            .iter()
                            .any(|e| e.ts == *ts && s >= e.a && s <= e.b);
                        if !covered {
                            assert_eq!(*t, 0.0, "share of {ts} outside its support at {s}");
                        }
                    }
                }
                Err(_) => {
                    assert!(raw_total <= 0.0, "coverage refused at covered size {s}");
                }
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(5),
        "normalization suite took {elapsed:.2?}"
    );
    pass(
        1,
        "1,000 profiles × 1,000 sizes: shares sum to 1 within 1e-12, zero outside support",
    );
}

// ---------------------------------------------------------------------------
// 2. Bell weight against direct evaluation
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_bell_weight_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let longhand = |a: f64, b: f64, w: f64, s: f64| -> f64 {
        if s < a || s > b {
            return 0.0;
        }
        let m = (2.0 * s - (a + b)) / (b - a);
        w * (1.0 - m * m) * (1.0 - m * m)
    };

    for _ in 0..100 {
        let a = rng.gen_range(-100.0..500.0);
        let b = a + rng.gen_range(0.5..400.0);
        let w = rng.gen_range(0.01..=1.0);
        let e = entry("TS", a, b, w);

        // Endpoints, midpoint and quarter points against the formula
        // evaluated longhand. The endpoints die to zero up to rounding.
        for s in [a, a + 0.25 * (b - a), a + 0.5 * (b - a), a + 0.75 * (b - a), b] {
            let expected = longhand(a, b, w, s);
            let got = raw_weight(&e, s);
            assert!(
                (got - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "bell at s={s}: {got} vs {expected}"
            );
        }
        assert!(raw_weight(&e, a).abs() <= 1e-12);
        assert!(raw_weight(&e, b).abs() <= 1e-12);
    }
    pass(2, "bell weight matches direct evaluation at endpoints, midpoint and quarter points");
}

// ---------------------------------------------------------------------------
// 3. Fleet sizing against brute force
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_fleet_sizing_matches_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);

    // Smallest fleet for which some whole number of working days within the
    // window covers the surface. No division: only exact dyadic products.
    let brute_force = |s: f64, capacity: f64, hours: f64, window: u32| -> f64 {
        let mut q = 1.0f64;
        loop {
            let mut day = 1u32;
            let fits = loop {
                if f64::from(day) * hours * (q * capacity) >= s {
                    break true;
                }
                if day >= window {
                    break false;
                }
                day += 1;
            };
            if fits {
                return q;
            }
            q += 1.0;
        }
    };

    for _ in 0..50 {
        // Dyadic capacity and hours keep every boundary product exact.
        let capacity = f64::from(rng.gen_range(1u32..=12)) * 0.25;
        let hours = f64::from(rng.gen_range(12u32..=32)) * 0.5;
        let window = rng.gen_range(5u32..=30);

        let mut robot = base_device("robot");
        robot.kind = DeviceKind::Robotic;
        robot.capacity = capacity;
        robot.active_hours_per_day = hours;
        robot.use_periodicity_days = f64::from(window);
        robot.passes_per_year = 9.0;

        for s in 1..=5000u32 {
            let s = f64::from(s);
            let engine = device_quantity(&robot, 1.0, s, None).unwrap();
            let oracle = brute_force(s, capacity, hours, window);
            assert_eq!(
                engine, oracle,
                "fleet for s={s}, C={capacity}, T={hours}, U={window}"
            );
        }
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(30),
        "fleet-sizing oracle took {elapsed:.2?}"
    );
    pass(3, "fleet size equals brute-force minimum for s ∈ [1, 5000] × 50 parameter sets");
}

// ---------------------------------------------------------------------------
// 4. Inventory against an explicit per-farm loop
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_inventory_matches_per_farm_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);

    for case in 0..20 {
        // Distinct integer farm sizes, one farm each.
        let n_farms = rng.gen_range(1usize..=10);
        let mut sizes = Vec::with_capacity(n_farms);
        let mut s = 0u32;
        for _ in 0..n_farms {
            s += rng.gen_range(3u32..30);
            sizes.push(s);
        }

        let reader_capacity = f64::from([50u32, 100, 250][rng.gen_range(0..3)]);
        let robot_capacity = f64::from(rng.gen_range(1u32..=8)) * 0.25;
        let robot_hours = f64::from(rng.gen_range(12u32..=32)) * 0.5;
        let robot_window = f64::from(rng.gen_range(5u32..=20));

        let mut collar = base_device("collar");
        collar.kind = DeviceKind::CapacityScaled;
        collar.capacity = 1.0;
        let mut reader = base_device("reader");
        reader.kind = DeviceKind::CapacityScaled;
        reader.capacity = reader_capacity;
        reader.active_power = 3.0;
        reader.sleep_power = 0.5;
        reader.active_hours_per_day = 11.5;
        reader.sleep_hours_per_day = 12.5;
        let mut board = base_device("board");
        board.kind = DeviceKind::Dependent;
        board.depends_on = Some(Dependency {
            device: "reader".into(),
            ratio: 0.25,
        });
        let mut robot = base_device("robot");
        robot.kind = DeviceKind::Robotic;
        robot.capacity = robot_capacity;
        robot.active_hours_per_day = robot_hours;
        robot.use_periodicity_days = robot_window;
        robot.passes_per_year = 9.0;
        robot.active_power = 400.0;
        robot.travel_power = 200.0;
        robot.travel_hours_per_day = 0.5;
        robot.solar_daily_supplement = 300.0;

        let catalog = Catalog {
            devices: vec![
                base_device("laptop"),
                collar.clone(),
                reader.clone(),
                board.clone(),
                robot.clone(),
            ],
            systems: vec![
                system(
                    "TS_SMALL",
                    &[("laptop", 2.0), ("collar", 1.0), ("reader", 1.0), ("board", 1.0)],
                ),
                system("TS_BIG", &[("laptop", 1.0), ("robot", 1.0)]),
            ],
        };

        // 0/1 assignment: farms up to the cut run TS_SMALL, the rest TS_BIG.
        // The cut sits strictly between two sizes so every farm lies strictly
        // inside exactly one support.
        let cut_index = rng.gen_range(0..=n_farms);
        let cut = match cut_index {
            0 => f64::from(sizes[0]) - 0.5,
            i if i == n_farms => f64::from(sizes[n_farms - 1]) + 0.5,
            i => f64::from(sizes[i - 1] + sizes[i]) / 2.0,
        };
        let top = 2.0 * f64::from(*sizes.last().unwrap()) + 1.0;
        let mut entries = Vec::new();
        if cut_index > 0 {
            entries.push(entry("TS_SMALL", 0.0, cut, 1.0));
        }
        if cut_index < n_farms {
            entries.push(entry("TS_BIG", cut, top, 1.0));
        }
        let profile = AllocationProfile::new(entries).unwrap();

        let dist = FarmSizeDistribution::new(
            sizes.iter().map(|&v| f64::from(v)).collect(),
            vec![1.0; n_farms],
            SizeUnit::Heads,
        )
        .unwrap();

        let inventory = build_inventory(&catalog, &profile, &dist).unwrap();

        // Explicit per-farm loop, devices in record order (alphabetical
        // within a farm), accumulating the same way the engine reports.
        let mut quantities: BTreeMap<&str, f64> = BTreeMap::new();
        let mut energy = 0.0f64;
        let mut expected_records = 0usize;
        for &size in &sizes {
            let s = f64::from(size);
            let small = s < cut;
            let farm_devices: Vec<(&DeviceSpec, f64)> = if small {
                let q_collar = s; // capacity 1: one per head
                let q_reader = f64::from(size.div_ceil(reader_capacity as u32));
                let q_board = (0.25 * q_reader).ceil();
                vec![
                    (&board, q_board),
                    (&collar, q_collar),
                    (&catalog.devices[0], 2.0),
                    (&reader, q_reader),
                ]
            } else {
                let per_robot = robot_window * robot_capacity * robot_hours;
                let mut q_robot = 1.0;
                while q_robot * per_robot < s {
                    q_robot += 1.0;
                }
                vec![(&catalog.devices[0], 1.0), (&robot, q_robot)]
            };
            for (device, quantity) in farm_devices {
                *quantities.entry(device.name.as_str()).or_default() += quantity;
                let farm_energy = match device.kind {
                    DeviceKind::Robotic => {
                        let q = quantity;
                        let ttotal = s / (q * device.capacity);
                        let mut days = 1.0f64;
                        while days * device.active_hours_per_day < ttotal {
                            days += 1.0;
                        }
                        let travel_net = device.travel_power * device.travel_hours_per_day
                            - device.solar_daily_supplement;
                        (device.passes_per_year
                            * q
                            * (device.active_power * ttotal + travel_net * days))
                            .max(0.0)
                    }
                    _ => {
                        quantity
                            * 365.0
                            * (device.active_hours_per_day * device.active_power
                                + device.sleep_hours_per_day * device.sleep_power)
                    }
                };
                energy += farm_energy;
                expected_records += 1;
            }
        }

        assert_eq!(inventory.records.len(), expected_records, "case {case}");
        for (device, expected) in quantities {
            assert_eq!(
                inventory.total_quantity(device),
                expected,
                "case {case}: quantity of {device}"
            );
        }
        assert_eq!(inventory.total_energy_wh(), energy, "case {case}: energy");
    }
    pass(4, "inventory equals the explicit per-farm loop exactly on ≤10-farm territories");
}

// ---------------------------------------------------------------------------
// 5. Energy formulas against longhand recomputation
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_energy_formulas_match_longhand_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);

    for _ in 0..20 {
        // Stationary device: daily active/sleep split.
        let mut dev = base_device("box");
        dev.active_power = rng.gen_range(0.5..300.0);
        dev.sleep_power = rng.gen_range(0.0..5.0);
        dev.active_hours_per_day = rng.gen_range(0.5..23.0);
        dev.sleep_hours_per_day = 24.0 - dev.active_hours_per_day;
        let q = f64::from(rng.gen_range(1u32..500));
        let expected = q
            * 365.0
            * (dev.active_hours_per_day * dev.active_power
                + dev.sleep_hours_per_day * dev.sleep_power);
        assert!(
            rel_close(annual_energy_nonrobotic(&dev, q), expected, 1e-9),
            "stationary energy"
        );

        // Robot fleet: work phase per hour, travel phase per working day.
        let mut robot = base_device("robot");
        robot.kind = DeviceKind::Robotic;
        robot.capacity = f64::from(rng.gen_range(1u32..=12)) * 0.25;
        robot.active_hours_per_day = f64::from(rng.gen_range(12u32..=32)) * 0.5;
        robot.use_periodicity_days = f64::from(rng.gen_range(5u32..=30));
        robot.passes_per_year = f64::from(rng.gen_range(1u32..=12));
        robot.active_power = rng.gen_range(100.0..4000.0);
        robot.travel_power = rng.gen_range(50.0..2000.0);
        robot.travel_hours_per_day = [0.25, 0.5, 1.0][rng.gen_range(0..3)];
        robot.solar_daily_supplement = rng.gen_range(0.0..800.0);
        let s = f64::from(rng.gen_range(1u32..=5000));

        let per_robot =
            robot.use_periodicity_days * robot.capacity * robot.active_hours_per_day;
        let mut q_r = 1.0f64;
        while q_r * per_robot < s {
            q_r += 1.0;
        }
        let ttotal = s / (q_r * robot.capacity);
        let mut days = 1.0f64;
        while days * robot.active_hours_per_day < ttotal {
            days += 1.0;
        }
        let travel_net =
            robot.travel_power * robot.travel_hours_per_day - robot.solar_daily_supplement;
        let expected = (robot.passes_per_year
            * q_r
            * (robot.active_power * ttotal + travel_net * days))
            .max(0.0);
        assert!(
            rel_close(annual_energy_robotic(&robot, s).unwrap(), expected, 1e-9),
            "robot energy at s={s}"
        );

        // Exact cancellation: a solar supplement equal to the travel draw
        // leaves pure work energy, to the last bit.
        robot.solar_daily_supplement = robot.travel_power * robot.travel_hours_per_day;
        let work_only = robot.passes_per_year * q_r * (robot.active_power * ttotal);
        assert_eq!(
            annual_energy_robotic(&robot, s).unwrap(),
            work_only,
            "travel term should cancel exactly"
        );
    }
    pass(5, "energy formulas match longhand recomputation; solar cancellation is exact");
}

// ---------------------------------------------------------------------------
// 6. Use-phase conversion anchor and linearity
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_use_phase_conversion_is_exact_and_linear() {
    let grid = GridIntensity::new("FR", 68.0).unwrap();
    // 1,000 kWh at 68 g/kWh is 68 kg — exactly.
    assert_eq!(use_annual(1_000_000.0, &grid), 68.0);

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for _ in 0..200 {
        let energy = rng.gen_range(1.0..1e9);
        let intensity = rng.gen_range(1.0..1500.0);
        let k = rng.gen_range(0.01..100.0);
        let g = GridIntensity::new("X", intensity).unwrap();
        let base = use_annual(energy, &g);

        let scaled_energy = use_annual(k * energy, &g);
        assert!(
            rel_close(scaled_energy, k * base, 1e-12),
            "not linear in energy: {scaled_energy} vs {}",
            k * base
        );

        let g_scaled = GridIntensity::new("X", k * intensity).unwrap();
        let scaled_intensity = use_annual(energy, &g_scaled);
        assert!(
            rel_close(scaled_intensity, k * base, 1e-12),
            "not linear in intensity: {scaled_intensity} vs {}",
            k * base
        );
    }
    pass(6, "1,000 kWh at 68 g/kWh → 68 kg exactly; conversion linear in both factors");
}

// ---------------------------------------------------------------------------
// 7. Average-size extrapolation vs the real distribution
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_average_baseline_diverges_on_ceilings_only() {
    let grid = GridIntensity::new("FR", 68.0).unwrap();

    // Two sizes straddling a 100-head reader: the 140-head farms need two
    // readers, the average-size farm (exactly 100 heads) needs one.
    let mut reader = base_device("reader");
    reader.kind = DeviceKind::CapacityScaled;
    reader.capacity = 100.0;
    let catalog = Catalog {
        devices: vec![reader],
        systems: vec![system("TS", &[("reader", 1.0)])],
    };
    let dist = FarmSizeDistribution::new(
        vec![60.0, 140.0],
        vec![50.0, 50.0],
        SizeUnit::Heads,
    )
    .unwrap();
    let profile = AllocationProfile::full_deployment("TS", &dist);
    let inventory = build_inventory(&catalog, &profile, &dist).unwrap();
    let actual = assess(&catalog, &inventory, &grid).unwrap().totals;
    let extrapolated = assess_average_baseline(&catalog, "TS", &dist, &grid).unwrap();
    let gap = (extrapolated.total_kg_per_year() - actual.total_kg_per_year()).abs()
        / actual.total_kg_per_year();
    assert!(gap >= 0.05, "ceiling fixture gap is only {:.2}%", gap * 100.0);

    // Affine fixture: a fixed laptop and a one-per-head collar make every
    // quantity affine in size, so the shortcut is exact.
    let mut collar = base_device("collar");
    collar.kind = DeviceKind::CapacityScaled;
    collar.capacity = 1.0;
    let catalog = Catalog {
        devices: vec![base_device("laptop"), collar],
        systems: vec![system("TS", &[("laptop", 1.0), ("collar", 1.0)])],
    };
    let inventory = build_inventory(&catalog, &profile, &dist).unwrap();
    let actual = assess(&catalog, &inventory, &grid).unwrap().totals;
    let extrapolated = assess_average_baseline(&catalog, "TS", &dist, &grid).unwrap();
    assert!(
        rel_close(
            extrapolated.total_kg_per_year(),
            actual.total_kg_per_year(),
            1e-9
        ),
        "affine fixture should make the shortcut exact: {} vs {}",
        extrapolated.total_kg_per_year(),
        actual.total_kg_per_year()
    );
    pass(7, "average-size shortcut diverges ≥5% across a ceiling, exact on the affine fixture");
}

// ---------------------------------------------------------------------------
// 8. Efficiency-curve shape: economies of scale, then a rebound
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_efficiency_curve_falls_then_rebounds() {
    let dir = fixtures_dir();
    let catalog =
        Catalog::from_toml(&fs::read_to_string(dir.join("catalogs/cattle.toml")).unwrap())
            .unwrap();
    let dist = FarmSizeDistribution::from_delimited(
        &fs::read_to_string(dir.join("distributions/cattle_heads.csv")).unwrap(),
        SizeUnit::Heads,
    )
    .unwrap();

    // A light identification system everywhere, and a heavy vision system
    // whose adoption climbs through the larger herds.
    let profile = AllocationProfile::new(vec![
        entry("TS_RFID", 15.0, 520.0, 0.25),
        entry("TS_PC", 100.0, 520.0, 1.0),
    ])
    .unwrap();
    let inventory = build_inventory(&catalog, &profile, &dist).unwrap();
    let grid = GridIntensity::new("FR", 68.0).unwrap();
    let result = assess(&catalog, &inventory, &grid).unwrap();
    let curve = efficiency_curve(&result, &dist);
    assert!(curve.len() >= 10, "curve has only {} points", curve.len());

    let mut rebound_at = None;
    for pair in curve.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        if hi.farm_size <= 100.0 {
            assert!(
                hi.total_kg_per_size_unit < lo.total_kg_per_size_unit,
                "per-head cost should fall from {} to {} heads",
                lo.farm_size,
                hi.farm_size
            );
        } else if hi.total_kg_per_size_unit > lo.total_kg_per_size_unit && rebound_at.is_none() {
            rebound_at = Some(hi.farm_size);
        }
    }
    let rebound = rebound_at.expect("per-head cost never rebounded");
    assert!(rebound > 100.0);
    pass(8, "per-head curve falls strictly up to 100 heads, then rebounds as the heavy system takes over");
}

// ---------------------------------------------------------------------------
// 9. Dense reconstruction of the shipped cereal-farm bins
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_cereal_bins_densify_to_census_totals() {
    #[derive(serde::Deserialize)]
    struct Doc {
        distribution: Dist,
    }
    #[derive(serde::Deserialize)]
    struct Dist {
        coarse: CoarseBinSpec,
        step: f64,
    }

    let path = fixtures_dir().join("scenarios/crop_full_br.toml");
    let doc: Doc = toml::from_str(&fs::read_to_string(path).unwrap()).unwrap();

    let dist = densify(&doc.distribution.coarse, doc.distribution.step, SizeUnit::Hectares)
        .unwrap();
    let farms = dist.total_farms();
    let surface = dist.total_size();
    assert!(
        (farms - 65_223.0).abs() <= 0.001 * 65_223.0,
        "reconstructed farm count {farms}"
    );
    assert!(
        (surface - 7_358_412.0).abs() <= 0.005 * 7_358_412.0,
        "reconstructed surface {surface}"
    );
    assert!(dist.counts().iter().all(|n| *n >= 0.0));

    let density = reconstruct_density(&doc.distribution.coarse).unwrap();
    assert!(density.heights().iter().all(|h| *h >= 0.0));
    let peak = density.heights().iter().fold(0.0f64, |m, h| m.max(*h));
    for &knot in &density.knots()[1..density.knots().len() - 1] {
        let (left, right) = (density.value(knot - 1e-6), density.value(knot + 1e-6));
        assert!(
            (left - right).abs() <= 1e-3 * (peak + 1.0),
            "density jumps at knot {knot}"
        );
    }
    pass(9, "cereal bins densify to 65,223 farms ±0.1% and 7,358,412 ha ±0.5%, non-negative and continuous");
}

// ---------------------------------------------------------------------------
// 10. Monte Carlo statistics on a ceiling-free fixture
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_monte_carlo_reproduces_the_input_spread() {
    let start = Instant::now();

    // One fixed device with no sleep draw: use emissions are proportional to
    // the perturbed work power, so the output spread must equal the input's.
    let catalog = Catalog {
        devices: vec![base_device("laptop")],
        systems: vec![system("TS_A", &[("laptop", 1.0)])],
    };
    let dist =
        FarmSizeDistribution::new(vec![60.0], vec![500.0], SizeUnit::Heads).unwrap();
    let profile = AllocationProfile::full_deployment("TS_A", &dist);
    let grid = GridIntensity::new("FR", 68.0).unwrap();
    let spec = PerturbationSpec {
        relative_std: 0.20,
        samples: 10_000,
        seed: 4242,
        ..PerturbationSpec::default()
    };

    let result = run_sensitivity(&catalog, &profile, &dist, &grid, &spec).unwrap();
    assert!(result.failed.is_empty());
    let summary = summarize(&result);
    let row = summary
        .rows
        .iter()
        .find(|r| r.ts == "TS_A" && r.metric == "use_kg")
        .unwrap();
    assert!(
        (row.relative_std - 0.20).abs() <= 0.02,
        "output relative std {} vs input 0.20",
        row.relative_std
    );

    // Same seed, same machine state: bitwise identical samples.
    let again = run_sensitivity(&catalog, &profile, &dist, &grid, &spec).unwrap();
    let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    assert_eq!(
        bits(&result.per_ts["TS_A"].total_kg),
        bits(&again.per_ts["TS_A"].total_kg)
    );

    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(600),
        "Monte Carlo took {elapsed:.2?}"
    );
    pass(10, "10,000-sample spread within 2% of the 20% input; same seed is bitwise identical");
}

// ---------------------------------------------------------------------------
// 11. Thermal anchor and the robot plausibility band
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_thermal_anchor_and_robot_band() {
    // 8 + 32 litres of non-road diesel per hectare at 3.125 kg CO2e/litre is
    // 125 kg/ha — the calibration behind the 0.92 Mt conventional baseline.
    let passes = vec![
        ThermalPass {
            operation: "seeding".into(),
            litres_per_ha: 8.0,
        },
        ThermalPass {
            operation: "mechanical_weeding".into(),
            litres_per_ha: 32.0,
        },
    ];
    let baseline = thermal_baseline(7_358_412.0, &passes, 3.125);
    assert!(
        rel_close(baseline, 0.92e9, 0.005),
        "thermal baseline {baseline} kg vs 0.92 Mt"
    );

    // Robot deployments over the same reconstructed territory must land in
    // the 0.1–0.5 Mt/year band.
    let dir = fixtures_dir();
    let catalog =
        Catalog::from_toml(&fs::read_to_string(dir.join("catalogs/crop.toml")).unwrap()).unwrap();

    #[derive(serde::Deserialize)]
    struct Doc {
        distribution: Dist,
    }
    #[derive(serde::Deserialize)]
    struct Dist {
        coarse: CoarseBinSpec,
        step: f64,
    }
    let doc: Doc = toml::from_str(
        &fs::read_to_string(dir.join("scenarios/crop_full_br.toml")).unwrap(),
    )
    .unwrap();
    let dist = densify(&doc.distribution.coarse, doc.distribution.step, SizeUnit::Hectares)
        .unwrap();
    let grid = GridIntensity::new("FR", 68.0).unwrap();

    for ts in ["TS_BR", "TS_IR", "TS_AR"] {
        let profile = AllocationProfile::full_deployment(ts, &dist);
        let inventory = build_inventory(&catalog, &profile, &dist).unwrap();
        let total = assess(&catalog, &inventory, &grid)
            .unwrap()
            .totals
            .total_kg_per_year();
        assert!(
            (1.0e8..=5.0e8).contains(&total),
            "{ts} full deployment totals {total} kg/year, outside 0.1–0.5 Mt"
        );
    }
    pass(11, "thermal baseline hits 0.92 Mt ±0.5%; robot deployments stay in the 0.1–0.5 Mt band");
}

// ---------------------------------------------------------------------------
// 12. CLI byte-for-byte reproducibility on every shipped fixture
// ---------------------------------------------------------------------------

#[test]
fn criterion_12_cli_runs_are_byte_identical() {
    let scenarios_dir = fixtures_dir().join("scenarios");
    let mut scenarios: Vec<PathBuf> = fs::read_dir(&scenarios_dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().and_then(|x| x.to_str()) == Some("toml")).then_some(p)
        })
        .collect();
    scenarios.sort();
    assert!(!scenarios.is_empty(), "no shipped scenarios found");

    let tmp = tempfile::tempdir().unwrap();
    for scenario in &scenarios {
        let name = scenario.file_stem().unwrap().to_str().unwrap();
        let dirs = [tmp.path().join(format!("{name}_a")), tmp.path().join(format!("{name}_b"))];
        for out in &dirs {
            let output = Command::new(env!("CARGO_BIN_EXE_agricarb"))
                .args(["run"])
                .arg(scenario)
                .args(["--seed", "7", "--out"])
                .arg(out)
                .output()
                .unwrap();
            assert!(
                output.status.success(),
                "run failed for {name}: {}",
                String::from_utf8_lossy(&output.stderr)
            );
        }

        let listing = |dir: &Path| -> Vec<String> {
            let mut names: Vec<String> = fs::read_dir(dir)
                .unwrap()
                .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .collect();
            names.sort();
            names
        };
        let files = listing(&dirs[0]);
        assert_eq!(files, listing(&dirs[1]), "{name}: file sets differ");
        assert!(files.len() >= 9, "{name}: only {} output tables", files.len());
        for file in &files {
            let a = fs::read(dirs[0].join(file)).unwrap();
            let b = fs::read(dirs[1].join(file)).unwrap();
            assert_eq!(a, b, "{name}/{file} differs between identical runs");
        }
    }
    pass(12, "repeated runs of every shipped scenario produce byte-identical output directories");
}
