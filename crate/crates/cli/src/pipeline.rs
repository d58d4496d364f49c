//! Scenario orchestration: the `run`, `compare`, and `validate` verbs.
//!
//! `run` pushes one scenario through the full engine and writes its tables;
//! `compare` computes several scenarios in memory and prints one aligned
//! table; `validate` dry-runs every input check and reports findings without
//! computing anything.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use agricarb_core::report::{self, BaselineRow, Delimiter};
use agricarb_core::{
    allocation_table, assess, assess_average_baseline, build_inventory, efficiency_curve,
    run_sensitivity, summarize, AllocationProfile, AllocationTable, AssessmentResult,
    EfficiencyPoint, Error as CoreError, FarmSizeDistribution, Inventory, SensitivityResult,
    SummaryTable, Totals,
};

use crate::config::{coverage_message, LoadedScenario, ScenarioConfig};
use crate::CliError;

/// Command-line overrides that outrank the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Delimiter,
}

/// Load a scenario and apply the overrides: `--out` beats `AGRICARB_OUT`
/// beats the config's `output_dir`; `--seed` beats the config's seed.
pub fn load_scenario(config_path: &Path, overrides: &Overrides) -> Result<LoadedScenario, CliError> {
    let config = ScenarioConfig::from_path(config_path)?;
    let dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let mut loaded = config.resolve(dir)?;
    if let Some(seed) = overrides.seed {
        if let Some(spec) = &mut loaded.sensitivity {
            spec.seed = seed;
        }
    }
    if let Some(out) = &overrides.out {
        loaded.output_dir = out.clone();
    } else if let Some(out) = std::env::var_os("AGRICARB_OUT") {
        loaded.output_dir = PathBuf::from(out);
    }
    Ok(loaded)
}

/// Everything `run` and `compare` derive from one scenario.
pub struct Computed {
    pub table: AllocationTable,
    pub inventory: Inventory,
    pub result: AssessmentResult,
    pub curve: Vec<EfficiencyPoint>,
    pub baselines: Vec<BaselineRow>,
}

/// Deterministic part of the engine: inventory, assessment, efficiency
/// curve, and the per-system average-farm baseline comparison.
pub fn compute(s: &LoadedScenario) -> Result<Computed, CliError> {
    let table = allocation_table(&s.profile, &s.dist).map_err(CliError::engine)?;
    let inventory = build_inventory(&s.catalog, &s.profile, &s.dist).map_err(CliError::engine)?;
    let result = assess(&s.catalog, &inventory, &s.grid).map_err(CliError::engine)?;
    let curve = efficiency_curve(&result, &s.dist);

    // The baseline table isolates the size-structure effect per system:
    // full deployment resolved over the distribution vs. the same system
    // extrapolated from the average farm.
    let mut baselines = Vec::new();
    for ts in s.profile.ts_names() {
        let full = AllocationProfile::full_deployment(ts, &s.dist);
        let inv = build_inventory(&s.catalog, &full, &s.dist).map_err(CliError::engine)?;
        let resolved = assess(&s.catalog, &inv, &s.grid).map_err(CliError::engine)?;
        let baseline =
            assess_average_baseline(&s.catalog, ts, &s.dist, &s.grid).map_err(CliError::engine)?;
        baselines.push(BaselineRow {
            ts: ts.to_string(),
            distribution_total_kg: resolved.totals.total_kg_per_year(),
            baseline_total_kg: baseline.total_kg_per_year(),
        });
    }

    Ok(Computed {
        table,
        inventory,
        result,
        curve,
        baselines,
    })
}

/// The whole scenario re-run as if every farm had the average size: same
/// farm count, same total surface, same adoption profile. This is the
/// "average extrapolation" diamond of the comparison table.
pub fn average_extrapolation(s: &LoadedScenario) -> Result<Totals, CliError> {
    let avg = s.dist.average_size().map_err(CliError::engine)?;
    let one = FarmSizeDistribution::new(vec![avg], vec![s.dist.total_farms()], s.dist.size_unit())
        .map_err(CliError::engine)?;
    let inv = build_inventory(&s.catalog, &s.profile, &one).map_err(CliError::engine)?;
    Ok(assess(&s.catalog, &inv, &s.grid)
        .map_err(CliError::engine)?
        .totals)
}

fn emit(
    dir: &Path,
    name: &str,
    delim: Delimiter,
    written: &mut Vec<PathBuf>,
    write: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
) -> Result<(), CliError> {
    let path = dir.join(format!("{name}.{}", delim.extension()));
    let describe = |e: io::Error| CliError::Engine(format!("cannot write {}: {e}", path.display()));
    let file = fs::File::create(&path).map_err(describe)?;
    let mut w = BufWriter::new(file);
    write(&mut w).and_then(|()| w.flush()).map_err(describe)?;
    written.push(path);
    Ok(())
}

/// Write every deterministic table into the scenario's output directory and
/// return the paths, in write order.
pub fn write_outputs(
    s: &LoadedScenario,
    computed: &Computed,
    delim: Delimiter,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&s.output_dir).map_err(|e| {
        CliError::Engine(format!(
            "cannot create output directory {}: {e}",
            s.output_dir.display()
        ))
    })?;
    let dir = &s.output_dir;
    let unit = s.dist.size_unit();
    let mut written = Vec::new();

    emit(dir, "distribution", delim, &mut written, |w| {
        report::write_distribution(w, &s.dist, delim)
    })?;
    emit(dir, "allocation_table", delim, &mut written, |w| {
        report::write_allocation_table(w, &computed.table, unit, delim)
    })?;
    emit(dir, "inventory", delim, &mut written, |w| {
        report::write_inventory(w, &computed.inventory, unit, delim)
    })?;
    emit(dir, "breakdown_by_device", delim, &mut written, |w| {
        report::write_breakdown_by_device(w, &computed.result, delim)
    })?;
    emit(dir, "breakdown_by_ts", delim, &mut written, |w| {
        report::write_breakdown_by_ts(w, &computed.result, delim)
    })?;
    emit(dir, "breakdown_by_size", delim, &mut written, |w| {
        report::write_breakdown_by_size(w, &computed.result, unit, delim)
    })?;
    emit(dir, "totals", delim, &mut written, |w| {
        report::write_totals(w, &computed.result.totals, delim)
    })?;
    emit(dir, "efficiency_curve", delim, &mut written, |w| {
        report::write_efficiency_curve(w, &computed.curve, unit, delim)
    })?;
    emit(dir, "baseline_comparison", delim, &mut written, |w| {
        report::write_baseline_comparison(w, &computed.baselines, delim)
    })?;
    if let Some(thermal) = &s.thermal {
        emit(dir, "thermal_baseline", delim, &mut written, |w| {
            report::write_thermal_baseline(
                w,
                thermal.surface_ha,
                &thermal.passes,
                thermal.emission_factor_kg_per_litre,
                delim,
            )
        })?;
    }
    Ok(written)
}

/// Run one scenario end to end; prints the totals summary on success.
pub fn run(config_path: &Path, overrides: &Overrides) -> Result<(), CliError> {
    let scenario = load_scenario(config_path, overrides)?;
    let computed = compute(&scenario)?;
    let mut written = write_outputs(&scenario, &computed, overrides.format)?;

    let sensitivity = match &scenario.sensitivity {
        Some(spec) => {
            let result = run_sensitivity(
                &scenario.catalog,
                &scenario.profile,
                &scenario.dist,
                &scenario.grid,
                spec,
            )
            .map_err(CliError::engine)?;
            let summary = summarize(&result);
            emit(
                &scenario.output_dir,
                "sensitivity_samples",
                overrides.format,
                &mut written,
                |w| report::write_sensitivity_samples(w, &result, overrides.format),
            )?;
            emit(
                &scenario.output_dir,
                "sensitivity_summary",
                overrides.format,
                &mut written,
                |w| report::write_sensitivity_summary(w, &summary, overrides.format),
            )?;
            Some((result, summary))
        }
        None => None,
    };

    print!("{}", summary_screen(&scenario, &computed, sensitivity.as_ref(), &written));
    Ok(())
}

/// The one-screen summary `run` prints.
fn summary_screen(
    s: &LoadedScenario,
    computed: &Computed,
    sensitivity: Option<&(SensitivityResult, SummaryTable)>,
    written: &[PathBuf],
) -> String {
    use report::sig6;

    let totals = &computed.result.totals;
    let mut out = String::new();
    let mut line = |text: String| {
        out.push_str(&text);
        out.push('\n');
    };

    line(format!("scenario {}", s.name));
    line(format!(
        "  distribution  {} sizes | {} farms | {} {}",
        s.dist.len(),
        s.dist.total_farms(),
        s.dist.total_size(),
        s.dist.size_unit(),
    ));
    line(format!(
        "  grid          {} @ {} gCO2e/kWh",
        s.grid.name, s.grid.intensity
    ));
    line(format!("  systems       {}", s.profile.ts_names().join(", ")));
    line(format!(
        "  embodied      {} kgCO2e/year",
        sig6(totals.embodied_kg_per_year)
    ));
    line(format!(
        "  use           {} kgCO2e/year",
        sig6(totals.use_kg_per_year)
    ));
    line(format!(
        "  total         {} kgCO2e/year",
        sig6(totals.total_kg_per_year())
    ));
    line(format!(
        "  energy        {} kWh/year",
        sig6(totals.energy_kwh_per_year)
    ));
    if let Some(thermal) = &s.thermal {
        line(format!(
            "  thermal       {} kgCO2e/year (fuel baseline over {} ha)",
            sig6(agricarb_core::thermal_baseline(
                thermal.surface_ha,
                &thermal.passes,
                thermal.emission_factor_kg_per_litre
            )),
            thermal.surface_ha,
        ));
    }
    if let Some((result, summary)) = sensitivity {
        let spread: Vec<String> = summary
            .rows
            .iter()
            .filter(|r| r.metric == "total_kg")
            .map(|r| format!("{} {:.3}", r.ts, r.relative_std))
            .collect();
        line(format!(
            "  sensitivity   {} samples ({} failed) | total rsd: {}",
            result.samples,
            result.failed.len(),
            spread.join(", "),
        ));
    }
    if !computed.inventory.warnings.is_empty() {
        let first = &computed.inventory.warnings[0];
        line(format!(
            "  feasibility   {} warning(s), e.g. '{}' at size {} needs {} day(s) of {} available",
            computed.inventory.warnings.len(),
            first.device,
            first.farm_size,
            first.days_needed,
            first.days_available,
        ));
    }
    if let Some(dir) = written.first().and_then(|p| p.parent()) {
        line(format!(
            "  wrote {} tables to {}",
            written.len(),
            dir.display()
        ));
    }
    out
}

/// Run several scenarios and print one aligned table: totals, the
/// average-extrapolation baseline, then per-device territory emissions.
pub fn compare(paths: &[PathBuf], overrides: &Overrides) -> Result<(), CliError> {
    if paths.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two scenario configs".into(),
        ));
    }
    let mut scenarios = Vec::with_capacity(paths.len());
    for path in paths {
        scenarios.push(load_scenario(path, overrides)?);
    }
    let unit = scenarios[0].dist.size_unit();
    for s in &scenarios[1..] {
        if s.dist.size_unit() != unit {
            return Err(CliError::Config(format!(
                "size_unit mismatch: '{}' uses {}, '{}' uses {}",
                scenarios[0].name,
                unit,
                s.name,
                s.dist.size_unit(),
            )));
        }
    }

    let mut computed = Vec::with_capacity(scenarios.len());
    let mut diamonds = Vec::with_capacity(scenarios.len());
    for s in &scenarios {
        computed.push(compute(s)?);
        diamonds.push(average_extrapolation(s)?);
    }

    let mut stdout = io::stdout().lock();
    write_comparison(&mut stdout, &scenarios, &computed, &diamonds, overrides.format)
        .map_err(|e| CliError::Engine(format!("cannot write comparison: {e}")))?;
    Ok(())
}

fn write_comparison(
    w: &mut impl Write,
    scenarios: &[LoadedScenario],
    computed: &[Computed],
    diamonds: &[Totals],
    delim: Delimiter,
) -> io::Result<()> {
    use report::sig6;
    let sep = delim.sep();

    writeln!(
        w,
        "# units: masses = kg CO2e/year; energy = kWh/year; one column per scenario"
    )?;
    let names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    writeln!(w, "row{sep}{}", names.join(&sep.to_string()))?;

    let mut row = |label: String, values: Vec<String>| -> io::Result<()> {
        writeln!(w, "{label}{sep}{}", values.join(&sep.to_string()))
    };

    row(
        "embodied_kgCO2e_per_year".into(),
        computed
            .iter()
            .map(|c| sig6(c.result.totals.embodied_kg_per_year))
            .collect(),
    )?;
    row(
        "use_kgCO2e_per_year".into(),
        computed
            .iter()
            .map(|c| sig6(c.result.totals.use_kg_per_year))
            .collect(),
    )?;
    row(
        "total_kgCO2e_per_year".into(),
        computed
            .iter()
            .map(|c| sig6(c.result.totals.total_kg_per_year()))
            .collect(),
    )?;
    row(
        "energy_kWh_per_year".into(),
        computed
            .iter()
            .map(|c| sig6(c.result.totals.energy_kwh_per_year))
            .collect(),
    )?;
    row(
        "avg_extrapolation_total_kgCO2e_per_year".into(),
        diamonds
            .iter()
            .map(|t| sig6(t.total_kg_per_year()))
            .collect(),
    )?;

    let devices: BTreeSet<&str> = computed
        .iter()
        .flat_map(|c| c.result.by_device.keys().map(String::as_str))
        .collect();
    for device in devices {
        row(
            format!("device:{device}"),
            computed
                .iter()
                .map(|c| {
                    let total = c
                        .result
                        .by_device
                        .get(device)
                        .map_or(0.0, Totals::total_kg_per_year);
                    sig6(total)
                })
                .collect(),
        )?;
    }
    Ok(())
}

/// Dry-run every input check and collect findings. An empty list means the
/// scenario is runnable; the caller prints `OK`.
pub fn validate(config_path: &Path) -> Vec<String> {
    let mut findings = Vec::new();
    let config = match ScenarioConfig::from_path(config_path) {
        Ok(config) => config,
        Err(e) => return vec![e.to_string()],
    };
    let dir = config_path.parent().unwrap_or_else(|| Path::new("."));

    let exclusive_ok = match (&config.full_deployment, &config.profile) {
        (Some(_), Some(_)) => {
            findings
                .push("`full_deployment` and `profile` are mutually exclusive; keep one".into());
            false
        }
        (None, None) => {
            findings.push("one of `full_deployment` or `profile` is required".into());
            false
        }
        _ => true,
    };

    // Catalog problems are listed exhaustively, not first-error-only.
    let catalog_path = dir.join(&config.catalog);
    let catalog = match fs::read_to_string(&catalog_path)
        .map_err(|e| format!("catalog {}: cannot read: {e}", catalog_path.display()))
        .and_then(|text| {
            agricarb_core::Catalog::from_toml(&text)
                .map_err(|e| format!("catalog {}: {e}", catalog_path.display()))
        }) {
        Ok(catalog) => {
            for violation in catalog.validate() {
                findings.push(format!("catalog: {violation}"));
            }
            Some(catalog)
        }
        Err(e) => {
            findings.push(e);
            None
        }
    };

    let dist = match config.distribution.resolve(dir) {
        Ok(dist) => Some(dist),
        Err(e) => {
            findings.push(e.to_string());
            None
        }
    };

    if let Err(e) = config.grid.validate() {
        findings.push(format!("[grid] {e}"));
    }

    if let (true, Some(catalog), Some(dist)) = (exclusive_ok, &catalog, &dist) {
        match config.resolve_profile(catalog, dist) {
            Ok(profile) => {
                if let Err(CoreError::CoverageGap(sizes)) = allocation_table(&profile, dist) {
                    findings.push(coverage_message(&sizes, &profile));
                }
            }
            Err(e) => findings.push(e.to_string()),
        }
    }

    if let Some(spec) = &config.sensitivity {
        if let Err(e) = spec.validate() {
            findings.push(format!("[sensitivity] {e}"));
        }
    }
    if let Some(thermal) = &config.thermal {
        if let Err(e) = thermal.validate() {
            findings.push(e.to_string());
        }
    }

    findings
}
