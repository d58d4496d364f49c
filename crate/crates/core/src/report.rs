//! Plot-ready delimited-text tables.
//!
//! Every writer takes any `io::Write` sink, emits a `# units:` comment, a
//! header row, then data rows. Masses and energies are printed with six
//! significant digits in scientific notation; sizes, counts and quantities
//! print with full round-trip precision. All writers iterate already-ordered
//! inputs, so a given result always serialises to the same bytes.

use std::io::{self, Write};

use crate::allocation::AllocationTable;
use crate::assessment::{thermal_baseline, AssessmentResult, EfficiencyPoint, ThermalPass, Totals};
use crate::distribution::{FarmSizeDistribution, SizeUnit};
use crate::inventory::Inventory;
use crate::sensitivity::{SensitivityResult, SummaryTable};

/// Output field separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Csv,
    Tsv,
}

impl Delimiter {
    pub fn sep(self) -> char {
        match self {
            Delimiter::Csv => ',',
            Delimiter::Tsv => '\t',
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Delimiter::Csv => "csv",
            Delimiter::Tsv => "tsv",
        }
    }
}

/// Six significant digits, scientific notation — the fixed formatting for
/// every mass and energy column.
pub fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

fn join(delim: Delimiter, fields: &[String]) -> String {
    fields.join(&delim.sep().to_string())
}

fn write_row(w: &mut impl Write, delim: Delimiter, fields: &[String]) -> io::Result<()> {
    writeln!(w, "{}", join(delim, fields))
}

fn totals_fields(t: &Totals) -> Vec<String> {
    vec![
        sig6(t.embodied_kg_per_year),
        sig6(t.use_kg_per_year),
        sig6(t.total_kg_per_year()),
        sig6(t.energy_kwh_per_year),
    ]
}

const TOTALS_HEADER: [&str; 4] = [
    "embodied_kgCO2e_per_year",
    "use_kgCO2e_per_year",
    "total_kgCO2e_per_year",
    "energy_kWh_per_year",
];

/// `size, count` table of a farm-size distribution.
pub fn write_distribution(
    w: &mut impl Write,
    dist: &FarmSizeDistribution,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(w, "# units: size = {}; count = farms", dist.size_unit())?;
    write_row(w, delim, &["size".into(), "count".into()])?;
    for (s, n) in dist.sizes().iter().zip(dist.counts()) {
        write_row(w, delim, &[s.to_string(), n.to_string()])?;
    }
    Ok(())
}

/// Instanced inventory: one row per (size, system, device).
pub fn write_inventory(
    w: &mut impl Write,
    inventory: &Inventory,
    unit: SizeUnit,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(
        w,
        "# units: size = {unit}; quantities = devices; annual_energy_Wh = Wh/year per farm"
    )?;
    write_row(
        w,
        delim,
        &[
            "size".into(),
            "ts".into(),
            "device".into(),
            "per_farm_quantity".into(),
            "scaled_quantity".into(),
            "annual_energy_Wh".into(),
        ],
    )?;
    for r in &inventory.records {
        write_row(
            w,
            delim,
            &[
                r.farm_size.to_string(),
                r.ts_name.clone(),
                r.device_name.clone(),
                r.per_farm_quantity.to_string(),
                r.scaled_quantity.to_string(),
                sig6(r.annual_energy_per_farm),
            ],
        )?;
    }
    Ok(())
}

fn write_keyed_breakdown<'a>(
    w: &mut impl Write,
    key_name: &str,
    rows: impl Iterator<Item = (String, &'a Totals)>,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(w, "# units: masses = kg CO2e/year; energy = kWh/year")?;
    let mut header = vec![key_name.to_string()];
    header.extend(TOTALS_HEADER.iter().map(|h| h.to_string()));
    write_row(w, delim, &header)?;
    for (key, totals) in rows {
        let mut fields = vec![key];
        fields.extend(totals_fields(totals));
        write_row(w, delim, &fields)?;
    }
    Ok(())
}

/// Per-device territory emissions.
pub fn write_breakdown_by_device(
    w: &mut impl Write,
    result: &AssessmentResult,
    delim: Delimiter,
) -> io::Result<()> {
    write_keyed_breakdown(
        w,
        "device",
        result.by_device.iter().map(|(k, v)| (k.clone(), v)),
        delim,
    )
}

/// Per-system territory emissions.
pub fn write_breakdown_by_ts(
    w: &mut impl Write,
    result: &AssessmentResult,
    delim: Delimiter,
) -> io::Result<()> {
    write_keyed_breakdown(
        w,
        "ts",
        result.by_ts.iter().map(|(k, v)| (k.clone(), v)),
        delim,
    )
}

/// Per-farm-size territory emissions.
pub fn write_breakdown_by_size(
    w: &mut impl Write,
    result: &AssessmentResult,
    unit: SizeUnit,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(
        w,
        "# units: size = {unit}; masses = kg CO2e/year; energy = kWh/year"
    )?;
    let mut header = vec!["size".to_string()];
    header.extend(TOTALS_HEADER.iter().map(|h| h.to_string()));
    write_row(w, delim, &header)?;
    for (size, totals) in &result.by_size {
        let mut fields = vec![size.to_string()];
        fields.extend(totals_fields(totals));
        write_row(w, delim, &fields)?;
    }
    Ok(())
}

/// Territory totals, one row.
pub fn write_totals(
    w: &mut impl Write,
    totals: &Totals,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(w, "# units: masses = kg CO2e/year; energy = kWh/year")?;
    write_row(
        w,
        delim,
        &TOTALS_HEADER.map(str::to_string),
    )?;
    write_row(w, delim, &totals_fields(totals))
}

/// Emissions per size unit across farm sizes.
pub fn write_efficiency_curve(
    w: &mut impl Write,
    curve: &[EfficiencyPoint],
    unit: SizeUnit,
    delim: Delimiter,
) -> io::Result<()> {
    let per = match unit {
        SizeUnit::Heads => "head",
        SizeUnit::Hectares => "hectare",
    };
    writeln!(
        w,
        "# units: size = {unit}; masses = kg CO2e/year per {per}"
    )?;
    write_row(
        w,
        delim,
        &[
            "size".into(),
            "total_kgCO2e_per_size_unit".into(),
            "use_kgCO2e_per_size_unit".into(),
        ],
    )?;
    for p in curve {
        write_row(
            w,
            delim,
            &[
                p.farm_size.to_string(),
                sig6(p.total_kg_per_size_unit),
                sig6(p.use_kg_per_size_unit),
            ],
        )?;
    }
    Ok(())
}

/// Full-deployment total of one system against the average-farm
/// extrapolation of the same system.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub ts: String,
    pub distribution_total_kg: f64,
    pub baseline_total_kg: f64,
}

impl BaselineRow {
    /// Signed relative gap of the extrapolation against the distribution
    /// value: positive means the average-farm shortcut overestimates.
    pub fn relative_gap(&self) -> f64 {
        (self.baseline_total_kg - self.distribution_total_kg) / self.distribution_total_kg
    }
}

/// Average-extrapolation baseline against the distribution-resolved result,
/// per system.
pub fn write_baseline_comparison(
    w: &mut impl Write,
    rows: &[BaselineRow],
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(
        w,
        "# units: masses = kg CO2e/year; gap = (baseline - distribution) / distribution"
    )?;
    write_row(
        w,
        delim,
        &[
            "ts".into(),
            "distribution_total_kgCO2e_per_year".into(),
            "baseline_total_kgCO2e_per_year".into(),
            "relative_gap".into(),
        ],
    )?;
    for row in rows {
        write_row(
            w,
            delim,
            &[
                row.ts.clone(),
                sig6(row.distribution_total_kg),
                sig6(row.baseline_total_kg),
                sig6(row.relative_gap()),
            ],
        )?;
    }
    Ok(())
}

/// Adoption shares: first column size, one column per system.
pub fn write_allocation_table(
    w: &mut impl Write,
    table: &AllocationTable,
    unit: SizeUnit,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(w, "# units: size = {unit}; shares = fraction of farms")?;
    let mut header = vec!["size".to_string()];
    header.extend(table.ts_names.iter().cloned());
    write_row(w, delim, &header)?;
    for (size, row) in table.sizes.iter().zip(&table.shares) {
        let mut fields = vec![size.to_string()];
        fields.extend(row.iter().map(|t| sig6(*t)));
        write_row(w, delim, &fields)?;
    }
    Ok(())
}

/// Territory-scale fuel emissions of the thermal machinery passes, one row
/// per operation plus a `TOTAL` row matching [`crate::thermal_baseline`].
pub fn write_thermal_baseline(
    w: &mut impl Write,
    surface_ha: f64,
    passes: &[ThermalPass],
    emission_factor_kg_per_litre: f64,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(
        w,
        "# units: litres = L/ha/year; masses = kg CO2e/year over {surface_ha} ha"
    )?;
    write_row(
        w,
        delim,
        &[
            "operation".into(),
            "litres_per_ha_per_year".into(),
            "kgCO2e_per_year".into(),
        ],
    )?;
    let mut litres_total = 0.0;
    for pass in passes {
        litres_total += pass.litres_per_ha;
        write_row(
            w,
            delim,
            &[
                pass.operation.clone(),
                pass.litres_per_ha.to_string(),
                sig6(surface_ha * pass.litres_per_ha * emission_factor_kg_per_litre),
            ],
        )?;
    }
    write_row(
        w,
        delim,
        &[
            "TOTAL".into(),
            litres_total.to_string(),
            sig6(thermal_baseline(surface_ha, passes, emission_factor_kg_per_litre)),
        ],
    )
}

const METRICS: [&str; 4] = ["energy_kWh", "embodied_kg", "use_kg", "total_kg"];

/// Raw Monte Carlo samples in long form: (sample_index, ts, metric, value).
pub fn write_sensitivity_samples(
    w: &mut impl Write,
    result: &SensitivityResult,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(
        w,
        "# units: energy_kWh = kWh/year; *_kg = kg CO2e/year"
    )?;
    write_row(
        w,
        delim,
        &[
            "sample_index".into(),
            "ts".into(),
            "metric".into(),
            "value".into(),
        ],
    )?;
    for (ts, samples) in &result.per_ts {
        let columns = [
            &samples.energy_kwh,
            &samples.embodied_kg,
            &samples.use_kg,
            &samples.total_kg,
        ];
        for (metric, values) in METRICS.iter().zip(columns) {
            for (index, value) in values.iter().enumerate() {
                write_row(
                    w,
                    delim,
                    &[
                        index.to_string(),
                        ts.clone(),
                        (*metric).to_string(),
                        sig6(*value),
                    ],
                )?;
            }
        }
    }
    Ok(())
}

/// Summary statistics of a Monte Carlo run, one row per (ts, metric).
pub fn write_sensitivity_summary(
    w: &mut impl Write,
    table: &SummaryTable,
    delim: Delimiter,
) -> io::Result<()> {
    writeln!(
        w,
        "# units: energy_kWh = kWh/year; *_kg = kg CO2e/year; relative_std = fraction of mean"
    )?;
    write_row(
        w,
        delim,
        &[
            "ts".into(),
            "metric".into(),
            "mean".into(),
            "relative_std".into(),
            "p5".into(),
            "p25".into(),
            "p50".into(),
            "p75".into(),
            "p95".into(),
        ],
    )?;
    for row in &table.rows {
        write_row(
            w,
            delim,
            &[
                row.ts.clone(),
                row.metric.to_string(),
                sig6(row.mean),
                sig6(row.relative_std),
                sig6(row.p5),
                sig6(row.p25),
                sig6(row.p50),
                sig6(row.p75),
                sig6(row.p95),
            ],
        )?;
    }
    Ok(())
}
