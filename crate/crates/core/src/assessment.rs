//! Annual GHG assessment of an instanced inventory.
//!
//! Two emission channels per inventory line: the embodied footprint of the
//! hardware amortised linearly over its lifetime, and the use-phase
//! emissions of its electricity at the territory's grid carbon intensity.
//! Results aggregate into territory totals and per-device / per-system /
//! per-size breakdowns, plus two derived views: the efficiency curve
//! (emissions per head or per hectare as farm size grows) and an
//! average-farm extrapolation baseline that shows what gets lost when
//! integer equipment counts are smeared over a single mean size. A fuel-use
//! comparator for the thermal machinery that robots would displace rounds
//! out the module.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::allocation::AllocationProfile;
use crate::catalog::{Catalog, DeviceSpec};
use crate::distribution::FarmSizeDistribution;
use crate::error::Error;
use crate::inventory::{build_inventory, Inventory};
use crate::Result;

/// Carbon intensity of grid electricity, in g CO2e per kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridIntensity {
    pub name: String,
    pub intensity: f64,
}

impl GridIntensity {
    pub fn new(name: &str, intensity: f64) -> Result<Self> {
        let grid = Self {
            name: name.to_string(),
            intensity,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// French mix, averaged over 2017–2022.
    pub fn french_mix() -> Self {
        Self {
            name: "FR".to_string(),
            intensity: 68.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity > 0.0) || !self.intensity.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "grid '{}' needs intensity > 0 g/kWh (got {})",
                self.name, self.intensity
            )));
        }
        Ok(())
    }
}

/// Embodied emissions per year (kg CO2e): the cradle-to-gate footprint of
/// `quantity` units spread evenly over the device lifetime, scaled by the
/// share of the device attributed to this activity.
pub fn embodied_annual(device: &DeviceSpec, quantity: f64) -> f64 {
    quantity * device.embodied_ghg * device.allocation_fraction / device.lifetime_years
}

/// Use-phase emissions per year (kg CO2e) of `energy_wh_per_year` at a given
/// grid intensity (Wh → kWh, then g → kg).
pub fn use_annual(energy_wh_per_year: f64, grid: &GridIntensity) -> f64 {
    (energy_wh_per_year / 1000.0) * grid.intensity / 1000.0
}

/// Territory-scaled emissions of one inventory line.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentRecord {
    pub farm_size: f64,
    pub ts_name: String,
    pub device_name: String,
    pub embodied_kg_per_year: f64,
    pub use_kg_per_year: f64,
    pub energy_kwh_per_year: f64,
}

/// Summed emissions and energy along one slice of the assessment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    pub embodied_kg_per_year: f64,
    pub use_kg_per_year: f64,
    pub energy_kwh_per_year: f64,
}

impl Totals {
    pub fn total_kg_per_year(&self) -> f64 {
        self.embodied_kg_per_year + self.use_kg_per_year
    }

    fn accumulate(&mut self, r: &AssessmentRecord) {
        self.embodied_kg_per_year += r.embodied_kg_per_year;
        self.use_kg_per_year += r.use_kg_per_year;
        self.energy_kwh_per_year += r.energy_kwh_per_year;
    }
}

/// Assessment of a whole territory: per-line records plus totals and
/// breakdowns by device, technological system and farm size.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentResult {
    pub records: Vec<AssessmentRecord>,
    pub totals: Totals,
    pub by_device: BTreeMap<String, Totals>,
    pub by_ts: BTreeMap<String, Totals>,
    /// Per-size totals in ascending size order.
    pub by_size: Vec<(f64, Totals)>,
}

/// Convert an inventory into annual GHG emissions. The inventory's records
/// are already sorted by (size, system, device); aggregation follows that
/// order, so parallel callers get bitwise-identical results.
pub fn assess(catalog: &Catalog, inventory: &Inventory, grid: &GridIntensity) -> Result<AssessmentResult> {
    grid.validate()?;
    let mut records = Vec::with_capacity(inventory.records.len());
    let mut totals = Totals::default();
    let mut by_device: BTreeMap<String, Totals> = BTreeMap::new();
    let mut by_ts: BTreeMap<String, Totals> = BTreeMap::new();
    let mut by_size: Vec<(f64, Totals)> = Vec::new();

    for line in &inventory.records {
        let device = catalog.device(&line.device_name)?;
        let energy_wh = line.annual_energy_per_farm * line.farm_weight;
        let record = AssessmentRecord {
            farm_size: line.farm_size,
            ts_name: line.ts_name.clone(),
            device_name: line.device_name.clone(),
            embodied_kg_per_year: embodied_annual(device, line.scaled_quantity),
            use_kg_per_year: use_annual(energy_wh, grid),
            energy_kwh_per_year: energy_wh / 1000.0,
        };
        totals.accumulate(&record);
        by_device
            .entry(record.device_name.clone())
            .or_default()
            .accumulate(&record);
        by_ts
            .entry(record.ts_name.clone())
            .or_default()
            .accumulate(&record);
        match by_size.last_mut() {
            Some((size, slot)) if *size == record.farm_size => slot.accumulate(&record),
            _ => {
                let mut slot = Totals::default();
                slot.accumulate(&record);
                by_size.push((record.farm_size, slot));
            }
        }
        records.push(record);
    }
    Ok(AssessmentResult {
        records,
        totals,
        by_device,
        by_ts,
        by_size,
    })
}

/// The coarse extrapolation a spreadsheet would do: assess one farm of the
/// territory's *average* size and multiply by the farm count. Exact when
/// per-farm quantities are affine in size over the distribution's support;
/// every equipment-count ceiling in between makes it drift.
pub fn assess_average_baseline(
    catalog: &Catalog,
    ts: &str,
    dist: &FarmSizeDistribution,
    grid: &GridIntensity,
) -> Result<Totals> {
    let average = dist.average_size()?;
    let degenerate = FarmSizeDistribution::new(
        vec![average],
        vec![dist.total_farms()],
        dist.size_unit(),
    )?;
    let profile = AllocationProfile::full_deployment(ts, &degenerate);
    let inventory = build_inventory(catalog, &profile, &degenerate)?;
    Ok(assess(catalog, &inventory, grid)?.totals)
}

/// One point of the efficiency curve: emissions per size unit (per head or
/// per hectare) for farms of one size.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyPoint {
    pub farm_size: f64,
    pub total_kg_per_size_unit: f64,
    pub use_kg_per_size_unit: f64,
}

/// Emissions per size unit across farm sizes: per-size totals divided by the
/// heads (or hectares) standing at that size. Sizes with no farms are
/// skipped — there is nothing to divide by.
pub fn efficiency_curve(result: &AssessmentResult, dist: &FarmSizeDistribution) -> Vec<EfficiencyPoint> {
    let counts: BTreeMap<u64, f64> = dist
        .sizes()
        .iter()
        .zip(dist.counts())
        .map(|(s, n)| (s.to_bits(), *n))
        .collect();
    result
        .by_size
        .iter()
        .filter_map(|(size, totals)| {
            let n = counts.get(&size.to_bits()).copied().unwrap_or(0.0);
            if n <= 0.0 {
                return None;
            }
            let denom = size * n;
            Some(EfficiencyPoint {
                farm_size: *size,
                total_kg_per_size_unit: totals.total_kg_per_year() / denom,
                use_kg_per_size_unit: totals.use_kg_per_year / denom,
            })
        })
        .collect()
}

/// One mechanised field operation and its non-road-diesel use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalPass {
    pub operation: String,
    pub litres_per_ha: f64,
}

/// Annual footprint (kg CO2e) of covering `surface_ha` with conventional
/// thermal machinery: fuel per hectare summed over all passes, times the
/// fuel emission factor (kg CO2e per litre).
pub fn thermal_baseline(surface_ha: f64, passes: &[ThermalPass], emission_factor: f64) -> f64 {
    let per_ha: f64 = passes.iter().map(|p| p.litres_per_ha * emission_factor).sum();
    surface_ha * per_ha
}
