//! Device inventory instancing.
//!
//! Takes a catalog, an adoption profile and a farm-size distribution, and
//! produces one record per (farm size, technological system, device):
//! how many units a farm of that size needs, how many units the territory
//! needs (farm count × adoption share), and the annual electricity the
//! per-farm fleet draws.
//!
//! Quantities follow each device's scaling rule. Stationary equipment uses a
//! day split into active and sleep hours. Robot fleets are sized so that one
//! full pass over the farm fits into the seasonal window (`q_r = ⌈s / (U_r ·
//! C_r · Tactive_r)⌉`), and their energy charges the work phase per hour and
//! the travel phase per working day, minus any on-board solar contribution.

use std::collections::BTreeMap;

use crate::catalog::{Catalog, DeviceKind, DeviceSpec};
use crate::allocation::{allocation_table, AllocationProfile};
use crate::distribution::FarmSizeDistribution;
use crate::error::Error;
use crate::Result;

const DAYS_PER_YEAR: f64 = 365.0;

/// Smallest integer q with q·denom ≥ numer, computed so that a ratio landing
/// exactly on an integer never buys an extra unit. Plain `(n/d).ceil()` can
/// misclassify when the division rounds across the integer; both directions
/// are repaired by re-checking against the original operands.
fn ceil_div_exact(numer: f64, denom: f64) -> f64 {
    let q = (numer / denom).ceil();
    if q >= 1.0 && (q - 1.0) * denom >= numer {
        q - 1.0
    } else if q * denom < numer {
        q + 1.0
    } else {
        q
    }
}

/// Hourly treatment capacity (ha/h) from implement width (m), ground speed
/// (km/h) and field efficiency: width·speed gives m·km/h = 1000 m²/h, and a
/// hectare is 10,000 m², hence the /10.
pub fn derive_capacity(width_m: f64, speed_kmh: f64, field_efficiency: f64) -> f64 {
    width_m * speed_kmh * field_efficiency / 10.0
}

/// Units of `device` on one farm of size `s`.
///
/// `base_quantity` is the per-farm count declared by the technological
/// system (only `fixed_per_farm` devices use it); `parent_quantity` must be
/// supplied for dependent devices.
pub fn device_quantity(
    device: &DeviceSpec,
    base_quantity: f64,
    s: f64,
    parent_quantity: Option<f64>,
) -> Result<f64> {
    match device.kind {
        DeviceKind::FixedPerFarm => Ok(base_quantity),
        DeviceKind::CapacityScaled => {
            if !(device.capacity > 0.0) {
                return Err(Error::ZeroCapacity {
                    device: device.name.clone(),
                });
            }
            Ok(ceil_div_exact(s, device.capacity))
        }
        DeviceKind::Dependent => {
            let dep = device.depends_on.as_ref().ok_or_else(|| Error::InvalidDevice {
                device: device.name.clone(),
                reason: "dependent device without depends_on".into(),
            })?;
            let parent = parent_quantity.ok_or_else(|| Error::InvalidDevice {
                device: device.name.clone(),
                reason: format!("quantity of parent '{}' unavailable", dep.device),
            })?;
            Ok((dep.ratio * parent).ceil())
        }
        DeviceKind::Robotic => {
            if !(device.capacity > 0.0) {
                return Err(Error::ZeroCapacity {
                    device: device.name.clone(),
                });
            }
            if !(device.active_hours_per_day > 0.0) {
                return Err(Error::ZeroActiveHours {
                    device: device.name.clone(),
                });
            }
            if !(device.use_periodicity_days >= 1.0) {
                return Err(Error::InvalidDevice {
                    device: device.name.clone(),
                    reason: format!(
                        "use_periodicity_days must be >= 1 (got {})",
                        device.use_periodicity_days
                    ),
                });
            }
            let per_robot = device.use_periodicity_days
                * device.capacity
                * device.active_hours_per_day;
            Ok(ceil_div_exact(s, per_robot))
        }
    }
}

/// Annual electricity (Wh/year) of `quantity` non-robotic units: every day
/// splits into active hours at active power and sleep hours at sleep power.
pub fn annual_energy_nonrobotic(device: &DeviceSpec, quantity: f64) -> f64 {
    quantity
        * DAYS_PER_YEAR
        * (device.active_hours_per_day * device.active_power
            + device.sleep_hours_per_day * device.sleep_power)
}

/// Hours each robot works to complete one pass over a farm of size `s` when
/// the fleet has `q_r` robots: the surface splits evenly across the fleet.
pub fn robot_total_work_time(device: &DeviceSpec, s: f64, q_r: f64) -> f64 {
    s / (q_r * device.capacity)
}

/// Annual electricity (Wh/year) of the whole robot fleet on a farm of size
/// `s`, over all passes:
///
/// `passes × q_r × [Pactive·Ttotal + (Ptravel·Ttravel − Esp)·days]`
///
/// where `days = ⌈Ttotal / Tactive⌉` is how many days one pass takes and the
/// travel leg (out to the field and back) is charged once per day, offset by
/// the daily solar supplement. A supplement larger than consumption clamps
/// to zero: surplus is not exported.
pub fn annual_energy_robotic(device: &DeviceSpec, s: f64) -> Result<f64> {
    let q_r = device_quantity(device, 1.0, s, None)?;
    let ttotal = robot_total_work_time(device, s, q_r);
    let days = ceil_div_exact(ttotal, device.active_hours_per_day);
    let travel_net =
        device.travel_power * device.travel_hours_per_day - device.solar_daily_supplement;
    let energy =
        device.passes_per_year * q_r * (device.active_power * ttotal + travel_net * days);
    Ok(energy.max(0.0))
}

/// Number of days one pass takes at size `s` (for feasibility checks).
fn pass_days(device: &DeviceSpec, s: f64, q_r: f64) -> f64 {
    ceil_div_exact(
        robot_total_work_time(device, s, q_r),
        device.active_hours_per_day,
    )
}

/// One inventory line: device quantities and per-farm energy for farms of
/// one size running one technological system.
#[derive(Debug, Clone, PartialEq)]
pub struct InventoryRecord {
    pub farm_size: f64,
    pub ts_name: String,
    pub device_name: String,
    /// Units one farm of this size needs.
    pub per_farm_quantity: f64,
    /// Farms behind this record: count at this size × adoption share.
    pub farm_weight: f64,
    /// Units the territory needs: per_farm_quantity × farm_weight.
    pub scaled_quantity: f64,
    /// Wh/year drawn by the per-farm fleet of this device.
    pub annual_energy_per_farm: f64,
}

/// A pass that does not fit the seasonal window. The fleet-sizing rule
/// normally guarantees the fit, but fractional windows can still leave a
/// day of overhang — worth flagging, not worth refusing the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityWarning {
    pub farm_size: f64,
    pub device: String,
    pub days_needed: f64,
    pub days_available: f64,
}

/// Full instanced inventory plus any feasibility findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Inventory {
    pub records: Vec<InventoryRecord>,
    pub warnings: Vec<FeasibilityWarning>,
}

impl Inventory {
    /// Territory-wide unit count of one device across all sizes and systems.
    pub fn total_quantity(&self, device: &str) -> f64 {
        self.records
            .iter()
            .filter(|r| r.device_name == device)
            .map(|r| r.scaled_quantity)
            .sum()
    }

    /// Territory-wide annual electricity (Wh/year).
    pub fn total_energy_wh(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.annual_energy_per_farm * r.farm_weight)
            .sum()
    }
}

/// Instantiate the inventory for a catalog, adoption profile and
/// distribution: one record per (size, system with positive share, device),
/// sorted by (size, system, device).
pub fn build_inventory(
    catalog: &Catalog,
    profile: &AllocationProfile,
    dist: &FarmSizeDistribution,
) -> Result<Inventory> {
    catalog.ensure_valid()?;
    let table = allocation_table(profile, dist)?;
    let systems: Vec<_> = table
        .ts_names
        .iter()
        .map(|name| catalog.system(name))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, &s) in dist.sizes().iter().enumerate() {
        let n_i = dist.counts()[i];
        for (j, ts) in systems.iter().enumerate() {
            let share = table.share(i, j);
            if share <= 0.0 {
                continue;
            }
            let weight = n_i * share;
            let quantities = resolve_quantities(catalog, ts, s).map_err(|e| annotate(e, s, &ts.name))?;
            for entry in &ts.devices {
                let device = catalog.device(&entry.device)?;
                let quantity = quantities[entry.device.as_str()];
                let energy = match device.kind {
                    DeviceKind::Robotic => {
                        let days = pass_days(device, s, quantity);
                        if days > device.use_periodicity_days {
                            warnings.push(FeasibilityWarning {
                                farm_size: s,
                                device: device.name.clone(),
                                days_needed: days,
                                days_available: device.use_periodicity_days,
                            });
                        }
                        annual_energy_robotic(device, s)
                            .map_err(|e| annotate(e, s, &ts.name))?
                    }
                    _ => annual_energy_nonrobotic(device, quantity),
                };
                records.push(InventoryRecord {
                    farm_size: s,
                    ts_name: ts.name.clone(),
                    device_name: device.name.clone(),
                    per_farm_quantity: quantity,
                    farm_weight: weight,
                    scaled_quantity: quantity * weight,
                    annual_energy_per_farm: energy,
                });
            }
        }
    }
    records.sort_by(|x, y| {
        x.farm_size
            .total_cmp(&y.farm_size)
            .then_with(|| x.ts_name.cmp(&y.ts_name))
            .then_with(|| x.device_name.cmp(&y.device_name))
    });
    Ok(Inventory { records, warnings })
}

fn annotate(source: Error, size: f64, ts: &str) -> Error {
    match source {
        already @ Error::Inventory { .. } => already,
        other => Error::Inventory {
            size,
            ts: ts.to_string(),
            device: match &other {
                Error::ZeroCapacity { device }
                | Error::ZeroActiveHours { device }
                | Error::InvalidDevice { device, .. } => device.clone(),
                _ => String::new(),
            },
            source: Box::new(other),
        },
    }
}

/// Per-farm quantity of every device in a system at size `s`. Dependent
/// devices resolve after their parents; chains are allowed, cycles are not.
fn resolve_quantities<'a>(
    catalog: &'a Catalog,
    ts: &'a crate::catalog::TechnologicalSystem,
    s: f64,
) -> Result<BTreeMap<&'a str, f64>> {
    let mut quantities: BTreeMap<&str, f64> = BTreeMap::new();
    let mut pending: Vec<(&str, &DeviceSpec, f64)> = Vec::new();
    for entry in &ts.devices {
        let device = catalog.device(&entry.device)?;
        if device.kind == DeviceKind::Dependent {
            pending.push((entry.device.as_str(), device, entry.base_quantity));
        } else {
            quantities.insert(
                entry.device.as_str(),
                device_quantity(device, entry.base_quantity, s, None)?,
            );
        }
    }
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|(name, device, base)| {
            let parent = device
                .depends_on
                .as_ref()
                .and_then(|dep| quantities.get(dep.device.as_str()).copied());
            match parent {
                Some(pq) => {
                    let q = device_quantity(device, *base, s, Some(pq))
                        .expect("dependent quantity with parent supplied");
                    quantities.insert(name, q);
                    false
                }
                None => true,
            }
        });
        if pending.len() == before {
            let stuck: Vec<&str> = pending.iter().map(|(n, _, _)| *n).collect();
            return Err(Error::InvalidCatalog(format!(
                "dependency cycle among devices {:?} in system '{}'",
                stuck, ts.name
            )));
        }
    }
    Ok(quantities)
}
