//! Device specifications and technological systems.
//!
//! A *device* is one piece of digital equipment with powers, duty cycles, a
//! scaling rule, an embodied footprint and a lifetime. A *technological
//! system* (TS) is a named bundle of devices deployed together to cover a set
//! of farming tasks. Catalogs are loaded from TOML (`devices` and `systems`
//! blocks) and validated as a whole: validation returns a list of violations
//! rather than failing fast, so a fixture author sees every problem at once.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// How the per-farm quantity of a device scales with farm size.
///
/// * `fixed_per_farm` — constant `base_quantity` per equipped farm (laptop).
/// * `capacity_scaled` — one unit per `capacity` size units, rounded up
///   (collar per head has capacity 1, an RFID reader covers a whole herd).
/// * `dependent` — quantity tied to another device through a ratio
///   (one compute board per N cameras).
/// * `robotic` — fleet sized so the seasonal workload fits the available
///   work days; has its own energy model with work and travel phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    FixedPerFarm,
    CapacityScaled,
    Dependent,
    Robotic,
}

impl std::fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DeviceKind::FixedPerFarm => "fixed_per_farm",
            DeviceKind::CapacityScaled => "capacity_scaled",
            DeviceKind::Dependent => "dependent",
            DeviceKind::Robotic => "robotic",
        };
        write!(f, "{s}")
    }
}

/// Link from a dependent device to the device whose quantity drives it:
/// `quantity = ceil(ratio × quantity(device))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dependency {
    pub device: String,
    pub ratio: f64,
}

/// One device type. Power draws are watts, durations hours per day,
/// `embodied_ghg` kg CO2e per unit cradle-to-gate, amortized linearly over
/// `lifetime_years`.
///
/// Robotic devices additionally carry: `capacity` (hectares treated per
/// hour), `use_periodicity_days` (days available to complete one pass at
/// seasonal peak), `passes_per_year`, `travel_power`/`travel_hours_per_day`
/// for field-access trips, and `solar_daily_supplement` (Wh per day offset
/// by on-board panels).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub name: String,
    pub kind: DeviceKind,
    #[serde(default)]
    pub active_power: f64,
    #[serde(default)]
    pub sleep_power: f64,
    #[serde(default)]
    pub travel_power: f64,
    #[serde(default)]
    pub active_hours_per_day: f64,
    #[serde(default)]
    pub sleep_hours_per_day: f64,
    #[serde(default)]
    pub travel_hours_per_day: f64,
    #[serde(default)]
    pub capacity: f64,
    #[serde(default)]
    pub use_periodicity_days: f64,
    #[serde(default)]
    pub passes_per_year: f64,
    #[serde(default)]
    pub solar_daily_supplement: f64,
    pub embodied_ghg: f64,
    pub lifetime_years: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depends_on: Option<Dependency>,
    /// Share of this device's footprint attributed to the assessed activity.
    /// Defaults to full attribution; shared equipment (an office laptop,
    /// say) can be discounted here.
    #[serde(default = "default_allocation_fraction")]
    pub allocation_fraction: f64,
}

fn default_allocation_fraction() -> f64 {
    1.0
}

impl DeviceSpec {
    pub fn is_robotic(&self) -> bool {
        self.kind == DeviceKind::Robotic
    }
}

/// Reference to a device from inside a technological system. `base_quantity`
/// is the per-farm count for `fixed_per_farm` devices; the other kinds
/// compute their own quantities and must leave it at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TsDevice {
    pub device: String,
    #[serde(default = "default_base_quantity")]
    pub base_quantity: f64,
}

fn default_base_quantity() -> f64 {
    1.0
}

/// Named bundle of devices covering a set of farming tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologicalSystem {
    pub name: String,
    pub devices: Vec<TsDevice>,
    #[serde(default)]
    pub farming_tasks: BTreeSet<String>,
}

impl TechnologicalSystem {
    pub fn contains_device(&self, name: &str) -> bool {
        self.devices.iter().any(|d| d.device == name)
    }
}

/// One validation finding: which catalog object is wrong and how.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub subject: String,
    pub problem: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.subject, self.problem)
    }
}

/// A full device catalog: the device specifications plus the technological
/// systems built from them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    #[serde(default)]
    pub devices: Vec<DeviceSpec>,
    #[serde(default)]
    pub systems: Vec<TechnologicalSystem>,
}

impl Catalog {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("catalog: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(format!("catalog: {e}")))
    }

    pub fn device(&self, name: &str) -> Result<&DeviceSpec> {
        self.devices
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::UnknownDevice(name.to_string()))
    }

    pub fn system(&self, name: &str) -> Result<&TechnologicalSystem> {
        self.systems
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSystem(name.to_string()))
    }

    /// Checks every catalog invariant and returns all findings (empty list
    /// means the catalog is usable).
    pub fn validate(&self) -> Vec<Violation> {
        validate_catalog(self)
    }

    /// Like [`validate`](Self::validate) but folded into a hard error, for
    /// call sites that need a known-good catalog.
    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            return Ok(());
        }
        let listing = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::InvalidCatalog(listing))
    }
}

/// Validate a catalog: device-level parameter sanity, uniqueness, and the
/// referential integrity of every system (no dangling devices, dependent
/// devices must sit in the same system as their dependency target).
pub fn validate_catalog(catalog: &Catalog) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |subject: &str, problem: String| {
        out.push(Violation {
            subject: subject.to_string(),
            problem,
        });
    };

    let mut seen_devices = BTreeSet::new();
    for dev in &catalog.devices {
        let name = dev.name.as_str();
        if !seen_devices.insert(name) {
            flag(name, "duplicate device name".into());
        }
        for (label, value) in [
            ("active_power", dev.active_power),
            ("sleep_power", dev.sleep_power),
            ("travel_power", dev.travel_power),
            ("active_hours_per_day", dev.active_hours_per_day),
            ("sleep_hours_per_day", dev.sleep_hours_per_day),
            ("travel_hours_per_day", dev.travel_hours_per_day),
            ("solar_daily_supplement", dev.solar_daily_supplement),
            ("embodied_ghg", dev.embodied_ghg),
        ] {
            if !value.is_finite() || value < 0.0 {
                flag(name, format!("{label} must be finite and >= 0 (got {value})"));
            }
        }
        if !(dev.lifetime_years > 0.0) || !dev.lifetime_years.is_finite() {
            flag(
                name,
                format!("lifetime_years must be > 0 (got {})", dev.lifetime_years),
            );
        }
        if !(dev.allocation_fraction > 0.0 && dev.allocation_fraction <= 1.0) {
            flag(
                name,
                format!(
                    "allocation_fraction must be in (0, 1] (got {})",
                    dev.allocation_fraction
                ),
            );
        }
        match dev.kind {
            DeviceKind::FixedPerFarm | DeviceKind::CapacityScaled | DeviceKind::Dependent => {
                if dev.active_hours_per_day + dev.sleep_hours_per_day > 24.0 + 1e-9 {
                    flag(
                        name,
                        format!(
                            "active + sleep hours exceed a day ({} + {})",
                            dev.active_hours_per_day, dev.sleep_hours_per_day
                        ),
                    );
                }
            }
            DeviceKind::Robotic => {
                if !(dev.use_periodicity_days >= 1.0) {
                    flag(
                        name,
                        format!(
                            "robotic device needs use_periodicity_days >= 1 (got {})",
                            dev.use_periodicity_days
                        ),
                    );
                }
                if !(dev.passes_per_year >= 1.0) {
                    flag(
                        name,
                        format!(
                            "robotic device needs passes_per_year >= 1 (got {})",
                            dev.passes_per_year
                        ),
                    );
                }
                if !(dev.active_hours_per_day > 0.0) {
                    flag(
                        name,
                        format!(
                            "robotic device needs active_hours_per_day > 0 (got {})",
                            dev.active_hours_per_day
                        ),
                    );
                }
            }
        }
        if matches!(dev.kind, DeviceKind::CapacityScaled | DeviceKind::Robotic)
            && !(dev.capacity > 0.0)
        {
            flag(
                name,
                format!("{} device needs capacity > 0 (got {})", dev.kind, dev.capacity),
            );
        }
        match (&dev.kind, &dev.depends_on) {
            (DeviceKind::Dependent, None) => {
                flag(name, "dependent device is missing depends_on".into());
            }
            (DeviceKind::Dependent, Some(dep)) => {
                if !(dep.ratio > 0.0) || !dep.ratio.is_finite() {
                    flag(
                        name,
                        format!("depends_on ratio must be > 0 (got {})", dep.ratio),
                    );
                }
                if catalog.device(&dep.device).is_err() {
                    flag(
                        name,
                        format!("depends_on references unknown device '{}'", dep.device),
                    );
                }
            }
            (_, Some(dep)) => {
                flag(
                    name,
                    format!(
                        "depends_on '{}' set, but kind is {} (only dependent devices may depend)",
                        dep.device, dev.kind
                    ),
                );
            }
            (_, None) => {}
        }
    }

    let mut seen_systems = BTreeSet::new();
    for ts in &catalog.systems {
        let ts_name = ts.name.as_str();
        if !seen_systems.insert(ts_name) {
            flag(ts_name, "duplicate system name".into());
        }
        if ts.devices.is_empty() {
            flag(ts_name, "system has no devices".into());
        }
        let mut in_ts = BTreeSet::new();
        for entry in &ts.devices {
            if !in_ts.insert(entry.device.as_str()) {
                flag(
                    ts_name,
                    format!("device '{}' listed twice", entry.device),
                );
            }
            if !(entry.base_quantity > 0.0) || !entry.base_quantity.is_finite() {
                flag(
                    ts_name,
                    format!(
                        "device '{}' has base_quantity {} (must be > 0)",
                        entry.device, entry.base_quantity
                    ),
                );
            }
            match catalog.device(&entry.device) {
                Err(_) => {
                    flag(
                        ts_name,
                        format!("references unknown device '{}'", entry.device),
                    );
                }
                Ok(spec) => {
                    if spec.kind != DeviceKind::FixedPerFarm && entry.base_quantity != 1.0 {
                        flag(
                            ts_name,
                            format!(
                                "base_quantity {} on '{}' has no effect ({} devices scale on their own)",
                                entry.base_quantity, spec.name, spec.kind
                            ),
                        );
                    }
                    if let Some(dep) = &spec.depends_on {
                        if !ts.contains_device(&dep.device) {
                            flag(
                                ts_name,
                                format!(
                                    "dependent device '{}' needs '{}' in the same system",
                                    spec.name, dep.device
                                ),
                            );
                        }
                    }
                }
            }
        }
    }
    out
}
