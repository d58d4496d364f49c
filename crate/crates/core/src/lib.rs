//! Bottom-up carbon-footprint engine for digital-agriculture deployment
//! scenarios.
//!
//! The engine models a territory as a frequency distribution of farm sizes,
//! deploys technological systems (collections of digital devices) over that
//! distribution through bell-shaped adoption weights, instantiates a device
//! inventory with capacity-based scaling rules, and converts the inventory
//! into annual GHG emissions (embodied amortized over device lifetime plus
//! use-phase electricity at a grid carbon intensity). A seeded Monte Carlo
//! layer propagates parameter uncertainty through the whole pipeline.

// Validation guards are written `!(x > 0.0)` rather than `x <= 0.0` so that
// NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod assessment;
pub mod catalog;
pub mod distribution;
pub mod error;
pub mod inventory;
mod nnls;
pub mod report;
pub mod sensitivity;

pub use allocation::{
    allocation_table, raw_weight, AllocationEntry, AllocationProfile, AllocationTable,
};
pub use assessment::{
    assess, assess_average_baseline, efficiency_curve, embodied_annual, thermal_baseline,
    use_annual, AssessmentRecord, AssessmentResult, EfficiencyPoint, GridIntensity, ThermalPass,
    Totals,
};
pub use catalog::{
    validate_catalog, Catalog, Dependency, DeviceKind, DeviceSpec, TechnologicalSystem, TsDevice,
    Violation,
};
pub use distribution::{
    densify, reconstruct_density, CoarseBinSpec, FarmSizeDistribution, PiecewiseLinearDensity,
    SizeUnit,
};
pub use error::Error;
pub use inventory::{
    annual_energy_nonrobotic, annual_energy_robotic, build_inventory, derive_capacity,
    device_quantity, robot_total_work_time, FeasibilityWarning, Inventory, InventoryRecord,
};
pub use sensitivity::{
    perturb_catalog, run_sensitivity, summarize, MetricSamples, PerturbParam, PerturbationSpec,
    SensitivityResult, SummaryRow, SummaryTable,
};

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
