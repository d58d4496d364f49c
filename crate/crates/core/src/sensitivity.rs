//! Monte Carlo uncertainty propagation.
//!
//! Device parameters are specifications, not measurements; this module
//! quantifies how much that uncertainty moves the results. Each sample
//! multiplies selected device parameters by log-normal factors (median 1, so
//! the nominal value is the median of the perturbed one), jitters the robot
//! seasonal window by whole days, and re-runs the full inventory +
//! assessment pipeline. Samples are keyed to (seed, sample index) through
//! separate ChaCha streams, so a run is bitwise reproducible at any thread
//! count.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::AllocationProfile;
use crate::assessment::{assess, GridIntensity, Totals};
use crate::catalog::{Catalog, DeviceKind};
use crate::distribution::FarmSizeDistribution;
use crate::error::Error;
use crate::inventory::build_inventory;
use crate::Result;

/// Device parameters that can carry log-normal noise. The declaration order
/// is the draw order — reordering would silently change every seeded run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbParam {
    Capacity,
    LifetimeYears,
    ActivePower,
    SolarDailySupplement,
}

const PARAM_ORDER: [PerturbParam; 4] = [
    PerturbParam::Capacity,
    PerturbParam::LifetimeYears,
    PerturbParam::ActivePower,
    PerturbParam::SolarDailySupplement,
];

/// What to perturb and how hard.
///
/// The log-normal factors are median-centred: σ_log = √ln(1 + rsd²), which
/// makes the nominal value the *median* of the perturbed parameter while its
/// relative standard deviation about the mean is exactly `relative_std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    #[serde(default = "default_params")]
    pub lognormal_params: BTreeSet<PerturbParam>,
    #[serde(default = "default_relative_std")]
    pub relative_std: f64,
    /// Half-width, in whole days, of the uniform jitter applied to the
    /// seasonal window of robotic devices (clamped at one day).
    #[serde(default = "default_jitter")]
    pub periodicity_jitter_days: u32,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Robot travel power is a distinct draw; whether it should vary along
    /// with the work power is a modelling choice, so it is opt-in.
    #[serde(default)]
    pub perturb_travel_power: bool,
}

fn default_params() -> BTreeSet<PerturbParam> {
    PARAM_ORDER.into_iter().collect()
}

fn default_relative_std() -> f64 {
    0.20
}

fn default_jitter() -> u32 {
    1
}

fn default_samples() -> usize {
    10_000
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            lognormal_params: default_params(),
            relative_std: default_relative_std(),
            periodicity_jitter_days: default_jitter(),
            samples: default_samples(),
            seed: 0,
            perturb_travel_power: false,
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_std > 0.0) || !self.relative_std.is_finite() {
            return Err(Error::InvalidPerturbation(format!(
                "relative_std must be > 0 (got {})",
                self.relative_std
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidPerturbation("samples must be >= 1".into()));
        }
        Ok(())
    }

    fn sigma_log(&self) -> f64 {
        (1.0 + self.relative_std * self.relative_std).ln().sqrt()
    }
}

/// One sample's catalog: selected parameters multiplied by median-1
/// log-normal factors, robot windows jittered by whole days.
///
/// Draws happen in a fixed order — devices as listed in the catalog, then
/// parameters in [`PerturbParam`] order, then travel power if enabled, then
/// the window jitter for robotic devices — so a given (seed, stream) always
/// produces the same catalog.
pub fn perturb_catalog(catalog: &Catalog, spec: &PerturbationSpec, rng: &mut ChaCha8Rng) -> Catalog {
    let sigma = spec.sigma_log();
    let factor = |rng: &mut ChaCha8Rng| {
        let z: f64 = rng.sample(StandardNormal);
        (sigma * z).exp()
    };
    let mut out = catalog.clone();
    for device in &mut out.devices {
        for param in PARAM_ORDER {
            if !spec.lognormal_params.contains(&param) {
                continue;
            }
            let f = factor(rng);
            match param {
                PerturbParam::Capacity => device.capacity *= f,
                PerturbParam::LifetimeYears => device.lifetime_years *= f,
                PerturbParam::ActivePower => device.active_power *= f,
                PerturbParam::SolarDailySupplement => device.solar_daily_supplement *= f,
            }
        }
        if spec.perturb_travel_power {
            device.travel_power *= factor(rng);
        }
        if device.kind == DeviceKind::Robotic && spec.periodicity_jitter_days > 0 {
            let j = spec.periodicity_jitter_days as i64;
            let delta = rng.gen_range(-j..=j) as f64;
            device.use_periodicity_days = (device.use_periodicity_days + delta).max(1.0);
        }
    }
    out
}

/// Sample arrays of one technological system, all of equal length (the
/// number of successful samples), in sample-index order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricSamples {
    pub energy_kwh: Vec<f64>,
    pub embodied_kg: Vec<f64>,
    pub use_kg: Vec<f64>,
    pub total_kg: Vec<f64>,
}

impl MetricSamples {
    fn push(&mut self, t: &Totals) {
        self.energy_kwh.push(t.energy_kwh_per_year);
        self.embodied_kg.push(t.embodied_kg_per_year);
        self.use_kg.push(t.use_kg_per_year);
        self.total_kg.push(t.total_kg_per_year());
    }

    pub fn len(&self) -> usize {
        self.total_kg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total_kg.is_empty()
    }
}

/// Outcome of a Monte Carlo run: per-system sample arrays plus any failed
/// samples (index and cause). The run aborts instead if more than 1% of
/// samples fail.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    pub per_ts: BTreeMap<String, MetricSamples>,
    pub failed: Vec<(usize, String)>,
    pub samples: usize,
}

/// Run the Monte Carlo analysis: `spec.samples` independent perturbations of
/// the catalog, each pushed through inventory and assessment. Samples run in
/// parallel; the result is identical to a sequential run because each sample
/// owns a dedicated RNG stream and aggregation follows sample order.
pub fn run_sensitivity(
    catalog: &Catalog,
    profile: &AllocationProfile,
    dist: &FarmSizeDistribution,
    grid: &GridIntensity,
    spec: &PerturbationSpec,
) -> Result<SensitivityResult> {
    spec.validate()?;
    catalog.ensure_valid()?;
    grid.validate()?;

    let outcomes: Vec<std::result::Result<BTreeMap<String, Totals>, String>> = (0..spec.samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(index as u64);
            let perturbed = perturb_catalog(catalog, spec, &mut rng);
            build_inventory(&perturbed, profile, dist)
                .and_then(|inv| assess(&perturbed, &inv, grid))
                .map(|result| result.by_ts)
                .map_err(|e| e.to_string())
        })
        .collect();

    fold_samples(spec.samples, outcomes)
}

/// Aggregate per-sample outcomes in index order, tolerating at most 1%
/// failures.
fn fold_samples(
    samples: usize,
    outcomes: Vec<std::result::Result<BTreeMap<String, Totals>, String>>,
) -> Result<SensitivityResult> {
    let mut per_ts: BTreeMap<String, MetricSamples> = BTreeMap::new();
    let mut failed = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(by_ts) => {
                for (ts, totals) in by_ts {
                    per_ts.entry(ts).or_default().push(&totals);
                }
            }
            Err(cause) => failed.push((index, cause)),
        }
    }
    if failed.len() as f64 > samples as f64 * 0.01 {
        let first_cause = failed
            .first()
            .map(|(_, c)| c.clone())
            .unwrap_or_default();
        return Err(Error::SensitivityFailure {
            failed: failed.len(),
            total: samples,
            first_cause,
        });
    }
    Ok(SensitivityResult {
        per_ts,
        failed,
        samples,
    })
}

/// One row of the summary table: a (system, metric) pair with its mean,
/// relative standard deviation and quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub ts: String,
    pub metric: &'static str,
    pub mean: f64,
    pub relative_std: f64,
    pub p5: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

/// Summary of a Monte Carlo run: one row per (system, metric).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

/// Linear-interpolation quantile on a sorted slice (the convention most
/// stats packages default to).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize_metric(ts: &str, metric: &'static str, values: &[f64]) -> SummaryRow {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let std = var.sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    SummaryRow {
        ts: ts.to_string(),
        metric,
        mean,
        relative_std: if mean != 0.0 { std / mean } else { 0.0 },
        p5: quantile(&sorted, 0.05),
        p25: quantile(&sorted, 0.25),
        p50: quantile(&sorted, 0.50),
        p75: quantile(&sorted, 0.75),
        p95: quantile(&sorted, 0.95),
    }
}

/// Distil sample arrays into quantiles, means and relative spreads, one row
/// per (system, metric).
pub fn summarize(result: &SensitivityResult) -> SummaryTable {
    let mut rows = Vec::new();
    for (ts, samples) in &result.per_ts {
        if samples.is_empty() {
            continue;
        }
        rows.push(summarize_metric(ts, "energy_kWh", &samples.energy_kwh));
        rows.push(summarize_metric(ts, "embodied_kg", &samples.embodied_kg));
        rows.push(summarize_metric(ts, "use_kg", &samples.use_kg));
        rows.push(summarize_metric(ts, "total_kg", &samples.total_kg));
    }
    SummaryTable { rows }
}
