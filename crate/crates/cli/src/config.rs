//! Scenario configuration files.
//!
//! One TOML file names every input of a run: the shared device catalog, the
//! farm-size distribution (inline, delimited file, or coarse census bins),
//! the grid intensity, the deployment (a single system everywhere or a
//! size-dependent adoption profile), and the optional Monte Carlo and
//! thermal-baseline blocks. All paths inside a config resolve relative to
//! the config file itself, so scenario folders can be moved wholesale.

use std::fs;
use std::path::{Path, PathBuf};

use agricarb_core::{
    allocation_table, densify, AllocationEntry, AllocationProfile, Catalog, CoarseBinSpec,
    Error as CoreError, FarmSizeDistribution, GridIntensity, PerturbationSpec, SizeUnit,
    ThermalPass,
};
use serde::Deserialize;

use crate::CliError;

/// On-disk schema of a scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Scenario name; also the default output folder name.
    pub use_case: String,
    /// Device catalog file, relative to this config.
    pub catalog: PathBuf,
    pub distribution: DistributionSource,
    pub grid: GridIntensity,
    /// Deploy this one system on every farm. Mutually exclusive with
    /// `profile`.
    #[serde(default)]
    pub full_deployment: Option<String>,
    /// Size-dependent adoption profile, one `{ts, a, b, w}` entry per
    /// system and support interval. Mutually exclusive with
    /// `full_deployment`.
    #[serde(default)]
    pub profile: Option<Vec<AllocationEntry>>,
    #[serde(default)]
    pub sensitivity: Option<PerturbationSpec>,
    #[serde(default)]
    pub thermal: Option<ThermalConfig>,
    /// Where the tables go. Overridden by `--out`, then by `AGRICARB_OUT`;
    /// defaults to `out/<use_case>` next to the config.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Exactly one of `file`, `inline`, or `coarse` must be present.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSource {
    pub size_unit: SizeUnit,
    /// Delimited `size, count` file.
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Literal `sizes`/`counts` arrays.
    #[serde(default)]
    pub inline: Option<InlineDistribution>,
    /// Published coarse bins to reconstruct a dense table from.
    #[serde(default)]
    pub coarse: Option<CoarseBinSpec>,
    /// Grid spacing for the reconstruction; required with `coarse`.
    #[serde(default)]
    pub step: Option<f64>,
    /// Drop farms strictly smaller than this after loading.
    #[serde(default)]
    pub min_size: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineDistribution {
    pub sizes: Vec<f64>,
    pub counts: Vec<f64>,
}

/// Fuel-burning field operations to compare digital deployments against.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub surface_ha: f64,
    pub emission_factor_kg_per_litre: f64,
    pub passes: Vec<ThermalPass>,
}

impl ThermalConfig {
    pub(crate) fn validate(&self) -> Result<(), CliError> {
        if !(self.surface_ha > 0.0) || !self.surface_ha.is_finite() {
            return Err(CliError::Config(format!(
                "[thermal] surface_ha must be > 0 (got {})",
                self.surface_ha
            )));
        }
        if !(self.emission_factor_kg_per_litre >= 0.0)
            || !self.emission_factor_kg_per_litre.is_finite()
        {
            return Err(CliError::Config(format!(
                "[thermal] emission_factor_kg_per_litre must be >= 0 (got {})",
                self.emission_factor_kg_per_litre
            )));
        }
        for pass in &self.passes {
            if !(pass.litres_per_ha >= 0.0) || !pass.litres_per_ha.is_finite() {
                return Err(CliError::Config(format!(
                    "[thermal] pass '{}' needs litres_per_ha >= 0 (got {})",
                    pass.operation, pass.litres_per_ha
                )));
            }
        }
        Ok(())
    }
}

/// A scenario with every referenced file read, parsed, and cross-checked —
/// ready for the engine.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub name: String,
    pub catalog: Catalog,
    pub dist: FarmSizeDistribution,
    pub profile: AllocationProfile,
    pub grid: GridIntensity,
    pub sensitivity: Option<PerturbationSpec>,
    pub thermal: Option<ThermalConfig>,
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    /// Parse a scenario file. Parse errors carry the file path and the TOML
    /// span of the offending field.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text).map_err(|e| {
            CliError::Config(format!("config {}: {e}", path.display()))
        })
    }

    /// Resolve every reference and validate the whole scenario. `dir` is the
    /// folder the config was loaded from; relative paths resolve against it.
    pub fn resolve(&self, dir: &Path) -> Result<LoadedScenario, CliError> {
        let catalog_path = dir.join(&self.catalog);
        let catalog_text = fs::read_to_string(&catalog_path).map_err(|e| {
            CliError::Config(format!(
                "catalog {}: cannot read: {e}",
                catalog_path.display()
            ))
        })?;
        let catalog = Catalog::from_toml(&catalog_text)
            .and_then(|c| c.ensure_valid().map(|()| c))
            .map_err(|e| {
                CliError::Config(format!("catalog {}: {e}", catalog_path.display()))
            })?;

        let dist = self.distribution.resolve(dir)?;

        self.grid
            .validate()
            .map_err(|e| CliError::Config(format!("[grid] {e}")))?;

        let profile = self.resolve_profile(&catalog, &dist)?;

        // Coverage is a property of the config, so gaps surface here rather
        // than deep inside the engine.
        if let Err(CoreError::CoverageGap(sizes)) = allocation_table(&profile, &dist) {
            return Err(CliError::Config(coverage_message(&sizes, &profile)));
        }

        if let Some(spec) = &self.sensitivity {
            spec.validate()
                .map_err(|e| CliError::Config(format!("[sensitivity] {e}")))?;
        }
        if let Some(thermal) = &self.thermal {
            thermal.validate()?;
        }

        let output_dir = match &self.output_dir {
            Some(p) => dir.join(p),
            None => dir.join("out").join(&self.use_case),
        };

        Ok(LoadedScenario {
            name: self.use_case.clone(),
            catalog,
            dist,
            profile,
            grid: self.grid.clone(),
            sensitivity: self.sensitivity.clone(),
            thermal: self.thermal.clone(),
            output_dir,
        })
    }

    pub(crate) fn resolve_profile(
        &self,
        catalog: &Catalog,
        dist: &FarmSizeDistribution,
    ) -> Result<AllocationProfile, CliError> {
        match (&self.full_deployment, &self.profile) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "`full_deployment` and `profile` are mutually exclusive; keep one".into(),
            )),
            (None, None) => Err(CliError::Config(
                "one of `full_deployment` or `profile` is required".into(),
            )),
            (Some(ts), None) => {
                catalog.system(ts).map_err(|_| {
                    CliError::Config(format!(
                        "full_deployment names unknown system '{ts}'"
                    ))
                })?;
                Ok(AllocationProfile::full_deployment(ts, dist))
            }
            (None, Some(entries)) => {
                for entry in entries {
                    catalog.system(&entry.ts).map_err(|_| {
                        CliError::Config(format!(
                            "[[profile]] names unknown system '{}'",
                            entry.ts
                        ))
                    })?;
                }
                AllocationProfile::new(entries.clone())
                    .map_err(|e| CliError::Config(format!("[[profile]] {e}")))
            }
        }
    }
}

impl DistributionSource {
    pub(crate) fn resolve(&self, dir: &Path) -> Result<FarmSizeDistribution, CliError> {
        let sources = self.file.is_some() as u8
            + self.inline.is_some() as u8
            + self.coarse.is_some() as u8;
        if sources != 1 {
            return Err(CliError::Config(format!(
                "[distribution] needs exactly one of `file`, `inline`, `coarse` (found {sources})"
            )));
        }
        if self.step.is_some() && self.coarse.is_none() {
            return Err(CliError::Config(
                "[distribution] `step` only applies to `coarse` reconstruction".into(),
            ));
        }

        let dist = if let Some(file) = &self.file {
            let path = dir.join(file);
            let text = fs::read_to_string(&path).map_err(|e| {
                CliError::Config(format!(
                    "[distribution] file {}: cannot read: {e}",
                    path.display()
                ))
            })?;
            FarmSizeDistribution::from_delimited(&text, self.size_unit).map_err(|e| {
                CliError::Config(format!("[distribution] file {}: {e}", path.display()))
            })?
        } else if let Some(inline) = &self.inline {
            FarmSizeDistribution::new(
                inline.sizes.clone(),
                inline.counts.clone(),
                self.size_unit,
            )
            .map_err(|e| CliError::Config(format!("[distribution.inline] {e}")))?
        } else {
            let coarse = self.coarse.as_ref().expect("checked above");
            let step = self.step.ok_or_else(|| {
                CliError::Config(
                    "[distribution] `coarse` reconstruction requires `step`".into(),
                )
            })?;
            densify(coarse, step, self.size_unit)
                .map_err(|e| CliError::Config(format!("[distribution.coarse] {e}")))?
        };

        match self.min_size {
            Some(min) => dist
                .filter_min_size(min)
                .map_err(|e| CliError::Config(format!("[distribution] min_size: {e}"))),
            None => Ok(dist),
        }
    }
}

/// Human-readable coverage report: the uncovered sizes plus every system's
/// support interval, so the gap is obvious.
pub fn coverage_message(sizes: &[f64], profile: &AllocationProfile) -> String {
    let shown: Vec<String> = sizes.iter().take(5).map(|s| s.to_string()).collect();
    let more = if sizes.len() > 5 {
        format!(" and {} more", sizes.len() - 5)
    } else {
        String::new()
    };
    let supports: Vec<String> = profile
        .entries()
        .iter()
        .map(|e| format!("{} covers [{}, {}]", e.ts, e.a, e.b))
        .collect();
    format!(
        "no system covers size(s) {}{more}; {}",
        shown.join(", "),
        supports.join("; ")
    )
}
