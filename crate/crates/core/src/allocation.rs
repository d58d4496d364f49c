//! Distribution of technological systems over farm sizes.
//!
//! Each technological system is present over a size range [a, b] with a
//! weight w; within the range its raw weight follows a compactly supported
//! bell curve that peaks at the middle of the range and vanishes at both
//! ends. At every farm size the raw weights of all systems are normalised to
//! shares summing to one — t_j(s) is the fraction of farms of size s running
//! system j. A farm runs exactly one system; fractional shares divide the
//! *count* of farms of a given size, never the equipment of a single farm.

use serde::{Deserialize, Serialize};

use crate::distribution::FarmSizeDistribution;
use crate::error::Error;
use crate::Result;

/// One adoption range: system `ts` is present for sizes in [a, b] with peak
/// weight `w`. A system may appear in several entries; its raw weight is the
/// sum over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationEntry {
    pub ts: String,
    pub a: f64,
    pub b: f64,
    pub w: f64,
}

/// Bell-shaped raw weight of one entry at size `s`: w·(1−m²)² where m maps
/// [a, b] linearly onto [−1, 1]; exactly zero outside [a, b].
///
/// The quartic is the default shape; any bell with compact support would
/// behave similarly, which is why the rest of the pipeline only ever sees
/// normalised shares.
pub fn raw_weight(entry: &AllocationEntry, s: f64) -> f64 {
    if s < entry.a || s > entry.b {
        return 0.0;
    }
    let m = (2.0 * s - (entry.a + entry.b)) / (entry.b - entry.a);
    let bell = (1.0 - m * m).powi(2);
    entry.w * bell
}

/// Adoption profile: which systems are present at which sizes, with which
/// weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AllocationProfile {
    entries: Vec<AllocationEntry>,
}

impl AllocationProfile {
    pub fn new(entries: Vec<AllocationEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProfile("no allocation entries".into()));
        }
        for e in &entries {
            if !(e.a < e.b) {
                return Err(Error::InvalidProfile(format!(
                    "entry for '{}': need a < b (got a={}, b={})",
                    e.ts, e.a, e.b
                )));
            }
            if !(0.0..=1.0).contains(&e.w) || !e.w.is_finite() {
                return Err(Error::InvalidProfile(format!(
                    "entry for '{}': weight must be in [0, 1] (got {})",
                    e.ts, e.w
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Profile in which a single system equips every farm: one entry whose
    /// range comfortably straddles all sizes in `dist` (the bell vanishes at
    /// its own endpoints, so the range must strictly contain the sizes).
    pub fn full_deployment(ts: &str, dist: &FarmSizeDistribution) -> Self {
        Self {
            entries: vec![AllocationEntry {
                ts: ts.to_string(),
                a: 0.0,
                b: 2.0 * dist.max_size() + 1.0,
                w: 1.0,
            }],
        }
    }

    pub fn entries(&self) -> &[AllocationEntry] {
        &self.entries
    }

    /// System names in first-appearance order (the column order of every
    /// exported table).
    pub fn ts_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !names.contains(&e.ts.as_str()) {
                names.push(&e.ts);
            }
        }
        names
    }

    /// Normalised shares t_j(s) for every system, in [`ts_names`](Self::ts_names)
    /// order. Errors if no system has positive weight at `s`: a farm size
    /// nobody covers is a modelling hole, not a zero.
    pub fn mass_function(&self, s: f64) -> Result<Vec<(String, f64)>> {
        let names = self.ts_names();
        let raws: Vec<f64> = names
            .iter()
            .map(|name| {
                self.entries
                    .iter()
                    .filter(|e| e.ts == *name)
                    .map(|e| raw_weight(e, s))
                    .sum()
            })
            .collect();
        let total: f64 = raws.iter().sum();
        if total <= 0.0 {
            return Err(Error::CoverageGap(vec![s]));
        }
        Ok(names
            .into_iter()
            .map(str::to_string)
            .zip(raws.iter().map(|r| r / total))
            .collect())
    }
}

/// Shares of every technological system at every size of a distribution:
/// one row per size, one column per system, each row summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationTable {
    pub sizes: Vec<f64>,
    pub ts_names: Vec<String>,
    /// `shares[row][column]` follows `sizes` × `ts_names`.
    pub shares: Vec<Vec<f64>>,
}

impl AllocationTable {
    pub fn share(&self, size_idx: usize, ts_idx: usize) -> f64 {
        self.shares[size_idx][ts_idx]
    }

    pub fn ts_index(&self, ts: &str) -> Option<usize> {
        self.ts_names.iter().position(|n| n == ts)
    }
}

/// Evaluate a profile over every size of a distribution. All coverage gaps
/// are collected before erroring so a bad profile is reported in one shot.
pub fn allocation_table(
    profile: &AllocationProfile,
    dist: &FarmSizeDistribution,
) -> Result<AllocationTable> {
    let ts_names: Vec<String> = profile.ts_names().into_iter().map(str::to_string).collect();
    let mut shares = Vec::with_capacity(dist.len());
    let mut gaps = Vec::new();
    for &s in dist.sizes() {
        match profile.mass_function(s) {
            Ok(row) => shares.push(row.into_iter().map(|(_, t)| t).collect()),
            Err(Error::CoverageGap(_)) => gaps.push(s),
            Err(other) => return Err(other),
        }
    }
    if !gaps.is_empty() {
        return Err(Error::CoverageGap(gaps));
    }
    Ok(AllocationTable {
        sizes: dist.sizes().to_vec(),
        ts_names,
        shares,
    })
}
