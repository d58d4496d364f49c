//! Farm-size distributions over a territory.
//!
//! A territory is a frequency table: farm sizes `s_i` (heads of cattle or
//! hectares, depending on the use-case) against farm counts `n_i`. Published
//! statistics often come as coarse bins, so this module also reconstructs a
//! dense, continuous distribution from bin counts plus aggregate totals: the
//! density is piecewise linear with knots at the bin edges and quarter points,
//! heights are fitted by smoothed non-negative least squares against the
//! per-bin counts and the total-size moment, and the result is sampled back
//! onto a regular size grid.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::nnls::nnls;
use crate::Result;
use nalgebra::{DMatrix, DVector};

/// What a farm "size" measures. Animal use-cases count livestock heads,
/// crop use-cases count hectares of cultivated area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeUnit {
    Heads,
    Hectares,
}

impl std::fmt::Display for SizeUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SizeUnit::Heads => write!(f, "heads"),
            SizeUnit::Hectares => write!(f, "hectares"),
        }
    }
}

/// Discrete farm-size frequency table: strictly increasing positive sizes,
/// non-negative (possibly fractional) counts.
///
/// Counts are real-valued on purpose: densified distributions spread bin
/// totals over many sizes and rounding them would bias the small bins.
#[derive(Debug, Clone, PartialEq)]
pub struct FarmSizeDistribution {
    sizes: Vec<f64>,
    counts: Vec<f64>,
    size_unit: SizeUnit,
}

impl FarmSizeDistribution {
    pub fn new(sizes: Vec<f64>, counts: Vec<f64>, size_unit: SizeUnit) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if sizes.len() != counts.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} sizes but {} counts",
                sizes.len(),
                counts.len()
            )));
        }
        for pair in sizes.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidDistribution(format!(
                    "sizes must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        if !sizes[0].is_finite() || sizes[0] <= 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "sizes must be positive (found {})",
                sizes[0]
            )));
        }
        if let Some(bad) = counts.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "counts must be finite and non-negative (found {bad})"
            )));
        }
        Ok(Self { sizes, counts, size_unit })
    }

    /// Parse a delimited text table with columns `size, count`. Accepts comma,
    /// tab or whitespace separation; lines starting with `#` and an optional
    /// header row are skipped. Duplicate sizes have their counts summed.
    pub fn from_delimited(text: &str, size_unit: SizeUnit) -> Result<Self> {
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c == '\t' || c == ';' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected two columns (size, count), got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
                (Ok(s), Ok(n)) => rows.push((s, n)),
                _ if rows.is_empty() && fields[0].chars().any(|c| c.is_alphabetic()) => {
                    continue; // header row
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: could not parse '{}' as numbers",
                        lineno + 1,
                        line
                    )))
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut sizes: Vec<f64> = Vec::with_capacity(rows.len());
        let mut counts: Vec<f64> = Vec::with_capacity(rows.len());
        for (s, n) in rows {
            if sizes.last() == Some(&s) {
                *counts.last_mut().unwrap() += n;
            } else {
                sizes.push(s);
                counts.push(n);
            }
        }
        Self::new(sizes, counts, size_unit)
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn size_unit(&self) -> SizeUnit {
        self.size_unit
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn max_size(&self) -> f64 {
        *self.sizes.last().expect("distribution is never empty")
    }

    /// Total number of farms, Σ nᵢ.
    pub fn total_farms(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Aggregate territory size, Σ sᵢ·nᵢ (heads or hectares).
    pub fn total_size(&self) -> f64 {
        self.sizes
            .iter()
            .zip(&self.counts)
            .map(|(s, n)| s * n)
            .sum()
    }

    /// Mean farm size, total_size / total_farms.
    pub fn average_size(&self) -> Result<f64> {
        let farms = self.total_farms();
        if farms <= 0.0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(self.total_size() / farms)
    }

    /// Drop all sizes below `min_size`. Statistics sources routinely omit
    /// very small holdings, so the cut is a filter applied at ingestion
    /// rather than something baked into the data model.
    pub fn filter_min_size(&self, min_size: f64) -> Result<Self> {
        let keep: Vec<(f64, f64)> = self
            .sizes
            .iter()
            .zip(&self.counts)
            .filter(|(s, _)| **s >= min_size)
            .map(|(s, n)| (*s, *n))
            .collect();
        if keep.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        Self::new(
            keep.iter().map(|p| p.0).collect(),
            keep.iter().map(|p| p.1).collect(),
            self.size_unit,
        )
    }
}

/// Coarse binned statistics as published: bin edges, farms per bin, and the
/// two aggregate totals the dense reconstruction must reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseBinSpec {
    pub bin_edges: Vec<f64>,
    pub bin_counts: Vec<f64>,
    pub target_total_farms: f64,
    pub target_total_size: f64,
}

impl CoarseBinSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bin_counts.is_empty() {
            return Err(Error::InvalidBinSpec("no bins".into()));
        }
        if self.bin_edges.len() != self.bin_counts.len() + 1 {
            return Err(Error::InvalidBinSpec(format!(
                "{} edges for {} bins (need counts + 1)",
                self.bin_edges.len(),
                self.bin_counts.len()
            )));
        }
        if !self.bin_edges[0].is_finite() || self.bin_edges[0] <= 0.0 {
            return Err(Error::InvalidBinSpec(format!(
                "bin edges must be positive (first edge {})",
                self.bin_edges[0]
            )));
        }
        for pair in self.bin_edges.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidBinSpec(format!(
                    "bin edges must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(bad) = self.bin_counts.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidBinSpec(format!(
                "bin counts must be finite and non-negative (found {bad})"
            )));
        }
        let sum: f64 = self.bin_counts.iter().sum();
        if (sum - self.target_total_farms).abs() > 0.5 {
            return Err(Error::InvalidBinSpec(format!(
                "bin counts sum to {sum} but target_total_farms is {} (allowed rounding slack 0.5)",
                self.target_total_farms
            )));
        }
        if !(self.target_total_farms > 0.0) || !(self.target_total_size > 0.0) {
            return Err(Error::InvalidBinSpec(
                "target totals must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Continuous farm-size density: piecewise linear between `knots`, zero
/// outside them. This is the C⁰ object behind [`densify`]; it is exposed so
/// callers can check continuity and non-negativity directly.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearDensity {
    knots: Vec<f64>,
    heights: Vec<f64>,
}

impl PiecewiseLinearDensity {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Density value at `s` (zero outside the knot range).
    pub fn value(&self, s: f64) -> f64 {
        let n = self.knots.len();
        if s < self.knots[0] || s > self.knots[n - 1] {
            return 0.0;
        }
        let seg = self.knots.partition_point(|&k| k <= s).min(n - 1);
        let (x0, x1) = (self.knots[seg - 1], self.knots[seg]);
        let (h0, h1) = (self.heights[seg - 1], self.heights[seg]);
        h0 + (h1 - h0) * (s - x0) / (x1 - x0)
    }

    /// ∫ f ds over [lo, hi] (exact; the integrand is piecewise linear).
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        self.segment_sum(lo, hi, |x0, x1, h0, h1| (h0 + h1) / 2.0 * (x1 - x0))
    }

    /// ∫ s·f ds over [lo, hi] (exact first moment).
    pub fn integrate_moment(&self, lo: f64, hi: f64) -> f64 {
        self.segment_sum(lo, hi, |x0, x1, h0, h1| {
            let len = x1 - x0;
            len * (h0 * (2.0 * x0 + x1) + h1 * (x0 + 2.0 * x1)) / 6.0
        })
    }

    fn segment_sum(&self, lo: f64, hi: f64, piece: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
        let n = self.knots.len();
        let lo = lo.max(self.knots[0]);
        let hi = hi.min(self.knots[n - 1]);
        if hi <= lo {
            return 0.0;
        }
        let mut acc = 0.0;
        for seg in 1..n {
            let (x0, x1) = (self.knots[seg - 1], self.knots[seg]);
            let a = lo.max(x0);
            let b = hi.min(x1);
            if b <= a {
                continue;
            }
            let ha = self.value_on_segment(seg, a);
            let hb = self.value_on_segment(seg, b);
            acc += piece(a, b, ha, hb);
        }
        acc
    }

    fn value_on_segment(&self, seg: usize, s: f64) -> f64 {
        let (x0, x1) = (self.knots[seg - 1], self.knots[seg]);
        let (h0, h1) = (self.heights[seg - 1], self.heights[seg]);
        h0 + (h1 - h0) * (s - x0) / (x1 - x0)
    }
}

/// Interior knots per bin. Quarter-point knots give each bin enough freedom
/// to move its centroid well away from the middle; with a single midpoint
/// knot the shared edge heights couple neighbouring bins so strongly that
/// moderately skewed totals become unreachable.
const KNOTS_PER_BIN: usize = 4;

/// Fit a continuous non-negative density to coarse bins.
///
/// Knots sit at every bin edge and at the quarter points inside every bin.
/// Heights solve a non-negative least-squares system whose rows are the
/// per-bin integrals (normalised by the bin counts) and the total-size
/// moment (normalised by the target), with a second-difference smoothing
/// penalty swept from strong to weak until the constraints are met to well
/// inside the advertised tolerances.
pub fn reconstruct_density(coarse: &CoarseBinSpec) -> Result<PiecewiseLinearDensity> {
    coarse.validate()?;
    let edges = &coarse.bin_edges;
    let nbins = coarse.bin_counts.len();

    // Quick infeasibility check: whatever the density, each bin's moment is
    // bounded by its mass times the bin edges.
    let lo_bound: f64 = coarse
        .bin_counts
        .iter()
        .zip(edges.windows(2))
        .map(|(c, e)| c * e[0])
        .sum();
    let hi_bound: f64 = coarse
        .bin_counts
        .iter()
        .zip(edges.windows(2))
        .map(|(c, e)| c * e[1])
        .sum();
    if coarse.target_total_size < lo_bound || coarse.target_total_size > hi_bound {
        return Err(Error::ReconstructionFailed(format!(
            "target_total_size {} outside the feasible range [{lo_bound}, {hi_bound}] \
             implied by the bin counts",
            coarse.target_total_size
        )));
    }

    let mut knots = Vec::with_capacity(KNOTS_PER_BIN * nbins + 1);
    for i in 0..nbins {
        for k in 0..KNOTS_PER_BIN {
            let t = k as f64 / KNOTS_PER_BIN as f64;
            knots.push(edges[i] + t * (edges[i + 1] - edges[i]));
        }
    }
    knots.push(edges[nbins]);
    let nk = knots.len();

    // Per-bin integral rows + one total-size moment row, each normalised so
    // its right-hand side is 1. Zero-count bins are weighted against the
    // average bin mass instead.
    let avg_mass = coarse.target_total_farms / nbins as f64;
    let nrows = nbins + 1;
    let mut a = DMatrix::zeros(nrows, nk);
    let mut b = DVector::zeros(nrows);
    for i in 0..nbins {
        let weight = coarse.bin_counts[i].max(avg_mass * 1e-3);
        // The bin covers knots KNOTS_PER_BIN*i ..= KNOTS_PER_BIN*(i+1) in
        // equal segments; trapezoid hats give the edge knots half the weight
        // of the interior ones.
        let seg = (edges[i + 1] - edges[i]) / KNOTS_PER_BIN as f64;
        let first = KNOTS_PER_BIN * i;
        a[(i, first)] = seg / 2.0 / weight;
        for k in 1..KNOTS_PER_BIN {
            a[(i, first + k)] = seg / weight;
        }
        a[(i, first + KNOTS_PER_BIN)] = seg / 2.0 / weight;
        b[i] = coarse.bin_counts[i] / weight;
    }
    for seg in 1..nk {
        let (x0, x1) = (knots[seg - 1], knots[seg]);
        let len = x1 - x0;
        a[(nbins, seg - 1)] += len * (2.0 * x0 + x1) / 6.0 / coarse.target_total_size;
        a[(nbins, seg)] += len * (x0 + 2.0 * x1) / 6.0 / coarse.target_total_size;
    }
    b[nbins] = 1.0;

    // Typical density height, used to scale the smoothing rows.
    let h_scale = coarse.target_total_farms / (edges[nbins] - edges[0]);

    const BIN_TOL: f64 = 1e-4;
    const SIZE_TOL: f64 = 5e-4;
    let mut last_err = (f64::INFINITY, f64::INFINITY);
    for exp in 2..=8 {
        let lambda = 10f64.powi(-exp);
        let heights = solve_smoothed(&a, &b, &knots, lambda, h_scale);
        let density = PiecewiseLinearDensity {
            knots: knots.clone(),
            heights,
        };
        let bin_err = (0..nbins)
            .map(|i| {
                let fit = density.integrate(edges[i], edges[i + 1]);
                let target = coarse.bin_counts[i];
                (fit - target).abs() / target.max(avg_mass * 1e-3)
            })
            .fold(0.0, f64::max);
        let moment = density.integrate_moment(edges[0], edges[nbins]);
        let size_err = (moment - coarse.target_total_size).abs() / coarse.target_total_size;
        if bin_err <= BIN_TOL && size_err <= SIZE_TOL {
            return Ok(density);
        }
        last_err = (bin_err, size_err);
    }
    Err(Error::ReconstructionFailed(format!(
        "no non-negative continuous density meets the bin counts and total size \
         (best residuals: bins {:.2e}, size {:.2e})",
        last_err.0, last_err.1
    )))
}

/// One smoothed NNLS solve: constraint rows plus λ-weighted slope-change
/// penalties (scaled by the typical height so λ is dimensionless).
fn solve_smoothed(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    knots: &[f64],
    lambda: f64,
    h_scale: f64,
) -> Vec<f64> {
    let nk = knots.len();
    let nrows = a.nrows();
    let span = knots[nk - 1] - knots[0];
    let mut full = DMatrix::zeros(nrows + nk.saturating_sub(2), nk);
    full.view_mut((0, 0), (nrows, nk)).copy_from(a);
    for i in 1..nk - 1 {
        let dl = knots[i] - knots[i - 1];
        let dr = knots[i + 1] - knots[i];
        let row = nrows + i - 1;
        // Slope change across knot i, nondimensionalised: (Δh/Δs) jumps are
        // measured in units of h_scale per span.
        let w = lambda * span / h_scale;
        full[(row, i - 1)] = w / dl;
        full[(row, i)] = -w / dl - w / dr;
        full[(row, i + 1)] = w / dr;
    }
    let mut rhs = DVector::zeros(nrows + nk.saturating_sub(2));
    rhs.rows_mut(0, nrows).copy_from(b);
    nnls(&full, &rhs).iter().copied().collect()
}

/// Reconstruct a dense distribution from coarse bins: fit the continuous
/// density, then collapse it onto a regular grid of sizes spaced `step`
/// apart across the full bin range.
///
/// Each grid size receives the integral of the density over its cell,
/// with cells clipped at bin edges so the per-bin sums stay exact. The
/// result is checked against the bin counts (0.1%) and the total size
/// (0.5%) before being returned.
pub fn densify(coarse: &CoarseBinSpec, step: f64, size_unit: SizeUnit) -> Result<FarmSizeDistribution> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidBinSpec(format!("step must be positive, got {step}")));
    }
    let density = reconstruct_density(coarse)?;
    let edges = &coarse.bin_edges;
    let nbins = coarse.bin_counts.len();
    let (lo, hi) = (edges[0], edges[nbins]);

    let mut sizes = Vec::new();
    let mut k = 0u64;
    loop {
        let s = lo + k as f64 * step;
        if s > hi * (1.0 + 1e-12) {
            break;
        }
        sizes.push(s.min(hi));
        k += 1;
    }
    let mut counts = vec![0.0; sizes.len()];

    // Distribute each bin's mass over the grid points that fall inside it
    // (half-open bins; the last bin also owns its upper edge). Cell walls are
    // midpoints between neighbouring in-bin grid points, clipped to the bin,
    // so the grid reproduces every bin integral exactly.
    for i in 0..nbins {
        let (blo, bhi) = (edges[i], edges[i + 1]);
        let last_bin = i == nbins - 1;
        let members: Vec<usize> = (0..sizes.len())
            .filter(|&j| {
                let s = sizes[j];
                s >= blo && (s < bhi || (last_bin && s <= bhi))
            })
            .collect();
        if members.is_empty() {
            return Err(Error::ReconstructionFailed(format!(
                "step {step} leaves no grid size inside bin [{blo}, {bhi}]; \
                 use a finer step"
            )));
        }
        for (m, &j) in members.iter().enumerate() {
            let cell_lo = if m == 0 {
                blo
            } else {
                (sizes[members[m - 1]] + sizes[j]) / 2.0
            };
            let cell_hi = if m == members.len() - 1 {
                bhi
            } else {
                (sizes[j] + sizes[members[m + 1]]) / 2.0
            };
            counts[j] += density.integrate(cell_lo, cell_hi);
        }
        tilt_to_bin_moment(&sizes, &mut counts, &members, &density, blo, bhi);
    }

    let dist = FarmSizeDistribution::new(sizes, counts, size_unit)?;

    // Post-check the advertised guarantees before handing the result out.
    let mut cursor = 0usize;
    for i in 0..nbins {
        let (blo, bhi) = (edges[i], edges[i + 1]);
        let last_bin = i == nbins - 1;
        let mut bin_sum = 0.0;
        while cursor < dist.len() {
            let s = dist.sizes[cursor];
            if s < bhi || (last_bin && s <= bhi) {
                bin_sum += dist.counts[cursor];
                cursor += 1;
            } else {
                break;
            }
        }
        debug_assert!(dist.sizes.get(cursor).is_none_or(|s| *s >= blo));
        let target = coarse.bin_counts[i];
        let tol = (target * 1e-3).max(coarse.target_total_farms * 1e-9);
        if (bin_sum - target).abs() > tol {
            return Err(Error::ReconstructionFailed(format!(
                "bin [{blo}, {bhi}] count {bin_sum} misses target {target} beyond 0.1%"
            )));
        }
    }
    let size_err =
        (dist.total_size() - coarse.target_total_size).abs() / coarse.target_total_size;
    if size_err > 5e-3 {
        return Err(Error::ReconstructionFailed(format!(
            "densified total size {} misses target {} by {:.3}%",
            dist.total_size(),
            coarse.target_total_size,
            size_err * 100.0
        )));
    }
    Ok(dist)
}

/// Nudge a bin's grid masses so their first moment matches the continuous
/// density's moment over the bin, without changing the bin total.
///
/// Cell integration is exact for the mass but biases the moment whenever the
/// step is coarse enough that cells sit asymmetrically around their grid
/// point. A linear reweighting `n_k ← n_k · (1 + α(s_k − c̄))` about the
/// current centroid `c̄` fixes the moment while provably preserving the sum;
/// `α` is clamped so no mass goes negative (in which case the moment is only
/// partially recovered and the caller's post-check decides).
fn tilt_to_bin_moment(
    sizes: &[f64],
    counts: &mut [f64],
    members: &[usize],
    density: &PiecewiseLinearDensity,
    blo: f64,
    bhi: f64,
) {
    let mass: f64 = members.iter().map(|&j| counts[j]).sum();
    if !(mass > 0.0) {
        return;
    }
    let moment: f64 = members.iter().map(|&j| counts[j] * sizes[j]).sum();
    let centroid = moment / mass;
    let spread: f64 = members
        .iter()
        .map(|&j| counts[j] * (sizes[j] - centroid).powi(2))
        .sum();
    if !(spread > 0.0) {
        return;
    }
    let mut alpha = (density.integrate_moment(blo, bhi) - moment) / spread;
    for &j in members {
        if counts[j] > 0.0 {
            let d = sizes[j] - centroid;
            if d > 0.0 {
                alpha = alpha.max(-1.0 / d);
            } else if d < 0.0 {
                alpha = alpha.min(-1.0 / d);
            }
        }
    }
    for &j in members {
        counts[j] *= (1.0 + alpha * (sizes[j] - centroid)).max(0.0);
    }
}
