//! Parameter sweeps with mode tracking, per-row diagnostics and peak
//! locking analysis.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::circstats::{extract_phases, lobe_imbalance, resultant, DEFAULT_NODE_CUTOFF};
use crate::entropy::{entropy_report, EntropyConfig};
use crate::linalg::{C64, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::models::{
    assemble_helmholtz, build_ellipse_grid, solve_cavity_modes_with, two_level_modes, CavitySpec, Mode, Support,
    TwoLevelParams,
};
use crate::nonorth::{rigidity_report, ExtReal};

/// Overlap margin below which the best match of a mode is not trusted.
pub const AMBIGUITY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("mode tracking is ambiguous for mode {row} (overlap margin {margin:e})")]
    AmbiguousTracking { row: usize, margin: f64 },
    #[error("field {field} has no interior peak")]
    NoInteriorPeak { field: String },
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
}

/// Parameter values, either `start:stop:step` or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamGrid {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl ParamGrid {
    /// Points `start + i step` up to and including `stop` (within rounding).
    pub fn values(&self) -> Vec<f64> {
        match self {
            ParamGrid::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| start + i as f64 * step).collect()
            }
            ParamGrid::List(v) => v.clone(),
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            ParamGrid::Range { start, stop, step } => {
                if !(step > &0.0) || !step.is_finite() {
                    return Err("step must be positive".into());
                }
                if !start.is_finite() || !stop.is_finite() || stop < start {
                    return Err("range must satisfy start <= stop".into());
                }
                Ok(())
            }
            ParamGrid::List(v) => {
                if v.is_empty() {
                    return Err("parameter list is empty".into());
                }
                if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err("parameter list must be finite and strictly increasing".into());
                }
                Ok(())
            }
        }
    }
}

/// Which system is swept; the swept parameter is `delta` for the two-level
/// model and `epsilon` for cavities.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    TwoLevel { g: f64, gamma: f64 },
    Cavity { template: CavitySpec, k_target: f64 },
}

impl ModelSpec {
    pub fn parameter_name(&self) -> &'static str {
        match self {
            ModelSpec::TwoLevel { .. } => "delta",
            ModelSpec::Cavity { .. } => "epsilon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub entropy: EntropyConfig,
    pub node_cutoff: f64,
    /// Reference Schawlow-Townes linewidth, when a linewidth column is wanted.
    pub delta_nu_st: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { entropy: EntropyConfig::default(), node_cutoff: DEFAULT_NODE_CUTOFF, delta_nu_st: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: ParamGrid,
    pub model: ModelSpec,
    pub analysis: AnalysisConfig,
    /// Number of modes tracked per point.
    pub modes: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl SweepConfig {
    pub fn new(grid: ParamGrid, model: ModelSpec, modes: usize) -> Self {
        Self { grid, model, analysis: AnalysisConfig::default(), modes, tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |s: String| Err(SweepError::InvalidConfig(s));
        if let Err(e) = self.grid.validate() {
            return bad(e);
        }
        if self.modes == 0 {
            return bad("modes must be at least 1".into());
        }
        match &self.model {
            ModelSpec::TwoLevel { g, gamma } => {
                if self.modes > 2 {
                    return bad("the two-level model has only 2 modes".into());
                }
                if let Err(e) = TwoLevelParams::new(0.0, *g, *gamma).validate() {
                    return bad(e.to_string());
                }
            }
            ModelSpec::Cavity { template, k_target } => {
                if !(*k_target > 0.0) || !k_target.is_finite() {
                    return bad("k_target must be positive".into());
                }
                for eps in self.grid.values() {
                    if let Err(e) = template.with_epsilon(eps).validate() {
                        return bad(e.to_string());
                    }
                }
            }
        }
        let a = &self.analysis;
        if a.entropy.n_bins < 2 {
            return bad("n_bins must be at least 2".into());
        }
        if a.entropy.k_max < 1 {
            return bad("k_max must be at least 1".into());
        }
        if a.entropy.alphas.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return bad("alphas must be positive".into());
        }
        if !(0.0..1.0).contains(&a.node_cutoff) {
            return bad("node_cutoff must lie in [0, 1)".into());
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("solver tolerance and iteration limit must be positive".into());
        }
        Ok(())
    }
}

/// Every diagnostic of one tracked mode at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDiagnostics {
    /// Wavenumber for cavities, energy for the two-level model.
    pub eigenvalue: C64,
    pub r1: f64,
    pub lobe_imbalance: f64,
    pub r2: f64,
    pub rigidity_abs: f64,
    pub petermann: ExtReal,
    pub linewidth: Option<ExtReal>,
    pub s_folded: f64,
    pub s_folded_differential: f64,
    pub s_unfolded: f64,
    pub s_value: f64,
    pub uncertainty_sum: f64,
    pub bound_gap: f64,
    pub renyi: Vec<(f64, f64)>,
    pub chi_squared: f64,
    pub delta_l2: f64,
    pub degenerate_alignment: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub param: f64,
    /// Tracked modes in branch order; empty when the point failed.
    pub modes: Vec<ModeDiagnostics>,
    pub tracking_ambiguous: bool,
    pub error: Option<String>,
}

/// Diagnostics of a single mode.
pub fn diagnose(m: &Mode, a: &AnalysisConfig) -> Result<ModeDiagnostics, String> {
    let s = extract_phases(m, a.node_cutoff).map_err(|e| e.to_string())?;
    let rig = rigidity_report(m, a.delta_nu_st);
    let ent = entropy_report(&s, &a.entropy).map_err(|e| e.to_string())?;
    Ok(ModeDiagnostics {
        eigenvalue: m.eigen_k,
        r1: resultant(&s, 1).r,
        lobe_imbalance: lobe_imbalance(&s).unwrap_or(f64::NAN),
        r2: resultant(&s, 2).r,
        rigidity_abs: rig.r_abs,
        petermann: rig.petermann,
        linewidth: rig.linewidth_factor,
        s_folded: ent.s_folded,
        s_folded_differential: ent.s_folded_differential,
        s_unfolded: ent.s_unfolded,
        s_value: ent.s_value,
        uncertainty_sum: ent.uncertainty.sum,
        bound_gap: ent.uncertainty.bound_gap,
        renyi: ent.renyi,
        chi_squared: ent.chi_squared,
        delta_l2: ent.near_uniform.delta_l2,
        degenerate_alignment: ent.degenerate_alignment,
    })
}

/// The modes of the configured model at parameter value `x`.
pub fn solve_point(cfg: &SweepConfig, x: f64) -> Result<Vec<Mode>, String> {
    match &cfg.model {
        ModelSpec::TwoLevel { g, gamma } => {
            let modes = two_level_modes(&TwoLevelParams::new(x, *g, *gamma)).map_err(|e| e.to_string())?;
            Ok(modes.into_iter().take(cfg.modes).collect())
        }
        ModelSpec::Cavity { template, k_target } => {
            let spec = template.with_epsilon(x);
            let geom = Arc::new(build_ellipse_grid(&spec).map_err(|e| e.to_string())?);
            let op = assemble_helmholtz(&geom, &spec);
            solve_cavity_modes_with(&op, &geom, *k_target, cfg.modes, cfg.tol, cfg.max_iter).map_err(|e| e.to_string())
        }
    }
}

/// `|<a|b>| / (|a| |b|)`, over lattice points the two grids share.
pub fn mode_overlap(a: &Mode, b: &Mode) -> f64 {
    let va = a.values.as_slice();
    let vb = b.values.as_slice();
    let norm = a.values.norm() * b.values.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let dot = match (&a.support, &b.support) {
        (Support::Grid(ga), Support::Grid(gb)) if Arc::ptr_eq(ga, gb) || ga.h == gb.h => {
            let mut acc = C64::default();
            for p in 0..ga.n_interior() {
                if let Some(q) = gb.index_of_key(ga.lattice_key(p)) {
                    acc += va[p].conj() * vb[q];
                }
            }
            acc
        }
        _ if va.len() == vb.len() => a.values.dot(&b.values),
        _ => C64::default(),
    };
    dot.norm() / norm
}

/// Greedy maximum-overlap assignment. Entry `i` of the result is the index
/// in `next` that continues mode `i` of `prev`.
pub fn track_modes(prev: &[Mode], next: &[Mode]) -> Result<Vec<usize>, SweepError> {
    if prev.len() != next.len() {
        return Err(SweepError::InvalidConfig("tracked lists differ in length".into()));
    }
    let n = prev.len();
    let overlap: Vec<Vec<f64>> = prev.iter().map(|p| next.iter().map(|q| mode_overlap(p, q)).collect()).collect();
    for (row, o) in overlap.iter().enumerate() {
        if n < 2 {
            break;
        }
        let mut sorted = o.clone();
        sorted.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
        let margin = sorted[0] - sorted[1];
        if margin < AMBIGUITY_MARGIN {
            return Err(SweepError::AmbiguousTracking { row, margin });
        }
    }
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for _ in 0..n {
        let mut best = (usize::MAX, usize::MAX, f64::NEG_INFINITY);
        for (i, row) in overlap.iter().enumerate() {
            if perm[i] != usize::MAX {
                continue;
            }
            for (j, &v) in row.iter().enumerate() {
                if !taken[j] && v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        perm[best.0] = best.1;
        taken[best.1] = true;
    }
    Ok(perm)
}

type PointResult = Result<(Vec<Mode>, Vec<ModeDiagnostics>), String>;

/// Solves and analyses every grid point in parallel, then tracks branches
/// in parameter order. The result does not depend on the thread count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, SweepError> {
    cfg.validate()?;
    let params = cfg.grid.values();
    let solved: Vec<PointResult> = params
        .par_iter()
        .map(|&x| {
            let modes = solve_point(cfg, x)?;
            let diags = modes.iter().map(|m| diagnose(m, &cfg.analysis)).collect::<Result<Vec<_>, _>>()?;
            Ok((modes, diags))
        })
        .collect();

    let mut records = Vec::with_capacity(params.len());
    let mut prev: Option<Vec<Mode>> = None;
    for (x, result) in params.into_iter().zip(solved) {
        match result {
            Err(e) => records.push(SweepRecord { param: x, modes: Vec::new(), tracking_ambiguous: false, error: Some(e) }),
            Ok((modes, diags)) => {
                let (perm, ambiguous) = match &prev {
                    None => ((0..modes.len()).collect(), false),
                    Some(p) => match track_modes(p, &modes) {
                        Ok(perm) => (perm, false),
                        Err(_) => ((0..modes.len()).collect(), true),
                    },
                };
                let ordered_modes: Vec<Mode> = perm.iter().map(|&j| modes[j].clone()).collect();
                let ordered_diags = perm.iter().map(|&j| diags[j].clone()).collect();
                records.push(SweepRecord { param: x, modes: ordered_diags, tracking_ambiguous: ambiguous, error: None });
                prev = Some(ordered_modes);
            }
        }
    }
    Ok(records)
}

/// A per-mode column of the sweep table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    EigenRe,
    EigenIm,
    R1,
    LobeImbalance,
    R2,
    RigidityAbs,
    Petermann,
    Linewidth,
    SFolded,
    SFoldedDifferential,
    SUnfolded,
    SValue,
    UncertaintySum,
    BoundGap,
    Renyi(f64),
    ChiSquared,
    DeltaL2,
}

impl Field {
    pub const FIXED: [Field; 16] = [
        Field::EigenRe,
        Field::EigenIm,
        Field::R1,
        Field::LobeImbalance,
        Field::R2,
        Field::RigidityAbs,
        Field::Petermann,
        Field::Linewidth,
        Field::SFolded,
        Field::SFoldedDifferential,
        Field::SUnfolded,
        Field::SValue,
        Field::UncertaintySum,
        Field::BoundGap,
        Field::ChiSquared,
        Field::DeltaL2,
    ];

    pub fn name(&self) -> String {
        match self {
            Field::EigenRe => "eig_re".into(),
            Field::EigenIm => "eig_im".into(),
            Field::R1 => "r1".into(),
            Field::LobeImbalance => "lobe_imbalance".into(),
            Field::R2 => "r2".into(),
            Field::RigidityAbs => "rigidity_abs".into(),
            Field::Petermann => "petermann".into(),
            Field::Linewidth => "linewidth".into(),
            Field::SFolded => "s_folded".into(),
            Field::SFoldedDifferential => "s_folded_diff".into(),
            Field::SUnfolded => "s_unfolded".into(),
            Field::SValue => "s_value".into(),
            Field::UncertaintySum => "uncertainty_sum".into(),
            Field::BoundGap => "bound_gap".into(),
            Field::Renyi(a) => format!("renyi_{}", format_alpha(*a)),
            Field::ChiSquared => "chi_squared".into(),
            Field::DeltaL2 => "delta_l2".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Field> {
        if let Some(a) = s.strip_prefix("renyi_") {
            return a.parse::<f64>().ok().filter(|x| *x > 0.0).map(Field::Renyi);
        }
        Field::FIXED.iter().copied().find(|f| f.name() == s)
    }

    /// Value in `d`; infinite Petermann factors map to `+inf`, absent
    /// values to NaN.
    pub fn value(&self, d: &ModeDiagnostics) -> f64 {
        match self {
            Field::EigenRe => d.eigenvalue.re,
            Field::EigenIm => d.eigenvalue.im,
            Field::R1 => d.r1,
            Field::LobeImbalance => d.lobe_imbalance,
            Field::R2 => d.r2,
            Field::RigidityAbs => d.rigidity_abs,
            Field::Petermann => d.petermann.to_f64(),
            Field::Linewidth => d.linewidth.map_or(f64::NAN, ExtReal::to_f64),
            Field::SFolded => d.s_folded,
            Field::SFoldedDifferential => d.s_folded_differential,
            Field::SUnfolded => d.s_unfolded,
            Field::SValue => d.s_value,
            Field::UncertaintySum => d.uncertainty_sum,
            Field::BoundGap => d.bound_gap,
            Field::Renyi(a) => d.renyi.iter().find(|(x, _)| (x - a).abs() < 1e-12).map_or(f64::NAN, |(_, h)| *h),
            Field::ChiSquared => d.chi_squared,
            Field::DeltaL2 => d.delta_l2,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Shortest decimal form of an order, as used in column names (`1.5`, `2`).
pub fn format_alpha(a: f64) -> String {
    format!("{a}")
}

/// Column of `field` for `mode`, NaN where the row has no such mode.
pub fn field_series(records: &[SweepRecord], field: Field, mode: usize) -> Vec<f64> {
    records.iter().map(|r| r.modes.get(mode).map_or(f64::NAN, |d| field.value(d))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakEntry {
    pub field: String,
    pub mode: usize,
    /// Row of the maximum.
    pub index: usize,
    pub argmax: f64,
    /// Vertex of the parabola through the peak and its neighbours.
    pub refined: f64,
    pub height: f64,
}

/// Argmax of one column with parabolic refinement.
pub fn detect_peaks(records: &[SweepRecord], field: Field, mode: usize) -> Result<PeakEntry, SweepError> {
    let name = field.name();
    let y = field_series(records, field, mode);
    let finite_run = y
        .iter()
        .scan(0usize, |run, v| {
            *run = if v.is_nan() { 0 } else { *run + 1 };
            Some(*run)
        })
        .max()
        .unwrap_or(0);
    if records.len() < 3 || finite_run < 3 {
        return Err(SweepError::InvalidConfig(format!("field {name} needs at least 3 consecutive valid rows")));
    }
    let mut idx = usize::MAX;
    for (i, v) in y.iter().enumerate() {
        if !v.is_nan() && (idx == usize::MAX || *v > y[idx]) {
            idx = i;
        }
    }
    let interior = idx > 0 && idx + 1 < y.len() && !y[idx - 1].is_nan() && !y[idx + 1].is_nan();
    if !interior {
        return Err(SweepError::NoInteriorPeak { field: name });
    }
    let x = |i: usize| records[i].param;
    let (x0, x1, x2) = (x(idx - 1), x(idx), x(idx + 1));
    let (y0, y1, y2) = (y[idx - 1], y[idx], y[idx + 1]);
    let refined = if y0.is_finite() && y1.is_finite() && y2.is_finite() {
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let curv = (d12 - d01) / (x2 - x0);
        if curv < 0.0 {
            (0.5 * (x0 + x1) - d01 / (2.0 * curv)).clamp(x0, x2)
        } else {
            x1
        }
    } else {
        x1
    };
    Ok(PeakEntry { field: name, mode, index: idx, argmax: x1, refined, height: y1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub entries: Vec<PeakEntry>,
    /// `(field a, field b, |row a - row b|)` for every pair.
    pub pairwise: Vec<(String, String, usize)>,
    pub max_separation_steps: usize,
    pub lock_tolerance_steps: usize,
}

impl PeakReport {
    pub fn locked(&self) -> bool {
        self.max_separation_steps <= self.lock_tolerance_steps
    }
}

/// The columns whose peaks are compared: K, the three Shannon-type
/// entropies, their uncertainty sum and each Renyi order.
pub fn default_lock_fields(alphas: &[f64]) -> Vec<Field> {
    let mut f = vec![Field::Petermann, Field::SFolded, Field::SUnfolded, Field::SValue, Field::UncertaintySum];
    f.extend(alphas.iter().map(|a| Field::Renyi(*a)));
    f
}

pub fn locking_report(records: &[SweepRecord], fields: &[Field], mode: usize) -> Result<PeakReport, SweepError> {
    if fields.is_empty() {
        return Err(SweepError::InvalidConfig("no fields requested".into()));
    }
    let entries = fields.iter().map(|f| detect_peaks(records, *f, mode)).collect::<Result<Vec<_>, _>>()?;
    let mut pairwise = Vec::new();
    let mut max_sep = 0;
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let d = entries[i].index.abs_diff(entries[j].index);
            max_sep = max_sep.max(d);
            pairwise.push((entries[i].field.clone(), entries[j].field.clone(), d));
        }
    }
    Ok(PeakReport { entries, pairwise, max_separation_steps: max_sep, lock_tolerance_steps: 1 })
}
