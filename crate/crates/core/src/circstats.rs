//! Intensity-weighted circular statistics of a mode's phase field.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::linalg::C64;
use crate::models::{Mode, Support};

/// Relative intensity below which a sample counts as a node.
pub const DEFAULT_NODE_CUTOFF: f64 = 1e-12;

/// `|Z_2|` below which the doubled-angle mean direction is undefined.
pub const DEGENERATE_Z2: f64 = 1e-12;

/// `cos` evaluated at the double nearest to `pi/2` is about 6e-17, not 0.
const COS_ZERO: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircError {
    #[error("no samples survive the node cutoff")]
    EmptySet,
    #[error("doubled-angle resultant vanishes (|Z2| = {z2_abs:e}); alignment undefined")]
    DegenerateAlignment { z2_abs: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Maps any real angle into `[0, 2 pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `(atan2(im, re) + 2 pi) mod 2 pi`.
pub fn principal_phase(z: C64) -> f64 {
    let r = (z.im.atan2(z.re) + TAU) % TAU;
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Phases in `[0, 2 pi)` with non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPhaseSet {
    phases: Vec<f64>,
    weights: Vec<f64>,
    /// Position of each retained sample in the source mode.
    indices: Vec<usize>,
    total_weight: f64,
}

impl WeightedPhaseSet {
    pub fn new(phases: Vec<f64>, weights: Vec<f64>) -> Result<Self, CircError> {
        if phases.len() != weights.len() {
            return Err(CircError::InvalidArgument("phase and weight counts differ".into()));
        }
        if phases.is_empty() {
            return Err(CircError::EmptySet);
        }
        if phases.iter().any(|p| !(0.0..TAU).contains(p)) {
            return Err(CircError::InvalidArgument("phases must lie in [0, 2pi)".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(CircError::InvalidArgument("weights must be finite and non-negative".into()));
        }
        let total_weight: f64 = weights.iter().sum();
        if !(total_weight > 0.0) {
            return Err(CircError::EmptySet);
        }
        let indices = (0..phases.len()).collect();
        Ok(Self { phases, weights, indices, total_weight })
    }

    /// Phases and intensities of complex amplitudes, dropping nodes.
    pub fn from_values(values: &[C64], node_cutoff: f64) -> Result<Self, CircError> {
        if !(0.0..1.0).contains(&node_cutoff) {
            return Err(CircError::InvalidArgument("node cutoff must lie in [0, 1)".into()));
        }
        let max_w = values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let floor = node_cutoff * max_w;
        let mut phases = Vec::with_capacity(values.len());
        let mut weights = Vec::with_capacity(values.len());
        let mut indices = Vec::with_capacity(values.len());
        for (i, z) in values.iter().enumerate() {
            let w = z.norm_sqr();
            if w > floor && w > 0.0 {
                phases.push(principal_phase(*z));
                weights.push(w);
                indices.push(i);
            }
        }
        if phases.is_empty() {
            return Err(CircError::EmptySet);
        }
        let total_weight = weights.iter().sum();
        Ok(Self { phases, weights, indices, total_weight })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Every phase shifted by `alpha`, wrapped back to `[0, 2 pi)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let mut s = self.clone();
        for p in s.phases.iter_mut() {
            *p = wrap_angle(*p + alpha);
        }
        s
    }
}

pub fn extract_phases(m: &Mode, node_cutoff: f64) -> Result<WeightedPhaseSet, CircError> {
    WeightedPhaseSet::from_values(m.values.as_slice(), node_cutoff)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resultant {
    pub k: u32,
    /// `sum w e^{ik phi} / sum w`.
    pub z: C64,
    /// `|z|`.
    pub r: f64,
    /// `arg z`.
    pub mu: f64,
}

/// Weighted mean resultant of order `k`, summed in index order.
pub fn resultant(s: &WeightedPhaseSet, k: u32) -> Resultant {
    assert!(k >= 1, "resultant order must be at least 1");
    let kf = k as f64;
    let mut z = C64::default();
    for (p, w) in s.phases.iter().zip(&s.weights) {
        z += C64::from_polar(*w, kf * p);
    }
    let z = z / s.total_weight;
    Resultant { k, z, r: z.norm().min(1.0), mu: z.arg() }
}

/// Doubled angles rotated so that their weighted mean direction sits at the
/// centre of bin 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedAngles {
    pub theta: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_bins: usize,
    /// Offset removed from the doubled angles (`arg Z_2`, or 0 on fallback).
    pub mu2: f64,
    /// Set when `|Z_2|` was too small to define `mu2`.
    pub degenerate: bool,
}

impl AlignedAngles {
    pub fn bin_width(&self) -> f64 {
        TAU / self.n_bins as f64
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn doubled(s: &WeightedPhaseSet, n_bins: usize) -> Result<(Vec<f64>, C64), CircError> {
    if n_bins < 2 {
        return Err(CircError::InvalidArgument("need at least 2 bins".into()));
    }
    let theta: Vec<f64> = s.phases.iter().map(|p| wrap_angle(2.0 * p)).collect();
    let mut z = C64::default();
    for (t, w) in theta.iter().zip(&s.weights) {
        z += C64::from_polar(*w, *t);
    }
    Ok((theta, z / s.total_weight))
}

fn shift_all(theta: Vec<f64>, offset: f64) -> Vec<f64> {
    theta.into_iter().map(|t| wrap_angle(t + offset)).collect()
}

/// `theta_j = (2 phi_j - mu2 + Delta/2) mod 2 pi`.
pub fn doubled_align(s: &WeightedPhaseSet, n_bins: usize) -> Result<AlignedAngles, CircError> {
    let (theta, z2) = doubled(s, n_bins)?;
    if z2.norm() < DEGENERATE_Z2 {
        return Err(CircError::DegenerateAlignment { z2_abs: z2.norm() });
    }
    let mu2 = z2.arg();
    let half = 0.5 * TAU / n_bins as f64;
    Ok(AlignedAngles {
        theta: shift_all(theta, -mu2 + half),
        weights: s.weights.clone(),
        n_bins,
        mu2,
        degenerate: false,
    })
}

/// Like [`doubled_align`] but falls back to a zero offset, setting the
/// `degenerate` flag, when the alignment is undefined.
pub fn doubled_align_or_fallback(s: &WeightedPhaseSet, n_bins: usize) -> Result<AlignedAngles, CircError> {
    match doubled_align(s, n_bins) {
        Err(CircError::DegenerateAlignment { .. }) => {
            let (theta, _) = doubled(s, n_bins)?;
            let half = 0.5 * TAU / n_bins as f64;
            Ok(AlignedAngles {
                theta: shift_all(theta, half),
                weights: s.weights.clone(),
                n_bins,
                mu2: 0.0,
                degenerate: true,
            })
        }
        other => other,
    }
}

/// `|W+ - W-| / (W+ + W-)` with `W+-` the weight on each side of the
/// imaginary axis; samples on the axis are left out.
pub fn lobe_imbalance(s: &WeightedPhaseSet) -> Result<f64, CircError> {
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (p, w) in s.phases.iter().zip(&s.weights) {
        let c = p.cos();
        if c > COS_ZERO {
            plus += w;
        } else if c < -COS_ZERO {
            minus += w;
        }
    }
    if plus + minus == 0.0 {
        return Err(CircError::EmptySet);
    }
    Ok((plus - minus).abs() / (plus + minus))
}

/// Multiplies the amplitudes by `e^{-i mu2 / 2}` with `mu2 = arg sum psi^2`,
/// making globally real modes real up to rounding.
pub fn gauge_fix(values: &[C64]) -> Vec<C64> {
    let s: C64 = values.iter().map(|z| z * z).sum();
    if s.norm() == 0.0 {
        return values.to_vec();
    }
    let rot = C64::from_polar(1.0, -0.5 * s.arg());
    values.iter().map(|z| z * rot).collect()
}

/// Probability current `Im(conj(psi) grad psi)` per interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub jx: Vec<f64>,
    pub jy: Vec<f64>,
}

impl CurrentField {
    pub fn max_norm(&self) -> f64 {
        self.jx.iter().zip(&self.jy).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max)
    }
}

/// Central differences in the interior, one-sided next to the mask edge.
pub fn current_field(m: &Mode) -> Result<CurrentField, CircError> {
    let g = match &m.support {
        Support::Grid(g) => g,
        Support::TwoLevel => return Err(CircError::InvalidArgument("current needs a grid mode".into())),
    };
    let psi = m.values.as_slice();
    let h = g.h;
    let n = g.n_interior();
    let mut jx = vec![0.0; n];
    let mut jy = vec![0.0; n];
    let lookup = |i: usize, j: usize, di: isize, dj: isize| {
        let ni = i as isize + di;
        let nj = j as isize + dj;
        if ni < 0 || nj < 0 {
            None
        } else {
            g.index_of(ni as usize, nj as usize)
        }
    };
    let derivative = |p: usize, lo: Option<usize>, hi: Option<usize>| match (lo, hi) {
        (Some(a), Some(b)) => (psi[b] - psi[a]) / (2.0 * h),
        (None, Some(b)) => (psi[b] - psi[p]) / h,
        (Some(a), None) => (psi[p] - psi[a]) / h,
        (None, None) => C64::default(),
    };
    for (p, &(i, j)) in g.points.iter().enumerate() {
        let dx = derivative(p, lookup(i, j, -1, 0), lookup(i, j, 1, 0));
        let dy = derivative(p, lookup(i, j, 0, -1), lookup(i, j, 0, 1));
        jx[p] = (psi[p].conj() * dx).im;
        jy[p] = (psi[p].conj() * dy).im;
    }
    Ok(CurrentField { jx, jy })
}
