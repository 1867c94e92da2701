//! Entropies of folded and unfolded phase histograms, Fourier-side
//! entropies and the Renyi family.

use std::f64::consts::TAU;

use rustfft::FftPlanner;
use thiserror::Error;

use crate::circstats::{doubled_align_or_fallback, wrap_angle, AlignedAngles, CircError, WeightedPhaseSet};
use crate::linalg::C64;

pub const DEFAULT_BINS: usize = 720;
pub const DEFAULT_K_MAX: usize = 50;
pub const DEFAULT_ALPHAS: [f64; 3] = [1.0, 1.5, 2.0];

/// `ln(pi e)`, the continuous conjugate-variable bound.
pub const LN_PI_E: f64 = 2.144_729_885_849_400_2;

/// `|alpha - 1|` below which the Renyi entropy is taken as Shannon.
const SHANNON_ALPHA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("invalid distribution: {0}")]
    InvalidPmf(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Circ(#[from] CircError),
}

/// Probability mass over `N` equal bins of the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramPMF {
    p: Vec<f64>,
}

impl HistogramPMF {
    /// Accepts non-negative masses summing to 1 within 1e-9 and
    /// renormalizes them exactly.
    pub fn new(p: Vec<f64>) -> Result<Self, EntropyError> {
        if p.len() < 2 {
            return Err(EntropyError::InvalidPmf("need at least 2 bins".into()));
        }
        if p.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(EntropyError::InvalidPmf("masses must be finite and non-negative".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(EntropyError::InvalidPmf(format!("masses sum to {total}")));
        }
        Ok(Self { p: p.into_iter().map(|x| x / total).collect() })
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(w: &[f64]) -> Result<Self, EntropyError> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(EntropyError::InvalidPmf("weights sum to zero".into()));
        }
        Self::new(w.iter().map(|x| x / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self { p: vec![1.0 / n as f64; n] }
    }

    pub fn delta(n: usize, bin: usize) -> Self {
        let mut p = vec![0.0; n];
        p[bin] = 1.0;
        Self { p }
    }

    pub fn n_bins(&self) -> usize {
        self.p.len()
    }

    pub fn bin_width(&self) -> f64 {
        TAU / self.p.len() as f64
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn bin_center(&self, b: usize) -> f64 {
        (b as f64 + 0.5) * self.bin_width()
    }
}

/// Weighted histogram of angles in `[0, 2 pi)`.
pub fn histogram_angles(theta: &[f64], weights: &[f64], n_bins: usize) -> HistogramPMF {
    assert!(n_bins >= 2, "need at least 2 bins");
    let width = TAU / n_bins as f64;
    let mut h = vec![0.0; n_bins];
    for (t, w) in theta.iter().zip(weights) {
        let b = ((t / width).floor() as usize).min(n_bins - 1);
        h[b] += w;
    }
    let total: f64 = weights.iter().sum();
    HistogramPMF { p: h.into_iter().map(|x| x / total).collect() }
}

pub fn histogram(a: &AlignedAngles) -> HistogramPMF {
    histogram_angles(&a.theta, &a.weights, a.n_bins)
}

/// `-sum p ln p` in nats.
pub fn shannon(p: &HistogramPMF) -> f64 {
    -p.p.iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// Discrete entropy shifted by `ln(bin width)`, comparable with
/// differential entropies on the circle.
pub fn differential_entropy(p: &HistogramPMF) -> f64 {
    shannon(p) + p.bin_width().ln()
}

/// Entropy of the doubled, aligned angles, plus whether the alignment fell
/// back to a zero offset.
pub fn folded_entropy(s: &WeightedPhaseSet, n_bins: usize) -> Result<(f64, bool), EntropyError> {
    let a = doubled_align_or_fallback(s, n_bins)?;
    Ok((shannon(&histogram(&a)), a.degenerate))
}

/// Histogram of `phi - mu2/2 + Delta/2` on the full circle.
pub fn unfolded_histogram(s: &WeightedPhaseSet, n_bins: usize) -> Result<(HistogramPMF, bool), EntropyError> {
    let a = doubled_align_or_fallback(s, n_bins)?;
    let shift = -0.5 * a.mu2 + 0.5 * TAU / n_bins as f64;
    let theta: Vec<f64> = s.phases().iter().map(|p| wrap_angle(p + shift)).collect();
    Ok((histogram_angles(&theta, s.weights(), n_bins), a.degenerate))
}

/// Shannon entropy of the unfolded phases; fails when `|Z_2|` vanishes.
pub fn unfolded_entropy(s: &WeightedPhaseSet, n_bins: usize) -> Result<f64, EntropyError> {
    let (h, degenerate) = unfolded_histogram(s, n_bins)?;
    if degenerate {
        let z2 = crate::circstats::resultant(s, 2).r;
        return Err(EntropyError::Circ(CircError::DegenerateAlignment { z2_abs: z2 }));
    }
    Ok(shannon(&h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumSource {
    Sample,
    Binned,
}

impl SpectrumSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumSource::Sample => "sample",
            SpectrumSource::Binned => "binned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sample" => Some(SpectrumSource::Sample),
            "binned" => Some(SpectrumSource::Binned),
            _ => None,
        }
    }
}

/// Coefficients `F_k = int p(theta) e^{-ik theta}` for `k = 0..=K_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    pub coeffs: Vec<C64>,
    pub source: SpectrumSource,
}

impl FourierSpectrum {
    pub fn k_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.norm().min(1.0)).collect()
    }
}

/// Weighted-sample form over the aligned angles.
pub fn fourier_from_samples(a: &AlignedAngles, k_max: usize) -> FourierSpectrum {
    assert!(k_max >= 1, "K_max must be at least 1");
    let total = a.total_weight();
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    for k in 1..=k_max {
        let kf = k as f64;
        let mut z = C64::default();
        for (t, w) in a.theta.iter().zip(&a.weights) {
            z += C64::from_polar(*w, -kf * t);
        }
        coeffs.push(z / total);
    }
    FourierSpectrum { coeffs, source: SpectrumSource::Sample }
}

/// Binned form `sum_b p_b e^{-ik theta_b}` with `theta_b` the bin centres.
pub fn fourier_from_pmf(p: &HistogramPMF, k_max: usize) -> FourierSpectrum {
    assert!(k_max >= 1, "K_max must be at least 1");
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    for k in 1..=k_max {
        let kf = k as f64;
        let mut z = C64::default();
        for (b, pb) in p.p.iter().enumerate() {
            if *pb != 0.0 {
                z += C64::from_polar(*pb, -kf * p.bin_center(b));
            }
        }
        coeffs.push(z);
    }
    FourierSpectrum { coeffs, source: SpectrumSource::Binned }
}

/// `q_k = |F_k| / sum |F_k|` over `k = 0..=K_max`.
pub fn value_space_distribution(f: &FourierSpectrum) -> Vec<f64> {
    let mags = f.magnitudes();
    let total: f64 = mags.iter().sum();
    mags.into_iter().map(|m| m / total).collect()
}

/// Shannon entropy of the normalized coefficient magnitudes.
pub fn value_space_entropy(f: &FourierSpectrum) -> f64 {
    -value_space_distribution(f).into_iter().filter(|q| *q > 0.0).map(|q| q * q.ln()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintySum {
    pub sum: f64,
    /// `sum - ln(pi e)`; reported, never enforced.
    pub bound_gap: f64,
}

pub fn uncertainty_sum(s_phi: f64, s_k: f64) -> UncertaintySum {
    let sum = s_phi + s_k;
    UncertaintySum { sum, bound_gap: sum - LN_PI_E }
}

/// `H_alpha = ln(sum p^alpha) / (1 - alpha)`, Shannon at `alpha = 1`.
pub fn renyi(p: &HistogramPMF, alpha: f64) -> f64 {
    assert!(alpha > 0.0, "Renyi order must be positive");
    if (alpha - 1.0).abs() <= SHANNON_ALPHA_TOL {
        return shannon(p);
    }
    let s: f64 = p.p.iter().filter(|x| **x > 0.0).map(|x| x.powf(alpha)).sum();
    s.ln() / (1.0 - alpha)
}

/// `D_alpha(p || uniform) = ln(sum p^alpha u^{1-alpha}) / (alpha - 1)`,
/// Kullback-Leibler at `alpha = 1`.
pub fn renyi_divergence_uniform(p: &HistogramPMF, alpha: f64) -> f64 {
    assert!(alpha > 0.0, "Renyi order must be positive");
    let n = p.n_bins() as f64;
    let u = 1.0 / n;
    if (alpha - 1.0).abs() <= SHANNON_ALPHA_TOL {
        return p.p.iter().filter(|x| **x > 0.0).map(|x| x * (x / u).ln()).sum();
    }
    let s: f64 = p.p.iter().filter(|x| **x > 0.0).map(|x| x.powf(alpha) * u.powf(1.0 - alpha)).sum();
    s.ln() / (alpha - 1.0)
}

/// Non-DC spectral energy, `N sum p^2 - 1`.
pub fn chi_squared(p: &HistogramPMF) -> f64 {
    let n = p.n_bins() as f64;
    (n * p.p.iter().map(|x| x * x).sum::<f64>() - 1.0).max(0.0)
}

/// `sum_{k=0}^{N-1} |F_k|^2` over the full discrete spectrum of the bins.
pub fn full_spectrum_energy(p: &HistogramPMF) -> f64 {
    let n = p.n_bins();
    let mut buf: Vec<C64> = p.p.iter().map(|x| C64::new(*x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearUniform {
    /// `ln N - N sum delta^2 / 2`.
    pub h1_quadratic: f64,
    /// `||p - u||_2`.
    pub delta_l2: f64,
    /// `N^2 sum delta^3 / 6`.
    pub third_order_term: f64,
}

pub fn near_uniform_expansion(p: &HistogramPMF) -> NearUniform {
    let n = p.n_bins() as f64;
    let u = 1.0 / n;
    let (mut s2, mut s3) = (0.0, 0.0);
    for x in &p.p {
        let d = x - u;
        s2 += d * d;
        s3 += d * d * d;
    }
    NearUniform { h1_quadratic: n.ln() - 0.5 * n * s2, delta_l2: s2.sqrt(), third_order_term: n * n * s3 / 6.0 }
}

/// Settings shared by every entropy evaluation in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyConfig {
    pub n_bins: usize,
    pub k_max: usize,
    pub alphas: Vec<f64>,
    pub spectrum_source: SpectrumSource,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            n_bins: DEFAULT_BINS,
            k_max: DEFAULT_K_MAX,
            alphas: DEFAULT_ALPHAS.to_vec(),
            spectrum_source: SpectrumSource::Sample,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub s_folded: f64,
    pub s_folded_differential: f64,
    pub s_unfolded: f64,
    pub s_value: f64,
    pub uncertainty: UncertaintySum,
    /// `(alpha, H_alpha)` of the folded histogram, in requested order.
    pub renyi: Vec<(f64, f64)>,
    pub chi_squared: f64,
    pub near_uniform: NearUniform,
    /// `mu2` was undefined and a zero offset was used.
    pub degenerate_alignment: bool,
}

/// Every entropy diagnostic of one phase set. The folded histogram feeds
/// the Renyi, chi-squared and expansion figures.
pub fn entropy_report(s: &WeightedPhaseSet, cfg: &EntropyConfig) -> Result<EntropyReport, EntropyError> {
    if cfg.n_bins < 2 {
        return Err(EntropyError::InvalidArgument("n_bins must be at least 2".into()));
    }
    if cfg.k_max < 1 {
        return Err(EntropyError::InvalidArgument("k_max must be at least 1".into()));
    }
    let aligned = doubled_align_or_fallback(s, cfg.n_bins)?;
    let folded = histogram(&aligned);
    let s_folded = shannon(&folded);
    let (unfolded, _) = unfolded_histogram(s, cfg.n_bins)?;
    let spectrum = match cfg.spectrum_source {
        SpectrumSource::Sample => fourier_from_samples(&aligned, cfg.k_max),
        SpectrumSource::Binned => fourier_from_pmf(&folded, cfg.k_max),
    };
    let s_value = value_space_entropy(&spectrum);
    Ok(EntropyReport {
        s_folded,
        s_folded_differential: differential_entropy(&folded),
        s_unfolded: shannon(&unfolded),
        s_value,
        uncertainty: uncertainty_sum(s_folded, s_value),
        renyi: cfg.alphas.iter().map(|&a| (a, renyi(&folded, a))).collect(),
        chi_squared: chi_squared(&folded),
        near_uniform: near_uniform_expansion(&folded),
        degenerate_alignment: aligned.degenerate,
    })
}
