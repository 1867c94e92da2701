//! Phase rigidity, Petermann factor and linewidth enhancement.

use std::fmt;

use crate::circstats::{resultant, WeightedPhaseSet};
use crate::linalg::{ComplexVector, C64};
use crate::models::Mode;

/// Rigidity below which the Petermann factor is reported as infinite.
pub const INFINITE_CUTOFF: f64 = 1e-10;

/// A non-negative quantity that may be flagged as infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    /// The value as an `f64`, with `Infinite` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(x)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

/// `sum psi^2 / sum |psi|^2` of raw amplitudes.
pub fn rigidity_of_values(values: &[C64]) -> C64 {
    let num: C64 = values.iter().map(|z| z * z).sum();
    let den: f64 = values.iter().map(|z| z.norm_sqr()).sum();
    num / den
}

/// Signed rigidity of a mode from a complex-symmetric operator, whose left
/// eigenvector is the transpose of the right one. The grid measure cancels.
pub fn phase_rigidity_cs(m: &Mode) -> C64 {
    rigidity_of_values(m.values.as_slice())
}

/// `|<vL|vR>| / sqrt(<vR|vR> <vL|vL>)`.
pub fn phase_rigidity_biorth(v_r: &ComplexVector, v_l: &ComplexVector) -> f64 {
    let overlap = v_l.dot(v_r).norm();
    let scale = (v_r.norm() * v_l.norm()).max(f64::MIN_POSITIVE);
    (overlap / scale).min(1.0)
}

/// `K = 1 / r^2`, infinite once `r` drops below [`INFINITE_CUTOFF`].
pub fn petermann(r_abs: f64) -> ExtReal {
    if r_abs < INFINITE_CUTOFF {
        ExtReal::Infinite
    } else {
        ExtReal::Finite(1.0 / (r_abs * r_abs))
    }
}

/// Petermann factor from the second circular moment of the phases.
pub fn petermann_from_r2(s: &WeightedPhaseSet) -> ExtReal {
    petermann(resultant(s, 2).r)
}

/// `K * delta_nu_ST`.
pub fn linewidth(k: ExtReal, delta_nu_st: f64) -> ExtReal {
    match k {
        ExtReal::Infinite => ExtReal::Infinite,
        ExtReal::Finite(x) => ExtReal::Finite(x * delta_nu_st),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidityReport {
    pub r_complex: C64,
    pub r_abs: f64,
    pub petermann: ExtReal,
    /// `K * delta_nu_ST` when a reference linewidth was given.
    pub linewidth_factor: Option<ExtReal>,
}

pub fn rigidity_report(m: &Mode, delta_nu_st: Option<f64>) -> RigidityReport {
    let r_complex = phase_rigidity_cs(m);
    let r_abs = r_complex.norm().min(1.0);
    let k = petermann(r_abs);
    RigidityReport { r_complex, r_abs, petermann: k, linewidth_factor: delta_nu_st.map(|d| linewidth(k, d)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexVector;
    use crate::models::{two_level_modes, Provenance, Support, TwoLevelParams};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cv(v: &[C64]) -> ComplexVector {
        ComplexVector::new(v.to_vec()).unwrap()
    }

    fn two_level_mode(v: &[C64]) -> Mode {
        Mode {
            support: Support::TwoLevel,
            values: cv(v),
            eigen_k: c(0.0, 0.0),
            provenance: Provenance::TwoLevel,
            degenerate: false,
        }
    }

    /// `lambda_+` and its eigenvector straight from the quadratic formula.
    fn analytic_plus(delta: f64, g: f64, gamma: f64) -> (C64, [C64; 2]) {
        let i = C64::i();
        let lam = -i * gamma / 2.0 + ((delta - i * gamma / 2.0).powi(2) + g * g).sqrt();
        (lam, [c(g, 0.0), lam - (delta - i * gamma)])
    }

    #[test]
    fn real_mode_rigidity() {
        let r = rigidity_of_values(&[c(0.3, 0.0), c(-1.0, 0.0), c(0.2, 0.0)]);
        assert!((r - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn self_orthogonal_vector() {
        let s = FRAC_1_SQRT_2;
        let m = two_level_mode(&[c(s, 0.0), c(0.0, s)]);
        assert!(phase_rigidity_cs(&m).norm() < 1e-16);
        assert_eq!(rigidity_report(&m, None).petermann, ExtReal::Infinite);
    }

    #[test]
    fn detuned_two_level_rigidity() {
        let (_, v) = analytic_plus(1.0, 1.0, 2.0);
        let r = rigidity_of_values(&v).norm();
        assert!((r - 0.924).abs() < 5e-4);
        let [m, _] = two_level_modes(&TwoLevelParams::new(1.0, 1.0, 2.0)).unwrap();
        assert!((phase_rigidity_cs(&m).norm() - r).abs() < 1e-12);
        let k = petermann(r).to_f64();
        assert!((k - 1.171).abs() < 1e-3);
        let s = WeightedPhaseSet::from_values(m.values.as_slice(), 0.0).unwrap();
        assert!((petermann_from_r2(&s).to_f64() - k).abs() / k < 1e-10);
    }

    #[test]
    fn biorth_examples() {
        let v = cv(&[c(1.0, 0.0), c(0.0, 1.0)]);
        assert!((phase_rigidity_biorth(&v, &v) - 1.0).abs() < 1e-15);
        assert!(phase_rigidity_biorth(&v, &v.conj()) < 1e-16);
        let w = cv(&[c(0.3, 0.1), c(-0.7, 0.4)]);
        let base = phase_rigidity_biorth(&w, &w.conj());
        let scaled = phase_rigidity_biorth(&w, &w.conj().scale(c(7.0, -3.0)));
        assert!((base - scaled).abs() < 1e-12);
    }

    #[test]
    fn petermann_examples() {
        assert_eq!(petermann(1.0), ExtReal::Finite(1.0));
        assert_eq!(petermann(0.0), ExtReal::Infinite);
        assert_eq!(petermann(0.5), ExtReal::Finite(4.0));
        let real = WeightedPhaseSet::new(vec![0.0, std::f64::consts::PI], vec![1.0, 2.0]).unwrap();
        assert!((petermann_from_r2(&real).to_f64() - 1.0).abs() < 1e-15);
        let ep = WeightedPhaseSet::new(vec![0.0, std::f64::consts::FRAC_PI_2], vec![0.5, 0.5]).unwrap();
        assert_eq!(petermann_from_r2(&ep), ExtReal::Infinite);
    }

    #[test]
    fn linewidth_examples() {
        assert_eq!(linewidth(ExtReal::Finite(1.0), 1.0), ExtReal::Finite(1.0));
        assert_eq!(linewidth(ExtReal::Finite(4.0), 0.5), ExtReal::Finite(2.0));
        assert_eq!(linewidth(ExtReal::Infinite, 0.5), ExtReal::Infinite);
        assert_eq!(ExtReal::Infinite.to_string(), "inf");
    }

    #[test]
    fn log_derivative_relation() {
        // d ln K = -2 d ln R2 along a smooth detuning path away from the EP
        let r = |d: f64| rigidity_of_values(&analytic_plus(d, 1.0, 1.0).1).norm();
        let d = 0.6;
        let h = 1e-4;
        let dk = petermann(r(d + h)).to_f64().ln() - petermann(r(d - h)).to_f64().ln();
        let dr = r(d + h).ln() - r(d - h).ln();
        assert!((dk + 2.0 * dr).abs() < 1e-10);
    }

    fn arb_values() -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..64)
            .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
            .prop_filter("nonzero", |v: &Vec<C64>| v.iter().any(|z| z.norm() > 1e-3))
    }

    proptest! {
        #[test]
        fn rigidity_identities(v in arb_values()) {
            let m = two_level_mode(&v);
            let r = phase_rigidity_cs(&m).norm();
            prop_assert!(r <= 1.0 + 1e-15);
            let s = WeightedPhaseSet::from_values(&v, 0.0).unwrap();
            prop_assert!((r - resultant(&s, 2).r).abs() < 1e-12);
            let vv = cv(&v);
            prop_assert!((phase_rigidity_biorth(&vv, &vv.conj()) - r).abs() < 1e-12);
            if let ExtReal::Finite(k) = petermann(r) {
                prop_assert!(k >= 1.0 - 1e-12);
                prop_assert!((k * r * r - 1.0).abs() < 1e-10);
            }
        }
    }
}
