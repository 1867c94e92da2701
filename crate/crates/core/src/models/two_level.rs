use super::{Mode, ModelError, Provenance, Support};
use crate::linalg::{eig2x2, Matrix2, C64};

/// Detuning `delta`, coupling `g` and loss `gamma` on level 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    pub delta: f64,
    pub g: f64,
    pub gamma: f64,
}

impl TwoLevelParams {
    pub fn new(delta: f64, g: f64, gamma: f64) -> Self {
        Self { delta, g, gamma }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.g > 0.0) || !self.g.is_finite() {
            return Err(ModelError::InvalidParameter { name: "g", reason: "must be positive".into() });
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(ModelError::InvalidParameter { name: "gamma", reason: "must be non-negative".into() });
        }
        if !self.delta.is_finite() {
            return Err(ModelError::InvalidParameter { name: "delta", reason: "must be finite".into() });
        }
        Ok(())
    }
}

/// `[[delta - i gamma, g], [g, -delta]]`.
pub fn two_level_hamiltonian(p: &TwoLevelParams) -> Matrix2 {
    let g = C64::new(p.g, 0.0);
    [[C64::new(p.delta, -p.gamma), g], [g, C64::new(-p.delta, 0.0)]]
}

/// Both eigenmodes, `lambda_+` first. Amplitudes are unit-norm and the
/// eigenvalue is stored as the complex energy.
pub fn two_level_modes(p: &TwoLevelParams) -> Result<[Mode; 2], ModelError> {
    p.validate()?;
    let e = eig2x2(&two_level_hamiltonian(p));
    let [v0, v1] = e.eigenvectors;
    let mk = |v, l| Mode {
        support: Support::TwoLevel,
        values: v,
        eigen_k: l,
        provenance: Provenance::TwoLevel,
        degenerate: e.degenerate,
    };
    Ok([mk(v0, e.eigenvalues[0]), mk(v1, e.eigenvalues[1])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_limit() {
        let h = two_level_hamiltonian(&TwoLevelParams::new(0.0, 1.0, 0.0));
        assert_eq!(h, [[C64::new(0.0, 0.0), C64::new(1.0, 0.0)], [C64::new(1.0, 0.0), C64::new(-0.0, 0.0)]]);
        let e = eig2x2(&h);
        assert_eq!(e.eigenvalues, [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
    }

    #[test]
    fn exceptional_point_coalesces() {
        let [m0, m1] = two_level_modes(&TwoLevelParams::new(0.0, 1.0, 2.0)).unwrap();
        assert!(m0.degenerate);
        assert!((m0.eigen_k - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((m1.eigen_k - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn detuned_root() {
        let [m0, _] = two_level_modes(&TwoLevelParams::new(1.0, 1.0, 2.0)).unwrap();
        assert!((m0.eigen_k - C64::new(1.27202, -1.78615)).norm() < 1e-5);
        assert!((m0.intensity_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_coupling() {
        assert!(two_level_modes(&TwoLevelParams::new(0.0, 0.0, 1.0)).is_err());
    }
}
