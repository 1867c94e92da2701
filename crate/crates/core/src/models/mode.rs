use std::sync::Arc;

use super::GridGeometry;
use crate::linalg::{ComplexVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    TwoLevel,
    CavityClosed,
    CavityOpen,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::TwoLevel => "two_level",
            Provenance::CavityClosed => "cavity_closed",
            Provenance::CavityOpen => "cavity_open",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "two_level" => Some(Provenance::TwoLevel),
            "cavity_closed" => Some(Provenance::CavityClosed),
            "cavity_open" => Some(Provenance::CavityOpen),
            _ => None,
        }
    }
}

/// Where the amplitudes live.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Two amplitudes with unit measure each.
    TwoLevel,
    /// One amplitude per interior grid point, each carrying area `h^2`.
    Grid(Arc<GridGeometry>),
}

/// An eigenmode: amplitudes on its support plus the complex eigenvalue
/// (wavenumber for cavities, energy for the two-level model).
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub support: Support,
    pub values: ComplexVector,
    pub eigen_k: C64,
    pub provenance: Provenance,
    /// Set when the solver reported coalesced eigenvalues.
    pub degenerate: bool,
}

impl Mode {
    /// Area element attached to each amplitude.
    pub fn measure(&self) -> f64 {
        match &self.support {
            Support::TwoLevel => 1.0,
            Support::Grid(g) => g.h * g.h,
        }
    }

    pub fn geometry(&self) -> Option<&Arc<GridGeometry>> {
        match &self.support {
            Support::Grid(g) => Some(g),
            Support::TwoLevel => None,
        }
    }

    /// `sum |psi_j|^2 * measure`, equal to 1 for normalized modes.
    pub fn intensity_norm(&self) -> f64 {
        self.values.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() * self.measure()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The same mode multiplied by a global phase `e^{i alpha}`.
    pub fn rotated(&self, alpha: f64) -> Mode {
        let mut m = self.clone();
        m.values = self.values.scale(C64::from_polar(1.0, alpha));
        m
    }
}
