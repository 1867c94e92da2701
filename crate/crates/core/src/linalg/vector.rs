use super::{dotc, dotu, norm2, LinalgError, C64};

/// A finite complex vector (mode amplitudes).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self, LinalgError> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self(entries))
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<C64>) -> Self {
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    /// `<self|other>`, conjugating `self`.
    pub fn dot(&self, other: &ComplexVector) -> C64 {
        dotc(&self.0, &other.0)
    }

    /// `self^T other` without conjugation.
    pub fn bilinear(&self, other: &ComplexVector) -> C64 {
        dotu(&self.0, &other.0)
    }

    pub fn conj(&self) -> ComplexVector {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, factor: C64) -> ComplexVector {
        Self(self.0.iter().map(|z| z * factor).collect())
    }

    /// Unit 2-norm copy. A zero vector is returned unchanged.
    pub fn normalized(&self) -> ComplexVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Self(self.0.iter().map(|z| z / n).collect())
    }

    /// Rotates the global phase so that the largest-modulus entry (first one
    /// on ties) is real and positive.
    pub fn with_phase_convention(self) -> ComplexVector {
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for (i, z) in self.0.iter().enumerate() {
            let a = z.norm();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if best_abs <= 0.0 {
            return self;
        }
        let pivot = self.0[best];
        let rot = pivot.conj() / best_abs;
        let mut out: Vec<C64> = self.0.iter().map(|z| z * rot).collect();
        // remove the rounding residue on the pivot itself
        out[best] = C64::new(best_abs, 0.0);
        Self(out)
    }
}

impl AsRef<[C64]> for ComplexVector {
    fn as_ref(&self) -> &[C64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan() {
        assert!(ComplexVector::new(vec![C64::new(f64::NAN, 0.0)]).is_err());
        assert!(ComplexVector::new(vec![C64::new(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn normalized_has_unit_norm() {
        let v = ComplexVector::new(vec![C64::new(3.0, 1.0), C64::new(-2.0, 0.5), C64::new(0.0, 7.0)])
            .unwrap()
            .normalized();
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_convention_makes_pivot_real() {
        let v = ComplexVector::new(vec![C64::new(0.1, 0.2), C64::new(0.0, -3.0)])
            .unwrap()
            .with_phase_convention();
        assert_eq!(v.as_slice()[1], C64::new(3.0, 0.0));
        // relative phase preserved: original ratio v0/v1
        let ratio = C64::new(0.1, 0.2) / C64::new(0.0, -3.0);
        let got = v.as_slice()[0] / v.as_slice()[1];
        assert!((ratio - got).norm() < 1e-15);
    }

    #[test]
    fn phase_convention_keeps_real_vectors_real() {
        let v = ComplexVector::new(vec![C64::new(0.5, 0.0), C64::new(-2.0, 0.0)])
            .unwrap()
            .with_phase_convention();
        assert!(v.as_slice().iter().all(|z| z.im == 0.0));
        assert_eq!(v.as_slice()[0].re, -0.5);
    }
}
