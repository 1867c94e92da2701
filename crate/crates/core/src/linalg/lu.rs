use super::{LinalgError, SparseOperator, C64};

/// Relative pivot threshold: a pivot smaller than this times the largest
/// entry of `A - shift I` marks the shift as singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// Banded LU factorization of `A - shift I` with partial pivoting.
///
/// Storage follows the classic band layout: column-major with leading
/// dimension `2 kl + ku + 1`, the extra `kl` rows holding fill-in produced by
/// row interchanges.
#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
    shift: C64,
}

pub fn lu_factor(a: &SparseOperator, shift: C64) -> Result<Factorization, LinalgError> {
    let n = a.dim();
    let (kl, ku) = a.bandwidths();
    let kv = kl + ku;
    let ldab = 2 * kl + ku + 1;
    let mut ab = vec![C64::default(); ldab * n];
    let mut has_diag = vec![false; n];
    let mut scale = 0.0f64;
    for (r, c, v) in a.entries() {
        let v = if r == c {
            has_diag[r] = true;
            v - shift
        } else {
            v
        };
        scale = scale.max(v.norm());
        ab[c * ldab + kv + r - c] = v;
    }
    for (i, present) in has_diag.iter().enumerate() {
        if !present {
            ab[i * ldab + kv] = -shift;
            scale = scale.max(shift.norm());
        }
    }
    let tol = PIVOT_TOL * scale;

    let mut ipiv = vec![0usize; n];
    let mut ju = 0usize;
    for j in 0..n {
        let km = kl.min(n - 1 - j);
        let col = j * ldab;
        let mut jp = 0;
        let mut best = ab[col + kv].norm();
        for r in 1..=km {
            let v = ab[col + kv + r].norm();
            if v > best {
                best = v;
                jp = r;
            }
        }
        ipiv[j] = j + jp;
        if !(best > tol) {
            return Err(LinalgError::SingularShift { shift, column: j, pivot: best });
        }
        ju = ju.max((j + ku + jp).min(n - 1));
        if jp != 0 {
            for c in j..=ju {
                let base = c * ldab + kv - c;
                ab.swap(base + j, base + j + jp);
            }
        }
        if km > 0 {
            let piv = ab[col + kv];
            for r in 1..=km {
                ab[col + kv + r] /= piv;
            }
            for c in j + 1..=ju {
                let base = c * ldab + kv + j - c;
                let t = ab[base];
                if t == C64::default() {
                    continue;
                }
                for r in 1..=km {
                    let l = ab[col + kv + r];
                    ab[base + r] -= l * t;
                }
            }
        }
    }
    Ok(Factorization { n, kl, ku, ldab, ab, ipiv, shift })
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> C64 {
        self.shift
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Solves `(A - shift I) x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n, "solve dimension mismatch");
        let n = self.n;
        let kv = self.kl + self.ku;
        let ldab = self.ldab;
        for j in 0..n {
            let jp = self.ipiv[j];
            if jp != j {
                x.swap(j, jp);
            }
            let xj = x[j];
            if xj == C64::default() {
                continue;
            }
            let km = self.kl.min(n - 1 - j);
            let col = j * ldab + kv;
            for r in 1..=km {
                x[j + r] -= self.ab[col + r] * xj;
            }
        }
        for c in (0..n).rev() {
            let base = c * ldab + kv - c;
            x[c] /= self.ab[base + c];
            let xc = x[c];
            if xc == C64::default() {
                continue;
            }
            let top = c.saturating_sub(kv);
            for (xi, a) in x[top..c].iter_mut().zip(&self.ab[base + top..base + c]) {
                *xi -= a * xc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dense(n: usize, seed: u64) -> SparseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = Vec::new();
        for i in 0..n {
            for j in 0..n {
                e.push((i, j, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
        }
        SparseOperator::from_triplets(n, e, false).unwrap()
    }

    fn residual(a: &SparseOperator, shift: C64, x: &[C64], b: &[C64]) -> f64 {
        let ax = a.matvec(x);
        ax.iter()
            .zip(x)
            .zip(b)
            .map(|((ax, x), b)| (ax - shift * x - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn dense_random_solve() {
        let a = random_dense(50, 7);
        let shift = C64::new(0.3, -0.2);
        let f = lu_factor(&a, shift).unwrap();
        let b: Vec<C64> = (0..50).map(|i| C64::new(i as f64, 1.0)).collect();
        let x = f.solve(&b);
        let bn = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(residual(&a, shift, &x, &b) / bn < 1e-12);
    }

    #[test]
    fn tridiagonal_needs_pivoting() {
        // zero diagonal forces row swaps and fill beyond ku
        let n = 40;
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, C64::new(if i % 3 == 0 { 0.0 } else { 2.0 }, 0.0)));
            if i + 1 < n {
                e.push((i, i + 1, C64::new(5.0, 1.0)));
                e.push((i + 1, i, C64::new(-3.0, 0.5)));
            }
        }
        let a = SparseOperator::from_triplets(n, e, false).unwrap();
        let f = lu_factor(&a, C64::default()).unwrap();
        let b: Vec<C64> = (0..n).map(|i| C64::new(1.0, (i % 5) as f64)).collect();
        let x = f.solve(&b);
        assert!(residual(&a, C64::default(), &x, &b) < 1e-11);
    }

    #[test]
    fn shift_on_eigenvalue_is_singular() {
        let a = SparseOperator::diagonal(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
        let err = lu_factor(&a, C64::new(2.0, 0.0)).unwrap_err();
        assert!(matches!(err, LinalgError::SingularShift { column: 1, .. }));
    }

    #[test]
    fn missing_diagonal_gets_shift() {
        let e = vec![(0, 1, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))];
        let a = SparseOperator::from_triplets(2, e, true).unwrap();
        let f = lu_factor(&a, C64::new(0.5, 0.0)).unwrap();
        let x = f.solve(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(residual(&a, C64::new(0.5, 0.0), &x, &[C64::new(1.0, 0.0), C64::default()]) < 1e-14);
    }
}
