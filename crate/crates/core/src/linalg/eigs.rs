use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    dotc, eig_dense, jacobi_symmetric, lu_factor, norm2, ComplexVector, DenseMatrix, LinalgError,
    SparseOperator, C64,
};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;

const START_SEED: u64 = 0x5e_ed0f_e16e;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: C64,
    pub eigenvector: ComplexVector,
    /// `||A v - lambda v|| / ||v||`.
    pub residual_norm: f64,
    /// Tolerance the residual was required to meet.
    pub tolerance: f64,
}

impl EigenPair {
    pub(crate) fn new(a: &SparseOperator, eigenvalue: C64, v: ComplexVector, tolerance: f64) -> Self {
        let residual_norm = residual(a, eigenvalue, v.as_slice());
        Self { eigenvalue, eigenvector: v, residual_norm, tolerance }
    }
}

fn residual(a: &SparseOperator, lambda: C64, v: &[C64]) -> f64 {
    let av = a.matvec(v);
    let r: f64 = av.iter().zip(v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum::<f64>().sqrt();
    r / norm2(v)
}

/// Orthonormalizes `basis` in place with twice-applied modified Gram-Schmidt.
/// Columns that collapse are replaced by fresh random directions.
fn orthonormalize(basis: &mut [Vec<C64>], rng: &mut ChaCha8Rng) {
    for k in 0..basis.len() {
        let mut attempts = 0;
        loop {
            let before = norm2(&basis[k]);
            for _ in 0..2 {
                for j in 0..k {
                    let (done, rest) = basis.split_at_mut(k);
                    let proj = dotc(&done[j], &rest[0]);
                    for (x, q) in rest[0].iter_mut().zip(&done[j]) {
                        *x -= proj * q;
                    }
                }
            }
            let after = norm2(&basis[k]);
            if after > 1e-10 * before && after > 0.0 {
                for x in basis[k].iter_mut() {
                    *x /= after;
                }
                break;
            }
            attempts += 1;
            assert!(attempts < 10, "cannot extend orthonormal basis");
            for x in basis[k].iter_mut() {
                *x = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            }
        }
    }
}

/// The `m` eigenpairs of `a` closest to `shift`, by block shift-invert
/// subspace iteration with Rayleigh-Ritz extraction.
///
/// Real symmetric problems with a real shift stay in real arithmetic, so the
/// returned eigenvectors have exactly zero imaginary parts.
pub fn shift_invert_eigs(
    a: &SparseOperator,
    shift: C64,
    m: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<EigenPair>, LinalgError> {
    let n = a.dim();
    if m == 0 || m > n {
        return Err(LinalgError::InvalidArgument(format!("requested {m} eigenpairs of a {n}x{n} operator")));
    }
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidArgument("tolerance must be positive".into()));
    }
    let fac = lu_factor(a, shift)?;
    let real_path = a.is_real() && a.is_symmetric() && shift.im == 0.0;
    let p = n.min(2 * m + 6);

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut basis: Vec<Vec<C64>> = (0..p)
        .map(|_| (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect())
        .collect();
    orthonormalize(&mut basis, &mut rng);

    let mut best = f64::INFINITY;
    for _ in 0..max_iter.max(1) {
        for v in basis.iter_mut() {
            fac.solve_in_place(v);
        }
        orthonormalize(&mut basis, &mut rng);
        let images: Vec<Vec<C64>> = basis.iter().map(|q| a.matvec(q)).collect();

        let (theta, coeffs) = rayleigh_ritz(&basis, &images, real_path)?;
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| {
            (theta[i] - shift)
                .norm()
                .partial_cmp(&(theta[j] - shift).norm())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });

        let mut ritz = Vec::with_capacity(p);
        let mut worst = 0.0f64;
        for (rank, &k) in order.iter().enumerate() {
            let y = &coeffs[k];
            let mut x = vec![C64::default(); n];
            let mut ax = vec![C64::default(); n];
            for (j, yj) in y.iter().enumerate() {
                if *yj == C64::default() {
                    continue;
                }
                for ((xi, axi), (qi, aqi)) in x.iter_mut().zip(ax.iter_mut()).zip(basis[j].iter().zip(&images[j])) {
                    *xi += yj * qi;
                    *axi += yj * aqi;
                }
            }
            if rank < m {
                let r: f64 = ax.iter().zip(&x).map(|(u, v)| (u - theta[k] * v).norm_sqr()).sum::<f64>().sqrt();
                worst = worst.max(r / norm2(&x));
            }
            ritz.push(x);
        }
        best = best.min(worst);
        if worst <= tol {
            let mut out = Vec::with_capacity(m);
            for (rank, x) in ritz.into_iter().take(m).enumerate() {
                let v = ComplexVector::from_vec_unchecked(x).normalized().with_phase_convention();
                out.push(EigenPair::new(a, theta[order[rank]], v, tol));
            }
            if out.iter().all(|e| e.residual_norm <= tol) {
                return Ok(out);
            }
            best = best.min(out.iter().map(|e| e.residual_norm).fold(0.0, f64::max));
            basis = out.into_iter().map(|e| e.eigenvector.into_inner()).collect();
            basis.extend((m..p).map(|_| (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect()));
            orthonormalize(&mut basis, &mut rng);
            continue;
        }
        basis = ritz;
        orthonormalize(&mut basis, &mut rng);
    }
    Err(LinalgError::NoConvergence { max_iter, best_residual: best })
}

/// Eigen-decomposition of the projected matrix `Q^H A Q`.
fn rayleigh_ritz(
    basis: &[Vec<C64>],
    images: &[Vec<C64>],
    real_path: bool,
) -> Result<(Vec<C64>, Vec<Vec<C64>>), LinalgError> {
    let p = basis.len();
    if real_path {
        let mut b = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                b[i * p + j] = dotc(&basis[i], &images[j]).re;
            }
        }
        for i in 0..p {
            for j in i + 1..p {
                let s = 0.5 * (b[i * p + j] + b[j * p + i]);
                b[i * p + j] = s;
                b[j * p + i] = s;
            }
        }
        let (vals, vecs) = jacobi_symmetric(&b, p);
        let theta = vals.into_iter().map(|v| C64::new(v, 0.0)).collect();
        let coeffs = vecs.into_iter().map(|v| v.into_iter().map(|x| C64::new(x, 0.0)).collect()).collect();
        Ok((theta, coeffs))
    } else {
        let mut b = DenseMatrix::zeros(p);
        for i in 0..p {
            for j in 0..p {
                b[(i, j)] = dotc(&basis[i], &images[j]);
            }
        }
        eig_dense(&b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn diagonal_nearest_first() {
        let a = SparseOperator::diagonal(&[c(1.0), c(2.0), c(10.0)]);
        let e = shift_invert_eigs(&a, c(1.6), 2, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((e[0].eigenvalue - c(2.0)).norm() < 1e-12);
        assert!((e[1].eigenvalue - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn two_level_root() {
        let h = [[C64::new(1.0, -2.0), c(1.0)], [c(1.0), c(-1.0)]];
        let trip = vec![(0, 0, h[0][0]), (0, 1, h[0][1]), (1, 0, h[1][0]), (1, 1, h[1][1])];
        let a = SparseOperator::from_triplets(2, trip, true).unwrap();
        let shift = C64::new(1.0, -2.0);
        let e = shift_invert_eigs(&a, shift, 1, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let i = C64::i();
        let root = |s: f64| -i + s * ((c(1.0) - i).powi(2) + c(1.0)).sqrt();
        let (r1, r2) = (root(1.0), root(-1.0));
        let expect = if (r1 - shift).norm() < (r2 - shift).norm() { r1 } else { r2 };
        assert!((e[0].eigenvalue - expect).norm() < 1e-10);
    }

    #[test]
    fn dirichlet_laplacian_fundamental() {
        let h = 0.01;
        let n = 99;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, c(2.0 / (h * h))));
            if i + 1 < n {
                trip.push((i, i + 1, c(-1.0 / (h * h))));
                trip.push((i + 1, i, c(-1.0 / (h * h))));
            }
        }
        let a = SparseOperator::from_triplets(n, trip, true).unwrap();
        let e = shift_invert_eigs(&a, c(9.0), 1, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let exact = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
        assert!((e[0].eigenvalue - c(exact)).norm() < 1e-10);
        assert!(e[0].eigenvector.as_slice().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn invalid_count() {
        let a = SparseOperator::identity(3);
        assert!(matches!(shift_invert_eigs(&a, c(0.5), 4, 1e-10, 10), Err(LinalgError::InvalidArgument(_))));
        assert!(matches!(shift_invert_eigs(&a, c(0.5), 0, 1e-10, 10), Err(LinalgError::InvalidArgument(_))));
    }

    #[test]
    fn singular_shift_propagates() {
        let a = SparseOperator::diagonal(&[c(1.0), c(2.0), c(3.0)]);
        assert!(matches!(
            shift_invert_eigs(&a, c(3.0), 1, 1e-10, 10),
            Err(LinalgError::SingularShift { .. })
        ));
    }

    #[test]
    fn impossible_tolerance_reports_best_residual() {
        let n = 30;
        let trip: Vec<_> = (0..n)
            .flat_map(|i| {
                let mut v = vec![(i, i, C64::new(i as f64, -0.1 * i as f64))];
                if i + 1 < n {
                    v.push((i, i + 1, c(0.7)));
                    v.push((i + 1, i, c(0.7)));
                }
                v
            })
            .collect();
        let a = SparseOperator::from_triplets(n, trip, true).unwrap();
        match shift_invert_eigs(&a, C64::new(10.3, 0.0), 3, 1e-30, 5) {
            Err(LinalgError::NoConvergence { max_iter, best_residual }) => {
                assert_eq!(max_iter, 5);
                assert!(best_residual.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
