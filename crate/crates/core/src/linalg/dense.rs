use super::{LinalgError, C64};

/// Small dense row-major square matrix, used for projected problems.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::default(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` with
/// `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b == C64::default() {
        return (1.0, C64::default());
    }
    let aa = a.norm();
    if aa == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let r = aa.hypot(b.norm());
    (aa / r, (a / aa) * b.conj() / r)
}

fn reduce_to_hessenberg(h: &mut DenseMatrix, q: &mut DenseMatrix) {
    let n = h.n;
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<C64> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // rows: H <- (I - 2 v v^H) H
        for j in 0..n {
            let s: C64 = (0..len).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..len {
                h[(k + 1 + i, j)] -= 2.0 * v[i] * s;
            }
        }
        // columns: H <- H (I - 2 v v^H), Q likewise
        for m in [&mut *h, &mut *q] {
            for i in 0..n {
                let s: C64 = (0..len).map(|j| m[(i, k + 1 + j)] * v[j]).sum();
                for j in 0..len {
                    m[(i, k + 1 + j)] -= 2.0 * s * v[j].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = C64::default();
        }
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a + d) * 0.5;
    let disc = (((a - d) * 0.5).powi(2) + b * c).sqrt();
    let l1 = half + disc;
    let l2 = half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues and unit-norm right eigenvectors of a general complex matrix,
/// via Hessenberg reduction and shifted QR to Schur form.
pub fn eig_dense(a: &DenseMatrix) -> Result<(Vec<C64>, Vec<Vec<C64>>), LinalgError> {
    let n = a.n;
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut t = a.clone();
    let mut z = DenseMatrix::identity(n);
    reduce_to_hessenberg(&mut t, &mut z);
    let anorm = t.frobenius().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;

    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(n);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if s == 0.0 {
                s = anorm;
            }
            if t[(l, l - 1)].norm() <= eps * s {
                t[(l, l - 1)] = C64::default();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 60 * n.max(10) {
            return Err(LinalgError::NoConvergence {
                max_iter: iter,
                best_residual: t[(hi, hi - 1)].norm(),
            });
        }
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            t[(hi, hi)] + C64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };
        for i in l..=hi {
            t[(i, i)] -= mu;
        }
        rots.clear();
        for k in l..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            for j in k..n {
                let x = t[(k, j)];
                let y = t[(k + 1, j)];
                t[(k, j)] = c * x + s * y;
                t[(k + 1, j)] = -s.conj() * x + c * y;
            }
            t[(k + 1, k)] = C64::default();
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            for i in 0..=k + 1 {
                let x = t[(i, k)];
                let y = t[(i, k + 1)];
                t[(i, k)] = c * x + s.conj() * y;
                t[(i, k + 1)] = -s * x + c * y;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = c * x + s.conj() * y;
                z[(i, k + 1)] = -s * x + c * y;
            }
        }
        for i in l..=hi {
            t[(i, i)] += mu;
        }
    }

    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let small = eps * anorm;
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = values[k];
        let mut y = vec![C64::default(); n];
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            y[i] = -s / d;
        }
        let mut x = z.matvec(&y);
        let nrm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in x.iter_mut() {
            *v /= nrm;
        }
        vectors.push(x);
    }
    Ok((values, vectors))
}

/// Cyclic Jacobi for a real symmetric row-major `n x n` matrix. Returns the
/// eigenvalues and the orthonormal eigenvectors (one `Vec` per eigenvalue).
pub fn jacobi_symmetric(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[i * n + i]).collect();
    let vectors = (0..n).map(|k| (0..n).map(|i| v[i * n + k]).collect()).collect();
    (values, vectors)
}
