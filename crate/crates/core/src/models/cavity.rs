use std::sync::Arc;

use super::{distance_to_ellipse, Mode, ModelError, Provenance, Support};
use crate::linalg::{shift_invert_eigs, ComplexVector, SparseOperator, C64, DEFAULT_MAX_ITER, DEFAULT_TOL};

pub const MIN_INTERIOR_POINTS: usize = 100;

/// Smallest boundary fraction used for cut arms; keeps the diagonal bounded
/// when the curve passes almost through a grid point.
const MIN_ARM_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CavityVariant {
    Closed,
    /// Absorbing strip of width `cap_width` inside the boundary.
    Open { cap_strength: f64, cap_width: f64 },
}

/// Ellipse with semi-axes `R (1 + epsilon)` and `R (1 - epsilon)`, sampled
/// with grid step `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    pub epsilon: f64,
    pub mean_radius: f64,
    pub h: f64,
    pub variant: CavityVariant,
}

impl CavitySpec {
    pub fn closed(epsilon: f64, mean_radius: f64, h: f64) -> Self {
        Self { epsilon, mean_radius, h, variant: CavityVariant::Closed }
    }

    pub fn open(epsilon: f64, mean_radius: f64, h: f64, cap_strength: f64, cap_width: f64) -> Self {
        Self { epsilon, mean_radius, h, variant: CavityVariant::Open { cap_strength, cap_width } }
    }

    /// Same cavity at a different deformation.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    pub fn semi_axes(&self) -> (f64, f64) {
        (self.mean_radius * (1.0 + self.epsilon), self.mean_radius * (1.0 - self.epsilon))
    }

    pub fn cap_strength(&self) -> f64 {
        match self.variant {
            CavityVariant::Closed => 0.0,
            CavityVariant::Open { cap_strength, .. } => cap_strength,
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self.variant {
            CavityVariant::Closed => Provenance::CavityClosed,
            CavityVariant::Open { .. } => Provenance::CavityOpen,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |name, reason: &str| Err(ModelError::InvalidParameter { name, reason: reason.into() });
        if !(0.0..0.5).contains(&self.epsilon) {
            return bad("epsilon", "must lie in [0, 0.5)");
        }
        if !(self.mean_radius > 0.0) || !self.mean_radius.is_finite() {
            return bad("mean_radius", "must be positive");
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return bad("grid_step", "must be positive");
        }
        if let CavityVariant::Open { cap_strength, cap_width } = self.variant {
            if !(cap_strength >= 0.0) || !cap_strength.is_finite() {
                return bad("cap_strength", "must be non-negative");
            }
            if !(cap_width > 0.0) || !cap_width.is_finite() {
                return bad("cap_width", "must be positive");
            }
        }
        Ok(())
    }
}

/// Interior lattice points of the ellipse, in operator order (x outer,
/// y inner), with coordinates and absorber profile.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    pub spec: CavitySpec,
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Interior flag per lattice point, index `i * ny + j`.
    pub mask: Vec<bool>,
    /// Lattice indices `(i, j)` of each interior point.
    pub points: Vec<(usize, usize)>,
    pub coords: Vec<(f64, f64)>,
    /// Absorber weight in `[0, 1]` per interior point.
    pub cap: Vec<f64>,
    index: Vec<usize>,
    half_x: usize,
    half_y: usize,
}

impl GridGeometry {
    pub fn n_interior(&self) -> usize {
        self.points.len()
    }

    /// Interior index of lattice point `(i, j)`.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        let k = self.index[i * self.ny + j];
        (k != usize::MAX).then_some(k)
    }

    /// Lattice coordinates relative to the centre, `(x / h, y / h)`. Grids
    /// with the same step share these keys at coinciding physical points.
    pub fn lattice_key(&self, p: usize) -> (i64, i64) {
        let (i, j) = self.points[p];
        (i as i64 - self.half_x as i64, j as i64 - self.half_y as i64)
    }

    pub fn index_of_key(&self, key: (i64, i64)) -> Option<usize> {
        let i = key.0 + self.half_x as i64;
        let j = key.1 + self.half_y as i64;
        if i < 0 || j < 0 {
            return None;
        }
        self.index_of(i as usize, j as usize)
    }
}

pub fn build_ellipse_grid(spec: &CavitySpec) -> Result<GridGeometry, ModelError> {
    spec.validate()?;
    let (a, b) = spec.semi_axes();
    let h = spec.h;
    let half_x = (a / h).floor() as usize;
    let half_y = (b / h).floor() as usize;
    let nx = 2 * half_x + 1;
    let ny = 2 * half_y + 1;
    let cap_width = match spec.variant {
        CavityVariant::Open { cap_width, .. } => Some(cap_width),
        CavityVariant::Closed => None,
    };

    let mut mask = vec![false; nx * ny];
    let mut index = vec![usize::MAX; nx * ny];
    let mut points = Vec::new();
    let mut coords = Vec::new();
    let mut cap = Vec::new();
    for i in 0..nx {
        let x = (i as f64 - half_x as f64) * h;
        for j in 0..ny {
            let y = (j as f64 - half_y as f64) * h;
            if (x / a).powi(2) + (y / b).powi(2) < 1.0 {
                mask[i * ny + j] = true;
                index[i * ny + j] = points.len();
                points.push((i, j));
                coords.push((x, y));
                let w = match cap_width {
                    Some(d0) => {
                        let d = distance_to_ellipse(a, b, x, y);
                        if d < d0 {
                            ((d0 - d) / d0).powi(2)
                        } else {
                            0.0
                        }
                    }
                    None => 0.0,
                };
                cap.push(w);
            }
        }
    }
    if points.len() < MIN_INTERIOR_POINTS {
        return Err(ModelError::GridTooCoarse { count: points.len(), min: MIN_INTERIOR_POINTS });
    }
    Ok(GridGeometry { spec: *spec, a, b, h, nx, ny, mask, points, coords, cap, index, half_x, half_y })
}

/// Discrete `-laplacian` on the interior points with zero boundary values.
///
/// Arms that cross the curve use the distance to the crossing point: the
/// field is extrapolated linearly to vanish there, which adds `1/(s h^2)` to
/// the diagonal for a cut arm of fractional length `s` and leaves the
/// operator symmetric. The open variant adds `-i eta W` on the diagonal.
pub fn assemble_helmholtz(geom: &GridGeometry, spec: &CavitySpec) -> SparseOperator {
    let h = geom.h;
    let inv_h2 = 1.0 / (h * h);
    let eta = spec.cap_strength();
    let (a, b) = (geom.a, geom.b);
    let mut trip = Vec::with_capacity(5 * geom.n_interior());
    for (p, &(i, j)) in geom.points.iter().enumerate() {
        let (x, y) = geom.coords[p];
        let mut diag = 0.0;
        let arms: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        for (di, dj) in arms {
            let ni = i as isize + di;
            let nj = j as isize + dj;
            let neighbor = if ni >= 0 && nj >= 0 { geom.index_of(ni as usize, nj as usize) } else { None };
            match neighbor {
                Some(q) => {
                    diag += inv_h2;
                    trip.push((p, q, C64::new(-inv_h2, 0.0)));
                }
                None => {
                    let dist = if di != 0 {
                        let xb = a * (1.0 - (y / b).powi(2)).max(0.0).sqrt();
                        xb - di as f64 * x
                    } else {
                        let yb = b * (1.0 - (x / a).powi(2)).max(0.0).sqrt();
                        yb - dj as f64 * y
                    };
                    let s = (dist / h).clamp(MIN_ARM_FRACTION, 1.0);
                    diag += inv_h2 / s;
                }
            }
        }
        let absorb = eta * geom.cap[p];
        let im = if absorb != 0.0 { -absorb } else { 0.0 };
        trip.push((p, p, C64::new(diag, im)));
    }
    SparseOperator::from_triplets(geom.n_interior(), trip, true).expect("grid operator is well formed")
}

/// The `m` modes with `k^2` nearest `k_target^2`, using the default solver
/// tolerance.
pub fn solve_cavity_modes(
    op: &SparseOperator,
    geom: &Arc<GridGeometry>,
    k_target: f64,
    m: usize,
) -> Result<Vec<Mode>, ModelError> {
    solve_cavity_modes_with(op, geom, k_target, m, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn solve_cavity_modes_with(
    op: &SparseOperator,
    geom: &Arc<GridGeometry>,
    k_target: f64,
    m: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<Mode>, ModelError> {
    if !(k_target > 0.0) || !k_target.is_finite() {
        return Err(ModelError::InvalidParameter { name: "k_target", reason: "must be positive".into() });
    }
    if op.dim() != geom.n_interior() {
        return Err(ModelError::InvalidParameter {
            name: "geometry",
            reason: format!("operator has dimension {} but grid has {} points", op.dim(), geom.n_interior()),
        });
    }
    let pairs = shift_invert_eigs(op, C64::new(k_target * k_target, 0.0), m, tol, max_iter)?;
    let scale = 1.0 / geom.h;
    Ok(pairs
        .into_iter()
        .map(|e| Mode {
            support: Support::Grid(Arc::clone(geom)),
            values: ComplexVector::from_vec_unchecked(
                e.eigenvector.as_slice().iter().map(|z| z * scale).collect(),
            ),
            eigen_k: e.eigenvalue.sqrt(),
            provenance: geom.spec.provenance(),
            degenerate: false,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const J0_1: f64 = 2.404_825_557_695_773;
    const J0_2: f64 = 5.520_078_110_286_311;

    fn disc(h: f64) -> (Arc<GridGeometry>, SparseOperator) {
        let spec = CavitySpec::closed(0.0, 1.0, h);
        let g = Arc::new(build_ellipse_grid(&spec).unwrap());
        let op = assemble_helmholtz(&g, &spec);
        (g, op)
    }

    #[test]
    fn disc_point_count() {
        let g = build_ellipse_grid(&CavitySpec::closed(0.0, 1.0, 0.02)).unwrap();
        let expect = PI / 0.02f64.powi(2);
        assert!((g.n_interior() as f64 - expect).abs() / expect < 0.02);
    }

    #[test]
    fn ellipse_point_count() {
        let g = build_ellipse_grid(&CavitySpec::closed(0.16, 1.0, 0.02)).unwrap();
        let expect = PI * 1.16 * 0.84 / 0.02f64.powi(2);
        assert!((g.n_interior() as f64 - expect).abs() / expect < 0.02);
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(matches!(
            build_ellipse_grid(&CavitySpec::closed(0.0, 1.0, 1.0)),
            Err(ModelError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(build_ellipse_grid(&CavitySpec::closed(0.5, 1.0, 0.02)).is_err());
        assert!(build_ellipse_grid(&CavitySpec::closed(0.1, -1.0, 0.02)).is_err());
        assert!(build_ellipse_grid(&CavitySpec::open(0.1, 1.0, 0.02, -1.0, 0.2)).is_err());
        assert!(build_ellipse_grid(&CavitySpec::open(0.1, 1.0, 0.02, 1.0, 0.0)).is_err());
    }

    #[test]
    fn cap_profile_bounds() {
        let spec = CavitySpec::open(0.2, 1.0, 0.02, 1.0, 0.2);
        let g = build_ellipse_grid(&spec).unwrap();
        assert!(g.cap.iter().all(|w| (0.0..=1.0).contains(w)));
        let centre = g.index_of_key((0, 0)).unwrap();
        assert_eq!(g.cap[centre], 0.0);
        assert!(g.cap.iter().any(|w| *w > 0.8));
    }

    #[test]
    fn closed_operator_is_real_symmetric() {
        let spec = CavitySpec::closed(0.17, 1.0, 0.05);
        let g = build_ellipse_grid(&spec).unwrap();
        let op = assemble_helmholtz(&g, &spec);
        assert!(op.is_real());
        assert!(op.is_symmetric());
    }

    #[test]
    fn open_with_zero_strength_equals_closed() {
        let closed = CavitySpec::closed(0.17, 1.0, 0.05);
        let open = CavitySpec::open(0.17, 1.0, 0.05, 0.0, 0.3);
        let a = assemble_helmholtz(&build_ellipse_grid(&closed).unwrap(), &closed);
        let b = assemble_helmholtz(&build_ellipse_grid(&open).unwrap(), &open);
        assert_eq!(a, b);
    }

    #[test]
    fn lowest_disc_mode() {
        let (g, op) = disc(0.02);
        let modes = solve_cavity_modes(&op, &g, 2.4, 1).unwrap();
        let k = modes[0].eigen_k;
        assert!((k.re - J0_1).abs() / J0_1 < 5e-3);
        assert_eq!(k.im, 0.0);
        assert!((modes[0].intensity_norm() - 1.0).abs() < 1e-10);
        assert!(modes[0].values.as_slice().iter().all(|z| z.im == 0.0));
        assert_eq!(modes[0].provenance, Provenance::CavityClosed);
    }

    #[test]
    fn second_radial_disc_mode() {
        let (g, op) = disc(0.02);
        let modes = solve_cavity_modes(&op, &g, 5.52, 1).unwrap();
        assert!((modes[0].eigen_k.re - J0_2).abs() / J0_2 < 5e-3);
    }

    #[test]
    fn open_modes_decay() {
        let spec = CavitySpec::open(0.0, 1.0, 0.04, 2.0, 0.25);
        let g = Arc::new(build_ellipse_grid(&spec).unwrap());
        let op = assemble_helmholtz(&g, &spec);
        let modes = solve_cavity_modes(&op, &g, 4.0, 3).unwrap();
        for m in &modes {
            assert!(m.eigen_k.im < 0.0);
            assert!(m.eigen_k.re > 0.0);
            let v = m.values.as_slice();
            let lambda = m.eigen_k * m.eigen_k;
            let at = op.matvec_transpose(v);
            let r: f64 = at.iter().zip(v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum::<f64>().sqrt();
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(r / n <= 1e-9);
        }
    }

    #[test]
    fn second_order_refinement() {
        let ks: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&h| {
                let (g, op) = disc(h);
                solve_cavity_modes(&op, &g, 2.4, 1).unwrap()[0].eigen_k.re
            })
            .collect();
        let e: Vec<f64> = ks.iter().map(|k| (k - J0_1).abs()).collect();
        assert!(e[0] / e[1] > 3.0 && e[1] / e[2] > 3.0, "errors {e:?}");
    }

    #[test]
    fn lattice_keys_shared_across_deformations() {
        let g1 = build_ellipse_grid(&CavitySpec::closed(0.10, 1.0, 0.05)).unwrap();
        let g2 = build_ellipse_grid(&CavitySpec::closed(0.12, 1.0, 0.05)).unwrap();
        let p = g1.index_of_key((3, -2)).unwrap();
        let q = g2.index_of_key((3, -2)).unwrap();
        assert_eq!(g1.coords[p], g2.coords[q]);
    }
}
