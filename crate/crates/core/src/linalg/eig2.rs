use super::{ComplexVector, C64};

pub type Matrix2 = [[C64; 2]; 2];

/// Closed-form eigen-decomposition of a 2x2 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Eig2x2 {
    /// `lambda_+` then `lambda_-`.
    pub eigenvalues: [C64; 2],
    pub eigenvectors: [ComplexVector; 2],
    pub residual_norms: [f64; 2],
    /// The two eigenvalues coincide to rounding.
    pub degenerate: bool,
}

fn vec2(a: C64, b: C64) -> ComplexVector {
    ComplexVector::from_vec_unchecked(vec![a, b]).normalized().with_phase_convention()
}

pub fn eig2x2(h: &Matrix2) -> Eig2x2 {
    let [[a, b], [c, d]] = *h;
    let half_tr = (a + d) * 0.5;
    let disc = (((a - d) * 0.5).powi(2) + b * c).sqrt();
    let lambdas = [half_tr + disc, half_tr - disc];
    let scale = [a, b, c, d].iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let degenerate = 2.0 * disc.norm() <= 1e-12 * scale;

    let zero = C64::default();
    let one = C64::new(1.0, 0.0);
    let vectors = if b == zero && c == zero {
        if a == d {
            [vec2(one, zero), vec2(zero, one)]
        } else {
            let pick = |l: C64| if (l - a).norm() <= (l - d).norm() { vec2(one, zero) } else { vec2(zero, one) };
            [pick(lambdas[0]), pick(lambdas[1])]
        }
    } else if b.norm() >= c.norm() {
        [vec2(b, lambdas[0] - a), vec2(b, lambdas[1] - a)]
    } else {
        [vec2(lambdas[0] - d, c), vec2(lambdas[1] - d, c)]
    };

    let res = |l: C64, v: &ComplexVector| {
        let x = v.as_slice();
        let r0 = a * x[0] + b * x[1] - l * x[0];
        let r1 = c * x[0] + d * x[1] - l * x[1];
        (r0.norm_sqr() + r1.norm_sqr()).sqrt() / v.norm()
    };
    let residual_norms = [res(lambdas[0], &vectors[0]), res(lambdas[1], &vectors[1])];
    Eig2x2 { eigenvalues: lambdas, eigenvectors: vectors, residual_norms, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_is_degenerate() {
        let e = eig2x2(&[[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(e.degenerate);
        assert_eq!(e.eigenvalues, [c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(e.residual_norms.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn exceptional_point() {
        let e = eig2x2(&[[c(0.0, -2.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
        assert!(e.degenerate);
        for l in e.eigenvalues {
            assert!((l - c(0.0, -1.0)).norm() < 1e-15);
        }
        let v = e.eigenvectors[0].as_slice();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(0.0, s)).norm() < 1e-15);
        assert_eq!(e.eigenvectors[0], e.eigenvectors[1]);
    }

    #[test]
    fn quadratic_root() {
        let e = eig2x2(&[[c(1.0, -2.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]]);
        assert!(!e.degenerate);
        assert!((e.eigenvalues[0] - c(1.27202, -1.78615)).norm() < 1e-5);
        assert!(e.residual_norms.iter().all(|r| *r < 1e-14));
    }

    #[test]
    fn diagonal_distinct() {
        let e = eig2x2(&[[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(3.0, 0.0)]]);
        assert!(!e.degenerate);
        assert!(e.residual_norms.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn lower_coupling_only() {
        let e = eig2x2(&[[c(1.0, 0.0), c(0.0, 0.0)], [c(2.0, 1.0), c(-1.0, 0.0)]]);
        assert!(e.residual_norms.iter().all(|r| *r < 1e-15));
    }
}
