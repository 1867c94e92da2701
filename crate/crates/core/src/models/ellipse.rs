/// Euclidean distance from `(x, y)` to the ellipse `x^2/a^2 + y^2/b^2 = 1`.
///
/// Works for points on either side of the curve. The closest point is found
/// by bisection on the Lagrange-multiplier equation, which is monotone in the
/// multiplier and so needs no starting guess.
pub fn distance_to_ellipse(a: f64, b: f64, x: f64, y: f64) -> f64 {
    // reduce to the first quadrant with e0 >= e1 along (y0, y1)
    let (e0, e1, y0, y1) = if a >= b { (a, b, x.abs(), y.abs()) } else { (b, a, y.abs(), x.abs()) };
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1) * (e0 / e1);
            let s = root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            (x0 - y0).hypot(x1 - y1)
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde = numer / denom;
            let x0 = e0 * xde;
            let x1 = e1 * (1.0 - xde * xde).max(0.0).sqrt();
            (x0 - y0).hypot(x1)
        } else {
            (y0 - e0).abs()
        }
    }
}

fn root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let q0 = n0 / (s + r0);
        let q1 = z1 / (s + 1.0);
        let f = q0 * q0 + q1 * q1 - 1.0;
        if f > 0.0 {
            s0 = s;
        } else if f < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}
