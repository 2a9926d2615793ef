//! Composite midpoint quadrature with Richardson refinement, on straight
//! segments in the complex plane. Midpoint rules avoid endpoint
//! singularities, which is exactly what the counterterm-subtracted phase
//! integrands need (they are bounded but their derivatives may blow up at a
//! critical value).

use crate::scalar::C64;

/// Integral of f along the straight segment from a to b. The function is
/// sampled at midpoints m_j = a + (j + 1/2) h. Doubling continues until the
/// Richardson error estimate drops below tol or the cap is reached; returns
/// (value, error_estimate).
pub fn midpoint_segment(
    a: C64,
    b: C64,
    tol: f64,
    mut f: impl FnMut(&[C64]) -> Vec<C64>,
) -> (C64, f64) {
    let dz = b - a;
    let mut n = 16usize;
    let mut prev: Option<C64> = None;
    let mut best = C64::new(0.0, 0.0);
    let mut err = f64::INFINITY;
    while n <= 1 << 16 {
        let pts: Vec<C64> = (0..n)
            .map(|j| a + dz * ((j as f64 + 0.5) / n as f64))
            .collect();
        let vals = f(&pts);
        let sum: C64 = vals.iter().sum();
        let cur = dz * (sum / n as f64);
        if let Some(p) = prev {
            // midpoint rule is O(h^2): Richardson gives (4 cur - p)/3
            let extrap = (cur * 4.0 - p) / 3.0;
            err = (extrap - cur).norm();
            best = extrap;
            if err < tol {
                return (best, err);
            }
        } else {
            best = cur;
        }
        prev = Some(cur);
        n *= 2;
    }
    (best, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial() {
        let (v, e) = midpoint_segment(
            C64::new(0.0, 0.0),
            C64::new(1.0, 1.0),
            1e-12,
            |pts| pts.iter().map(|z| z * z).collect(),
        );
        // integral of z^2 from 0 to 1+i is (1+i)^3/3
        let want = C64::new(1.0, 1.0).powu(3) / 3.0;
        assert!((v - want).norm() < 1e-10, "err {e}");
    }

    #[test]
    fn integrates_bounded_sqrt_derivative() {
        // f(x) = sqrt(x) on [0,1]: midpoint avoids the endpoint, converges
        let (v, _) = midpoint_segment(
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            1e-9,
            |pts| pts.iter().map(|z| z.sqrt()).collect(),
        );
        assert!((v - C64::new(2.0 / 3.0, 0.0)).norm() < 1e-6);
    }
}
