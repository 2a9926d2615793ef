//! Complex polynomial roots via the Durand-Kerner simultaneous iteration,
//! with Newton polishing. Deterministic: fixed seed configuration, fixed
//! iteration caps; output ordering is left to callers.

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::scalar::C64;

/// All roots of the polynomial with the given ascending coefficients.
/// The leading coefficient must be nonzero.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let mut c: Vec<C64> = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() > 0.0 {
            break;
        }
        c.pop();
    }
    if c.len() <= 1 {
        return Err(Error::msg("constant polynomial has no roots"));
    }
    let deg = c.len() - 1;
    let lead = c[deg];
    let monic: Vec<C64> = c.iter().map(|a| a / lead).collect();

    // Cauchy-style radius bound
    let radius = 1.0
        + monic[..deg]
            .iter()
            .map(|a| a.norm())
            .fold(0.0, f64::max);

    // seeds on a spiral avoiding real-axis symmetry traps
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..deg)
        .map(|j| seed.powu(j as u32 + 1) * radius / seed.norm().powi(j as i32))
        .collect();

    let eval = |x: C64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in monic.iter().rev() {
            acc = acc * x + a;
        }
        acc
    };

    for _ in 0..800 {
        let mut max_step = 0.0f64;
        for j in 0..deg {
            let mut denom = C64::new(1.0, 0.0);
            for l in 0..deg {
                if l != j {
                    denom *= z[j] - z[l];
                }
            }
            if denom.norm() == 0.0 {
                z[j] += C64::new(1e-8, 1e-8);
                continue;
            }
            let step = eval(z[j]) / denom;
            z[j] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 * radius.max(1.0) {
            break;
        }
    }

    // Newton polish
    let dmonic: Vec<C64> = monic
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| a * C64::new(i as f64, 0.0))
        .collect();
    let deval = |x: C64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in dmonic.iter().rev() {
            acc = acc * x + a;
        }
        acc
    };
    for zj in z.iter_mut() {
        for _ in 0..8 {
            let fp = deval(*zj);
            if fp.norm() == 0.0 {
                break;
            }
            let step = eval(*zj) / fp;
            *zj -= step;
            if step.norm() < 1e-15 * (zj.norm() + 1.0) {
                break;
            }
        }
    }
    Ok(z)
}

/// Roots of a Laurent polynomial in C^*: clears the pole at 0 and solves the
/// resulting ordinary polynomial. Spurious zero roots are dropped.
pub fn laurent_roots(p: &LaurentPoly<C64>) -> Result<Vec<C64>> {
    let lo = p.lo().ok_or_else(|| Error::msg("zero polynomial"))?;
    let hi = p.hi().unwrap();
    let shift = if lo < 0 { -lo } else { 0 };
    let deg = (hi + shift) as usize;
    let mut coeffs = vec![C64::new(0.0, 0.0); deg + 1];
    for (e, c) in p.iter() {
        coeffs[(e + shift) as usize] = *c;
    }
    let roots = poly_roots(&coeffs)?;
    Ok(roots.into_iter().filter(|z| z.norm() > 1e-12).collect())
}

/// Deterministic ordering: by principal argument, then by modulus.
pub fn sort_complex(zs: &mut [C64]) {
    zs.sort_by(|a, b| {
        let (aa, ab) = (a.arg(), b.arg());
        aa.partial_cmp(&ab)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.norm()
                    .partial_cmp(&b.norm())
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots() {
        // x^2 - 3x + 2 = (x-1)(x-2)
        let r = poly_roots(&[C64::new(2.0, 0.0), C64::new(-3.0, 0.0), C64::new(1.0, 0.0)])
            .unwrap();
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] - 1.0).abs() < 1e-12);
        assert!((re[1] - 2.0).abs() < 1e-12);
        assert!(r.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn cube_roots_scaled() {
        // 2x^3 - 1: roots 2^(-1/3) times cube roots of unity
        let r = poly_roots(&[
            C64::new(-1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
        ])
        .unwrap();
        let want = 0.5f64.powf(1.0 / 3.0);
        for z in &r {
            assert!((z.norm() - want).abs() < 1e-12);
            let p = 2.0 * z * z * z - 1.0;
            assert!(p.norm() < 1e-12);
        }
    }

    #[test]
    fn laurent_clearing() {
        // x + 1/x = 0 -> x^2 + 1 = 0 -> +-i
        let p = LaurentPoly::from_terms([(1i64, C64::new(1.0, 0.0)), (-1, C64::new(1.0, 0.0))]);
        let mut r = laurent_roots(&p).unwrap();
        sort_complex(&mut r);
        assert_eq!(r.len(), 2);
        assert!((r[0] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((r[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
    }
}
