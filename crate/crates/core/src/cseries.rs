//! Dense truncated power/Laurent series over complex doubles, for local
//! expansions at critical points. Coefficients are stored ascending from a
//! starting valuation.

use crate::scalar::C64;

#[derive(Clone, Debug)]
pub struct CSeries {
    /// Exponent of the first stored coefficient.
    pub val: i64,
    /// Ascending coefficients c[j] of delta^(val + j).
    pub c: Vec<C64>,
}

impl CSeries {
    pub fn new(val: i64, c: Vec<C64>) -> Self {
        CSeries { val, c }
    }

    pub fn zero(n: usize) -> Self {
        CSeries {
            val: 0,
            c: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn coeff(&self, e: i64) -> C64 {
        let idx = e - self.val;
        if idx < 0 || idx as usize >= self.c.len() {
            C64::new(0.0, 0.0)
        } else {
            self.c[idx as usize]
        }
    }

    /// Drop leading zeros (raising the valuation), within tolerance.
    pub fn normalized(mut self, tol: f64) -> Self {
        while !self.c.is_empty() && self.c[0].norm() <= tol {
            self.c.remove(0);
            self.val += 1;
        }
        self
    }

    pub fn truncate_len(mut self, n: usize) -> Self {
        self.c.truncate(n);
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let val = self.val.min(other.val);
        let hi = (self.val + self.c.len() as i64).max(other.val + other.c.len() as i64);
        let mut c = vec![C64::new(0.0, 0.0); (hi - val) as usize];
        for (j, x) in self.c.iter().enumerate() {
            c[(self.val - val) as usize + j] += x;
        }
        for (j, x) in other.c.iter().enumerate() {
            c[(other.val - val) as usize + j] += x;
        }
        CSeries { val, c }
    }

    pub fn scale(&self, s: C64) -> Self {
        CSeries {
            val: self.val,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }

    /// Product truncated to `n` coefficients.
    pub fn mul(&self, other: &Self, n: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.c.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                if i + j < n {
                    c[i + j] += a * b;
                }
            }
        }
        CSeries {
            val: self.val + other.val,
            c,
        }
    }

    /// Reciprocal truncated to `n` coefficients; the leading coefficient
    /// must be nonzero.
    pub fn recip(&self, n: usize) -> Self {
        let a0 = self.c[0];
        assert!(a0.norm() > 0.0, "series reciprocal needs a unit leading term");
        let inv0 = 1.0 / a0;
        let mut b = vec![C64::new(0.0, 0.0); n];
        b[0] = inv0;
        for j in 1..n {
            let mut acc = C64::new(0.0, 0.0);
            for d in 1..=j {
                let a = if d < self.c.len() {
                    self.c[d]
                } else {
                    C64::new(0.0, 0.0)
                };
                acc += a * b[j - d];
            }
            b[j] = -inv0 * acc;
        }
        CSeries { val: -self.val, c: b }
    }

    /// Square root with the leading coefficient's root given explicitly
    /// (this is where the branch choice enters). Valuation must be even.
    pub fn sqrt_with(&self, lead_root: C64, n: usize) -> Self {
        assert!(self.val % 2 == 0, "odd valuation has no series square root");
        let a0 = self.c[0];
        debug_assert!((lead_root * lead_root - a0).norm() <= 1e-8 * (a0.norm() + 1.0));
        // sqrt(a0 (1 + u)) = lead_root (1 + u)^(1/2)
        let inv0 = 1.0 / a0;
        let m = self.c.len().min(n);
        let u = CSeries::new(
            0,
            (0..n)
                .map(|j| {
                    if j == 0 {
                        C64::new(0.0, 0.0)
                    } else if j < m {
                        self.c[j] * inv0
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect(),
        );
        let half = binom_pow(&u, 0.5, n);
        CSeries {
            val: self.val / 2,
            c: half.c.iter().map(|x| x * lead_root).collect(),
        }
    }

    /// Compose self(g(s)) where g has valuation >= 1, truncated to n
    /// coefficients of the result. Negative powers of g are expanded via
    /// recip.
    pub fn compose(&self, g: &Self, n: usize) -> Self {
        assert!(g.val >= 1, "inner series must vanish at the origin");
        let mut out = CSeries::zero(n);
        out.val = 0;
        // positive and negative powers of g as needed
        let mut gpow = CSeries::new(0, {
            let mut v = vec![C64::new(0.0, 0.0); n];
            v[0] = C64::new(1.0, 0.0);
            v
        });
        // handle nonnegative exponents
        let top = self.val + self.c.len() as i64;
        for e in 0..top.max(0) {
            if e >= self.val {
                let a = self.coeff(e);
                if a.norm() > 0.0 {
                    out = out.add(&gpow.scale(a));
                }
            }
            gpow = gpow.mul(g, n + (2 * g.val.max(1)) as usize * self.c.len());
        }
        // negative exponents via the reciprocal
        if self.val < 0 {
            let ginv = g.recip(n + 2 * self.c.len());
            let mut gnegpow = ginv.clone();
            for e in 1..=(-self.val) {
                let a = self.coeff(-e);
                if a.norm() > 0.0 {
                    out = out.add(&gnegpow.scale(a));
                }
                gnegpow = gnegpow.mul(&ginv, n + 2 * self.c.len());
            }
        }
        out
    }

    /// Even and odd parts in the expansion variable.
    pub fn odd_part(&self) -> Self {
        let mut s = self.clone();
        for j in 0..s.c.len() {
            if (s.val + j as i64) % 2 == 0 {
                s.c[j] = C64::new(0.0, 0.0);
            }
        }
        s
    }
}

/// (1 + u)^alpha for a series u with u(0) = 0, truncated to n coefficients.
pub fn binom_pow(u: &CSeries, alpha: f64, n: usize) -> CSeries {
    assert_eq!(u.val, 0);
    assert!(u.c.is_empty() || u.c[0].norm() == 0.0);
    let mut out = CSeries::zero(n);
    out.c[0] = C64::new(1.0, 0.0);
    let mut upow = out.clone();
    let mut coef = C64::new(1.0, 0.0);
    for j in 1..n {
        upow = upow.mul(u, n);
        coef = coef * C64::new((alpha - (j as f64 - 1.0)) / j as f64, 0.0);
        if upow.c.iter().all(|x| x.norm() == 0.0) {
            break;
        }
        for a in 0..n {
            out.c[a] += coef * upow.c[a];
        }
    }
    out
}

/// Compositional inverse of s(d) = c1 d + c2 d^2 + ... (c1 != 0): returns
/// d(s) with n coefficients. Top-down coefficient pinning as in the exact
/// series inverter.
pub fn reverse(s: &CSeries, n: usize) -> CSeries {
    assert_eq!(s.val, 1, "reversion needs valuation exactly 1");
    let c1 = s.c[0];
    assert!(c1.norm() > 0.0);
    let mut d = CSeries::new(1, vec![C64::new(0.0, 0.0); n]);
    d.c[0] = 1.0 / c1;
    for j in 2..=n {
        // discrepancy of s(d(t)) at order j
        let sd = s.compose(&d, j + 1);
        let err = sd.coeff(j as i64);
        if err.norm() == 0.0 {
            continue;
        }
        // correcting coefficient at order j changes s(d) at order j by c1 * db
        d.c[j - 1] -= err / c1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn recip_and_mul() {
        // 1/(1 - s) = 1 + s + s^2 + ...
        let s = CSeries::new(0, vec![c(1.0), c(-1.0)]);
        let r = s.recip(5);
        for j in 0..5 {
            assert!((r.c[j] - c(1.0)).norm() < 1e-14);
        }
        let p = s.mul(&r, 5);
        assert!((p.c[0] - c(1.0)).norm() < 1e-14);
        for j in 1..5 {
            assert!(p.c[j].norm() < 1e-14);
        }
    }

    #[test]
    fn sqrt_branch() {
        // sqrt(4 + s) with branch -2: (-2)(1 + s/4)^(1/2)
        let s = CSeries::new(0, vec![c(4.0), c(1.0)]);
        let r = s.sqrt_with(c(-2.0), 4);
        assert!((r.c[0] - c(-2.0)).norm() < 1e-14);
        assert!((r.c[1] - c(-0.25)).norm() < 1e-14);
        let sq = r.mul(&r, 4);
        assert!((sq.c[0] - c(4.0)).norm() < 1e-13);
        assert!((sq.c[1] - c(1.0)).norm() < 1e-13);
    }

    #[test]
    fn reversion_roundtrip() {
        // s = d + d^3
        let s = CSeries::new(1, vec![c(1.0), c(0.0), c(1.0)]);
        let d = reverse(&s, 9);
        let back = s.compose(&d, 10);
        assert!((back.coeff(1) - c(1.0)).norm() < 1e-12);
        for e in 2..9 {
            assert!(back.coeff(e).norm() < 1e-11, "order {e}: {:?}", back.coeff(e));
        }
    }
}
