//! Laurent polynomials in one variable x over a coefficient field.
//!
//! These carry the mirror data: the superpotential f, its partial
//! derivatives, and the Jacobian-ring arithmetic built on top of them.
//! The volume form is always omega = dx/x, so residues of `g * omega` reduce
//! to reading off the x^0 coefficient of g.

use crate::scalar::{Field, Tol};
use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Debug)]
pub struct LaurentPoly<S> {
    terms: BTreeMap<i64, S>,
}

impl<S: Field> Default for LaurentPoly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Field> LaurentPoly<S> {
    pub fn zero() -> Self {
        LaurentPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(0, c)
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn monomial(exp: i64, c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, S)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: i64, c: S) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(S::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn coeff(&self, exp: i64) -> S {
        self.terms.get(&exp).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent in the support.
    pub fn lo(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Highest exponent in the support.
    pub fn hi(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &S)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.iter() {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.iter() {
            out.add_term(e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        self.map(|c| c.clone() * s.clone())
    }

    pub fn map(&self, mut f: impl FnMut(&S) -> S) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.iter() {
            out.add_term(e, f(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in self.iter() {
            for (e2, c2) in other.iter() {
                out.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn mul_xpow(&self, shift: i64) -> Self {
        Self::from_terms(self.iter().map(|(e, c)| (e + shift, c.clone())))
    }

    /// d/dx.
    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.iter()
                .map(|(e, c)| (e - 1, c.clone() * S::from_i64(e))),
        )
    }

    /// x d/dx, the derivative adapted to omega = dx/x.
    pub fn x_d_dx(&self) -> Self {
        Self::from_terms(self.iter().map(|(e, c)| (e, c.clone() * S::from_i64(e))))
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero();
        for (e, c) in self.iter() {
            acc = acc + c.clone() * int_pow(x, e);
        }
        acc
    }

    /// Taylor coefficients of self(x0 + d) in d, up to order `n` inclusive.
    /// Requires x0 invertible when negative exponents are present.
    pub fn taylor_at(&self, x0: &S, n: usize) -> Vec<S> {
        let mut out = vec![S::zero(); n + 1];
        for (e, c) in self.iter() {
            // (x0 + d)^e expanded to order n
            let pows = binomial_shift_pows(x0, e, n);
            for (j, p) in pows.into_iter().enumerate() {
                out[j] = out[j].clone() + c.clone() * p;
            }
        }
        out
    }

    /// Remove float-mode noise below tolerance. No-op for exact scalars.
    pub fn prune(&self, tol: Tol) -> Self {
        if S::EXACT {
            return self.clone();
        }
        Self::from_terms(
            self.iter()
                .filter(|(_, c)| !c.is_small(tol))
                .map(|(e, c)| (e, c.clone())),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().map(|(_, c)| c.abs2().sqrt()).fold(0.0, f64::max)
    }
}

/// x^e for signed e.
pub fn int_pow<S: Field>(x: &S, e: i64) -> S {
    if e == 0 {
        return S::one();
    }
    let (mut base, mut n) = if e < 0 {
        (x.inv(), (-e) as u64)
    } else {
        (x.clone(), e as u64)
    };
    let mut acc = S::one();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        n >>= 1;
    }
    acc
}

/// Coefficients of (x0 + d)^e in d up to order n, for signed e.
fn binomial_shift_pows<S: Field>(x0: &S, e: i64, n: usize) -> Vec<S> {
    // (x0+d)^e = x0^e * (1 + d/x0)^e, generalized binomial series.
    let x0e = int_pow(x0, e);
    let x0inv = x0.inv();
    let mut out = Vec::with_capacity(n + 1);
    let mut c = x0e;
    for j in 0..=n {
        out.push(c.clone());
        // next coefficient: c * (e - j)/(j+1) / x0
        let factor =
            S::from_i64(e - j as i64) * S::from_i64(j as i64 + 1).inv() * x0inv.clone();
        c = c * factor;
    }
    out
}

/// Residue at x=0 of g * dx/x: the coefficient of x^0 in g.
pub fn residue_zero<S: Field>(g: &LaurentPoly<S>) -> S {
    g.coeff(0)
}

/// Residue at x=infinity of g * dx/x: minus the coefficient of x^0 in g.
pub fn residue_infinity<S: Field>(g: &LaurentPoly<S>) -> S {
    -g.coeff(0)
}

/// Truncated expansion of 1/p around x = infinity, where p has invertible
/// leading (highest) coefficient. Returns the coefficients of
/// x^(-deg_hi - j) for j = 0..n_terms-1.
pub fn recip_series_at_inf<S: Field>(p: &LaurentPoly<S>, n_terms: usize) -> (i64, Vec<S>) {
    let hi = p.hi().expect("reciprocal of zero polynomial");
    let lead = p.coeff(hi);
    let lead_inv = lead.inv();
    // p = lead * x^hi (1 + u), u = sum_{d>=1} a_d x^{-d}
    let mut a = vec![S::zero(); n_terms];
    for (e, c) in p.iter() {
        let d = hi - e;
        if d >= 1 && (d as usize) < n_terms {
            a[d as usize] = c.clone() * lead_inv.clone();
        }
    }
    // 1/(1+u) via the recursion b_0 = 1, b_j = -sum_{d=1..j} a_d b_{j-d}
    let mut b = vec![S::zero(); n_terms];
    b[0] = S::one();
    for j in 1..n_terms {
        let mut acc = S::zero();
        for d in 1..=j {
            if !a[d].is_zero() {
                acc = acc + a[d].clone() * b[j - d].clone();
            }
        }
        b[j] = -acc;
    }
    let coeffs = b.into_iter().map(|x| x * lead_inv.clone()).collect();
    (-hi, coeffs)
}

/// Truncated expansion of 1/p around x = 0, where p has invertible trailing
/// (lowest) coefficient. Returns the coefficients of x^(-deg_lo + j).
pub fn recip_series_at_zero<S: Field>(p: &LaurentPoly<S>, n_terms: usize) -> (i64, Vec<S>) {
    let lo = p.lo().expect("reciprocal of zero polynomial");
    let trail = p.coeff(lo);
    let trail_inv = trail.inv();
    let mut a = vec![S::zero(); n_terms];
    for (e, c) in p.iter() {
        let d = e - lo;
        if d >= 1 && (d as usize) < n_terms {
            a[d as usize] = c.clone() * trail_inv.clone();
        }
    }
    let mut b = vec![S::zero(); n_terms];
    b[0] = S::one();
    for j in 1..n_terms {
        let mut acc = S::zero();
        for d in 1..=j {
            if !a[d].is_zero() {
                acc = acc + a[d].clone() * b[j - d].clone();
            }
        }
        b[j] = -acc;
    }
    let coeffs = b.into_iter().map(|x| x * trail_inv.clone()).collect();
    (-lo, coeffs)
}

/// Coefficient of x^0 in g/p where the expansion of 1/p is taken at
/// infinity. Exact: the truncation is sized to cover all of g's support.
pub fn coeff0_div_at_inf<S: Field>(g: &LaurentPoly<S>, p: &LaurentPoly<S>) -> S {
    if g.is_zero() {
        return S::zero();
    }
    let n_terms = ((g.hi().unwrap() - p.hi().expect("zero divisor")).max(0) + 1) as usize;
    let (start, coeffs) = recip_series_at_inf(p, n_terms);
    let mut acc = S::zero();
    for (e, c) in g.iter() {
        // need coefficient of x^{-e} in 1/p: index j with start - j = -e
        let j = e + start;
        if j >= 0 && (j as usize) < coeffs.len() {
            acc = acc + c.clone() * coeffs[j as usize].clone();
        }
    }
    acc
}

/// Coefficient of x^0 in g/p with 1/p expanded at zero.
pub fn coeff0_div_at_zero<S: Field>(g: &LaurentPoly<S>, p: &LaurentPoly<S>) -> S {
    if g.is_zero() {
        return S::zero();
    }
    let lo = p.lo().expect("zero divisor");
    let n_terms = ((lo - g.lo().unwrap()).max(0) + 1) as usize;
    let (start, coeffs) = recip_series_at_zero(p, n_terms);
    let mut acc = S::zero();
    for (e, c) in g.iter() {
        // coefficient of x^{-e} in 1/p: start + j = -e
        let j = -e - start;
        if j >= 0 && (j as usize) < coeffs.len() {
            acc = acc + c.clone() * coeffs[j as usize].clone();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};
    use num::Zero;

    fn p(terms: &[(i64, i64)]) -> LaurentPoly<Rat> {
        LaurentPoly::from_terms(terms.iter().map(|&(e, c)| (e, rat(c, 1))))
    }

    #[test]
    fn residue_conventions() {
        // g = 1 at zero -> 1
        assert_eq!(residue_zero(&p(&[(0, 1)])), rat(1, 1));
        // g = x + 3 + 1/x at infinity -> -3
        assert_eq!(residue_infinity(&p(&[(1, 1), (0, 3), (-1, 1)])), rat(-3, 1));
    }

    #[test]
    fn exact_form_has_zero_residue() {
        // d(g) = g'(x) dx = x g'(x) * dx/x; residues at 0 and infinity vanish.
        let g = p(&[(3, 2), (1, 5), (-2, 7), (0, 11)]);
        let dg = g.derivative().mul_xpow(1);
        assert!(residue_zero(&dg).is_zero());
        assert!(residue_infinity(&dg).is_zero());
    }

    #[test]
    fn recip_series_inverts() {
        let q = p(&[(2, 1), (1, 3), (-1, 2)]);
        let (start, coeffs) = recip_series_at_inf(&q, 12);
        let mut series = LaurentPoly::zero();
        for (j, c) in coeffs.iter().enumerate() {
            series.add_term(start - j as i64, c.clone());
        }
        let prod = q.mul(&series);
        // should be 1 up to terms below the truncation
        assert_eq!(prod.coeff(0), rat(1, 1));
        for e in 1..=2 {
            assert!(prod.coeff(e).is_zero());
        }
        for e in -8..0 {
            assert!(prod.coeff(e).is_zero(), "tail coefficient {e} nonzero");
        }
    }

    #[test]
    fn taylor_shift() {
        // f = x^2 + 1/x at x0 = 2: f(2+d) = 4.5 + (4 - 1/4) d + ...
        let f = p(&[(2, 1), (-1, 1)]);
        let t = f.taylor_at(&rat(2, 1), 2);
        assert_eq!(t[0], rat(9, 2));
        assert_eq!(t[1], rat(15, 4));
        assert_eq!(t[2], rat(9, 8));
    }
}
