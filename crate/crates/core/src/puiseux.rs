//! Series in fractional powers of a variable, with an optional polynomial
//! multiple of its logarithm.
//!
//! A `LogPuiseux` value is
//!
//! ```text
//!   sum_e  c_e lam^(e/r)   +   (sum_i a_i lam^i) * log(lam)
//! ```
//!
//! where all exponents of the main part share one ramification index r.
//! Values are either exact finite expressions (`window == None`) or
//! truncations that know which coefficient range they faithfully represent.
//! Binary operations intersect windows; asking for a coefficient outside the
//! window is an error rather than a silent zero.

use crate::error::{Error, Result};
use crate::scalar::{Field, Tol};
use num::integer::lcm;
use std::collections::BTreeMap;

/// Known-coefficient range, in units of 1/ram. `lo..=hi` inclusive.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        Window { lo, hi }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct LogPuiseux<S> {
    /// Ramification index: exponents are numerator/ram.
    ram: i64,
    /// Main part: exponent numerator -> coefficient.
    terms: BTreeMap<i64, S>,
    /// log-part: integer exponent (in whole powers) -> coefficient.
    log_terms: BTreeMap<i64, S>,
    /// None = exact finite expression, valid at every exponent.
    window: Option<Window>,
}

impl<S: Field> LogPuiseux<S> {
    pub fn zero(ram: i64) -> Self {
        assert!(ram >= 1);
        LogPuiseux {
            ram,
            terms: BTreeMap::new(),
            log_terms: BTreeMap::new(),
            window: None,
        }
    }

    pub fn constant(c: S) -> Self {
        Self::term(1, 0, c)
    }

    /// c * lam^(num/ram).
    pub fn term(ram: i64, num: i64, c: S) -> Self {
        let mut p = Self::zero(ram);
        p.add_term(num, c);
        p
    }

    /// c * lam^i * log(lam).
    pub fn log_term(i: i64, c: S) -> Self {
        let mut p = Self::zero(1);
        p.add_log_term(i, c);
        p
    }

    pub fn ram(&self) -> i64 {
        self.ram
    }

    pub fn window(&self) -> Option<Window> {
        self.window
    }

    pub fn with_window(mut self, lo: i64, hi: i64) -> Self {
        self.window = Some(Window::new(lo, hi));
        self.terms.retain(|&e, _| e >= lo && e <= hi);
        self
    }

    pub fn has_log(&self) -> bool {
        !self.log_terms.is_empty()
    }

    pub fn add_term(&mut self, num: i64, c: S) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(num).or_insert_with(S::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&num);
        }
    }

    pub fn add_log_term(&mut self, i: i64, c: S) {
        if c.is_zero() {
            return;
        }
        let e = self.log_terms.entry(i).or_insert_with(S::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.log_terms.remove(&i);
        }
    }

    /// Coefficient of lam^(num/ram) in the main part. Errors outside the
    /// window: the truncation does not determine that coefficient.
    pub fn coeff(&self, num: i64) -> Result<S> {
        if let Some(w) = self.window {
            if num < w.lo || num > w.hi {
                return Err(Error::Window {
                    wanted: num,
                    lo: w.lo,
                    hi: w.hi,
                });
            }
        }
        Ok(self.terms.get(&num).cloned().unwrap_or_else(S::zero))
    }

    pub fn log_coeff(&self, i: i64) -> S {
        self.log_terms.get(&i).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.log_terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &S)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn log_part(&self) -> impl DoubleEndedIterator<Item = (i64, &S)> {
        self.log_terms.iter().map(|(e, c)| (*e, c))
    }

    /// Lowest main-part exponent as (num, ram).
    pub fn lowest(&self) -> Option<(i64, i64)> {
        self.terms.keys().next().map(|&n| (n, self.ram))
    }

    /// Re-express with ramification `new_ram` (a multiple of the current).
    pub fn reramify(&self, new_ram: i64) -> Self {
        assert!(new_ram % self.ram == 0, "new ramification must be a multiple");
        let f = new_ram / self.ram;
        LogPuiseux {
            ram: new_ram,
            terms: self.terms.iter().map(|(&e, c)| (e * f, c.clone())).collect(),
            log_terms: self.log_terms.clone(),
            window: self.window.map(|w| Window::new(w.lo * f, w.hi * f)),
        }
    }

    fn joined(a: &Self, b: &Self) -> (Self, Self) {
        let r = lcm(a.ram, b.ram);
        (a.reramify(r), b.reramify(r))
    }

    fn join_windows(a: Option<Window>, b: Option<Window>) -> Option<Window> {
        match (a, b) {
            (None, w) | (w, None) => w,
            (Some(x), Some(y)) => Some(Window::new(x.lo.max(y.lo), x.hi.min(y.hi))),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = Self::joined(self, other);
        let mut out = a.clone();
        out.window = Self::join_windows(a.window, b.window);
        for (e, c) in b.terms() {
            out.add_term(e, c.clone());
        }
        for (i, c) in b.log_part() {
            out.add_log_term(i, c.clone());
        }
        if let Some(w) = out.window {
            out.terms.retain(|&e, _| e >= w.lo && e <= w.hi);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    pub fn map(&self, mut f: impl FnMut(&S) -> S) -> Self {
        let mut out = Self::zero(self.ram);
        out.window = self.window;
        for (e, c) in self.terms() {
            out.add_term(e, f(c));
        }
        for (i, c) in self.log_part() {
            out.add_log_term(i, f(c));
        }
        out
    }

    /// Multiply by c * lam^(num/ram).
    pub fn mul_term(&self, num: i64, ram: i64, c: &S) -> Self {
        let r = lcm(self.ram, ram);
        let a = self.reramify(r);
        let shift = num * (r / ram);
        assert!(
            a.log_terms.is_empty() || shift % r == 0,
            "monomial shift of a log part must keep integer exponents"
        );
        let mut out = Self::zero(r);
        out.window = a.window.map(|w| Window::new(w.lo + shift, w.hi + shift));
        for (e, k) in a.terms() {
            out.add_term(e + shift, k.clone() * c.clone());
        }
        for (i, k) in a.log_part() {
            out.add_log_term(i + shift / r, k.clone() * c.clone());
        }
        out
    }

    /// Product of two series. log*log products are rejected (never needed:
    /// at most one factor carries a log part in every identity we evaluate).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.has_log() && other.has_log() {
            return Err(Error::msg("product of two logarithmic series"));
        }
        let (a, b) = Self::joined(self, other);
        let r = a.ram;
        // window of the product: a coefficient at e is complete iff every
        // splitting e = e1 + e2 with e1, e2 inside the supports is known.
        let win = match (a.window, b.window) {
            (None, None) => None,
            _ => {
                let (alo, ahi) = a.ext(r);
                let (blo, bhi) = b.ext(r);
                Some(Window::new((alo + bhi).max(blo + ahi), ahi + bhi))
            }
        };
        let mut out = Self::zero(r);
        for (e1, c1) in a.terms() {
            for (e2, c2) in b.terms() {
                out.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        // main x log cross terms
        for (i, c1) in a.log_part() {
            for (e2, c2) in b.terms() {
                out.add_log_term2(i * r + e2, r, c1.clone() * c2.clone())?;
            }
        }
        for (i, c2) in b.log_part() {
            for (e1, c1) in a.terms() {
                out.add_log_term2(i * r + e1, r, c1.clone() * c2.clone())?;
            }
        }
        out.window = win;
        if let Some(w) = out.window {
            out.terms.retain(|&e, _| e >= w.lo && e <= w.hi);
        }
        Ok(out)
    }

    fn add_log_term2(&mut self, num: i64, ram: i64, c: S) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        if num % ram != 0 {
            return Err(Error::msg("fractional exponent on a log term"));
        }
        self.add_log_term(num / ram, c);
        Ok(())
    }

    /// Effective support/window extent used for truncation bookkeeping.
    fn ext(&self, r: i64) -> (i64, i64) {
        debug_assert_eq!(self.ram, r);
        match self.window {
            Some(w) => (w.lo, w.hi),
            None => {
                let lo = self.terms.keys().next().copied().unwrap_or(0);
                let hi = self.terms.keys().next_back().copied().unwrap_or(0);
                (lo, hi)
            }
        }
    }

    /// d/dlam. Uses d(lam^e) = e lam^(e-1) and
    /// d(lam^i log lam) = i lam^(i-1) log lam + lam^(i-1).
    pub fn d_dlam(&self) -> Self {
        let r = self.ram;
        let mut out = Self::zero(r);
        out.window = self.window.map(|w| Window::new(w.lo - r, w.hi - r));
        for (e, c) in self.terms() {
            out.add_term(e - r, c.clone() * S::from_ratio(e, r));
        }
        for (i, c) in self.log_part() {
            out.add_log_term(i - 1, c.clone() * S::from_i64(i));
            out.add_term((i - 1) * r, c.clone());
        }
        out
    }

    /// Evaluate numerically at lam, with given values for lam^(1/ram) and
    /// log(lam) fixing the branch.
    pub fn eval_with_branch(&self, lam_root: &S, log_lam: &S) -> S {
        let mut acc = S::zero();
        for (e, c) in self.terms() {
            acc = acc + c.clone() * crate::laurent::int_pow(lam_root, e);
        }
        for (i, c) in self.log_part() {
            acc = acc
                + c.clone() * crate::laurent::int_pow(lam_root, i * self.ram) * log_lam.clone();
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.terms()
            .map(|(_, c)| c.abs2().sqrt())
            .chain(self.log_part().map(|(_, c)| c.abs2().sqrt()))
            .fold(0.0, f64::max)
    }

    pub fn prune(&self, tol: Tol) -> Self {
        if S::EXACT {
            return self.clone();
        }
        let mut out = self.clone();
        out.terms.retain(|_, c| !c.is_small(tol));
        out.log_terms.retain(|_, c| !c.is_small(tol));
        out
    }

    /// Drop main-part terms with exponent numerator below the cutoff.
    /// Truncation bookkeeping for iterative constructions.
    pub fn drop_below(&self, cutoff_num: i64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|&e, _| e >= cutoff_num);
        out
    }
}

/// Antiderivative of a Laurent polynomial volume form g(x) dx:
/// x^e dx integrates to x^(e+1)/(e+1) for e != -1 and dx/x to log x.
pub fn d_inverse<S: Field>(g: &crate::laurent::LaurentPoly<S>) -> LogPuiseux<S> {
    let mut out = LogPuiseux::zero(1);
    for (e, c) in g.iter() {
        if e == -1 {
            out.add_log_term(0, c.clone());
        } else {
            out.add_term(e + 1, c.clone() * S::from_i64(e + 1).inv());
        }
    }
    out
}

/// Residue of a series-valued 1-form p(lam) dlam: the coefficient of
/// lam^(-1). A logarithmic part has no single-valued residue.
pub fn residue<S: Field>(p: &LogPuiseux<S>) -> Result<S> {
    if p.has_log() {
        return Err(Error::LogResidue);
    }
    p.coeff(-p.ram())
}

/// Compositional inverse of a truncated series with leading term lam (unit
/// coefficient handled by pre-scaling at the call site; leading exponent must
/// be exactly 1 and the log part empty).
///
/// If s(x) = x + sum_{e<1} s_e x^e (exponents in 1/ram steps going down),
/// the inverse x(lam) satisfies s(x(lam)) = lam up to the truncation order.
/// Computed by successive substitution x <- lam - (s(x) - x), one corrected
/// exponent per pass.
pub fn reverse_series<S: Field>(s: &LogPuiseux<S>, order_terms: usize) -> Result<LogPuiseux<S>> {
    if s.has_log() {
        return Err(Error::msg("cannot invert a series with a log part"));
    }
    let r = s.ram();
    let lead = match s.terms().next_back() {
        Some((e, c)) => (e, c.clone()),
        None => return Err(Error::msg("cannot invert the zero series")),
    };
    if lead.0 != r {
        return Err(Error::msg(
            "series inversion requires leading exponent exactly 1",
        ));
    }
    if lead.1 != S::one() {
        return Err(Error::msg(
            "series inversion requires unit leading coefficient",
        ));
    }
    let cutoff = r - order_terms as i64;
    let mut x = LogPuiseux::term(r, r, S::one()); // x = lam
    // Coefficients are pinned top-down, one exponent r - j per pass: the
    // leading term of s is the identity, so the lam^((r-j)/r) discrepancy of
    // s(x) is corrected exactly by subtracting it from x. Applying only the
    // topmost discrepancy keeps every stored coefficient final (a full
    // update would churn the tail with exponentially growing intermediates).
    for j in 1..=order_terms as i64 {
        let sx = compose(s, &x, order_terms)?.drop_below(cutoff);
        let err = sx.sub(&LogPuiseux::term(r, r, S::one()));
        if err.is_zero() {
            break;
        }
        let target = r - j;
        debug_assert!(
            err.terms().all(|(e, _)| e <= target),
            "discrepancy above the pinned range"
        );
        let c = err.terms().find(|&(e, _)| e == target).map(|(_, c)| c.clone());
        if let Some(c) = c {
            x.add_term(target, -c);
        }
    }
    Ok(x)
}

/// Substitute `inner` (a series in lam) for the variable of `outer`.
/// Both must be log-free; negative powers of the inner series are expanded
/// geometrically to `order_terms` correction terms below the leading one.
pub fn compose<S: Field>(
    outer: &LogPuiseux<S>,
    inner: &LogPuiseux<S>,
    order_terms: usize,
) -> Result<LogPuiseux<S>> {
    if outer.has_log() || inner.has_log() {
        return Err(Error::msg("compose does not support log parts"));
    }
    let r = lcm(outer.ram(), inner.ram());
    let outer = outer.reramify(r);
    let inner = inner.reramify(r);
    let lead = inner
        .terms()
        .next_back()
        .ok_or_else(|| Error::msg("compose with zero inner series"))?;
    if lead.0 != r || lead.1.clone() != S::one() {
        return Err(Error::msg("compose requires inner series with leading term lam"));
    }
    // inner = lam * (1 + u), u supported in negative exponents
    let u = inner
        .mul_term(-r, r, &S::one())
        .sub(&LogPuiseux::constant(S::one()));
    // powers inner^e = lam^e (1+u)^e via binomial series in u
    let mut out = LogPuiseux::zero(r);
    for (e, c) in outer.terms() {
        // (1+u)^(e/r) truncated
        let mut binom = LogPuiseux::constant(S::one());
        let mut upow = LogPuiseux::constant(S::one());
        let mut coef = S::one();
        for j in 0..order_terms {
            // next term: C(e/r, j+1) u^{j+1}
            coef = coef
                * (S::from_ratio(e, r) - S::from_i64(j as i64))
                * S::from_i64(j as i64 + 1).inv();
            upow = upow.mul(&u)?.drop_below(-(4 * order_terms as i64) * r);
            if upow.is_zero() {
                break;
            }
            binom = binom.add(&upow.scale(&coef));
        }
        let term = binom.mul_term(e, r, c);
        out = out.add(&term);
    }
    Ok(out)
}

impl<S: Field> LogPuiseux<S> {
    /// Multiply by lam^(num/ram) given as (num, ram) without a coefficient —
    /// convenience wrapper that can fail on log-part fractional shifts.
    pub fn mul_term2(&self, num: i64, ram: i64, c: &S) -> Result<Self> {
        if self.has_log() {
            let r = lcm(self.ram, ram);
            let shift = num * (r / ram);
            if shift % r != 0 {
                return Err(Error::msg("fractional shift of a log part"));
            }
        }
        Ok(self.mul_term(num, ram, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};
    use num::Zero;

    #[test]
    fn windows_intersect_on_add() {
        let a = LogPuiseux::term(1, 0, rat(1, 1)).with_window(-3, 2);
        let b = LogPuiseux::term(1, 1, rat(2, 1)).with_window(-5, 1);
        let c = a.add(&b);
        assert_eq!(c.window(), Some(Window::new(-3, 1)));
        assert!(c.coeff(2).is_err());
        assert_eq!(c.coeff(1).unwrap(), rat(2, 1));
    }

    #[test]
    fn derivative_of_log() {
        // d/dlam (lam log lam) = log lam + 1
        let p = LogPuiseux::log_term(1, rat(1, 1));
        let d = p.d_dlam();
        assert_eq!(d.log_coeff(0), rat(1, 1));
        assert_eq!(d.coeff(0).unwrap(), rat(1, 1));
    }

    #[test]
    fn reverse_identity_and_shift() {
        // s = lam -> lam
        let s = LogPuiseux::term(1, 1, rat(1, 1));
        let inv = reverse_series(&s, 6).unwrap();
        assert_eq!(inv.coeff(1).unwrap(), rat(1, 1));
        assert!(inv.terms().count() == 1);

        // s = lam + a -> lam - a
        let mut s = LogPuiseux::term(1, 1, rat(1, 1));
        s.add_term(0, rat(5, 1));
        let inv = reverse_series(&s, 8).unwrap();
        assert_eq!(inv.coeff(1).unwrap(), rat(1, 1));
        assert_eq!(inv.coeff(0).unwrap(), rat(-5, 1));
    }

    /// Independent oracle: Newton iteration on s(x) = lam in the field of
    /// truncated series, then back-substitution.
    #[test]
    fn reverse_x_plus_inverse_x() {
        // s(x) = x + 1/x at infinity: x(lam) = lam - lam^{-1} - lam^{-3} + ...
        let mut s = LogPuiseux::term(1, 1, rat(1, 1));
        s.add_term(-1, rat(1, 1));
        let inv = reverse_series(&s, 10).unwrap();
        assert_eq!(inv.coeff(1).unwrap(), rat(1, 1));
        assert_eq!(inv.coeff(-1).unwrap(), rat(-1, 1));
        assert_eq!(inv.coeff(-3).unwrap(), rat(-1, 1));
        assert_eq!(inv.coeff(0).unwrap(), Rat::zero());

        // back-substitution: s(inv(lam)) = lam + O(lam^-9)
        let back = compose(&s, &inv, 10).unwrap();
        assert_eq!(back.coeff(1).unwrap(), rat(1, 1));
        for e in -8..1 {
            assert!(
                back.coeff(e).unwrap().is_zero(),
                "residual at exponent {e}: {:?}",
                back.coeff(e)
            );
        }
    }

    #[test]
    fn mul_window_shrinks() {
        // (1 + lam^{-1} + ... unknown below -2) * same
        let a = LogPuiseux::term(1, 0, rat(1, 1)).with_window(-2, 0);
        let b = a.clone();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.window(), Some(Window::new(-2, 0)));
    }
}
