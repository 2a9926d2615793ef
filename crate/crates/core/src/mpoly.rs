//! Sparse multivariate polynomials over a coefficient field.
//!
//! Exponents are signed so a designated variable may appear with negative
//! powers (used for the deformation parameter, whose powers are inverted
//! during Jacobian-ring division but cancel again in every final result).
//! Monomials are kept in a BTreeMap keyed by the exponent vector, which
//! doubles as a lexicographic monomial order for exact division.

use crate::scalar::{Field, Rat};
use num::Zero;
use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Debug)]
pub struct MPoly<S> {
    nvars: usize,
    terms: BTreeMap<Vec<i32>, S>,
}

impl<S: Field> MPoly<S> {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, S::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exp = vec![0; nvars];
        exp[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(exp, S::one());
        p
    }

    pub fn monomial(nvars: usize, exp: Vec<i32>, c: S) -> Self {
        assert_eq!(exp.len(), nvars);
        let mut p = Self::zero(nvars);
        p.add_term(exp, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, exp: Vec<i32>, c: S) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(exp.len(), self.nvars);
        let e = self.terms.entry(exp).or_insert_with(S::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn constant_term(&self) -> S {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i32>, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[i32]) -> S {
        self.terms.get(exp).cloned().unwrap_or_else(S::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.nvars != other.nvars {
            let n = self.nvars.max(other.nvars);
            return self.clone().promote(n).add(&other.clone().promote(n));
        }
        let mut out = self.clone();
        for (e, c) in other.iter() {
            out.add_term(e.clone(), c.clone());
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
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        self.map(|c| c.clone() * s.clone())
    }

    pub fn map(&self, mut f: impl FnMut(&S) -> S) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in self.iter() {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.nvars != other.nvars {
            let n = self.nvars.max(other.nvars);
            return self.clone().promote(n).mul(&other.clone().promote(n));
        }
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in self.iter() {
            for (e2, c2) in other.iter() {
                let exp: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(exp, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn mul_var_pow(&self, var: usize, pow: i32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in self.iter() {
            let mut exp = e.clone();
            exp[var] += pow;
            out.add_term(exp, c.clone());
        }
        out
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in self.iter() {
            if e[i] == 0 {
                continue;
            }
            let mut exp = e.clone();
            exp[i] -= 1;
            out.add_term(exp, c.clone() * S::from_i64(e[i] as i64));
        }
        out
    }

    /// The operator x_i * d/dx_i (degree-preserving Euler-type derivation).
    pub fn var_weighted(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in self.iter() {
            out.add_term(e.clone(), c.clone() * S::from_i64(e[i] as i64));
        }
        out
    }

    /// Evaluate after embedding the coefficients into another field.
    pub fn eval_in<T: Field>(&self, embed: impl Fn(&S) -> T, vals: &[T]) -> T {
        assert_eq!(vals.len(), self.nvars);
        let mut acc = T::zero();
        for (e, c) in self.iter() {
            let mut term = embed(c);
            for (i, &p) in e.iter().enumerate() {
                term = term * crate::laurent::int_pow(&vals[i], p as i64);
            }
            acc = acc + term;
        }
        acc
    }

    pub fn eval(&self, vals: &[S]) -> S {
        assert_eq!(vals.len(), self.nvars);
        let mut acc = S::zero();
        for (e, c) in self.iter() {
            let mut term = c.clone();
            for (i, &p) in e.iter().enumerate() {
                term = term * crate::laurent::int_pow(&vals[i], p as i64);
            }
            acc = acc + term;
        }
        acc
    }

    /// Full substitution: variable i is replaced by `subs[i]`. All
    /// exponents must be nonnegative.
    pub fn subst(&self, subs: &[MPoly<S>]) -> Self {
        assert_eq!(subs.len(), self.nvars);
        let out_vars = subs[0].nvars;
        let mut acc = MPoly::zero(out_vars);
        for (e, c) in self.iter() {
            let mut term = MPoly::constant(out_vars, c.clone());
            for (i, &p) in e.iter().enumerate() {
                assert!(p >= 0, "subst requires nonnegative exponents");
                for _ in 0..p {
                    term = term.mul(&subs[i]);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Total degree of a monomial (sum of exponents).
    fn tot(e: &[i32]) -> i32 {
        e.iter().sum()
    }

    pub fn total_degree(&self) -> Option<i32> {
        self.terms.keys().map(|e| Self::tot(e)).max()
    }

    /// Homogeneous component of total degree d.
    pub fn degree_part(&self, d: i32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in self.iter() {
            if Self::tot(e) == d {
                out.add_term(e.clone(), c.clone());
            }
        }
        out
    }

    /// Truncate to total degree <= d.
    pub fn truncate_degree(&self, d: i32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in self.iter() {
            if Self::tot(e) <= d {
                out.add_term(e.clone(), c.clone());
            }
        }
        out
    }

    /// Is the polynomial weighted-homogeneous of weight `w` for the given
    /// per-variable weights (weights and w as rationals)?
    pub fn is_weighted_homogeneous(&self, weights: &[crate::scalar::Rat], w: &crate::scalar::Rat) -> bool {
        self.iter().all(|(e, _)| {
            let mut acc = crate::scalar::Rat::zero();
            for (i, &p) in e.iter().enumerate() {
                acc += weights[i].clone() * crate::scalar::Rat::from_integer(p.into());
            }
            acc == *w
        })
    }

    /// Lowest exponent of variable `i` across all terms (0 for the zero
    /// polynomial).
    pub fn min_exp(&self, i: usize) -> i32 {
        self.terms.keys().map(|e| e[i]).min().unwrap_or(0)
    }

    /// Exact division: self = q * g, panics if the division leaves a
    /// remainder. Lex order with respect to the BTreeMap key ordering.
    pub fn div_exact(&self, g: &Self) -> Self {
        let mut rem = self.clone();
        let mut q = Self::zero(self.nvars);
        let (glead_e, glead_c) = g
            .terms
            .iter()
            .next_back()
            .expect("division by zero polynomial");
        let glead_inv = glead_c.inv();
        while let Some((rlead_e, rlead_c)) = rem.terms.iter().next_back() {
            let exp: Vec<i32> = rlead_e.iter().zip(glead_e).map(|(a, b)| a - b).collect();
            let c = rlead_c.clone() * glead_inv.clone();
            let t = Self::monomial(self.nvars, exp, c);
            q = q.add(&t);
            rem = rem.sub(&t.mul(g));
        }
        q
    }

    /// Division with remainder check; returns None if not exactly divisible.
    /// Only valid when g's lex-leading monomial divides enough of self; for
    /// the linear forms used in the reconstruction this always applies.
    pub fn try_div_exact(&self, g: &Self) -> Option<Self> {
        let mut rem = self.clone();
        let mut q = Self::zero(self.nvars);
        let (glead_e, glead_c) = g.terms.iter().next_back()?;
        let glead_inv = glead_c.inv();
        let mut steps = 0usize;
        let budget = 4 * (self.terms.len() + 1) * (g.terms.len() + 1) * 64;
        while let Some((rlead_e, rlead_c)) = rem.terms.iter().next_back() {
            steps += 1;
            if steps > budget {
                return None;
            }
            let exp: Vec<i32> = rlead_e.iter().zip(glead_e).map(|(a, b)| a - b).collect();
            let c = rlead_c.clone() * glead_inv.clone();
            let t = Self::monomial(self.nvars, exp, c);
            q = q.add(&t);
            rem = rem.sub(&t.mul(g));
        }
        Some(q)
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().map(|(_, c)| c.abs2().sqrt()).fold(0.0, f64::max)
    }
}

impl<S: Field> Zero for MPoly<S> {
    fn zero() -> Self {
        // nvars is contextual; a 0-var zero acts as an absorbing placeholder.
        MPoly::zero(0)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Field> MPoly<S> {
    /// Invert a monomial (negate exponents, invert the coefficient).
    /// Panics for anything with more than one term.
    pub fn inv_monomial(&self) -> Self {
        assert_eq!(
            self.terms.len(),
            1,
            "only monomials are invertible in the polynomial ring"
        );
        let (e, c) = self.terms.iter().next().unwrap();
        let exp: Vec<i32> = e.iter().map(|&x| -x).collect();
        MPoly::monomial(self.nvars, exp, c.inv())
    }

    /// Lift into a larger ambient variable count (new slots get exponent 0).
    pub fn promote(self, nvars: usize) -> Self {
        if self.nvars == nvars {
            return self;
        }
        assert!(self.nvars < nvars, "cannot drop variables");
        let mut out = Self::zero(nvars);
        for (e, c) in self.terms {
            let mut exp = vec![0; nvars];
            exp[..e.len()].copy_from_slice(&e);
            out.add_term(exp, c);
        }
        out
    }
}

// Ring-operator impls so MPoly can be a matrix entry type.
impl<S: Field> std::ops::Add for MPoly<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.nvars.max(rhs.nvars);
        MPoly::add(&self.promote(n), &rhs.promote(n))
    }
}

impl<S: Field> std::ops::Sub for MPoly<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let n = self.nvars.max(rhs.nvars);
        MPoly::sub(&self.promote(n), &rhs.promote(n))
    }
}

impl<S: Field> std::ops::Mul for MPoly<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let n = self.nvars.max(rhs.nvars);
        MPoly::mul(&self.promote(n), &rhs.promote(n))
    }
}

impl<S: Field> std::ops::Div for MPoly<S> {
    type Output = Self;
    /// Division through monomial inversion of the divisor (the only case the
    /// coefficient-ring contract needs).
    fn div(self, rhs: Self) -> Self {
        let n = self.nvars.max(rhs.nvars);
        MPoly::mul(&self.promote(n), &rhs.promote(n).inv_monomial())
    }
}

impl<S: Field> std::ops::Neg for MPoly<S> {
    type Output = Self;
    fn neg(self) -> Self {
        MPoly::neg(&self)
    }
}

impl<S: Field> num::One for MPoly<S> {
    fn one() -> Self {
        MPoly::one(0)
    }
    fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(e, c)| e.iter().all(|&x| x == 0) && c.is_one())
    }
}

/// Polynomials act as coefficients for the generic Jacobian-ring machinery.
/// Only invertible monomials can be inverted; anything else panics loudly,
/// which is the correct behavior: the division pivots arising in this crate
/// (the leading coefficient k and the trailing coefficient -m w^m) are
/// always monomials.
impl Field for MPoly<Rat> {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        MPoly::constant(0, Rat::from_i64(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        MPoly::constant(0, Rat::from_ratio(num, den))
    }

    fn from_rat(r: &Rat) -> Self {
        MPoly::constant(0, r.clone())
    }

    fn from_c64(_z: crate::scalar::C64) -> Self {
        panic!("cannot embed a float into polynomial coefficients")
    }

    fn inv(&self) -> Self {
        self.inv_monomial()
    }

    fn abs2(&self) -> f64 {
        let m = self.max_abs();
        m * m
    }

    fn approx_c64(&self) -> crate::scalar::C64 {
        crate::scalar::C64::new(self.constant_term().abs2().sqrt(), 0.0)
    }
}

impl<S: Field> std::fmt::Display for MPoly<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (i, &p) in e.iter().enumerate() {
                if p != 0 {
                    write!(f, "*v{}^{}", i, p)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    fn x() -> MPoly<Rat> {
        MPoly::var(2, 0)
    }
    fn y() -> MPoly<Rat> {
        MPoly::var(2, 1)
    }

    #[test]
    fn ring_ops() {
        let p = x().add(&y()).pow(2);
        assert_eq!(p.coeff(&[1, 1]), rat(2, 1));
        assert_eq!(p.coeff(&[2, 0]), rat(1, 1));
        assert_eq!(p.deriv(0).coeff(&[0, 1]), rat(2, 1));
    }

    #[test]
    fn exact_division() {
        let p = x().pow(2).sub(&y().pow(2));
        let q = p.div_exact(&x().sub(&y()));
        assert_eq!(q, x().add(&y()));
    }

    #[test]
    fn degree_parts() {
        let p = x().pow(3).add(&x().mul(&y())).add(&MPoly::one(2));
        assert_eq!(p.degree_part(2), x().mul(&y()));
        assert_eq!(p.truncate_degree(2).n_terms(), 2);
    }
}
