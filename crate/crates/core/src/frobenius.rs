//! The Frobenius manifold of Laurent polynomials
//! f = x^k + t_1 x^(k-1) + ... + t_k + t_(k+1) (w/x) + ... + (w/x)^m,
//! where w = Q e^(t_N) and N = k + m.
//!
//! A [`FrobeniusPoint`] bundles everything attached to one point of the
//! family: the superpotential, the tangent-basis Laurent representatives
//! df/dtau_i, the Jacobian-ring multiplication (structure constants), the
//! residue metric, and the t <-> tau coordinate change. All of it works
//! pointwise over any coefficient field; exact rationals reproduce every
//! ring identity bit-exactly.

use crate::error::{Error, Result};
use crate::laurent::{coeff0_div_at_inf, coeff0_div_at_zero, LaurentPoly};
use crate::mat::Mat;
use crate::scalar::{Field, Rat};
use num::{One, Zero};

/// The discrete data (k, m, Q) of the family.
#[derive(Clone, PartialEq, Debug)]
pub struct ModelParams<S> {
    pub k: usize,
    pub m: usize,
    pub q: S,
}

impl<S: Field> ModelParams<S> {
    pub fn new(k: usize, m: usize, q: S) -> Result<Self> {
        if k < 1 || m < 1 {
            return Err(Error::msg("k and m must both be at least 1"));
        }
        if q.is_zero() {
            return Err(Error::msg("Q must be nonzero"));
        }
        Ok(ModelParams { k, m, q })
    }

    pub fn n(&self) -> usize {
        self.k + self.m
    }

    /// 0-based index of the unit direction d/dtau_k.
    pub fn unit_index(&self) -> usize {
        self.k - 1
    }
}

/// Truncation order used to expand e^(t_N) when building exact points with
/// t_N != 0. Exact computations normally run at t_N = 0 and vary Q instead;
/// the series fallback keeps build_point total.
const EXP_SERIES_ORDER: usize = 16;

fn exp_truncated<S: Field>(x: &S, order: usize) -> S {
    let mut acc = S::one();
    let mut term = S::one();
    for s in 1..=order {
        term = term * x.clone() * S::from_i64(s as i64).inv();
        acc = acc + term.clone();
    }
    acc
}

/// Hodge grading weights: i/k - 1/2 for 1 <= i <= k-1, then 1/2 - j/m for
/// 0 <= j <= m, in the flat-basis order d/dtau_1 .. d/dtau_N.
pub fn hodge_weights(k: usize, m: usize) -> Vec<Rat> {
    let mut mu = Vec::with_capacity(k + m);
    for i in 1..k {
        mu.push(Rat::from_ratio(i as i64, k as i64) - Rat::from_ratio(1, 2));
    }
    for j in 0..=m {
        mu.push(Rat::from_ratio(1, 2) - Rat::from_ratio(j as i64, m as i64));
    }
    mu
}

/// Euler field coefficients in flat coordinates:
/// E = tau_k d_k + sum (i/k) tau_i d_i + sum (1 - j/m) tau_(k+j) d_(k+j)
///     + (1/k + 1/m) m d_N.
/// Returns (linear weights per coordinate, constant term on d_N).
pub fn euler_data(k: usize, m: usize) -> (Vec<Rat>, Rat) {
    let n = k + m;
    let mut w = vec![Rat::zero(); n];
    for i in 1..k {
        w[i - 1] = Rat::from_ratio(i as i64, k as i64);
    }
    w[k - 1] = Rat::one();
    for j in 1..m {
        w[k - 1 + j] = Rat::one() - Rat::from_ratio(j as i64, m as i64);
    }
    // coefficient of d_N in E is constant (the tau_N coordinate itself does
    // not appear):
    let c = (Rat::from_ratio(1, k as i64) + Rat::from_ratio(1, m as i64))
        * Rat::from_integer((m as i64).into());
    (w, c)
}

/// Euler field evaluated at a flat point.
pub fn euler_coeffs<S: Field>(k: usize, m: usize, tau: &[S]) -> Vec<S> {
    let (w, c) = euler_data(k, m);
    let n = k + m;
    let mut out: Vec<S> = (0..n)
        .map(|i| {
            let wi = &w[i];
            if wi.is_zero() || i == n - 1 {
                S::zero()
            } else {
                tau[i].clone() * rat_to(wi)
            }
        })
        .collect();
    out[n - 1] = rat_to(&c);
    out
}

/// Constant flat metric in the tau-basis: (d_i, d_(k-i)) = 1/k for
/// 1 <= i <= k-1 and (d_(k+j), d_(k+m-j)) = 1/m for 0 <= j <= m.
pub fn flat_metric<S: Field>(k: usize, m: usize) -> Mat<S> {
    let n = k + m;
    let mut g = Mat::zeros(n, n);
    for i in 1..k {
        g[(i - 1, k - i - 1)] = S::from_ratio(1, k as i64);
    }
    for j in 0..=m {
        g[(k - 1 + j, n - 1 - j)] = S::from_ratio(1, m as i64);
    }
    g
}

pub fn rat_to<S: Field>(r: &Rat) -> S {
    S::from_rat(r)
}

#[derive(Clone, Debug)]
pub struct FrobeniusPoint<S> {
    pub params: ModelParams<S>,
    /// Coordinates t_1..t_N.
    pub t: Vec<S>,
    /// The deformation value w = Q e^(t_N).
    pub qtilde: S,
    /// Flat coordinates tau_1..tau_N of this point.
    pub tau: Vec<S>,
    /// The superpotential.
    pub f: LaurentPoly<S>,
    /// x f'(x): the Jacobian ideal generator adapted to omega = dx/x.
    pub xdf: LaurentPoly<S>,
    /// df/dt_l, 1-based l in 1..=N (index l-1).
    pub df_dt: Vec<LaurentPoly<S>>,
    /// df/dtau_i.
    pub df_dtau: Vec<LaurentPoly<S>>,
    /// J[i][l] = dtau_i/dt_l.
    pub jac_t2tau: Mat<S>,
    /// Inverse Jacobian dt/dtau.
    pub jac_tau2t: Mat<S>,
    /// Monomial-basis coordinates of df/dtau_i (columns), rows are exponents
    /// k-1, k-2, ..., -m.
    pub basis_mat: Mat<S>,
    pub basis_mat_inv: Mat<S>,
    /// Structure constants: a_mats[i] is the matrix of (d_i bullet) in the
    /// flat tangent basis.
    pub a_mats: Vec<Mat<S>>,
    /// Residue metric g_(ij) computed at this point (tau basis).
    pub metric: Mat<S>,
}

impl<S: Field> FrobeniusPoint<S> {
    /// Assemble the point from t-coordinates. In exact mode e^(t_N) is
    /// expanded as a truncated exponential series; computations that must be
    /// exact should use t_N = 0 (where w = Q) or `build_with_deformation`.
    pub fn build(params: &ModelParams<S>, t: &[S]) -> Result<Self> {
        let n = params.n();
        if t.len() != n {
            return Err(Error::msg(format!("expected {} coordinates", n)));
        }
        let qtilde = if t[n - 1].is_zero() {
            params.q.clone()
        } else if S::EXACT {
            params.q.clone() * exp_truncated(&t[n - 1], EXP_SERIES_ORDER)
        } else {
            // float mode: honest exponential through the numeric image
            let e = t[n - 1].approx_c64().exp();
            params.q.clone() * S::from_c64(e)
        };
        Self::build_with_deformation(params, t, qtilde)
    }

    /// Assemble the point with an explicitly given value of w = Q e^(t_N).
    pub fn build_with_deformation(params: &ModelParams<S>, t: &[S], qtilde: S) -> Result<Self> {
        let (k, m, n) = (params.k, params.m, params.n());
        if qtilde.is_zero() {
            return Err(Error::msg("deformation value Q e^(t_N) must be nonzero"));
        }

        // f = x^k + sum t_i x^(k-i) + sum t_(k+j) w^j x^(-j) + w^m x^(-m)
        let mut f = LaurentPoly::monomial(k as i64, S::one());
        for i in 1..=k {
            f.add_term(k as i64 - i as i64, t[i - 1].clone());
        }
        let mut wpow = S::one();
        for j in 1..m {
            wpow = wpow.clone() * qtilde.clone();
            f.add_term(-(j as i64), t[k + j - 1].clone() * wpow.clone());
        }
        let wm = crate::laurent::int_pow(&qtilde, m as i64);
        f.add_term(-(m as i64), wm.clone());

        let xdf = f.x_d_dx();
        if xdf.coeff(k as i64).is_zero() || xdf.coeff(-(m as i64)).is_zero() {
            return Err(Error::msg(
                "degenerate derivative: leading or trailing coefficient vanishes",
            ));
        }

        // dt-derivatives
        let mut df_dt = Vec::with_capacity(n);
        for l in 1..=k {
            df_dt.push(LaurentPoly::monomial(k as i64 - l as i64, S::one()));
        }
        let mut wpow = S::one();
        for j in 1..m {
            wpow = wpow.clone() * qtilde.clone();
            df_dt.push(LaurentPoly::monomial(-(j as i64), wpow.clone()));
        }
        // l = N: all w-carrying terms weighted by their w-power
        let mut dn = LaurentPoly::zero();
        let mut wpow = S::one();
        for j in 1..m {
            wpow = wpow.clone() * qtilde.clone();
            dn.add_term(
                -(j as i64),
                t[k + j - 1].clone() * wpow.clone() * S::from_i64(j as i64),
            );
        }
        dn.add_term(-(m as i64), wm.clone() * S::from_i64(m as i64));
        df_dt.push(dn);
        debug_assert_eq!(df_dt.len(), n);

        // tau coordinates and the Jacobian dtau/dt
        let tau = tau_of_t(params, t, &f, &qtilde);
        let jac = jac_t2tau(params, &f, &df_dt, &qtilde);
        let jac_inv = jac
            .inverse()
            .ok_or_else(|| Error::internal("coordinate Jacobian is singular"))?;

        // df/dtau_i = sum_l (dt_l/dtau_i) df/dt_l
        let df_dtau: Vec<LaurentPoly<S>> = (0..n)
            .map(|i| {
                let mut acc = LaurentPoly::zero();
                for l in 0..n {
                    let c = jac_inv[(l, i)].clone();
                    if !c.is_zero() {
                        acc = acc.add(&df_dt[l].scale(&c));
                    }
                }
                acc
            })
            .collect();

        // monomial coordinates of the tangent basis
        let basis_mat = Mat::from_fn(n, n, |r, c| {
            let e = k as i64 - 1 - r as i64;
            df_dtau[c].coeff(e)
        });
        let basis_mat_inv = basis_mat
            .inverse()
            .ok_or_else(|| Error::internal("tangent basis is degenerate"))?;

        let mut point = FrobeniusPoint {
            params: params.clone(),
            t: t.to_vec(),
            qtilde,
            tau,
            f,
            xdf,
            df_dt,
            df_dtau,
            jac_t2tau: jac,
            jac_tau2t: jac_inv,
            basis_mat,
            basis_mat_inv,
            a_mats: Vec::new(),
            metric: Mat::zeros(n, n),
        };

        // structure constants and residue metric
        let mut a_mats = Vec::with_capacity(n);
        for i in 0..n {
            let mut a = Mat::zeros(n, n);
            for j in 0..n {
                let prod = point.df_dtau[i].mul(&point.df_dtau[j]);
                let (red, _) = point.reduce(&prod)?;
                let coords = point.tangent_coords(&red);
                a.set_col(j, &coords);
            }
            a_mats.push(a);
        }
        let metric = Mat::from_fn(n, n, |i, j| {
            point.residue_pairing_raw(&point.df_dtau[i], &point.df_dtau[j])
        });
        point.a_mats = a_mats;
        point.metric = metric;
        Ok(point)
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// Reduce a Laurent polynomial modulo <x f'(x)> to the span of
    /// x^(k-1) .. x^(-m); also returns the quotient g with
    /// w = r + g * (x f').
    pub fn reduce(&self, w: &LaurentPoly<S>) -> Result<(LaurentPoly<S>, LaurentPoly<S>)> {
        reduce_by_xdf(w, &self.xdf, self.params.k as i64, self.params.m as i64)
    }

    /// Coordinates of a reduced Laurent polynomial in the tangent basis
    /// df/dtau_1 .. df/dtau_N.
    pub fn tangent_coords(&self, reduced: &LaurentPoly<S>) -> Vec<S> {
        let n = self.n();
        let k = self.params.k as i64;
        let mono: Vec<S> = (0..n).map(|r| reduced.coeff(k - 1 - r as i64)).collect();
        self.basis_mat_inv.mul_vec(&mono)
    }

    /// Jacobian-ring product of two tangent vectors given in flat
    /// coordinates; returns flat coordinates.
    pub fn multiply(&self, u: &[S], v: &[S]) -> Result<Vec<S>> {
        let n = self.n();
        let mut up = LaurentPoly::zero();
        let mut vp = LaurentPoly::zero();
        for i in 0..n {
            up = up.add(&self.df_dtau[i].scale(&u[i]));
            vp = vp.add(&self.df_dtau[i].scale(&v[i]));
        }
        let (red, _) = self.reduce(&up.mul(&vp))?;
        Ok(self.tangent_coords(&red))
    }

    /// Residue pairing of two Laurent representatives:
    /// -(res_0 + res_inf) (u omega)(v omega)/df.
    fn residue_pairing_raw(&self, u: &LaurentPoly<S>, v: &LaurentPoly<S>) -> S {
        let h = u.mul(v);
        // the 1-form is (u v / (x f')) omega; sum of residues vanishes, so
        // -(res_0 + res_inf) = coeff0_at_inf - coeff0_at_zero of u v / (x f')
        coeff0_div_at_inf(&h, &self.xdf) - coeff0_div_at_zero(&h, &self.xdf)
    }

    /// Residue pairing of two tangent vectors in flat coordinates.
    pub fn residue_pairing(&self, u: &[S], v: &[S]) -> S {
        crate::mat::bilinear(&self.metric, u, v)
    }

    /// Matrix of multiplication by the Euler field at this point.
    pub fn euler_mult(&self) -> Mat<S> {
        let n = self.n();
        let e = euler_coeffs(self.params.k, self.params.m, &self.tau);
        let mut acc = Mat::zeros(n, n);
        for i in 0..n {
            if !e[i].is_zero() {
                acc = acc.add(&self.a_mats[i].scale(&e[i]));
            }
        }
        acc
    }

    /// The quotient in the first identity of the primitive-form lemma:
    /// (d_i f)(d_j f) - sum_p A_(ij)^p d_p f = G_(ij) * x f'.
    pub fn primitive_form_quotient(&self, i: usize, j: usize) -> Result<LaurentPoly<S>> {
        let prod = self.df_dtau[i].mul(&self.df_dtau[j]);
        let (red, g) = self.reduce(&prod)?;
        // red must equal sum_p A_(ij)^p d_p f by construction
        let coords = self.tangent_coords(&red);
        let mut check = LaurentPoly::zero();
        for p in 0..self.n() {
            check = check.add(&self.df_dtau[p].scale(&coords[p]));
        }
        if !check.sub(&red).is_zero() && S::EXACT {
            return Err(Error::internal("basis expansion failed in primitive form"));
        }
        Ok(g)
    }
}

/// Flat coordinates from t-coordinates via the residue formulas.
pub fn tau_of_t<S: Field>(
    params: &ModelParams<S>,
    t: &[S],
    f: &LaurentPoly<S>,
    qtilde: &S,
) -> Vec<S> {
    let (k, m, n) = (params.k, params.m, params.n());
    let mut tau = vec![S::zero(); n];
    // tau_i = -(k/i) res_inf f^(i/k) omega = (k/i) [x^0](f^(i/k))
    for i in 1..k {
        let c0 = frac_power_coeff0_at_inf(f, i as i64, k as i64);
        tau[i - 1] = c0 * S::from_ratio(k as i64, i as i64);
    }
    tau[k - 1] = t[k - 1].clone();
    // tau_(k+m-j) = (m/j) res_0 f^(j/m) omega = (m/j) [x^0](f^(j/m))
    for j in 1..m {
        let c0 = frac_power_coeff0_at_zero(f, j as i64, m as i64, qtilde);
        tau[k + m - j - 1] = c0 * S::from_ratio(m as i64, j as i64);
    }
    tau[n - 1] = t[n - 1].clone() * S::from_i64(m as i64);
    tau
}

/// Inverse coordinate change: t from tau, by fixed-point iteration on the
/// triangular residue relations. `qtilde` must be supplied (it depends on
/// t_N only, which is read off directly from tau_N).
pub fn t_of_tau<S: Field>(params: &ModelParams<S>, tau: &[S], qtilde: &S) -> Result<Vec<S>> {
    let (k, m, n) = (params.k, params.m, params.n());
    let mut t: Vec<S> = tau.to_vec();
    t[n - 1] = tau[n - 1].clone() * S::from_i64(m as i64).inv();
    t[k - 1] = tau[k - 1].clone();
    // triangular fixed point; converges in at most max(k, m) rounds
    for _ in 0..=k.max(m) {
        let f = assemble_f(params, &t, qtilde);
        let cur = tau_of_t(params, &t, &f, qtilde);
        let mut done = true;
        for i in 0..n {
            let diff = tau[i].clone() - cur[i].clone();
            if !diff.is_zero() {
                done = false;
                t[i] = t[i].clone() + diff;
            }
        }
        if done {
            return Ok(t);
        }
    }
    // float mode: accept small residuals
    if !S::EXACT {
        return Ok(t);
    }
    Err(Error::internal("triangular inversion did not stabilize"))
}

pub fn assemble_f<S: Field>(params: &ModelParams<S>, t: &[S], qtilde: &S) -> LaurentPoly<S> {
    let (k, m) = (params.k, params.m);
    let mut f = LaurentPoly::monomial(k as i64, S::one());
    for i in 1..=k {
        f.add_term(k as i64 - i as i64, t[i - 1].clone());
    }
    let mut wpow = S::one();
    for j in 1..m {
        wpow = wpow.clone() * qtilde.clone();
        f.add_term(-(j as i64), t[k + j - 1].clone() * wpow.clone());
    }
    f.add_term(
        -(m as i64),
        crate::laurent::int_pow(qtilde, m as i64),
    );
    f
}

/// Jacobian dtau_i/dt_l from the residue formulas:
/// dtau_i/dt_l = -res_inf f^(i/k - 1) (df/dt_l) omega,
/// dtau_(k+m-j)/dt_l = res_0 f^(j/m - 1) (df/dt_l) omega.
fn jac_t2tau<S: Field>(
    params: &ModelParams<S>,
    f: &LaurentPoly<S>,
    df_dt: &[LaurentPoly<S>],
    qtilde: &S,
) -> Mat<S> {
    let (k, m, n) = (params.k, params.m, params.n());
    let mut jac = Mat::zeros(n, n);
    for i in 1..k {
        for l in 0..n {
            // [x^0] of f^(i/k - 1) * df/dt_l with the expansion at infinity
            jac[(i - 1, l)] = frac_power_mul_coeff0_at_inf(f, i as i64 - k as i64, k as i64, &df_dt[l]);
        }
    }
    jac[(k - 1, k - 1)] = S::one();
    for j in 1..m {
        for l in 0..n {
            jac[(k + m - j - 1, l)] =
                frac_power_mul_coeff0_at_zero(f, j as i64 - m as i64, m as i64, &df_dt[l], qtilde);
        }
    }
    jac[(n - 1, n - 1)] = S::from_i64(m as i64);
    jac
}

/// [x^0] of f^(p/k), expanding at x = infinity. p may be any integer with
/// p/k in (0, 1) here; the series in x^(-1) is truncated exactly far enough.
fn frac_power_coeff0_at_inf<S: Field>(f: &LaurentPoly<S>, p: i64, k: i64) -> S {
    // f = x^k (1 + u); f^(p/k) = x^p (1+u)^(p/k); need [x^(-p)] of (1+u)^a.
    let order = p.max(0) as usize;
    let series = one_plus_u_pow_at_inf(f, p, k, order);
    series.get(order).cloned().unwrap_or_else(S::zero)
}

/// [x^0] of f^(p/m), expanding at x = 0 (p/m in (0,1)).
fn frac_power_coeff0_at_zero<S: Field>(f: &LaurentPoly<S>, p: i64, m: i64, qtilde: &S) -> S {
    // f = w^m x^(-m) (1 + v); f^(p/m) = w^p x^(-p) (1+v)^(p/m)
    let order = p.max(0) as usize;
    let series = one_plus_v_pow_at_zero(f, p, m, order);
    let wp = crate::laurent::int_pow(qtilde, p);
    series.get(order).cloned().unwrap_or_else(S::zero) * wp
}

/// [x^0] of f^(a) * g with a = p/k (p negative allowed), expanded at
/// infinity.
fn frac_power_mul_coeff0_at_inf<S: Field>(
    f: &LaurentPoly<S>,
    p: i64,
    k: i64,
    g: &LaurentPoly<S>,
) -> S {
    // f^a = x^p (1+u)^(p/k): term x^(p-d) coeffs[d]; need [x^0] of product
    // with g: x^e from g pairs with d = p + e.
    let max_d = match g.hi() {
        Some(hi) => p + hi,
        None => return S::zero(),
    };
    if max_d < 0 {
        return S::zero();
    }
    let series = one_plus_u_pow_at_inf(f, p, k, max_d as usize);
    let mut acc = S::zero();
    for (e, c) in g.iter() {
        let d = p + e;
        if d >= 0 && (d as usize) < series.len() {
            acc = acc + c.clone() * series[d as usize].clone();
        }
    }
    acc
}

fn frac_power_mul_coeff0_at_zero<S: Field>(
    f: &LaurentPoly<S>,
    p: i64,
    m: i64,
    g: &LaurentPoly<S>,
    qtilde: &S,
) -> S {
    // f^(p/m) = w^p x^(-p) (1 + v)^(p/m), v a series in positive powers of x;
    // term x^(-p+d). With g-term x^e we need d = p - e >= 0.
    let max_d = match g.lo() {
        Some(lo) => p - lo,
        None => return S::zero(),
    };
    if max_d < 0 {
        return S::zero();
    }
    let series = one_plus_v_pow_at_zero(f, p, m, max_d as usize);
    let mut acc = S::zero();
    for (e, c) in g.iter() {
        let d = p - e;
        if d >= 0 && (d as usize) < series.len() {
            acc = acc + c.clone() * series[d as usize].clone();
        }
    }
    acc * crate::laurent::int_pow(qtilde, p)
}

/// Coefficients of (1 + u)^(p/k) in x^(-1) up to the given order, where
/// f = x^k (1 + u).
fn one_plus_u_pow_at_inf<S: Field>(f: &LaurentPoly<S>, p: i64, k: i64, order: usize) -> Vec<S> {
    let lead = f.coeff(k);
    debug_assert!(lead.is_one());
    let mut u = vec![S::zero(); order + 1];
    for (e, c) in f.iter() {
        let d = k - e;
        if d >= 1 && (d as usize) <= order {
            u[d as usize] = c.clone();
        }
    }
    binom_series(&u, p, k, order)
}

/// Coefficients of (1 + v)^(p/m) in x up to the given order, where
/// f = w^m x^(-m) (1 + v).
fn one_plus_v_pow_at_zero<S: Field>(f: &LaurentPoly<S>, p: i64, m: i64, order: usize) -> Vec<S> {
    let trail = f.coeff(-m);
    let trail_inv = trail.inv();
    let mut v = vec![S::zero(); order + 1];
    for (e, c) in f.iter() {
        let d = e + m;
        if d >= 1 && (d as usize) <= order {
            v[d as usize] = c.clone() * trail_inv.clone();
        }
    }
    binom_series(&v, p, m, order)
}

/// (1 + u)^(p/q) for a power series u (u[0] ignored, assumed 0), truncated
/// at `order`.
fn binom_series<S: Field>(u: &[S], p: i64, q: i64, order: usize) -> Vec<S> {
    let mut out = vec![S::zero(); order + 1];
    out[0] = S::one();
    // accumulate powers of u times generalized binomial coefficients
    let mut upow = vec![S::zero(); order + 1];
    upow[0] = S::one();
    let mut coef = S::one();
    for j in 1..=order {
        // upow <- upow * u (truncated)
        let mut next = vec![S::zero(); order + 1];
        for a in 0..=order {
            if upow[a].is_zero() {
                continue;
            }
            for b in 1..=order - a {
                if u[b].is_zero() {
                    continue;
                }
                next[a + b] = next[a + b].clone() + upow[a].clone() * u[b].clone();
            }
        }
        upow = next;
        coef = coef
            * (S::from_ratio(p, q) - S::from_i64(j as i64 - 1))
            * S::from_i64(j as i64).inv();
        if upow.iter().all(|x| x.is_zero()) {
            break;
        }
        for a in 0..=order {
            if !upow[a].is_zero() {
                out[a] = out[a].clone() + coef.clone() * upow[a].clone();
            }
        }
    }
    out
}

/// Two-sided reduction modulo g = x f'(x), whose support is exactly
/// [-m, k] with invertible end coefficients. Returns (reduced, quotient).
pub fn reduce_by_xdf<S: Field>(
    w: &LaurentPoly<S>,
    xdf: &LaurentPoly<S>,
    k: i64,
    m: i64,
) -> Result<(LaurentPoly<S>, LaurentPoly<S>)> {
    let top = xdf.coeff(k);
    let bot = xdf.coeff(-m);
    if top.is_zero() || bot.is_zero() {
        return Err(Error::msg(
            "degenerate derivative: leading or trailing coefficient vanishes",
        ));
    }
    let top_inv = top.inv();
    let bot_inv = bot.inv();
    let mut r = w.clone();
    let mut quot = LaurentPoly::zero();
    // reduce from the top: exponents >= k. The pivot coefficient is
    // cleared explicitly so float-mode rounding cannot leave a residue that
    // would stall the loop.
    while let Some(hi) = r.hi() {
        if hi < k {
            break;
        }
        let c = r.coeff(hi) * top_inv.clone();
        let shift = hi - k;
        r = r.sub(&xdf.mul_xpow(shift).scale(&c));
        let stray = r.coeff(hi);
        r.add_term(hi, -stray);
        quot.add_term(shift, c);
    }
    // then from the bottom: exponents <= -m-1 (top reduction cannot recreate
    // exponents >= k from here)
    while let Some(lo) = r.lo() {
        if lo > -m - 1 {
            break;
        }
        let c = r.coeff(lo) * bot_inv.clone();
        let shift = lo + m;
        r = r.sub(&xdf.mul_xpow(shift).scale(&c));
        let stray = r.coeff(lo);
        r.add_term(lo, -stray);
        quot.add_term(shift, c);
    }
    debug_assert!(r.hi().map_or(true, |h| h <= k - 1));
    debug_assert!(r.lo().map_or(true, |l| l >= -m));
    Ok((r, quot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    fn params(k: usize, m: usize, q: i64) -> ModelParams<Rat> {
        ModelParams::new(k, m, rat(q, 1)).unwrap()
    }

    fn zeros(n: usize) -> Vec<Rat> {
        vec![Rat::zero(); n]
    }

    #[test]
    fn superpotential_examples() {
        // k=1, m=1, Q=1, t=0 -> x + 1/x
        let p = params(1, 1, 1);
        let pt = FrobeniusPoint::build(&p, &zeros(2)).unwrap();
        assert_eq!(pt.f.coeff(1), rat(1, 1));
        assert_eq!(pt.f.coeff(-1), rat(1, 1));
        assert!(pt.f.coeff(0).is_zero());

        // k=2, m=1, Q=1 -> x^2 + 1/x
        let p = params(2, 1, 1);
        let pt = FrobeniusPoint::build(&p, &zeros(3)).unwrap();
        assert_eq!(pt.f.coeff(2), rat(1, 1));
        assert_eq!(pt.f.coeff(-1), rat(1, 1));

        // k=1, m=2, Q=2 -> x + 4 x^(-2)
        let p = params(1, 2, 2);
        let pt = FrobeniusPoint::build(&p, &zeros(3)).unwrap();
        assert_eq!(pt.f.coeff(1), rat(1, 1));
        assert_eq!(pt.f.coeff(-2), rat(4, 1));
        assert!(pt.f.coeff(-1).is_zero());
    }

    #[test]
    fn jacobian_ring_k1m1() {
        // (x^-1)*(x^-1) = 1 modulo <1 - x^-2>
        let p = params(1, 1, 1);
        let pt = FrobeniusPoint::build(&p, &zeros(2)).unwrap();
        let xinv = LaurentPoly::monomial(-1, rat(1, 1));
        let (red, _) = pt.reduce(&xinv.mul(&xinv)).unwrap();
        assert_eq!(red, LaurentPoly::monomial(0, rat(1, 1)));
    }

    #[test]
    fn unit_law() {
        let p = params(2, 3, 1);
        let n = p.n();
        let t: Vec<Rat> = vec![rat(1, 2), rat(-1, 3), rat(2, 1), rat(1, 5), rat(0, 1)];
        let pt = FrobeniusPoint::build(&p, &t).unwrap();
        let e = p.unit_index();
        // A_k = identity
        assert_eq!(pt.a_mats[e], Mat::identity(n));
    }

    #[test]
    fn metric_flat_basis_values() {
        // k=1, m=1: (d1, d2) = 1, (d1, d1) = 0
        let p = params(1, 1, 1);
        let pt = FrobeniusPoint::build(&p, &zeros(2)).unwrap();
        assert_eq!(pt.metric[(0, 1)], rat(1, 1));
        assert!(pt.metric[(0, 0)].is_zero());

        // k=3, m=1: (d1, d2) = 1/3 (indices with i + j = k), (d1, d3) = 0
        let p = params(3, 1, 1);
        let pt = FrobeniusPoint::build(&p, &zeros(4)).unwrap();
        assert_eq!(pt.metric[(0, 1)], rat(1, 3));
        assert!(pt.metric[(0, 2)].is_zero());
        // matches the constant flat metric
        assert_eq!(pt.metric, flat_metric::<Rat>(3, 1));
    }

    #[test]
    fn flat_coordinate_examples() {
        // t1 = tau1 for k >= 2
        let p = params(3, 1, 1);
        let t = vec![rat(1, 2), rat(2, 3), rat(-1, 1), rat(0, 1)];
        let pt = FrobeniusPoint::build(&p, &t).unwrap();
        assert_eq!(pt.tau[0], t[0]);
        // tau_N = m t_N trivially here (t_N = 0)
        assert!(pt.tau[3].is_zero());
        // tau2 = t2 - t1^2/6 for k=3 (binomial expansion of f^(2/3))
        let expected = t[1].clone() - t[0].clone() * t[0].clone() * rat(1, 6);
        assert_eq!(pt.tau[1], expected);
    }

    #[test]
    fn tau_roundtrip() {
        let p = params(2, 3, 2);
        let t = vec![rat(1, 3), rat(-2, 5), rat(1, 2), rat(3, 7), rat(0, 1)];
        let pt = FrobeniusPoint::build(&p, &t).unwrap();
        let back = t_of_tau(&p, &pt.tau, &pt.qtilde).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn hodge_weights_examples() {
        assert_eq!(hodge_weights(1, 1), vec![rat(1, 2), rat(-1, 2)]);
        assert_eq!(hodge_weights(2, 1), vec![rat(0, 1), rat(1, 2), rat(-1, 2)]);
    }

    #[test]
    fn euler_constant_coefficient() {
        let (_, c) = euler_data(2, 3);
        // (1/k + 1/m) m = 1 + m/k
        assert_eq!(c, rat(5, 2));
    }

    #[test]
    fn associativity_random_points() {
        let p = params(2, 2, 1);
        let n = p.n();
        let t = vec![rat(1, 2), rat(-1, 3), rat(2, 5), rat(0, 1)];
        let pt = FrobeniusPoint::build(&p, &t).unwrap();
        for i in 0..n {
            for j in 0..n {
                let ab = pt.a_mats[i].matmul(&pt.a_mats[j]);
                let ba = pt.a_mats[j].matmul(&pt.a_mats[i]);
                assert_eq!(ab, ba, "commutativity failed at ({i},{j})");
            }
        }
        // Frobenius property: g(A_i v, w) = g(v, A_i w)
        for i in 0..n {
            let gm = pt.metric.matmul(&pt.a_mats[i]);
            let mg = pt.a_mats[i].transpose().matmul(&pt.metric);
            assert_eq!(gm, mg, "Frobenius property failed at {i}");
        }
    }
}
