//! Calibration series of the flat connection.
//!
//! Two gauge transformations are computed and checked here:
//!
//! - the lower-triangular series S = 1 + S_1 z^{-1} + ... solving
//!   d_i S = (d_i bullet) S with each S_p polynomial in
//!   (tau_1..tau_N, w) and vanishing when all of them are set to zero;
//! - the upper-triangular series R = 1 + R_1 z + ... attached to a
//!   semi-simple point through the local expansions of the thimble periods
//!   at each critical value.
//!
//! Their quadratic forms W and V drive vertex-operator conjugation and the
//! phase-factor comparisons.

use crate::cseries::{reverse, CSeries};
use crate::error::{Error, Result};
use crate::frobenius::{flat_metric, FrobeniusPoint};
use crate::mat::{mat_residual, Mat};
use crate::mpoly::MPoly;
use crate::scalar::{C64, Field, Rat, Tol};
use crate::semisimple::SemisimpleFrame;
use crate::symfrob::{SymbolicModel, SPoly};
use num::Zero;

/// Lower-triangular calibration: mats[p] is the z^{-p} coefficient.
#[derive(Clone, Debug)]
pub struct SSeries {
    pub mats: Vec<Mat<SPoly>>,
}

/// Upper-triangular stationary-phase series: mats[p] is the z^p coefficient,
/// acting on the canonical frame (metric = identity).
#[derive(Clone, Debug)]
pub struct RSeries {
    pub mats: Vec<Mat<C64>>,
}

impl SSeries {
    pub fn order(&self) -> usize {
        self.mats.len() - 1
    }

    /// Metric adjoint of the z^{-p} coefficient.
    pub fn adjoint(&self, model: &SymbolicModel, p: usize) -> Mat<SPoly> {
        adjoint_sym(model, &self.mats[p])
    }

    /// Evaluate every coefficient at a numeric flat point.
    pub fn eval<T: Field>(&self, model: &SymbolicModel, tau: &[T], w: &T) -> Vec<Mat<T>> {
        self.mats
            .iter()
            .map(|m| model.eval_mat(m, tau, w))
            .collect()
    }
}

fn adjoint_sym(model: &SymbolicModel, a: &Mat<SPoly>) -> Mat<SPoly> {
    let n = model.n();
    let g: Mat<Rat> = flat_metric(model.k, model.m);
    let gi = g.inverse().expect("flat metric invertible");
    let gs = g.map(|r| MPoly::constant(model.nvars, r.clone()));
    let gis = gi.map(|r| MPoly::constant(model.nvars, r.clone()));
    let _ = n;
    gis.matmul(&a.transpose()).matmul(&gs)
}

/// Build the S-series to the given order by integrating the recursion
/// d_i S_p = (d_i bullet) S_{p-1} in the monomial basis, entry by entry.
/// Closedness of the integrand is checked before integration, and the
/// normalization sets every S_p to zero at tau = w = 0.
pub fn s_series(model: &SymbolicModel, order: usize) -> Result<SSeries> {
    let n = model.n();
    let nv = model.nvars;
    let id = Mat::from_fn(n, n, |r, c| {
        MPoly::constant(nv, if r == c { Rat::from_i64(1) } else { Rat::zero() })
    });
    let mut mats = vec![id];
    for p in 1..=order {
        let prev = &mats[p - 1];
        // integrand matrices G_i = A_i S_{p-1}
        let gs: Vec<Mat<SPoly>> = (0..n).map(|i| model.a_mats[i].matmul(prev)).collect();
        // closedness: D_i G_j = D_j G_i entrywise
        for i in 0..n {
            for j in (i + 1)..n {
                for r in 0..n {
                    for c in 0..n {
                        let dij = model.d_tau(i, &gs[j][(r, c)]);
                        let dji = model.d_tau(j, &gs[i][(r, c)]);
                        if !dij.sub(&dji).is_zero() {
                            return Err(Error::internal(format!(
                                "calibration integrand not closed at order {p}, entry ({r},{c}), directions ({i},{j})"
                            )));
                        }
                    }
                }
            }
        }
        let mut sp = Mat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let comps: Vec<SPoly> = (0..n).map(|i| gs[i][(r, c)].clone()).collect();
                sp[(r, c)] = integrate_twisted(model, &comps)?;
            }
        }
        // verify the antiderivative
        for i in 0..n {
            for r in 0..n {
                for c in 0..n {
                    if !model.d_tau(i, &sp[(r, c)]).sub(&gs[i][(r, c)]).is_zero() {
                        return Err(Error::internal(
                            "calibration integration failed verification",
                        ));
                    }
                }
            }
        }
        mats.push(sp);
    }
    Ok(SSeries { mats })
}

/// Solve D_i F = g_i with F(0) = 0 in the ring of polynomials in
/// (tau_1..tau_N, w), where D_N carries the w-twist. The w-graded pieces
/// with positive w-degree j are obtained by inverting d/dtau_N + j/m
/// (nilpotent plus scalar); the w-free piece comes from radial integration.
fn integrate_twisted(model: &SymbolicModel, g: &[SPoly]) -> Result<SPoly> {
    let n = model.n();
    let nv = model.nvars;
    let wv = model.wvar();
    let m = model.m as i64;
    // split by w-degree
    let mut by_j: std::collections::BTreeMap<i32, Vec<SPoly>> = std::collections::BTreeMap::new();
    for (i, gi) in g.iter().enumerate() {
        for (e, c) in crate::symfrob::p_up(gi, nv).iter() {
            let j = e[wv];
            let mut mono = e.clone();
            mono[wv] = 0;
            let slot = by_j
                .entry(j)
                .or_insert_with(|| vec![MPoly::zero(nv); n]);
            slot[i] = slot[i].add(&MPoly::monomial(nv, mono, c.clone()));
        }
    }
    let mut out = MPoly::zero(nv);
    for (j, comps) in by_j {
        if j < 0 {
            return Err(Error::internal("negative deformation power in integrand"));
        }
        let fj = if j == 0 {
            // plain Poincare homotopy formula over the tau variables
            let mut acc = MPoly::zero(nv);
            for (i, gi) in comps.iter().enumerate() {
                for (e, c) in gi.iter() {
                    let tot: i32 = e.iter().sum();
                    let mut exp = e.clone();
                    exp[i] += 1;
                    acc.add_term(
                        exp,
                        c.clone() * Rat::from_ratio(1, (tot + 1) as i64),
                    );
                }
            }
            acc
        } else {
            // invert d/dtau_N + j/m on the tau_N-polynomial component
            let lam = Rat::from_ratio(j as i64, m);
            let lam_inv = lam.inv();
            let gn = &comps[n - 1];
            let mut acc = MPoly::zero(nv);
            let mut term = gn.scale(&lam_inv);
            loop {
                acc = acc.add(&term);
                let d = term.deriv(n - 1);
                if d.is_zero() {
                    break;
                }
                term = d.scale(&(-lam_inv.clone()));
            }
            acc
        };
        out = out.add(&fj.mul_var_pow(wv, j));
    }
    Ok(out)
}

/// Residual of the symplectic condition S*(-z) S(z) = 1 up to the series
/// order: the z^{-p} coefficient sum_(a+b=p) (-1)^a S_a* S_b must vanish.
pub fn check_symplectic_s(model: &SymbolicModel, s: &SSeries) -> Result<()> {
    let n = model.n();
    for p in 1..=s.order() {
        let mut acc: Mat<SPoly> = Mat::zeros(n, n);
        for a in 0..=p {
            let b = p - a;
            let term = s.adjoint(model, a).matmul(&s.mats[b]);
            acc = if a % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        if !acc.is_zero() {
            return Err(Error::internal(format!(
                "symplectic condition fails at order {p}"
            )));
        }
    }
    Ok(())
}

/// The quadratic form of the lower-triangular action:
/// sum W_(kl) w^-k z^-l = (S*(w) S(z) - 1) / (w^-1 + z^-1).
/// Returns W_(kl) for k + l <= order - 1; errors when the pole fails to
/// cancel (which would mean S is not symplectic).
pub fn w_form(model: &SymbolicModel, s: &SSeries) -> Result<Vec<Vec<Mat<SPoly>>>> {
    let n = model.n();
    let ord = s.order();
    let size = ord; // W_(kl) for k, l with k + l + 1 <= ord
    let mut w = vec![vec![Mat::<SPoly>::zeros(n, n); size]; size];
    // W_(a,0) = S*_(a+1); W_(a,b) = S*_(a+1) S_b - W_(a+1, b-1)
    for b in 0..size {
        for a in (0..size).rev() {
            if a + b + 1 > ord {
                continue;
            }
            let mut v = s.adjoint(model, a + 1).matmul(&s.mats[b]);
            if b > 0 && a + 1 < size {
                v = v.sub(&w[a + 1][b - 1]);
            }
            w[a][b] = v;
        }
    }
    // pole cancellation: the a = 0 relation demands W_(0, b-1) = S_b
    for b in 1..=size.min(ord) {
        if b - 1 < size {
            let diff = w[0][b - 1].sub(&s.mats[b]);
            if !diff.is_zero() {
                return Err(Error::internal(
                    "apparent pole did not cancel in the W form",
                ));
            }
        }
    }
    Ok(w)
}

/// Build the R-series at a semi-simple point from the local expansions of
/// the thimble periods: near the critical value u_i,
/// the half-thimble period has the expansion
/// (1_i + sum_l A_(i,l) [2(lam - u_i)]^l) / sqrt(2(lam - u_i)),
/// and Psi R_l e_i = (-1)^l (2l-1)!! A_(i,l).
pub fn r_series(
    pt: &FrobeniusPoint<C64>,
    frame: &SemisimpleFrame,
    order: usize,
    tol: Tol,
) -> Result<RSeries> {
    let n = pt.n();
    let g: Mat<C64> = flat_metric(pt.params.k, pt.params.m);
    let g_inv = g.inverse().unwrap();
    let mut mats = vec![Mat::<C64>::identity(n); order + 1];
    for l in 1..=order {
        mats[l] = Mat::zeros(n, n);
    }
    for i in 0..n {
        // odd coefficient tables per flat direction
        let cov = thimble_covector_expansions(pt, frame, i, order)?;
        // cov[j] = series in s with only odd powers: (2/s)(c_0 + c_1 s^2 + ...)
        // per component j; c_l are covector entries of A_(i,l) (c_0 of 1_i).
        for l in 0..=order {
            let covec: Vec<C64> = (0..n).map(|j| cov[j].coeff(2 * l as i64 - 1) / 2.0).collect();
            let vec = g_inv.mul_vec(&covec);
            if l == 0 {
                // branch consistency: must reproduce the Psi column
                let psi_col = frame.psi.col(i);
                let mut resid = 0.0f64;
                for r in 0..n {
                    resid = resid.max((vec[r] - psi_col[r]).norm());
                }
                if resid > tol.abs.max(1e-8) {
                    return Err(Error::internal(format!(
                        "leading thimble coefficient disagrees with the frame at {i} (residual {resid:.2e})"
                    )));
                }
                continue;
            }
            // R_l column i = (-1)^l (2l-1)!! Psi^{-1} A_(i,l)
            let mut coli = frame.psi_inv.mul_vec(&vec);
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let df = double_factorial(2 * l as i64 - 1);
            for r in 0..n {
                coli[r] = coli[r] * sign * df;
            }
            for r in 0..n {
                mats[l][(r, i)] = coli[r];
            }
        }
    }
    Ok(RSeries { mats })
}

/// For each flat direction j, the expansion in s = sqrt(2(lam - u_i)) of the
/// difference of the one-point period integrands over the two branches
/// meeting at critical point i.
fn thimble_covector_expansions(
    pt: &FrobeniusPoint<C64>,
    frame: &SemisimpleFrame,
    i: usize,
    order: usize,
) -> Result<Vec<CSeries>> {
    let n = pt.n();
    let qi = frame.q[i];
    let nterms = 2 * order + 6;
    // Taylor data of f - u_i and x f' at q_i
    let mut fser = pt.f.taylor_at(&qi, nterms);
    fser[0] = C64::new(0.0, 0.0); // f - u_i (clear rounding)
    fser[1] = C64::new(0.0, 0.0); // critical point (clear rounding)
    let mut xdfser = pt.xdf.taylor_at(&qi, nterms);
    xdfser[0] = C64::new(0.0, 0.0);
    // s(delta) = sqrt(2 (f - u_i)); branch fixed by sqrt(2 a2) = sqrt(Delta_i)/q_i
    let two_f = CSeries::new(2, fser[2..].to_vec()).scale(C64::new(2.0, 0.0));
    let lead_root = frame.sqrt_delta[i] / qi;
    let s_of_d = two_f.sqrt_with(lead_root, nterms - 2);
    // delta(s) by reversion
    let d_of_s = reverse(&s_of_d, nterms - 2);
    let den = CSeries::new(1, xdfser[1..].to_vec());
    let den_inv = den.recip(nterms - 2);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let num = CSeries::new(0, pt.df_dtau[j].taylor_at(&qi, nterms));
        let v_of_d = num.mul(&den_inv, nterms - 2); // valuation -1 in delta
        // substitute delta = d_of_s, then take branch difference = 2 * odd part
        let v_of_s = v_of_d.compose(&d_of_s, nterms - 2);
        out.push(v_of_s.odd_part().scale(C64::new(2.0, 0.0)));
    }
    Ok(out)
}

pub fn double_factorial(n: i64) -> f64 {
    // (2l-1)!! with (-1)!! = 1
    let mut acc = 1.0;
    let mut v = n;
    while v >= 2 {
        acc *= v as f64;
        v -= 2;
    }
    acc
}

/// Residual of R*(-z) R(z) = 1 through the available order (adjoint =
/// transpose in the canonical frame).
pub fn check_symplectic_r(r: &RSeries) -> f64 {
    let n = r.mats[0].rows;
    let mut worst = 0.0f64;
    for p in 1..r.mats.len() {
        let mut acc: Mat<C64> = Mat::zeros(n, n);
        for a in 0..=p {
            let b = p - a;
            let term = r.mats[a].transpose().matmul(&r.mats[b]);
            let term = if a % 2 == 0 { term } else { term.neg() };
            acc = acc.add(&term);
        }
        worst = worst.max(mat_residual(&acc, &Mat::zeros(n, n)));
    }
    worst
}

/// V form of the upper-triangular series:
/// sum V_(kl) w^k z^l = (1 - R(w) R*(z)) / (w + z).
pub fn v_form(r: &RSeries) -> Result<Vec<Vec<Mat<C64>>>> {
    let n = r.mats[0].rows;
    let ord = r.mats.len() - 1;
    let size = ord;
    let mut v = vec![vec![Mat::<C64>::zeros(n, n); size]; size];
    // relation: V_(a-1,b) + V_(a,b-1) = -R_a R*_b; edge V_(a,0) = -R_(a+1)
    for b in 0..size {
        for a in (0..size).rev() {
            if a + b + 1 > ord {
                continue;
            }
            let mut val = r.mats[a + 1].matmul(&r.mats[b].transpose()).neg();
            if b > 0 && a + 1 < size {
                val = val.sub(&v[a + 1][b - 1]);
            }
            v[a][b] = val;
        }
    }
    Ok(v)
}

/// Residual of the defining identity of the V form:
/// (w + z) sum V_(kl) w^k z^l = 1 - R(w) R*(z) through the order.
pub fn v_form_residual(r: &RSeries, v: &[Vec<Mat<C64>>]) -> f64 {
    let n = r.mats[0].rows;
    let ord = r.mats.len() - 1;
    let mut worst = 0.0f64;
    for a in 0..=ord {
        for b in 0..=ord {
            if a + b > ord || a + b == 0 {
                continue;
            }
            // coefficient of w^a z^b of (w+z) V  =  V_(a-1,b) + V_(a,b-1)
            let mut lhs: Mat<C64> = Mat::zeros(n, n);
            if a >= 1 && a - 1 < v.len() && b < v[0].len() {
                lhs = lhs.add(&v[a - 1][b]);
            }
            if b >= 1 && a < v.len() && b - 1 < v[0].len() {
                lhs = lhs.add(&v[a][b - 1]);
            }
            let rhs = r.mats[a].matmul(&r.mats[b].transpose()).neg();
            worst = worst.max(mat_residual(&lhs, &rhs));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::ModelParams;
    use crate::symfrob::p_eval;

    fn sym(k: usize, m: usize) -> SymbolicModel {
        SymbolicModel::build(&ModelParams::new(k, m, Rat::from_i64(1)).unwrap()).unwrap()
    }

    #[test]
    fn s1_k1m1_matches_one_step_recursion() {
        // For k = m = 1: S_1 = [[tau_1, w], [tau_2, tau_1]] solves
        // d_1 S_1 = Id, d_2 S_1 = A_2 with S_1(0) = 0.
        let md = sym(1, 1);
        let s = s_series(&md, 2).unwrap();
        let s1 = &s.mats[1];
        let t1 = MPoly::<Rat>::var(md.nvars, 0);
        let t2 = MPoly::<Rat>::var(md.nvars, 1);
        let w = MPoly::<Rat>::var(md.nvars, md.wvar());
        assert!(s1[(0, 0)].sub(&t1).is_zero());
        assert!(s1[(1, 1)].sub(&t1).is_zero());
        assert!(s1[(0, 1)].sub(&w).is_zero());
        assert!(s1[(1, 0)].sub(&t2).is_zero());
    }

    #[test]
    fn s1_pairs_to_t_n() {
        // (S_1 d_k, d_k) = tau_N / m for several models
        for (k, m) in [(1usize, 1usize), (2, 1), (1, 2), (2, 3)] {
            let md = sym(k, m);
            let s = s_series(&md, 1).unwrap();
            let n = md.n();
            let g: Mat<SPoly> =
                flat_metric::<Rat>(k, m).map(|r| MPoly::constant(md.nvars, r.clone()));
            // column k-1 of S_1, paired with d_k
            let col = s.mats[1].col(k - 1);
            let mut pair = MPoly::zero(md.nvars);
            for r in 0..n {
                pair = pair.add(&g[(k - 1, r)].mul(&col[r]));
            }
            let want = MPoly::<Rat>::var(md.nvars, n - 1)
                .scale(&Rat::from_ratio(1, m as i64));
            assert!(pair.sub(&want).is_zero(), "failed for ({k},{m})");
        }
    }

    #[test]
    fn s_vanishes_at_origin() {
        let md = sym(2, 1);
        let s = s_series(&md, 3).unwrap();
        let zeros = vec![Rat::zero(); md.nvars];
        for p in 1..=3 {
            for (_, _, e) in s.mats[p].entries() {
                assert!(p_eval::<Rat>(e, &zeros, md.nvars).is_zero());
            }
        }
    }

    #[test]
    fn symplectic_s_small_orders() {
        for (k, m) in [(1usize, 1usize), (2, 1)] {
            let md = sym(k, m);
            let s = s_series(&md, 4).unwrap();
            check_symplectic_s(&md, &s).unwrap();
        }
    }

    #[test]
    fn w_form_edge_values() {
        // W_00 = S_1 and the pole cancels
        let md = sym(1, 1);
        let s = s_series(&md, 3).unwrap();
        let w = w_form(&md, &s).unwrap();
        assert!(w[0][0].sub(&s.mats[1]).is_zero());
    }

    #[test]
    fn negative_symplectic_check() {
        // perturbing S_1 by a non-self-adjoint matrix must break the check
        let md = sym(1, 1);
        let mut s = s_series(&md, 2).unwrap();
        let bump = MPoly::constant(md.nvars, Rat::from_i64(1));
        let cur = s.mats[1][(0, 1)].clone();
        s.mats[1][(0, 1)] = cur.add(&bump);
        assert!(check_symplectic_s(&md, &s).is_err());
    }

    fn cpoint(k: usize, m: usize, t: &[f64]) -> FrobeniusPoint<C64> {
        let params = ModelParams::new(k, m, C64::new(1.0, 0.0)).unwrap();
        let tv: Vec<C64> = t.iter().map(|&x| C64::new(x, 0.0)).collect();
        FrobeniusPoint::build(&params, &tv).unwrap()
    }

    #[test]
    fn r_series_symplectic_k1m1() {
        let pt = cpoint(1, 1, &[0.0, 0.0]);
        let frame = crate::semisimple::critical_frame(&pt, Tol::default()).unwrap();
        let r = r_series(&pt, &frame, 3, Tol::default()).unwrap();
        let resid = check_symplectic_r(&r);
        assert!(resid < 1e-8, "residual {resid}");
        // V form consistency
        let v = v_form(&r).unwrap();
        assert!(v_form_residual(&r, &v) < 1e-8);
        // V_00 = -R_1
        assert!(mat_residual(&v[0][0], &r.mats[1].neg()) < 1e-10);
    }

    #[test]
    fn r_series_symplectic_k2m1_at_random_point() {
        let pt = cpoint(2, 1, &[0.13, -0.07, 0.05]);
        let frame = crate::semisimple::critical_frame(&pt, Tol::default()).unwrap();
        let r = r_series(&pt, &frame, 3, Tol::default()).unwrap();
        assert!(check_symplectic_r(&r) < 1e-8);
    }
}
