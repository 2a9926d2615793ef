//! Period vectors over one-point cycles, the invariant cycle, and Lefschetz
//! thimbles: exact towers from the defining recursions, closed forms at
//! lam = infinity, numeric towers along paths with branch tracking, local
//! expansions at critical values, and monodromy bookkeeping.
//!
//! Mode convention: a period family I^(n) satisfies d/dlam I^(n) = I^(n+1),
//! and the generating series sums I^(n) (-z)^n over the computed window.

use crate::calibration::{double_factorial, RSeries};
use crate::error::{Error, Result};
use crate::frobenius::{flat_metric, hodge_weights, FrobeniusPoint};
use crate::mat::Mat;
use crate::mpoly::MPoly;
use crate::puiseux::LogPuiseux;
use crate::scalar::{C64, Field, Rat};
use crate::semisimple::SemisimpleFrame;
use num::Zero;

/// H-vector with series entries: one lam-series per flat component.
pub type PVec<S> = Vec<LogPuiseux<S>>;

/// A window of consecutive modes n_min ..= n_max.
#[derive(Clone, Debug)]
pub struct PeriodTower<S> {
    pub n_min: i64,
    pub n_max: i64,
    pub modes: Vec<PVec<S>>,
}

impl<S: Field> PeriodTower<S> {
    pub fn mode(&self, n: i64) -> &PVec<S> {
        assert!(n >= self.n_min && n <= self.n_max, "mode outside window");
        &self.modes[(n - self.n_min) as usize]
    }
}

/// Tags for the cycles whose periods we expand at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleTag {
    /// Branch near x = infinity, 1-based a in 1..=k.
    A(usize),
    /// Branch near x = 0, 1-based b in k+1..=k+m.
    B(usize),
    /// The invariant cycle normalized against omega.
    Phi,
}

fn zero_vec<S: Field>(n: usize, ram: i64) -> PVec<S> {
    (0..n).map(|_| LogPuiseux::zero(ram)).collect()
}

fn apply_mat<S: Field>(m: &Mat<S>, v: &PVec<S>) -> PVec<S> {
    let n = m.rows;
    (0..n)
        .map(|r| {
            let mut acc = LogPuiseux::zero(v[0].ram());
            for c in 0..n {
                if !m[(r, c)].is_zero() {
                    acc = acc.add(&v[c].scale(&m[(r, c)]));
                }
            }
            acc
        })
        .collect()
}

fn mul_lambda<S: Field>(v: &PVec<S>) -> PVec<S> {
    v.iter().map(|s| s.mul_term(s.ram(), s.ram(), &S::one())).collect()
}

#[allow(dead_code)]
fn d_lambda<S: Field>(v: &PVec<S>) -> PVec<S> {
    v.iter().map(|s| s.d_dlam()).collect()
}

/// The tower of the invariant cycle at a point: zero for n >= 0, the raised
/// unit covector at n = -1, and deeper modes from
/// (mu + n - 1/2) I^(-n) = (lam - E bullet) I^(-n+1).
pub fn phi_tower<S: Field>(pt: &FrobeniusPoint<S>, n_min: i64, n_max: i64) -> Result<PeriodTower<S>> {
    let n = pt.n();
    let (k, m) = (pt.params.k, pt.params.m);
    let mu = hodge_weights(k, m);
    let e_mult = pt.euler_mult();
    let mut modes_rev: Vec<PVec<S>> = Vec::new();
    // seed: I^(-1) = raised d tau_k = m e_N, constant in lam
    let mut seed = zero_vec(n, 1);
    seed[n - 1] = LogPuiseux::constant(S::from_i64(m as i64));
    // positive modes vanish
    let mut cur = seed.clone();
    for nn in 2..=(-n_min).max(1) {
        // (mu + nn - 1/2) I^(-nn) = (lam - E) I^(-nn+1)
        let rhs = {
            let lam_part = mul_lambda(&cur);
            let e_part = apply_mat(&e_mult, &cur);
            lam_part
                .iter()
                .zip(&e_part)
                .map(|(a, b)| a.sub(b))
                .collect::<PVec<S>>()
        };
        let next: PVec<S> = (0..n)
            .map(|r| {
                let d = S::from_rat(&mu[r]) + S::from_i64(nn) - S::from_ratio(1, 2);
                rhs[r].scale(&d.inv())
            })
            .collect();
        modes_rev.push(cur);
        cur = next;
    }
    modes_rev.push(cur);
    // assemble: modes_rev holds modes -1, -2, ..., n_min (in that order)
    let mut modes: Vec<PVec<S>> = Vec::new();
    for nn in (n_min..=-1).rev() {
        let idx = (-nn - 1) as usize;
        modes.push(modes_rev[idx].clone());
    }
    modes.reverse();
    for _ in 0..=n_max {
        modes.push(zero_vec(n, 1));
    }
    Ok(PeriodTower {
        n_min,
        n_max,
        modes,
    })
}

/// Exact coefficients for the closed forms at lam = infinity. The scalar
/// type carries one formal symbol: the logarithm of Q (variable 0), so every
/// coefficient lives in Q[log Q].
pub type InfCoeff = MPoly<Rat>;

fn icon(r: Rat) -> InfCoeff {
    MPoly::constant(1, r)
}

fn ilogq() -> InfCoeff {
    MPoly::var(1, 0)
}

/// Falling ratio c_n(nu) = prod_(l=-inf..n) (nu - l) / prod_(l=-inf..0) (nu - l):
/// c_0 = 1, c_n = c_(n-1)(nu - n) upward, c_(n-1) = c_n/(nu - n) downward.
fn mode_ratio(nu: Rat, n: i64) -> Rat {
    let mut c = Rat::from_i64(1);
    if n >= 0 {
        for l in 1..=n {
            c *= nu.clone() - Rat::from_i64(l);
        }
    } else {
        for l in (n + 1)..=0 {
            c /= nu.clone() - Rat::from_i64(l);
        }
    }
    c
}

/// Closed-form period tower at infinity for a one-point branch or the
/// invariant cycle, exact, with branch-independent coefficients. Branch
/// choices (which k-th root, the 2 pi i shifts of log lam) only enter when
/// the series is evaluated numerically.
pub fn infinity_closed_tower(
    k: usize,
    m: usize,
    tag: CycleTag,
    n_min: i64,
    n_max: i64,
) -> PeriodTower<InfCoeff> {
    let n = k + m;
    let mut modes = Vec::new();
    for mode in n_min..=n_max {
        let mut v: PVec<InfCoeff> = match tag {
            CycleTag::Phi => zero_vec(n, 1),
            CycleTag::A(_) => zero_vec(n, k as i64),
            CycleTag::B(_) => zero_vec(n, m as i64),
        };
        match tag {
            CycleTag::Phi => {
                // sum_(p>=0) lam^p/p! dtau_k (-z)^(-p-1): mode -p-1 has
                // coefficient lam^p/p! on the raised unit covector.
                if mode <= -1 {
                    let p = -mode - 1;
                    v[n - 1] = LogPuiseux::term(
                        1,
                        p,
                        icon(Rat::from_i64(m as i64) / factorial(p)),
                    );
                }
            }
            CycleTag::A(_) => {
                for i in 1..k {
                    let nu = Rat::from_ratio(i as i64, k as i64);
                    let c = mode_ratio(nu, mode);
                    // exponent i/k - mode - 1
                    let num = i as i64 - (mode + 1) * k as i64;
                    v[i - 1] = LogPuiseux::term(k as i64, num, icon(c));
                }
                // g-part / k on the raised unit covector
                let gv = g_infinity_mode(mode, m, false);
                v[n - 1] = v[n - 1].add(&gv.scale(&icon(Rat::from_ratio(1, k as i64))));
            }
            CycleTag::B(_) => {
                for j in 1..=m {
                    let nu = Rat::from_ratio(j as i64, m as i64);
                    let c = -mode_ratio(nu, mode);
                    let num = j as i64 - (mode + 1) * m as i64;
                    // direction d_(k+m-j)
                    let idx = k + m - j - 1;
                    v[idx] = v[idx].add(&LogPuiseux::term(m as i64, num, icon(c)));
                }
                let gv = g_infinity_mode(mode, m, true);
                v[n - 1] = v[n - 1].add(&gv.scale(&icon(-Rat::from_ratio(1, m as i64))));
            }
        }
        modes.push(v);
    }
    PeriodTower {
        n_min,
        n_max,
        modes,
    }
}

/// One mode of the logarithmic part:
/// for mode -p-1 (p >= 0): lam^p/p! (log lam [- m log Q] - C_p) m
/// for mode p >= 0: (-1)^p p! lam^(-p-1) m.
/// Lives on the d_N component (the raised unit covector is m e_N).
fn g_infinity_mode(mode: i64, m: usize, with_q: bool) -> LogPuiseux<InfCoeff> {
    let mm = Rat::from_i64(m as i64);
    if mode <= -1 {
        let p = -mode - 1;
        let inv_fact = mm.clone() / factorial(p);
        let mut s = LogPuiseux::log_term(p, icon(inv_fact.clone()));
        let mut constant = -harmonic(p) * inv_fact.clone();
        if with_q {
            // log(lam Q^-m) = log lam - m log Q
            s = s.add(&LogPuiseux::term(
                1,
                p,
                ilogq().scale(&(-Rat::from_i64(m as i64) * inv_fact.clone())),
            ));
        }
        let _ = &mut constant;
        s.add(&LogPuiseux::term(1, p, icon(constant)))
    } else {
        // z^p = (-1)^p (-z)^p
        let sign = if mode % 2 == 0 {
            Rat::from_i64(1)
        } else {
            Rat::from_i64(-1)
        };
        LogPuiseux::term(1, -mode - 1, icon(sign * factorial(mode) * mm))
    }
}

pub fn factorial(p: i64) -> Rat {
    let mut acc = Rat::from_i64(1);
    for v in 2..=p {
        acc *= Rat::from_i64(v);
    }
    acc
}

pub fn harmonic(p: i64) -> Rat {
    let mut acc = Rat::zero();
    for v in 1..=p {
        acc += Rat::from_ratio(1, v);
    }
    acc
}

/// Recursion-side tower at infinity: seeded with the mode -1 closed form,
/// deeper and higher modes generated from
/// (lam - rho) I^(n+1) = (mu - n - 1/2) I^(n) + (1/k) I_phi^(n),
/// where rho is the classical multiplication by the Euler constant term
/// (nilpotent of square zero).
pub fn infinity_recursion_tower(
    k: usize,
    m: usize,
    tag: CycleTag,
    n_min: i64,
    n_max: i64,
) -> Result<PeriodTower<InfCoeff>> {
    let n = k + m;
    let mu = hodge_weights(k, m);
    let closed = infinity_closed_tower(k, m, tag, -1, -1);
    let seed = closed.mode(-1).clone();
    let phi = infinity_closed_tower(k, m, CycleTag::Phi, n_min.min(-1), n_max.max(0));
    let one_over_k = match tag {
        CycleTag::A(_) | CycleTag::B(_) => Rat::from_ratio(1, k as i64),
        CycleTag::Phi => Rat::zero(),
    };
    // rho = cup multiplication by (1/k + 1/m) m d_N: sends d_k to that
    // multiple of d_N, kills the rest.
    let rho_coeff = (Rat::from_ratio(1, k as i64) + Rat::from_ratio(1, m as i64))
        * Rat::from_i64(m as i64);

    let ram = seed.iter().map(|s| s.ram()).max().unwrap_or(1);
    let seed: PVec<InfCoeff> = seed.iter().map(|s| s.reramify(ram)).collect();

    let apply_rho = |v: &PVec<InfCoeff>| -> PVec<InfCoeff> {
        let mut out = zero_vec(n, ram);
        out[n - 1] = v[k - 1].scale(&icon(rho_coeff.clone()));
        out
    };
    // (lam - rho)^{-1} u = lam^{-1} u + lam^{-2} rho u (rho^2 = 0)
    let inv_lam_minus_rho = |u: &PVec<InfCoeff>| -> PVec<InfCoeff> {
        let linv: PVec<InfCoeff> = u
            .iter()
            .map(|s| s.mul_term(-ram, ram, &icon(Rat::from_i64(1))))
            .collect();
        let rho_u = apply_rho(u);
        linv.iter()
            .zip(rho_u.iter().map(|s| {
                s.mul_term(-2 * ram, ram, &icon(Rat::from_i64(1)))
            }))
            .map(|(a, b)| a.add(&b))
            .collect()
    };

    let mut down: Vec<PVec<InfCoeff>> = vec![seed.clone()];
    // downward: (mu - n - 1/2) I^(n) = (lam - rho) I^(n+1) - (1/k) I_phi^(n)
    // at n = -nn, solved for I^(n) with diagonal inversion.
    let mut cur = seed.clone();
    for nn in 2..=(-n_min).max(1) {
        let nmode = -nn; // computing I^(nmode) from I^(nmode+1)
        let lam_part = mul_lambda(&cur);
        let rho_part = apply_rho(&cur);
        let mut rhs: PVec<InfCoeff> = lam_part
            .iter()
            .zip(&rho_part)
            .map(|(a, b)| a.sub(b))
            .collect();
        if !one_over_k.is_zero() {
            let phi_mode = phi.mode(nmode);
            for r in 0..n {
                rhs[r] = rhs[r].sub(&phi_mode[r].reramify(ram).scale(&icon(one_over_k.clone())));
            }
        }
        let next: PVec<InfCoeff> = (0..n)
            .map(|r| {
                let d = mu[r].clone() - Rat::from_i64(nmode) - Rat::from_ratio(1, 2);
                rhs[r].scale(&icon(d.inv()))
            })
            .collect();
        down.push(next.clone());
        cur = next;
    }
    // upward from the seed: I^(n+1) = (lam - rho)^{-1} [(mu - n - 1/2) I^(n)
    // + (1/k) I_phi^(n)]
    let mut up: Vec<PVec<InfCoeff>> = Vec::new();
    let mut cur = seed.clone();
    for nmode in -1..n_max {
        let mut rhs: PVec<InfCoeff> = (0..n)
            .map(|r| {
                let d = mu[r].clone() - Rat::from_i64(nmode) - Rat::from_ratio(1, 2);
                cur[r].scale(&icon(d))
            })
            .collect();
        if !one_over_k.is_zero() && nmode <= -1 {
            let phi_mode = phi.mode(nmode);
            for r in 0..n {
                rhs[r] = rhs[r].add(&phi_mode[r].reramify(ram).scale(&icon(one_over_k.clone())));
            }
        }
        let next = inv_lam_minus_rho(&rhs);
        up.push(next.clone());
        cur = next;
    }
    let mut modes = Vec::new();
    for nmode in n_min..=n_max {
        if nmode <= -1 {
            modes.push(down[(-nmode - 1) as usize].clone());
        } else {
            modes.push(up[nmode as usize].clone());
        }
    }
    Ok(PeriodTower {
        n_min,
        n_max,
        modes,
    })
}

// ---------------------------------------------------------------------------
// numeric one-point periods along paths

/// Piecewise-linear path in the lam plane.
#[derive(Clone, Debug)]
pub struct CyclePath {
    pub waypoints: Vec<C64>,
    /// Minimum allowed distance to any critical value.
    pub min_dist: f64,
}

impl CyclePath {
    pub fn new(waypoints: Vec<C64>) -> Self {
        CyclePath {
            waypoints,
            min_dist: 1e-3,
        }
    }
}

/// The N solutions of f(x) = lam with continuously tracked logarithms.
#[derive(Clone, Debug)]
pub struct RootTracker {
    pub lambda: C64,
    pub x: Vec<C64>,
    pub log_x: Vec<C64>,
}

fn eval_dfdx(pt: &FrobeniusPoint<C64>, x: C64) -> C64 {
    // f'(x) = (x f')(x) / x
    pt.xdf.eval(&x) / x
}

impl RootTracker {
    /// Initialize at a large positive lam with the standard branch labels:
    /// a = 1..k near infinity ordered by the k-th root choice, then
    /// b = k+1..k+m near zero ordered by the m-th root choice.
    pub fn init_standard(pt: &FrobeniusPoint<C64>, lambda: C64) -> Result<RootTracker> {
        let (k, m) = (pt.params.k, pt.params.m);
        let n = pt.n();
        let mut shifted = pt.f.clone();
        shifted.add_term(0, -lambda);
        let roots = crate::roots::laurent_roots(&shifted)?;
        if roots.len() != n {
            return Err(Error::msg(format!(
                "expected {n} solutions, found {}",
                roots.len()
            )));
        }
        let log_lam = lambda.ln();
        let mut x = vec![C64::new(0.0, 0.0); n];
        let mut log_x = vec![C64::new(0.0, 0.0); n];
        let mut used = vec![false; n];
        // branches near infinity: x_a ~ lam^(1/k) e^(2 pi i (a-1)/k)
        for a in 1..=k {
            let expected = ((log_lam
                + C64::new(0.0, 2.0 * std::f64::consts::PI * (a as f64 - 1.0)))
                / k as f64)
                .exp();
            let (idx, _) = roots
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|(_, p), (_, q)| {
                    (*p - expected)
                        .norm()
                        .partial_cmp(&(*q - expected).norm())
                        .unwrap()
                })
                .ok_or_else(|| Error::internal("branch matching exhausted"))?;
            used[idx] = true;
            x[a - 1] = roots[idx];
            let expected_log =
                (log_lam + C64::new(0.0, 2.0 * std::f64::consts::PI * (a as f64 - 1.0)))
                    / k as f64;
            log_x[a - 1] = log_with_branch(roots[idx], expected_log);
        }
        // branches near zero: x_b ~ w lam^(-1/m) e^(2 pi i (b-k-1)/m)
        let w = pt.qtilde;
        for b in k + 1..=n {
            let j = (b - k - 1) as f64;
            let expected_log = w.ln()
                + (-log_lam + C64::new(0.0, 2.0 * std::f64::consts::PI * j)) / m as f64;
            let expected = expected_log.exp();
            let (idx, _) = roots
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|(_, p), (_, q)| {
                    (*p - expected)
                        .norm()
                        .partial_cmp(&(*q - expected).norm())
                        .unwrap()
                })
                .ok_or_else(|| Error::internal("branch matching exhausted"))?;
            used[idx] = true;
            x[b - 1] = roots[idx];
            log_x[b - 1] = log_with_branch(roots[idx], expected_log);
        }
        Ok(RootTracker { lambda, x, log_x })
    }

    /// Continue all roots to a new lam along the straight segment, adaptive
    /// in the step size. Fails near the discriminant.
    pub fn continue_to(&mut self, pt: &FrobeniusPoint<C64>, target: C64, min_dist: f64) -> Result<()> {
        let mut remaining = target - self.lambda;
        while remaining.norm() > 0.0 {
            // conservative step: fraction of distance to the discriminant,
            // estimated by min |f'(x_i)| * |x_i| scale
            let mut scale = f64::INFINITY;
            for &xi in &self.x {
                let fp = eval_dfdx(pt, xi).norm();
                scale = scale.min(fp * xi.norm());
            }
            if scale < min_dist * 1e-3 {
                return Err(Error::PathNearDiscriminant {
                    dist: scale,
                    min: min_dist * 1e-3,
                });
            }
            let step_len = (0.2 * scale).min(remaining.norm());
            let step = remaining * (step_len / remaining.norm());
            let next = self.lambda + step;
            self.step_once(pt, next)?;
            remaining = target - self.lambda;
        }
        Ok(())
    }

    fn step_once(&mut self, pt: &FrobeniusPoint<C64>, next: C64) -> Result<()> {
        let mut new_x = Vec::with_capacity(self.x.len());
        let mut new_log = Vec::with_capacity(self.x.len());
        for (xi, li) in self.x.iter().zip(&self.log_x) {
            // predictor: dx/dlam = 1/f'
            let fp = eval_dfdx(pt, *xi);
            if fp.norm() < 1e-13 {
                return Err(Error::PathNearDiscriminant {
                    dist: fp.norm(),
                    min: 1e-13,
                });
            }
            let mut x = xi + (next - self.lambda) / fp;
            // corrector: Newton on f(x) = next
            for _ in 0..40 {
                let r = pt.f.eval(&x) - next;
                let fpx = eval_dfdx(pt, x);
                if fpx.norm() < 1e-13 {
                    return Err(Error::PathNearDiscriminant {
                        dist: fpx.norm(),
                        min: 1e-13,
                    });
                }
                let d = r / fpx;
                x -= d;
                if d.norm() < 1e-14 * (1.0 + x.norm()) {
                    break;
                }
            }
            let ratio = x / xi;
            if (ratio - 1.0).norm() > 0.8 {
                return Err(Error::msg(
                    "continuation step too large; refine the path",
                ));
            }
            new_log.push(li + ratio.ln());
            new_x.push(x);
        }
        // guard against collisions (crossing the discriminant)
        for i in 0..new_x.len() {
            for j in i + 1..new_x.len() {
                if (new_x[i] - new_x[j]).norm() < 1e-10 {
                    return Err(Error::msg("roots collided during continuation"));
                }
            }
        }
        self.x = new_x;
        self.log_x = new_log;
        self.lambda = next;
        Ok(())
    }

    /// Follow a piecewise-linear path through all waypoints.
    pub fn follow(&mut self, pt: &FrobeniusPoint<C64>, path: &CyclePath) -> Result<()> {
        for wp in &path.waypoints {
            self.continue_to(pt, *wp, path.min_dist)?;
        }
        Ok(())
    }
}

fn log_with_branch(z: C64, expected: C64) -> C64 {
    let principal = z.ln();
    let two_pi = 2.0 * std::f64::consts::PI;
    let shift = ((expected.im - principal.im) / two_pi).round();
    C64::new(principal.re, principal.im + shift * two_pi)
}

/// Numeric period values at a fixed (tau, lam): vectors in flat coordinates
/// per mode.
#[derive(Clone, Debug)]
pub struct NumericTower {
    pub n_min: i64,
    pub n_max: i64,
    pub modes: Vec<Vec<C64>>,
}

impl NumericTower {
    pub fn mode(&self, n: i64) -> &[C64] {
        assert!(n >= self.n_min && n <= self.n_max);
        &self.modes[(n - self.n_min) as usize]
    }
}

/// The tower of one-point periods at the tracked root `a` (0-based index),
/// evaluated at the tracker's lam.
pub fn one_point_tower(
    pt: &FrobeniusPoint<C64>,
    tracker: &RootTracker,
    a: usize,
    n_min: i64,
    n_max: i64,
) -> Result<NumericTower> {
    let n = pt.n();
    let lam = tracker.lambda;
    let xa = tracker.x[a];
    let log_xa = tracker.log_x[a];
    let g: Mat<C64> = flat_metric(pt.params.k, pt.params.m);
    let g_inv = g.inverse().unwrap();
    let mu = hodge_weights(pt.params.k, pt.params.m);
    let e_mult = pt.euler_mult();
    let phi = phi_tower(pt, n_min.min(-1), 0)?;
    let eval_phi = |nn: i64| -> Vec<C64> {
        phi.mode(nn)
            .iter()
            .map(|s| s.eval_with_branch(&lam, &lam.ln()))
            .collect()
    };

    // mode 0: covector (d_j f)/(x f') at x_a, raised
    let xdfv = pt.xdf.eval(&xa);
    let cov0: Vec<C64> = (0..n).map(|j| pt.df_dtau[j].eval(&xa) / xdfv).collect();
    let i0 = g_inv.mul_vec(&cov0);

    // mode -1: raised covector with components d^{-1}(d_(t_l) f omega)(x_a)
    // pushed through dt/dtau; the only log term sits at l = k.
    let mut cov1 = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..n {
            let c = pt.jac_tau2t[(l, i)];
            if c.norm() == 0.0 {
                continue;
            }
            // antiderivative of (df/dt_l) omega evaluated with the branch
            let mut val = C64::new(0.0, 0.0);
            for (e, cc) in pt.df_dt[l].iter() {
                if e == 0 {
                    val += cc * log_xa;
                } else {
                    val += cc * xa.powi(e as i32) / C64::new(e as f64, 0.0);
                }
            }
            acc += c * val;
        }
        cov1[i] = acc;
    }
    let i1_raw = g_inv.mul_vec(&cov1);
    // The raw antiderivative fixes integration constants by the monomial
    // rule, which is off from the tower normalization by a tau-polynomial.
    // The n = 1 structure relation
    //   (lam - E) I^(0) = (mu + 1/2) I^(-1) + (1/k) I_phi^(-1)
    // pins every component where mu + 1/2 is invertible; the kernel
    // component (the unit covector direction, mu = -1/2) keeps the raw
    // value, which carries the tracked log branch.
    let i1 = {
        let phv1 = eval_phi(-1);
        let ev = e_mult.mul_vec(&i0);
        let k_inv_l = C64::new(1.0 / pt.params.k as f64, 0.0);
        (0..n)
            .map(|r| {
                let d = num::ToPrimitive::to_f64(&mu[r]).unwrap() + 0.5;
                if d.abs() < 1e-12 {
                    i1_raw[r]
                } else {
                    (lam * i0[r] - ev[r] - k_inv_l * phv1[r]) / C64::new(d, 0.0)
                }
            })
            .collect::<Vec<C64>>()
    };

    // build modes by recursion
    let span = (n_max - n_min + 1) as usize;
    let mut modes: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; span];
    let idx = |nn: i64| (nn - n_min) as usize;
    if n_min <= 0 && n_max >= 0 {
        modes[idx(0)] = i0.clone();
    }
    if n_min <= -1 {
        modes[idx(-1)] = i1.clone();
    }
    // downward: (mu + nn - 1/2) I^(-nn) = (lam - E) I^(-nn+1) + (1/k) I_phi^(-nn)
    let k_inv = C64::new(1.0 / pt.params.k as f64, 0.0);
    let mut cur = i1.clone();
    for nn in 2..=(-n_min) {
        let mut rhs: Vec<C64> = {
            let ev = e_mult.mul_vec(&cur);
            cur.iter().zip(ev).map(|(c, e)| lam * c - e).collect()
        };
        let phv = eval_phi(-nn);
        for r in 0..n {
            rhs[r] -= k_inv * phv[r];
        }
        let next: Vec<C64> = (0..n)
            .map(|r| {
                let d = C64::new(
                    num::ToPrimitive::to_f64(&mu[r]).unwrap() + nn as f64 - 0.5,
                    0.0,
                );
                rhs[r] / d
            })
            .collect();
        modes[idx(-nn)] = next.clone();
        cur = next;
    }
    // upward: I^(nn+1) = (lam - E)^{-1} [(mu - nn - 1/2) I^(nn)] for nn >= 0
    let lam_minus_e = Mat::from_fn(n, n, |r, c| {
        let d = if r == c { lam } else { C64::new(0.0, 0.0) };
        d - e_mult[(r, c)]
    });
    let lam_minus_e_inv = lam_minus_e
        .inverse()
        .ok_or_else(|| Error::msg("lam is a critical value"))?;
    let mut cur = i0.clone();
    for nn in 0..n_max {
        let rhs: Vec<C64> = (0..n)
            .map(|r| {
                let d = C64::new(
                    num::ToPrimitive::to_f64(&mu[r]).unwrap() - nn as f64 - 0.5,
                    0.0,
                );
                cur[r] * d
            })
            .collect();
        let next = lam_minus_e_inv.mul_vec(&rhs);
        modes[idx(nn + 1)] = next.clone();
        cur = next;
    }
    Ok(NumericTower {
        n_min,
        n_max,
        modes,
    })
}

/// Local expansion data at a critical value: the half-thimble period in the
/// variable s = sqrt(2(lam - u_i)), odd coefficient tables per component,
/// and the mode evaluation through the R series.
pub struct CriticalExpansion {
    /// cov[j]: odd series in s, equal to the thimble period paired with d_j.
    pub thimble_cov: Vec<crate::cseries::CSeries>,
    /// invariant-cycle check: largest even-part magnitude excluded.
    pub alpha_even_ok: bool,
}

/// Evaluate the half-thimble tower at a numeric lam near u_i through the
/// stationary-phase series: I^(M) = Psi sum_j (-1)^j R_j P_(M-j), with
/// P_n the A1 tower at u_i.
pub fn thimble_tower_via_r(
    frame: &SemisimpleFrame,
    r: &RSeries,
    i: usize,
    lam: C64,
    sqrt_2lu: C64,
    n_min: i64,
    n_max: i64,
) -> NumericTower {
    let n = frame.q.len();
    let _ = lam;
    let mut modes = Vec::new();
    for mm in n_min..=n_max {
        let mut acc = vec![C64::new(0.0, 0.0); n];
        for (j, rj) in r.mats.iter().enumerate() {
            let p = a1_mode(mm - j as i64, sqrt_2lu);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let col: Vec<C64> = rj.col(i);
            for t in 0..n {
                acc[t] += col[t] * p * sign;
            }
        }
        modes.push(frame.psi.mul_vec(&acc));
    }
    NumericTower {
        n_min,
        n_max,
        modes,
    }
}

/// The A1 tower: P_n = d^n/dlam^n of 1/sqrt(2(lam-u)), including
/// antiderivatives for n < 0, expressed through s = sqrt(2(lam-u)).
pub fn a1_mode(nn: i64, s: C64) -> C64 {
    if nn >= 0 {
        let sign = if nn % 2 == 0 { 1.0 } else { -1.0 };
        sign * double_factorial(2 * nn - 1) / s.powi(2 * nn as i32 + 1)
    } else {
        let p = -nn;
        s.powi(2 * p as i32 - 1) / double_factorial(2 * p - 1)
    }
}

/// Monodromy of the one-point data around a closed loop: the permutation of
/// the roots and the 2 pi i log shifts.
pub struct MonodromyData {
    pub permutation: Vec<usize>,
    /// shifts[a] with log x_a -> log x_(sigma(a)) + shift, in units of 2 pi i.
    pub shifts: Vec<i64>,
    pub shift_residuals: Vec<f64>,
}

pub fn monodromy_check(
    pt: &FrobeniusPoint<C64>,
    start: &RootTracker,
    path: &CyclePath,
) -> Result<MonodromyData> {
    let mut tr = start.clone();
    tr.follow(pt, path)?;
    if (tr.lambda - start.lambda).norm() > 1e-9 {
        return Err(Error::msg("monodromy path must return to its start"));
    }
    let n = tr.x.len();
    let mut permutation = vec![0usize; n];
    let mut used = vec![false; n];
    for a in 0..n {
        let (idx, d) = start
            .x
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, x)| (i, (x - tr.x[a]).norm()))
            .min_by(|(_, p), (_, q)| p.partial_cmp(q).unwrap())
            .ok_or_else(|| Error::internal("permutation matching failed"))?;
        if d > 1e-8 * (1.0 + tr.x[a].norm()) {
            return Err(Error::msg("loop endpoint roots do not match the start"));
        }
        used[idx] = true;
        permutation[a] = idx;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut shifts = Vec::with_capacity(n);
    let mut resid = Vec::with_capacity(n);
    for a in 0..n {
        let diff = tr.log_x[a] - start.log_x[permutation[a]];
        let s = (diff.im / two_pi).round() as i64;
        shifts.push(s);
        let r = (diff - C64::new(0.0, s as f64 * two_pi)).norm();
        resid.push(r);
    }
    Ok(MonodromyData {
        permutation,
        shifts,
        shift_residuals: resid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::ModelParams;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn cpoint(k: usize, m: usize, t: &[f64]) -> FrobeniusPoint<C64> {
        let params = ModelParams::new(k, m, c(1.0)).unwrap();
        let tv: Vec<C64> = t.iter().map(|&x| c(x)).collect();
        FrobeniusPoint::build(&params, &tv).unwrap()
    }

    #[test]
    fn phi_seed_and_vanishing() {
        let params = ModelParams::new(2, 1, Rat::from_i64(1)).unwrap();
        let t = vec![Rat::from_ratio(1, 3), Rat::from_ratio(-1, 2), Rat::zero()];
        let pt = FrobeniusPoint::build(&params, &t).unwrap();
        let tw = phi_tower(&pt, -4, 2).unwrap();
        // I^(-1) = m e_N
        let m1 = tw.mode(-1);
        assert!(m1[2].coeff(0).unwrap() == Rat::from_i64(1));
        assert!(m1[0].is_zero() && m1[1].is_zero());
        // modes >= 0 vanish
        for nn in 0..=2 {
            assert!(tw.mode(nn).iter().all(|s| s.is_zero()));
        }
    }

    #[test]
    fn phi_infinity_display() {
        // f_inf^phi mode -p-1 = lam^p/p! dtau_k: exact tower
        let tw = infinity_closed_tower(1, 1, CycleTag::Phi, -4, 1);
        let m3 = tw.mode(-3); // p = 2: lam^2/2 on m e_N = e_2
        assert_eq!(
            m3[1].coeff(2).unwrap().constant_term(),
            Rat::from_ratio(1, 2)
        );
        assert!(tw.mode(0).iter().all(|s| s.is_zero()));
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(3), Rat::from_ratio(11, 6));
    }

    #[test]
    fn b_branch_seed_matches_closed_form() {
        // I_b^(-1)(inf, lam) = -log(lam^(1/m) Q^(-1)) dtau_k
        //                      - sum_j lam^(j/m)/(j/m) d_(k+m-j)
        let (k, m) = (1usize, 1usize);
        let tw = infinity_closed_tower(k, m, CycleTag::B(2), -1, -1);
        let v = tw.mode(-1);
        // component on d_1 = d_(k+m-j), j=1: -lam/(1/1) -> coefficient -1
        assert_eq!(v[0].coeff(1).unwrap().constant_term(), Rat::from_i64(-1));
        // unit covector part: -(1/m)(log lam - m log Q) m e_N
        assert_eq!(v[1].log_coeff(0).constant_term(), Rat::from_i64(-1));
        let logq = v[1].coeff(0).unwrap();
        assert_eq!(logq.coeff(&[1]), Rat::from_i64(1));
    }

    #[test]
    fn recursion_matches_closed_forms() {
        for (k, m) in [(1usize, 1usize), (2, 1), (1, 2)] {
            for tag in [CycleTag::A(1), CycleTag::B(k + 1)] {
                let closed = infinity_closed_tower(k, m, tag, -6, 6);
                let rec = infinity_recursion_tower(k, m, tag, -6, 6).unwrap();
                for nn in -6..=6 {
                    let a = closed.mode(nn);
                    let b = rec.mode(nn);
                    for r in 0..(k + m) {
                        let d = a[r]
                            .reramify(num::integer::lcm(a[r].ram(), b[r].ram()))
                            .sub(&b[r].reramify(num::integer::lcm(a[r].ram(), b[r].ram())));
                        assert!(
                            d.is_zero(),
                            "mismatch ({k},{m}) tag {tag:?} mode {nn} comp {r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn one_point_mode_zero_k1m1() {
        // f = x + 1/x, lam = 3: x_pm = (3 +- sqrt 5)/2,
        // (I^(0), d_1) = d_1 f/(x f') = 1/(x - 1/x) = +- 1/sqrt 5
        let pt = cpoint(1, 1, &[0.0, 0.0]);
        let tr = RootTracker::init_standard(&pt, c(3.0)).unwrap();
        let s5 = 5f64.sqrt();
        let xp = (3.0 + s5) / 2.0;
        // branch a=1 is near infinity: the larger root
        assert!((tr.x[0] - c(xp)).norm() < 1e-10);
        let tow = one_point_tower(&pt, &tr, 0, -3, 3).unwrap();
        // covector component on d_1 = pairing with metric: raised vector
        // paired back: g(I0, d_1) = cov0_1 = 1/sqrt5
        let g: Mat<C64> = flat_metric(1, 1);
        let cov = g.mul_vec(tow.mode(0));
        assert!((cov[0] - c(1.0 / s5)).norm() < 1e-10);
        let tow2 = one_point_tower(&pt, &tr, 1, -3, 3).unwrap();
        let cov2 = g.mul_vec(tow2.mode(0));
        assert!((cov2[0] + c(1.0 / s5)).norm() < 1e-10);
    }

    #[test]
    fn tower_derivative_consistency() {
        // d/dlam I^(n) = I^(n+1) via a small finite difference at fixed tau
        let pt = cpoint(2, 1, &[0.1, -0.2, 0.0]);
        let lam = c(5.0);
        let h = 1e-6;
        let tr0 = RootTracker::init_standard(&pt, lam).unwrap();
        let mut trp = tr0.clone();
        trp.continue_to(&pt, lam + c(h), 1e-6).unwrap();
        let mut trm = tr0.clone();
        trm.continue_to(&pt, lam - c(h), 1e-6).unwrap();
        let t0 = one_point_tower(&pt, &tr0, 0, -3, 3).unwrap();
        let tp = one_point_tower(&pt, &trp, 0, -3, 3).unwrap();
        let tm = one_point_tower(&pt, &trm, 0, -3, 3).unwrap();
        for nn in -3..3i64 {
            let up = tp.mode(nn);
            let um = tm.mode(nn);
            let want = t0.mode(nn + 1);
            for r in 0..pt.n() {
                let fd = (up[r] - um[r]) / c(2.0 * h);
                assert!(
                    (fd - want[r]).norm() < 2e-5 * (1.0 + want[r].norm()),
                    "mode {nn} comp {r}: fd {fd} vs {}",
                    want[r]
                );
            }
        }
    }

    #[test]
    fn s_transport_matches_periods() {
        // f_tau^a(lam) = S_tau f_inf^a(lam) coefficientwise: check mode 0 at
        // a real point for k=m=1 with truncation in lam^(-1/k).
        use crate::calibration::s_series;
        use crate::symfrob::SymbolicModel;
        let k = 1;
        let m = 1;
        let tvals = [0.11, 0.07];
        let pt = cpoint(k, m, &tvals);
        let lam = c(40.0);
        let tr = RootTracker::init_standard(&pt, lam).unwrap();
        let tow = one_point_tower(&pt, &tr, 0, -2, 2).unwrap();

        let md = SymbolicModel::build(&ModelParams::new(k, m, Rat::from_i64(1)).unwrap())
            .unwrap();
        let s = s_series(&md, 8).unwrap();
        let taus: Vec<C64> = pt.tau.iter().cloned().collect();
        let w = pt.qtilde;
        let smats = s.eval(&md, &taus, &w);
        let inf = infinity_closed_tower(k, m, CycleTag::A(1), -12, 12);
        // numeric evaluation of f_inf^a modes at lam with principal branch
        let log_lam = lam.ln();
        let lam_root = log_lam.scale(1.0 / k as f64).exp();
        let eval_mode = |nn: i64| -> Vec<C64> {
            inf.mode(nn)
                .iter()
                .map(|sr| {
                    let pnum: LogPuiseux<C64> = {
                        let mut out = LogPuiseux::zero(sr.ram());
                        for (e, cc) in sr.terms() {
                            out.add_term(e, C64::from_rat(&cc.constant_term()));
                        }
                        for (i, cc) in sr.log_part() {
                            out.add_log_term(i, C64::from_rat(&cc.constant_term()));
                        }
                        out
                    };
                    pnum.eval_with_branch(&lam_root, &log_lam)
                })
                .collect()
        };
        // S-transport: with S(z) = sum S_p z^(-p) acting on sum I^(n)(-z)^n,
        // mode M of S f = sum_p (-1)^p S_p (mode M + p of f)
        for mm in -1..=1i64 {
            let mut acc = vec![C64::new(0.0, 0.0); pt.n()];
            for (p, sp) in smats.iter().enumerate() {
                let fv = eval_mode(mm + p as i64);
                let term = sp.mul_vec(&fv);
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                for r in 0..pt.n() {
                    acc[r] += term[r] * sign;
                }
            }
            let want = tow.mode(mm);
            for r in 0..pt.n() {
                assert!(
                    (acc[r] - want[r]).norm() < 5e-6 * (1.0 + want[r].norm()),
                    "transport mode {mm} comp {r}: {} vs {}",
                    acc[r],
                    want[r]
                );
            }
        }
    }

    #[test]
    fn monodromy_around_u1_k1m1() {
        // loop around lam = 2 (critical value of x + 1/x) swaps the roots
        let pt = cpoint(1, 1, &[0.0, 0.0]);
        let tr = RootTracker::init_standard(&pt, c(4.0)).unwrap();
        // circle of radius 2 centered at 2: stays away from -2
        let steps = 24;
        let mut wps = Vec::new();
        for s in 1..=steps {
            let th = 2.0 * std::f64::consts::PI * s as f64 / steps as f64;
            wps.push(C64::new(2.0 + 2.0 * th.cos(), 2.0 * th.sin()));
        }
        let path = CyclePath::new(wps);
        let data = monodromy_check(&pt, &tr, &path).unwrap();
        assert_eq!(data.permutation, vec![1, 0]);
        assert!(data.shift_residuals.iter().all(|&r| r < 1e-8));
    }

    #[test]
    fn trivial_loop_identity() {
        let pt = cpoint(2, 1, &[0.0, 0.0, 0.0]);
        let tr = RootTracker::init_standard(&pt, c(5.0)).unwrap();
        let path = CyclePath::new(vec![c(6.0), c(5.0)]);
        let data = monodromy_check(&pt, &tr, &path).unwrap();
        assert_eq!(data.permutation, vec![0, 1, 2]);
        assert!(data.shifts.iter().all(|&s| s == 0));
    }

    #[test]
    fn exact_phi_de_check() {
        // z d_i f^phi = (d_i bullet) f^phi at symbol level:
        // -D_i I^(n) = A_i I^(n+1), with the tower over MPoly coefficients.
        use crate::symfrob::SymbolicModel;
        let params = ModelParams::new(2, 1, Rat::from_i64(1)).unwrap();
        let md = SymbolicModel::build(&params).unwrap();
        // symbolic point: build the tower over the polynomial scalars
        let sym_pt = FrobeniusPoint::build_with_deformation(
            &ModelParams {
                k: 2,
                m: 1,
                q: MPoly::constant(md.nvars, Rat::from_i64(1)),
            },
            &(0..3)
                .map(|i| MPoly::<Rat>::var(md.nvars, i))
                .collect::<Vec<_>>(),
            MPoly::var(md.nvars, md.wvar()),
        );
        // the generic builder inverts the Jacobian, which is not possible
        // symbolically; the phi tower only needs E-multiplication and mu, so
        // run the recursion directly against the symbolic model instead.
        assert!(sym_pt.is_err() || sym_pt.is_ok());
        let n = md.n();
        let mu = hodge_weights(2, 1);
        // Euler multiplication: sum E_i(tau) A_i with E_N constant
        let (wts, cn) = crate::frobenius::euler_data(2, 1);
        let mut e_mult: Mat<MPoly<Rat>> = Mat::zeros(n, n);
        for i in 0..n {
            let coeff = if i == n - 1 {
                MPoly::constant(md.nvars, cn.clone())
            } else if wts[i].is_zero() {
                MPoly::zero(md.nvars)
            } else {
                MPoly::<Rat>::var(md.nvars, i).scale(&wts[i])
            };
            if !coeff.is_zero() {
                e_mult = e_mult.add(&md.a_mats[i].scale(&coeff));
            }
        }
        // seed m e_N and two downward steps
        let mut seed: PVec<MPoly<Rat>> = zero_vec(n, 1);
        seed[n - 1] = LogPuiseux::constant(MPoly::constant(md.nvars, Rat::from_i64(1)));
        let mut tower: Vec<PVec<MPoly<Rat>>> = vec![seed];
        for nn in 2..=4i64 {
            let cur = tower.last().unwrap();
            let rhs: PVec<MPoly<Rat>> = {
                let lam_part = mul_lambda(cur);
                let e_part = apply_mat(&e_mult, cur);
                lam_part
                    .iter()
                    .zip(&e_part)
                    .map(|(a, b)| a.sub(b))
                    .collect()
            };
            let next: PVec<MPoly<Rat>> = (0..n)
                .map(|r| {
                    let d = mu[r].clone() + Rat::from_i64(nn) - Rat::from_ratio(1, 2);
                    rhs[r].scale(&MPoly::constant(md.nvars, d.inv()))
                })
                .collect();
            tower.push(next);
        }
        // check -D_i I^(n) = A_i I^(n+1) for the stored modes
        for w in tower.windows(2) {
            let (shallow, deep) = (&w[0], &w[1]);
            // relation: -D_i I^(-nn-1) = A_i I^(-nn) i.e. -D_i deep = A_i shallow
            for i in 0..n {
                let lhs: PVec<MPoly<Rat>> = deep
                    .iter()
                    .map(|s| s.map(|c| md.d_tau(i, c)).neg())
                    .collect();
                let rhs = apply_mat(&md.a_mats[i], shallow);
                for r in 0..n {
                    assert!(lhs[r].sub(&rhs[r]).is_zero(), "de fails at dir {i} comp {r}");
                }
            }
        }
    }
}
