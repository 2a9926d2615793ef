//! The Frobenius structure with flat coordinates kept symbolic.
//!
//! Variables are tau_1 .. tau_N (slots 0..N-1) and the deformation value
//! w = Q e^(tau_N / m) (slot N), treated as an independent polynomial symbol.
//! The coordinate vector field d/dtau_N acts on this ring as the twisted
//! derivation d/dtau_N + (1/m) w d/dw; all other d/dtau_i are plain partial
//! derivatives. Structure constants and the metric come out as polynomials
//! in (tau_1..tau_(N-1), w) with Laurent powers of w allowed in intermediate
//! steps only.

use crate::error::{Error, Result};
use crate::frobenius::{assemble_f, reduce_by_xdf, t_of_tau, ModelParams};
use crate::laurent::{coeff0_div_at_inf, coeff0_div_at_zero, LaurentPoly};
use crate::mat::Mat;
use crate::mpoly::MPoly;
use crate::scalar::{Field, Rat};
use num::Zero;

pub type SPoly = MPoly<Rat>;
pub type SLaurent = LaurentPoly<SPoly>;

#[derive(Clone, Debug)]
pub struct SymbolicModel {
    pub k: usize,
    pub m: usize,
    /// Numeric value of Q baked into the coefficients (w = Q e^(t_N) stays
    /// symbolic; Q itself is a number).
    pub q: Rat,
    /// Number of polynomial variables: N taus plus w.
    pub nvars: usize,
    /// t_i(tau) as polynomials (the t_N slot holds tau_N / m).
    pub t_of_tau: Vec<SPoly>,
    /// The superpotential with polynomial coefficients.
    pub f: SLaurent,
    /// x f'(x).
    pub xdf: SLaurent,
    /// df/dtau_i under the twisted derivation.
    pub df_dtau: Vec<SLaurent>,
    /// Multiplication matrices (d_i bullet) in the flat basis, entries
    /// polynomial in (tau, w).
    pub a_mats: Vec<Mat<SPoly>>,
    /// Residue metric, which flatness makes constant.
    pub metric: Mat<SPoly>,
}

impl SymbolicModel {
    pub fn wvar(&self) -> usize {
        self.nvars - 1
    }

    pub fn n(&self) -> usize {
        self.k + self.m
    }

    /// The twisted coordinate derivation d/dtau_i acting on the symbol ring.
    pub fn d_tau(&self, i0: usize, p: &SPoly) -> SPoly {
        let n = self.n();
        let p = p_up(p, self.nvars);
        let mut out = p.deriv(i0);
        if i0 == n - 1 {
            // d/dtau_N also sees w = Q e^(tau_N/m)
            let tw = p
                .var_weighted(self.wvar())
                .scale(&Rat::from_ratio(1, self.m as i64));
            out = out.add(&tw);
        }
        out
    }

    pub fn build(params: &ModelParams<Rat>) -> Result<SymbolicModel> {
        let (k, m, n) = (params.k, params.m, params.n());
        let nvars = n + 1;
        let wvar = n;

        // Symbolic flat point: tau_i = variable i-1; w = variable n.
        let tau: Vec<SPoly> = (0..n).map(|i| MPoly::var(nvars, i)).collect();
        let w: SPoly = MPoly::var(nvars, wvar);

        // Triangular inversion of the residue formulas with polynomial
        // entries; reuses the generic fixed-point driver.
        let sym_params = ModelParams {
            k,
            m,
            q: MPoly::constant(nvars, params.q.clone()),
        };
        let t = t_of_tau(&sym_params, &tau, &w)?;

        let f = assemble_f(&sym_params, &t, &w);
        let xdf = f.x_d_dx();

        let mut model = SymbolicModel {
            k,
            m,
            q: params.q.clone(),
            nvars,
            t_of_tau: t,
            f: f.clone(),
            xdf,
            df_dtau: Vec::new(),
            a_mats: Vec::new(),
            metric: Mat::zeros(n, n),
        };

        // df/dtau_i by differentiating the coefficient polynomials with the
        // twisted derivation.
        let mut df_dtau = Vec::with_capacity(n);
        for i0 in 0..n {
            let mut d = SLaurent::zero();
            for (e, c) in f.iter() {
                d.add_term(e, model.d_tau(i0, c));
            }
            df_dtau.push(d);
        }
        model.df_dtau = df_dtau;

        // structure constants
        let mut a_mats = Vec::with_capacity(n);
        for i in 0..n {
            let mut a = Mat::zeros(n, n);
            for j in 0..n {
                let prod = model.df_dtau[i].mul(&model.df_dtau[j]);
                let (red, _) = model.reduce(&prod)?;
                let coords = model.tangent_coords(&red)?;
                a.set_col(j, &coords);
            }
            a_mats.push(a);
        }
        model.a_mats = a_mats;

        // residue metric: constant by flatness, asserted in tests
        let metric = Mat::from_fn(n, n, |i, j| {
            let h = model.df_dtau[i].mul(&model.df_dtau[j]);
            coeff0_div_at_inf(&h, &model.xdf).sub(&coeff0_div_at_zero(&h, &model.xdf))
        });
        model.metric = metric;
        Ok(model)
    }

    pub fn reduce(&self, p: &SLaurent) -> Result<(SLaurent, SLaurent)> {
        reduce_by_xdf(p, &self.xdf, self.k as i64, self.m as i64)
    }

    /// Solve B c = mono for the tangent-basis coordinates of a reduced
    /// Laurent polynomial. B is block triangular with unit or w-power
    /// pivots, so only monomial divisions occur.
    pub fn tangent_coords(&self, reduced: &SLaurent) -> Result<Vec<SPoly>> {
        let (k, n) = (self.k, self.n());
        let kk = k as i64;
        let rhs: Vec<SPoly> = (1..=n as i64).map(|a| reduced.coeff(kk - a)).collect();
        let mut c: Vec<SPoly> = vec![MPoly::zero(self.nvars); n];
        // B[a][i] = d_tau_i (T_a) with T_a the coefficient of x^(k-a).
        let b_entry = |a: usize, i: usize| -> SPoly {
            let t_a = self.f.coeff(kk - a as i64);
            self.d_tau(i, &t_a)
        };
        // forward block: a = 1..k has unit diagonal and entries at i < a
        for a in 1..=k {
            let mut v = rhs[a - 1].clone();
            for i in 1..a {
                let bia = b_entry(a, i - 1);
                if !bia.is_zero() {
                    v = v.sub(&bia.mul(&c[i - 1]));
                }
            }
            c[a - 1] = v;
        }
        // backward block: a = N down to k+1; pivot of row a is a power of w;
        // other entries sit at columns > a.
        for a in (k + 1..=n).rev() {
            let mut v = rhs[a - 1].clone();
            for i in a + 1..=n {
                let bia = b_entry(a, i - 1);
                if !bia.is_zero() {
                    v = v.sub(&bia.mul(&c[i - 1]));
                }
            }
            let pivot = b_entry(a, a - 1);
            c[a - 1] = v.mul(&pivot.inv_monomial());
        }
        // verify: residual must vanish identically
        for a in 1..=n {
            let mut acc = MPoly::zero(self.nvars);
            for i in 1..=n {
                let bia = b_entry(a, i - 1);
                if !bia.is_zero() {
                    acc = acc.add(&bia.mul(&c[i - 1]));
                }
            }
            if !acc.sub(&rhs[a - 1]).is_zero() {
                return Err(Error::internal("tangent-coordinate solve left a residual"));
            }
        }
        Ok(c)
    }

    /// Weighted degrees: tau_i -> i/k (i <= k), tau_(k+j) -> 1 - j/m,
    /// tau_N -> 0 (never appears in the tensors), w -> 1/k + 1/m.
    pub fn weights(&self) -> Vec<Rat> {
        let (k, m, n) = (self.k, self.m, self.n());
        let mut ws = Vec::with_capacity(n + 1);
        for i in 1..=k {
            ws.push(Rat::from_ratio(i as i64, k as i64));
        }
        for j in 1..m {
            ws.push(Rat::from_i64(1) - Rat::from_ratio(j as i64, m as i64));
        }
        ws.push(Rat::zero()); // bare tau_N
        ws.push(Rat::from_ratio(1, k as i64) + Rat::from_ratio(1, m as i64)); // w
        ws
    }

    /// Degree of the coordinate vector field d/dtau_a under the grading:
    /// one minus the degree of tau_a, so the unit field has degree zero.
    pub fn basis_degree(&self, a: usize) -> Rat {
        let (k, m) = (self.k, self.m);
        if a <= k {
            Rat::from_ratio((k - a) as i64, k as i64)
        } else {
            Rat::from_ratio((a - k) as i64, m as i64)
        }
    }

    /// Check that every structure-constant entry is weighted homogeneous of
    /// the degree forced by the grading.
    pub fn check_homogeneity(&self) -> Result<()> {
        let n = self.n();
        let ws = self.weights();
        for i in 1..=n {
            for j in 1..=n {
                for p in 1..=n {
                    let entry = &self.a_mats[i - 1][(p - 1, j - 1)];
                    if entry.is_zero() {
                        continue;
                    }
                    let want =
                        self.basis_degree(i) + self.basis_degree(j) - self.basis_degree(p);
                    if !entry.is_weighted_homogeneous(&ws, &want) {
                        return Err(Error::internal(format!(
                            "structure constant ({i},{j})^{p} not homogeneous of degree {want}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// d^2 f / dtau_i dtau_j as a Laurent polynomial with SPoly coefficients.
    pub fn d2f(&self, i0: usize, j0: usize) -> SLaurent {
        let mut out = SLaurent::zero();
        for (e, c) in self.f.iter() {
            out.add_term(e, self.d_tau(i0, &self.d_tau(j0, c)));
        }
        out
    }

    /// Verify the primitive-form identity at symbol level for one (i, j):
    /// the quotient G of (d_i f)(d_j f) - sum_p A^p_(ij) d_p f by x f'
    /// satisfies d^2 f / dtau_i dtau_j * omega = dG.
    pub fn check_primitive_form(&self, i0: usize, j0: usize) -> Result<()> {
        let prod = self.df_dtau[i0].mul(&self.df_dtau[j0]);
        let (red, g) = self.reduce(&prod)?;
        let coords = self.tangent_coords(&red)?;
        for p in 0..self.n() {
            if !coords[p].sub(&self.a_mats[i0][(p, j0)]).is_zero() {
                return Err(Error::internal(
                    "reduction disagrees with structure constants",
                ));
            }
        }
        // compare x^(e-1) dx coefficients of (d^2 f) omega and dG
        let d2 = self.d2f(i0, j0);
        let lo = d2.lo().unwrap_or(0).min(g.lo().unwrap_or(0));
        let hi = d2.hi().unwrap_or(0).max(g.hi().unwrap_or(0));
        for e in lo..=hi {
            let lhs = d2.coeff(e);
            let rhs = g.coeff(e).scale(&Rat::from_i64(e));
            if !lhs.sub(&rhs).is_zero() {
                return Err(Error::internal(format!(
                    "primitive-form mismatch at exponent {e}"
                )));
            }
        }
        Ok(())
    }

    /// Evaluate a symbolic matrix at a numeric flat point (tau, w).
    pub fn eval_mat<T: Field>(&self, m: &Mat<SPoly>, tau: &[T], w: &T) -> Mat<T> {
        let mut vals: Vec<T> = tau.to_vec();
        vals.push(w.clone());
        m.map(|p| p_eval(p, &vals, self.nvars))
    }
}

/// Lift a polynomial into a larger variable count (missing slots are 0).
pub fn p_up(p: &SPoly, nvars: usize) -> SPoly {
    if p.nvars() == nvars {
        return p.clone();
    }
    let mut out = MPoly::zero(nvars);
    for (e, c) in p.iter() {
        let mut exp = vec![0; nvars];
        for (i, &x) in e.iter().enumerate() {
            exp[i] = x;
        }
        out.add_term(exp, c.clone());
    }
    out
}

pub fn p_eval<T: Field>(p: &SPoly, vals: &[T], nvars: usize) -> T {
    let p = p_up(p, nvars);
    p.eval_in(|c| T::from_rat(c), vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::flat_metric;
    use crate::scalar::rat;

    fn model(k: usize, m: usize, q: i64) -> SymbolicModel {
        let params = ModelParams::new(k, m, rat(q, 1)).unwrap();
        SymbolicModel::build(&params).unwrap()
    }

    #[test]
    fn metric_is_constant_flat() {
        for (k, m) in [(1, 1), (2, 1), (1, 2), (2, 2), (2, 3)] {
            let md = model(k, m, 1);
            let flat: Mat<SPoly> =
                flat_metric::<Rat>(k, m).map(|r| MPoly::constant(md.nvars, r.clone()));
            assert!(
                md.metric.sub(&flat).is_zero(),
                "metric not flat for ({k},{m})"
            );
        }
    }

    #[test]
    fn unit_and_associativity_symbolic() {
        let md = model(2, 1, 1);
        let n = md.n();
        let e = md.k - 1;
        let id: Mat<SPoly> = Mat::from_fn(n, n, |r, c| {
            MPoly::constant(md.nvars, if r == c { rat(1, 1) } else { rat(0, 1) })
        });
        assert!(md.a_mats[e].sub(&id).is_zero());
        for i in 0..n {
            for j in 0..n {
                assert!(md.a_mats[i]
                    .matmul(&md.a_mats[j])
                    .sub(&md.a_mats[j].matmul(&md.a_mats[i]))
                    .is_zero());
            }
        }
    }

    #[test]
    fn k1m1_structure_constants() {
        // A_2 = [[0, w], [1, 0]] for k = m = 1 (multiplication by d_2).
        let md = model(1, 1, 1);
        let a2 = &md.a_mats[1];
        let w = MPoly::var(md.nvars, md.wvar());
        assert!(a2[(0, 1)].sub(&w).is_zero());
        assert!(a2[(1, 0)]
            .sub(&MPoly::constant(md.nvars, rat(1, 1)))
            .is_zero());
        assert!(a2[(0, 0)].is_zero() && a2[(1, 1)].is_zero());
    }

    #[test]
    fn homogeneity() {
        for (k, m) in [(1, 1), (2, 1), (2, 3)] {
            model(k, m, 1).check_homogeneity().unwrap();
        }
    }

    #[test]
    fn primitive_form_small() {
        let md = model(2, 2, 1);
        for i in 0..md.n() {
            for j in 0..md.n() {
                md.check_primitive_form(i, j).unwrap();
            }
        }
    }

    #[test]
    fn cup_limit_at_zero() {
        // setting tau = w = 0 in A_1 for k=2, m=1: the x-class squared is
        // (m/k) = 1/2 times the top class.
        let md = model(2, 1, 1);
        let n = md.n();
        let zeros = vec![Rat::zero(); md.nvars];
        let a1_0: Mat<Rat> = md.a_mats[0].map(|p| p_eval::<Rat>(p, &zeros, md.nvars));
        let mut expected = vec![Rat::zero(); n];
        expected[2] = rat(1, 2);
        assert_eq!(a1_0.col(0), expected);
    }
}
