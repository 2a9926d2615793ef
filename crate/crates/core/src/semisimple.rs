//! Canonical coordinates at a semi-simple point: critical points and values
//! of the superpotential, Hessians with respect to omega = dx/x, and the
//! orthonormal frame map Psi.

use crate::error::{Error, Result};
use crate::frobenius::{flat_metric, FrobeniusPoint};
use crate::laurent::LaurentPoly;
use crate::mat::{mat_residual, Mat};
use crate::roots::{laurent_roots, sort_complex};
use crate::scalar::{C64, Tol};
use crate::scalar::Field as _;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct SemisimpleFrame {
    /// Critical points of f, sorted by argument then modulus.
    pub q: Vec<C64>,
    /// Critical values u_i = f(q_i).
    pub u: Vec<C64>,
    /// Hessians with respect to omega: (x d/dx)^2 f at q_i.
    pub delta: Vec<C64>,
    /// Chosen square roots of delta (principal branch, or tracked).
    pub sqrt_delta: Vec<C64>,
    /// Psi e_i = 1_i = sqrt(delta_i) d/du_i, columns in the flat basis.
    pub psi: Mat<C64>,
    /// Psi^(-1) = Psi^T G.
    pub psi_inv: Mat<C64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameReport {
    pub orthonormality_residual: f64,
    pub max_offdiag_residual: f64,
    pub euler_residual: f64,
    pub canonical_metric_residual: f64,
}

/// Compute the canonical frame at a float-mode point. Fails when two
/// critical values collide or a Hessian degenerates.
pub fn critical_frame(pt: &FrobeniusPoint<C64>, tol: Tol) -> Result<SemisimpleFrame> {
    critical_frame_with_branches(pt, tol, None)
}

/// Same, but the square-root branches follow a previous frame: roots are
/// matched to the previous critical points and each sqrt(delta) picks the
/// sign closer to its predecessor. This keeps Psi continuous along paths.
pub fn critical_frame_tracked(
    pt: &FrobeniusPoint<C64>,
    tol: Tol,
    prev: &SemisimpleFrame,
) -> Result<SemisimpleFrame> {
    critical_frame_with_branches(pt, tol, Some(prev))
}

fn critical_frame_with_branches(
    pt: &FrobeniusPoint<C64>,
    tol: Tol,
    prev: Option<&SemisimpleFrame>,
) -> Result<SemisimpleFrame> {
    let n = pt.n();
    let mut q = laurent_roots(&pt.xdf)?;
    if q.len() != n {
        return Err(Error::NotSemisimple(format!(
            "expected {} critical points, found {}",
            n,
            q.len()
        )));
    }
    match prev {
        None => sort_complex(&mut q),
        Some(fr) => {
            // greedy nearest matching to the previous configuration
            let mut ordered = Vec::with_capacity(n);
            let mut pool = q.clone();
            for qp in &fr.q {
                let (idx, _) = pool
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        (*a - qp)
                            .norm()
                            .partial_cmp(&(*b - qp).norm())
                            .unwrap()
                    })
                    .ok_or_else(|| Error::internal("root pool exhausted"))?;
                ordered.push(pool.swap_remove(idx));
            }
            q = ordered;
        }
    }

    let u: Vec<C64> = q.iter().map(|z| pt.f.eval(z)).collect();
    // semi-simplicity: pairwise distinct critical values
    for i in 0..n {
        for j in i + 1..n {
            if (u[i] - u[j]).norm() < tol.abs {
                return Err(Error::NotSemisimple(format!(
                    "critical values {} and {} coincide within tolerance",
                    i, j
                )));
            }
        }
    }
    let hess_poly: LaurentPoly<C64> = pt.xdf.x_d_dx();
    let delta: Vec<C64> = q.iter().map(|z| hess_poly.eval(z)).collect();
    for (i, d) in delta.iter().enumerate() {
        if d.norm() < tol.abs {
            return Err(Error::DegenerateHessian(i));
        }
    }
    let mut sqrt_delta: Vec<C64> = delta.iter().map(|d| d.sqrt()).collect();
    if let Some(fr) = prev {
        for (s, sp) in sqrt_delta.iter_mut().zip(&fr.sqrt_delta) {
            if (*s - sp).norm() > (-*s - sp).norm() {
                *s = -*s;
            }
        }
    }

    // columns of Psi: (1/sqrt(delta_i)) G^(-1) du_i with
    // (du_i)_j = (d_j f)(q_i)
    let g: Mat<C64> = flat_metric(pt.params.k, pt.params.m);
    let g_inv = g
        .inverse()
        .ok_or_else(|| Error::internal("flat metric not invertible"))?;
    let mut psi = Mat::zeros(n, n);
    for i in 0..n {
        let du: Vec<C64> = (0..n).map(|j| pt.df_dtau[j].eval(&q[i])).collect();
        let raised = g_inv.mul_vec(&du);
        let s = sqrt_delta[i].inv();
        for r in 0..n {
            psi[(r, i)] = raised[r] * s;
        }
    }
    let psi_inv = psi.transpose().matmul(&g);

    Ok(SemisimpleFrame {
        q,
        u,
        delta,
        sqrt_delta,
        psi,
        psi_inv,
    })
}

/// Residual report: orthonormality of Psi, simultaneous diagonalization of
/// the multiplication operators, the Euler reconstruction, and the canonical
/// metric values g(d/du_i, d/du_j) = delta_(ij)/Delta_i.
pub fn verify_frame(frame: &SemisimpleFrame, pt: &FrobeniusPoint<C64>) -> FrameReport {
    let n = pt.n();
    let g: Mat<C64> = flat_metric(pt.params.k, pt.params.m);
    let orth = mat_residual(
        &frame.psi.transpose().matmul(&g).matmul(&frame.psi),
        &Mat::identity(n),
    );

    let mut offdiag = 0.0f64;
    for a in &pt.a_mats {
        let d = frame.psi_inv.matmul(a).matmul(&frame.psi);
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    offdiag = offdiag.max(d[(r, c)].norm());
                }
            }
        }
    }

    let e_mat = pt.euler_mult();
    let rebuilt = frame
        .psi
        .matmul(&Mat::diag(&frame.u))
        .matmul(&frame.psi_inv);
    let euler = mat_residual(&rebuilt, &e_mat);

    // canonical metric: du_i-coordinates of the metric via Psi:
    // g(d/du_i, d/du_j) = (Psi e_i / sqrt(d_i), Psi e_j / sqrt(d_j))
    let mut canon = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let vi = frame.psi.col(i);
            let vj = frame.psi.col(j);
            let mut pair = C64::new(0.0, 0.0);
            let gv = g.mul_vec(&vj);
            for r in 0..n {
                pair += vi[r] * gv[r];
            }
            pair = pair / (frame.sqrt_delta[i] * frame.sqrt_delta[j]);
            let want = if i == j {
                frame.delta[i].inv()
            } else {
                C64::new(0.0, 0.0)
            };
            canon = canon.max((pair - want).norm());
        }
    }

    FrameReport {
        orthonormality_residual: orth,
        max_offdiag_residual: offdiag,
        euler_residual: euler,
        canonical_metric_residual: canon,
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::ModelParams;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn point(k: usize, m: usize, q: f64, t: &[f64]) -> FrobeniusPoint<C64> {
        let params = ModelParams::new(k, m, c(q)).unwrap();
        let tv: Vec<C64> = t.iter().map(|&x| c(x)).collect();
        FrobeniusPoint::build(&params, &tv).unwrap()
    }

    #[test]
    fn k1m1_frame() {
        // f = x + 1/x: critical points +-1, values +-2, Hessians +-2
        let pt = point(1, 1, 1.0, &[0.0, 0.0]);
        let fr = critical_frame(&pt, Tol::default()).unwrap();
        let mut qs: Vec<f64> = fr.q.iter().map(|z| z.re).collect();
        qs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((qs[0] + 1.0).abs() < 1e-12 && (qs[1] - 1.0).abs() < 1e-12);
        for (qi, (ui, di)) in fr.q.iter().zip(fr.u.iter().zip(&fr.delta)) {
            // u = f(q) = 2q on the unit points, delta = u here
            assert!((ui - 2.0 * qi).norm() < 1e-12);
            assert!((di - ui).norm() < 1e-12);
        }
        let rep = verify_frame(&fr, &pt);
        assert!(rep.orthonormality_residual < 1e-10);
        assert!(rep.max_offdiag_residual < 1e-10);
        assert!(rep.euler_residual < 1e-10);
        assert!(rep.canonical_metric_residual < 1e-10);
    }

    #[test]
    fn k2m1_critical_points() {
        // x^2 f' for f = x^2 + 1/x gives 2x^3 - 1
        let pt = point(2, 1, 1.0, &[0.0, 0.0, 0.0]);
        let fr = critical_frame(&pt, Tol::default()).unwrap();
        let want = 0.5f64.powf(1.0 / 3.0);
        for qi in &fr.q {
            assert!((qi.norm() - want).abs() < 1e-12);
        }
        let rep = verify_frame(&fr, &pt);
        assert!(rep.orthonormality_residual < 1e-10);
        assert!(rep.max_offdiag_residual < 1e-10);
    }

    #[test]
    fn random_points_verify() {
        let samples = [
            (1usize, 2usize, vec![0.3, -0.2, 0.1]),
            (2, 2, vec![0.1, 0.4, -0.3, 0.2]),
            (3, 2, vec![0.2, -0.1, 0.3, 0.15, -0.05]),
        ];
        for (k, m, t) in samples {
            let pt = point(k, m, 1.0, &t);
            let fr = critical_frame(&pt, Tol::default()).unwrap();
            let rep = verify_frame(&fr, &pt);
            assert!(rep.orthonormality_residual < 1e-9, "orth {k},{m}");
            assert!(rep.max_offdiag_residual < 1e-9, "diag {k},{m}");
            assert!(rep.euler_residual < 1e-8, "euler {k},{m}");
        }
    }
}
