//! Small dense matrices and vectors over an arbitrary coefficient ring.
//!
//! Dimensions here are the rank of the Frobenius manifold (N = k+m, at desk
//! scale at most 8), so everything is plain row-major storage with O(n^3)
//! algorithms.

use crate::scalar::Field;
use num::{One, Zero};
use std::ops::{Add, Mul, Neg, Sub};

/// Ring operations needed for matrix entries (fields and polynomial rings).
pub trait RingElem:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + One
{
}

impl<T> RingElem for T where
    T: Clone
        + PartialEq
        + std::fmt::Debug
        + Zero
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + One
{
}

#[derive(Clone, PartialEq, Debug)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: RingElem> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        assert!(rows.iter().all(|row| row.len() == c));
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn diag(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn map<U: RingElem>(&self, mut f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |r, c| {
            self[(r, c)].clone() + other[(r, c)].clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |r, c| {
            self[(r, c)].clone() - other[(r, c)].clone()
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out: Mat<T> = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let add = a.clone() * other[(k, c)].clone();
                    out[(r, c)] = out[(r, c)].clone() + add;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for c in 0..self.cols {
                    acc = acc + self[(r, c)].clone() * v[c].clone();
                }
                acc
            })
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn pow(&self, e: usize) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = acc.matmul(self);
        }
        acc
    }

    pub fn col(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn set_col(&mut self, c: usize, v: &[T]) {
        assert_eq!(v.len(), self.rows);
        for r in 0..self.rows {
            self[(r, c)] = v[r].clone();
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, x)| (i / cols, i % cols, x))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Field> Mat<S> {
    /// Gauss-Jordan inverse with pivoting by magnitude. Returns None when
    /// singular (exact zero pivot in exact mode, tiny pivot in float mode).
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot_row = (col..n).max_by(|&i, &j| {
                a[(i, col)]
                    .abs2()
                    .partial_cmp(&a[(j, col)].abs2())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[(pivot_row, col)].is_zero() || a[(pivot_row, col)].abs2() < 1e-280 {
                return None;
            }
            if pivot_row != col {
                for c in 0..n {
                    a.data.swap(pivot_row * n + c, col * n + c);
                    inv.data.swap(pivot_row * n + c, col * n + c);
                }
            }
            let p = a[(col, col)].inv();
            for c in 0..n {
                a[(col, c)] = a[(col, c)].clone() * p.clone();
                inv[(col, c)] = inv[(col, c)].clone() * p.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for c in 0..n {
                    let sub_a = f.clone() * a[(col, c)].clone();
                    a[(r, c)] = a[(r, c)].clone() - sub_a;
                    let sub_i = f.clone() * inv[(col, c)].clone();
                    inv[(r, c)] = inv[(r, c)].clone() - sub_i;
                }
            }
        }
        Some(inv)
    }

    /// Solve `self * x = b` via the inverse (desk-scale sizes only).
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        Some(self.inverse()?.mul_vec(b))
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.abs2().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Max |entry| of the difference, as the residual between two matrices.
pub fn mat_residual<S: Field>(a: &Mat<S>, b: &Mat<S>) -> f64 {
    a.sub(b).max_abs()
}

pub fn vec_add<T: RingElem>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + y.clone())
        .collect()
}

pub fn vec_sub<T: RingElem>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() - y.clone())
        .collect()
}

pub fn vec_scale<T: RingElem>(a: &[T], s: &T) -> Vec<T> {
    a.iter().map(|x| x.clone() * s.clone()).collect()
}

/// Plain bilinear pairing v^T M w.
pub fn bilinear<T: RingElem>(m: &Mat<T>, v: &[T], w: &[T]) -> T {
    let mw = m.mul_vec(w);
    v.iter()
        .zip(mw)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    #[test]
    fn inverse_exact() {
        let m = Mat::from_rows(vec![
            vec![rat(2, 1), rat(1, 1)],
            vec![rat(1, 1), rat(1, 1)],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.matmul(&inv), Mat::<Rat>::identity(2));
    }

    #[test]
    fn singular_detected() {
        let m = Mat::from_rows(vec![
            vec![rat(1, 1), rat(2, 1)],
            vec![rat(2, 1), rat(4, 1)],
        ]);
        assert!(m.inverse().is_none());
    }
}
