//! Fixed-size 9×9 dense matrices, enough for the variational equations.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;
use crate::system::{State, DIM};

/// Row-major 9×9 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix9<T>(pub [[T; DIM]; DIM]);

impl<T: Scalar> Matrix9<T> {
    pub fn zeros() -> Self {
        Matrix9([[T::zero(); DIM]; DIM])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.0[i][i] = T::one();
        }
        m
    }

    pub fn trace(&self) -> T {
        (0..DIM).fold(T::zero(), |acc, i| acc + self.0[i][i])
    }

    pub fn mul_vec(&self, v: &State<T>) -> State<T> {
        let mut out = [T::zero(); DIM];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row
                .iter()
                .zip(v.0.iter())
                .fold(T::zero(), |acc, (&m, &x)| acc + m * x);
        }
        State(out)
    }

    pub fn mul_mat(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.0[i][k];
                if a == T::zero() {
                    continue;
                }
                for j in 0..DIM {
                    out.0[i][j] = out.0[i][j] + a * rhs.0[k][j];
                }
            }
        }
        out
    }

    /// `self + s * rhs`
    pub fn add_scaled(&self, s: T, rhs: &Self) -> Self {
        let mut out = *self;
        for i in 0..DIM {
            for j in 0..DIM {
                out.0[i][j] = out.0[i][j] + s * rhs.0[i][j];
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> State<T> {
        let mut out = [T::zero(); DIM];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row[j];
        }
        State(out)
    }

    pub fn set_column(&mut self, j: usize, v: &State<T>) {
        for (i, row) in self.0.iter_mut().enumerate() {
            row[j] = v.0[i];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Thin QR by modified Gram–Schmidt on the columns. Overwrites `self`
    /// with Q and returns the diagonal of R (all non-negative).
    #[allow(clippy::needless_range_loop)]
    pub fn orthonormalize(&mut self) -> [T; DIM] {
        let mut r_diag = [T::zero(); DIM];
        for j in 0..DIM {
            let mut v = self.column(j);
            for k in 0..j {
                let q = self.column(k);
                let proj = q.dot(&v);
                v = v.add_scaled(-proj, &q);
            }
            let norm = v.norm();
            r_diag[j] = norm;
            if norm > T::zero() {
                v = v.scale(T::one() / norm);
            }
            self.set_column(j, &v);
        }
        r_diag
    }
}

impl<T> Index<(usize, usize)> for Matrix9<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix9<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}
