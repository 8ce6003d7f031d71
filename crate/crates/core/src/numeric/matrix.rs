use std::ops::{Index, IndexMut, Mul};

use super::field::{epsilon, Field};
use crate::error::{Error, Result};

/// Small dense row-major matrix. Also used for row vectors and rectangular
/// characteristics matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Field> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[S]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged matrix rows");
            data.extend_from_slice(r.as_ref());
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn from_f64_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let lifted: Vec<Vec<S>> =
            rows.iter().map(|r| r.as_ref().iter().map(|&x| S::from_f64(x)).collect()).collect();
        Self::from_rows(&lifted)
    }

    pub fn row_vector(v: &[S]) -> Self {
        Matrix { rows: 1, cols: v.len(), data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn map<T: Field>(&self, f: impl Fn(S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: S) -> Self {
        self.map(|x| x * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-S::one()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_apply(v: &[S], m: &Self) -> Vec<S> {
        assert_eq!(v.len(), m.rows, "row vector length mismatch");
        (0..m.cols).map(|j| (0..m.rows).fold(S::zero(), |acc, i| acc + v[i] * m[(i, j)])).collect()
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols, "column vector length mismatch");
        (0..self.rows).map(|i| (0..self.cols).fold(S::zero(), |acc, j| acc + self[(i, j)] * v[j])).collect()
    }

    /// Determinant by elimination with partial pivoting on the value part.
    pub fn det(&self) -> S {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        match n {
            0 => return S::one(),
            1 => return self.data[0],
            2 => return self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            _ => {}
        }
        let mut a = self.clone();
        let mut det = S::one();
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[(i, col)].modulus().total_cmp(&a[(j, col)].modulus())).unwrap();
            if a[(pivot, col)] == S::zero() {
                return S::zero();
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                for c in col..n {
                    let v = a[(col, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination; 2×2 uses the adjugate.
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let det = self.det();
        if det.modulus() <= epsilon() {
            return Err(Error::SingularMatrix);
        }
        if n == 2 {
            return Ok(Self::from_rows(&[
                [self[(1, 1)] / det, -self[(0, 1)] / det],
                [-self[(1, 0)] / det, self[(0, 0)] / det],
            ]));
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[(i, col)].modulus().total_cmp(&a[(j, col)].modulus())).unwrap();
            if a[(pivot, col)].modulus() == 0.0 {
                return Err(Error::SingularMatrix);
            }
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            let p = a[(col, col)];
            for c in 0..n {
                a[(col, c)] = a[(col, c)] / p;
                inv[(col, c)] = inv[(col, c)] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == S::zero() {
                    continue;
                }
                for c in 0..n {
                    let (ac, ic) = (a[(col, c)], inv[(col, c)]);
                    a[(r, c)] -= f * ac;
                    inv[(r, c)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b).modulus()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        assert!(i < self.rows && j < self.cols, "matrix index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        assert!(i < self.rows && j < self.cols, "matrix index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Field> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: &Matrix<S>) -> Matrix<S> {
        self.matmul(rhs)
    }
}

/// Largest modulus of the entrywise difference of two vectors.
pub fn max_abs_diff<S: Field>(a: &[S], b: &[S]) -> f64 {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(&x, &y)| (x - y).modulus()).fold(0.0, f64::max)
}

pub fn max_abs<S: Field>(a: &[S]) -> f64 {
    a.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::D1;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn inverse_fixtures() {
        let id = Matrix::<f64>::identity(2);
        assert_eq!(id.inverse().unwrap(), id);
        let k = Matrix::from_rows(&[[1.0, 0.5], [-2.0, 0.0]]);
        let inv = k.inverse().unwrap();
        assert_eq!(inv, Matrix::from_rows(&[[0.0, -0.5], [2.0, 1.0]]));
        assert!((&k * &inv).max_abs_diff(&id) < 1e-15);
        let singular = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(singular.inverse(), Err(Error::SingularMatrix)));
    }

    #[test]
    fn row_vector_conventions() {
        let m = Matrix::from_rows(&[[-1.0, 2.0, 0.0], [-1.0, 1.0, -0.25], [0.0, -4.0, 0.0]]);
        let v = [-1.0, 2.0, -0.5];
        assert_eq!(Matrix::left_apply(&v, &m), vec![-1.0, 2.0, -0.5]);
        assert_eq!(m.apply(&[1.0, 0.0, 0.0]), vec![-1.0, -1.0, 0.0]);
    }

    #[test]
    fn determinant_of_dual_and_complex_entries() {
        let m = Matrix::from_rows(&[[D1::new(2.0, 1.0), D1::constant(1.0)], [D1::constant(1.0), D1::constant(1.0)]]);
        let d = m.det();
        assert_eq!(d, D1::new(1.0, 1.0));
        let i = Complex64::new(0.0, 1.0);
        let c = Matrix::from_rows(&[[i, Complex64::from_f64(0.0)], [Complex64::from_f64(0.0), -i]]);
        assert_eq!(c.det(), Complex64::from_f64(1.0));
        assert!(c.inverse().unwrap().max_abs_diff(&Matrix::from_rows(&[[-i, Complex64::from_f64(0.0)], [Complex64::from_f64(0.0), i]])) < 1e-15);
    }

    fn well_conditioned(n: usize) -> impl Strategy<Value = Matrix<f64>> {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = v[i * n + j] + if i == j { 2.0 * n as f64 } else { 0.0 };
                }
            }
            m
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn inverse_round_trips_2(m in well_conditioned(2)) {
            prop_assert!((&m * &m.inverse().unwrap()).max_abs_diff(&Matrix::identity(2)) < 1e-10);
        }
        #[test]
        fn inverse_round_trips_3(m in well_conditioned(3)) {
            prop_assert!((&m * &m.inverse().unwrap()).max_abs_diff(&Matrix::identity(3)) < 1e-10);
        }
        #[test]
        fn inverse_round_trips_5(m in well_conditioned(5)) {
            prop_assert!((&m * &m.inverse().unwrap()).max_abs_diff(&Matrix::identity(5)) < 1e-10);
        }
        #[test]
        fn product_is_associative(a in well_conditioned(3), b in well_conditioned(3), c in well_conditioned(3)) {
            let left = &(&a * &b) * &c;
            let right = &a * &(&b * &c);
            prop_assert!(left.max_abs_diff(&right) < 1e-10 * left.max_abs().max(1.0));
        }
    }
}
