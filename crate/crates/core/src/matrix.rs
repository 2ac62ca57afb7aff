//! Dense matrices over [`GaussianRational`] with exact elimination.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, DspError, Result};
use crate::scalar::Scalar;

pub type Vector = Vec<Scalar>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Scalar::one())
    }

    pub fn scalar(n: usize, s: Scalar) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = s.clone();
        }
        m
    }

    pub fn diag(values: &[Scalar]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = v.clone();
        }
        m
    }

    /// `E_{i,k}`: single unit entry at `(i, k)` (zero-based).
    pub fn unit(rows: usize, cols: usize, i: usize, k: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data[i * cols + k] = Scalar::one();
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        ensure!(data.len() == rows * cols, Dimension, "{} entries for a {rows}x{cols} matrix", data.len());
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        ensure!(rows.iter().all(|row| row.len() == c), Dimension, "ragged rows");
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Integer literal helper, mostly for tests.
    pub fn from_ints<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        Self::from_rows(
            rows.iter().map(|r| r.as_ref().iter().map(|&x| Scalar::from_int(x)).collect()).collect(),
        )
        .expect("rectangular literal")
    }

    pub fn from_columns(rows: usize, columns: &[Vector]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m.data[i * m.cols + j] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<Scalar> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j { v.is_one() } else { v.is_zero() }
                })
            })
    }

    /// True for `cI`.
    pub fn is_scalar_matrix(&self) -> bool {
        self.is_square() && {
            let c = self.get(0, 0);
            (0..self.rows)
                .all(|i| (0..self.cols).all(|j| if i == j { self.get(i, j) == c } else { self.get(i, j).is_zero() }))
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn diagonal(&self) -> Vector {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        m
    }

    pub fn trace(&self) -> Scalar {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
        &(a * b) - &(b * a)
    }

    pub fn pow(&self, e: u32) -> Matrix {
        assert!(self.is_square());
        let mut acc = Matrix::identity(self.rows);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = self.get(r0 + i, c0 + j).clone();
            }
        }
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    pub fn block_diag(blocks: &[Matrix]) -> Matrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(r, c);
        let (mut i0, mut j0) = (0, 0);
        for b in blocks {
            m.set_block(i0, j0, b);
            i0 += b.rows;
            j0 += b.cols;
        }
        m
    }

    /// `[[a, b], [0, d]]`.
    pub fn block_upper(a: &Matrix, b: &Matrix, d: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(a.rows + d.rows, a.cols + d.cols);
        m.set_block(0, 0, a);
        m.set_block(0, a.cols, b);
        m.set_block(a.rows, a.cols, d);
        m
    }

    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).inv().expect("nonzero pivot");
            for j in col..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in col..m.cols {
                    let v = m.get(r, j) - &(&factor * m.get(row, j));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref { matrix: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Row rank over `Q(i)`.
    pub fn rank(&self) -> usize {
        // Eliminate along the shorter side.
        if self.rows > self.cols {
            return self.transpose().rank();
        }
        self.rref().pivots.len()
    }

    /// Basis of the right null space; one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let Rref { matrix: r, pivots } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Scalar::zero(); self.cols];
                v[f] = Scalar::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.get(row, f);
                }
                v
            })
            .collect()
    }

    /// A particular solution of `M x = b` with every free variable set to 0,
    /// or `None` when the system is inconsistent.
    pub fn solve_linear(&self, b: &[Scalar]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let aug = self.augment_column(b);
        let Rref { matrix: r, pivots } = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, self.cols).clone();
        }
        Some(x)
    }

    fn augment_column(&self, b: &[Scalar]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            m.set(i, self.cols, b[i].clone());
        }
        m
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        aug.set_block(0, 0, self);
        aug.set_block(0, n, &Matrix::identity(n));
        let Rref { matrix: r, pivots } = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(r.submatrix(0, n, n, n))
    }

    pub fn determinant(&self) -> Scalar {
        assert!(self.is_square());
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Scalar::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return Scalar::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            det *= &pivot;
            let inv = pivot.inv().expect("nonzero pivot");
            for r in col + 1..n {
                if m.get(r, col).is_zero() {
                    continue;
                }
                let f = m.get(r, col) * &inv;
                for j in col..n {
                    let v = m.get(r, j) - &(&f * m.get(col, j));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    /// Row-major flattening; the `vec` used by every linear operator on
    /// matrix spaces in this crate.
    pub fn to_vector(&self) -> Vector {
        self.data.clone()
    }

    pub fn from_vector(rows: usize, cols: usize, v: &[Scalar]) -> Matrix {
        assert_eq!(v.len(), rows * cols);
        Matrix { rows, cols, data: v.to_vec() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.to_complex_f64().norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_complex(&self) -> nalgebra::DMatrix<num_complex::Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_complex_f64())
    }
}

/// Dimension of the span of `vectors` (all of equal length).
pub fn span_rank(vectors: &[Vector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Scalar>> = vectors.to_vec();
    Matrix::from_rows(rows).expect("equal lengths").rank()
}

/// Indices of a maximal linearly independent prefix-greedy subfamily.
pub fn independent_subset(vectors: &[Vector]) -> Vec<usize> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let len = vectors[0].len();
    let m = Matrix::from_columns(len, vectors);
    m.rref().pivots
}

/// Linear operator `X ↦ A X − X B` on `rows(A) × cols(B)` matrices,
/// as a matrix acting on row-major vectors.
pub fn sylvester_operator(a: &Matrix, b: &Matrix) -> Matrix {
    assert!(a.is_square() && b.is_square());
    let (m1, m2) = (a.rows(), b.rows());
    let dim = m1 * m2;
    let mut op = Matrix::zeros(dim, dim);
    for i in 0..m1 {
        for k in 0..m2 {
            let row = i * m2 + k;
            for l in 0..m1 {
                let v = a.get(i, l);
                if !v.is_zero() {
                    let col = l * m2 + k;
                    let cur = op.get(row, col) + v;
                    op.set(row, col, cur);
                }
            }
            for l in 0..m2 {
                let v = b.get(l, k);
                if !v.is_zero() {
                    let col = i * m2 + l;
                    let cur = op.get(row, col) - v;
                    op.set(row, col, cur);
                }
            }
        }
    }
    op
}

/// `X ↦ [A, X]` on `n × n` matrices.
pub fn commutator_operator(a: &Matrix) -> Matrix {
    sylvester_operator(a, a)
}

/// `X ↦ P X S` on row-major vectors of `P.cols() × S.rows()` matrices.
pub fn left_right_operator(p: &Matrix, s: &Matrix) -> Matrix {
    let (r, c) = (p.rows(), s.cols());
    let (ir, ic) = (p.cols(), s.rows());
    let mut op = Matrix::zeros(r * c, ir * ic);
    for a in 0..r {
        for i in 0..ir {
            let pa = p.get(a, i);
            if pa.is_zero() {
                continue;
            }
            for k in 0..ic {
                for b in 0..c {
                    let sb = s.get(k, b);
                    if !sb.is_zero() {
                        op.set(a * c + b, i * ic + k, pa * sb);
                    }
                }
            }
        }
    }
    op
}

/// Incrementally grown echelon basis for membership and independence tests.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<(usize, Vector)>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Remainder of `v` after elimination against the basis.
    pub fn reduce(&self, v: &[Scalar]) -> Vector {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &(&f * y);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        let r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else { return false };
        let inv = r[p].inv().expect("nonzero pivot");
        self.rows.push((p, r.iter().map(|x| x * &inv).collect()));
        true
    }
}

/// Horizontal concatenation of operator matrices sharing a row count.
pub fn hstack(blocks: &[Matrix]) -> Matrix {
    let rows = blocks.first().map_or(0, Matrix::rows);
    let cols = blocks.iter().map(Matrix::cols).sum();
    let mut m = Matrix::zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        assert_eq!(b.rows(), rows);
        m.set_block(0, c0, b);
        c0 += b.cols();
    }
    m
}

/// Vertical concatenation of operator matrices sharing a column count.
pub fn vstack(blocks: &[Matrix]) -> Matrix {
    let cols = blocks.first().map_or(0, Matrix::cols);
    let rows = blocks.iter().map(Matrix::rows).sum();
    let mut m = Matrix::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        assert_eq!(b.cols(), cols);
        m.set_block(r0, 0, b);
        r0 += b.rows();
    }
    m
}

fn check_same_shape(a: &Matrix, b: &Matrix) {
    assert!(a.rows == b.rows && a.cols == b.cols, "shape mismatch {}x{} vs {}x{}", a.rows, a.cols, b.rows, b.cols);
}

impl<'b> Add<&'b Matrix> for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &'b Matrix) -> Matrix {
        check_same_shape(self, rhs);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'b> Sub<&'b Matrix> for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &'b Matrix) -> Matrix {
        check_same_shape(self, rhs);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'b> Mul<&'b Matrix> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &'b Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    out.data[i * rhs.cols + j] += &(a * b);
                }
            }
        }
        out
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(self, rhs: Matrix) -> Matrix {
        &self + &rhs
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        &self - &rhs
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        &self * &rhs
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }
}

impl Neg for Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        -&self
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// JSON form: list of rows of scalar strings.
impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Scalar>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(|e: DspError| serde::de::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;
    use proptest::prelude::*;

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::identity(3).rank(), 3);
        assert_eq!(Matrix::zeros(2, 5).rank(), 0);
        assert_eq!(Matrix::from_ints(&[[1, 2], [2, 4]]).rank(), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(Matrix::identity(4).kernel_basis().is_empty());
        assert_eq!(Matrix::zeros(2, 2).kernel_basis().len(), 2);
        let k = Matrix::from_ints(&[[1, 1], [1, 1]]).kernel_basis();
        assert_eq!(k.len(), 1);
        // proportional to (1, -1)
        assert_eq!(&k[0][0] + &k[0][1], q(0));
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn solve_examples() {
        let b = vec![q(3), q(-1), q(7)];
        assert_eq!(Matrix::identity(3).solve_linear(&b), Some(b.clone()));
        assert_eq!(Matrix::zeros(2, 2).solve_linear(&[q(1), q(0)]), None);
        let m = Matrix::from_ints(&[[1, 1], [0, 0]]);
        assert_eq!(m.solve_linear(&[q(2), q(0)]), Some(vec![q(2), q(0)]));
    }

    #[test]
    fn inverse_and_determinant() {
        let m = Matrix::from_ints(&[[2, 1, 0], [1, 3, 1], [0, 1, 4]]);
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).is_identity());
        assert_eq!(m.determinant(), q(18));
        assert!(Matrix::from_ints(&[[1, 2], [2, 4]]).inverse().is_none());
    }

    #[test]
    fn sylvester_operator_matches_direct_evaluation() {
        let a = Matrix::from_ints(&[[1, 2], [0, 3]]);
        let b = Matrix::from_ints(&[[5, 0, 1], [1, 1, 0], [0, 2, 2]]);
        let x = Matrix::from_ints(&[[1, -1, 2], [0, 3, 1]]);
        let direct = &(&a * &x) - &(&x * &b);
        let via_op = sylvester_operator(&a, &b).mul_vec(&x.to_vector());
        assert_eq!(direct.to_vector(), via_op);
    }

    fn small_matrix(max: usize) -> impl Strategy<Value = Matrix> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..=3, r * c).prop_map(move |v| {
                Matrix::from_vec(r, c, v.into_iter().map(q).collect()).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn rank_nullity(m in small_matrix(6)) {
            prop_assert_eq!(m.rank() + m.kernel_basis().len(), m.cols());
            prop_assert!(m.rank() <= m.rows().min(m.cols()));
        }

        #[test]
        fn solutions_satisfy_system(m in small_matrix(5), seed in proptest::collection::vec(-3i64..=3, 5)) {
            let x0: Vector = (0..m.cols()).map(|i| q(seed[i % seed.len()])).collect();
            let b = m.mul_vec(&x0);
            let x = m.solve_linear(&b).expect("consistent by construction");
            prop_assert_eq!(m.mul_vec(&x), b);
        }

        #[test]
        fn rank_invariant_under_invertible_multiplication(
            m in small_matrix(4),
            p in proptest::collection::vec(-2i64..=2, 16),
        ) {
            let n = m.rows();
            // unit lower-triangular times permutation-like shuffle keeps invertibility
            let mut l = Matrix::identity(n);
            for i in 0..n {
                for j in 0..i {
                    l.set(i, j, q(p[(i * 4 + j) % 16]));
                }
            }
            let mut perm = Matrix::zeros(n, n);
            for i in 0..n {
                perm.set(i, (i + 1) % n, q(1));
            }
            prop_assert_eq!((&(&perm * &l) * &m).rank(), m.rank());
            prop_assert_eq!(m.transpose().rank(), m.rank());
        }
    }
}
