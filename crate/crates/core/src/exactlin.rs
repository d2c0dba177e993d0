//! Exact rational scalars, dense matrices and subspaces.
//!
//! Every value is kept in canonical form: `Rational` is always reduced with a
//! positive denominator, and `Subspace` stores its basis in reduced row
//! echelon form, so structural equality coincides with mathematical equality.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ChowError;

/// Arbitrary-precision rational number in lowest terms.
pub type Rational = BigRational;

/// `n / d` as a reduced rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders a rational the way the reports expect: `3`, `-1/2`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn zero_vec(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Rational> {
    let mut v = zero_vec(n);
    v[i] = Rational::one();
    v
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn add_vec(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale_vec(s: &Rational, v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| s * x).collect()
}

/// `acc += s * v`
pub fn axpy(acc: &mut [Rational], s: &Rational, v: &[Rational]) {
    if s.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += s * x;
        }
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(fmt_rational).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]({}x{})", self.rows, self.cols)
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        RatMatrix { rows, cols, data }
    }

    /// Builds a matrix from explicit rows; `cols` fixes the width when
    /// `rows` is empty.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self, ChowError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(ChowError::AmbientMismatch(format!(
                    "row {i} has length {} but matrix width is {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(RatMatrix {
            rows: n,
            cols,
            data,
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(rows.len(), cols, |r, c| int(rows[r][c]))
    }

    /// Matrix whose columns are the given vectors of length `len`.
    pub fn from_columns(columns: &[Vec<Rational>], len: usize) -> Self {
        Self::from_fn(len, columns.len(), |r, c| columns[c][r].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / cols.max(1), k % cols.max(1), v))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| s * x).collect(),
        }
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    /// `v^T * self` for a row vector `v`.
    pub fn vec_mul(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.rows, "vector-matrix shape mismatch");
        let mut out = zero_vec(self.cols);
        for (r, s) in v.iter().enumerate() {
            axpy(&mut out, s, self.row(r));
        }
        out
    }

    /// Rank-one matrix `u v^T`.
    pub fn outer(u: &[Rational], v: &[Rational]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| &u[r] * &v[c])
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for c in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let Some(p) = (pivot_row..m.rows).find(|&r| !m[(r, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(p, pivot_row);
            let inv = m[(pivot_row, c)].recip();
            for k in c..m.cols {
                let v = &m[(pivot_row, k)] * &inv;
                m[(pivot_row, k)] = v;
            }
            let pivot: Vec<Rational> = m.row(pivot_row).to_vec();
            for r in 0..m.rows {
                if r != pivot_row && !m[(r, c)].is_zero() {
                    let factor = m[(r, c)].clone();
                    for k in c..m.cols {
                        if !pivot[k].is_zero() {
                            let v = &m[(r, k)] - &factor * &pivot[k];
                            m[(r, k)] = v;
                        }
                    }
                }
            }
            pivots.push(c);
            pivot_row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn inverse(&self) -> Option<RatMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(Self::zeros(0, 0));
        }
        let aug = Self::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self[(r, c)].clone()
            } else if c - n == r {
                Rational::one()
            } else {
                Rational::zero()
            }
        });
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(Self::from_fn(n, n, |r, c| red[(r, n + c)].clone()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &RatMatrix {
    type Output = RatMatrix;
    fn add(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &RatMatrix {
    type Output = RatMatrix;
    fn sub(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &RatMatrix {
    type Output = RatMatrix;
    fn neg(self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = &rhs[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] += a * b;
                    }
                }
            }
        }
        out
    }
}

/// Basis of the null space `{v : M v = 0}`, one vector per free column of
/// the reduced row echelon form.
pub fn kernel(m: &RatMatrix) -> Vec<Vec<Rational>> {
    let (red, pivots) = m.rref();
    let free: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = unit_vec(m.cols(), f);
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -red[(row, f)].clone();
            }
            v
        })
        .collect()
}

/// Basis of `span(u) ∩ span(v)` inside `Q^ambient`, in reduced echelon form.
pub fn intersect_subspaces(
    ambient: usize,
    u: &[Vec<Rational>],
    v: &[Vec<Rational>],
) -> Result<Vec<Vec<Rational>>, ChowError> {
    if let Some(bad) = u.iter().chain(v).find(|x| x.len() != ambient) {
        return Err(ChowError::AmbientMismatch(format!(
            "vector of length {} in an ambient space of dimension {ambient}",
            bad.len()
        )));
    }
    // Solve sum a_i u_i - sum b_j v_j = 0, then map the a-part back.
    let joint = RatMatrix::from_fn(ambient, u.len() + v.len(), |r, c| {
        if c < u.len() {
            u[c][r].clone()
        } else {
            -v[c - u.len()][r].clone()
        }
    });
    let witnesses: Vec<Vec<Rational>> = kernel(&joint)
        .into_iter()
        .map(|k| {
            let mut x = zero_vec(ambient);
            for (i, ui) in u.iter().enumerate() {
                axpy(&mut x, &k[i], ui);
            }
            x
        })
        .collect();
    Ok(Subspace::span(ambient, &witnesses)?.into_basis())
}

/// Linear subspace of `Q^n` with a canonical (reduced echelon) basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Rational>>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|v| {
                let parts: Vec<String> = v.iter().map(fmt_rational).collect();
                format!("({})", parts.join(", "))
            })
            .collect();
        write!(f, "span{{{}}} ⊆ Q^{}", rows.join(", "), self.ambient)
    }
}

impl Subspace {
    pub fn span(ambient: usize, vectors: &[Vec<Rational>]) -> Result<Self, ChowError> {
        if let Some(bad) = vectors.iter().find(|x| x.len() != ambient) {
            return Err(ChowError::AmbientMismatch(format!(
                "vector of length {} in an ambient space of dimension {ambient}",
                bad.len()
            )));
        }
        let rows = RatMatrix::from_rows(vectors.to_vec(), ambient)?;
        let (red, pivots) = rows.rref();
        let basis = (0..pivots.len()).map(|r| red.row(r).to_vec()).collect();
        Ok(Subspace { ambient, basis })
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: (0..ambient).map(|i| unit_vec(ambient, i)).collect(),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<Vec<Rational>> {
        self.basis
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, ChowError> {
        if self.ambient != other.ambient {
            return Err(ChowError::AmbientMismatch(format!(
                "intersecting subspaces of Q^{} and Q^{}",
                self.ambient, other.ambient
            )));
        }
        let basis = intersect_subspaces(self.ambient, &self.basis, &other.basis)?;
        Ok(Subspace {
            ambient: self.ambient,
            basis,
        })
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        RatMatrix::from_rows(rows, self.ambient)
            .map(|m| m.rank() == self.basis.len())
            .unwrap_or(false)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|v| other.contains(v))
    }
}
