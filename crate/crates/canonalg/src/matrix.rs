//! Dense exact matrices over [`Scalar`] or [`DualScalar`] entries.
//!
//! Rational determinants and inverses run fraction-free (Bareiss, and the
//! Gauss-Jordan variant with exact divisions) on integer-scaled rows; prime
//! fields use plain Gauss-Jordan. Dual-number matrices invert through the
//! generic path, pivoting on entries whose value part is invertible.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dual::DualScalar;
use crate::error::{CanonError, Result};
use crate::scalar::{Scalar, ScalarKind};

/// Entry types that matrix algorithms can work with. `try_inv` failing marks
/// an entry unusable as a pivot (zero in a field; zero value part for duals).
pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn kind(&self) -> ScalarKind;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Result<Self>;
    fn sub(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn try_inv(&self) -> Result<Self>;
}

impl Coeff for Scalar {
    fn kind(&self) -> ScalarKind {
        Scalar::kind(self)
    }
    fn zero_like(&self) -> Self {
        Scalar::zero(Scalar::kind(self))
    }
    fn one_like(&self) -> Self {
        Scalar::one(Scalar::kind(self))
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        Scalar::add(self, other)
    }
    fn sub(&self, other: &Self) -> Result<Self> {
        Scalar::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        Scalar::mul(self, other)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn try_inv(&self) -> Result<Self> {
        Scalar::inv(self)
    }
}

impl Coeff for DualScalar {
    fn kind(&self) -> ScalarKind {
        DualScalar::kind(self)
    }
    fn zero_like(&self) -> Self {
        DualScalar::zero(DualScalar::kind(self))
    }
    fn one_like(&self) -> Self {
        DualScalar::one(DualScalar::kind(self))
    }
    fn is_zero(&self) -> bool {
        DualScalar::is_zero(self)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        DualScalar::add(self, other)
    }
    fn sub(&self, other: &Self) -> Result<Self> {
        DualScalar::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        DualScalar::mul(self, other)
    }
    fn neg(&self) -> Self {
        DualScalar::neg(self)
    }
    fn try_inv(&self) -> Result<Self> {
        DualScalar::inv(self)
    }
}

/// Dense row-major matrix with entries of one scalar kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T = Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Coeff> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(CanonError::DimensionMismatch(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(CanonError::DimensionMismatch(format!(
                "expected {} entries for {}x{}, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        let kind = data[0].kind();
        if data.iter().any(|x| x.kind() != kind) {
            return Err(CanonError::KindMismatch(
                "matrix entries must share one scalar kind".into(),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix::new(rows, cols, data)
    }

    pub fn identity_like(n: usize, proto: &T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(if r == c {
                    proto.one_like()
                } else {
                    proto.zero_like()
                });
            }
        }
        Matrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn zero_like(rows: usize, cols: usize, proto: &T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![proto.zero_like(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entry_kind(&self) -> ScalarKind {
        self.data[0].kind()
    }

    pub fn row_slice(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// New matrix from the given column indices, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Matrix<T>> {
        if cols.iter().any(|&c| c >= self.cols) {
            return Err(CanonError::DimensionMismatch(
                "column index out of range".into(),
            ));
        }
        Matrix::from_fn(self.rows, cols.len(), |r, i| self.get(r, cols[i]).clone())
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
            .expect("transpose preserves validity")
    }

    fn check_kind(&self, other: &Matrix<T>) -> Result<()> {
        if self.entry_kind() != other.entry_kind() {
            return Err(CanonError::KindMismatch(format!(
                "{} vs {}",
                self.entry_kind(),
                other.entry_kind()
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_kind(other)?;
        if self.cols != other.rows {
            return Err(CanonError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zero_like(self.rows, other.cols, &self.data[0]);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let term = a.mul(other.get(k, c))?;
                    let cur = out.get(r, c).add(&term)?;
                    out.set(r, c, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_kind(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CanonError::DimensionMismatch("matrix add shapes".into()));
        }
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, c).add(other.get(r, c)).expect("kinds checked")
        })
    }

    pub fn sub(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_kind(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CanonError::DimensionMismatch("matrix sub shapes".into()));
        }
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, c).sub(other.get(r, c)).expect("kinds checked")
        })
    }

    pub fn scale(&self, s: &T) -> Result<Matrix<T>> {
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, c).mul(s).expect("kinds checked")
        })
    }

    /// Kronecker product with the convention (0-based)
    /// `out(i·Yrows + r, j·Ycols + c) = X(i,j) · Y(r,c)`.
    pub fn kron(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_kind(other)?;
        Matrix::from_fn(
            self.rows * other.rows,
            self.cols * other.cols,
            |rr, cc| {
                let (i, r) = (rr / other.rows, rr % other.rows);
                let (j, c) = (cc / other.cols, cc % other.cols);
                self.get(i, j).mul(other.get(r, c)).expect("kinds checked")
            },
        )
    }

    pub fn is_identity(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in 0..self.cols {
                let e = self.get(r, c);
                if r == c {
                    if e != &e.one_like() {
                        return false;
                    }
                } else if !e.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Generic Gauss-Jordan inverse pivoting on invertible entries. Works
    /// over fields and over dual numbers (local ring: a pivot needs only an
    /// invertible value part).
    pub fn inverse_generic(&self) -> Result<Matrix<T>> {
        if self.rows != self.cols {
            return Err(CanonError::DimensionMismatch(
                "inverse requires a square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut left = self.clone();
        let mut right = Matrix::identity_like(n, &self.data[0]);
        for col in 0..n {
            let mut pivot = None;
            for r in col..n {
                if left.get(r, col).try_inv().is_ok() {
                    pivot = Some(r);
                    break;
                }
            }
            let piv = pivot.ok_or(CanonError::SingularMatrix)?;
            if piv != col {
                for c in 0..n {
                    left.data.swap(piv * n + c, col * n + c);
                    right.data.swap(piv * n + c, col * n + c);
                }
            }
            let inv = left.get(col, col).try_inv()?;
            for c in 0..n {
                left.set(col, c, left.get(col, c).mul(&inv)?);
                right.set(col, c, right.get(col, c).mul(&inv)?);
            }
            for r in 0..n {
                if r == col || left.get(r, col).is_zero() {
                    continue;
                }
                let factor = left.get(r, col).clone();
                for c in 0..n {
                    let l = left.get(r, c).sub(&factor.mul(left.get(col, c))?)?;
                    left.set(r, c, l);
                    let rv = right.get(r, c).sub(&factor.mul(right.get(col, c))?)?;
                    right.set(r, c, rv);
                }
            }
        }
        Ok(right)
    }
}

// ---------------------------------------------------------------------------
// Scalar-specific exact elimination.
// ---------------------------------------------------------------------------

/// Row-scale a rational matrix to integers: returns (integer rows, row scales
/// ℓ_i) with `int_row_i = ℓ_i · row_i`.
fn integer_scaled(m: &Matrix<Scalar>) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut rows = Vec::with_capacity(m.rows());
    let mut scales = Vec::with_capacity(m.rows());
    for r in 0..m.rows() {
        let mut lcm = BigInt::one();
        for c in 0..m.cols() {
            if let Scalar::Rational(q) = m.get(r, c) {
                lcm = lcm.lcm(q.denom());
            }
        }
        let mut int_row = Vec::with_capacity(m.cols());
        for c in 0..m.cols() {
            match m.get(r, c) {
                Scalar::Rational(q) => {
                    let v = q.numer() * (&lcm / q.denom());
                    int_row.push(v);
                }
                _ => unreachable!("rational matrix expected"),
            }
        }
        rows.push(int_row);
        scales.push(lcm);
    }
    (rows, scales)
}

fn exact_div(num: BigInt, den: &BigInt) -> BigInt {
    debug_assert!(!den.is_zero());
    let (q, r) = num.div_rem(den);
    debug_assert!(r.is_zero(), "fraction-free elimination divisions are exact");
    q
}

/// Bareiss fraction-free determinant of an integer matrix; consumes `rows`.
fn bareiss_det(mut rows: Vec<Vec<BigInt>>) -> BigInt {
    let n = rows.len();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        if rows[k][k].is_zero() {
            match (k + 1..n).find(|&r| !rows[r][k].is_zero()) {
                Some(r) => {
                    rows.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &rows[i][j] * &rows[k][k] - &rows[i][k] * &rows[k][j];
                rows[i][j] = exact_div(num, &prev);
            }
            rows[i][k] = BigInt::zero();
        }
        prev = rows[k][k].clone();
    }
    let det = rows[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// One-pass fraction-free Gauss-Jordan on `[B | I]`; returns `(d, d·B⁻¹)`
/// with `d = ±det(B)` (the common diagonal value), or `None` if singular.
fn ffgj_inverse(int_rows: &[Vec<BigInt>]) -> Option<(BigInt, Vec<Vec<BigInt>>)> {
    let n = int_rows.len();
    let mut aug: Vec<Vec<BigInt>> = int_rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            for j in 0..n {
                r.push(if i == j { BigInt::one() } else { BigInt::zero() });
            }
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        if aug[k][k].is_zero() {
            let r = (k + 1..n).find(|&r| !aug[r][k].is_zero())?;
            aug.swap(k, r);
        }
        let piv = aug[k][k].clone();
        let pivot_row = aug[k].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let factor = row[k].clone();
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                let num = &*x * &piv - &factor * pr;
                *x = exact_div(num, &prev);
            }
        }
        prev = piv;
    }
    let d = aug[n - 1][n - 1].clone();
    debug_assert!((0..n).all(|i| aug[i][i] == d));
    let right = aug.into_iter().map(|row| row[n..].to_vec()).collect();
    Some((d, right))
}

fn fp_gauss_det(p: u64, mut rows: Vec<Vec<u64>>) -> u64 {
    use crate::scalar::{inv_mod, mul_mod, neg_mod, sub_mod};
    let n = rows.len();
    let mut det = 1u64;
    for k in 0..n {
        let Some(r) = (k..n).find(|&r| rows[r][k] != 0) else {
            return 0;
        };
        if r != k {
            rows.swap(k, r);
            det = neg_mod(p, det);
        }
        let piv = rows[k][k];
        det = mul_mod(p, det, piv);
        let pinv = inv_mod(p, piv).expect("nonzero pivot");
        let (upper, lower) = rows.split_at_mut(k + 1);
        let pivot_row = &upper[k];
        for row in lower.iter_mut() {
            if row[k] == 0 {
                continue;
            }
            let f = mul_mod(p, row[k], pinv);
            for (x, &pv) in row[k..].iter_mut().zip(&pivot_row[k..]) {
                let t = mul_mod(p, f, pv);
                *x = sub_mod(p, *x, t);
            }
        }
    }
    det
}

impl Matrix<Scalar> {
    pub fn identity(n: usize, kind: ScalarKind) -> Self {
        Matrix::identity_like(n, &Scalar::zero(kind))
    }

    pub fn zero(rows: usize, cols: usize, kind: ScalarKind) -> Self {
        Matrix::zero_like(rows, cols, &Scalar::zero(kind))
    }

    pub fn from_ints(rows: usize, cols: usize, vals: &[i64]) -> Result<Self> {
        Matrix::new(rows, cols, vals.iter().map(|&v| Scalar::from_int(v)).collect())
    }

    /// Exact determinant: Bareiss on integer-scaled rows for rationals,
    /// Gaussian elimination for prime fields.
    pub fn det_exact(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return Err(CanonError::DimensionMismatch(
                "determinant requires a square matrix".into(),
            ));
        }
        match self.entry_kind() {
            ScalarKind::Rational => {
                let (rows, scales) = integer_scaled(self);
                let det_scaled = bareiss_det(rows);
                let mut denom = BigInt::one();
                for s in &scales {
                    denom *= s;
                }
                Ok(Scalar::Rational(BigRational::new(det_scaled, denom)))
            }
            ScalarKind::Fp(p) => {
                let rows: Vec<Vec<u64>> = (0..self.rows)
                    .map(|r| {
                        self.row_slice(r)
                            .iter()
                            .map(|s| match s {
                                Scalar::Fp { v, .. } => *v,
                                _ => unreachable!(),
                            })
                            .collect()
                    })
                    .collect();
                Ok(Scalar::fp_unchecked(p, fp_gauss_det(p, rows)))
            }
        }
    }

    /// Exact inverse: fraction-free Gauss-Jordan for rationals, plain
    /// Gauss-Jordan for prime fields.
    pub fn inverse(&self) -> Result<Matrix<Scalar>> {
        if self.rows != self.cols {
            return Err(CanonError::DimensionMismatch(
                "inverse requires a square matrix".into(),
            ));
        }
        match self.entry_kind() {
            ScalarKind::Rational => {
                let n = self.rows;
                let (rows, scales) = integer_scaled(self);
                let (d, right) = ffgj_inverse(&rows).ok_or(CanonError::SingularMatrix)?;
                // B = D·X with D = diag(scales)  =>  X⁻¹ = B⁻¹·D, entrywise
                // (X⁻¹)_{ij} = (right_{ij} / d) · ℓ_j.
                Matrix::from_fn(n, n, |i, j| {
                    Scalar::Rational(BigRational::new(&right[i][j] * &scales[j], d.clone()))
                })
            }
            ScalarKind::Fp(_) => self.inverse_generic(),
        }
    }

    /// Rank over the entry field.
    pub fn rank(&self) -> usize {
        match self.entry_kind() {
            ScalarKind::Rational => {
                let (mut rows, _) = integer_scaled(self);
                // fraction-free forward elimination, counting pivots
                let nr = self.rows;
                let nc = self.cols;
                let mut prev = BigInt::one();
                let mut rank = 0usize;
                let mut row = 0usize;
                for col in 0..nc {
                    let Some(r) = (row..nr).find(|&r| !rows[r][col].is_zero()) else {
                        continue;
                    };
                    rows.swap(row, r);
                    for i in row + 1..nr {
                        for j in col + 1..nc {
                            let num = &rows[i][j] * &rows[row][col] - &rows[i][col] * &rows[row][j];
                            rows[i][j] = exact_div(num, &prev);
                        }
                        rows[i][col] = BigInt::zero();
                    }
                    prev = rows[row][col].clone();
                    row += 1;
                    rank += 1;
                    if row == nr {
                        break;
                    }
                }
                rank
            }
            ScalarKind::Fp(p) => {
                use crate::scalar::{inv_mod, mul_mod, sub_mod};
                let mut rows: Vec<Vec<u64>> = (0..self.rows)
                    .map(|r| {
                        self.row_slice(r)
                            .iter()
                            .map(|s| match s {
                                Scalar::Fp { v, .. } => *v,
                                _ => unreachable!(),
                            })
                            .collect()
                    })
                    .collect();
                let (nr, nc) = (self.rows, self.cols);
                let mut rank = 0usize;
                let mut row = 0usize;
                for col in 0..nc {
                    let Some(r) = (row..nr).find(|&r| rows[r][col] != 0) else {
                        continue;
                    };
                    rows.swap(row, r);
                    let pinv = inv_mod(p, rows[row][col]).expect("nonzero pivot");
                    let (upper, lower) = rows.split_at_mut(row + 1);
                    let pivot_row = &upper[row];
                    for other in lower.iter_mut() {
                        if other[col] == 0 {
                            continue;
                        }
                        let f = mul_mod(p, other[col], pinv);
                        for (x, &pv) in other[col..].iter_mut().zip(&pivot_row[col..]) {
                            let t = mul_mod(p, f, pv);
                            *x = sub_mod(p, *x, t);
                        }
                    }
                    row += 1;
                    rank += 1;
                    if row == nr {
                        break;
                    }
                }
                rank
            }
        }
    }
}

// Free-function aliases mirroring the method API.
pub fn mat_mul<T: Coeff>(x: &Matrix<T>, y: &Matrix<T>) -> Result<Matrix<T>> {
    x.mul(y)
}
pub fn kron<T: Coeff>(x: &Matrix<T>, y: &Matrix<T>) -> Result<Matrix<T>> {
    x.kron(y)
}
pub fn det_exact(x: &Matrix<Scalar>) -> Result<Scalar> {
    x.det_exact()
}
pub fn mat_inverse(x: &Matrix<Scalar>) -> Result<Matrix<Scalar>> {
    x.inverse()
}
pub fn mat_rank(x: &Matrix<Scalar>) -> usize {
    x.rank()
}

/// Incremental row-echelon basis over F_p on raw residues, for greedy rank
/// scans over many candidate rows.
pub(crate) struct FpRowBasis {
    p: u64,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl FpRowBasis {
    pub(crate) fn new(p: u64) -> Self {
        FpRowBasis {
            p,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Reduce `row` against the basis; if a nonzero remainder survives,
    /// absorb it and report true.
    pub(crate) fn try_add(&mut self, row: &[u64]) -> bool {
        use crate::scalar::{inv_mod, mul_mod, sub_mod};
        let p = self.p;
        let mut r = row.to_vec();
        for (b, &pv) in self.rows.iter().zip(&self.pivots) {
            let c = r[pv];
            if c != 0 {
                for (x, y) in r.iter_mut().zip(b.iter()) {
                    *x = sub_mod(p, *x, mul_mod(p, c, *y));
                }
            }
        }
        match r.iter().position(|&x| x != 0) {
            Some(pv) => {
                let inv = inv_mod(p, r[pv]).expect("nonzero residue is invertible");
                for x in r.iter_mut() {
                    *x = mul_mod(p, *x, inv);
                }
                self.rows.push(r);
                self.pivots.push(pv);
                true
            }
            None => false,
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }
}
