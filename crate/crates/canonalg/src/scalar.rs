//! Exact field scalars: arbitrary-precision rationals and odd prime fields.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{CanonError, Result};

pub const MERSENNE_61: u64 = (1 << 61) - 1;
pub const MERSENNE_31: u64 = (1 << 31) - 1;

/// The field a [`Scalar`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Rational,
    Fp(u64),
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarKind::Rational => write!(f, "rational"),
            ScalarKind::Fp(p) => write!(f, "fp:{p}"),
        }
    }
}

/// An exact field element: a reduced big rational or a residue mod an odd
/// prime. Rationals are kept in lowest terms with positive denominator;
/// residues are kept in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Fp { p: u64, v: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Deterministic Miller–Rabin for u64 (the listed bases decide primality for
/// every 64-bit integer).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(n, a % n, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(n, x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `a * b mod p` with fast folding reductions for the Mersenne primes
/// 2^61 - 1 and 2^31 - 1, plain 128-bit remainder otherwise.
#[inline]
pub fn mul_mod(p: u64, a: u64, b: u64) -> u64 {
    if p == MERSENNE_61 {
        let x = (a as u128) * (b as u128);
        let folded = (x & MERSENNE_61 as u128) + (x >> 61);
        let folded = (folded & MERSENNE_61 as u128) + (folded >> 61);
        let mut r = folded as u64;
        if r >= MERSENNE_61 {
            r -= MERSENNE_61;
        }
        r
    } else if p == MERSENNE_31 {
        let x = a.wrapping_mul(b); // both < 2^31, product < 2^62: exact
        let folded = (x & MERSENNE_31) + (x >> 31);
        let folded = (folded & MERSENNE_31) + (folded >> 31);
        let mut r = folded;
        if r >= MERSENNE_31 {
            r -= MERSENNE_31;
        }
        r
    } else {
        ((a as u128) * (b as u128) % (p as u128)) as u64
    }
}

#[inline]
pub fn add_mod(p: u64, a: u64, b: u64) -> u64 {
    let s = a + b; // both < p <= 2^63: no overflow
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(p: u64, a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn neg_mod(p: u64, a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub fn pow_mod(p: u64, mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(p, acc, base);
        }
        base = mul_mod(p, base, base);
        exp >>= 1;
    }
    acc
}

/// Modular inverse by extended Euclid; `None` when `a == 0 mod p`.
pub fn inv_mod(p: u64, a: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return None;
    }
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "p must be prime");
    let mut t = t0 % p as i128;
    if t < 0 {
        t += p as i128;
    }
    Some(t as u64)
}

impl Scalar {
    /// Rational from an integer.
    pub fn from_int(n: i64) -> Self {
        Scalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Reduced rational `num/den`.
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(CanonError::DivisionByZero);
        }
        Ok(Scalar::Rational(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    pub fn from_big_rational(r: BigRational) -> Self {
        Scalar::Rational(r)
    }

    /// Residue `v mod p`; rejects `p <= 2` and composite `p`.
    pub fn fp(p: u64, v: u64) -> Result<Self> {
        if p <= 2 {
            return Err(CanonError::UnsupportedField(format!(
                "prime fields require p > 2, got {p}"
            )));
        }
        if !is_prime_u64(p) {
            return Err(CanonError::UnsupportedField(format!("{p} is not prime")));
        }
        Ok(Scalar::Fp { p, v: v % p })
    }

    /// Residue constructor for an already-validated prime (internal hot path).
    #[inline]
    pub(crate) fn fp_unchecked(p: u64, v: u64) -> Self {
        debug_assert!(p > 2);
        Scalar::Fp { p, v: v % p }
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            Scalar::Rational(_) => ScalarKind::Rational,
            Scalar::Fp { p, .. } => ScalarKind::Fp(*p),
        }
    }

    pub fn zero(kind: ScalarKind) -> Self {
        match kind {
            ScalarKind::Rational => Scalar::Rational(BigRational::zero()),
            ScalarKind::Fp(p) => Scalar::Fp { p, v: 0 },
        }
    }

    pub fn one(kind: ScalarKind) -> Self {
        match kind {
            ScalarKind::Rational => Scalar::Rational(BigRational::one()),
            ScalarKind::Fp(p) => Scalar::Fp { p, v: 1 },
        }
    }

    /// Integer `n` embedded into the field of `kind`.
    pub fn int_in(kind: ScalarKind, n: i64) -> Self {
        match kind {
            ScalarKind::Rational => Scalar::from_int(n),
            ScalarKind::Fp(p) => {
                let r = n.rem_euclid(p as i64) as u64;
                Scalar::Fp { p, v: r }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    fn check_same_kind(&self, other: &Scalar) -> Result<()> {
        if self.kind() != other.kind() {
            return Err(CanonError::KindMismatch(format!(
                "{} vs {}",
                self.kind(),
                other.kind()
            )));
        }
        Ok(())
    }

    /// In debug builds, assert the canonical-form invariant after an
    /// operation: lowest terms, positive denominator (num-rational maintains
    /// this; the assertion guards against constructing around it).
    #[inline]
    fn debug_canonical(self) -> Self {
        #[cfg(debug_assertions)]
        if let Scalar::Rational(r) = &self {
            use num_integer::Integer;
            assert!(r.denom().is_positive(), "denominator must be positive");
            assert!(
                r.numer().gcd(r.denom()).is_one() || r.numer().is_zero(),
                "rational must be in lowest terms"
            );
            if r.numer().is_zero() {
                assert!(r.denom().is_one(), "zero must be 0/1");
            }
        }
        self
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same_kind(other)?;
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                p: *p,
                v: add_mod(*p, *a, *b),
            },
            _ => unreachable!(),
        }
        .debug_canonical())
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same_kind(other)?;
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a - b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                p: *p,
                v: sub_mod(*p, *a, *b),
            },
            _ => unreachable!(),
        }
        .debug_canonical())
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same_kind(other)?;
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                p: *p,
                v: mul_mod(*p, *a, *b),
            },
            _ => unreachable!(),
        }
        .debug_canonical())
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same_kind(other)?;
        if other.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a / b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => {
                let binv = inv_mod(*p, *b).ok_or(CanonError::DivisionByZero)?;
                Scalar::Fp {
                    p: *p,
                    v: mul_mod(*p, *a, binv),
                }
            }
            _ => unreachable!(),
        }
        .debug_canonical())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: neg_mod(*p, *v),
            },
        }
        .debug_canonical()
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(a) => Scalar::Rational(a.recip()),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: inv_mod(*p, *v).ok_or(CanonError::DivisionByZero)?,
            },
        }
        .debug_canonical())
    }

    /// Reduce a rational scalar modulo `p`, if its denominator is invertible.
    pub fn reduce_mod(&self, p: u64) -> Result<Scalar> {
        match self {
            Scalar::Fp { .. } => Err(CanonError::KindMismatch(
                "reduce_mod expects a rational scalar".into(),
            )),
            Scalar::Rational(r) => {
                let pi = BigInt::from(p);
                let num = r.numer().mod_floor_big(&pi);
                let den = r.denom().mod_floor_big(&pi);
                let den_inv = inv_mod(p, den).ok_or(CanonError::DivisionByZero)?;
                Ok(Scalar::Fp {
                    p,
                    v: mul_mod(p, num, den_inv),
                })
            }
        }
    }
}

trait ModFloorBig {
    fn mod_floor_big(&self, p: &BigInt) -> u64;
}

impl ModFloorBig for BigInt {
    fn mod_floor_big(&self, p: &BigInt) -> u64 {
        use num_integer::Integer;
        let r = self.mod_floor(p);
        let (_, digits) = r.to_u64_digits();
        match digits.len() {
            0 => 0,
            1 => digits[0],
            _ => unreachable!("residue below a 64-bit modulus"),
        }
    }
}

/// Free-function entry point: one operation on two scalars of equal kind.
pub fn scalar_arith(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}
