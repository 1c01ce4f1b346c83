//! Dual numbers `a + εa'` with `ε² = 0`, for forward-mode differentiation of
//! the exact pipeline.

use crate::error::{CanonError, Result};
use crate::scalar::{Scalar, ScalarKind};

#[derive(Debug, Clone, PartialEq)]
pub struct DualScalar {
    pub value: Scalar,
    pub deriv: Scalar,
}

impl DualScalar {
    pub fn new(value: Scalar, deriv: Scalar) -> Result<Self> {
        if value.kind() != deriv.kind() {
            return Err(CanonError::KindMismatch(format!(
                "dual parts must share kind: {} vs {}",
                value.kind(),
                deriv.kind()
            )));
        }
        Ok(DualScalar { value, deriv })
    }

    /// Lift with zero derivative.
    pub fn constant(value: Scalar) -> Self {
        let deriv = Scalar::zero(value.kind());
        DualScalar { value, deriv }
    }

    /// Lift as the active variable (derivative one).
    pub fn variable(value: Scalar) -> Self {
        let deriv = Scalar::one(value.kind());
        DualScalar { value, deriv }
    }

    pub fn kind(&self) -> ScalarKind {
        self.value.kind()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero() && self.deriv.is_zero()
    }

    pub fn zero(kind: ScalarKind) -> Self {
        DualScalar {
            value: Scalar::zero(kind),
            deriv: Scalar::zero(kind),
        }
    }

    pub fn one(kind: ScalarKind) -> Self {
        DualScalar {
            value: Scalar::one(kind),
            deriv: Scalar::zero(kind),
        }
    }

    pub fn add(&self, other: &DualScalar) -> Result<DualScalar> {
        Ok(DualScalar {
            value: self.value.add(&other.value)?,
            deriv: self.deriv.add(&other.deriv)?,
        })
    }

    pub fn sub(&self, other: &DualScalar) -> Result<DualScalar> {
        Ok(DualScalar {
            value: self.value.sub(&other.value)?,
            deriv: self.deriv.sub(&other.deriv)?,
        })
    }

    /// `(a + εa')(b + εb') = ab + ε(ab' + a'b)`.
    pub fn mul(&self, other: &DualScalar) -> Result<DualScalar> {
        let value = self.value.mul(&other.value)?;
        let deriv = self
            .value
            .mul(&other.deriv)?
            .add(&self.deriv.mul(&other.value)?)?;
        Ok(DualScalar { value, deriv })
    }

    pub fn neg(&self) -> DualScalar {
        DualScalar {
            value: self.value.neg(),
            deriv: self.deriv.neg(),
        }
    }

    /// `(a + εa')^{-1} = a^{-1} - ε a^{-2} a'`; requires `a != 0`.
    pub fn inv(&self) -> Result<DualScalar> {
        if self.value.is_zero() {
            return Err(CanonError::NonInvertibleDual);
        }
        let vinv = self.value.inv()?;
        let deriv = vinv.mul(&vinv)?.mul(&self.deriv)?.neg();
        Ok(DualScalar { value: vinv, deriv })
    }

    pub fn div(&self, other: &DualScalar) -> Result<DualScalar> {
        self.mul(&other.inv()?)
    }
}

/// Free-function entry point mirroring [`crate::scalar::scalar_arith`].
pub fn dual_arith(
    a: &DualScalar,
    b: &DualScalar,
    op: crate::scalar::ArithOp,
) -> Result<DualScalar> {
    use crate::scalar::ArithOp;
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
    }
}
