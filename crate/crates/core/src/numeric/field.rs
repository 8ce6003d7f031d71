use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::error::{Error, Result};

const DEFAULT_EPSILON: f64 = 1e-12;

static EPSILON_BITS: AtomicU64 = AtomicU64::new(0);

/// Threshold below which a divisor or determinant counts as zero.
pub fn epsilon() -> f64 {
    let bits = EPSILON_BITS.load(Ordering::Relaxed);
    if bits == 0 {
        DEFAULT_EPSILON
    } else {
        f64::from_bits(bits)
    }
}

/// Override the singularity threshold for the whole process.
pub fn set_epsilon(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    EPSILON_BITS.store(eps.to_bits(), Ordering::Relaxed);
    Ok(())
}

/// Scalar arithmetic shared by reals, complex numbers and dual numbers over them.
pub trait Field:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;

    /// Modulus of the value part, ignoring any infinitesimal parts.
    fn modulus(&self) -> f64;

    /// Real part of the value, ignoring any infinitesimal parts.
    fn real(&self) -> f64;

    /// Imaginary part of the value, ignoring any infinitesimal parts.
    fn imag(&self) -> f64 {
        0.0
    }

    /// Square root: positive root on the reals, principal branch on the complex plane.
    fn sqrt(self) -> Result<Self>;

    fn is_negligible(&self) -> bool {
        self.modulus() <= epsilon()
    }

    /// Division that refuses divisors below the global epsilon.
    fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.is_negligible() {
            Err(Error::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }

    fn recip(self) -> Result<Self> {
        Self::one().checked_div(self)
    }

    fn powi(self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out *= self;
        }
        out
    }

    fn is_finite(&self) -> bool {
        self.real().is_finite() && self.imag().is_finite()
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn real(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Result<Self> {
        if self < 0.0 {
            Err(Error::NegativeRadicand { site: None })
        } else {
            Ok(f64::sqrt(self))
        }
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn real(&self) -> f64 {
        self.re
    }
    fn imag(&self) -> f64 {
        self.im
    }
    fn sqrt(self) -> Result<Self> {
        Ok(Complex64::sqrt(self))
    }
}

/// Fields with a total order on the value part; Lagrangians are evaluated over these.
pub trait RealField: Field + PartialOrd {
    /// Evaluate a plain `f64` function, pushing infinitesimal parts through central
    /// differences with relative step `step`.
    fn lift(f: &dyn Fn(&[f64]) -> f64, args: &[Self], step: f64) -> Self;
}

impl RealField for f64 {
    fn lift(f: &dyn Fn(&[f64]) -> f64, args: &[Self], _step: f64) -> Self {
        f(args)
    }
}

/// Central difference of `f` in argument `i` with step relative to the argument size.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, rel_step: f64) -> f64 {
    let h = rel_step * x[i].abs().max(1.0);
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    hi[i] += h;
    lo[i] -= h;
    (f(&hi) - f(&lo)) / (2.0 * h)
}
