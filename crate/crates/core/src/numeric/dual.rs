use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use super::field::{central_difference, Field, RealField};
use crate::error::{Error, Result};

/// Step used for differences taken inside an outer difference, where the
/// rounding error scales with the inverse square of the step.
const NESTED_STEP: f64 = 1e-4;

/// Dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<F> {
    pub re: F,
    pub eps: F,
}

/// First-order dual over the reals.
pub type D1 = Dual<f64>;
/// Second-order (hyper-dual) number, used for Hessians and Newton Jacobians of gradients.
pub type D2 = Dual<Dual<f64>>;

impl<F: Field> Dual<F> {
    pub fn new(re: F, eps: F) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: F) -> Self {
        Dual { re, eps: F::zero() }
    }

    /// The independent variable at `re`: tangent one.
    pub fn variable(re: F) -> Self {
        Dual { re, eps: F::one() }
    }
}

impl<F: Field> Add for Dual<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<F: Field> Sub for Dual<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<F: Field> Mul for Dual<F> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<F: Field> Div for Dual<F> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.re / rhs.re;
        Dual::new(q, (self.eps - q * rhs.eps) / rhs.re)
    }
}

impl<F: Field> Neg for Dual<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<F: Field> AddAssign for Dual<F> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<F: Field> SubAssign for Dual<F> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<F: Field> MulAssign for Dual<F> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<F: Field> Field for Dual<F> {
    fn zero() -> Self {
        Dual::constant(F::zero())
    }
    fn one() -> Self {
        Dual::constant(F::one())
    }
    fn from_f64(x: f64) -> Self {
        Dual::constant(F::from_f64(x))
    }
    fn modulus(&self) -> f64 {
        self.re.modulus()
    }
    fn real(&self) -> f64 {
        self.re.real()
    }
    fn imag(&self) -> f64 {
        self.re.imag()
    }
    fn sqrt(self) -> Result<Self> {
        let root = self.re.sqrt()?;
        if root == F::zero() {
            if self.eps == F::zero() {
                return Ok(Dual::constant(root));
            }
            return Err(Error::BranchPoint);
        }
        Ok(Dual::new(root, self.eps / (F::from_f64(2.0) * root)))
    }
}

impl<F: RealField> PartialOrd for Dual<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<F: RealField> RealField for Dual<F> {
    fn lift(f: &dyn Fn(&[f64]) -> f64, args: &[Self], step: f64) -> Self {
        let re: Vec<F> = args.iter().map(|a| a.re).collect();
        let value = F::lift(f, &re, step);
        let mut tangent = F::zero();
        for (i, a) in args.iter().enumerate() {
            if a.eps == F::zero() {
                continue;
            }
            let partial = move |x: &[f64]| central_difference(f, x, i, step);
            tangent += F::lift(&partial, &re, step.max(NESTED_STEP)) * a.eps;
        }
        Dual::new(value, tangent)
    }
}

/// Derivative of `f` at `x`, read from the tangent of `f(x + ε)`.
pub fn derivative_of<F: Field>(f: impl Fn(Dual<F>) -> Result<Dual<F>>, x: F) -> Result<F> {
    Ok(f(Dual::variable(x))?.eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn product_rule_is_exact() {
        let a = Dual::new(2.0, 3.0);
        let b = Dual::new(5.0, 7.0);
        let p = a * b;
        assert_eq!(p.re, 10.0);
        assert_eq!(p.eps, 2.0 * 7.0 + 3.0 * 5.0);
        let e = Dual::new(0.0, 1.0);
        assert_eq!(e * e, Dual::new(0.0, 0.0));
    }

    #[test]
    fn derivatives_of_builtins() {
        assert_eq!(derivative_of(|x| Ok(x * x), 3.0).unwrap(), 6.0);
        assert_eq!(derivative_of(|x: D1| Ok(D1::one() / x), 2.0).unwrap(), -0.25);
        let d = derivative_of(|x: D1| x.sqrt(), 4.0).unwrap();
        let fd = central_difference(&|v: &[f64]| v[0].sqrt(), &[4.0], 0, 1e-6);
        assert_relative_eq!(d, 0.25);
        assert_relative_eq!(d, fd, max_relative = 1e-6);
    }

    #[test]
    fn sqrt_at_zero_with_tangent_is_a_branch_point() {
        assert!(matches!(derivative_of(|x: D1| x.sqrt(), 0.0), Err(Error::BranchPoint)));
        assert_eq!(D1::constant(0.0).sqrt().unwrap(), D1::constant(0.0));
    }

    #[test]
    fn nested_duals_give_second_derivatives() {
        // f(x) = x^3 at 2: f' = 12, f'' = 12.
        let x = D2::new(Dual::new(2.0, 1.0), Dual::new(1.0, 0.0));
        let y = x * x * x;
        assert_eq!(y.re.eps, 12.0);
        assert_eq!(y.eps.eps, 12.0);
    }

    #[test]
    fn lifted_evaluator_matches_exact_partials() {
        let f = |v: &[f64]| v[0] * v[0] * v[1] + v[1].sin();
        let args = [D1::new(0.7, 1.0), D1::new(-1.3, 0.0)];
        let lifted = D1::lift(&f, &args, 1e-7);
        assert_relative_eq!(lifted.re, f(&[0.7, -1.3]));
        assert_relative_eq!(lifted.eps, 2.0 * 0.7 * -1.3, max_relative = 1e-6);
        let args2 = [D2::new(Dual::new(0.7, 1.0), Dual::new(1.0, 0.0)), D2::constant(Dual::constant(-1.3))];
        let second = D2::lift(&f, &args2, 1e-7);
        assert_relative_eq!(second.eps.eps, 2.0 * -1.3, max_relative = 1e-5);
    }

    /// Random composition of the five field primitives, mirrored in `f64` and `D1`.
    fn compose<F: Field>(ops: &[u8], x: F) -> Result<F> {
        let mut acc = x;
        for (i, op) in ops.iter().enumerate() {
            let c = F::from_f64(1.5 + i as f64 * 0.25);
            acc = match op % 5 {
                0 => acc + c * x,
                1 => acc - x * x / c,
                2 => acc * (x + c),
                3 => (acc * acc + c).recip()? * c + x,
                _ => (acc * acc + c).sqrt()?,
            };
        }
        Ok(acc)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn dual_derivative_matches_central_difference(
            ops in proptest::collection::vec(0u8..5, 1..6),
            x in 0.2f64..2.0,
        ) {
            let exact = derivative_of(|d: D1| compose(&ops, d), x).unwrap();
            let h = 1e-6;
            let fd = (compose(&ops, x + h).unwrap() - compose(&ops, x - h).unwrap()) / (2.0 * h);
            prop_assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1.0), "{exact} vs {fd}");
        }
    }
}
