//! Invariant Lagrangians, the difference Euler operator, the invariantized
//! Euler-Lagrange system `H*E(L) = 0` and the pairing identity with the
//! original variables.

use std::fmt;
use std::sync::Arc;

use crate::actions::{GroupAction, Scalar};
use crate::error::{Error, Result};
use crate::frames::{invariants_of, InvariantSequence, LatticePath};
use crate::numeric::{Dual, Field, RealField, D1};
use crate::operators::{build_syzygy, sigma_sequence};

/// Relative step of the finite-difference fallback for closure Lagrangians.
pub const FALLBACK_STEP: f64 = 1e-7;

/// `coeff · Π κ_j^e · Π τ_j^e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub kappa: Vec<(usize, u32)>,
    pub tau: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn new(coeff: f64) -> Self {
        Monomial { coeff, kappa: Vec::new(), tau: Vec::new() }
    }

    pub fn kappa(mut self, shift: usize, exp: u32) -> Self {
        self.kappa.push((shift, exp));
        self
    }

    pub fn tau(mut self, shift: usize, exp: u32) -> Self {
        self.tau.push((shift, exp));
        self
    }

    fn eval<S: Field>(&self, kappa: &[S], tau: &[S]) -> S {
        let mut v = S::from_f64(self.coeff);
        for &(j, e) in &self.kappa {
            v *= kappa[j].powi(e);
        }
        for &(j, e) in &self.tau {
            v *= tau[j].powi(e);
        }
        v
    }
}

type ClosureLagrangian = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Polynomial(Vec<Monomial>),
    Closure(ClosureLagrangian),
}

/// `L(κ, κ₁, …, κ_{J₁}, τ, …, τ_{J₂})`, the same function at every site.
///
/// `kappa_len` and `tau_len` count the window slots read; zero means the
/// Lagrangian does not depend on that invariant.
#[derive(Clone)]
pub struct InvariantLagrangian {
    kappa_len: usize,
    tau_len: usize,
    eval: Evaluator,
}

impl InvariantLagrangian {
    pub fn polynomial(terms: Vec<Monomial>) -> Self {
        let len = |f: fn(&Monomial) -> &Vec<(usize, u32)>| {
            terms.iter().flat_map(|m| f(m).iter().filter(|t| t.1 > 0).map(|t| t.0 + 1)).max().unwrap_or(0)
        };
        InvariantLagrangian { kappa_len: len(|m| &m.kappa), tau_len: len(|m| &m.tau), eval: Evaluator::Polynomial(terms) }
    }

    /// `L = κ₀`.
    pub fn kappa() -> Self {
        Self::polynomial(vec![Monomial::new(1.0).kappa(0, 1)])
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![Monomial::new(c)])
    }

    /// An arbitrary `f64` evaluator; partial derivatives fall back to central
    /// differences with relative step [`FALLBACK_STEP`].
    pub fn from_fn(kappa_len: usize, tau_len: usize, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        InvariantLagrangian { kappa_len, tau_len, eval: Evaluator::Closure(Arc::new(f)) }
    }

    pub fn kappa_len(&self) -> usize {
        self.kappa_len
    }

    pub fn tau_len(&self) -> usize {
        self.tau_len
    }

    /// Whether partials are exact (dual numbers all the way through).
    pub fn exact_derivatives(&self) -> bool {
        matches!(self.eval, Evaluator::Polynomial(_))
    }

    pub fn terms(&self) -> Option<&[Monomial]> {
        match &self.eval {
            Evaluator::Polynomial(t) => Some(t),
            Evaluator::Closure(_) => None,
        }
    }

    /// Fails when the Lagrangian reads τ but the action has none.
    pub fn check_action(&self, action: &dyn GroupAction) -> Result<()> {
        if self.tau_len > 0 && action.kind().tau_points().is_none() {
            return Err(Error::InvalidInput(format!("{} has no tau invariant", action.name())));
        }
        Ok(())
    }

    pub fn eval<S: RealField>(&self, kappa: &[S], tau: &[S]) -> S {
        match &self.eval {
            Evaluator::Polynomial(terms) => terms.iter().fold(S::zero(), |acc, m| acc + m.eval(kappa, tau)),
            Evaluator::Closure(f) => {
                let split = kappa.len();
                let g = |x: &[f64]| f(&x[..split], &x[split..]);
                let args: Vec<S> = kappa.iter().chain(tau).copied().collect();
                S::lift(&g, &args, FALLBACK_STEP)
            }
        }
    }

    /// `L` at site `m`, reading its windows from `inv`.
    pub fn eval_at<S: RealField>(&self, inv: &InvariantSequence<S>, m: i64) -> Result<S> {
        let (k, t) = self.windows(inv, m)?;
        Ok(self.eval(&k, &t))
    }

    fn windows<S: Field>(&self, inv: &InvariantSequence<S>, m: i64) -> Result<(Vec<S>, Vec<S>)> {
        let k = (0..self.kappa_len as i64).map(|j| inv.kappa(m + j)).collect::<Result<_>>()?;
        let t = (0..self.tau_len as i64).map(|j| inv.tau(m + j)).collect::<Result<_>>()?;
        Ok((k, t))
    }

    /// Sites `m` at which every window slot of `L` is available.
    pub fn sites<S: Field>(&self, inv: &InvariantSequence<S>) -> std::ops::Range<i64> {
        let mut end = inv.end(0) - self.kappa_len as i64 + 1;
        if self.tau_len > 0 {
            end = end.min(inv.end(1) - self.tau_len as i64 + 1);
        }
        inv.offset..end.max(inv.offset)
    }

    /// `∂L/∂κ_j` (`component = 0`) or `∂L/∂τ_j` (`component = 1`) at site `m`.
    pub fn partial<S: RealField>(&self, inv: &InvariantSequence<S>, m: i64, component: usize, j: usize) -> Result<S> {
        let (k, t) = self.windows(inv, m)?;
        let mut k: Vec<Dual<S>> = k.into_iter().map(Dual::constant).collect();
        let mut t: Vec<Dual<S>> = t.into_iter().map(Dual::constant).collect();
        let slot = if component == 0 { &mut k[j] } else { &mut t[j] };
        *slot = Dual::variable(slot.re);
        Ok(self.eval(&k, &t).eps)
    }
}

impl fmt::Debug for InvariantLagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("InvariantLagrangian");
        d.field("kappa_len", &self.kappa_len).field("tau_len", &self.tau_len);
        match &self.eval {
            Evaluator::Polynomial(t) => d.field("terms", t),
            Evaluator::Closure(_) => d.field("terms", &"<closure>"),
        };
        d.finish()
    }
}

/// `E_κ(L)(n) = Σ_j ∂L/∂κ_j (n - j)`, and `E_τ` when the invariants carry τ.
pub fn euler_operator<S: RealField>(l: &InvariantLagrangian, inv: &InvariantSequence<S>, n: i64) -> Result<Vec<S>> {
    let lens = [l.kappa_len, l.tau_len];
    (0..inv.components())
        .map(|c| {
            let mut acc = S::zero();
            for j in 0..lens[c] {
                acc += l.partial(inv, n - j as i64, c, j)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Components of `H*E(L)` at site `n`, one per σ component.
pub fn el_residual<S: Scalar + RealField>(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    inv: &InvariantSequence<S>,
    n: i64,
) -> Result<Vec<S>> {
    l.check_action(action)?;
    let adj = build_syzygy(action, inv).adjoint();
    let e = |r: usize, m: i64| Ok(euler_operator(l, inv, m)?[r]);
    adj.apply(&e, n)
}

/// [`el_residual`] at every site where it is defined.
pub fn el_residuals<S: Scalar + RealField>(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    inv: &InvariantSequence<S>,
) -> Result<Vec<(i64, Vec<S>)>> {
    l.check_action(action)?;
    let adj = build_syzygy(action, inv).adjoint();
    let lo = inv.offset;
    let hi = inv.end(0);
    let euler: Vec<Option<Vec<S>>> = (lo..hi).map(|m| euler_operator(l, inv, m).ok()).collect();
    let e = |r: usize, m: i64| -> Result<S> {
        let i = m - lo;
        if i < 0 || i >= euler.len() as i64 {
            return Err(Error::WindowOutOfRange { site: m });
        }
        euler[i as usize].as_ref().map(|v| v[r]).ok_or(Error::WindowOutOfRange { site: m })
    };
    let mut out = Vec::new();
    for n in lo..hi {
        match adj.apply(&e, n) {
            Ok(v) => out.push((n, v)),
            Err(Error::WindowOutOfRange { .. }) => continue,
            Err(err) => return Err(err),
        }
    }
    Ok(out)
}

/// Largest residual component over all defined sites.
pub fn el_residual_max(action: &dyn GroupAction, l: &InvariantLagrangian, inv: &InvariantSequence<f64>) -> Result<f64> {
    Ok(el_residuals(action, l, inv)?.iter().flat_map(|r| r.1.iter()).fold(0.0, |m, v| m.max(v.abs())))
}

/// Both sides of `d/dt Σ L = Σ (H*E(L))·σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairing {
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
}

/// Compare the variation of the action sum along the velocities with the
/// invariantized Euler-Lagrange expression paired with σ.
///
/// Velocities must vanish near both ends so that every site with nonzero σ
/// has a defined residual; otherwise this fails with `WindowOutOfRange`.
pub fn pairing_check(action: &dyn GroupAction, l: &InvariantLagrangian, path: &LatticePath<f64>) -> Result<Pairing> {
    l.check_action(action)?;
    let lifted = invariants_of::<D1>(action, &path.tangent_lift()?)?;
    let mut lhs = 0.0;
    for m in l.sites(&lifted) {
        lhs += l.eval_at(&lifted, m)?.eps;
    }
    let inv = invariants_of(action, path)?;
    let residuals = el_residuals(action, l, &inv)?;
    let (so, sigma) = sigma_sequence(action, path)?;
    let cols = action.kind().invariant_count().min(sigma.first().map_or(0, Vec::len));
    let mut rhs = 0.0;
    for (i, s) in sigma.iter().enumerate() {
        let n = so + i as i64;
        if s[..cols].iter().all(|&x| x == 0.0) {
            continue;
        }
        let r = residuals.iter().find(|r| r.0 == n).ok_or(Error::WindowOutOfRange { site: n })?;
        rhs += r.1.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(Pairing { lhs, rhs, deviation: (lhs - rhs).abs() })
}

/// `Σ_m L(m)` over every site where the Lagrangian window fits.
pub fn action_sum<S: RealField>(l: &InvariantLagrangian, inv: &InvariantSequence<S>) -> Result<S> {
    let mut acc = S::zero();
    for m in l.sites(inv) {
        acc += l.eval_at(inv, m)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::ActionKind;
    use crate::numeric::central_difference;

    fn seq(kappa: Vec<f64>, tau: Option<Vec<f64>>) -> InvariantSequence<f64> {
        InvariantSequence::new(0, kappa, tau)
    }

    /// `∂/∂κ_n Σ_m L(m)` by central differences on the truncated sum.
    fn brute_force(l: &InvariantLagrangian, inv: &InvariantSequence<f64>, comp: usize, n: i64) -> f64 {
        let base = inv.clone();
        let f = |x: &[f64]| {
            let mut s = base.clone();
            let slot = if comp == 0 { &mut s.kappa } else { s.tau.as_mut().unwrap() };
            slot[n as usize] = x[0];
            action_sum(l, &s).unwrap()
        };
        let x0 = inv.component(comp, n).unwrap();
        central_difference(&f, &[x0], 0, 1e-6)
    }

    #[test]
    fn linear_lagrangian_has_unit_euler_operator() {
        let inv = seq(vec![0.3, 1.2, 2.0, 0.7], Some(vec![1.0, 2.0, 3.0, 4.0]));
        assert_eq!(euler_operator(&InvariantLagrangian::kappa(), &inv, 2).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn euler_operator_examples() {
        let k = vec![0.3, 1.2, 2.0, 0.7, -0.4];
        let t = vec![1.5, 2.5, 0.25, 4.0, 1.0];
        let inv = seq(k.clone(), Some(t.clone()));
        let kk = InvariantLagrangian::polynomial(vec![Monomial::new(1.0).kappa(0, 1).kappa(1, 1)]);
        assert!((euler_operator(&kk, &inv, 2).unwrap()[0] - (k[3] + k[1])).abs() < 1e-15);
        assert!((brute_force(&kk, &inv, 0, 2) - (k[3] + k[1])).abs() < 1e-8);
        let dt = InvariantLagrangian::polynomial(vec![
            Monomial::new(1.0).tau(0, 2),
            Monomial::new(-2.0).tau(0, 1).tau(1, 1),
            Monomial::new(1.0).tau(1, 2),
        ]);
        let expected = 2.0 * (t[2] - t[3]) - 2.0 * (t[1] - t[2]);
        assert!((euler_operator(&dt, &inv, 2).unwrap()[1] - expected).abs() < 1e-14);
        assert!((brute_force(&dt, &inv, 1, 2) - expected).abs() < 1e-7);
    }

    #[test]
    fn closure_fallback_matches_dual_partials() {
        let inv = seq(vec![0.3, 1.2, 2.0, 0.7, -0.4], Some(vec![1.5, 2.5, 0.25, 4.0, 1.0]));
        let poly = InvariantLagrangian::polynomial(vec![Monomial::new(0.5).kappa(0, 2).tau(1, 1), Monomial::new(1.0).kappa(1, 3)]);
        let f = InvariantLagrangian::from_fn(2, 2, |k, t| 0.5 * k[0] * k[0] * t[1] + k[1].powi(3));
        assert!(!f.exact_derivatives());
        let a = euler_operator(&poly, &inv, 2).unwrap();
        let b = euler_operator(&f, &inv, 2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0));
        }
    }

    #[test]
    fn constant_invariants_are_extremal_for_kappa() {
        let l = InvariantLagrangian::kappa();
        for (kind, k, t) in [(ActionKind::Sl2Linear, 1.0, 2.0), (ActionKind::Sa2Linear, 1.0, 3.0), (ActionKind::Sl2Projective, -2.0 / 7.0, 0.0)] {
            let inv = InvariantSequence::<f64>::constant(kind, 0, 10, k, t);
            let r = el_residuals(kind.strategy(), &l, &inv).unwrap();
            assert!(!r.is_empty());
            let worst = r.iter().flat_map(|x| x.1.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(worst < 1e-12, "{kind}: {worst:e}");
        }
        let off = InvariantSequence::<f64>::constant(ActionKind::Sa2Linear, 0, 10, 1.0, 2.0);
        assert!(el_residual_max(ActionKind::Sa2Linear.strategy(), &l, &off).unwrap() > 0.1);
    }

    #[test]
    fn constant_lagrangian_has_zero_residual() {
        let inv = seq(vec![0.3, 1.2, 2.0, 0.7, -0.4, 1.1], Some(vec![1.5, 2.5, 0.25, 4.0, 1.0, 2.0]));
        let r = el_residuals(ActionKind::Sl2Linear.strategy(), &InvariantLagrangian::constant(3.0), &inv).unwrap();
        assert!(r.iter().all(|x| x.1.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn tau_lagrangian_rejected_for_projective() {
        let inv = seq(vec![0.3, 1.2, 2.0, 0.7, -0.4], None);
        let l = InvariantLagrangian::polynomial(vec![Monomial::new(1.0).tau(0, 1)]);
        assert!(matches!(el_residual(ActionKind::Sl2Projective.strategy(), &l, &inv, 3), Err(Error::InvalidInput(_))));
    }
}
