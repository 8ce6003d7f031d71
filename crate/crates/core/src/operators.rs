//! Linear difference operators with invariant coefficients, their adjoints and
//! boundary forms, and numerical checks of the syzygy `dκ/dt = Hσ`.

use std::fmt;
use std::sync::Arc;

use crate::actions::{GroupAction, Scalar};
use crate::error::{Error, Result};
use crate::frames::{invariants_of, maurer_cartan, sigma_at, InvariantSequence, LatticePath};
use crate::numeric::{Field, Matrix, D1};

/// A site-dependent coefficient.
pub type Coefficient<'a, S> = Arc<dyn Fn(i64) -> Result<S> + Send + Sync + 'a>;

/// A sequence given by its values at integer sites.
pub type Sequence<'s, S> = &'s dyn Fn(i64) -> Result<S>;

/// `Σ_j c_j(n) S_j`, with terms kept sorted by shift.
#[derive(Clone)]
pub struct LinearDifferenceOperator<'a, S> {
    terms: Vec<(i64, Coefficient<'a, S>)>,
}

impl<'a, S: Field> LinearDifferenceOperator<'a, S> {
    pub fn zero() -> Self {
        LinearDifferenceOperator { terms: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::shift(0)
    }

    /// The plain shift `S_j`.
    pub fn shift(j: i64) -> Self {
        Self::zero().with_term(j, Arc::new(|_| Ok(S::one())))
    }

    /// Constant-coefficient operator.
    pub fn constant(terms: &[(i64, S)]) -> Self {
        terms.iter().fold(Self::zero(), |op, &(j, c)| op.with_term(j, Arc::new(move |_| Ok(c))))
    }

    /// Add a term; coefficients at a repeated shift are summed.
    pub fn with_term(mut self, j: i64, c: Coefficient<'a, S>) -> Self {
        match self.terms.binary_search_by_key(&j, |t| t.0) {
            Ok(i) => {
                let old = self.terms[i].1.clone();
                self.terms[i].1 = Arc::new(move |n| Ok(old(n)? + c(n)?));
            }
            Err(i) => self.terms.insert(i, (j, c)),
        }
        self
    }

    pub fn shifts(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.iter().map(|t| t.0)
    }

    /// `[j_min, j_max]`, or `None` for the zero operator.
    pub fn support(&self) -> Option<(i64, i64)> {
        Some((self.terms.first()?.0, self.terms.last()?.0))
    }

    /// `c_j(n)`, zero when the shift is absent.
    pub fn coefficient(&self, j: i64, n: i64) -> Result<S> {
        match self.terms.binary_search_by_key(&j, |t| t.0) {
            Ok(i) => (self.terms[i].1)(n),
            Err(_) => Ok(S::zero()),
        }
    }

    /// `Σ_j c_j(n)·seq(n+j)`.
    pub fn apply(&self, seq: Sequence<'_, S>, n: i64) -> Result<S> {
        let mut acc = S::zero();
        for (j, c) in &self.terms {
            acc += c(n)? * seq(n + j)?;
        }
        Ok(acc)
    }

    /// Summation-by-parts dual: `(j, c_j)` becomes `(-j, n ↦ c_j(n-j))`.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .rev()
            .map(|(j, c)| {
                let (j, c) = (*j, c.clone());
                let shifted: Coefficient<'a, S> = Arc::new(move |n| c(n - j));
                (-j, shifted)
            })
            .collect();
        LinearDifferenceOperator { terms }
    }

    fn require_nonnegative(&self) -> Result<()> {
        match self.support() {
            Some((lo, _)) if lo < 0 => Err(Error::SupportViolation { shift: lo }),
            _ => Ok(()),
        }
    }

    /// Coefficients `C_j(n) = Σ_{k>j} c_k(n+j-k) F(n+j-k)` of the boundary form
    /// `A(n) = Σ_j C_j(n) G(n+j)`.
    pub fn boundary_coefficients(&self, f: Sequence<'_, S>, n: i64) -> Result<Vec<(i64, S)>> {
        self.require_nonnegative()?;
        let top = self.support().map_or(0, |s| s.1);
        let mut out = Vec::new();
        for j in 0..top {
            let mut acc = S::zero();
            for (k, c) in self.terms.iter().filter(|t| t.0 > j) {
                let m = n + j - k;
                acc += c(m)? * f(m)?;
            }
            out.push((j, acc));
        }
        Ok(out)
    }

    /// `A(n)` with `F·H(G) - H*(F)·G = (S - id)A`.
    pub fn boundary_form(&self, f: Sequence<'_, S>, g: Sequence<'_, S>, n: i64) -> Result<S> {
        let mut acc = S::zero();
        for (j, c) in self.boundary_coefficients(f, n)? {
            acc += c * g(n + j)?;
        }
        Ok(acc)
    }
}

impl<S> fmt::Debug for LinearDifferenceOperator<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearDifferenceOperator")
            .field("shifts", &self.terms.iter().map(|t| t.0).collect::<Vec<_>>())
            .finish()
    }
}

/// Grid of operators, `[row][col]`.
#[derive(Clone, Debug)]
pub struct OperatorMatrix<'a, S> {
    pub entries: Vec<Vec<LinearDifferenceOperator<'a, S>>>,
}

impl<'a, S: Field> OperatorMatrix<'a, S> {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn entry(&self, r: usize, c: usize) -> &LinearDifferenceOperator<'a, S> {
        &self.entries[r][c]
    }

    /// `(Hσ)_r(n) = Σ_c H_rc σ_c`, with `seq(c, m)` the `c`-th input at site `m`.
    pub fn apply(&self, seq: &dyn Fn(usize, i64) -> Result<S>, n: i64) -> Result<Vec<S>> {
        self.entries
            .iter()
            .map(|row| {
                let mut acc = S::zero();
                for (c, op) in row.iter().enumerate() {
                    acc += op.apply(&|m| seq(c, m), n)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// Transpose of the entrywise adjoints.
    pub fn adjoint(&self) -> Self {
        let entries = (0..self.cols()).map(|c| (0..self.rows()).map(|r| self.entries[r][c].adjoint()).collect()).collect();
        OperatorMatrix { entries }
    }

    /// Boundary coefficients per column: `C^c_j(n) = Σ_r` boundary coefficients of `H_rc` against `F_r`.
    pub fn boundary_coefficients(&self, f: &dyn Fn(usize, i64) -> Result<S>, n: i64) -> Result<Vec<Vec<(i64, S)>>> {
        (0..self.cols())
            .map(|c| {
                let mut acc: Vec<(i64, S)> = Vec::new();
                for r in 0..self.rows() {
                    for (j, v) in self.entries[r][c].boundary_coefficients(&|m| f(r, m), n)? {
                        match acc.iter_mut().find(|t| t.0 == j) {
                            Some(t) => t.1 += v,
                            None => acc.push((j, v)),
                        }
                    }
                }
                acc.sort_by_key(|t| t.0);
                Ok(acc)
            })
            .collect()
    }
}

/// The syzygy operator `H` of `action` with coefficients read lazily from `inv`.
pub fn build_syzygy<'a, S: Scalar>(action: &'a dyn GroupAction, inv: &'a InvariantSequence<S>) -> OperatorMatrix<'a, S> {
    let shifts = action.syzygy_shifts();
    let entries = shifts
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, js)| {
                    js.iter().enumerate().fold(LinearDifferenceOperator::zero(), |op, (idx, &j)| {
                        let coeff: Coefficient<'a, S> = Arc::new(move |n| {
                            let stencil = S::math(action).syzygy_stencil(inv, n)?;
                            Ok(stencil[r][c][idx].1)
                        });
                        op.with_term(j, coeff)
                    })
                })
                .collect()
        })
        .collect();
    OperatorMatrix { entries }
}

/// `H*` of the syzygy operator.
pub fn adjoint_of<'a, S: Field>(op: &LinearDifferenceOperator<'a, S>) -> LinearDifferenceOperator<'a, S> {
    op.adjoint()
}

/// `A_H(F, G)(n)`; fails on operators with negative shifts.
pub fn boundary_form<S: Field>(
    op: &LinearDifferenceOperator<'_, S>,
    f: Sequence<'_, S>,
    g: Sequence<'_, S>,
    n: i64,
) -> Result<S> {
    op.boundary_form(f, g, n)
}

/// Time derivatives of the invariants along the velocities, by dual numbers.
pub fn invariant_velocities(action: &dyn GroupAction, path: &LatticePath<f64>) -> Result<InvariantSequence<f64>> {
    Ok(invariants_of::<D1>(action, &path.tangent_lift()?)?.map(|d| d.eps))
}

/// σ components at every site where the frame window fits.
pub fn sigma_sequence(action: &dyn GroupAction, path: &LatticePath<f64>) -> Result<(i64, Vec<Vec<f64>>)> {
    let w = action.kind().frame_points() as i64;
    let sites = path.offset()..=path.end() - w;
    Ok((path.offset(), sites.map(|k| sigma_at(action, path, k)).collect::<Result<_>>()?))
}

fn lookup(offset: i64, seq: &[Vec<f64>], c: usize, m: i64) -> Result<f64> {
    let i = m - offset;
    if i < 0 || i as usize >= seq.len() {
        return Err(Error::WindowOutOfRange { site: m });
    }
    Ok(seq[i as usize][c])
}

/// `dκ/dt - Hσ` (and the τ row) at every site where both sides are defined.
pub fn syzygy_residuals(action: &dyn GroupAction, path: &LatticePath<f64>) -> Result<Vec<(i64, Vec<f64>)>> {
    let inv = invariants_of(action, path)?;
    let rates = invariant_velocities(action, path)?;
    let (so, sigma) = sigma_sequence(action, path)?;
    residuals_from_parts(action, &inv, &rates, so, &sigma)
}

fn residuals_from_parts(
    action: &dyn GroupAction,
    inv: &InvariantSequence<f64>,
    rates: &InvariantSequence<f64>,
    so: i64,
    sigma: &[Vec<f64>],
) -> Result<Vec<(i64, Vec<f64>)>> {
    let h = build_syzygy(action, inv);
    let seq = |c: usize, m: i64| lookup(so, sigma, c, m);
    let mut out = Vec::new();
    for n in inv.offset..inv.offset + inv.common_len() as i64 {
        match h.apply(&seq, n) {
            Ok(hs) => {
                let r = hs.iter().enumerate().map(|(i, v)| Ok(rates.component(i, n)? - v)).collect::<Result<Vec<_>>>()?;
                out.push((n, r));
            }
            Err(Error::WindowOutOfRange { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `dκ_k/dt - (Hσ)(k)` at one site.
pub fn syzygy_residual(action: &dyn GroupAction, path: &LatticePath<f64>, k: i64) -> Result<Vec<f64>> {
    syzygy_residuals(action, path)?
        .into_iter()
        .find(|r| r.0 == k)
        .map(|r| r.1)
        .ok_or(Error::WindowOutOfRange { site: k })
}

/// Same residuals with `dκ/dt` from central differences of step `h`.
pub fn syzygy_residuals_fd(action: &dyn GroupAction, path: &LatticePath<f64>, h: f64) -> Result<Vec<(i64, Vec<f64>)>> {
    let v = path.flat_velocities().ok_or(Error::MissingVelocities)?;
    let moved = |s: f64| {
        let pts: Vec<f64> = path.flat_points().iter().zip(v).map(|(p, q)| p + s * q).collect();
        let rows: Vec<&[f64]> = pts.chunks(path.dim()).collect();
        LatticePath::new(path.offset(), path.dim(), &rows)
    };
    let plus = invariants_of(action, &moved(h)?)?;
    let minus = invariants_of(action, &moved(-h)?)?;
    let rates = InvariantSequence {
        offset: plus.offset,
        kappa: plus.kappa.iter().zip(&minus.kappa).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
        tau: plus.tau.as_ref().zip(minus.tau.as_ref()).map(|(a, b)| a.iter().zip(b).map(|(a, b)| (a - b) / (2.0 * h)).collect()),
    };
    let inv = invariants_of(action, path)?;
    let (so, sigma) = sigma_sequence(action, path)?;
    residuals_from_parts(action, &inv, &rates, so, &sigma)
}

/// Largest entry of `dK_k/dt - ((S N)K_k - K_k N)` over the sites where it is defined,
/// with `N` supplied by `curvature(inv, n, σ)`.
pub fn curvature_residual_with(
    action: &dyn GroupAction,
    path: &LatticePath<f64>,
    curvature: &dyn Fn(&InvariantSequence<f64>, i64, &dyn Fn(i64) -> Result<Vec<f64>>) -> Result<Matrix<f64>>,
) -> Result<f64> {
    let inv = invariants_of(action, path)?;
    let lifted = invariants_of::<D1>(action, &path.tangent_lift()?)?;
    let (so, sigma) = sigma_sequence(action, path)?;
    let sig = |m: i64| -> Result<Vec<f64>> {
        let i = m - so;
        if i < 0 || i as usize >= sigma.len() {
            return Err(Error::WindowOutOfRange { site: m });
        }
        Ok(sigma[i as usize].clone())
    };
    let mut worst = 0.0f64;
    for n in inv.offset..inv.offset + inv.common_len() as i64 {
        let (n0, n1) = match (curvature(&inv, n, &sig), curvature(&inv, n + 1, &sig)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(Error::WindowOutOfRange { .. }), _) | (_, Err(Error::WindowOutOfRange { .. })) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let kd = maurer_cartan(action, &lifted, n)?.matrix();
        let k = kd.map(|d| d.re);
        let dk = kd.map(|d| d.eps);
        let rhs = n1.matmul(&k).sub(&k.matmul(&n0));
        worst = worst.max(dk.max_abs_diff(&rhs));
    }
    Ok(worst)
}

/// [`curvature_residual_with`] using the action's own curvature matrix.
pub fn curvature_residual(action: &dyn GroupAction, path: &LatticePath<f64>) -> Result<f64> {
    let m = f64::math(action);
    curvature_residual_with(action, path, &|inv, n, s| m.curvature(inv, n, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::ActionKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_seq(v: f64) -> impl Fn(i64) -> Result<f64> {
        move |_| Ok(v)
    }

    #[test]
    fn spec_stencil_fixtures() {
        let sl2 = ActionKind::Sl2Linear.strategy();
        let inv = InvariantSequence::<f64>::constant(ActionKind::Sl2Linear, 0, 6, 1.0, 2.0);
        let h = build_syzygy(sl2, &inv);
        assert_eq!(h.entry(0, 1).coefficient(0, 1).unwrap(), 0.5);
        assert_eq!(h.entry(0, 1).coefficient(2, 1).unwrap(), -0.5);
        let proj = ActionKind::Sl2Projective.strategy();
        let inv = InvariantSequence::<f64>::constant(ActionKind::Sl2Projective, 0, 6, 2.0, 0.0);
        let h = build_syzygy(proj, &inv);
        let c: Vec<f64> = (0..4).map(|j| h.entry(0, 0).coefficient(j, 1).unwrap()).collect();
        assert_eq!(c, vec![-2.0, -1.0, 1.0, 2.0]);
        let zero = h.apply(&|_, _| Ok(0.0), 1).unwrap();
        assert_eq!(zero, vec![0.0]);
    }

    #[test]
    fn adjoint_examples() {
        let op = LinearDifferenceOperator::<f64>::identity();
        assert_eq!(op.adjoint().shifts().collect::<Vec<_>>(), vec![0]);
        let c: Coefficient<f64> = Arc::new(|n| Ok(n as f64));
        let op = LinearDifferenceOperator::zero().with_term(1, c);
        let f = |n: i64| Ok((n * n) as f64);
        assert_eq!(op.adjoint().apply(&f, 5).unwrap(), 4.0 * 16.0);
        let kappa = |n: i64| Ok(1.0 + n as f64);
        let h11 = LinearDifferenceOperator::zero()
            .with_term(0, Arc::new(kappa))
            .with_term(1, Arc::new(move |n| Ok(-kappa(n)?)));
        let a = h11.adjoint();
        assert_eq!(a.support(), Some((-1, 0)));
        assert_eq!(a.coefficient(0, 4).unwrap(), 5.0);
        assert_eq!(a.coefficient(-1, 4).unwrap(), -4.0);
    }

    #[test]
    fn boundary_form_examples() {
        let f = |n: i64| Ok(n as f64 + 0.5);
        let g = |n: i64| Ok((n * n) as f64);
        let id = LinearDifferenceOperator::<f64>::identity();
        assert_eq!(id.boundary_form(&f, &g, 3).unwrap(), 0.0);
        let s = LinearDifferenceOperator::<f64>::shift(1);
        assert_eq!(s.boundary_form(&f, &g, 3).unwrap(), f(2).unwrap() * g(3).unwrap());
        let back = LinearDifferenceOperator::<f64>::shift(-1);
        assert_eq!(back.boundary_form(&f, &g, 3), Err(Error::SupportViolation { shift: -1 }));
    }

    #[test]
    fn telescoping_with_sl2_tau_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kappa: Vec<f64> = (0..12).map(|_| rng.gen_range(0.5..2.0)).collect();
        let tau: Vec<f64> = (0..12).map(|_| rng.gen_range(0.5..2.0)).collect();
        let fv: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gv: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let inv = InvariantSequence::new(0, kappa, Some(tau));
        let h = build_syzygy(ActionKind::Sl2Linear.strategy(), &inv);
        let at = |v: &Vec<f64>, n: i64| v.get(usize::try_from(n).map_err(|_| Error::WindowOutOfRange { site: n })?).copied().ok_or(Error::WindowOutOfRange { site: n });
        let f = |n| at(&fv, n);
        let g = |n| at(&gv, n);
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let op = h.entry(r, c);
            let adj = op.adjoint();
            for n in 3..9 {
                let lhs = f(n).unwrap() * op.apply(&g, n).unwrap() - adj.apply(&f, n).unwrap() * g(n).unwrap();
                let rhs = op.boundary_form(&f, &g, n + 1).unwrap() - op.boundary_form(&f, &g, n).unwrap();
                assert!((lhs - rhs).abs() < 1e-12, "({r},{c}) at {n}");
            }
        }
    }

    #[test]
    fn adjoint_is_an_involution() {
        let c: Coefficient<f64> = Arc::new(|n| Ok((n as f64).sin()));
        let op = LinearDifferenceOperator::zero().with_term(2, c).with_term(-1, Arc::new(|n| Ok(n as f64)));
        let twice = op.adjoint().adjoint();
        let seq = |n: i64| Ok((n as f64 * 0.3).cos());
        for n in -5..5 {
            assert!((op.apply(&seq, n).unwrap() - twice.apply(&seq, n).unwrap()).abs() < 1e-15);
        }
        assert_eq!(op.apply(&constant_seq(0.0), 0).unwrap(), 0.0);
    }

    #[test]
    fn spec_path_syzygy_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<[f64; 2]> = (0..4).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let p = LatticePath::planar(0, &[[1.0, 1.0], [2.0, 4.0], [3.0, 9.0], [5.0, 20.0]]).with_velocities(&v).unwrap();
        let r = syzygy_residual(ActionKind::Sl2Linear.strategy(), &p, 0).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-9), "{r:?}");
        let still = p.clone().with_velocities(&[[0.0, 0.0]; 4]).unwrap();
        assert!(syzygy_residual(ActionKind::Sl2Linear.strategy(), &still, 0).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn curvature_identity_on_fixture() {
        let p = LatticePath::planar(0, &[[1.0, 1.0], [2.0, 4.0], [3.0, 9.0], [5.0, 20.0]])
            .with_velocities(&[[0.3, -0.2], [0.1, 0.5], [-0.4, 0.2], [0.7, 0.1]])
            .unwrap();
        assert!(curvature_residual(ActionKind::Sl2Linear.strategy(), &p).unwrap() < 1e-12);
    }
}
