//! The three group actions as runtime-selectable strategies.
//!
//! Every action implements [`ActionMath`] for each scalar type the pipeline
//! uses, and [`GroupAction`] bundles those implementations behind one trait
//! object. [`ActionRegistry`] maps tags such as `"sa2"` to strategies.

mod element;
mod sa2;
mod sl2_linear;
mod sl2_projective;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

pub use element::{GroupElement, Sa2, Sl2};
pub use sa2::Sa2Linear;
pub use sl2_linear::Sl2Linear;
pub use sl2_projective::{projective_curvature, CurvatureVariant, Sl2Projective};

use crate::error::{Error, Result};
use crate::frames::InvariantSequence;
use crate::numeric::{Field, Matrix, C64, D1, D2};

/// Tag of a supported action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Sl2Linear,
    Sa2Linear,
    Sl2Projective,
}

impl ActionKind {
    pub const ALL: [ActionKind; 3] = [ActionKind::Sl2Linear, ActionKind::Sa2Linear, ActionKind::Sl2Projective];

    pub fn tag(self) -> &'static str {
        match self {
            ActionKind::Sl2Linear => "sl2-linear",
            ActionKind::Sa2Linear => "sa2",
            ActionKind::Sl2Projective => "sl2-projective",
        }
    }

    /// Components of a point.
    pub fn point_dim(self) -> usize {
        match self {
            ActionKind::Sl2Projective => 1,
            _ => 2,
        }
    }

    /// Dimension of the group, which is also the size of the Adjoint matrix.
    pub fn group_dim(self) -> usize {
        match self {
            ActionKind::Sa2Linear => 5,
            _ => 3,
        }
    }

    /// Points needed to build one frame.
    pub fn frame_points(self) -> usize {
        match self {
            ActionKind::Sl2Linear => 2,
            _ => 3,
        }
    }

    /// Points needed for one value of κ.
    pub fn kappa_points(self) -> usize {
        match self {
            ActionKind::Sl2Projective => 4,
            _ => 3,
        }
    }

    /// Points needed for one value of τ, when the action has a second invariant.
    pub fn tau_points(self) -> Option<usize> {
        match self {
            ActionKind::Sl2Linear => Some(2),
            ActionKind::Sa2Linear => Some(4),
            ActionKind::Sl2Projective => None,
        }
    }

    /// Number of generating difference invariants (κ, and τ when present).
    pub fn invariant_count(self) -> usize {
        match self {
            ActionKind::Sl2Projective => 1,
            _ => 2,
        }
    }

    /// Number of σ components entering the syzygy operator.
    pub fn sigma_dim(self) -> usize {
        self.point_dim()
    }

    pub fn strategy(self) -> &'static dyn GroupAction {
        match self {
            ActionKind::Sl2Linear => &Sl2Linear,
            ActionKind::Sa2Linear => &Sa2Linear,
            ActionKind::Sl2Projective => &Sl2Projective,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ActionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ActionKind::ALL.into_iter().find(|k| k.tag() == s).ok_or_else(|| Error::UnknownAction(s.to_string()))
    }
}

/// Coefficients `[row][col]` of the syzygy operator at one site, each a list of
/// `(shift, coefficient)`. Rows are the invariants (κ, τ); columns the σ components.
pub type Stencil<S> = Vec<Vec<Vec<(i64, S)>>>;

/// Action formulas over one scalar type.
///
/// Windows are flat slices of consecutive point coordinates. The `site`
/// arguments only label errors.
pub trait ActionMath<S: Field> {
    fn act(&self, g: &GroupElement<S>, p: &[S]) -> Result<Vec<S>>;

    /// Induced action on a tangent vector at `p`.
    fn act_velocity(&self, g: &GroupElement<S>, p: &[S], v: &[S]) -> Result<Vec<S>>;

    /// Adjoint matrix acting on row vectors from the right.
    fn adjoint_matrix(&self, g: &GroupElement<S>) -> Result<Matrix<S>>;

    /// Infinitesimal generators at `p`: one row per coordinate, one column per group parameter.
    fn characteristics(&self, p: &[S]) -> Matrix<S>;

    /// Generators evaluated at the normalization point.
    fn characteristics_invariantized(&self) -> Matrix<S>;

    /// Image of the first window point under its own frame.
    fn normalization_point(&self) -> Vec<S>;

    fn frame(&self, site: i64, window: &[S]) -> Result<GroupElement<S>>;

    fn kappa(&self, site: i64, window: &[S]) -> Result<S>;

    fn tau(&self, site: i64, window: &[S]) -> Result<S>;

    /// `K = ρ_{k+1} ρ_k⁻¹` written in terms of the invariants at `k`.
    fn maurer_cartan(&self, site: i64, kappa: S, tau: Option<S>) -> Result<GroupElement<S>>;

    /// First-order invariants from the frame at a site and the velocities of its window.
    fn sigma(&self, frame: &GroupElement<S>, window: &[S], velocities: &[S]) -> Result<Vec<S>>;

    fn syzygy_stencil(&self, inv: &InvariantSequence<S>, n: i64) -> Result<Stencil<S>>;

    /// `N₀ = ρ₀' ρ₀⁻¹` at site `n`, given σ at nearby sites.
    fn curvature(
        &self,
        inv: &InvariantSequence<S>,
        n: i64,
        sigma: &dyn Fn(i64) -> Result<Vec<S>>,
    ) -> Result<Matrix<S>>;
}

/// A group action usable with every scalar type of the pipeline.
pub trait GroupAction:
    ActionMath<f64> + ActionMath<D1> + ActionMath<D2> + ActionMath<C64> + Send + Sync + fmt::Debug
{
    fn kind(&self) -> ActionKind;

    fn name(&self) -> &'static str {
        self.kind().tag()
    }

    /// Shifts present in each syzygy entry, `[row][col]`, matching [`ActionMath::syzygy_stencil`].
    fn syzygy_shifts(&self) -> Vec<Vec<Vec<i64>>>;
}

/// Scalars for which every registered action has formulas.
pub trait Scalar: Field {
    fn math(action: &dyn GroupAction) -> &dyn ActionMath<Self>;
}

impl Scalar for f64 {
    fn math(action: &dyn GroupAction) -> &dyn ActionMath<f64> {
        action
    }
}

impl Scalar for D1 {
    fn math(action: &dyn GroupAction) -> &dyn ActionMath<D1> {
        action
    }
}

impl Scalar for D2 {
    fn math(action: &dyn GroupAction) -> &dyn ActionMath<D2> {
        action
    }
}

impl Scalar for C64 {
    fn math(action: &dyn GroupAction) -> &dyn ActionMath<C64> {
        action
    }
}

/// Strategies addressable by tag.
#[derive(Clone)]
pub struct ActionRegistry {
    strategies: BTreeMap<String, Arc<dyn GroupAction>>,
}

impl ActionRegistry {
    pub fn empty() -> Self {
        ActionRegistry { strategies: BTreeMap::new() }
    }

    /// Registry holding the three built-in actions.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Sl2Linear));
        r.register(Arc::new(Sa2Linear));
        r.register(Arc::new(Sl2Projective));
        r
    }

    /// Add a strategy under its own name, replacing any previous entry.
    pub fn register(&mut self, action: Arc<dyn GroupAction>) {
        self.strategies.insert(action.name().to_string(), action);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn GroupAction>> {
        self.strategies.get(name).cloned().ok_or_else(|| Error::UnknownAction(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.strategies.keys().map(String::as_str)
    }
}

impl Default for ActionRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl fmt::Debug for ActionRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.strategies.keys()).finish()
    }
}

/// Identity element of the group acting in `kind`.
pub fn identity<S: Field>(kind: ActionKind) -> GroupElement<S> {
    match kind {
        ActionKind::Sa2Linear => GroupElement::Sa2(Sa2::identity()),
        _ => GroupElement::Sl2(Sl2::identity()),
    }
}

fn check_kind<S>(kind: ActionKind, g: &GroupElement<S>) -> Result<()> {
    match (kind, g) {
        (ActionKind::Sa2Linear, GroupElement::Sa2(_)) => Ok(()),
        (ActionKind::Sa2Linear, _) => Err(Error::KindMismatch { expected: "SA(2)" }),
        (_, GroupElement::Sl2(_)) => Ok(()),
        (_, _) => Err(Error::KindMismatch { expected: "SL(2)" }),
    }
}

/// Group law in the standard representation.
pub fn compose<S: Field>(kind: ActionKind, g: &GroupElement<S>, h: &GroupElement<S>) -> Result<GroupElement<S>> {
    check_kind(kind, g)?;
    check_kind(kind, h)?;
    g.compose(h)
}

pub fn act<S: Scalar>(action: &dyn GroupAction, g: &GroupElement<S>, p: &[S]) -> Result<Vec<S>> {
    S::math(action).act(g, p)
}

pub fn act_velocity<S: Scalar>(action: &dyn GroupAction, g: &GroupElement<S>, p: &[S], v: &[S]) -> Result<Vec<S>> {
    S::math(action).act_velocity(g, p, v)
}

pub fn adjoint_matrix<S: Scalar>(action: &dyn GroupAction, g: &GroupElement<S>) -> Result<Matrix<S>> {
    S::math(action).adjoint_matrix(g)
}

pub fn characteristics<S: Scalar>(action: &dyn GroupAction, p: &[S]) -> Matrix<S> {
    S::math(action).characteristics(p)
}

pub fn characteristics_invariantized<S: Scalar>(action: &dyn GroupAction) -> Matrix<S> {
    S::math(action).characteristics_invariantized()
}

/// Adjoint of SL(2) on the basis `x∂x - y∂y, y∂x, x∂y`, shared by the linear and projective actions.
pub(crate) fn sl2_adjoint<S: Field>(g: &Sl2<S>) -> Matrix<S> {
    let Sl2 { a, b, c, d } = *g;
    let two = S::from_f64(2.0);
    Matrix::from_rows(&[
        [a * d + b * c, -a * c, b * d],
        [-two * a * b, a * a, -b * b],
        [two * c * d, -c * c, d * d],
    ])
}

pub(crate) fn expect_sl2<S>(g: &GroupElement<S>) -> Result<&Sl2<S>> {
    match g {
        GroupElement::Sl2(g) => Ok(g),
        _ => Err(Error::KindMismatch { expected: "SL(2)" }),
    }
}

pub(crate) fn expect_sa2<S>(g: &GroupElement<S>) -> Result<&Sa2<S>> {
    match g {
        GroupElement::Sa2(g) => Ok(g),
        _ => Err(Error::KindMismatch { expected: "SA(2)" }),
    }
}

pub(crate) fn guard<S: Field>(x: S) -> Result<S> {
    if x.is_negligible() {
        Err(Error::DivisionByZero)
    } else {
        Ok(x)
    }
}

/// Random SL(2) element with `a, b, c` in `[-r, r]` and `d` fixed by the determinant.
///
/// Panics for `r < 1`, where `|a| ≥ 1/4` leaves no admissible `d`.
pub fn random_sl2<R: Rng + ?Sized>(rng: &mut R, r: f64) -> Sl2<f64> {
    assert!(r >= 1.0, "random_sl2 needs r >= 1, got {r}");
    loop {
        let a: f64 = rng.gen_range(-r..r);
        if a.abs() < 0.25 {
            continue;
        }
        let b: f64 = rng.gen_range(-r..r);
        let c: f64 = rng.gen_range(-r..r);
        let d = (1.0 + b * c) / a;
        if d.abs() <= r {
            return Sl2::new_unchecked(a, b, c, d);
        }
    }
}

/// Random element of the group acting in `kind`.
pub fn random_element<R: Rng + ?Sized>(kind: ActionKind, rng: &mut R, r: f64) -> GroupElement<f64> {
    let g = random_sl2(rng, r);
    match kind {
        ActionKind::Sa2Linear => GroupElement::Sa2(Sa2::new(g, rng.gen_range(-r..r), rng.gen_range(-r..r))),
        _ => GroupElement::Sl2(g),
    }
}
