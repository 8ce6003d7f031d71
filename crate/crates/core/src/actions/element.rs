use crate::error::{Error, Result};
use crate::numeric::{Field, Matrix};

/// Tolerance on `ad - bc = 1`, scaled by the size of the products.
const UNIMODULAR_TOL: f64 = 1e-10;

/// Element of SL(2) stored by its entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl2<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Field> Sl2<S> {
    /// Checked constructor: rejects entries with `ad - bc` away from one.
    pub fn new(a: S, b: S, c: S, d: S) -> Result<Self> {
        let g = Sl2 { a, b, c, d };
        let scale = 1.0 + (a * d).modulus() + (b * c).modulus();
        let defect = (g.det() - S::one()).modulus();
        if defect > UNIMODULAR_TOL * scale {
            return Err(Error::NotUnimodular(defect));
        }
        Ok(g)
    }

    /// Constructor for entries that are unimodular by construction.
    pub fn new_unchecked(a: S, b: S, c: S, d: S) -> Self {
        Sl2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Sl2 { a: S::one(), b: S::zero(), c: S::zero(), d: S::one() }
    }

    pub fn det(&self) -> S {
        self.a * self.d - self.b * self.c
    }

    pub fn compose(&self, h: &Self) -> Self {
        Sl2 {
            a: self.a * h.a + self.b * h.c,
            b: self.a * h.b + self.b * h.d,
            c: self.c * h.a + self.d * h.c,
            d: self.c * h.b + self.d * h.d,
        }
    }

    pub fn inverse(&self) -> Self {
        Sl2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn scale(&self, s: S) -> Self {
        Sl2 { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn apply(&self, x: S, y: S) -> (S, S) {
        (self.a * x + self.b * y, self.c * x + self.d * y)
    }

    pub fn matrix(&self) -> Matrix<S> {
        Matrix::from_rows(&[[self.a, self.b], [self.c, self.d]])
    }

    pub fn map<T: Field>(&self, f: impl Fn(S) -> T) -> Sl2<T> {
        Sl2 { a: f(self.a), b: f(self.b), c: f(self.c), d: f(self.d) }
    }
}

/// Element of SA(2): an SL(2) part and a translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sa2<S> {
    pub g: Sl2<S>,
    pub alpha: S,
    pub beta: S,
}

impl<S: Field> Sa2<S> {
    pub fn new(g: Sl2<S>, alpha: S, beta: S) -> Self {
        Sa2 { g, alpha, beta }
    }

    pub fn identity() -> Self {
        Sa2 { g: Sl2::identity(), alpha: S::zero(), beta: S::zero() }
    }

    pub fn compose(&self, h: &Self) -> Self {
        let (tx, ty) = self.g.apply(h.alpha, h.beta);
        Sa2 { g: self.g.compose(&h.g), alpha: tx + self.alpha, beta: ty + self.beta }
    }

    pub fn inverse(&self) -> Self {
        let gi = self.g.inverse();
        let (tx, ty) = gi.apply(self.alpha, self.beta);
        Sa2 { g: gi, alpha: -tx, beta: -ty }
    }

    /// Standard 3×3 representation `[[a,b,α],[c,d,β],[0,0,1]]`.
    pub fn matrix(&self) -> Matrix<S> {
        let (z, o) = (S::zero(), S::one());
        Matrix::from_rows(&[[self.g.a, self.g.b, self.alpha], [self.g.c, self.g.d, self.beta], [z, z, o]])
    }

    pub fn map<T: Field>(&self, f: impl Fn(S) -> T) -> Sa2<T> {
        Sa2 { g: self.g.map(&f), alpha: f(self.alpha), beta: f(self.beta) }
    }
}

/// A group element for one of the supported actions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GroupElement<S> {
    Sl2(Sl2<S>),
    Sa2(Sa2<S>),
}

impl<S: Field> GroupElement<S> {
    /// Standard representation: 2×2 for SL(2), 3×3 for SA(2).
    pub fn matrix(&self) -> Matrix<S> {
        match self {
            GroupElement::Sl2(g) => g.matrix(),
            GroupElement::Sa2(g) => g.matrix(),
        }
    }

    /// The SL(2) part (the element itself for SL(2)).
    pub fn linear(&self) -> &Sl2<S> {
        match self {
            GroupElement::Sl2(g) => g,
            GroupElement::Sa2(g) => &g.g,
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            GroupElement::Sl2(g) => GroupElement::Sl2(g.inverse()),
            GroupElement::Sa2(g) => GroupElement::Sa2(g.inverse()),
        }
    }

    pub fn compose(&self, h: &Self) -> Result<Self> {
        match (self, h) {
            (GroupElement::Sl2(g), GroupElement::Sl2(h)) => Ok(GroupElement::Sl2(g.compose(h))),
            (GroupElement::Sa2(g), GroupElement::Sa2(h)) => Ok(GroupElement::Sa2(g.compose(h))),
            (GroupElement::Sl2(_), _) => Err(Error::KindMismatch { expected: "SL(2)" }),
            (GroupElement::Sa2(_), _) => Err(Error::KindMismatch { expected: "SA(2)" }),
        }
    }

    pub fn det(&self) -> S {
        self.linear().det()
    }

    pub fn map<T: Field>(&self, f: impl Fn(S) -> T) -> GroupElement<T> {
        match self {
            GroupElement::Sl2(g) => GroupElement::Sl2(g.map(f)),
            GroupElement::Sa2(g) => GroupElement::Sa2(g.map(f)),
        }
    }

    /// Largest entrywise difference of the standard representations.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix().max_abs_diff(&other.matrix())
    }
}
