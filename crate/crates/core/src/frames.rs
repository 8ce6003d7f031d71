//! Lattice paths, moving frames, difference invariants and σ invariants.

use rand::Rng;

use crate::actions::{random_element, ActionKind, GroupAction, GroupElement, Scalar};
use crate::error::{Error, Result};
use crate::numeric::{Dual, Field};

/// Points `u_n` for `n = offset, offset+1, ...`, stored flat, with optional velocities.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePath<S> {
    offset: i64,
    dim: usize,
    points: Vec<S>,
    velocities: Option<Vec<S>>,
}

impl<S: Field> LatticePath<S> {
    pub fn new<P: AsRef<[S]>>(offset: i64, dim: usize, points: &[P]) -> Result<Self> {
        Ok(LatticePath { offset, dim, points: flatten(dim, points)?, velocities: None })
    }

    /// Path of 1-component points.
    pub fn scalar(offset: i64, xs: &[S]) -> Self {
        LatticePath { offset, dim: 1, points: xs.to_vec(), velocities: None }
    }

    /// Path of 2-component points.
    pub fn planar(offset: i64, pts: &[[S; 2]]) -> Self {
        LatticePath { offset, dim: 2, points: pts.iter().flatten().copied().collect(), velocities: None }
    }

    pub fn with_velocities<P: AsRef<[S]>>(mut self, velocities: &[P]) -> Result<Self> {
        let v = flatten(self.dim, velocities)?;
        if v.len() != self.points.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: velocities.len() });
        }
        self.velocities = Some(v);
        Ok(self)
    }

    pub fn with_flat_velocities(mut self, v: Vec<S>) -> Result<Self> {
        if v.len() != self.points.len() {
            return Err(Error::DimensionMismatch { expected: self.points.len(), found: v.len() });
        }
        self.velocities = Some(v);
        Ok(self)
    }

    pub fn without_velocities(mut self) -> Self {
        self.velocities = None;
        self
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One past the last site.
    pub fn end(&self) -> i64 {
        self.offset + self.len() as i64
    }

    pub fn has_velocities(&self) -> bool {
        self.velocities.is_some()
    }

    fn index(&self, n: i64, count: usize) -> Result<usize> {
        if n < self.offset || n + count as i64 > self.end() {
            return Err(Error::WindowOutOfRange { site: n });
        }
        Ok((n - self.offset) as usize * self.dim)
    }

    pub fn point(&self, n: i64) -> Result<&[S]> {
        self.window(n, 1)
    }

    /// Coordinates of `count` consecutive points starting at site `n`.
    pub fn window(&self, n: i64, count: usize) -> Result<&[S]> {
        let i = self.index(n, count)?;
        Ok(&self.points[i..i + count * self.dim])
    }

    pub fn velocity_window(&self, n: i64, count: usize) -> Result<&[S]> {
        let i = self.index(n, count)?;
        let v = self.velocities.as_ref().ok_or(Error::MissingVelocities)?;
        Ok(&v[i..i + count * self.dim])
    }

    pub fn flat_points(&self) -> &[S] {
        &self.points
    }

    pub fn flat_velocities(&self) -> Option<&[S]> {
        self.velocities.as_deref()
    }

    pub fn points(&self) -> impl Iterator<Item = &[S]> {
        self.points.chunks(self.dim)
    }

    pub fn velocities(&self) -> Option<impl Iterator<Item = &[S]>> {
        self.velocities.as_ref().map(|v| v.chunks(self.dim))
    }

    pub fn map<T: Field>(&self, f: impl Fn(S) -> T) -> LatticePath<T> {
        LatticePath {
            offset: self.offset,
            dim: self.dim,
            points: self.points.iter().map(|&x| f(x)).collect(),
            velocities: self.velocities.as_ref().map(|v| v.iter().map(|&x| f(x)).collect()),
        }
    }

    /// Same points, with sites `offset..offset+count` only.
    pub fn slice(&self, start: i64, count: usize) -> Result<Self> {
        let i = self.index(start, count)?;
        let j = i + count * self.dim;
        Ok(LatticePath {
            offset: start,
            dim: self.dim,
            points: self.points[i..j].to_vec(),
            velocities: self.velocities.as_ref().map(|v| v[i..j].to_vec()),
        })
    }

    /// The deformation `u + t·u'` as a path over dual numbers.
    pub fn tangent_lift(&self) -> Result<LatticePath<Dual<S>>> {
        let v = self.velocities.as_ref().ok_or(Error::MissingVelocities)?;
        Ok(LatticePath {
            offset: self.offset,
            dim: self.dim,
            points: self.points.iter().zip(v).map(|(&p, &t)| Dual::new(p, t)).collect(),
            velocities: None,
        })
    }

    /// Largest coordinate difference over the shared sites.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let lo = self.offset.max(other.offset);
        let hi = self.end().min(other.end());
        (lo..hi)
            .flat_map(|n| {
                let a = self.point(n).unwrap();
                let b = other.point(n).unwrap();
                a.iter().zip(b).map(|(&x, &y)| (x - y).modulus()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

fn flatten<S: Copy, P: AsRef<[S]>>(dim: usize, rows: &[P]) -> Result<Vec<S>> {
    let mut out = Vec::with_capacity(rows.len() * dim);
    for r in rows {
        let r = r.as_ref();
        if r.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
        }
        out.extend_from_slice(r);
    }
    Ok(out)
}

/// Sampled κ and, for planar actions, τ. Both sequences start at `offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSequence<S> {
    pub offset: i64,
    pub kappa: Vec<S>,
    pub tau: Option<Vec<S>>,
}

impl<S: Field> InvariantSequence<S> {
    pub fn new(offset: i64, kappa: Vec<S>, tau: Option<Vec<S>>) -> Self {
        InvariantSequence { offset, kappa, tau }
    }

    /// Constant invariants over `len` sites.
    pub fn constant(kind: ActionKind, offset: i64, len: usize, kappa: f64, tau: f64) -> Self {
        let tau = kind.tau_points().map(|_| vec![S::from_f64(tau); len]);
        InvariantSequence { offset, kappa: vec![S::from_f64(kappa); len], tau }
    }

    fn at(seq: &[S], offset: i64, n: i64) -> Result<S> {
        if n < offset || n >= offset + seq.len() as i64 {
            return Err(Error::WindowOutOfRange { site: n });
        }
        Ok(seq[(n - offset) as usize])
    }

    pub fn kappa(&self, n: i64) -> Result<S> {
        Self::at(&self.kappa, self.offset, n)
    }

    pub fn tau(&self, n: i64) -> Result<S> {
        match &self.tau {
            Some(t) => Self::at(t, self.offset, n),
            None => Err(Error::WindowOutOfRange { site: n }),
        }
    }

    /// Invariant number `i` (0 = κ, 1 = τ) at site `n`.
    pub fn component(&self, i: usize, n: i64) -> Result<S> {
        match i {
            0 => self.kappa(n),
            _ => self.tau(n),
        }
    }

    pub fn components(&self) -> usize {
        if self.tau.is_some() {
            2
        } else {
            1
        }
    }

    /// Sites at which every component is present.
    pub fn common_len(&self) -> usize {
        self.tau.as_ref().map_or(self.kappa.len(), |t| t.len().min(self.kappa.len()))
    }

    /// One past the last site of component `i`.
    pub fn end(&self, i: usize) -> i64 {
        let len = match i {
            0 => self.kappa.len(),
            _ => self.tau.as_ref().map_or(0, Vec::len),
        };
        self.offset + len as i64
    }

    pub fn map<T: Field>(&self, f: impl Fn(S) -> T) -> InvariantSequence<T> {
        InvariantSequence {
            offset: self.offset,
            kappa: self.kappa.iter().map(|&x| f(x)).collect(),
            tau: self.tau.as_ref().map(|t| t.iter().map(|&x| f(x)).collect()),
        }
    }

    /// Largest difference over shared sites, relative to `max(1, |value|)`.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        let rel = |a: &[S], ao: i64, b: &[S], bo: i64| {
            let lo = ao.max(bo);
            let hi = (ao + a.len() as i64).min(bo + b.len() as i64);
            (lo..hi)
                .map(|n| {
                    let (x, y) = (a[(n - ao) as usize], b[(n - bo) as usize]);
                    (x - y).modulus() / x.modulus().max(1.0)
                })
                .fold(0.0, f64::max)
        };
        let mut d = rel(&self.kappa, self.offset, &other.kappa, other.offset);
        if let (Some(a), Some(b)) = (&self.tau, &other.tau) {
            d = d.max(rel(a, self.offset, b, other.offset));
        }
        d
    }
}

/// Every κ and τ computable on `path`, each anchored at the left end of its window.
pub fn invariants_of<S: Scalar>(action: &dyn GroupAction, path: &LatticePath<S>) -> Result<InvariantSequence<S>> {
    let kind = action.kind();
    check_dim(kind, path)?;
    let m = S::math(action);
    let sites = |w: usize| path.offset()..path.end() - w as i64 + 1;
    let kw = kind.kappa_points();
    let kappa = sites(kw).map(|n| m.kappa(n, path.window(n, kw)?)).collect::<Result<Vec<_>>>()?;
    let tau = match kind.tau_points() {
        Some(tw) => Some(sites(tw).map(|n| m.tau(n, path.window(n, tw)?)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    if let Some(t) = &tau {
        if let Some(i) = t.iter().position(|x| x.is_negligible()) {
            return Err(Error::DegenerateWindow { site: path.offset() + i as i64 });
        }
    }
    if kind == ActionKind::Sa2Linear {
        if let Some(i) = kappa.iter().position(|x| x.is_negligible()) {
            return Err(Error::DegenerateWindow { site: path.offset() + i as i64 });
        }
    }
    Ok(InvariantSequence::new(path.offset(), kappa, tau))
}

fn check_dim<S: Field>(kind: ActionKind, path: &LatticePath<S>) -> Result<()> {
    if path.dim() != kind.point_dim() {
        return Err(Error::DimensionMismatch { expected: kind.point_dim(), found: path.dim() });
    }
    Ok(())
}

/// The moving frame `ρ_k` from the window starting at site `k`.
pub fn frame_at<S: Scalar>(action: &dyn GroupAction, path: &LatticePath<S>, k: i64) -> Result<GroupElement<S>> {
    check_dim(action.kind(), path)?;
    S::math(action).frame(k, path.window(k, action.kind().frame_points())?)
}

/// The Maurer-Cartan element `K_k` built from the invariants at site `k`.
pub fn maurer_cartan<S: Scalar>(action: &dyn GroupAction, inv: &InvariantSequence<S>, k: i64) -> Result<GroupElement<S>> {
    let tau = match action.kind().tau_points() {
        Some(_) => Some(inv.tau(k)?),
        None => None,
    };
    S::math(action).maurer_cartan(k, inv.kappa(k)?, tau)
}

/// First-order invariants at site `k`: `(σˣ, σʸ)` for planar actions,
/// `(σ₀, σ₁, σ₂)` for the projective action.
pub fn sigma_at<S: Scalar>(action: &dyn GroupAction, path: &LatticePath<S>, k: i64) -> Result<Vec<S>> {
    let w = action.kind().frame_points();
    let frame = frame_at(action, path, k)?;
    S::math(action).sigma(&frame, path.window(k, w)?, path.velocity_window(k, w)?)
}

/// Apply a group element to every point (and velocity) of a path.
pub fn transform_path<S: Scalar>(
    action: &dyn GroupAction,
    g: &GroupElement<S>,
    path: &LatticePath<S>,
) -> Result<LatticePath<S>> {
    let m = S::math(action);
    let mut pts = Vec::with_capacity(path.flat_points().len());
    for p in path.points() {
        pts.extend(m.act(g, p)?);
    }
    let vel = match path.velocities() {
        Some(vs) => {
            let mut out = Vec::with_capacity(pts.len());
            for (p, v) in path.points().zip(vs) {
                out.extend(m.act_velocity(g, p, v)?);
            }
            Some(out)
        }
        None => None,
    };
    Ok(LatticePath { offset: path.offset(), dim: path.dim(), points: pts, velocities: vel })
}

/// Integrate `ρ_{k+1} = K_k ρ_k` from `seed` at `inv.offset` and recover the
/// points `u_k = ρ_k⁻¹ · p*` from the normalization point `p*`.
pub fn path_from_invariants<S: Scalar>(
    action: &dyn GroupAction,
    inv: &InvariantSequence<S>,
    seed: &GroupElement<S>,
) -> Result<LatticePath<S>> {
    let m = S::math(action);
    let p_star = m.normalization_point();
    let steps = inv.common_len();
    let mut rho = *seed;
    let mut pts = m.act(&rho.inverse(), &p_star)?;
    for k in 0..steps as i64 {
        let site = inv.offset + k;
        rho = maurer_cartan(action, inv, site)?.compose(&rho)?;
        pts.extend(m.act(&rho.inverse(), &p_star)?);
    }
    Ok(LatticePath { offset: inv.offset, dim: action.kind().point_dim(), points: pts, velocities: None })
}

/// Residual of the normalization equations for `frame` on the window at its site.
pub fn normalization_residual<S: Scalar>(action: &dyn GroupAction, frame: &GroupElement<S>, window: &[S]) -> Result<f64> {
    let kind = action.kind();
    let m = S::math(action);
    let dim = kind.point_dim();
    let targets: &[(usize, usize, f64)] = match kind {
        ActionKind::Sl2Linear => &[(0, 0, 1.0), (0, 1, 0.0), (1, 0, 0.0)],
        ActionKind::Sa2Linear => &[(0, 0, 0.0), (0, 1, 0.0), (1, 0, 1.0), (1, 1, 0.0), (2, 0, 0.0)],
        ActionKind::Sl2Projective => &[(0, 0, 0.5), (1, 0, 0.0), (2, 0, -0.5)],
    };
    let mut worst = 0.0f64;
    for &(j, c, target) in targets {
        let image = m.act(frame, &window[j * dim..(j + 1) * dim])?;
        worst = worst.max((image[c] - S::from_f64(target)).modulus());
    }
    Ok(worst)
}

/// Largest deviations found by [`verify_frame_identities`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameReport {
    pub trials: usize,
    pub equivariance: f64,
    pub invariance: f64,
    pub maurer_cartan: f64,
    pub normalization: f64,
    pub determinant: f64,
}

/// Distance between two SL(2)/SA(2) elements; the projective action only sees
/// elements up to sign, so both signs are tried there.
pub fn frame_distance<S: Field>(kind: ActionKind, a: &GroupElement<S>, b: &GroupElement<S>) -> f64 {
    let d = a.max_abs_diff(b);
    match (kind, b) {
        (ActionKind::Sl2Projective, GroupElement::Sl2(g)) => d.min(a.max_abs_diff(&GroupElement::Sl2(g.scale(-S::one())))),
        _ => d,
    }
}

/// Check equivariance, invariance, Maurer-Cartan consistency, normalization and
/// unimodularity on `path` under `trials` random group elements.
pub fn verify_frame_identities<R: Rng + ?Sized>(
    action: &dyn GroupAction,
    path: &LatticePath<f64>,
    trials: usize,
    rng: &mut R,
) -> Result<FrameReport> {
    let kind = action.kind();
    let inv = invariants_of(action, path)?;
    let fw = kind.frame_points();
    let frame_sites: Vec<i64> = (path.offset()..=path.end() - fw as i64).collect();
    let frames = frame_sites.iter().map(|&k| frame_at(action, path, k)).collect::<Result<Vec<_>>>()?;
    let mut report = FrameReport { trials, ..Default::default() };
    for (&k, rho) in frame_sites.iter().zip(&frames) {
        report.normalization = report.normalization.max(normalization_residual(action, rho, path.window(k, fw)?)?);
        report.determinant = report.determinant.max((rho.det() - 1.0).abs());
    }
    for (i, w) in frames.windows(2).enumerate() {
        let k = frame_sites[i];
        if k >= inv.offset + inv.common_len() as i64 {
            break;
        }
        let mc = maurer_cartan(action, &inv, k)?;
        report.determinant = report.determinant.max((mc.det() - 1.0).abs());
        let direct = w[1].compose(&w[0].inverse())?;
        report.maurer_cartan = report.maurer_cartan.max(direct.max_abs_diff(&mc));
    }
    for _ in 0..trials {
        let Some((g, moved)) = sample_transform(action, path, rng) else { continue };
        let moved_inv = invariants_of(action, &moved)?;
        report.invariance = report.invariance.max(inv.max_rel_diff(&moved_inv));
        for (&k, rho) in frame_sites.iter().zip(&frames) {
            let pulled = frame_at(action, &moved, k)?.compose(&g)?;
            report.equivariance = report.equivariance.max(frame_distance(kind, rho, &pulled));
        }
    }
    Ok(report)
}

/// A random element together with the transformed path, resampled until the
/// image is nondegenerate. Gives up after a fixed number of attempts.
pub fn sample_transform<R: Rng + ?Sized>(
    action: &dyn GroupAction,
    path: &LatticePath<f64>,
    rng: &mut R,
) -> Option<(GroupElement<f64>, LatticePath<f64>)> {
    let kind = action.kind();
    for _ in 0..200 {
        let g = random_element(kind, rng, 2.0);
        let Ok(moved) = transform_path(action, &g, path) else { continue };
        let fw = kind.frame_points() as i64;
        let frames_ok = (moved.offset()..=moved.end() - fw).all(|k| frame_at(action, &moved, k).is_ok());
        if frames_ok && invariants_of(action, &moved).is_ok() {
            return Some((g, moved));
        }
    }
    None
}
