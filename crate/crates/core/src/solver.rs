//! Extremal fixtures: forward stepping of the invariantized Euler-Lagrange
//! system, direct minimization of the action sum over path points, and a
//! brute-force comparison of the two extremality criteria.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actions::{random_element, ActionKind, GroupAction, GroupElement};
use crate::error::{Error, Result};
use crate::frames::{frame_at, invariants_of, path_from_invariants, InvariantSequence, LatticePath};
use crate::numeric::{max_abs, Dual, Field, Matrix, D1, D2};
use crate::variational::{action_sum, el_residual, el_residuals, InvariantLagrangian};

/// Newton settings shared by the solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    /// Number of invariant sites to produce.
    pub length: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Step reduction factor when a Newton step does not decrease the residual.
    pub damping: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { length: 16, tol: 1e-12, max_iter: 50, damping: 0.5 }
    }
}

impl SolveConfig {
    pub fn with_length(length: usize) -> Self {
        SolveConfig { length, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.damping > 0.0 && self.damping < 1.0) || self.max_iter == 0 {
            return Err(Error::InvalidInput(format!("invalid solver settings {self:?}")));
        }
        Ok(())
    }
}

/// Which invariant values the residual at site `t` reaches.
#[derive(Clone, Debug, PartialEq)]
pub struct ElStructure {
    /// First site, relative to the sequence start, at which the residual is defined.
    pub first_site: i64,
    /// Per component, the largest shift `s` with the residual at `t` depending on site `t + s`.
    pub newest: Vec<i64>,
}

impl ElStructure {
    /// Leading values each component needs before stepping can start.
    pub fn leading_lengths(&self) -> Vec<usize> {
        self.newest.iter().map(|&m| (self.first_site + m).max(0) as usize).collect()
    }
}

/// Probe the residual's dependencies with dual numbers on generic data.
pub fn el_structure(action: &dyn GroupAction, l: &InvariantLagrangian) -> Result<ElStructure> {
    l.check_action(action)?;
    let kind = action.kind();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    const LEN: usize = 24;
    let draw = |rng: &mut ChaCha8Rng, comp: usize| match (kind, comp) {
        (ActionKind::Sl2Projective, _) => rng.gen_range(-2.0..-0.5),
        _ => rng.gen_range(0.6..1.6),
    };
    let comps: Vec<Vec<f64>> = (0..kind.invariant_count()).map(|c| (0..LEN).map(|_| draw(&mut rng, c)).collect()).collect();
    let plain = sequence(0, &comps, |x| x);
    let first_site = (0..LEN as i64)
        .find(|&t| el_residual(action, l, &plain, t).is_ok())
        .ok_or_else(|| Error::InvalidInput("Euler-Lagrange residual undefined on every site".into()))?;
    let t = first_site + 6;
    let mut newest = vec![i64::MIN; comps.len()];
    for (c, slot) in newest.iter_mut().enumerate() {
        for s in 0..LEN as i64 {
            let seq = seeded(&comps, c, s);
            let r = el_residual::<D1>(action, l, &seq, t)?;
            if r.iter().any(|d| d.eps != 0.0) {
                *slot = s - t;
            }
        }
        if *slot == i64::MIN {
            return Err(Error::InvalidInput(format!("Euler-Lagrange system does not involve invariant {c}")));
        }
    }
    Ok(ElStructure { first_site, newest })
}

fn sequence<S: Field>(offset: i64, comps: &[Vec<f64>], lift: impl Fn(f64) -> S) -> InvariantSequence<S> {
    let kappa = comps[0].iter().map(|&x| lift(x)).collect();
    let tau = comps.get(1).map(|t| t.iter().map(|&x| lift(x)).collect());
    InvariantSequence::new(offset, kappa, tau)
}

fn seeded(comps: &[Vec<f64>], c: usize, s: i64) -> InvariantSequence<D1> {
    let mut seq = sequence(0, comps, D1::constant);
    let slot = if c == 0 { &mut seq.kappa } else { seq.tau.as_mut().unwrap() };
    slot[s as usize].eps = 1.0;
    seq
}

/// Extend `leading` by solving the Euler-Lagrange system one site at a time for
/// the newest invariant values, until every component has `config.length` sites.
///
/// Leading data longer than needed is truncated, so that every residual site of
/// the result is solved for rather than prescribed.
pub fn step_el_forward(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    leading: &InvariantSequence<f64>,
    config: &SolveConfig,
) -> Result<InvariantSequence<f64>> {
    config.validate()?;
    let structure = el_structure(action, l)?;
    let need = structure.leading_lengths();
    let mut comps: Vec<Vec<f64>> = vec![leading.kappa.clone()];
    if action.kind().invariant_count() == 2 {
        comps.push(leading.tau.clone().ok_or(Error::InvalidInput("leading data lacks tau".into()))?);
    }
    for (c, n) in comps.iter_mut().zip(&need) {
        if c.len() < *n {
            return Err(Error::InvalidInput(format!("leading data too short: need {need:?} values")));
        }
        c.truncate(*n);
    }
    let offset = leading.offset;
    let mut t = offset + structure.first_site;
    let pad = 4;
    while comps.iter().any(|c| c.len() < config.length) {
        let guess: Vec<f64> = comps.iter().map(|c| *c.last().unwrap_or(&1.0)).collect();
        let x = newton_site(action, l, offset, &comps, guess, pad, t, config)?;
        for (c, v) in comps.iter_mut().zip(x) {
            c.push(v);
        }
        t += 1;
    }
    for c in comps.iter_mut() {
        c.truncate(config.length);
    }
    Ok(sequence(offset, &comps, |x| x))
}

fn with_unknowns<S: Field>(offset: i64, comps: &[Vec<f64>], x: &[S], pad: usize, lift: impl Fn(f64) -> S) -> InvariantSequence<S> {
    let ext: Vec<Vec<S>> = comps
        .iter()
        .zip(x)
        .map(|(c, &xi)| c.iter().map(|&v| lift(v)).chain(std::iter::repeat(xi).take(1 + pad)).collect())
        .collect();
    InvariantSequence::new(offset, ext[0].clone(), ext.get(1).cloned())
}

#[allow(clippy::too_many_arguments)]
fn newton_site(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    offset: i64,
    comps: &[Vec<f64>],
    mut x: Vec<f64>,
    pad: usize,
    t: i64,
    config: &SolveConfig,
) -> Result<Vec<f64>> {
    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let seq = with_unknowns(offset, comps, x, pad, |v| v);
        el_residual(action, l, &seq, t)
    };
    let mut r = residual(&x)?;
    for _ in 0..config.max_iter {
        let norm = max_abs(&r);
        if norm <= config.tol {
            return Ok(x);
        }
        let d = x.len();
        let mut jac = Matrix::zeros(d, d);
        for i in 0..d {
            let xi: Vec<D1> = x.iter().enumerate().map(|(k, &v)| Dual::new(v, if k == i { 1.0 } else { 0.0 })).collect();
            let seq = with_unknowns(offset, comps, &xi, pad, D1::constant);
            let col = el_residual::<D1>(action, l, &seq, t)?;
            for (c, v) in col.iter().enumerate() {
                jac[(c, i)] = v.eps;
            }
        }
        let step = jac.inverse().map_err(|_| Error::SingularJacobian { site: t })?.apply(&r);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - lambda * s).collect();
            if let Ok(rt) = residual(&trial) {
                if rt.iter().all(|v| v.is_finite()) && max_abs(&rt) < norm {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= config.damping;
            if lambda < 1e-8 {
                return Err(Error::NewtonDivergence { site: t });
            }
        }
    }
    if max_abs(&r) <= config.tol {
        Ok(x)
    } else {
        Err(Error::NewtonDivergence { site: t })
    }
}

/// Points clamped at each end of a path for the direct minimization.
pub fn clamp_counts(action: &dyn GroupAction, l: &InvariantLagrangian, path: &LatticePath<f64>) -> Result<(usize, usize)> {
    let inv = invariants_of(action, path)?;
    let sites = el_residuals(action, l, &inv)?;
    let (first, last) = match (sites.first(), sites.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::InvalidInput("path too short for the Euler-Lagrange system".into())),
    };
    let w = action.kind().frame_points();
    let head = w.max((first - path.offset()) as usize);
    let tail = w.max((path.end() - 1 - last) as usize);
    if head + tail >= path.len() {
        return Err(Error::InvalidInput("no free points between the clamped ends".into()));
    }
    Ok((head, tail))
}

fn perturbed<S: Field>(path: &LatticePath<f64>, free: std::ops::Range<usize>, lift: impl Fn(usize, f64) -> S) -> Result<LatticePath<S>> {
    let d = path.dim();
    let pts: Vec<S> = path
        .flat_points()
        .iter()
        .enumerate()
        .map(|(i, &v)| if free.contains(&i) { lift(i - free.start, v) } else { S::from_f64(v) })
        .collect();
    let rows: Vec<&[S]> = pts.chunks(d).collect();
    LatticePath::new(path.offset(), d, &rows)
}

fn action_value(action: &dyn GroupAction, l: &InvariantLagrangian, path: &LatticePath<f64>) -> Result<f64> {
    action_sum(l, &invariants_of(action, path)?)
}

/// Gradient and Hessian of `Σ L` with respect to the free coordinates.
fn gradient_hessian(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    path: &LatticePath<f64>,
    free: std::ops::Range<usize>,
) -> Result<(Vec<f64>, Matrix<f64>)> {
    let n = free.len();
    let mut g = vec![0.0; n];
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let p = perturbed::<D2>(path, free.clone(), |k, v| {
                Dual::new(Dual::new(v, if k == i { 1.0 } else { 0.0 }), Dual::new(if k == j { 1.0 } else { 0.0 }, 0.0))
            })?;
            let s = action_sum(l, &invariants_of(action, &p)?)?;
            if j == i {
                g[i] = s.re.eps;
            }
            h[(i, j)] = s.eps.eps;
            h[(j, i)] = s.eps.eps;
        }
    }
    Ok((g, h))
}

/// Gradient of `Σ L` with respect to the coordinates in `free`.
pub fn action_gradient(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    path: &LatticePath<f64>,
    free: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    (0..free.len())
        .map(|i| {
            let p = perturbed::<D1>(path, free.clone(), |k, v| Dual::new(v, if k == i { 1.0 } else { 0.0 }))?;
            Ok(action_sum(l, &invariants_of(action, &p)?)?.eps)
        })
        .collect()
}

/// Critical point of `Σ L` over the interior points with both ends clamped, by
/// damped Newton iteration with exact gradients and Hessians. Converges when the
/// gradient is below `config.tol·(1 + ‖path‖∞)`.
pub fn extremal_path_by_gradient(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    seed: &LatticePath<f64>,
    config: &SolveConfig,
) -> Result<LatticePath<f64>> {
    config.validate()?;
    let (head, tail) = clamp_counts(action, l, seed)?;
    let d = seed.dim();
    let free = head * d..(seed.len() - tail) * d;
    let scale = 1.0 + max_abs(seed.flat_points());
    let mut path = seed.clone().without_velocities();
    let mut residual = f64::INFINITY;
    for _ in 0..config.max_iter {
        let (g, h) = gradient_hessian(action, l, &path, free.clone())?;
        residual = max_abs(&g);
        if residual <= config.tol * scale {
            return Ok(path);
        }
        let step = h.inverse().map_err(|_| Error::SingularJacobian { site: seed.offset() + head as i64 })?.apply(&g);
        let mut lambda = 1.0;
        loop {
            let trial = perturbed::<f64>(&path, free.clone(), |k, v| v - lambda * step[k])?;
            match action_gradient(action, l, &trial, free.clone()) {
                Ok(gt) if max_abs(&gt) < residual => {
                    path = trial;
                    break;
                }
                Ok(_) => {}
                Err(e @ Error::DegenerateWindow { .. }) if lambda < 1e-6 => return Err(e),
                Err(Error::DegenerateWindow { .. }) | Err(Error::NegativeRadicand { .. }) | Err(Error::ProjectivePole) => {}
                Err(e) => return Err(e),
            }
            lambda *= config.damping;
            if lambda < 1e-8 {
                return Err(Error::NonConvergence { iterations: config.max_iter, residual });
            }
        }
    }
    Err(Error::NonConvergence { iterations: config.max_iter, residual })
}

/// Per-site comparison of the brute-force and invariantized extremality criteria.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSite {
    pub site: i64,
    /// `∂(Σ L)/∂u_n` by central differences.
    pub gradient: Vec<f64>,
    /// `H*E(L)` at the site.
    pub invariant_residual: Vec<f64>,
    /// `max_c |∂(Σ L)/∂u_n^c - H*E(L)·σ(e_c)|`.
    pub pairing_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleReport {
    pub sites: Vec<OracleSite>,
    /// Sites where exactly one of the two criteria is below `1e-7`.
    pub flagged: Vec<i64>,
}

impl OracleReport {
    pub fn max_gradient(&self) -> f64 {
        self.sites.iter().map(|s| max_abs(&s.gradient)).fold(0.0, f64::max)
    }

    pub fn max_invariant_residual(&self) -> f64 {
        self.sites.iter().map(|s| max_abs(&s.invariant_residual)).fold(0.0, f64::max)
    }

    pub fn max_pairing_residual(&self) -> f64 {
        self.sites.iter().map(|s| s.pairing_residual).fold(0.0, f64::max)
    }
}

/// Step of the central differences in [`oracle_compare`].
pub const ORACLE_STEP: f64 = 1e-6;

/// Evaluate both criteria at every site where the invariantized residual is defined.
pub fn oracle_compare(action: &dyn GroupAction, l: &InvariantLagrangian, path: &LatticePath<f64>) -> Result<OracleReport> {
    let inv = invariants_of(action, path)?;
    let residuals = el_residuals(action, l, &inv)?;
    let d = path.dim();
    let m = <f64 as crate::actions::Scalar>::math(action);
    let fw = action.kind().frame_points();
    let mut report = OracleReport::default();
    for (n, r) in residuals {
        let i0 = (n - path.offset()) as usize * d;
        let mut gradient = Vec::with_capacity(d);
        let mut pairing = 0.0f64;
        for c in 0..d {
            let shifted = |h: f64| perturbed::<f64>(path, i0 + c..i0 + c + 1, |_, v| v + h);
            let g = (action_value(action, l, &shifted(ORACLE_STEP)?)? - action_value(action, l, &shifted(-ORACLE_STEP)?)?)
                / (2.0 * ORACLE_STEP);
            let mut vel = vec![0.0; fw * d];
            vel[c] = 1.0;
            let sigma = m.sigma(&frame_at(action, path, n)?, path.window(n, fw)?, &vel)?;
            let paired: f64 = r.iter().zip(&sigma).map(|(a, b)| a * b).sum();
            pairing = pairing.max((g - paired).abs());
            gradient.push(g);
        }
        let vanishes = (max_abs(&gradient) < 1e-7, max_abs(&r) < 1e-7);
        if vanishes.0 != vanishes.1 {
            report.flagged.push(n);
        }
        report.sites.push(OracleSite { site: n, gradient, invariant_residual: r, pairing_residual: pairing });
    }
    Ok(report)
}

/// An extremal invariant sequence together with a path realizing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremal {
    pub inv: InvariantSequence<f64>,
    pub path: LatticePath<f64>,
    pub seed_frame: GroupElement<f64>,
}

/// Forward-step `leading` and integrate the frame from `seed_frame`.
pub fn extremal_from_leading(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    leading: &InvariantSequence<f64>,
    config: &SolveConfig,
    seed_frame: &GroupElement<f64>,
) -> Result<Extremal> {
    let inv = step_el_forward(action, l, leading, config)?;
    let path = path_from_invariants(action, &inv, seed_frame)?;
    Ok(Extremal { inv, path, seed_frame: *seed_frame })
}

/// A random extremal of `l` with `length` invariant sites whose path is
/// nondegenerate and of moderate size.
///
/// Leading data is drawn near constant sequences; for SA(2) near `τ = 3`, where
/// forward stepping of the `L = κ` system stays bounded.
pub fn random_extremal<R: Rng + ?Sized>(kind: ActionKind, l: &InvariantLagrangian, rng: &mut R, length: usize) -> Result<Extremal> {
    let action = kind.strategy();
    let need = el_structure(action, l)?.leading_lengths();
    let config = SolveConfig::with_length(length);
    let mut last = Error::InvalidInput("no attempts".into());
    for _ in 0..200 {
        let (k0, t0) = match kind {
            ActionKind::Sl2Linear => (rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, rng.gen_range(1.0..3.0)),
            ActionKind::Sa2Linear => (rng.gen_range(0.5..2.0), rng.gen_range(2.9..3.1)),
            ActionKind::Sl2Projective => (rng.gen_range(-2.0..-0.2), 0.0),
        };
        let spread = if kind == ActionKind::Sa2Linear { 0.01 } else { 0.05 };
        let mut jitter = |base: f64, n: usize| -> Vec<f64> { (0..n).map(|_| base * (1.0 + rng.gen_range(-spread..spread))).collect() };
        let kappa = jitter(k0, need[0]);
        let tau = need.get(1).map(|&n| jitter(t0, n));
        let leading = InvariantSequence::new(0, kappa, tau);
        let seed = random_element(kind, rng, 1.5);
        match extremal_from_leading(action, l, &leading, &config, &seed).and_then(|e| check_fixture(action, e)) {
            Ok(e) => return Ok(e),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn check_fixture(action: &dyn GroupAction, e: Extremal) -> Result<Extremal> {
    let values = e.inv.kappa.iter().chain(e.inv.tau.iter().flatten());
    if values.clone().any(|x| !(0.05..=20.0).contains(&x.abs())) || max_abs(e.path.flat_points()) > 1e3 {
        return Err(Error::InvalidInput("fixture out of range".into()));
    }
    let inv = invariants_of(action, &e.path)?;
    if inv.max_rel_diff(&e.inv) > 1e-9 {
        return Err(Error::InvalidInput("fixture does not reproduce its invariants".into()));
    }
    let fw = action.kind().frame_points() as i64;
    for k in e.path.offset()..=e.path.end() - fw {
        frame_at(action, &e.path, k)?;
    }
    Ok(e)
}
