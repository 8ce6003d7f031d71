//! Conservation vectors `V(I)`, Noether constants `k = V(I)·Ad(ρ)`, the
//! structure identity `V_{n+1}·Ad(K_n) = V_n`, and first integrals.

use crate::actions::{ActionKind, GroupAction, Scalar};
use crate::error::{Error, Result};
use crate::frames::{frame_at, invariants_of, maurer_cartan, InvariantSequence, LatticePath};
use crate::numeric::{Field, Matrix, RealField};
use crate::operators::build_syzygy;
use crate::variational::{euler_operator, InvariantLagrangian};

/// Boundary coefficients `C^c_j(n)` of `A_H(E(L), σ)`, one list per σ component.
pub fn boundary_coefficients<S: Scalar + RealField>(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    inv: &InvariantSequence<S>,
    n: i64,
) -> Result<Vec<Vec<(i64, S)>>> {
    l.check_action(action)?;
    let h = build_syzygy(action, inv);
    let e = |r: usize, m: i64| Ok(euler_operator(l, inv, m)?[r]);
    h.boundary_coefficients(&e, n)
}

/// `V(n) = Σ_c Σ_j C^c_j(n) Φ₀[c] Ad(K_{n+j-1} ⋯ K_n)`.
pub fn v_of_i<S: Scalar + RealField>(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    inv: &InvariantSequence<S>,
    n: i64,
) -> Result<Vec<S>> {
    let m = S::math(action);
    let coeffs = boundary_coefficients(action, l, inv, n)?;
    let phi = m.characteristics_invariantized();
    let top = coeffs.iter().flat_map(|c| c.iter().map(|t| t.0)).max().unwrap_or(-1);
    let r = action.kind().group_dim();
    let mut transport = vec![Matrix::identity(r)];
    for j in 0..top {
        let ad = m.adjoint_matrix(&maurer_cartan(action, inv, n + j)?)?;
        let next = ad.matmul(transport.last().unwrap());
        transport.push(next);
    }
    let mut v = vec![S::zero(); r];
    for (c, list) in coeffs.iter().enumerate() {
        for &(j, cj) in list {
            let row = Matrix::left_apply(phi.row(c), &transport[j as usize]);
            for (acc, x) in v.iter_mut().zip(row) {
                *acc += cj * x;
            }
        }
    }
    Ok(v)
}

/// Conservation data along a path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationRecord {
    /// First site with a defined `V`.
    pub offset: i64,
    pub v: Vec<Vec<f64>>,
    pub ad_frames: Vec<Matrix<f64>>,
    pub k: Vec<Vec<f64>>,
    /// `max_n ‖k_n - k_{offset}‖∞`.
    pub drift: f64,
}

impl ConservationRecord {
    pub fn sites(&self) -> std::ops::Range<i64> {
        self.offset..self.offset + self.v.len() as i64
    }

    /// The constant at the first site.
    pub fn constant(&self) -> &[f64] {
        &self.k[0]
    }

    pub fn v_at(&self, n: i64) -> Result<&[f64]> {
        usize::try_from(n - self.offset)
            .ok()
            .and_then(|i| self.v.get(i))
            .map(Vec::as_slice)
            .ok_or(Error::WindowOutOfRange { site: n })
    }

    /// Drift relative to `1 + ‖k‖∞`.
    pub fn relative_drift(&self) -> f64 {
        self.drift / (1.0 + self.k[0].iter().fold(0.0f64, |m, x| m.max(x.abs())))
    }
}

/// Conservation vectors of `inv` at every site where they are defined, with their first site.
pub fn v_sequence(
    action: &dyn GroupAction,
    l: &InvariantLagrangian,
    inv: &InvariantSequence<f64>,
) -> Result<(i64, Vec<Vec<f64>>)> {
    let mut start = None;
    let mut out = Vec::new();
    for n in inv.offset..inv.end(0) {
        match v_of_i(action, l, inv, n) {
            Ok(v) => {
                start.get_or_insert(n);
                out.push(v);
            }
            Err(Error::WindowOutOfRange { .. }) if start.is_none() => continue,
            Err(Error::WindowOutOfRange { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let start = start.ok_or(Error::InvalidInput("path too short for the conservation law".into()))?;
    Ok((start, out))
}

/// `k_n = V(n)·Ad(ρ_n)` at every site where both are defined.
pub fn noether_constant(action: &dyn GroupAction, l: &InvariantLagrangian, path: &LatticePath<f64>) -> Result<ConservationRecord> {
    let inv = invariants_of(action, path)?;
    let (start, mut v) = v_sequence(action, l, &inv)?;
    let fw = action.kind().frame_points() as i64;
    v.truncate((path.end() - fw + 1 - start).max(0) as usize);
    if v.is_empty() {
        return Err(Error::InvalidInput("path too short for the conservation law".into()));
    }
    let m = f64::math(action);
    let mut ad_frames = Vec::with_capacity(v.len());
    let mut k = Vec::with_capacity(v.len());
    for (i, vn) in v.iter().enumerate() {
        let ad = m.adjoint_matrix(&frame_at(action, path, start + i as i64)?)?;
        k.push(Matrix::left_apply(vn, &ad));
        ad_frames.push(ad);
    }
    let drift = k.iter().map(|kn| sup_diff(kn, &k[0])).fold(0.0, f64::max);
    Ok(ConservationRecord { offset: start, v, ad_frames, k, drift })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `max_n ‖V_{n+1}·Ad(K_n) - V_n‖∞` for `V` starting at site `offset`.
pub fn structure_check(action: &dyn GroupAction, offset: i64, v: &[Vec<f64>], inv: &InvariantSequence<f64>) -> Result<f64> {
    let m = f64::math(action);
    let mut worst = 0.0f64;
    for (i, w) in v.windows(2).enumerate() {
        let ad = m.adjoint_matrix(&maurer_cartan(action, inv, offset + i as i64)?)?;
        worst = worst.max(sup_diff(&Matrix::left_apply(&w[1], &ad), &w[0]));
    }
    Ok(worst)
}

/// `w₁² + 4w₂w₃` for the SL(2) actions, `w₁w₄w₅ + w₂w₅² - w₃w₄²` for SA(2).
pub fn first_integral<S: Field>(kind: ActionKind, w: &[S]) -> Result<S> {
    if w.len() != kind.group_dim() {
        return Err(Error::DimensionMismatch { expected: kind.group_dim(), found: w.len() });
    }
    Ok(match kind {
        ActionKind::Sa2Linear => w[0] * w[3] * w[4] + w[1] * w[4] * w[4] - w[2] * w[3] * w[3],
        _ => w[0] * w[0] + S::from_f64(4.0) * w[1] * w[2],
    })
}
