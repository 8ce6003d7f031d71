//! Recover a path from solved invariants, its conservation vectors `V`, the
//! Noether constant `k`, and integration constants.

use crate::actions::{ActionKind, GroupAction, GroupElement, Sa2, Sl2};
use crate::conservation::{first_integral, noether_constant, v_sequence};
use crate::error::{Error, Result};
use crate::frames::{frame_at, invariants_of, InvariantSequence, LatticePath};
use crate::numeric::{Field, C64};
use crate::variational::InvariantLagrangian;

/// Imaginary parts allowed in a real reconstruction, relative to `max(1, |re|)`.
pub const IMAGINARY_TOLERANCE: f64 = 1e-9;

/// Relative tolerance on `first_integral(V_n) = first_integral(k)`.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum IntegrationConstants {
    /// Bottom row `(c₀, d₀)` of the SL(2) frame at the first site.
    Sl2 { c0: f64, d0: f64 },
    /// Entry `c₀` of the SA(2) frame at the first site.
    Sa2 { c0: f64 },
    /// Read the constants off a frame at the first site.
    SeedFrame(GroupElement<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionInput {
    pub kind: ActionKind,
    pub inv: InvariantSequence<f64>,
    /// Site of `v[0]`; also the first site of the reconstructed path.
    pub v_offset: i64,
    pub v: Vec<Vec<f64>>,
    pub k: Vec<f64>,
    pub constants: IntegrationConstants,
}

impl ReconstructionInput {
    /// Constants read from an existing path, for roundtrips.
    pub fn from_path(action: &dyn GroupAction, l: &InvariantLagrangian, path: &LatticePath<f64>) -> Result<Self> {
        let rec = noether_constant(action, l, path)?;
        let seed = frame_at(action, path, rec.offset)?;
        Ok(ReconstructionInput {
            kind: action.kind(),
            inv: invariants_of(action, path)?,
            v_offset: rec.offset,
            v: rec.v.clone(),
            k: rec.constant().to_vec(),
            constants: IntegrationConstants::SeedFrame(seed),
        })
    }

    /// Compute `V` from the Lagrangian instead of supplying it.
    pub fn from_invariants(
        action: &dyn GroupAction,
        l: &InvariantLagrangian,
        inv: InvariantSequence<f64>,
        k: Vec<f64>,
        constants: IntegrationConstants,
    ) -> Result<Self> {
        let (v_offset, v) = v_sequence(action, l, &inv)?;
        Ok(ReconstructionInput { kind: action.kind(), inv, v_offset, v, k, constants })
    }

    fn v(&self, n: i64) -> Result<&[f64]> {
        usize::try_from(n - self.v_offset)
            .ok()
            .and_then(|i| self.v.get(i))
            .map(Vec::as_slice)
            .ok_or(Error::WindowOutOfRange { site: n })
    }

    fn check_dims(&self) -> Result<()> {
        let dim = self.kind.group_dim();
        match std::iter::once(&self.k).chain(&self.v).find(|w| w.len() != dim) {
            Some(w) => Err(Error::DimensionMismatch { expected: dim, found: w.len() }),
            None => Ok(()),
        }
    }

    fn check_consistency(&self) -> Result<()> {
        let f = first_integral(self.kind, &self.k)?;
        for (i, v) in self.v.iter().enumerate() {
            let deviation = (first_integral(self.kind, v)? - f).abs() / (1.0 + f.abs());
            if !(deviation <= CONSISTENCY_TOLERANCE) {
                return Err(Error::InconsistentConstants { site: self.v_offset + i as i64, deviation });
            }
        }
        Ok(())
    }

    fn sl2_constants(&self) -> Result<(f64, f64)> {
        match &self.constants {
            IntegrationConstants::Sl2 { c0, d0 } => Ok((*c0, *d0)),
            IntegrationConstants::SeedFrame(GroupElement::Sl2(g)) => Ok((g.c, g.d)),
            _ => Err(Error::KindMismatch { expected: "SL(2) integration constants" }),
        }
    }

    fn sa2_constant(&self) -> Result<f64> {
        match &self.constants {
            IntegrationConstants::Sa2 { c0 } => Ok(*c0),
            IntegrationConstants::SeedFrame(GroupElement::Sa2(g)) => Ok(g.g.c),
            _ => Err(Error::KindMismatch { expected: "SA(2) integration constants" }),
        }
    }
}

/// Group parameters and points produced by a reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub path: LatticePath<f64>,
    /// Reconstructed frame `ρ_j` at each site where `V_j` is available.
    pub frames: Vec<GroupElement<f64>>,
}

/// Dispatch on the input's action.
pub fn reconstruct(input: &ReconstructionInput, length: usize) -> Result<Reconstruction> {
    match input.kind {
        ActionKind::Sl2Linear => reconstruct_sl2_linear(input, length),
        ActionKind::Sa2Linear => reconstruct_sa2(input, length),
        ActionKind::Sl2Projective => reconstruct_sl2_projective(input, length),
    }
}

/// Running product kept as a unit phase and a log-magnitude.
#[derive(Clone, Copy, Debug)]
struct ScaledProduct {
    phase: C64,
    log_mag: f64,
}

impl ScaledProduct {
    fn one() -> Self {
        ScaledProduct { phase: C64::new(1.0, 0.0), log_mag: 0.0 }
    }

    fn mul(&mut self, z: C64) {
        let r = z.norm();
        self.phase *= z / r;
        self.log_mag += r.ln();
    }

    fn value(&self) -> C64 {
        self.phase * self.log_mag.exp()
    }
}

/// `μ = √(k₁² + 4k₂k₃)` and the eigenvector matrix `Q` with its inverse.
fn sl2_eigenbasis(k: &[f64]) -> Result<(C64, [[C64; 2]; 2], [[C64; 2]; 2])> {
    let disc = k[0] * k[0] + 4.0 * k[1] * k[2];
    if (k[2] * disc).is_negligible() {
        return Err(Error::DegenerateConstants("k3*(k1^2+4k2k3) must be nonzero"));
    }
    let mu = C64::new(disc, 0.0).sqrt();
    let k1 = C64::new(k[0], 0.0);
    let k3 = C64::new(k[2], 0.0);
    let two = C64::new(2.0, 0.0);
    let q = [[k1 - mu, k1 + mu], [two * k3, two * k3]];
    let det = -C64::new(4.0, 0.0) * k3 * mu;
    let qi = [[two * k3 / det, -(k1 + mu) / det], [-two * k3 / det, (k1 - mu) / det]];
    Ok((mu, q, qi))
}

/// `Q · diag(p₁, p₂) · Q⁻¹ · (c₀, d₀)`.
fn transport(q: &[[C64; 2]; 2], qi: &[[C64; 2]; 2], p: [C64; 2], c0: C64, d0: C64) -> (C64, C64) {
    let w = [p[0] * (qi[0][0] * c0 + qi[0][1] * d0), p[1] * (qi[1][0] * c0 + qi[1][1] * d0)];
    (q[0][0] * w[0] + q[0][1] * w[1], q[1][0] * w[0] + q[1][1] * w[1])
}

/// `a`, `b` from the linear conservation equations given `c`, `d`.
fn top_row(k: &[f64], v: &[f64], c: f64, d: f64) -> (f64, f64) {
    let a = (c * (k[0] + v[0]) + 2.0 * k[1] * d) / (2.0 * v[1]);
    let b = (2.0 * c * k[2] - (k[0] - v[0]) * d) / (2.0 * v[1]);
    (a, b)
}

fn real(z: C64, site: i64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOLERANCE * z.re.abs().max(1.0) || !z.re.is_finite() {
        return Err(Error::ComplexResidue { site, imag: z.im });
    }
    Ok(z.re)
}

fn nonzero_v2(input: &ReconstructionInput, n: i64) -> Result<f64> {
    let v2 = input.v(n)?[1];
    if v2.is_negligible() {
        return Err(Error::ZeroV2 { site: n });
    }
    Ok(v2)
}

/// Linear SL(2) action: `(c_j, d_j)` by the diagonalized product recurrence,
/// points `(x_j, y_j) = (d_j, -c_j)`.
pub fn reconstruct_sl2_linear(input: &ReconstructionInput, length: usize) -> Result<Reconstruction> {
    require_kind(input, ActionKind::Sl2Linear)?;
    input.check_dims()?;
    let (mu, q, qi) = sl2_eigenbasis(&input.k)?;
    input.check_consistency()?;
    let (c0, d0) = input.sl2_constants()?;
    let (c0, d0) = (C64::new(c0, 0.0), C64::new(d0, 0.0));
    let mut prod = [ScaledProduct::one(); 2];
    let mut pts = Vec::with_capacity(length);
    let mut frames = Vec::with_capacity(length);
    for j in 0..length as i64 {
        let n = input.v_offset + j;
        let (c, d) = transport(&q, &qi, [prod[0].value(), prod[1].value()], c0, d0);
        let (c, d) = (real(c, n)?, real(d, n)?);
        pts.push([d, -c]);
        if let Ok(v) = input.v(n) {
            nonzero_v2(input, n)?;
            let (a, b) = top_row(&input.k, v, c, d);
            frames.push(GroupElement::Sl2(Sl2::new_unchecked(a, b, c, d)));
        }
        if j + 1 < length as i64 {
            let v = input.v(n)?;
            let v2 = nonzero_v2(input, n)?;
            let zeta = C64::new(-input.inv.tau(n)? / (2.0 * v2), 0.0);
            let v1 = C64::new(v[0], 0.0);
            prod[0].mul(zeta * (v1 - mu));
            prod[1].mul(zeta * (v1 + mu));
        }
    }
    Ok(Reconstruction { path: LatticePath::planar(input.v_offset, &pts), frames })
}

/// Projective action: `(c_j, d_j)` by the diagonalized recurrence, `a_j, b_j`
/// from the conservation law, and `x_j = (d_j - 2b_j)/(2a_j - c_j)`.
pub fn reconstruct_sl2_projective(input: &ReconstructionInput, length: usize) -> Result<Reconstruction> {
    require_kind(input, ActionKind::Sl2Projective)?;
    input.check_dims()?;
    let (mu, q, qi) = sl2_eigenbasis(&input.k)?;
    input.check_consistency()?;
    let (c0, d0) = input.sl2_constants()?;
    let (c0, d0) = (C64::new(c0, 0.0), C64::new(d0, 0.0));
    let mut prod = [ScaledProduct::one(); 2];
    let mut xs = Vec::with_capacity(length);
    let mut frames = Vec::with_capacity(length);
    for j in 0..length as i64 {
        let n = input.v_offset + j;
        let (c, d) = transport(&q, &qi, [prod[0].value(), prod[1].value()], c0, d0);
        let (c, d) = (real(c, n)?, real(d, n)?);
        let v = input.v(n)?;
        let v2 = nonzero_v2(input, n)?;
        let (a, b) = top_row(&input.k, v, c, d);
        let den = 2.0 * a - c;
        if den.is_negligible() {
            return Err(Error::ZeroDenominator { site: n });
        }
        xs.push((d - 2.0 * b) / den);
        frames.push(GroupElement::Sl2(Sl2::new_unchecked(a, b, c, d)));
        if j + 1 < length as i64 {
            let kappa = input.inv.kappa(n)?;
            if kappa.is_negligible() || (kappa - 1.0).is_negligible() {
                return Err(Error::DegenerateInvariants { site: n, reason: "kappa must avoid 0 and 1" });
            }
            let s = C64::new((kappa - 1.0) / (4.0 * kappa), 0.0).sqrt();
            let m = C64::new((6.0 * kappa + 2.0) / (kappa - 1.0), 0.0);
            let (v1, v2) = (C64::new(v[0], 0.0), C64::new(2.0 * v2, 0.0));
            let one = C64::new(1.0, 0.0);
            prod[0].mul(s * (one - m * (v1 - mu) / v2));
            prod[1].mul(s * (one - m * (v1 + mu) / v2));
        }
    }
    Ok(Reconstruction { path: LatticePath::scalar(input.v_offset, &xs), frames })
}

/// SA(2): `c_j` by its linear recurrence, the remaining frame entries from the
/// conservation law, points `ρ_j⁻¹·(0, 0)`.
pub fn reconstruct_sa2(input: &ReconstructionInput, length: usize) -> Result<Reconstruction> {
    require_kind(input, ActionKind::Sa2Linear)?;
    input.check_dims()?;
    let k = &input.k;
    let (k1, k2, k3, k4, k5) = (k[0], k[1], k[2], k[3], k[4]);
    if (k4 * k5).is_negligible() {
        return Err(Error::DegenerateConstants("k4*k5 must be nonzero"));
    }
    input.check_consistency()?;
    let mu = k1 * k4 * k5 + k2 * k5 * k5 - k3 * k4 * k4;
    let nu = k2 * k5 * k5 + k3 * k4 * k4 + mu;
    let mut c = input.sa2_constant()?;
    let mut pts = Vec::with_capacity(length);
    let mut frames = Vec::with_capacity(length);
    for j in 0..length as i64 {
        let n = input.v_offset + j;
        let v = input.v(n)?;
        let (v2, v3, v4, v5) = (v[1], v[2], v[3], v[4]);
        if (v4 * v5).is_negligible() {
            return Err(Error::ZeroV45 { site: n });
        }
        let w = v4 * k4;
        let a = -v5 / v4 * c + k4 / v4;
        let b = -v5 * k5 / w * c + (k4 * k5 - v4 * v5) / w;
        let d = k5 / k4 * c + v4 / k4;
        let alpha = mu * v5 / (w * w) * c * c + (nu * v4 * v5 * v5 - 2.0 * mu * k4 * k5 * v5) / (w * w * v5 * k5) * c
            + (k2 * k5 * (v4 * v5).powi(2) - nu * v4 * v5 * k4 + k4 * k4 * k5 * (v3 * v4 * v4 + mu)) / (w * w * v5 * k5);
        let beta = -mu / (k4 * k4 * v4) * c * c - nu / (k4 * k4 * k5) * c + (k4 * k4 * v2 - k2 * v4 * v4) / (k4 * k4 * v4);
        pts.push([-d * alpha + b * beta, c * alpha - a * beta]);
        frames.push(GroupElement::Sa2(Sa2::new(Sl2::new_unchecked(a, b, c, d), alpha, beta)));
        if j + 1 < length as i64 {
            let kappa = input.inv.kappa(n)?;
            c = (kappa * v5 / v4 - 1.0) * c - k4 * kappa / v4;
        }
    }
    Ok(Reconstruction { path: LatticePath::planar(input.v_offset, &pts), frames })
}

fn require_kind(input: &ReconstructionInput, kind: ActionKind) -> Result<()> {
    if input.kind != kind {
        return Err(Error::KindMismatch { expected: kind.tag() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::Sl2;

    fn period_six_input() -> ReconstructionInput {
        ReconstructionInput {
            kind: ActionKind::Sl2Linear,
            inv: InvariantSequence::constant(ActionKind::Sl2Linear, 0, 8, 1.0, 2.0),
            v_offset: 0,
            v: vec![vec![-1.0, 2.0, -0.5]; 8],
            k: vec![-1.0, 2.0, -0.5],
            constants: IntegrationConstants::Sl2 { c0: 0.0, d0: 1.0 },
        }
    }

    #[test]
    fn period_six_from_constants() {
        let r = reconstruct(&period_six_input(), 8).unwrap();
        let expected = [[1.0, 0.0], [0.0, 2.0], [-1.0, 2.0], [-1.0, 0.0], [0.0, -2.0], [1.0, -2.0], [1.0, 0.0], [0.0, 2.0]];
        assert!(r.path.max_abs_diff(&LatticePath::planar(0, &expected)) < 1e-12, "{:?}", r.path);
    }

    #[test]
    fn degenerate_constants_are_named() {
        let mut input = period_six_input();
        input.k = vec![-1.0, 2.0, 0.0];
        input.v = vec![vec![-1.0, 2.0, 0.0]; 8];
        assert_eq!(reconstruct(&input, 4), Err(Error::DegenerateConstants("k3*(k1^2+4k2k3) must be nonzero")));
        let mut input = period_six_input();
        input.v[2] = vec![5.0, 2.0, -0.5];
        assert!(matches!(reconstruct(&input, 4), Err(Error::InconsistentConstants { site: 2, .. })));
    }

    #[test]
    fn seed_frame_constants() {
        let mut input = period_six_input();
        input.constants = IntegrationConstants::SeedFrame(GroupElement::Sl2(Sl2::identity()));
        let r = reconstruct(&input, 3).unwrap();
        assert!((r.path.point(2).unwrap()[0] + 1.0).abs() < 1e-12);
        input.constants = IntegrationConstants::Sa2 { c0: 0.0 };
        assert!(matches!(reconstruct(&input, 3), Err(Error::KindMismatch { .. })));
    }
}
