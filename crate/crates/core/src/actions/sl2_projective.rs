use super::{expect_sl2, guard, sl2_adjoint, ActionKind, ActionMath, GroupAction, GroupElement, Sl2, Stencil};
use crate::error::{Error, Result};
use crate::frames::InvariantSequence;
use crate::numeric::{Field, Matrix};

/// SL(2) acting on the line by Möbius transformations. The invariant is the
/// cross ratio of four consecutive points; the frame sends `x₀, x₁, x₂` to
/// `1/2, 0, -1/2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sl2Projective;

/// Readings of the curvature matrix in terms of `σ_j = ρ₀·x_j'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureVariant {
    /// Lower-left entry `2σ₀ - 4σ₁ + 2σ₁`, diagonal `±(σ₁ - σ₀)/2`.
    Printed,
    /// Lower-left entry repaired to `2σ₀ - 4σ₁ + 2σ₂`, diagonal as printed.
    EntryCorrected,
    /// Lower-left `2σ₀ - 4σ₁ + 2σ₂` and diagonal `±(σ₂ - σ₀)/2`.
    Corrected,
}

/// Curvature matrix from `σ₀, σ₁, σ₂` under one of the readings.
pub fn projective_curvature<S: Field>(variant: CurvatureVariant, s: &[S]) -> Matrix<S> {
    let half = S::from_f64(0.5);
    let (two, four) = (S::from_f64(2.0), S::from_f64(4.0));
    let (s0, s1, s2) = (s[0], s[1], s[2]);
    let (diag_hi, lower) = match variant {
        CurvatureVariant::Printed => (s1, two * s0 - four * s1 + two * s1),
        CurvatureVariant::EntryCorrected => (s1, two * s0 - four * s1 + two * s2),
        CurvatureVariant::Corrected => (s2, two * s0 - four * s1 + two * s2),
    };
    Matrix::from_rows(&[[half * diag_hi - half * s0, -s1], [lower, half * s0 - half * diag_hi]])
}

impl<S: Field> ActionMath<S> for Sl2Projective {
    fn act(&self, g: &GroupElement<S>, p: &[S]) -> Result<Vec<S>> {
        let g = expect_sl2(g)?;
        let den = guard(g.c * p[0] + g.d).map_err(|_| Error::ProjectivePole)?;
        Ok(vec![(g.a * p[0] + g.b) / den])
    }

    fn act_velocity(&self, g: &GroupElement<S>, p: &[S], v: &[S]) -> Result<Vec<S>> {
        let g = expect_sl2(g)?;
        let den = guard(g.c * p[0] + g.d).map_err(|_| Error::ProjectivePole)?;
        Ok(vec![v[0] / (den * den)])
    }

    fn adjoint_matrix(&self, g: &GroupElement<S>) -> Result<Matrix<S>> {
        Ok(sl2_adjoint(expect_sl2(g)?))
    }

    fn characteristics(&self, p: &[S]) -> Matrix<S> {
        let x = p[0];
        Matrix::from_rows(&[[S::from_f64(2.0) * x, S::one(), -x * x]])
    }

    fn characteristics_invariantized(&self) -> Matrix<S> {
        Matrix::from_f64_rows(&[[1.0, 1.0, -0.25]])
    }

    fn normalization_point(&self) -> Vec<S> {
        vec![S::from_f64(0.5)]
    }

    fn frame(&self, site: i64, w: &[S]) -> Result<GroupElement<S>> {
        let (x0, x1, x2) = (w[0], w[1], w[2]);
        let window = |e: Error| e.at_window(site);
        let (d01, d12, d02) = (guard(x0 - x1).map_err(window)?, guard(x1 - x2).map_err(window)?, guard(x0 - x2).map_err(window)?);
        let s = (d02 / (d01 * d12)).sqrt().map_err(window)?;
        let two = S::from_f64(2.0);
        let half = S::from_f64(0.5);
        let c = s * (x2 - two * x1 + x0) / d02;
        let d = s * (x0 * x1 - two * x0 * x2 + x1 * x2) / d02;
        Ok(GroupElement::Sl2(Sl2::new_unchecked(s * half, -s * x1 * half, c, d)))
    }

    fn kappa(&self, site: i64, w: &[S]) -> Result<S> {
        let (x0, x1, x2, x3) = (w[0], w[1], w[2], w[3]);
        ((x0 - x1) * (x2 - x3)).checked_div((x0 - x3) * (x2 - x1)).map_err(|e| e.at_window(site))
    }

    fn tau(&self, site: i64, _w: &[S]) -> Result<S> {
        Err(Error::DegenerateInvariants { site, reason: "the projective action has no tau" })
    }

    fn maurer_cartan(&self, site: i64, kappa: S, _tau: Option<S>) -> Result<GroupElement<S>> {
        let one = S::one();
        let km1 = guard(kappa - one).map_err(|e| e.at_invariants(site, "kappa = 1"))?;
        let k4 = guard(S::from_f64(4.0) * kappa).map_err(|e| e.at_invariants(site, "kappa = 0"))?;
        let s = (km1 / k4).sqrt().map_err(|e| e.at_invariants(site, "kappa in (0, 1)"))?;
        let m = (S::from_f64(6.0) * kappa + S::from_f64(2.0)) / km1;
        Ok(GroupElement::Sl2(Sl2::new_unchecked(s, s * S::from_f64(0.5), -s * m, s)))
    }

    fn sigma(&self, frame: &GroupElement<S>, w: &[S], v: &[S]) -> Result<Vec<S>> {
        (0..3).map(|j| Ok(self.act_velocity(frame, &w[j..j + 1], &v[j..j + 1])?[0])).collect()
    }

    fn syzygy_stencil(&self, inv: &InvariantSequence<S>, n: i64) -> Result<Stencil<S>> {
        let (k, k1, k2) = (inv.kappa(n)?, inv.kappa(n + 1)?, inv.kappa(n + 2)?);
        let one = S::one();
        let degenerate = |e: Error| e.at_invariants(n, "kappa_1, kappa_2 or kappa_1 - 1 = 0");
        let alpha = (k * (k - one) * k1 * (k2 - one)).checked_div(k2 * (k1 - one)).map_err(degenerate)?;
        let beta = (k * (k1 - one)).checked_div(k1).map_err(degenerate)?;
        let gamma = -(k - one);
        let delta = -k * (k - one);
        Ok(vec![vec![vec![(0, delta), (1, gamma), (2, beta), (3, alpha)]]])
    }

    fn curvature(
        &self,
        _inv: &InvariantSequence<S>,
        n: i64,
        sigma: &dyn Fn(i64) -> Result<Vec<S>>,
    ) -> Result<Matrix<S>> {
        Ok(projective_curvature(CurvatureVariant::Corrected, &sigma(n)?))
    }
}

impl GroupAction for Sl2Projective {
    fn kind(&self) -> ActionKind {
        ActionKind::Sl2Projective
    }

    fn syzygy_shifts(&self) -> Vec<Vec<Vec<i64>>> {
        vec![vec![vec![0, 1, 2, 3]]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m() -> &'static dyn ActionMath<f64> {
        &Sl2Projective
    }

    #[test]
    fn mobius_fixtures() {
        let g = GroupElement::Sl2(Sl2::new(1.0, 1.0, 0.0, 1.0).unwrap());
        assert_eq!(m().act(&g, &[2.0]).unwrap(), vec![3.0]);
        assert_eq!(m().act_velocity(&g, &[2.0], &[1.0]).unwrap(), vec![1.0]);
        let pole = GroupElement::Sl2(Sl2::new(0.0, -1.0, 1.0, 0.0).unwrap());
        assert!(matches!(m().act(&pole, &[0.0]), Err(Error::ProjectivePole)));
    }

    #[test]
    fn characteristics_fixture() {
        assert_eq!(m().characteristics(&[3.0]), Matrix::from_rows(&[[6.0, 1.0, -9.0]]));
    }

    #[test]
    fn maurer_cartan_fixture() {
        let k = m().maurer_cartan(0, -1.0 / 3.0, None).unwrap();
        assert!(k.matrix().max_abs_diff(&Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]])) < 1e-15);
        assert!(m().maurer_cartan(0, 1.0, None).is_err());
        assert!(m().maurer_cartan(0, 0.5, None).is_err());
    }

    #[test]
    fn stencil_at_constant_kappa() {
        let inv = InvariantSequence::new(0, vec![2.0; 3], None);
        let st = m().syzygy_stencil(&inv, 0).unwrap();
        assert_eq!(st[0][0], vec![(0, -2.0), (1, -1.0), (2, 1.0), (3, 2.0)]);
    }
}
