use super::{expect_sl2, guard, sl2_adjoint, ActionKind, ActionMath, GroupAction, GroupElement, Sl2, Stencil};
use crate::error::{Error, Result};
use crate::frames::InvariantSequence;
use crate::numeric::{Field, Matrix};

/// SL(2) acting linearly on the plane. Invariants: `τ = x₀y₁ - x₁y₀` and
/// `κ = (x₀y₂ - x₂y₀)/(x₁y₂ - x₂y₁)`; frame normalization `(x₀,y₀) ↦ (1,0)`, `x₁ ↦ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sl2Linear;

impl<S: Field> ActionMath<S> for Sl2Linear {
    fn act(&self, g: &GroupElement<S>, p: &[S]) -> Result<Vec<S>> {
        let (x, y) = expect_sl2(g)?.apply(p[0], p[1]);
        Ok(vec![x, y])
    }

    fn act_velocity(&self, g: &GroupElement<S>, _p: &[S], v: &[S]) -> Result<Vec<S>> {
        self.act(g, v)
    }

    fn adjoint_matrix(&self, g: &GroupElement<S>) -> Result<Matrix<S>> {
        Ok(sl2_adjoint(expect_sl2(g)?))
    }

    fn characteristics(&self, p: &[S]) -> Matrix<S> {
        let (x, y, z) = (p[0], p[1], S::zero());
        Matrix::from_rows(&[[x, y, z], [-y, z, x]])
    }

    fn characteristics_invariantized(&self) -> Matrix<S> {
        Matrix::from_f64_rows(&[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    }

    fn normalization_point(&self) -> Vec<S> {
        vec![S::one(), S::zero()]
    }

    fn frame(&self, site: i64, w: &[S]) -> Result<GroupElement<S>> {
        let (x0, y0, x1, y1) = (w[0], w[1], w[2], w[3]);
        let tau = guard(x0 * y1 - x1 * y0).map_err(|e| e.at_window(site))?;
        Ok(GroupElement::Sl2(Sl2::new_unchecked(y1 / tau, -x1 / tau, -y0, x0)))
    }

    fn kappa(&self, site: i64, w: &[S]) -> Result<S> {
        let (x0, y0, x1, y1, x2, y2) = (w[0], w[1], w[2], w[3], w[4], w[5]);
        (x0 * y2 - x2 * y0).checked_div(x1 * y2 - x2 * y1).map_err(|e| e.at_window(site))
    }

    fn tau(&self, _site: i64, w: &[S]) -> Result<S> {
        Ok(w[0] * w[3] - w[2] * w[1])
    }

    fn maurer_cartan(&self, site: i64, kappa: S, tau: Option<S>) -> Result<GroupElement<S>> {
        let tau = tau.ok_or(Error::DegenerateInvariants { site, reason: "tau missing" })?;
        let inv_tau = tau.recip().map_err(|e| e.at_invariants(site, "tau = 0"))?;
        Ok(GroupElement::Sl2(Sl2::new_unchecked(kappa, inv_tau, -tau, S::zero())))
    }

    fn sigma(&self, frame: &GroupElement<S>, _w: &[S], v: &[S]) -> Result<Vec<S>> {
        self.act(frame, &v[..2])
    }

    fn syzygy_stencil(&self, inv: &InvariantSequence<S>, n: i64) -> Result<Stencil<S>> {
        let (k, t, t1) = (inv.kappa(n)?, inv.tau(n)?, inv.tau(n + 1)?);
        let inv_t = t.recip().map_err(|e| e.at_invariants(n, "tau = 0"))?;
        let t_over_t1sq = t.checked_div(t1 * t1).map_err(|e| e.at_invariants(n + 1, "tau = 0"))?;
        Ok(vec![
            vec![vec![(0, k), (1, -k)], vec![(0, inv_t), (2, -t_over_t1sq)]],
            vec![vec![(0, t), (1, t)], vec![(1, k)]],
        ])
    }

    fn curvature(
        &self,
        inv: &InvariantSequence<S>,
        n: i64,
        sigma: &dyn Fn(i64) -> Result<Vec<S>>,
    ) -> Result<Matrix<S>> {
        let s0 = sigma(n)?;
        let s1 = sigma(n + 1)?;
        let t = inv.tau(n)?;
        let upper = s1[1].checked_div(t * t).map_err(|e| e.at_invariants(n, "tau = 0"))?;
        Ok(Matrix::from_rows(&[[-s0[0], upper], [-s0[1], s0[0]]]))
    }
}

impl GroupAction for Sl2Linear {
    fn kind(&self) -> ActionKind {
        ActionKind::Sl2Linear
    }

    fn syzygy_shifts(&self) -> Vec<Vec<Vec<i64>>> {
        vec![vec![vec![0, 1], vec![0, 2]], vec![vec![0, 1], vec![1]]]
    }
}
