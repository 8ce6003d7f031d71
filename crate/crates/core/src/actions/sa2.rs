use super::{expect_sa2, guard, sl2_adjoint, ActionKind, ActionMath, GroupAction, GroupElement, Sa2, Sl2, Stencil};
use crate::error::{Error, Result};
use crate::frames::InvariantSequence;
use crate::numeric::{Field, Matrix};

/// Equi-affine action of SA(2) = SL(2) ⋉ R² on the plane.
///
/// κ is twice the signed area of three consecutive points; τ is the ratio of
/// the areas `(p₀,p₁,p₃)` and `(p₁,p₂,p₃)`. Frame normalization: `p₀ ↦ (0,0)`,
/// `p₁ ↦ (1,0)`, `x₂ ↦ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sa2Linear;

/// Signed doubled area of a triangle. Differences come first: the expanded
/// form cancels badly for points far from the origin.
fn area<S: Field>(x0: S, y0: S, x1: S, y1: S, x2: S, y2: S) -> S {
    (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
}

/// Inverse of the linear part of the Maurer-Cartan element at `(κ, τ)`.
fn mc_linear_inverse<S: Field>(kappa: S, tau: S) -> Result<Sl2<S>> {
    let one = S::one();
    Ok(Sl2::new_unchecked(-one, -(one + tau).checked_div(kappa)?, kappa, tau))
}

impl<S: Field> ActionMath<S> for Sa2Linear {
    fn act(&self, g: &GroupElement<S>, p: &[S]) -> Result<Vec<S>> {
        let g = expect_sa2(g)?;
        let (x, y) = g.g.apply(p[0], p[1]);
        Ok(vec![x + g.alpha, y + g.beta])
    }

    fn act_velocity(&self, g: &GroupElement<S>, _p: &[S], v: &[S]) -> Result<Vec<S>> {
        let (x, y) = expect_sa2(g)?.g.apply(v[0], v[1]);
        Ok(vec![x, y])
    }

    fn adjoint_matrix(&self, g: &GroupElement<S>) -> Result<Matrix<S>> {
        let Sa2 { g, alpha, beta } = *expect_sa2(g)?;
        let Sl2 { a, b, c, d } = g;
        let lin = sl2_adjoint(&g);
        let two = S::from_f64(2.0);
        let mut m = Matrix::zeros(5, 5);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = lin[(i, j)];
            }
        }
        let ad_bc = a * d + b * c;
        let rows = [
            [-alpha * ad_bc + two * a * b * beta, a * (c * alpha - a * beta), b * (b * beta - d * alpha), a, b],
            [beta * ad_bc - two * c * d * alpha, c * (c * alpha - a * beta), d * (b * beta - d * alpha), c, d],
        ];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(3 + i, j)] = v;
            }
        }
        Ok(m)
    }

    fn characteristics(&self, p: &[S]) -> Matrix<S> {
        let (x, y, z, o) = (p[0], p[1], S::zero(), S::one());
        Matrix::from_rows(&[[x, y, z, o, z], [-y, z, x, z, o]])
    }

    fn characteristics_invariantized(&self) -> Matrix<S> {
        Matrix::from_f64_rows(&[[0.0, 0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 0.0, 1.0]])
    }

    fn normalization_point(&self) -> Vec<S> {
        vec![S::zero(), S::zero()]
    }

    fn frame(&self, site: i64, w: &[S]) -> Result<GroupElement<S>> {
        let (x0, y0, x1, y1, x2, y2) = (w[0], w[1], w[2], w[3], w[4], w[5]);
        let k = guard(area(x0, y0, x1, y1, x2, y2)).map_err(|e| e.at_window(site))?;
        let g = Sl2::new_unchecked((y2 - y0) / k, (x0 - x2) / k, y0 - y1, x1 - x0);
        Ok(GroupElement::Sa2(Sa2::new(g, (x2 * y0 - x0 * y2) / k, x0 * y1 - x1 * y0)))
    }

    fn kappa(&self, _site: i64, w: &[S]) -> Result<S> {
        Ok(area(w[0], w[1], w[2], w[3], w[4], w[5]))
    }

    fn tau(&self, site: i64, w: &[S]) -> Result<S> {
        let (x0, y0, x1, y1, x2, y2, x3, y3) = (w[0], w[1], w[2], w[3], w[4], w[5], w[6], w[7]);
        let num = area(x0, y0, x1, y1, x3, y3);
        let den = area(x1, y1, x2, y2, x3, y3);
        num.checked_div(den).map_err(|e| e.at_window(site))
    }

    fn maurer_cartan(&self, site: i64, kappa: S, tau: Option<S>) -> Result<GroupElement<S>> {
        let tau = tau.ok_or(Error::DegenerateInvariants { site, reason: "tau missing" })?;
        let one = S::one();
        let b = (one + tau).checked_div(kappa).map_err(|e| e.at_invariants(site, "kappa = 0"))?;
        let g = Sl2::new_unchecked(tau, b, -kappa, -one);
        Ok(GroupElement::Sa2(Sa2::new(g, -tau, kappa)))
    }

    fn sigma(&self, frame: &GroupElement<S>, w: &[S], v: &[S]) -> Result<Vec<S>> {
        self.act_velocity(frame, &w[..2], &v[..2])
    }

    fn syzygy_stencil(&self, inv: &InvariantSequence<S>, n: i64) -> Result<Stencil<S>> {
        let (k, k1, k2) = (inv.kappa(n)?, inv.kappa(n + 1)?, inv.kappa(n + 2)?);
        let (t, t1, t2) = (inv.tau(n)?, inv.tau(n + 1)?, inv.tau(n + 2)?);
        let one = S::one();
        let degenerate = |e: Error| e.at_invariants(n, "kappa, kappa_1 or kappa_2 = 0");
        let k_over_k1 = k.checked_div(k1).map_err(degenerate)?;
        let k_over_k1sq = k_over_k1.checked_div(k1).map_err(degenerate)?;
        let inv_k = k.recip().map_err(degenerate)?;
        let inv_k2 = k2.recip().map_err(degenerate)?;
        Ok(vec![
            vec![
                vec![(0, -k), (1, -k), (2, t * k1 - k)],
                vec![(0, -one), (1, -(one + t)), (2, t * t1 - k_over_k1 * (one + t1))],
            ],
            vec![
                vec![(0, -t), (1, one + t - k_over_k1), (2, t), (3, -k_over_k1sq * (k2 * (one + t1) - k1))],
                vec![
                    (0, -(one + t) * inv_k),
                    (2, t * (one + t1) / k1),
                    (3, -k_over_k1sq * inv_k2 * (k2 * t2 * (one + t1) - k1 * (one + t2))),
                ],
            ],
        ])
    }

    fn curvature(
        &self,
        inv: &InvariantSequence<S>,
        n: i64,
        sigma: &dyn Fn(i64) -> Result<Vec<S>>,
    ) -> Result<Matrix<S>> {
        let (s0, s1, s2) = (sigma(n)?, sigma(n + 1)?, sigma(n + 2)?);
        let (k, t) = (inv.kappa(n)?, inv.tau(n)?);
        let degenerate = |e: Error| e.at_invariants(n, "kappa = 0");
        let k0_inv = mc_linear_inverse(k, t).map_err(degenerate)?;
        let k1_inv = mc_linear_inverse(inv.kappa(n + 1)?, inv.tau(n + 1)?).map_err(degenerate)?;
        let (i1x, i1y) = k0_inv.apply(s1[0], s1[1]);
        let (i2x, _) = k0_inv.compose(&k1_inv).apply(s2[0], s2[1]);
        let (sx, sy, z) = (s0[0], s0[1], S::zero());
        let top = (sx - i2x).checked_div(k).map_err(degenerate)?;
        Ok(Matrix::from_rows(&[[sx - i1x, top, -sx], [sy - i1y, i1x - sx, -sy], [z, z, z]]))
    }
}

impl GroupAction for Sa2Linear {
    fn kind(&self) -> ActionKind {
        ActionKind::Sa2Linear
    }

    fn syzygy_shifts(&self) -> Vec<Vec<Vec<i64>>> {
        vec![vec![vec![0, 1, 2], vec![0, 1, 2]], vec![vec![0, 1, 2, 3], vec![0, 2, 3]]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::random_element;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m() -> &'static dyn ActionMath<f64> {
        &Sa2Linear
    }

    #[test]
    fn translation_fixtures() {
        let t = GroupElement::Sa2(Sa2::new(Sl2::identity(), 1.0, -1.0));
        assert_eq!(m().act(&t, &[0.0, 0.0]).unwrap(), vec![1.0, -1.0]);
        let t = GroupElement::Sa2(Sa2::new(Sl2::identity(), 5.0, 5.0));
        assert_eq!(m().act_velocity(&t, &[3.0, 4.0], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn adjoint_of_pure_translation() {
        let t = GroupElement::Sa2(Sa2::new(Sl2::identity(), 1.0, 0.0));
        let expected = Matrix::from_rows(&[
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 0.0, 1.0],
        ]);
        assert_eq!(m().adjoint_matrix(&t).unwrap(), expected);
    }

    /// Block factorization: translation block times `diag(Ad(g), g)`.
    #[test]
    fn adjoint_factors_into_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let GroupElement::Sa2(e) = random_element(ActionKind::Sa2Linear, &mut rng, 2.0) else { unreachable!() };
            let mut lower = Matrix::<f64>::identity(5);
            let (al, be) = (e.alpha, e.beta);
            let m_block = [[-al, -be, 0.0], [be, 0.0, -al]];
            for i in 0..2 {
                for j in 0..3 {
                    lower[(3 + i, j)] = m_block[i][j];
                }
            }
            let mut diag = Matrix::<f64>::zeros(5, 5);
            let lin = sl2_adjoint(&e.g);
            for i in 0..3 {
                for j in 0..3 {
                    diag[(i, j)] = lin[(i, j)];
                }
            }
            diag[(3, 3)] = e.g.a;
            diag[(3, 4)] = e.g.b;
            diag[(4, 3)] = e.g.c;
            diag[(4, 4)] = e.g.d;
            let ad = m().adjoint_matrix(&GroupElement::Sa2(e)).unwrap();
            assert!(ad.max_abs_diff(&(&lower * &diag)) < 1e-12);
        }
    }

    #[test]
    fn characteristics_at_origin() {
        let c = m().characteristics(&[0.0, 0.0]);
        assert_eq!(c, Matrix::from_f64_rows(&[[0.0, 0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 0.0, 1.0]]));
    }

    #[test]
    fn maurer_cartan_fixture() {
        let k = m().maurer_cartan(0, 1.0, Some(1.0)).unwrap();
        let expected = Matrix::from_rows(&[[1.0, 2.0, -1.0], [-1.0, -1.0, 1.0], [0.0, 0.0, 1.0]]);
        assert_eq!(k.matrix(), expected);
        assert_eq!(k.det(), 1.0);
    }
}
