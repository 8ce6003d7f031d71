//! Random nondegenerate paths for property checks.

use rand::Rng;

use crate::actions::ActionKind;
use crate::frames::{frame_at, invariants_of, LatticePath};
use crate::variational::{InvariantLagrangian, Monomial};

/// A random path of `len` points with velocities in `[-1, 1]`.
///
/// Planar actions draw points from `[-2, 2]²` and reject windows whose
/// invariants are small or large; projective paths are strictly decreasing.
pub fn random_path<R: Rng + ?Sized>(kind: ActionKind, rng: &mut R, len: usize) -> LatticePath<f64> {
    loop {
        let pts: Vec<f64> = match kind {
            ActionKind::Sl2Projective => {
                let mut x = rng.gen_range(-1.0..1.0);
                (0..len)
                    .map(|_| {
                        let out = x;
                        x -= rng.gen_range(0.2..1.0);
                        out
                    })
                    .collect()
            }
            _ => (0..len * 2).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        };
        let vel: Vec<f64> = (0..pts.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dim = kind.point_dim();
        let rows: Vec<&[f64]> = pts.chunks(dim).collect();
        let path = LatticePath::new(0, dim, &rows).unwrap().with_flat_velocities(vel).unwrap();
        if well_conditioned(kind, &path) {
            return path;
        }
    }
}

fn well_conditioned(kind: ActionKind, path: &LatticePath<f64>) -> bool {
    let action = kind.strategy();
    let Ok(inv) = invariants_of(action, path) else { return false };
    let in_band = |x: &f64| (0.1..=10.0).contains(&x.abs());
    let ok = match kind {
        ActionKind::Sl2Projective => inv.kappa.iter().all(|k| in_band(k) && (k - 1.0).abs() > 0.1),
        _ => inv.kappa.iter().chain(inv.tau.iter().flatten()).all(in_band),
    };
    let fw = kind.frame_points() as i64;
    ok && (path.offset()..=path.end() - fw).all(|k| frame_at(action, path, k).is_ok())
}

/// Five polynomial Lagrangians used by pairing checks. The projective action
/// has no `τ`, so a shifted `κ` takes its place.
pub fn lagrangian_family(kind: ActionKind) -> Vec<InvariantLagrangian> {
    let planar = kind != ActionKind::Sl2Projective;
    let with_tau = |m: Monomial, shift, e| if planar { m.tau(shift, e) } else { m.kappa(shift + 1, e) };
    vec![
        InvariantLagrangian::kappa(),
        InvariantLagrangian::polynomial(vec![Monomial::new(1.0).kappa(0, 2)]),
        InvariantLagrangian::polynomial(vec![Monomial::new(1.0).kappa(0, 1).kappa(1, 1)]),
        InvariantLagrangian::polynomial(vec![with_tau(Monomial::new(0.5), 0, 2), Monomial::new(-1.0).kappa(0, 1)]),
        InvariantLagrangian::polynomial(vec![with_tau(Monomial::new(1.0).kappa(1, 1), 1, 1), Monomial::new(0.25).kappa(0, 3)]),
    ]
}

/// Lagrangians whose forward-stepped extremals stay bounded over 14 sites.
pub fn extremal_family(kind: ActionKind) -> Vec<InvariantLagrangian> {
    let m = Monomial::new;
    match kind {
        ActionKind::Sl2Linear => vec![
            InvariantLagrangian::kappa(),
            InvariantLagrangian::polynomial(vec![m(1.0).kappa(0, 1), m(0.1).kappa(0, 2)]),
            InvariantLagrangian::polynomial(vec![m(1.0).kappa(0, 1), m(0.01).tau(0, 2)]),
        ],
        ActionKind::Sa2Linear => vec![InvariantLagrangian::kappa()],
        ActionKind::Sl2Projective => vec![
            InvariantLagrangian::kappa(),
            InvariantLagrangian::polynomial(vec![m(1.0).kappa(0, 1), m(0.1).kappa(0, 2)]),
            InvariantLagrangian::polynomial(vec![m(1.0).kappa(0, 1).kappa(1, 1)]),
        ],
    }
}

/// Zero every velocity outside points `lo..hi`.
pub fn localize_velocities(path: &LatticePath<f64>, lo: usize, hi: usize) -> LatticePath<f64> {
    let d = path.dim();
    let v: Vec<f64> = match path.flat_velocities() {
        Some(v) => v.iter().enumerate().map(|(i, &x)| if (lo * d..hi * d).contains(&i) { x } else { 0.0 }).collect(),
        None => vec![0.0; path.flat_points().len()],
    };
    path.clone().with_flat_velocities(v).expect("velocity shape matches points")
}
