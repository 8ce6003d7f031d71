use noether_core::actions::ActionKind;
use noether_core::sampling::{lagrangian_family, localize_velocities as localize, random_path};
use noether_core::variational::{pairing_check, InvariantLagrangian};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn pairing_identity_on_random_paths() {
    for kind in ActionKind::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ls = lagrangian_family(kind);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let p = localize(&random_path(kind, &mut rng, 20), 8, 12);
            for l in &ls {
                let r = pairing_check(kind.strategy(), l, &p).unwrap();
                worst = worst.max(r.deviation / (1.0 + r.lhs.abs()));
            }
        }
        println!("{kind}: {worst:e}");
        assert!(worst < 1e-9, "{kind}: {worst:e}");
    }
}

#[test]
fn zero_velocity_pairs_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = localize(&random_path(ActionKind::Sa2Linear, &mut rng, 14), 0, 0);
    let r = pairing_check(ActionKind::Sa2Linear.strategy(), &InvariantLagrangian::kappa(), &p).unwrap();
    assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
}
