use noether_core::sampling::extremal_family as family;
use noether_core::actions::ActionKind;
use noether_core::conservation::{first_integral, noether_constant, structure_check, v_sequence};
use noether_core::frames::invariants_of;
use noether_core::solver::random_extremal;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn constants_are_conserved_on_extremals() {
    for kind in ActionKind::ALL {
        let action = kind.strategy();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let (mut drift, mut structure, mut fi, mut count) = (0.0f64, 0.0f64, 0.0f64, 0);
        for l in family(kind) {
            for _ in 0..24 / family(kind).len() {
                let e = random_extremal(kind, &l, &mut rng, 14).unwrap_or_else(|err| panic!("{kind} {l:?}: {err}"));
                let rec = noether_constant(action, &l, &e.path).unwrap();
                drift = drift.max(rec.relative_drift());
                let inv = invariants_of(action, &e.path).unwrap();
                let (o, v) = v_sequence(action, &l, &inv).unwrap();
                structure = structure.max(structure_check(action, o, &v, &inv).unwrap());
                let f0 = first_integral(kind, rec.constant()).unwrap();
                for w in rec.v.iter().chain(&rec.k) {
                    fi = fi.max((first_integral(kind, w).unwrap() - f0).abs() / (1.0 + f0.abs()));
                }
                count += 1;
            }
        }
        println!("{kind}: {count} extremals, drift {drift:e}, structure {structure:e}, first integral {fi:e}");
        assert!(drift < 1e-8 && structure < 1e-8 && fi < 1e-8);
    }
}
