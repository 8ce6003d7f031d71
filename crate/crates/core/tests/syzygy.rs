use noether_core::actions::ActionKind;
use noether_core::operators::{curvature_residual, syzygy_residuals, syzygy_residuals_fd};
use noether_core::sampling::random_path;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn syzygy_and_curvature_hold_on_random_paths() {
    for kind in ActionKind::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut worst, mut worst_fd, mut worst_n) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..100 {
            let p = random_path(kind, &mut rng, 9);
            let r = syzygy_residuals(kind.strategy(), &p).unwrap();
            assert!(!r.is_empty());
            worst = r.iter().flat_map(|x| x.1.iter()).fold(worst, |m, v| m.max(v.abs()));
            let fd = syzygy_residuals_fd(kind.strategy(), &p, 1e-5).unwrap();
            worst_fd = fd.iter().flat_map(|x| x.1.iter()).fold(worst_fd, |m, v| m.max(v.abs()));
            worst_n = worst_n.max(curvature_residual(kind.strategy(), &p).unwrap());
        }
        println!("{kind}: syzygy {worst:e}, fd {worst_fd:e}, curvature {worst_n:e}");
        assert!(worst < 1e-9 && worst_n < 1e-9, "{kind}: {worst:e} {worst_n:e}");
        assert!(worst_fd < 1e-5, "{kind}: {worst_fd:e}");
    }
}

#[test]
fn projective_curvature_readings() {
    use noether_core::actions::{projective_curvature, CurvatureVariant};
    use noether_core::operators::curvature_residual_with;
    let action = ActionKind::Sl2Projective.strategy();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let p = random_path(ActionKind::Sl2Projective, &mut rng, 8);
        for (i, v) in [CurvatureVariant::Printed, CurvatureVariant::EntryCorrected, CurvatureVariant::Corrected].into_iter().enumerate() {
            let r = curvature_residual_with(action, &p, &|_, n, s| Ok(projective_curvature(v, &s(n)?))).unwrap();
            worst[i] = worst[i].max(r);
        }
    }
    println!("printed {:e}, entry-corrected {:e}, corrected {:e}", worst[0], worst[1], worst[2]);
    assert!(worst[0] > 1e-3);
    assert!(worst[1] > 1e-3);
    assert!(worst[2] < 1e-9);
}
