use lfot::entropy::{entropy_along_transport, entropy_eval, BoxMeasure, EntropyKind};
use lfot::models::Minkowski;
use lfot::potential::Potential;

/// A concave spatial term contracts the transport rays, so `det < 1` and the
/// entropy rises by `-E[log det]`. Expected values are adaptive quadrature of
/// the closed-form Jacobian over the unit square.
#[test]
fn entropy_increase_matches_quadrature() {
    let s = Minkowski::new(2);
    let mu = BoxMeasure::new([0.0, 0.0], [1.0, 1.0]).unwrap();
    let u = Potential::quadratic([-1.0, 0.0], [0.0, -0.4], [0.0, 0.0]);
    let base = entropy_eval(&s, &mu, EntropyKind::Ent, 100_000, 5).unwrap().mean;
    for (t, expected) in [
        (0.25, 0.139_719_779_420_457_27),
        (0.5, 0.304_139_384_495_168_65),
        (1.0, 0.771_120_519_913_158_97),
    ] {
        let ent = entropy_along_transport(&s, &mu, &u, t, EntropyKind::Ent, 0.5, 100_000, 5).unwrap();
        let rise = ent.mean - base;
        assert!(((rise - expected) / expected).abs() < 1e-3, "t = {t}: {rise} vs {expected}");
    }
}
