use statesum::moves::{delta, round_trips, valid_sites, MoveKind};
use statesum::skeleton::dual_skeleton;
use statesum::triangulation::builtin;

#[test]
fn every_site_has_expected_delta_and_inverts() {
    for name in ["s3_2tet", "rp3", "s2xs1"] {
        let s = dual_skeleton(&builtin(name).unwrap());
        for kind in [MoveKind::T0, MoveKind::T1, MoveKind::T2, MoveKind::T3] {
            let sites = valid_sites(&s, kind);
            assert!(!sites.is_empty(), "{name} {kind:?}");
            for (m, t) in &sites {
                let d = delta(&s, t);
                let ok = match kind {
                    MoveKind::T0 => d == [1, 1, 2, 1],
                    MoveKind::T1 => d == [0, 1, 0, 0] || d == [0, 1, 1, 0],
                    MoveKind::T2 => d == [-1, -1, 0, 0],
                    _ => d == [0, 1, 1, 0],
                };
                assert!(ok, "{name} {m:?} delta {d:?}");
                assert!(round_trips(&s, t, kind), "{name} {m:?} does not invert");
                // and the forward move undoes the inverse
                for (_, back) in valid_sites(t, kind.inverse()) {
                    if back.isomorphic(&s) {
                        assert!(round_trips(t, &back, kind.inverse()), "{name} {m:?} forward from inverse");
                        break;
                    }
                }
            }
            eprintln!("{name} {kind:?}: {} sites", sites.len());
        }
    }
}
