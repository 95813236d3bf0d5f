mod common;

use statesum::moves::{Move, MoveKind};
use statesum::statesum::moves_check;

#[test]
fn corrupted_move_is_reported() {
    let b = common::bicat("cyclic:2");
    let start = common::skeleton("s3_2tet");
    let wrong = common::skeleton("s2xs1");
    // a faulty T2 that returns an unrelated skeleton
    let hook = |m: &Move, s| if m.kind() == MoveKind::T2 { wrong.clone() } else { s };
    let rep = moves_check(&b, &start, "s3_2tet", 40, 6, 6, 3, &hook).unwrap();
    assert!(!rep.passed());
    for s in &rep.sequences {
        if let Some(k) = s.failed_at {
            assert_eq!(s.moves[k].kind(), MoveKind::T2);
        }
    }
}

#[test]
fn replay_is_deterministic() {
    let b = common::bicat("cyclic:2");
    let start = common::skeleton("rp3");
    let a = moves_check(&b, &start, "rp3", 30, 6, 6, 12, &|_, s| s).unwrap();
    let c = moves_check(&b, &start, "rp3", 30, 6, 6, 12, &|_, s| s).unwrap();
    assert!(a.passed());
    assert_eq!(a, c);
}
