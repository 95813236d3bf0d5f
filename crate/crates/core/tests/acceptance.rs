//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statesum::fusion::{pointed_category, validate};
use statesum::groups::{module_cat_params, omega_alpha, Cochain, FiniteGroup};
use statesum::modsph::build_modsph;
use statesum::moves::{delta, delta_matches, random_sequence, round_trips, MoveKind};
use statesum::oracle::tv_oracle;
use statesum::scalar::CycScalar;
use statesum::skeleton::dual_skeleton;
use statesum::statesum::{moves_check, Prepared};
use statesum::triangulation::Triangulation;
use std::collections::BTreeMap;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn tv_oracle_match() -> Outcome {
    let t0 = Instant::now();
    let mut n = 0;
    for gs in ["cyclic:2", "cyclic:3", "product:cyclic:2,cyclic:2"] {
        let b = common::bicat(gs);
        let g = FiniteGroup::parse(gs).unwrap();
        for m in ["s3_2tet", "s2xs1", "rp3", "lens:3:1", "t3_6tet"] {
            let tri = Triangulation::load(m).unwrap();
            let sk = dual_skeleton(&tri);
            let got = Prepared::new(&b, &sk).map_err(|e| e.to_string())?.tv().map_err(|e| e.to_string())?.value;
            let want = CycScalar::from_rational(&tv_oracle(&tri, &g), b.conductor);
            if got != want {
                return Err(format!("{gs} on {m}: {got} != {want}"));
            }
            n += 1;
        }
    }
    let el = t0.elapsed();
    if el.as_secs() >= 120 {
        return Err(format!("took {el:?}"));
    }
    Ok(format!("{n} cases in {el:.2?}"))
}

fn skeleton_invariance() -> Outcome {
    let t0 = Instant::now();
    let b = common::bicat("cyclic:2");
    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    let (mut seqs, mut moves) = (0, 0);
    for (m, seed) in [("s3_2tet", 100), ("rp3", 200)] {
        let sk = common::skeleton(m);
        let rep = moves_check(&b, &sk, m, 100, 6, 6, seed, &|_, s| s).map_err(|e| e.to_string())?;
        for s in &rep.sequences {
            if let Some(k) = s.failed_at {
                return Err(format!("{m}: St changed after {:?}", s.moves[k]));
            }
            for mv in &s.moves {
                *kinds.entry(format!("{:?}", mv.kind())).or_default() += 1;
            }
            moves += s.moves.len();
        }
        seqs += rep.sequences.len();
    }
    if kinds.len() < 8 {
        return Err(format!("not every move kind occurred: {kinds:?}"));
    }
    Ok(format!("{seqs} sequences, {moves} moves {kinds:?} in {:.2?}", t0.elapsed()))
}

fn st_equals_tv() -> Outcome {
    let mut lines = Vec::new();
    for gs in ["cyclic:2", "cyclic:3"] {
        let b = common::bicat(gs);
        for m in ["s3_2tet", "s2xs1"] {
            let sk = common::skeleton(m);
            let p = Prepared::new(&b, &sk).map_err(|e| e.to_string())?;
            let parts = p.all_partial_sums().map_err(|e| e.to_string())?;
            if parts.windows(2).any(|w| w[0].1.value != w[1].1.value) {
                return Err(format!("{gs} {m}: partial sums differ"));
            }
            let st = p.st().map_err(|e| e.to_string())?.value;
            let tv = p.tv().map_err(|e| e.to_string())?.value;
            if st != tv {
                return Err(format!("{gs} {m}: St {st} != TV {tv}"));
            }
            lines.push(format!("{gs}/{m}={st} ({} partial sums of {})", parts.len(), parts[0].1.value));
        }
    }
    Ok(lines.join(", "))
}

fn morita() -> Outcome {
    let (ga, wa) = omega_alpha(2, 1).unwrap();
    let ba = build_modsph(&ga, &wa, &module_cat_params(&ga, &wa).unwrap()).map_err(|e| e.to_string())?;
    let bh = common::bicat("heisenberg:2");
    let mut vals = Vec::new();
    for m in ["s3_2tet", "rp3", "lens:4:1"] {
        let sk = common::skeleton(m);
        let x = Prepared::new(&ba, &sk).and_then(|p| p.tv()).map_err(|e| e.to_string())?.value;
        let y = Prepared::new(&bh, &sk).and_then(|p| p.tv()).map_err(|e| e.to_string())?.value;
        if x != y {
            return Err(format!("{m}: {x} != {y}"));
        }
        if !x.is_rational() {
            return Err(format!("{m}: {x} is not rational"));
        }
        vals.push(format!("{m}={x}"));
    }
    Ok(vals.join(", "))
}

fn bicategory_validation() -> Outcome {
    let mut lines = Vec::new();
    for gs in ["cyclic:2", "cyclic:3", "product:cyclic:2,cyclic:2"] {
        let g = FiniteGroup::parse(gs).unwrap();
        let w = Cochain::trivial(g.order(), 3);
        let fr = validate(&pointed_category(&g, &w).map_err(|e| e.to_string())?);
        if !fr.is_ok() {
            return Err(format!("{gs} fusion datum: {:?}", fr.failures));
        }
        let rep = common::bicat(gs).validate(50, 5);
        if !rep.is_ok() {
            return Err(format!("{gs}: {:?}", rep.failures));
        }
        for (name, n) in &rep.checks {
            if ["dominance", "partial traces", "trace multiplicativity"].contains(&name.as_str()) && *n < 50 {
                return Err(format!("{gs}: only {n} {name} samples"));
            }
        }
        lines.push(format!("{gs} {:?}", rep.checks.iter().map(|(k, n)| format!("{k}:{n}")).collect::<Vec<_>>()));
    }
    Ok(lines.join("; "))
}

fn patch_independence() -> Outcome {
    let st = common::patch_and_rotation(&["cyclic:2", "cyclic:3", "product:cyclic:2,cyclic:2"], &["s3_2tet", "rp3", "s2xs1", "t3_6tet"], 23);
    if !st.failures.is_empty() {
        return Err(format!("{} mismatches, first {}", st.failures.len(), st.failures[0]));
    }
    if st.nonzero == 0 {
        return Err("no nonzero evaluations exercised".into());
    }
    Ok(format!("{} labeled graphs, {} nonzero", st.graphs, st.nonzero))
}

fn move_bookkeeping() -> Outcome {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for m in ["s3_2tet", "rp3", "s2xs1"] {
        let start = common::skeleton(m);
        for _ in 0..60 {
            let mut prev = start.clone();
            for (mv, next) in random_sequence(&start, 5, &MoveKind::ALL, 8, &mut rng) {
                let d = delta(&prev, &next);
                if !delta_matches(mv.kind(), d) {
                    return Err(format!("{m}: {mv:?} changed counts by {d:?}"));
                }
                if !round_trips(&prev, &next, mv.kind()) {
                    return Err(format!("{m}: {mv:?} has no inverse back to an isomorphic skeleton"));
                }
                *counts.entry(format!("{:?}", mv.kind())).or_default() += 1;
                prev = next;
            }
        }
    }
    if counts.len() < 8 {
        return Err(format!("not every move kind occurred: {counts:?}"));
    }
    Ok(format!("{counts:?}"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 TV equals homomorphism count", tv_oracle_match),
        ("2 St invariant under move sequences", skeleton_invariance),
        ("3 St equals TV, partial sums equal", st_equals_tv),
        ("4 Morita pair agrees, rational values", morita),
        ("5 bicategory datum validation", bicategory_validation),
        ("6 sphere-graph patch and rotation independence", patch_independence),
        ("7 move deltas and round trips", move_bookkeeping),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
