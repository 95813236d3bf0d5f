use statesum::groups::{module_cat_params, Cochain, FiniteGroup};
use statesum::modsph::build_modsph;
use statesum::oracle::tv_oracle;
use statesum::scalar::CycScalar;
use statesum::skeleton::dual_skeleton;
use statesum::statesum::tv_invariant;
use statesum::triangulation::Triangulation;
use std::time::Instant;

#[test]
fn tv_matches_hom_count() {
    for gs in ["cyclic:2", "cyclic:3", "product:cyclic:2,cyclic:2"] {
        let g = FiniteGroup::parse(gs).unwrap();
        let w = Cochain::trivial(g.order(), 3);
        let b = build_modsph(&g, &w, &module_cat_params(&g, &w).unwrap()).unwrap();
        for m in ["s3_2tet", "s3_1tet", "s2xs1", "rp3", "lens:3:1", "t3_6tet"] {
            let t0 = Instant::now();
            let tri = Triangulation::load(&format!("builtin:{m}")).unwrap();
            let sk = dual_skeleton(&tri);
            let tv = tv_invariant(&b, &sk).unwrap();
            let want = CycScalar::from_rational(&tv_oracle(&tri, &g), b.conductor);
            eprintln!("{gs} {m}: {} vs {} ({:?}, {} labelings)", tv.value, want, t0.elapsed(), tv.labelings);
            assert_eq!(tv.value, want, "{gs} {m}");
        }
    }
}

#[test]
fn st_partial_sums() {
    use statesum::statesum::Prepared;
    for gs in ["cyclic:2", "cyclic:3"] {
        let g = FiniteGroup::parse(gs).unwrap();
        let w = Cochain::trivial(g.order(), 3);
        let b = build_modsph(&g, &w, &module_cat_params(&g, &w).unwrap()).unwrap();
        for m in ["s3_2tet", "s2xs1", "rp3"] {
            let tri = Triangulation::load(&format!("builtin:{m}")).unwrap();
            let sk = dual_skeleton(&tri);
            let p = Prepared::new(&b, &sk).unwrap();
            for (phi3, s) in p.all_partial_sums().unwrap() {
                eprintln!("{gs} {m} {phi3:?}: {} ({})", s.value, s.labelings);
            }
            let st = p.st().unwrap();
            let tv = p.tv().unwrap();
            eprintln!("{gs} {m}: st {} tv {}", st.value, tv.value);
            assert_eq!(st.value, tv.value);
        }
    }
}

#[test]
fn morita_n2() {
    use statesum::groups::omega_alpha;
    let t0 = Instant::now();
    let (g, w) = omega_alpha(2, 1).unwrap();
    let b1 = build_modsph(&g, &w, &module_cat_params(&g, &w).unwrap()).unwrap();
    eprintln!("built twisted: {} cats {:?}", b1.cats.len(), t0.elapsed());
    let h = FiniteGroup::parse("heisenberg:2").unwrap();
    let wh = Cochain::trivial(8, 3);
    let b2 = build_modsph(&h, &wh, &module_cat_params(&h, &wh).unwrap()).unwrap();
    eprintln!("built heis: {} cats {:?}", b2.cats.len(), t0.elapsed());
    for m in ["s3_2tet", "rp3", "lens:4:1"] {
        let tri = Triangulation::load(&format!("builtin:{m}")).unwrap();
        let sk = dual_skeleton(&tri);
        let a = tv_invariant(&b1, &sk).unwrap();
        let c = tv_invariant(&b2, &sk).unwrap();
        eprintln!("{m}: {} vs {} oracle {} ({:?})", a.value, c.value, tv_oracle(&tri, &h), t0.elapsed());
        assert_eq!(a.value.lift(b2.conductor.max(b1.conductor)), c.value.lift(b2.conductor.max(b1.conductor)));
    }
}

#[test]
fn validate_every_datum() {
    use statesum::groups::omega_alpha;
    for gs in ["cyclic:2", "cyclic:3", "product:cyclic:2,cyclic:2", "heisenberg:2", "alpha"] {
        let t0 = Instant::now();
        let (g, w) = if gs == "alpha" { omega_alpha(2, 1).unwrap() } else { let g = FiniteGroup::parse(gs).unwrap(); let w = Cochain::trivial(g.order(), 3); (g, w) };
        let b = build_modsph(&g, &w, &module_cat_params(&g, &w).unwrap()).unwrap();
        let r = b.validate(50, 7);
        eprintln!("{gs}: {:?} {:?} {:?}", r.checks, r.failures, t0.elapsed());
        assert!(r.is_ok());
    }
}

#[test]
fn moves_preserve_st() {
    use statesum::statesum::moves_check;
    let g = FiniteGroup::parse("cyclic:2").unwrap();
    let w = Cochain::trivial(2, 3);
    let b = build_modsph(&g, &w, &module_cat_params(&g, &w).unwrap()).unwrap();
    for m in ["s3_2tet", "rp3"] {
        let t0 = Instant::now();
        let sk = dual_skeleton(&Triangulation::load(m).unwrap());
        let r = moves_check(&b, &sk, m, 50, 6, 6, 1, &|_, s| s).unwrap();
        let n: usize = r.sequences.iter().map(|s| s.moves.len()).sum();
        eprintln!("{m}: passed {} moves {n} {:?}", r.passed(), t0.elapsed());
        for s in &r.sequences { if s.failed_at.is_some() { eprintln!("{:?}", s); } }
        assert!(r.passed());
    }
}

#[test]
fn cache_prefactor_basis_and_edge_orientation() {
    use statesum::statesum::Prepared;
    for gs in ["cyclic:2", "cyclic:3"] {
        let g = FiniteGroup::parse(gs).unwrap();
        let w = Cochain::trivial(g.order(), 3);
        let b = build_modsph(&g, &w, &module_cat_params(&g, &w).unwrap()).unwrap();
        for m in ["s3_2tet", "rp3", "s2xs1"] {
            let sk = dual_skeleton(&Triangulation::load(m).unwrap());
            let base = Prepared::new(&b, &sk).unwrap();
            let v = base.st().unwrap().value;
            let misses = base.caches.hits.lock().unwrap().1;
            assert_eq!(base.st().unwrap().value, v);
            assert_eq!(base.caches.hits.lock().unwrap().1, misses, "second run misses");
            let mut pc = Prepared::new(&b, &sk).unwrap();
            pc.per_cell = true;
            assert_eq!(pc.st().unwrap().value, v, "per cell");
            for seed in 1..3 {
                let mut sc = Prepared::new(&b, &sk).unwrap();
                sc.scramble = Some(seed);
                assert_eq!(sc.st().unwrap().value, v, "scrambled");
            }
            for e in 0..sk.edges.len() {
                let r = sk.reverse_edge(e);
                r.validate().unwrap();
                assert_eq!(Prepared::new(&b, &r).unwrap().st().unwrap().value, v, "reversed {e}");
            }
        }
    }
}
