mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statesum::modsph::Bicat;

/// A random closed word of length k: dart i maps category c_i to c_{i+1}.
fn random_word(b: &Bicat, k: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, i8)> {
    let n = b.cats.len();
    let cats: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
    (0..k)
        .map(|i| {
            let (a, c) = (cats[i], cats[(i + 1) % k]);
            if rng.gen_bool(0.5) {
                let opts = &b.hom[a][c];
                (opts[rng.gen_range(0..opts.len())], 1)
            } else {
                let opts = &b.hom[c][a];
                (opts[rng.gen_range(0..opts.len())], -1)
            }
        })
        .collect()
}

fn s3_table() -> String {
    let perms = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    let rows: Vec<String> = perms
        .iter()
        .map(|a| {
            let row: Vec<String> = perms
                .iter()
                .map(|b| {
                    let ab = [a[b[0]], a[b[1]], a[b[2]]];
                    perms.iter().position(|p| *p == ab).unwrap().to_string()
                })
                .collect();
            format!("[{}]", row.join(","))
        })
        .collect();
    format!("table:[{}]", rows.join(","))
}

fn composite_dim(b: &Bicat, word: &[(usize, i8)]) -> usize {
    let fs: Vec<_> = word
        .iter()
        .map(|&(f, d)| if d > 0 { b.simples[f].functor.clone() } else { b.simples[f].adjoint.clone() })
        .collect();
    let mut comp = fs[0].clone();
    for f in &fs[1..] {
        comp = b.compose(f, &comp).unwrap();
    }
    b.hom_space(&b.identity(fs[0].src), &comp).len()
}

#[test]
fn nat_dimension_matches_hom_space() {
    for (group, words) in
        [("cyclic:2".to_string(), 40), ("cyclic:3".into(), 30), ("product:cyclic:2,cyclic:2".into(), 20), (s3_table(), 20)]
    {
        let b = common::bicat(&group);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..words {
            let k = rng.gen_range(1..=3);
            let word = random_word(&b, k, &mut rng);
            let ns = b.nat_space(&word).unwrap();
            assert_eq!(ns.basis.len(), composite_dim(&b, &word), "{group} {word:?}");
        }
    }
}

#[test]
fn identity_and_adjoint_pairs() {
    for group in ["cyclic:2", "cyclic:3", "product:cyclic:2,cyclic:2"] {
        let b = common::bicat(group);
        for (f, s) in b.simples.iter().enumerate() {
            let c = s.functor.src;
            let ns = b.nat_space(&[(f, 1), (f, -1)]).unwrap();
            assert_eq!(ns.basis.len(), 1, "{group} simple {f}");
            if s.functor.tgt == c {
                let dim = b.hom_space(&b.identity(c), &s.functor).len();
                assert_eq!(b.nat_space(&[(f, 1)]).unwrap().basis.len(), dim);
            }
        }
        for c in 0..b.cats.len() {
            let id = b.identity(c);
            let ids: Vec<usize> =
                b.hom[c][c].iter().copied().filter(|&f| b.hom_space(&id, &b.simples[f].functor).len() == 1).collect();
            assert_eq!(ids.len(), 1, "{group} category {c}");
            assert_eq!(b.nat_space(&[(ids[0], 1)]).unwrap().basis.len(), 1);
        }
    }
}
