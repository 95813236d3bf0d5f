#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statesum::groups::{module_cat_params, Cochain, FiniteGroup};
use statesum::modsph::{build_modsph, rotate_vector, Bicat, Entry};
use statesum::skeleton::{dual_skeleton, Skeleton, SphereGraph};
use statesum::statesum::edge_theta;
use statesum::triangulation::Triangulation;

pub fn bicat(group: &str) -> Bicat {
    let g = FiniteGroup::parse(group).unwrap();
    let w = Cochain::trivial(g.order(), 3);
    build_modsph(&g, &w, &module_cat_params(&g, &w).unwrap()).unwrap()
}

pub fn skeleton(name: &str) -> Skeleton {
    dual_skeleton(&Triangulation::load(name).unwrap())
}

/// Random consistent labels on a sphere graph: a category per patch and a
/// simple per strand, plus a basis Nat vector at every node.
pub fn random_labels(b: &Bicat, g: &SphereGraph, rng: &mut ChaCha8Rng) -> Option<(Vec<usize>, Vec<Vec<Entry>>)> {
    let faces = g.faces();
    let cat: Vec<usize> = (0..faces.walks.len()).map(|_| rng.gen_range(0..b.cats.len())).collect();
    let func: Vec<usize> = (0..g.strands.len())
        .map(|s| {
            let opts = &b.hom[cat[faces.of_dart[2 * s]]][cat[faces.of_dart[2 * s + 1]]];
            opts[rng.gen_range(0..opts.len())]
        })
        .collect();
    let mut vecs = Vec::new();
    for nd in &g.nodes {
        let word: Vec<(usize, i8)> = nd.darts.iter().map(|&(s, e)| (func[s], if e == 1 { 1 } else { -1 })).collect();
        let ns = b.nat_space(&word).unwrap();
        if ns.basis.is_empty() {
            return None;
        }
        vecs.push(ns.basis[rng.gen_range(0..ns.basis.len())].clone());
    }
    Some((func, vecs))
}

#[derive(Debug, Default)]
pub struct PatchStats {
    pub graphs: usize,
    pub nonzero: usize,
    pub failures: Vec<String>,
}

/// Evaluate link and theta graphs of the given skeletons under every
/// puncture and every rotation of every node.
pub fn patch_and_rotation(groups: &[&str], manifolds: &[&str], seed: u64) -> PatchStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = PatchStats::default();
    for gs in groups {
        let b = bicat(gs);
        for m in manifolds {
            let sk = skeleton(m);
            let mut graphs: Vec<SphereGraph> = sk.links.clone();
            graphs.extend((0..sk.edges.len()).map(|e| edge_theta(&sk, e)));
            for gr in &graphs {
                let npatch = gr.faces().walks.len();
                let mut found = 0;
                for _ in 0..40 {
                    let Some((func, vecs)) = random_labels(&b, gr, &mut rng) else { continue };
                    let refs: Vec<&[Entry]> = vecs.iter().map(|v| v.as_slice()).collect();
                    let base = b.evaluate_graph(gr, &func, &refs).unwrap();
                    for p in 1..npatch {
                        if b.evaluate_graph_from(gr, &func, &refs, p).unwrap() != base {
                            st.failures.push(format!("{gs} {m}: patch {p}"));
                        }
                    }
                    for n in 0..gr.nodes.len() {
                        for r in 1..gr.nodes[n].darts.len() {
                            let mut h = gr.clone();
                            h.nodes[n].darts.rotate_left(r);
                            let rv = rotate_vector(&vecs[n], r);
                            let mut refs2 = refs.clone();
                            refs2[n] = &rv;
                            for p in 0..npatch {
                                if b.evaluate_graph_from(&h, &func, &refs2, p).unwrap() != base {
                                    st.failures.push(format!("{gs} {m}: node {n} rotated by {r}, patch {p}"));
                                }
                            }
                        }
                    }
                    st.graphs += 1;
                    if !base.is_zero() {
                        st.nonzero += 1;
                    }
                    found += 1;
                    if found == 4 {
                        break;
                    }
                }
            }
        }
    }
    st
}
