//! State sums over labeled skeletons.
//!
//! A labeling puts a module category on every 3-cell and a simple functor
//! on every region. Each vertex link is evaluated as a graph on the sphere
//! with Nat-space basis vectors at its nodes; each edge contributes the
//! inverse of the pairing between the bases at its two ends.

use crate::linalg::Mat;
use crate::modsph::{Bicat, Entry, ModsphError, NatSpace};
use crate::moves::{random_sequence, Move, MoveKind};
use crate::scalar::CycScalar;
use crate::skeleton::{LinkNode, Skeleton, SphereGraph, Strand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StateSumError {
    #[error(transparent)]
    Modsph(#[from] ModsphError),
    #[error("invalid skeleton: {0}")]
    Skeleton(String),
    #[error("bad labeling: {0}")]
    Labeling(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumResult {
    pub value: CycScalar,
    pub labelings: u64,
}

/// Memoized Nat spaces, vertex evaluations and edge pairings.
#[derive(Default)]
pub struct Caches {
    nat: Mutex<HashMap<Vec<(usize, i8)>, Arc<NatSpace>>>,
    vertex: Mutex<HashMap<(usize, Vec<usize>), Arc<Vec<(Vec<usize>, CycScalar)>>>>,
    edge: Mutex<HashMap<(usize, Vec<usize>), Arc<Mat>>>,
    pub hits: Mutex<(u64, u64)>,
}

fn cached<K: std::hash::Hash + Eq + Clone, V>(
    m: &Mutex<HashMap<K, Arc<V>>>,
    stats: &Mutex<(u64, u64)>,
    k: &K,
    f: impl FnOnce() -> Result<V, StateSumError>,
) -> Result<Arc<V>, StateSumError> {
    if let Some(v) = m.lock().unwrap().get(k) {
        stats.lock().unwrap().0 += 1;
        return Ok(v.clone());
    }
    stats.lock().unwrap().1 += 1;
    let v = Arc::new(f()?);
    m.lock().unwrap().insert(k.clone(), v.clone());
    Ok(v)
}

/// The theta graph pairing the two ends of edge `e`. Strand i carries the
/// label of dart i at the end-0 node; node 0 is end 0.
pub fn edge_theta(sk: &Skeleton, e: usize) -> SphereGraph {
    let edge = &sk.edges[e];
    let (v0, n0) = edge.ends[0];
    let da = &sk.links[v0].nodes[n0].darts;
    let k = da.len();
    let mut strands = Vec::with_capacity(k);
    let mut bdarts = vec![(0, 0); k];
    for (i, &(_, ei)) in da.iter().enumerate() {
        let mut ends = [0; 2];
        ends[ei] = 0;
        ends[1 - ei] = 1;
        strands.push(Strand { region: 0, ends });
        bdarts[edge.corr[i]] = (i, 1 - ei);
    }
    SphereGraph {
        nodes: vec![
            LinkNode { edge: 0, side: 0, darts: da.iter().enumerate().map(|(i, &(_, ei))| (i, ei)).collect() },
            LinkNode { edge: 0, side: 1, darts: bdarts },
        ],
        strands,
    }
}

/// Skeleton plus the bookkeeping the enumeration needs.
pub struct Prepared<'a> {
    pub b: &'a Bicat,
    pub sk: &'a Skeleton,
    order: Vec<usize>,
    /// nodes completed once the region at each order position is labeled
    completes: Vec<Vec<(usize, usize)>>,
    pub caches: Caches,
    /// weight 3-cells one at a time instead of the uniform prefactor
    pub per_cell: bool,
    /// replace every Nat-space basis by a seeded random change of basis
    pub scramble: Option<u64>,
}

impl<'a> Prepared<'a> {
    pub fn new(b: &'a Bicat, sk: &'a Skeleton) -> Result<Self, StateSumError> {
        sk.validate().map_err(|e| StateSumError::Skeleton(e.to_string()))?;
        // regions vertex by vertex so that links complete early
        let mut pos = vec![usize::MAX; sk.regions.len()];
        let mut order = Vec::new();
        for l in &sk.links {
            for st in &l.strands {
                if pos[st.region] == usize::MAX {
                    pos[st.region] = order.len();
                    order.push(st.region);
                }
            }
        }
        let mut completes = vec![Vec::new(); order.len()];
        for (v, l) in sk.links.iter().enumerate() {
            for (n, node) in l.nodes.iter().enumerate() {
                let last = node.darts.iter().map(|&(s, _)| pos[l.strands[s].region]).max().unwrap();
                completes[last].push((v, n));
            }
        }
        Ok(Prepared { b, sk, order, completes, caches: Caches::default(), per_cell: false, scramble: None })
    }

    fn word(&self, v: usize, n: usize, phi2: &[usize]) -> Vec<(usize, i8)> {
        let l = &self.sk.links[v];
        l.nodes[n].darts.iter().map(|&(s, e)| (phi2[l.strands[s].region], if e == 1 { 1 } else { -1 })).collect()
    }

    fn nat(&self, word: Vec<(usize, i8)>) -> Result<Arc<NatSpace>, StateSumError> {
        cached(&self.caches.nat, &self.caches.hits, &word, || {
            let ns = self.b.nat_space(&word)?;
            Ok(match self.scramble {
                Some(seed) => scramble(ns, seed),
                None => ns,
            })
        })
    }

    /// Vertex tensor: nonzero values over basis choices at the link's nodes.
    fn vertex_eval(&self, v: usize, phi2: &[usize]) -> Result<Arc<Vec<(Vec<usize>, CycScalar)>>, StateSumError> {
        let l = &self.sk.links[v];
        let labels: Vec<usize> = l.strands.iter().map(|s| phi2[s.region]).collect();
        cached(&self.caches.vertex, &self.caches.hits, &(v, labels.clone()), || {
            let spaces: Vec<Arc<NatSpace>> = (0..l.nodes.len()).map(|n| self.nat(self.word(v, n, phi2))).collect::<Result<_, _>>()?;
            let mut out = Vec::new();
            let mut choice = vec![0usize; spaces.len()];
            if spaces.iter().any(|s| s.basis.is_empty()) {
                return Ok(out);
            }
            loop {
                let vecs: Vec<&[Entry]> = choice.iter().zip(&spaces).map(|(&i, s)| s.basis[i].as_slice()).collect();
                let val = self.b.evaluate_graph(l, &labels, &vecs)?;
                if !val.is_zero() {
                    out.push((choice.clone(), val));
                }
                let mut k = 0;
                while k < choice.len() {
                    choice[k] += 1;
                    if choice[k] < spaces[k].basis.len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == choice.len() {
                    break;
                }
            }
            Ok(out)
        })
    }

    /// Inverse of the pairing between the Nat-space bases at the two ends of
    /// an edge, indexed [end-1 basis][end-0 basis].
    fn edge_inverse(&self, e: usize, phi2: &[usize]) -> Result<Arc<Mat>, StateSumError> {
        let edge = &self.sk.edges[e];
        let [(v0, n0), (v1, n1)] = edge.ends;
        let la = &self.sk.links[v0];
        let da = &la.nodes[n0].darts;
        let labels: Vec<usize> = da.iter().map(|&(s, _)| phi2[la.strands[s].region]).collect();
        cached(&self.caches.edge, &self.caches.hits, &(e, labels.clone()), || {
            let sa = self.nat(self.word(v0, n0, phi2))?;
            let sb = self.nat(self.word(v1, n1, phi2))?;
            let theta = edge_theta(self.sk, e);
            let (na, nb) = (sa.basis.len(), sb.basis.len());
            if na != nb {
                return Err(StateSumError::Labeling(format!("edge {e}: Nat spaces of dimensions {na} and {nb}")));
            }
            let mut gram = Mat::zeros(na, nb, self.b.conductor);
            for i in 0..na {
                for j in 0..nb {
                    gram[(i, j)] = self.b.evaluate_graph(&theta, &labels, &[&sa.basis[i], &sb.basis[j]])?;
                }
            }
            let inv = gram.inverse().ok_or_else(|| StateSumError::Labeling(format!("edge {e}: degenerate pairing")))?;
            Ok(inv)
        })
    }

    /// ω2 · tr_φ for a complete labeling.
    pub fn term(&self, phi2: &[usize]) -> Result<CycScalar, StateSumError> {
        let b = self.b;
        let mut w = b.one();
        for (r, reg) in self.sk.regions.iter().enumerate() {
            if reg.chi != 0 {
                w = &w * &b.simples[phi2[r]].dim.pow(reg.chi);
            }
        }
        let ev: Vec<_> = (0..self.sk.links.len()).map(|v| self.vertex_eval(v, phi2)).collect::<Result<_, _>>()?;
        let gi: Vec<_> = (0..self.sk.edges.len()).map(|e| self.edge_inverse(e, phi2)).collect::<Result<_, _>>()?;
        // edges checked once both of their ends are assigned
        let mut closes = vec![Vec::new(); self.sk.links.len()];
        for (e, ed) in self.sk.edges.iter().enumerate() {
            closes[ed.ends[0].0.max(ed.ends[1].0)].push(e);
        }
        let mut assigned: Vec<Vec<usize>> = self.sk.links.iter().map(|l| vec![usize::MAX; l.nodes.len()]).collect();
        let mut total = b.zero();
        self.trace_dfs(0, &ev, &gi, &closes, &mut assigned, b.one(), &mut total);
        Ok(&w * &total)
    }

    #[allow(clippy::too_many_arguments)]
    fn trace_dfs(
        &self,
        v: usize,
        ev: &[Arc<Vec<(Vec<usize>, CycScalar)>>],
        gi: &[Arc<Mat>],
        closes: &[Vec<usize>],
        assigned: &mut Vec<Vec<usize>>,
        acc: CycScalar,
        total: &mut CycScalar,
    ) {
        if v == ev.len() {
            *total += &acc;
            return;
        }
        'entries: for (choice, val) in ev[v].iter() {
            assigned[v].clone_from(choice);
            let mut a = &acc * val;
            for &e in &closes[v] {
                let [(v0, n0), (v1, n1)] = self.sk.edges[e].ends;
                let x = &gi[e][(assigned[v1][n1], assigned[v0][n0])];
                if x.is_zero() {
                    continue 'entries;
                }
                a = &a * x;
            }
            self.trace_dfs(v + 1, ev, gi, closes, assigned, a, total);
        }
        assigned[v].iter_mut().for_each(|x| *x = usize::MAX);
    }

    fn enumerate(&self, phi3: &[usize], pos: usize, phi2: &mut Vec<usize>, out: &mut SumResult) -> Result<(), StateSumError> {
        if pos == self.order.len() {
            let t = self.term(phi2)?;
            out.value += &t;
            out.labelings += 1;
            return Ok(());
        }
        let r = self.order[pos];
        let reg = self.sk.regions[r];
        for &f in &self.b.hom[phi3[reg.left]][phi3[reg.right]] {
            phi2[r] = f;
            let mut alive = true;
            for &(v, n) in &self.completes[pos] {
                if self.nat(self.word(v, n, phi2))?.basis.is_empty() {
                    alive = false;
                    break;
                }
            }
            if alive {
                self.enumerate(phi3, pos + 1, phi2, out)?;
            }
        }
        phi2[r] = usize::MAX;
        Ok(())
    }

    /// Σ_{φ2} ω2 · tr_φ with the 3-cell labels fixed.
    pub fn partial_sum(&self, phi3: &[usize]) -> Result<SumResult, StateSumError> {
        if phi3.len() != self.sk.cells || phi3.iter().any(|&c| c >= self.b.cats.len()) {
            return Err(StateSumError::Labeling("3-cell labels do not match the skeleton".into()));
        }
        let zero = SumResult { value: self.b.zero(), labelings: 0 };
        if self.order.is_empty() {
            return Ok(zero);
        }
        let r0 = self.order[0];
        let reg = self.sk.regions[r0];
        let firsts = self.b.hom[phi3[reg.left]][phi3[reg.right]].clone();
        let parts: Vec<SumResult> = firsts
            .par_iter()
            .map(|&f| {
                let mut phi2 = vec![usize::MAX; self.sk.regions.len()];
                phi2[r0] = f;
                let mut out = SumResult { value: self.b.zero(), labelings: 0 };
                for &(v, n) in &self.completes[0] {
                    if self.nat(self.word(v, n, &phi2))?.basis.is_empty() {
                        return Ok(out);
                    }
                }
                self.enumerate(phi3, 1, &mut phi2, &mut out)?;
                Ok(out)
            })
            .collect::<Result<_, StateSumError>>()?;
        Ok(parts.into_iter().fold(zero, |a, p| SumResult { value: &a.value + &p.value, labelings: a.labelings + p.labelings }))
    }

    /// All 3-cell labelings with their partial sums.
    pub fn all_partial_sums(&self) -> Result<Vec<(Vec<usize>, SumResult)>, StateSumError> {
        let nc = self.b.cats.len();
        let cells = self.sk.cells;
        let total = nc.checked_pow(cells as u32).ok_or_else(|| StateSumError::Labeling("too many 3-cell labelings".into()))?;
        (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut phi3 = vec![0; cells];
                for c in phi3.iter_mut() {
                    *c = idx % nc;
                    idx /= nc;
                }
                let r = self.partial_sum(&phi3)?;
                Ok((phi3, r))
            })
            .collect()
    }

    /// The bicategorical state sum (|G| · #objects)^(−cells) Σ_φ ω2 tr_φ.
    pub fn st(&self) -> Result<SumResult, StateSumError> {
        let parts = self.all_partial_sums()?;
        let b = self.b;
        let mut acc = SumResult { value: b.zero(), labelings: 0 };
        if self.per_cell {
            let mut value = b.zero();
            for (phi3, p) in parts {
                let mut w = p.value;
                for &c in &phi3 {
                    w = &w * &self.cell_weight(c);
                }
                value += &w;
                acc.labelings += p.labelings;
            }
            return Ok(SumResult { value, labelings: acc.labelings });
        }
        for (_, p) in parts {
            acc.value += &p.value;
            acc.labelings += p.labelings;
        }
        let norm = CycScalar::from_int((b.order() * b.cats.len()) as i64, b.conductor).pow(-(self.sk.cells as i64));
        Ok(SumResult { value: &acc.value * &norm, labelings: acc.labelings })
    }

    /// (dim of the dual category · number of reachable objects)^(−1) for a
    /// 3-cell labeled `c`.
    fn cell_weight(&self, c: usize) -> CycScalar {
        let b = self.b;
        let mut dim = b.zero();
        for &i in &b.hom[c][c] {
            dim += &(&b.simples[i].dim * &b.simples[i].dim);
        }
        let reach = b.hom[c].iter().filter(|h| !h.is_empty()).count() as i64;
        (&dim * &CycScalar::from_int(reach, b.conductor)).pow(-1)
    }

    /// Turaev-Viro: |G|^(−cells) times the partial sum with every 3-cell on the
    /// regular module category.
    pub fn tv(&self) -> Result<SumResult, StateSumError> {
        let b = self.b;
        let reg = b.cats.iter().position(|c| c.params.subgroup.order() == 1).ok_or_else(|| StateSumError::Labeling("no regular module category".into()))?;
        let p = self.partial_sum(&vec![reg; self.sk.cells])?;
        let norm = CycScalar::from_int(b.order() as i64, b.conductor).pow(-(self.sk.cells as i64));
        Ok(SumResult { value: &p.value * &norm, labelings: p.labelings })
    }
}

/// Replace the basis by T·basis with T unit lower triangular times a
/// nonzero diagonal, both drawn from a seed and the word.
fn scramble(ns: NatSpace, seed: u64) -> NatSpace {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    ns.word.hash(&mut h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h.finish());
    let n = ns.basis.len();
    let mut basis = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc: HashMap<(Vec<usize>, Vec<usize>), CycScalar> = HashMap::new();
        for j in 0..=i {
            let c = if j == i { rng.gen_range(1..=3) } else { rng.gen_range(-2..=2) };
            if c == 0 {
                continue;
            }
            for e in &ns.basis[j] {
                let v = &e.val * &CycScalar::from_int(c, e.val.conductor());
                let slot = acc.entry((e.ys.clone(), e.idx.clone())).or_insert_with(|| CycScalar::zero(e.val.conductor()));
                *slot += &v;
            }
        }
        let mut entries: Vec<Entry> = acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((ys, idx), val)| Entry { ys, idx, val }).collect();
        entries.sort_by(|a, b| (&a.ys, &a.idx).cmp(&(&b.ys, &b.idx)));
        basis.push(entries);
    }
    NatSpace { word: ns.word, basis }
}

pub fn st_invariant(b: &Bicat, sk: &Skeleton) -> Result<SumResult, StateSumError> {
    Prepared::new(b, sk)?.st()
}

pub fn tv_invariant(b: &Bicat, sk: &Skeleton) -> Result<SumResult, StateSumError> {
    Prepared::new(b, sk)?.tv()
}

pub fn partial_sum(b: &Bicat, sk: &Skeleton, phi3: &[usize]) -> Result<SumResult, StateSumError> {
    Prepared::new(b, sk)?.partial_sum(phi3)
}

/// Outcome of one random move sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SequenceReport {
    pub moves: Vec<Move>,
    /// first move after which St changed
    pub failed_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MovesReport {
    pub start: String,
    pub sequences: Vec<SequenceReport>,
}

impl MovesReport {
    pub fn passed(&self) -> bool {
        self.sequences.iter().all(|s| s.failed_at.is_none())
    }
}

/// Recompute St after every move of `count` seeded random sequences.
/// `hook` post-processes each move result; tests use it to inject faults.
#[allow(clippy::too_many_arguments)]
pub fn moves_check(
    b: &Bicat,
    start: &Skeleton,
    name: &str,
    count: usize,
    max_len: usize,
    max_cells: usize,
    seed: u64,
    hook: &(dyn Fn(&Move, Skeleton) -> Skeleton + Sync),
) -> Result<MovesReport, StateSumError> {
    let base = st_invariant(b, start)?.value;
    let sequences = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let len = rng.gen_range(1..=max_len);
            let seq = random_sequence(start, len, &MoveKind::ALL, max_cells, &mut rng);
            let mut rep = SequenceReport { moves: Vec::new(), failed_at: None };
            for (k, (m, sk)) in seq.into_iter().enumerate() {
                let sk = hook(&m, sk);
                rep.moves.push(m);
                if st_invariant(b, &sk)?.value != base {
                    rep.failed_at = Some(k);
                    break;
                }
            }
            Ok(rep)
        })
        .collect::<Result<_, StateSumError>>()?;
    Ok(MovesReport { start: name.to_string(), sequences })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{module_cat_params, Cochain, FiniteGroup};
    use crate::modsph::build_modsph;
    use crate::skeleton::dual_skeleton;
    use crate::triangulation::builtin;

    fn bicat(desc: &str) -> Bicat {
        let g = FiniteGroup::parse(desc).unwrap();
        let w = Cochain::trivial(g.order(), 3);
        build_modsph(&g, &w, &module_cat_params(&g, &w).unwrap()).unwrap()
    }

    #[test]
    fn tv_z2_small() {
        let b = bicat("cyclic:2");
        let l = b.conductor;
        for (name, num, den) in [("s3_2tet", 1, 2), ("rp3", 1, 1), ("s2xs1", 1, 1)] {
            let sk = dual_skeleton(&builtin(name).unwrap());
            let tv = tv_invariant(&b, &sk).unwrap();
            assert_eq!(tv.value, CycScalar::from_ratio(num, den, l), "{name}");
        }
    }
}
