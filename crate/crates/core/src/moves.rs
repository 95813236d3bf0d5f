//! Local moves on skeletons and their inverses.
//!
//! Every move is a pure function `Skeleton -> Skeleton`; a site that does
//! not satisfy the move's preconditions yields `MoveError::NotApplicable`.

use crate::skeleton::{Edge, LinkNode, Region, Skeleton, SphereGraph, Strand};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("move not applicable: {0}")]
    NotApplicable(String),
}

fn na<T>(msg: impl Into<String>) -> Result<T, MoveError> {
    Err(MoveError::NotApplicable(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    T0,
    T0Inv,
    T1,
    T1Inv,
    T2,
    T2Inv,
    T3,
    T3Inv,
}

impl MoveKind {
    pub const ALL: [MoveKind; 8] =
        [MoveKind::T0, MoveKind::T0Inv, MoveKind::T1, MoveKind::T1Inv, MoveKind::T2, MoveKind::T2Inv, MoveKind::T3, MoveKind::T3Inv];

    pub fn inverse(self) -> MoveKind {
        use MoveKind::*;
        match self {
            T0 => T0Inv,
            T0Inv => T0,
            T1 => T1Inv,
            T1Inv => T1,
            T2 => T2Inv,
            T2Inv => T2,
            T3 => T3Inv,
            T3Inv => T3,
        }
    }
}

/// A move together with its site. Corners are (vertex, strand); darts are
/// (strand, end) in the link of `vertex`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    T0 { region: usize },
    T0Inv { vertex: usize },
    T1 { a: (usize, usize), b: (usize, usize) },
    T1Inv { edge: usize },
    T2 { edge: usize },
    T2Inv { vertex: usize, side: Vec<usize> },
    T3 { vertex: usize, b: (usize, usize), c: (usize, usize) },
    T3Inv { edge: usize },
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        match self {
            Move::T0 { .. } => MoveKind::T0,
            Move::T0Inv { .. } => MoveKind::T0Inv,
            Move::T1 { .. } => MoveKind::T1,
            Move::T1Inv { .. } => MoveKind::T1Inv,
            Move::T2 { .. } => MoveKind::T2,
            Move::T2Inv { .. } => MoveKind::T2Inv,
            Move::T3 { .. } => MoveKind::T3,
            Move::T3Inv { .. } => MoveKind::T3Inv,
        }
    }
}

/// Skeleton under edit; dead items are dropped and everything renumbered by
/// `finish`.
struct Draft {
    sk: Skeleton,
    dv: HashSet<usize>,
    dn: HashSet<(usize, usize)>,
    ds: HashSet<(usize, usize)>,
    de: HashSet<usize>,
    dr: HashSet<usize>,
    dc: HashSet<usize>,
}

fn renumber(n: usize, dead: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut next = 0;
    (0..n)
        .map(|i| {
            if dead(i) {
                usize::MAX
            } else {
                next += 1;
                next - 1
            }
        })
        .collect()
}

impl Draft {
    fn new(sk: &Skeleton) -> Self {
        Draft {
            sk: sk.clone(),
            dv: HashSet::new(),
            dn: HashSet::new(),
            ds: HashSet::new(),
            de: HashSet::new(),
            dr: HashSet::new(),
            dc: HashSet::new(),
        }
    }

    fn finish(self) -> Result<Skeleton, MoveError> {
        let sk = self.sk;
        let cm = renumber(sk.cells, |c| self.dc.contains(&c));
        let rm = renumber(sk.regions.len(), |r| self.dr.contains(&r));
        let em = renumber(sk.edges.len(), |e| self.de.contains(&e));
        let vm = renumber(sk.links.len(), |v| self.dv.contains(&v));
        let mut nm = Vec::new();
        let mut links = Vec::new();
        for (v, l) in sk.links.iter().enumerate() {
            let nmv = renumber(l.nodes.len(), |n| self.dn.contains(&(v, n)));
            if self.dv.contains(&v) {
                nm.push(nmv);
                continue;
            }
            let smv = renumber(l.strands.len(), |s| self.ds.contains(&(v, s)));
            let nodes = l
                .nodes
                .iter()
                .enumerate()
                .filter(|(n, _)| !self.dn.contains(&(v, *n)))
                .map(|(_, nd)| LinkNode {
                    edge: em[nd.edge],
                    side: nd.side,
                    darts: nd.darts.iter().filter(|d| smv[d.0] != usize::MAX).map(|&(s, e)| (smv[s], e)).collect(),
                })
                .collect();
            let strands = l
                .strands
                .iter()
                .enumerate()
                .filter(|(s, _)| !self.ds.contains(&(v, *s)))
                .map(|(_, st)| Strand { region: rm[st.region], ends: [nmv[st.ends[0]], nmv[st.ends[1]]] })
                .collect();
            links.push(SphereGraph { nodes, strands });
            nm.push(nmv);
        }
        let edges = sk
            .edges
            .iter()
            .enumerate()
            .filter(|(e, _)| !self.de.contains(e))
            .map(|(_, ed)| Edge {
                ends: [(vm[ed.ends[0].0], nm[ed.ends[0].0][ed.ends[0].1]), (vm[ed.ends[1].0], nm[ed.ends[1].0][ed.ends[1].1])],
                corr: ed.corr.clone(),
            })
            .collect();
        let regions = sk
            .regions
            .iter()
            .enumerate()
            .filter(|(r, _)| !self.dr.contains(r))
            .map(|(_, r)| Region { chi: r.chi, left: cm[r.left], right: cm[r.right] })
            .collect();
        let out = Skeleton { cells: sk.cells - self.dc.len(), regions, edges, links };
        out.validate().map_err(|e| MoveError::NotApplicable(e.to_string()))?;
        Ok(out)
    }
}

fn corner_count(sk: &Skeleton, r: usize) -> usize {
    sk.links.iter().map(|l| l.strands.iter().filter(|s| s.region == r).count()).sum()
}

fn face_count(sk: &Skeleton, c: usize) -> usize {
    let mut n = 0;
    for l in &sk.links {
        for w in l.faces().walks {
            let (nd, i) = w[0];
            let (s, e) = l.nodes[nd].darts[i];
            if l.dart_cell(&sk.regions, s, e) == c {
                n += 1;
            }
        }
    }
    n
}

/// Split strand s by a new bivalent node; returns (node, second half).
fn split_strand(l: &mut SphereGraph, s: usize) -> (usize, usize) {
    let n = l.nodes.len();
    let s2 = l.strands.len();
    let head = l.strands[s].ends[1];
    let region = l.strands[s].region;
    for d in l.nodes[head].darts.iter_mut() {
        if *d == (s, 1) {
            *d = (s2, 1);
        }
    }
    l.strands[s].ends[1] = n;
    l.strands.push(Strand { region, ends: [n, head] });
    l.nodes.push(LinkNode { edge: usize::MAX, side: 0, darts: vec![(s, 1), (s2, 0)] });
    (n, s2)
}

/// Join incoming strand p (head here) with outgoing strand q (tail here):
/// p takes over q's head and q is left unused.
fn join(l: &mut SphereGraph, p: usize, q: usize) {
    let head = l.strands[q].ends[1];
    l.strands[p].ends[1] = head;
    for d in l.nodes[head].darts.iter_mut() {
        if *d == (q, 1) {
            *d = (p, 1);
        }
    }
}

fn t0(sk: &Skeleton, r: usize) -> Result<Skeleton, MoveError> {
    if r >= sk.regions.len() {
        return na("no such region");
    }
    let mut d = Draft::new(sk);
    let s = &mut d.sk;
    let (a, b) = (s.regions[r].left, s.regions[r].right);
    let c = s.cells;
    s.cells += 1;
    let (u, dn) = (s.regions.len(), s.regions.len() + 1);
    s.regions.push(Region { chi: 1, left: a, right: c });
    s.regions.push(Region { chi: 1, left: c, right: b });
    s.regions[r].chi -= 1;
    let v = s.links.len();
    let e = s.edges.len();
    let strands = vec![Strand { region: r, ends: [0, 1] }, Strand { region: u, ends: [1, 0] }, Strand { region: dn, ends: [1, 0] }];
    let nodes = vec![
        LinkNode { edge: e, side: 0, darts: vec![(0, 0), (1, 1), (2, 1)] },
        LinkNode { edge: e, side: 1, darts: vec![(0, 1), (2, 0), (1, 0)] },
    ];
    s.links.push(SphereGraph { nodes, strands });
    s.edges.push(Edge { ends: [(v, 0), (v, 1)], corr: vec![0, 2, 1] });
    d.finish()
}

fn t0_inv(sk: &Skeleton, v: usize) -> Result<Skeleton, MoveError> {
    let Some(l) = sk.links.get(v) else { return na("no such vertex") };
    if l.nodes.len() != 2 || l.strands.len() != 3 || l.nodes[0].edge != l.nodes[1].edge {
        return na("link is not a theta graph on a loop edge");
    }
    if l.strands.iter().any(|s| s.ends[0] == s.ends[1]) {
        return na("loop strand");
    }
    let e = l.nodes[0].edge;
    let edge = &sk.edges[e];
    let n0 = edge.ends[0].1;
    for i in 0..3 {
        let (s0, _) = l.nodes[n0].darts[i];
        let (s1, _) = l.nodes[1 - n0].darts[edge.corr[i]];
        if s0 != s1 {
            return na("edge does not match strands to themselves");
        }
    }
    let faces = l.faces();
    for r in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&x| x != r).collect();
        let (ru, rd) = (l.strands[others[0]].region, l.strands[others[1]].region);
        let rr = l.strands[r].region;
        if ru == rd || ru == rr || rd == rr {
            continue;
        }
        if sk.regions[ru].chi != 1 || sk.regions[rd].chi != 1 || corner_count(sk, ru) != 1 || corner_count(sk, rd) != 1 {
            continue;
        }
        // the patch bounded by the two disk strands
        let Some(w) = faces.walks.iter().find(|w| {
            let ss: HashSet<usize> = w.iter().map(|&(n, i)| l.nodes[n].darts[i].0).collect();
            ss.len() == 2 && !ss.contains(&r)
        }) else {
            continue;
        };
        let (n, i) = w[0];
        let (s, de) = l.nodes[n].darts[i];
        let c = l.dart_cell(&sk.regions, s, de);
        if face_count(sk, c) != 1 {
            continue;
        }
        // T0 orients the disks from the old left cell into the bubble and out to the right
        let (a, b) = (sk.regions[rr].left, sk.regions[rr].right);
        let (x, y) = (sk.regions[ru], sk.regions[rd]);
        let fits = |p: Region, q: Region| p.left == a && p.right == c && q.left == c && q.right == b;
        if !fits(x, y) && !fits(y, x) {
            continue;
        }
        let mut d = Draft::new(sk);
        d.sk.regions[rr].chi += 1;
        d.dv.insert(v);
        d.de.insert(e);
        d.dr.insert(ru);
        d.dr.insert(rd);
        d.dc.insert(c);
        return d.finish();
    }
    na("no pair of removable disk regions")
}

fn t1(sk: &Skeleton, a: (usize, usize), b: (usize, usize)) -> Result<Skeleton, MoveError> {
    let (v1, s1) = a;
    let (v2, s2) = b;
    if v1 == v2 {
        return na("corners must lie at distinct vertices");
    }
    let (Some(l1), Some(l2)) = (sk.links.get(v1), sk.links.get(v2)) else { return na("no such vertex") };
    if s1 >= l1.strands.len() || s2 >= l2.strands.len() {
        return na("no such strand");
    }
    let r = l1.strands[s1].region;
    if l2.strands[s2].region != r {
        return na("corners lie in different regions");
    }
    let comps = sk.region_boundary(r);
    let comp = comps.iter().find(|c| c.contains(&a)).unwrap();
    let same = comp.contains(&b);
    if same && (sk.regions[r].chi != 1 || comps.len() != 1) {
        return na("same boundary component of a non-disk region");
    }
    let mut d = Draft::new(sk);
    let (n1, s1b) = split_strand(&mut d.sk.links[v1], s1);
    let (n2, s2b) = split_strand(&mut d.sk.links[v2], s2);
    let _ = s2b;
    if same {
        let k = comp.len();
        let ia = comp.iter().position(|&x| x == a).unwrap();
        let rb = d.sk.regions.len();
        d.sk.regions.push(sk.regions[r]);
        d.sk.links[v1].strands[s1b].region = rb;
        d.sk.links[v2].strands[s2].region = rb;
        let mut i = (ia + 1) % k;
        while comp[i] != b {
            let (v, s) = comp[i];
            d.sk.links[v].strands[s].region = rb;
            i = (i + 1) % k;
        }
    } else {
        d.sk.regions[r].chi += 1;
    }
    let e = d.sk.edges.len();
    d.sk.edges.push(Edge { ends: [(v1, n1), (v2, n2)], corr: vec![1, 0] });
    d.sk.links[v1].nodes[n1].edge = e;
    d.sk.links[v1].nodes[n1].side = 0;
    d.sk.links[v2].nodes[n2].edge = e;
    d.sk.links[v2].nodes[n2].side = 1;
    d.finish()
}

fn t1_inv(sk: &Skeleton, e: usize) -> Result<Skeleton, MoveError> {
    let Some(edge) = sk.edges.get(e) else { return na("no such edge") };
    let [(v1, n1), (v2, n2)] = edge.ends;
    if v1 == v2 {
        return na("edge is a loop");
    }
    if sk.links[v1].nodes[n1].darts.len() != 2 {
        return na("edge does not have two branches");
    }
    let mut d = Draft::new(sk);
    let mut regs = [0usize; 2];
    for (k, &(v, n)) in [(v1, n1), (v2, n2)].iter().enumerate() {
        let l = &sk.links[v];
        let darts = &l.nodes[n].darts;
        let Some(ip) = darts.iter().position(|x| x.1 == 1) else { return na("no incoming strand") };
        let (p, q) = (darts[ip].0, darts[1 - ip].0);
        if darts[1 - ip].1 != 0 || p == q {
            return na("node does not join two distinct strands");
        }
        if k == 0 {
            regs = [l.strands[p].region, l.strands[q].region];
        }
        join(&mut d.sk.links[v], p, q);
        d.ds.insert((v, q));
        d.dn.insert((v, n));
    }
    d.de.insert(e);
    let [ra, rb] = regs;
    if ra == rb {
        // T1 only adds an arc between different boundary components, so the
        // arc's two sides must lie on one component now
        let l = &sk.links[v1];
        let darts = &l.nodes[n1].darts;
        let (p, q) = (darts[0].0, darts[1].0);
        if !sk.region_boundary(ra).iter().any(|c| c.contains(&(v1, p)) && c.contains(&(v1, q))) {
            return na("edge sides lie on different boundary components");
        }
        d.sk.regions[ra].chi -= 1;
    } else {
        let (x, y) = (sk.regions[ra], sk.regions[rb]);
        if x.left != y.left || x.right != y.right {
            return na("regions separate different cells");
        }
        if x.chi != 1 || y.chi != 1 {
            return na("merging regions that are not both disks");
        }
        d.sk.regions[ra].chi = x.chi + y.chi - 1;
        for l in d.sk.links.iter_mut() {
            for s in l.strands.iter_mut() {
                if s.region == rb {
                    s.region = ra;
                }
            }
        }
        d.dr.insert(rb);
    }
    d.finish()
}

fn connected_without(l: &SphereGraph, skip: usize) -> bool {
    let alive: Vec<usize> = (0..l.nodes.len()).filter(|&n| n != skip).collect();
    induced_connected(l, &alive)
}

fn induced_connected(l: &SphereGraph, set: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    let inset: HashSet<usize> = set.iter().copied().collect();
    let mut seen = HashSet::from([set[0]]);
    let mut stack = vec![set[0]];
    while let Some(n) = stack.pop() {
        for &(s, e) in &l.nodes[n].darts {
            let m = l.strands[s].ends[1 - e];
            if inset.contains(&m) && seen.insert(m) {
                stack.push(m);
            }
        }
    }
    seen.len() == inset.len()
}

fn t2(sk: &Skeleton, e: usize) -> Result<Skeleton, MoveError> {
    let Some(edge) = sk.edges.get(e) else { return na("no such edge") };
    let [(v0, h0), (v1, h1)] = edge.ends;
    if v0 == v1 {
        return na("edge is a loop");
    }
    let (l0, l1) = (&sk.links[v0], &sk.links[v1]);
    for (l, h) in [(l0, h0), (l1, h1)] {
        if l.strands.iter().any(|s| s.ends == [h, h]) {
            return na("loop strand at the edge end");
        }
        if l.nodes.len() < 2 || !connected_without(l, h) {
            return na("link minus the edge end is disconnected");
        }
    }
    let (nn, ns) = (l0.nodes.len(), l0.strands.len());
    let mut d = Draft::new(sk);
    let mut merged = l0.clone();
    for nd in &l1.nodes {
        merged.nodes.push(LinkNode { edge: nd.edge, side: nd.side, darts: nd.darts.iter().map(|&(s, x)| (s + ns, x)).collect() });
    }
    for st in &l1.strands {
        merged.strands.push(Strand { region: st.region, ends: [st.ends[0] + nn, st.ends[1] + nn] });
    }
    for (i, &(s0, e0)) in l0.nodes[h0].darts.iter().enumerate() {
        let (s1, e1) = l1.nodes[h1].darts[edge.corr[i]];
        let y = l1.strands[s1].ends[1 - e1] + nn;
        merged.strands[s0].ends[e0] = y;
        for dd in merged.nodes[y].darts.iter_mut() {
            if *dd == (s1 + ns, 1 - e1) {
                *dd = (s0, e0);
            }
        }
        d.ds.insert((v0, s1 + ns));
    }
    d.dn.insert((v0, h0));
    d.dn.insert((v0, h1 + nn));
    d.sk.links[v0] = merged;
    d.sk.links[v1] = SphereGraph::default();
    d.dv.insert(v1);
    d.de.insert(e);
    for ed in d.sk.edges.iter_mut() {
        for end in ed.ends.iter_mut() {
            if end.0 == v1 {
                *end = (v0, end.1 + nn);
            }
        }
    }
    d.finish()
}

/// Contract the connected node set into one node; returns the modified graph,
/// the surviving node and the dead nodes and strands.
fn contract(l: &SphereGraph, set: &[usize]) -> (SphereGraph, usize, Vec<usize>, Vec<usize>) {
    let mut g = l.clone();
    let root = set[0];
    let mut merged: HashSet<usize> = HashSet::from([root]);
    let inset: HashSet<usize> = set.iter().copied().collect();
    let mut dead_s = Vec::new();
    while merged.len() < inset.len() {
        // a strand from the merged blob to an unmerged node of the set
        let (pos, s, e) = g.nodes[root]
            .darts
            .iter()
            .enumerate()
            .find_map(|(i, &(s, e))| {
                let m = g.strands[s].ends[1 - e];
                (inset.contains(&m) && !merged.contains(&m)).then_some((i, s, e))
            })
            .expect("set is connected");
        let w = g.strands[s].ends[1 - e];
        let wd = &g.nodes[w].darts;
        let j = wd.iter().position(|&x| x == (s, 1 - e)).unwrap();
        let ru = &g.nodes[root].darts;
        let mut darts: Vec<(usize, usize)> = (1..ru.len()).map(|k| ru[(pos + k) % ru.len()]).collect();
        darts.extend((1..wd.len()).map(|k| wd[(j + k) % wd.len()]));
        for &(s2, e2) in &darts {
            if g.strands[s2].ends[e2] == w {
                g.strands[s2].ends[e2] = root;
            }
        }
        g.nodes[root].darts = darts;
        g.nodes[w].darts.clear();
        dead_s.push(s);
        merged.insert(w);
    }
    let loops: Vec<usize> = g.nodes[root].darts.iter().filter(|&&(s, _)| g.strands[s].ends == [root, root]).map(|&(s, _)| s).collect();
    g.nodes[root].darts.retain(|(s, _)| !loops.contains(s));
    dead_s.extend(loops.iter().copied().collect::<HashSet<_>>());
    let dead_n = set.iter().copied().filter(|&n| n != root).collect();
    (g, root, dead_n, dead_s)
}

fn t2_inv(sk: &Skeleton, v: usize, x: &[usize]) -> Result<Skeleton, MoveError> {
    let Some(l) = sk.links.get(v) else { return na("no such vertex") };
    let xs: HashSet<usize> = x.iter().copied().collect();
    if xs.len() != x.len() || x.iter().any(|&n| n >= l.nodes.len()) {
        return na("bad node set");
    }
    let y: Vec<usize> = (0..l.nodes.len()).filter(|n| !xs.contains(n)).collect();
    if x.is_empty() || y.is_empty() || !induced_connected(l, x) || !induced_connected(l, &y) {
        return na("node sets must be nonempty and connected");
    }
    let cut: Vec<usize> =
        (0..l.strands.len()).filter(|&s| xs.contains(&l.strands[s].ends[0]) != xs.contains(&l.strands[s].ends[1])).collect();
    if cut.len() < 2 {
        return na("fewer than two strands cross the cut");
    }
    let (g0, h0, dn0, ds0) = contract(l, &y);
    let (g1, h1, dn1, ds1) = contract(l, x);
    let corr: Vec<usize> = g0.nodes[h0]
        .darts
        .iter()
        .map(|&(s, e)| g1.nodes[h1].darts.iter().position(|&d| d == (s, 1 - e)).unwrap())
        .collect();
    let mut d = Draft::new(sk);
    let v1 = d.sk.links.len();
    let e = d.sk.edges.len();
    d.sk.links[v] = g0;
    d.sk.links.push(g1);
    for ed in d.sk.edges.iter_mut() {
        for end in ed.ends.iter_mut() {
            if end.0 == v && !xs.contains(&end.1) {
                end.0 = v1;
            }
        }
    }
    d.sk.links[v].nodes[h0].edge = e;
    d.sk.links[v].nodes[h0].side = 0;
    d.sk.links[v1].nodes[h1].edge = e;
    d.sk.links[v1].nodes[h1].side = 1;
    d.sk.edges.push(Edge { ends: [(v, h0), (v1, h1)], corr });
    for n in dn0 {
        d.dn.insert((v, n));
    }
    for n in dn1 {
        d.dn.insert((v1, n));
    }
    for s in ds0 {
        d.ds.insert((v, s));
    }
    for s in ds1 {
        d.ds.insert((v1, s));
    }
    // strands of the other side that never touched the contracted node
    for s in 0..l.strands.len() {
        let [a, b] = l.strands[s].ends;
        if !xs.contains(&a) && !xs.contains(&b) {
            d.ds.insert((v, s));
        }
        if xs.contains(&a) && xs.contains(&b) {
            d.ds.insert((v1, s));
        }
    }
    d.finish()
}

fn t3(sk: &Skeleton, v: usize, b: (usize, usize), c: (usize, usize)) -> Result<Skeleton, MoveError> {
    let Some(l) = sk.links.get(v) else { return na("no such vertex") };
    let (sb, eb) = b;
    let (sc, ec) = c;
    if sb >= l.strands.len() || sc >= l.strands.len() || eb > 1 || ec > 1 || sb == sc {
        return na("bad darts");
    }
    let faces = l.faces();
    if faces.of_dart[2 * sb + eb] != faces.of_dart[2 * sc + ec] {
        return na("darts bound different patches");
    }
    let mut d = Draft::new(sk);
    let rj = d.sk.regions.len();
    d.sk.regions.push(Region { chi: 1, left: l.dart_cell(&sk.regions, sb, 1 - eb), right: l.dart_cell(&sk.regions, sc, 1 - ec) });
    let e = d.sk.edges.len();
    let g = &mut d.sk.links[v];
    let (x, y) = (g.nodes.len(), g.nodes.len() + 1);
    let (j, bw, cw) = (g.strands.len(), g.strands.len() + 1, g.strands.len() + 2);
    let wb = g.strands[sb].ends[1 - eb];
    let wc = g.strands[sc].ends[1 - ec];
    for dd in g.nodes[wb].darts.iter_mut() {
        if *dd == (sb, 1 - eb) {
            *dd = (bw, 1 - eb);
        }
    }
    for dd in g.nodes[wc].darts.iter_mut() {
        if *dd == (sc, 1 - ec) {
            *dd = (cw, 1 - ec);
        }
    }
    let (regb, regc) = (g.strands[sb].region, g.strands[sc].region);
    g.strands[sb].ends[1 - eb] = y;
    g.strands[sc].ends[1 - ec] = x;
    let mut ends_b = [0; 2];
    ends_b[eb] = x;
    ends_b[1 - eb] = wb;
    let mut ends_c = [0; 2];
    ends_c[ec] = y;
    ends_c[1 - ec] = wc;
    g.strands.push(Strand { region: rj, ends: [x, y] });
    g.strands.push(Strand { region: regb, ends: ends_b });
    g.strands.push(Strand { region: regc, ends: ends_c });
    g.nodes.push(LinkNode { edge: e, side: 0, darts: vec![(j, 0), (bw, eb), (sc, 1 - ec)] });
    g.nodes.push(LinkNode { edge: e, side: 1, darts: vec![(j, 1), (cw, ec), (sb, 1 - eb)] });
    d.sk.edges.push(Edge { ends: [(v, x), (v, y)], corr: vec![0, 2, 1] });
    d.finish()
}

fn t3_inv(sk: &Skeleton, e: usize) -> Result<Skeleton, MoveError> {
    let Some(edge) = sk.edges.get(e) else { return na("no such edge") };
    let [(v, x), (v2, y)] = edge.ends;
    if v != v2 || x == y {
        return na("edge is not a loop between two nodes");
    }
    let l = &sk.links[v];
    if l.nodes[x].darts.len() != 3 {
        return na("edge does not have three branches");
    }
    let Some(i) = (0..3).find(|&i| {
        let (s, de) = l.nodes[x].darts[i];
        let r = l.strands[s].region;
        l.nodes[y].darts[edge.corr[i]] == (s, 1 - de) && sk.regions[r].chi == 1 && corner_count(sk, r) == 1
    }) else {
        return na("no removable disk region through the edge");
    };
    let (sj, _) = l.nodes[x].darts[i];
    // T3 joins two distinct strands, so no other strand may run between x and y
    if l.strands.iter().enumerate().any(|(s, st)| s != sj && st.ends.iter().all(|&n| n == x || n == y)) {
        return na("reconnection would make both branches one strand");
    }
    let mut d = Draft::new(sk);
    let mut rep: Vec<usize> = (0..l.strands.len()).collect();
    for k in (0..3).filter(|&k| k != i) {
        let dx = l.nodes[x].darts[k];
        let dy = l.nodes[y].darts[edge.corr[k]];
        let (p, q) = if dx.1 == 1 { (dx.0, dy.0) } else { (dy.0, dx.0) };
        let p = rep[p];
        if p == q {
            return na("reconnection closes a strand into a circle");
        }
        join(&mut d.sk.links[v], p, q);
        for r in rep.iter_mut() {
            if *r == q {
                *r = p;
            }
        }
        d.ds.insert((v, q));
    }
    d.ds.insert((v, sj));
    d.dn.insert((v, x));
    d.dn.insert((v, y));
    d.de.insert(e);
    d.dr.insert(l.strands[sj].region);
    d.finish()
}

pub fn apply(sk: &Skeleton, m: &Move) -> Result<Skeleton, MoveError> {
    match m {
        Move::T0 { region } => t0(sk, *region),
        Move::T0Inv { vertex } => t0_inv(sk, *vertex),
        Move::T1 { a, b } => t1(sk, *a, *b),
        Move::T1Inv { edge } => t1_inv(sk, *edge),
        Move::T2 { edge } => t2(sk, *edge),
        Move::T2Inv { vertex, side } => t2_inv(sk, *vertex, side),
        Move::T3 { vertex, b, c } => t3(sk, *vertex, *b, *c),
        Move::T3Inv { edge } => t3_inv(sk, *edge),
    }
}

/// Cap on the node sets tried per link when splitting a vertex.
const MAX_SPLITS: usize = 20_000;

fn neighbours(l: &SphereGraph, n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = l.nodes[n].darts.iter().map(|&(s, e)| l.strands[s].ends[1 - e]).filter(|&m| m != n).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Connected node sets avoiding node 0 whose complement is connected and
/// which at least two strands leave.
fn split_sides(l: &SphereGraph) -> Vec<Vec<usize>> {
    let n = l.nodes.len();
    let mut sets = Vec::new();
    let adj: Vec<Vec<usize>> = (0..n).map(|m| neighbours(l, m)).collect();
    // each connected set once, grown from its smallest node
    fn grow(adj: &[Vec<usize>], root: usize, set: &mut Vec<usize>, cand: Vec<usize>, banned: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if out.len() >= MAX_SPLITS {
            return;
        }
        out.push(set.clone());
        let mut marked = Vec::new();
        for i in 0..cand.len() {
            let w = cand[i];
            let mut next: Vec<usize> = cand[i + 1..].to_vec();
            for &u in &adj[w] {
                if u > root && !banned[u] && !set.contains(&u) && u != w && !cand.contains(&u) {
                    next.push(u);
                }
            }
            set.push(w);
            grow(adj, root, set, next, banned, out);
            set.pop();
            banned[w] = true;
            marked.push(w);
        }
        for w in marked {
            banned[w] = false;
        }
    }
    for root in 1..n {
        let mut banned = vec![false; n];
        banned[0] = true;
        let cand: Vec<usize> = adj[root].iter().copied().filter(|&u| u > root).collect();
        grow(&adj, root, &mut vec![root], cand, &mut banned, &mut sets);
    }
    sets.into_iter()
        .filter(|x| {
            let xs: HashSet<usize> = x.iter().copied().collect();
            let y: Vec<usize> = (0..n).filter(|m| !xs.contains(m)).collect();
            let cut = l.strands.iter().filter(|st| xs.contains(&st.ends[0]) != xs.contains(&st.ends[1])).count();
            cut >= 2 && induced_connected(l, &y)
        })
        .map(|mut x| {
            x.sort_unstable();
            x
        })
        .collect()
}

/// Candidate sites of a kind, not yet checked for applicability.
pub fn candidate_sites(sk: &Skeleton, kind: MoveKind) -> Vec<Move> {
    let mut out = Vec::new();
    match kind {
        MoveKind::T0 => out.extend((0..sk.regions.len()).map(|region| Move::T0 { region })),
        MoveKind::T0Inv => out.extend((0..sk.links.len()).map(|vertex| Move::T0Inv { vertex })),
        MoveKind::T1Inv => out.extend((0..sk.edges.len()).map(|edge| Move::T1Inv { edge })),
        MoveKind::T2 => out.extend((0..sk.edges.len()).map(|edge| Move::T2 { edge })),
        MoveKind::T3Inv => out.extend((0..sk.edges.len()).map(|edge| Move::T3Inv { edge })),
        MoveKind::T1 => {
            for r in 0..sk.regions.len() {
                let mut corners = Vec::new();
                for (v, l) in sk.links.iter().enumerate() {
                    for (s, st) in l.strands.iter().enumerate() {
                        if st.region == r {
                            corners.push((v, s));
                        }
                    }
                }
                for &a in &corners {
                    for &b in &corners {
                        if a.0 < b.0 {
                            out.push(Move::T1 { a, b });
                        }
                    }
                }
            }
        }
        MoveKind::T2Inv => {
            for (v, l) in sk.links.iter().enumerate() {
                for side in split_sides(l) {
                    out.push(Move::T2Inv { vertex: v, side });
                }
            }
        }
        MoveKind::T3 => {
            for (v, l) in sk.links.iter().enumerate() {
                for w in l.faces().walks {
                    let darts: Vec<(usize, usize)> = w.iter().map(|&(n, i)| l.nodes[n].darts[i]).collect();
                    for i in 0..darts.len() {
                        for j in 0..darts.len() {
                            if darts[i].0 != darts[j].0 {
                                out.push(Move::T3 { vertex: v, b: darts[i], c: darts[j] });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Sites of a kind where the move applies, with the results.
pub fn valid_sites(sk: &Skeleton, kind: MoveKind) -> Vec<(Move, Skeleton)> {
    candidate_sites(sk, kind).into_iter().filter_map(|m| apply(sk, &m).ok().map(|s| (m, s))).collect()
}

/// Change in (vertices, edges, regions, cells).
pub fn delta(before: &Skeleton, after: &Skeleton) -> [i64; 4] {
    let (a, b) = (before.counts(), after.counts());
    [
        b.v as i64 - a.v as i64,
        b.e as i64 - a.e as i64,
        b.regions as i64 - a.regions as i64,
        b.cells as i64 - a.cells as i64,
    ]
}

/// Whether `d` is the change in (vertices, edges, regions, cells) that a
/// move of this kind makes.
pub fn delta_matches(kind: MoveKind, d: [i64; 4]) -> bool {
    use MoveKind::*;
    let neg = |x: [i64; 4]| x.map(|v| -v);
    match kind {
        T0 => d == [1, 1, 2, 1],
        T0Inv => d == neg([1, 1, 2, 1]),
        T1 => d == [0, 1, 0, 0] || d == [0, 1, 1, 0],
        T1Inv => d == [0, -1, 0, 0] || d == [0, -1, -1, 0],
        T2 => d == [-1, -1, 0, 0],
        T2Inv => d == [1, 1, 0, 0],
        T3 => d == [0, 1, 1, 0],
        T3Inv => d == [0, -1, -1, 0],
    }
}

/// Whether some inverse-move site on `after` gives back `before` up to
/// isomorphism.
pub fn round_trips(before: &Skeleton, after: &Skeleton, kind: MoveKind) -> bool {
    candidate_sites(after, kind.inverse())
        .into_iter()
        .any(|m| apply(after, &m).map(|s| s.isomorphic(before)).unwrap_or(false))
}

/// A random sequence of applicable moves. Kinds are drawn uniformly among
/// those with at least one valid site.
pub fn random_sequence<R: Rng>(sk: &Skeleton, len: usize, kinds: &[MoveKind], max_cells: usize, rng: &mut R) -> Vec<(Move, Skeleton)> {
    let mut cur = sk.clone();
    let mut out = Vec::new();
    for _ in 0..len {
        let mut ks = kinds.to_vec();
        ks.shuffle(rng);
        let mut step = None;
        for k in ks {
            let mut cands = candidate_sites(&cur, k);
            cands.shuffle(rng);
            if let Some(found) = cands.into_iter().find_map(|m| {
                apply(&cur, &m).ok().filter(|s| s.cells <= max_cells && s.links.len() <= 8).map(|s| (m, s))
            }) {
                step = Some(found);
                break;
            }
        }
        let Some((m, s)) = step else { break };
        cur = s.clone();
        out.push((m, s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::dual_skeleton;
    use crate::triangulation::builtin;

    fn base(name: &str) -> Skeleton {
        dual_skeleton(&builtin(name).unwrap())
    }

    #[test]
    fn t0_round_trip() {
        let s = base("s3_2tet");
        let t = t0(&s, 0).unwrap();
        assert_eq!(delta(&s, &t), [1, 1, 2, 1]);
        let back = t0_inv(&t, t.links.len() - 1).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn moves_have_sites_and_invert() {
        let s = base("s3_2tet");
        for kind in [MoveKind::T0, MoveKind::T1, MoveKind::T2, MoveKind::T3] {
            let sites = valid_sites(&s, kind);
            assert!(!sites.is_empty(), "{kind:?} has no site");
            for (m, t) in sites.iter().take(4) {
                assert!(round_trips(&s, t, kind), "{m:?} does not invert");
            }
        }
    }
}
