//! Skeletons of closed oriented 3-manifolds, stored through their vertex
//! links.
//!
//! Each vertex carries a graph on a small sphere around it. Nodes of that
//! graph are half-edges, strands are germs of regions and patches are germs
//! of 3-cells. Rotations are counterclockwise seen from outside the sphere.
//! A strand is oriented so that the left cell of its region lies on its
//! left; dart end 0 is the tail and end 1 the head.

use crate::triangulation::Triangulation;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkeletonError {
    #[error("invalid skeleton: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinkNode {
    pub edge: usize,
    pub side: usize,
    /// (strand, end) in counterclockwise order
    pub darts: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strand {
    pub region: usize,
    /// tail node, head node
    pub ends: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SphereGraph {
    pub nodes: Vec<LinkNode>,
    pub strands: Vec<Strand>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub chi: i64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    /// (vertex, node) at each end
    pub ends: [(usize, usize); 2],
    /// dart i at end 0 meets dart corr[i] at end 1
    pub corr: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub cells: usize,
    pub regions: Vec<Region>,
    pub edges: Vec<Edge>,
    pub links: Vec<SphereGraph>,
}

/// Face structure of a sphere graph.
#[derive(Debug, Clone)]
pub struct Faces {
    /// boundary walks as leaving darts (node, position), face on the left
    pub walks: Vec<Vec<(usize, usize)>>,
    /// face after each dart, indexed by 2·strand + end
    pub of_dart: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub v: usize,
    pub e: usize,
    pub regions: usize,
    pub cells: usize,
}

impl SphereGraph {
    /// (node, position) of every dart, indexed by 2·strand + end.
    pub fn dart_positions(&self) -> Vec<(usize, usize)> {
        let mut pos = vec![(usize::MAX, usize::MAX); 2 * self.strands.len()];
        for (n, node) in self.nodes.iter().enumerate() {
            for (i, &(s, e)) in node.darts.iter().enumerate() {
                pos[2 * s + e] = (n, i);
            }
        }
        pos
    }

    pub fn faces(&self) -> Faces {
        let pos = self.dart_positions();
        let mut of_dart = vec![usize::MAX; 2 * self.strands.len()];
        let mut walks = Vec::new();
        for start in 0..2 * self.strands.len() {
            if of_dart[start] != usize::MAX {
                continue;
            }
            let f = walks.len();
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                of_dart[d] = f;
                walk.push(pos[d]);
                let (s, e) = (d / 2, d % 2);
                let (w, j) = pos[2 * s + 1 - e];
                let k = self.nodes[w].darts.len();
                let (s2, e2) = self.nodes[w].darts[(j + k - 1) % k];
                d = 2 * s2 + e2;
                if d == start {
                    break;
                }
            }
            walks.push(walk);
        }
        Faces { walks, of_dart }
    }

    /// Cell of the face after dart (s, e).
    pub fn dart_cell(&self, regions: &[Region], s: usize, e: usize) -> usize {
        let r = &regions[self.strands[s].region];
        if e == 0 {
            r.left
        } else {
            r.right
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(n) = stack.pop() {
            for &(s, e) in &self.nodes[n].darts {
                let m = self.strands[s].ends[1 - e];
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen.iter().all(|&x| x)
    }

    pub fn euler(&self) -> i64 {
        self.nodes.len() as i64 - self.strands.len() as i64 + self.faces().walks.len() as i64
    }

    /// Structural checks that do not need the ambient skeleton.
    pub fn check_local(&self) -> Result<(), String> {
        let mut seen = vec![false; 2 * self.strands.len()];
        for (n, node) in self.nodes.iter().enumerate() {
            if node.darts.is_empty() {
                return Err(format!("node {n} has no darts"));
            }
            for &(s, e) in &node.darts {
                if s >= self.strands.len() || e > 1 {
                    return Err(format!("node {n} has a bad dart"));
                }
                if seen[2 * s + e] {
                    return Err(format!("dart ({s},{e}) repeated"));
                }
                seen[2 * s + e] = true;
                if self.strands[s].ends[e] != n {
                    return Err(format!("strand {s} end {e} does not point to node {n}"));
                }
            }
        }
        if seen.iter().any(|&x| !x) {
            return Err("dangling dart".into());
        }
        if !self.is_connected() {
            return Err("link is disconnected".into());
        }
        if self.euler() != 2 {
            return Err(format!("link Euler characteristic {}", self.euler()));
        }
        Ok(())
    }
}

impl Edge {
    /// Dart position at the other end matching position i at end `side`.
    pub fn partner(&self, side: usize, i: usize) -> usize {
        if side == 0 {
            self.corr[i]
        } else {
            self.corr.iter().position(|&j| j == i).expect("corr is a permutation")
        }
    }
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
const ROT: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

fn pair_index(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    PAIRS.iter().position(|&p| p == (a, b)).unwrap()
}

/// The skeleton dual to a triangulation: one vertex per tetrahedron, one
/// edge per triangle, one disk region per edge and one 3-cell per vertex.
pub fn dual_skeleton(t: &Triangulation) -> Skeleton {
    let n = t.tet_count();
    let cl = t.classes();
    let rot = |tet: usize, a: usize| -> [usize; 3] {
        let mut r = ROT[a];
        if t.signs[tet] < 0 {
            r.reverse();
        }
        r
    };
    let mut regions = vec![Region { chi: 1, left: 0, right: 0 }; cl.edge_count];
    let mut links = Vec::with_capacity(n);
    for tet in 0..n {
        let mut strands = Vec::with_capacity(6);
        for &(a, b) in &PAIRS {
            let cd: Vec<usize> = (0..4).filter(|&x| x != a && x != b).collect();
            let (c, d) = (cd[0], cd[1]);
            let i = 16 * tet + 4 * c + d;
            let (tail, head) = if cl.edge_forward[i] { (c, d) } else { (d, c) };
            let class = cl.edge[i];
            regions[class] = Region { chi: 1, left: cl.vertex[4 * tet + tail], right: cl.vertex[4 * tet + head] };
            // the patch after the dart a -> b at node a
            let r = rot(tet, a);
            let k = r.iter().position(|&x| x == b).unwrap();
            let next = r[(k + 1) % 3];
            let patch = (0..4).find(|&x| x != a && x != b && x != next).unwrap();
            let ends = if patch == tail { [a, b] } else { [b, a] };
            strands.push(Strand { region: class, ends });
        }
        let nodes = (0..4)
            .map(|a| {
                let darts = rot(tet, a)
                    .iter()
                    .map(|&b| {
                        let s = pair_index(a, b);
                        (s, if strands[s].ends[0] == a { 0 } else { 1 })
                    })
                    .collect();
                LinkNode { edge: usize::MAX, side: 0, darts }
            })
            .collect();
        links.push(SphereGraph { nodes, strands });
    }
    let mut edges = Vec::new();
    for tet in 0..n {
        for a in 0..4 {
            let (t2, a2, p) = t.gluings[tet][a];
            if (t2, a2) < (tet, a) {
                continue;
            }
            let r0 = rot(tet, a);
            let r1 = rot(t2, a2);
            let corr = r0.iter().map(|&b| r1.iter().position(|&x| x == p[b]).unwrap()).collect();
            let e = edges.len();
            links[tet].nodes[a].edge = e;
            links[tet].nodes[a].side = 0;
            links[t2].nodes[a2].edge = e;
            links[t2].nodes[a2].side = 1;
            edges.push(Edge { ends: [(tet, a), (t2, a2)], corr });
        }
    }
    Skeleton { cells: cl.vertex_count, regions, edges, links }
}

impl Skeleton {
    pub fn counts(&self) -> Counts {
        Counts { v: self.links.len(), e: self.edges.len(), regions: self.regions.len(), cells: self.cells }
    }

    /// Boundary walk successor of corner (vertex, strand): follow the strand to
    /// its head and cross the edge there.
    pub fn next_corner(&self, v: usize, s: usize) -> (usize, usize) {
        let link = &self.links[v];
        let h = link.strands[s].ends[1];
        let node = &link.nodes[h];
        let i = node.darts.iter().position(|&d| d == (s, 1)).unwrap();
        let edge = &self.edges[node.edge];
        let j = edge.partner(node.side, i);
        let (v2, n2) = edge.ends[1 - node.side];
        let (s2, _) = self.links[v2].nodes[n2].darts[j];
        (v2, s2)
    }

    /// Boundary components of a region as cyclic corner sequences.
    pub fn region_boundary(&self, r: usize) -> Vec<Vec<(usize, usize)>> {
        let mut corners = Vec::new();
        for (v, l) in self.links.iter().enumerate() {
            for (s, st) in l.strands.iter().enumerate() {
                if st.region == r {
                    corners.push((v, s));
                }
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for &c in &corners {
            if seen.contains(&c) {
                continue;
            }
            let mut cyc = Vec::new();
            let mut cur = c;
            while seen.insert(cur) {
                cyc.push(cur);
                cur = self.next_corner(cur.0, cur.1);
            }
            out.push(cyc);
        }
        out
    }

    pub fn validate(&self) -> Result<(), SkeletonError> {
        let bad = |s: String| Err(SkeletonError::Invalid(s));
        let mut region_used = vec![false; self.regions.len()];
        let mut cell_used = vec![false; self.cells];
        for r in &self.regions {
            if r.left >= self.cells || r.right >= self.cells {
                return bad("region cell out of range".into());
            }
        }
        for (v, link) in self.links.iter().enumerate() {
            if let Err(e) = link.check_local() {
                return bad(format!("vertex {v}: {e}"));
            }
            for (n, node) in link.nodes.iter().enumerate() {
                let Some(edge) = self.edges.get(node.edge) else { return bad(format!("vertex {v} node {n}: bad edge")) };
                if node.side > 1 || edge.ends[node.side] != (v, n) {
                    return bad(format!("vertex {v} node {n}: edge end mismatch"));
                }
            }
            for st in &link.strands {
                if st.region >= self.regions.len() {
                    return bad(format!("vertex {v}: region out of range"));
                }
                region_used[st.region] = true;
            }
            let faces = link.faces();
            for walk in &faces.walks {
                let cells: Vec<usize> = walk
                    .iter()
                    .map(|&(n, i)| {
                        let (s, e) = link.nodes[n].darts[i];
                        link.dart_cell(&self.regions, s, e)
                    })
                    .collect();
                if cells.iter().any(|&c| c != cells[0]) {
                    return bad(format!("vertex {v}: a patch borders different cells"));
                }
                cell_used[cells[0]] = true;
            }
        }
        if region_used.iter().any(|&x| !x) {
            return bad("region without corners".into());
        }
        if cell_used.iter().any(|&x| !x) {
            return bad("cell without patches".into());
        }
        for (ei, edge) in self.edges.iter().enumerate() {
            let mut na = [0usize; 2];
            for k in 0..2 {
                let (v, n) = edge.ends[k];
                let Some(node) = self.links.get(v).and_then(|l| l.nodes.get(n)) else {
                    return bad(format!("edge {ei}: end out of range"));
                };
                if node.edge != ei || node.side != k {
                    return bad(format!("edge {ei}: node back-reference mismatch"));
                }
                na[k] = node.darts.len();
            }
            let k = na[0];
            if na[1] != k || edge.corr.len() != k {
                return bad(format!("edge {ei}: valence mismatch"));
            }
            for i in 0..k {
                if edge.corr[i] != (edge.corr[0] + k - i) % k {
                    return bad(format!("edge {ei}: correspondence is not orientation reversing"));
                }
                let (v0, n0) = edge.ends[0];
                let (v1, n1) = edge.ends[1];
                let (s0, e0) = self.links[v0].nodes[n0].darts[i];
                let (s1, e1) = self.links[v1].nodes[n1].darts[edge.corr[i]];
                if self.links[v0].strands[s0].region != self.links[v1].strands[s1].region || e0 == e1 {
                    return bad(format!("edge {ei}: branch {i} does not match across the edge"));
                }
            }
        }
        let chi: i64 = self.regions.iter().map(|r| r.chi).sum();
        let euler = self.links.len() as i64 - self.edges.len() as i64 + chi - self.cells as i64;
        if euler != 0 {
            return bad(format!("Euler characteristic {euler} != 0"));
        }
        Ok(())
    }

    /// The same skeleton with edge `e` running the other way.
    pub fn reverse_edge(&self, e: usize) -> Skeleton {
        let mut out = self.clone();
        let ed = &mut out.edges[e];
        ed.ends.swap(0, 1);
        let mut inv = vec![0; ed.corr.len()];
        for (i, &j) in ed.corr.iter().enumerate() {
            inv[j] = i;
        }
        ed.corr = inv;
        for (k, &(v, n)) in ed.ends.clone().iter().enumerate() {
            out.links[v].nodes[n].side = k;
        }
        out
    }

    /// Isomorphism of combinatorial data, allowing edges to be reversed.
    pub fn isomorphic(&self, o: &Skeleton) -> bool {
        if self.counts() != o.counts() {
            return false;
        }
        let starts = self.component_starts();
        let ok = extend_iso(self, o, &starts, IsoState::default());
        ok.is_some()
    }

    /// One node from each connected component of the graph formed by link
    /// strands and edges.
    fn component_starts(&self) -> Vec<(usize, usize)> {
        let mut seen = HashSet::new();
        let mut starts = Vec::new();
        for (v, l) in self.links.iter().enumerate() {
            for n in 0..l.nodes.len() {
                if !seen.insert((v, n)) {
                    continue;
                }
                starts.push((v, n));
                let mut stack = vec![(v, n)];
                while let Some((v, n)) = stack.pop() {
                    let l = &self.links[v];
                    let node = &l.nodes[n];
                    let mut next: Vec<(usize, usize)> =
                        node.darts.iter().map(|&(s, e)| (v, l.strands[s].ends[1 - e])).collect();
                    next.push(self.edges[node.edge].ends[1 - node.side]);
                    for m in next {
                        if seen.insert(m) {
                            stack.push(m);
                        }
                    }
                }
            }
        }
        starts
    }
}

#[derive(Clone, Default)]
struct IsoState {
    nmap: HashMap<(usize, usize), ((usize, usize), usize)>,
    nback: HashSet<(usize, usize)>,
    smap: HashMap<(usize, usize), (usize, usize)>,
    sback: HashMap<(usize, usize), (usize, usize)>,
    vmap: HashMap<usize, usize>,
    vback: HashMap<usize, usize>,
    rmap: HashMap<usize, usize>,
    rback: HashMap<usize, usize>,
    cmap: HashMap<usize, usize>,
    cback: HashMap<usize, usize>,
}

fn bind<K: Hash + Eq + Copy, V: Hash + Eq + Copy>(f: &mut HashMap<K, V>, g: &mut HashMap<V, K>, k: K, v: V) -> bool {
    match (f.get(&k), g.get(&v)) {
        (None, None) => {
            f.insert(k, v);
            g.insert(v, k);
            true
        }
        (Some(x), Some(y)) => *x == v && *y == k,
        _ => false,
    }
}

/// Map the remaining components one by one, trying every image of each
/// component's start node.
fn extend_iso(a: &Skeleton, b: &Skeleton, starts: &[(usize, usize)], st: IsoState) -> Option<IsoState> {
    let Some((&x, rest)) = starts.split_first() else {
        return (st.rmap.len() == a.regions.len() && st.cmap.len() == a.cells).then_some(st);
    };
    let k = a.links[x.0].nodes[x.1].darts.len();
    for (v, l) in b.links.iter().enumerate() {
        for (n, node) in l.nodes.iter().enumerate() {
            if node.darts.len() != k || st.nback.contains(&(v, n)) {
                continue;
            }
            for off in 0..k {
                let mut s2 = st.clone();
                if grow_iso(a, b, &mut s2, x, (v, n), off) {
                    if let Some(done) = extend_iso(a, b, rest, s2) {
                        return Some(done);
                    }
                }
            }
        }
    }
    None
}

fn grow_iso(a: &Skeleton, o: &Skeleton, st: &mut IsoState, x0: (usize, usize), y0: (usize, usize), off0: usize) -> bool {
    let mut queue = VecDeque::from([(x0, y0, off0)]);
    while let Some((x, y, off)) = queue.pop_front() {
        if let Some(&(yy, oo)) = st.nmap.get(&x) {
            if yy != y || oo != off {
                return false;
            }
            continue;
        }
        if !st.nback.insert(y) {
            return false;
        }
        st.nmap.insert(x, (y, off));
        if !bind(&mut st.vmap, &mut st.vback, x.0, y.0) {
            return false;
        }
        let (l1, l2) = (&a.links[x.0], &o.links[y.0]);
        let (nd1, nd2) = (&l1.nodes[x.1], &l2.nodes[y.1]);
        let k = nd1.darts.len();
        if nd2.darts.len() != k {
            return false;
        }
        for i in 0..k {
            let (s1, e1) = nd1.darts[i];
            let (s2, e2) = nd2.darts[(i + off) % k];
            if e1 != e2 || !bind(&mut st.smap, &mut st.sback, (x.0, s1), (y.0, s2)) {
                return false;
            }
            let (r1, r2) = (l1.strands[s1].region, l2.strands[s2].region);
            if !bind(&mut st.rmap, &mut st.rback, r1, r2) {
                return false;
            }
            let (g1, g2) = (a.regions[r1], o.regions[r2]);
            if g1.chi != g2.chi
                || !bind(&mut st.cmap, &mut st.cback, g1.left, g2.left)
                || !bind(&mut st.cmap, &mut st.cback, g1.right, g2.right)
            {
                return false;
            }
            let m1 = l1.strands[s1].ends[1 - e1];
            let m2 = l2.strands[s2].ends[1 - e2];
            let j1 = l1.nodes[m1].darts.iter().position(|&d| d == (s1, 1 - e1)).unwrap();
            let j2 = l2.nodes[m2].darts.iter().position(|&d| d == (s2, 1 - e2)).unwrap();
            let k2 = l1.nodes[m1].darts.len();
            if l2.nodes[m2].darts.len() != k2 {
                return false;
            }
            queue.push_back(((x.0, m1), (y.0, m2), (j2 + k2 - j1) % k2));
        }
        let (ed1, ed2) = (&a.edges[nd1.edge], &o.edges[nd2.edge]);
        let (q1, q2) = (ed1.ends[1 - nd1.side], ed2.ends[1 - nd2.side]);
        let c1 = ed1.partner(nd1.side, 0);
        let c2 = ed2.partner(nd2.side, off % k);
        queue.push_back((q1, q2, (c2 + k - c1) % k));
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::builtin;

    #[test]
    fn dual_skeletons_validate() {
        for name in ["s3_1tet", "s3_2tet", "s2xs1", "rp3", "lens:3:1", "lens:4:1", "t3_6tet"] {
            let t = builtin(name).unwrap();
            let s = dual_skeleton(&t);
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            let c = s.counts();
            assert_eq!(c.v, t.tet_count());
            assert_eq!(c.e, 2 * t.tet_count());
            assert_eq!(c.regions, t.classes().edge_count);
            assert_eq!(c.v as i64 - c.e as i64 + c.regions as i64 - c.cells as i64, 0);
            for l in &s.links {
                assert_eq!(l.nodes.len(), 4);
                assert_eq!(l.faces().walks.len(), 4);
            }
            for r in 0..s.regions.len() {
                assert_eq!(s.region_boundary(r).len(), 1, "{name}: region {r} should be a disk");
            }
            assert!(s.isomorphic(&s.clone()));
        }
    }

    #[test]
    fn isomorphism_distinguishes() {
        let a = dual_skeleton(&builtin("s3_2tet").unwrap());
        let b = dual_skeleton(&builtin("s2xs1").unwrap());
        let c = dual_skeleton(&builtin("rp3").unwrap());
        assert!(!a.isomorphic(&b));
        assert!(!b.isomorphic(&c) || b.counts() != c.counts());
    }
}
