//! Closed oriented 3-manifold triangulations given by face gluings.
//!
//! Face f of a tetrahedron is the face opposite vertex f. A gluing
//! `(t, f) -> (t', f', p)` identifies vertex i of t with vertex p[i] of t'.

use serde_json::Value;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("gluing is not an involution at tetrahedron {0} face {1}")]
    NotInvolution(usize, usize),
    #[error("face glued to itself at tetrahedron {0} face {1}")]
    SelfGluing(usize, usize),
    #[error("triangulation is not orientable")]
    NonOrientable,
    #[error("not a closed manifold: {0}")]
    NotManifold(String),
    #[error("unknown builtin {0}")]
    UnknownBuiltin(String),
}

pub type Gluing = (usize, usize, [usize; 4]);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub gluings: Vec<[Gluing; 4]>,
    /// +1/-1 orientation of each tetrahedron relative to the vertex order.
    pub signs: Vec<i8>,
}

fn parity(p: &[usize; 4]) -> i8 {
    let mut s = 1;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

struct Dsu(Vec<usize>);
impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a] = b;
        }
    }
}

/// Classes of vertices and (directed) edges under the gluings.
#[derive(Debug, Clone)]
pub struct Classes {
    /// class of (t, v) at index 4t + v
    pub vertex: Vec<usize>,
    pub vertex_count: usize,
    /// class of undirected edge (t, {a, b}) at index 16t + 4a + b
    pub edge: Vec<usize>,
    pub edge_count: usize,
    /// for (t, a, b): whether a→b agrees with the class's reference direction
    pub edge_forward: Vec<bool>,
}

impl Triangulation {
    pub fn tet_count(&self) -> usize {
        self.gluings.len()
    }

    pub fn new(gluings: Vec<[Gluing; 4]>) -> Result<Self, TriangulationError> {
        let n = gluings.len();
        if n == 0 {
            return Err(TriangulationError::Parse("no tetrahedra".into()));
        }
        for (t, gl) in gluings.iter().enumerate() {
            for (f, &(t2, f2, p)) in gl.iter().enumerate() {
                if t2 >= n || f2 >= 4 {
                    return Err(TriangulationError::OutOfRange(format!("tet {t} face {f}")));
                }
                let mut seen = [false; 4];
                for &x in &p {
                    if x >= 4 || seen[x] {
                        return Err(TriangulationError::OutOfRange(format!("permutation at tet {t} face {f}")));
                    }
                    seen[x] = true;
                }
                if (t2, f2) == (t, f) {
                    return Err(TriangulationError::SelfGluing(t, f));
                }
                if p[f] != f2 {
                    return Err(TriangulationError::NotInvolution(t, f));
                }
                let (t3, f3, q) = gluings[t2][f2];
                if (t3, f3) != (t, f) || (0..4).any(|i| q[p[i]] != i) {
                    return Err(TriangulationError::NotInvolution(t, f));
                }
            }
        }
        // orientation: gluings must reverse orientation
        let mut signs = vec![0i8; n];
        signs[0] = 1;
        let mut stack = vec![0];
        while let Some(t) = stack.pop() {
            for &(t2, _, p) in &gluings[t] {
                let want = -signs[t] * parity(&p);
                if signs[t2] == 0 {
                    signs[t2] = want;
                    stack.push(t2);
                } else if signs[t2] != want {
                    return Err(TriangulationError::NonOrientable);
                }
            }
        }
        if signs.contains(&0) {
            return Err(TriangulationError::NotManifold("disconnected".into()));
        }
        let tri = Triangulation { gluings, signs };
        tri.check_manifold()?;
        Ok(tri)
    }

    pub fn classes(&self) -> Classes {
        let n = self.tet_count();
        let mut vd = Dsu::new(4 * n);
        // directed edge (t,a,b) at 16t+4a+b; union directed edges respecting direction
        let mut ed = Dsu::new(16 * n);
        for (t, gl) in self.gluings.iter().enumerate() {
            for (f, &(t2, _, p)) in gl.iter().enumerate() {
                for a in 0..4 {
                    if a == f {
                        continue;
                    }
                    vd.union(4 * t + a, 4 * t2 + p[a]);
                    for b in 0..4 {
                        if b != f && b != a {
                            ed.union(16 * t + 4 * a + b, 16 * t2 + 4 * p[a] + p[b]);
                        }
                    }
                }
            }
        }
        let mut vmap = HashMap::new();
        let vertex: Vec<usize> = (0..4 * n)
            .map(|i| {
                let r = vd.find(i);
                let k = vmap.len();
                *vmap.entry(r).or_insert(k)
            })
            .collect();
        let mut emap: HashMap<usize, usize> = HashMap::new();
        let mut edge = vec![usize::MAX; 16 * n];
        let mut edge_forward = vec![false; 16 * n];
        for t in 0..n {
            for a in 0..4 {
                for b in 0..4 {
                    if a == b {
                        continue;
                    }
                    let i = 16 * t + 4 * a + b;
                    let r = ed.find(i);
                    let rr = ed.find(16 * t + 4 * b + a);
                    if let Some(&k) = emap.get(&r) {
                        edge[i] = k;
                        edge_forward[i] = true;
                    } else if let Some(&k) = emap.get(&rr) {
                        edge[i] = k;
                        edge_forward[i] = false;
                    } else {
                        let k = emap.len();
                        emap.insert(r, k);
                        edge[i] = k;
                        edge_forward[i] = true;
                    }
                }
            }
        }
        Classes { vertex, vertex_count: vmap.len(), edge, edge_count: emap.len(), edge_forward }
    }

    fn check_manifold(&self) -> Result<(), TriangulationError> {
        let n = self.tet_count();
        let c = self.classes();
        // no edge identified with itself reversed
        for t in 0..n {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    if c.edge[16 * t + 4 * a + b] == c.edge[16 * t + 4 * b + a]
                        && c.edge_forward[16 * t + 4 * a + b] == c.edge_forward[16 * t + 4 * b + a]
                    {
                        return Err(TriangulationError::NotManifold(format!("edge ({t},{a},{b}) reversed onto itself")));
                    }
                }
            }
        }
        // vertex links are spheres
        let mut faces = vec![0i64; c.vertex_count];
        let mut ends: Vec<std::collections::HashSet<(usize, bool)>> = vec![Default::default(); c.vertex_count];
        for t in 0..n {
            for a in 0..4 {
                let v = c.vertex[4 * t + a];
                faces[v] += 1;
                for b in 0..4 {
                    if b != a {
                        let i = 16 * t + 4 * a + b;
                        ends[v].insert((c.edge[i], c.edge_forward[i]));
                    }
                }
            }
        }
        for v in 0..c.vertex_count {
            let f = faces[v];
            let chi = ends[v].len() as i64 - 3 * f / 2 + f;
            if chi != 2 {
                return Err(TriangulationError::NotManifold(format!("vertex {v} link has Euler characteristic {chi}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "tetrahedra": self.tet_count(),
            "gluings": self.gluings.iter().map(|gl| gl.iter().map(|&(t, f, p)| serde_json::json!([t, f, p])).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, TriangulationError> {
        let v: Value = serde_json::from_str(text).map_err(|e| TriangulationError::Parse(e.to_string()))?;
        let bad = |s: &str| TriangulationError::Parse(s.to_string());
        let n = v["tetrahedra"].as_u64().ok_or_else(|| bad("missing tetrahedra"))? as usize;
        let arr = v["gluings"].as_array().ok_or_else(|| bad("missing gluings"))?;
        if arr.len() != n {
            return Err(bad("gluings length differs from tetrahedra"));
        }
        let mut gluings = Vec::new();
        for tet in arr {
            let faces = tet.as_array().filter(|a| a.len() == 4).ok_or_else(|| bad("each tetrahedron needs 4 entries"))?;
            let mut gl = [(0usize, 0usize, [0usize; 4]); 4];
            for (f, e) in faces.iter().enumerate() {
                let (t2, f2, p): (usize, usize, [usize; 4]) =
                    serde_json::from_value(e.clone()).map_err(|_| bad("entry must be [t, f, [p0,p1,p2,p3]]"))?;
                gl[f] = (t2, f2, p);
            }
            gluings.push(gl);
        }
        Triangulation::new(gluings)
    }

    /// `builtin:NAME`, a bare builtin name, or a path to a JSON file.
    pub fn load(desc: &str) -> Result<Self, TriangulationError> {
        let name = desc.strip_prefix("builtin:").unwrap_or(desc);
        match builtin(name) {
            Ok(t) => Ok(t),
            Err(TriangulationError::UnknownBuiltin(_)) if !desc.starts_with("builtin:") => {
                let text = std::fs::read_to_string(desc).map_err(|e| TriangulationError::Parse(format!("{desc}: {e}")))?;
                Triangulation::from_json_str(&text)
            }
            Err(e) => Err(e),
        }
    }
}

fn glue(g: &mut [[Option<Gluing>; 4]], t: usize, f: usize, t2: usize, p: [usize; 4]) {
    let f2 = p[f];
    let mut q = [0usize; 4];
    for i in 0..4 {
        q[p[i]] = i;
    }
    g[t][f] = Some((t2, f2, p));
    g[t2][f2] = Some((t, f, q));
}

fn finish(g: Vec<[Option<Gluing>; 4]>) -> Result<Triangulation, TriangulationError> {
    let gl = g
        .into_iter()
        .map(|row| {
            let mut out = [(0, 0, [0; 4]); 4];
            for (f, x) in row.iter().enumerate() {
                out[f] = x.ok_or_else(|| TriangulationError::Parse("unglued face".into()))?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, TriangulationError>>()?;
    Triangulation::new(gl)
}

/// Lens space L(p, q) as a suspended p-gon with the two cones identified
/// after a rotation by q steps. Vertices of tetrahedron k: N, S, a_k, a_{k+1}.
pub fn lens(p: usize, q: usize) -> Result<Triangulation, TriangulationError> {
    if p < 2 {
        return Err(TriangulationError::UnknownBuiltin(format!("lens:{p}:{q}")));
    }
    let mut g = vec![[None; 4]; p];
    for k in 0..p {
        glue(&mut g, k, 2, (k + 1) % p, [0, 1, 3, 2]);
    }
    for k in 0..p {
        glue(&mut g, k, 1, (k + q) % p, [1, 0, 2, 3]);
    }
    finish(g)
}

/// The cube [0,1]^3 cut into 6 tetrahedra along the main diagonal, with
/// opposite faces identified.
pub fn torus3() -> Result<Triangulation, TriangulationError> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let verts: Vec<[[i32; 3]; 4]> = perms
        .iter()
        .map(|s| {
            let mut v = [[0i32; 3]; 4];
            for k in 1..4 {
                v[k] = v[k - 1];
                v[k][s[k - 1]] = 1;
            }
            v
        })
        .collect();
    let mut g = vec![[None; 4]; 6];
    for t in 0..6 {
        for f in 0..4 {
            if g[t][f].is_some() {
                continue;
            }
            'search: for t2 in 0..6 {
                for f2 in 0..4 {
                    if (t2, f2) == (t, f) {
                        continue;
                    }
                    for shift in [-1i32, 0, 1].iter().flat_map(|&x| [-1i32, 0, 1].iter().flat_map(move |&y| [-1i32, 0, 1].map(move |z| [x, y, z]))) {
                        let mut p = [0usize; 4];
                        p[f] = f2;
                        let mut ok = true;
                        for i in (0..4).filter(|&i| i != f) {
                            let w = [verts[t][i][0] + shift[0], verts[t][i][1] + shift[1], verts[t][i][2] + shift[2]];
                            match (0..4).filter(|&j| j != f2).find(|&j| verts[t2][j] == w) {
                                Some(j) => p[i] = j,
                                None => {
                                    ok = false;
                                    break;
                                }
                            }
                        }
                        if ok {
                            glue(&mut g, t, f, t2, p);
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    finish(g)
}

pub fn builtin(name: &str) -> Result<Triangulation, TriangulationError> {
    let mut g;
    match name {
        "s3_1tet" => {
            g = vec![[None; 4]; 1];
            glue(&mut g, 0, 0, 0, [1, 0, 2, 3]);
            glue(&mut g, 0, 2, 0, [0, 1, 3, 2]);
        }
        "s3_2tet" => {
            g = vec![[None; 4]; 2];
            for f in 0..4 {
                glue(&mut g, 0, f, 1, [0, 1, 2, 3]);
            }
        }
        "s2xs1" => {
            g = vec![[None; 4]; 2];
            glue(&mut g, 0, 0, 0, [1, 2, 3, 0]);
            glue(&mut g, 0, 2, 1, [1, 2, 0, 3]);
            glue(&mut g, 0, 3, 1, [1, 2, 0, 3]);
            glue(&mut g, 1, 1, 1, [3, 2, 0, 1]);
        }
        "rp3" => return lens(2, 1),
        "t3_6tet" => return torus3(),
        _ => {
            if let Some(rest) = name.strip_prefix("lens:") {
                let parts: Vec<&str> = rest.split(':').collect();
                if parts.len() == 2 {
                    if let (Ok(p), Ok(q)) = (parts[0].parse(), parts[1].parse()) {
                        return lens(p, q);
                    }
                }
            }
            return Err(TriangulationError::UnknownBuiltin(name.to_string()));
        }
    }
    finish(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for name in ["s3_1tet", "s3_2tet", "s2xs1", "rp3", "lens:3:1", "lens:4:1", "lens:5:2", "t3_6tet"] {
            let t = builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            let c = t.classes();
            // closed 3-manifold: V - E + F - T = 0 with F = 2T
            let euler = c.vertex_count as i64 - c.edge_count as i64 + 2 * t.tet_count() as i64 - t.tet_count() as i64;
            assert_eq!(euler, 0, "{name}");
        }
        assert_eq!(builtin("s3_2tet").unwrap().classes().edge_count, 6);
        assert_eq!(builtin("t3_6tet").unwrap().classes().vertex_count, 1);
    }

    #[test]
    fn rejects_bad_input() {
        let r = Triangulation::from_json_str(r#"{"tetrahedra":1,"gluings":[[[0,0,[0,1,2,3]],[0,1,[0,1,2,3]],[0,2,[0,1,2,3]],[0,3,[0,1,2,3]]]]}"#);
        assert!(matches!(r, Err(TriangulationError::SelfGluing(0, 0))));
        assert!(matches!(Triangulation::from_json_str("{"), Err(TriangulationError::Parse(_))));
        let r = Triangulation::from_json_str(r#"{"tetrahedra":1,"gluings":[[[3,0,[0,1,2,3]],[0,1,[0,1,2,3]],[0,2,[0,1,2,3]],[0,3,[0,1,2,3]]]]}"#);
        assert!(matches!(r, Err(TriangulationError::OutOfRange(_))));
    }

    #[test]
    fn json_round_trip() {
        let t = builtin("s2xs1").unwrap();
        assert_eq!(Triangulation::from_json_str(&t.to_json().to_string()).unwrap(), t);
    }
}
