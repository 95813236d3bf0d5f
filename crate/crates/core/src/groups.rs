//! Finite groups, normalized cochains with root-of-unity values, the ω_α
//! cocycle, central extensions and module-category parameters (S, ψ).

use crate::zmod;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("malformed group descriptor: {0}")]
    Descriptor(String),
    #[error("table is not a group: {0}")]
    NotAGroup(String),
    #[error("not a cocycle: failing arguments {0:?}")]
    NotACocycle(Vec<usize>),
    #[error("q_exp {q} is not coprime to n = {n}")]
    NotPrimitive { n: u32, q: i64 },
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub table: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::NotAGroup("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(GroupError::NotAGroup(format!("row {i} malformed")));
            }
        }
        for g in 0..n {
            if table[0][g] != g || table[g][0] != g {
                return Err(GroupError::NotAGroup(format!("0 is not an identity at {g}")));
            }
        }
        let mut inv = vec![usize::MAX; n];
        for g in 0..n {
            match (0..n).find(|&h| table[g][h] == 0) {
                Some(h) if table[h][g] == 0 => inv[g] = h,
                _ => return Err(GroupError::NotAGroup(format!("{g} has no inverse"))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::NotAGroup(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { table, inv })
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    #[inline]
    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        FiniteGroup::from_table(table).expect("cyclic group")
    }

    /// Direct product; element (a, b) has index a·|H| + b.
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (n, m) = (g.order(), h.order());
        let mut table = vec![vec![0; n * m]; n * m];
        for a in 0..n * m {
            for b in 0..n * m {
                table[a][b] = g.mul(a / m, b / m) * m + h.mul(a % m, b % m);
            }
        }
        FiniteGroup::from_table(table).expect("product group")
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> usize {
        (0..self.order()).fold(1, |acc, g| acc.lcm(&self.element_order(g)))
    }

    /// Smallest subgroup containing `gens`, as a sorted element list.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut set: HashSet<usize> = HashSet::from([0]);
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        let mut v: Vec<usize> = set.into_iter().collect();
        v.sort();
        v
    }

    /// All subgroups, sorted by order and then lexicographically.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let mut found: HashSet<Vec<usize>> = HashSet::new();
        let mut queue = vec![vec![0usize]];
        found.insert(vec![0]);
        while let Some(s) = queue.pop() {
            for g in 0..self.order() {
                if s.binary_search(&g).is_ok() {
                    continue;
                }
                let mut gens = s.clone();
                gens.push(g);
                let t = self.generated(&gens);
                if found.insert(t.clone()) {
                    queue.push(t);
                }
            }
        }
        let mut v: Vec<Vec<usize>> = found.into_iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        v
    }

    /// A generating set of the subgroup `elems`, found greedily.
    pub fn generators_of(&self, elems: &[usize]) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut cur = vec![0usize];
        for &g in elems {
            if cur.binary_search(&g).is_err() {
                gens.push(g);
                cur = self.generated(&gens);
            }
        }
        gens
    }

    /// Parse a textual descriptor: `cyclic:n`, `product:A,B,..`, `table:[[..]]`, `heisenberg:n`.
    pub fn parse(desc: &str) -> Result<Self, GroupError> {
        let desc = desc.trim();
        let bad = || GroupError::Descriptor(desc.to_string());
        if let Some(n) = desc.strip_prefix("cyclic:") {
            let n: usize = n.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            return Ok(FiniteGroup::cyclic(n));
        }
        if let Some(rest) = desc.strip_prefix("product:") {
            let mut acc: Option<FiniteGroup> = None;
            for part in rest.split(',') {
                let g = FiniteGroup::parse(part)?;
                acc = Some(match acc {
                    None => g,
                    Some(a) => FiniteGroup::product(&a, &g),
                });
            }
            return acc.ok_or_else(bad);
        }
        if let Some(json) = desc.strip_prefix("table:") {
            let table: Vec<Vec<usize>> = serde_json::from_str(json).map_err(|_| bad())?;
            return FiniteGroup::from_table(table);
        }
        if let Some(n) = desc.strip_prefix("heisenberg:") {
            let n: usize = n.parse().map_err(|_| bad())?;
            if n < 2 {
                return Err(bad());
            }
            return Ok(heisenberg(n));
        }
        Err(bad())
    }
}

/// A normalized cochain of degree 2 or 3 with values ζ_R^e, stored as exponents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cochain {
    pub degree: usize,
    pub n: usize,
    pub modulus: u32,
    pub values: Vec<u32>,
}

impl Cochain {
    pub fn trivial(n: usize, degree: usize) -> Self {
        Cochain { degree, n, modulus: 1, values: vec![0; n.pow(degree as u32)] }
    }

    pub fn from_fn(n: usize, degree: usize, modulus: u32, mut f: impl FnMut(&[usize]) -> i64) -> Self {
        let mut values = Vec::with_capacity(n.pow(degree as u32));
        let mut args = vec![0usize; degree];
        for idx in 0..n.pow(degree as u32) {
            let mut r = idx;
            for k in (0..degree).rev() {
                args[k] = r % n;
                r /= n;
            }
            values.push(f(&args).rem_euclid(modulus as i64) as u32);
        }
        Cochain { degree, n, modulus, values }
    }

    #[inline]
    pub fn get2(&self, a: usize, b: usize) -> u32 {
        self.values[a * self.n + b]
    }

    #[inline]
    pub fn get3(&self, a: usize, b: usize, c: usize) -> u32 {
        self.values[(a * self.n + b) * self.n + c]
    }

    /// Same cochain with exponents rescaled to a multiple of the modulus.
    pub fn with_modulus(&self, m: u32) -> Self {
        assert!(m.is_multiple_of(self.modulus));
        let k = m / self.modulus;
        Cochain { degree: self.degree, n: self.n, modulus: m, values: self.values.iter().map(|v| v * k).collect() }
    }

    pub fn is_normalized(&self) -> bool {
        let n = self.n;
        (0..self.values.len()).all(|idx| {
            let mut r = idx;
            let mut has_id = false;
            for _ in 0..self.degree {
                has_id |= r % n == 0;
                r /= n;
            }
            !has_id || self.values[idx] == 0
        })
    }

    pub fn pow(&self, j: i64) -> Self {
        let m = self.modulus as i64;
        Cochain {
            degree: self.degree,
            n: self.n,
            modulus: self.modulus,
            values: self.values.iter().map(|&v| (v as i64 * j).rem_euclid(m) as u32).collect(),
        }
    }
}

/// (dψ)(a,b,c) = ψ(b,c) ψ(a,bc) / (ψ(ab,c) ψ(a,b)).
pub fn coboundary(g: &FiniteGroup, psi: &Cochain) -> Cochain {
    assert_eq!(psi.degree, 2);
    Cochain::from_fn(g.order(), 3, psi.modulus, |x| {
        let (a, b, c) = (x[0], x[1], x[2]);
        psi.get2(b, c) as i64 + psi.get2(a, g.mul(b, c)) as i64
            - psi.get2(g.mul(a, b), c) as i64
            - psi.get2(a, b) as i64
    })
}

/// First failing quadruple of the 3-cocycle identity, if any.
pub fn cocycle3_failure(g: &FiniteGroup, w: &Cochain) -> Option<Vec<usize>> {
    let n = g.order();
    let m = w.modulus as i64;
    for a in 1..n {
        for b in 1..n {
            let ab = g.mul(a, b);
            for c in 1..n {
                let bc = g.mul(b, c);
                for d in 1..n {
                    let lhs = w.get3(b, c, d) as i64 + w.get3(a, bc, d) as i64 + w.get3(a, b, c) as i64;
                    let rhs = w.get3(ab, c, d) as i64 + w.get3(a, b, g.mul(c, d)) as i64;
                    if (lhs - rhs).rem_euclid(m) != 0 {
                        return Some(vec![a, b, c, d]);
                    }
                }
            }
        }
    }
    None
}

pub fn is_cocycle3(g: &FiniteGroup, w: &Cochain) -> bool {
    w.degree == 3 && w.is_normalized() && cocycle3_failure(g, w).is_none()
}

/// ω(x,y,z) = q^{x₁ y₂ z₃} on (Z/n)³, q = ζ_n^{q_exp}. Element index is (x₁ n + x₂) n + x₃.
pub fn omega_alpha(n: u32, q_exp: i64) -> Result<(FiniteGroup, Cochain), GroupError> {
    if (q_exp.rem_euclid(n as i64)).gcd(&(n as i64)) != 1 {
        return Err(GroupError::NotPrimitive { n, q: q_exp });
    }
    let c = FiniteGroup::cyclic(n as usize);
    let g = FiniteGroup::product(&FiniteGroup::product(&c, &c), &c);
    let nn = n as usize;
    let coord = |x: usize, i: usize| -> i64 { ((x / nn.pow(2 - i as u32)) % nn) as i64 };
    let w = Cochain::from_fn(g.order(), 3, n, |x| q_exp * coord(x[0], 0) * coord(x[1], 1) * coord(x[2], 2));
    Ok((g, w))
}

/// Parse a 3-cocycle descriptor for `g`: `trivial`, `omega_alpha:n:q`, or
/// JSON (`{"type":"omega_alpha","n":..,"q_exp":..}` or
/// `{"modulus":m,"values":[..]}` with |G|³ exponents). Rejects non-cocycles.
pub fn parse_cocycle(g: &FiniteGroup, desc: &str) -> Result<Cochain, GroupError> {
    let desc = desc.trim();
    let bad = || GroupError::Descriptor(desc.to_string());
    let alpha = |n: u32, q: i64| -> Result<Cochain, GroupError> {
        let (ga, w) = omega_alpha(n, q)?;
        if ga.table != g.table {
            return Err(GroupError::Descriptor(format!("omega_alpha:{n} needs the group product:cyclic:{n},cyclic:{n},cyclic:{n}")));
        }
        Ok(w)
    };
    let w = if desc == "trivial" {
        Cochain::trivial(g.order(), 3)
    } else if let Some(rest) = desc.strip_prefix("omega_alpha:") {
        let (n, q) = rest.split_once(':').ok_or_else(bad)?;
        alpha(n.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?)?
    } else {
        let v: serde_json::Value = serde_json::from_str(desc).map_err(|_| bad())?;
        if v.get("type").and_then(|t| t.as_str()) == Some("omega_alpha") {
            let n = v.get("n").and_then(|x| x.as_u64()).ok_or_else(bad)?;
            let q = v.get("q_exp").and_then(|x| x.as_i64()).unwrap_or(1);
            alpha(n as u32, q)?
        } else {
            let modulus = v.get("modulus").and_then(|x| x.as_u64()).filter(|&m| m > 0).ok_or_else(bad)? as u32;
            let values: Vec<u32> = serde_json::from_value(v.get("values").cloned().ok_or_else(bad)?).map_err(|_| bad())?;
            if values.len() != g.order().pow(3) {
                return Err(bad());
            }
            Cochain { degree: 3, n: g.order(), modulus, values: values.into_iter().map(|x| x % modulus).collect() }
        }
    };
    if let Some(f) = cocycle3_failure(g, &w) {
        return Err(GroupError::NotACocycle(f));
    }
    if !w.is_normalized() {
        return Err(GroupError::Descriptor("cocycle is not normalized".into()));
    }
    Ok(w)
}

/// Characters of an abelian group B as homomorphisms B → Z/exp(B); returned
/// as value tables, indexed consistently with the group built by
/// `character_group`.
pub fn characters(b: &FiniteGroup) -> Vec<Vec<usize>> {
    let e = b.exponent();
    let gens = b.generators_of(&(0..b.order()).collect::<Vec<_>>());
    let mut out = Vec::new();
    let total = e.pow(gens.len() as u32);
    for code in 0..total {
        let mut vals = Vec::new();
        let mut r = code;
        for _ in &gens {
            vals.push(r % e);
            r /= e;
        }
        // propagate along words in the generators and check consistency
        let mut chi = vec![usize::MAX; b.order()];
        chi[0] = 0;
        let mut stack = vec![0usize];
        let mut ok = true;
        while let Some(x) = stack.pop() {
            for (k, &g) in gens.iter().enumerate() {
                let y = b.mul(x, g);
                let v = (chi[x] + vals[k]) % e;
                if chi[y] == usize::MAX {
                    chi[y] = v;
                    stack.push(y);
                } else if chi[y] != v {
                    ok = false;
                }
            }
        }
        if ok {
            out.push(chi);
        }
    }
    out.sort();
    out
}

/// The central extension B̂ ×_α A with (χ, a)(χ′, a′) = (χχ′α(a, a′), aa′).
/// `alpha[a][a']` is an index into `characters(b)`. Element (χ, a) has index χ·|A| + a.
pub fn central_extension(a: &FiniteGroup, b: &FiniteGroup, alpha: &[Vec<usize>]) -> Result<FiniteGroup, GroupError> {
    if !a.is_abelian() || !b.is_abelian() {
        return Err(GroupError::Unsupported("central_extension needs abelian A and B".into()));
    }
    let chars = characters(b);
    let e = b.exponent();
    let idx = |v: &Vec<usize>| chars.iter().position(|c| c == v).expect("character");
    let cmul = |x: usize, y: usize| -> usize {
        let v: Vec<usize> = chars[x].iter().zip(&chars[y]).map(|(p, q)| (p + q) % e).collect();
        idx(&v)
    };
    let na = a.order();
    for x in 0..na {
        for y in 0..na {
            for z in 0..na {
                let l = cmul(alpha[x][y], alpha[a.mul(x, y)][z]);
                let r = cmul(alpha[y][z], alpha[x][a.mul(y, z)]);
                if l != r {
                    return Err(GroupError::NotACocycle(vec![x, y, z]));
                }
            }
        }
    }
    let nc = chars.len();
    let mut table = vec![vec![0; nc * na]; nc * na];
    for p in 0..nc * na {
        for q in 0..nc * na {
            let (c1, a1) = (p / na, p % na);
            let (c2, a2) = (q / na, q % na);
            let c = cmul(cmul(c1, c2), alpha[a1][a2]);
            table[p][q] = c * na + a.mul(a1, a2);
        }
    }
    // normalization of alpha makes (0,0) the identity
    FiniteGroup::from_table(table)
}

/// The extension of (Z/n)² by Ẑ/n with α((m₁,m₂),(n₁,n₂)) = χ^{m₁ n₂}.
pub fn heisenberg(n: usize) -> FiniteGroup {
    let c = FiniteGroup::cyclic(n);
    let a = FiniteGroup::product(&c, &c);
    let chars = characters(&c);
    // χ^j is the character sending 1 ↦ j
    let chi_pow = |j: usize| chars.iter().position(|ch| ch[1] == j % n).expect("character");
    let alpha: Vec<Vec<usize>> =
        (0..n * n).map(|x| (0..n * n).map(|y| chi_pow((x / n) * (y % n))).collect()).collect();
    central_extension(&a, &c, &alpha).expect("heisenberg extension")
}

/// A subgroup with its own indexing: `elems[i]` is the G-index of local element i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    pub elems: Vec<usize>,
}

impl Subgroup {
    pub fn new(elems: Vec<usize>) -> Self {
        Subgroup { elems }
    }
    pub fn order(&self) -> usize {
        self.elems.len()
    }
    pub fn local(&self, g: usize) -> Option<usize> {
        self.elems.binary_search(&g).ok()
    }
    pub fn contains(&self, g: usize) -> bool {
        self.local(g).is_some()
    }
    /// Multiplication table in local indices.
    pub fn as_group(&self, g: &FiniteGroup) -> FiniteGroup {
        let t = self
            .elems
            .iter()
            .map(|&a| self.elems.iter().map(|&b| self.local(g.mul(a, b)).expect("closed")).collect())
            .collect();
        FiniteGroup::from_table(t).expect("subgroup")
    }
}

/// Restrict a degree-3 cochain to a subgroup (local indexing).
pub fn restrict3(w: &Cochain, s: &Subgroup) -> Cochain {
    let e = &s.elems;
    Cochain::from_fn(s.order(), 3, w.modulus, |x| w.get3(e[x[0]], e[x[1]], e[x[2]]) as i64)
}

fn d2_system(h: &FiniteGroup) -> (Vec<Vec<i64>>, Vec<(usize, usize, usize)>) {
    let n = h.order();
    let var = |a: usize, b: usize| -> Option<usize> {
        if a == 0 || b == 0 {
            None
        } else {
            Some((a - 1) * (n - 1) + (b - 1))
        }
    };
    let cols = (n - 1) * (n - 1);
    let mut rows = Vec::new();
    let mut args = Vec::new();
    for a in 1..n {
        for b in 1..n {
            for c in 1..n {
                let mut row = vec![0i64; cols];
                let mut add = |v: Option<usize>, s: i64| {
                    if let Some(i) = v {
                        row[i] += s;
                    }
                };
                add(var(b, c), 1);
                add(var(a, h.mul(b, c)), 1);
                add(var(h.mul(a, b), c), -1);
                add(var(a, b), -1);
                rows.push(row);
                args.push((a, b, c));
            }
        }
    }
    (rows, args)
}

fn cochain2_from_vars(n: usize, modulus: u32, x: &[i64]) -> Cochain {
    Cochain::from_fn(n, 2, modulus, |a| if a[0] == 0 || a[1] == 0 { 0 } else { x[(a[0] - 1) * (n - 1) + a[1] - 1] })
}

/// Solve dψ = w on the group h with ψ valued in μ_modulus. Returns a
/// particular solution and generators of the 2-cocycles.
pub fn solve_d2(h: &FiniteGroup, w: &Cochain, modulus: u32) -> Option<(Cochain, Vec<Cochain>)> {
    let n = h.order();
    if n == 1 {
        return Some((Cochain::trivial(1, 2).with_modulus(modulus), vec![]));
    }
    let w = w.with_modulus(modulus);
    let (rows, args) = d2_system(h);
    let b: Vec<i64> = args.iter().map(|&(a, bb, c)| w.get3(a, bb, c) as i64).collect();
    let sol = zmod::solve(&rows, &b, (n - 1) * (n - 1), modulus as i64)?;
    Some((
        cochain2_from_vars(n, modulus, &sol.particular),
        sol.kernel.iter().map(|k| cochain2_from_vars(n, modulus, k)).collect(),
    ))
}

/// Solve λ(a)λ(b)/λ(ab) = c(a,b) with λ valued in μ_modulus; returns all
/// solutions (λ as exponent tables, λ(e) = 0), up to `limit` of them.
pub fn solve_d1(h: &FiniteGroup, c: &Cochain, modulus: u32, limit: usize) -> Vec<Vec<i64>> {
    let n = h.order();
    if n == 1 {
        return vec![vec![0]];
    }
    if !modulus.is_multiple_of(c.modulus) {
        return vec![];
    }
    let c = c.with_modulus(modulus);
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for a in 1..n {
        for bb in 1..n {
            let mut row = vec![0i64; n - 1];
            row[a - 1] += 1;
            row[bb - 1] += 1;
            let ab = h.mul(a, bb);
            if ab != 0 {
                row[ab - 1] -= 1;
            }
            rows.push(row);
            b.push(c.get2(a, bb) as i64);
        }
    }
    let Some(sol) = zmod::solve(&rows, &b, n - 1, modulus as i64) else { return vec![] };
    zmod::span_elements(&sol.kernel, n - 1, modulus as i64, limit)
        .into_iter()
        .map(|k| {
            let mut lam = vec![0i64];
            lam.extend(k.iter().zip(&sol.particular).map(|(x, p)| (x + p).rem_euclid(modulus as i64)));
            lam
        })
        .collect()
}

/// Is the 2-cocycle c a coboundary over C^× (tested with values in μ_{R·exp}).
pub fn is_coboundary2(h: &FiniteGroup, c: &Cochain) -> bool {
    let m = c.modulus * h.exponent() as u32;
    !solve_d1(h, c, m, 1).is_empty()
}

/// Is the 3-cocycle w a coboundary over C^× (tested with values in μ_{R·|G|}).
pub fn is_coboundary3(h: &FiniteGroup, w: &Cochain) -> bool {
    let m = w.modulus * h.order() as u32;
    solve_d2(h, w, m).is_some()
}

/// Parameters (S, ψ) of an indecomposable module category over Vec_G^ω.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleCatParams {
    pub subgroup: Subgroup,
    /// ψ on S in local indexing.
    pub psi: Cochain,
    pub class_id: usize,
}

/// Left cosets xS of S in G with chosen representatives.
#[derive(Debug, Clone)]
pub struct Cosets {
    pub reps: Vec<usize>,
    /// coset index of each element of G
    pub of: Vec<usize>,
}

impl Cosets {
    pub fn new(g: &FiniteGroup, s: &Subgroup) -> Self {
        let mut of = vec![usize::MAX; g.order()];
        let mut reps = Vec::new();
        for x in 0..g.order() {
            if of[x] == usize::MAX {
                let k = reps.len();
                reps.push(x);
                for &t in &s.elems {
                    of[g.mul(x, t)] = k;
                }
            }
        }
        Cosets { reps, of }
    }
    pub fn len(&self) -> usize {
        self.reps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

/// Module associator of M(S, ψ): exponent table μ(a, b, x) for a, b ∈ G and
/// cosets x, satisfying ω(a,b,c) μ(a,bc,x) μ(b,c,x) = μ(ab,c,x) μ(a,b,cx).
#[derive(Debug, Clone)]
pub struct ModuleAssociator {
    pub cosets: Cosets,
    pub modulus: u32,
    /// index (a·n + b)·k + x
    pub mu: Vec<u32>,
    /// action on cosets: act[a][x]
    pub act: Vec<Vec<usize>>,
}

impl ModuleAssociator {
    #[inline]
    pub fn get(&self, n: usize, a: usize, b: usize, x: usize) -> u32 {
        self.mu[(a * n + b) * self.cosets.len() + x]
    }
}

pub fn module_associator(g: &FiniteGroup, w: &Cochain, p: &ModuleCatParams) -> ModuleAssociator {
    let s = &p.subgroup;
    let cos = Cosets::new(g, s);
    let n = g.order();
    let k = cos.len();
    let modulus = w.modulus.lcm(&p.psi.modulus);
    let w = w.with_modulus(modulus);
    let psi = p.psi.with_modulus(modulus);
    let act: Vec<Vec<usize>> = (0..n).map(|a| (0..k).map(|x| cos.of[g.mul(a, cos.reps[x])]).collect()).collect();
    // a·r(x) = r(ax)·κ(a,x)
    let kappa = |a: usize, x: usize| -> usize {
        let ax = act[a][x];
        g.mul(g.inverse(cos.reps[ax]), g.mul(a, cos.reps[x]))
    };
    let loc = |t: usize| s.local(t).expect("kappa in S");
    let m = modulus as i64;
    let mut mu = vec![0u32; n * n * k];
    for a in 0..n {
        for b in 0..n {
            for x in 0..k {
                let bx = act[b][x];
                let abx = act[a][bx];
                let k_b = kappa(b, x);
                let k_a = kappa(a, bx);
                let e = w.get3(a, b, cos.reps[x]) as i64 - w.get3(a, cos.reps[bx], k_b) as i64
                    + w.get3(cos.reps[abx], k_a, k_b) as i64
                    - psi.get2(loc(k_a), loc(k_b)) as i64;
                mu[(a * n + b) * k + x] = e.rem_euclid(m) as u32;
            }
        }
    }
    ModuleAssociator { cosets: cos, modulus, mu, act }
}

/// First failing (a,b,c,x) of the module pentagon.
pub fn module_pentagon_failure(g: &FiniteGroup, w: &Cochain, ma: &ModuleAssociator) -> Option<(usize, usize, usize, usize)> {
    let n = g.order();
    let m = ma.modulus.lcm(&w.modulus);
    let w = w.with_modulus(m);
    let sc = (m / ma.modulus) as i64;
    let mu = |a, b, x| ma.get(n, a, b, x) as i64 * sc;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for x in 0..ma.cosets.len() {
                    let lhs = w.get3(a, b, c) as i64 + mu(a, g.mul(b, c), x) + mu(b, c, x);
                    let rhs = mu(g.mul(a, b), c, x) + mu(a, b, ma.act[c][x]);
                    if (lhs - rhs).rem_euclid(m as i64) != 0 {
                        return Some((a, b, c, x));
                    }
                }
            }
        }
    }
    None
}

/// Is there an invertible module functor M(p1) → M(p2)?
pub fn module_cats_equivalent(g: &FiniteGroup, w: &Cochain, p1: &ModuleCatParams, p2: &ModuleCatParams) -> bool {
    if p1.subgroup.order() != p2.subgroup.order() {
        return false;
    }
    let m1 = module_associator(g, w, p1);
    let m2 = module_associator(g, w, p2);
    let n = g.order();
    let s1 = &p1.subgroup;
    let modulus = m1.modulus.lcm(&m2.modulus);
    let (k1, k2) = (modulus / m1.modulus, modulus / m2.modulus);
    // equivariant bijections send eS1 to a coset y with stabilizer S1
    for y in 0..m2.cosets.len() {
        if !s1.elems.iter().all(|&h| m2.act[h][y] == y) {
            continue;
        }
        let h = s1.as_group(g);
        let c = Cochain::from_fn(s1.order(), 2, modulus, |x| {
            let (a, b) = (s1.elems[x[0]], s1.elems[x[1]]);
            m2.get(n, a, b, y) as i64 * k2 as i64 - m1.get(n, a, b, 0) as i64 * k1 as i64
        });
        if is_coboundary2(&h, &c) {
            return true;
        }
    }
    false
}

/// The exponent modulus used for ψ on subgroups.
pub fn psi_modulus(g: &FiniteGroup, w: &Cochain) -> u32 {
    let base = if g.is_abelian() { g.exponent() } else { g.order() };
    w.modulus * base as u32
}

/// One representative (S, ψ) per equivalence class of indecomposable module
/// categories over Vec_G^ω. The regular module ({e}, 1) comes first.
pub fn module_cat_params(g: &FiniteGroup, w: &Cochain) -> Result<Vec<ModuleCatParams>, GroupError> {
    if g.order() > 16 {
        return Err(GroupError::Unsupported(format!("classifier limited to |G| <= 16, got {}", g.order())));
    }
    module_cat_params_ordered(g, w, &g.subgroups())
}

pub fn module_cat_params_ordered(
    g: &FiniteGroup,
    w: &Cochain,
    subgroups: &[Vec<usize>],
) -> Result<Vec<ModuleCatParams>, GroupError> {
    let modulus = psi_modulus(g, w);
    let mut out: Vec<ModuleCatParams> = Vec::new();
    let mut subs = subgroups.to_vec();
    subs.sort_by_key(|s| s.len());
    for elems in subs {
        let s = Subgroup::new(elems);
        let h = s.as_group(g);
        let ws = restrict3(w, &s);
        let Some((psi0, gens)) = solve_d2(&h, &ws, modulus) else { continue };
        // classes of ψ0·Z² modulo coboundaries, by closure under generators
        let mut reps: Vec<Cochain> = vec![psi0];
        let mut i = 0;
        while i < reps.len() {
            let cur = reps[i].clone();
            for z in &gens {
                let cand = Cochain {
                    degree: 2,
                    n: cur.n,
                    modulus,
                    values: cur.values.iter().zip(&z.values).map(|(a, b)| (a + b) % modulus).collect(),
                };
                let known = reps.iter().any(|r| {
                    let diff = Cochain::from_fn(cur.n, 2, modulus, |x| {
                        cand.get2(x[0], x[1]) as i64 - r.get2(x[0], x[1]) as i64
                    });
                    is_coboundary2(&h, &diff)
                });
                if !known {
                    reps.push(cand);
                }
            }
            i += 1;
        }
        for psi in reps {
            let p = ModuleCatParams { subgroup: s.clone(), psi, class_id: 0 };
            if !out.iter().any(|q| module_cats_equivalent(g, w, q, &p)) {
                out.push(p);
            }
        }
    }
    for (i, p) in out.iter_mut().enumerate() {
        p.class_id = i;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn build_groups() {
        let g = FiniteGroup::parse("cyclic:2").unwrap();
        assert_eq!(g.table, vec![vec![0, 1], vec![1, 0]]);
        let k = FiniteGroup::parse("product:cyclic:2,cyclic:2").unwrap();
        assert_eq!((k.order(), k.exponent()), (4, 2));
        let h = FiniteGroup::parse("heisenberg:2").unwrap();
        assert_eq!(h.order(), 8);
        assert!(!h.is_abelian());
        assert!(FiniteGroup::parse("table:[[0,1],[1,1]]").is_err());
        assert!(FiniteGroup::parse("bogus").is_err());
    }

    #[test]
    fn cochain_identities() {
        let g = FiniteGroup::parse("product:cyclic:2,cyclic:2").unwrap();
        assert!(coboundary(&g, &Cochain::trivial(4, 2)).values.iter().all(|&v| v == 0));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = Cochain::from_fn(4, 2, 4, |x| if x[0] == 0 || x[1] == 0 { 0 } else { rng.gen_range(0..4) });
            assert!(is_cocycle3(&g, &coboundary(&g, &c)));
        }
        let (g8, w) = omega_alpha(2, 1).unwrap();
        assert!(is_cocycle3(&g8, &w));
        assert_eq!(w.get3(4, 2, 1), 1);
        assert_eq!(w.get3(0, 7, 7), 0);
        assert!(omega_alpha(4, 2).is_err());
    }

    #[test]
    fn omega_alpha_has_order_n() {
        for n in 2..=3u32 {
            let (g, w) = omega_alpha(n, 1).unwrap();
            for j in 1..=n as i64 {
                assert_eq!(is_coboundary3(&g, &w.pow(j)), j % n as i64 == 0, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn central_extensions() {
        let a = FiniteGroup::parse("product:cyclic:2,cyclic:2").unwrap();
        let b = FiniteGroup::cyclic(2);
        let trivial = vec![vec![0; 4]; 4];
        let e = central_extension(&a, &b, &trivial).unwrap();
        assert!(e.is_abelian() && e.order() == 8);
    }

    #[test]
    fn module_pentagons_hold() {
        let (g, w) = omega_alpha(2, 1).unwrap();
        for s in g.subgroups() {
            let sub = Subgroup::new(s);
            let h = sub.as_group(&g);
            if let Some((psi, _)) = solve_d2(&h, &restrict3(&w, &sub), psi_modulus(&g, &w)) {
                let p = ModuleCatParams { subgroup: sub, psi, class_id: 0 };
                let ma = module_associator(&g, &w, &p);
                assert_eq!(module_pentagon_failure(&g, &w, &ma), None);
            }
        }
    }

    #[test]
    fn class_counts() {
        let count = |desc: &str| {
            let g = FiniteGroup::parse(desc).unwrap();
            module_cat_params(&g, &Cochain::trivial(g.order(), 3)).unwrap().len()
        };
        assert_eq!(count("cyclic:2"), 2);
        assert_eq!(count("product:cyclic:2,cyclic:2"), 6);
        assert_eq!(count("cyclic:3"), 2);
        assert_eq!(count("cyclic:4"), 3);
        let g = FiniteGroup::parse("product:cyclic:2,cyclic:2").unwrap();
        let mut subs = g.subgroups();
        subs.reverse();
        let w = Cochain::trivial(4, 3);
        assert_eq!(module_cat_params_ordered(&g, &w, &subs).unwrap().len(), 6);
    }
}
