//! Brute-force count of homomorphisms π₁(M) → G from a triangulation.
//!
//! Generators are the face pairings of the dual graph, relations are the
//! cycles of faces around each edge. Face pairings on a spanning tree are
//! gauge-fixed to the identity so that flat assignments correspond exactly
//! to homomorphisms.

use crate::groups::FiniteGroup;
use crate::triangulation::Triangulation;
use num_rational::BigRational;

/// Cycles of (tet, face) exits around every edge of the triangulation.
pub fn edge_cycles(tri: &Triangulation) -> Vec<Vec<(usize, usize)>> {
    let n = tri.tet_count();
    let mut done = vec![false; 16 * n];
    let mut out = Vec::new();
    for t in 0..n {
        for a in 0..4 {
            for b in 0..4 {
                if a == b || done[16 * t + 4 * a + b] {
                    continue;
                }
                let rest: Vec<usize> = (0..4).filter(|&x| x != a && x != b).collect();
                let (mut tt, mut aa, mut bb, mut c, mut d) = (t, a, b, rest[0], rest[1]);
                let mut cyc = Vec::new();
                loop {
                    done[16 * tt + 4 * aa + bb] = true;
                    cyc.push((tt, c));
                    let (t2, _, p) = tri.gluings[tt][c];
                    (tt, aa, bb, c, d) = (t2, p[aa], p[bb], p[d], p[c]);
                    if (tt, aa, bb, c) == (t, a, b, rest[0]) {
                        break;
                    }
                }
                out.push(cyc);
            }
        }
    }
    out
}

pub fn hom_count(tri: &Triangulation, g: &FiniteGroup) -> u64 {
    let n = tri.tet_count();
    // variable index for each face pair; tree pairs fixed to identity
    let mut var = vec![usize::MAX; 4 * n];
    let mut inverted = vec![false; 4 * n];
    let mut fixed = vec![false; 4 * n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(t) = stack.pop() {
        for f in 0..4 {
            let (t2, f2, _) = tri.gluings[t][f];
            if !seen[t2] {
                seen[t2] = true;
                fixed[4 * t + f] = true;
                fixed[4 * t2 + f2] = true;
                stack.push(t2);
            }
        }
    }
    let mut nvars = 0;
    for t in 0..n {
        for f in 0..4 {
            let i = 4 * t + f;
            if fixed[i] || var[i] != usize::MAX {
                continue;
            }
            let (t2, f2, _) = tri.gluings[t][f];
            var[i] = nvars;
            var[4 * t2 + f2] = nvars;
            inverted[4 * t2 + f2] = true;
            nvars += 1;
        }
    }
    let cycles: Vec<Vec<(usize, bool)>> = edge_cycles(tri)
        .into_iter()
        .map(|c| {
            c.into_iter()
                .filter(|&(t, f)| !fixed[4 * t + f])
                .map(|(t, f)| (var[4 * t + f], inverted[4 * t + f]))
                .collect()
        })
        .collect();
    // a relation can be checked once its largest variable is assigned
    let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); nvars.max(1)];
    for (i, c) in cycles.iter().enumerate() {
        if let Some(m) = c.iter().map(|x| x.0).max() {
            by_last[m].push(i);
        }
    }
    let mut vals = vec![0usize; nvars];
    fn rec(
        k: usize,
        vals: &mut Vec<usize>,
        g: &FiniteGroup,
        cycles: &[Vec<(usize, bool)>],
        by_last: &[Vec<usize>],
    ) -> u64 {
        if k == vals.len() {
            return 1;
        }
        let mut total = 0;
        for x in 0..g.order() {
            vals[k] = x;
            let ok = by_last[k].iter().all(|&ci| {
                let h = cycles[ci].iter().fold(0, |acc, &(v, inv)| {
                    let y = if inv { g.inverse(vals[v]) } else { vals[v] };
                    g.mul(acc, y)
                });
                h == 0
            });
            if ok {
                total += rec(k + 1, vals, g, cycles, by_last);
            }
        }
        total
    }
    rec(0, &mut vals, g, &cycles, &by_last)
}

/// |Hom(π₁(M), G)| / |G|.
pub fn tv_oracle(tri: &Triangulation, g: &FiniteGroup) -> BigRational {
    BigRational::new((hom_count(tri, g) as i64).into(), (g.order() as i64).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::builtin;

    #[test]
    fn known_fundamental_groups() {
        let z2 = FiniteGroup::cyclic(2);
        let z3 = FiniteGroup::cyclic(3);
        let z4 = FiniteGroup::cyclic(4);
        let k4 = FiniteGroup::parse("product:cyclic:2,cyclic:2").unwrap();
        let count = |m: &str, g: &FiniteGroup| hom_count(&builtin(m).unwrap(), g);
        for m in ["s3_1tet", "s3_2tet"] {
            assert_eq!(count(m, &z2), 1);
            assert_eq!(count(m, &z3), 1);
        }
        assert_eq!(count("s2xs1", &z3), 3);
        assert_eq!(count("s2xs1", &k4), 4);
        assert_eq!(count("rp3", &z2), 2);
        assert_eq!(count("rp3", &z3), 1);
        assert_eq!(count("lens:3:1", &z3), 3);
        assert_eq!(count("lens:4:1", &z4), 4);
        assert_eq!(count("lens:4:1", &z2), 2);
        assert_eq!(count("t3_6tet", &z2), 8);
        assert_eq!(count("t3_6tet", &k4), 64);
        // heisenberg(2) is dihedral of order 8: 2·5·8 + 6·4·4 commuting triples
        assert_eq!(count("t3_6tet", &FiniteGroup::parse("heisenberg:2").unwrap()), 176);
    }
}
