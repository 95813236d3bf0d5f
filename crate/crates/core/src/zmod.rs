//! Linear systems over Z/N by diagonalisation with unimodular row and
//! column operations.

use num_integer::Integer;

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, s, t) = ext_gcd(b, a.rem_euclid(b));
        (g, t, s - (a.div_euclid(b)) * t)
    }
}

/// Solve `a·m ≡ b (mod n)` for m, if possible.
pub fn div_mod(a: i64, b: i64, n: i64) -> Option<i64> {
    let a = a.rem_euclid(n);
    let b = b.rem_euclid(n);
    let g = a.gcd(&n);
    if b % g != 0 {
        return None;
    }
    let n2 = n / g;
    if n2 == 1 {
        return Some(0);
    }
    let (_, s, _) = ext_gcd(a / g, n2);
    Some(((b / g) % n2 * s.rem_euclid(n2)).rem_euclid(n2))
}

/// Solution set of `A x ≡ b (mod n)`: one particular solution plus
/// generators of the solution module of the homogeneous system.
#[derive(Debug, Clone)]
pub struct Solution {
    pub particular: Vec<i64>,
    pub kernel: Vec<Vec<i64>>,
}

/// `rows` is a dense matrix with `cols` columns.
pub fn solve(rows: &[Vec<i64>], b: &[i64], cols: usize, n: i64) -> Option<Solution> {
    let r = rows.len();
    let mut a: Vec<Vec<i64>> = rows.iter().map(|row| row.iter().map(|x| x.rem_euclid(n)).collect()).collect();
    let mut rhs: Vec<i64> = b.iter().map(|x| x.rem_euclid(n)).collect();
    // v tracks column operations: x = v·y
    let mut v: Vec<Vec<i64>> = (0..cols).map(|i| (0..cols).map(|j| (i == j) as i64).collect()).collect();
    let mut diag = Vec::new();
    let mut k = 0;
    while k < r.min(cols) {
        // pick the pivot with the smallest gcd against n
        let mut best: Option<(i64, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, &x) in row.iter().enumerate().skip(k) {
                if x != 0 {
                    let g = x.gcd(&n);
                    if best.is_none_or(|(bg, _, _)| g < bg) {
                        best = Some((g, i, j));
                    }
                }
            }
            if matches!(best, Some((1, _, _))) {
                break;
            }
        }
        let Some((_, pi, pj)) = best else { break };
        a.swap(k, pi);
        rhs.swap(k, pi);
        if pj != k {
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            for row in v.iter_mut() {
                row.swap(k, pj);
            }
        }
        loop {
            let mut dirty = false;
            for i in (k + 1)..r {
                let x = a[i][k];
                if x == 0 {
                    continue;
                }
                let p = a[k][k];
                if let Some(m) = div_mod(p, x, n) {
                    for j in k..cols {
                        a[i][j] = (a[i][j] - m * a[k][j]).rem_euclid(n);
                    }
                    rhs[i] = (rhs[i] - m * rhs[k]).rem_euclid(n);
                } else {
                    let (g, s, t) = ext_gcd(p, x);
                    let (pg, xg) = (p / g, x / g);
                    for j in k..cols {
                        let (u, w) = (a[k][j], a[i][j]);
                        a[k][j] = (s * u + t * w).rem_euclid(n);
                        a[i][j] = (-xg * u + pg * w).rem_euclid(n);
                    }
                    let (u, w) = (rhs[k], rhs[i]);
                    rhs[k] = (s * u + t * w).rem_euclid(n);
                    rhs[i] = (-xg * u + pg * w).rem_euclid(n);
                }
            }
            for j in (k + 1)..cols {
                let x = a[k][j];
                if x == 0 {
                    continue;
                }
                let p = a[k][k];
                if let Some(m) = div_mod(p, x, n) {
                    for i in k..r {
                        a[i][j] = (a[i][j] - m * a[i][k]).rem_euclid(n);
                    }
                    for row in v.iter_mut() {
                        row[j] = (row[j] - m * row[k]).rem_euclid(n);
                    }
                } else {
                    dirty = true;
                    let (g, s, t) = ext_gcd(p, x);
                    let (pg, xg) = (p / g, x / g);
                    for i in k..r {
                        let (u, w) = (a[i][k], a[i][j]);
                        a[i][k] = (s * u + t * w).rem_euclid(n);
                        a[i][j] = (-xg * u + pg * w).rem_euclid(n);
                    }
                    for row in v.iter_mut() {
                        let (u, w) = (row[k], row[j]);
                        row[k] = (s * u + t * w).rem_euclid(n);
                        row[j] = (-xg * u + pg * w).rem_euclid(n);
                    }
                }
            }
            if !dirty && (k + 1..r).all(|i| a[i][k] == 0) {
                break;
            }
        }
        diag.push(a[k][k]);
        k += 1;
    }
    let rank = diag.len();
    for &c in rhs.iter().skip(rank) {
        if c != 0 {
            return None;
        }
    }
    let mut y = vec![0i64; cols];
    let mut ygens = Vec::new();
    for (i, &d) in diag.iter().enumerate() {
        y[i] = div_mod(d, rhs[i], n)?;
        let g = d.gcd(&n);
        if g != n {
            let mut e = vec![0i64; cols];
            e[i] = n / g;
            ygens.push(e);
        }
    }
    for i in rank..cols {
        let mut e = vec![0i64; cols];
        e[i] = 1;
        ygens.push(e);
    }
    let apply = |y: &[i64]| -> Vec<i64> {
        (0..cols).map(|i| (0..cols).map(|j| v[i][j] * y[j]).sum::<i64>().rem_euclid(n)).collect()
    };
    Some(Solution {
        particular: apply(&y),
        kernel: ygens.iter().map(|g| apply(g)).filter(|g| g.iter().any(|&x| x != 0)).collect(),
    })
}

/// All elements of the submodule of (Z/n)^k generated by `gens` (small cases only).
pub fn span_elements(gens: &[Vec<i64>], len: usize, n: i64, limit: usize) -> Vec<Vec<i64>> {
    let mut seen = std::collections::HashSet::new();
    let zero = vec![0i64; len];
    let mut out = vec![zero.clone()];
    seen.insert(zero);
    let mut i = 0;
    while i < out.len() && out.len() < limit {
        let cur = out[i].clone();
        for g in gens {
            let nxt: Vec<i64> = cur.iter().zip(g).map(|(a, b)| (a + b).rem_euclid(n)).collect();
            if seen.insert(nxt.clone()) {
                out.push(nxt);
            }
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(rows: &[Vec<i64>], x: &[i64], b: &[i64], n: i64) -> bool {
        rows.iter().zip(b).all(|(row, &bi)| {
            (row.iter().zip(x).map(|(a, x)| a * x).sum::<i64>() - bi).rem_euclid(n) == 0
        })
    }

    #[test]
    fn small_systems() {
        let rows = vec![vec![2, 3], vec![4, 0]];
        let sol = solve(&rows, &[1, 2], 2, 6).unwrap();
        assert!(check(&rows, &sol.particular, &[1, 2], 6));
        for k in &sol.kernel {
            assert!(check(&rows, k, &[0, 0], 6));
        }
        assert!(solve(&[vec![2]], &[1], 1, 4).is_none());
        let s = solve(&[vec![2]], &[0], 1, 4).unwrap();
        assert_eq!(span_elements(&s.kernel, 1, 4, 100).len(), 2);
    }

    #[test]
    fn random_consistency() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = [2i64, 4, 6, 8, 12][rng.gen_range(0..5)];
            let (r, c) = (rng.gen_range(1..6), rng.gen_range(1..5));
            let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(0..n)).collect()).collect();
            let x: Vec<i64> = (0..c).map(|_| rng.gen_range(0..n)).collect();
            let b: Vec<i64> = rows.iter().map(|row| row.iter().zip(&x).map(|(a, x)| a * x).sum::<i64>() % n).collect();
            let sol = solve(&rows, &b, c, n).expect("consistent system");
            assert!(check(&rows, &sol.particular, &b, n));
            // the kernel must account for every solution, in particular x
            let diff: Vec<i64> = x.iter().zip(&sol.particular).map(|(a, p)| (a - p).rem_euclid(n)).collect();
            let span = span_elements(&sol.kernel, c, n, 100_000);
            assert!(span.contains(&diff));
        }
    }
}
