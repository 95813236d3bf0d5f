//! The bicategory of spherical module categories over Vec_G^ω.
//!
//! M(S, ψ) has the left cosets G/S as simples, each of dimension √|S|. A
//! module functor F: M → N is modelled as a twisted G-equivariant bundle:
//! spaces V_{n,m} over N × M with maps σ(a, p): V_{a·p} → V_p such that
//! σ(b,p) σ(a,b·p) = β(a,b,p) σ(ab,p), where β = μ_N − μ_M. Composition
//! tensors the blocks over the middle simple, the right adjoint takes
//! duals, and natural transformations are equivariant families of maps.

use crate::fusion::ambient_conductor;
use crate::groups::{module_associator, module_pentagon_failure, solve_d1, Cochain, FiniteGroup, GroupError, ModuleCatParams, Subgroup};
use crate::linalg::{common_nullspace, Mat};
use crate::scalar::CycScalar;
use crate::skeleton::SphereGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModsphError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("inconsistent bicategory datum: {0}")]
    Inconsistent(String),
    #[error("labels do not compose: {0}")]
    NotComposable(String),
}

#[derive(Debug, Clone)]
pub struct ModuleCat {
    pub params: ModuleCatParams,
    pub size: usize,
    pub act: Vec<Vec<usize>>,
    /// associator exponents modulo the conductor, index (a·|G| + b)·size + x
    mu: Vec<i64>,
    /// dimension of every simple
    pub dim: CycScalar,
}

/// A module functor `src -> tgt` as an equivariant bundle. Pair index
/// p = n·ks + m for n a simple of `tgt` and m a simple of `src`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Functor {
    pub src: usize,
    pub tgt: usize,
    pub ks: usize,
    pub kt: usize,
    pub dims: Vec<usize>,
    /// σ(a, p) at index a·|pairs| + p, a dims[p] × dims[a·p] matrix
    pub sigma: Vec<Mat>,
    pub sigma_inv: Vec<Mat>,
}

impl Functor {
    pub fn pairs(&self) -> usize {
        self.ks * self.kt
    }
    pub fn sig(&self, a: usize, p: usize) -> &Mat {
        &self.sigma[a * self.pairs() + p]
    }
    pub fn sig_inv(&self, a: usize, p: usize) -> &Mat {
        &self.sigma_inv[a * self.pairs() + p]
    }
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct SimpleFunctor {
    pub functor: Functor,
    pub adjoint: Functor,
    pub dim: CycScalar,
    pub orbit_rep: (usize, usize),
    pub stabilizer_order: usize,
    pub irrep_dim: usize,
}

/// Natural transformation between two functors with the same ends: one
/// matrix per pair, target block × source block.
pub type NatTrans = Vec<Mat>;

#[derive(Debug, Clone)]
pub struct Bicat {
    pub group: FiniteGroup,
    pub omega: Cochain,
    pub conductor: u32,
    pub cats: Vec<ModuleCat>,
    pub simples: Vec<SimpleFunctor>,
    /// hom[src][tgt]: ids of the simple functors src → tgt
    pub hom: Vec<Vec<Vec<usize>>>,
}

/// One nonzero coefficient of a Nat-space vector: patch states before each
/// dart, multiplicity index of each dart, value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub ys: Vec<usize>,
    pub idx: Vec<usize>,
    pub val: CycScalar,
}

/// Nat(1, Φ_k ∘ … ∘ Φ_1) for a cyclic word around a node; Φ_i is the simple
/// functor of dart i when δ = +1 and its right adjoint when δ = −1.
#[derive(Debug, Clone)]
pub struct NatSpace {
    pub word: Vec<(usize, i8)>,
    pub basis: Vec<Vec<Entry>>,
}

fn kron_all(ms: &[&Mat], l: u32) -> Mat {
    let mut out = Mat::identity(1, l);
    for m in ms {
        out = out.kron(m);
    }
    out
}

/// Irreducible c-projective representations ρ(a)ρ(b) = c(a,b)ρ(ab) of h,
/// built by inducing one-dimensional projective characters of subgroups.
pub fn projective_irreps(h: &FiniteGroup, c: &Cochain, l: u32) -> Result<Vec<Vec<Mat>>, ModsphError> {
    let n = h.order();
    let c = c.with_modulus(l);
    let root = |e: i64| CycScalar::root_of_unity(e.rem_euclid(l as i64), l);
    let mut found: Vec<Vec<Mat>> = Vec::new();
    let mut total = 0;
    let mut subs = h.subgroups();
    subs.reverse();
    for elems in subs {
        if total == n {
            break;
        }
        let sub = Subgroup::new(elems);
        let lg = sub.as_group(h);
        let cl = Cochain::from_fn(sub.order(), 2, l, |x| c.get2(sub.elems[x[0]], sub.elems[x[1]]) as i64);
        // left cosets r·L
        let mut reps = Vec::new();
        let mut of = vec![usize::MAX; n];
        for x in 0..n {
            if of[x] == usize::MAX {
                for &t in &sub.elems {
                    of[h.mul(x, t)] = reps.len();
                }
                reps.push(x);
            }
        }
        let m = reps.len();
        if m * m > n - total {
            continue;
        }
        for lam in solve_d1(&lg, &cl, l, 256) {
            let rho: Vec<Mat> = (0..n)
                .map(|x| {
                    let mut r = Mat::zeros(m, m, l);
                    for (j, &rj) in reps.iter().enumerate() {
                        let xr = h.mul(x, rj);
                        let i = of[xr];
                        let lo = h.mul(h.inverse(reps[i]), xr);
                        let e = c.get2(x, rj) as i64 - c.get2(reps[i], lo) as i64 + lam[sub.local(lo).unwrap()];
                        r[(i, j)] = root(e);
                    }
                    r
                })
                .collect();
            for a in 0..n {
                for b in 0..n {
                    if rho[a].mul(&rho[b]) != rho[h.mul(a, b)].scale(&root(c.get2(a, b) as i64)) {
                        return Err(ModsphError::Inconsistent("induced projective representation".into()));
                    }
                }
            }
            if intertwiners(&rho, &rho, l).len() != 1 {
                continue;
            }
            if found.iter().any(|f| f[0].rows == m && !intertwiners(f, &rho, l).is_empty()) {
                continue;
            }
            total += m * m;
            found.push(rho);
            if total == n {
                break;
            }
        }
    }
    if total != n {
        return Err(ModsphError::Inconsistent(format!("projective irreducibles cover {total} of {n}")));
    }
    Ok(found)
}

/// Basis of {X : X ρ1(h) = ρ2(h) X}.
fn intertwiners(r1: &[Mat], r2: &[Mat], l: u32) -> Vec<Mat> {
    let (m1, m2) = (r1[0].rows, r2[0].rows);
    let blocks: Vec<Mat> = r1
        .iter()
        .zip(r2)
        .map(|(a, b)| {
            // vec(X) row-major: (X a)_{ij} - (b X)_{ij}
            let mut sys = Mat::zeros(m2 * m1, m2 * m1, l);
            for i in 0..m2 {
                for j in 0..m1 {
                    let row = i * m1 + j;
                    for k in 0..m1 {
                        sys[(row, i * m1 + k)] += &a[(k, j)];
                    }
                    for k in 0..m2 {
                        sys[(row, k * m1 + j)] -= &b[(i, k)];
                    }
                }
            }
            sys
        })
        .collect();
    common_nullspace(&blocks, m1 * m2, l).into_iter().map(|v| Mat::from_rows(&v.chunks(m1).map(|c| c.to_vec()).collect::<Vec<_>>(), m1, l)).collect()
}

impl Bicat {
    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn root(&self, e: i64) -> CycScalar {
        CycScalar::root_of_unity(e.rem_euclid(self.conductor as i64), self.conductor)
    }

    pub fn zero(&self) -> CycScalar {
        CycScalar::zero(self.conductor)
    }

    pub fn one(&self) -> CycScalar {
        CycScalar::one(self.conductor)
    }

    fn mu(&self, cat: usize, a: usize, b: usize, x: usize) -> i64 {
        let c = &self.cats[cat];
        c.mu[(a * self.order() + b) * c.size + x]
    }

    /// β(a, b, p) for a functor src → tgt, as an exponent.
    pub fn beta(&self, src: usize, tgt: usize, a: usize, b: usize, n: usize, m: usize) -> i64 {
        self.mu(tgt, a, b, n) - self.mu(src, a, b, m)
    }

    pub fn act_pair(&self, f: &Functor, a: usize, p: usize) -> usize {
        let (n, m) = (p / f.ks, p % f.ks);
        self.cats[f.tgt].act[a][n] * f.ks + self.cats[f.src].act[a][m]
    }

    /// First violation of the equivariance coherence, if any.
    pub fn coherence_failure(&self, f: &Functor) -> Option<String> {
        let g = self.order();
        for a in 0..g {
            for b in 0..g {
                for p in 0..f.pairs() {
                    if f.dims[p] == 0 {
                        continue;
                    }
                    let bp = self.act_pair(f, b, p);
                    let lhs = f.sig(b, p).mul(f.sig(a, bp));
                    let (n, m) = (p / f.ks, p % f.ks);
                    let rhs = f.sig(self.group.mul(a, b), p).scale(&self.root(self.beta(f.src, f.tgt, a, b, n, m)));
                    if lhs != rhs {
                        return Some(format!("σ coherence fails at a={a} b={b} pair={p}"));
                    }
                }
            }
        }
        None
    }

    fn with_inverses(&self, mut f: Functor) -> Functor {
        f.sigma_inv = f.sigma.iter().map(|m| if m.rows == 0 { m.clone() } else { m.inverse().expect("σ invertible") }).collect();
        f
    }

    pub fn identity(&self, c: usize) -> Functor {
        let k = self.cats[c].size;
        let l = self.conductor;
        let dims: Vec<usize> = (0..k * k).map(|p| usize::from(p / k == p % k)).collect();
        let sigma = (0..self.order()).flat_map(|_| dims.iter().map(|&d| Mat::identity(d, l))).collect::<Vec<_>>();
        Functor { src: c, tgt: c, ks: k, kt: k, dims, sigma_inv: sigma.clone(), sigma }
    }

    /// g ∘ f.
    pub fn compose(&self, g: &Functor, f: &Functor) -> Result<Functor, ModsphError> {
        if f.tgt != g.src {
            return Err(ModsphError::NotComposable(format!("{} -> {} then {} -> {}", f.src, f.tgt, g.src, g.tgt)));
        }
        let (ks, km, kt) = (f.ks, f.kt, g.kt);
        let l = self.conductor;
        let np = ks * kt;
        let mut dims = vec![0; np];
        // offsets of middle blocks
        let mut off = vec![vec![0usize; km + 1]; np];
        for n in 0..kt {
            for m in 0..ks {
                let p = n * ks + m;
                for k in 0..km {
                    off[p][k + 1] = off[p][k] + g.dims[n * km + k] * f.dims[k * ks + m];
                }
                dims[p] = off[p][km];
            }
        }
        let mut sigma = Vec::with_capacity(self.order() * np);
        for a in 0..self.order() {
            for p in 0..np {
                let (n, m) = (p / ks, p % ks);
                let ap = self.act_pair_raw(g.tgt, f.src, ks, a, p);
                let mut s = Mat::zeros(dims[p], dims[ap], l);
                if dims[p] > 0 {
                    for k in 0..km {
                        let ak = self.cats[f.tgt].act[a][k];
                        let blk = g.sig(a, n * km + k).kron(f.sig(a, k * ks + m));
                        for i in 0..blk.rows {
                            for j in 0..blk.cols {
                                s[(off[p][k] + i, off[ap][ak] + j)] = blk[(i, j)].clone();
                            }
                        }
                    }
                }
                sigma.push(s);
            }
        }
        Ok(self.with_inverses(Functor { src: f.src, tgt: g.tgt, ks, kt, dims, sigma, sigma_inv: vec![] }))
    }

    fn act_pair_raw(&self, tgt: usize, src: usize, ks: usize, a: usize, p: usize) -> usize {
        self.cats[tgt].act[a][p / ks] * ks + self.cats[src].act[a][p % ks]
    }

    /// Right adjoint: dual blocks with inverse-transposed structure maps.
    pub fn adjoint(&self, f: &Functor) -> Functor {
        let (ks, kt) = (f.kt, f.ks);
        let np = ks * kt;
        let tr = |p: usize| (p % f.kt) * f.ks + p / f.kt;
        let dims = (0..np).map(|p| f.dims[tr(p)]).collect();
        let mut sigma = Vec::with_capacity(self.order() * np);
        let mut sigma_inv = Vec::with_capacity(self.order() * np);
        for a in 0..self.order() {
            for p in 0..np {
                sigma.push(f.sig_inv(a, tr(p)).transpose());
                sigma_inv.push(f.sig(a, tr(p)).transpose());
            }
        }
        Functor { src: f.tgt, tgt: f.src, ks, kt, dims, sigma, sigma_inv }
    }

    /// Orbits of G on the pairs of a functor, as (representative, members
    /// with an element carrying the representative to them).
    fn pair_orbits(&self, f: &Functor) -> Vec<(usize, Vec<(usize, usize)>)> {
        let mut seen = vec![false; f.pairs()];
        let mut out = Vec::new();
        for p0 in 0..f.pairs() {
            if seen[p0] || f.dims[p0] == 0 {
                continue;
            }
            seen[p0] = true;
            let mut members = vec![(p0, 0)];
            let mut i = 0;
            while i < members.len() {
                let (p, t) = members[i];
                for a in 0..self.order() {
                    let q = self.act_pair(f, a, p);
                    if !seen[q] {
                        seen[q] = true;
                        members.push((q, self.group.mul(a, t)));
                    }
                }
                i += 1;
            }
            out.push((p0, members));
        }
        out
    }

    /// Basis of equivariant maps x ⇒ y.
    pub fn hom_space(&self, x: &Functor, y: &Functor) -> Vec<NatTrans> {
        assert!(x.src == y.src && x.tgt == y.tgt);
        let l = self.conductor;
        let mut out = Vec::new();
        for (p0, members) in self.pair_orbits(x) {
            let (dx, dy) = (x.dims[p0], y.dims[p0]);
            if dy == 0 {
                continue;
            }
            let stab: Vec<usize> = (0..self.order()).filter(|&a| self.act_pair(x, a, p0) == p0).collect();
            // φ σx(h) = σy(h) φ on vec(φ), row-major
            let blocks: Vec<Mat> = stab
                .iter()
                .map(|&h| {
                    let (sx, sy) = (x.sig(h, p0), y.sig(h, p0));
                    let mut sys = Mat::zeros(dy * dx, dy * dx, l);
                    for i in 0..dy {
                        for j in 0..dx {
                            let row = i * dx + j;
                            for k in 0..dx {
                                sys[(row, i * dx + k)] += &sx[(k, j)];
                            }
                            for k in 0..dy {
                                sys[(row, k * dx + j)] -= &sy[(i, k)];
                            }
                        }
                    }
                    sys
                })
                .collect();
            for v in common_nullspace(&blocks, dx * dy, l) {
                let phi0 = Mat::from_rows(&v.chunks(dx).map(|c| c.to_vec()).collect::<Vec<_>>(), dx, l);
                let mut comp: NatTrans = (0..x.pairs()).map(|p| Mat::zeros(y.dims[p], x.dims[p], l)).collect();
                // φ_{t·p0} = σy(t,p0)^{-1} φ_{p0} σx(t,p0)
                for &(p, t) in &members {
                    comp[p] = y.sig_inv(t, p0).mul(&phi0).mul(x.sig(t, p0));
                }
                out.push(comp);
            }
        }
        out
    }

    /// Whether a family of maps x ⇒ y is equivariant.
    pub fn is_natural(&self, x: &Functor, y: &Functor, phi: &NatTrans) -> bool {
        (0..self.order()).all(|a| {
            (0..x.pairs()).all(|p| {
                let ap = self.act_pair(x, a, p);
                phi[p].mul(x.sig(a, p)) == y.sig(a, p).mul(&phi[ap])
            })
        })
    }

    fn ratio(&self, num: usize, den: usize) -> CycScalar {
        &self.cats[num].dim / &self.cats[den].dim
    }

    /// Trace closing the functor on the left: fixes the first simple of the
    /// target and sums over the source.
    pub fn trace_left(&self, f: &Functor, alpha: &NatTrans) -> CycScalar {
        let mut s = self.zero();
        for m in 0..f.ks {
            s += &alpha[m].trace();
        }
        &s * &self.ratio(f.src, f.tgt)
    }

    /// Trace closing the functor on the right.
    pub fn trace_right(&self, f: &Functor, alpha: &NatTrans) -> CycScalar {
        let mut s = self.zero();
        for n in 0..f.kt {
            s += &alpha[n * f.ks].trace();
        }
        &s * &self.ratio(f.tgt, f.src)
    }

    pub fn id_trans(&self, f: &Functor) -> NatTrans {
        f.dims.iter().map(|&d| Mat::identity(d, self.conductor)).collect()
    }

    pub fn dim(&self, f: &Functor) -> CycScalar {
        self.trace_left(f, &self.id_trans(f))
    }

    /// Horizontal composite β ∗ α of endomorphisms, matching `compose(g, f)`.
    pub fn horizontal(&self, g: &Functor, f: &Functor, beta: &NatTrans, alpha: &NatTrans) -> NatTrans {
        let (ks, km, kt) = (f.ks, f.kt, g.kt);
        let mut out = Vec::with_capacity(ks * kt);
        for p in 0..ks * kt {
            let (n, m) = (p / ks, p % ks);
            let mut blocks = Vec::new();
            for k in 0..km {
                let (pg, pf) = (n * km + k, k * ks + m);
                if g.dims[pg] * f.dims[pf] > 0 {
                    blocks.push(beta[pg].kron(&alpha[pf]));
                }
            }
            out.push(block_diag(&blocks, self.conductor));
        }
        out
    }

    pub fn vcompose(&self, b: &NatTrans, a: &NatTrans) -> NatTrans {
        b.iter().zip(a).map(|(x, y)| x.mul(y)).collect()
    }

    fn dart_functor(&self, (f, d): (usize, i8)) -> &Functor {
        if d > 0 {
            &self.simples[f].functor
        } else {
            &self.simples[f].adjoint
        }
    }

    /// Nat(1, Φ_k ∘ … ∘ Φ_1) as G-invariant sections over patch-state tuples.
    pub fn nat_space(&self, word: &[(usize, i8)]) -> Result<NatSpace, ModsphError> {
        let k = word.len();
        let fs: Vec<&Functor> = word.iter().map(|&w| self.dart_functor(w)).collect();
        for i in 0..k {
            if fs[i].tgt != fs[(i + 1) % k].src {
                return Err(ModsphError::NotComposable(format!("dart {i}")));
            }
        }
        let l = self.conductor;
        let block = |i: usize, ys: &[usize]| -> usize { ys[(i + 1) % k] * fs[i].ks + ys[i] };
        // tuples with all blocks nonzero
        let mut tuples = Vec::new();
        let mut cur = vec![0usize; k];
        fn rec(i: usize, k: usize, fs: &[&Functor], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == k {
                if fs[k - 1].dims[cur[0] * fs[k - 1].ks + cur[k - 1]] > 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for y in 0..fs[i].ks {
                if i > 0 && fs[i - 1].dims[y * fs[i - 1].ks + cur[i - 1]] == 0 {
                    continue;
                }
                cur[i] = y;
                rec(i + 1, k, fs, cur, out);
            }
        }
        rec(0, k, &fs, &mut cur, &mut tuples);
        let act = |a: usize, ys: &[usize]| -> Vec<usize> { (0..k).map(|i| self.cats[fs[i].src].act[a][ys[i]]).collect() };
        let sig_t = |a: usize, ys: &[usize], inv: bool| -> Mat {
            let ms: Vec<&Mat> =
                (0..k).map(|i| if inv { fs[i].sig_inv(a, block(i, ys)) } else { fs[i].sig(a, block(i, ys)) }).collect();
            kron_all(&ms, l)
        };
        let index: HashMap<Vec<usize>, usize> = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut seen = vec![false; tuples.len()];
        let mut basis = Vec::new();
        for t0 in 0..tuples.len() {
            if seen[t0] {
                continue;
            }
            let y0 = tuples[t0].clone();
            let mut members = vec![(y0.clone(), 0usize)];
            seen[t0] = true;
            let mut stab = Vec::new();
            for a in 0..self.order() {
                let ya = act(a, &y0);
                if ya == y0 {
                    stab.push(a);
                } else if !seen[index[&ya]] {
                    seen[index[&ya]] = true;
                    members.push((ya, a));
                }
            }
            let dim: usize = (0..k).map(|i| fs[i].dims[block(i, &y0)]).product();
            let blocks: Vec<Mat> = stab.iter().filter(|&&h| h != 0).map(|&h| sig_t(h, &y0, false).sub(&Mat::identity(dim, l))).collect();
            for v in common_nullspace(&blocks, dim, l) {
                let mut entries = Vec::new();
                for (ys, a) in &members {
                    let w = if *a == 0 { v.clone() } else { sig_t(*a, &y0, true).mul_vec(&v) };
                    let shape: Vec<usize> = (0..k).map(|i| fs[i].dims[block(i, ys)]).collect();
                    for (flat, val) in w.into_iter().enumerate() {
                        if val.is_zero() {
                            continue;
                        }
                        let mut idx = vec![0; k];
                        let mut r = flat;
                        for i in (0..k).rev() {
                            idx[i] = r % shape[i];
                            r /= shape[i];
                        }
                        entries.push(Entry { ys: ys.clone(), idx, val });
                    }
                }
                basis.push(entries);
            }
        }
        Ok(NatSpace { word: word.to_vec(), basis })
    }

    /// Evaluate a closed graph on the sphere. `strand_func[s]` is the simple
    /// functor of strand s, running from the category on its left to the one
    /// on its right; node n carries the Nat-space vector `vecs[n]`, written
    /// in the node's own dart order.
    pub fn evaluate_graph(&self, g: &SphereGraph, strand_func: &[usize], vecs: &[&[Entry]]) -> Result<CycScalar, ModsphError> {
        self.evaluate_graph_from(g, strand_func, vecs, 0)
    }

    /// As `evaluate_graph`, with patch `outer` playing the role of the puncture.
    pub fn evaluate_graph_from(&self, g: &SphereGraph, strand_func: &[usize], vecs: &[&[Entry]], outer: usize) -> Result<CycScalar, ModsphError> {
        let faces = g.faces();
        if outer >= faces.walks.len() {
            return Err(ModsphError::NotComposable(format!("no patch {outer}")));
        }
        let mut face_cat = vec![usize::MAX; faces.walks.len()];
        for (s, &f) in strand_func.iter().enumerate() {
            let fu = &self.simples[f].functor;
            for (e, c) in [(0, fu.src), (1, fu.tgt)] {
                let face = faces.of_dart[2 * s + e];
                if face_cat[face] != usize::MAX && face_cat[face] != c {
                    return Err(ModsphError::NotComposable(format!("patch {face} gets two categories")));
                }
                face_cat[face] = c;
            }
        }
        let mut factor = self.one();
        for (f, &c) in face_cat.iter().enumerate() {
            if f != outer {
                factor = &factor * &self.cats[c].dim;
            }
        }
        factor = &factor / &self.cats[face_cat[outer]].dim;
        // nodes in breadth-first order
        let mut order = Vec::new();
        let mut seen = vec![false; g.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for &(s, e) in &g.nodes[n].darts {
                let m = g.strands[s].ends[1 - e];
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        let slots: Vec<Vec<(usize, usize)>> = g
            .nodes
            .iter()
            .map(|nd| {
                let k = nd.darts.len();
                (0..k)
                    .map(|i| {
                        let (ps, pe) = nd.darts[(i + k - 1) % k];
                        (faces.of_dart[2 * ps + pe], nd.darts[i].0)
                    })
                    .collect()
            })
            .collect();
        let mut fstate = vec![usize::MAX; faces.walks.len()];
        fstate[outer] = 0;
        let mut sstate = vec![usize::MAX; g.strands.len()];
        let mut total = self.zero();
        self.eval_dfs(0, &order, &slots, vecs, &mut fstate, &mut sstate, self.one(), &mut total);
        Ok(&total * &factor)
    }

    #[allow(clippy::too_many_arguments)]
    fn eval_dfs(
        &self,
        depth: usize,
        order: &[usize],
        slots: &[Vec<(usize, usize)>],
        vecs: &[&[Entry]],
        fstate: &mut Vec<usize>,
        sstate: &mut Vec<usize>,
        acc: CycScalar,
        total: &mut CycScalar,
    ) {
        if depth == order.len() {
            *total += &acc;
            return;
        }
        let n = order[depth];
        let sl = &slots[n];
        'entries: for e in vecs[n] {
            let mut set_f = Vec::new();
            let mut set_s = Vec::new();
            for (i, &(f, s)) in sl.iter().enumerate() {
                let ok_f = if fstate[f] == usize::MAX {
                    fstate[f] = e.ys[i];
                    set_f.push(f);
                    true
                } else {
                    fstate[f] == e.ys[i]
                };
                let ok_s = if sstate[s] == usize::MAX {
                    sstate[s] = e.idx[i];
                    set_s.push(s);
                    true
                } else {
                    sstate[s] == e.idx[i]
                };
                if !ok_f || !ok_s {
                    for f in set_f {
                        fstate[f] = usize::MAX;
                    }
                    for s in set_s {
                        sstate[s] = usize::MAX;
                    }
                    continue 'entries;
                }
            }
            self.eval_dfs(depth + 1, order, slots, vecs, fstate, sstate, &acc * &e.val, total);
            for f in set_f {
                fstate[f] = usize::MAX;
            }
            for s in set_s {
                sstate[s] = usize::MAX;
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cats: Vec<serde_json::Value> = self
            .cats
            .iter()
            .map(|c| serde_json::json!({"subgroup": c.params.subgroup.elems, "psi_modulus": c.params.psi.modulus, "psi": c.params.psi.values, "simples": c.size, "dim": c.dim.to_json()}))
            .collect();
        let mut pairs = Vec::new();
        for (s, row) in self.hom.iter().enumerate() {
            for (t, ids) in row.iter().enumerate() {
                let dims: Vec<serde_json::Value> = ids.iter().map(|&i| self.simples[i].dim.to_json()).collect();
                pairs.push(serde_json::json!({"source": s, "target": t, "simples": ids, "dims": dims}));
            }
        }
        serde_json::json!({"group_order": self.order(), "conductor": self.conductor, "objects": cats, "hom": pairs})
    }
}

fn block_diag(blocks: &[Mat], l: u32) -> Mat {
    let n: usize = blocks.iter().map(|b| b.rows).sum();
    let mut out = Mat::zeros(n, n, l);
    let mut o = 0;
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                out[(o + i, o + j)] = b[(i, j)].clone();
            }
        }
        o += b.rows;
    }
    out
}

/// A Nat-space vector re-expressed for the node with its darts rotated to
/// start at position `r`.
pub fn rotate_vector(v: &[Entry], r: usize) -> Vec<Entry> {
    v.iter()
        .map(|e| {
            let mut ys = e.ys.clone();
            let mut idx = e.idx.clone();
            ys.rotate_left(r);
            idx.rotate_left(r);
            Entry { ys, idx, val: e.val.clone() }
        })
        .collect()
}

/// Build the bicategory for the given module categories.
pub fn build_modsph(g: &FiniteGroup, w: &Cochain, params: &[ModuleCatParams]) -> Result<Bicat, ModsphError> {
    let l = ambient_conductor(g, w);
    let n = g.order();
    let mut cats = Vec::new();
    for p in params {
        let ma = module_associator(g, w, p);
        if let Some(f) = module_pentagon_failure(g, w, &ma) {
            return Err(ModsphError::Inconsistent(format!("module pentagon fails at {f:?}")));
        }
        if !l.is_multiple_of(ma.modulus) {
            return Err(ModsphError::Inconsistent("associator modulus does not divide the conductor".into()));
        }
        let sc = (l / ma.modulus) as i64;
        cats.push(ModuleCat {
            params: p.clone(),
            size: ma.cosets.len(),
            mu: ma.mu.iter().map(|&e| e as i64 * sc).collect(),
            act: ma.act,
            dim: CycScalar::sqrt_nat(p.subgroup.order() as u64, l).map_err(|e| ModsphError::Inconsistent(e.to_string()))?,
        });
    }
    let mut b = Bicat { group: g.clone(), omega: w.clone(), conductor: l, cats, simples: Vec::new(), hom: Vec::new() };
    let nc = b.cats.len();
    let mut hom = vec![vec![Vec::new(); nc]; nc];
    for src in 0..nc {
        for tgt in 0..nc {
            let (ks, kt) = (b.cats[src].size, b.cats[tgt].size);
            let probe = Functor { src, tgt, ks, kt, dims: vec![1; ks * kt], sigma: vec![], sigma_inv: vec![] };
            for (p0, members) in b.pair_orbits(&probe) {
                let (n0, m0) = (p0 / ks, p0 % ks);
                let stab = Subgroup::new((0..n).filter(|&a| b.act_pair(&probe, a, p0) == p0).collect());
                let hg = stab.as_group(g);
                let c = Cochain::from_fn(stab.order(), 2, l, |x| b.beta(src, tgt, stab.elems[x[0]], stab.elems[x[1]], n0, m0));
                let mut t = vec![usize::MAX; ks * kt];
                for &(p, a) in &members {
                    t[p] = a;
                }
                for rho in projective_irreps(&hg, &c, l)? {
                    let r = rho[0].rows;
                    let dims: Vec<usize> = (0..ks * kt).map(|p| if t[p] != usize::MAX { r } else { 0 }).collect();
                    let mut sigma = Vec::with_capacity(n * ks * kt);
                    for a in 0..n {
                        for p in 0..ks * kt {
                            if t[p] == usize::MAX {
                                sigma.push(Mat::zeros(0, 0, l));
                                continue;
                            }
                            let ap = b.act_pair(&probe, a, p);
                            let (tp, tap) = (t[p], t[ap]);
                            let h = g.mul(g.inverse(tap), g.mul(a, tp));
                            let e = b.beta(src, tgt, a, tp, n0, m0) - b.beta(src, tgt, tap, h, n0, m0);
                            sigma.push(rho[stab.local(h).expect("h stabilizes")].transpose().scale(&b.root(e)));
                        }
                    }
                    let f = b.with_inverses(Functor { src, tgt, ks, kt, dims, sigma, sigma_inv: vec![] });
                    if let Some(err) = b.coherence_failure(&f) {
                        return Err(ModsphError::Inconsistent(err));
                    }
                    let adjoint = b.adjoint(&f);
                    let dim = b.dim(&f);
                    hom[src][tgt].push(b.simples.len());
                    b.simples.push(SimpleFunctor { functor: f, adjoint, dim, orbit_rep: (n0, m0), stabilizer_order: stab.order(), irrep_dim: r });
                }
            }
        }
    }
    b.hom = hom;
    Ok(b)
}

/// Outcome of the bicategory checks: counts of checks run and failures.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct BicatReport {
    pub checks: Vec<(String, usize)>,
    pub failures: Vec<String>,
}

impl BicatReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
    fn count(&mut self, name: &str, n: usize) {
        self.checks.push((name.to_string(), n));
    }
}

impl Bicat {
    fn random_trans<R: Rng>(&self, basis: &[NatTrans], rng: &mut R) -> Option<NatTrans> {
        let first = basis.first()?;
        let mut out: NatTrans = first.iter().map(|m| Mat::zeros(m.rows, m.cols, self.conductor)).collect();
        for b in basis {
            let c = CycScalar::from_int(rng.gen_range(-3..=3), self.conductor);
            for (o, m) in out.iter_mut().zip(b) {
                *o = o.add(&m.scale(&c));
            }
        }
        Some(out)
    }

    /// A random composable word of simple functors starting at `src`.
    fn random_word<R: Rng>(&self, len: usize, rng: &mut R) -> Option<(Functor, Vec<usize>)> {
        let nc = self.cats.len();
        let mut cur = rng.gen_range(0..nc);
        let mut f = self.identity(cur);
        let mut ids = Vec::new();
        for _ in 0..len {
            let tgt = rng.gen_range(0..nc);
            let opts = &self.hom[cur][tgt];
            let id = opts[rng.gen_range(0..opts.len())];
            f = self.compose(&self.simples[id].functor, &f).ok()?;
            ids.push(id);
            cur = tgt;
        }
        Some((f, ids))
    }

    /// Check the bicategory axioms the state sum relies on. `samples` random
    /// words and endomorphisms are drawn for each randomized check.
    pub fn validate(&self, samples: usize, seed: u64) -> BicatReport {
        let mut rep = BicatReport::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = self.order() as i64;
        for (i, c) in self.cats.iter().enumerate() {
            let ma = module_associator(&self.group, &self.omega, &c.params);
            if let Some(f) = module_pentagon_failure(&self.group, &self.omega, &ma) {
                rep.failures.push(format!("module category {i}: pentagon fails at {f:?}"));
            }
        }
        rep.count("pentagon", self.cats.len());
        for (i, s) in self.simples.iter().enumerate() {
            if let Some(e) = self.coherence_failure(&s.functor) {
                rep.failures.push(format!("simple {i}: {e}"));
            }
            let id = self.id_trans(&s.functor);
            let (tl, tr) = (self.trace_left(&s.functor, &id), self.trace_right(&s.functor, &id));
            if tl != tr {
                rep.failures.push(format!("simple {i}: left trace {tl} != right trace {tr}"));
            }
            if tl.is_zero() {
                rep.failures.push(format!("simple {i}: zero dimension"));
            }
            if self.dim(&s.adjoint) != s.dim {
                rep.failures.push(format!("simple {i}: adjoint has a different dimension"));
            }
            if self.hom_space(&s.functor, &s.functor).len() != 1 {
                rep.failures.push(format!("simple {i}: not simple"));
            }
            let units = self.nat_space(&[(i, 1), (i, -1)]).map(|n| n.basis.len()).unwrap_or(0);
            if units != 1 {
                rep.failures.push(format!("simple {i}: Nat(1, H^r H) has dimension {units}"));
            }
        }
        rep.count("simples: coherence, left = right trace, adjoint dim, Schur", self.simples.len());
        for (src, row) in self.hom.iter().enumerate() {
            for (tgt, ids) in row.iter().enumerate() {
                let mut s = self.zero();
                for &i in ids {
                    s += &(&self.simples[i].dim * &self.simples[i].dim);
                }
                if s != CycScalar::from_int(g, self.conductor) {
                    rep.failures.push(format!("pair ({src},{tgt}): sum of squared dims {s} != {g}"));
                }
                for (x, &i) in ids.iter().enumerate() {
                    for &j in &ids[..x] {
                        if !self.hom_space(&self.simples[i].functor, &self.simples[j].functor).is_empty() {
                            rep.failures.push(format!("simples {i} and {j} are isomorphic"));
                        }
                    }
                }
            }
        }
        rep.count("sum of squared dims", self.cats.len() * self.cats.len());
        for c in 0..self.cats.len() {
            let id = self.identity(c);
            if self.dim(&id) != self.one() {
                rep.failures.push(format!("identity of {c} has dimension != 1"));
            }
        }
        let (mut n_mult, mut n_bk, mut n_tri) = (0, 0, 0);
        let mut tries = 0;
        while (n_mult < samples || n_bk < samples || n_tri < samples) && tries < 20 * samples {
            tries += 1;
            let len1 = rng.gen_range(1..=2);
            let Some((f, _)) = self.random_word(len1, &mut rng) else { continue };
            // a second word composable after f
            let nc = self.cats.len();
            let mut gw = self.identity(f.tgt);
            let len2 = rng.gen_range(1..=2);
            let mut cur = f.tgt;
            for _ in 0..len2 {
                let tgt = rng.gen_range(0..nc);
                let opts = &self.hom[cur][tgt];
                gw = self.compose(&self.simples[opts[rng.gen_range(0..opts.len())]].functor, &gw).unwrap();
                cur = tgt;
            }
            let ef = self.hom_space(&f, &f);
            let eg = self.hom_space(&gw, &gw);
            let (Some(alpha), Some(beta)) = (self.random_trans(&ef, &mut rng), self.random_trans(&eg, &mut rng)) else { continue };
            let gf = self.compose(&gw, &f).unwrap();
            if n_mult < samples {
                let h = self.horizontal(&gw, &f, &beta, &alpha);
                if !self.is_natural(&gf, &gf, &h) {
                    rep.failures.push("horizontal composite is not natural".into());
                }
                let lhs = self.trace_left(&gf, &h);
                let rhs = &self.trace_left(&gw, &beta) * &self.trace_left(&f, &alpha);
                if lhs != rhs || self.trace_right(&gf, &h) != rhs {
                    rep.failures.push(format!("trace not multiplicative: {lhs} vs {rhs}"));
                }
                n_mult += 1;
            }
            if n_tri < samples {
                let egf = self.hom_space(&gf, &gf);
                if let Some(phi) = self.random_trans(&egf, &mut rng) {
                    if let Err(e) = self.check_partial_traces(&gw, &f, &phi) {
                        rep.failures.push(e);
                    }
                    n_tri += 1;
                }
            }
            if n_bk < samples {
                if let Err(e) = self.check_dominance(&gf) {
                    rep.failures.push(e);
                }
                n_bk += 1;
            }
        }
        rep.count("trace multiplicativity", n_mult);
        rep.count("dominance", n_bk);
        rep.count("partial traces", n_tri);
        rep
    }

    /// Closing the outer strand, the inner strand or both gives the same trace.
    pub fn check_partial_traces(&self, g: &Functor, f: &Functor, phi: &NatTrans) -> Result<(), String> {
        let (ks, km, kt) = (f.ks, f.kt, g.kt);
        let l = self.conductor;
        let gf = self.compose(g, f).map_err(|e| e.to_string())?;
        let mut pf: NatTrans = (0..f.pairs()).map(|p| Mat::zeros(f.dims[p], f.dims[p], l)).collect();
        let mut pg: NatTrans = (0..g.pairs()).map(|p| Mat::zeros(g.dims[p], g.dims[p], l)).collect();
        for n in 0..kt {
            for m in 0..ks {
                let p = n * ks + m;
                let mut o = 0;
                for k in 0..km {
                    let (dg, df) = (g.dims[n * km + k], f.dims[k * ks + m]);
                    // close g on the left: weight d_n / d_k
                    let wg = self.ratio(g.tgt, g.src);
                    let wf = self.ratio(f.src, f.tgt);
                    for i in 0..df {
                        for j in 0..df {
                            let mut s = self.zero();
                            for a in 0..dg {
                                s += &phi[p][(o + a * df + i, o + a * df + j)];
                            }
                            let cur = pf[k * ks + m][(i, j)].clone();
                            pf[k * ks + m][(i, j)] = &cur + &(&s * &wg);
                        }
                    }
                    for a in 0..dg {
                        for b in 0..dg {
                            let mut s = self.zero();
                            for i in 0..df {
                                s += &phi[p][(o + a * df + i, o + b * df + i)];
                            }
                            let cur = pg[n * km + k][(a, b)].clone();
                            pg[n * km + k][(a, b)] = &cur + &(&s * &wf);
                        }
                    }
                    o += dg * df;
                }
            }
        }
        if !self.is_natural(f, f, &pf) || !self.is_natural(g, g, &pg) {
            return Err("partial trace is not natural".into());
        }
        let full = self.trace_left(&gf, phi);
        let a = self.trace_left(f, &pf);
        let b = self.trace_left(g, &pg);
        let c = self.trace_right(&gf, phi);
        if full != a || full != b || full != c {
            return Err(format!("partial traces differ: {full} {a} {b} {c}"));
        }
        Ok(())
    }

    /// id_X = Σ_F dim(F) Σ_i ψ_i* ∘ ψ_i over simples F and dual bases of
    /// Hom(X, F), Hom(F, X) under the trace pairing; also checks the dimension
    /// expansion dim X = Σ_F dim F · dim Hom(F, X).
    pub fn check_dominance(&self, x: &Functor) -> Result<(), String> {
        let l = self.conductor;
        let mut acc: NatTrans = x.dims.iter().map(|&d| Mat::zeros(d, d, l)).collect();
        let mut dsum = self.zero();
        for &fid in &self.hom[x.src][x.tgt] {
            let sf = &self.simples[fid];
            let f = &sf.functor;
            let psi = self.hom_space(x, f);
            let phi = self.hom_space(f, x);
            if psi.len() != phi.len() {
                return Err("hom dimensions differ in the two directions".into());
            }
            let k = psi.len();
            if k == 0 {
                continue;
            }
            dsum += &(&sf.dim * &CycScalar::from_int(k as i64, l));
            // gram[i][j] = tr_F(ψ_i ∘ φ_j)
            let mut gram = Mat::zeros(k, k, l);
            for i in 0..k {
                for j in 0..k {
                    gram[(i, j)] = self.trace_left(f, &self.vcompose(&psi[i], &phi[j]));
                }
            }
            let ginv = gram.inverse().ok_or("trace pairing is degenerate")?;
            for i in 0..k {
                for j in 0..k {
                    // ψ_i* = Σ_j φ_j (G^{-1})_{ji}
                    let c = &ginv[(j, i)] * &sf.dim;
                    if c.is_zero() {
                        continue;
                    }
                    let t = self.vcompose(&phi[j], &psi[i]);
                    for (a, m) in acc.iter_mut().zip(&t) {
                        *a = a.add(&m.scale(&c));
                    }
                }
            }
        }
        if acc != self.id_trans(x) {
            return Err("dominance relation fails".into());
        }
        if dsum != self.dim(x) {
            return Err(format!("dimension expansion fails: {dsum} vs {}", self.dim(x)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::module_cat_params;

    fn bicat(desc: &str) -> Bicat {
        let g = FiniteGroup::parse(desc).unwrap();
        let w = Cochain::trivial(g.order(), 3);
        let p = module_cat_params(&g, &w).unwrap();
        build_modsph(&g, &w, &p).unwrap()
    }

    #[test]
    fn z2_simples_and_dims() {
        let b = bicat("cyclic:2");
        assert_eq!(b.cats.len(), 2);
        assert_eq!(b.hom[0][0].len(), 2);
        for &i in &b.hom[0][0] {
            assert!(b.simples[i].dim.is_one());
        }
        assert_eq!(b.hom[0][1].len(), 1);
        let d = &b.simples[b.hom[0][1][0]].dim;
        assert_eq!(d * d, CycScalar::from_int(2, b.conductor));
    }

    #[test]
    fn twisted_klein_irrep() {
        let g = FiniteGroup::parse("product:cyclic:2,cyclic:2").unwrap();
        // c((a1,a2),(b1,b2)) = (-1)^{a1 b2}
        let c = Cochain::from_fn(4, 2, 2, |x| ((x[0] >> 1) & (x[1] & 1)) as i64);
        let irr = projective_irreps(&g, &c, 8).unwrap();
        assert_eq!(irr.len(), 1);
        assert_eq!(irr[0][0].rows, 2);
    }

    #[test]
    fn validate_small() {
        for desc in ["cyclic:2", "cyclic:3"] {
            let b = bicat(desc);
            let r = b.validate(8, 1);
            assert!(r.is_ok(), "{desc}: {:?}", r.failures);
        }
    }
}
