//! Skeletal spherical fusion data. Pointed categories Vec_G^ω are built
//! directly; general multiplicity-free data can be loaded from JSON.
//!
//! Associator convention: `assoc[(a,b,c,d,e,f)]` is the F-symbol
//! (F^{abc}_d)_{e f} with e ∈ a⊗b and f ∈ b⊗c. For Vec_G^ω the only
//! admissible entries are (g,h,k,ghk,gh,hk) ↦ ω(g,h,k).

use crate::groups::{cocycle3_failure, Cochain, FiniteGroup};
use crate::scalar::CycScalar;
use num_integer::Integer;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("invalid 3-cocycle, failing at {0:?}")]
    InvalidCocycle(Vec<usize>),
    #[error("malformed fusion datum: {0}")]
    Malformed(String),
}

pub type Key6 = [usize; 6];

#[derive(Debug, Clone)]
pub struct FusionDatum {
    pub rank: usize,
    pub dual: Vec<usize>,
    /// N_{ab}^c, sparse
    pub fusion: BTreeMap<(usize, usize, usize), usize>,
    pub assoc: BTreeMap<Key6, CycScalar>,
    pub dims: Vec<CycScalar>,
    pub global_dim: CycScalar,
    pub conductor: u32,
    /// Present for pointed data.
    pub pointed: Option<(FiniteGroup, Cochain)>,
}

/// Conductor large enough for the cocycle values and all square roots of
/// subgroup orders that module functors can produce.
pub fn ambient_conductor(g: &FiniteGroup, w: &Cochain) -> u32 {
    let psi_mod = crate::groups::psi_modulus(g, w);
    let n = g.order() as u32;
    (4 * n).lcm(&psi_mod).lcm(&w.modulus)
}

pub fn pointed_category(g: &FiniteGroup, w: &Cochain) -> Result<FusionDatum, FusionError> {
    pointed_category_with(g, w, ambient_conductor(g, w))
}

pub fn pointed_category_with(g: &FiniteGroup, w: &Cochain, conductor: u32) -> Result<FusionDatum, FusionError> {
    if !w.is_normalized() {
        return Err(FusionError::InvalidCocycle(vec![]));
    }
    if let Some(f) = cocycle3_failure(g, w) {
        return Err(FusionError::InvalidCocycle(f));
    }
    let n = g.order();
    let l = conductor.lcm(&w.modulus);
    let step = (l / w.modulus) as i64;
    let mut fusion = BTreeMap::new();
    let mut assoc = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            fusion.insert((a, b, g.mul(a, b)), 1);
            for c in 0..n {
                let key = [a, b, c, g.mul(g.mul(a, b), c), g.mul(a, b), g.mul(b, c)];
                assoc.insert(key, CycScalar::root_of_unity(w.get3(a, b, c) as i64 * step, l));
            }
        }
    }
    Ok(FusionDatum {
        rank: n,
        dual: (0..n).map(|x| g.inverse(x)).collect(),
        fusion,
        assoc,
        dims: vec![CycScalar::one(l); n],
        global_dim: CycScalar::from_int(n as i64, l),
        conductor: l,
        pointed: Some((g.clone(), w.clone())),
    })
}

impl FusionDatum {
    fn n(&self, a: usize, b: usize, c: usize) -> usize {
        self.fusion.get(&(a, b, c)).copied().unwrap_or(0)
    }

    fn f(&self, k: Key6) -> CycScalar {
        self.assoc.get(&k).cloned().unwrap_or_else(|| CycScalar::zero(self.conductor))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rank": self.rank,
            "dual": self.dual,
            "fusion": self.fusion.iter().map(|(&(a, b, c), &m)| [a, b, c, m]).collect::<Vec<_>>(),
            "assoc": self.assoc.iter().map(|(k, v)| serde_json::json!({"index": k, "value": v.to_json()})).collect::<Vec<_>>(),
            "dims": self.dims.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, FusionError> {
        let bad = |s: &str| FusionError::Malformed(s.to_string());
        let rank = v["rank"].as_u64().ok_or_else(|| bad("rank"))? as usize;
        let dual: Vec<usize> = serde_json::from_value(v["dual"].clone()).map_err(|_| bad("dual"))?;
        let fus: Vec<[usize; 4]> = serde_json::from_value(v["fusion"].clone()).map_err(|_| bad("fusion"))?;
        let mut assoc = BTreeMap::new();
        let mut conductor = 1u32;
        for e in v["assoc"].as_array().ok_or_else(|| bad("assoc"))? {
            let k: Key6 = serde_json::from_value(e["index"].clone()).map_err(|_| bad("assoc index"))?;
            let s = CycScalar::from_json(&e["value"]).map_err(|e| bad(&e.to_string()))?;
            conductor = conductor.lcm(&s.conductor());
            assoc.insert(k, s);
        }
        let mut dims = Vec::new();
        for d in v["dims"].as_array().ok_or_else(|| bad("dims"))? {
            let s = CycScalar::from_json(d).map_err(|e| bad(&e.to_string()))?;
            conductor = conductor.lcm(&s.conductor());
            dims.push(s);
        }
        if dual.len() != rank || dims.len() != rank {
            return Err(bad("rank mismatch"));
        }
        let assoc = assoc.into_iter().map(|(k, s)| (k, s.lift(conductor))).collect();
        let dims: Vec<CycScalar> = dims.into_iter().map(|s| s.lift(conductor)).collect();
        let global_dim = dims.iter().fold(CycScalar::zero(conductor), |acc, d| &acc + &(d * d));
        Ok(FusionDatum {
            rank,
            dual,
            fusion: fus.into_iter().filter(|x| x[3] > 0).map(|x| ((x[0], x[1], x[2]), x[3])).collect(),
            assoc,
            dims,
            global_dim,
            conductor,
            pointed: None,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Pentagon, dimension and sphericality checks (multiplicity-free data).
pub fn validate(d: &FusionDatum) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let r = d.rank;
    if d.fusion.values().any(|&m| m > 1) {
        rep.failures.push("validator supports multiplicity-free data only".into());
        return rep;
    }
    if !d.dims[0].is_one() {
        rep.failures.push("dim(unit) != 1".into());
    }
    for a in 0..r {
        if d.dims[a] != d.dims[d.dual[a]] {
            rep.failures.push(format!("dim({a}) != dim(dual {a})"));
        }
        for b in 0..r {
            let rhs = (0..r).fold(CycScalar::zero(d.conductor), |acc, c| {
                &acc + &(&CycScalar::from_int(d.n(a, b, c) as i64, d.conductor) * &d.dims[c])
            });
            if &d.dims[a] * &d.dims[b] != rhs {
                rep.failures.push(format!("dimension equation fails for ({a},{b})"));
            }
        }
    }
    let prods = |a: usize, b: usize| -> Vec<usize> { (0..r).filter(|&c| d.n(a, b, c) > 0).collect() };
    // (F^{fcd}_e)_{gl} (F^{abl}_e)_{fk} = Σ_h (F^{abc}_g)_{fh} (F^{ahd}_e)_{gk} (F^{bcd}_k)_{hl}
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                for dd in 0..r {
                    for f in prods(a, b) {
                        for g in prods(f, c) {
                            for e in prods(g, dd) {
                                for l in prods(c, dd) {
                                    for k in prods(b, l) {
                                        if d.n(a, k, e) == 0 {
                                            continue;
                                        }
                                        let lhs = &d.f([f, c, dd, e, g, l]) * &d.f([a, b, l, e, f, k]);
                                        let mut rhs = CycScalar::zero(d.conductor);
                                        for h in prods(b, c) {
                                            rhs += &(&(&d.f([a, b, c, g, f, h]) * &d.f([a, h, dd, e, g, k]))
                                                * &d.f([b, c, dd, k, h, l]));
                                        }
                                        if lhs != rhs {
                                            rep.failures
                                                .push(format!("pentagon fails at a={a} b={b} c={c} d={dd} e={e} f={f} g={g} k={k} l={l}"));
                                            if rep.failures.len() > 20 {
                                                return rep;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let gd = d.dims.iter().fold(CycScalar::zero(d.conductor), |acc, x| &acc + &(x * x));
    if gd != d.global_dim {
        rep.failures.push("global_dim != sum of squared dims".into());
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{coboundary, omega_alpha};
    use rand::{Rng, SeedableRng};

    #[test]
    fn pointed_basics() {
        let g = FiniteGroup::cyclic(2);
        let d = pointed_category(&g, &Cochain::trivial(2, 3)).unwrap();
        assert!(d.assoc.values().all(|v| v.is_one()));
        assert_eq!(d.global_dim, CycScalar::from_int(2, 1));
        assert!(validate(&d).is_ok());
        let (g8, w) = omega_alpha(2, 1).unwrap();
        let d8 = pointed_category(&g8, &w).unwrap();
        assert_eq!(d8.assoc[&[4, 2, 1, 7, 6, 3]], CycScalar::from_int(-1, 1));
        assert_eq!(d8.rank, 8);
        assert!(validate(&d8).is_ok());
        let z3 = FiniteGroup::cyclic(3);
        assert!(validate(&pointed_category(&z3, &Cochain::trivial(3, 3)).unwrap()).is_ok());
        let one = FiniteGroup::cyclic(1);
        assert!(validate(&pointed_category(&one, &Cochain::trivial(1, 3)).unwrap()).is_ok());
    }

    #[test]
    fn corrupted_entry_fails() {
        let g = FiniteGroup::cyclic(3);
        let mut d = pointed_category(&g, &Cochain::trivial(3, 3)).unwrap();
        let key = [1, 1, 2, 1, 2, 0];
        let v = -d.assoc[&key].clone();
        d.assoc.insert(key, v);
        let rep = validate(&d);
        assert!(!rep.is_ok());
        assert!(rep.failures[0].contains("pentagon"));
    }

    #[test]
    fn cohomologous_twists_validate() {
        let g = FiniteGroup::parse("product:cyclic:2,cyclic:2").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let psi = Cochain::from_fn(4, 2, 4, |x| if x[0] == 0 || x[1] == 0 { 0 } else { rng.gen_range(0..4) });
            let w = coboundary(&g, &psi);
            assert!(validate(&pointed_category(&g, &w).unwrap()).is_ok());
        }
    }

    #[test]
    fn json_round_trip() {
        let g = FiniteGroup::cyclic(2);
        let d = pointed_category(&g, &Cochain::trivial(2, 3)).unwrap();
        let e = FusionDatum::from_json(&d.to_json()).unwrap();
        assert!(validate(&e).is_ok());
        assert_eq!(e.assoc.len(), d.assoc.len());
    }
}
