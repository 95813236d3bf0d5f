//! Exact arithmetic in cyclotomic fields Q(ζ_L).
//!
//! Elements are stored over the power basis 1, ζ, …, ζ^{φ(L)-1} as integer
//! numerators with one common positive denominator, kept in lowest terms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("conductor {conductor} too small for sqrt({m}): need 4*{m} | L")]
    ConductorTooSmall { m: u64, conductor: u32 },
    #[error("malformed scalar: {0}")]
    Malformed(String),
}

/// Precomputed reduction data for one conductor.
pub struct Field {
    pub conductor: u32,
    pub phi: usize,
    /// `pow[k]` = coordinates of ζ^k for 0 ≤ k < 2L.
    pow: Vec<Vec<i64>>,
}

fn cyclotomic_poly(n: u32, memo: &mut HashMap<u32, Vec<i64>>) -> Vec<i64> {
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Φ_d for proper divisors d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let den = cyclotomic_poly(d, memo);
            num = poly_div_exact(&num, &den);
        }
    }
    memo.insert(n, num.clone());
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut q = vec![0i64; qn + 1];
    for i in (0..=qn).rev() {
        let c = rem[i + dn];
        q[i] = c;
        if c != 0 {
            for j in 0..=dn {
                rem[i + j] -= c * den[j];
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

impl Field {
    fn new(l: u32) -> Field {
        let mut memo = HashMap::new();
        let poly = cyclotomic_poly(l, &mut memo);
        let phi = poly.len() - 1;
        let mut pow = Vec::with_capacity(2 * l as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..(2 * l as usize) {
            pow.push(cur.clone());
            // multiply by x and reduce by the monic polynomial
            let top = cur[phi - 1];
            let mut next = vec![0i64; phi];
            for i in (1..phi).rev() {
                next[i] = cur[i - 1];
            }
            if top != 0 {
                for i in 0..phi {
                    next[i] -= top * poly[i];
                }
            }
            cur = next;
        }
        Field { conductor: l, phi, pow }
    }
}

/// Shared field tables, built on demand.
pub fn field(l: u32) -> &'static Field {
    static CACHE: OnceLock<Mutex<HashMap<u32, &'static Field>>> = OnceLock::new();
    let m = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut g = m.lock().unwrap();
    if let Some(f) = g.get(&l) {
        return f;
    }
    let f: &'static Field = Box::leak(Box::new(Field::new(l.max(1))));
    g.insert(l, f);
    f
}

#[derive(Clone)]
pub struct CycScalar {
    conductor: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

impl CycScalar {
    pub fn zero(l: u32) -> Self {
        let f = field(l);
        CycScalar { conductor: f.conductor, num: vec![BigInt::zero(); f.phi], den: BigInt::one() }
    }

    pub fn one(l: u32) -> Self {
        Self::from_int(1, l)
    }

    pub fn from_int(n: i64, l: u32) -> Self {
        let mut z = Self::zero(l);
        z.num[0] = BigInt::from(n);
        z
    }

    pub fn from_ratio(p: i64, q: i64, l: u32) -> Self {
        Self::from_rational(&BigRational::new(p.into(), q.into()), l)
    }

    pub fn from_rational(r: &BigRational, l: u32) -> Self {
        let mut z = Self::zero(l);
        z.num[0] = r.numer().clone();
        z.den = r.denom().clone();
        z.normalize();
        z
    }

    /// ζ_L^k.
    pub fn root_of_unity(k: i64, l: u32) -> Self {
        let f = field(l);
        let k = k.rem_euclid(l as i64) as usize;
        CycScalar {
            conductor: l,
            num: f.pow[k].iter().map(|&c| BigInt::from(c)).collect(),
            den: BigInt::one(),
        }
    }

    /// Build from rational coordinates over the power basis (length φ(L)).
    pub fn from_coeffs(coeffs: &[BigRational], l: u32) -> Result<Self, ScalarError> {
        let f = field(l);
        if coeffs.len() != f.phi {
            return Err(ScalarError::Malformed(format!(
                "expected {} coefficients for conductor {}, got {}",
                f.phi,
                l,
                coeffs.len()
            )));
        }
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        let mut z = CycScalar { conductor: l, num, den };
        z.normalize();
        Ok(z)
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num.iter().map(|n| BigRational::new(n.clone(), self.den.clone())).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|n| n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|n| n.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(|n| n.is_zero())
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -self.den.clone();
            for n in self.num.iter_mut() {
                *n = -n.clone();
            }
        }
        if self.den.is_one() {
            return;
        }
        let mut g = self.den.clone();
        for n in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(n);
        }
        if !g.is_one() {
            self.den /= &g;
            for n in self.num.iter_mut() {
                *n /= &g;
            }
        }
    }

    /// Re-express in Q(ζ_{L'}) for a multiple L' of the conductor.
    pub fn lift(&self, target: u32) -> Self {
        if target == self.conductor {
            return self.clone();
        }
        assert!(target.is_multiple_of(self.conductor), "lift target must be a multiple");
        let f = field(target);
        let step = (target / self.conductor) as usize;
        let mut num = vec![BigInt::zero(); f.phi];
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, &p) in f.pow[k * step].iter().enumerate() {
                if p != 0 {
                    num[i] += c * p;
                }
            }
        }
        let mut z = CycScalar { conductor: target, num, den: self.den.clone() };
        z.normalize();
        z
    }

    fn aligned(a: &Self, b: &Self) -> (Self, Self) {
        let l = lcm(a.conductor, b.conductor);
        (a.lift(l), b.lift(l))
    }

    /// Galois automorphism ζ ↦ ζ^j (j coprime to L).
    pub fn galois(&self, j: i64) -> Self {
        let l = self.conductor;
        let f = field(l);
        let mut num = vec![BigInt::zero(); f.phi];
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (k as i64 * j).rem_euclid(l as i64) as usize;
            for (i, &p) in f.pow[e].iter().enumerate() {
                if p != 0 {
                    num[i] += c * p;
                }
            }
        }
        let mut z = CycScalar { conductor: l, num, den: self.den.clone() };
        z.normalize();
        z
    }

    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.is_rational() {
            let mut z = CycScalar::zero(self.conductor);
            z.num[0] = self.den.clone();
            z.den = self.num[0].clone();
            z.normalize();
            return Ok(z);
        }
        // Product of the other Galois conjugates, divided by the norm.
        let l = self.conductor as i64;
        let mut other = CycScalar::one(self.conductor);
        for j in 2..l {
            if j.gcd(&l) == 1 {
                other = &other * &self.galois(j);
            }
        }
        let norm = (self * &other).to_rational().expect("norm is rational");
        let inv_norm = CycScalar::from_rational(&norm.recip(), self.conductor);
        Ok(&other * &inv_norm)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Self {
        if e < 0 {
            return self.inv().expect("negative power of zero").pow(-e);
        }
        let mut base = self.clone();
        let mut acc = CycScalar::one(self.conductor);
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Positive square root of m, available when 4m | L.
    pub fn sqrt_nat(m: u64, l: u32) -> Result<Self, ScalarError> {
        if m == 0 || !(l as u64).is_multiple_of(4 * m) {
            return Err(ScalarError::ConductorTooSmall { m, conductor: l });
        }
        let mut rest = m;
        let mut square_part = 1i64;
        let mut acc = CycScalar::one(l);
        let mut p = 2u64;
        while rest > 1 {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            square_part *= (p as i64).pow(e / 2);
            if e % 2 == 1 {
                acc = &acc * &sqrt_prime(p, l);
            }
            p += 1;
        }
        let mut r = &acc * &CycScalar::from_int(square_part, l);
        if r.approx().0 < 0.0 {
            r = -r;
        }
        Ok(r)
    }

    pub fn approx(&self) -> (f64, f64) {
        let l = self.conductor as f64;
        let den = big_to_f64(&self.den);
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = big_to_f64(c) / den;
            let t = 2.0 * std::f64::consts::PI * k as f64 / l;
            re += v * t.cos();
            im += v * t.sin();
        }
        (re, im)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (re, im) = self.approx();
        serde_json::json!({
            "conductor": self.conductor,
            "coeffs": self.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "approx": [re, im],
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ScalarError> {
        let bad = |s: &str| ScalarError::Malformed(s.to_string());
        let l = v.get("conductor").and_then(|x| x.as_u64()).ok_or_else(|| bad("conductor"))? as u32;
        let cs = v.get("coeffs").and_then(|x| x.as_array()).ok_or_else(|| bad("coeffs"))?;
        let mut coeffs = Vec::new();
        for c in cs {
            let s = c.as_str().ok_or_else(|| bad("coeff must be a string"))?;
            coeffs.push(s.parse::<BigRational>().map_err(|_| bad(s))?);
        }
        CycScalar::from_coeffs(&coeffs, l)
    }
}

fn big_to_f64(b: &BigInt) -> f64 {
    b.to_f64().unwrap_or(f64::NAN)
}

/// √p for a prime p via Gauss sums.
fn sqrt_prime(p: u64, l: u32) -> CycScalar {
    if p == 2 {
        // ζ_8 - ζ_8^3
        let s = l as i64 / 8;
        return &CycScalar::root_of_unity(s, l) - &CycScalar::root_of_unity(3 * s, l);
    }
    let step = l as i64 / p as i64;
    let mut g = CycScalar::zero(l);
    for k in 1..p as i64 {
        let t = CycScalar::root_of_unity(k * step, l);
        if legendre(k as u64, p) == 1 {
            g += &t;
        } else {
            g -= &t;
        }
    }
    if p % 4 == 1 {
        g
    } else {
        // g = i√p
        &g * &CycScalar::root_of_unity(-(l as i64) / 4, l)
    }
}

fn legendre(a: u64, p: u64) -> i32 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

impl PartialEq for CycScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.den == other.den && self.num == other.num;
        }
        let (a, b) = CycScalar::aligned(self, other);
        a.den == b.den && a.num == b.num
    }
}
impl Eq for CycScalar {}

impl std::hash::Hash for CycScalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.conductor.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{}", r);
        }
        let mut terms = Vec::new();
        for (k, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match k {
                0 => terms.push(format!("{}", c)),
                _ => terms.push(format!("({})z{}^{}", c, self.conductor, k)),
            }
        }
        write!(f, "{}", terms.join(" + "))
    }
}

fn add_impl(a: &CycScalar, b: &CycScalar, sign: i32) -> CycScalar {
    if a.conductor != b.conductor {
        let (x, y) = CycScalar::aligned(a, b);
        return add_impl(&x, &y, sign);
    }
    let den = if a.den == b.den { a.den.clone() } else { &a.den * &b.den };
    let num = a
        .num
        .iter()
        .zip(&b.num)
        .map(|(x, y)| {
            let (x, y) = if a.den == b.den { (x.clone(), y.clone()) } else { (x * &b.den, y * &a.den) };
            if sign > 0 {
                x + y
            } else {
                x - y
            }
        })
        .collect();
    let mut z = CycScalar { conductor: a.conductor, num, den };
    z.normalize();
    z
}

fn mul_impl(a: &CycScalar, b: &CycScalar) -> CycScalar {
    if a.conductor != b.conductor {
        let (x, y) = CycScalar::aligned(a, b);
        return mul_impl(&x, &y);
    }
    let f = field(a.conductor);
    let phi = f.phi;
    if a.is_rational() || b.is_rational() {
        let (r, v) = if a.is_rational() { (a, b) } else { (b, a) };
        let c = &r.num[0];
        let mut z = CycScalar {
            conductor: a.conductor,
            num: v.num.iter().map(|x| x * c).collect(),
            den: &r.den * &v.den,
        };
        z.normalize();
        return z;
    }
    let mut prod = vec![BigInt::zero(); 2 * phi - 1];
    for (i, x) in a.num.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.num.iter().enumerate() {
            if !y.is_zero() {
                prod[i + j] += x * y;
            }
        }
    }
    let mut num: Vec<BigInt> = prod[..phi].to_vec();
    for (k, c) in prod.iter().enumerate().skip(phi) {
        if c.is_zero() {
            continue;
        }
        for (i, &p) in f.pow[k].iter().enumerate() {
            if p != 0 {
                num[i] += c * p;
            }
        }
    }
    let mut z = CycScalar { conductor: a.conductor, num, den: &a.den * &b.den };
    z.normalize();
    z
}

impl<'a> Add<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn add(self, o: &CycScalar) -> CycScalar {
        add_impl(self, o, 1)
    }
}
impl<'a> Sub<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn sub(self, o: &CycScalar) -> CycScalar {
        add_impl(self, o, -1)
    }
}
impl<'a> Mul<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn mul(self, o: &CycScalar) -> CycScalar {
        mul_impl(self, o)
    }
}
impl<'a> Div<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn div(self, o: &CycScalar) -> CycScalar {
        self.checked_div(o).expect("division by zero")
    }
}
impl Add for CycScalar {
    type Output = CycScalar;
    fn add(self, o: CycScalar) -> CycScalar {
        add_impl(&self, &o, 1)
    }
}
impl Sub for CycScalar {
    type Output = CycScalar;
    fn sub(self, o: CycScalar) -> CycScalar {
        add_impl(&self, &o, -1)
    }
}
impl Mul for CycScalar {
    type Output = CycScalar;
    fn mul(self, o: CycScalar) -> CycScalar {
        mul_impl(&self, &o)
    }
}
impl Div for CycScalar {
    type Output = CycScalar;
    fn div(self, o: CycScalar) -> CycScalar {
        &self / &o
    }
}
impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(mut self) -> CycScalar {
        for n in self.num.iter_mut() {
            *n = -std::mem::take(n);
        }
        self
    }
}
impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        -self.clone()
    }
}
impl AddAssign<&CycScalar> for CycScalar {
    fn add_assign(&mut self, o: &CycScalar) {
        *self = add_impl(self, o, 1);
    }
}
impl SubAssign<&CycScalar> for CycScalar {
    fn sub_assign(&mut self, o: &CycScalar) {
        *self = add_impl(self, o, -1);
    }
}
impl MulAssign<&CycScalar> for CycScalar {
    fn mul_assign(&mut self, o: &CycScalar) {
        *self = mul_impl(self, o);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, l: u32) -> CycScalar {
        let phi = field(l).phi;
        let cs: Vec<BigRational> = (0..phi)
            .map(|_| BigRational::new(rng.gen_range(-9i64..10).into(), rng.gen_range(1i64..7).into()))
            .collect();
        CycScalar::from_coeffs(&cs, l).unwrap()
    }

    #[test]
    fn roots_of_unity() {
        assert!(CycScalar::root_of_unity(0, 12).is_one());
        assert_eq!(CycScalar::root_of_unity(2, 4), CycScalar::from_int(-1, 4));
        let s = &(&CycScalar::root_of_unity(1, 3) + &CycScalar::root_of_unity(2, 3)) + &CycScalar::one(3);
        assert!(s.is_zero());
        for l in [1u32, 2, 5, 8, 12, 16, 24, 36] {
            for k in 0..l as i64 {
                assert!(CycScalar::root_of_unity(k, l).pow(l as i64).is_one());
            }
        }
    }

    #[test]
    fn basic_ops() {
        let half = &CycScalar::one(1) / &CycScalar::from_int(2, 1);
        assert_eq!(half, CycScalar::from_ratio(1, 2, 1));
        let z = CycScalar::root_of_unity(1, 8);
        assert!((&z * &z.conj()).is_one());
        let third = CycScalar::from_ratio(1, 3, 1);
        let lifted = third.lift(12);
        assert_eq!(lifted.coeffs().len(), 4);
        assert_eq!(lifted, third);
        assert_eq!(CycScalar::zero(8).inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn field_axioms_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..1000 {
            let l = [4u32, 8, 12, 16][i % 4];
            let a = random(&mut rng, l);
            let b = random(&mut rng, l);
            assert!((&a + &(-&a)).is_zero());
            if !a.is_zero() {
                assert!((&a * &a.inv().unwrap()).is_one());
            }
            assert_eq!(a.conj().conj(), a);
            assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
            assert_eq!((&a + &b).lift(48), &a.lift(48) + &b.lift(48));
            assert_eq!((&a * &b).lift(48), &a.lift(48) * &b.lift(48));
        }
    }

    #[test]
    fn square_roots() {
        assert!(CycScalar::sqrt_nat(1, 4).unwrap().is_one());
        assert_eq!(CycScalar::sqrt_nat(4, 16).unwrap(), CycScalar::from_int(2, 16));
        let r2 = CycScalar::sqrt_nat(2, 8).unwrap();
        assert_eq!(&r2 * &r2, CycScalar::from_int(2, 8));
        assert!((r2.approx().0 - 2f64.sqrt()).abs() < 1e-9);
        for m in 1..=64u64 {
            let l = (4 * m) as u32;
            let r = CycScalar::sqrt_nat(m, l).unwrap();
            assert_eq!(&r * &r, CycScalar::from_int(m as i64, l), "m={m}");
            assert!(r.approx().0 > 0.0);
        }
        assert!(matches!(CycScalar::sqrt_nat(3, 8), Err(ScalarError::ConductorTooSmall { .. })));
    }

    #[test]
    fn approx_values() {
        assert_eq!(CycScalar::from_ratio(1, 2, 1).approx(), (0.5, 0.0));
        let (re, im) = CycScalar::root_of_unity(1, 4).approx();
        assert!(re.abs() < 1e-12 && (im - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let a = &CycScalar::root_of_unity(1, 12) + &CycScalar::from_ratio(2, 3, 12);
        assert_eq!(CycScalar::from_json(&a.to_json()).unwrap(), a);
    }
}
