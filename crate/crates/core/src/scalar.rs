//! Exact scalars: elements of cyclotomic number fields Q(zeta_M) with
//! rational coefficients, plus a lightweight root-of-unity type used as the
//! codomain of smooth characters. No floating point anywhere; equality of
//! values at different orders goes through promotion to the lcm order.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a / gcd_u64(a, b) * b
}

fn euler_phi(mut m: u64) -> usize {
    let mut phi = 1u64;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            let mut pk = 1;
            while m % d == 0 {
                m /= d;
                pk *= d;
            }
            phi *= pk - pk / d;
        }
        d += 1;
    }
    if m > 1 {
        phi *= m - 1;
    }
    phi as usize
}

/// Coefficients of the M-th cyclotomic polynomial (low first, monic), by
/// exact division of x^M - 1 by the proper cyclotomic divisors.
fn cyclotomic(m: u64) -> Vec<BigInt> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&m) {
        return v.clone();
    }
    let out = if m == 1 {
        vec![BigInt::from(-1), BigInt::from(1)]
    } else {
        // numerator x^m - 1
        let mut num = vec![BigInt::zero(); m as usize + 1];
        num[0] = BigInt::from(-1);
        num[m as usize] = BigInt::one();
        for d in 1..m {
            if m % d == 0 {
                let phi_d = cyclotomic(d);
                num = int_poly_div_exact(&num, &phi_d);
            }
        }
        num
    };
    cache.lock().unwrap().insert(m, out.clone());
    out
}

/// Exact division of integer polynomials; panics if not exact (internal use
/// on cyclotomic factors only, where exactness is a theorem).
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    assert!(den[dd].is_one());
    let mut q = vec![BigInt::zero(); r.len() - dd];
    for i in (dd..r.len()).rev() {
        let c = r[i].clone();
        if c.is_zero() {
            continue;
        }
        q[i - dd] = c.clone();
        for j in 0..=dd {
            let t = &c * &den[j];
            r[i - dd + j] -= t;
        }
    }
    assert!(r.iter().all(|x| x.is_zero()), "inexact cyclotomic division");
    while q.len() > 1 && q.last().unwrap().is_zero() {
        q.pop();
    }
    q
}

/// An element of Q(zeta_M) in the power basis 1, zeta, ..., zeta^{phi(M)-1}
/// reduced against the M-th cyclotomic polynomial. The order is part of the
/// representation; values compare equal across orders via promotion.
#[derive(Clone)]
pub struct CycQ {
    order: u64,
    c: Vec<BigRational>,
}

impl fmt::Debug for CycQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycQ[{}]{}", self.order, self.pretty(None))
    }
}

impl CycQ {
    pub fn zero() -> CycQ {
        CycQ {
            order: 1,
            c: vec![BigRational::zero()],
        }
    }

    pub fn one() -> CycQ {
        CycQ::from_int(1)
    }

    pub fn from_int(k: i64) -> CycQ {
        CycQ {
            order: 1,
            c: vec![BigRational::from_integer(BigInt::from(k))],
        }
    }

    pub fn from_rational(r: BigRational) -> CycQ {
        CycQ {
            order: 1,
            c: vec![r],
        }
    }

    pub fn rational(num: i64, den: i64) -> CycQ {
        CycQ::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// zeta_m^k, exponent taken mod m.
    pub fn root_of_unity(m: u64, k: i64) -> CycQ {
        assert!(m >= 1);
        let kk = (((k % m as i64) + m as i64) % m as i64) as usize;
        let phi = euler_phi(m);
        let mut raw = vec![BigRational::zero(); kk + 1];
        raw[kk] = BigRational::one();
        let c = reduce_mod_cyclotomic(&raw, m, phi);
        CycQ { order: m, c }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    /// Some(r) when the value lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(self.c[0].clone())
        } else {
            None
        }
    }

    fn promote_coeffs(&self, l: u64) -> Vec<BigRational> {
        // zeta_M = zeta_L^{L/M}
        assert!(l % self.order == 0);
        let step = (l / self.order) as usize;
        let phi_l = euler_phi(l);
        let mut raw = vec![BigRational::zero(); (self.c.len() - 1) * step + 1];
        for (i, ci) in self.c.iter().enumerate() {
            raw[i * step] = ci.clone();
        }
        reduce_mod_cyclotomic(&raw, l, phi_l)
    }

    pub fn promote(&self, l: u64) -> CycQ {
        let l = lcm_u64(self.order, l);
        CycQ {
            order: l,
            c: self.promote_coeffs(l),
        }
    }

    fn binop(&self, other: &CycQ, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> CycQ {
        let l = lcm_u64(self.order, other.order);
        let a = self.promote_coeffs(l);
        let b = other.promote_coeffs(l);
        let c = a.iter().zip(&b).map(|(x, y)| f(x, y)).collect();
        CycQ { order: l, c }
    }

    pub fn add(&self, other: &CycQ) -> CycQ {
        self.binop(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &CycQ) -> CycQ {
        self.binop(other, |x, y| x - y)
    }

    pub fn neg(&self) -> CycQ {
        CycQ {
            order: self.order,
            c: self.c.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, other: &CycQ) -> CycQ {
        let l = lcm_u64(self.order, other.order);
        let a = self.promote_coeffs(l);
        let b = other.promote_coeffs(l);
        let mut raw = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    let t = ai * bj;
                    raw[i + j] += t;
                }
            }
        }
        let phi = euler_phi(l);
        CycQ {
            order: l,
            c: reduce_mod_cyclotomic(&raw, l, phi),
        }
    }

    pub fn scale(&self, r: &BigRational) -> CycQ {
        CycQ {
            order: self.order,
            c: self.c.iter().map(|x| x * r).collect(),
        }
    }

    pub fn mul_int(&self, k: i64) -> CycQ {
        self.scale(&BigRational::from_integer(BigInt::from(k)))
    }

    /// Inverse in Q(zeta_M); the cyclotomic polynomial is irreducible over Q,
    /// so every nonzero element is a unit.
    pub fn inv(&self) -> Result<CycQ> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        let phi = cyclotomic(self.order);
        let phi_q: Vec<BigRational> = phi
            .iter()
            .map(|z| BigRational::from_integer(z.clone()))
            .collect();
        let inv = rat_poly_inv_mod(&self.c, &phi_q)
            .ok_or_else(|| Error::SpecMismatch("cyclotomic inverse failed".into()))?;
        let d = euler_phi(self.order);
        let mut c = inv;
        c.resize(d, BigRational::zero());
        Ok(CycQ {
            order: self.order,
            c,
        })
    }

    pub fn div(&self, other: &CycQ) -> Result<CycQ> {
        let l = lcm_u64(self.order, other.order);
        Ok(self.promote(l).mul(&other.promote(l).inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<CycQ> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = CycQ::one();
        let mut b = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Compact rendering. With q supplied, small factorizations of the form
    /// q^a * zeta^b (and rational multiples of q^a) are recognized and
    /// printed that way; otherwise the power-basis expansion is printed.
    pub fn pretty(&self, q: Option<u64>) -> String {
        if let Some(r) = self.as_rational() {
            if let Some(qv) = q {
                if !r.is_zero() {
                    // r = s * q^a with s in lowest terms not divisible by q
                    let qb = BigInt::from(qv);
                    let mut a: i32 = 0;
                    let mut s = r.clone();
                    let qr = BigRational::from_integer(qb.clone());
                    while s.numer().magnitude().clone() % qv == 0u64.into() {
                        s /= &qr;
                        a += 1;
                    }
                    while s.denom().magnitude().clone() % qv == 0u64.into() {
                        s *= &qr;
                        a -= 1;
                    }
                    if a != 0 {
                        let sf = if s.is_one() {
                            String::new()
                        } else if s == -BigRational::one() {
                            "-".into()
                        } else {
                            format!("{s}*")
                        };
                        return format!("{sf}q^{a}");
                    }
                }
            }
            return format!("{r}");
        }
        if let Some(qv) = q {
            for b in 0..self.order {
                let z = CycQ::root_of_unity(self.order, b as i64);
                for a in -8i64..=8 {
                    let qa = CycQ::from_rational(
                        BigRational::from_integer(BigInt::from(qv)).pow(a as i32),
                    );
                    if *self == qa.mul(&z) {
                        let qs = if a == 0 {
                            String::new()
                        } else {
                            format!("q^{a}*")
                        };
                        return format!("{qs}zeta{}^{b}", self.order);
                    }
                }
            }
        }
        let mut terms = vec![];
        for (i, ci) in self.c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            if i == 0 {
                terms.push(format!("{ci}"));
            } else if ci.is_one() {
                terms.push(format!("zeta{}^{i}", self.order));
            } else {
                terms.push(format!("{ci}*zeta{}^{i}", self.order));
            }
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

impl PartialEq for CycQ {
    fn eq(&self, other: &Self) -> bool {
        let l = lcm_u64(self.order, other.order);
        self.promote_coeffs(l) == other.promote_coeffs(l)
    }
}
impl Eq for CycQ {}

fn reduce_mod_cyclotomic(raw: &[BigRational], m: u64, phi: usize) -> Vec<BigRational> {
    let cyc = cyclotomic(m);
    let cyc_q: Vec<BigRational> = cyc
        .iter()
        .map(|z| BigRational::from_integer(z.clone()))
        .collect();
    let mut r = raw.to_vec();
    let d = cyc_q.len() - 1;
    for i in (d..r.len()).rev() {
        if r[i].is_zero() {
            continue;
        }
        let c = r[i].clone();
        r[i] = BigRational::zero();
        for j in 0..d {
            let t = &c * &cyc_q[j];
            r[i - d + j] -= t;
        }
    }
    r.truncate(d.max(1));
    r.resize(phi.max(1), BigRational::zero());
    r
}

fn rat_poly_trim(a: &mut Vec<BigRational>) {
    while a.len() > 0 && a.last().unwrap().is_zero() {
        a.pop();
    }
}

fn rat_poly_divmod(
    a: &[BigRational],
    b: &[BigRational],
) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    rat_poly_trim(&mut r);
    let mut bb = b.to_vec();
    rat_poly_trim(&mut bb);
    let db = bb.len() - 1;
    let mut q = vec![BigRational::zero(); r.len().saturating_sub(db).max(1)];
    while r.len() >= db + 1 && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = &r[r.len() - 1] / &bb[db];
        q[k] = &q[k] + &c;
        for i in 0..=db {
            let t = &c * &bb[i];
            r[k + i] -= t;
        }
        rat_poly_trim(&mut r);
        if r.len() < db + 1 {
            break;
        }
    }
    rat_poly_trim(&mut q);
    (q, r)
}

fn rat_poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let t = ai * bj;
            c[i + j] += t;
        }
    }
    c
}

fn rat_poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut c = vec![BigRational::zero(); n];
    for i in 0..n {
        let av = a.get(i).cloned().unwrap_or_else(BigRational::zero);
        let bv = b.get(i).cloned().unwrap_or_else(BigRational::zero);
        c[i] = av - bv;
    }
    rat_poly_trim(&mut c);
    c
}

/// Inverse of `a` mod `m` over Q via extended Euclid; None if gcd is not a
/// nonzero constant.
fn rat_poly_inv_mod(a: &[BigRational], m: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    rat_poly_trim(&mut r1);
    if r1.is_empty() {
        return None;
    }
    let mut s0: Vec<BigRational> = vec![];
    let mut s1: Vec<BigRational> = vec![BigRational::one()];
    while !r1.is_empty() {
        let (q, r2) = rat_poly_divmod(&r0, &r1);
        let s2 = rat_poly_sub(&s0, &rat_poly_mul(&q, &s1));
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    if r0.len() != 1 {
        return None;
    }
    let c = BigRational::one() / &r0[0];
    let mut out: Vec<BigRational> = s0.iter().map(|x| x * &c).collect();
    let (_, rem) = rat_poly_divmod(&out, m);
    out = rem;
    Some(out)
}

// ---------------------------------------------------------------------------
// plain roots of unity (character values)
// ---------------------------------------------------------------------------

/// A root of unity zeta_order^exp, kept symbolic. Character evaluations land
/// here; arithmetic promotes orders through lcm like CycQ does.
#[derive(Clone, Copy, Debug)]
pub struct RootOfUnity {
    pub order: u64,
    pub exp: u64,
}

impl RootOfUnity {
    pub fn one() -> RootOfUnity {
        RootOfUnity { order: 1, exp: 0 }
    }

    pub fn new(order: u64, exp: i64) -> RootOfUnity {
        assert!(order >= 1);
        let e = (((exp % order as i64) + order as i64) % order as i64) as u64;
        RootOfUnity { order, exp: e }
    }

    pub fn is_one(&self) -> bool {
        self.exp % self.order == 0
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        let l = lcm_u64(self.order, other.order);
        let e = (self.exp as u128 * (l / self.order) as u128
            + other.exp as u128 * (l / other.order) as u128)
            % l as u128;
        RootOfUnity {
            order: l,
            exp: e as u64,
        }
    }

    pub fn inv(&self) -> RootOfUnity {
        RootOfUnity {
            order: self.order,
            exp: (self.order - self.exp % self.order) % self.order,
        }
    }

    pub fn pow(&self, k: i64) -> RootOfUnity {
        let kk = ((k % self.order as i64) + self.order as i64) as u128 % self.order as u128;
        RootOfUnity {
            order: self.order,
            exp: (self.exp as u128 * kk % self.order as u128) as u64,
        }
    }

    /// Reduce to the smallest order representing the same value.
    pub fn reduced(&self) -> RootOfUnity {
        let g = gcd_u64(self.exp, self.order);
        if g == 0 {
            return RootOfUnity::one();
        }
        RootOfUnity {
            order: self.order / g,
            exp: self.exp / g,
        }
    }

    pub fn to_cycq(&self) -> CycQ {
        CycQ::root_of_unity(self.order, self.exp as i64)
    }
}

impl PartialEq for RootOfUnity {
    fn eq(&self, other: &Self) -> bool {
        let a = self.reduced();
        let b = other.reduced();
        a.order == b.order && a.exp == b.exp
    }
}
impl Eq for RootOfUnity {}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc_vec(m: u64) -> Vec<i64> {
        cyclotomic(m)
            .iter()
            .map(|z| {
                let s: String = z.to_string();
                s.parse().unwrap()
            })
            .collect()
    }

    #[test]
    fn cyclotomic_polynomials_match_tables() {
        assert_eq!(cyc_vec(1), vec![-1, 1]);
        assert_eq!(cyc_vec(2), vec![1, 1]);
        assert_eq!(cyc_vec(3), vec![1, 1, 1]);
        assert_eq!(cyc_vec(4), vec![1, 0, 1]);
        assert_eq!(cyc_vec(6), vec![1, -1, 1]);
        assert_eq!(cyc_vec(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyc_vec(9), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(cyc_vec(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyc_vec(24), vec![1, 0, 0, 0, -1, 0, 0, 0, 1]);
    }

    #[test]
    fn roots_of_unity_relations() {
        let z6 = CycQ::root_of_unity(6, 1);
        let z3 = CycQ::root_of_unity(3, 1);
        assert_eq!(z6.pow(2).unwrap(), z3);
        assert_eq!(z6.pow(3).unwrap(), CycQ::from_int(-1));
        assert_eq!(CycQ::root_of_unity(4, 2), CycQ::from_int(-1));
        for m in 2..=12u64 {
            let mut s = CycQ::zero();
            for k in 0..m {
                s = s.add(&CycQ::root_of_unity(m, k as i64));
            }
            assert!(s.is_zero(), "sum of all {m}-th roots");
        }
        // minimal polynomial of zeta_5
        let z5 = CycQ::root_of_unity(5, 1);
        let mut acc = CycQ::zero();
        for k in 0..=4 {
            acc = acc.add(&z5.pow(k).unwrap());
        }
        assert!(acc.is_zero());
    }

    #[test]
    fn field_operations() {
        let a = CycQ::root_of_unity(12, 5)
            .mul_int(3)
            .add(&CycQ::rational(7, 2));
        let b = CycQ::root_of_unity(8, 3).sub(&CycQ::from_int(2));
        let ab = a.mul(&b);
        assert_eq!(ab.div(&b).unwrap(), a.promote(24));
        assert_eq!(a.mul(&a.inv().unwrap()), CycQ::one());
        assert_eq!(a.sub(&a), CycQ::zero());
        // distributivity
        let c = CycQ::root_of_unity(3, 2).mul_int(-5);
        assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn promotion_is_value_preserving() {
        let z3 = CycQ::root_of_unity(3, 1);
        assert_eq!(z3.promote(12), CycQ::root_of_unity(12, 4));
        assert_eq!(z3, CycQ::root_of_unity(12, 4));
        assert_ne!(z3, CycQ::root_of_unity(12, 3));
    }

    #[test]
    fn pretty_factorizations() {
        let q = Some(9u64);
        assert_eq!(CycQ::from_int(81).pretty(q), "q^2");
        assert_eq!(CycQ::rational(1, 9).pretty(q), "q^-1");
        let v = CycQ::root_of_unity(6, 1).mul_int(9);
        assert_eq!(v.pretty(q), "q^1*zeta6^1");
        assert_eq!(CycQ::from_int(5).pretty(q), "5");
        assert_eq!(CycQ::zero().pretty(q), "0");
    }

    #[test]
    fn unit_circle_type() {
        let a = RootOfUnity::new(6, 5);
        let b = RootOfUnity::new(4, 1);
        let ab = a.mul(&b);
        assert_eq!(ab.order, 12);
        assert_eq!(ab.to_cycq(), a.to_cycq().mul(&b.to_cycq()));
        assert_eq!(a.mul(&a.inv()), RootOfUnity::one());
        assert_eq!(RootOfUnity::new(6, 2), RootOfUnity::new(3, 1));
        assert_eq!(a.pow(-1), a.inv());
    }
}
