//! Exact arithmetic in truncated unramified local rings O_E/p^N.
//!
//! An element is a degree-<e polynomial over Z/p^N reduced against a fixed
//! monic modulus whose reduction mod p is irreducible, together with a cached
//! valuation. The uniformizer is the rational prime p in every layer, so a
//! tower of unramified extensions shares it and no uniformizer bookkeeping is
//! needed. Frobenius is computed once per ring by Hensel-lifting the
//! conjugate root of the modulus and is applied as a cached linear map.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// p-adic valuation of a residue class `x` mod `p^n`; `n` plays the role of
/// "zero at this precision".
fn vp(mut x: u64, p: u64, n: usize) -> usize {
    if x == 0 {
        return n;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v.min(n)
}

fn pow_u64(b: u64, e: usize) -> u64 {
    let mut r: u64 = 1;
    for _ in 0..e {
        r = r.checked_mul(b).expect("modulus power overflow");
    }
    r
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// residue-field polynomial arithmetic (coefficients mod p, dense, low-first)
// ---------------------------------------------------------------------------

fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inv_u64(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let c = (r[r.len() - 1] * lead_inv) % p;
        for i in 0..=dm {
            let t = (c * m[i]) % p;
            let idx = k + i;
            r[idx] = (r[idx] + p - t) % p;
        }
        fp_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn fp_mul(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            c[i + j] = (c[i + j] + ai * bj) % p;
        }
    }
    fp_rem(&c, m, p)
}

fn fp_powmod(a: &[u64], mut k: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut base = fp_rem(a, m, p);
    let mut acc = vec![1u64];
    while k > 0 {
        if k & 1 == 1 {
            acc = fp_mul(&acc, &base, m, p);
        }
        base = fp_mul(&base, &base, m, p);
        k >>= 1;
    }
    acc
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Extended Euclid in F_p[x]/(m): inverse of `a`, which must be coprime to m.
fn fp_inv_mod(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    // invariants: r0 = s0*a mod m, r1 = s1*a mod m (t-coefficients dropped)
    let mut r0 = m.to_vec();
    let mut r1 = fp_rem(a, m, p);
    let mut s0: Vec<u64> = vec![];
    let mut s1: Vec<u64> = vec![1];
    while !r1.is_empty() {
        // r0 = q*r1 + r2
        let (q, r2) = fp_divmod(&r0, &r1, p);
        let qs1 = fp_mul_plain(&q, &s1, p);
        let s2 = fp_sub(&s0, &qs1, p);
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    if r0.len() != 1 {
        return None; // gcd not a unit constant
    }
    let c = mod_inv_u64(r0[0], p);
    let mut out: Vec<u64> = s0.iter().map(|&x| (x * c) % p).collect();
    out = fp_rem(&out, m, p);
    Some(out)
}

fn fp_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let db = b.len() - 1;
    let mut q = vec![0u64; r.len().saturating_sub(db).max(1)];
    let lead_inv = mod_inv_u64(b[db], p);
    while r.len() > db || (r.len() == db + 1) {
        if r.len() < db + 1 {
            break;
        }
        let k = r.len() - 1 - db;
        let c = (r[r.len() - 1] * lead_inv) % p;
        q[k] = (q[k] + c) % p;
        for i in 0..=db {
            let t = (c * b[i]) % p;
            r[k + i] = (r[k + i] + p - t) % p;
        }
        fp_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    fp_trim(&mut q);
    (q, r)
}

fn fp_mul_plain(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            c[i + j] = (c[i + j] + ai * bj) % p;
        }
    }
    fp_trim(&mut c);
    c
}

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut c = vec![0u64; n];
    for i in 0..n {
        let ai = a.get(i).copied().unwrap_or(0);
        let bi = b.get(i).copied().unwrap_or(0);
        c[i] = (ai + p - bi) % p;
    }
    fp_trim(&mut c);
    c
}

fn mod_inv_u64(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a not divisible by p.
    let mut r: u64 = 1;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Irreducibility over F_p of a monic degree-n polynomial:
/// x^{p^n} = x mod f, and gcd(x^{p^{n/t}} - x, f) = 1 for each prime t | n.
pub fn irreducible_mod_p(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    let x = vec![0u64, 1];
    let xr = fp_rem(&x, f, p);
    let q_pow = |k: usize| -> u128 { (0..k).fold(1u128, |a, _| a * p as u128) };
    let xq = fp_powmod(&x, q_pow(n), f, p);
    if fp_sub(&xq, &xr, p) != Vec::<u64>::new() {
        return false;
    }
    let mut m = n;
    let mut primes = vec![];
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            primes.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for t in primes {
        let xq = fp_powmod(&x, q_pow(n / t), f, p);
        let g = fp_gcd(&fp_sub(&xq, &x, p), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Conway polynomial table (low coefficient first, monic) for the pairs the
/// catalog exercises; out-of-table pairs fall back to the lexicographically
/// smallest monic irreducible, which is deterministic across runs.
fn conway(p: u64, e: usize) -> Option<Vec<u64>> {
    let t: &[u64] = match (p, e) {
        (3, 1) => &[1, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (3, 5) => &[1, 2, 0, 0, 0, 1],
        (3, 6) => &[2, 2, 1, 0, 2, 0, 1],
        (5, 1) => &[3, 1],
        (5, 2) => &[2, 4, 1],
        (7, 1) => &[4, 1],
        (7, 2) => &[3, 6, 1],
        _ => return None,
    };
    Some(t.to_vec())
}

fn smallest_irreducible(p: u64, e: usize) -> Vec<u64> {
    // lex order on (c_0, ..., c_{e-1}) of monic x^e + sum c_i x^i
    let mut c = vec![0u64; e];
    loop {
        let mut f = c.clone();
        f.push(1);
        if irreducible_mod_p(&f, p) {
            return f;
        }
        let mut i = 0;
        loop {
            c[i] += 1;
            if c[i] < p {
                break;
            }
            c[i] = 0;
            i += 1;
            assert!(i < e, "no irreducible found, impossible");
        }
    }
}

// ---------------------------------------------------------------------------
// ring context
// ---------------------------------------------------------------------------

struct RingCtx {
    p: u64,
    e: usize,
    n: usize,
    pn: u64,
    modulus: Vec<u64>, // length e+1, coefficients mod p^n, monic
    frob: Vec<Vec<Vec<u64>>>, // frob[k][col] = coordinates of sigma^k(x^col)
}

/// A truncated unramified local ring O_E/p_E^N, shareable across threads.
#[derive(Clone)]
pub struct Ring(Arc<RingCtx>);

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring(p={}, e={}, N={})", self.0.p, self.0.e, self.0.n)
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.e == other.0.e
                && self.0.n == other.0.n
                && self.0.modulus == other.0.modulus)
    }
}
impl Eq for Ring {}

impl Ring {
    /// Unramified ring of degree `e` over Z_p, truncated at p^N, with the
    /// Conway modulus (or the deterministic fallback modulus off-table).
    pub fn unramified(p: u64, e: usize, n: usize) -> Result<Ring> {
        let f = conway(p, e).unwrap_or_else(|| smallest_irreducible(p, e));
        Ring::with_modulus(p, e, n, &f)
    }

    /// Ring with an explicit monic modulus given by integer coefficients
    /// (low first, length e+1); the reduction mod p must be irreducible.
    pub fn with_modulus(p: u64, e: usize, n: usize, modulus: &[u64]) -> Result<Ring> {
        if !is_prime(p) {
            return Err(Error::SpecMismatch(format!("{p} is not prime")));
        }
        if n == 0 || e == 0 {
            return Err(Error::SpecMismatch("need N >= 1 and e >= 1".into()));
        }
        let bits = (n as f64) * (p as f64).log2();
        if bits > 62.0 {
            return Err(Error::SpecMismatch(format!(
                "p^N = {p}^{n} does not fit the word-size representation"
            )));
        }
        if modulus.len() != e + 1 {
            return Err(Error::SpecMismatch("modulus degree must equal e".into()));
        }
        let pn = pow_u64(p, n);
        let modulus: Vec<u64> = modulus.iter().map(|&c| c % pn).collect();
        if modulus[e] != 1 {
            return Err(Error::SpecMismatch("modulus must be monic".into()));
        }
        let res: Vec<u64> = modulus.iter().map(|&c| c % p).collect();
        if !irreducible_mod_p(&res, p) {
            return Err(Error::SpecMismatch(
                "modulus is reducible over the residue field".into(),
            ));
        }
        let mut ctx = RingCtx {
            p,
            e,
            n,
            pn,
            modulus,
            frob: vec![],
        };
        ctx.frob = ctx.build_frobenius();
        Ok(Ring(Arc::new(ctx)))
    }

    fn norm_elt(&self, c: Vec<u64>) -> Elt {
        let val = c
            .iter()
            .map(|&x| vp(x, self.0.p, self.0.n))
            .min()
            .unwrap_or(self.0.n);
        Elt {
            ring: self.clone(),
            c,
            val,
        }
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn e(&self) -> usize {
        self.0.e
    }
    pub fn n(&self) -> usize {
        self.0.n
    }
    pub fn pn(&self) -> u64 {
        self.0.pn
    }
    /// Residue field size q = p^e.
    pub fn q(&self) -> u64 {
        pow_u64(self.0.p, self.0.e)
    }
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> Elt {
        Elt {
            ring: self.clone(),
            c: vec![0; self.0.e],
            val: self.0.n,
        }
    }

    pub fn one(&self) -> Elt {
        self.from_int(1)
    }

    /// The class of the integer `k` (negative values allowed).
    pub fn from_int(&self, k: i64) -> Elt {
        let pn = self.0.pn as i128;
        let r = ((k as i128 % pn) + pn) % pn;
        let mut c = vec![0u64; self.0.e];
        c[0] = r as u64;
        self.norm_elt(c)
    }

    /// The canonical generator x of the polynomial representation.
    pub fn gen(&self) -> Elt {
        let mut c = vec![0u64; self.0.e];
        if self.0.e == 1 {
            // degree-1 modulus x + a: generator is the class of -a
            let a = self.0.modulus[0];
            c[0] = (self.0.pn - a) % self.0.pn;
        } else {
            c[1] = 1;
        }
        self.norm_elt(c)
    }

    /// Element from coefficient vector (low first, length <= e), reduced mod p^N.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Elt {
        assert!(coeffs.len() <= self.0.e, "coefficient vector too long");
        let pn = self.0.pn as i128;
        let mut c = vec![0u64; self.0.e];
        for (i, &k) in coeffs.iter().enumerate() {
            c[i] = (((k as i128 % pn) + pn) % pn) as u64;
        }
        self.norm_elt(c)
    }

    /// Same (p, e, modulus) ring at a different precision. Digits are shared:
    /// the Conway modulus has integer coefficients independent of N.
    pub fn at_precision(&self, n: usize) -> Result<Ring> {
        let m: Vec<u64> = if n >= self.0.n {
            self.0.modulus.clone()
        } else {
            let pn = pow_u64(self.0.p, n);
            self.0.modulus.iter().map(|&c| c % pn).collect()
        };
        Ring::with_modulus(self.0.p, self.0.e, n, &m)
    }
}

impl RingCtx {
    fn build_frobenius(&self) -> Vec<Vec<Vec<u64>>> {
        let e = self.e;
        if e == 1 {
            return vec![vec![vec![1]]];
        }
        // residue conjugate root: x^p mod (modulus, p)
        let res_mod: Vec<u64> = self.modulus.iter().map(|&c| c % self.p).collect();
        let x = vec![0u64, 1];
        let mut y_res = fp_powmod(&x, self.p as u128, &res_mod, self.p);
        y_res.resize(e, 0);
        // Hensel lift: Newton on f(y) = 0 in the ring itself
        let mut y: Vec<u64> = y_res;
        let steps = (usize::BITS - (self.n - 1).leading_zeros()) as usize + 1;
        for _ in 0..steps {
            let f_y = self.poly_eval_vec(&self.modulus, &y);
            let fp_y = self.poly_eval_vec(&self.derivative(), &y);
            let fp_inv = self
                .inv_vec(&fp_y)
                .expect("modulus not separable at lifted root");
            let corr = self.mul_vec(&f_y, &fp_inv);
            for i in 0..e {
                y[i] = (y[i] + self.pn - corr[i]) % self.pn;
            }
        }
        debug_assert!(self.poly_eval_vec(&self.modulus, &y).iter().all(|&c| c == 0));
        // matrix of sigma on the coefficient basis, then its powers
        let mut m = vec![vec![0u64; e]; e]; // m[col] = sigma(x^col) coords
        let mut pow = vec![0u64; e];
        pow[0] = 1;
        for col in 0..e {
            m[col] = pow.clone();
            if col + 1 < e {
                pow = self.mul_vec(&pow, &y);
            }
        }
        let mut frob = Vec::with_capacity(e);
        // identity
        let mut id = vec![vec![0u64; e]; e];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1;
        }
        frob.push(id);
        let mut cur = m.clone();
        for _ in 1..e {
            frob.push(cur.clone());
            cur = self.mat_compose(&m, &cur);
        }
        // sigma^e must be the identity
        debug_assert_eq!(self.mat_compose(&m, &frob[e - 1]), frob[0]);
        frob
    }

    fn derivative(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.e];
        for i in 1..=self.e {
            d[i - 1] = (self.modulus[i] as u128 * i as u128 % self.pn as u128) as u64;
        }
        d
    }

    // composition a∘b of coefficient-basis linear maps (column convention)
    fn mat_compose(&self, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let e = self.e;
        let mut out = vec![vec![0u64; e]; e];
        for col in 0..e {
            for (k, &bk) in b[col].iter().enumerate() {
                if bk == 0 {
                    continue;
                }
                for i in 0..e {
                    out[col][i] = ((out[col][i] as u128
                        + a[k][i] as u128 * bk as u128)
                        % self.pn as u128) as u64;
                }
            }
        }
        out
    }

    fn add_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= self.pn {
                    s - self.pn
                } else {
                    s
                }
            })
            .collect()
    }

    fn mul_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let e = self.e;
        let pn = self.pn as u128;
        let mut prod = vec![0u128; 2 * e - 1];
        for i in 0..e {
            if a[i] == 0 {
                continue;
            }
            for j in 0..e {
                prod[i + j] = (prod[i + j] + a[i] as u128 * b[j] as u128) % pn;
            }
        }
        // reduce by the monic modulus
        for i in (e..2 * e - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..e {
                let t = c * self.modulus[j] as u128 % pn;
                let idx = i - e + j;
                prod[idx] = (prod[idx] + pn - t) % pn;
            }
        }
        prod[..e].iter().map(|&x| x as u64).collect()
    }

    fn poly_eval_vec(&self, poly: &[u64], at: &[u64]) -> Vec<u64> {
        // Horner over the ring
        let e = self.e;
        let mut acc = vec![0u64; e];
        for &c in poly.iter().rev() {
            acc = self.mul_vec(&acc, at);
            acc[0] = ((acc[0] as u128 + c as u128) % self.pn as u128) as u64;
        }
        acc
    }

    fn inv_vec(&self, a: &[u64]) -> Option<Vec<u64>> {
        // unit check
        if a.iter().all(|&c| c % self.p == 0) {
            return None;
        }
        // residue inverse, then Newton: z <- z(2 - az)
        let res: Vec<u64> = a.iter().map(|&c| c % self.p).collect();
        let res_mod: Vec<u64> = self.modulus.iter().map(|&c| c % self.p).collect();
        let mut z = fp_inv_mod(&res, &res_mod, self.p)?;
        z.resize(self.e, 0);
        let steps = (usize::BITS - (self.n - 1).leading_zeros()) as usize + 1;
        let two = {
            let mut t = vec![0u64; self.e];
            t[0] = 2 % self.pn;
            t
        };
        for _ in 0..steps {
            let az = self.mul_vec(a, &z);
            let mut t = vec![0u64; self.e];
            for i in 0..self.e {
                t[i] = (two[i] + self.pn - az[i]) % self.pn;
            }
            z = self.mul_vec(&z, &t);
        }
        Some(z)
    }
}

impl Ring {
    /// Structured text record for this spec; stable across versions.
    pub fn spec_record(&self) -> String {
        let coeffs: Vec<String> = self.0.modulus.iter().map(|c| c.to_string()).collect();
        format!(
            "ring {{ p {} e {} N {} modulus {} }}",
            self.0.p,
            self.0.e,
            self.0.n,
            coeffs.join(" ")
        )
    }

    pub fn parse_spec_record(s: &str) -> Result<Ring> {
        let toks: Vec<&str> = s
            .trim()
            .trim_start_matches("ring")
            .trim()
            .trim_start_matches('{')
            .trim_end_matches('}')
            .split_whitespace()
            .collect();
        let mut p = None;
        let mut e = None;
        let mut n = None;
        let mut modulus = vec![];
        let mut i = 0;
        while i < toks.len() {
            match toks[i] {
                "p" => {
                    p = toks.get(i + 1).and_then(|t| t.parse().ok());
                    i += 2;
                }
                "e" => {
                    e = toks.get(i + 1).and_then(|t| t.parse().ok());
                    i += 2;
                }
                "N" => {
                    n = toks.get(i + 1).and_then(|t| t.parse().ok());
                    i += 2;
                }
                "modulus" => {
                    i += 1;
                    while i < toks.len() {
                        modulus.push(
                            toks[i]
                                .parse()
                                .map_err(|_| Error::ConfigError("bad modulus coefficient".into()))?,
                        );
                        i += 1;
                    }
                }
                _ => return Err(Error::ConfigError(format!("bad spec token `{}`", toks[i]))),
            }
        }
        let (p, e, n) = (
            p.ok_or_else(|| Error::ConfigError("missing p".into()))?,
            e.ok_or_else(|| Error::ConfigError("missing e".into()))?,
            n.ok_or_else(|| Error::ConfigError("missing N".into()))?,
        );
        Ring::with_modulus(p, e, n, &modulus)
    }

    /// All residue representatives (coefficients in [0, p)) — the residue
    /// field enumerated as ring elements. Size q = p^e; intended for small e.
    pub fn residue_reps(&self) -> Vec<Elt> {
        let e = self.0.e;
        let p = self.0.p;
        let total = pow_u64(p, e);
        let mut out = Vec::with_capacity(total as usize);
        for mut k in 0..total {
            let mut c = vec![0u64; e];
            for ci in c.iter_mut() {
                *ci = k % p;
                k /= p;
            }
            out.push(self.norm_elt(c));
        }
        out
    }

    /// All elements mod p^c (c <= N), as canonical representatives.
    /// Size p^{ce}; intended for desk-scale enumeration only.
    pub fn reps_mod(&self, c: usize) -> Vec<Elt> {
        assert!(c <= self.0.n);
        let e = self.0.e;
        let pc = pow_u64(self.0.p, c);
        let total = (pc as u128).pow(e as u32);
        assert!(total <= 1 << 24, "enumeration too large");
        let mut out = Vec::with_capacity(total as usize);
        let mut idx = vec![0u64; e];
        loop {
            let c_vec: Vec<u64> = idx.clone();
            out.push(self.norm_elt(c_vec));
            let mut i = 0;
            loop {
                if i == e {
                    return out;
                }
                idx[i] += 1;
                if idx[i] < pc {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// elements
// ---------------------------------------------------------------------------

/// An element of a truncated unramified ring: polynomial representative with
/// cached valuation. Valuation ≥ N compares equal to zero.
#[derive(Clone)]
pub struct Elt {
    ring: Ring,
    c: Vec<u64>,
    val: usize,
}

impl fmt::Debug for Elt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?} @ p^{}]", self.c, self.ring.0.n)
    }
}

impl PartialEq for Elt {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.c == other.c
    }
}
impl Eq for Elt {}

impl std::hash::Hash for Elt {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl Elt {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    /// Valuation in [0, N]; N means zero at this precision.
    pub fn val(&self) -> usize {
        self.val
    }

    pub fn is_zero(&self) -> bool {
        self.val >= self.ring.0.n
    }

    pub fn is_unit(&self) -> bool {
        self.val == 0
    }

    fn check_ring(&self, other: &Elt) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::SpecMismatch(format!(
                "{:?} vs {:?}",
                self.ring, other.ring
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Elt) -> Result<Elt> {
        self.check_ring(other)?;
        Ok(self.ring.norm_elt(self.ring.0.add_vec(&self.c, &other.c)))
    }

    pub fn sub(&self, other: &Elt) -> Result<Elt> {
        self.check_ring(other)?;
        Ok(self.add(&other.neg())?)
    }

    pub fn neg(&self) -> Elt {
        let pn = self.ring.0.pn;
        let c: Vec<u64> = self.c.iter().map(|&x| (pn - x) % pn).collect();
        self.ring.norm_elt(c)
    }

    pub fn mul(&self, other: &Elt) -> Result<Elt> {
        self.check_ring(other)?;
        Ok(self.ring.norm_elt(self.ring.0.mul_vec(&self.c, &other.c)))
    }

    pub fn mul_int(&self, k: i64) -> Elt {
        self.mul(&self.ring.from_int(k)).unwrap()
    }

    /// Multiplicative inverse of a unit.
    pub fn inv(&self) -> Result<Elt> {
        match self.ring.0.inv_vec(&self.c) {
            Some(z) => Ok(self.ring.norm_elt(z)),
            None => Err(Error::NotAUnit { val: self.val }),
        }
    }

    pub fn pow(&self, k: i64) -> Result<Elt> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = self.ring.one();
        let mut b = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b)?;
            }
            b = b.mul(&b)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Multiply by p^k (k >= 0 shifts deeper; digits beyond precision drop).
    pub fn mul_p_pow(&self, k: usize) -> Elt {
        let pk = pow_u64(self.ring.0.p, k.min(self.ring.0.n));
        let pn = self.ring.0.pn as u128;
        let c: Vec<u64> = self
            .c
            .iter()
            .map(|&x| (x as u128 * pk as u128 % pn) as u64)
            .collect();
        self.ring.norm_elt(c)
    }

    /// Exact division by p^k; requires valuation >= k. The result is the
    /// canonical representative, unique mod p^{N-k}.
    pub fn div_p_pow(&self, k: usize) -> Result<Elt> {
        if self.val < k {
            return Err(Error::PrecisionExhausted(format!(
                "divide valuation {} by p^{}",
                self.val, k
            )));
        }
        let pk = pow_u64(self.ring.0.p, k);
        let c: Vec<u64> = self.c.iter().map(|&x| x / pk).collect();
        Ok(self.ring.norm_elt(c))
    }

    /// a = p^v * unit; errors on zero. The unit is unique mod p^{N-v}.
    pub fn unit_decompose(&self) -> Result<(usize, Elt)> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        let v = self.val;
        Ok((v, self.div_p_pow(v)?))
    }

    /// Arithmetic Frobenius lift, `power` taken mod e. Fixes the base;
    /// frobenius(·, e) is the identity.
    pub fn frobenius(&self, power: i64) -> Elt {
        let e = self.ring.0.e as i64;
        let k = ((power % e) + e) % e;
        let m = &self.ring.0.frob[k as usize];
        let pn = self.ring.0.pn as u128;
        let mut out = vec![0u64; self.ring.0.e];
        for (col, &c) in self.c.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for i in 0..self.ring.0.e {
                out[i] = ((out[i] as u128 + m[col][i] as u128 * c as u128) % pn) as u64;
            }
        }
        self.ring.norm_elt(out)
    }

    /// Norm to the fixed subring of sigma^subdegree: the product of the
    /// e/subdegree conjugates under sigma^subdegree. The result stays in this
    /// ring and is verified to be fixed.
    pub fn norm_to_fixed(&self, subdegree: usize) -> Result<Elt> {
        let e = self.ring.0.e;
        if subdegree == 0 || e % subdegree != 0 {
            return Err(Error::DegreeMismatch {
                sub: subdegree,
                deg: e,
            });
        }
        let mut acc = self.ring.one();
        for i in 0..e / subdegree {
            acc = acc.mul(&self.frobenius((i * subdegree) as i64))?;
        }
        debug_assert_eq!(acc.frobenius(subdegree as i64), acc);
        Ok(acc)
    }

    /// Trace to the fixed subring of sigma^subdegree (sum of conjugates).
    pub fn trace_to_fixed(&self, subdegree: usize) -> Result<Elt> {
        let e = self.ring.0.e;
        if subdegree == 0 || e % subdegree != 0 {
            return Err(Error::DegreeMismatch {
                sub: subdegree,
                deg: e,
            });
        }
        let mut acc = self.ring.zero();
        for i in 0..e / subdegree {
            acc = acc.add(&self.frobenius((i * subdegree) as i64))?;
        }
        debug_assert_eq!(acc.frobenius(subdegree as i64), acc);
        Ok(acc)
    }

    /// Extract the value as an element of the prime subring Z/p^N; the higher
    /// coordinates must vanish.
    pub fn to_base(&self) -> Result<u64> {
        if self.c[1..].iter().any(|&x| x != 0) {
            return Err(Error::SpecMismatch(
                "element does not lie in the prime subring".into(),
            ));
        }
        Ok(self.c[0])
    }

    /// Reinterpret in a ring of the same (p, e, modulus) at different
    /// precision, treating the stored digits as an exact integer
    /// representative (valid for canonical enumeration digits).
    pub fn lift_to(&self, target: &Ring) -> Result<Elt> {
        if target.0.p != self.ring.0.p
            || target.0.e != self.ring.0.e
        {
            return Err(Error::SpecMismatch("lift between unrelated rings".into()));
        }
        let pn = target.0.pn;
        let c: Vec<u64> = self.c.iter().map(|&x| x % pn).collect();
        Ok(target.norm_elt(c))
    }

    /// Canonical representative mod p^c (digits above c cleared).
    pub fn truncate_digits(&self, c_depth: usize) -> Elt {
        let pc = pow_u64(self.ring.0.p, c_depth.min(self.ring.0.n));
        let c: Vec<u64> = self.c.iter().map(|&x| x % pc).collect();
        self.ring.norm_elt(c)
    }
}

// ---------------------------------------------------------------------------
// scaled elements
// ---------------------------------------------------------------------------

/// A ring element divided by a power of p: value p^{-shift} * mantissa, with
/// an explicit record of how many low digits of the value are trustworthy.
/// Arithmetic tracks the precision debt incurred by divisions; queries that
/// would need digits past `abs_prec` fail with PrecisionExhausted instead of
/// returning garbage. Exact inputs (enumeration digits, integer payloads)
/// start with full precision.
#[derive(Clone, Debug)]
pub struct ScaledElt {
    shift: u32,
    m: Elt,
    /// Value is correct mod p^{abs_prec}.
    abs_prec: i64,
}

impl ScaledElt {
    pub fn exact(m: Elt) -> ScaledElt {
        let n = m.ring().n() as i64;
        ScaledElt {
            shift: 0,
            m,
            abs_prec: n,
        }
    }

    /// Value p^{-shift} * m for an exact mantissa.
    pub fn exact_shifted(m: Elt, shift: u32) -> ScaledElt {
        let n = m.ring().n() as i64;
        ScaledElt {
            shift,
            m,
            abs_prec: n - shift as i64,
        }
        .normalized()
    }

    pub fn p_pow(ring: &Ring, k: i64) -> ScaledElt {
        if k >= 0 {
            ScaledElt::exact(ring.one().mul_p_pow(k as usize))
        } else {
            ScaledElt::exact_shifted(ring.one(), (-k) as u32)
        }
    }

    pub fn zero(ring: &Ring) -> ScaledElt {
        ScaledElt::exact(ring.zero())
    }

    pub fn one(ring: &Ring) -> ScaledElt {
        ScaledElt::exact(ring.one())
    }

    pub fn ring(&self) -> &Ring {
        self.m.ring()
    }

    pub fn mantissa(&self) -> &Elt {
        &self.m
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn abs_prec(&self) -> i64 {
        self.abs_prec
    }

    fn normalized(mut self) -> ScaledElt {
        while self.shift > 0 && !self.m.is_zero() && self.m.val() >= 1 {
            self.m = self.m.div_p_pow(1).unwrap();
            self.shift -= 1;
        }
        if self.m.is_zero() && self.shift > 0 {
            self.shift = 0;
        }
        self
    }

    /// Lower bound for the valuation of the value (exact when below abs_prec).
    pub fn val_lb(&self) -> i64 {
        self.m.val() as i64 - self.shift as i64
    }

    pub fn val_exact(&self) -> Result<i64> {
        let lb = self.val_lb();
        if lb < self.abs_prec {
            Ok(lb)
        } else {
            Err(Error::PrecisionExhausted(format!(
                "valuation >= {} not separated from zero",
                self.abs_prec
            )))
        }
    }

    /// Decide val(value) >= k, or report that the stored digits cannot.
    pub fn val_at_least(&self, k: i64) -> Result<bool> {
        let lb = self.val_lb();
        if lb >= k && self.abs_prec >= k {
            return Ok(true);
        }
        if lb < k && lb < self.abs_prec {
            return Ok(false);
        }
        Err(Error::PrecisionExhausted(format!(
            "cannot decide valuation >= {k} at precision {}",
            self.abs_prec
        )))
    }

    pub fn is_zero_mantissa(&self) -> bool {
        self.m.is_zero()
    }

    pub fn neg(&self) -> ScaledElt {
        ScaledElt {
            shift: self.shift,
            m: self.m.neg(),
            abs_prec: self.abs_prec,
        }
    }

    pub fn add(&self, other: &ScaledElt) -> Result<ScaledElt> {
        let s = self.shift.max(other.shift);
        let a = self.m.mul_p_pow((s - self.shift) as usize);
        let b = other.m.mul_p_pow((s - other.shift) as usize);
        let n = self.ring().n() as i64;
        let abs = self
            .abs_prec
            .min(other.abs_prec)
            .min(n - s as i64);
        Ok(ScaledElt {
            shift: s,
            m: a.add(&b)?,
            abs_prec: abs,
        }
        .normalized())
    }

    pub fn sub(&self, other: &ScaledElt) -> Result<ScaledElt> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ScaledElt) -> Result<ScaledElt> {
        let s = self.shift + other.shift;
        let n = self.ring().n() as i64;
        let abs = (other.abs_prec + self.val_lb())
            .min(self.abs_prec + other.val_lb())
            .min(n - s as i64);
        Ok(ScaledElt {
            shift: s,
            m: self.m.mul(&other.m)?,
            abs_prec: abs,
        }
        .normalized())
    }

    pub fn mul_int(&self, k: i64) -> ScaledElt {
        ScaledElt {
            shift: self.shift,
            m: self.m.mul_int(k),
            abs_prec: self.abs_prec,
        }
        .normalized()
    }

    /// Inverse of any element with a separated valuation.
    pub fn inv(&self) -> Result<ScaledElt> {
        let v = self.val_exact()?; // PrecisionExhausted if not separated
        let mv = self.m.val();
        let unit = self.m.div_p_pow(mv)?;
        let uinv = unit.inv()?;
        // relative precision of the unit: digits of trust past its valuation
        let rel = self.abs_prec - v;
        let shift_new = v; // value p^{-v} * unit^{-1} -> inverse is p^{... }
        let _ = shift_new;
        let out = if v >= 0 {
            ScaledElt {
                shift: v as u32,
                m: uinv,
                abs_prec: rel - v,
            }
        } else {
            ScaledElt {
                shift: 0,
                m: uinv.mul_p_pow((-v) as usize),
                abs_prec: (rel - v).min(self.ring().n() as i64),
            }
        };
        Ok(out.normalized())
    }

    pub fn pow(&self, k: i64) -> Result<ScaledElt> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = ScaledElt::one(self.ring());
        let mut b = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b)?;
            }
            b = b.mul(&b)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn frobenius(&self, power: i64) -> ScaledElt {
        ScaledElt {
            shift: self.shift,
            m: self.m.frobenius(power),
            abs_prec: self.abs_prec,
        }
    }

    /// The mantissa as a plain unit ring element; requires valuation exactly 0.
    pub fn as_unit_elt(&self) -> Result<Elt> {
        if self.val_exact()? != 0 {
            return Err(Error::NotAUnit {
                val: self.val_lb().max(0) as usize,
            });
        }
        let e = self.clone().normalized();
        debug_assert_eq!(e.shift, 0);
        Ok(e.m)
    }

    /// The value as a plain ring element; requires valuation >= 0.
    pub fn as_integral_elt(&self) -> Result<Elt> {
        let e = self.clone().normalized();
        if e.shift != 0 {
            return Err(Error::PrecisionExhausted(format!(
                "element has a pole of order {}",
                e.shift
            )));
        }
        Ok(e.m)
    }

    /// Values congruent mod p^k?
    pub fn eq_mod(&self, other: &ScaledElt, k: i64) -> Result<bool> {
        self.sub(other)?.val_at_least(k)
    }
}

// ---------------------------------------------------------------------------
// extension towers
// ---------------------------------------------------------------------------

/// Compatible embedding between two truncated rings over the same p, with the
/// small ring's degree dividing the big ring's. The embedding commutes with
/// Frobenius: sigma_big ∘ embed = embed ∘ sigma_small, because both lift the
/// residue p-power map and Hensel roots are unique.
pub struct Tower {
    pub small: Ring,
    pub big: Ring,
    root: Elt, // image of the small ring's generator
}

impl Tower {
    pub fn new(small: &Ring, big: &Ring) -> Result<Tower> {
        if small.p() != big.p() {
            return Err(Error::SpecMismatch("different primes in tower".into()));
        }
        if big.e() % small.e() != 0 {
            return Err(Error::DegreeMismatch {
                sub: small.e(),
                deg: big.e(),
            });
        }
        if small.n() != big.n() {
            return Err(Error::SpecMismatch("tower layers need equal precision".into()));
        }
        // residue roots of the small modulus in the big residue field,
        // deterministic choice: lexicographically smallest coefficient vector
        let p = big.p();
        let res_poly: Vec<u64> = small.modulus().iter().map(|&c| c % p).collect();
        let mut root_res: Option<Elt> = None;
        for cand in big.residue_reps() {
            let mut acc = big.zero();
            for &c in res_poly.iter().rev() {
                acc = acc.mul(&cand).unwrap();
                acc = acc.add(&big.from_int(c as i64)).unwrap();
            }
            // root mod p
            if acc.val() >= 1 {
                root_res = Some(cand);
                break;
            }
        }
        let root_res = root_res.ok_or_else(|| {
            Error::SpecMismatch("small modulus has no residue root in big ring".into())
        })?;
        // Hensel lift in the big ring
        let modulus_lift: Vec<i64> = small.modulus().iter().map(|&c| c as i64).collect();
        let eval = |y: &Elt, poly: &[i64]| -> Elt {
            let mut acc = big.zero();
            for &c in poly.iter().rev() {
                acc = acc.mul(y).unwrap().add(&big.from_int(c)).unwrap();
            }
            acc
        };
        let deriv: Vec<i64> = (1..modulus_lift.len())
            .map(|i| modulus_lift[i] * i as i64)
            .collect();
        let mut y = root_res;
        let steps = (usize::BITS - (big.n() - 1).leading_zeros()) as usize + 1;
        for _ in 0..steps {
            let f_y = eval(&y, &modulus_lift);
            let d_y = eval(&y, &deriv).inv()?;
            y = y.sub(&f_y.mul(&d_y)?)?;
        }
        if !eval(&y, &modulus_lift).is_zero() {
            return Err(Error::SpecMismatch("Hensel lift failed in tower".into()));
        }
        Ok(Tower {
            small: small.clone(),
            big: big.clone(),
            root: y,
        })
    }

    /// Injective ring map commuting with Frobenius.
    pub fn embed(&self, a: &Elt) -> Result<Elt> {
        if a.ring() != &self.small {
            return Err(Error::SpecMismatch("embed from wrong ring".into()));
        }
        let mut acc = self.big.zero();
        for &c in a.coeffs().iter().rev() {
            acc = acc.mul(&self.root)?;
            acc = acc.add(&self.big.from_int(c as i64))?;
        }
        Ok(acc)
    }
}
