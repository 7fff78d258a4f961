//! Exact arithmetic in GF(p^h).
//!
//! The modulus is chosen deterministically: monic degree-h candidates are walked in
//! the signed lexicographic order used by the standard primitive-polynomial tables
//! (most significant coefficient first, sign alternating with degree), and the first
//! primitive polynomial wins. For h = 1 this picks t - g with g the smallest
//! primitive root, for GF(4) it picks t^2 + t + 1. Every downstream id in this crate
//! depends on that choice being stable.
//!
//! Elements are handled by their integer encoding sum(coeffs[i] * p^i); the encoding
//! is a bijection onto [0, p^h). Fields of order at most 2^16 carry exp/log tables,
//! small ones additionally a full addition table, so the hot paths in geometry
//! enumeration are table lookups.

use crate::error::{Error, Result};

/// Largest supported field order p^h.
pub const MAX_ORDER: u64 = 1 << 20;
/// Orders up to this get exp/log tables.
const TABLE_LIMIT: u64 = 1 << 16;
/// Orders up to this additionally get a full order-by-order addition table.
const ADD_TABLE_LIMIT: u64 = 512;

/// Element of a [`Field`], stored as its integer encoding.
///
/// An `El` is only meaningful together with the field that produced it; mixing
/// elements of different fields is a logic error the type does not catch.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct El(u32);

impl El {
    pub const ZERO: El = El(0);
    pub const ONE: El = El(1);

    /// Integer encoding in [0, order).
    #[inline]
    pub fn index(self) -> u64 {
        self.0 as u64
    }
}

/// GF(p^h) with a fixed primitive modulus and precomputed tables.
pub struct Field {
    p: u64,
    h: u32,
    order: u64,
    /// Modulus coefficients c_0..c_h, monic (c_h = 1), primitive over F_p.
    modulus: Vec<u64>,
    /// exp[i] = encoding of t^i, doubled so exp[log a + log b] needs no reduction.
    /// Empty when order > TABLE_LIMIT.
    exp: Vec<u32>,
    /// log[enc] with log[0] = u32::MAX as a trap value.
    log: Vec<u32>,
    /// Full addition table, order * order entries; empty above ADD_TABLE_LIMIT.
    add_tab: Vec<u32>,
    /// p^(h/2) when h is even; conjugation x -> x^sub_q is then available.
    sub_q: Option<u64>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({}^{} = {})", self.p, self.h, self.order)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factors of n without multiplicity, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Writes q = p^h with p prime, h >= 1; None when q is not a prime power.
pub fn prime_power_split(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let f = prime_factors(q);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut h = 0;
    let mut m = q;
    while m > 1 {
        m /= p;
        h += 1;
    }
    if p.pow(h) == q {
        Some((p, h))
    } else {
        None
    }
}

// ---- dense polynomial helpers over F_p (little-endian coefficient slices) ----

fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let h = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    // reduce by the monic modulus: kill leading coefficients from the top
    for d in (h..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        prod[d] = 0;
        for k in 0..h {
            let sub = (c * modulus[k]) % p;
            prod[d - h + k] = (prod[d - h + k] + p * p - sub) % p;
        }
    }
    prod.truncate(h);
    prod.resize(h, 0);
    prod
}

fn poly_pow_mod(base: &[u64], mut e: u64, modulus: &[u64], p: u64) -> Vec<u64> {
    let h = modulus.len() - 1;
    let mut acc = vec![0u64; h];
    acc[0] = 1;
    let mut b = base.to_vec();
    b.resize(h.max(base.len()), 0);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, modulus, p);
        }
        b = poly_mul_mod(&b, &b, modulus, p);
        e >>= 1;
    }
    acc
}

/// ord(t) = p^h - 1 in F_p[t]/(f)? True only for primitive (hence irreducible) f.
fn is_primitive(modulus: &[u64], p: u64, h: u32, group_factors: &[u64]) -> bool {
    if modulus[0] == 0 {
        return false; // t is not a unit
    }
    let n = p.pow(h) - 1;
    let t = if h == 1 {
        vec![(p - modulus[0]) % p]
    } else {
        let mut v = vec![0u64; h as usize];
        v[1] = 1;
        v
    };
    let one = {
        let mut v = vec![0u64; h as usize];
        v[0] = 1;
        v
    };
    if poly_pow_mod(&t, n, modulus, p) != one {
        return false;
    }
    group_factors
        .iter()
        .all(|&l| poly_pow_mod(&t, n / l, modulus, p) != one)
}

impl Field {
    /// Builds GF(p^h) with the deterministic primitive modulus.
    pub fn build(p: u64, h: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        if h == 0 || h > 8 {
            return Err(Error::InvalidParameter(format!(
                "extension degree {h} outside 1..=8"
            )));
        }
        let order = p
            .checked_pow(h)
            .filter(|&o| o <= MAX_ORDER)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("field order {p}^{h} exceeds 2^20"))
            })?;

        let group_factors = prime_factors(order - 1);
        let modulus = Self::find_modulus(p, h, &group_factors)?;

        let mut f = Field {
            p,
            h,
            order,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            add_tab: Vec::new(),
            sub_q: if h % 2 == 0 { Some(p.pow(h / 2)) } else { None },
        };
        if order <= TABLE_LIMIT {
            f.build_tables()?;
        }
        Ok(f)
    }

    /// Candidate order: word w = (w_{h-1},...,w_0) ascending, coefficient
    /// c_i = (-1)^(h-i) * w_i mod p. For h = 1 this walks t - 0, t - 1, t - 2, ...
    fn find_modulus(p: u64, h: u32, group_factors: &[u64]) -> Result<Vec<u64>> {
        let hu = h as usize;
        let order = p.pow(h);
        for word in 0..order {
            let mut coeffs = vec![0u64; hu + 1];
            coeffs[hu] = 1;
            let mut w = word;
            // word digit w_0 is the least significant base-p digit
            for i in 0..hu {
                let wi = w % p;
                w /= p;
                coeffs[i] = if (hu - i) % 2 == 1 { (p - wi) % p } else { wi };
            }
            if coeffs[0] == 0 {
                continue;
            }
            if is_primitive(&coeffs, p, h, group_factors) {
                return Ok(coeffs);
            }
        }
        Err(Error::Integrity(format!(
            "no primitive polynomial of degree {h} over F_{p}"
        )))
    }

    fn build_tables(&mut self) -> Result<()> {
        let n = (self.order - 1) as usize;
        let mut exp = Vec::with_capacity(2 * n);
        let mut log = vec![u32::MAX; self.order as usize];
        let mut cur = vec![0u64; self.h as usize];
        cur[0] = 1;
        for i in 0..n {
            let enc = self.encode_digits(&cur);
            exp.push(enc as u32);
            if log[enc as usize] != u32::MAX {
                return Err(Error::Integrity(
                    "modulus is not primitive: t repeats early".into(),
                ));
            }
            log[enc as usize] = i as u32;
            cur = self.mul_by_t(&cur);
        }
        if self.encode_digits(&cur) != 1 {
            return Err(Error::Integrity("t^(order-1) != 1".into()));
        }
        exp.extend_from_within(..n);
        self.exp = exp;
        self.log = log;

        if self.order <= ADD_TABLE_LIMIT {
            let o = self.order as usize;
            let mut tab = vec![0u32; o * o];
            for a in 0..o {
                let da = self.decode(El(a as u32));
                for b in a..o {
                    let db = self.decode(El(b as u32));
                    let sum: Vec<u64> = da
                        .iter()
                        .zip(&db)
                        .map(|(&x, &y)| (x + y) % self.p)
                        .collect();
                    let enc = self.encode_digits(&sum) as u32;
                    tab[a * o + b] = enc;
                    tab[b * o + a] = enc;
                }
            }
            self.add_tab = tab;
        }
        Ok(())
    }

    /// One LFSR step: x * t reduced by the monic modulus.
    fn mul_by_t(&self, coeffs: &[u64]) -> Vec<u64> {
        let hu = self.h as usize;
        let carry = coeffs[hu - 1];
        let mut out = vec![0u64; hu];
        for i in (1..hu).rev() {
            out[i] = coeffs[i - 1];
        }
        if carry != 0 {
            for i in 0..hu {
                let sub = (carry * self.modulus[i]) % self.p;
                out[i] = (out[i] + self.p - sub) % self.p;
            }
        }
        out
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn h(&self) -> u32 {
        self.h
    }

    #[inline]
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// q with q^2 = order, when the degree is even.
    pub fn square_root_of_order(&self) -> Option<u64> {
        self.sub_q
    }

    pub fn el(&self, index: u64) -> Result<El> {
        if index < self.order {
            Ok(El(index as u32))
        } else {
            Err(Error::InvalidParameter(format!(
                "element encoding {index} outside field of order {}",
                self.order
            )))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = El> {
        (0..self.order as u32).map(El)
    }

    /// Power-basis coordinates, length h, entries in [0, p).
    pub fn decode(&self, x: El) -> Vec<u64> {
        let mut v = vec![0u64; self.h as usize];
        let mut n = x.index();
        for d in v.iter_mut() {
            *d = n % self.p;
            n /= self.p;
        }
        v
    }

    pub fn encode(&self, coeffs: &[u64]) -> Result<El> {
        if coeffs.len() != self.h as usize {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector has length {}, expected {}",
                coeffs.len(),
                self.h
            )));
        }
        if coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidParameter(
                "coefficient out of range [0, p)".into(),
            ));
        }
        Ok(El(self.encode_digits(coeffs) as u32))
    }

    fn encode_digits(&self, coeffs: &[u64]) -> u64 {
        let mut n = 0u64;
        for &c in coeffs.iter().rev() {
            n = n * self.p + c;
        }
        n
    }

    #[inline]
    pub fn add(&self, a: El, b: El) -> El {
        if !self.add_tab.is_empty() {
            return El(self.add_tab[a.0 as usize * self.order as usize + b.0 as usize]);
        }
        if self.h == 1 {
            return El(((a.index() + b.index()) % self.p) as u32);
        }
        let da = self.decode(a);
        let db = self.decode(b);
        let sum: Vec<u64> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % self.p).collect();
        El(self.encode_digits(&sum) as u32)
    }

    pub fn neg(&self, a: El) -> El {
        if self.p == 2 {
            return a;
        }
        let da = self.decode(a);
        let nv: Vec<u64> = da.iter().map(|&x| (self.p - x) % self.p).collect();
        El(self.encode_digits(&nv) as u32)
    }

    #[inline]
    pub fn sub(&self, a: El, b: El) -> El {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: El, b: El) -> El {
        if a.0 == 0 || b.0 == 0 {
            return El::ZERO;
        }
        if !self.exp.is_empty() {
            let la = self.log[a.0 as usize] as usize;
            let lb = self.log[b.0 as usize] as usize;
            return El(self.exp[la + lb]);
        }
        if self.h == 1 {
            return El(((a.index() * b.index()) % self.p) as u32);
        }
        let prod = poly_mul_mod(&self.decode(a), &self.decode(b), &self.modulus, self.p);
        El(self.encode_digits(&prod) as u32)
    }

    pub fn inv(&self, a: El) -> Result<El> {
        if a.0 == 0 {
            return Err(Error::DivideByZero);
        }
        if !self.exp.is_empty() {
            let n = (self.order - 1) as usize;
            let la = self.log[a.0 as usize] as usize;
            return Ok(El(self.exp[(n - la) % n]));
        }
        Ok(self.pow(a, self.order - 2))
    }

    pub fn div(&self, a: El, b: El) -> Result<El> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, x: El, e: u64) -> El {
        if e == 0 {
            return El::ONE;
        }
        if x.0 == 0 {
            return El::ZERO;
        }
        if !self.exp.is_empty() {
            let n = self.order - 1;
            let lx = self.log[x.0 as usize] as u64;
            // lx < 2^16 and e % n < 2^16, so the product fits comfortably
            return El(self.exp[((lx * (e % n)) % n) as usize]);
        }
        let digits = poly_pow_mod(&self.decode(x), e, &self.modulus, self.p);
        El(self.encode_digits(&digits) as u32)
    }

    fn require_square(&self, q: u64) -> Result<u64> {
        match self.sub_q {
            Some(sq) if sq == q => Ok(sq),
            _ => Err(Error::InvalidParameter(format!(
                "field order {} is not the square of {q}",
                self.order
            ))),
        }
    }

    /// x^q, the involution fixing exactly the subfield F_q.
    pub fn conjugate(&self, x: El, q: u64) -> Result<El> {
        self.require_square(q)?;
        Ok(self.conj(x))
    }

    /// Unchecked conjugation; requires even degree (enforced at field build time
    /// by the callers that use it).
    #[inline]
    pub fn conj(&self, x: El) -> El {
        let q = self.sub_q.expect("conjugation needs even degree");
        self.pow(x, q)
    }

    /// x * x^q, always in the subfield F_q.
    pub fn norm(&self, x: El, q: u64) -> Result<El> {
        self.require_square(q)?;
        Ok(self.mul(x, self.conj(x)))
    }

    /// x + x^q, always in the subfield F_q.
    pub fn trace(&self, x: El, q: u64) -> Result<El> {
        self.require_square(q)?;
        Ok(self.add(x, self.conj(x)))
    }

    /// Membership in the subfield of order q, i.e. x^q = x.
    pub fn in_subfield(&self, x: El, q: u64) -> Result<bool> {
        self.require_square(q)?;
        Ok(self.conj(x) == x)
    }
}
