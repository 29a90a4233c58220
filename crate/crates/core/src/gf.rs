//! Table-driven arithmetic in small finite fields GF(p^e).
//!
//! Elements are encoded as integers in `[0, q)`: the polynomial
//! `c0 + c1 x + ... + c_{e-1} x^{e-1}` over GF(p) is stored as
//! `c0 + c1 p + ... + c_{e-1} p^{e-1}`. In particular the class of `x`
//! (written `ε` throughout the crate) has code `p` whenever `e > 1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Code of a field element.
pub type Elem = u16;

/// Largest field order with precomputed tables.
pub const MAX_ORDER: usize = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("field degree must be at least 1")]
    ZeroDegree,
    #[error("field of order {0} exceeds the table limit of {MAX_ORDER}")]
    TooLarge(u64),
    #[error("modulus must be monic of degree {expected} with coefficients below {p}: {detail}")]
    BadModulus { expected: u32, p: u32, detail: String },
    #[error("modulus is reducible, divisible by {factor:?} (coefficients c0..cm)")]
    Reducible { factor: Vec<u32> },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("no Hermitian conjugation on GF({p}^{e}): the degree is odd")]
    NoConjugation { p: u32, e: u32 },
    #[error("{sub} does not divide the field degree {e}")]
    NotDivisor { sub: u32, e: u32 },
    #[error("cannot parse field descriptor {0:?}")]
    Descriptor(String),
    #[error("cannot parse field element {0:?}")]
    Element(String),
}

fn is_prime(n: u32) -> bool {
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

/// Polynomials over GF(p), little-endian coefficient vectors without trailing zeros.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let dr = r.len() - 1;
            let c = r[dr] * lead_inv % p;
            let shift = dr - dm;
            for (i, &mi) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - c * mi % p)) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(&mut out);
        out
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        (1..p).find(|&b| a * b % p == 1).expect("nonzero residue")
    }

    /// All monic polynomials of the given degree, in increasing code order of
    /// their lower coefficients.
    pub fn monic_of_degree(deg: u32, p: u32) -> impl Iterator<Item = Vec<u32>> {
        let count = p.pow(deg);
        (0..count).map(move |mut code| {
            let mut c = Vec::with_capacity(deg as usize + 1);
            for _ in 0..deg {
                c.push(code % p);
                code /= p;
            }
            c.push(1);
            c
        })
    }
}

/// Returns a monic factor of `modulus` of degree `1..=deg/2`, if one exists.
fn find_factor(modulus: &[u32], p: u32) -> Option<Vec<u32>> {
    let deg = (modulus.len() - 1) as u32;
    (1..=deg / 2)
        .flat_map(|d| poly::monic_of_degree(d, p))
        .find(|f| poly::rem(modulus, f, p).is_empty())
}

/// The pinned moduli for GF(4), GF(8) and GF(9), low coefficient first.
fn pinned_modulus(p: u32, e: u32) -> Option<Vec<u32>> {
    match (p, e) {
        (2, 2) => Some(vec![1, 1, 1]),    // x^2 + x + 1
        (2, 3) => Some(vec![1, 1, 0, 1]), // x^3 + x + 1
        (3, 2) => Some(vec![2, 2, 1]),    // x^2 - x - 1
        _ => None,
    }
}

/// Lexicographically least irreducible monic polynomial of degree `e` over GF(p).
fn least_irreducible(p: u32, e: u32) -> Vec<u32> {
    if e == 1 {
        return vec![0, 1];
    }
    poly::monic_of_degree(e, p)
        .find(|m| m[0] != 0 && find_factor(m, p).is_none())
        .expect("irreducible polynomials exist in every degree")
}

/// The default modulus used for `F<q>` descriptors.
pub fn default_modulus(p: u32, e: u32) -> Vec<u32> {
    pinned_modulus(p, e).unwrap_or_else(|| least_irreducible(p, e))
}

/// A finite field GF(p^e) with full operation tables.
#[derive(Clone)]
pub struct Field {
    p: u32,
    e: u32,
    q: usize,
    modulus: Vec<u32>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
    frob: Vec<Elem>,
    /// `exp[i] = ε^i` when `ε` generates the multiplicative group.
    eps_exp: Option<Vec<Elem>>,
    eps_log: Option<Vec<u32>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.descriptor())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl Field {
    /// Builds GF(p^e) from an explicit monic modulus `[c0, c1, ..., 1]`.
    pub fn new(p: u32, e: u32, modulus: &[u32]) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
        if q > MAX_ORDER as u64 {
            return Err(FieldError::TooLarge(q));
        }
        // A list of length e leaves the leading 1 implicit; all degree-one
        // moduli give the same prime field.
        let mut modulus = modulus.to_vec();
        if modulus.len() == e as usize {
            modulus.push(1);
        }
        if e == 1 && modulus.len() == 2 && modulus[0] < p {
            modulus = vec![0, 1];
        }
        let modulus = &modulus[..];
        if modulus.len() != e as usize + 1
            || modulus.last() != Some(&1)
            || modulus.iter().any(|&c| c >= p)
        {
            return Err(FieldError::BadModulus {
                expected: e,
                p,
                detail: format!("{modulus:?}"),
            });
        }
        if e > 1 {
            if modulus[0] == 0 {
                return Err(FieldError::Reducible { factor: vec![0, 1] });
            }
            if let Some(factor) = find_factor(modulus, p) {
                return Err(FieldError::Reducible { factor });
            }
        }
        let q = q as usize;
        let digits = |mut code: usize| -> Vec<u32> {
            let mut c = Vec::with_capacity(e as usize);
            for _ in 0..e {
                c.push((code % p as usize) as u32);
                code /= p as usize;
            }
            c
        };
        let encode = |c: &[u32]| -> Elem {
            let mut code = 0usize;
            for &ci in c.iter().rev() {
                code = code * p as usize + ci as usize;
            }
            code as Elem
        };
        let polys: Vec<Vec<u32>> = (0..q).map(digits).collect();
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                let s: Vec<u32> = polys[a]
                    .iter()
                    .zip(&polys[b])
                    .map(|(x, y)| (x + y) % p)
                    .collect();
                add[a * q + b] = encode(&s);
                let mut prod = poly::rem(&poly::mul(&polys[a], &polys[b], p), modulus, p);
                prod.resize(e as usize, 0);
                mul[a * q + b] = encode(&prod);
            }
        }
        let mut neg = vec![0; q];
        let mut inv = vec![0; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as Elem;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as Elem;
            }
        }
        let mut field = Field {
            p,
            e,
            q,
            modulus: modulus.to_vec(),
            add,
            mul,
            neg,
            inv,
            frob: Vec::new(),
            eps_exp: None,
            eps_log: None,
        };
        field.frob = (0..q).map(|x| field.pow(x as Elem, p as u64)).collect();
        if e > 1 {
            let eps = p as Elem;
            if field.multiplicative_order(eps) == q as u64 - 1 {
                let mut exp = Vec::with_capacity(q - 1);
                let mut log = vec![0u32; q];
                let mut x: Elem = 1;
                for i in 0..q - 1 {
                    exp.push(x);
                    log[x as usize] = i as u32;
                    x = field.mul(x, eps);
                }
                field.eps_exp = Some(exp);
                field.eps_log = Some(log);
            }
        }
        Ok(field)
    }

    /// GF(q) with the default modulus (pinned for q = 4, 8, 9).
    pub fn with_order(q: u32) -> Result<Field, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::NotPrime(q))?;
        Field::new(p, e, &default_modulus(p, e))
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// `F<q>` for default moduli, `GF(p,e,[c0,...,1])` otherwise.
    pub fn descriptor(&self) -> String {
        if self.modulus == default_modulus(self.p, self.e) {
            format!("F{}", self.q)
        } else {
            let coeffs: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
            format!("GF({},{},[{}])", self.p, self.e, coeffs.join(","))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.q as Elem).into_iter()
    }

    /// The generator `ε` (class of `x`); the prime field has none and returns 1.
    pub fn eps(&self) -> Elem {
        if self.e > 1 {
            self.p as Elem
        } else {
            1
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    /// Multiplicative inverse; `inv(0)` is a domain error.
    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            Err(FieldError::ZeroInverse)
        } else {
            Ok(self.inv[a as usize])
        }
    }

    /// Inverse of a value already known to be nonzero.
    #[inline]
    pub(crate) fn inv_nz(&self, a: Elem) -> Elem {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, mut n: u64) -> Elem {
        let mut base = a;
        let mut acc: Elem = 1;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// `ε^k` for any integer `k` (negative exponents allowed).
    pub fn eps_pow(&self, k: i64) -> Elem {
        let order = self.q as i64 - 1;
        self.pow(self.eps(), k.rem_euclid(order) as u64)
    }

    /// Integer `n` reduced into the prime field.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.p as i64) as Elem
    }

    pub fn multiplicative_order(&self, a: Elem) -> u64 {
        assert!(a != 0, "zero has no multiplicative order");
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// `x ↦ x^p`.
    #[inline]
    pub fn frobenius(&self, x: Elem) -> Elem {
        self.frob[x as usize]
    }

    /// The involution `x ↦ x^{q0}` of GF(q0^2) over GF(q0).
    pub fn conj(&self, x: Elem) -> Result<Elem, FieldError> {
        if self.e % 2 != 0 {
            return Err(FieldError::NoConjugation { p: self.p, e: self.e });
        }
        Ok(self.conj_unchecked(x))
    }

    #[inline]
    pub(crate) fn conj_unchecked(&self, x: Elem) -> Elem {
        let mut y = x;
        for _ in 0..self.e / 2 {
            y = self.frob[y as usize];
        }
        y
    }

    /// Absolute trace to the prime field.
    pub fn abs_trace(&self, x: Elem) -> Elem {
        let mut acc = 0;
        let mut y = x;
        for _ in 0..self.e {
            acc = self.add(acc, y);
            y = self.frobenius(y);
        }
        acc
    }

    pub fn is_square(&self, x: Elem) -> bool {
        x == 0 || self.elements().any(|y| self.mul(y, y) == x)
    }

    /// The elements of the subfield of degree `sub_degree`.
    pub fn subfield(&self, sub_degree: u32) -> Result<Subfield, FieldError> {
        if sub_degree == 0 || self.e % sub_degree != 0 {
            return Err(FieldError::NotDivisor {
                sub: sub_degree,
                e: self.e,
            });
        }
        let mut mask = vec![false; self.q];
        for x in self.elements() {
            let mut y = x;
            for _ in 0..sub_degree {
                y = self.frobenius(y);
            }
            mask[x as usize] = y == x;
        }
        Ok(Subfield {
            degree: sub_degree,
            mask,
        })
    }

    /// Degrees of the subfields strictly between GF(p^{from}) and the whole field.
    pub fn intermediate_degrees(&self, from: u32) -> Vec<u32> {
        (from + 1..self.e)
            .filter(|d| self.e % d == 0 && d % from == 0)
            .collect()
    }

    /// Human-readable element: integers in the prime field, `ε`-powers otherwise.
    pub fn format_elem(&self, x: Elem) -> String {
        if x == 0 {
            return "0".into();
        }
        if (x as u32) < self.p {
            return x.to_string();
        }
        match &self.eps_log {
            Some(log) => match log[x as usize] {
                1 => "e".into(),
                k => format!("e^{k}"),
            },
            None => {
                let mut terms = Vec::new();
                let mut code = x as u32;
                for i in 0..self.e {
                    let c = code % self.p;
                    code /= self.p;
                    if c != 0 {
                        terms.push(match i {
                            0 => c.to_string(),
                            1 => format!("{c}x"),
                            _ => format!("{c}x^{i}"),
                        });
                    }
                }
                terms.join("+")
            }
        }
    }

    /// Parses `[-]n`, `[-]e`, `[-]e^k` (also with `ε`); `k` may be negative.
    pub fn parse_elem(&self, s: &str) -> Result<Elem, FieldError> {
        let err = || FieldError::Element(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-').or_else(|| t.strip_prefix('−')) {
            Some(rest) => (true, rest.trim()),
            None => (false, t),
        };
        let value = if let Some(rest) = body
            .strip_prefix('e')
            .or_else(|| body.strip_prefix('ε'))
        {
            let k: i64 = match rest.strip_prefix('^') {
                Some(exp) => exp
                    .trim_matches(|c| c == '{' || c == '}')
                    .parse()
                    .map_err(|_| err())?,
                None if rest.is_empty() => 1,
                None => return Err(err()),
            };
            self.eps_pow(k)
        } else {
            let n: i64 = body.parse().map_err(|_| err())?;
            self.from_int(n)
        };
        Ok(if neg { self.neg(value) } else { value })
    }
}

/// Splits `q` as `p^e` when it is a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut e = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

impl FromStr for Field {
    type Err = FieldError;

    /// `F<q>` or `GF(p,e,[c0,c1,...,1])`.
    fn from_str(s: &str) -> Result<Field, FieldError> {
        let err = || FieldError::Descriptor(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(q) = t.strip_prefix('F') {
            let q: u32 = q.parse().map_err(|_| err())?;
            return Field::with_order(q);
        }
        let inner = t
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(err)?;
        let (head, list) = inner.split_once('[').ok_or_else(err)?;
        let mut head = head.trim_end_matches(',').split(',');
        let p: u32 = head.next().and_then(|x| x.parse().ok()).ok_or_else(err)?;
        let e: u32 = head.next().and_then(|x| x.parse().ok()).ok_or_else(err)?;
        let coeffs: Vec<u32> = list
            .trim_end_matches(']')
            .split(',')
            .map(|c| c.parse().map_err(|_| err()))
            .collect::<Result<_, _>>()?;
        Field::new(p, e, &coeffs)
    }
}

/// A subfield GF(p^d) of a field, as a membership mask over element codes.
#[derive(Clone, Debug)]
pub struct Subfield {
    degree: u32,
    mask: Vec<bool>,
}

impl Subfield {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        self.mask[x as usize]
    }

    pub fn elements(&self) -> Vec<Elem> {
        (0..self.mask.len() as Elem)
            .filter(|&x| self.mask[x as usize])
            .collect()
    }

    pub fn order(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> Field {
        Field::with_order(q).unwrap()
    }

    #[test]
    fn prime_field_f2() {
        let f2 = Field::new(2, 1, &[1]).unwrap();
        assert_eq!(f2.add(1, 1), 0);
        assert_eq!(f2.descriptor(), "F2");
    }

    #[test]
    fn pinned_moduli() {
        let f4 = f(4);
        let e = f4.eps();
        assert_eq!(f4.mul(e, e), f4.add(e, 1));
        let f8 = f(8);
        let e = f8.eps();
        assert_eq!(f8.pow(e, 3), f8.add(e, 1));
        let f9 = f(9);
        let e = f9.eps();
        assert_eq!(f9.mul(e, e), f9.add(e, 1));
        assert_eq!(f9.pow(e, 8), 1);
    }

    #[test]
    fn inverse_of_eps_in_f4_by_search() {
        let f4 = f(4);
        let e = f4.eps();
        let y = f4.elements().find(|&y| f4.mul(e, y) == 1).unwrap();
        assert_eq!(y, f4.add(e, 1));
        assert_eq!(f4.inv(e).unwrap(), y);
        assert_eq!(f4.inv(0), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Field::new(4, 1, &[0, 1]), Err(FieldError::NotPrime(4)));
        // x^2 + 1 = (x + 1)^2 over GF(2)
        assert_eq!(
            Field::new(2, 2, &[1, 0, 1]),
            Err(FieldError::Reducible { factor: vec![1, 1] })
        );
        assert!(matches!(
            Field::new(3, 2, &[1, 1, 2]),
            Err(FieldError::BadModulus { .. })
        ));
    }

    #[test]
    fn conjugation() {
        let f4 = f(4);
        let e = f4.eps();
        assert_eq!(f4.conj(e).unwrap(), f4.mul(e, e));
        assert_eq!(f4.conj(e).unwrap(), f4.add(e, 1));
        assert_eq!(f4.conj(1).unwrap(), 1);
        let f9 = f(9);
        let e = f9.eps();
        assert_eq!(f9.conj(e).unwrap(), f9.pow(e, 3));
        assert_eq!(
            f(8).conj(3),
            Err(FieldError::NoConjugation { p: 2, e: 3 })
        );
        for q in [4, 9, 16, 25] {
            let fl = f(q);
            let fixed = fl
                .elements()
                .filter(|&x| fl.conj(x).unwrap() == x)
                .count();
            assert_eq!(fixed * fixed, q as usize);
            for x in fl.elements() {
                assert_eq!(fl.conj(fl.conj(x).unwrap()).unwrap(), x);
            }
        }
    }

    #[test]
    fn subfields() {
        assert_eq!(f(4).subfield(1).unwrap().elements(), vec![0, 1]);
        assert_eq!(f(9).subfield(1).unwrap().elements(), vec![0, 1, 2]);
        let f8 = f(8);
        let fixed: Vec<Elem> = f8.elements().filter(|&x| f8.mul(x, x) == x).collect();
        assert_eq!(f8.subfield(1).unwrap().elements(), fixed);
        assert_eq!(fixed, vec![0, 1]);
        assert!(f8.subfield(2).is_err());
        assert_eq!(f(64).intermediate_degrees(1), vec![2, 3]);
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16] {
            let fl = f(q);
            for a in fl.elements() {
                if a != 0 {
                    assert_eq!(fl.pow(a, q as u64 - 1), 1);
                }
                for b in fl.elements() {
                    assert_eq!(fl.add(a, b), fl.add(b, a));
                    assert_eq!(fl.mul(a, b), fl.mul(b, a));
                    for c in fl.elements() {
                        assert_eq!(
                            fl.mul(a, fl.add(b, c)),
                            fl.add(fl.mul(a, b), fl.mul(a, c))
                        );
                        assert_eq!(fl.mul(fl.mul(a, b), c), fl.mul(a, fl.mul(b, c)));
                    }
                }
            }
            assert!(fl.elements().any(|x| x != 0 && fl.multiplicative_order(x) == q as u64 - 1));
        }
    }

    #[test]
    fn descriptors_round_trip() {
        for s in ["F2", "F3", "F4", "F8", "F9", "F27", "GF(3,2,[1,0,1])"] {
            let fl: Field = s.parse().unwrap();
            assert_eq!(fl.descriptor(), s);
        }
        assert!("GF(2,2,[1,0,1])".parse::<Field>().is_err());
        assert!("F6".parse::<Field>().is_err());
    }

    #[test]
    fn element_notation() {
        let f9 = f(9);
        for k in 0..8 {
            let x = f9.eps_pow(k);
            assert_eq!(f9.parse_elem(&f9.format_elem(x)).unwrap(), x);
        }
        assert_eq!(f9.parse_elem("-1").unwrap(), 2);
        assert_eq!(f9.parse_elem("e^-1").unwrap(), f9.inv(f9.eps()).unwrap());
        assert_eq!(f9.parse_elem("-e").unwrap(), f9.neg(f9.eps()));
    }
}
