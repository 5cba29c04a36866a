//! Arithmetic in small finite fields F_q, q = p^m up to 2^16.
//!
//! Elements are integer indices in `0..q`: the base-p digits of an index are
//! the coefficients of its residue polynomial, least significant digit first.
//! For p = 2 the index is the familiar bit-pattern encoding. The modulus is
//! the lexicographically least monic irreducible polynomial of degree m,
//! where "least" orders coefficient tuples as base-p integers. That scan
//! lands on the textbook moduli: x^2+x+1 for F_4, x^3+x+1 for F_8,
//! x^4+x+1 for F_16, x^2+1 for F_9.

use num::complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field element, encoded as an index in `0..q`.
pub type Elem = u32;

pub const MAX_ORDER: u32 = 1 << 16;

/// Serialized form of a field: characteristic, extension degree, and the
/// modulus as little-endian coefficients (length m+1, monic). Construction
/// re-verifies irreducibility by trial division, so hand-edited JSON cannot
/// smuggle in a composite modulus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDesc {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FieldDesc", into = "FieldDesc")]
pub struct Field {
    p: u32,
    m: u32,
    q: u32,
    /// Little-endian coefficients, length m+1, leading coefficient 1.
    modulus: Vec<u32>,
}

impl TryFrom<FieldDesc> for Field {
    type Error = Error;
    fn try_from(d: FieldDesc) -> Result<Field> {
        Field::from_desc(&d)
    }
}

impl From<Field> for FieldDesc {
    fn from(f: Field) -> FieldDesc {
        FieldDesc {
            p: f.p,
            m: f.m,
            modulus: f.modulus,
        }
    }
}

impl Field {
    /// Field of the given prime-power order with the canonical modulus.
    pub fn from_order(q: u32) -> Result<Field> {
        if q < 2 || q > MAX_ORDER {
            return Err(Error::usage(format!(
                "field order must be in 2..={MAX_ORDER}, got {q}"
            )));
        }
        let (p, m) = factor_prime_power(q)
            .ok_or_else(|| Error::usage(format!("{q} is not a prime power")))?;
        let modulus = least_irreducible(p, m);
        Ok(Field { p, m, q, modulus })
    }

    /// Accepts "q" either as a plain integer ("16") or as "p^m" ("2^4").
    pub fn parse(s: &str) -> Result<Field> {
        let s = s.trim();
        let parse_int = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::usage(format!("bad field order component {t:?}")))
        };
        if let Some((base, exp)) = s.split_once('^') {
            let p = parse_int(base)?;
            let m = parse_int(exp)?;
            if m == 0 {
                return Err(Error::usage("extension degree must be positive"));
            }
            let q = p
                .checked_pow(m)
                .filter(|&q| q <= MAX_ORDER)
                .ok_or_else(|| Error::usage(format!("{p}^{m} exceeds the order cap")))?;
            let f = Field::from_order(q)?;
            if f.p != p {
                return Err(Error::usage(format!("{p} is not prime")));
            }
            Ok(f)
        } else {
            Field::from_order(parse_int(s)?)
        }
    }

    /// Validates an explicit description (used by the JSON loaders).
    pub fn from_desc(d: &FieldDesc) -> Result<Field> {
        if !is_prime(d.p) {
            return Err(Error::usage(format!("{} is not prime", d.p)));
        }
        if d.m == 0 {
            return Err(Error::usage("extension degree must be positive"));
        }
        let q = d
            .p
            .checked_pow(d.m)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or_else(|| Error::usage("field order exceeds the cap"))?;
        if d.modulus.len() != d.m as usize + 1 {
            return Err(Error::usage("modulus degree must equal the extension degree"));
        }
        if d.modulus.last() != Some(&1) {
            return Err(Error::usage("modulus must be monic"));
        }
        if d.modulus.iter().any(|&c| c >= d.p) {
            return Err(Error::usage("modulus coefficients must be reduced mod p"));
        }
        if !is_irreducible(&d.modulus, d.p) {
            return Err(Error::usage("modulus is reducible"));
        }
        Ok(Field {
            p: d.p,
            m: d.m,
            q,
            modulus: d.modulus.clone(),
        })
    }

    pub fn order(&self) -> u32 {
        self.q
    }
    pub fn characteristic(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.m
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> Elem {
        0
    }
    pub fn one(&self) -> Elem {
        1
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> {
        0..self.q
    }

    pub fn rand_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        rng.gen_range(0..self.q)
    }

    pub fn rand_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        rng.gen_range(1..self.q)
    }

    fn digits(&self, a: Elem) -> Vec<u32> {
        debug_assert!(a < self.q);
        let mut out = vec![0u32; self.m as usize];
        let mut a = a;
        for d in out.iter_mut() {
            *d = a % self.p;
            a /= self.p;
        }
        out
    }

    fn from_digits(&self, digits: &[u32]) -> Elem {
        let mut a = 0u32;
        for &d in digits.iter().rev() {
            a = a * self.p + d;
        }
        a
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return a ^ b;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let sum: Vec<u32> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % self.p).collect();
        self.from_digits(&sum)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        let da = self.digits(a);
        let neg: Vec<u32> = da.iter().map(|&x| (self.p - x) % self.p).collect();
        self.from_digits(&neg)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        if a == 1 {
            return b;
        }
        if b == 1 {
            return a;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let m = self.m as usize;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] += u64::from(x) * u64::from(y);
            }
        }
        let mut prod: Vec<u32> = prod.iter().map(|&c| (c % u64::from(self.p)) as u32).collect();
        // Reduce modulo the monic modulus by cancelling leading terms.
        for i in (m..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (k, &mc) in self.modulus.iter().enumerate().take(m) {
                let idx = i - m + k;
                prod[idx] = (prod[idx] + c * (self.p - mc) % self.p + self.p) % self.p;
            }
        }
        prod.truncate(m);
        self.from_digits(&prod)
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let mut base = a;
        let mut e = e;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::domain("zero has no multiplicative inverse"));
        }
        Ok(self.pow(a, u64::from(self.q) - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Absolute trace down to the prime field: Tr(a) = sum of a^(p^i) over
    /// i = 0..m. The result is a prime-field element, returned as an index
    /// below p.
    pub fn trace(&self, a: Elem) -> u32 {
        let mut frob = a;
        let mut acc = a;
        for _ in 1..self.m {
            frob = self.pow(frob, u64::from(self.p));
            acc = self.add(acc, frob);
        }
        debug_assert!(acc < self.p, "trace landed outside the prime field");
        acc
    }

    /// Additive character indexed by s, evaluated at x, for characteristic 2:
    /// (-1)^Tr(sx), exactly +1 or -1.
    pub fn char_sign(&self, s: Elem, x: Elem) -> i64 {
        debug_assert_eq!(self.p, 2, "sign characters only exist in characteristic 2");
        if self.trace(self.mul(s, x)) == 0 {
            1
        } else {
            -1
        }
    }

    /// Additive character for any characteristic: omega^Tr(sx) with omega the
    /// primitive p-th root of unity exp(2 pi i / p).
    pub fn char_complex(&self, s: Elem, x: Elem) -> Complex64 {
        let t = self.trace(self.mul(s, x));
        let angle = 2.0 * std::f64::consts::PI * f64::from(t) / f64::from(self.p);
        Complex64::new(angle.cos(), angle.sin())
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Writes q as p^m with p prime, if possible.
fn factor_prime_power(q: u32) -> Option<(u32, u32)> {
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut m = 0;
            let mut rest = q;
            while rest % p == 0 {
                rest /= p;
                m += 1;
            }
            return if rest == 1 { Some((p, m)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

/// Remainder of polynomial division over F_p; both little-endian, divisor
/// monic.
fn poly_rem(dividend: &[u32], divisor: &[u32], p: u32) -> Vec<u32> {
    let mut rem: Vec<u32> = dividend.to_vec();
    let d = divisor.len() - 1;
    while rem.len() > d {
        let lead = *rem.last().unwrap();
        let top = rem.len() - 1;
        if lead != 0 {
            for (k, &c) in divisor.iter().enumerate().take(d) {
                let idx = top - d + k;
                rem[idx] = (rem[idx] + lead * (p - c) % p) % p;
            }
        }
        rem.pop();
    }
    while rem.len() > 1 && *rem.last().unwrap() == 0 {
        rem.pop();
    }
    rem
}

/// Little-endian coefficients of the monic polynomial whose base-p integer
/// encoding is `idx` (so the scan order below is exactly base-p
/// lexicographic order of coefficient tuples).
fn poly_from_index(mut idx: u32, p: u32) -> Vec<u32> {
    let mut coeffs = Vec::new();
    while idx > 0 {
        coeffs.push(idx % p);
        idx /= p;
    }
    if coeffs.is_empty() {
        coeffs.push(0);
    }
    coeffs
}

/// Trial division by every monic polynomial of degree 1..=deg/2.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg == 1 {
        return true;
    }
    for k in 1..=deg / 2 {
        let start = p.pow(k as u32);
        for t in 0..start {
            let divisor = poly_from_index(start + t, p);
            let rem = poly_rem(poly, &divisor, p);
            if rem == [0] {
                return false;
            }
        }
    }
    true
}

/// The lexicographically least monic irreducible polynomial of degree m over
/// F_p, scanning base-p integer encodings upward from x^m.
fn least_irreducible(p: u32, m: u32) -> Vec<u32> {
    let start = p.pow(m);
    for t in 0..start {
        let poly = poly_from_index(start + t, p);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_moduli_match_textbook_choices() {
        assert_eq!(Field::from_order(4).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(Field::from_order(8).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(Field::from_order(16).unwrap().modulus(), &[1, 1, 0, 0, 1]);
        assert_eq!(Field::from_order(9).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(Field::from_order(7).unwrap().modulus(), &[0, 1]);
    }

    #[test]
    fn parse_accepts_plain_and_power_forms() {
        assert_eq!(Field::parse("16").unwrap(), Field::parse("2^4").unwrap());
        assert!(Field::parse("6").is_err());
        assert!(Field::parse("4^2").is_err());
        assert_eq!(Field::parse("4^2").map_err(|e| e.to_string()),
            Err("usage: 4 is not prime".to_string()));
    }

    #[test]
    fn f4_multiplication_table() {
        // Index 2 is the residue of x (call it a); index 3 is a+1.
        let f = Field::from_order(4).unwrap();
        let a = 2;
        assert_eq!(f.mul(a, a), 3); // a^2 = a + 1
        assert_eq!(f.mul(a, 3), 1); // a (a+1) = a^2 + a = 1
        assert_eq!(f.mul(3, 3), a); // (a+1)^2 = a^2 + 1 = a
        assert_eq!(f.inv(a).unwrap(), 3);
    }

    #[test]
    fn f4_trace_values() {
        let f = Field::from_order(4).unwrap();
        let traces: Vec<u32> = f.elems().map(|x| f.trace(x)).collect();
        assert_eq!(traces, vec![0, 0, 1, 1]);
    }

    #[test]
    fn f16_trace_is_f2_valued_and_balanced() {
        let f = Field::from_order(16).unwrap();
        let ones = f.elems().filter(|&x| f.trace(x) == 1).count();
        assert_eq!(ones, 8);
    }

    #[test]
    fn character_orthogonality_small_fields() {
        // Sum over x of the character indexed by s vanishes unless s = 0.
        for q in [2u32, 3, 4, 5, 8, 9, 16, 25, 27] {
            let f = Field::from_order(q).unwrap();
            for s in f.elems() {
                let total: Complex64 = f.elems().map(|x| f.char_complex(s, x)).sum();
                if s == 0 {
                    assert!((total.re - q as f64).abs() < 1e-9);
                    assert!(total.im.abs() < 1e-9);
                } else {
                    assert!(total.norm() < 1e-9, "q={q} s={s} sum={total}");
                }
            }
        }
    }

    #[test]
    fn char2_sign_character_is_exact() {
        for q in [2u32, 4, 8, 16, 32, 64] {
            let f = Field::from_order(q).unwrap();
            for s in f.elems().skip(1) {
                let total: i64 = f.elems().map(|x| f.char_sign(s, x)).sum();
                assert_eq!(total, 0, "q={q} s={s}");
            }
        }
    }

    #[test]
    fn inverses_and_division_small_fields() {
        for q in [2u32, 3, 4, 5, 7, 8, 9, 16, 27, 49] {
            let f = Field::from_order(q).unwrap();
            assert!(f.inv(0).is_err());
            for a in f.elems().skip(1) {
                let ai = f.inv(a).unwrap();
                assert_eq!(f.mul(a, ai), 1, "q={q} a={a}");
                assert_eq!(f.div(a, a).unwrap(), 1);
            }
        }
    }

    #[test]
    fn desc_round_trip_and_validation() {
        let f = Field::from_order(16).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: Field = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);

        // x^2 + 1 factors as (x+1)^2 over F_2.
        let bad = FieldDesc {
            p: 2,
            m: 2,
            modulus: vec![1, 0, 1],
        };
        assert!(Field::from_desc(&bad).is_err());
    }

    #[test]
    fn frobenius_fixes_prime_field_and_permutes() {
        let f = Field::from_order(27).unwrap();
        for a in f.elems() {
            let fr = f.pow(a, 3);
            if a < 3 {
                assert_eq!(fr, a);
            }
        }
        let images: std::collections::BTreeSet<Elem> =
            f.elems().map(|a| f.pow(a, 3)).collect();
        assert_eq!(images.len(), 27);
    }
}
