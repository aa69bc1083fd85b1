//! Arithmetic in the finite field F_q, q = p^e.
//!
//! Elements are encoded as integers in `0..q`. For a prime field the
//! encoding is the residue itself. For an extension field the element
//! `c_0 + c_1 w + ... + c_{e-1} w^{e-1}` (with `w` a root of the modulus)
//! is encoded as the base-p number whose little-endian digits are
//! `c_0, ..., c_{e-1}`, so addition is digit-wise mod p.
//!
//! The modulus is the smallest monic irreducible of degree `e` over F_p
//! when polynomials are ordered by their little-endian base-p value; this
//! gives `T^2+T+1` for F_4, `T^3+T+1` for F_8 and `T^2+1` for F_9.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An encoded field element in `0..q`.
pub type Elem = u32;

/// Default upper bound on `q` accepted by [`FieldCtx::new`].
pub const DEFAULT_FIELD_CAP: u64 = 1024;

/// Above this size multiplication is reduced on the fly instead of tabulated.
const TABLE_LIMIT: u32 = 256;

/// Shared, immutable description of F_q. Cloning is cheap.
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

struct Inner {
    p: u32,
    e: u32,
    q: u32,
    /// Ascending coefficients of the modulus over F_p, length e+1, present iff e > 1.
    modulus: Option<Vec<u32>>,
    add: Option<Vec<u16>>,
    mul: Option<Vec<u16>>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    /// Powers p^i for i < e, used to split an element into digits.
    digit_weights: Vec<u32>,
}

/// The five field operations exposed for command-line and scripted use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

/// `{"p": 2, "e": 2}` or `{"q": 4}` as accepted in JSON inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    PowerOfPrime { p: u32, e: u32 },
    Size { q: u32 },
}

/// Field description echoed in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub p: u32,
    pub e: u32,
    pub q: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u32>>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, e)` with `p` prime, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p as u32, e))
}

impl FieldSpec {
    pub fn resolve(self) -> Result<FieldCtx> {
        self.resolve_with_cap(DEFAULT_FIELD_CAP)
    }

    pub fn resolve_with_cap(self, cap: u64) -> Result<FieldCtx> {
        match self {
            FieldSpec::PowerOfPrime { p, e } => FieldCtx::with_cap(p, e, cap),
            FieldSpec::Size { q } => {
                let (p, e) = prime_power(q as u64)
                    .ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
                FieldCtx::with_cap(p, e, cap)
            }
        }
    }
}

impl FieldCtx {
    pub fn new(p: u32, e: u32) -> Result<Self> {
        Self::with_cap(p, e, DEFAULT_FIELD_CAP)
    }

    /// Field of size `q`, which must be a prime power.
    pub fn of_size(q: u32) -> Result<Self> {
        FieldSpec::Size { q }.resolve()
    }

    pub fn with_cap(p: u32, e: u32, cap: u64) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if e == 0 {
            return Err(Error::ZeroExtensionDegree);
        }
        let size = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
        if size > cap || size > u16::MAX as u64 + 1 {
            return Err(Error::FieldTooLarge { size, cap });
        }
        let q = size as u32;
        let modulus = (e > 1).then(|| least_irreducible(p, e as usize));
        let digit_weights = (0..e).map(|i| p.pow(i)).collect();

        let mut inner = Inner {
            p,
            e,
            q,
            modulus,
            add: None,
            mul: None,
            neg: Vec::new(),
            inv: Vec::new(),
            digit_weights,
        };
        inner.neg = (0..q).map(|a| inner.neg_slow(a) as u16).collect();
        inner.inv = vec![0; q as usize];
        for a in 1..q {
            if inner.inv[a as usize] != 0 {
                continue;
            }
            let b = (1..q)
                .find(|&b| inner.mul_slow(a, b) == 1)
                .expect("every nonzero element is invertible");
            inner.inv[a as usize] = b as u16;
            inner.inv[b as usize] = a as u16;
        }
        if q <= TABLE_LIMIT {
            let n = q as usize;
            let mut add = vec![0u16; n * n];
            let mut mul = vec![0u16; n * n];
            for a in 0..q {
                for b in 0..q {
                    add[a as usize * n + b as usize] = inner.add_slow(a, b) as u16;
                    mul[a as usize * n + b as usize] = inner.mul_slow(a, b) as u16;
                }
            }
            inner.add = Some(add);
            inner.mul = Some(mul);
        }
        Ok(FieldCtx(Arc::new(inner)))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn e(&self) -> u32 {
        self.0.e
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// Ascending coefficients of the defining polynomial over F_p (extension fields only).
    pub fn modulus(&self) -> Option<&[u32]> {
        self.0.modulus.as_deref()
    }

    pub fn info(&self) -> FieldInfo {
        FieldInfo {
            p: self.p(),
            e: self.e(),
            q: self.q(),
            modulus: self.0.modulus.clone(),
        }
    }

    /// Iterator over every element encoding.
    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.q()
    }

    pub fn check(&self, a: Elem) -> Result<Elem> {
        if a < self.q() {
            Ok(a)
        } else {
            Err(Error::InvalidElement {
                value: a,
                q: self.q(),
            })
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.add {
            Some(t) => t[(a * self.0.q + b) as usize] as Elem,
            None => self.0.add_slow(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.0.neg[a as usize] as Elem
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.mul {
            Some(t) => t[(a * self.0.q + b) as usize] as Elem,
            None => self.0.mul_slow(a, b),
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            Err(Error::InverseOfZero)
        } else {
            Ok(self.0.inv[a as usize] as Elem)
        }
    }

    pub fn pow(&self, a: Elem, mut n: u64) -> Elem {
        let mut base = a;
        let mut acc = 1;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// Checked dispatch over [`FieldOp`]; `b` is required for the binary operations.
    pub fn op(&self, op: FieldOp, a: Elem, b: Option<Elem>) -> Result<Elem> {
        let a = self.check(a)?;
        let b = b.map(|b| self.check(b)).transpose()?;
        let need = |name| b.ok_or(Error::MissingOperand(name));
        Ok(match op {
            FieldOp::Add => self.add(a, need("add")?),
            FieldOp::Sub => self.sub(a, need("sub")?),
            FieldOp::Mul => self.mul(a, need("mul")?),
            FieldOp::Inv => self.inv(a)?,
            FieldOp::Neg => self.neg(a),
        })
    }

    /// Base-p digits (power-basis coordinates) of an element.
    pub fn decode(&self, a: Elem) -> Vec<u32> {
        self.0.digits(a)
    }

    /// Inverse of [`FieldCtx::decode`]; digits beyond `e` must be absent.
    pub fn encode(&self, digits: &[u32]) -> Result<Elem> {
        if digits.len() > self.e() as usize || digits.iter().any(|&d| d >= self.p()) {
            return Err(Error::InvalidInput(format!(
                "{digits:?} is not a digit vector of F_{}",
                self.q()
            )));
        }
        Ok(digits
            .iter()
            .zip(&self.0.digit_weights)
            .map(|(d, w)| d * w)
            .sum())
    }

    /// Encodings of `1, w, ..., w^{e-1}`: an F_p-basis of F_q.
    pub fn prime_basis(&self) -> Vec<Elem> {
        self.0.digit_weights.clone()
    }

    /// The prime subfield is the set of encodings `0..p`.
    pub fn same_field(&self, other: &FieldCtx) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.p() == other.p() && self.e() == other.e())
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other)
    }
}

impl Eq for FieldCtx {}

impl std::hash::Hash for FieldCtx {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.p().hash(state);
        self.e().hash(state);
    }
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modulus() {
            Some(m) => write!(f, "F_{}[mod {:?}]", self.q(), m),
            None => write!(f, "F_{}", self.q()),
        }
    }
}

impl Inner {
    fn digits(&self, mut a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.e as usize);
        for _ in 0..self.e {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    fn undigits(&self, d: &[u32]) -> u32 {
        d.iter().zip(&self.digit_weights).map(|(d, w)| d * w).sum()
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            return (a + b) % self.p;
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let s: Vec<u32> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.undigits(&s)
    }

    fn neg_slow(&self, a: u32) -> u32 {
        let s: Vec<u32> = self
            .digits(a)
            .iter()
            .map(|&d| (self.p - d) % self.p)
            .collect();
        self.undigits(&s)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        if self.e == 1 {
            return ((a as u64 * b as u64) % p) as u32;
        }
        let e = self.e as usize;
        let (x, y) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &u) in x.iter().enumerate() {
            for (j, &v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u as u64 * v as u64) % p;
            }
        }
        let m = self
            .modulus
            .as_ref()
            .expect("extension field has a modulus");
        // reduce from the top: T^e = -(m_0 + ... + m_{e-1} T^{e-1})
        for top in (e..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &mi) in m[..e].iter().enumerate() {
                let idx = top - e + i;
                prod[idx] = (prod[idx] + (p - c) * mi as u64) % p;
            }
        }
        let low: Vec<u32> = prod[..e].iter().map(|&c| c as u32).collect();
        self.undigits(&low)
    }
}

/// Remainder of `a` modulo the monic `b`, coefficients mod p, ascending.
fn rem_mod_p(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - lead) * bi % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Monic polynomial of degree `deg` over F_p whose lower coefficients are the digits of `idx`.
fn monic_from_index(mut idx: u64, deg: usize, p: u32) -> Vec<u32> {
    let mut c = Vec::with_capacity(deg + 1);
    for _ in 0..deg {
        c.push((idx % p as u64) as u32);
        idx /= p as u64;
    }
    c.push(1);
    c
}

fn irreducible_over_prime(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        for idx in 0..(p as u64).pow(d as u32) {
            let g = monic_from_index(idx, d, p);
            if rem_mod_p(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn least_irreducible(p: u32, e: usize) -> Vec<u32> {
    (0..(p as u64).pow(e as u32))
        .map(|idx| monic_from_index(idx, e, p))
        .find(|f| irreducible_over_prime(f, p))
        .expect("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn supported() -> Vec<FieldCtx> {
        [2, 3, 4, 5, 7, 8, 9]
            .iter()
            .map(|&q| FieldCtx::of_size(q).unwrap())
            .collect()
    }

    #[test]
    fn construction_examples() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        assert_eq!(f2.q(), 2);
        assert!(f2.modulus().is_none());

        let f4 = FieldCtx::new(2, 2).unwrap();
        assert_eq!(f4.modulus(), Some(&[1, 1, 1][..]));

        let f3 = FieldCtx::new(3, 1).unwrap();
        assert_eq!(f3.q(), 3);

        assert_eq!(
            FieldCtx::new(2, 3).unwrap().modulus(),
            Some(&[1, 1, 0, 1][..])
        );
        assert_eq!(FieldCtx::new(3, 2).unwrap().modulus(), Some(&[1, 0, 1][..]));
    }

    #[test]
    fn f4_modulus_is_the_only_irreducible_quadratic() {
        // enumerate all four monic quadratics over F_2 and look for roots
        let irreducible: Vec<[u32; 3]> = (0..4)
            .map(|i| [i & 1, i >> 1, 1])
            .filter(|c| (0..2).all(|x| (c[0] + c[1] * x + c[2] * x * x) % 2 != 0))
            .collect();
        assert_eq!(irreducible, vec![[1, 1, 1]]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldCtx::new(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(FieldCtx::new(2, 0).unwrap_err(), Error::ZeroExtensionDegree);
        assert!(matches!(
            FieldCtx::new(2, 11).unwrap_err(),
            Error::FieldTooLarge {
                size: 2048,
                cap: 1024
            }
        ));
        assert!(FieldCtx::with_cap(2, 11, 4096).is_ok());
        assert!(FieldCtx::of_size(6).is_err());
    }

    #[test]
    fn op_examples() {
        let f4 = FieldCtx::new(2, 2).unwrap();
        assert_eq!(f4.op(FieldOp::Add, 2, Some(3)).unwrap(), 1);
        assert_eq!(f4.op(FieldOp::Mul, 2, Some(2)).unwrap(), 3);
        let f3 = FieldCtx::new(3, 1).unwrap();
        assert_eq!(f3.op(FieldOp::Inv, 2, None).unwrap(), 2);
        assert_eq!(f3.op(FieldOp::Inv, 0, None), Err(Error::InverseOfZero));
        assert_eq!(
            f3.op(FieldOp::Add, 1, None),
            Err(Error::MissingOperand("add"))
        );
        assert!(matches!(
            f3.op(FieldOp::Neg, 3, None),
            Err(Error::InvalidElement { value: 3, q: 3 })
        ));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for f in supported() {
            for a in f.elements() {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive() {
        for f in supported().into_iter().filter(|f| f.e() > 1) {
            let p = f.p() as u64;
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.pow(f.add(a, b), p), f.add(f.pow(a, p), f.pow(b, p)));
                }
            }
        }
    }

    #[test]
    fn encoding_round_trips() {
        for f in supported() {
            for a in f.elements() {
                assert_eq!(f.encode(&f.decode(a)).unwrap(), a);
            }
        }
    }

    #[test]
    fn tables_agree_with_reduction_above_limit() {
        let big = FieldCtx::new(2, 9).unwrap();
        assert!(big.0.mul.is_none());
        let small = FieldCtx::new(2, 8).unwrap();
        for a in (0..256).step_by(7) {
            for b in (0..256).step_by(11) {
                assert_eq!(small.mul(a, b), small.0.mul_slow(a, b));
            }
        }
        for a in 1..512 {
            assert_eq!(big.mul(a, big.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn spec_parsing() {
        let s: FieldSpec = serde_json::from_str(r#"{"p": 2, "e": 2}"#).unwrap();
        assert_eq!(s.resolve().unwrap().q(), 4);
        let s: FieldSpec = serde_json::from_str(r#"{"q": 9}"#).unwrap();
        let f = s.resolve().unwrap();
        assert_eq!((f.p(), f.e()), (3, 2));
    }
}
