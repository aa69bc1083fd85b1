//! Polynomials over F_q: the runner speeds.
//!
//! Coefficients are stored in ascending order with trailing zeros removed,
//! so the zero polynomial has an empty coefficient vector and degree `None`.
//! The canonical order on polynomials is the order of their little-endian
//! base-q index (see [`Poly::index`]); for monic polynomials this sorts by
//! degree first, e.g. `1, T, T+1, T^2, T^2+1, ...` over F_2.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};

/// Default cap on the number of polynomials an enumeration may return.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: FieldCtx,
    coeffs: Vec<Elem>,
}

/// Which monic polynomials [`enumerate_monic`] lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonicSet {
    ExactDegree(usize),
    UpToDegree(usize),
    Irreducible(usize),
}

impl Poly {
    /// Builds a polynomial from ascending coefficients, validating every entry.
    pub fn new(field: &FieldCtx, coeffs: Vec<Elem>) -> Result<Self> {
        for &c in &coeffs {
            field.check(c)?;
        }
        Ok(Self::from_raw(field, coeffs))
    }

    fn from_raw(field: &FieldCtx, mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &FieldCtx) -> Self {
        Self::from_raw(field, Vec::new())
    }

    pub fn one(field: &FieldCtx) -> Self {
        Self::from_raw(field, vec![1])
    }

    pub fn constant(field: &FieldCtx, c: Elem) -> Self {
        Self::from_raw(field, vec![c])
    }

    /// `c * T^n`
    pub fn monomial(field: &FieldCtx, c: Elem, n: usize) -> Self {
        let mut v = vec![0; n + 1];
        v[n] = c;
        Self::from_raw(field, v)
    }

    /// `T - lambda`
    pub fn linear_root(field: &FieldCtx, lambda: Elem) -> Self {
        Self::from_raw(field, vec![field.neg(lambda), 1])
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// `None` stands for the degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<Elem> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(1)
    }

    /// Coefficient vector padded with zeros to `len` entries.
    pub fn padded(&self, len: usize) -> Vec<Elem> {
        let mut v = self.coeffs.clone();
        v.resize(len.max(v.len()), 0);
        v
    }

    /// Little-endian base-q index: `sum a_i q^i`.
    pub fn index(&self) -> u128 {
        let q = self.field.q() as u128;
        self.coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &c| acc * q + c as u128)
    }

    pub fn from_index(field: &FieldCtx, mut idx: u128) -> Self {
        let q = field.q() as u128;
        let mut v = Vec::new();
        while idx > 0 {
            v.push((idx % q) as Elem);
            idx /= q;
        }
        Self::from_raw(field, v)
    }

    fn same(&self, other: &Poly) -> Result<()> {
        if self.field.same_field(&other.field) {
            Ok(())
        } else {
            Err(Error::MixedFields)
        }
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.same(other)?;
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n)
            .map(|i| f.add(self.coeff(i), other.coeff(i)))
            .collect();
        Ok(Self::from_raw(f, v))
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        let f = &self.field;
        Self::from_raw(f, self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn scale(&self, c: Elem) -> Poly {
        let f = &self.field;
        Self::from_raw(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// `T^n * self`
    pub fn shift(&self, n: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![0; n];
        v.extend_from_slice(&self.coeffs);
        Self::from_raw(&self.field, v)
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.same(other)?;
        let f = &self.field;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(f));
        }
        let mut v = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                v[i + j] = f.add(v[i + j], f.mul(a, b));
            }
        }
        Ok(Self::from_raw(f, v))
    }

    /// Quotient and remainder with `deg(rem) < deg(divisor)`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        self.same(divisor)?;
        let f = &self.field;
        let db = divisor.degree().ok_or(Error::DivisionByZero)?;
        let inv_lead = f.inv(divisor.leading().unwrap())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= db {
            return Ok((Self::zero(f), self.clone()));
        }
        let mut quot = vec![0; rem.len() - db];
        for top in (db..rem.len()).rev() {
            let c = rem[top];
            if c == 0 {
                continue;
            }
            let factor = f.mul(c, inv_lead);
            quot[top - db] = factor;
            for (i, &b) in divisor.coeffs.iter().enumerate() {
                let idx = top - db + i;
                rem[idx] = f.sub(rem[idx], f.mul(factor, b));
            }
        }
        rem.truncate(db);
        Ok((Self::from_raw(f, quot), Self::from_raw(f, rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly> {
        Ok(self.div_rem(divisor)?.1)
    }

    pub fn divides(&self, other: &Poly) -> Result<bool> {
        Ok(other.rem(self)?.is_zero())
    }

    /// Scales by the inverse of the leading coefficient.
    pub fn make_monic(&self) -> Result<Poly> {
        let lead = self.leading().ok_or(Error::ZeroPolynomial)?;
        Ok(self.scale(self.field.inv(lead)?))
    }

    /// Monic greatest common divisor. `gcd(f, 0)` is `f` made monic; both zero is an error.
    pub fn gcd(&self, other: &Poly) -> Result<Poly> {
        self.same(other)?;
        if other.is_zero() {
            return self.make_monic();
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        a.make_monic()
    }

    pub fn eval(&self, x: Elem) -> Elem {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Exact irreducibility by trial division with every monic polynomial of
    /// degree at most half the degree.
    pub fn is_irreducible(&self) -> Result<bool> {
        let deg = self.degree().ok_or(Error::ZeroPolynomial)?;
        if deg == 0 {
            return Err(Error::ConstantPolynomial);
        }
        if deg == 1 {
            return Ok(true);
        }
        let field = &self.field;
        // roots first: they decide degree 2 and 3 and reject most inputs quickly
        if field.elements().any(|x| self.eval(x) == 0) {
            return Ok(false);
        }
        let q = field.q() as u128;
        for d in 2..=deg / 2 {
            for low in 0..q.pow(d as u32) {
                let g = Self::from_index(field, low + q.pow(d as u32));
                if g.divides(self)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Monic irreducible factors with multiplicity, found by repeated trial
    /// division in canonical order. The unit is dropped.
    pub fn factor(&self) -> Result<Vec<(Poly, usize)>> {
        let mut rest = self.make_monic()?;
        let field = self.field.clone();
        let q = field.q() as u128;
        let mut out = Vec::new();
        let mut d = 1usize;
        while rest.degree().unwrap_or(0) >= 2 * d {
            for low in 0..q.pow(d as u32) {
                let g = Self::from_index(&field, low + q.pow(d as u32));
                let mut mult = 0;
                loop {
                    let (quot, r) = rest.div_rem(&g)?;
                    if !r.is_zero() {
                        break;
                    }
                    rest = quot;
                    mult += 1;
                }
                if mult > 0 {
                    out.push((g, mult));
                }
            }
            d += 1;
        }
        if rest.degree().unwrap_or(0) >= 1 {
            out.push((rest, 1));
        }
        out.sort_by_key(|(g, _)| g.index());
        Ok(out)
    }

    /// Parses `"T^2+T+1"`, `"2T+1"`, `"3*T^2 + 1"` or `"1"`. Coefficients are
    /// element encodings written as decimal integers; `x` is accepted for `T`.
    pub fn parse(field: &FieldCtx, text: &str) -> Result<Poly> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut acc = Self::zero(field);
        for term in cleaned.split('+') {
            acc = acc.add(&Self::parse_term(field, term)?)?;
        }
        Ok(acc)
    }

    fn parse_term(field: &FieldCtx, term: &str) -> Result<Poly> {
        let bad = || Error::Parse(format!("malformed term `{term}`"));
        let var = term.find(['T', 't', 'x', 'X']);
        let (coef_part, var_part) = match var {
            Some(pos) => (&term[..pos], Some(&term[pos + 1..])),
            None => (term, None),
        };
        let coef_part = coef_part.strip_suffix('*').unwrap_or(coef_part);
        let coef: Elem = if coef_part.is_empty() {
            if var.is_none() {
                return Err(bad());
            }
            1
        } else {
            coef_part.parse().map_err(|_| bad())?
        };
        field.check(coef)?;
        let exp = match var_part {
            None => 0,
            Some("") => 1,
            Some(rest) => rest
                .strip_prefix('^')
                .ok_or_else(bad)?
                .parse::<usize>()
                .map_err(|_| bad())?,
        };
        Ok(Self::monomial(field, coef, exp))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "T")?,
                (1, c) => write!(f, "{c}T")?,
                (i, 1) => write!(f, "T^{i}")?,
                (i, c) => write!(f, "{c}T^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

/// Coefficient-list form of a polynomial, used for JSON input where the field
/// is supplied separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoeffList(pub Vec<Elem>);

impl CoeffList {
    pub fn into_poly(self, field: &FieldCtx) -> Result<Poly> {
        Poly::new(field, self.0)
    }
}

pub fn mobius(n: u64) -> Result<i8> {
    if n == 0 {
        return Err(Error::InvalidInput("mobius is defined for n >= 1".into()));
    }
    let mut n = n;
    let mut sign = 1i8;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return Ok(0);
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    Ok(sign)
}

/// Number of monic irreducible polynomials of degree `m` over F_q, by the
/// Moebius sum `(1/m) sum_{d | m} mu(d) q^(m/d)`.
pub fn count_irreducible(m: u32, q: u64) -> Result<u128> {
    if m == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    let mut total: i128 = 0;
    for d in (1..=m).filter(|d| m.is_multiple_of(*d)) {
        let term = (q as i128)
            .checked_pow(m / d)
            .ok_or(Error::Overflow("q^(m/d)"))?;
        total += mobius(d as u64)? as i128 * term;
    }
    debug_assert_eq!(total % m as i128, 0);
    Ok((total / m as i128) as u128)
}

/// Lists monic polynomials in canonical order.
pub fn enumerate_monic(field: &FieldCtx, set: MonicSet) -> Result<Vec<Poly>> {
    enumerate_monic_capped(field, set, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_monic_capped(field: &FieldCtx, set: MonicSet, cap: u64) -> Result<Vec<Poly>> {
    let q = field.q() as u128;
    let (lo_deg, hi_deg) = match set {
        MonicSet::ExactDegree(m) | MonicSet::Irreducible(m) => (m, m),
        MonicSet::UpToDegree(d) => (0, d),
    };
    let needed: u128 = (lo_deg..=hi_deg)
        .map(|d| q.checked_pow(d as u32).unwrap_or(u128::MAX))
        .fold(0u128, |a, b| a.saturating_add(b));
    if needed > cap as u128 {
        return Err(Error::CapExceeded {
            what: "polynomial enumeration",
            needed,
            cap: cap as u128,
        });
    }
    let mut out = Vec::new();
    for d in lo_deg..=hi_deg {
        let top = q.pow(d as u32);
        for low in 0..top {
            let f = Poly::from_index(field, top + low);
            if let MonicSet::Irreducible(_) = set {
                if d == 0 || !f.is_irreducible()? {
                    continue;
                }
            }
            out.push(f);
        }
    }
    Ok(out)
}

/// Makes every speed monic and drops repeats, keeping first occurrences.
/// Logs a warning when anything changed.
pub fn normalize_speeds(speeds: &[Poly]) -> Result<Vec<Poly>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(speeds.len());
    let mut rescaled = 0usize;
    for f in speeds {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if let Some(first) = speeds.first() {
            f.same(first)?;
        }
        let m = f.make_monic()?;
        if !f.is_monic() {
            rescaled += 1;
        }
        if seen.insert(m.index()) {
            out.push(m);
        }
    }
    let dropped = speeds.len() - out.len();
    if rescaled > 0 || dropped > 0 {
        log::warn!("normalized speeds: {rescaled} rescaled to monic, {dropped} duplicates dropped");
    }
    Ok(out)
}

/// Largest degree in a nonempty family of nonzero polynomials.
pub fn max_degree(speeds: &[Poly]) -> Result<usize> {
    speeds
        .iter()
        .map(|f| f.degree().ok_or(Error::ZeroPolynomial))
        .try_fold(0usize, |m, d| Ok(m.max(d?)))
}
