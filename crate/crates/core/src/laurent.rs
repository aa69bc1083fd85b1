//! Truncated points of the track: Laurent tails `x_{-1} T^{-1} + ... + x_{-m} T^{-m}`.
//!
//! This module computes `|alpha f|` straight from the definition (multiply,
//! drop the polynomial part, read off the order) and uses that to compute
//! loneliness by brute force. It shares no code with the covering engine and
//! serves as its oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};
use crate::poly::{max_degree, normalize_speeds, Poly};

/// Default cap on the number of tails enumerated per level by [`loneliness_direct`].
pub const DEFAULT_TAIL_CAP: u128 = 1 << 24;

/// `coeffs[i]` is the coefficient of `T^{-(i+1)}`.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentTail {
    field: FieldCtx,
    coeffs: Vec<Elem>,
}

/// Result of [`LaurentTail::frac_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FracNorm {
    /// Exponent `e` with `|alpha f| = q^e` for the finite tail, or `None` if
    /// the fractional part vanishes.
    pub exponent: Option<i64>,
    /// Coefficients of `T^{-1}, ..., T^{-horizon}` in `alpha f` do not depend
    /// on tail terms beyond the truncation. Zero means nothing is determined.
    pub horizon: usize,
}

impl FracNorm {
    /// `|alpha f| >= q^{-k}`
    pub fn at_least(&self, k: usize) -> bool {
        matches!(self.exponent, Some(e) if e >= -(k as i64))
    }
}

/// Witness JSON: `{"alpha": [x_-1, ..., x_-m], "exponent": -k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub alpha: Vec<Elem>,
    pub exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loneliness {
    /// `delta(F) = q^{-exponent}`
    pub exponent: usize,
    /// Tail of length `D + exponent` attaining the value.
    pub witness: LaurentTail,
}

impl Loneliness {
    pub fn witness_json(&self) -> Witness {
        Witness {
            alpha: self.witness.coeffs.clone(),
            exponent: -(self.exponent as i64),
        }
    }
}

impl LaurentTail {
    pub fn new(field: &FieldCtx, coeffs: Vec<Elem>) -> Result<Self> {
        for &c in &coeffs {
            field.check(c)?;
        }
        Ok(LaurentTail {
            field: field.clone(),
            coeffs,
        })
    }

    /// `T^{-n}` truncated to `len` terms.
    pub fn monomial(field: &FieldCtx, n: usize, len: usize) -> Self {
        let mut coeffs = vec![0; len.max(n)];
        coeffs[n - 1] = 1;
        LaurentTail {
            field: field.clone(),
            coeffs,
        }
    }

    /// The tail whose coefficient vector has index `idx` in the little-endian
    /// encoding `sum encode(x_{-i}) q^{i-1}`.
    pub fn from_index(field: &FieldCtx, mut idx: u128, len: usize) -> Self {
        let q = field.q() as u128;
        let coeffs = (0..len)
            .map(|_| {
                let d = (idx % q) as Elem;
                idx /= q;
                d
            })
            .collect();
        LaurentTail {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn index(&self) -> u128 {
        let q = self.field.q() as u128;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * q + c as u128)
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Same tail with extra trailing coefficients.
    pub fn extended(&self, extra: &[Elem]) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.extend_from_slice(extra);
        LaurentTail {
            field: self.field.clone(),
            coeffs,
        }
    }

    /// Order of the tail: the largest `i` with `x_i != 0`. `None` is minus
    /// infinity. Since `<alpha> = q^ord`, the order is also the norm exponent.
    pub fn ord(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|&c| c != 0)
            .map(|i| -(i as i64) - 1)
    }

    /// Coefficient of `T^{-s}` (s >= 1) in `alpha * f`, for the finite tail.
    fn product_coeff(&self, f: &Poly, s: usize) -> Elem {
        let field = &self.field;
        let mut acc = 0;
        for (j, &a) in f.coeffs().iter().enumerate() {
            if let Some(&x) = self.coeffs.get(s + j - 1) {
                acc = field.add(acc, field.mul(a, x));
            }
        }
        acc
    }

    /// Norm exponent of the fractional part of `alpha * f`.
    pub fn frac_norm(&self, f: &Poly) -> Result<FracNorm> {
        let deg = f.degree().ok_or(Error::ZeroPolynomial)?;
        if !self.field.same_field(f.field()) {
            return Err(Error::MixedFields);
        }
        let exponent = (1..=self.coeffs.len())
            .find(|&s| self.product_coeff(f, s) != 0)
            .map(|s| -(s as i64));
        Ok(FracNorm {
            exponent,
            horizon: self.coeffs.len().saturating_sub(deg),
        })
    }

    /// `|alpha f| >= q^{-k}`: one of the first `k` fractional coefficients is nonzero.
    pub fn far_from_polynomials(&self, f: &Poly, k: usize) -> bool {
        (1..=k).any(|s| self.product_coeff(f, s) != 0)
    }
}

impl std::fmt::Debug for LaurentTail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "tail{:?}", self.coeffs)
    }
}

/// Loneliness by enumerating every tail of length `D + k` for `k = 1, 2, ...`
/// in index order and returning the first level with a witness.
pub fn loneliness_direct(speeds: &[Poly]) -> Result<Loneliness> {
    loneliness_direct_capped(speeds, DEFAULT_TAIL_CAP)
}

pub fn loneliness_direct_capped(speeds: &[Poly], cap: u128) -> Result<Loneliness> {
    if speeds.is_empty() {
        return Err(Error::InvalidInput("the set of speeds is empty".into()));
    }
    let speeds = normalize_speeds(speeds)?;
    let field = speeds[0].field().clone();
    let q = field.q() as u128;
    let d = max_degree(&speeds)?;
    // a family of size at most q^k has loneliness at least q^{-k}
    let mut bound = 1usize;
    while q.pow(bound as u32) < speeds.len() as u128 {
        bound += 1;
    }
    for k in 1..=bound {
        let len = d + k;
        let count = q
            .checked_pow(len as u32)
            .filter(|&c| c <= cap)
            .ok_or(Error::CapExceeded {
                what: "tail enumeration",
                needed: q.saturating_pow(len as u32),
                cap,
            })?;
        for idx in 0..count {
            let alpha = LaurentTail::from_index(&field, idx, len);
            if speeds.iter().all(|f| alpha.far_from_polynomials(f, k)) {
                return Ok(Loneliness {
                    exponent: k,
                    witness: alpha,
                });
            }
        }
    }
    unreachable!("every family of size at most q^k has a witness at level k")
}
