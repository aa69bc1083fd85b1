//! Verification harness: the extremal family, exhaustive minimum-cover
//! search, the small-degree condition, the half-way constant, structural
//! checks on covering instances, and named suites that bundle them.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bits::BitSet;
use crate::covering::{self, bitmap_len, CoverageOptions, DEFAULT_BITMAP_CAP};
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};
use crate::laurent::loneliness_direct;
use crate::linalg::{index_to_vector, Subspace};
use crate::poly::{count_irreducible, enumerate_monic, MonicSet, Poly};
use crate::sunflower::{
    self, construction, contribution_bound_check, is_sunflower, max_sunflower, size_bound,
    BoundMode, SunflowerReport, SunflowerType,
};

/// All suite names accepted by [`run_suite`].
pub const SUITES: [&str; 13] = [
    "field-axioms",
    "gauss-count",
    "oracle-equivalence",
    "theorem-1-4",
    "extremal-family",
    "min-cover-k1",
    "min-cover-k2",
    "sunflower-bound",
    "sunflower-structure",
    "afterparty",
    "large-sunflower",
    "small-sunflower-constant",
    "appendix",
];

/// `(q^{k+1} - 1) / (q - 1)`, the size of the extremal family (saturating).
pub fn conjectured_threshold(q: u32, k: usize) -> u128 {
    (0..=k as u32).fold(0u128, |acc, j| {
        acc.saturating_add((q as u128).saturating_pow(j))
    })
}

/// All monic polynomials of degree at most `k`.
pub fn gen_extremal(field: &FieldCtx, k: usize) -> Result<Vec<Poly>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    enumerate_monic(field, MonicSet::UpToDegree(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinCoverOptions {
    pub node_cap: u64,
    pub time_limit: Option<Duration>,
    pub bitmap_cap: u128,
    /// Prune families below the threshold that miss a multiple of some monic
    /// irreducible of degree `k + 1`.
    pub factor_pruning: bool,
    /// Keep every minimum covering family (up to `collect_cap`), not just the first.
    pub collect_all: bool,
    pub collect_cap: usize,
}

impl Default for MinCoverOptions {
    fn default() -> Self {
        MinCoverOptions {
            node_cap: 1 << 32,
            time_limit: None,
            bitmap_cap: DEFAULT_BITMAP_CAP,
            factor_pruning: true,
            collect_all: false,
            collect_cap: 10_000,
        }
    }
}

/// Outcome of [`min_cover`]. Serializes as the `min-cover` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinCoverResult {
    pub q: u32,
    pub k: usize,
    #[serde(rename = "D")]
    pub d: usize,
    /// Least size of a covering family of monic polynomials of degree at most
    /// `D`; `None` if no family covers or the search was cut short.
    pub min_size: Option<usize>,
    pub witness_family: Option<Vec<Vec<Elem>>>,
    pub conjectured: u64,
    /// False when the budget ran out before the search finished.
    pub exact: bool,
    /// Every family smaller than this was refuted.
    pub lower_bound: usize,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinCoverOutcome {
    pub result: MinCoverResult,
    /// Minimum covering families found, in lexicographic order of candidate positions.
    pub families: Vec<Vec<Poly>>,
}

struct CoverSearch<'a> {
    kernels: &'a [BitSet],
    factors: &'a [BitSet],
    factor_count: usize,
    factor_room: usize,
    prune_factors: bool,
    kernel_size: u128,
    opts: &'a MinCoverOptions,
    started: Instant,
    nodes: u64,
    found: Vec<Vec<usize>>,
}

enum Stop {
    Budget,
}

impl CoverSearch<'_> {
    fn over_budget(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.opts.node_cap {
            return true;
        }
        if let Some(limit) = self.opts.time_limit {
            if self.nodes.is_multiple_of(1024) && self.started.elapsed() > limit {
                return true;
            }
        }
        false
    }

    fn dfs(
        &mut self,
        start: usize,
        chosen: &mut Vec<usize>,
        covered: &BitSet,
        divided: &BitSet,
        slots: usize,
    ) -> std::result::Result<(), Stop> {
        if self.over_budget() {
            return Err(Stop::Budget);
        }
        let uncovered = (covered.len() - covered.count()) as u128;
        if uncovered == 0 {
            self.found.push(chosen.clone());
            return Ok(());
        }
        if slots == 0 || (slots as u128) * self.kernel_size < uncovered {
            return Ok(());
        }
        if self.prune_factors {
            let missing = self.factor_count - divided.count();
            if missing > slots * self.factor_room {
                return Ok(());
            }
        }
        for i in start..self.kernels.len() {
            if !self.opts.collect_all && !self.found.is_empty() {
                break;
            }
            if self.found.len() >= self.opts.collect_cap {
                break;
            }
            let mut next = covered.clone();
            next.union_with(&self.kernels[i]);
            let mut div = divided.clone();
            div.union_with(&self.factors[i]);
            chosen.push(i);
            let r = self.dfs(i + 1, chosen, &next, &div, slots - 1);
            chosen.pop();
            r?;
        }
        Ok(())
    }
}

/// Least number of monic speeds of degree at most `D` whose level-`k`
/// kernels cover `F_q^{D+k}`.
pub fn min_cover(field: &FieldCtx, k: usize, d: usize) -> Result<MinCoverResult> {
    Ok(min_cover_with(field, k, d, &MinCoverOptions::default())?.result)
}

/// Increasing-size search over lexicographically ordered candidate subsets.
/// A partial family is abandoned once its remaining slots times `q^D` fall
/// short of the uncovered count.
pub fn min_cover_with(
    field: &FieldCtx,
    k: usize,
    d: usize,
    opts: &MinCoverOptions,
) -> Result<MinCoverOutcome> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let q = field.q();
    let candidates = enumerate_monic(field, MonicSet::UpToDegree(d))?;
    let len = bitmap_len(field, d + k, opts.bitmap_cap)?;
    let kernels = candidates
        .iter()
        .map(|f| {
            let mut bits = BitSet::new(len);
            for idx in covering::kernel(f, k, d)?.point_indices() {
                bits.insert(idx as usize);
            }
            Ok(bits)
        })
        .collect::<Result<Vec<_>>>()?;
    let irreducibles = enumerate_monic(field, MonicSet::Irreducible(k + 1))?;
    let factors = candidates
        .iter()
        .map(|f| {
            let mut bits = BitSet::new(irreducibles.len());
            for (j, g) in irreducibles.iter().enumerate() {
                if g.divides(f)? {
                    bits.insert(j);
                }
            }
            Ok(bits)
        })
        .collect::<Result<Vec<_>>>()?;
    let conjectured = u64::try_from(conjectured_threshold(q, k))
        .map_err(|_| Error::Overflow("the extremal family size"))?;

    let mut search = CoverSearch {
        kernels: &kernels,
        factors: &factors,
        factor_count: irreducibles.len(),
        factor_room: d / (k + 1),
        prune_factors: false,
        kernel_size: (q as u128).pow(d as u32),
        opts,
        started: Instant::now(),
        nodes: 0,
        found: Vec::new(),
    };
    let mut result = MinCoverResult {
        q,
        k,
        d,
        min_size: None,
        witness_family: None,
        conjectured,
        exact: true,
        lower_bound: candidates.len() + 1,
        nodes: 0,
    };
    for size in 1..=candidates.len() {
        search.prune_factors = opts.factor_pruning && (size as u64) < conjectured;
        let empty = BitSet::new(len);
        let none = BitSet::new(irreducibles.len());
        let run = search.dfs(0, &mut Vec::new(), &empty, &none, size);
        if let Err(Stop::Budget) = run {
            log::warn!("minimum-cover budget exhausted while trying families of size {size}");
            result.exact = false;
            result.lower_bound = size;
            break;
        }
        if !search.found.is_empty() {
            result.min_size = Some(size);
            result.lower_bound = size;
            break;
        }
    }
    result.nodes = search.nodes;
    if !result.exact {
        search.found.clear();
    }
    let families: Vec<Vec<Poly>> = search
        .found
        .iter()
        .map(|ix| ix.iter().map(|&i| candidates[i].clone()).collect())
        .collect();
    result.witness_family = families
        .first()
        .map(|fam| fam.iter().map(|f| f.coeffs().to_vec()).collect());
    Ok(MinCoverOutcome { result, families })
}

/// Exact positive fraction in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u128,
    pub den: u128,
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub fn new(num: u128, den: u128) -> Self {
        let g = gcd_u128(num, den).max(1);
        Fraction {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallDegreeCondition {
    pub holds: bool,
    /// `N(k+1, q) / (q^k + ... + q)`
    pub lhs: Fraction,
    /// `floor(D / (k+1))`
    pub rhs: u64,
}

/// Whether `N(k+1, q) / (q^k + ... + q) > floor(D / (k+1))`, the condition
/// under which no family below the threshold covers.
pub fn smalld_condition(q: u64, k: u32, d: u64) -> Result<SmallDegreeCondition> {
    if k <= 1 {
        return Err(Error::InvalidInput(format!(
            "the small-degree condition needs k > 1, got k = {k}"
        )));
    }
    let num = count_irreducible(k + 1, q)?;
    let den: u128 = (1..=k)
        .map(|j| (q as u128).checked_pow(j).ok_or(Error::Overflow("q^k")))
        .sum::<Result<u128>>()?;
    let rhs = d / (k as u64 + 1);
    Ok(SmallDegreeCondition {
        holds: num > rhs as u128 * den,
        lhs: Fraction::new(num, den),
        rhs,
    })
}

/// `2 l^4 - 3 l^3 - 3 l^2 + l`
pub fn half_quartic(l: f64) -> f64 {
    ((2.0 * l - 3.0) * l - 3.0) * l * l + l
}

fn half_quartic_slope(l: f64) -> f64 {
    ((8.0 * l - 9.0) * l - 6.0) * l + 1.0
}

fn half_quartic_curvature(l: f64) -> f64 {
    (24.0 * l - 18.0) * l - 6.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfConstant {
    /// `(3 - max g) / 6`
    pub constant: f64,
    /// Maximizer of `g` on `[0, 1]`.
    pub lambda: f64,
    pub g_max: f64,
}

/// Maximizes the quartic on `[0, 1]` by a grid of `resolution + 1` points
/// followed by Newton steps on its derivative.
pub fn close_half_constant(resolution: usize) -> Result<HalfConstant> {
    if resolution < 1000 {
        return Err(Error::InvalidInput(format!(
            "resolution must be at least 1000 grid points, got {resolution}"
        )));
    }
    let (mut lambda, mut best) = (0.0, half_quartic(0.0));
    for i in 0..=resolution {
        let l = i as f64 / resolution as f64;
        let g = half_quartic(l);
        if g > best {
            (lambda, best) = (l, g);
        }
    }
    let h = 1.0 / resolution as f64;
    let mut l = lambda;
    for _ in 0..50 {
        let step = half_quartic_slope(l) / half_quartic_curvature(l);
        let next = (l - step).clamp((lambda - h).max(0.0), (lambda + h).min(1.0));
        if (next - l).abs() < 1e-15 {
            l = next;
            break;
        }
        l = next;
    }
    if half_quartic(l) > best {
        (lambda, best) = (l, half_quartic(l));
    }
    Ok(HalfConstant {
        constant: (3.0 - best) / 6.0,
        lambda,
        g_max: best,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub details: String,
}

impl CheckResult {
    fn new(name: &str, status: CheckStatus, details: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            status,
            details: details.into(),
        }
    }

    fn verdict(name: &str, ok: bool, details: impl Into<String>) -> Self {
        let status = if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self::new(name, status, details)
    }

    fn not_applicable(name: &str, details: impl Into<String>) -> Self {
        Self::new(name, CheckStatus::NotApplicable, details)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub params: Value,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    /// Milliseconds per check, keyed by check name.
    pub timings: BTreeMap<String, f64>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteParams {
    /// Randomized trial count; each suite has its own default.
    pub trials: Option<usize>,
    pub seed: u64,
    pub threads: usize,
    pub min_cover: MinCoverOptions,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            trials: None,
            seed: 1,
            threads: 1,
            min_cover: MinCoverOptions::default(),
        }
    }
}

fn poly_list(fam: &[Poly]) -> String {
    let parts: Vec<String> = fam.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

fn gf(q: u32) -> Result<FieldCtx> {
    FieldCtx::of_size(q)
}

fn random_family(rng: &mut ChaCha8Rng, pool: &[Poly], size: usize) -> Vec<Poly> {
    pool.choose_multiple(rng, size.min(pool.len()))
        .cloned()
        .collect()
}

/// Exhaustive field axioms for `F_q`.
pub fn field_axioms(field: &FieldCtx) -> std::result::Result<(), String> {
    let q = field.q();
    for a in 0..q {
        if field.add(a, 0) != a || field.mul(a, 1) != a || field.mul(a, 0) != 0 {
            return Err(format!("identity fails at a = {a}"));
        }
        if field.add(a, field.neg(a)) != 0 {
            return Err(format!("additive inverse fails at a = {a}"));
        }
        if a != 0 && field.mul(a, field.inv(a).map_err(|e| e.to_string())?) != 1 {
            return Err(format!("multiplicative inverse fails at a = {a}"));
        }
        for b in 0..q {
            if field.add(a, b) != field.add(b, a) || field.mul(a, b) != field.mul(b, a) {
                return Err(format!("commutativity fails at ({a}, {b})"));
            }
            for c in 0..q {
                if field.add(field.add(a, b), c) != field.add(a, field.add(b, c))
                    || field.mul(field.mul(a, b), c) != field.mul(a, field.mul(b, c))
                {
                    return Err(format!("associativity fails at ({a}, {b}, {c})"));
                }
                if field.mul(a, field.add(b, c)) != field.add(field.mul(a, b), field.mul(a, c)) {
                    return Err(format!("distributivity fails at ({a}, {b}, {c})"));
                }
            }
        }
    }
    Ok(())
}

/// Every family of size at most `conjectured - 1` that covers must contain a
/// multiple of each monic irreducible of degree `k + 1`.
pub fn irreducible_factor_check(family: &[Poly], k: usize) -> Result<CheckResult> {
    let name = "irreducible-factors-present";
    let field = family[0].field();
    let threshold = conjectured_threshold(field.q(), k);
    if family.len() as u128 >= threshold {
        return Ok(CheckResult::not_applicable(
            name,
            format!("|F| = {} is not below {threshold}", family.len()),
        ));
    }
    if !covering::covers(family, k, None)?.covers_all {
        return Ok(CheckResult::not_applicable(name, "family does not cover"));
    }
    for g in enumerate_monic(field, MonicSet::Irreducible(k + 1))? {
        let mut hit = false;
        for f in family {
            if g.divides(f)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(CheckResult::verdict(
                name,
                false,
                format!(
                    "{} covers at k = {k} with no multiple of {g}",
                    poly_list(family)
                ),
            ));
        }
    }
    Ok(CheckResult::verdict(
        name,
        true,
        format!("{} covering, all factors present", family.len()),
    ))
}

/// `|F| >= q^2 + (q + 1)/2` for covering families at level 2 with a
/// codimension-4 sunflower of size at least `q + 1`.
pub fn halfway_bound_check(
    family: &[Poly],
    covers: bool,
    sunflower: Option<&SunflowerReport>,
) -> CheckResult {
    let name = "large-sunflower-halfway";
    let q = family[0].field().q() as u128;
    let n = sunflower.map_or(0, |s| s.n()) as u128;
    if !covers || n < q + 1 {
        return CheckResult::not_applicable(
            name,
            format!(
                "covers = {covers}, n = {n}, need covering and n >= {}",
                q + 1
            ),
        );
    }
    let r = family.len() as u128;
    let ok = 2 * r > 2 * q * q + q;
    CheckResult::verdict(name, ok, format!("|F| = {r}, n = {n}, q = {q}"))
}

fn s_prime_factorization(sun: &SunflowerReport) -> Result<std::result::Result<(), String>> {
    let p = sun
        .classification
        .common_factor
        .as_ref()
        .expect("TYPE I has a common factor");
    for f in &sun.decomposition.s_prime {
        let (quo, rem) = f.div_rem(p)?;
        if !rem.is_zero() {
            return Ok(Err(format!("{p} does not divide {f}")));
        }
        match quo.degree() {
            Some(d) if d > 2 => return Ok(Err(format!("{f} / {p} = {quo} has degree {d}"))),
            Some(2) if quo.is_irreducible()? => {
                return Ok(Err(format!(
                    "{f} / {p} = {quo} is an irreducible quadratic"
                )))
            }
            _ => {}
        }
    }
    Ok(Ok(()))
}

fn intersection_dim(f: &Poly, g: &Poly, d: usize) -> Result<usize> {
    Ok(sunflower::pair_core(f, g, d)?.dim())
}

/// Whether every member of `S'` is joined to two petals `f_i, f_j` with
/// `dim(ker f ∩ ker f_i) = dim(ker f ∩ ker f_j) = D - 1` and
/// `dim(ker f_i ∩ ker f_j) = D - 2`.
pub fn connection_hypothesis(sun: &SunflowerReport) -> Result<std::result::Result<(), Poly>> {
    let d = sun.d;
    for f in &sun.decomposition.s_prime {
        let mut linked = Vec::new();
        for g in &sun.petals {
            if intersection_dim(f, g, d)? + 1 == d {
                linked.push(g);
            }
        }
        let mut found = false;
        'pairs: for i in 0..linked.len() {
            for j in i + 1..linked.len() {
                if intersection_dim(linked[i], linked[j], d)? + 2 == d {
                    found = true;
                    break 'pairs;
                }
            }
        }
        if !found {
            return Ok(Err(f.clone()));
        }
    }
    Ok(Ok(()))
}

/// Structural checks on one instance at level 2. Each check records
/// "not applicable" when its hypotheses fail.
pub fn appendix_checks(family: &[Poly], d: Option<usize>) -> Result<Vec<CheckResult>> {
    let field = family[0].field().clone();
    let q = field.q() as u128;
    let r = family.len() as u128;
    let cov = covering::covers(family, 2, d)?;
    let sun = max_sunflower(family, Some(cov.d))?;
    let n = sun.as_ref().map_or(0, |s| s.n()) as u128;
    let mut out = Vec::new();

    let name = "structured-part-size";
    out.push(match &sun {
        Some(s) if cov.covers_all && r <= q * q + q && n >= q + 2 => {
            let total = (s.n() + s.decomposition.s_prime.len()) as u128;
            CheckResult::verdict(
                name,
                total >= q * q,
                format!("|S| + |S'| = {total}, q^2 = {}", q * q),
            )
        }
        _ => CheckResult::not_applicable(
            name,
            format!("covers = {}, |F| = {r}, n = {n}", cov.covers_all),
        ),
    });

    let name = "s-prime-factorization";
    out.push(match &sun {
        Some(s) if s.classification.types.contains(&SunflowerType::TypeI) => {
            match s_prime_factorization(s)? {
                Ok(()) => CheckResult::verdict(
                    name,
                    true,
                    format!(
                        "{} members of S' factor through P",
                        s.decomposition.s_prime.len()
                    ),
                ),
                Err(msg) => CheckResult::verdict(name, false, msg),
            }
        }
        _ => CheckResult::not_applicable(name, "maximum sunflower is not TYPE I"),
    });

    let name = "connection-bound";
    out.push(match &sun {
        Some(s) if cov.covers_all && n > 2 * q && 2 * n < (q + 1) * (q + 1) => {
            match connection_hypothesis(s)? {
                Ok(()) => CheckResult::verdict(
                    name,
                    r > q * q + q,
                    format!("hypothesis holds with empty bridge, |F| = {r}"),
                ),
                Err(f) => {
                    CheckResult::not_applicable(name, format!("{f} is not connected to two petals"))
                }
            }
        }
        _ => CheckResult::not_applicable(
            name,
            format!(
                "covers = {}, n = {n}, need 2q+1 <= n < (q+1)^2/2",
                cov.covers_all
            ),
        ),
    });

    let name = "large-sunflower-full-bound";
    out.push(if cov.covers_all && q >= 8 && n >= q + 2 {
        CheckResult::verdict(name, r > q * q + q, format!("|F| = {r}, n = {n}"))
    } else {
        CheckResult::not_applicable(
            name,
            format!("covers = {}, q = {q}, n = {n}", cov.covers_all),
        )
    });

    out.push(halfway_bound_check(family, cov.covers_all, sun.as_ref()));
    Ok(out)
}

/// Coverage-bound identities behind the large-sunflower arguments, checked
/// in exact integer arithmetic over a range of parameters.
fn appendix_identities() -> std::result::Result<String, String> {
    let mut count = 0u64;
    for q in 2i128..=11 {
        for d in 3u32..=5 {
            let (qd, qd1, qd2, qd3) = (q.pow(d), q.pow(d - 1), q.pow(d - 2), q.pow(d - 3));
            let top = q * q + q;
            for n in 2..top {
                // S'' contribution bound below q^{D-2}(q-1)^2 once n >= 2q+1
                if n > 2 * q && qd - n * qd2 + (n - 1) * qd3 > qd2 * (q - 1) * (q - 1) {
                    return Err(format!("S'' bound fails at q={q} D={d} n={n}"));
                }
                for k in 0..=(top - n) {
                    // doubled to clear the halves in r_n = n - q^2/2
                    let s1 = 2 * (qd + (n - 1) * (qd - qd2));
                    let s2 = 2 * k * (qd - qd1);
                    let rs = n + k - q * q;
                    let s3 =
                        (q - rs) * (qd - (2 * n - q * q) * qd2 + qd1 + (2 * n - q * q - 2) * qd3);
                    let rhs = 2 * q.pow(d + 2) + 2 * rs * qd3 * (q - 1) * (n - (q + 1));
                    if s1 + s2 + s3 != rhs {
                        return Err(format!(
                            "split coverage identity fails at q={q} D={d} n={n} k={k}"
                        ));
                    }
                    count += 1;
                }
            }
            for n in q + 1..=(1 + top / 2) {
                // least R with q^{D+2} <= q^D + (n-1)(q^D - q^{D-2}) + (R-n)(q^D - q^{D-1})
                let base = qd + (n - 1) * (qd - qd2) - n * (qd - qd1);
                let r = (q.pow(d + 2) - base + (qd - qd1) - 1).div_euclid(qd - qd1);
                if r * q < q * q * q + q * q + q + 1 - n || 2 * r < 2 * q * q + q + 1 {
                    return Err(format!("halfway bound fails at q={q} D={d} n={n}: R={r}"));
                }
                count += 1;
            }
            for n in 2 * q + 1..top {
                for c in 0..((q + 1) * (q + 1) - 2 * n).max(0) {
                    let per = qd2 * (q - 1) * (q - 1);
                    let base = qd + (n - 1) * (qd - qd2) + c * (qd - qd1) - (n + c) * per;
                    let r = (q.pow(d + 2) - base + per - 1).div_euclid(per);
                    if r * (q - 1) < (q * q + q) * (q - 1) + (q + 1) * (q + 1) - (2 * n + c) {
                        return Err(format!("connection bound fails at q={q} D={d} n={n} r={c}"));
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} parameter combinations"))
}

/// Random family with a planted sunflower `P * {subset of the construction}`
/// plus a few extra speeds, all of degree at most `d`.
pub fn planted_instance(rng: &mut ChaCha8Rng, field: &FieldCtx, d: usize) -> Result<Vec<Poly>> {
    let p_deg = rng.gen_range(0..=d - 2);
    let mut pc: Vec<Elem> = (0..p_deg).map(|_| rng.gen_range(0..field.q())).collect();
    pc.push(1);
    let p = Poly::new(field, pc)?;
    let petals = construction(field, &p)?;
    let keep = rng.gen_range(2..=petals.len());
    let mut fam = random_family(rng, &petals, keep);
    let pool = enumerate_monic(field, MonicSet::UpToDegree(d))?;
    let target = (keep + rng.gen_range(1..=6)).min(pool.len());
    while fam.len() < target {
        let g = pool.choose(rng).expect("pool is nonempty").clone();
        if !fam.contains(&g) {
            fam.push(g);
        }
    }
    fam.shuffle(rng);
    Ok(fam)
}

/// One randomized contribution instance: a planted family, its maximum
/// sunflower, and the bound against the sunflower on a random non-petal.
/// When the sunflower has at most `q` petals the staged bound is also
/// checked for a random runner in a shuffled change-point order.
pub fn contribution_trial(
    rng: &mut ChaCha8Rng,
    q: u32,
    d: usize,
) -> Result<std::result::Result<(), String>> {
    let field = gf(q)?;
    loop {
        let fam = planted_instance(rng, &field, d)?;
        let sun = max_sunflower(&fam, Some(d))?.expect("planted sunflower has a codim-4 pair");
        let outside: Vec<&Poly> = fam.iter().filter(|f| !sun.petals.contains(f)).collect();
        let Some(&f) = outside.choose(rng) else {
            continue;
        };
        let c = contribution_bound_check(&fam, &sun, f, BoundMode::AgainstSunflower)?;
        if !c.ok {
            return Ok(Err(format!(
                "F = {}, S = {}, f = {f}: contribution {} > {}",
                poly_list(&fam),
                poly_list(&sun.petals),
                c.actual,
                c.bound
            )));
        }
        if sun.n() > q as usize {
            return Ok(Ok(()));
        }
        let mut shuffled = fam.clone();
        shuffled.shuffle(rng);
        let (ordered, _) = sunflower::change_point_order(&shuffled, &sun)?;
        let g = ordered[rng.gen_range(sun.n()..ordered.len())].clone();
        let c = contribution_bound_check(&ordered, &sun, &g, BoundMode::Staged)?;
        if !c.ok {
            return Ok(Err(format!(
                "order {}, S = {}, runner {g}: contribution {} > staged bound {} (t = {:?})",
                poly_list(&ordered),
                poly_list(&sun.petals),
                c.actual,
                c.bound,
                c.t
            )));
        }
        return Ok(Ok(()));
    }
}

/// Any `(q^{k+1}-1)/(q-1) - 1` lines through the origin of `F_q^{k+1}` miss a
/// nonzero vector.
fn lines_leave_a_gap(field: &FieldCtx, k: usize, lines: &[Vec<Elem>]) -> bool {
    let dim = k + 1;
    let q = field.q();
    let mut covered = BitSet::new((q as usize).pow(dim as u32));
    for v in lines {
        let s = Subspace::span(field, dim, vec![v.clone()]).expect("lengths match");
        for idx in s.point_indices() {
            covered.insert(idx as usize);
        }
    }
    covered.insert(0);
    !covered.is_full()
}

fn projective_points(field: &FieldCtx, dim: usize) -> Vec<Vec<Elem>> {
    let q = field.q();
    (1..(q as u128).pow(dim as u32))
        .map(|i| index_to_vector(q, i, dim))
        .filter(|v| v.iter().rev().find(|&&x| x != 0) == Some(&1))
        .collect()
}

fn lines_check(rng: &mut ChaCha8Rng, trials: usize) -> Result<std::result::Result<String, String>> {
    let mut done = 0;
    for (q, k) in [(2u32, 1usize), (2, 2), (3, 1), (3, 2)] {
        let field = gf(q)?;
        let r = conjectured_threshold(q, k) as usize - 1;
        let points = projective_points(&field, k + 1);
        // each choice of r distinct lines omits exactly one
        for skip in 0..points.len() {
            let lines: Vec<Vec<Elem>> = points
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, v)| v.clone())
                .collect();
            if !lines_leave_a_gap(&field, k, &lines) {
                return Ok(Err(format!("q={q} k={k}: lines {lines:?} cover")));
            }
            done += 1;
        }
        for _ in 0..trials {
            let lines: Vec<Vec<Elem>> = (0..r)
                .map(|_| loop {
                    let v: Vec<Elem> = (0..=k).map(|_| rng.gen_range(0..q)).collect();
                    if v.iter().any(|&x| x != 0) {
                        break v;
                    }
                })
                .collect();
            if !lines_leave_a_gap(&field, k, &lines) {
                return Ok(Err(format!("q={q} k={k}: lines {lines:?} cover")));
            }
            done += 1;
        }
    }
    Ok(Ok(format!("{done} line configurations")))
}

type CheckFn = Box<dyn Fn() -> Result<CheckResult> + Send + Sync>;

fn check<F>(f: F) -> CheckFn
where
    F: Fn() -> Result<CheckResult> + Send + Sync + 'static,
{
    Box::new(f)
}

fn outcome(name: &str, r: Result<std::result::Result<String, String>>) -> Result<CheckResult> {
    Ok(match r? {
        Ok(details) => CheckResult::verdict(name, true, details),
        Err(details) => CheckResult::verdict(name, false, details),
    })
}

fn field_axioms_checks(_: &SuiteParams) -> Vec<CheckFn> {
    [2u32, 3, 4, 5, 7, 8, 9]
        .into_iter()
        .map(|q| {
            check(move || {
                let name = format!("axioms-q{q}");
                let field = gf(q)?;
                Ok(match field_axioms(&field) {
                    Ok(()) => CheckResult::verdict(&name, true, format!("exhaustive over F_{q}")),
                    Err(msg) => CheckResult::verdict(&name, false, msg),
                })
            })
        })
        .collect()
}

fn gauss_count_checks(_: &SuiteParams) -> Vec<CheckFn> {
    [2u32, 3, 4, 5, 8, 9]
        .into_iter()
        .map(|q| {
            check(move || {
                let name = format!("gauss-count-q{q}");
                let field = gf(q)?;
                for m in 1..=5u32 {
                    let formula = count_irreducible(m, q as u64)?;
                    let listed =
                        enumerate_monic(&field, MonicSet::Irreducible(m as usize))?.len() as u128;
                    if formula != listed {
                        return Ok(CheckResult::verdict(
                            &name,
                            false,
                            format!("m = {m}: formula {formula}, enumeration {listed}"),
                        ));
                    }
                }
                Ok(CheckResult::verdict(&name, true, "m = 1..5 agree"))
            })
        })
        .collect()
}

fn oracle_equivalence_checks(params: &SuiteParams) -> Vec<CheckFn> {
    let seed = params.seed;
    let trials = params.trials.unwrap_or(100);
    vec![
        check(|| {
            let name = "subsets-q2-deg2";
            let field = gf(2)?;
            let pool = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
            let mut count = 0;
            for mask in 1u32..(1 << pool.len()) {
                if mask.count_ones() > 4 {
                    continue;
                }
                let fam: Vec<Poly> = (0..pool.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| pool[i].clone())
                    .collect();
                let a = covering::loneliness(&fam)?;
                let b = loneliness_direct(&fam)?;
                if a.exponent != b.exponent {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!(
                            "{}: covering {} vs direct {}",
                            poly_list(&fam),
                            a.exponent,
                            b.exponent
                        ),
                    ));
                }
                count += 1;
            }
            Ok(CheckResult::verdict(
                name,
                count == 98,
                format!("{count} subsets agree"),
            ))
        }),
        check(move || {
            let name = "random-families";
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let q = [2u32, 3, 4][rng.gen_range(0..3)];
                let field = gf(q)?;
                let pool =
                    enumerate_monic(&field, MonicSet::UpToDegree(if q == 2 { 3 } else { 2 }))?;
                let size = rng.gen_range(1..=(q as usize + 2));
                let fam = random_family(&mut rng, &pool, size);
                let a = covering::loneliness(&fam)?;
                let b = loneliness_direct(&fam)?;
                if a.exponent != b.exponent {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!(
                            "q={q} {}: covering {} vs direct {}",
                            poly_list(&fam),
                            a.exponent,
                            b.exponent
                        ),
                    ));
                }
                for f in &fam {
                    if !a.witness.frac_norm(f)?.at_least(a.exponent) {
                        return Ok(CheckResult::verdict(
                            name,
                            false,
                            format!("witness {:?} is close to {f}", a.witness.coeffs()),
                        ));
                    }
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!("{trials} families agree"),
            ))
        }),
    ]
}

fn theorem_1_4_checks(params: &SuiteParams) -> Vec<CheckFn> {
    let seed = params.seed;
    let trials = params.trials.unwrap_or(1000);
    vec![
        check(move || {
            let name = "union-bound-never-covers";
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let q = [2u32, 3, 4, 5][rng.gen_range(0..4)];
                let k = rng.gen_range(1..=2usize);
                let d = rng.gen_range(0..=3usize);
                let field = gf(q)?;
                let pool = enumerate_monic(&field, MonicSet::UpToDegree(d))?;
                let size = rng.gen_range(1..=(q as usize).pow(k as u32));
                let fam = random_family(&mut rng, &pool, size);
                let r = covering::covers(&fam, k, Some(d))?;
                if r.covers_all {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!("q={q} k={k} D={d} {} covers", poly_list(&fam)),
                    ));
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!("{trials} families of size <= q^k, none cover"),
            ))
        }),
        check(move || {
            let name = "lower-bound-witness";
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
            for _ in 0..trials / 10 {
                let q = [2u32, 3, 4][rng.gen_range(0..3)];
                let field = gf(q)?;
                let pool = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
                let size = rng.gen_range(1..=pool.len());
                let fam = random_family(&mut rng, &pool, size);
                let l = covering::loneliness(&fam)?;
                let mut bound = 1;
                while (q as usize).pow(bound as u32) < fam.len() {
                    bound += 1;
                }
                if l.exponent > bound {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!(
                            "q={q} {}: exponent {} above {bound}",
                            poly_list(&fam),
                            l.exponent
                        ),
                    ));
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                "loneliness never below q^-k with |F| <= q^k",
            ))
        }),
    ]
}

fn extremal_family_checks(_: &SuiteParams) -> Vec<CheckFn> {
    [(2u32, 1usize), (3, 1), (2, 2), (3, 2)]
        .into_iter()
        .map(|(q, k)| {
            check(move || {
                let name = format!("extremal-q{q}-k{k}");
                let field = gf(q)?;
                let fam = gen_extremal(&field, k)?;
                let size_ok = fam.len() as u128 == conjectured_threshold(q, k);
                let cov = covering::covers(&fam, k, None)?.covers_all;
                let l = covering::loneliness(&fam)?.exponent;
                Ok(CheckResult::verdict(
                    &name,
                    size_ok && cov && l == k + 1,
                    format!("size {}, covers at k: {cov}, exponent {l}", fam.len()),
                ))
            })
        })
        .collect()
}

fn min_cover_check(
    name: String,
    q: u32,
    k: usize,
    d: usize,
    expected: Option<usize>,
    opts: MinCoverOptions,
) -> CheckFn {
    check(move || {
        let field = gf(q)?;
        let out = min_cover_with(&field, k, d, &opts)?;
        let r = &out.result;
        if !r.exact {
            return Ok(CheckResult::verdict(
                &name,
                false,
                format!("budget exhausted, lower bound {}", r.lower_bound),
            ));
        }
        let floor = (q as usize).pow(k as u32) + 1;
        let ok = match (expected, r.min_size) {
            (Some(e), Some(m)) => e == m,
            (None, Some(m)) => m >= floor,
            (_, None) => false,
        };
        Ok(CheckResult::verdict(
            &name,
            ok,
            format!(
                "min_size {:?}, conjectured {}, nodes {}",
                r.min_size, r.conjectured, r.nodes
            ),
        ))
    })
}

fn min_cover_k1_checks(params: &SuiteParams) -> Vec<CheckFn> {
    [2u32, 3, 4]
        .into_iter()
        .map(|q| {
            min_cover_check(
                format!("min-cover-q{q}-k1-D1"),
                q,
                1,
                1,
                Some(q as usize + 1),
                params.min_cover,
            )
        })
        .collect()
}

fn min_cover_k2_checks(params: &SuiteParams) -> Vec<CheckFn> {
    let opts = params.min_cover;
    let seed = params.seed;
    let trials = params.trials.unwrap_or(500);
    vec![
        min_cover_check("min-cover-q2-k2-D2".into(), 2, 2, 2, Some(7), opts),
        min_cover_check("min-cover-q3-k2-D2".into(), 3, 2, 2, Some(13), opts),
        min_cover_check("min-cover-q2-k2-D3".into(), 2, 2, 3, None, opts),
        check(|| {
            let name = "small-degree-condition";
            let cases = [((2, 2, 2), true), ((2, 2, 3), false), ((8, 2, 2), true)];
            for ((q, k, d), want) in cases {
                if smalld_condition(q, k, d)?.holds != want {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!("(q, k, D) = ({q}, {k}, {d})"),
                    ));
                }
            }
            Ok(CheckResult::verdict(name, true, "examples agree"))
        }),
        check(move || {
            let name = "irreducible-factors-in-minimum-covers";
            let mut checked = 0;
            for (q, k, d) in [
                (2u32, 1usize, 1usize),
                (3, 1, 1),
                (2, 2, 2),
                (3, 2, 2),
                (2, 2, 3),
                (2, 1, 2),
            ] {
                let field = gf(q)?;
                let o = MinCoverOptions {
                    factor_pruning: false,
                    collect_all: true,
                    ..opts
                };
                let out = min_cover_with(&field, k, d, &o)?;
                for fam in &out.families {
                    let c = irreducible_factor_check(fam, k)?;
                    if c.status == CheckStatus::Fail {
                        return Ok(c);
                    }
                    checked += 1;
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!("{checked} minimum covering families"),
            ))
        }),
        check(move || {
            let name = "halfway-bound-on-minimum-covers";
            let mut applied = 0;
            for (q, d) in [(2u32, 2usize), (3, 2), (2, 3)] {
                let field = gf(q)?;
                let o = MinCoverOptions {
                    collect_all: true,
                    ..opts
                };
                for fam in min_cover_with(&field, 2, d, &o)?.families {
                    let sun = max_sunflower(&fam, Some(d))?;
                    let c = halfway_bound_check(&fam, true, sun.as_ref());
                    match c.status {
                        CheckStatus::Fail => return Ok(c),
                        CheckStatus::Pass => applied += 1,
                        CheckStatus::NotApplicable => {}
                    }
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!("applied to {applied} families"),
            ))
        }),
        check(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
            outcome("lines-leave-a-gap", lines_check(&mut rng, trials))
        }),
    ]
}

fn sunflower_bound_checks(_: &SuiteParams) -> Vec<CheckFn> {
    let mut v: Vec<CheckFn> = [2u32, 3, 4, 5]
        .into_iter()
        .map(|q| {
            check(move || {
                let name = format!("construction-q{q}");
                let field = gf(q)?;
                let s = construction(&field, &Poly::one(&field))?;
                let core = is_sunflower(&s, 2)?;
                let codim = core.as_ref().map(Subspace::codim);
                Ok(CheckResult::verdict(
                    &name,
                    s.len() as u64 == size_bound(q) && codim == Some(4),
                    format!("{} petals, core codimension {codim:?}", s.len()),
                ))
            })
        })
        .collect();
    for q in [2u32, 3] {
        v.push(check(move || {
            let name = format!("exhaustive-max-q{q}");
            let field = gf(q)?;
            let fam = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
            let n = max_sunflower(&fam, None)?.map_or(0, |s| s.n());
            Ok(CheckResult::verdict(
                &name,
                n as u64 == size_bound(q),
                format!("maximum {n}, bound {}", size_bound(q)),
            ))
        }));
    }
    v
}

fn sunflower_invariants(sun: &SunflowerReport) -> Result<std::result::Result<(), String>> {
    let q = sun.field().q();
    if sun.n() as u64 > size_bound(q) {
        return Ok(Err(format!("size {} above {}", sun.n(), size_bound(q))));
    }
    if is_sunflower(&sun.petals, sun.d)?.as_ref() != Some(&sun.core) || sun.core.codim() != 4 {
        return Ok(Err("pair cores differ from the reported core".into()));
    }
    if sun.n() >= 3 && sun.classification.types.is_empty() {
        return Ok(Err("neither TYPE I nor TYPE II".into()));
    }
    if let (Some(p), Some(quots)) = (
        &sun.classification.common_factor,
        &sun.classification.quotients,
    ) {
        for (f, qf) in sun.petals.iter().zip(quots) {
            if p.mul(qf)? != *f || qf.degree().is_none_or(|d| d > 2) {
                return Ok(Err(format!(
                    "{f} is not {p} times a quotient of degree <= 2"
                )));
            }
        }
    }
    if !sun.decomposition.unlinked.is_empty() {
        return Ok(Err(format!(
            "S' members {} meet no petal in dimension D-1",
            poly_list(&sun.decomposition.unlinked)
        )));
    }
    Ok(Ok(()))
}

fn sunflower_structure_checks(params: &SuiteParams) -> Vec<CheckFn> {
    let seed = params.seed;
    let trials = params.trials.unwrap_or(200);
    vec![
        check(move || {
            let name = "random-families";
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut found = 0;
            for _ in 0..trials {
                let q = [2u32, 3, 4][rng.gen_range(0..3)];
                let d = rng.gen_range(2..=3usize);
                let field = gf(q)?;
                let fam = if rng.gen_bool(0.5) {
                    planted_instance(&mut rng, &field, d)?
                } else {
                    let pool = enumerate_monic(&field, MonicSet::UpToDegree(d))?;
                    let size = rng.gen_range(2..=14);
                    random_family(&mut rng, &pool, size)
                };
                if let Some(sun) = max_sunflower(&fam, Some(d))? {
                    if let Err(msg) = sunflower_invariants(&sun)? {
                        return Ok(CheckResult::verdict(
                            name,
                            false,
                            format!("F = {}: {msg}", poly_list(&fam)),
                        ));
                    }
                    found += 1;
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!("{found} sunflowers checked"),
            ))
        }),
        check(|| {
            let name = "full-families";
            for (q, d) in [(2u32, 2usize), (3, 2), (4, 2), (2, 3), (3, 3)] {
                let field = gf(q)?;
                let fam = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
                let sun = max_sunflower(&fam, Some(d))?.expect("full family has codim-4 pairs");
                if let Err(msg) = sunflower_invariants(&sun)? {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!("q={q} D={d}: {msg}"),
                    ));
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                "all monic of degree <= 2, q in 2..4",
            ))
        }),
    ]
}

fn afterparty_checks(params: &SuiteParams) -> Vec<CheckFn> {
    let seed = params.seed;
    let trials = params.trials.unwrap_or(500);
    vec![check(move || {
        let name = "contribution-bounds";
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in 0..trials {
            let q = [2u32, 3][t % 2];
            let d = [3usize, 4][(t / 2) % 2];
            if let Err(msg) = contribution_trial(&mut rng, q, d)? {
                return Ok(CheckResult::verdict(
                    name,
                    false,
                    format!("trial {t}: {msg}"),
                ));
            }
        }
        Ok(CheckResult::verdict(
            name,
            true,
            format!("{trials} instances, q in {{2,3}}, D in {{3,4}}"),
        ))
    })]
}

fn large_sunflower_checks(params: &SuiteParams) -> Vec<CheckFn> {
    let seed = params.seed;
    let trials = params.trials.unwrap_or(40);
    vec![
        check(|| {
            let name = "full-families";
            let mut details = Vec::new();
            for (q, d) in [
                (2u32, 2usize),
                (3, 2),
                (4, 2),
                (5, 2),
                (8, 2),
                (2, 3),
                (3, 3),
            ] {
                let field = gf(q)?;
                let fam = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
                for c in appendix_checks(&fam, Some(d))? {
                    if c.status == CheckStatus::Fail {
                        return Ok(CheckResult::verdict(
                            name,
                            false,
                            format!("q={q} D={d} {}: {}", c.name, c.details),
                        ));
                    }
                    if c.status == CheckStatus::Pass && c.name == "large-sunflower-halfway" {
                        details.push(format!("q={q},D={d}"));
                    }
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!("halfway bound holds at {}", details.join(" ")),
            ))
        }),
        check(move || {
            let name = "random-supersets";
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let q = [2u32, 3][rng.gen_range(0..2)];
                let field = gf(q)?;
                let mut fam = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
                let pool = enumerate_monic(&field, MonicSet::ExactDegree(3))?;
                let extra = rng.gen_range(0..4);
                fam.extend(random_family(&mut rng, &pool, extra));
                for c in appendix_checks(&fam, Some(3))? {
                    if c.status == CheckStatus::Fail {
                        return Ok(CheckResult::verdict(
                            name,
                            false,
                            format!("{}: {} {}", poly_list(&fam), c.name, c.details),
                        ));
                    }
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!("{trials} families"),
            ))
        }),
    ]
}

fn small_sunflower_constant_checks(params: &SuiteParams) -> Vec<CheckFn> {
    let seed = params.seed;
    let trials = params.trials.unwrap_or(100);
    vec![
        check(|| {
            let name = "half-constant";
            let c = close_half_constant(10_000)?;
            let rounded = (c.constant * 1e4).round() / 1e4;
            let ends = half_quartic(0.0) == 0.0 && half_quartic(1.0) == -3.0;
            Ok(CheckResult::verdict(
                name,
                (rounded - 0.4877).abs() < 1e-9 && ends,
                format!("constant {:.6} at lambda {:.6}", c.constant, c.lambda),
            ))
        }),
        check(|| {
            let name = "final-stage-formula";
            for q in 2u32..=9 {
                for n in 2..=q as usize {
                    for d in 3..=5 {
                        if sunflower::staged_bound(q, d, n, q as u64)
                            != sunflower::final_stage_bound(q, d, n)
                        {
                            return Ok(CheckResult::verdict(
                                name,
                                false,
                                format!("q={q} n={n} D={d}"),
                            ));
                        }
                    }
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                "t = q matches the final-stage bound",
            ))
        }),
        check(move || {
            let name = "staged-bounds-small-sunflowers";
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut staged, mut past_change) = (0, 0);
            for _ in 0..trials {
                let q = [3u32, 4][rng.gen_range(0..2)];
                let field = gf(q)?;
                let pool = enumerate_monic(&field, MonicSet::UpToDegree(3))?;
                let size = rng.gen_range(6..=14);
                let fam = random_family(&mut rng, &pool, size);
                let Some(sun) = max_sunflower(&fam, Some(3))? else {
                    continue;
                };
                if sun.n() > q as usize {
                    continue;
                }
                let mut shuffled = fam.clone();
                shuffled.shuffle(&mut rng);
                let (ordered, _) = sunflower::change_point_order(&shuffled, &sun)?;
                for f in &ordered[sun.n()..] {
                    let c = contribution_bound_check(&ordered, &sun, f, BoundMode::Staged)?;
                    if !c.ok {
                        return Ok(CheckResult::verdict(
                            name,
                            false,
                            format!(
                                "order {}, runner {f}: {} > {}",
                                poly_list(&ordered),
                                c.actual,
                                c.bound
                            ),
                        ));
                    }
                    if c.t.is_some() {
                        staged += 1;
                    } else {
                        past_change += 1;
                    }
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!(
                    "{staged} runners within the staged bound, {past_change} past the change point"
                ),
            ))
        }),
    ]
}

fn appendix_suite_checks(params: &SuiteParams) -> Vec<CheckFn> {
    let seed = params.seed;
    let trials = params.trials.unwrap_or(40);
    let threads = params.threads;
    vec![
        check(|| outcome("bound-identities", Ok(appendix_identities()))),
        check(move || {
            let name = "f8-full-family-minimal";
            let field = FieldCtx::new(2, 3)?;
            let fam = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
            let opts = CoverageOptions {
                threads,
                ..Default::default()
            };
            if !covering::covers_with(&fam, 2, None, &opts)?.covers_all {
                return Ok(CheckResult::verdict(
                    name,
                    false,
                    "the 73 polynomials do not cover",
                ));
            }
            for skip in 0..fam.len() {
                let sub: Vec<Poly> = fam
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, f)| f.clone())
                    .collect();
                if covering::covers_with(&sub, 2, Some(2), &opts)?.covers_all {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!("dropping {} still covers", fam[skip]),
                    ));
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!(
                    "{} covers, no 72-subfamily does (modulus {:?})",
                    fam.len(),
                    field.modulus()
                ),
            ))
        }),
        check(|| {
            let name = "f8-structure";
            let field = FieldCtx::new(2, 3)?;
            let fam = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
            let results = appendix_checks(&fam, None)?;
            let fail = results.iter().find(|c| c.status == CheckStatus::Fail);
            let summary: Vec<String> = results
                .iter()
                .map(|c| format!("{}={:?}", c.name, c.status))
                .collect();
            Ok(CheckResult::verdict(
                name,
                fail.is_none(),
                summary.join(", "),
            ))
        }),
        check(|| {
            let name = "s-prime-factorization-constructed";
            let field = gf(3)?;
            let mut fam = construction(&field, &Poly::one(&field))?;
            for a in 0..3 {
                for b in a + 1..3 {
                    fam.push(Poly::linear_root(&field, a).mul(&Poly::linear_root(&field, b))?);
                }
            }
            let sun = max_sunflower(&fam, Some(2))?.expect("construction is a sunflower");
            if !sun.classification.types.contains(&SunflowerType::TypeI) {
                return Ok(CheckResult::verdict(
                    name,
                    false,
                    "maximum sunflower is not TYPE I",
                ));
            }
            Ok(match s_prime_factorization(&sun)? {
                Ok(()) => CheckResult::verdict(
                    name,
                    true,
                    format!("{} members of S'", sun.decomposition.s_prime.len()),
                ),
                Err(msg) => CheckResult::verdict(name, false, msg),
            })
        }),
        check(|| {
            let name = "connection-hypothesis-constructed";
            // S = irreducible quadratics and squares (T - mu)^2 for mu != lambda;
            // S' = products of two distinct linear factors avoiding T - lambda
            for q in [3u32, 4, 5] {
                let field = gf(q)?;
                let one = Poly::one(&field);
                let mut petals: Vec<Poly> = vec![one.clone()];
                petals.extend(enumerate_monic(&field, MonicSet::Irreducible(2))?);
                for mu in 1..q {
                    let l = Poly::linear_root(&field, mu);
                    petals.push(l.mul(&l)?);
                }
                let Some(core) = is_sunflower(&petals, 2)? else {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!("q={q}: petals are not a sunflower"),
                    ));
                };
                let mut fam = petals.clone();
                for a in 1..q {
                    for b in a + 1..q {
                        fam.push(Poly::linear_root(&field, a).mul(&Poly::linear_root(&field, b))?);
                    }
                }
                let decomposition = sunflower::decompose(&fam, &petals, &core, 2)?;
                let report = SunflowerReport {
                    d: 2,
                    petal_indices: (0..petals.len()).collect(),
                    classification: sunflower::classify(&petals)?,
                    petals,
                    core,
                    decomposition,
                };
                if let Err(f) = connection_hypothesis(&report)? {
                    return Ok(CheckResult::verdict(
                        name,
                        false,
                        format!("q={q}: {f} is not connected"),
                    ));
                }
            }
            Ok(CheckResult::verdict(name, true, "q in 3..5"))
        }),
        check(move || {
            let name = "random-instances";
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut not_applicable = 0;
            for _ in 0..trials {
                let q = [2u32, 3][rng.gen_range(0..2)];
                let field = gf(q)?;
                let pool = enumerate_monic(&field, MonicSet::UpToDegree(2))?;
                let size = rng.gen_range(3..=pool.len());
                let fam = random_family(&mut rng, &pool, size);
                for c in appendix_checks(&fam, None)? {
                    match c.status {
                        CheckStatus::Fail => {
                            return Ok(CheckResult::verdict(
                                name,
                                false,
                                format!("{}: {} {}", poly_list(&fam), c.name, c.details),
                            ))
                        }
                        CheckStatus::NotApplicable => not_applicable += 1,
                        CheckStatus::Pass => {}
                    }
                }
            }
            Ok(CheckResult::verdict(
                name,
                true,
                format!("{trials} families, {not_applicable} gated checks"),
            ))
        }),
    ]
}

/// Runs the named suite. Checks run concurrently when `threads > 1`; the
/// report lists them in a fixed order either way.
pub fn run_suite(name: &str, params: &SuiteParams) -> Result<SuiteReport> {
    let checks = match name {
        "field-axioms" => field_axioms_checks(params),
        "gauss-count" => gauss_count_checks(params),
        "oracle-equivalence" => oracle_equivalence_checks(params),
        "theorem-1-4" => theorem_1_4_checks(params),
        "extremal-family" => extremal_family_checks(params),
        "min-cover-k1" => min_cover_k1_checks(params),
        "min-cover-k2" => min_cover_k2_checks(params),
        "sunflower-bound" => sunflower_bound_checks(params),
        "sunflower-structure" => sunflower_structure_checks(params),
        "afterparty" => afterparty_checks(params),
        "large-sunflower" => large_sunflower_checks(params),
        "small-sunflower-constant" => small_sunflower_constant_checks(params),
        "appendix" => appendix_suite_checks(params),
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    let run_one = |c: &CheckFn| -> Result<(CheckResult, f64)> {
        let t = Instant::now();
        let r = c()?;
        Ok((r, t.elapsed().as_secs_f64() * 1e3))
    };
    let results: Vec<(CheckResult, f64)> = if params.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(params.threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| checks.par_iter().map(run_one).collect::<Result<_>>())?
    } else {
        checks.iter().map(run_one).collect::<Result<_>>()?
    };
    let mut timings = BTreeMap::new();
    let mut out = Vec::with_capacity(results.len());
    for (r, ms) in results {
        timings.insert(r.name.clone(), ms);
        out.push(r);
    }
    for c in out.iter().filter(|c| c.status == CheckStatus::Fail) {
        log::error!("{name}: check {} failed: {}", c.name, c.details);
    }
    Ok(SuiteReport {
        suite: name.to_string(),
        params: json!({
            "seed": params.seed,
            "trials": params.trials,
            "threads": params.threads,
        }),
        pass: out.iter().all(|c| c.status != CheckStatus::Fail),
        checks: out,
        timings,
    })
}
