//! Codimension-4 sunflowers among the level-2 kernels of a family.
//!
//! Everything here works at `k = 2`: `ker(f)` is a `D`-dimensional subspace
//! of `F_q^{D+2}`. Two petals `f, g` meet in the pair core
//! `<f, Tf, g, Tg>^perp`; a sunflower is a set of speeds whose pair cores all
//! coincide.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::covering::{bitmap_len, circulant, kernel, DEFAULT_BITMAP_CAP};
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};
use crate::linalg::{rank, Subspace};
use crate::poly::{enumerate_monic, max_degree, normalize_speeds, MonicSet, Poly};

/// Level used throughout this module.
pub const LEVEL: usize = 2;

/// Codimension of the cores that the search looks for.
pub const CORE_CODIM: usize = 4;

/// Default cap on branch-and-bound nodes per candidate core.
pub const DEFAULT_NODE_CAP: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SunflowerType {
    /// Common factor `P` with pairwise-coprime monic quotients of degree at most 2.
    #[serde(rename = "TYPE_I")]
    TypeI,
    /// Every petal lies in the span of the first two.
    #[serde(rename = "TYPE_II")]
    TypeII,
}

/// Result of [`classify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub types: Vec<SunflowerType>,
    /// `gcd` of the petals, present iff TYPE I holds.
    pub common_factor: Option<Poly>,
    /// `petal / P` in petal order, present iff TYPE I holds.
    pub quotients: Option<Vec<Poly>>,
    /// Roots `lambda` with `(T - lambda)` dividing some quotient, present iff TYPE I holds.
    pub lambda_root_set: Option<Vec<Elem>>,
}

/// Result of [`decompose`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Speeds outside the sunflower whose kernel contains the core.
    pub s_prime: Vec<Poly>,
    /// The remaining speeds outside the sunflower.
    pub s_double_prime: Vec<Poly>,
    /// Members of `s_prime` meeting no petal in dimension `D - 1`. Empty for
    /// inclusion-maximal sunflowers.
    pub unlinked: Vec<Poly>,
}

/// A codimension-4 sunflower of a family together with its analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SunflowerReport {
    pub d: usize,
    pub petals: Vec<Poly>,
    /// Positions of the petals in the normalized family.
    pub petal_indices: Vec<usize>,
    pub core: Subspace,
    pub classification: Classification,
    pub decomposition: Decomposition,
}

impl SunflowerReport {
    pub fn n(&self) -> usize {
        self.petals.len()
    }

    pub fn field(&self) -> &FieldCtx {
        self.core.field()
    }

    pub fn to_json(&self) -> SunflowerJson {
        let lists = |v: &[Poly]| v.iter().map(|f| f.coeffs().to_vec()).collect();
        SunflowerJson {
            q: self.field().q(),
            d: self.d,
            n: self.n(),
            petals: lists(&self.petals),
            core: self.core.basis().to_vec(),
            core_codim: self.core.codim(),
            types: self.classification.types.clone(),
            p: self
                .classification
                .common_factor
                .as_ref()
                .map(|p| p.coeffs().to_vec()),
            s_prime: lists(&self.decomposition.s_prime),
            s_double_prime: lists(&self.decomposition.s_double_prime),
            lambda_root_set: self.classification.lambda_root_set.clone(),
        }
    }
}

/// JSON form of a [`SunflowerReport`]; polynomials are coefficient lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SunflowerJson {
    pub q: u32,
    #[serde(rename = "D")]
    pub d: usize,
    pub n: usize,
    pub petals: Vec<Vec<Elem>>,
    /// Basis rows of the core in reduced row-echelon form.
    pub core: Vec<Vec<Elem>>,
    pub core_codim: usize,
    pub types: Vec<SunflowerType>,
    #[serde(rename = "P")]
    pub p: Option<Vec<Elem>>,
    pub s_prime: Vec<Vec<Elem>>,
    pub s_double_prime: Vec<Vec<Elem>>,
    pub lambda_root_set: Option<Vec<Elem>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SunflowerOptions {
    pub threads: usize,
    pub node_cap: u64,
}

impl Default for SunflowerOptions {
    fn default() -> Self {
        SunflowerOptions {
            threads: 1,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

/// Largest sunflower size allowed by the structure of codimension-4 cores.
pub fn size_bound(q: u32) -> u64 {
    let q = q as u64;
    1 + (q * q + q) / 2
}

fn check_degree(f: &Poly, d: usize) -> Result<()> {
    let deg = f.degree().ok_or(Error::ZeroPolynomial)?;
    if deg > d {
        return Err(Error::InvalidInput(format!("{f} has degree above D = {d}")));
    }
    Ok(())
}

/// `<f, Tf, g, Tg>` in `F_q^{D+2}`.
fn pair_span(f: &Poly, g: &Poly, d: usize) -> Subspace {
    let ambient = d + LEVEL;
    let rows = vec![
        f.padded(ambient),
        f.shift(1).padded(ambient),
        g.padded(ambient),
        g.shift(1).padded(ambient),
    ];
    Subspace::span(f.field(), ambient, rows).expect("degrees checked")
}

/// `ker(f) ∩ ker(g) = <f, Tf, g, Tg>^perp` inside `F_q^{D+2}`.
pub fn pair_core(f: &Poly, g: &Poly, d: usize) -> Result<Subspace> {
    check_degree(f, d)?;
    check_degree(g, d)?;
    let (f, g) = (f.make_monic()?, g.make_monic()?);
    if !f.field().same_field(g.field()) {
        return Err(Error::MixedFields);
    }
    if f == g {
        return Err(Error::InvalidInput(format!(
            "pair core needs two distinct speeds, got {f} twice"
        )));
    }
    Ok(pair_span(&f, &g, d).perp())
}

/// Returns the common core when every pair of petals has the same core.
pub fn is_sunflower(petals: &[Poly], d: usize) -> Result<Option<Subspace>> {
    let petals = normalize_speeds(petals)?;
    if petals.len() < 2 {
        return Err(Error::InvalidInput(
            "a sunflower needs at least two distinct petals".into(),
        ));
    }
    let core = pair_core(&petals[0], &petals[1], d)?;
    for i in 0..petals.len() {
        for j in i + 1..petals.len() {
            if (i, j) != (0, 1) && pair_core(&petals[i], &petals[j], d)? != core {
                return Ok(None);
            }
        }
    }
    Ok(Some(core))
}

fn poly_gcd_all(petals: &[Poly]) -> Result<Poly> {
    let mut g = petals[0].clone();
    for f in &petals[1..] {
        g = g.gcd(f)?;
    }
    g.make_monic()
}

/// TYPE I / TYPE II flags of a sunflower given by its petals.
pub fn classify(petals: &[Poly]) -> Result<Classification> {
    let petals = normalize_speeds(petals)?;
    if petals.len() < 2 {
        return Err(Error::InvalidInput(
            "classification needs at least two petals".into(),
        ));
    }
    let field = petals[0].field().clone();
    let mut types = Vec::new();

    let p = poly_gcd_all(&petals)?;
    let mut quotients = Vec::with_capacity(petals.len());
    for f in &petals {
        let (quo, rem) = f.div_rem(&p)?;
        debug_assert!(rem.is_zero());
        quotients.push(quo);
    }
    let small = quotients
        .iter()
        .all(|qf| qf.is_monic() && qf.degree().is_some_and(|d| d <= 2));
    let mut coprime = small;
    'outer: for i in 0..quotients.len() {
        for j in i + 1..quotients.len() {
            if !coprime {
                break 'outer;
            }
            coprime = quotients[i].gcd(&quotients[j])?.degree() == Some(0);
        }
    }
    let type_one = small && coprime;
    if type_one {
        types.push(SunflowerType::TypeI);
    }

    let width = petals.iter().filter_map(Poly::degree).max().unwrap_or(0) + 1;
    let base = [petals[0].padded(width), petals[1].padded(width)];
    let in_span = petals[2..].iter().all(|g| {
        let rows = vec![base[0].clone(), base[1].clone(), g.padded(width)];
        rank(&field, &rows, width) == 2
    });
    if in_span {
        types.push(SunflowerType::TypeII);
    }

    if types.is_empty() && petals.len() >= 3 {
        log::error!(
            "sunflower {} is neither TYPE I nor TYPE II",
            petals
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        );
    }

    let lambda_root_set = type_one.then(|| {
        field
            .elements()
            .filter(|&l| quotients.iter().any(|qf| qf.eval(l) == 0))
            .collect()
    });
    Ok(Classification {
        types,
        common_factor: type_one.then_some(p),
        quotients: type_one.then_some(quotients),
        lambda_root_set,
    })
}

/// `core ⊆ ker(f)` at level 2.
fn kernel_contains(f: &Poly, core: &Subspace, d: usize) -> Result<bool> {
    let a = circulant(f, LEVEL, d)?;
    Ok(core.basis().iter().all(|v| a.annihilates(v)))
}

/// Splits `family \ petals` by whether the kernel contains `core`.
pub fn decompose(
    family: &[Poly],
    petals: &[Poly],
    core: &Subspace,
    d: usize,
) -> Result<Decomposition> {
    let family = normalize_speeds(family)?;
    let petals = normalize_speeds(petals)?;
    let mut s_prime = Vec::new();
    let mut s_double_prime = Vec::new();
    let mut unlinked = Vec::new();
    for f in family.iter().filter(|f| !petals.contains(f)) {
        if kernel_contains(f, core, d)? {
            let linked = petals.iter().any(|g| pair_span(f, g, d).dim() == 3);
            if !linked {
                unlinked.push(f.clone());
            }
            s_prime.push(f.clone());
        } else {
            s_double_prime.push(f.clone());
        }
    }
    if !unlinked.is_empty() {
        log::warn!(
            "{} speed(s) contain the core but meet no petal in dimension D-1",
            unlinked.len()
        );
    }
    Ok(Decomposition {
        s_prime,
        s_double_prime,
        unlinked,
    })
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn bit_set(b: &mut [u64], i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bit_clear(b: &mut [u64], i: usize) {
    b[i / 64] &= !(1 << (i % 64));
}

fn bit_test(b: &[u64], i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn first_bit(b: &[u64]) -> Option<usize> {
    b.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn popcount(b: &[u64]) -> usize {
    b.iter().map(|w| w.count_ones() as usize).sum()
}

fn and(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

/// Branch and bound for maximum cliques with a greedy colouring bound.
struct CliqueSearch<'a> {
    adj: &'a [Vec<u64>],
    nodes: u64,
    node_cap: u64,
}

impl CliqueSearch<'_> {
    /// Size of the largest clique inside `cand`, or any value `>= target`
    /// once one that large is found.
    fn largest(&mut self, cand: Vec<u64>, target: usize) -> Result<usize> {
        let mut best = 0;
        self.expand(cand, 0, &mut best, target)?;
        Ok(best)
    }

    fn expand(
        &mut self,
        mut cand: Vec<u64>,
        size: usize,
        best: &mut usize,
        target: usize,
    ) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(Error::CapExceeded {
                what: "sunflower search nodes",
                needed: self.nodes as u128,
                cap: self.node_cap as u128,
            });
        }
        if popcount(&cand) == 0 {
            *best = (*best).max(size);
            return Ok(());
        }
        let (order, colors) = self.colour(&cand);
        for idx in (0..order.len()).rev() {
            if size + colors[idx] <= *best || *best >= target {
                return Ok(());
            }
            let v = order[idx];
            self.expand(and(&cand, &self.adj[v]), size + 1, best, target)?;
            bit_clear(&mut cand, v);
        }
        Ok(())
    }

    /// Vertices sorted by greedy colour class, with their colour numbers.
    fn colour(&self, cand: &[u64]) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = cand.to_vec();
        let mut order = Vec::new();
        let mut colors = Vec::new();
        let mut colour = 0;
        while popcount(&uncoloured) > 0 {
            colour += 1;
            let mut avail = uncoloured.clone();
            while let Some(v) = first_bit(&avail) {
                bit_clear(&mut uncoloured, v);
                bit_clear(&mut avail, v);
                for (a, n) in avail.iter_mut().zip(&self.adj[v]) {
                    *a &= !n;
                }
                order.push(v);
                colors.push(colour);
            }
        }
        (order, colors)
    }
}

/// Lexicographically least maximum clique of the graph restricted to `vertices`.
fn least_max_clique(adj: &[Vec<u64>], vertices: &[usize], node_cap: u64) -> Result<Vec<usize>> {
    let n = adj.len();
    let mut search = CliqueSearch {
        adj,
        nodes: 0,
        node_cap,
    };
    let mut all = vec![0u64; words(n)];
    for &v in vertices {
        bit_set(&mut all, v);
    }
    let omega = search.largest(all.clone(), usize::MAX)?;
    let mut chosen = Vec::new();
    let mut cand = all;
    for &v in vertices {
        if chosen.len() == omega {
            break;
        }
        if !bit_test(&cand, v) {
            continue;
        }
        let next = and(&cand, &adj[v]);
        let need = omega - chosen.len() - 1;
        if need == 0 || search.largest(next.clone(), need)? >= need {
            chosen.push(v);
            cand = next;
        } else {
            bit_clear(&mut cand, v);
        }
    }
    debug_assert_eq!(chosen.len(), omega);
    Ok(chosen)
}

/// A maximum-size codimension-4 sunflower of `family`, or `None` when no pair
/// of speeds has a codimension-4 core. `d` defaults to the largest degree.
pub fn max_sunflower(family: &[Poly], d: Option<usize>) -> Result<Option<SunflowerReport>> {
    max_sunflower_with(family, d, &SunflowerOptions::default())
}

pub fn max_sunflower_with(
    family: &[Poly],
    d: Option<usize>,
    opts: &SunflowerOptions,
) -> Result<Option<SunflowerReport>> {
    if family.is_empty() {
        return Err(Error::InvalidInput("the family is empty".into()));
    }
    let family = normalize_speeds(family)?;
    let max_deg = max_degree(&family)?;
    let d = d.unwrap_or(max_deg);
    if d < max_deg {
        return Err(Error::InvalidInput(format!(
            "D = {d} is smaller than the largest degree {max_deg}"
        )));
    }
    let n = family.len();

    // group the codimension-4 pairs by their common span (equivalently, by core)
    let mut group_of: HashMap<Subspace, usize> = HashMap::new();
    let mut groups: Vec<(Subspace, Vec<(usize, usize)>)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let span = pair_span(&family[i], &family[j], d);
            if span.dim() != CORE_CODIM {
                continue;
            }
            let g = *group_of.entry(span.clone()).or_insert_with(|| {
                groups.push((span, Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push((i, j));
        }
    }
    if groups.is_empty() {
        return Ok(None);
    }

    let solve = |pairs: &Vec<(usize, usize)>| -> Result<Vec<usize>> {
        let mut adj = vec![vec![0u64; words(n)]; n];
        let mut present = vec![false; n];
        for &(i, j) in pairs {
            bit_set(&mut adj[i], j);
            bit_set(&mut adj[j], i);
            present[i] = true;
            present[j] = true;
        }
        let vertices: Vec<usize> = (0..n).filter(|&v| present[v]).collect();
        least_max_clique(&adj, &vertices, opts.node_cap)
    };
    let cliques: Vec<Vec<usize>> = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| {
            groups
                .par_iter()
                .map(|(_, p)| solve(p))
                .collect::<Result<_>>()
        })?
    } else {
        groups
            .iter()
            .map(|(_, p)| solve(p))
            .collect::<Result<_>>()?
    };

    let (best_group, best) = cliques
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| b.len().cmp(&a.len()).then_with(|| a.cmp(b)))
        .expect("at least one group");
    let best = best.clone();
    let core = groups[best_group].0.perp();
    let petals: Vec<Poly> = best.iter().map(|&i| family[i].clone()).collect();

    let q = family[0].field().q();
    if petals.len() as u64 > size_bound(q) {
        log::error!(
            "found a codimension-4 sunflower of size {} over F_{q}, above {}",
            petals.len(),
            size_bound(q)
        );
    }
    let classification = classify(&petals)?;
    let decomposition = decompose(&family, &petals, &core, d)?;
    Ok(Some(SunflowerReport {
        d,
        petals,
        petal_indices: best,
        core,
        classification,
        decomposition,
    }))
}

/// `{P} ∪ {P Q : Q monic irreducible quadratic} ∪ {P (T - lambda)^2}`, a
/// sunflower of size `1 + (q^2 + q) / 2` at `D = deg P + 2`.
pub fn construction(field: &FieldCtx, p: &Poly) -> Result<Vec<Poly>> {
    let p = p.make_monic()?;
    let mut out = vec![p.clone()];
    for qf in enumerate_monic(field, MonicSet::Irreducible(2))? {
        out.push(p.mul(&qf)?);
    }
    for lambda in field.elements() {
        let lin = Poly::linear_root(field, lambda);
        out.push(p.mul(&lin.mul(&lin)?)?);
    }
    Ok(out)
}

/// Which upper bound [`contribution_bound_check`] compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    /// `|ker f \ ∪_S ker s| <= max{q^D - q^{D-1}, q^D - n q^{D-2} + (n-1) q^{D-3}}`
    /// for `S` an inclusion-maximal sunflower and `f` outside it.
    AgainstSunflower,
    /// Contribution of the runner at position `m` relative to all earlier
    /// runners, with the sunflower listed first:
    /// `q^D - t q^{D-2} + [C(t,2) - C(n-1,2)] q^{D-3}`, where `t` is the
    /// guaranteed number of distinct pairwise intersections (capped at `q`;
    /// `t = q` is the final-stage bound).
    Staged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionCheck {
    pub actual: u64,
    pub bound: i64,
    pub ok: bool,
    /// Distinct-intersection count used by the staged bound; `None` past
    /// the change point, where the bound is `q^D - q^{D-1}`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<u64>,
}

fn meets_in_codim4(f: &Poly, g: &Poly, d: usize) -> Result<bool> {
    Ok(pair_core(f, g, d)?.dim() + 2 == d)
}

/// Runner order for the staged bounds: the petals first, then, greedily in
/// the given order, every runner whose kernel meets all earlier kernels in
/// codimension 4, then the remaining runners in the given order. Returns the
/// order and the position of the first remaining runner (the change point).
pub fn change_point_order(
    family: &[Poly],
    sunflower: &SunflowerReport,
) -> Result<(Vec<Poly>, usize)> {
    let d = sunflower.d;
    let family = normalize_speeds(family)?;
    let mut order = sunflower.petals.clone();
    let mut rest: Vec<Poly> = family
        .into_iter()
        .filter(|g| !sunflower.petals.contains(g))
        .collect();
    'grow: loop {
        for (i, g) in rest.iter().enumerate() {
            let mut fits = true;
            for h in &order {
                if !meets_in_codim4(g, h, d)? {
                    fits = false;
                    break;
                }
            }
            if fits {
                let g = rest.remove(i);
                order.push(g);
                continue 'grow;
            }
        }
        break;
    }
    let change = order.len();
    order.extend(rest);
    Ok((order, change))
}

fn choose2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// Contribution bound against a sunflower of size `n`.
pub fn sunflower_contribution_bound(q: u32, d: usize, n: usize) -> i64 {
    let q = q as i64;
    let (n, d) = (n as i64, d as u32);
    let a = q.pow(d) - q.pow(d - 1);
    let b = q.pow(d) - n * q.pow(d - 2) + (n - 1) * q.pow(d - 3);
    a.max(b)
}

/// Staged bound with `t` distinct intersections and sunflower size `n`.
pub fn staged_bound(q: u32, d: usize, n: usize, t: u64) -> i64 {
    let q = q as i64;
    let (n, t, d) = (n as i64, t as i64, d as u32);
    q.pow(d) - t * q.pow(d - 2) + (choose2(t) - choose2(n - 1)) * q.pow(d - 3)
}

/// Final-stage bound `q^D - (q^{D-1} + q^{D-2}) / 2 - C(n-1,2) q^{D-3}`,
/// rounded down.
pub fn final_stage_bound(q: u32, d: usize, n: usize) -> i64 {
    let q = q as i64;
    let d = d as u32;
    q.pow(d) - (q.pow(d - 1) + q.pow(d - 2)) / 2 - choose2(n as i64 - 1) * q.pow(d - 3)
}

/// `t` for the runner at 1-based position `m`: the largest `t` with
/// `m - 1 > (t - 1)(n - 1)`, clamped to `[n, q]` (never below `n`).
pub fn distinct_intersections(q: u32, n: usize, m: usize) -> u64 {
    let (n, m) = (n as u64, m as u64);
    let t_max = if n <= 1 {
        u64::MAX
    } else {
        (m.saturating_sub(2)) / (n - 1) + 1
    };
    t_max.min(q as u64).max(n)
}

fn union_bitmap(polys: &[&Poly], d: usize) -> Result<BitSet> {
    let field = polys[0].field();
    let len = bitmap_len(field, d + LEVEL, DEFAULT_BITMAP_CAP)?;
    let mut bits = BitSet::new(len);
    for f in polys {
        for idx in kernel(f, LEVEL, d)?.point_indices() {
            bits.insert(idx as usize);
        }
    }
    Ok(bits)
}

fn fresh_points(f: &Poly, covered: &BitSet, d: usize) -> Result<u64> {
    Ok(kernel(f, LEVEL, d)?
        .point_indices()
        .filter(|&idx| !covered.contains(idx as usize))
        .count() as u64)
}

/// Compares the contribution of `f` with the bound selected by `mode`.
///
/// `family` is the full family in runner order. In [`BoundMode::Staged`] the
/// sunflower's petals must be its first `n` members and the contribution is
/// measured against every earlier runner; the sunflower must be of maximum
/// size in `family` and of size at most `q`, and the order must keep all
/// earlier pairs in codimension 4 until a runner meets an earlier kernel in
/// dimension `D - 1` (see [`change_point_order`]). In [`BoundMode::AgainstSunflower`] only inclusion-maximality
/// is required and the contribution is measured against the petals alone.
pub fn contribution_bound_check(
    family: &[Poly],
    sunflower: &SunflowerReport,
    f: &Poly,
    mode: BoundMode,
) -> Result<ContributionCheck> {
    let d = sunflower.d;
    if d < 3 {
        return Err(Error::InvalidInput(format!(
            "contribution bounds need D >= 3, got D = {d}"
        )));
    }
    let family = normalize_speeds(family)?;
    let f = f.make_monic()?;
    check_degree(&f, d)?;
    if sunflower.petals.contains(&f) {
        return Err(Error::InvalidInput(format!(
            "{f} is a petal of the sunflower"
        )));
    }
    let Some(pos) = family.iter().position(|g| *g == f) else {
        return Err(Error::InvalidInput(format!("{f} is not in the family")));
    };
    let q = sunflower.field().q();
    let n = sunflower.n();

    for g in family.iter().filter(|g| !sunflower.petals.contains(g)) {
        let mut extends = true;
        for s in &sunflower.petals {
            if pair_core(g, s, d)? != sunflower.core {
                extends = false;
                break;
            }
        }
        if extends {
            return Err(Error::NotMaximal(format!("{g} can be added as a petal")));
        }
    }

    match mode {
        BoundMode::AgainstSunflower => {
            let petals: Vec<&Poly> = sunflower.petals.iter().collect();
            let covered = union_bitmap(&petals, d)?;
            let actual = fresh_points(&f, &covered, d)?;
            let bound = sunflower_contribution_bound(q, d, n);
            Ok(ContributionCheck {
                actual,
                bound,
                ok: (actual as i64) <= bound,
                t: None,
            })
        }
        BoundMode::Staged => {
            if n as u64 > q as u64 {
                return Err(Error::InvalidInput(format!(
                    "staged bounds need every sunflower to have at most q = {q} petals, got {n}"
                )));
            }
            let mut head: Vec<&Poly> = family[..n.min(family.len())].iter().collect();
            head.sort_by_key(|g| g.index());
            let mut petals: Vec<&Poly> = sunflower.petals.iter().collect();
            petals.sort_by_key(|g| g.index());
            if head != petals {
                return Err(Error::InvalidInput(
                    "the sunflower must occupy the first positions of the runner order".into(),
                ));
            }
            let maximum = max_sunflower(&family, Some(d))?.map_or(0, |r| r.n());
            if maximum > n {
                return Err(Error::NotMaximal(format!(
                    "the family has a sunflower of size {maximum} > {n}"
                )));
            }
            let earlier: Vec<&Poly> = family[..pos].iter().collect();
            let covered = union_bitmap(&earlier, d)?;
            let actual = fresh_points(&f, &covered, d)?;
            let mut past_change = false;
            for g in &earlier {
                if !meets_in_codim4(&f, g, d)? {
                    past_change = true;
                    break;
                }
            }
            let (bound, t) = if past_change {
                let (qd, qd1) = ((q as i64).pow(d as u32), (q as i64).pow(d as u32 - 1));
                (qd - qd1, None)
            } else {
                for i in n..pos {
                    for j in 0..i {
                        if !meets_in_codim4(&family[i], &family[j], d)? {
                            return Err(Error::InvalidInput(format!(
                                "runners {} and {} meet in codimension 3 before position {}; \
                                 use a change-point order",
                                family[j],
                                family[i],
                                pos + 1
                            )));
                        }
                    }
                }
                let t = distinct_intersections(q, n, pos + 1);
                (staged_bound(q, d, n, t), Some(t))
            };
            Ok(ContributionCheck {
                actual,
                bound,
                ok: (actual as i64) <= bound,
                t,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::index_to_vector;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u32) -> FieldCtx {
        FieldCtx::of_size(q).unwrap()
    }

    fn p(field: &FieldCtx, c: &[Elem]) -> Poly {
        Poly::new(field, c.to_vec()).unwrap()
    }

    fn all_up_to(q: u32, d: usize) -> Vec<Poly> {
        enumerate_monic(&gf(q), MonicSet::UpToDegree(d)).unwrap()
    }

    /// Largest codimension-4 sunflower by trying every subset, least index set first.
    fn brute_force(family: &[Poly], d: usize) -> Option<Vec<usize>> {
        let n = family.len();
        let mut best: Option<Vec<usize>> = None;
        for mask in 1u32..(1 << n) {
            if mask.count_ones() < 2 {
                continue;
            }
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let petals: Vec<Poly> = idx.iter().map(|&i| family[i].clone()).collect();
            let Some(core) = is_sunflower(&petals, d).unwrap() else {
                continue;
            };
            if core.codim() != CORE_CODIM {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => idx.len() > b.len() || (idx.len() == b.len() && idx < *b),
            };
            if better {
                best = Some(idx);
            }
        }
        best
    }

    #[test]
    fn pair_core_examples() {
        let f2 = gf(2);
        let c = pair_core(&p(&f2, &[1]), &p(&f2, &[0, 0, 1]), 2).unwrap();
        assert_eq!((c.dim(), c.codim()), (0, 4));
        let c = pair_core(&p(&f2, &[1]), &p(&f2, &[0, 1]), 2).unwrap();
        assert_eq!(c.codim(), 3);
        let c = pair_core(&p(&f2, &[0, 0, 1]), &p(&f2, &[1, 0, 1]), 2).unwrap();
        assert_eq!(c.codim(), 4);
    }

    #[test]
    fn pair_core_is_the_kernel_intersection() {
        for q in [2u32, 3] {
            let fam = all_up_to(q, 2);
            for f in &fam {
                for g in &fam {
                    if f == g {
                        continue;
                    }
                    let c = pair_core(f, g, 3).unwrap();
                    let kf = kernel(f, 2, 3).unwrap();
                    let kg = kernel(g, 2, 3).unwrap();
                    for idx in 0..(q as u128).pow(5) {
                        let x = index_to_vector(q, idx, 5);
                        assert_eq!(c.contains(&x), kf.contains(&x) && kg.contains(&x));
                    }
                }
            }
        }
    }

    #[test]
    fn pair_core_errors() {
        let f3 = gf(3);
        let f = p(&f3, &[1, 1]);
        assert!(matches!(
            pair_core(&f, &f.scale(2), 2),
            Err(Error::InvalidInput(_))
        ));
        assert_eq!(
            pair_core(&f, &Poly::zero(&f3), 2),
            Err(Error::ZeroPolynomial)
        );
        assert!(pair_core(&f, &p(&f3, &[0, 0, 0, 1]), 2).is_err());
    }

    #[test]
    fn is_sunflower_examples() {
        let f2 = gf(2);
        let s = [
            p(&f2, &[1]),
            p(&f2, &[0, 0, 1]),
            p(&f2, &[1, 0, 1]),
            p(&f2, &[1, 1, 1]),
        ];
        assert_eq!(is_sunflower(&s, 2).unwrap().unwrap().codim(), 4);
        let s = [p(&f2, &[1]), p(&f2, &[0, 1])];
        assert_eq!(is_sunflower(&s, 2).unwrap().unwrap().codim(), 3);
        let s = [p(&f2, &[1]), p(&f2, &[0, 1]), p(&f2, &[0, 0, 1])];
        assert_eq!(is_sunflower(&s, 2).unwrap(), None);
        assert!(is_sunflower(&s[..1], 2).is_err());
    }

    #[test]
    fn core_equality_is_not_transitive() {
        let f2 = gf(2);
        let (a, b, c) = (p(&f2, &[1, 0, 1]), p(&f2, &[0, 1]), p(&f2, &[0, 0, 1]));
        let ab = pair_core(&a, &b, 2).unwrap();
        let ac = pair_core(&a, &c, 2).unwrap();
        let bc = pair_core(&b, &c, 2).unwrap();
        assert_eq!(ab, ac);
        assert_eq!(ab.codim(), 4);
        assert_eq!(bc.codim(), 3);
        let r = max_sunflower(&[a, b, c], None).unwrap().unwrap();
        assert_eq!(r.n(), 2);
    }

    #[test]
    fn max_sunflower_examples() {
        let f2 = gf(2);
        let r = max_sunflower(&all_up_to(2, 2), None).unwrap().unwrap();
        assert_eq!(r.n(), 4);
        assert_eq!(r.core.codim(), 4);
        assert!(is_sunflower(&r.petals, 2).unwrap().is_some());

        assert!(max_sunflower(&[p(&f2, &[1]), p(&f2, &[0, 1])], None)
            .unwrap()
            .is_none());

        let fam = [
            p(&f2, &[0, 1]),
            p(&f2, &[0, 0, 0, 1]),
            p(&f2, &[0, 1, 0, 1]),
        ];
        let r = max_sunflower(&fam, None).unwrap().unwrap();
        assert_eq!(r.n(), 3);
        assert_eq!((r.core.ambient(), r.core.codim()), (5, 4));
    }

    #[test]
    fn max_sunflower_matches_brute_force() {
        for q in [2u32, 3] {
            let fam = all_up_to(q, 2);
            let r = max_sunflower(&fam, None).unwrap().unwrap();
            assert_eq!(Some(r.petal_indices.clone()), brute_force(&fam, 2));
            assert_eq!(r.n() as u64, size_bound(q));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..60 {
            let q = [2u32, 3][rng.gen_range(0..2)];
            let d = rng.gen_range(2..4);
            let pool = all_up_to(q, d);
            let size = rng.gen_range(2..11);
            let fam: Vec<Poly> = pool.choose_multiple(&mut rng, size).cloned().collect();
            let found = max_sunflower(&fam, Some(d))
                .unwrap()
                .map(|r| r.petal_indices);
            assert_eq!(found, brute_force(&fam, d));
        }
    }

    #[test]
    fn parallel_search_matches_sequential() {
        let fam = all_up_to(3, 2);
        let seq = max_sunflower(&fam, Some(3)).unwrap();
        let par = max_sunflower_with(
            &fam,
            Some(3),
            &SunflowerOptions {
                threads: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn node_cap_is_reported() {
        let fam = all_up_to(3, 2);
        let opts = SunflowerOptions {
            threads: 1,
            node_cap: 2,
        };
        assert!(matches!(
            max_sunflower_with(&fam, None, &opts),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let f2 = gf(2);
        let s = [
            p(&f2, &[1]),
            p(&f2, &[0, 0, 1]),
            p(&f2, &[1, 0, 1]),
            p(&f2, &[1, 1, 1]),
        ];
        let c = classify(&s).unwrap();
        assert!(c.types.contains(&SunflowerType::TypeI));
        assert_eq!(c.common_factor, Some(Poly::one(&f2)));
        assert_eq!(c.lambda_root_set, Some(vec![0, 1]));

        let s = [
            p(&f2, &[0, 1]),
            p(&f2, &[0, 0, 0, 1]),
            p(&f2, &[0, 1, 0, 1]),
        ];
        let c = classify(&s).unwrap();
        assert_eq!(c.types, vec![SunflowerType::TypeI, SunflowerType::TypeII]);
        assert_eq!(c.common_factor, Some(p(&f2, &[0, 1])));
        assert_eq!(
            c.quotients.unwrap(),
            vec![p(&f2, &[1]), p(&f2, &[0, 0, 1]), p(&f2, &[1, 0, 1])]
        );

        let s = [p(&f2, &[1, 1, 0, 1]), p(&f2, &[1, 0, 1, 1])];
        assert!(classify(&s).unwrap().types.contains(&SunflowerType::TypeII));
    }

    #[test]
    fn every_found_sunflower_has_a_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..80 {
            let q = [2u32, 3, 4][rng.gen_range(0..3)];
            let d = rng.gen_range(2..4);
            let pool = all_up_to(q, d);
            let size = rng.gen_range(3..14).min(pool.len());
            let fam: Vec<Poly> = pool.choose_multiple(&mut rng, size).cloned().collect();
            if let Some(r) = max_sunflower(&fam, None).unwrap() {
                assert!(r.n() as u64 <= size_bound(q));
                if r.n() >= 3 {
                    assert!(!r.classification.types.is_empty(), "{:?}", r.petals);
                }
            }
        }
    }

    #[test]
    fn construction_meets_the_size_bound() {
        for q in [2u32, 3, 4, 5] {
            let field = gf(q);
            let s = construction(&field, &Poly::one(&field)).unwrap();
            assert_eq!(s.len() as u64, size_bound(q));
            let core = is_sunflower(&s, 2).unwrap().unwrap();
            assert_eq!(core.codim(), 4);
        }
        let f3 = gf(3);
        let s = construction(&f3, &p(&f3, &[1, 1])).unwrap();
        let c = classify(&s).unwrap();
        assert_eq!(c.common_factor, Some(p(&f3, &[1, 1])));
        assert_eq!(is_sunflower(&s, 3).unwrap().unwrap().codim(), 4);
    }

    #[test]
    fn decompose_examples() {
        let f2 = gf(2);
        let fam = all_up_to(2, 2);
        let s = [
            p(&f2, &[1]),
            p(&f2, &[0, 0, 1]),
            p(&f2, &[1, 0, 1]),
            p(&f2, &[1, 1, 1]),
        ];
        let core = is_sunflower(&s, 2).unwrap().unwrap();
        let dec = decompose(&fam, &s, &core, 2).unwrap();
        assert_eq!(
            dec.s_prime,
            vec![p(&f2, &[0, 1]), p(&f2, &[1, 1]), p(&f2, &[0, 1, 1])]
        );
        assert!(dec.s_double_prime.is_empty());
        assert!(dec.unlinked.is_empty());

        let dec = decompose(&s, &s, &core, 2).unwrap();
        assert!(dec.s_prime.is_empty() && dec.s_double_prime.is_empty());
    }

    #[test]
    fn reducible_quadratic_multiples_land_in_s_prime() {
        let f3 = gf(3);
        let s = construction(&f3, &Poly::one(&f3)).unwrap();
        let core = is_sunflower(&s, 2).unwrap().unwrap();
        let mut extra = Vec::new();
        for a in 0..3 {
            for b in a + 1..3 {
                let f = Poly::linear_root(&f3, a)
                    .mul(&Poly::linear_root(&f3, b))
                    .unwrap();
                extra.push(f);
            }
        }
        let mut fam = s.clone();
        fam.extend(extra.iter().cloned());
        let dec = decompose(&fam, &s, &core, 2).unwrap();
        assert_eq!(dec.s_prime, extra);
        assert!(dec.unlinked.is_empty());
    }

    #[test]
    fn bounds_formulas() {
        assert_eq!(sunflower_contribution_bound(3, 3, 4), 18);
        assert_eq!(sunflower_contribution_bound(2, 3, 4), 4);
        assert_eq!(sunflower_contribution_bound(3, 3, 2), 22);
        // t = q reproduces the final-stage expression
        for q in [2u32, 4, 8] {
            for n in 2..=q as usize {
                assert_eq!(
                    staged_bound(q, 4, n, q as u64),
                    final_stage_bound(q, 4, n),
                    "q={q} n={n}"
                );
            }
        }
        assert_eq!(staged_bound(3, 3, 2, 2), 22);
        assert_eq!(distinct_intersections(5, 3, 4), 3);
        assert_eq!(distinct_intersections(5, 3, 8), 4);
        assert_eq!(distinct_intersections(5, 3, 100), 5);
    }

    #[test]
    fn s_prime_members_cover_at_most_q_d_minus_q_d_minus_one() {
        let fam = all_up_to(2, 3);
        let r = max_sunflower(&fam, None).unwrap().unwrap();
        assert!(!r.decomposition.s_prime.is_empty());
        for f in &r.decomposition.s_prime {
            let c = contribution_bound_check(&fam, &r, f, BoundMode::AgainstSunflower).unwrap();
            assert!(c.actual <= 8 - 4, "{f}: {c:?}");
            assert!(c.ok);
        }
    }

    #[test]
    fn contribution_on_a_constructed_instance() {
        let f3 = gf(3);
        let s: Vec<Poly> = construction(&f3, &Poly::one(&f3)).unwrap()[..4].to_vec();
        let mut fam = s.clone();
        fam.push(p(&f3, &[2, 0, 1, 1]));
        fam.push(p(&f3, &[1, 2, 0, 1]));
        let r = max_sunflower(&fam, Some(3)).unwrap().unwrap();
        for f in fam.iter().filter(|f| !r.petals.contains(f)) {
            let c = contribution_bound_check(&fam, &r, f, BoundMode::AgainstSunflower).unwrap();
            assert!(c.ok, "{f}: {c:?}");
            assert!(c.actual <= 27);
        }
    }

    #[test]
    fn contribution_bounds_hold_on_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..40 {
            let q = [2u32, 3][rng.gen_range(0..2)];
            let d = 3;
            let pool = all_up_to(q, d);
            let size = rng.gen_range(4..10);
            let fam: Vec<Poly> = pool.choose_multiple(&mut rng, size).cloned().collect();
            let Some(r) = max_sunflower(&fam, Some(d)).unwrap() else {
                continue;
            };
            let (ordered, _) = change_point_order(&fam, &r).unwrap();
            for f in &ordered[r.n()..] {
                let c =
                    contribution_bound_check(&ordered, &r, f, BoundMode::AgainstSunflower).unwrap();
                assert!(c.ok, "{f}: {c:?}");
                let staged = contribution_bound_check(&ordered, &r, f, BoundMode::Staged);
                if r.n() > q as usize {
                    assert!(matches!(staged, Err(Error::InvalidInput(_))));
                } else {
                    let c = staged.unwrap();
                    assert!(c.ok, "staged {f}: {c:?}");
                }
            }
        }
    }

    #[test]
    fn staged_bound_needs_a_change_point_order() {
        let f3 = gf(3);
        let fam = vec![
            p(&f3, &[0, 1, 1, 1]),
            p(&f3, &[0, 1]),
            p(&f3, &[1, 1, 1]),
            p(&f3, &[1, 0, 1, 1]),
        ];
        let r = max_sunflower(&fam, Some(3)).unwrap().unwrap();
        assert_eq!(r.petals, fam[..2].to_vec());
        // T^2+T+1 meets T^3+T^2+T in dimension D-1, and T^3+T^2+1 then
        // repeats an intersection line without forming a larger sunflower
        assert!(!meets_in_codim4(&fam[2], &fam[0], 3).unwrap());
        assert!(matches!(
            contribution_bound_check(&fam, &r, &fam[3], BoundMode::Staged),
            Err(Error::InvalidInput(_))
        ));
        let (order, change) = change_point_order(&fam, &r).unwrap();
        assert_eq!(order[..2], fam[..2]);
        for (i, f) in order.iter().enumerate().skip(2) {
            let c = contribution_bound_check(&order, &r, f, BoundMode::Staged).unwrap();
            assert!(c.ok, "{f}: {c:?}");
            assert_eq!(c.t.is_some(), i < change);
        }
    }

    #[test]
    fn contribution_errors() {
        let f2 = gf(2);
        let fam = all_up_to(2, 2);
        let r = max_sunflower(&fam, None).unwrap().unwrap();
        assert!(
            contribution_bound_check(&fam, &r, &p(&f2, &[0, 1]), BoundMode::AgainstSunflower)
                .is_err()
        );

        let fam = all_up_to(2, 3);
        let r = max_sunflower(&fam, None).unwrap().unwrap();
        let petal = r.petals[0].clone();
        assert!(contribution_bound_check(&fam, &r, &petal, BoundMode::AgainstSunflower).is_err());

        let mut small = r.clone();
        small.petals.pop();
        small.petal_indices.pop();
        let outside = fam.iter().find(|f| !r.petals.contains(f)).unwrap();
        assert!(matches!(
            contribution_bound_check(&fam, &small, outside, BoundMode::AgainstSunflower),
            Err(Error::NotMaximal(_))
        ));
    }

    #[test]
    fn report_json_round_trip() {
        let r = max_sunflower(&all_up_to(2, 2), None).unwrap().unwrap();
        let json = serde_json::to_string(&r.to_json()).unwrap();
        let back: SunflowerJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r.to_json());
        assert!(json.contains("\"TYPE_I\""));
    }
}
