//! The covering reformulation of loneliness.
//!
//! For a speed `f` of degree at most `D` and a level `k`, the partial
//! circulant matrix `A_f` has rows `f, Tf, ..., T^{k-1} f` written as vectors
//! of length `D + k`. A tail `alpha` of length `D + k` (vector `x`) satisfies
//! `|alpha f| >= q^{-k}` exactly when `A_f x != 0`. So a family has
//! loneliness at least `q^{-k}` iff the kernels `ker(A_f)` fail to cover
//! `F_q^{D+k}`, which is what [`covers`] decides with a bit array indexed by
//! `index(x) = sum encode(x_{-i}) q^{i-1}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};
use crate::laurent::{LaurentTail, Loneliness};
use crate::linalg::{index_to_vector, Subspace};
use crate::poly::{max_degree, normalize_speeds, Poly};

/// Default bitmap cap: 2^32 bits.
pub const DEFAULT_BITMAP_CAP: u128 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculantMatrix {
    field: FieldCtx,
    k: usize,
    ambient: usize,
    rows: Vec<Vec<Elem>>,
}

impl CirculantMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of columns, `D + k`.
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    pub fn row_space(&self) -> Subspace {
        Subspace::span(&self.field, self.ambient, self.rows.clone()).expect("row lengths match")
    }

    /// `A x = 0`
    pub fn annihilates(&self, x: &[Elem]) -> bool {
        self.rows
            .iter()
            .all(|r| crate::linalg::dot(&self.field, r, x) == 0)
    }
}

/// The `k x (D + k)` matrix with rows `T^j f`, `0 <= j < k`.
pub fn circulant(f: &Poly, k: usize, d: usize) -> Result<CirculantMatrix> {
    let deg = f.degree().ok_or(Error::ZeroPolynomial)?;
    if d < deg {
        return Err(Error::InvalidInput(format!(
            "D = {d} is smaller than the degree {deg} of {f}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let ambient = d + k;
    let rows = (0..k).map(|j| f.shift(j).padded(ambient)).collect();
    Ok(CirculantMatrix {
        field: f.field().clone(),
        k,
        ambient,
        rows,
    })
}

/// Canonical basis of `ker(A)`; always of dimension `D`.
pub fn kernel_basis(a: &CirculantMatrix) -> Subspace {
    a.row_space().perp()
}

/// `ker(f)` at level `k` inside `F_q^{D+k}`.
pub fn kernel(f: &Poly, k: usize, d: usize) -> Result<Subspace> {
    Ok(kernel_basis(&circulant(f, k, d)?))
}

pub fn perp(v: &Subspace) -> Subspace {
    v.perp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageOptions {
    pub bitmap_cap: u128,
    /// 1 marks sequentially; more builds kernels concurrently and merges them in input order.
    pub threads: usize,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        CoverageOptions {
            bitmap_cap: DEFAULT_BITMAP_CAP,
            threads: 1,
        }
    }
}

/// Outcome of marking every kernel. Serializes as the `covers` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub q: u32,
    pub k: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub covers_all: bool,
    /// Least-index uncovered vector `(x_{-1}, ..., x_{-(D+k)})`, if any.
    #[serde(rename = "witness")]
    pub uncovered_witness: Option<Vec<Elem>>,
    pub covered_count: u64,
    /// Newly covered points per (normalized) speed, in input order.
    pub per_polynomial_new: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u32>>,
}

fn check_family(speeds: &[Poly]) -> Result<Vec<Poly>> {
    if speeds.is_empty() {
        return Err(Error::InvalidInput("the set of speeds is empty".into()));
    }
    normalize_speeds(speeds)
}

pub(crate) fn bitmap_len(field: &FieldCtx, ambient: usize, cap: u128) -> Result<usize> {
    let q = field.q() as u128;
    match q.checked_pow(ambient as u32) {
        Some(n) if n <= cap && n <= usize::MAX as u128 => Ok(n as usize),
        other => Err(Error::CapExceeded {
            what: "coverage bitmap",
            needed: other.unwrap_or(u128::MAX),
            cap,
        }),
    }
}

/// Bit array of the points of `ker(f)` in `F_q^{D+k}`.
pub fn kernel_bitset(f: &Poly, k: usize, d: usize) -> Result<BitSet> {
    let len = bitmap_len(f.field(), d + k, DEFAULT_BITMAP_CAP)?;
    let mut bits = BitSet::new(len);
    for idx in kernel(f, k, d)?.point_indices() {
        bits.insert(idx as usize);
    }
    Ok(bits)
}

/// Decides whether the level-`k` kernels of `speeds` cover `F_q^{D+k}`.
/// `d` defaults to the largest degree present.
pub fn covers(speeds: &[Poly], k: usize, d: Option<usize>) -> Result<CoverageResult> {
    covers_with(speeds, k, d, &CoverageOptions::default())
}

pub fn covers_with(
    speeds: &[Poly],
    k: usize,
    d: Option<usize>,
    opts: &CoverageOptions,
) -> Result<CoverageResult> {
    let speeds = check_family(speeds)?;
    let field = speeds[0].field().clone();
    let max_deg = max_degree(&speeds)?;
    let d = d.unwrap_or(max_deg);
    if d < max_deg {
        return Err(Error::InvalidInput(format!(
            "D = {d} is smaller than the largest degree {max_deg}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let len = bitmap_len(&field, d + k, opts.bitmap_cap)?;
    let kernels = speeds
        .iter()
        .map(|f| kernel(f, k, d))
        .collect::<Result<Vec<_>>>()?;

    let mut covered = BitSet::new(len);
    let mut per_polynomial_new = Vec::with_capacity(kernels.len());
    if opts.threads > 1 {
        let build = || -> Vec<BitSet> {
            kernels
                .par_iter()
                .map(|ker| {
                    let mut bits = BitSet::new(len);
                    for idx in ker.point_indices() {
                        bits.insert(idx as usize);
                    }
                    bits
                })
                .collect()
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        for bits in pool.install(build) {
            per_polynomial_new.push(covered.count_new(&bits) as u64);
            covered.union_with(&bits);
        }
    } else {
        for ker in &kernels {
            let fresh = ker
                .point_indices()
                .filter(|&idx| covered.insert(idx as usize))
                .count();
            per_polynomial_new.push(fresh as u64);
        }
    }

    let covered_count = covered.count() as u64;
    let witness = covered
        .first_unset()
        .map(|idx| index_to_vector(field.q(), idx as u128, d + k));
    Ok(CoverageResult {
        q: field.q(),
        k,
        d,
        covers_all: witness.is_none(),
        uncovered_witness: witness,
        covered_count,
        per_polynomial_new,
        modulus: field.modulus().map(<[u32]>::to_vec),
    })
}

/// Loneliness exponent via coverage: the least `k` at which the kernels leave
/// a point uncovered, with that point read back as a tail.
pub fn loneliness(speeds: &[Poly]) -> Result<Loneliness> {
    loneliness_with(speeds, None, &CoverageOptions::default())
}

pub fn loneliness_with(
    speeds: &[Poly],
    d: Option<usize>,
    opts: &CoverageOptions,
) -> Result<Loneliness> {
    let speeds = check_family(speeds)?;
    let field = speeds[0].field().clone();
    let q = field.q() as u128;
    let mut k = 1;
    loop {
        let res = covers_with(&speeds, k, d, opts)?;
        if let Some(x) = res.uncovered_witness {
            return Ok(Loneliness {
                exponent: k,
                witness: LaurentTail::new(&field, x)?,
            });
        }
        // a family of size at most q^k never covers at level k
        assert!(
            q.pow(k as u32) < speeds.len() as u128,
            "coverage at level {k} by {} kernels contradicts the union bound",
            speeds.len()
        );
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::loneliness_direct;
    use crate::poly::{enumerate_monic, MonicSet};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u32) -> FieldCtx {
        FieldCtx::of_size(q).unwrap()
    }

    fn p(field: &FieldCtx, c: &[Elem]) -> Poly {
        Poly::new(field, c.to_vec()).unwrap()
    }

    #[test]
    fn circulant_examples() {
        let f2 = gf(2);
        assert_eq!(circulant(&Poly::one(&f2), 1, 0).unwrap().rows(), &[vec![1]]);
        assert_eq!(
            circulant(&p(&f2, &[0, 1]), 2, 1).unwrap().rows(),
            &[vec![0, 1, 0], vec![0, 0, 1]]
        );
        assert_eq!(
            circulant(&p(&f2, &[1, 1, 1]), 2, 2).unwrap().rows(),
            &[vec![1, 1, 1, 0], vec![0, 1, 1, 1]]
        );
        assert_eq!(
            circulant(&Poly::zero(&f2), 1, 1),
            Err(Error::ZeroPolynomial)
        );
        assert!(circulant(&p(&f2, &[1, 1, 1]), 1, 1).is_err());
    }

    #[test]
    fn kernel_examples() {
        let f2 = gf(2);
        let k = kernel(&Poly::one(&f2), 1, 0).unwrap();
        assert_eq!((k.dim(), k.ambient()), (0, 1));
        let k = kernel(&p(&f2, &[0, 1]), 1, 1).unwrap();
        assert_eq!(k.basis(), &[vec![1, 0]]);
        let a = circulant(&p(&f2, &[1, 1, 1]), 2, 2).unwrap();
        let k = kernel_basis(&a);
        assert_eq!(k.basis(), &[vec![1, 0, 1, 1], vec![0, 1, 1, 0]]);
        for v in k.basis() {
            assert!(a.annihilates(v));
        }
    }

    #[test]
    fn kernel_dimension_is_d() {
        for q in [2u32, 3] {
            let field = gf(q);
            for f in enumerate_monic(&field, MonicSet::UpToDegree(3)).unwrap() {
                for k in 1..=3 {
                    for d in f.degree().unwrap()..=3 {
                        let ker = kernel(&f, k, d).unwrap();
                        assert_eq!(ker.dim(), d, "{f} k={k} D={d}");
                        assert_eq!(ker.perp(), circulant(&f, k, d).unwrap().row_space());
                    }
                }
            }
        }
    }

    #[test]
    fn row_space_perp_equals_kernel_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let q = [2u32, 3, 4, 5][rng.gen_range(0..4)];
            let field = gf(q);
            let deg = rng.gen_range(0..5);
            let mut c: Vec<u32> = (0..deg).map(|_| rng.gen_range(0..q)).collect();
            c.push(rng.gen_range(1..q));
            let f = p(&field, &c);
            let k = rng.gen_range(1..4);
            let a = circulant(&f, k, deg + rng.gen_range(0..2)).unwrap();
            assert_eq!(a.row_space().perp(), kernel_basis(&a));
        }
    }

    #[test]
    fn membership_matches_tail_norm() {
        let f2 = gf(2);
        for f in enumerate_monic(&f2, MonicSet::UpToDegree(5)).unwrap() {
            let deg = f.degree().unwrap();
            for k in 1..=(6 - deg).min(6) {
                if deg + k > 6 {
                    continue;
                }
                let ker = kernel(&f, k, deg).unwrap();
                for idx in 0..(1u128 << (deg + k)) {
                    let x = index_to_vector(2, idx, deg + k);
                    let alpha = LaurentTail::new(&f2, x.clone()).unwrap();
                    let close = !alpha.frac_norm(&f).unwrap().at_least(k);
                    assert_eq!(ker.contains(&x), close);
                }
            }
        }
    }

    #[test]
    fn covers_examples() {
        let f2 = gf(2);
        let fam = [p(&f2, &[1]), p(&f2, &[0, 1]), p(&f2, &[1, 1])];
        let r = covers(&fam, 1, None).unwrap();
        assert!(r.covers_all);
        assert_eq!(r.covered_count, 4);
        assert_eq!(r.per_polynomial_new, vec![2, 1, 1]);

        let r = covers(&[Poly::one(&f2)], 1, None).unwrap();
        assert!(!r.covers_all);
        assert_eq!(r.uncovered_witness, Some(vec![1]));

        let all = enumerate_monic(&f2, MonicSet::UpToDegree(2)).unwrap();
        assert!(covers(&all, 2, None).unwrap().covers_all);
        assert!(!covers(&all, 3, None).unwrap().covers_all);
    }

    #[test]
    fn covers_errors() {
        let f2 = gf(2);
        assert!(matches!(covers(&[], 1, None), Err(Error::InvalidInput(_))));
        let opts = CoverageOptions {
            bitmap_cap: 1 << 8,
            threads: 1,
        };
        assert!(matches!(
            covers_with(&[Poly::monomial(&f2, 1, 10)], 1, None, &opts),
            Err(Error::CapExceeded { .. })
        ));
        assert!(covers(&[p(&f2, &[1, 1, 1])], 1, Some(1)).is_err());
    }

    #[test]
    fn loneliness_examples() {
        let f2 = gf(2);
        assert_eq!(loneliness(&[Poly::one(&f2)]).unwrap().exponent, 1);
        let fam = [p(&f2, &[1]), p(&f2, &[0, 1]), p(&f2, &[1, 1])];
        let l = loneliness(&fam).unwrap();
        assert_eq!(l.exponent, 2);
        assert_eq!(l.witness.len(), 3);
        for f in &fam {
            assert!(l.witness.frac_norm(f).unwrap().at_least(2));
        }
        let all = enumerate_monic(&f2, MonicSet::UpToDegree(2)).unwrap();
        assert_eq!(loneliness(&all).unwrap().exponent, 3);
    }

    #[test]
    fn larger_d_leaves_loneliness_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let field = gf([2, 3][rng.gen_range(0..2)]);
            let pool = enumerate_monic(&field, MonicSet::UpToDegree(2)).unwrap();
            let n = rng.gen_range(1..6);
            let fam: Vec<Poly> = pool.choose_multiple(&mut rng, n).cloned().collect();
            let base = loneliness(&fam).unwrap().exponent;
            let dmax = max_degree(&fam).unwrap();
            for extra in 1..=2 {
                let l =
                    loneliness_with(&fam, Some(dmax + extra), &CoverageOptions::default()).unwrap();
                assert_eq!(l.exponent, base);
            }
        }
    }

    #[test]
    fn union_bound_never_covers() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..1000 {
            let q = [2u32, 3][trial % 2];
            let k = 1 + (trial / 2) % 2;
            let field = gf(q);
            let pool = enumerate_monic(&field, MonicSet::UpToDegree(4)).unwrap();
            let n = rng.gen_range(1..=q.pow(k as u32) as usize);
            let fam: Vec<Poly> = pool.choose_multiple(&mut rng, n).cloned().collect();
            let r = covers(&fam, k, None).unwrap();
            assert!(!r.covers_all);
            let total: u64 = (q as u64).pow(r.d as u32);
            assert!(r.covered_count <= fam.len() as u64 * total - (fam.len() as u64 - 1));
        }
    }

    #[test]
    fn parallel_marking_matches_sequential() {
        let f3 = gf(3);
        let all = enumerate_monic(&f3, MonicSet::UpToDegree(2)).unwrap();
        let seq = covers(&all, 2, Some(3)).unwrap();
        let par = covers_with(
            &all,
            2,
            Some(3),
            &CoverageOptions {
                threads: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq, covers(&all, 2, Some(3)).unwrap());
    }

    #[test]
    fn extension_field_coverage_agrees_with_direct() {
        let f4 = gf(4);
        let pool = enumerate_monic(&f4, MonicSet::UpToDegree(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let n = rng.gen_range(1..=pool.len());
            let fam: Vec<Poly> = pool.choose_multiple(&mut rng, n).cloned().collect();
            assert_eq!(
                loneliness(&fam).unwrap().exponent,
                loneliness_direct(&fam).unwrap().exponent
            );
        }
    }
}
