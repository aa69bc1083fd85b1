//! Row reduction over F_q and canonical subspaces of F_q^m.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx};

/// Reduces `rows` (all of length `width`) to reduced row-echelon form in
/// place, drops zero rows and returns the pivot columns.
pub fn rref(field: &FieldCtx, rows: &mut Vec<Vec<Elem>>, width: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(src) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, src);
        let inv = field.inv(rows[r][col]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (x, &p) in row.iter_mut().zip(&pivot_row) {
                *x = field.sub(*x, field.mul(factor, p));
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(field: &FieldCtx, rows: &[Vec<Elem>], width: usize) -> usize {
    let mut m = rows.to_vec();
    rref(field, &mut m, width).len()
}

pub fn dot(field: &FieldCtx, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter()
        .zip(b)
        .fold(0, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

/// A subspace of F_q^ambient stored by its reduced row-echelon basis, so that
/// equal subspaces compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    field: FieldCtx,
    ambient: usize,
    basis: Vec<Vec<Elem>>,
    pivots: Vec<usize>,
}

impl Subspace {
    /// Span of the given vectors.
    pub fn span(field: &FieldCtx, ambient: usize, vectors: Vec<Vec<Elem>>) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(Error::InvalidInput(format!(
                "every spanning vector must have length {ambient}"
            )));
        }
        let mut basis = vectors;
        let pivots = rref(field, &mut basis, ambient);
        Ok(Subspace {
            field: field.clone(),
            ambient,
            basis,
            pivots,
        })
    }

    pub fn zero(field: &FieldCtx, ambient: usize) -> Self {
        Subspace {
            field: field.clone(),
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: &FieldCtx, ambient: usize) -> Self {
        let basis = (0..ambient)
            .map(|i| {
                let mut v = vec![0; ambient];
                v[i] = 1;
                v
            })
            .collect();
        Subspace {
            field: field.clone(),
            ambient,
            basis,
            pivots: (0..ambient).collect(),
        }
    }

    /// Right null space `{x : row . x = 0 for every row}`.
    pub fn null_space(field: &FieldCtx, ambient: usize, rows: &[Vec<Elem>]) -> Result<Self> {
        let reduced = Subspace::span(field, ambient, rows.to_vec())?;
        Ok(reduced.perp())
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient - self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Elem>] {
        &self.basis
    }

    /// Orthogonal complement under the standard dot product.
    pub fn perp(&self) -> Subspace {
        let f = &self.field;
        let free: Vec<usize> = (0..self.ambient)
            .filter(|c| !self.pivots.contains(c))
            .collect();
        let vectors = free
            .iter()
            .map(|&j| {
                let mut v = vec![0; self.ambient];
                v[j] = 1;
                for (row, &pc) in self.basis.iter().zip(&self.pivots) {
                    v[pc] = f.neg(row[j]);
                }
                v
            })
            .collect();
        Subspace::span(f, self.ambient, vectors).expect("lengths match")
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        let f = &self.field;
        let mut r = v.to_vec();
        for (row, &pc) in self.basis.iter().zip(&self.pivots) {
            let c = r[pc];
            if c != 0 {
                for (x, &b) in r.iter_mut().zip(row) {
                    *x = f.sub(*x, f.mul(c, b));
                }
            }
        }
        r.iter().all(|&x| x == 0)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|v| other.contains(v))
    }

    /// Subspace spanned by both.
    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut v = self.basis.clone();
        v.extend(other.basis.iter().cloned());
        Subspace::span(&self.field, self.ambient, v).expect("lengths match")
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        self.perp().sum(&other.perp()).perp()
    }

    /// Every vector of the subspace, as little-endian base-q indices, in an
    /// F_p-Gray-code order starting from the origin.
    pub fn point_indices(&self) -> PointIter<'_> {
        PointIter::new(self)
    }

    /// Number of points, `q^dim`, if it fits in a `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        (self.field.q() as u128).checked_pow(self.dim() as u32)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(dim {} in {}, {:?})",
            self.dim(),
            self.ambient,
            self.basis
        )
    }
}

/// Walks all points of a subspace. The points are the F_p-combinations of
/// the generators `w^i b_j` (w^i running over an F_p-basis of F_q); the
/// p-ary modular Gray code changes one combination coefficient per step, so
/// each step adds a single generator to the current vector.
pub struct PointIter<'a> {
    field: &'a FieldCtx,
    generators: Vec<Vec<Elem>>,
    weights: Vec<u128>,
    current: Vec<Elem>,
    index: u128,
    step: u128,
    total: u128,
}

impl<'a> PointIter<'a> {
    fn new(space: &'a Subspace) -> Self {
        let field = &space.field;
        let scalars = field.prime_basis();
        let generators: Vec<Vec<Elem>> = space
            .basis
            .iter()
            .flat_map(|b| {
                scalars
                    .iter()
                    .map(move |&s| b.iter().map(|&x| field.mul(s, x)).collect::<Vec<_>>())
            })
            .collect();
        let q = field.q() as u128;
        let weights = (0..space.ambient).map(|i| q.pow(i as u32)).collect();
        let total = (field.p() as u128).pow(generators.len() as u32);
        PointIter {
            field,
            generators,
            weights,
            current: vec![0; space.ambient],
            index: 0,
            step: 0,
            total,
        }
    }
}

impl Iterator for PointIter<'_> {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        if self.step >= self.total {
            return None;
        }
        if self.step > 0 {
            // the Gray digit that changes is the p-adic valuation of the step number
            let p = self.field.p() as u128;
            let mut t = self.step;
            let mut g = 0;
            while t.is_multiple_of(p) {
                t /= p;
                g += 1;
            }
            for (i, &x) in self.generators[g].iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let old = self.current[i];
                let new = self.field.add(old, x);
                self.current[i] = new;
                self.index =
                    self.index + new as u128 * self.weights[i] - old as u128 * self.weights[i];
            }
        }
        self.step += 1;
        Some(self.index)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.step) as usize;
        (left, Some(left))
    }
}

/// Coefficient digits of a little-endian base-q index.
pub fn index_to_vector(q: u32, mut idx: u128, len: usize) -> Vec<Elem> {
    (0..len)
        .map(|_| {
            let d = (idx % q as u128) as Elem;
            idx /= q as u128;
            d
        })
        .collect()
}

pub fn vector_to_index(q: u32, v: &[Elem]) -> u128 {
    v.iter()
        .rev()
        .fold(0, |acc, &c| acc * q as u128 + c as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn gf(q: u32) -> FieldCtx {
        FieldCtx::of_size(q).unwrap()
    }

    fn random_subspace(rng: &mut ChaCha8Rng, field: &FieldCtx, ambient: usize) -> Subspace {
        let n = rng.gen_range(0..=ambient + 1);
        let vs = (0..n)
            .map(|_| (0..ambient).map(|_| rng.gen_range(0..field.q())).collect())
            .collect();
        Subspace::span(field, ambient, vs).unwrap()
    }

    #[test]
    fn perp_examples() {
        let f2 = gf(2);
        assert_eq!(Subspace::zero(&f2, 3).perp(), Subspace::full(&f2, 3));
        let s = Subspace::span(&f2, 2, vec![vec![1, 0]]).unwrap();
        assert_eq!(s.perp(), Subspace::span(&f2, 2, vec![vec![0, 1]]).unwrap());
    }

    #[test]
    fn perp_is_an_involution_with_complementary_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..1000 {
            let field = gf([2, 3, 4, 5, 8, 9][trial % 6]);
            let m = rng.gen_range(1..7);
            let v = random_subspace(&mut rng, &field, m);
            let w = v.perp();
            assert_eq!(v.dim() + w.dim(), m);
            assert_eq!(w.perp(), v);
            for a in v.basis() {
                for b in w.basis() {
                    assert_eq!(dot(&field, a, b), 0);
                }
            }
        }
    }

    #[test]
    fn points_are_exactly_the_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..60 {
            let field = gf([2, 3, 4, 9][trial % 4]);
            let m = rng.gen_range(1..5);
            let v = random_subspace(&mut rng, &field, m);
            let pts: BTreeSet<u128> = v.point_indices().collect();
            assert_eq!(pts.len() as u128, v.cardinality().unwrap());
            let q = field.q();
            for idx in 0..(q as u128).pow(m as u32) {
                let x = index_to_vector(q, idx, m);
                assert_eq!(pts.contains(&idx), v.contains(&x), "{v:?} {x:?}");
            }
        }
    }

    #[test]
    fn intersection_against_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let field = gf(3);
            let a = random_subspace(&mut rng, &field, 4);
            let b = random_subspace(&mut rng, &field, 4);
            let i = a.intersect(&b);
            for idx in 0..81u128 {
                let x = index_to_vector(3, idx, 4);
                assert_eq!(i.contains(&x), a.contains(&x) && b.contains(&x));
            }
        }
    }

    #[test]
    fn rank_of_dependent_rows() {
        let f2 = gf(2);
        let rows = vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]];
        assert_eq!(rank(&f2, &rows, 3), 2);
        assert!(Subspace::span(&f2, 2, vec![vec![1]]).is_err());
    }
}
