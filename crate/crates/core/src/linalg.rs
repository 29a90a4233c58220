//! Exact linear algebra over a [`Field`]: reduced row-echelon forms,
//! canonical subspaces, sums and intersections, and Plücker coordinates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field, Subfield};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("ambient dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("row of length {got} in ambient dimension {expected}")]
    RowLength { expected: usize, got: usize },
    #[error("Plücker coordinates of the zero subspace are undefined")]
    EmptySubspace,
    #[error("element code {0} is outside the field")]
    BadElement(u32),
}

/// Brings `data` (row-major, `ncols` columns) into reduced row-echelon form
/// with unit pivots. Zero rows end up at the bottom. Returns the pivot columns.
pub fn rref(f: &Field, data: &mut [Elem], ncols: usize) -> Vec<usize> {
    let nrows = if ncols == 0 { 0 } else { data.len() / ncols };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| data[i * ncols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in 0..ncols {
                data.swap(p * ncols + j, r * ncols + j);
            }
        }
        let inv = f.inv_nz(data[r * ncols + c]);
        if inv != 1 {
            for j in c..ncols {
                data[r * ncols + j] = f.mul(data[r * ncols + j], inv);
            }
        }
        for i in 0..nrows {
            if i == r {
                continue;
            }
            let factor = data[i * ncols + c];
            if factor == 0 {
                continue;
            }
            let neg = f.neg(factor);
            for j in c..ncols {
                let v = data[r * ncols + j];
                if v != 0 {
                    data[i * ncols + j] = f.add(data[i * ncols + j], f.mul(neg, v));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a row-major matrix.
pub fn matrix_rank(f: &Field, rows: &[Vec<Elem>]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let ncols = first.len();
    let mut data: Vec<Elem> = rows.iter().flatten().copied().collect();
    rref(f, &mut data, ncols).len()
}

/// Basis of `{x : A x = 0}` for the row-major matrix `a` with `ncols` columns.
pub fn null_space(f: &Field, a: &[Elem], ncols: usize) -> Vec<Vec<Elem>> {
    let mut data = a.to_vec();
    let pivots = rref(f, &mut data, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0; ncols];
        v[free] = 1;
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = f.neg(data[r * ncols + free]);
        }
        basis.push(v);
    }
    basis
}

/// Scales `v` so that its first nonzero entry is 1. Returns false for the zero vector.
pub fn normalize(f: &Field, v: &mut [Elem]) -> bool {
    let Some(&lead) = v.iter().find(|&&x| x != 0) else {
        return false;
    };
    if lead != 1 {
        let inv = f.inv_nz(lead);
        for x in v.iter_mut() {
            *x = f.mul(*x, inv);
        }
    }
    true
}

pub fn dot(f: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter()
        .zip(b)
        .fold(0, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

/// `a + c·b`, written into `a`.
pub fn axpy(f: &Field, a: &mut [Elem], c: Elem, b: &[Elem]) {
    if c == 0 {
        return;
    }
    for (x, &y) in a.iter_mut().zip(b) {
        *x = f.add(*x, f.mul(c, y));
    }
}

pub fn scale(f: &Field, c: Elem, v: &[Elem]) -> Vec<Elem> {
    v.iter().map(|&x| f.mul(c, x)).collect()
}

/// `coeffs · basis` for a basis given as rows.
pub fn combine(f: &Field, coeffs: &[Elem], basis: &[Vec<Elem>]) -> Vec<Elem> {
    let n = basis.first().map_or(0, Vec::len);
    let mut out = vec![0; n];
    for (c, row) in coeffs.iter().zip(basis) {
        axpy(f, &mut out, *c, row);
    }
    out
}

/// Binomial coefficient.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of `k`-dimensional subspaces of `F_q^n`.
pub fn gaussian_binomial(n: usize, k: usize, q: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= (q as u128).pow((n - i) as u32) - 1;
        den *= (q as u128).pow((i + 1) as u32) - 1;
    }
    (num / den) as u64
}

/// Iterates over all `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut state: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let current = state.clone()?;
        let mut next = current.clone();
        let mut i = k;
        loop {
            if i == 0 {
                state = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                state = Some(next);
                break;
            }
        }
        Some(current)
    })
}

/// A subspace of `F^N` stored by its canonical RREF basis (unit pivots).
///
/// Equality of subspaces is equality of these matrices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    dim: usize,
    rank: usize,
    rows: Vec<Elem>,
}

impl Subspace {
    /// The zero subspace (the empty projective subspace).
    pub fn empty(dim: usize) -> Subspace {
        Subspace {
            dim,
            rank: 0,
            rows: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Subspace {
        let mut rows = vec![0; dim * dim];
        for i in 0..dim {
            rows[i * dim + i] = 1;
        }
        Subspace {
            dim,
            rank: dim,
            rows,
        }
    }

    /// Canonical form of the row space of `rows`.
    pub fn from_rows(f: &Field, dim: usize, rows: &[Vec<Elem>]) -> Result<Subspace, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(LinalgError::RowLength {
                    expected: dim,
                    got: r.len(),
                });
            }
            if let Some(&x) = r.iter().find(|&&x| x as usize >= f.order()) {
                return Err(LinalgError::BadElement(x as u32));
            }
            data.extend_from_slice(r);
        }
        Ok(Subspace::from_flat(f, dim, data))
    }

    /// Canonical form of the row space of a flat row-major matrix.
    pub fn from_flat(f: &Field, dim: usize, mut data: Vec<Elem>) -> Subspace {
        let rank = rref(f, &mut data, dim).len();
        data.truncate(rank * dim);
        Subspace {
            dim,
            rank,
            rows: data,
        }
    }

    /// Wraps rows that are already in canonical form.
    pub fn from_canonical(dim: usize, rows: Vec<Elem>) -> Subspace {
        let rank = if dim == 0 { 0 } else { rows.len() / dim };
        Subspace { dim, rank, rows }
    }

    pub fn point(f: &Field, v: &[Elem]) -> Subspace {
        Subspace::from_flat(f, v.len(), v.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.rank == 0
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Elem]> {
        self.rows.chunks(self.dim.max(1)).take(self.rank)
    }

    pub fn row_vecs(&self) -> Vec<Vec<Elem>> {
        self.rows().map(<[Elem]>::to_vec).collect()
    }

    pub fn as_flat(&self) -> &[Elem] {
        &self.rows
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows()
            .map(|r| r.iter().position(|&x| x != 0).expect("canonical rows are nonzero"))
            .collect()
    }

    /// Reduces `v` modulo the subspace; zero iff `v` lies in it.
    pub fn reduce(&self, f: &Field, v: &mut [Elem]) {
        for (row, p) in self.rows().zip(self.pivots()) {
            let c = v[p];
            if c != 0 {
                axpy(f, v, f.neg(c), row);
            }
        }
    }

    pub fn contains_vector(&self, f: &Field, v: &[Elem]) -> bool {
        let mut w = v.to_vec();
        self.reduce(f, &mut w);
        w.iter().all(|&x| x == 0)
    }

    pub fn contains(&self, f: &Field, other: &Subspace) -> bool {
        other.rows().all(|r| self.contains_vector(f, r))
    }

    fn check_dim(&self, other: &Subspace) -> Result<(), LinalgError> {
        if self.dim != other.dim {
            Err(LinalgError::DimMismatch(self.dim, other.dim))
        } else {
            Ok(())
        }
    }

    pub fn sum(&self, f: &Field, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_dim(other)?;
        let mut data = self.rows.clone();
        data.extend_from_slice(&other.rows);
        Ok(Subspace::from_flat(f, self.dim, data))
    }

    /// Intersection by the Zassenhaus algorithm.
    pub fn intersect(&self, f: &Field, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_dim(other)?;
        let n = self.dim;
        let w = 2 * n;
        let mut data = Vec::with_capacity((self.rank + other.rank) * w);
        for r in self.rows() {
            data.extend_from_slice(r);
            data.extend_from_slice(r);
        }
        for r in other.rows() {
            data.extend_from_slice(r);
            data.extend(std::iter::repeat(0).take(n));
        }
        let pivots = rref(f, &mut data, w);
        let mut out = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            if p >= n {
                out.extend_from_slice(&data[i * w + n..(i + 1) * w]);
            }
        }
        Ok(Subspace::from_flat(f, n, out))
    }

    /// True iff the canonical basis has all entries in the subfield.
    pub fn is_rational(&self, sub: &Subfield) -> bool {
        self.rows.iter().all(|&x| sub.contains(x))
    }

    /// The `k × k` minors of the canonical basis, columns in lexicographic order.
    pub fn plucker(&self, f: &Field) -> Result<Vec<Elem>, LinalgError> {
        if self.rank == 0 {
            return Err(LinalgError::EmptySubspace);
        }
        let k = self.rank;
        let mut out = Vec::with_capacity(binomial(self.dim, k));
        let mut buf = vec![0; k * k];
        for cols in combinations(self.dim, k) {
            for i in 0..k {
                for (j, &c) in cols.iter().enumerate() {
                    buf[i * k + j] = self.rows[i * self.dim + c];
                }
            }
            out.push(determinant(f, &mut buf, k));
        }
        Ok(out)
    }

    /// All projective points of the subspace as normalized vectors.
    pub fn points(&self, f: &Field) -> Vec<Vec<Elem>> {
        let basis = self.row_vecs();
        normalized_vectors(f, self.rank)
            .map(|c| combine(f, &c, &basis))
            .collect()
    }

    /// Coordinates of `v` with respect to the canonical basis, if `v` lies in the subspace.
    pub fn coords_of(&self, f: &Field, v: &[Elem]) -> Option<Vec<Elem>> {
        let coeffs: Vec<Elem> = self.pivots().iter().map(|&p| v[p]).collect();
        let w = combine(f, &coeffs, &self.row_vecs());
        (w == v).then_some(coeffs)
    }

    /// Image of a subspace given in local coordinates under `basis` (rows in
    /// the ambient space).
    pub fn map_from_local(&self, f: &Field, basis: &[Vec<Elem>]) -> Subspace {
        let dim = basis.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(self.rank * dim);
        for r in self.rows() {
            data.extend(combine(f, r, basis));
        }
        Subspace::from_flat(f, dim, data)
    }

    /// The space `{x : Σ_j a_ij x_j = 0 for all rows a_i}`.
    pub fn annihilator(f: &Field, dim: usize, functionals: &[Vec<Elem>]) -> Subspace {
        let flat: Vec<Elem> = functionals.iter().flatten().copied().collect();
        if flat.is_empty() {
            return Subspace::full(dim);
        }
        let basis = null_space(f, &flat, dim);
        Subspace::from_rows(f, dim, &basis).expect("null space rows have the ambient length")
    }

    pub fn to_json_rows(&self) -> Vec<Vec<Elem>> {
        self.row_vecs()
    }
}

/// Wire format: a JSON array of rows of element codes.
impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            dim: usize,
            rows: Vec<&'a [Elem]>,
        }
        Wire {
            dim: self.dim,
            rows: self.rows().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            dim: usize,
            rows: Vec<Vec<Elem>>,
        }
        let w = Wire::deserialize(d)?;
        if w.rows.iter().any(|r| r.len() != w.dim) {
            return Err(serde::de::Error::custom("row length differs from dim"));
        }
        let flat: Vec<Elem> = w.rows.into_iter().flatten().collect();
        Ok(Subspace::from_canonical(w.dim, flat))
    }
}

/// Determinant by elimination; destroys `m`.
pub fn determinant(f: &Field, m: &mut [Elem], k: usize) -> Elem {
    let mut det: Elem = 1;
    for c in 0..k {
        let Some(p) = (c..k).find(|&i| m[i * k + c] != 0) else {
            return 0;
        };
        if p != c {
            for j in 0..k {
                m.swap(p * k + j, c * k + j);
            }
            det = f.neg(det);
        }
        let pv = m[c * k + c];
        det = f.mul(det, pv);
        let inv = f.inv_nz(pv);
        for i in c + 1..k {
            let factor = f.mul(m[i * k + c], inv);
            if factor == 0 {
                continue;
            }
            let neg = f.neg(factor);
            for j in c..k {
                let v = m[c * k + j];
                m[i * k + j] = f.add(m[i * k + j], f.mul(neg, v));
            }
        }
    }
    det
}

/// Normalized nonzero vectors of `F^n` (first nonzero entry 1), ordered by the
/// position of the leading 1 and then lexicographically.
pub fn normalized_vectors(f: &Field, n: usize) -> impl Iterator<Item = Vec<Elem>> + '_ {
    let q = f.order() as u64;
    (0..n).flat_map(move |lead| {
        let tail = n - lead - 1;
        (0..q.pow(tail as u32)).map(move |mut code| {
            let mut v = vec![0; n];
            v[lead] = 1;
            for j in (lead + 1..n).rev() {
                v[j] = (code % q) as Elem;
                code /= q;
            }
            v
        })
    })
}

/// All `k`-dimensional subspaces of `F^n` in canonical form, sorted.
pub fn all_subspaces(f: &Field, n: usize, k: usize) -> Vec<Subspace> {
    let q = f.order() as u64;
    let mut out = Vec::new();
    for pivots in combinations(n, k) {
        // Free positions: right of the row's pivot, not a pivot column.
        let mut free = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for c in p + 1..n {
                if !pivots.contains(&c) {
                    free.push(i * n + c);
                }
            }
        }
        for mut code in 0..q.pow(free.len() as u32) {
            let mut rows = vec![0; k * n];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i * n + p] = 1;
            }
            for &pos in free.iter().rev() {
                rows[pos] = (code % q) as Elem;
                code /= q;
            }
            out.push(Subspace::from_canonical(n, rows));
        }
    }
    out.sort();
    out
}

/// Incremental row reduction used for rank computations over many rows.
#[derive(Clone, Debug)]
pub struct RowReducer {
    ncols: usize,
    rows: Vec<Vec<Elem>>,
    pivots: Vec<usize>,
}

impl RowReducer {
    pub fn new(ncols: usize) -> RowReducer {
        RowReducer {
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Adds a row; returns true when it increased the rank.
    pub fn insert(&mut self, f: &Field, v: &[Elem]) -> bool {
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = w[p];
            if c != 0 {
                axpy(f, &mut w, f.neg(c), row);
            }
        }
        let Some(p) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv_nz(w[p]);
        for x in w.iter_mut() {
            *x = f.mul(*x, inv);
        }
        self.rows.push(w);
        self.pivots.push(p);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u32) -> Field {
        Field::with_order(q).unwrap()
    }

    #[test]
    fn canonical_order_and_rank() {
        let f2 = f(2);
        let s = Subspace::from_rows(&f2, 3, &[vec![0, 1, 0], vec![1, 0, 0]]).unwrap();
        assert_eq!(s.row_vecs(), vec![vec![1, 0, 0], vec![0, 1, 0]]);
        let s = Subspace::from_rows(&f2, 2, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(s, Subspace::full(2));
        let f3 = f(3);
        let s = Subspace::from_rows(&f3, 3, &[vec![0, 2, 1], vec![0, 1, 2]]).unwrap();
        assert_eq!(s.row_vecs(), vec![vec![0, 1, 2]]);
        let z = Subspace::from_rows(&f3, 3, &[vec![0, 0, 0]]).unwrap();
        assert!(z.is_empty());
    }

    #[test]
    fn intersection_of_planes_brute_force() {
        let f2 = f(2);
        let a = Subspace::from_rows(&f2, 4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 1]])
            .unwrap();
        let b = Subspace::from_rows(&f2, 4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 0, 1]])
            .unwrap();
        let meet = a.intersect(&f2, &b).unwrap();
        let brute: Vec<Vec<Elem>> = (0..16u16)
            .map(|c| (0..4).map(|i| (c >> (3 - i)) & 1).collect::<Vec<_>>())
            .filter(|v| a.contains_vector(&f2, v) && b.contains_vector(&f2, v))
            .collect();
        assert_eq!(brute.len(), 4);
        assert!(brute.iter().all(|v| meet.contains_vector(&f2, v)));
        assert_eq!(meet.rank(), 2);
        assert_eq!(a.intersect(&f2, &a).unwrap(), a);
    }

    #[test]
    fn sum_of_coordinate_points() {
        let f3 = f(3);
        let e1 = Subspace::point(&f3, &[1, 0, 0]);
        let e2 = Subspace::point(&f3, &[0, 1, 0]);
        let s = e1.sum(&f3, &e2).unwrap();
        assert_eq!(s.row_vecs(), vec![vec![1, 0, 0], vec![0, 1, 0]]);
        assert!(e1.sum(&f3, &Subspace::empty(4)).is_err());
    }

    #[test]
    fn rationality() {
        let f4 = f(4);
        let sub = f4.subfield(1).unwrap();
        let e = f4.eps();
        assert!(!Subspace::point(&f4, &[1, e, 0]).is_rational(&sub));
        let s = Subspace::from_rows(&f4, 3, &[vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        assert!(s.is_rational(&sub));
    }

    #[test]
    fn plucker_examples() {
        let f2 = f(2);
        let s = Subspace::from_rows(&f2, 4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap();
        assert_eq!(s.plucker(&f2).unwrap(), vec![1, 0, 0, 0, 0, 0]);
        let s = Subspace::from_rows(&f2, 4, &[vec![1, 0, 0, 0], vec![0, 0, 1, 0]]).unwrap();
        assert_eq!(s.plucker(&f2).unwrap(), vec![0, 1, 0, 0, 0, 0]);
        let p = Subspace::point(&f2, &[0, 1, 1, 0]);
        assert_eq!(p.plucker(&f2).unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(Subspace::empty(4).plucker(&f2), Err(LinalgError::EmptySubspace));
    }

    #[test]
    fn grassmann_plucker_relation_exhaustive() {
        for q in [2, 3] {
            let fl = f(q);
            for s in all_subspaces(&fl, 4, 2) {
                let p = s.plucker(&fl).unwrap();
                // p12 p34 - p13 p24 + p14 p23
                let lhs = fl.add(
                    fl.sub(fl.mul(p[0], p[5]), fl.mul(p[1], p[4])),
                    fl.mul(p[2], p[3]),
                );
                assert_eq!(lhs, 0);
            }
        }
    }

    #[test]
    fn subspace_counts() {
        let f3 = f(3);
        assert_eq!(all_subspaces(&f3, 4, 2).len() as u64, gaussian_binomial(4, 2, 3));
        assert_eq!(gaussian_binomial(3, 1, 9), 91);
        assert_eq!(normalized_vectors(&f3, 3).count(), 13);
        assert_eq!(binomial(7, 2), 21);
        assert_eq!(combinations(4, 2).count(), 6);
    }

    #[test]
    fn null_space_is_annihilated() {
        let f9 = f(9);
        let a = vec![1, 2, 3, 4, 0, 5, 6, 7];
        for v in null_space(&f9, &a, 4) {
            assert_eq!(dot(&f9, &a[..4], &v), 0);
            assert_eq!(dot(&f9, &a[4..], &v), 0);
        }
        assert_eq!(null_space(&f9, &a, 4).len(), 2);
    }

    fn arb_rows(q: u32, n: usize) -> impl Strategy<Value = Vec<Vec<Elem>>> {
        prop::collection::vec(prop::collection::vec(0..q as Elem, n), 0..=n)
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(rows in arb_rows(9, 5)) {
            let fl = f(9);
            let s = Subspace::from_rows(&fl, 5, &rows).unwrap();
            let t = Subspace::from_rows(&fl, 5, &s.row_vecs()).unwrap();
            prop_assert_eq!(&s, &t);
            for r in &rows {
                prop_assert!(s.contains_vector(&fl, r));
            }
        }

        #[test]
        fn canonical_form_is_basis_independent(rows in arb_rows(4, 4), mix in prop::collection::vec(0..4u16, 16)) {
            let fl = f(4);
            let s = Subspace::from_rows(&fl, 4, &rows).unwrap();
            // Random combinations of the rows lie in s; adding s's own rows back gives s again.
            let mut mixed: Vec<Vec<Elem>> = if rows.is_empty() {
                Vec::new()
            } else {
                mix.chunks(rows.len()).map(|c| combine(&fl, c, &rows)).collect()
            };
            mixed.extend(s.row_vecs().into_iter().rev());
            let t = Subspace::from_rows(&fl, 4, &mixed).unwrap();
            prop_assert_eq!(s, t);
        }

        #[test]
        fn modular_law(a in arb_rows(3, 5), b in arb_rows(3, 5)) {
            let fl = f(3);
            let a = Subspace::from_rows(&fl, 5, &a).unwrap();
            let b = Subspace::from_rows(&fl, 5, &b).unwrap();
            let s = a.sum(&fl, &b).unwrap();
            let i = a.intersect(&fl, &b).unwrap();
            prop_assert_eq!(a.rank() + b.rank(), s.rank() + i.rank());
            prop_assert!(a.contains(&fl, &i) && b.contains(&fl, &i));
        }

        #[test]
        fn intersection_of_rational_is_rational(a in arb_rows(2, 5), b in arb_rows(2, 5)) {
            let fl = f(4);
            let sub = fl.subfield(1).unwrap();
            let a = Subspace::from_rows(&fl, 5, &a).unwrap();
            let b = Subspace::from_rows(&fl, 5, &b).unwrap();
            prop_assert!(a.is_rational(&sub) && b.is_rational(&sub));
            prop_assert!(a.intersect(&fl, &b).unwrap().is_rational(&sub));
        }
    }
}
