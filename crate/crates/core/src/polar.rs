//! Polar spaces of forms: singular points and subspaces with dense IDs,
//! perps, hyperplanes, residues and frames.

use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use rustc_hash::FxHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::forms::{Form, FormError, SpaceDescriptor, WittData};
use crate::gf::Elem;
use crate::linalg::{self, LinalgError, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolarError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("instance too large: {what} needs about {estimate} entries, budget is {budget}")]
    TooLarge { what: String, estimate: u64, budget: u64 },
    #[error("the polar space has rank {0}; at least 1 is needed")]
    RankTooSmall(usize),
    #[error("no singular {k}-subspaces: the rank is {n}")]
    LevelOutOfRange { k: usize, n: usize },
    #[error("upper residue of a {k}-subspace is undefined in rank {k}")]
    ResidueUndefined { k: usize },
    #[error("{0}")]
    WrongSeed(String),
    #[error("subspace is not a singular subspace of the model")]
    NotInModel,
}

/// Size limits for enumerations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Cap on the projective points scanned when listing singular points.
    pub projective_points: u64,
    /// Cap on the size of each level `S_k`, `k ≥ 2`.
    pub grassmann_points: u64,
    /// Perp bitsets are cached only up to this many points.
    pub perp_cache_points: usize,
}

impl Budget {
    pub const DEFAULT: Budget = Budget {
        projective_points: 5_000_000,
        grassmann_points: 200_000,
        perp_cache_points: 20_000,
    };

    pub const LARGE: Budget = Budget {
        projective_points: 200_000_000,
        grassmann_points: 100_000_000,
        perp_cache_points: 20_000,
    };
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}

/// A sorted list of canonical `k`-subspaces with a hash index for ID lookup.
#[derive(Clone, Debug)]
pub struct SubspaceTable {
    dim: usize,
    k: usize,
    count: usize,
    data: Vec<Elem>,
    slots: Vec<u32>,
}

const EMPTY_SLOT: u32 = u32::MAX;

#[inline]
fn slice_hash(s: &[Elem]) -> u64 {
    let mut h = FxHasher::default();
    s.hash(&mut h);
    h.finish()
}

impl SubspaceTable {
    /// Builds a table from flat, possibly unsorted, duplicate-free rows.
    pub fn from_unsorted(dim: usize, k: usize, data: Vec<Elem>) -> SubspaceTable {
        let stride = dim * k;
        if stride == 0 {
            return SubspaceTable::from_sorted(dim, k, data, 1);
        }
        let count = data.len() / stride;
        let mut order: Vec<u32> = (0..count as u32).collect();
        order.par_sort_unstable_by(|&a, &b| {
            let a = a as usize * stride;
            let b = b as usize * stride;
            data[a..a + stride].cmp(&data[b..b + stride])
        });
        let mut sorted = Vec::with_capacity(data.len());
        for &i in &order {
            let i = i as usize * stride;
            sorted.extend_from_slice(&data[i..i + stride]);
        }
        drop(data);
        SubspaceTable::from_sorted(dim, k, sorted, count)
    }

    /// Wraps already sorted rows; used by cache reloads.
    pub fn from_sorted(dim: usize, k: usize, data: Vec<Elem>, count: usize) -> SubspaceTable {
        let mut t = SubspaceTable {
            dim,
            k,
            count,
            data,
            slots: Vec::new(),
        };
        t.build_index();
        t
    }

    fn build_index(&mut self) {
        let cap = (self.count * 2).next_power_of_two().max(2);
        self.slots = vec![EMPTY_SLOT; cap];
        let mask = cap - 1;
        for id in 0..self.count {
            let mut s = slice_hash(self.get(id)) as usize & mask;
            while self.slots[s] != EMPTY_SLOT {
                s = (s + 1) & mask;
            }
            self.slots[s] = id as u32;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn raw(&self) -> &[Elem] {
        &self.data
    }

    /// Canonical rows of subspace `id`, flattened.
    #[inline]
    pub fn get(&self, id: usize) -> &[Elem] {
        let stride = self.dim * self.k;
        &self.data[id * stride..(id + 1) * stride]
    }

    pub fn subspace(&self, id: usize) -> Subspace {
        Subspace::from_canonical(self.dim, self.get(id).to_vec())
    }

    /// ID of the subspace with these canonical rows.
    #[inline]
    pub fn find(&self, rows: &[Elem]) -> Option<u32> {
        if rows.len() != self.dim * self.k {
            return None;
        }
        let mask = self.slots.len() - 1;
        let mut s = slice_hash(rows) as usize & mask;
        loop {
            let id = self.slots[s];
            if id == EMPTY_SLOT {
                return None;
            }
            if self.get(id as usize) == rows {
                return Some(id);
            }
            s = (s + 1) & mask;
        }
    }

    pub fn id_of(&self, s: &Subspace) -> Option<u32> {
        if s.rank() != self.k || s.dim() != self.dim {
            return None;
        }
        self.find(s.as_flat())
    }
}

/// Appends to `out` every totally singular `(k+1)`-space whose first `k`
/// canonical rows are `x`. Each such space has exactly one such parent.
fn extend_one(form: &Form, x: &[Elem], k: usize, out: &mut Vec<Elem>) {
    let f = form.field();
    let n = form.dim();
    let q = f.order();
    let start = if k == 0 {
        0
    } else {
        x[(k - 1) * n..].iter().position(|&v| v != 0).expect("canonical row") + 1
    };
    let funcs: Vec<Vec<Elem>> = (0..k).map(|i| form.functional(&x[i * n..(i + 1) * n])).collect();
    let mut w = vec![0; n];
    for c in start..n {
        if (0..k).any(|i| x[i * n + c] != 0) {
            continue;
        }
        let m = n - c - 1;
        // Solve a_i[c] + Σ_{j>c} a_i[j] t_j = 0.
        let width = m + 1;
        let mut aug = Vec::with_capacity(k * width);
        for a in &funcs {
            aug.extend_from_slice(&a[c + 1..]);
            aug.push(f.neg(a[c]));
        }
        let pivots = linalg::rref(f, &mut aug, width);
        if pivots.last() == Some(&m) {
            continue;
        }
        let mut base = vec![0; n];
        base[c] = 1;
        for (r, &p) in pivots.iter().enumerate() {
            base[c + 1 + p] = aug[r * width + m];
        }
        let mut is_pivot = vec![false; m];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let null: Vec<Vec<Elem>> = (0..m)
            .filter(|&j| !is_pivot[j])
            .map(|free| {
                let mut v = vec![0; n];
                v[c + 1 + free] = 1;
                for (r, &p) in pivots.iter().enumerate() {
                    v[c + 1 + p] = f.neg(aug[r * width + free]);
                }
                v
            })
            .collect();
        let dims = null.len();
        // multiples[l][s] = s · null[l]
        let multiples: Vec<Vec<Vec<Elem>>> = null
            .iter()
            .map(|v| f.elements().map(|s| linalg::scale(f, s, v)).collect())
            .collect();
        // Odometer over coefficient tuples; partial[l] = base + Σ_{j≥l} s_j null_j.
        let mut digits = vec![0usize; dims];
        let mut partial = vec![base.clone(); dims + 1];
        for l in (0..dims).rev() {
            partial[l] = partial[l + 1].clone();
        }
        loop {
            w.copy_from_slice(&partial[0]);
            if form.is_singular(&w) {
                out.extend_from_slice(x);
                out.extend_from_slice(&w);
            }
            // Advance the odometer.
            let mut l = 0;
            while l < dims {
                digits[l] += 1;
                if digits[l] < q {
                    break;
                }
                digits[l] = 0;
                l += 1;
            }
            if l == dims {
                break;
            }
            for j in (0..=l).rev() {
                let (lo, hi) = partial.split_at_mut(j + 1);
                let src = &hi[0];
                let dst = &mut lo[j];
                let mult = &multiples[j][digits[j]];
                for t in 0..n {
                    dst[t] = f.add(src[t], mult[t]);
                }
            }
        }
    }
}

/// Enumerates the next level `S_{k+1}` from `S_k`.
pub fn extend_level(form: &Form, prev: &SubspaceTable, limit: u64) -> Result<SubspaceTable, PolarError> {
    let k = prev.k();
    let n = form.dim();
    let stride = (k + 1) * n;
    let produced = AtomicUsize::new(0);
    let chunks: Vec<Result<Vec<Elem>, PolarError>> = (0..prev.len())
        .into_par_iter()
        .chunks(256)
        .map(|ids| {
            let mut out = Vec::new();
            for id in ids {
                let before = out.len();
                extend_one(form, prev.get(id), k, &mut out);
                let total = produced.fetch_add((out.len() - before) / stride, Ordering::Relaxed);
                if total as u64 > limit {
                    return Err(PolarError::TooLarge {
                        what: format!("S_{}", k + 1),
                        estimate: total as u64,
                        budget: limit,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut data = Vec::with_capacity(produced.load(Ordering::Relaxed) * stride);
    for c in chunks {
        data.extend(c?);
    }
    Ok(SubspaceTable::from_unsorted(n, k + 1, data))
}

/// Invariants of a non-degenerate polar space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    pub n: usize,
    pub d: usize,
    pub d1: usize,
    pub d2: usize,
}

impl From<&WittData> for Invariants {
    fn from(w: &WittData) -> Self {
        Invariants {
            n: w.n,
            d: w.d,
            d1: w.d1,
            d2: w.d2,
        }
    }
}

/// The polar space of a form with its singular subspaces enumerated level by level.
pub struct PolarModel {
    form: Form,
    witt: WittData,
    descriptor: String,
    budget: Budget,
    levels: Vec<Arc<SubspaceTable>>,
    point_vecs: Vec<Elem>,
    perp_cache: OnceLock<Option<Vec<BitSet>>>,
}

impl std::fmt::Debug for PolarModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolarModel")
            .field("descriptor", &self.descriptor)
            .field("points", &self.num_points())
            .field("levels", &self.levels.len())
            .finish()
    }
}

impl PolarModel {
    /// Enumerates the singular points of `form`.
    pub fn new(form: Form, budget: Budget) -> Result<PolarModel, PolarError> {
        let descriptor = format!("form:{:?}", form.matrix());
        PolarModel::with_descriptor(form, descriptor, budget)
    }

    pub fn from_descriptor(desc: &SpaceDescriptor, budget: Budget) -> Result<PolarModel, PolarError> {
        PolarModel::with_descriptor(desc.form()?, desc.to_string(), budget)
    }

    pub fn parse(desc: &str, budget: Budget) -> Result<PolarModel, PolarError> {
        let d: SpaceDescriptor = desc.parse()?;
        PolarModel::from_descriptor(&d, budget)
    }

    fn with_descriptor(form: Form, descriptor: String, budget: Budget) -> Result<PolarModel, PolarError> {
        let witt = form.witt_decompose()?;
        if witt.n < 1 {
            return Err(PolarError::RankTooSmall(witt.n));
        }
        let q = form.field().order() as u64;
        let scanned = (q.saturating_pow(form.dim() as u32) - 1) / (q - 1);
        if scanned > budget.projective_points {
            return Err(PolarError::TooLarge {
                what: "projective points".into(),
                estimate: scanned,
                budget: budget.projective_points,
            });
        }
        let empty = SubspaceTable::from_sorted(form.dim(), 0, Vec::new(), 1);
        let points = extend_level(&form, &empty, u64::MAX)?;
        let point_vecs = points.raw().to_vec();
        Ok(PolarModel {
            form,
            witt,
            descriptor,
            budget,
            levels: vec![Arc::new(empty), Arc::new(points)],
            point_vecs,
            perp_cache: OnceLock::new(),
        })
    }

    /// Rebuilds a model from cached levels; the caller vouches for their
    /// correctness (checked against a checksum by the cache layer).
    pub fn from_levels(
        form: Form,
        descriptor: String,
        budget: Budget,
        levels: Vec<SubspaceTable>,
    ) -> Result<PolarModel, PolarError> {
        let witt = form.witt_decompose()?;
        let point_vecs = levels.get(1).map(|t| t.raw().to_vec()).unwrap_or_default();
        Ok(PolarModel {
            form,
            witt,
            descriptor,
            budget,
            levels: levels.into_iter().map(Arc::new).collect(),
            point_vecs,
            perp_cache: OnceLock::new(),
        })
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn field(&self) -> &crate::gf::Field {
        self.form.field()
    }

    pub fn witt(&self) -> &WittData {
        &self.witt
    }

    pub fn invariants(&self) -> Invariants {
        (&self.witt).into()
    }

    pub fn rank(&self) -> usize {
        self.witt.n
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn num_points(&self) -> usize {
        self.levels[1].len()
    }

    /// Normalized coordinates of point `id`.
    #[inline]
    pub fn point(&self, id: usize) -> &[Elem] {
        let n = self.dim();
        &self.point_vecs[id * n..(id + 1) * n]
    }

    /// ID of the point spanned by a nonzero vector, if it is singular.
    pub fn point_id(&self, v: &[Elem]) -> Option<u32> {
        let mut w = v.to_vec();
        if !linalg::normalize(self.field(), &mut w) {
            return None;
        }
        self.levels[1].find(&w)
    }

    /// Builds every level up to `S_k`.
    pub fn ensure_level(&mut self, k: usize) -> Result<(), PolarError> {
        if k > self.rank() {
            return Err(PolarError::LevelOutOfRange { k, n: self.rank() });
        }
        while self.levels.len() <= k {
            let next = extend_level(&self.form, self.levels.last().unwrap(), self.budget.grassmann_points)?;
            self.levels.push(Arc::new(next));
        }
        Ok(())
    }

    /// `S_k`, which must already be built.
    pub fn level(&self, k: usize) -> Result<&SubspaceTable, PolarError> {
        if k > self.rank() {
            return Err(PolarError::LevelOutOfRange { k, n: self.rank() });
        }
        self.levels
            .get(k)
            .map(|t| &**t)
            .ok_or(PolarError::LevelOutOfRange { k, n: self.levels.len() - 1 })
    }

    /// Shared handle to `S_k`, which must already be built.
    pub fn level_arc(&self, k: usize) -> Result<Arc<SubspaceTable>, PolarError> {
        self.level(k)?;
        Ok(self.levels[k].clone())
    }

    pub fn levels_built(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn is_totally_singular(&self, s: &Subspace) -> bool {
        let rows = s.row_vecs();
        rows.iter().all(|r| self.form.is_singular(r))
            && rows
                .iter()
                .enumerate()
                .all(|(i, a)| rows[i + 1..].iter().all(|b| self.form.pair(a, b) == 0))
    }

    pub fn collinear(&self, a: usize, b: usize) -> bool {
        self.form.pair(self.point(a), self.point(b)) == 0
    }

    /// Points of `S^⊥`.
    pub fn perp(&self, s: &Subspace) -> BitSet {
        let f = self.field();
        let funcs: Vec<Vec<Elem>> = s.rows().map(|r| self.form.functional(r)).collect();
        let mut out = BitSet::new(self.num_points());
        for id in 0..self.num_points() {
            let p = self.point(id);
            if funcs.iter().all(|a| linalg::dot(f, a, p) == 0) {
                out.insert(id);
            }
        }
        out
    }

    /// `x^⊥` for a point, served from a cache on small models.
    pub fn point_perp(&self, id: usize) -> BitSet {
        let cache = self.perp_cache.get_or_init(|| {
            (self.num_points() <= self.budget.perp_cache_points).then(|| {
                (0..self.num_points())
                    .into_par_iter()
                    .map(|i| self.perp(&Subspace::point(self.field(), self.point(i))))
                    .collect()
            })
        });
        match cache {
            Some(c) => c[id].clone(),
            None => self.perp(&Subspace::point(self.field(), self.point(id))),
        }
    }

    /// The frame `{[u_i], [v_i]}` of the Witt decomposition, as point-ID pairs.
    pub fn frame(&self) -> Vec<[u32; 2]> {
        let frame: Vec<[u32; 2]> = self
            .witt
            .pairs
            .iter()
            .map(|(u, v)| {
                [
                    self.point_id(u).expect("hyperbolic vectors are singular"),
                    self.point_id(v).expect("hyperbolic vectors are singular"),
                ]
            })
            .collect();
        debug_assert!(frame_pattern_holds(self, &frame));
        frame
    }

    fn hyperplane_from(&self, kind: HyperplaneKind, functional: Vec<Elem>) -> Result<Hyperplane, PolarError> {
        let f = self.field();
        if functional.iter().all(|&a| a == 0) {
            return Err(PolarError::WrongSeed("the functional is zero".into()));
        }
        let mut members = BitSet::new(self.num_points());
        for id in 0..self.num_points() {
            if linalg::dot(f, &functional, self.point(id)) == 0 {
                members.insert(id);
            }
        }
        let kernel = Subspace::annihilator(f, self.dim(), &[functional.clone()]);
        let local = self.form.restrict(&kernel.row_vecs());
        let singular_rad: Vec<Vec<Elem>> =
            local.radical().points(f).into_iter().filter(|v| local.is_singular(v)).collect();
        let radical = Subspace::from_rows(f, local.dim(), &singular_rad)?.map_from_local(f, &kernel.row_vecs());
        let induced = match local.witt_decompose() {
            Ok(w) => Some(Invariants::from(&w)),
            Err(_) => None,
        };
        Ok(Hyperplane {
            kind,
            functional,
            members,
            induced,
            radical,
        })
    }

    /// The singular hyperplane `x^⊥` with deep point `x`.
    pub fn singular_hyperplane(&self, deep: u32) -> Result<Hyperplane, PolarError> {
        if deep as usize >= self.num_points() {
            return Err(PolarError::WrongSeed(format!("{deep} is not a point ID")));
        }
        let functional = self.form.functional(self.point(deep as usize));
        self.hyperplane_from(HyperplaneKind::Singular { deep }, functional)
    }

    /// The pole section `p^⊥ ∩ P` of a non-singular vector `p`.
    pub fn pole_hyperplane(&self, pole: &[Elem]) -> Result<Hyperplane, PolarError> {
        if pole.len() != self.dim() || self.form.value(pole) == 0 {
            return Err(PolarError::WrongSeed("a pole must be a non-singular vector".into()));
        }
        let functional = self.form.functional(pole);
        if functional.iter().all(|&a| a == 0) {
            return Err(PolarError::WrongSeed(
                "the pole lies in the radical of the bilinear form; use a section".into(),
            ));
        }
        let mut p = pole.to_vec();
        linalg::normalize(self.field(), &mut p);
        self.hyperplane_from(HyperplaneKind::Pole { pole: p }, functional)
    }

    /// The section of the polar space by the kernel of a linear functional.
    pub fn section_hyperplane(&self, functional: &[Elem]) -> Result<Hyperplane, PolarError> {
        if functional.len() != self.dim() {
            return Err(PolarError::WrongSeed("functional has the wrong length".into()));
        }
        self.hyperplane_from(HyperplaneKind::Section, functional.to_vec())
    }

    /// The upper residue of a singular subspace, realized on a complement of
    /// `X` inside `X^⊥` with the induced form.
    pub fn upper_residue(&self, x: &Subspace) -> Result<Residue, PolarError> {
        if !self.is_totally_singular(x) || x.dim() != self.dim() {
            return Err(PolarError::NotInModel);
        }
        if x.rank() >= self.rank() {
            return Err(PolarError::ResidueUndefined { k: x.rank() });
        }
        residue_of(&self.form, x)
    }
}

fn frame_pattern_holds(model: &PolarModel, frame: &[[u32; 2]]) -> bool {
    frame.iter().enumerate().all(|(i, a)| {
        frame.iter().enumerate().all(|(j, b)| {
            let cross = model.collinear(a[0] as usize, b[1] as usize);
            model.collinear(a[0] as usize, b[0] as usize)
                && model.collinear(a[1] as usize, b[1] as usize)
                && cross == (i != j)
        })
    })
}

/// Complement of a totally singular `x` inside `x^⊥`, with the induced form.
pub(crate) fn residue_of(form: &Form, x: &Subspace) -> Result<Residue, PolarError> {
    let f = form.field();
    let funcs: Vec<Vec<Elem>> = x.rows().map(|r| form.functional(r)).collect();
    let xperp = Subspace::annihilator(f, form.dim(), &funcs);
    let mut reducer = linalg::RowReducer::new(form.dim());
    for r in x.rows() {
        reducer.insert(f, r);
    }
    let complement: Vec<Vec<Elem>> = xperp.rows().filter(|r| reducer.insert(f, r)).map(<[Elem]>::to_vec).collect();
    let local = form.restrict(&complement);
    local.check_nondegenerate()?;
    Ok(Residue {
        base: x.clone(),
        complement,
        form: local,
    })
}

/// Upper residue `Res(X)↑` realized on a complement `C` of `X` in `X^⊥`.
#[derive(Clone, Debug)]
pub struct Residue {
    pub base: Subspace,
    /// Basis of `C` in ambient coordinates.
    pub complement: Vec<Vec<Elem>>,
    /// The induced form in coordinates relative to `complement`.
    pub form: Form,
}

impl Residue {
    /// `⟨X, C-subspace⟩` for a subspace given in local coordinates.
    pub fn lift(&self, local: &Subspace) -> Subspace {
        let f = self.form.field();
        let image = local.map_from_local(f, &self.complement);
        self.base.sum(f, &image).expect("same ambient space")
    }

    pub fn model(&self, budget: Budget) -> Result<PolarModel, PolarError> {
        PolarModel::new(self.form.clone(), budget)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HyperplaneKind {
    Singular { deep: u32 },
    Pole { pole: Vec<Elem> },
    Section,
}

/// A hyperplane of the polar space, cut out by a linear functional.
#[derive(Clone, Debug)]
pub struct Hyperplane {
    pub kind: HyperplaneKind,
    pub functional: Vec<Elem>,
    pub members: BitSet,
    /// Invariants of the induced polar space when it is non-degenerate.
    pub induced: Option<Invariants>,
    /// Singular vectors of the induced radical, in ambient coordinates.
    pub radical: Subspace,
}

impl Hyperplane {
    pub fn contains_vector(&self, f: &crate::gf::Field, v: &[Elem]) -> bool {
        linalg::dot(f, &self.functional, v) == 0
    }

    pub fn contains_subspace(&self, f: &crate::gf::Field, s: &Subspace) -> bool {
        s.rows().all(|r| self.contains_vector(f, r))
    }
}

/// A non-degenerate subspace of a form, with its own coordinates chosen as a
/// Witt basis (hyperbolic pairs first, then the anisotropic kernel).
#[derive(Clone, Debug)]
pub struct SubModel {
    /// The induced form in local Witt coordinates.
    pub form: Form,
    /// Local basis in ambient coordinates.
    pub basis: Vec<Vec<Elem>>,
    pub witt: WittData,
}

impl SubModel {
    pub fn whole(form: &Form) -> Result<SubModel, PolarError> {
        let n = form.dim();
        let id: Vec<Vec<Elem>> = Subspace::full(n).row_vecs();
        SubModel::from_ambient(form, &id)
    }

    /// The subspace spanned by `rows` (ambient coordinates) of `form`.
    pub fn from_ambient(form: &Form, rows: &[Vec<Elem>]) -> Result<SubModel, PolarError> {
        let local = form.restrict(rows);
        let witt = local.witt_decompose()?;
        let f = form.field();
        let wb = witt.basis();
        let basis: Vec<Vec<Elem>> = wb.iter().map(|c| linalg::combine(f, c, rows)).collect();
        let form = form.restrict(&basis);
        let witt = form.witt_decompose()?;
        Ok(SubModel { form, basis, witt })
    }

    /// The subspace spanned by `local_rows`, given in this model's coordinates.
    pub fn sub(&self, ambient_form: &Form, local_rows: &[Vec<Elem>]) -> Result<SubModel, PolarError> {
        let f = self.form.field();
        let rows: Vec<Vec<Elem>> = local_rows.iter().map(|c| linalg::combine(f, c, &self.basis)).collect();
        SubModel::from_ambient(ambient_form, &rows)
    }

    pub fn rank(&self) -> usize {
        self.witt.n
    }

    pub fn defect(&self) -> usize {
        self.witt.d
    }

    pub fn local_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_ambient_vec(&self, local: &[Elem]) -> Vec<Elem> {
        linalg::combine(self.form.field(), local, &self.basis)
    }

    pub fn to_ambient(&self, s: &Subspace) -> Subspace {
        s.map_from_local(self.form.field(), &self.basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::standard_form;

    fn model(d: &str) -> PolarModel {
        PolarModel::parse(d, Budget::DEFAULT).unwrap()
    }

    fn brute_force_points(d: &str) -> usize {
        let form = standard_form(d).unwrap();
        linalg::normalized_vectors(form.field(), form.dim())
            .filter(|v| form.is_singular(v))
            .count()
    }

    #[test]
    fn point_counts_match_brute_force() {
        for (d, expected) in [("Qplus(3,2)", 35), ("Qparab(3,2)", 63), ("H(2,1,2)", 165)] {
            assert_eq!(model(d).num_points(), expected, "{d}");
            assert_eq!(brute_force_points(d), expected);
        }
        assert_eq!(model("Qminus(2,2)").num_points(), 27);
    }

    #[test]
    fn level_counts() {
        let mut m = model("Qplus(3,2)");
        m.ensure_level(3).unwrap();
        assert_eq!(m.level(2).unwrap().len(), 105);
        assert_eq!(m.level(3).unwrap().len(), 30);
        assert!(m.ensure_level(4).is_err());
        let mut h = model("H(3,0,2)");
        h.ensure_level(3).unwrap();
        assert_eq!(h.level(3).unwrap().len(), 891);
        let mut h = model("H(2,1,2)");
        h.ensure_level(2).unwrap();
        assert_eq!(h.level(2).unwrap().len(), 297);
    }

    #[test]
    fn lines_by_brute_force() {
        // Every pair of collinear points spans a line; count lines as
        // collinear pairs divided by pairs per line.
        let m = model("Qplus(3,2)");
        let np = m.num_points();
        let mut pairs = 0;
        for a in 0..np {
            for b in a + 1..np {
                if m.collinear(a, b) {
                    pairs += 1;
                }
            }
        }
        assert_eq!(pairs / 3, 105);
    }

    #[test]
    fn enumerated_subspaces_are_totally_singular_and_canonical() {
        let mut m = model("Qparab(3,3)");
        m.ensure_level(3).unwrap();
        let f = m.field().clone();
        for k in 1..=3 {
            let t = m.level(k).unwrap();
            for id in (0..t.len()).step_by(7) {
                let s = t.subspace(id);
                assert!(m.is_totally_singular(&s));
                assert_eq!(Subspace::from_rows(&f, 7, &s.row_vecs()).unwrap(), s);
                assert_eq!(t.id_of(&s), Some(id as u32));
            }
        }
    }

    #[test]
    fn maximal_subspace_regularity() {
        let mut m = model("Qparab(3,2)");
        m.ensure_level(3).unwrap();
        let f = m.field().clone();
        let planes = m.level(3).unwrap();
        let mut per_point = vec![0; m.num_points()];
        for id in 0..planes.len() {
            for p in planes.subspace(id).points(&f) {
                per_point[m.point_id(&p).unwrap() as usize] += 1;
            }
        }
        assert!(per_point.iter().all(|&c| c == per_point[0]));
    }

    #[test]
    fn budget_is_enforced() {
        let tiny = Budget {
            projective_points: 10,
            ..Budget::DEFAULT
        };
        assert!(matches!(
            PolarModel::parse("Qplus(3,2)", tiny),
            Err(PolarError::TooLarge { estimate: 63, .. })
        ));
        let mut m = PolarModel::parse(
            "Qplus(3,2)",
            Budget {
                grassmann_points: 50,
                ..Budget::DEFAULT
            },
        )
        .unwrap();
        assert!(matches!(m.ensure_level(2), Err(PolarError::TooLarge { .. })));
    }

    #[test]
    fn frames() {
        let m = model("Qplus(3,2)");
        let frame = m.frame();
        assert_eq!(frame.len(), 3);
        assert!(frame_pattern_holds(&m, &frame));
        let pts: Vec<Vec<Elem>> = frame.iter().map(|p| m.point(p[0] as usize).to_vec()).collect();
        assert_eq!(pts, vec![vec![1, 0, 0, 0, 0, 0], vec![0, 0, 1, 0, 0, 0], vec![0, 0, 0, 0, 1, 0]]);
    }

    #[test]
    fn hyperplanes() {
        let m = model("Qparab(3,2)");
        // Sections not through the nucleus e7: Q+(5,2) or Q-(5,2).
        let mut sizes = std::collections::BTreeSet::new();
        for a in linalg::normalized_vectors(m.field(), 7) {
            let h = m.section_hyperplane(&a).unwrap();
            if let Some(inv) = h.induced {
                sizes.insert((h.members.count(), inv.n, inv.d));
            }
        }
        assert!(sizes.contains(&(35, 3, 0)));
        assert!(sizes.contains(&(27, 2, 2)));
        // The nucleus is not a usable pole.
        assert!(m.pole_hyperplane(&[0, 0, 0, 0, 0, 0, 1]).is_err());

        let s = m.singular_hyperplane(0).unwrap();
        assert_eq!(s.radical.row_vecs(), vec![m.point(0).to_vec()]);
        assert_eq!(s.members, m.point_perp(0));

        let h = model("H(2,1,2)");
        let f = h.field().clone();
        for pole in linalg::normalized_vectors(&f, 5).filter(|v| !h.form().is_singular(v)) {
            let hp = h.pole_hyperplane(&pole).unwrap();
            let inv = hp.induced.unwrap();
            assert_eq!((inv.n, inv.d), (2, 0));
        }
    }

    #[test]
    fn hyperplanes_meet_every_line() {
        let mut m = model("Qparab(3,2)");
        m.ensure_level(2).unwrap();
        let f = m.field().clone();
        let lines = m.level(2).unwrap();
        for a in linalg::normalized_vectors(&f, 7).step_by(5) {
            let h = m.section_hyperplane(&a).unwrap();
            for id in 0..lines.len() {
                let l = lines.subspace(id);
                assert!(l.points(&f).iter().any(|p| h.contains_vector(&f, p)));
            }
        }
    }

    #[test]
    fn residues() {
        let m = model("Qplus(3,2)");
        let p = Subspace::point(m.field(), m.point(0));
        let r = m.upper_residue(&p).unwrap();
        let rm = r.model(Budget::DEFAULT).unwrap();
        assert_eq!(rm.num_points(), 9);
        assert_eq!(rm.rank(), 2);
        for id in 0..rm.num_points() {
            let line = r.lift(&Subspace::point(rm.field(), rm.point(id)));
            assert_eq!(line.rank(), 2);
            assert!(m.is_totally_singular(&line));
        }
        let h = model("H(2,1,2)");
        let r = h.upper_residue(&Subspace::point(h.field(), h.point(0))).unwrap();
        assert_eq!(r.model(Budget::DEFAULT).unwrap().num_points(), 9);

        let mut full = model("Qplus(3,2)");
        full.ensure_level(3).unwrap();
        let plane = full.level(3).unwrap().subspace(0);
        assert!(matches!(full.upper_residue(&plane), Err(PolarError::ResidueUndefined { .. })));
        let perp = full.perp(&plane);
        let f = full.field().clone();
        for pt in plane.points(&f) {
            assert!(perp.contains(full.point_id(&pt).unwrap() as usize));
        }
    }

    #[test]
    fn hyperbolic_lines_are_cocliques() {
        let m = model("Qparab(3,3)");
        let (x, y) = (0..m.num_points())
            .flat_map(|a| (0..m.num_points()).map(move |b| (a, b)))
            .find(|&(a, b)| !m.collinear(a, b))
            .unwrap();
        let mut both = m.point_perp(x);
        both.intersect_with(&m.point_perp(y));
        let mut dperp = BitSet::full(m.num_points());
        for z in both.iter() {
            dperp.intersect_with(&m.point_perp(z));
        }
        assert!(dperp.contains(x) && dperp.contains(y));
        let members: Vec<usize> = dperp.iter().collect();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                assert!(!m.collinear(a, b));
            }
        }
    }

    #[test]
    fn complement_of_hyperplane_is_connected() {
        let m = model("Qparab(3,2)");
        for a in linalg::normalized_vectors(m.field(), 7) {
            let h = m.section_hyperplane(&a).unwrap();
            let outside: Vec<usize> = (0..m.num_points()).filter(|&p| !h.members.contains(p)).collect();
            let mut seen = BitSet::new(m.num_points());
            let mut stack = vec![outside[0]];
            seen.insert(outside[0]);
            while let Some(p) = stack.pop() {
                for &r in &outside {
                    if r != p && m.collinear(p, r) && seen.insert(r) {
                        stack.push(r);
                    }
                }
            }
            assert!(outside.iter().all(|&p| seen.contains(p)));
        }
    }

    #[test]
    fn submodels_use_witt_coordinates() {
        let form = standard_form("Qparab(3,3)").unwrap();
        let whole = SubModel::whole(&form).unwrap();
        assert_eq!((whole.rank(), whole.defect()), (3, 1));
        let k = whole.sub(&form, &Subspace::full(7).row_vecs()[..6]).unwrap();
        assert_eq!((k.rank(), k.defect()), (3, 0));
    }
}
