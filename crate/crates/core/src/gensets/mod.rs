//! Generating sets for polar Grassmannians: apartments, the hyperplane
//! constructions `S_k(H) ∪ S_k(p0) ∪ Ĝ`, the recursive constructions for
//! Hermitian and orthogonal Grassmannians, and subfield rationality tools.

mod fixtures;
mod recursive;
mod subfield;

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::forms::{Form, FormError};
use crate::gf::{Elem, Field, FieldError, Subfield};
use crate::grassmann::{Geometry, GrassmannError};
use crate::linalg::{self, LinalgError, Subspace};
use crate::polar::{Budget, Hyperplane, PolarError, PolarModel, SubModel};

pub use fixtures::{
    load_fixture, parse_fixture, verify_fixture, FixtureBundle, FixtureInstance, FixtureReport, Identity, IdentityResult,
    NamedRows, FIXTURE_NAMES,
};
pub use recursive::{generic_genset, hermitian_genset, orth_q2_genset};
pub use subfield::{
    cor54_adjoin, gset_predicate, is_k_rational_somewhere, omega_obstruction, rational_line_through,
    rational_lines, GsetVerdict, GsetWitness, OmegaReport, PlaneReport, SubfieldContext,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GensetError {
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("no admissible extension Ẑ of {0}")]
    NoExtension(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("subspace is not a point of the geometry: {0:?}")]
    NotAPoint(Subspace),
    #[error("verification failed: {0}")]
    Verification(String),
}

/// A set of singular subspaces with a provenance tag for each element.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GenSet {
    pub elements: Vec<Subspace>,
    pub tags: Vec<String>,
    /// Free-form remarks about how the set was obtained.
    pub notes: Vec<String>,
}

impl GenSet {
    pub fn new() -> GenSet {
        GenSet::default()
    }

    /// Adds `s` unless already present; returns whether it was new.
    pub fn push(&mut self, s: Subspace, tag: impl Into<String>) -> bool {
        if self.elements.contains(&s) {
            return false;
        }
        self.elements.push(s);
        self.tags.push(tag.into());
        true
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Point IDs of the elements in `geom`.
    pub fn ids(&self, geom: &Geometry) -> Result<Vec<u32>, GensetError> {
        self.elements
            .iter()
            .map(|s| geom.id_of(s).ok_or_else(|| GensetError::NotAPoint(s.clone())))
            .collect()
    }

    pub fn is_rational(&self, sub: &Subfield) -> bool {
        self.elements.iter().all(|s| s.is_rational(sub))
    }

    /// Number of elements per tag.
    pub fn tag_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for t in &self.tags {
            *out.entry(t.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// The `2^n` maximal subspaces spanned by maximal cliques of the frame of
/// the model's Witt decomposition.
pub fn apartment(model: &PolarModel) -> Result<GenSet, GensetError> {
    let f = model.field();
    let frame = model.frame();
    let n = frame.len();
    let mut out = GenSet::new();
    for mask in 0..1usize << n {
        let rows: Vec<Vec<Elem>> = frame
            .iter()
            .enumerate()
            .map(|(i, pair)| model.point(pair[(mask >> i) & 1] as usize).to_vec())
            .collect();
        let s = Subspace::from_rows(f, model.dim(), &rows)?;
        if s.rank() != n || !model.is_totally_singular(&s) {
            return Err(GensetError::Verification(format!(
                "frame clique {mask:b} does not span a maximal singular subspace"
            )));
        }
        out.push(s, "apartment");
    }
    Ok(out)
}

/// Calls `visit` on every normalized coefficient vector of length `n` with
/// entries from `elems` (which starts with 0 and contains 1), in order of the
/// leading position and then odometer order. Stops at the first `true`.
pub(crate) fn scan_coeffs(elems: &[Elem], n: usize, visit: &mut dyn FnMut(&[Elem]) -> bool) -> bool {
    let mut v = vec![0; n];
    for lead in 0..n {
        v.fill(0);
        v[lead] = 1;
        let tail = n - lead - 1;
        let mut idx = vec![0usize; tail];
        'odometer: loop {
            for (j, &i) in idx.iter().enumerate() {
                v[lead + 1 + j] = elems[i];
            }
            if visit(&v) {
                return true;
            }
            let mut pos = tail;
            loop {
                if pos == 0 {
                    break 'odometer;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < elems.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
    false
}

/// Scans the nonzero vectors of `span(basis)` up to scalars, first those
/// with coefficients in `prefer`, then all of them.
pub(crate) fn scan_span(
    f: &Field,
    basis: &[Vec<Elem>],
    prefer: Option<&Subfield>,
    visit: &mut dyn FnMut(&[Elem]) -> bool,
) -> bool {
    let mut wrapped = |c: &[Elem]| visit(&linalg::combine(f, c, basis));
    if let Some(sub) = prefer {
        if scan_coeffs(&sub.elements(), basis.len(), &mut wrapped) {
            return true;
        }
    }
    let all: Vec<Elem> = f.elements().collect();
    scan_coeffs(&all, basis.len(), &mut wrapped)
}

fn perp_of(form: &Form, vectors: &[&[Elem]]) -> Subspace {
    let funcs: Vec<Vec<Elem>> = vectors.iter().map(|v| form.functional(v)).collect();
    Subspace::annihilator(form.field(), form.dim(), &funcs)
}

/// Extends a totally singular `z ⊆ k_space ∩ p0^⊥` inside `space` to
/// `Ẑ = z + ⟨a, b⟩` with `Ẑ ⊄ K ∪ p0^⊥` and `Ẑ ∩ K ≠ Ẑ ∩ p0^⊥`.
///
/// `a` runs over singular vectors of `K ∩ z^⊥` with `f(a,p0) ≠ 0`, and `b`
/// over singular vectors of `space ∩ p0^⊥ ∩ z^⊥ ∩ a^⊥` outside `K`. Every
/// admissible `Ẑ` arises this way, so the search is complete.
pub(crate) fn extend_hat(
    form: &Form,
    space: &Subspace,
    k_space: &Subspace,
    p0: &[Elem],
    z: &Subspace,
    prefer: Option<&Subfield>,
) -> Result<Subspace, GensetError> {
    let f = form.field();
    let zrows: Vec<&[Elem]> = z.rows().collect();
    let a_space = k_space.intersect(f, &perp_of(form, &zrows))?;
    let a_basis = a_space.row_vecs();
    let mut found: Option<Subspace> = None;
    scan_span(f, &a_basis, prefer, &mut |a| {
        if !form.is_singular(a) || form.pair(a, p0) == 0 {
            return false;
        }
        let mut cond: Vec<&[Elem]> = zrows.clone();
        cond.push(a);
        cond.push(p0);
        let b_space = match space.intersect(f, &perp_of(form, &cond)) {
            Ok(s) => s,
            Err(_) => return false,
        };
        let b_basis = b_space.row_vecs();
        let mut hat = None;
        scan_span(f, &b_basis, prefer, &mut |b| {
            if form.is_singular(b) && !k_space.contains_vector(f, b) {
                let mut rows = z.row_vecs();
                rows.push(a.to_vec());
                rows.push(b.to_vec());
                hat = Subspace::from_rows(f, z.dim(), &rows).ok();
                return hat.is_some();
            }
            false
        });
        found = hat;
        found.is_some()
    });
    found.ok_or_else(|| GensetError::NoExtension(format!("{:?}", z.row_vecs())))
}

/// Checks `Ẑ ⊄ H`, `Ẑ ⊄ p0^⊥` and `Ẑ ∩ H ≠ Ẑ ∩ p0^⊥` for a hyperplane given
/// by its functional.
fn hat_conditions(form: &Form, functional: &[Elem], p0: &[Elem], hat: &Subspace) -> Result<(), String> {
    let f = form.field();
    let h = Subspace::annihilator(f, form.dim(), &[functional.to_vec()]);
    let pp = perp_of(form, &[p0]);
    if h.contains(f, hat) {
        return Err("the subspace lies in H".into());
    }
    if pp.contains(f, hat) {
        return Err("the subspace lies in p0^⊥".into());
    }
    let a = hat.intersect(f, &h).map_err(|e| e.to_string())?;
    let b = hat.intersect(f, &pp).map_err(|e| e.to_string())?;
    if a == b {
        return Err("H and p0^⊥ meet the subspace in the same hyperplane".into());
    }
    Ok(())
}

fn check_p0(model: &PolarModel, functional: &[Elem], p0: &[Elem]) -> Result<(), GensetError> {
    let f = model.field();
    if p0.len() != model.dim() || p0.iter().all(|&x| x == 0) || !model.form().is_singular(p0) {
        return Err(GensetError::Hypothesis("p0 must be a singular point".into()));
    }
    if linalg::dot(f, functional, p0) == 0 {
        return Err(GensetError::Hypothesis("p0 must not lie in H".into()));
    }
    Ok(())
}

/// `S_k(H)` and `S_k(p0)` by a scan of the level table.
fn hyperplane_and_star(
    model: &mut PolarModel,
    k: usize,
    functional: &[Elem],
    p0: &[Elem],
    out: &mut GenSet,
) -> Result<(), GensetError> {
    model.ensure_level(k)?;
    let f = model.field().clone();
    let table = model.level(k)?;
    let dim = model.dim();
    let mut star = Vec::new();
    for id in 0..table.len() {
        let rows = table.get(id);
        let s = Subspace::from_canonical(dim, rows.to_vec());
        if s.rows().all(|r| linalg::dot(&f, functional, r) == 0) {
            out.push(s, "S_k(H)");
        } else if s.contains_vector(&f, p0) {
            star.push(s);
        }
    }
    for s in star {
        out.push(s, "S_k(p0)");
    }
    Ok(())
}

/// `S_2(H) ∪ S_2(p0) ∪ {ℓ0}`.
pub fn genset_k2(model: &mut PolarModel, h: &Hyperplane, p0: &[Elem], l0: &Subspace) -> Result<GenSet, GensetError> {
    if model.rank() <= 2 {
        return Err(GensetError::Hypothesis(format!("n > 2 is required, the rank is {}", model.rank())));
    }
    check_p0(model, &h.functional, p0)?;
    check_line(model, &h.functional, p0, l0)?;
    let mut out = GenSet::new();
    hyperplane_and_star(model, 2, &h.functional, p0, &mut out)?;
    out.push(l0.clone(), "hat-Z");
    Ok(out)
}

fn check_line(model: &PolarModel, functional: &[Elem], p0: &[Elem], l0: &Subspace) -> Result<(), GensetError> {
    if l0.rank() != 2 || l0.dim() != model.dim() || !model.is_totally_singular(l0) {
        return Err(GensetError::Hypothesis("ℓ0 must be a singular line".into()));
    }
    hat_conditions(model.form(), functional, p0, l0).map_err(|e| GensetError::Hypothesis(format!("ℓ0: {e}")))
}

/// `S_k(H) ∪ S_k(p0) ∪ Ĝ`, with `Ĝ` obtained by extending each member of a
/// generating set of `(H ∩ p0^⊥)_{k−2}`. When `inner` is `None` that set is
/// built recursively.
pub fn genset_k(
    model: &mut PolarModel,
    h: &Hyperplane,
    p0: &[Elem],
    k: usize,
    inner: Option<&[Subspace]>,
) -> Result<GenSet, GensetError> {
    let n = model.rank();
    if k < 2 || k >= n {
        return Err(GensetError::Hypothesis(format!("2 ≤ k < n is required, got k={k}, n={n}")));
    }
    check_p0(model, &h.functional, p0)?;
    let form = model.form().clone();
    let f = form.field();
    let h_space = Subspace::annihilator(f, form.dim(), &[h.functional.clone()]);
    let inner_space = h_space.intersect(f, &perp_of(&form, &[p0]))?;
    let mut out = GenSet::new();
    let inner_set = resolve_inner(&form, &inner_space, k - 2, inner, model.budget(), &mut out)?;
    hyperplane_and_star(model, k, &h.functional, p0, &mut out)?;
    let whole = Subspace::full(form.dim());
    for z in &inner_set {
        if !h_space.contains(f, z) || !perp_of(&form, &[p0]).contains(f, z) {
            return Err(GensetError::Hypothesis("inner elements must lie in H ∩ p0^⊥".into()));
        }
        let hat = extend_hat(&form, &whole, &h_space, p0, z, None)?;
        hat_conditions(&form, &h.functional, p0, &hat).map_err(GensetError::Verification)?;
        out.push(hat, "hat-Z");
    }
    Ok(out)
}

fn resolve_inner(
    form: &Form,
    space: &Subspace,
    k: usize,
    given: Option<&[Subspace]>,
    budget: Budget,
    out: &mut GenSet,
) -> Result<Vec<Subspace>, GensetError> {
    if k == 0 {
        return Ok(vec![Subspace::empty(form.dim())]);
    }
    match given {
        Some(g) => Ok(g.to_vec()),
        None => {
            let sm = SubModel::from_ambient(form, &space.row_vecs())?;
            let g = generic_genset(form, &sm, k, budget)?;
            out.notes.extend(g.notes.iter().cloned());
            Ok(g.elements)
        }
    }
}

/// `S_k(q) ∪ S_k({q,p0}^⊥) ∪ S_k(p0) ∪ Ĝ` for non-collinear points `q`, `p0`,
/// with `Ĝ` built over `{q,p0}^⊥` and `H = q^⊥`.
pub fn genset_singular(
    model: &mut PolarModel,
    q: u32,
    p0: u32,
    k: usize,
    inner: Option<&[Subspace]>,
) -> Result<GenSet, GensetError> {
    let n = model.rank();
    if k < 2 {
        return Err(GensetError::Hypothesis("k ≥ 2 is required".into()));
    }
    if k + 1 >= n {
        return Err(GensetError::Hypothesis(format!(
            "k = {k} ≥ n − 1 = {}: {{q,p0}}^⊥ has rank n − 1, so its {k}-Grassmannian has no lines \
             and the construction gives nothing beyond listing it",
            n - 1
        )));
    }
    if model.collinear(q as usize, p0 as usize) {
        return Err(GensetError::Hypothesis("p0 must not lie in q^⊥".into()));
    }
    let form = model.form().clone();
    let f = form.field();
    let qv = model.point(q as usize).to_vec();
    let pv = model.point(p0 as usize).to_vec();
    let functional = form.functional(&qv);
    let h_space = perp_of(&form, &[&qv]);
    let both = perp_of(&form, &[&qv, &pv]);
    let mut out = GenSet::new();
    let inner_set = resolve_inner(&form, &both, k - 2, inner, model.budget(), &mut out)?;

    model.ensure_level(k)?;
    let table = model.level(k)?;
    let dim = model.dim();
    let (mut sq, mut sboth, mut sp) = (Vec::new(), Vec::new(), Vec::new());
    for id in 0..table.len() {
        let s = Subspace::from_canonical(dim, table.get(id).to_vec());
        if s.contains_vector(f, &qv) {
            sq.push(s);
        } else if both.contains(f, &s) {
            sboth.push(s);
        } else if s.contains_vector(f, &pv) {
            sp.push(s);
        }
    }
    for s in sq {
        out.push(s, "S_k(q)");
    }
    for s in sboth {
        out.push(s, "S_k({q,p0}^⊥)");
    }
    for s in sp {
        out.push(s, "S_k(p0)");
    }
    let whole = Subspace::full(dim);
    for z in &inner_set {
        let hat = extend_hat(&form, &whole, &h_space, &pv, z, None)?;
        hat_conditions(&form, &functional, &pv, &hat).map_err(GensetError::Verification)?;
        out.push(hat, "hat-Z");
    }
    Ok(out)
}

/// A random `(H, p0, ℓ0)` meeting the hypotheses of [`genset_k2`]: `H` is
/// the section by a random functional.
pub fn random_triple(
    model: &mut PolarModel,
    rng: &mut impl Rng,
) -> Result<(Hyperplane, Vec<Elem>, Subspace), GensetError> {
    model.ensure_level(2)?;
    let q = model.field().order() as Elem;
    let dim = model.dim();
    for _ in 0..1000 {
        let functional: Vec<Elem> = (0..dim).map(|_| rng.gen_range(0..q)).collect();
        if functional.iter().all(|&x| x == 0) {
            continue;
        }
        let f = model.field();
        let outside: Vec<usize> =
            (0..model.num_points()).filter(|&i| linalg::dot(f, &functional, model.point(i)) != 0).collect();
        if outside.is_empty() {
            continue;
        }
        let p0 = model.point(outside[rng.gen_range(0..outside.len())]).to_vec();
        let lines = model.level(2)?;
        for _ in 0..200 {
            let l0 = lines.subspace(rng.gen_range(0..lines.len()));
            if hat_conditions(model.form(), &functional, &p0, &l0).is_ok() {
                let h = model.section_hyperplane(&functional)?;
                return Ok((h, p0, l0));
            }
        }
    }
    Err(GensetError::Hypothesis("no valid (H, p0, ℓ0) found after 1000 attempts".into()))
}

/// Distinct elements, in first-occurrence order.
pub(crate) fn dedup(v: Vec<(Subspace, String)>) -> Vec<(Subspace, String)> {
    let mut seen = HashSet::new();
    v.into_iter().filter(|(s, _)| seen.insert(s.clone())).collect()
}
