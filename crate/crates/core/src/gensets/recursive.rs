//! Recursive assembly of generating sets of size `C(2n+d, k)`.
//!
//! A model of rank `m` and defect `δ` is handled in its local Witt
//! coordinates (`e_i`, `f_i` at positions `2i`, `2i+1`, the anisotropic
//! vectors after them). With `K` a hyperplane and `p0 ∉ K` a singular point,
//! the set is `G(K) ∪ {⟨p0,Y⟩ : Y ∈ G(C)} ∪ {Ẑ : Z ∈ G(D)}` where
//! `C ≅ Res(p0)` and `D = K ∩ p0^⊥`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dedup, extend_hat, GenSet, GensetError};
use crate::forms::{standard_form, Form, FormKind};
use crate::gf::{Elem, Field, Subfield};
use crate::grassmann::{build_grassmannian, greedy_minimize, is_generating, Geometry};
use crate::linalg::{self, Subspace};
use crate::polar::{Budget, PolarModel, SubModel};

type Tagged = Vec<(Subspace, String)>;

const SEARCH_SEED: u64 = 0x5eed_0001;
const SEARCH_TRIES: usize = 24;

struct Builder {
    ambient: Form,
    budget: Budget,
    prefer: Option<Subfield>,
    /// Base sets for defect 0 and `k = m − 1`, in local coordinates.
    cache: HashMap<(usize, usize), Vec<Subspace>>,
    /// Lines of `Qparab(3,q)` in standard coordinates, used for every
    /// rank-3 parabolic piece at `k = 2`.
    orth_base: Option<Vec<Subspace>>,
    notes: Vec<String>,
}

fn unit(n: usize, i: usize) -> Vec<Elem> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

impl Builder {
    fn new(ambient: Form, budget: Budget, prefer: Option<Subfield>) -> Builder {
        Builder {
            ambient,
            budget,
            prefer,
            cache: HashMap::new(),
            orth_base: None,
            notes: Vec::new(),
        }
    }

    fn field(&self) -> &Field {
        self.ambient.field()
    }

    fn note(&mut self, s: String) {
        if !self.notes.contains(&s) {
            self.notes.push(s);
        }
    }

    /// `e1 + c f1 + w` with `c` chosen to make it singular.
    fn chain_point(&self, sm: &SubModel, w: usize) -> Vec<Elem> {
        let form = &sm.form;
        let f = form.field();
        let l = sm.local_dim();
        let t = f.neg(form.value(&unit(l, w)));
        let c = match form.kind() {
            FormKind::Hermitian => form.trace_preimage(t),
            _ => t,
        };
        let mut v = unit(l, w);
        v[0] = 1;
        v[1] = c;
        debug_assert!(form.is_singular(&v));
        v
    }

    fn span(&self, sm: &SubModel) -> Subspace {
        Subspace::from_rows(self.field(), self.ambient.dim(), &sm.basis).expect("basis rows have ambient length")
    }

    fn build(&mut self, sm: &SubModel, k: usize, tag: &str) -> Result<Tagged, GensetError> {
        let dim = self.ambient.dim();
        let (m, delta, l) = (sm.rank(), sm.defect(), sm.local_dim());
        if k == 0 {
            return Ok(vec![(Subspace::empty(dim), tag.to_string())]);
        }
        if m == 0 || (k >= m && k != 1) {
            return Err(GensetError::Unsupported(format!(
                "the recursive construction needs k < rank, got k={k}, rank={m}"
            )));
        }
        if k == 1 {
            return Ok(self.points(sm, tag));
        }
        if self.orth_base.is_some() && sm.form.kind() == FormKind::Quadratic && m == 3 && delta == 1 && k == 2 {
            return self.orth_piece(sm, tag);
        }
        if delta == 0 && k == m - 1 {
            return self.base(sm, k, tag);
        }
        let form = sm.form.clone();
        let f = self.field().clone();
        let (k_rows, p0, c_rows, d_rows) = if delta >= 1 {
            let last = l - 1;
            let p0 = self.chain_point(sm, last);
            let k_rows: Vec<Vec<Elem>> = (0..last).map(|i| unit(l, i)).collect();
            let c = Subspace::annihilator(&f, l, &[form.functional(&p0), form.functional(&unit(l, 1))]);
            let d = Subspace::annihilator(&f, l, &[form.functional(&p0), unit(l, last)]);
            (k_rows, p0, c.row_vecs(), d.row_vecs())
        } else {
            let lambda = match form.kind() {
                FormKind::Hermitian => f
                    .elements()
                    .find(|&x| {
                        let mut v = unit(l, 2 * m - 2);
                        v[2 * m - 1] = x;
                        form.value(&v) != 0
                    })
                    .expect("the trace is onto"),
                _ => 1,
            };
            let mut k_rows: Vec<Vec<Elem>> = (0..2 * m - 2).map(|i| unit(l, i)).collect();
            let mut diag = unit(l, 2 * m - 2);
            diag[2 * m - 1] = lambda;
            k_rows.push(diag);
            let c_rows: Vec<Vec<Elem>> = (0..2 * m - 2).map(|i| unit(l, i)).collect();
            (k_rows, unit(l, 2 * m - 1), c_rows.clone(), c_rows)
        };
        let ksm = sm.sub(&self.ambient, &k_rows)?;
        let csm = sm.sub(&self.ambient, &c_rows)?;
        let dsm = sm.sub(&self.ambient, &d_rows)?;
        let p0_amb = sm.to_ambient_vec(&p0);

        let mut out = self.build(&ksm, k, &format!("{tag}/H"))?;
        for (y, t) in self.build(&csm, k - 1, &format!("{tag}/p0"))? {
            let s = y.sum(&f, &Subspace::point(&f, &p0_amb))?;
            out.push((s, t));
        }
        let space = self.span(sm);
        let k_space = self.span(&ksm);
        let prefer = self.prefer.clone();
        for (z, t) in self.build(&dsm, k - 2, &format!("{tag}/hat"))? {
            let hat = extend_hat(&self.ambient, &space, &k_space, &p0_amb, &z, prefer.as_ref())?;
            out.push((hat, t));
        }
        Ok(out)
    }

    /// Frame points plus one chain point per anisotropic basis vector.
    fn points(&self, sm: &SubModel, tag: &str) -> Tagged {
        let f = self.field();
        let l = sm.local_dim();
        let m = sm.rank();
        let mut out = Vec::new();
        for i in 0..2 * m {
            out.push((Subspace::point(f, &sm.to_ambient_vec(&unit(l, i))), format!("{tag}/frame")));
        }
        for w in 2 * m..l {
            let v = self.chain_point(sm, w);
            out.push((Subspace::point(f, &sm.to_ambient_vec(&v)), format!("{tag}/chain")));
        }
        out
    }

    fn orth_piece(&mut self, sm: &SubModel, tag: &str) -> Result<Tagged, GensetError> {
        let f = self.field().clone();
        let l = sm.local_dim();
        let c = sm.form.value(&unit(l, 6));
        let s = f
            .elements()
            .find(|&s| f.mul(s, s) == c)
            .ok_or_else(|| GensetError::Unsupported("anisotropic value is not a square".into()))?;
        let mut map: Vec<Vec<Elem>> = (0..6).map(|i| unit(l, i)).collect();
        map.push(linalg::scale(&f, f.inv(s)?, &unit(l, 6)));
        let base = self.orth_base.clone().expect("checked by the caller");
        let mut out = Vec::new();
        for b in base {
            let local = b.map_from_local(&f, &map);
            if !local.rows().all(|r| sm.form.is_singular(r)) {
                return Err(GensetError::Verification("lifted base line is not singular".into()));
            }
            out.push((sm.to_ambient(&local), format!("{tag}/base")));
        }
        Ok(out)
    }

    /// Defect 0 and `k = m − 1`: explicit candidates when `m = 3`, checked by
    /// closure, otherwise a seeded randomized greedy search.
    fn base(&mut self, sm: &SubModel, k: usize, tag: &str) -> Result<Tagged, GensetError> {
        let m = sm.rank();
        let key = (m, k);
        if !self.cache.contains_key(&key) {
            let local = self.compute_base(sm, k)?;
            self.cache.insert(key, local);
        }
        let local = &self.cache[&key];
        Ok(local.iter().map(|s| (sm.to_ambient(s), format!("{tag}/base"))).collect())
    }

    fn compute_base(&mut self, sm: &SubModel, k: usize) -> Result<Vec<Subspace>, GensetError> {
        let m = sm.rank();
        let target = linalg::binomial(2 * m, k);
        let mut model = PolarModel::new(sm.form.clone(), self.budget)?;
        let geom = build_grassmannian(&mut model, k)?;
        let f = sm.form.field().clone();
        if m == 3 && k == 2 {
            let cands = base_candidates(&sm.form);
            let ids: Option<Vec<u32>> = cands.iter().map(|s| geom.id_of(s)).collect();
            if let Some(ids) = ids {
                if ids.len() == target && is_generating(&geom, &ids)? {
                    self.note(format!(
                        "{}: coordinate base set of {target} lines generates",
                        describe(&geom, &f)
                    ));
                    return Ok(cands);
                }
            }
        }
        let best = search_base(&geom, target)?;
        let msg = if best.len() <= target {
            format!("{}: base set of size {} found by randomized greedy search", describe(&geom, &f), best.len())
        } else {
            format!(
                "{}: best base set found by search has size {} > {target}; the total exceeds the binomial bound",
                describe(&geom, &f),
                best.len()
            )
        };
        self.note(msg);
        Ok(best.iter().map(|&id| geom.point(id)).collect())
    }
}

fn describe(geom: &Geometry, f: &Field) -> String {
    format!("rank-{} local model over F{}, k={}", geom.polar_rank(), f.order(), geom.k())
}

/// Twelve coordinate lines plus three diagonal lines in a rank-3 model of
/// dimension 6 with Witt coordinates.
fn base_candidates(form: &Form) -> Vec<Subspace> {
    let f = form.field();
    let n = form.dim();
    let e = |i: usize| 2 * i;
    let fv = |i: usize| 2 * i + 1;
    let mut out = Vec::new();
    for a in 0..6 {
        for b in a + 1..6 {
            if a / 2 == b / 2 {
                continue;
            }
            out.push(Subspace::from_rows(f, n, &[unit(n, a), unit(n, b)]).expect("unit rows"));
        }
    }
    let minus_one = f.neg(1);
    // ⟨x, y⟩ with y = f_i + c f_j, c chosen to make the pair orthogonal.
    let diag = |x: Vec<Elem>, i: usize, j: usize| -> Subspace {
        let c = f
            .elements()
            .find(|&c| {
                let mut y = unit(n, fv(i));
                y[fv(j)] = c;
                form.pair(&x, &y) == 0
            })
            .expect("some coefficient makes the vectors orthogonal");
        let mut y = unit(n, fv(i));
        y[fv(j)] = c;
        Subspace::from_rows(f, n, &[x, y]).expect("rows of length n")
    };
    let sum = |i: usize, j: usize, c: Elem| {
        let mut v = unit(n, e(i));
        v[e(j)] = c;
        v
    };
    out.push(diag(sum(0, 1, 1), 0, 1));
    out.push(diag(sum(1, 2, 1), 1, 2));
    match form.kind() {
        FormKind::Hermitian => out.push(diag(sum(0, 1, f.eps()), 0, 1)),
        _ => {
            let mut x = unit(n, e(0));
            x[fv(1)] = 1;
            let mut y = unit(n, e(1));
            y[fv(0)] = minus_one;
            out.push(Subspace::from_rows(f, n, &[x, y]).expect("rows of length n"));
        }
    }
    out
}

/// Randomized greedy: add points outside the current closure in a shuffled
/// order, then minimize. Keeps the smallest result.
fn search_base(geom: &Geometry, target: usize) -> Result<Vec<u32>, GensetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    let mut order: Vec<u32> = (0..geom.num_points() as u32).collect();
    let mut best: Option<Vec<u32>> = None;
    for _ in 0..SEARCH_TRIES {
        order.shuffle(&mut rng);
        let mut state = geom.closure_state();
        let mut chosen = Vec::new();
        for &p in &order {
            if state.is_all() {
                break;
            }
            if !state.is_closed(p) {
                chosen.push(p);
                state.add(p);
            }
        }
        let min = greedy_minimize(geom, &chosen)?;
        if best.as_ref().map_or(true, |b| min.len() < b.len()) {
            best = Some(min);
        }
        if best.as_ref().is_some_and(|b| b.len() <= target) {
            break;
        }
    }
    Ok(best.expect("at least one attempt"))
}

fn finish(builder: Builder, elements: Tagged, target: usize) -> GenSet {
    let mut out = GenSet::new();
    for (s, t) in dedup(elements) {
        out.push(s, t);
    }
    out.notes = builder.notes;
    if out.len() != target {
        out.notes.push(format!("constructed size {} differs from C(2n+d,k) = {target}", out.len()));
    }
    out
}

/// The recursive construction for `k < rank` on a non-degenerate submodel.
pub fn generic_genset(ambient: &Form, sm: &SubModel, k: usize, budget: Budget) -> Result<GenSet, GensetError> {
    let mut b = Builder::new(ambient.clone(), budget, None);
    let elems = b.build(sm, k, "G")?;
    let target = linalg::binomial(sm.local_dim(), k);
    Ok(finish(b, elems, target))
}

/// A generating set of size `C(2n+d,k)` for the `k`-Grassmannian of
/// `H(n,d,q0)`, `1 ≤ k < n`.
pub fn hermitian_genset(q0: u32, n: usize, d: usize, k: usize, budget: Budget) -> Result<GenSet, GensetError> {
    if k == 0 || k >= n {
        return Err(GensetError::Unsupported(format!("need 1 ≤ k < n, got k={k}, n={n}")));
    }
    let form = standard_form(&format!("H({n},{d},{q0})"))?;
    let sm = SubModel::whole(&form)?;
    let mut b = Builder::new(form.clone(), budget, None);
    let elems = b.build(&sm, k, "G")?;
    let mut out = finish(b, elems, linalg::binomial(2 * n + d, k));
    if q0 == 2 && k > 1 {
        out.notes.push("the field is F4, which the theorem excludes; optimality is not asserted".into());
    }
    Ok(out)
}

/// A generating set of size `C(2n+d,2)` for the line Grassmannian of the
/// orthogonal space of rank `n` and defect `d` over `F_q`, built from a base
/// set for `Qparab(3,p)` over the prime field.
pub fn orth_q2_genset(q: u32, n: usize, d: usize, budget: Budget) -> Result<GenSet, GensetError> {
    if ![4, 8, 9].contains(&q) {
        return Err(GensetError::Unsupported(format!("q = {q}; supported fields are F4, F8, F9")));
    }
    if n < 3 || d > 2 || (n == 3 && d == 0) {
        return Err(GensetError::Unsupported(format!("need n ≥ 3, d ≤ 2 and d ≥ 1 when n = 3; got n={n}, d={d}")));
    }
    let desc = match d {
        0 => format!("Qplus({n},{q})"),
        1 => format!("Qparab({n},{q})"),
        _ => format!("Qminus({n},{q})"),
    };
    let form = standard_form(&desc)?;
    let f = Arc::clone(form.field_arc());
    let p = f.characteristic();
    let prime = f.subfield(1)?;

    let base_form = standard_form(&format!("Qparab(3,{p})"))?;
    let base_sm = SubModel::whole(&base_form)?;
    let mut b0 = Builder::new(base_form.clone(), budget, Some(base_form.field().subfield(1)?));
    let base_elems = b0.build(&base_sm, 2, "base")?;
    let base: Vec<Subspace> = dedup(base_elems).into_iter().map(|(s, _)| s).collect();
    let mut base_model = PolarModel::new(base_form, budget)?;
    let base_geom = build_grassmannian(&mut base_model, 2)?;
    let ids: Vec<u32> = base
        .iter()
        .map(|s| base_geom.id_of(s).ok_or_else(|| GensetError::NotAPoint(s.clone())))
        .collect::<Result<_, _>>()?;
    if ids.len() != 21 || !is_generating(&base_geom, &ids)? {
        return Err(GensetError::Verification(format!(
            "base set over F{p} has {} elements and does not generate",
            ids.len()
        )));
    }
    let lifted: Vec<Subspace> = base.iter().map(|s| Subspace::from_canonical(7, s.as_flat().to_vec())).collect();

    let sm = SubModel::whole(&form)?;
    let mut b = Builder::new(form.clone(), budget, Some(prime.clone()));
    b.notes.extend(b0.notes.iter().cloned());
    b.notes.push(format!("base set of 21 lines over F{p} generates Q2(Qparab(3,{p}))"));
    b.orth_base = Some(lifted);
    let elems = b.build(&sm, 2, "G")?;
    let mut out = finish(b, elems, linalg::binomial(2 * n + d, 2));
    if d <= 1 && !out.is_rational(&prime) {
        out.notes.push(format!("some elements are not F{p}-rational"));
    }
    Ok(out)
}
