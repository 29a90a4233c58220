//! Rationality over a subfield: rational lines, the adjoined line `t`, the
//! generation criterion with opposite rational lines, and the subspace `Ω`
//! spanned by the rational lines of `Q+(5,q)`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::GensetError;
use crate::bits::BitSet;
use crate::forms::{Form, FormKind};
use crate::gf::{Elem, Field, Subfield};
use crate::grassmann::{build_grassmannian, span_closure, Geometry};
use crate::linalg::{self, Subspace};
use crate::polar::{Budget, PolarModel};

/// A subfield `F0` of the geometry's field together with the set of
/// `F0`-rational geometry points.
#[derive(Clone, Debug)]
pub struct SubfieldContext {
    pub degree: u32,
    pub sub: Subfield,
    pub rational: BitSet,
}

impl SubfieldContext {
    pub fn new(geom: &Geometry, degree: u32) -> Result<SubfieldContext, GensetError> {
        let sub = geom.field().subfield(degree)?;
        let n = geom.num_points();
        let flags: Vec<bool> = (0..n as u32).into_par_iter().map(|id| geom.point(id).is_rational(&sub)).collect();
        let rational = BitSet::from_ids(n, flags.iter().enumerate().filter(|(_, &r)| r).map(|(i, _)| i));
        Ok(SubfieldContext { degree, sub, rational })
    }

    pub fn is_rational(&self, id: u32) -> bool {
        self.rational.contains(id as usize)
    }

    pub fn rational_ids(&self) -> Vec<u32> {
        self.rational.iter().map(|i| i as u32).collect()
    }
}

/// The `F0`-rational points of the geometry (rational lines when `k = 2`).
pub fn rational_lines(ctx: &SubfieldContext) -> BitSet {
    ctx.rational.clone()
}

/// True if the projective point `[v]` is `K`-rational for some `K` with
/// `F0 ⊆ K ⊊ F`, where `F0` has the given degree.
pub fn is_k_rational_somewhere(f: &Field, v: &[Elem], degree: u32) -> bool {
    let mut w = v.to_vec();
    if !linalg::normalize(f, &mut w) {
        return true;
    }
    let mut degrees = vec![degree];
    degrees.extend(f.intermediate_degrees(degree));
    degrees.into_iter().filter(|&d| d < f.degree()).any(|d| {
        let sub = f.subfield(d).expect("divisor degree");
        w.iter().all(|&x| sub.contains(x))
    })
}

fn conjugate(f: &Field, v: &[Elem], degree: u32) -> Vec<Elem> {
    v.iter()
        .map(|&x| (0..degree).fold(x, |y, _| f.frobenius(y)))
        .collect()
}

/// The unique `F0`-rational line through a non-rational point, if any: the
/// span of the Galois conjugates of the point.
pub fn rational_line_through(form: &Form, v: &[Elem], degree: u32) -> Option<Subspace> {
    let f = form.field();
    let mut rows = vec![v.to_vec()];
    let mut c = v.to_vec();
    for _ in 1..f.degree() / degree {
        c = conjugate(f, &c, degree);
        rows.push(c.clone());
    }
    let s = Subspace::from_rows(f, v.len(), &rows).ok()?;
    let sub = f.subfield(degree).ok()?;
    let singular = s.rows().all(|r| form.is_singular(r)) && s.rows().all(|a| s.rows().all(|b| form.pair(a, b) == 0));
    (s.rank() == 2 && s.is_rational(&sub) && singular).then_some(s)
}

fn perp(form: &Form, s: &Subspace) -> Subspace {
    let funcs: Vec<Vec<Elem>> = s.rows().map(|r| form.functional(r)).collect();
    Subspace::annihilator(form.field(), form.dim(), &funcs)
}

fn opposite(form: &Form, a: &Subspace, b: &Subspace) -> bool {
    perp(form, b).intersect(form.field(), a).map(|s| s.rank() == 0).unwrap_or(false)
}

/// Given opposite `F0`-rational lines `ℓ0`, `ℓ1`, returns `t = ⟨p, q⟩` where
/// `p` is the least point of `ℓ0` (by model ID) such that neither `p` nor
/// `q = p^⊥ ∩ ℓ1` is rational over any proper intermediate field.
pub fn cor54_adjoin(model: &PolarModel, degree: u32, l0: &Subspace, l1: &Subspace) -> Result<Subspace, GensetError> {
    let form = model.form();
    let f = model.field();
    let sub = f.subfield(degree)?;
    if model.invariants().d > 1 {
        return Err(GensetError::Hypothesis("the defect must be at most 1".into()));
    }
    for (name, l) in [("ℓ0", l0), ("ℓ1", l1)] {
        if l.rank() != 2 || !model.is_totally_singular(l) {
            return Err(GensetError::Hypothesis(format!("{name} must be a singular line")));
        }
        if !l.is_rational(&sub) {
            return Err(GensetError::Hypothesis(format!("{name} must be F0-rational")));
        }
    }
    if !opposite(form, l0, l1) {
        return Err(GensetError::Hypothesis("ℓ0 and ℓ1 must be opposite".into()));
    }
    let mut pts: Vec<(u32, Vec<Elem>)> = l0
        .points(f)
        .into_iter()
        .map(|p| (model.point_id(&p).expect("points of a singular line are singular"), p))
        .collect();
    pts.sort_by_key(|(id, _)| *id);
    for (_, p) in pts {
        if is_k_rational_somewhere(f, &p, degree) {
            continue;
        }
        let q_space = l1.intersect(f, &Subspace::annihilator(f, form.dim(), &[form.functional(&p)]))?;
        if q_space.rank() != 1 {
            continue;
        }
        let q = q_space.row(0).to_vec();
        if is_k_rational_somewhere(f, &q, degree) {
            continue;
        }
        let t = Subspace::from_rows(f, form.dim(), &[p, q])?;
        if !model.is_totally_singular(&t) {
            return Err(GensetError::Verification("the adjoined line is not singular".into()));
        }
        return Ok(t);
    }
    Err(GensetError::Hypothesis("no point of ℓ0 is non-rational over every intermediate field".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct GsetWitness {
    /// Geometry ID of the line `m` in the closure.
    pub m: u32,
    pub l: Subspace,
    pub l_prime: Subspace,
}

#[derive(Clone, Debug, Serialize)]
pub struct GsetVerdict {
    /// `G` generates the Grassmannian over the subfield.
    pub generates_f0: bool,
    pub witness: Option<GsetWitness>,
    pub holds: bool,
}

/// The generation criterion for a set `G` of rational lines: `G` generates
/// `Q2(F0)`, and some line `m` of its closure in `Q2(F)` meets two opposite
/// rational lines in points not rational over any proper intermediate field.
pub fn gset_predicate(
    geom: &Geometry,
    model: &PolarModel,
    ctx: &SubfieldContext,
    g: &[u32],
) -> Result<GsetVerdict, GensetError> {
    if geom.k() != 2 {
        return Err(GensetError::Unsupported("the criterion concerns line Grassmannians".into()));
    }
    if let Some(&bad) = g.iter().find(|&&id| !ctx.is_rational(id)) {
        return Err(GensetError::Hypothesis(format!("element {bad} of G is not F0-rational")));
    }
    let form = model.form();
    if form.kind() != FormKind::Quadratic || ctx.degree != 1 || !form.coefficients_in(&ctx.sub) {
        return Err(GensetError::Unsupported(
            "the restricted geometry is built for quadrics over the prime subfield".into(),
        ));
    }
    let f = form.field();
    let f0 = Arc::new(Field::with_order(f.characteristic())?);
    let form0 = Form::quadratic(f0, &form.matrix())?;
    let mut model0 = PolarModel::new(form0, model.budget())?;
    let geom0 = build_grassmannian(&mut model0, 2)?;
    let ids0: Vec<u32> = g
        .iter()
        .map(|&id| {
            let s = geom.point(id);
            geom0.id_of(&s).ok_or(GensetError::NotAPoint(s))
        })
        .collect::<Result<_, _>>()?;
    let generates_f0 = span_closure(&geom0, &ids0)?.generated_all;

    let closure = span_closure(geom, g)?;
    let candidates: Vec<u32> = closure.closed.iter().map(|i| i as u32).collect();
    let witness = candidates.par_iter().find_map_first(|&m| {
        let line = geom.point(m);
        let through: Vec<Subspace> = line
            .points(f)
            .into_iter()
            .filter(|p| !is_k_rational_somewhere(f, p, ctx.degree))
            .filter_map(|p| rational_line_through(form, &p, ctx.degree))
            .collect();
        for (i, a) in through.iter().enumerate() {
            for b in &through[i + 1..] {
                if a != b && opposite(form, a, b) {
                    return Some(GsetWitness {
                        m,
                        l: a.clone(),
                        l_prime: b.clone(),
                    });
                }
            }
        }
        None
    });
    Ok(GsetVerdict {
        generates_f0,
        holds: generates_f0 && witness.is_some(),
        witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaneReport {
    pub plane: Subspace,
    pub rational_points: usize,
}

/// Outcome of the `Ω` computation on the line Grassmannian of `Q+(5,q)`.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaReport {
    pub q: u32,
    pub lines: usize,
    pub grassmann_lines: usize,
    pub rational_lines: usize,
    /// Lines meeting the rational point set.
    pub omega1: usize,
    /// Lines inside rational planes.
    pub omega2: usize,
    pub omega: usize,
    pub closure_size: usize,
    pub closure_equals_omega: bool,
    pub omega_is_subspace: bool,
    pub proper: bool,
    pub witness: Subspace,
    pub witness_outside: bool,
    pub planes_through_witness: Vec<PlaneReport>,
}

impl OmegaReport {
    /// Every claim of the obstruction holds.
    pub fn confirmed(&self) -> bool {
        self.closure_equals_omega
            && self.omega_is_subspace
            && self.proper
            && self.witness_outside
            && !self.planes_through_witness.is_empty()
            && self.planes_through_witness.iter().all(|p| p.rational_points == 1)
    }
}

/// Computes `Ω1`, `Ω2` and their union for `Q+(5,q)` over the prime
/// subfield, and checks it against the closure of the rational lines.
pub fn omega_obstruction(q: u32, budget: Budget) -> Result<OmegaReport, GensetError> {
    let mut model = PolarModel::parse(&format!("Qplus(3,{q})"), budget)?;
    if model.field().degree() < 2 {
        return Err(GensetError::Unsupported("the field must have a proper subfield".into()));
    }
    let geom = build_grassmannian(&mut model, 2)?;
    model.ensure_level(3)?;
    let ctx = SubfieldContext::new(&geom, 1)?;
    let f = model.field().clone();
    let sub = &ctx.sub;
    let n = geom.num_points();

    let omega1_flags: Vec<bool> = (0..n as u32)
        .into_par_iter()
        .map(|id| geom.point(id).points(&f).iter().any(|p| p.iter().all(|&x| sub.contains(x))))
        .collect();
    let omega1 = BitSet::from_ids(n, (0..n).filter(|&i| omega1_flags[i]));

    let planes = model.level(3)?;
    let local_lines = linalg::all_subspaces(&f, 3, 2);
    let mut omega2 = BitSet::new(n);
    for pid in 0..planes.len() {
        let plane = planes.subspace(pid);
        if !plane.is_rational(sub) {
            continue;
        }
        let basis = plane.row_vecs();
        for l in &local_lines {
            let line = l.map_from_local(&f, &basis);
            let id = geom.id_of(&line).ok_or_else(|| GensetError::NotAPoint(line.clone()))?;
            omega2.insert(id as usize);
        }
    }
    let mut omega = omega1.clone();
    omega.union_with(&omega2);

    let closure = span_closure(&geom, &ctx.rational_ids())?;
    let omega_is_subspace = (0..geom.num_lines()).into_par_iter().all(|line| {
        let pts = geom.line_points(line);
        let inside = pts.iter().filter(|&&p| omega.contains(p as usize)).count();
        inside < 2 || inside == pts.len()
    });

    let eps = f.eps();
    let mut v1 = vec![0; 6];
    v1[0] = 1;
    v1[2] = eps;
    let mut v2 = vec![0; 6];
    v2[1] = eps;
    v2[3] = f.neg(1);
    let witness = Subspace::from_rows(&f, 6, &[v1, v2])?;
    let wid = geom.id_of(&witness).ok_or_else(|| GensetError::NotAPoint(witness.clone()))?;
    let mut through = Vec::new();
    for pid in 0..planes.len() {
        let plane = planes.subspace(pid);
        if plane.contains(&f, &witness) {
            let rational_points = plane.points(&f).iter().filter(|p| p.iter().all(|&x| sub.contains(x))).count();
            through.push(PlaneReport { plane, rational_points });
        }
    }

    Ok(OmegaReport {
        q,
        lines: n,
        grassmann_lines: geom.num_lines(),
        rational_lines: ctx.rational.count(),
        omega1: omega1.count(),
        omega2: omega2.count(),
        omega: omega.count(),
        closure_size: closure.size(),
        closure_equals_omega: closure.closed == omega,
        omega_is_subspace,
        proper: omega.count() < n,
        witness_outside: !omega.contains(wid as usize),
        witness,
        planes_through_witness: through,
    })
}
