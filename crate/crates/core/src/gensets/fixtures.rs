//! Coordinate bundles for the generation arguments over `F4`, `F8`, `F9`,
//! and a checker for the identities they claim.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::subfield::cor54_adjoin;
use super::GensetError;
use crate::gf::{Elem, Field};
use crate::linalg::Subspace;
use crate::polar::{Budget, PolarModel};

pub const FIXTURE_NAMES: [&str; 5] = ["m-gen", "t-gen-4", "t-gen-8", "t-gen-9", "not-gen"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureInstance {
    pub q: u32,
    /// Modulus coefficients, constant term first.
    pub modulus: Vec<u32>,
    pub space: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedRows {
    pub name: String,
    /// Rows of field elements written as `0`, `-1`, `e`, `e^-1`, `e^5`, ...
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Identity {
    /// The subspace is totally singular.
    Singular { target: String },
    /// `a^⊥ ∩ b = 0` and `b^⊥ ∩ a = 0`.
    Opposite { a: String, b: String },
    /// `a`, `b` are collinear in the line Grassmannian and `target` lies on
    /// the line they span.
    OnLine { target: String, a: String, b: String },
    /// The line contains a point rational over the subfield.
    RationalPoint { target: String },
    /// The line contains no rational point.
    NoRationalPoint { target: String },
    /// `target` is the line adjoined to the opposite pair `a`, `b`.
    Cor54 { target: String, a: String, b: String },
    /// Every singular plane through `target` has exactly one rational point.
    PlanesSingleRationalPoint { target: String },
}

impl Identity {
    pub fn describe(&self) -> String {
        match self {
            Identity::Singular { target } => format!("{target} is totally singular"),
            Identity::Opposite { a, b } => format!("{a} and {b} are opposite"),
            Identity::OnLine { target, a, b } => format!("{target} ∈ ⟨{a}, {b}⟩"),
            Identity::RationalPoint { target } => format!("{target} has a rational point"),
            Identity::NoRationalPoint { target } => format!("{target} has no rational point"),
            Identity::Cor54 { target, a, b } => format!("{target} is adjoined to ({a}, {b})"),
            Identity::PlanesSingleRationalPoint { target } => {
                format!("each singular plane through {target} has exactly one rational point")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureBundle {
    pub name: String,
    pub version: u32,
    pub subfield_degree: u32,
    pub instances: Vec<FixtureInstance>,
    pub subspaces: Vec<NamedRows>,
    pub identities: Vec<Identity>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResult {
    pub q: u32,
    pub identity: String,
    pub pass: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    pub name: String,
    pub results: Vec<IdentityResult>,
}

impl FixtureReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&IdentityResult> {
        self.results.iter().filter(|r| !r.pass).collect()
    }
}

fn raw(name: &str) -> Option<&'static str> {
    Some(match name {
        "m-gen" => include_str!("../../fixtures/m-gen.json"),
        "t-gen-4" => include_str!("../../fixtures/t-gen-4.json"),
        "t-gen-8" => include_str!("../../fixtures/t-gen-8.json"),
        "t-gen-9" => include_str!("../../fixtures/t-gen-9.json"),
        "not-gen" => include_str!("../../fixtures/not-gen.json"),
        _ => return None,
    })
}

pub fn load_fixture(name: &str) -> Result<FixtureBundle, GensetError> {
    let text = raw(name).ok_or_else(|| GensetError::Unsupported(format!("unknown fixture {name:?}")))?;
    parse_fixture(text)
}

pub fn parse_fixture(text: &str) -> Result<FixtureBundle, GensetError> {
    serde_json::from_str(text).map_err(|e| GensetError::Unsupported(format!("malformed fixture: {e}")))
}

fn decode(f: &Field, named: &NamedRows) -> Result<Subspace, GensetError> {
    let rows: Vec<Vec<Elem>> = named
        .rows
        .iter()
        .map(|r| r.iter().map(|s| f.parse_elem(s)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let dim = rows.first().map_or(0, Vec::len);
    Ok(Subspace::from_rows(f, dim, &rows)?)
}

/// Checks every identity of the bundle on every instance.
pub fn verify_fixture(bundle: &FixtureBundle) -> Result<FixtureReport, GensetError> {
    let mut results = Vec::new();
    for inst in &bundle.instances {
        let model = PolarModel::parse(&inst.space, Budget::DEFAULT)?;
        let f = model.field();
        if f.order() != inst.q as usize || f.modulus() != inst.modulus.as_slice() {
            return Err(GensetError::Unsupported(format!(
                "fixture {} expects F{} with modulus {:?}, the model uses {:?}",
                bundle.name,
                inst.q,
                inst.modulus,
                f.modulus()
            )));
        }
        let mut spaces = BTreeMap::new();
        for named in &bundle.subspaces {
            spaces.insert(named.name.clone(), decode(f, named)?);
        }
        let checked: Vec<IdentityResult> = bundle
            .identities
            .par_iter()
            .map(|id| {
                let outcome = check(&model, bundle.subfield_degree, &spaces, id);
                IdentityResult {
                    q: inst.q,
                    identity: id.describe(),
                    pass: outcome.is_ok(),
                    detail: outcome.err(),
                }
            })
            .collect();
        results.extend(checked);
    }
    Ok(FixtureReport {
        name: bundle.name.clone(),
        results,
    })
}

fn check(
    model: &PolarModel,
    degree: u32,
    spaces: &BTreeMap<String, Subspace>,
    id: &Identity,
) -> Result<(), String> {
    let f = model.field();
    let form = model.form();
    let get = |n: &String| spaces.get(n).ok_or_else(|| format!("unknown subspace {n}"));
    let sub = f.subfield(degree).map_err(|e| e.to_string())?;
    let is_rational_pt = |p: &Vec<Elem>| p.iter().all(|&x| sub.contains(x));
    let perp = |s: &Subspace| {
        let funcs: Vec<Vec<Elem>> = s.rows().map(|r| form.functional(r)).collect();
        Subspace::annihilator(f, form.dim(), &funcs)
    };
    let line = |s: &Subspace, n: &str| {
        if s.rank() == 2 && model.is_totally_singular(s) {
            Ok(())
        } else {
            Err(format!("{n} is not a singular line"))
        }
    };
    match id {
        Identity::Singular { target } => {
            let s = get(target)?;
            if model.is_totally_singular(s) {
                Ok(())
            } else {
                Err(format!("{target} is not totally singular"))
            }
        }
        Identity::Opposite { a, b } => {
            let (sa, sb) = (get(a)?, get(b)?);
            let ab = perp(sa).intersect(f, sb).map_err(|e| e.to_string())?;
            let ba = perp(sb).intersect(f, sa).map_err(|e| e.to_string())?;
            if ab.rank() == 0 && ba.rank() == 0 {
                Ok(())
            } else {
                Err(format!("{a} and {b} are not opposite"))
            }
        }
        Identity::OnLine { target, a, b } => {
            let (t, sa, sb) = (get(target)?, get(a)?, get(b)?);
            line(t, target)?;
            line(sa, a)?;
            line(sb, b)?;
            let meet = sa.intersect(f, sb).map_err(|e| e.to_string())?;
            let join = sa.sum(f, sb).map_err(|e| e.to_string())?;
            if meet.rank() != 1 || join.rank() != 3 || !model.is_totally_singular(&join) {
                return Err(format!("{a} and {b} are not collinear in the line Grassmannian"));
            }
            if !t.contains(f, &meet) || !join.contains(f, t) {
                return Err(format!("{target} is not on the line spanned by {a} and {b}"));
            }
            Ok(())
        }
        Identity::RationalPoint { target } => {
            if get(target)?.points(f).iter().any(is_rational_pt) {
                Ok(())
            } else {
                Err(format!("{target} has no rational point"))
            }
        }
        Identity::NoRationalPoint { target } => {
            if get(target)?.points(f).iter().any(is_rational_pt) {
                Err(format!("{target} has a rational point"))
            } else {
                Ok(())
            }
        }
        Identity::Cor54 { target, a, b } => {
            let t = cor54_adjoin(model, degree, get(a)?, get(b)?).map_err(|e| e.to_string())?;
            if &t == get(target)? {
                Ok(())
            } else {
                Err(format!("adjoined line is {:?}, expected {target}", t.row_vecs()))
            }
        }
        Identity::PlanesSingleRationalPoint { target } => {
            let t = get(target)?;
            line(t, target)?;
            let planes = planes_through(model, t)?;
            if planes.is_empty() {
                return Err(format!("no singular plane contains {target}"));
            }
            for p in &planes {
                let n = p.points(f).iter().filter(|v| is_rational_pt(v)).count();
                if n != 1 {
                    return Err(format!("a plane through {target} has {n} rational points"));
                }
            }
            Ok(())
        }
    }
}

/// Singular planes through a singular line, from the residue of the line.
fn planes_through(model: &PolarModel, l: &Subspace) -> Result<Vec<Subspace>, String> {
    let res = model.upper_residue(l).map_err(|e| e.to_string())?;
    let f = model.field();
    let local = res.form.clone();
    let mut out = Vec::new();
    for v in crate::linalg::normalized_vectors(f, local.dim()) {
        if local.is_singular(&v) {
            out.push(res.lift(&Subspace::point(f, &v)));
        }
    }
    Ok(out)
}
