use std::path::Path;

use polargrass::gensets::{
    apartment, generic_genset, gset_predicate, hermitian_genset, load_fixture, orth_q2_genset, parse_fixture,
    random_triple, genset_k, verify_fixture, GenSet, SubfieldContext,
};
use polargrass::grassmann::{natural_rank, LowerBound, LowerMethod, UpperBound};
use polargrass::linalg::{binomial, Subspace};
use polargrass::{
    build_grassmannian, is_generating, plucker_rank, span_closure, Field, FormKind, Geometry, PolarModel,
    RankCertificate, SpaceDescriptor, SubModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::args::{Expect, Global, Method};
use crate::cache;
use crate::error::CliError;
use crate::report::{ModelInfo, Recorder};

/// Loads the model from the cache when an entry exists, otherwise enumerates it.
pub fn load_model(global: &Global, space: &str) -> Result<PolarModel, CliError> {
    let budget = global.budget.budget();
    if let Some(root) = &global.cache {
        if let Some(m) = cache::load(root, space, budget)? {
            return Ok(m);
        }
    }
    Ok(PolarModel::parse(space, budget)?)
}

pub fn build(global: &Global, rec: &mut Recorder, space: &str, k: Option<usize>, rebuild: bool) -> Result<(), CliError> {
    let budget = global.budget.budget();
    let mut model = match (&global.cache, rebuild) {
        (Some(root), false) => match cache::load(root, space, budget)? {
            Some(m) => m,
            None => PolarModel::parse(space, budget)?,
        },
        _ => PolarModel::parse(space, budget)?,
    };
    let mut info = ModelInfo::of(&model);
    if let Some(k) = k {
        let geom = rec.time("enumerate", || build_grassmannian(&mut model, k))?;
        info = info.with_geometry(&geom);
        rec.data("warnings", geom.warnings());
    }
    let levels: Vec<usize> = (1..=model.levels_built()).map(|k| model.level(k).map(|t| t.len())).collect::<Result<_, _>>()?;
    rec.data("level_sizes", levels);
    rec.model(info);
    if let Some(root) = &global.cache {
        cache::store(root, &model)?;
        rec.data("cached", true);
    }
    Ok(())
}

/// Builds a candidate generating set; returns it with the method actually used.
pub fn construct(model: &mut PolarModel, k: usize, method: Method, rng_seed: u64) -> Result<(GenSet, Method), CliError> {
    let budget = model.budget();
    let inv = model.invariants();
    let desc: SpaceDescriptor = model.descriptor().parse()?;
    let method = match method {
        Method::Auto if k == inv.n => Method::Apartment,
        Method::Auto => match desc {
            SpaceDescriptor::Hermitian { .. } => Method::Hermitian,
            SpaceDescriptor::Qparab { q, .. } | SpaceDescriptor::Qplus { q, .. } | SpaceDescriptor::Qminus { q, .. }
                if k == 2 && [4, 8, 9].contains(&q) && inv.n >= 3 && inv.d <= 2 && (inv.n, inv.d) != (3, 0) =>
            {
                Method::Orthogonal
            }
            _ => Method::Recursive,
        },
        m => m,
    };
    let set = match method {
        Method::Apartment => {
            if k != inv.n {
                return Err(CliError::Usage(format!("apartments are sets of {}-subspaces", inv.n)));
            }
            apartment(model)?
        }
        Method::Recursive | Method::Auto => generic_genset(model.form(), &SubModel::whole(model.form())?, k, budget)?,
        Method::Hermitian => match desc {
            SpaceDescriptor::Hermitian { n, d, q0 } => hermitian_genset(q0, n, d, k, budget)?,
            _ => return Err(CliError::Usage("the hermitian method needs an H(n,d,q0) space".into())),
        },
        Method::Orthogonal => {
            let q = match desc {
                SpaceDescriptor::Qparab { q, .. } | SpaceDescriptor::Qplus { q, .. } | SpaceDescriptor::Qminus { q, .. } => q,
                _ => return Err(CliError::Usage("the orthogonal method needs a standard quadric".into())),
            };
            if k != 2 {
                return Err(CliError::Usage("the orthogonal method builds lines (k = 2)".into()));
            }
            orth_q2_genset(q, inv.n, inv.d, budget)?
        }
        Method::RandomHyperplane => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let (h, p0, _) = random_triple(model, &mut rng)?;
            genset_k(model, &h, &p0, k, None)?
        }
    };
    Ok((set, method))
}

#[derive(Serialize)]
struct Element<'a> {
    tag: &'a str,
    rows: Vec<Vec<String>>,
}

fn format_rows(f: &Field, s: &Subspace) -> Vec<Vec<String>> {
    s.rows().map(|r| r.iter().map(|&x| f.format_elem(x)).collect()).collect()
}

pub fn genset(
    global: &Global,
    rec: &mut Recorder,
    space: &str,
    k: usize,
    method: Method,
    rng_seed: u64,
) -> Result<(), CliError> {
    let mut model = load_model(global, space)?;
    let (set, used) = rec.time("construct", || construct(&mut model, k, method, rng_seed))?;
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, k))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let ids = set.ids(&geom)?;
    let r = rec.time("closure", || span_closure(&geom, &ids))?;
    let inv = model.invariants();
    rec.data("method", used);
    rec.data("size", set.len());
    rec.data("binomial", binomial(2 * inv.n + inv.d, k));
    rec.data("notes", &set.notes);
    rec.data("tag_counts", set.tag_counts());
    let f = model.field();
    let elements: Vec<Element> = set
        .elements
        .iter()
        .zip(&set.tags)
        .map(|(s, t)| Element { tag: t, rows: format_rows(f, s) })
        .collect();
    rec.data("elements", elements);
    rec.check("generates", r.generated_all, Some(format!("closure {} of {}", r.size(), geom.num_points())));
    Ok(())
}

/// Parses a field descriptor like `F2` and returns its degree over the prime field.
fn subfield_degree(field: &Field, spec: &str) -> Result<u32, CliError> {
    let sub: Field = spec.parse()?;
    if sub.characteristic() != field.characteristic() || field.degree() % sub.degree() != 0 {
        return Err(CliError::Usage(format!("{spec} is not a subfield of {}", field.descriptor())));
    }
    Ok(sub.degree())
}

fn parse_subspace(f: &Field, dim: usize, rows: &[Vec<Value>]) -> Result<Subspace, CliError> {
    let mut out = Vec::new();
    for r in rows {
        let mut row = Vec::new();
        for v in r {
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                other => return Err(CliError::Usage(format!("bad field element {other}"))),
            };
            row.push(f.parse_elem(&text)?);
        }
        if row.len() != dim {
            return Err(CliError::Usage(format!("row of length {} in a space of dimension {dim}", row.len())));
        }
        out.push(row);
    }
    Ok(Subspace::from_rows(f, dim, &out)?)
}

/// Resolves a `--seed` specification to point IDs of the geometry.
pub fn seed_ids(model: &mut PolarModel, geom: &Geometry, spec: &str) -> Result<Vec<u32>, CliError> {
    let f = model.field().clone();
    let dim = model.dim();
    let lookup = |s: &Subspace| {
        geom.id_of(s).ok_or_else(|| CliError::Usage(format!("{:?} is not a point of the geometry", s.row_vecs())))
    };
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "rational" => {
            let degree = subfield_degree(&f, rest)?;
            Ok(SubfieldContext::new(geom, degree)?.rational_ids())
        }
        "apartment" => Ok(apartment(model)?.ids(geom)?),
        "construction" => {
            let (set, _) = construct(model, geom.k(), Method::Auto, 1)?;
            Ok(set.ids(geom)?)
        }
        "ids" => rest
            .split(',')
            .map(|t| {
                let id: u32 = t.trim().parse().map_err(|_| CliError::Usage(format!("bad point id {t:?}")))?;
                if id as usize >= geom.num_points() {
                    return Err(CliError::Usage(format!("point id {id} out of range")));
                }
                Ok(id)
            })
            .collect(),
        "fixture" => {
            let (name, names) = rest
                .split_once(':')
                .ok_or_else(|| CliError::Usage("expected fixture:<name>:<sub,sub,...>".into()))?;
            let bundle = load_fixture(name).map_err(|e| CliError::Fixture(e.to_string()))?;
            names
                .split(',')
                .map(|n| {
                    let named = bundle
                        .subspaces
                        .iter()
                        .find(|s| s.name == n)
                        .ok_or_else(|| CliError::Fixture(format!("{name} has no subspace {n}")))?;
                    let rows: Vec<Vec<Value>> =
                        named.rows.iter().map(|r| r.iter().cloned().map(Value::String).collect()).collect();
                    lookup(&parse_subspace(&f, dim, &rows)?)
                })
                .collect()
        }
        "file" => {
            let text = std::fs::read_to_string(rest)?;
            let list: Vec<Vec<Vec<Value>>> = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{rest}: expected a list of subspaces given by rows ({e})")))?;
            list.iter().map(|rows| lookup(&parse_subspace(&f, dim, rows)?)).collect()
        }
        _ => Err(CliError::Usage(format!("unknown seed specification {spec:?}"))),
    }
}

pub fn span(
    global: &Global,
    rec: &mut Recorder,
    space: &str,
    k: usize,
    seed: &str,
    expect: Option<Expect>,
) -> Result<(), CliError> {
    let mut model = load_model(global, space)?;
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, k))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let ids = seed_ids(&mut model, &geom, seed)?;
    let r = rec.time("closure", || span_closure(&geom, &ids))?;
    rec.data("seed_size", r.seed_size);
    rec.data("closure_size", r.size());
    rec.data("generated_all", r.generated_all);
    rec.data("rounds", r.rounds);
    match expect {
        Some(Expect::All) => rec.check("generated_all", r.generated_all, None),
        Some(Expect::Proper) => rec.check("closure is proper", !r.generated_all, None),
        None => true,
    };
    Ok(())
}

pub fn rank(global: &Global, rec: &mut Recorder, space: &str, k: usize) -> Result<RankCertificate, CliError> {
    let mut model = load_model(global, space)?;
    let inv = model.invariants();
    if k == 0 || k > inv.n {
        return Err(CliError::Usage(format!("k must satisfy 1 ≤ k ≤ {}", inv.n)));
    }
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, k))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let upper = match construct(&mut model, k, Method::Auto, 1) {
        Ok((set, method)) => {
            let ids = set.ids(&geom)?;
            let generates = rec.time("closure", || is_generating(&geom, &ids))?;
            rec.data("construction", method);
            Some(UpperBound {
                size: set.len(),
                generates,
                set: set.elements,
            })
        }
        Err(e) => {
            rec.data("construction_error", e.to_string());
            None
        }
    };
    let lower = if k == 1 {
        Some(LowerBound {
            method: LowerMethod::Natural,
            value: natural_rank(&geom)?,
            source: None,
        })
    } else if k < inv.n {
        let pr = rec.time("plucker", || plucker_rank(&geom))?;
        Some(LowerBound {
            method: LowerMethod::Plucker,
            value: pr.rank,
            source: None,
        })
    } else {
        None
    };
    let cert = RankCertificate::new(upper, lower);
    if let Some(u) = &cert.upper {
        rec.check("upper bound generates", u.generates, Some(format!("{} elements", u.size)));
    }
    rec.check("bounds consistent", cert.is_consistent(), None);
    rec.data("upper", cert.upper.as_ref().map(|u| u.size));
    rec.data("lower", cert.lower.as_ref().map(|l| l.value));
    rec.data("lower_method", cert.lower.as_ref().map(|l| l.method));
    rec.data("pinned", cert.pinned);
    rec.data("statement", statement(&cert));
    Ok(cert)
}

/// `gr = x` when the bounds meet, otherwise the known bounds.
pub fn statement(cert: &RankCertificate) -> String {
    let upper = cert.upper.as_ref().filter(|u| u.generates).map(|u| u.size);
    let lower = cert.lower.as_ref().map(|l| l.value);
    match (lower, upper) {
        (Some(l), Some(u)) if l == u => format!("gr = {u}"),
        (Some(l), Some(u)) => format!("{l} ≤ gr ≤ {u}"),
        (None, Some(u)) => format!("gr ≤ {u}"),
        (Some(l), None) => format!("gr ≥ {l}"),
        (None, None) => "no bounds".into(),
    }
}

pub fn subfield(global: &Global, rec: &mut Recorder, space: &str, k: usize, degree: u32) -> Result<(), CliError> {
    let mut model = load_model(global, space)?;
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, k))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let ctx = SubfieldContext::new(&geom, degree)?;
    let rational = ctx.rational_ids();
    let r = rec.time("closure", || span_closure(&geom, &rational))?;
    rec.data("subfield", format!("F{}", ctx.sub.order()));
    rec.data("rational", rational.len());
    rec.data("closure_size", r.size());
    rec.data("generated_all", r.generated_all);
    if k == 2 && degree == 1 && model.form().kind() == FormKind::Quadratic {
        let v = rec.time("gset", || gset_predicate(&geom, &model, &ctx, &rational))?;
        rec.data("gset_generates_f0", v.generates_f0);
        rec.data("gset_holds", v.holds);
        if let Some(w) = &v.witness {
            let f = model.field();
            rec.data("gset_witness_l", format_rows(f, &w.l));
            rec.data("gset_witness_l_prime", format_rows(f, &w.l_prime));
        }
    }
    Ok(())
}

pub fn fixture(rec: &mut Recorder, name: Option<&str>, file: Option<&Path>) -> Result<(), CliError> {
    let bundle = match (file, name) {
        (Some(path), _) => parse_fixture(&std::fs::read_to_string(path)?),
        (None, Some(name)) => load_fixture(name),
        (None, None) => return Err(CliError::Usage("give a fixture name or --file".into())),
    }
    .map_err(|e| CliError::Fixture(e.to_string()))?;
    let report = rec.time("verify", || verify_fixture(&bundle)).map_err(|e| CliError::Fixture(e.to_string()))?;
    rec.data("fixture", &bundle.name);
    rec.data("version", bundle.version);
    for r in &report.results {
        rec.check(format!("F{}: {}", r.q, r.identity), r.pass, r.detail.clone());
    }
    Ok(())
}
