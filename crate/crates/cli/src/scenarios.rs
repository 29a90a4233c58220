//! Named verification runs behind `polargrass verify`.

use polargrass::gensets::{
    apartment, cor54_adjoin, generic_genset, genset_k, genset_k2, hermitian_genset, load_fixture, omega_obstruction,
    orth_q2_genset, random_triple, verify_fixture, SubfieldContext,
};
use polargrass::grassmann::{natural_rank, span_closure_with, ClosureOptions};
use polargrass::linalg::{binomial, Subspace};
use polargrass::{build_grassmannian, is_generating, plucker_rank, span_closure, BitSet, Budget, Field, Geometry, SubModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{Global, Scenario};
use crate::commands::load_model;
use crate::error::CliError;
use crate::report::{ModelInfo, Recorder};

pub fn run(global: &Global, rec: &mut Recorder, scenario: &Scenario) -> Result<(), CliError> {
    match scenario {
        Scenario::HermitianDual { n } => hermitian_dual(global, rec, *n),
        Scenario::Points { space } => points(global, rec, space),
        Scenario::Triples { space, count, rng_seed } => triples(global, rec, space, *count, *rng_seed),
        Scenario::Subspaces { space, k, count, rng_seed } => subspaces(global, rec, space, *k, *count, *rng_seed),
        Scenario::Tgen { q } => tgen(global, rec, *q),
        Scenario::Orth { q } => orth(global, rec, *q),
        Scenario::Notgen { q } => notgen(global, rec, *q),
        Scenario::HermitianRank { n, d, q0, k } => hermitian_rank(global, rec, *n, *d, *q0, *k),
        Scenario::Properties { space, k, samples, rng_seed } => properties(global, rec, space, *k, *samples, *rng_seed),
    }
}

/// Instances needing more than the default budget are refused up front with
/// a hint, instead of failing halfway through.
fn require_large(global: &Global, what: &str) -> Result<(), CliError> {
    if global.budget.budget() == Budget::LARGE {
        Ok(())
    } else {
        Err(CliError::Budget(format!("{what} is beyond the default budget")))
    }
}

fn hermitian_dual(global: &Global, rec: &mut Recorder, n: usize) -> Result<(), CliError> {
    if !(2..=3).contains(&n) {
        return Err(CliError::Usage("hermitian-dual supports n = 2 and n = 3".into()));
    }
    let mut model = load_model(global, &format!("H({n},1,2)"))?;
    let a = apartment(&model)?;
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, n))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let expected = if n == 2 { 297 } else { 38313 };
    rec.check("point count", geom.num_points() == expected, Some(format!("{} points", geom.num_points())));
    rec.check("apartment size", a.len() == 1 << n, Some(format!("{} elements", a.len())));
    let ids = a.ids(&geom)?;
    let gen = rec.time("closure", || is_generating(&geom, &ids))?;
    rec.check("apartment generates", gen, None);
    if n == 2 {
        let found = rec.time("exhaustive", || smaller_generator(&geom, 3));
        let minimal = found.is_none();
        rec.check("no 3-subset generates", minimal, found.map(|s| format!("{s:?} generates")));
        rec.data("gr", if gen && minimal { Some(4) } else { None });
    }
    Ok(())
}

/// A generating set of `size` points, by exhaustive search.
fn smaller_generator(geom: &Geometry, size: usize) -> Option<Vec<u32>> {
    let np = geom.num_points() as u32;
    let mut idx: Vec<u32> = (0..size as u32).collect();
    loop {
        let mut st = geom.closure_state();
        st.add_all(&idx);
        if st.is_all() {
            return Some(idx);
        }
        // Next combination in lexicographic order.
        let mut i = size;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] < np - (size - i) as u32 {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn points(global: &Global, rec: &mut Recorder, space: &str) -> Result<(), CliError> {
    let mut model = load_model(global, space)?;
    let inv = model.invariants();
    let target = 2 * inv.n + inv.d;
    let set = generic_genset(model.form(), &SubModel::whole(model.form())?, 1, model.budget())?;
    let geom = build_grassmannian(&mut model, 1)?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let ids = set.ids(&geom)?;
    rec.check("seed size is 2n+d", ids.len() == target, Some(format!("{} points", ids.len())));
    rec.check("seed generates", is_generating(&geom, &ids)?, None);
    let er = natural_rank(&geom)?;
    rec.check("natural embedding rank is 2n+d", er == target, Some(format!("rank {er}")));
    let mut minimal = true;
    for skip in 0..ids.len() {
        let sub: Vec<u32> = ids.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &p)| p).collect();
        minimal &= !is_generating(&geom, &sub)?;
    }
    rec.check("no smaller subset of the seed generates", minimal, None);
    rec.data("gr", target);
    Ok(())
}

fn triples(global: &Global, rec: &mut Recorder, space: &str, count: usize, rng_seed: u64) -> Result<(), CliError> {
    let mut model = load_model(global, space)?;
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, 2))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut spanning = 0;
    for _ in 0..count {
        let (h, p0, l0) = random_triple(&mut model, &mut rng)?;
        let set = genset_k2(&mut model, &h, &p0, &l0)?;
        if is_generating(&geom, &set.ids(&geom)?)? {
            spanning += 1;
        }
    }
    rec.check("every triple spans", spanning == count, Some(format!("{spanning}/{count}")));
    Ok(())
}

fn subspaces(
    global: &Global,
    rec: &mut Recorder,
    space: &str,
    k: usize,
    count: usize,
    rng_seed: u64,
) -> Result<(), CliError> {
    let mut model = load_model(global, space)?;
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, k))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut spanning = 0;
    let mut sizes = Vec::new();
    for _ in 0..count {
        let (h, p0, _) = random_triple(&mut model, &mut rng)?;
        let set = genset_k(&mut model, &h, &p0, k, None)?;
        sizes.push(set.len());
        if is_generating(&geom, &set.ids(&geom)?)? {
            spanning += 1;
        }
    }
    rec.data("set_sizes", sizes);
    rec.check("every configuration spans", spanning == count, Some(format!("{spanning}/{count}")));
    Ok(())
}

fn unit(n: usize, i: usize) -> Vec<polargrass::Elem> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn tgen(global: &Global, rec: &mut Recorder, q: u32) -> Result<(), CliError> {
    if ![4, 8, 9].contains(&q) {
        return Err(CliError::Usage("tgen supports q = 4, 8, 9".into()));
    }
    if q != 4 {
        require_large(global, &format!("Q2(6,{q})"))?;
    }
    let mut model = load_model(global, &format!("Qparab(3,{q})"))?;
    let f = model.field().clone();
    let l0 = Subspace::from_rows(&f, 7, &[unit(7, 0), unit(7, 4)])?;
    let l1 = Subspace::from_rows(&f, 7, &[unit(7, 1), unit(7, 5)])?;
    let t = cor54_adjoin(&model, 1, &l0, &l1)?;
    rec.data("t", t.rows().map(|r| r.iter().map(|&x| f.format_elem(x)).collect::<Vec<_>>()).collect::<Vec<_>>());
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, 2))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let ctx = SubfieldContext::new(&geom, 1)?;
    let mut seed = ctx.rational_ids();
    rec.data("rational_lines", seed.len());
    seed.push(geom.id_of(&t).ok_or_else(|| CliError::Compute("t is not a line of the model".into()))?);
    let r = rec.time("closure", || span_closure(&geom, &seed))?;
    rec.check("rational lines and t generate", r.generated_all, Some(format!("closure {} of {}", r.size(), geom.num_points())));
    drop(geom);
    let mut names = vec![format!("t-gen-{q}")];
    if q == 4 {
        names.insert(0, "m-gen".into());
    }
    for name in names {
        let bundle = load_fixture(&name).map_err(|e| CliError::Fixture(e.to_string()))?;
        let report = verify_fixture(&bundle).map_err(|e| CliError::Fixture(e.to_string()))?;
        for r in report.results.iter().filter(|r| r.q == q) {
            rec.check(format!("{name}: {}", r.identity), r.pass, r.detail.clone());
        }
    }
    Ok(())
}

fn orth(global: &Global, rec: &mut Recorder, q: u32) -> Result<(), CliError> {
    if q != 4 {
        require_large(global, &format!("Q2(6,{q})"))?;
    }
    let budget = global.budget.budget();
    let set = rec.time("construct", || orth_q2_genset(q, 3, 1, budget))?;
    let f = Field::with_order(q)?;
    rec.check("21 elements", set.len() == binomial(7, 2), Some(format!("{} elements", set.len())));
    rec.check("all elements rational", set.is_rational(&f.subfield(1)?), None);
    let mut model = load_model(global, &format!("Qparab(3,{q})"))?;
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, 2))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let ids = set.ids(&geom)?;
    let gen = rec.time("closure", || is_generating(&geom, &ids))?;
    rec.check("set generates", gen, None);
    let pr = rec.time("plucker", || plucker_rank(&geom))?;
    rec.data("plucker_rank", pr.rank);
    if q % 2 == 1 {
        rec.check("Plücker rank 21", pr.rank == 21, Some(format!("rank {}", pr.rank)));
        rec.data("gr", if gen && pr.rank == set.len() { Some(pr.rank) } else { None });
    }
    Ok(())
}

fn notgen(global: &Global, rec: &mut Recorder, q: u32) -> Result<(), CliError> {
    let r = rec.time("omega", || omega_obstruction(q, global.budget.budget()))?;
    rec.check("closure equals Ω", r.closure_equals_omega, Some(format!("{} lines", r.closure_size)));
    rec.check("Ω is a subspace", r.omega_is_subspace, None);
    rec.check("Ω is proper", r.proper, Some(format!("{} of {} lines", r.omega, r.lines)));
    rec.check("witness line outside Ω", r.witness_outside, None);
    rec.data("report", &r);
    Ok(())
}

fn hermitian_rank(global: &Global, rec: &mut Recorder, n: usize, d: usize, q0: u32, k: usize) -> Result<(), CliError> {
    let budget = global.budget.budget();
    let set = rec.time("construct", || hermitian_genset(q0, n, d, k, budget))?;
    let target = binomial(2 * n + d, k);
    rec.check("size C(2n+d,k)", set.len() == target, Some(format!("{} elements", set.len())));
    let mut model = load_model(global, &format!("H({n},{d},{q0})"))?;
    let geom = rec.time("enumerate", || build_grassmannian(&mut model, k))?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    let ids = set.ids(&geom)?;
    let gen = rec.time("closure", || is_generating(&geom, &ids))?;
    rec.check("set generates", gen, None);
    if k > 1 && k < n {
        let pr = rec.time("plucker", || plucker_rank(&geom))?;
        rec.check("Plücker rank C(2n+d,k)", pr.rank == target, Some(format!("rank {}", pr.rank)));
    }
    rec.data("notes", &set.notes);
    Ok(())
}

/// Repeatedly adds every line meeting the set in two points.
fn naive_closure(geom: &Geometry, seed: &[u32]) -> BitSet {
    let mut set = BitSet::from_ids(geom.num_points(), seed.iter().map(|&p| p as usize));
    loop {
        let mut changed = false;
        for line in 0..geom.num_lines() {
            let pts = geom.line_points(line);
            if pts.iter().filter(|&&p| set.contains(p as usize)).count() >= 2 {
                for p in pts {
                    changed |= set.insert(p as usize);
                }
            }
        }
        if !changed {
            return set;
        }
    }
}

fn properties(
    global: &Global,
    rec: &mut Recorder,
    space: &str,
    k: usize,
    samples: usize,
    rng_seed: u64,
) -> Result<(), CliError> {
    let mut model = load_model(global, space)?;
    let geom = build_grassmannian(&mut model, k)?;
    rec.model(ModelInfo::of(&model).with_geometry(&geom));
    if geom.num_points() > 5000 {
        return Err(CliError::Budget(format!("the naive oracle is limited to 5000 points, got {}", geom.num_points())));
    }
    let np = geom.num_points() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (mut oracle, mut laws, mut parallel) = (0, 0, 0);
    for _ in 0..samples {
        let len = rng.gen_range(1..=8);
        let seed: Vec<u32> = (0..len).map(|_| rng.gen_range(0..np)).collect();
        let extra = rng.gen_range(0..np);
        let c = span_closure(&geom, &seed)?.closed;
        let mut bigger = seed.clone();
        bigger.push(extra);
        let cb = span_closure(&geom, &bigger)?.closed;
        let ids: Vec<u32> = c.iter().map(|p| p as u32).collect();
        let cc = span_closure(&geom, &ids)?.closed;
        if seed.iter().all(|&p| c.contains(p as usize)) && cc == c && c.is_subset(&cb) {
            laws += 1;
        }
        if naive_closure(&geom, &seed) == c {
            oracle += 1;
        }
        let par = span_closure_with(&geom, &seed, ClosureOptions { parallel: true, trace: false })?;
        if par.closed == c {
            parallel += 1;
        }
    }
    rec.check("closure laws", laws == samples, Some(format!("{laws}/{samples}")));
    rec.check("naive oracle agrees", oracle == samples, Some(format!("{oracle}/{samples}")));
    rec.check("parallel agrees", parallel == samples, Some(format!("{parallel}/{samples}")));
    Ok(())
}
