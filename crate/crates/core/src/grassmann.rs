//! Polar Grassmannians as point-line geometries, span closure, and rank
//! certificates.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, AtomicU8, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::gf::{Elem, Field};
use crate::linalg::{self, Subspace};
use crate::polar::{PolarError, PolarModel, SubspaceTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrassmannError {
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error("k must satisfy 1 ≤ k ≤ {n}, got {k}")]
    BadK { k: usize, n: usize },
    #[error("the seed does not generate the geometry")]
    NotGenerating,
    #[error("Plücker coordinates do not give an embedding of the dual polar space")]
    DualPolarPlucker,
    #[error("Plücker map fails to send a sampled line to a line")]
    NotAnEmbedding,
    #[error("exhaustive search is limited to seeds of at most {max} points, got {got}")]
    SeedTooLarge { max: usize, got: usize },
    #[error("point id {0} out of range")]
    BadPoint(u32),
}

/// Largest seed for which exhaustive subset searches are attempted.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Line storage. Lines are never materialized: a pencil is addressed by a
/// `(k+1)`-space `Z` and a local `(k−1)`-subspace of `Z`, a star by the
/// `(n−1)`-space it is the residue of.
#[derive(Debug)]
enum Incidence {
    Pencil {
        /// `z_locals[z*m + j]`: global ID of the `j`-th hyperplane of `Z`.
        z_locals: Vec<u32>,
        m: usize,
        l: usize,
        /// Local hyperplane `j` of `Z` contains local subspaces `sub_in[j]`.
        sub_in: Vec<Vec<u32>>,
        /// Local subspace `x` lies in local hyperplanes `pencil[x]`.
        pencil: Vec<Vec<u32>>,
        /// Point → positions in `z_locals`.
        offsets: Vec<u64>,
        slots: Vec<u32>,
        uppers: Arc<SubspaceTable>,
        local_lower: HashMap<Subspace, u32>,
    },
    Star {
        /// `point_lines[y*m + j]`: ID of the `j`-th hyperplane of `Y`.
        point_lines: Vec<u32>,
        m: usize,
        offsets: Vec<u64>,
        line_points: Vec<u32>,
        lowers: Arc<SubspaceTable>,
    },
}

/// The `k`-Grassmannian of a polar space.
#[derive(Debug)]
pub struct Geometry {
    descriptor: String,
    field: Arc<Field>,
    k: usize,
    rank: usize,
    points: Arc<SubspaceTable>,
    incidence: Incidence,
    num_lines: usize,
    warnings: Vec<String>,
}

/// Builds `P_k`, enumerating whatever levels it needs.
pub fn build_grassmannian(model: &mut PolarModel, k: usize) -> Result<Geometry, GrassmannError> {
    let n = model.rank();
    if k == 0 || k > n {
        return Err(GrassmannError::BadK { k, n });
    }
    if k < n {
        model.ensure_level(k + 1)?;
        build_pencils(model, k)
    } else {
        model.ensure_level(n)?;
        build_stars(model)
    }
}

fn containment_tables(lower: &[Subspace], upper: &[Subspace], f: &Field) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let mut sub_in = vec![Vec::new(); upper.len()];
    let mut pencil = vec![Vec::new(); lower.len()];
    for (j, u) in upper.iter().enumerate() {
        for (x, l) in lower.iter().enumerate() {
            if u.contains(f, l) {
                sub_in[j].push(x as u32);
                pencil[x].push(j as u32);
            }
        }
    }
    (sub_in, pencil)
}

/// For every row of `table`, the global IDs of its local hyperplanes.
fn hyperplane_ids(
    table: &SubspaceTable,
    targets: &SubspaceTable,
    local: &[Subspace],
    f: &Field,
) -> Result<Vec<u32>, GrassmannError> {
    let m = local.len();
    let dim = table.dim();
    let mut out = vec![0u32; table.len() * m];
    out.par_chunks_mut(m.max(1) * 64)
        .enumerate()
        .try_for_each(|(chunk, dest)| {
            for (off, slot) in dest.chunks_mut(m).enumerate() {
                let z = chunk * 64 + off;
                let rows: Vec<Vec<Elem>> = table.get(z).chunks(dim).map(<[Elem]>::to_vec).collect();
                for (j, sub) in local.iter().enumerate() {
                    let data: Vec<Elem> = sub.rows().flat_map(|r| linalg::combine(f, r, &rows)).collect();
                    let s = Subspace::from_flat(f, dim, data);
                    slot[j] = targets.find(s.as_flat()).ok_or(PolarError::NotInModel)?;
                }
            }
            Ok::<(), GrassmannError>(())
        })?;
    Ok(out)
}

fn csr(num_points: usize, entries: &[u32]) -> (Vec<u64>, Vec<u32>) {
    let mut offsets = vec![0u64; num_points + 1];
    for &p in entries {
        offsets[p as usize + 1] += 1;
    }
    for i in 0..num_points {
        offsets[i + 1] += offsets[i];
    }
    let mut fill: Vec<u64> = offsets[..num_points].to_vec();
    let mut slots = vec![0u32; entries.len()];
    for (s, &p) in entries.iter().enumerate() {
        slots[fill[p as usize] as usize] = s as u32;
        fill[p as usize] += 1;
    }
    (offsets, slots)
}

fn build_pencils(model: &PolarModel, k: usize) -> Result<Geometry, GrassmannError> {
    let f = model.field();
    let points = model.level_arc(k)?;
    let uppers = model.level_arc(k + 1)?;
    let local_k = linalg::all_subspaces(f, k + 1, k);
    let local_lower = linalg::all_subspaces(f, k + 1, k - 1);
    let (sub_in, pencil) = containment_tables(&local_lower, &local_k, f);
    let z_locals = hyperplane_ids(&uppers, &points, &local_k, f)?;
    let (offsets, slots) = csr(points.len(), &z_locals);
    let m = local_k.len();
    let l = local_lower.len();
    let num_lines = uppers.len() * l;
    let mut warnings = Vec::new();
    if num_lines == 0 {
        warnings.push("the geometry has no lines".to_string());
    }
    Ok(Geometry {
        descriptor: model.descriptor().to_string(),
        field: model.form().field_arc().clone(),
        k,
        rank: model.rank(),
        points,
        incidence: Incidence::Pencil {
            z_locals,
            m,
            l,
            sub_in,
            pencil,
            offsets,
            slots,
            uppers,
            local_lower: local_lower.into_iter().enumerate().map(|(i, s)| (s, i as u32)).collect(),
        },
        num_lines,
        warnings,
    })
}

fn build_stars(model: &PolarModel) -> Result<Geometry, GrassmannError> {
    let f = model.field();
    let n = model.rank();
    let points = model.level_arc(n)?;
    let lowers = model.level_arc(n - 1)?;
    let local = linalg::all_subspaces(f, n, n - 1);
    let m = local.len();
    let point_lines = hyperplane_ids(&points, &lowers, &local, f)?;
    let (offsets, slots) = csr(lowers.len(), &point_lines);
    let line_points: Vec<u32> = slots.iter().map(|&s| s / m as u32).collect();
    let mut warnings = Vec::new();
    let sizes: Vec<u64> = offsets.windows(2).map(|w| w[1] - w[0]).collect();
    if sizes.iter().all(|&s| s <= 2) {
        warnings.push("all lines are thin; closure cannot grow beyond the seed".to_string());
    }
    Ok(Geometry {
        descriptor: model.descriptor().to_string(),
        field: model.form().field_arc().clone(),
        k: n,
        rank: n,
        num_lines: lowers.len(),
        points,
        incidence: Incidence::Star {
            point_lines,
            m,
            offsets,
            line_points,
            lowers,
        },
        warnings,
    })
}

impl Geometry {
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Rank of the underlying polar space.
    pub fn polar_rank(&self) -> usize {
        self.rank
    }

    pub fn is_dual_polar(&self) -> bool {
        matches!(self.incidence, Incidence::Star { .. })
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_lines(&self) -> usize {
        self.num_lines
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn points(&self) -> &SubspaceTable {
        &self.points
    }

    pub fn point(&self, id: u32) -> Subspace {
        self.points.subspace(id as usize)
    }

    pub fn id_of(&self, s: &Subspace) -> Option<u32> {
        self.points.id_of(s)
    }

    /// Calls `visit` for every line through `p`.
    #[inline]
    pub fn for_each_line(&self, p: u32, mut visit: impl FnMut(usize)) {
        match &self.incidence {
            Incidence::Pencil {
                m,
                l,
                sub_in,
                offsets,
                slots,
                ..
            } => {
                let (a, b) = (offsets[p as usize] as usize, offsets[p as usize + 1] as usize);
                for &s in &slots[a..b] {
                    let (z, j) = (s as usize / m, s as usize % m);
                    for &x in &sub_in[j] {
                        visit(z * l + x as usize);
                    }
                }
            }
            Incidence::Star { point_lines, m, .. } => {
                let p = p as usize;
                for &x in &point_lines[p * m..(p + 1) * m] {
                    visit(x as usize);
                }
            }
        }
    }

    /// Calls `visit` for every point of `line`.
    #[inline]
    pub fn for_each_point(&self, line: usize, mut visit: impl FnMut(u32)) {
        match &self.incidence {
            Incidence::Pencil {
                z_locals, m, l, pencil, ..
            } => {
                let (z, x) = (line / l, line % l);
                for &j in &pencil[x] {
                    visit(z_locals[z * m + j as usize]);
                }
            }
            Incidence::Star {
                offsets, line_points, ..
            } => {
                for &y in &line_points[offsets[line] as usize..offsets[line + 1] as usize] {
                    visit(y);
                }
            }
        }
    }

    pub fn line_points(&self, line: usize) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each_point(line, |p| out.push(p));
        out
    }

    pub fn point_lines(&self, p: u32) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_line(p, |l| out.push(l));
        out
    }

    /// The line through two distinct collinear points, if any.
    pub fn common_line(&self, a: u32, b: u32) -> Option<usize> {
        if a == b {
            return None;
        }
        let f = &*self.field;
        let (sa, sb) = (self.point(a), self.point(b));
        let meet = sa.intersect(f, &sb).ok()?;
        if meet.rank() + 1 != self.k {
            return None;
        }
        match &self.incidence {
            Incidence::Pencil {
                uppers, local_lower, l, ..
            } => {
                let join = sa.sum(f, &sb).ok()?;
                let z = uppers.id_of(&join)?;
                let basis = join.row_vecs();
                let coords: Vec<Vec<Elem>> = meet.rows().map(|r| join.coords_of(f, r).expect("meet lies in join")).collect();
                let local = Subspace::from_rows(f, basis.len(), &coords).ok()?;
                let x = local_lower.get(&local)?;
                Some(z as usize * l + *x as usize)
            }
            Incidence::Star { lowers, .. } => lowers.id_of(&meet).map(|x| x as usize),
        }
    }

    pub fn line_contains(&self, line: usize, p: u32) -> bool {
        let mut hit = false;
        self.for_each_point(line, |y| hit |= y == p);
        hit
    }

    /// The subspace a line is the pencil or star of: `(X, Z)` for pencils,
    /// `(X, X^⊥)`-type stars return `(X, None)`.
    pub fn line_flag(&self, line: usize) -> (Subspace, Option<Subspace>) {
        match &self.incidence {
            Incidence::Pencil { uppers, l, .. } => {
                let z = uppers.subspace(line / l);
                let pts = self.line_points(line);
                let f = &*self.field;
                let x = self.point(pts[0]).intersect(f, &self.point(pts[1])).expect("same ambient space");
                (x, Some(z))
            }
            Incidence::Star { lowers, .. } => (lowers.subspace(line), None),
        }
    }

    pub fn closure_state(&self) -> ClosureState<'_> {
        ClosureState::new(self, false)
    }
}

/// Options for [`span_closure_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClosureOptions {
    /// Record for each point the line that first forced it.
    pub trace: bool,
    /// Process worklist waves in parallel.
    pub parallel: bool,
}

/// Marker in traces for seed points and unreached points.
pub const NO_LINE: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureResult {
    pub closed: BitSet,
    pub generated_all: bool,
    pub seed_size: usize,
    pub rounds: usize,
    pub trace: Option<Vec<u64>>,
}

impl ClosureResult {
    pub fn size(&self) -> usize {
        self.closed.count()
    }
}

/// Incremental closure: points can be added one at a time.
#[derive(Clone, Debug)]
pub struct ClosureState<'g> {
    geom: &'g Geometry,
    closed: BitSet,
    closed_count: usize,
    counts: Vec<u8>,
    trace: Option<Vec<u64>>,
    rounds: usize,
}

impl<'g> ClosureState<'g> {
    fn new(geom: &'g Geometry, trace: bool) -> Self {
        ClosureState {
            geom,
            closed: BitSet::new(geom.num_points()),
            closed_count: 0,
            counts: vec![0; geom.num_lines()],
            trace: trace.then(|| vec![NO_LINE; geom.num_points()]),
            rounds: 0,
        }
    }

    /// Adds points and closes up.
    pub fn add_all(&mut self, pts: &[u32]) {
        let mut wave: Vec<u32> = pts.iter().copied().filter(|&p| self.closed.insert(p as usize)).collect();
        self.closed_count += wave.len();
        let mut next = Vec::new();
        while !wave.is_empty() {
            self.rounds += 1;
            for &p in &wave {
                let geom = self.geom;
                let counts = &mut self.counts;
                let closed = &mut self.closed;
                let trace = &mut self.trace;
                let next = &mut next;
                geom.for_each_line(p, |line| {
                    counts[line] += 1;
                    if counts[line] == 2 {
                        geom.for_each_point(line, |y| {
                            if closed.insert(y as usize) {
                                if let Some(t) = trace.as_mut() {
                                    t[y as usize] = line as u64;
                                }
                                next.push(y);
                            }
                        });
                    }
                });
            }
            self.closed_count += next.len();
            std::mem::swap(&mut wave, &mut next);
            next.clear();
        }
    }

    pub fn add(&mut self, p: u32) {
        self.add_all(&[p]);
    }

    pub fn is_closed(&self, p: u32) -> bool {
        self.closed.contains(p as usize)
    }

    pub fn closed(&self) -> &BitSet {
        &self.closed
    }

    pub fn count(&self) -> usize {
        self.closed_count
    }

    pub fn is_all(&self) -> bool {
        self.closed_count == self.geom.num_points()
    }

    pub fn into_result(self, seed_size: usize) -> ClosureResult {
        ClosureResult {
            generated_all: self.is_all(),
            closed: self.closed,
            seed_size,
            rounds: self.rounds,
            trace: self.trace,
        }
    }
}

fn check_seed(geom: &Geometry, seed: &[u32]) -> Result<(), GrassmannError> {
    match seed.iter().find(|&&p| p as usize >= geom.num_points()) {
        Some(&p) => Err(GrassmannError::BadPoint(p)),
        None => Ok(()),
    }
}

/// The least subspace of the geometry containing `seed`.
pub fn span_closure(geom: &Geometry, seed: &[u32]) -> Result<ClosureResult, GrassmannError> {
    span_closure_with(geom, seed, ClosureOptions::default())
}

pub fn span_closure_with(geom: &Geometry, seed: &[u32], opts: ClosureOptions) -> Result<ClosureResult, GrassmannError> {
    check_seed(geom, seed)?;
    let distinct = BitSet::from_ids(geom.num_points(), seed.iter().map(|&p| p as usize)).count();
    if opts.parallel && !opts.trace {
        return Ok(parallel_closure(geom, seed, distinct));
    }
    let mut state = ClosureState::new(geom, opts.trace);
    state.add_all(seed);
    Ok(state.into_result(distinct))
}

fn parallel_closure(geom: &Geometry, seed: &[u32], seed_size: usize) -> ClosureResult {
    let np = geom.num_points();
    let words: Vec<AtomicU64> = (0..np.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
    let counts: Vec<AtomicU8> = (0..geom.num_lines()).map(|_| AtomicU8::new(0)).collect();
    let mark = |p: u32| {
        let bit = 1u64 << (p & 63);
        words[p as usize >> 6].fetch_or(bit, Ordering::Relaxed) & bit == 0
    };
    let mut wave: Vec<u32> = seed.iter().copied().filter(|&p| mark(p)).collect();
    let mut total = wave.len();
    let mut rounds = 0;
    while !wave.is_empty() {
        rounds += 1;
        wave = wave
            .par_chunks(64)
            .flat_map_iter(|chunk| {
                let mut out = Vec::new();
                for &p in chunk {
                    geom.for_each_line(p, |line| {
                        if counts[line].fetch_add(1, Ordering::Relaxed) == 1 {
                            geom.for_each_point(line, |y| {
                                if mark(y) {
                                    out.push(y);
                                }
                            });
                        }
                    });
                }
                out
            })
            .collect();
        total += wave.len();
    }
    let closed = BitSet::from_words(np, words.into_iter().map(AtomicU64::into_inner).collect());
    debug_assert_eq!(closed.count(), total);
    ClosureResult {
        generated_all: total == np,
        closed,
        seed_size,
        rounds,
        trace: None,
    }
}

pub fn is_generating(geom: &Geometry, seed: &[u32]) -> Result<bool, GrassmannError> {
    Ok(span_closure(geom, seed)?.generated_all)
}

/// Drops seed points in descending ID order whenever the rest still
/// generates. The result is irredundant with respect to single removals.
pub fn greedy_minimize(geom: &Geometry, seed: &[u32]) -> Result<Vec<u32>, GrassmannError> {
    let mut current: Vec<u32> = seed.to_vec();
    current.sort_unstable();
    current.dedup();
    if !is_generating(geom, &current)? {
        return Err(GrassmannError::NotGenerating);
    }
    let order: Vec<u32> = current.iter().rev().copied().collect();
    for p in order {
        let trial: Vec<u32> = current.iter().copied().filter(|&x| x != p).collect();
        if is_generating(geom, &trial)? {
            current = trial;
        }
    }
    Ok(current)
}

/// Searches all `size`-subsets of `seed` for a generating one.
pub fn generating_subset(geom: &Geometry, seed: &[u32], size: usize) -> Result<Option<Vec<u32>>, GrassmannError> {
    if seed.len() > EXHAUSTIVE_LIMIT {
        return Err(GrassmannError::SeedTooLarge {
            max: EXHAUSTIVE_LIMIT,
            got: seed.len(),
        });
    }
    check_seed(geom, seed)?;
    let subsets: Vec<Vec<usize>> = linalg::combinations(seed.len(), size).collect();
    let found = subsets.par_iter().find_first(|idx| {
        let sub: Vec<u32> = idx.iter().map(|&i| seed[i]).collect();
        span_closure(geom, &sub).map(|r| r.generated_all).unwrap_or(false)
    });
    Ok(found.map(|idx| idx.iter().map(|&i| seed[i]).collect()))
}

/// Result of a Plücker rank computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluckerRank {
    pub rank: usize,
    /// Dimension `C(N,k)` of the exterior power.
    pub ambient: usize,
    /// Number of lines whose image was checked to be a projective line.
    pub lines_checked: usize,
}

/// Rank of the Plücker coordinates of all points, with a sampled check that
/// lines map to lines.
pub fn plucker_rank(geom: &Geometry) -> Result<PluckerRank, GrassmannError> {
    if geom.is_dual_polar() {
        return Err(GrassmannError::DualPolarPlucker);
    }
    let f = &*geom.field;
    let dim = geom.points.dim();
    let ambient = linalg::binomial(dim, geom.k);
    let plucker = |p: u32| geom.point(p).plucker(f).expect("points are nonzero subspaces");

    let sample = 200.min(geom.num_lines());
    let step = (geom.num_lines() / sample.max(1)).max(1);
    let mut lines_checked = 0;
    for line in (0..geom.num_lines()).step_by(step).take(sample) {
        let pts = geom.line_points(line);
        let rows: Vec<Vec<Elem>> = pts.iter().take(4).map(|&p| plucker(p)).collect();
        if linalg::matrix_rank(f, &rows) != 2 {
            return Err(GrassmannError::NotAnEmbedding);
        }
        lines_checked += 1;
    }

    // Visit points in a scattered order so full rank is reached early.
    let np = geom.num_points();
    let stride = (1..)
        .map(|i| np / 2 + i)
        .find(|&s| gcd(s, np) == 1)
        .unwrap_or(1);
    let mut reducer = linalg::RowReducer::new(ambient);
    let mut idx = 0usize;
    for _ in 0..np {
        reducer.insert(f, &plucker(idx as u32));
        if reducer.is_full() {
            break;
        }
        idx = (idx + stride) % np;
    }
    Ok(PluckerRank {
        rank: reducer.rank(),
        ambient,
        lines_checked,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rank of the point vectors of a polar space, the natural embedding rank.
pub fn natural_rank(geom: &Geometry) -> Result<usize, GrassmannError> {
    if geom.k != 1 {
        return Err(GrassmannError::BadK { k: geom.k, n: 1 });
    }
    let f = &*geom.field;
    let mut reducer = linalg::RowReducer::new(geom.points.dim());
    for p in 0..geom.num_points() {
        reducer.insert(f, geom.points.get(p));
        if reducer.is_full() {
            break;
        }
    }
    Ok(reducer.rank())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LowerMethod {
    Plucker,
    Natural,
    Cited,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperBound {
    pub size: usize,
    pub generates: bool,
    /// The generating set as canonical subspaces.
    pub set: Vec<Subspace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBound {
    pub method: LowerMethod,
    pub value: usize,
    /// Where a cited bound comes from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// Upper and lower bounds on the generating rank of a geometry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub upper: Option<UpperBound>,
    pub lower: Option<LowerBound>,
    /// True when a generating set meets a computed lower bound.
    pub pinned: bool,
}

impl RankCertificate {
    pub fn new(upper: Option<UpperBound>, lower: Option<LowerBound>) -> RankCertificate {
        let pinned = match (&upper, &lower) {
            (Some(u), Some(l)) => u.generates && l.method != LowerMethod::Cited && u.size == l.value,
            _ => false,
        };
        RankCertificate { upper, lower, pinned }
    }

    /// `upper ≥ lower` whenever both are present and the upper bound holds.
    pub fn is_consistent(&self) -> bool {
        match (&self.upper, &self.lower) {
            (Some(u), Some(l)) if u.generates => u.size >= l.value,
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::Budget;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geometry(desc: &str, k: usize) -> Geometry {
        let mut m = PolarModel::parse(desc, Budget::DEFAULT).unwrap();
        build_grassmannian(&mut m, k).unwrap()
    }

    fn naive_closure(geom: &Geometry, seed: &[u32]) -> BitSet {
        let lines: Vec<Vec<u32>> = (0..geom.num_lines()).map(|l| geom.line_points(l)).collect();
        let mut closed = BitSet::from_ids(geom.num_points(), seed.iter().map(|&p| p as usize));
        loop {
            let mut changed = false;
            for line in &lines {
                if line.iter().filter(|&&p| closed.contains(p as usize)).count() >= 2 {
                    for &p in line {
                        changed |= closed.insert(p as usize);
                    }
                }
            }
            if !changed {
                return closed;
            }
        }
    }

    fn apartment(model: &PolarModel, geom: &Geometry) -> Vec<u32> {
        let f = model.field();
        let n = model.rank();
        let pairs = &model.witt().pairs;
        (0..1u32 << n)
            .map(|mask| {
                let rows: Vec<Vec<Elem>> = (0..n)
                    .map(|i| if mask >> i & 1 == 0 { pairs[i].0.clone() } else { pairs[i].1.clone() })
                    .collect();
                geom.id_of(&Subspace::from_rows(f, model.dim(), &rows).unwrap()).unwrap()
            })
            .collect()
    }

    #[test]
    fn sizes() {
        // Lines of Q(6,2), counted as collinear point pairs over pairs per line.
        let mut m = PolarModel::parse("Qparab(3,2)", Budget::DEFAULT).unwrap();
        let np = m.num_points();
        let pairs = (0..np).flat_map(|a| (a + 1..np).map(move |b| (a, b))).filter(|&(a, b)| m.collinear(a, b)).count();
        let g = build_grassmannian(&mut m, 2).unwrap();
        assert_eq!(g.num_points(), pairs / 3);
        assert_eq!(g.num_points(), 315);
        let g = geometry("H(2,0,2)", 2);
        assert!(g.is_dual_polar());
        assert_eq!((g.num_points(), g.num_lines()), (27, 45));
        assert!((0..45).all(|l| g.line_points(l).len() == 3));
        let g = geometry("Qplus(3,2)", 1);
        assert_eq!((g.num_points(), g.num_lines()), (35, 105));
        let g = geometry("H(2,1,2)", 2);
        assert_eq!((g.num_points(), g.num_lines()), (297, 165));
        assert!((0..165).all(|l| g.line_points(l).len() == 9));
    }

    #[test]
    fn k1_is_the_polar_space() {
        let mut m = PolarModel::parse("Qparab(3,2)", Budget::DEFAULT).unwrap();
        let g = build_grassmannian(&mut m, 1).unwrap();
        let lines = m.level(2).unwrap();
        assert_eq!(g.num_lines(), lines.len());
        for l in 0..g.num_lines() {
            let pts = g.line_points(l);
            let z = lines.subspace(l);
            let f = m.field();
            assert_eq!(pts.len(), 3);
            assert!(pts.iter().all(|&p| z.contains(f, &g.point(p))));
        }
    }

    #[test]
    fn incidence_axioms() {
        for (d, k) in [("Qparab(3,2)", 2), ("Qplus(3,2)", 3), ("H(2,1,2)", 1), ("Qplus(3,3)", 2)] {
            let g = geometry(d, k);
            let mut seen = std::collections::HashSet::new();
            for l in 0..g.num_lines() {
                let pts = g.line_points(l);
                assert!(pts.len() >= 2);
                for (i, &a) in pts.iter().enumerate() {
                    for &b in &pts[i + 1..] {
                        assert!(seen.insert((a.min(b), a.max(b))), "{d}: two lines share {a},{b}");
                    }
                }
                for &p in &pts {
                    assert!(g.point_lines(p).contains(&l));
                }
            }
        }
    }

    #[test]
    fn hyperbolic_dual_warns() {
        let g = geometry("Qplus(3,2)", 3);
        assert_eq!(g.num_points(), 30);
        assert!(!g.warnings().is_empty());
    }

    #[test]
    fn common_lines() {
        let g = geometry("Qparab(3,2)", 2);
        for l in (0..g.num_lines()).step_by(37) {
            let pts = g.line_points(l);
            assert_eq!(g.common_line(pts[0], pts[2]), Some(l));
        }
        let g = geometry("H(2,1,2)", 2);
        let pts = g.line_points(11);
        assert_eq!(g.common_line(pts[3], pts[7]), Some(11));
    }

    #[test]
    fn closure_basics() {
        let g = geometry("Qparab(3,2)", 2);
        let all: Vec<u32> = (0..g.num_points() as u32).collect();
        let r = span_closure(&g, &all).unwrap();
        assert!(r.generated_all);
        assert_eq!(r.rounds, 1);
        let r = span_closure(&g, &[]).unwrap();
        assert_eq!(r.size(), 0);
        let pts = g.line_points(0);
        let r = span_closure(&g, &pts[..2]).unwrap();
        assert!(pts.iter().all(|&p| r.closed.contains(p as usize)));
        assert!(span_closure(&g, &[g.num_points() as u32]).is_err());
    }

    #[test]
    fn dual_polar_apartment_generates() {
        let mut m = PolarModel::parse("H(2,1,2)", Budget::DEFAULT).unwrap();
        let g = build_grassmannian(&mut m, 2).unwrap();
        let apt = apartment(&m, &g);
        assert_eq!(apt.len(), 4);
        assert!(is_generating(&g, &apt).unwrap());
        assert_eq!(generating_subset(&g, &apt, 3).unwrap(), None);
    }

    #[test]
    fn trace_records_forcing_lines() {
        let mut m = PolarModel::parse("H(2,1,2)", Budget::DEFAULT).unwrap();
        let g = build_grassmannian(&mut m, 2).unwrap();
        let apt = apartment(&m, &g);
        let r = span_closure_with(&g, &apt, ClosureOptions { trace: true, parallel: false }).unwrap();
        let trace = r.trace.unwrap();
        for p in 0..g.num_points() as u32 {
            if apt.contains(&p) {
                assert_eq!(trace[p as usize], NO_LINE);
            } else {
                assert!(g.line_contains(trace[p as usize] as usize, p));
            }
        }
    }

    #[test]
    fn closure_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (d, k) in [("Qparab(3,2)", 2), ("H(2,1,2)", 2), ("Qplus(3,2)", 1), ("Qminus(2,3)", 2), ("Qminus(2,2)", 1), ("Qplus(3,3)", 3)] {
            let g = geometry(d, k);
            assert!(g.num_points() <= 500);
            for _ in 0..20 {
                let size = rng.gen_range(0..8);
                let seed: Vec<u32> = (0..size).map(|_| rng.gen_range(0..g.num_points() as u32)).collect();
                let fast = span_closure(&g, &seed).unwrap();
                assert_eq!(fast.closed, naive_closure(&g, &seed), "{d} k={k} seed {seed:?}");
                let par = span_closure_with(&g, &seed, ClosureOptions { trace: false, parallel: true }).unwrap();
                assert_eq!(par.closed, fast.closed);
            }
        }
    }

    #[test]
    fn closure_operator_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = geometry("Qparab(3,2)", 2);
        let np = g.num_points() as u32;
        for _ in 0..40 {
            let s: Vec<u32> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(0..np)).collect();
            let mut t = s.clone();
            t.extend((0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..np)));
            let cs = span_closure(&g, &s).unwrap().closed;
            let ct = span_closure(&g, &t).unwrap().closed;
            assert!(s.iter().all(|&p| cs.contains(p as usize)));
            assert!(cs.is_subset(&ct));
            let again: Vec<u32> = cs.iter().map(|p| p as u32).collect();
            assert_eq!(span_closure(&g, &again).unwrap().closed, cs);
            // Closed sets are subspaces.
            for l in 0..g.num_lines() {
                let pts = g.line_points(l);
                let inside = pts.iter().filter(|&&p| cs.contains(p as usize)).count();
                assert!(inside <= 1 || inside == pts.len());
            }
        }
    }

    #[test]
    fn incremental_matches_batch() {
        let g = geometry("Qplus(3,3)", 2);
        let seed = [3u32, 50, 77, 120, 201, 5, 9, 300];
        let mut st = g.closure_state();
        for &p in &seed {
            st.add(p);
        }
        assert_eq!(st.closed(), &span_closure(&g, &seed).unwrap().closed);
    }

    #[test]
    fn minimize() {
        let g = geometry("Qparab(3,2)", 1);
        let all: Vec<u32> = (0..g.num_points() as u32).collect();
        let min = greedy_minimize(&g, &all).unwrap();
        assert!(is_generating(&g, &min).unwrap());
        assert!(min.len() >= 7);
        for &p in &min {
            let rest: Vec<u32> = min.iter().copied().filter(|&x| x != p).collect();
            assert!(!is_generating(&g, &rest).unwrap());
        }
        assert_eq!(greedy_minimize(&g, &min[..2]), Err(GrassmannError::NotGenerating));
    }

    #[test]
    fn plucker_ranks() {
        let g = geometry("Qparab(3,3)", 2);
        let r = plucker_rank(&g).unwrap();
        assert_eq!((r.rank, r.ambient), (21, 21));
        assert!(r.lines_checked > 0);
        let g = geometry("H(2,1,2)", 1);
        assert_eq!(plucker_rank(&g).unwrap().rank, 5);
        assert_eq!(natural_rank(&g).unwrap(), 5);
        let g = geometry("H(2,1,2)", 2);
        assert_eq!(plucker_rank(&g), Err(GrassmannError::DualPolarPlucker));
        // Char 2: the rank is reported, whatever it is.
        let g = geometry("Qparab(3,2)", 2);
        let r = plucker_rank(&g).unwrap();
        assert!(r.rank <= 21);
    }

    #[test]
    fn certificates() {
        let c = RankCertificate::new(
            Some(UpperBound {
                size: 5,
                generates: true,
                set: Vec::new(),
            }),
            Some(LowerBound {
                method: LowerMethod::Plucker,
                value: 5,
                source: None,
            }),
        );
        assert!(c.pinned && c.is_consistent());
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"plucker\""));
    }
}
