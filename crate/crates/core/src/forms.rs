//! Quadratic and Hermitian forms, their bilinearizations, radicals and Witt
//! decompositions, and the standard forms used throughout the crate.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field, FieldError, Subfield};
use crate::linalg::{self, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("matrix must be {n}×{n}")]
    Shape { n: usize },
    #[error("matrix is not σ-Hermitian at ({i},{j})")]
    NotHermitian { i: usize, j: usize },
    #[error("form is degenerate: radical contains the singular vector {vector:?}")]
    Degenerate { vector: Vec<Elem> },
    #[error("vector of length {got} for a form on V({expected})")]
    Length { expected: usize, got: usize },
    #[error("operation needs a quadratic form")]
    NotQuadratic,
    #[error("operation needs characteristic 2")]
    NotChar2,
    #[error("cannot split {requested} planes from a space of dimension {available}")]
    Split { requested: usize, available: usize },
    #[error("unknown space descriptor {0:?}")]
    Descriptor(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Quadratic,
    Hermitian,
}

/// A quadratic form `q(x) = Σ_{i≤j} C_ij x_i x_j` or a σ-Hermitian form
/// `h(x,y) = Σ x_i^σ M_ij y_j` on `V(N, F)`.
#[derive(Clone)]
pub struct Form {
    kind: FormKind,
    field: Arc<Field>,
    n: usize,
    /// Upper-triangular `C` for quadratic forms, `M` for Hermitian ones.
    coeffs: Vec<Elem>,
    /// Gram matrix of the associated bilinear or sesquilinear form.
    gram: Vec<Elem>,
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Form")
            .field("kind", &self.kind)
            .field("field", &self.field.descriptor())
            .field("n", &self.n)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && *self.field == *other.field
            && self.n == other.n
            && self.coeffs == other.coeffs
    }
}

impl Form {
    /// Quadratic form from a coefficient matrix; entries below the diagonal
    /// are folded onto the transposed position.
    pub fn quadratic(field: Arc<Field>, c: &[Vec<Elem>]) -> Result<Form, FormError> {
        let form = Form::quadratic_unchecked(field, c)?;
        form.check_nondegenerate()?;
        Ok(form)
    }

    pub(crate) fn quadratic_unchecked(field: Arc<Field>, c: &[Vec<Elem>]) -> Result<Form, FormError> {
        let n = c.len();
        if c.iter().any(|r| r.len() != n) {
            return Err(FormError::Shape { n });
        }
        let f = &*field;
        let mut coeffs = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                coeffs[a * n + b] = f.add(coeffs[a * n + b], c[i][j]);
            }
        }
        let mut gram = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] = if i == j {
                    f.add(coeffs[i * n + i], coeffs[i * n + i])
                } else if i < j {
                    coeffs[i * n + j]
                } else {
                    coeffs[j * n + i]
                };
            }
        }
        Ok(Form {
            kind: FormKind::Quadratic,
            field,
            n,
            coeffs,
            gram,
        })
    }

    /// Hermitian form from its Gram matrix over GF(q0²).
    pub fn hermitian(field: Arc<Field>, m: &[Vec<Elem>]) -> Result<Form, FormError> {
        let form = Form::hermitian_unchecked(field, m)?;
        form.check_nondegenerate()?;
        Ok(form)
    }

    pub(crate) fn hermitian_unchecked(field: Arc<Field>, m: &[Vec<Elem>]) -> Result<Form, FormError> {
        let n = m.len();
        if m.iter().any(|r| r.len() != n) {
            return Err(FormError::Shape { n });
        }
        for i in 0..n {
            for j in 0..n {
                if m[j][i] != field.conj(m[i][j])? {
                    return Err(FormError::NotHermitian { i, j });
                }
            }
        }
        let coeffs: Vec<Elem> = m.iter().flatten().copied().collect();
        Ok(Form {
            kind: FormKind::Hermitian,
            field,
            n,
            gram: coeffs.clone(),
            coeffs,
        })
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<Field> {
        &self.field
    }

    /// Dimension `N` of the underlying vector space.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// The coefficient matrix as stored (upper triangular for quadratic forms).
    pub fn matrix(&self) -> Vec<Vec<Elem>> {
        self.coeffs.chunks(self.n).map(<[Elem]>::to_vec).collect()
    }

    fn check_len(&self, x: &[Elem]) -> Result<(), FormError> {
        if x.len() != self.n {
            Err(FormError::Length {
                expected: self.n,
                got: x.len(),
            })
        } else {
            Ok(())
        }
    }

    /// `q(x)` or `h(x,x)`.
    pub fn eval(&self, x: &[Elem]) -> Result<Elem, FormError> {
        self.check_len(x)?;
        Ok(self.value(x))
    }

    /// `f(x,y)`: the bilinearization of `q`, or `h(x,y)`.
    pub fn eval_pair(&self, x: &[Elem], y: &[Elem]) -> Result<Elem, FormError> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.pair(x, y))
    }

    /// Unchecked `q(x)` or `h(x,x)`.
    #[inline]
    pub fn value(&self, x: &[Elem]) -> Elem {
        let f = &*self.field;
        let n = self.n;
        let mut acc = 0;
        match self.kind {
            FormKind::Quadratic => {
                for i in 0..n {
                    let xi = x[i];
                    if xi == 0 {
                        continue;
                    }
                    let row = &self.coeffs[i * n..(i + 1) * n];
                    let mut s = 0;
                    for j in i..n {
                        if x[j] != 0 && row[j] != 0 {
                            s = f.add(s, f.mul(row[j], x[j]));
                        }
                    }
                    acc = f.add(acc, f.mul(xi, s));
                }
            }
            FormKind::Hermitian => {
                for i in 0..n {
                    if x[i] == 0 {
                        continue;
                    }
                    let xs = f.conj_unchecked(x[i]);
                    let row = &self.coeffs[i * n..(i + 1) * n];
                    for j in 0..n {
                        if x[j] != 0 && row[j] != 0 {
                            acc = f.add(acc, f.mul(xs, f.mul(row[j], x[j])));
                        }
                    }
                }
            }
        }
        acc
    }

    /// Unchecked `f(x,y)`.
    #[inline]
    pub fn pair(&self, x: &[Elem], y: &[Elem]) -> Elem {
        linalg::dot(&self.field, &self.functional(x), y)
    }

    /// The linear functional `y ↦ f(x,y)` as a coefficient row.
    pub fn functional(&self, x: &[Elem]) -> Vec<Elem> {
        let f = &*self.field;
        let n = self.n;
        let mut a = vec![0; n];
        for i in 0..n {
            let xi = match self.kind {
                FormKind::Quadratic => x[i],
                FormKind::Hermitian => f.conj_unchecked(x[i]),
            };
            if xi == 0 {
                continue;
            }
            for j in 0..n {
                a[j] = f.add(a[j], f.mul(xi, self.gram[i * n + j]));
            }
        }
        a
    }

    #[inline]
    pub fn is_singular(&self, x: &[Elem]) -> bool {
        self.value(x) == 0
    }

    /// The bilinearization `f(x,y) = q(x+y) − q(x) − q(y)`.
    pub fn bilinearize(&self) -> Result<impl Fn(&[Elem], &[Elem]) -> Elem + '_, FormError> {
        if self.kind != FormKind::Quadratic {
            return Err(FormError::NotQuadratic);
        }
        Ok(move |x: &[Elem], y: &[Elem]| self.pair(x, y))
    }

    /// Radical of the associated bilinear (or sesquilinear) form.
    pub fn radical(&self) -> Subspace {
        let f = &*self.field;
        // x is in the radical iff x'ᵀ G = 0, i.e. Gᵀ x' = 0 with x' = x or σ(x).
        let n = self.n;
        let mut gt = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                gt[j * n + i] = self.gram[i * n + j];
            }
        }
        let mut basis = linalg::null_space(f, &gt, n);
        if self.kind == FormKind::Hermitian {
            for v in &mut basis {
                for x in v.iter_mut() {
                    *x = f.conj_unchecked(*x);
                }
            }
        }
        Subspace::from_rows(f, n, &basis).expect("null space rows have length N")
    }

    /// Fails with a singular radical vector when the polar space is degenerate.
    pub fn check_nondegenerate(&self) -> Result<(), FormError> {
        let rad = self.radical();
        if let Some(v) = rad
            .points(&self.field)
            .into_iter()
            .find(|v| self.is_singular(v))
        {
            return Err(FormError::Degenerate { vector: v });
        }
        Ok(())
    }

    /// The form induced on the span of `basis`, in coordinates relative to it.
    pub fn restrict(&self, basis: &[Vec<Elem>]) -> Form {
        let f = &*self.field;
        let k = basis.len();
        let mut m = vec![vec![0; k]; k];
        for i in 0..k {
            for j in 0..k {
                m[i][j] = match self.kind {
                    FormKind::Quadratic if i == j => self.value(&basis[i]),
                    FormKind::Quadratic if i < j => self.pair(&basis[i], &basis[j]),
                    FormKind::Quadratic => 0,
                    FormKind::Hermitian => self.pair(&basis[i], &basis[j]),
                };
            }
        }
        let _ = f;
        match self.kind {
            FormKind::Quadratic => Form::quadratic_unchecked(self.field.clone(), &m),
            FormKind::Hermitian => Form::hermitian_unchecked(self.field.clone(), &m),
        }
        .expect("restricted matrices are square and σ-Hermitian")
    }

    /// True iff every coefficient lies in `sub`.
    pub fn coefficients_in(&self, sub: &Subfield) -> bool {
        self.coeffs.iter().all(|&c| sub.contains(c))
    }

    /// Least `a` with `a + a^σ = t`.
    pub(crate) fn trace_preimage(&self, t: Elem) -> Elem {
        let f = &*self.field;
        f.elements()
            .find(|&a| f.add(a, f.conj_unchecked(a)) == t)
            .expect("the relative trace is surjective")
    }

    /// Least singular nonzero vector of the span of `basis`, enumerating
    /// normalized coefficient vectors in order.
    fn first_singular(&self, basis: &[Vec<Elem>]) -> Option<Vec<Elem>> {
        let f = &*self.field;
        linalg::normalized_vectors(f, basis.len())
            .map(|c| linalg::combine(f, &c, basis))
            .find(|v| self.is_singular(v))
    }

    /// Greedy Witt decomposition into hyperbolic pairs and an anisotropic kernel.
    pub fn witt_decompose(&self) -> Result<WittData, FormError> {
        self.check_nondegenerate()?;
        let f = &*self.field;
        let n = self.n;
        let mut w = Subspace::full(n);
        let mut pairs = Vec::new();
        while let Some(u) = self.first_singular(&w.row_vecs()) {
            let fu = self.functional(&u);
            let b = w
                .rows()
                .find(|b| linalg::dot(f, &fu, b) != 0)
                .expect("nondegeneracy gives a non-orthogonal partner")
                .to_vec();
            let mut v = linalg::scale(f, f.inv_nz(linalg::dot(f, &fu, &b)), &b);
            let shift = match self.kind {
                FormKind::Quadratic => self.value(&v),
                FormKind::Hermitian => self.trace_preimage(self.value(&v)),
            };
            linalg::axpy(f, &mut v, f.neg(shift), &u);
            debug_assert_eq!(self.value(&v), 0);
            debug_assert_eq!(self.pair(&u, &v), 1);
            let fv = self.functional(&v);
            // W ∩ ⟨u,v⟩^⊥ computed in coordinates relative to W.
            let rows = w.row_vecs();
            let cons: Vec<Elem> = [&fu, &fv]
                .iter()
                .flat_map(|a| rows.iter().map(|r| linalg::dot(f, a, r)).collect::<Vec<_>>())
                .collect();
            let coeffs = linalg::null_space(f, &cons, rows.len());
            let next: Vec<Vec<Elem>> = coeffs.iter().map(|c| linalg::combine(f, c, &rows)).collect();
            w = Subspace::from_rows(f, n, &next).expect("combinations have length N");
            pairs.push((u, v));
        }
        let anisotropic = w.row_vecs();
        let radical = match self.kind {
            FormKind::Quadratic => self.radical(),
            FormKind::Hermitian => Subspace::empty(n),
        };
        let mut reducer = linalg::RowReducer::new(n);
        for r in radical.rows() {
            reducer.insert(f, r);
        }
        let elliptic: Vec<Vec<Elem>> = anisotropic
            .iter()
            .filter(|v| reducer.insert(f, v))
            .cloned()
            .collect();
        let d = anisotropic.len();
        let d1 = radical.rank();
        Ok(WittData {
            n: pairs.len(),
            d,
            d1,
            d2: d - d1,
            pairs,
            anisotropic,
            radical,
            elliptic,
        })
    }

    /// Splits an `f`-nondegenerate subspace into `m` mutually orthogonal planes,
    /// each containing a non-orthogonal pair.
    pub fn split_planes(&self, space: &[Vec<Elem>], m: usize) -> Result<Vec<[Vec<Elem>; 2]>, FormError> {
        let f = &*self.field;
        let mut rows: Vec<Vec<Elem>> = space.to_vec();
        let mut planes = Vec::new();
        for _ in 0..m {
            let available = rows.len();
            let err = FormError::Split {
                requested: m,
                available: space.len(),
            };
            let v = rows.first().cloned().ok_or(err.clone())?;
            let fv = self.functional(&v);
            let w = rows
                .iter()
                .find(|r| linalg::dot(f, &fv, r) != 0)
                .cloned()
                .ok_or(err)?;
            let fw = self.functional(&w);
            let cons: Vec<Elem> = [&fv, &fw]
                .iter()
                .flat_map(|a| rows.iter().map(|r| linalg::dot(f, a, r)).collect::<Vec<_>>())
                .collect();
            let coeffs = linalg::null_space(f, &cons, available);
            rows = coeffs.iter().map(|c| linalg::combine(f, c, &rows)).collect();
            planes.push([v, w]);
        }
        Ok(planes)
    }

    /// Splits the elliptic part `V0'` of the anisotropic kernel into `m`
    /// orthogonal planes (characteristic 2 quadratic forms only).
    pub fn split_anisotropic(&self, witt: &WittData, m: usize) -> Result<Vec<[Vec<Elem>; 2]>, FormError> {
        if self.kind != FormKind::Quadratic {
            return Err(FormError::NotQuadratic);
        }
        if self.field.characteristic() != 2 {
            return Err(FormError::NotChar2);
        }
        if 2 * m > witt.d2 {
            return Err(FormError::Split {
                requested: m,
                available: witt.d2,
            });
        }
        self.split_planes(&witt.elliptic, m)
    }
}

/// Output of the Witt decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittData {
    /// Witt index.
    pub n: usize,
    /// Defect, the dimension of the anisotropic kernel.
    pub d: usize,
    /// Parabolic sub-defect: dimension of the bilinear radical.
    pub d1: usize,
    /// Elliptic sub-defect `d − d1`.
    pub d2: usize,
    /// Hyperbolic pairs `(u_i, v_i)` with `q(u_i)=q(v_i)=0`, `f(u_i,v_i)=1`.
    pub pairs: Vec<(Vec<Elem>, Vec<Elem>)>,
    /// Basis of the anisotropic kernel `V0`.
    pub anisotropic: Vec<Vec<Elem>>,
    pub radical: Subspace,
    /// A complement `V0'` of the radical inside `V0`.
    pub elliptic: Vec<Vec<Elem>>,
}

impl WittData {
    /// `u1, v1, ..., un, vn` followed by the anisotropic basis.
    pub fn basis(&self) -> Vec<Vec<Elem>> {
        self.pairs
            .iter()
            .flat_map(|(u, v)| [u.clone(), v.clone()])
            .chain(self.anisotropic.iter().cloned())
            .collect()
    }
}

/// Names a polar space: one of the standard forms or an explicit matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceDescriptor {
    /// Hyperbolic quadric on `V(2n, q)`.
    Qplus { n: usize, q: u32 },
    /// Parabolic quadric on `V(2n+1, q)`.
    Qparab { n: usize, q: u32 },
    /// Elliptic quadric on `V(2n+2, q)`.
    Qminus { n: usize, q: u32 },
    /// Hermitian form on `V(2n+d, q0²)`, `d ∈ {0,1}`.
    Hermitian { n: usize, d: usize, q0: u32 },
    Custom(CustomForm),
}

/// JSON payload of a `custom:` descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomForm {
    pub kind: FormKind,
    pub field: String,
    /// Entries are element codes or strings like `"e^5"` or `"-1"`.
    pub matrix: Vec<Vec<serde_json::Value>>,
}

impl SpaceDescriptor {
    pub fn field(&self) -> Result<Field, FormError> {
        Ok(match self {
            SpaceDescriptor::Qplus { q, .. }
            | SpaceDescriptor::Qparab { q, .. }
            | SpaceDescriptor::Qminus { q, .. } => Field::with_order(*q)?,
            SpaceDescriptor::Hermitian { q0, .. } => Field::with_order(q0 * q0)?,
            SpaceDescriptor::Custom(c) => c.field.parse()?,
        })
    }

    pub fn form(&self) -> Result<Form, FormError> {
        let field = Arc::new(self.field()?);
        let f = &*field;
        let hyperbolic = |n: usize, dim: usize| {
            let mut c = vec![vec![0; dim]; dim];
            for i in 0..n {
                c[2 * i][2 * i + 1] = 1;
            }
            c
        };
        match *self {
            SpaceDescriptor::Qplus { n, .. } => Form::quadratic(field.clone(), &hyperbolic(n, 2 * n)),
            SpaceDescriptor::Qparab { n, .. } => {
                let mut c = hyperbolic(n, 2 * n + 1);
                c[2 * n][2 * n] = 1;
                Form::quadratic(field.clone(), &c)
            }
            SpaceDescriptor::Qminus { n, .. } => {
                let mut c = hyperbolic(n, 2 * n + 2);
                let (a, b) = (2 * n, 2 * n + 1);
                let (lambda, mu) = elliptic_coefficients(f);
                c[a][a] = 1;
                c[a][b] = lambda;
                c[b][b] = mu;
                Form::quadratic(field.clone(), &c)
            }
            SpaceDescriptor::Hermitian { n, d, .. } => {
                if d > 1 {
                    return Err(FormError::Descriptor(format!(
                        "{self}: finite Hermitian defect is at most 1"
                    )));
                }
                let dim = 2 * n + d;
                let mut m = vec![vec![0; dim]; dim];
                for i in 0..n {
                    m[2 * i][2 * i + 1] = 1;
                    m[2 * i + 1][2 * i] = 1;
                }
                if d == 1 {
                    m[dim - 1][dim - 1] = 1;
                }
                Form::hermitian(field.clone(), &m)
            }
            SpaceDescriptor::Custom(ref c) => {
                let matrix = c
                    .matrix
                    .iter()
                    .map(|row| row.iter().map(|v| parse_entry(f, v)).collect())
                    .collect::<Result<Vec<Vec<Elem>>, FormError>>()?;
                match c.kind {
                    FormKind::Quadratic => Form::quadratic(field.clone(), &matrix),
                    FormKind::Hermitian => Form::hermitian(field.clone(), &matrix),
                }
            }
        }
    }
}

fn parse_entry(f: &Field, v: &serde_json::Value) -> Result<Elem, FormError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_u64()
            .filter(|&c| (c as usize) < f.order())
            .map(|c| c as Elem)
            .ok_or_else(|| FieldError::Element(n.to_string()).into()),
        serde_json::Value::String(s) => Ok(f.parse_elem(s)?),
        other => Err(FieldError::Element(other.to_string()).into()),
    }
}

/// Coefficients `(λ, μ)` of the pinned irreducible `t² + λt + μ`: `t² + t + δ`
/// with the least `δ` of absolute trace 1 in characteristic 2, `t² − ν` with
/// the least non-square `ν` otherwise.
pub fn elliptic_coefficients(f: &Field) -> (Elem, Elem) {
    if f.characteristic() == 2 {
        let delta = f.elements().find(|&x| f.abs_trace(x) == 1).expect("trace is onto");
        (1, delta)
    } else {
        let nu = f.elements().find(|&x| !f.is_square(x)).expect("non-squares exist");
        (0, f.neg(nu))
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceDescriptor::Qplus { n, q } => write!(f, "Qplus({n},{q})"),
            SpaceDescriptor::Qparab { n, q } => write!(f, "Qparab({n},{q})"),
            SpaceDescriptor::Qminus { n, q } => write!(f, "Qminus({n},{q})"),
            SpaceDescriptor::Hermitian { n, d, q0 } => write!(f, "H({n},{d},{q0})"),
            SpaceDescriptor::Custom(c) => write!(
                f,
                "custom:{}",
                serde_json::to_string(c).map_err(|_| fmt::Error)?
            ),
        }
    }
}

impl FromStr for SpaceDescriptor {
    type Err = FormError;

    fn from_str(s: &str) -> Result<Self, FormError> {
        let err = || FormError::Descriptor(s.to_string());
        let t = s.trim();
        if let Some(json) = t.strip_prefix("custom:") {
            let c: CustomForm = serde_json::from_str(json).map_err(|_| err())?;
            return Ok(SpaceDescriptor::Custom(c));
        }
        let (name, rest) = t.split_once('(').ok_or_else(err)?;
        let args: Vec<u32> = rest
            .strip_suffix(')')
            .ok_or_else(err)?
            .split(',')
            .map(|a| a.trim().parse().map_err(|_| err()))
            .collect::<Result<_, _>>()?;
        match (name.trim(), args.as_slice()) {
            ("Qplus", &[n, q]) => Ok(SpaceDescriptor::Qplus { n: n as usize, q }),
            ("Qparab", &[n, q]) => Ok(SpaceDescriptor::Qparab { n: n as usize, q }),
            ("Qminus", &[n, q]) => Ok(SpaceDescriptor::Qminus { n: n as usize, q }),
            ("H", &[n, d, q0]) => Ok(SpaceDescriptor::Hermitian {
                n: n as usize,
                d: d as usize,
                q0,
            }),
            _ => Err(err()),
        }
    }
}

/// Parses a descriptor and builds its form.
pub fn standard_form(descriptor: &str) -> Result<Form, FormError> {
    descriptor.parse::<SpaceDescriptor>()?.form()
}
