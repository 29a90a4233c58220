//! Finite classical polar spaces, their Grassmannians, and certified
//! generating-rank computations.
pub mod bits;
pub mod forms;
pub mod gensets;
pub mod gf;
pub mod grassmann;
pub mod linalg;
pub mod polar;

pub use bits::BitSet;
pub use forms::{standard_form, Form, FormError, FormKind, SpaceDescriptor, WittData};
pub use gf::{Elem, Field, FieldError, Subfield};
pub use linalg::{LinalgError, Subspace};
pub use polar::{Budget, Hyperplane, HyperplaneKind, Invariants, PolarError, PolarModel, Residue, SubModel, SubspaceTable};
pub use grassmann::{
    build_grassmannian, greedy_minimize, is_generating, plucker_rank, span_closure, ClosureResult, Geometry,
    GrassmannError, RankCertificate,
};
