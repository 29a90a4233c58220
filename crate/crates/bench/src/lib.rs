//! Shared inputs for the criterion benches in `benches/`.

use polargrass::gensets::orth_q2_genset;
use polargrass::{build_grassmannian, Budget, Geometry, PolarModel};

/// Line Grassmannian of `Qparab(3,q)`.
pub fn lines_of_parabolic(q: u32) -> Geometry {
    let mut m = PolarModel::parse(&format!("Qparab(3,{q})"), Budget::DEFAULT).expect("model");
    build_grassmannian(&mut m, 2).expect("geometry")
}

/// The 21-line generating set of `Q2(6,q)` as point IDs of `geom`.
pub fn orth_seed(q: u32, geom: &Geometry) -> Vec<u32> {
    orth_q2_genset(q, 3, 1, Budget::DEFAULT).expect("construction").ids(geom).expect("ids")
}
