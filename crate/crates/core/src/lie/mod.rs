//! Root systems, signed structure constants and Cartan-Weyl elements.

mod chevalley;
mod element;
mod root_system;

pub use chevalley::{
    structure_constants, verify_cocycle, verify_first_line_relations, verify_jacobi,
    StructureConstantTable,
};
pub use element::{Algebra, CwElement};
pub use root_system::{
    build_algebra, build_algebra_with_cap, AlgebraModel, FactorSpec, Family, RootId, C64,
    DEFAULT_RANK_CAP,
};
