//! Sparse storage and the direct solver used for the elastic block.

mod ldl;
mod ordering;
mod sparse;

pub use ldl::LdlFactor;
pub use ordering::{coordinate_dissection, nested_dissection};
pub use sparse::{SparseRows, SymSparseMatrix, TripletBuilder};
