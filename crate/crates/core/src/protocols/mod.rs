//! Interactive protocols: triangle-freeness with a certificate/message
//! trade-off, threshold certification for optimization problems, coloring
//! verification and lucky labelings.

pub mod coloring;
pub mod lucky;
pub mod optval;
pub mod triangle;

pub use coloring::{coloring_spec, PositionExchange};
pub use lucky::{lucky_spec, LuckyInstance};
pub use optval::{optval_spec, OptInstance, Problem};
pub use triangle::{triangle_spec, TriangleInstance, TriangleVariant};
