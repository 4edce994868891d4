//! Words, cells, glued vertex sets, neighbor sets and self-similar measures.

mod neighbors;
mod pcf;
pub mod presets;
mod weights;
mod word;

pub use neighbors::{neighbor_set, CellComplex};
pub use pcf::{format_point, AffineMap, PcfStructure, Point, VertexTable};
pub use presets::PcfPreset;
pub use weights::SelfSimilarWeights;
pub use word::{words_at_level, Symbol, Word};
