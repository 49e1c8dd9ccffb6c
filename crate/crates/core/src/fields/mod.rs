//! Random and deterministic height fields: i.i.d. laws, the line field and
//! its rectangle ladder, UMRC composites, and nested lakes.

mod lakes;
mod line;
mod sample;
mod spec;

pub use lakes::{build_nested_lakes, inner_radius, lake_spacing, sea_islands};
pub use line::{line_field, line_field_from_lines, LineFieldParams, Rectangle, RectangleLadder};
pub use sample::{compose_add, sample};
pub use spec::{FieldKind, SamplerSpec};
