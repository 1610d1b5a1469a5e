//! U-bootstrap percolation: closure (plain and boundary-relative),
//! stability analysis, difficulty, classification and the canonical
//! direction selection consumed by the droplet machinery.

mod closure;
mod stability;
mod difficulty;
mod directions;

pub use closure::{closure, closure_with_boundary, ClosureResult, SiteSet};
pub use difficulty::{
    classify, difficulty_direction, difficulty_family, growth_oracle, GrowthConfigError,
    GrowthParams, GrowthVerdict,
};
pub use directions::{
    select_canonical_directions, validate_direction_set, DirectionSet, SelectError,
};
pub use stability::{
    is_stable_direction, j_directions, stable_arcs, Classification, DirStatus, StableSet,
    StabilityReport,
};
