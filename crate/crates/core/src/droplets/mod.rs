//! Droplets: boundary regions, the two quadrilateral droplet shapes, their
//! span/cut algebra, cluster extraction and the spanning algorithm.

mod algebra;
mod algorithm;
mod boundary;
mod components;
mod constants;
mod shapes;

pub use algebra::{cut, cut_droplet, size, span};
pub use algorithm::{
    droplet_algorithm, enumerate_discretised_droplets, estimate_spanning_probability,
    is_spanned, quad_of_cluster, AlgorithmRun, DiscretisedDroplets, EnumError,
    SpanningEstimate,
};
pub use boundary::BoundaryRegion;
pub use components::{
    classify_components, crumb_test, gamma_components, greedy_clusters, Cluster,
    ComponentError, ComponentReport,
};
pub use constants::{ConstantsError, DropletConstants};
pub use shapes::{
    bounding_box, diam_sq, droplet_contains, droplet_sites, droplet_vertices,
    droplets_intersect, meets_boundary, piece_vertices, Cdyd, Droplet, DropletRecord, Dyd,
    ShapeError,
};

/// Canonical direction set of the three-rule family, shared by tests.
#[cfg(test)]
pub(crate) fn test_direction_set() -> crate::bootstrap::DirectionSet {
    use crate::bootstrap::{classify, select_canonical_directions, GrowthParams};
    let fam = crate::family::three_rule();
    let r = classify(&fam, 2, &GrowthParams::default()).unwrap();
    select_canonical_directions(&r, &fam).unwrap()
}
