//! Global optimization of the WSEE by fractional monotonic programming.

mod dinkelbach;
pub mod polyblock;
mod ratio;

pub use dinkelbach::{dinkelbach_solve, DinkelbachConfig, GlobalResult, GlobalStatus, OuterRecord};
pub use polyblock::{
    polyblock_maximize, polyblock_maximize_from, polyblock_maximize_set, project_segment, project_to_boundary,
    segment_point, NormalSet, PolyblockConfig, PolyblockResult, PolyblockStatus, Predicate, RayProjection,
};
pub use ratio::{
    dc_split_f, lifted_feasible, parametric_f, ratio_parts, LiftedPoint, LiftedProblem, ParametricSplit, RatioParts,
    SplitValue,
};
