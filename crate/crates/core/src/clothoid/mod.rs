//! Clothoid paths and their constant-speed timing.

pub mod fresnel;
mod path;
mod segment;
mod trajectory;

pub use path::{
    assign_headings, build_path, build_through, build_through_cached, collision_step, is_collision_free, length,
    refine_collision, refine_collision_cached, PiecewiseClothoid, SegmentCache,
};
pub use segment::{fit_g1, ClothoidSegment, Pose, SegmentWalker, G1_TOLERANCE};
pub use trajectory::{
    cruise_speed, default_sample_count, fmt_sig, parameterize_time, parameterize_time_piecewise, sample_segment,
    segment_intervals, Trajectory, TrajectorySample, CRUISE_FACTOR, MIN_SEGMENT_INTERVALS, TIME_REDUCTION,
};
