//! The ten-point worked example for the `alpha = 2`, unit-variance location fit,
//! with its reference results (table values rounded to two decimals).

pub const WORKED_EXAMPLE_SAMPLE: [f64; 10] = [4.6, 4.7, 6.0, 7.0, 8.2, 8.6, 8.7, 8.8, 8.9, 9.0];

pub const WORKED_EXAMPLE_MEAN: f64 = 7.45;
pub const WORKED_EXAMPLE_MU_HAT: f64 = 8.46;
/// Maximum of the truncated-sum likelihood, in units of `N_2`.
pub const WORKED_EXAMPLE_OBJECTIVE: f64 = 6.42;

pub const MU_HAT_TOL: f64 = 0.01;
pub const OBJECTIVE_TOL: f64 = 0.05;

/// Maximizers on the segments where the lower `k` points are active.
pub const LEFT_MAXIMIZERS: [f64; 9] = [2.46, 3.76, 4.76, 5.57, 6.1, 6.46, 6.56, 6.66, 6.76];
/// Maximizer on the segment where every point is active.
pub const FULL_MAXIMIZER: f64 = 6.84;
/// Maximizers on the segments where the upper `n - k` points are active.
pub const RIGHT_MAXIMIZERS: [f64; 9] = [6.94, 8.15, 8.46, 9.24, 10.44, 10.84, 10.94, 11.04, 11.14];

/// Segment maxima in `N_2` units, in table reading order.
pub const SEGMENT_OBJECTIVES: [f64; 18] = [
    0.08, 1.68, 2.69, 3.21, 3.11, 3.07, 3.15, 3.3, 3.5, 4.02, 6.37, 6.42, 5.57, 2.3, 0.82, 0.5,
    0.25, 0.84,
];
/// Maximum on the all-active segment, in `N_2` units.
pub const FULL_SEGMENT_OBJECTIVE: f64 = 3.7;
