//! Shared fixtures for the benchmarks.

use specdet::PotentialSpec;

/// A staircase with `cells` equal cells and slowly varying heights.
pub fn staircase(cells: usize) -> PotentialSpec {
    let breakpoints = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let values = (0..cells)
        .map(|i| 1.0 + (i as f64 / cells as f64 * 6.0).sin().abs())
        .collect();
    PotentialSpec::piecewise(breakpoints, values, false).expect("valid staircase")
}
