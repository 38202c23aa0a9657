//! Fixtures shared by the benchmark suites.

use std::sync::Arc;

use interplab_core::{Complex64, LogGrid, SampledFunction};

/// Default CLI grid: 400 cells per decade over `[1e-6, 1e6]`.
pub fn cli_grid() -> Arc<LogGrid> {
    Arc::new(LogGrid::per_decade(1e-6, 1e6, 400).expect("valid grid"))
}

/// Oscillating profile with a power-law envelope, supported inside the grid.
pub fn test_function(grid: &Arc<LogGrid>) -> SampledFunction {
    SampledFunction::from_fn(grid.clone(), |t| {
        if (1e-5..1e5).contains(&t) {
            t.powf(-0.3) * (2.0 + (3.0 * t.ln()).sin())
        } else {
            0.0
        }
    })
    .expect("grid-sized values")
}

pub fn unit_vector(d: usize) -> Vec<Complex64> {
    let s = (d as f64).sqrt();
    (0..d)
        .map(|k| Complex64::new(1.0 / s, k as f64 * 0.1))
        .collect()
}
