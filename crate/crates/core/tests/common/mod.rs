#![allow(dead_code)]

use tripodsim::model::{GridSpec, Scenario};

/// The storage scenario on a coarse grid, fast enough for property tests.
pub fn coarse_storage() -> Scenario {
    Scenario::reference_storage()
        .with_grid(GridSpec {
            n_xi: 60,
            d_tau: 0.02,
            t_final: 260.0,
        })
        .validated()
        .unwrap()
}

pub fn coarse_transparency() -> Scenario {
    Scenario::reference_transparency()
        .with_grid(GridSpec {
            n_xi: 60,
            d_tau: 0.02,
            t_final: 200.0,
        })
        .validated()
        .unwrap()
}

pub fn peak(series: &[tripodsim::C64]) -> f64 {
    series.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
