//! Shared fixtures for the benchmark targets.

use ris_stc::{ArrayGeometry, Direction, LinkParams};

/// Reference 16x16 setup used by all benches.
pub fn reference_params(payload_symbols: usize) -> LinkParams {
    LinkParams {
        geom: ArrayGeometry::new(16, 16, 0.043, 3.6e9, [0.0, 0.0, -0.2]).unwrap(),
        dir: Direction::from_deg(30.0, 0.0).unwrap(),
        switch_rate: 100e3,
        control_clock: 200,
        sample_rate: 20e6,
        payload_symbols,
        pilot_symbols: 0,
        seed: 1,
    }
}
