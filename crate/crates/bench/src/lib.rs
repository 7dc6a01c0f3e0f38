//! Scenarios shared by the criterion benchmarks in `benches/`.

use sinrld_core::{build_correlation, CorrelationSpec, InterfererBlock, ReceiverMode, Scenario};

/// Small iid MMSE case: two antennas, one single-antenna interferer.
pub fn small_iid() -> Scenario {
    Scenario::iid(2, 2.0, &[(1, 1.0)], ReceiverMode::Mmse).expect("valid scenario")
}

/// Correlated case with `m` antennas and `k` single-antenna interferers
/// spread in angle; every block has its own correlation matrix.
pub fn correlated(m: usize, k: usize, mode: ReceiverMode) -> Scenario {
    let aoa = |theta: f64| build_correlation(&CorrelationSpec::aoa(theta, 10.0), m).expect("valid aoa");
    let blocks = (0..k)
        .map(|i| InterfererBlock { n: 1, p: 4.0, r: aoa(20.0 + 15.0 * i as f64) })
        .collect();
    Scenario { m, p0: 10.0, r0: aoa(0.0), blocks, mode }
}
