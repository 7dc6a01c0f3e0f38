#![allow(dead_code)]

use proptest::prelude::*;
use sinrld_core::{
    build_correlation, validate_scenario, CorrelationSpec, InterfererBlock, ReceiverMode,
    Scenario, ValidationOptions,
};

pub fn mmse_m2() -> Scenario {
    Scenario::iid(2, 2.0, &[(1, 1.0)], ReceiverMode::Mmse).unwrap()
}

pub fn zf_aoa_m2() -> Scenario {
    Scenario {
        m: 2,
        p0: 2.0,
        r0: build_correlation(&CorrelationSpec::aoa(0.0, 30.0), 2).unwrap(),
        blocks: vec![InterfererBlock {
            n: 1,
            p: 1.0,
            r: build_correlation(&CorrelationSpec::aoa(45.0, 30.0), 2).unwrap(),
        }],
        mode: ReceiverMode::Zf,
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Random admissible scenarios with `M <= max_m`, `K <= 3`, mixed
/// correlation and mode.
pub fn arb_scenario(max_m: usize) -> impl Strategy<Value = Scenario> {
    let corr = (any::<bool>(), -80.0..80.0f64, 8.0..60.0f64);
    (
        1..=max_m,
        0.2..8.0f64,
        corr.clone(),
        prop::collection::vec((1usize..=2, 0.2..8.0f64, corr), 0..=3),
        any::<bool>(),
    )
        .prop_filter_map("scenario must validate", |(m, p0, c0, blocks, zf)| {
            let mk = |(iid, th, sg): (bool, f64, f64)| {
                if iid {
                    build_correlation(&CorrelationSpec::Identity, m)
                } else {
                    build_correlation(&CorrelationSpec::aoa(th, sg), m)
                }
            };
            let blocks = blocks
                .into_iter()
                .map(|(n, p, c)| Ok(InterfererBlock { n, p, r: mk(c)? }))
                .collect::<sinrld_core::Result<Vec<_>>>()
                .ok()?;
            let n_tot = 1 + blocks.iter().map(|b| b.n).sum::<usize>();
            let mode = if zf && m >= n_tot { ReceiverMode::Zf } else { ReceiverMode::Mmse };
            let sc = Scenario { m, p0, r0: mk(c0).ok()?, blocks, mode };
            let sc = validate_scenario(sc, &ValidationOptions::default()).ok()?;
            // Keep R0 comfortably positive definite.
            (sinrld_core::linalg::min_eigenvalue(&sc.r0) > 1e-6).then_some(sc)
        })
}
