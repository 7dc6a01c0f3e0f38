mod common;

use common::{arb_scenario, mmse_m2, rel};
use proptest::prelude::*;
use sinrld_core::{
    closed_form_iid_normalized, gaussian_baseline, pdf_closed_form_iid, solve_saddle,
    solve_special_case, Error, LdModel, Modulation, ReceiverMode, SaddleDensity, Scenario,
};
use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

fn single_antenna(m: usize, p0: f64, powers: &[f64], mode: ReceiverMode) -> Scenario {
    let blocks: Vec<(usize, f64)> = powers.iter().map(|&p| (1, p)).collect();
    Scenario::iid(m, p0, &blocks, mode).unwrap()
}

#[test]
fn saddle_at_ergodic_point_is_zero() {
    let model = LdModel::new(&mmse_m2()).unwrap();
    let sr = model.solve_saddle(model.ergodic_sinr()).unwrap();
    assert!(sr.s0.abs() < 1e-10);
}

#[test]
fn saddle_no_interference_closed_form() {
    // γ = 2/(1 + 2 s0).
    let sc = Scenario::iid(2, 2.0, &[], ReceiverMode::Mmse).unwrap();
    assert!((solve_saddle(&sc, 1.0).unwrap().s0 - 0.5).abs() < 1e-10);
    let sr = solve_saddle(&sc, 3.0).unwrap();
    assert!((sr.s0 + 1.0 / 6.0).abs() < 1e-10);
}

#[test]
fn saddle_matches_scalar_bisection() {
    // MMSE M = 2 scenario through the scalar path: K = 1, p_1/K = 1, γ = (K/M) p0 t.
    let gamma_target = 0.5;
    let g = |s: f64| 0.5 * solve_special_case(&[1.0, 1.0], &[1.0], 2.0, 1.0, s).unwrap().gamma;
    let (mut lo, mut hi) = (0.0, 20.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > gamma_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let sr = solve_saddle(&mmse_m2(), gamma_target).unwrap();
    assert!((sr.s0 - oracle).abs() < 1e-8, "{} vs {oracle}", sr.s0);
    assert!(rel(sr.ld.di / 2.0, gamma_target) < 1e-10);
}

#[test]
fn saddle_rejects_bad_gamma() {
    let model = LdModel::new(&mmse_m2()).unwrap();
    assert!(matches!(model.solve_saddle(0.0), Err(Error::InvalidArgument(_))));
    assert!(model.solve_saddle(f64::NAN).is_err());
}

#[test]
fn pdf_no_interference_vs_gamma() {
    let sc = Scenario::iid(4, 1.0, &[], ReceiverMode::Mmse).unwrap();
    let model = LdModel::new(&sc).unwrap();
    let exact = Gamma::new(4.0, 4.0).unwrap();
    assert!((exact.pdf(1.0) - 256.0 * (-4f64).exp() / 6.0).abs() < 1e-12);
    for q in [0.1, 0.5, 0.9] {
        let x = exact.inverse_cdf(q);
        assert!(rel(model.pdf(x).unwrap(), exact.pdf(x)) < 0.05);
    }
}

#[test]
fn cdf_at_ergodic_point_is_half() {
    for sc in [mmse_m2(), common::zf_aoa_m2()] {
        let model = LdModel::new(&sc).unwrap();
        assert_eq!(model.cdf(model.ergodic_sinr()).unwrap(), 0.5);
    }
}

#[test]
fn cdf_monotone_and_bounded() {
    let model = LdModel::new(&mmse_m2()).unwrap();
    let mut last = 0.0;
    for i in 1..200 {
        let c = model.cdf(0.02 * i as f64).unwrap();
        assert!((0.0..=1.0).contains(&c));
        assert!(c >= last - 1e-12, "at {}", 0.02 * i as f64);
        last = c;
    }
}

#[test]
fn normalized_zf_density_recovers_gamma_law() {
    // Equal-power iid ZF: γ ~ Gamma(M - K, M/p0).
    let sc = single_antenna(8, 1.0, &[1.0; 4], ReceiverMode::Zf);
    let density = SaddleDensity::new(LdModel::new(&sc).unwrap()).unwrap();
    let exact = Gamma::new(4.0, 8.0).unwrap();
    for q in [0.05, 0.3, 0.5, 0.7, 0.95] {
        let x = exact.inverse_cdf(q);
        assert!((density.cdf(x).unwrap() - q).abs() < 1e-6);
        assert!(rel(density.pdf(x).unwrap(), exact.pdf(x)) < 1e-6);
    }
}

#[test]
fn pdf_in_db_has_jacobian() {
    let model = LdModel::new(&mmse_m2()).unwrap();
    let g = 0.8;
    let lin = model.pdf(g).unwrap();
    let db = sinrld_core::distribution::pdf_db_from_linear(lin, g);
    assert!(rel(db, lin * g * std::f64::consts::LN_10 / 10.0) < 1e-15);
}

#[test]
fn ber_zero_snr_limit() {
    for m in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam(16)] {
        let sc = mmse_m2().with_p0(1e-9);
        let b = LdModel::new(&sc).unwrap().ber(m).unwrap();
        // The correction is O(√p0).
        assert!((b - 0.5 * m.b()).abs() < 1e-4, "{m}: {b}");
    }
}

#[test]
fn ber_decreases_with_power() {
    let mut last = 1.0;
    for i in 0..12 {
        let p0 = 0.25 * 2f64.powi(i);
        let b = LdModel::new(&mmse_m2().with_p0(p0)).unwrap().ber(Modulation::Bpsk).unwrap();
        assert!(b < last && b > 0.0);
        last = b;
    }
}

#[test]
fn ber_rayleigh_single_antenna() {
    // M = 1, no interference: γ ~ Exp(mean p0), exact BPSK BER = (1 - √(p0/(1+p0)))/2,
    // while the saddle-point form with s1 = 1 is exact for the MGF.
    let sc = Scenario::iid(1, 3.0, &[], ReceiverMode::Mmse).unwrap();
    let b = LdModel::new(&sc).unwrap().ber(Modulation::Bpsk).unwrap();
    let exact = 0.5 * (1.0 - (3.0f64 / 4.0).sqrt());
    assert!(rel(b, exact) < 0.2, "{b} vs {exact}");
}

#[test]
fn modulation_table() {
    assert_eq!((Modulation::Bpsk.a(), Modulation::Bpsk.b()), (2.0, 1.0));
    assert_eq!((Modulation::Qpsk.a(), Modulation::Qpsk.b()), (1.0, 1.0));
    assert_eq!((Modulation::Qam(16).a(), Modulation::Qam(16).b()), (0.2, 0.5));
    assert_eq!("16-qam".parse::<Modulation>().unwrap(), Modulation::Qam(16));
    assert!("2-QAM".parse::<Modulation>().is_err());
}

#[test]
fn closed_form_zero_z_is_gamma_shape() {
    let (m, k, rho) = (5, 2, 1.5);
    let d = closed_form_iid_normalized(m, k, rho, 0.0).unwrap();
    assert!(rel(d.mode(), (m - k) as f64 * rho / k as f64) < 1e-12);
    let exact = Gamma::new((m - k + 1) as f64, k as f64 / rho).unwrap();
    for x in [0.3, 1.0, 2.25, 5.0] {
        assert!(rel(d.pdf(x), exact.pdf(x)) < 1e-8);
    }
    let unnorm = pdf_closed_form_iid(2.0, m, k, rho, 0.0);
    assert!(rel(unnorm, (-2.0 * 2.0 / 1.5f64).exp() * 8.0) < 1e-14);
}

#[test]
fn closed_form_without_interference_is_rejected() {
    assert!(matches!(
        closed_form_iid_normalized(3, 0, 1.0, 1.0),
        Err(Error::UnnormalizableOnHalfLine(_))
    ));
}

#[test]
fn closed_form_integrates_to_one() {
    let d = closed_form_iid_normalized(2, 1, 1.0, 1.0).unwrap();
    let total = quadrature::double_exponential::integrate(
        |u: f64| d.pdf(u / (1.0 - u)) / ((1.0 - u) * (1.0 - u)),
        0.0,
        1.0,
        1e-12,
    )
    .integral;
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn closed_form_is_the_rate_exponent() {
    // With p_k = ρ/K per single-antenna block, ln f(γ M/K) - (M s0 γ - ΔI(s0))
    // is independent of γ.
    for (m, k, z, mode) in [
        (2usize, 1usize, 1.0, ReceiverMode::Mmse),
        (8, 4, 1.0, ReceiverMode::Mmse),
        (6, 2, 0.0, ReceiverMode::Zf),
    ] {
        let rho = 1.7;
        let sc = single_antenna(m, rho, &vec![rho / k as f64; k], mode);
        let model = LdModel::new(&sc).unwrap();
        let ge = model.ergodic_sinr();
        let offset = |g: f64| {
            let sr = model.solve_saddle(g).unwrap();
            let rate = m as f64 * sr.s0 * g - (sr.ld.i_erg - model.i0());
            pdf_closed_form_iid(g * m as f64 / k as f64, m, k, rho, z).ln() - rate
        };
        let c = offset(ge);
        for f in [0.3, 0.7, 1.4, 2.0] {
            assert!((offset(ge * f) - c).abs() < 1e-8, "M {m} K {k} f {f}");
        }
    }
}

#[test]
fn special_case_golden_ratio() {
    // M = K = 2, R = I, ρ = 1, z = 1, s = 0: r = 1/(1+t), t = 1/(1+r).
    let sol = solve_special_case(&[1.0, 1.0], &[1.0, 1.0], 2.0, 1.0, 0.0).unwrap();
    let g = 0.6180339887498948482;
    assert!((sol.t - g).abs() < 1e-12 && (sol.r - g).abs() < 1e-12);
    assert!((sol.gamma - 2.0 * g).abs() < 1e-12);
}

#[test]
fn special_case_zero_power() {
    let eigs = [0.4, 1.1, 1.5];
    let sol = solve_special_case(&eigs, &[0.0, 0.0], 1.7, 1.0, 0.3).unwrap();
    assert_eq!(sol.r, 0.0);
    let t: f64 = eigs.iter().map(|&x| x / (1.0 + x * 1.7 * 0.3)).sum::<f64>() / 2.0;
    assert!((sol.t - t).abs() < 1e-14);
}

#[test]
fn special_case_matches_general_path() {
    use sinrld_core::{build_correlation, CorrelationSpec, InterfererBlock};
    let instances = [
        (3usize, 1.3, vec![0.7, 2.0], 20.0, 25.0, 0.4, ReceiverMode::Mmse),
        (4, 2.5, vec![1.0, 0.3, 4.0], -40.0, 10.0, 0.1, ReceiverMode::Mmse),
        (5, 0.8, vec![1.5, 2.5], 65.0, 40.0, 1.2, ReceiverMode::Zf),
    ];
    for (m, p0, powers, theta, sigma, s, mode) in instances {
        let r = build_correlation(&CorrelationSpec::aoa(theta, sigma), m).unwrap();
        let eigs = sinrld_core::linalg::eigh(&r).0;
        let k = powers.len();
        let sc = Scenario {
            m,
            p0,
            r0: r.clone(),
            blocks: powers
                .iter()
                .map(|&p| InterfererBlock { n: 1, p: p / k as f64, r: r.clone() })
                .collect(),
            mode,
        };
        let model = LdModel::new(&sc).unwrap();
        let p = model.point(s, None).unwrap();
        let sol = solve_special_case(&eigs, &powers, p0, mode.z(), s).unwrap();
        let gamma_general = p.di / p0 / m as f64 * p0;
        assert!(rel(gamma_general, k as f64 / m as f64 * sol.gamma) < 1e-8);
        assert!((p.i_erg - sol.i_erg).abs() < 1e-8 * p.i_erg.abs().max(1.0));
    }
}

#[test]
fn gaussian_baseline_no_interference() {
    let sc = Scenario::iid(4, 1.0, &[], ReceiverMode::Mmse).unwrap();
    let b = gaussian_baseline(&sc).unwrap();
    assert!(rel(b.variance, 0.25) < 0.01);
    let sc2 = Scenario::iid(4, 2.0, &[], ReceiverMode::Mmse).unwrap();
    let b2 = gaussian_baseline(&sc2).unwrap();
    assert!((b2.gamma_db_erg - 3.0102999566398).abs() < 1e-9);
    let k = 10.0 / std::f64::consts::LN_10;
    assert!(rel(b2.sigma2_db, k * k * b2.variance / 4.0) < 1e-14);
}

#[test]
fn gaussian_baseline_cdf_quantile_roundtrip() {
    let b = gaussian_baseline(&mmse_m2()).unwrap();
    for p in [1e-4, 0.1, 0.5, 0.9, 0.9999] {
        assert!((b.cdf(b.quantile(p)) - p).abs() < 1e-9);
    }
    assert!((b.cdf(b.gamma_erg) - 0.5).abs() < 1e-12);
}

#[test]
fn laplace_tail_consistency() {
    // Once √|I''| |s0| is large, cdf tail ≈ pdf/(M |s0|) up to O(1/x²).
    let model = LdModel::new(&mmse_m2()).unwrap();
    let ge = model.ergodic_sinr();
    let mut tested = 0;
    for f in [0.02, 0.05, 0.1, 0.2, 2.5, 4.0, 6.0] {
        let Ok(sr) = model.solve_saddle(f * ge) else { continue };
        let x = sr.ld.d2i.abs().sqrt() * sr.s0.abs();
        if x < 5.0 {
            continue;
        }
        tested += 1;
        let laplace = model.ln_pdf_at(&sr) - (2.0 * sr.s0.abs()).ln();
        let ratio = (model.ln_cdf_tail_at(&sr) - laplace).exp();
        assert!((ratio - 1.0).abs() < 1.5 / (x * x), "f {f}: x {x} ratio {ratio}");
    }
    assert!(tested > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn saddle_sign_law(sc in arb_scenario(6), f in 0.05..3.0f64) {
        let model = LdModel::new(&sc).unwrap();
        let ge = model.ergodic_sinr();
        let gamma = ge * f;
        match model.solve_saddle(gamma) {
            Ok(sr) => {
                prop_assert!(rel(sr.ld.di / model.m() as f64, gamma) < 1e-9);
                if f < 1.0 { prop_assert!(sr.s0 > 0.0); }
                if f > 1.0 { prop_assert!(sr.s0 < 0.0); }
            }
            // Only the upward direction can run into the feasibility edge.
            Err(Error::GammaOutOfRange { .. }) => prop_assert!(f > 1.0),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
