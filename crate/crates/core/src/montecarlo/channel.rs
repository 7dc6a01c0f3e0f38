use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::scenario::{ReceiverMode, Scenario};

/// Draws channel realizations for a fixed scenario. Square roots of the
/// correlation matrices are computed once.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    scenario: Scenario,
    r0_sqrt: CMatrix,
    /// `√p_k R_k^{1/2} / √N_k` per block.
    block_factors: Vec<CMatrix>,
    n_interf: usize,
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

impl ChannelSampler {
    pub fn new(sc: &Scenario) -> Self {
        let block_factors = sc
            .blocks
            .iter()
            .map(|b| linalg::sqrt_psd(&b.r) * C64::new((b.p / b.n as f64).sqrt(), 0.0))
            .collect();
        ChannelSampler {
            scenario: sc.clone(),
            r0_sqrt: linalg::sqrt_psd(&sc.r0),
            block_factors,
            n_interf: sc.n_total() - 1,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn r0_sqrt(&self) -> &CMatrix {
        &self.r0_sqrt
    }

    /// Returns `(R0^{1/2} g0, [√p_1 R_1^{1/2} G_1, ...])`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (CVector, CMatrix) {
        let m = self.scenario.m;
        let g0 = CVector::from_fn(m, |_, _| complex_normal(rng));
        let mut h0 = CMatrix::zeros(m, self.n_interf);
        let mut col = 0;
        for (b, f) in self.scenario.blocks.iter().zip(&self.block_factors) {
            let g = CMatrix::from_fn(m, b.n, |_, _| complex_normal(rng));
            h0.columns_mut(col, b.n).copy_from(&(f * g));
            col += b.n;
        }
        (&self.r0_sqrt * g0, h0)
    }

    /// SINR of the configured receiver for one draw.
    pub fn sinr(&self, g0: &CVector, h0: &CMatrix) -> Result<f64> {
        match self.scenario.mode {
            ReceiverMode::Mmse => Ok(mmse_sinr(&self.scenario, g0, h0)),
            ReceiverMode::Zf => zf_sinr(&self.scenario, g0, h0),
        }
    }
}

pub fn sample_channel<R: Rng + ?Sized>(sc: &Scenario, rng: &mut R) -> (CVector, CMatrix) {
    ChannelSampler::new(sc).sample(rng)
}

/// `(p0/M) g† (I + H0 H0†)^{-1} g`.
pub fn mmse_sinr(sc: &Scenario, g0: &CVector, h0: &CMatrix) -> f64 {
    let m = sc.m;
    let a = linalg::identity(m) + h0 * h0.adjoint();
    let chol = a.cholesky().expect("I + H H† is positive definite");
    let x = chol.solve(g0);
    sc.p0 / m as f64 * g0.dotc(&x).re
}

/// Orthonormal basis of `col(H0)`; errors if `H0` loses column rank.
pub(crate) fn column_basis(h0: &CMatrix) -> Result<CMatrix> {
    let n = h0.ncols();
    let qr = h0.clone().qr();
    let r = qr.r();
    let scale = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    let rank = (0..n).filter(|&i| r[(i, i)].norm() > 1e-12 * scale.max(1e-300)).count();
    if rank < n {
        return Err(Error::RankDeficient { rank, expected: n });
    }
    Ok(qr.q())
}

/// `(p0/M) g† P g` with `P` the projector onto the orthogonal complement of
/// `col(H0)`.
pub fn zf_sinr(sc: &Scenario, g0: &CVector, h0: &CMatrix) -> Result<f64> {
    let m = sc.m;
    if h0.ncols() == 0 {
        return Ok(sc.p0 / m as f64 * g0.norm_squared());
    }
    let q = column_basis(h0)?;
    let residual = g0 - &q * (q.adjoint() * g0);
    Ok(sc.p0 / m as f64 * residual.norm_squared())
}

/// One realization of `ΔI(s, H0)`, whose average of `e^{-ΔI}` is the exact MGF
/// `E[e^{-M s γ}]`.
///
/// MMSE: `ln det[I + s p0 R0 + H0 H0†] - ln det[I + H0 H0†]`.
/// ZF: the `z → 0` limit, `ln det[I + s p0 R0^{1/2} P R0^{1/2}]`.
pub fn sample_delta_i<R: Rng + ?Sized>(sampler: &ChannelSampler, s: f64, rng: &mut R) -> Result<f64> {
    if s == 0.0 {
        // Keep the stream position identical to s != 0 calls.
        let _ = sampler.sample(rng);
        return Ok(0.0);
    }
    let sc = sampler.scenario();
    let m = sc.m;
    let (_, h0) = sampler.sample(rng);
    let sp0 = C64::new(s * sc.p0, 0.0);
    let not_pd = || Error::QNotPositiveDefinite { s };
    match sc.mode {
        ReceiverMode::Mmse => {
            let base = linalg::identity(m) + &h0 * h0.adjoint();
            let shifted = &base + &sc.r0 * sp0;
            let a = linalg::cholesky(&shifted).ok_or_else(not_pd)?;
            let b = linalg::cholesky(&base).ok_or_else(not_pd)?;
            Ok(linalg::logdet_chol(&a) - linalg::logdet_chol(&b))
        }
        ReceiverMode::Zf => {
            let rs = sampler.r0_sqrt();
            let proj = if h0.ncols() == 0 {
                linalg::identity(m)
            } else {
                let q = column_basis(&h0)?;
                linalg::identity(m) - &q * q.adjoint()
            };
            let a = linalg::identity(m) + rs * proj * rs * sp0;
            let chol = linalg::cholesky(&linalg::hermitian_part(&a)).ok_or_else(not_pd)?;
            Ok(linalg::logdet_chol(&chol))
        }
    }
}
