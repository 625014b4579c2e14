//! Fading channel models and the baseband link equation.
//!
//! A transmission block of `N` symbols sees a channel gain that is
//! constant over coherence blocks of `Q` symbols; a block spans `L` such
//! coherence periods with `N = Q * L`. All fading models are normalized
//! to unit average power, `E[|h|^2] = 1`, so noise calibration can be
//! done entirely from transmit power and Eb/N0.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SimError};

/// Complex baseband sample. Carries channel gains, symbols and noise.
pub type ComplexSample = Complex64;

/// Statistical model for one link's channel gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    /// No fading: gain fixed at 1 + 0i. Leaves only additive noise.
    AwgnOnly,
    /// Rayleigh block fading: i.i.d. circularly symmetric complex
    /// Gaussian gain per coherence block, unit variance.
    RayleighBlock,
    /// Rician fading with line-of-sight factor `k_factor` (linear).
    /// `k_factor = 0` degenerates to Rayleigh.
    Rician { k_factor: f64 },
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        if let FadingModel::Rician { k_factor } = self {
            if !k_factor.is_finite() || *k_factor < 0.0 {
                return Err(SimError::invalid(format!(
                    "Rician k_factor must be finite and >= 0, got {k_factor}"
                )));
            }
        }
        Ok(())
    }
}

/// Complex noise variance per received sample.
///
/// `sigma2` is the total complex variance; each real component carries
/// `sigma2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sigma2: f64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(SimError::invalid(format!(
                "noise variance must be finite and > 0, got {sigma2}"
            )));
        }
        Ok(NoiseSpec { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// One drawn channel: `L` block gains, each covering `Q` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    block_gains: Vec<ComplexSample>,
    block_len: usize,
}

impl ChannelRealization {
    /// Total number of symbols covered, `N = Q * L`.
    pub fn len(&self) -> usize {
        self.block_gains.len() * self.block_len
    }

    pub fn is_empty(&self) -> bool {
        self.block_gains.is_empty()
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn block_gains(&self) -> &[ComplexSample] {
        &self.block_gains
    }

    /// Gain seen by symbol `n`. Constant within a coherence block.
    #[inline]
    pub fn gain(&self, n: usize) -> ComplexSample {
        self.block_gains[n / self.block_len]
    }

    /// Per-symbol gain sequence of length `N`.
    pub fn per_symbol(&self) -> impl Iterator<Item = ComplexSample> + '_ {
        (0..self.len()).map(|n| self.gain(n))
    }
}

/// Draws one circularly symmetric complex Gaussian with total variance
/// `variance` (so `variance / 2` per real component).
#[inline]
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> ComplexSample {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ComplexSample::new(re * scale, im * scale)
}

/// Draws `l` independent block gains for the given fading model.
///
/// Every model satisfies `E[|h|^2] = 1`.
pub fn draw_block_gains<R: Rng + ?Sized>(
    rng: &mut R,
    model: FadingModel,
    l: usize,
) -> Result<Vec<ComplexSample>> {
    if l == 0 {
        return Err(SimError::invalid("block count L must be >= 1"));
    }
    model.validate()?;
    let gains = match model {
        FadingModel::AwgnOnly => vec![ComplexSample::new(1.0, 0.0); l],
        FadingModel::RayleighBlock => (0..l).map(|_| complex_gaussian(rng, 1.0)).collect(),
        FadingModel::Rician { k_factor } => {
            let los = (k_factor / (k_factor + 1.0)).sqrt();
            let scatter_var = 1.0 / (k_factor + 1.0);
            (0..l)
                .map(|_| ComplexSample::new(los, 0.0) + complex_gaussian(rng, scatter_var))
                .collect()
        }
    };
    Ok(gains)
}

/// Expands block gains into a realization where each gain covers `q`
/// consecutive symbols.
pub fn expand_realization(
    block_gains: Vec<ComplexSample>,
    q: usize,
) -> Result<ChannelRealization> {
    if q == 0 {
        return Err(SimError::invalid("coherence length Q must be >= 1"));
    }
    if block_gains.is_empty() {
        return Err(SimError::invalid("block gain sequence must be nonempty"));
    }
    Ok(ChannelRealization {
        block_gains,
        block_len: q,
    })
}

/// Applies the link equation `r[n] = h[n] * sqrt(P) * x[n] + v[n]` with
/// noise `v[n]` drawn i.i.d. from CN(0, sigma2).
pub fn apply_link<R: Rng + ?Sized>(
    x: &[ComplexSample],
    h: &ChannelRealization,
    power: f64,
    noise: NoiseSpec,
    rng: &mut R,
) -> Result<Vec<ComplexSample>> {
    if x.len() != h.len() {
        return Err(SimError::invalid(format!(
            "symbol count {} does not match channel length {}",
            x.len(),
            h.len()
        )));
    }
    if !power.is_finite() || power <= 0.0 {
        return Err(SimError::invalid(format!(
            "transmit power must be finite and > 0, got {power}"
        )));
    }
    let amp = power.sqrt();
    let sigma2 = noise.sigma2();
    Ok(x.iter()
        .enumerate()
        .map(|(n, &xn)| h.gain(n) * amp * xn + complex_gaussian(rng, sigma2))
        .collect())
}

/// Adds CN(0, sigma2) noise to each sample.
pub fn add_awgn<R: Rng + ?Sized>(
    rng: &mut R,
    signal: &[ComplexSample],
    noise: NoiseSpec,
) -> Vec<ComplexSample> {
    let sigma2 = noise.sigma2();
    signal
        .iter()
        .map(|&s| s + complex_gaussian(rng, sigma2))
        .collect()
}
