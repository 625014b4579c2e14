//! Bit and symbol layer: BPSK, coherent LLR demodulation, a repetition
//! code with a row-column block interleaver, and Eb/N0 calibration.
//!
//! BPSK maps bit 0 to +1 and bit 1 to -1. Under that mapping the
//! elementwise symbol product used by the relay's network coding equals
//! XOR in the bit domain. LLRs are positive for bit 0; exact ties decode
//! to bit 0 so runs stay reproducible.

use crate::channel::{ChannelRealization, ComplexSample, NoiseSpec};
use crate::error::{Result, SimError};
use rand::Rng;

/// Label for the two end nodes exchanging messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    A,
    B,
}

/// A block of information bits tagged with the node that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBlock {
    origin: Endpoint,
    bits: Vec<u8>,
}

impl BitBlock {
    pub fn new(origin: Endpoint, bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(SimError::invalid("bit values must be 0 or 1"));
        }
        Ok(BitBlock { origin, bits })
    }

    /// Draws `k` uniform random bits.
    pub fn random<R: Rng + ?Sized>(origin: Endpoint, k: usize, rng: &mut R) -> Self {
        let bits = (0..k).map(|_| u8::from(rng.random::<bool>())).collect();
        BitBlock { origin, bits }
    }

    pub fn origin(&self) -> Endpoint {
        self.origin
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of positions where the two blocks disagree.
    pub fn hamming_distance(&self, other: &BitBlock) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// A block of BPSK symbols, every element -1.0 or +1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    symbols: Vec<f64>,
}

impl SymbolBlock {
    pub fn new(symbols: Vec<f64>) -> Result<Self> {
        if symbols.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(SimError::invalid("BPSK symbols must be -1 or +1"));
        }
        Ok(SymbolBlock { symbols })
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbols as complex baseband samples (imaginary part zero).
    pub fn to_baseband(&self) -> Vec<ComplexSample> {
        self.symbols
            .iter()
            .map(|&s| ComplexSample::new(s, 0.0))
            .collect()
    }
}

/// Channel coding applied to each information block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingMode {
    Uncoded,
    /// Each bit repeated `rate_inverse` times, then a row-column block
    /// interleaver of `interleave_depth` rows over the whole codeword.
    Repetition {
        rate_inverse: usize,
        interleave_depth: usize,
    },
}

impl CodingMode {
    pub fn validate(&self) -> Result<()> {
        if let CodingMode::Repetition {
            rate_inverse,
            interleave_depth,
        } = self
        {
            if *rate_inverse < 1 {
                return Err(SimError::invalid("repetition rate_inverse must be >= 1"));
            }
            if *interleave_depth < 1 {
                return Err(SimError::invalid("interleave_depth must be >= 1"));
            }
        }
        Ok(())
    }

    /// Code rate as a fraction in (0, 1].
    pub fn rate(&self) -> f64 {
        match self {
            CodingMode::Uncoded => 1.0,
            CodingMode::Repetition { rate_inverse, .. } => 1.0 / *rate_inverse as f64,
        }
    }

    pub fn coded_len(&self, info_bits: usize) -> usize {
        match self {
            CodingMode::Uncoded => info_bits,
            CodingMode::Repetition { rate_inverse, .. } => info_bits * rate_inverse,
        }
    }
}

/// Linear transmit powers for the two end nodes and the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    pub p_a: f64,
    pub p_b: f64,
    pub p_c: f64,
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_a", self.p_a), ("p_b", self.p_b), ("p_c", self.p_c)] {
            if !p.is_finite() || p <= 0.0 {
                return Err(SimError::invalid(format!(
                    "{name} must be finite and > 0, got {p}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            p_a: 1.0,
            p_b: 1.0,
            p_c: 1.0,
        }
    }
}

/// Transmission block geometry: `n` coded symbols in `l` coherence
/// blocks of `q` symbols, carrying `k` information bits per flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameParams {
    n: usize,
    q: usize,
    l: usize,
    k: usize,
}

impl FrameParams {
    pub fn new(n: usize, q: usize, l: usize, k: usize) -> Result<Self> {
        if n == 0 || q == 0 || l == 0 || k == 0 {
            return Err(SimError::config("frame: n, q, l and k must all be >= 1"));
        }
        if n != q * l {
            return Err(SimError::config(format!(
                "frame: n ({n}) must equal q*l ({q}*{l} = {})",
                q * l
            )));
        }
        Ok(FrameParams { n, q, l, k })
    }

    /// Checks that the coding mode fills the frame exactly.
    pub fn validate_coding(&self, mode: CodingMode) -> Result<()> {
        mode.validate()?;
        match mode {
            CodingMode::Uncoded => {
                if self.k != self.n {
                    return Err(SimError::config(format!(
                        "frame: uncoded requires k ({}) == n ({})",
                        self.k, self.n
                    )));
                }
            }
            CodingMode::Repetition {
                rate_inverse,
                interleave_depth,
            } => {
                if self.k * rate_inverse != self.n {
                    return Err(SimError::config(format!(
                        "frame: repetition requires k*rate_inverse ({}*{rate_inverse} = {}) == n ({})",
                        self.k,
                        self.k * rate_inverse,
                        self.n
                    )));
                }
                if !self.n.is_multiple_of(interleave_depth) {
                    return Err(SimError::config(format!(
                        "frame: interleave_depth ({interleave_depth}) must divide n ({})",
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// BPSK modulation: bit 0 -> +1, bit 1 -> -1.
pub fn modulate_bpsk(bits: &BitBlock) -> SymbolBlock {
    SymbolBlock {
        symbols: bits
            .bits()
            .iter()
            .map(|&b| if b == 0 { 1.0 } else { -1.0 })
            .collect(),
    }
}

/// Coherent LLR demodulation with perfect receiver channel knowledge.
///
/// `llr[n] = 4 * sqrt(P) * Re(conj(h[n]) * r[n]) / sigma2`, positive for
/// bit 0.
pub fn demodulate_llr(
    r: &[ComplexSample],
    h: &ChannelRealization,
    power: f64,
    noise: NoiseSpec,
) -> Result<Vec<f64>> {
    if r.len() != h.len() {
        return Err(SimError::invalid(format!(
            "received length {} does not match channel length {}",
            r.len(),
            h.len()
        )));
    }
    let scale = 4.0 * power.sqrt() / noise.sigma2();
    Ok(r.iter()
        .enumerate()
        .map(|(n, &rn)| scale * (h.gain(n).conj() * rn).re)
        .collect())
}

/// Row-column block interleaver: write row-wise into `depth` rows, read
/// column-wise. `depth` must divide the sequence length.
pub fn interleave<T: Copy>(seq: &[T], depth: usize) -> Result<Vec<T>> {
    if depth == 0 {
        return Err(SimError::invalid("interleave depth must be >= 1"));
    }
    if !seq.len().is_multiple_of(depth) {
        return Err(SimError::invalid(format!(
            "interleave depth {depth} does not divide sequence length {}",
            seq.len()
        )));
    }
    let cols = seq.len() / depth;
    let mut out = Vec::with_capacity(seq.len());
    for c in 0..cols {
        for r in 0..depth {
            out.push(seq[r * cols + c]);
        }
    }
    Ok(out)
}

/// Inverse of [`interleave`] with the same depth.
pub fn deinterleave<T: Copy>(seq: &[T], depth: usize) -> Result<Vec<T>> {
    if depth == 0 {
        return Err(SimError::invalid("interleave depth must be >= 1"));
    }
    if !seq.len().is_multiple_of(depth) {
        return Err(SimError::invalid(format!(
            "interleave depth {depth} does not divide sequence length {}",
            seq.len()
        )));
    }
    let cols = seq.len() / depth;
    let mut out = vec![seq[0]; seq.len()];
    for c in 0..cols {
        for r in 0..depth {
            out[r * cols + c] = seq[c * depth + r];
        }
    }
    Ok(out)
}

/// Encodes an information block for transmission.
pub fn encode(bits: &BitBlock, mode: CodingMode) -> Result<BitBlock> {
    mode.validate()?;
    match mode {
        CodingMode::Uncoded => Ok(bits.clone()),
        CodingMode::Repetition {
            rate_inverse,
            interleave_depth,
        } => {
            let mut repeated = Vec::with_capacity(bits.len() * rate_inverse);
            for &b in bits.bits() {
                repeated.extend(std::iter::repeat_n(b, rate_inverse));
            }
            let coded = interleave(&repeated, interleave_depth)?;
            Ok(BitBlock {
                origin: bits.origin(),
                bits: coded,
            })
        }
    }
}

#[inline]
fn llr_to_bit(llr: f64) -> u8 {
    // Ties (llr == 0) decode to bit 0.
    u8::from(llr < 0.0)
}

/// Decodes coded-symbol LLRs back to information bits.
pub fn decode(llrs: &[f64], mode: CodingMode, origin: Endpoint) -> Result<BitBlock> {
    mode.validate()?;
    let bits = match mode {
        CodingMode::Uncoded => llrs.iter().map(|&l| llr_to_bit(l)).collect(),
        CodingMode::Repetition {
            rate_inverse,
            interleave_depth,
        } => {
            if !llrs.len().is_multiple_of(rate_inverse) {
                return Err(SimError::invalid(format!(
                    "LLR length {} is not a multiple of rate_inverse {rate_inverse}",
                    llrs.len()
                )));
            }
            let natural = deinterleave(llrs, interleave_depth)?;
            natural
                .chunks_exact(rate_inverse)
                .map(|group| llr_to_bit(group.iter().sum()))
                .collect()
        }
    };
    Ok(BitBlock { origin, bits })
}

/// Converts an Eb/N0 target into a complex noise variance.
///
/// With unit-normalized channels, `sigma2 = P / (rate * 10^(ebn0/10))`.
/// The convention is per link: every transmission uses its node's full
/// power with no energy split across slots.
pub fn ebn0_to_sigma2(ebn0_db: f64, code_rate: f64, power: f64) -> Result<NoiseSpec> {
    if !ebn0_db.is_finite() {
        return Err(SimError::invalid("ebn0_db must be finite"));
    }
    if !(code_rate > 0.0 && code_rate <= 1.0) {
        return Err(SimError::invalid(format!(
            "code rate must be in (0, 1], got {code_rate}"
        )));
    }
    if !power.is_finite() || power <= 0.0 {
        return Err(SimError::invalid(format!(
            "transmit power must be finite and > 0, got {power}"
        )));
    }
    let gamma = 10f64.powf(ebn0_db / 10.0);
    NoiseSpec::new(power / (code_rate * gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::expand_realization;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn block(origin: Endpoint, bits: &[u8]) -> BitBlock {
        BitBlock::new(origin, bits.to_vec()).unwrap()
    }

    #[test]
    fn bpsk_mapping() {
        let s = modulate_bpsk(&block(Endpoint::A, &[0, 1, 0]));
        assert_eq!(s.symbols(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn bpsk_empty_block() {
        let s = modulate_bpsk(&block(Endpoint::A, &[]));
        assert!(s.is_empty());
    }

    #[test]
    fn bpsk_all_zeros() {
        let s = modulate_bpsk(&block(Endpoint::B, &[0; 8]));
        assert_eq!(s.symbols(), &[1.0; 8]);
    }

    #[test]
    fn llr_direct_formula() {
        let h = expand_realization(vec![ComplexSample::new(1.0, 0.0)], 1).unwrap();
        let llrs = demodulate_llr(
            &[ComplexSample::new(2.0, 0.0)],
            &h,
            1.0,
            NoiseSpec::new(1.0).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(llrs[0], 8.0);
        assert_eq!(llr_to_bit(llrs[0]), 0);

        let llrs = demodulate_llr(
            &[ComplexSample::new(-1.0, 0.0)],
            &h,
            1.0,
            NoiseSpec::new(2.0).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(llrs[0], -2.0);
        assert_eq!(llr_to_bit(llrs[0]), 1);
    }

    #[test]
    fn llr_tie_decodes_to_zero() {
        assert_eq!(llr_to_bit(0.0), 0);
    }

    #[test]
    fn llr_length_mismatch_rejected() {
        let h = expand_realization(vec![ComplexSample::new(1.0, 0.0)], 2).unwrap();
        assert!(demodulate_llr(
            &[ComplexSample::new(1.0, 0.0)],
            &h,
            1.0,
            NoiseSpec::new(1.0).unwrap()
        )
        .is_err());
    }

    #[test]
    fn noiseless_roundtrip_any_gain() {
        use crate::channel::apply_link;
        use crate::stream::derive_rng;
        let mut rng = derive_rng(20, &[0]);
        let bits = BitBlock::random(Endpoint::A, 64, &mut rng);
        let x = modulate_bpsk(&bits);
        let gains = crate::channel::draw_block_gains(
            &mut rng,
            crate::channel::FadingModel::RayleighBlock,
            8,
        )
        .unwrap();
        let h = expand_realization(gains, 8).unwrap();
        let noise = NoiseSpec::new(1e-24).unwrap();
        let r = apply_link(&x.to_baseband(), &h, 1.0, noise, &mut rng).unwrap();
        let llrs = demodulate_llr(&r, &h, 1.0, noise).unwrap();
        let decided = decode(&llrs, CodingMode::Uncoded, Endpoint::A).unwrap();
        assert_eq!(decided, bits);
    }

    #[test]
    fn repetition_encode_identity_interleave() {
        let coded = encode(
            &block(Endpoint::A, &[1, 0]),
            CodingMode::Repetition {
                rate_inverse: 3,
                interleave_depth: 1,
            },
        )
        .unwrap();
        assert_eq!(coded.bits(), &[1, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn row_column_interleave_definition() {
        let out = interleave(&['a', 'b', 'c', 'd'], 2).unwrap();
        assert_eq!(out, vec!['a', 'c', 'b', 'd']);
    }

    #[test]
    fn uncoded_encode_is_identity() {
        let b = block(Endpoint::B, &[1, 0, 1, 1]);
        assert_eq!(encode(&b, CodingMode::Uncoded).unwrap(), b);
    }

    #[test]
    fn decode_sums_llrs_per_bit() {
        let mode = CodingMode::Repetition {
            rate_inverse: 3,
            interleave_depth: 1,
        };
        let out = decode(&[3.0, 1.0, -1.0], mode, Endpoint::A).unwrap();
        assert_eq!(out.bits(), &[0]);
        let out = decode(&[-5.0, 1.0, 1.0], mode, Endpoint::A).unwrap();
        assert_eq!(out.bits(), &[1]);
    }

    #[test]
    fn encode_decode_roundtrip_all_modes() {
        use crate::stream::derive_rng;
        let mut rng = derive_rng(21, &[0]);
        let modes = [
            CodingMode::Uncoded,
            CodingMode::Repetition {
                rate_inverse: 3,
                interleave_depth: 1,
            },
            CodingMode::Repetition {
                rate_inverse: 3,
                interleave_depth: 4,
            },
            CodingMode::Repetition {
                rate_inverse: 2,
                interleave_depth: 8,
            },
        ];
        for mode in modes {
            let bits = BitBlock::random(Endpoint::A, 8, &mut rng);
            let coded = encode(&bits, mode).unwrap();
            // Noiseless unit channel: LLR sign equals symbol sign.
            let llrs: Vec<f64> = modulate_bpsk(&coded)
                .symbols()
                .iter()
                .map(|&s| 4.0 * s)
                .collect();
            let decided = decode(&llrs, mode, Endpoint::A).unwrap();
            assert_eq!(decided, bits, "mode {mode:?}");
        }
    }

    #[test]
    fn encode_rejects_depth_not_dividing() {
        let r = encode(
            &block(Endpoint::A, &[1, 0, 1]),
            CodingMode::Repetition {
                rate_inverse: 2,
                interleave_depth: 4,
            },
        );
        assert!(r.is_err());
    }

    #[test]
    fn ebn0_examples() {
        assert_relative_eq!(ebn0_to_sigma2(0.0, 1.0, 1.0).unwrap().sigma2(), 1.0);
        assert_relative_eq!(ebn0_to_sigma2(10.0, 1.0, 1.0).unwrap().sigma2(), 0.1);
        assert_relative_eq!(
            ebn0_to_sigma2(0.0, 1.0 / 3.0, 1.0).unwrap().sigma2(),
            3.0
        );
    }

    #[test]
    fn ebn0_rejects_bad_rate() {
        assert!(ebn0_to_sigma2(0.0, 0.0, 1.0).is_err());
        assert!(ebn0_to_sigma2(0.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn frame_params_enforce_geometry() {
        assert!(FrameParams::new(32, 8, 4, 32).is_ok());
        assert!(FrameParams::new(33, 8, 4, 33).is_err());
        assert!(FrameParams::new(0, 1, 1, 1).is_err());
        let f = FrameParams::new(12, 6, 2, 4).unwrap();
        assert!(f
            .validate_coding(CodingMode::Repetition {
                rate_inverse: 3,
                interleave_depth: 4,
            })
            .is_ok());
        assert!(f.validate_coding(CodingMode::Uncoded).is_err());
        assert!(f
            .validate_coding(CodingMode::Repetition {
                rate_inverse: 2,
                interleave_depth: 4,
            })
            .is_err());
        assert!(f
            .validate_coding(CodingMode::Repetition {
                rate_inverse: 3,
                interleave_depth: 5,
            })
            .is_err());
    }

    #[test]
    fn bitblock_rejects_non_binary() {
        assert!(BitBlock::new(Endpoint::A, vec![0, 1, 2]).is_err());
    }

    #[test]
    fn symbolblock_rejects_off_alphabet() {
        assert!(SymbolBlock::new(vec![1.0, 0.5]).is_err());
    }

    proptest! {
        #[test]
        fn interleaver_is_bijection(
            depth in 1usize..=8,
            cols in 1usize..=16,
            seed in any::<u64>(),
        ) {
            let len = depth * cols;
            let mut rng = crate::stream::derive_rng(seed, &[99]);
            let seq: Vec<u32> = (0..len).map(|_| rng.random()).collect();
            let forth = interleave(&seq, depth).unwrap();
            let back = deinterleave(&forth, depth).unwrap();
            prop_assert_eq!(back, seq);
        }

        #[test]
        fn llr_sign_flips_with_negated_input(
            re in -10.0f64..10.0,
            im in -10.0f64..10.0,
            hre in -2.0f64..2.0,
            him in -2.0f64..2.0,
        ) {
            let h = expand_realization(vec![ComplexSample::new(hre, him)], 1).unwrap();
            let noise = NoiseSpec::new(0.7).unwrap();
            let pos = demodulate_llr(&[ComplexSample::new(re, im)], &h, 1.0, noise).unwrap();
            let neg = demodulate_llr(&[ComplexSample::new(-re, -im)], &h, 1.0, noise).unwrap();
            prop_assert!((pos[0] + neg[0]).abs() < 1e-9);
        }
    }
}
