//! The three-slot two-way relay exchange.
//!
//! Nodes `a` and `b` swap one packet each through an optional relay `c`:
//! slot 1 `a` transmits (heard by `b` and `c`), slot 2 `b` transmits
//! (heard by `a` and `c`), slot 3 the relay transmits (heard by `a` and
//! `b`). Three protocols are compared:
//!
//! * `DirectOnly`: no relay, each destination decodes its slot-1/2
//!   observation.
//! * `AmplifyForward`: the relay rebroadcasts the scaled sum of its two
//!   observations; destinations cancel their own contribution with
//!   perfect channel knowledge and maximum-ratio combine the residual
//!   with the direct branch.
//! * `DecodeForwardNc`: the relay decodes both packets. If both decode
//!   correctly it broadcasts the elementwise symbol product (XOR network
//!   coding); if exactly one decodes it broadcasts that packet alone; if
//!   neither decodes it stays silent. Destinations add relay-branch LLRs
//!   to their direct-branch LLRs before decoding.
//!
//! Decode correctness at the relay is genie-aided by default (compared
//! against the true transmitted bits); an appended 16-bit CRC is
//! available as an alternative check. Destinations are assumed to know
//! which action the relay took.

use rand::Rng;

use crate::channel::{
    apply_link, draw_block_gains, expand_realization, ChannelRealization, ComplexSample,
    FadingModel, NoiseSpec,
};
use crate::error::{Result, SimError};
use crate::phy::{
    decode, demodulate_llr, encode, modulate_bpsk, BitBlock, CodingMode, Endpoint, FrameParams,
    PowerConfig, SymbolBlock,
};

/// Relaying protocol under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RelayProtocol {
    #[serde(rename = "direct")]
    DirectOnly,
    #[serde(rename = "af")]
    AmplifyForward,
    #[serde(rename = "df")]
    DecodeForwardNc,
}

impl RelayProtocol {
    /// Short name used in CLI output and config files.
    pub fn name(&self) -> &'static str {
        match self {
            RelayProtocol::DirectOnly => "direct",
            RelayProtocol::AmplifyForward => "af",
            RelayProtocol::DecodeForwardNc => "df",
        }
    }

    /// Stable tag for random stream derivation.
    pub fn stream_tag(&self) -> u64 {
        match self {
            RelayProtocol::DirectOnly => 0,
            RelayProtocol::AmplifyForward => 1,
            RelayProtocol::DecodeForwardNc => 2,
        }
    }
}

/// What the decode-and-forward relay does in the third slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayAction {
    /// Both packets decoded: broadcast their symbol product.
    BroadcastNc,
    /// Only one packet decoded: broadcast it alone.
    BroadcastSingle(Endpoint),
    /// Neither packet decoded: transmit nothing.
    Silent,
}

/// How the relay verifies that a packet decoded correctly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeCheck {
    /// Compare against the true transmitted bits.
    Genie,
    /// Check a 16-bit CRC appended to the information bits.
    Crc16,
}

/// Fading model plus receiver noise for one directed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub fading: FadingModel,
    pub noise: NoiseSpec,
}

/// The six directed links of the triangle. No reciprocity is assumed;
/// each direction carries its own model and noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSet {
    pub a_to_b: Link,
    pub a_to_c: Link,
    pub b_to_a: Link,
    pub b_to_c: Link,
    pub c_to_a: Link,
    pub c_to_b: Link,
}

impl LinkSet {
    pub fn validate(&self) -> Result<()> {
        for link in [
            self.a_to_b,
            self.a_to_c,
            self.b_to_a,
            self.b_to_c,
            self.c_to_a,
            self.c_to_b,
        ] {
            link.fading.validate()?;
        }
        Ok(())
    }
}

/// Fresh channel draws for all six links of one trial.
#[derive(Debug, Clone)]
pub struct LinkRealizations {
    pub a_to_b: ChannelRealization,
    pub a_to_c: ChannelRealization,
    pub b_to_a: ChannelRealization,
    pub b_to_c: ChannelRealization,
    pub c_to_a: ChannelRealization,
    pub c_to_b: ChannelRealization,
}

impl LinkRealizations {
    /// Draws all six channels in a fixed order so a given random stream
    /// always produces the same realizations.
    pub fn draw<R: Rng + ?Sized>(
        links: &LinkSet,
        frame: &FrameParams,
        rng: &mut R,
    ) -> Result<Self> {
        let mut draw_one = |fading: FadingModel| -> Result<ChannelRealization> {
            let gains = draw_block_gains(rng, fading, frame.l())?;
            expand_realization(gains, frame.q())
        };
        Ok(LinkRealizations {
            a_to_b: draw_one(links.a_to_b.fading)?,
            a_to_c: draw_one(links.a_to_c.fading)?,
            b_to_a: draw_one(links.b_to_a.fading)?,
            b_to_c: draw_one(links.b_to_c.fading)?,
            c_to_a: draw_one(links.c_to_a.fading)?,
            c_to_b: draw_one(links.c_to_b.fading)?,
        })
    }
}

/// Everything received during the first two slots.
#[derive(Debug, Clone)]
pub struct SlotObservations {
    /// Slot 1 at node b: a's transmission over the direct link.
    pub direct_at_b: Vec<ComplexSample>,
    /// Slot 1 at the relay: a's transmission.
    pub relay_in_from_a: Vec<ComplexSample>,
    /// Slot 2 at node a: b's transmission over the direct link.
    pub direct_at_a: Vec<ComplexSample>,
    /// Slot 2 at the relay: b's transmission.
    pub relay_in_from_b: Vec<ComplexSample>,
}

/// Runs slots 1 and 2: both end nodes transmit, destinations and the
/// relay listen.
pub fn run_slots_1_2<R: Rng + ?Sized>(
    x_a: &SymbolBlock,
    x_b: &SymbolBlock,
    links: &LinkSet,
    powers: &PowerConfig,
    realizations: &LinkRealizations,
    rng: &mut R,
) -> Result<SlotObservations> {
    if x_a.len() != x_b.len() {
        return Err(SimError::invalid(format!(
            "endpoint symbol blocks differ in length: {} vs {}",
            x_a.len(),
            x_b.len()
        )));
    }
    let a_baseband = x_a.to_baseband();
    let b_baseband = x_b.to_baseband();
    // Fixed draw order: slot 1 (b then c), slot 2 (a then c).
    let direct_at_b = apply_link(
        &a_baseband,
        &realizations.a_to_b,
        powers.p_a,
        links.a_to_b.noise,
        rng,
    )?;
    let relay_in_from_a = apply_link(
        &a_baseband,
        &realizations.a_to_c,
        powers.p_a,
        links.a_to_c.noise,
        rng,
    )?;
    let direct_at_a = apply_link(
        &b_baseband,
        &realizations.b_to_a,
        powers.p_b,
        links.b_to_a.noise,
        rng,
    )?;
    let relay_in_from_b = apply_link(
        &b_baseband,
        &realizations.b_to_c,
        powers.p_b,
        links.b_to_c.noise,
        rng,
    )?;
    Ok(SlotObservations {
        direct_at_b,
        relay_in_from_a,
        direct_at_a,
        relay_in_from_b,
    })
}

/// Elementwise BPSK symbol product. Equals XOR in the bit domain, so
/// each destination can strip its own packet from the broadcast.
pub fn network_code(x_a_hat: &SymbolBlock, x_b_hat: &SymbolBlock) -> Result<SymbolBlock> {
    if x_a_hat.len() != x_b_hat.len() {
        return Err(SimError::invalid(format!(
            "network coding inputs differ in length: {} vs {}",
            x_a_hat.len(),
            x_b_hat.len()
        )));
    }
    let symbols = x_a_hat
        .symbols()
        .iter()
        .zip(x_b_hat.symbols())
        .map(|(sa, sb)| sa * sb)
        .collect();
    SymbolBlock::new(symbols)
}

/// The decode-and-forward decision table.
pub fn relay_df_decide(decoded_a_ok: bool, decoded_b_ok: bool) -> RelayAction {
    match (decoded_a_ok, decoded_b_ok) {
        (true, true) => RelayAction::BroadcastNc,
        (true, false) => RelayAction::BroadcastSingle(Endpoint::A),
        (false, true) => RelayAction::BroadcastSingle(Endpoint::B),
        (false, false) => RelayAction::Silent,
    }
}

/// Amplification factor for the AF relay.
///
/// Statistical normalization: with unit-power fading the sum of the two
/// slot observations has average power `p_a + p_b + sigma2_ac +
/// sigma2_bc`, so scaling by beta puts the average transmit power at
/// `p_c`.
pub fn af_beta(links: &LinkSet, powers: &PowerConfig) -> f64 {
    let input_power =
        powers.p_a + powers.p_b + links.a_to_c.noise.sigma2() + links.b_to_c.noise.sigma2();
    (powers.p_c / input_power).sqrt()
}

/// AF relay processing: scaled sum of the two received slots.
pub fn relay_af(
    relay_in_from_a: &[ComplexSample],
    relay_in_from_b: &[ComplexSample],
    links: &LinkSet,
    powers: &PowerConfig,
) -> Result<Vec<ComplexSample>> {
    if relay_in_from_a.len() != relay_in_from_b.len() {
        return Err(SimError::invalid(format!(
            "relay observations differ in length: {} vs {}",
            relay_in_from_a.len(),
            relay_in_from_b.len()
        )));
    }
    let beta = af_beta(links, powers);
    Ok(relay_in_from_a
        .iter()
        .zip(relay_in_from_b)
        .map(|(ra, rb)| (ra + rb) * beta)
        .collect())
}

/// Slot 3: the relay broadcasts `x_c` to both end nodes. A silent relay
/// is modeled as the all-zero transmit sequence, so destinations still
/// observe noise and sequence lengths stay uniform.
pub fn broadcast_slot3<R: Rng + ?Sized>(
    x_c: &[ComplexSample],
    links: &LinkSet,
    p_c: f64,
    realizations: &LinkRealizations,
    rng: &mut R,
) -> Result<(Vec<ComplexSample>, Vec<ComplexSample>)> {
    let at_a = apply_link(x_c, &realizations.c_to_a, p_c, links.c_to_a.noise, rng)?;
    let at_b = apply_link(x_c, &realizations.c_to_b, p_c, links.c_to_b.noise, rng)?;
    Ok((at_a, at_b))
}

/// Channel knowledge one destination needs to process the relay branch.
///
/// "own" is the destination node itself, "partner" the node whose packet
/// it is trying to recover.
#[derive(Debug, Clone, Copy)]
pub struct CombinerCsi<'a> {
    pub partner: Endpoint,
    /// Relay-to-destination channel.
    pub downlink: &'a ChannelRealization,
    pub downlink_noise: NoiseSpec,
    /// Destination-to-relay channel (self-interference path under AF).
    pub own_uplink: &'a ChannelRealization,
    pub own_uplink_noise: NoiseSpec,
    /// Partner-to-relay channel (signal path under AF).
    pub partner_uplink: &'a ChannelRealization,
    pub partner_uplink_noise: NoiseSpec,
    pub own_power: f64,
    pub partner_power: f64,
    pub relay_power: f64,
    /// AF amplification factor; unused by the other protocols.
    pub af_beta: f64,
}

/// Combines the direct-branch LLRs with the relay observation (when one
/// is usable) and decodes the partner's information bits.
pub fn combine_and_decide(
    direct_llrs: &[f64],
    relay_obs: Option<&[ComplexSample]>,
    own_symbols: &SymbolBlock,
    relay_action: Option<RelayAction>,
    protocol: RelayProtocol,
    csi: &CombinerCsi<'_>,
    mode: CodingMode,
) -> Result<BitBlock> {
    let relay_llrs = match protocol {
        RelayProtocol::DirectOnly => None,
        RelayProtocol::AmplifyForward => {
            let obs = relay_obs.ok_or_else(|| {
                SimError::invalid("amplify-and-forward requires a relay observation")
            })?;
            Some(af_relay_llrs(obs, own_symbols, csi)?)
        }
        RelayProtocol::DecodeForwardNc => match relay_action {
            Some(RelayAction::BroadcastNc) => {
                let obs = relay_obs.ok_or_else(|| {
                    SimError::invalid("network-coded broadcast requires a relay observation")
                })?;
                let coded = demodulate_llr(obs, csi.downlink, csi.relay_power, csi.downlink_noise)?;
                // The broadcast carries x_partner * x_own; multiplying the
                // LLR by the known own symbol leaves an LLR for x_partner.
                Some(
                    coded
                        .iter()
                        .zip(own_symbols.symbols())
                        .map(|(l, s)| l * s)
                        .collect::<Vec<_>>(),
                )
            }
            Some(RelayAction::BroadcastSingle(origin)) if origin == csi.partner => {
                let obs = relay_obs.ok_or_else(|| {
                    SimError::invalid("single-packet broadcast requires a relay observation")
                })?;
                Some(demodulate_llr(
                    obs,
                    csi.downlink,
                    csi.relay_power,
                    csi.downlink_noise,
                )?)
            }
            // The relay repeated this destination's own packet, or stayed
            // silent: the relay branch carries nothing about the partner.
            Some(RelayAction::BroadcastSingle(_)) | Some(RelayAction::Silent) => None,
            None => {
                return Err(SimError::invalid(
                    "decode-and-forward requires a relay action",
                ))
            }
        },
    };

    let combined: Vec<f64> = match relay_llrs {
        Some(extra) => direct_llrs.iter().zip(extra).map(|(d, r)| d + r).collect(),
        None => direct_llrs.to_vec(),
    };
    decode(&combined, mode, csi.partner)
}

/// Relay-branch LLRs for AF after self-interference cancellation.
///
/// The destination knows every channel on the a-c-b path, so it removes
/// `beta * h_down * h_own_up * sqrt(P_own) * x_own` from the slot-3
/// observation and treats the residual as the partner's symbol through
/// the cascaded gain, with the relay's forwarded noise inflating the
/// effective noise variance per coherence block.
fn af_relay_llrs(
    relay_obs: &[ComplexSample],
    own_symbols: &SymbolBlock,
    csi: &CombinerCsi<'_>,
) -> Result<Vec<f64>> {
    if relay_obs.len() != own_symbols.len() {
        return Err(SimError::invalid(format!(
            "relay observation length {} does not match block length {}",
            relay_obs.len(),
            own_symbols.len()
        )));
    }
    let beta = csi.af_beta;
    let own_amp = csi.own_power.sqrt();
    let partner_amp = csi.partner_power.sqrt();
    let forwarded_noise = csi.own_uplink_noise.sigma2() + csi.partner_uplink_noise.sigma2();
    let mut llrs = Vec::with_capacity(relay_obs.len());
    for (n, (&obs, &own)) in relay_obs.iter().zip(own_symbols.symbols()).enumerate() {
        let cascade = csi.downlink.gain(n) * beta;
        let residual = obs - cascade * csi.own_uplink.gain(n) * own_amp * own;
        let signal_gain = cascade * csi.partner_uplink.gain(n) * partner_amp;
        let noise_var = cascade.norm_sqr() * forwarded_noise + csi.downlink_noise.sigma2();
        llrs.push(4.0 * (signal_gain.conj() * residual).re / noise_var);
    }
    Ok(llrs)
}

/// Outcome of one trial: error counts for both message flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Bit errors in b's estimate of a's information bits.
    pub errors_ab: usize,
    /// Bit errors in a's estimate of b's information bits.
    pub errors_ba: usize,
    /// Information bits carried per flow.
    pub bits_per_flow: usize,
    /// Decode-and-forward action, when the protocol has one.
    pub relay_action: Option<RelayAction>,
}

/// Validated per-trial configuration, built once per sweep point.
#[derive(Debug, Clone, Copy)]
pub struct TrialParams<'a> {
    protocol: RelayProtocol,
    frame: &'a FrameParams,
    powers: &'a PowerConfig,
    links: &'a LinkSet,
    coding: CodingMode,
    decode_check: DecodeCheck,
}

impl<'a> TrialParams<'a> {
    pub fn new(
        protocol: RelayProtocol,
        frame: &'a FrameParams,
        powers: &'a PowerConfig,
        links: &'a LinkSet,
        coding: CodingMode,
        decode_check: DecodeCheck,
    ) -> Result<Self> {
        frame.validate_coding(coding)?;
        powers.validate()?;
        links.validate()?;
        if decode_check == DecodeCheck::Crc16 && frame.k() <= CRC_BITS {
            return Err(SimError::config(format!(
                "crc16 decode check needs k > {CRC_BITS}, got k = {}",
                frame.k()
            )));
        }
        Ok(TrialParams {
            protocol,
            frame,
            powers,
            links,
            coding,
            decode_check,
        })
    }

    pub fn protocol(&self) -> RelayProtocol {
        self.protocol
    }

    /// Information bits per flow that count toward the error rate. Under
    /// the CRC check the trailing CRC bits are overhead, not payload.
    pub fn payload_bits(&self) -> usize {
        match self.decode_check {
            DecodeCheck::Genie => self.frame.k(),
            DecodeCheck::Crc16 => self.frame.k() - CRC_BITS,
        }
    }
}

const CRC_BITS: usize = 16;
const CRC16_POLY: u16 = 0x1021;

/// CRC-16/CCITT over a bit sequence, MSB first, initial value 0xFFFF.
fn crc16_bits(bits: &[u8]) -> [u8; CRC_BITS] {
    let mut reg: u16 = 0xFFFF;
    for &b in bits {
        let top = ((reg >> 15) as u8) ^ b;
        reg <<= 1;
        if top == 1 {
            reg ^= CRC16_POLY;
        }
    }
    let mut out = [0u8; CRC_BITS];
    for (i, bit) in out.iter_mut().enumerate() {
        *bit = ((reg >> (CRC_BITS - 1 - i)) & 1) as u8;
    }
    out
}

fn append_crc(payload: &[u8]) -> Vec<u8> {
    let mut framed = payload.to_vec();
    framed.extend_from_slice(&crc16_bits(payload));
    framed
}

fn crc_ok(framed: &[u8]) -> bool {
    let (payload, tail) = framed.split_at(framed.len() - CRC_BITS);
    crc16_bits(payload) == tail
}

/// Draws a fresh information block, with the CRC appended when that
/// check mode is active.
fn draw_info_block<R: Rng + ?Sized>(
    origin: Endpoint,
    params: &TrialParams<'_>,
    rng: &mut R,
) -> BitBlock {
    match params.decode_check {
        DecodeCheck::Genie => BitBlock::random(origin, params.frame.k(), rng),
        DecodeCheck::Crc16 => {
            let payload = BitBlock::random(origin, params.payload_bits(), rng);
            BitBlock::new(origin, append_crc(payload.bits())).expect("crc bits are binary")
        }
    }
}

fn decoded_ok(decoded: &BitBlock, truth: &BitBlock, check: DecodeCheck) -> bool {
    match check {
        DecodeCheck::Genie => decoded == truth,
        DecodeCheck::Crc16 => crc_ok(decoded.bits()),
    }
}

fn count_payload_errors(estimate: &BitBlock, truth: &BitBlock, payload_bits: usize) -> usize {
    estimate.bits()[..payload_bits]
        .iter()
        .zip(&truth.bits()[..payload_bits])
        .filter(|(e, t)| e != t)
        .count()
}

/// Runs one complete trial: fresh bits, fresh channels, slots 1 to 3 per
/// the protocol, and error counts for both flows.
pub fn run_trial<R: Rng + ?Sized>(params: &TrialParams<'_>, rng: &mut R) -> Result<TrialOutcome> {
    let frame = params.frame;
    let links = params.links;
    let powers = params.powers;
    let coding = params.coding;

    // Fixed draw order keeps trials reproducible: bits, channels, then
    // noise slot by slot.
    let info_a = draw_info_block(Endpoint::A, params, rng);
    let info_b = draw_info_block(Endpoint::B, params, rng);
    let x_a = modulate_bpsk(&encode(&info_a, coding)?);
    let x_b = modulate_bpsk(&encode(&info_b, coding)?);

    let realizations = LinkRealizations::draw(links, frame, rng)?;
    let slots = run_slots_1_2(&x_a, &x_b, links, powers, &realizations, rng)?;

    let direct_llrs_at_b = demodulate_llr(
        &slots.direct_at_b,
        &realizations.a_to_b,
        powers.p_a,
        links.a_to_b.noise,
    )?;
    let direct_llrs_at_a = demodulate_llr(
        &slots.direct_at_a,
        &realizations.b_to_a,
        powers.p_b,
        links.b_to_a.noise,
    )?;

    let (relay_action, slot3) = match params.protocol {
        RelayProtocol::DirectOnly => (None, None),
        RelayProtocol::AmplifyForward => {
            let x_c = relay_af(&slots.relay_in_from_a, &slots.relay_in_from_b, links, powers)?;
            let obs = broadcast_slot3(&x_c, links, powers.p_c, &realizations, rng)?;
            (None, Some(obs))
        }
        RelayProtocol::DecodeForwardNc => {
            let llrs_from_a = demodulate_llr(
                &slots.relay_in_from_a,
                &realizations.a_to_c,
                powers.p_a,
                links.a_to_c.noise,
            )?;
            let llrs_from_b = demodulate_llr(
                &slots.relay_in_from_b,
                &realizations.b_to_c,
                powers.p_b,
                links.b_to_c.noise,
            )?;
            let decoded_a = decode(&llrs_from_a, coding, Endpoint::A)?;
            let decoded_b = decode(&llrs_from_b, coding, Endpoint::B)?;
            let ok_a = decoded_ok(&decoded_a, &info_a, params.decode_check);
            let ok_b = decoded_ok(&decoded_b, &info_b, params.decode_check);
            let action = relay_df_decide(ok_a, ok_b);
            // Regenerate coded symbols from the decoded bits. With the
            // genie check these equal the true symbols whenever the
            // packet is flagged correct.
            let x_c = match action {
                RelayAction::BroadcastNc => {
                    let regen_a = modulate_bpsk(&encode(&decoded_a, coding)?);
                    let regen_b = modulate_bpsk(&encode(&decoded_b, coding)?);
                    network_code(&regen_a, &regen_b)?.to_baseband()
                }
                RelayAction::BroadcastSingle(Endpoint::A) => {
                    modulate_bpsk(&encode(&decoded_a, coding)?).to_baseband()
                }
                RelayAction::BroadcastSingle(Endpoint::B) => {
                    modulate_bpsk(&encode(&decoded_b, coding)?).to_baseband()
                }
                RelayAction::Silent => vec![ComplexSample::new(0.0, 0.0); frame.n()],
            };
            let obs = broadcast_slot3(&x_c, links, powers.p_c, &realizations, rng)?;
            (Some(action), Some(obs))
        }
    };

    let (relay_at_a, relay_at_b) = match &slot3 {
        Some((at_a, at_b)) => (Some(at_a.as_slice()), Some(at_b.as_slice())),
        None => (None, None),
    };

    // Node a recovers b's packet.
    let csi_at_a = CombinerCsi {
        partner: Endpoint::B,
        downlink: &realizations.c_to_a,
        downlink_noise: links.c_to_a.noise,
        own_uplink: &realizations.a_to_c,
        own_uplink_noise: links.a_to_c.noise,
        partner_uplink: &realizations.b_to_c,
        partner_uplink_noise: links.b_to_c.noise,
        own_power: powers.p_a,
        partner_power: powers.p_b,
        relay_power: powers.p_c,
        af_beta: af_beta(links, powers),
    };
    let estimate_at_a = combine_and_decide(
        &direct_llrs_at_a,
        relay_at_a,
        &x_a,
        relay_action,
        params.protocol,
        &csi_at_a,
        coding,
    )?;

    // Node b recovers a's packet.
    let csi_at_b = CombinerCsi {
        partner: Endpoint::A,
        downlink: &realizations.c_to_b,
        downlink_noise: links.c_to_b.noise,
        own_uplink: &realizations.b_to_c,
        own_uplink_noise: links.b_to_c.noise,
        partner_uplink: &realizations.a_to_c,
        partner_uplink_noise: links.a_to_c.noise,
        own_power: powers.p_b,
        partner_power: powers.p_a,
        relay_power: powers.p_c,
        af_beta: af_beta(links, powers),
    };
    let estimate_at_b = combine_and_decide(
        &direct_llrs_at_b,
        relay_at_b,
        &x_b,
        relay_action,
        params.protocol,
        &csi_at_b,
        coding,
    )?;

    let payload = params.payload_bits();
    Ok(TrialOutcome {
        errors_ab: count_payload_errors(&estimate_at_b, &info_a, payload),
        errors_ba: count_payload_errors(&estimate_at_a, &info_b, payload),
        bits_per_flow: payload,
        relay_action,
    })
}
