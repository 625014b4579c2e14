//! Monte Carlo BER sweep harness.
//!
//! Each (protocol, Eb/N0) point runs trials in chunks. Chunk `i` derives
//! its random stream from `(seed, protocol, grid index, i)` and chunk
//! results are folded in ascending chunk order, with the adaptive stop
//! rule evaluated after each fold. Workers only decide how many chunks
//! run concurrently, never which chunks contribute, so output is
//! identical for any worker count and for the sequential build.

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::phy::{ebn0_to_sigma2, CodingMode, FrameParams, PowerConfig};
use crate::relay::{DecodeCheck, Link, LinkSet, RelayProtocol, TrialParams};
use crate::stream::derive_rng;

/// Fading assignment for the six links; per-point noise is derived from
/// Eb/N0 and the transmitter's power when the sweep runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFading {
    pub a_to_b: crate::channel::FadingModel,
    pub a_to_c: crate::channel::FadingModel,
    pub b_to_a: crate::channel::FadingModel,
    pub b_to_c: crate::channel::FadingModel,
    pub c_to_a: crate::channel::FadingModel,
    pub c_to_b: crate::channel::FadingModel,
}

impl LinkFading {
    /// The same model on all six links.
    pub fn uniform(model: crate::channel::FadingModel) -> Self {
        LinkFading {
            a_to_b: model,
            a_to_c: model,
            b_to_a: model,
            b_to_c: model,
            c_to_a: model,
            c_to_b: model,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for model in [
            self.a_to_b, self.a_to_c, self.b_to_a, self.b_to_c, self.c_to_a, self.c_to_b,
        ] {
            model.validate()?;
        }
        Ok(())
    }

    /// Builds the full link set for one grid point. Each link's noise
    /// variance is calibrated so that link's Eb/N0 equals the target,
    /// given its transmitter's power.
    pub fn with_ebn0(
        &self,
        ebn0_db: f64,
        code_rate: f64,
        powers: &PowerConfig,
    ) -> Result<LinkSet> {
        let link = |fading, power| -> Result<Link> {
            Ok(Link {
                fading,
                noise: ebn0_to_sigma2(ebn0_db, code_rate, power)?,
            })
        };
        Ok(LinkSet {
            a_to_b: link(self.a_to_b, powers.p_a)?,
            a_to_c: link(self.a_to_c, powers.p_a)?,
            b_to_a: link(self.b_to_a, powers.p_b)?,
            b_to_c: link(self.b_to_c, powers.p_b)?,
            c_to_a: link(self.c_to_a, powers.p_c)?,
            c_to_b: link(self.c_to_b, powers.p_c)?,
        })
    }
}

/// Full description of a BER sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub protocols: Vec<RelayProtocol>,
    pub ebn0_grid_db: Vec<f64>,
    pub frame: FrameParams,
    pub powers: PowerConfig,
    pub link_fading: LinkFading,
    pub coding: CodingMode,
    pub decode_check: DecodeCheck,
    /// Stop a point once this many bit errors have accumulated.
    pub min_errors: u64,
    /// Hard trial cap per point.
    pub max_trials: u64,
    /// Trials per work unit.
    pub chunk_trials: u64,
    pub seed: u64,
}

pub const DEFAULT_MIN_ERRORS: u64 = 100;
pub const DEFAULT_MAX_TRIALS: u64 = 10_000_000;
pub const DEFAULT_CHUNK_TRIALS: u64 = 10_000;

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.protocols.is_empty() {
            return Err(SimError::config("sweep: protocols must be nonempty"));
        }
        for (i, p) in self.protocols.iter().enumerate() {
            if self.protocols[..i].contains(p) {
                return Err(SimError::config(format!(
                    "sweep: protocol {} listed more than once",
                    p.name()
                )));
            }
        }
        if self.ebn0_grid_db.is_empty() {
            return Err(SimError::config("sweep: ebn0_grid_db must be nonempty"));
        }
        if self.ebn0_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(SimError::config("sweep: ebn0_grid_db values must be finite"));
        }
        for w in self.ebn0_grid_db.windows(2) {
            if w[1] <= w[0] {
                return Err(SimError::config(format!(
                    "sweep: ebn0_grid_db must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if self.min_errors < 1 {
            return Err(SimError::config("sweep: min_errors must be >= 1"));
        }
        if self.max_trials < 1 {
            return Err(SimError::config("sweep: max_trials must be >= 1"));
        }
        if self.chunk_trials < 1 {
            return Err(SimError::config("sweep: chunk_trials must be >= 1"));
        }
        self.frame.validate_coding(self.coding)?;
        self.powers.validate()?;
        self.link_fading.validate()?;
        // Surface per-point construction problems before any trial runs.
        let probe = self.link_fading.with_ebn0(
            self.ebn0_grid_db[0],
            self.coding.rate(),
            &self.powers,
        )?;
        TrialParams::new(
            self.protocols[0],
            &self.frame,
            &self.powers,
            &probe,
            self.coding,
            self.decode_check,
        )?;
        Ok(())
    }
}

/// Aggregated estimate for one (protocol, Eb/N0) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerPoint {
    pub protocol: RelayProtocol,
    pub ebn0_db: f64,
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub stderr: f64,
}

impl BerPoint {
    /// Builds a point from raw counts, deriving `ber` and its binomial
    /// standard error. Error counts can never exceed bit counts.
    pub fn from_counts(
        protocol: RelayProtocol,
        ebn0_db: f64,
        trials: u64,
        bits: u64,
        bit_errors: u64,
    ) -> Self {
        assert!(
            bit_errors <= bits,
            "bit_errors ({bit_errors}) exceeds bits ({bits})"
        );
        let (ber, stderr) = if bits > 0 {
            let p = bit_errors as f64 / bits as f64;
            (p, (p * (1.0 - p) / bits as f64).sqrt())
        } else {
            (0.0, 0.0)
        };
        BerPoint {
            protocol,
            ebn0_db,
            trials,
            bits,
            bit_errors,
            ber,
            stderr,
        }
    }
}

/// Merges two estimates of the same point by summing counts.
/// Associative and commutative, with zero-count points as identity.
pub fn merge_points(p1: &BerPoint, p2: &BerPoint) -> Result<BerPoint> {
    if p1.protocol != p2.protocol || p1.ebn0_db != p2.ebn0_db {
        return Err(SimError::invalid(format!(
            "cannot merge points for ({}, {}) and ({}, {})",
            p1.protocol.name(),
            p1.ebn0_db,
            p2.protocol.name(),
            p2.ebn0_db
        )));
    }
    Ok(BerPoint::from_counts(
        p1.protocol,
        p1.ebn0_db,
        p1.trials + p2.trials,
        p1.bits + p2.bits,
        p1.bit_errors + p2.bit_errors,
    ))
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    trials: u64,
    bits: u64,
    bit_errors: u64,
}

impl Counts {
    fn absorb(&mut self, other: Counts) {
        self.trials += other.trials;
        self.bits += other.bits;
        self.bit_errors += other.bit_errors;
    }
}

struct PointJob<'a> {
    params: TrialParams<'a>,
    seed: u64,
    protocol_tag: u64,
    grid_index: u64,
}

impl PointJob<'_> {
    /// Runs chunk `chunk_index`, covering `count` trials. Both message
    /// flows are pooled into one error count.
    fn run_chunk(&self, chunk_index: u64, count: u64) -> Result<Counts> {
        let mut rng = derive_rng(
            self.seed,
            &[self.protocol_tag, self.grid_index, chunk_index],
        );
        let mut counts = Counts::default();
        for _ in 0..count {
            let outcome = crate::relay::run_trial(&self.params, &mut rng)?;
            counts.trials += 1;
            counts.bits += 2 * outcome.bits_per_flow as u64;
            counts.bit_errors += (outcome.errors_ab + outcome.errors_ba) as u64;
        }
        Ok(counts)
    }
}

/// Execution backend: a rayon pool when the `parallel` feature is on and
/// more than one worker was requested, otherwise plain sequential runs.
enum Executor {
    Sequential,
    #[cfg(feature = "parallel")]
    Pool(rayon::ThreadPool),
}

impl Executor {
    fn build(workers: usize) -> Result<Self> {
        #[cfg(feature = "parallel")]
        if workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| SimError::config(format!("worker pool: {e}")))?;
            return Ok(Executor::Pool(pool));
        }
        let _ = workers;
        Ok(Executor::Sequential)
    }

    fn wave_width(&self) -> usize {
        match self {
            Executor::Sequential => 1,
            #[cfg(feature = "parallel")]
            Executor::Pool(pool) => pool.current_num_threads().max(1),
        }
    }

    fn run_wave(&self, job: &PointJob<'_>, chunks: &[(u64, u64)]) -> Result<Vec<Counts>> {
        match self {
            Executor::Sequential => chunks
                .iter()
                .map(|&(index, count)| job.run_chunk(index, count))
                .collect(),
            #[cfg(feature = "parallel")]
            Executor::Pool(pool) => {
                use rayon::prelude::*;
                pool.install(|| {
                    chunks
                        .par_iter()
                        .map(|&(index, count)| job.run_chunk(index, count))
                        .collect()
                })
            }
        }
    }
}

fn run_point(
    cfg: &SweepConfig,
    executor: &Executor,
    job: &PointJob<'_>,
    ebn0_db: f64,
) -> Result<BerPoint> {
    let chunk = cfg.chunk_trials;
    let total_chunks = cfg.max_trials.div_ceil(chunk);
    let wave = executor.wave_width() as u64;
    let mut acc = Counts::default();
    let mut next = 0u64;
    'points: while next < total_chunks {
        let wave_end = (next + wave).min(total_chunks);
        let batch: Vec<(u64, u64)> = (next..wave_end)
            .map(|i| {
                let lo = i * chunk;
                let hi = ((i + 1) * chunk).min(cfg.max_trials);
                (i, hi - lo)
            })
            .collect();
        let results = executor.run_wave(job, &batch)?;
        // Fold in chunk order; chunks past the stop point are discarded
        // so the stop decision never depends on the wave width.
        for counts in results {
            acc.absorb(counts);
            if acc.bit_errors >= cfg.min_errors || acc.trials >= cfg.max_trials {
                break 'points;
            }
        }
        next = wave_end;
    }
    Ok(BerPoint::from_counts(
        job.params.protocol(),
        ebn0_db,
        acc.trials,
        acc.bits,
        acc.bit_errors,
    ))
}

/// Runs the whole sweep: one point per (protocol, grid value), in config
/// order. `workers` bounds concurrent chunk execution and has no effect
/// on the numbers produced.
pub fn run_ber_sweep(cfg: &SweepConfig, workers: usize) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    if workers == 0 {
        return Err(SimError::config("workers must be >= 1"));
    }
    let executor = Executor::build(workers)?;
    let rate = cfg.coding.rate();
    let mut points = Vec::with_capacity(cfg.protocols.len() * cfg.ebn0_grid_db.len());
    for protocol in &cfg.protocols {
        for (grid_index, &ebn0_db) in cfg.ebn0_grid_db.iter().enumerate() {
            let links = cfg.link_fading.with_ebn0(ebn0_db, rate, &cfg.powers)?;
            let params = TrialParams::new(
                *protocol,
                &cfg.frame,
                &cfg.powers,
                &links,
                cfg.coding,
                cfg.decode_check,
            )?;
            let job = PointJob {
                params,
                seed: cfg.seed,
                protocol_tag: protocol.stream_tag(),
                grid_index: grid_index as u64,
            };
            points.push(run_point(cfg, &executor, &job, ebn0_db)?);
        }
    }
    Ok(points)
}

/// Closed-form BER references used for calibration and testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// Coherent BPSK over AWGN: `Q(sqrt(2 * gamma))`.
    BpskAwgn,
    /// BPSK over per-symbol Rayleigh fading:
    /// `(1 - sqrt(gamma / (1 + gamma))) / 2`.
    BpskRayleigh,
    /// Dual-branch maximum-ratio combining over independent Rayleigh
    /// branches with equal average SNR: `p^2 * (1 + 2 * (1 - p))` with
    /// `p` the single-branch Rayleigh BER.
    BpskDualMrcRayleigh,
}

pub const ORACLE_KIND_NAMES: [&str; 3] = ["bpsk-awgn", "bpsk-rayleigh", "bpsk-dual-mrc-rayleigh"];

impl OracleKind {
    pub fn name(&self) -> &'static str {
        match self {
            OracleKind::BpskAwgn => "bpsk-awgn",
            OracleKind::BpskRayleigh => "bpsk-rayleigh",
            OracleKind::BpskDualMrcRayleigh => "bpsk-dual-mrc-rayleigh",
        }
    }
}

impl std::str::FromStr for OracleKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bpsk-awgn" => Ok(OracleKind::BpskAwgn),
            "bpsk-rayleigh" => Ok(OracleKind::BpskRayleigh),
            "bpsk-dual-mrc-rayleigh" => Ok(OracleKind::BpskDualMrcRayleigh),
            other => Err(SimError::invalid(format!(
                "unknown oracle kind {other:?} (valid: {})",
                ORACLE_KIND_NAMES.join(", ")
            ))),
        }
    }
}

fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn rayleigh_ber(gamma: f64) -> f64 {
    0.5 * (1.0 - (gamma / (1.0 + gamma)).sqrt())
}

/// Evaluates a closed-form BER reference at the given Eb/N0.
pub fn oracle_ber(kind: OracleKind, ebn0_db: f64) -> Result<f64> {
    if !ebn0_db.is_finite() {
        return Err(SimError::invalid("ebn0_db must be finite"));
    }
    let gamma = 10f64.powf(ebn0_db / 10.0);
    Ok(match kind {
        OracleKind::BpskAwgn => q_function((2.0 * gamma).sqrt()),
        OracleKind::BpskRayleigh => rayleigh_ber(gamma),
        OracleKind::BpskDualMrcRayleigh => {
            let p = rayleigh_ber(gamma);
            p * p * (1.0 + 2.0 * (1.0 - p))
        }
    })
}

/// Least-squares slope of `log10(ber)` against `ebn0_db / 10` over a
/// window, negated so the result approximates the diversity order.
pub fn diversity_slope(points: &[BerPoint], window_db: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window_db;
    let samples: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.ebn0_db >= lo && p.ebn0_db <= hi && p.ber > 0.0)
        .map(|p| (p.ebn0_db / 10.0, p.ber.log10()))
        .collect();
    if samples.len() < 2 {
        return Err(SimError::invalid(format!(
            "diversity slope needs >= 2 points with ber > 0 in [{lo}, {hi}] dB, found {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean_x: f64 = samples.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y: f64 = samples.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::invalid(
            "diversity slope needs at least two distinct Eb/N0 values",
        ));
    }
    let sxy: f64 = samples
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    Ok(-(sxy / sxx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FadingModel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Frozen references, computed independently from the erfc identity
    // and the closed forms.
    const AWGN_0DB: f64 = 0.0786496035251426;
    const RAYLEIGH_10DB: f64 = 0.0232687053772038;
    const DUAL_MRC_10DB: f64 = 1.59910107616765e-3;

    fn basic_cfg() -> SweepConfig {
        SweepConfig {
            protocols: vec![RelayProtocol::DirectOnly],
            ebn0_grid_db: vec![0.0],
            frame: FrameParams::new(32, 32, 1, 32).unwrap(),
            powers: PowerConfig::default(),
            link_fading: LinkFading::uniform(FadingModel::AwgnOnly),
            coding: CodingMode::Uncoded,
            decode_check: DecodeCheck::Genie,
            min_errors: 200,
            max_trials: 1_000_000,
            chunk_trials: 500,
            seed: 42,
        }
    }

    #[test]
    fn oracle_frozen_values() {
        assert_relative_eq!(
            oracle_ber(OracleKind::BpskAwgn, 0.0).unwrap(),
            AWGN_0DB,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            oracle_ber(OracleKind::BpskRayleigh, 10.0).unwrap(),
            RAYLEIGH_10DB,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            oracle_ber(OracleKind::BpskDualMrcRayleigh, 10.0).unwrap(),
            DUAL_MRC_10DB,
            max_relative = 1e-12
        );
    }

    #[test]
    fn oracle_kind_parsing() {
        use std::str::FromStr;
        assert_eq!(OracleKind::from_str("bpsk-awgn"), Ok(OracleKind::BpskAwgn));
        let err = OracleKind::from_str("bogus").unwrap_err();
        assert!(err.to_string().contains("bpsk-rayleigh"));
    }

    #[test]
    fn awgn_point_matches_oracle() {
        let cfg = basic_cfg();
        let points = run_ber_sweep(&cfg, 1).unwrap();
        let p = &points[0];
        assert!(p.bit_errors >= cfg.min_errors);
        assert!(
            (p.ber - AWGN_0DB).abs() <= 3.0 * p.stderr,
            "ber {} vs oracle {AWGN_0DB} (stderr {})",
            p.ber,
            p.stderr
        );
    }

    #[test]
    fn stopping_contract() {
        let mut cfg = basic_cfg();
        cfg.ebn0_grid_db = vec![0.0, 4.0];
        let points = run_ber_sweep(&cfg, 1).unwrap();
        for p in points {
            assert!(p.bit_errors >= cfg.min_errors || p.trials == cfg.max_trials);
        }
    }

    #[test]
    fn max_trials_cap_respected() {
        let mut cfg = basic_cfg();
        cfg.min_errors = u64::MAX;
        cfg.max_trials = 1234;
        cfg.chunk_trials = 100;
        let points = run_ber_sweep(&cfg, 1).unwrap();
        assert_eq!(points[0].trials, 1234);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut cfg = basic_cfg();
        cfg.protocols = vec![
            RelayProtocol::DirectOnly,
            RelayProtocol::AmplifyForward,
            RelayProtocol::DecodeForwardNc,
        ];
        cfg.ebn0_grid_db = vec![0.0, 6.0];
        cfg.min_errors = 50;
        cfg.chunk_trials = 200;
        let one = run_ber_sweep(&cfg, 1).unwrap();
        let eight = run_ber_sweep(&cfg, 8).unwrap();
        assert_eq!(one, eight);
    }

    #[test]
    fn sweep_is_pure_in_seed() {
        let cfg = basic_cfg();
        assert_eq!(run_ber_sweep(&cfg, 2).unwrap(), run_ber_sweep(&cfg, 2).unwrap());
        let mut other = cfg.clone();
        other.seed = 43;
        assert_ne!(run_ber_sweep(&cfg, 2).unwrap(), run_ber_sweep(&other, 2).unwrap());
    }

    #[test]
    fn ber_monotone_within_tolerance() {
        let mut cfg = basic_cfg();
        cfg.ebn0_grid_db = vec![0.0, 2.0, 4.0, 6.0];
        let points = run_ber_sweep(&cfg, 4).unwrap();
        for w in points.windows(2) {
            assert!(
                w[1].ber <= w[0].ber + 3.0 * (w[0].stderr + w[1].stderr),
                "ber rose from {} to {}",
            w[0].ber,
                w[1].ber
            );
        }
    }

    #[test]
    fn merge_examples() {
        let a = BerPoint::from_counts(RelayProtocol::DirectOnly, 0.0, 10, 1000, 10);
        let b = BerPoint::from_counts(RelayProtocol::DirectOnly, 0.0, 5, 500, 5);
        let merged = merge_points(&a, &b).unwrap();
        assert_eq!(merged.bits, 1500);
        assert_eq!(merged.bit_errors, 15);
        assert_relative_eq!(merged.ber, 0.01);

        let zero = BerPoint::from_counts(RelayProtocol::DirectOnly, 0.0, 0, 0, 0);
        assert_eq!(merge_points(&a, &zero).unwrap(), a);
    }

    #[test]
    fn merge_rejects_mismatched_keys() {
        let a = BerPoint::from_counts(RelayProtocol::DirectOnly, 0.0, 1, 10, 1);
        let b = BerPoint::from_counts(RelayProtocol::AmplifyForward, 0.0, 1, 10, 1);
        let c = BerPoint::from_counts(RelayProtocol::DirectOnly, 2.0, 1, 10, 1);
        assert!(merge_points(&a, &b).is_err());
        assert!(merge_points(&a, &c).is_err());
    }

    #[test]
    fn slope_on_rayleigh_oracle_is_one() {
        let points: Vec<BerPoint> = (20..=30)
            .step_by(2)
            .map(|db| {
                let ber = oracle_ber(OracleKind::BpskRayleigh, db as f64).unwrap();
                synthetic_point(db as f64, ber)
            })
            .collect();
        let slope = diversity_slope(&points, (20.0, 30.0)).unwrap();
        assert!((slope - 1.0).abs() <= 0.15, "slope = {slope}");
    }

    #[test]
    fn slope_on_dual_mrc_oracle_is_two() {
        let points: Vec<BerPoint> = (20..=30)
            .step_by(2)
            .map(|db| {
                let ber = oracle_ber(OracleKind::BpskDualMrcRayleigh, db as f64).unwrap();
                synthetic_point(db as f64, ber)
            })
            .collect();
        let slope = diversity_slope(&points, (20.0, 30.0)).unwrap();
        assert!((slope - 2.0).abs() <= 0.3, "slope = {slope}");
    }

    #[test]
    fn slope_of_constant_curve_is_zero() {
        let points: Vec<BerPoint> = [20.0, 25.0, 30.0]
            .iter()
            .map(|&db| synthetic_point(db, 1e-3))
            .collect();
        let slope = diversity_slope(&points, (20.0, 30.0)).unwrap();
        assert_relative_eq!(slope, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn slope_needs_two_points() {
        let points = [synthetic_point(20.0, 1e-3)];
        assert!(diversity_slope(&points, (20.0, 30.0)).is_err());
    }

    fn synthetic_point(ebn0_db: f64, ber: f64) -> BerPoint {
        let bits = 1_000_000_000u64;
        let errors = (ber * bits as f64).round() as u64;
        BerPoint::from_counts(RelayProtocol::DirectOnly, ebn0_db, bits / 64, bits, errors)
    }

    #[test]
    fn config_validation_catches_bad_grids() {
        let mut cfg = basic_cfg();
        cfg.ebn0_grid_db = vec![];
        assert!(cfg.validate().is_err());
        cfg.ebn0_grid_db = vec![0.0, 0.0];
        assert!(cfg.validate().is_err());
        cfg.ebn0_grid_db = vec![2.0, 0.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_validation_catches_duplicates_and_zeroes() {
        let mut cfg = basic_cfg();
        cfg.protocols = vec![RelayProtocol::DirectOnly, RelayProtocol::DirectOnly];
        assert!(cfg.validate().is_err());
        let mut cfg = basic_cfg();
        cfg.min_errors = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = basic_cfg();
        cfg.protocols = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn invalid_config_fails_before_running() {
        let mut cfg = basic_cfg();
        cfg.frame = FrameParams::new(32, 32, 1, 16).unwrap(); // uncoded needs k == n
        assert!(matches!(
            run_ber_sweep(&cfg, 1),
            Err(SimError::Config(_))
        ));
    }

    // Valid count triples: errors never exceed bits.
    fn count_triple() -> impl Strategy<Value = (u64, u64, u64)> {
        (0u64..1_000_000, 0u64..1_000_000_000)
            .prop_flat_map(|(t, b)| (Just(t), Just(b), 0..=b))
    }

    proptest! {
        #[test]
        fn merge_is_a_commutative_monoid(
            (t1, b1, e1) in count_triple(),
            (t2, b2, e2) in count_triple(),
            (t3, b3, e3) in count_triple(),
        ) {
            let p = |t, b, e| BerPoint::from_counts(RelayProtocol::DecodeForwardNc, 12.0, t, b, e);
            let (a, b, c) = (p(t1, b1, e1), p(t2, b2, e2), p(t3, b3, e3));
            let ab = merge_points(&a, &b).unwrap();
            let ba = merge_points(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            let abc_left = merge_points(&merge_points(&a, &b).unwrap(), &c).unwrap();
            let abc_right = merge_points(&a, &merge_points(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(abc_left.trials, abc_right.trials);
            prop_assert_eq!(abc_left.bits, abc_right.bits);
            prop_assert_eq!(abc_left.bit_errors, abc_right.bit_errors);
            let zero = p(0, 0, 0);
            prop_assert_eq!(merge_points(&a, &zero).unwrap(), a);
        }
    }
}
