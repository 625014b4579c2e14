//! Config file schema, documented defaults, and validation.
//!
//! Experiment manifests are TOML. Every field is optional; omitted
//! fields take the defaults listed in the README. Unknown fields are
//! rejected, and validation runs completely before any simulation work
//! starts.

use serde::Deserialize;

use ppdrsim_core::channel::FadingModel;
use ppdrsim_core::phy::{CodingMode, FrameParams, PowerConfig};
use ppdrsim_core::relay::{DecodeCheck, RelayProtocol};
use ppdrsim_core::scenario::{
    MeocConfig, Point, ScenarioConfig, ScenarioEvent, TerrestrialConfig, TimedEvent, UserClass,
    UserConfig,
};
use ppdrsim_core::sweep::{
    LinkFading, SweepConfig, DEFAULT_CHUNK_TRIALS, DEFAULT_MAX_TRIALS, DEFAULT_MIN_ERRORS,
};
use ppdrsim_core::{Result, SimError};

pub const DEFAULT_SEED: u64 = 42;
/// Default Rician line-of-sight factor for the satellite links, in dB.
pub const DEFAULT_RICIAN_K_DB: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunCommand {
    Ber,
    Scenario,
}

impl RunCommand {
    fn name(&self) -> &'static str {
        match self {
            RunCommand::Ber => "ber",
            RunCommand::Scenario => "scenario",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

/// Fully validated configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub format: OutputFormat,
    /// Output path; `None` means stdout.
    pub out: Option<std::path::PathBuf>,
    pub sweep: Option<SweepConfig>,
    pub scenario: Option<ScenarioConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    seed: Option<u64>,
    format: Option<String>,
    out: Option<String>,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    frame: FrameSection,
    #[serde(default)]
    coding: CodingSection,
    #[serde(default)]
    powers: PowersSection,
    #[serde(default)]
    links: LinksSection,
    #[serde(default)]
    relay: RelaySection,
    scenario: Option<ScenarioSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    protocols: Option<Vec<String>>,
    ebn0_grid_db: Option<Vec<f64>>,
    min_errors: Option<u64>,
    max_trials: Option<u64>,
    chunk_trials: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameSection {
    n: Option<usize>,
    q: Option<usize>,
    l: Option<usize>,
    k: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodingSection {
    mode: Option<String>,
    rate_inverse: Option<usize>,
    interleave_depth: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowersSection {
    p_a: Option<f64>,
    p_b: Option<f64>,
    p_c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinksSection {
    a_to_b: Option<LinkSection>,
    a_to_c: Option<LinkSection>,
    b_to_a: Option<LinkSection>,
    b_to_c: Option<LinkSection>,
    c_to_a: Option<LinkSection>,
    c_to_b: Option<LinkSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSection {
    fading: String,
    k_factor_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelaySection {
    decode_check: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    duration_steps: Option<u64>,
    #[serde(default)]
    users: Vec<UserSection>,
    meoc: Option<MeocSection>,
    terrestrial: Option<TerrestrialSection>,
    #[serde(default)]
    events: Vec<EventSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserSection {
    id: u32,
    class: String,
    position: Point,
    demand: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeocSection {
    position: Option<Point>,
    coverage_radius_m: Option<f64>,
    capacity_units: Option<f64>,
    speed_m_per_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TerrestrialSection {
    position: Option<Point>,
    coverage_radius_m: Option<f64>,
    capacity_units: Option<f64>,
    alive: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventSection {
    step: u64,
    kind: String,
    factor: Option<f64>,
    waypoint: Option<Point>,
    multiplier: Option<f64>,
}

fn parse_protocol(name: &str) -> Result<RelayProtocol> {
    match name {
        "direct" => Ok(RelayProtocol::DirectOnly),
        "af" => Ok(RelayProtocol::AmplifyForward),
        "df" => Ok(RelayProtocol::DecodeForwardNc),
        other => Err(SimError::config(format!(
            "sweep.protocols: unknown protocol {other:?} (valid: direct, af, df)"
        ))),
    }
}

fn parse_format(name: &str) -> Result<OutputFormat> {
    match name {
        "csv" => Ok(OutputFormat::Csv),
        "jsonl" => Ok(OutputFormat::Jsonl),
        other => Err(SimError::config(format!(
            "format: unknown format {other:?} (valid: csv, jsonl)"
        ))),
    }
}

fn parse_link(path: &str, section: &LinkSection) -> Result<FadingModel> {
    match section.fading.as_str() {
        "awgn" | "rayleigh" => {
            if section.k_factor_db.is_some() {
                return Err(SimError::config(format!(
                    "{path}.k_factor_db only applies to fading = \"rician\""
                )));
            }
            Ok(if section.fading == "awgn" {
                FadingModel::AwgnOnly
            } else {
                FadingModel::RayleighBlock
            })
        }
        "rician" => {
            let k_db = section.k_factor_db.unwrap_or(DEFAULT_RICIAN_K_DB);
            if !k_db.is_finite() {
                return Err(SimError::config(format!(
                    "{path}.k_factor_db must be finite"
                )));
            }
            Ok(FadingModel::Rician {
                k_factor: 10f64.powf(k_db / 10.0),
            })
        }
        other => Err(SimError::config(format!(
            "{path}.fading: unknown model {other:?} (valid: awgn, rayleigh, rician)"
        ))),
    }
}

fn build_link_fading(links: &LinksSection) -> Result<LinkFading> {
    // Defaults: the two end nodes see each other over a terrestrial
    // Rayleigh path; every link touching the relay rides the satellite
    // and is Rician.
    let rician = FadingModel::Rician {
        k_factor: 10f64.powf(DEFAULT_RICIAN_K_DB / 10.0),
    };
    let resolve = |path: &str, section: &Option<LinkSection>, default: FadingModel| {
        section
            .as_ref()
            .map(|s| parse_link(path, s))
            .unwrap_or(Ok(default))
    };
    Ok(LinkFading {
        a_to_b: resolve("links.a_to_b", &links.a_to_b, FadingModel::RayleighBlock)?,
        a_to_c: resolve("links.a_to_c", &links.a_to_c, rician)?,
        b_to_a: resolve("links.b_to_a", &links.b_to_a, FadingModel::RayleighBlock)?,
        b_to_c: resolve("links.b_to_c", &links.b_to_c, rician)?,
        c_to_a: resolve("links.c_to_a", &links.c_to_a, rician)?,
        c_to_b: resolve("links.c_to_b", &links.c_to_b, rician)?,
    })
}

fn build_coding(section: &CodingSection) -> Result<CodingMode> {
    match section.mode.as_deref().unwrap_or("uncoded") {
        "uncoded" => {
            if section.rate_inverse.is_some() || section.interleave_depth.is_some() {
                return Err(SimError::config(
                    "coding: rate_inverse and interleave_depth require mode = \"repetition\"",
                ));
            }
            Ok(CodingMode::Uncoded)
        }
        "repetition" => Ok(CodingMode::Repetition {
            rate_inverse: section.rate_inverse.unwrap_or(3),
            interleave_depth: section.interleave_depth.unwrap_or(4),
        }),
        other => Err(SimError::config(format!(
            "coding.mode: unknown mode {other:?} (valid: uncoded, repetition)"
        ))),
    }
}

fn build_sweep(file: &FileConfig, seed: u64) -> Result<SweepConfig> {
    let protocols = match &file.sweep.protocols {
        None => vec![
            RelayProtocol::DirectOnly,
            RelayProtocol::AmplifyForward,
            RelayProtocol::DecodeForwardNc,
        ],
        Some(names) => names
            .iter()
            .map(|n| parse_protocol(n))
            .collect::<Result<Vec<_>>>()?,
    };
    let grid = file
        .sweep
        .ebn0_grid_db
        .clone()
        .unwrap_or_else(|| (0..=15).map(|i| (2 * i) as f64).collect());
    let frame = FrameParams::new(
        file.frame.n.unwrap_or(128),
        file.frame.q.unwrap_or(128),
        file.frame.l.unwrap_or(1),
        file.frame.k.unwrap_or(128),
    )?;
    let powers = PowerConfig {
        p_a: file.powers.p_a.unwrap_or(1.0),
        p_b: file.powers.p_b.unwrap_or(1.0),
        p_c: file.powers.p_c.unwrap_or(1.0),
    };
    let decode_check = match file.relay.decode_check.as_deref().unwrap_or("genie") {
        "genie" => DecodeCheck::Genie,
        "crc16" => DecodeCheck::Crc16,
        other => {
            return Err(SimError::config(format!(
                "relay.decode_check: unknown check {other:?} (valid: genie, crc16)"
            )))
        }
    };
    let cfg = SweepConfig {
        protocols,
        ebn0_grid_db: grid,
        frame,
        powers,
        link_fading: build_link_fading(&file.links)?,
        coding: build_coding(&file.coding)?,
        decode_check,
        min_errors: file.sweep.min_errors.unwrap_or(DEFAULT_MIN_ERRORS),
        max_trials: file.sweep.max_trials.unwrap_or(DEFAULT_MAX_TRIALS),
        chunk_trials: file.sweep.chunk_trials.unwrap_or(DEFAULT_CHUNK_TRIALS),
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn build_event(index: usize, section: &EventSection) -> Result<TimedEvent> {
    let path = format!("scenario.events[{index}]");
    let reject_extras = |allowed: &str| -> Result<()> {
        let extras = [
            ("factor", section.factor.is_some()),
            ("waypoint", section.waypoint.is_some()),
            ("multiplier", section.multiplier.is_some()),
        ];
        for (name, present) in extras {
            if present && name != allowed {
                return Err(SimError::config(format!(
                    "{path}.{name} does not apply to kind {:?}",
                    section.kind
                )));
            }
        }
        Ok(())
    };
    let event = match section.kind.as_str() {
        "terrestrial_destroyed" => {
            reject_extras("")?;
            ScenarioEvent::TerrestrialDestroyed
        }
        "terrestrial_degraded" => {
            reject_extras("factor")?;
            let factor = section.factor.ok_or_else(|| {
                SimError::config(format!("{path}.factor is required for terrestrial_degraded"))
            })?;
            ScenarioEvent::TerrestrialDegraded { factor }
        }
        "meoc_move" => {
            reject_extras("waypoint")?;
            let waypoint = section.waypoint.ok_or_else(|| {
                SimError::config(format!("{path}.waypoint is required for meoc_move"))
            })?;
            ScenarioEvent::MeocMove { waypoint }
        }
        "traffic_surge" => {
            reject_extras("multiplier")?;
            let multiplier = section.multiplier.ok_or_else(|| {
                SimError::config(format!("{path}.multiplier is required for traffic_surge"))
            })?;
            ScenarioEvent::TrafficSurge { multiplier }
        }
        other => {
            return Err(SimError::config(format!(
                "{path}.kind: unknown kind {other:?} (valid: terrestrial_destroyed, \
                 terrestrial_degraded, meoc_move, traffic_surge)"
            )))
        }
    };
    Ok(TimedEvent {
        step: section.step,
        event,
    })
}

fn build_scenario(section: &ScenarioSection) -> Result<ScenarioConfig> {
    let users = section
        .users
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let class = match u.class.as_str() {
                "first_responder" => UserClass::FirstResponder,
                "civilian" => UserClass::Civilian,
                other => {
                    return Err(SimError::config(format!(
                        "scenario.users[{i}].class: unknown class {other:?} \
                         (valid: first_responder, civilian)"
                    )))
                }
            };
            Ok(UserConfig {
                id: u.id,
                class,
                position: u.position,
                demand: u.demand,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let meoc_section = section.meoc.as_ref().cloned().unwrap_or_default();
    let terrestrial_section = section.terrestrial.as_ref().cloned().unwrap_or_default();
    let events = section
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| build_event(i, e))
        .collect::<Result<Vec<_>>>()?;
    let cfg = ScenarioConfig {
        duration_steps: section.duration_steps.unwrap_or(10),
        users,
        meoc: MeocConfig {
            position: meoc_section.position.unwrap_or(Point { x: 0.0, y: 0.0 }),
            coverage_radius_m: meoc_section.coverage_radius_m.unwrap_or(500.0),
            capacity_units: meoc_section.capacity_units.unwrap_or(10.0),
            speed_m_per_step: meoc_section.speed_m_per_step.unwrap_or(25.0),
        },
        terrestrial: TerrestrialConfig {
            position: terrestrial_section.position.unwrap_or(Point { x: 0.0, y: 0.0 }),
            coverage_radius_m: terrestrial_section.coverage_radius_m.unwrap_or(1000.0),
            capacity_units: terrestrial_section.capacity_units.unwrap_or(20.0),
            alive: terrestrial_section.alive.unwrap_or(true),
        },
        events,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses the config file (when given), applies defaults and flag
/// overrides, and validates everything for the requested command.
pub fn load_run_config(
    command: RunCommand,
    file_contents: Option<&str>,
    seed_override: Option<u64>,
    format_override: Option<&str>,
    out_override: Option<std::path::PathBuf>,
) -> Result<RunConfig> {
    let file: FileConfig = match file_contents {
        None => FileConfig::default(),
        Some(text) => toml::from_str(text).map_err(|e| {
            // The toml error message already names the offending key and
            // its location.
            SimError::config(e.to_string().trim().to_string())
        })?,
    };

    if let Some(declared) = &file.command {
        if declared != command.name() {
            return Err(SimError::config(format!(
                "command: config file declares {declared:?} but the {} command was invoked",
                command.name()
            )));
        }
    }

    let seed = seed_override.or(file.seed).unwrap_or(DEFAULT_SEED);
    let out = out_override.or_else(|| file.out.as_ref().map(std::path::PathBuf::from));
    let format = match format_override.or(file.format.as_deref()) {
        None => match command {
            RunCommand::Ber => OutputFormat::Csv,
            RunCommand::Scenario => OutputFormat::Jsonl,
        },
        Some(name) => parse_format(name)?,
    };

    match command {
        RunCommand::Ber => Ok(RunConfig {
            seed,
            format,
            out,
            sweep: Some(build_sweep(&file, seed)?),
            scenario: None,
        }),
        RunCommand::Scenario => {
            if format != OutputFormat::Jsonl {
                return Err(SimError::config(
                    "format: the scenario command emits jsonl only",
                ));
            }
            let section = file.scenario.unwrap_or_default();
            Ok(RunConfig {
                seed,
                format,
                out,
                sweep: None,
                scenario: Some(build_scenario(&section)?),
            })
        }
    }
}

// Sections are cloned when defaults fill in missing tables.
impl Clone for MeocSection {
    fn clone(&self) -> Self {
        MeocSection {
            position: self.position,
            coverage_radius_m: self.coverage_radius_m,
            capacity_units: self.capacity_units,
            speed_m_per_step: self.speed_m_per_step,
        }
    }
}

impl Clone for TerrestrialSection {
    fn clone(&self) -> Self {
        TerrestrialSection {
            position: self.position,
            coverage_radius_m: self.coverage_radius_m,
            capacity_units: self.capacity_units,
            alive: self.alive,
        }
    }
}
