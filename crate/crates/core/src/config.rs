//! Plain-text run configuration: a sectioned key = value format with strict
//! key checking and line-numbered diagnostics.
//!
//! Units are carried in the key names: `_2pi_ghz` and `_2pi_mhz` values are
//! multiplied by 2 pi x 10^9 or 2 pi x 10^6 into rad/s, `_rad` is radians,
//! `_us` is microseconds.

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;

use crate::drive::{DipoleModel, DriveTriple, StatePair};
use crate::model::Detunings;
use crate::rotor::RotorConstants;
use crate::units::{microseconds, two_pi_ghz, two_pi_mhz};
use crate::vibronic::{ChiParity, Chirality, DipoleAxis, VibrationalLabel};
use crate::{Error, Result};

/// Which Hamiltonian the simulation integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Two-level model after adiabatic elimination; spectral propagation.
    Effective,
    /// Four-level rotating-frame model; spectral propagation.
    Full,
    /// Four-level lab-frame model with oscillating couplings; adaptive
    /// integration.
    Lab,
}

/// Which mirror forms to simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnantiomerSelection {
    Left,
    Right,
    Both,
}

impl EnantiomerSelection {
    pub fn chiralities(&self) -> Vec<Chirality> {
        match self {
            EnantiomerSelection::Left => vec![Chirality::Left],
            EnantiomerSelection::Right => vec![Chirality::Right],
            EnantiomerSelection::Both => vec![Chirality::Left, Chirality::Right],
        }
    }
}

/// The `[simulation]` section.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SimulationSettings {
    pub model: ModelKind,
    pub enantiomer: EnantiomerSelection,
    /// Final time in seconds; the grid spans [0, t_final].
    pub t_final: f64,
    pub grid_points: usize,
    /// Local error tolerance of the adaptive integrator (lab model only).
    pub tolerance: f64,
}

/// The optional `[protocol]` section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ProtocolRequest {
    DarkLeft { n: u32 },
    DarkRight { n: u32 },
    SyncRight { n_left: u32, n_right: u32 },
    SyncLeft { n_left: u32, n_right: u32 },
    Search { target_ratio: f64, n_max: u32 },
}

/// A fully parsed and validated run configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub rotor: RotorConstants,
    pub dipoles: DipoleModel,
    pub fields: DriveTriple,
    pub detunings: Detunings,
    pub simulation: SimulationSettings,
    pub protocol: Option<ProtocolRequest>,
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("rotor", &["a_2pi_ghz", "c_2pi_ghz"]),
    ("states", &["v1", "v2", "v3"]),
    ("dipoles", &["z_21", "x_32", "y_32", "x_31", "y_31"]),
    ("field_12", &["amplitude_2pi_mhz", "phase_rad", "detuning_2pi_mhz"]),
    ("field_23", &["amplitude_2pi_mhz", "phase_rad", "detuning_2pi_mhz"]),
    ("field_13", &["amplitude_2pi_mhz", "phase_rad", "detuning_2pi_mhz"]),
    (
        "simulation",
        &["model", "enantiomer", "t_final_us", "grid_points", "tolerance"],
    ),
    (
        "protocol",
        &["mode", "n", "n_left", "n_right", "target_ratio", "n_max"],
    ),
];

fn known_keys(section: &str) -> Option<&'static [&'static str]> {
    KNOWN_KEYS
        .iter()
        .find(|(name, _)| *name == section)
        .map(|(_, keys)| *keys)
}

struct RawConfig {
    /// (section, key) -> (value, line number)
    entries: HashMap<(String, String), (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut section: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| Error::Config {
                    line,
                    message: format!("malformed section header '{content}'"),
                })?;
                if known_keys(name).is_none() {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown section '[{name}]'"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let section = section.as_ref().ok_or_else(|| Error::Config {
                line,
                message: format!("key '{key}' appears before any [section] header"),
            })?;
            let allowed = known_keys(section).expect("section already validated");
            if !allowed.contains(&key) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key '{key}' in section [{section}]"),
                });
            }
            if value.is_empty() {
                return Err(Error::Config {
                    line,
                    message: format!("key '{key}' has an empty value"),
                });
            }
            let slot = (section.clone(), key.to_string());
            if entries.contains_key(&slot) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key '{key}' in section [{section}]"),
                });
            }
            entries.insert(slot, (value.to_string(), line));
        }
        Ok(RawConfig { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    fn require(&mut self, section: &str, key: &str) -> Result<(String, usize)> {
        self.take(section, key)
            .ok_or_else(|| Error::ConfigMissing(format!("[{section}] {key}")))
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == section)
    }

    fn ensure_consumed(&self, section: &str) -> Result<()> {
        if let Some(((s, k), (_, line))) = self
            .entries
            .iter()
            .find(|((s, _), _)| s == section)
            .map(|(sk, v)| (sk.clone(), v.clone()))
        {
            return Err(Error::Config {
                line,
                message: format!("key '{k}' in section [{s}] is not used by the selected mode"),
            });
        }
        Ok(())
    }
}

fn parse_f64(value: &str, line: usize, what: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Config {
        line,
        message: format!("{what} must be a number, got '{value}'"),
    })
}

fn parse_u32(value: &str, line: usize, what: &str) -> Result<u32> {
    value.parse::<u32>().map_err(|_| Error::Config {
        line,
        message: format!("{what} must be a non-negative integer, got '{value}'"),
    })
}

fn parse_label(value: &str, line: usize, what: &str) -> Result<VibrationalLabel> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Config {
            line,
            message: format!("{what} must be 'm n +' or 'm n -', got '{value}'"),
        });
    }
    let m = parse_u32(parts[0], line, "vibrational quantum number m")?;
    let n = parse_u32(parts[1], line, "vibrational quantum number n")?;
    let parity = match parts[2] {
        "+" => ChiParity::Even,
        "-" => ChiParity::Odd,
        other => {
            return Err(Error::Config {
                line,
                message: format!("parity must be '+' or '-', got '{other}'"),
            })
        }
    };
    Ok(VibrationalLabel::new(m, n, parity, Chirality::Left))
}

fn lift<T>(result: Result<T>, line: usize) -> Result<T> {
    result.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::Config {
            line,
            message: other.to_string(),
        },
    })
}

/// Parses a configuration from text. Every key is validated, unknown or
/// duplicate keys are rejected, and messages carry the offending line.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut raw = RawConfig::parse(text)?;

    let (a, a_line) = raw.require("rotor", "a_2pi_ghz")?;
    let (c, c_line) = raw.require("rotor", "c_2pi_ghz")?;
    let a = two_pi_ghz(parse_f64(&a, a_line, "rotor constant A")?);
    let c = two_pi_ghz(parse_f64(&c, c_line, "rotor constant C")?);
    let rotor = lift(RotorConstants::prolate(a, c), a_line)?;

    let mut labels = [VibrationalLabel::new(0, 0, ChiParity::Even, Chirality::Left); 3];
    for (i, key) in ["v1", "v2", "v3"].iter().enumerate() {
        let (value, line) = raw.require("states", key)?;
        labels[i] = parse_label(&value, line, key)?;
    }

    let dipole_keys = [
        ("z_21", StatePair::V2V1, DipoleAxis::Z),
        ("x_32", StatePair::V3V2, DipoleAxis::X),
        ("y_32", StatePair::V3V2, DipoleAxis::Y),
        ("x_31", StatePair::V3V1, DipoleAxis::X),
        ("y_31", StatePair::V3V1, DipoleAxis::Y),
    ];
    let mut magnitudes = Vec::new();
    let mut dipole_line = 1;
    for (key, pair, axis) in dipole_keys {
        let (value, line) = raw.require("dipoles", key)?;
        let magnitude = parse_f64(&value, line, key)?;
        magnitudes.push((pair, axis, magnitude));
        dipole_line = line;
    }
    let dipoles = lift(DipoleModel::new(labels, &magnitudes), dipole_line)?;

    let mut field_params = Vec::new();
    let mut field_line = 1;
    for section in ["field_12", "field_23", "field_13"] {
        let (amp, amp_line) = raw.require(section, "amplitude_2pi_mhz")?;
        let (phase, phase_line) = raw.require(section, "phase_rad")?;
        let (det, det_line) = raw.require(section, "detuning_2pi_mhz")?;
        let amp = two_pi_mhz(parse_f64(&amp, amp_line, "amplitude")?);
        let phase = parse_f64(&phase, phase_line, "phase")?;
        let det = two_pi_mhz(parse_f64(&det, det_line, "detuning")?);
        field_params.push((amp, phase, det));
        field_line = amp_line;
    }
    let fields = lift(
        DriveTriple::from_amplitudes_phases(
            (field_params[0].0, field_params[0].1),
            (field_params[1].0, field_params[1].1),
            (field_params[2].0, field_params[2].1),
        ),
        field_line,
    )?;
    let detunings = lift(
        Detunings::new(field_params[0].2, field_params[1].2, field_params[2].2),
        field_line,
    )?;

    let (model, model_line) = raw.require("simulation", "model")?;
    let model = match model.as_str() {
        "effective" => ModelKind::Effective,
        "full" => ModelKind::Full,
        "lab" => ModelKind::Lab,
        other => {
            return Err(Error::Config {
                line: model_line,
                message: format!("model must be effective, full, or lab, got '{other}'"),
            })
        }
    };
    let (enantiomer, en_line) = raw.require("simulation", "enantiomer")?;
    let enantiomer = match enantiomer.as_str() {
        "left" => EnantiomerSelection::Left,
        "right" => EnantiomerSelection::Right,
        "both" => EnantiomerSelection::Both,
        other => {
            return Err(Error::Config {
                line: en_line,
                message: format!("enantiomer must be left, right, or both, got '{other}'"),
            })
        }
    };
    let (t_final, t_line) = raw.require("simulation", "t_final_us")?;
    let t_final = microseconds(parse_f64(&t_final, t_line, "final time")?);
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::Config {
            line: t_line,
            message: "final time must be positive".into(),
        });
    }
    let (points, points_line) = raw.require("simulation", "grid_points")?;
    let grid_points = points.parse::<usize>().ok().filter(|&n| n >= 2).ok_or_else(|| {
        Error::Config {
            line: points_line,
            message: format!("grid_points must be an integer >= 2, got '{points}'"),
        }
    })?;
    let tolerance = match raw.take("simulation", "tolerance") {
        Some((value, line)) => {
            let tol = parse_f64(&value, line, "tolerance")?;
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::Config {
                    line,
                    message: format!("tolerance must be in (0, 1), got {tol:e}"),
                });
            }
            tol
        }
        None => 1e-10,
    };
    let simulation = SimulationSettings {
        model,
        enantiomer,
        t_final,
        grid_points,
        tolerance,
    };

    let protocol = if raw.has_section("protocol") {
        let (mode, mode_line) = raw.require("protocol", "mode")?;
        let request = match mode.as_str() {
            "dark_left" | "dark_right" => {
                let (n, n_line) = raw.require("protocol", "n")?;
                let n = parse_u32(&n, n_line, "n")?;
                if mode == "dark_left" {
                    ProtocolRequest::DarkLeft { n }
                } else {
                    ProtocolRequest::DarkRight { n }
                }
            }
            "sync_right" | "sync_left" => {
                let (nl, nl_line) = raw.require("protocol", "n_left")?;
                let (nr, nr_line) = raw.require("protocol", "n_right")?;
                let n_left = parse_u32(&nl, nl_line, "n_left")?;
                let n_right = parse_u32(&nr, nr_line, "n_right")?;
                if mode == "sync_right" {
                    ProtocolRequest::SyncRight { n_left, n_right }
                } else {
                    ProtocolRequest::SyncLeft { n_left, n_right }
                }
            }
            "search" => {
                let (target, t_line) = raw.require("protocol", "target_ratio")?;
                let (n_max, n_line) = raw.require("protocol", "n_max")?;
                ProtocolRequest::Search {
                    target_ratio: parse_f64(&target, t_line, "target_ratio")?,
                    n_max: parse_u32(&n_max, n_line, "n_max")?,
                }
            }
            other => {
                return Err(Error::Config {
                    line: mode_line,
                    message: format!(
                        "mode must be dark_left, dark_right, sync_right, sync_left, \
                         or search, got '{other}'"
                    ),
                })
            }
        };
        raw.ensure_consumed("protocol")?;
        Some(request)
    } else {
        None
    };

    Ok(Config {
        rotor,
        dipoles,
        fields,
        detunings,
        simulation,
        protocol,
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigRead {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_config(&text)
}
