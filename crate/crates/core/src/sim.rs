//! Run orchestration: builds the requested model for each selected
//! enantiomer, propagates it, and packages deterministic output files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Config, ModelKind, ProtocolRequest};
use crate::drive::build_coupling_set;
use crate::dynamics::{
    propagate_lab, propagate_trace, time_grid, AdaptiveOptions, PopulationTrace, QuantumState,
};
use crate::model::{
    build_interaction_hamiltonian, build_two_level, eliminate_resonant, CarrierFrequencies,
    EffectiveParams, LevelFrequencies,
};
use crate::output;
use crate::protocol::{
    design_way_one, design_way_two, design_way_two_mirrored, search_way_two, ProtocolSolution,
};
use crate::vibronic::Chirality;
use crate::Result;

/// Version string embedded in every JSON output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One propagated enantiomer.
pub struct EnantiomerRun {
    pub chirality: Chirality,
    pub trace: PopulationTrace,
}

/// Per-enantiomer scalar diagnostics for the JSON summary.
#[derive(Serialize)]
pub struct EnantiomerSummary {
    pub enantiomer: &'static str,
    pub omega21_mag_rad_s: f64,
    pub omega21_phase_rad: f64,
    /// Two-photon effective coupling, present when the detuning pattern
    /// admits adiabatic elimination.
    pub omega_eff_mag_rad_s: Option<f64>,
    pub omega_eff_phase_rad: Option<f64>,
    /// Magnitude of the total two-level drive omega_eff + omega21.
    pub bright_mag_rad_s: Option<f64>,
    pub final_populations: Vec<f64>,
    pub peak_p2: f64,
    pub peak_p2_time_s: f64,
    pub min_p2: f64,
    pub min_p2_time_s: f64,
    /// Grid times of the strict interior maxima of the transferred
    /// population; successive entries are one Rabi period apart.
    pub p2_maxima_times_s: Vec<f64>,
    pub max_unit_residual: f64,
}

/// Echo of the protocol the configuration asked for, with the populations'
/// separation at the designed transfer time.
#[derive(Serialize)]
pub struct ProtocolEcho {
    pub mode: &'static str,
    pub ratio: f64,
    pub n_left: u32,
    pub n_right: u32,
    pub transfer_time_s: f64,
    /// |P2(right) - P2(left)| at the transfer time under the configured
    /// model, evaluated exactly at that time rather than on the grid.
    pub discrimination: f64,
}

/// Whole-run summary, serialized to `summary.json`.
#[derive(Serialize)]
pub struct RunSummary {
    pub version: &'static str,
    pub model: ModelKind,
    pub t_final_s: f64,
    pub grid_points: usize,
    pub tolerance: f64,
    pub protocol: Option<ProtocolEcho>,
    pub runs: Vec<EnantiomerSummary>,
}

/// Traces plus summary for one configuration.
pub struct SimulationRun {
    pub traces: Vec<EnantiomerRun>,
    pub summary: RunSummary,
}

fn enantiomer_name(chirality: Chirality) -> &'static str {
    match chirality {
        Chirality::Left => "left",
        Chirality::Right => "right",
    }
}

/// Propagates one enantiomer of the configured model over `times`.
fn build_trace(config: &Config, chirality: Chirality, times: &[f64]) -> Result<PopulationTrace> {
    let set = build_coupling_set(&config.fields, &config.dipoles, chirality)?;
    match config.simulation.model {
        ModelKind::Effective => {
            let eff = eliminate_resonant(&set, &config.detunings)?;
            let h = build_two_level(&eff, set.omega21)?;
            propagate_trace(&h, &QuantumState::basis_state(2, 0)?, times)
        }
        ModelKind::Full => {
            let h = build_interaction_hamiltonian(&set, &config.detunings)?;
            propagate_trace(&h, &QuantumState::basis_state(4, 0)?, times)
        }
        ModelKind::Lab => {
            let levels = LevelFrequencies::from_rotor(&config.rotor);
            let carriers = CarrierFrequencies::from_levels(&levels, &config.detunings)?;
            let options = AdaptiveOptions {
                tolerance: config.simulation.tolerance,
                ..AdaptiveOptions::default()
            };
            propagate_lab(
                &levels,
                &carriers,
                &set,
                &QuantumState::basis_state(4, 0)?,
                times,
                &options,
            )
        }
    }
}

fn run_one(
    config: &Config,
    chirality: Chirality,
    times: &[f64],
) -> Result<(PopulationTrace, EnantiomerSummary)> {
    let set = build_coupling_set(&config.fields, &config.dipoles, chirality)?;
    let effective = eliminate_resonant(&set, &config.detunings).ok();
    let trace = build_trace(config, chirality, times)?;

    let p2 = trace.column(1);
    let (peak_idx, peak_p2) = p2
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |best, (i, p)| if p > best.1 { (i, p) } else { best });
    let (min_idx, min_p2) = p2
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, p)| if p < best.1 { (i, p) } else { best });
    let maxima_times = (1..p2.len().saturating_sub(1))
        .filter(|&i| p2[i] > p2[i - 1] && p2[i] > p2[i + 1])
        .map(|i| trace.times()[i])
        .collect();
    let summary = EnantiomerSummary {
        enantiomer: enantiomer_name(chirality),
        omega21_mag_rad_s: set.omega21.norm(),
        omega21_phase_rad: set.omega21.arg(),
        omega_eff_mag_rad_s: effective.map(|e| e.omega_eff.norm()),
        omega_eff_phase_rad: effective.map(|e| e.omega_eff.arg()),
        bright_mag_rad_s: effective.map(|e| (e.omega_eff + set.omega21).norm()),
        final_populations: trace.rows().last().cloned().unwrap_or_default(),
        peak_p2,
        peak_p2_time_s: trace.times()[peak_idx],
        min_p2,
        min_p2_time_s: trace.times()[min_idx],
        p2_maxima_times_s: maxima_times,
        max_unit_residual: trace.max_unit_residual(),
    };
    Ok((trace, summary))
}

/// Solves the protocol a configuration asks for, using the
/// chirality-independent effective parameters.
pub fn solve_request(eff: &EffectiveParams, request: &ProtocolRequest) -> Result<ProtocolSolution> {
    match *request {
        ProtocolRequest::DarkLeft { n } => design_way_one(eff, Chirality::Left, n),
        ProtocolRequest::DarkRight { n } => design_way_one(eff, Chirality::Right, n),
        ProtocolRequest::SyncRight { n_left, n_right } => design_way_two(eff, n_left, n_right),
        ProtocolRequest::SyncLeft { n_left, n_right } => {
            design_way_two_mirrored(eff, n_left, n_right)
        }
        ProtocolRequest::Search {
            target_ratio,
            n_max,
        } => search_way_two(eff, target_ratio, n_max),
    }
}

/// P2 of one enantiomer at a single exact time under the configured model.
fn p2_at(config: &Config, chirality: Chirality, t: f64) -> Result<f64> {
    let trace = build_trace(config, chirality, &[0.0, t])?;
    Ok(trace.rows().last().expect("two-point grid")[1])
}

/// Designs the configured protocol and measures the left/right population
/// separation at its transfer time. `None` when no protocol is configured.
fn protocol_echo(config: &Config) -> Result<Option<ProtocolEcho>> {
    let Some(request) = &config.protocol else {
        return Ok(None);
    };
    let left = build_coupling_set(&config.fields, &config.dipoles, Chirality::Left)?;
    let eff = eliminate_resonant(&left, &config.detunings)?;
    let solution = solve_request(&eff, request)?;
    let t = solution.transfer_time;
    let discrimination = (p2_at(config, Chirality::Right, t)? - p2_at(config, Chirality::Left, t)?)
        .abs();
    Ok(Some(ProtocolEcho {
        mode: solution.mode.name(),
        ratio: solution.ratio,
        n_left: solution.n_left,
        n_right: solution.n_right,
        transfer_time_s: t,
        discrimination,
    }))
}

/// Runs the configured simulation for every selected enantiomer.
pub fn run(config: &Config) -> Result<SimulationRun> {
    let times = time_grid(config.simulation.t_final, config.simulation.grid_points)?;
    let mut traces = Vec::new();
    let mut runs = Vec::new();
    for chirality in config.simulation.enantiomer.chiralities() {
        let (trace, summary) = run_one(config, chirality, &times)?;
        traces.push(EnantiomerRun { chirality, trace });
        runs.push(summary);
    }
    Ok(SimulationRun {
        traces,
        summary: RunSummary {
            version: VERSION,
            model: config.simulation.model,
            t_final_s: config.simulation.t_final,
            grid_points: config.simulation.grid_points,
            tolerance: config.simulation.tolerance,
            protocol: protocol_echo(config)?,
            runs,
        },
    })
}

/// Writes `populations_<enantiomer>.csv` per trace plus `summary.json` into
/// `dir`. Returns the written paths.
pub fn write_outputs(run: &SimulationRun, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for er in &run.traces {
        let path = dir.join(format!("populations_{}.csv", enantiomer_name(er.chirality)));
        output::write_text(&path, &output::render_trace_csv(&er.trace))?;
        written.push(path);
    }
    let summary_path = dir.join("summary.json");
    output::write_text(&summary_path, &output::render_json(&run.summary)?)?;
    written.push(summary_path);
    Ok(written)
}
