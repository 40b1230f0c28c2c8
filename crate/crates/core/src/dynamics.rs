//! Time evolution: spectral propagation of constant Hamiltonians, adaptive
//! integration of the oscillating lab-frame Hamiltonian, analytic two-level
//! solutions, and the detuning ladder quantifying the adiabatic elimination.
//!
//! Units: angular frequencies in rad/s, times in seconds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::drive::CouplingSet;
use crate::model::{
    adiabatic_eliminate, build_interaction_hamiltonian, build_lab_hamiltonian, build_two_level,
    CarrierFrequencies, Detunings, HamiltonianMatrix, LevelFrequencies,
};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A normalized state vector over a labeled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<Complex64>,
}

impl QuantumState {
    /// Basis state |index> of a `dim`-state system.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for {dim} states"
            )));
        }
        let mut amplitudes = DVector::<Complex64>::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { amplitudes })
    }

    /// Wraps amplitudes after checking normalization (1e-9 on the norm).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("state must have at least one amplitude".into()));
        }
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "state norm is {norm}, expected 1 within 1e-9"
            )));
        }
        Ok(QuantumState { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Overlap fidelity |<self|other>|^2.
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// Spectral propagator of a constant Hermitian Hamiltonian: one
/// eigendecomposition, then evolution to any time is a phase rotation in the
/// eigenbasis. Exact up to the decomposition's rounding.
pub struct Propagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(h: &HamiltonianMatrix) -> Result<Self> {
        let m = h.matrix();
        let eig = m.clone().symmetric_eigen();
        // Defensive reconstruction check; eigensolver failures would
        // otherwise surface as silently wrong dynamics.
        let lambda = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(x, 0.0)));
        let rebuilt = &eig.eigenvectors * lambda * eig.eigenvectors.adjoint();
        let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-300);
        let defect = (m - &rebuilt).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if defect > 1e-10 * scale {
            return Err(Error::Numerical(format!(
                "eigendecomposition failed to reconstruct the Hamiltonian \
                 (relative defect {:e})",
                defect / scale
            )));
        }
        Ok(Propagator {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// psi(t) = V exp(-i L t) V^dag psi(0).
    pub fn evolve(&self, initial: &QuantumState, t: f64) -> Result<QuantumState> {
        if initial.dim() != self.dim() {
            return Err(Error::InvalidState(format!(
                "state has {} amplitudes, propagator expects {}",
                initial.dim(),
                self.dim()
            )));
        }
        let mut coeffs = self.eigenvectors.adjoint() * initial.amplitudes();
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, -self.eigenvalues[k] * t);
        }
        Ok(QuantumState {
            amplitudes: &self.eigenvectors * coeffs,
        })
    }
}

/// Populations of every basis state on a time grid. Values are clamped to
/// [0, 1]; the worst unit-sum residual observed before clamping is kept so
/// callers can audit norm conservation.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationTrace {
    times: Vec<f64>,
    labels: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    max_unit_residual: f64,
}

impl PopulationTrace {
    fn collect(times: &[f64], labels: &[&'static str], states: Vec<QuantumState>) -> Self {
        let mut rows = Vec::with_capacity(states.len());
        let mut residual = 0.0f64;
        for state in &states {
            let pops = state.populations();
            residual = residual.max((pops.iter().sum::<f64>() - 1.0).abs());
            rows.push(pops.into_iter().map(|p| p.clamp(0.0, 1.0)).collect());
        }
        PopulationTrace {
            times: times.to_vec(),
            labels: labels.to_vec(),
            rows,
            max_unit_residual: residual,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Populations of one state over the whole grid.
    pub fn column(&self, state: usize) -> Vec<f64> {
        self.rows.iter().map(|row| row[state]).collect()
    }

    pub fn max_unit_residual(&self) -> f64 {
        self.max_unit_residual
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidState("time grid is empty".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidState("time grid contains non-finite entries".into()));
    }
    for pair in times.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::InvalidState("time grid must be non-decreasing".into()));
        }
    }
    Ok(())
}

/// Uniform grid of `points >= 2` samples covering [0, t_final].
pub fn time_grid(t_final: f64, points: usize) -> Result<Vec<f64>> {
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::InvalidState(format!(
            "final time must be positive and finite, got {t_final}"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidState("grid needs at least 2 points".into()));
    }
    let n = points - 1;
    Ok((0..=n).map(|i| t_final * (i as f64) / (n as f64)).collect())
}

/// Spectral propagation of a constant Hamiltonian over a time grid,
/// sequential in the grid points.
pub fn propagate_trace_seq(
    h: &HamiltonianMatrix,
    initial: &QuantumState,
    times: &[f64],
) -> Result<PopulationTrace> {
    validate_times(times)?;
    let prop = Propagator::new(h)?;
    let states = times
        .iter()
        .map(|&t| prop.evolve(initial, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationTrace::collect(times, h.labels(), states))
}

/// Spectral propagation with the grid points evaluated in parallel. Each
/// point is an independent phase rotation in the shared eigenbasis, so the
/// arithmetic per point is identical to the sequential path.
#[cfg(feature = "parallel")]
pub fn propagate_trace_par(
    h: &HamiltonianMatrix,
    initial: &QuantumState,
    times: &[f64],
) -> Result<PopulationTrace> {
    validate_times(times)?;
    let prop = Propagator::new(h)?;
    let states = times
        .par_iter()
        .map(|&t| prop.evolve(initial, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationTrace::collect(times, h.labels(), states))
}

/// Spectral propagation using the parallel path when the `parallel` feature
/// is enabled, the sequential path otherwise.
pub fn propagate_trace(
    h: &HamiltonianMatrix,
    initial: &QuantumState,
    times: &[f64],
) -> Result<PopulationTrace> {
    #[cfg(feature = "parallel")]
    {
        propagate_trace_par(h, initial, times)
    }
    #[cfg(not(feature = "parallel"))]
    {
        propagate_trace_seq(h, initial, times)
    }
}

/// Options of the adaptive Dormand-Prince 5(4) integrator.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    /// Shared absolute and relative tolerance on the local error.
    pub tolerance: f64,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            tolerance: 1e-10,
            max_steps: 20_000_000,
        }
    }
}

/// One Dormand-Prince 5(4) step from (t, y) with the first stage `k1`
/// already evaluated. Returns the 5th-order solution, the scaled error
/// estimate, and the last stage (which is the first stage of the next step).
fn dp54_step<F>(
    f: &F,
    t: f64,
    y: &DVector<Complex64>,
    k1: &DVector<Complex64>,
    h: f64,
    tolerance: f64,
) -> (DVector<Complex64>, f64, DVector<Complex64>)
where
    F: Fn(f64, &DVector<Complex64>) -> DVector<Complex64>,
{
    let hc = Complex64::new(h, 0.0);
    let k2 = f(t + h / 5.0, &(y + &(k1 * (hc * 0.2))));
    let k3 = f(
        t + 3.0 * h / 10.0,
        &(y + &(k1 * (hc * (3.0 / 40.0))) + &(&k2 * (hc * (9.0 / 40.0)))),
    );
    let k4 = f(
        t + 4.0 * h / 5.0,
        &(y + &(k1 * (hc * (44.0 / 45.0))) - &(&k2 * (hc * (56.0 / 15.0)))
            + &(&k3 * (hc * (32.0 / 9.0)))),
    );
    let k5 = f(
        t + 8.0 * h / 9.0,
        &(y + &(k1 * (hc * (19372.0 / 6561.0))) - &(&k2 * (hc * (25360.0 / 2187.0)))
            + &(&k3 * (hc * (64448.0 / 6561.0)))
            - &(&k4 * (hc * (212.0 / 729.0)))),
    );
    let k6 = f(
        t + h,
        &(y + &(k1 * (hc * (9017.0 / 3168.0))) - &(&k2 * (hc * (355.0 / 33.0)))
            + &(&k3 * (hc * (46732.0 / 5247.0)))
            + &(&k4 * (hc * (49.0 / 176.0)))
            - &(&k5 * (hc * (5103.0 / 18656.0)))),
    );
    let y5 = y
        + &(k1 * (hc * (35.0 / 384.0)))
        + &(&k3 * (hc * (500.0 / 1113.0)))
        + &(&k4 * (hc * (125.0 / 192.0)))
        - &(&k5 * (hc * (2187.0 / 6784.0)))
        + &(&k6 * (hc * (11.0 / 84.0)));
    let k7 = f(t + h, &y5);

    // Difference of the 5th- and embedded 4th-order weights.
    let e1 = 35.0 / 384.0 - 5179.0 / 57600.0;
    let e3 = 500.0 / 1113.0 - 7571.0 / 16695.0;
    let e4 = 125.0 / 192.0 - 393.0 / 640.0;
    let e5 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
    let e6 = 11.0 / 84.0 - 187.0 / 2100.0;
    let e7 = -1.0 / 40.0;
    let err_vec = k1 * (hc * e1)
        + &k3 * (hc * e3)
        + &k4 * (hc * e4)
        + &k5 * (hc * e5)
        + &k6 * (hc * e6)
        + &k7 * (hc * e7);

    let n = y.len() as f64;
    let mut acc = 0.0f64;
    for i in 0..y.len() {
        let scale = tolerance + tolerance * y[i].norm().max(y5[i].norm());
        let ratio = err_vec[i].norm() / scale;
        acc += ratio * ratio;
    }
    let err = (acc / n).sqrt();
    (y5, err, k7)
}

/// Integrates y' = f(t, y) from `times[0]`, recording the solution at every
/// grid time by landing steps exactly on it. The grid must be non-decreasing.
pub fn integrate_adaptive<F, R>(
    f: F,
    y0: DVector<Complex64>,
    times: &[f64],
    options: &AdaptiveOptions,
    mut record: R,
) -> Result<()>
where
    F: Fn(f64, &DVector<Complex64>) -> DVector<Complex64>,
    R: FnMut(f64, &DVector<Complex64>),
{
    validate_times(times)?;
    if !options.tolerance.is_finite() || options.tolerance <= 0.0 {
        return Err(Error::InvalidState(format!(
            "integration tolerance must be positive, got {}",
            options.tolerance
        )));
    }
    let span = times[times.len() - 1] - times[0];
    let mut t = times[0];
    let mut y = y0;
    let mut k1 = f(t, &y);
    record(t, &y);
    if span == 0.0 {
        for &target in &times[1..] {
            record(target, &y);
        }
        return Ok(());
    }

    // Initial step from the magnitude of the right-hand side.
    let d0 = y.norm().max(1e-12);
    let d1 = k1.norm();
    let mut h = if d1 > 0.0 {
        (0.01 * d0 / d1).min(span / 10.0)
    } else {
        span / 100.0
    };
    let h_floor = span * 1e-15;
    let mut steps = 0usize;

    for &target in &times[1..] {
        while t < target {
            if steps >= options.max_steps {
                return Err(Error::Numerical(format!(
                    "integration exceeded {} steps at t = {t:e} s",
                    options.max_steps
                )));
            }
            steps += 1;
            let h_try = h.min(target - t);
            let (y_new, err, k_last) = dp54_step(&f, t, &y, &k1, h_try, options.tolerance);
            if !err.is_finite() || y_new.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                h = h_try * 0.1;
                if h < h_floor {
                    return Err(Error::StepUnderflow {
                        t,
                        step: h,
                        context: "right-hand side produced non-finite values".into(),
                    });
                }
                continue;
            }
            if err <= 1.0 {
                t += h_try;
                y = y_new;
                k1 = k_last;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h_try * grow).max(h_floor);
            } else {
                h = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < h_floor {
                    return Err(Error::StepUnderflow {
                        t,
                        step: h,
                        context: "local error cannot be met by any representable step".into(),
                    });
                }
            }
        }
        record(target, &y);
    }
    Ok(())
}

/// Integrates the oscillating lab-frame Hamiltonian over a time grid.
///
/// The co-rotating construction of the lab Hamiltonian means the resulting
/// populations must match spectral propagation of the constant
/// rotating-frame Hamiltonian to integrator accuracy; this is the standard
/// cross-check between the two pictures.
pub fn propagate_lab(
    levels: &LevelFrequencies,
    carriers: &CarrierFrequencies,
    couplings: &CouplingSet,
    initial: &QuantumState,
    times: &[f64],
    options: &AdaptiveOptions,
) -> Result<PopulationTrace> {
    if initial.dim() != 4 {
        return Err(Error::InvalidState(format!(
            "lab-frame propagation needs a 4-state vector, got {}",
            initial.dim()
        )));
    }
    // Hermiticity is checked once here; the stepper then rebuilds the matrix
    // elements directly.
    let h0 = build_lab_hamiltonian(levels, carriers, couplings, times.first().copied().unwrap_or(0.0))?;
    let labels = h0.labels().to_vec();
    let rhs = move |t: f64, y: &DVector<Complex64>| -> DVector<Complex64> {
        let h = build_lab_hamiltonian(levels, carriers, couplings, t)
            .expect("lab Hamiltonian stays Hermitian for all t");
        let mut dy = h.matrix() * y;
        for z in dy.iter_mut() {
            *z *= Complex64::new(0.0, -1.0);
        }
        dy
    };
    let mut states = Vec::with_capacity(times.len());
    integrate_adaptive(
        rhs,
        initial.amplitudes().clone(),
        times,
        options,
        |_t, y| {
            states.push(QuantumState { amplitudes: y.clone() });
        },
    )?;
    Ok(PopulationTrace::collect(times, &labels, states))
}

/// Generalized two-level flopping rate sqrt(|omega|^2 + imbalance^2 / 4)
/// for H = diag(l1, l2) + omega |2><1| + h.c., imbalance = l1 - l2.
pub fn generalized_rabi(omega: Complex64, lambda_imbalance: f64) -> f64 {
    (omega.norm_sqr() + 0.25 * lambda_imbalance * lambda_imbalance).sqrt()
}

/// Analytic excited-state population of the two-level problem starting in
/// |1>: P2(t) = (|omega| / rabi)^2 sin^2(rabi t).
pub fn rabi_population(omega: Complex64, lambda_imbalance: f64, t: f64) -> f64 {
    let rabi = generalized_rabi(omega, lambda_imbalance);
    if rabi == 0.0 {
        return 0.0;
    }
    let amplitude = omega.norm_sqr() / (rabi * rabi);
    amplitude * (rabi * t).sin().powi(2)
}

/// Time of the first population maximum, pi / (2 rabi).
pub fn rabi_transfer_time(omega: Complex64, lambda_imbalance: f64) -> Result<f64> {
    let rabi = generalized_rabi(omega, lambda_imbalance);
    if rabi == 0.0 {
        return Err(Error::Numerical(
            "two-level problem is static; no transfer time exists".into(),
        ));
    }
    Ok(std::f64::consts::FRAC_PI_2 / rabi)
}

/// Full oscillation period pi / rabi of the populations.
pub fn rabi_period(omega: Complex64, lambda_imbalance: f64) -> Result<f64> {
    rabi_transfer_time(omega, lambda_imbalance).map(|t| 2.0 * t)
}

/// Vertex abscissa of the parabola through three points; falls back to the
/// middle point when they are collinear.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d21 = x[1] - x[0];
    let d23 = x[1] - x[2];
    let num = d21 * d21 * (y[1] - y[2]) - d23 * d23 * (y[1] - y[0]);
    let den = d21 * (y[1] - y[2]) - d23 * (y[1] - y[0]);
    if den == 0.0 {
        x[1]
    } else {
        x[1] - 0.5 * num / den
    }
}

/// Estimates the oscillation period of a population curve that starts at a
/// minimum at `times[0]` (e.g. P2 with the system prepared in |1>): the
/// refined position of the first interior minimum following the first
/// maximum. Returns None for curves with no resolved oscillation.
pub fn estimate_period(times: &[f64], values: &[f64]) -> Option<f64> {
    if times.len() != values.len() || times.len() < 5 {
        return None;
    }
    let peak = values.iter().cloned().fold(0.0f64, f64::max);
    if peak <= 1e-12 {
        return None;
    }
    let mut i_max = None;
    for i in 1..values.len() - 1 {
        if values[i] >= values[i - 1] && values[i] >= values[i + 1] && values[i] > 0.25 * peak {
            i_max = Some(i);
            break;
        }
    }
    let start = i_max?;
    for i in start + 1..values.len() - 1 {
        if values[i] <= values[i - 1] && values[i] <= values[i + 1] {
            let t_min = parabola_vertex(
                [times[i - 1], times[i], times[i + 1]],
                [values[i - 1], values[i], values[i + 1]],
            );
            return Some(t_min - times[0]);
        }
    }
    None
}

/// One rung of the detuning ladder: the far-leg detuning and the worst
/// transferred-population deviation between the full four-level evolution
/// and the two-level evolution after adiabatic elimination.
#[derive(Clone, Copy, Debug)]
pub struct LadderRung {
    pub delta: f64,
    pub deviation: f64,
}

/// Deviation between full and eliminated dynamics for one detuning, sampled
/// over two flopping periods of the brighter enantiomer.
fn ladder_rung(set: &CouplingSet, delta: f64, samples: usize) -> Result<LadderRung> {
    let eff = adiabatic_eliminate(set, delta)?;
    // The brighter of the two mirror forms sets the population clock.
    let omega_plus = eff.omega_eff + set.omega21;
    let omega_minus = eff.omega_eff - set.omega21;
    let (set_used, omega) = if omega_minus.norm() > omega_plus.norm() {
        (set.mirrored(), omega_minus)
    } else {
        (*set, omega_plus)
    };
    let rabi = generalized_rabi(omega, eff.lambda_imbalance());
    if rabi == 0.0 {
        return Err(Error::Numerical(
            "both enantiomers are dark; the ladder deviation is undefined".into(),
        ));
    }
    let window = 2.0 * std::f64::consts::PI / rabi;
    // Sample densely enough to see the fast wiggles at the detuning scale.
    let wiggles = (3.0 * window * delta.abs() / (2.0 * std::f64::consts::PI)).ceil() as usize;
    let n = samples.max(wiggles).max(64);
    let times = time_grid(window, n)?;

    let detunings = Detunings::two_photon(delta)?;
    let h_full = build_interaction_hamiltonian(&set_used, &detunings)?;
    let h_eff = build_two_level(&eff, set_used.omega21)?;
    let psi4 = QuantumState::basis_state(4, 0)?;
    let psi2 = QuantumState::basis_state(2, 0)?;
    let full = propagate_trace_seq(&h_full, &psi4, &times)?;
    let eff_trace = propagate_trace_seq(&h_eff, &psi2, &times)?;

    let mut deviation = 0.0f64;
    for i in 0..times.len() {
        deviation = deviation.max((full.rows()[i][1] - eff_trace.rows()[i][1]).abs());
    }
    Ok(LadderRung { delta, deviation })
}

/// Sequential ladder over a set of detunings.
pub fn elimination_ladder_seq(
    set: &CouplingSet,
    deltas: &[f64],
    samples: usize,
) -> Result<Vec<LadderRung>> {
    deltas
        .iter()
        .map(|&delta| ladder_rung(set, delta, samples))
        .collect()
}

/// Ladder with the rungs evaluated in parallel.
#[cfg(feature = "parallel")]
pub fn elimination_ladder_par(
    set: &CouplingSet,
    deltas: &[f64],
    samples: usize,
) -> Result<Vec<LadderRung>> {
    deltas
        .par_iter()
        .map(|&delta| ladder_rung(set, delta, samples))
        .collect()
}

/// Ladder using the parallel path when the `parallel` feature is enabled.
pub fn elimination_ladder(
    set: &CouplingSet,
    deltas: &[f64],
    samples: usize,
) -> Result<Vec<LadderRung>> {
    #[cfg(feature = "parallel")]
    {
        elimination_ladder_par(set, deltas, samples)
    }
    #[cfg(not(feature = "parallel"))]
    {
        elimination_ladder_seq(set, deltas, samples)
    }
}
