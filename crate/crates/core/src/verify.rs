//! Self-verification: re-derives the identities the scheme rests on with
//! seeded random inputs and reports the worst observed defect per check.
//!
//! Every check is deterministic for a given seed. A report serializes to
//! JSON so the CLI can emit it directly.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::angular::wigner_3j_int;
use crate::drive::{
    build_coupling_set, coupling_general, working_levels, CouplingSet, DipoleModel, DriveTriple,
    StatePair,
};
use crate::dynamics::{
    elimination_ladder, generalized_rabi, propagate_lab, rabi_population, AdaptiveOptions,
    Propagator, QuantumState,
};
use crate::model::{
    adiabatic_eliminate, build_interaction_hamiltonian, build_lab_hamiltonian, build_two_level,
    CarrierFrequencies, Detunings, LevelFrequencies,
};
use crate::units::{two_pi_mhz, TWO_PI};
use crate::vibronic::{ChiParity, Chirality, DipoleAxis, VibrationalLabel};
use crate::Result;

/// Outcome of one verification check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst defect observed (or worst ratio, where `detail` says so).
    pub worst: f64,
    /// Bound the defect must respect.
    pub bound: f64,
    pub detail: String,
}

impl CheckResult {
    fn below(name: &'static str, worst: f64, bound: f64, detail: String) -> Self {
        CheckResult {
            name,
            passed: worst <= bound,
            worst,
            bound,
            detail,
        }
    }

    fn above(name: &'static str, worst: f64, bound: f64, detail: String) -> Self {
        CheckResult {
            name,
            passed: worst >= bound,
            worst,
            bound,
            detail,
        }
    }
}

/// Full verification report.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub version: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

const WORKING_LABELS: [VibrationalLabel; 3] = [
    VibrationalLabel {
        m_tilde: 0,
        n_tilde: 0,
        parity: ChiParity::Even,
        chirality: Chirality::Left,
    },
    VibrationalLabel {
        m_tilde: 1,
        n_tilde: 0,
        parity: ChiParity::Even,
        chirality: Chirality::Left,
    },
    VibrationalLabel {
        m_tilde: 1,
        n_tilde: 0,
        parity: ChiParity::Odd,
        chirality: Chirality::Left,
    },
];

fn random_dipoles(rng: &mut ChaCha8Rng) -> Result<DipoleModel> {
    let entries = [
        (StatePair::V2V1, DipoleAxis::Z, rng.gen_range(0.2..2.0)),
        (StatePair::V3V2, DipoleAxis::X, rng.gen_range(0.2..2.0)),
        (StatePair::V3V2, DipoleAxis::Y, rng.gen_range(0.2..2.0)),
        (StatePair::V3V1, DipoleAxis::X, rng.gen_range(0.2..2.0)),
        (StatePair::V3V1, DipoleAxis::Y, rng.gen_range(0.2..2.0)),
    ];
    DipoleModel::new(WORKING_LABELS, &entries)
}

fn random_fields(rng: &mut ChaCha8Rng) -> Result<DriveTriple> {
    let mut pair = || {
        (
            two_pi_mhz(rng.gen_range(0.2..2.0)),
            rng.gen_range(0.0..TWO_PI),
        )
    };
    let (a, b, c) = (pair(), pair(), pair());
    DriveTriple::from_amplitudes_phases(a, b, c)
}

/// 3j symbols of the (j, j, 0) family against their closed form
/// (-1)^(j - m) / sqrt(2 j + 1), for every j <= 4 and m.
fn check_wigner_reference() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for j in 0..=4i32 {
        for m in -j..=j {
            let value = wigner_3j_int(j, j, 0, m, -m, 0)?;
            let sign = if (j - m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let exact = sign / f64::from(2 * j + 1).sqrt();
            worst = worst.max((value - exact).abs());
            count += 1;
        }
    }
    Ok(CheckResult::below(
        "wigner_reference_values",
        worst,
        1e-14,
        format!("{count} symbols of the (j, j, 0) family vs closed form"),
    ))
}

/// Orthogonality: sum over m1, m2 of (2 j3 + 1) w(j3, m3) w(j3', m3')
/// equals the double Kronecker delta.
fn check_wigner_orthogonality() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for j1 in 0..=2i32 {
        for j2 in 0..=2i32 {
            for j3 in (j1 - j2).abs()..=(j1 + j2) {
                for j3p in (j1 - j2).abs()..=(j1 + j2) {
                    for m3 in -j3..=j3 {
                        for m3p in -j3p..=j3p {
                            let mut sum = 0.0;
                            for m1 in -j1..=j1 {
                                for m2 in -j2..=j2 {
                                    if m1 + m2 + m3 != 0 || m1 + m2 + m3p != 0 {
                                        continue;
                                    }
                                    sum += f64::from(2 * j3 + 1)
                                        * wigner_3j_int(j1, j2, j3, m1, m2, m3)?
                                        * wigner_3j_int(j1, j2, j3p, m1, m2, m3p)?;
                                }
                            }
                            let expected =
                                if j3 == j3p && m3 == m3p { 1.0 } else { 0.0 };
                            worst = worst.max((sum - expected).abs());
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(CheckResult::below(
        "wigner_orthogonality",
        worst,
        1e-12,
        format!("{count} orthogonality sums, j1, j2 <= 2"),
    ))
}

/// Selection rules: symbols with a violated m-sum or triangle condition are
/// exactly zero.
fn check_selection_rules() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for j1 in 0..=3i32 {
        for j2 in 0..=3i32 {
            for j3 in 0..=6i32 {
                for m1 in -j1..=j1 {
                    for m2 in -j2..=j2 {
                        for m3 in -j3..=j3 {
                            let triangle_ok =
                                j3 >= (j1 - j2).abs() && j3 <= j1 + j2;
                            let sum_ok = m1 + m2 + m3 == 0;
                            if triangle_ok && sum_ok {
                                continue;
                            }
                            worst = worst
                                .max(wigner_3j_int(j1, j2, j3, m1, m2, m3)?.abs());
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(CheckResult::below(
        "selection_rule_zeros",
        worst,
        0.0,
        format!("{count} forbidden symbols must vanish exactly"),
    ))
}

/// Mirroring the molecule flips only the 2 <-> 1 coupling sign: the four far
/// legs are bitwise unchanged and both closed-loop phases move by pi.
fn check_loop_sign(rng: &mut ChaCha8Rng, rounds: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for _ in 0..rounds {
        let dipoles = random_dipoles(rng)?;
        let fields = random_fields(rng)?;
        let left = build_coupling_set(&fields, &dipoles, Chirality::Left)?;
        let right = build_coupling_set(&fields, &dipoles, Chirality::Right)?;
        worst = worst.max((left.omega21 + right.omega21).norm());
        for (l, r) in left.legs().iter().zip(right.legs().iter()) {
            worst = worst.max((l - r).norm());
        }
        let pl = left.loop_phases()?;
        let pr = right.loop_phases()?;
        for (a, b) in pl.iter().zip(pr.iter()) {
            let d = (a - b).rem_euclid(TWO_PI);
            worst = worst.max((d - std::f64::consts::PI).abs());
        }
    }
    Ok(CheckResult::below(
        "loop_sign_flip",
        worst,
        1e-9,
        format!(
            "{rounds} random drive configurations; defect in rad or rad/s \
             against couplings of order 1e6 rad/s"
        ),
    ))
}

/// The closed-form coupling expressions agree with the general
/// angular-momentum sum on all five legs, for both enantiomers.
fn check_closed_vs_general(rng: &mut ChaCha8Rng, rounds: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for _ in 0..rounds {
        let dipoles = random_dipoles(rng)?;
        let fields = random_fields(rng)?;
        for chirality in [Chirality::Left, Chirality::Right] {
            let set = build_coupling_set(&fields, &dipoles, chirality)?;
            let levels = working_levels(&dipoles.labels_for(chirality));
            let scale = set
                .legs()
                .iter()
                .map(|c| c.norm())
                .fold(set.omega21.norm(), f64::max);
            let pairs = [
                (set.omega21, &fields.field_12, 1usize, 0usize),
                (set.omega3p1, &fields.field_13, 2, 0),
                (set.omega3m1, &fields.field_13, 3, 0),
                (set.omega3p2, &fields.field_23, 2, 1),
                (set.omega3m2, &fields.field_23, 3, 1),
            ];
            for (closed, field, upper, lower) in pairs {
                let general =
                    coupling_general(field, &levels[upper], &levels[lower], &dipoles)?;
                worst = worst.max((closed - general).norm() / scale);
            }
        }
    }
    Ok(CheckResult::below(
        "closed_vs_general_couplings",
        worst,
        1e-12,
        format!("{rounds} random configurations, relative to the largest leg"),
    ))
}

/// Every Hamiltonian builder returns an exactly Hermitian matrix.
fn check_hermiticity(rng: &mut ChaCha8Rng, rounds: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let levels = LevelFrequencies::new(0.0, two_pi_mhz(120.0), two_pi_mhz(240.0))?;
    for _ in 0..rounds {
        let dipoles = random_dipoles(rng)?;
        let fields = random_fields(rng)?;
        let set = build_coupling_set(&fields, &dipoles, Chirality::Left)?;
        let delta = two_pi_mhz(rng.gen_range(5.0..40.0));
        let detunings = Detunings::two_photon(delta)?;
        let carriers = CarrierFrequencies::from_levels(&levels, &detunings)?;
        let eff = adiabatic_eliminate(&set, delta)?;
        let t = rng.gen_range(0.0..1e-6);
        let hams = [
            build_interaction_hamiltonian(&set, &detunings)?,
            build_two_level(&eff, set.omega21)?,
            build_lab_hamiltonian(&levels, &carriers, &set, t)?,
        ];
        for h in &hams {
            let m = h.matrix();
            let scale = m.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm() / scale);
                }
            }
        }
    }
    Ok(CheckResult::below(
        "hamiltonian_hermiticity",
        worst,
        1e-15,
        format!("{rounds} random interaction, two-level, and lab matrices"),
    ))
}

/// Spectral two-level propagation against the analytic flopping formula.
fn check_rabi_vs_spectral(rng: &mut ChaCha8Rng, rounds: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for _ in 0..rounds {
        let dipoles = random_dipoles(rng)?;
        let fields = random_fields(rng)?;
        let chirality = if rng.gen_bool(0.5) {
            Chirality::Left
        } else {
            Chirality::Right
        };
        let set = build_coupling_set(&fields, &dipoles, chirality)?;
        let delta = two_pi_mhz(rng.gen_range(5.0..40.0));
        let eff = adiabatic_eliminate(&set, delta)?;
        let omega = eff.omega_eff + set.omega21;
        let rabi = generalized_rabi(omega, eff.lambda_imbalance());
        if rabi == 0.0 {
            continue;
        }
        let h = build_two_level(&eff, set.omega21)?;
        let prop = Propagator::new(&h)?;
        let psi0 = QuantumState::basis_state(2, 0)?;
        for _ in 0..4 {
            let t = rng.gen_range(0.0..2.0) * std::f64::consts::PI / rabi;
            let analytic = rabi_population(omega, eff.lambda_imbalance(), t);
            let numeric = prop.evolve(&psi0, t)?.populations()[1];
            worst = worst.max((numeric - analytic).abs());
        }
    }
    Ok(CheckResult::below(
        "rabi_vs_spectral",
        worst,
        1e-10,
        format!("{rounds} random effective models, 4 times each"),
    ))
}

/// Norm conservation and time-reversal of the propagators. Spectral evolution
/// must return to the start after evolving forward then backward; the
/// adaptive lab-frame integrator must conserve the norm it is not told about.
fn check_unitarity(rng: &mut ChaCha8Rng, rounds: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let levels = LevelFrequencies::new(0.0, two_pi_mhz(120.0), two_pi_mhz(240.0))?;
    for _ in 0..rounds {
        let dipoles = random_dipoles(rng)?;
        let fields = random_fields(rng)?;
        let set = build_coupling_set(&fields, &dipoles, Chirality::Left)?;
        let detunings = Detunings::two_photon(two_pi_mhz(rng.gen_range(5.0..40.0)))?;
        let h = build_interaction_hamiltonian(&set, &detunings)?;
        let prop = Propagator::new(&h)?;
        let psi0 = QuantumState::basis_state(4, rng.gen_range(0..4))?;
        let t = rng.gen_range(0.1e-6..3e-6);
        let forward = prop.evolve(&psi0, t)?;
        worst = worst.max((forward.norm() - 1.0).abs());
        let back = prop.evolve(&forward, -t)?;
        worst = worst.max(1.0 - back.fidelity(&psi0));
    }
    // One adaptive lab-frame propagation; the integrator does not project
    // onto the unit sphere, so norm drift measures its global error.
    let dipoles = random_dipoles(rng)?;
    let fields = random_fields(rng)?;
    let set = build_coupling_set(&fields, &dipoles, Chirality::Left)?;
    let detunings = Detunings::two_photon(two_pi_mhz(20.0))?;
    let carriers = CarrierFrequencies::from_levels(&levels, &detunings)?;
    let psi0 = QuantumState::basis_state(4, 0)?;
    let times = [0.0, 0.1e-6, 0.2e-6];
    // Global integration error accumulates roughly as steps x local
    // tolerance; resolving the optical carrier takes thousands of steps, so
    // meeting the 1e-9 norm bound needs a 1e-12 local tolerance.
    let options = AdaptiveOptions {
        tolerance: 1e-12,
        ..AdaptiveOptions::default()
    };
    let trace = propagate_lab(&levels, &carriers, &set, &psi0, &times, &options)?;
    worst = worst.max(trace.max_unit_residual());
    Ok(CheckResult::below(
        "unitarity_and_reversibility",
        worst,
        1e-9,
        format!(
            "{rounds} spectral round trips plus one adaptive lab-frame run"
        ),
    ))
}

/// The full-vs-eliminated deviation must fall monotonically and by at least
/// 3.5x per doubling of the far-leg detuning measured across the whole
/// ladder, confirming the second-order scaling. The per-pair ratio is not
/// bounded by 3.5 itself: at the smallest detuning the couplings are a fifth
/// of it, outside the large-detuning regime, and the bounded population
/// metric saturates there (the pairwise ratios are reported for inspection).
fn check_elimination_ladder() -> Result<CheckResult> {
    let set = CouplingSet {
        chirality: Chirality::Left,
        omega21: Complex64::new(-two_pi_mhz(0.1), 0.0),
        omega3p1: Complex64::new(two_pi_mhz(1.0), 0.0),
        omega3m1: Complex64::new(two_pi_mhz(1.0), 0.0),
        omega3p2: Complex64::new(-two_pi_mhz(1.0), 0.0),
        omega3m2: Complex64::new(-two_pi_mhz(1.0), 0.0),
    };
    let deltas: Vec<f64> = [5.0, 10.0, 20.0, 40.0].iter().map(|&d| two_pi_mhz(d)).collect();
    let rungs = elimination_ladder(&set, &deltas, 2000)?;
    let pair_ratios: Vec<f64> = rungs
        .windows(2)
        .map(|p| p[0].deviation / p[1].deviation)
        .collect();
    let doublings = (rungs.len() - 1) as f64;
    let mean_factor =
        (rungs[0].deviation / rungs[rungs.len() - 1].deviation).powf(1.0 / doublings);
    let monotone = pair_ratios.iter().all(|&r| r > 1.0);
    let detail = format!(
        "per-doubling factor across the ladder (monotone: {monotone}); rungs {}; pair ratios {}",
        rungs
            .iter()
            .map(|r| format!("{:.3e}", r.deviation))
            .collect::<Vec<_>>()
            .join(", "),
        pair_ratios
            .iter()
            .map(|r| format!("{r:.3}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    Ok(CheckResult::above(
        "elimination_ladder",
        if monotone { mean_factor } else { 0.0 },
        3.5,
        detail,
    ))
}

/// Loop phases of one concrete configuration: the two closed loops must
/// differ by pi between the enantiomers. Reported as trivially passing when
/// a coupling vanishes, since the loop phase is undefined there.
fn check_config_loops(config: &crate::config::Config) -> Result<CheckResult> {
    let left = build_coupling_set(&config.fields, &config.dipoles, Chirality::Left)?;
    let right = build_coupling_set(&config.fields, &config.dipoles, Chirality::Right)?;
    let degenerate = left
        .legs()
        .iter()
        .any(|c| c.norm() == 0.0)
        || left.omega21.norm() == 0.0;
    if degenerate {
        return Ok(CheckResult::below(
            "config_loop_phase",
            0.0,
            1e-12,
            "a coupling of this configuration vanishes; loop phases undefined".into(),
        ));
    }
    let mut worst = 0.0f64;
    for (a, b) in left.loop_phases()?.iter().zip(right.loop_phases()?.iter()) {
        let d = (a - b).rem_euclid(TWO_PI);
        worst = worst.max((d - std::f64::consts::PI).abs());
    }
    Ok(CheckResult::below(
        "config_loop_phase",
        worst,
        1e-12,
        "left vs right loop phases of the supplied configuration".into(),
    ))
}

/// Runs every check with randomness derived from `seed`; when a
/// configuration is supplied, its own loop phases are checked as well.
pub fn run_verification_with(
    seed: u64,
    config: Option<&crate::config::Config>,
) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        check_wigner_reference()?,
        check_wigner_orthogonality()?,
        check_selection_rules()?,
        check_loop_sign(&mut rng, 40)?,
        check_closed_vs_general(&mut rng, 40)?,
        check_hermiticity(&mut rng, 25)?,
        check_rabi_vs_spectral(&mut rng, 40)?,
        check_unitarity(&mut rng, 25)?,
        check_elimination_ladder()?,
    ];
    if let Some(config) = config {
        checks.push(check_config_loops(config)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        version: crate::sim::VERSION,
        seed,
        passed,
        checks,
    })
}

/// Runs the generic check suite without a configuration.
pub fn run_verification(seed: u64) -> Result<VerifyReport> {
    run_verification_with(seed, None)
}
