//! Hamiltonians of the driven four-level working set and the adiabatic
//! reduction to a chirality-resolved two-level problem.
//!
//! Basis order everywhere: |1>, |2>, |3+>, |3->. All frequencies are angular
//! (rad/s). The lab-frame Hamiltonian keeps only co-rotating terms, so the
//! diagonal frame change to the interaction picture is exact; integration in
//! either frame must produce identical populations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::drive::CouplingSet;
use crate::rotor::{rotational_energy, RotationalKet, RotorConstants};
use crate::{Error, Result};

/// Relative hermiticity tolerance applied when a Hamiltonian is assembled.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Lab-frame frequencies of the three working levels (|3+> and |3-> are
/// degenerate). Gauge: frequencies are measured from |1>, so `omega1 = 0`
/// when built from rotor constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelFrequencies {
    omega1: f64,
    omega2: f64,
    omega3: f64,
}

impl LevelFrequencies {
    pub fn new(omega1: f64, omega2: f64, omega3: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega2.is_finite() && omega3.is_finite()) {
            return Err(Error::Frequencies("level frequencies must be finite".into()));
        }
        if !(omega1 < omega2 && omega2 < omega3) {
            return Err(Error::Frequencies(format!(
                "working levels must be ordered omega1 < omega2 < omega3, got {omega1}, {omega2}, {omega3}"
            )));
        }
        Ok(LevelFrequencies {
            omega1,
            omega2,
            omega3,
        })
    }

    /// Rotational energies of the working kets |0,0,0>, |1,0,-1>, |1,+-1,0>
    /// measured from the ground ket. Prolate ordering guarantees
    /// omega3 > omega2 > 0.
    pub fn from_rotor(constants: &RotorConstants) -> Self {
        let ground = rotational_energy(constants, &RotationalKet::new(0, 0, 0).unwrap());
        let middle = rotational_energy(constants, &RotationalKet::new(1, 0, -1).unwrap());
        let top = rotational_energy(constants, &RotationalKet::new(1, 1, 0).unwrap());
        LevelFrequencies {
            omega1: 0.0,
            omega2: middle - ground,
            omega3: top - ground,
        }
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn omega3(&self) -> f64 {
        self.omega3
    }
}

/// Detunings of the three drives from their transitions. The loop condition
/// delta12 + delta23 = delta13 is enforced on construction: it is exactly the
/// condition under which a diagonal frame change removes all time dependence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detunings {
    delta12: f64,
    delta23: f64,
    delta13: f64,
}

impl Detunings {
    pub fn new(delta12: f64, delta23: f64, delta13: f64) -> Result<Self> {
        if !(delta12.is_finite() && delta23.is_finite() && delta13.is_finite()) {
            return Err(Error::Frequencies("detunings must be finite".into()));
        }
        let scale = delta12.abs().max(delta23.abs()).max(delta13.abs()).max(1.0);
        let defect = (delta12 + delta23 - delta13).abs();
        if defect > 1e-9 * scale {
            return Err(Error::Frequencies(format!(
                "detunings do not close the three-photon loop: \
                 delta12 + delta23 - delta13 = {defect:e} rad/s"
            )));
        }
        Ok(Detunings {
            delta12,
            delta23,
            delta13,
        })
    }

    /// Resonant 1 <-> 2 drive, common detuning `delta` on both far legs.
    pub fn two_photon(delta: f64) -> Result<Self> {
        Detunings::new(0.0, delta, delta)
    }

    /// The common far-leg detuning, provided the pattern is the two-photon
    /// one (delta12 = 0, delta23 = delta13 != 0).
    pub fn shared(&self) -> Result<f64> {
        let scale = self.delta13.abs().max(1.0);
        if self.delta12.abs() > 1e-12 * scale {
            return Err(Error::Elimination(format!(
                "adiabatic elimination requires a resonant 1 <-> 2 drive; delta12 = {:e} rad/s",
                self.delta12
            )));
        }
        if (self.delta23 - self.delta13).abs() > 1e-12 * scale {
            return Err(Error::Elimination(
                "adiabatic elimination requires equal detunings on both far legs".into(),
            ));
        }
        if self.delta13 == 0.0 {
            return Err(Error::Elimination(
                "far-leg detuning must be nonzero to eliminate the upper pair".into(),
            ));
        }
        Ok(self.delta13)
    }

    pub fn delta12(&self) -> f64 {
        self.delta12
    }

    pub fn delta23(&self) -> f64 {
        self.delta23
    }

    pub fn delta13(&self) -> f64 {
        self.delta13
    }
}

/// Carrier (angular) frequencies of the three drives, fixed by the level
/// splittings and the detunings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarrierFrequencies {
    omega_l12: f64,
    omega_l23: f64,
    omega_l13: f64,
}

impl CarrierFrequencies {
    pub fn from_levels(levels: &LevelFrequencies, detunings: &Detunings) -> Result<Self> {
        let omega_l12 = (levels.omega2 - levels.omega1) - detunings.delta12;
        let omega_l23 = (levels.omega3 - levels.omega2) - detunings.delta23;
        let omega_l13 = (levels.omega3 - levels.omega1) - detunings.delta13;
        for (name, value) in [
            ("E12", omega_l12),
            ("E23", omega_l23),
            ("E13", omega_l13),
        ] {
            if value <= 0.0 {
                return Err(Error::Frequencies(format!(
                    "carrier frequency of {name} is not positive ({value:e} rad/s); \
                     detuning exceeds the level splitting"
                )));
            }
        }
        Ok(CarrierFrequencies {
            omega_l12,
            omega_l23,
            omega_l13,
        })
    }

    pub fn omega_l12(&self) -> f64 {
        self.omega_l12
    }

    pub fn omega_l23(&self) -> f64 {
        self.omega_l23
    }

    pub fn omega_l13(&self) -> f64 {
        self.omega_l13
    }
}

/// A Hermitian Hamiltonian matrix together with its basis labels.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix {
    matrix: DMatrix<Complex64>,
    labels: Vec<&'static str>,
}

impl HamiltonianMatrix {
    /// Wraps a matrix after checking shape and hermiticity. The hermiticity
    /// defect is measured relative to the largest element magnitude.
    pub fn new(matrix: DMatrix<Complex64>, labels: Vec<&'static str>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Numerical(format!(
                "Hamiltonian must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if labels.len() != matrix.nrows() {
            return Err(Error::Numerical(format!(
                "{} labels for a {}-state Hamiltonian",
                labels.len(),
                matrix.nrows()
            )));
        }
        let scale = matrix
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut asymmetry = 0.0f64;
        for r in 0..matrix.nrows() {
            for c in 0..=r {
                let defect = (matrix[(r, c)] - matrix[(c, r)].conj()).norm();
                asymmetry = asymmetry.max(defect);
            }
        }
        if asymmetry > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian {
                asymmetry: asymmetry / scale,
                tolerance: HERMITICITY_TOL,
            });
        }
        Ok(HamiltonianMatrix { matrix, labels })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

const FOUR_LABELS: [&str; 4] = ["1", "2", "3+", "3-"];

/// Fills the lower triangle of `m` into the upper one as the conjugate.
fn hermitize_upper(m: &mut DMatrix<Complex64>) {
    for r in 0..m.nrows() {
        for c in 0..r {
            m[(c, r)] = m[(r, c)].conj();
        }
    }
}

/// The constant rotating-frame Hamiltonian of the working set:
/// diag(0, delta12, delta13, delta13) plus the five couplings.
pub fn build_interaction_hamiltonian(
    couplings: &CouplingSet,
    detunings: &Detunings,
) -> Result<HamiltonianMatrix> {
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    m[(1, 1)] = Complex64::new(detunings.delta12, 0.0);
    m[(2, 2)] = Complex64::new(detunings.delta13, 0.0);
    m[(3, 3)] = Complex64::new(detunings.delta13, 0.0);
    m[(1, 0)] = couplings.omega21;
    m[(2, 0)] = couplings.omega3p1;
    m[(3, 0)] = couplings.omega3m1;
    m[(2, 1)] = couplings.omega3p2;
    m[(3, 1)] = couplings.omega3m2;
    hermitize_upper(&mut m);
    HamiltonianMatrix::new(m, FOUR_LABELS.to_vec())
}

/// The lab-frame Hamiltonian at time `t`: bare level energies on the
/// diagonal, each coupling oscillating at its carrier frequency. Upper-state
/// elements carry exp(-i omega_L t) so the diagonal frame change with phases
/// (omega1, omega1 + omega_L12, omega1 + omega_L13, omega1 + omega_L13)
/// reproduces `build_interaction_hamiltonian` exactly.
pub fn build_lab_hamiltonian(
    levels: &LevelFrequencies,
    carriers: &CarrierFrequencies,
    couplings: &CouplingSet,
    t: f64,
) -> Result<HamiltonianMatrix> {
    let rot = |omega_l: f64| Complex64::from_polar(1.0, -omega_l * t);
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    m[(0, 0)] = Complex64::new(levels.omega1, 0.0);
    m[(1, 1)] = Complex64::new(levels.omega2, 0.0);
    m[(2, 2)] = Complex64::new(levels.omega3, 0.0);
    m[(3, 3)] = Complex64::new(levels.omega3, 0.0);
    m[(1, 0)] = couplings.omega21 * rot(carriers.omega_l12);
    m[(2, 0)] = couplings.omega3p1 * rot(carriers.omega_l13);
    m[(3, 0)] = couplings.omega3m1 * rot(carriers.omega_l13);
    m[(2, 1)] = couplings.omega3p2 * rot(carriers.omega_l23);
    m[(3, 1)] = couplings.omega3m2 * rot(carriers.omega_l23);
    hermitize_upper(&mut m);
    HamiltonianMatrix::new(m, FOUR_LABELS.to_vec())
}

/// Second-order parameters produced by eliminating the far-detuned pair
/// |3+>, |3->. All derived from one coupling set and one common detuning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveParams {
    /// Common far-leg detuning used in the elimination (rad/s).
    pub delta: f64,
    /// Light shift of |1>: -(|O_3+1|^2 + |O_3-1|^2) / delta.
    pub lambda1: f64,
    /// Light shift of |2>: -(|O_3+2|^2 + |O_3-2|^2) / delta.
    pub lambda2: f64,
    /// Chirality-independent effective 1 <-> 2 coupling
    /// -(O_3+1 conj(O_3+2) + O_3-1 conj(O_3-2)) / delta.
    pub omega_eff: Complex64,
    /// Residual 3- <-> 3+ coupling
    /// (conj(O_3+1) O_3-1 + conj(O_3+2) O_3-2) / delta.
    pub omega_eff_prime: Complex64,
    /// Second-order repulsion of |3+>: (|O_3+1|^2 + |O_3+2|^2) / delta.
    pub shift_3p: f64,
    /// Second-order repulsion of |3->: (|O_3-1|^2 + |O_3-2|^2) / delta.
    pub shift_3m: f64,
}

impl EffectiveParams {
    /// Light-shift imbalance lambda1 - lambda2, the effective two-level
    /// detuning.
    pub fn lambda_imbalance(&self) -> f64 {
        self.lambda1 - self.lambda2
    }
}

/// Eliminates |3+>, |3-> at common detuning `delta` (rad/s, nonzero).
///
/// Valid when the far legs are weak against the detuning; see
/// [`hierarchy_ratios`] for the quantitative check. The result depends on
/// the enantiomer only through quantities not used here, so one elimination
/// serves both mirror forms.
pub fn adiabatic_eliminate(couplings: &CouplingSet, delta: f64) -> Result<EffectiveParams> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Elimination(format!(
            "far-leg detuning must be finite and nonzero, got {delta}"
        )));
    }
    let o3p1 = couplings.omega3p1;
    let o3m1 = couplings.omega3m1;
    let o3p2 = couplings.omega3p2;
    let o3m2 = couplings.omega3m2;
    Ok(EffectiveParams {
        delta,
        lambda1: -(o3p1.norm_sqr() + o3m1.norm_sqr()) / delta,
        lambda2: -(o3p2.norm_sqr() + o3m2.norm_sqr()) / delta,
        omega_eff: -(o3p1 * o3p2.conj() + o3m1 * o3m2.conj()) / delta,
        omega_eff_prime: (o3p1.conj() * o3m1 + o3p2.conj() * o3m2) / delta,
        shift_3p: (o3p1.norm_sqr() + o3p2.norm_sqr()) / delta,
        shift_3m: (o3m1.norm_sqr() + o3m2.norm_sqr()) / delta,
    })
}

/// Elimination gated on the resonant two-photon detuning pattern.
pub fn eliminate_resonant(couplings: &CouplingSet, detunings: &Detunings) -> Result<EffectiveParams> {
    adiabatic_eliminate(couplings, detunings.shared()?)
}

/// Scale separations behind the elimination: (largest far-leg coupling over
/// detuning, 1 <-> 2 coupling over smallest far-leg coupling). The first
/// must be small for the elimination to hold; the second small keeps the
/// eliminated pair unpopulated.
pub fn hierarchy_ratios(couplings: &CouplingSet, delta: f64) -> (f64, f64) {
    let legs = couplings.legs();
    let max_leg = legs.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let min_leg = legs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    (max_leg / delta.abs(), couplings.omega21.norm() / min_leg)
}

const TWO_LABELS: [&str; 2] = ["1", "2"];

/// Chirality-resolved two-level Hamiltonian on {|1>, |2>}:
/// diag(lambda1, lambda2) with coupling omega_eff + omega21. Pass the
/// `omega21` of the enantiomer-specific coupling set; the two mirror forms
/// differ only in its sign.
pub fn build_two_level(eff: &EffectiveParams, omega21: Complex64) -> Result<HamiltonianMatrix> {
    let mut m = DMatrix::<Complex64>::zeros(2, 2);
    m[(0, 0)] = Complex64::new(eff.lambda1, 0.0);
    m[(1, 1)] = Complex64::new(eff.lambda2, 0.0);
    m[(1, 0)] = eff.omega_eff + omega21;
    hermitize_upper(&mut m);
    HamiltonianMatrix::new(m, TWO_LABELS.to_vec())
}

/// Effective four-level Hamiltonian after second-order perturbation: the
/// {|1>, |2>} block of [`build_two_level`] and a decoupled {|3+>, |3->}
/// block with its repulsion shifts and residual coupling. Useful to show the
/// dynamics factorizes; populations never cross between the blocks.
pub fn build_effective_four_level(
    eff: &EffectiveParams,
    omega21: Complex64,
) -> Result<HamiltonianMatrix> {
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    m[(0, 0)] = Complex64::new(eff.lambda1, 0.0);
    m[(1, 1)] = Complex64::new(eff.lambda2, 0.0);
    m[(1, 0)] = eff.omega_eff + omega21;
    m[(2, 2)] = Complex64::new(eff.delta + eff.shift_3p, 0.0);
    m[(3, 3)] = Complex64::new(eff.delta + eff.shift_3m, 0.0);
    m[(3, 2)] = eff.omega_eff_prime;
    hermitize_upper(&mut m);
    HamiltonianMatrix::new(m, FOUR_LABELS.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::tests::{test_dipoles, test_fields};
    use crate::drive::build_coupling_set;
    use crate::units::two_pi_mhz;
    use crate::vibronic::Chirality;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn reference_set() -> CouplingSet {
        build_coupling_set(&test_fields(), &test_dipoles(), Chirality::Left).unwrap()
    }

    fn reference_detuning() -> f64 {
        two_pi_mhz(20.0)
    }

    #[test]
    fn level_frequencies_from_rotor_splittings() {
        let constants = RotorConstants::prolate(two_pi_mhz(180.0), two_pi_mhz(60.0)).unwrap();
        let levels = LevelFrequencies::from_rotor(&constants);
        assert_eq!(levels.omega1(), 0.0);
        // |1,0,-1> sits 2C above ground, |1,+-1,0> sits A + C above it.
        assert_relative_eq!(levels.omega2(), two_pi_mhz(120.0), max_relative = 1e-14);
        assert_relative_eq!(levels.omega3(), two_pi_mhz(240.0), max_relative = 1e-14);
    }

    #[test]
    fn level_ordering_enforced() {
        assert!(LevelFrequencies::new(0.0, 1.0, 2.0).is_ok());
        assert!(LevelFrequencies::new(0.0, 2.0, 1.0).is_err());
        assert!(LevelFrequencies::new(0.0, 0.0, 1.0).is_err());
        assert!(LevelFrequencies::new(0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn detuning_loop_closure() {
        assert!(Detunings::new(1.0, 2.0, 3.0).is_ok());
        assert!(Detunings::new(1.0, 2.0, 3.5).is_err());
        let d = Detunings::two_photon(reference_detuning()).unwrap();
        assert_eq!(d.delta12(), 0.0);
        assert_eq!(d.shared().unwrap(), reference_detuning());
        // Non-two-photon patterns cannot be fed to the elimination.
        let skew = Detunings::new(1.0e6, 2.0e6, 3.0e6).unwrap();
        assert!(skew.shared().is_err());
        let zero = Detunings::two_photon(0.0).unwrap();
        assert!(zero.shared().is_err());
    }

    #[test]
    fn carriers_positive_and_consistent() {
        let constants = RotorConstants::prolate(two_pi_mhz(180.0), two_pi_mhz(60.0)).unwrap();
        let levels = LevelFrequencies::from_rotor(&constants);
        let det = Detunings::two_photon(two_pi_mhz(20.0)).unwrap();
        let carriers = CarrierFrequencies::from_levels(&levels, &det).unwrap();
        assert_relative_eq!(carriers.omega_l12(), two_pi_mhz(120.0), max_relative = 1e-14);
        assert_relative_eq!(carriers.omega_l23(), two_pi_mhz(100.0), max_relative = 1e-14);
        assert_relative_eq!(carriers.omega_l13(), two_pi_mhz(220.0), max_relative = 1e-14);
        // Loop closure of the carriers mirrors that of the detunings.
        assert_relative_eq!(
            carriers.omega_l12() + carriers.omega_l23(),
            carriers.omega_l13(),
            max_relative = 1e-12
        );
        // A detuning beyond the splitting would need a negative carrier.
        let det_big = Detunings::two_photon(two_pi_mhz(300.0)).unwrap();
        assert!(CarrierFrequencies::from_levels(&levels, &det_big).is_err());
    }

    #[test]
    fn interaction_hamiltonian_layout() {
        let set = reference_set();
        let det = Detunings::two_photon(reference_detuning()).unwrap();
        let h = build_interaction_hamiltonian(&set, &det).unwrap();
        let m = h.matrix();
        assert_eq!(h.dim(), 4);
        assert_eq!(m[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(m[(2, 2)], Complex64::new(reference_detuning(), 0.0));
        assert_eq!(m[(3, 3)], Complex64::new(reference_detuning(), 0.0));
        assert_eq!(m[(1, 0)], set.omega21);
        assert_eq!(m[(2, 0)], set.omega3p1);
        assert_eq!(m[(3, 0)], set.omega3m1);
        assert_eq!(m[(2, 1)], set.omega3p2);
        assert_eq!(m[(3, 1)], set.omega3m2);
        assert_eq!(m[(0, 1)], set.omega21.conj());
        assert_eq!(m[(2, 3)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lab_frame_reduces_to_interaction_frame() {
        let set = reference_set();
        let det = Detunings::two_photon(reference_detuning()).unwrap();
        let constants = RotorConstants::prolate(two_pi_mhz(180.0), two_pi_mhz(60.0)).unwrap();
        let levels = LevelFrequencies::from_rotor(&constants);
        let carriers = CarrierFrequencies::from_levels(&levels, &det).unwrap();
        let h_int = build_interaction_hamiltonian(&set, &det).unwrap();

        // Frame phases theta_k(t); theta_k' removes the bare diagonal up to
        // the detunings, exp(i (theta_j - theta_l)) removes the carriers.
        let rates = [
            levels.omega1(),
            levels.omega1() + carriers.omega_l12(),
            levels.omega1() + carriers.omega_l13(),
            levels.omega1() + carriers.omega_l13(),
        ];
        for &t in &[0.0, 1.7e-8, 4.3e-7, 1.1e-6] {
            let h_lab = build_lab_hamiltonian(&levels, &carriers, &set, t).unwrap();
            let scale = two_pi_mhz(20.0);
            for r in 0..4 {
                for c in 0..4 {
                    let phase = Complex64::from_polar(1.0, (rates[r] - rates[c]) * t);
                    let mut rotated = phase * h_lab.matrix()[(r, c)];
                    if r == c {
                        rotated -= Complex64::new(rates[r], 0.0);
                    }
                    assert_abs_diff_eq!(
                        (rotated - h_int.matrix()[(r, c)]).norm(),
                        0.0,
                        epsilon = 1e-9 * scale
                    );
                }
            }
        }
    }

    #[test]
    fn elimination_reference_values() {
        // With the reference fields and dipoles: common leg scale
        // w = 2pi x sqrt(2/3) MHz, legs (2wi, w, -2wi, w), delta = 2pi x 20
        // MHz. Then lambda1 = lambda2 = -5 w^2 / delta = -2pi x 1/6 MHz,
        // omega_eff = +3 w^2 / delta = +2pi x 0.1 MHz, and the residual
        // 3+ <-> 3- coupling cancels exactly.
        let set = reference_set();
        let eff = adiabatic_eliminate(&set, reference_detuning()).unwrap();
        assert_relative_eq!(eff.lambda1, -two_pi_mhz(1.0 / 6.0), max_relative = 1e-12);
        assert_relative_eq!(eff.lambda2, -two_pi_mhz(1.0 / 6.0), max_relative = 1e-12);
        assert_relative_eq!(eff.omega_eff.re, two_pi_mhz(0.1), max_relative = 1e-12);
        assert_abs_diff_eq!(eff.omega_eff.im, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(eff.omega_eff_prime.norm(), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(eff.lambda_imbalance(), 0.0, epsilon = 1e-6);
        // The shifts of the eliminated pair are positive for delta > 0.
        assert!(eff.shift_3p > 0.0 && eff.shift_3m > 0.0);
        assert!(adiabatic_eliminate(&set, 0.0).is_err());
    }

    #[test]
    fn elimination_matches_schur_complement() {
        // Independent route: the closed forms must equal the Schur
        // complement A - C^dag B^{-1} C of the far-detuned block, evaluated
        // with plain matrix algebra on an asymmetric coupling set.
        let set = CouplingSet {
            chirality: Chirality::Left,
            omega21: Complex64::new(0.3e6, -0.2e6),
            omega3p1: Complex64::new(2.1e6, 0.7e6),
            omega3m1: Complex64::new(-1.3e6, 0.4e6),
            omega3p2: Complex64::new(0.9e6, -1.8e6),
            omega3m2: Complex64::new(1.1e6, 2.2e6),
        };
        let delta = 0.9e8;
        let eff = adiabatic_eliminate(&set, delta).unwrap();

        let c = nalgebra::Matrix2::new(set.omega3p1, set.omega3p2, set.omega3m1, set.omega3m2);
        let schur = -(c.adjoint() * c) / Complex64::new(delta, 0.0);
        assert_relative_eq!(eff.lambda1, schur[(0, 0)].re, max_relative = 1e-14);
        assert_relative_eq!(eff.lambda2, schur[(1, 1)].re, max_relative = 1e-14);
        assert_relative_eq!(eff.omega_eff.re, schur[(1, 0)].re, max_relative = 1e-14);
        assert_relative_eq!(eff.omega_eff.im, schur[(1, 0)].im, max_relative = 1e-14);

        // The eliminated-block parameters equal + C C^dag / delta.
        let repulsion = (c * c.adjoint()) / Complex64::new(delta, 0.0);
        assert_relative_eq!(eff.shift_3p, repulsion[(0, 0)].re, max_relative = 1e-14);
        assert_relative_eq!(eff.shift_3m, repulsion[(1, 1)].re, max_relative = 1e-14);
        assert_relative_eq!(
            eff.omega_eff_prime.re,
            repulsion[(1, 0)].re,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            eff.omega_eff_prime.im,
            repulsion[(1, 0)].im,
            max_relative = 1e-14
        );
    }

    #[test]
    fn two_level_couplings_differ_by_enantiomer() {
        let set_l = reference_set();
        let set_r = set_l.mirrored();
        let eff = adiabatic_eliminate(&set_l, reference_detuning()).unwrap();
        let h_l = build_two_level(&eff, set_l.omega21).unwrap();
        let h_r = build_two_level(&eff, set_r.omega21).unwrap();
        // Reference configuration: omega21 = -omega_eff, so the left form is
        // dark and the right form is driven at twice omega_eff.
        assert_abs_diff_eq!(h_l.matrix()[(1, 0)].norm(), 0.0, epsilon = 1e-6);
        assert_relative_eq!(
            h_r.matrix()[(1, 0)].norm(),
            2.0 * two_pi_mhz(0.1),
            max_relative = 1e-9
        );
        assert_eq!(h_l.matrix()[(0, 0)].re, eff.lambda1);
        assert_eq!(h_l.matrix()[(1, 1)].re, eff.lambda2);
    }

    #[test]
    fn effective_four_level_is_block_diagonal() {
        let set = reference_set();
        let eff = adiabatic_eliminate(&set, reference_detuning()).unwrap();
        let h = build_effective_four_level(&eff, set.omega21).unwrap();
        let m = h.matrix();
        for (r, c) in [(2, 0), (3, 0), (2, 1), (3, 1)] {
            assert_eq!(m[(r, c)], Complex64::new(0.0, 0.0));
            assert_eq!(m[(c, r)], Complex64::new(0.0, 0.0));
        }
        assert_relative_eq!(m[(2, 2)].re, eff.delta + eff.shift_3p, max_relative = 1e-14);
        assert_relative_eq!(m[(3, 3)].re, eff.delta + eff.shift_3m, max_relative = 1e-14);
    }

    #[test]
    fn hierarchy_ratios_reference() {
        let set = reference_set();
        let (r1, r2) = hierarchy_ratios(&set, reference_detuning());
        // Largest leg is 2w = 2 sqrt(2/3) x 2pi MHz against 2pi x 20 MHz.
        assert_relative_eq!(r1, (2.0 / 3.0f64).sqrt() / 10.0, max_relative = 1e-12);
        // omega21 = 2pi x 0.1 MHz against the smallest leg w.
        assert_relative_eq!(r2, 0.1 / (2.0 / 3.0f64).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn non_hermitian_matrices_rejected() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m[(1, 0)] = Complex64::new(0.5, 0.0);
        match HamiltonianMatrix::new(m, vec!["a", "b"]) {
            Err(Error::NotHermitian { asymmetry, .. }) => assert!(asymmetry > 0.1),
            other => panic!("expected hermiticity rejection, got {other:?}"),
        }
    }
}
