//! Drive fields, dipole data, and the complex couplings they generate.
//!
//! Three polarized fields address the working levels: a sigma = -1 field on
//! 1 <-> 2, a sigma = +1 field on 2 <-> 3, and a sigma = 0 (z-polarized)
//! field on 1 <-> 3. For a field of helicity sigma with amplitude E and
//! phase phi, the coupling between levels j (upper) and l (lower) is
//!
//! ```text
//!                     1                                m           sigma+sigma'-K_l+M_l    -i phi
//! Omega_jl = sum      - sqrt((2J_j+1)(2J_l+1)) <v_j| mu      |v_l> (-1)                   e
//!            sigma'   2                                sigma'
//!
//!            * 3j(J_j 1 J_l; M_j -sigma -M_l) * 3j(J_j 1 J_l; K_j -sigma' -K_l)
//! ```
//!
//! extended conjugate-linearly over the upper level's rotational superposition
//! and linearly over the lower one. The molecule-frame spherical dipole
//! components are mu_0 = mu_z and mu_{+-1} = (i mu_y +- mu_x) / sqrt(2).
//!
//! For the specific working set |1> = |v1>|0,0,0>, |2> = |v2>|1,0,-1>,
//! |3+-> = |v3>(|1,1,0> +- |1,-1,0>)/sqrt(2) the sum collapses to five closed
//! forms (evaluated by [`build_coupling_set`]):
//!
//! ```text
//! Omega_21  = (sqrt(3)/6) E12 e^{-i phi12} <v2|mu_z|v1>
//! Omega_3+2 = (1/4)       E23 e^{-i phi23} <v3|mu_x|v2>
//! Omega_3-2 = (i/4)       E23 e^{-i phi23} <v3|mu_y|v2>
//! Omega_3+1 = i (sqrt(3)/6) E13 e^{-i phi13} <v3|mu_y|v1>
//! Omega_3-1 = (sqrt(3)/6)   E13 e^{-i phi13} <v3|mu_x|v1>
//! ```
//!
//! Dipole magnitudes are stored as the left-handed enantiomer's values
//! (non-negative by convention); the right-handed molecule flips exactly the
//! z-type matrix element, so Omega_21 changes sign between enantiomers while
//! the four 3 <-> 1,2 couplings are unchanged. That single sign moves the
//! three-coupling loop phase by pi.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::angular::{wigner_3j, HalfInt, Spherical};
use crate::error::Error;
use crate::rotor::RotationalKet;
use crate::vibronic::{
    chirality_sign, dipole_component_allowed, validate_working_set, Chirality, DipoleAxis,
    VibrationalLabel,
};
use crate::Result;

/// One drive field: lab-frame helicity, amplitude, phase.
///
/// The amplitude is in "Rabi units": amplitude times a dipole magnitude is an
/// angular frequency in rad/s. Carrier frequencies are implied by the
/// resonance conditions and live with the detunings, not here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveField {
    pub helicity: Spherical,
    pub amplitude: f64,
    pub phase: f64,
}

impl DriveField {
    pub fn new(helicity: Spherical, amplitude: f64, phase: f64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::DriveField(format!(
                "amplitude must be finite and non-negative, got {amplitude:e}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::DriveField("phase must be finite".into()));
        }
        Ok(DriveField {
            helicity,
            amplitude,
            phase,
        })
    }

    /// E e^{-i phi}, the complex field factor entering every coupling.
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, -self.phase)
    }
}

/// The three working fields with their fixed helicity assignment:
/// sigma = -1 on 1 <-> 2, sigma = +1 on 2 <-> 3, sigma = 0 on 1 <-> 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveTriple {
    pub field_12: DriveField,
    pub field_23: DriveField,
    pub field_13: DriveField,
}

impl DriveTriple {
    pub fn new(field_12: DriveField, field_23: DriveField, field_13: DriveField) -> Result<Self> {
        let expected = [
            (field_12.helicity, Spherical::Minus, "1 <-> 2"),
            (field_23.helicity, Spherical::Plus, "2 <-> 3"),
            (field_13.helicity, Spherical::Zero, "1 <-> 3"),
        ];
        for (got, want, leg) in expected {
            if got != want {
                return Err(Error::DriveField(format!(
                    "the {leg} field must have helicity {want}, got {got}"
                )));
            }
        }
        Ok(DriveTriple {
            field_12,
            field_23,
            field_13,
        })
    }

    /// Convenience constructor from (amplitude, phase) pairs in leg order
    /// 1 <-> 2, 2 <-> 3, 1 <-> 3.
    pub fn from_amplitudes_phases(
        e12: (f64, f64),
        e23: (f64, f64),
        e13: (f64, f64),
    ) -> Result<Self> {
        DriveTriple::new(
            DriveField::new(Spherical::Minus, e12.0, e12.1)?,
            DriveField::new(Spherical::Plus, e23.0, e23.1)?,
            DriveField::new(Spherical::Zero, e13.0, e13.1)?,
        )
    }
}

/// Ordered working-state pair carrying a dipole matrix element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum StatePair {
    /// <v2| mu |v1>
    V2V1,
    /// <v3| mu |v2>
    V3V2,
    /// <v3| mu |v1>
    V3V1,
}

/// Vibrational dipole data for the working set.
///
/// Magnitudes are the left-handed enantiomer's matrix elements, non-negative
/// by the sign-reference convention; absent entries are zero. Every stored
/// entry must be parity-allowed for its pair.
#[derive(Clone, Debug)]
pub struct DipoleModel {
    labels: [VibrationalLabel; 3],
    magnitudes: HashMap<(StatePair, DipoleAxis), f64>,
}

impl DipoleModel {
    /// `labels` is (v1, v2, v3); entries are ((pair, axis), magnitude).
    /// Labels are normalized to the left-handed reference internally and must
    /// be pairwise distinct in mode space so pair lookup is unambiguous.
    pub fn new(
        labels: [VibrationalLabel; 3],
        entries: &[(StatePair, DipoleAxis, f64)],
    ) -> Result<Self> {
        let labels = labels.map(|l| l.with_chirality(Chirality::Left));
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if labels[i].same_mode(&labels[j]) {
                return Err(Error::WorkingSet(format!(
                    "working labels v{} and v{} coincide: {}",
                    i + 1,
                    j + 1,
                    labels[i]
                )));
            }
        }
        let mut magnitudes = HashMap::new();
        for &(pair, axis, magnitude) in entries {
            if !magnitude.is_finite() || magnitude < 0.0 {
                return Err(Error::DipoleComponent(format!(
                    "dipole magnitude must be finite and non-negative, got {magnitude:e}"
                )));
            }
            let (upper, lower) = pair_labels(&labels, pair);
            if !dipole_component_allowed(&upper, &lower, axis)? {
                return Err(Error::DipoleComponent(format!(
                    "mu_{} between {} and {} is parity-forbidden and cannot carry a magnitude",
                    axis.name(),
                    upper,
                    lower
                )));
            }
            if magnitudes.insert((pair, axis), magnitude).is_some() {
                return Err(Error::DipoleComponent(format!(
                    "duplicate dipole entry for mu_{}",
                    axis.name()
                )));
            }
        }
        Ok(DipoleModel { labels, magnitudes })
    }

    /// The stored left-reference labels re-tagged for an enantiomer.
    pub fn labels_for(&self, chirality: Chirality) -> [VibrationalLabel; 3] {
        self.labels.map(|l| l.with_chirality(chirality))
    }

    /// Stored magnitude (left-reference, non-negative), zero when absent.
    pub fn magnitude(&self, pair: StatePair, axis: DipoleAxis) -> f64 {
        self.magnitudes.get(&(pair, axis)).copied().unwrap_or(0.0)
    }

    /// Signed Cartesian matrix element <a| mu_axis |b> for the enantiomer the
    /// query labels belong to. Zero for pairs or axes with no stored
    /// magnitude; errors if the labels mix enantiomers.
    pub fn axis_value(
        &self,
        a: &VibrationalLabel,
        b: &VibrationalLabel,
        axis: DipoleAxis,
    ) -> Result<f64> {
        if a.chirality != b.chirality {
            return Err(Error::DipoleComponent(format!(
                "matrix element requested across enantiomers: {a} vs {b}"
            )));
        }
        let Some(pair) = self.match_pair(a, b) else {
            return Ok(0.0);
        };
        let magnitude = self.magnitude(pair, axis);
        if magnitude == 0.0 {
            return Ok(0.0);
        }
        let sign = match a.chirality {
            Chirality::Left => 1,
            // <.>_R = s <.>_L since s^2 = 1.
            Chirality::Right => chirality_sign(a, b, axis)?,
        };
        Ok(f64::from(sign) * magnitude)
    }

    /// Spherical dipole matrix element <a| mu_sigma' |b>:
    /// mu_0 = mu_z, mu_{+-1} = (i mu_y +- mu_x)/sqrt(2).
    pub fn spherical_value(
        &self,
        a: &VibrationalLabel,
        b: &VibrationalLabel,
        component: Spherical,
    ) -> Result<Complex64> {
        Ok(match component {
            Spherical::Zero => Complex64::new(self.axis_value(a, b, DipoleAxis::Z)?, 0.0),
            Spherical::Plus => {
                let x = self.axis_value(a, b, DipoleAxis::X)?;
                let y = self.axis_value(a, b, DipoleAxis::Y)?;
                Complex64::new(x, y) / 2f64.sqrt()
            }
            Spherical::Minus => {
                let x = self.axis_value(a, b, DipoleAxis::X)?;
                let y = self.axis_value(a, b, DipoleAxis::Y)?;
                Complex64::new(-x, y) / 2f64.sqrt()
            }
        })
    }

    /// Working-set selection rules for these labels.
    pub fn validate_working_set(&self) -> Result<()> {
        validate_working_set(&self.labels[0], &self.labels[1], &self.labels[2])?.ensure()
    }

    fn match_pair(&self, a: &VibrationalLabel, b: &VibrationalLabel) -> Option<StatePair> {
        for pair in [StatePair::V2V1, StatePair::V3V2, StatePair::V3V1] {
            let (upper, lower) = pair_labels(&self.labels, pair);
            if (a.same_mode(&upper) && b.same_mode(&lower))
                || (a.same_mode(&lower) && b.same_mode(&upper))
            {
                return Some(pair);
            }
        }
        None
    }
}

fn pair_labels(
    labels: &[VibrationalLabel; 3],
    pair: StatePair,
) -> (VibrationalLabel, VibrationalLabel) {
    match pair {
        StatePair::V2V1 => (labels[1], labels[0]),
        StatePair::V3V2 => (labels[2], labels[1]),
        StatePair::V3V1 => (labels[2], labels[0]),
    }
}

/// A vibronic label attached to a normalized rotational superposition.
#[derive(Clone, Debug)]
pub struct RoVibLevel {
    pub vib: VibrationalLabel,
    components: Vec<(Complex64, RotationalKet)>,
}

impl RoVibLevel {
    /// Single rotational ket.
    pub fn pure(vib: VibrationalLabel, ket: RotationalKet) -> Self {
        RoVibLevel {
            vib,
            components: vec![(Complex64::new(1.0, 0.0), ket)],
        }
    }

    /// Normalized superposition; rejects empty input, repeated kets, and any
    /// norm deviating from 1 by more than 1e-9.
    pub fn superposition(
        vib: VibrationalLabel,
        components: Vec<(Complex64, RotationalKet)>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Superposition("empty superposition".into()));
        }
        for (i, (_, ki)) in components.iter().enumerate() {
            for (_, kj) in components.iter().skip(i + 1) {
                if ki == kj {
                    return Err(Error::Superposition(format!("repeated ket {ki}")));
                }
            }
        }
        let norm_sq: f64 = components.iter().map(|(c, _)| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(Error::Superposition(format!(
                "norm^2 = {norm_sq} deviates from 1 beyond 1e-9"
            )));
        }
        Ok(RoVibLevel { vib, components })
    }

    pub fn components(&self) -> &[(Complex64, RotationalKet)] {
        &self.components
    }
}

/// The four working levels for a given set of vibrational labels (v1, v2, v3):
/// returned in order |1>, |2>, |3+>, |3->.
pub fn working_levels(labels: &[VibrationalLabel; 3]) -> [RoVibLevel; 4] {
    let ket = |j, k, m| RotationalKet::new(j, k, m).expect("working kets are valid");
    let inv_sqrt2 = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    let sup = |vib, sign: f64| {
        RoVibLevel::superposition(
            vib,
            vec![
                (inv_sqrt2, ket(1, 1, 0)),
                (inv_sqrt2 * sign, ket(1, -1, 0)),
            ],
        )
        .expect("working superpositions are normalized")
    };
    [
        RoVibLevel::pure(labels[0], ket(0, 0, 0)),
        RoVibLevel::pure(labels[1], ket(1, 0, -1)),
        sup(labels[2], 1.0),
        sup(labels[2], -1.0),
    ]
}

/// General coupling between two ro-vibronic levels driven by one field,
/// evaluated from the angular-momentum sum in the module docs. This is the
/// first-principles route; [`build_coupling_set`] is the closed-form route.
pub fn coupling_general(
    field: &DriveField,
    upper: &RoVibLevel,
    lower: &RoVibLevel,
    dipoles: &DipoleModel,
) -> Result<Complex64> {
    let sigma = field.helicity;
    let field_factor = field.phasor();
    let mut total = Complex64::new(0.0, 0.0);
    for &(cu, ku) in upper.components() {
        for &(cl, kl) in lower.components() {
            let single = coupling_single(sigma, &upper.vib, ku, &lower.vib, kl, dipoles)?;
            total += cu.conj() * cl * single;
        }
    }
    Ok(field_factor * total)
}

/// One (upper ket, lower ket) term of the coupling sum, without the field
/// amplitude/phase factor.
fn coupling_single(
    sigma: Spherical,
    upper_vib: &VibrationalLabel,
    upper: RotationalKet,
    lower_vib: &VibrationalLabel,
    lower: RotationalKet,
    dipoles: &DipoleModel,
) -> Result<Complex64> {
    let one = HalfInt::integer(1);
    let w_m = wigner_3j(
        upper.j_half(),
        one,
        lower.j_half(),
        upper.m_half(),
        HalfInt::integer(-sigma.signed()),
        HalfInt::integer(-lower.m()),
    )?;
    if w_m == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let prefactor = 0.5
        * (f64::from(2 * upper.j() + 1) * f64::from(2 * lower.j() + 1)).sqrt();

    let mut sum = Complex64::new(0.0, 0.0);
    for sigma_prime in Spherical::ALL {
        let mu = dipoles.spherical_value(upper_vib, lower_vib, sigma_prime)?;
        if mu == Complex64::new(0.0, 0.0) {
            continue;
        }
        let w_k = wigner_3j(
            upper.j_half(),
            one,
            lower.j_half(),
            upper.k_half(),
            HalfInt::integer(-sigma_prime.signed()),
            HalfInt::integer(-lower.k()),
        )?;
        if w_k == 0.0 {
            continue;
        }
        let exponent = sigma.signed() + sigma_prime.signed() - lower.k() + lower.m();
        let sign = if exponent.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sum += mu * (sign * w_k);
    }
    Ok(sum * (prefactor * w_m))
}

/// The five complex couplings of the working scheme, plus the enantiomer they
/// were evaluated for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingSet {
    pub chirality: Chirality,
    /// 2 <-> 1 leg (z-polarized dipole; flips sign between enantiomers).
    pub omega21: Complex64,
    /// 3+ <-> 1 leg.
    pub omega3p1: Complex64,
    /// 3- <-> 1 leg.
    pub omega3m1: Complex64,
    /// 3+ <-> 2 leg.
    pub omega3p2: Complex64,
    /// 3- <-> 2 leg.
    pub omega3m2: Complex64,
}

impl CouplingSet {
    /// The four far-detuned leg couplings in a fixed order
    /// (3+1, 3-1, 3+2, 3-2).
    pub fn legs(&self) -> [Complex64; 4] {
        [self.omega3p1, self.omega3m1, self.omega3p2, self.omega3m2]
    }

    /// Phases of the cyclic three-coupling products around the two loops
    /// 1 -> 2 -> 3+ -> 1 and 1 -> 2 -> 3- -> 1:
    /// arg(Omega_21 Omega_3+-2 conj(Omega_3+-1)). Errors when any involved
    /// coupling vanishes, since the phase is then undefined.
    pub fn loop_phases(&self) -> Result<[f64; 2]> {
        let products = [
            self.omega21 * self.omega3p2 * self.omega3p1.conj(),
            self.omega21 * self.omega3m2 * self.omega3m1.conj(),
        ];
        for (i, p) in products.iter().enumerate() {
            if p.norm() == 0.0 {
                return Err(Error::DriveField(format!(
                    "loop {} has a vanishing coupling; its phase is undefined",
                    if i == 0 { "3+" } else { "3-" }
                )));
            }
        }
        Ok([products[0].arg(), products[1].arg()])
    }

    /// Same couplings with the enantiomer-dependent sign applied: only the
    /// z-type 2 <-> 1 coupling changes between mirror molecules.
    pub fn mirrored(&self) -> CouplingSet {
        CouplingSet {
            chirality: match self.chirality {
                Chirality::Left => Chirality::Right,
                Chirality::Right => Chirality::Left,
            },
            omega21: -self.omega21,
            ..*self
        }
    }
}

/// Evaluate the five closed-form couplings for one enantiomer.
///
/// Rejects field triples whose working set fails the selection rules. The
/// right-handed set differs from the left-handed one only in the sign of
/// Omega_21.
pub fn build_coupling_set(
    fields: &DriveTriple,
    dipoles: &DipoleModel,
    chirality: Chirality,
) -> Result<CouplingSet> {
    dipoles.validate_working_set()?;
    let [v1, v2, v3] = dipoles.labels_for(chirality);
    let sqrt3_over_6 = 3f64.sqrt() / 6.0;
    let i = Complex64::new(0.0, 1.0);

    let p12 = fields.field_12.phasor();
    let p23 = fields.field_23.phasor();
    let p13 = fields.field_13.phasor();

    Ok(CouplingSet {
        chirality,
        omega21: p12 * (sqrt3_over_6 * dipoles.axis_value(&v2, &v1, DipoleAxis::Z)?),
        omega3p2: p23 * (0.25 * dipoles.axis_value(&v3, &v2, DipoleAxis::X)?),
        omega3m2: i * p23 * (0.25 * dipoles.axis_value(&v3, &v2, DipoleAxis::Y)?),
        omega3p1: i * p13 * (sqrt3_over_6 * dipoles.axis_value(&v3, &v1, DipoleAxis::Y)?),
        omega3m1: p13 * (sqrt3_over_6 * dipoles.axis_value(&v3, &v1, DipoleAxis::X)?),
    })
}
