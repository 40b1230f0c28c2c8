//! Vibronic labels and the parity/chirality rules for dipole components.
//!
//! A chiral symmetric top is described here by a torsional-type coordinate chi
//! whose sign distinguishes the two enantiomers. Vibronic basis functions are
//! labelled |m~> |n~ +-> where m~ counts quanta of a chi-independent mode,
//! n~ quanta of the chi mode, and +- is the parity of the wavefunction under
//! chi -> -chi on the half-domain of one enantiomer.
//!
//! Within one enantiomer, the molecule-frame dipole components obey exact
//! parity rules: mu_z connects equal chi-parity, mu_x and mu_y connect
//! opposite chi-parity; m~ and n~ impose no selection rule. Between
//! enantiomers, matching matrix elements are equal up to a sign that depends
//! only on the axis: <.>_L = s <.>_R with s = -1 for z and s = +1 for x, y.
//! Around any closed three-level loop the product of these signs is -1, which
//! is what makes the loop phase chirality-sensitive.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Parity under chi -> -chi on one enantiomer's half-domain.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum ChiParity {
    Even,
    Odd,
}

impl std::fmt::Display for ChiParity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", if *self == ChiParity::Even { "+" } else { "-" })
    }
}

/// Handedness of the molecule.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Chirality {
    Left,
    Right,
}

impl Chirality {
    pub fn tag(&self) -> &'static str {
        match self {
            Chirality::Left => "L",
            Chirality::Right => "R",
        }
    }
}

impl std::fmt::Display for Chirality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Molecule-frame Cartesian dipole axis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum DipoleAxis {
    X,
    Y,
    Z,
}

impl DipoleAxis {
    pub const ALL: [DipoleAxis; 3] = [DipoleAxis::X, DipoleAxis::Y, DipoleAxis::Z];

    pub fn name(&self) -> &'static str {
        match self {
            DipoleAxis::X => "x",
            DipoleAxis::Y => "y",
            DipoleAxis::Z => "z",
        }
    }
}

/// Vibronic label |m~>|n~ +-> of one enantiomer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct VibrationalLabel {
    pub m_tilde: u32,
    pub n_tilde: u32,
    pub parity: ChiParity,
    pub chirality: Chirality,
}

impl VibrationalLabel {
    pub fn new(m_tilde: u32, n_tilde: u32, parity: ChiParity, chirality: Chirality) -> Self {
        VibrationalLabel {
            m_tilde,
            n_tilde,
            parity,
            chirality,
        }
    }

    /// Same label attached to the other (or a specific) enantiomer.
    pub fn with_chirality(mut self, chirality: Chirality) -> Self {
        self.chirality = chirality;
        self
    }

    /// Equality of the chirality-independent part (m~, n~, parity).
    pub fn same_mode(&self, other: &VibrationalLabel) -> bool {
        self.m_tilde == other.m_tilde
            && self.n_tilde == other.n_tilde
            && self.parity == other.parity
    }
}

impl std::fmt::Display for VibrationalLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "|{}>|{} {}>_{}",
            self.m_tilde, self.n_tilde, self.parity, self.chirality
        )
    }
}

fn check_same_enantiomer(a: &VibrationalLabel, b: &VibrationalLabel) -> Result<()> {
    if a.chirality != b.chirality {
        return Err(Error::DipoleComponent(format!(
            "matrix element requested across enantiomers: {a} vs {b}"
        )));
    }
    Ok(())
}

/// Whether <a| mu_axis |b> is structurally nonzero within one enantiomer:
/// z needs equal chi-parity, x and y need opposite chi-parity. Errors when
/// the labels belong to different enantiomers.
pub fn dipole_component_allowed(
    a: &VibrationalLabel,
    b: &VibrationalLabel,
    axis: DipoleAxis,
) -> Result<bool> {
    check_same_enantiomer(a, b)?;
    Ok(match axis {
        DipoleAxis::Z => a.parity == b.parity,
        DipoleAxis::X | DipoleAxis::Y => a.parity != b.parity,
    })
}

/// Sign s relating matching matrix elements of the two enantiomers,
/// <a| mu_axis |b>_L = s <a| mu_axis |b>_R. Errors for forbidden components
/// (where no nonzero matrix element exists to compare) and for mixed
/// enantiomers.
pub fn chirality_sign(
    a: &VibrationalLabel,
    b: &VibrationalLabel,
    axis: DipoleAxis,
) -> Result<i32> {
    if !dipole_component_allowed(a, b, axis)? {
        return Err(Error::DipoleComponent(format!(
            "mu_{} is parity-forbidden between {a} and {b}",
            axis.name()
        )));
    }
    Ok(match axis {
        DipoleAxis::Z => -1,
        DipoleAxis::X | DipoleAxis::Y => 1,
    })
}

/// Outcome of checking a candidate working-state triple (v1, v2, v3).
///
/// The scheme needs a z-polarized 1 <-> 2 leg, x/y-polarized 2 <-> 3 and
/// 1 <-> 3 legs, and distinct v1, v2 (otherwise the two loop contributions to
/// the effective coupling cancel exactly).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WorkingSetReport {
    pub z_21_allowed: bool,
    pub x_32_allowed: bool,
    pub y_32_allowed: bool,
    pub x_31_allowed: bool,
    pub y_31_allowed: bool,
    pub v1_v2_distinct: bool,
}

impl WorkingSetReport {
    pub fn all_satisfied(&self) -> bool {
        self.z_21_allowed
            && self.x_32_allowed
            && self.y_32_allowed
            && self.x_31_allowed
            && self.y_31_allowed
            && self.v1_v2_distinct
    }

    /// Convert a failing report into an error naming the first failure.
    pub fn ensure(&self) -> Result<()> {
        let failures: Vec<&str> = [
            (self.z_21_allowed, "mu_z between v2 and v1"),
            (self.x_32_allowed, "mu_x between v3 and v2"),
            (self.y_32_allowed, "mu_y between v3 and v2"),
            (self.x_31_allowed, "mu_x between v3 and v1"),
            (self.y_31_allowed, "mu_y between v3 and v1"),
            (self.v1_v2_distinct, "v1 distinct from v2"),
        ]
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|&(_, what)| what)
        .collect();
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::WorkingSet(format!("failed: {}", failures.join(", "))))
        }
    }
}

/// Check the selection-rule requirements on a working-state triple.
/// Errors only if the labels mix enantiomers; rule failures are reported.
pub fn validate_working_set(
    v1: &VibrationalLabel,
    v2: &VibrationalLabel,
    v3: &VibrationalLabel,
) -> Result<WorkingSetReport> {
    check_same_enantiomer(v1, v2)?;
    check_same_enantiomer(v1, v3)?;
    Ok(WorkingSetReport {
        z_21_allowed: dipole_component_allowed(v2, v1, DipoleAxis::Z)?,
        x_32_allowed: dipole_component_allowed(v3, v2, DipoleAxis::X)?,
        y_32_allowed: dipole_component_allowed(v3, v2, DipoleAxis::Y)?,
        x_31_allowed: dipole_component_allowed(v3, v1, DipoleAxis::X)?,
        y_31_allowed: dipole_component_allowed(v3, v1, DipoleAxis::Y)?,
        v1_v2_distinct: !v1.same_mode(v2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(m: u32, n: u32, parity: ChiParity) -> VibrationalLabel {
        VibrationalLabel::new(m, n, parity, Chirality::Left)
    }

    #[test]
    fn parity_rules() {
        let even = label(0, 0, ChiParity::Even);
        let even2 = label(1, 0, ChiParity::Even);
        let odd = label(1, 0, ChiParity::Odd);
        assert!(dipole_component_allowed(&even, &even2, DipoleAxis::Z).unwrap());
        assert!(!dipole_component_allowed(&even, &odd, DipoleAxis::Z).unwrap());
        assert!(dipole_component_allowed(&even, &odd, DipoleAxis::X).unwrap());
        assert!(dipole_component_allowed(&even, &odd, DipoleAxis::Y).unwrap());
        assert!(!dipole_component_allowed(&even, &even2, DipoleAxis::X).unwrap());
        // m~ and n~ impose no rule: only parity enters.
        let far = label(7, 3, ChiParity::Even);
        assert!(dipole_component_allowed(&even, &far, DipoleAxis::Z).unwrap());
    }

    #[test]
    fn mixed_enantiomers_rejected() {
        let l = label(0, 0, ChiParity::Even);
        let r = l.with_chirality(Chirality::Right);
        assert!(dipole_component_allowed(&l, &r, DipoleAxis::Z).is_err());
        assert!(chirality_sign(&l, &r, DipoleAxis::Z).is_err());
    }

    #[test]
    fn signs_and_loop_product() {
        let v1 = label(0, 0, ChiParity::Even);
        let v2 = label(1, 0, ChiParity::Even);
        let v3 = label(1, 0, ChiParity::Odd);
        let s_z = chirality_sign(&v2, &v1, DipoleAxis::Z).unwrap();
        let s_x = chirality_sign(&v3, &v2, DipoleAxis::X).unwrap();
        let s_y = chirality_sign(&v3, &v1, DipoleAxis::Y).unwrap();
        assert_eq!(s_z, -1);
        assert_eq!(s_x, 1);
        assert_eq!(s_y, 1);
        assert_eq!(s_z * s_x * s_y, -1);
    }

    #[test]
    fn sign_for_forbidden_component_is_error() {
        let v1 = label(0, 0, ChiParity::Even);
        let v3 = label(1, 0, ChiParity::Odd);
        assert!(chirality_sign(&v3, &v1, DipoleAxis::Z).is_err());
    }

    #[test]
    fn working_set_example() {
        let v1 = label(0, 0, ChiParity::Even);
        let v2 = label(1, 0, ChiParity::Even);
        let v3 = label(1, 0, ChiParity::Odd);
        let report = validate_working_set(&v1, &v2, &v3).unwrap();
        assert!(report.all_satisfied());
        report.ensure().unwrap();
    }

    #[test]
    fn working_set_failures_reported() {
        let v1 = label(0, 0, ChiParity::Even);
        let v3 = label(1, 0, ChiParity::Odd);
        // v2 with odd parity breaks the z leg and the 2<->3 x/y legs.
        let bad_v2 = label(1, 0, ChiParity::Odd);
        let report = validate_working_set(&v1, &bad_v2, &v3).unwrap();
        assert!(!report.z_21_allowed);
        assert!(!report.x_32_allowed);
        assert!(!report.all_satisfied());
        assert!(report.ensure().is_err());

        // v1 == v2 in mode space
        let report = validate_working_set(&v1, &v1.clone(), &v3).unwrap();
        assert!(!report.v1_v2_distinct);
        assert!(report.ensure().is_err());
    }
}
