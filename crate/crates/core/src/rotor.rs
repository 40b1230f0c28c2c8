//! Rigid symmetric-top rotor states and energies.
//!
//! Prolate convention: rotational constants A > B = C > 0, all angular
//! frequencies in rad/s (hbar = 1). Eigenstates |J, K, M> carry the total
//! angular momentum J, its molecule-frame projection K and lab-frame
//! projection M, with energy
//!
//! ```text
//! eps(J, K) = C J (J + 1) + (A - C) K^2
//! ```
//!
//! independent of M and degenerate in +-K.

use crate::angular::HalfInt;
use crate::error::Error;
use crate::Result;

/// Rotational constants of a prolate symmetric top, rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotorConstants {
    a: f64,
    c: f64,
}

impl RotorConstants {
    /// Prolate constructor; requires A > C > 0 (B = C implied).
    pub fn prolate(a: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && c.is_finite()) || c <= 0.0 || a <= c {
            return Err(Error::InvalidRotorConstants(format!(
                "prolate top needs A > B = C > 0, got A = {a:e}, C = {c:e} rad/s"
            )));
        }
        Ok(RotorConstants { a, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// B equals C for a symmetric top.
    pub fn b(&self) -> f64 {
        self.c
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Symmetric-top eigenstate |J, K, M> with integer quantum numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RotationalKet {
    j: u32,
    k: i32,
    m: i32,
}

impl RotationalKet {
    pub fn new(j: u32, k: i32, m: i32) -> Result<Self> {
        let jj = j as i32;
        if k.abs() > jj {
            return Err(Error::InvalidKet(format!("|K| = {} exceeds J = {j}", k.abs())));
        }
        if m.abs() > jj {
            return Err(Error::InvalidKet(format!("|M| = {} exceeds J = {j}", m.abs())));
        }
        Ok(RotationalKet { j, k, m })
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn k(&self) -> i32 {
        self.k
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// J as a half-integer for the angular-momentum routines.
    pub fn j_half(&self) -> HalfInt {
        HalfInt::integer(self.j as i32)
    }

    pub fn k_half(&self) -> HalfInt {
        HalfInt::integer(self.k)
    }

    pub fn m_half(&self) -> HalfInt {
        HalfInt::integer(self.m)
    }
}

impl std::fmt::Display for RotationalKet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{},{},{}>", self.j, self.k, self.m)
    }
}

/// Rotational energy eps(J, K) = C J (J + 1) + (A - C) K^2, rad/s.
pub fn rotational_energy(constants: &RotorConstants, ket: &RotationalKet) -> f64 {
    let j = ket.j as f64;
    let k = ket.k as f64;
    constants.c * j * (j + 1.0) + (constants.a - constants.c) * k * k
}
