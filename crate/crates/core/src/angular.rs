//! Angular-momentum algebra: Wigner 3j symbols and electric-dipole selection
//! rules.
//!
//! Quantum numbers are stored as doubled integers ([`HalfInt`]) so
//! half-integer values stay exact. The 3j symbol is evaluated with the Racah
//! single-sum formula using exact big-integer factorial arithmetic; the only
//! floating-point operation is one square root at the very end:
//!
//! ```text
//! / j1 j2 j3 \            j1-j2-m3
//! |          |  =  (-1)          sqrt(D * P) * S
//! \ m1 m2 m3 /
//! ```
//!
//! where `D` is the triangle coefficient, `P` the product of the six
//! `(j +- m)!` factorials, and `S` the alternating Racah series; `D * P * S^2`
//! is assembled as one exact reduced fraction before the square root.
//!
//! Results with all `j <= 2` are served from a fixed table built on first use,
//! since those values dominate the coupling evaluations in this crate.

use std::collections::HashMap;
use std::fmt;
use std::sync::LazyLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::rotor::RotationalKet;
use crate::Result;

/// Half-integer stored as its doubled value: `HalfInt::from_doubled(3)` is 3/2.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HalfInt(i32);

impl HalfInt {
    /// Construct from a doubled value (2j or 2m).
    pub const fn from_doubled(two_x: i32) -> Self {
        HalfInt(two_x)
    }

    /// Construct an integer value.
    pub const fn integer(x: i32) -> Self {
        HalfInt(2 * x)
    }

    /// The doubled value.
    pub const fn doubled(self) -> i32 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Index of a spherical basis vector, sigma in {-1, 0, +1}.
///
/// Used both for lab-frame field polarization (helicity) and for the
/// molecule-frame spherical dipole components.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Spherical {
    Minus,
    Zero,
    Plus,
}

impl Spherical {
    pub const ALL: [Spherical; 3] = [Spherical::Minus, Spherical::Zero, Spherical::Plus];

    pub const fn signed(self) -> i32 {
        match self {
            Spherical::Minus => -1,
            Spherical::Zero => 0,
            Spherical::Plus => 1,
        }
    }

    pub fn from_signed(sigma: i32) -> Result<Self> {
        match sigma {
            -1 => Ok(Spherical::Minus),
            0 => Ok(Spherical::Zero),
            1 => Ok(Spherical::Plus),
            other => Err(Error::AngularDomain(format!(
                "spherical index must be -1, 0 or +1, got {other}"
            ))),
        }
    }
}

impl fmt::Display for Spherical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.signed())
    }
}

/// Check one (j, m) pair: j >= 0, |m| <= j, and m in the ladder of j.
fn validate_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.doubled() < 0 {
        return Err(Error::AngularDomain(format!("negative j = {j}")));
    }
    if (j.doubled() - m.doubled()) % 2 != 0 {
        return Err(Error::AngularDomain(format!(
            "m = {m} is not in the ladder of j = {j} (j - m must be an integer)"
        )));
    }
    if m.doubled().abs() > j.doubled() {
        return Err(Error::AngularDomain(format!("|m| = |{m}| exceeds j = {j}")));
    }
    Ok(())
}

/// Triangle rule on (j1, j2, j3), including the integer-perimeter requirement.
pub fn triangle_satisfied(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    let (a, b, c) = (j1.doubled(), j2.doubled(), j3.doubled());
    (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

/// Wigner 3j symbol.
///
/// Returns 0 when `m1 + m2 + m3 != 0` or the triangle rule fails; returns an
/// error when any (j, m) pair is malformed (negative j, |m| > j, or m not in
/// the ladder of j).
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64> {
    validate_pair(j1, m1)?;
    validate_pair(j2, m2)?;
    validate_pair(j3, m3)?;
    let key = [
        j1.doubled(),
        j2.doubled(),
        j3.doubled(),
        m1.doubled(),
        m2.doubled(),
        m3.doubled(),
    ];
    if key[..3].iter().all(|&tj| tj <= SMALL_TABLE_MAX_DOUBLED) {
        // All valid small arguments are present in the table by construction.
        return Ok(*SMALL_TABLE
            .get(&key)
            .expect("small-j table covers every valid argument"));
    }
    Ok(racah_3j(key))
}

/// Integer-argument convenience wrapper around [`wigner_3j`].
pub fn wigner_3j_int(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> Result<f64> {
    wigner_3j(
        HalfInt::integer(j1),
        HalfInt::integer(j2),
        HalfInt::integer(j3),
        HalfInt::integer(m1),
        HalfInt::integer(m2),
        HalfInt::integer(m3),
    )
}

const SMALL_TABLE_MAX_DOUBLED: i32 = 4;

/// Fixed table of every valid 3j with all j <= 2, built once on first use.
static SMALL_TABLE: LazyLock<HashMap<[i32; 6], f64>> = LazyLock::new(|| {
    let mut table = HashMap::new();
    for tj1 in 0..=SMALL_TABLE_MAX_DOUBLED {
        for tj2 in 0..=SMALL_TABLE_MAX_DOUBLED {
            for tj3 in 0..=SMALL_TABLE_MAX_DOUBLED {
                for tm1 in ladder(tj1) {
                    for tm2 in ladder(tj2) {
                        for tm3 in ladder(tj3) {
                            let key = [tj1, tj2, tj3, tm1, tm2, tm3];
                            table.insert(key, racah_3j(key));
                        }
                    }
                }
            }
        }
    }
    table
});

/// m-ladder of a doubled j: -2j, -2j + 2, ..., 2j.
fn ladder(two_j: i32) -> impl Iterator<Item = i32> {
    (-two_j..=two_j).step_by(2)
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::one();
    for k in 2..=i64::from(n) {
        acc *= k;
    }
    acc
}

/// Halve a doubled combination that selection rules guarantee to be even.
fn half(two_x: i32) -> i32 {
    debug_assert!(two_x % 2 == 0, "odd doubled combination after validation");
    two_x / 2
}

/// Core Racah evaluation on validated doubled arguments.
fn racah_3j(key: [i32; 6]) -> f64 {
    let [tj1, tj2, tj3, tm1, tm2, tm3] = key;
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    if (tj1 + tj2 + tj3) % 2 != 0 || tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() {
        return 0.0;
    }

    // Racah series bounds; every factorial argument is integer here.
    let a1 = half(tj1 + tj2 - tj3);
    let a2 = half(tj1 - tm1);
    let a3 = half(tj2 + tm2);
    let b1 = half(tj3 - tj2 + tm1);
    let b2 = half(tj3 - tj1 - tm2);
    let t_min = 0.max(-b1).max(-b2);
    let t_max = a1.min(a2).min(a3);
    if t_min > t_max {
        return 0.0;
    }

    // S = sum_t (-1)^t / (t! (a1-t)! (a2-t)! (a3-t)! (b1+t)! (b2+t)!),
    // accumulated as an exact reduced fraction.
    let mut s_num = BigInt::zero();
    let mut s_den = BigInt::one();
    for t in t_min..=t_max {
        let d = factorial(t)
            * factorial(a1 - t)
            * factorial(a2 - t)
            * factorial(a3 - t)
            * factorial(b1 + t)
            * factorial(b2 + t);
        // s += (-1)^t / d
        s_num = &s_num * &d + if t % 2 == 0 { &s_den * 1 } else { &s_den * -1 };
        s_den *= &d;
        let g = s_num.gcd(&s_den);
        if !g.is_one() && !g.is_zero() {
            s_num /= &g;
            s_den /= &g;
        }
    }
    if s_num.is_zero() {
        return 0.0;
    }

    // D * P as an exact fraction.
    let dp_num = factorial(half(tj1 + tj2 - tj3))
        * factorial(half(tj1 - tj2 + tj3))
        * factorial(half(-tj1 + tj2 + tj3))
        * factorial(half(tj1 + tm1))
        * factorial(half(tj1 - tm1))
        * factorial(half(tj2 + tm2))
        * factorial(half(tj2 - tm2))
        * factorial(half(tj3 + tm3))
        * factorial(half(tj3 - tm3));
    let dp_den = factorial(half(tj1 + tj2 + tj3) + 1);

    // 3j^2 = D * P * S^2, reduced before the final conversion.
    let mut sq_num = dp_num * (&s_num * &s_num);
    let mut sq_den = dp_den * (&s_den * &s_den);
    let g = sq_num.gcd(&sq_den);
    if !g.is_one() {
        sq_num /= &g;
        sq_den /= &g;
    }

    let negative = (half(tj1 - tj2 - tm3).rem_euclid(2) == 1) != s_num.is_negative();
    let magnitude = big_ratio_to_f64(&sq_num.abs(), &sq_den).sqrt();
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Convert a non-negative exact fraction to f64 without overflow, by scaling
/// both sides down to 63-bit mantissas and restoring a power-of-two exponent.
fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    debug_assert!(!num.is_negative() && den.is_positive());
    if num.is_zero() {
        return 0.0;
    }
    let scaled = |x: &BigInt| -> (f64, i64) {
        let bits = x.bits();
        if bits <= 63 {
            (x.to_f64().expect("63-bit int fits f64 exactly"), 0)
        } else {
            let shift = bits - 63;
            let top: BigInt = x >> shift;
            (top.to_f64().expect("63-bit int fits f64 exactly"), shift as i64)
        }
    };
    let (mn, en) = scaled(num);
    let (md, ed) = scaled(den);
    (mn / md) * 2f64.powi((en - ed) as i32)
}

/// Electric-dipole selection rules for a symmetric-top transition driven by a
/// field of helicity `sigma`, through the molecule-frame spherical dipole
/// component `sigma_prime`:
///
/// * Delta J in {0, +-1}, with J = 0 -> J = 0 excluded;
/// * Delta M = M_upper - M_lower = sigma;
/// * Delta K = K_upper - K_lower = sigma_prime.
///
/// These conditions are exactly the structural non-vanishing of the two 3j
/// factors in the general coupling formula (the projection sum rules and the
/// triangle rule with the photon's unit angular momentum).
pub fn dipole_transition_allowed(
    lower: &RotationalKet,
    upper: &RotationalKet,
    sigma: Spherical,
    sigma_prime: Spherical,
) -> bool {
    let dj = upper.j() as i32 - lower.j() as i32;
    if dj.abs() > 1 || (upper.j() == 0 && lower.j() == 0) {
        return false;
    }
    upper.m() - lower.m() == sigma.signed() && upper.k() - lower.k() == sigma_prime.signed()
}
