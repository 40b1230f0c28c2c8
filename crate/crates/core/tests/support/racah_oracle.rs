//! Exact-rational Wigner 3j oracle.
//!
//! Evaluates the Racah single-sum expression entirely in `BigRational`
//! arithmetic and returns the pair (sign, squared value) so callers can take
//! the square root at the very last step. Quantum numbers are passed doubled
//! (two_j = 2j) so half-integers stay exact. This module deliberately shares
//! no code with `esst_core::angular`; it is the independent route.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn factorial(n: i64) -> BigInt {
    assert!(n >= 0, "factorial of negative argument");
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Halve a doubled quantum-number combination, asserting it is even.
fn half(two_x: i64) -> i64 {
    assert!(two_x % 2 == 0, "non-integer combination in oracle");
    two_x / 2
}

/// Exact 3j value as (sign, square) with square a non-negative rational.
/// Returns (0, 0) for selection-rule zeros. Panics on malformed inputs;
/// the oracle is only ever called with arguments already known to be valid.
pub fn three_j_sign_square(two_j: [i64; 3], two_m: [i64; 3]) -> (i32, BigRational) {
    let [tj1, tj2, tj3] = two_j;
    let [tm1, tm2, tm3] = two_m;
    for i in 0..3 {
        assert!(two_j[i] >= 0 && two_m[i].abs() <= two_j[i]);
        assert!((two_j[i] - two_m[i]) % 2 == 0);
    }
    if tm1 + tm2 + tm3 != 0 {
        return (0, BigRational::zero());
    }
    // Triangle rule, including integer perimeter.
    if (tj1 + tj2 + tj3) % 2 != 0
        || tj3 > tj1 + tj2
        || tj3 < (tj1 - tj2).abs()
    {
        return (0, BigRational::zero());
    }

    // Racah sum over t, all arguments integer once selection rules hold.
    let a1 = half(tj1 + tj2 - tj3);
    let a2 = half(tj1 - tm1);
    let a3 = half(tj2 + tm2);
    let b1 = half(tj3 - tj2 + tm1);
    let b2 = half(tj3 - tj1 - tm2);
    let t_min = 0.max(-b1).max(-b2);
    let t_max = a1.min(a2).min(a3);
    if t_min > t_max {
        return (0, BigRational::zero());
    }
    let mut series = BigRational::zero();
    for t in t_min..=t_max {
        let den = factorial(t)
            * factorial(a1 - t)
            * factorial(a2 - t)
            * factorial(a3 - t)
            * factorial(b1 + t)
            * factorial(b2 + t);
        let term = BigRational::new(BigInt::one(), den);
        if t % 2 == 0 {
            series += term;
        } else {
            series -= term;
        }
    }

    let triangle = BigRational::new(
        factorial(half(tj1 + tj2 - tj3))
            * factorial(half(tj1 - tj2 + tj3))
            * factorial(half(-tj1 + tj2 + tj3)),
        factorial(half(tj1 + tj2 + tj3) + 1),
    );
    let plateau = factorial(half(tj1 + tm1))
        * factorial(half(tj1 - tm1))
        * factorial(half(tj2 + tm2))
        * factorial(half(tj2 - tm2))
        * factorial(half(tj3 + tm3))
        * factorial(half(tj3 - tm3));

    let phase_exp = half(tj1 - tj2 - tm3).rem_euclid(2);
    let mut sign = if phase_exp == 0 { 1 } else { -1 };
    if series.is_negative() {
        sign = -sign;
    } else if series.is_zero() {
        sign = 0;
    }
    let square = triangle * BigRational::from_integer(plateau) * (&series * &series);
    (sign, square)
}

/// 3j value rounded to f64 at the last moment.
pub fn three_j(two_j: [i64; 3], two_m: [i64; 3]) -> f64 {
    let (sign, square) = three_j_sign_square(two_j, two_m);
    if sign == 0 {
        return 0.0;
    }
    let v = square
        .to_f64()
        .expect("oracle square should be representable");
    (sign as f64) * v.sqrt()
}
