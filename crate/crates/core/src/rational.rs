//! Rational scalar type and a few exact comparison helpers.
//!
//! `Q` is a reduced fraction over `i128`. The coordinate data the crate
//! manipulates stays small (thresholds are inner products of lattice points
//! with primitive integer vectors), so `i128` numerators never get close to
//! overflow in practice.

use num_rational::Ratio;
use num_traits::{Signed, Zero};

pub type Q = Ratio<i128>;

/// Shorthand for an integer rational.
pub fn qi(n: i128) -> Q {
    Q::from_integer(n)
}

/// Shorthand for `n/d`.
pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// Smallest rational of the form `k/1024` that is >= sqrt(v), for v >= 0.
///
/// Used where a construction needs an upper bound on a Euclidean norm while
/// staying inside rational arithmetic. Exact when v is a perfect square of
/// a multiple of 1/1024 (in particular for integer squares).
pub fn sqrt_upper(v: Q) -> Q {
    assert!(!v.is_negative(), "sqrt_upper of negative value");
    if v.is_zero() {
        return Q::zero();
    }
    // Find smallest k with (k/1024)^2 >= v, i.e. k^2 >= v * 1024^2.
    let scaled = v * qi(1024 * 1024);
    // Integer ceiling square root of ceil(scaled).
    let target = scaled.ceil().to_integer();
    let mut k = isqrt(target);
    if k * k < target {
        k += 1;
    }
    // k*k >= target >= scaled, so (k/1024)^2 >= v.
    while (k - 1) * (k - 1) >= target && k > 1 {
        k -= 1;
    }
    q(k, 1024)
}

/// Integer square root (floor).
pub fn isqrt(n: i128) -> i128 {
    assert!(n >= 0);
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    // Fix up floating point error.
    while x > 0 && x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Exact test of `sqrt(a) <= b` for rationals a >= 0, arbitrary b.
pub fn sqrt_le(a: Q, b: Q) -> bool {
    assert!(!a.is_negative());
    if b.is_negative() {
        return false;
    }
    a <= b * b
}

/// Exact test of `sqrt(a) <= c + sqrt(b)` for rationals a, b >= 0, c >= 0.
///
/// Square once: a <= c^2 + b + 2 c sqrt(b). With t = a - c^2 - b the test
/// becomes t <= 0, or else t^2 <= 4 c^2 b.
pub fn sqrt_le_sum(a: Q, c: Q, b: Q) -> bool {
    assert!(!a.is_negative() && !b.is_negative() && !c.is_negative());
    let t = a - c * c - b;
    if !t.is_positive() {
        return true;
    }
    t * t <= qi(4) * c * c * b
}
