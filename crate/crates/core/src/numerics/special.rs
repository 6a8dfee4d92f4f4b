//! Gamma function and Bessel functions of the first kind.
//!
//! Bessel values are produced by Miller's downward recurrence, normalized
//! with the Neumann-type sum
//!
//! ```text
//! (x/2)^v = sum_{m>=0} (v + 2m) Gamma(v + m) / m! * J_{v+2m}(x)
//! ```
//!
//! which reduces to `1 = J_0 + 2 sum J_{2m}` for integer base order. The
//! recurrence runs downward from an order well above `max(n, x)`, where
//! it is stable.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument accepted by [`gamma`].
pub const GAMMA_MAX_ARG: f64 = 171.0;
/// Largest argument accepted by the Bessel routines.
pub const BESSEL_MAX_ARG: f64 = 1000.0;
/// Largest order accepted by the Bessel routines.
pub const BESSEL_MAX_ORDER: f64 = 200.0;

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        // split the power to avoid overflow near the top of the range
        let half = t.powf(0.5 * (x + 0.5));
        (2.0 * std::f64::consts::PI).sqrt() * half * (-t).exp() * half * acc
    }
}

/// Gamma function for positive real arguments (Lanczos, g = 7, 9 terms).
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Domain(format!("gamma overflows for x = {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn check_bessel_args(order: f64, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j requires x >= 0, got {x}")));
    }
    if x > BESSEL_MAX_ARG {
        return Err(Error::Domain(format!("bessel_j argument {x} exceeds {BESSEL_MAX_ARG}")));
    }
    if !order.is_finite() || order <= -1.0 || order > BESSEL_MAX_ORDER {
        return Err(Error::Unsupported(format!("bessel_j order {order}")));
    }
    Ok(())
}

/// `J_order(x)` for real `order > -1` and `0 <= x <= 1000`.
pub fn bessel_j(order: f64, x: f64) -> Result<f64> {
    check_bessel_args(order, x)?;
    let (base, offset) = split_order(order);
    Ok(bessel_sequence_unchecked(base, offset, x)[offset])
}

/// Integer-order values `J_0(x), ..., J_max_n(x)` from a single recurrence.
pub fn bessel_j_integer_orders(max_n: usize, x: f64) -> Result<Vec<f64>> {
    check_bessel_args(max_n as f64, x)?;
    Ok(bessel_sequence_unchecked(0.0, max_n, x))
}

/// Values `J_{base+n}(x)` for `n = 0..=count` where `base` is in `(-1, 1)`.
pub fn bessel_j_sequence(base: f64, count: usize, x: f64) -> Result<Vec<f64>> {
    if !(base > -1.0 && base < 1.0) {
        return Err(Error::Unsupported(format!("sequence base order {base} not in (-1,1)")));
    }
    check_bessel_args(base + count as f64, x)?;
    Ok(bessel_sequence_unchecked(base, count, x))
}

/// Derivative `J'_order(x) = (J_{order-1}(x) - J_{order+1}(x)) / 2`.
///
/// For `order = 0` this is `-J_1(x)`. Fractional orders in `(0, 1)` need
/// `J_{order-1}` with negative order, which the recurrence supplies.
pub fn bessel_j_derivative(order: f64, x: f64) -> Result<f64> {
    if order == 0.0 {
        return Ok(-bessel_j(1.0, x)?);
    }
    check_bessel_args(order, x)?;
    let lower = order - 1.0;
    if lower > -1.0 {
        let (base, offset) = split_order(lower);
        let seq = bessel_sequence_unchecked(base, offset + 2, x);
        return Ok(0.5 * (seq[offset] - seq[offset + 2]));
    }
    // order in (-1, 0): J_{order-1} from the upward step of the recurrence
    if x == 0.0 {
        return Err(Error::Domain("derivative of negative fractional order at 0".into()));
    }
    let seq = bessel_sequence_unchecked(order, 1, x);
    let below = (2.0 * order / x) * seq[0] - seq[1];
    Ok(0.5 * (below - seq[1]))
}

fn split_order(order: f64) -> (f64, usize) {
    if order < 0.0 {
        (order, 0)
    } else {
        let floor = order.floor();
        (order - floor, floor as usize)
    }
}

/// Miller recurrence returning `J_{base+n}(x)` for `n = 0..=count`.
///
/// `base` in `(-1, 1)`; arguments are assumed validated.
fn bessel_sequence_unchecked(base: f64, count: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; count + 1];
    if x == 0.0 {
        if base == 0.0 {
            out[0] = 1.0;
        } else if base < 0.0 {
            out[0] = f64::INFINITY;
        }
        return out;
    }
    let top = (count as f64).max(x);
    let mut start = top.ceil() as usize + 40 + (4.0 * top.sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    // Gamma(base + m) / m! for the normalization; m = 0 handled separately.
    let gamma_base_plus_one = gamma_unchecked(base + 1.0);
    // coefficients indexed by m = 1..=start/2
    let half = start / 2;
    let mut coeff = vec![0.0; half + 1];
    if half >= 1 {
        coeff[1] = gamma_base_plus_one;
        for m in 1..half {
            let mf = m as f64;
            coeff[m + 1] = coeff[m] * (base + mf) / (mf + 1.0);
        }
    }

    let mut next = 0.0; // j_{n+1}
    let mut cur = 1e-300; // j_n, n = start
    let mut norm = 0.0;
    let mut n = start;
    loop {
        if n <= count {
            out[n] = cur;
        }
        if n % 2 == 0 {
            let m = n / 2;
            let weight = if m == 0 {
                gamma_base_plus_one
            } else {
                (base + n as f64) * coeff[m]
            };
            norm += weight * cur;
        }
        if n == 0 {
            break;
        }
        let nu = base + n as f64;
        let prev = (2.0 * nu / x) * cur - next;
        next = cur;
        cur = prev;
        n -= 1;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut().skip(n + 1) {
                *v *= s;
            }
        }
    }
    let scale = (0.5 * x).powf(base) / norm;
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}
