//! Integer-order Bessel functions of the first kind by Miller's downward
//! recurrence.
//!
//! The recurrence J_{k-1} = (2k/x) J_k − J_{k+1} is run downward from an
//! order well above both the requested order and |x|, starting from an
//! arbitrary seed. The unnormalized sequence is then scaled so that
//! J_0² + 2 Σ_{k≥1} J_k² = 1, with the overall sign fixed by
//! J_0 + 2 Σ_{k≥1} J_{2k} = 1.

use crate::error::{Error, Result};

/// Largest |x| the evaluator is validated for.
pub const MAX_ARGUMENT: f64 = 700.0;

const RESCALE_THRESHOLD: f64 = 1e100;

fn start_order(max_order: usize, x: f64) -> usize {
    let n = max_order.max(x.ceil() as usize) as f64;
    let m = (n + (60.0 * n).sqrt() + 20.0).ceil() as usize;
    m + (m & 1)
}

/// J_0(x) .. J_{max_order}(x).
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::BesselRange(x));
    }
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let ax = x.abs();
    let m = start_order(max_order, ax);

    let mut next = 0.0; // J_{k+1}
    let mut current = 1e-30; // J_k, arbitrary seed at k = m
    let mut sum_sq = 0.0; // Σ_{k≥1} J_k²
    let mut sum_even = 0.0; // Σ_{k≥1} J_{2k}
    let two_over_x = 2.0 / ax;
    for k in (1..=m).rev() {
        if k <= max_order {
            out[k] = current;
        }
        sum_sq += current * current;
        if k % 2 == 0 {
            sum_even += current;
        }
        let previous = (k as f64) * two_over_x * current - next;
        next = current;
        current = previous;
        if current.abs() > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            current *= s;
            next *= s;
            sum_even *= s;
            sum_sq *= s * s;
            for v in out.iter_mut().skip(k.min(max_order + 1)) {
                *v *= s;
            }
        }
    }
    out[0] = current;
    let norm = (current * current + 2.0 * sum_sq).sqrt();
    let sign = if current + 2.0 * sum_even >= 0.0 { 1.0 } else { -1.0 };
    let scale = sign / norm;
    for v in out.iter_mut() {
        *v *= scale;
    }
    if x < 0.0 {
        // J_k(−x) = (−1)^k J_k(x)
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    Ok(out)
}

/// J_order(x) for any integer order, using J_{−n} = (−1)^n J_n.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    let n = order.unsigned_abs() as usize;
    let j = bessel_j_sequence(n, x)?[n];
    Ok(if order < 0 && n % 2 == 1 { -j } else { j })
}
