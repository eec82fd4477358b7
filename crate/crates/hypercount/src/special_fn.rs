//! Truncated exponentials `f_k`, shifted exponentials `g_k` and the entropy
//! helper `h(x) = x ln(xn) - x`.

use crate::{Error, Result};

/// Largest `k` accepted by [`f_k`].
pub const MAX_K: u32 = 8;

/// `f_k(λ) = e^λ - Σ_{i<k} λ^i / i!`.
///
/// For `λ < k` the value is summed from the forward series `Σ_{i≥k} λ^i/i!`
/// to avoid cancellation; otherwise the partial sum is subtracted from `e^λ`.
pub fn f_k(k: u32, lambda: f64) -> Result<f64> {
    if k > MAX_K {
        return Err(Error::domain(format!("f_k: k = {k} exceeds {MAX_K}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "f_k: lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(fk(k as i32, lambda))
}

/// Unchecked `f_k` used in inner loops. Negative `k` is read as `k = 0`.
pub(crate) fn fk(k: i32, lambda: f64) -> f64 {
    if k <= 0 {
        return lambda.exp();
    }
    if lambda < k as f64 {
        series_tail(k as u32, lambda)
    } else {
        let mut term = 1.0;
        let mut partial = 0.0;
        for i in 0..k {
            if i > 0 {
                term *= lambda / i as f64;
            }
            partial += term;
        }
        lambda.exp() - partial
    }
}

fn series_tail(k: u32, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    // λ^k / k! computed in log space so tiny λ does not underflow early.
    let mut term = (k as f64 * lambda.ln() - ln_factorial_small(k)).exp();
    let mut sum = term;
    let mut i = k;
    loop {
        i += 1;
        term *= lambda / i as f64;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn ln_factorial_small(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `g_k(λ) = e^λ + k`. Overflow returns `+∞`.
pub fn g_k(k: u32, lambda: f64) -> f64 {
    lambda.exp() + k as f64
}

/// `h(x) = x ln(xn) - x` with `h(0) = 0`.
pub fn h_entropy(x: f64, n: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("h: x must be nonnegative, got {x}")));
    }
    if !(n > 0.0) {
        return Err(Error::domain(format!("h: n must be positive, got {n}")));
    }
    Ok(h(x, n))
}

/// Unchecked `h`.
pub(crate) fn h(x: f64, n: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x * n).ln() - x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert_eq!(f_k(1, 0.0).unwrap(), 0.0);
        assert!((f_k(0, 2.0).unwrap() - 2f64.exp()).abs() < 1e-15);
        assert_eq!(g_k(1, 0.0), 2.0);
        assert_eq!(g_k(2, 0.0), 3.0);
        assert_eq!(h_entropy(0.0, 100.0).unwrap(), 0.0);
        assert_eq!(h_entropy(1.0, 1.0).unwrap(), -1.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(f_k(2, -1.0).is_err());
        assert!(f_k(9, 1.0).is_err());
        assert!(h_entropy(-0.5, 3.0).is_err());
    }

    #[test]
    fn tiny_lambda_does_not_underflow_to_zero() {
        let v = fk(3, 1e-100);
        assert!(v > 0.0 && ((v / (1e-300 / 6.0)) - 1.0).abs() < 1e-12);
    }
}
