use qstate_core::Real;

use crate::EntropicError;

/// `η(x) = -x ln x`, with `η(0) = 0`. Nonpositive input returns 0.
pub fn eta<T: Real>(x: T) -> T {
    if x > T::zero() {
        -x * x.ln()
    } else {
        T::zero()
    }
}

/// `h₂(p) = η(p) + η(1 - p)`.
pub fn binary_entropy<T: Real>(p: T) -> Result<T, EntropicError> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(EntropicError::Domain { function: "h2", value: p.as_f64() });
    }
    Ok(eta(p) + eta(T::one() - p))
}

/// `g(x) = (x + 1) ln(x + 1) - x ln x`, with `g(0) = 0`.
pub fn g_fn<T: Real>(x: T) -> Result<T, EntropicError> {
    if !(x >= T::zero()) {
        return Err(EntropicError::Domain { function: "g", value: x.as_f64() });
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    Ok((x + one) * x.ln_1p() - x * x.ln())
}

/// Shannon entropy of a probability vector (nats).
pub fn shannon<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |acc, &x| acc + eta(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h2_values() {
        assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0f64).unwrap(), 0.0);
        assert!((binary_entropy(0.5f64).unwrap() - 2f64.ln()).abs() < 1e-15);
        // -0.25 ln 0.25 - 0.75 ln 0.75 = 0.5623351446188083
        assert!((binary_entropy(0.25f64).unwrap() - 0.562_335_144_618_808_3).abs() < 1e-15);
        assert!(binary_entropy(1.5f64).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn g_values() {
        assert_eq!(g_fn(0.0f64).unwrap(), 0.0);
        assert!((g_fn(1.0f64).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
        // 1.1 ln 1.1 + 0.1 ln 10 = 0.335099707084162...
        assert!((g_fn(0.1f64).unwrap() - 0.335_099_707_084_162).abs() < 1e-14);
        assert!(g_fn(-0.1f64).is_err());
    }

    #[test]
    fn g_is_h2_scaled() {
        for i in 1..100 {
            let x = i as f64 / 10.0;
            let via_h2 = (x + 1.0) * binary_entropy(x / (x + 1.0)).unwrap();
            assert!((g_fn(x).unwrap() - via_h2).abs() < 1e-12);
        }
    }
}
