//! Arbitrary-precision reference values for the tail functions.
//!
//! Poisson tails use binary fixed point with at least 1024 significant bits
//! left in `exp(-mean)`; binomial
//! tails are exact rationals. Both are converted to `f64` only at the end.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn fraction_bits(mean: f64) -> u64 {
    1024 + (mean * std::f64::consts::LOG2_E).ceil() as u64
}

/// Rounds `num / den` (both positive) to the nearest representable f64.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    assert!(num.is_positive() && den.is_positive());
    // Scale so the integer quotient carries 80 significant bits.
    let shift = 80 + den.bits() as i64 - num.bits() as i64;
    let quotient = if shift >= 0 { (num << shift as u64) / den } else { num / (den << (-shift) as u64) };
    let q = quotient.to_f64().expect("quotient fits");
    q * 2f64.powi(-shift as i32)
}

fn fixed_to_f64(value: &BigInt, bits: u64) -> f64 {
    ratio_to_f64(value, &(BigInt::one() << bits))
}

/// `exp(p/q)` in fixed point.
fn exp_fixed(p: u64, q: u64, bits: u64) -> BigInt {
    let one = BigInt::one() << bits;
    let mut term = one.clone();
    let mut sum = one;
    let mut k = 1u64;
    loop {
        term = term * p / (BigInt::from(q) * k);
        if term.is_zero() {
            return sum;
        }
        sum += &term;
        k += 1;
    }
}

/// Poisson point probabilities `P(X = k)` for `k = 0..=upto`, mean `p/q`, fixed point.
fn poisson_terms(p: u64, q: u64, upto: u64, bits: u64) -> Vec<BigInt> {
    let one = BigInt::one() << bits;
    let mut term = (&one << bits) / exp_fixed(p, q, bits);
    let mut out = Vec::with_capacity(upto as usize + 1);
    out.push(term.clone());
    for k in 1..=upto {
        term = term * p / (BigInt::from(q) * k);
        out.push(term.clone());
    }
    out
}

/// `P(X <= k)` for `X ~ Poisson(p/q)`.
pub fn poisson_lower(p: u64, q: u64, k: u64) -> f64 {
    let bits = fraction_bits(p as f64 / q as f64);
    let sum: BigInt = poisson_terms(p, q, k, bits).into_iter().sum();
    fixed_to_f64(&sum, bits)
}

/// `P(X >= k)` for `X ~ Poisson(p/q)`, summed directly over the upper tail.
pub fn poisson_upper(p: u64, q: u64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mean = p as f64 / q as f64;
    let bits = fraction_bits(mean);
    // Far enough past both k and the mean that the remainder is negligible.
    let limit = k.max(mean as u64) + 400 + (60.0 * mean.sqrt()) as u64;
    let terms = poisson_terms(p, q, limit, bits);
    let sum: BigInt = terms.into_iter().skip(k as usize).sum();
    fixed_to_f64(&sum, bits)
}

fn choose(n: u64, k: u64) -> BigInt {
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Exact `P(X <= k)` or `P(X >= k)` for `X ~ Binomial(n, a/b)`.
pub fn binomial_tail_exact(n: u64, a: u64, b: u64, k: u64, upper: bool) -> f64 {
    let range: Box<dyn Iterator<Item = u64>> = if upper { Box::new(k..=n) } else { Box::new(0..=k.min(n)) };
    let mut num = BigInt::zero();
    for i in range {
        num += choose(n, i) * BigInt::from(a).pow(i as u32) * BigInt::from(b - a).pow((n - i) as u32);
    }
    ratio_to_f64(&num, &BigInt::from(b).pow(n as u32))
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}
