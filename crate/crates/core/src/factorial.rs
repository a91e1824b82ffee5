//! Factorial-scale numerics.
//!
//! Every √(m!/n!) and binomial in the dyad formulas goes through the log
//! domain so that intermediate factorials never have to be finite.

const FACTORIALS: [u64; 21] = [
    1,
    1,
    2,
    6,
    24,
    120,
    720,
    5040,
    40320,
    362880,
    3628800,
    39916800,
    479001600,
    6227020800,
    87178291200,
    1307674368000,
    20922789888000,
    355687428096000,
    6402373705728000,
    121645100408832000,
    2432902008176640000,
];

// 0.5 * ln(2π)
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// ln(n!). Exact table lookup for n ≤ 20, Stirling series beyond.
pub fn log_factorial(n: usize) -> f64 {
    if n < FACTORIALS.len() {
        return libm::log(FACTORIALS[n] as f64);
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli terms 1/12n - 1/360n^3 + 1/1260n^5 - 1/1680n^7; next term is < 1e-15 · ln(21!)
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * libm::log(x) - x + 0.5 * libm::log(x) + HALF_LN_TWO_PI + series
}

/// √(m!/n!) evaluated as exp(½(ln m! − ln n!)).
pub fn sqrt_factorial_ratio(m: usize, n: usize) -> f64 {
    if m == n {
        return 1.0;
    }
    libm::exp(0.5 * (log_factorial(m) - log_factorial(n)))
}

/// ln C(n, k) for 0 ≤ k ≤ n. Binomials of nonnegative integers are
/// positive, so the log carries no sign.
pub fn log_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    log_factorial(n) - log_factorial(k) - log_factorial(n - k)
}
