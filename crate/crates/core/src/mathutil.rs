//! Small numeric helpers used by the analytic modules.
//!
//! Everything here works in log space where overflow is possible:
//! binomial coefficients enter block entries together with powers of
//! coefficients in (0,1), and only the combined exponent is safe to
//! exponentiate. The Fock oracle deliberately does not use this module.

/// ln Gamma(x) for x > 0, Lanczos approximation (g = 7, n = 9).
///
/// Absolute error is below 1e-13 over the range used here; integer
/// arguments up to ~1e6 round-trip through `ln_factorial` to full f64
/// precision of the ratio tests in this crate.
fn ln_gamma(x: f64) -> f64 {
    // Table values kept verbatim from the g = 7 coefficient set.
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// ln(n!) with a cached table for small n (the hot path: block builders
/// call this for every summand).
pub fn ln_factorial(n: usize) -> f64 {
    const TABLE_LEN: usize = 256;
    static TABLE: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; TABLE_LEN];
        let mut acc = 0.0f64;
        for (i, slot) in t.iter_mut().enumerate().skip(1) {
            acc += (i as f64).ln();
            *slot = acc;
        }
        t
    });
    if n < TABLE_LEN {
        table[n]
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// ln C(n, k); requires k <= n.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Exact multiplicative binomial; test-only reference for the
/// log-space route used by the block builders.
#[cfg(test)]
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Accumulates a product of factors base^exp in log space, tracking the
/// sign separately. `0^0` contributes 1; a zero base with positive
/// exponent collapses the whole product to zero.
#[derive(Debug, Clone, Copy)]
pub struct LogProduct {
    ln_mag: f64,
    sign: f64,
    zero: bool,
}

impl LogProduct {
    pub fn new() -> Self {
        LogProduct { ln_mag: 0.0, sign: 1.0, zero: false }
    }

    /// Multiply by `base^exp` for integer `exp >= 0`.
    pub fn pow(mut self, base: f64, exp: usize) -> Self {
        if exp == 0 || self.zero {
            return self;
        }
        if base == 0.0 {
            self.zero = true;
            return self;
        }
        if base < 0.0 && exp % 2 == 1 {
            self.sign = -self.sign;
        }
        self.ln_mag += exp as f64 * base.abs().ln();
        self
    }

    /// Multiply by a precomputed logarithm (e.g. `ln_binomial`).
    pub fn ln_term(mut self, ln_value: f64) -> Self {
        if !self.zero {
            self.ln_mag += ln_value;
        }
        self
    }

    pub fn value(self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.sign * self.ln_mag.exp()
        }
    }
}

impl Default for LogProduct {
    fn default() -> Self {
        Self::new()
    }
}

/// Relative-or-absolute closeness: |a-b| <= tol * max(1, |a|, |b|).
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
}

/// Infinity norm (max absolute row sum); bounds every eigenvalue.
pub(crate) fn inf_norm(m: &nalgebra::DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
