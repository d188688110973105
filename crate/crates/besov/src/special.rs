//! Gamma-function helpers shared by coefficient multipliers and kernel
//! expansions.

use statrs::function::gamma::ln_gamma;

/// Gamma(b + 1 + k) / (Gamma(b + 1) * Gamma(k + 1)) for b > -1, k >= 0.
///
/// Computed through log-gamma differences so it stays finite far past the
/// k ~ 170 overflow point of the direct quotient. b = 0 and b = 1 are exact
/// because they feed the ordinary derivative path and must not inject noise.
pub fn frac_multiplier(b: f64, k: usize) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    if b == 1.0 {
        return (k + 1) as f64;
    }
    let kf = k as f64;
    (ln_gamma(b + 1.0 + kf) - ln_gamma(b + 1.0) - ln_gamma(kf + 1.0)).exp()
}

/// First `len` coefficients of (1 - w)^(-nu): c_m = Gamma(nu + m) / (Gamma(nu) m!).
///
/// The forward recurrence c_{m+1} = c_m (nu + m) / (m + 1) is exact in the
/// rationals and numerically stable for nu > 0.
pub fn binomial_series(nu: f64, len: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(len);
    if len == 0 {
        return c;
    }
    c.push(1.0);
    for m in 0..len - 1 {
        let prev = c[m];
        c.push(prev * (nu + m as f64) / (m as f64 + 1.0));
    }
    c
}

/// Euler Beta function B(a, b) for a, b > 0.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// pi * B(k + 1, a + 1): the disc moment  ∫ |z|^{2k} (1-|z|^2)^a dm(z).
pub fn disc_moment(a: f64, k: usize) -> f64 {
    std::f64::consts::PI * beta(k as f64 + 1.0, a + 1.0)
}
