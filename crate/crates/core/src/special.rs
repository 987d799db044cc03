//! Hermite and Laguerre polynomials, factorial-type quantities and the
//! harmonic-oscillator eigenfunctions in coordinate and momentum form.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UdmError};

/// Default highest polynomial order accepted by the evaluators.
pub const DEFAULT_MAX_ORDER: usize = 64;

/// Physical constants of the reference oscillator.
///
/// Only ħ, m and ω are stored; the inverse length κ = √(mω/ħ) is recomputed
/// on every call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorParams {
    hbar: f64,
    mass: f64,
    omega: f64,
}

impl OscillatorParams {
    pub fn new(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("omega", omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(UdmError::InvalidParameter(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(Self { hbar, mass, omega })
    }

    /// ħ = m = ω = 1.
    pub const fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0, omega: 1.0 }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn kappa(&self) -> f64 {
        (self.mass * self.omega / self.hbar).sqrt()
    }

    /// Copy with ħ scaled by `factor`. Used by the verification canary.
    pub fn with_hbar_scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.hbar * factor, self.mass, self.omega)
    }
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self::natural()
    }
}

impl<'de> Deserialize<'de> for OscillatorParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            #[serde(default = "one")]
            hbar: f64,
            #[serde(default = "one")]
            mass: f64,
            #[serde(default = "one")]
            omega: f64,
        }
        fn one() -> f64 {
            1.0
        }
        let raw = Raw::deserialize(d)?;
        OscillatorParams::new(raw.hbar, raw.mass, raw.omega).map_err(serde::de::Error::custom)
    }
}

/// Upper bound on polynomial orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderLimit(pub usize);

impl Default for OrderLimit {
    fn default() -> Self {
        OrderLimit(DEFAULT_MAX_ORDER)
    }
}

impl OrderLimit {
    pub fn check(&self, order: usize) -> Result<()> {
        if order > self.0 {
            Err(UdmError::OrderOverflow { order, max: self.0 })
        } else {
            Ok(())
        }
    }

    pub fn hermite(&self, n: usize, x: f64) -> Result<f64> {
        self.check(n)?;
        Ok(hermite_unchecked(n, x))
    }

    pub fn laguerre(&self, n: usize, x: f64) -> Result<f64> {
        self.check(n)?;
        Ok(laguerre_unchecked(n, x))
    }
}

/// Physicists' Hermite polynomial Hₙ(x) by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    OrderLimit::default().hermite(n, x)
}

fn hermite_unchecked(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for j in 1..n {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Hₙ(z) for complex argument; same recurrence as [`hermite`].
pub fn hermite_complex(n: usize, z: Complex64) -> Result<Complex64> {
    OrderLimit::default().check(n)?;
    let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), 2.0 * z);
    if n == 0 {
        return Ok(prev);
    }
    for j in 1..n {
        let next = 2.0 * z * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Laguerre polynomial Lₙ(x) via (n+1)Lₙ₊₁ = (2n+1−x)Lₙ − nLₙ₋₁.
pub fn laguerre(n: usize, x: f64) -> Result<f64> {
    OrderLimit::default().laguerre(n, x)
}

fn laguerre_unchecked(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return prev;
    }
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 - x) * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Lₙ(z) for complex argument.
pub fn laguerre_complex(n: usize, z: Complex64) -> Result<Complex64> {
    OrderLimit::default().check(n)?;
    let one = Complex64::new(1.0, 0.0);
    let (mut prev, mut cur) = (one, one - z);
    if n == 0 {
        return Ok(prev);
    }
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 - z) * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// ln(n!).
///
/// Up to 170 the factorial is accumulated exactly enough in f64 that its
/// logarithm carries a relative error well below 1e-14; above that a
/// Stirling series is used.
pub fn log_factorial(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 170 {
        let mut acc = 1.0f64;
        for j in 2..=n {
            acc *= j as f64;
        }
        return acc.ln();
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// |k|!! for odd k, with (−1)!! = 1.
pub fn odd_double_factorial(k: i64) -> Result<f64> {
    if k == -1 {
        return Ok(1.0);
    }
    if k < -1 || k % 2 == 0 {
        return Err(UdmError::EvenDoubleFactorial(k));
    }
    let mut acc = 1.0;
    let mut j = k;
    while j > 1 {
        acc *= j as f64;
        j -= 2;
    }
    Ok(acc)
}

/// Normalized Hermite functions ψ₀(ξ)…ψₙ(ξ), ψₙ(ξ) = Hₙ(ξ)e^{−ξ²/2}/√(2ⁿn!√π).
///
/// The recurrence never forms Hₙ itself, so nothing overflows for the
/// orders and ranges used here.
pub fn hermite_functions(n_max: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let psi0 = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(psi0);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * xi * psi0);
    for j in 1..n_max {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * xi * out[j] - (jf / (jf + 1.0)).sqrt() * out[j - 1];
        out.push(next);
    }
    out
}

fn hermite_function(n: usize, xi: f64) -> f64 {
    hermite_functions(n, xi)[n]
}

/// Coordinate-space eigenfunction Ψₙ(x).
pub fn eigenfunction_x(n: usize, x: f64, params: &OscillatorParams) -> Result<f64> {
    OrderLimit::default().check(n)?;
    let kappa = params.kappa();
    Ok(kappa.sqrt() * hermite_function(n, kappa * x))
}

/// Momentum-space eigenfunction Ψ̃ₙ(p), including the (−i)ⁿ phase.
pub fn eigenfunction_p(n: usize, p: f64, params: &OscillatorParams) -> Result<Complex64> {
    OrderLimit::default().check(n)?;
    let scale = params.hbar() * params.kappa();
    let magnitude = hermite_function(n, p / scale) / scale.sqrt();
    Ok(minus_i_pow(n) * magnitude)
}

/// (−i)ⁿ.
pub fn minus_i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn int_factorial(n: usize) -> i128 {
        (1..=n as i128).product()
    }

    /// 4ⁿ Hₙ(q/4) as an exact integer from the explicit sum.
    fn hermite_explicit_quarter(n: usize, q: i128) -> i128 {
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1 } else { -1 };
                sign * int_factorial(n) / (int_factorial(m) * int_factorial(n - 2 * m))
                    * (2 * q).pow((n - 2 * m) as u32)
                    * 16i128.pow(m as u32)
            })
            .sum()
    }

    /// n! 4ⁿ Lₙ(q/4) as an exact integer from Σ_k C(n,k)(−x)^k/k!.
    fn laguerre_explicit_quarter(n: usize, q: i128) -> i128 {
        (0..=n)
            .map(|k| {
                let binom = int_factorial(n) / (int_factorial(k) * int_factorial(n - k));
                binom * (-q).pow(k as u32) * 4i128.pow((n - k) as u32) * int_factorial(n)
                    / int_factorial(k)
            })
            .sum()
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0, 0.7).unwrap(), 1.0);
        assert_eq!(hermite(1, 0.5).unwrap(), 1.0);
        assert_eq!(hermite(4, 1.0).unwrap(), -20.0);
        assert_eq!(hermite(4, 1.0).unwrap(), 16.0 - 48.0 + 12.0);
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre(0, 3.2).unwrap(), 1.0);
        assert_eq!(laguerre(1, 2.0).unwrap(), -1.0);
        assert_relative_eq!(laguerre(2, 4.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_overflow() {
        assert_eq!(
            hermite(65, 0.1),
            Err(UdmError::OrderOverflow { order: 65, max: 64 })
        );
        assert!(laguerre(65, 0.1).is_err());
        assert!(OrderLimit(100).hermite(80, 0.1).is_ok());
        assert!(eigenfunction_x(65, 0.0, &OscillatorParams::natural()).is_err());
    }

    #[test]
    fn recurrence_matches_explicit_sums() {
        for n in 0..=12 {
            for q in -20i128..=20 {
                let x = q as f64 / 4.0;
                let h = hermite(n, x).unwrap();
                let he = hermite_explicit_quarter(n, q) as f64 / 4f64.powi(n as i32);
                assert!((h - he).abs() <= 1e-12 * he.abs().max(1.0), "H{n}({x})");
                let l = laguerre(n, x).unwrap();
                let le = laguerre_explicit_quarter(n, q) as f64
                    / (int_factorial(n) as f64 * 4f64.powi(n as i32));
                assert!((l - le).abs() <= 1e-12 * le.abs().max(1.0), "L{n}({x})");
            }
        }
    }

    #[test]
    fn log_factorial_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        assert_relative_eq!(log_factorial(10), 3628800f64.ln(), max_relative = 1e-14);
        // continuity across the switch to the asymptotic series
        let l170 = log_factorial(170);
        let l171 = log_factorial(171);
        assert_relative_eq!(l171 - l170, 171f64.ln(), max_relative = 1e-12);
        let l172 = log_factorial(172);
        assert_relative_eq!(l172 - l171, 172f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn double_factorials() {
        assert_eq!(odd_double_factorial(-1).unwrap(), 1.0);
        assert_eq!(odd_double_factorial(1).unwrap(), 1.0);
        assert_eq!(odd_double_factorial(5).unwrap(), 15.0);
        assert!(odd_double_factorial(4).is_err());
        assert!(odd_double_factorial(0).is_err());
        assert!(odd_double_factorial(-3).is_err());
    }

    #[test]
    fn eigenfunction_examples() {
        let unit = OscillatorParams::natural();
        let q = PI.powf(-0.25);
        assert_relative_eq!(eigenfunction_x(0, 0.0, &unit).unwrap(), q, max_relative = 1e-15);
        assert_eq!(eigenfunction_x(1, 0.0, &unit).unwrap(), 0.0);
        assert_relative_eq!(
            eigenfunction_x(2, 0.0, &unit).unwrap(),
            -q / 2f64.sqrt(),
            max_relative = 1e-15
        );
        let p0 = eigenfunction_p(0, 0.0, &unit).unwrap();
        assert_relative_eq!(p0.re, q, max_relative = 1e-15);
        assert_eq!(eigenfunction_p(1, 0.0, &unit).unwrap().norm(), 0.0);
        let p2 = eigenfunction_p(2, 0.0, &unit).unwrap();
        assert_relative_eq!(p2.re, q / 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(p2.im, 0.0);
    }

    #[test]
    fn eigenfunction_matches_formula_with_units() {
        let params = OscillatorParams::new(0.7, 1.9, 2.3).unwrap();
        let kappa = params.kappa();
        assert_relative_eq!(kappa * kappa, 1.9 * 2.3 / 0.7, max_relative = 1e-15);
        for n in 0..8 {
            for &x in &[-1.3, 0.2, 0.9] {
                let direct = (params.mass() * params.omega() / (PI * params.hbar())).powf(0.25)
                    * (-params.mass() * params.omega() * x * x / (2.0 * params.hbar())).exp()
                    * hermite(n, kappa * x).unwrap()
                    / ((2f64.powi(n as i32)) * log_factorial(n).exp()).sqrt();
                assert_relative_eq!(
                    eigenfunction_x(n, x, &params).unwrap(),
                    direct,
                    max_relative = 1e-12,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn no_overflow_at_high_order() {
        let unit = OscillatorParams::natural();
        for n in [30, 50, 64] {
            for &x in &[-20.0, -7.5, 0.0, 3.3, 20.0] {
                let v = eigenfunction_x(n, x, &unit).unwrap();
                assert!(v.is_finite());
                assert!(v.abs() < 1.0);
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(OscillatorParams::new(0.0, 1.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, -1.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, 1.0, f64::NAN).is_err());
        let p: OscillatorParams = serde_json::from_str(r#"{"hbar": 2.0}"#).unwrap();
        assert_eq!(p.mass(), 1.0);
        assert!(serde_json::from_str::<OscillatorParams>(r#"{"hbar": -2.0}"#).is_err());
    }
}
