//! The two polynomial families carried by the universal density matrix:
//! the binomial polynomials 𝒫ₙ,ₖ(z₁, z₂) and the radial polynomials Υₙ,ₖ(x),
//! together with their closed-form Gaussian-weighted inner products.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::special::{log_factorial, OrderLimit};

/// Index pair (n, k) of a matrix element or polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolyIndexPair {
    pub n: usize,
    pub k: usize,
}

impl PolyIndexPair {
    /// Checked against the default order limit.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Self::with_limit(n, k, OrderLimit::default())
    }

    pub fn with_limit(n: usize, k: usize, limit: OrderLimit) -> Result<Self> {
        limit.check(n)?;
        limit.check(k)?;
        Ok(Self { n, k })
    }

    /// Winding number ϖ = n − k.
    pub fn winding(&self) -> i64 {
        self.n as i64 - self.k as i64
    }

    pub fn transposed(&self) -> Self {
        Self { n: self.k, k: self.n }
    }

    fn validate(&self) -> Result<()> {
        let limit = OrderLimit::default();
        limit.check(self.n)?;
        limit.check(self.k)
    }
}

/// ln of the prefactor √(2ⁿ⁺ᵏ n! k!).
fn log_root_prefactor(n: usize, k: usize) -> f64 {
    0.5 * ((n + k) as f64 * LN_2 + log_factorial(n) + log_factorial(k))
}

/// ln of 1/(2ˢ s! (k−s)! (n−s)!).
fn log_term_denominator(n: usize, k: usize, s: usize) -> f64 {
    -(s as f64 * LN_2 + log_factorial(s) + log_factorial(k - s) + log_factorial(n - s))
}

/// 𝒫ₙ,ₖ(z₁, z₂) = √(2ⁿ⁺ᵏn!k!) Σₛ z₁ⁿ⁻ˢ z₂ᵏ⁻ˢ / (2ˢ s!(k−s)!(n−s)!).
pub fn poly_p(pair: PolyIndexPair, z1: Complex64, z2: Complex64) -> Result<Complex64> {
    pair.validate()?;
    let PolyIndexPair { n, k } = pair;
    let pre = log_root_prefactor(n, k);
    let mut sum = Complex64::new(0.0, 0.0);
    for s in 0..=n.min(k) {
        let c = (pre + log_term_denominator(n, k, s)).exp();
        sum += c * z1.powu((n - s) as u32) * z2.powu((k - s) as u32);
    }
    Ok(sum)
}

/// Υₙ,ₖ(x) = √(2ⁿ⁺ᵏn!k!) Σₛ (−1)ˢ xⁿ⁺ᵏ⁻²ˢ / (2ˢ s!(k−s)!(n−s)!).
///
/// Only non-negative powers of x appear, so x = 0 is handled directly.
/// The index pair is put in canonical order first, which makes
/// Υₙ,ₖ = Υₖ,ₙ hold bit for bit.
pub fn poly_y(pair: PolyIndexPair, x: f64) -> Result<f64> {
    pair.validate()?;
    let (n, k) = (pair.n.min(pair.k), pair.n.max(pair.k));
    let pre = log_root_prefactor(n, k);
    let mut sum = 0.0;
    for s in 0..=n {
        let c = (pre + log_term_denominator(n, k, s)).exp();
        let term = c * x.powi((n + k - 2 * s) as i32);
        if s % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum)
}

/// Modified Kronecker symbol: 1 when n and k have equal parity.
pub fn mod_kronecker(n: usize, k: usize) -> u8 {
    u8::from(n % 2 == k % 2)
}

/// ln |m|!! for odd m ≥ −1.
fn log_odd_double_factorial(m: i64) -> f64 {
    debug_assert!(m >= -1 && (m == -1 || m % 2 == 1));
    if m <= 1 {
        return 0.0;
    }
    // (2j−1)!! = (2j)! / (2ʲ j!)
    let j = ((m + 1) / 2) as usize;
    log_factorial(2 * j) - j as f64 * LN_2 - log_factorial(j)
}

fn check_quadruple(idx: [usize; 4]) -> Result<()> {
    let limit = OrderLimit::default();
    idx.iter().try_for_each(|&i| limit.check(i))
}

/// Closed form of ∫∫ e^{−x²−y²} 𝒫ₙ₁,ₖ₁(x,y) 𝒫ₙ₂,ₖ₂(x,y) dx dy.
///
/// Zero when n₁+n₂ and k₁+k₂ differ in parity; otherwise only the
/// summands with s+l of the same parity as n₁+n₂ contribute.
pub fn norm_n2(n1: usize, k1: usize, n2: usize, k2: usize) -> Result<f64> {
    check_quadruple([n1, k1, n2, k2])?;
    let (n, k) = (n1 + n2, k1 + k2);
    if mod_kronecker(n, k) == 0 {
        return Ok(0.0);
    }
    let pre = 0.5 * (log_factorial(n1) + log_factorial(n2) + log_factorial(k1) + log_factorial(k2));
    let mut sum = 0.0;
    for s in 0..=n1.min(k1) {
        for l in 0..=n2.min(k2) {
            let lambda = s + l;
            if lambda % 2 != n % 2 {
                continue;
            }
            let log_num = log_odd_double_factorial(k as i64 - lambda as i64 - 1)
                + log_odd_double_factorial(n as i64 - lambda as i64 - 1);
            let log_den = log_factorial(s)
                + log_factorial(n1 - s)
                + log_factorial(k1 - s)
                + log_factorial(l)
                + log_factorial(n2 - l)
                + log_factorial(k2 - l);
            sum += (pre + log_num - log_den).exp();
        }
    }
    Ok(PI * sum)
}

/// Closed form of ∫ e^{−x²} Υₙ₁,ₖ₁(x) Υₙ₂,ₖ₂(x) dx.
///
/// The factorial-type factor in the numerator is the odd double factorial
/// of the Gaussian moment ∫e^{−x²}x^{2ν}dx = √π (2ν−1)!!/2^ν.
pub fn norm_n1(n1: usize, k1: usize, n2: usize, k2: usize) -> Result<f64> {
    check_quadruple([n1, k1, n2, k2])?;
    let (n, k) = (n1 + n2, k1 + k2);
    if mod_kronecker(n, k) == 0 {
        return Ok(0.0);
    }
    let pre = 0.5 * (log_factorial(n1) + log_factorial(n2) + log_factorial(k1) + log_factorial(k2));
    let mut sum = 0.0;
    for s in 0..=n1.min(k1) {
        for l in 0..=n2.min(k2) {
            let lambda = s + l;
            let log_num = log_odd_double_factorial((n + k) as i64 - 2 * lambda as i64 - 1);
            let log_den = log_factorial(s)
                + log_factorial(l)
                + log_factorial(k1 - s)
                + log_factorial(n1 - s)
                + log_factorial(k2 - l)
                + log_factorial(n2 - l);
            let term = (pre + log_num - log_den).exp();
            if lambda % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
    }
    Ok(PI.sqrt() * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::laguerre_complex;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pair(n: usize, k: usize) -> PolyIndexPair {
        PolyIndexPair::new(n, k).unwrap()
    }

    /// Derivative form: 1/√(2ⁿ⁺ᵏn!k!) Σₛ 1/(2ˢs!) ∂^{2s}/∂z₁ˢ∂z₂ˢ [(2z₁)ⁿ(2z₂)ᵏ],
    /// with the mixed derivative of the monomial taken exactly.
    fn poly_p_derivative_form(n: usize, k: usize, z1: Complex64, z2: Complex64) -> Complex64 {
        let fact = |m: usize| (1..=m).map(|j| j as f64).product::<f64>();
        let norm = 1.0 / (2f64.powi((n + k) as i32) * fact(n) * fact(k)).sqrt();
        let mut sum = c(0.0, 0.0);
        for s in 0..=n.min(k) {
            // ∂ˢ/∂z₁ˢ (2z₁)ⁿ = 2ⁿ n!/(n−s)! z₁ⁿ⁻ˢ
            let d1 = 2f64.powi(n as i32) * fact(n) / fact(n - s);
            let d2 = 2f64.powi(k as i32) * fact(k) / fact(k - s);
            let w = 1.0 / (2f64.powi(s as i32) * fact(s));
            sum += w * d1 * d2 * z1.powu((n - s) as u32) * z2.powu((k - s) as u32);
        }
        norm * sum
    }

    #[test]
    fn poly_p_examples() {
        let z1 = c(0.3, -1.2);
        let z2 = c(-0.8, 0.5);
        assert_eq!(poly_p(pair(0, 0), z1, z2).unwrap(), c(1.0, 0.0));
        let p10 = poly_p(pair(1, 0), z1, z2).unwrap();
        assert!((p10 - 2f64.sqrt() * z1).norm() < 1e-15);
        let p11 = poly_p(pair(1, 1), z1, z2).unwrap();
        assert!((p11 - (1.0 + 2.0 * z1 * z2)).norm() < 1e-14);
    }

    #[test]
    fn sum_form_equals_derivative_form() {
        let pts = [(c(0.4, 0.1), c(-1.1, 0.7)), (c(1.5, -0.3), c(0.2, 2.0))];
        for n in 0..=6 {
            for k in 0..=6 {
                for &(z1, z2) in &pts {
                    let a = poly_p(pair(n, k), z1, z2).unwrap();
                    let b = poly_p_derivative_form(n, k, z1, z2);
                    assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "({n},{k})");
                }
            }
        }
    }

    #[test]
    fn poly_y_examples() {
        assert_eq!(poly_y(pair(0, 0), 0.37).unwrap(), 1.0);
        assert_relative_eq!(poly_y(pair(1, 1), 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(poly_y(pair(1, 1), 0.0).unwrap(), -1.0, max_relative = 1e-15);
        assert_relative_eq!(
            poly_y(pair(1, 0), 2.0).unwrap(),
            2.0 * 2f64.sqrt(),
            max_relative = 1e-15
        );
        // Υₙ,ₖ(0) vanishes off the diagonal
        assert_eq!(poly_y(pair(3, 1), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn poly_y_diagonal_is_signed_laguerre() {
        for n in 0..=12 {
            for &x in &[0.0, 0.3, 1.1, 2.4] {
                let y = poly_y(pair(n, n), x).unwrap();
                let l = laguerre_complex(n, c(2.0 * x * x, 0.0)).unwrap().re;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                // Σ|terms| of the alternating sum
                let scale = laguerre_complex(n, c(-2.0 * x * x, 0.0)).unwrap().re;
                assert!((y - sign * l).abs() <= 1e-13 * scale, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(mod_kronecker(2, 4), 1);
        assert_eq!(mod_kronecker(3, 5), 1);
        assert_eq!(mod_kronecker(2, 3), 0);
        assert_eq!(mod_kronecker(0, 0), 1);
    }

    #[test]
    fn norm_examples() {
        assert_relative_eq!(norm_n2(0, 0, 0, 0).unwrap(), PI, max_relative = 1e-15);
        assert_eq!(norm_n2(0, 1, 0, 0).unwrap(), 0.0);
        assert!(norm_n2(1, 1, 1, 1).unwrap() > 0.0);
        assert_relative_eq!(norm_n1(0, 0, 0, 0).unwrap(), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(norm_n1(1, 1, 1, 1).unwrap(), 2.0 * PI.sqrt(), max_relative = 1e-14);
        assert_eq!(norm_n1(1, 0, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn norm_n2_hand_value() {
        // 𝒫₁,₁(x,y) = 1 + 2xy, so ∫∫e^{−x²−y²}(1+2xy)² = π + 4(√π/2)² = 2π
        assert_relative_eq!(norm_n2(1, 1, 1, 1).unwrap(), 2.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn winding_and_limits() {
        assert_eq!(pair(5, 20).winding(), -15);
        assert_eq!(pair(5, 2).winding(), 3);
        assert!(PolyIndexPair::new(65, 0).is_err());
        assert!(norm_n1(65, 0, 0, 0).is_err());
    }

    proptest! {
        #[test]
        fn upsilon_symmetric(n in 0usize..20, k in 0usize..20, x in -4.0f64..4.0) {
            prop_assert_eq!(poly_y(pair(n, k), x).unwrap(), poly_y(pair(k, n), x).unwrap());
        }

        #[test]
        fn upsilon_parity(n in 0usize..14, k in 0usize..14, x in 0.0f64..3.0) {
            let a = poly_y(pair(n, k), x).unwrap();
            let b = poly_y(pair(n, k), -x).unwrap();
            let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - sign * b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn polar_factorization(n in 0usize..=10, k in 0usize..=10,
                               r in 0.05f64..3.0, phi in -3.1f64..3.1) {
            let z = Complex64::from_polar(r, phi);
            let lhs = poly_p(pair(n, k), -z, z.conj()).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = sign * poly_y(pair(n, k), r).unwrap()
                * Complex64::from_polar(1.0, (n as f64 - k as f64) * phi);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        }

        #[test]
        fn conjugation_identity(n in 0usize..=8, l in 0usize..=6,
                                re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let z = c(re, im);
            let lhs = poly_p(pair(n + l, n), -z, z.conj()).unwrap().conj();
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = sign * poly_p(pair(n, n + l), -z, z.conj()).unwrap();
            let scale = poly_p(pair(n, n + l), c(z.norm(), 0.0), c(z.norm(), 0.0)).unwrap().re;
            prop_assert!((lhs - rhs).norm() <= 1e-13 * scale.max(1.0));
        }

        #[test]
        fn laguerre_reduction(n in 0usize..=12, r1 in 0.0f64..3.0, t1 in -3.2f64..3.2,
                              r2 in 0.0f64..3.0, t2 in -3.2f64..3.2) {
            let (s1, s2) = (Complex64::from_polar(r1, t1), Complex64::from_polar(r2, t2));
            let p = poly_p(pair(n, n), s1, s2).unwrap();
            let l = laguerre_complex(n, -2.0 * s1 * s2).unwrap();
            prop_assert!((p - l).norm() <= 1e-10 * l.norm().max(1.0));
        }
    }
}
