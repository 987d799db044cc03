//! Elements wₙ,ₖ(x, p) of the universal density matrix and the oscillator
//! coordinates (ε, φ) of the phase plane.
//!
//! The normative evaluation is the polar form
//! wₙ,ₖ = e^{−2ε} Υₙ,ₖ(√(2ε)) e^{i(n−k)φ} / (πħ), which keeps the modulus and
//! the winding factor apart. [`udm_element_direct`] evaluates the same
//! element through 𝒫ₙ,ₖ with complex arguments and exists for cross-checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UdmError};
use crate::polynomials::{poly_p, poly_y, PolyIndexPair};
use crate::special::{laguerre, OscillatorParams};

/// A point (x, p) of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        if !(x.is_finite() && p.is_finite()) {
            return Err(UdmError::InvalidParameter(format!(
                "phase point ({x}, {p}) is not finite"
            )));
        }
        Ok(Self { x, p })
    }

    /// Point at oscillator energy `eps` and phase angle `phi`.
    pub fn from_polar(eps: f64, phi: f64, params: &OscillatorParams) -> Self {
        let r = (2.0 * eps).sqrt();
        let kappa = params.kappa();
        Self {
            x: r * phi.cos() / kappa,
            p: r * phi.sin() * params.hbar() * kappa,
        }
    }

    /// z = κx + ip/(ħκ).
    pub fn z(&self, params: &OscillatorParams) -> Complex64 {
        let kappa = params.kappa();
        Complex64::new(kappa * self.x, self.p / (params.hbar() * kappa))
    }
}

/// Dimensionless oscillator energy ε = (p²/2m + mω²x²/2)/ħω; |z|² = 2ε.
pub fn osc_energy(pt: PhasePoint, params: &OscillatorParams) -> f64 {
    let (m, w, h) = (params.mass(), params.omega(), params.hbar());
    (pt.p * pt.p / (2.0 * m) + m * w * w * pt.x * pt.x / 2.0) / (h * w)
}

/// φ = arg z in (−π, π], with φ = 0 at the origin.
pub fn phase_angle(pt: PhasePoint, params: &OscillatorParams) -> f64 {
    let z = pt.z(params);
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    z.im.atan2(z.re)
}

/// wₙ,ₖ(x, p) via the polar form.
pub fn udm_element(pair: PolyIndexPair, pt: PhasePoint, params: &OscillatorParams) -> Result<Complex64> {
    let eps = osc_energy(pt, params);
    let phi = phase_angle(pt, params);
    let radial = radial_part(pair, eps, params)?;
    let angle = pair.winding() as f64 * phi;
    Ok(Complex64::new(radial * angle.cos(), radial * angle.sin()))
}

/// e^{−2ε} Υₙ,ₖ(√(2ε)) / (πħ): the signed modulus of wₙ,ₖ.
pub(crate) fn radial_part(pair: PolyIndexPair, eps: f64, params: &OscillatorParams) -> Result<f64> {
    let y = poly_y(pair, (2.0 * eps).sqrt())?;
    Ok((-2.0 * eps).exp() * y / (PI * params.hbar()))
}

/// wₙ,ₖ(x, p) = (−1)ⁿ/(πħ) e^{−κ²x²−p²/(ħκ)²} 𝒫ₙ,ₖ(−κx − ip/(ħκ), κx − ip/(ħκ)).
pub fn udm_element_direct(
    pair: PolyIndexPair,
    pt: PhasePoint,
    params: &OscillatorParams,
) -> Result<Complex64> {
    let kappa = params.kappa();
    let a = kappa * pt.x;
    let b = pt.p / (params.hbar() * kappa);
    let z1 = Complex64::new(-a, -b);
    let z2 = Complex64::new(a, -b);
    let sign = if pair.n % 2 == 0 { 1.0 } else { -1.0 };
    let envelope = (-(a * a) - b * b).exp() / (PI * params.hbar());
    Ok(sign * envelope * poly_p(pair, z1, z2)?)
}

/// |wₙ,ₖ| as a function of the oscillator energy alone.
pub fn udm_modulus(pair: PolyIndexPair, energy_eps: f64, params: &OscillatorParams) -> Result<f64> {
    if !(energy_eps >= 0.0) {
        return Err(UdmError::InvalidParameter(format!(
            "oscillator energy must be non-negative, got {energy_eps}"
        )));
    }
    Ok(radial_part(pair, energy_eps, params)?.abs())
}

/// Angular period of wₙ,ₖ along a circle ε = const.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Period {
    Finite(f64),
    /// Zero winding: the element does not oscillate.
    Infinite,
}

impl Period {
    pub fn value(&self) -> f64 {
        match *self {
            Period::Finite(t) => t,
            Period::Infinite => f64::INFINITY,
        }
    }
}

/// Tₙ,ₖ = 2π/|n − k|.
pub fn udm_period(pair: PolyIndexPair) -> Period {
    match pair.winding().unsigned_abs() {
        0 => Period::Infinite,
        w => Period::Finite(2.0 * PI / w as f64),
    }
}

/// wₙ,ₙ(x, p) = (−1)ⁿ e^{−2ε} Lₙ(4ε) / (πħ), the oscillator eigenstate Wigner function.
pub fn diagonal_wigner(n: usize, pt: PhasePoint, params: &OscillatorParams) -> Result<f64> {
    let eps = osc_energy(pt, params);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * (-2.0 * eps).exp() * laguerre(n, 4.0 * eps)? / (PI * params.hbar()))
}
