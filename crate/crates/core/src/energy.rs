//! Mean total energy of a pure state in a polynomially perturbed oscillator,
//! in closed form through the matrix elements of xˡ in the oscillator basis.

use std::collections::BTreeSet;
use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Result, UdmError};
use crate::special::{log_factorial, OscillatorParams};
use crate::state::{density_from_coeffs, wigner_trace, CoefficientVector, DensityMatrix};
use crate::udm::{osc_energy, PhasePoint};
use crate::vlasov::PotentialSeries;

/// Tolerance of the rank-1 and phase consistency checks.
pub const PURITY_TOLERANCE: f64 = 1e-10;

/// ⟨⟨ℰ⟩⟩ split into the oscillator levels and the δU sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// Σ ρₙ,ₙ ħω(n + ½).
    pub diagonal_part: f64,
    /// Σₖ,ₙ,ₗ |ρₖ,ₙ| cos(αₖ − αₙ) aₗ ⟨n|xˡ|k⟩, including the k = n terms.
    pub offdiagonal_part: f64,
    pub total: f64,
    /// Winding numbers n − k of the nonzero δU terms, ascending.
    pub contributing_diagonals: Vec<i64>,
}

/// Coefficients of δU = U − ½mω²x² for the frequency in `params`.
pub fn delta_u_coeffs(du: &PotentialSeries, params: &OscillatorParams) -> Vec<f64> {
    let mut c = du.coeffs().to_vec();
    let shift = 0.5 * params.mass() * (du.omega_ref().powi(2) - params.omega().powi(2));
    if shift != 0.0 {
        if c.len() < 3 {
            c.resize(3, 0.0);
        }
        c[2] += shift;
    }
    c
}

/// ⟨n|xˡ|k⟩ / (ħ/4mω)^{l/2} for l ≥ |n−k| with n−k+l even; zero otherwise.
fn position_moment(n: usize, k: usize, l: usize) -> f64 {
    let w = n.abs_diff(k);
    if l < w || (l - w) % 2 != 0 {
        return 0.0;
    }
    let j = (n + l - k) / 2;
    let log_pre = 0.5 * ((n + k) as f64 * LN_2 + log_factorial(n) + log_factorial(k))
        + log_factorial(l)
        - log_factorial(j)
        - log_factorial(l - j);
    let half = (n + k + l) / 2;
    let mut sum = 0.0;
    for s in 0..=n.min(k) {
        if half < s {
            continue;
        }
        let log_term = log_factorial(half - s)
            - s as f64 * LN_2
            - log_factorial(s)
            - log_factorial(k - s)
            - log_factorial(n - s);
        let term = (log_pre + log_term).exp();
        if s % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Closed-form ⟨⟨ℰ⟩⟩ for a pure ρ with the coefficient phases αₖ.
pub fn energy_closed_form(
    rho: &DensityMatrix,
    coeff_phases: &[f64],
    du: &PotentialSeries,
    params: &OscillatorParams,
) -> Result<EnergyBreakdown> {
    let dim = rho.dim();
    if coeff_phases.len() != dim {
        return Err(UdmError::InvalidParameter(format!(
            "{} phases for a {dim}×{dim} density matrix",
            coeff_phases.len()
        )));
    }
    rho.pure_state(PURITY_TOLERANCE)?;
    for k in 0..dim {
        for n in 0..dim {
            let r = rho.get(k, n);
            let (s, c) = (coeff_phases[k] - coeff_phases[n]).sin_cos();
            if (r.re - r.norm() * c).abs() > PURITY_TOLERANCE || (r.im - r.norm() * s).abs() > PURITY_TOLERANCE {
                return Err(UdmError::InvalidDensity(format!("phases do not match ρ at ({k}, {n})")));
            }
        }
    }
    let a = delta_u_coeffs(du, params);
    let (hbar, omega) = (params.hbar(), params.omega());
    let length_sq = hbar / (4.0 * params.mass() * omega);

    let diagonal_part: f64 = (0..dim).map(|n| rho.get(n, n).norm() * hbar * omega * (n as f64 + 0.5)).sum();
    let mut offdiagonal_part = 0.0;
    let mut diagonals = BTreeSet::new();
    for k in 0..dim {
        for n in 0..dim {
            let r = rho.get(k, n).norm();
            if r == 0.0 {
                continue;
            }
            let weight = r * (coeff_phases[k] - coeff_phases[n]).cos();
            for (l, &al) in a.iter().enumerate() {
                if al == 0.0 {
                    continue;
                }
                let m = position_moment(n, k, l);
                if m == 0.0 {
                    continue;
                }
                offdiagonal_part += weight * al * length_sq.powf(0.5 * l as f64) * m;
                diagonals.insert(n as i64 - k as i64);
            }
        }
    }
    Ok(EnergyBreakdown {
        diagonal_part,
        offdiagonal_part,
        total: diagonal_part + offdiagonal_part,
        contributing_diagonals: diagonals.into_iter().collect(),
    })
}

/// [`energy_closed_form`] for the density matrix and phases of `c`.
pub fn energy_of_state(c: &CoefficientVector, du: &PotentialSeries, params: &OscillatorParams) -> Result<EnergyBreakdown> {
    energy_closed_form(&density_from_coeffs(c)?, &c.phases(), du, params)
}

/// Winding numbers ϖ with (ϖ + l)/2 ∈ ℤ and |ϖ| ≤ l for some nonzero aₗ.
pub fn quartic_diagonal_filter(du: &PotentialSeries) -> Vec<i64> {
    let mut set = BTreeSet::new();
    for (l, &al) in du.coeffs().iter().enumerate() {
        if al == 0.0 {
            continue;
        }
        let l = l as i64;
        set.extend((-l..=l).step_by(2));
    }
    set.into_iter().collect()
}

/// ℰ(x, p) W(x, p) with ℰ = ħω ε(x, p) + δU(x).
pub fn total_energy_field(
    rho: &DensityMatrix,
    pt: PhasePoint,
    du: &PotentialSeries,
    params: &OscillatorParams,
) -> Result<f64> {
    let a = delta_u_coeffs(du, params);
    let delta = a.iter().rev().fold(0.0, |acc, &c| acc * pt.x + c);
    let e = params.hbar() * params.omega() * osc_energy(pt, params) + delta;
    Ok(e * wigner_trace(rho, pt, params)?)
}
