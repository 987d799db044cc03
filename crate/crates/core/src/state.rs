//! Pure states as coefficient vectors in the oscillator basis, their density
//! matrices, and assembly of the Wigner function.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, UdmError};
use crate::grid::{Axis, Grid2};
use crate::polynomials::{poly_y, PolyIndexPair};
use crate::special::{hermite_functions, OrderLimit, OscillatorParams};
use crate::udm::{osc_energy, phase_angle, udm_element, PhasePoint};

/// Default tolerance on |Σ|cₙ|² − 1|.
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-10;
/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOLERANCE: f64 = 1e-13;
/// Unit-trace tolerance for density matrices.
pub const TRACE_TOLERANCE: f64 = 1e-12;

/// Expansion coefficients cₙ, n = 0…N_max, of a state in the basis {Ψₙ}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientVector {
    coeffs: Vec<Complex64>,
    norm_tolerance: f64,
    normalized: bool,
}

impl CoefficientVector {
    /// Normalized vector; fails when Σ|cₙ|² is not 1 within the default tolerance.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(coeffs, DEFAULT_NORM_TOLERANCE)
    }

    pub fn with_tolerance(coeffs: Vec<Complex64>, norm_tolerance: f64) -> Result<Self> {
        let v = Self::unnormalized(coeffs)?;
        let norm = v.norm_sqr();
        if (norm - 1.0).abs() > norm_tolerance {
            return Err(UdmError::NotNormalized { norm, tolerance: norm_tolerance });
        }
        Ok(Self { norm_tolerance, normalized: true, ..v })
    }

    /// Vector exempt from the normalization check, flagged as such.
    pub fn unnormalized(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(UdmError::InvalidParameter("coefficient vector is empty".into()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(UdmError::InvalidParameter("coefficients must be finite".into()));
        }
        OrderLimit::default().check(coeffs.len() - 1)?;
        Ok(Self { coeffs, norm_tolerance: DEFAULT_NORM_TOLERANCE, normalized: false })
    }

    /// Scales arbitrary nonzero coefficients to unit norm.
    pub fn normalize(coeffs: Vec<Complex64>) -> Result<Self> {
        let v = Self::unnormalized(coeffs)?;
        let norm = v.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(UdmError::ZeroVector);
        }
        Self::new(v.coeffs.iter().map(|c| c / norm).collect())
    }

    /// Oscillator eigenstate |n⟩.
    pub fn eigenstate(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(UdmError::InvalidParameter(format!("eigenstate {n} exceeds N_max = {n_max}")));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
        c[n] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm_tolerance(&self) -> f64 {
        self.norm_tolerance
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Truncation diagnostic 1 − Σ|cₙ|².
    pub fn shortfall(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    /// Phases αₙ = arg cₙ.
    pub fn phases(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.arg()).collect()
    }

    /// Ψ(x) = Σ cₙ Ψₙ(x).
    pub fn psi_x(&self, x: f64, params: &OscillatorParams) -> Complex64 {
        let kappa = params.kappa();
        let psi = hermite_functions(self.n_max(), kappa * x);
        self.coeffs
            .iter()
            .zip(psi)
            .map(|(c, f)| c * (f * kappa.sqrt()))
            .sum()
    }
}

/// Density matrix ρₖ,ₙ, stored row-major with k the row index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        let rho = Self::unchecked(dim, entries)?;
        let herm = rho.hermiticity_defect();
        if herm > HERMITIAN_TOLERANCE {
            return Err(UdmError::InvalidDensity(format!("not Hermitian: defect {herm:e}")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(UdmError::InvalidDensity(format!("trace {tr} is not 1")));
        }
        Ok(rho)
    }

    fn unchecked(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(UdmError::InvalidDensity(format!(
                "{} entries do not form a nonempty {dim}×{dim} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(UdmError::InvalidDensity("entries must be finite".into()));
        }
        OrderLimit::default().check(dim - 1)?;
        Ok(Self { dim, entries })
    }

    /// Diagonal matrix of occupation probabilities.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let dim = populations.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &p) in populations.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(p, 0.0);
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// ρₖ,ₙ.
    pub fn get(&self, k: usize, n: usize) -> Complex64 {
        self.entries[k * self.dim + n]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// max |ρₖ,ₙ − conj ρₙ,ₖ|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.dim {
            for n in k..self.dim {
                worst = worst.max((self.get(k, n) - self.get(n, k).conj()).norm());
            }
        }
        worst
    }

    /// Recovers c with ρ = c c† up to a global phase, checking every entry
    /// against the reconstruction within `tolerance`.
    pub fn pure_state(&self, tolerance: f64) -> Result<CoefficientVector> {
        let pivot = (0..self.dim)
            .max_by(|&a, &b| self.get(a, a).re.total_cmp(&self.get(b, b).re))
            .unwrap_or(0);
        let d = self.get(pivot, pivot).re;
        if !(d > 0.0) {
            return Err(UdmError::NotRankOne);
        }
        let root = d.sqrt();
        // column `pivot` is c · c̄_pivot, and c_pivot is taken real
        let c: Vec<Complex64> = (0..self.dim).map(|k| self.get(k, pivot) / root).collect();
        for k in 0..self.dim {
            for n in 0..self.dim {
                if (self.get(k, n) - c[k] * c[n].conj()).norm() > tolerance {
                    return Err(UdmError::NotRankOne);
                }
            }
        }
        CoefficientVector::with_tolerance(c, DEFAULT_NORM_TOLERANCE.max(tolerance))
    }
}

/// ρₖ,ₙ = cₖ c̄ₙ.
///
/// A vector built with [`CoefficientVector::unnormalized`] yields a matrix
/// whose trace is Σ|cₙ|² and is not checked against 1.
pub fn density_from_coeffs(c: &CoefficientVector) -> Result<DensityMatrix> {
    let coeffs = c.coeffs();
    if coeffs.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(UdmError::ZeroVector);
    }
    let dim = coeffs.len();
    let mut entries = Vec::with_capacity(dim * dim);
    for ck in coeffs {
        for cn in coeffs {
            entries.push(ck * cn.conj());
        }
    }
    let rho = DensityMatrix::unchecked(dim, entries)?;
    if c.is_normalized() {
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TRACE_TOLERANCE.max(c.norm_tolerance()) {
            return Err(UdmError::InvalidDensity(format!("trace {tr} is not 1")));
        }
    }
    Ok(rho)
}

/// Unit phase vector n̄ₖ = (cos αₖ, sin αₖ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseVectorPair {
    pub cos_alpha: f64,
    pub sin_alpha: f64,
}

/// n̄ₖ of a nonzero coefficient.
pub fn phase_vector(c: Complex64) -> Result<PhaseVectorPair> {
    let r = c.norm();
    if !(r > 0.0) {
        return Err(UdmError::UndefinedPhase);
    }
    Ok(PhaseVectorPair { cos_alpha: c.re / r, sin_alpha: c.im / r })
}

/// Ω⁽ⁿ,ᵏ⁾(φ) = [[cos ϖφ, sin ϖφ], [−sin ϖφ, cos ϖφ]].
pub fn rotation_matrix(pair: PolyIndexPair, phi: f64) -> [[f64; 2]; 2] {
    let (s, c) = (pair.winding() as f64 * phi).sin_cos();
    [[c, s], [-s, c]]
}

/// W(x, p) = Σₙ,ₖ ρₖ,ₙ wₙ,ₖ(x, p).
///
/// The imaginary part of the sum is checked against 1e-10·(1 + |W|) and
/// then dropped.
pub fn wigner_trace(rho: &DensityMatrix, pt: PhasePoint, params: &OscillatorParams) -> Result<f64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..rho.dim() {
        for n in 0..rho.dim() {
            let r = rho.get(k, n);
            if r.norm_sqr() == 0.0 {
                continue;
            }
            sum += r * udm_element(PolyIndexPair::new(n, k)?, pt, params)?;
        }
    }
    let bound = 1e-10 * (1.0 + sum.re.abs());
    if sum.im.abs() > bound {
        return Err(UdmError::ImaginaryResidue { residue: sum.im, bound });
    }
    Ok(sum.re)
}

/// W through the rotation-matrix form
/// e^{−2ε}/(πħ) Σ |ρₖ,ₙ| Υₙ,ₖ(√(2ε)) n̄ₖᵀ Ω⁽ⁿ,ᵏ⁾(φ) n̄ₙ over nonzero coefficients.
pub fn wigner_rotation_form(
    c: &CoefficientVector,
    pt: PhasePoint,
    params: &OscillatorParams,
) -> Result<f64> {
    let eps = osc_energy(pt, params);
    let phi = phase_angle(pt, params);
    let radius = (2.0 * eps).sqrt();
    let support: Vec<(usize, f64, PhaseVectorPair)> = c
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm_sqr() > 0.0)
        .map(|(i, z)| Ok((i, z.norm(), phase_vector(*z)?)))
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    for &(k, ak, vk) in &support {
        for &(n, an, vn) in &support {
            let pair = PolyIndexPair::new(n, k)?;
            let om = rotation_matrix(pair, phi);
            let rotated = [
                om[0][0] * vn.cos_alpha + om[0][1] * vn.sin_alpha,
                om[1][0] * vn.cos_alpha + om[1][1] * vn.sin_alpha,
            ];
            let quad = vk.cos_alpha * rotated[0] + vk.sin_alpha * rotated[1];
            sum += ak * an * poly_y(pair, radius)? * quad;
        }
    }
    Ok((-2.0 * eps).exp() * sum / (PI * params.hbar()))
}

/// e^{−2ε} Υₙ,ₖ(√(2ε)) cos(ϖφ).
pub fn basis_wc(pair: PolyIndexPair, pt: PhasePoint, params: &OscillatorParams) -> Result<f64> {
    let (radial, angle) = basis_parts(pair, pt, params)?;
    Ok(radial * angle.cos())
}

/// e^{−2ε} Υₙ,ₖ(√(2ε)) sin(ϖφ).
pub fn basis_ws(pair: PolyIndexPair, pt: PhasePoint, params: &OscillatorParams) -> Result<f64> {
    let (radial, angle) = basis_parts(pair, pt, params)?;
    Ok(radial * angle.sin())
}

fn basis_parts(pair: PolyIndexPair, pt: PhasePoint, params: &OscillatorParams) -> Result<(f64, f64)> {
    let eps = osc_energy(pt, params);
    let radial = (-2.0 * eps).exp() * poly_y(pair, (2.0 * eps).sqrt())?;
    Ok((radial, pair.winding() as f64 * phase_angle(pt, params)))
}

/// Complex wave function sampled on a uniform coordinate axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWavefunction {
    pub axis: Axis,
    pub values: Vec<Complex64>,
}

impl SampledWavefunction {
    pub fn new(axis: Axis, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != axis.len() {
            return Err(UdmError::InvalidGrid(format!(
                "{} samples for an axis of {} nodes",
                values.len(),
                axis.len()
            )));
        }
        Ok(Self { axis, values })
    }

    pub fn from_fn(axis: Axis, f: impl Fn(f64) -> Complex64) -> Self {
        let values = axis.nodes().map(f).collect();
        Self { axis, values }
    }
}

/// Projection cₙ = ∫ Ψₙ(x) Ψ(x) dx by the trapezoid rule, n = 0…N_max.
///
/// The spacing must satisfy h·κ·√(2N_max+1) ≤ π/2, i.e. at least four nodes
/// per half-wavelength of Ψ_{N_max} at its centre, and the samples must have
/// decayed below 1e-12 of their peak at both ends. The result is not
/// renormalized; a shortfall beyond the default tolerance leaves it flagged
/// as unnormalized.
pub fn coeffs_from_samples(
    psi: &SampledWavefunction,
    params: &OscillatorParams,
    n_max: usize,
) -> Result<CoefficientVector> {
    OrderLimit::default().check(n_max)?;
    let kappa = params.kappa();
    let h = psi.axis.step();
    let limit = PI / (2.0 * kappa * ((2 * n_max + 1) as f64).sqrt());
    if h > limit {
        return Err(UdmError::GridTooCoarse { spacing: h, limit });
    }
    if psi.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(UdmError::NotNormalizable);
    }
    let peak = psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(UdmError::NotNormalizable);
    }
    let edge = psi.values[0].norm().max(psi.values[psi.values.len() - 1].norm());
    if edge > 1e-12 * peak {
        return Err(UdmError::InvalidGrid(format!(
            "samples do not decay at the grid ends (|Ψ| = {edge:e})"
        )));
    }
    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for (i, x) in psi.axis.nodes().enumerate() {
        let w = psi.axis.weight(i) * kappa.sqrt();
        let basis = hermite_functions(n_max, kappa * x);
        for (cn, f) in c.iter_mut().zip(basis) {
            *cn += psi.values[i] * (w * f);
        }
    }
    CoefficientVector::new(c.clone()).or_else(|_| CoefficientVector::unnormalized(c))
}

/// W sampled row-major with x outer and p inner.
pub fn wigner_grid(
    rho: &DensityMatrix,
    x_axis: Axis,
    p_axis: Axis,
    params: &OscillatorParams,
) -> Result<Grid2> {
    Grid2::try_from_fn(x_axis, p_axis, |x, p| wigner_trace(rho, PhasePoint { x, p }, params))
}
