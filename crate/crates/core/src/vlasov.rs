//! The Vlasov-Moyal approximation of the mean acceleration on a sampled
//! (x, v) grid, its dissipation sources, and the truncated Moyal right-hand
//! side.
//!
//! All velocity derivatives are fourth-order central differences from
//! [`crate::fd`]. Values that would need 1/f₂ below the positivity floor, or a
//! stencil that leaves the grid, are masked.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UdmError};
use crate::fd::{derivative, derivative_masked, Stencil};
use crate::grid::{Axis, Grid2};
use crate::special::{log_factorial, OscillatorParams};

/// Highest power allowed in a potential series.
pub const DEFAULT_MAX_DEGREE: usize = 12;
/// Default number of series terms.
pub const DEFAULT_TERMS: usize = 4;
/// Positivity floor relative to max |f₂|.
pub const FLOOR_RATIO: f64 = 1e-12;

/// U(x) = ½ m ω_ref² x² + Σₗ aₗ xˡ, l = 0…L_max.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSeries {
    coeffs: Vec<f64>,
    omega_ref: f64,
}

impl PotentialSeries {
    pub fn new(coeffs: Vec<f64>, omega_ref: f64) -> Result<Self> {
        Self::with_max_degree(coeffs, omega_ref, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(coeffs: Vec<f64>, omega_ref: f64, max_degree: usize) -> Result<Self> {
        if coeffs.len() > max_degree + 1 {
            return Err(UdmError::DegreeOverflow { degree: coeffs.len() - 1, max: max_degree });
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(UdmError::InvalidParameter("potential coefficients must be finite".into()));
        }
        if !omega_ref.is_finite() || omega_ref < 0.0 {
            return Err(UdmError::InvalidParameter(format!(
                "reference frequency must be finite and non-negative, got {omega_ref}"
            )));
        }
        Ok(Self { coeffs, omega_ref })
    }

    /// Pure oscillator potential ½ m ω² x².
    pub fn harmonic(omega: f64) -> Result<Self> {
        Self::new(Vec::new(), omega)
    }

    /// ½ m ω² x² + μ x⁴.
    pub fn quartic(omega: f64, mu: f64) -> Result<Self> {
        Self::new(vec![0.0, 0.0, 0.0, 0.0, mu], omega)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn omega_ref(&self) -> f64 {
        self.omega_ref
    }

    /// Degree of U as a polynomial.
    pub fn degree(&self) -> usize {
        let top = self.coeffs.iter().rposition(|&a| a != 0.0).unwrap_or(0);
        if self.omega_ref != 0.0 {
            top.max(2)
        } else {
            top
        }
    }

    /// Coefficients of U including the harmonic part.
    pub fn full_coeffs(&self, mass: f64) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        if c.len() < 3 {
            c.resize(3, 0.0);
        }
        c[2] += 0.5 * mass * self.omega_ref * self.omega_ref;
        c
    }

    pub fn value(&self, x: f64, mass: f64) -> f64 {
        self.derivative(0, x, mass)
    }

    /// d^order U / dx^order, exact.
    pub fn derivative(&self, order: usize, x: f64, mass: f64) -> f64 {
        let c = self.full_coeffs(mass);
        let mut acc = 0.0;
        for l in (order..c.len()).rev() {
            let falling = (l - order + 1..=l).map(|j| j as f64).product::<f64>();
            acc = acc * x + c[l] * falling;
        }
        acc
    }
}

impl<'de> Deserialize<'de> for PotentialSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            #[serde(default)]
            coeffs: Vec<f64>,
            #[serde(default = "one")]
            omega_ref: f64,
        }
        fn one() -> f64 {
            1.0
        }
        let raw = Raw::deserialize(d)?;
        PotentialSeries::new(raw.coeffs, raw.omega_ref).map_err(serde::de::Error::custom)
    }
}

/// Odd-order derivative of U; even orders are rejected.
pub fn potential_odd_derivative(u: &PotentialSeries, order: usize, x: f64, mass: f64) -> Result<f64> {
    if order % 2 == 0 {
        return Err(UdmError::EvenDerivativeOrder(order));
    }
    Ok(u.derivative(order, x, mass))
}

/// ħ and m for the kinetic operators. Unlike [`OscillatorParams`], ħ = 0 is
/// allowed and gives the classical limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoyalParams {
    pub hbar: f64,
    pub mass: f64,
}

impl MoyalParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar >= 0.0) {
            return Err(UdmError::InvalidParameter(format!("ħ must be finite and ≥ 0, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(UdmError::InvalidParameter(format!("mass must be finite and > 0, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    pub fn classical(mass: f64) -> Result<Self> {
        Self::new(0.0, mass)
    }

    /// (−1)ⁿ⁺¹ (ħ/2)²ⁿ / (m²ⁿ⁺¹ (2n+1)!), the weight of the n-th series term.
    pub fn series_coefficient(&self, n: usize) -> f64 {
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        let log_mag = -log_factorial(2 * n + 1) - (2 * n + 1) as f64 * self.mass.ln();
        sign * (0.5 * self.hbar).powi(2 * n as i32) * log_mag.exp()
    }
}

impl From<&OscillatorParams> for MoyalParams {
    fn from(p: &OscillatorParams) -> Self {
        Self { hbar: p.hbar(), mass: p.mass() }
    }
}

/// Samples f(xᵢ, vⱼ), row-major with x outer, and the positivity floor
/// below which 1/f is not formed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    grid: Grid2,
    floor: f64,
}

impl PhaseField {
    pub fn new(x_axis: Axis, v_axis: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != x_axis.len() * v_axis.len() {
            return Err(UdmError::InvalidGrid(format!(
                "{} samples do not fill a {}×{} grid",
                values.len(),
                x_axis.len(),
                v_axis.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(UdmError::InvalidGrid("field samples must be finite".into()));
        }
        let grid = Grid2 { outer: x_axis, inner: v_axis, values };
        if !grid.integrate().is_finite() {
            return Err(UdmError::InvalidGrid("field mass is not finite".into()));
        }
        let peak = grid.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(Self { grid, floor: FLOOR_RATIO * peak })
    }

    pub fn from_fn(x_axis: Axis, v_axis: Axis, f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let g = Grid2::from_fn(x_axis, v_axis, f);
        Self::new(g.outer, g.inner, g.values)
    }

    pub fn with_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(UdmError::InvalidParameter(format!("floor must be ≥ 0, got {floor}")));
        }
        self.floor = floor;
        Ok(self)
    }

    pub fn x_axis(&self) -> Axis {
        self.grid.outer
    }

    pub fn v_axis(&self) -> Axis {
        self.grid.inner
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn values(&self) -> &[f64] {
        &self.grid.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.grid.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.grid.row(i)
    }

    /// ∫∫ f dx dv.
    pub fn mass(&self) -> f64 {
        self.grid.integrate()
    }

    /// f₁(x) = ∫ f dv on each x node.
    pub fn marginal(&self) -> Vec<f64> {
        (0..self.x_axis().len()).map(|i| self.v_axis().trapezoid(self.row(i))).collect()
    }

    fn above_floor(&self, v: f64) -> bool {
        v.abs() >= self.floor && v != 0.0
    }
}

/// Field on an (x, v) grid with masked nodes as `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskedField {
    pub x_axis: Axis,
    pub v_axis: Axis,
    pub values: Vec<Option<f64>>,
}

impl MaskedField {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.v_axis.len() + j]
    }

    pub fn row(&self, i: usize) -> &[Option<f64>] {
        let n = self.v_axis.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// max |value| over unmasked nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn masked_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Profile on the x axis with masked nodes as `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskedProfile {
    pub axis: Axis,
    pub values: Vec<Option<f64>>,
}

impl MaskedProfile {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Series terms n ∈ [first, n_terms) whose potential derivative and weight
/// are not identically zero.
fn active_terms(u: &PotentialSeries, first: usize, n_terms: usize, params: &MoyalParams) -> Result<Vec<(usize, f64)>> {
    if n_terms == 0 {
        return Err(UdmError::InvalidParameter("at least one series term is required".into()));
    }
    Ok((first..n_terms)
        .filter(|&n| 2 * n + 1 <= u.degree())
        .map(|n| (n, params.series_coefficient(n)))
        .filter(|&(_, c)| c != 0.0)
        .collect())
}

fn check_width(axis: Axis, radius: usize) -> Result<()> {
    let needed = 2 * radius + 1;
    if axis.len() < needed {
        return Err(UdmError::GridTooSmall { len: axis.len(), needed });
    }
    Ok(())
}

/// (1/f) ∂^{2n} f / ∂v^{2n} on one row, masked below the floor.
fn scaled_even_derivative(f2: &PhaseField, row: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    let d = derivative(row, f2.v_axis().step(), 2 * n)?;
    Ok(d.iter()
        .zip(row)
        .map(|(d, &f)| match d {
            Some(d) if f2.above_floor(f) => Some(d / f),
            _ => None,
        })
        .collect())
}

/// ⟨v̇⟩ = Σₙ (−1)ⁿ⁺¹ (ħ/2)²ⁿ / (m²ⁿ⁺¹(2n+1)!) · ∂²ⁿ⁺¹U/∂x²ⁿ⁺¹ · (1/f₂) ∂²ⁿf₂/∂v²ⁿ,
/// n = 0…n_terms−1.
pub fn mean_accel(u: &PotentialSeries, f2: &PhaseField, n_terms: usize, params: &MoyalParams) -> Result<MaskedField> {
    let terms = active_terms(u, 0, n_terms, params)?;
    let quantum: Vec<_> = terms.iter().copied().filter(|&(n, _)| n > 0).collect();
    if let Some(&(n, _)) = quantum.last() {
        check_width(f2.v_axis(), Stencil::central(2 * n).radius)?;
    }
    let (nx, nv) = (f2.x_axis().len(), f2.v_axis().len());
    let mut values = Vec::with_capacity(nx * nv);
    for (i, x) in f2.x_axis().nodes().enumerate() {
        let classical = -u.derivative(1, x, params.mass) / params.mass;
        let mut row: Vec<Option<f64>> = vec![Some(classical); nv];
        for &(n, c) in &quantum {
            let du = u.derivative(2 * n + 1, x, params.mass);
            let g = scaled_even_derivative(f2, f2.row(i), n)?;
            for (slot, g) in row.iter_mut().zip(g) {
                *slot = match (*slot, g) {
                    (Some(s), Some(g)) => Some(s + c * du * g),
                    _ => None,
                };
            }
        }
        values.extend(row);
    }
    Ok(MaskedField { x_axis: f2.x_axis(), v_axis: f2.v_axis(), values })
}

/// Q₂ = ∂⟨v̇⟩/∂v = Σₙ≥₁ (−1)ⁿ⁺¹ (ħ/2)²ⁿ / (m²ⁿ⁺¹(2n+1)!) · ∂²ⁿ⁺¹U/∂x²ⁿ⁺¹ · ∂/∂v[(1/f₂)∂²ⁿf₂/∂v²ⁿ].
pub fn dissipation_q2(u: &PotentialSeries, f2: &PhaseField, n_terms: usize, params: &MoyalParams) -> Result<MaskedField> {
    let terms = active_terms(u, 1, n_terms, params)?;
    if let Some(&(n, _)) = terms.last() {
        check_width(f2.v_axis(), Stencil::central(2 * n).radius + Stencil::central(1).radius)?;
    }
    let (nx, nv) = (f2.x_axis().len(), f2.v_axis().len());
    let h = f2.v_axis().step();
    let mut values = Vec::with_capacity(nx * nv);
    for (i, x) in f2.x_axis().nodes().enumerate() {
        let mut row: Vec<Option<f64>> = vec![Some(0.0); nv];
        for &(n, c) in &terms {
            let du = u.derivative(2 * n + 1, x, params.mass);
            let g = scaled_even_derivative(f2, f2.row(i), n)?;
            let dg = derivative_masked(&g, h, 1)?;
            for (slot, dg) in row.iter_mut().zip(dg) {
                *slot = match (*slot, dg) {
                    (Some(s), Some(d)) => Some(s + c * du * d),
                    _ => None,
                };
            }
        }
        values.extend(row);
    }
    Ok(MaskedField { x_axis: f2.x_axis(), v_axis: f2.v_axis(), values })
}

/// f₂-weighted v-average ∫ f₂ q dv / f₁ over unmasked nodes of each row.
fn weighted_average(f2: &PhaseField, q: &MaskedField) -> MaskedProfile {
    let v_axis = f2.v_axis();
    let values = (0..f2.x_axis().len())
        .map(|i| {
            let row = f2.row(i);
            let f1 = v_axis.trapezoid(row);
            if !(f1.abs() > f2.floor() * (v_axis.max() - v_axis.min())) {
                return None;
            }
            let mut seen = false;
            let mut acc = 0.0;
            for (j, v) in q.row(i).iter().enumerate() {
                if let Some(v) = v {
                    acc += v_axis.weight(j) * row[j] * v;
                    seen = true;
                }
            }
            seen.then_some(acc / f1)
        })
        .collect();
    MaskedProfile { axis: f2.x_axis(), values }
}

/// ⟨⟨v̇⟩⟩(x): the f₂-weighted v-average of [`mean_accel`] with the default
/// number of terms; equal to −U′(x)/m up to discretization error.
pub fn mean_accel_avg(u: &PotentialSeries, f2: &PhaseField, params: &MoyalParams) -> Result<MaskedProfile> {
    let a = mean_accel(u, f2, DEFAULT_TERMS, params)?;
    Ok(weighted_average(f2, &a))
}

/// f₂-weighted v-average of [`dissipation_q2`], the route that differentiates 1/f₂.
pub fn mean_q2_direct(u: &PotentialSeries, f2: &PhaseField, n_terms: usize, params: &MoyalParams) -> Result<MaskedProfile> {
    let q = dissipation_q2(u, f2, n_terms, params)?;
    Ok(weighted_average(f2, &q))
}

/// ⟨Q₂⟩(x) = Σₙ≥₁ (−1)ⁿ (ħ/2)²ⁿ / (m²ⁿ⁺¹(2n+1)!) · ∂²ⁿ⁺¹U/∂x²ⁿ⁺¹ · ⟨∂²ⁿ⁺¹S₂/∂v²ⁿ⁺¹⟩, S₂ = ln f₂.
pub fn mean_q2(u: &PotentialSeries, f2: &PhaseField, n_terms: usize, params: &MoyalParams) -> Result<MaskedProfile> {
    let terms = active_terms(u, 1, n_terms, params)?;
    if let Some(&(n, _)) = terms.last() {
        check_width(f2.v_axis(), Stencil::central(2 * n + 1).radius)?;
    }
    let h = f2.v_axis().step();
    let (nx, nv) = (f2.x_axis().len(), f2.v_axis().len());
    let mut values = Vec::with_capacity(nx * nv);
    for (i, x) in f2.x_axis().nodes().enumerate() {
        let s2: Vec<Option<f64>> = f2
            .row(i)
            .iter()
            .map(|&f| (f > 0.0 && f2.above_floor(f)).then(|| f.ln()))
            .collect();
        let mut row: Vec<Option<f64>> = vec![Some(0.0); nv];
        for &(n, c) in &terms {
            let du = u.derivative(2 * n + 1, x, params.mass);
            let ds = derivative_masked(&s2, h, 2 * n + 1)?;
            for (slot, d) in row.iter_mut().zip(ds) {
                *slot = match (*slot, d) {
                    (Some(s), Some(d)) => Some(s - c * du * d),
                    _ => None,
                };
            }
        }
        values.extend(row);
    }
    let field = MaskedField { x_axis: f2.x_axis(), v_axis: f2.v_axis(), values };
    Ok(weighted_average(f2, &field))
}

/// ⟨⟨Q₂⟩⟩ = ∫ f₁ ⟨Q₂⟩ dx / ∫ f₁ dx over unmasked x nodes.
pub fn global_q2(u: &PotentialSeries, f2: &PhaseField, n_terms: usize, params: &MoyalParams) -> Result<f64> {
    let profile = mean_q2(u, f2, n_terms, params)?;
    let f1 = f2.marginal();
    let axis = f2.x_axis();
    let mass = axis.trapezoid(&f1);
    if !(mass.abs() > 0.0) {
        return Err(UdmError::NotNormalizable);
    }
    let acc: f64 = profile
        .values
        .iter()
        .enumerate()
        .filter_map(|(i, q)| q.map(|q| axis.weight(i) * f1[i] * q))
        .sum();
    Ok(acc / mass)
}

/// Σₗ (−1)ˡ (ħ/2)²ˡ / (2l+1)! · ∂²ˡ⁺¹U/∂x²ˡ⁺¹ · ∂²ˡ⁺¹W/∂p²ˡ⁺¹, l = 1…n_terms,
/// for W sampled on an (x, p) grid.
pub fn moyal_rhs(u: &PotentialSeries, w: &PhaseField, n_terms: usize, params: &MoyalParams) -> Result<MaskedField> {
    if n_terms == 0 {
        return Err(UdmError::InvalidParameter("at least one series term is required".into()));
    }
    let terms: Vec<(usize, f64)> = (1..=n_terms)
        .filter(|&l| 2 * l + 1 <= u.degree())
        .map(|l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * (0.5 * params.hbar).powi(2 * l as i32) * (-log_factorial(2 * l + 1)).exp();
            (l, c)
        })
        .filter(|&(_, c)| c != 0.0)
        .collect();
    if let Some(&(l, _)) = terms.last() {
        check_width(w.v_axis(), Stencil::central(2 * l + 1).radius)?;
    }
    let h = w.v_axis().step();
    let (nx, np) = (w.x_axis().len(), w.v_axis().len());
    let mut values = Vec::with_capacity(nx * np);
    for (i, x) in w.x_axis().nodes().enumerate() {
        let mut row: Vec<Option<f64>> = vec![Some(0.0); np];
        for &(l, c) in &terms {
            let du = u.derivative(2 * l + 1, x, params.mass);
            let d = derivative(w.row(i), h, 2 * l + 1)?;
            for (slot, d) in row.iter_mut().zip(d) {
                *slot = match (*slot, d) {
                    (Some(s), Some(d)) => Some(s + c * du * d),
                    _ => None,
                };
            }
        }
        values.extend(row);
    }
    Ok(MaskedField { x_axis: w.x_axis(), v_axis: w.v_axis(), values })
}

/// Discrete residual of f₂ ∂ᵥ(gₙ) + (∂ᵥf₂) gₙ = ∂²ⁿ⁺¹f₂/∂v²ⁿ⁺¹ with
/// gₙ = (1/f₂)∂²ⁿf₂/∂v²ⁿ, summed over the series with its weights and
/// potential derivatives; max-norm over unmasked nodes.
///
/// Term by term the left side is ∂ᵥ(⟨v̇⟩f₂) and the right side the Moyal
/// right-hand side, so the sum vanishes when the closure holds.
pub fn closure_residual(u: &PotentialSeries, f2: &PhaseField, n_terms: usize, params: &MoyalParams) -> Result<f64> {
    let terms = active_terms(u, 0, n_terms, params)?;
    let h = f2.v_axis().step();
    if let Some(&(n, _)) = terms.last() {
        let r = (Stencil::central(2 * n).radius + Stencil::central(1).radius).max(Stencil::central(2 * n + 1).radius);
        check_width(f2.v_axis(), r)?;
    }
    let mut worst = 0.0f64;
    for (i, x) in f2.x_axis().nodes().enumerate() {
        let row = f2.row(i);
        let df = derivative(row, h, 1)?;
        let mut acc: Vec<Option<f64>> = vec![Some(0.0); row.len()];
        for &(n, c) in &terms {
            let du = u.derivative(2 * n + 1, x, params.mass);
            let g = if n == 0 {
                row.iter().map(|&f| f2.above_floor(f).then_some(1.0)).collect()
            } else {
                scaled_even_derivative(f2, row, n)?
            };
            let dg = if n == 0 {
                g.iter().map(|g| g.map(|_| 0.0)).collect()
            } else {
                derivative_masked(&g, h, 1)?
            };
            let top = derivative(row, h, 2 * n + 1)?;
            for j in 0..row.len() {
                acc[j] = match (acc[j], g[j], dg[j], df[j], top[j]) {
                    (Some(a), Some(g), Some(dg), Some(df), Some(top)) => {
                        Some(a + c * du * (row[j] * dg + df * g - top))
                    }
                    _ => None,
                };
            }
        }
        worst = acc.iter().flatten().map(|v| v.abs()).fold(worst, f64::max);
    }
    Ok(worst)
}

/// H₂ = −∫∫ f₂ ln f₂ dx dv; nodes at or below the floor contribute nothing.
pub fn boltzmann_h2(f2: &PhaseField) -> f64 {
    let (xa, va) = (f2.x_axis(), f2.v_axis());
    let mut acc = 0.0;
    for i in 0..xa.len() {
        for (j, &f) in f2.row(i).iter().enumerate() {
            if f > 0.0 && f2.above_floor(f) {
                acc -= xa.weight(i) * va.weight(j) * f * f.ln();
            }
        }
    }
    acc
}
