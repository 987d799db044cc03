//! Brute-force quadrature of the integrals that the closed forms evaluate.
//!
//! Nothing here calls the polynomial, matrix-element, state or energy
//! formulas; only the special functions are shared. Every value comes with
//! the change observed under node refinement.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UdmError};
use crate::grid::Axis;
use crate::special::{
    hermite_complex, hermite_functions, log_factorial, minus_i_pow, OrderLimit, OscillatorParams,
};
use crate::state::CoefficientVector;
use crate::udm::{udm_element, PhasePoint};
use crate::vlasov::PotentialSeries;
use crate::PolyIndexPair;

/// Default Gauss-Hermite order.
pub const DEFAULT_GH_ORDER: usize = 80;
/// Default trapezoid node count for Fourier-type integrals.
pub const DEFAULT_TRAPEZOID_NODES: usize = 1024;
/// Default change allowed between the base and refined rule.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    GaussHermite,
    Trapezoid,
}

/// Quadrature rule selection and its refinement check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Gauss-Hermite order or trapezoid node count.
    pub nodes: usize,
    /// Trapezoid domain; chosen from the Gaussian envelope when absent.
    pub bounds: Option<(f64, f64)>,
    /// Node multiplier of the refined rule.
    pub refinement: usize,
    /// Largest accepted change between the base and refined values,
    /// relative to max(1, |value|).
    pub tolerance: f64,
}

impl QuadratureSpec {
    pub fn gauss_hermite(order: usize) -> Self {
        Self { scheme: Scheme::GaussHermite, nodes: order, bounds: None, refinement: 2, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn trapezoid(nodes: usize) -> Self {
        Self { scheme: Scheme::Trapezoid, nodes, bounds: None, refinement: 2, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn with_bounds(self, min: f64, max: f64) -> Self {
        Self { bounds: Some((min, max)), ..self }
    }

    pub fn with_tolerance(self, tolerance: f64) -> Self {
        Self { tolerance, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(UdmError::InvalidParameter(format!("quadrature needs at least 8 nodes, got {}", self.nodes)));
        }
        if self.refinement < 2 {
            return Err(UdmError::InvalidParameter("refinement factor must be at least 2".into()));
        }
        if let Some((a, b)) = self.bounds {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(UdmError::InvalidParameter(format!("bounds [{a}, {b}] are not finite and ordered")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(UdmError::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(())
    }

    fn expect(&self, scheme: Scheme) -> Result<()> {
        self.validate()?;
        if self.scheme != scheme {
            return Err(UdmError::InvalidParameter(format!("this oracle needs a {scheme:?} rule")));
        }
        Ok(())
    }

    fn refined_nodes(&self) -> usize {
        match self.scheme {
            Scheme::GaussHermite => self.nodes * self.refinement,
            Scheme::Trapezoid => (self.nodes - 1) * self.refinement + 1,
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::gauss_hermite(DEFAULT_GH_ORDER)
    }
}

/// Value on the refined rule and its change from the base rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub change: f64,
}

fn converged<T: Copy>(spec: &QuadratureSpec, coarse: T, fine: T, dist: impl Fn(T, T) -> f64, size: impl Fn(T) -> f64) -> Result<Estimate<T>> {
    let change = dist(coarse, fine);
    let tolerance = spec.tolerance * size(fine).max(1.0);
    if !(change <= tolerance) {
        return Err(UdmError::NonConvergence { change, tolerance });
    }
    Ok(Estimate { value: fine, change })
}

/// Nodes and weights for ∫ e^{−x²} f(x) dx.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Hermite rule of the given order by Newton iteration on the
/// orthonormal Hermite recurrence; cached per order.
pub fn gauss_hermite(order: usize) -> Result<Arc<GaussHermiteRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermiteRule>>>> = OnceLock::new();
    if order == 0 {
        return Err(UdmError::InvalidParameter("Gauss-Hermite order must be positive".into()));
    }
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&order) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(compute_gauss_hermite(order)?);
    cache.lock().expect("rule cache poisoned").insert(order, rule.clone());
    Ok(rule)
}

fn compute_gauss_hermite(n: usize) -> Result<GaussHermiteRule> {
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..(n + 1) / 2 {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut ok = false;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 3e-14 * z.abs().max(1.0) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(UdmError::NonConvergence { change: f64::NAN, tolerance: 3e-14 });
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok(GaussHermiteRule { nodes: x, weights: w })
}

/// Half-width beyond which ψₙ(ξ), n ≤ n_max, is below 1e-16.
fn support_radius(n_max: usize) -> f64 {
    ((2 * n_max + 1) as f64).sqrt() + 9.0
}

/// (1/2πħ) ∫ Ψₙ(x − s/2) Ψₖ(x + s/2) e^{−ips/ħ} ds by the trapezoid rule.
pub fn wigner_transform_direct(
    n: usize,
    k: usize,
    pt: PhasePoint,
    params: &OscillatorParams,
    spec: &QuadratureSpec,
) -> Result<Estimate<Complex64>> {
    spec.expect(Scheme::Trapezoid)?;
    check_orders(&[n, k])?;
    let kappa = params.kappa();
    let hbar = params.hbar();
    let (a, b) = spec.bounds.unwrap_or_else(|| {
        let s = 2.0 * (support_radius(n.max(k)) / kappa + pt.x.abs());
        (-s, s)
    });
    let eval = |nodes: usize| {
        let axis = Axis::new(a, b, nodes)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, s) in axis.nodes().enumerate() {
            let left = hermite_functions(n, kappa * (pt.x - 0.5 * s))[n];
            let right = hermite_functions(k, kappa * (pt.x + 0.5 * s))[k];
            let (sin, cos) = (-pt.p * s / hbar).sin_cos();
            acc += Complex64::new(cos, sin) * (axis.weight(j) * kappa * left * right);
        }
        Ok::<_, UdmError>(acc / (2.0 * PI * hbar))
    };
    let coarse = eval(spec.nodes)?;
    let fine = eval(spec.refined_nodes())?;
    converged(spec, coarse, fine, |u, v| (u - v).norm(), |v| v.norm())
}

/// (1/2πħ) ∫ conj Ψ̃ₙ(p − ξ/2) Ψ̃ₖ(p + ξ/2) e^{ixξ/ħ} dξ by the trapezoid rule.
pub fn wigner_transform_momentum(
    n: usize,
    k: usize,
    pt: PhasePoint,
    params: &OscillatorParams,
    spec: &QuadratureSpec,
) -> Result<Estimate<Complex64>> {
    spec.expect(Scheme::Trapezoid)?;
    check_orders(&[n, k])?;
    let hbar = params.hbar();
    let scale = hbar * params.kappa();
    let (a, b) = spec.bounds.unwrap_or_else(|| {
        let s = 2.0 * (support_radius(n.max(k)) * scale + pt.p.abs());
        (-s, s)
    });
    let phase = minus_i_pow(n).conj() * minus_i_pow(k);
    let eval = |nodes: usize| {
        let axis = Axis::new(a, b, nodes)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, xi) in axis.nodes().enumerate() {
            let left = hermite_functions(n, (pt.p - 0.5 * xi) / scale)[n];
            let right = hermite_functions(k, (pt.p + 0.5 * xi) / scale)[k];
            let (sin, cos) = (pt.x * xi / hbar).sin_cos();
            acc += Complex64::new(cos, sin) * (axis.weight(j) * left * right / scale);
        }
        Ok::<_, UdmError>(phase * acc / (2.0 * PI * hbar))
    };
    let coarse = eval(spec.nodes)?;
    let fine = eval(spec.refined_nodes())?;
    converged(spec, coarse, fine, |u, v| (u - v).norm(), |v| v.norm())
}

fn check_orders(idx: &[usize]) -> Result<()> {
    let limit = OrderLimit::default();
    idx.iter().try_for_each(|&i| limit.check(i))
}

fn shift_norm(n: usize, k: usize) -> f64 {
    (0.5 * ((n + k) as f64 * std::f64::consts::LN_2 + PI.ln() + log_factorial(n) + log_factorial(k))).exp()
}

/// ∫ e^{−ς²} Hₙ(ς + s₁) Hₖ(ς + s₂) dς / √(2ⁿ⁺ᵏ π n! k!) for complex shifts.
pub fn hermite_shift_integral(
    n: usize,
    k: usize,
    s1: Complex64,
    s2: Complex64,
    spec: &QuadratureSpec,
) -> Result<Estimate<Complex64>> {
    spec.expect(Scheme::GaussHermite)?;
    check_orders(&[n, k])?;
    let eval = |order: usize| {
        let rule = gauss_hermite(order)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = Complex64::new(t, 0.0);
            acc += w * hermite_complex(n, t + s1)? * hermite_complex(k, t + s2)?;
        }
        Ok::<_, UdmError>(acc / shift_norm(n, k))
    };
    let coarse = eval(spec.nodes)?;
    let fine = eval(spec.refined_nodes())?;
    converged(spec, coarse, fine, |u, v| (u - v).norm(), |v| v.norm())
}

/// Real-shift form of [`hermite_shift_integral`].
pub fn hermite_shift_integral_real(n: usize, k: usize, s1: f64, s2: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    let e = hermite_shift_integral(n, k, Complex64::new(s1, 0.0), Complex64::new(s2, 0.0), spec)?;
    Ok(Estimate { value: e.value.re, change: e.change })
}

/// Tables of the binomial and radial polynomials on a Gauss-Hermite grid,
/// each evaluated through the Hermite shift integral, for repeated
/// orthogonality integrals.
pub struct OrthoOracle {
    spec: QuadratureSpec,
    n_max: usize,
    coarse: OrthoTables,
    fine: OrthoTables,
}

struct OrthoTables {
    rule: Arc<GaussHermiteRule>,
    /// 𝒫ₙ,ₖ(xₐ, x_b), indexed [pair][a·m + b].
    p: Vec<Vec<f64>>,
    /// Υₙ,ₖ(xₐ), indexed [pair][a].
    y: Vec<Vec<f64>>,
}

impl OrthoTables {
    fn build(order: usize, n_max: usize) -> Result<Self> {
        let rule = gauss_hermite(order)?;
        let m = rule.nodes.len();
        let half = m / 2;
        // h[n][j·m + a] = Hₙ(ς_j + x_a)
        let mut h = vec![vec![0.0; m * m]; n_max + 1];
        for j in 0..m {
            for a in 0..m {
                let t = rule.nodes[j] + rule.nodes[a];
                let (mut prev, mut cur) = (1.0, 2.0 * t);
                h[0][j * m + a] = 1.0;
                if n_max >= 1 {
                    h[1][j * m + a] = cur;
                }
                for (nn, row) in h.iter_mut().enumerate().skip(2) {
                    let next = 2.0 * t * cur - 2.0 * (nn - 1) as f64 * prev;
                    prev = cur;
                    cur = next;
                    row[j * m + a] = cur;
                }
            }
        }
        let dim = n_max + 1;
        let mut p = vec![Vec::new(); dim * dim];
        let mut y = vec![Vec::new(); dim * dim];
        let mirror = |j: usize| m - 1 - j;
        for n in 0..=n_max {
            for k in 0..=n_max {
                let norm = shift_norm(n, k);
                let (hn, hk) = (&h[n], &h[k]);
                // mirrored node pairs summed together: exact parity
                let shift = |a: usize, b: usize| {
                    let mut acc = 0.0;
                    for j in 0..half {
                        let jm = mirror(j);
                        acc += rule.weights[j] * (hn[j * m + a] * hk[j * m + b] + hn[jm * m + a] * hk[jm * m + b]);
                    }
                    if m % 2 == 1 {
                        acc += rule.weights[half] * hn[half * m + a] * hk[half * m + b];
                    }
                    acc / norm
                };
                let mut pt = vec![0.0; m * m];
                for a in 0..m {
                    for b in 0..m {
                        pt[a * m + b] = shift(a, b);
                    }
                }
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                // Υₙ,ₖ(x) = (−1)ⁿ 𝒫ₙ,ₖ(−x, x)
                let yt = (0..m).map(|a| sign * pt[mirror(a) * m + a]).collect();
                p[n * dim + k] = pt;
                y[n * dim + k] = yt;
            }
        }
        Ok(Self { rule, p, y })
    }

    fn integral_p(&self, n_max: usize, q: [usize; 4]) -> f64 {
        let dim = n_max + 1;
        let m = self.rule.nodes.len();
        let (p1, p2) = (&self.p[q[0] * dim + q[1]], &self.p[q[2] * dim + q[3]]);
        let w = &self.rule.weights;
        let mut acc = 0.0;
        // (a, b) and (m−1−a, m−1−b) are summed together
        for a in 0..m {
            for b in 0..m {
                let (am, bm) = (m - 1 - a, m - 1 - b);
                let idx = a * m + b;
                let mdx = am * m + bm;
                if idx > mdx {
                    continue;
                }
                let weight = w[a] * w[b];
                if idx == mdx {
                    acc += weight * p1[idx] * p2[idx];
                } else {
                    acc += weight * (p1[idx] * p2[idx] + p1[mdx] * p2[mdx]);
                }
            }
        }
        acc
    }

    fn integral_y(&self, n_max: usize, q: [usize; 4]) -> f64 {
        let dim = n_max + 1;
        let m = self.rule.nodes.len();
        let (y1, y2) = (&self.y[q[0] * dim + q[1]], &self.y[q[2] * dim + q[3]]);
        let w = &self.rule.weights;
        let mut acc = 0.0;
        for a in 0..m / 2 {
            let am = m - 1 - a;
            acc += w[a] * (y1[a] * y2[a] + y1[am] * y2[am]);
        }
        if m % 2 == 1 {
            acc += w[m / 2] * y1[m / 2] * y2[m / 2];
        }
        acc
    }
}

impl OrthoOracle {
    /// Tables for all index pairs up to `n_max`.
    pub fn new(n_max: usize, spec: &QuadratureSpec) -> Result<Self> {
        spec.expect(Scheme::GaussHermite)?;
        check_orders(&[n_max])?;
        Ok(Self {
            spec: *spec,
            n_max,
            coarse: OrthoTables::build(spec.nodes, n_max)?,
            fine: OrthoTables::build(spec.refined_nodes(), n_max)?,
        })
    }

    fn check(&self, q: [usize; 4]) -> Result<()> {
        match q.iter().find(|&&i| i > self.n_max) {
            Some(&i) => Err(UdmError::OrderOverflow { order: i, max: self.n_max }),
            None => Ok(()),
        }
    }

    /// ∫∫ e^{−x²−y²} 𝒫ₙ₁,ₖ₁(x,y) 𝒫ₙ₂,ₖ₂(x,y) dx dy.
    pub fn integral_p(&self, n1: usize, k1: usize, n2: usize, k2: usize) -> Result<Estimate<f64>> {
        let q = [n1, k1, n2, k2];
        self.check(q)?;
        let coarse = self.coarse.integral_p(self.n_max, q);
        let fine = self.fine.integral_p(self.n_max, q);
        converged(&self.spec, coarse, fine, |u, v| (u - v).abs(), f64::abs)
    }

    /// ∫ e^{−x²} Υₙ₁,ₖ₁(x) Υₙ₂,ₖ₂(x) dx.
    pub fn integral_y(&self, n1: usize, k1: usize, n2: usize, k2: usize) -> Result<Estimate<f64>> {
        let q = [n1, k1, n2, k2];
        self.check(q)?;
        let coarse = self.coarse.integral_y(self.n_max, q);
        let fine = self.fine.integral_y(self.n_max, q);
        converged(&self.spec, coarse, fine, |u, v| (u - v).abs(), f64::abs)
    }
}

/// One-shot form of [`OrthoOracle::integral_p`].
pub fn ortho_integral_p(n1: usize, k1: usize, n2: usize, k2: usize, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    OrthoOracle::new(n1.max(k1).max(n2).max(k2), spec)?.integral_p(n1, k1, n2, k2)
}

/// One-shot form of [`OrthoOracle::integral_y`].
pub fn ortho_integral_y(n1: usize, k1: usize, n2: usize, k2: usize, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    OrthoOracle::new(n1.max(k1).max(n2).max(k2), spec)?.integral_y(n1, k1, n2, k2)
}

/// Bound on |W| at the edge of the energy quadrature domain.
pub const BOUNDARY_BOUND: f64 = 1e-14;

/// ∫∫ ℰ(x, p) W(x, p) dx dp for a pure state, ℰ = p²/2m + U(x).
///
/// W is obtained on a square grid in oscillator units (κx, p/ħκ) from the
/// wave function Σcₙψₙ by its own trapezoid Wigner transform. The transform
/// variable steps by twice the grid spacing; every shifted argument is then
/// a lattice point. `spec.nodes` is the node count
/// per axis; `spec.bounds`, when given, is the domain in oscillator units.
pub fn energy_quadrature(
    c: &CoefficientVector,
    u: &PotentialSeries,
    params: &OscillatorParams,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>> {
    spec.expect(Scheme::Trapezoid)?;
    let n_max = c.n_max();
    let (lo, hi) = spec.bounds.unwrap_or_else(|| {
        let l = ((2 * n_max + 1) as f64).sqrt() + 5.0;
        (-l, l)
    });
    let coarse = energy_on_lattice(c, u, params, lo, hi, spec.nodes)?;
    let fine = energy_on_lattice(c, u, params, lo, hi, spec.refined_nodes())?;
    converged(spec, coarse, fine, |a, b| (a - b).abs(), f64::abs)
}

fn energy_on_lattice(
    c: &CoefficientVector,
    u: &PotentialSeries,
    params: &OscillatorParams,
    lo: f64,
    hi: f64,
    nodes: usize,
) -> Result<f64> {
    let axis = Axis::new(lo, hi, nodes)?;
    let h = axis.step();
    let n_max = c.n_max();
    let reach = support_radius(n_max) + lo.abs().max(hi.abs());
    let half_span = (reach / h).ceil() as usize;
    // ψ on the lattice ξ = lo + (i − half_span)h, i = 0…nodes + 2·half_span
    let ext = nodes + 2 * half_span;
    let psi: Vec<Complex64> = (0..ext)
        .map(|i| {
            let xi = lo + (i as f64 - half_span as f64) * h;
            hermite_functions(n_max, xi)
                .iter()
                .zip(c.coeffs())
                .map(|(f, cn)| cn * f)
                .sum()
        })
        .collect();
    // W̃(ξ, η) = (1/2π) ∫ ψ̄(ξ − σ/2) ψ(ξ + σ/2) e^{−iησ} dσ with σⱼ = 2jh
    let hs = 2.0 * h;
    let etas: Vec<f64> = axis.nodes().collect();
    let mut cos_tab = vec![0.0; nodes * (half_span + 1)];
    let mut sin_tab = vec![0.0; nodes * (half_span + 1)];
    for (q, &eta) in etas.iter().enumerate() {
        for j in 0..=half_span {
            let (s, co) = (eta * hs * j as f64).sin_cos();
            cos_tab[q * (half_span + 1) + j] = co;
            sin_tab[q * (half_span + 1) + j] = s;
        }
    }
    let hbar_omega = params.hbar() * params.omega();
    let kappa = params.kappa();
    let full = u.full_coeffs(params.mass());
    let mut total = 0.0;
    let mut edge = 0.0f64;
    let mut prod = vec![Complex64::new(0.0, 0.0); half_span + 1];
    for i in 0..nodes {
        let centre = i + half_span;
        for (j, slot) in prod.iter_mut().enumerate() {
            *slot = psi[centre - j].conj() * psi[centre + j];
        }
        let x = axis.at(i) / kappa;
        let potential = full.iter().rev().fold(0.0, |acc, &a| acc * x + a);
        let mut row = 0.0;
        for (q, &eta) in etas.iter().enumerate() {
            // f(−σ) = conj f(σ): W̃ = (h_σ/2π)[f(0) + 2 Σⱼ>0 Re(f(σⱼ) e^{−iησⱼ})]
            let base = q * (half_span + 1);
            let mut acc = 0.5 * prod[0].re;
            for j in 1..=half_span {
                acc += prod[j].re * cos_tab[base + j] + prod[j].im * sin_tab[base + j];
            }
            let w = acc * hs / PI;
            if i == 0 || i + 1 == nodes || q == 0 || q + 1 == nodes {
                edge = edge.max(w.abs());
            }
            let energy = 0.5 * hbar_omega * eta * eta + potential;
            row += axis.weight(q) * energy * w;
        }
        total += axis.weight(i) * row;
    }
    if edge > BOUNDARY_BOUND {
        return Err(UdmError::BoundaryLeak { value: edge });
    }
    Ok(total)
}

/// Integration axis of a marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marginal {
    /// ∫ wₙ,ₖ dp against Ψₙ(x)Ψₖ(x).
    X,
    /// ∫ wₙ,ₖ dx against conj Ψ̃ₙ(p) Ψ̃ₖ(p).
    P,
}

/// Max deviation of the matrix-element marginal from the eigenfunction
/// product over the nodes of `grid`, integrating by `spec` trapezoid nodes.
pub fn marginal_check(
    n: usize,
    k: usize,
    axis: Marginal,
    grid: Axis,
    params: &OscillatorParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.expect(Scheme::Trapezoid)?;
    let pair = PolyIndexPair::new(n, k)?;
    let kappa = params.kappa();
    let hk = params.hbar() * kappa;
    let radius = support_radius(n.max(k));
    let (lo, hi) = spec.bounds.unwrap_or(match axis {
        Marginal::X => (-radius * hk, radius * hk),
        Marginal::P => (-radius / kappa, radius / kappa),
    });
    let inner = Axis::new(lo, hi, spec.nodes)?;
    let mut worst = 0.0f64;
    for q in grid.nodes() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, t) in inner.nodes().enumerate() {
            let pt = match axis {
                Marginal::X => PhasePoint { x: q, p: t },
                Marginal::P => PhasePoint { x: t, p: q },
            };
            acc += inner.weight(j) * udm_element(pair, pt, params)?;
        }
        let want = match axis {
            Marginal::X => {
                let f = hermite_functions(n.max(k), kappa * q);
                Complex64::new(kappa * f[n] * f[k], 0.0)
            }
            Marginal::P => {
                let f = hermite_functions(n.max(k), q / hk);
                minus_i_pow(n).conj() * minus_i_pow(k) * (f[n] * f[k] / hk)
            }
        };
        worst = worst.max((acc - want).norm());
    }
    Ok(worst)
}
