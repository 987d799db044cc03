//! Closed form versus oracle suites with machine-readable reports.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{energy_of_state, quartic_diagonal_filter};
use crate::error::{Result, UdmError};
use crate::grid::Axis;
use crate::oracles::{
    energy_quadrature, hermite_shift_integral, marginal_check, wigner_transform_direct, wigner_transform_momentum,
    Marginal, OrthoOracle, QuadratureSpec,
};
use crate::polynomials::{mod_kronecker, norm_n1, norm_n2, poly_p};
use crate::special::{laguerre_complex, OscillatorParams};
use crate::state::{basis_wc, density_from_coeffs, wigner_rotation_form, wigner_trace, CoefficientVector, DensityMatrix};
use crate::udm::{udm_element, PhasePoint};
use crate::vlasov::{
    global_q2, mean_accel_avg, mean_q2, mean_q2_direct, closure_residual, MoyalParams, PhaseField, PotentialSeries,
};
use crate::PolyIndexPair;

const SEED: u64 = 0x5eed_0dd5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Udm,
    Dual,
    Hermiticity,
    Marginals,
    Laguerre,
    Shift,
    Orthogonality,
    Rotation,
    Winding,
    Moyal,
    Dissipation,
    Energy,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Udm,
        Suite::Dual,
        Suite::Hermiticity,
        Suite::Marginals,
        Suite::Laguerre,
        Suite::Shift,
        Suite::Orthogonality,
        Suite::Rotation,
        Suite::Winding,
        Suite::Moyal,
        Suite::Dissipation,
        Suite::Energy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Udm => "udm",
            Suite::Dual => "dual",
            Suite::Hermiticity => "hermiticity",
            Suite::Marginals => "marginals",
            Suite::Laguerre => "laguerre",
            Suite::Shift => "shift",
            Suite::Orthogonality => "orthogonality",
            Suite::Rotation => "rotation",
            Suite::Winding => "winding",
            Suite::Moyal => "moyal",
            Suite::Dissipation => "dissipation",
            Suite::Energy => "energy",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Suite::Udm => "closed-form matrix elements against the direct Wigner transform",
            Suite::Dual => "coordinate and momentum Wigner transforms agree",
            Suite::Hermiticity => "w(n,k) is the conjugate of w(k,n)",
            Suite::Marginals => "marginals of w(n,k) are eigenfunction products",
            Suite::Laguerre => "diagonal binomial polynomials are Laguerre polynomials",
            Suite::Shift => "binomial polynomials as Hermite shift integrals",
            Suite::Orthogonality => "orthogonality integrals of both polynomial families",
            Suite::Rotation => "rotation form, reality and circle constancy of W",
            Suite::Winding => "modulus, winding and sign changes along circles",
            Suite::Moyal => "closure residual of the mean acceleration",
            Suite::Dissipation => "averaged acceleration and dissipation",
            Suite::Energy => "closed-form energy against phase-space quadrature",
        }
    }
}

impl FromStr for Suite {
    type Err = UdmError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| UdmError::Config(format!("unknown suite {s:?}")))
    }
}

/// Settings shared by the suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Factor applied to ħ on the oracle side only; 1 for a real run.
    pub oracle_hbar_factor: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { oracle_hbar_factor: 1.0 }
    }
}

impl VerifyOptions {
    fn oracle_params(&self, params: &OscillatorParams) -> Result<OscillatorParams> {
        params.with_hbar_scaled(self.oracle_hbar_factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn bound(name: &str, max_deviation: f64, tolerance: f64) -> Self {
        Self { name: name.into(), max_deviation, tolerance, passed: max_deviation <= tolerance, detail: None }
    }

    fn exact(name: &str, ok: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            max_deviation: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
            detail: Some(detail),
        }
    }

    fn error(name: &str, tolerance: f64, e: &UdmError) -> Self {
        Self { name: name.into(), max_deviation: f64::NAN, tolerance, passed: false, detail: Some(e.to_string()) }
    }

    fn from_result(name: &str, tolerance: f64, r: Result<f64>) -> Self {
        match r {
            Ok(d) => Self::bound(name, d, tolerance),
            Err(e) => Self::error(name, tolerance, &e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub description: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub options: VerifyOptions,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn run(suites: &[Suite], opts: &VerifyOptions) -> Report {
    let reports: Vec<SuiteReport> = suites.iter().map(|&s| run_suite(s, opts)).collect();
    let passed = reports.iter().all(|r| r.passed);
    Report { options: *opts, suites: reports, passed }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let checks = match suite {
        Suite::Udm => udm_suite(opts),
        Suite::Dual => dual_suite(opts),
        Suite::Hermiticity => hermiticity_suite(),
        Suite::Marginals => marginals_suite(),
        Suite::Laguerre => laguerre_suite(),
        Suite::Shift => shift_suite(),
        Suite::Orthogonality => orthogonality_suite(),
        Suite::Rotation => rotation_suite(),
        Suite::Winding => winding_suite(),
        Suite::Moyal => moyal_suite(),
        Suite::Dissipation => dissipation_suite(),
        Suite::Energy => energy_suite(opts),
    };
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    SuiteReport { suite, description: suite.description().into(), checks, passed }
}

const UNIT: OscillatorParams = OscillatorParams::natural();

fn seeded(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

fn pair(n: usize, k: usize) -> Result<PolyIndexPair> {
    PolyIndexPair::new(n, k)
}

fn sweep_points() -> Vec<PhasePoint> {
    let axis = Axis::new(-4.0, 4.0, 21).expect("fixed axis");
    axis.nodes().flat_map(|x| axis.nodes().map(move |p| PhasePoint { x, p })).collect()
}

/// Trapezoid rule for the transform oracles over the sweep.
fn transform_spec() -> QuadratureSpec {
    QuadratureSpec::trapezoid(513)
}

fn udm_suite(opts: &VerifyOptions) -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let oracle = opts.oracle_params(&UNIT)?;
        let spec = transform_spec();
        let (mut dev, mut change) = (0.0f64, 0.0f64);
        for n in 0..=8 {
            for k in 0..=8 {
                let pk = pair(n, k)?;
                for pt in sweep_points() {
                    let w = udm_element(pk, pt, &UNIT)?;
                    let o = wigner_transform_direct(n, k, pt, &oracle, &spec)?;
                    dev = dev.max((w - o.value).norm());
                    change = change.max(o.change);
                }
            }
        }
        Ok((dev, change))
    };
    oracle_checks("closed form vs direct transform", 1e-8, run())
}

fn oracle_checks(name: &str, tolerance: f64, r: Result<(f64, f64)>) -> Vec<Check> {
    match r {
        Ok((dev, change)) => vec![
            Check::bound(name, dev, tolerance),
            Check::bound("oracle refinement change", change, tolerance / 10.0),
        ],
        Err(e) => vec![Check::error(name, tolerance, &e)],
    }
}

fn dual_suite(opts: &VerifyOptions) -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let oracle = opts.oracle_params(&UNIT)?;
        let spec = transform_spec();
        let (mut dev, mut change) = (0.0f64, 0.0f64);
        for n in 0..=8 {
            for k in 0..=8 {
                for pt in sweep_points() {
                    let a = wigner_transform_direct(n, k, pt, &oracle, &spec)?;
                    let b = wigner_transform_momentum(n, k, pt, &oracle, &spec)?;
                    dev = dev.max((a.value - b.value).norm());
                    change = change.max(a.change).max(b.change);
                }
            }
        }
        Ok((dev, change))
    };
    oracle_checks("direct vs momentum transform", 1e-8, run())
}

fn hermiticity_suite() -> Vec<Check> {
    let run = || -> Result<f64> {
        let mut rng = seeded(3);
        let mut dev = 0.0f64;
        for _ in 0..200 {
            let pt = PhasePoint { x: rng.gen_range(-4.0..4.0), p: rng.gen_range(-4.0..4.0) };
            for n in 0..=12 {
                for k in 0..=12 {
                    let a = udm_element(pair(n, k)?, pt, &UNIT)?;
                    let b = udm_element(pair(k, n)?, pt, &UNIT)?;
                    dev = dev.max((a - b.conj()).norm());
                }
            }
        }
        Ok(dev)
    };
    vec![Check::from_result("w(n,k) - conj w(k,n)", 1e-12, run())]
}

fn marginals_suite() -> Vec<Check> {
    let grid = Axis::new(-4.0, 4.0, 401).expect("fixed axis");
    let spec = QuadratureSpec::trapezoid(257);
    let run = |axis: Marginal| -> Result<f64> {
        let mut dev = 0.0f64;
        for n in 0..=8 {
            for k in 0..=8 {
                dev = dev.max(marginal_check(n, k, axis, grid, &UNIT, &spec)?);
            }
        }
        Ok(dev)
    };
    vec![
        Check::from_result("coordinate marginal", 1e-8, run(Marginal::X)),
        Check::from_result("momentum marginal", 1e-8, run(Marginal::P)),
    ]
}

fn random_complex(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn laguerre_suite() -> Vec<Check> {
    let run = || -> Result<f64> {
        let mut rng = seeded(5);
        let mut dev = 0.0f64;
        for _ in 0..100 {
            let (z1, z2) = (random_complex(&mut rng, 1.5), random_complex(&mut rng, 1.5));
            for n in 0..=12 {
                let p = poly_p(pair(n, n)?, z1, z2)?;
                let l = laguerre_complex(n, -2.0 * z1 * z2)?;
                dev = dev.max((p - l).norm() / l.norm().max(1.0));
            }
        }
        Ok(dev)
    };
    vec![Check::from_result("P(n,n) vs L_n(-2 z1 z2), relative", 1e-10, run())]
}

fn shift_suite() -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let mut rng = seeded(6);
        let spec = QuadratureSpec::default();
        let (mut dev, mut change) = (0.0f64, 0.0f64);
        for _ in 0..10 {
            let (s1, s2) = (random_complex(&mut rng, 2.0), random_complex(&mut rng, 2.0));
            for n in 0..=8 {
                for k in 0..=8 {
                    let p = poly_p(pair(n, k)?, s1, s2)?;
                    let o = hermite_shift_integral(n, k, s1, s2, &spec)?;
                    dev = dev.max((p - o.value).norm() / p.norm().max(1.0));
                    change = change.max(o.change / p.norm().max(1.0));
                }
            }
        }
        Ok((dev, change))
    };
    oracle_checks("poly_p vs shift integral, relative", 1e-8, run())
}

fn orthogonality_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    let oracle = match OrthoOracle::new(12, &QuadratureSpec::default()) {
        Ok(o) => o,
        Err(e) => return vec![Check::error("orthogonality tables", 1e-10, &e)],
    };
    let mut quads = Vec::new();
    for n1 in 0..=12usize {
        for k1 in 0..=12 - n1 {
            for n2 in 0..=12 - n1 - k1 {
                for k2 in 0..=12 - n1 - k1 - n2 {
                    quads.push([n1, k1, n2, k2]);
                }
            }
        }
    }
    type Closed = fn(usize, usize, usize, usize) -> Result<f64>;
    let families: [(&str, Closed, bool); 2] = [("N2", norm_n2, true), ("N1", norm_n1, false)];
    for (label, closed, two_dim) in families {
        let integral = |q: [usize; 4]| {
            if two_dim {
                oracle.integral_p(q[0], q[1], q[2], q[3])
            } else {
                oracle.integral_y(q[0], q[1], q[2], q[3])
            }
        };
        let run = || -> Result<[f64; 4]> {
            let (mut zero, mut vanishing, mut rel, mut change) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for &q in &quads {
                let o = integral(q)?;
                change = change.max(o.change / o.value.abs().max(1.0));
                if mod_kronecker(q[0] + q[2], q[1] + q[3]) == 0 {
                    zero = zero.max(o.value.abs());
                    continue;
                }
                let c = closed(q[0], q[1], q[2], q[3])?;
                // Cauchy-Schwarz bound on the integral
                let scale = (closed(q[0], q[1], q[0], q[1])? * closed(q[2], q[3], q[2], q[3])?).sqrt();
                if c.abs() <= 1e-10 * scale {
                    vanishing = vanishing.max(c.abs()).max(o.value.abs());
                } else {
                    rel = rel.max((o.value - c).abs() / c.abs());
                }
            }
            Ok([zero, vanishing, rel, change])
        };
        match run() {
            Ok([zero, vanishing, rel, change]) => {
                checks.push(Check::bound(&format!("{label} parity zeros"), zero, 1e-10));
                checks.push(Check::bound(&format!("{label} other vanishing integrals"), vanishing, 1e-10));
                checks.push(Check::bound(&format!("{label} closed form, relative"), rel, 1e-8));
                checks.push(Check::bound(&format!("{label} oracle refinement change"), change, 1e-9));
            }
            Err(e) => checks.push(Check::error(label, 1e-8, &e)),
        }
    }
    let special = oracle.integral_y(1, 1, 1, 1).map(|o| (o.value - 2.0 * PI.sqrt()).abs());
    checks.push(Check::from_result("N1(1,1,1,1) = 2 sqrt(pi)", 1e-10, special));
    let special = norm_n1(1, 1, 1, 1).map(|v| (v - 2.0 * PI.sqrt()).abs());
    checks.push(Check::from_result("closed N1(1,1,1,1) = 2 sqrt(pi)", 1e-10, special));
    checks
}

/// Normalized state with uniformly drawn real and imaginary parts.
pub fn random_state(rng: &mut impl Rng, n_max: usize) -> Result<CoefficientVector> {
    let c: Vec<Complex64> =
        (0..=n_max).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    CoefficientVector::normalize(c)
}

fn rotation_suite() -> Vec<Check> {
    let mut rng = seeded(8);
    let run = |rng: &mut ChaCha8Rng| -> Result<(f64, f64)> {
        let (mut dev, mut imag) = (0.0f64, 0.0f64);
        for _ in 0..100 {
            let c = random_state(rng, 10)?;
            let rho = density_from_coeffs(&c)?;
            for _ in 0..50 {
                let pt = PhasePoint { x: rng.gen_range(-3.0..3.0), p: rng.gen_range(-3.0..3.0) };
                let rot = wigner_rotation_form(&c, pt, &UNIT)?;
                let tr = wigner_trace(&rho, pt, &UNIT)?;
                dev = dev.max((rot - tr).abs());
                imag = imag.max(trace_sum(&rho, pt)?.im.abs());
            }
        }
        Ok((dev, imag))
    };
    let mut checks = match run(&mut rng) {
        Ok((dev, imag)) => vec![
            Check::bound("rotation form vs trace", dev, 1e-10),
            Check::bound("imaginary part of the trace", imag, 1e-10),
        ],
        Err(e) => vec![Check::error("rotation form vs trace", 1e-10, &e)],
    };
    let circle = |rng: &mut ChaCha8Rng| -> Result<f64> {
        let mut dev = 0.0f64;
        for _ in 0..20 {
            let pops: Vec<f64> = (0..=10).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = pops.iter().sum();
            let rho = DensityMatrix::diagonal(&pops.iter().map(|p| p / total).collect::<Vec<_>>())?;
            let eps = rng.gen_range(0.1..4.0);
            let values: Vec<f64> = (0..64)
                .map(|j| wigner_trace(&rho, PhasePoint::from_polar(eps, TAU * j as f64 / 64.0, &UNIT), &UNIT))
                .collect::<Result<_>>()?;
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            dev = dev.max(hi - lo);
        }
        Ok(dev)
    };
    checks.push(Check::from_result("diagonal state constant on circles", 1e-12, circle(&mut rng)));
    checks
}

fn trace_sum(rho: &DensityMatrix, pt: PhasePoint) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..rho.dim() {
        for n in 0..rho.dim() {
            sum += rho.get(k, n) * udm_element(pair(n, k)?, pt, &UNIT)?;
        }
    }
    Ok(sum)
}

/// Number of sign changes of the cosine basis function around a circle,
/// counted cyclically over `samples` points offset by half a step.
pub fn circle_sign_changes(p: PolyIndexPair, eps: f64, samples: usize, params: &OscillatorParams) -> Result<usize> {
    let values: Vec<f64> = (0..samples)
        .map(|j| basis_wc(p, PhasePoint::from_polar(eps, TAU * (j as f64 + 0.5) / samples as f64, params), params))
        .collect::<Result<_>>()?;
    Ok((0..samples).filter(|&j| values[j] * values[(j + 1) % samples] < 0.0).count())
}

fn winding_suite() -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let (mut modulus, mut winding) = (0.0f64, 0.0f64);
        for n in 0..=10 {
            for k in 0..=10 {
                let p = pair(n, k)?;
                let eps = [1.3, 0.7, 2.1, 0.45]
                    .into_iter()
                    .find(|&e| udm_element(p, PhasePoint::from_polar(e, 0.0, &UNIT), &UNIT).map_or(false, |w| w.norm() > 1e-6))
                    .ok_or_else(|| UdmError::InvalidParameter(format!("no usable circle for ({n},{k})")))?;
                let w: Vec<Complex64> = (0..256)
                    .map(|j| udm_element(p, PhasePoint::from_polar(eps, TAU * j as f64 / 256.0, &UNIT), &UNIT))
                    .collect::<Result<_>>()?;
                let (lo, hi) = w.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v.norm()), b.max(v.norm())));
                modulus = modulus.max(hi - lo);
                let total: f64 = (0..256).map(|j| (w[(j + 1) % 256] / w[j]).arg()).sum();
                winding = winding.max((total - TAU * (n as f64 - k as f64)).abs());
            }
        }
        Ok((modulus, winding))
    };
    let mut checks = match run() {
        Ok((m, w)) => vec![Check::bound("modulus constant on circles", m, 1e-12), Check::bound("phase winding 2pi(n-k)", w, 1e-8)],
        Err(e) => vec![Check::error("winding", 1e-8, &e)],
    };
    for (n, k, want) in [(5usize, 2usize, 6usize), (5, 20, 30)] {
        match pair(n, k).and_then(|p| circle_sign_changes(p, 1.0, 720, &UNIT)) {
            Ok(got) => checks.push(Check::exact(&format!("sign changes of wc({n},{k})"), got == want, format!("{got} (expected {want})"))),
            Err(e) => checks.push(Check::error(&format!("sign changes of wc({n},{k})"), 0.0, &e)),
        }
    }
    checks
}

/// e^{−x²/2 − v²/2σ²}/(2πσ) on the given axes.
pub fn gaussian_fixture(xs: Axis, vs: Axis, sigma: f64) -> Result<PhaseField> {
    PhaseField::from_fn(xs, vs, |x, v| (-x * x / 2.0 - v * v / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma))
}

/// Residual on the Gaussian fixture for the quartic ½x² + μx⁴ at v-spacing `h`.
pub fn residual_at(u: &PotentialSeries, h: f64) -> Result<f64> {
    let len = (12.0 / h).round() as usize + 1;
    let f = gaussian_fixture(Axis::new(-2.0, 2.0, 9)?, Axis::new(-6.0, 6.0, len)?, 1.0)?;
    closure_residual(u, &f, crate::vlasov::DEFAULT_TERMS, &MoyalParams::from(&UNIT))
}

fn moyal_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    let quartic = PotentialSeries::quartic(1.0, 0.2).expect("fixed potential");
    let harmonic = PotentialSeries::harmonic(1.0).expect("fixed potential");
    let fine = residual_at(&quartic, 0.01);
    let coarse = residual_at(&quartic, 0.02);
    checks.push(Check::from_result("quartic residual at h = 0.01", 1e-5, fine.clone()));
    match (coarse, fine) {
        (Ok(c), Ok(f)) => {
            let ratio = c / f;
            checks.push(Check { detail: Some(format!("reduction {ratio:.3}")), ..Check::bound("refinement reduction >= 8", 8.0 / ratio, 1.0) });
        }
        (Err(e), _) | (_, Err(e)) => checks.push(Check::error("refinement reduction >= 8", 1.0, &e)),
    }
    checks.push(Check::from_result("harmonic residual", 1e-10, residual_at(&harmonic, 0.01)));
    checks
}

fn dissipation_suite() -> Vec<Check> {
    let qm = MoyalParams::from(&UNIT);
    let mut checks = Vec::new();
    let avg = || -> Result<f64> {
        let xs = Axis::new(-2.0, 2.0, 11)?;
        let f = gaussian_fixture(xs, Axis::new(-8.0, 8.0, 801)?, 1.0)?;
        let mu = 0.2;
        let u = PotentialSeries::quartic(1.0, mu)?;
        let profile = mean_accel_avg(&u, &f, &qm)?;
        let mut dev = 0.0f64;
        for (x, a) in xs.nodes().zip(&profile.values) {
            let a = a.ok_or_else(|| UdmError::InvalidGrid("averaged acceleration masked".into()))?;
            dev = dev.max((a + u.derivative(1, x, 1.0)).abs());
        }
        Ok(dev)
    };
    checks.push(Check::from_result("mean_accel_avg vs -U'/m", 1e-6, avg()));
    let null = || -> Result<f64> {
        let f = gaussian_fixture(Axis::new(-2.0, 2.0, 11)?, Axis::new(-8.0, 8.0, 401)?, 0.9)?;
        let u = PotentialSeries::new(vec![0.0, 0.0, 0.0, 0.3, 0.2, 0.1], 1.0)?;
        Ok(mean_q2(&u, &f, 4, &qm)?.max_abs().max(global_q2(&u, &f, 4, &qm)?.abs()))
    };
    checks.push(Check::from_result("<Q2> on Gaussian-in-v fields", 1e-8, null()));
    let gap = |len: usize| -> Result<(f64, f64)> {
        let xs = Axis::new(-2.0, 2.0, 11)?;
        let vs = Axis::new(-8.0, 8.0, len)?;
        let f = PhaseField::from_fn(xs, vs, |x, v| (-x * x / 2.0 - v * v / 2.0).exp() * (1.0 + 0.1 * (v - 0.5).powi(4)))?;
        let u = PotentialSeries::quartic(1.0, 0.2)?;
        let a = mean_q2(&u, &f, 4, &qm)?;
        let b = mean_q2_direct(&u, &f, 4, &qm)?;
        let scale = a.max_abs();
        let mut dev = 0.0f64;
        for (a, b) in a.values.iter().zip(&b.values) {
            match (a, b) {
                (Some(a), Some(b)) => dev = dev.max((a - b).abs()),
                _ => return Err(UdmError::InvalidGrid("averaged dissipation masked".into())),
            }
        }
        Ok((dev / scale, scale))
    };
    match (gap(801), gap(1601)) {
        (Ok((coarse, _)), Ok((fine, scale))) => {
            checks.push(Check {
                detail: Some(format!("scale {scale:.6e}")),
                ..Check::bound("two-route <Q2> on the perturbed Gaussian, relative", fine, 1e-6)
            });
            let ratio = coarse / fine;
            checks.push(Check {
                detail: Some(format!("reduction {ratio:.3}")),
                ..Check::bound("two-route gap shrinks under refinement", 1.0 / ratio.max(f64::MIN_POSITIVE), 1.0)
            });
        }
        (Err(e), _) | (_, Err(e)) => checks.push(Check::error("two-route <Q2>", 1e-6, &e)),
    }
    checks
}

fn energy_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    let spec = QuadratureSpec::trapezoid(121);
    let run = || -> Result<(f64, f64)> {
        let oracle = opts.oracle_params(&UNIT)?;
        let mut rng = seeded(12);
        let (mut gap, mut change) = (0.0f64, 0.0f64);
        for mu in [0.0, 0.05, 0.2] {
            let u = PotentialSeries::quartic(1.0, mu)?;
            for _ in 0..20 {
                let n_max = rng.gen_range(0..=6);
                let c = random_state(&mut rng, n_max)?;
                let closed = energy_of_state(&c, &u, &UNIT)?.total;
                let q = energy_quadrature(&c, &u, &oracle, &spec)?;
                gap = gap.max((closed - q.value).abs() / closed.abs());
                change = change.max(q.change / closed.abs());
            }
        }
        Ok((gap, change))
    };
    checks.extend(oracle_checks("closed form vs quadrature, relative", 1e-6, run()));
    let levels = || -> Result<f64> {
        let u = PotentialSeries::harmonic(1.0)?;
        let mut dev = 0.0f64;
        for n in 0..=12 {
            let e = energy_of_state(&CoefficientVector::eigenstate(n, n)?, &u, &UNIT)?.total;
            dev = dev.max((e - (n as f64 + 0.5)).abs());
        }
        Ok(dev)
    };
    checks.push(Check::from_result("eigenstate levels hbar omega (n + 1/2)", 1e-12, levels()));
    let ground = || -> Result<f64> {
        let mut dev = 0.0f64;
        for mu in [0.05, 0.2, 1.0] {
            let e = energy_of_state(&CoefficientVector::eigenstate(0, 0)?, &PotentialSeries::quartic(1.0, mu)?, &UNIT)?;
            dev = dev.max((e.total - 0.5 - 0.75 * mu).abs());
        }
        Ok(dev)
    };
    checks.push(Check::from_result("quartic ground-state shift 0.75 mu", 1e-8, ground()));
    match PotentialSeries::quartic(1.0, 0.1) {
        Ok(u) => {
            let set = quartic_diagonal_filter(&u);
            checks.push(Check::exact("quartic admissible diagonals", set == [-4, -2, 0, 2, 4], format!("{set:?}")));
        }
        Err(e) => checks.push(Check::error("quartic admissible diagonals", 0.0, &e)),
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn fast_suites_pass() {
        for s in [Suite::Laguerre, Suite::Winding, Suite::Hermiticity] {
            let r = run_suite(s, &VerifyOptions::default());
            assert!(r.passed, "{r:#?}");
        }
    }

    #[test]
    fn failing_check_serializes_nan_as_null() {
        let c = Check::error("x", 1.0, &UdmError::NotRankOne);
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert!(v["max_deviation"].is_null());
        assert!(!c.passed);
    }
}
