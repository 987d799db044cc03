//! `udm`: phase-space grids, tables and verification suites from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use wigner_udm::config::{read_wavefunction_csv, Fixture, Format, RunConfig, StateSource};
use wigner_udm::energy::{energy_closed_form, quartic_diagonal_filter};
use wigner_udm::grid::Axis;
use wigner_udm::oracles::{energy_quadrature, QuadratureSpec};
use wigner_udm::output::{format_number, write_file, Table};
use wigner_udm::polynomials::poly_y;
use wigner_udm::special::log_factorial;
use wigner_udm::state::{basis_wc, basis_ws, coeffs_from_samples, density_from_coeffs, wigner_grid, CoefficientVector};
use wigner_udm::udm::PhasePoint;
use wigner_udm::verify::{self, Suite, VerifyOptions};
use wigner_udm::vlasov::{
    boltzmann_h2, dissipation_q2, global_q2, mean_accel, mean_accel_avg, mean_q2, MoyalParams, PhaseField,
    DEFAULT_TERMS,
};
use wigner_udm::{DensityMatrix, PolyIndexPair, UdmError};

/// Largest accepted relative gap between closed-form and quadrature energy.
const ENERGY_GAP: f64 = 1e-6;
/// Basis size used to project a sampled wave function when none is given.
const DEFAULT_PROJECTION_NMAX: usize = 16;

#[derive(Parser)]
#[command(name = "udm", version, about = "Wigner functions through the universal density matrix")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisKind {
    Wc,
    Ws,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureKind {
    Gaussian,
    Perturbed,
}

#[derive(Subcommand)]
enum Command {
    /// Sample W(x, p) of the configured state.
    Wigner {
        #[command(flatten)]
        common: Common,
        /// Basis size for projecting a sampled wave function.
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Sample the cosine or sine basis density of one index pair.
    Basis {
        #[command(flatten)]
        common: Common,
        /// Index pair as n,k.
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        #[arg(long, value_enum, default_value = "wc")]
        kind: BasisKind,
    },
    /// Tabulate e^{-x²} Υ(n,k)(x) / √(2^{n+k} n! k!).
    PolyTable {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = 601)]
        nx: usize,
    },
    /// Closed-form energy of the configured state and potential.
    Energy {
        #[command(flatten)]
        common: Common,
        /// Cross-check against phase-space quadrature.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Mean acceleration, dissipation fields and H₂ for an analytic f₂.
    Dissipation {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        fixture: Option<FixtureKind>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TERMS)]
        terms: usize,
        /// Set ħ = 0 in the series.
        #[arg(long)]
        classical: bool,
    },
    /// Run closed form versus oracle suites.
    Verify {
        /// Output file for the JSON report; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suite to run; repeatable, all suites when absent.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Scale ħ on the oracle side only (sensitivity canary).
        #[arg(long, default_value_t = 1.0)]
        perturb_hbar: f64,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (n, k) = s.split_once(',').ok_or("expected n,k")?;
    let n = n.trim().parse().map_err(|e| format!("{e}"))?;
    let k = k.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((n, k))
}

enum Failure {
    Config(String),
    Validation(String),
}

impl From<UdmError> for Failure {
    fn from(e: UdmError) -> Self {
        match e {
            UdmError::Config(m) => Failure::Config(m),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Wigner { common, nmax } => cmd_wigner(&common, nmax),
        Command::Basis { common, pair, kind } => cmd_basis(&common, pair, kind),
        Command::PolyTable { common, nmax, kmax, x_min, x_max, nx } => cmd_poly_table(&common, nmax, kmax, x_min, x_max, nx),
        Command::Energy { common, verify, nmax } => cmd_energy(&common, verify, nmax),
        Command::Dissipation { common, fixture, sigma, terms, classical } => {
            cmd_dissipation(&common, fixture, sigma, terms, classical)
        }
        Command::Verify { out, suites, perturb_hbar } => cmd_verify(out, &suites, perturb_hbar),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    match &common.config {
        Some(path) => Ok(RunConfig::from_path(path)?),
        None => Ok(RunConfig::default()),
    }
}

fn format_of(common: &Common, cfg: &RunConfig) -> Format {
    common.format.map(Format::from).unwrap_or(cfg.output.format)
}

fn out_path(common: &Common, cfg: &RunConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.output.path.as_ref().map(|p| cfg.resolve(p)))
}

fn emit(table: &Table, common: &Common, cfg: &RunConfig) -> CliResult {
    let format = format_of(common, cfg);
    match out_path(common, cfg) {
        Some(path) => table.write(&path, format)?,
        None => print!("{}", table.render(format)),
    }
    Ok(())
}

fn params_json(cfg: &RunConfig) -> Value {
    json!({ "hbar": cfg.params.hbar(), "mass": cfg.params.mass(), "omega": cfg.params.omega() })
}

/// Coefficient vector, warning on a norm shortfall instead of failing.
fn coefficients(c: Vec<Complex64>) -> Result<CoefficientVector, Failure> {
    let v = match CoefficientVector::new(c.clone()) {
        Ok(v) => v,
        Err(UdmError::NotNormalized { .. }) => CoefficientVector::unnormalized(c)?,
        Err(e) => return Err(e.into()),
    };
    if !v.is_normalized() {
        eprintln!("warning: coefficient norm shortfall {:e} exceeds {:e}", v.shortfall(), v.norm_tolerance());
    }
    Ok(v)
}

fn pure_state(cfg: &RunConfig, nmax: Option<usize>) -> Result<Option<CoefficientVector>, Failure> {
    match cfg.state.source()? {
        StateSource::Coefficients(c) => Ok(Some(coefficients(c)?)),
        StateSource::Wavefunction { path, n_max } => {
            let psi = read_wavefunction_csv(&cfg.resolve(&path))?;
            let n = nmax.or(n_max).unwrap_or(DEFAULT_PROJECTION_NMAX);
            let c = coeffs_from_samples(&psi, &cfg.params, n)?;
            if !c.is_normalized() {
                eprintln!("warning: projected norm shortfall {:e} exceeds {:e}", c.shortfall(), c.norm_tolerance());
            }
            Ok(Some(c))
        }
        StateSource::Populations(_) => Ok(None),
    }
}

fn density(cfg: &RunConfig, nmax: Option<usize>) -> Result<(DensityMatrix, Value), Failure> {
    if let StateSource::Populations(p) = cfg.state.source()? {
        let rho = DensityMatrix::diagonal(&p)?;
        let shortfall = (1.0 - rho.trace().re).abs();
        let meta = json!({ "n_max": p.len() - 1, "norm_shortfall": shortfall, "source": "populations" });
        return Ok((rho, meta));
    }
    let c = pure_state(cfg, nmax)?.expect("pure source");
    let source = match cfg.state.source()? {
        StateSource::Wavefunction { .. } => "wavefunction",
        _ => "coefficients",
    };
    let meta = json!({
        "n_max": c.n_max(),
        "norm_shortfall": c.shortfall(),
        "normalized": c.is_normalized(),
        "source": source,
    });
    Ok((density_from_coeffs(&c)?, meta))
}

fn cmd_wigner(common: &Common, nmax: Option<usize>) -> CliResult {
    let cfg = load(common)?;
    let (rho, state_meta) = density(&cfg, nmax)?;
    let grid = wigner_grid(&rho, cfg.grid.x_axis()?, cfg.grid.p_axis()?, &cfg.params)?;
    let mut table = Table::from_grid(&grid, ["x", "p", "W"]).meta("params", params_json(&cfg));
    if let Value::Object(m) = state_meta {
        table.metadata.extend(m);
    }
    emit(&table, common, &cfg)
}

fn cmd_basis(common: &Common, (n, k): (usize, usize), kind: BasisKind) -> CliResult {
    let cfg = load(common)?;
    let pair = PolyIndexPair::new(n, k)?;
    let (name, f): (&str, fn(PolyIndexPair, PhasePoint, &_) -> _) = match kind {
        BasisKind::Wc => ("wc", basis_wc),
        BasisKind::Ws => ("ws", basis_ws),
    };
    let (xs, ps) = (cfg.grid.x_axis()?, cfg.grid.p_axis()?);
    let grid = wigner_udm::grid::Grid2::try_from_fn(xs, ps, |x, p| f(pair, PhasePoint { x, p }, &cfg.params))?;
    let table = Table::from_grid(&grid, ["x", "p", name])
        .meta("params", params_json(&cfg))
        .meta("pair", [n, k])
        .meta("winding", pair.winding())
        .meta("kind", name);
    emit(&table, common, &cfg)
}

fn cmd_poly_table(common: &Common, nmax: usize, kmax: usize, x_min: f64, x_max: f64, nx: usize) -> CliResult {
    let cfg = load(common)?;
    let axis = Axis::new(x_min, x_max, nx).map_err(|e| Failure::Config(e.to_string()))?;
    let mut table = Table::new(&["n", "k", "x", "value"]);
    for n in 0..=nmax {
        for k in 0..=kmax {
            let pair = PolyIndexPair::new(n, k)?;
            let log_norm = 0.5 * ((n + k) as f64 * std::f64::consts::LN_2 + log_factorial(n) + log_factorial(k));
            for x in axis.nodes() {
                let v = (-x * x - log_norm).exp() * poly_y(pair, x)?;
                table.push(vec![Some(n as f64), Some(k as f64), Some(x), Some(v)]);
            }
        }
    }
    let table = table.meta("n_max", nmax).meta("k_max", kmax).meta("x_range", [x_min, x_max]).meta("nx", nx);
    emit(&table, common, &cfg)
}

fn cmd_energy(common: &Common, verify: bool, nmax: Option<usize>) -> CliResult {
    let cfg = load(common)?;
    let u = cfg.potential()?;
    let (rho, state_meta) = density(&cfg, nmax)?;
    let c = pure_state(&cfg, nmax)?;
    let phases = match &c {
        Some(c) => c.phases(),
        None => vec![0.0; rho.dim()],
    };
    let breakdown = energy_closed_form(&rho, &phases, &u, &cfg.params)?;
    let mut report = json!({
        "params": params_json(&cfg),
        "potential": { "coeffs": u.coeffs(), "omega_ref": u.omega_ref() },
        "state": state_meta,
        "energy": breakdown,
        "admissible_diagonals": quartic_diagonal_filter(&u),
    });
    let mut gap_ok = true;
    if verify {
        let c = c.ok_or(Failure::Validation("quadrature check needs a pure state".into()))?;
        let q = energy_quadrature(&c, &u, &cfg.params, &QuadratureSpec::trapezoid(121))?;
        let gap = (breakdown.total - q.value).abs() / breakdown.total.abs();
        gap_ok = gap <= ENERGY_GAP;
        report["verify"] = json!({
            "quadrature": q.value,
            "refinement_change": q.change,
            "relative_gap": gap,
            "tolerance": ENERGY_GAP,
            "passed": gap_ok,
        });
    }
    let text = match format_of(common, &cfg) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => energy_csv(&report),
    };
    match out_path(common, &cfg) {
        Some(path) => write_file(&path, &text)?,
        None => print!("{text}"),
    }
    if gap_ok {
        Ok(())
    } else {
        Err(Failure::Validation(format!("energy quadrature gap exceeds {ENERGY_GAP:e}")))
    }
}

/// Flattens the numeric leaves of the report into `quantity,value` rows.
fn energy_csv(report: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, v) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            Value::Array(a) => {
                for (i, v) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), v, out);
                }
            }
            Value::Number(n) => {
                let f = n.as_f64().unwrap_or(f64::NAN);
                let text = if n.is_f64() { format_number(f) } else { n.to_string() };
                out.push_str(&format!("{prefix},{text}\n"));
            }
            Value::Bool(b) => out.push_str(&format!("{prefix},{}\n", u8::from(*b))),
            _ => {}
        }
    }
    let mut out = String::from("quantity,value\n");
    walk("", report, &mut out);
    out
}

fn cmd_dissipation(
    common: &Common,
    fixture: Option<FixtureKind>,
    sigma: Option<f64>,
    terms: usize,
    classical: bool,
) -> CliResult {
    let cfg = load(common)?;
    let u = cfg.potential()?;
    let base = cfg.fixture.unwrap_or_default();
    let base_sigma = match base {
        Fixture::Gaussian { sigma } | Fixture::Perturbed { sigma, .. } => sigma,
    };
    let sigma = sigma.unwrap_or(base_sigma);
    let fixture = match (fixture, base) {
        (None, Fixture::Gaussian { .. }) | (Some(FixtureKind::Gaussian), _) => Fixture::Gaussian { sigma },
        (None, Fixture::Perturbed { epsilon, shift, .. }) => Fixture::Perturbed { sigma, epsilon, shift },
        (Some(FixtureKind::Perturbed), Fixture::Perturbed { epsilon, shift, .. }) => {
            Fixture::Perturbed { sigma, epsilon, shift }
        }
        (Some(FixtureKind::Perturbed), Fixture::Gaussian { .. }) => Fixture::Perturbed { sigma, epsilon: 0.1, shift: 0.5 },
    };
    fixture.validate()?;
    let qm = if classical { MoyalParams::classical(cfg.params.mass())? } else { MoyalParams::from(&cfg.params) };
    let f2 = PhaseField::from_fn(cfg.grid.x_axis()?, cfg.grid.p_axis()?, |x, v| fixture.eval(x, v))?;
    let accel = mean_accel(&u, &f2, terms, &qm)?;
    let q2 = dissipation_q2(&u, &f2, terms, &qm)?;
    let profile = mean_q2(&u, &f2, terms, &qm)?;
    let avg = mean_accel_avg(&u, &f2, &qm)?;
    let summary = json!({
        "params": params_json(&cfg),
        "hbar_series": qm.hbar,
        "terms": terms,
        "fixture": fixture,
        "potential": { "coeffs": u.coeffs(), "omega_ref": u.omega_ref() },
        "global_q2": global_q2(&u, &f2, terms, &qm)?,
        "h2": boltzmann_h2(&f2),
        "masked_accel": accel.masked_count(),
        "masked_q2": q2.masked_count(),
    });
    let format = format_of(common, &cfg);
    let meta = |t: Table| t.meta("params", params_json(&cfg)).meta("terms", terms).meta("hbar_series", qm.hbar);
    let tables = [
        ("accel", meta(Table::from_masked(&accel, ["x", "v", "accel"]))),
        ("q2", meta(Table::from_masked(&q2, ["x", "v", "q2"]))),
        ("mean_q2", meta(Table::from_profile(&profile, ["x", "mean_q2"]))),
        ("mean_accel", meta(Table::from_profile(&avg, ["x", "mean_accel"]))),
    ];
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    match out_path(common, &cfg) {
        Some(dir) => {
            for (name, table) in &tables {
                table.write(&dir.join(format!("{name}.{}", format.extension())), format)?;
            }
            write_file(&dir.join("summary.json"), &text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_verify(out: Option<PathBuf>, names: &[String], perturb_hbar: f64) -> CliResult {
    let suites: Vec<Suite> = if names.is_empty() || names.iter().any(|n| n == "all") {
        Suite::ALL.to_vec()
    } else {
        names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?
    };
    if !(perturb_hbar.is_finite() && perturb_hbar > 0.0) {
        return Err(Failure::Config("--perturb-hbar must be positive".into()));
    }
    let report = verify::run(&suites, &VerifyOptions { oracle_hbar_factor: perturb_hbar });
    let text = report.to_json();
    match &out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    for s in &report.suites {
        eprintln!("{:<13} {}", s.suite.name(), if s.passed { "pass" } else { "FAIL" });
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Validation("verification failed".into()))
    }
}
