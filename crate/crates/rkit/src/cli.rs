//! Command-line entry point wiring the subcommands: `rearrange`, `energy`,
//! `minimize`, `sweep`, `verify`. Outputs are written atomically; JSON
//! outputs embed a run manifest. Exit codes: 0 success, 1 computation or
//! check failure, 2 usage/grid/parse errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::energy::{scalar_energy_1d, scalar_energy_2d, system_energy_1d, EnergyValue};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::io::{self, SpecConfig};
use crate::minimize::{
    auto_half_width, energy_curve_sweep, minimize_scalar, minimize_scalar_auto, minimize_system,
    ConstraintSpec, Diagnosis, FlowConfig, Init, MinimizeResult, Scheme,
};
use crate::rearrange::{
    coupled_rearrangement_1d, coupled_rearrangement_2d, decreasing_rearrangement,
    schwarz_rearrangement_1d, schwarz_rearrangement_2d, steiner_rearrangement,
    symmetric_rearrangement_1d, PlacementRule,
};
use crate::verify::{run_suite, suite_passed, Suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "rkit", version, about = "Rearrangement kernels and mass-constrained ground-state checks on uniform grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a rearrangement kernel to a field file.
    Rearrange {
        /// One of: decreasing, symmetric, steiner, schwarz, coupled.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        input: PathBuf,
        /// Second input (coupled rearrangement only).
        #[arg(long)]
        second: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Evaluate the scalar or two-component energy of field files.
    Energy {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Second component; requires a coupled spec.
        #[arg(long)]
        second: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground-state search by normalized gradient flow.
    Minimize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Second-component mass; switches to the two-component problem.
        #[arg(long)]
        beta: Option<f64>,
        /// Grid as "L=30,h=0.05"; defaults to an auto-sized domain.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "field-out")]
        field_out: Option<PathBuf>,
        #[arg(long = "second-field-out")]
        second_field_out: Option<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        #[arg(long = "energy-tol")]
        energy_tol: Option<f64>,
        /// "semi-implicit" (default) or "explicit".
        #[arg(long)]
        scheme: Option<String>,
        /// "gaussian" (default), "random", or a field CSV path.
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Energy curve over an increasing list of masses.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated strictly increasing masses, e.g. 0.5,1,1.5,2.
        #[arg(long)]
        alphas: String,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites and write a JSON report.
    Verify {
        /// prop1|lemma1|lemma3|lemma2|thm1|duff|lemma10|subadd|system-subadd|all
        #[arg(long)]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "field-count")]
        field_count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// Reproduction metadata embedded in every JSON output. The timestamp is
/// excluded from the reproduction contract.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: String,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub grid: Option<String>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    fn new(config: BTreeMap<String, String>, seed: Option<u64>, grid: Option<String>) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default();
        RunManifest {
            command_line: std::env::args().collect::<Vec<_>>().join(" "),
            config,
            seed,
            grid,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }
}

/// Write CSV plot data (header + rows of reals) to `path`.
pub fn emit_plot_data(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    io::write_csv_table(path, header, rows)
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::GridMismatch { .. }
        | Error::UnsupportedGrid { .. }
        | Error::Config { .. }
        | Error::InvalidParameter { .. }
        | Error::InvalidSpec { .. }
        | Error::LevelsNotIncreasing
        | Error::Io(_) => 2,
        _ => 1,
    }
}

/// Parse argv and dispatch. Returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests exit 0; real usage errors exit 2.
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn env_seed(flag: Option<u64>) -> Option<u64> {
    match std::env::var("RKIT_SEED") {
        Ok(s) => s.parse().ok().or(flag),
        Err(_) => flag,
    }
}

fn sniff_header(path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(path)?;
    match text.lines().next().map(str::trim) {
        Some("x,value") => Ok(1),
        Some("x,y,value") => Ok(2),
        other => Err(Error::Parse {
            what: path.display().to_string(),
            reason: format!("unrecognized header {other:?}"),
        }),
    }
}

fn parse_grid(text: &str) -> Result<Grid1D> {
    let mut length = None;
    let mut h = None;
    for part in text.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config { reason: format!("bad grid component '{part}'") })?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config { reason: format!("bad grid number '{v}'") })?;
        match k.trim() {
            "L" => length = Some(value),
            "h" => h = Some(value),
            other => return Err(Error::Config { reason: format!("unknown grid key '{other}'") }),
        }
    }
    let length = length.ok_or_else(|| Error::Config { reason: "grid needs L=".into() })?;
    let h = h.ok_or_else(|| Error::Config { reason: "grid needs h=".into() })?;
    Grid1D::symmetric_domain(0.5 * length, h)
}

#[derive(Serialize)]
struct MinimizeSummary {
    energy: EnergyValue,
    multipliers: Vec<f64>,
    masses: Vec<f64>,
    iterations: usize,
    converged: bool,
    monotone_energy: bool,
    diagnosis: String,
    boundary_mass: f64,
}

fn summarize(res: &MinimizeResult<crate::grid::Field1D>) -> MinimizeSummary {
    MinimizeSummary {
        energy: res.energy,
        multipliers: res.multipliers.clone(),
        masses: res.fields.iter().map(|f| f.mass()).collect(),
        iterations: res.iterations,
        converged: res.converged,
        monotone_energy: res.monotone_energy,
        diagnosis: match res.diagnosis {
            Diagnosis::Converged => "converged".into(),
            Diagnosis::MaxIterations => "max-iterations".into(),
            Diagnosis::Spreading => "spreading: infimum not attained".into(),
        },
        boundary_mass: res.boundary_mass,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Parse { what: path.display().to_string(), reason: e.to_string() })?;
    bytes.push(b'\n');
    io::write_bytes_atomic(path, &bytes)
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Rearrange { kind, input, second, output } => {
            run_rearrange(&kind, &input, second.as_deref(), &output)
        }
        Command::Energy { spec, input, second, out } => {
            run_energy(&spec, &input, second.as_deref(), out.as_deref())
        }
        Command::Minimize {
            spec,
            alpha,
            beta,
            grid,
            out,
            field_out,
            second_field_out,
            tau,
            max_iter,
            energy_tol,
            scheme,
            init,
            seed,
        } => run_minimize(MinimizeArgs {
            spec,
            alpha,
            beta,
            grid,
            out,
            field_out,
            second_field_out,
            tau,
            max_iter,
            energy_tol,
            scheme,
            init,
            seed: env_seed(seed),
        }),
        Command::Sweep { spec, alphas, grid, out } => run_sweep(&spec, &alphas, grid.as_deref(), &out),
        Command::Verify { suite, seed, h, field_count, out, jobs } => {
            run_verify(&suite, env_seed(seed), h, field_count, out.as_deref(), jobs)
        }
    }
}

fn run_rearrange(kind: &str, input: &Path, second: Option<&Path>, output: &Path) -> Result<i32> {
    let rule = PlacementRule::default();
    let dim = sniff_header(input)?;
    let need_second = kind == "coupled";
    if need_second != second.is_some() {
        return Err(Error::Config {
            reason: if need_second {
                "coupled rearrangement needs --second".into()
            } else {
                format!("--second is only valid with --kind coupled (got {kind})")
            },
        });
    }
    match (kind, dim) {
        ("decreasing", 1) => {
            let f = io::read_field_1d(input)?;
            io::write_field_1d(output, &decreasing_rearrangement(&f)?)?;
        }
        ("symmetric", 1) => {
            let f = io::read_field_1d(input)?;
            io::write_field_1d(output, &symmetric_rearrangement_1d(&f, rule)?)?;
        }
        ("schwarz", 1) => {
            let f = io::read_field_1d(input)?;
            io::write_field_1d(output, &schwarz_rearrangement_1d(&f, rule)?)?;
        }
        ("schwarz", 2) => {
            let f = io::read_field_2d(input)?;
            io::write_field_2d(output, &schwarz_rearrangement_2d(&f, rule)?)?;
        }
        ("steiner", 2) => {
            let f = io::read_field_2d(input)?;
            io::write_field_2d(output, &steiner_rearrangement(&f, rule)?)?;
        }
        ("coupled", 1) => {
            let f = io::read_field_1d(input)?;
            let g = io::read_field_1d(second.expect("validated"))?;
            io::write_field_1d(output, &coupled_rearrangement_1d(&f, &g, rule)?)?;
        }
        ("coupled", 2) => {
            let f = io::read_field_2d(input)?;
            let g = io::read_field_2d(second.expect("validated"))?;
            io::write_field_2d(output, &coupled_rearrangement_2d(&f, &g, rule)?)?;
        }
        (other, d) => {
            return Err(Error::Config {
                reason: format!("kind '{other}' does not apply to a {d}D field"),
            })
        }
    }
    println!("{kind} rearrangement written to {}", output.display());
    Ok(0)
}

fn run_energy(spec_path: &Path, input: &Path, second: Option<&Path>, out: Option<&Path>) -> Result<i32> {
    let config = io::read_config(spec_path)?;
    let spec = io::spec_from_config(&config)?;
    let value = match (&spec, second) {
        (SpecConfig::Scalar(s), None) => match sniff_header(input)? {
            1 => scalar_energy_1d(&io::read_field_1d(input)?, s)?,
            _ => scalar_energy_2d(&io::read_field_2d(input)?, s)?,
        },
        (SpecConfig::Coupled(g), Some(second)) => {
            let u = io::read_field_1d(input)?;
            let v = io::read_field_1d(second)?;
            system_energy_1d(&u, &v, g)?
        }
        (SpecConfig::Scalar(_), Some(_)) => {
            return Err(Error::Config { reason: "--second needs a coupled spec".into() })
        }
        (SpecConfig::Coupled(_), None) => {
            return Err(Error::Config { reason: "coupled spec needs --second".into() })
        }
    };
    let json = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Parse { what: "energy".into(), reason: e.to_string() })?;
    println!("{json}");
    if let Some(out) = out {
        #[derive(Serialize)]
        struct Doc {
            manifest: RunManifest,
            energy: EnergyValue,
        }
        write_json(out, &Doc { manifest: RunManifest::new(config, None, None), energy: value })?;
    }
    Ok(0)
}

struct MinimizeArgs {
    spec: PathBuf,
    alpha: f64,
    beta: Option<f64>,
    grid: Option<String>,
    out: Option<PathBuf>,
    field_out: Option<PathBuf>,
    second_field_out: Option<PathBuf>,
    tau: Option<f64>,
    max_iter: Option<usize>,
    energy_tol: Option<f64>,
    scheme: Option<String>,
    init: Option<String>,
    seed: Option<u64>,
}

fn flow_config(h: f64, args: &MinimizeArgs) -> Result<FlowConfig> {
    let mut cfg = FlowConfig::default_for(h);
    if let Some(tau) = args.tau {
        cfg.tau = tau;
    }
    if let Some(mi) = args.max_iter {
        cfg.max_iter = mi;
    }
    if let Some(tol) = args.energy_tol {
        cfg.energy_tol = tol;
    }
    match args.scheme.as_deref() {
        None | Some("semi-implicit") => {}
        Some("explicit") => cfg.scheme = Scheme::Explicit,
        Some(other) => return Err(Error::Config { reason: format!("unknown scheme '{other}'") }),
    }
    cfg.init = match args.init.as_deref() {
        None | Some("gaussian") => Init::Gaussian,
        Some("random") => Init::RandomSeeded(args.seed.unwrap_or(7)),
        Some(path) => Init::Field(io::read_field_1d(Path::new(path))?),
    };
    Ok(cfg)
}

fn run_minimize(args: MinimizeArgs) -> Result<i32> {
    let config = io::read_config(&args.spec)?;
    let spec = io::spec_from_config(&config)?;
    let grid = match &args.grid {
        Some(g) => Some(parse_grid(g)?),
        None => None,
    };
    let h = grid.as_ref().map(|g| g.h()).unwrap_or(0.05);
    let cfg = flow_config(h, &args)?;

    let result = match (&spec, args.beta) {
        (SpecConfig::Scalar(s), None) => match &grid {
            Some(g) => minimize_scalar(s, &ConstraintSpec::scalar(args.alpha), g, &cfg)?,
            None => minimize_scalar_auto(s, args.alpha, h, &cfg)?,
        },
        (SpecConfig::Coupled(g_spec), Some(beta)) => {
            let g = match grid {
                Some(g) => g,
                None => Grid1D::symmetric_domain(auto_half_width(args.alpha.max(beta)), h)?,
            };
            minimize_system(g_spec, &ConstraintSpec::pair(args.alpha, beta), &g, &cfg)?
        }
        (SpecConfig::Scalar(_), Some(_)) => {
            return Err(Error::Config { reason: "--beta needs a coupled spec".into() })
        }
        (SpecConfig::Coupled(_), None) => {
            return Err(Error::Config { reason: "coupled spec needs --beta".into() })
        }
    };

    let summary = summarize(&result);
    println!(
        "E = {:.10} ({} after {} iterations; mass deviation {:.2e})",
        summary.energy.total,
        summary.diagnosis,
        summary.iterations,
        summary
            .masses
            .iter()
            .zip([args.alpha].iter().chain(args.beta.iter()))
            .map(|(m, t)| (m - t).abs())
            .fold(0.0f64, f64::max),
    );
    if let Some(out) = &args.out {
        #[derive(Serialize)]
        struct Doc {
            manifest: RunManifest,
            result: MinimizeSummary,
        }
        let manifest = RunManifest::new(config, args.seed, args.grid.clone());
        write_json(out, &Doc { manifest, result: summary })?;
    }
    if let Some(path) = &args.field_out {
        io::write_field_1d(path, &result.fields[0])?;
    }
    if let Some(path) = &args.second_field_out {
        if result.fields.len() < 2 {
            return Err(Error::Config { reason: "no second field in a scalar run".into() });
        }
        io::write_field_1d(path, &result.fields[1])?;
    }
    Ok(0)
}

fn run_sweep(spec_path: &Path, alphas: &str, grid: Option<&str>, out: &Path) -> Result<i32> {
    let config = io::read_config(spec_path)?;
    let spec = match io::spec_from_config(&config)? {
        SpecConfig::Scalar(s) => s,
        SpecConfig::Coupled(_) => {
            return Err(Error::Config { reason: "sweep needs a scalar spec".into() })
        }
    };
    let masses: Vec<f64> = alphas
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config { reason: format!("bad mass '{s}'") })
        })
        .collect::<Result<_>>()?;
    let grid = match grid {
        Some(g) => parse_grid(g)?,
        None => Grid1D::symmetric_domain(auto_half_width(masses.first().copied().unwrap_or(1.0)), 0.05)?,
    };
    let cfg = FlowConfig::default_for(grid.h());
    let points = energy_curve_sweep(&spec, &masses, &grid, &cfg)?;
    let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![p.alpha, p.energy]).collect();
    emit_plot_data(out, &["alpha", "energy"], &rows)?;
    for p in &points {
        println!("alpha = {:<8} E = {:.10} ({} iterations)", p.alpha, p.energy, p.iterations);
    }
    Ok(0)
}

fn run_verify(
    suite: &str,
    seed: Option<u64>,
    h: Option<f64>,
    field_count: Option<usize>,
    out: Option<&Path>,
    jobs: usize,
) -> Result<i32> {
    let suite = Suite::parse(suite)
        .ok_or_else(|| Error::Config { reason: format!("unknown suite '{suite}'") })?;
    let mut cfg = SuiteConfig::default();
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(h) = h {
        cfg.h = h;
    }
    if let Some(fc) = field_count {
        cfg.field_count = fc;
    }
    let reports = run_suite(&cfg, suite, jobs.max(1))?;
    for r in &reports {
        println!(
            "[{}] {:<45} margin = {:+.3e}  tol = {:.1e}{}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check_id,
            r.margin,
            r.tolerance,
            r.refinement_margin
                .map(|m| format!("  refined = {m:+.3e}"))
                .unwrap_or_default(),
        );
    }
    let passed = suite_passed(&reports);
    println!(
        "{}: {} checks, {} failed",
        suite.name(),
        reports.len(),
        reports.iter().filter(|r| !r.pass).count()
    );
    if let Some(out) = out {
        #[derive(Serialize)]
        struct Doc {
            manifest: RunManifest,
            reports: Vec<crate::verify::CheckReport>,
        }
        let mut config = BTreeMap::new();
        config.insert("suite".to_string(), suite.name().to_string());
        config.insert("h".to_string(), format!("{}", cfg.h));
        config.insert("field_count".to_string(), format!("{}", cfg.field_count));
        config.insert("strict_delta_rule".to_string(), cfg.strict_delta_rule.clone());
        let manifest = RunManifest::new(config, Some(cfg.seed), None);
        write_json(out, &Doc { manifest, reports })?;
    }
    Ok(if passed { 0 } else { 1 })
}
