//! Command surface of the `gridforge` binary. Every table goes to
//! `<out>/<stem>.csv` with a sibling `<stem>.manifest.json`.

pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gridforge::classical::{ancilla_decay_error_prob, error_map_grid, hessian_rates, smeared_error_prob};
use gridforge::classical::{DecayPath, FlowConfig, SmearConfig};
use gridforge::code_switch::{concatenate, QubitStabilizerCode};
use gridforge::lattice::{packing_report, pauli_lengths, Code, LatticeFile};
use gridforge::search::{search_range, Family};
use gridforge::symplectic::int_det;
use gridforge::{homodyne, GkpLattice, GridError, LogicalFrame};
use gridforge_fock::{decay_error_prob, quantum_error_prob, FockError, TrajectoryConfig};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use output::Emitter;
use verify::Suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

fn grid_exit(e: &GridError) -> i32 {
    use GridError::*;
    match e {
        InvalidArgument(_) | Parse(_) | Dimension(_) | NotACode(_) | InvalidSplit(_) | UnsupportedDimension(_)
        | Degenerate(_) => EXIT_VALIDATION,
        FlowStalled { .. } | Classification(_) | DecoderInconsistency(_) | Construction(_) | Capacity(_) => {
            EXIT_NUMERICAL
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Grid(e) => grid_exit(e),
            CliError::Fock(FockError::Lattice(e)) => grid_exit(e),
            CliError::Fock(FockError::InvalidArgument(_)) => EXIT_VALIDATION,
            CliError::Fock(_) => EXIT_NUMERICAL,
            CliError::Invalid(_) => EXIT_VALIDATION,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
            CliError::ChecksFailed(_) => EXIT_CHECK_FAILED,
        }
    }
}

/// Grid-code analysis, decoding and Fock-basis verification.
///
/// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical guard
/// (flow stall, truncation leak, failed construction), 4 a `fock verify`
/// check failed, 64 usage error.
#[derive(Debug, Parser)]
#[command(name = "gridforge", version)]
pub struct Cli {
    /// Base seed; Monte Carlo trial i draws from stream i of this seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "GRIDFORGE_THREADS")]
    pub threads: Option<usize>,
    /// Directory receiving CSV tables and manifests.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Convergence tolerance of the dissipation flow.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog codes, or print one code as lattice JSON.
    Catalog {
        /// Code name such as square, tesseract, d4, e8:2, rectangular:0.8.
        #[arg(long)]
        name: Option<String>,
        /// Print the lattice file JSON of --name to stdout.
        #[arg(long, requires = "name")]
        json: bool,
    },
    /// Packing figures of merit, Pauli lengths and flow relaxation rates.
    Analyze {
        /// Catalog name or path to a lattice JSON file.
        #[arg(long)]
        code: String,
        /// Per-mode noise width for the erfc error estimate.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Rotated two-mode codes of distance d (count and witnesses per d).
    Search {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        dmax: u64,
        /// Keep every sign/permutation image instead of one per orbit.
        #[arg(long)]
        full_orbit: bool,
    },
    /// Logical class of u·s_i + v·s_j after the dissipation flow.
    Flowmap {
        #[arg(long)]
        code: String,
        /// 1-based generator pair, e.g. 1,2.
        #[arg(long)]
        plane: String,
        #[arg(long, default_value_t = 64)]
        res: usize,
    },
    /// Logical error after an ancilla decay along a stabilizer translation.
    AncillaSweep {
        #[arg(long)]
        code: String,
        /// Envelope parameters: comma list or LO:HI:STEP.
        #[arg(long, default_value = "0.01,0.02,0.044,0.1")]
        eps_grid: String,
        /// 1-based generator; all generators if omitted.
        #[arg(long)]
        generator: Option<usize>,
        /// Route the translation through ±s_k first, e.g. -1 for −s_1.
        #[arg(long, allow_hyphen_values = true)]
        via: Option<i64>,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
    /// Homodyne decoder Monte Carlo over a squeezing range.
    Homodyne {
        #[arg(long)]
        code: String,
        /// LO:HI:STEP in dB.
        #[arg(long)]
        db_range: String,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        noisy_ancilla: bool,
    },
    /// Truncated Fock-basis checks and sweeps.
    Fock {
        #[command(subcommand)]
        command: FockCommand,
    },
    /// Concatenate a single-mode code with a qubit stabilizer code.
    Concat {
        /// Base catalog code.
        #[arg(long)]
        base: String,
        /// Comma-separated Pauli strings, or a file with one per line.
        #[arg(long)]
        stabilizers: String,
        /// Print the resulting lattice file JSON to stdout.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum FockCommand {
    /// Run a check suite; exits 4 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
    },
    /// Quantum vs classical logical error along η·s_j.
    Sweep {
        #[arg(long)]
        code: String,
        /// Comma list or LO:HI:STEP.
        #[arg(long)]
        eta_grid: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
        #[arg(long, default_value_t = 48)]
        trials: usize,
        /// 1-based generator of the error direction.
        #[arg(long, default_value_t = 1)]
        generator: usize,
        /// Fock truncation per mode (default 45 for one mode, 35 otherwise).
        #[arg(long)]
        dims: Option<usize>,
        /// Monte Carlo samples for the classical column.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
    /// Logical error after one ancilla decay followed by recovery rounds.
    Decay {
        #[arg(long)]
        code: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 25)]
        rounds: usize,
        #[arg(long, default_value_t = 120)]
        trials: usize,
        #[arg(long)]
        dims: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Tesseract,
    D4,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    Codewords,
    Gates,
    Sbs,
    Decay,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Codewords => Suite::Codewords,
            SuiteArg::Gates => Suite::Gates,
            SuiteArg::Sbs => Suite::Sbs,
            SuiteArg::Decay => Suite::Decay,
        }
    }
}

/// Parses and runs `argv` (including the program name); returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let words = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, words) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if !(cli.tol > 0.0) {
        return Err(CliError::Invalid("--tol must be positive".into()));
    }
    let flow = FlowConfig { convergence_tol: cli.tol, ..FlowConfig::default() };
    let em = Emitter { out: cli.out.clone(), seed: cli.seed, argv };
    match cli.command {
        Command::Catalog { name, json } => catalog_cmd(&em, name, json),
        Command::Analyze { code, sigma } => analyze_cmd(&em, &code, sigma),
        Command::Search { family, dmax, full_orbit } => search_cmd(&em, family, dmax, full_orbit),
        Command::Flowmap { code, plane, res } => flowmap_cmd(&em, &code, &plane, res, &flow),
        Command::AncillaSweep { code, eps_grid, generator, via, samples } => {
            ancilla_cmd(&em, &code, &eps_grid, generator, via, samples, &flow)
        }
        Command::Homodyne { code, db_range, trials, noisy_ancilla } => {
            homodyne_cmd(&em, &code, &db_range, trials, noisy_ancilla)
        }
        Command::Fock { command } => match command {
            FockCommand::Verify { suite } => verify_cmd(&em, suite.into()),
            FockCommand::Sweep { code, eta_grid, epsilon, rounds, trials, generator, dims, samples } => {
                let sweep = SweepArgs { eta_grid, epsilon, rounds, trials, generator, dims, samples };
                fock_sweep_cmd(&em, &code, &sweep, &flow)
            }
            FockCommand::Decay { code, epsilon, rounds, trials, dims } => {
                fock_decay_cmd(&em, &code, epsilon, rounds, trials, dims)
            }
        },
        Command::Concat { base, stabilizers, json } => concat_cmd(&em, &base, &stabilizers, json),
    }
}

/// Catalog name (with optional `:param`) or a lattice JSON path.
pub fn load_code(spec: &str) -> Result<(GkpLattice, LogicalFrame, String), CliError> {
    let path = Path::new(spec);
    if spec.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let (lat, frame) = LatticeFile::from_json(&text)?.into_parts()?;
        let name = lat.name.clone();
        return Ok((lat, frame, name));
    }
    let code: Code = spec.parse()?;
    let (lat, frame) = gridforge::lattice::catalog_code(code)?;
    Ok((lat, frame, code.label()))
}

/// Comma list `a,b,c` or inclusive range `LO:HI:STEP`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Invalid(format!("cannot parse grid '{s}'"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts[..] else { return Err(bad()) };
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if !(step > 0.0) || hi < lo || !lo.is_finite() || !hi.is_finite() {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| lo + k as f64 * step).collect());
    }
    let v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err(bad());
    }
    Ok(v)
}

const CATALOG: [&str; 12] = [
    "square",
    "rectangular",
    "rectangular_qunaught",
    "diamond",
    "hexagonal",
    "qunaught",
    "tesseract",
    "d4",
    "d4_qunaught",
    "d2m:3",
    "e8",
    "four_mode",
];

#[derive(Serialize)]
struct CodeRow {
    code: String,
    m: usize,
    d: u64,
    det_a: i128,
    min_stab_len: f64,
    min_pauli_len: Option<f64>,
    len_x: Option<f64>,
    len_y: Option<f64>,
    len_z: Option<f64>,
    packing_ratio: f64,
    max_correctable_radius: f64,
    min_flow_rate: f64,
    erfc_estimate: Option<f64>,
}

fn code_row(lat: &GkpLattice, frame: &LogicalFrame, label: &str, sigma: Option<f64>) -> Result<CodeRow, CliError> {
    let rep = packing_report(lat)?;
    let lens = if lat.d == 2 { Some(pauli_lengths(lat, frame)?) } else { None };
    Ok(CodeRow {
        code: label.to_string(),
        m: lat.m,
        d: lat.d,
        det_a: int_det(&lat.a),
        min_stab_len: rep.min_stab_len,
        min_pauli_len: rep.min_pauli_len,
        len_x: lens.map(|l| l[0]),
        len_y: lens.map(|l| l[1]),
        len_z: lens.map(|l| l[2]),
        packing_ratio: rep.packing_ratio,
        max_correctable_radius: rep.max_correctable_radius,
        min_flow_rate: hessian_rates(lat)[0],
        erfc_estimate: sigma.map(|s| rep.gaussian_error_estimate(s)),
    })
}

fn report(path: &Path) {
    println!("{}", path.display());
}

fn catalog_cmd(em: &Emitter, name: Option<String>, json: bool) -> Result<(), CliError> {
    if let Some(name) = name {
        let (lat, frame, label) = load_code(&name)?;
        if json {
            println!("{}", LatticeFile::from_parts(&lat, &frame).to_json());
            return Ok(());
        }
        let row = code_row(&lat, &frame, &label, None)?;
        let p = em.emit(&format!("catalog_{}", stem_safe(&label)), &[row], Some(&label), json!({}), "code table")?;
        report(&p);
        return Ok(());
    }
    let rows = CATALOG
        .iter()
        .map(|n| {
            let (lat, frame, label) = load_code(n)?;
            code_row(&lat, &frame, &label, None)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let p = em.emit("catalog", &rows, None, json!({ "codes": CATALOG }), "code table")?;
    report(&p);
    Ok(())
}

fn stem_safe(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '-' }).collect()
}

fn analyze_cmd(em: &Emitter, code: &str, sigma: Option<f64>) -> Result<(), CliError> {
    if sigma.is_some_and(|s| !(s >= 0.0)) {
        return Err(CliError::Invalid("--sigma must be non-negative".into()));
    }
    let (lat, frame, label) = load_code(code)?;
    let row = code_row(&lat, &frame, &label, sigma)?;
    let p = em.emit(
        &format!("analyze_{}", stem_safe(&label)),
        &[row],
        Some(&label),
        json!({ "sigma": sigma }),
        "packing and distance figures of merit",
    )?;
    report(&p);
    Ok(())
}

#[derive(Serialize)]
struct SearchRow {
    d: u64,
    count: usize,
    /// `a:b:c` triples separated by `;`.
    witnesses: String,
}

fn search_cmd(em: &Emitter, family: FamilyArg, dmax: u64, full_orbit: bool) -> Result<(), CliError> {
    let (fam, label) = match family {
        FamilyArg::Tesseract => (Family::Hypercubic, "tesseract"),
        FamilyArg::D4 => (Family::D4, "d4"),
    };
    let rows: Vec<SearchRow> = search_range(fam, dmax, full_orbit)?
        .into_iter()
        .map(|(d, sols)| SearchRow {
            d,
            count: sols.len(),
            witnesses: sols.iter().map(|s| format!("{}:{}:{}", s.abc.0, s.abc.1, s.abc.2)).collect::<Vec<_>>().join(";"),
        })
        .collect();
    let p = em.emit(
        &format!("search_{label}"),
        &rows,
        Some(label),
        json!({ "dmax": dmax, "full_orbit": full_orbit }),
        "existence of rotated two-mode codes per distance",
    )?;
    report(&p);
    Ok(())
}

fn parse_plane(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Invalid(format!("plane must be 'i,j', got '{s}'"));
    let v: Vec<usize> = s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match v[..] {
        [i, j] => Ok((i, j)),
        _ => Err(bad()),
    }
}

fn flowmap_cmd(em: &Emitter, code: &str, plane: &str, res: usize, flow: &FlowConfig) -> Result<(), CliError> {
    let (lat, frame, label) = load_code(code)?;
    let (i, j) = parse_plane(plane)?;
    let cells = error_map_grid(&lat, &frame, (i, j), res, flow)?;
    let p = em.emit(
        &format!("flowmap_{}_{i}_{j}", stem_safe(&label)),
        &cells,
        Some(&label),
        json!({ "plane": [i, j], "res": res, "tol": flow.convergence_tol }),
        "logical class of translation errors in a generator plane after the dissipation flow",
    )?;
    report(&p);
    Ok(())
}

#[derive(Serialize)]
struct DecayRow {
    epsilon: f64,
    generator: usize,
    estimate: f64,
    stderr: f64,
    samples: usize,
    stalled: usize,
    per_sqrt_epsilon: f64,
}

fn ancilla_cmd(
    em: &Emitter,
    code: &str,
    eps_grid: &str,
    generator: Option<usize>,
    via: Option<i64>,
    samples: usize,
    flow: &FlowConfig,
) -> Result<(), CliError> {
    let (lat, _, label) = load_code(code)?;
    let eps = parse_grid(eps_grid)?;
    let gens: Vec<usize> = match generator {
        Some(j) => vec![j],
        None => (1..=lat.dim()).collect(),
    };
    let path = match via {
        None => DecayPath::Straight,
        Some(k) if k != 0 && k.unsigned_abs() as usize <= lat.dim() => {
            DecayPath::Zigzag(vec![lat.generator(k.unsigned_abs() as usize - 1) * k.signum() as f64])
        }
        Some(k) => return Err(CliError::Invalid(format!("--via {k} is not a generator index"))),
    };
    let mut rows = vec![];
    for &e in &eps {
        for &j in &gens {
            let smear = SmearConfig::from_epsilon(e, samples, em.seed)?;
            let r = ancilla_decay_error_prob(&lat, j, &smear, &path, flow)?;
            rows.push(DecayRow {
                epsilon: e,
                generator: j,
                estimate: r.estimate,
                stderr: r.stderr,
                samples: r.samples,
                stalled: r.stalled,
                per_sqrt_epsilon: r.estimate / e.sqrt(),
            });
        }
    }
    let p = em.emit(
        &format!("ancilla_sweep_{}", stem_safe(&label)),
        &rows,
        Some(&label),
        json!({ "eps_grid": eps, "generators": gens, "via": via, "samples": samples }),
        "logical error after an ancilla decay, against envelope size",
    )?;
    report(&p);
    Ok(())
}

#[derive(Serialize)]
struct HomodyneRow {
    db: f64,
    p: f64,
    stderr: f64,
    trials: usize,
    failures: usize,
}

fn homodyne_cmd(em: &Emitter, code: &str, db_range: &str, trials: usize, noisy: bool) -> Result<(), CliError> {
    if !db_range.contains(':') {
        return Err(CliError::Invalid("--db-range must be LO:HI:STEP".into()));
    }
    let (lat, _, label) = load_code(code)?;
    let dbs = parse_grid(db_range)?;
    let rows: Vec<HomodyneRow> = homodyne::sweep(&lat, &dbs, noisy, trials, em.seed)?
        .into_iter()
        .map(|(db, t)| HomodyneRow { db, p: t.p_logical, stderr: t.stderr, trials: t.trials, failures: t.failures })
        .collect();
    let p = em.emit(
        &format!("homodyne_{}{}", stem_safe(&label), if noisy { "_noisy" } else { "" }),
        &rows,
        Some(&label),
        json!({ "db": dbs, "trials": trials, "noisy_ancilla": noisy }),
        "homodyne decoder logical error against squeezing",
    )?;
    report(&p);
    Ok(())
}

fn verify_cmd(em: &Emitter, suite: Suite) -> Result<(), CliError> {
    let checks = verify::run_suite(suite, em.seed)?;
    for c in &checks {
        println!("{} {}: {:.6}", if c.pass { "PASS" } else { "FAIL" }, c.check, c.value);
    }
    let p = em.emit(
        &format!("verify_{}", suite.name()),
        &checks,
        None,
        json!({ "suite": suite.name() }),
        "Fock-basis checks of code words, gates and dissipation",
    )?;
    report(&p);
    match checks.iter().filter(|c| !c.pass).count() {
        0 => Ok(()),
        n => Err(CliError::ChecksFailed(n)),
    }
}

struct SweepArgs {
    eta_grid: String,
    epsilon: f64,
    rounds: usize,
    trials: usize,
    generator: usize,
    dims: Option<usize>,
    samples: usize,
}

fn default_dims(lat: &GkpLattice, dims: Option<usize>) -> Vec<usize> {
    let n = dims.unwrap_or(if lat.m == 1 { 45 } else { 35 });
    vec![n; lat.m]
}

#[derive(Serialize)]
struct SweepRow {
    eta: f64,
    quantum: f64,
    quantum_stderr: f64,
    classical: f64,
    classical_stderr: f64,
    max_leak: f64,
    truncation_warning: bool,
}

fn fock_sweep_cmd(em: &Emitter, code: &str, a: &SweepArgs, flow: &FlowConfig) -> Result<(), CliError> {
    let (lat, frame, label) = load_code(code)?;
    if a.generator == 0 || a.generator > lat.dim() {
        return Err(CliError::Invalid(format!("generator {} out of range 1..={}", a.generator, lat.dim())));
    }
    let etas = parse_grid(&a.eta_grid)?;
    let dims = default_dims(&lat, a.dims);
    let cfg = TrajectoryConfig { epsilon: a.epsilon, dims: dims.clone(), rounds: a.rounds, trials: a.trials, seed: em.seed };
    let smear = SmearConfig::from_epsilon(a.epsilon, a.samples, em.seed)?;
    let s = lat.generator(a.generator - 1);
    let mut rows = vec![];
    for &eta in &etas {
        let e = &s * eta;
        let q = quantum_error_prob(&lat, &frame, &e, &cfg)?;
        let c = smeared_error_prob(&lat, &e, &smear, flow)?;
        rows.push(SweepRow {
            eta,
            quantum: q.estimate,
            quantum_stderr: q.stderr,
            classical: c.estimate,
            classical_stderr: c.stderr,
            max_leak: q.max_leak,
            truncation_warning: q.truncation_warning,
        });
    }
    let p = em.emit(
        &format!("fock_sweep_{}", stem_safe(&label)),
        &rows,
        Some(&label),
        json!({
            "eta_grid": etas, "epsilon": a.epsilon, "rounds": a.rounds, "trials": a.trials,
            "generator": a.generator, "dims": dims, "samples": a.samples,
        }),
        "quantum sBs against classical flow logical error along a stabilizer direction",
    )?;
    report(&p);
    Ok(())
}

#[derive(Serialize)]
struct FockDecayRow {
    epsilon: f64,
    estimate: f64,
    stderr: f64,
    trials: usize,
    max_leak: f64,
    truncation_warning: bool,
}

fn fock_decay_cmd(
    em: &Emitter,
    code: &str,
    epsilon: f64,
    rounds: usize,
    trials: usize,
    dims: Option<usize>,
) -> Result<(), CliError> {
    let (lat, frame, label) = load_code(code)?;
    let dims = default_dims(&lat, dims);
    let cfg = TrajectoryConfig { epsilon, dims: dims.clone(), rounds, trials, seed: em.seed };
    let q = decay_error_prob(&lat, &frame, &cfg)?;
    let row = FockDecayRow {
        epsilon,
        estimate: q.estimate,
        stderr: q.stderr,
        trials: q.trials,
        max_leak: q.max_leak,
        truncation_warning: q.truncation_warning,
    };
    let p = em.emit(
        &format!("fock_decay_{}", stem_safe(&label)),
        &[row],
        Some(&label),
        json!({ "epsilon": epsilon, "rounds": rounds, "trials": trials, "dims": dims }),
        "quantum logical error after one ancilla decay",
    )?;
    report(&p);
    Ok(())
}

fn concat_cmd(em: &Emitter, base: &str, stabilizers: &str, json_out: bool) -> Result<(), CliError> {
    let (lat, frame, label) = load_code(base)?;
    let code: QubitStabilizerCode = if Path::new(stabilizers).is_file() {
        std::fs::read_to_string(stabilizers)?.parse()?
    } else {
        stabilizers.replace(',', "\n").parse()?
    };
    let (clat, cframe) = concatenate(&lat, &frame, &code)?;
    if json_out {
        println!("{}", LatticeFile::from_parts(&clat, &cframe).to_json());
        return Ok(());
    }
    let row = code_row(&clat, &cframe, &clat.name, None)?;
    let p = em.emit(
        &format!("concat_{}", stem_safe(&label)),
        &[row],
        Some(&label),
        json!({ "stabilizers": stabilizers }),
        "concatenated multimode code",
    )?;
    report(&p);
    Ok(())
}
