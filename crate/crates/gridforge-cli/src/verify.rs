//! Fock-level check suites behind `fock verify`. Each check reports the
//! measured value next to its threshold.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use gridforge::gauge::{nu, GaugeState};
use gridforge::{catalog, LogicalFrame, Pauli};
use gridforge_fock::codeword::{logical_expectation, stabilizer_expectations};
use gridforge_fock::ops::apply_in_place;
use gridforge_fock::sbs::SbsEngine;
use gridforge_fock::{
    build_codeword, decay_error_prob, expectation_t, CodewordSpec, FockState, OperatorSpec, TrajectoryConfig,
};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

const BETA: f64 = 0.2;
const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Codewords,
    Gates,
    Sbs,
    Decay,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Codewords => "codewords",
            Suite::Gates => "gates",
            Suite::Sbs => "sbs",
            Suite::Decay => "decay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub check: String,
    pub value: f64,
    /// `ge`, `le` or `within` (|value − target| ≤ tolerance).
    pub relation: String,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_least(suite: Suite, check: &str, value: f64, bound: f64) -> Self {
        Check::build(suite, check, value, "ge", bound, 0.0, value >= bound)
    }

    fn at_most(suite: Suite, check: &str, value: f64, bound: f64) -> Self {
        Check::build(suite, check, value, "le", bound, 0.0, value <= bound)
    }

    fn within(suite: Suite, check: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Check::build(suite, check, value, "within", target, tolerance, (value - target).abs() <= tolerance)
    }

    fn build(suite: Suite, check: &str, value: f64, rel: &str, target: f64, tolerance: f64, pass: bool) -> Self {
        Check {
            suite: suite.name().into(),
            check: check.into(),
            value,
            relation: rel.into(),
            target,
            tolerance,
            pass,
        }
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<Check>, CliError> {
    match suite {
        Suite::Codewords => codewords(),
        Suite::Gates => gates(),
        Suite::Sbs => sbs(seed),
        Suite::Decay => decay(seed),
    }
}

fn support_mod4(s: &FockState, residue: usize) -> f64 {
    s.number_distribution().iter().enumerate().filter(|(n, _)| n % 4 == residue).map(|(_, p)| p).sum()
}

/// `|+Z⟩ ± |+X⟩` of the square code, normalized: the Hadamard eigenstates.
pub fn square_hadamard_eigenstates(dims: &[usize], beta: f64) -> Result<(FockState, FockState), CliError> {
    let (lat, frame) = catalog("square")?;
    let z = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::Z, beta, dims))?;
    let x = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::X, beta, dims))?;
    let combine = |sign: f64| {
        let amps = z.amps.iter().zip(&x.amps).map(|(a, b)| a + b * sign).collect();
        FockState::from_amps(dims, amps)
    };
    Ok((combine(1.0)?, combine(-1.0)?))
}

/// Population on `n ≡ r (mod 4)` for the qunaught with `μ = 0` (r = 0) and
/// `μ = (1,1)` (r = 1), and for the square Hadamard eigenstates (r = 0, 2).
pub fn mod4_supports(n: usize) -> Result<Vec<(String, f64)>, CliError> {
    let (lat, mut frame) = catalog("qunaught")?;
    let plus = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::I, BETA, &[n]))?;
    frame.gauge = GaugeState::with_mu(vec![1, 1]);
    let minus = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::I, BETA, &[n]))?;
    let (hp, hm) = square_hadamard_eigenstates(&[n], BETA)?;
    Ok(vec![
        ("qunaught mu=00 on n=0 mod 4".into(), support_mod4(&plus, 0)),
        ("qunaught mu=11 on n=1 mod 4".into(), support_mod4(&minus, 1)),
        ("square +H on n=0 mod 4".into(), support_mod4(&hp, 0)),
        ("square -H on n=2 mod 4".into(), support_mod4(&hm, 2)),
    ])
}

/// Fraction of lattice vectors whose `⟨T(λ)⟩` sign on the qunaught equals `ν(λ)`.
pub fn qunaught_sign_agreement(n: usize) -> Result<f64, CliError> {
    let (lat, frame) = catalog("qunaught")?;
    let s = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::I, BETA, &[n]))?;
    let coords: [[i64; 2]; 12] =
        [[1, 0], [0, 1], [1, 1], [1, -1], [2, 1], [-1, 2], [2, 0], [-2, -1], [1, 2], [3, 0], [0, -3], [-2, 2]];
    let mut agree = 0;
    for c in coords {
        let v = lat.point(&c);
        let t = expectation_t(&s, &v, BETA)?;
        if t.re.signum() as i8 == nu(&lat, &frame.gauge.mu, &v)? {
            agree += 1;
        }
    }
    Ok(agree as f64 / coords.len() as f64)
}

fn codewords() -> Result<Vec<Check>, CliError> {
    let mut out: Vec<Check> = mod4_supports(50)?
        .into_iter()
        .map(|(name, p)| Check::at_least(Suite::Codewords, &name, p, 0.999))
        .collect();
    for (name, dims) in [("square", vec![40]), ("hexagonal", vec![40]), ("tesseract", vec![30, 30])] {
        let (lat, frame) = catalog(name)?;
        let s = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::Z, BETA, &dims))?;
        let t = stabilizer_expectations(&s, &lat, &frame.gauge.mu, BETA)?;
        let worst = t.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(Check::at_least(Suite::Codewords, &format!("{name} min stabilizer expectation"), worst, 0.99));
    }
    out.push(Check::at_least(Suite::Codewords, "qunaught sign agreement", qunaught_sign_agreement(50)?, 1.0));
    Ok(out)
}

fn expectations(state: &FockState, frame: &LogicalFrame) -> Result<[f64; 3], CliError> {
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(PAULIS) {
        *o = logical_expectation(state, frame, p, BETA)?;
    }
    Ok(out)
}

/// Largest deviation between two Kerr `e^{iπn²/8}` applications and the
/// `R(π/2)` Hadamard over the logical expectations of the square Pauli
/// eigenstates.
pub fn kerr_squared_deviation(n: usize) -> Result<f64, CliError> {
    let (lat, frame) = catalog("square")?;
    let sqrt_h = OperatorSpec::Kerr { mode: 0, theta: PI / 8.0 };
    let rot = OperatorSpec::Rotation { mode: 0, theta: FRAC_PI_2 };
    let mut worst: f64 = 0.0;
    for p in PAULIS {
        let start = build_codeword(&lat, &frame, &CodewordSpec::new(p, BETA, &[n]))?;
        let mut twice = start.clone();
        apply_in_place(&mut twice, &sqrt_h)?;
        apply_in_place(&mut twice, &sqrt_h)?;
        let mut rotated = start;
        apply_in_place(&mut rotated, &rot)?;
        let (a, b) = (expectations(&twice, &frame)?, expectations(&rotated, &frame)?);
        for k in 0..3 {
            worst = worst.max((a[k] - b[k]).abs());
        }
    }
    Ok(worst)
}

fn gates() -> Result<Vec<Check>, CliError> {
    let mut out = vec![Check::at_most(Suite::Gates, "Kerr squared vs R(pi/2) on square", kerr_squared_deviation(50)?, 0.02)];

    let (plus, minus) = square_hadamard_eigenstates(&[50], BETA)?;
    for (label, state, phase) in [("+H", plus, C64::new(1.0, 0.0)), ("-H", minus, C64::new(0.0, 1.0))] {
        let mut k = state.clone();
        apply_in_place(&mut k, &OperatorSpec::Kerr { mode: 0, theta: PI / 8.0 })?;
        let err = (state.inner(&k) - phase).norm();
        out.push(Check::at_most(Suite::Gates, &format!("Kerr eigenphase on square {label}"), err, 1e-3));
    }

    let (lat, frame) = catalog("d4")?;
    let mut st = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::X, BETA, &[35, 35]))?;
    apply_in_place(&mut st, &OperatorSpec::Kerr { mode: 0, theta: FRAC_PI_4 })?;
    let [x, y, _] = expectations(&st, &frame)?;
    out.push(Check::within(Suite::Gates, "D4 Kerr(pi/4) logical phase", y.atan2(x), FRAC_PI_4, 0.03));

    let n = 25;
    let state = {
        let amps = minus_pair(n)?;
        FockState::from_amps(&[n, n], amps)?
    };
    let mut ck = state.clone();
    apply_in_place(&mut ck, &OperatorSpec::CrossKerr { j: 0, k: 1, theta: FRAC_PI_4 })?;
    out.push(Check::at_least(Suite::Gates, "cross-Kerr(pi/4) flips |-H,-H>", -state.inner(&ck).re, 0.95));
    Ok(out)
}

fn minus_pair(n: usize) -> Result<Vec<C64>, CliError> {
    let (_, m) = square_hadamard_eigenstates(&[n], BETA)?;
    Ok(m.amps.iter().flat_map(|a| m.amps.iter().map(move |b| a * b)).collect())
}

/// Minimum `⟨T_{j,β}⟩` after `cycles` sBs cycles from vacuum at `ε`.
pub fn convergence_from_vacuum(name: &str, dims: &[usize], epsilon: f64, cycles: usize, seed: u64) -> Result<f64, CliError> {
    let (lat, frame) = catalog(name)?;
    let mut eng = SbsEngine::new(&lat, &frame, epsilon, dims)?;
    let mut state = FockState::vacuum(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cycles {
        eng.cycle(&mut state, &mut rng)?;
    }
    let t = stabilizer_expectations(&state, &lat, &eng.frame.gauge.mu, eng.beta())?;
    Ok(t.into_iter().fold(f64::INFINITY, f64::min))
}

fn sbs(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut out = vec![];
    for (name, dims) in [("square", vec![50]), ("tesseract", vec![30, 30])] {
        let t = convergence_from_vacuum(name, &dims, 0.1, 50, seed)?;
        out.push(Check::at_least(Suite::Sbs, &format!("{name} min stabilizer after 50 cycles"), t, 0.9));
    }
    Ok(out)
}

fn decay(seed: u64) -> Result<Vec<Check>, CliError> {
    let (sq, sq_frame) = catalog("square")?;
    let cfg = TrajectoryConfig { epsilon: 0.1, dims: vec![50], rounds: 20, trials: 240, seed };
    let p = decay_error_prob(&sq, &sq_frame, &cfg)?;
    let mut out = vec![Check::within(Suite::Decay, "square decay error", p.estimate, 0.5, 0.12)];
    let (tess, tess_frame) = catalog("tesseract")?;
    let cfg = TrajectoryConfig { epsilon: 0.044, dims: vec![80, 80], rounds: 25, trials: 120, seed };
    let p = decay_error_prob(&tess, &tess_frame, &cfg)?;
    out.push(Check::within(Suite::Decay, "tesseract decay error at eps 0.044", p.estimate, 0.11, 0.04));
    Ok(out)
}
