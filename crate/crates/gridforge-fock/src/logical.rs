//! Logical error probabilities of the full quantum model: prepare Pauli
//! eigenstates, inject a translation or an ancilla decay, stabilize with sBs
//! rounds and read out the finite-energy logical Pauli.

use gridforge::{GkpLattice, LogicalFrame, Pauli};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codeword::{beta_from_epsilon, build_codeword, logical_expectation, CodewordSpec};
use crate::error::{FockError, Result};
use crate::ops::Translation;
use crate::sbs::SbsEngine;
use crate::state::{FockState, LEAK_WARN};

const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub epsilon: f64,
    pub dims: Vec<usize>,
    /// Full dissipation cycles after the injected error.
    pub rounds: usize,
    /// Trajectories; trial `i` prepares the `+1` eigenstate of X, Y, Z for
    /// `i mod 3 = 0, 1, 2`.
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumEstimate {
    /// `(f_X + f_Y + f_Z)/2` with `f_P = (1 − ⟨P̄⟩)/2` averaged per Pauli.
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
    pub max_leak: f64,
    pub truncation_warning: bool,
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn eigenstates(lat: &GkpLattice, frame: &LogicalFrame, cfg: &TrajectoryConfig) -> Result<Vec<FockState>> {
    if cfg.trials == 0 || cfg.dims.len() != lat.m {
        return Err(FockError::InvalidArgument("need at least one trial and one truncation per mode".into()));
    }
    let beta = beta_from_epsilon(cfg.epsilon);
    PAULIS.iter().map(|&p| build_codeword(lat, frame, &CodewordSpec::new(p, beta, &cfg.dims))).collect()
}

/// Per-trial flips `(1 − ⟨P̄⟩)/2` grouped into the estimate.
fn summarize(results: Vec<Result<(f64, f64)>>) -> Result<QuantumEstimate> {
    let mut flips = [Vec::new(), Vec::new(), Vec::new()];
    let mut max_leak: f64 = 0.0;
    for (i, r) in results.into_iter().enumerate() {
        let (flip, leak) = r?;
        flips[i % 3].push(flip);
        max_leak = max_leak.max(leak);
    }
    let mut estimate = 0.0;
    let mut var = 0.0;
    for f in flips.iter().filter(|f| !f.is_empty()) {
        let n = f.len() as f64;
        let mean = f.iter().sum::<f64>() / n;
        estimate += mean / 2.0;
        if f.len() > 1 {
            var += f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n / 4.0;
        }
    }
    let trials = flips.iter().map(Vec::len).sum();
    Ok(QuantumEstimate { estimate, stderr: var.sqrt(), trials, max_leak, truncation_warning: max_leak > LEAK_WARN })
}

fn readout(state: &FockState, engine: &SbsEngine, pauli: Pauli) -> Result<(f64, f64)> {
    let v = logical_expectation(state, &engine.frame, pauli, engine.beta())?;
    Ok(((1.0 - v) / 2.0, state.max_leak.max(state.leakage())))
}

/// Flip probability after `T(e)` followed by `rounds` dissipation cycles.
pub fn quantum_error_prob(
    lat: &GkpLattice,
    frame: &LogicalFrame,
    e: &DVector<f64>,
    cfg: &TrajectoryConfig,
) -> Result<QuantumEstimate> {
    if e.len() != lat.dim() {
        return Err(FockError::InvalidArgument("error vector length differs from 2m".into()));
    }
    let starts = eigenstates(lat, frame, cfg)?;
    let shift = Translation::new(&cfg.dims, e)?;
    let engine = SbsEngine::new(lat, frame, cfg.epsilon, &cfg.dims)?;
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, i);
            let mut state = starts[i % 3].clone();
            shift.apply(&mut state);
            state.guard(crate::sbs::LEAK_ABORT)?;
            let mut eng = engine.clone();
            for _ in 0..cfg.rounds {
                eng.cycle(&mut state, &mut rng)?;
            }
            readout(&state, &eng, PAULIS[i % 3])
        })
        .collect();
    summarize(results)
}

/// Flip probability when one round is hit by an ancilla bit flip. Trial `i`
/// places the decay in generator `(i / 3) mod 2m` during the first cycle;
/// the interrupted CT and flip time follow [`SbsEngine::draw_decay`].
pub fn decay_error_prob(lat: &GkpLattice, frame: &LogicalFrame, cfg: &TrajectoryConfig) -> Result<QuantumEstimate> {
    let starts = eigenstates(lat, frame, cfg)?;
    let engine = SbsEngine::new(lat, frame, cfg.epsilon, &cfg.dims)?;
    let dim = lat.dim();
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, i);
            let mut state = starts[i % 3].clone();
            let mut eng = engine.clone();
            let hit = (i / 3) % dim;
            for j in 0..dim {
                let decay = (j == hit).then(|| eng.draw_decay(&mut rng));
                eng.round(&mut state, j, decay, &mut rng)?;
            }
            for _ in 0..cfg.rounds {
                eng.cycle(&mut state, &mut rng)?;
            }
            readout(&state, &eng, PAULIS[i % 3])
        })
        .collect();
    summarize(results)
}
