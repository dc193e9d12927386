//! Homodyne error correction with GKP ancillas at the displacement level:
//! Gaussian translation noise, modular syndromes, the linear correction
//! `δ = (SΩ)⁻¹ξ/l²` and residual classification.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GridError, Result};
use crate::lattice::{pauli_class, GkpLattice, LogicalFrame, Pauli};
use crate::symplectic::omega;

const L2: f64 = 2.0 * PI;

/// Gaussian translation noise in translation units. `sigma` is the per-mode
/// width, `E|e|² = m·σ²`, so each quadrature has std `σ/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub sigma: f64,
    pub db: f64,
    pub noisy_ancilla: bool,
}

pub fn db_from_sigma(sigma: f64) -> f64 {
    10.0 * (0.5 / (sigma * sigma)).log10()
}

pub fn sigma_from_db(db: f64) -> f64 {
    (0.5 / 10f64.powf(db / 10.0)).sqrt()
}

impl NoiseModel {
    pub fn from_sigma(sigma: f64, noisy_ancilla: bool) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(GridError::InvalidArgument(format!("invalid noise width {sigma}")));
        }
        Ok(NoiseModel { sigma, db: db_from_sigma(sigma), noisy_ancilla })
    }

    pub fn from_db(db: f64, noisy_ancilla: bool) -> Result<Self> {
        if !db.is_finite() {
            return Err(GridError::InvalidArgument(format!("invalid squeezing {db} dB")));
        }
        Ok(NoiseModel { sigma: sigma_from_db(db), db, noisy_ancilla })
    }

    pub fn quadrature_sigma(&self) -> f64 {
        self.sigma * std::f64::consts::FRAC_1_SQRT_2
    }

    /// One draw of the data translation error.
    pub fn sample(&self, dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        let s = self.quadrature_sigma();
        DVector::from_fn(dim, |_, _| {
            let z: f64 = StandardNormal.sample(rng);
            s * z
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Syndrome angles in `(−π, π]`.
    pub syndrome: DVector<f64>,
    pub correction: DVector<f64>,
    pub residual_class: Option<Pauli>,
    pub success: Option<bool>,
}

fn wrap(x: f64) -> f64 {
    let y = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Lattice-dependent matrices shared by every trial.
#[derive(Debug, Clone)]
pub struct Decoder {
    s_omega: DMatrix<f64>,
    s_omega_inv: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    gen_norms: Vec<f64>,
    generators: Vec<DVector<f64>>,
}

impl Decoder {
    pub fn new(lat: &GkpLattice) -> Result<Self> {
        let s_omega = &lat.s * omega(lat.m);
        let s_omega_inv = s_omega.clone().try_inverse().ok_or_else(|| GridError::Degenerate("SΩ is singular".into()))?;
        let a_inv = lat.a.map(|x| x as f64).try_inverse().ok_or_else(|| GridError::Degenerate("A is singular".into()))?;
        let generators: Vec<DVector<f64>> = (0..lat.dim()).map(|j| lat.generator(j)).collect();
        Ok(Decoder { gen_norms: generators.iter().map(|g| g.norm()).collect(), generators, s_omega, s_omega_inv, a_inv })
    }

    /// `ξ = −l²SΩe mod 2π`.
    pub fn syndrome(&self, e: &DVector<f64>) -> DVector<f64> {
        (&self.s_omega * e).map(|x| wrap(-L2 * x))
    }

    pub fn correction(&self, xi: &DVector<f64>) -> DVector<f64> {
        &self.s_omega_inv * xi / L2
    }

    /// Integer syndrome `a = SΩ(e + δ)` of a dual-lattice residual, or
    /// `None` if the residual is off `Λ*` by more than `1e-6`.
    pub fn residual_coords(&self, residual: &DVector<f64>) -> Option<DVector<f64>> {
        let w = &self.s_omega * residual;
        let a = w.map(f64::round);
        ((&w - &a).amax() < 1e-6).then_some(a)
    }

    /// `b = A⁻¹a` integral: the residual is a stabilizer.
    pub fn is_stabilizer(&self, a: &DVector<f64>) -> bool {
        (&self.a_inv * a).iter().all(|b| (b - b.round()).abs() < 1e-6)
    }

    /// Residual left by ideal-syndrome decoding of `e`.
    pub fn ideal_residual(&self, e: &DVector<f64>) -> DVector<f64> {
        e + self.correction(&self.syndrome(e))
    }

    /// Noisy round: generators measured in order, each with syndrome noise of
    /// std `l²|s_j|σ_q` and a back-propagated data translation `z·s_j`,
    /// `z ~ N(0, σ_q²)`, that later syndromes see (`σ_q` per quadrature). The leftover is then
    /// decoded by one ideal round.
    pub fn noisy_residual(&self, e: &DVector<f64>, sigma: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
        let mut data = e.clone();
        let mut xi = DVector::zeros(e.len());
        for (j, g) in self.generators.iter().enumerate() {
            let clean = -L2 * (self.s_omega.row(j) * &data)[0];
            let n: f64 = StandardNormal.sample(rng);
            xi[j] = wrap(clean + L2 * self.gen_norms[j] * sigma * n);
            let z: f64 = StandardNormal.sample(rng);
            data += g * (sigma * z);
        }
        let leftover = data + self.correction(&xi);
        self.ideal_residual(&leftover)
    }
}

/// Syndrome and linear correction for a translation error `e`; the class is
/// left unset.
pub fn syndrome_and_correct(lat: &GkpLattice, e: &DVector<f64>) -> Result<DecodeOutcome> {
    if e.len() != lat.dim() || e.iter().any(|x| !x.is_finite()) {
        return Err(GridError::InvalidArgument("translation error must be a finite 2m-vector".into()));
    }
    let dec = Decoder::new(lat)?;
    let syndrome = dec.syndrome(e);
    let correction = dec.correction(&syndrome);
    Ok(DecodeOutcome { syndrome, correction, residual_class: None, success: None })
}

/// Logical class of the residual `e + δ`.
pub fn classify_residual(lat: &GkpLattice, frame: &LogicalFrame, e: &DVector<f64>, delta: &DVector<f64>) -> Result<DecodeOutcome> {
    let dec = Decoder::new(lat)?;
    let residual = e + delta;
    let a = dec
        .residual_coords(&residual)
        .ok_or_else(|| GridError::DecoderInconsistency("corrected error is not a dual-lattice vector".into()))?;
    let success = dec.is_stabilizer(&a);
    let exact = &dec.s_omega_inv * &a;
    let class = pauli_class(lat, frame, &exact)?
        .ok_or_else(|| GridError::DecoderInconsistency("residual outside the dual lattice".into()))?;
    if success != (class == Pauli::I) {
        return Err(GridError::DecoderInconsistency("stabilizer test disagrees with the Pauli class".into()));
    }
    Ok(DecodeOutcome { syndrome: dec.syndrome(e), correction: delta.clone(), residual_class: Some(class), success: Some(success) })
}

/// Full decode of one error with ideal ancillas.
pub fn decode(lat: &GkpLattice, frame: &LogicalFrame, e: &DVector<f64>) -> Result<DecodeOutcome> {
    let partial = syndrome_and_correct(lat, e)?;
    classify_residual(lat, frame, e, &partial.correction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialStats {
    pub p_logical: f64,
    pub stderr: f64,
    pub trials: usize,
    pub failures: usize,
    pub seed: u64,
}

pub(crate) fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Logical error frequency over independent trials; trial `i` draws from
/// stream `i` of the seeded generator.
pub fn run_trials(lat: &GkpLattice, noise: &NoiseModel, trials: usize, seed: u64) -> Result<TrialStats> {
    if trials == 0 {
        return Err(GridError::InvalidArgument("need at least one trial".into()));
    }
    let dec = Decoder::new(lat)?;
    let dim = lat.dim();
    let failures = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let e = noise.sample(dim, &mut rng);
            let residual = if noise.noisy_ancilla {
                dec.noisy_residual(&e, noise.quadrature_sigma(), &mut rng)
            } else {
                dec.ideal_residual(&e)
            };
            let a = dec.residual_coords(&residual).expect("ideal decoding lands on the dual lattice");
            usize::from(!dec.is_stabilizer(&a))
        })
        .sum::<usize>();
    let p = failures as f64 / trials as f64;
    Ok(TrialStats { p_logical: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials, failures, seed })
}

/// Failure probability over a decibel grid.
pub fn sweep(lat: &GkpLattice, dbs: &[f64], noisy_ancilla: bool, trials: usize, seed: u64) -> Result<Vec<(f64, TrialStats)>> {
    dbs.iter().map(|&db| Ok((db, run_trials(lat, &NoiseModel::from_db(db, noisy_ancilla)?, trials, seed)?))).collect()
}
