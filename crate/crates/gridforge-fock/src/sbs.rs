//! Generalized small-Big-small dissipation rounds with a two-level ancilla,
//! gauge tracking and ancilla-decay injection.

use gridforge::gauge::update_after_translation;
use gridforge::symplectic::omega;
use gridforge::{GkpLattice, LogicalFrame};
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{FockError, Result};
use crate::ops::Translation;
use crate::state::FockState;

/// Leakage that aborts a trajectory.
pub const LEAK_ABORT: f64 = 1e-2;

/// Ancilla Pauli axis that controls a translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlAxis {
    X,
    Y,
    Z,
}

impl ControlAxis {
    /// `V` with `σ_axis = V σ_z V†`.
    fn frame(self) -> [[C64; 2]; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| C64::new(re, im);
        match self {
            ControlAxis::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            ControlAxis::X => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
            ControlAxis::Y => [[c(r, 0.0), c(r, 0.0)], [c(0.0, r), c(0.0, -r)]],
        }
    }
}

fn dagger(u: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]]
}

/// Round layout `CT_a(σ·w) · CT_b(s) · CT_a(ν·τ·w)` acting on an ancilla
/// prepared and measured along `σ_z`, with `w = k·ε·(−Ωs)` and the small
/// and big translations controlled by `σ_a` and `σ_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbsLayout {
    pub small_axis: ControlAxis,
    pub big_axis: ControlAxis,
    /// `σ`: sign of the first small translation.
    pub first_sign: f64,
    /// `τ`: sign of the last small translation before the gauge sign.
    pub last_sign: f64,
    /// `k` in `w = k·ε·(−Ωs)`.
    pub small_scale: f64,
}

impl Default for SbsLayout {
    fn default() -> Self {
        SbsLayout {
            small_axis: ControlAxis::Y,
            big_axis: ControlAxis::X,
            first_sign: 1.0,
            last_sign: 1.0,
            small_scale: 1.0,
        }
    }
}

/// Which controlled translation an ancilla bit flip interrupts, and when.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEvent {
    /// 0, 1, 2 for the first small, the big and the last small CT.
    pub which: usize,
    /// Fraction of the CT completed before the flip.
    pub eta: f64,
}

/// Precomputed translations for the dissipation round of one generator.
#[derive(Debug, Clone)]
struct GeneratorPlan {
    s: DVector<f64>,
    /// Unsigned CT vectors in circuit order.
    vectors: [DVector<f64>; 3],
    /// `±v/2` pairs for the first small, big and last small CTs.
    halves: [(Translation, Translation); 3],
}

/// Cycles sBs rounds over all `2m` generators, tracking the gauge.
#[derive(Debug, Clone)]
pub struct SbsEngine {
    pub lat: GkpLattice,
    pub frame: LogicalFrame,
    pub epsilon: f64,
    pub layout: SbsLayout,
    /// `γ_anc·t_□`, the ancilla decay rate in units of the time of a
    /// controlled translation of length `√2`; zero disables injection.
    pub ancilla_decay: f64,
    plans: Vec<GeneratorPlan>,
}

fn half_pair(dims: &[usize], v: &DVector<f64>) -> Result<(Translation, Translation)> {
    Ok((Translation::new(dims, &(v * 0.5))?, Translation::new(dims, &(v * -0.5))?))
}

/// `CT(v)`: ground branch `T(+v/2)`, excited branch `T(−v/2)`.
fn controlled(state: &mut FockState, pair: &(Translation, Translation), sign: f64) {
    let (plus, minus) = if sign >= 0.0 { (&pair.0, &pair.1) } else { (&pair.1, &pair.0) };
    plus.apply_on(state, Some(0));
    minus.apply_on(state, Some(1));
}

impl SbsEngine {
    pub fn new(lat: &GkpLattice, frame: &LogicalFrame, epsilon: f64, dims: &[usize]) -> Result<Self> {
        Self::with_layout(lat, frame, epsilon, dims, SbsLayout::default())
    }

    pub fn with_layout(
        lat: &GkpLattice,
        frame: &LogicalFrame,
        epsilon: f64,
        dims: &[usize],
        layout: SbsLayout,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(FockError::InvalidArgument("ε must be positive".into()));
        }
        if dims.len() != lat.m {
            return Err(FockError::InvalidArgument(format!("{} truncations for a {}-mode code", dims.len(), lat.m)));
        }
        let om = omega(lat.m);
        let plans = (0..lat.dim())
            .map(|j| {
                let s = lat.generator(j);
                let w = -(&om * &s) * (layout.small_scale * epsilon);
                let vectors = [w.clone(), s.clone(), w];
                Ok(GeneratorPlan {
                    halves: [half_pair(dims, &vectors[0])?, half_pair(dims, &vectors[1])?, half_pair(dims, &vectors[2])?],
                    vectors,
                    s,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SbsEngine { lat: lat.clone(), frame: frame.clone(), epsilon, layout, ancilla_decay: 0.0, plans })
    }

    pub fn beta(&self) -> f64 {
        (2.0 * self.epsilon).asinh()
    }

    /// `ν_j = (−1)^{μ_j}` in the current gauge.
    pub fn nu(&self, j: usize) -> f64 {
        if self.frame.gauge.mu[j].is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// One round for generator `j` (0-based) on a mode-only state; returns
    /// the measured ancilla bit. The gauge is updated for the `±s_j/2` shift.
    pub fn round<R: Rng + ?Sized>(
        &mut self,
        state: &mut FockState,
        j: usize,
        decay: Option<DecayEvent>,
        rng: &mut R,
    ) -> Result<bool> {
        if state.ancilla {
            return Err(FockError::InvalidArgument("ancilla must be reset before a round".into()));
        }
        let nu = self.nu(j);
        let lay = self.layout;
        let mut full = std::mem::replace(state, FockState::vacuum(&[2]).expect("valid dims")).with_ancilla();
        let signs = [lay.first_sign, 1.0, lay.last_sign * nu];
        let axes = [lay.small_axis, lay.big_axis, lay.small_axis];
        for step in 0..3 {
            let v = axes[step].frame();
            full.apply_ancilla(dagger(v));
            match decay {
                Some(ev) if ev.which == step => self.interrupted(&mut full, j, step, ev.eta, signs[step])?,
                _ => controlled(&mut full, &self.plans[j].halves[step], signs[step]),
            }
            full.apply_ancilla(v);
        }
        let p_excited = full.ancilla_excited();
        let excited = rng.random::<f64>() < p_excited;
        full.measure_and_reset(excited)?;
        let mut out = full.without_ancilla();
        out.max_leak = out.max_leak.max(out.leakage());
        if out.leakage() > LEAK_ABORT {
            return Err(FockError::Truncation { leak: out.leakage() });
        }
        *state = out;
        self.frame.gauge = update_after_translation(&self.lat, &self.frame, &self.plans[j].s)?;
        Ok(excited)
    }

    /// Bit flip at fraction `eta` of a CT: each branch moves `±η v/2`, flips,
    /// then moves `∓(1 − η) v/2`.
    fn interrupted(&self, full: &mut FockState, j: usize, step: usize, eta: f64, sign: f64) -> Result<()> {
        let v = &self.plans[j].vectors[step] * sign;
        controlled(full, &half_pair(&full.dims, &(&v * eta))?, 1.0);
        let c = |re: f64| C64::new(re, 0.0);
        full.apply_ancilla([[c(0.0), c(1.0)], [c(1.0), c(0.0)]]);
        controlled(full, &half_pair(&full.dims, &(&v * (1.0 - eta)))?, 1.0);
        Ok(())
    }

    /// Probability `1 − e^{−γ_anc t_tot/2}` of a decay during round `j`, with
    /// `t_tot = (1 + 2ε)·t_s` and `t_s = t_□·|s_j|/√2`.
    pub fn decay_probability(&self, j: usize) -> f64 {
        let t_s = self.plans[j].s.norm() / std::f64::consts::SQRT_2;
        1.0 - (-self.ancilla_decay * t_s * (1.0 + 2.0 * self.epsilon) / 2.0).exp()
    }

    /// Chooses the interrupted CT with weights `(ε, 1, ε)/(1 + 2ε)` and a
    /// uniform flip time.
    pub fn draw_decay<R: Rng + ?Sized>(&self, rng: &mut R) -> DecayEvent {
        let u = rng.random::<f64>() * (1.0 + 2.0 * self.epsilon);
        let which = if u < self.epsilon {
            0
        } else if u < 1.0 + self.epsilon {
            1
        } else {
            2
        };
        DecayEvent { which, eta: rng.random::<f64>() }
    }

    /// A decay event for round `j` with probability [`decay_probability`](Self::decay_probability).
    pub fn sample_decay<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Option<DecayEvent> {
        if self.ancilla_decay <= 0.0 || rng.random::<f64>() >= self.decay_probability(j) {
            return None;
        }
        Some(self.draw_decay(rng))
    }

    /// One full cycle over every generator, injecting ancilla decays at the
    /// configured rate.
    pub fn cycle<R: Rng + ?Sized>(&mut self, state: &mut FockState, rng: &mut R) -> Result<()> {
        for j in 0..self.lat.dim() {
            let decay = self.sample_decay(j, rng);
            self.round(state, j, decay, rng)?;
        }
        Ok(())
    }
}
