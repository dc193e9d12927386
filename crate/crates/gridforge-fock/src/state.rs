//! Truncated multimode Fock states with an optional two-level ancilla.

use num_complex::Complex64 as C64;

use crate::error::{FockError, Result};

/// Population allowed in the top tenth of any mode's levels.
pub const LEAK_WARN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    /// Truncation `N_j` of each mode; the last mode varies fastest.
    pub dims: Vec<usize>,
    /// Mode amplitudes, followed by the excited-ancilla branch when
    /// `ancilla` is set (ground branch first).
    pub amps: Vec<C64>,
    pub ancilla: bool,
    /// Largest top-band population seen so far.
    pub max_leak: f64,
}

impl FockState {
    pub fn vacuum(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&n| n < 2) {
            return Err(FockError::InvalidArgument("every mode needs at least two levels".into()));
        }
        let size: usize = dims.iter().product();
        let mut amps = vec![C64::new(0.0, 0.0); size];
        amps[0] = C64::new(1.0, 0.0);
        Ok(FockState { dims: dims.to_vec(), amps, ancilla: false, max_leak: 0.0 })
    }

    pub fn from_amps(dims: &[usize], amps: Vec<C64>) -> Result<Self> {
        let size: usize = dims.iter().product();
        if amps.len() != size {
            return Err(FockError::InvalidArgument(format!("expected {size} amplitudes, got {}", amps.len())));
        }
        let mut s = FockState { dims: dims.to_vec(), amps, ancilla: false, max_leak: 0.0 };
        s.normalize()?;
        Ok(s)
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn mode_size(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(FockError::Construction("state has zero norm".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(n)
    }

    /// Attach an ancilla in its ground state.
    pub fn with_ancilla(mut self) -> Self {
        if !self.ancilla {
            let n = self.amps.len();
            self.amps.extend(std::iter::repeat_n(C64::new(0.0, 0.0), n));
            self.ancilla = true;
        }
        self
    }

    /// Drop the ancilla, keeping the ground branch.
    pub fn without_ancilla(mut self) -> Self {
        if self.ancilla {
            self.amps.truncate(self.mode_size());
            self.ancilla = false;
        }
        self
    }

    pub(crate) fn branches_mut(&mut self) -> impl Iterator<Item = &mut [C64]> {
        let n = self.mode_size();
        self.amps.chunks_mut(n)
    }

    /// Occupation numbers of flat mode index `idx`.
    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        let mut r = idx;
        for (k, &n) in self.dims.iter().enumerate().rev() {
            out[k] = r % n;
            r /= n;
        }
        out
    }

    /// Population of each mode's top `max(1, N/10)` levels, maximized over modes.
    pub fn leakage(&self) -> f64 {
        let n = self.mode_size();
        let mut worst: f64 = 0.0;
        for (k, &dim) in self.dims.iter().enumerate() {
            let band = (dim / 10).max(1);
            let mut p = 0.0;
            for (idx, a) in self.amps.iter().enumerate() {
                if self.occupations(idx % n)[k] >= dim - band {
                    p += a.norm_sqr();
                }
            }
            worst = worst.max(p);
        }
        let total = self.norm().powi(2);
        if total > 0.0 {
            worst / total
        } else {
            0.0
        }
    }

    /// Records the current leakage; errors if it exceeds `limit`.
    pub fn guard(&mut self, limit: f64) -> Result<f64> {
        let leak = self.leakage();
        self.max_leak = self.max_leak.max(leak);
        if leak > limit {
            return Err(FockError::Truncation { leak });
        }
        Ok(leak)
    }

    pub fn truncation_warning(&self) -> bool {
        self.max_leak > LEAK_WARN
    }

    /// `⟨ψ|φ⟩` over all amplitudes.
    pub fn inner(&self, other: &FockState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &FockState) -> f64 {
        self.inner(other).norm_sqr() / (self.norm().powi(2) * other.norm().powi(2))
    }

    /// Total-excitation-number probabilities.
    pub fn number_distribution(&self) -> Vec<f64> {
        let n = self.mode_size();
        let max: usize = self.dims.iter().map(|d| d - 1).sum();
        let mut p = vec![0.0; max + 1];
        for (idx, a) in self.amps.iter().enumerate() {
            let tot: usize = self.occupations(idx % n).iter().sum();
            p[tot] += a.norm_sqr();
        }
        p
    }

    pub fn mean_number(&self, mode: usize) -> f64 {
        let n = self.mode_size();
        self.amps.iter().enumerate().map(|(idx, a)| self.occupations(idx % n)[mode] as f64 * a.norm_sqr()).sum::<f64>()
            / self.norm().powi(2)
    }

    /// Applies `op` (row-major `N_k × N_k`) to mode `k` of every branch.
    pub fn apply_mode_matrix(&mut self, k: usize, op: &[C64]) {
        self.apply_mode_matrix_on(k, op, None);
    }

    /// Like [`apply_mode_matrix`](Self::apply_mode_matrix), restricted to
    /// ancilla branch `branch` (0 ground, 1 excited) when given.
    pub fn apply_mode_matrix_on(&mut self, k: usize, op: &[C64], branch: Option<usize>) {
        let dim = self.dims[k];
        debug_assert_eq!(op.len(), dim * dim);
        let inner: usize = self.dims[k + 1..].iter().product();
        let outer: usize = self.dims[..k].iter().product();
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for (b, branch_amps) in self.branches_mut().enumerate() {
            if branch.is_some_and(|x| x != b) {
                continue;
            }
            let branch = branch_amps;
            for o in 0..outer {
                for i in 0..inner {
                    let base = o * dim * inner + i;
                    for (n, c) in col.iter_mut().enumerate() {
                        *c = branch[base + n * inner];
                    }
                    for m in 0..dim {
                        let row = &op[m * dim..(m + 1) * dim];
                        branch[base + m * inner] = row.iter().zip(&col).map(|(x, y)| x * y).sum();
                    }
                }
            }
        }
    }

    /// Multiplies each amplitude by `f(occupations)`.
    pub fn apply_diagonal(&mut self, f: impl Fn(&[usize]) -> C64) {
        let n = self.mode_size();
        let factors: Vec<C64> = (0..n).map(|idx| f(&self.occupations(idx))).collect();
        for branch in self.branches_mut() {
            for (a, g) in branch.iter_mut().zip(&factors) {
                *a *= g;
            }
        }
    }

    /// `â_k` (or `â_k†`) applied in the truncated space.
    pub fn ladder(&self, k: usize, dagger: bool) -> FockState {
        let dim = self.dims[k];
        let inner: usize = self.dims[k + 1..].iter().product();
        let mut out = self.clone();
        out.amps.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        let n = self.mode_size();
        for (idx, a) in self.amps.iter().enumerate() {
            let occ = (idx % n / inner) % dim;
            if dagger {
                if occ + 1 < dim {
                    out.amps[idx + inner] += a * ((occ + 1) as f64).sqrt();
                }
            } else if occ > 0 {
                out.amps[idx - inner] += a * (occ as f64).sqrt();
            }
        }
        out
    }

    /// Quadrature `x̂_c` in order `(q1, p1, q2, p2, …)`.
    pub fn quadrature(&self, c: usize) -> FockState {
        let k = c / 2;
        let a = self.ladder(k, false);
        let ad = self.ladder(k, true);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = a.clone();
        for ((o, x), y) in out.amps.iter_mut().zip(&a.amps).zip(&ad.amps) {
            *o = if c.is_multiple_of(2) { (x + y) * s } else { (x - y) * C64::new(0.0, -s) };
        }
        out
    }

    pub fn expect_quadratures(&self) -> Vec<f64> {
        let norm = self.norm().powi(2);
        (0..2 * self.modes()).map(|c| self.inner(&self.quadrature(c)).re / norm).collect()
    }

    /// Ancilla excited-state population.
    pub fn ancilla_excited(&self) -> f64 {
        if !self.ancilla {
            return 0.0;
        }
        let n = self.mode_size();
        self.amps[n..].iter().map(|a| a.norm_sqr()).sum::<f64>() / self.norm().powi(2)
    }

    /// Applies a 2×2 unitary `[[u00, u01], [u10, u11]]` to the ancilla.
    pub fn apply_ancilla(&mut self, u: [[C64; 2]; 2]) {
        assert!(self.ancilla, "state has no ancilla");
        let n = self.mode_size();
        let (g, e) = self.amps.split_at_mut(n);
        for (a, b) in g.iter_mut().zip(e.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = u[0][0] * x + u[0][1] * y;
            *b = u[1][0] * x + u[1][1] * y;
        }
    }

    /// Projects the ancilla onto `excited`, renormalizes, and resets it to
    /// the ground state.
    pub fn measure_and_reset(&mut self, excited: bool) -> Result<()> {
        let n = self.mode_size();
        if excited {
            let (g, e) = self.amps.split_at_mut(n);
            g.copy_from_slice(e);
        }
        self.amps[n..].iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        self.normalize().map(|_| ())
    }
}
