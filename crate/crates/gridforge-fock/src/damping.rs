//! Oscillator amplitude damping as Kraus branches, sampled per trajectory or
//! applied as a channel to small density matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{FockError, Result};
use crate::state::FockState;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(FockError::InvalidArgument(format!("damping γ = {gamma} outside [0, 1)")));
    }
    Ok(())
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let lf = |x: usize| (1..=x).map(|i| (i as f64).ln()).sum::<f64>();
    lf(n) - lf(k) - lf(n - k)
}

/// `K_k = Σ_n √C(n,k) γ^{k/2} (1−γ)^{(n−k)/2} |n−k⟩⟨n|`, row-major `N × N`.
pub fn kraus_matrix(dim: usize, gamma: f64, k: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for n in k..dim {
        let w = if gamma == 0.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            (0.5 * (ln_binomial(n, k) + k as f64 * gamma.ln() + (n - k) as f64 * (1.0 - gamma).ln())).exp()
        };
        out[(n - k) * dim + n] = C64::new(w, 0.0);
    }
    out
}

/// Samples one Kraus branch independently on every mode and renormalizes.
/// Returns the number of excitations lost per mode.
pub fn amplitude_damping<R: Rng + ?Sized>(state: &mut FockState, gamma: f64, rng: &mut R) -> Result<Vec<usize>> {
    check_gamma(gamma)?;
    let mut lost = Vec::with_capacity(state.modes());
    for mode in 0..state.modes() {
        let dim = state.dims[mode];
        let total = state.norm().powi(2);
        let mut u = rng.random::<f64>() * total;
        let mut chosen = None;
        for k in 0..dim {
            let mut branch = state.clone();
            branch.apply_mode_matrix(mode, &kraus_matrix(dim, gamma, k));
            let p = branch.norm().powi(2);
            if u < p || k + 1 == dim {
                chosen = Some((k, branch));
                break;
            }
            u -= p;
        }
        let (k, branch) = chosen.expect("at least one branch");
        *state = branch;
        state.normalize()?;
        lost.push(k);
    }
    Ok(lost)
}

/// Deterministic channel `ρ ↦ Σ_k K_k ρ K_k†` on every mode of a density
/// matrix over the flattened mode space.
pub fn damping_channel(rho: &DMatrix<C64>, dims: &[usize], gamma: f64) -> Result<DMatrix<C64>> {
    check_gamma(gamma)?;
    let size: usize = dims.iter().product();
    if rho.nrows() != size || rho.ncols() != size {
        return Err(FockError::InvalidArgument(format!("density matrix must be {size} × {size}")));
    }
    let mut out = rho.clone();
    for (mode, &dim) in dims.iter().enumerate() {
        let inner: usize = dims[mode + 1..].iter().product();
        let outer: usize = dims[..mode].iter().product();
        let mut next = DMatrix::<C64>::zeros(size, size);
        for k in 0..dim {
            let small = kraus_matrix(dim, gamma, k);
            let mut full = DMatrix::<C64>::zeros(size, size);
            for o in 0..outer {
                for i in 0..inner {
                    for r in 0..dim {
                        for c in 0..dim {
                            let base = o * dim * inner + i;
                            full[(base + r * inner, base + c * inner)] = small[r * dim + c];
                        }
                    }
                }
            }
            next += &full * &out * full.adjoint();
        }
        out = next;
    }
    Ok(out)
}
