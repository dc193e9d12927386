//! Operators on truncated Fock space: displacements and translations,
//! quadratic (Gaussian) gates, Kerr-type phases and the envelope.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::{Arc, Mutex, OnceLock};

use gridforge::symplectic::{gate_matrix, omega, Gate};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{FockError, Result};
use crate::state::FockState;

/// Length of a unit translation, `√(2π)`.
pub fn grid_unit() -> f64 {
    (2.0 * PI).sqrt()
}

/// Complex amplitude of `T(v)` on mode `k`: `l (v_q + i v_p)/√2`.
pub fn mode_alpha(v: &DVector<f64>, k: usize) -> C64 {
    C64::new(v[2 * k], v[2 * k + 1]) * (grid_unit() * FRAC_1_SQRT_2)
}

/// Eigenvectors and eigenvalues of the truncated position operator.
struct QuadratureBasis {
    vecs: DMatrix<f64>,
    vals: Vec<f64>,
}

fn quadrature_basis(dim: usize) -> Arc<QuadratureBasis> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(dim)
        .or_insert_with(|| {
            let q = DMatrix::from_fn(dim, dim, |i, j| {
                if i + 1 == j || j + 1 == i {
                    (i.max(j) as f64).sqrt() * FRAC_1_SQRT_2
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(q);
            Arc::new(QuadratureBasis { vecs: eig.eigenvectors, vals: eig.eigenvalues.iter().copied().collect() })
        })
        .clone()
}

/// `D(α) = exp(α â† − α* â)` exponentiated inside the truncated space, so it
/// is exactly unitary. Row-major.
///
/// Uses `D(re^{iφ}) = e^{iφn̂} e^{−i√2 r p̂} e^{−iφn̂}` and `p̂ = Φ q̂ Φ†` with
/// `Φ = diag(iⁿ)`.
pub fn displacement_matrix(dim: usize, alpha: C64) -> Vec<C64> {
    let basis = quadrature_basis(dim);
    let (r, phi) = alpha.to_polar();
    let w: Vec<C64> = (0..dim).map(|n| C64::from_polar(1.0, (phi + PI / 2.0) * n as f64)).collect();
    let phases: Vec<C64> = basis.vals.iter().map(|&x| C64::from_polar(1.0, -SQRT_2 * r * x)).collect();
    let v = &basis.vecs;
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for m in 0..dim {
        for n in 0..=m {
            let mut acc = C64::new(0.0, 0.0);
            for (k, ph) in phases.iter().enumerate() {
                acc += ph * (v[(m, k)] * v[(n, k)]);
            }
            out[m * dim + n] = w[m] * w[n].conj() * acc;
            if m != n {
                // e^{−i√2 r q̂} is symmetric.
                out[n * dim + m] = w[n] * w[m].conj() * acc;
            }
        }
    }
    out
}

/// Per-mode displacement matrices realizing `T(v)` at fixed truncation.
#[derive(Debug, Clone)]
pub struct Translation {
    pub v: DVector<f64>,
    mats: Vec<Option<Vec<C64>>>,
}

impl Translation {
    pub fn new(dims: &[usize], v: &DVector<f64>) -> Result<Self> {
        if v.len() != 2 * dims.len() {
            return Err(FockError::InvalidArgument(format!(
                "translation has {} entries for {} modes",
                v.len(),
                dims.len()
            )));
        }
        let mats = dims
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let a = mode_alpha(v, k);
                (a.norm() > 1e-14).then(|| displacement_matrix(n, a))
            })
            .collect();
        Ok(Translation { v: v.clone(), mats })
    }

    pub fn apply(&self, state: &mut FockState) {
        self.apply_on(state, None);
    }

    pub fn apply_on(&self, state: &mut FockState, branch: Option<usize>) {
        for (k, m) in self.mats.iter().enumerate() {
            if let Some(m) = m {
                state.apply_mode_matrix_on(k, m, branch);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Displacement { mode: usize, alpha: C64 },
    Translation { v: DVector<f64> },
    /// `e^{iθ n̂}`, the phase-space rotation `R(θ)`.
    Rotation { mode: usize, theta: f64 },
    /// 50:50 beamsplitter.
    Beamsplitter { j: usize, k: usize },
    /// `p → p + c q`.
    Shear { mode: usize, c: f64 },
    /// `q_k → q_k + λ q_j`.
    Sum { j: usize, k: usize, weight: f64 },
    /// `e^{iθ n̂²}`.
    Kerr { mode: usize, theta: f64 },
    /// `e^{iθ n̂_j n̂_k}`.
    CrossKerr { j: usize, k: usize, theta: f64 },
    /// `e^{−β n̂}` followed by renormalization.
    Envelope { beta: f64 },
    /// `Q(M)` with `Q(M)† x̂ Q(M) = M x̂`.
    GeneralGaussian { m: DMatrix<f64> },
}

impl OperatorSpec {
    pub fn is_unitary(&self) -> bool {
        !matches!(self, OperatorSpec::Envelope { .. })
    }

    fn symplectic(&self, modes: usize) -> Result<Option<DMatrix<f64>>> {
        let gate = match *self {
            OperatorSpec::Beamsplitter { j, k } => Gate::Beamsplitter { j, k },
            OperatorSpec::Shear { mode, c } => Gate::Shear { mode, c },
            OperatorSpec::Sum { j, k, weight } => Gate::Sum { j, k, weight },
            OperatorSpec::GeneralGaussian { ref m } => return Ok(Some(m.clone())),
            _ => return Ok(None),
        };
        Ok(Some(gate_matrix(modes, gate)?.entries))
    }
}

fn check_mode(state: &FockState, k: usize) -> Result<()> {
    if k >= state.modes() {
        return Err(FockError::InvalidArgument(format!("mode {k} out of range for {} modes", state.modes())));
    }
    Ok(())
}

pub fn apply(state: &FockState, spec: &OperatorSpec) -> Result<FockState> {
    let mut out = state.clone();
    apply_in_place(&mut out, spec)?;
    Ok(out)
}

pub fn apply_in_place(state: &mut FockState, spec: &OperatorSpec) -> Result<()> {
    match spec {
        OperatorSpec::Displacement { mode, alpha } => {
            check_mode(state, *mode)?;
            let d = displacement_matrix(state.dims[*mode], *alpha);
            state.apply_mode_matrix(*mode, &d);
        }
        OperatorSpec::Translation { v } => Translation::new(&state.dims, v)?.apply(state),
        OperatorSpec::Rotation { mode, theta } => {
            check_mode(state, *mode)?;
            let (k, t) = (*mode, *theta);
            state.apply_diagonal(|n| C64::from_polar(1.0, t * n[k] as f64));
        }
        OperatorSpec::Kerr { mode, theta } => {
            check_mode(state, *mode)?;
            let (k, t) = (*mode, *theta);
            state.apply_diagonal(|n| C64::from_polar(1.0, t * (n[k] * n[k]) as f64));
        }
        OperatorSpec::CrossKerr { j, k, theta } => {
            check_mode(state, *j)?;
            check_mode(state, *k)?;
            let (a, b, t) = (*j, *k, *theta);
            state.apply_diagonal(|n| C64::from_polar(1.0, t * (n[a] * n[b]) as f64));
        }
        OperatorSpec::Envelope { beta } => {
            let b = *beta;
            state.apply_diagonal(|n| C64::new((-b * n.iter().sum::<usize>() as f64).exp(), 0.0));
            state.normalize()?;
        }
        _ => {
            let m = spec.symplectic(state.modes())?.expect("gaussian kinds carry a matrix");
            apply_gaussian(state, &m)?;
        }
    }
    Ok(())
}

/// Applies `Q(M) = exp(−(i/2) x̂ᵀJx̂)` with `J = −Ω log M`.
pub fn apply_gaussian(state: &mut FockState, m: &DMatrix<f64>) -> Result<()> {
    let n = 2 * state.modes();
    if m.nrows() != n || m.ncols() != n {
        return Err(FockError::InvalidArgument(format!("expected a {n}x{n} symplectic matrix")));
    }
    let om = omega(state.modes());
    if (m * &om * m.transpose() - &om).abs().max() > 1e-9 {
        return Err(FockError::InvalidArgument("matrix is not symplectic".into()));
    }
    let j = -(&om * real_log(m)?);
    let j = (&j + j.transpose()) * 0.5;
    exp_quadratic(state, &j);
    Ok(())
}

/// `½ Σ J_cd x̂_c x̂_d ψ`.
fn quadratic_action(state: &FockState, j: &DMatrix<f64>) -> Vec<C64> {
    let n = j.nrows();
    let mut out = vec![C64::new(0.0, 0.0); state.amps.len()];
    for d in 0..n {
        if (0..n).all(|c| j[(c, d)] == 0.0) {
            continue;
        }
        let xd = state.quadrature(d);
        for c in 0..n {
            let w = j[(c, d)];
            if w == 0.0 {
                continue;
            }
            let xcd = xd.quadrature(c);
            for (o, a) in out.iter_mut().zip(&xcd.amps) {
                *o += a * (0.5 * w);
            }
        }
    }
    out
}

/// `exp(−i H)` for `H = ½ x̂ᵀJx̂` by split Taylor steps.
fn exp_quadratic(state: &mut FockState, j: &DMatrix<f64>) {
    let nmax = *state.dims.iter().max().expect("at least one mode") as f64;
    let bound = j.iter().map(|x| x.abs()).sum::<f64>() * nmax;
    let steps = (bound / 0.5).ceil().max(1.0) as usize;
    let js = j / steps as f64;
    for _ in 0..steps {
        let mut term = state.clone();
        let mut acc = state.amps.clone();
        for k in 1..80 {
            let h = quadratic_action(&term, &js);
            let scale = C64::new(0.0, -1.0 / k as f64);
            term.amps = h.into_iter().map(|x| x * scale).collect();
            let mut size = 0.0;
            for (a, t) in acc.iter_mut().zip(&term.amps) {
                *a += t;
                size += t.norm_sqr();
            }
            if size.sqrt() < 1e-17 {
                break;
            }
        }
        state.amps = acc;
    }
}

/// Principal real logarithm by inverse scaling and squaring; rejects
/// matrices with eigenvalues on the closed negative real axis.
pub fn real_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    for ev in m.clone().complex_eigenvalues().iter() {
        if ev.re <= 1e-12 && ev.im.abs() <= 1e-9 {
            return Err(FockError::UnsupportedGaussian(format!("eigenvalue {ev} has no principal logarithm")));
        }
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut x = m.clone();
    let mut k = 0;
    while (&x - &id).norm() > 0.25 {
        x = sqrt_db(&x)?;
        k += 1;
        if k > 60 {
            return Err(FockError::UnsupportedGaussian("square-root iteration did not settle".into()));
        }
    }
    let e = &x - &id;
    let mut log = DMatrix::<f64>::zeros(n, n);
    let mut pow = e.clone();
    for i in 1..200 {
        let term = &pow / i as f64;
        if i % 2 == 1 {
            log += &term;
        } else {
            log -= &term;
        }
        if term.norm() < 1e-18 {
            break;
        }
        pow = &pow * &e;
    }
    Ok(log * 2f64.powi(k))
}

/// Denman–Beavers square root.
fn sqrt_db(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse();
        let zi = z.clone().try_inverse();
        let (Some(yi), Some(zi)) = (yi, zi) else {
            return Err(FockError::UnsupportedGaussian("singular iterate in matrix square root".into()));
        };
        let y_next = (&y + zi) * 0.5;
        let z_next = (&z + yi) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-15 * y.norm().max(1.0) {
            return Ok(y);
        }
    }
    Err(FockError::UnsupportedGaussian("matrix square root did not converge".into()))
}

/// Dense matrix of `spec` on the mode space (no ancilla), column by column.
pub fn operator_matrix(dims: &[usize], spec: &OperatorSpec) -> Result<DMatrix<C64>> {
    let size: usize = dims.iter().product();
    let mut out = DMatrix::<C64>::zeros(size, size);
    for col in 0..size {
        let mut amps = vec![C64::new(0.0, 0.0); size];
        amps[col] = C64::new(1.0, 0.0);
        let mut s = FockState { dims: dims.to_vec(), amps, ancilla: false, max_leak: 0.0 };
        match spec {
            OperatorSpec::Envelope { beta } => {
                let b = *beta;
                s.apply_diagonal(|n| C64::new((-b * n.iter().sum::<usize>() as f64).exp(), 0.0));
            }
            _ => apply_in_place(&mut s, spec)?,
        }
        for (r, a) in s.amps.iter().enumerate() {
            out[(r, col)] = *a;
        }
    }
    Ok(out)
}

/// `‖U†U − I‖_max` restricted to basis states whose every occupation lies in
/// the lower `fraction` of its mode.
pub fn interior_unitarity_defect(dims: &[usize], u: &DMatrix<C64>, fraction: f64) -> f64 {
    let size: usize = dims.iter().product();
    let probe = FockState { dims: dims.to_vec(), amps: vec![C64::new(0.0, 0.0); size], ancilla: false, max_leak: 0.0 };
    let inside: Vec<usize> = (0..size)
        .filter(|&i| probe.occupations(i).iter().zip(dims).all(|(&n, &d)| (n as f64) < fraction * d as f64))
        .collect();
    let g = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for &a in &inside {
        for &b in &inside {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g[(a, b)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coherent(dim: usize, alpha: C64) -> Vec<C64> {
        let mut out = Vec::with_capacity(dim);
        let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..dim {
            out.push(c);
            c *= alpha / ((n + 1) as f64).sqrt();
        }
        out
    }

    fn random_state(dims: &[usize], cutoff: usize, seed: u64) -> FockState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = FockState::vacuum(dims).unwrap();
        let n = s.mode_size();
        for i in 0..n {
            let occ = s.occupations(i);
            s.amps[i] = if occ.iter().all(|&x| x < cutoff) {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            } else {
                C64::new(0.0, 0.0)
            };
        }
        s.normalize().unwrap();
        s
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let a = C64::new(1.1, -0.7);
        let d = displacement_matrix(60, a);
        let want = coherent(60, a);
        for n in 0..40 {
            assert!((d[n * 60] - want[n]).norm() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn displacement_is_unitary_and_inverts() {
        let a = C64::new(0.8, 1.3);
        let dim = 40;
        let d = DMatrix::from_row_slice(dim, dim, &displacement_matrix(dim, a));
        let di = DMatrix::from_row_slice(dim, dim, &displacement_matrix(dim, -a));
        assert!((d.adjoint() * &d - DMatrix::identity(dim, dim)).norm() < 1e-10);
        assert!((di - d.adjoint()).norm() < 1e-10);
    }

    #[test]
    fn full_rotation_is_identity() {
        let s = random_state(&[30], 20, 1);
        let r = apply(&s, &OperatorSpec::Rotation { mode: 0, theta: 2.0 * PI }).unwrap();
        assert!((s.fidelity(&r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translations_commute_up_to_symplectic_phase() {
        let dims = [45, 45];
        let s = random_state(&dims, 6, 2);
        let u = DVector::from_vec(vec![0.3, -0.2, 0.1, 0.25]);
        let v = DVector::from_vec(vec![-0.15, 0.35, 0.2, -0.1]);
        let tu = Translation::new(&dims, &u).unwrap();
        let tv = Translation::new(&dims, &v).unwrap();
        let mut uv = s.clone();
        tv.apply(&mut uv);
        tu.apply(&mut uv);
        let mut vu = s.clone();
        tu.apply(&mut vu);
        tv.apply(&mut vu);
        let ratio = vu.inner(&uv);
        let phase = 2.0 * PI * v.dot(&(omega(2) * &u));
        assert!((ratio - C64::from_polar(1.0, phase)).norm() < 1e-8, "{ratio}");
    }

    #[test]
    fn translation_moves_quadratures_by_grid_unit() {
        let dims = [60];
        let v = DVector::from_vec(vec![0.4, -0.3]);
        let s = apply(&FockState::vacuum(&dims).unwrap(), &OperatorSpec::Translation { v: v.clone() }).unwrap();
        let x = s.expect_quadratures();
        assert!((x[0] - grid_unit() * 0.4).abs() < 1e-9);
        assert!((x[1] + grid_unit() * 0.3).abs() < 1e-9);
    }

    #[test]
    fn gaussian_heisenberg_action() {
        let dims = [40, 40];
        let vac = FockState::vacuum(&dims).unwrap();
        let v = DVector::from_vec(vec![0.2, -0.15, -0.1, 0.2]);
        let s = apply(&vac, &OperatorSpec::Translation { v }).unwrap();
        let x = DVector::from_vec(s.expect_quadratures());
        let specs = [
            OperatorSpec::Rotation { mode: 1, theta: 0.7 },
            OperatorSpec::Beamsplitter { j: 0, k: 1 },
            OperatorSpec::Shear { mode: 0, c: 0.5 },
        ];
        for spec in specs {
            let m = match &spec {
                OperatorSpec::Rotation { mode, theta } => {
                    gate_matrix(2, Gate::Rotation { mode: *mode, theta: *theta }).unwrap().entries
                }
                other => other.symplectic(2).unwrap().unwrap(),
            };
            let y = DVector::from_vec(apply(&s, &spec).unwrap().expect_quadratures());
            // `Q† x̂ Q = M x̂` means the state's means move by `M`.
            let want = &m * &x;
            assert!((y - want).abs().max() < 1e-3, "{spec:?}");
        }
    }

    #[test]
    fn rotation_matches_gaussian_rotation() {
        let s = random_state(&[30], 12, 3);
        let m = gate_matrix(1, Gate::Rotation { mode: 0, theta: 0.9 }).unwrap().entries;
        let a = apply(&s, &OperatorSpec::Rotation { mode: 0, theta: 0.9 }).unwrap();
        let b = apply(&s, &OperatorSpec::GeneralGaussian { m }).unwrap();
        assert!(a.fidelity(&b) > 1.0 - 1e-10);
    }

    #[test]
    fn unitary_kinds_are_unitary_inside() {
        let dims = [12, 12];
        let specs = [
            OperatorSpec::Displacement { mode: 1, alpha: C64::new(0.2, 0.1) },
            OperatorSpec::Rotation { mode: 0, theta: 0.4 },
            OperatorSpec::Beamsplitter { j: 0, k: 1 },
            OperatorSpec::Shear { mode: 1, c: 0.3 },
            OperatorSpec::Sum { j: 0, k: 1, weight: 0.2 },
            OperatorSpec::Kerr { mode: 0, theta: 0.3 },
            OperatorSpec::CrossKerr { j: 0, k: 1, theta: 0.2 },
        ];
        for spec in specs {
            let u = operator_matrix(&dims, &spec).unwrap();
            assert!(interior_unitarity_defect(&dims, &u, 0.8) < 1e-8, "{spec:?}");
        }
    }

    #[test]
    fn norm_is_preserved_by_unitary_steps() {
        let s = random_state(&[25, 25], 10, 4);
        for spec in [
            OperatorSpec::Beamsplitter { j: 0, k: 1 },
            OperatorSpec::Displacement { mode: 0, alpha: C64::new(0.7, 0.0) },
            OperatorSpec::Kerr { mode: 1, theta: 1.1 },
        ] {
            let t = apply(&s, &spec).unwrap();
            assert!((t.norm() - 1.0).abs() < 1e-6, "{spec:?}");
        }
    }

    #[test]
    fn envelope_preserving_gates_commute_with_envelope() {
        let dims = [20, 20];
        let s = random_state(&dims, 14, 5);
        let env = |x: &FockState| {
            let mut y = x.clone();
            y.apply_diagonal(|n| C64::new((-0.2 * n.iter().sum::<usize>() as f64).exp(), 0.0));
            y
        };
        for spec in [
            OperatorSpec::Rotation { mode: 1, theta: 0.6 },
            OperatorSpec::Beamsplitter { j: 0, k: 1 },
            OperatorSpec::Kerr { mode: 0, theta: 0.3 },
            OperatorSpec::CrossKerr { j: 0, k: 1, theta: 0.7 },
        ] {
            let a = apply(&env(&s), &spec).unwrap();
            let b = env(&apply(&s, &spec).unwrap());
            let diff: f64 = a.amps.iter().zip(&b.amps).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            assert!(diff < 1e-8, "{spec:?}: {diff}");
        }
    }

    #[test]
    fn log_rejects_negative_eigenvalues() {
        let m = gate_matrix(1, Gate::Rotation { mode: 0, theta: PI }).unwrap().entries;
        assert!(matches!(real_log(&m), Err(FockError::UnsupportedGaussian(_))));
        let s = gate_matrix(1, Gate::Shear { mode: 0, c: 0.8 }).unwrap().entries;
        let l = real_log(&s).unwrap();
        assert!((l[(1, 0)] - 0.8).abs() < 1e-12 && l[(0, 0)].abs() < 1e-12);
        let b = gate_matrix(2, Gate::Beamsplitter { j: 0, k: 1 }).unwrap().entries;
        assert!((real_log(&b).unwrap().exp() - b).norm() < 1e-10);
    }
}
