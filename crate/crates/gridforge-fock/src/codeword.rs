//! Finite-energy code words as envelope-weighted sums of coherent states,
//! finite-energy stabilizer and Pauli expectations, and nullifiers.

use gridforge::gauge::{nu, nu_pauli};
use gridforge::lattice::enumerate_points;
use gridforge::symplectic::omega;
use gridforge::{GkpLattice, LogicalFrame, Pauli};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{FockError, Result};
use crate::ops::{grid_unit, mode_alpha, Translation};
use crate::state::FockState;

/// Envelope weight below which translated vacua are dropped from a sum.
pub const TERM_CUTOFF: f64 = 1e-10;
/// Top-band population that makes `E_β⁻¹` untrustworthy.
pub const INVERSE_GUARD: f64 = 1e-2;

/// Envelope size `β = asinh(2ε)` used by the dissipation circuits.
pub fn beta_from_epsilon(epsilon: f64) -> f64 {
    (2.0 * epsilon).asinh()
}

/// Cutoff radius: `3·max|s_j|`, widened until dropped terms weigh less
/// than [`TERM_CUTOFF`]. `E_β T(v)|vac⟩` has norm `exp(−π|v|²(1 − e^{−2β})/2)`.
pub fn default_radius(lat: &GkpLattice, beta: f64) -> f64 {
    let smax = (0..lat.dim()).map(|j| lat.generator(j).norm()).fold(0.0, f64::max);
    let tail = (-2.0 * TERM_CUTOFF.ln() / (std::f64::consts::PI * (1.0 - (-2.0 * beta).exp()))).sqrt();
    (3.0 * smax).max(tail)
}

/// Which code word to build.
#[derive(Debug, Clone, PartialEq)]
pub struct CodewordSpec {
    /// `Pauli::I` projects the vacuum onto the code space (the only choice
    /// for qunaught lattices).
    pub pauli: Pauli,
    /// `+1` or `−1` eigenstate of `pauli`.
    pub positive: bool,
    pub beta: f64,
    pub radius: Option<f64>,
    pub dims: Vec<usize>,
}

impl CodewordSpec {
    pub fn new(pauli: Pauli, beta: f64, dims: &[usize]) -> Self {
        CodewordSpec { pauli, positive: true, beta, radius: None, dims: dims.to_vec() }
    }

    pub fn negative(mut self) -> Self {
        self.positive = false;
        self
    }
}

/// `e^{−|α|²/2} (α e^{−β})ⁿ/√n!`, the envelope applied to a coherent state.
fn damped_coherent(dim: usize, alpha: C64, beta: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let step = alpha * (-beta).exp();
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        out.push(c);
        c *= step / ((n + 1) as f64).sqrt();
    }
    out
}

/// Adds `w · E_β T(v)|vac⟩` to `amps`.
fn accumulate(amps: &mut [C64], dims: &[usize], v: &DVector<f64>, w: C64, beta: f64) {
    let factors: Vec<Vec<C64>> =
        dims.iter().enumerate().map(|(k, &n)| damped_coherent(n, mode_alpha(v, k), beta)).collect();
    let mut idx = vec![0usize; dims.len()];
    for a in amps.iter_mut() {
        let mut c = w;
        for (k, f) in factors.iter().enumerate() {
            c *= f[idx[k]];
        }
        *a += c;
        for k in (0..dims.len()).rev() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Coherent seed used when the chosen eigenstate has no vacuum component
/// (for instance the negative qunaught, supported on `n ≡ 1 mod 4`).
const FALLBACK_SEED: [f64; 8] = [0.113, 0.071, -0.052, 0.089, 0.061, -0.037, 0.029, 0.047];

/// `|ψ⟩ ∝ E_β Σ sign(v) T(v)|vac⟩` over the stabilizer coset of the chosen
/// eigenstate, with `ν_μ` signs on `Λ` and `ν^P` signs on `p0 + Λ`.
///
/// If the vacuum projects to zero the seed `T(c)|vac⟩` is used instead,
/// which only changes the (irrelevant) weights of the coset sum.
pub fn build_codeword(lat: &GkpLattice, frame: &LogicalFrame, spec: &CodewordSpec) -> Result<FockState> {
    if !(spec.beta > 0.0) {
        return Err(FockError::InvalidArgument("β must be positive".into()));
    }
    if spec.dims.len() != lat.m {
        return Err(FockError::InvalidArgument(format!("{} truncations for a {}-mode code", spec.dims.len(), lat.m)));
    }
    let smax = (0..lat.dim()).map(|j| lat.generator(j).norm()).fold(0.0, f64::max);
    let radius = spec.radius.unwrap_or_else(|| default_radius(lat, spec.beta));
    if radius < 2.0 * smax {
        return Err(FockError::InvalidArgument(format!("radius {radius} is below 2·max|s_j| = {}", 2.0 * smax)));
    }
    let zero = DVector::zeros(lat.dim());
    let seed = DVector::from_iterator(lat.dim(), FALLBACK_SEED.iter().cycle().copied().take(lat.dim()));
    let mut state = seeded_sum(lat, frame, spec, radius, &zero)?;
    if state.norm() < 1e-6 {
        state = seeded_sum(lat, frame, spec, radius, &seed)?;
    }
    let norm = state.norm();
    if norm < 1e-8 {
        return Err(FockError::Construction(format!("code word norm {norm:.2e}: signs interfere destructively")));
    }
    state.normalize()?;
    state.guard(1.0)?;
    Ok(state)
}

/// `E_β Σ sign(v) T(v) T(c)|vac⟩`, using `T(v)T(c) = e^{iπ cᵀΩv} T(v + c)`.
fn seeded_sum(
    lat: &GkpLattice,
    frame: &LogicalFrame,
    spec: &CodewordSpec,
    radius: f64,
    c: &DVector<f64>,
) -> Result<FockState> {
    let om = omega(lat.m);
    let oc = om.transpose() * c;
    let mut state = FockState::vacuum(&spec.dims)?;
    state.amps.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
    let add = |v: &DVector<f64>, sign: f64, amps: &mut [C64]| {
        let w = C64::from_polar(sign, std::f64::consts::PI * oc.dot(v));
        accumulate(amps, &spec.dims, &(v + c), w, spec.beta);
    };
    let reach = radius + c.norm();
    for v in enumerate_points(lat, reach, false)? {
        if (&v + c).norm() <= radius {
            add(&v, nu(lat, &frame.gauge.mu, &v)? as f64, &mut state.amps);
        }
    }
    if spec.pauli != Pauli::I {
        let p0 = frame.rep(spec.pauli);
        let flip = if spec.positive { 1.0 } else { -1.0 };
        for lam in enumerate_points(lat, reach + p0.norm(), false)? {
            let p = &p0 + lam;
            if (&p + c).norm() > radius {
                continue;
            }
            add(&p, flip * nu_pauli(lat, frame, spec.pauli, &p)? as f64, &mut state.amps);
        }
    }
    Ok(state)
}

/// `⟨ψ| E_β T(v) E_β⁻¹ |ψ⟩`, with the top tenth of every mode projected out
/// before `E_β⁻¹`.
pub fn expectation_t(state: &FockState, v: &DVector<f64>, beta: f64) -> Result<C64> {
    let t = Translation::new(&state.dims, v)?;
    expectation_with(state, &t, beta)
}

/// [`expectation_t`] with a prebuilt translation.
pub fn expectation_with(state: &FockState, t: &Translation, beta: f64) -> Result<C64> {
    let leak = state.leakage();
    if leak > INVERSE_GUARD {
        return Err(FockError::Truncation { leak });
    }
    let n = state.mode_size();
    let bands: Vec<usize> = state.dims.iter().map(|&d| d - (d / 10).max(1)).collect();
    let mut inv = state.clone();
    let mut bra = state.clone();
    for (idx, (a, b)) in inv.amps.iter_mut().zip(bra.amps.iter_mut()).enumerate() {
        let occ = state.occupations(idx % n);
        let total: usize = occ.iter().sum();
        if occ.iter().zip(&bands).any(|(o, top)| o >= top) {
            *a = C64::new(0.0, 0.0);
        } else {
            *a *= (beta * total as f64).exp();
        }
        *b *= (-beta * total as f64).exp();
    }
    t.apply(&mut inv);
    Ok(bra.inner(&inv) / state.norm().powi(2))
}

/// `(−1)^{μ_j} Re⟨T_{j,β}⟩` for every generator; all near 1 in the code space.
pub fn stabilizer_expectations(state: &FockState, lat: &GkpLattice, mu: &[u8], beta: f64) -> Result<Vec<f64>> {
    (0..lat.dim())
        .map(|j| {
            let sign = if mu[j].is_multiple_of(2) { 1.0 } else { -1.0 };
            Ok(sign * expectation_t(state, &lat.generator(j), beta)?.re)
        })
        .collect()
}

/// Finite-energy logical expectation `(−1)^{υ_P} Re⟨T_β(p0)⟩`.
pub fn logical_expectation(state: &FockState, frame: &LogicalFrame, pauli: Pauli, beta: f64) -> Result<f64> {
    let row = pauli
        .row()
        .ok_or_else(|| FockError::InvalidArgument("identity has no logical expectation".into()))?;
    let sign = if frame.gauge.upsilon[row].is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * expectation_t(state, &frame.rep(pauli), beta)?.re)
}

/// Dense Hermitian matrix of `uᵀx̂` on the truncated mode space.
fn dense_quadrature(dims: &[usize], u: &DVector<f64>) -> DMatrix<C64> {
    let size: usize = dims.iter().product();
    let mut out = DMatrix::<C64>::zeros(size, size);
    let mut probe = FockState { dims: dims.to_vec(), amps: vec![C64::new(0.0, 0.0); size], ancilla: false, max_leak: 0.0 };
    for col in 0..size {
        probe.amps.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        probe.amps[col] = C64::new(1.0, 0.0);
        for (c, &w) in u.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let x = probe.quadrature(c);
            for (r, a) in x.amps.iter().enumerate() {
                out[(r, col)] += a * w;
            }
        }
    }
    out
}

/// `‖d̂_j ψ‖` for the finite-energy nullifier
/// `d̂_j = [sᵀΩx̂ mod l/coshβ]/√(2|s|tanhβ) − i√(tanhβ/(2|s|)) sᵀx̂`.
pub fn nullifier_residual(state: &FockState, s: &DVector<f64>, beta: f64) -> Result<f64> {
    if state.ancilla {
        return Err(FockError::InvalidArgument("nullifiers act on mode-only states".into()));
    }
    let om = omega(state.modes());
    let u = om.transpose() * s;
    let len = s.norm();
    let period = grid_unit() / beta.cosh();
    let eig = SymmetricEigen::new(dense_quadrature(&state.dims, &u));
    let psi = DVector::from_column_slice(&state.amps);
    let coeffs = eig.eigenvectors.adjoint() * &psi;
    let wrapped = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &x)| c * (x - period * (x / period).round())),
    );
    let modular = &eig.eigenvectors * wrapped;
    let tb = beta.tanh();
    let mut linear = vec![C64::new(0.0, 0.0); psi.len()];
    for (c, &w) in s.iter().enumerate() {
        if w != 0.0 {
            for (o, a) in linear.iter_mut().zip(&state.quadrature(c).amps) {
                *o += a * w;
            }
        }
    }
    let a = 1.0 / (2.0 * len * tb).sqrt();
    let b = C64::new(0.0, -(tb / (2.0 * len)).sqrt());
    let res: f64 = modular.iter().zip(&linear).map(|(m, l)| (m * a + l * b).norm_sqr()).sum();
    Ok(res.sqrt() / state.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gridforge::catalog;
    use gridforge::gauge::GaugeState;

    fn support_mod4(s: &FockState, residue: usize) -> f64 {
        s.number_distribution().iter().enumerate().filter(|(n, _)| n % 4 == residue).map(|(_, p)| p).sum()
    }

    #[test]
    fn qunaught_supports_mod_four() {
        let (lat, mut frame) = catalog("qunaught").unwrap();
        let plus = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::I, 0.2, &[50])).unwrap();
        assert!(support_mod4(&plus, 0) > 0.999);
        frame.gauge = GaugeState::with_mu(vec![1, 1]);
        let minus = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::I, 0.2, &[50])).unwrap();
        assert!(support_mod4(&minus, 1) > 0.999);
    }

    #[test]
    fn square_hadamard_eigenstates_split_by_fock_parity() {
        // |±H⟩ ∝ |+Z⟩ ± |+X⟩ up to normalization of the overlap.
        let (lat, frame) = catalog("square").unwrap();
        let z = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::Z, 0.2, &[50])).unwrap();
        let x = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::X, 0.2, &[50])).unwrap();
        let combine = |sign: f64| {
            let amps = z.amps.iter().zip(&x.amps).map(|(a, b)| a + b * sign).collect();
            FockState::from_amps(&[50], amps).unwrap()
        };
        assert!(support_mod4(&combine(1.0), 0) > 0.999);
        assert!(support_mod4(&combine(-1.0), 2) > 0.999);
    }

    #[test]
    fn large_envelope_approaches_vacuum() {
        let (lat, frame) = catalog("square").unwrap();
        let s = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::Z, 2.0, &[30])).unwrap();
        assert!(s.fidelity(&FockState::vacuum(&[30]).unwrap()) > 0.99);
    }

    #[test]
    fn code_words_are_stabilized() {
        for (name, dims) in [("square", vec![40]), ("hexagonal", vec![40]), ("tesseract", vec![30, 30])] {
            let (lat, frame) = catalog(name).unwrap();
            let s = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::Z, 0.2, &dims)).unwrap();
            for (j, t) in stabilizer_expectations(&s, &lat, &frame.gauge.mu, 0.2).unwrap().iter().enumerate() {
                assert!(*t >= 0.99, "{name} s{}: {t}", j + 1);
            }
        }
    }

    #[test]
    fn pauli_eigenstates_have_unit_expectation() {
        let (lat, frame) = catalog("square").unwrap();
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let s = build_codeword(&lat, &frame, &CodewordSpec::new(p, 0.2, &[50])).unwrap();
            assert!(logical_expectation(&s, &frame, p, 0.2).unwrap() > 0.95, "{p}");
            let m = build_codeword(&lat, &frame, &CodewordSpec::new(p, 0.2, &[50]).negative()).unwrap();
            assert!(logical_expectation(&m, &frame, p, 0.2).unwrap() < -0.95, "-{p}");
        }
    }

    #[test]
    fn vacuum_overlap_with_square_stabilizer() {
        let (lat, _) = catalog("square").unwrap();
        let vac = FockState::vacuum(&[60]).unwrap();
        let t = expectation_t(&vac, &lat.generator(0), 0.0).unwrap();
        assert!((t.re - (-std::f64::consts::PI).exp()).abs() < 1e-9, "{t}");
    }

    #[test]
    fn code_word_nullifiers_are_small() {
        let (lat, frame) = catalog("square").unwrap();
        let s = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::Z, 0.1, &[60])).unwrap();
        for j in 0..2 {
            let r = nullifier_residual(&s, &lat.generator(j), 0.1).unwrap();
            assert!(r <= 0.1, "s{}: {r}", j + 1);
        }
    }

    #[test]
    fn signs_match_translation_eigenvalues() {
        let (lat, frame) = catalog("qunaught").unwrap();
        let beta = 0.2;
        let s = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::I, beta, &[50])).unwrap();
        for c in [[1i64, 0], [0, 1], [1, 1], [1, -1], [2, 1], [-1, 2], [2, 0], [-2, -1], [1, 2], [3, 0]] {
            let v = lat.point(&c);
            let t = expectation_t(&s, &v, beta).unwrap();
            assert_eq!(t.re.signum() as i8, nu(&lat, &frame.gauge.mu, &v).unwrap(), "{c:?}: {t}");
        }
    }

    #[test]
    fn wrong_radius_is_rejected() {
        let (lat, frame) = catalog("square").unwrap();
        let mut spec = CodewordSpec::new(Pauli::Z, 0.2, &[20]);
        spec.radius = Some(1.0);
        assert!(build_codeword(&lat, &frame, &spec).is_err());
    }
}
