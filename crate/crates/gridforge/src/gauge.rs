//! Sign calculus on `Λ±` and `P±`: ν-functions, gauge validity and the
//! gauge updates after translations, Gaussian maps and basis changes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::lattice::{int_vec, pauli_class, GkpLattice, LogicalFrame, Pauli};
use crate::symplectic::{int_det, omega, round_integral, to_f64, IntMatrix, SympMatrix};

/// Stabilizer gauge `μ ∈ Z2^{2m}` and Pauli frame `υ ∈ Z2^3` (x, y, z).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaugeState {
    pub mu: Vec<u8>,
    pub upsilon: [u8; 3],
}

impl GaugeState {
    pub fn trivial(m: usize) -> Self {
        Self { mu: vec![0; 2 * m], upsilon: [0; 3] }
    }

    pub fn with_mu(mu: Vec<u8>) -> Self {
        Self { mu, upsilon: [0; 3] }
    }
}

fn bit(x: i64) -> u8 {
    x.rem_euclid(2) as u8
}

fn mu_vec(mu: &[u8]) -> Vec<i64> {
    mu.iter().map(|&b| b as i64).collect()
}

/// `ν_μ(λ) = exp{iπ aᵀ[A▽a + μ]}` with `λ = Sᵀa`.
pub fn nu(lat: &GkpLattice, mu: &[u8], lambda: &DVector<f64>) -> Result<i8> {
    let a = lat
        .int_coords(lambda)
        .ok_or_else(|| GridError::InvalidArgument("vector is not a lattice point".into()))?;
    Ok(nu_coords(&lat.a, mu, &a))
}

/// ν evaluated on integer coordinates.
pub fn nu_coords(gram: &IntMatrix, mu: &[u8], a: &[i64]) -> i8 {
    let n = a.len();
    let mut parity = 0i64;
    for i in 0..n {
        for j in 0..i {
            parity += gram[(i, j)].rem_euclid(2) * (a[i] * a[j]).rem_euclid(2);
        }
        parity += mu[i] as i64 * a[i].rem_euclid(2);
    }
    if parity % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign of `T(p)` on the `+1` eigenstate of logical `P`, for `p ∈ p0 + Λ`.
pub fn nu_pauli(lat: &GkpLattice, frame: &LogicalFrame, pauli: Pauli, p: &DVector<f64>) -> Result<i8> {
    let row = pauli
        .row()
        .ok_or_else(|| GridError::InvalidArgument("identity has no Pauli sign".into()))?;
    let p0 = frame.rep(pauli);
    let diff = p - &p0;
    let sign = nu(lat, &frame.gauge.mu, &diff)
        .map_err(|_| GridError::InvalidArgument(format!("vector is not in the {pauli} class")))?;
    let w = p0.dot(&(omega(lat.m) * p));
    let w = w.round();
    let parity = (w as i64 + frame.gauge.upsilon[row] as i64).rem_euclid(2);
    Ok(if parity == 0 { sign } else { -sign })
}

/// Integer adjugate via cofactors.
fn adjugate(a: &IntMatrix) -> IntMatrix {
    let n = a.nrows();
    let mut adj = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor = a.clone().remove_row(i).remove_column(j);
            let c = int_det(&minor) as i64;
            adj[(j, i)] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    adj
}

/// `2A⁻¹μ mod 2 = 0`, evaluated exactly.
pub fn validate_gauge(lat: &GkpLattice, mu: &[u8]) -> bool {
    let det = int_det(&lat.a) as i64;
    let adj = adjugate(&lat.a);
    let v = adj * IntMatrix::from_column_slice(mu.len(), 1, &mu_vec(mu));
    v.iter().all(|x| x.rem_euclid(det) == 0)
}

/// Gauge after the half translation `T(τ/2)`; requires `τ ∈ Λ*` with
/// integral `L0Ωτ` (always true for `τ ∈ Λ`).
pub fn update_after_translation(lat: &GkpLattice, frame: &LogicalFrame, tau: &DVector<f64>) -> Result<GaugeState> {
    let om = omega(lat.m);
    let smu = int_vec(&(&lat.s * &om * tau))
        .ok_or_else(|| GridError::InvalidArgument("translation is not in the dual lattice".into()))?;
    let lu = int_vec(&(&frame.l0 * &om * tau))
        .ok_or_else(|| GridError::InvalidArgument("translation makes Pauli eigenvalues complex".into()))?;
    let mu = frame.gauge.mu.iter().zip(&smu).map(|(&m, &x)| bit(m as i64 + x)).collect();
    let mut upsilon = frame.gauge.upsilon;
    for (u, x) in upsilon.iter_mut().zip(&lu) {
        *u = bit(*u as i64 + x);
    }
    Ok(GaugeState { mu, upsilon })
}

/// `τ = −ΩS⁻¹[(μ_target + μ) mod 2]`; applying `T(τ/2)` sets the gauge to `μ_target`.
pub fn gauge_setting_translation(lat: &GkpLattice, mu: &[u8], mu_target: &[u8]) -> DVector<f64> {
    let c = DVector::from_iterator(mu.len(), mu.iter().zip(mu_target).map(|(&a, &b)| ((a ^ b) & 1) as f64));
    -(omega(lat.m) * lat.s_inv() * c)
}

/// Integer matrix `N` with `Nᵀ = S Mᵀ S⁻¹`, if `M` is a lattice symmetry.
pub fn symmetry_coords(lat: &GkpLattice, m: &SympMatrix) -> Result<IntMatrix> {
    let nt = &lat.s * m.entries.transpose() * lat.s_inv();
    let nt = round_integral(&nt, 1e-6)
        .ok_or_else(|| GridError::InvalidArgument("map is not a lattice symmetry".into()))?;
    if int_det(&nt).abs() != 1 {
        return Err(GridError::InvalidArgument("map is not a lattice symmetry".into()));
    }
    Ok(nt.transpose())
}

fn mod2(v: &DMatrix<f64>) -> Result<Vec<u8>> {
    let r = round_integral(v, 1e-6).ok_or_else(|| GridError::InvalidArgument("gauge update is not integral".into()))?;
    Ok(r.iter().map(|&x| bit(x)).collect())
}

fn diag(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_iterator(m.nrows(), 1, (0..m.nrows()).map(|i| m[(i, i)]))
}

/// Stabilizer gauge after the lattice symmetry `M`.
pub fn mu_after_gaussian(lat: &GkpLattice, mu: &[u8], m: &SympMatrix) -> Result<Vec<u8>> {
    let n = symmetry_coords(lat, m)?;
    let nt = n.transpose();
    let nt_inv = crate::symplectic::int_inverse(&nt)?;
    let d = &nt * lat.a_lower() * &n;
    let mut rhs = IntMatrix::from_column_slice(mu.len(), 1, &mu_vec(mu));
    for i in 0..mu.len() {
        rhs[(i, 0)] += d[(i, i)];
    }
    Ok((nt_inv * rhs).iter().map(|&x| bit(x)).collect())
}

/// Gauge after `Q(M)` with logical action `M_L` (signed Pauli permutation
/// acting on `(X; Y; Z)`, so that `Q(M)|+P⟩` is the `±P̃` eigenstate).
///
/// Each image `M p0` of a base representative must carry the sign
/// `(-1)^{υ_P + ι_P}` in the new frame; this fixes `υ'_{P̃}` one Pauli at a time.
pub fn update_after_gaussian(
    lat: &GkpLattice,
    frame: &LogicalFrame,
    m: &SympMatrix,
    m_l: &IntMatrix,
) -> Result<GaugeState> {
    let mu = mu_after_gaussian(lat, &frame.gauge.mu, m)?;
    if lat.d < 2 {
        return Ok(GaugeState { mu, upsilon: frame.gauge.upsilon });
    }
    let probe = LogicalFrame { l0: frame.l0.clone(), gauge: GaugeState { mu: mu.clone(), upsilon: [0; 3] } };
    let mut upsilon = [0u8; 3];
    let mut seen = [false; 3];
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        let row = p.row().unwrap();
        let (col, sign) = (0..3)
            .find_map(|c| (m_l[(row, c)] != 0).then_some((c, m_l[(row, c)])))
            .ok_or_else(|| GridError::InvalidArgument("M_L is not a signed permutation".into()))?;
        let target = [Pauli::X, Pauli::Y, Pauli::Z][col];
        let img = &m.entries * frame.rep(p);
        if pauli_class(lat, frame, &img)? != Some(target) {
            return Err(GridError::InvalidArgument(format!("M_L sends {p} to {target}, but M does not")));
        }
        let iota = u8::from(sign < 0);
        let base = u8::from(crate::gauge::nu_pauli(lat, &probe, target, &img)? < 0);
        if seen[col] {
            return Err(GridError::InvalidArgument("M_L is not a permutation".into()));
        }
        seen[col] = true;
        upsilon[col] = (frame.gauge.upsilon[row] + iota + base) % 2;
    }
    Ok(GaugeState { mu, upsilon })
}

/// The `υ_y` entry implied by `υ_x`, `υ_z` through `U(Y) = i U(X) U(Z)`.
pub fn implied_upsilon_y(lat: &GkpLattice, frame: &LogicalFrame) -> Result<u8> {
    let x0 = frame.rep(Pauli::X);
    let z0 = frame.rep(Pauli::Z);
    let xz = &x0 + &z0;
    // i·exp(iπ ω(z0, x0)) with ω(z0, x0) = ±1/2 (mod 2).
    let w = z0.dot(&(omega(lat.m) * &x0));
    let phase = (0.5 + w).rem_euclid(2.0);
    let phase_bit = if phase.abs() < 1e-6 || (phase - 2.0).abs() < 1e-6 {
        0
    } else if (phase - 1.0).abs() < 1e-6 {
        1
    } else {
        return Err(GridError::InvalidArgument("x0 and z0 do not anticommute".into()));
    };
    let mut probe = frame.clone();
    probe.gauge.upsilon[1] = 0;
    let ny = u8::from(nu_pauli(lat, &probe, Pauli::Y, &xz)? < 0);
    Ok((phase_bit + frame.gauge.upsilon[0] + frame.gauge.upsilon[2] + ny) % 2)
}

/// Copy of `frame` with `υ_y` set to the value implied by `υ_x`, `υ_z`.
pub fn with_consistent_y(lat: &GkpLattice, frame: &LogicalFrame) -> Result<LogicalFrame> {
    let mut f = frame.clone();
    f.gauge.upsilon[1] = implied_upsilon_y(lat, frame)?;
    Ok(f)
}

pub fn upsilon_consistent(lat: &GkpLattice, frame: &LogicalFrame) -> Result<bool> {
    Ok(implied_upsilon_y(lat, frame)? == frame.gauge.upsilon[1])
}

/// Signed permutation `M_L` of the logical action of a lattice symmetry,
/// with `+` signs on the images of X and Z and the Y sign fixed by
/// `det(M_L) = 1`.
pub fn logical_action(lat: &GkpLattice, frame: &LogicalFrame, m: &SympMatrix) -> Result<IntMatrix> {
    let mut ml = IntMatrix::zeros(3, 3);
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        let img = &m.entries * frame.rep(p);
        let c = pauli_class(lat, frame, &img)?
            .ok_or_else(|| GridError::InvalidArgument("map does not preserve the dual lattice".into()))?;
        let col = c.row().ok_or_else(|| GridError::InvalidArgument("map sends a Pauli to the identity".into()))?;
        ml[(p.row().unwrap(), col)] = 1;
    }
    if int_det(&ml) < 0 {
        ml[(1, 0)] *= -1;
        ml[(1, 1)] *= -1;
        ml[(1, 2)] *= -1;
    }
    Ok(ml)
}

/// Stabilizer gauge after a basis change `S' = R S` (also valid for
/// sublattices `Λ' ⊆ Λ`).
pub fn update_after_basis_change(lat: &GkpLattice, r: &IntMatrix, mu: &[u8]) -> Vec<u8> {
    let d = r * lat.a_lower() * r.transpose();
    let rm = r * IntMatrix::from_column_slice(mu.len(), 1, &mu_vec(mu));
    (0..r.nrows()).map(|i| bit(rm[(i, 0)] + d[(i, i)])).collect()
}

/// Pauli frame after changing base representatives to `l0_new` on the same
/// lattice and basis.
pub fn upsilon_after_basis_change(
    lat: &GkpLattice,
    frame: &LogicalFrame,
    l0_new: &DMatrix<f64>,
) -> Result<[u8; 3]> {
    let dl = (l0_new - &frame.l0) * lat.s_inv();
    let mu_f = DMatrix::from_iterator(frame.gauge.mu.len(), 1, frame.gauge.mu.iter().map(|&u| u as f64));
    let ups = DMatrix::from_iterator(3, 1, frame.gauge.upsilon.iter().map(|&u| u as f64));
    let a_low = to_f64(&lat.a_lower());
    let total = ups
        + &dl * mu_f
        + diag(&(&frame.l0 * omega(lat.m) * l0_new.transpose() + &dl * a_low * dl.transpose()));
    let u = mod2(&total)?;
    Ok([u[0], u[1], u[2]])
}

/// All binary gauges left unchanged by the symmetry `M`.
pub fn preserving_gauges(lat: &GkpLattice, m: &SympMatrix) -> Result<Vec<Vec<u8>>> {
    let n = lat.dim();
    let mut out = Vec::new();
    for bits in 0u32..(1 << n) {
        let mu: Vec<u8> = (0..n).map(|i| ((bits >> i) & 1) as u8).collect();
        if mu_after_gaussian(lat, &mu, m)? == mu {
            out.push(mu);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;
    use crate::symplectic::{gate_matrix, Gate};
    use std::f64::consts::FRAC_PI_2;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn nu_examples() {
        let (q, _) = catalog("qunaught").unwrap();
        assert_eq!(nu(&q, &[0, 0], &v(&[1.0, 1.0])).unwrap(), -1);
        assert_eq!(nu(&q, &[0, 0], &v(&[0.0, 0.0])).unwrap(), 1);
        assert_eq!(nu(&q, &[0, 0], &v(&[2.0, 0.0])).unwrap(), 1);
        assert!(nu(&q, &[0, 0], &v(&[0.5, 0.0])).is_err());
    }

    #[test]
    fn nu_pauli_examples() {
        let (lat, mut frame) = catalog("square").unwrap();
        let x0 = frame.rep(Pauli::X);
        assert_eq!(nu_pauli(&lat, &frame, Pauli::X, &x0).unwrap(), 1);
        let p = &x0 + lat.generator(1);
        let s = nu_pauli(&lat, &frame, Pauli::X, &p).unwrap();
        frame.gauge.upsilon[0] = 1;
        assert_eq!(nu_pauli(&lat, &frame, Pauli::X, &p).unwrap(), -s);
        assert!(nu_pauli(&lat, &frame, Pauli::Z, &p).is_err());
    }

    #[test]
    fn validity_examples() {
        let (sq, _) = catalog("square").unwrap();
        assert!(validate_gauge(&sq, &[0, 0]));
        assert!(!validate_gauge(&sq, &[1, 0]));
        assert!(!validate_gauge(&sq, &[0, 1]));
        assert!(!validate_gauge(&sq, &[1, 1]));
        let (d4, _) = catalog("d4").unwrap();
        assert!(validate_gauge(&d4, &[0, 1, 1, 1]));
    }

    #[test]
    fn translation_updates() {
        let (lat, frame) = catalog("square").unwrap();
        let g = update_after_translation(&lat, &frame, &DVector::zeros(2)).unwrap();
        assert_eq!(g, frame.gauge);
        let g = update_after_translation(&lat, &frame, &lat.generator(0)).unwrap();
        assert_eq!(g.mu, frame.gauge.mu);
        let (d4, mut f4) = catalog("d4").unwrap();
        f4.gauge.mu = vec![0, 0, 0, 0];
        let target = [0, 1, 1, 1];
        let tau = gauge_setting_translation(&d4, &f4.gauge.mu, &target);
        let g = update_after_translation(&d4, &f4, &tau).unwrap();
        assert_eq!(g.mu, target.to_vec());
    }

    #[test]
    fn hadamard_keeps_special_square_gauges() {
        let (lat, _) = catalog("square").unwrap();
        let r = gate_matrix(1, Gate::Rotation { mode: 0, theta: FRAC_PI_2 }).unwrap();
        assert_eq!(mu_after_gaussian(&lat, &[0, 0], &r).unwrap(), vec![0, 0]);
        assert_eq!(mu_after_gaussian(&lat, &[1, 1], &r).unwrap(), vec![1, 1]);
        let id = SympMatrix::identity(1);
        let (_, frame) = catalog("square").unwrap();
        let ml = IntMatrix::identity(3, 3);
        assert_eq!(update_after_gaussian(&lat, &frame, &id, &ml).unwrap(), frame.gauge);
        let shear = gate_matrix(1, Gate::Shear { mode: 0, c: 0.3 }).unwrap();
        assert!(mu_after_gaussian(&lat, &[0, 0], &shear).is_err());
    }

    #[test]
    fn hadamard_logical_action() {
        let (lat, frame) = catalog("square").unwrap();
        let r = gate_matrix(1, Gate::Rotation { mode: 0, theta: FRAC_PI_2 }).unwrap();
        let ml = logical_action(&lat, &frame, &r).unwrap();
        assert_eq!(ml, IntMatrix::from_row_slice(3, 3, &[0, 0, 1, 0, -1, 0, 1, 0, 0]));
    }

    #[test]
    fn catalog_frames_are_consistent() {
        let mut off = Vec::new();
        for name in ["square", "hexagonal", "diamond", "rectangular", "tesseract", "d4", "d2m:3", "four_mode"] {
            let (lat, mut frame) = catalog(name).unwrap();
            if !upsilon_consistent(&lat, &frame).unwrap() {
                off.push(name);
            }
            frame.gauge.upsilon[1] = implied_upsilon_y(&lat, &frame).unwrap();
            assert!(upsilon_consistent(&lat, &frame).unwrap(), "{name}");
        }
        // With υ = 0 these frames label the -Y eigenstate as +Y under Y = iXZ.
        assert_eq!(off, ["diamond", "four_mode"]);
    }

    #[test]
    fn gaussian_update_keeps_consistency() {
        let (lat, mut frame) = catalog("square").unwrap();
        let r = gate_matrix(1, Gate::Rotation { mode: 0, theta: FRAC_PI_2 }).unwrap();
        for ups in [[0, 0, 0], [1, 1, 0], [0, 1, 1], [1, 0, 1]] {
            frame.gauge.upsilon = ups;
            assert!(upsilon_consistent(&lat, &frame).unwrap());
            let ml = logical_action(&lat, &frame, &r).unwrap();
            let g = update_after_gaussian(&lat, &frame, &r, &ml).unwrap();
            let next = LogicalFrame { l0: frame.l0.clone(), gauge: g };
            assert!(upsilon_consistent(&lat, &next).unwrap(), "{ups:?}");
        }
    }

    #[test]
    fn basis_change_identity() {
        let (lat, _) = catalog("d4").unwrap();
        let mu = vec![1, 0, 1, 1];
        assert_eq!(update_after_basis_change(&lat, &IntMatrix::identity(4, 4), &mu), mu);
    }
}
