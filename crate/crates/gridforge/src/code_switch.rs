//! Code switching between `Λ_C` and `Λ_A ⊕ Λ_B`, lattice identity tests,
//! the concatenated-code constructor and LLL reduction.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{GridError, Result};
use crate::gauge::{
    gauge_setting_translation, nu, nu_pauli, update_after_basis_change, update_after_translation, upsilon_consistent,
    validate_gauge, GaugeState,
};
use crate::lattice::{derive_frame, integral, lll, pauli_class, GkpLattice, LogicalFrame, Pauli};
use crate::symplectic::{direct_sum, int_det, to_f64, IntMatrix};

fn ratio(s1: &DMatrix<f64>, s2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s1.shape() != s2.shape() {
        return Err(GridError::InvalidArgument("generator shapes differ".into()));
    }
    let inv = s2
        .clone()
        .try_inverse()
        .ok_or_else(|| GridError::InvalidArgument("generator matrix is singular".into()))?;
    if s1.determinant().abs() < 1e-12 {
        return Err(GridError::InvalidArgument("generator matrix is singular".into()));
    }
    Ok(s1 * inv)
}

/// `Λ₁ ⊆ Λ₂`: every row of `s1` is an integer combination of rows of `s2`.
pub fn sublattice(s1: &DMatrix<f64>, s2: &DMatrix<f64>) -> Result<bool> {
    Ok(integral(&ratio(s1, s2)?).is_some())
}

pub fn same_lattice(s1: &DMatrix<f64>, s2: &DMatrix<f64>) -> Result<bool> {
    Ok(sublattice(s1, s2)? && sublattice(s2, s1)?)
}

/// LLL reduction with `δ = 0.75`; returns `(R, R·S)`.
pub fn lll_reduce(s: &DMatrix<f64>) -> (IntMatrix, DMatrix<f64>) {
    lll(s, 0.75)
}

/// Qubit stabilizer code given by Pauli-string generators.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitStabilizerCode {
    pub n: usize,
    pub k: usize,
    pub generators: Vec<String>,
}

impl QubitStabilizerCode {
    pub fn new<S: AsRef<str>>(n: usize, generators: &[S]) -> Result<Self> {
        let generators: Vec<String> = generators.iter().map(|g| g.as_ref().trim().to_ascii_uppercase()).collect();
        for g in &generators {
            if g.len() != n || !g.chars().all(|c| "IXYZ".contains(c)) {
                return Err(GridError::Parse(format!("'{g}' is not a Pauli string on {n} qubits")));
            }
        }
        let code = Self { n, k: 0, generators };
        let rows = code.binary_matrix();
        for i in 0..rows.len() {
            for j in 0..i {
                let w: u32 = (0..n).map(|q| (rows[i][2 * q] * rows[j][2 * q + 1] + rows[i][2 * q + 1] * rows[j][2 * q]) as u32).sum();
                if !w.is_multiple_of(2) {
                    return Err(GridError::InvalidArgument(format!(
                        "generators {} and {} anticommute",
                        code.generators[j], code.generators[i]
                    )));
                }
            }
        }
        let rank = gf2_rank(&rows);
        if rank != rows.len() {
            return Err(GridError::InvalidArgument("generators are not independent".into()));
        }
        Ok(Self { k: n - rank, ..code })
    }

    /// Interleaved binary matrix: column `2q` flags X on qubit `q`, column
    /// `2q + 1` flags Z; Y sets both.
    pub fn binary_matrix(&self) -> Vec<Vec<u8>> {
        self.generators
            .iter()
            .map(|g| {
                g.chars()
                    .flat_map(|c| match c {
                        'X' => [1, 0],
                        'Z' => [0, 1],
                        'Y' => [1, 1],
                        _ => [0, 0],
                    })
                    .collect()
            })
            .collect()
    }
}

impl FromStr for QubitStabilizerCode {
    type Err = GridError;

    /// One Pauli string per line; blank lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let gens: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
        let n = gens.first().map(|g| g.len()).ok_or_else(|| GridError::Parse("no generators".into()))?;
        Self::new(n, &gens)
    }
}

/// Repetition code on `n` qubits along the given axis.
pub fn repetition_code(n: usize, axis: Pauli) -> Result<QubitStabilizerCode> {
    let c = match axis {
        Pauli::X => 'X',
        Pauli::Y => 'Y',
        Pauli::Z => 'Z',
        Pauli::I => return Err(GridError::InvalidArgument("repetition axis must be X, Y or Z".into())),
    };
    let gens: Vec<String> =
        (0..n.saturating_sub(1)).map(|i| (0..n).map(|q| if q == i || q == i + 1 { c } else { 'I' }).collect()).collect();
    QubitStabilizerCode::new(n, &gens)
}

fn gf2_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] == 1) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] == 1 {
                for j in 0..cols {
                    m[r][j] ^= m[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Integer matrix `T`: rows of the binary matrix followed by `m + k` rows
/// with a single 2. The 2s sit in the last columns when that gives
/// `|det T| = 2^{m+k}`; otherwise their columns are moved until it does.
pub fn promotion_matrix(code: &QubitStabilizerCode) -> Result<IntMatrix> {
    let n = 2 * code.n;
    let b = code.binary_matrix();
    let r = b.len();
    let target = 1i128 << (n - r);
    let mut skips = combinations(n, r);
    // Prefer leaving the leftmost columns free, as in the block form [B; 0 | 2I].
    skips.sort();
    for skip in skips {
        let mut t = IntMatrix::zeros(n, n);
        for (i, row) in b.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                t[(i, j)] = x as i64;
            }
        }
        let mut row = r;
        for c in (0..n).filter(|c| !skip.contains(c)) {
            t[(row, c)] = 2;
            row += 1;
        }
        if int_det(&t).abs() == target {
            return Ok(t);
        }
    }
    Err(GridError::Construction("no placement of the 2 rows gives a full-rank promotion matrix".into()))
}

/// Per-qubit logical block `L` built from the base frame's `x0`, `z0`.
fn logical_blocks(base_frame: &LogicalFrame, copies: usize) -> DMatrix<f64> {
    let xz = DMatrix::from_rows(&[base_frame.l0.row(0).into_owned(), base_frame.l0.row(2).into_owned()]);
    let blocks: Vec<&DMatrix<f64>> = std::iter::repeat_n(&xz, copies).collect();
    direct_sum(&blocks)
}

/// Concatenated lattice `S_q = R·T·L` (LLL-reduced) of a single-mode qubit
/// base code with a qubit stabilizer code.
pub fn concatenated_lattice(base: &GkpLattice, base_frame: &LogicalFrame, code: &QubitStabilizerCode) -> Result<GkpLattice> {
    if base.m != 1 || base.d != 2 {
        return Err(GridError::InvalidArgument("base must be a single-mode qubit code".into()));
    }
    let t = promotion_matrix(code)?;
    let sq = to_f64(&t) * logical_blocks(base_frame, code.n);
    let (_, red) = lll_reduce(&sq);
    GkpLattice::named(&format!("{}+concat", base.name), red)
}

/// Concatenated code with its base frame; the frame is derived for `k = 1`
/// and empty for a stabilizer state.
pub fn concatenate(
    base: &GkpLattice,
    base_frame: &LogicalFrame,
    code: &QubitStabilizerCode,
) -> Result<(GkpLattice, LogicalFrame)> {
    let lat = concatenated_lattice(base, base_frame, code)?;
    if code.k > 1 {
        return Err(GridError::UnsupportedDimension(lat.d));
    }
    let frame = derive_frame(&lat)?;
    Ok((lat, frame))
}

/// Hermite-style row reduction of an integer generating set; returns the
/// nonzero rows, which form a basis of the generated lattice.
fn integer_basis(mut g: IntMatrix) -> IntMatrix {
    let (rows, cols) = g.shape();
    let mut pivot_row = 0;
    for c in 0..cols {
        loop {
            let nz: Vec<usize> = (pivot_row..rows).filter(|&r| g[(r, c)] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&r) = nz.first() {
                    g.swap_rows(pivot_row, r);
                    pivot_row += 1;
                }
                break;
            }
            let &p = nz.iter().min_by_key(|&&r| g[(r, c)].abs()).unwrap();
            for &r in &nz {
                if r != p {
                    let q = g[(r, c)].div_euclid(g[(p, c)]);
                    for j in 0..cols {
                        g[(r, j)] -= q * g[(p, j)];
                    }
                }
            }
        }
        if pivot_row == rows {
            break;
        }
    }
    g.rows(0, pivot_row).into_owned()
}

/// Concatenation over a multimode qubit base code: the lattice generated by
/// `Λ_base^{⊕n}` and the stabilizer products of base logical operators.
pub fn concatenated_lattice_multimode(
    base: &GkpLattice,
    base_frame: &LogicalFrame,
    code: &QubitStabilizerCode,
) -> Result<GkpLattice> {
    if base.d != 2 {
        return Err(GridError::InvalidArgument("base must encode one qubit".into()));
    }
    let n = code.n;
    let stab_blocks: Vec<&DMatrix<f64>> = std::iter::repeat_n(&base.s, n).collect();
    let stabs = direct_sum(&stab_blocks);
    let l = logical_blocks(base_frame, n);
    let b = code.binary_matrix();
    let bm = DMatrix::from_fn(b.len(), 2 * n, |i, j| b[i][j] as f64);
    let gens = if b.is_empty() { stabs } else { DMatrix::from_rows(&[&bm * &l, stabs].iter().flat_map(|m| m.row_iter().map(|r| r.into_owned()).collect::<Vec<_>>()).collect::<Vec<_>>()) };
    let dual_blocks: Vec<&DMatrix<f64>> = std::iter::repeat_n(&base.s_dual, n).collect();
    let unit = direct_sum(&dual_blocks);
    let coords = integral(&(&gens * unit.clone().try_inverse().expect("dual basis is invertible")))
        .ok_or_else(|| GridError::Construction("generators are not in the dual of the base lattice".into()))?;
    let basis = integer_basis(coords);
    if basis.nrows() != unit.nrows() {
        return Err(GridError::Construction("concatenated generators are rank deficient".into()));
    }
    let (_, red) = lll_reduce(&(to_f64(&basis) * unit));
    GkpLattice::named(&format!("{}+concat", base.name), red)
}

/// Merge measurement: the stabilizer `λ_m ∈ Λ_C \ (Λ_A ⊕ Λ_B)` and the
/// eigenvalue of `T(λ_m)` found.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeSpec {
    pub lambda: DVector<f64>,
    pub outcome: i8,
}

fn separable(lat_a: &GkpLattice, lat_b: &GkpLattice) -> Result<GkpLattice> {
    GkpLattice::named(&format!("{}+{}", lat_a.name, lat_b.name), direct_sum(&[&lat_a.s, &lat_b.s]))
}

/// The four inclusions `Λ_A⊕Λ_B ⊆ Λ_C ⊆ Λ_C* ⊆ Λ_A*⊕Λ_B*`.
pub fn hierarchy_holds(lat_a: &GkpLattice, lat_b: &GkpLattice, lat_c: &GkpLattice) -> Result<bool> {
    let ab = separable(lat_a, lat_b)?;
    if ab.dim() != lat_c.dim() {
        return Err(GridError::InvalidArgument("mode counts do not add up".into()));
    }
    Ok(sublattice(&ab.s, &lat_c.s)?
        && sublattice(&lat_c.s, &lat_c.s_dual)?
        && sublattice(&lat_c.s_dual, &ab.s_dual)?
        && sublattice(&ab.s, &ab.s_dual)?)
}

/// Logical class and sign of `T(p)` in a code; the class of a stabilizer is `I`.
fn signed_class(lat: &GkpLattice, frame: &LogicalFrame, p: &DVector<f64>) -> Result<(Pauli, i8)> {
    let class = if lat.d == 1 {
        lat.in_dual(p).then_some(Pauli::I)
    } else {
        pauli_class(lat, frame, p)?
    };
    match class {
        None => Err(GridError::InvalidArgument("vector is not a logical operator".into())),
        Some(Pauli::I) => Ok((Pauli::I, nu(lat, &frame.gauge.mu, p)?)),
        Some(c) => Ok((c, nu_pauli(lat, frame, c, p)?)),
    }
}

fn halves(p: &DVector<f64>, na: usize) -> (DVector<f64>, DVector<f64>) {
    (p.rows(0, na).into_owned(), p.rows(na, p.len() - na).into_owned())
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub lat_a: GkpLattice,
    pub frame_a: LogicalFrame,
    pub lat_b: GkpLattice,
    pub frame_b: LogicalFrame,
    /// `τ` of the gauge-fixing translation `T(τ/2)` applied before the split.
    pub fixing_translation: Option<DVector<f64>>,
    /// Gauge of the `C` code right before the split.
    pub pre_split: GaugeState,
}

fn split_mu(lat_c: &GkpLattice, ab: &GkpLattice, mu_c: &[u8]) -> Result<Vec<u8>> {
    let r = integral(&(&ab.s * lat_c.s_inv()))
        .ok_or_else(|| GridError::InvalidSplit("separable lattice is not a sublattice".into()))?;
    Ok(update_after_basis_change(lat_c, &r, mu_c))
}

fn factor_valid(lat_a: &GkpLattice, lat_b: &GkpLattice, mu: &[u8]) -> bool {
    let na = lat_a.dim();
    validate_gauge(lat_a, &mu[..na]) && validate_gauge(lat_b, &mu[na..])
}

/// Splits `Λ_C` into the separable `Λ_A ⊕ Λ_B` (first `2m_A` quadratures to
/// `A`). The targets come with their base representatives; their gauges are
/// overwritten.
pub fn split(
    lat_c: &GkpLattice,
    frame_c: &LogicalFrame,
    target_a: (&GkpLattice, &LogicalFrame),
    target_b: (&GkpLattice, &LogicalFrame),
) -> Result<SplitResult> {
    let (lat_a, lat_b) = (target_a.0, target_b.0);
    if !hierarchy_holds(lat_a, lat_b, lat_c)? {
        return Err(GridError::InvalidSplit("lattice hierarchy does not hold".into()));
    }
    let ab = separable(lat_a, lat_b)?;
    let n = lat_c.dim();

    let mut frame = frame_c.clone();
    let mut fixing = None;
    if !factor_valid(lat_a, lat_b, &split_mu(lat_c, &ab, &frame.gauge.mu)?) {
        // Admissible gauges ordered by the length of the fixing translation,
        // ties broken lexicographically.
        let mut found: Vec<(f64, Vec<u8>, DVector<f64>, GaugeState)> = Vec::new();
        for bits in 0u32..1 << n {
            let mu: Vec<u8> = (0..n).map(|i| ((bits >> i) & 1) as u8).collect();
            if !validate_gauge(lat_c, &mu) || !factor_valid(lat_a, lat_b, &split_mu(lat_c, &ab, &mu)?) {
                continue;
            }
            let tau = gauge_setting_translation(lat_c, &frame_c.gauge.mu, &mu);
            if let Ok(g) = update_after_translation(lat_c, frame_c, &tau) {
                found.push((tau.norm(), mu, tau, g));
            }
        }
        found.sort_by(|a, b| (a.0 - b.0).abs().lt(&1e-9).then(|| a.1.cmp(&b.1)).unwrap_or(a.0.total_cmp(&b.0)));
        let found = found.into_iter().next().map(|(_, _, tau, g)| (tau, g));
        let (tau, g) = found.ok_or_else(|| GridError::InvalidSplit("no gauge makes the split codes valid".into()))?;
        frame.gauge = g;
        fixing = Some(tau);
    }
    let mu_ab = split_mu(lat_c, &ab, &frame.gauge.mu)?;
    let na = lat_a.dim();
    let mut frame_a = target_a.1.clone();
    let mut frame_b = target_b.1.clone();
    frame_a.gauge = GaugeState::with_mu(mu_ab[..na].to_vec());
    frame_b.gauge = GaugeState::with_mu(mu_ab[na..].to_vec());

    // Convention shared with `merge`: each base representative p0_C = p_A ⊕ p_B
    // has ν_C(p0_C) = ν_A(p_A) ν_B(p_B), one GF(2) equation on (υ_A, υ_B) each.
    let mut eqs: Vec<(u8, u8)> = Vec::new();
    for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
        let p = frame.rep(pauli);
        let (_, sc) = signed_class(lat_c, &frame, &p)?;
        let (pa, pb) = halves(&p, na);
        let (ca, sa) = signed_class(lat_a, &frame_a, &pa)?;
        let (cb, sb) = signed_class(lat_b, &frame_b, &pb)?;
        let mut mask = 0u8;
        if let Some(r) = ca.row() {
            mask ^= 1 << r;
        }
        if let Some(r) = cb.row() {
            mask ^= 1 << (3 + r);
        }
        eqs.push((mask, u8::from(sc < 0) ^ u8::from(sa < 0) ^ u8::from(sb < 0)));
    }
    let solutions = gf2_solutions(&eqs, 6).ok_or_else(|| GridError::InvalidSplit("Pauli frame equations are inconsistent".into()))?;
    let assign = |u: u8, fa: &mut LogicalFrame, fb: &mut LogicalFrame| {
        fa.gauge.upsilon = [u & 1, (u >> 1) & 1, (u >> 2) & 1];
        fb.gauge.upsilon = [(u >> 3) & 1, (u >> 4) & 1, (u >> 5) & 1];
    };
    let mut chosen = solutions[0];
    for &u in &solutions {
        let (mut fa, mut fb) = (frame_a.clone(), frame_b.clone());
        assign(u, &mut fa, &mut fb);
        let ok_a = lat_a.d < 2 || upsilon_consistent(lat_a, &fa)?;
        let ok_b = lat_b.d < 2 || upsilon_consistent(lat_b, &fb)?;
        if ok_a && ok_b {
            chosen = u;
            break;
        }
    }
    assign(chosen, &mut frame_a, &mut frame_b);
    Ok(SplitResult {
        lat_a: lat_a.clone(),
        frame_a,
        lat_b: lat_b.clone(),
        frame_b,
        fixing_translation: fixing,
        pre_split: frame.gauge,
    })
}

/// All solutions (as bitmasks over `n ≤ 8` unknowns) of a GF(2) system, in
/// increasing order; `None` if inconsistent.
fn gf2_solutions(eqs: &[(u8, u8)], n: usize) -> Option<Vec<u8>> {
    let sols: Vec<u8> = (0u16..1 << n)
        .map(|u| u as u8)
        .filter(|&u| eqs.iter().all(|&(mask, rhs)| ((u & mask).count_ones() as u8 & 1) == rhs))
        .collect();
    (!sols.is_empty()).then_some(sols)
}

/// Merges `A` and `B` after measuring `T(λ_m)`. `s_c` fixes the target
/// basis and `l0_c` the target base representatives.
pub fn merge(
    a: (&GkpLattice, &LogicalFrame),
    b: (&GkpLattice, &LogicalFrame),
    spec: &MergeSpec,
    s_c: &DMatrix<f64>,
    l0_c: &DMatrix<f64>,
) -> Result<(GkpLattice, GaugeState)> {
    let (lat_a, frame_a) = a;
    let (lat_b, frame_b) = b;
    if spec.outcome != 1 && spec.outcome != -1 {
        return Err(GridError::InvalidArgument("merge outcome must be +1 or -1".into()));
    }
    let ab = separable(lat_a, lat_b)?;
    let n = ab.dim();
    if spec.lambda.len() != n || s_c.nrows() != n {
        return Err(GridError::InvalidArgument("merge vector has the wrong dimension".into()));
    }
    if ab.contains(&spec.lambda) {
        return Err(GridError::InvalidArgument("merge vector is already a stabilizer".into()));
    }
    let mut s_prime = ab.s.clone();
    s_prime.set_row(n - 1, &spec.lambda.transpose());
    if s_prime.determinant().abs() < 1e-9 {
        return Err(GridError::InvalidArgument("merge vector replaces the last generator of B degenerately".into()));
    }
    let lat_prime = GkpLattice::named("merged", s_prime)?;
    let mut mu_prime: Vec<u8> = frame_a.gauge.mu.iter().chain(&frame_b.gauge.mu[..frame_b.gauge.mu.len() - 1]).copied().collect();
    mu_prime.push(u8::from(spec.outcome < 0));

    let lat_c = GkpLattice::named("merged", s_c.clone())?;
    if !same_lattice(&lat_c.s, &lat_prime.s)? {
        return Err(GridError::InvalidArgument("target generator does not span the merged lattice".into()));
    }
    let r = integral(&(&lat_c.s * lat_prime.s_inv())).expect("same lattice");
    let mu_c = update_after_basis_change(&lat_prime, &r, &mu_prime);

    let na = lat_a.dim();
    let mut upsilon = [0u8; 3];
    for (i, u) in upsilon.iter_mut().enumerate() {
        let (pa, pb) = halves(&l0_c.row(i).transpose(), na);
        if lat_c.d < 2 {
            break;
        }
        let (_, sa) = signed_class(lat_a, frame_a, &pa)?;
        let (_, sb) = signed_class(lat_b, frame_b, &pb)?;
        *u = u8::from(sa * sb < 0);
    }
    Ok((lat_c, GaugeState { mu: mu_c, upsilon }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::update_after_translation;
    use crate::lattice::{catalog, catalog_code, enumerate_points, pauli_lengths, Code};

    fn rows(r: usize, c: usize, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, x)
    }

    #[test]
    fn lattice_identity_examples() {
        let (d, _) = catalog("diamond").unwrap();
        let s2 = &d.s * 2.0;
        assert!(sublattice(&s2, &d.s).unwrap());
        assert!(!same_lattice(&s2, &d.s).unwrap());
        let dd = direct_sum(&[&d.s, &d.s]);
        let (d4, _) = catalog("d4").unwrap();
        assert!(sublattice(&dd, &d4.s).unwrap());
        assert!(!sublattice(&d4.s, &dd).unwrap());
        assert!(sublattice(&DMatrix::zeros(2, 2), &d.s).is_err());
    }

    #[test]
    fn stabilizer_code_parsing() {
        let five: QubitStabilizerCode = "XZZXI\nIXZZX\nXIXZZ\nZXIXZ".parse().unwrap();
        assert_eq!((five.n, five.k), (5, 1));
        let b = five.binary_matrix();
        assert_eq!(b[0], vec![1, 0, 0, 1, 0, 1, 1, 0, 0, 0]);
        assert_eq!(b[3], vec![0, 1, 1, 0, 0, 0, 1, 0, 0, 1]);
        assert!("XI\nZI".parse::<QubitStabilizerCode>().is_err());
        assert!("XX\nXX".parse::<QubitStabilizerCode>().is_err());
        assert!("XQ".parse::<QubitStabilizerCode>().is_err());
    }

    #[test]
    fn promotion_repositions_twos() {
        let rep = repetition_code(2, Pauli::Z).unwrap();
        let t = promotion_matrix(&rep).unwrap();
        assert_eq!(int_det(&t).abs(), 8);
        let five: QubitStabilizerCode = "XZZXI\nIXZZX\nXIXZZ\nZXIXZ".parse().unwrap();
        assert_eq!(int_det(&promotion_matrix(&five).unwrap()).abs(), 1 << 6);
    }

    #[test]
    fn diamond_repetition_is_d4() {
        let (base, bf) = catalog("diamond").unwrap();
        let (lat, frame) = concatenate(&base, &bf, &repetition_code(2, Pauli::Y).unwrap()).unwrap();
        let (d4, d4f) = catalog("d4").unwrap();
        assert!(same_lattice(&lat.s, &d4.s).unwrap());
        for l in pauli_lengths(&lat, &frame).unwrap() {
            assert!((l - 1.0).abs() < 1e-9);
        }
        for l in pauli_lengths(&d4, &d4f).unwrap() {
            assert!((l - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn diamond_repetition_gives_d2m() {
        let (base, bf) = catalog("diamond").unwrap();
        for m in 2..=4 {
            let lat = concatenated_lattice(&base, &bf, &repetition_code(m, Pauli::Y).unwrap()).unwrap();
            let (d2m, _) = catalog_code(Code::D2m(m)).unwrap();
            assert!(same_lattice(&lat.s, &d2m.s).unwrap(), "m = {m}");
        }
    }

    #[test]
    fn rectangular_repetition_is_tesseract() {
        let (base, bf) = catalog("rectangular").unwrap();
        let lat = concatenated_lattice(&base, &bf, &repetition_code(2, Pauli::Z).unwrap()).unwrap();
        let (tess, _) = catalog("tesseract").unwrap();
        assert!(same_lattice(&lat.s, &tess.s).unwrap());
    }

    #[test]
    fn diamond_stabilizer_state_is_e8() {
        let (base, bf) = catalog("diamond").unwrap();
        let code: QubitStabilizerCode = "YYII\nIYYI\nIIYY\nZZZZ".parse().unwrap();
        assert_eq!(code.k, 0);
        let lat = concatenated_lattice(&base, &bf, &code).unwrap();
        assert_eq!(lat.d, 1);
        let (e8, _) = catalog_code(Code::E8(1.0)).unwrap();
        assert!(same_lattice(&lat.s, &e8.s).unwrap());
    }

    #[test]
    fn four_mode_from_tesseract() {
        let (tess, tf) = catalog("tesseract").unwrap();
        let lat = concatenated_lattice_multimode(&tess, &tf, &repetition_code(2, Pauli::Y).unwrap()).unwrap();
        let (fm, ff) = catalog("four_mode").unwrap();
        assert!(same_lattice(&lat.s, &fm.s).unwrap());
        for l in pauli_lengths(&fm, &ff).unwrap() {
            assert!((l - 2f64.powf(0.25)).abs() < 1e-9);
        }
    }

    #[test]
    fn hexagonal_repetition_lengths() {
        let (hex, hf) = catalog("hexagonal").unwrap();
        let x0 = hf.l0.row(0).norm();
        for n in 1..=3 {
            let (lat, frame) = concatenate(&hex, &hf, &repetition_code(n, Pauli::Z).unwrap()).unwrap();
            let len = pauli_lengths(&lat, &frame).unwrap();
            let mut len = len.to_vec();
            len.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let expect = [1.0, (n as f64).sqrt(), (n as f64).sqrt()];
            for (l, e) in len.iter().zip(expect) {
                assert!((l - e * x0).abs() < 1e-9, "n = {n}: {len:?}");
            }
        }
    }

    #[test]
    fn concatenation_dimension_law() {
        let (sq, sf) = catalog("square").unwrap();
        for (gens, k) in [("XZZXI\nIXZZX\nXIXZZ\nZXIXZ", 1), ("XXXX\nZZZZ", 2), ("ZZI", 2), ("XXI\nXIX", 1)] {
            let code: QubitStabilizerCode = gens.parse().unwrap();
            assert_eq!(code.k, k);
            assert_eq!(concatenated_lattice(&sq, &sf, &code).unwrap().d, 1 << k);
        }
    }

    #[test]
    fn five_qubit_lll_shortens() {
        let code: QubitStabilizerCode = "XZZXI\nIXZZX\nXIXZZ\nZXIXZ".parse().unwrap();
        let max = |m: &DMatrix<f64>| m.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
        // With the square base every row of T·L already has the minimal length √2;
        // the rectangular base makes the 2-rows unequal and leaves room to shorten.
        for (name, strict) in [("square", false), ("rectangular", true)] {
            let (base, bf) = catalog(name).unwrap();
            let tl = to_f64(&promotion_matrix(&code).unwrap()) * logical_blocks(&bf, 5);
            let (r, red) = lll_reduce(&tl);
            if strict {
                assert!(max(&red) < max(&tl) - 1e-6);
            } else {
                assert!(max(&red) <= max(&tl) + 1e-9);
            }
            assert_eq!(int_det(&r).abs(), 1);
            assert!(same_lattice(&red, &tl).unwrap());
            let lat = concatenated_lattice(&base, &bf, &code).unwrap();
            assert!(same_lattice(&lat.s, &tl).unwrap());
        }
    }

    #[test]
    fn lll_recovers_square_basis() {
        let s = DMatrix::identity(2, 2) * 2f64.sqrt();
        let scramble = rows(2, 2, &[7.0, 5.0, 4.0, 3.0]);
        let (_, red) = lll_reduce(&(&scramble * &s));
        for r in red.row_iter() {
            assert!((r.norm() - 2f64.sqrt()).abs() < 1e-9);
        }
        let (r, same) = lll_reduce(&s);
        assert_eq!(int_det(&r).abs(), 1);
        assert!(same_lattice(&same, &s).unwrap());
    }

    fn d4_split() -> (GkpLattice, LogicalFrame, SplitResult) {
        let (d4, f4) = catalog("d4").unwrap();
        let (dia, df) = catalog("diamond").unwrap();
        let res = split(&d4, &f4, (&dia, &df), (&dia, &df)).unwrap();
        (d4, f4, res)
    }

    #[test]
    fn d4_split_needs_gauge_fix() {
        let (d4, f4, res) = d4_split();
        // (1,0,0,0) is equally admissible; the tie is broken lexicographically.
        assert_eq!(res.pre_split.mu, vec![0, 1, 1, 1]);
        let tau = res.fixing_translation.clone().unwrap();
        assert_eq!(update_after_translation(&d4, &f4, &tau).unwrap(), res.pre_split);
        assert!(hierarchy_holds(&res.lat_a, &res.lat_b, &d4).unwrap());
    }

    #[test]
    fn d4_classes_map_to_repetition_products() {
        use std::collections::HashMap;
        let (d4, f4, res) = d4_split();
        let mut frame = f4.clone();
        frame.gauge = res.pre_split.clone();
        let allowed = |c: Pauli| -> Vec<(Pauli, Pauli)> {
            match c {
                Pauli::I => vec![(Pauli::I, Pauli::I), (Pauli::Y, Pauli::Y)],
                Pauli::X => vec![(Pauli::Z, Pauli::Z), (Pauli::X, Pauli::X)],
                Pauli::Y => vec![(Pauli::Z, Pauli::X), (Pauli::X, Pauli::Z)],
                Pauli::Z => vec![(Pauli::Y, Pauli::I), (Pauli::I, Pauli::Y)],
            }
        };
        // The relative sign between T(p) in both descriptions depends only on
        // the pair of classes.
        let mut rel: HashMap<(Pauli, Pauli, Pauli), i8> = HashMap::new();
        for p in enumerate_points(&d4, 2.01, true).unwrap() {
            let (c, sc) = signed_class(&d4, &frame, &p).unwrap();
            let (pa, pb) = halves(&p, 2);
            let (ca, sa) = signed_class(&res.lat_a, &res.frame_a, &pa).unwrap();
            let (cb, sb) = signed_class(&res.lat_b, &res.frame_b, &pb).unwrap();
            assert!(allowed(c).contains(&(ca, cb)), "{c} -> {ca}{cb}");
            let r = sc * sa * sb;
            assert_eq!(*rel.entry((c, ca, cb)).or_insert(r), r);
        }
        for c in [Pauli::X, Pauli::Y, Pauli::Z] {
            let (pa, pb) = halves(&f4.rep(c), 2);
            let ca = pauli_class(&res.lat_a, &res.frame_a, &pa).unwrap().unwrap();
            let cb = pauli_class(&res.lat_b, &res.frame_b, &pb).unwrap().unwrap();
            assert_eq!(rel[&(c, ca, cb)], 1);
        }
        let ones = rel.iter().filter(|(k, _)| k.0 == Pauli::I && k.1 == Pauli::I).all(|(_, &v)| v == 1);
        assert!(ones);
    }

    #[test]
    fn split_then_merge_round_trips() {
        let (d4, f4, res) = d4_split();
        let mut frame = f4.clone();
        frame.gauge = res.pre_split.clone();
        // A Y♦Y♦ representative.
        let lambda = DVector::from_column_slice(&[1.0, 0.0, 1.0, 0.0]);
        assert!(d4.contains(&lambda));
        let outcome = nu(&d4, &frame.gauge.mu, &lambda).unwrap();
        let spec = MergeSpec { lambda, outcome };
        let (lat_c, g) =
            merge((&res.lat_a, &res.frame_a), (&res.lat_b, &res.frame_b), &spec, &d4.s, &f4.l0).unwrap();
        assert!(same_lattice(&lat_c.s, &d4.s).unwrap());
        assert_eq!(g, frame.gauge);

        let flipped = MergeSpec { outcome: -outcome, ..spec.clone() };
        let s_prime = {
            let mut s = direct_sum(&[&res.lat_a.s, &res.lat_b.s]);
            s.set_row(3, &spec.lambda.transpose());
            s
        };
        let (_, g1) = merge((&res.lat_a, &res.frame_a), (&res.lat_b, &res.frame_b), &spec, &s_prime, &f4.l0).unwrap();
        let (_, g2) =
            merge((&res.lat_a, &res.frame_a), (&res.lat_b, &res.frame_b), &flipped, &s_prime, &f4.l0).unwrap();
        let diff: Vec<usize> = (0..4).filter(|&i| g1.mu[i] != g2.mu[i]).collect();
        assert_eq!(diff, vec![3]);
    }

    #[test]
    fn merge_rejects_bad_vectors() {
        let (_, _, res) = d4_split();
        let (d4, f4) = catalog("d4").unwrap();
        let stab = direct_sum(&[&res.lat_a.s, &res.lat_b.s]).row(0).transpose();
        let spec = MergeSpec { lambda: stab, outcome: 1 };
        assert!(merge((&res.lat_a, &res.frame_a), (&res.lat_b, &res.frame_b), &spec, &d4.s, &f4.l0).is_err());
        // In the span of the remaining generators, so S' is singular.
        let spec = MergeSpec { lambda: DVector::from_column_slice(&[0.0, 0.0, 0.5, 0.5]), outcome: 1 };
        assert!(merge((&res.lat_a, &res.frame_a), (&res.lat_b, &res.frame_b), &spec, &d4.s, &f4.l0).is_err());
    }

    #[test]
    fn square_pair_merge_halves_dimension() {
        let (sq, sf) = catalog("square").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let lambda = DVector::from_column_slice(&[0.0, h, 0.0, h]);
        let mut s_c = direct_sum(&[&sq.s, &sq.s]);
        s_c.set_row(3, &lambda.transpose());
        let lat_c = GkpLattice::build(s_c.clone()).unwrap();
        let frame_c = derive_frame(&lat_c).unwrap();
        let (merged, g) =
            merge((&sq, &sf), (&sq, &sf), &MergeSpec { lambda, outcome: 1 }, &s_c, &frame_c.l0).unwrap();
        assert_eq!(separable(&sq, &sq).unwrap().d, 4);
        assert_eq!(merged.d, 2);
        assert_eq!(g.mu.len(), 4);
    }
}
