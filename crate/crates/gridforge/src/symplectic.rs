//! Symplectic and orthogonal linear algebra over `R^{2m}` in the interleaved
//! quadrature ordering `(q1, p1, q2, p2, ...)`, plus the exact integer
//! normal form of alternating matrices.

use nalgebra::DMatrix;

use crate::error::{GridError, Result};

/// Default tolerance for floating symplectic/orthogonal checks.
pub const TOL: f64 = 1e-9;

pub type IntMatrix = DMatrix<i64>;

/// `Ω = ⊕_m [[0, 1], [-1, 0]]`.
pub fn omega(m: usize) -> DMatrix<f64> {
    omega_int(m).map(|x| x as f64)
}

pub fn omega_int(m: usize) -> IntMatrix {
    let mut o = IntMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        o[(2 * j, 2 * j + 1)] = 1;
        o[(2 * j + 1, 2 * j)] = -1;
    }
    o
}

/// `uᵀΩv`.
pub fn omega_form(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || !u.len().is_multiple_of(2) {
        return Err(GridError::InvalidArgument(format!(
            "omega_form needs equal even lengths, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u
        .chunks(2)
        .zip(v.chunks(2))
        .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
        .sum())
}

/// A real `2m × 2m` matrix acting on quadrature vectors as `x -> M x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SympMatrix {
    pub entries: DMatrix<f64>,
    pub m: usize,
}

impl SympMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() || !n.is_multiple_of(2) || n == 0 {
            return Err(GridError::InvalidArgument(format!(
                "expected a square matrix of even size, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        Ok(Self { entries, m: n / 2 })
    }

    pub fn identity(m: usize) -> Self {
        Self { entries: DMatrix::identity(2 * m, 2 * m), m }
    }

    /// `‖MᵀΩM − Ω‖_max`.
    pub fn symplectic_defect(&self) -> f64 {
        let o = omega(self.m);
        max_abs(&(self.entries.transpose() * &o * &self.entries - o))
    }

    pub fn orthogonal_defect(&self) -> f64 {
        let n = 2 * self.m;
        max_abs(&(self.entries.transpose() * &self.entries - DMatrix::identity(n, n)))
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        self.symplectic_defect() <= tol
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.orthogonal_defect() <= tol
    }

    pub fn compose(&self, other: &SympMatrix) -> SympMatrix {
        SympMatrix { entries: &self.entries * &other.entries, m: self.m }
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Elementary gates. Mode indices are 0-based; Givens axes are 1-based
/// coordinate indices into `(q1, p1, q2, p2, ...)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// Phase-space rotation `R(θ)` of one mode.
    Rotation { mode: usize, theta: f64 },
    /// 50:50 beamsplitter from mode `j` to mode `k`.
    Beamsplitter { j: usize, k: usize },
    /// `p -> p + c q` on one mode.
    Shear { mode: usize, c: f64 },
    /// Weighted SUM `exp(-i w q_j p_k)`: `q_k -> q_k + w q_j`, `p_j -> p_j - w p_k`.
    Sum { j: usize, k: usize, weight: f64 },
    /// Orthogonal rotation in the plane of coordinates `i`, `j`.
    Givens { i: usize, j: usize, theta: f64 },
}

pub fn gate_matrix(m: usize, gate: Gate) -> Result<SympMatrix> {
    let n = 2 * m;
    let mut g = DMatrix::<f64>::identity(n, n);
    let check_mode = |x: usize| {
        if x >= m {
            Err(GridError::InvalidArgument(format!("mode {x} out of range for m = {m}")))
        } else {
            Ok(())
        }
    };
    match gate {
        Gate::Rotation { mode, theta } => {
            check_mode(mode)?;
            let (s, c) = theta.sin_cos();
            let b = 2 * mode;
            g[(b, b)] = c;
            g[(b, b + 1)] = -s;
            g[(b + 1, b)] = s;
            g[(b + 1, b + 1)] = c;
        }
        Gate::Beamsplitter { j, k } => {
            check_mode(j)?;
            check_mode(k)?;
            if j == k {
                return Err(GridError::InvalidArgument("beamsplitter needs two distinct modes".into()));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            for t in 0..2 {
                let (a, b) = (2 * j + t, 2 * k + t);
                g[(a, a)] = h;
                g[(a, b)] = -h;
                g[(b, a)] = h;
                g[(b, b)] = h;
            }
        }
        Gate::Shear { mode, c } => {
            check_mode(mode)?;
            g[(2 * mode + 1, 2 * mode)] = c;
        }
        Gate::Sum { j, k, weight } => {
            check_mode(j)?;
            check_mode(k)?;
            if j == k {
                return Err(GridError::InvalidArgument("SUM needs two distinct modes".into()));
            }
            g[(2 * k, 2 * j)] = weight;
            g[(2 * j + 1, 2 * k + 1)] = -weight;
        }
        Gate::Givens { i, j, theta } => {
            if i == 0 || j == 0 || i > n || j > n || i == j {
                return Err(GridError::InvalidArgument(format!(
                    "givens axes ({i},{j}) invalid for dimension {n}"
                )));
            }
            let (s, c) = theta.sin_cos();
            let (a, b) = (i - 1, j - 1);
            g[(a, a)] = c;
            g[(a, b)] = -s;
            g[(b, a)] = s;
            g[(b, b)] = c;
        }
    }
    Ok(SympMatrix { entries: g, m })
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(r, c);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), (b.nrows(), b.ncols())).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

/// Rounds a floating matrix to integers when every entry is within `tol`.
pub fn round_integral(m: &DMatrix<f64>, tol: f64) -> Option<IntMatrix> {
    let mut out = IntMatrix::zeros(m.nrows(), m.ncols());
    for (o, x) in out.iter_mut().zip(m.iter()) {
        let r = x.round();
        if (x - r).abs() > tol || !r.is_finite() {
            return None;
        }
        *o = r as i64;
    }
    Some(out)
}

pub fn to_f64(m: &IntMatrix) -> DMatrix<f64> {
    m.map(|x| x as f64)
}

/// Exact determinant by fraction-free Bareiss elimination.
pub fn int_det(m: &IntMatrix) -> i128 {
    let n = m.nrows();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Inverse of a unimodular integer matrix.
pub fn int_inverse(m: &IntMatrix) -> Result<IntMatrix> {
    let det = int_det(m);
    if det.abs() != 1 {
        return Err(GridError::InvalidArgument(format!("matrix is not unimodular (det = {det})")));
    }
    let inv = to_f64(m)
        .try_inverse()
        .ok_or_else(|| GridError::InvalidArgument("singular integer matrix".into()))?;
    let r = round_integral(&inv, 1e-6)
        .ok_or_else(|| GridError::InvalidArgument("unimodular inverse not integral".into()))?;
    if &r * m != IntMatrix::identity(m.nrows(), m.nrows()) {
        return Err(GridError::InvalidArgument("unimodular inverse failed exact check".into()));
    }
    Ok(r)
}

/// `R·A·Rᵀ = [[0, D], [-D, 0]]` with `D` positive and non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub r: IntMatrix,
    pub d: Vec<i64>,
}

impl NormalForm {
    /// The block matrix `[[0, D], [-D, 0]]`.
    pub fn block(&self) -> IntMatrix {
        let m = self.d.len();
        let mut b = IntMatrix::zeros(2 * m, 2 * m);
        for (i, &x) in self.d.iter().enumerate() {
            b[(i, m + i)] = x;
            b[(m + i, i)] = -x;
        }
        b
    }

    pub fn code_dimension(&self) -> i64 {
        self.d.iter().product()
    }
}

struct Reducer {
    a: IntMatrix,
    r: IntMatrix,
}

impl Reducer {
    fn swap(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap_rows(i, j);
            self.a.swap_columns(i, j);
            self.r.swap_rows(i, j);
        }
    }

    /// row_dst += t·row_src applied as a congruence.
    fn add(&mut self, dst: usize, src: usize, t: i64) {
        if t == 0 {
            return;
        }
        let n = self.a.nrows();
        for c in 0..n {
            let v = self.a[(src, c)];
            self.a[(dst, c)] += t * v;
        }
        for c in 0..n {
            let v = self.a[(c, src)];
            self.a[(c, dst)] += t * v;
        }
        for c in 0..n {
            let v = self.r[(src, c)];
            self.r[(dst, c)] += t * v;
        }
    }
}

/// Integer symplectic normal form of a nonsingular alternating matrix.
pub fn symplectic_normal_form(a: &IntMatrix) -> Result<NormalForm> {
    let n = a.nrows();
    if n != a.ncols() || !n.is_multiple_of(2) || n == 0 {
        return Err(GridError::InvalidArgument("normal form needs a square matrix of even size".into()));
    }
    if a != &(-a.transpose()) {
        return Err(GridError::InvalidArgument("matrix is not antisymmetric".into()));
    }
    if int_det(a) == 0 {
        return Err(GridError::Degenerate("alternating matrix is singular".into()));
    }
    let m = n / 2;
    let mut red = Reducer { a: a.clone(), r: IntMatrix::identity(n, n) };
    for k in 0..m {
        let b = 2 * k;
        loop {
            let mut best: Option<(usize, usize, i64)> = None;
            for i in b..n {
                for j in b..n {
                    let v = red.a[(i, j)];
                    if v > 0 && best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
            let (i, mut j, p) = best.ok_or_else(|| GridError::Degenerate("zero block".into()))?;
            red.swap(b, i);
            if j == b {
                j = i;
            }
            red.swap(b + 1, j);
            let mut dirty = false;
            for l in b + 2..n {
                let x = red.a[(b, l)];
                let q = x.div_euclid(p);
                red.add(l, b + 1, -q);
                // a[b+1][b] = -p, so row_l += t·row_b changes a[b+1][l] by -t·p.
                let y = red.a[(b + 1, l)];
                red.add(l, b, y.div_euclid(p));
                if red.a[(b, l)] != 0 || red.a[(b + 1, l)] != 0 {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            let mut bad = None;
            'outer: for i in b + 2..n {
                for j in b + 2..n {
                    if red.a[(i, j)] % p != 0 {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => red.add(b, i, 1),
                None => break,
            }
        }
    }
    // Pivots come out divisibility-ordered and increasing; reverse blocks and
    // lay them out as [[0, D], [-D, 0]].
    let mut perm = IntMatrix::zeros(n, n);
    for k in 0..m {
        let src = m - 1 - k;
        perm[(k, 2 * src)] = 1;
        perm[(m + k, 2 * src + 1)] = 1;
    }
    let r = &perm * &red.r;
    let block = &r * a * r.transpose();
    let d: Vec<i64> = (0..m).map(|k| block[(k, m + k)]).collect();
    let nf = NormalForm { r, d };
    debug_assert_eq!(block, nf.block());
    Ok(nf)
}

/// Integral symplectic Gram matrix `SΩSᵀ`, or `None` when it is not integral.
pub fn gram_int(s: &DMatrix<f64>, tol: f64) -> Option<IntMatrix> {
    let m = s.nrows() / 2;
    round_integral(&(s * omega(m) * s.transpose()), tol)
}

/// A Gaussian map `M` and unimodular `R` with `S_target = R·S·M`.
#[derive(Debug, Clone)]
pub struct GaussianMap {
    pub m: SympMatrix,
    pub r: IntMatrix,
}

impl GaussianMap {
    pub fn residual(&self, s: &DMatrix<f64>, s_target: &DMatrix<f64>) -> f64 {
        max_abs(&(to_f64(&self.r) * s * &self.m.entries - s_target))
    }
}

/// Finds a symplectic `M` relating two generator matrices, or `None` when
/// their normal forms differ.
pub fn gaussian_map_between(s: &DMatrix<f64>, s_target: &DMatrix<f64>) -> Result<Option<GaussianMap>> {
    if s.shape() != s_target.shape() || s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) {
        return Err(GridError::InvalidArgument("generator matrices must have equal even square shapes".into()));
    }
    let a_s = gram_int(s, TOL).ok_or_else(|| GridError::NotACode("source Gram matrix not integral".into()))?;
    let a_t = gram_int(s_target, TOL).ok_or_else(|| GridError::NotACode("target Gram matrix not integral".into()))?;
    let nf_s = symplectic_normal_form(&a_s)?;
    let nf_t = symplectic_normal_form(&a_t)?;
    if nf_s.d != nf_t.d {
        return Ok(None);
    }
    let r = int_inverse(&nf_t.r)? * &nf_s.r;
    let rs = to_f64(&r) * s;
    let inv = rs
        .try_inverse()
        .ok_or_else(|| GridError::Degenerate("source generator is singular".into()))?;
    let m = SympMatrix::new(inv * s_target)?;
    Ok(Some(GaussianMap { m, r }))
}
