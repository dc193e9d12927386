//! GKP lattices: construction and validation, the named-code catalog,
//! short-vector enumeration, packing metrics and Pauli classes on `Λ*/Λ`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::{erf::erfc, gamma::gamma};

use crate::error::{GridError, Result};
use crate::gauge::GaugeState;
use crate::symplectic::{gram_int, int_det, omega, round_integral, IntMatrix};

/// Integrality tolerance for Gram matrices.
pub const GRAM_TOL: f64 = 1e-9;
/// Coordinates this close to integers count as integral.
pub const COORD_TOL: f64 = 1e-6;
/// Hard cap on the number of enumerated points.
pub const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct GkpLattice {
    pub name: String,
    pub m: usize,
    /// Rows are the stabilizer generators `s_j`.
    pub s: DMatrix<f64>,
    /// Symplectic Gram matrix `SΩSᵀ`.
    pub a: IntMatrix,
    pub d: u64,
    /// Dual generators `S* = A⁻¹S`.
    pub s_dual: DMatrix<f64>,
    s_inv_t: DMatrix<f64>,
}

impl GkpLattice {
    pub fn build(s: DMatrix<f64>) -> Result<Self> {
        Self::named("custom", s)
    }

    pub fn named(name: &str, s: DMatrix<f64>) -> Result<Self> {
        let n = s.nrows();
        if n == 0 || n != s.ncols() || !n.is_multiple_of(2) {
            return Err(GridError::InvalidArgument(format!(
                "generator must be 2m x 2m, got {}x{}",
                n,
                s.ncols()
            )));
        }
        let s_inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| GridError::Degenerate("generator matrix is singular".into()))?;
        let a = gram_int(&s, GRAM_TOL)
            .ok_or_else(|| GridError::NotACode("symplectic Gram matrix is not integral".into()))?;
        let det = int_det(&a);
        if det <= 0 {
            return Err(GridError::Degenerate(format!("det(A) = {det}")));
        }
        let d = (det as f64).sqrt().round() as u64;
        if (d as i128) * (d as i128) != det {
            return Err(GridError::Dimension(format!("det(A) = {det} is not a perfect square")));
        }
        let a_f = a.map(|x| x as f64);
        let s_dual = a_f
            .try_inverse()
            .ok_or_else(|| GridError::Degenerate("Gram matrix is singular".into()))?
            * &s;
        Ok(Self { name: name.to_string(), m: n / 2, s_inv_t: s_inv.transpose(), s, a, d, s_dual })
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    pub fn generator(&self, j: usize) -> DVector<f64> {
        self.s.row(j).transpose()
    }

    /// Coordinates `c` with `v = Sᵀc`.
    pub fn coords(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.s_inv_t * v
    }

    /// Integer coordinates of `v` in the stabilizer basis, if `v ∈ Λ`.
    pub fn int_coords(&self, v: &DVector<f64>) -> Option<Vec<i64>> {
        int_vec(&self.coords(v))
    }

    pub fn contains(&self, v: &DVector<f64>) -> bool {
        self.int_coords(v).is_some()
    }

    /// `SΩv`, integral exactly when `v ∈ Λ*`.
    pub fn omega_products(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.s * omega(self.m) * v
    }

    pub fn in_dual(&self, v: &DVector<f64>) -> bool {
        int_vec(&self.omega_products(v)).is_some()
    }

    pub fn point(&self, c: &[i64]) -> DVector<f64> {
        let c = DVector::from_iterator(c.len(), c.iter().map(|&x| x as f64));
        self.s.transpose() * c
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::named(&format!("{}*{c}", self.name), &self.s * c)
    }

    pub fn s_inv(&self) -> DMatrix<f64> {
        self.s_inv_t.transpose()
    }

    /// Strictly lower-triangular part of `A`.
    pub fn a_lower(&self) -> IntMatrix {
        let n = self.dim();
        IntMatrix::from_fn(n, n, |i, j| if i > j { self.a[(i, j)] } else { 0 })
    }
}

pub(crate) fn int_vec(v: &DVector<f64>) -> Option<Vec<i64>> {
    v.iter()
        .map(|x| {
            let r = x.round();
            ((x - r).abs() <= COORD_TOL).then_some(r as i64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Row index into `L0` (`x0`, `y0`, `z0`).
    pub fn row(self) -> Option<usize> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(0),
            Pauli::Y => Some(1),
            Pauli::Z => Some(2),
        }
    }

    pub fn compose(self, other: Pauli) -> Pauli {
        let bits = |p: Pauli| match p {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        };
        let (a, b) = bits(self);
        let (c, d) = bits(other);
        match (a ^ c, b ^ d) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Base Pauli representatives (rows `x0`, `y0`, `z0`) and the current gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalFrame {
    pub l0: DMatrix<f64>,
    pub gauge: GaugeState,
}

impl LogicalFrame {
    pub fn new(l0: DMatrix<f64>) -> Self {
        let n = l0.ncols();
        Self { l0, gauge: GaugeState::trivial(n / 2) }
    }

    pub fn rep(&self, p: Pauli) -> DVector<f64> {
        match p.row() {
            Some(r) => self.l0.row(r).transpose(),
            None => DVector::zeros(self.l0.ncols()),
        }
    }

    /// Frame whose representatives are half-generators of a single-mode code.
    fn single_mode(s: &DMatrix<f64>) -> Self {
        let s1 = s.row(0);
        let s2 = s.row(1);
        let l0 = DMatrix::from_rows(&[s1 / 2.0, (s1 + s2) / 2.0, s2 / 2.0]);
        Self::new(l0)
    }
}

/// Named codes of the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Code {
    Square,
    /// Rectangular qubit code `√2·diag(η, 1/η)`.
    Rectangular(f64),
    /// Rectangular qunaught `diag(η, 1/η)`.
    RectangularQunaught(f64),
    Diamond,
    Hexagonal,
    Qunaught,
    Tesseract,
    D4,
    D4Qunaught,
    D2m(usize),
    /// `E8` scaled by `√a`.
    E8(f64),
    FourMode,
}

/// Aspect ratio of the rectangular base code used for the tesseract construction.
pub fn default_rect_eta() -> f64 {
    2f64.powf(-0.25)
}

impl FromStr for Code {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, param) = match s.find([':', '(']) {
            Some(i) => (&s[..i], Some(s[i + 1..].trim_end_matches(')'))),
            None => (s.as_str(), None),
        };
        let num = |default: f64| -> Result<f64> {
            match param {
                None => Ok(default),
                Some(p) => p.parse::<f64>().map_err(|_| GridError::InvalidArgument(format!("bad parameter '{p}'"))),
            }
        };
        let code = match name {
            "square" => Code::Square,
            "rectangular" | "rect" => Code::Rectangular(num(default_rect_eta())?),
            "rectangular_qunaught" | "rect_qunaught" => Code::RectangularQunaught(num(SQRT_2)?),
            "diamond" => Code::Diamond,
            "hexagonal" | "hex" => Code::Hexagonal,
            "qunaught" => Code::Qunaught,
            "tesseract" | "tess" => Code::Tesseract,
            "d4" => Code::D4,
            "d4_qunaught" => Code::D4Qunaught,
            "d2m" => {
                let m = num(2.0)?;
                if m < 2.0 || m.fract() != 0.0 {
                    return Err(GridError::InvalidArgument("d2m needs an integer m >= 2".into()));
                }
                Code::D2m(m as usize)
            }
            "e8" => Code::E8(num(2.0)?),
            "four_mode" | "fourmode" => Code::FourMode,
            _ => return Err(GridError::InvalidArgument(format!("unknown code '{s}'"))),
        };
        if let Code::Rectangular(e) | Code::RectangularQunaught(e) | Code::E8(e) = code {
            if !(e > 0.0 && e.is_finite()) {
                return Err(GridError::InvalidArgument("parameter must be positive".into()));
            }
        }
        Ok(code)
    }
}

impl Code {
    pub fn label(&self) -> String {
        match self {
            Code::Square => "square".into(),
            Code::Rectangular(e) => format!("rectangular:{e}"),
            Code::RectangularQunaught(e) => format!("rectangular_qunaught:{e}"),
            Code::Diamond => "diamond".into(),
            Code::Hexagonal => "hexagonal".into(),
            Code::Qunaught => "qunaught".into(),
            Code::Tesseract => "tesseract".into(),
            Code::D4 => "d4".into(),
            Code::D4Qunaught => "d4_qunaught".into(),
            Code::D2m(m) => format!("d2m:{m}"),
            Code::E8(a) => format!("e8:{a}"),
            Code::FourMode => "four_mode".into(),
        }
    }

    pub fn generator(&self) -> DMatrix<f64> {
        let r4 = 2f64.powf(0.25);
        let h = FRAC_1_SQRT_2;
        match *self {
            Code::Square => DMatrix::identity(2, 2) * SQRT_2,
            Code::Rectangular(e) => DMatrix::from_row_slice(2, 2, &[e, 0.0, 0.0, 1.0 / e]) * SQRT_2,
            Code::RectangularQunaught(e) => DMatrix::from_row_slice(2, 2, &[e, 0.0, 0.0, 1.0 / e]),
            Code::Diamond => DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]),
            Code::Hexagonal => {
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -0.5, 3f64.sqrt() / 2.0]) * (2.0 / 3f64.powf(0.25))
            }
            Code::Qunaught => DMatrix::identity(2, 2),
            Code::Tesseract => {
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[1.0, 0.0, 0.0, 0.0, 0.0, h, 0.0, h, 0.0, 0.0, 1.0, 0.0, 0.0, h, 0.0, -h],
                ) * r4
            }
            Code::D4 => DMatrix::from_row_slice(
                4,
                4,
                &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 1.0, -1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            ),
            Code::D4Qunaught => {
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[1.0, 0.0, 0.0, 0.0, -0.5, -h, 0.5, 0.0, 0.0, h, 0.0, h, 0.0, h, 0.0, -h],
                ) * r4
            }
            Code::D2m(m) => {
                let n = 2 * m;
                let mut s = DMatrix::zeros(n, n);
                for i in 0..n - 1 {
                    s[(i, i)] = 1.0;
                    s[(i, i + 1)] = -1.0;
                }
                s[(n - 1, n - 2)] = 1.0;
                s[(n - 1, n - 1)] = 1.0;
                s
            }
            Code::E8(a) => {
                let mut s = DMatrix::zeros(8, 8);
                s[(0, 0)] = 2.0;
                for i in 1..7 {
                    s[(i, i - 1)] = -1.0;
                    s[(i, i)] = 1.0;
                }
                for j in 0..8 {
                    s[(7, j)] = 0.5;
                }
                s * a.sqrt()
            }
            Code::FourMode => {
                let mut s = DMatrix::zeros(8, 8);
                let tess = Code::Tesseract.generator() / r4;
                s.view_mut((0, 0), (4, 4)).copy_from(&tess);
                s[(4, 4)] = 1.0;
                s[(5, 5)] = h;
                s[(5, 7)] = h;
                s[(6, 6)] = 1.0;
                let last = [0.5, h, 0.5, 0.0, 0.5, h, 0.5, 0.0];
                for (j, x) in last.iter().enumerate() {
                    s[(7, j)] = *x;
                }
                s * r4
            }
        }
    }

    /// Base Pauli representatives; `None` when they must be derived.
    fn tabulated_frame(&self, s: &DMatrix<f64>) -> Option<LogicalFrame> {
        let r4 = 2f64.powf(0.25);
        let h = FRAC_1_SQRT_2;
        let n = s.nrows();
        match *self {
            Code::Square | Code::Rectangular(_) | Code::Diamond | Code::Hexagonal => {
                Some(LogicalFrame::single_mode(s))
            }
            Code::Qunaught | Code::RectangularQunaught(_) | Code::D4Qunaught => {
                Some(LogicalFrame::new(DMatrix::zeros(3, n)))
            }
            Code::Tesseract => Some(LogicalFrame::new(
                DMatrix::from_row_slice(3, 4, &[0.5, 0.0, 0.5, 0.0, 0.5, h, 0.5, 0.0, 0.0, h, 0.0, 0.0]) * r4,
            )),
            Code::D4 | Code::D2m(_) => {
                let mut l0 = DMatrix::zeros(3, n);
                for j in 0..n {
                    l0[(0, j)] = 0.5;
                    l0[(1, j)] = 0.5;
                }
                l0[(1, 0)] = -0.5;
                l0[(2, 0)] = 1.0;
                Some(LogicalFrame::new(l0))
            }
            Code::FourMode => {
                let mut l0 = DMatrix::zeros(3, 8);
                for (j, x) in [0.5, h, 0.5].iter().enumerate() {
                    l0[(0, j)] = *x;
                }
                l0[(1, 0)] = 0.5;
                l0[(1, 2)] = 0.5;
                l0[(1, 5)] = h;
                l0[(2, 1)] = h;
                l0[(2, 5)] = h;
                Some(LogicalFrame::new(l0 * r4))
            }
            Code::E8(_) => None,
        }
    }
}

/// Looks up a named code and its base logical frame in the trivial gauge.
pub fn catalog(name: &str) -> Result<(GkpLattice, LogicalFrame)> {
    catalog_code(name.parse()?)
}

pub fn catalog_code(code: Code) -> Result<(GkpLattice, LogicalFrame)> {
    let lat = GkpLattice::named(&code.label(), code.generator())?;
    let frame = match code.tabulated_frame(&lat.s) {
        Some(f) => f,
        None => derive_frame(&lat)?,
    };
    Ok((lat, frame))
}

/// Class key of a dual vector in `Λ*/Λ`: fractional lattice coordinates
/// scaled by `det A`.
fn class_key(lat: &GkpLattice, v: &DVector<f64>) -> Vec<i64> {
    let k = int_det(&lat.a) as f64;
    lat.coords(v).iter().map(|c| ((c - c.floor()) * k).round().rem_euclid(k) as i64).collect()
}

/// Minimum-length representatives `x0`, `z0` with `ω(x0, z0) = ±1/2`, and
/// the shortest `y0` in the class of `x0 + z0`.
pub fn derive_frame(lat: &GkpLattice) -> Result<LogicalFrame> {
    if lat.d < 2 {
        return Ok(LogicalFrame::new(DMatrix::zeros(3, lat.dim())));
    }
    let radius = lat
        .s_dual
        .row_iter()
        .chain(lat.s.row_iter())
        .map(|r| r.norm())
        .fold(f64::INFINITY, f64::min)
        * 2.0
        + 1e-9;
    let mut pts = enumerate_points(lat, radius, true)?;
    pts.retain(|p| !lat.contains(p));
    pts.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    let x0 = pts.first().cloned().ok_or_else(|| GridError::Construction("no logical vector found".into()))?;
    let z0 = pts
        .iter()
        .find(|p| {
            let w = crate::symplectic::omega_form(x0.as_slice(), p.as_slice()).unwrap();
            ((w - 0.5).rem_euclid(1.0)).abs() < 1e-6 || ((w - 0.5).rem_euclid(1.0) - 1.0).abs() < 1e-6
        })
        .cloned()
        .ok_or_else(|| GridError::Construction("no anticommuting partner found".into()))?;
    let key = class_key(lat, &(&x0 + &z0));
    let y0 = pts
        .iter()
        .find(|p| class_key(lat, p) == key)
        .cloned()
        .unwrap_or_else(|| &x0 + &z0);
    Ok(LogicalFrame::new(DMatrix::from_rows(&[x0.transpose(), y0.transpose(), z0.transpose()])))
}

/// LLL reduction of the rows of `b` with Lovász parameter `delta`.
/// Returns `(R, R·b)` with `R` unimodular.
pub fn lll(b: &DMatrix<f64>, delta: f64) -> (IntMatrix, DMatrix<f64>) {
    let n = b.nrows();
    let mut basis = b.clone();
    let mut r = IntMatrix::identity(n, n);
    let gso = |basis: &DMatrix<f64>| {
        let mut bstar = basis.clone();
        let mut mu = DMatrix::<f64>::zeros(n, n);
        let mut norms = vec![0.0; n];
        for i in 0..n {
            for j in 0..i {
                mu[(i, j)] = basis.row(i).dot(&bstar.row(j)) / norms[j];
                let row = bstar.row(j) * mu[(i, j)];
                let mut bi = bstar.row_mut(i);
                bi -= row;
            }
            norms[i] = bstar.row(i).norm_squared();
        }
        (mu, norms)
    };
    let (mut mu, mut norms) = gso(&basis);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let q = mu[(k, j)].round();
            if q != 0.0 {
                let rj = basis.row(j) * q;
                let mut bk = basis.row_mut(k);
                bk -= rj;
                for c in 0..n {
                    r[(k, c)] -= (q as i64) * r[(j, c)];
                }
                for l in 0..=j {
                    let v = if l == j { 1.0 } else { mu[(j, l)] };
                    mu[(k, l)] -= q * v;
                }
            }
        }
        if norms[k] >= (delta - mu[(k, k - 1)].powi(2)) * norms[k - 1] {
            k += 1;
        } else {
            basis.swap_rows(k, k - 1);
            r.swap_rows(k, k - 1);
            let fresh = gso(&basis);
            mu = fresh.0;
            norms = fresh.1;
            k = (k - 1).max(1);
        }
    }
    (r, basis)
}

/// All points of `Λ` (or `Λ*`) with norm at most `radius`, each exactly once.
pub fn enumerate_points(lat: &GkpLattice, radius: f64, dual: bool) -> Result<Vec<DVector<f64>>> {
    if !(radius > 0.0) {
        return Err(GridError::InvalidArgument("radius must be positive".into()));
    }
    let basis = if dual { &lat.s_dual } else { &lat.s };
    enumerate_basis(basis, radius, MAX_POINTS)
}

/// Fincke–Pohst enumeration over an LLL-reduced copy of `basis`.
pub fn enumerate_basis(basis: &DMatrix<f64>, radius: f64, cap: usize) -> Result<Vec<DVector<f64>>> {
    let (_, red) = lll(basis, 0.75);
    let n = red.nrows();
    let gram = &red * red.transpose();
    // q_ii (x_i + Σ_{j>i} q_ij x_j)² decomposition.
    let mut q = gram.clone();
    for i in 0..n {
        for j in i + 1..n {
            q[(j, i)] = q[(i, j)];
            q[(i, j)] /= q[(i, i)];
        }
        for k in i + 1..n {
            for l in k..n {
                q[(k, l)] -= q[(k, i)] * q[(i, l)];
            }
        }
    }
    let bound = radius * radius * (1.0 + 1e-12) + 1e-12;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    fn rec(
        i: usize,
        budget: f64,
        q: &DMatrix<f64>,
        x: &mut Vec<i64>,
        red: &DMatrix<f64>,
        out: &mut Vec<DVector<f64>>,
        cap: usize,
    ) -> Result<()> {
        let n = x.len();
        let c: f64 = -(i + 1..n).map(|j| q[(i, j)] * x[j] as f64).sum::<f64>();
        let w = (budget.max(0.0) / q[(i, i)]).sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        for xi in lo..=hi {
            x[i] = xi;
            let rest = budget - q[(i, i)] * (xi as f64 - c).powi(2);
            if rest < 0.0 {
                continue;
            }
            if i == 0 {
                if out.len() >= cap {
                    return Err(GridError::Capacity(format!("more than {cap} lattice points")));
                }
                let xv = DVector::from_iterator(n, x.iter().map(|&v| v as f64));
                out.push(red.transpose() * xv);
            } else {
                rec(i - 1, rest, q, x, red, out, cap)?;
            }
        }
        x[i] = 0;
        Ok(())
    }
    rec(n - 1, bound, &q, &mut x, &red, &mut out, cap)?;
    Ok(out)
}

/// Shortest nonzero vector length of the lattice spanned by `basis`.
pub fn min_length(basis: &DMatrix<f64>) -> Result<f64> {
    let (_, red) = lll(basis, 0.75);
    let r = red.row_iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min);
    let pts = enumerate_basis(basis, r * (1.0 + 1e-9), MAX_POINTS)?;
    Ok(pts.iter().map(|p| p.norm()).filter(|&x| x > 1e-9).fold(f64::INFINITY, f64::min))
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0 + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingReport {
    pub min_stab_len: f64,
    /// Shortest vector of `Λ*` outside `Λ`; `None` for `d = 1`.
    pub min_pauli_len: Option<f64>,
    /// Sphere packing ratio of the stabilizer lattice.
    pub packing_ratio: f64,
    pub max_correctable_radius: f64,
    m: usize,
    d: u64,
}

impl PackingReport {
    fn scale(&self) -> f64 {
        let n = 2 * self.m;
        (self.packing_ratio / (self.d as f64 * unit_ball_volume(n))).powf(1.0 / n as f64)
    }

    /// `erfc[(Δ/(d V_2m))^{1/2m} / (σ√m)]`.
    pub fn gaussian_error_estimate(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        erfc(self.scale() / (sigma * (self.m as f64).sqrt()))
    }
}

pub fn packing_report(lat: &GkpLattice) -> Result<PackingReport> {
    let n = lat.dim();
    let min_stab_len = min_length(&lat.s)?;
    let min_pauli_len = if lat.d >= 2 { Some(min_pauli_length(lat)?) } else { None };
    let vol = lat.s.determinant().abs();
    let packing_ratio = unit_ball_volume(n) * (min_stab_len / 2.0).powi(n as i32) / vol;
    let mut rep = PackingReport {
        min_stab_len,
        min_pauli_len,
        packing_ratio,
        max_correctable_radius: 0.0,
        m: lat.m,
        d: lat.d,
    };
    rep.max_correctable_radius = 2.0 * rep.scale();
    Ok(rep)
}

/// Shortest vector of `Λ*` that is not a stabilizer.
pub fn min_pauli_length(lat: &GkpLattice) -> Result<f64> {
    let (_, red) = lll(&lat.s_dual, 0.75);
    let r = red
        .row_iter()
        .filter(|row| !lat.contains(&row.transpose()))
        .map(|row| row.norm())
        .fold(f64::INFINITY, f64::min);
    if !r.is_finite() {
        return Err(GridError::UnsupportedDimension(lat.d));
    }
    let pts = enumerate_points(lat, r * (1.0 + 1e-9), true)?;
    Ok(pts
        .iter()
        .filter(|p| !lat.contains(p))
        .map(|p| p.norm())
        .fold(f64::INFINITY, f64::min))
}

/// Logical class of `p` in `Λ*/Λ`; `None` if `p ∉ Λ*`.
pub fn pauli_class(lat: &GkpLattice, frame: &LogicalFrame, p: &DVector<f64>) -> Result<Option<Pauli>> {
    if lat.d != 2 {
        return Err(GridError::UnsupportedDimension(lat.d));
    }
    if !lat.in_dual(p) {
        return Ok(None);
    }
    for c in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
        if lat.contains(&(p - frame.rep(c))) {
            return Ok(Some(c));
        }
    }
    Err(GridError::Classification("dual vector matched no logical class".into()))
}

/// Shortest representative length of each logical class `(X, Y, Z)`.
pub fn pauli_lengths(lat: &GkpLattice, frame: &LogicalFrame) -> Result<[f64; 3]> {
    let radius = (0..3).map(|r| frame.l0.row(r).norm()).fold(0.0, f64::max) * (1.0 + 1e-9);
    let mut best = [f64::INFINITY; 3];
    for p in enumerate_points(lat, radius, true)? {
        if let Some(c) = pauli_class(lat, frame, &p)?.and_then(Pauli::row) {
            best[c] = best[c].min(p.norm());
        }
    }
    Ok(best)
}

/// Plain-data form of a lattice and frame for JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeFile {
    pub name: String,
    pub m: usize,
    #[serde(rename = "S")]
    pub s: Vec<f64>,
    #[serde(rename = "L0")]
    pub l0: Vec<f64>,
    pub mu: Vec<u8>,
    pub upsilon: Vec<u8>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

impl LatticeFile {
    pub fn from_parts(lat: &GkpLattice, frame: &LogicalFrame) -> Self {
        Self {
            name: lat.name.clone(),
            m: lat.m,
            s: row_major(&lat.s),
            l0: row_major(&frame.l0),
            mu: frame.gauge.mu.clone(),
            upsilon: frame.gauge.upsilon.to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| GridError::Parse(e.to_string()))
    }

    pub fn into_parts(self) -> Result<(GkpLattice, LogicalFrame)> {
        let n = 2 * self.m;
        if self.s.len() != n * n || self.l0.len() != 3 * n || self.mu.len() != n || self.upsilon.len() != 3 {
            return Err(GridError::Parse("lattice file has inconsistent sizes".into()));
        }
        let lat = GkpLattice::named(&self.name, DMatrix::from_row_slice(n, n, &self.s))?;
        let mut frame = LogicalFrame::new(DMatrix::from_row_slice(3, n, &self.l0));
        frame.gauge = GaugeState { mu: self.mu, upsilon: [self.upsilon[0], self.upsilon[1], self.upsilon[2]] };
        Ok((lat, frame))
    }
}

/// Rounds a matrix to integers when within [`COORD_TOL`].
pub fn integral(m: &DMatrix<f64>) -> Option<IntMatrix> {
    round_integral(m, COORD_TOL)
}
