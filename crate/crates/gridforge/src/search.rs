//! Integral two-mode lattices by Diophantine search: rotations
//! `G(2,3,θ1)·G(2,4,θ2)` of the hypercubic and `D4` qunaughts, scaled by `d^{1/4}`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{GridError, Result};
use crate::lattice::{Code, GkpLattice};
use crate::symplectic::{gate_matrix, Gate};

#[derive(Debug, Clone)]
pub struct SearchSolution {
    pub d: u64,
    pub abc: (i64, i64, i64),
    pub angles: (f64, f64),
    pub s: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Hypercubic,
    D4,
}

/// `d` is a sum of three squares iff it is not of the form `4^f (8g + 7)`.
pub fn legendre_representable(d: u64) -> bool {
    if d == 0 {
        return true;
    }
    let mut n = d;
    while n.is_multiple_of(4) {
        n /= 4;
    }
    n % 8 != 7
}

fn rotated(base: &DMatrix<f64>, d: u64, t1: f64, t2: f64) -> DMatrix<f64> {
    let g1 = gate_matrix(2, Gate::Givens { i: 2, j: 3, theta: t1 }).expect("valid indices");
    let g2 = gate_matrix(2, Gate::Givens { i: 2, j: 4, theta: t2 }).expect("valid indices");
    base * g1.entries * g2.entries * (d as f64).powf(0.25)
}

/// Angles with `cosθ2 (cosθ1, sinθ1) ∝ (u, v)` and `sinθ2 = w`; `θ1 = 0` when
/// `cosθ2 = 0`.
fn angles(u: f64, v: f64, w: f64) -> (f64, f64) {
    let t2 = w.clamp(-1.0, 1.0).asin();
    let t1 = if u.abs() < 1e-12 && v.abs() < 1e-12 { 0.0 } else { v.atan2(u) };
    (t1, t2)
}

/// Rejects a candidate whose lattice is not integral with the target `d`.
fn validated(sol: SearchSolution) -> Result<SearchSolution> {
    let lat = GkpLattice::build(sol.s.clone())?;
    if lat.d != sol.d {
        return Err(GridError::Construction(format!("solution {:?} gives d = {}, expected {}", sol.abc, lat.d, sol.d)));
    }
    Ok(sol)
}

/// Solutions of `a² + b² + c² = d`; canonical `a ≥ b ≥ c ≥ 0` unless
/// `full_orbit`.
pub fn search_tesseract(d: u64, full_orbit: bool) -> Result<Vec<SearchSolution>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let r = (d as f64).sqrt().floor() as i64 + 1;
    let base = DMatrix::identity(4, 4);
    let rd = (d as f64).sqrt();
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                if (a * a + b * b + c * c) as u64 != d {
                    continue;
                }
                if !full_orbit && !(a >= b && b >= c && c >= 0) {
                    continue;
                }
                let (t1, t2) = angles(a as f64, b as f64, c as f64 / rd);
                let s = rotated(&base, d, t1, t2);
                out.push(validated(SearchSolution { d, abc: (a, b, c), angles: (t1, t2), s })?);
            }
        }
    }
    Ok(out)
}

/// Solutions of `3a² + 4ab + 4b² + c² = 4d` with `|a|, |b|, |c| ≤ 2√d`;
/// canonical `c ≥ 0` and `(a, b) ≥ (−a, −b)` unless `full_orbit`.
///
/// The rotated `D4` qunaught is integral when `(X, √2·Y, Z) =
/// √d (cosθ1 cosθ2, sinθ1 cosθ2, sinθ2)` with `X = −(a + 2b)/2`,
/// `Y = b − (a + 2b)/2`, `Z = c/2`.
pub fn search_d4(d: u64, full_orbit: bool) -> Result<Vec<SearchSolution>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let r = (2.0 * (d as f64).sqrt()).floor() as i64;
    let base = Code::D4Qunaught.generator();
    let rd = (d as f64).sqrt();
    let target = 4 * d as i64;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                if 3 * a * a + 4 * a * b + 4 * b * b + c * c != target {
                    continue;
                }
                if !full_orbit && (c < 0 || (a, b) < (-a, -b)) {
                    continue;
                }
                let s_ = -(a + 2 * b) as f64;
                let x = s_ / 2.0;
                let y = b as f64 + s_ / 2.0;
                let z = c as f64 / 2.0;
                let (t1, t2) = angles(x, 2f64.sqrt() * y, z / rd);
                let s = rotated(&base, d, t1, t2);
                out.push(validated(SearchSolution { d, abc: (a, b, c), angles: (t1, t2), s })?);
            }
        }
    }
    Ok(out)
}

pub fn search(family: Family, d: u64, full_orbit: bool) -> Result<Vec<SearchSolution>> {
    match family {
        Family::Hypercubic => search_tesseract(d, full_orbit),
        Family::D4 => search_d4(d, full_orbit),
    }
}

/// Solutions for every `d` in `1..=d_max`, searched in parallel.
pub fn search_range(family: Family, d_max: u64, full_orbit: bool) -> Result<Vec<(u64, Vec<SearchSolution>)>> {
    (1..=d_max).into_par_iter().map(|d| Ok((d, search(family, d, full_orbit)?))).collect()
}
