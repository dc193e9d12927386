//! Classical dissipation model: a point in phase space relaxes along
//! `ė = −∇Φ`, `Φ = ½|q|²`, `q = 2π·frac(SΩe)`, and the logical class of the
//! translation error is read off the fixed point it reaches.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GridError, Result};
use crate::lattice::{pauli_class, GkpLattice, LogicalFrame, Pauli};
use crate::symplectic::omega;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    /// Euler step in rescaled time (the `l²` prefactor is absorbed).
    pub step: f64,
    pub max_steps: usize,
    pub convergence_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { step: 0.01, max_steps: 100_000, convergence_tol: 1e-9 }
    }
}

impl FlowConfig {
    pub fn new(step: f64, max_steps: usize, convergence_tol: f64) -> Result<Self> {
        if !(step > 0.0) || !(convergence_tol > 0.0) {
            return Err(GridError::InvalidArgument("flow step and tolerance must be positive".into()));
        }
        Ok(FlowConfig { step, max_steps, convergence_tol })
    }
}

/// Peak width of a finite-energy code word with envelope parameter `ε`.
pub fn sigma_from_epsilon(epsilon: f64) -> f64 {
    ((2.0 * epsilon).asinh() / 2.0).tanh().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmearConfig {
    pub epsilon: f64,
    /// Quadrature width in physical units; translation-unit errors are
    /// smeared by `sigma / l`.
    pub sigma: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl SmearConfig {
    pub fn from_epsilon(epsilon: f64, mc_samples: usize, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0) || mc_samples == 0 {
            return Err(GridError::InvalidArgument("need epsilon > 0 and at least one sample".into()));
        }
        Ok(SmearConfig { epsilon, sigma: sigma_from_epsilon(epsilon), mc_samples, seed })
    }
}

/// Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    /// Samples whose flow did not settle; counted as errors.
    pub stalled: usize,
}

impl Estimate {
    fn from_counts(errors: usize, stalled: usize, samples: usize, seed: u64) -> Self {
        let p = errors as f64 / samples as f64;
        Estimate { estimate: p, stderr: (p * (1.0 - p) / samples as f64).sqrt(), samples, seed, stalled }
    }
}

/// Precomputed matrices for relaxing many points on one lattice.
#[derive(Debug, Clone)]
pub struct Relaxer {
    s_omega: DMatrix<f64>,
    s_omega_t: DMatrix<f64>,
    s_omega_inv: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    cfg: FlowConfig,
}

/// Result of a relaxation: the fixed point and its integer syndrome `SΩM`.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub point: DVector<f64>,
    pub cell: DVector<f64>,
}

fn centered(w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let n = w.map(|x| (x - 0.5).ceil());
    (w - &n, n)
}

impl Relaxer {
    pub fn new(lat: &GkpLattice, cfg: FlowConfig) -> Result<Self> {
        let s_omega = &lat.s * omega(lat.m);
        let s_omega_inv = s_omega.clone().try_inverse().ok_or_else(|| GridError::Degenerate("SΩ is singular".into()))?;
        let a_inv = lat.a.map(|x| x as f64).try_inverse().ok_or_else(|| GridError::Degenerate("A is singular".into()))?;
        Ok(Relaxer { s_omega_t: s_omega.transpose(), s_omega, s_omega_inv, a_inv, cfg })
    }

    /// Once `|frac(SΩe)| < 1/2` the rounding cell can no longer change (the
    /// residual obeys `ẇ = −SSᵀw` and shrinks in norm), so the limit is the
    /// cell's fixed point and is returned directly.
    pub fn relax(&self, e: &DVector<f64>) -> Result<FixedPoint> {
        if e.iter().any(|x| !x.is_finite()) {
            return Err(GridError::InvalidArgument("non-finite translation error".into()));
        }
        let mut x = e.clone();
        for _ in 0..self.cfg.max_steps {
            let (r, n) = centered(&(&self.s_omega * &x));
            let grad = &self.s_omega_t * &r;
            if r.norm() < 0.5 * (1.0 - 1e-9) || grad.norm() < self.cfg.convergence_tol {
                return Ok(FixedPoint { point: &self.s_omega_inv * &n, cell: n });
            }
            x -= grad * self.cfg.step;
        }
        Err(GridError::FlowStalled { steps: self.cfg.max_steps, last: x.iter().copied().collect() })
    }

    /// Whether a dual point with syndrome `n` lies in the stabilizer lattice.
    pub fn is_stabilizer(&self, n: &DVector<f64>) -> bool {
        (&self.a_inv * n).iter().all(|c| (c - c.round()).abs() < 1e-6)
    }

    fn sample_fails(&self, centre: &DVector<f64>, sigma: f64, rng: &mut ChaCha8Rng) -> std::result::Result<bool, ()> {
        let width = sigma / (2.0 * PI).sqrt();
        let r = centre + DVector::from_fn(centre.len(), |_, _| {
            let z: f64 = StandardNormal.sample(rng);
            width * z
        });
        match self.relax(&r) {
            Ok(fp) => Ok(!self.is_stabilizer(&fp.cell)),
            Err(_) => Err(()),
        }
    }
}

fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Fixed point `M(e)` of the modular gradient flow started at `e`.
pub fn flow_relax(lat: &GkpLattice, e: &DVector<f64>, cfg: &FlowConfig) -> Result<DVector<f64>> {
    Ok(Relaxer::new(lat, *cfg)?.relax(e)?.point)
}

/// Logical class applied when the flow corrects `e`.
pub fn classify_error(lat: &GkpLattice, frame: &LogicalFrame, e: &DVector<f64>, cfg: &FlowConfig) -> Result<Pauli> {
    let relaxer = Relaxer::new(lat, *cfg)?;
    classify_with(&relaxer, lat, frame, e)
}

fn classify_with(relaxer: &Relaxer, lat: &GkpLattice, frame: &LogicalFrame, e: &DVector<f64>) -> Result<Pauli> {
    let fp = relaxer.relax(e)?;
    let (r, n) = centered(&(&relaxer.s_omega * &fp.point));
    let nearest = &relaxer.s_omega_inv * &n;
    if r.norm() > 1e-6 || (&nearest - &fp.point).norm() > 10.0 * relaxer.cfg.convergence_tol.max(1e-12) {
        return Err(GridError::Classification("fixed point is not a dual-lattice point".into()));
    }
    pauli_class(lat, frame, &nearest)?.ok_or_else(|| GridError::Classification("fixed point outside the dual lattice".into()))
}

/// `P(error | e)`: the chance that a Gaussian-smeared point around `e`
/// relaxes to a dual point outside the stabilizer lattice.
pub fn smeared_error_prob(lat: &GkpLattice, e: &DVector<f64>, smear: &SmearConfig, cfg: &FlowConfig) -> Result<Estimate> {
    let relaxer = Relaxer::new(lat, *cfg)?;
    let outcomes: Vec<std::result::Result<bool, ()>> = (0..smear.mc_samples)
        .into_par_iter()
        .map(|i| relaxer.sample_fails(e, smear.sigma, &mut stream_rng(smear.seed, i)))
        .collect();
    Ok(tally(&outcomes, smear))
}

fn tally(outcomes: &[std::result::Result<bool, ()>], smear: &SmearConfig) -> Estimate {
    let stalled = outcomes.iter().filter(|o| o.is_err()).count();
    let errors = outcomes.iter().filter(|o| !matches!(o, Ok(false))).count();
    Estimate::from_counts(errors, stalled, smear.mc_samples, smear.seed)
}

/// Route of the controlled translation along which an ancilla decay leaves
/// the error.
#[derive(Debug, Clone, PartialEq)]
pub enum DecayPath {
    Straight,
    /// Intermediate corners between `0` and `s_j`.
    Zigzag(Vec<DVector<f64>>),
}

fn polyline_point(corners: &[DVector<f64>], t: f64) -> DVector<f64> {
    let lengths: Vec<f64> = corners.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
    let total: f64 = lengths.iter().sum();
    let mut s = t * total;
    for (w, len) in corners.windows(2).zip(&lengths) {
        if s <= *len || std::ptr::eq(len, lengths.last().unwrap()) {
            let f = if *len > 0.0 { (s / len).min(1.0) } else { 0.0 };
            return &w[0] + (&w[1] - &w[0]) * f;
        }
        s -= len;
    }
    corners[corners.len() - 1].clone()
}

/// `∫₀¹ dη P(error | point(η))` with `η` uniform in arc length along the
/// path from `0` to `s_j` (1-based `j`). Each sample draws a stratified `η`
/// and one smeared point.
pub fn ancilla_decay_error_prob(
    lat: &GkpLattice,
    j: usize,
    smear: &SmearConfig,
    path: &DecayPath,
    cfg: &FlowConfig,
) -> Result<Estimate> {
    if j == 0 || j > lat.dim() {
        return Err(GridError::InvalidArgument(format!("stabilizer index {j} out of range 1..={}", lat.dim())));
    }
    let mut corners = vec![DVector::zeros(lat.dim())];
    if let DecayPath::Zigzag(w) = path {
        if w.iter().any(|p| p.len() != lat.dim()) {
            return Err(GridError::Dimension("waypoint length differs from 2m".into()));
        }
        corners.extend(w.iter().cloned());
    }
    corners.push(lat.generator(j - 1));
    let relaxer = Relaxer::new(lat, *cfg)?;
    let n = smear.mc_samples;
    let outcomes: Vec<std::result::Result<bool, ()>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(smear.seed, i);
            let u: f64 = rand::Rng::random(&mut rng);
            let centre = polyline_point(&corners, (i as f64 + u) / n as f64);
            relaxer.sample_fails(&centre, smear.sigma, &mut rng)
        })
        .collect();
    Ok(tally(&outcomes, smear))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub u: f64,
    pub v: f64,
    /// `I`, `X`, `Y`, `Z` or `boundary`.
    pub label: String,
}

/// Classification of `u·s_i + v·s_j` over `[−0.25, 1.25]²`, row-major in `v`
/// then `u` (1-based plane indices).
pub fn error_map_grid(
    lat: &GkpLattice,
    frame: &LogicalFrame,
    plane: (usize, usize),
    resolution: usize,
    cfg: &FlowConfig,
) -> Result<Vec<GridCell>> {
    if resolution < 8 {
        return Err(GridError::InvalidArgument("grid resolution must be at least 8".into()));
    }
    let (i, j) = plane;
    if i == 0 || j == 0 || i > lat.dim() || j > lat.dim() || i == j {
        return Err(GridError::InvalidArgument(format!("invalid plane ({i}, {j})")));
    }
    let relaxer = Relaxer::new(lat, *cfg)?;
    let (si, sj) = (lat.generator(i - 1), lat.generator(j - 1));
    let coord = |k: usize| -0.25 + 1.5 * k as f64 / (resolution - 1) as f64;
    (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (u, v) = (coord(idx % resolution), coord(idx / resolution));
            let e = &si * u + &sj * v;
            let label = match classify_with(&relaxer, lat, frame, &e) {
                Ok(p) => p.to_string(),
                Err(GridError::FlowStalled { .. }) => "boundary".to_string(),
                Err(err) => return Err(err),
            };
            Ok(GridCell { u, v, label })
        })
        .collect()
}

/// Eigenvalues of `l²·ΩᵀSᵀSΩ`, non-decreasing: the relaxation rates of the
/// flow linearized inside one cell.
pub fn hessian_rates(lat: &GkpLattice) -> Vec<f64> {
    let so = &lat.s * omega(lat.m);
    let h = so.transpose() * so * (2.0 * PI);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;

    fn cfg() -> FlowConfig {
        FlowConfig::default()
    }

    #[test]
    fn sigma_formula() {
        assert!((sigma_from_epsilon(0.044) - 0.20956).abs() < 1e-4);
        assert!((sigma_from_epsilon(1e-6) - 1e-3).abs() < 1e-6);
    }

    #[test]
    fn origin_is_fixed() {
        let (lat, _) = catalog("tesseract").unwrap();
        let m = flow_relax(&lat, &DVector::zeros(4), &cfg()).unwrap();
        assert!(m.norm() < 1e-12);
    }

    #[test]
    fn square_code_stabilizer_and_logical() {
        let (lat, frame) = catalog("square").unwrap();
        let s1 = lat.generator(0);
        assert_eq!(classify_error(&lat, &frame, &s1, &cfg()).unwrap(), Pauli::I);
        assert_eq!(classify_error(&lat, &frame, &(&s1 * 0.5), &cfg()).unwrap(), Pauli::X);
        assert_eq!(classify_error(&lat, &frame, &(&s1 * 0.6), &cfg()).unwrap(), Pauli::X);
        assert_eq!(classify_error(&lat, &frame, &(&s1 * 0.2), &cfg()).unwrap(), Pauli::I);
        assert_eq!(classify_error(&lat, &frame, &(&s1 * 0.8), &cfg()).unwrap(), Pauli::I);
    }

    #[test]
    fn flow_from_near_separatrix_settles() {
        let (lat, _) = catalog("square").unwrap();
        let e = lat.generator(0) * 0.25 + lat.generator(1) * 0.01;
        let m = flow_relax(&lat, &e, &cfg()).unwrap();
        assert!(lat.in_dual(&m));
    }

    #[test]
    fn tesseract_isthmus() {
        let (lat, frame) = catalog("tesseract").unwrap();
        for j in 0..4 {
            for k in 1..100 {
                if k == 50 {
                    continue;
                }
                let e = lat.generator(j) * (k as f64 / 100.0);
                assert_eq!(classify_error(&lat, &frame, &e, &cfg()).unwrap(), Pauli::I, "j = {j}, eta = {k}/100");
            }
        }
    }

    #[test]
    fn d4_direct_path_along_s3_fails() {
        let (lat, frame) = catalog("d4").unwrap();
        let e = lat.generator(2) * 0.6;
        assert_ne!(classify_error(&lat, &frame, &e, &cfg()).unwrap(), Pauli::I);
    }

    #[test]
    fn smeared_probabilities_at_half_generator() {
        let smear = SmearConfig::from_epsilon(0.01, 4000, 7).unwrap();
        let (tess, _) = catalog("tesseract").unwrap();
        let p = smeared_error_prob(&tess, &(tess.generator(0) * 0.5), &smear, &cfg()).unwrap();
        assert!((p.estimate - 0.5).abs() < 0.05, "{p:?}");
        let (d4, _) = catalog("d4").unwrap();
        let p = smeared_error_prob(&d4, &(d4.generator(0) * 0.5), &smear, &cfg()).unwrap();
        assert!((p.estimate - 0.75).abs() < 0.05, "{p:?}");
        let p = smeared_error_prob(&d4, &DVector::zeros(4), &smear, &cfg()).unwrap();
        assert_eq!(p.estimate, 0.0);
    }

    #[test]
    fn smeared_estimate_is_reproducible() {
        let (lat, _) = catalog("square").unwrap();
        let smear = SmearConfig::from_epsilon(0.05, 500, 3).unwrap();
        let e = lat.generator(0) * 0.3;
        let a = smeared_error_prob(&lat, &e, &smear, &cfg()).unwrap();
        let b = smeared_error_prob(&lat, &e, &smear, &cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn square_decay_is_half() {
        let (lat, _) = catalog("square").unwrap();
        for eps in [0.02, 0.2] {
            let smear = SmearConfig::from_epsilon(eps, 4000, 11).unwrap();
            let p = ancilla_decay_error_prob(&lat, 1, &smear, &DecayPath::Straight, &cfg()).unwrap();
            assert!((p.estimate - 0.5).abs() < 0.04, "eps {eps}: {p:?}");
        }
    }

    #[test]
    fn grid_has_requested_shape() {
        let (lat, frame) = catalog("square").unwrap();
        let g = error_map_grid(&lat, &frame, (1, 2), 8, &cfg()).unwrap();
        assert_eq!(g.len(), 64);
        assert!(g.iter().all(|c| ["I", "X", "Y", "Z", "boundary"].contains(&c.label.as_str())));
        assert!(error_map_grid(&lat, &frame, (1, 2), 7, &cfg()).is_err());
    }

    #[test]
    fn square_grid_topology() {
        let (lat, frame) = catalog("square").unwrap();
        let g = error_map_grid(&lat, &frame, (1, 2), 13, &cfg()).unwrap();
        let at = |u: f64, v: f64| {
            g.iter().find(|c| (c.u - u).abs() < 1e-9 && (c.v - v).abs() < 1e-9).unwrap().label.clone()
        };
        assert_eq!(at(0.0, 0.0), "I");
        assert_eq!(at(1.0, 1.0), "I");
        assert_eq!(at(0.5, 0.0), "X");
        assert_eq!(at(0.0, 0.5), "Z");
        assert_eq!(at(0.5, 0.5), "Y");
    }

    #[test]
    fn hessian_oracles() {
        let l2 = 2.0 * PI;
        let (sq, _) = catalog("square").unwrap();
        for ev in hessian_rates(&sq) {
            assert!((ev - 2.0 * l2).abs() < 1e-9);
        }
        let (tess, _) = catalog("tesseract").unwrap();
        assert!((hessian_rates(&tess)[0] - l2 * 2f64.sqrt()).abs() < 1e-9);
        let (d4, _) = catalog("d4").unwrap();
        assert!((hessian_rates(&d4)[0] - l2 * (2.0 - 3f64.sqrt())).abs() < 1e-9);
    }

    fn fit_ratio(lat: &GkpLattice, j: usize, path: &DecayPath, eps: f64) -> f64 {
        let smear = SmearConfig::from_epsilon(eps, 20000, 5).unwrap();
        ancilla_decay_error_prob(lat, j, &smear, path, &cfg()).unwrap().estimate / eps.sqrt()
    }

    #[test]
    fn tesseract_decay_trend() {
        let (lat, _) = catalog("tesseract").unwrap();
        let smear = SmearConfig::from_epsilon(0.044, 20000, 5).unwrap();
        let p = ancilla_decay_error_prob(&lat, 1, &smear, &DecayPath::Straight, &cfg()).unwrap();
        assert!((p.estimate - 0.11).abs() < 0.01, "{p:?}");
        for eps in [0.01, 0.03, 0.1] {
            let r = fit_ratio(&lat, 1, &DecayPath::Straight, eps);
            assert!((r / 0.53 - 1.0).abs() < 0.1, "eps {eps}: {r}");
        }
    }

    #[test]
    fn d4_zigzag_recovers_isthmus() {
        let (lat, frame) = catalog("d4").unwrap();
        let s1 = lat.generator(0);
        let s3 = lat.generator(2);
        let via = -&s1;
        for k in 1..100 {
            let t = k as f64 / 100.0;
            for e in [&via * t, &via + (&s3 - &via) * t] {
                if (t - 0.5).abs() > 1e-9 {
                    assert_eq!(classify_error(&lat, &frame, &e, &cfg()).unwrap(), Pauli::I, "t = {t}");
                }
            }
        }
        for eps in [0.01, 0.1] {
            let r = fit_ratio(&lat, 3, &DecayPath::Zigzag(vec![via.clone()]), eps);
            assert!((r / 0.94 - 1.0).abs() < 0.1, "eps {eps}: {r}");
            let r = fit_ratio(&lat, 4, &DecayPath::Zigzag(vec![s1.clone()]), eps);
            assert!((r / 0.94 - 1.0).abs() < 0.1, "eps {eps}: {r}");
        }
        let straight = fit_ratio(&lat, 3, &DecayPath::Straight, 0.01);
        assert!(straight > 3.0);
    }

    #[test]
    fn square_transition_sharpens() {
        let (lat, _) = catalog("square").unwrap();
        let s1 = lat.generator(0);
        for eps in [0.05, 0.005] {
            let smear = SmearConfig::from_epsilon(eps, 4000, 9).unwrap();
            let at = |eta: f64| smeared_error_prob(&lat, &(&s1 * eta), &smear, &cfg()).unwrap().estimate;
            assert!((at(0.25) - 0.5).abs() < 0.05);
            assert!((at(0.75) - 0.5).abs() < 0.05);
            assert!(at(0.2) < 0.5 && at(0.3) > 0.5);
        }
        let sharp = SmearConfig::from_epsilon(0.001, 4000, 9).unwrap();
        assert!(smeared_error_prob(&lat, &(&s1 * 0.2), &sharp, &cfg()).unwrap().estimate < 0.01);
        assert!(smeared_error_prob(&lat, &(&s1 * 0.3), &sharp, &cfg()).unwrap().estimate > 0.99);
    }

    #[test]
    fn smeared_probability_is_continuous() {
        let (lat, _) = catalog("tesseract").unwrap();
        let smear = SmearConfig::from_epsilon(0.044, 4000, 13).unwrap();
        let s1 = lat.generator(0);
        let mut prev = None;
        for k in 30..=70 {
            let p = smeared_error_prob(&lat, &(&s1 * (k as f64 / 100.0)), &smear, &cfg()).unwrap().estimate;
            if let Some(q) = prev {
                assert!((p - q as f64).abs() < 0.08, "jump at {k}: {q} -> {p}");
            }
            prev = Some(p);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn dual_points_are_fixed(c in proptest::collection::vec(-4i64..=4, 4), code in 0usize..3) {
                let name = ["tesseract", "d4", "square_pair"][code];
                let lat = if name == "square_pair" {
                    let (sq, _) = catalog("square").unwrap();
                    GkpLattice::build(crate::symplectic::direct_sum(&[&sq.s, &sq.s])).unwrap()
                } else {
                    catalog(name).unwrap().0
                };
                let v = lat.s_dual.transpose() * DVector::from_iterator(4, c.iter().map(|&x| x as f64));
                let m = flow_relax(&lat, &v, &cfg()).unwrap();
                prop_assert!((m - v).norm() < 1e-9);
            }

            #[test]
            fn class_is_lattice_periodic(e in proptest::collection::vec(-1.0f64..1.0, 4), c in proptest::collection::vec(-3i64..=3, 4)) {
                let (lat, frame) = catalog("tesseract").unwrap();
                let e = DVector::from_vec(e);
                let shifted = &e + lat.point(&c);
                match (classify_error(&lat, &frame, &e, &cfg()), classify_error(&lat, &frame, &shifted, &cfg())) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                    (Err(_), _) | (_, Err(_)) => {}
                }
            }
        }
    }
}
