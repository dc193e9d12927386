use gridforge::symplectic::omega;
use gridforge::{catalog, LogicalFrame, Pauli};
use gridforge_fock::codeword::{beta_from_epsilon, build_codeword, stabilizer_expectations, CodewordSpec};
use gridforge_fock::ops::Translation;
use gridforge_fock::sbs::{DecayEvent, SbsEngine};
use gridforge_fock::FockState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn converge(name: &str, dims: &[usize]) -> Vec<f64> {
    let (lat, frame) = catalog(name).unwrap();
    let mut eng = SbsEngine::new(&lat, &frame, 0.1, dims).unwrap();
    let mut state = FockState::vacuum(dims).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        eng.cycle(&mut state, &mut rng).unwrap();
    }
    assert!(!state.truncation_warning());
    stabilizer_expectations(&state, &lat, &eng.frame.gauge.mu, eng.beta()).unwrap()
}

#[test]
fn square_converges_from_vacuum() {
    let t = converge("square", &[50]);
    assert!(t.iter().all(|&x| x >= 0.9), "{t:?}");
}

#[test]
fn tesseract_converges_from_vacuum() {
    let t = converge("tesseract", &[30, 30]);
    assert!(t.iter().all(|&x| x >= 0.9), "{t:?}");
}

/// Population of the span of the two `Z̄` code words in `frame`.
fn code_space_weight(state: &FockState, name: &str, frame: &LogicalFrame, beta: f64) -> f64 {
    let (lat, _) = catalog(name).unwrap();
    let dims = state.dims.clone();
    let z0 = build_codeword(&lat, frame, &CodewordSpec::new(Pauli::Z, beta, &dims)).unwrap();
    let mut z1 = build_codeword(&lat, frame, &CodewordSpec::new(Pauli::Z, beta, &dims).negative()).unwrap();
    let ov = z0.inner(&z1);
    for (a, b) in z1.amps.iter_mut().zip(&z0.amps) {
        *a -= b * ov;
    }
    z1.normalize().unwrap();
    z0.inner(state).norm_sqr() + z1.inner(state).norm_sqr()
}

#[test]
fn one_round_preserves_code_space() {
    for (name, dims) in [("square", vec![45]), ("tesseract", vec![35, 35])] {
        let (lat, frame) = catalog(name).unwrap();
        let eps = 0.1;
        let beta = beta_from_epsilon(eps);
        for j in 0..lat.dim() {
            let mut state = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::X, beta, &dims)).unwrap();
            let mut eng = SbsEngine::new(&lat, &frame, eps, &dims).unwrap();
            eng.round(&mut state, j, None, &mut ChaCha8Rng::seed_from_u64(j as u64)).unwrap();
            let w = code_space_weight(&state, name, &eng.frame, beta);
            assert!(w >= 0.99, "{name} generator {j}: {w}");
        }
    }
}

/// Per-round contraction rate of the mean quadrature along `Ωs_1` after a
/// small translation error, fitted over rounds 1..=6 against the value after
/// 60 rounds.
fn contraction_rate(name: &str, dims: &[usize], eps: f64) -> f64 {
    let (lat, frame) = catalog(name).unwrap();
    let s = lat.generator(0);
    let dir = omega(lat.m) * &s / s.norm();
    let beta = beta_from_epsilon(eps);
    let mut state = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::Z, beta, dims)).unwrap();
    Translation::new(dims, &(&dir * 0.08)).unwrap().apply(&mut state);
    let mut eng = SbsEngine::new(&lat, &frame, eps, dims).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let l = (2.0 * std::f64::consts::PI).sqrt();
    let mut centroid = vec![];
    for _ in 0..60 {
        let x = state.expect_quadratures();
        centroid.push(x.iter().zip(dir.iter()).map(|(a, b)| a * b).sum::<f64>() / l);
        eng.round(&mut state, 0, None, &mut rng).unwrap();
    }
    let settled = centroid[59];
    let pts: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, (centroid[k] - settled).ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 6.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 6.0;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    -slope
}

#[test]
fn correction_rate_tracks_prediction() {
    let predicted = |name: &str, eps: f64| {
        let (lat, _) = catalog(name).unwrap();
        lat.generator(0).norm() * std::f64::consts::PI * eps / std::f64::consts::SQRT_2
    };
    for (name, dims, eps) in [("square", vec![80], 0.025), ("tesseract", vec![50, 50], 0.05)] {
        let ratio = contraction_rate(name, &dims, eps) / predicted(name, eps);
        assert!((0.5..=2.0).contains(&ratio), "{name} at ε = {eps}: ratio {ratio}");
    }
    // Larger codes (smaller ε) correct more slowly.
    assert!(contraction_rate("square", &[80], 0.025) < contraction_rate("square", &[60], 0.05));
}

#[test]
fn zero_decay_rate_never_injects() {
    let (lat, frame) = catalog("square").unwrap();
    let eng = SbsEngine::new(&lat, &frame, 0.1, &[30]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!((0..1000).all(|_| eng.sample_decay(0, &mut rng).is_none()));
    assert_eq!(eng.decay_probability(0), 0.0);
}

#[test]
fn decay_probability_and_ct_weights() {
    let (lat, frame) = catalog("square").unwrap();
    let mut eng = SbsEngine::new(&lat, &frame, 0.1, &[30]).unwrap();
    eng.ancilla_decay = 0.2;
    // |s| = √2: t_s = t_□ and t_tot = 1.2 t_□.
    assert!((eng.decay_probability(0) - (1.0 - (-0.2f64 * 1.2 / 2.0).exp())).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0usize; 3];
    let n = 60_000;
    for _ in 0..n {
        let ev = eng.draw_decay(&mut rng);
        assert!((0.0..1.0).contains(&ev.eta));
        counts[ev.which] += 1;
    }
    let expected = [0.1 / 1.2, 1.0 / 1.2, 0.1 / 1.2];
    for k in 0..3 {
        assert!((counts[k] as f64 / n as f64 - expected[k]).abs() < 0.01, "{counts:?}");
    }
}

#[test]
fn decay_at_start_or_end_of_big_translation_is_harmless() {
    // A flip at η = 0 or η = 1 only swaps the branch labels of a CT, which
    // the reset absorbs; the state stays in the code space.
    let (lat, frame) = catalog("square").unwrap();
    let eps = 0.1;
    let beta = beta_from_epsilon(eps);
    let dims = [45];
    for eta in [0.0, 1.0] {
        let mut state = build_codeword(&lat, &frame, &CodewordSpec::new(Pauli::Z, beta, &dims)).unwrap();
        let mut eng = SbsEngine::new(&lat, &frame, eps, &dims).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        eng.round(&mut state, 0, Some(DecayEvent { which: 1, eta }), &mut rng).unwrap();
        for _ in 0..5 {
            eng.cycle(&mut state, &mut rng).unwrap();
        }
        let t = stabilizer_expectations(&state, &lat, &eng.frame.gauge.mu, beta).unwrap();
        assert!(t.iter().all(|&x| x > 0.85), "η = {eta}: {t:?}");
    }
}

#[test]
fn round_rejects_attached_ancilla() {
    let (lat, frame) = catalog("square").unwrap();
    let mut eng = SbsEngine::new(&lat, &frame, 0.1, &[20]).unwrap();
    let mut state = FockState::vacuum(&[20]).unwrap().with_ancilla();
    assert!(eng.round(&mut state, 0, None, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
}
