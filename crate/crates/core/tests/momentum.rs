use std::f64::consts::PI;

use qtraj::observables::{momentum_amplitude, phase_roundtrip, uncertainty_product};
use qtraj::{
    BoxConvention, Complex64, GridDomain, PhysicalParams, SampleOptions, TrajectoryEngine,
    WaveFunction,
};

/// The box ground state has a kink at each wall, so `|Phi|` decays like
/// `mu^-2` and the truncated inverse transform misses `O(1/mu_max)`.
#[test]
fn box_round_trip_error_falls_like_inverse_cutoff() {
    let wf = WaveFunction::box_eigenstate(1, 1.0, BoxConvention::Centered).unwrap();
    let err = |n_mu: usize, mu_max: f64| {
        phase_roundtrip(&wf, &momentum_amplitude(&wf, n_mu, mu_max, 1.0).unwrap())
    };
    let (a, b, c) = (err(1024, 40.0), err(2048, 80.0), err(4096, 160.0));
    // Tail bound: (4 / pi) sqrt(2) / mu_max.
    assert!(a < 1.8 / 40.0, "{a}");
    assert!((1.6..=2.5).contains(&(a / b)), "{}", a / b);
    assert!((1.6..=2.5).contains(&(b / c)), "{}", b / c);
}

#[test]
fn smooth_complex_state_round_trips() {
    let domain = GridDomain::new(-1.0, 1.0, 2049).unwrap();
    let wf = WaveFunction::from_fn(domain, |x| {
        Complex64::from_polar((-x * x / (2.0 * 0.1f64.powi(2))).exp(), 8.0 * x)
    })
    .unwrap();
    let phi = momentum_amplitude(&wf, 1024, 60.0, 1.0).unwrap();
    let err = phase_roundtrip(&wf, &phi);
    assert!(err < 1e-3, "{err}");
    // Mean momentum sits at hbar k, spread at hbar / (2 sigma).
    let u = uncertainty_product(&wf, &phi);
    assert!((u.product - 0.5).abs() < 1e-3, "{}", u.product);
}

/// A position-dependent phase moves `Phi` but leaves the trajectory alone.
#[test]
fn trajectory_is_blind_to_phase_while_momentum_is_not() {
    let domain = GridDomain::new(-0.5, 0.5, 1025).unwrap();
    let plain = WaveFunction::from_fn(domain, |x| Complex64::new((PI * x).cos(), 0.0)).unwrap();
    let kicked =
        WaveFunction::from_fn(domain, |x| Complex64::from_polar((PI * x).cos(), 20.0 * x)).unwrap();
    let opts = SampleOptions {
        n: 501,
        ..Default::default()
    };
    let a = TrajectoryEngine::new(&plain, PhysicalParams::default())
        .sample(&opts)
        .unwrap();
    let b = TrajectoryEngine::new(&kicked, PhysicalParams::default())
        .sample(&opts)
        .unwrap();
    let worst = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| (p.x - q.x).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
    let pa = momentum_amplitude(&plain, 1024, 80.0, 1.0)
        .unwrap()
        .probabilities();
    let pb = momentum_amplitude(&kicked, 1024, 80.0, 1.0)
        .unwrap()
        .probabilities();
    let shift = pa
        .iter()
        .zip(&pb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(shift > 0.01, "{shift}");
}
