//! Time-marginal position density of a time-dependent state: the density
//! that a trajectory sampled uniformly over an averaging window must
//! reproduce.

use crate::error::{invalid, Result};
use crate::grid::{simpson, GridDomain};
use crate::interp::MonotoneCubic;
use crate::params::PhysicalParams;
use crate::trajectory::{sample_trajectory, SampleOptions, Trajectory};
use crate::wavefunctions::{DensityProfile, TimeDependentWaveFunction, WaveFunction};

/// Default number of time quadrature nodes.
pub const DEFAULT_TIME_NODES: usize = 257;

/// `p_X(x) = (1/T_avg) int_{t_start}^{t_start + T_avg} |Psi(x, t)|^2 dt`,
/// tabulated on the state's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDensity {
    domain: GridDomain,
    values: Vec<f64>,
    interp: MonotoneCubic,
    window: (f64, f64),
}

impl MarginalDensity {
    fn from_values(domain: GridDomain, values: Vec<f64>, window: (f64, f64)) -> Self {
        let interp = MonotoneCubic::pchip(domain.nodes().collect(), values.clone());
        Self {
            domain,
            values,
            interp,
            window,
        }
    }

    /// The marginal of a stationary state: its density, node for node.
    pub fn from_stationary(wf: &WaveFunction) -> Self {
        Self::from_values(*wf.domain(), wf.node_densities(), (0.0, f64::INFINITY))
    }

    /// Density table from arbitrary non-negative node values, renormalized.
    pub fn from_node_values(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.n_points() {
            return Err(invalid("marginal table length does not match the grid"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("marginal density must be finite and non-negative"));
        }
        let norm = simpson(&values, domain.spacing());
        if !(norm > 0.0) {
            return Err(invalid("marginal density integrates to zero"));
        }
        let values = values.into_iter().map(|v| v / norm).collect();
        Ok(Self::from_values(domain, values, (0.0, f64::INFINITY)))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Averaging window `(t_start, t_start + T_avg)`.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn norm(&self) -> f64 {
        simpson(&self.values, self.domain.spacing())
    }
}

impl DensityProfile for MarginalDensity {
    fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn density_at(&self, x: f64) -> Result<f64> {
        let x = self.domain.check(x)?;
        let (k, t) = self.domain.locate(x);
        if t == 0.0 {
            return Ok(self.values[k]);
        }
        if t == 1.0 {
            return Ok(self.values[k + 1]);
        }
        Ok(self.interp.eval_in_cell(k, x).max(0.0))
    }

    fn node_densities(&self) -> Vec<f64> {
        self.values.clone()
    }
}

/// Time average of `|Psi(x, t)|^2` over `[t_start, t_start + t_avg]` by
/// composite Simpson with `n_t` (odd, >= 9) nodes at every grid position,
/// then renormalized in `x`.
pub fn time_marginal(
    psi: &TimeDependentWaveFunction,
    t_start: f64,
    t_avg: f64,
    n_t: usize,
) -> Result<MarginalDensity> {
    if !(t_avg.is_finite() && t_avg > 0.0) || !t_start.is_finite() {
        return Err(invalid(format!(
            "averaging window must be finite and positive, got {t_avg}"
        )));
    }
    if n_t < 9 || n_t.is_multiple_of(2) {
        return Err(invalid(format!(
            "time quadrature needs an odd count >= 9, got {n_t}"
        )));
    }
    let domain = *psi.domain();
    let ht = t_avg / (n_t - 1) as f64;
    let times: Vec<f64> = (0..n_t).map(|i| t_start + i as f64 * ht).collect();
    // Node amplitudes of every component, and their phase factors at every time.
    let amps: Vec<Vec<_>> = psi
        .components()
        .iter()
        .map(|c| c.state.node_amplitudes())
        .collect();
    let factors: Vec<Vec<_>> = psi
        .components()
        .iter()
        .map(|c| {
            times
                .iter()
                .map(|&t| {
                    c.coefficient
                        * num_complex::Complex64::from_polar(1.0, -c.energy * t / psi.hbar())
                })
                .collect()
        })
        .collect();
    let mut raw = Vec::with_capacity(domain.n_points());
    let mut column = vec![0.0; n_t];
    for i in 0..domain.n_points() {
        for (j, slot) in column.iter_mut().enumerate() {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for (a, f) in amps.iter().zip(&factors) {
                acc += f[j] * a[i];
            }
            *slot = acc.norm_sqr();
        }
        raw.push(simpson(&column, ht) / t_avg);
    }
    let norm = simpson(&raw, domain.spacing());
    if !(norm > 0.0) {
        return Err(invalid("time-marginal density integrates to zero"));
    }
    let values = raw.into_iter().map(|v| v / norm).collect();
    Ok(MarginalDensity::from_values(
        domain,
        values,
        (t_start, t_start + t_avg),
    ))
}

/// Trajectory whose time-occupation density is the marginal.
pub fn trajectory_from_marginal(
    marginal: &MarginalDensity,
    params: PhysicalParams,
    opts: &SampleOptions,
) -> Result<Trajectory> {
    sample_trajectory(marginal, params, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunctions::{box_energy, BoxConvention};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn pair() -> (WaveFunction, WaveFunction, TimeDependentWaveFunction, f64) {
        let s1 = WaveFunction::box_eigenstate(1, 1.0, BoxConvention::Centered).unwrap();
        let s2 = WaveFunction::box_eigenstate(2, 1.0, BoxConvention::Centered).unwrap();
        let (e1, e2) = (box_energy(1, 1.0, 1.0, 1.0), box_energy(2, 1.0, 1.0, 1.0));
        let r = 0.5f64.sqrt();
        let psi = TimeDependentWaveFunction::superposition(
            vec![s1.clone(), s2.clone()],
            vec![Complex64::new(r, 0.0); 2],
            vec![e1, e2],
            1.0,
        )
        .unwrap();
        (s1, s2, psi, 2.0 * PI / (e2 - e1))
    }

    #[test]
    fn stationary_reduction() {
        let wf = WaveFunction::box_eigenstate(3, 1.0, BoxConvention::Wall).unwrap();
        let psi = TimeDependentWaveFunction::stationary(wf.clone(), 3.0, 1.0).unwrap();
        let m = time_marginal(&psi, 0.0, 1.0, 33).unwrap();
        let worst = m
            .values()
            .iter()
            .zip(wf.node_densities())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn full_beat_cancels_cross_term() {
        let (s1, s2, psi, beat) = pair();
        let m = time_marginal(&psi, 0.0, beat, DEFAULT_TIME_NODES).unwrap();
        let worst = m
            .domain()
            .nodes()
            .zip(m.values())
            .map(|(x, v)| {
                let expected = 0.5 * (s1.density(x).unwrap() + s2.density(x).unwrap());
                (v - expected).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        assert!((m.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn half_beat_keeps_cross_term() {
        let (s1, s2, psi, beat) = pair();
        // The cross term goes as cos(omega t), so a half beat starting at t = 0
        // averages it away; start a quarter beat in.
        let m = time_marginal(&psi, 0.25 * beat, 0.5 * beat, DEFAULT_TIME_NODES).unwrap();
        let worst = m
            .domain()
            .nodes()
            .zip(m.values())
            .map(|(x, v)| (v - 0.5 * (s1.density(x).unwrap() + s2.density(x).unwrap())).abs())
            .fold(0.0, f64::max);
        assert!(worst > 0.1, "{worst}");
    }

    #[test]
    fn window_additivity() {
        let (_, _, psi, beat) = pair();
        let tau = 0.25 * beat;
        let whole = time_marginal(&psi, 0.0, 2.0 * tau, 257).unwrap();
        let a = time_marginal(&psi, 0.0, tau, 257).unwrap();
        let b = time_marginal(&psi, tau, tau, 257).unwrap();
        let worst = whole
            .values()
            .iter()
            .zip(a.values().iter().zip(b.values()))
            .map(|(w, (x, y))| (w - 0.5 * (x + y)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn rejects_bad_quadrature() {
        let (_, _, psi, _) = pair();
        assert!(time_marginal(&psi, 0.0, 1.0, 8).is_err());
        assert!(time_marginal(&psi, 0.0, 1.0, 7).is_err());
        assert!(time_marginal(&psi, 0.0, 1.0, 256).is_err());
        assert!(time_marginal(&psi, 0.0, 0.0, 257).is_err());
    }

    #[test]
    fn stationary_marginal_trajectory_matches_direct() {
        let wf = WaveFunction::box_eigenstate(1, 1.0, BoxConvention::Centered).unwrap();
        let m = MarginalDensity::from_stationary(&wf);
        let opts = SampleOptions {
            n: 257,
            ..Default::default()
        };
        let a = trajectory_from_marginal(&m, PhysicalParams::default(), &opts).unwrap();
        let b = sample_trajectory(&wf, PhysicalParams::default(), &opts).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (p, q) in a.samples.iter().zip(&b.samples) {
            assert_eq!(p.x, q.x);
        }
    }
}
