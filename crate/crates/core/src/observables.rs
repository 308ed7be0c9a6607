//! Momentum-space amplitude and uncertainty product, the classical velocity
//! density diagnostic, and the effective potential with its Newton's-law
//! check.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid::{simpson, GridDomain};
use crate::params::PhysicalParams;
use crate::wavefunctions::{DensityProfile, WaveFunction};

pub const DEFAULT_MOMENTUM_POINTS: usize = 1024;
/// Default momentum half-width, in units of `hbar / L`.
pub const DEFAULT_MOMENTUM_HALF_WIDTH: f64 = 40.0;
pub const DEFAULT_DENSITY_CUTOFF: f64 = 1e-4;
/// Window mass below which a momentum table is flagged as truncated.
pub const MOMENTUM_MASS_FLOOR: f64 = 0.999;

/// `Phi(mu)` on a symmetric momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumAmplitude {
    pub mu: Vec<f64>,
    pub values: Vec<Complex64>,
    pub hbar: f64,
    /// `int |Phi|^2 dmu` over the window before renormalization.
    pub captured_mass: f64,
    /// Set when the window holds less than 99.9% of the mass.
    pub truncated: bool,
}

impl MomentumAmplitude {
    pub fn spacing(&self) -> f64 {
        self.mu[1] - self.mu[0]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Fourier integral of `values` sampled at the nodes of `domain`, evaluated on
/// the uniform grid `k0 + j dk` for `j < n`: `sum_x w(x) f(x) exp(sign i k x)`.
/// Phase factors advance by complex rotation, reseeded every 256 steps.
fn fourier_on_grid(
    domain: &GridDomain,
    values: &[Complex64],
    k0: f64,
    dk: f64,
    n: usize,
    sign: f64,
) -> Vec<Complex64> {
    let h = domain.spacing();
    let m = values.len();
    // Composite Simpson weights on the position grid.
    let weights: Vec<f64> = if m % 2 == 1 {
        (0..m)
            .map(|i| {
                let w = if i == 0 || i + 1 == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect()
    } else {
        (0..m)
            .map(|i| if i == 0 || i + 1 == m { 0.5 * h } else { h })
            .collect()
    };
    let xs: Vec<f64> = domain.nodes().collect();
    let weighted: Vec<Complex64> = values.iter().zip(&weights).map(|(v, w)| v * *w).collect();
    let step: Vec<Complex64> = xs
        .iter()
        .map(|&x| Complex64::from_polar(1.0, sign * dk * x))
        .collect();
    let mut phase: Vec<Complex64> = Vec::new();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        if j % 256 == 0 {
            let k = k0 + j as f64 * dk;
            phase = xs
                .iter()
                .map(|&x| Complex64::from_polar(1.0, sign * k * x))
                .collect();
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in phase.iter().zip(&weighted) {
            acc += p * w;
        }
        out.push(acc);
        for (p, s) in phase.iter_mut().zip(&step) {
            *p *= s;
        }
    }
    out
}

/// `Phi(mu) = (2 pi hbar)^{-1/2} int psi(x) exp(-i mu x / hbar) dx` on
/// `n_mu` points spanning `[-mu_max, mu_max]`, renormalized on that grid.
pub fn momentum_amplitude(
    wf: &WaveFunction,
    n_mu: usize,
    mu_max: f64,
    hbar: f64,
) -> Result<MomentumAmplitude> {
    if n_mu < 64 {
        return Err(invalid(format!(
            "momentum grid needs at least 64 points, got {n_mu}"
        )));
    }
    if !(mu_max.is_finite() && mu_max > 0.0 && hbar.is_finite() && hbar > 0.0) {
        return Err(invalid("momentum half-width and hbar must be positive"));
    }
    let dmu = 2.0 * mu_max / (n_mu - 1) as f64;
    let mu: Vec<f64> = (0..n_mu)
        .map(|j| {
            if j + 1 == n_mu {
                mu_max
            } else {
                -mu_max + j as f64 * dmu
            }
        })
        .collect();
    let psi = wf.node_amplitudes();
    let pref = (2.0 * PI * hbar).sqrt().recip();
    let mut values: Vec<Complex64> =
        fourier_on_grid(wf.domain(), &psi, -mu_max / hbar, dmu / hbar, n_mu, -1.0)
            .into_iter()
            .map(|v| v * pref)
            .collect();
    let probs: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    let captured_mass = simpson(&probs, dmu);
    let scale = captured_mass.sqrt().recip();
    for v in values.iter_mut() {
        *v *= scale;
    }
    Ok(MomentumAmplitude {
        mu,
        values,
        hbar,
        captured_mass,
        truncated: captured_mass < MOMENTUM_MASS_FLOOR,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertainty {
    pub dx: f64,
    pub dmu: f64,
    pub product: f64,
}

fn spread(points: &[f64], weights: &[f64], h: f64) -> f64 {
    let norm = simpson(weights, h);
    let m1: Vec<f64> = points.iter().zip(weights).map(|(x, w)| x * w).collect();
    let m2: Vec<f64> = points.iter().zip(weights).map(|(x, w)| x * x * w).collect();
    let mean = simpson(&m1, h) / norm;
    let var = simpson(&m2, h) / norm - mean * mean;
    var.max(0.0).sqrt()
}

/// Standard deviations of position under `|psi|^2` and momentum under
/// `|Phi|^2`, and their product.
pub fn uncertainty_product(wf: &WaveFunction, phi: &MomentumAmplitude) -> Uncertainty {
    let xs: Vec<f64> = wf.domain().nodes().collect();
    let dx = spread(&xs, &wf.node_densities(), wf.domain().spacing());
    let dmu = spread(&phi.mu, &phi.probabilities(), phi.spacing());
    Uncertainty {
        dx,
        dmu,
        product: dx * dmu,
    }
}

/// Minimum over a global phase of the sup-norm distance between `psi` and
/// the inverse transform of `Phi`, on the position grid.
pub fn phase_roundtrip(wf: &WaveFunction, phi: &MomentumAmplitude) -> f64 {
    let domain = *wf.domain();
    let hbar = phi.hbar;
    let n = domain.n_points();
    // Swap roles: integrate over mu, evaluate on the x grid.
    let mu_domain = GridDomain::new(phi.mu[0], *phi.mu.last().unwrap(), phi.mu.len())
        .expect("momentum grid has at least 64 points");
    let back: Vec<Complex64> = fourier_on_grid(
        &mu_domain,
        &phi.values,
        domain.x_min() / hbar,
        domain.spacing() / hbar,
        n,
        1.0,
    )
    .into_iter()
    .map(|v| v * (2.0 * PI * hbar).sqrt().recip())
    .collect();
    let psi = wf.node_amplitudes();
    let overlap: Complex64 = back.iter().zip(&psi).map(|(b, p)| b.conj() * p).sum();
    let align = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    back.iter()
        .zip(&psi)
        .map(|(b, p)| (b * align - p).norm())
        .fold(0.0, f64::max)
}

/// Value of the classical velocity density at a given speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityPdf {
    Value(f64),
    /// `d|psi|/dx` vanishes at a preimage, or `v = 0`.
    Singular,
    /// No position moves at this velocity.
    NoPreimage,
}

/// `p_V(v) = sum over preimages x of |psi|^3 / (2 |v d|psi|/dx|)`, with
/// `v(x) = 1/(T |psi(x)|^2)` on the forward pass.
pub fn classical_velocity_pdf(
    wf: &WaveFunction,
    params: &PhysicalParams,
    v: f64,
) -> Result<VelocityPdf> {
    if v == 0.0 {
        return Ok(VelocityPdf::Singular);
    }
    if !(v > 0.0) || !v.is_finite() {
        return Ok(VelocityPdf::NoPreimage);
    }
    let target = 1.0 / (params.period * v);
    let domain = *wf.domain();
    let dens = wf.node_densities();
    let f = |x: f64| wf.density(x).map(|p| p - target);
    let scale = target.max(1e-300);
    let touch_tol = 1e-9 * scale;
    let mut preimages: Vec<f64> = Vec::new();
    let mut singular = false;
    let n = dens.len();
    for i in 0..n {
        let fi = dens[i] - target;
        if fi == 0.0 {
            preimages.push(domain.node(i));
        }
        if i + 1 < n {
            let fj = dens[i + 1] - target;
            if fi * fj < 0.0 {
                let (mut a, mut b) = (domain.node(i), domain.node(i + 1));
                let mut fa = fi;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let fm = f(m)?;
                    if fm * fa > 0.0 {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                preimages.push(0.5 * (a + b));
            }
        }
        // Tangential contact at an interior extremum between or at nodes.
        if i > 0 && i + 1 < n && fi != 0.0 {
            let (l, c, r) = (dens[i - 1], dens[i], dens[i + 1]);
            let extremum = (c >= l && c >= r) || (c <= l && c <= r);
            if extremum {
                let curv = l - 2.0 * c + r;
                let shift = if curv != 0.0 {
                    0.5 * (l - r) / curv
                } else {
                    0.0
                };
                let xe = domain.node(i) + shift.clamp(-1.0, 1.0) * domain.spacing();
                if (wf.density(xe)? - target).abs() <= touch_tol {
                    singular = true;
                }
            }
        }
    }
    if singular {
        return Ok(VelocityPdf::Singular);
    }
    if preimages.is_empty() {
        return Ok(VelocityPdf::NoPreimage);
    }
    let mut total = 0.0;
    for x in preimages {
        let m = wf.amplitude(x)?.norm();
        match wf.modulus_derivative(x)? {
            Some(d) if d != 0.0 => total += m.powi(3) / (2.0 * (v * d).abs()),
            _ => return Ok(VelocityPdf::Singular),
        }
    }
    Ok(VelocityPdf::Value(total))
}

/// `V(x) = -m / (2 T^2) p(x)^{-2}` at the grid nodes; `None` where the density
/// falls below the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePotentialTable {
    pub domain: GridDomain,
    pub values: Vec<Option<f64>>,
    pub cutoff_density: f64,
}

impl EffectivePotentialTable {
    pub fn finite(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.domain
            .nodes()
            .zip(&self.values)
            .filter_map(|(x, v)| v.map(|v| (x, v)))
    }
}

/// `-m / (2 T^2 p^2)`.
pub fn potential_from_density(p: f64, params: &PhysicalParams) -> f64 {
    -params.mass / (2.0 * params.period * params.period) / (p * p)
}

fn potential_table<D: DensityProfile + ?Sized>(
    density: &D,
    params: &PhysicalParams,
    cutoff: f64,
) -> Result<EffectivePotentialTable> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(invalid(format!(
            "density cutoff must be positive, got {cutoff}"
        )));
    }
    let values = density
        .node_densities()
        .into_iter()
        .map(|p| (p >= cutoff).then(|| potential_from_density(p, params)))
        .collect();
    Ok(EffectivePotentialTable {
        domain: *density.domain(),
        values,
        cutoff_density: cutoff,
    })
}

/// Effective potential of a stationary state, `-m/(2T^2) |psi|^{-4}`.
pub fn effective_potential(
    wf: &WaveFunction,
    params: &PhysicalParams,
    cutoff: f64,
) -> Result<EffectivePotentialTable> {
    potential_table(wf, params, cutoff)
}

/// Effective potential of a time-marginal density, `-m/(2T^2) p_X^{-2}`.
pub fn effective_potential_marginal<D: DensityProfile + ?Sized>(
    marginal: &D,
    params: &PhysicalParams,
    cutoff: f64,
) -> Result<EffectivePotentialTable> {
    potential_table(marginal, params, cutoff)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonCheck {
    /// `-dV/dx` by centered difference.
    pub force: f64,
    /// `m dv/dt = -2 m d|psi|/dx / (T^2 |psi|^5)`.
    pub mass_acceleration: f64,
    pub residual: f64,
}

impl NewtonCheck {
    /// Residual relative to the force magnitude (absolute when the force is 0).
    pub fn relative(&self) -> f64 {
        if self.force == 0.0 {
            self.residual
        } else {
            self.residual / self.force.abs()
        }
    }
}

/// Compares the finite-difference force of the effective potential at `x`
/// against the acceleration implied by the trajectory. `None` when the
/// stencil touches a density below `cutoff`.
pub fn newton_residual(
    wf: &WaveFunction,
    params: &PhysicalParams,
    x: f64,
    h: f64,
    cutoff: f64,
) -> Result<Option<NewtonCheck>> {
    if !(h > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let domain = wf.domain();
    if !domain.contains(x - h) || !domain.contains(x + h) {
        return Ok(None);
    }
    let (pl, p0, pr) = (wf.density(x - h)?, wf.density(x)?, wf.density(x + h)?);
    if pl < cutoff || p0 < cutoff || pr < cutoff {
        return Ok(None);
    }
    let force =
        -(potential_from_density(pr, params) - potential_from_density(pl, params)) / (2.0 * h);
    let modulus = p0.sqrt();
    let dmod = match wf.modulus_derivative(x)? {
        Some(d) => d,
        None => return Ok(None),
    };
    let t2 = params.period * params.period;
    let mass_acceleration = -2.0 * params.mass * dmod / (t2 * modulus.powi(5));
    Ok(Some(NewtonCheck {
        force,
        mass_acceleration,
        residual: (force - mass_acceleration).abs(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunctions::BoxConvention;

    fn ground() -> WaveFunction {
        WaveFunction::box_eigenstate(1, 1.0, BoxConvention::Centered).unwrap()
    }

    /// Closed-form transform of sqrt(2) cos(pi x) on [-1/2, 1/2], hbar = 1.
    fn ground_phi(mu: f64) -> f64 {
        let pre = (2.0 / (2.0 * PI)).sqrt();
        if (mu.abs() - PI).abs() < 1e-9 {
            return pre * 0.5;
        }
        pre * 2.0 * PI * (0.5 * mu).cos() / (PI * PI - mu * mu)
    }

    #[test]
    fn momentum_matches_closed_form() {
        let wf = ground();
        let phi = momentum_amplitude(&wf, 1024, 40.0, 1.0).unwrap();
        assert!(!phi.truncated);
        assert!((phi.captured_mass - 1.0).abs() < 1e-3);
        let scale = phi.captured_mass.sqrt();
        for (mu, v) in phi.mu.iter().zip(&phi.values) {
            assert!((v.re * scale - ground_phi(*mu)).abs() < 1e-8, "mu={mu}");
            assert!(v.im.abs() < 1e-8);
        }
        // Even modulus.
        let n = phi.values.len();
        for j in 0..n / 2 {
            assert!((phi.values[j].norm() - phi.values[n - 1 - j].norm()).abs() < 1e-10);
        }
        // The closed form 4 pi cos^2(mu/2) / (pi^2 - mu^2)^2 is largest at mu = 0.
        let probs = phi.probabilities();
        let (jmax, _) =
            probs.iter().enumerate().fold(
                (0, 0.0),
                |acc, (j, &p)| if p > acc.1 { (j, p) } else { acc },
            );
        assert!(phi.mu[jmax].abs() < phi.spacing());
    }

    #[test]
    fn plane_wave_momentum_concentrates() {
        let k = 20.0 * PI;
        let domain = GridDomain::new(0.0, 1.0, 4097).unwrap();
        let wf = WaveFunction::from_fn(domain, |x| Complex64::from_polar(1.0, k * x)).unwrap();
        let phi = momentum_amplitude(&wf, 2048, 150.0, 1.0).unwrap();
        let probs = phi.probabilities();
        let (jmax, _) =
            probs.iter().enumerate().fold(
                (0, 0.0),
                |acc, (j, &p)| if p > acc.1 { (j, p) } else { acc },
            );
        assert!((phi.mu[jmax] - k).abs() < 2.0 * phi.spacing());
    }

    #[test]
    fn narrow_window_is_flagged() {
        let phi = momentum_amplitude(&ground(), 128, 2.0, 1.0).unwrap();
        assert!(phi.truncated);
        assert!(momentum_amplitude(&ground(), 32, 40.0, 1.0).is_err());
    }

    #[test]
    fn gaussian_is_near_minimal() {
        let sigma = 1.0;
        let domain = GridDomain::new(-12.0, 12.0, 4097).unwrap();
        let wf = WaveFunction::from_fn(domain, |x| {
            Complex64::new((-x * x / (4.0 * sigma * sigma)).exp(), 0.0)
        })
        .unwrap();
        let phi = momentum_amplitude(&wf, 1024, 40.0, 1.0).unwrap();
        let u = uncertainty_product(&wf, &phi);
        assert!((u.product - 0.5).abs() < 0.01, "{:?}", u);
    }

    #[test]
    fn velocity_pdf_cases() {
        let wf = ground();
        let p = PhysicalParams::default();
        assert_eq!(
            classical_velocity_pdf(&wf, &p, 0.5).unwrap(),
            VelocityPdf::Singular
        );
        assert_eq!(
            classical_velocity_pdf(&wf, &p, 0.4).unwrap(),
            VelocityPdf::NoPreimage
        );
        assert_eq!(
            classical_velocity_pdf(&wf, &p, 0.0).unwrap(),
            VelocityPdf::Singular
        );
        assert_eq!(
            classical_velocity_pdf(&wf, &p, -1.0).unwrap(),
            VelocityPdf::NoPreimage
        );
        match classical_velocity_pdf(&wf, &p, 1.0).unwrap() {
            VelocityPdf::Value(v) => assert!((v - 1.0 / PI).abs() < 1e-8, "{v}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn potential_values() {
        let wf = ground();
        let p = PhysicalParams::default();
        let table = effective_potential(&wf, &p, DEFAULT_DENSITY_CUTOFF).unwrap();
        let centre = table.values[2048].unwrap();
        assert!((centre + 0.125).abs() < 1e-10);
        assert!(table.values[0].is_none() && table.values[4096].is_none());
        for (_, v) in table.finite() {
            assert!(v < 0.0 && v <= centre);
        }
        // Approaching the wall the potential falls without bound.
        let near = table.values[20].unwrap();
        let nearer = table.values[15].unwrap();
        assert!(nearer < near && near < -1e3);
    }

    #[test]
    fn uniform_marginal_potential() {
        let domain = GridDomain::new(0.0, 1.0, 65).unwrap();
        let m =
            crate::nonstationary::MarginalDensity::from_node_values(domain, vec![3.0; 65]).unwrap();
        let table = effective_potential_marginal(&m, &PhysicalParams::default(), 1e-4).unwrap();
        for v in &table.values {
            assert!((v.unwrap() + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_examples() {
        let wf = ground();
        let p = PhysicalParams::default();
        let at_centre = newton_residual(&wf, &p, 0.0, 1e-4, 1e-4).unwrap().unwrap();
        assert!(at_centre.residual < 1e-8);
        let c = newton_residual(&wf, &p, 0.1, 1e-4, 1e-4).unwrap().unwrap();
        assert!(c.relative() < 1e-5, "{c:?}");
        let r1 = newton_residual(&wf, &p, 0.1, 1e-2, 1e-4)
            .unwrap()
            .unwrap()
            .residual;
        let r2 = newton_residual(&wf, &p, 0.1, 5e-3, 1e-4)
            .unwrap()
            .unwrap()
            .residual;
        assert!((r1 / r2 - 4.0).abs() < 0.1, "ratio {}", r1 / r2);
        assert!(newton_residual(&wf, &p, 0.4999, 1e-3, 1e-4)
            .unwrap()
            .is_none());
    }
}
