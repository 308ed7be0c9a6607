//! Catalog of analytic one-dimensional states, ingestion of tabulated ones,
//! and eigenstate superpositions.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid::{simpson, GridDomain, DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
use crate::interp::MonotoneCubic;

/// Anything that supplies a normalized position density on a grid domain.
///
/// Stationary wavefunctions (`|psi|^2`) and time-marginal densities both
/// implement this; the trajectory engine only ever sees this trait.
pub trait DensityProfile {
    fn domain(&self) -> &GridDomain;

    /// Density at `x`, or out-of-domain.
    fn density_at(&self, x: f64) -> Result<f64>;

    /// Density at every grid node.
    fn node_densities(&self) -> Vec<f64> {
        let d = *self.domain();
        d.nodes()
            .map(|x| self.density_at(x).unwrap_or(0.0))
            .collect()
    }
}

/// Origin convention for box eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxConvention {
    /// Box on `[-L/2, L/2]`; cosines for odd `n`, sines for even `n`.
    Centered,
    /// Box on `[0, L]`; sines for every `n`.
    Wall,
}

impl fmt::Display for BoxConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoxConvention::Centered => f.write_str("centered"),
            BoxConvention::Wall => f.write_str("wall"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Amplitude {
    Box {
        n: u32,
        length: f64,
        convention: BoxConvention,
    },
    PlaneWave {
        k: f64,
        length: f64,
    },
    Tabulated {
        re: MonotoneCubic,
        im: MonotoneCubic,
        scale: f64,
    },
}

/// A normalized complex amplitude on a grid domain. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    domain: GridDomain,
    amplitude: Amplitude,
    phase: Complex64,
    label: String,
}

/// `sin(pi y)`, exactly zero at integer `y`.
fn sin_pi(y: f64) -> f64 {
    let n = y.round();
    let s = (PI * (y - n)).sin();
    if n.rem_euclid(2.0) == 1.0 {
        -s
    } else {
        s
    }
}

/// `cos(pi y)`, exactly zero at half-integer `y`.
fn cos_pi(y: f64) -> f64 {
    sin_pi(y + 0.5)
}

/// Energy of box level `n`: `n^2 pi^2 hbar^2 / (2 m L^2)`.
pub fn box_energy(n: u32, length: f64, mass: f64, hbar: f64) -> f64 {
    let n = n as f64;
    n * n * PI * PI * hbar * hbar / (2.0 * mass * length * length)
}

impl WaveFunction {
    /// Eigenstate `n` of the infinite square well of width `length`, on the
    /// default 4097-point grid.
    pub fn box_eigenstate(n: u32, length: f64, convention: BoxConvention) -> Result<Self> {
        Self::box_eigenstate_on(n, length, convention, DEFAULT_GRID_POINTS)
    }

    pub fn box_eigenstate_on(
        n: u32,
        length: f64,
        convention: BoxConvention,
        n_points: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(invalid("box level n must be >= 1"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(format!(
                "box length must be positive, got {length}"
            )));
        }
        let domain = match convention {
            BoxConvention::Centered => GridDomain::new(-0.5 * length, 0.5 * length, n_points)?,
            BoxConvention::Wall => GridDomain::new(0.0, length, n_points)?,
        };
        Ok(Self {
            domain,
            amplitude: Amplitude::Box {
                n,
                length,
                convention,
            },
            phase: Complex64::new(1.0, 0.0),
            label: format!("box n={n} L={length} {convention}"),
        })
    }

    /// `exp(i k x) / sqrt(L)` on `[0, L]`.
    pub fn plane_wave(k: f64, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) || !k.is_finite() {
            return Err(invalid("plane wave needs finite k and positive length"));
        }
        Ok(Self {
            domain: GridDomain::new(0.0, length, DEFAULT_GRID_POINTS)?,
            amplitude: Amplitude::PlaneWave { k, length },
            phase: Complex64::new(1.0, 0.0),
            label: format!("plane wave k={k} L={length}"),
        })
    }

    /// State from samples. Real and imaginary parts are interpolated
    /// separately with monotone cubics; the result is renormalized on its
    /// grid. Uniformly spaced samples define the grid directly, otherwise the
    /// default grid spans the sample range.
    pub fn tabulated(xs: &[f64], values: &[Complex64]) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(invalid("positions and values differ in length"));
        }
        if xs.len() < MIN_GRID_POINTS {
            return Err(invalid(format!(
                "tabulated state needs at least {MIN_GRID_POINTS} samples, got {}",
                xs.len()
            )));
        }
        if xs.iter().any(|x| !x.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("tabulated state contains non-finite entries"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tabulated positions must be strictly increasing"));
        }
        if values.iter().all(|v| v.norm_sqr() == 0.0) {
            return Err(invalid("tabulated state is identically zero"));
        }
        let (x0, x1) = (xs[0], xs[xs.len() - 1]);
        let h = (x1 - x0) / (xs.len() - 1) as f64;
        let uniform = xs
            .iter()
            .enumerate()
            .all(|(i, &x)| (x - (x0 + i as f64 * h)).abs() <= 1e-9 * h);
        let n_points = if uniform {
            xs.len()
        } else {
            DEFAULT_GRID_POINTS
        };
        let domain = GridDomain::new(x0, x1, n_points)?;
        let re = MonotoneCubic::pchip(xs.to_vec(), values.iter().map(|v| v.re).collect());
        let im = MonotoneCubic::pchip(xs.to_vec(), values.iter().map(|v| v.im).collect());
        let mut wf = Self {
            domain,
            amplitude: Amplitude::Tabulated { re, im, scale: 1.0 },
            phase: Complex64::new(1.0, 0.0),
            label: format!("tabulated ({} samples)", xs.len()),
        };
        let norm = wf.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("tabulated state has zero norm on its grid"));
        }
        if let Amplitude::Tabulated { scale, .. } = &mut wf.amplitude {
            *scale = norm.sqrt().recip();
        }
        Ok(wf)
    }

    /// Tabulates an arbitrary amplitude function on `domain` and ingests it.
    pub fn from_fn(domain: GridDomain, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let xs: Vec<f64> = domain.nodes().collect();
        let values: Vec<Complex64> = xs.iter().map(|&x| f(x)).collect();
        Self::tabulated(&xs, &values)
    }

    /// Same state multiplied by the unit phase `exp(i theta)`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let mut out = self.clone();
        out.phase = self.phase * Complex64::from_polar(1.0, theta);
        out.label = format!("{} * exp(i {theta})", self.label);
        out
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True for catalog states whose derivative is known in closed form.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.amplitude, Amplitude::Tabulated { .. })
    }

    /// Box level and convention, when this is a box eigenstate.
    pub fn box_level(&self) -> Option<(u32, f64, BoxConvention)> {
        match self.amplitude {
            Amplitude::Box {
                n,
                length,
                convention,
            } => Some((n, length, convention)),
            _ => None,
        }
    }

    fn raw(&self, x: f64) -> Complex64 {
        match &self.amplitude {
            Amplitude::Box {
                n,
                length,
                convention,
            } => {
                let a = (2.0 / length).sqrt();
                let y = *n as f64 * x / length;
                let v = match convention {
                    BoxConvention::Centered if n % 2 == 1 => cos_pi(y),
                    _ => sin_pi(y),
                };
                Complex64::new(a * v, 0.0)
            }
            Amplitude::PlaneWave { k, length } => {
                Complex64::from_polar(length.sqrt().recip(), k * x)
            }
            Amplitude::Tabulated { re, im, scale } => {
                Complex64::new(re.eval(x), im.eval(x)) * *scale
            }
        }
    }

    fn raw_derivative(&self, x: f64) -> Complex64 {
        match &self.amplitude {
            Amplitude::Box {
                n,
                length,
                convention,
            } => {
                let a = (2.0 / length).sqrt();
                let kn = *n as f64 * PI / length;
                let y = *n as f64 * x / length;
                let v = match convention {
                    BoxConvention::Centered if n % 2 == 1 => -kn * sin_pi(y),
                    _ => kn * cos_pi(y),
                };
                Complex64::new(a * v, 0.0)
            }
            Amplitude::PlaneWave { k, .. } => self.raw(x) * Complex64::new(0.0, *k),
            Amplitude::Tabulated { re, im, scale } => {
                Complex64::new(re.derivative(x), im.derivative(x)) * *scale
            }
        }
    }

    /// `psi(x)`.
    pub fn amplitude(&self, x: f64) -> Result<Complex64> {
        let x = self.domain.check(x)?;
        Ok(self.raw(x) * self.phase)
    }

    /// `d psi / dx`; closed form for catalog states, interpolant derivative
    /// for tabulated ones.
    pub fn derivative(&self, x: f64) -> Result<Complex64> {
        let x = self.domain.check(x)?;
        Ok(self.raw_derivative(x) * self.phase)
    }

    /// `|psi(x)|^2`. Independent of any global phase, bit for bit.
    pub fn density(&self, x: f64) -> Result<f64> {
        let x = self.domain.check(x)?;
        Ok(self.raw_density(x))
    }

    fn raw_density(&self, x: f64) -> f64 {
        match &self.amplitude {
            Amplitude::Box {
                n,
                length,
                convention,
            } => {
                let y = *n as f64 * x / length;
                let v = match convention {
                    BoxConvention::Centered if n % 2 == 1 => cos_pi(y),
                    _ => sin_pi(y),
                };
                2.0 / length * v * v
            }
            Amplitude::PlaneWave { length, .. } => length.recip(),
            Amplitude::Tabulated { .. } => self.raw(x).norm_sqr(),
        }
    }

    /// `d|psi|/dx = Re(psi* psi') / |psi|`; `None` at an exact node.
    pub fn modulus_derivative(&self, x: f64) -> Result<Option<f64>> {
        let psi = self.amplitude(x)?;
        let dpsi = self.derivative(x)?;
        let m = psi.norm();
        Ok(if m == 0.0 {
            None
        } else {
            Some((psi.conj() * dpsi).re / m)
        })
    }

    /// Amplitudes at every grid node.
    pub fn node_amplitudes(&self) -> Vec<Complex64> {
        self.domain
            .nodes()
            .map(|x| self.raw(x) * self.phase)
            .collect()
    }

    /// Composite-Simpson norm `int |psi|^2 dx` on the grid.
    pub fn norm(&self) -> f64 {
        let d: Vec<f64> = self.domain.nodes().map(|x| self.raw_density(x)).collect();
        simpson(&d, self.domain.spacing())
    }

    /// `int conj(self) other dx` on this state's grid.
    pub fn overlap(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.domain != other.domain {
            return Err(invalid("overlap needs states on the same grid"));
        }
        let v: Vec<Complex64> = self
            .node_amplitudes()
            .into_iter()
            .zip(other.node_amplitudes())
            .map(|(a, b)| a.conj() * b)
            .collect();
        Ok(simpson(&v, self.domain.spacing()))
    }
}

impl DensityProfile for WaveFunction {
    fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn density_at(&self, x: f64) -> Result<f64> {
        self.density(x)
    }

    fn node_densities(&self) -> Vec<f64> {
        self.domain.nodes().map(|x| self.raw_density(x)).collect()
    }
}

/// One term `c_n psi_n(x) exp(-i E_n t / hbar)` of a superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub state: WaveFunction,
    pub coefficient: Complex64,
    pub energy: f64,
}

/// `Psi(x, t) = sum_n c_n psi_n(x) exp(-i E_n t / hbar)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDependentWaveFunction {
    components: Vec<Component>,
    hbar: f64,
}

impl TimeDependentWaveFunction {
    /// Validates equal lengths, unit coefficient norm (1e-10), a shared grid,
    /// and pairwise orthonormality of the states (1e-6).
    pub fn superposition(
        states: Vec<WaveFunction>,
        coefficients: Vec<Complex64>,
        energies: Vec<f64>,
        hbar: f64,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(invalid("superposition needs at least one component"));
        }
        if states.len() != coefficients.len() || states.len() != energies.len() {
            return Err(invalid(format!(
                "superposition lists differ in length: {} states, {} coefficients, {} energies",
                states.len(),
                coefficients.len(),
                energies.len()
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(invalid("hbar must be positive"));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(invalid("energies must be finite"));
        }
        let weight: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (weight - 1.0).abs() > 1e-10 {
            return Err(invalid(format!(
                "coefficients have squared norm {weight}, expected 1"
            )));
        }
        let domain = *states[0].domain();
        if states.iter().any(|s| *s.domain() != domain) {
            return Err(invalid("superposed states must share one grid"));
        }
        for i in 0..states.len() {
            for j in i..states.len() {
                let o = states[i].overlap(&states[j])?;
                let expected = if i == j { 1.0 } else { 0.0 };
                if (o - expected).norm() > 1e-6 {
                    return Err(invalid(format!(
                        "states {i} and {j} are not orthonormal (overlap {o})"
                    )));
                }
            }
        }
        let components = states
            .into_iter()
            .zip(coefficients)
            .zip(energies)
            .map(|((state, coefficient), energy)| Component {
                state,
                coefficient,
                energy,
            })
            .collect();
        Ok(Self { components, hbar })
    }

    /// A single stationary state with energy `energy`.
    pub fn stationary(state: WaveFunction, energy: f64, hbar: f64) -> Result<Self> {
        Self::superposition(
            vec![state],
            vec![Complex64::new(1.0, 0.0)],
            vec![energy],
            hbar,
        )
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn domain(&self) -> &GridDomain {
        self.components[0].state.domain()
    }

    pub fn is_analytic(&self) -> bool {
        self.components.iter().all(|c| c.state.is_analytic())
    }

    fn time_factor(&self, c: &Component, t: f64) -> Complex64 {
        c.coefficient * Complex64::from_polar(1.0, -c.energy * t / self.hbar)
    }

    pub fn evaluate(&self, x: f64, t: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &self.components {
            acc += self.time_factor(c, t) * c.state.amplitude(x)?;
        }
        Ok(acc)
    }

    /// Closed-form `dPsi/dx` (interpolant derivative for tabulated parts).
    pub fn derivative(&self, x: f64, t: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &self.components {
            acc += self.time_factor(c, t) * c.state.derivative(x)?;
        }
        Ok(acc)
    }

    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.evaluate(x, t)?.norm_sqr())
    }
}
