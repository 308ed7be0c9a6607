//! Cumulative map of a position density, its inversion into the classical
//! trajectory `x(t; t0)`, sampled trajectories and ensembles, and the
//! superluminal-region diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::grid::{cumulative_simpson, GridDomain};
use crate::interp::hermite;
use crate::params::PhysicalParams;
use crate::wavefunctions::DensityProfile;

/// Residual in `u` at which inversion stops.
pub const INVERT_TOLERANCE: f64 = 1e-13;

/// Monotone map `u(x) = int_{x_min}^{x} p(x') dx'` from the domain onto
/// `[0, 1]`.
///
/// Node values come from cumulative Simpson. Between nodes the map is a cubic
/// Hermite interpolant whose node slopes are the density itself, limited so
/// every cell stays monotone.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeMap {
    domain: GridDomain,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CumulativeMap {
    pub fn from_density<D: DensityProfile + ?Sized>(density: &D) -> Self {
        Self::from_node_densities(*density.domain(), &density.node_densities())
    }

    /// Builds the map from densities at the grid nodes of `domain`. The table
    /// is scaled so that `u(x_max) = 1`, forced non-decreasing, and clamped to
    /// `[0, 1]`.
    pub fn from_node_densities(domain: GridDomain, densities: &[f64]) -> Self {
        assert_eq!(densities.len(), domain.n_points());
        let h = domain.spacing();
        let clean: Vec<f64> = densities.iter().map(|p| p.max(0.0)).collect();
        let mut values = if clean.len() % 2 == 1 {
            cumulative_simpson(&clean, h)
        } else {
            cumulative_trapezoid(&clean, h)
        };
        let total = *values.last().unwrap();
        assert!(total > 0.0, "density integrates to zero");
        let mut running = 0.0f64;
        for v in values.iter_mut() {
            running = running.max((*v / total).clamp(0.0, 1.0));
            *v = running;
        }
        *values.last_mut().unwrap() = 1.0;
        let slopes: Vec<f64> = clean.iter().map(|p| p / total).collect();
        let limited = crate::interp::MonotoneCubic::with_slopes(
            domain.nodes().collect(),
            values.clone(),
            slopes,
        );
        Self {
            domain,
            slopes: limited.slopes().to_vec(),
            values,
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// Node values of `u`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval_cell(&self, k: usize, t: f64) -> f64 {
        hermite(
            t,
            self.domain.spacing(),
            self.values[k],
            self.values[k + 1],
            self.slopes[k],
            self.slopes[k + 1],
        )
    }

    /// `u(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let x = self.domain.check(x)?;
        let (k, t) = self.domain.locate(x);
        Ok(self.eval_cell(k, t).clamp(0.0, 1.0))
    }

    /// Smallest `x` with `u(x) = u`: the node at the left edge of a flat
    /// plateau, otherwise a bracketed bisection/secant solve inside the cell
    /// that contains the crossing.
    pub fn invert(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(invalid(format!("inversion needs u in [0, 1], got {u}")));
        }
        let j = self.values.partition_point(|&v| v < u);
        if j == 0 {
            return Ok(self.domain.x_min());
        }
        let j = j.min(self.values.len() - 1);
        if self.values[j] == u {
            return Ok(self.domain.node(j));
        }
        let k = j - 1;
        let t = self.solve_cell(k, u);
        Ok((self.domain.node(k) + t * self.domain.spacing()).min(self.domain.x_max()))
    }

    /// Solves `H_k(t) = u` for `t` in `[0, 1]`, with `H_k(0) < u < H_k(1)`.
    fn solve_cell(&self, k: usize, u: f64) -> f64 {
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let (mut fa, mut fb) = (self.values[k] - u, self.values[k + 1] - u);
        let mut width = b - a;
        let mut force_bisect = false;
        for _ in 0..200 {
            let secant = a - fa * (b - a) / (fb - fa);
            let m = if force_bisect || !(secant > a && secant < b) {
                0.5 * (a + b)
            } else {
                secant
            };
            let fm = self.eval_cell(k, m) - u;
            if fm.abs() <= INVERT_TOLERANCE {
                return m;
            }
            if fm < 0.0 {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            // A secant step that fails to halve the bracket is followed by a
            // bisection.
            let new_width = b - a;
            force_bisect = !force_bisect && new_width > 0.5 * width;
            width = new_width;
            if width <= 4.0 * f64::EPSILON {
                break;
            }
        }
        if fa.abs() <= fb.abs() {
            a
        } else {
            b
        }
    }
}

fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Sense of the first traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Direction::Forward),
            -1 => Ok(Direction::Backward),
            _ => Err(invalid(format!("direction must be +1 or -1, got {sign}"))),
        }
    }
}

/// One monotone pass, or repeated to-and-fro passes with period `2T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SinglePass,
    Periodic,
}

/// How sample times are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// `n` equally spaced times including both ends of the span.
    UniformGrid,
    /// `n` i.i.d. uniform times, sorted.
    UniformRandom { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub n: usize,
    pub sampling: Sampling,
    pub t0: f64,
    pub direction: Direction,
    pub mode: Mode,
    /// Time span covered in periodic mode; defaults to one full cycle `2T`.
    /// Single-pass always covers `[t0, t0 + T]`.
    pub span: Option<f64>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            n: 1001,
            sampling: Sampling::UniformGrid,
            t0: 0.0,
            direction: Direction::Forward,
            mode: Mode::SinglePass,
            span: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    /// Velocity; infinite where the density vanishes.
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub period: f64,
    pub t0: f64,
    pub direction: Direction,
    pub mode: Mode,
}

impl Trajectory {
    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.x)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }
}

/// `v = direction / (T p(x))`, or a signed infinity at a node.
pub fn velocity_from_density(p: f64, period: f64, direction: Direction) -> f64 {
    if p <= 0.0 {
        direction.sign() * f64::INFINITY
    } else {
        direction.sign() / (period * p)
    }
}

/// A density together with its cumulative map and the physical parameters:
/// everything needed to evaluate `x(t; t0)` and `v(x)`.
#[derive(Debug, Clone)]
pub struct TrajectoryEngine<'a, D: DensityProfile + ?Sized> {
    density: &'a D,
    map: CumulativeMap,
    params: PhysicalParams,
}

impl<'a, D: DensityProfile + ?Sized + Sync> TrajectoryEngine<'a, D> {
    pub fn new(density: &'a D, params: PhysicalParams) -> Self {
        Self {
            density,
            map: CumulativeMap::from_density(density),
            params,
        }
    }

    pub fn map(&self) -> &CumulativeMap {
        &self.map
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn density(&self) -> &D {
        self.density
    }

    fn position_at_phase(
        &self,
        phase: f64,
        direction: Direction,
        mode: Mode,
    ) -> Result<(f64, Direction)> {
        let (s, leg) = fold_phase(phase, direction, mode)?;
        let u = match direction {
            Direction::Forward => s,
            Direction::Backward => 1.0 - s,
        };
        Ok((self.map.invert(u)?, leg))
    }

    /// `x(t; t0)`.
    pub fn position_at(&self, t: f64, t0: f64, direction: Direction, mode: Mode) -> Result<f64> {
        let phase = (t - t0) / self.params.period;
        Ok(self.position_at_phase(phase, direction, mode)?.0)
    }

    pub fn velocity_at(&self, x: f64, direction: Direction) -> Result<f64> {
        let p = self.density.density_at(x)?;
        Ok(velocity_from_density(p, self.params.period, direction))
    }

    // Positions depend on the offset from t0 only, so members of an ensemble
    // are exact time translates of each other.
    fn sample_at(&self, offset: f64, opts: &SampleOptions) -> Result<TrajectorySample> {
        let phase = offset / self.params.period;
        let (x, leg) = self.position_at_phase(phase, opts.direction, opts.mode)?;
        let v = self.velocity_at(x, leg)?;
        Ok(TrajectorySample {
            t: opts.t0 + offset,
            x,
            v,
        })
    }

    /// Samples `opts.n` points of the trajectory.
    pub fn sample(&self, opts: &SampleOptions) -> Result<Trajectory> {
        if opts.n < 2 {
            return Err(invalid(format!("need at least 2 samples, got {}", opts.n)));
        }
        let period = self.params.period;
        let span = match opts.mode {
            Mode::SinglePass => period,
            Mode::Periodic => opts.span.unwrap_or(2.0 * period),
        };
        if !(span.is_finite() && span > 0.0) {
            return Err(invalid(format!(
                "sampling span must be positive, got {span}"
            )));
        }
        let offsets: Vec<f64> = match opts.sampling {
            Sampling::UniformGrid => {
                let last = (opts.n - 1) as f64;
                (0..opts.n)
                    .map(|i| {
                        if i + 1 == opts.n {
                            span
                        } else {
                            span * i as f64 / last
                        }
                    })
                    .collect()
            }
            Sampling::UniformRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut ts: Vec<f64> = (0..opts.n).map(|_| span * rng.random::<f64>()).collect();
                ts.sort_by(f64::total_cmp);
                ts
            }
        };
        let samples = offsets
            .into_iter()
            .map(|t| self.sample_at(t, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            samples,
            period,
            t0: opts.t0,
            direction: opts.direction,
            mode: opts.mode,
        })
    }

    /// `n_members` trajectories sharing this map, each with its own offset
    /// `t0 ~ U[0, T)`. Member `i` draws from stream `i` of a ChaCha8 generator
    /// seeded with `seed`, so the result does not depend on evaluation order.
    /// `opts.t0` is ignored.
    pub fn ensemble(
        &self,
        n_members: usize,
        seed: u64,
        opts: &SampleOptions,
    ) -> Result<Vec<Trajectory>> {
        if n_members == 0 {
            return Err(invalid("ensemble needs at least one member"));
        }
        let member = |i: usize| -> Result<Trajectory> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t0 = self.params.period * rng.random::<f64>();
            let sampling = match opts.sampling {
                Sampling::UniformGrid => Sampling::UniformGrid,
                Sampling::UniformRandom { .. } => Sampling::UniformRandom { seed: rng.random() },
            };
            self.sample(&SampleOptions {
                t0,
                sampling,
                ..*opts
            })
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n_members).into_par_iter().map(member).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n_members).map(member).collect()
        }
    }
}

/// Folds a phase `(t - t0) / T` onto `[0, 1]`. Phases within `1e-12` of an
/// integer snap to it, so round-off in `t - t0` cannot push a trajectory off
/// a wall where the map is flat.
fn fold_phase(phase: f64, direction: Direction, mode: Mode) -> Result<(f64, Direction)> {
    const SNAP: f64 = 1e-12;
    let nearest = phase.round();
    let phase = if (phase - nearest).abs() <= SNAP * nearest.abs().max(1.0) {
        nearest
    } else {
        phase
    };
    match mode {
        Mode::SinglePass => {
            if !(0.0..=1.0).contains(&phase) {
                return Err(Error::OutOfRange(format!(
                    "single-pass phase {phase} outside [0, 1]"
                )));
            }
            Ok((phase, direction))
        }
        Mode::Periodic => {
            let phi = phase.rem_euclid(2.0);
            if phi <= 1.0 {
                Ok((phi, direction))
            } else {
                Ok((2.0 - phi, direction.reversed()))
            }
        }
    }
}

/// `x(t; t0)` for a density, building the cumulative map on the fly.
pub fn position_at<D: DensityProfile + ?Sized + Sync>(
    density: &D,
    params: PhysicalParams,
    t: f64,
    t0: f64,
    direction: Direction,
    mode: Mode,
) -> Result<f64> {
    TrajectoryEngine::new(density, params).position_at(t, t0, direction, mode)
}

pub fn velocity_at<D: DensityProfile + ?Sized>(
    density: &D,
    x: f64,
    params: &PhysicalParams,
    direction: Direction,
) -> Result<f64> {
    Ok(velocity_from_density(
        density.density_at(x)?,
        params.period,
        direction,
    ))
}

pub fn sample_trajectory<D: DensityProfile + ?Sized + Sync>(
    density: &D,
    params: PhysicalParams,
    opts: &SampleOptions,
) -> Result<Trajectory> {
    TrajectoryEngine::new(density, params).sample(opts)
}

pub fn ensemble<D: DensityProfile + ?Sized + Sync>(
    density: &D,
    params: PhysicalParams,
    n_members: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<Vec<Trajectory>> {
    TrajectoryEngine::new(density, params).ensemble(n_members, seed, opts)
}

/// Region where the trajectory speed `1/(T p)` exceeds the cap `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperluminalRegion {
    pub threshold: f64,
    pub intervals: Vec<(f64, f64)>,
    pub total: f64,
}

/// Sub-level set `{x : p(x) < 1/(T c)}`, found by a scan over the grid nodes
/// with bisection on every crossing.
pub fn superluminal_measure<D: DensityProfile + ?Sized>(
    density: &D,
    params: &PhysicalParams,
) -> Result<SuperluminalRegion> {
    let threshold = 1.0 / (params.period * params.speed_cap);
    sublevel_set(density, threshold)
}

fn sublevel_set<D: DensityProfile + ?Sized>(
    density: &D,
    threshold: f64,
) -> Result<SuperluminalRegion> {
    let domain = *density.domain();
    let nodes = density.node_densities();
    let below = |p: f64| p < threshold;
    let crossing = |a: f64, b: f64| -> Result<f64> {
        // Bisection for the boundary between nodes a and b, where exactly one
        // end is below the threshold.
        let left_below = below(density.density_at(a)?);
        let (mut lo, mut hi) = (a, b);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(density.density_at(mid)?) == left_below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let mut intervals = Vec::new();
    let mut start: Option<f64> = if below(nodes[0]) {
        Some(domain.x_min())
    } else {
        None
    };
    for i in 1..nodes.len() {
        let (was, is) = (below(nodes[i - 1]), below(nodes[i]));
        if was == is {
            continue;
        }
        let x = crossing(domain.node(i - 1), domain.node(i))?;
        if is {
            start = Some(x);
        } else if let Some(s) = start.take() {
            intervals.push((s, x));
        }
    }
    if let Some(s) = start {
        intervals.push((s, domain.x_max()));
    }
    let total = intervals.iter().map(|(a, b)| b - a).sum();
    Ok(SuperluminalRegion {
        threshold,
        intervals,
        total,
    })
}

/// Smallest period `T` (relative precision 1e-6) at which the superluminal
/// region for cap `c` has total length at most `epsilon`.
pub fn min_period_for_cap<D: DensityProfile + ?Sized>(
    density: &D,
    speed_cap: f64,
    epsilon: f64,
) -> Result<f64> {
    if !(speed_cap.is_finite() && speed_cap > 0.0) {
        return Err(invalid("speed cap must be positive"));
    }
    let length = density.domain().length();
    if !(epsilon > 0.0) || epsilon >= length {
        return Err(invalid(format!(
            "target measure must lie in (0, {length}), got {epsilon}"
        )));
    }
    let measure =
        |t: f64| -> Result<f64> { Ok(sublevel_set(density, 1.0 / (t * speed_cap))?.total) };
    let mut hi = 1.0;
    let mut guard = 0;
    while measure(hi)? > epsilon {
        hi *= 2.0;
        guard += 1;
        if guard > 400 {
            return Err(Error::OutOfRange(
                "no finite period meets the target measure".into(),
            ));
        }
    }
    let mut lo = hi;
    guard = 0;
    while measure(lo)? <= epsilon {
        lo *= 0.5;
        guard += 1;
        if guard > 400 {
            return Err(Error::OutOfRange(
                "target measure met at every period".into(),
            ));
        }
    }
    while hi - lo > 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if measure(mid)? <= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
