//! Uniform position grids and the composite quadrature rules that run on
//! them.

use std::ops::{Add, Mul};

use crate::error::{invalid, Error, Result};

/// Smallest admissible grid.
pub const MIN_GRID_POINTS: usize = 33;

/// Default grid size. Odd so that composite Simpson covers it exactly.
pub const DEFAULT_GRID_POINTS: usize = 4097;

/// A closed interval `[x_min, x_max]` sampled at `n_points` equally spaced
/// nodes, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDomain {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl GridDomain {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(invalid(format!(
                "grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < MIN_GRID_POINTS {
            return Err(invalid(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn spacing(&self) -> f64 {
        self.length() / (self.n_points - 1) as f64
    }

    /// Position of node `i`. The last node is `x_max` exactly.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    /// Inclusive membership test with a rounding allowance of `1e-12 L`.
    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * self.length();
        x >= self.x_min - slack && x <= self.x_max + slack
    }

    /// Strict interior test.
    pub fn contains_interior(&self, x: f64) -> bool {
        x > self.x_min && x < self.x_max
    }

    /// Returns `x` clamped onto the domain, or an out-of-domain error when it
    /// lies outside the rounding allowance.
    pub fn check(&self, x: f64) -> Result<f64> {
        if self.contains(x) {
            Ok(x.clamp(self.x_min, self.x_max))
        } else {
            Err(Error::OutOfDomain {
                x,
                x_min: self.x_min,
                x_max: self.x_max,
            })
        }
    }

    /// Index `k` of the cell `[node(k), node(k+1)]` holding `x` together
    /// with the local coordinate `t = (x - node(k)) / h` in `[0, 1]`.
    pub(crate) fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.spacing();
        let s = ((x - self.x_min) / h).max(0.0);
        let k = (s.floor() as usize).min(self.n_points - 2);
        let t = ((x - self.node(k)) / h).clamp(0.0, 1.0);
        (k, t)
    }
}

/// Composite Simpson rule over equally spaced samples with spacing `h`.
///
/// Odd sample counts use the plain composite rule. Even counts close the last
/// three intervals with Simpson's 3/8 rule; two samples fall back to the
/// trapezoid.
pub fn simpson<T>(values: &[T], h: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    match n {
        0 | 1 => T::default(),
        2 => (values[0] + values[1]) * (0.5 * h),
        3 => simpson_odd(values, h),
        _ if n % 2 == 1 => simpson_odd(values, h),
        _ => {
            let split = n - 3;
            let head = if split >= 3 {
                simpson_odd(&values[..split], h)
            } else {
                T::default()
            };
            let tail = &values[split - 1..];
            head + (tail[0] + tail[1] * 3.0 + tail[2] * 3.0 + tail[3]) * (3.0 * h / 8.0)
        }
    }
}

fn simpson_odd<T>(values: &[T], h: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let mut odd = T::default();
    let mut even = T::default();
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd = odd + v;
        } else {
            even = even + v;
        }
    }
    (values[0] + values[n - 1] + odd * 4.0 + even * 2.0) * (h / 3.0)
}

/// Running integral of equally spaced samples, anchored at zero on the first
/// node.
///
/// Even nodes carry the composite Simpson value. Odd nodes add the integral of
/// the quadratic through the surrounding three samples over the first half of
/// the panel, `h/12 (5 f0 + 8 f1 - f2)`. Requires an odd sample count.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(
        n >= 3 && n % 2 == 1,
        "cumulative Simpson needs an odd sample count >= 3"
    );
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for k in (0..n - 1).step_by(2) {
        let (f0, f1, f2) = (values[k], values[k + 1], values[k + 2]);
        out[k + 1] = acc + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
        acc += h / 3.0 * (f0 + 4.0 * f1 + f2);
        out[k + 2] = acc;
    }
    out
}
