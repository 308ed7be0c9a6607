//! Histograms of trajectory positions and goodness-of-fit against a target
//! density.

use crate::error::{invalid, Result};
use crate::grid::GridDomain;
use crate::trajectory::Trajectory;
use crate::wavefunctions::DensityProfile;

/// Minimum expected count per merged chi-square group.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

/// Fixed-width bins spanning a domain. Bins are right-open except the last,
/// which is closed. When the width does not divide the domain, the last bin
/// is narrower.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn new(samples: &[f64], domain: &GridDomain, dx: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("histogram needs at least one sample"));
        }
        let mut h = Self::empty(domain, dx)?;
        for &x in samples {
            h.add(x)?;
        }
        Ok(h)
    }

    /// Bins with zero counts.
    pub fn empty(domain: &GridDomain, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(invalid(format!("bin width must be positive, got {dx}")));
        }
        let length = domain.length();
        let ratio = length / dx;
        let nearest = ratio.round();
        let n_bins = if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-9 * nearest {
            nearest as usize
        } else {
            ratio.ceil().max(1.0) as usize
        };
        let mut edges: Vec<f64> = (0..n_bins)
            .map(|i| domain.x_min() + i as f64 * dx)
            .collect();
        edges.push(domain.x_max());
        Ok(Self {
            counts: vec![0; n_bins],
            edges,
            total: 0,
        })
    }

    /// Histogram with caller-supplied counts on the given edges.
    pub fn from_counts(edges: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if edges.len() != counts.len() + 1 || counts.is_empty() {
            return Err(invalid("need one more edge than bins"));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("edges must increase"));
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(invalid("histogram holds no samples"));
        }
        Ok(Self {
            edges,
            counts,
            total,
        })
    }

    /// Adds one sample; out-of-domain samples are an error.
    pub fn add(&mut self, x: f64) -> Result<()> {
        let (lo, hi) = (self.edges[0], *self.edges.last().unwrap());
        let slack = 1e-12 * (hi - lo);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(crate::Error::OutOfDomain {
                x,
                x_min: lo,
                x_max: hi,
            });
        }
        let n = self.counts.len();
        let k = self.edges.partition_point(|&e| e <= x).clamp(1, n) - 1;
        self.counts[k] += 1;
        self.total += 1;
        Ok(())
    }

    /// Adds the counts of another histogram on the same bins.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.edges != other.edges {
            return Err(invalid("histograms have different bins"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.edges[k + 1] - self.edges[k]
    }

    pub fn center(&self, k: usize) -> f64 {
        0.5 * (self.edges[k] + self.edges[k + 1])
    }

    /// `count / (N width)` per bin.
    pub fn density(&self) -> Vec<f64> {
        let n = self.total as f64;
        (0..self.n_bins())
            .map(|k| self.counts[k] as f64 / (n * self.width(k)))
            .collect()
    }
}

/// `sum_k |density_k - target(center_k)| width_k`.
pub fn l1_distance(h: &Histogram, target: impl Fn(f64) -> f64) -> f64 {
    h.density()
        .iter()
        .enumerate()
        .map(|(k, d)| (d - target(h.center(k))).abs() * h.width(k))
        .sum()
}

/// Probability mass of `target` over `[a, b]` by 9-point Simpson.
fn bin_mass(target: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const M: usize = 9;
    let h = (b - a) / (M - 1) as f64;
    let v: Vec<f64> = (0..M).map(|i| target(a + i as f64 * h).max(0.0)).collect();
    crate::grid::simpson(&v, h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
}

impl ChiSquare {
    /// `(statistic - dof) / sqrt(2 dof)`.
    pub fn z_score(&self) -> f64 {
        (self.statistic - self.dof as f64) / (2.0 * self.dof as f64).sqrt()
    }
}

/// Pearson statistic of the histogram against `n` samples from `target`.
///
/// Expected counts are `n` times the target mass of each bin. Scanning from
/// the left, bins are pooled into a group until the group expects at least
/// five counts; a short remainder at the right edge joins the last group.
/// Degrees of freedom are `groups - 1`.
pub fn chi_square(h: &Histogram, target: impl Fn(f64) -> f64, n: u64) -> Result<ChiSquare> {
    let nf = n as f64;
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for k in 0..h.n_bins() {
        obs += h.counts()[k] as f64;
        exp += nf * bin_mass(&target, h.edges()[k], h.edges()[k + 1]);
        if exp >= MIN_EXPECTED_COUNT {
            groups.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if groups.is_empty() {
        return Err(invalid("no bin group reaches the minimum expected count"));
    }
    if obs > 0.0 || exp > 0.0 {
        let last = groups.last_mut().unwrap();
        last.0 += obs;
        last.1 += exp;
    }
    let statistic = groups.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    Ok(ChiSquare {
        statistic,
        dof: groups.len().saturating_sub(1),
    })
}

/// Pass criteria for a density match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchTolerances {
    pub l1_max: f64,
    /// The statistic may exceed `dof` by at most this many `sqrt(2 dof)`.
    pub chi2_sigmas: f64,
}

impl Default for MatchTolerances {
    fn default() -> Self {
        Self {
            l1_max: 0.02,
            chi2_sigmas: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub dx: f64,
    pub n_samples: u64,
    pub l1: f64,
    pub chi2: f64,
    pub dof: usize,
    pub pass: bool,
    pub histogram: Histogram,
}

/// Bins the trajectory positions on the target's domain and scores them.
/// Passing needs `l1 <= l1_max` and `chi2 <= dof + k sqrt(2 dof)`; the lower
/// chi-square tail is not tested because deterministic grid sampling sits
/// far below it.
pub fn pdf_match_report<D: DensityProfile + ?Sized>(
    traj: &Trajectory,
    target: &D,
    dx: f64,
    tol: &MatchTolerances,
) -> Result<MatchReport> {
    let positions: Vec<f64> = traj.positions().collect();
    let histogram = Histogram::new(&positions, target.domain(), dx)?;
    let f = |x: f64| target.density_at(x).unwrap_or(0.0);
    let l1 = l1_distance(&histogram, f);
    let chi = chi_square(&histogram, f, histogram.total())?;
    let pass = l1 <= tol.l1_max
        && chi.statistic <= chi.dof as f64 + tol.chi2_sigmas * (2.0 * chi.dof as f64).sqrt();
    Ok(MatchReport {
        dx,
        n_samples: histogram.total(),
        l1,
        chi2: chi.statistic,
        dof: chi.dof,
        pass,
        histogram,
    })
}
