//! Browser bindings for the box-state demo page in `www/`.

use qtraj::observables::{potential_from_density, DEFAULT_DENSITY_CUTOFF};
use qtraj::trajectory::superluminal_measure;
use qtraj::verify::{pdf_match_report, MatchTolerances};
use qtraj::{
    BoxConvention, PhysicalParams, SampleOptions, Sampling, TrajectoryEngine, WaveFunction,
};
use wasm_bindgen::prelude::*;

/// Points per curve handed to the page.
const PLOT_POINTS: usize = 513;

/// Eigenstate `n` of a unit box centered on the origin, with a traversal
/// period and a speed cap.
#[wasm_bindgen]
pub struct BoxDemo {
    wf: WaveFunction,
    params: PhysicalParams,
}

/// Sampled trajectory with its histogram against `|psi|^2`.
#[wasm_bindgen]
pub struct SampleView {
    times: Vec<f64>,
    positions: Vec<f64>,
    centers: Vec<f64>,
    density: Vec<f64>,
    target: Vec<f64>,
    l1: f64,
    chi2: f64,
    dof: usize,
}

#[wasm_bindgen]
impl SampleView {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }
    pub fn positions(&self) -> Vec<f64> {
        self.positions.clone()
    }
    pub fn centers(&self) -> Vec<f64> {
        self.centers.clone()
    }
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }
    pub fn target(&self) -> Vec<f64> {
        self.target.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn l1(&self) -> f64 {
        self.l1
    }
    #[wasm_bindgen(getter)]
    pub fn chi2(&self) -> f64 {
        self.chi2
    }
    #[wasm_bindgen(getter)]
    pub fn dof(&self) -> usize {
        self.dof
    }
}

impl BoxDemo {
    pub fn try_new(n: u32, period: f64, speed_cap: f64) -> qtraj::Result<Self> {
        Ok(Self {
            wf: WaveFunction::box_eigenstate(n, 1.0, BoxConvention::Centered)?,
            params: PhysicalParams::new(1.0, 1.0, period, speed_cap)?,
        })
    }

    pub fn try_sample(&self, n_samples: usize, seed: u64, dx: f64) -> qtraj::Result<SampleView> {
        let opts = SampleOptions {
            n: n_samples,
            sampling: Sampling::UniformRandom { seed },
            ..Default::default()
        };
        let traj = TrajectoryEngine::new(&self.wf, self.params).sample(&opts)?;
        let report = pdf_match_report(&traj, &self.wf, dx, &MatchTolerances::default())?;
        let h = &report.histogram;
        let centers: Vec<f64> = (0..h.n_bins()).map(|k| h.center(k)).collect();
        let target = centers
            .iter()
            .map(|&x| self.wf.density(x).unwrap_or(0.0))
            .collect();
        // Only a thinned copy of the path goes to the page.
        let stride = (traj.len() / 2000).max(1);
        let thinned = || traj.samples.iter().step_by(stride);
        Ok(SampleView {
            times: thinned().map(|s| s.t).collect(),
            positions: thinned().map(|s| s.x).collect(),
            centers,
            density: h.density(),
            target,
            l1: report.l1,
            chi2: report.chi2,
            dof: report.dof,
        })
    }

    fn plot_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let d = self.wf.domain();
        let last = (PLOT_POINTS - 1) as f64;
        (0..PLOT_POINTS).map(move |i| d.x_min() + d.length() * i as f64 / last)
    }
}

#[wasm_bindgen]
impl BoxDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: u32, period: f64, speed_cap: f64) -> Result<BoxDemo, JsError> {
        Self::try_new(n, period, speed_cap).map_err(|e| JsError::new(&e.to_string()))
    }

    /// Plot abscissae.
    pub fn xs(&self) -> Vec<f64> {
        self.plot_nodes().collect()
    }

    /// `|psi|^2` at the plot abscissae.
    pub fn density_curve(&self) -> Vec<f64> {
        self.plot_nodes()
            .map(|x| self.wf.density(x).unwrap_or(0.0))
            .collect()
    }

    /// Samples `n_samples` random times over one pass and bins the positions.
    pub fn sample(&self, n_samples: usize, seed: u64, dx: f64) -> Result<SampleView, JsError> {
        self.try_sample(n_samples, seed, dx)
            .map_err(|e| JsError::new(&e.to_string()))
    }

    /// Speed threshold density `1/(T c)`.
    pub fn threshold(&self) -> f64 {
        1.0 / (self.params.period * self.params.speed_cap)
    }

    /// Superluminal intervals, flattened as `[a0, b0, a1, b1, ...]`.
    pub fn superluminal_intervals(&self) -> Vec<f64> {
        superluminal_measure(&self.wf, &self.params)
            .map(|r| r.intervals.iter().flat_map(|&(a, b)| [a, b]).collect())
            .unwrap_or_default()
    }

    /// Total length of the superluminal region.
    pub fn superluminal_total(&self) -> f64 {
        superluminal_measure(&self.wf, &self.params)
            .map(|r| r.total)
            .unwrap_or(f64::NAN)
    }

    /// Effective potential at the plot abscissae; `NaN` below the density
    /// cutoff.
    pub fn potential_curve(&self) -> Vec<f64> {
        self.plot_nodes()
            .map(|x| match self.wf.density(x) {
                Ok(p) if p >= DEFAULT_DENSITY_CUTOFF => potential_from_density(p, &self.params),
                _ => f64::NAN,
            })
            .collect()
    }
}
