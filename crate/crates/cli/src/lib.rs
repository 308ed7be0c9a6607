//! Config-driven front end for the `qtraj` toolkit: reads a TOML run
//! description, runs one pipeline, writes CSV series and `summary.json`.

pub mod config;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use qtraj::bohm::{bohm_trajectory, compare};
use qtraj::export;
use qtraj::nonstationary::{time_marginal, MarginalDensity};
use qtraj::observables::{
    effective_potential, effective_potential_marginal, momentum_amplitude, newton_residual,
    phase_roundtrip, uncertainty_product,
};
use qtraj::trajectory::superluminal_measure;
use qtraj::verify::{pdf_match_report, MatchTolerances};
use qtraj::wavefunctions::box_energy;
use qtraj::{
    BoxConvention, DensityProfile, Direction, Mode, PhysicalParams, SampleOptions, Sampling,
    TimeDependentWaveFunction, Trajectory, TrajectoryEngine, WaveFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{
    Convention, DirectionConfig, ModeConfig, RunConfig, SamplingConfig, StateConfig, StateKind,
};

/// Exit status for a configuration or input problem.
pub const EXIT_INVALID: i32 = 2;
/// Exit status when a verification falls outside its tolerance.
pub const EXIT_FAILED_CHECK: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Synthesize one trajectory.
    Synth,
    /// Synthesize and compare the position histogram with a target density.
    Verify,
    /// Time-marginal density of a superposition, then its trajectory.
    Marginal,
    /// Momentum amplitude and uncertainty product.
    Momentum,
    /// Effective potential and the Newton check.
    Potential,
    /// Bohm trajectory next to the inversion trajectory.
    Bohm,
    /// Trajectories for an ensemble of random offsets.
    Ensemble,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Synth => "synth",
            Command::Verify => "verify",
            Command::Marginal => "marginal",
            Command::Momentum => "momentum",
            Command::Potential => "potential",
            Command::Bohm => "bohm",
            Command::Ensemble => "ensemble",
        };
        f.write_str(s)
    }
}

/// Anything that stops a run before its checks are evaluated.
#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<qtraj::Error> for CliError {
    fn from(e: qtraj::Error) -> Self {
        CliError(e.to_string())
    }
}

fn fail<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError(msg.into()))
}

/// Result of a completed run.
#[derive(Debug)]
pub struct Outcome {
    pub summary: Value,
    pub files: Vec<PathBuf>,
    /// False when a verification tolerance was missed.
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            EXIT_FAILED_CHECK
        }
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)
        .map_err(|e| CliError(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
    if let Some(dir) = path.parent() {
        cfg.anchor(dir);
    }
    Ok(cfg)
}

/// Loads `config_path` and runs `command`, writing into `out` when given,
/// otherwise into the configured output directory.
pub fn run(command: Command, config_path: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = load_config(config_path)?;
    run_config(command, &cfg, out)
}

/// Process exit code for a run result.
pub fn exit_code(result: &Result<Outcome, CliError>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(_) => EXIT_INVALID,
    }
}

enum State {
    Stationary { wf: WaveFunction, energy: f64 },
    Superposition(TimeDependentWaveFunction),
}

impl State {
    fn domain(&self) -> &qtraj::GridDomain {
        match self {
            State::Stationary { wf, .. } => wf.domain(),
            State::Superposition(psi) => psi.domain(),
        }
    }

    fn time_dependent(&self, hbar: f64) -> Result<TimeDependentWaveFunction, CliError> {
        Ok(match self {
            State::Stationary { wf, energy } => {
                TimeDependentWaveFunction::stationary(wf.clone(), *energy, hbar)?
            }
            State::Superposition(psi) => psi.clone(),
        })
    }
}

/// Density a trajectory is built from: `|psi|^2` or a time marginal.
enum Density {
    Wave(WaveFunction),
    Marginal(MarginalDensity),
}

impl Density {
    fn profile(&self) -> &(dyn DensityProfile + Sync) {
        match self {
            Density::Wave(wf) => wf,
            Density::Marginal(m) => m,
        }
    }
}

fn convention(c: Convention) -> BoxConvention {
    match c {
        Convention::Centered => BoxConvention::Centered,
        Convention::Wall => BoxConvention::Wall,
    }
}

fn read_tabulated(path: &Path) -> Result<WaveFunction, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError(format!(
            "cannot read tabulated state {}: {e}",
            path.display()
        ))
    })?;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if i == 0 && fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
            if fields != ["x", "re", "im"] {
                return fail(format!(
                    "{}:1: expected header x,re,im, found {line}",
                    path.display()
                ));
            }
            continue;
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 3 => {
                xs.push(v[0]);
                values.push(Complex64::new(v[1], v[2]));
            }
            _ => {
                return fail(format!(
                    "{}:{}: expected three numbers x,re,im, found {line}",
                    path.display(),
                    i + 1
                ))
            }
        }
    }
    WaveFunction::tabulated(&xs, &values).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn build_state(s: &StateConfig, params: &PhysicalParams) -> Result<State, CliError> {
    let (m, hbar) = (params.mass, params.hbar);
    match s.kind {
        StateKind::Box => {
            let Some(n) = s.n else {
                return fail("state.n is required for a box state");
            };
            let wf = WaveFunction::box_eigenstate(n, s.length, convention(s.convention))?;
            Ok(State::Stationary {
                wf,
                energy: box_energy(n, s.length, m, hbar),
            })
        }
        StateKind::PlaneWave => {
            let Some(k) = s.k else {
                return fail("state.k is required for a plane wave");
            };
            let wf = WaveFunction::plane_wave(k, s.length)?;
            Ok(State::Stationary {
                wf,
                energy: hbar * hbar * k * k / (2.0 * m),
            })
        }
        StateKind::Tabulated => {
            let Some(path) = &s.path else {
                return fail("state.path is required for a tabulated state");
            };
            // The energy only sets a global phase, which nothing observes.
            Ok(State::Stationary {
                wf: read_tabulated(path)?,
                energy: 0.0,
            })
        }
        StateKind::Superposition => {
            if s.components.is_empty() {
                return fail("a superposition needs at least one [[state.components]] entry");
            }
            let norm: f64 = s
                .components
                .iter()
                .map(|c| c.re * c.re + c.im * c.im)
                .sum::<f64>()
                .sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return fail("superposition coefficients are all zero");
            }
            let mut states = Vec::new();
            let mut coeffs = Vec::new();
            let mut energies = Vec::new();
            for c in &s.components {
                states.push(WaveFunction::box_eigenstate(
                    c.n,
                    s.length,
                    convention(s.convention),
                )?);
                coeffs.push(Complex64::new(c.re, c.im) / norm);
                energies.push(
                    c.energy
                        .unwrap_or_else(|| box_energy(c.n, s.length, m, hbar)),
                );
            }
            Ok(State::Superposition(
                TimeDependentWaveFunction::superposition(states, coeffs, energies, hbar)?,
            ))
        }
    }
}

/// Longest beat period `2 pi hbar / |E_i - E_j|` among distinct energies.
fn slowest_beat(psi: &TimeDependentWaveFunction) -> Option<f64> {
    let e: Vec<f64> = psi.components().iter().map(|c| c.energy).collect();
    let mut gap = f64::INFINITY;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            let d = (e[i] - e[j]).abs();
            if d > 0.0 {
                gap = gap.min(d);
            }
        }
    }
    gap.is_finite()
        .then(|| 2.0 * std::f64::consts::PI * psi.hbar() / gap)
}

fn marginal_of(
    psi: &TimeDependentWaveFunction,
    cfg: &RunConfig,
) -> Result<MarginalDensity, CliError> {
    let t_avg = match cfg.marginal.t_avg {
        Some(t) => t,
        None => slowest_beat(psi).unwrap_or(cfg.params.period),
    };
    Ok(time_marginal(
        psi,
        cfg.marginal.t_start,
        t_avg,
        cfg.marginal.n_t,
    )?)
}

fn density_of(state: &State, cfg: &RunConfig) -> Result<Density, CliError> {
    Ok(match state {
        State::Stationary { wf, .. } => Density::Wave(wf.clone()),
        State::Superposition(psi) => Density::Marginal(marginal_of(psi, cfg)?),
    })
}

fn stationary(state: &State, command: Command) -> Result<&WaveFunction, CliError> {
    match state {
        State::Stationary { wf, .. } => Ok(wf),
        State::Superposition(_) => fail(format!(
            "`{command}` needs a stationary state, not a superposition"
        )),
    }
}

fn sample_options(cfg: &RunConfig) -> Result<SampleOptions, CliError> {
    let t = &cfg.trajectory;
    let t0 = match (t.t0, t.t0_seed) {
        (Some(_), Some(_)) => {
            return fail("trajectory.t0 and trajectory.t0_seed are mutually exclusive")
        }
        (Some(t0), None) => t0,
        (None, Some(seed)) => cfg.params.period * ChaCha8Rng::seed_from_u64(seed).random::<f64>(),
        (None, None) => 0.0,
    };
    Ok(SampleOptions {
        n: t.n_samples,
        sampling: match t.sampling {
            SamplingConfig::Grid => Sampling::UniformGrid,
            SamplingConfig::Random => Sampling::UniformRandom { seed: t.seed },
        },
        t0,
        direction: match t.direction {
            DirectionConfig::Forward => Direction::Forward,
            DirectionConfig::Backward => Direction::Backward,
        },
        mode: match t.mode {
            ModeConfig::SinglePass => Mode::SinglePass,
            ModeConfig::Periodic => Mode::Periodic,
        },
        span: t.span,
    })
}

fn params_of(cfg: &RunConfig) -> Result<PhysicalParams, CliError> {
    let p = &cfg.params;
    PhysicalParams::new(p.mass, p.hbar, p.period, p.speed_cap)
        .map_err(|e| CliError(format!("[params]: {e}")))
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| {
            CliError(format!(
                "cannot create output directory {}: {e}",
                dir.display()
            ))
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let io = |e: std::io::Error| CliError(format!("cannot write {}: {e}", path.display()));
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        f(&mut w).and_then(|_| w.flush()).map_err(io)?;
        self.files.push(path);
        Ok(())
    }
}

fn trajectory_metrics(traj: &Trajectory) -> Value {
    json!({
        "n_samples": traj.len(),
        "t0": traj.t0,
        "period": traj.period,
    })
}

/// Runs `command` on an already parsed config.
pub fn run_config(
    command: Command,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let params = params_of(cfg)?;
    let state = build_state(&cfg.state, &params)?;
    let mut w = Writer::new(out.unwrap_or(&cfg.output.directory))?;
    let mut metrics = Map::new();
    let mut checks = Map::new();
    let mut passed = true;

    match command {
        Command::Synth | Command::Ensemble | Command::Verify => {
            let density = density_of(&state, cfg)?;
            let engine = TrajectoryEngine::new(density.profile(), params);
            let opts = sample_options(cfg)?;
            let sl = superluminal_measure(density.profile(), &params)?;
            metrics.insert("superluminal_measure".into(), json!(sl.total));
            if command == Command::Ensemble {
                let n = cfg.ensemble.members;
                let members = engine.ensemble(n, cfg.ensemble.seed, &opts)?;
                w.write("trajectories.csv", |f| {
                    export::write_trajectories(f, &members)
                })?;
                w.write("t0.csv", |f| {
                    writeln!(f, "member_id,t0")?;
                    for (i, m) in members.iter().enumerate() {
                        writeln!(f, "{i},{}", export::format_number(m.t0))?;
                    }
                    Ok(())
                })?;
                metrics.insert("members".into(), json!(n));
                metrics.insert("samples_per_member".into(), json!(opts.n));
            } else {
                let traj = engine.sample(&opts)?;
                w.write("trajectory.csv", |f| {
                    export::write_trajectories(f, std::slice::from_ref(&traj))
                })?;
                metrics.insert("trajectory".into(), trajectory_metrics(&traj));
                if command == Command::Verify {
                    let target = match &cfg.verify.target {
                        Some(t) => density_of(&build_state(t, &params)?, cfg)?,
                        None => density,
                    };
                    let target = target.profile();
                    if target.domain() != state.domain() {
                        return fail("verify.target must live on the same domain as the state");
                    }
                    let dx = cfg.verify.dx.unwrap_or(0.02 * state.domain().length());
                    let tol = MatchTolerances {
                        l1_max: cfg.verify.l1_max,
                        chi2_sigmas: cfg.verify.chi2_sigmas,
                    };
                    let report = pdf_match_report(&traj, target, dx, &tol)?;
                    w.write("histogram.csv", |f| {
                        export::write_histogram(f, &report.histogram, |x| {
                            target.density_at(x).unwrap_or(0.0)
                        })
                    })?;
                    metrics.insert(
                        "verify".into(),
                        json!({
                            "dx": report.dx,
                            "n_samples": report.n_samples,
                            "l1": report.l1,
                            "chi2": report.chi2,
                            "dof": report.dof,
                            "pass": report.pass,
                        }),
                    );
                    checks.insert("verify".into(), json!(report.pass));
                    passed = report.pass;
                }
            }
        }
        Command::Marginal => {
            let marginal = match &state {
                State::Stationary { wf, .. } => MarginalDensity::from_stationary(wf),
                State::Superposition(psi) => marginal_of(psi, cfg)?,
            };
            w.write("marginal.csv", |f| export::write_marginal(f, &marginal))?;
            // Distance from the incoherent sum of the component densities.
            let gap = match &state {
                State::Stationary { .. } => 0.0,
                State::Superposition(psi) => marginal
                    .domain()
                    .nodes()
                    .zip(marginal.values())
                    .map(|(x, v)| {
                        let incoherent: f64 = psi
                            .components()
                            .iter()
                            .map(|c| c.coefficient.norm_sqr() * c.state.density(x).unwrap_or(0.0))
                            .sum();
                        (v - incoherent).abs()
                    })
                    .fold(0.0, f64::max),
            };
            let traj = TrajectoryEngine::new(&marginal, params).sample(&sample_options(cfg)?)?;
            w.write("trajectory.csv", |f| {
                export::write_trajectories(f, std::slice::from_ref(&traj))
            })?;
            let (t_start, t_end) = marginal.window();
            metrics.insert(
                "marginal".into(),
                json!({
                    "t_start": t_start,
                    "t_end": if t_end.is_finite() { json!(t_end) } else { json!("inf") },
                    "norm": marginal.norm(),
                    "incoherent_sup_gap": gap,
                }),
            );
            metrics.insert("trajectory".into(), trajectory_metrics(&traj));
        }
        Command::Momentum => {
            let wf = stationary(&state, command)?;
            let phi = momentum_amplitude(wf, cfg.momentum.n_mu, cfg.momentum.mu_max, params.hbar)?;
            w.write("phi.csv", |f| export::write_momentum(f, &phi))?;
            let u = uncertainty_product(wf, &phi);
            let bound = u.product >= 0.499 * params.hbar;
            metrics.insert(
                "momentum".into(),
                json!({
                    "dx": u.dx,
                    "dmu": u.dmu,
                    "product": u.product,
                    "captured_mass": phi.captured_mass,
                    "truncated": phi.truncated,
                    "phase_roundtrip": phase_roundtrip(wf, &phi),
                }),
            );
            checks.insert("uncertainty_bound".into(), json!(bound));
        }
        Command::Potential => {
            let pc = &cfg.potential;
            let table = match &state {
                State::Stationary { wf, .. } => effective_potential(wf, &params, pc.cutoff)?,
                State::Superposition(psi) => {
                    effective_potential_marginal(&marginal_of(psi, cfg)?, &params, pc.cutoff)?
                }
            };
            w.write("vbar.csv", |f| export::write_potential(f, &table))?;
            let mut pot = Map::new();
            pot.insert("cutoff".into(), json!(pc.cutoff));
            pot.insert("finite_points".into(), json!(table.finite().count()));
            if let State::Stationary { wf, .. } = &state {
                let mut rel = Vec::new();
                for x in wf.domain().nodes() {
                    if wf.density(x)? <= pc.newton_floor {
                        continue;
                    }
                    if let Some(c) = newton_residual(wf, &params, x, pc.newton_h, pc.newton_floor)?
                    {
                        rel.push(c.relative());
                    }
                }
                rel.sort_by(f64::total_cmp);
                if let (Some(max), false) = (rel.last(), rel.is_empty()) {
                    let median = rel[rel.len() / 2];
                    pot.insert(
                        "newton".into(),
                        json!({ "points": rel.len(), "median_relative": median, "max_relative": max }),
                    );
                    checks.insert("newton_median".into(), json!(median < 1e-4));
                }
            }
            metrics.insert("potential".into(), Value::Object(pot));
        }
        Command::Bohm => {
            let psi = state.time_dependent(params.hbar)?;
            let density = density_of(&state, cfg)?;
            let opts = sample_options(cfg)?;
            let inversion = TrajectoryEngine::new(density.profile(), params).sample(&opts)?;
            let d = state.domain();
            let x0 = cfg.bohm.x0.unwrap_or(0.5 * (d.x_min() + d.x_max()));
            let duration = cfg.bohm.duration.unwrap_or(params.period);
            let path = bohm_trajectory(
                &psi,
                params.mass,
                x0,
                (opts.t0, opts.t0 + duration),
                cfg.bohm.dt,
            )?;
            let report = compare(&inversion, &path)?;
            w.write("comparison.csv", |f| export::write_comparison(f, &report))?;
            metrics.insert(
                "bohm".into(),
                json!({
                    "x0": x0,
                    "dt": cfg.bohm.dt,
                    "steps": path.samples.len() - 1,
                    "halted": path.halted.map(|h| format!("{h:?}")),
                    "max_gap": report.max_gap,
                    "mean_gap": report.mean_gap,
                }),
            );
        }
    }

    let summary = json!({
        "command": command.to_string(),
        "config": serde_json::to_value(cfg).map_err(|e| CliError(e.to_string()))?,
        "metrics": Value::Object(metrics),
        "pass": Value::Object(checks),
        "outputs": w.files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    });
    w.write("summary.json", |f| {
        serde_json::to_writer_pretty(&mut *f, &summary)?;
        writeln!(f)
    })?;
    Ok(Outcome {
        summary,
        files: w.files,
        passed,
    })
}
