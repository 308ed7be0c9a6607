//! Probability current, Bohmian trajectories, and their divergence from the
//! density-inversion trajectories.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::trajectory::Trajectory;
use crate::wavefunctions::TimeDependentWaveFunction;

/// Density below which Bohmian integration stops.
pub const NODE_CUTOFF: f64 = 1e-6;

/// Current together with the imaginary part left over by the complex
/// formula (zero up to rounding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Current {
    pub value: f64,
    pub imaginary_residue: f64,
}

/// `dPsi/dx` in closed form for catalog states, centered difference
/// otherwise.
fn spatial_derivative(psi: &TimeDependentWaveFunction, x: f64, t: f64) -> Result<Complex64> {
    if psi.is_analytic() {
        return psi.derivative(x, t);
    }
    let d = psi.domain();
    let h = (1e-5 * d.length())
        .min(0.5 * (x - d.x_min()))
        .min(0.5 * (d.x_max() - x));
    Ok((psi.evaluate(x + h, t)? - psi.evaluate(x - h, t)?) / (2.0 * h))
}

/// `j = (i hbar / 2m) [Psi dPsi*/dx - Psi* dPsi/dx]` at an interior point.
pub fn probability_current(
    psi: &TimeDependentWaveFunction,
    mass: f64,
    x: f64,
    t: f64,
) -> Result<Current> {
    let d = psi.domain();
    if !d.contains_interior(x) {
        return Err(Error::OutOfDomain {
            x,
            x_min: d.x_min(),
            x_max: d.x_max(),
        });
    }
    let value = psi.evaluate(x, t)?;
    let dv = spatial_derivative(psi, x, t)?;
    let j =
        Complex64::new(0.0, psi.hbar() / (2.0 * mass)) * (value * dv.conj() - value.conj() * dv);
    Ok(Current {
        value: j.re,
        imaginary_residue: j.im,
    })
}

/// `dx/dt = j / |Psi|^2`; singular at a node.
pub fn bohm_velocity(psi: &TimeDependentWaveFunction, mass: f64, x: f64, t: f64) -> Result<f64> {
    let rho = psi.density(x, t)?;
    if rho < NODE_CUTOFF {
        return Err(Error::Singular { x });
    }
    Ok(probability_current(psi, mass, x, t)?.value / rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohmSample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

/// Why an integration stopped before the end of its span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halt {
    /// The next step would evaluate the velocity near a node.
    NearNode,
    /// The next step would leave the domain.
    LeftDomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BohmTrajectory {
    pub samples: Vec<BohmSample>,
    pub x0: f64,
    pub dt: f64,
    pub halted: Option<Halt>,
}

impl BohmTrajectory {
    pub fn time_span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    pub fn last(&self) -> &BohmSample {
        self.samples
            .last()
            .expect("a Bohm trajectory holds at least its start")
    }
}

/// Classic fourth-order Runge-Kutta integration of the Bohm velocity field
/// from `x0` over `t_span`. The final step is shortened to land on the end of
/// the span.
pub fn bohm_trajectory(
    psi: &TimeDependentWaveFunction,
    mass: f64,
    x0: f64,
    t_span: (f64, f64),
    dt: f64,
) -> Result<BohmTrajectory> {
    let (t_start, t_end) = t_span;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("step must be positive, got {dt}")));
    }
    if !(t_end > t_start) {
        return Err(invalid("time span must be increasing"));
    }
    if !psi.domain().contains_interior(x0) {
        return Err(invalid(format!("start {x0} is not interior to the domain")));
    }
    let v0 = match bohm_velocity(psi, mass, x0, t_start) {
        Ok(v) => v,
        Err(Error::Singular { .. }) => {
            return Err(invalid(format!("start {x0} sits on a node")));
        }
        Err(e) => return Err(e),
    };
    let mut samples = vec![BohmSample {
        t: t_start,
        x: x0,
        v: v0,
    }];
    let (mut t, mut x) = (t_start, x0);
    let mut halted = None;
    let steps = ((t_end - t_start) / dt).ceil() as usize;
    for i in 0..steps {
        let t_next = if i + 1 == steps {
            t_end
        } else {
            t_start + (i + 1) as f64 * dt
        };
        let h = t_next - t;
        match rk4_step(psi, mass, t, x, h) {
            Ok(xn) => {
                x = xn;
                t = t_next;
                let v = match bohm_velocity(psi, mass, x, t) {
                    Ok(v) => v,
                    Err(Error::Singular { .. }) => {
                        halted = Some(Halt::NearNode);
                        break;
                    }
                    Err(Error::OutOfDomain { .. }) => {
                        halted = Some(Halt::LeftDomain);
                        break;
                    }
                    Err(e) => return Err(e),
                };
                samples.push(BohmSample { t, x, v });
            }
            Err(Error::Singular { .. }) => {
                halted = Some(Halt::NearNode);
                break;
            }
            Err(Error::OutOfDomain { .. }) => {
                halted = Some(Halt::LeftDomain);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(BohmTrajectory {
        samples,
        x0,
        dt,
        halted,
    })
}

fn rk4_step(psi: &TimeDependentWaveFunction, mass: f64, t: f64, x: f64, h: f64) -> Result<f64> {
    let f = |t: f64, x: f64| bohm_velocity(psi, mass, x, t);
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * h, x + 0.5 * h * k1)?;
    let k3 = f(t + 0.5 * h, x + 0.5 * h * k2)?;
    let k4 = f(t + h, x + h * k3)?;
    let xn = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if !psi.domain().contains_interior(xn) {
        let d = psi.domain();
        return Err(Error::OutOfDomain {
            x: xn,
            x_min: d.x_min(),
            x_max: d.x_max(),
        });
    }
    Ok(xn)
}

/// One comparison instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub x_inversion: f64,
    pub x_bohm: f64,
    pub gap: f64,
    pub v_inversion: f64,
    pub v_bohm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub rows: Vec<ComparisonRow>,
    pub max_gap: f64,
    pub mean_gap: f64,
}

/// Linear interpolation of a sampled trajectory at time `t`.
fn interpolate(traj: &Trajectory, t: f64) -> (f64, f64) {
    let s = &traj.samples;
    let j = s.partition_point(|p| p.t < t).clamp(1, s.len() - 1);
    let (a, b) = (&s[j - 1], &s[j]);
    if b.t == a.t {
        return (a.x, a.v);
    }
    let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
    let v = if a.v.is_finite() && b.v.is_finite() {
        a.v + w * (b.v - a.v)
    } else if w < 0.5 {
        a.v
    } else {
        b.v
    };
    (a.x + w * (b.x - a.x), v)
}

/// Position gap between the two trajectories at every Bohm sample time that
/// falls inside both time spans.
pub fn compare(inversion: &Trajectory, bohm: &BohmTrajectory) -> Result<DivergenceReport> {
    let (fa, fb) = inversion
        .time_span()
        .ok_or_else(|| invalid("density-inversion trajectory is empty"))?;
    let (ba, bb) = bohm
        .time_span()
        .ok_or_else(|| invalid("Bohm trajectory is empty"))?;
    let (lo, hi) = (fa.max(ba), fb.min(bb));
    if lo > hi || inversion.samples.len() < 2 {
        return Err(invalid(format!(
            "time spans [{fa}, {fb}] and [{ba}, {bb}] do not overlap"
        )));
    }
    let rows: Vec<ComparisonRow> = bohm
        .samples
        .iter()
        .filter(|s| s.t >= lo && s.t <= hi)
        .map(|s| {
            let (xf, vf) = interpolate(inversion, s.t);
            ComparisonRow {
                t: s.t,
                x_inversion: xf,
                x_bohm: s.x,
                gap: (xf - s.x).abs(),
                v_inversion: vf,
                v_bohm: s.v,
            }
        })
        .collect();
    if rows.is_empty() {
        return Err(invalid("no Bohm samples inside the common time span"));
    }
    let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    let mean_gap = rows.iter().map(|r| r.gap).sum::<f64>() / rows.len() as f64;
    Ok(DivergenceReport {
        rows,
        max_gap,
        mean_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::trajectory::{sample_trajectory, Direction, Mode, SampleOptions, TrajectorySample};
    use crate::wavefunctions::{box_energy, BoxConvention, WaveFunction};
    use std::f64::consts::PI;

    fn ground_psi() -> TimeDependentWaveFunction {
        let wf = WaveFunction::box_eigenstate(1, 1.0, BoxConvention::Centered).unwrap();
        TimeDependentWaveFunction::stationary(wf, box_energy(1, 1.0, 1.0, 1.0), 1.0).unwrap()
    }

    fn plane(k: f64) -> TimeDependentWaveFunction {
        let wf = WaveFunction::plane_wave(k, 1.0).unwrap();
        TimeDependentWaveFunction::stationary(wf, 0.5 * k * k, 1.0).unwrap()
    }

    fn two_state() -> TimeDependentWaveFunction {
        let s1 = WaveFunction::box_eigenstate(1, 1.0, BoxConvention::Centered).unwrap();
        let s2 = WaveFunction::box_eigenstate(2, 1.0, BoxConvention::Centered).unwrap();
        let r = 0.5f64.sqrt();
        TimeDependentWaveFunction::superposition(
            vec![s1, s2],
            vec![Complex64::new(r, 0.0); 2],
            vec![box_energy(1, 1.0, 1.0, 1.0), box_energy(2, 1.0, 1.0, 1.0)],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn real_stationary_state_has_no_current() {
        let psi = ground_psi();
        for t in [0.0, 0.4, 3.0] {
            for x in [-0.4, 0.0, 0.3] {
                let j = probability_current(&psi, 1.0, x, t).unwrap();
                assert!(j.value.abs() < 1e-10);
                assert!(j.imaginary_residue.abs() < 1e-12);
                assert!(bohm_velocity(&psi, 1.0, x, t).unwrap().abs() < 1e-10);
            }
        }
        assert!(probability_current(&psi, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn plane_wave_current() {
        let psi = plane(2.0 * PI);
        let j = probability_current(&psi, 1.0, 0.37, 0.2).unwrap();
        assert!((j.value - 2.0 * PI).abs() < 1e-10);
        assert!((bohm_velocity(&psi, 1.0, 0.37, 0.2).unwrap() - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn tabulated_current_uses_differences() {
        let k = 2.0 * PI;
        let domain = crate::grid::GridDomain::new(0.0, 1.0, 4097).unwrap();
        let wf = WaveFunction::from_fn(domain, |x| Complex64::from_polar(1.0, k * x)).unwrap();
        let psi = TimeDependentWaveFunction::stationary(wf, 0.0, 1.0).unwrap();
        let j = probability_current(&psi, 1.0, 0.4, 0.0).unwrap();
        assert!((j.value - k).abs() < 1e-4, "{}", j.value);
    }

    #[test]
    fn node_is_singular() {
        let psi = two_state();
        // At t = pi / (E2 - E1) the amplitude is (psi1 - psi2)/sqrt(2): zero
        // where cos(pi x) = sin(2 pi x), i.e. x = 1/6.
        let t = PI / (box_energy(2, 1.0, 1.0, 1.0) - box_energy(1, 1.0, 1.0, 1.0));
        assert!(matches!(
            bohm_velocity(&psi, 1.0, 1.0 / 6.0, t),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn stationary_particle_stays_put() {
        let psi = ground_psi();
        let b = bohm_trajectory(&psi, 1.0, 0.21, (0.0, 1.0), 0.01).unwrap();
        assert_eq!(b.samples.len(), 101);
        assert!(b.halted.is_none());
        for s in &b.samples {
            assert!((s.x - 0.21).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_particle_drifts() {
        let psi = plane(2.0 * PI);
        let b = bohm_trajectory(&psi, 1.0, 0.05, (0.0, 0.1), 1e-3).unwrap();
        let last = b.last();
        assert!((last.x - (0.05 + 2.0 * PI * 0.1)).abs() < 1e-10);
        // Running off the end of the box halts the integration.
        let b = bohm_trajectory(&psi, 1.0, 0.05, (0.0, 1.0), 1e-3).unwrap();
        assert_eq!(b.halted, Some(Halt::LeftDomain));
    }

    #[test]
    fn rejects_bad_starts() {
        let psi = ground_psi();
        assert!(bohm_trajectory(&psi, 1.0, 0.5, (0.0, 1.0), 0.01).is_err());
        assert!(bohm_trajectory(&psi, 1.0, 0.0, (0.0, 1.0), 0.0).is_err());
        let psi = two_state();
        let t = PI / (box_energy(2, 1.0, 1.0, 1.0) - box_energy(1, 1.0, 1.0, 1.0));
        assert!(bohm_trajectory(&psi, 1.0, 1.0 / 6.0, (t, t + 1.0), 0.01).is_err());
    }

    #[test]
    fn step_halving_convergence() {
        let psi = two_state();
        let end = |dt: f64| {
            bohm_trajectory(&psi, 1.0, 0.1, (0.0, 0.05), dt)
                .unwrap()
                .last()
                .x
        };
        assert!((end(1e-3) - end(5e-4)).abs() < 1e-8);
    }

    #[test]
    fn identical_inputs_have_zero_gap() {
        let traj = Trajectory {
            samples: (0..11)
                .map(|i| TrajectorySample {
                    t: i as f64 * 0.1,
                    x: 0.3,
                    v: 0.0,
                })
                .collect(),
            period: 1.0,
            t0: 0.0,
            direction: Direction::Forward,
            mode: Mode::SinglePass,
        };
        let psi = ground_psi();
        let b = bohm_trajectory(&psi, 1.0, 0.3, (0.0, 1.0), 0.1).unwrap();
        let r = compare(&traj, &b).unwrap();
        assert!(r.max_gap < 1e-12);
        assert_eq!(r.rows.len(), 11);
    }

    #[test]
    fn disjoint_spans_rejected() {
        let wf = WaveFunction::box_eigenstate(1, 1.0, BoxConvention::Centered).unwrap();
        let f =
            sample_trajectory(&wf, PhysicalParams::default(), &SampleOptions::default()).unwrap();
        let b = bohm_trajectory(&ground_psi(), 1.0, 0.0, (2.0, 3.0), 0.1).unwrap();
        assert!(compare(&f, &b).is_err());
    }

    #[test]
    fn matched_plane_wave_and_flat_density() {
        let k = 2.0 * PI;
        let wf = WaveFunction::plane_wave(k, 1.0).unwrap();
        let period = 1.0 / k; // L / T = hbar k / m
        let params = PhysicalParams::default().with_period(period).unwrap();
        let f = sample_trajectory(
            &wf,
            params,
            &SampleOptions {
                n: 201,
                ..Default::default()
            },
        )
        .unwrap();
        let b = bohm_trajectory(&plane(k), 1.0, 0.1, (0.0, 0.1), 1e-3).unwrap();
        let r = compare(&f, &b).unwrap();
        for row in &r.rows {
            assert!((row.gap - 0.1).abs() < 1e-9, "{row:?}");
            assert!((row.v_inversion - row.v_bohm).abs() < 1e-9);
        }
    }
}
