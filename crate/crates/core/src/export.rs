//! CSV writers for the data series produced by the toolkit.
//!
//! Numbers are written in decimal with 12 significant digits (scientific
//! notation only for very large or very small magnitudes). Non-finite values
//! become the literal tokens `inf`, `-inf`, or `singular`.

use std::io::{self, Write};

use crate::bohm::DivergenceReport;
use crate::nonstationary::MarginalDensity;
use crate::observables::{EffectivePotentialTable, MomentumAmplitude};
use crate::trajectory::Trajectory;
use crate::verify::Histogram;
use crate::wavefunctions::DensityProfile;

const SIG_DIGITS: i32 = 12;

/// Formats `x` with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "singular".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let s = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
        return trim_mantissa(&s);
    }
    let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    trim_fraction(&s)
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".to_string()
        } else {
            t.to_string()
        }
    } else {
        s.to_string()
    }
}

fn trim_mantissa(s: &str) -> String {
    match s.split_once('e') {
        Some((m, e)) => format!("{}e{e}", trim_fraction(m)),
        None => s.to_string(),
    }
}

/// `t,x,v,member_id`, ordered by member then time.
pub fn write_trajectories<W: Write>(mut w: W, members: &[Trajectory]) -> io::Result<()> {
    writeln!(w, "t,x,v,member_id")?;
    for (id, traj) in members.iter().enumerate() {
        for s in &traj.samples {
            writeln!(
                w,
                "{},{},{},{id}",
                format_number(s.t),
                format_number(s.x),
                format_number(s.v)
            )?;
        }
    }
    Ok(())
}

/// `x,p`.
pub fn write_marginal<W: Write>(mut w: W, marginal: &MarginalDensity) -> io::Result<()> {
    writeln!(w, "x,p")?;
    for (x, p) in marginal.domain().nodes().zip(marginal.values()) {
        writeln!(w, "{},{}", format_number(x), format_number(*p))?;
    }
    Ok(())
}

/// `mu,re,im,abs2`.
pub fn write_momentum<W: Write>(mut w: W, phi: &MomentumAmplitude) -> io::Result<()> {
    writeln!(w, "mu,re,im,abs2")?;
    for (mu, v) in phi.mu.iter().zip(&phi.values) {
        writeln!(
            w,
            "{},{},{},{}",
            format_number(*mu),
            format_number(v.re),
            format_number(v.im),
            format_number(v.norm_sqr())
        )?;
    }
    Ok(())
}

/// `x,vbar`; entries below the density cutoff are written as `-inf`.
pub fn write_potential<W: Write>(mut w: W, table: &EffectivePotentialTable) -> io::Result<()> {
    writeln!(w, "x,vbar")?;
    for (x, v) in table.domain.nodes().zip(&table.values) {
        writeln!(
            w,
            "{},{}",
            format_number(x),
            format_number(v.unwrap_or(f64::NEG_INFINITY))
        )?;
    }
    Ok(())
}

/// `t,x_inversion,x_bohm,gap`.
pub fn write_comparison<W: Write>(mut w: W, report: &DivergenceReport) -> io::Result<()> {
    writeln!(w, "t,x_inversion,x_bohm,gap")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{}",
            format_number(r.t),
            format_number(r.x_inversion),
            format_number(r.x_bohm),
            format_number(r.gap)
        )?;
    }
    Ok(())
}

/// `x_lo,x_hi,count,density,target`.
pub fn write_histogram<W: Write>(
    mut w: W,
    h: &Histogram,
    target: impl Fn(f64) -> f64,
) -> io::Result<()> {
    writeln!(w, "x_lo,x_hi,count,density,target")?;
    for (k, d) in h.density().iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_number(h.edges()[k]),
            format_number(h.edges()[k + 1]),
            h.counts()[k],
            format_number(*d),
            format_number(target(h.center(k)))
        )?;
    }
    Ok(())
}

/// `x,density` at the grid nodes.
pub fn write_density<W: Write, D: DensityProfile + ?Sized>(mut w: W, d: &D) -> io::Result<()> {
    writeln!(w, "x,density")?;
    for (x, p) in d.domain().nodes().zip(d.node_densities()) {
        writeln!(w, "{},{}", format_number(x), format_number(p))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.5), "-0.5");
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_number(123456.789012345), "123456.789012");
        assert_eq!(format_number(0.000123456789012345), "0.000123456789012");
        assert_eq!(format_number(1.5e-9), "1.5e-9");
        assert_eq!(format_number(2.5e20), "2.5e20");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_number(f64::NAN), "singular");
        assert_eq!(format_number(-1e-17 * 0.0), "0");
    }

    #[test]
    fn trajectory_csv_layout() {
        use crate::trajectory::{Direction, Mode, TrajectorySample};
        let t = Trajectory {
            samples: vec![
                TrajectorySample {
                    t: 0.0,
                    x: -0.5,
                    v: f64::INFINITY,
                },
                TrajectorySample {
                    t: 0.5,
                    x: 0.0,
                    v: 0.5,
                },
            ],
            period: 1.0,
            t0: 0.0,
            direction: Direction::Forward,
            mode: Mode::SinglePass,
        };
        let mut buf = Vec::new();
        write_trajectories(&mut buf, &[t.clone(), t]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "t,x,v,member_id\n0,-0.5,inf,0\n0.5,0,0.5,0\n0,-0.5,inf,1\n0.5,0,0.5,1\n"
        );
    }
}
