use crate::error::{invalid, Result};

/// Physical constants of a run: mass, reduced Planck constant, traversal
/// period and speed cap. Natural units (all ones, cap 10) by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mass: f64,
    pub hbar: f64,
    /// Time for one monotone pass across the domain.
    pub period: f64,
    /// Speed cap used by the superluminal diagnostics.
    pub speed_cap: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, hbar: f64, period: f64, speed_cap: f64) -> Result<Self> {
        for (name, v) in [
            ("mass", mass),
            ("hbar", hbar),
            ("period", period),
            ("speed_cap", speed_cap),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            mass,
            hbar,
            period,
            speed_cap,
        })
    }

    pub fn with_period(self, period: f64) -> Result<Self> {
        Self::new(self.mass, self.hbar, period, self.speed_cap)
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            period: 1.0,
            speed_cap: 10.0,
        }
    }
}
