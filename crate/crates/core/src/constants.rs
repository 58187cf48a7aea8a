use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass, light speed, charge and reduced Planck constant of the particle.
///
/// The charge is signed; no physical sign convention is attached to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub mass: f64,
    pub light_speed: f64,
    pub charge: f64,
    pub hbar: f64,
}

impl PhysicalConstants {
    pub fn new(mass: f64, light_speed: f64, charge: f64, hbar: f64) -> Result<Self> {
        let k = Self {
            mass,
            light_speed,
            charge,
            hbar,
        };
        k.validate()?;
        Ok(k)
    }

    /// m = c = ħ = 1 with unit charge.
    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            light_speed: 1.0,
            charge: 1.0,
            hbar: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Contract(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            }
        };
        positive("mass", self.mass)?;
        positive("light_speed", self.light_speed)?;
        positive("hbar", self.hbar)?;
        if !self.charge.is_finite() {
            return Err(Error::Contract("charge must be finite".into()));
        }
        Ok(())
    }

    /// Rest energy m c².
    pub fn rest_energy(&self) -> f64 {
        self.mass * self.light_speed * self.light_speed
    }

    /// Coupling ζ/(ħc) multiplying A in the gauge-covariant derivative.
    pub fn coupling(&self) -> f64 {
        self.charge / (self.hbar * self.light_speed)
    }

    /// Compton wavenumber m c / ħ.
    pub fn compton_wavenumber(&self) -> f64 {
        self.mass * self.light_speed / self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_preset() {
        let k = PhysicalConstants::natural();
        assert!(k.validate().is_ok());
        assert_eq!(k.rest_energy(), 1.0);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(PhysicalConstants::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, 1.0, 1.0, f64::NAN).is_err());
        assert!(PhysicalConstants::new(1.0, 1.0, -3.0, 1.0).is_ok());
    }
}
