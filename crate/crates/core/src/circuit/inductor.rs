//! Closed-form behaviour of an ideal inductor in flux form,
//! `ψ̇ = v`, `ψ = L i`.

use super::Waveform;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpedInductor {
    pub inductance: f64,
    /// Flux linkage at the initial time.
    pub flux: f64,
}

impl LumpedInductor {
    pub fn new(inductance: f64, flux: f64) -> Result<Self> {
        if !(inductance.is_finite() && inductance > 0.0) {
            return Err(Error::NonpositiveL(inductance));
        }
        Ok(LumpedInductor { inductance, flux })
    }

    /// Voltage-driven: `i(t) = (ψ₀ + ∫_{t0}^{t} v) / L`. Any initial flux is
    /// admissible.
    pub fn current(&self, v: &Waveform, t0: f64, t: f64) -> f64 {
        (self.flux + v.integral(t0, t)) / self.inductance
    }

    /// Current-driven: `v(t) = L di/dt`. The voltage is fully determined by
    /// the excitation, including at `t0`.
    pub fn voltage(&self, i: &Waveform, t: f64) -> f64 {
        self.inductance * i.derivative(t)
    }

    /// Whether a prescribed initial voltage is consistent with a
    /// current-driven excitation, within `tol` relative.
    pub fn consistent_initial_voltage(&self, i: &Waveform, t0: f64, v0: f64, tol: f64) -> bool {
        let v = self.voltage(i, t0);
        (v - v0).abs() <= tol * v.abs().max(v0.abs()).max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn voltage_driven_closed_form() {
        let l = LumpedInductor::new(1e-3, 0.0).unwrap();
        let v = Waveform::Sin { amp: 1.0, f: 50.0 };
        let i = l.current(&v, 0.0, 5e-3);
        assert!((i - 1.0 / (2.0 * PI * 50.0 * 1e-3)).abs() < 1e-12);
        assert!((i - 3.1831).abs() < 1e-4);
        let held = LumpedInductor::new(2.0, 3.0).unwrap();
        assert_eq!(held.current(&Waveform::Const(0.0), 0.0, 7.0), 1.5);
    }

    #[test]
    fn current_driven_closed_form() {
        let l = LumpedInductor::new(2.0, 0.0).unwrap();
        let f = 1.0 / (2.0 * PI);
        let i = Waveform::Sin { amp: 1.0, f };
        assert!((l.voltage(&i, 0.7) - 2.0 * 0.7f64.cos()).abs() < 1e-14);
        assert_eq!(l.voltage(&Waveform::Const(4.0), 1.0), 0.0);
        assert!(l.consistent_initial_voltage(&i, 0.0, 2.0, 1e-12));
        assert!(!l.consistent_initial_voltage(&i, 0.0, 0.0, 1e-12));
        assert!(LumpedInductor::new(0.0, 0.0).is_err());
    }
}
