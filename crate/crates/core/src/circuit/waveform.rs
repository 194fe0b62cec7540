use std::f64::consts::PI;
use std::fmt;

/// Default perturbation frequency: `2π · 10¹⁰` Hz, far above any sampling
/// rate used here, so the perturbation acts as sampled noise.
pub const DEFAULT_PERTURBATION_FREQUENCY: f64 = 2.0 * PI * 1e10;

/// Independent source waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Waveform {
    /// `amp · sin(2πft)`
    Sin {
        amp: f64,
        f: f64,
    },
    /// `amp · (sin(2πft) + eps · sin(2π f_eps t))`
    PerturbedSin {
        amp: f64,
        f: f64,
        eps: f64,
        f_eps: f64,
    },
    Const(f64),
}

impl Waveform {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Waveform::Sin { amp, f } => amp * (2.0 * PI * f * t).sin(),
            Waveform::PerturbedSin { amp, f, eps, f_eps } => {
                amp * ((2.0 * PI * f * t).sin() + eps * (2.0 * PI * f_eps * t).sin())
            }
            Waveform::Const(v) => v,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Waveform::Sin { amp, f } => amp * 2.0 * PI * f * (2.0 * PI * f * t).cos(),
            Waveform::PerturbedSin { amp, f, eps, f_eps } => {
                amp * (2.0 * PI * f * (2.0 * PI * f * t).cos()
                    + eps * 2.0 * PI * f_eps * (2.0 * PI * f_eps * t).cos())
            }
            Waveform::Const(_) => 0.0,
        }
    }

    /// `∫_{t0}^{t} w(s) ds` in closed form.
    pub fn integral(&self, t0: f64, t: f64) -> f64 {
        let anti = |s: f64| match *self {
            Waveform::Sin { amp, f } => -amp * (2.0 * PI * f * s).cos() / (2.0 * PI * f),
            Waveform::PerturbedSin { amp, f, eps, f_eps } => {
                -amp * ((2.0 * PI * f * s).cos() / (2.0 * PI * f)
                    + eps * (2.0 * PI * f_eps * s).cos() / (2.0 * PI * f_eps))
            }
            Waveform::Const(v) => v * s,
        };
        anti(t) - anti(t0)
    }

    /// The same waveform without its perturbation term.
    pub fn unperturbed(&self) -> Waveform {
        match *self {
            Waveform::PerturbedSin { amp, f, .. } => Waveform::Sin { amp, f },
            w => w,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            Waveform::Sin { amp, f } if finite(&[amp, f]) && f > 0.0 => Ok(()),
            Waveform::PerturbedSin { amp, f, eps, f_eps }
                if finite(&[amp, f, eps, f_eps]) && f > 0.0 && f_eps > 0.0 =>
            {
                Ok(())
            }
            Waveform::Const(v) if v.is_finite() => Ok(()),
            _ => Err(format!("invalid waveform {self}")),
        }
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Waveform::Sin { amp, f: fr } => write!(f, "SIN {amp} {fr}"),
            Waveform::PerturbedSin {
                amp,
                f: fr,
                eps,
                f_eps,
            } => {
                write!(f, "PSIN {amp} {fr} {eps} {f_eps}")
            }
            Waveform::Const(v) => write!(f, "DC {v}"),
        }
    }
}
