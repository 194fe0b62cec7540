//! Constant-step implicit Euler for `E ẏ + A y = s(t)`:
//! `(E/Δt + A) y_{n+1} = (E/Δt) y_n + s(t_{n+1})`, with a single
//! factorization per run.

use crate::circuit::DaeSystem;
use crate::linalg::SparseLu;
use crate::{Error, Result};

/// Largest number of steps a run may take.
pub const MAX_STEPS: f64 = 1e7;

/// Residual bound on the algebraic rows for accepting the zero state.
pub const CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// All-zero state, checked for consistency with the sources at `t0`.
    ZeroStart,
    Provided(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub initial: InitialState,
    /// A run stops with a divergence marker once `‖y‖∞` exceeds this.
    pub blowup: f64,
    /// Keep every `k`-th full state.
    pub snapshot_stride: Option<usize>,
}

impl StepperConfig {
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Self {
        StepperConfig {
            t0,
            t_end,
            dt,
            initial: InitialState::ZeroStart,
            blowup: 1e12,
            snapshot_stride: None,
        }
    }

    pub fn n_steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step {} must be positive",
                self.dt
            )));
        }
        if !(self.t_end > self.t0) {
            return Err(Error::InvalidArgument(
                "end time must exceed start time".into(),
            ));
        }
        let n = ((self.t_end - self.t0) / self.dt).round();
        if n > MAX_STEPS {
            return Err(Error::InvalidArgument(format!(
                "{n} steps exceed the limit {MAX_STEPS}"
            )));
        }
        Ok((n as usize).max(1))
    }
}

/// Terminal current and voltage of one probed branch at every recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub name: String,
    pub i: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub probes: Vec<ProbeSeries>,
    /// `(step, state)` pairs at the configured stride.
    pub snapshots: Vec<(usize, Vec<f64>)>,
    /// Step at which the state exceeded the blow-up bound or became
    /// non-finite; the series stops there.
    pub divergence: Option<usize>,
    pub final_state: Vec<f64>,
}

impl TimeSeries {
    pub fn probe(&self, name: &str) -> Option<&ProbeSeries> {
        self.probes
            .iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// The zero state, provided it satisfies the algebraic equations at `t0`.
pub fn consistent_zero_start(dae: &DaeSystem, t0: f64) -> Result<Vec<f64>> {
    let s = dae.source(t0);
    let residual = dae
        .algebraic_rows()
        .iter()
        .map(|&r| s[r].abs())
        .fold(0.0, f64::max);
    if residual > CONSISTENCY_TOL {
        return Err(Error::InconsistentInitialState {
            residual,
            tol: CONSISTENCY_TOL,
        });
    }
    Ok(vec![0.0; dae.dim()])
}

pub fn integrate(dae: &DaeSystem, cfg: &StepperConfig) -> Result<TimeSeries> {
    let n_steps = cfg.n_steps()?;
    let n = dae.dim();
    let mut y = match &cfg.initial {
        InitialState::ZeroStart => consistent_zero_start(dae, cfg.t0)?,
        InitialState::Provided(y0) => {
            if y0.len() != n {
                return Err(Error::Dimension(format!(
                    "initial state has {} entries, system has {n}",
                    y0.len()
                )));
            }
            y0.clone()
        }
    };
    let e_dt = dae.e.scaled(1.0 / cfg.dt);
    let lhs = e_dt.add_scaled(&dae.a, 1.0)?;
    let lu = SparseLu::factorize(&lhs).map_err(|e| Error::SingularSystemAtStep {
        step: 0,
        source: Box::new(e),
    })?;

    let mut out = TimeSeries {
        times: Vec::with_capacity(n_steps + 1),
        probes: dae
            .probes
            .iter()
            .map(|p| ProbeSeries {
                name: p.name.clone(),
                i: Vec::with_capacity(n_steps + 1),
                v: Vec::with_capacity(n_steps + 1),
            })
            .collect(),
        snapshots: Vec::new(),
        divergence: None,
        final_state: Vec::new(),
    };
    let record = |out: &mut TimeSeries, step: usize, t: f64, y: &[f64], prev: &[f64]| {
        out.times.push(t);
        for (p, s) in dae.probes.iter().zip(&mut out.probes) {
            s.i.push(p.current(y, prev, cfg.dt, t));
            s.v.push(p.voltage(y));
        }
        if let Some(k) = cfg.snapshot_stride {
            if k > 0 && step % k == 0 {
                out.snapshots.push((step, y.to_vec()));
            }
        }
    };
    record(&mut out, 0, cfg.t0, &y, &y);

    for step in 1..=n_steps {
        let t = cfg.t0 + step as f64 * cfg.dt;
        let mut rhs = e_dt.mul_vec(&y);
        for (r, s) in rhs.iter_mut().zip(dae.source(t)) {
            *r += s;
        }
        let next = lu.solve(&rhs).map_err(|e| Error::SingularSystemAtStep {
            step,
            source: Box::new(e),
        })?;
        let norm = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !norm.is_finite() || norm > cfg.blowup {
            out.divergence = Some(step);
            break;
        }
        record(&mut out, step, t, &next, &y);
        y = next;
    }
    out.final_state = y;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{mna_stamp, parse_netlist, FieldSystems};

    #[test]
    fn scalar_decay_one_step() {
        // Inductor discharging through a resistor: L di/dt = -R i.
        let net = parse_netlist("L1 1 0 1\nR1 1 0 1").unwrap();
        let dae = mna_stamp(&net, &FieldSystems::new()).unwrap();
        let mut cfg = StepperConfig::new(0.0, 0.5, 0.5);
        cfg.initial = InitialState::Provided(vec![-1.0, 1.0]);
        let ts = integrate(&dae, &cfg).unwrap();
        assert!((ts.probe("L1").unwrap().i[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_start_consistency() {
        let dc = mna_stamp(
            &parse_netlist("V1 1 0 DC 1\nR1 1 0 1").unwrap(),
            &FieldSystems::new(),
        )
        .unwrap();
        assert!(matches!(
            consistent_zero_start(&dc, 0.0),
            Err(Error::InconsistentInitialState { .. })
        ));
        let sin = mna_stamp(
            &parse_netlist("V1 1 0 PSIN 1 50 1e-3 1e9\nR1 1 0 1").unwrap(),
            &FieldSystems::new(),
        )
        .unwrap();
        assert_eq!(consistent_zero_start(&sin, 0.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn bad_config() {
        assert!(StepperConfig::new(0.0, 1.0, 0.0).n_steps().is_err());
        assert!(StepperConfig::new(1.0, 1.0, 0.1).n_steps().is_err());
        assert!(StepperConfig::new(0.0, 1e3, 1e-5).n_steps().is_err());
        assert_eq!(
            StepperConfig::new(0.0, 22e-3, 1e-5).n_steps().unwrap(),
            2200
        );
    }
}
