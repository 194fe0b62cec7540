//! Experiment orchestration on top of the engine.

use std::fmt::{self, Write as _};

use anyhow::Context;
use foil_core::assembly::FieldDiscretization;
use foil_core::circuit::{
    mna_stamp, BranchKind, FieldMode, FieldSystems, LumpedInductor, Netlist, Waveform,
};
use foil_core::dae_analysis::{classify_element, Classification, DEFAULT_DIFFERENCE_TOL};
use foil_core::mesh::{refine_uniform, Mesh};
use foil_core::timestepper::{integrate, StepperConfig, TimeSeries};
use foil_core::winding::{assemble_foil_system, transformer_materials, AssembledFoilSystem};

use crate::config::{Drive, ExperimentConfig, MeshChoice};
use crate::metrics::{difference_rms, noise_metric, relative_discrepancy, NoiseMetric};
use crate::output::Waveforms;

/// Name of the field element in generated netlists.
pub const ELEMENT: &str = "FW1";

pub fn build_mesh(cfg: &ExperimentConfig, choice: MeshChoice) -> anyhow::Result<Mesh> {
    let mut mesh = cfg.geometry().generate_level(choice.base)?;
    for _ in 0..choice.refinements {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

pub fn assemble_on(cfg: &ExperimentConfig, mesh: &Mesh) -> anyhow::Result<AssembledFoilSystem> {
    let winding = cfg.winding();
    let mats = transformer_materials(&winding, cfg.yoke_sigma, cfg.yoke_mu_r)?;
    let disc = FieldDiscretization::dirichlet(mesh).with_rule(cfg.quadrature()?);
    Ok(assemble_foil_system(
        mesh,
        &mats,
        &disc,
        &winding,
        &cfg.voltage_basis()?,
    )?)
}

pub fn build_system(
    cfg: &ExperimentConfig,
    choice: MeshChoice,
) -> anyhow::Result<AssembledFoilSystem> {
    assemble_on(cfg, &build_mesh(cfg, choice)?)
}

/// Source in series with one field element between node 1 and ground.
pub fn single_element_netlist(drive: Drive, wave: Waveform, mode: FieldMode) -> Netlist {
    let mut net = Netlist::new();
    let src = match drive {
        Drive::Voltage => ("V1", BranchKind::VoltageSource(wave)),
        Drive::Current => ("I1", BranchKind::CurrentSource(wave)),
    };
    net.add(src.0, "1", "0", src.1);
    net.add(
        ELEMENT,
        "1",
        "0",
        BranchKind::FieldElement {
            path: "<memory>".into(),
            mode,
        },
    );
    net
}

#[derive(Debug, Clone)]
pub struct Run {
    pub waveforms: Waveforms,
    /// Step at which the state exceeded the blow-up bound.
    pub divergence: Option<usize>,
}

impl Run {
    fn from_series(ts: &TimeSeries, probe: &str) -> anyhow::Result<Run> {
        let p = ts
            .probe(probe)
            .with_context(|| format!("no probe {probe}"))?;
        Ok(Run {
            waveforms: Waveforms {
                t: ts.times.clone(),
                i: p.i.clone(),
                v: p.v.clone(),
            },
            divergence: ts.divergence,
        })
    }
}

/// Integrates a netlist whose field elements all refer to `sys`.
pub fn simulate_netlist(
    net: &Netlist,
    sys: &AssembledFoilSystem,
    dt: f64,
    duration: f64,
    probe: &str,
) -> anyhow::Result<Run> {
    let mut systems = FieldSystems::new();
    for b in &net.branches {
        if matches!(b.kind, BranchKind::FieldElement { .. }) {
            systems.insert(b.name.clone(), sys);
        }
    }
    integrate_netlist(net, &systems, dt, duration, probe)
}

pub fn integrate_netlist(
    net: &Netlist,
    systems: &FieldSystems,
    dt: f64,
    duration: f64,
    probe: &str,
) -> anyhow::Result<Run> {
    let dae = mna_stamp(net, systems)?;
    let ts = integrate(&dae, &StepperConfig::new(0.0, duration, dt))?;
    Run::from_series(&ts, probe)
}

pub fn simulate_element(
    sys: &AssembledFoilSystem,
    drive: Drive,
    mode: FieldMode,
    wave: Waveform,
    dt: f64,
    duration: f64,
) -> anyhow::Result<Run> {
    simulate_netlist(
        &single_element_netlist(drive, wave, mode),
        sys,
        dt,
        duration,
        ELEMENT,
    )
}

/// Time steps of the perturbation study.
pub const FIG4_STEPS: [f64; 2] = [1e-4, 1e-5];

#[derive(Debug, Clone)]
pub struct Fig4Run {
    pub drive: Drive,
    pub dt: f64,
    pub run: Run,
    /// Noise of the response quantity (v for current drive, i for voltage
    /// drive) by harmonic fit.
    pub metric: NoiseMetric,
    /// RMS difference to the unperturbed run over the same window.
    pub reference_noise: f64,
}

#[derive(Debug, Clone)]
pub struct Fig4Result {
    pub runs: Vec<Fig4Run>,
    pub epsilon: f64,
}

impl Fig4Result {
    pub fn get(&self, drive: Drive, dt: f64) -> Option<&Fig4Run> {
        self.runs.iter().find(|r| r.drive == drive && r.dt == dt)
    }

    /// Current-driven voltage noise at the small step over the large step.
    pub fn current_noise_ratio(&self) -> Option<f64> {
        let small = self.get(Drive::Current, FIG4_STEPS[1])?;
        let large = self.get(Drive::Current, FIG4_STEPS[0])?;
        Some(small.metric.noise_rms / large.metric.noise_rms)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        for r in &self.runs {
            let _ = writeln!(
                s,
                "drive={} dt={:e} amplitude={:.6e} noise_rms={:.6e} ratio={:.3e} reference_noise={:.6e} diverged={}",
                r.drive,
                r.dt,
                r.metric.amplitude,
                r.metric.noise_rms,
                r.metric.ratio(),
                r.reference_noise,
                r.run.divergence.is_some()
            );
        }
        if let Some(q) = self.current_noise_ratio() {
            let _ = writeln!(s, "current_noise_ratio_small_over_large_dt={q:.4}");
        }
        s
    }
}

fn response(drive: Drive, w: &Waveforms) -> &[f64] {
    match drive {
        Drive::Current => &w.v,
        Drive::Voltage => &w.i,
    }
}

/// Perturbed current- and voltage-driven runs at both time steps on a
/// prebuilt system.
pub fn run_fig4_on(
    cfg: &ExperimentConfig,
    sys: &AssembledFoilSystem,
) -> anyhow::Result<Fig4Result> {
    let mut runs = Vec::new();
    for dt in FIG4_STEPS {
        for drive in [Drive::Current, Drive::Voltage] {
            let run = simulate_element(sys, drive, cfg.mode, cfg.waveform(true), dt, cfg.duration)?;
            let clean =
                simulate_element(sys, drive, cfg.mode, cfg.waveform(false), dt, cfg.duration)?;
            let y = response(drive, &run.waveforms);
            let metric = noise_metric(&run.waveforms.t, y, cfg.frequency);
            let reference_noise = difference_rms(y, response(drive, &clean.waveforms));
            runs.push(Fig4Run {
                drive,
                dt,
                run,
                metric,
                reference_noise,
            });
        }
    }
    Ok(Fig4Result {
        runs,
        epsilon: cfg.epsilon,
    })
}

pub fn run_fig4(cfg: &ExperimentConfig) -> anyhow::Result<Fig4Result> {
    run_fig4_on(cfg, &build_system(cfg, cfg.mesh_level)?)
}

/// Step of the conductance-matrix comparison.
pub const FIG5_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct Fig5Mesh {
    pub mesh: MeshChoice,
    pub n_nodes: usize,
    pub original: Run,
    pub consistent: Run,
    /// `RMS(v_G − v_Ge) / RMS(v_Ge)`.
    pub discrepancy: f64,
}

#[derive(Debug, Clone)]
pub struct Fig5Result {
    pub meshes: Vec<Fig5Mesh>,
}

impl Fig5Result {
    pub fn get(&self, mesh: MeshChoice) -> Option<&Fig5Mesh> {
        self.meshes.iter().find(|m| m.mesh == mesh)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        for m in &self.meshes {
            let _ = writeln!(
                s,
                "mesh={} nodes={} discrepancy={:.6e} diverged_G={:?} diverged_Ge={:?}",
                m.mesh, m.n_nodes, m.discrepancy, m.original.divergence, m.consistent.divergence
            );
        }
        s
    }
}

pub fn run_fig5_meshes(
    cfg: &ExperimentConfig,
    meshes: &[MeshChoice],
) -> anyhow::Result<Fig5Result> {
    let mut out = Vec::new();
    for &choice in meshes {
        let mesh = build_mesh(cfg, choice)?;
        let sys = assemble_on(cfg, &mesh)?;
        let run = |mode| {
            simulate_element(
                &sys,
                Drive::Current,
                mode,
                cfg.waveform(true),
                FIG5_STEP,
                cfg.duration,
            )
        };
        let original = run(FieldMode::Original)?;
        let consistent = run(FieldMode::Consistent)?;
        let discrepancy = relative_discrepancy(&original.waveforms.v, &consistent.waveforms.v);
        out.push(Fig5Mesh {
            mesh: choice,
            n_nodes: mesh.n_nodes(),
            original,
            consistent,
            discrepancy,
        });
    }
    Ok(Fig5Result { meshes: out })
}

pub fn run_fig5(cfg: &ExperimentConfig) -> anyhow::Result<Fig5Result> {
    run_fig5_meshes(cfg, &[MeshChoice::COARSE, MeshChoice::FINE])
}

#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub mesh: MeshChoice,
    pub classes: Vec<Classification>,
    /// `(mesh, nodes, ‖G − G_e‖_F)` over three refinement levels.
    pub trend: Vec<(MeshChoice, usize, f64)>,
}

impl ClassifyReport {
    pub fn trend_nonincreasing(&self) -> bool {
        self.trend.windows(2).all(|w| w[1].2 <= w[0].2)
    }
}

impl fmt::Display for ClassifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mesh = {}", self.mesh)?;
        for c in &self.classes {
            writeln!(f)?;
            f.write_str(&c.report())?;
        }
        writeln!(f)?;
        for (m, n, d) in &self.trend {
            writeln!(f, "trend {m} nodes={n} norm_G_minus_Ge_F={d:e}")?;
        }
        writeln!(f, "trend_nonincreasing = {}", self.trend_nonincreasing())
    }
}

pub fn run_classify(cfg: &ExperimentConfig) -> anyhow::Result<ClassifyReport> {
    let mut classes = Vec::new();
    let mut trend = Vec::new();
    for k in 0..3 {
        let choice = cfg.mesh_level.refined(k);
        let mesh = build_mesh(cfg, choice)?;
        let sys = assemble_on(cfg, &mesh)?;
        if k == 0 {
            for mode in [FieldMode::Consistent, FieldMode::Original] {
                classes.push(classify_element(&sys, mode, DEFAULT_DIFFERENCE_TOL)?);
            }
        }
        let d = sys.conductance_difference();
        trend.push((choice, mesh.n_nodes(), d.norm()));
    }
    Ok(ClassifyReport {
        mesh: cfg.mesh_level,
        classes,
        trend,
    })
}

/// Lumped inductance of the closed-form demonstration.
pub const DEMO_INDUCTANCE: f64 = 1e-3;
pub const DEMO_STEPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

#[derive(Debug, Clone)]
pub struct InductorDemo {
    /// `(Δt, max |i_h − i|)` of the voltage-driven run.
    pub errors: Vec<(f64, f64)>,
    pub orders: Vec<f64>,
    /// Current-driven perturbed run: peak voltage deviation from the
    /// unperturbed run, and the backward-difference bound `L·2ε·I/Δt`.
    pub noise_peak: f64,
    pub noise_bound: f64,
}

impl fmt::Display for InductorDemo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (dt, e) in &self.errors {
            writeln!(f, "dt={dt:e} max_current_error={e:.6e}")?;
        }
        for o in &self.orders {
            writeln!(f, "observed_order={o:.4}")?;
        }
        writeln!(
            f,
            "perturbed_voltage_peak={:.6e} backward_difference_bound={:.6e} ratio={:.4}",
            self.noise_peak,
            self.noise_bound,
            self.noise_peak / self.noise_bound
        )
    }
}

fn inductor_netlist(drive: Drive, wave: Waveform) -> Netlist {
    let mut net = Netlist::new();
    match drive {
        Drive::Voltage => net.add("V1", "1", "0", BranchKind::VoltageSource(wave)),
        Drive::Current => net.add("I1", "1", "0", BranchKind::CurrentSource(wave)),
    };
    net.add("L1", "1", "0", BranchKind::Inductor(DEMO_INDUCTANCE));
    net
}

fn run_lumped(drive: Drive, wave: Waveform, dt: f64, duration: f64) -> anyhow::Result<Run> {
    integrate_netlist(
        &inductor_netlist(drive, wave),
        &FieldSystems::new(),
        dt,
        duration,
        "L1",
    )
}

/// Voltage-driven convergence and current-driven perturbation of an ideal
/// inductor, using the configured frequency, amplitude and perturbation.
pub fn demo_inductor(cfg: &ExperimentConfig) -> anyhow::Result<InductorDemo> {
    let l = LumpedInductor::new(DEMO_INDUCTANCE, 0.0)?;
    let clean = cfg.waveform(false);
    let mut errors = Vec::new();
    for dt in DEMO_STEPS {
        let run = run_lumped(Drive::Voltage, clean, dt, cfg.duration)?;
        let w = &run.waveforms;
        let e =
            w.t.iter()
                .zip(&w.i)
                .map(|(t, i)| (i - l.current(&clean, 0.0, *t)).abs())
                .fold(0.0, f64::max);
        errors.push((dt, e));
    }
    let orders = errors
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect();
    let dt = cfg.dt;
    let noisy = run_lumped(Drive::Current, cfg.waveform(true), dt, cfg.duration)?;
    let smooth = run_lumped(Drive::Current, clean, dt, cfg.duration)?;
    let noise_peak = noisy
        .waveforms
        .v
        .iter()
        .zip(&smooth.waveforms.v)
        .skip(1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(InductorDemo {
        errors,
        orders,
        noise_peak,
        noise_bound: DEMO_INDUCTANCE * 2.0 * cfg.epsilon * cfg.amplitude / dt,
    })
}
