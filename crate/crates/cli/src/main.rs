use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use foil_cli::config::{Drive, ExperimentConfig, MeshChoice};
use foil_cli::experiments::{
    build_mesh, build_system, demo_inductor, integrate_netlist, run_classify, run_fig4, run_fig5,
    simulate_element, Run,
};
use foil_cli::output::{emit_csv, emit_svg_plot, Trace, Waveforms};
use foil_core::circuit::{parse_netlist, BranchKind, FieldMode, FieldSystems, Netlist};
use foil_core::mesh::{read_mesh, refine_uniform, write_mesh, Mesh, RegionTag};
use foil_core::winding::{load_system, save_system, AssembledFoilSystem};

#[derive(Parser)]
#[command(
    name = "foilsim",
    version,
    about = "Foil-winding field/circuit experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// coarse, fine, coarse+k, fine+k, or a refinement count of coarse.
    #[arg(long, global = true)]
    mesh_level: Option<MeshChoice>,
    /// G, Ge or SOLID.
    #[arg(long, global = true)]
    mode: Option<FieldMode>,
    /// v or i.
    #[arg(long, global = true)]
    drive: Option<Drive>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, refine or inspect meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Assemble the foil system on a mesh and save it for netlists.
    Assemble {
        /// Mesh file; defaults to the generator at --mesh-level.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long, default_value = "foil.sys")]
        output: PathBuf,
    },
    /// Classify the element for both conductance definitions.
    Classify,
    /// Run one transient and write its terminal waveforms.
    Simulate {
        /// Netlist file; defaults to a source in series with the element.
        #[arg(long)]
        netlist: Option<PathBuf>,
        /// Branch whose terminal quantities are recorded.
        #[arg(long, default_value = "FW1")]
        probe: String,
        /// Run duration in seconds (config `duration` otherwise).
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Perturbation study of current- and voltage-driven windings.
    Fig4,
    /// Original versus consistent conductance on coarse and fine meshes.
    Fig5,
    /// Closed-form checks on an ideal inductor.
    DemoInductor,
}

#[derive(Subcommand)]
enum MeshCommand {
    Gen {
        /// Target edge length in m, instead of --mesh-level.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value = "mesh.foilmesh")]
        output: PathBuf,
    },
    Refine {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: u32,
    },
    Info {
        input: PathBuf,
    },
}

fn load_config(c: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = c.mesh_level {
        cfg.mesh_level = m;
    }
    if let Some(m) = c.mode {
        cfg.mode = m;
    }
    if let Some(d) = c.drive {
        cfg.drive = d;
    }
    if let Some(dt) = c.dt {
        cfg.dt = dt;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_mesh_file(path: &Path) -> anyhow::Result<Mesh> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_mesh(&text)?)
}

fn write_mesh_file(mesh: &Mesh, path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, write_mesh(mesh)).with_context(|| format!("writing {}", path.display()))
}

fn mesh_info(mesh: &Mesh) -> String {
    let areas = mesh.region_areas();
    let mut s = format!(
        "nodes = {}\ntriangles = {}\nedges = {}\nboundary_nodes = {}\n",
        mesh.n_nodes(),
        mesh.n_triangles(),
        mesh.n_edges(),
        mesh.boundary().iter().filter(|b| **b).count()
    );
    for tag in [
        RegionTag::Air,
        RegionTag::Yoke,
        RegionTag::AirGap,
        RegionTag::FoilWinding,
    ] {
        s += &format!(
            "area_{} = {:e}\n",
            tag.name(),
            areas.get(&tag).copied().unwrap_or(0.0)
        );
    }
    s
}

struct Emitter<'a> {
    dir: &'a Path,
    format: Format,
}

impl Emitter<'_> {
    fn csv(&self, name: &str, w: &Waveforms) -> anyhow::Result<()> {
        if self.format != Format::Svg {
            emit_csv(w, &self.dir.join(format!("{name}.csv")))?;
        }
        Ok(())
    }

    fn svg(&self, name: &str, traces: &[Trace], y_label: &str, title: &str) -> anyhow::Result<()> {
        if self.format != Format::Csv {
            emit_svg_plot(
                traces,
                "Time (s)",
                y_label,
                title,
                &self.dir.join(format!("{name}.svg")),
            )?;
        }
        Ok(())
    }
}

fn trace(label: String, w: &Waveforms, current: bool) -> Trace {
    Trace {
        label,
        x: w.t.clone(),
        y: if current { w.i.clone() } else { w.v.clone() },
    }
}

fn load_field_systems(
    net: &Netlist,
    base: &Path,
) -> anyhow::Result<HashMap<String, AssembledFoilSystem>> {
    let mut out = HashMap::new();
    for b in &net.branches {
        if let BranchKind::FieldElement { path, .. } = &b.kind {
            let p = base.join(path);
            let sys = load_system(&p).with_context(|| format!("loading {}", p.display()))?;
            out.insert(b.name.clone(), sys);
        }
    }
    Ok(out)
}

fn simulate(
    cfg: &ExperimentConfig,
    netlist: Option<&Path>,
    probe: &str,
    duration: f64,
) -> anyhow::Result<Run> {
    match netlist {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let net = parse_netlist(&text)?;
            let owned = load_field_systems(&net, path.parent().unwrap_or(Path::new(".")))?;
            let systems: FieldSystems = owned.iter().map(|(k, v)| (k.clone(), v)).collect();
            integrate_netlist(&net, &systems, cfg.dt, duration, probe)
        }
        None => {
            if probe != foil_cli::experiments::ELEMENT {
                bail!(
                    "the generated circuit only probes {}",
                    foil_cli::experiments::ELEMENT
                );
            }
            let sys = build_system(cfg, cfg.mesh_level)?;
            simulate_element(
                &sys,
                cfg.drive,
                cfg.mode,
                cfg.waveform(true),
                cfg.dt,
                duration,
            )
        }
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli.common)?;
    let emit = Emitter {
        dir: &cli.common.out,
        format: cli.common.format,
    };
    let ensure_out = || {
        std::fs::create_dir_all(emit.dir)
            .with_context(|| format!("creating {}", emit.dir.display()))
    };
    match cli.command {
        Command::Mesh(MeshCommand::Gen { h, output }) => {
            let mesh = match h {
                Some(h) => cfg.geometry().generate(h)?,
                None => build_mesh(&cfg, cfg.mesh_level)?,
            };
            write_mesh_file(&mesh, &output)?;
            print!("{}", mesh_info(&mesh));
        }
        Command::Mesh(MeshCommand::Refine {
            input,
            output,
            times,
        }) => {
            let mut mesh = read_mesh_file(&input)?;
            for _ in 0..times {
                mesh = refine_uniform(&mesh);
            }
            write_mesh_file(&mesh, &output)?;
            print!("{}", mesh_info(&mesh));
        }
        Command::Mesh(MeshCommand::Info { input }) => {
            print!("{}", mesh_info(&read_mesh_file(&input)?))
        }
        Command::Assemble { mesh, output } => {
            let sys = match mesh {
                Some(p) => foil_cli::experiments::assemble_on(&cfg, &read_mesh_file(&p)?)?,
                None => build_system(&cfg, cfg.mesh_level)?,
            };
            save_system(&sys, &output)?;
            println!(
                "N_w = {}\nN_p = {}\nturns = {}",
                sys.n_field(),
                sys.n_voltage(),
                sys.turns
            );
            println!(
                "norm_G_minus_Ge_F = {:e}",
                sys.conductance_difference().norm()
            );
        }
        Command::Classify => print!("{}", run_classify(&cfg)?),
        Command::Simulate {
            netlist,
            probe,
            duration,
        } => {
            let run = simulate(
                &cfg,
                netlist.as_deref(),
                &probe,
                duration.unwrap_or(cfg.duration),
            )?;
            ensure_out()?;
            let name = format!("simulate_{probe}");
            emit.csv(&name, &run.waveforms)?;
            emit.svg(
                &format!("{name}_v"),
                &[trace(probe.clone(), &run.waveforms, false)],
                "Voltage (V)",
                &name,
            )?;
            emit.svg(
                &format!("{name}_i"),
                &[trace(probe.clone(), &run.waveforms, true)],
                "Current (A)",
                &name,
            )?;
            println!(
                "steps = {}\ndivergence = {:?}",
                run.waveforms.len(),
                run.divergence
            );
        }
        Command::Fig4 => {
            ensure_out()?;
            let res = run_fig4(&cfg)?;
            for drive in [Drive::Current, Drive::Voltage] {
                let mut traces = Vec::new();
                for r in res.runs.iter().filter(|r| r.drive == drive) {
                    emit.csv(&format!("fig4_{drive}_dt{:e}", r.dt), &r.run.waveforms)?;
                    traces.push(trace(
                        format!("dt = {:e} s", r.dt),
                        &r.run.waveforms,
                        drive == Drive::Voltage,
                    ));
                }
                let (y, title) = match drive {
                    Drive::Current => ("Voltage (V)", "current-driven winding: terminal voltage"),
                    Drive::Voltage => ("Current (A)", "voltage-driven winding: terminal current"),
                };
                emit.svg(&format!("fig4_{drive}"), &traces, y, title)?;
            }
            print!("{}", res.report());
        }
        Command::Fig5 => {
            ensure_out()?;
            let res = run_fig5(&cfg)?;
            for m in &res.meshes {
                emit.csv(&format!("fig5_{}_G", m.mesh), &m.original.waveforms)?;
                emit.csv(&format!("fig5_{}_Ge", m.mesh), &m.consistent.waveforms)?;
                let traces = [
                    trace("G".into(), &m.original.waveforms, false),
                    trace("Ge".into(), &m.consistent.waveforms, false),
                ];
                emit.svg(
                    &format!("fig5_{}", m.mesh),
                    &traces,
                    "Voltage (V)",
                    &format!("{} mesh, {} nodes", m.mesh, m.n_nodes),
                )?;
            }
            print!("{}", res.report());
        }
        Command::DemoInductor => print!("{}", demo_inductor(&cfg)?),
    }
    Ok(())
}
