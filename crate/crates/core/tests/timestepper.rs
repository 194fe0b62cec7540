use std::f64::consts::PI;

use foil_core::assembly::FieldDiscretization;
use foil_core::circuit::{mna_stamp, parse_netlist, FieldSystems, DEFAULT_PERTURBATION_FREQUENCY};
use foil_core::linalg::CsrMatrix;
use foil_core::mesh::{GeometrySpec, MeshLevel};
use foil_core::timestepper::{integrate, StepperConfig};
use foil_core::winding::{
    assemble_foil_system, transformer_materials, AssembledFoilSystem, FoilWindingSpec, VoltageBasis,
};

fn coarse_system(n_p: usize) -> AssembledFoilSystem {
    let mesh = GeometrySpec::default()
        .generate_level(MeshLevel::Coarse)
        .unwrap();
    let spec = FoilWindingSpec::default();
    let mats = transformer_materials(&spec, 10.0, 1000.0).unwrap();
    let basis = VoltageBasis::legendre(n_p).unwrap();
    assemble_foil_system(
        &mesh,
        &mats,
        &FieldDiscretization::dirichlet(&mesh),
        &spec,
        &basis,
    )
    .unwrap()
}

/// Current of a series RL circuit switched onto `sin(ωt)` at t = 0.
fn rl_current(r: f64, l: f64, f: f64, t: f64) -> f64 {
    let w = 2.0 * PI * f;
    let z = r.hypot(w * l);
    let phi = (w * l / r).atan();
    ((w * t - phi).sin() + phi.sin() * (-t * r / l).exp()) / z
}

#[test]
fn series_rl_converges_first_order() {
    let (r, l) = (0.5, 1e-3);
    let net = parse_netlist(&format!("V1 1 0 SIN 1 50\nR1 1 2 {r}\nL1 2 0 {l}")).unwrap();
    let dae = mna_stamp(&net, &FieldSystems::new()).unwrap();
    let mut errs = Vec::new();
    for dt in [1e-3, 5e-4, 2.5e-4] {
        let ts = integrate(&dae, &StepperConfig::new(0.0, 20e-3, dt)).unwrap();
        let i = &ts.probe("L1").unwrap().i;
        let e = ts
            .times
            .iter()
            .zip(i)
            .map(|(t, i)| (i - rl_current(r, l, 50.0, *t)).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((0.8..=1.2).contains(&order), "{errs:?}");
    }
}

#[test]
fn perturbed_current_through_inductor_hits_the_difference_bound() {
    let (l, eps, dt) = (1e-3, 1e-3, 1e-4);
    let noisy = parse_netlist(&format!(
        "I1 1 0 PSIN 1 50 {eps} {DEFAULT_PERTURBATION_FREQUENCY}\nL1 1 0 {l}"
    ))
    .unwrap();
    let clean = parse_netlist(&format!("I1 1 0 SIN 1 50\nL1 1 0 {l}")).unwrap();
    let run = |net| {
        let dae = mna_stamp(net, &FieldSystems::new()).unwrap();
        integrate(&dae, &StepperConfig::new(0.0, 22e-3, dt))
            .unwrap()
            .probe("L1")
            .unwrap()
            .v
            .clone()
    };
    let (a, b) = (run(&noisy), run(&clean));
    let peak = a
        .iter()
        .zip(&b)
        .skip(1)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let bound = l * 2.0 * eps / dt;
    assert!(
        peak <= bound * (1.0 + 1e-9) && peak >= bound / 3.0,
        "{peak} vs {bound}"
    );
}

#[test]
fn single_basis_foil_matches_solid_conductor() {
    let sys = coarse_system(1);
    let mut fs = FieldSystems::new();
    fs.insert("FW1".into(), &sys);
    let run = |mode: &str| {
        let net = parse_netlist(&format!("V1 1 0 SIN 0.1 50\nFW1 1 0 FILE s MODE {mode}")).unwrap();
        let dae = mna_stamp(&net, &fs).unwrap();
        integrate(&dae, &StepperConfig::new(0.0, 100.0 * 1e-4, 1e-4))
            .unwrap()
            .probe("FW1")
            .unwrap()
            .i
            .clone()
    };
    let solid = run("SOLID");
    assert_eq!(solid.len(), 101);
    let scale = solid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for mode in ["Ge", "G"] {
        let foil = run(mode);
        let diff = foil
            .iter()
            .zip(&solid)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-9 * scale, "{mode}: {diff} vs {scale}");
    }
}

#[test]
fn discrete_power_balance_of_voltage_driven_winding() {
    let sys = coarse_system(5);
    let mut fs = FieldSystems::new();
    fs.insert("FW1".into(), &sys);
    let net = parse_netlist("V1 1 0 SIN 0.1 50\nFW1 1 0 FILE s MODE Ge").unwrap();
    let dae = mna_stamp(&net, &fs).unwrap();
    let dt = 1e-4;
    let mut cfg = StepperConfig::new(0.0, 60.0 * dt, dt);
    cfg.snapshot_stride = Some(1);
    let ts = integrate(&dae, &cfg).unwrap();
    let block = dae.field("FW1").unwrap();
    let probe = ts.probe("FW1").unwrap();
    let e = sys.source_fields.as_ref().unwrap();
    let (k, m): (&CsrMatrix, &CsrMatrix) = (&sys.stiffness, &sys.mass);
    let field = |y: &[f64]| y[block.a_offset..block.a_offset + block.n_a].to_vec();
    for n in 11..ts.snapshots.len() {
        let (a1, a0) = (field(&ts.snapshots[n].1), field(&ts.snapshots[n - 1].1));
        let u = &ts.snapshots[n].1[block.u_offset..block.u_offset + block.n_u];
        let delta: Vec<f64> = a1.iter().zip(&a0).map(|(x, y)| (x - y) / dt).collect();
        let eu = e * nalgebra::DVector::from_column_slice(u);
        let slip: Vec<f64> = delta.iter().zip(eu.iter()).map(|(d, s)| d - s).collect();
        let joule = m.bilinear(&slip, &slip);
        let numerical = 0.5 * dt * k.bilinear(&delta, &delta);
        let d_energy = 0.5 * (k.bilinear(&a1, &a1) - k.bilinear(&a0, &a0)) / dt;
        let power = probe.i[n] * probe.v[n];
        assert!(joule >= 0.0 && numerical >= 0.0);
        let rhs = d_energy + joule + numerical;
        let scale = d_energy.abs() + joule + numerical;
        assert!(
            (power - rhs).abs() <= 0.05 * scale,
            "step {n}: {power} vs {rhs}"
        );
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let sys = coarse_system(5);
    let mut fs = FieldSystems::new();
    fs.insert("FW1".into(), &sys);
    let net = parse_netlist(&format!(
        "I1 1 0 PSIN 1 50 1e-3 {DEFAULT_PERTURBATION_FREQUENCY}\nFW1 1 0 FILE s MODE Ge"
    ))
    .unwrap();
    let dae = mna_stamp(&net, &fs).unwrap();
    let cfg = StepperConfig::new(0.0, 5e-3, 1e-4);
    let a = integrate(&dae, &cfg).unwrap();
    let b = integrate(&dae, &cfg).unwrap();
    assert_eq!(a.probes, b.probes);
    assert_eq!(a.final_state, b.final_state);
}

#[test]
fn field_stamp_adds_field_voltage_and_current_rows() {
    let sys = coarse_system(5);
    let mut fs = FieldSystems::new();
    fs.insert("FW1".into(), &sys);
    let net = parse_netlist("V1 1 0 SIN 1 50\nFW1 1 0 FILE s MODE Ge").unwrap();
    let dae = mna_stamp(&net, &fs).unwrap();
    // one node, one source current, then the element block
    assert_eq!(dae.dim(), 2 + sys.n_field() + sys.n_voltage() + 1);
}
