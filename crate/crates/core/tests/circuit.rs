use std::collections::BTreeSet;

use foil_core::circuit::{
    detect_cv_loops, detect_li_cutsets, has_li_cutset, mna_stamp, parse_netlist, predict_index,
    BranchKind, Classes, ElementClass, FieldSystems, Netlist, Waveform,
};
use proptest::prelude::*;

fn sin() -> Waveform {
    Waveform::Sin { amp: 1.0, f: 50.0 }
}

fn kind(code: u8) -> BranchKind {
    match code % 5 {
        0 => BranchKind::Resistor(1.0),
        1 => BranchKind::Inductor(1e-3),
        2 => BranchKind::Capacitor(1e-6),
        3 => BranchKind::VoltageSource(sin()),
        _ => BranchKind::CurrentSource(sin()),
    }
}

fn is_li(k: &BranchKind) -> bool {
    matches!(k, BranchKind::Inductor(_) | BranchKind::CurrentSource(_))
}

/// Number of connected components among all vertices, ignoring `removed`.
fn n_components(net: &Netlist, removed: u32) -> usize {
    let nv = net.n_nodes() + 1;
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (i, b) in net.branches.iter().enumerate() {
        if removed >> i & 1 == 1 {
            continue;
        }
        let (a, c) = (
            find(&mut parent, Netlist::vertex(b.p)),
            find(&mut parent, Netlist::vertex(b.n)),
        );
        parent[a] = c;
    }
    (0..nv).filter(|&v| find(&mut parent, v) == v).count()
}

/// Minimal cutsets by exhaustive search over branch subsets: removing the
/// subset splits the graph, removing any proper subset obtained by dropping
/// one branch does not.
fn brute_force_li_cutsets(net: &Netlist) -> BTreeSet<Vec<usize>> {
    let nb = net.branches.len();
    let base = n_components(net, 0);
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << nb) {
        if n_components(net, mask) == base {
            continue;
        }
        let minimal = (0..nb)
            .filter(|i| mask >> i & 1 == 1)
            .all(|i| n_components(net, mask & !(1 << i)) == base);
        let members: Vec<usize> = (0..nb).filter(|i| mask >> i & 1 == 1).collect();
        if minimal && members.iter().all(|&i| is_li(&net.branches[i].kind)) {
            out.insert(members);
        }
    }
    out
}

fn random_netlist(nodes: usize, edges: &[(usize, usize, u8)]) -> Option<Netlist> {
    let mut net = Netlist::new();
    for (k, &(p, n, code)) in edges.iter().enumerate() {
        // distinct endpoints by construction
        let p = p % (nodes + 1);
        let n = (p + 1 + n % nodes) % (nodes + 1);
        let kd = kind(code);
        let prefix = match kd {
            BranchKind::Resistor(_) => "R",
            BranchKind::Inductor(_) => "L",
            BranchKind::Capacitor(_) => "C",
            BranchKind::VoltageSource(_) => "V",
            _ => "I",
        };
        net.add(&format!("{prefix}{k}"), &p.to_string(), &n.to_string(), kd);
    }
    net.validate().ok().map(|_| net)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cutsets_match_brute_force(
        nodes in 1usize..6,
        edges in prop::collection::vec((0usize..6, 0usize..6, any::<u8>()), 1..=12),
    ) {
        let Some(net) = random_netlist(nodes, &edges) else { return Ok(()) };
        let found: BTreeSet<Vec<usize>> = detect_li_cutsets(&net, &Classes::new()).unwrap().into_iter().collect();
        let oracle = brute_force_li_cutsets(&net);
        prop_assert_eq!(&found, &oracle);
        prop_assert_eq!(has_li_cutset(&net, &Classes::new()).unwrap(), !oracle.is_empty());
    }

    #[test]
    fn index_invariant_under_relabeling(
        nodes in 1usize..6,
        edges in prop::collection::vec((0usize..6, 0usize..6, any::<u8>()), 1..=10),
        shift in 1usize..50,
    ) {
        let Some(net) = random_netlist(nodes, &edges) else { return Ok(()) };
        let idx = predict_index(&net, &Classes::new()).unwrap();
        // reverse branch order and rename every non-ground node
        let mut renamed = Netlist::new();
        for b in net.branches.iter().rev() {
            let name = |v: Option<usize>| match v {
                None => "0".to_string(),
                Some(k) => format!("n{}", k + shift),
            };
            renamed.add(&format!("{}x", b.name), &name(b.p), &name(b.n), b.kind.clone());
        }
        prop_assert_eq!(predict_index(&renamed, &Classes::new()).unwrap(), idx);
    }

    #[test]
    fn inductance_like_element_acts_as_inductor(
        nodes in 1usize..5,
        edges in prop::collection::vec((0usize..5, 0usize..5, any::<u8>()), 1..=8),
        at in 0usize..8,
    ) {
        let Some(net) = random_netlist(nodes, &edges) else { return Ok(()) };
        let at = at % net.branches.len();
        if !matches!(net.branches[at].kind, BranchKind::Inductor(_)) {
            return Ok(());
        }
        let mut fw = net.clone();
        fw.branches[at].kind = BranchKind::FieldElement { path: "x".into(), mode: "Ge".parse().unwrap() };
        fw.branches[at].name = "FW9".into();
        let classes = Classes::from([("FW9".to_string(), ElementClass::InductanceLike)]);
        prop_assert_eq!(
            predict_index(&fw, &classes).unwrap(),
            predict_index(&net, &Classes::new()).unwrap()
        );
    }
}

fn index_of(text: &str, classes: &[(&str, ElementClass)]) -> u8 {
    let net = parse_netlist(text).unwrap();
    let classes: Classes = classes.iter().map(|(n, c)| (n.to_string(), *c)).collect();
    predict_index(&net, &classes).unwrap()
}

#[test]
fn hand_derived_index_corpus() {
    use ElementClass::*;
    let cases: &[(&str, &str, &[(&str, ElementClass)], u8)] = &[
        ("LI-cutset", "I1 1 0 SIN 1 50\nL1 1 0 1e-3", &[], 2),
        ("V-L loop", "V1 1 0 SIN 1 50\nL1 1 0 1e-3", &[], 1),
        ("CV-loop", "V1 1 0 SIN 1 50\nC1 1 0 1e-6", &[], 2),
        (
            "RL driven by V",
            "V1 1 0 SIN 1 50\nR1 1 2 1\nL1 2 0 1e-3",
            &[],
            1,
        ),
        (
            "RC driven by I",
            "I1 1 0 SIN 1 50\nR1 1 2 1\nC1 2 0 1e-6",
            &[],
            1,
        ),
        (
            "shunted LI",
            "I1 1 0 SIN 1 50\nR1 1 0 10\nL1 1 0 1e-3",
            &[],
            1,
        ),
        (
            "node fed only by I and L",
            "I1 1 2 SIN 1 50\nR1 2 0 1\nL1 1 0 1e-3",
            &[],
            2,
        ),
        (
            "two inductors in series with I",
            "I1 1 0 SIN 1 50\nL1 1 2 1e-3\nL2 2 0 1e-3\nR1 2 0 1",
            &[],
            2,
        ),
        (
            "current-driven foil",
            "I1 1 0 SIN 1 50\nFW1 1 0 FILE s MODE Ge",
            &[("FW1", InductanceLike)],
            2,
        ),
        (
            "voltage-driven foil",
            "V1 1 0 SIN 1 50\nFW1 1 0 FILE s MODE Ge",
            &[("FW1", InductanceLike)],
            1,
        ),
        (
            "current-driven resistance-like foil",
            "I1 1 0 SIN 1 50\nFW1 1 0 FILE s MODE G",
            &[("FW1", ResistanceLike)],
            1,
        ),
        (
            "C-C without source",
            "I1 1 0 SIN 1 50\nR1 1 0 1\nC1 1 2 1e-6\nC2 2 0 1e-6",
            &[],
            1,
        ),
    ];
    for (label, text, classes, want) in cases {
        assert_eq!(index_of(text, classes), *want, "{label}");
    }
}

#[test]
fn cv_loop_requires_a_source() {
    let only_caps = parse_netlist("I1 1 0 SIN 1 50\nC1 1 0 1e-6\nC2 1 0 2e-6\nR1 1 0 1").unwrap();
    assert!(detect_cv_loops(&only_caps).is_empty());
    let vrc = parse_netlist("V1 1 0 SIN 1 50\nR1 1 2 1\nC1 2 0 1e-6").unwrap();
    assert!(detect_cv_loops(&vrc).is_empty());
}

#[test]
fn current_driven_inductor_reduces_to_derivative() {
    // unknowns: node potential, inductor current; after eliminating the
    // current row, the voltage row reads L di/dt = v
    let net = parse_netlist("I1 1 0 SIN 1 50\nL1 1 0 2e-3").unwrap();
    let dae = mna_stamp(&net, &FieldSystems::new()).unwrap();
    assert_eq!(dae.dim(), 2);
    let e = dae.e.to_dense();
    let a = dae.a.to_dense();
    // KCL row: i_L = i_s
    assert_eq!(e.row(0).iter().map(|v| v.abs()).sum::<f64>(), 0.0);
    assert_eq!(a[(0, 1)].abs(), 1.0);
    // branch row: L di/dt − φ = 0
    assert_eq!(e[(1, 1)].abs(), 2e-3);
    assert_eq!(a[(1, 0)].abs(), 1.0);
    assert_eq!((e[(1, 1)] * a[(1, 0)]).signum(), -1.0);
}
