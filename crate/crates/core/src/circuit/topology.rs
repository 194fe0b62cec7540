//! Topological index criteria for MNA systems: cutsets made only of
//! inductors and current sources, and loops made only of capacitors and
//! voltage sources.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{Branch, BranchKind, Netlist};
use crate::{Error, Result};

/// Circuit behaviour of a field element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    InductanceLike,
    ResistanceLike,
}

/// Field-element classifications keyed by branch name.
pub type Classes = HashMap<String, ElementClass>;

/// Largest number of non-ground nodes for which minimal cutsets are
/// enumerated exhaustively.
pub const CUTSET_ENUMERATION_LIMIT: usize = 20;

fn is_li(b: &Branch, classes: &Classes) -> Result<bool> {
    Ok(match &b.kind {
        BranchKind::Inductor(_) | BranchKind::CurrentSource(_) => true,
        BranchKind::FieldElement { .. } => match classes.get(&b.name) {
            Some(ElementClass::InductanceLike) => true,
            Some(ElementClass::ResistanceLike) => false,
            None => return Err(Error::UnclassifiedElement(b.name.clone())),
        },
        _ => false,
    })
}

fn is_cv(b: &Branch) -> bool {
    matches!(
        b.kind,
        BranchKind::Capacitor(_) | BranchKind::VoltageSource(_)
    )
}

/// Vertices (ground = 0, node k = k + 1) reachable from ground through the
/// branches accepted by `keep`.
pub fn reachable_from_ground(net: &Netlist, keep: impl Fn(&Branch) -> bool) -> Vec<bool> {
    components(net, |i| keep(&net.branches[i]))
        .iter()
        .map(|&c| c == 0)
        .collect()
}

/// Connected-component label of every vertex, using the branches whose index
/// passes `keep`. Ground's component is labelled 0.
fn components(net: &Netlist, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let nv = net.n_nodes() + 1;
    let mut adj = vec![Vec::new(); nv];
    for (i, b) in net.branches.iter().enumerate() {
        if keep(i) {
            let (p, n) = (Netlist::vertex(b.p), Netlist::vertex(b.n));
            adj[p].push(n);
            adj[n].push(p);
        }
    }
    let mut label = vec![usize::MAX; nv];
    let mut next = 0;
    for s in 0..nv {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    q.push_back(w);
                }
            }
        }
        next += 1;
    }
    label
}

fn connected_subset(net: &Netlist, inside: &[bool]) -> bool {
    let label = components(net, |i| {
        let b = &net.branches[i];
        inside[Netlist::vertex(b.p)] && inside[Netlist::vertex(b.n)]
    });
    let mut first = None;
    for (v, &ins) in inside.iter().enumerate() {
        if ins {
            match first {
                None => first = Some(label[v]),
                Some(l) if l != label[v] => return false,
                _ => {}
            }
        }
    }
    true
}

/// Whether some node is cut off from ground once every non-LI branch is
/// kept, i.e. whether an LI-cutset exists.
pub fn has_li_cutset(net: &Netlist, classes: &Classes) -> Result<bool> {
    let li = net
        .branches
        .iter()
        .map(|b| is_li(b, classes))
        .collect::<Result<Vec<_>>>()?;
    let label = components(net, |i| !li[i]);
    Ok(label.iter().any(|&l| l != 0))
}

/// Cutsets consisting only of inductors, current sources and
/// inductance-like field elements, as sorted lists of branch indices.
///
/// Minimal cutsets are the cuts `δ(S)` where both `S` and its complement are
/// connected; they are enumerated exhaustively up to
/// [`CUTSET_ENUMERATION_LIMIT`] nodes. Larger netlists report one
/// (not necessarily minimal) cut per component that the non-LI branches leave
/// detached from ground.
pub fn detect_li_cutsets(net: &Netlist, classes: &Classes) -> Result<Vec<Vec<usize>>> {
    let li = net
        .branches
        .iter()
        .map(|b| is_li(b, classes))
        .collect::<Result<Vec<_>>>()?;
    let n = net.n_nodes();
    let nv = n + 1;
    let mut out = BTreeSet::new();
    let cut_of = |inside: &[bool]| -> Vec<usize> {
        (0..net.branches.len())
            .filter(|&i| {
                let b = &net.branches[i];
                inside[Netlist::vertex(b.p)] != inside[Netlist::vertex(b.n)]
            })
            .collect()
    };

    if n <= CUTSET_ENUMERATION_LIMIT {
        for mask in 1u64..(1u64 << n) {
            let mut inside = vec![false; nv];
            for k in 0..n {
                inside[k + 1] = mask >> k & 1 == 1;
            }
            let cut = cut_of(&inside);
            if cut.is_empty() || !cut.iter().all(|&i| li[i]) {
                continue;
            }
            let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
            if connected_subset(net, &inside) && connected_subset(net, &outside) {
                out.insert(cut);
            }
        }
    } else {
        let label = components(net, |i| !li[i]);
        let detached: BTreeSet<usize> = label.iter().copied().filter(|&l| l != 0).collect();
        for c in detached {
            let inside: Vec<bool> = label.iter().map(|&l| l == c).collect();
            out.insert(cut_of(&inside));
        }
    }
    Ok(out.into_iter().collect())
}

/// Loops made only of capacitors and voltage sources with at least one
/// voltage source. One loop is reported per voltage source that closes a
/// cycle in the C∪V subgraph: the source plus a shortest C∪V path between
/// its terminals.
pub fn detect_cv_loops(net: &Netlist) -> Vec<Vec<usize>> {
    let nv = net.n_nodes() + 1;
    let mut out = BTreeSet::new();
    for (s, src) in net.branches.iter().enumerate() {
        if !matches!(src.kind, BranchKind::VoltageSource(_)) {
            continue;
        }
        let mut adj = vec![Vec::new(); nv];
        for (i, b) in net.branches.iter().enumerate() {
            if i != s && is_cv(b) {
                let (p, n) = (Netlist::vertex(b.p), Netlist::vertex(b.n));
                adj[p].push((n, i));
                adj[n].push((p, i));
            }
        }
        let (from, to) = (Netlist::vertex(src.p), Netlist::vertex(src.n));
        let mut via = vec![None; nv];
        let mut seen = vec![false; nv];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            for &(w, i) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    via[w] = Some((v, i));
                    q.push_back(w);
                }
            }
        }
        if seen[to] {
            let mut lp = vec![s];
            let mut v = to;
            while let Some((u, i)) = via[v] {
                lp.push(i);
                v = u;
            }
            lp.sort_unstable();
            out.insert(lp);
        }
    }
    out.into_iter().collect()
}

/// Differential index of the MNA equations: 2 if an LI-cutset or a CV-loop
/// exists, else 1. Field elements are treated as inductors or resistors per
/// their classification.
///
/// Exact only for the benign topologies this crate handles (passive R/L/C,
/// independent sources, single-port field elements).
pub fn predict_index(net: &Netlist, classes: &Classes) -> Result<u8> {
    let li = has_li_cutset(net, classes)?;
    let cv = !detect_cv_loops(net).is_empty();
    Ok(if li || cv { 2 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::super::parse_netlist;
    use super::*;

    #[test]
    fn series_current_source_inductor() {
        let net = parse_netlist("I1 1 0 SIN 1 50\nL1 1 0 1e-3").unwrap();
        let c = Classes::new();
        assert_eq!(detect_li_cutsets(&net, &c).unwrap(), vec![vec![0, 1]]);
        assert_eq!(predict_index(&net, &c).unwrap(), 2);
    }

    #[test]
    fn voltage_source_inductor() {
        let net = parse_netlist("V1 1 0 SIN 1 50\nL1 1 0 1e-3").unwrap();
        assert!(detect_li_cutsets(&net, &Classes::new()).unwrap().is_empty());
        assert_eq!(predict_index(&net, &Classes::new()).unwrap(), 1);
    }

    #[test]
    fn cv_loops() {
        let net = parse_netlist("V1 1 0 SIN 1 50\nC1 1 0 1e-6").unwrap();
        assert_eq!(detect_cv_loops(&net), vec![vec![0, 1]]);
        let net = parse_netlist("V1 1 0 SIN 1 50\nR1 1 2 1\nC1 2 0 1e-6").unwrap();
        assert!(detect_cv_loops(&net).is_empty());
        let net = parse_netlist("C1 1 0 1\nC2 1 0 1\nR1 1 0 1").unwrap();
        assert!(detect_cv_loops(&net).is_empty());
    }

    #[test]
    fn unclassified_field_element() {
        let net = parse_netlist("I1 1 0 SIN 1 50\nFW1 1 0 FILE x MODE G").unwrap();
        assert!(matches!(
            predict_index(&net, &Classes::new()),
            Err(Error::UnclassifiedElement(_))
        ));
        let mut c = Classes::new();
        c.insert("FW1".into(), ElementClass::ResistanceLike);
        assert_eq!(predict_index(&net, &c).unwrap(), 1);
        c.insert("FW1".into(), ElementClass::InductanceLike);
        assert_eq!(predict_index(&net, &c).unwrap(), 2);
    }
}
