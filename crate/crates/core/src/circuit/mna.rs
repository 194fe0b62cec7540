//! Modified nodal analysis: `E ẏ + A y = s(t)`.
//!
//! Unknown layout: non-ground node potentials in netlist order, followed by
//! per-branch extras in branch order:
//!
//! - voltage source, inductor: branch current;
//! - foil field element: field DoFs `a` (`N_w`), voltage coefficients `u`
//!   (`N_p`), terminal current `i`;
//! - solid field element: field DoFs `a`, terminal current `i`.
//!
//! Every branch current flows from `p` to `n` through the branch. KCL rows
//! sum the currents leaving a node. A current source `I` drives its current
//! from `n` through the source into `p`.

use std::collections::HashMap;

use super::{Branch, BranchKind, FieldMode, Netlist, Waveform};
use crate::linalg::CsrMatrix;
use crate::winding::AssembledFoilSystem;
use crate::{Error, Result};

/// Assembled field systems keyed by field-element branch name.
pub type FieldSystems<'a> = HashMap<String, &'a AssembledFoilSystem>;

#[derive(Debug, Clone, PartialEq)]
pub enum Unknown {
    NodePotential(String),
    BranchCurrent(String),
    FieldDof { element: String, k: usize },
    VoltageCoefficient { element: String, l: usize },
}

/// How the current of a probed branch is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurrentProbe {
    /// Read from the state vector.
    Unknown(usize),
    /// Prescribed by a current source.
    Source(Waveform),
    /// `g · v`.
    Conductance(f64),
    /// `C dv/dt`, evaluated by a backward difference.
    Capacitance(f64),
}

/// Terminal quantities of one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    /// State indices of the terminal potentials (`None` for ground).
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub current: CurrentProbe,
}

impl Probe {
    pub fn voltage(&self, y: &[f64]) -> f64 {
        self.p.map_or(0.0, |k| y[k]) - self.n.map_or(0.0, |k| y[k])
    }

    /// Branch current at time `t`; `prev` is the previous state and `dt` the
    /// step (only used for capacitors).
    pub fn current(&self, y: &[f64], prev: &[f64], dt: f64, t: f64) -> f64 {
        match self.current {
            CurrentProbe::Unknown(k) => y[k],
            CurrentProbe::Source(w) => w.eval(t),
            CurrentProbe::Conductance(g) => g * self.voltage(y),
            CurrentProbe::Capacitance(c) => c * (self.voltage(y) - self.voltage(prev)) / dt,
        }
    }
}

/// Position of a field element's blocks in the state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBlock {
    pub name: String,
    pub mode: FieldMode,
    pub a_offset: usize,
    pub n_a: usize,
    /// Offset and length of `u`; zero length in solid mode.
    pub u_offset: usize,
    pub n_u: usize,
    pub current: usize,
}

/// Independent source contribution `sign · w(t)` to one row of `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceTerm {
    pub row: usize,
    pub sign: f64,
    pub waveform: Waveform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaeSystem {
    pub e: CsrMatrix,
    pub a: CsrMatrix,
    pub sources: Vec<SourceTerm>,
    pub layout: Vec<Unknown>,
    pub probes: Vec<Probe>,
    pub fields: Vec<FieldBlock>,
}

impl DaeSystem {
    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    pub fn source(&self, t: f64) -> Vec<f64> {
        let mut s = vec![0.0; self.dim()];
        for term in &self.sources {
            s[term.row] += term.sign * term.waveform.eval(t);
        }
        s
    }

    pub fn probe(&self, name: &str) -> Option<&Probe> {
        self.probes
            .iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
    }

    pub fn field(&self, name: &str) -> Option<&FieldBlock> {
        self.fields
            .iter()
            .find(|f| f.name.eq_ignore_ascii_case(name))
    }

    /// Rows of `E` that are identically zero (algebraic equations).
    pub fn algebraic_rows(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.e.row(i).all(|(_, v)| v == 0.0))
            .collect()
    }
}

struct Stamper {
    e: Vec<(usize, usize, f64)>,
    a: Vec<(usize, usize, f64)>,
}

impl Stamper {
    /// Adds `v` at `(row, col)` when both exist (ground rows/cols vanish).
    fn a(&mut self, row: Option<usize>, col: Option<usize>, v: f64) {
        if let (Some(r), Some(c)) = (row, col) {
            if v != 0.0 {
                self.a.push((r, c, v));
            }
        }
    }

    fn e(&mut self, row: usize, col: usize, v: f64) {
        if v != 0.0 {
            self.e.push((row, col, v));
        }
    }

    /// `+j` leaving `p`, `-j` leaving `n` in the KCL rows.
    fn kcl(&mut self, b: &Branch, j: usize) {
        self.a(b.p, Some(j), 1.0);
        self.a(b.n, Some(j), -1.0);
    }

    /// Row `row` gets `coef · (φ_p − φ_n)` in `A`.
    fn branch_voltage(&mut self, row: usize, b: &Branch, coef: f64) {
        self.a(Some(row), b.p, coef);
        self.a(Some(row), b.n, -coef);
    }

    fn sparse(&mut self, rows: usize, cols: usize, m: &CsrMatrix, scale: f64, into_e: bool) {
        for (i, j, v) in m.triplets() {
            if into_e {
                self.e(rows + i, cols + j, scale * v);
            } else {
                self.a(Some(rows + i), Some(cols + j), scale * v);
            }
        }
    }
}

/// Stamps a validated netlist. `systems` supplies the assembled model of
/// every field element.
pub fn mna_stamp(net: &Netlist, systems: &FieldSystems) -> Result<DaeSystem> {
    net.validate()?;
    let mut layout: Vec<Unknown> = net
        .nodes
        .iter()
        .cloned()
        .map(Unknown::NodePotential)
        .collect();
    let mut st = Stamper {
        e: Vec::new(),
        a: Vec::new(),
    };
    let mut sources = Vec::new();
    let mut probes = Vec::new();
    let mut fields = Vec::new();

    for b in &net.branches {
        let probe = |current| Probe {
            name: b.name.clone(),
            p: b.p,
            n: b.n,
            current,
        };
        match &b.kind {
            BranchKind::Resistor(r) => {
                let g = 1.0 / r;
                st.a(b.p, b.p, g);
                st.a(b.p, b.n, -g);
                st.a(b.n, b.p, -g);
                st.a(b.n, b.n, g);
                probes.push(probe(CurrentProbe::Conductance(g)));
            }
            BranchKind::Capacitor(c) => {
                for (r, s) in [(b.p, 1.0), (b.n, -1.0)] {
                    for (col, t) in [(b.p, 1.0), (b.n, -1.0)] {
                        if let (Some(r), Some(col)) = (r, col) {
                            st.e(r, col, s * t * c);
                        }
                    }
                }
                probes.push(probe(CurrentProbe::Capacitance(*c)));
            }
            BranchKind::Inductor(l) => {
                let j = layout.len();
                layout.push(Unknown::BranchCurrent(b.name.clone()));
                st.kcl(b, j);
                st.e(j, j, *l);
                st.branch_voltage(j, b, -1.0);
                probes.push(probe(CurrentProbe::Unknown(j)));
            }
            BranchKind::VoltageSource(w) => {
                let j = layout.len();
                layout.push(Unknown::BranchCurrent(b.name.clone()));
                st.kcl(b, j);
                st.branch_voltage(j, b, 1.0);
                sources.push(SourceTerm {
                    row: j,
                    sign: 1.0,
                    waveform: *w,
                });
                probes.push(probe(CurrentProbe::Unknown(j)));
            }
            BranchKind::CurrentSource(w) => {
                for (t, sign) in [(b.p, 1.0), (b.n, -1.0)] {
                    if let Some(row) = t {
                        sources.push(SourceTerm {
                            row,
                            sign,
                            waveform: *w,
                        });
                    }
                }
                probes.push(probe(CurrentProbe::Source(*w)));
            }
            BranchKind::FieldElement { mode, .. } => {
                let sys = systems
                    .get(&b.name)
                    .ok_or_else(|| Error::MissingFieldSystem(b.name.clone()))?;
                sys.validate()?;
                let block = stamp_field(&mut st, &mut layout, b, *mode, sys);
                probes.push(probe(CurrentProbe::Unknown(block.current)));
                fields.push(block);
            }
        }
    }

    let n = layout.len();
    Ok(DaeSystem {
        e: CsrMatrix::from_triplets(n, n, &st.e),
        a: CsrMatrix::from_triplets(n, n, &st.a),
        sources,
        layout,
        probes,
        fields,
    })
}

fn stamp_field(
    st: &mut Stamper,
    layout: &mut Vec<Unknown>,
    b: &Branch,
    mode: FieldMode,
    sys: &AssembledFoilSystem,
) -> FieldBlock {
    let nw = sys.n_field();
    let a0 = layout.len();
    layout.extend((0..nw).map(|k| Unknown::FieldDof {
        element: b.name.clone(),
        k,
    }));
    // M ȧ + K a
    st.sparse(a0, a0, &sys.mass, 1.0, true);
    st.sparse(a0, a0, &sys.stiffness, 1.0, false);

    if mode == FieldMode::Solid {
        let solid = sys.solid();
        let nt = solid.turns as f64;
        let j = layout.len();
        layout.push(Unknown::BranchCurrent(b.name.clone()));
        for (k, &xs) in solid.x_sol.iter().enumerate() {
            if xs != 0.0 {
                // −(x_sol/N) v in the field rows, −(x_sol/N)ᵀ ȧ in the current row
                st.branch_voltage(a0 + k, b, -xs / nt);
                st.e(j, a0 + k, -xs / nt);
            }
        }
        st.branch_voltage(j, b, solid.g_sol / (nt * nt));
        st.a(Some(j), Some(j), -1.0);
        st.kcl(b, j);
        return FieldBlock {
            name: b.name.clone(),
            mode,
            a_offset: a0,
            n_a: nw,
            u_offset: j,
            n_u: 0,
            current: j,
        };
    }

    let np = sys.n_voltage();
    let u0 = layout.len();
    layout.extend((0..np).map(|l| Unknown::VoltageCoefficient {
        element: b.name.clone(),
        l,
    }));
    let j = layout.len();
    layout.push(Unknown::BranchCurrent(b.name.clone()));
    let g = match mode {
        FieldMode::Original => &sys.conductance,
        _ => &sys.conductance_consistent,
    };
    for l in 0..np {
        for k in 0..nw {
            let x = sys.coupling[(k, l)];
            if x != 0.0 {
                // −X u in the field rows, −Xᵀ ȧ in the voltage rows
                st.a(Some(a0 + k), Some(u0 + l), -x);
                st.e(u0 + l, a0 + k, -x);
            }
        }
        for m in 0..np {
            st.a(Some(u0 + l), Some(u0 + m), g[(l, m)]);
        }
        // −c i, and the terminal row −cᵀu + v = 0
        st.a(Some(u0 + l), Some(j), -sys.c[l]);
        st.a(Some(j), Some(u0 + l), -sys.c[l]);
    }
    st.branch_voltage(j, b, 1.0);
    st.kcl(b, j);
    FieldBlock {
        name: b.name.clone(),
        mode,
        a_offset: a0,
        n_a: nw,
        u_offset: u0,
        n_u: np,
        current: j,
    }
}
