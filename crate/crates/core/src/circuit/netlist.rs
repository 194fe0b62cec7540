//! Minimal SPICE-like netlist: one branch per line,
//! `<NAME> <node+> <node-> <kind-specific>`.
//!
//! The branch kind is given by the name prefix: `FW` field element, `R`,
//! `L`, `C`, `V`, `I`. Sources take `SIN amp f`, `PSIN amp f eps f_eps` or
//! `DC v`; field elements take `FILE <path> MODE <G|Ge|SOLID>`. Keywords are
//! case-insensitive, `*` starts a comment and node `0` is ground.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use super::Waveform;
use crate::{Error, Result};

/// Conductance discretization used when a field element is stamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldMode {
    /// Original conductance `G`.
    Original,
    /// Consistent conductance `G_e`.
    Consistent,
    /// Solid-conductor reduction.
    Solid,
}

impl FromStr for FieldMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "g" => Ok(FieldMode::Original),
            "ge" => Ok(FieldMode::Consistent),
            "solid" => Ok(FieldMode::Solid),
            _ => Err(format!(
                "unknown field mode `{s}` (expected G, Ge or SOLID)"
            )),
        }
    }
}

impl fmt::Display for FieldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldMode::Original => "G",
            FieldMode::Consistent => "Ge",
            FieldMode::Solid => "SOLID",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchKind {
    Resistor(f64),
    Inductor(f64),
    Capacitor(f64),
    VoltageSource(Waveform),
    CurrentSource(Waveform),
    FieldElement { path: String, mode: FieldMode },
}

impl BranchKind {
    pub fn letter(&self) -> &'static str {
        match self {
            BranchKind::Resistor(_) => "R",
            BranchKind::Inductor(_) => "L",
            BranchKind::Capacitor(_) => "C",
            BranchKind::VoltageSource(_) => "V",
            BranchKind::CurrentSource(_) => "I",
            BranchKind::FieldElement { .. } => "FW",
        }
    }
}

/// A two-terminal branch. Terminals are node indices, `None` is ground.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub name: String,
    pub kind: BranchKind,
    pub p: Option<usize>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    /// Non-ground node names in order of first appearance.
    pub nodes: Vec<String>,
    pub branches: Vec<Branch>,
}

fn is_ground(name: &str) -> bool {
    name == "0" || name.eq_ignore_ascii_case("gnd")
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    fn node(&mut self, name: &str) -> Option<usize> {
        if is_ground(name) {
            return None;
        }
        Some(match self.nodes.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                self.nodes.push(name.to_string());
                self.nodes.len() - 1
            }
        })
    }

    /// Appends a branch without validation.
    pub fn add(&mut self, name: &str, p: &str, n: &str, kind: BranchKind) -> &mut Self {
        let p = self.node(p);
        let n = self.node(n);
        self.branches.push(Branch {
            name: name.to_string(),
            kind,
            p,
            n,
        });
        self
    }

    pub fn branch(&self, name: &str) -> Option<&Branch> {
        self.branches
            .iter()
            .find(|b| b.name.eq_ignore_ascii_case(name))
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Graph vertex of a terminal: ground is `0`, node `k` is `k + 1`.
    pub fn vertex(t: Option<usize>) -> usize {
        t.map_or(0, |k| k + 1)
    }

    /// Structural checks: ground present, graph connected, positive element
    /// values, valid waveforms, unique names, no self-loops.
    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        let mut has_ground = false;
        for b in &self.branches {
            if !names.insert(b.name.to_ascii_lowercase()) {
                return Err(Error::Validation(format!(
                    "duplicate branch name {}",
                    b.name
                )));
            }
            if b.p == b.n {
                return Err(Error::Validation(format!(
                    "branch {} connects a node to itself",
                    b.name
                )));
            }
            has_ground |= b.p.is_none() || b.n.is_none();
            match &b.kind {
                BranchKind::Resistor(v) | BranchKind::Inductor(v) | BranchKind::Capacitor(v) => {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(Error::Validation(format!(
                            "branch {} has nonpositive value {v}",
                            b.name
                        )));
                    }
                }
                BranchKind::VoltageSource(w) | BranchKind::CurrentSource(w) => {
                    w.validate()
                        .map_err(|e| Error::Validation(format!("{}: {e}", b.name)))?;
                }
                BranchKind::FieldElement { .. } => {}
            }
        }
        if self.branches.is_empty() {
            return Err(Error::Validation("empty netlist".into()));
        }
        if !has_ground {
            return Err(Error::Validation("netlist has no ground node `0`".into()));
        }
        let reach = super::topology::reachable_from_ground(self, |_| true);
        if let Some(k) = (0..self.n_nodes()).find(|&k| !reach[k + 1]) {
            return Err(Error::Validation(format!(
                "node {} is not connected to ground",
                self.nodes[k]
            )));
        }
        Ok(())
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

struct Tokens<'a> {
    line: usize,
    src: &'a str,
    toks: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn column(&self, i: usize) -> usize {
        match self.toks.get(i) {
            Some(t) => t.as_ptr() as usize - self.src.as_ptr() as usize + 1,
            None => self.src.trim_end().len() + 1,
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        let t = self.toks.get(self.pos).copied().ok_or_else(|| {
            parse_err(self.line, self.column(self.pos), format!("missing {what}"))
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        let i = self.pos;
        let t = self.next(what)?;
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                parse_err(
                    self.line,
                    self.column(i),
                    format!("expected {what}, found `{t}`"),
                )
            })
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let i = self.pos;
        let t = self.next(kw)?;
        if t.eq_ignore_ascii_case(kw) {
            Ok(())
        } else {
            Err(parse_err(
                self.line,
                self.column(i),
                format!("expected `{kw}`, found `{t}`"),
            ))
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            return Err(parse_err(
                self.line,
                self.column(self.pos),
                "unexpected trailing tokens",
            ));
        }
        Ok(())
    }

    fn waveform(&mut self) -> Result<Waveform> {
        let i = self.pos;
        let kind = self.next("waveform (SIN, PSIN or DC)")?;
        match kind.to_ascii_uppercase().as_str() {
            "SIN" => Ok(Waveform::Sin {
                amp: self.number("amplitude")?,
                f: self.number("frequency")?,
            }),
            "PSIN" => Ok(Waveform::PerturbedSin {
                amp: self.number("amplitude")?,
                f: self.number("frequency")?,
                eps: self.number("perturbation amplitude")?,
                f_eps: self.number("perturbation frequency")?,
            }),
            "DC" => Ok(Waveform::Const(self.number("value")?)),
            _ => Err(parse_err(
                self.line,
                self.column(i),
                format!("unknown waveform `{kind}` (expected SIN, PSIN or DC)"),
            )),
        }
    }
}

/// Parses and validates a netlist.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut net = Netlist::new();
    for (ln, raw) in text.lines().enumerate() {
        let src = raw.split('*').next().unwrap_or("");
        let toks: Vec<&str> = src.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let mut tk = Tokens {
            line: ln + 1,
            src,
            toks,
            pos: 0,
        };
        let name = tk.next("branch name")?;
        let upper = name.to_ascii_uppercase();
        let p = tk.next("positive node")?;
        let n = tk.next("negative node")?;
        let kind = if upper.starts_with("FW") {
            tk.keyword("FILE")?;
            let path = tk.next("file path")?.to_string();
            tk.keyword("MODE")?;
            let i = tk.pos;
            let m = tk.next("mode")?;
            let mode = m
                .parse()
                .map_err(|e: String| parse_err(tk.line, tk.column(i), e))?;
            BranchKind::FieldElement { path, mode }
        } else {
            match upper.as_bytes()[0] {
                b'R' => BranchKind::Resistor(tk.number("resistance")?),
                b'L' => BranchKind::Inductor(tk.number("inductance")?),
                b'C' => BranchKind::Capacitor(tk.number("capacitance")?),
                b'V' => BranchKind::VoltageSource(tk.waveform()?),
                b'I' => BranchKind::CurrentSource(tk.waveform()?),
                _ => {
                    return Err(parse_err(
                        ln + 1,
                        1,
                        format!("unknown branch kind for `{name}` (expected R, L, C, V, I or FW)"),
                    ))
                }
            }
        };
        tk.finish()?;
        net.add(name, p, n, kind);
    }
    net.validate()?;
    Ok(net)
}

/// Field-element branch names mapped to their stamping mode.
pub fn field_elements(net: &Netlist) -> HashMap<String, FieldMode> {
    net.branches
        .iter()
        .filter_map(|b| match &b.kind {
            BranchKind::FieldElement { mode, .. } => Some((b.name.clone(), *mode)),
            _ => None,
        })
        .collect()
}
