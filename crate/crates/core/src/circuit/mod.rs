//! Lumped circuits: netlists, topological index prediction, MNA stamping of
//! R/L/C branches, independent sources and field elements, and the ideal
//! inductor in closed form.

mod inductor;
mod mna;
mod netlist;
mod topology;
mod waveform;

pub use inductor::LumpedInductor;
pub use mna::{
    mna_stamp, CurrentProbe, DaeSystem, FieldBlock, FieldSystems, Probe, SourceTerm, Unknown,
};
pub use netlist::{field_elements, parse_netlist, Branch, BranchKind, FieldMode, Netlist};
pub use topology::{
    detect_cv_loops, detect_li_cutsets, has_li_cutset, predict_index, reachable_from_ground,
    Classes, ElementClass, CUTSET_ENUMERATION_LIMIT,
};
pub use waveform::{Waveform, DEFAULT_PERTURBATION_FREQUENCY};
