//! Triangular meshes of the axisymmetric `(r, z)` half-plane.
//!
//! Meshes are produced by a structured rectangle-decomposition mesher
//! ([`TensorLayout`]): every feature of the transformer cross-section is an
//! axis-aligned rectangle, so a tensor grid through all feature lines is
//! automatically conforming and each cell carries a single region tag.

mod format;
mod geometry;
mod refine;

pub use format::{read_mesh, write_mesh};
pub use geometry::{GeometrySpec, MeshLevel, TensorLayout};
pub use refine::refine_uniform;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionTag {
    Air,
    Yoke,
    AirGap,
    FoilWinding,
}

impl RegionTag {
    pub const ALL: [RegionTag; 4] = [
        RegionTag::Air,
        RegionTag::Yoke,
        RegionTag::AirGap,
        RegionTag::FoilWinding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegionTag::Air => "Air",
            RegionTag::Yoke => "Yoke",
            RegionTag::AirGap => "AirGap",
            RegionTag::FoilWinding => "FoilWinding",
        }
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegionTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        RegionTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown region tag `{s}`"))
    }
}

/// Conforming triangle mesh with region tags and Dirichlet boundary flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<RegionTag>,
    boundary: Vec<bool>,
}

impl Mesh {
    /// Builds a mesh and checks its invariants.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tags: Vec<RegionTag>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        let m = Mesh {
            nodes,
            triangles,
            tags,
            boundary,
        };
        m.validate()?;
        Ok(m)
    }

    /// Axis-aligned rectangle `[r0, r0 + width] × [z0, z0 + height]` split into
    /// `nr × nz` cells of two triangles each, all boundary nodes flagged.
    pub fn rectangle(
        r0: f64,
        z0: f64,
        width: f64,
        height: f64,
        nr: usize,
        nz: usize,
        tag: RegionTag,
    ) -> Result<Self> {
        let layout = TensorLayout {
            r_breaks: vec![r0, r0 + width],
            z_breaks: vec![z0, z0 + height],
            r_divisions: vec![nr],
            z_divisions: vec![nz],
            cell_tags: vec![tag],
        };
        layout.build()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn tags(&self) -> &[RegionTag] {
        &self.tags
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area (positive for counterclockwise triangles).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.vertices(t);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    /// Total `(r, z)`-plane area per region.
    pub fn region_areas(&self) -> HashMap<RegionTag, f64> {
        let mut out = HashMap::new();
        for t in 0..self.n_triangles() {
            *out.entry(self.tags[t]).or_insert(0.0) += self.signed_area(t);
        }
        out
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    /// Every undirected edge with the number of triangles sharing it, keyed
    /// by `(min, max)` node index.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn n_edges(&self) -> usize {
        self.edge_counts().len()
    }

    /// Nodes touched by at least one triangle with the given tag.
    pub fn nodes_with_tag(&self, tag: RegionTag) -> Vec<bool> {
        let mut out = vec![false; self.n_nodes()];
        for (tri, &t) in self.triangles.iter().zip(&self.tags) {
            if t == tag {
                for &n in tri {
                    out[n] = true;
                }
            }
        }
        out
    }

    /// Bounding box `(r_min, r_max, z_min, z_max)` of the elements with a tag.
    pub fn tag_bounds(&self, tag: RegionTag) -> Option<[f64; 4]> {
        let mut b: Option<[f64; 4]> = None;
        for (tri, &t) in self.triangles.iter().zip(&self.tags) {
            if t != tag {
                continue;
            }
            for &n in tri {
                let [r, z] = self.nodes[n];
                let e = b.get_or_insert([r, r, z, z]);
                e[0] = e[0].min(r);
                e[1] = e[1].max(r);
                e[2] = e[2].min(z);
                e[3] = e[3].max(z);
            }
        }
        b
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.tags.len() != self.triangles.len() {
            return Err(Error::Validation("one tag per triangle required".into()));
        }
        if self.boundary.len() != n {
            return Err(Error::Validation(
                "one boundary flag per node required".into(),
            ));
        }
        for (i, p) in self.nodes.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::NonFinite("mesh node coordinates"));
            }
            if p[0] < 0.0 {
                return Err(Error::Validation(format!("node {i} has r = {} < 0", p[0])));
            }
        }
        let mut used = vec![false; n];
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::Validation(format!(
                    "triangle {t} references a missing node"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Validation(format!("triangle {t} repeats a node")));
            }
            if self.signed_area(t) <= 0.0 {
                return Err(Error::Validation(format!(
                    "triangle {t} is not counterclockwise or is degenerate"
                )));
            }
            tri.iter().for_each(|&v| used[v] = true);
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::Validation(format!(
                "node {i} belongs to no triangle"
            )));
        }
        if let Some((e, c)) = self.edge_counts().into_iter().find(|(_, c)| *c > 2) {
            return Err(Error::Validation(format!(
                "edge {e:?} shared by {c} triangles; mesh is not conforming"
            )));
        }
        Ok(())
    }
}
