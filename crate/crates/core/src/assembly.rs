//! P1 assembly for the azimuthal potential in the form `ψ = r·A_φ`.
//!
//! With `ψ` as the unknown the flux density is `B_r = -∂zψ / r`,
//! `B_z = ∂rψ / r`, so
//!
//! ```text
//! K_ij = 2π ∫ (ν_r ∂zψ_i ∂zψ_j + ν_z ∂rψ_i ∂rψ_j) / r  dr dz
//! M_ij = 2π ∫ σ p ψ_i ψ_j / r                        dr dz
//! ```
//!
//! where `p` is an optional scalar profile (a voltage basis function) used
//! by the winding-specific mass matrices. All integrals use interior
//! quadrature points, so elements touching the axis need no special care.

use crate::linalg::CsrMatrix;
use crate::mesh::{Mesh, RegionTag};
use crate::{Error, Result};

use std::f64::consts::PI;

/// Material data of one region. `sigma` is the azimuthal conductivity,
/// `nu_r` / `nu_z` the reluctivities acting on the radial and axial flux
/// density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub sigma: f64,
    pub nu_r: f64,
    pub nu_z: f64,
}

impl Material {
    pub fn isotropic(sigma: f64, nu: f64) -> Self {
        Material {
            sigma,
            nu_r: nu,
            nu_z: nu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Validation(format!(
                "conductivity {} < 0",
                self.sigma
            )));
        }
        if !(self.nu_r.is_finite() && self.nu_r > 0.0 && self.nu_z.is_finite() && self.nu_z > 0.0) {
            return Err(Error::Validation(format!(
                "reluctivities ({}, {}) must be positive",
                self.nu_r, self.nu_z
            )));
        }
        Ok(())
    }
}

/// One [`Material`] per region tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    regions: [Material; 4],
}

impl MaterialSpec {
    pub fn new(
        air: Material,
        yoke: Material,
        air_gap: Material,
        winding: Material,
    ) -> Result<Self> {
        let spec = MaterialSpec {
            regions: [air, yoke, air_gap, winding],
        };
        spec.regions.iter().try_for_each(Material::validate)?;
        Ok(spec)
    }

    /// Every region gets the same material.
    pub fn uniform(m: Material) -> Result<Self> {
        MaterialSpec::new(m, m, m, m)
    }

    pub fn get(&self, tag: RegionTag) -> Material {
        self.regions[index(tag)]
    }

    pub fn set(&mut self, tag: RegionTag, m: Material) -> Result<()> {
        m.validate()?;
        self.regions[index(tag)] = m;
        Ok(())
    }

    /// All conductivities multiplied by `factor`.
    pub fn scale_sigma(&self, factor: f64) -> Self {
        let mut out = *self;
        for m in &mut out.regions {
            m.sigma *= factor;
        }
        out
    }

    /// All reluctivities multiplied by `factor`.
    pub fn scale_nu(&self, factor: f64) -> Self {
        let mut out = *self;
        for m in &mut out.regions {
            m.nu_r *= factor;
            m.nu_z *= factor;
        }
        out
    }
}

fn index(tag: RegionTag) -> usize {
    match tag {
        RegionTag::Air => 0,
        RegionTag::Yoke => 1,
        RegionTag::AirGap => 2,
        RegionTag::FoilWinding => 3,
    }
}

/// Triangle quadrature rules in barycentric coordinates; weights sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureRule {
    /// Three interior points, exact for quadratics.
    #[default]
    ThreePoint,
    /// Six points, exact for quartics.
    SixPoint,
}

const THREE_POINT: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

const SIX_A: f64 = 0.445_948_490_915_965;
const SIX_B: f64 = 0.091_576_213_509_771;
const SIX_WA: f64 = 0.223_381_589_678_011;
const SIX_WB: f64 = 0.109_951_743_655_322;
const SIX_POINT: [([f64; 3], f64); 6] = [
    ([SIX_A, SIX_A, 1.0 - 2.0 * SIX_A], SIX_WA),
    ([SIX_A, 1.0 - 2.0 * SIX_A, SIX_A], SIX_WA),
    ([1.0 - 2.0 * SIX_A, SIX_A, SIX_A], SIX_WA),
    ([SIX_B, SIX_B, 1.0 - 2.0 * SIX_B], SIX_WB),
    ([SIX_B, 1.0 - 2.0 * SIX_B, SIX_B], SIX_WB),
    ([1.0 - 2.0 * SIX_B, SIX_B, SIX_B], SIX_WB),
];

impl QuadratureRule {
    pub fn points(self) -> &'static [([f64; 3], f64)] {
        match self {
            QuadratureRule::ThreePoint => &THREE_POINT,
            QuadratureRule::SixPoint => &SIX_POINT,
        }
    }
}

/// Map from mesh nodes to unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDiscretization {
    dof: Vec<Option<usize>>,
    node_of: Vec<usize>,
    rule: QuadratureRule,
}

impl FieldDiscretization {
    /// Homogeneous Dirichlet conditions on all boundary nodes (outer boundary
    /// and axis); the remaining nodes are numbered in node order.
    pub fn dirichlet(mesh: &Mesh) -> Self {
        Self::with_mask(mesh.boundary().iter().map(|b| !b))
    }

    /// Every node is an unknown. Only meaningful for mass-type matrices and
    /// bookkeeping tests.
    pub fn all_nodes(mesh: &Mesh) -> Self {
        Self::with_mask(std::iter::repeat_n(true, mesh.n_nodes()))
    }

    fn with_mask(free: impl Iterator<Item = bool>) -> Self {
        let mut node_of = Vec::new();
        let dof = free
            .enumerate()
            .map(|(i, f)| {
                f.then(|| {
                    node_of.push(i);
                    node_of.len() - 1
                })
            })
            .collect();
        FieldDiscretization {
            dof,
            node_of,
            rule: QuadratureRule::default(),
        }
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// Number of unknowns.
    pub fn n_dofs(&self) -> usize {
        self.node_of.len()
    }

    pub fn dof(&self, node: usize) -> Option<usize> {
        self.dof[node]
    }

    pub fn node(&self, dof: usize) -> usize {
        self.node_of[dof]
    }

    /// Expands a DoF vector to a nodal vector with zeros on fixed nodes.
    pub fn to_nodal(&self, values: &[f64]) -> Vec<f64> {
        self.dof
            .iter()
            .map(|d| d.map_or(0.0, |k| values[k]))
            .collect()
    }

    /// Restricts a nodal vector to the unknowns.
    pub fn from_nodal(&self, nodal: &[f64]) -> Vec<f64> {
        self.node_of.iter().map(|&n| nodal[n]).collect()
    }
}

struct Element {
    verts: [[f64; 2]; 3],
    area: f64,
    /// `[∂r λ_k, ∂z λ_k]` of the barycentric coordinates.
    grad: [[f64; 2]; 3],
}

impl Element {
    fn new(mesh: &Mesh, t: usize) -> Self {
        let verts = mesh.vertices(t);
        let area = mesh.signed_area(t);
        let mut grad = [[0.0; 2]; 3];
        for k in 0..3 {
            let p = verts[(k + 1) % 3];
            let q = verts[(k + 2) % 3];
            grad[k] = [(p[1] - q[1]) / (2.0 * area), (q[0] - p[0]) / (2.0 * area)];
        }
        Element { verts, area, grad }
    }

    fn point(&self, bary: &[f64; 3]) -> [f64; 2] {
        let mut p = [0.0; 2];
        for k in 0..3 {
            p[0] += bary[k] * self.verts[k][0];
            p[1] += bary[k] * self.verts[k][1];
        }
        p
    }
}

fn scatter(
    mesh: &Mesh,
    disc: &FieldDiscretization,
    t: usize,
    local: &[[f64; 3]; 3],
    trips: &mut Vec<(usize, usize, f64)>,
) {
    let tri = mesh.triangles()[t];
    for a in 0..3 {
        let Some(i) = disc.dof(tri[a]) else { continue };
        for b in 0..3 {
            let Some(j) = disc.dof(tri[b]) else { continue };
            trips.push((i, j, local[a][b]));
        }
    }
}

pub fn assemble_stiffness(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
) -> CsrMatrix {
    let n = disc.n_dofs();
    let mut trips = Vec::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let mat = materials.get(mesh.tags()[t]);
        let el = Element::new(mesh, t);
        // ∫ 1/r over the element
        let inv_r: f64 = disc
            .rule()
            .points()
            .iter()
            .map(|(bary, w)| w / el.point(bary)[0])
            .sum::<f64>()
            * el.area;
        let mut local = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let g = mat.nu_r * el.grad[a][1] * el.grad[b][1]
                    + mat.nu_z * el.grad[a][0] * el.grad[b][0];
                local[a][b] = 2.0 * PI * g * inv_r;
            }
        }
        scatter(mesh, disc, t, &local, &mut trips);
    }
    CsrMatrix::from_triplets(n, n, &trips)
}

/// `2π ∫ σ w ψ_i ψ_j / r` over the elements accepted by `include`.
pub fn assemble_weighted_mass(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
    include: impl Fn(RegionTag) -> bool,
    weight: impl Fn(f64, f64) -> f64,
) -> CsrMatrix {
    let n = disc.n_dofs();
    let mut trips = Vec::new();
    for t in 0..mesh.n_triangles() {
        let tag = mesh.tags()[t];
        let sigma = materials.get(tag).sigma;
        if !include(tag) || sigma == 0.0 {
            continue;
        }
        let el = Element::new(mesh, t);
        let mut local = [[0.0; 3]; 3];
        for (bary, w) in disc.rule().points() {
            let [r, z] = el.point(bary);
            let f = 2.0 * PI * sigma * w * el.area * weight(r, z) / r;
            for a in 0..3 {
                for b in 0..3 {
                    local[a][b] += f * bary[a] * bary[b];
                }
            }
        }
        scatter(mesh, disc, t, &local, &mut trips);
    }
    CsrMatrix::from_triplets(n, n, &trips)
}

/// Conductivity matrix over the whole domain.
pub fn assemble_mass(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
) -> CsrMatrix {
    assemble_weighted_mass(mesh, materials, disc, |_| true, |_, _| 1.0)
}

/// Conductivity matrix restricted to one region.
pub fn assemble_region_mass(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
    region: RegionTag,
) -> CsrMatrix {
    assemble_weighted_mass(mesh, materials, disc, |t| t == region, |_, _| 1.0)
}

/// Winding mass matrix weighted by one voltage basis profile `p(r, z)`.
pub fn assemble_modified_mass(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
    p: impl Fn(f64, f64) -> f64,
) -> CsrMatrix {
    assemble_weighted_mass(mesh, materials, disc, |t| t == RegionTag::FoilWinding, p)
}

/// Winding mass matrix weighted by the product of two profiles.
pub fn assemble_double_modified_mass(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
    pk: impl Fn(f64, f64) -> f64,
    pl: impl Fn(f64, f64) -> f64,
) -> CsrMatrix {
    assemble_modified_mass(mesh, materials, disc, |r, z| pk(r, z) * pl(r, z))
}
