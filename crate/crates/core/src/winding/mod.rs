//! Homogenized foil winding: materials, distribution function, voltage
//! basis, coupling blocks and the two turn-by-turn conductance matrices.
//!
//! Local coordinates: `α` runs radially across the foils, `β` axially along
//! the foil height and the current flows azimuthally.

mod basis;
mod io;
mod system;

pub use basis::{legendre, BasisFamily, VoltageBasis};
pub use io::{load_system, read_system, save_system, write_system};
pub use system::{
    assemble_c, assemble_foil_system, assemble_g_consistent, assemble_g_original, assemble_x,
    build_solid_system, AssembledFoilSystem, SolidSystem, COUPLING_RANK_TOL,
};

use std::f64::consts::PI;

use crate::assembly::{FieldDiscretization, Material, MaterialSpec};
use crate::mesh::{Mesh, RegionTag};
use crate::{Error, Result, MU_0};

/// Anisotropic homogenized material of a foil winding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogenizedMaterial {
    /// Conductivity across the foils (always zero: insulation blocks it).
    pub sigma_alpha: f64,
    /// Conductivity along the foils.
    pub sigma_beta: f64,
    pub nu_alpha: f64,
    pub nu_beta: f64,
}

impl HomogenizedMaterial {
    /// Region material for the axisymmetric model: azimuthal conductivity
    /// along the foils, `ν_α` acting on the radial flux density.
    pub fn material(&self) -> Material {
        Material {
            sigma: self.sigma_beta,
            nu_r: self.nu_alpha,
            nu_z: self.nu_beta,
        }
    }
}

/// Mixing rule for a stack of conductor/insulation layers with fill factor
/// `lambda`: arithmetic mean across the layers for `ν`, harmonic mean along
/// them, and no conduction across.
pub fn homogenize_materials(
    lambda: f64,
    sigma_c: f64,
    sigma_i: f64,
    nu_c: f64,
    nu_i: f64,
) -> Result<HomogenizedMaterial> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fill factor {lambda} not in (0, 1]"
        )));
    }
    if !(sigma_c >= 0.0 && sigma_i >= 0.0 && nu_c > 0.0 && nu_i > 0.0) {
        return Err(Error::InvalidArgument(
            "inadmissible constituent materials".into(),
        ));
    }
    Ok(HomogenizedMaterial {
        sigma_alpha: 0.0,
        sigma_beta: lambda * sigma_c + (1.0 - lambda) * sigma_i,
        nu_alpha: lambda * nu_c + (1.0 - lambda) * nu_i,
        nu_beta: 1.0 / (lambda / nu_c + (1.0 - lambda) / nu_i),
    })
}

/// `sqrt(2 / (ω μ σ))` with `ω = 2πf`.
pub fn skin_depth(f: f64, mu: f64, sigma: f64) -> f64 {
    (2.0 / (2.0 * PI * f * mu * sigma)).sqrt()
}

/// Default ratio `δ / d_c` below which the thin-foil assumption is flagged.
pub const SKIN_DEPTH_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinDepthCheck {
    pub skin_depth: f64,
    pub conductor_width: f64,
    /// Set when `d_c > δ / ratio`.
    pub warning: bool,
}

/// Foil winding parameters. Lengths in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct FoilWindingSpec {
    pub turns: usize,
    pub fill_factor: f64,
    /// Foil pitch `b` (conductor plus insulation).
    pub pitch: f64,
    /// Foil height along `β`.
    pub height: f64,
    pub inner_radius: f64,
    pub sigma_c: f64,
    pub sigma_i: f64,
    pub nu_c: f64,
    pub nu_i: f64,
}

impl Default for FoilWindingSpec {
    /// 50 copper-like foils of 0.28 mm pitch, fill factor 0.8 and 50 mm
    /// height, non-magnetic conductor and insulation.
    fn default() -> Self {
        FoilWindingSpec {
            turns: 50,
            fill_factor: 0.8,
            pitch: 0.28e-3,
            height: 50e-3,
            inner_radius: 12.6e-3,
            sigma_c: 6e7,
            sigma_i: 0.0,
            nu_c: 1.0 / MU_0,
            nu_i: 1.0 / MU_0,
        }
    }
}

impl FoilWindingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.turns == 0 {
            return Err(Error::Validation("winding needs at least one turn".into()));
        }
        if !(self.pitch > 0.0 && self.height > 0.0 && self.inner_radius > 0.0) {
            return Err(Error::Validation(
                "winding dimensions must be positive".into(),
            ));
        }
        if self.sigma_i != 0.0 {
            return Err(Error::Validation(
                "insulated foils need zero insulation conductivity".into(),
            ));
        }
        homogenize_materials(
            self.fill_factor,
            self.sigma_c,
            self.sigma_i,
            self.nu_c,
            self.nu_i,
        )
        .map(|_| ())
    }

    /// `d_c = λ b`.
    pub fn conductor_width(&self) -> f64 {
        self.fill_factor * self.pitch
    }

    /// `ℓ_α = N b`.
    pub fn radial_extent(&self) -> f64 {
        self.turns as f64 * self.pitch
    }

    pub fn outer_radius(&self) -> f64 {
        self.inner_radius + self.radial_extent()
    }

    pub fn homogenized(&self) -> Result<HomogenizedMaterial> {
        homogenize_materials(
            self.fill_factor,
            self.sigma_c,
            self.sigma_i,
            self.nu_c,
            self.nu_i,
        )
    }

    /// Normalized radial coordinate `α̂ = 2 (r - r_in) / ℓ_α - 1`.
    pub fn normalized_alpha(&self, r: f64) -> f64 {
        2.0 * (r - self.inner_radius) / self.radial_extent() - 1.0
    }

    /// Normalized coordinate of the middle of turn `k`.
    pub fn turn_midpoint(&self, k: usize) -> f64 {
        (2 * k + 1) as f64 / self.turns as f64 - 1.0
    }

    pub fn skin_depth_check(&self, f: f64, ratio: f64) -> SkinDepthCheck {
        let delta = skin_depth(f, 1.0 / self.nu_c, self.sigma_c);
        let dc = self.conductor_width();
        SkinDepthCheck {
            skin_depth: delta,
            conductor_width: dc,
            warning: dc > delta / ratio,
        }
    }

    /// Checks that the mesh's winding region is the rectangle
    /// `[r_in, r_in + N b] × [·, · + height]`.
    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        let [r0, r1, z0, z1] = mesh
            .tag_bounds(RegionTag::FoilWinding)
            .ok_or(Error::EmptyWinding)?;
        let tol = 1e-9 * self.outer_radius();
        let ok = (r0 - self.inner_radius).abs() <= tol
            && (r1 - self.outer_radius()).abs() <= tol
            && ((z1 - z0) - self.height).abs() <= tol;
        if !ok {
            return Err(Error::Validation(format!(
                "winding region [{r0}, {r1}] x [{z0}, {z1}] does not match the winding spec"
            )));
        }
        Ok(())
    }
}

/// Materials of the transformer: air, a conductive magnetic yoke, air gap and
/// the homogenized winding.
pub fn transformer_materials(
    winding: &FoilWindingSpec,
    yoke_sigma: f64,
    yoke_mu_r: f64,
) -> Result<MaterialSpec> {
    let air = Material::isotropic(0.0, 1.0 / MU_0);
    let yoke = Material::isotropic(yoke_sigma, 1.0 / (yoke_mu_r * MU_0));
    MaterialSpec::new(air, yoke, air, winding.homogenized()?.material())
}

/// Coefficients of the distribution function in the FE space.
///
/// The distribution function is `e_φ / (2πr)` on the winding. In the
/// `ψ = r·A_φ` representation that is the constant `1 / (2π)`, which P1
/// interpolates exactly: every DoF touching a winding element gets
/// `1 / (2π)`, all others zero.
pub fn distribution_coefficients(mesh: &Mesh, disc: &FieldDiscretization) -> Result<Vec<f64>> {
    let touched = mesh.nodes_with_tag(RegionTag::FoilWinding);
    if !touched.iter().any(|&t| t) {
        return Err(Error::EmptyWinding);
    }
    let x: Vec<f64> = (0..disc.n_dofs())
        .map(|k| if touched[disc.node(k)] { 0.5 / PI } else { 0.0 })
        .collect();
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::EmptyWinding);
    }
    Ok(x)
}

/// Azimuthal line integral of the FE distribution function at `(r, z)`,
/// i.e. `2π · ψ_h(r, z)`. Equals 1 everywhere inside the winding.
pub fn distribution_line_integral(
    mesh: &Mesh,
    disc: &FieldDiscretization,
    x: &[f64],
    r: f64,
    z: f64,
) -> Option<f64> {
    let nodal = disc.to_nodal(x);
    for t in 0..mesh.n_triangles() {
        if let Some(bary) = barycentric(mesh, t, r, z) {
            if bary.iter().all(|&b| b >= -1e-12) {
                let tri = mesh.triangles()[t];
                let psi: f64 = (0..3).map(|k| bary[k] * nodal[tri[k]]).sum();
                return Some(2.0 * PI * psi);
            }
        }
    }
    None
}

fn barycentric(mesh: &Mesh, t: usize, r: f64, z: f64) -> Option<[f64; 3]> {
    let [a, b, c] = mesh.vertices(t);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det == 0.0 {
        return None;
    }
    let l1 = ((r - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (z - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (z - a[1]) - (r - a[0]) * (b[1] - a[1])) / det;
    Some([1.0 - l1 - l2, l1, l2])
}

/// Voltage of every turn, `Φ(α_k) = Σ_l u_l p_l(α_k)`, sampled at the turn
/// midpoints. Diagnostic only; the terminal voltage is `cᵀu`.
pub fn per_turn_voltages(spec: &FoilWindingSpec, basis: &VoltageBasis, u: &[f64]) -> Vec<f64> {
    (0..spec.turns)
        .map(|k| {
            let a = spec.turn_midpoint(k);
            u.iter()
                .enumerate()
                .map(|(l, ul)| ul * basis.eval_unchecked(l, a))
                .sum()
        })
        .collect()
}
