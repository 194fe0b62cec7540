use nalgebra::{DMatrix, DVector};

use super::{distribution_coefficients, FoilWindingSpec, VoltageBasis};
use crate::assembly::{
    assemble_double_modified_mass, assemble_mass, assemble_modified_mass, assemble_stiffness,
    FieldDiscretization, MaterialSpec,
};
use crate::linalg::{self, CsrMatrix, DenseMatrix, RestrictedSpdSolver, Vector};
use crate::mesh::Mesh;
use crate::{Error, Result};

/// Relative singular-value threshold for the full-column-rank check of `X`.
pub const COUPLING_RANK_TOL: f64 = 1e-10;

fn profile<'a>(
    spec: &'a FoilWindingSpec,
    basis: &'a VoltageBasis,
    l: usize,
) -> impl Fn(f64, f64) -> f64 + 'a {
    move |r, _z| basis.eval_unchecked(l, spec.normalized_alpha(r))
}

/// Coupling block: column `l` is `M^(l) x`.
pub fn assemble_x(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
    spec: &FoilWindingSpec,
    basis: &VoltageBasis,
    x: &[f64],
) -> DenseMatrix {
    let mut out = DMatrix::zeros(disc.n_dofs(), basis.len());
    for l in 0..basis.len() {
        let ml = assemble_modified_mass(mesh, materials, disc, profile(spec, basis, l));
        out.set_column(l, &DVector::from_vec(ml.mul_vec(x)));
    }
    out
}

/// `c_k = (N / 2) ∫ p̂_k`.
pub fn assemble_c(spec: &FoilWindingSpec, basis: &VoltageBasis) -> Vector {
    let half_n = 0.5 * spec.turns as f64;
    DVector::from_iterator(
        basis.len(),
        basis.integrals().into_iter().map(|v| half_n * v),
    )
}

/// Original turn-by-turn conductance `G_kl = xᵀ M^(k,l) x`.
pub fn assemble_g_original(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
    spec: &FoilWindingSpec,
    basis: &VoltageBasis,
    x: &[f64],
) -> DenseMatrix {
    let n = basis.len();
    let mut g = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in k..n {
            let mkl = assemble_double_modified_mass(
                mesh,
                materials,
                disc,
                profile(spec, basis, k),
                profile(spec, basis, l),
            );
            let v = mkl.bilinear(x, x);
            g[(k, l)] = v;
            g[(l, k)] = v;
        }
    }
    g
}

/// Indices with a positive mass diagonal, i.e. DoFs touching a conductor.
pub fn conductive_support(m: &CsrMatrix) -> Vec<usize> {
    m.diagonal()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Consistent conductance `G_e = Xᵀ M⁺ X`, returned with the source-field
/// coefficients `E = M⁺ X`. The pseudo-inverse is applied by restricted
/// solves on the conductive support; the result is symmetrized.
pub fn assemble_g_consistent(
    m: &CsrMatrix,
    coupling: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let support = conductive_support(m);
    let solver = RestrictedSpdSolver::new(m, &support)?;
    let np = coupling.ncols();
    let mut e = DMatrix::zeros(coupling.nrows(), np);
    for l in 0..np {
        let col: Vec<f64> = coupling.column(l).iter().copied().collect();
        e.set_column(l, &DVector::from_vec(solver.solve(&col)?));
    }
    let ge = coupling.transpose() * &e;
    let ge = 0.5 * (&ge + ge.transpose());
    Ok((ge, e))
}

/// Field model of a foil winding: `M ȧ + K a − X u = 0`,
/// `−Xᵀ ȧ + G u − c i = 0`, `v = cᵀ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledFoilSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// `X`, one column per voltage basis function.
    pub coupling: DenseMatrix,
    /// Original conductance `G`.
    pub conductance: DenseMatrix,
    /// Consistent conductance `G_e`.
    pub conductance_consistent: DenseMatrix,
    pub c: Vector,
    /// Distribution-function coefficients `x`.
    pub distribution: Vec<f64>,
    /// Source-field coefficients `M⁺ X`; not persisted by [`super::save_system`].
    pub source_fields: Option<DenseMatrix>,
    pub turns: usize,
}

pub fn assemble_foil_system(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
    spec: &FoilWindingSpec,
    basis: &VoltageBasis,
) -> Result<AssembledFoilSystem> {
    spec.validate()?;
    spec.check_mesh(mesh)?;
    let x = distribution_coefficients(mesh, disc)?;
    let stiffness = assemble_stiffness(mesh, materials, disc);
    let mass = assemble_mass(mesh, materials, disc);
    let coupling = assemble_x(mesh, materials, disc, spec, basis, &x);
    let rank = linalg::rank(&coupling, COUPLING_RANK_TOL);
    if rank < basis.len() {
        return Err(Error::RankDeficientCoupling {
            rank,
            expected: basis.len(),
        });
    }
    let conductance = assemble_g_original(mesh, materials, disc, spec, basis, &x);
    let (ge, e) = assemble_g_consistent(&mass, &coupling)?;
    Ok(AssembledFoilSystem {
        stiffness,
        mass,
        coupling,
        conductance,
        conductance_consistent: ge,
        c: assemble_c(spec, basis),
        distribution: x,
        source_fields: Some(e),
        turns: spec.turns,
    })
}

impl AssembledFoilSystem {
    /// Number of field unknowns `N_w`.
    pub fn n_field(&self) -> usize {
        self.stiffness.n_rows()
    }

    /// Number of voltage basis functions `N_p`.
    pub fn n_voltage(&self) -> usize {
        self.c.len()
    }

    /// `G − G_e`.
    pub fn conductance_difference(&self) -> DenseMatrix {
        &self.conductance - &self.conductance_consistent
    }

    /// The solid-conductor model sharing this system's field matrices.
    pub fn solid(&self) -> SolidSystem {
        SolidSystem::new(
            self.stiffness.clone(),
            self.mass.clone(),
            self.distribution.clone(),
            self.turns,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let (nw, np) = (self.n_field(), self.n_voltage());
        let ok = self.stiffness.n_cols() == nw
            && self.mass.n_rows() == nw
            && self.mass.n_cols() == nw
            && self.coupling.shape() == (nw, np)
            && self.conductance.shape() == (np, np)
            && self.conductance_consistent.shape() == (np, np)
            && self.distribution.len() == nw;
        if !ok {
            return Err(Error::Dimension(
                "foil system blocks have inconsistent sizes".into(),
            ));
        }
        if self.turns == 0 {
            return Err(Error::Validation("foil system has zero turns".into()));
        }
        Ok(())
    }
}

/// Classic solid-conductor model of the winding cross-section, written per
/// turn so it is interchangeable with the foil model using a single constant
/// voltage function: `M ȧ + K a − (x_sol/N) v = 0`,
/// `−(x_sol/N)ᵀ ȧ + (G_sol/N²) v − i = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub distribution: Vec<f64>,
    /// `x_sol = M x`.
    pub x_sol: Vec<f64>,
    /// `G_sol = xᵀ M x`.
    pub g_sol: f64,
    pub turns: usize,
}

impl SolidSystem {
    pub fn new(
        stiffness: CsrMatrix,
        mass: CsrMatrix,
        distribution: Vec<f64>,
        turns: usize,
    ) -> Self {
        let x_sol = mass.mul_vec(&distribution);
        let g_sol = linalg::dot(&x_sol, &distribution);
        SolidSystem {
            stiffness,
            mass,
            distribution,
            x_sol,
            g_sol,
            turns,
        }
    }
}

pub fn build_solid_system(
    mesh: &Mesh,
    materials: &MaterialSpec,
    disc: &FieldDiscretization,
    turns: usize,
) -> Result<SolidSystem> {
    let x = distribution_coefficients(mesh, disc)?;
    Ok(SolidSystem::new(
        assemble_stiffness(mesh, materials, disc),
        assemble_mass(mesh, materials, disc),
        x,
        turns,
    ))
}
