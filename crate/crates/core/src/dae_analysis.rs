//! Circuit-level diagnostics of a foil field element: Schur reduction to the
//! stranded-conductor form, kernel projectors, the inductance seen at the
//! terminals, and the resistance-like coefficient of the original model.
//!
//! Everything here is dense and meant for desk-scale systems; projector
//! construction refuses matrices larger than [`DENSE_LIMIT`].

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::circuit::{ElementClass, FieldMode};
use crate::linalg::{
    self, min_symmetric_eigenvalue, nullspace_basis, DenseMatrix, Vector, DENSE_LIMIT,
};
use crate::winding::AssembledFoilSystem;
use crate::{Error, Result};

/// Relative eigenvalue threshold defining numerical kernels.
pub const KERNEL_TOL: f64 = 1e-10;
/// Largest accepted condition number of `G_e`.
pub const MAX_CONDUCTANCE_CONDITION: f64 = 1e12;
/// `G − G_e` is treated as zero when `‖G − G_e‖_F ≤ tol · ‖G‖_F`.
pub const DEFAULT_DIFFERENCE_TOL: f64 = 1e-12;
/// Allowed negative eigenvalue of `G − G_e`, relative to `‖G‖`.
pub const INDEFINITE_TOL: f64 = 1e-8;

/// Foil model with the voltage coefficients eliminated:
/// `M̄ ȧ + K a = x̄ i`, `x̄ᵀ ȧ + R i = v`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrandedForm {
    /// `M̄ = M − X G_e⁻¹ Xᵀ`
    pub m_bar: DenseMatrix,
    /// `x̄ = X G_e⁻¹ c`
    pub x_bar: Vector,
    /// `R = cᵀ G_e⁻¹ c`
    pub r: f64,
    /// Largest eigenvalue of `M`. Kernel thresholds for `M̄` are taken
    /// relative to it because `M̄` itself may vanish up to round-off.
    pub mass_scale: f64,
}

fn condition(sym: &DenseMatrix) -> Result<f64> {
    let eig = sym.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !max.is_finite() {
        return Err(Error::NonFinite("conductance matrix"));
    }
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Eliminates `u` using the consistent conductance.
pub fn schur_stranded_form(sys: &AssembledFoilSystem) -> Result<StrandedForm> {
    let ge = &sys.conductance_consistent;
    let cond = condition(ge)?;
    if cond > MAX_CONDUCTANCE_CONDITION {
        return Err(Error::SingularConductance { condition: cond });
    }
    let chol = ge
        .clone()
        .cholesky()
        .ok_or(Error::SingularConductance { condition: cond })?;
    let ge_inv_xt = chol.solve(&sys.coupling.transpose());
    let x_ge_inv_xt = &sys.coupling * &ge_inv_xt;
    let m = sys.mass.to_dense();
    let mass_scale = spectral_radius(&m);
    let mut m_bar = m - x_ge_inv_xt;
    m_bar = (&m_bar + m_bar.transpose()) * 0.5;
    let ge_inv_c = chol.solve(&sys.c);
    let x_bar = &sys.coupling * &ge_inv_c;
    let r = sys.c.dot(&ge_inv_c);
    Ok(StrandedForm {
        m_bar,
        x_bar,
        r,
        mass_scale,
    })
}

/// Orthogonal projector `Q` onto a numerical kernel and its complement
/// `P = I − Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorPair {
    pub q: DenseMatrix,
    pub p: DenseMatrix,
}

impl ProjectorPair {
    pub fn kernel_dim(&self) -> usize {
        self.q.trace().round() as usize
    }
}

fn spectral_radius(a: &DenseMatrix) -> f64 {
    a.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

fn size_guard(a: &DenseMatrix) -> Result<()> {
    if a.nrows() > DENSE_LIMIT {
        return Err(Error::SizeGuard {
            dim: a.nrows(),
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

/// Projectors for the kernel of the symmetric `a`, eigenvalues below
/// `tol` times its largest eigenvalue counting as zero.
pub fn build_projectors(a: &DenseMatrix, tol: f64) -> Result<ProjectorPair> {
    size_guard(a)?;
    let basis = nullspace_basis(a, tol)?;
    Ok(projectors_from_basis(&basis))
}

/// As [`build_projectors`] with an absolute eigenvalue threshold.
pub fn build_projectors_absolute(a: &DenseMatrix, threshold: f64) -> Result<ProjectorPair> {
    size_guard(a)?;
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let cols: Vec<_> = (0..a.nrows())
        .filter(|&k| eig.eigenvalues[k].abs() <= threshold)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    let basis = if cols.is_empty() {
        DMatrix::zeros(a.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok(projectors_from_basis(&basis))
}

fn projectors_from_basis(basis: &DenseMatrix) -> ProjectorPair {
    let n = basis.nrows();
    let q = basis * basis.transpose();
    let p = DMatrix::identity(n, n) - &q;
    ProjectorPair { q, p }
}

/// Kernel projectors of `M̄`, threshold relative to the largest eigenvalue
/// of `M`.
pub fn stranded_projectors(sf: &StrandedForm) -> Result<ProjectorPair> {
    build_projectors_absolute(&sf.m_bar, KERNEL_TOL * sf.mass_scale)
}

/// Terminal inductance of the stranded form,
/// `L = x̄ᵀ Q̄ (Q̄ᵀ K Q̄ + P̄ᵀ P̄)⁻¹ Q̄ᵀ x̄` with `Q̄` projecting onto `ker M̄`.
pub fn inductance_value(sf: &StrandedForm, k: &DenseMatrix) -> Result<f64> {
    let pr = stranded_projectors(sf)?;
    inductance_with(&pr, sf, k)
}

fn inductance_with(pr: &ProjectorPair, sf: &StrandedForm, k: &DenseMatrix) -> Result<f64> {
    let lhs = pr.q.transpose() * k * &pr.q + pr.p.transpose() * &pr.p;
    let qx = pr.q.transpose() * &sf.x_bar;
    let sol = lhs
        .lu()
        .solve(&qx)
        .ok_or_else(|| Error::Validation("pencil of K and M is singular".into()))?;
    let l = qx.dot(&sol);
    if !(l > 0.0) {
        return Err(Error::NonpositiveL(l));
    }
    Ok(l)
}

/// Resistance-like coefficient `g_R = (cᵀ (G − G_e)⁻¹ c)⁻¹` of the original
/// model, with the spectral diagnostics it rests on.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationMeasure {
    /// `None` when `G − G_e` vanishes relative to `G` (inductance-like limit).
    pub g_r: Option<f64>,
    pub difference_norm: f64,
    pub conductance_norm: f64,
    pub min_eig: f64,
    /// Dimension of the numerical kernel of `G − G_e`.
    pub kernel_dim: usize,
    /// `‖Π_ker c‖ / ‖c‖`; a nonzero value forces `g_R = 0`.
    pub c_kernel_fraction: f64,
}

impl PerturbationMeasure {
    pub fn is_degenerate(&self) -> bool {
        self.g_r.is_none_or(|g| g <= 0.0)
    }
}

/// `c` counts as lying partly in the kernel of `G − G_e` above this fraction.
pub const KERNEL_FRACTION_TOL: f64 = 1e-8;

pub fn singular_perturbation_measure(
    g: &DenseMatrix,
    ge: &DenseMatrix,
    c: &Vector,
    tol: f64,
) -> Result<PerturbationMeasure> {
    let d = g - ge;
    let d = (&d + d.transpose()) * 0.5;
    let gn = g.norm();
    let dn = d.norm();
    let eig = d.clone().symmetric_eigen();
    let min_eig = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -INDEFINITE_TOL * gn {
        return Err(Error::IndefiniteDifference {
            min_eig,
            tol: INDEFINITE_TOL * gn,
        });
    }
    let mut out = PerturbationMeasure {
        g_r: None,
        difference_norm: dn,
        conductance_norm: gn,
        min_eig,
        kernel_dim: 0,
        c_kernel_fraction: 0.0,
    };
    if dn <= tol * gn {
        out.kernel_dim = d.nrows();
        out.c_kernel_fraction = 1.0;
        return Ok(out);
    }
    // Kernel relative to ‖G‖: entries of D at round-off level of G are zero.
    let cut = KERNEL_TOL * gn;
    let cn = c.norm();
    let mut in_kernel = 0.0;
    let mut quad = 0.0;
    for k in 0..d.nrows() {
        let v = eig.eigenvectors.column(k);
        let ck = v.dot(c);
        let lam = eig.eigenvalues[k];
        if lam.abs() <= cut {
            out.kernel_dim += 1;
            in_kernel += ck * ck;
        } else {
            quad += ck * ck / lam;
        }
    }
    out.c_kernel_fraction = if cn > 0.0 { in_kernel.sqrt() / cn } else { 0.0 };
    out.g_r = Some(
        if out.c_kernel_fraction > KERNEL_FRACTION_TOL || quad <= 0.0 {
            0.0
        } else {
            1.0 / quad
        },
    );
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    InductanceLike,
    ResistanceLike,
    /// The resistance-like coefficient vanishes (`G = G_e`, or the terminal
    /// direction `c` lies in the kernel of `G − G_e`): the element behaves
    /// inductance-like, as the solid conductor does.
    SolidDegenerate,
}

impl ElementKind {
    pub fn circuit_class(self) -> ElementClass {
        match self {
            ElementKind::ResistanceLike => ElementClass::ResistanceLike,
            _ => ElementClass::InductanceLike,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::InductanceLike => "InductanceLike",
            ElementKind::ResistanceLike => "ResistanceLike",
            ElementKind::SolidDegenerate => "SolidDegenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub kind: ElementKind,
    pub mode: FieldMode,
    /// Terminal inductance; computed whenever the system is small enough.
    pub inductance: Option<f64>,
    /// Resistance `cᵀ G_e⁻¹ c` of the stranded form.
    pub resistance: f64,
    pub measure: PerturbationMeasure,
    pub coupling_rank: usize,
    pub n_field: usize,
    pub n_voltage: usize,
}

impl Classification {
    /// Key-value text report.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("mode", self.mode.to_string());
        kv("kind", self.kind.to_string());
        kv(
            "inductance_H",
            self.inductance.map_or("n/a".into(), |l| format!("{l:e}")),
        );
        kv("resistance_ohm", format!("{:e}", self.resistance));
        kv(
            "g_R",
            self.measure
                .g_r
                .map_or("degenerate".into(), |g| format!("{g:e}")),
        );
        kv(
            "norm_G_minus_Ge_F",
            format!("{:e}", self.measure.difference_norm),
        );
        kv("norm_G_F", format!("{:e}", self.measure.conductance_norm));
        kv("min_eig_G_minus_Ge", format!("{:e}", self.measure.min_eig));
        kv("kernel_dim_G_minus_Ge", self.measure.kernel_dim.to_string());
        kv(
            "c_kernel_fraction",
            format!("{:e}", self.measure.c_kernel_fraction),
        );
        kv("rank_X", self.coupling_rank.to_string());
        kv("N_w", self.n_field.to_string());
        kv("N_p", self.n_voltage.to_string());
        s
    }
}

/// Classifies a field element for the given stamping mode.
///
/// `Ge` is inductance-like. `G` is resistance-like when its coefficient
/// `g_R` is positive, otherwise degenerate. `SOLID` is degenerate by
/// construction. The inductance is reported when `N_w ≤ DENSE_LIMIT`.
pub fn classify_element(
    sys: &AssembledFoilSystem,
    mode: FieldMode,
    tol: f64,
) -> Result<Classification> {
    let measure =
        singular_perturbation_measure(&sys.conductance, &sys.conductance_consistent, &sys.c, tol)?;
    let sf = schur_stranded_form(sys)?;
    let inductance = if sys.n_field() <= DENSE_LIMIT {
        Some(inductance_value(&sf, &sys.stiffness.to_dense())?)
    } else {
        None
    };
    let kind = match mode {
        FieldMode::Consistent => ElementKind::InductanceLike,
        FieldMode::Solid => ElementKind::SolidDegenerate,
        FieldMode::Original if measure.is_degenerate() => ElementKind::SolidDegenerate,
        FieldMode::Original => ElementKind::ResistanceLike,
    };
    Ok(Classification {
        kind,
        mode,
        inductance,
        resistance: sf.r,
        measure,
        coupling_rank: linalg::rank(&sys.coupling, crate::winding::COUPLING_RANK_TOL),
        n_field: sys.n_field(),
        n_voltage: sys.n_voltage(),
    })
}

/// Projector onto the kernel of the mass matrix (non-conducting DoFs).
pub fn mass_kernel_projectors(sys: &AssembledFoilSystem) -> Result<ProjectorPair> {
    build_projectors(&sys.mass.to_dense(), KERNEL_TOL)
}

/// Rank of `Q̄ᵀ x̄`, which must be 1 for a single-terminal element.
pub fn kernel_coupling_rank(sf: &StrandedForm) -> Result<usize> {
    let pr = stranded_projectors(sf)?;
    let qx = pr.q.transpose() * &sf.x_bar;
    let m = DMatrix::from_column_slice(qx.len(), 1, qx.as_slice());
    Ok(linalg::rank(&m, KERNEL_TOL))
}

/// Smallest eigenvalue of `M̄`.
pub fn m_bar_min_eigenvalue(sf: &StrandedForm) -> Result<f64> {
    min_symmetric_eigenvalue(&sf.m_bar)
}

/// Quasi-static terminal voltage `v = R i` via the stranded form, and via a
/// dense solve of the full foil equations with `ȧ = 0`.
pub fn quasi_static_voltage(sys: &AssembledFoilSystem, i: f64) -> Result<(f64, f64)> {
    let sf = schur_stranded_form(sys)?;
    // With ȧ = 0 the voltage equations read G_e u = c i.
    let u = sys
        .conductance_consistent
        .clone()
        .lu()
        .solve(&(&sys.c * i))
        .ok_or(Error::SingularConductance {
            condition: f64::INFINITY,
        })?;
    Ok((sf.r * i, sys.c.dot(&u)))
}

/// Convenience: column vector as `DVector`.
pub fn to_vector(v: &[f64]) -> Vector {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn diagonal_projectors() {
        let pr = build_projectors(&dmatrix![1.0, 0.0; 0.0, 0.0], KERNEL_TOL).unwrap();
        assert!((pr.q.clone() - dmatrix![0.0, 0.0; 0.0, 1.0]).norm() < 1e-14);
        let spd = build_projectors(&dmatrix![2.0, 1.0; 1.0, 2.0], KERNEL_TOL).unwrap();
        assert_eq!(spd.q.norm(), 0.0);
        let big = DMatrix::identity(DENSE_LIMIT + 1, DENSE_LIMIT + 1);
        assert!(matches!(
            build_projectors(&big, 1e-10),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn perturbation_closed_form() {
        let ge = dmatrix![3.0, 1.0; 1.0, 2.0];
        let eps = 1e-3;
        let g = &ge + DMatrix::identity(2, 2) * eps;
        let m = singular_perturbation_measure(&g, &ge, &dvector![1.0, 0.0], 1e-12).unwrap();
        assert!((m.g_r.unwrap() - eps).abs() < 1e-12);
        let same = singular_perturbation_measure(&ge, &ge, &dvector![1.0, 0.0], 1e-12).unwrap();
        assert!(same.g_r.is_none() && same.is_degenerate());
        let bad = singular_perturbation_measure(&ge, &g, &dvector![1.0, 0.0], 1e-12);
        assert!(matches!(bad, Err(Error::IndefiniteDifference { .. })));
    }

    #[test]
    fn current_in_kernel_gives_zero() {
        let ge = dmatrix![3.0, 1.0; 1.0, 2.0];
        let g = &ge + dmatrix![0.0, 0.0; 0.0, 0.5];
        let m = singular_perturbation_measure(&g, &ge, &dvector![2.0, 0.0], 1e-12).unwrap();
        assert_eq!(m.g_r, Some(0.0));
        assert_eq!(m.kernel_dim, 1);
    }
}
