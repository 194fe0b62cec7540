use foil_core::assembly::FieldDiscretization;
use foil_core::circuit::{ElementClass, FieldMode};
use foil_core::dae_analysis::{
    build_projectors, classify_element, inductance_value, kernel_coupling_rank,
    m_bar_min_eigenvalue, mass_kernel_projectors, quasi_static_voltage, schur_stranded_form,
    singular_perturbation_measure, stranded_projectors, ElementKind, DEFAULT_DIFFERENCE_TOL,
    KERNEL_TOL,
};
use foil_core::linalg::{symmetric_pinv, CsrMatrix};
use foil_core::mesh::{GeometrySpec, MeshLevel};
use foil_core::winding::{
    assemble_foil_system, transformer_materials, AssembledFoilSystem, FoilWindingSpec, VoltageBasis,
};
use foil_core::Error;
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(
    k: DMatrix<f64>,
    m: DMatrix<f64>,
    x: DMatrix<f64>,
    c: DVector<f64>,
) -> AssembledFoilSystem {
    let ge = x.transpose() * symmetric_pinv(&m, 1e-14).unwrap() * &x;
    AssembledFoilSystem {
        stiffness: CsrMatrix::from_dense(&k),
        mass: CsrMatrix::from_dense(&m),
        coupling: x,
        conductance: ge.clone(),
        conductance_consistent: ge,
        c,
        distribution: vec![],
        source_fields: None,
        turns: 1,
    }
}

#[test]
fn scalar_toy_reduces_by_hand() {
    let (m, x, n, k) = (3.0, 2.0, 7.0, 5.0);
    let sys = fixture(dmatrix![k], dmatrix![m], dmatrix![x], dvector![n]);
    let sf = schur_stranded_form(&sys).unwrap();
    assert!(sf.m_bar[(0, 0)].abs() < 1e-14);
    assert!((sf.x_bar[0] - m * n / x).abs() < 1e-12);
    assert!((sf.r - n * n * m / (x * x)).abs() < 1e-12);
    let l = inductance_value(&sf, &dmatrix![k]).unwrap();
    assert!((l - (m * n / x).powi(2) / k).abs() < 1e-12);
}

#[test]
fn two_dof_fixtures_with_known_inductance() {
    // conducting block fully eliminated: L = c² (K⁻¹)₀₀
    let k = dmatrix![2.0, -1.0; -1.0, 2.0];
    let det = 2.0 * 2.0 - 1.0;
    let sys = fixture(
        k.clone(),
        dmatrix![1.0, 0.0; 0.0, 0.0],
        dmatrix![1.0; 0.0],
        dvector![1.5],
    );
    let l = inductance_value(&schur_stranded_form(&sys).unwrap(), &k).unwrap();
    assert!((l - 1.5 * 1.5 * 2.0 / det).abs() < 1e-9);
    // a second eddy-current DoF stays dynamic: L = c² / K₀₀
    let sys = fixture(
        k.clone(),
        DMatrix::identity(2, 2),
        dmatrix![1.0; 0.0],
        dvector![1.5],
    );
    let l = inductance_value(&schur_stranded_form(&sys).unwrap(), &k).unwrap();
    assert!((l - 1.5 * 1.5 / 2.0).abs() < 1e-9);
}

fn table_system(level: MeshLevel, basis: &VoltageBasis) -> AssembledFoilSystem {
    let mesh = GeometrySpec::default().generate_level(level).unwrap();
    let spec = FoilWindingSpec::default();
    let mats = transformer_materials(&spec, 10.0, 1000.0).unwrap();
    assemble_foil_system(
        &mesh,
        &mats,
        &FieldDiscretization::dirichlet(&mesh),
        &spec,
        basis,
    )
    .unwrap()
}

#[test]
fn solid_limit_resistance() {
    let sys = table_system(MeshLevel::Coarse, &VoltageBasis::legendre(1).unwrap());
    let g_sol = sys.mass.bilinear(&sys.distribution, &sys.distribution);
    let sf = schur_stranded_form(&sys).unwrap();
    let n = sys.turns as f64;
    assert!((sf.r - n * n / g_sol).abs() <= 1e-10 * sf.r);
}

#[test]
fn stranded_form_invariants_on_coarse_mesh() {
    let sys = table_system(MeshLevel::Coarse, &VoltageBasis::legendre(5).unwrap());
    let sf = schur_stranded_form(&sys).unwrap();
    let pr = stranded_projectors(&sf).unwrap();
    assert!((&pr.q * &pr.q - &pr.q).norm() <= 1e-12 * pr.q.norm().max(1.0));
    assert!(m_bar_min_eigenvalue(&sf).unwrap() >= -1e-10 * sf.m_bar.norm());
    assert_eq!(kernel_coupling_rank(&sf).unwrap(), 1);
    let qs = mass_kernel_projectors(&sys).unwrap();
    assert!((&qs.q * &sys.coupling).norm() <= 1e-10 * sys.coupling.norm());
    let l = inductance_value(&sf, &sys.stiffness.to_dense()).unwrap();
    assert!(l > 0.0);
}

#[test]
fn stranded_mass_is_psd_on_fine_mesh() {
    let sys = table_system(MeshLevel::Fine, &VoltageBasis::legendre(5).unwrap());
    let sf = schur_stranded_form(&sys).unwrap();
    assert!(m_bar_min_eigenvalue(&sf).unwrap() >= -1e-10 * sf.m_bar.norm());
    assert!(matches!(
        stranded_projectors(&sf),
        Err(Error::SizeGuard { .. })
    ));
}

#[test]
fn inductance_is_invariant_under_basis_scaling() {
    let basis = VoltageBasis::legendre(5).unwrap();
    let scaled = basis.transformed(&[0, 1, 2, 3, 4], &[2.0; 5]).unwrap();
    let l = |b: &VoltageBasis| {
        let sys = table_system(MeshLevel::Coarse, b);
        inductance_value(
            &schur_stranded_form(&sys).unwrap(),
            &sys.stiffness.to_dense(),
        )
        .unwrap()
    };
    let (a, b) = (l(&basis), l(&scaled));
    assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
}

#[test]
fn quasi_static_voltage_matches_block_solve() {
    // [K −X 0; 0 G_e 0; 0 −cᵀ 1] [a; u; v] = [0; c i; 0] with ȧ = 0
    let sys = table_system(MeshLevel::Coarse, &VoltageBasis::legendre(5).unwrap());
    let (nw, np) = (sys.n_field(), sys.n_voltage());
    let i = 0.75;
    let n = nw + np + 1;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (nw, nw))
        .copy_from(&sys.stiffness.to_dense());
    a.view_mut((0, nw), (nw, np)).copy_from(&(-&sys.coupling));
    a.view_mut((nw, nw), (np, np))
        .copy_from(&sys.conductance_consistent);
    for k in 0..np {
        a[(n - 1, nw + k)] = -sys.c[k];
    }
    a[(n - 1, n - 1)] = 1.0;
    let mut b = DVector::zeros(n);
    b.rows_mut(nw, np).copy_from(&(&sys.c * i));
    let y = a.lu().solve(&b).unwrap();
    let (v_stranded, _) = quasi_static_voltage(&sys, i).unwrap();
    assert!((y[n - 1] - v_stranded).abs() <= 1e-9 * v_stranded.abs());
}

#[test]
fn constant_profile_lies_in_difference_kernel() {
    // constant and linear voltage profiles are represented exactly by the
    // P1 space, so the corresponding rows of G − G_e vanish and the terminal
    // vector c = N e₀ sees no resistance-like coefficient
    let sys = table_system(MeshLevel::Coarse, &VoltageBasis::legendre(5).unwrap());
    let d = sys.conductance_difference();
    let g = sys.conductance.norm();
    for j in 0..5 {
        assert!(d[(0, j)].abs() <= 1e-10 * g && d[(1, j)].abs() <= 1e-10 * g);
    }
    let m = singular_perturbation_measure(
        &sys.conductance,
        &sys.conductance_consistent,
        &sys.c,
        DEFAULT_DIFFERENCE_TOL,
    )
    .unwrap();
    assert!(m.kernel_dim >= 2);
    assert!((m.c_kernel_fraction - 1.0).abs() < 1e-8);
    assert_eq!(m.g_r, Some(0.0));
}

#[test]
fn classification_on_coarse_mesh() {
    let sys = table_system(MeshLevel::Coarse, &VoltageBasis::legendre(5).unwrap());
    let ge = classify_element(&sys, FieldMode::Consistent, DEFAULT_DIFFERENCE_TOL).unwrap();
    assert_eq!(ge.kind, ElementKind::InductanceLike);
    assert!(ge.inductance.unwrap() > 0.0);
    assert_eq!(ge.coupling_rank, 5);
    let report = ge.report();
    for key in [
        "kind",
        "inductance_H",
        "norm_G_minus_Ge_F",
        "min_eig_G_minus_Ge",
        "rank_X",
    ] {
        assert!(report.contains(key), "{key}");
    }
}

#[test]
fn single_basis_function_classifies_as_solid() {
    let sys = table_system(MeshLevel::Coarse, &VoltageBasis::legendre(1).unwrap());
    for mode in [FieldMode::Original, FieldMode::Consistent] {
        let c = classify_element(&sys, mode, DEFAULT_DIFFERENCE_TOL).unwrap();
        assert_eq!(c.kind.circuit_class(), ElementClass::InductanceLike);
        assert!(c.measure.g_r.is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resistance_coefficient_is_inverse_quadratic_form(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let ge = &f * f.transpose() + DMatrix::identity(n, n);
        let h = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let d = &h * h.transpose() + DMatrix::identity(n, n) * 0.5;
        let c = DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0));
        let m = singular_perturbation_measure(&(&ge + &d), &ge, &c, DEFAULT_DIFFERENCE_TOL).unwrap();
        let oracle = 1.0 / c.dot(&(d.clone().try_inverse().unwrap() * &c));
        prop_assert!((m.g_r.unwrap() - oracle).abs() <= 1e-9 * oracle);
        prop_assert_eq!(m.kernel_dim, 0);
    }

    #[test]
    fn projectors_are_complementary(seed in any::<u64>(), n in 2usize..8, r in 0usize..8) {
        let r = r.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0));
        let a = &f * f.transpose();
        let pr = build_projectors(&a, KERNEL_TOL).unwrap();
        prop_assert!((&pr.q + &pr.p - DMatrix::identity(n, n)).norm() < 1e-12);
        prop_assert!((&pr.q * &pr.q - &pr.q).norm() < 1e-10);
        prop_assert!((&a * &pr.q).norm() <= 1e-9 * a.norm().max(1.0));
        if r < n || a.norm() > 0.0 {
            prop_assert_eq!(pr.kernel_dim(), n - r);
        }
    }
}
