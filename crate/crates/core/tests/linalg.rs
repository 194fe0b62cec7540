use foil_core::linalg::{
    min_symmetric_eigenvalue, nullspace_basis, rank, restricted_spd_solve, symmetric_pinv,
    CsrMatrix, SparseLu,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = random_matrix(rng, n, n);
    &b * b.transpose() + DMatrix::identity(n, n) * 0.1
}

/// Sparse matrix with a banded pattern and a dominant diagonal.
fn banded(rng: &mut ChaCha8Rng, n: usize, bw: usize) -> CsrMatrix {
    let mut trips = Vec::new();
    for i in 0..n {
        for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
            let v: f64 = rng.gen_range(-1.0..1.0);
            trips.push((i, j, if i == j { v + 4.0 * bw as f64 } else { v }));
        }
    }
    CsrMatrix::from_triplets(n, n, &trips)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lu_residual(seed in any::<u64>(), n in 1usize..60, bw in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = banded(&mut rng, n, bw);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = SparseLu::factorize(&a).unwrap().solve(&b).unwrap();
        let r: f64 = a.mul_vec(&y).iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(r <= 1e-10 * bn.max(1.0));
    }

    #[test]
    fn restricted_solve_is_pseudo_inverse(seed in any::<u64>(), n in 2usize..9, k in 1usize..8) {
        let k = k.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_spd(&mut rng, k);
        // embed the SPD block at scattered positions
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        let mut support: Vec<usize> = idx[..k].to_vec();
        support.sort();
        let mut dense = DMatrix::zeros(n, n);
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                dense[(i, j)] = block[(a, b)];
            }
        }
        let m = CsrMatrix::from_dense(&dense);
        let mut y = DVector::zeros(n);
        for &i in &support {
            y[i] = rng.gen_range(-1.0..1.0);
        }
        let my = &dense * &y;
        let x = restricted_spd_solve(&m, my.as_slice(), &support).unwrap();
        // dense Cholesky of the support block as the independent route
        let rhs = DVector::from_iterator(k, support.iter().map(|&i| my[i]));
        let sol = block.clone().cholesky().unwrap().solve(&rhs);
        let mut oracle = DVector::zeros(n);
        for (a, &i) in support.iter().enumerate() {
            oracle[i] = sol[a];
        }
        let x = DVector::from_vec(x);
        prop_assert!((&x - &oracle).norm() <= 1e-9 * oracle.norm().max(1e-300));
        prop_assert!((&dense * &x - &my).norm() <= 1e-9 * my.norm().max(1e-300));
    }

    #[test]
    fn nullspace_is_orthonormal_kernel(seed in any::<u64>(), n in 2usize..10, r in 1usize..9) {
        let r = r.min(n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_matrix(&mut rng, n, r);
        let a = &f * f.transpose();
        let tol = 1e-10;
        let q = nullspace_basis(&a, tol).unwrap();
        prop_assert_eq!(q.ncols(), n - r);
        prop_assert!((&a * &q).norm() <= 10.0 * tol * a.norm());
        prop_assert!((q.transpose() * &q - DMatrix::identity(n - r, n - r)).norm() <= 1e-10);
        prop_assert_eq!(rank(&a, tol), r);
    }

    #[test]
    fn symmetric_pinv_matches_factor_formula(seed in any::<u64>(), n in 2usize..8, r in 1usize..8) {
        let r = r.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_matrix(&mut rng, n, r);
        let a = &f * f.transpose();
        let ours = symmetric_pinv(&a, 1e-10).unwrap();
        // (F Fᵀ)⁺ = F (FᵀF)⁻² Fᵀ for F of full column rank
        let gram_inv = (f.transpose() * &f).try_inverse().unwrap();
        let oracle = &f * &gram_inv * &gram_inv * f.transpose();
        prop_assert!((&ours - &oracle).norm() <= 1e-7 * oracle.norm());
        prop_assert!(min_symmetric_eigenvalue(&a).unwrap() >= -1e-10 * a.norm());
    }
}

#[test]
fn spd_five_by_five_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_spd(&mut rng, 5);
    let b: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = SparseLu::factorize(&CsrMatrix::from_dense(&a))
        .unwrap()
        .solve(&b)
        .unwrap();
    let r = &a * DVector::from_vec(y) - DVector::from_vec(b);
    assert!(r.norm() < 1e-10);
}

#[test]
fn rank_one_in_three_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)).normalize();
    let q = nullspace_basis(&(&v * v.transpose()), 1e-10).unwrap();
    assert_eq!(q.ncols(), 2);
    for c in q.column_iter() {
        assert!(c.dot(&v).abs() < 1e-10);
    }
}

#[test]
fn hand_computed_ranks() {
    assert_eq!(rank(&DMatrix::identity(3, 3), 1e-12), 3);
    assert_eq!(rank(&DMatrix::zeros(3, 3), 1e-12), 0);
    // singular values of [[1,2],[2,4]] are 5 and 0
    assert_eq!(
        rank(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]), 1e-12),
        1
    );
}
