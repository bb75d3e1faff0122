mod common;

use common::*;
use mdirand::linalg::{
    cholesky_spd, hermitian_basis, jacobi_eigen, kron, min_eigenvalue, real_embed, real_unembed, row_space_basis,
    HermitianOperator, C64,
};
use mdirand::mdi::{build_raw_sdp, build_sdp, Mode, Scenario};
use mdirand::quantum::{tomographic_set, DevicePreset, StateEnsemble};
use proptest::prelude::*;
use rand::Rng;

fn hermitian_oracle_eigenvalues(h: &HermitianOperator) -> Vec<f64> {
    let d = h.dim();
    let m = nalgebra::DMatrix::from_fn(d, d, |r, c| {
        let z = h.get(r, c);
        nalgebra::Complex::new(z.re, z.im)
    });
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedding_trace_identity(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (x, y) = (random_hermitian(&mut r, d), random_hermitian(&mut r, d));
        let lhs = real_embed(&x).matmul(&real_embed(&y)).trace();
        prop_assert!((lhs - 2.0 * x.inner(&y)).abs() < 1e-12);
    }

    #[test]
    fn embedding_preserves_spectrum(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, d);
        let oracle = hermitian_oracle_eigenvalues(&h);
        let embedded = jacobi_eigen(&real_embed(&h), false).unwrap().values;
        for (k, v) in oracle.iter().enumerate() {
            prop_assert!((embedded[2 * k] - v).abs() < 1e-10);
            prop_assert!((embedded[2 * k + 1] - v).abs() < 1e-10);
        }
        prop_assert!((min_eigenvalue(&h).unwrap() - oracle[0]).abs() < 1e-10);
    }

    #[test]
    fn unembed_inverts_embed(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, d);
        prop_assert!(real_unembed(&real_embed(&h)).unwrap().max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn kron_mixed_product_and_associativity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m: Vec<_> = (0..4).map(|_| random_complex(&mut r, 2, 2)).collect();
        let lhs = kron(&m[0], &m[1]).matmul(&kron(&m[2], &m[3]));
        let rhs = kron(&m[0].matmul(&m[2]), &m[1].matmul(&m[3]));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let left = kron(&kron(&m[0], &m[1]), &m[2]);
        let right = kron(&m[0], &kron(&m[1], &m[2]));
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn kron_of_hermitian_is_hermitian(seed in any::<u64>(), d1 in 1usize..4, d2 in 1usize..4) {
        let mut r = rng(seed);
        let k = random_hermitian(&mut r, d1).kron(&random_hermitian(&mut r, d2));
        prop_assert!(k.matrix().hermitian_deviation() < 1e-12);
    }

    #[test]
    fn jacobi_matches_reference(seed in any::<u64>(), n in 1usize..17) {
        let mut r = rng(seed);
        let a = random_symmetric(&mut r, n);
        let ours = jacobi_eigen(&a, true).unwrap();
        let mut oracle: Vec<f64> = to_nalgebra(&a).symmetric_eigen().eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        for (x, y) in ours.values.iter().zip(&oracle) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        let v = ours.vectors.unwrap();
        let back = v.matmul(&mdirand::linalg::RealMatrix::diag(&ours.values)).matmul(&v.transpose());
        prop_assert!(back.max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn cholesky_reconstructs(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let m = random_psd(&mut r, n, n, 0.1);
        let l = cholesky_spd(&m).unwrap();
        let back = l.matmul(&l.transpose());
        let mut diff = back.clone();
        diff.axpy(-1.0, &m);
        prop_assert!(diff.frobenius_norm() < 1e-10 * (1.0 + m.frobenius_norm()));
    }
}

#[test]
fn hermitian_basis_spans() {
    let mut r = rng(11);
    for d in 1..5 {
        let basis = hermitian_basis(d);
        assert_eq!(basis.len(), d * d);
        let h = random_hermitian(&mut r, d);
        let back = basis
            .iter()
            .fold(HermitianOperator::zeros(d), |acc, g| acc.add(&g.scale(g.inner(&h))));
        assert!(back.max_abs_diff(&h) < 1e-14);
    }
}

/// Random `rows x cols` matrix of rank `rank`, padded with exact duplicates
/// and combinations of earlier rows.
fn low_rank_rows(r: &mut impl Rng, rows: usize, cols: usize, rank: usize) -> Vec<Vec<f64>> {
    let basis: Vec<Vec<f64>> = (0..rank).map(|_| (0..cols).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
    (0..rows)
        .map(|_| {
            let c: Vec<f64> = (0..rank).map(|_| r.gen_range(-1.0..1.0)).collect();
            (0..cols).map(|j| (0..rank).map(|k| c[k] * basis[k][j]).sum()).collect()
        })
        .collect()
}

#[test]
fn row_space_rank_matches_svd() {
    let mut r = rng(2024);
    for case in 0..30 {
        let cols = r.gen_range(3..12);
        let rank = r.gen_range(1..=cols);
        let rows = r.gen_range(rank..rank + 8);
        let mut m = low_rank_rows(&mut r, rows, cols, rank);
        if case % 3 == 0 {
            m.push(vec![0.0; cols]);
        }
        let basis = row_space_basis(&m, 1e-9);
        assert_eq!(basis.rank(), svd_rank(&m, 1e-9), "case {case}");
        let kept: Vec<Vec<f64>> = basis.kept.iter().map(|&i| m[i].clone()).collect();
        assert_eq!(svd_rank(&kept, 1e-9), kept.len(), "kept rows dependent in case {case}");
        for d in &basis.dropped {
            let mut res = m[d.index].clone();
            for &(j, c) in &d.coefficients {
                for (x, y) in res.iter_mut().zip(&m[j]) {
                    *x -= c * y;
                }
            }
            assert!(res.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-9);
        }
    }
}

#[test]
fn unit_rows_example() {
    let b = row_space_basis(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], 1e-9);
    assert_eq!(b.kept, vec![0, 1]);
    assert_eq!(b.dropped.len(), 1);
    let c = &b.dropped[0].coefficients;
    assert!(c.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-14));
}

/// Dense rows of the raw MDI constraints over all block entries, each
/// normalized to unit length.
fn dense_rows(p: &mdirand::sdp::SdpProblem) -> Vec<Vec<f64>> {
    let offsets: Vec<usize> = p
        .blocks
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n * n;
            Some(o)
        })
        .collect();
    let width: usize = p.blocks.iter().map(|n| n * n).sum();
    p.constraints
        .iter()
        .map(|c| {
            let mut row = vec![0.0; width];
            for t in &c.terms {
                let n = p.blocks[t.block];
                t.matrix.add_scaled_into(1.0, &mut row[offsets[t.block]..offsets[t.block] + n * n]);
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            row.iter_mut().for_each(|v| *v /= norm);
            row
        })
        .collect()
}

#[test]
fn mdi_constraint_rank_matches_svd() {
    let ens = StateEnsemble::uniform(tomographic_set()).unwrap();
    for (device, eta) in [(DevicePreset::SigmaZ, 0.9), (DevicePreset::SigmaZ, 1.0), (DevicePreset::Extremal4, 0.8)] {
        for mode in [Mode::FiniteQ, Mode::AsymptoticAsymmetric] {
            let s = Scenario::honest(ens.clone(), &device.povm(), eta, mode).unwrap();
            let raw = build_raw_sdp(&s, 0.0).unwrap();
            if device == DevicePreset::SigmaZ {
                assert_eq!(raw.num_constraints(), 72);
            }
            let (_, report) = build_sdp(&s, 0.0).unwrap();
            assert_eq!(report.rank(), svd_rank(&dense_rows(&raw), 1e-9), "{device:?} {eta} {mode:?}");
        }
    }
}

#[test]
fn pure_state_has_zero_min_eigenvalue() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = HermitianOperator::projector(&[C64::new(s, 0.0), C64::new(s, 0.0)]);
    assert!(min_eigenvalue(&plus).unwrap().abs() < 1e-12);
}
