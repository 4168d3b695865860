//! The compiled QUBO checked against an explicit matrix triple product, plus
//! structural invariants over random instances.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use qregress::{build_qubo, decode, qubo_energy, regression_error, Dataset, PrecisionVector};

/// `I_{cols} ⊗ pᵀ`, written out entry by entry.
fn explicit_precision_matrix(p: &[f64], cols: usize) -> DMatrix<f64> {
    let k = p.len();
    DMatrix::from_fn(
        cols,
        cols * k,
        |r, c| if c / k == r { p[c % k] } else { 0.0 },
    )
}

/// `(A, b, offset)` from `𝒫ᵀXᵀX𝒫`, `−2𝒫ᵀXᵀY`, `YᵀY`.
fn triple_product(ds: &Dataset, p: &[f64]) -> (DMatrix<f64>, DVector<f64>, f64) {
    let x = DMatrix::from_row_slice(ds.n(), ds.d_plus_1(), ds.x());
    let y = DVector::from_column_slice(ds.y());
    // weights are 𝒫ẑ
    let pm = explicit_precision_matrix(p, ds.d_plus_1());
    let xp = &x * &pm;
    let a = xp.transpose() * &xp;
    let b = -2.0 * (xp.transpose() * &y);
    (a, b, y.dot(&y))
}

fn assert_close(a: f64, b: f64, scale: f64) {
    assert!((a - b).abs() <= 1e-12 * scale.max(1.0), "{a} vs {b}");
}

fn check_against_triple_product(ds: &Dataset, p: &PrecisionVector) {
    let q = build_qubo(ds, p).unwrap();
    let (a, b, offset) = triple_product(ds, p.as_slice());
    let scale = a.amax().max(b.amax());
    for i in 0..q.m() {
        for j in 0..q.m() {
            assert_close(q.a(i, j), a[(i, j)], scale);
        }
        assert_close(q.b()[i], b[i], scale);
    }
    assert_close(q.offset(), offset, offset);
}

#[test]
fn small_instance_matches_triple_product() {
    let ds = Dataset::from_augmented_rows(&[vec![1.0, 1.0], vec![2.0, 1.0]], &[3.0, 5.0]).unwrap();
    let p = PrecisionVector::new(vec![1.0, 2.0]).unwrap();
    check_against_triple_product(&ds, &p);
    let (a, b, offset) = triple_product(&ds, p.as_slice());
    assert_eq!(a[(0, 1)], 10.0);
    assert_eq!(a[(3, 3)], 8.0);
    assert_eq!(b.as_slice(), &[-26.0, -52.0, -16.0, -32.0]);
    assert_eq!(offset, 34.0);
}

fn precision_strategy() -> impl Strategy<Value = PrecisionVector> {
    prop::collection::btree_set((-4i32..=3, any::<bool>()), 1..=4).prop_map(|set| {
        let mut v: Vec<f64> = set
            .into_iter()
            .map(|(e, neg)| if neg { -(2f64.powi(e)) } else { 2f64.powi(e) })
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        PrecisionVector::new(v).unwrap()
    })
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..=4, 1usize..=25).prop_flat_map(|(cols, n)| {
        (
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, cols - 1), n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
            .prop_map(|(f, y)| Dataset::from_features(&f, &y).unwrap())
    })
}

proptest! {
    #[test]
    fn matches_triple_product(ds in dataset_strategy(), p in precision_strategy()) {
        check_against_triple_product(&ds, &p);
    }

    #[test]
    fn energy_plus_offset_is_regression_error(
        ds in dataset_strategy(),
        p in precision_strategy(),
        seed in any::<u64>(),
    ) {
        let q = build_qubo(&ds, &p).unwrap();
        let bits: Vec<u8> = (0..q.m()).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
        let lhs = qubo_energy(&q, &bits).unwrap() + q.offset();
        let rhs = regression_error(&ds, &decode(&p, &bits).unwrap()).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(q.offset()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn quadratic_term_is_symmetric_psd(ds in dataset_strategy(), p in precision_strategy()) {
        let q = build_qubo(&ds, &p).unwrap();
        let m = q.m();
        let a = DMatrix::from_row_slice(m, m, q.a_row_major());
        prop_assert_eq!(&a, &a.transpose());
        let eig = SymmetricEigen::new(a.clone());
        let tol = 1e-9 * a.amax().max(1.0);
        prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -tol), "{:?}", eig.eigenvalues);
    }

    #[test]
    fn size_is_columns_times_precision_length(ds in dataset_strategy(), p in precision_strategy()) {
        let q = build_qubo(&ds, &p).unwrap();
        prop_assert_eq!(q.m(), ds.d_plus_1() * p.k());
        prop_assert_eq!(q.b().len(), q.m());
        prop_assert_eq!(q.a_row_major().len(), q.m() * q.m());
    }
}
