use gtd_core::tensor::dot;
use gtd_core::{khatri_rao, DenseTensor, Matrix};
use proptest::prelude::*;

fn tensor_strategy(max_order: usize) -> impl Strategy<Value = DenseTensor> {
    prop::collection::vec(1usize..5, 1..=max_order).prop_flat_map(|shape| {
        let n: usize = shape.iter().product();
        prop::collection::vec(-10.0f64..10.0, n).prop_map(move |data| DenseTensor::new(shape.clone(), data).unwrap())
    })
}

fn multi_indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &j in shape {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..j).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

/// Column index of an entry in the mode-`mode` unfolding: remaining indices
/// in increasing mode order, lowest fastest.
fn unfold_column(idx: &[usize], shape: &[usize], mode: usize) -> usize {
    let mut col = 0;
    let mut stride = 1;
    for (k, (&i, &j)) in idx.iter().zip(shape).enumerate() {
        if k != mode {
            col += i * stride;
            stride *= j;
        }
    }
    col
}

proptest! {
    #[test]
    fn fold_unfold_round_trip(t in tensor_strategy(4)) {
        for mode in 0..t.order() {
            let m = t.unfold(mode).unwrap();
            prop_assert_eq!(m.rows(), t.shape()[mode]);
            let back = DenseTensor::fold(&m, mode, t.shape()).unwrap();
            prop_assert_eq!(back.data(), t.data());
        }
    }

    #[test]
    fn unfold_matches_index_formula(t in tensor_strategy(4)) {
        for mode in 0..t.order() {
            let m = t.unfold(mode).unwrap();
            for idx in multi_indices(t.shape()) {
                prop_assert_eq!(m.get(idx[mode], unfold_column(&idx, t.shape(), mode)), t.get(&idx));
            }
        }
    }

    #[test]
    fn inner_product_matches_nested_loops(t in tensor_strategy(3), seed in 0u64..1000) {
        let other: Vec<f64> = (0..t.len()).map(|i| ((i as u64 * 31 + seed) % 17) as f64 - 8.0).collect();
        let u = DenseTensor::new(t.shape().to_vec(), other).unwrap();
        let mut expect = 0.0;
        for idx in multi_indices(t.shape()) {
            expect += t.get(&idx) * u.get(&idx);
        }
        let got = dot(t.data(), u.data());
        prop_assert!((got - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
    }

    #[test]
    fn khatri_rao_columns_are_kronecker(
        (ar, br, r) in (1usize..5, 1usize..5, 1usize..4),
        seed in 0u64..1000,
    ) {
        let val = |i: usize| (((i as u64 + seed) * 2654435761) % 1000) as f64 / 100.0 - 5.0;
        let a = Matrix::from_col_major(ar, r, (0..ar * r).map(val).collect()).unwrap();
        let b = Matrix::from_col_major(br, r, (0..br * r).map(|i| val(i + 500)).collect()).unwrap();
        let k = khatri_rao(&a, &b).unwrap();
        prop_assert_eq!((k.rows(), k.cols()), (ar * br, r));
        for c in 0..r {
            let mut expect = Vec::new();
            for i in 0..ar {
                for j in 0..br {
                    expect.push(a.get(i, c) * b.get(j, c));
                }
            }
            prop_assert_eq!(k.col(c), &expect[..]);
        }
    }

    #[test]
    fn mode_product_matches_unfolded_multiply(t in tensor_strategy(4), rows in 1usize..4, mode_pick in 0usize..4) {
        let mode = mode_pick % t.order();
        let j = t.shape()[mode];
        let m = Matrix::from_col_major(rows, j, (0..rows * j).map(|i| i as f64 * 0.5 - 1.0).collect()).unwrap();
        let got = t.mode_n_product(&m, mode).unwrap();
        let mut shape = t.shape().to_vec();
        shape[mode] = rows;
        let unf = t.unfold(mode).unwrap();
        // independent product m · unfold(t, mode)
        let mut prod = Matrix::zeros(rows, unf.cols());
        for r in 0..rows {
            for c in 0..unf.cols() {
                let s: f64 = (0..j).map(|k| m.get(r, k) * unf.get(k, c)).sum();
                prod.set(r, c, s);
            }
        }
        let expect = DenseTensor::fold(&prod, mode, &shape).unwrap();
        prop_assert_eq!(got.shape(), expect.shape());
        for (a, b) in got.data().iter().zip(expect.data()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn text_round_trip_is_exact(t in tensor_strategy(3)) {
        let back = DenseTensor::from_text(&t.to_text()).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn column_major_layout() {
    let t = DenseTensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(t.get(&[0, 1]), 3.0);
    assert_eq!(t.get(&[1, 0]), 2.0);
    assert_eq!(t.vec(), vec![1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn fold_three_by_eight_mode_one() {
    let m = Matrix::from_col_major(3, 8, (0..24).map(f64::from).collect()).unwrap();
    let shape = [2, 3, 4];
    let t = DenseTensor::fold(&m, 1, &shape).unwrap();
    for idx in multi_indices(&shape) {
        assert_eq!(t.get(&idx), m.get(idx[1], idx[0] + 2 * idx[2]));
    }
}

#[test]
fn khatri_rao_of_ones_and_column_mismatch() {
    let ones = Matrix::from_col_major(1, 3, vec![1.0; 3]).unwrap();
    assert_eq!(khatri_rao(&ones, &ones).unwrap().data(), &[1.0; 3]);
    let a = Matrix::zeros(2, 2);
    let b = Matrix::zeros(2, 3);
    assert!(khatri_rao(&a, &b).is_err());
}
