use ndarray::{s, Array1, ArrayD};
use tt_aci::aci::{identity, product, sum, FrameMatrixSet};
use tt_aci::tt::{all_indices, max_abs_diff};
use tt_aci::{
    aci, clamped_bond_dims, random_tt, AciOptions, AciState, Direction, Elementwise, ElementwiseFunction, Entries,
    Error, TensorTrain, C64,
};

fn dense(tt: &TensorTrain) -> ArrayD<C64> {
    tt.materialize_dense().unwrap()
}

fn input(len: usize, chi: usize, seed: u64) -> TensorTrain {
    random_tt(&vec![2; len], &clamped_bond_dims(&vec![2; len], chi), seed, Entries::Complex).unwrap()
}

fn oracle<F: ElementwiseFunction>(f: &F, inputs: &[TensorTrain]) -> ArrayD<C64> {
    let ds: Vec<_> = inputs.iter().map(dense).collect();
    let mut out = ds[0].clone();
    for (k, v) in out.iter_mut().enumerate() {
        let args: Vec<C64> = ds.iter().map(|d| d.as_slice().unwrap()[k]).collect();
        *v = f.apply(&args);
    }
    out
}

#[test]
fn product_of_two_random_trains() {
    let xs = [input(6, 3, 1), input(6, 3, 2)];
    let f = product(2);
    let (y, rep) = aci(&f, &xs, None, &AciOptions { tol: 1e-10, ..Default::default() }).unwrap();
    assert!(rep.converged, "{:?}", rep);
    assert!(max_abs_diff(&dense(&y), &oracle(&f, &xs)) <= 1e-8);
}

#[test]
fn sum_and_three_input_function() {
    let xs = [input(5, 2, 3), input(5, 3, 4)];
    let (y, _) = aci(&sum(2), &xs, None, &AciOptions { tol: 1e-10, ..Default::default() }).unwrap();
    assert!(max_abs_diff(&dense(&y), &oracle(&sum(2), &xs)) <= 1e-8);

    let xs = [input(5, 2, 5), input(5, 2, 6), input(5, 3, 7)];
    let f = Elementwise::new(3, |a: &[C64]| a[0] * a[1] + a[2]);
    let (y, rep) = aci(&f, &xs, None, &AciOptions { tol: 1e-10, ..Default::default() }).unwrap();
    assert!(rep.converged);
    assert!(max_abs_diff(&dense(&y), &oracle(&f, &xs)) <= 1e-8);
}

#[test]
fn identity_reproduces_input() {
    let x = [input(8, 4, 9)];
    let opts = AciOptions { tol: 1e-10, ..Default::default() };
    let (y, rep) = aci(&identity(), &x, None, &opts).unwrap();
    assert!(rep.converged);
    assert!(rep.sweeps <= 2);
    assert!(max_abs_diff(&dense(&y), &dense(&x[0])) <= 1e-8);
    assert!(y.bond_dims().iter().zip(x[0].bond_dims()).all(|(a, b)| *a <= b));
}

#[test]
fn rank_one_product_stays_rank_one() {
    let xs = [input(6, 1, 10), input(6, 1, 11)];
    let (y, rep) = aci(&product(2), &xs, None, &AciOptions::default()).unwrap();
    assert_eq!(y.max_bond(), 1);
    assert!(rep.converged);
    assert!(max_abs_diff(&dense(&y), &oracle(&product(2), &xs)) <= 1e-12);
}

#[test]
fn zero_function_gives_zero_train() {
    let xs = [input(5, 3, 12)];
    let f = Elementwise::new(1, |_: &[C64]| C64::new(0.0, 0.0));
    let (y, rep) = aci(&f, &xs, None, &AciOptions::default()).unwrap();
    assert_eq!(y.max_bond(), 1);
    assert!(rep.converged);
    assert_eq!(rep.final_max_error(), Some(0.0));
    assert!(dense(&y).iter().all(|z| z.norm() == 0.0));
}

#[test]
fn short_trains() {
    let xs = [input(1, 1, 13), input(1, 1, 14)];
    let (y, rep) = aci(&product(2), &xs, None, &AciOptions::default()).unwrap();
    assert!(rep.converged);
    assert!(max_abs_diff(&dense(&y), &oracle(&product(2), &xs)) <= 1e-15);

    let xs = [input(2, 2, 15), input(2, 2, 16)];
    let (y, _) = aci(&product(2), &xs, None, &AciOptions::default()).unwrap();
    assert!(max_abs_diff(&dense(&y), &oracle(&product(2), &xs)) <= 1e-12);
}

#[test]
fn input_errors() {
    let xs = [input(4, 2, 1), input(4, 2, 2)];
    assert!(matches!(aci(&product(3), &xs, None, &AciOptions::default()), Err(Error::Arity { .. })));
    let ys = [input(4, 2, 1), input(5, 2, 2)];
    assert!(matches!(aci(&product(2), &ys, None, &AciOptions::default()), Err(Error::Dimension(_))));
    let bad = AciOptions { max_iter: 0, ..Default::default() };
    assert!(aci(&product(2), &xs, None, &bad).is_err());
    let nan = Elementwise::new(2, |a: &[C64]| a[0] / C64::new(0.0, 0.0));
    match aci(&nan, &xs, None, &AciOptions::default()) {
        Err(Error::Evaluation { index, .. }) => assert_eq!(index.len(), 4),
        other => panic!("expected evaluation error, got {:?}", other.map(|r| r.1)),
    }
}

#[test]
fn rank_cap_is_respected_and_flagged() {
    let xs = [input(8, 4, 20), input(8, 4, 21)];
    let opts = AciOptions { tol: 1e-12, max_bond: 3, max_iter: 3, ..Default::default() };
    let (y, rep) = aci(&product(2), &xs, None, &opts).unwrap();
    assert!(y.max_bond() <= 3);
    assert!(!rep.converged);
    assert_eq!(rep.sweeps, 3);
}

#[test]
fn supplied_initial_guess() {
    let xs = [input(6, 3, 22), input(6, 3, 23)];
    let guess = TensorTrain::constant(&[2; 6], C64::new(1.0, 0.0)).unwrap();
    let (y, _) = aci(&product(2), &xs, Some(&guess), &AciOptions { tol: 1e-10, ..Default::default() }).unwrap();
    assert!(max_abs_diff(&dense(&y), &oracle(&product(2), &xs)) <= 1e-8);
}

fn partial_left(x: &TensorTrain, idx: &[usize]) -> Array1<C64> {
    let mut v = Array1::from_elem(1, C64::new(1.0, 0.0));
    for (l, &s) in idx.iter().enumerate() {
        v = v.dot(&x.core(l).slice(s![.., s, ..]));
    }
    v
}

fn partial_right(x: &TensorTrain, start: usize, idx: &[usize]) -> Array1<C64> {
    let mut v = Array1::from_elem(1, C64::new(1.0, 0.0));
    for (off, &s) in idx.iter().enumerate().rev() {
        v = x.core(start + off).slice(s![.., s, ..]).dot(&v);
    }
    v
}

fn check_frames(
    frames: &FrameMatrixSet,
    xs: &[TensorTrain],
    st: &AciState<'_, impl ElementwiseFunction>,
    b: usize,
    dir: Direction,
) {
    for (n, x) in xs.iter().enumerate() {
        match dir {
            Direction::LeftToRight => {
                let set = st.left_set(b).unwrap();
                let f = frames.left(n, b).unwrap();
                for k in 0..set.len() {
                    let want = partial_left(x, set.get(k));
                    assert!(f.row(k).iter().zip(want.iter()).all(|(a, b)| (a - b).norm() <= 1e-12 * (1.0 + b.norm())));
                }
            }
            Direction::RightToLeft => {
                let set = st.right_set(b).unwrap();
                let f = frames.right(n, b).unwrap();
                for k in 0..set.len() {
                    let want = partial_right(x, b + 1, set.get(k));
                    assert!(f
                        .column(k)
                        .iter()
                        .zip(want.iter())
                        .all(|(a, b)| (a - b).norm() <= 1e-12 * (1.0 + b.norm())));
                }
            }
        }
    }
}

#[test]
fn every_update_interpolates_and_nests() {
    let xs = [input(6, 3, 30), input(6, 2, 31)];
    let f = product(2);
    let mut st = AciState::new(&f, &xs, None, &AciOptions { tol: 1e-10, ..Default::default() }).unwrap();
    for _ in 0..2 {
        let order: Vec<(usize, Direction)> = (0..5)
            .map(|b| (b, Direction::LeftToRight))
            .chain((0..5).rev().map(|b| (b, Direction::RightToLeft)))
            .collect();
        for (b, dir) in order {
            st.update_bond(b, dir).unwrap();
            let y = st.current_tt().unwrap();
            let (iset, jset) = (st.left_set(b).unwrap(), st.right_set(b).unwrap());
            if b > 0 {
                assert!(iset.is_nested_in(st.left_set(b - 1).unwrap()));
            }
            if b < 4 {
                assert!(jset.is_nested_in(st.right_set(b + 1).unwrap()));
            }
            for i in 0..iset.len() {
                for j in 0..jset.len() {
                    let mut idx = iset.get(i).to_vec();
                    idx.extend_from_slice(jset.get(j));
                    let args: Vec<C64> = xs.iter().map(|x| x.evaluate(&idx).unwrap()).collect();
                    let want = f.apply(&args);
                    let got = y.evaluate(&idx).unwrap();
                    assert!((got - want).norm() <= 1e-13 * want.norm().max(1.0), "{} vs {}", got, want);
                }
            }
            check_frames(st.frames(), &xs, &st, b, dir);
        }
    }
}

#[test]
fn converged_state_is_stable() {
    let xs = [input(6, 2, 40), input(6, 2, 41)];
    let f = product(2);
    let mut st = AciState::new(&f, &xs, None, &AciOptions { tol: 1e-12, ..Default::default() }).unwrap();
    let rep = st.run(20).unwrap();
    assert!(rep.converged);
    let (bonds, errs) = (st.bond_dims(), st.bond_errors().to_vec());
    st.iterate().unwrap();
    assert_eq!(st.bond_dims(), bonds);
    for (a, b) in st.bond_errors().iter().zip(&errs) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn exhaustive_points_agree_with_evaluate() {
    let xs = [input(5, 3, 50), input(5, 3, 51)];
    let (y, _) = aci(&product(2), &xs, None, &AciOptions { tol: 1e-10, ..Default::default() }).unwrap();
    for idx in all_indices(&[2; 5]) {
        let want = xs[0].evaluate(&idx).unwrap() * xs[1].evaluate(&idx).unwrap();
        assert!((y.evaluate(&idx).unwrap() - want).norm() <= 1e-8);
    }
}
