//! Right-to-left CI canonicalization of an initial guess.

use ndarray::Array2;

use crate::error::Result;
use crate::index::IndexSet;
use crate::linalg::Gemm;
use crate::prrlu::{cross_interpolate, LduOptions, Orientation};
use crate::sweep::core_as_rows;
use crate::tt::{IntoShapeStd, TensorTrain, C64};

use ndarray::Array3;

/// Brings `y` into CI-canonical form from the right.
///
/// Returns the cores, with every core but the first interpolative on its right
/// set, and the nested right sets `J_b` (sites `b+1..L`) for each bond `b`.
pub fn ci_canonicalize(y: &TensorTrain, opts: &LduOptions) -> Result<(Vec<Array3<C64>>, Vec<IndexSet>)> {
    let n = y.len();
    let mut cores: Vec<Array3<C64>> = y.cores().to_vec();
    let mut sets: Vec<Option<IndexSet>> = vec![None; n.saturating_sub(1)];
    let mut parent = IndexSet::trivial_right(n);
    for l in (1..n).rev() {
        let (cl, d, cr) = cores[l].dim();
        let m = core_as_rows(&cores[l]);
        let x = cross_interpolate(&m, opts, Orientation::Right)?;
        let (a, b, picks) = if x.rank() == 0 {
            (Array2::zeros((cl, 1)), Array2::zeros((1, d * cr)), vec![(0, 0)])
        } else {
            let picks: Vec<(usize, usize)> = x.col_pivots.iter().map(|&c| (c % cr, c / cr)).collect();
            (x.a, x.b, picks)
        };
        let r = a.ncols();
        let set = IndexSet::extend_from(&parent, &picks)?;
        cores[l] = b.into_shape_std((r, d, cr));
        let (pl, pd, _) = cores[l - 1].dim();
        let prev = cores[l - 1].to_shape((pl * pd, cl)).expect("contiguous core").mm(&a);
        cores[l - 1] = prev.into_shape_std((pl, pd, r));
        sets[l - 1] = Some(set.clone());
        parent = set;
    }
    Ok((cores, sets.into_iter().map(|s| s.expect("every bond visited")).collect()))
}
