//! Complex GEMM routed through faer, which is several times faster than the
//! ndarray default on the large products in sweeps.

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};
use ndarray::{Array2, ArrayBase, ArrayView2, Data, Ix2};

use crate::tt::C64;

/// Below this many multiply-adds the ndarray path has less overhead.
const SMALL: usize = 4096;

fn gemm(a: ArrayView2<'_, C64>, b: ArrayView2<'_, C64>) -> Array2<C64> {
    let (m, k) = a.dim();
    let (k2, n) = b.dim();
    assert_eq!(k, k2, "inner dimensions differ");
    if m.saturating_mul(n).saturating_mul(k) < SMALL {
        return a.dot(&b);
    }
    let mut c = Array2::<C64>::zeros((m, n));
    let (sa, sb) = (a.strides(), b.strides());
    // SAFETY: pointers and strides come from live ndarray views of the stated
    // shapes, and `c` is a fresh row-major buffer of shape (m, n).
    unsafe {
        let lhs = MatRef::from_raw_parts(a.as_ptr(), m, k, sa[0], sa[1]);
        let rhs = MatRef::from_raw_parts(b.as_ptr(), k, n, sb[0], sb[1]);
        let dst = MatMut::from_raw_parts_mut(c.as_mut_ptr(), m, n, n as isize, 1);
        matmul(dst, Accum::Replace, lhs, rhs, C64::new(1.0, 0.0), Par::Seq);
    }
    c
}

pub(crate) trait Gemm {
    fn mm<S: Data<Elem = C64>>(&self, rhs: &ArrayBase<S, Ix2>) -> Array2<C64>;
}

impl<S0: Data<Elem = C64>> Gemm for ArrayBase<S0, Ix2> {
    fn mm<S: Data<Elem = C64>>(&self, rhs: &ArrayBase<S, Ix2>) -> Array2<C64> {
        gemm(self.view(), rhs.view())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::s;

    #[test]
    fn matches_ndarray_on_strided_views() {
        let a = Array2::from_shape_fn((40, 70), |(i, j)| C64::new(i as f64 - 0.3 * j as f64, (i * j % 5) as f64));
        let b = Array2::from_shape_fn((50, 40), |(i, j)| C64::new((i + 2 * j) as f64 * 0.01, -(j as f64)));
        let at = a.t();
        let bv = b.slice(s![..;-1, ..]);
        let want = at.dot(&bv.t());
        let got = at.mm(&bv.t());
        let diff = (&got - &want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }
}
