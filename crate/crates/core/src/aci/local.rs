//! Π assembly from frames and input cores.

use ndarray::Array4;

use super::frames::FrameMatrixSet;
use super::ElementwiseFunction;
use crate::error::{Error, Result};
use crate::index::{concat, IndexSet};
use crate::linalg::Gemm;
use crate::sweep::core_as_rows;
use crate::tt::{IntoShapeStd, TensorTrain, C64};

/// `Πⁿ = L · Xⁿ_b · Xⁿ_{b+1} · R` for every input, contracted in the order
/// `(X_{b+1} R)` then `(L X_b)` then their product.
pub fn assemble_input_pis(inputs: &[TensorTrain], frames: &FrameMatrixSet, b: usize) -> Result<Vec<Array4<C64>>> {
    let mut out = Vec::with_capacity(inputs.len());
    for (n, x) in inputs.iter().enumerate() {
        let lf = frames.left_of_pi(n, b)?;
        let rf = frames.right_of_pi(n, b)?;
        let (ca, d1, cm) = x.core(b).dim();
        let (_, d2, cc) = x.core(b + 1).dim();
        let (ni, nj) = (lf.nrows(), rf.ncols());
        if lf.ncols() != ca || rf.nrows() != cc {
            return Err(Error::Dimension(format!("frames do not match input {} at bond {}", n, b)));
        }
        let xr = x.core(b + 1).to_shape((cm * d2, cc)).expect("contiguous core").mm(rf);
        let xr = xr.into_shape_std((cm, d2 * nj));
        let lx = lf.mm(&core_as_rows(x.core(b))).into_shape_std((ni * d1, cm));
        let pi = lx.mm(&xr).into_shape_std((ni, d1, d2, nj));
        out.push(pi);
    }
    Ok(out)
}

/// Applies `f` entrywise across the per-input Π tensors. Non-finite results
/// are reported with their full index.
pub fn apply_elementwise<F: ElementwiseFunction + ?Sized>(
    f: &F,
    pis: &[Array4<C64>],
    left: &IndexSet,
    right: &IndexSet,
) -> Result<Array4<C64>> {
    if f.arity() != pis.len() {
        return Err(Error::Arity { expected: f.arity(), got: pis.len() });
    }
    let dim = pis[0].dim();
    let slices: Vec<&[C64]> = pis.iter().map(|p| p.as_slice().expect("standard layout")).collect();
    let mut args = vec![C64::new(0.0, 0.0); pis.len()];
    let mut data = Vec::with_capacity(slices[0].len());
    for k in 0..slices[0].len() {
        for (a, s) in args.iter_mut().zip(&slices) {
            *a = s[k];
        }
        let v = f.apply(&args);
        if !(v.re.is_finite() && v.im.is_finite()) {
            let (_, d1, d2, nj) = dim;
            let (a, rem) = (k / (d1 * d2 * nj), k % (d1 * d2 * nj));
            let (s1, rem) = (rem / (d2 * nj), rem % (d2 * nj));
            let (s2, j) = (rem / nj, rem % nj);
            return Err(Error::Evaluation {
                index: concat(left.get(a), &[s1, s2], right.get(j)),
                value: format!("{}", v),
            });
        }
        data.push(v);
    }
    Ok(Array4::from_shape_vec(dim, data).expect("same shape"))
}

/// Π at bond `b`: the frames' interpolation basis with `f` applied entrywise.
pub fn assemble_pi<F: ElementwiseFunction + ?Sized>(
    inputs: &[TensorTrain],
    frames: &FrameMatrixSet,
    b: usize,
    f: &F,
    left: &IndexSet,
    right: &IndexSet,
) -> Result<Array4<C64>> {
    if f.arity() != inputs.len() {
        return Err(Error::Arity { expected: f.arity(), got: inputs.len() });
    }
    let pis = assemble_input_pis(inputs, frames, b)?;
    apply_elementwise(f, &pis, left, right)
}
