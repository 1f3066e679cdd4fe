//! Frame matrices: partial contractions of an input train at the members of an index set.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::linalg::Gemm;
use crate::sweep::core_as_rows;
use crate::tt::{TensorTrain, C64};

use ndarray::Array3;

/// `L'[k, :] = L[p, :] · X[:, σ, :]` for each member `k = (parent p, σ)` of `set`.
pub fn left_frame_step(
    core: &Array3<C64>,
    prev: &Array2<C64>,
    parent: &IndexSet,
    set: &IndexSet,
) -> Result<Array2<C64>> {
    let (cl, d, cr) = core.dim();
    if prev.dim() != (parent.len(), cl) {
        return Err(Error::Dimension(format!(
            "left frame {:?} does not match parent set {} and bond {}",
            prev.dim(),
            parent.len(),
            cl
        )));
    }
    let t = prev.mm(&core_as_rows(core));
    let mut out = Array2::zeros((set.len(), cr));
    for k in 0..set.len() {
        let (p, s) = set.parent_of(k, parent)?;
        if s >= d {
            return Err(Error::Dimension(format!("local index {} exceeds {}", s, d)));
        }
        out.row_mut(k).assign(&t.row(p).slice(ndarray::s![s * cr..(s + 1) * cr]));
    }
    Ok(out)
}

/// `R'[:, k] = X[:, σ, :] · R[:, p]` for each member `k = (σ, parent p)` of `set`.
pub fn right_frame_step(
    core: &Array3<C64>,
    next: &Array2<C64>,
    parent: &IndexSet,
    set: &IndexSet,
) -> Result<Array2<C64>> {
    let (cl, d, cr) = core.dim();
    if next.dim() != (cr, parent.len()) {
        return Err(Error::Dimension(format!(
            "right frame {:?} does not match bond {} and parent set {}",
            next.dim(),
            cr,
            parent.len()
        )));
    }
    let m = core.to_shape((cl * d, cr)).expect("contiguous core");
    let t = m.mm(next);
    let mut out = Array2::zeros((cl, set.len()));
    for k in 0..set.len() {
        let (p, s) = set.parent_of(k, parent)?;
        if s >= d {
            return Err(Error::Dimension(format!("local index {} exceeds {}", s, d)));
        }
        for a in 0..cl {
            out[[a, k]] = t[[a * d + s, p]];
        }
    }
    Ok(out)
}

/// Left and right frames of every input at every bond.
///
/// `left(n, b)` has shape `|I_b| × chi_{b+1}(x^n)` for the left set over sites
/// `0..=b`; `right(n, b)` has shape `chi_{b+1}(x^n) × |J_b|` for the right set
/// over sites `b+1..L`.
#[derive(Clone, Debug)]
pub struct FrameMatrixSet {
    left: Vec<Vec<Option<Array2<C64>>>>,
    right: Vec<Vec<Option<Array2<C64>>>>,
    unit: Array2<C64>,
}

impl FrameMatrixSet {
    pub fn new(inputs: usize, bonds: usize) -> Self {
        FrameMatrixSet {
            left: vec![vec![None; bonds]; inputs],
            right: vec![vec![None; bonds]; inputs],
            unit: Array2::from_elem((1, 1), C64::new(1.0, 0.0)),
        }
    }

    pub fn left(&self, n: usize, b: usize) -> Option<&Array2<C64>> {
        self.left[n][b].as_ref()
    }

    pub fn right(&self, n: usize, b: usize) -> Option<&Array2<C64>> {
        self.right[n][b].as_ref()
    }

    /// Left frame feeding the Π tensor at bond `b` (covers sites `0..b`).
    pub fn left_of_pi(&self, n: usize, b: usize) -> Result<&Array2<C64>> {
        if b == 0 {
            return Ok(&self.unit);
        }
        self.left(n, b - 1).ok_or_else(|| Error::Invalid(format!("left frame at bond {} not built", b - 1)))
    }

    /// Right frame feeding the Π tensor at bond `b` (covers sites `b+2..L`).
    pub fn right_of_pi(&self, n: usize, b: usize) -> Result<&Array2<C64>> {
        let bonds = self.right[n].len();
        if b + 1 >= bonds {
            return Ok(&self.unit);
        }
        self.right(n, b + 1).ok_or_else(|| Error::Invalid(format!("right frame at bond {} not built", b + 1)))
    }

    pub fn refresh_left(&mut self, inputs: &[TensorTrain], b: usize, parent: &IndexSet, set: &IndexSet) -> Result<()> {
        for (n, x) in inputs.iter().enumerate() {
            let prev = if b == 0 {
                &self.unit
            } else {
                self.left[n][b - 1].as_ref().ok_or_else(|| Error::Invalid("stale left frame".into()))?
            };
            let f = left_frame_step(x.core(b), prev, parent, set)?;
            self.left[n][b] = Some(f);
        }
        Ok(())
    }

    pub fn refresh_right(&mut self, inputs: &[TensorTrain], b: usize, parent: &IndexSet, set: &IndexSet) -> Result<()> {
        let bonds = self.right.first().map_or(0, |v| v.len());
        for (n, x) in inputs.iter().enumerate() {
            let next = if b + 1 >= bonds {
                &self.unit
            } else {
                self.right[n][b + 1].as_ref().ok_or_else(|| Error::Invalid("stale right frame".into()))?
            };
            let f = right_frame_step(x.core(b + 1), next, parent, set)?;
            self.right[n][b] = Some(f);
        }
        Ok(())
    }
}
