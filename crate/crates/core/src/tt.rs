//! Tensor trains over complex scalars.

use ndarray::{s, Array, Array1, Array2, Array3, ArrayD, Dimension, IxDyn, ShapeArg};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::index::{IndexSet, Side};
use crate::linalg::Gemm;

pub type C64 = Complex64;

/// Row-major reshape that first copies arrays not in standard layout.
pub(crate) trait IntoShapeStd {
    fn into_shape_std<E: ShapeArg>(self, shape: E) -> Array<C64, E::Dim>;
}

impl<D: Dimension> IntoShapeStd for Array<C64, D> {
    fn into_shape_std<E: ShapeArg>(self, shape: E) -> Array<C64, E::Dim> {
        let a = if self.is_standard_layout() { self } else { self.as_standard_layout().into_owned() };
        a.into_shape_with_order(shape).expect("row-major reshape with matching size")
    }
}

/// Default entry cap for [`TensorTrain::materialize_dense`].
pub const DEFAULT_DENSE_CAP: usize = 1 << 20;

/// A chain of cores `X[l]` of shape `(chi[l], d[l], chi[l+1])` with `chi[0] = chi[L] = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTrain {
    cores: Vec<Array3<C64>>,
}

impl TensorTrain {
    pub fn new(cores: Vec<Array3<C64>>) -> Result<Self> {
        validate(&cores)?;
        Ok(TensorTrain { cores })
    }

    /// Rank-1 train with every entry equal to `value` (spread over the first core).
    pub fn constant(local_dims: &[usize], value: C64) -> Result<Self> {
        let cores = local_dims
            .iter()
            .enumerate()
            .map(|(l, &d)| Array3::from_elem((1, d, 1), if l == 0 { value } else { C64::new(1.0, 0.0) }))
            .collect();
        Self::new(cores)
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn cores(&self) -> &[Array3<C64>] {
        &self.cores
    }

    pub fn core(&self, l: usize) -> &Array3<C64> {
        &self.cores[l]
    }

    pub fn into_cores(self) -> Vec<Array3<C64>> {
        self.cores
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dim().1).collect()
    }

    /// Bond dimensions `chi[0..=L]`, boundaries included.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.cores.iter().map(|c| c.dim().0).collect();
        v.push(1);
        v
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Multiplies core `l` by `factor`.
    pub fn scale_core(&mut self, l: usize, factor: C64) {
        self.cores[l].mapv_inplace(|z| z * factor);
    }

    pub fn evaluate(&self, idx: &[usize]) -> Result<C64> {
        if idx.len() != self.len() {
            return Err(Error::Dimension(format!("index of length {} for train of length {}", idx.len(), self.len())));
        }
        for (l, (&s, c)) in idx.iter().zip(&self.cores).enumerate() {
            if s >= c.dim().1 {
                return Err(Error::Dimension(format!(
                    "index {} at site {} exceeds local dimension {}",
                    s,
                    l,
                    c.dim().1
                )));
            }
        }
        Ok(self.evaluate_unchecked(idx))
    }

    pub(crate) fn evaluate_unchecked(&self, idx: &[usize]) -> C64 {
        let mut v = Array1::from_elem(1, C64::new(1.0, 0.0));
        for (&s, c) in idx.iter().zip(&self.cores) {
            v = v.dot(&c.slice(s![.., s, ..]));
        }
        v[0]
    }

    pub fn materialize_dense(&self) -> Result<ArrayD<C64>> {
        self.materialize_dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn materialize_dense_capped(&self, cap: usize) -> Result<ArrayD<C64>> {
        let dims = self.local_dims();
        let total = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
        if total > cap {
            return Err(Error::Capacity { requested: total, cap });
        }
        let mut acc = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for c in &self.cores {
            let (cl, d, cr) = c.dim();
            let m = c.to_shape((cl, d * cr)).expect("contiguous core");
            let next = acc.mm(&m);
            let rows = next.nrows() * d;
            acc = next.into_shape_std((rows, cr));
        }
        Ok(acc.into_shape_std(IxDyn(&dims)))
    }
}

fn validate(cores: &[Array3<C64>]) -> Result<()> {
    if cores.is_empty() {
        return Err(Error::Dimension("tensor train needs at least one core".into()));
    }
    for (l, c) in cores.iter().enumerate() {
        let (a, d, b) = c.dim();
        if a == 0 || d == 0 || b == 0 {
            return Err(Error::Dimension(format!("core {} has a zero extent {:?}", l, c.dim())));
        }
        if l + 1 < cores.len() && b != cores[l + 1].dim().0 {
            return Err(Error::Dimension(format!("bond {} mismatch: {} vs {}", l + 1, b, cores[l + 1].dim().0)));
        }
    }
    if cores[0].dim().0 != 1 || cores[cores.len() - 1].dim().2 != 1 {
        return Err(Error::Dimension("boundary bonds must be 1".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entries {
    /// Entries drawn from U[0, 1).
    Real,
    /// Real and imaginary parts drawn independently from U[0, 1).
    Complex,
}

/// Random train with uniform entries; `bond_dims` has length `L + 1` with unit ends.
pub fn random_tt(local_dims: &[usize], bond_dims: &[usize], seed: u64, entries: Entries) -> Result<TensorTrain> {
    if bond_dims.len() != local_dims.len() + 1 {
        return Err(Error::Dimension(format!("{} bond dimensions for {} sites", bond_dims.len(), local_dims.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cores = local_dims
        .iter()
        .enumerate()
        .map(|(l, &d)| {
            Array3::from_shape_simple_fn((bond_dims[l], d, bond_dims[l + 1]), || match entries {
                Entries::Real => C64::new(rng.random::<f64>(), 0.0),
                Entries::Complex => {
                    let re = rng.random::<f64>();
                    C64::new(re, rng.random::<f64>())
                }
            })
        })
        .collect();
    TensorTrain::new(cores)
}

/// Bond dimensions `min(chi, prod of dims to the left, prod to the right)`.
pub fn clamped_bond_dims(local_dims: &[usize], chi: usize) -> Vec<usize> {
    let n = local_dims.len();
    let mut left = vec![1usize; n + 1];
    let mut right = vec![1usize; n + 1];
    for l in 0..n {
        left[l + 1] = left[l].saturating_mul(local_dims[l]);
    }
    for l in (0..n).rev() {
        right[l] = right[l + 1].saturating_mul(local_dims[l]);
    }
    (0..=n).map(|b| chi.min(left[b]).min(right[b]).max(1)).collect()
}

/// Rows of the partial contraction of cores `0..set.span().end` at each member.
pub(crate) fn left_partials(tt: &TensorTrain, set: &IndexSet) -> Array2<C64> {
    let end = set.span().end;
    let chi = if end == 0 { 1 } else { tt.core(end - 1).dim().2 };
    let mut out = Array2::zeros((set.len(), chi));
    for (k, m) in set.members().iter().enumerate() {
        let mut v = Array1::from_elem(1, C64::new(1.0, 0.0));
        for (l, &s) in m.as_slice().iter().enumerate() {
            v = v.dot(&tt.core(l).slice(s![.., s, ..]));
        }
        out.row_mut(k).assign(&v);
    }
    out
}

/// Columns of the partial contraction of cores `set.span()` at each member.
pub(crate) fn right_partials(tt: &TensorTrain, set: &IndexSet) -> Array2<C64> {
    let start = set.span().start;
    let chi = if start == tt.len() { 1 } else { tt.core(start).dim().0 };
    let mut out = Array2::zeros((chi, set.len()));
    for (k, m) in set.members().iter().enumerate() {
        let mut v = Array1::from_elem(1, C64::new(1.0, 0.0));
        for (off, &s) in m.as_slice().iter().enumerate().rev() {
            v = tt.core(start + off).slice(s![.., s, ..]).dot(&v);
        }
        out.column_mut(k).assign(&v);
    }
    out
}

/// Slice `tt[I, free sites, J]`, of shape `(|I|, d[a], .., d[c-1], |J|)` where
/// `I` covers sites `0..a` and `J` covers `c..L`.
pub fn slice(tt: &TensorTrain, left: &IndexSet, right: &IndexSet) -> Result<ArrayD<C64>> {
    let n = tt.len();
    let (ls, rs) = (left.span(), right.span());
    if left.side() != Side::Left || right.side() != Side::Right {
        return Err(Error::Span("slice needs a left set and a right set".into()));
    }
    if ls.start != 0 || rs.end != n || ls.end > rs.start {
        return Err(Error::Span(format!("spans {:?} and {:?} do not tile length {}", ls, rs, n)));
    }
    let dims = tt.local_dims();
    left.check_ranges(&dims)?;
    right.check_ranges(&dims)?;

    let lmat = left_partials(tt, left);
    let rmat = right_partials(tt, right);
    let chi_a = lmat.ncols();
    let mut mid = Array2::<C64>::eye(chi_a);
    let mut free = 1usize;
    for l in ls.end..rs.start {
        let (cl, d, cr) = tt.core(l).dim();
        let rows = mid.nrows();
        let m = tt.core(l).to_shape((cl, d * cr)).expect("contiguous core");
        // mid is (chi_a * free) x cl in row-major
        mid = mid.mm(&m).into_shape_std((rows * d, cr));
        free *= d;
    }
    // mid: (chi_a * free) x chi_c; fold chi_a with lmat
    let chi_c = mid.ncols();
    let mid = mid.into_shape_std((chi_a, free * chi_c));
    let t = lmat.mm(&mid).into_shape_std((left.len() * free, chi_c));
    let out = t.mm(&rmat);
    let mut shape = vec![left.len()];
    shape.extend_from_slice(&dims[ls.end..rs.start]);
    shape.push(right.len());
    Ok(out.into_shape_std(IxDyn(&shape)))
}

/// Iterator over all full indices of a product space, last site fastest.
pub fn all_indices(local_dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = local_dims.iter().product();
    (0..total).map(move |mut k| {
        let mut idx = vec![0; local_dims.len()];
        for (l, &d) in local_dims.iter().enumerate().rev() {
            idx[l] = k % d;
            k /= d;
        }
        idx
    })
}

/// Entry of a dense array at a full index.
pub fn dense_lookup(a: &ArrayD<C64>, idx: &[usize]) -> C64 {
    a[IxDyn(idx)]
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ArrayD<C64>, b: &ArrayD<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
