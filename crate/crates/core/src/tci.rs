//! Two-site tensor cross interpolation of black-box functions of the full
//! index, and sampled max-norm error between two evaluable objects.

use std::time::Instant;

use ndarray::{Array3, Array4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::index::{concat, IndexSet};
use crate::report::SweepReport;
use crate::sweep::{PiSampler, TwoSiteSweep};
use crate::tt::{all_indices, TensorTrain, C64, DEFAULT_DENSE_CAP};

/// Anything that maps a full index to a complex value.
pub trait Evaluable {
    fn local_dims(&self) -> Vec<usize>;
    fn value(&self, idx: &[usize]) -> C64;
}

impl Evaluable for TensorTrain {
    fn local_dims(&self) -> Vec<usize> {
        TensorTrain::local_dims(self)
    }

    fn value(&self, idx: &[usize]) -> C64 {
        self.evaluate_unchecked(idx)
    }
}

/// Closure-backed function on a fixed index space.
#[derive(Clone)]
pub struct BlackBoxFunction<F> {
    dims: Vec<usize>,
    f: F,
}

impl<F: Fn(&[usize]) -> C64> BlackBoxFunction<F> {
    pub fn new(local_dims: Vec<usize>, f: F) -> Self {
        BlackBoxFunction { dims: local_dims, f }
    }
}

impl<F: Fn(&[usize]) -> C64> Evaluable for BlackBoxFunction<F> {
    fn local_dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn value(&self, idx: &[usize]) -> C64 {
        (self.f)(idx)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TciOptions {
    pub tol: f64,
    pub max_bond: usize,
    pub max_iter: usize,
    /// Measure errors relative to the largest |f| sampled so far.
    pub normalize_error: bool,
}

impl Default for TciOptions {
    fn default() -> Self {
        TciOptions { tol: 1e-12, max_bond: usize::MAX, max_iter: 20, normalize_error: true }
    }
}

struct TciSampler<'a, E: ?Sized> {
    f: &'a E,
    dims: &'a [usize],
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl<E: Evaluable + ?Sized> PiSampler for TciSampler<'_, E> {
    fn sample_pi(&mut self, b: usize, left: &IndexSet, right: &IndexSet) -> Result<Array4<C64>> {
        let (d1, d2) = (self.dims[b], self.dims[b + 1]);
        let mut data = Vec::with_capacity(left.len() * d1 * d2 * right.len());
        for a in 0..left.len() {
            for s1 in 0..d1 {
                for s2 in 0..d2 {
                    for j in 0..right.len() {
                        let idx = concat(left.get(a), &[s1, s2], right.get(j));
                        let v = self.f.value(&idx);
                        if !finite(v) {
                            return Err(Error::Evaluation { index: idx, value: format!("{}", v) });
                        }
                        data.push(v);
                    }
                }
            }
        }
        Ok(Array4::from_shape_vec((left.len(), d1, d2, right.len()), data).expect("shape"))
    }

    fn left_set_changed(&mut self, _: usize, _: &IndexSet, _: &IndexSet) -> Result<()> {
        Ok(())
    }

    fn right_set_changed(&mut self, _: usize, _: &IndexSet, _: &IndexSet) -> Result<()> {
        Ok(())
    }
}

/// Builds a train interpolating `f`, starting from the single pivot `seed_pivot`
/// (all zeros when `None`).
pub fn tci_build<E: Evaluable + ?Sized>(
    f: &E,
    opts: &TciOptions,
    seed_pivot: Option<&[usize]>,
) -> Result<(TensorTrain, SweepReport)> {
    let start = Instant::now();
    if !(opts.tol >= 0.0) || opts.max_bond == 0 || opts.max_iter == 0 {
        return Err(Error::Invalid("tolerance must be nonnegative, max_bond and max_iter positive".into()));
    }
    let dims = f.local_dims();
    let n = dims.len();
    if n == 0 || dims.contains(&0) {
        return Err(Error::Dimension("empty index space".into()));
    }
    let pivot: Vec<usize> = match seed_pivot {
        Some(p) => p.to_vec(),
        None => vec![0; n],
    };
    if pivot.len() != n || pivot.iter().zip(&dims).any(|(&s, &d)| s >= d) {
        return Err(Error::Dimension(format!("seed pivot {:?} outside {:?}", pivot, dims)));
    }

    if n == 1 {
        let mut vals = Vec::with_capacity(dims[0]);
        for s in 0..dims[0] {
            let v = f.value(&[s]);
            if !finite(v) {
                return Err(Error::Evaluation { index: vec![s], value: format!("{}", v) });
            }
            vals.push(v);
        }
        let tt = TensorTrain::new(vec![Array3::from_shape_vec((1, dims[0], 1), vals).expect("shape")])?;
        let report = SweepReport {
            sweeps: 1,
            bond_dims_history: vec![tt.bond_dims()],
            max_error_history: vec![0.0],
            converged: true,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        return Ok((tt, report));
    }

    let mut right = Vec::with_capacity(n - 1);
    for b in 0..n - 1 {
        right.push(IndexSet::new(crate::index::Side::Right, b + 1..n, vec![pivot[b + 1..].to_vec().into()])?);
    }
    let cores = dims.iter().map(|&d| Array3::zeros((1, d, 1))).collect();
    let mut sweep = TwoSiteSweep::new(cores, right, opts.tol, opts.max_bond, opts.normalize_error);
    let mut sampler = TciSampler { f, dims: &dims };
    let report = sweep.run(&mut sampler, opts.max_iter, start)?;
    Ok((TensorTrain::new(sweep.cores)?, report))
}

/// Default sample count for max-norm error estimates.
pub const DEFAULT_ERROR_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Uniform random full indices.
    Random { samples: usize, seed: u64 },
    /// Every index; limited to the dense cap.
    Exhaustive,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Random { samples: DEFAULT_ERROR_SAMPLES, seed: 0 }
    }
}

/// `max |a(σ) − b(σ)|` over the sampled indices.
pub fn sampled_max_error<A: Evaluable + ?Sized, B: Evaluable + ?Sized>(
    a: &A,
    b: &B,
    sampling: Sampling,
) -> Result<f64> {
    let dims = a.local_dims();
    if dims != b.local_dims() {
        return Err(Error::Dimension(format!("index spaces {:?} and {:?} differ", dims, b.local_dims())));
    }
    let diff = |idx: &[usize]| -> Result<f64> {
        let (x, y) = (a.value(idx), b.value(idx));
        for v in [x, y] {
            if !finite(v) {
                return Err(Error::Evaluation { index: idx.to_vec(), value: format!("{}", v) });
            }
        }
        Ok((x - y).norm())
    };
    let mut worst = 0.0f64;
    match sampling {
        Sampling::Random { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = vec![0; dims.len()];
            for _ in 0..samples {
                for (s, &d) in idx.iter_mut().zip(&dims) {
                    *s = rng.random_range(0..d);
                }
                worst = worst.max(diff(&idx)?);
            }
        }
        Sampling::Exhaustive => {
            let total = dims.iter().try_fold(1usize, |t, &d| t.checked_mul(d)).unwrap_or(usize::MAX);
            if total > DEFAULT_DENSE_CAP {
                return Err(Error::Capacity { requested: total, cap: DEFAULT_DENSE_CAP });
            }
            for idx in all_indices(&dims) {
                worst = worst.max(diff(&idx)?);
            }
        }
    }
    Ok(worst)
}
