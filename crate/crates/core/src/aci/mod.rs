//! Alternating cross interpolation: builds `y = f(x¹, …, xᴺ)` elementwise from
//! input trains by two-site sweeps over frames, never forming the exact
//! result's bond dimension.

mod canonical;
mod frames;
mod local;

use std::time::Instant;

use ndarray::Array3;

pub use crate::sweep::{local_update, LocalUpdate};
pub use canonical::ci_canonicalize;
pub use frames::{left_frame_step, right_frame_step, FrameMatrixSet};
pub use local::{apply_elementwise, assemble_input_pis, assemble_pi};

use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::prrlu::LduOptions;
use crate::report::SweepReport;
use crate::sweep::{Direction, PiSampler, TwoSiteSweep};
use crate::tt::{random_tt, Entries, TensorTrain, C64};

use ndarray::Array4;

/// A pure map from `arity` complex values to one complex value.
pub trait ElementwiseFunction {
    fn arity(&self) -> usize;
    fn apply(&self, args: &[C64]) -> C64;
}

/// Closure-backed [`ElementwiseFunction`].
#[derive(Clone, Copy)]
pub struct Elementwise<F> {
    arity: usize,
    f: F,
}

impl<F: Fn(&[C64]) -> C64> Elementwise<F> {
    pub fn new(arity: usize, f: F) -> Self {
        Elementwise { arity, f }
    }
}

impl<F: Fn(&[C64]) -> C64> ElementwiseFunction for Elementwise<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn apply(&self, args: &[C64]) -> C64 {
        (self.f)(args)
    }
}

pub type FnElementwise = Elementwise<fn(&[C64]) -> C64>;

/// Hadamard product of `arity` inputs.
pub fn product(arity: usize) -> FnElementwise {
    Elementwise::new(arity, |a: &[C64]| a.iter().product())
}

pub fn sum(arity: usize) -> FnElementwise {
    Elementwise::new(arity, |a: &[C64]| a.iter().sum())
}

pub fn identity() -> FnElementwise {
    Elementwise::new(1, |a: &[C64]| a[0])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AciOptions {
    pub tol: f64,
    pub max_bond: usize,
    /// Iterations, each a left-to-right and a right-to-left sweep.
    pub max_iter: usize,
    /// Seed of the random initial guess when none is supplied.
    pub seed: u64,
    /// Measure errors relative to the largest |Π| entry seen.
    pub relative: bool,
}

impl Default for AciOptions {
    fn default() -> Self {
        AciOptions { tol: 1e-12, max_bond: usize::MAX, max_iter: 20, seed: 0, relative: false }
    }
}

impl AciOptions {
    fn check(&self) -> Result<()> {
        if !(self.tol >= 0.0) {
            return Err(Error::Invalid(format!("tolerance {} must be nonnegative", self.tol)));
        }
        if self.max_bond == 0 || self.max_iter == 0 {
            return Err(Error::Invalid("max_bond and max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

struct AciSampler<'s, F: ?Sized> {
    inputs: &'s [TensorTrain],
    f: &'s F,
    frames: &'s mut FrameMatrixSet,
}

impl<F: ElementwiseFunction + ?Sized> PiSampler for AciSampler<'_, F> {
    fn sample_pi(&mut self, b: usize, left: &IndexSet, right: &IndexSet) -> Result<Array4<C64>> {
        assemble_pi(self.inputs, self.frames, b, self.f, left, right)
    }

    fn left_set_changed(&mut self, b: usize, parent: &IndexSet, set: &IndexSet) -> Result<()> {
        self.frames.refresh_left(self.inputs, b, parent, set)
    }

    fn right_set_changed(&mut self, b: usize, parent: &IndexSet, set: &IndexSet) -> Result<()> {
        self.frames.refresh_right(self.inputs, b, parent, set)
    }
}

/// Sweep state of one elementwise run; exposes single bond updates for inspection.
pub struct AciState<'a, F: ElementwiseFunction + ?Sized> {
    inputs: &'a [TensorTrain],
    f: &'a F,
    opts: AciOptions,
    sweep: TwoSiteSweep,
    frames: FrameMatrixSet,
}

fn check_inputs<F: ElementwiseFunction + ?Sized>(f: &F, inputs: &[TensorTrain]) -> Result<Vec<usize>> {
    if inputs.is_empty() || f.arity() != inputs.len() {
        return Err(Error::Arity { expected: f.arity(), got: inputs.len() });
    }
    let dims = inputs[0].local_dims();
    if let Some(x) = inputs.iter().find(|x| x.local_dims() != dims) {
        return Err(Error::Dimension(format!("local dimensions {:?} and {:?} differ", dims, x.local_dims())));
    }
    Ok(dims)
}

impl<'a, F: ElementwiseFunction + ?Sized> AciState<'a, F> {
    /// Canonicalizes the initial guess (random when `init` is `None`) and builds right frames.
    pub fn new(f: &'a F, inputs: &'a [TensorTrain], init: Option<&TensorTrain>, opts: &AciOptions) -> Result<Self> {
        opts.check()?;
        let dims = check_inputs(f, inputs)?;
        let n = dims.len();
        let bonds = n - 1;

        if n == 1 {
            let core = Array3::from_shape_fn((1, dims[0], 1), |(_, s, _)| {
                let args: Vec<C64> = inputs.iter().map(|x| x.core(0)[[0, s, 0]]).collect();
                f.apply(&args)
            });
            if let Some(s) = core.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::Evaluation { index: vec![s], value: format!("{}", core[[0, s, 0]]) });
            }
            return Ok(AciState {
                inputs,
                f,
                opts: *opts,
                sweep: TwoSiteSweep::new(vec![core], Vec::new(), opts.tol, opts.max_bond, opts.relative),
                frames: FrameMatrixSet::new(inputs.len(), 0),
            });
        }

        let guess = match init {
            Some(y) => {
                if y.local_dims() != dims {
                    return Err(Error::Dimension("initial guess has different local dimensions".into()));
                }
                y.clone()
            }
            None => {
                let mut bd = inputs[0].bond_dims();
                for x in &inputs[1..] {
                    for (a, b) in bd.iter_mut().zip(x.bond_dims()) {
                        *a = (*a).min(b);
                    }
                }
                for a in bd.iter_mut() {
                    *a = (*a).min(opts.max_bond);
                }
                random_tt(&dims, &bd, opts.seed, Entries::Real)?
            }
        };
        let (cores, sets) = ci_canonicalize(&guess, &LduOptions::new(0.0, opts.max_bond))?;
        let mut frames = FrameMatrixSet::new(inputs.len(), bonds);
        for b in (0..bonds).rev() {
            let parent = if b + 1 < bonds { sets[b + 1].clone() } else { IndexSet::trivial_right(n) };
            frames.refresh_right(inputs, b, &parent, &sets[b])?;
        }
        Ok(AciState {
            inputs,
            f,
            opts: *opts,
            sweep: TwoSiteSweep::new(cores, sets, opts.tol, opts.max_bond, opts.relative),
            frames,
        })
    }

    fn split(&mut self) -> (&mut TwoSiteSweep, AciSampler<'_, F>) {
        (&mut self.sweep, AciSampler { inputs: self.inputs, f: self.f, frames: &mut self.frames })
    }

    /// Factorizes Π at bond `b` and refreshes the frame on the sweep's trailing side.
    pub fn update_bond(&mut self, b: usize, dir: Direction) -> Result<()> {
        let (sweep, mut sampler) = self.split();
        sweep.update_bond(&mut sampler, b, dir)
    }

    /// One left-to-right and one right-to-left sweep.
    pub fn iterate(&mut self) -> Result<()> {
        let (sweep, mut sampler) = self.split();
        sweep.iterate(&mut sampler)
    }

    pub fn run(&mut self, max_iter: usize) -> Result<SweepReport> {
        let start = Instant::now();
        let (sweep, mut sampler) = self.split();
        sweep.run(&mut sampler, max_iter, start)
    }

    pub fn len(&self) -> usize {
        self.sweep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sweep.len() == 0
    }

    pub fn options(&self) -> &AciOptions {
        &self.opts
    }

    pub fn inputs(&self) -> &[TensorTrain] {
        self.inputs
    }

    pub fn function(&self) -> &F {
        self.f
    }

    pub fn cores(&self) -> &[Array3<C64>] {
        &self.sweep.cores
    }

    pub fn current_tt(&self) -> Result<TensorTrain> {
        TensorTrain::new(self.sweep.cores.clone())
    }

    pub fn into_tt(self) -> Result<TensorTrain> {
        TensorTrain::new(self.sweep.cores)
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.sweep.bond_dims()
    }

    /// Left set at bond `b` (sites `0..=b`), once a left-to-right update has built it.
    pub fn left_set(&self, b: usize) -> Option<&IndexSet> {
        self.sweep.left.get(b).and_then(|s| s.as_ref())
    }

    /// Right set at bond `b` (sites `b+1..L`).
    pub fn right_set(&self, b: usize) -> Option<&IndexSet> {
        self.sweep.right.get(b).and_then(|s| s.as_ref())
    }

    pub fn frames(&self) -> &FrameMatrixSet {
        &self.frames
    }

    pub fn bond_errors(&self) -> &[f64] {
        &self.sweep.errors
    }

    pub fn sweeps(&self) -> usize {
        self.sweep.sweeps
    }
}

/// Computes `f(x¹, …, xᴺ)` elementwise as a tensor train.
pub fn aci<F: ElementwiseFunction + ?Sized>(
    f: &F,
    inputs: &[TensorTrain],
    init: Option<&TensorTrain>,
    opts: &AciOptions,
) -> Result<(TensorTrain, SweepReport)> {
    let start = Instant::now();
    let mut state = AciState::new(f, inputs, init, opts)?;
    let (sweep, mut sampler) = state.split();
    let report = sweep.run(&mut sampler, opts.max_iter, start)?;
    Ok((state.into_tt()?, report))
}
