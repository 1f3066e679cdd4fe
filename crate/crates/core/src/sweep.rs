//! Two-site sweeping shared by the elementwise engine and black-box cross
//! interpolation. Both differ only in how the local tensor Π is sampled.

use std::time::Instant;

use ndarray::{Array2, Array3, Array4};

use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::prrlu::{cross_interpolate, LduOptions, Orientation};
use crate::report::SweepReport;
use crate::tt::{IntoShapeStd, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

pub(crate) trait PiSampler {
    /// Π at bond `b`, shape `(|left|, d[b], d[b+1], |right|)`.
    fn sample_pi(&mut self, b: usize, left: &IndexSet, right: &IndexSet) -> Result<Array4<C64>>;

    fn left_set_changed(&mut self, b: usize, parent: &IndexSet, set: &IndexSet) -> Result<()>;

    fn right_set_changed(&mut self, b: usize, parent: &IndexSet, set: &IndexSet) -> Result<()>;
}

/// Result of factorizing one Π tensor.
#[derive(Clone, Debug)]
pub struct LocalUpdate {
    pub y_left: Array3<C64>,
    pub y_right: Array3<C64>,
    pub left_set: IndexSet,
    pub right_set: IndexSet,
    /// Absolute error estimate from the factorization.
    pub error: f64,
}

/// Matricizes Π as `(i, σ) × (σ', j)`, cross-interpolates it and lifts the
/// pivots to multi-indices by extending the parent sets.
pub fn local_update(
    pi: &Array4<C64>,
    left_parent: &IndexSet,
    right_parent: &IndexSet,
    opts: &LduOptions,
    orientation: Orientation,
) -> Result<LocalUpdate> {
    let (ni, d1, d2, nj) = pi.dim();
    if ni != left_parent.len() || nj != right_parent.len() {
        return Err(Error::Dimension(format!(
            "Π of shape {:?} for parent sets of sizes {} and {}",
            pi.dim(),
            left_parent.len(),
            right_parent.len()
        )));
    }
    let m = pi.to_shape((ni * d1, d2 * nj)).expect("contiguous Π").to_owned();
    let x = cross_interpolate(&m, opts, orientation)?;
    if x.rank() == 0 {
        return Ok(LocalUpdate {
            y_left: Array3::zeros((ni, d1, 1)),
            y_right: Array3::zeros((1, d2, nj)),
            left_set: IndexSet::extend_from(left_parent, &[(0, 0)])?,
            right_set: IndexSet::extend_from(right_parent, &[(0, 0)])?,
            error: 0.0,
        });
    }
    let r = x.rank();
    let lp: Vec<(usize, usize)> = x.row_pivots.iter().map(|&row| (row / d1, row % d1)).collect();
    let rp: Vec<(usize, usize)> = x.col_pivots.iter().map(|&col| (col % nj, col / nj)).collect();
    Ok(LocalUpdate {
        y_left: x.a.into_shape_std((ni, d1, r)),
        y_right: x.b.into_shape_std((r, d2, nj)),
        left_set: IndexSet::extend_from(left_parent, &lp)?,
        right_set: IndexSet::extend_from(right_parent, &rp)?,
        error: x.error,
    })
}

pub(crate) struct TwoSiteSweep {
    pub cores: Vec<Array3<C64>>,
    /// `left[b]` covers sites `0..=b`.
    pub left: Vec<Option<IndexSet>>,
    /// `right[b]` covers sites `b+1..L`.
    pub right: Vec<Option<IndexSet>>,
    /// Latest error estimate per bond, divided by `scale`.
    pub errors: Vec<f64>,
    pub tol: f64,
    pub max_bond: usize,
    /// Divide errors by the largest |Π| entry seen so far.
    pub normalize: bool,
    pub scale: f64,
    pub sweeps: usize,
}

impl TwoSiteSweep {
    pub fn new(cores: Vec<Array3<C64>>, right: Vec<IndexSet>, tol: f64, max_bond: usize, normalize: bool) -> Self {
        let bonds = cores.len().saturating_sub(1);
        debug_assert_eq!(right.len(), bonds);
        TwoSiteSweep {
            cores,
            left: vec![None; bonds],
            right: right.into_iter().map(Some).collect(),
            errors: vec![0.0; bonds],
            tol,
            max_bond,
            normalize,
            scale: if normalize { 0.0 } else { 1.0 },
            sweeps: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.cores.iter().map(|c| c.dim().0).collect();
        v.push(1);
        v
    }

    pub fn left_parent(&self, b: usize) -> Result<IndexSet> {
        if b == 0 {
            return Ok(IndexSet::trivial_left());
        }
        self.left[b - 1].clone().ok_or_else(|| {
            Error::Invalid(format!("left set at bond {} not built yet; sweep left to right first", b - 1))
        })
    }

    pub fn right_parent(&self, b: usize) -> Result<IndexSet> {
        if b + 2 >= self.len() {
            return Ok(IndexSet::trivial_right(self.len()));
        }
        self.right[b + 1].clone().ok_or_else(|| Error::Invalid(format!("right set at bond {} missing", b + 1)))
    }

    pub fn update_bond<S: PiSampler>(&mut self, sampler: &mut S, b: usize, dir: Direction) -> Result<()> {
        if b + 1 >= self.len() {
            return Err(Error::Invalid(format!("bond {} out of range for length {}", b, self.len())));
        }
        let lp = self.left_parent(b)?;
        let rp = self.right_parent(b)?;
        let pi = sampler.sample_pi(b, &lp, &rp)?;
        if self.normalize {
            let m = pi.iter().map(|z| z.norm()).fold(0.0, f64::max);
            self.scale = self.scale.max(m);
        }
        let scale = if self.scale > 0.0 { self.scale } else { 1.0 };
        let opts = LduOptions::new(self.tol * scale, self.max_bond);
        let orientation = match dir {
            Direction::LeftToRight => Orientation::Left,
            Direction::RightToLeft => Orientation::Right,
        };
        let up = local_update(&pi, &lp, &rp, &opts, orientation)?;
        self.cores[b] = up.y_left;
        self.cores[b + 1] = up.y_right;
        self.errors[b] = up.error / scale;
        match dir {
            Direction::LeftToRight => sampler.left_set_changed(b, &lp, &up.left_set)?,
            Direction::RightToLeft => sampler.right_set_changed(b, &rp, &up.right_set)?,
        }
        self.left[b] = Some(up.left_set);
        self.right[b] = Some(up.right_set);
        Ok(())
    }

    /// One left-to-right plus one right-to-left sweep.
    pub fn iterate<S: PiSampler>(&mut self, sampler: &mut S) -> Result<()> {
        let bonds = self.len() - 1;
        for b in 0..bonds {
            self.update_bond(sampler, b, Direction::LeftToRight)?;
        }
        for b in (0..bonds).rev() {
            self.update_bond(sampler, b, Direction::RightToLeft)?;
        }
        self.sweeps += 1;
        Ok(())
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    /// Iterates until bond dimensions stop growing and every bond error is within tolerance.
    pub fn run<S: PiSampler>(&mut self, sampler: &mut S, max_iter: usize, started: Instant) -> Result<SweepReport> {
        let mut report = SweepReport::default();
        let mut prev = self.bond_dims();
        for _ in 0..max_iter {
            self.iterate(sampler)?;
            let bonds = self.bond_dims();
            let err = self.max_error();
            report.bond_dims_history.push(bonds.clone());
            report.max_error_history.push(err);
            report.sweeps += 1;
            let grew = bonds.iter().zip(&prev).any(|(a, b)| a > b);
            if !grew && err <= self.tol {
                report.converged = true;
                break;
            }
            prev = bonds;
        }
        report.wall_ms = started.elapsed().as_secs_f64() * 1e3;
        Ok(report)
    }
}

/// Reshapes a core to `(chi_l, d * chi_r)`.
pub(crate) fn core_as_rows(c: &Array3<C64>) -> Array2<C64> {
    let (a, d, b) = c.dim();
    c.to_shape((a, d * b)).expect("contiguous core").to_owned()
}
