//! Baseline Hadamard product: the first input acts as a diagonal operator on
//! the second, and the result is fitted by two-site variational sweeps with
//! SVD truncation. Cost per bond is O(d²χ⁴) for output bond χ' ~ χ.

use std::time::Instant;

use faer::Mat;
use ndarray::{s, Array2, Array3, Array4};

use crate::error::{Error, Result};
use crate::linalg::Gemm;
use crate::report::SweepReport;
use crate::tt::{IntoShapeStd, TensorTrain, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    /// The second input, truncated to the bond cap.
    TruncatedSecond,
    Provided(TensorTrain),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Discarded singular-value 2-norm allowed per bond.
    pub tol: f64,
    pub max_bond: usize,
    /// Iterations, each a left-to-right and a right-to-left sweep.
    pub max_sweeps: usize,
    pub initial: InitialGuess,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { tol: 1e-12, max_bond: usize::MAX, max_sweeps: 30, initial: InitialGuess::TruncatedSecond }
    }
}

fn to_faer(m: &Array2<C64>) -> Mat<C64> {
    let (r, c) = m.dim();
    Mat::from_fn(r, c, |i, j| m[[i, j]])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

struct Svd {
    u: Array2<C64>,
    s: Vec<f64>,
    vt: Array2<C64>,
}

/// Thin SVD with singular values in descending order.
fn svd(m: &Array2<C64>) -> Result<Svd> {
    let f = to_faer(m).thin_svd().map_err(|e| Error::Numerical(format!("SVD: {:?}", e)))?;
    let s: Vec<f64> = f.S().column_vector().iter().map(|z| z.re).collect();
    let out = Svd { u: from_faer(f.U()), s, vt: adjoint(&from_faer(f.V())) };
    let mut us = out.u.clone();
    for (k, &sk) in out.s.iter().enumerate() {
        us.column_mut(k).mapv_inplace(|z| z * sk);
    }
    // cheap next to the contractions that produced `m`; catches a silently wrong factorization
    let err = frob(&(&us.mm(&out.vt) - m));
    if !(err <= 1e-10 * frob(m)) && err > 0.0 {
        return Err(Error::Numerical(format!("SVD reconstruction error {:e}", err)));
    }
    Ok(out)
}

/// Smallest rank whose discarded 2-norm is within `tol`, capped; returns (rank, discarded norm).
fn truncation_rank(s: &[f64], tol: f64, cap: usize) -> (usize, f64) {
    let mut tail = vec![0.0; s.len() + 1];
    for k in (0..s.len()).rev() {
        tail[k] = tail[k + 1] + s[k] * s[k];
    }
    let mut r = (1..=s.len()).find(|&r| tail[r].sqrt() <= tol).unwrap_or(s.len());
    r = r.min(cap).max(1);
    (r, tail[r.min(s.len())].sqrt())
}

fn sigma_slices(c: &Array3<C64>) -> Vec<Array2<C64>> {
    (0..c.dim().1).map(|s| c.slice(s![.., s, ..]).to_owned()).collect()
}

/// `T[α', σ, γ2, γ1] = Σ LE[α', α1, α2] X1[α1, σ, γ1] X2[α2, σ, γ2]`, as a `(χ'd) × (χ2 χ1)` matrix.
fn left_partial(le: &Array3<C64>, x1: &Array3<C64>, x2: &Array3<C64>) -> Array2<C64> {
    let (cy, c1, c2) = le.dim();
    let (_, d, g1) = x1.dim();
    let g2 = x2.dim().2;
    let le2 = le.to_shape((cy * c1, c2)).expect("contiguous");
    let (x1s, x2s) = (sigma_slices(x1), sigma_slices(x2));
    let mut t = Array4::<C64>::zeros((cy, d, g2, g1));
    for s in 0..d {
        let a = le2.mm(&x2s[s]).into_shape_std((cy, c1, g2));
        let a = a.permuted_axes([0, 2, 1]).as_standard_layout().into_owned();
        let b = a.into_shape_std((cy * g2, c1)).mm(&x1s[s]);
        t.slice_mut(s![.., s, .., ..]).assign(&b.into_shape_std((cy, g2, g1)));
    }
    t.into_shape_std((cy * d, g2 * g1))
}

/// `S[γ2, γ1, σ, β'] = Σ X1[γ1, σ, δ1] X2[γ2, σ, δ2] RE[β', δ1, δ2]`, as a `(χ2 χ1) × (dχ')` matrix.
fn right_partial(x1: &Array3<C64>, x2: &Array3<C64>, re: &Array3<C64>) -> Array2<C64> {
    let (cy, e1, e2) = re.dim();
    let (g1, d, _) = x1.dim();
    let g2 = x2.dim().0;
    let rep = re.view().permuted_axes([2, 0, 1]).as_standard_layout().into_owned();
    let rep = rep.into_shape_std((e2, cy * e1));
    let (x1s, x2s) = (sigma_slices(x1), sigma_slices(x2));
    let mut t = Array4::<C64>::zeros((g2, g1, d, cy));
    for s in 0..d {
        let b = x2s[s].mm(&rep).into_shape_std((g2 * cy, e1));
        let c = b.mm(&x1s[s].t()).into_shape_std((g2, cy, g1));
        t.slice_mut(s![.., .., s, ..]).assign(&c.permuted_axes([0, 2, 1]));
    }
    t.into_shape_std((g2 * g1, d * cy))
}

/// `LE'[β', γ1, γ2] = Σ conj(Y[α', σ, β']) T[α', σ, γ2, γ1]`.
fn close_left(t: &Array2<C64>, y: &Array3<C64>, g1: usize, g2: usize) -> Array3<C64> {
    let (cy, d, r) = y.dim();
    let yc = y.mapv(|z| z.conj()).into_shape_std((cy * d, r));
    let e = yc.t().mm(t).into_shape_std((r, g2, g1));
    e.permuted_axes([0, 2, 1]).as_standard_layout().into_owned()
}

/// `RE'[β', γ1, γ2] = Σ conj(Y[β', σ, δ']) S[γ2, γ1, σ, δ']`.
fn close_right(sm: &Array2<C64>, y: &Array3<C64>, g1: usize, g2: usize) -> Array3<C64> {
    let (r, d, cy) = y.dim();
    let yc = y.mapv(|z| z.conj()).into_shape_std((r, d * cy));
    let e = sm.mm(&yc.t()).into_shape_std((g2, g1, r));
    e.permuted_axes([2, 1, 0]).as_standard_layout().into_owned()
}

fn unit_env() -> Array3<C64> {
    Array3::from_elem((1, 1, 1), C64::new(1.0, 0.0))
}

/// Right-orthonormalizes all cores but the first, truncating bonds above `cap` by SVD.
fn right_canonicalize(cores: &mut [Array3<C64>], cap: usize) -> Result<()> {
    for l in (1..cores.len()).rev() {
        let (cl, d, cr) = cores[l].dim();
        let m = cores[l].to_shape((cl, d * cr)).expect("contiguous").to_owned();
        let (q, carry) = if cl.min(d * cr) > cap {
            let f = svd(&m)?;
            let r = cap;
            let mut us = f.u.slice(s![.., ..r]).to_owned();
            for (mut col, &sv) in us.columns_mut().into_iter().zip(&f.s) {
                col.mapv_inplace(|z| z * sv);
            }
            (f.vt.slice(s![..r, ..]).to_owned(), us)
        } else {
            // M = R^H Q^H from the thin QR of M^H
            let qr = to_faer(&adjoint(&m)).qr();
            let (qn, rn) = (qr.compute_thin_Q(), qr.thin_R());
            (adjoint(&from_faer(qn.as_ref())), adjoint(&from_faer(rn)))
        };
        let r = q.nrows();
        cores[l] = q.into_shape_std((r, d, cr));
        let (pl, pd, _) = cores[l - 1].dim();
        let prev = cores[l - 1].to_shape((pl * pd, cl)).expect("contiguous").mm(&carry);
        cores[l - 1] = prev.into_shape_std((pl, pd, r));
    }
    Ok(())
}

fn frob(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Fits `x1 ⊙ x2` by two-site variational sweeps.
pub fn hadamard_fit(x1: &TensorTrain, x2: &TensorTrain, cfg: &FitConfig) -> Result<(TensorTrain, SweepReport)> {
    let start = Instant::now();
    if !(cfg.tol >= 0.0) || cfg.max_bond == 0 || cfg.max_sweeps == 0 {
        return Err(Error::Invalid("tolerance must be nonnegative, max_bond and max_sweeps positive".into()));
    }
    let dims = x1.local_dims();
    if dims != x2.local_dims() {
        return Err(Error::Dimension(format!("local dimensions {:?} and {:?} differ", dims, x2.local_dims())));
    }
    let n = dims.len();
    let mut report = SweepReport::default();

    if n == 1 {
        let core = Array3::from_shape_fn((1, dims[0], 1), |(_, s, _)| x1.core(0)[[0, s, 0]] * x2.core(0)[[0, s, 0]]);
        let tt = TensorTrain::new(vec![core])?;
        report.sweeps = 1;
        report.bond_dims_history.push(tt.bond_dims());
        report.max_error_history.push(0.0);
        report.converged = true;
        report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok((tt, report));
    }

    let mut y: Vec<Array3<C64>> = match &cfg.initial {
        InitialGuess::TruncatedSecond => x2.cores().to_vec(),
        InitialGuess::Provided(g) => {
            if g.local_dims() != dims {
                return Err(Error::Dimension("initial guess has different local dimensions".into()));
            }
            g.cores().to_vec()
        }
    };
    right_canonicalize(&mut y, cfg.max_bond)?;

    let mut le: Vec<Option<Array3<C64>>> = vec![None; n + 1];
    let mut re: Vec<Option<Array3<C64>>> = vec![None; n + 1];
    le[0] = Some(unit_env());
    re[n] = Some(unit_env());
    for l in (2..n).rev() {
        let sm = right_partial(x1.core(l), x2.core(l), re[l + 1].as_ref().expect("built"));
        re[l] = Some(close_right(&sm, &y[l], x1.core(l).dim().0, x2.core(l).dim().0));
    }

    let mut prev_bonds: Vec<usize> = y.iter().map(|c| c.dim().0).collect();
    for _ in 0..cfg.max_sweeps {
        let mut max_change = 0.0f64;
        let mut max_trunc = 0.0f64;
        let mut norm = 0.0f64;
        for (b, dir) in (0..n - 1).map(|b| (b, true)).chain((0..n - 1).rev().map(|b| (b, false))) {
            let t = left_partial(le[b].as_ref().expect("left env"), x1.core(b), x2.core(b));
            let sm = right_partial(x1.core(b + 1), x2.core(b + 1), re[b + 2].as_ref().expect("right env"));
            let theta = t.mm(&sm);
            let (cy, d1, _) = y[b].dim();
            let (_, d2, cz) = y[b + 1].dim();
            let old = y[b]
                .to_shape((cy * d1, y[b].dim().2))
                .expect("contiguous")
                .mm(&y[b + 1].to_shape((y[b + 1].dim().0, d2 * cz)).expect("contiguous"));

            let f = svd(&theta)?;
            let (r, trunc) = truncation_rank(&f.s, cfg.tol, cfg.max_bond);
            let u = f.u.slice(s![.., ..r]).to_owned();
            let vt = f.vt.slice(s![..r, ..]).to_owned();
            let mut sv = vt.clone();
            let mut us = u.clone();
            for k in 0..r {
                sv.row_mut(k).mapv_inplace(|z| z * f.s[k]);
                us.column_mut(k).mapv_inplace(|z| z * f.s[k]);
            }
            let new = us.mm(&vt);
            max_change = max_change.max(frob(&(&new - &old)));
            max_trunc = max_trunc.max(trunc);
            norm = norm.max(frob(&new));

            let (g1, g2) = (x1.core(b + 1).dim().0, x2.core(b + 1).dim().0);
            if dir {
                y[b] = u.into_shape_std((cy, d1, r));
                y[b + 1] = sv.into_shape_std((r, d2, cz));
                le[b + 1] = Some(close_left(&t, &y[b], g1, g2));
            } else {
                y[b] = us.into_shape_std((cy, d1, r));
                y[b + 1] = vt.into_shape_std((r, d2, cz));
                re[b + 1] = Some(close_right(&sm, &y[b + 1], g1, g2));
            }
        }
        let bonds: Vec<usize> = y.iter().map(|c| c.dim().0).collect();
        report.sweeps += 1;
        let mut full = bonds.clone();
        full.push(1);
        report.bond_dims_history.push(full);
        report.max_error_history.push(max_trunc);
        let floor = 1e-13 * norm;
        if bonds == prev_bonds && max_change <= cfg.tol + floor && max_trunc <= cfg.tol {
            report.converged = true;
            break;
        }
        prev_bonds = bonds;
    }
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((TensorTrain::new(y)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::{max_abs_diff, random_tt, Entries};

    fn dense_product(a: &TensorTrain, b: &TensorTrain) -> ndarray::ArrayD<C64> {
        let (da, db) = (a.materialize_dense().unwrap(), b.materialize_dense().unwrap());
        &da * &db
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(truncation_rank(&[3.0, 1.0, 1e-9, 1e-10], 1e-8, 10).0, 2);
        assert_eq!(truncation_rank(&[3.0, 1.0], 0.0, 10).0, 2);
        assert_eq!(truncation_rank(&[3.0, 1.0, 0.5], 0.0, 1), (1, (1.25f64).sqrt()));
    }

    #[test]
    fn rank_one_inputs() {
        let a = random_tt(&[2; 5], &[1; 6], 1, Entries::Complex).unwrap();
        let b = random_tt(&[2; 5], &[1; 6], 2, Entries::Complex).unwrap();
        let (y, rep) = hadamard_fit(&a, &b, &FitConfig::default()).unwrap();
        assert_eq!(y.max_bond(), 1);
        assert!(rep.converged);
        assert!(max_abs_diff(&y.materialize_dense().unwrap(), &dense_product(&a, &b)) < 1e-13);
    }

    #[test]
    fn matches_dense_oracle() {
        let bonds = [1, 2, 3, 3, 3, 2, 1];
        let a = random_tt(&[2; 6], &bonds, 3, Entries::Real).unwrap();
        let b = random_tt(&[2; 6], &bonds, 4, Entries::Complex).unwrap();
        let cfg = FitConfig { tol: 1e-10, ..Default::default() };
        let (y, rep) = hadamard_fit(&a, &b, &cfg).unwrap();
        assert!(rep.converged, "{:?}", rep);
        assert!(max_abs_diff(&y.materialize_dense().unwrap(), &dense_product(&a, &b)) < 1e-8);
    }

    #[test]
    fn single_site_and_two_sites() {
        let a = random_tt(&[3], &[1, 1], 1, Entries::Complex).unwrap();
        let b = random_tt(&[3], &[1, 1], 2, Entries::Complex).unwrap();
        let (y, _) = hadamard_fit(&a, &b, &FitConfig::default()).unwrap();
        assert!(max_abs_diff(&y.materialize_dense().unwrap(), &dense_product(&a, &b)) < 1e-14);
        let a = random_tt(&[2, 2], &[1, 2, 1], 1, Entries::Complex).unwrap();
        let b = random_tt(&[2, 2], &[1, 2, 1], 2, Entries::Complex).unwrap();
        let (y, _) = hadamard_fit(&a, &b, &FitConfig::default()).unwrap();
        assert!(max_abs_diff(&y.materialize_dense().unwrap(), &dense_product(&a, &b)) < 1e-13);
    }

    #[test]
    fn capped_bonds_are_respected() {
        let bonds = [1, 2, 4, 4, 4, 2, 1];
        let a = random_tt(&[2; 6], &bonds, 5, Entries::Real).unwrap();
        let b = random_tt(&[2; 6], &bonds, 6, Entries::Real).unwrap();
        let cfg = FitConfig { tol: 0.0, max_bond: 3, max_sweeps: 2, ..Default::default() };
        let (y, rep) = hadamard_fit(&a, &b, &cfg).unwrap();
        assert!(y.max_bond() <= 3);
        assert!(!rep.converged);
    }
}
