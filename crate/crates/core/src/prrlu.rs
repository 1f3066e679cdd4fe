//! Partially rank-revealing LU with greedy full pivoting, and cross
//! interpolation built on top of it.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::Gemm;
use crate::tt::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LduOptions {
    /// Pivots with modulus at or below this threshold are not accepted.
    pub tol: f64,
    pub max_rank: usize,
    /// Scale `tol` by the modulus of the first pivot.
    pub relative: bool,
}

impl Default for LduOptions {
    fn default() -> Self {
        LduOptions { tol: 0.0, max_rank: usize::MAX, relative: false }
    }
}

impl LduOptions {
    pub fn new(tol: f64, max_rank: usize) -> Self {
        LduOptions { tol, max_rank, relative: false }
    }

    fn check(&self) -> Result<()> {
        if !(self.tol >= 0.0) {
            return Err(Error::Invalid(format!("tolerance {} must be nonnegative", self.tol)));
        }
        if self.max_rank == 0 {
            return Err(Error::Invalid("rank cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// `M ≈ L · diag(d) · U`, with `L` (m×r) and `U` (r×n) in the original row and
/// column order. `L[row_pivots, :]` is unit lower triangular and
/// `U[:, col_pivots]` is unit upper triangular.
#[derive(Clone, Debug)]
pub struct Ldu {
    pub l: Array2<C64>,
    pub d: Vec<C64>,
    pub u: Array2<C64>,
    pub row_pivots: Vec<usize>,
    pub col_pivots: Vec<usize>,
    /// Largest modulus left in the Schur complement when elimination stopped;
    /// zero once the matrix is exhausted.
    pub error: f64,
}

impl Ldu {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn reconstruct(&self) -> Array2<C64> {
        let mut ld = self.l.clone();
        for (mut col, &dk) in ld.columns_mut().into_iter().zip(&self.d) {
            col.mapv_inplace(|z| z * dk);
        }
        ld.mm(&self.u)
    }

    /// One line per pivot: step, row, column, modulus.
    pub fn pivot_dump(&self) -> String {
        let mut s = String::new();
        for k in 0..self.rank() {
            writeln!(s, "{} {} {} {:.17e}", k, self.row_pivots[k], self.col_pivots[k], self.d[k].norm()).unwrap();
        }
        writeln!(s, "error {:.17e}", self.error).unwrap();
        s
    }
}

struct Pick {
    pos: (usize, usize),
    orig: (usize, usize),
    mag2: f64,
}

impl Pick {
    fn none() -> Self {
        Pick { pos: (0, 0), orig: (usize::MAX, usize::MAX), mag2: -1.0 }
    }

    #[inline]
    fn offer(&mut self, mag2: f64, pos: (usize, usize), orig: (usize, usize)) {
        if mag2 > self.mag2 || (mag2 == self.mag2 && orig < self.orig) {
            *self = Pick { pos, orig, mag2 };
        }
    }
}

pub fn ldu(m: &Array2<C64>, opts: &LduOptions) -> Result<Ldu> {
    opts.check()?;
    let (nr, nc) = m.dim();
    let mut w: Vec<C64> = m.iter().copied().collect();
    let mut rows: Vec<usize> = (0..nr).collect();
    let mut cols: Vec<usize> = (0..nc).collect();

    let mut pick = Pick::none();
    for i in 0..nr {
        for j in 0..nc {
            let z = w[i * nc + j];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
            pick.offer(z.norm_sqr(), (i, j), (i, j));
        }
    }

    let full = nr.min(nc);
    let mut d = Vec::new();
    let mut threshold = opts.tol;
    let error;
    let mut k = 0;
    loop {
        if k == full {
            error = 0.0;
            break;
        }
        let (p, q) = pick.pos;
        let pv = w[p * nc + q];
        let mag = pv.norm();
        if mag == 0.0 {
            error = 0.0;
            break;
        }
        if k > 0 && mag <= threshold {
            error = mag;
            break;
        }
        if k == opts.max_rank {
            error = mag;
            break;
        }
        if k == 0 && opts.relative {
            threshold = opts.tol * mag;
        }
        if p != k {
            for j in 0..nc {
                w.swap(p * nc + j, k * nc + j);
            }
            rows.swap(p, k);
        }
        if q != k {
            for i in 0..nr {
                w.swap(i * nc + q, i * nc + k);
            }
            cols.swap(q, k);
        }
        d.push(pv);
        let inv = pv.inv();
        let (head, tail) = w.split_at_mut((k + 1) * nc);
        let prow = &head[k * nc..(k + 1) * nc];
        pick = Pick::none();
        for (ii, row) in tail.chunks_exact_mut(nc).enumerate() {
            let i = k + 1 + ii;
            let li = row[k] * inv;
            row[k] = li;
            let oi = rows[i];
            for j in k + 1..nc {
                let z = row[j] - li * prow[j];
                row[j] = z;
                pick.offer(z.norm_sqr(), (i, j), (oi, cols[j]));
            }
        }
        k += 1;
    }

    let r = d.len();
    let mut l = Array2::<C64>::zeros((nr, r));
    let mut u = Array2::<C64>::zeros((r, nc));
    for c in 0..r {
        l[[rows[c], c]] = C64::new(1.0, 0.0);
        for i in c + 1..nr {
            l[[rows[i], c]] = w[i * nc + c];
        }
        u[[c, cols[c]]] = C64::new(1.0, 0.0);
        let inv = d[c].inv();
        for j in c + 1..nc {
            u[[c, cols[j]]] = w[c * nc + j] * inv;
        }
    }
    rows.truncate(r);
    cols.truncate(r);
    Ok(Ldu { l, d, u, row_pivots: rows, col_pivots: cols, error })
}

/// Which factor absorbs the inverse pivot block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `A = M[:, J] M[I, J]^-1`, `B = M[I, :]`; `A[I, :]` is the identity.
    Left,
    /// `A = M[:, J]`, `B = M[I, J]^-1 M[I, :]`; `B[:, J]` is the identity.
    Right,
}

#[derive(Clone, Debug)]
pub struct CrossResult {
    pub a: Array2<C64>,
    pub b: Array2<C64>,
    pub row_pivots: Vec<usize>,
    pub col_pivots: Vec<usize>,
    pub error: f64,
    pub orientation: Orientation,
}

impl CrossResult {
    pub fn rank(&self) -> usize {
        self.row_pivots.len()
    }
}

#[inline]
fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}

pub fn cross_interpolate(m: &Array2<C64>, opts: &LduOptions, orientation: Orientation) -> Result<CrossResult> {
    let f = ldu(m, opts)?;
    let r = f.rank();
    let (nr, nc) = m.dim();
    let (a, b) = match orientation {
        Orientation::Left => {
            // A^T = Lp^-T L^T, solved row by row from the bottom.
            let mut at: Vec<C64> = f.l.t().iter().copied().collect();
            for c in (0..r).rev() {
                let (head, tail) = at.split_at_mut((c + 1) * nr);
                let row_c = &mut head[c * nr..];
                for j in c + 1..r {
                    let lp = f.l[[f.row_pivots[j], c]];
                    if lp != C64::new(0.0, 0.0) {
                        axpy(row_c, lp, &tail[(j - c - 1) * nr..(j - c) * nr]);
                    }
                }
            }
            let mut a =
                Array2::from_shape_vec((r, nr), at).expect("shape").reversed_axes().as_standard_layout().to_owned();
            for c in 0..r {
                for (k, &row) in f.row_pivots.iter().enumerate() {
                    a[[row, c]] = if k == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                }
            }
            let mut lpd = Array2::<C64>::zeros((r, r));
            for (k, &row) in f.row_pivots.iter().enumerate() {
                for c in 0..r {
                    lpd[[k, c]] = f.l[[row, c]] * f.d[c];
                }
            }
            (a, lpd.mm(&f.u))
        }
        Orientation::Right => {
            let mut ld = f.l.clone();
            for (mut col, &dk) in ld.columns_mut().into_iter().zip(&f.d) {
                col.mapv_inplace(|z| z * dk);
            }
            let mut up = Array2::<C64>::zeros((r, r));
            for c in 0..r {
                for (k, &col) in f.col_pivots.iter().enumerate() {
                    up[[c, k]] = f.u[[c, col]];
                }
            }
            let a = ld.mm(&up);
            let mut bv: Vec<C64> = f.u.iter().copied().collect();
            for c in (0..r).rev() {
                let (head, tail) = bv.split_at_mut((c + 1) * nc);
                let row_c = &mut head[c * nc..];
                for j in c + 1..r {
                    let uc = up[[c, j]];
                    if uc != C64::new(0.0, 0.0) {
                        axpy(row_c, uc, &tail[(j - c - 1) * nc..(j - c) * nc]);
                    }
                }
            }
            let mut b = Array2::from_shape_vec((r, nc), bv).expect("shape");
            for c in 0..r {
                for (k, &col) in f.col_pivots.iter().enumerate() {
                    b[[c, col]] = if k == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                }
            }
            (a, b)
        }
    };
    for z in a.iter().chain(b.iter()) {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Numerical("singular pivot block in cross interpolation".into()));
        }
    }
    Ok(CrossResult { a, b, row_pivots: f.row_pivots, col_pivots: f.col_pivots, error: f.error, orientation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random(m: usize, n: usize, seed: u64) -> Array2<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((m, n), || C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn maxdiff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity() {
        let m = Array2::<C64>::eye(2);
        let f = ldu(&m, &LduOptions::new(0.0, 2)).unwrap();
        assert_eq!(f.rank(), 2);
        assert_eq!(f.l, m);
        assert_eq!(f.u, m);
        assert_eq!(f.d, vec![c(1.0), c(1.0)]);
        assert_eq!(f.error, 0.0);
        assert_eq!(f.reconstruct(), m);
    }

    #[test]
    fn identity_rank_capped_reports_next_pivot() {
        let f = ldu(&Array2::<C64>::eye(2), &LduOptions::new(0.0, 1)).unwrap();
        assert_eq!(f.rank(), 1);
        assert_eq!(f.error, 1.0);
    }

    #[test]
    fn rank_one_stops_after_one_pivot() {
        let u = [c(1.0), C64::new(0.5, -2.0), c(3.0)];
        let v = [c(2.0), c(-1.0), C64::new(0.0, 1.0), c(0.25)];
        let m = Array2::from_shape_fn((3, 4), |(i, j)| u[i] * v[j]);
        let f = ldu(&m, &LduOptions::new(1e-12, 5)).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(f.error <= 1e-12);
        assert!(maxdiff(&f.reconstruct(), &m) <= 1e-12);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let f = ldu(&Array2::<C64>::zeros((3, 2)), &LduOptions::default()).unwrap();
        assert_eq!(f.rank(), 0);
        assert_eq!(f.error, 0.0);
        let x = cross_interpolate(&Array2::<C64>::zeros((3, 2)), &LduOptions::default(), Orientation::Left).unwrap();
        assert_eq!(x.a.dim(), (3, 0));
        assert_eq!(x.b.dim(), (0, 2));
    }

    #[test]
    fn rejects_non_finite_and_bad_options() {
        let mut m = Array2::<C64>::eye(3);
        m[[1, 2]] = C64::new(f64::NAN, 0.0);
        assert!(matches!(ldu(&m, &LduOptions::default()), Err(Error::NonFinite { row: 1, col: 2 })));
        assert!(ldu(&Array2::<C64>::eye(2), &LduOptions::new(-1.0, 2)).is_err());
        assert!(ldu(&Array2::<C64>::eye(2), &LduOptions::new(0.0, 0)).is_err());
    }

    #[test]
    fn ties_break_to_lowest_row_then_column() {
        let m = Array2::from_elem((3, 3), c(1.0));
        let f = ldu(&m, &LduOptions::default()).unwrap();
        assert_eq!((f.row_pivots[0], f.col_pivots[0]), (0, 0));
        let f = ldu(&Array2::<C64>::eye(3), &LduOptions::default()).unwrap();
        assert_eq!(f.row_pivots, vec![0, 1, 2]);
        assert_eq!(f.col_pivots, vec![0, 1, 2]);
    }

    #[test]
    fn each_pivot_is_the_largest_schur_entry() {
        let m = random(9, 7, 3);
        let f = ldu(&m, &LduOptions::default()).unwrap();
        let mut s = m.clone();
        for k in 0..f.rank() {
            let best = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((f.d[k].norm() - best).abs() <= 1e-12 * best);
            let (p, q) = (f.row_pivots[k], f.col_pivots[k]);
            let piv = s[[p, q]];
            let col = s.column(q).to_owned();
            let row = s.row(p).to_owned();
            for i in 0..9 {
                for j in 0..7 {
                    s[[i, j]] -= col[i] * row[j] / piv;
                }
            }
        }
    }

    #[test]
    fn residual_bounded_by_reported_error() {
        for seed in 0..20 {
            let m = random(8, 8, seed);
            let f = ldu(&m, &LduOptions::new(1e-3, 8)).unwrap();
            let res = maxdiff(&f.reconstruct(), &m);
            assert!(res <= f.error * (1.0 + 1e-10) + 1e-14, "{} > {}", res, f.error);
        }
    }

    #[test]
    fn relative_threshold() {
        let m = random(6, 6, 1).mapv(|z| z * 1e6);
        let abs = ldu(&m, &LduOptions::new(1e-3, 6)).unwrap();
        let rel = ldu(&m, &LduOptions { tol: 0.5, max_rank: 6, relative: true }).unwrap();
        assert_eq!(abs.rank(), 6);
        assert!(rel.rank() < 6);
        assert!(rel.error <= 0.5 * rel.d[0].norm());
    }

    #[test]
    fn left_and_right_cross() {
        let m = random(10, 7, 9);
        for o in [Orientation::Left, Orientation::Right] {
            let x = cross_interpolate(&m, &LduOptions::new(1e-6, 10), o).unwrap();
            assert!(maxdiff(&x.a.dot(&x.b), &m) <= 1e-12);
            for (k, &r) in x.row_pivots.iter().enumerate() {
                if o == Orientation::Left {
                    for c in 0..x.rank() {
                        assert_eq!(x.a[[r, c]], if c == k { c1() } else { c0() });
                    }
                }
            }
            if o == Orientation::Right {
                for c in 0..x.rank() {
                    for (k, &col) in x.col_pivots.iter().enumerate() {
                        assert_eq!(x.b[[c, col]], if c == k { c1() } else { c0() });
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_cross_reproduces_pivot_rows_and_columns() {
        let m = random(12, 9, 4);
        for o in [Orientation::Left, Orientation::Right] {
            let x = cross_interpolate(&m, &LduOptions::new(0.0, 4), o).unwrap();
            let ab = x.a.dot(&x.b);
            for &r in &x.row_pivots {
                for j in 0..9 {
                    assert!((ab[[r, j]] - m[[r, j]]).norm() <= 1e-13);
                }
            }
            for &col in &x.col_pivots {
                for i in 0..12 {
                    assert!((ab[[i, col]] - m[[i, col]]).norm() <= 1e-13);
                }
            }
        }
    }

    fn c0() -> C64 {
        C64::new(0.0, 0.0)
    }

    fn c1() -> C64 {
        C64::new(1.0, 0.0)
    }
}
