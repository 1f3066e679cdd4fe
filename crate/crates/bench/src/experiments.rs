use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_aci::aci::product;
use tt_aci::{
    aci, clamped_bond_dims, hadamard_fit, random_tt, sampled_max_error, tci_build, AciOptions, BlackBoxFunction,
    Entries, Evaluable, FitConfig, QuanticsGrid, Sampling, SweepReport, TciOptions, TensorTrain,
};

use crate::csv::{sci, CsvRow};
use crate::error::{BenchError, Result};

/// Offsets the error-sampling RNG from every input-generation stream.
const ERROR_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn error_seed(seed: u64) -> u64 {
    seed ^ ERROR_STREAM
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorSampling {
    Random {
        samples: usize,
    },
    /// Every grid point; only for small lengths.
    Exhaustive,
}

impl ErrorSampling {
    fn sampling(self, seed: u64) -> Sampling {
        match self {
            ErrorSampling::Random { samples } => Sampling::Random { samples, seed: error_seed(seed) },
            ErrorSampling::Exhaustive => Sampling::Exhaustive,
        }
    }
}

impl Default for ErrorSampling {
    fn default() -> Self {
        ErrorSampling::Random { samples: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    pub deltas: Vec<f64>,
    pub width: f64,
    pub length: usize,
    pub chi_primes: Vec<usize>,
    pub tol: f64,
    pub tci_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub error: ErrorSampling,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        GaussianSpec {
            deltas: vec![0.1, 0.4, 0.8],
            width: 0.15,
            length: 25,
            chi_primes: (4..=15).collect(),
            tol: 1e-15,
            tci_tol: 1e-14,
            max_iter: 20,
            seed: 0,
            error: ErrorSampling::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpec {
    pub ks: Vec<usize>,
    pub length: usize,
    pub tol: f64,
    pub max_bond: usize,
    pub tci_tol: f64,
    pub max_iter: usize,
    pub max_sweeps: usize,
    pub reps: usize,
    pub seed: u64,
    pub error: ErrorSampling,
}

impl Default for FourierSpec {
    fn default() -> Self {
        FourierSpec {
            ks: vec![16, 64, 256, 1024, 4096],
            length: 30,
            tol: 1e-8,
            max_bond: usize::MAX,
            tci_tol: 1e-12,
            max_iter: 20,
            max_sweeps: 30,
            reps: 3,
            seed: 0,
            error: ErrorSampling::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    /// Input bond dimensions; the output is capped at the same value.
    pub chis: Vec<usize>,
    pub length: usize,
    pub tol: f64,
    /// Iterations per timed run, for both methods.
    pub sweeps: usize,
    pub reps: usize,
    pub seed: u64,
    /// Bond dimensions whose fit working set exceeds this are skipped.
    pub mem_budget: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            chis: vec![16, 32, 64, 128, 256],
            length: 30,
            tol: 0.0,
            sweeps: 1,
            reps: 3,
            seed: 0,
            mem_budget: 3 << 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentSpec {
    Gaussians(GaussianSpec),
    Fourier(FourierSpec),
    Random(RandomSpec),
}

fn require(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(BenchError::Invalid(msg.into()))
    }
}

fn check_quantics(length: usize) -> Result<()> {
    require((1..=52).contains(&length), "quantics length must be in 1..=52")
}

fn check_error(e: ErrorSampling) -> Result<()> {
    match e {
        ErrorSampling::Random { samples } => require(samples > 0, "error samples must be positive"),
        ErrorSampling::Exhaustive => Ok(()),
    }
}

impl GaussianSpec {
    pub fn validate(&self) -> Result<()> {
        require(!self.deltas.is_empty() && !self.chi_primes.is_empty(), "delta and chi' lists must be nonempty")?;
        require(self.deltas.iter().all(|d| d.is_finite()), "deltas must be finite")?;
        require(self.width > 0.0 && self.width.is_finite(), "width must be positive")?;
        require(self.chi_primes.iter().all(|&c| c > 0), "chi' values must be positive")?;
        require(self.tol >= 0.0 && self.tci_tol >= 0.0, "tolerances must be nonnegative")?;
        require(self.max_iter > 0, "max_iter must be positive")?;
        check_error(self.error)?;
        check_quantics(self.length)
    }
}

impl FourierSpec {
    pub fn validate(&self) -> Result<()> {
        require(!self.ks.is_empty(), "K list must be nonempty")?;
        require(self.tol >= 0.0 && self.tci_tol >= 0.0, "tolerances must be nonnegative")?;
        require(self.max_bond > 0 && self.max_iter > 0 && self.max_sweeps > 0, "limits must be positive")?;
        require(self.reps > 0, "reps must be positive")?;
        check_error(self.error)?;
        check_quantics(self.length)
    }
}

impl RandomSpec {
    pub fn validate(&self) -> Result<()> {
        require(!self.chis.is_empty(), "chi list must be nonempty")?;
        require(self.chis.iter().all(|&c| c > 0), "chi values must be positive")?;
        require(self.chis.windows(2).all(|w| w[0] < w[1]), "chi list must be sorted ascending")?;
        require(self.length >= 2, "length must be at least 2")?;
        require(self.tol >= 0.0, "tolerance must be nonnegative")?;
        require(self.sweeps > 0 && self.reps > 0, "sweeps and reps must be positive")
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentSpec::Gaussians(s) => s.validate(),
            ExperimentSpec::Fourier(s) => s.validate(),
            ExperimentSpec::Random(s) => s.validate(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::Gaussians(_) => "gaussians",
            ExperimentSpec::Fourier(_) => "fourier",
            ExperimentSpec::Random(_) => "random",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianRow {
    pub delta: f64,
    pub chi_prime: usize,
    pub eps_inf: f64,
}

impl CsvRow for GaussianRow {
    const HEADER: &'static [&'static str] = &["delta", "chi_prime", "eps_inf"];
    const TIMING: &'static [usize] = &[];
    fn cells(&self) -> Vec<String> {
        vec![sci(self.delta), self.chi_prime.to_string(), sci(self.eps_inf)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierRow {
    pub k: usize,
    /// Larger bond dimension of the two inputs.
    pub chi: usize,
    /// Bond dimension of the ACI output.
    pub chi_prime: usize,
    pub t_aci: f64,
    pub t_fit: f64,
    pub eps_aci: f64,
    pub eps_fit: f64,
}

impl CsvRow for FourierRow {
    const HEADER: &'static [&'static str] = &["K", "chi", "chi_prime", "t_aci", "t_fit", "eps_aci", "eps_fit"];
    const TIMING: &'static [usize] = &[3, 4];
    fn cells(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.chi.to_string(),
            self.chi_prime.to_string(),
            sci(self.t_aci),
            sci(self.t_fit),
            sci(self.eps_aci),
            sci(self.eps_fit),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomRow {
    pub chi: usize,
    pub t_aci: f64,
    pub t_fit: f64,
}

impl CsvRow for RandomRow {
    const HEADER: &'static [&'static str] = &["chi", "t_aci", "t_fit"];
    const TIMING: &'static [usize] = &[1, 2];
    fn cells(&self) -> Vec<String> {
        vec![self.chi.to_string(), sci(self.t_aci), sci(self.t_fit)]
    }
}

/// Rows of one experiment plus anything the caller should report.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<R> {
    pub rows: Vec<R>,
    pub warnings: Vec<String>,
    pub non_converged: usize,
}

impl<R> Default for Outcome<R> {
    fn default() -> Self {
        Outcome { rows: Vec::new(), warnings: Vec::new(), non_converged: 0 }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median wall time in seconds over `reps` runs; returns the last run's output.
fn timed<T>(reps: usize, mut f: impl FnMut() -> tt_aci::Result<T>) -> Result<(T, f64)> {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let t0 = Instant::now();
        let out = f()?;
        times.push(t0.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((last.expect("reps >= 1"), median(times)))
}

fn tci(
    f: &dyn Evaluable,
    tol: f64,
    max_iter: usize,
    seed_pivot: Option<&[usize]>,
) -> Result<(TensorTrain, SweepReport)> {
    let opts = TciOptions { tol, max_iter, ..Default::default() };
    Ok(tci_build(f, &opts, seed_pivot)?)
}

pub fn gaussian(x: f64, center: f64, width: f64) -> f64 {
    (-(x - center).powi(2) / (2.0 * width * width)).exp()
}

/// `g₊(x) g₋(x)` in closed form.
pub fn gaussian_product(x: f64, delta: f64, width: f64) -> f64 {
    (-(x * x + delta * delta / 4.0) / (width * width)).exp()
}

pub fn run_gaussians(spec: &GaussianSpec) -> Result<Outcome<GaussianRow>> {
    run_gaussians_with(spec, |_| {})
}

/// As [`run_gaussians`], calling `progress` after every row.
pub fn run_gaussians_with(spec: &GaussianSpec, mut progress: impl FnMut(&GaussianRow)) -> Result<Outcome<GaussianRow>> {
    spec.validate()?;
    let grid = QuanticsGrid::new(-0.5, 0.5, spec.length)?;
    let dims = grid.local_dims();
    let x_of = |idx: &[usize]| grid.decode(idx).expect("index on grid");
    let mut out = Outcome::default();

    for &delta in &spec.deltas {
        let w = spec.width;
        let mut inputs = Vec::with_capacity(2);
        for center in [-delta / 2.0, delta / 2.0] {
            let g =
                BlackBoxFunction::new(dims.clone(), move |idx: &[usize]| C64::new(gaussian(x_of(idx), center, w), 0.0));
            // start at the peak so the first pivot is not vanishingly small
            let peak = grid.encode(center.clamp(grid.x_min(), grid.x_max() - grid.spacing()))?;
            let (tt, rep) = tci(&g, spec.tci_tol, spec.max_iter, Some(&peak))?;
            if !rep.converged {
                out.warnings.push(format!("delta {delta}: TCI of the input centred at {center} did not converge"));
                out.non_converged += 1;
            }
            inputs.push(tt);
        }
        let reference = BlackBoxFunction::new(dims.clone(), move |idx: &[usize]| {
            C64::new(gaussian_product(x_of(idx), delta, w), 0.0)
        });
        for &chi in &spec.chi_primes {
            let opts =
                AciOptions { tol: spec.tol, max_bond: chi, max_iter: spec.max_iter, seed: spec.seed, relative: false };
            let (y, rep) = aci(&product(2), &inputs, None, &opts)?;
            // a run pinned at the rank cap has done what was asked of it
            if !rep.converged && y.max_bond() < chi {
                out.warnings.push(format!("delta {delta}, chi' {chi}: ACI did not converge"));
                out.non_converged += 1;
            }
            let eps_inf = sampled_max_error(&y, &reference, spec.error.sampling(spec.seed))?;
            let row = GaussianRow { delta, chi_prime: chi, eps_inf };
            progress(&row);
            out.rows.push(row);
        }
    }
    Ok(out)
}

/// `K + 1` coefficients with U[0,1) real and imaginary parts, normalized to unit 2-norm.
pub fn fourier_coefficients<R: Rng>(k: usize, rng: &mut R) -> Vec<C64> {
    let mut c: Vec<C64> = (0..=k)
        .map(|_| {
            let re = rng.random::<f64>();
            C64::new(re, rng.random::<f64>())
        })
        .collect();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut c {
        *z /= norm;
    }
    c
}

/// `Σ_k c_k e^{ikx}` by Horner's rule in `e^{ix}`.
pub fn fourier_series(c: &[C64], x: f64) -> C64 {
    let z = C64::from_polar(1.0, x);
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

pub fn run_fourier(spec: &FourierSpec) -> Result<Outcome<FourierRow>> {
    run_fourier_with(spec, |_| {})
}

pub fn run_fourier_with(spec: &FourierSpec, mut progress: impl FnMut(&FourierRow)) -> Result<Outcome<FourierRow>> {
    spec.validate()?;
    let grid = QuanticsGrid::new(0.0, 1.0, spec.length)?;
    let dims = grid.local_dims();
    let x_of = |idx: &[usize]| grid.decode(idx).expect("index on grid");
    let mut out = Outcome::default();

    for &k in &spec.ks {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(k as u64);
        let c1 = fourier_coefficients(k, &mut rng);
        let c2 = fourier_coefficients(k, &mut rng);
        let mut inputs = Vec::with_capacity(2);
        for c in [&c1, &c2] {
            let g = BlackBoxFunction::new(dims.clone(), |idx: &[usize]| fourier_series(c, x_of(idx)));
            let (tt, rep) = tci(&g, spec.tci_tol, spec.max_iter, None)?;
            if !rep.converged {
                out.warnings.push(format!("K {k}: input TCI did not converge"));
                out.non_converged += 1;
            }
            inputs.push(tt);
        }
        let reference = BlackBoxFunction::new(dims.clone(), |idx: &[usize]| {
            let x = x_of(idx);
            fourier_series(&c1, x) * fourier_series(&c2, x)
        });

        let opts = AciOptions {
            tol: spec.tol,
            max_bond: spec.max_bond,
            max_iter: spec.max_iter,
            seed: spec.seed,
            relative: false,
        };
        let f = product(2);
        let ((y_aci, rep_aci), t_aci) = timed(spec.reps, || aci(&f, &inputs, None, &opts))?;
        let cfg =
            FitConfig { tol: spec.tol, max_bond: spec.max_bond, max_sweeps: spec.max_sweeps, ..Default::default() };
        let ((y_fit, rep_fit), t_fit) = timed(spec.reps, || hadamard_fit(&inputs[0], &inputs[1], &cfg))?;
        for (name, rep) in [("ACI", &rep_aci), ("fit", &rep_fit)] {
            if !rep.converged {
                out.warnings.push(format!("K {k}: {name} did not converge in {} sweeps", rep.sweeps));
                out.non_converged += 1;
            }
        }
        let sampling = spec.error.sampling(spec.seed);
        let row = FourierRow {
            k,
            chi: inputs[0].max_bond().max(inputs[1].max_bond()),
            chi_prime: y_aci.max_bond(),
            t_aci,
            t_fit,
            eps_aci: sampled_max_error(&y_aci, &reference, sampling)?,
            eps_fit: sampled_max_error(&y_fit, &reference, sampling)?,
        };
        progress(&row);
        out.rows.push(row);
    }
    Ok(out)
}

/// Rough peak bytes of one two-site fit update at bond `chi`, local dimension `d`.
pub fn fit_working_set(chi: usize, d: usize) -> usize {
    let c = chi.saturating_mul(chi).saturating_mul(chi).saturating_mul(d);
    c.saturating_mul(4).saturating_mul(16)
}

/// Uniform random train with each core scaled by `2/χ_left`, keeping entries O(1) at any χ.
pub fn scaled_random_tt(length: usize, chi: usize, seed: u64) -> Result<TensorTrain> {
    let dims = vec![2; length];
    let mut tt = random_tt(&dims, &clamped_bond_dims(&dims, chi), seed, Entries::Real)?;
    for l in 0..length {
        let cl = tt.core(l).dim().0 as f64;
        tt.scale_core(l, C64::new(2.0 / cl, 0.0));
    }
    Ok(tt)
}

pub fn run_random(spec: &RandomSpec) -> Result<Outcome<RandomRow>> {
    run_random_with(spec, |_| {})
}

pub fn run_random_with(spec: &RandomSpec, mut progress: impl FnMut(&RandomRow)) -> Result<Outcome<RandomRow>> {
    spec.validate()?;
    let mut out = Outcome::default();
    for &chi in &spec.chis {
        let need = fit_working_set(chi, 2);
        if need > spec.mem_budget {
            out.warnings.push(format!(
                "chi {chi}: fit needs about {} MiB, over the {} MiB budget; stopping the sweep here",
                need >> 20,
                spec.mem_budget >> 20
            ));
            break;
        }
        let base = spec.seed.wrapping_add((chi as u64) << 32);
        let inputs =
            [scaled_random_tt(spec.length, chi, base)?, scaled_random_tt(spec.length, chi, base.wrapping_add(1))?];
        let opts = AciOptions { tol: spec.tol, max_bond: chi, max_iter: spec.sweeps, seed: spec.seed, relative: false };
        let f = product(2);
        let (_, t_aci) = timed(spec.reps, || aci(&f, &inputs, None, &opts))?;
        let cfg = FitConfig { tol: spec.tol, max_bond: chi, max_sweeps: spec.sweeps, ..Default::default() };
        let (_, t_fit) = timed(spec.reps, || hadamard_fit(&inputs[0], &inputs[1], &cfg))?;
        let row = RandomRow { chi, t_aci, t_fit };
        progress(&row);
        out.rows.push(row);
    }
    Ok(out)
}
